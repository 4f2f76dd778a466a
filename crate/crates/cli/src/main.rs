use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use logicprobe::contrast::ContrastKind;
use logicprobe::equivalence::EquivalenceKind;
use logicprobe::nlg::{Renderer, TemplateSet, Vocabulary};
use logicprobe::pipeline::dataset::Sizes;
use logicprobe::pipeline::export::{pick_demos, DEFAULT_DEMOS};
use logicprobe::pipeline::instance::InstanceParts;
use logicprobe::pipeline::{
    audit, build_dataset, build_eval_set, emit_jsonl, export_model_input, read_jsonl, write_jsonl, AuditConfig,
    DatasetConfig, EvalKind, ExportFormat, Instance, Metadata,
};
use logicprobe::scorer::{read_predictions, score, ScoreConfig};
use logicprobe::seed::keyed_seed;
use logicprobe::{inference, OperatorProfile};

#[derive(Parser)]
#[command(name = "logicprobe", version, about = "Generate, perturb, audit, export and score deductive-reasoning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample train/dev/test splits.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 0)]
        train: usize,
        #[arg(long, default_value_t = 0)]
        dev: usize,
        #[arg(long, default_value_t = 0)]
        test: usize,
        /// Output directory for train/dev/test.jsonl and metadata.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a logical contrast set (conjunction, disjunction or negation).
    Contrast {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long = "type", value_parser = parse_contrast)]
        kind: ContrastKind,
        /// Minimum number of instances; whole families are emitted.
        #[arg(long)]
        count: usize,
        /// JSONL output file (stdout when absent); metadata goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a logical equivalence set (contrapositive, D1 or D2).
    Equivalence {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long = "type", value_parser = parse_equivalence)]
        kind: EquivalenceKind,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report label bias of count features.
    Audit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        #[arg(long, default_value_t = 100)]
        min_support: usize,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Exit with status 2 when any feature value is flagged.
        #[arg(long)]
        strict: bool,
    },
    /// Write model inputs and targets as JSONL.
    Export {
        #[arg(long)]
        data: PathBuf,
        /// concat-cls, seq2seq-prefix or prompt-3shot
        #[arg(long)]
        format: String,
        /// Pool of demonstrations for prompt-3shot (defaults to --data).
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DEMOS)]
        n_demos: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a prediction file against a dataset.
    Score {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        preds: PathBuf,
        /// Write the report as JSON; the table always goes to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0.99)]
        min_coverage: f64,
        /// Ignore predictions for ids that are not in the dataset.
        #[arg(long)]
        allow_extra: bool,
    },
    /// Reduce each theory to the proof of its statement.
    StripDistractors {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        text: TextArgs,
        /// Seed for re-rendering the reduced contexts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct TextArgs {
    /// Vocabulary file replacing the built-in one.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Template file replacing the built-in one.
    #[arg(long)]
    templates: Option<PathBuf>,
}

impl TextArgs {
    fn renderer(&self) -> Result<Renderer> {
        let vocab = match &self.vocab {
            Some(p) => Vocabulary::load(p)?,
            None => Vocabulary::default(),
        };
        let templates = match &self.templates {
            Some(p) => TemplateSet::load(p)?,
            None => TemplateSet::default(),
        };
        Ok(Renderer::new(vocab, templates))
    }
}

#[derive(Args)]
struct GenArgs {
    /// not, and-not, or-not or all
    #[arg(long, default_value = "all")]
    profile: OperatorProfile,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of layers (reasoning depth).
    #[arg(long)]
    depth: Option<usize>,
    /// Probability of negating a sampled predicate.
    #[arg(long)]
    n1: Option<f64>,
    /// Probability of a False rather than True base statement.
    #[arg(long)]
    n2: Option<f64>,
    /// Statements per label per theory.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    no_unknown: bool,
    #[arg(long)]
    no_distractors: bool,
    /// Worker threads (0 = one per core). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// TOML file whose settings override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    text: TextArgs,
}

impl GenArgs {
    fn dataset_config(&self) -> Result<DatasetConfig> {
        let mut cfg = DatasetConfig::default();
        cfg.sampler.profile = self.profile;
        cfg.sampler.seed = self.seed;
        if let Some(d) = self.depth {
            cfg.sampler.max_depth = d;
        }
        if let Some(p) = self.n1 {
            cfg.sampler.fact_negation_prob = p;
        }
        if let Some(p) = self.n2 {
            cfg.sampler.statement_negation_prob = p;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        cfg.no_unknown = self.no_unknown;
        cfg.no_distractors = self.no_distractors;
        if let Some(path) = &self.config {
            cfg = overlay_config(cfg, path)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_contrast(s: &str) -> Result<ContrastKind, String> {
    match s {
        "conj" => Ok(ContrastKind::Conj),
        "disj" => Ok(ContrastKind::Disj),
        "neg" => Ok(ContrastKind::Neg),
        other => Err(format!("expected conj, disj or neg, got {other:?}")),
    }
}

fn parse_equivalence(s: &str) -> Result<EquivalenceKind, String> {
    s.parse()
}

/// Merge a TOML table over the flag-derived configuration.
fn overlay_config(cfg: DatasetConfig, path: &Path) -> Result<DatasetConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let overlay: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut base = serde_json::to_value(&cfg)?;
    merge(&mut base, serde_json::to_value(overlay)?);
    serde_json::from_value(base).with_context(|| format!("invalid configuration in {}", path.display()))
}

fn merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn write_eval(instances: &[Instance], metadata: &Metadata, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            write_jsonl(path, instances)?;
            write_json(&sidecar_path(path), metadata)
        }
        None => Ok(emit_jsonl(instances, BufWriter::new(io::stdout().lock()))?),
    }
}

fn run_generate(gen: &GenArgs, sizes: Sizes, out: &Path) -> Result<()> {
    let cfg = gen.dataset_config()?;
    let renderer = gen.text.renderer()?;
    let data = build_dataset(&cfg, sizes, &renderer, gen.jobs)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_jsonl(&out.join("train.jsonl"), &data.train)?;
    write_jsonl(&out.join("dev.jsonl"), &data.dev)?;
    write_jsonl(&out.join("test.jsonl"), &data.test)?;
    write_json(&out.join("metadata.json"), &data.metadata)
}

fn run_eval(gen: &GenArgs, kind: EvalKind, count: usize, out: Option<&Path>) -> Result<()> {
    let cfg = gen.dataset_config()?;
    let renderer = gen.text.renderer()?;
    let set = build_eval_set(kind, count, &cfg, &renderer, gen.jobs)?;
    write_eval(&set.instances, &set.metadata, out)
}

fn run_audit(data: &Path, cfg: AuditConfig, report: Option<&Path>, strict: bool) -> Result<ExitCode> {
    let instances = read_jsonl(data)?;
    let rep = audit(&instances, cfg)?;
    println!("instances: {}", rep.total);
    println!(
        "marginal: True {:.4} False {:.4} Unknown {:.4}",
        rep.marginal[0], rep.marginal[1], rep.marginal[2]
    );
    println!("max TV over values with support >= {}: {:.4}", cfg.min_support, rep.max_tv);
    for f in &rep.flagged {
        println!("flagged: {}={} support {} TV {:.4}", f.feature, f.value, f.support, f.tv);
    }
    if let Some(path) = report {
        write_json(path, &rep)?;
    }
    Ok(if strict && !rep.passed() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

#[derive(Serialize)]
struct ExportRecord<'a> {
    id: &'a str,
    input: String,
    target: String,
}

fn run_export(data: &Path, format: ExportFormat, demos: Option<&Path>, n_demos: usize, out: Option<&Path>) -> Result<()> {
    let instances = read_jsonl(data)?;
    let pool = match demos {
        Some(p) => read_jsonl(p)?,
        None => instances.clone(),
    };
    let mut lines = Vec::with_capacity(instances.len());
    for inst in &instances {
        let demos = if format == ExportFormat::Prompt3shot { pick_demos(inst, &pool, n_demos) } else { Vec::new() };
        let e = export_model_input(inst, format, &demos);
        lines.push(serde_json::to_string(&ExportRecord { id: &inst.id, input: e.input, target: e.target })?);
    }
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for line in lines {
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}

fn run_score(data: &Path, preds: &Path, cfg: ScoreConfig, report: Option<&Path>) -> Result<()> {
    let instances = read_jsonl(data)?;
    let predictions = read_predictions(preds)?;
    let rep = score(&instances, &predictions, cfg)?;
    print!("{}", rep.to_table());
    if let Some(path) = report {
        write_json(path, &rep)?;
    }
    Ok(())
}

fn run_strip(data: &Path, out: &Path, renderer: &Renderer, seed: u64) -> Result<()> {
    let instances = read_jsonl(data)?;
    let mut kept = Vec::with_capacity(instances.len());
    let mut dropped = 0usize;
    for inst in &instances {
        let Some(proof) = &inst.proof else {
            dropped += 1;
            continue;
        };
        let theory = proof.to_proof_set().restrict(&inst.theory());
        let label = inference::entail_label(&theory, &inst.lf.statement)?;
        if label != inst.label {
            bail!("instance {}: reduced theory gives {label}, expected {}", inst.id, inst.label);
        }
        let mut stripped = Instance::build(
            InstanceParts {
                family_id: &inst.family_id,
                row: 0,
                subset: inst.subset,
                group: inst.group,
                theory: &theory,
                statement: &inst.lf.statement,
                label,
                label_source: inst.meta.label_source,
                render_seed: keyed_seed(seed, &inst.family_id),
            },
            renderer,
        )?;
        // Keep the original id; only the theory and its rendering change.
        stripped.id = inst.id.clone();
        kept.push(stripped);
    }
    write_jsonl(out, &kept)?;
    eprintln!("kept {} instances, dropped {dropped} without a chaining proof", kept.len());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { gen, train, dev, test, out } => run_generate(&gen, Sizes { train, dev, test }, &out)?,
        Command::Contrast { gen, kind, count, out } => {
            run_eval(&gen, EvalKind::from_contrast(kind), count, out.as_deref())?
        }
        Command::Equivalence { gen, kind, count, out } => {
            run_eval(&gen, EvalKind::from_equivalence(kind), count, out.as_deref())?
        }
        Command::Audit { data, threshold, min_support, report, strict } => {
            return run_audit(&data, AuditConfig { tv_threshold: threshold, min_support }, report.as_deref(), strict)
        }
        Command::Export { data, format, demos, n_demos, out } => {
            let format: ExportFormat = match format.parse() {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(1));
                }
            };
            run_export(&data, format, demos.as_deref(), n_demos, out.as_deref())?
        }
        Command::Score { data, preds, report, min_coverage, allow_extra } => {
            run_score(&data, &preds, ScoreConfig { min_coverage, allow_extra }, report.as_deref())?
        }
        Command::StripDistractors { data, out, text, seed } => run_strip(&data, &out, &text.renderer()?, seed)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        // A closed downstream pipe (e.g. `| head`) is not a failure.
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
