//! Split and evaluation-set construction.
//!
//! Theories are drawn from per-subset seed streams and processed in fixed
//! chunks on a worker pool; results are consumed strictly in index order,
//! so output bytes do not depend on the number of workers.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::{audit, AuditConfig};
use super::balance::{balance_statements, truncate_balanced};
use super::instance::{family_id, Instance, InstanceParts, LabelSource, Subset};
use super::PipelineError;
use crate::contrast::{make_family, ContrastError, ContrastKind, Group};
use crate::equivalence::{make_equivalence_pair, EquivalenceError, EquivalenceKind};
use crate::inference::{closure, strip_distractors};
use crate::logic::{Label, Literal, OperatorProfile, Theory};
use crate::nlg::Renderer;
use crate::sampler::{Sampler, SamplerConfig, SamplerError};
use crate::seed::{child_seed, keyed_seed, rng_from};

/// Theories evaluated per parallel batch. Fixed so that the set of theories
/// examined never depends on the worker count.
const CHUNK: u64 = 64;

/// Largest predicate pool for contrapositive sets, so every theory stays
/// within the truth-table budget of the coherence check.
const CONTRA_MAX_PREDICATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub sampler: SamplerConfig,
    /// Statements per label per theory in the train/dev/test splits.
    pub k: usize,
    /// Drop Unknown statements everywhere.
    pub no_unknown: bool,
    /// Reduce evaluation-set base theories to the statement's proof.
    pub no_distractors: bool,
    pub audit: AuditConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            sampler: SamplerConfig::default(),
            k: 2,
            no_unknown: false,
            no_distractors: false,
            audit: AuditConfig::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.sampler.validate()?;
        if self.k == 0 {
            return Err(PipelineError::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Sizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalKind {
    Ccs,
    Dcs,
    Ncs,
    Ces,
    D1es,
    D2es,
}

enum FamilyKind {
    Contrast(ContrastKind),
    Equivalence(EquivalenceKind),
}

impl EvalKind {
    pub const ALL: [EvalKind; 6] = [EvalKind::Ccs, EvalKind::Dcs, EvalKind::Ncs, EvalKind::Ces, EvalKind::D1es, EvalKind::D2es];

    pub fn subset(self) -> Subset {
        match self {
            EvalKind::Ccs => Subset::Ccs,
            EvalKind::Dcs => Subset::Dcs,
            EvalKind::Ncs => Subset::Ncs,
            EvalKind::Ces => Subset::Ces,
            EvalKind::D1es => Subset::D1es,
            EvalKind::D2es => Subset::D2es,
        }
    }

    pub fn from_contrast(kind: ContrastKind) -> EvalKind {
        match kind {
            ContrastKind::Conj => EvalKind::Ccs,
            ContrastKind::Disj => EvalKind::Dcs,
            ContrastKind::Neg => EvalKind::Ncs,
        }
    }

    pub fn from_equivalence(kind: EquivalenceKind) -> EvalKind {
        match kind {
            EquivalenceKind::Contra => EvalKind::Ces,
            EquivalenceKind::D1 => EvalKind::D1es,
            EquivalenceKind::D2 => EvalKind::D2es,
        }
    }

    /// Instances per family when no filter drops any.
    pub fn family_size(self) -> usize {
        match self.family_kind() {
            FamilyKind::Contrast(k) => k.family_size(),
            FamilyKind::Equivalence(_) => 2,
        }
    }

    fn family_kind(self) -> FamilyKind {
        match self {
            EvalKind::Ccs => FamilyKind::Contrast(ContrastKind::Conj),
            EvalKind::Dcs => FamilyKind::Contrast(ContrastKind::Disj),
            EvalKind::Ncs => FamilyKind::Contrast(ContrastKind::Neg),
            EvalKind::Ces => FamilyKind::Equivalence(EquivalenceKind::Contra),
            EvalKind::D1es => FamilyKind::Equivalence(EquivalenceKind::D1),
            EvalKind::D2es => FamilyKind::Equivalence(EquivalenceKind::D2),
        }
    }

    /// Labels a base statement may carry.
    fn base_labels(self) -> &'static [Label] {
        match self {
            EvalKind::Ces => &[Label::True, Label::False, Label::Unknown],
            _ => &[Label::True, Label::False],
        }
    }
}

impl FromStr for EvalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EvalKind::ALL
            .into_iter()
            .find(|k| k.subset().as_str() == s)
            .ok_or_else(|| format!("unknown evaluation set {s:?}"))
    }
}

/// Per-subset bookkeeping written to the metadata sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    pub subset: Option<Subset>,
    pub instances: usize,
    pub families: usize,
    pub theories_examined: u64,
    pub labels: BTreeMap<Label, usize>,
    /// Discarded theories or candidate families, by reason.
    pub discards: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub subset: Subset,
    pub max_tv: f64,
    pub flagged: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub command: String,
    pub seed: u64,
    pub config: DatasetConfig,
    pub subsets: Vec<SubsetSummary>,
    pub audit: Option<AuditSummary>,
}

impl Metadata {
    fn new(command: &str, cfg: &DatasetConfig) -> Metadata {
        Metadata {
            generator: format!("logicprobe {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            seed: cfg.sampler.seed,
            config: cfg.clone(),
            subsets: Vec::new(),
            audit: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<Instance>,
    pub dev: Vec<Instance>,
    pub test: Vec<Instance>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone)]
pub struct EvalSet {
    pub kind: EvalKind,
    pub instances: Vec<Instance>,
    pub metadata: Metadata,
}

pub fn subset_seed(master: u64, subset: Subset) -> u64 {
    let ordinal = Subset::ALL.iter().position(|s| *s == subset).expect("listed subset") as u64;
    child_seed(master, ordinal)
}

/// Result of examining one theory index.
struct Outcome {
    /// Base theory text, for cross-split deduplication.
    key: Option<String>,
    /// Instances with placeholder ids; empty when the theory was discarded.
    family: Vec<Instance>,
    discards: Vec<String>,
}

impl Outcome {
    fn discarded(reason: impl Into<String>) -> Outcome {
        Outcome { key: None, family: Vec::new(), discards: vec![reason.into()] }
    }
}

/// Pool that runs the per-theory work; 0 workers means rayon's default.
fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| PipelineError::Config(e.to_string()))
}

/// Give up when this many theories in a row produce nothing usable.
const STALL_LIMIT: u64 = 5_000;

struct Collector<'a> {
    subset: Subset,
    target: usize,
    /// Trim the last family to hit `target` exactly (splits) or keep whole
    /// families (evaluation sets).
    exact: bool,
    per_round: usize,
    seen: &'a mut HashSet<String>,
}

impl Collector<'_> {
    fn run<F>(self, pool: &rayon::ThreadPool, make: F) -> Result<(Vec<Instance>, SubsetSummary), PipelineError>
    where
        F: Fn(u64) -> Result<Outcome, PipelineError> + Sync,
    {
        let mut out = Vec::with_capacity(self.target);
        let mut summary = SubsetSummary { subset: Some(self.subset), ..Default::default() };
        let mut next = 0u64;
        let mut since_last = 0u64;
        while out.len() < self.target {
            let batch: Vec<Result<Outcome, PipelineError>> =
                pool.install(|| (next..next + CHUNK).into_par_iter().map(&make).collect());
            for outcome in batch {
                if out.len() >= self.target {
                    break;
                }
                summary.theories_examined += 1;
                let outcome = outcome?;
                for d in outcome.discards {
                    *summary.discards.entry(d).or_default() += 1;
                }
                let accepted = match outcome.key {
                    Some(key) if !outcome.family.is_empty() => {
                        if self.seen.insert(key) {
                            true
                        } else {
                            *summary.discards.entry("duplicate theory".into()).or_default() += 1;
                            false
                        }
                    }
                    _ => false,
                };
                if !accepted {
                    since_last += 1;
                    if since_last >= STALL_LIMIT {
                        return Err(PipelineError::Sampler(SamplerError::ResampleBudgetExhausted {
                            index: summary.theories_examined,
                            attempts: STALL_LIMIT as usize,
                        }));
                    }
                    continue;
                }
                since_last = 0;
                let mut family = outcome.family;
                if self.exact && out.len() + family.len() > self.target {
                    family = truncate_balanced(&family, |i| i.label, self.target - out.len(), self.per_round);
                }
                let fid = family_id(self.subset, summary.families);
                for (row, mut inst) in family.into_iter().enumerate() {
                    inst.id = format!("{fid}-{row}");
                    inst.family_id = fid.clone();
                    *summary.labels.entry(inst.label).or_default() += 1;
                    out.push(inst);
                }
                summary.families += 1;
            }
            next += CHUNK;
        }
        summary.instances = out.len();
        Ok((out, summary))
    }
}

fn build_family(
    subset: Subset,
    members: &[(Theory, Literal, Label, Group, LabelSource)],
    render_seed: u64,
    renderer: &Renderer,
) -> Result<Vec<Instance>, PipelineError> {
    members
        .iter()
        .enumerate()
        .map(|(row, (theory, statement, label, group, label_source))| {
            Instance::build(
                InstanceParts {
                    family_id: "",
                    row,
                    subset,
                    group: *group,
                    theory,
                    statement,
                    label: *label,
                    label_source: *label_source,
                    render_seed,
                },
                renderer,
            )
        })
        .collect()
}

fn split_outcome(
    sampler: &Sampler<'_>,
    cfg: &DatasetConfig,
    renderer: &Renderer,
    subset: Subset,
    stream: u64,
    index: u64,
) -> Result<Outcome, PipelineError> {
    let theory_seed = child_seed(stream, index);
    let st = sampler.sample_from_stream(theory_seed, index)?;
    let mut rng = rng_from(keyed_seed(theory_seed, "statements"));
    let statements = match balance_statements(&st, cfg.k, &mut rng) {
        Ok(s) => s,
        Err(_) => return Ok(Outcome::discarded("unbalanced label supply")),
    };
    let members: Vec<_> = statements
        .into_iter()
        .filter(|(_, l)| !(cfg.no_unknown && *l == Label::Unknown))
        .map(|(s, l)| (st.theory.clone(), s, l, Group::Base, LabelSource::Chaining))
        .collect();
    let family = build_family(subset, &members, keyed_seed(theory_seed, "render"), renderer)?;
    Ok(Outcome { key: Some(st.theory.to_string()), family, discards: Vec::new() })
}

/// Train, dev and test splits with disjoint theories.
pub fn build_dataset(cfg: &DatasetConfig, sizes: Sizes, renderer: &Renderer, jobs: usize) -> Result<Dataset, PipelineError> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg.sampler.clone(), &renderer.vocab)?;
    let pool = worker_pool(jobs)?;
    let per_round = if cfg.no_unknown { 2 } else { 3 };
    let mut seen = HashSet::new();
    let mut metadata = Metadata::new("generate", cfg);
    let mut splits = Vec::with_capacity(3);
    for (subset, target) in [(Subset::Train, sizes.train), (Subset::Dev, sizes.dev), (Subset::Test, sizes.test)] {
        let stream = subset_seed(cfg.sampler.seed, subset);
        let collector = Collector { subset, target, exact: true, per_round, seen: &mut seen };
        let (instances, summary) =
            collector.run(&pool, |i| split_outcome(&sampler, cfg, renderer, subset, stream, i))?;
        metadata.subsets.push(summary);
        splits.push(instances);
    }
    let test = splits.pop().unwrap_or_default();
    let dev = splits.pop().unwrap_or_default();
    let train = splits.pop().unwrap_or_default();
    if !train.is_empty() {
        let report = audit(&train, cfg.audit)?;
        metadata.audit = Some(AuditSummary {
            subset: Subset::Train,
            max_tv: report.max_tv,
            flagged: report.flagged.len(),
            passed: report.passed(),
        });
    }
    Ok(Dataset { train, dev, test, metadata })
}

/// Sampler settings for an evaluation set: contrapositive sets need simple
/// rules and a predicate pool the truth-table oracle can enumerate.
pub fn eval_sampler_config(kind: EvalKind, base: &SamplerConfig) -> SamplerConfig {
    let mut cfg = base.clone();
    if kind == EvalKind::Ces {
        cfg.profile = OperatorProfile::Not;
        cfg.pred_count_max = cfg.pred_count_max.min(CONTRA_MAX_PREDICATES);
        cfg.pred_count_min = cfg.pred_count_min.min(cfg.pred_count_max);
    }
    cfg
}

type Member = (Theory, Literal, Label, Group, LabelSource);

/// Statement candidates grouped by label, in random order.
fn candidates<R: Rng + ?Sized>(theory: &Theory, preds: &[Literal], rng: &mut R) -> BTreeMap<Label, Vec<Literal>> {
    let c = closure(theory);
    let mut by_label: BTreeMap<Label, Vec<Literal>> = BTreeMap::new();
    for p in preds {
        if c.contains(p) {
            by_label.entry(Label::True).or_default().push(p.clone());
            by_label.entry(Label::False).or_default().push(p.complement());
        } else {
            by_label.entry(Label::Unknown).or_default().push(p.clone());
        }
    }
    for v in by_label.values_mut() {
        v.shuffle(rng);
    }
    by_label
}

fn contrast_reason(e: &ContrastError) -> String {
    match e {
        ContrastError::NotProvable(_) => "statement not provable".into(),
        ContrastError::NoEligibleRule(_) => "no eligible target rule".into(),
        ContrastError::VocabularyExhausted => "vocabulary exhausted".into(),
        ContrastError::TableMismatch { .. } => "table mismatch".into(),
        ContrastError::Inference(_) => "inconsistent theory".into(),
    }
}

fn equivalence_reason(e: &EquivalenceError) -> Option<String> {
    Some(match e {
        EquivalenceError::NonSimpleRule(_) => "non-simple rule".into(),
        EquivalenceError::NoMergeablePair(_) => "no mergeable pair".into(),
        EquivalenceError::InvalidMergedRule(_) => "invalid merged rule".into(),
        EquivalenceError::NoTarget(_) => "no rule to plant on".into(),
        EquivalenceError::NoRules => "no rules to rewrite".into(),
        EquivalenceError::CoherenceViolation { .. } => "coherence violation".into(),
        EquivalenceError::Classical(_) => "outside truth-table budget".into(),
        EquivalenceError::Contrast(e) => contrast_reason(e),
        // A rewrite that changes a truth table is a bug, not a discard.
        EquivalenceError::RewriteNotEquivalent | EquivalenceError::Inference(_) => return None,
    })
}

/// Try one candidate statement; Ok(None) with a reason when it does not
/// yield a usable family.
fn try_family<R: Rng + ?Sized>(
    kind: EvalKind,
    theory: &Theory,
    s: &Literal,
    renderer: &Renderer,
    rng: &mut R,
) -> Result<Result<Vec<Member>, String>, PipelineError> {
    match kind.family_kind() {
        FamilyKind::Contrast(ck) => match make_family(ck, theory, s, &renderer.vocab, rng) {
            Ok(f) if !f.complete => Ok(Err("incomplete family".into())),
            Ok(f) => Ok(Ok(f
                .members()
                .map(|v| (v.theory.clone(), v.statement.clone(), v.label, v.group, LabelSource::Chaining))
                .collect())),
            Err(e) => Ok(Err(contrast_reason(&e))),
        },
        FamilyKind::Equivalence(ek) => match make_equivalence_pair(ek, theory, s, &renderer.vocab, rng) {
            Ok(p) => Ok(Ok(vec![
                (p.base, p.statement.clone(), p.label, Group::Base, LabelSource::Chaining),
                (p.paraphrase, p.statement, p.label, Group::Paraphrase, LabelSource::Carried),
            ])),
            Err(e) => match equivalence_reason(&e) {
                Some(reason) => Ok(Err(reason)),
                None => Err(e.into()),
            },
        },
    }
}

fn eval_outcome(
    kind: EvalKind,
    sampler: &Sampler<'_>,
    cfg: &DatasetConfig,
    renderer: &Renderer,
    stream: u64,
    index: u64,
) -> Result<Outcome, PipelineError> {
    let theory_seed = child_seed(stream, index);
    let st = sampler.sample_from_stream(theory_seed, index)?;
    let mut rng = rng_from(keyed_seed(theory_seed, "family"));
    let mut by_label = candidates(&st.theory, &st.predicates, &mut rng);

    // Preferred base label first, the others as fallbacks.
    let allowed = kind.base_labels();
    let unknown = allowed.contains(&Label::Unknown) && rng.gen_bool(1.0 / allowed.len() as f64);
    let first = if unknown {
        Label::Unknown
    } else if rng.gen_bool(cfg.sampler.statement_negation_prob) {
        Label::False
    } else {
        Label::True
    };
    let order = std::iter::once(&first).chain(allowed.iter().filter(|l| **l != first));
    let mut discards = Vec::new();
    for label in order {
        for s in by_label.remove(label).unwrap_or_default() {
            let base = if cfg.no_distractors {
                match strip_distractors(&st.theory, &s) {
                    Ok(t) => t,
                    Err(_) => continue,
                }
            } else {
                st.theory.clone()
            };
            match try_family(kind, &base, &s, renderer, &mut rng)? {
                Ok(members) => {
                    let members: Vec<Member> =
                        members.into_iter().filter(|m| !(cfg.no_unknown && m.2 == Label::Unknown)).collect();
                    if members.is_empty() {
                        continue;
                    }
                    let family = build_family(kind.subset(), &members, keyed_seed(theory_seed, "render"), renderer)?;
                    return Ok(Outcome { key: Some(st.theory.to_string()), family, discards });
                }
                Err(reason) => discards.push(reason),
            }
        }
    }
    discards.push("no usable statement".into());
    Ok(Outcome { key: None, family: Vec::new(), discards })
}

/// Whole families until at least `count` instances.
pub fn build_eval_set(
    kind: EvalKind,
    count: usize,
    cfg: &DatasetConfig,
    renderer: &Renderer,
    jobs: usize,
) -> Result<EvalSet, PipelineError> {
    cfg.validate()?;
    if count == 0 {
        return Err(PipelineError::Config("count must be at least 1".into()));
    }
    let sampler = Sampler::new(eval_sampler_config(kind, &cfg.sampler), &renderer.vocab)?;
    let pool = worker_pool(jobs)?;
    let subset = kind.subset();
    let stream = subset_seed(cfg.sampler.seed, subset);
    let mut seen = HashSet::new();
    let collector = Collector { subset, target: count, exact: false, per_round: 3, seen: &mut seen };
    let (instances, summary) = collector.run(&pool, |i| eval_outcome(kind, &sampler, cfg, renderer, stream, i))?;
    let mut metadata = Metadata::new(subset.as_str(), cfg);
    metadata.subsets.push(summary);
    Ok(EvalSet { kind, instances, metadata })
}
