//! Layered label-priority sampling of theories.
//!
//! Provability values are drawn first, per predicate and layer; rules are
//! then built only between predicates of equal value in adjacent layers, so
//! the intended labels hold by construction. The forward-chaining engine
//! re-checks every sampled theory before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{closure, entail_label, InferenceError};
use crate::logic::{validate_rule, Label, Literal, OperatorProfile, PredicateGroup, Rule, Theory};
use crate::nlg::Vocabulary;
use crate::seed::{child_seed, rng_from};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("theory {index}: no valid sample after {attempts} attempts")]
    ResampleBudgetExhausted { index: u64, attempts: usize },
    #[error("statement {statement}: assigned {assigned}, engine says {engine}")]
    LabelMismatch { statement: Literal, assigned: Label, engine: Label },
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub profile: OperatorProfile,
    /// Upper bound on the number of layers.
    pub max_depth: usize,
    /// Inclusive range for the number of predicates per theory.
    pub pred_count_min: usize,
    pub pred_count_max: usize,
    /// Probability of negating a sampled predicate.
    pub fact_negation_prob: f64,
    /// Probability of turning a provable statement into a False one.
    pub statement_negation_prob: f64,
    /// Share of binary (family relation) predicates among sampled atoms.
    pub binary_fraction: f64,
    pub seed: u64,
    pub retry_limit: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            profile: OperatorProfile::All,
            max_depth: 3,
            pred_count_min: 10,
            pred_count_max: 30,
            fact_negation_prob: 0.3,
            statement_negation_prob: 0.5,
            binary_fraction: 0.3,
            seed: 0,
            retry_limit: 50,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidConfig(m));
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1".into());
        }
        if self.pred_count_min < 1 || self.pred_count_min > self.pred_count_max {
            return bad(format!("empty predicate count range [{}, {}]", self.pred_count_min, self.pred_count_max));
        }
        for (name, p) in [
            ("fact_negation_prob", self.fact_negation_prob),
            ("statement_negation_prob", self.statement_negation_prob),
            ("binary_fraction", self.binary_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not in [0, 1]"));
            }
        }
        if self.retry_limit == 0 {
            return bad("retry_limit must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provability {
    NotProvable,
    Provable,
}

impl Provability {
    fn from_bit(bit: bool) -> Self {
        if bit {
            Provability::Provable
        } else {
            Provability::NotProvable
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledTheory {
    pub theory: Theory,
    /// Every sampled predicate in sampling order (layer by layer).
    pub predicates: Vec<Literal>,
    pub atom_labels: BTreeMap<Literal, Provability>,
    /// 1-based layer of each predicate.
    pub layer_of: BTreeMap<Literal, usize>,
    pub layers: usize,
    /// Each predicate with its constructive label (True or Unknown).
    pub candidate_statements: Vec<(Literal, Label)>,
    /// Seed the accepted attempt was drawn from.
    pub seed: u64,
}

impl SampledTheory {
    pub fn provable(&self) -> impl Iterator<Item = &Literal> {
        self.predicates.iter().filter(|p| self.atom_labels[*p] == Provability::Provable)
    }

    pub fn unprovable(&self) -> impl Iterator<Item = &Literal> {
        self.predicates.iter().filter(|p| self.atom_labels[*p] == Provability::NotProvable)
    }
}

pub struct Sampler<'v> {
    cfg: SamplerConfig,
    vocab: &'v Vocabulary,
}

impl<'v> Sampler<'v> {
    pub fn new(cfg: SamplerConfig, vocab: &'v Vocabulary) -> Result<Self, SamplerError> {
        cfg.validate()?;
        if vocab.atom_count() < cfg.pred_count_max {
            return Err(SamplerError::InvalidConfig(format!(
                "vocabulary has {} atoms, fewer than pred_count_max {}",
                vocab.atom_count(),
                cfg.pred_count_max
            )));
        }
        Ok(Sampler { cfg, vocab })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn vocabulary(&self) -> &'v Vocabulary {
        self.vocab
    }

    /// Theory number `index` of the configured master seed.
    pub fn sample_theory(&self, index: u64) -> Result<SampledTheory, SamplerError> {
        self.sample_from_stream(child_seed(self.cfg.seed, index), index)
    }

    /// Sample from an explicit stream seed; attempt `j` uses `child_seed(stream, j)`.
    pub fn sample_from_stream(&self, stream: u64, index: u64) -> Result<SampledTheory, SamplerError> {
        for attempt in 0..self.cfg.retry_limit {
            let seed = child_seed(stream, attempt as u64);
            if let Some(st) = self.attempt(seed) {
                return Ok(st);
            }
        }
        Err(SamplerError::ResampleBudgetExhausted { index, attempts: self.cfg.retry_limit })
    }

    fn attempt(&self, seed: u64) -> Option<SampledTheory> {
        let cfg = &self.cfg;
        let mut rng = rng_from(seed);

        let pred_num = rng.gen_range(cfg.pred_count_min..=cfg.pred_count_max);
        let mut atoms = BTreeSet::new();
        let mut preds = Vec::with_capacity(pred_num);
        while preds.len() < pred_num {
            let atom = self.vocab.sample_atom(&mut rng, cfg.binary_fraction);
            if atoms.insert(atom.clone()) {
                preds.push(atom);
            }
        }

        let layers = rng.gen_range(1..=cfg.max_depth).min(pred_num);
        let (base, extra) = (pred_num / layers, pred_num % layers);
        let mut layer_members: Vec<Vec<usize>> = Vec::with_capacity(layers);
        let mut next = 0;
        for layer in 0..layers {
            let size = base + usize::from(layer < extra);
            layer_members.push((next..next + size).collect());
            next += size;
        }

        let mut literals: Vec<Literal> = Vec::with_capacity(pred_num);
        let mut value: Vec<bool> = Vec::with_capacity(pred_num);
        let mut rules = Vec::new();
        for (layer, members) in layer_members.iter().enumerate() {
            for &i in members {
                let lit = preds[i].clone().positive().negate_if(rng.gen_bool(cfg.fact_negation_prob));
                let mut q = rng.gen_bool(0.5);
                if layer > 0 {
                    let k = if cfg.profile == OperatorProfile::Not { 1 } else { rng.gen_range(1..=2) };
                    let cand: Vec<usize> =
                        layer_members[layer - 1].iter().copied().filter(|&j| value[j] == q).collect();
                    let body: Vec<Literal> =
                        cand.choose_multiple(&mut rng, k).map(|&j| literals[j].clone()).collect();
                    let lhs = match body.len() {
                        0 => None,
                        1 => Some(PredicateGroup::atom(body[0].clone())),
                        _ => {
                            let conn = *cfg.profile.body_connectives().choose(&mut rng)?;
                            PredicateGroup::new(conn, body).ok()
                        }
                    };
                    match lhs.map(|lhs| Rule { lhs, rhs: PredicateGroup::atom(lit.clone()) }) {
                        Some(rule) if validate_rule(&rule, cfg.profile) => rules.push(rule),
                        // No parent to derive it from, or not a legal rule shape.
                        _ => q = false,
                    }
                }
                literals.push(lit);
                value.push(q);
            }
        }

        let facts: Vec<Literal> = layer_members[0].iter().filter(|&&i| value[i]).map(|&i| literals[i].clone()).collect();
        let theory = Theory::new(facts, rules).ok()?;

        let c = closure(&theory);
        let intended: BTreeSet<Literal> = literals.iter().zip(&value).filter(|(_, v)| **v).map(|(l, _)| l.clone()).collect();
        if !c.is_consistent() || c.derived_set() != intended {
            return None;
        }

        let mut layer_of = BTreeMap::new();
        for (layer, members) in layer_members.iter().enumerate() {
            for &i in members {
                layer_of.insert(literals[i].clone(), layer + 1);
            }
        }
        let atom_labels = literals.iter().zip(&value).map(|(l, v)| (l.clone(), Provability::from_bit(*v))).collect();
        let candidate_statements = literals
            .iter()
            .zip(&value)
            .map(|(l, v)| (l.clone(), if *v { Label::True } else { Label::Unknown }))
            .collect();
        Some(SampledTheory {
            theory,
            predicates: literals,
            atom_labels,
            layer_of,
            layers,
            candidate_statements,
            seed,
        })
    }
}

/// Statements over the whole predicate pool in random order. A provable
/// predicate becomes its complement with probability `statement_negation_prob`
/// (label False); otherwise provable is True and unprovable Unknown.
/// Each label is checked against the engine.
pub fn draw_statements<R: Rng + ?Sized>(
    st: &SampledTheory,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<(Literal, Label)>, SamplerError> {
    let mut pool: Vec<&(Literal, Label)> = st.candidate_statements.iter().collect();
    pool.shuffle(rng);
    let c = closure(&st.theory);
    pool.into_iter()
        .map(|(lit, label)| {
            let (statement, assigned) = match label {
                Label::True if rng.gen_bool(cfg.statement_negation_prob) => (lit.complement(), Label::False),
                _ => (lit.clone(), *label),
            };
            let engine = c.label(&statement)?;
            if engine != assigned {
                return Err(SamplerError::LabelMismatch { statement, assigned, engine });
            }
            Ok((statement, assigned))
        })
        .collect()
}

/// Cross-check of one constructive label against the engine.
pub fn verify_statement(st: &SampledTheory, statement: &Literal, label: Label) -> Result<(), SamplerError> {
    let engine = entail_label(&st.theory, statement)?;
    if engine == label {
        Ok(())
    } else {
        Err(SamplerError::LabelMismatch { statement: statement.clone(), assigned: label, engine })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Connective;

    fn sampler_cfg(profile: OperatorProfile, seed: u64) -> SamplerConfig {
        SamplerConfig { profile, seed, ..SamplerConfig::default() }
    }

    #[test]
    fn labels_agree_with_engine() {
        let vocab = Vocabulary::default();
        for profile in OperatorProfile::ALL {
            let s = Sampler::new(sampler_cfg(profile, 11), &vocab).unwrap();
            for i in 0..50 {
                let st = s.sample_theory(i).unwrap();
                for (lit, label) in &st.candidate_statements {
                    verify_statement(&st, lit, *label).unwrap();
                }
                for rule in &st.theory.rules {
                    assert!(validate_rule(rule, profile), "{rule} under {profile}");
                }
            }
        }
    }

    #[test]
    fn depth_one_means_facts_only() {
        let vocab = Vocabulary::default();
        let cfg = SamplerConfig { max_depth: 1, ..sampler_cfg(OperatorProfile::All, 3) };
        let s = Sampler::new(cfg, &vocab).unwrap();
        for i in 0..20 {
            let st = s.sample_theory(i).unwrap();
            assert!(st.theory.rules.is_empty());
            assert_eq!(st.layers, 1);
        }
    }

    #[test]
    fn zero_negation_probability() {
        let vocab = Vocabulary::default();
        let cfg = SamplerConfig { fact_negation_prob: 0.0, ..sampler_cfg(OperatorProfile::All, 5) };
        let s = Sampler::new(cfg, &vocab).unwrap();
        for i in 0..30 {
            let st = s.sample_theory(i).unwrap();
            assert!(st.theory.facts.iter().all(|f| !f.negated));
            assert!(st.theory.rules.iter().all(|r| !r.has_negation()));
        }
    }

    #[test]
    fn not_profile_has_simple_rules() {
        let vocab = Vocabulary::default();
        let s = Sampler::new(sampler_cfg(OperatorProfile::Not, 8), &vocab).unwrap();
        for i in 0..30 {
            assert!(s.sample_theory(i).unwrap().theory.rules.iter().all(Rule::is_simple));
        }
        let s = Sampler::new(sampler_cfg(OperatorProfile::AndNot, 8), &vocab).unwrap();
        let any_or = (0..30).any(|i| {
            s.sample_theory(i).unwrap().theory.rules.iter().any(|r| r.lhs.connective() == Connective::Or)
        });
        assert!(!any_or);
    }

    #[test]
    fn deterministic_per_index() {
        let vocab = Vocabulary::default();
        let s = Sampler::new(sampler_cfg(OperatorProfile::All, 21), &vocab).unwrap();
        assert_eq!(s.sample_theory(4).unwrap(), s.sample_theory(4).unwrap());
        assert_ne!(s.sample_theory(4).unwrap().theory, s.sample_theory(5).unwrap().theory);
    }

    #[test]
    fn facts_are_provable_first_layer_predicates() {
        let vocab = Vocabulary::default();
        let s = Sampler::new(sampler_cfg(OperatorProfile::All, 2), &vocab).unwrap();
        for i in 0..30 {
            let st = s.sample_theory(i).unwrap();
            let expected: Vec<&Literal> = st
                .predicates
                .iter()
                .filter(|p| st.layer_of[*p] == 1 && st.atom_labels[*p] == Provability::Provable)
                .collect();
            assert_eq!(st.theory.facts.iter().collect::<Vec<_>>(), expected);
            assert!(closure(&st.theory).rounds() < st.layers.max(1));
        }
    }

    #[test]
    fn drawn_statement_labels() {
        let vocab = Vocabulary::default();
        let cfg = sampler_cfg(OperatorProfile::All, 17);
        let s = Sampler::new(cfg.clone(), &vocab).unwrap();
        let st = s.sample_theory(0).unwrap();
        let mut rng = rng_from(1);
        let drawn = draw_statements(&st, &cfg, &mut rng).unwrap();
        assert_eq!(drawn.len(), st.predicates.len());
        for (stmt, label) in drawn {
            match label {
                Label::True => assert_eq!(st.atom_labels[&stmt], Provability::Provable),
                Label::False => assert_eq!(st.atom_labels[&stmt.complement()], Provability::Provable),
                Label::Unknown => assert_eq!(st.atom_labels[&stmt], Provability::NotProvable),
            }
        }

        let always = SamplerConfig { statement_negation_prob: 1.0, ..cfg.clone() };
        let drawn = draw_statements(&st, &always, &mut rng).unwrap();
        assert!(drawn.iter().all(|(_, l)| *l != Label::True));
        let never = SamplerConfig { statement_negation_prob: 0.0, ..cfg };
        let drawn = draw_statements(&st, &never, &mut rng).unwrap();
        assert!(drawn.iter().all(|(_, l)| *l != Label::False));
    }

    #[test]
    fn config_validation() {
        let vocab = Vocabulary::default();
        let bad = [
            SamplerConfig { max_depth: 0, ..SamplerConfig::default() },
            SamplerConfig { pred_count_min: 20, pred_count_max: 10, ..SamplerConfig::default() },
            SamplerConfig { fact_negation_prob: 1.5, ..SamplerConfig::default() },
            SamplerConfig { statement_negation_prob: -0.1, ..SamplerConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(Sampler::new(cfg, &vocab), Err(SamplerError::InvalidConfig(_))));
        }
    }
}
