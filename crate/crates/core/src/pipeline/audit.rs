//! Count features that could leak the label, and how far each feature
//! value's label distribution sits from the overall one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Instance, PipelineError};
use crate::logic::{Connective, Label};

pub const FEATURES: [&str; 7] =
    ["n_rules", "n_facts", "n_facts_neg", "n_rules_neg", "n_rules_conj", "n_rules_disj", "statement_neg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub n_rules: usize,
    pub n_facts: usize,
    pub n_facts_neg: usize,
    pub n_rules_neg: usize,
    pub n_rules_conj: usize,
    pub n_rules_disj: usize,
    pub statement_neg: usize,
}

impl FeatureVector {
    /// Computed from the logical form, not from the stored meta block.
    pub fn of(inst: &Instance) -> FeatureVector {
        let lf = &inst.lf;
        FeatureVector {
            n_rules: lf.rules.len(),
            n_facts: lf.facts.len(),
            n_facts_neg: lf.facts.iter().filter(|f| f.negated).count(),
            n_rules_neg: lf.rules.iter().filter(|r| r.has_negation()).count(),
            n_rules_conj: lf.rules.iter().filter(|r| r.has_connective(Connective::And)).count(),
            n_rules_disj: lf.rules.iter().filter(|r| r.has_connective(Connective::Or)).count(),
            statement_neg: usize::from(lf.statement.negated),
        }
    }

    pub fn values(&self) -> [usize; 7] {
        [
            self.n_rules,
            self.n_facts,
            self.n_facts_neg,
            self.n_rules_neg,
            self.n_rules_conj,
            self.n_rules_disj,
            self.statement_neg,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub tv_threshold: f64,
    pub min_support: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { tv_threshold: 0.05, min_support: 100 }
    }
}

/// Label shares in True, False, Unknown order.
pub type Distribution = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueAudit {
    pub value: usize,
    pub support: usize,
    pub distribution: Distribution,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAudit {
    pub feature: String,
    pub values: Vec<ValueAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub feature: String,
    pub value: usize,
    pub support: usize,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub total: usize,
    pub marginal: Distribution,
    pub features: Vec<FeatureAudit>,
    /// Largest TV distance among values with at least `min_support` instances.
    pub max_tv: f64,
    pub flagged: Vec<Flag>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

fn label_slot(l: Label) -> usize {
    match l {
        Label::True => 0,
        Label::False => 1,
        Label::Unknown => 2,
    }
}

fn distribution(counts: &[usize; 3]) -> Distribution {
    let n: usize = counts.iter().sum();
    counts.map(|c| c as f64 / n as f64)
}

pub fn tv_distance(p: &Distribution, q: &Distribution) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn audit(instances: &[Instance], cfg: AuditConfig) -> Result<AuditReport, PipelineError> {
    if instances.is_empty() {
        return Err(PipelineError::EmptyAudit);
    }
    let mut marginal_counts = [0usize; 3];
    // feature -> value -> label counts; BTreeMap keeps the reduction order
    // independent of instance order.
    let mut counts: Vec<BTreeMap<usize, [usize; 3]>> = vec![BTreeMap::new(); FEATURES.len()];
    for inst in instances {
        let slot = label_slot(inst.label);
        marginal_counts[slot] += 1;
        for (f, v) in FeatureVector::of(inst).values().into_iter().enumerate() {
            counts[f].entry(v).or_default()[slot] += 1;
        }
    }
    let marginal = distribution(&marginal_counts);

    let mut features = Vec::with_capacity(FEATURES.len());
    let mut flagged = Vec::new();
    let mut max_tv = 0.0f64;
    for (name, per_value) in FEATURES.iter().zip(counts) {
        let values: Vec<ValueAudit> = per_value
            .into_iter()
            .map(|(value, c)| {
                let dist = distribution(&c);
                let support = c.iter().sum();
                ValueAudit { value, support, distribution: dist, tv: tv_distance(&dist, &marginal) }
            })
            .collect();
        for v in values.iter().filter(|v| v.support >= cfg.min_support) {
            max_tv = max_tv.max(v.tv);
            if v.tv > cfg.tv_threshold {
                flagged.push(Flag { feature: name.to_string(), value: v.value, support: v.support, tv: v.tv });
            }
        }
        features.push(FeatureAudit { feature: name.to_string(), values });
    }
    Ok(AuditReport { config: cfg, total: instances.len(), marginal, features, max_tv, flagged })
}
