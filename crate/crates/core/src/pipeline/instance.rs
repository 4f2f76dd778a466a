use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::contrast::Group;
use crate::inference::{closure, proven_literal, ProofSet};
use crate::logic::{Connective, Label, Literal, Rule, Theory};
use crate::nlg::Renderer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Train,
    Dev,
    Test,
    Ccs,
    Dcs,
    Ncs,
    Ces,
    D1es,
    D2es,
}

impl Subset {
    pub const ALL: [Subset; 9] = [
        Subset::Train,
        Subset::Dev,
        Subset::Test,
        Subset::Ccs,
        Subset::Dcs,
        Subset::Ncs,
        Subset::Ces,
        Subset::D1es,
        Subset::D2es,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subset::Train => "train",
            Subset::Dev => "dev",
            Subset::Test => "test",
            Subset::Ccs => "ccs",
            Subset::Dcs => "dcs",
            Subset::Ncs => "ncs",
            Subset::Ces => "ces",
            Subset::D1es => "d1es",
            Subset::D2es => "d2es",
        }
    }
}

impl std::fmt::Display for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the gold label comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    /// Forward chaining over this instance's own theory.
    Chaining,
    /// Copied from the base theory of an equivalence pair.
    Carried,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogicalForm {
    pub facts: Vec<Literal>,
    pub rules: Vec<Rule>,
    pub statement: Literal,
}

impl LogicalForm {
    pub fn theory(&self) -> Theory {
        Theory { facts: self.facts.clone(), rules: self.rules.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofRecord {
    pub facts: Vec<usize>,
    pub rules: Vec<usize>,
}

impl From<&ProofSet> for ProofRecord {
    fn from(p: &ProofSet) -> Self {
        ProofRecord { facts: p.facts.iter().copied().collect(), rules: p.rules.iter().copied().collect() }
    }
}

impl ProofRecord {
    pub fn to_proof_set(&self) -> ProofSet {
        ProofSet { facts: self.facts.iter().copied().collect(), rules: self.rules.iter().copied().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceMeta {
    /// Rounds needed to derive the statement or its complement; null for Unknown.
    pub depth: Option<usize>,
    pub n_facts: usize,
    pub n_rules: usize,
    pub n_facts_neg: usize,
    pub n_rules_neg: usize,
    pub n_rules_conj: usize,
    pub n_rules_disj: usize,
    pub statement_neg: bool,
    pub has_distractors: bool,
    pub label_source: LabelSource,
}

/// One JSONL record. Field order here is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub id: String,
    pub family_id: String,
    pub subset: Subset,
    pub group: Group,
    pub context_nl: String,
    pub statement_nl: String,
    pub label: Label,
    pub lf: LogicalForm,
    /// Canonical proof under forward chaining; null when the statement is
    /// not chaining-provable in this theory.
    pub proof: Option<ProofRecord>,
    pub meta: InstanceMeta,
}

/// Everything needed to turn a labelled theory into a record.
pub struct InstanceParts<'a> {
    pub family_id: &'a str,
    pub row: usize,
    pub subset: Subset,
    pub group: Group,
    pub theory: &'a Theory,
    pub statement: &'a Literal,
    pub label: Label,
    pub label_source: LabelSource,
    pub render_seed: u64,
}

pub fn family_id(subset: Subset, ordinal: usize) -> String {
    format!("{subset}-{ordinal:06}")
}

impl Instance {
    pub fn build(parts: InstanceParts<'_>, renderer: &Renderer) -> Result<Instance, PipelineError> {
        let t = parts.theory;
        let c = closure(t);
        let chained = c.label(parts.statement)?;
        if parts.label_source == LabelSource::Chaining && chained != parts.label {
            return Err(PipelineError::Invalid {
                id: format!("{}-{}", parts.family_id, parts.row),
                message: format!("label {} but chaining gives {chained}", parts.label),
            });
        }
        let proven = proven_literal(chained, parts.statement);
        let proof = proven.as_ref().and_then(|p| c.proof_of(p));
        let depth = proven.as_ref().and_then(|p| c.depth(p));
        let has_distractors = match &proof {
            Some(p) => p.facts.len() < t.facts.len() || p.rules.len() < t.rules.len(),
            None => !t.is_empty(),
        };
        let (context_nl, statement_nl) = renderer.render_instance(t, parts.statement, parts.render_seed)?;
        let meta = InstanceMeta {
            depth,
            n_facts: t.facts.len(),
            n_rules: t.rules.len(),
            n_facts_neg: t.facts.iter().filter(|f| f.negated).count(),
            n_rules_neg: t.rules.iter().filter(|r| r.has_negation()).count(),
            n_rules_conj: t.rules.iter().filter(|r| r.has_connective(Connective::And)).count(),
            n_rules_disj: t.rules.iter().filter(|r| r.has_connective(Connective::Or)).count(),
            statement_neg: parts.statement.negated,
            has_distractors,
            label_source: parts.label_source,
        };
        Ok(Instance {
            id: format!("{}-{}", parts.family_id, parts.row),
            family_id: parts.family_id.to_string(),
            subset: parts.subset,
            group: parts.group,
            context_nl,
            statement_nl,
            label: parts.label,
            lf: LogicalForm { facts: t.facts.clone(), rules: t.rules.clone(), statement: parts.statement.clone() },
            proof: proof.as_ref().map(ProofRecord::from),
            meta,
        })
    }

    pub fn theory(&self) -> Theory {
        self.lf.theory()
    }

    /// Structural checks that do not run inference: proof indices in range.
    pub fn check_indices(&self) -> Result<(), String> {
        if let Some(p) = &self.proof {
            if let Some(i) = p.facts.iter().find(|&&i| i >= self.lf.facts.len()) {
                return Err(format!("proof fact index {i} out of range ({} facts)", self.lf.facts.len()));
            }
            if let Some(i) = p.rules.iter().find(|&&i| i >= self.lf.rules.len()) {
                return Err(format!("proof rule index {i} out of range ({} rules)", self.lf.rules.len()));
            }
        }
        Ok(())
    }

    /// Full check: chaining labels match, and the proof replays to the label.
    pub fn verify(&self) -> Result<(), String> {
        self.check_indices()?;
        let t = self.theory();
        let chained = closure(&t).label(&self.lf.statement).map_err(|e| e.to_string())?;
        if self.meta.label_source == LabelSource::Chaining && chained != self.label {
            return Err(format!("label {} but chaining gives {chained}", self.label));
        }
        if let Some(p) = &self.proof {
            let replay = p.to_proof_set().restrict(&t);
            let replayed = closure(&replay).label(&self.lf.statement).map_err(|e| e.to_string())?;
            if replayed != chained {
                return Err(format!("proof replays to {replayed}, expected {chained}"));
            }
        }
        Ok(())
    }
}
