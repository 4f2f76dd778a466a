//! Label-preserving paraphrases: contraposition of every rule, and merging
//! a rule pair that shares a body (into a conjunctive head) or a head (into
//! a disjunctive body).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::{classical_label, equivalent_rule_sets, ClassicalError, ATOM_BUDGET};
use crate::contrast::{fresh_literal, ContrastError};
use crate::inference::{closure, proven_literal, Derivation, InferenceError};
use crate::logic::{validate_rule, Connective, Label, Literal, OperatorProfile, PredicateGroup, Rule, Theory};
use crate::nlg::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("rule {0} is not simple; contraposition needs atomic body and head")]
    NonSimpleRule(usize),
    #[error("no rule pair shares a {0}")]
    NoMergeablePair(&'static str),
    #[error("merged rule is not well formed: {0}")]
    InvalidMergedRule(String),
    #[error("no rule to plant a mergeable pair on: {0}")]
    NoTarget(String),
    #[error("theory has no rules, so the paraphrase would equal the base")]
    NoRules,
    #[error("{kind} pair for {statement}: carried label {carried}, {detail}")]
    CoherenceViolation { kind: EquivalenceKind, statement: Literal, carried: Label, detail: String },
    #[error("rewrite changed the truth table of the rewritten rules")]
    RewriteNotEquivalent,
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Contrast(#[from] ContrastError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquivalenceKind {
    Contra,
    D1,
    D2,
}

impl EquivalenceKind {
    pub const ALL: [EquivalenceKind; 3] = [EquivalenceKind::Contra, EquivalenceKind::D1, EquivalenceKind::D2];

    pub fn as_str(self) -> &'static str {
        match self {
            EquivalenceKind::Contra => "contra",
            EquivalenceKind::D1 => "d1",
            EquivalenceKind::D2 => "d2",
        }
    }
}

impl std::fmt::Display for EquivalenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EquivalenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "contra" | "contrapositive" | "ces" => Ok(EquivalenceKind::Contra),
            "d1" | "d1es" => Ok(EquivalenceKind::D1),
            "d2" | "d2es" => Ok(EquivalenceKind::D2),
            other => Err(format!("unknown equivalence kind {other:?}")),
        }
    }
}

/// Rules before and after one rewrite, for truth-table certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub before: Vec<Rule>,
    pub after: Vec<Rule>,
}

impl Rewrite {
    pub fn is_equivalent(&self) -> Result<bool, ClassicalError> {
        equivalent_rule_sets(&self.before, &self.after)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalencePair {
    pub kind: EquivalenceKind,
    pub base: Theory,
    pub paraphrase: Theory,
    pub statement: Literal,
    /// Chaining label of the base, carried to the paraphrase.
    pub label: Label,
    pub rewrites: Vec<Rewrite>,
}

/// Replace every rule `p -> q` by `~q -> ~p`.
pub fn contrapositive_theory(t: &Theory) -> Result<Theory, EquivalenceError> {
    let rules = t
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if !r.is_simple() {
                return Err(EquivalenceError::NonSimpleRule(i));
            }
            Ok(Rule::simple(r.rhs.literals()[0].complement(), r.lhs.literals()[0].complement()))
        })
        .collect::<Result<_, _>>()?;
    Ok(Theory { facts: t.facts.clone(), rules })
}

fn merged_group(conn: Connective, a: &PredicateGroup, b: &PredicateGroup) -> Result<PredicateGroup, String> {
    let lits = a.literals().iter().chain(b.literals()).cloned().collect();
    PredicateGroup::new(conn, lits).map_err(|e| e.to_string())
}

fn merge_pair(kind: EquivalenceKind, a: &Rule, b: &Rule) -> Option<Result<Rule, String>> {
    let merged = match kind {
        EquivalenceKind::D1 if a.lhs == b.lhs => merged_group(Connective::And, &a.rhs, &b.rhs)
            .map(|rhs| Rule { lhs: a.lhs.clone(), rhs }),
        EquivalenceKind::D2 if a.rhs == b.rhs => {
            let disjunctive = |g: &PredicateGroup| matches!(g.connective(), Connective::Atomic | Connective::Or);
            if !disjunctive(&a.lhs) || !disjunctive(&b.lhs) {
                Err("a conjunctive body cannot join a disjunction without nesting".to_string())
            } else {
                merged_group(Connective::Or, &a.lhs, &b.lhs).map(|lhs| Rule { lhs, rhs: a.rhs.clone() })
            }
        }
        _ => return None,
    };
    Some(merged.and_then(|r| {
        if validate_rule(&r, OperatorProfile::All) {
            Ok(r)
        } else {
            Err(format!("{r} is rejected by the ALL profile"))
        }
    }))
}

/// Merge the first rule pair sharing a body (D1) or a head (D2). The merged
/// rule takes the position of the first member; the second is removed.
pub fn distributive_merge(t: &Theory, kind: EquivalenceKind) -> Result<(Theory, (usize, usize)), EquivalenceError> {
    let shared = match kind {
        EquivalenceKind::D1 => "body",
        EquivalenceKind::D2 => "head",
        EquivalenceKind::Contra => return Err(EquivalenceError::NoMergeablePair("body or head")),
    };
    let mut last_invalid = None;
    for i in 0..t.rules.len() {
        for j in i + 1..t.rules.len() {
            match merge_pair(kind, &t.rules[i], &t.rules[j]) {
                Some(Ok(merged)) => {
                    let mut rules = t.rules.clone();
                    rules[i] = merged;
                    rules.remove(j);
                    return Ok((Theory { facts: t.facts.clone(), rules }, (i, j)));
                }
                Some(Err(msg)) => last_invalid = Some(msg),
                None => {}
            }
        }
    }
    Err(match last_invalid {
        Some(msg) => EquivalenceError::InvalidMergedRule(msg),
        None => EquivalenceError::NoMergeablePair(shared),
    })
}

/// Add a rule that forms a mergeable pair with the rule concluding `s` (or
/// its complement), right after that rule. D1 adds `body -> r`, D2 adds
/// `r -> head` for a fresh positive literal `r`. Labels of existing literals
/// are unchanged.
pub fn plant_pair(kind: EquivalenceKind, t: &Theory, s: &Literal, r: Literal) -> Result<Theory, EquivalenceError> {
    let c = closure(t);
    let label = c.label(s)?;
    let proven = proven_literal(label, s).ok_or_else(|| EquivalenceError::NoTarget(format!("{s} is Unknown")))?;
    let target = match c.derivation(&proven) {
        Some(Derivation::Rule { rule, .. }) => *rule,
        _ => return Err(EquivalenceError::NoTarget(format!("{proven} is a fact"))),
    };
    let rule = &t.rules[target];
    let planted = match kind {
        EquivalenceKind::D1 => Rule { lhs: rule.lhs.clone(), rhs: PredicateGroup::atom(r) },
        EquivalenceKind::D2 => {
            if rule.lhs.connective() == Connective::And {
                return Err(EquivalenceError::NoTarget(format!("rule {target} has a conjunctive body")));
            }
            Rule { lhs: PredicateGroup::atom(r), rhs: rule.rhs.clone() }
        }
        EquivalenceKind::Contra => return Err(EquivalenceError::NoTarget("contraposition plants nothing".into())),
    };
    let mut rules = t.rules.clone();
    rules.insert(target + 1, planted);
    Ok(Theory { facts: t.facts.clone(), rules })
}

fn incoherent(kind: EquivalenceKind, s: &Literal, carried: Label, detail: String) -> EquivalenceError {
    EquivalenceError::CoherenceViolation { kind, statement: s.clone(), carried, detail }
}

fn atom_count(t: &Theory, s: &Literal) -> usize {
    let mut atoms = t.atoms();
    atoms.insert(&s.atom);
    atoms.len()
}

/// Check that `classical_label` agrees with the carried label on a theory.
fn classical_gate(kind: EquivalenceKind, t: &Theory, s: &Literal, carried: Label, which: &str) -> Result<(), EquivalenceError> {
    let oracle = classical_label(t, s)?;
    if oracle != carried {
        return Err(incoherent(kind, s, carried, format!("classical label of the {which} is {oracle}")));
    }
    Ok(())
}

/// Build a base/paraphrase pair from a theory that already satisfies the
/// kind's precondition (simple rules for contraposition, a mergeable pair
/// for D1/D2).
pub fn pair_from_base(kind: EquivalenceKind, base: &Theory, s: &Literal) -> Result<EquivalencePair, EquivalenceError> {
    let base_closure = closure(base);
    let label = base_closure.label(s)?;
    let (paraphrase, rewrites) = match kind {
        EquivalenceKind::Contra => {
            if base.rules.is_empty() {
                return Err(EquivalenceError::NoRules);
            }
            let p = contrapositive_theory(base)?;
            let rewrites = base
                .rules
                .iter()
                .zip(&p.rules)
                .map(|(b, a)| Rewrite { before: vec![b.clone()], after: vec![a.clone()] })
                .collect();
            (p, rewrites)
        }
        EquivalenceKind::D1 | EquivalenceKind::D2 => {
            let (p, (i, j)) = distributive_merge(base, kind)?;
            let rewrite = Rewrite { before: vec![base.rules[i].clone(), base.rules[j].clone()], after: vec![p.rules[i].clone()] };
            (p, vec![rewrite])
        }
    };
    for rw in &rewrites {
        if !rw.is_equivalent()? {
            return Err(EquivalenceError::RewriteNotEquivalent);
        }
    }

    match kind {
        EquivalenceKind::Contra => {
            classical_gate(kind, base, s, label, "base")?;
            classical_gate(kind, &paraphrase, s, label, "paraphrase")?;
        }
        EquivalenceKind::D1 | EquivalenceKind::D2 => {
            if closure(&paraphrase).derived_set() != base_closure.derived_set() {
                return Err(incoherent(kind, s, label, "closures differ".into()));
            }
            // The oracle is only affordable on small theories; merges preserve
            // the chaining closure regardless.
            if atom_count(base, s) <= ATOM_BUDGET {
                classical_gate(kind, base, s, label, "base")?;
                classical_gate(kind, &paraphrase, s, label, "paraphrase")?;
            }
        }
    }
    Ok(EquivalencePair { kind, base: base.clone(), paraphrase, statement: s.clone(), label, rewrites })
}

/// Pair for statement `s` over a sampled theory. For D1/D2 a mergeable pair
/// is planted on the statement's derivation first, using a fresh literal.
pub fn make_equivalence_pair<R: Rng + ?Sized>(
    kind: EquivalenceKind,
    t: &Theory,
    s: &Literal,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<EquivalencePair, EquivalenceError> {
    let base = match kind {
        EquivalenceKind::Contra => t.clone(),
        EquivalenceKind::D1 | EquivalenceKind::D2 => {
            let r = fresh_literal(t, s, vocab, rng)?;
            plant_pair(kind, t, s, r)?
        }
    };
    pair_from_base(kind, &base, s)
}
