//! Logical contrast families: minimal edits to one rule of a base theory,
//! adding an unseen literal `t` under conjunction or disjunction and/or
//! toggling negations, with every variant relabelled by the engine.
//!
//! Row tables below are written for a base labelled True. For a False base
//! the same edits apply to the rule concluding the complement of the
//! statement, and the expected labels swap True and False.

use std::collections::BTreeSet;

use rand::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{closure, proven_literal, Derivation, InferenceError};
use crate::logic::{Atom, Connective, Label, Literal, LogicError, PredicateGroup, Rule, Theory};
use crate::nlg::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContrastError {
    #[error("statement {0} is not provable; contrast families need a True or False base")]
    NotProvable(Literal),
    #[error("no eligible target rule: {0}")]
    NoEligibleRule(String),
    #[error("vocabulary has no unused atom left")]
    VocabularyExhausted,
    #[error("row {row}: expected {expected}, engine gives {actual}")]
    TableMismatch { row: usize, expected: Label, actual: String },
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Perturbation group relative to the base theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "base")]
    Base,
    #[serde(rename = "conj")]
    Conj,
    #[serde(rename = "conj+neg")]
    ConjNeg,
    #[serde(rename = "disj")]
    Disj,
    #[serde(rename = "disj+neg")]
    DisjNeg,
    #[serde(rename = "neg")]
    Neg,
    #[serde(rename = "paraphrase")]
    Paraphrase,
}

impl Group {
    pub const ALL: [Group; 7] =
        [Group::Base, Group::Conj, Group::ConjNeg, Group::Disj, Group::DisjNeg, Group::Neg, Group::Paraphrase];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Base => "base",
            Group::Conj => "conj",
            Group::ConjNeg => "conj+neg",
            Group::Disj => "disj",
            Group::DisjNeg => "disj+neg",
            Group::Neg => "neg",
            Group::Paraphrase => "paraphrase",
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastKind {
    Conj,
    Disj,
    Neg,
}

impl ContrastKind {
    pub fn family_size(self) -> usize {
        match self {
            ContrastKind::Conj | ContrastKind::Disj => 7,
            ContrastKind::Neg => 4,
        }
    }

    fn rows(self) -> &'static [Row] {
        match self {
            ContrastKind::Conj => CONJ_ROWS,
            ContrastKind::Disj => DISJ_ROWS,
            ContrastKind::Neg => NEG_ROWS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RuleEdit {
    /// Add `t` to the body under the family's connective.
    Extend,
    /// Extend and negate the head literal.
    ExtendNegHead,
    NegHead,
    NegBody,
    NegBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FactEdit {
    Keep,
    AddT,
    AddNegT,
    /// Replace the body fact `p` by `~p` in place and append `~t`.
    NegPNegT,
}

#[derive(Debug, Clone, Copy)]
struct Row {
    rule: RuleEdit,
    facts: FactEdit,
    group: Group,
    /// Label when the base is True.
    label: Label,
}

const fn row(rule: RuleEdit, facts: FactEdit, group: Group, label: Label) -> Row {
    Row { rule, facts, group, label }
}

use FactEdit::*;
use RuleEdit::*;

const CONJ_ROWS: &[Row] = &[
    row(Extend, Keep, Group::Conj, Label::Unknown),
    row(Extend, AddT, Group::Conj, Label::True),
    row(Extend, AddNegT, Group::ConjNeg, Label::Unknown),
    row(ExtendNegHead, Keep, Group::ConjNeg, Label::Unknown),
    row(ExtendNegHead, AddT, Group::ConjNeg, Label::False),
    row(ExtendNegHead, AddNegT, Group::ConjNeg, Label::Unknown),
];

const DISJ_ROWS: &[Row] = &[
    row(Extend, Keep, Group::Disj, Label::True),
    row(Extend, AddT, Group::Disj, Label::True),
    row(Extend, NegPNegT, Group::DisjNeg, Label::Unknown),
    row(ExtendNegHead, Keep, Group::DisjNeg, Label::False),
    row(ExtendNegHead, AddT, Group::DisjNeg, Label::False),
    row(ExtendNegHead, NegPNegT, Group::DisjNeg, Label::Unknown),
];

const NEG_ROWS: &[Row] = &[
    row(NegHead, Keep, Group::Neg, Label::False),
    row(NegBody, Keep, Group::Neg, Label::Unknown),
    row(NegBoth, Keep, Group::Neg, Label::Unknown),
];

/// One member of a family: a theory, the statement and its engine label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub theory: Theory,
    pub statement: Literal,
    pub label: Label,
    pub group: Group,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastFamily {
    pub kind: ContrastKind,
    pub base: Variant,
    /// Table rows in order, base excluded.
    pub variants: Vec<Variant>,
    pub target_rule_index: usize,
    pub fresh_literal: Literal,
    /// False when rows needing `~p` as a fact were skipped (compound body).
    pub complete: bool,
}

impl ContrastFamily {
    /// Base followed by the variants.
    pub fn members(&self) -> impl Iterator<Item = &Variant> {
        std::iter::once(&self.base).chain(&self.variants)
    }

    pub fn len(&self) -> usize {
        1 + self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Index of the rule that concludes `s` (or its complement) in the canonical
/// derivation. The statement must have no other derivation and every body
/// literal of the rule must be a fact of `t`.
pub fn pick_target(t: &Theory, s: &Literal) -> Result<usize, ContrastError> {
    let c = closure(t);
    let label = c.label(s)?;
    let proven = proven_literal(label, s).ok_or_else(|| ContrastError::NotProvable(s.clone()))?;
    let rule = match c.derivation(&proven) {
        Some(Derivation::Rule { rule, .. }) => *rule,
        _ => return Err(ContrastError::NoEligibleRule(format!("{proven} is a fact"))),
    };
    if c.has_alternate_derivation(&proven) {
        return Err(ContrastError::NoEligibleRule(format!("{proven} has more than one derivation")));
    }
    let facts: BTreeSet<&Literal> = t.facts.iter().collect();
    if let Some(lit) = t.rules[rule].lhs.literals().iter().find(|l| !facts.contains(l)) {
        return Err(ContrastError::NoEligibleRule(format!("body literal {lit} is not a fact")));
    }
    Ok(rule)
}

/// A positive literal over an atom that appears nowhere in `t`, its closure,
/// or `s`.
pub fn fresh_literal<R: Rng + ?Sized>(
    t: &Theory,
    s: &Literal,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Literal, ContrastError> {
    let c = closure(t);
    let mut used: BTreeSet<&Atom> = t.atoms();
    used.extend(c.derived().map(|l| &l.atom));
    used.insert(&s.atom);
    for _ in 0..256 {
        let atom = vocab.sample_atom(rng, 0.5);
        if !used.contains(&atom) {
            return Ok(atom.positive());
        }
    }
    vocab
        .atoms()
        .find(|a| !used.contains(a))
        .map(Atom::positive)
        .ok_or(ContrastError::VocabularyExhausted)
}

fn logic(e: LogicError) -> ContrastError {
    ContrastError::NoEligibleRule(e.to_string())
}

fn extend_body(body: &PredicateGroup, t: &Literal, conn: Connective) -> Result<PredicateGroup, ContrastError> {
    if body.connective() != Connective::Atomic && body.connective() != conn {
        return Err(ContrastError::NoEligibleRule(format!("cannot add {conn:?} to a {:?} body", body.connective())));
    }
    let mut lits = body.literals().to_vec();
    lits.push(t.clone());
    PredicateGroup::new(conn, lits).map_err(logic)
}

fn negate_head(head: &PredicateGroup, target: &Literal) -> Result<PredicateGroup, ContrastError> {
    let lits = head.literals().iter().map(|l| if l == target { l.complement() } else { l.clone() }).collect();
    PredicateGroup::new(head.connective(), lits).map_err(logic)
}

fn negate_body(body: &PredicateGroup) -> Result<PredicateGroup, ContrastError> {
    PredicateGroup::new(body.connective(), body.literals().iter().map(Literal::complement).collect()).map_err(logic)
}

struct Plan<'a> {
    theory: &'a Theory,
    statement: &'a Literal,
    base_label: Label,
    rule_index: usize,
    head: Literal,
    fresh: Literal,
    connective: Connective,
}

impl Plan<'_> {
    fn edited_rule(&self, edit: RuleEdit) -> Result<Rule, ContrastError> {
        let rule = &self.theory.rules[self.rule_index];
        let (lhs, rhs) = match edit {
            Extend => (extend_body(&rule.lhs, &self.fresh, self.connective)?, rule.rhs.clone()),
            ExtendNegHead => {
                (extend_body(&rule.lhs, &self.fresh, self.connective)?, negate_head(&rule.rhs, &self.head)?)
            }
            NegHead => (rule.lhs.clone(), negate_head(&rule.rhs, &self.head)?),
            NegBody => (negate_body(&rule.lhs)?, rule.rhs.clone()),
            NegBoth => (negate_body(&rule.lhs)?, negate_head(&rule.rhs, &self.head)?),
        };
        Ok(Rule { lhs, rhs })
    }

    /// None when the edit needs an atomic body fact and the body is compound.
    fn edited_facts(&self, edit: FactEdit) -> Option<Vec<Literal>> {
        let mut facts = self.theory.facts.clone();
        match edit {
            Keep => {}
            AddT => facts.push(self.fresh.clone()),
            AddNegT => facts.push(self.fresh.complement()),
            NegPNegT => {
                let body = &self.theory.rules[self.rule_index].lhs;
                if !body.is_atomic() {
                    return None;
                }
                let p = &body.literals()[0];
                let pos = facts.iter().position(|f| f == p)?;
                facts[pos] = p.complement();
                facts.push(self.fresh.complement());
            }
        }
        Some(facts)
    }

    fn variant(&self, index: usize, r: &Row) -> Result<Option<Variant>, ContrastError> {
        let Some(facts) = self.edited_facts(r.facts) else {
            return Ok(None);
        };
        let mut theory = Theory { facts, rules: self.theory.rules.clone() };
        theory.rules[self.rule_index] = self.edited_rule(r.rule)?;
        let expected = if self.base_label == Label::False { r.label.flip() } else { r.label };
        let actual = closure(&theory).label(self.statement);
        match actual {
            Ok(label) if label == expected => {
                Ok(Some(Variant { theory, statement: self.statement.clone(), label, group: r.group }))
            }
            Ok(label) => Err(ContrastError::TableMismatch { row: index + 1, expected, actual: label.to_string() }),
            Err(e) => Err(ContrastError::TableMismatch { row: index + 1, expected, actual: e.to_string() }),
        }
    }
}

/// Build the `kind` family for base theory `t` and statement `s`, using
/// `fresh` as the unseen literal.
pub fn make_family_with(
    kind: ContrastKind,
    t: &Theory,
    s: &Literal,
    fresh: Literal,
) -> Result<ContrastFamily, ContrastError> {
    let c = closure(t);
    let base_label = c.label(s)?;
    let head = proven_literal(base_label, s).ok_or_else(|| ContrastError::NotProvable(s.clone()))?;
    let rule_index = pick_target(t, s)?;
    let connective = match kind {
        ContrastKind::Conj => Connective::And,
        ContrastKind::Disj => Connective::Or,
        ContrastKind::Neg => Connective::Atomic,
    };
    let plan = Plan { theory: t, statement: s, base_label, rule_index, head, fresh, connective };

    let mut variants = Vec::with_capacity(kind.family_size() - 1);
    let mut complete = true;
    for (i, r) in kind.rows().iter().enumerate() {
        match plan.variant(i + 1, r)? {
            Some(v) => variants.push(v),
            None => complete = false,
        }
    }
    Ok(ContrastFamily {
        kind,
        base: Variant { theory: t.clone(), statement: s.clone(), label: base_label, group: Group::Base },
        variants,
        target_rule_index: rule_index,
        fresh_literal: plan.fresh,
        complete,
    })
}

pub fn make_family<R: Rng + ?Sized>(
    kind: ContrastKind,
    t: &Theory,
    s: &Literal,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<ContrastFamily, ContrastError> {
    let fresh = fresh_literal(t, s, vocab, rng)?;
    make_family_with(kind, t, s, fresh)
}

pub fn make_conjunction_family<R: Rng + ?Sized>(
    t: &Theory,
    s: &Literal,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<ContrastFamily, ContrastError> {
    make_family(ContrastKind::Conj, t, s, vocab, rng)
}

pub fn make_disjunction_family<R: Rng + ?Sized>(
    t: &Theory,
    s: &Literal,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<ContrastFamily, ContrastError> {
    make_family(ContrastKind::Disj, t, s, vocab, rng)
}

pub fn make_negation_family<R: Rng + ?Sized>(
    t: &Theory,
    s: &Literal,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<ContrastFamily, ContrastError> {
    make_family(ContrastKind::Neg, t, s, vocab, rng)
}
