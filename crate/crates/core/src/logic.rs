//! Ground propositional language: literals, flat predicate groups, rules and
//! theories, plus the operator profiles that restrict which rule shapes a
//! dataset may contain.
//!
//! Every type here has a canonical one-line text form (see [`crate::lf`]);
//! `Display` produces it and `FromStr` parses it back.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("a literal takes 1 or 2 arguments, got {0}")]
    Arity(usize),
    #[error("invalid symbol {0:?}")]
    Symbol(String),
    #[error("predicate group is empty")]
    EmptyGroup,
    #[error("connective {connective:?} does not fit a group of {len} literal(s)")]
    ConnectiveArity { connective: Connective, len: usize },
    #[error("duplicate literal {0} in group")]
    DuplicateLiteral(Literal),
    #[error("literal {0} appears with both polarities in one group")]
    MixedPolarity(Literal),
    #[error("disjunction is not allowed on the right-hand side of a rule")]
    DisjunctiveHead,
    #[error("fact {0} is asserted in both polarities")]
    ContradictoryFacts(Literal),
}

pub(crate) fn is_symbol(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// An unsigned ground predicate: a relation applied to one or two names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    relation: String,
    args: Vec<String>,
}

impl Atom {
    pub fn new<R, I, A>(relation: R, args: I) -> Result<Self, LogicError>
    where
        R: Into<String>,
        I: IntoIterator<Item = A>,
        A: Into<String>,
    {
        let relation = relation.into();
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        if !(1..=2).contains(&args.len()) {
            return Err(LogicError::Arity(args.len()));
        }
        if !is_symbol(&relation) {
            return Err(LogicError::Symbol(relation));
        }
        if let Some(bad) = args.iter().find(|a| !is_symbol(a)) {
            return Err(LogicError::Symbol(bad.clone()));
        }
        Ok(Atom { relation, args })
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn is_binary(&self) -> bool {
        self.args.len() == 2
    }

    pub fn positive(self) -> Literal {
        Literal { atom: self, negated: false }
    }

    pub fn negative(self) -> Literal {
        Literal { atom: self, negated: true }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.args.join(","))
    }
}

/// A possibly negated [`Atom`]. `x` and `~x` share one boolean variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn unary(relation: &str, arg: &str) -> Result<Self, LogicError> {
        Ok(Atom::new(relation, [arg])?.positive())
    }

    pub fn binary(relation: &str, a: &str, b: &str) -> Result<Self, LogicError> {
        Ok(Atom::new(relation, [a, b])?.positive())
    }

    pub fn relation(&self) -> &str {
        self.atom.relation()
    }

    pub fn args(&self) -> &[String] {
        self.atom.args()
    }

    /// Same atom, opposite sign.
    pub fn complement(&self) -> Literal {
        Literal { atom: self.atom.clone(), negated: !self.negated }
    }

    pub fn negate_if(self, flag: bool) -> Literal {
        if flag {
            self.complement()
        } else {
            self
        }
    }
}

pub fn complement(lit: &Literal) -> Literal {
    lit.complement()
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        self.atom.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Connective {
    /// A single literal, no operator.
    Atomic,
    And,
    Or,
}

/// A flat group of literals under one connective. Groups never nest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateGroup {
    connective: Connective,
    literals: Vec<Literal>,
}

impl PredicateGroup {
    pub fn new(connective: Connective, literals: Vec<Literal>) -> Result<Self, LogicError> {
        if literals.is_empty() {
            return Err(LogicError::EmptyGroup);
        }
        let single = literals.len() == 1;
        if single != (connective == Connective::Atomic) {
            return Err(LogicError::ConnectiveArity { connective, len: literals.len() });
        }
        let mut seen = BTreeSet::new();
        for lit in &literals {
            if !seen.insert(lit) {
                return Err(LogicError::DuplicateLiteral(lit.clone()));
            }
        }
        if let Some(lit) = literals.iter().find(|l| seen.contains(&l.complement())) {
            return Err(LogicError::MixedPolarity(lit.clone()));
        }
        Ok(PredicateGroup { connective, literals })
    }

    pub fn atom(lit: Literal) -> Self {
        PredicateGroup { connective: Connective::Atomic, literals: vec![lit] }
    }

    /// Conjunction of `literals`, collapsing to an atomic group for one literal.
    pub fn all(literals: Vec<Literal>) -> Result<Self, LogicError> {
        let conn = if literals.len() == 1 { Connective::Atomic } else { Connective::And };
        Self::new(conn, literals)
    }

    pub fn any(literals: Vec<Literal>) -> Result<Self, LogicError> {
        let conn = if literals.len() == 1 { Connective::Atomic } else { Connective::Or };
        Self::new(conn, literals)
    }

    pub fn connective(&self) -> Connective {
        self.connective
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_atomic(&self) -> bool {
        self.connective == Connective::Atomic
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.literals.contains(lit)
    }

    /// Truth of the group given a membership test for its literals.
    pub fn holds(&self, mut is_true: impl FnMut(&Literal) -> bool) -> bool {
        match self.connective {
            Connective::Or => self.literals.iter().any(&mut is_true),
            Connective::Atomic | Connective::And => self.literals.iter().all(is_true),
        }
    }
}

impl fmt::Display for PredicateGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.connective {
            Connective::Or => " | ",
            _ => " & ",
        };
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            lit.fmt(f)?;
        }
        Ok(())
    }
}

/// `lhs -> rhs`. The head is a conjunction (or a single literal).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: PredicateGroup,
    pub rhs: PredicateGroup,
}

impl Rule {
    pub fn new(lhs: PredicateGroup, rhs: PredicateGroup) -> Result<Self, LogicError> {
        if rhs.connective() == Connective::Or {
            return Err(LogicError::DisjunctiveHead);
        }
        Ok(Rule { lhs, rhs })
    }

    pub fn simple(lhs: Literal, rhs: Literal) -> Self {
        Rule { lhs: PredicateGroup::atom(lhs), rhs: PredicateGroup::atom(rhs) }
    }

    /// Both sides atomic.
    pub fn is_simple(&self) -> bool {
        self.lhs.is_atomic() && self.rhs.is_atomic()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.lhs.literals().iter().chain(self.rhs.literals())
    }

    pub fn has_negation(&self) -> bool {
        self.literals().any(|l| l.negated)
    }

    pub fn has_connective(&self, conn: Connective) -> bool {
        self.lhs.connective() == conn || self.rhs.connective() == conn
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// Ordered facts and rules. Facts are atomic literals and never clash.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Theory {
    pub facts: Vec<Literal>,
    pub rules: Vec<Rule>,
}

impl Theory {
    pub fn new(facts: Vec<Literal>, rules: Vec<Rule>) -> Result<Self, LogicError> {
        let set: BTreeSet<&Literal> = facts.iter().collect();
        if let Some(lit) = facts.iter().find(|l| set.contains(&l.complement())) {
            return Err(LogicError::ContradictoryFacts(lit.clone()));
        }
        Ok(Theory { facts, rules })
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rules.is_empty()
    }

    /// Every atom mentioned by a fact or rule.
    pub fn atoms(&self) -> BTreeSet<&Atom> {
        self.facts
            .iter()
            .chain(self.rules.iter().flat_map(Rule::literals))
            .map(|l| &l.atom)
            .collect()
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}")?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

/// Three-valued entailment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
    Unknown,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::True, Label::False, Label::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "True",
            Label::False => "False",
            Label::Unknown => "Unknown",
        }
    }

    /// Integer codes used by the layered sampler: 1 True, 2 False, 0 Unknown.
    pub fn code(self) -> u8 {
        match self {
            Label::Unknown => 0,
            Label::True => 1,
            Label::False => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Label> {
        match code {
            0 => Some(Label::Unknown),
            1 => Some(Label::True),
            2 => Some(Label::False),
            _ => None,
        }
    }

    /// Swap True and False; Unknown is fixed.
    pub fn flip(self) -> Label {
        match self {
            Label::True => Label::False,
            Label::False => Label::True,
            Label::Unknown => Label::Unknown,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "True" => Ok(Label::True),
            "False" => Ok(Label::False),
            "Unknown" => Ok(Label::Unknown),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Connective regime of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OperatorProfile {
    /// Simple rules only; negation anywhere.
    Not,
    AndNot,
    OrNot,
    All,
}

impl OperatorProfile {
    pub const ALL: [OperatorProfile; 4] =
        [OperatorProfile::Not, OperatorProfile::AndNot, OperatorProfile::OrNot, OperatorProfile::All];

    pub fn name(self) -> &'static str {
        match self {
            OperatorProfile::Not => "NOT",
            OperatorProfile::AndNot => "AND_NOT",
            OperatorProfile::OrNot => "OR_NOT",
            OperatorProfile::All => "ALL",
        }
    }

    pub fn allows_lhs(self, conn: Connective) -> bool {
        matches!(
            (self, conn),
            (_, Connective::Atomic)
                | (OperatorProfile::AndNot, Connective::And)
                | (OperatorProfile::OrNot, Connective::Or)
                | (OperatorProfile::All, _)
        )
    }

    pub fn allows_rhs(self, conn: Connective) -> bool {
        matches!((self, conn), (_, Connective::Atomic) | (OperatorProfile::AndNot | OperatorProfile::All, Connective::And))
    }

    /// Connectives available for composing a multi-literal rule body.
    pub fn body_connectives(self) -> &'static [Connective] {
        match self {
            OperatorProfile::Not => &[],
            OperatorProfile::AndNot => &[Connective::And],
            OperatorProfile::OrNot => &[Connective::Or],
            OperatorProfile::All => &[Connective::And, Connective::Or],
        }
    }
}

impl fmt::Display for OperatorProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace(['-', '+'], "_").as_str() {
            "NOT" => Ok(OperatorProfile::Not),
            "AND_NOT" => Ok(OperatorProfile::AndNot),
            "OR_NOT" => Ok(OperatorProfile::OrNot),
            "ALL" => Ok(OperatorProfile::All),
            _ => Err(format!("unknown operator profile {s:?} (expected not, and-not, or-not, all)")),
        }
    }
}

/// Whether `rule` is a legal rule shape under `profile`. A disjunctive head
/// is rejected under every profile.
pub fn validate_rule(rule: &Rule, profile: OperatorProfile) -> bool {
    rule.rhs.connective() != Connective::Or
        && profile.allows_lhs(rule.lhs.connective())
        && profile.allows_rhs(rule.rhs.connective())
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Literal);
string_serde!(Rule);
