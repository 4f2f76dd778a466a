//! Forward chaining over ground literals.
//!
//! The closure is computed in breadth-first rounds: every rule is tested
//! against the literals known at the start of the round, and the first
//! derivation of a literal (lowest rule index within the earliest round) is
//! kept as its canonical derivation. Proof sets are read off by walking
//! canonical derivations backwards.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::logic::{Connective, Label, Literal, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error("closure derives both {0} and its complement")]
    InconsistentClosure(Literal),
    #[error("statement {0} is not provable (label Unknown)")]
    NotProvable(Literal),
}

/// How a literal first entered the closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    /// Asserted by the fact at this index.
    Fact(usize),
    /// Fired by `rule` in `round` (1-based) from `support`.
    Rule { rule: usize, round: usize, support: Vec<Literal> },
}

#[derive(Debug, Clone)]
pub struct Closure {
    derivations: BTreeMap<Literal, Derivation>,
    alternates: BTreeSet<Literal>,
    rounds: usize,
}

impl Closure {
    pub fn contains(&self, lit: &Literal) -> bool {
        self.derivations.contains_key(lit)
    }

    pub fn derived(&self) -> impl Iterator<Item = &Literal> {
        self.derivations.keys()
    }

    pub fn derived_set(&self) -> BTreeSet<Literal> {
        self.derivations.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.derivations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.derivations.is_empty()
    }

    pub fn derivation(&self, lit: &Literal) -> Option<&Derivation> {
        self.derivations.get(lit)
    }

    /// Number of chaining rounds until fixpoint (0 for a facts-only theory).
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Round of the canonical derivation; 0 for facts.
    pub fn depth(&self, lit: &Literal) -> Option<usize> {
        self.derivations.get(lit).map(|d| match d {
            Derivation::Fact(_) => 0,
            Derivation::Rule { round, .. } => *round,
        })
    }

    /// True when the literal has more than one way in: it is both a fact and
    /// a rule conclusion, is concluded by several satisfied rules, or a
    /// satisfied disjunctive body has several true disjuncts.
    pub fn has_alternate_derivation(&self, lit: &Literal) -> bool {
        self.alternates.contains(lit)
    }

    /// A literal whose complement is also derived, if any.
    pub fn clash(&self) -> Option<&Literal> {
        self.derivations
            .keys()
            .find(|l| !l.negated && self.derivations.contains_key(&l.complement()))
    }

    pub fn is_consistent(&self) -> bool {
        self.clash().is_none()
    }

    /// Label of `s` against this closure.
    pub fn label(&self, s: &Literal) -> Result<Label, InferenceError> {
        if let Some(lit) = self.clash() {
            return Err(InferenceError::InconsistentClosure(lit.clone()));
        }
        Ok(if self.contains(s) {
            Label::True
        } else if self.contains(&s.complement()) {
            Label::False
        } else {
            Label::Unknown
        })
    }

    /// Facts and rules on the canonical derivation of `target`.
    pub fn proof_of(&self, target: &Literal) -> Option<ProofSet> {
        self.derivations.get(target)?;
        let mut proof = ProofSet::default();
        let mut stack = vec![target];
        let mut visited = BTreeSet::new();
        while let Some(lit) = stack.pop() {
            if !visited.insert(lit) {
                continue;
            }
            match &self.derivations[lit] {
                Derivation::Fact(i) => {
                    proof.facts.insert(*i);
                }
                Derivation::Rule { rule, support, .. } => {
                    proof.rules.insert(*rule);
                    stack.extend(support.iter());
                }
            }
        }
        Some(proof)
    }
}

/// G(T, s): the fact and rule indices a derivation depends on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofSet {
    pub facts: BTreeSet<usize>,
    pub rules: BTreeSet<usize>,
}

impl ProofSet {
    /// The sub-theory made of exactly these facts and rules, order kept.
    pub fn restrict(&self, t: &Theory) -> Theory {
        Theory {
            facts: t.facts.iter().enumerate().filter(|(i, _)| self.facts.contains(i)).map(|(_, f)| f.clone()).collect(),
            rules: t.rules.iter().enumerate().filter(|(i, _)| self.rules.contains(i)).map(|(_, r)| r.clone()).collect(),
        }
    }
}

/// Least fixpoint of forward rule application from the facts.
pub fn closure(t: &Theory) -> Closure {
    let mut derivations: BTreeMap<Literal, Derivation> = BTreeMap::new();
    for (i, fact) in t.facts.iter().enumerate() {
        derivations.entry(fact.clone()).or_insert(Derivation::Fact(i));
    }
    let mut fired = vec![false; t.rules.len()];
    let mut rounds = 0;
    loop {
        let round = rounds + 1;
        let mut new: BTreeMap<Literal, Derivation> = BTreeMap::new();
        for (idx, rule) in t.rules.iter().enumerate() {
            if fired[idx] || !rule.lhs.holds(|l| derivations.contains_key(l)) {
                continue;
            }
            fired[idx] = true;
            let support: Vec<Literal> = match rule.lhs.connective() {
                Connective::Or => rule
                    .lhs
                    .literals()
                    .iter()
                    .find(|l| derivations.contains_key(*l))
                    .cloned()
                    .into_iter()
                    .collect(),
                _ => rule.lhs.literals().to_vec(),
            };
            for head in rule.rhs.literals() {
                if !derivations.contains_key(head) && !new.contains_key(head) {
                    new.insert(head.clone(), Derivation::Rule { rule: idx, round, support: support.clone() });
                }
            }
        }
        if new.is_empty() {
            break;
        }
        rounds = round;
        derivations.extend(new);
    }

    let mut ways: BTreeMap<&Literal, usize> = BTreeMap::new();
    for fact in &t.facts {
        *ways.entry(fact).or_default() += 1;
    }
    for rule in &t.rules {
        let satisfied = match rule.lhs.connective() {
            Connective::Or => rule.lhs.literals().iter().filter(|l| derivations.contains_key(*l)).count(),
            _ => usize::from(rule.lhs.holds(|l| derivations.contains_key(l))),
        };
        if satisfied > 0 {
            for head in rule.rhs.literals() {
                *ways.entry(head).or_default() += satisfied;
            }
        }
    }
    let alternates = ways.into_iter().filter(|(_, n)| *n > 1).map(|(l, _)| l.clone()).collect();

    Closure { derivations, alternates, rounds }
}

/// True if `s` is derivable, False if its complement is, Unknown otherwise.
pub fn entail_label(t: &Theory, s: &Literal) -> Result<Label, InferenceError> {
    closure(t).label(s)
}

/// The literal whose derivation justifies a True/False label: `s` itself or
/// its complement.
pub fn proven_literal(label: Label, s: &Literal) -> Option<Literal> {
    match label {
        Label::True => Some(s.clone()),
        Label::False => Some(s.complement()),
        Label::Unknown => None,
    }
}

pub fn proof_set(t: &Theory, s: &Literal) -> Result<ProofSet, InferenceError> {
    let c = closure(t);
    let label = c.label(s)?;
    let target = proven_literal(label, s).ok_or_else(|| InferenceError::NotProvable(s.clone()))?;
    Ok(c.proof_of(&target).expect("proven literal is in the closure"))
}

/// Drop every fact and rule outside the proof set of `s`.
pub fn strip_distractors(t: &Theory, s: &Literal) -> Result<Theory, InferenceError> {
    Ok(proof_set(t, s)?.restrict(t))
}

pub fn check_consistent(t: &Theory) -> bool {
    closure(t).is_consistent()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theory(text: &str) -> Theory {
        text.parse().unwrap()
    }

    fn lit(s: &str) -> Literal {
        s.parse().unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<Literal> {
        items.iter().map(|s| lit(s)).collect()
    }

    #[test]
    fn two_step_chain() {
        let c = closure(&theory("p(a)\np(a) -> q(a)\nq(a) -> r(a)\n"));
        assert_eq!(c.derived_set(), set(&["p(a)", "q(a)", "r(a)"]));
        assert_eq!(c.depth(&lit("r(a)")), Some(2));
        assert_eq!(c.rounds(), 2);
    }

    #[test]
    fn conjunction_needs_every_literal() {
        let c = closure(&theory("p(a)\np(a) & t(a) -> q(a)\n"));
        assert_eq!(c.derived_set(), set(&["p(a)"]));
    }

    #[test]
    fn disjunction_needs_one_literal() {
        let c = closure(&theory("p(a)\np(a) | t(a) -> q(a)\n"));
        assert_eq!(c.derived_set(), set(&["p(a)", "q(a)"]));
    }

    #[test]
    fn labels() {
        let t = theory("p(a)\np(a) -> q(a)\n");
        assert_eq!(entail_label(&t, &lit("q(a)")), Ok(Label::True));
        assert_eq!(entail_label(&t, &lit("~q(a)")), Ok(Label::False));
        assert_eq!(entail_label(&t, &lit("zz(b)")), Ok(Label::Unknown));

        let t = theory("p(a)\nt(a)\np(a) & t(a) -> ~q(a)\n");
        assert_eq!(entail_label(&t, &lit("q(a)")), Ok(Label::False));
    }

    #[test]
    fn inconsistency() {
        assert!(!check_consistent(&Theory { facts: vec![lit("p(a)"), lit("~p(a)")], rules: vec![] }));
        let t = theory("p(a)\np(a) -> q(a)\np(a) -> ~q(a)\n");
        assert!(!check_consistent(&t));
        assert!(matches!(entail_label(&t, &lit("p(a)")), Err(InferenceError::InconsistentClosure(_))));
        assert!(check_consistent(&theory("p(a)\np(a) -> q(a)\n")));
    }

    #[test]
    fn proof_excludes_irrelevant_branch() {
        let t = theory("p(a)\nx(a)\np(a) -> q(a)\nx(a) -> y(a)\n");
        let proof = proof_set(&t, &lit("q(a)")).unwrap();
        assert_eq!(proof.facts, BTreeSet::from([0]));
        assert_eq!(proof.rules, BTreeSet::from([0]));

        let proof = proof_set(&t, &lit("~y(a)")).unwrap();
        assert_eq!(proof.facts, BTreeSet::from([1]));
        assert_eq!(proof.rules, BTreeSet::from([1]));

        assert_eq!(proof_set(&t, &lit("z(a)")), Err(InferenceError::NotProvable(lit("z(a)"))));
    }

    #[test]
    fn canonical_derivation_prefers_lowest_rule_in_earliest_round() {
        // r(a) is reachable in round 1 via rule 2 and in round 2 via rule 1.
        let t = theory("p(a)\np(a) -> q(a)\nq(a) -> r(a)\np(a) -> r(a)\n");
        let c = closure(&t);
        assert!(matches!(c.derivation(&lit("r(a)")), Some(Derivation::Rule { rule: 2, round: 1, .. })));
        assert!(c.has_alternate_derivation(&lit("r(a)")));
        assert!(!c.has_alternate_derivation(&lit("q(a)")));

        let t = theory("p(a)\nx(a)\np(a) -> q(a)\nx(a) -> q(a)\n");
        let c = closure(&t);
        assert!(matches!(c.derivation(&lit("q(a)")), Some(Derivation::Rule { rule: 0, .. })));
        assert!(c.has_alternate_derivation(&lit("q(a)")));

        let c = closure(&theory("p(a)\nx(a)\np(a) | x(a) -> q(a)\n"));
        assert!(c.has_alternate_derivation(&lit("q(a)")));
    }

    #[test]
    fn strip_keeps_order_and_is_idempotent() {
        let t = theory("a(x)\nb(x)\nc(x)\nd(x)\ne(x)\nb(x) -> q(x)\na(x) -> m(x)\nc(x) -> n(x)\nd(x) -> o(x)\n");
        let s = lit("q(x)");
        let stripped = strip_distractors(&t, &s).unwrap();
        assert_eq!(stripped, theory("b(x)\nb(x) -> q(x)\n"));
        assert_eq!(strip_distractors(&stripped, &s).unwrap(), stripped);
        assert_eq!(entail_label(&stripped, &s), entail_label(&t, &s));
    }
}
