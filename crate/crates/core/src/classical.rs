//! Truth-table semantics for theories: rules are material implications and a
//! literal and its complement share one boolean variable.
//!
//! This is deliberately independent of the forward-chaining engine; it is
//! the oracle used to certify equivalence rewrites and to cross-check
//! chaining labels.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::logic::{Atom, Connective, Label, Literal, PredicateGroup, Rule, Theory};

/// Largest number of distinct atoms the exhaustive enumeration accepts.
pub const ATOM_BUDGET: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalError {
    #[error("{atoms} distinct atoms exceed the truth-table budget of {budget}")]
    AtomBudgetExceeded { atoms: usize, budget: usize },
    #[error("theory has no satisfying assignment")]
    InconsistentTheory,
}

/// Positive and negative literal masks of a group over the variable index.
#[derive(Debug, Clone, Copy)]
struct GroupMask {
    connective: Connective,
    pos: u32,
    neg: u32,
}

impl GroupMask {
    fn eval(&self, assignment: u32) -> bool {
        match self.connective {
            Connective::Or => (assignment & self.pos) != 0 || (!assignment & self.neg) != 0,
            _ => (assignment & self.pos) == self.pos && (assignment & self.neg) == 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RuleMask {
    lhs: GroupMask,
    rhs: GroupMask,
}

impl RuleMask {
    fn eval(&self, assignment: u32) -> bool {
        !self.lhs.eval(assignment) || self.rhs.eval(assignment)
    }
}

struct Encoder<'a> {
    index: BTreeMap<&'a Atom, u32>,
}

impl<'a> Encoder<'a> {
    fn new(atoms: impl IntoIterator<Item = &'a Atom>) -> Result<Self, ClassicalError> {
        let mut index = BTreeMap::new();
        for atom in atoms {
            let next = index.len() as u32;
            index.entry(atom).or_insert(next);
        }
        if index.len() > ATOM_BUDGET {
            return Err(ClassicalError::AtomBudgetExceeded { atoms: index.len(), budget: ATOM_BUDGET });
        }
        Ok(Encoder { index })
    }

    fn bit(&self, lit: &Literal) -> u32 {
        1 << self.index[&lit.atom]
    }

    fn group(&self, g: &PredicateGroup) -> GroupMask {
        let mut mask = GroupMask { connective: g.connective(), pos: 0, neg: 0 };
        for lit in g.literals() {
            if lit.negated {
                mask.neg |= self.bit(lit);
            } else {
                mask.pos |= self.bit(lit);
            }
        }
        mask
    }

    fn rule(&self, r: &Rule) -> RuleMask {
        RuleMask { lhs: self.group(&r.lhs), rhs: self.group(&r.rhs) }
    }

    fn len(&self) -> usize {
        self.index.len()
    }
}

/// Every assignment of the free (non-fact) variables, with facts pinned.
fn models<'r>(
    n_vars: usize,
    fixed_mask: u32,
    fixed_values: u32,
    rules: &'r [RuleMask],
) -> impl Iterator<Item = u32> + 'r {
    let free: Vec<u32> = (0..n_vars as u32).filter(|i| fixed_mask & (1 << i) == 0).collect();
    (0u64..(1u64 << free.len())).filter_map(move |bits| {
        let mut assignment = fixed_values;
        for (j, var) in free.iter().enumerate() {
            if bits & (1 << j) != 0 {
                assignment |= 1 << var;
            }
        }
        rules.iter().all(|r| r.eval(assignment)).then_some(assignment)
    })
}

/// Classical entailment label of `statement` under `theory`.
///
/// True iff every model satisfies the statement, False iff every model
/// satisfies its complement, Unknown otherwise. A theory with no model is an
/// error rather than entailing everything.
pub fn classical_label(theory: &Theory, statement: &Literal) -> Result<Label, ClassicalError> {
    let atoms = theory.atoms().into_iter().chain(std::iter::once(&statement.atom));
    let enc = Encoder::new(atoms)?;

    let mut fixed_mask = 0u32;
    let mut fixed_values = 0u32;
    for fact in &theory.facts {
        let bit = enc.bit(fact);
        let value = if fact.negated { 0 } else { bit };
        if fixed_mask & bit != 0 && fixed_values & bit != value {
            return Err(ClassicalError::InconsistentTheory);
        }
        fixed_mask |= bit;
        fixed_values |= value;
    }
    let rules: Vec<RuleMask> = theory.rules.iter().map(|r| enc.rule(r)).collect();
    let s_bit = enc.bit(statement);

    let mut seen_true = false;
    let mut seen_false = false;
    for assignment in models(enc.len(), fixed_mask, fixed_values, &rules) {
        let var = assignment & s_bit != 0;
        if var != statement.negated {
            seen_true = true;
        } else {
            seen_false = true;
        }
        if seen_true && seen_false {
            return Ok(Label::Unknown);
        }
    }
    match (seen_true, seen_false) {
        (false, false) => Err(ClassicalError::InconsistentTheory),
        (true, false) => Ok(Label::True),
        (false, true) => Ok(Label::False),
        (true, true) => unreachable!(),
    }
}

/// Whether two rule sets denote the same boolean function over the union of
/// their atoms (conjunction of material implications).
pub fn equivalent_rule_sets(a: &[Rule], b: &[Rule]) -> Result<bool, ClassicalError> {
    let atoms = a.iter().chain(b).flat_map(Rule::literals).map(|l| &l.atom);
    let enc = Encoder::new(atoms)?;
    let ra: Vec<RuleMask> = a.iter().map(|r| enc.rule(r)).collect();
    let rb: Vec<RuleMask> = b.iter().map(|r| enc.rule(r)).collect();
    Ok((0u64..(1u64 << enc.len())).all(|bits| {
        let assignment = bits as u32;
        ra.iter().all(|r| r.eval(assignment)) == rb.iter().all(|r| r.eval(assignment))
    }))
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

    #[test]
    fn modus_ponens() {
        let t = theory("p(a)\np(a) -> q(a)\n");
        assert_eq!(classical_label(&t, &lit("q(a)")), Ok(Label::True));
        assert_eq!(classical_label(&t, &lit("~q(a)")), Ok(Label::False));
    }

    #[test]
    fn contrapositive_rule_still_entails() {
        // Enumeration over {p, q} with p pinned true: (q=0) violates ~q -> ~p,
        // leaving only q=1.
        let t = theory("p(a)\n~q(a) -> ~p(a)\n");
        assert_eq!(classical_label(&t, &lit("q(a)")), Ok(Label::True));
    }

    #[test]
    fn empty_theory_is_unknown() {
        let t = Theory::default();
        assert_eq!(classical_label(&t, &lit("green(Alex)")), Ok(Label::Unknown));
        assert_eq!(classical_label(&t, &lit("~green(Alex)")), Ok(Label::Unknown));
    }

    #[test]
    fn inconsistent_theory_is_rejected() {
        let t = theory("p(a)\np(a) -> q(a)\np(a) -> ~q(a)\n");
        assert_eq!(classical_label(&t, &lit("q(a)")), Err(ClassicalError::InconsistentTheory));
    }

    #[test]
    fn budget_is_enforced() {
        let facts: String = (0..ATOM_BUDGET).map(|i| format!("p(a{i})\n")).collect();
        let t = theory(&facts);
        assert_eq!(classical_label(&t, &lit("p(a0)")), Ok(Label::True));
        assert_eq!(
            classical_label(&t, &lit("q(a)")),
            Err(ClassicalError::AtomBudgetExceeded { atoms: ATOM_BUDGET + 1, budget: ATOM_BUDGET })
        );
    }

    #[test]
    fn disjunctive_body() {
        let t = theory("~p(a)\np(a) | r(a) -> q(a)\n");
        assert_eq!(classical_label(&t, &lit("q(a)")), Ok(Label::Unknown));
        let t = theory("~q(a)\np(a) | r(a) -> q(a)\n");
        assert_eq!(classical_label(&t, &lit("r(a)")), Ok(Label::False));
    }

    #[test]
    fn rule_set_equivalences() {
        let r = |s: &str| -> Rule { s.parse().unwrap() };
        assert_eq!(equivalent_rule_sets(&[r("p(a) -> q(a)")], &[r("~q(a) -> ~p(a)")]), Ok(true));
        assert_eq!(
            equivalent_rule_sets(&[r("p(a) -> q(a)"), r("p(a) -> r(a)")], &[r("p(a) -> q(a) & r(a)")]),
            Ok(true)
        );
        assert_eq!(
            equivalent_rule_sets(&[r("p(a) -> q(a)"), r("r(a) -> q(a)")], &[r("p(a) | r(a) -> q(a)")]),
            Ok(true)
        );
        assert_eq!(equivalent_rule_sets(&[r("p(a) -> q(a)")], &[r("q(a) -> p(a)")]), Ok(false));
    }
}
