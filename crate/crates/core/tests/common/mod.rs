#![allow(dead_code)]

use std::collections::BTreeSet;

use logicprobe::{Atom, Connective, Literal, PredicateGroup, Rule, Theory};
use rand::prelude::*;

pub const NAMES: [&str; 3] = ["Alex", "Bob", "Carl"];

/// `relations * 3` unary atoms over a fixed alphabet.
pub fn alphabet(relations: usize) -> Vec<Atom> {
    (0..relations)
        .flat_map(|r| NAMES.iter().map(move |n| Atom::new(format!("r{r}"), [*n]).unwrap()))
        .collect()
}

pub fn random_literal<R: Rng>(rng: &mut R, atoms: &[Atom]) -> Literal {
    let atom = atoms.choose(rng).unwrap().clone();
    if rng.gen_bool(0.3) {
        atom.negative()
    } else {
        atom.positive()
    }
}

fn random_group<R: Rng>(rng: &mut R, atoms: &[Atom], max_len: usize, allow_or: bool) -> Option<PredicateGroup> {
    let n = rng.gen_range(1..=max_len);
    let lits: Vec<Literal> = (0..n).map(|_| random_literal(rng, atoms)).collect();
    let conn = match n {
        1 => Connective::Atomic,
        _ if allow_or && rng.gen_bool(0.5) => Connective::Or,
        _ => Connective::And,
    };
    PredicateGroup::new(conn, lits).ok()
}

pub fn random_rule<R: Rng>(rng: &mut R, atoms: &[Atom]) -> Rule {
    loop {
        let lhs = random_group(rng, atoms, 3, true);
        let rhs = random_group(rng, atoms, 2, false);
        if let (Some(lhs), Some(rhs)) = (lhs, rhs) {
            return Rule { lhs, rhs };
        }
    }
}

pub fn random_simple_rule<R: Rng>(rng: &mut R, atoms: &[Atom]) -> Rule {
    Rule::simple(random_literal(rng, atoms), random_literal(rng, atoms))
}

/// Facts never clash with each other; rules are unconstrained, so the
/// closure may be inconsistent.
pub fn random_theory<R: Rng>(rng: &mut R, atoms: &[Atom], simple: bool) -> Theory {
    let n_facts = rng.gen_range(0..=6);
    let mut used = BTreeSet::new();
    let mut facts = Vec::new();
    for _ in 0..n_facts {
        let lit = random_literal(rng, atoms);
        if used.insert(lit.atom.clone()) {
            facts.push(lit);
        }
    }
    let n_rules = rng.gen_range(0..=10);
    let rules = (0..n_rules)
        .map(|_| if simple { random_simple_rule(rng, atoms) } else { random_rule(rng, atoms) })
        .collect();
    Theory { facts, rules }
}

/// Fixpoint computed by firing rules in a random order until nothing
/// changes. Independent of the engine's round structure.
pub fn reference_fixpoint<R: Rng>(t: &Theory, rng: &mut R) -> BTreeSet<Literal> {
    let mut known: BTreeSet<Literal> = t.facts.iter().cloned().collect();
    let mut order: Vec<&Rule> = t.rules.iter().collect();
    loop {
        order.shuffle(rng);
        let mut changed = false;
        for r in &order {
            let lits = r.lhs.literals();
            let fires = match r.lhs.connective() {
                Connective::Or => lits.iter().any(|l| known.contains(l)),
                _ => lits.iter().all(|l| known.contains(l)),
            };
            if fires {
                for l in r.rhs.literals() {
                    changed |= known.insert(l.clone());
                }
            }
        }
        if !changed {
            return known;
        }
    }
}
