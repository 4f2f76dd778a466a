use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::logic::{Label, Literal};
use crate::sampler::SampledTheory;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("theory rejected: {0}")]
pub struct Reject(pub String);

/// Pick exactly `k` True, `k` False and `k` Unknown statements over distinct
/// predicates, returned interleaved as T, F, U, T, F, U, ...
///
/// Within each label, `k / 2` statements are negated literals (one more
/// with probability 1/2 when `k` is odd), so whether a statement carries a
/// negation says nothing about its label. True statements are provable
/// predicates as sampled, False statements are complements of provable
/// predicates, Unknown statements are unprovable predicates as sampled.
pub fn balance_statements<R: Rng + ?Sized>(st: &SampledTheory, k: usize, rng: &mut R) -> Result<Vec<(Literal, Label)>, Reject> {
    if k == 0 {
        return Err(Reject("k must be at least 1".into()));
    }
    let mut prov_neg: Vec<&Literal> = st.provable().filter(|l| l.negated).collect();
    let mut prov_pos: Vec<&Literal> = st.provable().filter(|l| !l.negated).collect();
    let mut unprov_neg: Vec<&Literal> = st.unprovable().filter(|l| l.negated).collect();
    let mut unprov_pos: Vec<&Literal> = st.unprovable().filter(|l| !l.negated).collect();
    for pool in [&mut prov_neg, &mut prov_pos, &mut unprov_neg, &mut unprov_pos] {
        pool.shuffle(rng);
    }
    let mut negated_count = || k / 2 + usize::from(k % 2 == 1 && rng.gen_bool(0.5));
    let (m_true, m_false, m_unknown) = (negated_count(), negated_count(), negated_count());

    // Negated True statements and positive False statements both consume
    // negated provable predicates.
    let need_prov_neg = m_true + (k - m_false);
    let need_prov_pos = (k - m_true) + m_false;
    if prov_neg.len() < need_prov_neg || prov_pos.len() < need_prov_pos {
        return Err(Reject(format!(
            "needs {need_prov_neg} negated and {need_prov_pos} positive provable predicates, has {} and {}",
            prov_neg.len(),
            prov_pos.len()
        )));
    }
    if unprov_neg.len() < m_unknown || unprov_pos.len() < k - m_unknown {
        return Err(Reject(format!(
            "needs {m_unknown} negated and {} positive unprovable predicates, has {} and {}",
            k - m_unknown,
            unprov_neg.len(),
            unprov_pos.len()
        )));
    }

    let take = |pool: &mut Vec<&Literal>, n: usize| -> Vec<Literal> { pool.drain(..n).cloned().collect() };
    let mut trues = take(&mut prov_neg, m_true);
    trues.extend(take(&mut prov_pos, k - m_true));
    // complement of a positive predicate is a negated statement
    let mut falses: Vec<Literal> = take(&mut prov_pos, m_false).iter().map(Literal::complement).collect();
    falses.extend(take(&mut prov_neg, k - m_false).iter().map(Literal::complement));
    let mut unknowns = take(&mut unprov_neg, m_unknown);
    unknowns.extend(take(&mut unprov_pos, k - m_unknown));
    for group in [&mut trues, &mut falses, &mut unknowns] {
        group.shuffle(rng);
    }

    let mut out = Vec::with_capacity(3 * k);
    for i in 0..k {
        out.push((trues[i].clone(), Label::True));
        out.push((falses[i].clone(), Label::False));
        out.push((unknowns[i].clone(), Label::Unknown));
    }
    Ok(out)
}

/// Keep the first `n` items of an interleaved list made of rounds of
/// `per_round` labels (T, F, U or T, F) so that True and False stay at
/// parity where possible: whole rounds, then U alone for one extra slot or
/// T and F for two. With two-label rounds an odd `n` ends on a lone True.
pub fn truncate_balanced<T: Clone>(items: &[T], label: impl Fn(&T) -> Label, n: usize, per_round: usize) -> Vec<T> {
    let n = n.min(items.len());
    let full = n / per_round * per_round;
    let mut out = items[..full].to_vec();
    let rest = &items[full..(full + per_round).min(items.len())];
    let pick: &[Label] = match (per_round, n - full) {
        (_, 0) => &[],
        (3, 1) => &[Label::Unknown],
        (3, _) => &[Label::True, Label::False],
        _ => &[Label::True],
    };
    out.extend(rest.iter().filter(|x| pick.contains(&label(x))).cloned());
    out
}
