mod common;

use logicprobe::classical::{classical_label, ClassicalError};
use logicprobe::contrast::{make_family, ContrastError, ContrastKind, Group};
use logicprobe::equivalence::{contrapositive_theory, distributive_merge, make_equivalence_pair, EquivalenceKind};
use logicprobe::inference::closure;
use logicprobe::nlg::Vocabulary;
use logicprobe::sampler::{Sampler, SamplerConfig};
use logicprobe::seed::rng_from;
use logicprobe::{Label, OperatorProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn contraposition_preserves_classical_labels() {
    let atoms = common::alphabet(5);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    while checked < 1_000 {
        let t = common::random_theory(&mut rng, &atoms, true);
        let c = contrapositive_theory(&t).unwrap();
        assert_eq!(contrapositive_theory(&c).unwrap(), t);
        for s in atoms.iter().map(|a| a.clone().positive()) {
            match (classical_label(&t, &s), classical_label(&c, &s)) {
                (Ok(a), Ok(b)) => assert_eq!(a, b),
                (Err(ClassicalError::InconsistentTheory), Err(ClassicalError::InconsistentTheory)) => {}
                other => panic!("{other:?}"),
            }
        }
        checked += 1;
    }
}

#[test]
fn sampled_contrast_families_follow_the_tables() {
    let vocab = Vocabulary::default();
    let sampler = Sampler::new(SamplerConfig { seed: 21, ..Default::default() }, &vocab).unwrap();
    for kind in [ContrastKind::Conj, ContrastKind::Disj, ContrastKind::Neg] {
        let mut built = 0;
        for i in 0..400 {
            let st = sampler.sample_theory(i).unwrap();
            let mut rng = rng_from(i);
            for s in st.provable().take(4) {
                match make_family(kind, &st.theory, s, &vocab, &mut rng) {
                    Ok(f) => {
                        built += 1;
                        assert_eq!(f.base.label, Label::True);
                        if f.complete {
                            assert_eq!(f.len(), kind.family_size());
                        }
                        for v in f.members() {
                            assert_eq!(closure(&v.theory).label(&v.statement), Ok(v.label));
                        }
                        // Only the target rule and the facts may differ.
                        for v in &f.variants {
                            for (j, (a, b)) in f.base.theory.rules.iter().zip(&v.theory.rules).enumerate() {
                                if j != f.target_rule_index {
                                    assert_eq!(a, b);
                                }
                            }
                        }
                        assert!(f.variants.iter().all(|v| v.group != Group::Base));
                    }
                    Err(ContrastError::NoEligibleRule(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
        assert!(built > 50, "{kind:?}: {built}");
    }
}

#[test]
fn merges_preserve_closures_and_labels() {
    let vocab = Vocabulary::default();
    let sampler = Sampler::new(SamplerConfig { seed: 4, ..Default::default() }, &vocab).unwrap();
    for kind in [EquivalenceKind::D1, EquivalenceKind::D2] {
        let mut pairs = 0;
        for i in 0..400 {
            let st = sampler.sample_theory(i).unwrap();
            let mut rng = rng_from(i);
            for s in st.provable() {
                let Ok(pair) = make_equivalence_pair(kind, &st.theory, s, &vocab, &mut rng) else { continue };
                assert_eq!(closure(&pair.base).derived_set(), closure(&pair.paraphrase).derived_set());
                for p in &st.predicates {
                    assert_eq!(closure(&pair.base).label(p), closure(&pair.paraphrase).label(p));
                }
                assert!(pair.rewrites.iter().all(|r| r.is_equivalent().unwrap()));
                assert_eq!(pair.paraphrase.facts, pair.base.facts);
                let (again, _) = distributive_merge(&pair.base, kind).unwrap();
                assert_eq!(again, pair.paraphrase);
                pairs += 1;
                break;
            }
        }
        assert!(pairs > 100, "{kind:?}: {pairs}");
    }
}

#[test]
fn contrapositive_pairs_on_simple_theories() {
    let vocab = Vocabulary::default();
    let cfg = SamplerConfig { profile: OperatorProfile::Not, pred_count_max: 20, seed: 9, ..Default::default() };
    let sampler = Sampler::new(cfg, &vocab).unwrap();
    let mut rng = rng_from(0);
    let mut labels = std::collections::BTreeMap::new();
    for i in 0..200 {
        let st = sampler.sample_theory(i).unwrap();
        if st.theory.rules.is_empty() {
            continue;
        }
        for (s, _) in st.candidate_statements.iter().take(3) {
            let pair = make_equivalence_pair(EquivalenceKind::Contra, &st.theory, s, &vocab, &mut rng).unwrap();
            assert_eq!(classical_label(&pair.paraphrase, s).unwrap(), pair.label);
            *labels.entry(pair.label).or_insert(0) += 1;
        }
    }
    assert!(labels.len() == 2 || labels.len() == 3, "{labels:?}");
}
