//! Diagram-level properties: valuations restrict to diagrams, ψ agrees
//! with the direct condition checker and with the ℕ-encoding, and
//! reconstructed valuations strongly extend their point sets.

mod common;

use std::collections::HashSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use warpcheck::constraints::{
    build_psi, check_diagram, diagram_from_valuation, eval_tau, Prediagram,
};
use warpcheck::extnat::{ExtNat, Fin, Omega};
use warpcheck::generate::{random_basic_term, random_extnat, random_warp, GenLimits};
use warpcheck::interp::{eval_basic, Valuation};
use warpcheck::saturate::{saturate, Interner, SampleId, SampleNode, SampleSet, TermNode};
use warpcheck::solve::{encode, eval_sigma, translate, Model};
use warpcheck::term::BasicTerm;

fn saturate_goal(
    goal: &[BasicTerm],
) -> (Interner, SampleSet, SampleId, Vec<SampleId>) {
    let mut interner = Interner::new();
    let kappa = interner.kappa();
    let roots: Vec<SampleId> = goal
        .iter()
        .map(|t| {
            let id = interner.intern_basic(t);
            interner.app(id, kappa)
        })
        .collect();
    let delta = saturate(&mut interner, &roots, 1_000_000).unwrap();
    (interner, delta, kappa, roots)
}

fn random_goal(rng: &mut ChaCha8Rng, limits: &GenLimits) -> Vec<BasicTerm> {
    let n = rng.gen_range(1..=2);
    (0..n)
        .map(|_| {
            let depth = rng.gen_range(1..=2);
            random_basic_term(rng, limits, depth)
        })
        .collect()
}

fn random_valuation(rng: &mut ChaCha8Rng, goal: &[BasicTerm]) -> Valuation {
    let mut vars: Vec<String> = Vec::new();
    for t in goal {
        for v in t.free_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    vars.into_iter().map(|x| (x, random_warp(rng, &GenLimits::default()))).collect()
}

/// Appendix-B as a property: the recursive diagram of any valuation
/// passes every condition.
#[test]
fn valuation_diagrams_always_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(7001);
    let limits = GenLimits::default();
    for i in 0..300 {
        let goal = random_goal(&mut rng, &limits);
        let (mut interner, delta, _, _) = saturate_goal(&goal);
        let theta = random_valuation(&mut rng, &goal);
        let p = random_extnat(&mut rng, 6);
        let d = diagram_from_valuation(&interner, &delta, &theta, p);
        let violations = check_diagram(&mut interner, &delta, &d);
        assert!(
            violations.is_empty(),
            "iteration {i}: valuation diagram violates {violations:?} for goal {goal:?} at p={p}"
        );
    }
}

/// The ψ ⟺ (diagram ∧ fail) equivalence on random prediagrams, plus the
/// ℕ-encoding round trip: evaluating ψ over ω∪{ω} agrees with evaluating
/// the translated formula over ℕ through ι.
#[test]
fn psi_direct_check_and_encoding_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7002);
    let limits = GenLimits::default();
    let mut sat_count = 0;
    for i in 0..300 {
        let goal = random_goal(&mut rng, &limits);
        let (mut interner, delta, kappa, roots) = saturate_goal(&goal);
        let psi = build_psi(&mut interner, &delta, kappa, &roots).unwrap();

        // Half arbitrary prediagrams, half real diagrams (so the
        // positive side of the equivalence gets exercised too).
        let d: Prediagram = if i % 2 == 0 {
            let mut d = Prediagram::new();
            for s in delta.iter() {
                d.set(s, random_extnat(&mut rng, 5));
            }
            d
        } else {
            let theta = random_valuation(&mut rng, &goal);
            let p = random_extnat(&mut rng, 5);
            diagram_from_valuation(&interner, &delta, &theta, p)
        };

        let holds = psi.eval(&d);
        let is_diagram = check_diagram(&mut interner, &delta, &d).is_empty();
        let fails_goal = roots.iter().all(|&g| d.get(g) < d.get(kappa));
        assert_eq!(
            holds,
            is_diagram && fails_goal,
            "iteration {i}: ψ disagrees with the direct check for {goal:?}"
        );
        if holds {
            sat_count += 1;
        }

        // Lemma-21 coherence through ι⁻¹.
        let w: Model = encode(&d, delta.iter());
        let sigma = translate(&psi);
        let direct = sigma.iter().all(|f| eval_sigma(f, &w));
        assert_eq!(holds, direct, "iteration {i}: ℕ-encoding disagrees for {goal:?}");
    }
    assert!(sat_count > 0, "the positive side of the equivalence was never exercised");
}

/// Appendix-C as a property: for diagram-derived valuations, every
/// subterm's interpretation strongly extends its point set.
#[test]
fn interpretations_strongly_extend_their_point_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7003);
    let limits = GenLimits::default();
    for i in 0..300 {
        let goal = random_goal(&mut rng, &limits);
        let (interner, delta, _, _) = saturate_goal(&goal);
        let theta = random_valuation(&mut rng, &goal);
        let p = random_extnat(&mut rng, 5);
        let d = diagram_from_valuation(&interner, &delta, &theta, p);

        // Collect every head term occurring in Δ.
        let mut heads: HashSet<warpcheck::saturate::TermId> = HashSet::new();
        for s in delta.iter() {
            if let SampleNode::App(t, _) = interner.sample_node(s) {
                heads.insert(t);
            }
        }
        for t in heads {
            let term = interner.basic_term(t);
            let f = eval_basic(&term, &theta);
            let mut last_marked_omega = false;
            let mut nonempty = false;
            for s in delta.iter() {
                if let SampleNode::App(t2, a) = interner.sample_node(s) {
                    if t2 == t {
                        nonempty = true;
                        assert_eq!(
                            f.eval(d.get(a)),
                            d.get(s),
                            "iteration {i}: ⟦{term}⟧ misses point ({}, {}) for goal {goal:?}",
                            d.get(a),
                            d.get(s),
                        );
                        if interner.sample_node(a) == SampleNode::Last(t) && d.get(a).is_omega() {
                            last_marked_omega = true;
                        }
                    }
                }
            }
            if nonempty && last_marked_omega {
                assert_eq!(f.last(), Omega, "iteration {i}: strong extension violated for {term}");
            }
        }
    }
}

/// The extracted valuation of a diagram satisfies ⟦t⟧θ(δ(α)) = δ(t[α])
/// for every application sample (the reconstruction theorem, executed).
#[test]
fn extraction_reproduces_every_sample_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(7004);
    let limits = GenLimits::default();
    for i in 0..200 {
        let goal = random_goal(&mut rng, &limits);
        let (mut interner, delta, _, _) = saturate_goal(&goal);
        let theta_in = random_valuation(&mut rng, &goal);
        let p = random_extnat(&mut rng, 5);
        let d = diagram_from_valuation(&interner, &delta, &theta_in, p);
        assert!(check_diagram(&mut interner, &delta, &d).is_empty());

        let theta = warpcheck::extract::valuation_from_diagram(&interner, &delta, &d).unwrap();
        for s in delta.iter() {
            if let SampleNode::App(t, a) = interner.sample_node(s) {
                let term = interner.basic_term(t);
                let f = eval_basic(&term, &theta);
                assert_eq!(
                    f.eval(d.get(a)),
                    d.get(s),
                    "iteration {i}: reconstruction misses {} at {}",
                    interner.print_sample(s),
                    d.get(a),
                );
            }
        }
    }
}

/// Interpreting `last(t)` samples: the recursive diagram assigns exactly
/// `last(⟦t⟧θ)`, including the ω case on variable-free terms.
#[test]
fn last_samples_follow_the_interpretation() {
    let (interner, delta, _, _) = saturate_goal(&[BasicTerm::ur(BasicTerm::var("x"))]);
    let theta: Valuation = [("x".to_owned(), warpcheck::warp::Warp::step(2, Fin(5)))].into();
    let d = diagram_from_valuation(&interner, &delta, &theta, Fin(3));
    for s in delta.iter() {
        if let SampleNode::Last(t) = interner.sample_node(s) {
            let f = eval_basic(&interner.basic_term(t), &theta);
            assert_eq!(d.get(s), f.last());
        }
    }
    let _ = ExtNat::Fin(0);
    let _: Option<TermNode> = None;
}
