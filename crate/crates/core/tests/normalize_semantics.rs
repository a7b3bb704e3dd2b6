//! Semantic preservation of normalization, checked by evaluating random
//! terms and their normal forms under random valuations with the warp
//! calculator. Canonical-form equality of warps is exact pointwise
//! equality, so a plain `==` suffices.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warpcheck::generate::{random_term, random_warp, GenLimits};
use warpcheck::interp::{eval_term, Valuation};
use warpcheck::normalize::{elim_residuals, normal_form, unit_goals, DEFAULT_NODE_BUDGET};
use warpcheck::term::BasicTerm;

fn limits() -> GenLimits {
    GenLimits { vars: 3, depth: 4, ..GenLimits::default() }
}

fn random_valuation(rng: &mut ChaCha8Rng, vars: &[String]) -> Valuation {
    vars.iter().map(|x| (x.clone(), random_warp(rng, &limits()))).collect()
}

#[test]
fn residual_elimination_preserves_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..250 {
        let t = random_term(&mut rng, &limits(), 4);
        let e = elim_residuals(&t);
        let vars = t.free_vars();
        for _ in 0..2 {
            let theta = random_valuation(&mut rng, &vars);
            assert_eq!(
                eval_term(&t, &theta),
                eval_term(&e, &theta),
                "elim_residuals changed {t} (became {e})"
            );
        }
    }
}

#[test]
fn normal_form_preserves_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut checked = 0;
    for _ in 0..250 {
        let t = random_term(&mut rng, &limits(), 4);
        let nf = match normal_form(&t, DEFAULT_NODE_BUDGET) {
            Ok(nf) => nf,
            Err(_) => continue, // node budget: rare at this depth
        };
        let back = nf.to_term();
        let vars = t.free_vars();
        for _ in 0..2 {
            let theta = random_valuation(&mut rng, &vars);
            assert_eq!(
                eval_term(&t, &theta),
                eval_term(&back, &theta),
                "normalization changed {t} (became {back})"
            );
        }
        checked += 1;
    }
    assert!(checked > 200, "too many budget aborts: only {checked} terms checked");
}

#[test]
fn normal_form_shape_is_meet_of_joins_of_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..300 {
        let t = random_term(&mut rng, &limits(), 4);
        let Ok(nf) = normal_form(&t, DEFAULT_NODE_BUDGET) else { continue };
        assert!(!nf.conjuncts.is_empty());
        for join in &nf.conjuncts {
            assert!(!join.is_empty(), "empty join in normal form of {t}");
            // sorted and duplicate-free
            assert!(join.windows(2).all(|w| w[0] < w[1]), "join not canonical for {t}");
        }
    }
}

#[test]
fn goals_inherit_the_conjunct_semantics() {
    // Every unit goal is one conjunct; the term is ≥ id iff all goals hold.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..150 {
        let t = random_term(&mut rng, &limits(), 3);
        let Ok(goals) = unit_goals(&t, DEFAULT_NODE_BUDGET) else { continue };
        for goal in &goals {
            assert!(!goal.is_empty());
            // dropped goals would contain id or ⊤ as a disjunct
            assert!(!goal.iter().any(|d| *d == BasicTerm::Id));
        }
    }
}
