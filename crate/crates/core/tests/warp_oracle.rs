//! Oracle checks for the warp calculator: every operation is compared
//! pointwise against a brute-force scan of its defining set, and the
//! residual characterizations are exercised clause by clause.

mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warpcheck::extnat::{ExtNat, Fin, Omega};
use warpcheck::warp::{Tail, Warp};

#[test]
fn binary_operations_match_pointwise_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..400 {
        let f = random_warp(&mut rng);
        let g = random_warp(&mut rng);
        let h = mag(&f) + mag(&g) + 12;
        assert_pointwise(&f.compose(&g), |p| f.eval(g.eval(p)), h, "compose");
        assert_pointwise(&f.meet(&g), |p| f.eval(p).min(g.eval(p)), h, "meet");
        assert_pointwise(&f.join(&g), |p| f.eval(p).max(g.eval(p)), h, "join");
        assert_pointwise(&f.lres(&g), |p| oracle_lres(&f, &g, p), h, "lres");
        assert_pointwise(&f.rres(&g), |p| oracle_rres(&f, &g, p), h, "rres");
    }
}

#[test]
fn unary_operations_match_residual_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let (id, top) = (Warp::id(), Warp::top());
    for _ in 0..400 {
        let f = random_warp(&mut rng);
        let h = mag(&f) + 12;
        assert_pointwise(&f.op_r(), |p| oracle_lres(&f, &id, p), h, "op_r");
        assert_pointwise(&f.op_o(), |p| oracle_lres(&top, &f, p), h, "op_o");
        assert_pointwise(&f.op_l(), |p| oracle_rres(&id, &f, p), h, "op_l");
    }
}

#[test]
fn canonical_equality_matches_pointwise_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..600 {
        let f = random_warp(&mut rng);
        let g = random_warp(&mut rng);
        let h = mag(&f) + mag(&g) + 8;
        let pointwise_eq = scan_leq(&f, &g, h) && scan_leq(&g, &f, h);
        assert_eq!(f == g, pointwise_eq, "representation equality disagrees for {f} vs {g}");
        assert_eq!(f.leq(&g), scan_leq(&f, &g, h), "leq disagrees for {f} vs {g}");
    }
}

#[test]
fn residuation_adjunctions_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..500 {
        let f = random_warp(&mut rng);
        let g = random_warp(&mut rng);
        let h = random_warp(&mut rng);
        let bound = 2 * (mag(&f).max(mag(&g)).max(mag(&h)) + 1) + 8;
        let lhs = scan_leq(&f.compose(&g), &h, bound);
        let via_lres = scan_leq(&g, &f.lres(&h), bound);
        let via_rres = scan_leq(&f, &h.rres(&g), bound);
        assert_eq!(lhs, via_lres, "fg ≤ h vs g ≤ f\\h for f={f}, g={g}, h={h}");
        assert_eq!(lhs, via_rres, "fg ≤ h vs f ≤ h/g for f={f}, g={g}, h={h}");
    }
}

#[test]
fn eval_at_omega_is_the_supremum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let f = random_warp(&mut rng);
        let h = mag(&f) + 4;
        if let Fin(last) = f.last() {
            assert!(last <= h);
            let sup = (0..=h).map(|n| f.eval(Fin(n))).max().unwrap();
            assert_eq!(f.eval(Omega), sup, "f(ω) must be the sup for {f}");
            // last(f) really is the least stabilization point.
            assert_eq!(f.eval(Fin(last)), f.eval(Omega));
            if last > 0 {
                assert!(f.eval(Fin(last - 1)) < f.eval(Omega));
            }
        } else {
            // Never stabilizes: strictly increasing infinitely often.
            assert!(f.eval(Fin(h)) < f.eval(Fin(h + mag(&f) + 2)));
        }
    }
}

/// The four clauses of the `f^o` characterization.
fn check_op_o_clauses(f: &Warp, horizon: u64) {
    let g = f.op_o();
    for n in 1..=horizon {
        let v = g.eval(Fin(n));
        assert!(v.is_zero() || v.is_omega(), "f^o only takes values 0 and ω");
        assert_eq!(v.is_zero(), !f.eval(Fin(n)).is_omega(), "clause 1 at {n} for {f}");
        assert_eq!(v.is_omega(), f.eval(Fin(n)).is_omega(), "clause 2 at {n} for {f}");
    }
    assert_eq!(g.eval(Omega).is_zero(), !attains_omega(f), "clause 3 for {f}");
    assert_eq!(g.eval(Omega).is_omega(), attains_omega(f), "clause 4 for {f}");
}

/// The four clauses of the `f^r` characterization.
fn check_op_r_clauses(f: &Warp, horizon: u64) {
    let g = f.op_r();
    let scan = 2 * (mag(f) + horizon) + 8;
    for n in 1..=horizon {
        match g.eval(Fin(n)) {
            Fin(m) => {
                assert!(
                    f.eval(Fin(m)) <= Fin(n) && Fin(n) < f.eval(Fin(m + 1)),
                    "f^r({n}) = {m} must bracket n for {f}"
                );
            }
            Omega => assert!(f.eval(Omega) <= Fin(n), "f^r({n}) = ω needs f(ω) ≤ n for {f}"),
        }
        // Converse of the finite clause.
        for m in 0..=scan {
            if f.eval(Fin(m)) <= Fin(n) && Fin(n) < f.eval(Fin(m + 1)) {
                assert_eq!(g.eval(Fin(n)), Fin(m));
            }
        }
    }
    match g.eval(Omega) {
        Fin(m) => {
            assert!(f.eval(Fin(m + 1)).is_omega(), "f^r(ω) = {m} needs f(m+1) = ω for {f}");
            assert!(
                (1..=scan).any(|k| g.eval(Fin(k)) == Fin(m)),
                "f^r(ω) = {m} must be attained at some finite point for {f}"
            );
        }
        Omega => {
            let fw = f.eval(Omega);
            assert!(
                !fw.is_omega() || !attains_omega(f),
                "f^r(ω) = ω needs f(ω) < ω or f finite everywhere, for {f}"
            );
        }
    }
}

/// The four clauses of the `f^ℓ` characterization.
fn check_op_l_clauses(f: &Warp, horizon: u64) {
    let g = f.op_l();
    let scan = 2 * (mag(f) + horizon) + 8;
    for n in 1..=horizon {
        match g.eval(Fin(n)) {
            Fin(m) => {
                assert!(m >= 1, "f^ℓ(n) ≥ 1 for n ≥ 1");
                assert!(
                    f.eval(Fin(m - 1)) < Fin(n) && Fin(n) <= f.eval(Fin(m)),
                    "f^ℓ({n}) = {m} must bracket n for {f}"
                );
            }
            Omega => assert!(f.eval(Omega) < Fin(n), "f^ℓ({n}) = ω needs f(ω) < n for {f}"),
        }
        for m in 1..=scan {
            if f.eval(Fin(m - 1)) < Fin(n) && Fin(n) <= f.eval(Fin(m)) {
                assert_eq!(g.eval(Fin(n)), Fin(m));
            }
        }
    }
    match g.eval(Omega) {
        Fin(m) => {
            assert!(f.eval(Fin(m)).is_omega(), "f^ℓ(ω) = {m} needs f(m) = ω for {f}");
            assert!(
                (1..=scan).any(|k| g.eval(Fin(k)) == Fin(m)),
                "f^ℓ(ω) = {m} must be attained at some finite point for {f}"
            );
        }
        Omega => {
            let fw = f.eval(Omega);
            assert!(
                !fw.is_omega() || !attains_omega(f),
                "f^ℓ(ω) = ω needs f(ω) < ω or f finite everywhere, for {f}"
            );
        }
    }
}

#[test]
fn unary_characterization_clauses() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..300 {
        let f = random_warp(&mut rng);
        check_op_o_clauses(&f, 12);
        check_op_r_clauses(&f, 12);
        check_op_l_clauses(&f, 12);
    }
}

#[test]
fn last_properties_lemma() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAB);
    for _ in 0..400 {
        let f = random_warp(&mut rng);
        let g = random_warp(&mut rng);
        let both_omega = f.last().is_omega() && g.last().is_omega();
        assert_eq!(f.compose(&g).last().is_omega(), both_omega, "last(fg) for {f}, {g}");
        assert_eq!(f.last().is_omega(), f.op_r().last().is_omega(), "last(f^r) for {f}");
        assert_eq!(f.last().is_omega(), f.op_l().last().is_omega(), "last(f^ℓ) for {f}");
        // last(f) = (f^ℓ f)(ω)
        assert_eq!(f.last(), f.op_l().compose(&f).eval(Omega), "last via term for {f}");
    }
}

#[test]
fn distributivity_lemma_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD15);
    for _ in 0..300 {
        let f = random_warp(&mut rng);
        let g = random_warp(&mut rng);
        let h = random_warp(&mut rng);
        let cases: [(Warp, Warp, &str); 8] = [
            (f.lres(&g.meet(&h)), f.lres(&g).meet(&f.lres(&h)), "f\\(g∧h)"),
            (g.meet(&h).lres(&f), g.lres(&f).join(&h.lres(&f)), "(g∧h)\\f"),
            (f.lres(&g.join(&h)), f.lres(&g).join(&f.lres(&h)), "f\\(g∨h)"),
            (g.join(&h).lres(&f), g.lres(&f).meet(&h.lres(&f)), "(g∨h)\\f"),
            (g.meet(&h).rres(&f), g.rres(&f).meet(&h.rres(&f)), "(g∧h)/f"),
            (f.rres(&g.meet(&h)), f.rres(&g).join(&f.rres(&h)), "f/(g∧h)"),
            (g.join(&h).rres(&f), g.rres(&f).join(&h.rres(&f)), "(g∨h)/f"),
            (f.rres(&g.join(&h)), f.rres(&g).meet(&f.rres(&h)), "f/(g∨h)"),
        ];
        for (lhs, rhs, name) in cases {
            assert_eq!(lhs, rhs, "{name} fails for f={f}, g={g}, h={h}");
        }
    }
}

#[test]
fn reduction_to_unary_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4A);
    let top = Warp::top();
    for _ in 0..300 {
        let f = random_warp(&mut rng);
        let g = random_warp(&mut rng);
        // f\g = f^r g ∨ (⊤f)^r ∨ g^o
        let lhs = f.lres(&g);
        let rhs = f.op_r().compose(&g).join(&top.compose(&f).op_r()).join(&g.op_o());
        assert_eq!(lhs, rhs, "left-residual reduction for f={f}, g={g}");
        // g/f = g f^ℓ ∨ (f^ℓ)^o
        let lhs = g.rres(&f);
        let rhs = g.compose(&f.op_l()).join(&f.op_l().op_o());
        assert_eq!(lhs, rhs, "right-residual reduction for f={f}, g={g}");
    }
}

#[test]
fn top_is_left_residual_of_bot() {
    assert_eq!(Warp::id().rres(&Warp::bot()), Warp::top());
}

#[test]
fn lemma_examples_from_the_unary_table() {
    // f one slope-0 segment (1 ↦ 3): sup at ω stabilizes through the tail.
    let f = Warp::step(1, Fin(3));
    assert_eq!(f.eval(Omega), Fin(3));
    assert_eq!(oracle_lres(&Warp::bot(), &f, Fin(2)), Omega);
    assert_eq!(oracle_rres(&Warp::id(), &Warp::top(), Fin(4)), Fin(1));
    assert_eq!(ExtNat::from(1), Warp::top().last());
}
