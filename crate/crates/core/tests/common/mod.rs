//! Shared test support: brute-force oracles that compute sups and infs by
//! scanning their defining sets up to a provably sufficient bound, plus
//! seeded random generators. Everything here works through `eval` only and
//! is independent of the symbolic implementation paths it is used to check.

#![allow(dead_code)]

use rand::prelude::*;
use warpcheck::extnat::{ExtNat, Fin, Omega, ZERO};
use warpcheck::warp::{Tail, Warp};

/// Breakpoint extent plus largest finite value: past this the warp follows
/// its tail.
pub fn mag(w: &Warp) -> u64 {
    let mut m = w.segments().last().map(|s| s.at).unwrap_or(0);
    for s in w.segments() {
        if let Fin(v) = s.value {
            m = m.max(v);
        }
    }
    if let Tail::Const(Fin(v)) = w.tail() {
        m = m.max(v);
    }
    m
}

/// `f ≤ g` checked by scanning `[0, h] ∪ {ω}`.
pub fn scan_leq(f: &Warp, g: &Warp, h: u64) -> bool {
    (0..=h).all(|n| f.eval(Fin(n)) <= g.eval(Fin(n))) && f.eval(Omega) <= g.eval(Omega)
}

/// Does `f` reach `ω` at some finite point? (Decidable: attainment happens
/// within the breakpoint extent or right after it.)
pub fn attains_omega(f: &Warp) -> bool {
    f.eval(Fin(mag(f) + 2)).is_omega()
}

/// `⋁ { q ∈ ω∪{ω} | f(q) ≤ w }` by scan. The scan range covers `w` itself:
/// the last qualifying point of a ramping `f` sits near `w`.
pub fn oracle_sup_leq(f: &Warp, w: ExtNat) -> ExtNat {
    if f.eval(Omega) <= w {
        return Omega;
    }
    let bound = 2 * mag(f) + w.fin().unwrap_or(0) + 8;
    let mut best = ZERO;
    for q in 0..=bound {
        if f.eval(Fin(q)) <= w {
            best = Fin(q);
        }
    }
    best
}

/// Lemma-1(a) oracle for `(f \ g)(p)`.
pub fn oracle_lres(f: &Warp, g: &Warp, p: ExtNat) -> ExtNat {
    match p {
        Fin(0) => ZERO,
        Fin(n) => oracle_sup_leq(f, g.eval(Fin(n))),
        Omega => {
            // ⋁ { q | ∃m ∈ ω. f(q) ≤ g(m) }
            let qbound = 2 * (mag(f) + mag(g)) + 8;
            let mbound = qbound + 2 * (mag(f) + mag(g)) + 8;
            let qualifies = |q: ExtNat| (0..=mbound).any(|m| f.eval(q) <= g.eval(Fin(m)));
            if qualifies(Omega) {
                return Omega;
            }
            // Both unbounded-but-finite: every natural qualifies, ω does not,
            // and the sup of all naturals is ω.
            if f.tail() == Tail::Ramp && g.tail() == Tail::Ramp {
                return Omega;
            }
            let mut best = ZERO;
            for q in 0..=qbound {
                if qualifies(Fin(q)) {
                    best = Fin(q);
                }
            }
            best
        }
    }
}

/// Lemma-1(b) oracle for `(g / f)(p)`.
pub fn oracle_rres(g: &Warp, f: &Warp, p: ExtNat) -> ExtNat {
    let extra = match p {
        Fin(n) => n,
        Omega => 0,
    };
    let bound = 2 * (mag(f) + mag(g)) + extra + 8;
    for q in 0..=bound {
        if f.eval(Fin(q)) >= p {
            return g.eval(Fin(q));
        }
    }
    if f.eval(Omega) >= p {
        g.eval(Omega)
    } else {
        Omega // inf of the empty set
    }
}

/// Compares an implementation result against a pointwise oracle on
/// `[0, h] ∪ {ω}`, with a readable failure report.
pub fn assert_pointwise(result: &Warp, oracle: impl Fn(ExtNat) -> ExtNat, h: u64, what: &str) {
    for n in (0..=h).map(Fin).chain([Omega]) {
        let got = result.eval(n);
        let want = oracle(n);
        assert_eq!(got, want, "{what} disagrees with oracle at {n}: got {got}, want {want}");
    }
}

/// A seeded random warp with small breakpoints and values.
pub fn random_warp(rng: &mut impl Rng) -> Warp {
    warpcheck::generate::random_warp(rng, &warpcheck::generate::GenLimits::default())
}
