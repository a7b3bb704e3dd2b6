//! The eight time-warp algebra operations.
//!
//! Every binary operation works the same way: derive the result's tail by
//! case analysis on the operands' tails, derive a horizon `H` past which the
//! result provably follows that tail, compute the exact result values on
//! `[0, H]` with closed-form per-point formulas, and canonicalize. Sups and
//! infs over infinite sets are resolved by the symbolic inversions
//! [`Warp::first_above`] / [`Warp::min_geq`]; nothing scans unboundedly.

use super::{Tail, Warp};
use crate::extnat::{ExtNat, Fin, Omega, ZERO};

impl Warp {
    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Warp) -> Warp {
        let f = self;
        let g = other;
        let tail = match (f.tail, g.tail) {
            (Tail::Ramp, Tail::Ramp) => Tail::Ramp,
            _ => Tail::Const(f.eval(g.eval(Omega))),
        };
        let h = horizon(f, g);
        let profile: Vec<ExtNat> = (0..=h).map(|n| f.eval(g.eval(Fin(n)))).collect();
        build(profile, tail)
    }

    /// Pointwise minimum.
    pub fn meet(&self, other: &Warp) -> Warp {
        let tail = match (self.tail, other.tail) {
            (Tail::Const(a), Tail::Const(b)) => Tail::Const(a.min(b)),
            (Tail::Ramp, Tail::Ramp) => Tail::Ramp,
            (Tail::Const(v), Tail::Ramp) | (Tail::Ramp, Tail::Const(v)) => {
                if v.is_omega() {
                    Tail::Ramp
                } else {
                    Tail::Const(v)
                }
            }
        };
        let h = horizon(self, other);
        let profile: Vec<ExtNat> =
            (0..=h).map(|n| self.eval(Fin(n)).min(other.eval(Fin(n)))).collect();
        build(profile, tail)
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &Warp) -> Warp {
        let tail = match (self.tail, other.tail) {
            (Tail::Const(a), Tail::Const(b)) => Tail::Const(a.max(b)),
            (Tail::Ramp, Tail::Ramp) => Tail::Ramp,
            (Tail::Const(v), Tail::Ramp) | (Tail::Ramp, Tail::Const(v)) => {
                if v.is_omega() {
                    Tail::Const(Omega)
                } else {
                    Tail::Ramp
                }
            }
        };
        let h = horizon(self, other);
        let profile: Vec<ExtNat> =
            (0..=h).map(|n| self.eval(Fin(n)).max(other.eval(Fin(n)))).collect();
        build(profile, tail)
    }

    /// Left residual `self \ other`: the largest `x` with `self ∘ x ≤ other`.
    ///
    /// Pointwise, `(f\g)(n) = ⋁ { q | f(q) ≤ g(n) }` for finite `n ≥ 1`.
    pub fn lres(&self, other: &Warp) -> Warp {
        let f = self;
        let g = other;
        let tail = match g.tail {
            Tail::Const(vg) => Tail::Const(f.sup_leq(vg)),
            Tail::Ramp => match f.tail {
                Tail::Ramp => Tail::Ramp,
                Tail::Const(vf) => {
                    if let Some(q) = f.first_omega_point() {
                        // f pins ω from q on; everything below q eventually
                        // fits under the unbounded g.
                        Tail::Const(Fin(q - 1))
                    } else {
                        debug_assert!(!vf.is_omega());
                        // f is bounded, so all of ω∪{ω} eventually fits.
                        Tail::Const(Omega)
                    }
                }
            },
        };
        let h = horizon(f, g);
        let mut profile = vec![ZERO];
        profile.extend((1..=h).map(|n| f.sup_leq(g.eval(Fin(n)))));
        build(profile, tail)
    }

    /// Right residual `self / other`: the largest `x` with `x ∘ other ≤ self`.
    ///
    /// Pointwise, `(g/f)(p) = ⋀ g[{ q | p ≤ f(q) }]`, where the inf of the
    /// empty set is `ω`. The constrained set is upward closed, so the inf is
    /// `g` at its least element.
    pub fn rres(&self, other: &Warp) -> Warp {
        let g = self;
        let f = other;
        let tail = match f.tail {
            Tail::Const(vf) => {
                if let Some(q) = f.first_omega_point() {
                    Tail::Const(g.eval(Fin(q)))
                } else {
                    debug_assert!(!vf.is_omega());
                    Tail::Const(Omega)
                }
            }
            Tail::Ramp => match g.tail {
                Tail::Const(vg) => Tail::Const(vg),
                Tail::Ramp => Tail::Ramp,
            },
        };
        let h = horizon(f, g);
        let profile: Vec<ExtNat> = (0..=h)
            .map(|p| match f.min_geq(Fin(p)) {
                Some(q0) => g.eval(q0),
                None => Omega,
            })
            .collect();
        build(profile, tail)
    }

    /// `f^o = ⊤ \ f`: collapses each value to `0` (finite) or `ω`.
    pub fn op_o(&self) -> Warp {
        Warp::top().lres(self)
    }

    /// `f^r = f \ id`.
    pub fn op_r(&self) -> Warp {
        self.lres(&Warp::id())
    }

    /// `f^ℓ = id / f`.
    pub fn op_l(&self) -> Warp {
        Warp::id().rres(self)
    }
}

/// Horizon past which the result of a binary operation provably follows its
/// derived tail: generous sum of both operands' breakpoint extents and
/// finite values.
fn horizon(f: &Warp, g: &Warp) -> u64 {
    let h = f.magnitude() as u128 + g.magnitude() as u128 + 4;
    u64::try_from(h).expect("horizon overflow")
}

fn build(profile: Vec<ExtNat>, tail: Tail) -> Warp {
    // The horizon is a proof obligation: by H the result must already
    // behave like its tail.
    if cfg!(debug_assertions) {
        let h = profile.len() - 1;
        match tail {
            Tail::Const(v) => debug_assert_eq!(
                profile[h], v,
                "tail kick-in after horizon (const {v}, profile end {})",
                profile[h]
            ),
            Tail::Ramp => debug_assert_eq!(
                profile[h],
                profile[h - 1].add(1),
                "tail kick-in after horizon (ramp)"
            ),
        }
    }
    Warp::from_profile(&profile, tail)
}
