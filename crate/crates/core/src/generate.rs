//! Seeded random generators for warps, terms, and queries, shared by the
//! fuzzing harness and the test suites.

use rand::Rng;

use crate::extnat::{ExtNat, Omega, ZERO};
use crate::term::{BasicTerm, Query, Term};
use crate::warp::{Segment, Slope, Tail, Warp};

/// Size limits for random generation.
#[derive(Clone, Copy, Debug)]
pub struct GenLimits {
    /// Maximum number of distinct variables (drawn from x, y, z, …).
    pub vars: usize,
    /// Maximum term depth.
    pub depth: u32,
    /// Maximum number of warp breakpoints.
    pub warp_segments: usize,
    /// Cap on breakpoint gaps and value increments.
    pub warp_step: u64,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits { vars: 2, depth: 3, warp_segments: 3, warp_step: 4 }
    }
}

const VAR_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

/// A random warp with small breakpoints and values.
pub fn random_warp(rng: &mut impl Rng, limits: &GenLimits) -> Warp {
    match rng.gen_range(0..10) {
        0 => return Warp::id(),
        1 => return Warp::bot(),
        2 => return Warp::top(),
        _ => {}
    }
    let nsegs = rng.gen_range(0..=limits.warp_segments);
    let mut at = 0u64;
    let mut val = ZERO;
    let mut segs = Vec::new();
    for _ in 0..nsegs {
        at += rng.gen_range(1..=limits.warp_step);
        val = if val.is_omega() || rng.gen_ratio(1, 8) {
            Omega
        } else {
            val.add(rng.gen_range(0..=limits.warp_step))
        };
        let slope = if rng.gen_bool(0.5) { Slope::Ramp } else { Slope::Step };
        segs.push(Segment { at, value: val, slope });
    }
    let tail = if val.is_omega() || rng.gen_bool(0.5) {
        let v = if val.is_omega() || rng.gen_ratio(1, 8) {
            Omega
        } else {
            val.add(rng.gen_range(0..=limits.warp_step))
        };
        Tail::Const(v)
    } else {
        Tail::Ramp
    };
    Warp::from_segments(&segs, tail).expect("generated breakpoints are monotone")
}

fn random_var(rng: &mut impl Rng, limits: &GenLimits) -> String {
    VAR_NAMES[rng.gen_range(0..limits.vars.min(VAR_NAMES.len()))].to_owned()
}

/// A random full term of bounded depth.
pub fn random_term(rng: &mut impl Rng, limits: &GenLimits, depth: u32) -> Term {
    if depth == 0 {
        return match rng.gen_range(0..6) {
            0 => Term::Id,
            1 => Term::Bot,
            2 => Term::Top,
            _ => Term::Var(random_var(rng, limits)),
        };
    }
    match rng.gen_range(0..8) {
        0 => Term::meet(
            random_term(rng, limits, depth - 1),
            random_term(rng, limits, depth - 1),
        ),
        1 => Term::join(
            random_term(rng, limits, depth - 1),
            random_term(rng, limits, depth - 1),
        ),
        2 | 3 => Term::comp(
            random_term(rng, limits, depth - 1),
            random_term(rng, limits, depth - 1),
        ),
        4 => Term::lres(
            random_term(rng, limits, depth - 1),
            random_term(rng, limits, depth - 1),
        ),
        5 => Term::rres(
            random_term(rng, limits, depth - 1),
            random_term(rng, limits, depth - 1),
        ),
        6 => match rng.gen_range(0..3) {
            0 => Term::uo(random_term(rng, limits, depth - 1)),
            1 => Term::ul(random_term(rng, limits, depth - 1)),
            _ => Term::ur(random_term(rng, limits, depth - 1)),
        },
        _ => random_term(rng, limits, 0),
    }
}

/// A random basic term of bounded depth.
pub fn random_basic_term(rng: &mut impl Rng, limits: &GenLimits, depth: u32) -> BasicTerm {
    if depth == 0 {
        return match rng.gen_range(0..6) {
            0 => BasicTerm::Id,
            1 => BasicTerm::Bot,
            _ => BasicTerm::Var(random_var(rng, limits)),
        };
    }
    match rng.gen_range(0..6) {
        0 | 1 => BasicTerm::comp(
            random_basic_term(rng, limits, depth - 1),
            random_basic_term(rng, limits, depth - 1),
        ),
        2 => BasicTerm::uo(random_basic_term(rng, limits, depth - 1)),
        3 => BasicTerm::ul(random_basic_term(rng, limits, depth - 1)),
        4 => BasicTerm::ur(random_basic_term(rng, limits, depth - 1)),
        _ => random_basic_term(rng, limits, 0),
    }
}

/// A random query: an equation, an inequation, or a goal-shaped `id ≤ t`.
pub fn random_query(rng: &mut impl Rng, limits: &GenLimits) -> Query {
    let depth = rng.gen_range(1..=limits.depth);
    match rng.gen_range(0..4) {
        0 => Query::Equation(
            random_term(rng, limits, depth.saturating_sub(1)),
            random_term(rng, limits, depth.saturating_sub(1)),
        ),
        1 => Query::Inequation(random_term(rng, limits, depth), random_term(rng, limits, depth)),
        _ => Query::Inequation(Term::Id, random_term(rng, limits, depth)),
    }
}

/// A random prediagram value: small naturals plus `ω`.
pub fn random_extnat(rng: &mut impl Rng, max: u64) -> ExtNat {
    if rng.gen_ratio(1, 4) {
        Omega
    } else {
        ExtNat::Fin(rng.gen_range(0..=max))
    }
}
