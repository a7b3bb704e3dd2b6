//! Interpretation of terms as time warps under a valuation.

use std::collections::BTreeMap;

use crate::term::{BasicTerm, Term};
use crate::warp::Warp;

/// A valuation of term variables. Variables missing from the map read as
/// the identity warp, matching the convention for unconstrained variables
/// in extracted counterexamples.
pub type Valuation = BTreeMap<String, Warp>;

fn lookup(theta: &Valuation, x: &str) -> Warp {
    theta.get(x).cloned().unwrap_or_else(Warp::id)
}

/// `⟦t⟧θ` for full terms, computed entirely by the warp calculator.
pub fn eval_term(t: &Term, theta: &Valuation) -> Warp {
    match t {
        Term::Var(x) => lookup(theta, x),
        Term::Id => Warp::id(),
        Term::Bot => Warp::bot(),
        Term::Top => Warp::top(),
        Term::Meet(l, r) => eval_term(l, theta).meet(&eval_term(r, theta)),
        Term::Join(l, r) => eval_term(l, theta).join(&eval_term(r, theta)),
        Term::Comp(l, r) => eval_term(l, theta).compose(&eval_term(r, theta)),
        Term::LRes(l, r) => eval_term(l, theta).lres(&eval_term(r, theta)),
        Term::RRes(l, r) => eval_term(l, theta).rres(&eval_term(r, theta)),
    }
}

/// `⟦t⟧θ` for basic terms.
pub fn eval_basic(t: &BasicTerm, theta: &Valuation) -> Warp {
    match t {
        BasicTerm::Var(x) => lookup(theta, x),
        BasicTerm::Id => Warp::id(),
        BasicTerm::Bot => Warp::bot(),
        BasicTerm::Comp(l, r) => eval_basic(l, theta).compose(&eval_basic(r, theta)),
        BasicTerm::Uo(s) => eval_basic(s, theta).op_o(),
        BasicTerm::Ul(s) => eval_basic(s, theta).op_l(),
        BasicTerm::Ur(s) => eval_basic(s, theta).op_r(),
    }
}
