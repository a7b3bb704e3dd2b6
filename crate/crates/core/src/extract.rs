//! Counterexample extraction: from a diagram to concrete time warps.
//!
//! Every variable's observed behaviour in a diagram is a finite point set
//! `{(δ(α), δ(x[α])) | x[α] ∈ Δ}`. A warp *strongly extends* such a set
//! when it passes through every point and, whenever the diagram marks
//! `last(x)` as ω, never stabilizes. The construction interpolates the
//! points (plus `(0,0)` and the ω anchor) with capped unit-slope segments;
//! the final [`verify`] step re-evaluates the goal terms with the warp
//! calculator, so no counterexample escapes unchecked.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::Prediagram;
use crate::extnat::{ExtNat, Fin, Omega, ZERO};
use crate::interp::{eval_basic, Valuation};
use crate::saturate::{Interner, SampleNode, SampleSet, TermNode};
use crate::term::BasicTerm;
use crate::warp::{Tail, Warp};

/// The observation points of one variable in a diagram.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub var: String,
    /// Pairs `(input, output)`, sorted by input, deduplicated.
    pub points: Vec<(ExtNat, ExtNat)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("diagram bug: point set for {var} is not a monotone partial map ({a:?} vs {b:?})")]
    NotMonotone { var: String, a: (ExtNat, ExtNat), b: (ExtNat, ExtNat) },
    #[error("diagram bug: {0}")]
    Inconsistent(String),
}

/// Collects `{(δ(α), δ(x[α])) | x[α] ∈ Δ}` for the variable `x`.
pub fn points_of(var: &str, d: &Prediagram, delta: &SampleSet, interner: &Interner) -> PointSet {
    let mut points: Vec<(ExtNat, ExtNat)> = Vec::new();
    for s in delta.iter() {
        if let SampleNode::App(t, a) = interner.sample_node(s) {
            if matches!(interner.term_node(t), TermNode::Var(x) if x == var) {
                points.push((d.get(a), d.get(s)));
            }
        }
    }
    points.sort();
    points.dedup();
    PointSet { var: var.to_owned(), points }
}

/// Builds a warp that strongly extends a non-empty point set.
///
/// `omega_value` is the diagram's value for `x[last(x)]`, which becomes
/// `f(ω)`. Interpolation between consecutive anchors `(i₁,j₁) < (i₂,j₂)`
/// is `f(i) = min(j₂, j₁ ⊕ (i − i₁))`.
pub fn build_warp(ps: &PointSet, omega_value: ExtNat) -> Result<Warp, ExtractError> {
    let mut finite: Vec<(u64, ExtNat)> = Vec::new();
    for &(i, j) in &ps.points {
        match i {
            Fin(0) => {
                if j != ZERO {
                    return Err(ExtractError::Inconsistent(format!(
                        "point (0, {j}) for {}",
                        ps.var
                    )));
                }
            }
            Fin(n) => finite.push((n, j)),
            Omega => {
                if j != omega_value {
                    return Err(ExtractError::Inconsistent(format!(
                        "point (ω, {j}) for {} disagrees with f(ω) = {omega_value}",
                        ps.var
                    )));
                }
            }
        }
    }
    // Functional and monotone (the diagram's monotonicity condition).
    for w in finite.windows(2) {
        let ((i1, j1), (i2, j2)) = (w[0], w[1]);
        if i1 == i2 && j1 != j2 || j1 > j2 {
            return Err(ExtractError::NotMonotone {
                var: ps.var.clone(),
                a: (Fin(i1), j1),
                b: (Fin(i2), j2),
            });
        }
    }
    if let Some(&(_, j_max)) = finite.last() {
        if j_max > omega_value {
            return Err(ExtractError::Inconsistent(format!(
                "finite value {j_max} above f(ω) = {omega_value} for {}",
                ps.var
            )));
        }
    }

    // Anchor list including the implicit origin.
    let mut anchors: Vec<(u64, ExtNat)> = vec![(0, ZERO)];
    anchors.extend(finite.iter().copied().filter(|&(i, _)| i > 0));
    let &(i_max, j_max) = anchors.last().expect("origin is always present");

    // Horizon: past the last finite anchor the interpolation toward
    // (ω, f(ω)) is min(f(ω), j_max ⊕ (i − i_max)), which settles by the
    // time it reaches f(ω).
    let h = match (omega_value, j_max) {
        (Fin(v), Fin(jm)) => i_max + (v - jm) + 1,
        _ => i_max + 1,
    };
    let value_at = |i: u64| -> ExtNat {
        let pos = anchors.partition_point(|&(at, _)| at <= i);
        let (i1, j1) = anchors[pos - 1];
        if i1 == i {
            return j1;
        }
        let j2 = anchors.get(pos).map(|&(_, j)| j).unwrap_or(omega_value);
        j2.min(j1.add(i - i1))
    };
    let profile: Vec<ExtNat> = (0..=h).map(value_at).collect();

    // f(ω) = ω with all finite values finite means the warp never
    // stabilizes (the strong-extension obligation); an ω pinned at a
    // finite point stabilizes there instead.
    let tail = if omega_value.is_omega() && !j_max.is_omega() {
        Tail::Ramp
    } else {
        Tail::Const(omega_value)
    };
    Ok(Warp::from_profile(&profile, tail))
}

/// Reconstructs a valuation from a diagram: interpolated warps for the
/// variables observed in Δ, the identity anywhere else.
pub fn valuation_from_diagram(
    interner: &Interner,
    delta: &SampleSet,
    d: &Prediagram,
) -> Result<Valuation, ExtractError> {
    let mut vars: Vec<String> = Vec::new();
    for s in delta.iter() {
        if let SampleNode::App(t, _) = interner.sample_node(s) {
            if let TermNode::Var(x) = interner.term_node(t) {
                if !vars.iter().any(|v| v == x) {
                    vars.push(x.clone());
                }
            }
        }
    }
    let mut theta = Valuation::new();
    for var in vars {
        let ps = points_of(&var, d, delta, interner);
        if ps.points.is_empty() {
            continue; // any warp extends the empty set; the default id is fine
        }
        // δ(x[last(x)]) exists by saturation and is f(ω).
        let omega_value = delta
            .iter()
            .find_map(|s| match interner.sample_node(s) {
                SampleNode::App(t, a) => match (interner.term_node(t), interner.sample_node(a)) {
                    (TermNode::Var(x), SampleNode::Last(t2))
                        if x == &var && matches!(interner.term_node(t2), TermNode::Var(y) if y == &var) =>
                    {
                        Some(d.get(s))
                    }
                    _ => None,
                },
                _ => None,
            })
            .ok_or_else(|| {
                ExtractError::Inconsistent(format!("no x[last(x)] sample for {var}"))
            })?;
        theta.insert(var.clone(), build_warp(&ps, omega_value)?);
    }
    Ok(theta)
}

/// The final gate: `⟦tᵢ⟧θ(p) < p` for every goal term, computed entirely
/// by the warp calculator.
pub fn verify(theta: &Valuation, p: ExtNat, goals: &[BasicTerm]) -> bool {
    goals.iter().all(|t| eval_basic(t, theta).eval(p) < p)
}

/// A concrete, checked refutation of a query.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub p: ExtNat,
    pub valuation: BTreeMap<String, Warp>,
    pub verified: bool,
    /// The unit-goal terms this counterexample refutes (empty for
    /// counterexamples found by direct evaluation of a non-goal query).
    #[serde(skip)]
    pub goals: Vec<BasicTerm>,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p = {}", self.p)?;
        for (x, w) in &self.valuation {
            write!(f, ", {x} = {w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::diagram_from_valuation;
    use crate::saturate::{saturate, DEFAULT_SAMPLE_BUDGET};
    use crate::term::parse_term;

    fn setup(goal_srcs: &[&str]) -> (Interner, SampleSet) {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let roots: Vec<_> = goal_srcs
            .iter()
            .map(|s| {
                let b = BasicTerm::from_term(&parse_term(s).unwrap()).unwrap();
                let t = interner.intern_basic(&b);
                interner.app(t, kappa)
            })
            .collect();
        let delta = saturate(&mut interner, &roots, DEFAULT_SAMPLE_BUDGET).unwrap();
        (interner, delta)
    }

    #[test]
    fn bot_diagram_extracts_bot() {
        let (interner, delta) = setup(&["x"]);
        let theta_in: Valuation = [("x".to_owned(), Warp::bot())].into();
        let d = diagram_from_valuation(&interner, &delta, &theta_in, Fin(1));
        let ps = points_of("x", &d, &delta, &interner);
        assert_eq!(ps.points, vec![(Fin(0), Fin(0)), (Fin(1), Fin(0))]);
        let theta = valuation_from_diagram(&interner, &delta, &d).unwrap();
        assert_eq!(theta["x"], Warp::bot());
    }

    #[test]
    fn missing_variable_yields_empty_points() {
        let (interner, delta) = setup(&["x"]);
        let theta_in: Valuation = [("x".to_owned(), Warp::bot())].into();
        let d = diagram_from_valuation(&interner, &delta, &theta_in, Fin(1));
        let ps = points_of("nope", &d, &delta, &interner);
        assert!(ps.points.is_empty());
    }

    #[test]
    fn interpolation_follows_the_capped_unit_slope_formula() {
        // P = {(2,5)}, f(ω) = 5: f(1) = 1, f(2) = 5, f(n) = 5 beyond.
        let ps = PointSet { var: "x".into(), points: vec![(Fin(2), Fin(5))] };
        let w = build_warp(&ps, Fin(5)).unwrap();
        assert_eq!(w.eval(Fin(1)), Fin(1));
        assert_eq!(w.eval(Fin(2)), Fin(5));
        assert_eq!(w.eval(Fin(3)), Fin(5));
        assert_eq!(w.eval(Omega), Fin(5));
    }

    #[test]
    fn omega_last_forces_a_ramp() {
        let ps = PointSet { var: "x".into(), points: vec![(Fin(1), Fin(2))] };
        let w = build_warp(&ps, Omega).unwrap();
        assert_eq!(w.eval(Fin(1)), Fin(2));
        assert_eq!(w.eval(Fin(3)), Fin(4));
        assert_eq!(w.last(), Omega);
    }

    #[test]
    fn rising_to_a_finite_omega_value_caps() {
        let ps = PointSet { var: "x".into(), points: vec![(Fin(1), Fin(0))] };
        let w = build_warp(&ps, Fin(3)).unwrap();
        assert_eq!(w.eval(Fin(1)), Fin(0));
        assert_eq!(w.eval(Fin(2)), Fin(1));
        assert_eq!(w.eval(Fin(4)), Fin(3));
        assert_eq!(w.eval(Fin(9)), Fin(3));
        assert_eq!(w.eval(Omega), Fin(3));
    }

    #[test]
    fn non_monotone_points_are_rejected() {
        let ps = PointSet {
            var: "x".into(),
            points: vec![(Fin(1), Fin(4)), (Fin(2), Fin(1))],
        };
        assert!(matches!(build_warp(&ps, Fin(4)), Err(ExtractError::NotMonotone { .. })));
    }

    #[test]
    fn verify_checks_strict_descent() {
        let theta: Valuation = [("x".to_owned(), Warp::bot())].into();
        assert!(verify(&theta, Fin(1), &[BasicTerm::var("x")]));
        let theta: Valuation = [("x".to_owned(), Warp::id())].into();
        assert!(!verify(&theta, Fin(1), &[BasicTerm::var("x")]));
    }

    #[test]
    fn counterexample_json_schema() {
        let ce = Counterexample {
            p: Fin(1),
            valuation: [("x".to_owned(), Warp::bot())].into(),
            verified: true,
            goals: vec![BasicTerm::var("x")],
        };
        let js = serde_json::to_string(&ce).unwrap();
        assert_eq!(
            js,
            r#"{"p":1,"valuation":{"x":{"segments":[],"tail":{"const":0}}},"verified":true}"#
        );
    }
}
