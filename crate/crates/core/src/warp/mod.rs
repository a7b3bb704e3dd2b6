//! Exact, finite representations of time warps.
//!
//! A time warp is a monotone function `f : ω∪{ω} → ω∪{ω}` with `f(0) = 0`
//! and `f(ω) = sup { f(n) | n ∈ ω }`. The representable class is the warps
//! that are eventually simple: past a finite point the function is either
//! constant or a unit-slope ramp. That class contains `id`, `⊥`, `⊤`, and is
//! closed under composition, meet, join, and both residuals.
//!
//! # Representation
//!
//! A [`Warp`] stores a list of *anchors* `(at, value, slope)` with strictly
//! increasing positions `at ≥ 1`, plus a *tail*. The implicit anchor `(0, 0)`
//! is always present. The denoted function is:
//!
//! * `f(0) = 0`;
//! * on the gap between consecutive anchors `(xp, yp)` and `(x, y, slope)`:
//!   - `slope = 0` (step): `f(n) = yp` for `xp < n < x`, and `f(x) = y`;
//!   - `slope = 1` (ramp): `f(n) = min(y, yp + (n − xp))` for `xp < n ≤ x`,
//!     i.e. a unit-slope rise from the previous anchor capped at `y`;
//! * past the last anchor `(xk, yk)` (or `(0, 0)` when there are none):
//!   - tail `const v`: `f(n) = v` for every finite `n > xk` and `f(ω) = v`;
//!   - tail `ramp`: `f(n) = yk + (n − xk)` and `f(ω) = ω`.
//!
//! Anchors are kept in a canonical form (no redundant anchor, fixed slope
//! tiebreaks), so structural equality of `Warp` values coincides with
//! equality of the denoted functions. All constructors canonicalize.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extnat::{ExtNat, Fin, Omega, ZERO};

mod ops;

/// Interpolation mode of the gap leading up to an anchor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Slope {
    /// Hold the previous value, then jump at the anchor point.
    Step,
    /// Rise by one per step from the previous anchor, capped at the anchor
    /// value.
    Ramp,
}

/// Behaviour past the last anchor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Tail {
    /// Constant at the given value (which is also `f(ω)`).
    Const(ExtNat),
    /// Unit-slope ramp forever; `f(ω) = ω`.
    Ramp,
}

/// One breakpoint of a warp.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Segment {
    pub at: u64,
    pub value: ExtNat,
    pub slope: Slope,
}

/// A time warp in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Warp {
    anchors: Vec<Segment>,
    tail: Tail,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WarpError {
    #[error("segment positions must be strictly increasing and nonzero (offending position {0})")]
    BadPosition(u64),
    #[error("segment values must be monotone (value {bad} at position {at} drops below {prev})")]
    NotMonotone { at: u64, bad: ExtNat, prev: ExtNat },
    #[error("a ramp tail needs a finite final value, found ω")]
    RampAfterOmega,
    #[error("constant tail value {tail} is below the final segment value {last}")]
    TailBelowLast { tail: ExtNat, last: ExtNat },
}

/// Profiles longer than this indicate runaway inputs rather than real use.
const HORIZON_CAP: u64 = 1 << 22;

impl Warp {
    /// The identity warp `f(p) = p`.
    pub fn id() -> Warp {
        Warp { anchors: Vec::new(), tail: Tail::Ramp }
    }

    /// The least warp `⊥`, constant `0`.
    pub fn bot() -> Warp {
        Warp { anchors: Vec::new(), tail: Tail::Const(ZERO) }
    }

    /// The greatest warp `⊤`, mapping every `p ≠ 0` to `ω`.
    pub fn top() -> Warp {
        Warp { anchors: Vec::new(), tail: Tail::Const(Omega) }
    }

    /// A step warp: `0` below `at`, constant `v` from `at` on (including `ω`).
    pub fn step(at: u64, v: ExtNat) -> Warp {
        Warp::from_segments(&[Segment { at, value: v, slope: Slope::Step }], Tail::Const(v))
            .expect("step segments are valid")
    }

    /// Builds a warp from explicit breakpoints and a tail, validating
    /// monotonicity. Non-monotone breakpoint lists are rejected.
    pub fn from_segments(segments: &[Segment], tail: Tail) -> Result<Warp, WarpError> {
        let mut prev_at = 0u64;
        let mut prev_val = ZERO;
        for (i, seg) in segments.iter().enumerate() {
            if seg.at == 0 || (i > 0 && seg.at <= prev_at) {
                return Err(WarpError::BadPosition(seg.at));
            }
            // The attained value at `seg.at` never drops below the previous
            // attained value; for ramp segments the cap keeps this true as
            // long as the declared value does not go down.
            if seg.value < prev_val {
                return Err(WarpError::NotMonotone { at: seg.at, bad: seg.value, prev: prev_val });
            }
            prev_at = seg.at;
            prev_val = attained(segments, i);
        }
        match tail {
            Tail::Ramp if prev_val.is_omega() => return Err(WarpError::RampAfterOmega),
            Tail::Const(v) if v < prev_val => {
                return Err(WarpError::TailBelowLast { tail: v, last: prev_val })
            }
            _ => {}
        }
        let horizon = prev_at + 1;
        let profile: Vec<ExtNat> =
            (0..=horizon).map(|n| eval_raw(segments, tail, Fin(n))).collect();
        Ok(Warp::from_profile(&profile, tail))
    }

    /// Builds a warp from slope-0 breakpoints (the default interpolation).
    pub fn from_steps(points: &[(u64, ExtNat)], tail: Tail) -> Result<Warp, WarpError> {
        let segs: Vec<Segment> =
            points.iter().map(|&(at, value)| Segment { at, value, slope: Slope::Step }).collect();
        Warp::from_segments(&segs, tail)
    }

    /// Canonicalizes a pointwise value profile `f(0), …, f(H)` plus tail
    /// behaviour past `H` into the minimal anchor representation.
    ///
    /// Preconditions (checked): `values[0] = 0`, monotone, a ramp tail needs
    /// a finite final value, a constant tail value must dominate the final
    /// profile value.
    pub(crate) fn from_profile(values: &[ExtNat], tail: Tail) -> Warp {
        assert!(!values.is_empty() && values[0] == ZERO, "profile must start at 0");
        assert!(
            values.len() as u64 <= HORIZON_CAP,
            "warp horizon budget exceeded ({} points)",
            values.len()
        );
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]), "profile must be monotone");
        let h = values.len() - 1;
        let warp = match tail {
            Tail::Const(v) => {
                assert!(v >= values[h], "constant tail below profile end");
                let mut anchors = emit_anchors(values, h);
                let yk = anchors.last().map(|a| a.value).unwrap_or(ZERO);
                if yk < v {
                    // The plateau jumps to `v` right after the profile ends.
                    anchors.push(Segment { at: h as u64 + 1, value: v, slope: Slope::Step });
                }
                // Drop a final anchor that the tail already covers.
                if let Some(last) = anchors.last() {
                    if last.value == v {
                        let prev_at =
                            if anchors.len() >= 2 { anchors[anchors.len() - 2].at } else { 0 };
                        if last.at == prev_at + 1 {
                            anchors.pop();
                        }
                    }
                }
                Warp { anchors, tail }
            }
            Tail::Ramp => {
                assert!(!values[h].is_omega(), "ramp tail after ω");
                // Base of the trailing unit-slope run that the tail extends.
                let mut base = h;
                while base > 0 && values[base - 1].add(1) == values[base] {
                    base -= 1;
                }
                let mut anchors = emit_anchors(&values[..=base], base);
                if base >= 1 && anchors.last().map(|a| a.at).unwrap_or(0) < base as u64 {
                    // Flat arrival into the ramp base still needs an anchor,
                    // otherwise the tail would start ramping too early.
                    anchors.push(Segment { at: base as u64, value: values[base], slope: Slope::Step });
                }
                Warp { anchors, tail }
            }
        };
        #[cfg(debug_assertions)]
        warp.check_canonical();
        warp
    }

    /// Evaluates the warp at a point.
    pub fn eval(&self, p: ExtNat) -> ExtNat {
        eval_raw(&self.anchors, self.tail, p)
    }

    /// `last(f)`: the least `p` with `f(p) = f(ω)`; `ω` iff `f` never
    /// stabilizes.
    pub fn last(&self) -> ExtNat {
        match self.tail {
            Tail::Ramp => Omega,
            Tail::Const(v) => match self.anchors.last() {
                None => {
                    if v.is_zero() {
                        ZERO
                    } else {
                        Fin(1)
                    }
                }
                Some(a) => {
                    if a.value == v {
                        Fin(a.at)
                    } else {
                        Fin(a.at + 1)
                    }
                }
            },
        }
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn segments(&self) -> &[Segment] {
        &self.anchors
    }

    /// Position of the final anchor (0 when there is none).
    fn max_at(&self) -> u64 {
        self.anchors.last().map(|a| a.at).unwrap_or(0)
    }

    /// Largest finite value mentioned anywhere in the representation.
    fn max_finite_value(&self) -> u64 {
        let mut m = 0u64;
        for a in &self.anchors {
            if let Fin(v) = a.value {
                m = m.max(v);
            }
        }
        if let Tail::Const(Fin(v)) = self.tail {
            m = m.max(v);
        }
        m
    }

    /// A size measure bounding where the warp becomes tail-simple.
    pub(crate) fn magnitude(&self) -> u64 {
        self.max_at().saturating_add(self.max_finite_value())
    }

    /// Least `q` with `f(q) > w`, or `None` if no point exceeds `w`.
    pub(crate) fn first_above(&self, w: ExtNat) -> Option<u64> {
        let wf = w.fin()?; // nothing exceeds ω
        let (mut xp, mut yp) = (0u64, ZERO);
        // Canonical anchors attain their declared value, so `a.value` is the
        // actual f(a.at).
        for a in &self.anchors {
            let val = a.value;
            if val > w {
                match a.slope {
                    Slope::Step => return Some(a.at),
                    Slope::Ramp => {
                        // The run rises past w strictly inside the gap or at
                        // the anchor itself; yp ≤ w < ω here.
                        let ypf = yp.fin().expect("ramp base is finite");
                        return Some(xp + (wf - ypf) + 1);
                    }
                }
            }
            xp = a.at;
            yp = val;
        }
        match self.tail {
            Tail::Const(v) => (v > w).then_some(xp + 1),
            Tail::Ramp => {
                let ypf = yp.fin().expect("ramp tail base is finite");
                Some(xp + (wf - ypf) + 1)
            }
        }
    }

    /// Greatest `q ∈ ω∪{ω}` with `f(q) ≤ w`; `ω` when `f(ω) ≤ w`.
    ///
    /// (The set is downward closed and always contains `0`; if every natural
    /// satisfies the bound then so does `ω`, because `f(ω)` is the sup.)
    pub(crate) fn sup_leq(&self, w: ExtNat) -> ExtNat {
        match self.first_above(w) {
            None => Omega,
            Some(q) => Fin(q - 1), // q ≥ 1 because f(0) = 0 ≤ w
        }
    }

    /// Least `q ∈ ω∪{ω}` with `f(q) ≥ p`, or `None` when `f(ω) < p`.
    pub(crate) fn min_geq(&self, p: ExtNat) -> Option<ExtNat> {
        if p == ZERO {
            return Some(ZERO);
        }
        let (mut xp, mut yp) = (0u64, ZERO);
        for a in &self.anchors {
            let val = a.value;
            if val >= p {
                match a.slope {
                    Slope::Step => return Some(Fin(a.at)),
                    Slope::Ramp => {
                        // yp < p ≤ val and the run’s values are finite, so p
                        // is finite and first reached inside the run.
                        let pf = p.fin().expect("ramp values are finite");
                        let ypf = yp.fin().expect("ramp base is finite");
                        return Some(Fin(xp + (pf - ypf)));
                    }
                }
            }
            xp = a.at;
            yp = val;
        }
        match self.tail {
            Tail::Const(v) => (v >= p).then_some(Fin(xp + 1)),
            Tail::Ramp => match p {
                Fin(pf) => {
                    let ypf = yp.fin().expect("ramp tail base is finite");
                    Some(Fin(xp + (pf - ypf)))
                }
                // A ramp reaches ω only in the limit.
                Omega => Some(Omega),
            },
        }
    }

    /// First finite point at which the warp attains `ω`, if any.
    pub(crate) fn first_omega_point(&self) -> Option<u64> {
        match self.min_geq(Omega) {
            Some(Fin(q)) => Some(q),
            _ => None,
        }
    }

    /// Exact pointwise order: `f ≤ g` at every point of `ω∪{ω}`.
    pub fn leq(&self, other: &Warp) -> bool {
        let h = self.magnitude() + other.magnitude() + 4;
        for n in 0..=h {
            if self.eval(Fin(n)) > other.eval(Fin(n)) {
                return false;
            }
        }
        self.eval(Omega) <= other.eval(Omega)
    }

    #[cfg(debug_assertions)]
    fn check_canonical(&self) {
        let mut prev_at = 0u64;
        let mut prev_val = ZERO;
        for (i, a) in self.anchors.iter().enumerate() {
            assert!(a.at > prev_at, "anchor positions must increase");
            match a.slope {
                Slope::Ramp => {
                    assert_eq!(
                        a.value,
                        prev_val.add(a.at - prev_at),
                        "ramp anchor value must be attained by the unit run"
                    );
                }
                Slope::Step => {
                    let strict_rise = a.value > prev_val;
                    let ramp_base_flat = self.tail == Tail::Ramp
                        && i + 1 == self.anchors.len()
                        && a.value == prev_val;
                    assert!(strict_rise || ramp_base_flat, "redundant anchor");
                }
            }
            prev_at = a.at;
            prev_val = a.value;
        }
        if let Tail::Const(v) = self.tail {
            assert!(v >= prev_val);
        }
        if self.tail == Tail::Ramp {
            assert!(!prev_val.is_omega());
        }
    }
}

/// Attained value at anchor `i` of a (possibly raw) segment list.
fn attained(segments: &[Segment], i: usize) -> ExtNat {
    let a = segments[i];
    match a.slope {
        Slope::Step => a.value,
        Slope::Ramp => {
            let (xp, yp) = if i == 0 { (0, ZERO) } else { (segments[i - 1].at, attained(segments, i - 1)) };
            a.value.min(yp.add(a.at - xp))
        }
    }
}

/// Shared evaluator for canonical and raw segment lists.
fn eval_raw(segments: &[Segment], tail: Tail, p: ExtNat) -> ExtNat {
    let n = match p {
        Omega => {
            return match tail {
                Tail::Const(v) => v,
                Tail::Ramp => Omega,
            }
        }
        Fin(0) => return ZERO,
        Fin(n) => n,
    };
    let i = segments.partition_point(|a| a.at < n);
    if i == segments.len() {
        let (xk, yk) = match segments.last() {
            Some(_) => (segments[i - 1].at, attained(segments, i - 1)),
            None => (0, ZERO),
        };
        match tail {
            Tail::Const(v) => v,
            Tail::Ramp => yk.add(n - xk),
        }
    } else {
        let a = segments[i];
        let (xp, yp) = if i == 0 { (0, ZERO) } else { (segments[i - 1].at, attained(segments, i - 1)) };
        match a.slope {
            Slope::Step => {
                if a.at == n {
                    a.value
                } else {
                    yp
                }
            }
            Slope::Ramp => a.value.min(yp.add(n - xp)),
        }
    }
}

/// Greedy minimal-anchor emission over `values[1..=end]`.
///
/// Rises of exactly one per step starting right after the previous anchor
/// become ramp anchors placed at the crest of the run; every other rise is a
/// step anchor at the rise position. Plateaus need no anchor of their own.
fn emit_anchors(values: &[ExtNat], end: usize) -> Vec<Segment> {
    let mut anchors = Vec::new();
    let (mut xp, mut yp) = (0u64, ZERO);
    let mut n = 1usize;
    while n <= end {
        let v = values[n];
        if v == yp {
            n += 1;
            continue;
        }
        if n as u64 == xp + 1 && !yp.is_omega() && v == yp.add(1) {
            let mut r = n;
            while r + 1 <= end && values[r + 1] == yp.add(r as u64 + 1 - xp) {
                r += 1;
            }
            anchors.push(Segment { at: r as u64, value: values[r], slope: Slope::Ramp });
            xp = r as u64;
            yp = values[r];
            n = r + 1;
        } else {
            anchors.push(Segment { at: n as u64, value: v, slope: Slope::Step });
            xp = n as u64;
            yp = v;
            n += 1;
        }
    }
    anchors
}

/// Stable textual rendering: `{0↦0, 2↦5, 4↦7+; tail=const 7}` with `+`
/// marking unit-slope anchors.
impl fmt::Display for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{0↦0")?;
        for a in &self.anchors {
            write!(f, ", {}↦{}", a.at, a.value)?;
            if a.slope == Slope::Ramp {
                write!(f, "+")?;
            }
        }
        match self.tail {
            Tail::Const(v) => write!(f, "; tail=const {v}}}"),
            Tail::Ramp => write!(f, "; tail=ramp}}"),
        }
    }
}

impl fmt::Debug for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// --- JSON wire format -------------------------------------------------
//
// {"segments": [{"start": n, "value": v|"omega", "slope": 0|1}],
//  "tail": {"const": v|"omega"} | "ramp"}

#[derive(Serialize, Deserialize)]
struct SegmentJson {
    start: u64,
    value: ExtNat,
    slope: u8,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TailJson {
    Named(String),
    Const { #[serde(rename = "const")] value: ExtNat },
}

#[derive(Serialize, Deserialize)]
struct WarpJson {
    segments: Vec<SegmentJson>,
    tail: TailJson,
}

impl Serialize for Warp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let segments = self
            .anchors
            .iter()
            .map(|a| SegmentJson {
                start: a.at,
                value: a.value,
                slope: match a.slope {
                    Slope::Step => 0,
                    Slope::Ramp => 1,
                },
            })
            .collect();
        let tail = match self.tail {
            Tail::Const(v) => TailJson::Const { value: v },
            Tail::Ramp => TailJson::Named("ramp".to_owned()),
        };
        WarpJson { segments, tail }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Warp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = WarpJson::deserialize(deserializer)?;
        let segs: Result<Vec<Segment>, String> = raw
            .segments
            .iter()
            .map(|s| {
                let slope = match s.slope {
                    0 => Slope::Step,
                    1 => Slope::Ramp,
                    other => return Err(format!("slope must be 0 or 1, got {other}")),
                };
                Ok(Segment { at: s.start, value: s.value, slope })
            })
            .collect();
        let segs = segs.map_err(serde::de::Error::custom)?;
        let tail = match raw.tail {
            TailJson::Const { value } => Tail::Const(value),
            TailJson::Named(s) if s == "ramp" => Tail::Ramp,
            TailJson::Named(s) => {
                return Err(serde::de::Error::custom(format!("unknown tail {s:?}")))
            }
        };
        Warp::from_segments(&segs, tail).map_err(serde::de::Error::custom)
    }
}
