//! Samples and saturated sample sets.
//!
//! A sample is a syntactic observation point: the time variable `κ`, an
//! application `t[α]` of a basic term to a sample, `suc(α)`, `pre(α)`, or
//! `last(t)`. Saturation closes a set of samples under the step relation
//! `⇝`, which adds every companion sample needed to constrain a potential
//! counterexample. Saturation of a finite set is finite.
//!
//! Terms and samples are hash-consed in an [`Interner`]; interned ids give
//! cheap structural equality and deterministic, insertion-ordered sets.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::term::BasicTerm;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TermId(u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SampleId(u32);

impl SampleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned basic-term node.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TermNode {
    Var(String),
    Comp(TermId, TermId),
    Uo(TermId),
    Ul(TermId),
    Ur(TermId),
    Id,
    Bot,
}

/// Interned sample node.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum SampleNode {
    Kappa,
    /// `t[α]`
    App(TermId, SampleId),
    Suc(SampleId),
    Pre(SampleId),
    Last(TermId),
}

/// Hash-consing tables for terms and samples. Interned identity implies
/// structural equality; ids are assigned in insertion order, so any
/// deterministic construction sequence yields deterministic ids.
#[derive(Default)]
pub struct Interner {
    terms: Vec<TermNode>,
    term_ids: HashMap<TermNode, TermId>,
    samples: Vec<SampleNode>,
    sample_ids: HashMap<SampleNode, SampleId>,
}

impl Interner {
    pub fn new() -> Interner {
        Interner::default()
    }

    pub fn term(&mut self, node: TermNode) -> TermId {
        if let Some(&id) = self.term_ids.get(&node) {
            return id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("term table overflow"));
        self.terms.push(node.clone());
        self.term_ids.insert(node, id);
        id
    }

    pub fn sample(&mut self, node: SampleNode) -> SampleId {
        if let Some(&id) = self.sample_ids.get(&node) {
            return id;
        }
        let id = SampleId(u32::try_from(self.samples.len()).expect("sample table overflow"));
        self.samples.push(node);
        self.sample_ids.insert(node, id);
        id
    }

    pub fn kappa(&mut self) -> SampleId {
        self.sample(SampleNode::Kappa)
    }

    pub fn app(&mut self, t: TermId, a: SampleId) -> SampleId {
        self.sample(SampleNode::App(t, a))
    }

    pub fn intern_basic(&mut self, t: &BasicTerm) -> TermId {
        let node = match t {
            BasicTerm::Var(x) => TermNode::Var(x.clone()),
            BasicTerm::Id => TermNode::Id,
            BasicTerm::Bot => TermNode::Bot,
            BasicTerm::Comp(l, r) => {
                let l = self.intern_basic(l);
                let r = self.intern_basic(r);
                TermNode::Comp(l, r)
            }
            BasicTerm::Uo(s) => {
                let s = self.intern_basic(s);
                TermNode::Uo(s)
            }
            BasicTerm::Ul(s) => {
                let s = self.intern_basic(s);
                TermNode::Ul(s)
            }
            BasicTerm::Ur(s) => {
                let s = self.intern_basic(s);
                TermNode::Ur(s)
            }
        };
        self.term(node)
    }

    pub fn term_node(&self, id: TermId) -> &TermNode {
        &self.terms[id.0 as usize]
    }

    pub fn sample_node(&self, id: SampleId) -> SampleNode {
        self.samples[id.0 as usize]
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Reconstructs the basic-term tree behind an interned id.
    pub fn basic_term(&self, id: TermId) -> BasicTerm {
        match self.term_node(id) {
            TermNode::Var(x) => BasicTerm::Var(x.clone()),
            TermNode::Id => BasicTerm::Id,
            TermNode::Bot => BasicTerm::Bot,
            TermNode::Comp(l, r) => BasicTerm::comp(self.basic_term(*l), self.basic_term(*r)),
            TermNode::Uo(s) => BasicTerm::uo(self.basic_term(*s)),
            TermNode::Ul(s) => BasicTerm::ul(self.basic_term(*s)),
            TermNode::Ur(s) => BasicTerm::ur(self.basic_term(*s)),
        }
    }

    pub fn print_term(&self, id: TermId) -> String {
        self.basic_term(id).to_string()
    }

    /// Stable sample rendering: `κ` prints as `#k`, applications
    /// parenthesize composite heads, e.g. `(x y)[#k]`, `suc(x^r[#k])`,
    /// `last(x)`.
    pub fn print_sample(&self, id: SampleId) -> String {
        let mut out = String::new();
        self.write_sample(id, &mut out);
        out
    }

    fn write_sample(&self, id: SampleId, out: &mut String) {
        match self.sample_node(id) {
            SampleNode::Kappa => out.push_str("#k"),
            SampleNode::App(t, a) => {
                let head = self.print_term(t);
                if matches!(self.term_node(t), TermNode::Comp(..)) {
                    let _ = write!(out, "({head})");
                } else {
                    out.push_str(&head);
                }
                out.push('[');
                self.write_sample(a, out);
                out.push(']');
            }
            SampleNode::Suc(a) => {
                out.push_str("suc(");
                self.write_sample(a, out);
                out.push(')');
            }
            SampleNode::Pre(a) => {
                out.push_str("pre(");
                self.write_sample(a, out);
                out.push(')');
            }
            SampleNode::Last(t) => {
                let _ = write!(out, "last({})", self.print_term(t));
            }
        }
    }

    /// Variables occurring in the term behind `id`, in first-occurrence
    /// order.
    pub fn term_vars(&self, id: TermId, out: &mut Vec<String>) {
        match self.term_node(id) {
            TermNode::Var(x) => {
                if !out.iter().any(|v| v == x) {
                    out.push(x.clone());
                }
            }
            TermNode::Comp(l, r) => {
                self.term_vars(*l, out);
                self.term_vars(*r, out);
            }
            TermNode::Uo(s) | TermNode::Ul(s) | TermNode::Ur(s) => self.term_vars(*s, out),
            TermNode::Id | TermNode::Bot => {}
        }
    }
}

/// A finite set of samples in deterministic insertion order; `saturated`
/// records that the set is closed under `⇝`.
pub struct SampleSet {
    members: Vec<SampleId>,
    present: Vec<bool>,
    pub saturated: bool,
}

impl SampleSet {
    pub fn contains(&self, id: SampleId) -> bool {
        self.present.get(id.index()).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = SampleId> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SaturateError {
    #[error("saturation exceeded the sample budget of {budget}; this signals a bug, not a user error")]
    BudgetExceeded { budget: usize },
}

/// Default saturation cap, far above anything desk-scale terms produce.
pub const DEFAULT_SAMPLE_BUDGET: usize = 1_000_000;

/// The one-step `⇝` successors of a sample:
///
/// ```text
/// t[α] ⇝ α               suc(α) ⇝ α            pre(α) ⇝ α
/// tu[α] ⇝ t[u[α]]        t^o[α] ⇝ t[α]
/// t^r[α] ⇝ t[t^r[α]], t[suc(t^r[α])]
/// t^ℓ[α] ⇝ t[t^ℓ[α]], t[pre(t^ℓ[α])]
/// t[α] ⇝ t[last(t)]
/// ```
pub fn step(interner: &mut Interner, sample: SampleId) -> Vec<SampleId> {
    match interner.sample_node(sample) {
        SampleNode::Kappa | SampleNode::Last(_) => Vec::new(),
        SampleNode::Suc(a) | SampleNode::Pre(a) => vec![a],
        SampleNode::App(t, a) => {
            let mut out = vec![a];
            match *interner.term_node(t) {
                TermNode::Comp(u, v) => {
                    let inner = interner.app(v, a);
                    out.push(interner.app(u, inner));
                }
                TermNode::Uo(u) => {
                    out.push(interner.app(u, a));
                }
                TermNode::Ur(u) => {
                    out.push(interner.app(u, sample));
                    let suc = interner.sample(SampleNode::Suc(sample));
                    out.push(interner.app(u, suc));
                }
                TermNode::Ul(u) => {
                    out.push(interner.app(u, sample));
                    let pre = interner.sample(SampleNode::Pre(sample));
                    out.push(interner.app(u, pre));
                }
                TermNode::Var(_) | TermNode::Id | TermNode::Bot => {}
            }
            let last = interner.sample(SampleNode::Last(t));
            out.push(interner.app(t, last));
            out
        }
    }
}

/// Least `⇝`-closed superset of `roots`, by worklist fixpoint.
pub fn saturate(
    interner: &mut Interner,
    roots: &[SampleId],
    budget: usize,
) -> Result<SampleSet, SaturateError> {
    let mut members: Vec<SampleId> = Vec::new();
    let mut present: Vec<bool> = Vec::new();
    let mut queue: std::collections::VecDeque<SampleId> = Default::default();

    let push = |id: SampleId, members: &mut Vec<SampleId>, present: &mut Vec<bool>, queue: &mut std::collections::VecDeque<SampleId>| {
        if present.len() <= id.index() {
            present.resize(id.index() + 1, false);
        }
        if !present[id.index()] {
            present[id.index()] = true;
            members.push(id);
            queue.push_back(id);
        }
    };

    for &r in roots {
        push(r, &mut members, &mut present, &mut queue);
    }
    while let Some(a) = queue.pop_front() {
        if members.len() > budget {
            return Err(SaturateError::BudgetExceeded { budget });
        }
        for b in step(interner, a) {
            push(b, &mut members, &mut present, &mut queue);
        }
    }
    Ok(SampleSet { members, present, saturated: true })
}

/// The Appendix-style size bound `(6·c)^c` on the saturation of a single
/// rooted sample, as a saturating 128-bit value.
pub fn saturation_bound(complexity: u64) -> u128 {
    let base = 6u128.saturating_mul(complexity as u128);
    let mut out: u128 = 1;
    for _ in 0..complexity {
        out = out.saturating_mul(base);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    /// Parses a basic term through the full grammar (with `^`-sugar).
    fn basic(src: &str) -> BasicTerm {
        BasicTerm::from_term(&parse_term(src).unwrap()).expect("test term is basic")
    }

    fn saturate_terms(srcs: &[&str]) -> (Interner, SampleSet, Vec<SampleId>) {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let roots: Vec<SampleId> = srcs
            .iter()
            .map(|s| {
                let t = interner.intern_basic(&basic(s));
                interner.app(t, kappa)
            })
            .collect();
        let set = saturate(&mut interner, &roots, DEFAULT_SAMPLE_BUDGET).unwrap();
        (interner, set, roots)
    }

    fn prints(interner: &Interner, set: &SampleSet) -> Vec<String> {
        set.iter().map(|s| interner.print_sample(s)).collect()
    }

    #[test]
    fn variable_saturation_has_exactly_four_samples() {
        let (interner, set, _) = saturate_terms(&["x"]);
        let mut got = prints(&interner, &set);
        got.sort();
        assert_eq!(got, vec!["#k", "last(x)", "x[#k]", "x[last(x)]"]);
    }

    #[test]
    fn bot_saturation_mirrors_the_variable_case() {
        let (interner, set, _) = saturate_terms(&["bot"]);
        let mut got = prints(&interner, &set);
        got.sort();
        assert_eq!(got, vec!["#k", "bot[#k]", "bot[last(bot)]", "last(bot)"]);
    }

    #[test]
    fn worked_example_contains_the_announced_samples() {
        let (interner, set, _) = saturate_terms(&["x y x^l", "y^l"]);
        let got = prints(&interner, &set);
        for needed in ["#k", "x^l[#k]", "y[x^l[#k]]", "x[y[x^l[#k]]]"] {
            assert!(got.iter().any(|s| s == needed), "missing {needed} in {got:?}");
        }
    }

    #[test]
    fn step_of_variable_application() {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let x = interner.intern_basic(&basic("x"));
        let xk = interner.app(x, kappa);
        let succs = step(&mut interner, xk);
        let got: Vec<String> = succs.iter().map(|&s| interner.print_sample(s)).collect();
        assert_eq!(got, vec!["#k", "x[last(x)]"]);
    }

    #[test]
    fn step_of_ul_application_adds_both_companions() {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let xl = interner.intern_basic(&basic("x^l"));
        let a = interner.app(xl, kappa);
        let succs = step(&mut interner, a);
        let got: Vec<String> = succs.iter().map(|&s| interner.print_sample(s)).collect();
        assert!(got.contains(&"x[x^l[#k]]".to_owned()));
        assert!(got.contains(&"x[pre(x^l[#k])]".to_owned()));
    }

    #[test]
    fn last_samples_are_terminal() {
        let mut interner = Interner::new();
        let x = interner.intern_basic(&basic("x"));
        let l = interner.sample(SampleNode::Last(x));
        assert!(step(&mut interner, l).is_empty());
    }

    #[test]
    fn saturation_is_idempotent_and_monotone() {
        let (mut interner, set, roots) = saturate_terms(&["x^r y", "bot^o"]);
        let again = saturate(&mut interner, &set.iter().collect::<Vec<_>>(), DEFAULT_SAMPLE_BUDGET)
            .unwrap();
        assert_eq!(set.len(), again.len());
        assert!(set.iter().all(|s| again.contains(s)));

        // Monotone: saturating a subset stays inside.
        let sub = saturate(&mut interner, &roots[..1], DEFAULT_SAMPLE_BUDGET).unwrap();
        assert!(sub.iter().all(|s| set.contains(s)));
    }

    #[test]
    fn budget_violation_reports_an_error() {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let t = interner.intern_basic(&basic("x^r y^l z"));
        let root = interner.app(t, kappa);
        assert!(matches!(
            saturate(&mut interner, &[root], 3),
            Err(SaturateError::BudgetExceeded { budget: 3 })
        ));
    }

    #[test]
    fn bound_matches_the_small_cases() {
        assert_eq!(saturation_bound(1), 6);
        assert_eq!(saturation_bound(2), 144);
        assert!(saturation_bound(6) == 36u128.pow(6));
    }
}
