//! Constraints over samples: the τ-formula ψ, prediagram evaluation,
//! direct diagram checking, and diagram construction from valuations.
//!
//! A prediagram assigns a value in ω∪{ω} to every sample of a saturated
//! set Δ. A *diagram* is a prediagram satisfying the twenty-three
//! soundness conditions (structural, logical, o-, r-, and ℓ-soundness)
//! that characterize exactly the restrictions of real valuations. The
//! formula ψ expresses "δ is a diagram and every goal value sits strictly
//! below κ" in the quantifier-free language with `≼`, `S`, `O`, `I`, and
//! `≗`; it is generated clause set by clause set so diagnostics can name
//! the group a failing clause came from.

use std::collections::HashMap;

use thiserror::Error;

use crate::extnat::{ExtNat, Omega};
use crate::interp::{eval_basic, Valuation};
use crate::saturate::{Interner, SampleId, SampleNode, SampleSet, TermId, TermNode};

/// Boolean formulas over a pluggable atom type.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula<A> {
    Atom(A),
    Not(Box<Formula<A>>),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
    Implies(Box<Formula<A>>, Box<Formula<A>>),
    Iff(Box<Formula<A>>, Box<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn not(f: Formula<A>) -> Formula<A> {
        Formula::Not(Box::new(f))
    }

    pub fn implies(l: Formula<A>, r: Formula<A>) -> Formula<A> {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula<A>, r: Formula<A>) -> Formula<A> {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn eval(&self, atom: &impl Fn(&A) -> bool) -> bool {
        match self {
            Formula::Atom(a) => atom(a),
            Formula::Not(f) => !f.eval(atom),
            Formula::And(fs) => fs.iter().all(|f| f.eval(atom)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(atom)),
            Formula::Implies(l, r) => !l.eval(atom) || r.eval(atom),
            Formula::Iff(l, r) => l.eval(atom) == r.eval(atom),
        }
    }

    /// Substitutes every atom by a formula over another atom type.
    pub fn map_atoms<B>(&self, f: &impl Fn(&A) -> Formula<B>) -> Formula<B> {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Implies(l, r) => Formula::implies(l.map_atoms(f), r.map_atoms(f)),
            Formula::Iff(l, r) => Formula::iff(l.map_atoms(f), r.map_atoms(f)),
        }
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&A)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.visit_atoms(f);
                r.visit_atoms(f);
            }
        }
    }
}

/// Atoms of the τ signature: order, successor, "is ω", "is 0", equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TauAtom {
    Leq(SampleId, SampleId),
    Succ(SampleId, SampleId),
    IsOmega(SampleId),
    IsZero(SampleId),
    Eq(SampleId, SampleId),
}

pub type TauFormula = Formula<TauAtom>;

/// Clause-set names from the ψ construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PsiGroup {
    Struct,
    Log,
    Bounds,
    Right,
    Left,
    Fail,
}

impl PsiGroup {
    pub fn name(self) -> &'static str {
        match self {
            PsiGroup::Struct => "struct",
            PsiGroup::Log => "log",
            PsiGroup::Bounds => "bounds",
            PsiGroup::Right => "right",
            PsiGroup::Left => "left",
            PsiGroup::Fail => "fail",
        }
    }
}

/// ψ as a structured conjunction of clause sets.
pub struct Psi {
    pub groups: Vec<(PsiGroup, Vec<TauFormula>)>,
    /// Positions (within the `struct` group) of the monotonicity clauses,
    /// keyed by their application-sample pair. The solving pipeline
    /// activates these lazily: a satisfying model that violates
    /// monotonicity names the offending pair, whose clause then joins the
    /// formula.
    pub mon: HashMap<(SampleId, SampleId), usize>,
}

impl Psi {
    pub fn formulas(&self) -> impl Iterator<Item = &TauFormula> {
        self.groups.iter().flat_map(|(_, fs)| fs.iter())
    }

    /// The monotonicity clause for an application pair, if ψ has one.
    pub fn mon_formula(&self, pair: (SampleId, SampleId)) -> Option<&TauFormula> {
        let idx = *self.mon.get(&pair)?;
        let (_, fs) = self.groups.iter().find(|(g, _)| *g == PsiGroup::Struct)?;
        fs.get(idx)
    }

    /// All formulas except the monotonicity clauses, in order.
    pub fn formulas_without_mon(&self) -> impl Iterator<Item = &TauFormula> {
        let mon_indexes: std::collections::HashSet<usize> = self.mon.values().copied().collect();
        self.groups.iter().flat_map(move |(g, fs)| {
            let skip = *g == PsiGroup::Struct;
            let mon = mon_indexes.clone();
            fs.iter().enumerate().filter_map(move |(i, f)| {
                if skip && mon.contains(&i) {
                    None
                } else {
                    Some(f)
                }
            })
        })
    }

    pub fn clause_count(&self) -> usize {
        self.groups.iter().map(|(_, fs)| fs.len()).sum()
    }

    pub fn eval(&self, delta: &Prediagram) -> bool {
        self.formulas().all(|f| eval_tau(f, delta))
    }
}

/// A total map Δ → ω∪{ω}.
#[derive(Clone, Debug, Default)]
pub struct Prediagram {
    values: HashMap<SampleId, ExtNat>,
}

impl Prediagram {
    pub fn new() -> Prediagram {
        Prediagram::default()
    }

    pub fn set(&mut self, id: SampleId, v: ExtNat) {
        self.values.insert(id, v);
    }

    pub fn try_get(&self, id: SampleId) -> Option<ExtNat> {
        self.values.get(&id).copied()
    }

    /// Value of a sample. Panics when the prediagram is not total on the
    /// samples mentioned, which callers must guarantee.
    pub fn get(&self, id: SampleId) -> ExtNat {
        self.try_get(id).expect("prediagram must be total on mentioned samples")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("goal sample {0} is not a member of Δ")]
    GoalNotInDelta(String),
    #[error("Δ is not saturated: missing companion sample {0}")]
    MissingCompanion(String),
}

fn eval_atom(atom: &TauAtom, d: &Prediagram) -> bool {
    match *atom {
        TauAtom::Leq(a, b) => d.get(a) <= d.get(b),
        // S = {(n, n+1) | n ∈ ω} ∪ {(ω, ω)}
        TauAtom::Succ(a, b) => match (d.get(a), d.get(b)) {
            (ExtNat::Fin(x), ExtNat::Fin(y)) => y == x + 1,
            (Omega, Omega) => true,
            _ => false,
        },
        TauAtom::IsOmega(a) => d.get(a).is_omega(),
        TauAtom::IsZero(a) => d.get(a).is_zero(),
        TauAtom::Eq(a, b) => d.get(a) == d.get(b),
    }
}

/// Truth of a τ-formula in the structure ω∪{ω} under a prediagram.
pub fn eval_tau(f: &TauFormula, d: &Prediagram) -> bool {
    f.eval(&|a| eval_atom(a, d))
}

/// `a ≺ b`, expanded to `a ≼ b ∧ ¬(b ≼ a)`.
fn strictly_less(a: SampleId, b: SampleId) -> TauFormula {
    Formula::And(vec![
        Formula::Atom(TauAtom::Leq(a, b)),
        Formula::not(Formula::Atom(TauAtom::Leq(b, a))),
    ])
}

struct PsiBuilder<'a> {
    interner: &'a mut Interner,
    delta: &'a SampleSet,
}

impl<'a> PsiBuilder<'a> {
    /// Looks up a companion sample that saturation guarantees to exist.
    fn companion(&mut self, node: SampleNode) -> Result<SampleId, ConstraintError> {
        let id = self.interner.sample(node);
        if !self.delta.contains(id) {
            return Err(ConstraintError::MissingCompanion(self.interner.print_sample(id)));
        }
        Ok(id)
    }
}

/// Builds ψ for a saturated Δ and the goal samples `tᵢ[κ]`.
pub fn build_psi(
    interner: &mut Interner,
    delta: &SampleSet,
    kappa: SampleId,
    goals: &[SampleId],
) -> Result<Psi, ConstraintError> {
    for &g in goals {
        if !delta.contains(g) {
            return Err(ConstraintError::GoalNotInDelta(interner.print_sample(g)));
        }
    }

    // Classify Δ once, in insertion order.
    let mut apps: Vec<(SampleId, TermId, SampleId)> = Vec::new();
    let mut pres: Vec<(SampleId, SampleId)> = Vec::new();
    let mut sucs: Vec<(SampleId, SampleId)> = Vec::new();
    let mut lasts: Vec<(SampleId, TermId)> = Vec::new();
    for s in delta.iter() {
        match interner.sample_node(s) {
            SampleNode::App(t, a) => apps.push((s, t, a)),
            SampleNode::Pre(a) => pres.push((s, a)),
            SampleNode::Suc(a) => sucs.push((s, a)),
            SampleNode::Last(t) => lasts.push((s, t)),
            SampleNode::Kappa => {}
        }
    }
    let mut by_head: Vec<(TermId, Vec<(SampleId, SampleId)>)> = Vec::new();
    for &(s, t, a) in &apps {
        match by_head.iter_mut().find(|(h, _)| *h == t) {
            Some((_, v)) => v.push((s, a)),
            None => by_head.push((t, vec![(s, a)])),
        }
    }

    let mut b = PsiBuilder { interner, delta };
    let mut groups: Vec<(PsiGroup, Vec<TauFormula>)> = Vec::new();
    let mut push_group = |g: PsiGroup, fs: Vec<TauFormula>| {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for f in fs {
            if seen.insert(f.clone()) {
                out.push(f);
            }
        }
        groups.push((g, out));
    };

    // struct (monotonicity clauses first, tracked for lazy activation)
    let mut fs = Vec::new();
    let mut mon_of_pos: Vec<(SampleId, SampleId)> = Vec::new();
    for (_, members) in &by_head {
        for &(sa, a) in members {
            for &(sb, bb) in members {
                if a != bb {
                    fs.push(Formula::implies(
                        Formula::Atom(TauAtom::Leq(a, bb)),
                        Formula::Atom(TauAtom::Leq(sa, sb)),
                    ));
                    mon_of_pos.push((sa, sb));
                }
            }
        }
    }
    let mon_formulas: Vec<TauFormula> = fs.clone();
    for &(s, _, a) in &apps {
        fs.push(Formula::implies(
            Formula::Atom(TauAtom::IsZero(a)),
            Formula::Atom(TauAtom::IsZero(s)),
        ));
    }
    for &(p, a) in &pres {
        fs.push(Formula::Or(vec![
            Formula::Atom(TauAtom::Succ(p, a)),
            Formula::And(vec![
                Formula::Atom(TauAtom::IsZero(p)),
                Formula::Atom(TauAtom::IsZero(a)),
            ]),
        ]));
    }
    for &(s, a) in &sucs {
        fs.push(Formula::Atom(TauAtom::Succ(a, s)));
    }
    for &(s, t, a) in &apps {
        let last_t = b.companion(SampleNode::Last(t))?;
        let t_last = b.companion(SampleNode::App(t, last_t))?;
        fs.push(Formula::iff(
            Formula::Atom(TauAtom::Leq(last_t, a)),
            Formula::Atom(TauAtom::Eq(s, t_last)),
        ));
    }
    for &(s, t, a) in &apps {
        if let SampleNode::Last(t2) = b.interner.sample_node(a) {
            if t2 == t {
                let last_t = b.companion(SampleNode::Last(t))?;
                fs.push(Formula::implies(
                    Formula::Atom(TauAtom::IsOmega(last_t)),
                    Formula::Atom(TauAtom::IsOmega(s)),
                ));
            }
        }
    }
    push_group(PsiGroup::Struct, fs);

    // log
    let mut fs = Vec::new();
    for &(s, t, a) in &apps {
        if matches!(b.interner.term_node(t), TermNode::Id) {
            fs.push(Formula::Atom(TauAtom::Eq(s, a)));
        }
    }
    for &(_, t, _) in &apps {
        if matches!(b.interner.term_node(t), TermNode::Bot) {
            let last_bot = b.companion(SampleNode::Last(t))?;
            fs.push(Formula::Atom(TauAtom::IsZero(last_bot)));
        }
    }
    for &(s, t, a) in &apps {
        if let TermNode::Comp(u, v) = *b.interner.term_node(t) {
            let va = b.companion(SampleNode::App(v, a))?;
            let uva = b.companion(SampleNode::App(u, va))?;
            fs.push(Formula::Atom(TauAtom::Eq(s, uva)));
        }
    }
    for &(_, t, a) in &apps {
        if let TermNode::Comp(u, v) = *b.interner.term_node(t) {
            if b.interner.sample_node(a) == SampleNode::Last(t) {
                let last_tu = b.companion(SampleNode::Last(t))?;
                let last_u = b.companion(SampleNode::Last(u))?;
                let last_v = b.companion(SampleNode::Last(v))?;
                fs.push(Formula::implies(
                    Formula::Atom(TauAtom::IsOmega(last_tu)),
                    Formula::And(vec![
                        Formula::Atom(TauAtom::IsOmega(last_u)),
                        Formula::Atom(TauAtom::IsOmega(last_v)),
                    ]),
                ));
            }
        }
    }
    push_group(PsiGroup::Log, fs);

    // bounds
    let mut fs = Vec::new();
    for &(s, t, a) in &apps {
        if let TermNode::Uo(u) = *b.interner.term_node(t) {
            fs.push(Formula::Or(vec![
                Formula::Atom(TauAtom::IsZero(s)),
                Formula::Atom(TauAtom::IsOmega(s)),
            ]));
            let ua = b.companion(SampleNode::App(u, a))?;
            fs.push(Formula::implies(
                Formula::not(Formula::Atom(TauAtom::IsOmega(a))),
                Formula::iff(
                    Formula::Atom(TauAtom::IsOmega(s)),
                    Formula::Atom(TauAtom::IsOmega(ua)),
                ),
            ));
        }
    }
    for &(s, t) in &lasts {
        if matches!(b.interner.term_node(t), TermNode::Uo(_)) {
            fs.push(Formula::not(Formula::Atom(TauAtom::IsOmega(s))));
        }
    }
    // (¬O(t^o[last(t^o)]) ∧ ¬O(α)) ⇒ ¬O(t[α]), over pairs in Δ
    for &(s_to_last, t_o, arg) in &apps {
        let TermNode::Uo(u) = *b.interner.term_node(t_o) else { continue };
        if b.interner.sample_node(arg) != SampleNode::Last(t_o) {
            continue;
        }
        for (head, members) in &by_head {
            if *head != u {
                continue;
            }
            for &(s_ua, a) in members {
                fs.push(Formula::implies(
                    Formula::And(vec![
                        Formula::not(Formula::Atom(TauAtom::IsOmega(s_to_last))),
                        Formula::not(Formula::Atom(TauAtom::IsOmega(a))),
                    ]),
                    Formula::not(Formula::Atom(TauAtom::IsOmega(s_ua))),
                ));
            }
        }
    }
    push_group(PsiGroup::Bounds, fs);

    // right
    let mut fs = Vec::new();
    for &(s, t, a) in &apps {
        let TermNode::Ur(u) = *b.interner.term_node(t) else { continue };
        // s = t^r[a]
        let t_s = b.companion(SampleNode::App(u, s))?;
        fs.push(Formula::Atom(TauAtom::Leq(t_s, a)));
        let suc_s = b.companion(SampleNode::Suc(s))?;
        let t_suc = b.companion(SampleNode::App(u, suc_s))?;
        fs.push(Formula::implies(
            Formula::And(vec![
                Formula::not(Formula::Atom(TauAtom::IsZero(a))),
                Formula::not(Formula::Atom(TauAtom::IsOmega(a))),
                Formula::not(Formula::Atom(TauAtom::IsOmega(s))),
            ]),
            strictly_less(a, t_suc),
        ));
        if b.interner.sample_node(a) == SampleNode::Last(t) {
            let last_tr = a;
            let last_u = b.companion(SampleNode::Last(u))?;
            fs.push(Formula::implies(
                Formula::Atom(TauAtom::IsOmega(last_tr)),
                Formula::Atom(TauAtom::IsOmega(last_u)),
            ));
            fs.push(Formula::implies(
                Formula::not(Formula::Atom(TauAtom::IsOmega(s))),
                Formula::Atom(TauAtom::IsOmega(t_suc)),
            ));
        }
    }
    push_group(PsiGroup::Right, fs);

    // left
    let mut fs = Vec::new();
    for &(s, t, a) in &apps {
        let TermNode::Ul(u) = *b.interner.term_node(t) else { continue };
        // s = t^ℓ[a]
        let t_s = b.companion(SampleNode::App(u, s))?;
        fs.push(Formula::implies(
            Formula::not(Formula::Atom(TauAtom::IsOmega(s))),
            Formula::Atom(TauAtom::Leq(a, t_s)),
        ));
        let pre_s = b.companion(SampleNode::Pre(s))?;
        let t_pre = b.companion(SampleNode::App(u, pre_s))?;
        fs.push(Formula::implies(
            Formula::And(vec![
                Formula::not(Formula::Atom(TauAtom::IsZero(a))),
                Formula::not(Formula::Atom(TauAtom::IsOmega(a))),
                Formula::not(Formula::Atom(TauAtom::IsOmega(s))),
            ]),
            strictly_less(t_pre, a),
        ));
        fs.push(Formula::implies(
            Formula::And(vec![
                Formula::not(Formula::Atom(TauAtom::IsOmega(a))),
                Formula::Atom(TauAtom::IsOmega(s)),
            ]),
            strictly_less(t_s, a),
        ));
        if b.interner.sample_node(a) == SampleNode::Last(t) {
            let last_tl = a;
            let last_u = b.companion(SampleNode::Last(u))?;
            fs.push(Formula::implies(
                Formula::Atom(TauAtom::IsOmega(last_tl)),
                Formula::Atom(TauAtom::IsOmega(last_u)),
            ));
            fs.push(Formula::implies(
                Formula::not(Formula::Atom(TauAtom::IsOmega(s))),
                Formula::Atom(TauAtom::IsOmega(t_s)),
            ));
        }
    }
    push_group(PsiGroup::Left, fs);

    // fail
    let fs = goals.iter().map(|&g| strictly_less(g, kappa)).collect();
    push_group(PsiGroup::Fail, fs);

    // map each mon pair to its clause position in the deduplicated group
    let mut mon: HashMap<(SampleId, SampleId), usize> = HashMap::new();
    let deduped_struct = &groups
        .iter()
        .find(|(g, _)| *g == PsiGroup::Struct)
        .expect("struct group exists")
        .1;
    let index_of: HashMap<&TauFormula, usize> =
        deduped_struct.iter().enumerate().map(|(i, f)| (f, i)).collect();
    for (f, pair) in mon_formulas.iter().zip(mon_of_pos) {
        if let Some(&i) = index_of.get(f) {
            mon.entry(pair).or_insert(i);
        }
    }

    Ok(Psi { groups, mon })
}

/// Renders ψ grouped by clause set, for `--trace`.
pub fn render_psi(psi: &Psi, interner: &Interner) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (group, fs) in &psi.groups {
        let _ = writeln!(out, "{} ({} clauses):", group.name(), fs.len());
        for f in fs {
            let _ = writeln!(out, "  {}", render_tau(f, interner));
        }
    }
    out
}

pub fn render_tau(f: &TauFormula, interner: &Interner) -> String {
    match f {
        Formula::Atom(a) => {
            let p = |s: &SampleId| interner.print_sample(*s);
            match a {
                TauAtom::Leq(x, y) => format!("{} ≼ {}", p(x), p(y)),
                TauAtom::Succ(x, y) => format!("S({}, {})", p(x), p(y)),
                TauAtom::IsOmega(x) => format!("O({})", p(x)),
                TauAtom::IsZero(x) => format!("I({})", p(x)),
                TauAtom::Eq(x, y) => format!("{} ≗ {}", p(x), p(y)),
            }
        }
        Formula::Not(g) => match &**g {
            Formula::Atom(_) => format!("¬({})", render_tau(g, interner)),
            _ => format!("¬{}", render_tau(g, interner)),
        },
        Formula::And(gs) => {
            let parts: Vec<String> = gs.iter().map(|g| render_tau(g, interner)).collect();
            format!("({})", parts.join(" ∧ "))
        }
        Formula::Or(gs) => {
            let parts: Vec<String> = gs.iter().map(|g| render_tau(g, interner)).collect();
            format!("({})", parts.join(" ∨ "))
        }
        Formula::Implies(l, r) => {
            format!("({} → {})", render_tau(l, interner), render_tau(r, interner))
        }
        Formula::Iff(l, r) => {
            format!("({} ↔ {})", render_tau(l, interner), render_tau(r, interner))
        }
    }
}

/// The twenty-three diagram conditions, named by their soundness family.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Condition {
    Mon,
    Zero,
    Pre,
    Suc,
    LastCmp,
    LastOmega,
    IdApp,
    BotLast,
    CompApp,
    CompLastOmega,
    OValues,
    OInf,
    OLastFinite,
    OLastValueFinite,
    RLower,
    RFinite,
    RLastInf,
    RLastValueFinite,
    LFinite1,
    LFinite2,
    LInf,
    LLastInf,
    LLastValueFinite,
}

impl Condition {
    pub fn index(self) -> u8 {
        self as u8 + 1
    }
}

/// A violated condition with its witnessing samples.
#[derive(Clone, Debug)]
pub struct Violation {
    pub condition: Condition,
    pub witnesses: Vec<SampleId>,
    pub detail: String,
}

/// Checks all diagram conditions directly against δ, reporting every
/// violation. Requires Δ saturated so companion samples exist.
pub fn check_diagram(
    interner: &mut Interner,
    delta: &SampleSet,
    d: &Prediagram,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut violate = |condition: Condition, witnesses: Vec<SampleId>, detail: String| {
        out.push(Violation { condition, witnesses, detail });
    };

    let mut apps: Vec<(SampleId, TermId, SampleId)> = Vec::new();
    for s in delta.iter() {
        if let SampleNode::App(t, a) = interner.sample_node(s) {
            apps.push((s, t, a));
        }
    }

    // companion lookup; saturation guarantees membership
    macro_rules! comp {
        ($node:expr) => {{
            let id = interner.sample($node);
            debug_assert!(delta.contains(id), "Δ not closed under ⇝");
            id
        }};
    }

    for s in delta.iter() {
        match interner.sample_node(s) {
            SampleNode::Pre(a) => {
                if d.get(s) != d.get(a).pred() {
                    violate(Condition::Pre, vec![s, a], format!("{} ≠ {} ⊖ 1", d.get(s), d.get(a)));
                }
            }
            SampleNode::Suc(a) => {
                if d.get(s) != d.get(a).succ() {
                    violate(Condition::Suc, vec![s, a], format!("{} ≠ {} ⊕ 1", d.get(s), d.get(a)));
                }
            }
            _ => {}
        }
    }

    // monotonicity over same-head pairs
    for &(sa, t, a) in &apps {
        for &(sb, t2, bb) in &apps {
            if t == t2 && d.get(a) <= d.get(bb) && d.get(sa) > d.get(sb) {
                violate(
                    Condition::Mon,
                    vec![sa, sb],
                    format!("{} ≤ {} but {} > {}", d.get(a), d.get(bb), d.get(sa), d.get(sb)),
                );
            }
        }
    }

    for &(s, t, a) in &apps {
        let head = interner.term_node(t).clone();
        if d.get(a).is_zero() && !d.get(s).is_zero() {
            violate(Condition::Zero, vec![s], format!("argument is 0 but value is {}", d.get(s)));
        }

        let last_t = comp!(SampleNode::Last(t));
        let t_last = comp!(SampleNode::App(t, last_t));
        let cmp = d.get(last_t) <= d.get(a);
        let eq = d.get(s) == d.get(t_last);
        if cmp != eq {
            violate(
                Condition::LastCmp,
                vec![s, last_t, t_last],
                format!(
                    "last(t)={} vs arg={}, value={} vs value-at-last={}",
                    d.get(last_t),
                    d.get(a),
                    d.get(s),
                    d.get(t_last)
                ),
            );
        }
        if interner.sample_node(a) == SampleNode::Last(t)
            && d.get(last_t).is_omega()
            && !d.get(s).is_omega()
        {
            violate(Condition::LastOmega, vec![s], format!("last(t)=ω but t[last(t)]={}", d.get(s)));
        }

        match head {
            TermNode::Id => {
                if d.get(s) != d.get(a) {
                    violate(Condition::IdApp, vec![s, a], format!("{} ≠ {}", d.get(s), d.get(a)));
                }
            }
            TermNode::Bot => {
                let last_bot = comp!(SampleNode::Last(t));
                if !d.get(last_bot).is_zero() {
                    violate(Condition::BotLast, vec![last_bot], format!("last(⊥) = {}", d.get(last_bot)));
                }
            }
            TermNode::Comp(u, v) => {
                let va = comp!(SampleNode::App(v, a));
                let uva = comp!(SampleNode::App(u, va));
                if d.get(s) != d.get(uva) {
                    violate(Condition::CompApp, vec![s, uva], format!("{} ≠ {}", d.get(s), d.get(uva)));
                }
                if interner.sample_node(a) == SampleNode::Last(t) && d.get(a).is_omega() {
                    let last_u = comp!(SampleNode::Last(u));
                    let last_v = comp!(SampleNode::Last(v));
                    if !(d.get(last_u).is_omega() && d.get(last_v).is_omega()) {
                        violate(
                            Condition::CompLastOmega,
                            vec![s, last_u, last_v],
                            format!("last(tu)=ω but last(t)={}, last(u)={}", d.get(last_u), d.get(last_v)),
                        );
                    }
                }
            }
            TermNode::Uo(u) => {
                let val = d.get(s);
                if !(val.is_zero() || val.is_omega()) {
                    violate(Condition::OValues, vec![s], format!("t^o value {val} not in {{0, ω}}"));
                }
                let ua = comp!(SampleNode::App(u, a));
                if !d.get(a).is_omega() && (val.is_omega() != d.get(ua).is_omega()) {
                    violate(
                        Condition::OInf,
                        vec![s, ua],
                        format!("t^o[α]={} but t[α]={}", val, d.get(ua)),
                    );
                }
            }
            TermNode::Ur(u) => {
                let t_s = comp!(SampleNode::App(u, s));
                if d.get(t_s) > d.get(a) {
                    violate(
                        Condition::RLower,
                        vec![t_s, a],
                        format!("t[t^r[α]]={} > α={}", d.get(t_s), d.get(a)),
                    );
                }
                let suc_s = comp!(SampleNode::Suc(s));
                let t_suc = comp!(SampleNode::App(u, suc_s));
                let arg = d.get(a);
                if !arg.is_zero() && !arg.is_omega() && !d.get(s).is_omega() && arg >= d.get(t_suc) {
                    violate(
                        Condition::RFinite,
                        vec![s, t_suc],
                        format!("α={arg} not below t[suc(t^r[α])]={}", d.get(t_suc)),
                    );
                }
                if interner.sample_node(a) == SampleNode::Last(t) {
                    let last_u = comp!(SampleNode::Last(u));
                    if d.get(a).is_omega() && !d.get(last_u).is_omega() {
                        violate(
                            Condition::RLastInf,
                            vec![a, last_u],
                            format!("last(t^r)=ω but last(t)={}", d.get(last_u)),
                        );
                    }
                    if !d.get(s).is_omega() && !d.get(t_suc).is_omega() {
                        violate(
                            Condition::RLastValueFinite,
                            vec![s, t_suc],
                            format!(
                                "t^r[last(t^r)]={} finite but t[suc(·)]={}",
                                d.get(s),
                                d.get(t_suc)
                            ),
                        );
                    }
                }
            }
            TermNode::Ul(u) => {
                let t_s = comp!(SampleNode::App(u, s));
                let arg = d.get(a);
                if !d.get(s).is_omega() && arg > d.get(t_s) {
                    violate(
                        Condition::LFinite1,
                        vec![s, t_s],
                        format!("t^ℓ[α]={} finite but α={arg} > t[t^ℓ[α]]={}", d.get(s), d.get(t_s)),
                    );
                }
                let pre_s = comp!(SampleNode::Pre(s));
                let t_pre = comp!(SampleNode::App(u, pre_s));
                if !arg.is_zero() && !arg.is_omega() && !d.get(s).is_omega() && d.get(t_pre) >= arg {
                    violate(
                        Condition::LFinite2,
                        vec![s, t_pre],
                        format!("t[pre(t^ℓ[α])]={} not below α={arg}", d.get(t_pre)),
                    );
                }
                if !arg.is_omega() && d.get(s).is_omega() && d.get(t_s) >= arg {
                    violate(
                        Condition::LInf,
                        vec![s, t_s],
                        format!("t^ℓ[α]=ω but t[t^ℓ[α]]={} not below α={arg}", d.get(t_s)),
                    );
                }
                if interner.sample_node(a) == SampleNode::Last(t) {
                    let last_u = comp!(SampleNode::Last(u));
                    if arg.is_omega() && !d.get(last_u).is_omega() {
                        violate(
                            Condition::LLastInf,
                            vec![a, last_u],
                            format!("last(t^ℓ)=ω but last(t)={}", d.get(last_u)),
                        );
                    }
                    if !d.get(s).is_omega() && !d.get(t_s).is_omega() {
                        violate(
                            Condition::LLastValueFinite,
                            vec![s, t_s],
                            format!(
                                "t^ℓ[last(t^ℓ)]={} finite but t[t^ℓ[last(t^ℓ)]]={}",
                                d.get(s),
                                d.get(t_s)
                            ),
                        );
                    }
                }
            }
            TermNode::Var(_) => {}
        }
    }

    // o-soundness: last(t^o) finite, and the pairing condition
    for s in delta.iter() {
        if let SampleNode::Last(t) = interner.sample_node(s) {
            if matches!(interner.term_node(t), TermNode::Uo(_)) && d.get(s).is_omega() {
                violate(Condition::OLastFinite, vec![s], "last(t^o) = ω".to_owned());
            }
        }
    }
    for &(s_to_last, t_o, arg) in &apps.clone() {
        let TermNode::Uo(u) = *interner.term_node(t_o) else { continue };
        if interner.sample_node(arg) != SampleNode::Last(t_o) {
            continue;
        }
        if d.get(s_to_last).is_omega() {
            continue;
        }
        for &(s_ua, t2, a) in &apps {
            if t2 == u && !d.get(a).is_omega() && d.get(s_ua).is_omega() {
                violate(
                    Condition::OLastValueFinite,
                    vec![s_to_last, s_ua],
                    format!("t^o[last(t^o)] finite, α={} finite, but t[α]=ω", d.get(a)),
                );
            }
        }
    }

    out
}

/// The recursive diagram of a valuation (so every valuation restricts to a
/// diagram): δ(κ) = p, δ(t[α]) = ⟦t⟧θ(δ(α)), δ(last(t)) = last(⟦t⟧θ),
/// δ(pre(α)) = δ(α) ⊖ 1, δ(suc(α)) = δ(α) ⊕ 1.
pub fn diagram_from_valuation(
    interner: &Interner,
    delta: &SampleSet,
    theta: &Valuation,
    p: ExtNat,
) -> Prediagram {
    let mut warps: HashMap<TermId, crate::warp::Warp> = HashMap::new();
    let mut d = Prediagram::new();

    fn warp_of<'w>(
        interner: &Interner,
        theta: &Valuation,
        warps: &'w mut HashMap<TermId, crate::warp::Warp>,
        t: TermId,
    ) -> &'w crate::warp::Warp {
        if !warps.contains_key(&t) {
            let w = eval_basic(&interner.basic_term(t), theta);
            warps.insert(t, w);
        }
        &warps[&t]
    }

    fn value(
        interner: &Interner,
        theta: &Valuation,
        warps: &mut HashMap<TermId, crate::warp::Warp>,
        d: &mut Prediagram,
        p: ExtNat,
        s: SampleId,
    ) -> ExtNat {
        if let Some(v) = d.try_get(s) {
            return v;
        }
        let v = match interner.sample_node(s) {
            SampleNode::Kappa => p,
            SampleNode::App(t, a) => {
                let arg = value(interner, theta, warps, d, p, a);
                warp_of(interner, theta, warps, t).eval(arg)
            }
            SampleNode::Last(t) => warp_of(interner, theta, warps, t).last(),
            SampleNode::Pre(a) => value(interner, theta, warps, d, p, a).pred(),
            SampleNode::Suc(a) => value(interner, theta, warps, d, p, a).succ(),
        };
        d.set(s, v);
        v
    }

    for s in delta.iter() {
        value(interner, theta, &mut warps, &mut d, p, s);
    }
    d
}

pub use self::psi_eval::psi_holds_for;

mod psi_eval {
    use super::*;

    /// Convenience: does ψ hold under δ?
    pub fn psi_holds_for(psi: &Psi, d: &Prediagram) -> bool {
        psi.eval(d)
    }
}
