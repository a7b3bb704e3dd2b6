//! Rewriting any term into a meet of joins of basic terms.
//!
//! Two passes, each preserving equivalence in the time warp algebra:
//!
//! 1. [`elim_residuals`]: `⊤` becomes `⊥^ℓ`, and the binary residuals are
//!    expanded through their unary reductions `f\g = f^r g ∨ (⊤f)^r ∨ g^o`
//!    and `g/f = g f^ℓ ∨ (f^ℓ)^o`, keeping the defining patterns `t\id`,
//!    `id/t`, `⊤\t` as the unary operations themselves.
//! 2. [`distribute`]: meets and joins are pushed outwards. Composition
//!    distributes over both lattice operations on both sides; the unary
//!    operations distribute with a flip for `^r` and `^ℓ`
//!    (`(g∧h)^r = g^r ∨ h^r`, `(g∨h)^r = g^r ∧ h^r`, likewise for `^ℓ`)
//!    and without one for `^o`.
//!
//! The result shape is `⋀ᵢ ⋁ⱼ tᵢⱼ` with every `tᵢⱼ` basic. Joins are kept
//! as sorted, deduplicated n-ary lists. Distribution can blow up
//! exponentially, so a node budget guards it.

use thiserror::Error;

use crate::term::{BasicTerm, Query, Term};

/// A meet of joins of basic terms. Invariant: every join is non-empty,
/// sorted, and duplicate-free.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalForm {
    pub conjuncts: Vec<Vec<BasicTerm>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("normal form exceeded the node budget of {budget}")]
    NodeBudget { budget: u64 },
}

/// Residual-free fragment (modulo the unary operations).
enum UTerm {
    Var(String),
    Comp(Box<UTerm>, Box<UTerm>),
    Meet(Box<UTerm>, Box<UTerm>),
    Join(Box<UTerm>, Box<UTerm>),
    Uo(Box<UTerm>),
    Ul(Box<UTerm>),
    Ur(Box<UTerm>),
    Id,
    Bot,
}

fn to_uterm(t: &Term) -> UTerm {
    match t {
        Term::Var(x) => UTerm::Var(x.clone()),
        Term::Id => UTerm::Id,
        Term::Bot => UTerm::Bot,
        // ⊤ = ⊥^ℓ
        Term::Top => UTerm::Ul(Box::new(UTerm::Bot)),
        Term::Meet(l, r) => UTerm::Meet(Box::new(to_uterm(l)), Box::new(to_uterm(r))),
        Term::Join(l, r) => UTerm::Join(Box::new(to_uterm(l)), Box::new(to_uterm(r))),
        Term::Comp(l, r) => UTerm::Comp(Box::new(to_uterm(l)), Box::new(to_uterm(r))),
        Term::LRes(l, r) => {
            if **r == Term::Id {
                // t \ id = t^r
                UTerm::Ur(Box::new(to_uterm(l)))
            } else if **l == Term::Top {
                // ⊤ \ t = t^o
                UTerm::Uo(Box::new(to_uterm(r)))
            } else {
                // f \ g = f^r g ∨ (⊤f)^r ∨ g^o
                let f = to_uterm(l);
                let g = to_uterm(r);
                let top_f = UTerm::Comp(Box::new(UTerm::Ul(Box::new(UTerm::Bot))), Box::new(to_uterm(l)));
                UTerm::Join(
                    Box::new(UTerm::Join(
                        Box::new(UTerm::Comp(Box::new(UTerm::Ur(Box::new(f))), Box::new(g))),
                        Box::new(UTerm::Ur(Box::new(top_f))),
                    )),
                    Box::new(UTerm::Uo(Box::new(to_uterm(r)))),
                )
            }
        }
        Term::RRes(l, r) => {
            if **l == Term::Id {
                // id / t = t^ℓ
                UTerm::Ul(Box::new(to_uterm(r)))
            } else {
                // g / f = g f^ℓ ∨ (f^ℓ)^o
                let g = to_uterm(l);
                let fl = UTerm::Ul(Box::new(to_uterm(r)));
                let fl2 = UTerm::Ul(Box::new(to_uterm(r)));
                UTerm::Join(
                    Box::new(UTerm::Comp(Box::new(g), Box::new(fl))),
                    Box::new(UTerm::Uo(Box::new(fl2))),
                )
            }
        }
    }
}

fn from_uterm(t: &UTerm) -> Term {
    match t {
        UTerm::Var(x) => Term::Var(x.clone()),
        UTerm::Id => Term::Id,
        UTerm::Bot => Term::Bot,
        UTerm::Meet(l, r) => Term::meet(from_uterm(l), from_uterm(r)),
        UTerm::Join(l, r) => Term::join(from_uterm(l), from_uterm(r)),
        UTerm::Comp(l, r) => Term::comp(from_uterm(l), from_uterm(r)),
        UTerm::Uo(s) => Term::uo(from_uterm(s)),
        UTerm::Ul(s) => Term::ul(from_uterm(s)),
        UTerm::Ur(s) => Term::ur(from_uterm(s)),
    }
}

/// Rewrites a term so that the only residuals left are the unary patterns
/// `t\id`, `id/t`, `⊤\t`, and `⊤` only occurs inside `⊥^ℓ`.
pub fn elim_residuals(t: &Term) -> Term {
    from_uterm(&to_uterm(t))
}

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn charge(&mut self, amount: u64) -> Result<(), NormalizeError> {
        self.used = self.used.saturating_add(amount);
        if self.used > self.limit {
            Err(NormalizeError::NodeBudget { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

/// Composition of basic terms with the sound unit laws `id·t = t·id = t`
/// and `⊥∘t = ⊥` applied.
fn comp_basic(a: &BasicTerm, b: &BasicTerm) -> BasicTerm {
    match (a, b) {
        (BasicTerm::Id, _) => b.clone(),
        (_, BasicTerm::Id) => a.clone(),
        (BasicTerm::Bot, _) => BasicTerm::Bot,
        _ => BasicTerm::comp(a.clone(), b.clone()),
    }
}

fn push_join(join: &mut Vec<BasicTerm>, t: BasicTerm, budget: &mut Budget) -> Result<(), NormalizeError> {
    budget.charge(t.complexity())?;
    join.push(t);
    Ok(())
}

/// Is this basic term the canonical spelling of `⊤` (that is, `⊥^ℓ`)?
fn is_top(t: &BasicTerm) -> bool {
    matches!(t, BasicTerm::Ul(s) if **s == BasicTerm::Bot)
}

/// Sorts and deduplicates a join, applying the lattice unit laws:
/// `⊥` disjuncts vanish (unless alone) and a `⊤` disjunct absorbs the
/// whole join.
fn canonical_join(mut join: Vec<BasicTerm>) -> Vec<BasicTerm> {
    if join.iter().any(is_top) {
        return vec![BasicTerm::ul(BasicTerm::Bot)];
    }
    join.retain(|t| *t != BasicTerm::Bot);
    if join.is_empty() {
        return vec![BasicTerm::Bot];
    }
    join.sort();
    join.dedup();
    join
}

/// Removes duplicate conjuncts and conjuncts absorbed by a subset
/// conjunct (`J₁ ∧ J₂ = J₁` when `J₁ ⊆ J₂`, since the smaller join is the
/// smaller element); `⊤` conjuncts drop out of non-trivial meets.
fn dedup_conjuncts(conjuncts: Vec<Vec<BasicTerm>>) -> Vec<Vec<BasicTerm>> {
    use std::collections::BTreeSet;
    let mut seen = std::collections::HashSet::new();
    let mut kept: Vec<(Vec<BasicTerm>, BTreeSet<BasicTerm>)> = Vec::new();
    for c in conjuncts {
        if c.len() == 1 && is_top(&c[0]) {
            continue;
        }
        if seen.insert(c.clone()) {
            kept.push((c.clone(), c.into_iter().collect()));
        }
    }
    if kept.is_empty() {
        return vec![vec![BasicTerm::ul(BasicTerm::Bot)]];
    }
    let sets: Vec<BTreeSet<BasicTerm>> = kept.iter().map(|(_, s)| s.clone()).collect();
    kept.iter()
        .enumerate()
        .filter(|(i, (_, set))| {
            // drop if some other conjunct is a strict subset, or an equal
            // earlier one exists (handled by dedup above)
            !sets.iter().enumerate().any(|(j, other)| {
                j != *i && other.len() < set.len() && other.is_subset(set)
            })
        })
        .map(|(_, (c, _))| c.clone())
        .collect()
}

fn dist(t: &UTerm, budget: &mut Budget) -> Result<Vec<Vec<BasicTerm>>, NormalizeError> {
    let nf = match t {
        UTerm::Var(x) => vec![vec![BasicTerm::Var(x.clone())]],
        UTerm::Id => vec![vec![BasicTerm::Id]],
        UTerm::Bot => vec![vec![BasicTerm::Bot]],
        UTerm::Meet(l, r) => {
            let mut nf = dist(l, budget)?;
            nf.extend(dist(r, budget)?);
            nf
        }
        UTerm::Join(l, r) => {
            // (⋀ᵢ Aᵢ) ∨ (⋀ₖ Bₖ) = ⋀ᵢₖ (Aᵢ ∨ Bₖ)
            let left = dist(l, budget)?;
            let right = dist(r, budget)?;
            let mut out = Vec::new();
            for a in &left {
                for b in &right {
                    let mut join = Vec::new();
                    for x in a.iter().chain(b) {
                        push_join(&mut join, x.clone(), budget)?;
                    }
                    out.push(canonical_join(join));
                }
            }
            out
        }
        UTerm::Comp(l, r) => {
            // (⋀ᵢ ⋁ⱼ aᵢⱼ)(⋀ₖ ⋁ₗ bₖₗ) = ⋀ᵢₖ ⋁ⱼₗ aᵢⱼ bₖₗ
            let left = dist(l, budget)?;
            let right = dist(r, budget)?;
            let mut out = Vec::new();
            for a in &left {
                for b in &right {
                    let mut join = Vec::new();
                    for x in a {
                        for y in b {
                            push_join(&mut join, comp_basic(x, y), budget)?;
                        }
                    }
                    out.push(canonical_join(join));
                }
            }
            out
        }
        UTerm::Uo(s) => {
            // ^o distributes over both meet and join without flipping.
            let inner = dist(s, budget)?;
            let mut out = Vec::new();
            for conj in inner {
                let mut join = Vec::new();
                for x in conj {
                    push_join(&mut join, BasicTerm::uo(x), budget)?;
                }
                out.push(canonical_join(join));
            }
            out
        }
        UTerm::Ur(s) | UTerm::Ul(s) => {
            // (⋀ᵢ Jᵢ)^r = ⋁ᵢ (Jᵢ)^r and (⋁ⱼ tⱼ)^r = ⋀ⱼ tⱼ^r: the result is
            // a join of meets, which re-distributes into a meet of joins by
            // picking one element from each meet.
            let flip_l = matches!(t, UTerm::Ul(_));
            let inner = dist(s, budget)?;
            let meets: Vec<Vec<BasicTerm>> = inner
                .into_iter()
                .map(|conj| {
                    conj.into_iter()
                        .map(|x| if flip_l { BasicTerm::ul(x) } else { BasicTerm::ur(x) })
                        .collect()
                })
                .collect();
            let mut out: Vec<Vec<BasicTerm>> = vec![Vec::new()];
            for meet in &meets {
                let mut next = Vec::new();
                for partial in &out {
                    for choice in meet {
                        let mut join = partial.clone();
                        push_join(&mut join, choice.clone(), budget)?;
                        next.push(join);
                    }
                }
                out = next;
            }
            out.into_iter().map(canonical_join).collect()
        }
    };
    Ok(dedup_conjuncts(nf))
}

/// Default node budget for distribution, sized for terms up to complexity
/// around a dozen.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

/// Distributes a residual-eliminated term into a meet of joins of basic
/// terms.
pub fn distribute(t: &Term, node_budget: u64) -> Result<NormalForm, NormalizeError> {
    let mut budget = Budget { used: 0, limit: node_budget };
    let conjuncts = dist(&to_uterm(t), &mut budget)?;
    Ok(NormalForm { conjuncts })
}

/// Full normalization: residual elimination followed by distribution.
pub fn normal_form(t: &Term, node_budget: u64) -> Result<NormalForm, NormalizeError> {
    distribute(&elim_residuals(t), node_budget)
}

/// The unit goals of a term: one non-empty list of basic terms per
/// conjunct. `id ≤ t` holds iff `id ≤ ⋁ goal` holds for every goal.
///
/// Goals that are valid outright — those containing `id` or `⊤` as a
/// disjunct — are dropped here, which preserves the validity question but
/// not term equivalence (use [`normal_form`] for the equivalent term).
pub fn unit_goals(t: &Term, node_budget: u64) -> Result<Vec<Vec<BasicTerm>>, NormalizeError> {
    let mut goals = normal_form(t, node_budget)?.conjuncts;
    goals.retain(|join| !join.iter().any(|d| *d == BasicTerm::Id || is_top(d)));
    Ok(goals)
}

/// Unit goals of an arbitrary query: equations split, inequations
/// residuated into `id ≤ t/s`.
pub fn query_goals(q: &Query, node_budget: u64) -> Result<Vec<Vec<BasicTerm>>, NormalizeError> {
    let mut goals = Vec::new();
    for part in q.clone().split_equation() {
        match part.residuate() {
            Query::Inequation(_, t) => goals.extend(unit_goals(&t, node_budget)?),
            Query::UnitGoal(ts) => goals.push(ts),
            Query::Equation(..) => unreachable!("split_equation leaves no equations"),
        }
    }
    Ok(dedup_conjuncts(goals))
}

impl NormalForm {
    /// Rebuilds the meet-of-joins as a term.
    pub fn to_term(&self) -> Term {
        let join_term = |ts: &[BasicTerm]| {
            let mut it = ts.iter().map(BasicTerm::to_term);
            let first = it.next().expect("joins are non-empty");
            it.fold(first, Term::join)
        };
        let mut it = self.conjuncts.iter().map(|c| join_term(c));
        match it.next() {
            None => Term::Id, // empty meet: only for the empty term, unused
            Some(first) => it.fold(first, Term::meet),
        }
    }
}

impl std::fmt::Display for NormalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, conj) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, "\n& ")?;
            }
            let needs_parens = self.conjuncts.len() > 1 && conj.len() > 1;
            if needs_parens {
                write!(f, "(")?;
            }
            for (j, t) in conj.iter().enumerate() {
                if j > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{t}")?;
            }
            if needs_parens {
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}
