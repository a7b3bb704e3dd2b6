//! Satisfiability over the naturals for the σ-translation of ψ.
//!
//! The τ-formula ψ (interpreted in ω∪{ω}) is translated atom by atom into
//! the signature `≤, S, 0` over ℕ through the bijection `ι(0) = ω`,
//! `ι(n) = n−1`:
//!
//! * `O(x)`  ↦ `x = 0`
//! * `I(x)`  ↦ `S(0, x)`
//! * `S(x,y)` ↦ `(x = 0 ∧ y = 0) ∨ (x ≠ 0 ∧ S(x,y))`
//! * `x ≼ y` ↦ `y = 0 ∨ (x ≠ 0 ∧ x ≤ y)`
//! * `x ≗ y` ↦ `x = y`
//!
//! Every atom then reads as integer difference constraints, so the solver
//! is a DPLL-style search over per-conjunct disjuncts with a difference
//! graph as the theory: a conjunction of constraints is feasible iff
//! lower-bound propagation reaches a fixpoint (no negative cycle), and the
//! fixpoint is the least nonnegative model. Satisfying models are
//! re-evaluated against the formula before being returned.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::constraints::{Formula, Prediagram, Psi, TauAtom};
use crate::extnat::{ExtNat, Fin, Omega};
use crate::saturate::SampleId;

/// A σ variable: the constant 0 or a sample variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SVar {
    Zero,
    Sample(SampleId),
}

/// Atoms over ℕ: `x ≤ y`, `y = x + 1`, `x = y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum SigmaAtom {
    Leq(SVar, SVar),
    Succ(SVar, SVar),
    Eq(SVar, SVar),
}

pub type SigmaFormula = Formula<SigmaAtom>;

/// Lemma-21 substitution, atom-wise; boolean structure is untouched.
pub fn translate(psi: &Psi) -> Vec<SigmaFormula> {
    psi.formulas().map(translate_formula).collect()
}

pub fn translate_formula(f: &Formula<TauAtom>) -> SigmaFormula {
    f.map_atoms(&|atom| {
        let s = |id: SampleId| SVar::Sample(id);
        let eq0 = |v: SVar| Formula::Atom(SigmaAtom::Eq(v, SVar::Zero));
        match *atom {
            TauAtom::IsOmega(a) => eq0(s(a)),
            TauAtom::IsZero(a) => Formula::Atom(SigmaAtom::Succ(SVar::Zero, s(a))),
            TauAtom::Succ(a, b) => Formula::Or(vec![
                Formula::And(vec![eq0(s(a)), eq0(s(b))]),
                Formula::And(vec![
                    Formula::not(eq0(s(a))),
                    Formula::Atom(SigmaAtom::Succ(s(a), s(b))),
                ]),
            ]),
            TauAtom::Leq(a, b) => Formula::Or(vec![
                eq0(s(b)),
                Formula::And(vec![
                    Formula::not(eq0(s(a))),
                    Formula::Atom(SigmaAtom::Leq(s(a), s(b))),
                ]),
            ]),
            TauAtom::Eq(a, b) => Formula::Atom(SigmaAtom::Eq(s(a), s(b))),
        }
    })
}

/// A satisfying assignment over ℕ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub values: BTreeMap<SampleId, u64>,
}

impl Model {
    pub fn value(&self, v: SVar) -> u64 {
        match v {
            SVar::Zero => 0,
            SVar::Sample(s) => *self.values.get(&s).unwrap_or(&0),
        }
    }
}

/// Decodes a model through `ι`: 0 becomes ω, `n` becomes `n − 1`.
pub fn decode(model: &Model) -> Prediagram {
    let mut d = Prediagram::new();
    for (&s, &w) in &model.values {
        d.set(s, if w == 0 { Omega } else { Fin(w - 1) });
    }
    d
}

/// Inverse of [`decode`], for round-trip checks.
pub fn encode(d: &Prediagram, over: impl Iterator<Item = SampleId>) -> Model {
    let mut values = BTreeMap::new();
    for s in over {
        let w = match d.get(s) {
            Omega => 0,
            ExtNat::Fin(n) => n + 1,
        };
        values.insert(s, w);
    }
    Model { values }
}

/// Direct evaluation of a σ-formula in ℕ under a model.
pub fn eval_sigma(f: &SigmaFormula, m: &Model) -> bool {
    f.eval(&|atom| match *atom {
        SigmaAtom::Leq(a, b) => m.value(a) <= m.value(b),
        SigmaAtom::Succ(a, b) => m.value(b) == m.value(a) + 1,
        SigmaAtom::Eq(a, b) => m.value(a) == m.value(b),
    })
}

#[derive(Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Model),
    Unsat,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("solver exceeded its step budget of {budget}")]
    BudgetExceeded { budget: u64 },
    #[error("internal error: model fails to satisfy the formula it came from")]
    UnsoundModel,
}

pub const DEFAULT_SOLVER_BUDGET: u64 = 200_000_000;

/// A difference literal `x_lhs − x_rhs ≤ bound` over node indices.
///
/// The class is closed under negation: `¬(x − y ≤ c)` is `y − x ≤ −c−1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Lit {
    lhs: u32,
    rhs: u32,
    bound: i64,
}

impl Lit {
    fn negate(self) -> Lit {
        Lit { lhs: self.rhs, rhs: self.lhs, bound: -self.bound - 1 }
    }
}

/// Union-find for the equality preprocessing.
struct Uf {
    parent: Vec<u32>,
}

impl Uf {
    fn new(n: usize) -> Uf {
        Uf { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, x: u32) -> u32 {
        let p = self.parent[x as usize];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.parent[x as usize] = root;
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index wins, keeping node 0 (the constant) a root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

const INF: i64 = i64::MAX / 4;

/// Incrementally closed matrix of tightest difference bounds:
/// `d[i][j] ≤ c` records the derived constraint `x_i − x_j ≤ c`.
///
/// Asserting a literal runs one incremental Floyd–Warshall pass, so a
/// literal's status against the current state is a single lookup:
/// implied iff `d[u][v] ≤ c`, refuted iff `d[v][u] + c < 0`. The least
/// nonnegative model reads off row 0 as `x_i = −d[0][i]`.
struct Theory {
    n: usize,
    d: Vec<i64>,
    /// undo log of (flat index, previous value)
    trail: Vec<(u32, i64)>,
    /// asserted literals that contributed closure updates, tagged with
    /// their decision level, for conflict explanations
    edges: Vec<(Lit, u32)>,
    frames: Vec<(usize, usize)>,
    /// current decision level (for conflict sets)
    level: u32,
    steps: u64,
    budget: u64,
}

impl Theory {
    fn new(n: usize, budget: u64) -> Theory {
        let mut d = vec![INF; n * n];
        for i in 0..n {
            d[i * n + i] = 0;
        }
        for j in 0..n {
            // x_0 − x_j ≤ 0: every variable is nonnegative.
            d[j] = 0;
        }
        Theory {
            n,
            d,
            trail: Vec::new(),
            edges: Vec::new(),
            frames: Vec::new(),
            level: 0,
            steps: 0,
            budget,
        }
    }

    #[inline]
    fn get(&self, i: u32, j: u32) -> i64 {
        self.d[i as usize * self.n + j as usize]
    }

    fn implied(&self, l: Lit) -> bool {
        self.get(l.lhs, l.rhs) <= l.bound
    }

    fn refuted(&self, l: Lit) -> bool {
        let back = self.get(l.rhs, l.lhs);
        back < INF && back + l.bound < 0
    }

    fn push_frame(&mut self) {
        self.frames.push((self.trail.len(), self.edges.len()));
    }

    fn pop_frame(&mut self) {
        let (mark, emark) = self.frames.pop().expect("frame underflow");
        while self.trail.len() > mark {
            let (idx, old) = self.trail.pop().expect("trail underflow");
            self.d[idx as usize] = old;
        }
        self.edges.truncate(emark);
    }

    /// Reconstructs a chain of asserted literals realizing the derived
    /// bound `d[a][b]`, by depth-first search along tight steps (edges `e`
    /// with `e.bound + d[e.rhs][b] = d[cur][b]`). Zero-weight cycles make
    /// a greedy walk loop, so visited nodes are skipped; a simple tight
    /// path always exists because cycles on a shortest path carry weight
    /// zero. Steps through the built-in axioms (`x₀ − xⱼ ≤ 0`) contribute
    /// no literal.
    fn explain_path(&self, a: u32, b: u32) -> Option<Vec<(Lit, u32)>> {
        if self.get(a, b) >= INF {
            return None;
        }
        let mut visited = vec![false; self.n];
        let mut out = Vec::new();
        if self.explain_dfs(a, b, &mut visited, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn explain_dfs(
        &self,
        cur: u32,
        b: u32,
        visited: &mut [bool],
        out: &mut Vec<(Lit, u32)>,
    ) -> bool {
        if cur == b {
            return true;
        }
        visited[cur as usize] = true;
        let need = self.get(cur, b);
        if cur == 0 {
            for j in 1..self.n as u32 {
                if !visited[j as usize] && self.get(j, b) < INF && self.get(j, b) == need {
                    // axiom step 0 → j with weight 0
                    if self.explain_dfs(j, b, visited, out) {
                        return true;
                    }
                }
            }
        }
        for &(e, lvl) in &self.edges {
            if e.lhs == cur
                && !visited[e.rhs as usize]
                && self.get(e.rhs, b) < INF
                && e.bound + self.get(e.rhs, b) == need
            {
                out.push((e, lvl));
                if self.explain_dfs(e.rhs, b, visited, out) {
                    return true;
                }
                out.pop();
            }
        }
        false
    }

    /// Levels involved in refuting `l`, as a saturating bitset (level 127
    /// stands for "127 or deeper").
    fn refutation_levels(&self, l: Lit) -> LevelSet {
        match self.explain_path(l.rhs, l.lhs) {
            Some(path) => {
                let mut set: LevelSet = 1; // root facts
                for (_, lvl) in path {
                    set |= level_bit(lvl);
                }
                set
            }
            None => !0, // unknown: assume every level is involved
        }
    }

    /// Asserts a literal, tightening the closure. Returns `false` on
    /// conflict (negative cycle), in which case nothing was written.
    fn assert_lit(&mut self, l: Lit) -> Result<bool, SolveError> {
        if self.refuted(l) {
            return Ok(false);
        }
        if self.implied(l) {
            return Ok(true);
        }
        let n = self.n;
        let (u, v, c) = (l.lhs as usize, l.rhs as usize, l.bound);
        // Only rows and columns the new edge can tighten matter: by the
        // triangle inequality, a cell (i, j) improves only when the path
        // through the edge beats the direct route into v (rows) and out of
        // u (columns).
        let mut rows: Vec<usize> = Vec::new();
        for i in 0..n {
            let diu = self.d[i * n + u];
            if diu < INF && diu + c < self.d[i * n + v] {
                rows.push(i);
            }
        }
        let mut cols: Vec<usize> = Vec::new();
        for j in 0..n {
            let dvj = self.d[v * n + j];
            if dvj < INF && dvj + c < self.d[u * n + j] {
                cols.push(j);
            }
        }
        self.steps += (rows.len() * cols.len() + n) as u64;
        if self.steps > self.budget {
            return Err(SolveError::BudgetExceeded { budget: self.budget });
        }
        for &i in &rows {
            let diu = self.d[i * n + u];
            for &j in &cols {
                let nd = diu + c + self.d[v * n + j];
                let cell = i * n + j;
                if nd < self.d[cell] {
                    self.trail.push((cell as u32, self.d[cell]));
                    self.d[cell] = nd;
                }
            }
        }
        self.edges.push((l, self.level));
        debug_assert!((0..n).all(|i| self.d[i * n + i] >= 0), "closure broke consistency");
        Ok(true)
    }
}

/// CNF over difference literals. Every formula first rewrites its atoms
/// into conjunctions of literals, then distributes; clause-level
/// simplifications keep the result small:
/// duplicate literals over one edge keep only the weakest bound, clauses
/// containing a tautological pair vanish.
fn cnf(f: &SigmaFormula, positive: bool, node: &impl Fn(SVar) -> u32) -> Vec<Vec<Lit>> {
    match f {
        Formula::Atom(a) => {
            let lit = |x: SVar, y: SVar, c: i64| Lit { lhs: node(x), rhs: node(y), bound: c };
            let lits: Vec<Lit> = match *a {
                SigmaAtom::Leq(x, y) => vec![lit(x, y, 0)],
                SigmaAtom::Succ(x, y) => vec![lit(y, x, 1), lit(x, y, -1)],
                SigmaAtom::Eq(x, y) => vec![lit(x, y, 0), lit(y, x, 0)],
            };
            if positive {
                lits.into_iter().map(|l| vec![l]).collect()
            } else {
                vec![lits.into_iter().map(Lit::negate).collect()]
            }
        }
        Formula::Not(g) => cnf(g, !positive, node),
        Formula::And(gs) => {
            if positive {
                gs.iter().flat_map(|g| cnf(g, true, node)).collect()
            } else {
                cross_cnf(gs.iter().map(|g| cnf(g, false, node)))
            }
        }
        Formula::Or(gs) => {
            if positive {
                cross_cnf(gs.iter().map(|g| cnf(g, true, node)))
            } else {
                gs.iter().flat_map(|g| cnf(g, false, node)).collect()
            }
        }
        Formula::Implies(l, r) => {
            if positive {
                cross_cnf([cnf(l, false, node), cnf(r, true, node)].into_iter())
            } else {
                let mut out = cnf(l, true, node);
                out.extend(cnf(r, false, node));
                out
            }
        }
        Formula::Iff(l, r) => {
            let fwd = Formula::implies((**l).clone(), (**r).clone());
            let bwd = Formula::implies((**r).clone(), (**l).clone());
            if positive {
                let mut out = cnf(&fwd, true, node);
                out.extend(cnf(&bwd, true, node));
                out
            } else {
                cross_cnf([cnf(&fwd, false, node), cnf(&bwd, false, node)].into_iter())
            }
        }
    }
}

/// CNF of a disjunction of CNFs: distribute clause-wise.
fn cross_cnf(parts: impl Iterator<Item = Vec<Vec<Lit>>>) -> Vec<Vec<Lit>> {
    let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for a in &acc {
            for b in &part {
                let mut clause = a.clone();
                clause.extend_from_slice(b);
                next.push(clause);
            }
        }
        acc = next;
    }
    acc
}

/// Static truth value of a literal over nonnegative variables with node 0
/// pinned to zero.
fn static_value(l: Lit) -> Option<bool> {
    if l.lhs == l.rhs {
        return Some(l.bound >= 0);
    }
    if l.lhs == 0 {
        // −x ≤ c: always true for c ≥ 0
        if l.bound >= 0 {
            return Some(true);
        }
    }
    if l.rhs == 0 && l.bound < 0 {
        // x ≤ c < 0: impossible
        return Some(false);
    }
    None
}

/// Per-clause simplification; `None` means the clause is a tautology.
/// Statically false literals drop out, duplicate edges keep their weakest
/// bound, and complementary pairs covering all integers make the clause
/// true.
fn simplify_clause(clause: Vec<Lit>) -> Option<Vec<Lit>> {
    use std::collections::BTreeMap;
    let mut weakest: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for l in clause {
        match static_value(l) {
            Some(true) => return None,
            Some(false) => continue,
            None => {}
        }
        let entry = weakest.entry((l.lhs, l.rhs)).or_insert(l.bound);
        *entry = (*entry).max(l.bound);
    }
    // complementary pair (x−y ≤ c) ∨ (y−x ≤ c') with c + c' ≥ −1 is a
    // tautology over the integers
    for (&(u, v), &c) in &weakest {
        if let Some(&c2) = weakest.get(&(v, u)) {
            if c.saturating_add(c2) >= -1 {
                return None;
            }
        }
    }
    Some(weakest.into_iter().map(|((lhs, rhs), bound)| Lit { lhs, rhs, bound }).collect())
}

/// Decides satisfiability of a conjunction of σ-formulas over ℕ.
///
/// Deterministic: node numbering, clause ordering, and branch exploration
/// follow the input order. Returned models are the least solution of the
/// final constraint closure and are re-checked against the formula.
pub fn solve(conjuncts: &[SigmaFormula], budget: u64) -> Result<SolveOutcome, SolveError> {
    // Node numbering: 0 is the constant; samples in first-mention order.
    let mut order: Vec<SampleId> = Vec::new();
    let mut seen: std::collections::HashSet<SampleId> = Default::default();
    for f in conjuncts {
        f.visit_atoms(&mut |a| {
            let mut touch = |v: SVar| {
                if let SVar::Sample(s) = v {
                    if seen.insert(s) {
                        order.push(s);
                    }
                }
            };
            match *a {
                SigmaAtom::Leq(a, b) | SigmaAtom::Succ(a, b) | SigmaAtom::Eq(a, b) => {
                    touch(a);
                    touch(b);
                }
            }
        });
    }
    let index_of: std::collections::HashMap<SampleId, u32> =
        order.iter().enumerate().map(|(i, &s)| (s, i as u32 + 1)).collect();

    // Equality preprocessing: top-level `x = y` conjuncts merge nodes.
    let mut uf = Uf::new(order.len() + 1);
    let raw_node = |v: SVar| -> u32 {
        match v {
            SVar::Zero => 0,
            SVar::Sample(s) => index_of[&s],
        }
    };
    for f in conjuncts {
        if let Formula::Atom(SigmaAtom::Eq(a, b)) = f {
            uf.union(raw_node(*a), raw_node(*b));
        }
    }
    // Compact representatives into dense node numbers.
    let total = order.len() + 1;
    let mut dense: Vec<u32> = vec![u32::MAX; total];
    let mut nodes = 0u32;
    for i in 0..total {
        let r = uf.find(i as u32) as usize;
        if dense[r] == u32::MAX {
            dense[r] = nodes;
            nodes += 1;
        }
    }
    debug_assert_eq!(dense[0], 0, "the constant keeps node 0");
    let node = |v: SVar| -> u32 {
        let mut x = raw_node(v);
        let parent = &uf.parent;
        while parent[x as usize] != x {
            x = parent[x as usize];
        }
        dense[x as usize]
    };

    // CNF construction with dedup in first-seen order.
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut seen_clauses: std::collections::HashSet<Vec<Lit>> = Default::default();
    for f in conjuncts {
        if matches!(f, Formula::Atom(SigmaAtom::Eq(..))) {
            continue; // consumed by the union-find
        }
        for clause in cnf(f, true, &node) {
            if let Some(c) = simplify_clause(clause) {
                if c.is_empty() {
                    return Ok(SolveOutcome::Unsat);
                }
                if seen_clauses.insert(c.clone()) {
                    clauses.push(c);
                }
            }
        }
    }

    let theory = Theory::new(nodes as usize, budget);
    let mut watch: std::collections::HashMap<(u32, u32), Vec<u32>> = Default::default();
    for (i, c) in clauses.iter().enumerate() {
        register_watches(&mut watch, c, i as u32);
    }
    let mut solver = Solver {
        clauses,
        learned: Vec::new(),
        learned_set: Default::default(),
        watch,
        theory,
        explain_failures: 0,
        decisions: 0,
    };

    // Level-0 units.
    let mut pending: Vec<usize> = Vec::new();
    for i in 0..solver.clauses.len() {
        if solver.clauses[i].len() == 1 {
            let unit = solver.clauses[i][0];
            if solver.assert_learning(unit)?.is_err() {
                return Ok(SolveOutcome::Unsat);
            }
        } else {
            pending.push(i);
        }
    }

    let sat = solver.search(pending).map(|r| r.is_ok());
    if std::env::var_os("WARPCHECK_SOLVER_STATS").is_some() {
        eprintln!(
            "solver stats: nodes={} base_clauses={} learned={} explain_fail={} decisions={} steps={}",
            nodes,
            solver.clauses.len(),
            solver.learned.len(),
            solver.explain_failures,
            solver.decisions,
            solver.theory.steps,
        );
    }
    if !sat? {
        return Ok(SolveOutcome::Unsat);
    }

    // Least model: x_i = −d[0][i], read through the representatives.
    let mut values = BTreeMap::new();
    for (i, &s) in order.iter().enumerate() {
        let mut x = (i + 1) as u32;
        while uf.parent[x as usize] != x {
            x = uf.parent[x as usize];
        }
        let n = dense[x as usize];
        values.insert(s, (-solver.theory.get(0, n)) as u64);
    }
    let model = Model { values };
    for f in conjuncts {
        if !eval_sigma(f, &model) {
            return Err(SolveError::UnsoundModel);
        }
    }
    Ok(SolveOutcome::Sat(model))
}

const LEARNED_CLAUSE_MAX_LEN: usize = 64;
const LEARNED_DB_CAP: usize = 20_000;

/// Conflict sets are bitsets of decision levels; bit 0 is the root.
type LevelSet = u128;

fn level_bit(level: u32) -> LevelSet {
    1u128 << level.min(127)
}

/// `Err(set)` carries the decision levels a conflict depends on.
type Tri = Result<(), LevelSet>;

const LEARNED_FLAG: u32 = 1 << 31;

struct Solver {
    clauses: Vec<Vec<Lit>>,
    learned: Vec<Vec<Lit>>,
    learned_set: std::collections::HashSet<Vec<Lit>>,
    /// node pair (min, max) → clauses owning a literal on that pair
    watch: std::collections::HashMap<(u32, u32), Vec<u32>>,
    theory: Theory,
    explain_failures: u64,
    decisions: u64,
}

impl Solver {
    /// Asserts a literal. On conflict, learns the theory lemma
    /// `¬l ∨ ⋁ ¬(refuting path)` and reports the levels involved.
    fn assert_learning(&mut self, l: Lit) -> Result<Tri, SolveError> {
        if self.theory.assert_lit(l)? {
            return Ok(Ok(()));
        }
        match self.theory.explain_path(l.rhs, l.lhs) {
            Some(path) => {
                let mut set: LevelSet = 1 | level_bit(self.theory.level);
                let mut clause: Vec<Lit> = Vec::with_capacity(path.len() + 1);
                for (e, lvl) in path {
                    set |= level_bit(lvl);
                    clause.push(e.negate());
                }
                clause.push(l.negate());
                self.learn(clause);
                Ok(Err(set))
            }
            None => {
                self.explain_failures += 1;
                Ok(Err(!0))
            }
        }
    }

    fn learn(&mut self, clause: Vec<Lit>) {
        if self.learned.len() >= LEARNED_DB_CAP {
            return;
        }
        if let Some(c) = simplify_clause(clause) {
            if c.len() >= 2
                && c.len() <= LEARNED_CLAUSE_MAX_LEN
                && !self.learned_set.contains(&c)
            {
                self.learned_set.insert(c.clone());
                let id = self.learned.len() as u32 | LEARNED_FLAG;
                register_watches(&mut self.watch, &c, id);
                self.learned.push(c);
            }
        }
    }

    /// Conflict set of a fully refuted clause (learning the pure-theory
    /// lemma behind it along the way when it is short enough).
    fn dead_clause_conflict(&mut self, cr: ClauseRef) -> LevelSet {
        let clause = self.clause(cr).to_vec();
        let mut set: LevelSet = 1;
        let mut lemma: Vec<Lit> = Vec::new();
        let mut lemma_ok = true;
        for l in clause {
            match self.theory.explain_path(l.rhs, l.lhs) {
                Some(path) => {
                    for (e, lvl) in path {
                        set |= level_bit(lvl);
                        if lemma_ok {
                            lemma.push(e.negate());
                        }
                    }
                }
                None => {
                    self.explain_failures += 1;
                    return !0;
                }
            }
            if lemma.len() > 4 * LEARNED_CLAUSE_MAX_LEN {
                lemma_ok = false;
            }
        }
        if lemma_ok {
            self.learn(lemma);
        }
        set
    }

    fn clause(&self, c: ClauseRef) -> &[Lit] {
        match c {
            ClauseRef::Base(i) => &self.clauses[i],
            ClauseRef::Learned(i) => &self.learned[i],
        }
    }

    /// DPLL over pending clauses with exhaustive theory propagation and
    /// conflict-directed backjumping: every failure reports the decision
    /// levels it depends on, and a subtree whose conflicts do not involve
    /// the current decision fails past it without trying siblings.
    fn search(&mut self, mut pending: Vec<usize>) -> Result<Tri, SolveError> {
        let my_level = self.theory.level;
        let mut live_learned: Vec<usize> = (0..self.learned.len()).collect();
        // One full filtering pass; afterwards only clauses whose literal
        // pairs were touched by closure updates get rescanned.
        {
            let mut keep: Vec<usize> = Vec::with_capacity(pending.len());
            let mut watermark = self.theory.trail.len();
            let known = self.learned.len();
            for &ci in &pending {
                match self.scan_clause(ClauseRef::Base(ci))? {
                    ClauseState::Satisfied => {}
                    ClauseState::Dead(set) => return Ok(Err(set)),
                    ClauseState::Unit => {}
                    ClauseState::Open(_) => keep.push(ci),
                }
            }
            pending = keep;
            let mut keep: Vec<usize> = Vec::with_capacity(live_learned.len());
            for &ci in &live_learned {
                match self.scan_clause(ClauseRef::Learned(ci))? {
                    ClauseState::Satisfied => {}
                    ClauseState::Dead(set) => return Ok(Err(set)),
                    ClauseState::Unit => {}
                    ClauseState::Open(_) => keep.push(ci),
                }
            }
            live_learned = keep;
            live_learned.extend(known..self.learned.len());

            // dirty rounds
            loop {
                let trail_now = self.theory.trail.len();
                let known = self.learned.len();
                if watermark == trail_now && known == self.learned.len() {
                    break;
                }
                let mut dirty: Vec<u32> = Vec::new();
                for &(cell, _) in &self.theory.trail[watermark..] {
                    let i = cell / self.theory.n as u32;
                    let j = cell % self.theory.n as u32;
                    let key = if i < j { (i, j) } else { (j, i) };
                    if let Some(ids) = self.watch.get(&key) {
                        dirty.extend_from_slice(ids);
                    }
                }
                watermark = trail_now;
                dirty.sort_unstable();
                dirty.dedup();
                let mut any = false;
                for id in dirty {
                    let cr = if id & LEARNED_FLAG != 0 {
                        let idx = (id & !LEARNED_FLAG) as usize;
                        if live_learned.binary_search(&idx).is_err() {
                            continue;
                        }
                        ClauseRef::Learned(idx)
                    } else {
                        if pending.binary_search(&(id as usize)).is_err() {
                            continue;
                        }
                        ClauseRef::Base(id as usize)
                    };
                    match self.scan_clause(cr)? {
                        ClauseState::Satisfied => {}
                        ClauseState::Dead(set) => return Ok(Err(set)),
                        ClauseState::Unit => any = true,
                        ClauseState::Open(_) => {}
                    }
                }
                let fresh = self.learned.len();
                if known < fresh {
                    live_learned.extend(known..fresh);
                    for idx in known..fresh {
                        match self.scan_clause(ClauseRef::Learned(idx))? {
                            ClauseState::Satisfied => {}
                            ClauseState::Dead(set) => return Ok(Err(set)),
                            ClauseState::Unit => any = true,
                            ClauseState::Open(_) => {}
                        }
                    }
                }
                if !any && self.theory.trail.len() == watermark {
                    break;
                }
            }
        }
        if pending.is_empty() {
            return Ok(Ok(()));
        }

        // Decision: fewest live literals, first such clause.
        let mut best: Option<(usize, Vec<Lit>)> = None;
        for (pos, &ci) in pending.iter().enumerate() {
            let live: Vec<Lit> = self.clauses[ci]
                .iter()
                .copied()
                .filter(|&l| !self.theory.refuted(l))
                .collect();
            if best.as_ref().map(|(_, b)| live.len() < b.len()).unwrap_or(true) {
                let binary = live.len() <= 2;
                best = Some((pos, live));
                if binary {
                    break; // cannot do better than a binary decision
                }
            }
        }
        let (pos, live) = best.expect("pending is non-empty");
        self.decisions += 1;
        pending.remove(pos);
        debug_assert!(!live.is_empty());
        let last = live.len() - 1;
        // Case split on the first true literal of the clause: branch k
        // asserts ¬l₁ … ¬lₖ₋₁ ∧ lₖ, so later branches search under the
        // accumulated negations.
        let mut union: LevelSet = 0;
        self.theory.push_frame();
        self.theory.level = my_level + 1;
        for (k, &lit) in live.iter().enumerate() {
            self.theory.push_frame();
            match self.assert_learning(lit)? {
                Ok(()) => {
                    let rest =
                        if k == last { std::mem::take(&mut pending) } else { pending.clone() };
                    match self.search(rest)? {
                        Ok(()) => {
                            // Frames stay pushed on success so the final
                            // closure remains readable.
                            return Ok(Ok(()));
                        }
                        Err(set) => {
                            if set & level_bit(my_level + 1) == 0 {
                                // The subtree failed independently of this
                                // decision: fail past it.
                                self.theory.pop_frame();
                                self.theory.pop_frame();
                                self.theory.level = my_level;
                                return Ok(Err(set));
                            }
                            union |= set;
                        }
                    }
                }
                Err(set) => union |= set,
            }
            self.theory.pop_frame();
            if k < last {
                if let Err(set) = self.assert_learning(lit.negate())? {
                    union |= set;
                    break; // remaining branches are all refuted
                }
            }
        }
        self.theory.pop_frame();
        self.theory.level = my_level;
        Ok(Err(union & !level_bit(my_level + 1)))
    }

    fn scan_clause(&mut self, cr: ClauseRef) -> Result<ClauseState, SolveError> {
        let clause = self.clause(cr);
        let mut live: Option<Lit> = None;
        let mut live_count = 0usize;
        for &l in clause {
            if self.theory.implied(l) {
                return Ok(ClauseState::Satisfied);
            }
            if !self.theory.refuted(l) {
                live_count += 1;
                if live.is_none() {
                    live = Some(l);
                }
            }
        }
        match live_count {
            0 => {
                let set = self.dead_clause_conflict(cr);
                Ok(ClauseState::Dead(set))
            }
            1 => {
                if let Err(set) = self.assert_learning(live.expect("one live literal"))? {
                    return Ok(ClauseState::Dead(set));
                }
                Ok(ClauseState::Unit)
            }
            n => Ok(ClauseState::Open(n)),
        }
    }
}

fn register_watches(
    watch: &mut std::collections::HashMap<(u32, u32), Vec<u32>>,
    clause: &[Lit],
    id: u32,
) {
    for l in clause {
        let key = if l.lhs < l.rhs { (l.lhs, l.rhs) } else { (l.rhs, l.lhs) };
        let ids = watch.entry(key).or_default();
        if ids.last() != Some(&id) {
            ids.push(id);
        }
    }
}

#[derive(Clone, Copy)]
enum ClauseRef {
    Base(usize),
    Learned(usize),
}

enum ClauseState {
    Satisfied,
    Dead(LevelSet),
    Unit,
    Open(usize),
}

/// Renders a complete SMT-LIB2 script for external cross-checking: one
/// integer constant per variable, nonnegativity assertions, one assertion
/// per conjunct, `check-sat`, `get-model`.
pub fn emit_smtlib(conjuncts: &[SigmaFormula], name_of: &dyn Fn(SampleId) -> String) -> String {
    use std::fmt::Write;

    let mut order: Vec<SampleId> = Vec::new();
    let mut seen: std::collections::HashSet<SampleId> = Default::default();
    for f in conjuncts {
        f.visit_atoms(&mut |a| {
            let mut touch = |v: SVar| {
                if let SVar::Sample(s) = v {
                    if seen.insert(s) {
                        order.push(s);
                    }
                }
            };
            match *a {
                SigmaAtom::Leq(a, b) | SigmaAtom::Succ(a, b) | SigmaAtom::Eq(a, b) => {
                    touch(a);
                    touch(b);
                }
            }
        });
    }

    let var = |v: SVar| -> String {
        match v {
            SVar::Zero => "0".to_owned(),
            SVar::Sample(s) => format!("|{}|", name_of(s)),
        }
    };

    fn render(f: &SigmaFormula, var: &dyn Fn(SVar) -> String, out: &mut String) {
        match f {
            Formula::Atom(a) => match *a {
                SigmaAtom::Leq(x, y) => {
                    let _ = write!(out, "(<= {} {})", var(x), var(y));
                }
                SigmaAtom::Succ(x, y) => {
                    let _ = write!(out, "(= {} (+ {} 1))", var(y), var(x));
                }
                SigmaAtom::Eq(x, y) => {
                    let _ = write!(out, "(= {} {})", var(x), var(y));
                }
            },
            Formula::Not(g) => {
                out.push_str("(not ");
                render(g, var, out);
                out.push(')');
            }
            Formula::And(gs) => {
                if gs.is_empty() {
                    out.push_str("true");
                    return;
                }
                out.push_str("(and");
                for g in gs {
                    out.push(' ');
                    render(g, var, out);
                }
                out.push(')');
            }
            Formula::Or(gs) => {
                if gs.is_empty() {
                    out.push_str("false");
                    return;
                }
                out.push_str("(or");
                for g in gs {
                    out.push(' ');
                    render(g, var, out);
                }
                out.push(')');
            }
            Formula::Implies(l, r) => {
                out.push_str("(=> ");
                render(l, var, out);
                out.push(' ');
                render(r, var, out);
                out.push(')');
            }
            Formula::Iff(l, r) => {
                out.push_str("(= ");
                render(l, var, out);
                out.push(' ');
                render(r, var, out);
                out.push(')');
            }
        }
    }

    let mut out = String::new();
    out.push_str("(set-logic QF_LIA)\n");
    for &s in &order {
        let _ = writeln!(out, "(declare-const |{}| Int)", name_of(s));
    }
    for &s in &order {
        let _ = writeln!(out, "(assert (>= |{}| 0))", name_of(s));
    }
    for f in conjuncts {
        out.push_str("(assert ");
        render(f, &var, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saturate::Interner;

    fn sv(i: u32) -> SVar {
        // fabricate distinct sample ids through an interner
        let mut interner = Interner::new();
        let mut last = interner.kappa();
        for _ in 0..i {
            last = interner.sample(crate::saturate::SampleNode::Suc(last));
        }
        SVar::Sample(last)
    }

    #[test]
    fn negative_cycle_is_unsat() {
        // x ≤ y ∧ y + 1 ≤ x
        let x = sv(0);
        let y = sv(1);
        let conjuncts = vec![
            Formula::Atom(SigmaAtom::Leq(x, y)),
            Formula::not(Formula::Atom(SigmaAtom::Leq(x, y))),
        ];
        assert_eq!(solve(&conjuncts, 10_000).unwrap(), SolveOutcome::Unsat);
    }

    #[test]
    fn successor_of_zero_pins_one() {
        let x = sv(0);
        let conjuncts = vec![Formula::Atom(SigmaAtom::Succ(SVar::Zero, x))];
        match solve(&conjuncts, 10_000).unwrap() {
            SolveOutcome::Sat(m) => assert_eq!(m.value(x), 1),
            SolveOutcome::Unsat => panic!("should be satisfiable"),
        }
    }

    #[test]
    fn least_models_are_returned() {
        // x ≥ 1 ∧ y = x + 1, minimal: x = 1, y = 2
        let x = sv(0);
        let y = sv(1);
        let conjuncts = vec![
            Formula::not(Formula::Atom(SigmaAtom::Eq(x, SVar::Zero))),
            Formula::Atom(SigmaAtom::Succ(x, y)),
        ];
        match solve(&conjuncts, 10_000).unwrap() {
            SolveOutcome::Sat(m) => {
                assert_eq!(m.value(x), 1);
                assert_eq!(m.value(y), 2);
            }
            SolveOutcome::Unsat => panic!("should be satisfiable"),
        }
    }

    #[test]
    fn disjunction_needs_search() {
        // (x = 0 ∨ y = 0) ∧ x = y + 1  → x ≥ 1 so x ≠ 0, hence y = 0, x = 1
        let x = sv(0);
        let y = sv(1);
        let conjuncts = vec![
            Formula::Or(vec![
                Formula::Atom(SigmaAtom::Eq(x, SVar::Zero)),
                Formula::Atom(SigmaAtom::Eq(y, SVar::Zero)),
            ]),
            Formula::Atom(SigmaAtom::Succ(y, x)),
        ];
        match solve(&conjuncts, 10_000).unwrap() {
            SolveOutcome::Sat(m) => {
                assert_eq!(m.value(y), 0);
                assert_eq!(m.value(x), 1);
            }
            SolveOutcome::Unsat => panic!("should be satisfiable"),
        }
    }

    #[test]
    fn decode_applies_the_iota_bijection() {
        let mut interner = Interner::new();
        let a = interner.kappa();
        let b = interner.sample(crate::saturate::SampleNode::Suc(a));
        let model = Model { values: [(a, 0u64), (b, 3u64)].into() };
        let d = decode(&model);
        assert_eq!(d.get(a), Omega);
        assert_eq!(d.get(b), Fin(2));
        let back = encode(&d, [a, b].into_iter());
        assert_eq!(back, model);
    }

    #[test]
    fn smtlib_script_shape() {
        let x = sv(0);
        let conjuncts = vec![Formula::Atom(SigmaAtom::Succ(SVar::Zero, x))];
        let script = emit_smtlib(&conjuncts, &|_| "v0".to_owned());
        assert!(script.contains("(set-logic QF_LIA)"));
        assert!(script.contains("(declare-const |v0| Int)"));
        assert!(script.contains("(assert (>= |v0| 0))"));
        assert!(script.contains("(assert (= |v0| (+ 0 1)))"));
        assert!(script.ends_with("(check-sat)\n(get-model)\n"));
    }
}
