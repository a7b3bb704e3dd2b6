//! The end-to-end decision procedure and its harnesses.
//!
//! `decide` runs, per unit goal: saturate → build ψ → translate to σ →
//! solve over ℕ → decode → extract a valuation → verify. A goal with an
//! unsatisfiable σ-formula is valid; a satisfiable one yields a
//! counterexample which must re-verify through the warp calculator before
//! it is reported — the pipeline refuses to emit an unverified `Invalid`.
//!
//! `brute_refute` is an independent oracle: it evaluates the original
//! query directly under small valuations drawn from a pool, touching none
//! of the saturation/solver machinery. `fuzz` drives both on random
//! queries and cross-checks them (plus an external SMT solver when one is
//! configured).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::constraints::{build_psi, check_diagram, render_psi, Condition, ConstraintError, Psi};
use crate::extnat::{ExtNat, Fin, Omega};
use crate::extract::{valuation_from_diagram, verify, Counterexample, ExtractError};
use crate::generate::{random_query, random_warp, GenLimits};
use crate::interp::{eval_term, Valuation};
use crate::normalize::{query_goals, NormalizeError, DEFAULT_NODE_BUDGET};
use crate::saturate::{saturate, Interner, SaturateError, DEFAULT_SAMPLE_BUDGET};
use crate::solve::{
    decode, emit_smtlib, solve, translate, translate_formula, SolveError, SolveOutcome,
    DEFAULT_SOLVER_BUDGET,
};
use crate::term::{parse_query, BasicTerm, ParseError, Query, Term};
use crate::warp::{Segment, Slope, Tail, Warp};

/// Resource budgets for one decision.
#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    pub normalize_nodes: u64,
    pub saturation_samples: usize,
    pub solver_steps: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            normalize_nodes: DEFAULT_NODE_BUDGET,
            saturation_samples: DEFAULT_SAMPLE_BUDGET,
            solver_steps: DEFAULT_SOLVER_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DecideOptions {
    pub budgets: Budgets,
    /// Collect a per-goal dump of ψ grouped by clause set.
    pub trace: bool,
    /// Cross-check every goal's σ-formula against an external SMT solver.
    pub external_solver: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Saturate(#[from] SaturateError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("internal error: extracted counterexample failed verification for goal {goal}")]
    UnverifiedCounterexample { goal: String },
    #[error("internal error: satisfying model is not a diagram ({0})")]
    NotADiagram(String),
    #[error("external solver failed: {0}")]
    ExternalSolver(String),
    #[error("external solver disagrees with the built-in core on goal {goal}: {external} vs {builtin}")]
    SolverMismatch { goal: String, external: String, builtin: String },
}

/// Outcome of a decision.
#[derive(Clone, Debug)]
pub enum Verdict {
    Valid,
    Invalid(Counterexample),
}

#[derive(Debug)]
pub struct Decision {
    pub verdict: Verdict,
    /// Number of unit goals examined.
    pub goals: usize,
    /// ψ dumps per goal when tracing is on.
    pub trace: Vec<String>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Decides one unit goal `id ≤ t₁ ∨ ⋯ ∨ tₙ`. Returns a verified
/// counterexample, or `None` when the goal is valid.
fn decide_goal(
    goal: &[BasicTerm],
    opts: &DecideOptions,
    trace: Option<&mut String>,
) -> Result<Option<Counterexample>, PipelineError> {
    let mut interner = Interner::new();
    let kappa = interner.kappa();
    let roots: Vec<_> = goal
        .iter()
        .map(|t| {
            let id = interner.intern_basic(t);
            interner.app(id, kappa)
        })
        .collect();
    let delta = saturate(&mut interner, &roots, opts.budgets.saturation_samples)?;
    let psi = build_psi(&mut interner, &delta, kappa, &roots)?;
    if let Some(sink) = trace {
        sink.push_str(&render_psi(&psi, &interner));
    }

    // Monotonicity clauses are activated lazily: the rest of ψ is solved
    // first, and any satisfying model that falsifies a monotonicity
    // condition names the offending application pair, whose clause then
    // joins the formula. Unsatisfiability of the relaxed formula already
    // implies unsatisfiability of ψ, so `Valid` verdicts need no rounds.
    let mut sigma: Vec<_> = psi.formulas_without_mon().map(translate_formula).collect();
    let mut active_mon: std::collections::HashSet<(
        crate::saturate::SampleId,
        crate::saturate::SampleId,
    )> = Default::default();
    let (model, diagram) = loop {
        let outcome = solve(&sigma, opts.budgets.solver_steps)?;
        let model = match outcome {
            SolveOutcome::Unsat => {
                if let Some(solver) = &opts.external_solver {
                    cross_check_external(solver, &psi, &interner, goal, false)?;
                }
                return Ok(None);
            }
            SolveOutcome::Sat(model) => model,
        };
        let diagram = decode(&model);
        let violations = check_diagram(&mut interner, &delta, &diagram);
        if violations.is_empty() {
            if let Some(solver) = &opts.external_solver {
                cross_check_external(solver, &psi, &interner, goal, true)?;
            }
            break (model, diagram);
        }
        let mut progressed = false;
        for v in &violations {
            if v.condition == Condition::Mon && v.witnesses.len() == 2 {
                let pair = (v.witnesses[0], v.witnesses[1]);
                if active_mon.insert(pair) {
                    if let Some(f) = psi.mon_formula(pair) {
                        sigma.push(translate_formula(f));
                        progressed = true;
                    }
                }
            }
        }
        if !progressed {
            let v = &violations[0];
            return Err(PipelineError::NotADiagram(format!(
                "condition {:?} violated at {}",
                v.condition,
                v.witnesses
                    .iter()
                    .map(|&s| interner.print_sample(s))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
    };
    let _ = &model;
    let theta = valuation_from_diagram(&interner, &delta, &diagram)?;
    let p = diagram.get(kappa);
    if !verify(&theta, p, goal) {
        return Err(PipelineError::UnverifiedCounterexample { goal: goal_text(goal) });
    }
    Ok(Some(Counterexample {
        p,
        valuation: theta.into_iter().collect(),
        verified: true,
        goals: goal.to_vec(),
    }))
}

fn goal_text(goal: &[BasicTerm]) -> String {
    goal.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" | ")
}

/// Decides a query: `Valid`, or `Invalid` with a machine-verified
/// counterexample.
///
/// Conjunct goals run concurrently; once some goal is refuted, goals with
/// a higher index are skipped, and the lowest refuted index wins, so the
/// reported counterexample is deterministic.
pub fn decide(q: &Query, opts: &DecideOptions) -> Result<Decision, PipelineError> {
    let goals = query_goals(q, opts.budgets.normalize_nodes)?;
    let mut traces: Vec<String> = vec![String::new(); goals.len()];

    let best = AtomicUsize::new(usize::MAX);
    let results: Vec<Result<Option<Counterexample>, PipelineError>> = if opts.trace {
        // Tracing runs sequentially so the dumps stay in goal order.
        goals
            .iter()
            .zip(traces.iter_mut())
            .map(|(g, t)| decide_goal(g, opts, Some(t)))
            .collect()
    } else {
        goals
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                if i > best.load(Ordering::Relaxed) {
                    return Ok(None); // a lower goal already refuted the query
                }
                let r = decide_goal(g, opts, None);
                if matches!(r, Ok(Some(_))) {
                    best.fetch_min(i, Ordering::Relaxed);
                }
                r
            })
            .collect()
    };

    // Lowest-index Invalid wins; errors before it surface.
    let mut verdict = Verdict::Valid;
    for r in results {
        match r {
            Ok(Some(ce)) => {
                let mut ce = ce;
                // Unconstrained query variables read as the identity warp.
                for x in q.free_vars() {
                    ce.valuation.entry(x).or_insert_with(Warp::id);
                }
                verdict = Verdict::Invalid(ce);
                break;
            }
            Ok(None) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Decision { verdict, goals: goals.len(), trace: traces.into_iter().filter(|t| !t.is_empty()).collect() })
}

/// Parses and decides a textual query.
pub fn decide_str(src: &str, opts: &DecideOptions) -> Result<Decision, PipelineError> {
    decide(&parse_query(src)?, opts)
}

/// Emits one SMT-LIB2 script per unit goal of the query.
pub fn emit_smt_scripts(q: &Query, budgets: &Budgets) -> Result<Vec<String>, PipelineError> {
    let goals = query_goals(q, budgets.normalize_nodes)?;
    let mut out = Vec::new();
    for goal in &goals {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let roots: Vec<_> = goal
            .iter()
            .map(|t| {
                let id = interner.intern_basic(t);
                interner.app(id, kappa)
            })
            .collect();
        let delta = saturate(&mut interner, &roots, budgets.saturation_samples)?;
        let psi = build_psi(&mut interner, &delta, kappa, &roots)?;
        let sigma = translate(&psi);
        out.push(emit_smtlib(&sigma, &|s| interner.print_sample(s)));
    }
    Ok(out)
}

/// Cross-checks the full ψ against an external SMT solver; the built-in
/// verdict corresponds to ψ exactly even though monotonicity clauses are
/// activated lazily.
fn cross_check_external(
    solver: &PathBuf,
    psi: &Psi,
    interner: &Interner,
    goal: &[BasicTerm],
    builtin_sat: bool,
) -> Result<(), PipelineError> {
    let sigma = translate(psi);
    let script = emit_smtlib(&sigma, &|s| interner.print_sample(s));
    let external = run_external_solver(solver, &script)?;
    let builtin = if builtin_sat { "sat" } else { "unsat" };
    if external != builtin {
        return Err(PipelineError::SolverMismatch {
            goal: goal_text(goal),
            external,
            builtin: builtin.to_owned(),
        });
    }
    Ok(())
}

fn run_external_solver(solver: &PathBuf, script: &str) -> Result<String, PipelineError> {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let mut child = Command::new(solver)
        .arg("-in")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| PipelineError::ExternalSolver(format!("cannot run {}: {e}", solver.display())))?;
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(script.as_bytes())
        .map_err(|e| PipelineError::ExternalSolver(e.to_string()))?;
    let out = child.wait_with_output().map_err(|e| PipelineError::ExternalSolver(e.to_string()))?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    for line in stdout.lines() {
        match line.trim() {
            "sat" => return Ok("sat".to_owned()),
            "unsat" => return Ok("unsat".to_owned()),
            _ => {}
        }
    }
    Err(PipelineError::ExternalSolver(format!(
        "no sat/unsat in solver output: {stdout:?}"
    )))
}

/// A small standard pool of warps for exhaustive refutation.
pub fn standard_pool() -> Vec<Warp> {
    vec![
        Warp::bot(),
        Warp::id(),
        Warp::top(),
        Warp::step(1, Omega),
        Warp::step(1, Fin(1)),
        // f(n) = n + 1
        Warp::from_segments(&[Segment { at: 1, value: Fin(2), slope: Slope::Step }], Tail::Ramp)
            .expect("valid"),
        // f(n) = max(n − 1, 0)
        Warp::from_segments(&[Segment { at: 1, value: Fin(0), slope: Slope::Step }], Tail::Ramp)
            .expect("valid"),
        // capped identity min(n, 2)
        Warp::from_segments(&[Segment { at: 2, value: Fin(2), slope: Slope::Ramp }], Tail::Const(Fin(2)))
            .expect("valid"),
    ]
}

/// Exhaustively searches for a counterexample by direct evaluation: every
/// assignment of pool warps to the query's variables, every `p ≤ p_max`
/// plus `p = ω`. Uses only the warp calculator, independently of the
/// decision pipeline.
pub fn brute_refute(q: &Query, pool: &[Warp], p_max: u64) -> Option<Counterexample> {
    let vars = q.free_vars();
    let points: Vec<ExtNat> = (0..=p_max).map(Fin).chain([Omega]).collect();
    let mut assignment = vec![0usize; vars.len()];
    loop {
        let theta: Valuation = vars
            .iter()
            .zip(&assignment)
            .map(|(x, &i)| (x.clone(), pool[i].clone()))
            .collect();
        let refuted_at = |p: ExtNat| -> bool {
            match q {
                Query::Equation(s, t) => eval_term(s, &theta).eval(p) != eval_term(t, &theta).eval(p),
                Query::Inequation(s, t) => eval_term(s, &theta).eval(p) > eval_term(t, &theta).eval(p),
                Query::UnitGoal(ts) => ts
                    .iter()
                    .all(|t| eval_term(&t.to_term(), &theta).eval(p) < p),
            }
        };
        if let Some(&p) = points.iter().find(|&&p| refuted_at(p)) {
            let goals = match q {
                Query::UnitGoal(ts) => ts.clone(),
                _ => Vec::new(),
            };
            return Some(Counterexample {
                p,
                valuation: theta.into_iter().collect::<BTreeMap<_, _>>(),
                verified: true,
                goals,
            });
        }
        // next assignment
        let mut k = 0;
        loop {
            if k == assignment.len() {
                return None;
            }
            assignment[k] += 1;
            if assignment[k] < pool.len() {
                break;
            }
            assignment[k] = 0;
            k += 1;
        }
        if vars.is_empty() {
            return None;
        }
    }
}

/// Options for the fuzzing harness.
#[derive(Clone, Debug)]
pub struct FuzzOptions {
    pub n: u64,
    pub seed: u64,
    pub limits: GenLimits,
    pub budgets: Budgets,
    pub external_solver: Option<PathBuf>,
    /// `p` range for the brute-force oracle.
    pub p_max: u64,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        FuzzOptions {
            n: 100,
            seed: 0,
            limits: GenLimits::default(),
            budgets: Budgets::default(),
            external_solver: None,
            p_max: 3,
        }
    }
}

/// Deterministic report of a fuzz run. Identical options produce
/// byte-identical serialized reports.
#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct FuzzReport {
    pub seed: u64,
    pub queries: u64,
    pub valid: u64,
    pub invalid: u64,
    pub brute_refuted: u64,
    pub normalization_checked: u64,
    pub external_checked: u64,
    pub budget_skipped: u64,
    /// Disagreements between any two routes. Must be empty.
    pub mismatches: Vec<String>,
}

/// Runs `n` random queries through the pipeline and all available oracles:
///
/// (a) a brute-force refutation implies an `Invalid` verdict;
/// (b) every `Invalid` counterexample verifies semantically;
/// (c) the built-in solver agrees with the external solver when present;
/// (d) normalization preserves semantics on sampled valuations.
pub fn fuzz(opts: &FuzzOptions) -> FuzzReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let pool = standard_pool();
    let mut report = FuzzReport {
        seed: opts.seed,
        queries: 0,
        valid: 0,
        invalid: 0,
        brute_refuted: 0,
        normalization_checked: 0,
        external_checked: 0,
        budget_skipped: 0,
        mismatches: Vec::new(),
    };
    let decide_opts = DecideOptions {
        budgets: opts.budgets,
        trace: false,
        external_solver: opts.external_solver.clone(),
    };

    for _ in 0..opts.n {
        let q = random_query(&mut rng, &opts.limits);
        report.queries += 1;

        let decision = match decide(&q, &decide_opts) {
            Ok(d) => d,
            Err(
                PipelineError::Normalize(NormalizeError::NodeBudget { .. })
                | PipelineError::Saturate(SaturateError::BudgetExceeded { .. })
                | PipelineError::Solve(SolveError::BudgetExceeded { .. }),
            ) => {
                report.budget_skipped += 1;
                continue;
            }
            Err(e) => {
                report.mismatches.push(format!("pipeline error on {q}: {e}"));
                continue;
            }
        };
        if opts.external_solver.is_some() {
            report.external_checked += 1;
        }

        let brute = brute_refute(&q, &pool, opts.p_max);
        if brute.is_some() {
            report.brute_refuted += 1;
        }
        match &decision.verdict {
            Verdict::Valid => {
                report.valid += 1;
                if let Some(ce) = brute {
                    report.mismatches.push(format!(
                        "brute refutation of {q} at ({ce}) but decide said Valid"
                    ));
                }
            }
            Verdict::Invalid(ce) => {
                report.invalid += 1;
                if !ce.verified {
                    report.mismatches.push(format!("unverified counterexample for {q}"));
                }
            }
        }

        // (d) normalization preserves semantics under sampled valuations
        let sides: Vec<Term> = match &q {
            Query::Equation(s, t) | Query::Inequation(s, t) => vec![s.clone(), t.clone()],
            Query::UnitGoal(ts) => ts.iter().map(BasicTerm::to_term).collect(),
        };
        for t in sides {
            let nf = match crate::normalize::normal_form(&t, opts.budgets.normalize_nodes) {
                Ok(nf) => nf,
                Err(_) => {
                    report.budget_skipped += 1;
                    continue;
                }
            };
            let nf_term = nf.to_term();
            let vars = t.free_vars();
            for _ in 0..2 {
                let theta: Valuation = vars
                    .iter()
                    .map(|x| (x.clone(), random_warp(&mut rng, &opts.limits)))
                    .collect();
                let a = eval_term(&t, &theta);
                let b = eval_term(&nf_term, &theta);
                if a != b {
                    report.mismatches.push(format!(
                        "normalization changed semantics of {t}: {a} vs {b}"
                    ));
                } else {
                    report.normalization_checked += 1;
                }
            }
        }
    }
    report
}
