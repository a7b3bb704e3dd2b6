use warpcheck::constraints::build_psi;
use warpcheck::normalize::query_goals;
use warpcheck::saturate::{saturate, Interner};
use warpcheck::solve::{solve, translate, SolveOutcome};
use warpcheck::term::parse_query;

fn main() {
    let src = "(y | z) \\ x == (y \\ x) & (z \\ x)";
    let idx: usize = std::env::args().nth(1).unwrap().parse().unwrap();
    let q = parse_query(src).unwrap();
    let goals = query_goals(&q, 200_000).unwrap();
    let goal = &goals[idx];
    let mut interner = Interner::new();
    let kappa = interner.kappa();
    let roots: Vec<_> = goal.iter().map(|t| { let id = interner.intern_basic(t); interner.app(id, kappa) }).collect();
    let delta = saturate(&mut interner, &roots, 1_000_000).unwrap();
    let psi = build_psi(&mut interner, &delta, kappa, &roots).unwrap();
    let sigma = translate(&psi);
    let t0 = std::time::Instant::now();
    let out = solve(&sigma, 3_000_000_000);
    println!("goal {idx}: |Δ|={} -> {:?} in {:?}", delta.len(), out.as_ref().map(|o| matches!(o, SolveOutcome::Unsat)), t0.elapsed());
}
