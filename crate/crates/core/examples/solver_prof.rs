use warpcheck::constraints::build_psi;
use warpcheck::normalize::query_goals;
use warpcheck::saturate::{saturate, Interner};
use warpcheck::solve::{solve, translate, SolveOutcome};
use warpcheck::term::parse_query;

fn main() {
    let src = std::env::args().nth(1).unwrap_or("x \\ (y & z) == (x \\ y) & (x \\ z)".into());
    let q = parse_query(&src).unwrap();
    let goals = query_goals(&q, 200_000).unwrap();
    println!("{src}: {} goals", goals.len());
    let t_all = std::time::Instant::now();
    let mut slowest = std::time::Duration::ZERO;
    let mut slowest_i = 0;
    for (gi, goal) in goals.iter().enumerate() {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let roots: Vec<_> = goal.iter().map(|t| { let id = interner.intern_basic(t); interner.app(id, kappa) }).collect();
        let delta = saturate(&mut interner, &roots, 1_000_000).unwrap();
        let psi = build_psi(&mut interner, &delta, kappa, &roots).unwrap();
        let sigma = translate(&psi);
        let t0 = std::time::Instant::now();
        let out = solve(&sigma, u64::MAX);
        let el = t0.elapsed();
        if el > slowest { slowest = el; slowest_i = gi; }
        match &out {
            Ok(SolveOutcome::Sat(_)) => println!("goal {gi} SAT?! |Δ|={} ({el:?})", delta.len()),
            Ok(SolveOutcome::Unsat) => {}
            Err(e) => println!("goal {gi} ERR {e}"),
        }
        if el > std::time::Duration::from_secs(5) {
            println!("goal {gi}: |Δ|={}, {} clauses, {el:?} <- SLOW: {}", delta.len(), sigma.len(),
                goal.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" | "));
        }
    }
    println!("total {:?}, slowest goal {slowest_i}: {slowest:?}", t_all.elapsed());
}
