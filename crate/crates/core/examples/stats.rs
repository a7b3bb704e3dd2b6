use warpcheck::constraints::build_psi;
use warpcheck::normalize::query_goals;
use warpcheck::saturate::{saturate, Interner};
use warpcheck::solve::translate;
use warpcheck::term::parse_query;

fn main() {
    for src in ["x \\ (y & z) == (x \\ y) & (x \\ z)", "(y & z) \\ x == (y \\ x) | (z \\ x)", "x / (y | z) == (x / y) & (x / z)", "x \\ y == x^r y | (top x)^r | y^o"] {
        let q = parse_query(src).unwrap();
        let goals = query_goals(&q, 200_000).unwrap();
        println!("{src}: {} goals", goals.len());
        for goal in &goals {
            let mut interner = Interner::new();
            let kappa = interner.kappa();
            let roots: Vec<_> = goal.iter().map(|t| { let id = interner.intern_basic(t); interner.app(id, kappa) }).collect();
            let delta = saturate(&mut interner, &roots, 1_000_000).unwrap();
            let psi = build_psi(&mut interner, &delta, kappa, &roots).unwrap();
            let sigma = translate(&psi);
            let c: u64 = goal.iter().map(|t| t.complexity()).sum();
            println!("  |Δ| = {:5}, {:6} clauses, goal complexity {}", delta.len(), sigma.len(), c);
        }
    }
}
