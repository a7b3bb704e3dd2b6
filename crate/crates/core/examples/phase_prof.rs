use warpcheck::constraints::build_psi;
use warpcheck::normalize::query_goals;
use warpcheck::saturate::{saturate, Interner};
use warpcheck::solve::{solve, translate};
use warpcheck::term::parse_query;
use std::time::{Duration, Instant};

fn main() {
    let src = "(y | z) \\ x == (y \\ x) & (z \\ x)";
    let q = parse_query(src).unwrap();
    let t0 = Instant::now();
    let goals = query_goals(&q, 200_000).unwrap();
    println!("normalize: {:?} ({} goals)", t0.elapsed(), goals.len());
    let (mut t_sat, mut t_psi, mut t_tr, mut t_solve) = (Duration::ZERO, Duration::ZERO, Duration::ZERO, Duration::ZERO);
    for goal in &goals {
        let mut interner = Interner::new();
        let kappa = interner.kappa();
        let roots: Vec<_> = goal.iter().map(|t| { let id = interner.intern_basic(t); interner.app(id, kappa) }).collect();
        let t = Instant::now(); let delta = saturate(&mut interner, &roots, 1_000_000).unwrap(); t_sat += t.elapsed();
        let t = Instant::now(); let psi = build_psi(&mut interner, &delta, kappa, &roots).unwrap(); t_psi += t.elapsed();
        let t = Instant::now(); let sigma = translate(&psi); t_tr += t.elapsed();
        let t = Instant::now(); let _ = solve(&sigma, 1_000_000_000).unwrap(); t_solve += t.elapsed();
    }
    println!("saturate: {t_sat:?}  build_psi: {t_psi:?}  translate: {t_tr:?}  solve: {t_solve:?}");
}
