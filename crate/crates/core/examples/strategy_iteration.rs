//! Strategy iteration with the different opponent solvers and a warm start.

use ssg::bvi::{solve_vi, BviConfig};
use ssg::generators::{gen_random, RandomGameParams};
use ssg::numeric::format_rational;
use ssg::si::{solve_si, solve_si_observed, OpponentSolver, SiConfig};

fn main() -> ssg::Result<()> {
    let game = gen_random(102, &RandomGameParams { n_states: 8, ..RandomGameParams::default() });

    let exact = solve_si(&game, &SiConfig { exact_rational: true, ..SiConfig::default() })?;
    let values: Vec<String> = exact.exact_values.unwrap().iter().map(format_rational).collect();
    println!("exact values: {}", values.join(" "));

    for opponent in [OpponentSolver::Exact, OpponentSolver::BviDomination, OpponentSolver::UnsafeVi] {
        let r = solve_si_observed(&game, &SiConfig { opponent, ..SiConfig::default() }, |round, v| {
            println!("  {opponent:?} round {round}: initial value {:.6}", v[game.initial()]);
        })?;
        println!("{opponent:?}: {} rounds", r.iterations);
    }

    let warm = solve_vi(&game, &BviConfig::default().with_eps(1e-3)).values;
    let r = solve_si(&game, &SiConfig { warm_start: Some(warm), ..SiConfig::default() })?;
    println!("warm start from VI: {} rounds", r.iterations);
    Ok(())
}
