//! Bounded value iteration on the four-state example, with and without
//! deflation of end components.

use ssg::bvi::{solve_bvi, solve_bvi_observed, BviConfig};
use ssg::generators::fig1;

fn main() {
    let game = fig1();

    let stuck = solve_bvi(&game, &BviConfig::default().with_deflate_period(usize::MAX).with_max_iterations(1000));
    let upper = stuck.upper.as_ref().unwrap();
    println!("no deflation: L = {:?}, U = {:?}, converged = {}", stuck.values, upper, stuck.converged);

    let cfg = BviConfig::default().with_eps(1e-6).with_deflate_period(1);
    let result = solve_bvi_observed(&game, &cfg, |iter, b| {
        if iter <= 3 {
            println!("iteration {iter}: L = {:?} U = {:?}", b.lower, b.upper);
        }
    });
    println!(
        "deflating every iteration: value {:.6} after {} iterations, {} deflations",
        result.values[game.initial()],
        result.iterations,
        result.stats.deflations
    );
    println!("Maximizer strategy: {:?}", result.max_strategy.choices());
}
