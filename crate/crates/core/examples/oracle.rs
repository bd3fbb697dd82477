//! Brute-force reference values and optimal strategies for a small game.

use ssg::generators::{gen_random, RandomGameParams};
use ssg::numeric::format_rational;
use ssg::oracle::exact_solve;

fn main() -> ssg::Result<()> {
    let game = gen_random(42, &RandomGameParams::default());
    let sol = exact_solve(&game)?;
    println!("{} profiles enumerated", sol.profiles);
    for s in game.states() {
        println!("state {s} ({}): {}", game.owner(s).keyword(), format_rational(&sol.values[s]));
    }
    println!("sup-inf equals inf-sup: {}", sol.values == sol.min_max_values);
    println!("Bellman consistent: {}", sol.bellman_consistent);
    println!("Maximizer {:?}", sol.max_strategy.choices());
    println!("Minimizer {:?}", sol.min_strategy.choices());
    Ok(())
}
