//! Parse a game in the `.ssg` text format and solve it.

use ssg::bvi::{solve_bvi, BviConfig};
use ssg::parse_game;

const GAME: &str = "\
# p (min) -> q (max); q either returns to p or gambles
states 4
initial 0
targets 2
owner 0 min
owner 1 max
owner 2 max
owner 3 min
action 0 a (1:1)
action 1 b (0:1)
action 1 c (1:1/3)(2:1/3)(3:1/3)
action 2 d (2:1)
action 3 e (3:1)
";

fn main() -> ssg::Result<()> {
    let game = parse_game(GAME)?;
    let result = solve_bvi(&game, &BviConfig::default());
    for s in game.states() {
        println!("state {s}: [{:.6}, {:.6}]", result.values[s], result.upper.as_ref().unwrap()[s]);
    }
    let q = 1;
    println!("q plays `{}`", game.action(q, result.max_strategy.choice(q)).name);

    match parse_game("states 2\ninitial 5\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
