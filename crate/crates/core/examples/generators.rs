//! The benchmark families and their structure.

use ssg::generators::{gen_bigmec, gen_hm, gen_mulmec, gen_random, RandomGameParams};
use ssg::{compute_sinks, mec_decomposition, serialize_game, StochasticGame};

fn describe(name: &str, game: &StochasticGame) {
    let sinks = compute_sinks(game);
    let catalog = mec_decomposition(game);
    let sizes: Vec<usize> = catalog.nontrivial(game, &sinks).map(|m| m.len()).collect();
    let largest = sizes.iter().copied().max().unwrap_or(0);
    println!(
        "{name:>12}: {:>5} states, max {} / avg {:.2} actions, {} MECs (largest {largest})",
        game.num_states(),
        game.max_actions(),
        game.avg_actions(),
        sizes.len()
    );
}

fn main() {
    describe("mulmec(100)", &gen_mulmec(100));
    describe("bigmec(100)", &gen_bigmec(100));
    describe("hm(30)", &gen_hm(30));
    let random = gen_random(1, &RandomGameParams::default());
    describe("random", &random);
    println!("\n{}", serialize_game(&random));
}
