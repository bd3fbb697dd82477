//! Normal-form transformations: at most two actions per state, and stopping.

use num_bigint::BigInt;
use num_rational::BigRational;
use ssg::generators::{gen_random, RandomGameParams};
use ssg::mathprog::{encode_qp, transform_2act, transform_stopping};
use ssg::numeric::rational_to_f64;
use ssg::oracle::exact_solve;

fn main() -> ssg::Result<()> {
    let game = gen_random(3, &RandomGameParams { n_states: 5, max_actions: 4, ..RandomGameParams::default() });
    let (two, origin) = transform_2act(&game);
    println!(
        "{} states became {}; added states belong to {:?}",
        game.num_states(),
        two.num_states(),
        &origin[game.num_states()..]
    );
    println!("quadratic program over {} variables", encode_qp(&two)?.num_vars());

    let v = exact_solve(&game)?.values;
    for d in [100, 10_000, 1_000_000] {
        let eps = BigRational::new(BigInt::from(1), BigInt::from(d));
        let stopping = transform_stopping(&game, &eps);
        let vs = exact_solve(&stopping.game)?.values;
        let err = game.states().map(|s| rational_to_f64(&(v[s].clone() - vs[s].clone()))).fold(0.0, f64::max);
        println!("stopping probability 1/{d}: largest value change {err:e}");
    }
    Ok(())
}
