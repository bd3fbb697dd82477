//! Encode a game as a value program, write it out, solve it by local search
//! and check the result.

use ssg::bvi::{solve_vi, BviConfig};
use ssg::generators::gen_mulmec;
use ssg::mathprog::{emit_lp, emit_native, encode_hop, local_solve, verify_solution, LocalConfig};

fn main() -> ssg::Result<()> {
    let game = gen_mulmec(2);
    let prog = encode_hop(&game)?;
    println!(
        "{} terms of degree <= {}, {} constraints, {} max/min groups, {} binaries",
        prog.terms.len(),
        prog.max_degree(),
        prog.constraints.len(),
        prog.groups.len(),
        prog.num_binaries()
    );
    println!("--- native ---\n{}", emit_native(&prog));
    println!("--- lp ---\n{}", emit_lp(&prog)?);

    let warm = solve_vi(&game, &BviConfig::default()).values;
    let result = local_solve(&game, &prog, &LocalConfig { warm_start: Some(warm), ..LocalConfig::default() })?;
    println!("local search: {} from start {} after {} repairs", result.status(), result.starts, result.repairs);

    let report = verify_solution(&prog, &result.values, 1e-9);
    println!("{report}");
    Ok(())
}
