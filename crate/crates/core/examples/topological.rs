//! SCC-by-SCC solving of a long chain of end components, with the
//! accumulated error bound of the approximate sub-solver.

use ssg::generators::{gen_mulmec, mulmec_value};
use ssg::topological::{topo_solve, SubSolver, TopoConfig};

fn main() -> ssg::Result<()> {
    let m = 200;
    let game = gen_mulmec(m);

    let loose = topo_solve(&game, &TopoConfig { eps: 1e-6, ..TopoConfig::default() })?;
    println!(
        "bvi per SCC: {} sub-solves, largest SCC gap {:e}, accumulated bound {:e}",
        loose.stats.sub_solves,
        loose.stats.scc_gaps.iter().copied().fold(0.0, f64::max),
        loose.stats.error_bound
    );

    let tight = topo_solve(&game, &TopoConfig { eps: 1e-6, tighten: true, ..TopoConfig::default() })?;
    println!("tightened: accumulated bound {:e}", tight.stats.error_bound);

    let exact = topo_solve(&game, &TopoConfig::new(SubSolver::Si))?;
    let values = exact.exact_values.unwrap();
    let matches = game.states().all(|s| values[s] == mulmec_value(m, s));
    println!("exact strategy iteration per SCC matches the closed form: {matches}");
    Ok(())
}
