//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use ssg::bvi::{solve_bvi, solve_bvi_observed, solve_vi, BviConfig};
use ssg::generators::{fig1, gen_bigmec, gen_hm, gen_mulmec, gen_random, mulmec_value, RandomGameParams};
use ssg::graph::{compute_sinks, mec_decomposition};
use ssg::mathprog::encode::mec_constraints;
use ssg::mathprog::{
    encode_hop, encode_qp, local_solve, transform_2act, transform_stopping, verify_solution, LocalConfig, MathProgram,
    DEFAULT_PAIR_BUDGET,
};
use ssg::oracle::exact_solve;
use ssg::si::{solve_si, solve_si_observed, OpponentSolver, SiConfig};
use ssg::topological::{topo_solve, SubSolver, TopoConfig};
use ssg::{Error, StochasticGame};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const RANDOM_GAMES: u64 = 200;

fn random_games() -> Vec<StochasticGame> {
    (0..RANDOM_GAMES).map(|seed| gen_random(seed, &RandomGameParams::default())).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn timed<T>(limit: Duration, what: &str, f: impl FnOnce() -> T) -> Result<T, String> {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    ensure(took <= limit, || format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok(out)
}

fn fig1_agreement() -> Outcome {
    let g = fig1();
    let p = g.initial();
    let second = Duration::from_secs(1);
    let oracle = exact_solve(&g).map_err(|e| e.to_string())?;
    ensure(oracle.values[p] == BigRational::new(BigInt::from(1), BigInt::from(2)), || {
        "oracle value is not 1/2".into()
    })?;

    let mut runs: Vec<(&str, f64)> = Vec::new();
    let bvi = timed(second, "bvi", || solve_bvi(&g, &BviConfig::default().with_eps(1e-6)))?;
    runs.push(("bvi", bvi.values[p]));
    for (name, opponent) in [("si/exact", OpponentSolver::Exact), ("si/bvi", OpponentSolver::BviDomination)] {
        let r = timed(second, name, || solve_si(&g, &SiConfig { opponent, ..SiConfig::default() }))?;
        runs.push((name, r.map_err(|e| e.to_string())?.values[p]));
    }
    for (name, sub) in [("topo-bvi", SubSolver::Bvi), ("topo-si", SubSolver::Si), ("topo-hop", SubSolver::HopLocal)] {
        let r = timed(second, name, || topo_solve(&g, &TopoConfig::new(sub)))?;
        runs.push((name, r.map_err(|e| e.to_string())?.values[p]));
    }
    let local = timed(second, "hop-local", || {
        let warm = solve_vi(&g, &BviConfig::default()).values;
        let prog = encode_hop(&g)?;
        local_solve(&g, &prog, &LocalConfig { warm_start: Some(warm), ..LocalConfig::default() })
    })?
    .map_err(|e| e.to_string())?;
    ensure(local.verified(), || "hop-local not verified".into())?;
    runs.push(("hop-local", local.values[p]));
    for (name, v) in &runs {
        ensure((v - 0.5).abs() <= 1e-6, || format!("{name} gives {v}"))?;
    }
    Ok(format!("{} solvers at 1/2", runs.len()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    for (seed, g) in random_games().iter().enumerate() {
        let oracle = exact_solve(g).map_err(|e| e.to_string())?;
        let exact = oracle.values_f64();
        let bvi = solve_bvi(g, &BviConfig::default().with_eps(1e-6));
        ensure(bvi.converged && max_diff(&bvi.values, &exact) <= 1e-6, || format!("bvi off on seed {seed}"))?;
        let si_exact =
            solve_si(g, &SiConfig { exact_rational: true, ..SiConfig::default() }).map_err(|e| e.to_string())?;
        ensure(si_exact.exact_values.as_ref() == Some(&oracle.values), || format!("exact si differs on seed {seed}"))?;
        let si_bvi = solve_si(g, &SiConfig { opponent: OpponentSolver::BviDomination, ..SiConfig::default() })
            .map_err(|e| e.to_string())?;
        ensure(max_diff(&si_bvi.values, &exact) <= 1e-6, || format!("si/bvi off on seed {seed}"))?;
    }
    let took = start.elapsed();
    ensure(took <= Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{RANDOM_GAMES} games in {took:.1?}"))
}

fn encoding_soundness() -> Outcome {
    for (seed, g) in random_games().iter().enumerate() {
        let values = exact_solve(g).map_err(|e| e.to_string())?.values_f64();
        let report = verify_solution(&encode_hop(g).map_err(|e| e.to_string())?, &values, 1e-9);
        ensure(report.pass, || format!("hop on seed {seed}: {report}"))?;

        let (g2, _) = transform_2act(g);
        let values2 = exact_solve(&g2).map_err(|e| e.to_string())?.values_f64();
        let report = verify_solution(&encode_qp(&g2).map_err(|e| e.to_string())?, &values2, 1e-9);
        ensure(report.pass, || format!("qp on seed {seed}: {report}"))?;
    }
    Ok(format!("{RANDOM_GAMES} games, hop and qp"))
}

fn example_two() -> Outcome {
    let g = fig1();
    let q = 1;
    let no_deflation = BviConfig::default().with_deflate_period(usize::MAX).with_max_iterations(1000);
    let r = solve_bvi(&g, &no_deflation);
    let upper = r.upper.expect("bvi reports upper bounds");
    ensure(r.iterations == 1000 && upper[q] == 1.0, || {
        format!("U(q) = {} after {} iterations", upper[q], r.iterations)
    })?;

    let mut first_deflated = None;
    solve_bvi_observed(&g, &BviConfig::default().with_deflate_period(1), |iter, b| {
        if iter == 1 {
            first_deflated = Some(b.upper[q]);
        }
    });
    let u = first_deflated.ok_or("no first iteration observed")?;
    ensure((u - 2.0 / 3.0).abs() < 1e-15, || format!("first deflation gives U(q) = {u}"))?;
    Ok("U(q) stays 1 without deflation, 2/3 after the first".into())
}

fn generator_fidelity() -> Outcome {
    let mec_count = |g: &StochasticGame| {
        let sinks = compute_sinks(g);
        mec_decomposition(g).nontrivial(g, &sinks).map(|m| m.len()).collect::<Vec<_>>()
    };
    for (m, states) in [(100, 302), (1000, 3002)] {
        let g = gen_mulmec(m);
        let mecs = mec_count(&g);
        ensure(g.num_states() == states && mecs.len() == m, || {
            format!("mulmec({m}): {} states, {} MECs", g.num_states(), mecs.len())
        })?;
    }
    let g = gen_bigmec(100);
    ensure(g.num_states() == 203 && mec_count(&g) == vec![201], || format!("bigmec(100): {} states", g.num_states()))?;
    let g = gen_hm(30);
    ensure(g.num_states() == 61 && g.max_actions() == 1, || format!("hm(30): {} states", g.num_states()))?;
    Ok("mulmec 100/1000, bigmec 100, hm 30".into())
}

fn qualitative_behaviours() -> Outcome {
    // (a) slow convergence on hm
    let g = gen_hm(30);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    ensure(exact_solve(&g).map_err(|e| e.to_string())?.values[g.initial()] == half, || {
        "hm(30) oracle is not 1/2".into()
    })?;
    let r = solve_bvi(&g, &BviConfig::default().with_max_iterations(10_000));
    let gap = r.upper.as_ref().unwrap()[g.initial()] - r.values[g.initial()];
    ensure(!r.converged && gap > 1e-6, || format!("hm(30) gap {gap:e} after 10^4 iterations"))?;

    // (b) strategy budget on bigmec
    let g = gen_bigmec(100);
    let sinks = compute_sinks(&g);
    let catalog = mec_decomposition(&g);
    let mec = catalog.nontrivial(&g, &sinks).next().ok_or("bigmec(100) has no MEC")?;
    let mut prog = MathProgram::new(g.num_states());
    match mec_constraints(&g, mec, 0, DEFAULT_PAIR_BUDGET, &mut prog) {
        Err(Error::EncodingInfeasible { states: 201, .. }) => {}
        other => return Err(format!("bigmec(100) MEC constraints: {other:?}")),
    }
    ensure(matches!(encode_hop(&g), Err(Error::EncodingInfeasible { .. })), || {
        "encode_hop accepted bigmec(100)".into()
    })?;

    // (c) local search on mulmec
    let g = gen_mulmec(100);
    let local = timed(Duration::from_secs(60), "mulmec(100) hop-local", || {
        let warm = solve_vi(&g, &BviConfig::default()).values;
        let prog = encode_hop(&g)?;
        local_solve(&g, &prog, &LocalConfig { warm_start: Some(warm), ..LocalConfig::default() })
    })?
    .map_err(|e| e.to_string())?;
    ensure(local.verified(), || format!("mulmec(100) hop-local: {}", local.report))?;

    // (d) exact topological solving on mulmec(1000)
    let m = 1000;
    let g = gen_mulmec(m);
    let r =
        timed(Duration::from_secs(300), "mulmec(1000) topo-si", || topo_solve(&g, &TopoConfig::new(SubSolver::Si)))?
            .map_err(|e| e.to_string())?;
    let exact = r.exact_values.ok_or("no exact values")?;
    for s in (0..g.num_states()).step_by(97).chain([0, 1, 2, 3 * m - 1]) {
        ensure(exact[s] == mulmec_value(m, s), || format!("mulmec(1000) state {s}"))?;
    }
    for k in 1..=3 {
        let small = gen_mulmec(k);
        let r = topo_solve(&small, &TopoConfig::new(SubSolver::Si)).map_err(|e| e.to_string())?;
        ensure(r.exact_values == Some(exact_solve(&small).map_err(|e| e.to_string())?.values), || {
            format!("mulmec({k}) vs oracle")
        })?;
    }
    Ok(format!("hm gap {gap:.2e}, bigmec infeasible, mulmec local verified, topo-si exact"))
}

fn monotonicity() -> Outcome {
    for (seed, g) in random_games().iter().enumerate() {
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut ok = true;
        solve_bvi_observed(g, &BviConfig::default().with_eps(1e-6).with_deflate_period(10), |_, b| {
            if let Some((l, u)) = &prev {
                ok &= b.lower.iter().zip(l).all(|(x, y)| x >= y) && b.upper.iter().zip(u).all(|(x, y)| x <= y);
            }
            prev = Some((b.lower.clone(), b.upper.clone()));
        });
        ensure(ok, || format!("bvi bounds not monotone on seed {seed}"))?;

        let mut last: Option<Vec<f64>> = None;
        let cfg = SiConfig { exact_rational: true, ..SiConfig::default() };
        solve_si_observed(g, &cfg, |_, v| {
            if let Some(l) = &last {
                ok &= v.iter().zip(l).all(|(x, y)| x >= y);
            }
            last = Some(v.to_vec());
        })
        .map_err(|e| e.to_string())?;
        ensure(ok, || format!("si values not monotone on seed {seed}"))?;
    }
    Ok(format!("{RANDOM_GAMES} games"))
}

fn topological_consistency() -> Outcome {
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for (seed, g) in random_games().iter().enumerate() {
        let direct = solve_bvi(g, &BviConfig::default().with_eps(eps));
        let topo = topo_solve(g, &TopoConfig { eps, ..TopoConfig::default() }).map_err(|e| e.to_string())?;
        let depth = chain_depth(g) as f64;
        let d = max_diff(&direct.values, &topo.values);
        worst = worst.max(d / (depth * eps));
        ensure(d <= depth * eps, || format!("seed {seed}: difference {d:e} exceeds {depth} * eps"))?;
        let exact = topo_solve(g, &TopoConfig::new(SubSolver::Si)).map_err(|e| e.to_string())?;
        ensure(exact.exact_values == Some(exact_solve(g).map_err(|e| e.to_string())?.values), || {
            format!("topo-si differs on seed {seed}")
        })?;
    }
    Ok(format!("{RANDOM_GAMES} games, worst difference {worst:.3} of the bound"))
}

/// Number of SCCs on the longest path of the SCC graph.
fn chain_depth(g: &StochasticGame) -> usize {
    let sccs = ssg::scc_order(g);
    let mut scc_of = vec![0; g.num_states()];
    for (i, c) in sccs.iter().enumerate() {
        for &s in c {
            scc_of[s] = i;
        }
    }
    let mut depth = vec![1; sccs.len()];
    for (i, c) in sccs.iter().enumerate() {
        for &s in c {
            for t in g.actions(s).iter().flat_map(|a| a.successors()) {
                if scc_of[t] != i {
                    depth[i] = depth[i].max(depth[scc_of[t]] + 1);
                }
            }
        }
    }
    depth.into_iter().max().unwrap_or(1)
}

fn transform_correctness() -> Outcome {
    let params = RandomGameParams { max_actions: 4, ..RandomGameParams::default() };
    let mut checked = 0;
    let mut seed = 0;
    while checked < 50 {
        let g = gen_random(seed, &params);
        seed += 1;
        if !g.states().any(|s| g.num_actions(s) == 4) {
            continue;
        }
        let (g2, _) = transform_2act(&g);
        let v = exact_solve(&g).map_err(|e| e.to_string())?.values;
        let v2 = exact_solve(&g2).map_err(|e| e.to_string())?.values;
        ensure(v2[..g.num_states()] == v[..], || format!("2act changes values on seed {}", seed - 1))?;
        checked += 1;
    }

    let small = RandomGameParams { n_states: 5, ..RandomGameParams::default() };
    let stops: Vec<BigRational> =
        [100, 10_000, 1_000_000].iter().map(|&d| BigRational::new(BigInt::from(1), BigInt::from(d))).collect();
    for seed in 0..50 {
        let g = gen_random(seed, &small);
        let v = exact_solve(&g).map_err(|e| e.to_string())?.values;
        let mut prev_err: Option<Vec<BigRational>> = None;
        for eps in &stops {
            let st = transform_stopping(&g, eps);
            let vs = exact_solve(&st.game).map_err(|e| e.to_string())?.values;
            let err: Vec<BigRational> =
                g.states().map(|s| num_traits::Signed::abs(&(vs[s].clone() - v[s].clone()))).collect();
            if let Some(p) = &prev_err {
                ensure(err.iter().zip(p).all(|(e, q)| e <= q), || format!("stopping error grows on seed {seed}"))?;
            }
            prev_err = Some(err);
        }
    }
    Ok(format!("{checked} four-action games, 50 stopping sequences"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 fig1 agreement", fig1_agreement),
        ("2 oracle equivalence", oracle_equivalence),
        ("3 encoding soundness", encoding_soundness),
        ("4 deflation example", example_two),
        ("5 generator fidelity", generator_fidelity),
        ("6 qualitative behaviours", qualitative_behaviours),
        ("7 monotonicity", monotonicity),
        ("8 topological consistency", topological_consistency),
        ("9 transform correctness", transform_correctness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}; {took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why}; {took:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
