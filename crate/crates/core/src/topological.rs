//! Backward SCC-by-SCC solving.
//!
//! The SCCs of the game graph are processed successors first. Each SCC is
//! cut out into a small game of its own in which every transition leaving
//! the SCC is replaced by a lottery between a local target and a local sink,
//! weighted by the already computed value of the external successor. The
//! local values of the SCC's states then equal their values in the full game.
//!
//! With an approximate sub-solver the error of one SCC feeds into every SCC
//! before it, so the driver reports each SCC's achieved gap and a
//! conservative accumulated bound rather than claiming the requested
//! precision globally.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bvi::{solve_bvi, solve_vi, BviConfig};
use crate::error::{Error, Result};
use crate::game::{Action, Branch, Player, StochasticGame};
use crate::graph::{compute_sinks, scc_order};
use crate::mathprog::{encode_hop, local_solve, LocalConfig};
use crate::numeric::{rational_from_f64_exact, rational_to_f64};
use crate::si::{solve_si, OpponentSolver, SiConfig};
use crate::strategy::{bellman_residual, SolveResult, SolveStats, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubSolver {
    Bvi,
    /// Strategy iteration with the exact opponent in rational arithmetic.
    Si,
    /// Higher-order program solved by local search from a VI warm start.
    HopLocal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopoConfig {
    pub sub_solver: SubSolver,
    pub eps: f64,
    /// Solve every SCC to `eps / depth`, `depth` being the number of SCCs on
    /// the longest dependency chain, so the accumulated bound stays below `eps`.
    pub tighten: bool,
    pub deflate_period: usize,
    pub max_iterations: usize,
}

impl Default for TopoConfig {
    fn default() -> Self {
        let bvi = BviConfig::default();
        TopoConfig {
            sub_solver: SubSolver::Bvi,
            eps: bvi.eps,
            tighten: false,
            deflate_period: bvi.deflate_period,
            max_iterations: bvi.max_iterations,
        }
    }
}

impl TopoConfig {
    pub fn new(sub_solver: SubSolver) -> Self {
        TopoConfig { sub_solver, ..TopoConfig::default() }
    }
}

/// One SCC cut out of the full game. Local state `i < states.len()` is
/// `states[i]`; `target` and `sink` are the two added absorbing states.
#[derive(Clone, Debug)]
pub struct SubGame {
    pub game: StochasticGame,
    pub states: Vec<usize>,
    pub target: usize,
    pub sink: usize,
}

/// Builds the sub-game of `scc`. Every external successor must be solved.
pub fn build_subgame(game: &StochasticGame, scc: &[usize], solved: &[Option<BigRational>]) -> Result<SubGame> {
    let k = scc.len();
    let (target, sink) = (k, k + 1);
    let mut local = vec![None; game.num_states()];
    for (i, &s) in scc.iter().enumerate() {
        local[s] = Some(i);
    }
    let mut owners: Vec<Player> = scc.iter().map(|&s| game.owner(s)).collect();
    owners.extend([Player::Maximizer, Player::Minimizer]);
    let mut targets: Vec<bool> = scc.iter().map(|&s| game.is_target(s)).collect();
    targets.extend([true, false]);
    let mut actions: Vec<Vec<Action>> = Vec::with_capacity(k + 2);
    for &s in scc {
        let mut acts = Vec::with_capacity(game.num_actions(s));
        for a in game.actions(s) {
            let mut branches = Vec::with_capacity(a.branches.len());
            let mut to_target = BigRational::zero();
            let mut to_sink = BigRational::zero();
            for b in &a.branches {
                match local[b.state] {
                    Some(i) => branches.push(Branch::new(i, b.exact.clone())),
                    None => {
                        let v = solved[b.state].as_ref().ok_or_else(|| {
                            Error::InvalidArgument(format!(
                                "state {} is needed by state {s} but has no value yet",
                                b.state
                            ))
                        })?;
                        to_target += b.exact.clone() * v.clone();
                        to_sink += b.exact.clone() * (BigRational::one() - v.clone());
                    }
                }
            }
            for (state, mass) in [(target, to_target), (sink, to_sink)] {
                if !mass.is_zero() {
                    branches.push(Branch::new(state, mass));
                }
            }
            acts.push(Action { name: a.name.clone(), branches });
        }
        actions.push(acts);
    }
    for state in [target, sink] {
        actions.push(vec![Action { name: "loop".into(), branches: vec![Branch::new(state, BigRational::one())] }]);
    }
    let initial = local[game.initial()].unwrap_or(0);
    Ok(SubGame {
        game: StochasticGame::from_parts(owners, actions, initial, targets),
        states: scc.to_vec(),
        target,
        sink,
    })
}

/// Number of SCCs on the longest dependency chain of each SCC (itself
/// included), for SCCs given successors first.
fn chain_depths(game: &StochasticGame, sccs: &[Vec<usize>]) -> Vec<usize> {
    let mut scc_of = vec![0; game.num_states()];
    for (i, c) in sccs.iter().enumerate() {
        for &s in c {
            scc_of[s] = i;
        }
    }
    let mut depth = vec![1usize; sccs.len()];
    for (i, c) in sccs.iter().enumerate() {
        for &s in c {
            for a in game.actions(s) {
                for t in a.successors() {
                    let j = scc_of[t];
                    if j != i {
                        depth[i] = depth[i].max(depth[j] + 1);
                    }
                }
            }
        }
    }
    depth
}

/// Solves the game SCC by SCC with the configured sub-solver.
pub fn topo_solve(game: &StochasticGame, cfg: &TopoConfig) -> Result<SolveResult> {
    let n = game.num_states();
    let sccs = scc_order(game);
    let depths = chain_depths(game, &sccs);
    let max_depth = depths.iter().copied().max().unwrap_or(1);
    let sub_eps = if cfg.tighten { cfg.eps / max_depth as f64 } else { cfg.eps };
    let sinks = compute_sinks(game);

    let mut solved: Vec<Option<BigRational>> = vec![None; n];
    let mut values = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut bound = vec![0.0f64; n];
    let mut max_choice = vec![0usize; n];
    let mut min_choice = vec![0usize; n];
    let mut scc_gaps = Vec::with_capacity(sccs.len());
    let mut iterations = 0;
    let mut sub_solves = 0;
    let mut deflations = 0;
    let mut converged = true;
    let mut exact = true;

    for (index, scc) in sccs.iter().enumerate() {
        if scc.iter().all(|&s| game.is_target(s) || sinks[s]) {
            for &s in scc {
                let v = if game.is_target(s) { 1.0 } else { 0.0 };
                solved[s] = Some(if game.is_target(s) { BigRational::one() } else { BigRational::zero() });
                values[s] = v;
                upper[s] = v;
            }
            scc_gaps.push(0.0);
            continue;
        }
        let sub = build_subgame(game, scc, &solved)?;
        let wrap = |e: Error| Error::SubSolve { scc: index, source: Box::new(e) };
        let result = solve_scc(&sub.game, cfg, sub_eps).map_err(wrap)?;
        sub_solves += 1;
        iterations += result.iterations;
        deflations += result.stats.deflations;
        converged &= result.converged;

        let own_gap = match &result.upper {
            Some(u) => (0..scc.len()).map(|i| u[i] - result.values[i]).fold(0.0, f64::max),
            None => 0.0,
        };
        scc_gaps.push(own_gap);
        let inherited = scc
            .iter()
            .flat_map(|&s| game.actions(s).iter().flat_map(|a| a.successors()))
            .filter(|t| !scc.contains(t))
            .map(|t| bound[t])
            .fold(0.0, f64::max);
        for (i, &s) in scc.iter().enumerate() {
            values[s] = result.values[i];
            upper[s] = result.upper.as_ref().map_or(result.values[i], |u| u[i]);
            bound[s] = own_gap + inherited;
            solved[s] = Some(match &result.exact_values {
                Some(ev) => ev[i].clone(),
                None => {
                    exact = false;
                    rational_from_f64_exact(result.values[i]).unwrap_or_else(BigRational::zero)
                }
            });
            if let Some(a) = result.max_strategy.get(i) {
                max_choice[s] = a;
            }
            if let Some(a) = result.min_strategy.get(i) {
                min_choice[s] = a;
            }
        }
    }

    let exact_values =
        exact.then(|| solved.iter().map(|v| v.clone().expect("every SCC is solved")).collect::<Vec<_>>());
    if let Some(ev) = &exact_values {
        values = ev.iter().map(rational_to_f64).collect();
    }
    let error_bound = bound.iter().copied().fold(0.0, f64::max);
    let gap = (0..n).map(|s| upper[s] - values[s]).fold(0.0, f64::max);
    Ok(SolveResult {
        stats: SolveStats {
            deflations,
            sub_solves,
            gap,
            residual: bellman_residual(game, &values),
            error_bound,
            scc_gaps,
        },
        upper: (cfg.sub_solver == SubSolver::Bvi).then_some(upper),
        exact_values,
        max_strategy: Strategy::from_fn(game, Player::Maximizer, |s| max_choice[s]),
        min_strategy: Strategy::from_fn(game, Player::Minimizer, |s| min_choice[s]),
        values,
        iterations,
        converged,
    })
}

fn solve_scc(sub: &StochasticGame, cfg: &TopoConfig, eps: f64) -> Result<SolveResult> {
    let bvi_cfg = BviConfig::default()
        .with_eps(eps)
        .with_deflate_period(cfg.deflate_period)
        .with_max_iterations(cfg.max_iterations);
    match cfg.sub_solver {
        SubSolver::Bvi => Ok(solve_bvi(sub, &bvi_cfg)),
        SubSolver::Si => {
            let si_cfg = SiConfig { opponent: OpponentSolver::Exact, exact_rational: true, ..SiConfig::default() };
            solve_si(sub, &si_cfg)
        }
        SubSolver::HopLocal => {
            let warm = solve_vi(sub, &bvi_cfg);
            let prog = encode_hop(sub)?;
            let local =
                local_solve(sub, &prog, &LocalConfig { warm_start: Some(warm.values), ..LocalConfig::default() })?;
            Ok(SolveResult {
                converged: local.verified(),
                iterations: local.repairs,
                stats: SolveStats { residual: local.report.max_residual, ..SolveStats::default() },
                values: local.values,
                exact_values: None,
                upper: None,
                max_strategy: local.max_strategy,
                min_strategy: local.min_strategy,
            })
        }
    }
}
