//! Bounded value iteration: lower and upper Bellman iteration with periodic
//! deflation of end components, and plain (unguaranteed) value iteration.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::game::{Player, StochasticGame};
use crate::graph::{compute_sinks, mec::best_exit_masked, mec_decomposition_restricted};
use crate::strategy::{bellman_residual, SolveResult, SolveStats, Strategy};

/// Paired lower/upper value estimates, `0 <= lower <= upper <= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsVector {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundsVector {
    /// `L = 0`, `U = 1`, with targets at 1 and the `zero` states at 0.
    pub fn initial(game: &StochasticGame, zero: &[bool]) -> Self {
        let lower = game.states().map(|s| if game.is_target(s) { 1.0 } else { 0.0 }).collect();
        let upper = game.states().map(|s| if zero[s] && !game.is_target(s) { 0.0 } else { 1.0 }).collect();
        BoundsVector { lower, upper }
    }

    /// Largest `U(s) - L(s)`.
    pub fn max_gap(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BviConfig {
    /// Absolute precision: stop once `U - L < eps` everywhere.
    pub eps: f64,
    /// Deflate every `deflate_period` iterations.
    pub deflate_period: usize,
    pub max_iterations: usize,
    /// Bounded iteration with deflation; `false` selects plain value iteration.
    pub guaranteed: bool,
    /// Start the upper bound at 0 on sinks found by graph search. With
    /// `false` the upper bound starts at 1 everywhere except targets.
    pub pin_sinks: bool,
}

impl Default for BviConfig {
    fn default() -> Self {
        BviConfig { eps: 1e-6, deflate_period: 100, max_iterations: 10_000_000, guaranteed: true, pin_sinks: true }
    }
}

impl BviConfig {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_deflate_period(mut self, k: usize) -> Self {
        self.deflate_period = k;
        self
    }

    pub fn with_max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }
}

fn optimum(game: &StochasticGame, values: &[f64], s: usize) -> f64 {
    let vals = (0..game.num_actions(s)).map(|a| game.action_value(values, s, a));
    match game.owner(s) {
        Player::Maximizer => vals.fold(f64::NEG_INFINITY, f64::max),
        Player::Minimizer => vals.fold(f64::INFINITY, f64::min),
    }
}

/// One Bellman update of both bounds. Targets stay at 1 and the `pinned`
/// states at 0. The lower bound never decreases and the upper bound never
/// increases (each new estimate is combined with the previous one, which is
/// sound because both are valid bounds).
pub fn bellman_step(game: &StochasticGame, bounds: &BoundsVector, pinned: &[bool]) -> BoundsVector {
    let mut next = bounds.clone();
    for s in game.states() {
        if game.is_target(s) || pinned[s] {
            continue;
        }
        next.lower[s] = optimum(game, &bounds.lower, s).clamp(0.0, 1.0).max(bounds.lower[s]);
        next.upper[s] = optimum(game, &bounds.upper, s).clamp(0.0, 1.0).min(bounds.upper[s]);
        if next.upper[s] < next.lower[s] {
            // Only reachable through float round-off at the fixpoint.
            next.upper[s] = next.lower[s];
        }
    }
    next
}

/// Candidate simple end components: the MECs of the game in which every
/// Minimizer state keeps only its actions of minimal lower-bound value.
/// Components containing a target or consisting only of `pinned` states are
/// skipped.
pub fn find_secs(game: &StochasticGame, lower: &[f64], pinned: &[bool]) -> Vec<Vec<usize>> {
    let best: Vec<f64> =
        game.states().map(|s| if game.owner(s) == Player::Minimizer { optimum(game, lower, s) } else { 0.0 }).collect();
    let cat = mec_decomposition_restricted(game, |s, a| {
        game.owner(s) == Player::Maximizer || game.action_value(lower, s, a) <= best[s] + TIE
    });
    cat.mecs
        .into_iter()
        .filter(|m| !m.states.iter().any(|&s| game.is_target(s)) && !m.states.iter().all(|&s| pinned[s]))
        .map(|m| m.states)
        .collect()
}

const TIE: f64 = 1e-12;

/// Lowers the upper bound of every member of each component to the
/// component's best Maximizer exit. Best exits are all taken from the
/// incoming `upper`.
pub fn deflate(game: &StochasticGame, upper: &[f64], secs: &[Vec<usize>]) -> Vec<f64> {
    let mut out = upper.to_vec();
    let mut mask = vec![false; game.num_states()];
    for sec in secs {
        for &s in sec {
            mask[s] = true;
        }
        let exit = best_exit_masked(game, upper, sec, &mask);
        for &s in sec {
            out[s] = out[s].min(exit);
            mask[s] = false;
        }
    }
    out
}

/// Bounded value iteration with guaranteed precision `cfg.eps`.
pub fn solve_bvi(game: &StochasticGame, cfg: &BviConfig) -> SolveResult {
    solve_bvi_observed(game, cfg, |_, _| {})
}

/// [`solve_bvi`], calling `observer(iteration, bounds)` after every iteration
/// (after deflation, if one happened). Iteration 0 is the initial vector.
pub fn solve_bvi_observed(
    game: &StochasticGame,
    cfg: &BviConfig,
    mut observer: impl FnMut(usize, &BoundsVector),
) -> SolveResult {
    if !cfg.guaranteed {
        return solve_vi(game, cfg);
    }
    let sinks = compute_sinks(game);
    let pinned = if cfg.pin_sinks { sinks } else { vec![false; game.num_states()] };
    let bounds = BoundsVector::initial(game, &pinned);
    let (bounds, iterations, deflations, converged) =
        iterate_bounds(game, cfg, &pinned, bounds, &mut observer, |_| false);
    let (max_strategy, min_strategy) = extract_strategies(game, &bounds.lower, STRATEGY_TOLERANCE);
    let gap = bounds.max_gap();
    SolveResult {
        stats: SolveStats {
            deflations,
            gap,
            residual: bellman_residual(game, &bounds.lower),
            error_bound: gap,
            ..SolveStats::default()
        },
        values: bounds.lower,
        exact_values: None,
        upper: Some(bounds.upper),
        max_strategy,
        min_strategy,
        iterations,
        converged,
    }
}

/// Tolerance for treating actions as optimal when extracting strategies from
/// approximate values.
pub const STRATEGY_TOLERANCE: f64 = 1e-9;

/// Runs the bounded iteration from `bounds` until the gap drops below
/// `cfg.eps`, `stop_early` returns true, or the cap is hit. Returns the final
/// bounds, iteration count, number of deflations and whether it converged.
pub(crate) fn iterate_bounds(
    game: &StochasticGame,
    cfg: &BviConfig,
    pinned: &[bool],
    mut bounds: BoundsVector,
    observer: &mut impl FnMut(usize, &BoundsVector),
    mut stop_early: impl FnMut(&BoundsVector) -> bool,
) -> (BoundsVector, usize, usize, bool) {
    let period = cfg.deflate_period.max(1);
    let mut deflations = 0;
    let mut iterations = 0;
    observer(0, &bounds);
    loop {
        iterations += 1;
        bounds = bellman_step(game, &bounds, pinned);
        if iterations % period == 0 {
            let secs = find_secs(game, &bounds.lower, pinned);
            if !secs.is_empty() {
                bounds.upper = deflate(game, &bounds.upper, &secs);
                for s in game.states() {
                    bounds.upper[s] = bounds.upper[s].max(bounds.lower[s]);
                }
                deflations += 1;
            }
        }
        observer(iterations, &bounds);
        if bounds.max_gap() < cfg.eps || stop_early(&bounds) {
            return (bounds, iterations, deflations, true);
        }
        if iterations >= cfg.max_iterations {
            log::debug!("bounded iteration hit the cap of {} iterations", cfg.max_iterations);
            return (bounds, iterations, deflations, false);
        }
    }
}

/// Plain value iteration from below: stops once no state changes by `eps`
/// or more in one iteration. Gives no precision guarantee.
pub fn solve_vi(game: &StochasticGame, cfg: &BviConfig) -> SolveResult {
    let mut values: Vec<f64> = game.states().map(|s| if game.is_target(s) { 1.0 } else { 0.0 }).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut change: f64 = 0.0;
        let mut next = values.clone();
        for s in game.states() {
            if game.is_target(s) {
                continue;
            }
            let v = optimum(game, &values, s).clamp(0.0, 1.0).max(values[s]);
            change = change.max(v - values[s]);
            next[s] = v;
        }
        values = next;
        if change < cfg.eps {
            converged = true;
            break;
        }
    }
    let (max_strategy, min_strategy) = extract_strategies(game, &values, STRATEGY_TOLERANCE);
    SolveResult {
        stats: SolveStats {
            residual: bellman_residual(game, &values),
            gap: f64::NAN,
            error_bound: f64::NAN,
            ..SolveStats::default()
        },
        values,
        exact_values: None,
        upper: None,
        max_strategy,
        min_strategy,
        iterations,
        converged,
    }
}

/// Strategies from (approximate) values. Minimizer takes the lowest-indexed
/// action of minimal value. Maximizer picks among its actions within `tol` of
/// the best one, preferring actions that lead towards the targets: states
/// are discovered backwards from the targets, and a Maximizer state joins via
/// a near-optimal action reaching already discovered states, so optimal
/// choices that would cycle forever inside an end component are avoided.
/// Maximizer states never discovered take their lowest near-optimal action.
pub fn extract_strategies(game: &StochasticGame, values: &[f64], tol: f64) -> (Strategy, Strategy) {
    let min_strategy = Strategy::from_fn(game, Player::Minimizer, |s| {
        let best = optimum(game, values, s);
        (0..game.num_actions(s)).find(|&a| game.action_value(values, s, a) <= best + tol).unwrap_or(0)
    });
    let n = game.num_states();
    let near_opt = |s: usize, a: usize| {
        let best = optimum(game, values, s);
        game.action_value(values, s, a) >= best - tol
    };
    let mut pre: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for s in game.states() {
        for (a, act) in game.actions(s).iter().enumerate() {
            let relevant = match game.owner(s) {
                Player::Maximizer => near_opt(s, a),
                Player::Minimizer => min_strategy.get(s) == Some(a),
            };
            if relevant {
                for t in act.successors() {
                    pre[t].push((s, a));
                }
            }
        }
    }
    let mut joined: Vec<Option<usize>> = vec![None; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in game.targets() {
        joined[s] = Some(0);
        queue.push_back(s);
    }
    // Process layer by layer so that the lowest joining action is chosen.
    while !queue.is_empty() {
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for t in queue.drain(..) {
            candidates.extend(pre[t].iter().copied().filter(|&(s, _)| joined[s].is_none()));
        }
        candidates.sort_unstable();
        candidates.dedup_by_key(|&mut (s, _)| s);
        for (s, a) in candidates {
            joined[s] = Some(a);
            queue.push_back(s);
        }
    }
    let max_strategy = Strategy::from_fn(game, Player::Maximizer, |s| {
        if game.is_target(s) {
            return 0;
        }
        joined[s].unwrap_or_else(|| (0..game.num_actions(s)).find(|&a| near_opt(s, a)).unwrap_or(0))
    });
    (max_strategy, min_strategy)
}
