//! Strategy iteration: alternate an optimal Minimizer response to the current
//! Maximizer strategy with greedy Maximizer improvement, starting from a
//! proper strategy.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::bvi::{iterate_bounds, BoundsVector, BviConfig};
use crate::chain::InducedChain;
use crate::error::{Error, Result};
use crate::game::{Player, StochasticGame};
use crate::graph::{absorbing_set, attractor_layers, attractor_strategy, proper_region, zero_value_states};
use crate::numeric::{rational_to_f64, Scalar};
use crate::strategy::{bellman_residual, SolveResult, SolveStats, Strategy};

/// How the Minimizer's best response (an MDP) is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpponentSolver {
    /// Minimizer policy iteration with direct chain solves.
    Exact,
    /// Bounded value iteration, stopped once every Minimizer choice is
    /// dominated, confirmed by a final chain solve.
    BviDomination,
    /// Plain value iteration; no guarantee, may return wrong strategies.
    UnsafeVi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiConfig {
    pub opponent: OpponentSolver,
    /// Value estimates used to pick the initial strategy (made proper first).
    pub warm_start: Option<Vec<f64>>,
    /// Precision of the inner value-iteration-based responses.
    pub inner_eps: f64,
    pub max_rounds: usize,
    /// Run the exact opponent in rational arithmetic.
    pub exact_rational: bool,
}

impl Default for SiConfig {
    fn default() -> Self {
        SiConfig {
            opponent: OpponentSolver::Exact,
            warm_start: None,
            inner_eps: 1e-8,
            max_rounds: 10_000,
            exact_rational: false,
        }
    }
}

/// Minimizer's optimal response to a fixed Maximizer strategy.
#[derive(Clone, Debug)]
pub struct BestResponse<V> {
    pub values: Vec<V>,
    pub min_strategy: Strategy,
    /// Inner iterations (policy-iteration rounds or value-iteration steps).
    pub iterations: usize,
}

fn check_proper(game: &StochasticGame, max_strat: &Strategy) -> Result<()> {
    let absorbing = absorbing_set(game);
    let good = proper_region(game, max_strat, &absorbing);
    match game.states().find(|&s| !good[s]) {
        Some(state) => Err(Error::NotProper { state }),
        None => Ok(()),
    }
}

/// Best response in float arithmetic using the configured opponent solver.
pub fn best_response(game: &StochasticGame, max_strat: &Strategy, cfg: &SiConfig) -> Result<BestResponse<f64>> {
    check_proper(game, max_strat)?;
    match cfg.opponent {
        OpponentSolver::Exact => response_policy_iteration(game, max_strat, None),
        OpponentSolver::BviDomination => response_bvi(game, max_strat, None, cfg.inner_eps),
        OpponentSolver::UnsafeVi => response_vi(game, max_strat, cfg.inner_eps),
    }
}

/// Best response by policy iteration in exact rational arithmetic.
pub fn best_response_exact(game: &StochasticGame, max_strat: &Strategy) -> Result<BestResponse<BigRational>> {
    check_proper(game, max_strat)?;
    response_policy_iteration(game, max_strat, None)
}

/// Minimizer policy iteration on the MDP induced by `max_strat`.
///
/// States from which Minimizer can avoid the targets forever are found by
/// graph search first and fixed to value 0; on the rest every Minimizer
/// strategy reaches the targets or those states almost surely, which makes
/// greedy improvement converge to the optimum.
fn response_policy_iteration<V: Scalar>(
    game: &StochasticGame,
    max_strat: &Strategy,
    init: Option<&Strategy>,
) -> Result<BestResponse<V>> {
    let mdp = game.fix_strategy(max_strat);
    let avoid = zero_value_states(&mdp);
    let mut min_strat = Strategy::from_fn(game, Player::Minimizer, |s| {
        if avoid[s] {
            // An action keeping the play inside the avoiding region exists.
            return (0..game.num_actions(s)).find(|&a| game.action(s, a).stays_in(&avoid)).unwrap_or(0);
        }
        init.and_then(|t| t.get(s)).unwrap_or(0)
    });
    let mut rounds = 0;
    loop {
        rounds += 1;
        let values: Vec<V> = InducedChain::new(game, max_strat, &min_strat).reach_probabilities(game.target_mask())?;
        let mut changed = false;
        for s in game.states_of(Player::Minimizer) {
            if avoid[s] || game.is_target(s) {
                continue;
            }
            let current = min_strat.choice(s);
            let cur_val = game.value_of_state_action(&values, s, current);
            let mut best = (current, cur_val);
            for a in 0..game.num_actions(s) {
                let v = game.value_of_state_action(&values, s, a);
                if best.1.definitely_gt(&v) {
                    best = (a, v);
                }
            }
            if best.0 != current {
                min_strat.set(s, best.0);
                changed = true;
            }
        }
        if !changed {
            return Ok(BestResponse { values, min_strategy: min_strat, iterations: rounds });
        }
    }
}

/// True iff in every Minimizer state one action's upper bound lies below the
/// lower bounds of all other actions.
fn minimizer_choices_dominated(mdp: &StochasticGame, bounds: &BoundsVector) -> bool {
    mdp.states_of(Player::Minimizer).all(|s| {
        let k = mdp.num_actions(s);
        if k == 1 || mdp.is_target(s) {
            return true;
        }
        (0..k).any(|a| {
            let upper = mdp.action_value(&bounds.upper, s, a);
            (0..k).filter(|&b| b != a).all(|b| upper < mdp.action_value(&bounds.lower, s, b))
        })
    })
}

fn argmin_strategy(game: &StochasticGame, values: &[f64]) -> Strategy {
    Strategy::from_fn(game, Player::Minimizer, |s| {
        let mut best = (0, game.action_value(values, s, 0));
        for a in 1..game.num_actions(s) {
            let v = game.action_value(values, s, a);
            if best.1.definitely_gt(&v) {
                best = (a, v);
            }
        }
        best.0
    })
}

/// Bounded value iteration on the induced MDP, warm-started from `lower`
/// (a valid lower bound, e.g. the previous round's values), then a chain
/// solve for the chosen Minimizer strategy. If that strategy turns out not
/// to be optimal, policy iteration finishes from it.
fn response_bvi(
    game: &StochasticGame,
    max_strat: &Strategy,
    lower: Option<&[f64]>,
    eps: f64,
) -> Result<BestResponse<f64>> {
    let mdp = game.fix_strategy(max_strat);
    let pinned = crate::graph::compute_sinks(&mdp);
    let mut bounds = BoundsVector::initial(&mdp, &pinned);
    if let Some(prev) = lower {
        for s in mdp.states() {
            bounds.lower[s] = bounds.lower[s].max(prev[s]).min(bounds.upper[s]);
        }
    }
    let cfg = BviConfig::default().with_eps(eps).with_deflate_period(10);
    let (bounds, iterations, _, _) =
        iterate_bounds(&mdp, &cfg, &pinned, bounds, &mut |_, _| {}, |b| minimizer_choices_dominated(&mdp, b));
    let min_strat = argmin_strategy(game, &bounds.lower);
    let mut response = response_policy_iteration::<f64>(game, max_strat, Some(&min_strat))?;
    response.iterations += iterations;
    Ok(response)
}

/// Unguaranteed: plain value iteration on the induced MDP.
fn response_vi(game: &StochasticGame, max_strat: &Strategy, eps: f64) -> Result<BestResponse<f64>> {
    let mdp = game.fix_strategy(max_strat);
    let r = crate::bvi::solve_vi(&mdp, &BviConfig::default().with_eps(eps));
    Ok(BestResponse { min_strategy: argmin_strategy(game, &r.values), values: r.values, iterations: r.iterations })
}

/// Greedy Maximizer improvement: in each Maximizer state an action of
/// maximal value, keeping the current one when it is among the maximisers
/// and otherwise taking the lowest index.
pub fn improve<V: Scalar>(game: &StochasticGame, values: &[V], max_strat: &Strategy) -> Strategy {
    let mut next = max_strat.clone();
    for s in game.states_of(Player::Maximizer) {
        if game.is_target(s) {
            continue;
        }
        let vals: Vec<V> = (0..game.num_actions(s)).map(|a| game.value_of_state_action(values, s, a)).collect();
        let mut best = vals[0].clone();
        for v in &vals[1..] {
            if v.definitely_gt(&best) {
                best = v.clone();
            }
        }
        let current = max_strat.choice(s);
        if best.definitely_gt(&vals[current]) {
            let a = (0..vals.len()).find(|&a| !best.definitely_gt(&vals[a])).unwrap_or(current);
            next.set(s, a);
        }
    }
    next
}

/// Makes a Maximizer strategy proper: choices from which the play reaches
/// targets or value-zero states almost surely are kept, the others are
/// reassigned by a backward search from the kept region, preferring actions
/// of higher estimated value.
pub fn make_proper(game: &StochasticGame, candidate: &Strategy, estimates: Option<&[f64]>) -> Strategy {
    let absorbing = absorbing_set(game);
    let good = proper_region(game, candidate, &absorbing);
    let start: Vec<bool> = game.states().map(|s| absorbing[s] || good[s]).collect();
    let layers = attractor_layers(game, &start, |s, touching| match estimates {
        None => touching[0],
        Some(est) => {
            let mut best = touching[0];
            for &a in &touching[1..] {
                if game.action_value(est, s, a) > game.action_value(est, s, best) {
                    best = a;
                }
            }
            best
        }
    });
    Strategy::from_fn(game, Player::Maximizer, |s| layers.choice[s].unwrap_or_else(|| candidate.choice(s)))
}

/// Maximizer strategy greedy in `estimates` (lowest index on ties), made proper.
pub fn strategy_from_estimates(game: &StochasticGame, estimates: &[f64]) -> Strategy {
    let greedy = Strategy::from_fn(game, Player::Maximizer, |s| {
        let mut best = (0, game.action_value(estimates, s, 0));
        for a in 1..game.num_actions(s) {
            let v = game.action_value(estimates, s, a);
            if v.definitely_gt(&best.1) {
                best = (a, v);
            }
        }
        best.0
    });
    make_proper(game, &greedy, Some(estimates))
}

pub fn solve_si(game: &StochasticGame, cfg: &SiConfig) -> Result<SolveResult> {
    solve_si_observed(game, cfg, |_, _| {})
}

/// [`solve_si`], calling `observer(round, values)` with every best-response
/// value vector.
pub fn solve_si_observed(
    game: &StochasticGame,
    cfg: &SiConfig,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<SolveResult> {
    let max_strat = match &cfg.warm_start {
        Some(est) => {
            if est.len() != game.num_states() {
                return Err(Error::InvalidArgument(format!(
                    "warm start has {} values, game has {} states",
                    est.len(),
                    game.num_states()
                )));
            }
            strategy_from_estimates(game, est)
        }
        None => attractor_strategy(game),
    };
    if cfg.exact_rational && cfg.opponent == OpponentSolver::Exact {
        let (resp, max_strat, rounds, converged) =
            iterate(game, max_strat, cfg.max_rounds, &mut observer, |max_strat, _| {
                check_proper(game, max_strat)?;
                response_policy_iteration::<BigRational>(game, max_strat, None)
            })?;
        let values: Vec<f64> = resp.values.iter().map(rational_to_f64).collect();
        return Ok(finish(game, values, Some(resp.values), max_strat, resp.min_strategy, rounds, converged));
    }
    let (resp, max_strat, rounds, converged) =
        iterate(game, max_strat, cfg.max_rounds, &mut observer, |max_strat, prev: Option<&BestResponse<f64>>| {
            check_proper(game, max_strat)?;
            match cfg.opponent {
                OpponentSolver::Exact => response_policy_iteration(game, max_strat, prev.map(|p| &p.min_strategy)),
                OpponentSolver::BviDomination => {
                    response_bvi(game, max_strat, prev.map(|p| p.values.as_slice()), cfg.inner_eps)
                }
                OpponentSolver::UnsafeVi => response_vi(game, max_strat, cfg.inner_eps),
            }
        })?;
    Ok(finish(game, resp.values, None, max_strat, resp.min_strategy, rounds, converged))
}

type Iterated<V> = (BestResponse<V>, Strategy, usize, bool);

fn iterate<V: Scalar>(
    game: &StochasticGame,
    mut max_strat: Strategy,
    max_rounds: usize,
    observer: &mut impl FnMut(usize, &[f64]),
    mut respond: impl FnMut(&Strategy, Option<&BestResponse<V>>) -> Result<BestResponse<V>>,
) -> Result<Iterated<V>> {
    let mut prev: Option<BestResponse<V>> = None;
    for round in 1..=max_rounds.max(1) {
        let resp = respond(&max_strat, prev.as_ref())?;
        let as_f64: Vec<f64> = resp.values.iter().map(Scalar::to_f64).collect();
        observer(round, &as_f64);
        let next = improve(game, &resp.values, &max_strat);
        if next == max_strat {
            return Ok((resp, max_strat, round, true));
        }
        max_strat = next;
        if round == max_rounds.max(1) {
            log::debug!("strategy iteration hit the cap of {max_rounds} rounds");
            return Ok((resp, max_strat, round, false));
        }
        prev = Some(resp);
    }
    unreachable!("loop returns on its last round")
}

fn finish(
    game: &StochasticGame,
    values: Vec<f64>,
    exact_values: Option<Vec<BigRational>>,
    max_strategy: Strategy,
    min_strategy: Strategy,
    iterations: usize,
    converged: bool,
) -> SolveResult {
    SolveResult {
        stats: SolveStats { residual: bellman_residual(game, &values), ..SolveStats::default() },
        values,
        exact_values,
        upper: None,
        max_strategy,
        min_strategy,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::fig1;
    use crate::game::GameBuilder;
    use crate::oracle::exact_solve;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn fig1_exit() -> (StochasticGame, Strategy) {
        let g = fig1();
        let mut max_strat = Strategy::first_actions(&g, Player::Maximizer);
        max_strat.set(1, 1);
        (g, max_strat)
    }

    #[test]
    fn response_on_fig1() {
        let (g, max_strat) = fig1_exit();
        let r = best_response_exact(&g, &max_strat).unwrap();
        assert_eq!(r.values, vec![q(1, 2), q(1, 2), q(1, 1), q(0, 1)]);
        let cfg = SiConfig { opponent: OpponentSolver::BviDomination, ..SiConfig::default() };
        let r = best_response(&g, &max_strat, &cfg).unwrap();
        assert!((r.values[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn improper_strategy_is_rejected() {
        let g = fig1();
        let max_strat = Strategy::first_actions(&g, Player::Maximizer);
        assert!(matches!(best_response_exact(&g, &max_strat), Err(Error::NotProper { .. })));
    }

    #[test]
    fn minimizer_picks_cheaper_action() {
        // Minimizer state 0 chooses between a 1/5 and a 7/10 coin.
        let mut b = GameBuilder::new(3);
        b.owner(0, Player::Minimizer).owner(1, Player::Maximizer).owner(2, Player::Maximizer).target(1);
        b.action_frac(0, "hi", &[(1, 7, 10), (2, 3, 10)]).action_frac(0, "lo", &[(1, 1, 5), (2, 4, 5)]).action_frac(
            2,
            "stay",
            &[(2, 1, 1)],
        );
        let g = b.build().unwrap();
        let max_strat = Strategy::first_actions(&g, Player::Maximizer);
        let r = best_response_exact(&g, &max_strat).unwrap();
        assert_eq!(r.min_strategy.get(0), Some(1));
        assert_eq!(r.values[0], q(1, 5));
    }

    #[test]
    fn minimizer_prefers_cycle_over_tied_exit() {
        // 0 (min): exit to a 1/2 coin, or move to 1; 1 (min) returns to 0 or
        // takes the coin too. Staying in {0, 1} forever is optimal (value 0).
        let mut b = GameBuilder::new(4);
        b.owner(0, Player::Minimizer).owner(1, Player::Minimizer).owner(2, Player::Maximizer);
        b.owner(3, Player::Maximizer).target(2);
        b.action_frac(0, "exit", &[(2, 1, 2), (3, 1, 2)])
            .action_frac(0, "move", &[(1, 1, 1)])
            .action_frac(1, "back", &[(0, 1, 1)])
            .action_frac(1, "exit", &[(2, 1, 2), (3, 1, 2)])
            .action_frac(3, "stay", &[(3, 1, 1)]);
        let g = b.build().unwrap();
        let r = best_response_exact(&g, &Strategy::first_actions(&g, Player::Maximizer)).unwrap();
        assert_eq!(r.values[0], q(0, 1));
    }

    #[test]
    fn improve_keeps_incumbent_on_ties() {
        let (g, max_strat) = fig1_exit();
        let values = vec![q(1, 2), q(1, 2), q(1, 1), q(0, 1)];
        assert_eq!(improve(&g, &values, &max_strat), max_strat);
        let zero = vec![q(0, 1); 4];
        let stuck = Strategy::first_actions(&g, Player::Maximizer);
        assert_eq!(improve(&g, &zero, &stuck), stuck);
        // Strictly dominated choice is switched.
        let values = vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)];
        assert_eq!(improve(&g, &values, &stuck).get(1), Some(1));
    }

    #[test]
    fn make_proper_repairs_cycle() {
        let g = fig1();
        let stuck = Strategy::first_actions(&g, Player::Maximizer);
        assert_eq!(make_proper(&g, &stuck, None).get(1), Some(1));
        let (_, good) = fig1_exit();
        assert_eq!(make_proper(&g, &good, None), good);
    }

    #[test]
    fn solves_fig1_all_modes() {
        let g = fig1();
        let exact = solve_si(&g, &SiConfig { exact_rational: true, ..SiConfig::default() }).unwrap();
        assert_eq!(exact.exact_values.unwrap()[0], q(1, 2));
        assert_eq!(exact.iterations, 1);
        for opponent in [OpponentSolver::Exact, OpponentSolver::BviDomination] {
            let r = solve_si(&g, &SiConfig { opponent, ..SiConfig::default() }).unwrap();
            assert!((r.values[0] - 0.5).abs() < 1e-9);
            assert_eq!(r.max_strategy.get(1), Some(1));
        }
        let warm = SiConfig { warm_start: Some(vec![0.5, 0.5, 1.0, 0.0]), ..SiConfig::default() };
        assert!((solve_si(&g, &warm).unwrap().values[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matches_oracle_on_random_games() {
        use crate::generators::{gen_random, RandomGameParams};
        for seed in 0..40 {
            let g = gen_random(seed, &RandomGameParams::default());
            let oracle = exact_solve(&g).unwrap();
            let r = solve_si(&g, &SiConfig { exact_rational: true, ..SiConfig::default() }).unwrap();
            assert_eq!(r.exact_values.unwrap(), oracle.values, "seed {seed}");
        }
    }
}
