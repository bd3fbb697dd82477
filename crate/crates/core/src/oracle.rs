//! Exact reference values by enumerating all memoryless deterministic
//! strategy profiles and solving each induced chain in rational arithmetic.
//! Exponential; meant for small games and tests.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::chain::InducedChain;
use crate::error::{Error, Result};
use crate::game::{Player, StochasticGame};
use crate::numeric::rational_to_f64;
use crate::strategy::Strategy;

/// Default limit on the number of enumerated profiles.
pub const DEFAULT_PROFILE_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug)]
pub struct OracleSolution {
    /// `max_σ min_τ` per state.
    pub values: Vec<BigRational>,
    /// `min_τ max_σ` per state; equal to `values` by determinacy.
    pub min_max_values: Vec<BigRational>,
    /// Maximizer strategy optimal from every state.
    pub max_strategy: Strategy,
    /// Minimizer strategy optimal from every state.
    pub min_strategy: Strategy,
    /// Whether `values` satisfy the Bellman equations exactly.
    pub bellman_consistent: bool,
    pub profiles: u128,
}

impl OracleSolution {
    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }
}

pub fn exact_solve(game: &StochasticGame) -> Result<OracleSolution> {
    exact_solve_with_budget(game, DEFAULT_PROFILE_BUDGET)
}

/// All strategies of `player`, in lexicographic order of choices (state
/// ascending, lower state indices varying slowest).
pub fn enumerate_strategies(game: &StochasticGame, player: Player) -> Vec<Strategy> {
    let owned: Vec<usize> = game.states_of(player).collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; owned.len()];
    loop {
        let mut strategy = Strategy::first_actions(game, player);
        for (i, &s) in owned.iter().enumerate() {
            strategy.set(s, digits[i]);
        }
        out.push(strategy);
        // Odometer increment, last state fastest.
        let mut i = owned.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < game.num_actions(owned[i]) {
                break;
            }
            digits[i] = 0;
        }
    }
}

pub fn exact_solve_with_budget(game: &StochasticGame, budget: u128) -> Result<OracleSolution> {
    let profiles = game.profile_count();
    if profiles > budget {
        return Err(Error::BudgetExceeded { profiles, budget });
    }
    let max_choices = enumerate_strategies(game, Player::Maximizer);
    let min_choices = enumerate_strategies(game, Player::Minimizer);
    let n = game.num_states();
    let mut min_over_tau: Vec<Option<Vec<BigRational>>> = vec![None; max_choices.len()];
    let mut max_over_sigma: Vec<Option<Vec<BigRational>>> = vec![None; min_choices.len()];
    for (i, max_strat) in max_choices.iter().enumerate() {
        for (j, min_strat) in min_choices.iter().enumerate() {
            let v: Vec<BigRational> =
                InducedChain::new(game, max_strat, min_strat).reach_probabilities(game.target_mask())?;
            merge(&mut min_over_tau[i], &v, |new, old| new < old);
            merge(&mut max_over_sigma[j], &v, |new, old| new > old);
        }
    }
    let mut values = vec![BigRational::zero(); n];
    for v in min_over_tau.iter().flatten() {
        for s in 0..n {
            if v[s] > values[s] {
                values[s] = v[s].clone();
            }
        }
    }
    let mut min_max_values = vec![BigRational::one(); n];
    for v in max_over_sigma.iter().flatten() {
        for s in 0..n {
            if v[s] < min_max_values[s] {
                min_max_values[s] = v[s].clone();
            }
        }
    }
    // Uniformly optimal witnesses: the first strategies attaining the value
    // at every state. They exist because memoryless strategies are optimal.
    let max_idx = min_over_tau.iter().position(|v| v.as_deref() == Some(&values[..]));
    let min_idx = max_over_sigma.iter().position(|v| v.as_deref() == Some(&min_max_values[..]));
    let bellman_consistent = is_bellman_fixpoint(game, &values);
    Ok(OracleSolution {
        max_strategy: max_idx.map(|i| max_choices[i].clone()).unwrap_or_else(|| max_choices[0].clone()),
        min_strategy: min_idx.map(|j| min_choices[j].clone()).unwrap_or_else(|| min_choices[0].clone()),
        bellman_consistent: bellman_consistent && max_idx.is_some() && min_idx.is_some(),
        values,
        min_max_values,
        profiles,
    })
}

fn merge(slot: &mut Option<Vec<BigRational>>, v: &[BigRational], better: impl Fn(&BigRational, &BigRational) -> bool) {
    match slot {
        None => *slot = Some(v.to_vec()),
        Some(acc) => {
            for (a, x) in acc.iter_mut().zip(v) {
                if better(x, a) {
                    *a = x.clone();
                }
            }
        }
    }
}

/// Exact check of the Bellman equations: each non-target value is the
/// max/min over its actions of `Σ δ·values`.
pub fn is_bellman_fixpoint(game: &StochasticGame, values: &[BigRational]) -> bool {
    game.states().all(|s| {
        if game.is_target(s) {
            return values[s] == BigRational::one();
        }
        let vals = (0..game.num_actions(s)).map(|a| game.value_of_state_action(values, s, a));
        let best = match game.owner(s) {
            Player::Maximizer => vals.max(),
            Player::Minimizer => vals.min(),
        };
        best.as_ref() == Some(&values[s])
    })
}
