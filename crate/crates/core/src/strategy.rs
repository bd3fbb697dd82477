use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::game::{Player, StochasticGame};

/// Memoryless deterministic strategy: an action index for every state owned
/// by `player`, nothing elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    player: Player,
    choices: Vec<Option<usize>>,
}

impl Strategy {
    /// Strategy choosing `pick(s)` in every state of `player`.
    pub fn from_fn(game: &StochasticGame, player: Player, mut pick: impl FnMut(usize) -> usize) -> Self {
        let choices = game.states().map(|s| (game.owner(s) == player).then(|| pick(s))).collect();
        Strategy { player, choices }
    }

    /// Lowest action index everywhere.
    pub fn first_actions(game: &StochasticGame, player: Player) -> Self {
        Self::from_fn(game, player, |_| 0)
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Chosen action in `s`; `None` for states of the other player.
    pub fn get(&self, s: usize) -> Option<usize> {
        self.choices[s]
    }

    pub fn choice(&self, s: usize) -> usize {
        self.choices[s].unwrap_or_else(|| panic!("state {s} is not owned by {}", self.player))
    }

    pub fn set(&mut self, s: usize, a: usize) {
        assert!(self.choices[s].is_some(), "state {s} is not owned by {}", self.player);
        self.choices[s] = Some(a);
    }

    pub fn choices(&self) -> &[Option<usize>] {
        &self.choices
    }

    /// True iff the strategy covers exactly the player's states with valid actions.
    pub fn is_valid_for(&self, game: &StochasticGame) -> bool {
        self.choices.len() == game.num_states()
            && game.states().all(|s| match self.choices[s] {
                Some(a) => game.owner(s) == self.player && a < game.num_actions(s),
                None => game.owner(s) != self.player,
            })
    }
}

/// Chosen action in `s` under the profile `(max, min)`.
pub fn profile_action(game: &StochasticGame, max: &Strategy, min: &Strategy, s: usize) -> usize {
    match game.owner(s) {
        Player::Maximizer => max.choice(s),
        Player::Minimizer => min.choice(s),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub deflations: usize,
    pub sub_solves: usize,
    /// Largest `U - L` at termination (zero for exact methods).
    #[serde(with = "unknown_as_null")]
    pub gap: f64,
    /// Largest Bellman residual of the returned values.
    pub residual: f64,
    /// Conservative bound on the distance to the true values, where known.
    #[serde(with = "unknown_as_null")]
    pub error_bound: f64,
    /// Achieved gap per SCC, for topological solving.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub scc_gaps: Vec<f64>,
}

/// NaN (no bound known) is written as JSON `null` and read back as NaN.
mod unknown_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        x.is_finite().then_some(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Values and strategies returned by every solver.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub values: Vec<f64>,
    /// Exact values when the solver ran in rational arithmetic.
    pub exact_values: Option<Vec<BigRational>>,
    /// Upper bounds, for the interval-based methods.
    pub upper: Option<Vec<f64>>,
    pub max_strategy: Strategy,
    pub min_strategy: Strategy,
    pub iterations: usize,
    pub converged: bool,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn initial_value(&self, game: &StochasticGame) -> f64 {
        self.values[game.initial()]
    }
}

/// Largest `|V(s) - Bellman(V)(s)|` over non-target states.
pub fn bellman_residual(game: &StochasticGame, values: &[f64]) -> f64 {
    game.states()
        .filter(|&s| !game.is_target(s))
        .map(|s| {
            let vals = (0..game.num_actions(s)).map(|a| game.action_value(values, s, a));
            let best = match game.owner(s) {
                Player::Maximizer => vals.fold(f64::NEG_INFINITY, f64::max),
                Player::Minimizer => vals.fold(f64::INFINITY, f64::min),
            };
            (best - values[s]).abs()
        })
        .fold(0.0, f64::max)
}
