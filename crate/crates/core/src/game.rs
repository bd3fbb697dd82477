//! Explicit-state stochastic games with a reachability objective.

use std::collections::HashSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::numeric::{rational_to_f64, Scalar};
use crate::strategy::Strategy;

/// Probabilities below this are rejected instead of silently dropped.
pub const MIN_PROBABILITY: f64 = 1e-15;

/// Allowed deviation of a distribution's sum from one.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    #[serde(rename = "max")]
    Maximizer,
    #[serde(rename = "min")]
    Minimizer,
}

impl Player {
    pub fn keyword(self) -> &'static str {
        match self {
            Player::Maximizer => "max",
            Player::Minimizer => "min",
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Maximizer => Player::Minimizer,
            Player::Minimizer => Player::Maximizer,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// One successor of an action together with its probability, stored both
/// exactly and as a float.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub state: usize,
    pub prob: f64,
    pub exact: BigRational,
}

impl Branch {
    pub fn new(state: usize, exact: BigRational) -> Self {
        Branch { state, prob: rational_to_f64(&exact), exact }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub name: String,
    pub branches: Vec<Branch>,
}

impl Action {
    pub fn successors(&self) -> impl Iterator<Item = usize> + '_ {
        self.branches.iter().map(|b| b.state)
    }

    /// True iff every successor lies in `set`.
    pub fn stays_in(&self, set: &[bool]) -> bool {
        self.branches.iter().all(|b| set[b.state])
    }

    pub fn touches(&self, set: &[bool]) -> bool {
        self.branches.iter().any(|b| set[b.state])
    }
}

/// A validated game. Immutable once built; share it freely between solves.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticGame {
    owners: Vec<Player>,
    actions: Vec<Vec<Action>>,
    initial: usize,
    targets: Vec<bool>,
}

impl StochasticGame {
    /// Assembles a game from parts that are valid by construction, skipping
    /// validation (used for derived games whose probabilities may fall below
    /// the parser's lower limit).
    pub(crate) fn from_parts(
        owners: Vec<Player>,
        actions: Vec<Vec<Action>>,
        initial: usize,
        targets: Vec<bool>,
    ) -> Self {
        debug_assert!(owners.len() == actions.len() && owners.len() == targets.len());
        debug_assert!(actions.iter().all(|a| !a.is_empty()));
        StochasticGame { owners, actions, initial, targets }
    }

    pub fn num_states(&self) -> usize {
        self.owners.len()
    }

    pub fn states(&self) -> std::ops::Range<usize> {
        0..self.owners.len()
    }

    pub fn owner(&self, s: usize) -> Player {
        self.owners[s]
    }

    pub fn owners(&self) -> &[Player] {
        &self.owners
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn actions(&self, s: usize) -> &[Action] {
        &self.actions[s]
    }

    pub fn action(&self, s: usize, a: usize) -> &Action {
        &self.actions[s][a]
    }

    pub fn num_actions(&self, s: usize) -> usize {
        self.actions[s].len()
    }

    pub fn is_target(&self, s: usize) -> bool {
        self.targets[s]
    }

    pub fn target_mask(&self) -> &[bool] {
        &self.targets
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().enumerate().filter(|(_, &t)| t).map(|(s, _)| s)
    }

    pub fn states_of(&self, player: Player) -> impl Iterator<Item = usize> + '_ {
        self.states().filter(move |&s| self.owners[s] == player)
    }

    pub fn total_actions(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    pub fn max_actions(&self) -> usize {
        self.actions.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn avg_actions(&self) -> f64 {
        self.total_actions() as f64 / self.num_states().max(1) as f64
    }

    /// Predecessor lists of the underlying graph (`s -> s'` iff some action
    /// of `s` reaches `s'`). Each predecessor appears once.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for s in self.states() {
            let mut seen = HashSet::new();
            for a in &self.actions[s] {
                for t in a.successors() {
                    if seen.insert(t) {
                        pred[t].push(s);
                    }
                }
            }
        }
        pred
    }

    /// Successor lists of the underlying graph, sorted and deduplicated.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        self.states()
            .map(|s| {
                let mut succ: Vec<usize> = self.actions[s].iter().flat_map(Action::successors).collect();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect()
    }

    /// `Σ δ(s,a,s')·values(s')` in any scalar field.
    pub fn value_of_state_action<V: Scalar>(&self, values: &[V], s: usize, a: usize) -> V {
        let mut acc = V::zero();
        for b in &self.actions[s][a].branches {
            acc = acc + V::from_branch(b) * values[b.state].clone();
        }
        acc
    }

    /// Float specialisation of [`Self::value_of_state_action`] for the hot loops.
    #[inline]
    pub fn action_value(&self, values: &[f64], s: usize, a: usize) -> f64 {
        self.actions[s][a].branches.iter().map(|b| b.prob * values[b.state]).sum()
    }

    /// The game in which the states of `strategy.player()` keep only their
    /// chosen action (as action 0). Fixing one player's strategy yields an MDP
    /// for the opponent.
    pub fn fix_strategy(&self, strategy: &Strategy) -> StochasticGame {
        let actions = self
            .states()
            .map(|s| match strategy.get(s) {
                Some(a) => vec![self.actions[s][a].clone()],
                None => self.actions[s].clone(),
            })
            .collect();
        StochasticGame { owners: self.owners.clone(), actions, initial: self.initial, targets: self.targets.clone() }
    }

    /// Number of pure memoryless profiles, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.actions.iter().fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128))
    }
}

/// Action name and successor distribution awaiting validation.
type PendingAction = (String, Vec<(usize, BigRational)>);

/// Incremental construction of a [`StochasticGame`].
///
/// Target states are normalised on [`GameBuilder::build`]: whatever actions
/// were declared are replaced by a single probability-one self-loop.
#[derive(Clone, Debug)]
pub struct GameBuilder {
    owners: Vec<Option<Player>>,
    actions: Vec<Vec<PendingAction>>,
    initial: usize,
    targets: Vec<bool>,
}

impl GameBuilder {
    pub fn new(num_states: usize) -> Self {
        GameBuilder {
            owners: vec![None; num_states],
            actions: vec![Vec::new(); num_states],
            initial: 0,
            targets: vec![false; num_states],
        }
    }

    pub fn num_states(&self) -> usize {
        self.owners.len()
    }

    /// Appends a fresh state and returns its index.
    pub fn add_state(&mut self, owner: Player) -> usize {
        self.owners.push(Some(owner));
        self.actions.push(Vec::new());
        self.targets.push(false);
        self.owners.len() - 1
    }

    pub fn owner(&mut self, s: usize, player: Player) -> &mut Self {
        self.owners[s] = Some(player);
        self
    }

    pub fn initial(&mut self, s: usize) -> &mut Self {
        self.initial = s;
        self
    }

    pub fn target(&mut self, s: usize) -> &mut Self {
        self.targets[s] = true;
        self
    }

    pub fn action(&mut self, s: usize, name: impl Into<String>, dist: Vec<(usize, BigRational)>) -> &mut Self {
        self.actions[s].push((name.into(), dist));
        self
    }

    /// Convenience for small integer fractions: `(successor, numer, denom)`.
    pub fn action_frac(&mut self, s: usize, name: &str, dist: &[(usize, i64, i64)]) -> &mut Self {
        let dist = dist.iter().map(|&(t, n, d)| (t, BigRational::new(n.into(), d.into()))).collect();
        self.action(s, name, dist)
    }

    pub fn build(&self) -> Result<StochasticGame, GameError> {
        let n = self.owners.len();
        if n == 0 {
            return Err(GameError::Empty);
        }
        if self.initial >= n {
            return Err(GameError::InitialOutOfRange { initial: self.initial, states: n });
        }
        if !self.targets.iter().any(|&t| t) {
            return Err(GameError::NoTarget);
        }
        let mut owners = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        for s in 0..n {
            let owner = self.owners[s].ok_or(GameError::MissingOwner { state: s })?;
            owners.push(owner);
            if self.targets[s] {
                let name = self.actions[s].first().map(|(name, _)| name.clone()).unwrap_or_else(|| "loop".to_string());
                actions.push(vec![Action { name, branches: vec![Branch::new(s, BigRational::one())] }]);
                continue;
            }
            if self.actions[s].is_empty() {
                return Err(GameError::EmptyActionSet { state: s });
            }
            let mut names = HashSet::new();
            let mut acts = Vec::with_capacity(self.actions[s].len());
            for (name, dist) in &self.actions[s] {
                if !names.insert(name.as_str()) {
                    return Err(GameError::DuplicateAction { state: s, action: name.clone() });
                }
                acts.push(validate_distribution(s, name, dist, n)?);
            }
            actions.push(acts);
        }
        Ok(StochasticGame { owners, actions, initial: self.initial, targets: self.targets.clone() })
    }
}

fn validate_distribution(s: usize, name: &str, dist: &[(usize, BigRational)], n: usize) -> Result<Action, GameError> {
    let mut seen = HashSet::new();
    let mut sum = BigRational::zero();
    for (t, p) in dist {
        if *t >= n {
            return Err(GameError::UnknownState { state: s, action: name.to_string(), successor: *t });
        }
        if !seen.insert(*t) {
            return Err(GameError::DuplicateSuccessor { state: s, action: name.to_string(), successor: *t });
        }
        if !p.is_positive() || rational_to_f64(p) < MIN_PROBABILITY || *p > BigRational::one() {
            return Err(GameError::InvalidProbability {
                state: s,
                action: name.to_string(),
                successor: *t,
                prob: rational_to_f64(p),
            });
        }
        sum += p;
    }
    if dist.is_empty() {
        return Err(GameError::DistributionSum { state: s, action: name.to_string(), sum: 0.0 });
    }
    let deviation = rational_to_f64(&(sum.clone() - BigRational::one())).abs();
    if deviation > SUM_TOLERANCE {
        return Err(GameError::DistributionSum { state: s, action: name.to_string(), sum: rational_to_f64(&sum) });
    }
    // Sums within tolerance but not exactly one are renormalised so the
    // exact representation stays a distribution.
    let exact_one = sum.is_one();
    let branches = dist
        .iter()
        .map(|(t, p)| {
            let p = if exact_one { p.clone() } else { p / &sum };
            Branch::new(*t, p)
        })
        .collect();
    Ok(Action { name: name.to_string(), branches })
}
