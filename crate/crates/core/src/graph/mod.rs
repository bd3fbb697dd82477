//! Graph analyses on the game structure: sinks, SCCs, end components and
//! attractors.

pub mod mec;
pub mod scc;

use std::collections::VecDeque;

use crate::game::{Player, StochasticGame};
use crate::strategy::Strategy;

pub use mec::{best_exit, mec_decomposition, mec_decomposition_restricted, Mec, MecCatalog};
pub use scc::{scc_order, tarjan};

/// Sorted state indices of a mask.
pub fn mask_to_states(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(s, _)| s).collect()
}

pub fn states_to_mask(n: usize, states: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &s in states {
        m[s] = true;
    }
    m
}

/// States with no path to a target under any strategies (`Z`).
pub fn compute_sinks(game: &StochasticGame) -> Vec<bool> {
    let pred = game.predecessors();
    let mut reach = game.target_mask().to_vec();
    let mut queue: VecDeque<usize> = game.targets().collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !reach[s] {
                reach[s] = true;
                queue.push_back(s);
            }
        }
    }
    reach.iter().map(|&r| !r).collect()
}

/// States of value zero: Minimizer can keep the play away from the targets
/// almost surely. Superset of [`compute_sinks`]; it also contains regions
/// such as Minimizer-only end components.
pub fn zero_value_states(game: &StochasticGame) -> Vec<bool> {
    let layers = attractor_layers(game, game.target_mask(), |_, touching| touching[0]);
    layers.layer.iter().map(|l| l.is_none()).collect()
}

/// Result of the layered backward search.
pub(crate) struct Layers {
    pub layer: Vec<Option<usize>>,
    /// For Maximizer states discovered outside the start set: the chosen action.
    pub choice: Vec<Option<usize>>,
}

/// Layered backward search from `start`. A Maximizer state joins layer `i`
/// once some action reaches a lower layer with positive probability; a
/// Minimizer state joins once all of its actions do. `pick(s, touching)`
/// selects among the touching actions of a joining Maximizer state, given
/// in ascending order.
pub(crate) fn attractor_layers(
    game: &StochasticGame,
    start: &[bool],
    mut pick: impl FnMut(usize, &[usize]) -> usize,
) -> Layers {
    let n = game.num_states();
    // (state, action) pairs reaching each state.
    let mut pre: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for s in game.states() {
        for (a, act) in game.actions(s).iter().enumerate() {
            for t in act.successors() {
                pre[t].push((s, a));
            }
        }
    }
    let mut layer: Vec<Option<usize>> = start.iter().map(|&b| b.then_some(0)).collect();
    let mut choice = vec![None; n];
    let mut touched: Vec<Vec<bool>> = game.states().map(|s| vec![false; game.num_actions(s)]).collect();
    let mut touched_count = vec![0usize; n];
    let mut frontier: Vec<usize> = (0..n).filter(|&s| start[s]).collect();
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut candidates = Vec::new();
        for &t in &frontier {
            for &(s, a) in &pre[t] {
                if layer[s].is_some() || touched[s][a] {
                    continue;
                }
                touched[s][a] = true;
                touched_count[s] += 1;
                candidates.push(s);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut next = Vec::new();
        for s in candidates {
            let joins = match game.owner(s) {
                Player::Maximizer => true,
                Player::Minimizer => touched_count[s] == game.num_actions(s),
            };
            if !joins {
                continue;
            }
            if game.owner(s) == Player::Maximizer {
                let acts: Vec<usize> = (0..game.num_actions(s)).filter(|&a| touched[s][a]).collect();
                choice[s] = Some(pick(s, &acts));
            }
            layer[s] = Some(depth);
            next.push(s);
        }
        frontier = next;
    }
    Layers { layer, choice }
}

/// Target set `F ∪ Z` used for properness: targets plus value-zero states.
pub fn absorbing_set(game: &StochasticGame) -> Vec<bool> {
    let zero = zero_value_states(game);
    game.states().map(|s| game.is_target(s) || zero[s]).collect()
}

/// Proper Maximizer strategy from the layered backward search starting at
/// targets and value-zero states. Each discovered Maximizer state takes its
/// lowest-indexed action reaching a lower layer; states in the start set
/// take their first action.
pub fn attractor_strategy(game: &StochasticGame) -> Strategy {
    let start = absorbing_set(game);
    let layers = attractor_layers(game, &start, |_, touching| touching[0]);
    Strategy::from_fn(game, Player::Maximizer, |s| layers.choice[s].unwrap_or(0))
}

/// Proper-strategy check: under `max` and any Minimizer behaviour, the play
/// reaches `absorbing` almost surely. Returns a violating state if any.
pub fn find_improper_state(game: &StochasticGame, max: &Strategy, absorbing: &[bool]) -> Option<usize> {
    let good = proper_region(game, max, absorbing);
    game.states().find(|&s| !good[s])
}

/// States from which `max` reaches `absorbing` almost surely against every
/// Minimizer strategy.
pub fn proper_region(game: &StochasticGame, max: &Strategy, absorbing: &[bool]) -> Vec<bool> {
    // End components of the MDP induced by `max`, outside the absorbing set,
    // are exactly the places where Minimizer can keep the play forever.
    let cat = mec_decomposition_restricted(game, |s, a| {
        !absorbing[s] && (game.owner(s) == Player::Minimizer || max.get(s) == Some(a))
    });
    let mut bad = vec![false; game.num_states()];
    let mut queue = VecDeque::new();
    for m in cat.iter() {
        for &s in &m.states {
            bad[s] = true;
            queue.push_back(s);
        }
    }
    // Everything that can reach a trap with positive probability is bad too.
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); game.num_states()];
    for s in game.states() {
        if absorbing[s] {
            continue;
        }
        for (a, act) in game.actions(s).iter().enumerate() {
            if game.owner(s) == Player::Maximizer && max.get(s) != Some(a) {
                continue;
            }
            for t in act.successors() {
                pred[t].push(s);
            }
        }
    }
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !bad[s] {
                bad[s] = true;
                queue.push_back(s);
            }
        }
    }
    bad.iter().map(|&b| !b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::fig1;
    use crate::game::GameBuilder;

    #[test]
    fn fig1_sinks() {
        let g = fig1();
        assert_eq!(mask_to_states(&compute_sinks(&g)), vec![3]);
        assert_eq!(mask_to_states(&zero_value_states(&g)), vec![3]);
    }

    #[test]
    fn no_sinks_when_everything_reaches_target() {
        let mut b = GameBuilder::new(2);
        b.owner(0, Player::Maximizer).owner(1, Player::Minimizer).target(1);
        b.action_frac(0, "go", &[(1, 1, 1)]);
        assert!(mask_to_states(&compute_sinks(&b.build().unwrap())).is_empty());
    }

    #[test]
    fn minimizer_trap_has_value_zero_but_is_not_a_sink() {
        // Minimizer state 0 may loop forever or move to the target.
        let mut b = GameBuilder::new(2);
        b.owner(0, Player::Minimizer).owner(1, Player::Maximizer).target(1);
        b.action_frac(0, "stay", &[(0, 1, 1)]).action_frac(0, "go", &[(1, 1, 1)]);
        let g = b.build().unwrap();
        assert!(mask_to_states(&compute_sinks(&g)).is_empty());
        assert_eq!(mask_to_states(&zero_value_states(&g)), vec![0]);
    }

    #[test]
    fn fig1_attractor_picks_exit() {
        let g = fig1();
        let max_strat = attractor_strategy(&g);
        assert_eq!(max_strat.get(1), Some(1));
        assert!(find_improper_state(&g, &max_strat, &absorbing_set(&g)).is_none());
        let mut stuck = max_strat.clone();
        stuck.set(1, 0);
        assert!(find_improper_state(&g, &stuck, &absorbing_set(&g)).is_some());
    }
}
