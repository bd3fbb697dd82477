//! Maximal end components by iterated SCC pruning.

use crate::game::{Player, StochasticGame};
use crate::graph::scc::tarjan;

/// One maximal end component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mec {
    /// Member states, ascending.
    pub states: Vec<usize>,
    /// Internal actions `B` as `(state, action)`; every successor stays in `states`.
    pub actions: Vec<(usize, usize)>,
    /// Exiting pairs `E^T`: actions of members, in the full game, with a successor outside.
    pub exits: Vec<(usize, usize)>,
}

impl Mec {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.states.binary_search(&s).is_ok()
    }

    /// Player owning all members, if there is only one.
    pub fn single_owner(&self, game: &StochasticGame) -> Option<Player> {
        let first = game.owner(self.states[0]);
        self.states.iter().all(|&s| game.owner(s) == first).then_some(first)
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &s in &self.states {
            m[s] = true;
        }
        m
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MecCatalog {
    pub mecs: Vec<Mec>,
    /// MEC index of each state, if any.
    pub index: Vec<Option<usize>>,
}

impl MecCatalog {
    pub fn len(&self) -> usize {
        self.mecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mecs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mec> {
        self.mecs.iter()
    }

    /// MECs other than target self-loops and components without a path to a
    /// target (the ones that matter for value computation).
    pub fn nontrivial<'a>(&'a self, game: &'a StochasticGame, sinks: &'a [bool]) -> impl Iterator<Item = &'a Mec> + 'a {
        self.mecs.iter().filter(move |m| !m.states.iter().all(|&s| game.is_target(s) || sinks[s]))
    }
}

/// MECs of the full game.
pub fn mec_decomposition(game: &StochasticGame) -> MecCatalog {
    mec_decomposition_restricted(game, |_, _| true)
}

/// MECs of the sub-game keeping only the actions with `allowed(s, a)`.
/// Exit sets are still computed against all actions of the full game.
pub fn mec_decomposition_restricted(game: &StochasticGame, allowed: impl Fn(usize, usize) -> bool) -> MecCatalog {
    let n = game.num_states();
    let mut enabled: Vec<Vec<bool>> =
        game.states().map(|s| (0..game.num_actions(s)).map(|a| allowed(s, a)).collect()).collect();
    let mut alive: Vec<bool> = enabled.iter().map(|acts| acts.iter().any(|&e| e)).collect();

    let sccs = loop {
        let adj: Vec<Vec<usize>> = game
            .states()
            .map(|s| {
                if !alive[s] {
                    return Vec::new();
                }
                let mut succ: Vec<usize> = game
                    .actions(s)
                    .iter()
                    .zip(&enabled[s])
                    .filter(|(_, &e)| e)
                    .flat_map(|(a, _)| a.successors())
                    .collect();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect();
        let sccs = tarjan(&adj, &alive);
        let mut comp = vec![usize::MAX; n];
        for (i, c) in sccs.iter().enumerate() {
            for &s in c {
                comp[s] = i;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            for (a, act) in game.actions(s).iter().enumerate() {
                if enabled[s][a] && act.successors().any(|t| !alive[t] || comp[t] != comp[s]) {
                    enabled[s][a] = false;
                    changed = true;
                }
            }
            if !enabled[s].iter().any(|&e| e) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break sccs;
        }
    };

    let mut mecs: Vec<Mec> = sccs
        .into_iter()
        .filter(|c| alive[c[0]])
        .map(|states| {
            let mut member = vec![false; n];
            for &s in &states {
                member[s] = true;
            }
            let mut actions = Vec::new();
            let mut exits = Vec::new();
            for &s in &states {
                for (a, act) in game.actions(s).iter().enumerate() {
                    if enabled[s][a] {
                        actions.push((s, a));
                    }
                    if !act.stays_in(&member) {
                        exits.push((s, a));
                    }
                }
            }
            Mec { states, actions, exits }
        })
        .collect();
    mecs.sort_by_key(|m| m.states[0]);
    let mut index = vec![None; n];
    for (i, m) in mecs.iter().enumerate() {
        for &s in &m.states {
            index[s] = Some(i);
        }
    }
    MecCatalog { mecs, index }
}

/// `max` over Maximizer exits `(s, a)` of `T` of `Σ δ(s,a,s')·U(s')`, or 0
/// when `T` has no Maximizer exit.
pub fn best_exit(game: &StochasticGame, upper: &[f64], members: &[usize]) -> f64 {
    let mut mask = vec![false; game.num_states()];
    for &s in members {
        mask[s] = true;
    }
    best_exit_masked(game, upper, members, &mask)
}

pub(crate) fn best_exit_masked(game: &StochasticGame, upper: &[f64], members: &[usize], mask: &[bool]) -> f64 {
    let mut best: Option<f64> = None;
    for &s in members {
        if game.owner(s) != Player::Maximizer {
            continue;
        }
        for (a, act) in game.actions(s).iter().enumerate() {
            if !act.stays_in(mask) {
                let v = game.action_value(upper, s, a);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    }
    best.unwrap_or(0.0)
}
