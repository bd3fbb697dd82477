//! Value-preserving normal-form transformations.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::game::{Action, Branch, Player, StochasticGame};
use crate::numeric::rational_to_f64;

/// Splits every state with `k > 2` actions into a balanced binary tree of
/// `k - 1` states of the same owner; the leaves carry the original actions.
/// Original states keep their indices (each becomes its tree's root) and new
/// states are appended. Returns the new game and, for every new state, the
/// original state it belongs to.
pub fn transform_2act(game: &StochasticGame) -> (StochasticGame, Vec<usize>) {
    let mut owners: Vec<Player> = game.owners().to_vec();
    let mut actions: Vec<Vec<Action>> = game.states().map(|_| Vec::new()).collect();
    let mut targets: Vec<bool> = game.target_mask().to_vec();
    let mut origin: Vec<usize> = game.states().collect();
    for s in game.states() {
        let acts: Vec<Action> = game.actions(s).to_vec();
        actions[s] = build_tree(s, acts, &mut owners, &mut actions, &mut targets, &mut origin);
    }
    (StochasticGame::from_parts(owners, actions, game.initial(), targets), origin)
}

/// Actions of a tree node holding `acts`; creates child states as needed.
fn build_tree(
    root: usize,
    acts: Vec<Action>,
    owners: &mut Vec<Player>,
    actions: &mut Vec<Vec<Action>>,
    targets: &mut Vec<bool>,
    origin: &mut Vec<usize>,
) -> Vec<Action> {
    if acts.len() <= 2 {
        return acts;
    }
    let mut right = acts;
    let left = right.drain(..right.len() / 2).collect::<Vec<_>>();
    let mut out = Vec::with_capacity(2);
    for half in [left, right] {
        if half.len() == 1 {
            out.extend(half);
            continue;
        }
        let child = owners.len();
        owners.push(owners[root]);
        actions.push(Vec::new());
        targets.push(false);
        origin.push(root);
        let child_actions = build_tree(root, half, owners, actions, targets, origin);
        actions[child] = child_actions;
        out.push(Action { name: format!("tree{child}"), branches: vec![Branch::new(child, BigRational::one())] });
    }
    out
}

/// Result of [`transform_stopping`].
#[derive(Clone, Debug)]
pub struct StoppingGame {
    pub game: StochasticGame,
    /// Index of the added sink.
    pub sink: usize,
    /// Set when `eps` is too large for the value-recovery bound.
    pub warning: Option<String>,
}

/// Every action of a non-target state moves to a fresh sink with probability
/// `eps` and follows its original distribution scaled by `1 - eps`, so the
/// only end components left are the target loops and the new sink.
pub fn transform_stopping(game: &StochasticGame, eps: &BigRational) -> StoppingGame {
    assert!(*eps > BigRational::zero() && *eps < BigRational::one(), "eps must lie in (0, 1)");
    let n = game.num_states();
    let sink = n;
    let keep = BigRational::one() - eps.clone();
    let mut owners = game.owners().to_vec();
    owners.push(Player::Minimizer);
    let mut actions: Vec<Vec<Action>> = game
        .states()
        .map(|s| {
            if game.is_target(s) {
                return game.actions(s).to_vec();
            }
            game.actions(s)
                .iter()
                .map(|a| {
                    let mut branches: Vec<Branch> =
                        a.branches.iter().map(|b| Branch::new(b.state, b.exact.clone() * keep.clone())).collect();
                    branches.push(Branch::new(sink, eps.clone()));
                    Action { name: a.name.clone(), branches }
                })
                .collect()
        })
        .collect();
    actions.push(vec![Action { name: "loop".into(), branches: vec![Branch::new(sink, BigRational::one())] }]);
    let mut targets = game.target_mask().to_vec();
    targets.push(false);

    // Rounding back to the original values needs eps < (1/4)^|S|.
    let bound = 0.25f64.powi(i32::try_from(n).unwrap_or(i32::MAX));
    let warning = (rational_to_f64(eps) >= bound).then(|| {
        format!(
            "stopping probability {} is not below (1/4)^{n} = {bound:e}; values are approximations",
            rational_to_f64(eps)
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    StoppingGame { game: StochasticGame::from_parts(owners, actions, game.initial(), targets), sink, warning }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::fig1;
    use crate::game::GameBuilder;
    use crate::generators::{gen_random, RandomGameParams};
    use crate::graph::{compute_sinks, mec_decomposition};
    use crate::oracle::exact_solve;
    use num_bigint::BigInt;

    #[test]
    fn three_actions_become_two_states() {
        let mut b = GameBuilder::new(2);
        b.owner(0, Player::Maximizer).owner(1, Player::Maximizer).target(1);
        for name in ["x", "y", "z"] {
            b.action_frac(0, name, &[(1, 1, 1)]);
        }
        let (g2, origin) = transform_2act(&b.build().unwrap());
        assert_eq!(g2.num_states(), 3);
        assert_eq!(origin, vec![0, 1, 0]);
        assert!(g2.states().all(|s| g2.num_actions(s) <= 2));
    }

    #[test]
    fn two_act_games_are_unchanged() {
        let g = fig1();
        assert_eq!(transform_2act(&g).0, g);
    }

    #[test]
    fn tree_preserves_values() {
        let params = RandomGameParams { n_states: 5, max_actions: 5, ..RandomGameParams::default() };
        for seed in 0..10 {
            let g = gen_random(seed, &params);
            let (g2, _) = transform_2act(&g);
            let v = exact_solve(&g).unwrap().values;
            let v2 = exact_solve(&g2).unwrap().values;
            assert_eq!(&v2[..g.num_states()], &v[..], "seed {seed}");
        }
    }

    #[test]
    fn stopping_fig1() {
        let eps = BigRational::new(BigInt::from(1), BigInt::from(100));
        let st = transform_stopping(&fig1(), &eps);
        let c = st.game.action(1, 1);
        assert_eq!(c.branches.len(), 4);
        assert!((c.branches[0].prob - 0.33).abs() < 1e-15);
        assert_eq!(c.branches[3].state, st.sink);
        assert!(st.warning.is_some());
        let sinks = compute_sinks(&st.game);
        let cat = mec_decomposition(&st.game);
        assert_eq!(cat.nontrivial(&st.game, &sinks).count(), 0);
    }
}
