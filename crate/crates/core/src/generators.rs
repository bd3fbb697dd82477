//! Parametrised model families and seeded random games.
//!
//! * [`gen_mulmec`]: a chain of three-state end components, each exiting into
//!   the next one.
//! * [`gen_bigmec`]: one long end component, far too many strategies inside it
//!   for enumeration-based encodings.
//! * [`gen_hm`]: a Markov chain on which value iteration converges extremely
//!   slowly.
//! * [`gen_random`]: reproducible random games for differential testing.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{GameBuilder, Player, StochasticGame};

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The four-state example game: `p` (0, Minimizer) and `q` (1, Maximizer)
/// form an end component; `q` may leave with `c` to `q`, the target `t` (2)
/// or the sink `o` (3), each with probability 1/3. Value 1/2 at `p` and `q`.
pub fn fig1() -> StochasticGame {
    let mut b = GameBuilder::new(4);
    b.owner(0, Player::Minimizer)
        .owner(1, Player::Maximizer)
        .owner(2, Player::Maximizer)
        .owner(3, Player::Minimizer)
        .initial(0)
        .target(2)
        .action_frac(0, "a", &[(1, 1, 1)])
        .action_frac(1, "b", &[(0, 1, 1)])
        .action_frac(1, "c", &[(1, 1, 3), (2, 1, 3), (3, 1, 3)])
        .action_frac(2, "d", &[(2, 1, 1)])
        .action_frac(3, "e", &[(3, 1, 1)]);
    b.build().expect("example game is valid")
}

/// Chain of `m` end components with `3m + 2` states.
///
/// Component `i` has states `M = 3i` (Maximizer), `N = 3i + 1` (Minimizer)
/// and `C = 3i + 2` (Maximizer); `next` is `M` of component `i + 1`, or the
/// target for the last one. Target is `3m`, sink `3m + 1`, initial `M` of
/// component 0.
///
/// * `M`: `stay` to `N`; `exit` to target, sink and `next` with 1/3 each.
/// * `N`: `stay` to `C`; `exit` to sink and `next` with 1/2 each.
/// * `C`: `mix` to `M` and `N` with 1/2 each; `exit` to `next`.
///
/// With `x` the value of `next`, the values are `M = 1/3 + x/3`, `N = x/2`,
/// `C = x`, so `M` of component `i` has value `1/2 + 1/2 · 3^-(m-i)`.
pub fn gen_mulmec(m: usize) -> StochasticGame {
    assert!(m >= 1, "need at least one component");
    let target = 3 * m;
    let sink = 3 * m + 1;
    let mut b = GameBuilder::new(3 * m + 2);
    b.initial(0).target(target).owner(target, Player::Maximizer).owner(sink, Player::Minimizer);
    b.action_frac(sink, "loop", &[(sink, 1, 1)]);
    for i in 0..m {
        let (mm, nn, cc) = (3 * i, 3 * i + 1, 3 * i + 2);
        let next = if i + 1 < m { 3 * (i + 1) } else { target };
        b.owner(mm, Player::Maximizer).owner(nn, Player::Minimizer).owner(cc, Player::Maximizer);
        b.action_frac(mm, "stay", &[(nn, 1, 1)]);
        if next == target {
            b.action_frac(mm, "exit", &[(target, 2, 3), (sink, 1, 3)]);
        } else {
            b.action_frac(mm, "exit", &[(target, 1, 3), (sink, 1, 3), (next, 1, 3)]);
        }
        b.action_frac(nn, "stay", &[(cc, 1, 1)]);
        b.action_frac(nn, "exit", &[(sink, 1, 2), (next, 1, 2)]);
        b.action_frac(cc, "mix", &[(mm, 1, 2), (nn, 1, 2)]);
        b.action_frac(cc, "exit", &[(next, 1, 1)]);
    }
    b.build().expect("generated game is valid")
}

/// Exact value of state `s` in [`gen_mulmec`]`(m)`.
pub fn mulmec_value(m: usize, s: usize) -> BigRational {
    if s == 3 * m {
        return frac(1, 1);
    }
    if s == 3 * m + 1 {
        return frac(0, 1);
    }
    let i = s / 3;
    // Value of M in component j: 1/2 + 1/2 · 3^-(m-j); `next` of component i
    // is component i + 1 (value 1 when i + 1 == m).
    let m_value = |j: usize| {
        let pow = num_traits::pow(BigInt::from(3), m - j);
        frac(1, 2) + BigRational::new(BigInt::from(1), BigInt::from(2) * pow)
    };
    let next = m_value(i + 1);
    match s % 3 {
        0 => m_value(i),
        1 => next / BigInt::from(2),
        _ => next,
    }
}

/// A single end component of `2n + 1` alternating states plus target and
/// sink (`2n + 3` states).
///
/// Chain state `k` in `0..=2n` is Maximizer-owned for even `k` and
/// Minimizer-owned for odd `k`, with `fwd` towards `k + 1` and `back` to
/// `k - 1` where those exist. A Minimizer `fwd` moves to `k + 1` or `k - 1`
/// with 1/2 each, so Minimizer cannot trap the play between two states.
/// State 0 can also `exit` to target/sink with 1/2 each, state `2n` to
/// target with 2/3 and sink with 1/3. Target is `2n + 1`, sink
/// `2n + 2`, initial 0. Every chain state has value 1/2 except `2n` (2/3).
pub fn gen_bigmec(n: usize) -> StochasticGame {
    assert!(n >= 1, "size parameter must be positive");
    let last = 2 * n;
    let target = last + 1;
    let sink = last + 2;
    let mut b = GameBuilder::new(last + 3);
    b.initial(0).target(target).owner(target, Player::Maximizer).owner(sink, Player::Minimizer);
    b.action_frac(sink, "loop", &[(sink, 1, 1)]);
    for k in 0..=last {
        b.owner(k, if k % 2 == 0 { Player::Maximizer } else { Player::Minimizer });
        if k < last && k % 2 == 1 {
            b.action_frac(k, "fwd", &[(k + 1, 1, 2), (k - 1, 1, 2)]);
        } else if k < last {
            b.action_frac(k, "fwd", &[(k + 1, 1, 1)]);
        }
        if k > 0 {
            b.action_frac(k, "back", &[(k - 1, 1, 1)]);
        }
    }
    b.action_frac(0, "exit", &[(target, 1, 2), (sink, 1, 2)]);
    b.action_frac(last, "exit", &[(target, 2, 3), (sink, 1, 3)]);
    b.build().expect("generated game is valid")
}

/// Largest exponent used for the forward probabilities of [`gen_hm`], so that
/// every probability stays well above the parser's lower limit.
const HM_MAX_EXPONENT: usize = 40;

/// Two symmetric single-action chains of length `n - 1` leaving an initial
/// state, one ending in the target, the other in the sink (`2n + 1` states).
///
/// State 0 moves to the first state of either chain with probability 1/2.
/// The `i`-th state of a chain (1-based) moves forward with probability
/// `2^-i` (to the next state, or to the chain's end after the last one) and
/// otherwise back (to the previous chain state, or state 0). Layout: `1..n`
/// target chain, `n..2n-1` sink chain, target `2n - 1`, sink `2n`. The value
/// at state 0 is 1/2 by symmetry; reaching either end takes astronomically
/// many steps in expectation, so value iteration creeps.
pub fn gen_hm(n: usize) -> StochasticGame {
    assert!(n >= 1, "size parameter must be positive");
    let target = 2 * n - 1;
    let sink = 2 * n;
    let mut b = GameBuilder::new(2 * n + 1);
    for s in 0..=2 * n {
        b.owner(s, Player::Maximizer);
    }
    b.initial(0).target(target);
    b.action_frac(sink, "loop", &[(sink, 1, 1)]);
    if n == 1 {
        b.action_frac(0, "step", &[(target, 1, 2), (sink, 1, 2)]);
    } else {
        b.action_frac(0, "step", &[(1, 1, 2), (n, 1, 2)]);
    }
    let chain = |k: usize, first: usize| if k == 0 { 0 } else { first + k - 1 };
    for (first, end) in [(1, target), (n, sink)] {
        for i in 1..n {
            let here = chain(i, first);
            let fwd = if i + 1 < n { chain(i + 1, first) } else { end };
            let back = chain(i - 1, first);
            let p = BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(2), i.min(HM_MAX_EXPONENT)));
            let q = frac(1, 1) - p.clone();
            b.action(here, "step", vec![(fwd, p), (back, q)]);
        }
    }
    b.build().expect("generated game is valid")
}

/// Parameters of [`gen_random`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGameParams {
    pub n_states: usize,
    pub max_actions: usize,
    pub max_branching: usize,
    /// Probability that a state is Minimizer-owned.
    pub minimizer_fraction: f64,
    /// Probability that a state is a target; at least one target is forced.
    pub target_fraction: f64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams {
            n_states: 6,
            max_actions: 3,
            max_branching: 3,
            minimizer_fraction: 0.5,
            target_fraction: 0.2,
        }
    }
}

/// Seeded random game. Probabilities are ratios of small integer weights
/// (1 to 4), so denominators stay small. The last state is a target if no
/// other state was drawn as one.
pub fn gen_random(seed: u64, params: &RandomGameParams) -> StochasticGame {
    let n = params.n_states.max(2);
    let max_actions = params.max_actions.max(1);
    let max_branching = params.max_branching.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GameBuilder::new(n);
    let mut any_target = false;
    for s in 0..n {
        let owner =
            if rng.gen_bool(params.minimizer_fraction.clamp(0.0, 1.0)) { Player::Minimizer } else { Player::Maximizer };
        b.owner(s, owner);
        if rng.gen_bool(params.target_fraction.clamp(0.0, 1.0)) {
            b.target(s);
            any_target = true;
        }
    }
    if !any_target {
        b.target(n - 1);
    }
    for s in 0..n {
        let k = rng.gen_range(1..=max_actions);
        for a in 0..k {
            let branching = rng.gen_range(1..=max_branching);
            let mut succ: Vec<usize> = Vec::with_capacity(branching);
            while succ.len() < branching {
                let t = rng.gen_range(0..n);
                if !succ.contains(&t) {
                    succ.push(t);
                }
            }
            let weights: Vec<i64> = succ.iter().map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            let dist = succ.into_iter().zip(weights).map(|(t, w)| (t, frac(w, total))).collect();
            b.action(s, format!("a{a}"), dist);
        }
    }
    b.build().expect("generated game is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compute_sinks, mask_to_states, mec_decomposition, scc_order};
    use crate::oracle::exact_solve;

    fn nontrivial_mecs(g: &StochasticGame) -> Vec<Vec<usize>> {
        let sinks = compute_sinks(g);
        mec_decomposition(g).nontrivial(g, &sinks).map(|m| m.states.clone()).collect()
    }

    #[test]
    fn fig1_matches_test_fixture() {
        assert_eq!(fig1(), crate::game::tests::fig1());
    }

    #[test]
    fn mulmec_structure() {
        let g = gen_mulmec(100);
        assert_eq!(g.num_states(), 302);
        assert_eq!(nontrivial_mecs(&g).len(), 100);
        assert_eq!(scc_order(&g).len(), 102);
        assert_eq!(mask_to_states(&compute_sinks(&g)), vec![301]);
        assert!((g.avg_actions() - 1.99).abs() < 0.01);
    }

    #[test]
    fn mulmec_closed_form_matches_oracle() {
        for m in 1..=2 {
            let g = gen_mulmec(m);
            let sol = exact_solve(&g).unwrap();
            for s in g.states() {
                assert_eq!(sol.values[s], mulmec_value(m, s), "m={m} s={s}");
            }
        }
    }

    #[test]
    fn bigmec_structure_and_values() {
        let g = gen_bigmec(100);
        assert_eq!(g.num_states(), 203);
        let mecs = nontrivial_mecs(&g);
        assert_eq!(mecs.len(), 1);
        assert_eq!(mecs[0].len(), 201);
        let g = gen_bigmec(2);
        let sol = exact_solve(&g).unwrap();
        for k in 0..4 {
            assert_eq!(sol.values[k], frac(1, 2));
        }
        assert_eq!(sol.values[4], frac(2, 3));
    }

    #[test]
    fn hm_structure_and_value() {
        let g = gen_hm(30);
        assert_eq!(g.num_states(), 61);
        assert_eq!(g.max_actions(), 1);
        assert_eq!(exact_solve(&g).unwrap().values[0], frac(1, 2));
        assert_eq!(exact_solve(&gen_hm(1)).unwrap().values[0], frac(1, 2));
        assert_eq!(gen_hm(100).num_states(), 201);
    }

    #[test]
    fn random_is_deterministic() {
        let p = RandomGameParams::default();
        assert_eq!(gen_random(7, &p), gen_random(7, &p));
        assert_ne!(gen_random(7, &p), gen_random(8, &p));
        let mdp = gen_random(3, &RandomGameParams { minimizer_fraction: 0.0, ..p });
        assert!(mdp.states().all(|s| mdp.owner(s) == Player::Maximizer));
    }
}
