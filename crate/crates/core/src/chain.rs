//! Reachability in Markov chains: graph precomputation followed by sparse
//! direct elimination, in float or exact rational arithmetic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::game::StochasticGame;
use crate::numeric::Scalar;
use crate::strategy::{profile_action, Strategy};

/// Sparse transition rows: `rows[s]` lists `(successor, probability)`.
pub type ChainRows<V> = Vec<Vec<(usize, V)>>;

/// The Markov chain obtained by fixing one action in every state.
#[derive(Clone, Debug)]
pub struct InducedChain<'g> {
    game: &'g StochasticGame,
    choice: Vec<usize>,
}

impl<'g> InducedChain<'g> {
    pub fn new(game: &'g StochasticGame, max: &Strategy, min: &Strategy) -> Self {
        let choice = game.states().map(|s| profile_action(game, max, min, s)).collect();
        InducedChain { game, choice }
    }

    /// Chain from an explicit action choice per state.
    pub fn from_choices(game: &'g StochasticGame, choice: Vec<usize>) -> Self {
        assert_eq!(choice.len(), game.num_states());
        InducedChain { game, choice }
    }

    pub fn game(&self) -> &'g StochasticGame {
        self.game
    }

    pub fn choice(&self, s: usize) -> usize {
        self.choice[s]
    }

    pub fn rows<V: Scalar>(&self) -> ChainRows<V> {
        self.game
            .states()
            .map(|s| {
                self.game.action(s, self.choice[s]).branches.iter().map(|b| (b.state, V::from_branch(b))).collect()
            })
            .collect()
    }

    pub fn reach_probabilities<V: Scalar>(&self, targets: &[bool]) -> Result<Vec<V>> {
        reach_probabilities(&self.rows::<V>(), targets)
    }
}

/// Exact reachability probabilities of `targets` under the profile `(max, min)`.
pub fn induce_and_solve(
    game: &StochasticGame,
    max: &Strategy,
    min: &Strategy,
    targets: &[bool],
) -> Result<Vec<BigRational>> {
    InducedChain::new(game, max, min).reach_probabilities(targets)
}

/// Float variant of [`induce_and_solve`].
pub fn induce_and_solve_f64(
    game: &StochasticGame,
    max: &Strategy,
    min: &Strategy,
    targets: &[bool],
) -> Result<Vec<f64>> {
    InducedChain::new(game, max, min).reach_probabilities(targets)
}

/// States that reach `targets` with positive probability.
pub fn can_reach<V>(rows: &ChainRows<V>, targets: &[bool]) -> Vec<bool> {
    let n = rows.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, row) in rows.iter().enumerate() {
        for &(t, _) in row {
            pred[t].push(s);
        }
    }
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| targets[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Probability of eventually reaching `targets` from every state.
///
/// States reaching the targets with probability zero or one are found by
/// graph search; the remaining system `x = P x + b` is solved by sparse
/// Gaussian elimination. On the remaining states `I - P` is a nonsingular
/// M-matrix, so no pivoting is needed.
pub fn reach_probabilities<V: Scalar>(rows: &ChainRows<V>, targets: &[bool]) -> Result<Vec<V>> {
    let n = rows.len();
    let positive = can_reach(rows, targets);
    // Probability one iff no state of probability zero is reachable while
    // avoiding the targets.
    let zero: Vec<bool> = positive.iter().map(|&p| !p).collect();
    let avoid_rows: ChainRows<()> = rows
        .iter()
        .enumerate()
        .map(|(s, row)| if targets[s] { Vec::new() } else { row.iter().map(|&(t, _)| (t, ())).collect() })
        .collect();
    let may_fail = can_reach(&avoid_rows, &zero);
    let one: Vec<bool> = (0..n).map(|s| targets[s] || !may_fail[s]).collect();

    let unknown: Vec<usize> = (0..n).filter(|&s| positive[s] && !one[s]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        local[s] = i;
    }
    let mut matrix: Vec<BTreeMap<usize, V>> = Vec::with_capacity(unknown.len());
    let mut rhs: Vec<V> = Vec::with_capacity(unknown.len());
    for &s in &unknown {
        let mut row: BTreeMap<usize, V> = BTreeMap::new();
        row.insert(local[s], V::one());
        let mut b = V::zero();
        for (t, p) in &rows[s] {
            if one[*t] {
                b = b + p.clone();
            } else if local[*t] != usize::MAX {
                let entry = row.entry(local[*t]).or_insert_with(V::zero);
                *entry = entry.clone() - p.clone();
            }
        }
        matrix.push(row);
        rhs.push(b);
    }
    let solution = solve_sparse(matrix, rhs).map_err(|(i, pivot)| Error::Singular { state: unknown[i], pivot })?;

    let mut values: Vec<V> = (0..n).map(|s| if one[s] { V::one() } else { V::zero() }).collect();
    for (i, &s) in unknown.iter().enumerate() {
        values[s] = clamp_unit(solution[i].clone());
    }
    Ok(values)
}

fn clamp_unit<V: Scalar>(x: V) -> V {
    if x < V::zero() {
        V::zero()
    } else if x > V::one() {
        V::one()
    } else {
        x
    }
}

/// Solves `A x = b` for sparse rows without pivoting. Returns the offending
/// row and pivot on a zero pivot.
fn solve_sparse<V: Scalar>(mut rows: Vec<BTreeMap<usize, V>>, mut rhs: Vec<V>) -> Result<Vec<V>, (usize, f64)> {
    let m = rows.len();
    // Rows (below the current pivot) holding a nonzero in each column.
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            cols[c].insert(r);
        }
    }
    for k in 0..m {
        let pivot = rows[k].get(&k).cloned().unwrap_or_else(V::zero);
        if pivot.is_zero() || pivot < V::zero() {
            return Err((k, pivot.to_f64()));
        }
        let pivot_row: Vec<(usize, V)> = rows[k].iter().filter(|(&c, _)| c > k).map(|(&c, v)| (c, v.clone())).collect();
        let below: Vec<usize> = cols[k].range(k + 1..).copied().collect();
        for r in below {
            let Some(coef) = rows[r].remove(&k) else { continue };
            let factor = coef / pivot.clone();
            for (c, v) in &pivot_row {
                let entry = rows[r].entry(*c).or_insert_with(V::zero);
                *entry = entry.clone() - factor.clone() * v.clone();
                cols[*c].insert(r);
            }
            rhs[r] = rhs[r].clone() - factor * rhs[k].clone();
        }
    }
    let mut x: Vec<V> = vec![V::zero(); m];
    for k in (0..m).rev() {
        let mut acc = rhs[k].clone();
        for (&c, v) in rows[k].range(k + 1..) {
            acc = acc - v.clone() * x[c].clone();
        }
        x[k] = acc / rows[k][&k].clone();
    }
    Ok(x)
}
