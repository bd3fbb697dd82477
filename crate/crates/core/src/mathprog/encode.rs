//! Game-to-program encodings: the quadratic program for games with at most
//! two actions per state and its higher-order generalisation, plus the
//! end-component constraints that make the optimum unique.

use num_rational::BigRational;
use num_traits::Zero;

use crate::chain::{reach_probabilities, ChainRows};
use crate::error::{Error, Result};
use crate::game::{Player, StochasticGame};
use crate::graph::{compute_sinks, mec_decomposition, Mec};
use crate::mathprog::program::{
    Affine, Constraint, ConstraintKind, GroupOp, MathProgram, MaxMinGroup, ProductTerm, Relation,
};
use crate::numeric::rational_to_f64;

/// Default limit on strategy pairs enumerated inside one end component.
pub const DEFAULT_PAIR_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeOptions {
    pub pair_budget: u128,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { pair_budget: DEFAULT_PAIR_BUDGET }
    }
}

/// `Σ δ(s,a,s')·v_s'` as an affine expression over state variables.
pub fn action_expr(game: &StochasticGame, s: usize, a: usize) -> Affine {
    Affine::from_terms(0.0, game.action(s, a).branches.iter().map(|b| (b.state, b.prob)))
}

/// Quadratic program; the game must have at most two actions per state.
pub fn encode_qp(game: &StochasticGame) -> Result<MathProgram> {
    encode_qp_with(game, &EncodeOptions::default())
}

pub fn encode_qp_with(game: &StochasticGame, opts: &EncodeOptions) -> Result<MathProgram> {
    if let Some(s) = game.states().find(|&s| game.num_actions(s) > 2) {
        return Err(Error::NotTwoAct { state: s, actions: game.num_actions(s) });
    }
    encode_hop_with(game, opts)
}

/// Higher-order program for any game.
pub fn encode_hop(game: &StochasticGame) -> Result<MathProgram> {
    encode_hop_with(game, &EncodeOptions::default())
}

/// Every state gets exactly one of: a pin (targets to 1; sinks and members of
/// Minimizer-only end components to 0), an equality for a single action, or
/// a product term `Π_a (v_s - v(s,a))` with the player's inequalities. An odd
/// number of factors gets the first one repeated so every summand is
/// non-negative on the feasible region. End components additionally get
/// max/min groups fixing their values.
pub fn encode_hop_with(game: &StochasticGame, opts: &EncodeOptions) -> Result<MathProgram> {
    let sinks = compute_sinks(game);
    let catalog = mec_decomposition(game);
    let relevant: Vec<(usize, &Mec)> =
        catalog.nontrivial(game, &sinks).map(|m| (catalog.index[m.states[0]].unwrap(), m)).collect();
    let mut zero = sinks.clone();
    for (_, m) in &relevant {
        if m.single_owner(game) == Some(Player::Minimizer) {
            for &s in &m.states {
                zero[s] = true;
            }
        }
    }

    let mut prog = MathProgram::new(game.num_states());
    for s in game.states() {
        let v = Affine::var(s);
        if game.is_target(s) || zero[s] {
            let value = if game.is_target(s) { 1.0 } else { 0.0 };
            prog.constraints.push(Constraint {
                kind: ConstraintKind::Pin,
                lhs: v,
                rel: Relation::Eq,
                rhs: Affine::constant(value),
            });
            continue;
        }
        if game.num_actions(s) == 1 {
            prog.constraints.push(Constraint {
                kind: ConstraintKind::Single,
                lhs: v,
                rel: Relation::Eq,
                rhs: action_expr(game, s, 0),
            });
            continue;
        }
        let rel = match game.owner(s) {
            Player::Maximizer => Relation::Ge,
            Player::Minimizer => Relation::Le,
        };
        let mut factors = Vec::new();
        for a in 0..game.num_actions(s) {
            let e = action_expr(game, s, a);
            factors.push(v.minus(&e));
            prog.constraints.push(Constraint { kind: ConstraintKind::Player, lhs: v.clone(), rel, rhs: e });
        }
        if factors.len() % 2 == 1 {
            factors.push(factors[0].clone());
        }
        prog.terms.push(ProductTerm { state: s, factors });
    }
    for (index, mec) in relevant {
        if mec.single_owner(game) != Some(Player::Minimizer) {
            mec_constraints(game, mec, index, opts.pair_budget, &mut prog)?;
        }
    }
    Ok(prog)
}

/// Appends the max/min groups for one end component `T` to `prog`.
///
/// Maximizer-only: every member equals the best exit. Otherwise all pairs of
/// memoryless strategies on `T` are enumerated; exits chosen by a pair are
/// redirected to absorbing markers and the exact probability `p_e(t)` of
/// ending in each marker is computed. Each member `t` gets
/// `v_t = max_σ min_τ Σ_e p_e(t)·v(e)` where `v(e)` is the full action value
/// of exit `e`; the inner minimum becomes an auxiliary variable unless it has
/// a single distinct operand.
pub fn mec_constraints(
    game: &StochasticGame,
    mec: &Mec,
    index: usize,
    budget: u128,
    prog: &mut MathProgram,
) -> Result<()> {
    match mec.single_owner(game) {
        Some(Player::Minimizer) => return Ok(()),
        Some(Player::Maximizer) => {
            let mut operands: Vec<Affine> = Vec::new();
            for &(s, a) in &mec.exits {
                push_unique(&mut operands, action_expr(game, s, a));
            }
            if operands.is_empty() {
                return Ok(());
            }
            for &t in &mec.states {
                prog.groups.push(MaxMinGroup { target: t, op: GroupOp::Max, operands: operands.clone(), big_m: 1.0 });
            }
            return Ok(());
        }
        None => {}
    }

    let pairs = mec.states.iter().fold(1u128, |acc, &s| acc.saturating_mul(game.num_actions(s) as u128));
    if pairs > budget {
        return Err(Error::EncodingInfeasible { mec: index, states: mec.len(), pairs, budget });
    }
    let members = &mec.states;
    let k = members.len();
    let local = |s: usize| members.binary_search(&s).ok();
    let max_members: Vec<usize> = (0..k).filter(|&i| game.owner(members[i]) == Player::Maximizer).collect();
    let min_members: Vec<usize> = (0..k).filter(|&i| game.owner(members[i]) == Player::Minimizer).collect();
    let choices_of = |idx: &[usize]| odometer(idx.iter().map(|&i| game.num_actions(members[i])).collect());

    // expressions[t][σ] = distinct τ-expressions for member t under σ.
    let max_choices = choices_of(&max_members);
    let min_choices = choices_of(&min_members);
    let mut expressions: Vec<Vec<Vec<Affine>>> = vec![vec![Vec::new(); max_choices.len()]; k];
    let mut choice = vec![0usize; k];
    for (si, max_strat) in max_choices.iter().enumerate() {
        for (pos, &i) in max_members.iter().enumerate() {
            choice[i] = max_strat[pos];
        }
        for min_strat in &min_choices {
            for (pos, &i) in min_members.iter().enumerate() {
                choice[i] = min_strat[pos];
            }
            // Local chain: members 0..k, then one marker per chosen exit.
            let mut rows: ChainRows<BigRational> = Vec::with_capacity(2 * k);
            let mut markers: Vec<(usize, usize)> = Vec::new();
            for i in 0..k {
                let (s, a) = (members[i], choice[i]);
                let act = game.action(s, a);
                if act.successors().all(|t| local(t).is_some()) {
                    rows.push(act.branches.iter().map(|b| (local(b.state).unwrap(), b.exact.clone())).collect());
                } else {
                    markers.push((s, a));
                    rows.push(vec![(k + markers.len() - 1, BigRational::from_integer(1.into()))]);
                }
            }
            for m in 0..markers.len() {
                rows.push(vec![(k + m, BigRational::from_integer(1.into()))]);
            }
            let mut per_member: Vec<Affine> = vec![Affine::constant(0.0); k];
            for (m, &(s, a)) in markers.iter().enumerate() {
                let mut target = vec![false; rows.len()];
                target[k + m] = true;
                let p = reach_probabilities(&rows, &target)?;
                let exit = action_expr(game, s, a);
                for t in 0..k {
                    if !p[t].is_zero() {
                        per_member[t] = per_member[t].plus(&exit.scaled(rational_to_f64(&p[t])));
                    }
                }
            }
            for t in 0..k {
                push_unique(&mut expressions[t][si], per_member[t].clone());
            }
        }
    }
    for (t, per_sigma) in expressions.into_iter().enumerate() {
        let mut outer: Vec<Affine> = Vec::new();
        for inner in per_sigma {
            let operand = if inner.len() == 1 {
                inner.into_iter().next().unwrap()
            } else {
                let w = prog.add_aux();
                prog.groups.push(MaxMinGroup { target: w, op: GroupOp::Min, operands: inner, big_m: 1.0 });
                Affine::var(w)
            };
            push_unique(&mut outer, operand);
        }
        prog.groups.push(MaxMinGroup { target: members[t], op: GroupOp::Max, operands: outer, big_m: 1.0 });
    }
    Ok(())
}

fn push_unique(list: &mut Vec<Affine>, e: Affine) {
    if !list.contains(&e) {
        list.push(e);
    }
}

/// All digit vectors with `digit[i] < radix[i]`, last position fastest.
fn odometer(radix: Vec<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut digits = vec![0usize; radix.len()];
    loop {
        out.push(digits.clone());
        let mut i = radix.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}
