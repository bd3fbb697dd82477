//! Local search on the value program.
//!
//! Each start point is improved by projected gradient descent on the
//! objective plus a quadratic penalty for violated linear constraints. The
//! point is then rounded to a strategy profile (in every state the action
//! whose factor is closest to zero), the profile's chain is solved and the
//! resulting values are checked against the program. A failed check triggers
//! greedy reselection: Maximizer switches to better actions, Minimizer
//! answers optimally, until the values verify or the repair budget runs out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::InducedChain;
use crate::error::Result;
use crate::game::{Player, StochasticGame};
use crate::mathprog::program::{MathProgram, Relation};
use crate::mathprog::verify::{verify_solution, VerifyReport};
use crate::si::{best_response, improve, make_proper, SiConfig};
use crate::strategy::Strategy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    /// Random start points tried after the warm start.
    pub restarts: usize,
    pub seed: u64,
    pub gradient_steps: usize,
    pub step_size: f64,
    pub penalty: f64,
    pub repair_rounds: usize,
    pub tol: f64,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for LocalConfig {
    fn default() -> Self {
        LocalConfig {
            restarts: 4,
            seed: 0,
            gradient_steps: 200,
            step_size: 0.05,
            penalty: 10.0,
            repair_rounds: 1000,
            tol: 1e-6,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalResult {
    pub values: Vec<f64>,
    pub objective: f64,
    pub report: VerifyReport,
    pub max_strategy: Strategy,
    pub min_strategy: Strategy,
    /// Start points examined, including the successful one.
    pub starts: usize,
    pub repairs: usize,
}

impl LocalResult {
    pub fn verified(&self) -> bool {
        self.report.pass
    }

    pub fn status(&self) -> &'static str {
        if self.verified() {
            "VERIFIED"
        } else {
            "NOT-VERIFIED"
        }
    }
}

/// Runs local search from the warm start and `cfg.restarts` random points,
/// stopping at the first verified solution. Without one, the candidate with
/// the smallest residual is returned.
pub fn local_solve(game: &StochasticGame, prog: &MathProgram, cfg: &LocalConfig) -> Result<LocalResult> {
    assert_eq!(prog.num_states, game.num_states(), "program does not belong to this game");
    let n = game.num_states();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = &cfg.warm_start {
        starts.push(w.iter().map(|v| v.clamp(0.0, 1.0)).collect());
    }
    for _ in 0..cfg.restarts.max(usize::from(starts.is_empty())) {
        starts.push((0..n).map(|_| rng.gen::<f64>()).collect());
    }

    let mut best: Option<LocalResult> = None;
    for (i, start) in starts.into_iter().enumerate() {
        let x = descend(prog, start, cfg);
        let mut candidate = round_and_repair(game, prog, &x, cfg)?;
        candidate.starts = i + 1;
        let done = candidate.verified();
        let score = |r: &LocalResult| r.report.max_residual + r.report.objective.abs();
        let better = best.as_ref().is_none_or(|b| score(&candidate) < score(b));
        if done || better {
            best = Some(candidate);
        }
        if done {
            break;
        }
    }
    Ok(best.expect("at least one start point"))
}

/// Projected gradient descent over the state variables.
fn descend(prog: &MathProgram, mut x: Vec<f64>, cfg: &LocalConfig) -> Vec<f64> {
    let n = prog.num_states;
    for _ in 0..cfg.gradient_steps {
        let mut grad = vec![0.0; n];
        for t in &prog.terms {
            let vals: Vec<f64> = t.factors.iter().map(|f| f.eval(&x)).collect();
            for (i, f) in t.factors.iter().enumerate() {
                let rest: f64 = vals.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product();
                for &(v, c) in &f.coeffs {
                    if v < n {
                        grad[v] += rest * c;
                    }
                }
            }
        }
        for c in &prog.constraints {
            let d = c.lhs.eval(&x) - c.rhs.eval(&x);
            let active = match c.rel {
                Relation::Le => d.max(0.0),
                Relation::Ge => d.min(0.0),
                Relation::Eq => d,
            };
            if active == 0.0 {
                continue;
            }
            for (v, coef) in c.lhs.minus(&c.rhs).coeffs {
                if v < n {
                    grad[v] += 2.0 * cfg.penalty * active * coef;
                }
            }
        }
        let mut moved = 0.0f64;
        for (xi, g) in x.iter_mut().zip(&grad) {
            let next = (*xi - cfg.step_size * g).clamp(0.0, 1.0);
            moved = moved.max((next - *xi).abs());
            *xi = next;
        }
        if moved < 1e-12 {
            break;
        }
    }
    x
}

/// In every state, the action whose value at `x` is closest to `x[s]`.
fn round_profile(game: &StochasticGame, x: &[f64]) -> Vec<usize> {
    game.states()
        .map(|s| {
            let mut best = (0, f64::INFINITY);
            for a in 0..game.num_actions(s) {
                let gap = (x[s] - game.action_value(x, s, a)).abs();
                if gap < best.1 {
                    best = (a, gap);
                }
            }
            best.0
        })
        .collect()
}

fn round_and_repair(game: &StochasticGame, prog: &MathProgram, x: &[f64], cfg: &LocalConfig) -> Result<LocalResult> {
    let choice = round_profile(game, x);
    let rounded_max = Strategy::from_fn(game, Player::Maximizer, |s| choice[s]);
    let mut min = Strategy::from_fn(game, Player::Minimizer, |s| choice[s]);
    let values: Vec<f64> = InducedChain::from_choices(game, choice).reach_probabilities(game.target_mask())?;
    let report = verify_solution(prog, &values, cfg.tol);
    if report.pass {
        return Ok(finish(prog, values, report, rounded_max, min, 0));
    }

    let mut max = make_proper(game, &rounded_max, Some(x));
    let si_cfg = SiConfig::default();
    let mut repairs = 0;
    loop {
        repairs += 1;
        let br = best_response(game, &max, &si_cfg)?;
        min = br.min_strategy;
        let report = verify_solution(prog, &br.values, cfg.tol);
        let next = improve(game, &br.values, &max);
        if report.pass || next == max || repairs >= cfg.repair_rounds {
            return Ok(finish(prog, br.values, report, max, min, repairs));
        }
        max = next;
    }
}

fn finish(
    prog: &MathProgram,
    values: Vec<f64>,
    report: VerifyReport,
    max: Strategy,
    min: Strategy,
    repairs: usize,
) -> LocalResult {
    let objective = prog.objective(&prog.complete_assignment(&values));
    LocalResult { values, objective, report, max_strategy: max, min_strategy: min, starts: 0, repairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::fig1;
    use crate::generators::{gen_random, RandomGameParams};
    use crate::mathprog::encode::encode_hop;
    use crate::oracle::exact_solve;

    #[test]
    fn fig1_verifies() {
        let g = fig1();
        let prog = encode_hop(&g).unwrap();
        let r = local_solve(&g, &prog, &LocalConfig::default()).unwrap();
        assert!(r.verified(), "{}", r.report);
        assert!((r.values[0] - 0.5).abs() < 1e-9);
        assert_eq!(r.status(), "VERIFIED");
    }

    #[test]
    fn random_games_match_oracle() {
        for seed in 0..25 {
            let g = gen_random(seed, &RandomGameParams::default());
            let Ok(prog) = encode_hop(&g) else { continue };
            let r = local_solve(&g, &prog, &LocalConfig { seed, ..LocalConfig::default() }).unwrap();
            let exact = exact_solve(&g).unwrap().values_f64();
            assert!(r.verified(), "seed {seed}: {}", r.report);
            for s in g.states() {
                assert!((r.values[s] - exact[s]).abs() < 1e-9, "seed {seed} state {s}");
            }
        }
    }

    #[test]
    fn warm_start_is_tried_first() {
        let g = fig1();
        let prog = encode_hop(&g).unwrap();
        let cfg = LocalConfig { warm_start: Some(vec![0.5, 0.5, 1.0, 0.0]), restarts: 0, ..LocalConfig::default() };
        let r = local_solve(&g, &prog, &cfg).unwrap();
        assert_eq!(r.starts, 1);
        assert!(r.verified());
    }
}
