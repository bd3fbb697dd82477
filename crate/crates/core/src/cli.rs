//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 parse or validation error,
//! 3 solver did not converge (iteration or round cap, singular system),
//! 4 verification failed, 5 program cannot be encoded as requested.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bvi::{solve_bvi, solve_vi, BviConfig};
use crate::error::{Error, Result};
use crate::format::{parse_game, serialize_game};
use crate::game::StochasticGame;
use crate::generators::{gen_bigmec, gen_hm, gen_mulmec, gen_random, RandomGameParams};
use crate::graph::{compute_sinks, mec_decomposition};
use crate::mathprog::{
    emit_program, encode_hop_with, encode_qp_with, local_solve, parse_native, transform_2act, transform_stopping,
    verify_solution, EncodeOptions, LocalConfig, ProgramFormat, DEFAULT_PAIR_BUDGET,
};
use crate::numeric::{format_rational, parse_rational};
use crate::si::{solve_si, OpponentSolver, SiConfig};
use crate::strategy::{SolveResult, SolveStats};
use crate::topological::{topo_solve, SubSolver, TopoConfig};

#[derive(Debug, Parser)]
#[command(name = "ssg", version, about = "Solve simple stochastic games with reachability objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a game and print values and strategies.
    Solve(SolveArgs),
    /// Write the value program of a game.
    Encode(EncodeArgs),
    /// Check candidate values against a program in native format.
    Verify(VerifyArgs),
    /// Generate a benchmark or random game.
    Gen(GenArgs),
    /// Run solvers over every `.ssg` file of a directory and print CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Bvi,
    Vi,
    Si,
    TopoBvi,
    TopoSi,
    HopLocal,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Bvi => "bvi",
            Algo::Vi => "vi",
            Algo::Si => "si",
            Algo::TopoBvi => "topo-bvi",
            Algo::TopoSi => "topo-si",
            Algo::HopLocal => "hop-local",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Opponent {
    Exact,
    Bvi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum WarmStart {
    None,
    Vi,
}

#[derive(Clone, Debug, clap::Args)]
struct SolverOptions {
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    deflate_period: usize,
    /// Iteration cap for value iteration based methods.
    #[arg(long, default_value_t = 10_000_000)]
    max_iterations: usize,
    #[arg(long, value_enum, default_value_t = Opponent::Exact)]
    opponent: Opponent,
    /// Use plain value iteration for the opponent instead (no guarantee).
    #[arg(long = "unsafe")]
    unsafe_opponent: bool,
    #[arg(long, value_enum, default_value_t = WarmStart::None)]
    warm_start: WarmStart,
    /// Exact rational arithmetic in strategy iteration.
    #[arg(long)]
    exact_rational: bool,
    /// Topological solving: solve each SCC to eps divided by the chain depth.
    #[arg(long)]
    tighten: bool,
    /// Seed for the random restarts of hop-local.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pair_budget: u128,
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Bvi)]
    algo: Algo,
    #[command(flatten)]
    opts: SolverOptions,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Form {
    Qp,
    Hop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    LpStyle,
    Native,
}

#[derive(Debug, clap::Args)]
struct EncodeArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Form::Hop)]
    form: Form,
    /// Split states with more than two actions first.
    #[arg(long)]
    two_act: bool,
    /// Make the game stopping with this probability (decimal or fraction).
    #[arg(long, value_name = "EPS")]
    stopping: Option<String>,
    #[arg(long, value_enum, default_value_t = OutFormat::Native)]
    format: OutFormat,
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pair_budget: u128,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    /// The game the values belong to.
    file: PathBuf,
    /// Program in native format.
    #[arg(long)]
    program: PathBuf,
    /// Values: `solve --json` output or whitespace-separated numbers.
    #[arg(long)]
    values: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Mulmec,
    Bigmec,
    Hm,
    Random,
}

#[derive(Debug, clap::Args)]
struct GenArgs {
    #[arg(value_enum)]
    model: Model,
    /// Size parameter of mulmec, bigmec and hm.
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    states: usize,
    #[arg(long, default_value_t = 3)]
    actions: usize,
    #[arg(long, default_value_t = 3)]
    branching: usize,
    #[arg(long, default_value_t = 0.5)]
    minimizer_fraction: f64,
    #[arg(long, default_value_t = 0.2)]
    target_fraction: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algo::Bvi, Algo::Si])]
    algos: Vec<Algo>,
    /// Seconds per solve.
    #[arg(long, default_value_t = 900.0)]
    timeout: f64,
    #[command(flatten)]
    opts: SolverOptions,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// `solve --json` document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub algo: Algo,
    pub states: usize,
    pub initial: usize,
    pub initial_value: f64,
    pub values: Vec<f64>,
    /// Exact values as reduced fractions, when available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    /// Action name per Maximizer state, `null` elsewhere.
    pub max_strategy: Vec<Option<String>>,
    pub min_strategy: Vec<Option<String>>,
    pub iterations: usize,
    pub converged: bool,
    /// Set by hop-local: whether the values passed verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    pub stats: SolveStats,
}

impl SolveReport {
    fn new(game: &StochasticGame, algo: Algo, r: &SolveResult, verified: Option<bool>) -> Self {
        let names = |strategy: &crate::strategy::Strategy| {
            game.states().map(|s| strategy.get(s).map(|a| game.action(s, a).name.clone())).collect()
        };
        SolveReport {
            algo,
            states: game.num_states(),
            initial: game.initial(),
            initial_value: r.values[game.initial()],
            values: r.values.clone(),
            exact_values: r.exact_values.as_ref().map(|v| v.iter().map(format_rational).collect()),
            upper: r.upper.clone(),
            max_strategy: names(&r.max_strategy),
            min_strategy: names(&r.min_strategy),
            iterations: r.iterations,
            converged: r.converged,
            verified,
            stats: r.stats.clone(),
        }
    }

    fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "algorithm {}", self.algo.name())?;
        for (s, v) in self.values.iter().enumerate() {
            write!(out, "state {s} value {v}")?;
            if let Some(ev) = &self.exact_values {
                write!(out, " ({})", ev[s])?;
            }
            if let Some(u) = &self.upper {
                write!(out, " upper {}", u[s])?;
            }
            if let Some(a) = self.max_strategy[s].as_ref().or(self.min_strategy[s].as_ref()) {
                write!(out, " action {a}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "initial {} value {}", self.initial, self.initial_value)?;
        writeln!(
            out,
            "iterations {} converged {} gap {:e} residual {:e} deflations {} sub-solves {}",
            self.iterations,
            self.converged,
            self.stats.gap,
            self.stats.residual,
            self.stats.deflations,
            self.stats.sub_solves
        )?;
        if self.stats.sub_solves > 0 && self.stats.error_bound.is_finite() {
            writeln!(out, "accumulated error bound {:e}", self.stats.error_bound)?;
        }
        if let Some(v) = self.verified {
            writeln!(out, "{}", if v { "VERIFIED" } else { "NOT-VERIFIED" })?;
        }
        Ok(())
    }
}

/// Parses `args` (program name first) and runs the command, writing to
/// standard output and error. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Game(_) => 2,
        Error::NotProper { .. } | Error::Singular { .. } | Error::BudgetExceeded { .. } => 3,
        Error::EncodingInfeasible { .. } | Error::NotTwoAct { .. } | Error::DegreeTooHigh { .. } => 5,
        Error::SubSolve { source, .. } => exit_code(source),
        Error::InvalidArgument(_) | Error::Io(_) => 1,
    }
}

fn read_game(path: &Path) -> Result<StochasticGame> {
    parse_game(&std::fs::read_to_string(path)?)
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one algorithm; returns the result and, for hop-local, whether it verified.
fn run_algo(game: &StochasticGame, algo: Algo, o: &SolverOptions) -> Result<(SolveResult, Option<bool>)> {
    let bvi = BviConfig::default()
        .with_eps(o.eps)
        .with_deflate_period(o.deflate_period)
        .with_max_iterations(o.max_iterations);
    let warm = || match o.warm_start {
        WarmStart::None => None,
        WarmStart::Vi => Some(solve_vi(game, &bvi).values),
    };
    let topo = |sub_solver| TopoConfig {
        sub_solver,
        eps: o.eps,
        tighten: o.tighten,
        deflate_period: o.deflate_period,
        max_iterations: o.max_iterations,
    };
    Ok(match algo {
        Algo::Bvi => (solve_bvi(game, &bvi), None),
        Algo::Vi => (solve_vi(game, &bvi), None),
        Algo::Si => {
            let cfg = SiConfig {
                opponent: match o.opponent {
                    _ if o.unsafe_opponent => OpponentSolver::UnsafeVi,
                    Opponent::Exact => OpponentSolver::Exact,
                    Opponent::Bvi => OpponentSolver::BviDomination,
                },
                warm_start: warm(),
                exact_rational: o.exact_rational,
                ..SiConfig::default()
            };
            (solve_si(game, &cfg)?, None)
        }
        Algo::TopoBvi => (topo_solve(game, &topo(SubSolver::Bvi))?, None),
        Algo::TopoSi => (topo_solve(game, &topo(SubSolver::Si))?, None),
        Algo::HopLocal => {
            let prog = encode_hop_with(game, &EncodeOptions { pair_budget: o.pair_budget })?;
            let cfg = LocalConfig { warm_start: warm(), seed: o.seed, ..LocalConfig::default() };
            let local = local_solve(game, &prog, &cfg)?;
            let verified = local.verified();
            let result = SolveResult {
                stats: SolveStats { residual: local.report.max_residual, ..SolveStats::default() },
                values: local.values,
                exact_values: None,
                upper: None,
                max_strategy: local.max_strategy,
                min_strategy: local.min_strategy,
                iterations: local.repairs,
                converged: verified,
            };
            (result, Some(verified))
        }
    })
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let game = read_game(&a.file)?;
    let (result, verified) = run_algo(&game, a.algo, &a.opts)?;
    let report = SolveReport::new(&game, a.algo, &result, verified);
    if a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        writeln!(out, "{text}")?;
    } else {
        report.write_text(out)?;
    }
    Ok(match verified {
        Some(false) => 4,
        _ if !result.converged => 3,
        _ => 0,
    })
}

fn cmd_encode(a: EncodeArgs, out: &mut dyn Write) -> Result<i32> {
    let mut game = read_game(&a.file)?;
    if a.two_act {
        game = transform_2act(&game).0;
    }
    if let Some(text) = &a.stopping {
        let eps = parse_rational(text)
            .filter(|e| *e > num_traits::Zero::zero() && *e < num_traits::One::one())
            .ok_or_else(|| Error::InvalidArgument(format!("stopping probability `{text}` is not in (0, 1)")))?;
        game = transform_stopping(&game, &eps).game;
    }
    let opts = EncodeOptions { pair_budget: a.pair_budget };
    let prog = match a.form {
        Form::Qp => encode_qp_with(&game, &opts)?,
        Form::Hop => encode_hop_with(&game, &opts)?,
    };
    let format = match a.format {
        OutFormat::LpStyle => ProgramFormat::LpStyle,
        OutFormat::Native => ProgramFormat::Native,
    };
    write_output(a.output.as_deref(), &emit_program(&prog, format)?, out)?;
    Ok(0)
}

/// Reads a values file: `solve --json` output or plain numbers.
fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let report: SolveReport =
            serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        return Ok(report.values);
    }
    text.split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("`{w}` is not a number"))))
        .collect()
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let game = read_game(&a.file)?;
    let prog = parse_native(&std::fs::read_to_string(&a.program)?)?;
    let values = read_values(&a.values)?;
    if values.len() < prog.num_states || prog.num_states < game.num_states() {
        return Err(Error::InvalidArgument(format!(
            "{} values for a program over {} states (game has {})",
            values.len(),
            prog.num_states,
            game.num_states()
        )));
    }
    let report = verify_solution(&prog, &values[..prog.num_states], a.tol);
    writeln!(out, "{report}")?;
    Ok(if report.pass { 0 } else { 4 })
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<i32> {
    let size = || match a.size {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(Error::InvalidArgument("this model needs a size of at least 1".into())),
    };
    let game = match a.model {
        Model::Mulmec => gen_mulmec(size()?),
        Model::Bigmec => gen_bigmec(size()?),
        Model::Hm => gen_hm(size()?),
        Model::Random => {
            if a.states < 2 {
                return Err(Error::InvalidArgument("random games need at least 2 states".into()));
            }
            let params = RandomGameParams {
                n_states: a.states,
                max_actions: a.actions,
                max_branching: a.branching,
                minimizer_fraction: a.minimizer_fraction,
                target_fraction: a.target_fraction,
            };
            gen_random(a.seed, &params)
        }
    };
    write_output(a.output.as_deref(), &serialize_game(&game), out)?;
    Ok(0)
}

const CSV_HEADER: &str = "model,states,max_acts,avg_acts,mecs,algo,value,iters,seconds,status";

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&a.dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ssg"))
        .collect();
    files.sort();
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let timeout = Duration::from_secs_f64(a.timeout.max(0.0));
    for path in files {
        let model = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let game = read_game(&path)?;
        let sinks = compute_sinks(&game);
        let mecs = mec_decomposition(&game).nontrivial(&game, &sinks).count();
        for &algo in &a.algos {
            let (value, iters, seconds, status) = bench_one(&game, algo, &a.opts, timeout);
            csv.push_str(&format!(
                "{model},{},{},{:.2},{mecs},{},{value},{iters},{seconds:.3},{status}\n",
                game.num_states(),
                game.max_actions(),
                game.avg_actions(),
                algo.name()
            ));
        }
    }
    write_output(a.output.as_deref(), &csv, out)?;
    Ok(0)
}

/// One timed solve on a worker thread. A solve that overruns is abandoned.
fn bench_one(
    game: &StochasticGame,
    algo: Algo,
    opts: &SolverOptions,
    timeout: Duration,
) -> (String, String, f64, &'static str) {
    let (tx, rx) = mpsc::channel();
    let (g, o) = (game.clone(), opts.clone());
    let start = Instant::now();
    std::thread::spawn(move || {
        let _ = tx.send(run_algo(&g, algo, &o));
    });
    let outcome = rx.recv_timeout(timeout);
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Err(_) => (String::new(), String::new(), seconds, "TIMEOUT"),
        Ok(Err(e)) => {
            let status = match e {
                Error::EncodingInfeasible { .. } | Error::NotTwoAct { .. } | Error::DegreeTooHigh { .. } => {
                    "ENCODING-INFEASIBLE"
                }
                _ => "NOT-VERIFIED",
            };
            (String::new(), String::new(), seconds, status)
        }
        Ok(Ok((r, verified))) => {
            let status = match verified {
                Some(false) => "NOT-VERIFIED",
                _ if !r.converged => "TIMEOUT",
                _ => "OK",
            };
            (r.values[game.initial()].to_string(), r.iterations.to_string(), seconds, status)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["ssg"]).0, 1);
        assert_eq!(run_capture(&["ssg", "solve"]).0, 1);
        assert_eq!(run_capture(&["ssg", "solve", "x.ssg", "--algo", "nope"]).0, 1);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["ssg", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("solve") && out.contains("bench"));
    }

    #[test]
    fn gen_writes_to_stdout() {
        let (code, out, _) = run_capture(&["ssg", "gen", "mulmec", "2"]);
        assert_eq!(code, 0);
        assert_eq!(parse_game(&out).unwrap().num_states(), 8);
        assert_eq!(run_capture(&["ssg", "gen", "hm"]).0, 1);
    }

    #[test]
    fn exit_codes_follow_errors() {
        assert_eq!(exit_code(&Error::InvalidArgument(String::new())), 1);
        assert_eq!(exit_code(&Error::NotTwoAct { state: 0, actions: 3 }), 5);
        let nested = Error::SubSolve { scc: 0, source: Box::new(Error::NotProper { state: 1 }) };
        assert_eq!(exit_code(&nested), 3);
    }

    #[test]
    fn report_json_round_trips() {
        let game = crate::generators::fig1();
        let (r, v) = run_algo(
            &game,
            Algo::Si,
            &SolverOptions {
                eps: 1e-6,
                deflate_period: 100,
                max_iterations: 1000,
                opponent: Opponent::Exact,
                unsafe_opponent: false,
                warm_start: WarmStart::None,
                exact_rational: true,
                tighten: false,
                seed: 0,
                pair_budget: DEFAULT_PAIR_BUDGET,
            },
        )
        .unwrap();
        let report = SolveReport::new(&game, Algo::Si, &r, v);
        let text = serde_json::to_string(&report).unwrap();
        let back: SolveReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(report.exact_values.unwrap()[0], "1/2");
        assert_eq!(report.max_strategy[1].as_deref(), Some("c"));
    }
}
