//! Solvers for simple stochastic games with reachability objectives.
//!
//! A game ([`StochasticGame`]) is parsed from the `.ssg` text format or built
//! with [`GameBuilder`] and the [`generators`]. It can then be solved by
//! bounded value iteration ([`bvi`]), strategy iteration ([`si`]), the
//! SCC-by-SCC driver ([`topological`]) or via a mathematical-program encoding
//! ([`mathprog`]). The brute-force [`oracle`] gives exact reference values
//! for small games.
//!
//! ```
//! use ssg::{bvi, generators};
//!
//! let game = generators::fig1();
//! let result = bvi::solve_bvi(&game, &bvi::BviConfig::default());
//! assert!((result.values[game.initial()] - 0.5).abs() < 1e-6);
//! ```

pub mod bvi;
pub mod chain;
pub mod cli;
pub mod error;
pub mod format;
pub mod game;
pub mod generators;
pub mod graph;
pub mod mathprog;
pub mod numeric;
pub mod oracle;
pub mod si;
pub mod strategy;
pub mod topological;

pub use chain::{induce_and_solve, induce_and_solve_f64, InducedChain};
pub use error::{Error, GameError, ParseError, Result};
pub use format::{parse_game, serialize_game};
pub use game::{Action, Branch, GameBuilder, Player, StochasticGame};
pub use graph::{attractor_strategy, best_exit, compute_sinks, mec_decomposition, scc_order, Mec, MecCatalog};
pub use strategy::{SolveResult, SolveStats, Strategy};
