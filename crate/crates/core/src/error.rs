use thiserror::Error;

/// Structural problems found while validating a game.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("game has no states")]
    Empty,
    #[error("initial state {initial} out of range (game has {states} states)")]
    InitialOutOfRange { initial: usize, states: usize },
    #[error("no target state declared")]
    NoTarget,
    #[error("state {state} has no owner")]
    MissingOwner { state: usize },
    #[error("state {state} has an empty action set")]
    EmptyActionSet { state: usize },
    #[error("state {state} declares action `{action}` twice")]
    DuplicateAction { state: usize, action: String },
    #[error("action `{action}` of state {state} refers to unknown state {successor}")]
    UnknownState { state: usize, action: String, successor: usize },
    #[error("action `{action}` of state {state} lists successor {successor} twice")]
    DuplicateSuccessor { state: usize, action: String, successor: usize },
    #[error("action `{action}` of state {state} has invalid probability {prob} for successor {successor}")]
    InvalidProbability { state: usize, action: String, successor: usize, prob: f64 },
    #[error("distribution of action `{action}` in state {state} sums to {sum}, expected 1")]
    DistributionSum { state: usize, action: String, sum: f64 },
}

/// Syntax or validation failure in a text file, with 1-based position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid game: {0}")]
    Game(#[from] GameError),
    #[error("strategy is not proper: play can avoid targets and sinks forever from state {state}")]
    NotProper { state: usize },
    #[error("linear system is singular (pivot {pivot:e} at state {state})")]
    Singular { state: usize, pivot: f64 },
    #[error("strategy budget exceeded: {profiles} profiles > {budget}")]
    BudgetExceeded { profiles: u128, budget: u128 },
    #[error("encoding infeasible: MEC #{mec} with {states} states needs {pairs} strategy pairs (budget {budget})")]
    EncodingInfeasible { mec: usize, states: usize, pairs: u128, budget: u128 },
    #[error("game violates 2Act (state {state} has {actions} actions); apply transform_2act first")]
    NotTwoAct { state: usize, actions: usize },
    #[error("lp-style output needs degree <= 2, term for state {state} has degree {degree}; use the 2Act pipeline")]
    DegreeTooHigh { state: usize, degree: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solving SCC #{scc} failed: {source}")]
    SubSolve {
        scc: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
