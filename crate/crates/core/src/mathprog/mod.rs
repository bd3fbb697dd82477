//! Value programs: encodings of a game as a (quadratic or higher-order)
//! program whose unique feasible zero-objective point is the value vector,
//! together with emitters, a local solver and a checker.

pub mod emit;
pub mod encode;
pub mod local;
pub mod program;
pub mod transform;
pub mod verify;

pub use emit::{emit_lp, emit_native, emit_program, parse_native, ProgramFormat};
pub use encode::{encode_hop, encode_hop_with, encode_qp, encode_qp_with, EncodeOptions, DEFAULT_PAIR_BUDGET};
pub use local::{local_solve, LocalConfig, LocalResult};
pub use program::{Affine, Constraint, ConstraintKind, GroupOp, MathProgram, MaxMinGroup, ProductTerm, Relation};
pub use transform::{transform_2act, transform_stopping, StoppingGame};
pub use verify::{verify_solution, VerifyReport};
