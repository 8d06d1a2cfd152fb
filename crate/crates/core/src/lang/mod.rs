//! The quantum while-language: text format, AST, sampled trajectories and the
//! exact density-operator semantics.

mod ast;
mod exec;
pub mod gates;
mod lexer;
mod parser;
mod printer;
mod semantics;

use alloc::string::String;

pub use ast::{
    AssertSite, Builtin, CircuitStep, GateRef, KetSum, KetTerm, Location, ProjExpr, Program, Statement, Wire,
    DEFAULT_LOOP_CAP,
};
pub use exec::{run_trajectory, run_trajectory_with, Executable, ExecError, Mode, TrajectoryResult, TrajectoryStatus};
pub use parser::{bits_to_index, evaluate, ket_vector, parse_program, GATE_UNITARY_TOL};
pub use printer::{fmt_exact, print_program};
pub use semantics::{semantic_function, semantic_function_observed, SemanticResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownGate,
    QubitOutOfRange,
    NonUnitaryGateDef,
    BadProjectionExpr,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub location: Location,
    pub message: String,
}
