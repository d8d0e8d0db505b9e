use thiserror::Error;

use crate::term::Dims;

/// Source position, 1-based line and 0-based column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}{}", at(.pos))]
    DimMismatch { op: &'static str, expected: Dims, got: Dims, pos: Option<Pos> },
    #[error("unbound atom `{0}`")]
    UnboundAtom(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("rewrite budget of {0} steps exhausted")]
    FuelExhausted(u64),
    #[error("term is not in reduced shape: {0}")]
    NotInReducedShape(String),
    #[error("dimensions {0} are not powers of two")]
    NotQubitDims(Dims),
    #[error("expected a column vector, got {0}")]
    NotAVector(Dims),
    #[error("expected a square operator, got {0}")]
    NotSquare(Dims),
    #[error("expected an operator normal form")]
    NotAnOperator,
    #[error("term does not match super(m, density(psi))")]
    PatternMismatch,
    #[error("qubit index {k} out of range for {n}+1 qubits")]
    InvalidQubitIndex { n: u32, k: u32 },
    #[error("unknown bench case `{0}`")]
    UnknownCase(String),
    #[error("{0}")]
    Input(String),
}

fn at(pos: &Option<Pos>) -> String {
    match pos {
        Some(p) => format!(" at {p}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
