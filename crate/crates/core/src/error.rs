use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::reduction::ReducibilityCheck;

/// Errors raised by the reduction pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("operands live on different frequency bases")]
    Basis,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },
    #[error("invalid frequency basis: {0}")]
    InvalidBasis(String),
    #[error("frequencies `{first}` and `{second}` are commensurate ({a}*{first} ~ {b}*{second})")]
    Commensurate {
        first: String,
        second: String,
        a: i32,
        b: i32,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not semi-simple: {0}")]
    NotSemiSimple(String),
    #[error("irreducible resonance: {0}")]
    IrreducibleResonance(String),
    #[error("transformation assembly failed: {0}")]
    Assembly(String),
    #[error("transformation is singular at t = {time} (condition number {condition:e})")]
    SingularSample { time: f64, condition: f64 },
    #[error("recurrent inversion diverged at t = {0}")]
    Divergence(f64),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("linear resonance: {0}")]
    LinearResonance(Box<Violation>),
    #[error("reducibility violation: {0}")]
    ReducibilityViolation(Box<Violation>),
    #[error("integration produced a non-finite state at t = {0}")]
    BlowUp(f64),
    #[error("recovered physical states carry an imaginary residue of {0:e}")]
    ImaginaryLeak(f64),
}

/// The first failing divisor check of a manifold solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: ReducibilityCheck,
    pub tolerance: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition `{}` violated on slave {} (monomial {:?}, index {:?}): |divisor| = {:e} < {:e}",
            self.check.condition,
            self.check.slave,
            self.check.monomial.exponents(),
            self.check.index.as_slice(),
            self.check.divisor.norm(),
            self.tolerance
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
