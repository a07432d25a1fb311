use alloc::boxed::Box;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("register of {qubits} qubits exceeds the supported maximum of {max}")]
    RegisterTooLarge { qubits: usize, max: usize },

    #[error("{op}: dimension mismatch ({left_rows}x{left_cols} vs {right_rows}x{right_cols})")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("{routine} did not converge within {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("qubit index {index} listed more than once")]
    DuplicateQubit { index: usize },

    #[error("cannot trace out every qubit of the register")]
    TraceAllQubits,

    #[error("invalid density matrix: {reason} ({value:e})")]
    InvalidDensity { reason: &'static str, value: f64 },

    #[error("input value {value} outside [0, 1]")]
    InputOutOfRange { value: f64 },

    #[error("expectation of observable {index} has imaginary part {imag:e}")]
    ImaginaryExpectation { index: usize, imag: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("empty {what}")]
    Empty { what: &'static str },

    #[error("delay {tau_d} exceeds the washout length {washout}")]
    DelayTooLong { tau_d: usize, washout: usize },

    #[error("NARMA series diverged at step {step} (|y| = {value})")]
    NarmaDiverged { step: usize, value: f64 },

    #[error("value {value} outside the declared range [0, {max}]")]
    ValueOutOfRange { value: f64, max: f64 },

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn dims(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }
}
