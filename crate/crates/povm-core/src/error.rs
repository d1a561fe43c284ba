//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced while validating models or running numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be square is not.
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare {
        /// Number of rows found.
        rows: usize,
        /// Number of columns found.
        cols: usize,
    },

    /// Two objects that must share a dimension or count do not.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        /// What was being compared.
        context: &'static str,
        /// Expected dimension or count.
        expected: usize,
        /// Dimension or count found.
        got: usize,
    },

    /// An operation was asked to work on an empty operator family.
    #[error("operator family is empty")]
    EmptyFamily,

    /// An operator that must be positive semidefinite has a negative eigenvalue.
    #[error("operator is not positive semidefinite: minimum eigenvalue {eigenvalue:.3e}")]
    NotPositiveSemidefinite {
        /// The offending (most negative) eigenvalue.
        eigenvalue: f64,
    },

    /// An effect in a measurement family has a negative eigenvalue.
    #[error("effect {index} is not positive semidefinite: minimum eigenvalue {eigenvalue:.3e}")]
    ElementNotPositive {
        /// Index of the offending effect in the family.
        index: usize,
        /// The offending eigenvalue.
        eigenvalue: f64,
    },

    /// The effects of a measurement do not sum to the identity.
    #[error("effects do not sum to the identity: deviation {deviation:.3e} exceeds bound {bound:.3e}")]
    CompletenessViolation {
        /// Frobenius norm of (sum - identity).
        deviation: f64,
        /// The bound that was exceeded.
        bound: f64,
    },

    /// A label or numeric entry is NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFiniteValue {
        /// Where the value appeared.
        context: &'static str,
    },

    /// Outcome labels must be pairwise distinct.
    #[error("outcome label {label} appears more than once")]
    DuplicateLabel {
        /// The repeated label.
        label: f64,
    },

    /// A projection in a projection-valued measure is zero.
    #[error("projection {index} is zero")]
    ZeroProjection {
        /// Index of the zero projection.
        index: usize,
    },

    /// A claimed projection is not idempotent.
    #[error("projection {index} is not idempotent: deviation {deviation:.3e}")]
    NotIdempotent {
        /// Index of the offending projection.
        index: usize,
        /// Frobenius norm of (P^2 - P).
        deviation: f64,
    },

    /// Two projections of a projection-valued measure overlap.
    #[error("projections {i} and {j} are not orthogonal: overlap {overlap:.3e}")]
    NotOrthogonal {
        /// First projection index.
        i: usize,
        /// Second projection index.
        j: usize,
        /// Frobenius norm of the product.
        overlap: f64,
    },

    /// A density matrix does not have unit trace.
    #[error("trace is {trace} but must equal 1")]
    TraceNotOne {
        /// The trace found.
        trace: f64,
    },

    /// Two members of a family that must commute do not.
    #[error("operators {i} and {j} do not commute: commutator norm {norm:.3e}")]
    CommutativityViolation {
        /// First operator index.
        i: usize,
        /// Second operator index.
        j: usize,
        /// Frobenius norm of the commutator.
        norm: f64,
    },

    /// An effect fails to act as a scalar on an eigenspace of the
    /// candidate coarse observable, so the coarse observable does not
    /// refine the measurement.
    #[error(
        "effect {outcome_index} is not scalar on eigenspace {eigenspace_index}: residual {residual:.3e}"
    )]
    NotARefinement {
        /// Index of the offending effect.
        outcome_index: usize,
        /// Index of the eigenspace it fails on.
        eigenspace_index: usize,
        /// Frobenius norm of the non-scalar part.
        residual: f64,
    },

    /// A label function was evaluated outside its domain.
    #[error("function is undefined on label {label}")]
    UndefinedLabel {
        /// The missing label.
        label: f64,
    },

    /// A label function that must be one-to-one maps two labels to the
    /// same value.
    #[error("function is not injective: labels {a} and {b} share one value")]
    NotInjective {
        /// First label.
        a: f64,
        /// Second label.
        b: f64,
    },

    /// Two rows of an eigenvalue table coincide within tolerance.
    #[error("table rows {i} and {j} coincide within tolerance")]
    DuplicateRows {
        /// First row index.
        i: usize,
        /// Second row index.
        j: usize,
    },

    /// A seed vector for image separation has two entries closer than the
    /// required separation.
    #[error("seed entries {a} and {b} are closer than the required separation")]
    InvalidSeed {
        /// First entry.
        a: f64,
        /// Second entry.
        b: f64,
    },

    /// Outcome values form an ambiguous chain: some pairs are within
    /// tolerance of each other but the whole group spreads wider.
    #[error("ambiguous outcome labels: {detail}")]
    LabelCollision {
        /// Human-readable description of the ambiguous chain.
        detail: String,
    },

    /// A numerical routine failed to meet its accuracy contract.
    #[error("numerical failure in {op}: {detail}")]
    NumericalFailure {
        /// Name of the operation that failed.
        op: &'static str,
        /// Diagnostic detail, including residuals where available.
        detail: String,
    },

    /// A file could not be read or written.
    #[error("failed to access {path}: {source}")]
    Io {
        /// The file path.
        path: String,
        /// The underlying I/O error.
        #[source]
        source: std::io::Error,
    },

    /// A model file is not valid JSON.
    #[error("JSON parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        /// The file path (or another description of the source).
        path: String,
        /// 1-based line of the first error.
        line: usize,
        /// 1-based column of the first error.
        column: usize,
        /// Parser message.
        message: String,
    },

    /// A model file declares a schema version this crate does not speak.
    #[error("unsupported schema version {found:?} (expected \"povm/1\")")]
    SchemaVersion {
        /// The version string found in the file.
        found: String,
    },

    /// A model file is valid JSON but not a valid model.
    #[error("malformed model file: {detail}")]
    MalformedModel {
        /// What is wrong with the file.
        detail: String,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
