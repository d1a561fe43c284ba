//! Default numerical tolerances.
//!
//! Every tolerance has one home here so that validation, reconstruction,
//! and certification agree on what "equal", "zero", and "separated" mean.
//! The two knobs that callers commonly adjust are [`TOL_GROUP`] (eigenvalue
//! grouping, overridable on the command line via `--tol` or the `POVM_TOL`
//! environment variable) and [`SEP_MIN`] (minimum image separation,
//! overridable via `--sep`).

/// Eigenvalue grouping tolerance: two eigenvalues `a`, `b` of an operator
/// with spectral radius `r` are treated as equal when
/// `|a - b| <= TOL_GROUP * max(1, r)`.
pub const TOL_GROUP: f64 = 1e-9;

/// Positive-semidefiniteness slack: eigenvalues in `[-TOL_PSD, 0)` are
/// clamped to zero; anything below `-TOL_PSD` is rejected.
pub const TOL_PSD: f64 = 1e-10;

/// Minimum separation required between entries of an injective image
/// vector and between the values it produces.
pub const SEP_MIN: f64 = 1e-6;

/// Per-matrix bound for idempotence and orthogonality checks on
/// projections.
pub const TOL_PROJ: f64 = 1e-10;

/// Completeness bound scale: effects must sum to the identity within
/// `TOL_COMPLETENESS * dim` in Frobenius norm.
pub const TOL_COMPLETENESS: f64 = 1e-10;

/// Operator-identity bound scale: reconstruction and compression
/// identities must hold within `TOL_OPERATOR * dim` in Frobenius norm.
pub const TOL_OPERATOR: f64 = 1e-9;
