//! Built-in model constructors used by the demos and the test suites.
//!
//! All of them are exact rational-entry families in a fixed diagonal
//! basis, so expected results of the deciders can be computed by hand.

use ndarray::prelude::*;

use crate::error::Result;
use crate::linalg::HermitianMatrix;
use crate::povm::{DensityMatrix, DiscretePOVM, PVMeasure};
use crate::unsharpness::AncillaModel;

/// Two-outcome spin-half measurement with misregistration: reading
/// `+1/2` when the state is down happens with probability `delta`, and
/// reading `-1/2` when the state is up with probability `eps`.
///
/// Outcomes `(1/2, -1/2)` with effects
/// `diag(1-eps, delta)` and `diag(eps, 1-delta)`.
pub fn misregistered_spin_half(eps: f64, delta: f64) -> Result<DiscretePOVM> {
    DiscretePOVM::new(
        vec![0.5, -0.5],
        vec![
            HermitianMatrix::from_diagonal(&[1.0 - eps, delta]),
            HermitianMatrix::from_diagonal(&[eps, 1.0 - delta]),
        ],
    )
}

/// Three-outcome commutative POVM on a three-level system whose first
/// two basis directions carry identical eigenvalue patterns, so its
/// sharp reconstruction has two values.
///
/// Outcomes `(1, 2, 3)` with effects `diag(1/2, 1/2, 1/4)`,
/// `diag(1/5, 1/5, 1/4)`, `diag(3/10, 3/10, 1/2)`.
pub fn diagonal_triple() -> Result<DiscretePOVM> {
    DiscretePOVM::new(
        vec![1.0, 2.0, 3.0],
        vec![
            HermitianMatrix::from_diagonal(&[0.5, 0.5, 0.25]),
            HermitianMatrix::from_diagonal(&[0.2, 0.2, 0.25]),
            HermitianMatrix::from_diagonal(&[0.3, 0.3, 0.5]),
        ],
    )
}

/// Sharp spin-one observable along z: labels `(-1, 0, 1)` with the
/// three basis projections.
pub fn spin_one_z() -> Result<PVMeasure> {
    PVMeasure::new(
        vec![-1.0, 0.0, 1.0],
        vec![
            HermitianMatrix::from_diagonal(&[1.0, 0.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 1.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 0.0, 1.0]),
        ],
    )
}

/// Sharp measurement of the spin-up projector: labels `(1, 0)` with
/// projections `diag(1, 0)` and `diag(0, 1)`.
pub fn up_projection_measure() -> Result<PVMeasure> {
    PVMeasure::new(
        vec![1.0, 0.0],
        vec![
            HermitianMatrix::from_diagonal(&[1.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 1.0]),
        ],
    )
}

/// Ancilla model realizing [`misregistered_spin_half`]: a spin-half
/// system observable with labels `(1/2, -1/2)`, a four-level ancilla
/// whose state encodes the two error probabilities, and a pointer
/// function that keeps or flips the system value according to the
/// ancilla level.
///
/// Tracing the model against its state induces exactly the
/// misregistered pair, and the averaged pointer map is
/// `a = 1/2 -> 1/2 - eps`, `a = -1/2 -> delta - 1/2`, which loses
/// injectivity precisely when `eps + delta = 1`.
pub fn misregistration_ancilla_model(eps: f64, delta: f64) -> Result<AncillaModel> {
    let system = PVMeasure::new(
        vec![0.5, -0.5],
        vec![
            HermitianMatrix::from_diagonal(&[1.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 1.0]),
        ],
    )?;
    let ancilla = PVMeasure::new(
        vec![1.0, 2.0, 3.0, 4.0],
        vec![
            HermitianMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 1.0, 0.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 0.0, 1.0, 0.0]),
            HermitianMatrix::from_diagonal(&[0.0, 0.0, 0.0, 1.0]),
        ],
    )?;
    // Ancilla levels: (no error on up, no error on down), (no error on
    // up, error on down), (error on up, no error on down), (both).
    let state = DensityMatrix::from_diagonal(&[
        (1.0 - eps) * (1.0 - delta),
        (1.0 - eps) * delta,
        eps * (1.0 - delta),
        eps * delta,
    ])?;
    // Levels 3 and 4 flip an up reading; levels 2 and 4 flip a down
    // reading.
    let k_values = array![[0.5, 0.5, -0.5, -0.5], [-0.5, 0.5, -0.5, 0.5]];
    AncillaModel::new(system, ancilla, k_values, state)
}
