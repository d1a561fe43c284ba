//! Dilation of a POVM to a projection-valued measure on an extended
//! space.
//!
//! An `m`-outcome POVM on an `n`-dimensional space extends to the space
//! of dimension `n*m` obtained by adjoining an `m`-dimensional pointer
//! factor (the original space varies slowly in the composite index
//! `i*m + k`). The columns of the isometry
//! `V[(i*m + k), j] = sqrt(F_k)[i, j]` embed the original space; the
//! pointer projections `E_k = I (x) |e_k><e_k|` form a projection-valued
//! measure whose compression `V^dagger E_k V` returns each effect `F_k`.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, fro_norm, identity, kron, psd_sqrt, CMatrix, HermitianMatrix};
use crate::povm::{DiscretePOVM, LabelFunction, PVMeasure};
use crate::tol::{TOL_OPERATOR, TOL_PSD};

/// A POVM together with its extension to a projection-valued measure on
/// the enlarged space.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    povm: DiscretePOVM,
    isometry: CMatrix,
    extended: PVMeasure,
    projector: HermitianMatrix,
}

impl NaimarkDilation {
    /// The POVM being dilated.
    pub fn povm(&self) -> &DiscretePOVM {
        &self.povm
    }

    /// The isometry `V` from the original space into the extended one;
    /// shape `(n*m) x n` with `V^dagger V = I`.
    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    /// The extended projection-valued measure, labeled by the original
    /// outcomes.
    pub fn extended(&self) -> &PVMeasure {
        &self.extended
    }

    /// The projection `V V^dagger` onto the embedded copy of the
    /// original space.
    pub fn projector(&self) -> &HermitianMatrix {
        &self.projector
    }

    /// Dimension of the original space.
    pub fn system_dim(&self) -> usize {
        self.povm.dim()
    }

    /// Dimension of the extended space, `n*m`.
    pub fn extended_dim(&self) -> usize {
        self.extended.dim()
    }

    /// Compression of an extended-space operator back to the original
    /// space: `V^dagger X V`.
    pub fn compress(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.dim() != self.extended_dim() {
            return Err(Error::DimensionMismatch {
                context: "compression input size",
                expected: self.extended_dim(),
                got: x.dim(),
            });
        }
        let v = &self.isometry;
        Ok(HermitianMatrix::from_square(
            dagger(v).dot(x.as_array()).dot(v),
        ))
    }
}

/// Builds the dilation of a POVM.
///
/// Verified internally before returning: `V^dagger V = I` within
/// `1e-10 * n`, and `V^dagger E_k V = F_k` within `1e-9 * n` for every
/// outcome.
pub fn dilate(povm: &DiscretePOVM) -> Result<NaimarkDilation> {
    let n = povm.dim();
    let m = povm.len();
    let mut isometry: CMatrix = Array2::zeros((n * m, n));
    for (k, effect) in povm.elements().iter().enumerate() {
        let root = psd_sqrt(effect, TOL_PSD)?;
        for i in 0..n {
            for j in 0..n {
                isometry[(i * m + k, j)] = root.entry(i, j);
            }
        }
    }

    let gram = dagger(&isometry).dot(&isometry);
    let gram_residual = fro_norm(&(&gram - &identity(n)));
    if gram_residual > 1e-10 * n as f64 {
        return Err(Error::NumericalFailure {
            op: "dilate",
            detail: format!("isometry gram residual {gram_residual:.3e}"),
        });
    }

    let mut projections = Vec::with_capacity(m);
    for k in 0..m {
        let mut pointer: CMatrix = Array2::zeros((m, m));
        pointer[(k, k)] = C64::new(1.0, 0.0);
        projections.push(HermitianMatrix::from_square(kron(&identity(n), &pointer)));
    }
    let extended = PVMeasure::new(povm.outcomes().to_vec(), projections)?;

    let projector = HermitianMatrix::from_square(isometry.dot(&dagger(&isometry)));

    let dilation = NaimarkDilation {
        povm: povm.clone(),
        isometry,
        extended,
        projector,
    };
    for (k, effect) in povm.elements().iter().enumerate() {
        let back = dilation.compress(&dilation.extended.projections()[k])?;
        let residual = (&back - effect).fro_norm();
        if residual > TOL_OPERATOR * n as f64 {
            return Err(Error::NumericalFailure {
                op: "dilate",
                detail: format!("compression of pointer projection {k} misses its effect by {residual:.3e}"),
            });
        }
    }
    Ok(dilation)
}

/// Compression of the function `f` applied to the extended measure:
/// `V^dagger (sum_k f(k) E_k) V`.
///
/// By construction this equals the post-processed mixture
/// `sum_k f(outcome_k) F_k`, and that identity is checked internally
/// within `1e-9 * n` before returning.
pub fn project_function(dilation: &NaimarkDilation, f: &LabelFunction) -> Result<HermitianMatrix> {
    let n = dilation.system_dim();
    let values: Vec<f64> = dilation
        .povm()
        .outcomes()
        .iter()
        .map(|&l| f.value(l))
        .collect::<Result<_>>()?;
    let mut extended_sum = HermitianMatrix::zeros(dilation.extended_dim());
    for (k, proj) in dilation.extended().projections().iter().enumerate() {
        extended_sum = &extended_sum + &proj.scaled(values[k]);
    }
    let compressed = dilation.compress(&extended_sum)?;
    let mut direct = HermitianMatrix::zeros(n);
    for (k, effect) in dilation.povm().elements().iter().enumerate() {
        direct = &direct + &effect.scaled(values[k]);
    }
    let residual = (&compressed - &direct).fro_norm();
    if residual > TOL_OPERATOR * n as f64 {
        return Err(Error::NumericalFailure {
            op: "project_function",
            detail: format!("compression identity residual {residual:.3e}"),
        });
    }
    Ok(compressed)
}

/// The sharp operator `sum_k f(outcome_k) E_k` on the extended space,
/// for an injective `f`.
pub fn naimark_operator(dilation: &NaimarkDilation, f: &LabelFunction) -> Result<HermitianMatrix> {
    let outcomes = dilation.povm().outcomes();
    let values: Vec<f64> = outcomes
        .iter()
        .map(|&l| f.value(l))
        .collect::<Result<_>>()?;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            if values[i] == values[j] {
                return Err(Error::NotInjective {
                    a: outcomes[i],
                    b: outcomes[j],
                });
            }
        }
    }
    let mut acc = HermitianMatrix::zeros(dilation.extended_dim());
    for (k, proj) in dilation.extended().projections().iter().enumerate() {
        acc = &acc + &proj.scaled(values[k]);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn misregistered_pair(eps: f64, delta: f64) -> DiscretePOVM {
        DiscretePOVM::new(
            vec![0.5, -0.5],
            vec![
                HermitianMatrix::from_diagonal(&[1.0 - eps, delta]),
                HermitianMatrix::from_diagonal(&[eps, 1.0 - delta]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn dilation_satisfies_its_contract() {
        let povm = misregistered_pair(0.1, 0.2);
        let d = dilate(&povm).unwrap();
        assert_eq!(d.extended_dim(), 4);
        let v = d.isometry();
        let gram = dagger(v).dot(v);
        assert!(max_abs_diff(&gram, &identity(2)) < 1e-14);
        // The embedded projector is idempotent.
        let p = d.projector();
        let p2 = p.matmul(p);
        assert!(max_abs_diff(&p2, p.as_array()) < 1e-13);
        // Compression returns each effect.
        for (k, effect) in povm.elements().iter().enumerate() {
            let back = d.compress(&d.extended().projections()[k]).unwrap();
            assert!(max_abs_diff(back.as_array(), effect.as_array()) < 1e-14);
        }
    }

    #[test]
    fn projected_identity_function_matches_post_processing() {
        let povm = misregistered_pair(0.1, 0.2);
        let d = dilate(&povm).unwrap();
        let f = LabelFunction::identity(povm.outcomes()).unwrap();
        let out = project_function(&d, &f).unwrap();
        // (1/2) F_1 - (1/2) F_2 = diag(0.4, -0.3).
        let expected = HermitianMatrix::from_diagonal(&[0.4, -0.3]);
        assert!(max_abs_diff(out.as_array(), expected.as_array()) < 1e-13);
    }

    #[test]
    fn single_outcome_dilation_gives_scalar_operator() {
        let povm = DiscretePOVM::new(vec![7.0], vec![HermitianMatrix::identity(2)]).unwrap();
        let d = dilate(&povm).unwrap();
        assert_eq!(d.extended_dim(), 2);
        let f = LabelFunction::identity(povm.outcomes()).unwrap();
        let a = naimark_operator(&d, &f).unwrap();
        let expected = HermitianMatrix::identity(2).scaled(7.0);
        assert!(max_abs_diff(a.as_array(), expected.as_array()) < 1e-15);
    }

    #[test]
    fn rejects_undefined_and_noninjective_functions() {
        let povm = misregistered_pair(0.2, 0.2);
        let d = dilate(&povm).unwrap();
        let partial = LabelFunction::new(vec![(0.5, 1.0)]).unwrap();
        assert!(matches!(
            project_function(&d, &partial),
            Err(Error::UndefinedLabel { label }) if label == -0.5
        ));
        let constant = LabelFunction::from_fn(povm.outcomes(), |_| 3.0).unwrap();
        assert!(matches!(
            naimark_operator(&d, &constant),
            Err(Error::NotInjective { .. })
        ));
    }

    #[test]
    fn pointer_projections_use_slow_first_factor() {
        let povm = misregistered_pair(0.1, 0.2);
        let d = dilate(&povm).unwrap();
        // E_0 must select composite indices i*m + 0 = {0, 2}.
        let e0 = &d.extended().projections()[0];
        assert_eq!(e0.entry(0, 0).re, 1.0);
        assert_eq!(e0.entry(2, 2).re, 1.0);
        assert_eq!(e0.entry(1, 1).re, 0.0);
        assert_eq!(e0.entry(3, 3).re, 0.0);
    }
}
