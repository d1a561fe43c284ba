//! Measurement models: discrete positive operator-valued measures,
//! projection-valued measures, density matrices, and finite label
//! functions.
//!
//! All three operator families are validated at construction, so holding
//! a value of one of these types is proof that its defining inequalities
//! hold within the documented tolerances.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, fro_norm, group_sorted, group_tol, trace_product, HermitianMatrix,
};
use crate::tol::{TOL_COMPLETENESS, TOL_PROJ, TOL_PSD};

fn check_labels(labels: &[f64], context: &'static str) -> Result<()> {
    for &l in labels {
        if !l.is_finite() {
            return Err(Error::NonFiniteValue { context });
        }
    }
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            if labels[i] == labels[j] {
                return Err(Error::DuplicateLabel { label: labels[i] });
            }
        }
    }
    Ok(())
}

fn check_completeness(family: &[HermitianMatrix], n: usize) -> Result<()> {
    let mut sum = HermitianMatrix::zeros(n);
    for f in family {
        sum = &sum + f;
    }
    let deviation = (&sum - &HermitianMatrix::identity(n)).fro_norm();
    let bound = TOL_COMPLETENESS * n as f64;
    if deviation > bound {
        return Err(Error::CompletenessViolation { deviation, bound });
    }
    Ok(())
}

/// Discrete positive operator-valued measure: finitely many labeled
/// effects, each positive semidefinite, summing to the identity.
#[derive(Debug, Clone)]
pub struct DiscretePOVM {
    outcomes: Vec<f64>,
    elements: Vec<HermitianMatrix>,
}

impl DiscretePOVM {
    /// Validates and wraps a labeled effect family.
    ///
    /// Requirements: at least one effect; one label per effect, labels
    /// finite and pairwise distinct; all effects of one size; every
    /// effect positive semidefinite (eigenvalues above `-1e-10`); the
    /// effects summing to the identity within `1e-10 * dim` in Frobenius
    /// norm.
    pub fn new(outcomes: Vec<f64>, elements: Vec<HermitianMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if outcomes.len() != elements.len() {
            return Err(Error::DimensionMismatch {
                context: "outcome and effect counts",
                expected: elements.len(),
                got: outcomes.len(),
            });
        }
        let n = elements[0].dim();
        for e in &elements {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    context: "effect size",
                    expected: n,
                    got: e.dim(),
                });
            }
        }
        check_labels(&outcomes, "outcome labels")?;
        for (index, e) in elements.iter().enumerate() {
            let eig = eig_hermitian(e)?;
            let lowest = eig.eigenvalues[0];
            if lowest < -TOL_PSD {
                return Err(Error::ElementNotPositive {
                    index,
                    eigenvalue: lowest,
                });
            }
        }
        check_completeness(&elements, n)?;
        Ok(Self { outcomes, elements })
    }

    /// Hilbert-space dimension the effects act on.
    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false: an empty family never validates.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Outcome labels, in presentation order.
    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    /// Effects, in the same order as the labels.
    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    /// Single effect by index.
    pub fn element(&self, k: usize) -> &HermitianMatrix {
        &self.elements[k]
    }

    /// Checks whether all effects commute pairwise: the pair `(i, j)`
    /// passes when `||[F_i, F_j]||_F <= tol * max(1, ||F_i||_F * ||F_j||_F)`.
    pub fn is_commutative(&self, tol: f64) -> CommutativityReport {
        let mut commutative = true;
        let mut worst_pair = None;
        let mut worst_norm = 0.0f64;
        for i in 0..self.elements.len() {
            for j in (i + 1)..self.elements.len() {
                let norm = self.elements[i].commutator_norm(&self.elements[j]);
                let bound = tol
                    * (self.elements[i].fro_norm() * self.elements[j].fro_norm()).max(1.0);
                if norm > bound {
                    commutative = false;
                }
                if norm > worst_norm {
                    worst_norm = norm;
                    worst_pair = Some((i, j));
                }
            }
        }
        CommutativityReport {
            commutative,
            worst_pair,
            worst_norm,
        }
    }

    /// Outcome probabilities in the given state: `p_k = tr(rho F_k)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "state dimension",
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        Ok(self
            .elements
            .iter()
            .map(|e| trace_product(rho.matrix().as_array(), e.as_array()).re)
            .collect())
    }

    /// Applies an injective relabeling to the outcomes, leaving the
    /// effects untouched. Fails if the mapped labels collide or are not
    /// finite.
    pub fn relabel_outcomes(&self, f: impl Fn(f64) -> f64) -> Result<DiscretePOVM> {
        let outcomes: Vec<f64> = self.outcomes.iter().map(|&l| f(l)).collect();
        check_labels(&outcomes, "relabeled outcomes")?;
        Ok(DiscretePOVM {
            outcomes,
            elements: self.elements.clone(),
        })
    }
}

/// Result of a pairwise commutativity scan.
#[derive(Debug, Clone)]
pub struct CommutativityReport {
    /// True when every pair passes its relative bound.
    pub commutative: bool,
    /// The pair with the largest commutator norm, if there are two or
    /// more effects.
    pub worst_pair: Option<(usize, usize)>,
    /// The largest commutator Frobenius norm over all pairs.
    pub worst_norm: f64,
}

/// Projection-valued measure: labeled orthogonal projections that sum to
/// the identity. This is the operator-level form of a sharp observable;
/// [`PVMeasure::operator`] recovers the matrix `sum_l label_l * P_l`.
#[derive(Debug, Clone)]
pub struct PVMeasure {
    labels: Vec<f64>,
    projections: Vec<HermitianMatrix>,
}

impl PVMeasure {
    /// Validates and wraps a labeled projection family.
    ///
    /// Requirements: labels finite and pairwise distinct; every matrix
    /// idempotent within `1e-10` and nonzero; projections pairwise
    /// orthogonal within `1e-10`; the family summing to the identity
    /// within `1e-10 * dim`.
    pub fn new(labels: Vec<f64>, projections: Vec<HermitianMatrix>) -> Result<Self> {
        if projections.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if labels.len() != projections.len() {
            return Err(Error::DimensionMismatch {
                context: "label and projection counts",
                expected: projections.len(),
                got: labels.len(),
            });
        }
        let n = projections[0].dim();
        for p in &projections {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    context: "projection size",
                    expected: n,
                    got: p.dim(),
                });
            }
        }
        check_labels(&labels, "projection labels")?;
        for (index, p) in projections.iter().enumerate() {
            if p.fro_norm() < 0.5 {
                return Err(Error::ZeroProjection { index });
            }
            let sq = p.matmul(p);
            let deviation = fro_norm(&(&sq - p.as_array()));
            if deviation > TOL_PROJ {
                return Err(Error::NotIdempotent { index, deviation });
            }
        }
        for i in 0..projections.len() {
            for j in (i + 1)..projections.len() {
                let overlap = fro_norm(&projections[i].matmul(&projections[j]));
                if overlap > TOL_PROJ {
                    return Err(Error::NotOrthogonal { i, j, overlap });
                }
            }
        }
        check_completeness(&projections, n)?;
        Ok(Self {
            labels,
            projections,
        })
    }

    /// Spectral measure of a Hermitian operator: eigenvalues grouped
    /// within `tol_group * max(1, spectral radius)` become the labels,
    /// and each group's eigenvectors form one projection.
    pub fn from_hermitian(h: &HermitianMatrix, tol_group: f64) -> Result<Self> {
        let eig = eig_hermitian(h)?;
        let tol = group_tol(tol_group, eig.spectral_radius());
        let groups = group_sorted(&eig.eigenvalues, tol);
        let mut labels = Vec::with_capacity(groups.len());
        let mut projections = Vec::with_capacity(groups.len());
        for &(lo, hi) in &groups {
            labels.push(eig.eigenvalues[lo]);
            let mut proj = HermitianMatrix::zeros(h.dim());
            for c in lo..hi {
                let col = eig.eigenvectors.column(c).to_owned();
                proj = &proj + &HermitianMatrix::outer(&col);
            }
            projections.push(proj);
        }
        Self::new(labels, projections)
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.projections[0].dim()
    }

    /// Number of distinct values.
    pub fn len(&self) -> usize {
        self.projections.len()
    }

    /// Always false: an empty family never validates.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values of the sharp observable, in presentation order.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Eigenspace projections, in the same order as the labels.
    pub fn projections(&self) -> &[HermitianMatrix] {
        &self.projections
    }

    /// Single projection by index.
    pub fn projection(&self, l: usize) -> &HermitianMatrix {
        &self.projections[l]
    }

    /// The self-adjoint operator `sum_l label_l * P_l` this measure
    /// diagonalizes.
    pub fn operator(&self) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim());
        for (l, p) in self.labels.iter().zip(&self.projections) {
            acc = &acc + &p.scaled(*l);
        }
        acc
    }

    /// Reinterprets the measure as a positive operator-valued measure;
    /// projections are in particular positive effects summing to the
    /// identity, so this always validates.
    pub fn to_povm(&self) -> Result<DiscretePOVM> {
        DiscretePOVM::new(self.labels.clone(), self.projections.clone())
    }
}

/// Density matrix: positive semidefinite with unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    /// Validates a candidate state: positive semidefinite (eigenvalues
    /// above `-1e-10`) with trace within `1e-10` of one.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let eig = eig_hermitian(&matrix)?;
        if eig.eigenvalues[0] < -TOL_PSD {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: eig.eigenvalues[0],
            });
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::TraceNotOne { trace });
        }
        Ok(Self { matrix })
    }

    /// Diagonal state with the given probability weights.
    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(weights))
    }

    /// Pure state concentrated on one basis vector.
    pub fn pure_basis_state(dim: usize, index: usize) -> Result<Self> {
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Self::from_diagonal(&weights)
    }

    /// Maximally mixed state `I/n`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim])
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

/// Real-valued function on a finite set of real labels, stored as
/// explicit (label, value) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelFunction {
    pairs: Vec<(f64, f64)>,
}

impl LabelFunction {
    /// Builds a function from explicit pairs; domain labels must be
    /// pairwise distinct and everything finite.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(l, v) in &pairs {
            if !l.is_finite() || !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    context: "label function",
                });
            }
        }
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                if pairs[i].0 == pairs[j].0 {
                    return Err(Error::DuplicateLabel { label: pairs[i].0 });
                }
            }
        }
        Ok(Self { pairs })
    }

    /// Tabulates a closure over the given labels.
    pub fn from_fn(labels: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(labels.iter().map(|&l| (l, f(l))).collect())
    }

    /// The identity function on the given labels.
    pub fn identity(labels: &[f64]) -> Result<Self> {
        Self::from_fn(labels, |l| l)
    }

    /// Value at a label, by exact match.
    pub fn get(&self, label: f64) -> Option<f64> {
        self.pairs
            .iter()
            .find(|&&(l, _)| l == label)
            .map(|&(_, v)| v)
    }

    /// Value at the nearest domain label within `tol`, if any.
    pub fn get_close(&self, label: f64, tol: f64) -> Option<f64> {
        self.pairs
            .iter()
            .filter(|&&(l, _)| (l - label).abs() <= tol)
            .min_by(|a, b| {
                (a.0 - label)
                    .abs()
                    .partial_cmp(&(b.0 - label).abs())
                    .unwrap()
            })
            .map(|&(_, v)| v)
    }

    /// Value at a label, erroring when the label is outside the domain.
    pub fn value(&self, label: f64) -> Result<f64> {
        self.get(label).ok_or(Error::UndefinedLabel { label })
    }

    /// The raw (label, value) pairs in insertion order.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// The values in insertion order.
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|&(_, v)| v).collect()
    }

    /// True when no two labels share a value (exact comparison).
    pub fn is_injective(&self) -> bool {
        for i in 0..self.pairs.len() {
            for j in (i + 1)..self.pairs.len() {
                if self.pairs[i].1 == self.pairs[j].1 {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest pairwise gap between values; infinite for fewer than two
    /// pairs.
    pub fn min_value_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..self.pairs.len() {
            for j in (i + 1)..self.pairs.len() {
                gap = gap.min((self.pairs[i].1 - self.pairs[j].1).abs());
            }
        }
        gap
    }
}

/// Smallest pairwise gap between entries of a slice; infinite for fewer
/// than two entries.
pub(crate) fn min_pairwise_gap(values: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            gap = gap.min((values[i] - values[j]).abs());
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::tol::TOL_GROUP;
    use ndarray::Array2;
    use num_complex::Complex64 as C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diagonal_triple() -> DiscretePOVM {
        DiscretePOVM::new(
            vec![1.0, 2.0, 3.0],
            vec![
                HermitianMatrix::from_diagonal(&[0.5, 0.5, 0.25]),
                HermitianMatrix::from_diagonal(&[0.2, 0.2, 0.25]),
                HermitianMatrix::from_diagonal(&[0.3, 0.3, 0.5]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn accepts_valid_diagonal_family() {
        let povm = diagonal_triple();
        assert_eq!(povm.dim(), 3);
        assert_eq!(povm.len(), 3);
    }

    #[test]
    fn rejects_incomplete_family() {
        let err = DiscretePOVM::new(
            vec![1.0, 2.0],
            vec![
                HermitianMatrix::from_diagonal(&[0.5, 0.5]),
                HermitianMatrix::from_diagonal(&[0.4, 0.5]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::CompletenessViolation { .. }));
    }

    #[test]
    fn rejects_negative_effect() {
        let err = DiscretePOVM::new(
            vec![1.0, 2.0],
            vec![
                HermitianMatrix::from_diagonal(&[1.2, 0.5]),
                HermitianMatrix::from_diagonal(&[-0.2, 0.5]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::ElementNotPositive { index: 1, .. }));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = DiscretePOVM::new(
            vec![1.0, 1.0],
            vec![
                HermitianMatrix::from_diagonal(&[0.5, 0.5]),
                HermitianMatrix::from_diagonal(&[0.5, 0.5]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel { .. }));
    }

    #[test]
    fn commutativity_scan_flags_noncommuting_pair() {
        // Three effects on C^2; the first two do not commute.
        let mut x: CMatrix = Array2::zeros((2, 2));
        x[(0, 1)] = c(1.0, 0.0);
        x[(1, 0)] = c(1.0, 0.0);
        let sx = HermitianMatrix::new(x).unwrap();
        let sz = HermitianMatrix::from_diagonal(&[1.0, -1.0]);
        let id = HermitianMatrix::identity(2);
        let f1 = &id.scaled(0.2) + &sx.scaled(0.2);
        let f2 = &id.scaled(0.2) + &sz.scaled(0.2);
        let f3 = &(&id.scaled(0.6) - &sx.scaled(0.2)) - &sz.scaled(0.2);
        let povm = DiscretePOVM::new(vec![1.0, 2.0, 3.0], vec![f1, f2, f3]).unwrap();
        let report = povm.is_commutative(TOL_GROUP);
        assert!(!report.commutative);
        assert!(report.worst_norm > 0.1);
    }

    #[test]
    fn commutativity_scan_passes_diagonal_family() {
        let report = diagonal_triple().is_commutative(TOL_GROUP);
        assert!(report.commutative);
        assert!(report.worst_norm < 1e-15);
    }

    #[test]
    fn probabilities_of_basis_state() {
        let povm = DiscretePOVM::new(
            vec![0.5, -0.5],
            vec![
                HermitianMatrix::from_diagonal(&[0.9, 0.2]),
                HermitianMatrix::from_diagonal(&[0.1, 0.8]),
            ],
        )
        .unwrap();
        let rho = DensityMatrix::pure_basis_state(2, 0).unwrap();
        let p = povm.probabilities(&rho).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-15);
        assert!((p[1] - 0.1).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn relabel_preserves_effects_and_rejects_collisions() {
        let povm = diagonal_triple();
        let shifted = povm.relabel_outcomes(|k| k + 5.0).unwrap();
        assert_eq!(shifted.outcomes(), &[6.0, 7.0, 8.0]);
        for (a, b) in povm.elements().iter().zip(shifted.elements()) {
            assert_eq!(a.as_array(), b.as_array());
        }
        assert!(matches!(
            povm.relabel_outcomes(|_| 1.0),
            Err(Error::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn pv_measure_is_a_valid_povm_but_not_conversely() {
        let pv = PVMeasure::new(
            vec![-1.0, 0.0, 1.0],
            vec![
                HermitianMatrix::from_diagonal(&[1.0, 0.0, 0.0]),
                HermitianMatrix::from_diagonal(&[0.0, 1.0, 0.0]),
                HermitianMatrix::from_diagonal(&[0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        assert!(pv.to_povm().is_ok());
        // A smeared effect family is a fine POVM but not a projection
        // family.
        let povm = diagonal_triple();
        let err = PVMeasure::new(povm.outcomes().to_vec(), povm.elements().to_vec()).unwrap_err();
        assert!(matches!(err, Error::NotIdempotent { .. }));
    }

    #[test]
    fn pv_measure_rejects_overlapping_projections() {
        let p = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let q = HermitianMatrix::from_diagonal(&[1.0, 1.0]);
        // Not orthogonal (and not complete either); orthogonality is
        // checked first.
        let err = PVMeasure::new(vec![0.0, 1.0], vec![p, q]).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { .. }));
    }

    #[test]
    fn spectral_measure_groups_degenerate_eigenvalues() {
        let h = HermitianMatrix::from_diagonal(&[1.8, 1.8, 2.25]);
        let pv = PVMeasure::from_hermitian(&h, TOL_GROUP).unwrap();
        assert_eq!(pv.len(), 2);
        assert_eq!(pv.labels(), &[1.8, 2.25]);
        assert!((pv.projection(0).trace() - 2.0).abs() < 1e-12);
        assert!((pv.projection(1).trace() - 1.0).abs() < 1e-12);
        let op = pv.operator();
        assert!((op.entry(0, 0).re - 1.8).abs() < 1e-14);
        assert!((op.entry(2, 2).re - 2.25).abs() < 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_diagonal(&[0.5, 0.5]).is_ok());
        assert!(matches!(
            DensityMatrix::from_diagonal(&[0.7, 0.7]),
            Err(Error::TraceNotOne { .. })
        ));
        assert!(matches!(
            DensityMatrix::from_diagonal(&[1.5, -0.5]),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn label_function_basics() {
        let f = LabelFunction::new(vec![(1.0, 10.0), (2.0, 20.0)]).unwrap();
        assert_eq!(f.get(1.0), Some(10.0));
        assert_eq!(f.get(3.0), None);
        assert!(matches!(
            f.value(3.0),
            Err(Error::UndefinedLabel { label }) if label == 3.0
        ));
        assert!(f.is_injective());
        assert_eq!(f.min_value_gap(), 10.0);
        assert_eq!(f.get_close(1.0 + 1e-12, 1e-9), Some(10.0));
        let g = LabelFunction::from_fn(&[1.0, 2.0], |_| 7.0).unwrap();
        assert!(!g.is_injective());
        assert!(matches!(
            LabelFunction::new(vec![(1.0, 0.0), (1.0, 1.0)]),
            Err(Error::DuplicateLabel { .. })
        ));
    }
}
