//! Dense complex linear algebra built on LAPACK eigendecompositions.
//!
//! Everything else in the crate reduces to the primitives collected here:
//! Hermitian eigendecomposition, simultaneous diagonalization of a
//! commuting family, positive-semidefinite square roots, partial traces
//! over a tensor factor, and Frobenius-norm comparisons.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix = Array2<C64>;

/// Complex identity matrix of size `n`.
pub fn identity(n: usize) -> CMatrix {
    Array2::eye(n)
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// Frobenius norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise absolute difference between two matrices of equal
/// shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Trace of the product `a * b`, computed without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Kronecker (tensor) product, with the first factor varying slowly.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    ndarray::linalg::kron(a, b)
}

/// Hermitian matrix: exact symmetry `M = M^dagger` is enforced at
/// construction by averaging the input with its conjugate transpose, so
/// every instance can be fed to the Hermitian eigensolver directly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Wraps a square complex matrix, symmetrizing it as `(M + M^dagger)/2`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let (rows, cols) = mat.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        Ok(Self::from_square(mat))
    }

    /// Symmetrizes a matrix that is already known to be square.
    pub(crate) fn from_square(mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        let sym = (&mat + &dagger(&mat)).mapv(|z| z * 0.5);
        Self { mat: sym }
    }

    /// Hermitian matrix from a real square matrix.
    pub fn from_real(mat: Array2<f64>) -> Result<Self> {
        Self::new(mat.mapv(|x| C64::new(x, 0.0)))
    }

    /// Diagonal matrix with the given real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut mat = Array2::zeros((n, n));
        for (i, &d) in diag.iter().enumerate() {
            mat[(i, i)] = C64::new(d, 0.0);
        }
        Self { mat }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        Self { mat: identity(n) }
    }

    /// Zero matrix of size `n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            mat: Array2::zeros((n, n)),
        }
    }

    /// Rank-one projection onto a (unit) column vector.
    pub fn outer(col: &Array1<C64>) -> Self {
        let n = col.len();
        let mut mat = Array2::zeros((n, n));
        for r in 0..n {
            for s in 0..n {
                mat[(r, s)] = col[r] * col[s].conj();
            }
        }
        Self { mat }
    }

    /// Side length.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Borrow the underlying storage.
    pub fn as_array(&self) -> &CMatrix {
        &self.mat
    }

    /// Take the underlying storage.
    pub fn into_array(self) -> CMatrix {
        self.mat
    }

    /// Single entry.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// Trace (real by Hermiticity).
    pub fn trace(&self) -> f64 {
        self.mat.diag().iter().map(|z| z.re).sum()
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        fro_norm(&self.mat)
    }

    /// Scalar multiple by a real factor.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mat: self.mat.mapv(|z| z * s),
        }
    }

    /// Matrix product; not Hermitian in general, so the raw storage type
    /// is returned.
    pub fn matmul(&self, other: &Self) -> CMatrix {
        self.mat.dot(&other.mat)
    }

    /// Frobenius norm of the commutator with another matrix.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = self.mat.dot(&other.mat);
        let ba = other.mat.dot(&self.mat);
        fro_norm(&(&ab - &ba))
    }
}

impl std::ops::Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose `j`-th column is the eigenvector belonging to
    /// `eigenvalues[j]`.
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, &x| acc.max(x.abs()))
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenSystem> {
    let (vals, raw) =
        h.as_array()
            .eigh(UPLO::Lower)
            .map_err(|e| Error::NumericalFailure {
                op: "eig_hermitian",
                detail: e.to_string(),
            })?;
    // The column-major solver effectively diagonalizes the entrywise
    // conjugate of the input, so its eigenvector columns belong to
    // conj(H); conjugating them gives the eigenvectors of H. The
    // residual check below guards this convention.
    let vecs = raw.mapv(|z| z.conj());
    let lam = Array2::from_diag(&vals.mapv(|x| C64::new(x, 0.0)));
    let residual = fro_norm(&(h.as_array().dot(&vecs) - vecs.dot(&lam)));
    let scale = h.fro_norm().max(1.0);
    if residual > 1e-8 * scale * h.dim().max(1) as f64 {
        return Err(Error::NumericalFailure {
            op: "eig_hermitian",
            detail: format!("eigendecomposition residual {residual:.3e} is too large"),
        });
    }
    Ok(EigenSystem {
        eigenvalues: vals.to_vec(),
        eigenvectors: vecs,
    })
}

/// Common eigenbasis of a commuting Hermitian family together with the
/// eigenvalue each member takes on each basis vector.
#[derive(Debug, Clone)]
pub struct SimultaneousDiagonalization {
    /// Unitary matrix whose columns form the common eigenbasis, ordered
    /// and phased canonically: columns are sorted by the row index of
    /// their largest-magnitude component (stably, so refinement order
    /// breaks ties) and scaled so that component is real and positive.
    pub basis: CMatrix,
    /// `n x m` table: row `j` holds the eigenvalue of each of the `m`
    /// family members on basis column `j`.
    pub eigenvalue_rows: Array2<f64>,
    /// Largest off-diagonal magnitude left in any conjugated member; a
    /// diagnostic for how exactly the family commutes.
    pub max_off_diagonal: f64,
}

/// Simultaneously diagonalizes a family of pairwise-commuting Hermitian
/// matrices by block refinement: each member is diagonalized inside the
/// joint eigenspaces of the members before it.
///
/// Two eigenvalues `a`, `b` of member `i` are grouped into one block when
/// `|a - b| <= tol_group * max(1, spectral radius of member i)`. The
/// family must commute pairwise: `||[F_i, F_j]||_F` may not exceed
/// `tol_group * max(1, ||F_i||_F * ||F_j||_F)`.
pub fn simultaneous_diagonalize(
    family: &[HermitianMatrix],
    tol_group: f64,
) -> Result<SimultaneousDiagonalization> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let n = family[0].dim();
    for f in family {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "operator family member size",
                expected: n,
                got: f.dim(),
            });
        }
    }
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let norm = family[i].commutator_norm(&family[j]);
            let bound = tol_group * (family[i].fro_norm() * family[j].fro_norm()).max(1.0);
            if norm > bound {
                return Err(Error::CommutativityViolation { i, j, norm });
            }
        }
    }

    let m = family.len();
    let mut basis = identity(n);
    // Half-open column ranges of the current joint-eigenspace blocks.
    let mut blocks: Vec<(usize, usize)> = vec![(0, n)];
    for member in family {
        // First pass: diagonalize the member inside every block, and
        // collect its full spectrum to fix the grouping scale.
        let mut decomps = Vec::with_capacity(blocks.len());
        let mut radius = 0.0f64;
        for &(start, end) in &blocks {
            let sub = basis.slice(s![.., start..end]).to_owned();
            let restricted = dagger(&sub).dot(member.as_array()).dot(&sub);
            let eig = eig_hermitian(&HermitianMatrix::from_square(restricted))?;
            radius = radius.max(eig.spectral_radius());
            decomps.push(eig);
        }
        let tol = tol_group * radius.max(1.0);
        // Second pass: rotate each block into the member's eigenbasis and
        // split it wherever consecutive eigenvalues separate.
        let mut refined = Vec::new();
        for (&(start, end), eig) in blocks.iter().zip(&decomps) {
            let sub = basis.slice(s![.., start..end]).to_owned();
            let rotated = sub.dot(&eig.eigenvectors);
            basis.slice_mut(s![.., start..end]).assign(&rotated);
            let w = &eig.eigenvalues;
            let mut lo = 0usize;
            for t in 1..w.len() {
                if w[t] - w[t - 1] > tol {
                    refined.push((start + lo, start + t));
                    lo = t;
                }
            }
            refined.push((start + lo, end));
        }
        blocks = refined;
    }

    // Canonical presentation: order columns by the row index of their
    // largest-magnitude component and make that component real positive.
    let anchors: Vec<usize> = (0..n)
        .map(|c| {
            let col = basis.column(c);
            let mut best = 0usize;
            let mut best_mag = -1.0f64;
            for r in 0..n {
                let mag = col[r].norm();
                if mag > best_mag {
                    best_mag = mag;
                    best = r;
                }
            }
            best
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&c| anchors[c]);
    let mut canon: CMatrix = Array2::zeros((n, n));
    for (new_c, &c) in order.iter().enumerate() {
        let col = basis.column(c);
        let pivot = col[anchors[c]];
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for r in 0..n {
            canon[(r, new_c)] = col[r] * phase;
        }
    }

    let mut eigenvalue_rows = Array2::zeros((n, m));
    let mut max_off_diagonal = 0.0f64;
    for (i, member) in family.iter().enumerate() {
        let conj = dagger(&canon).dot(member.as_array()).dot(&canon);
        for j in 0..n {
            eigenvalue_rows[(j, i)] = conj[(j, j)].re;
            for l in 0..n {
                if l != j {
                    max_off_diagonal = max_off_diagonal.max(conj[(j, l)].norm());
                }
            }
        }
    }

    Ok(SimultaneousDiagonalization {
        basis: canon,
        eigenvalue_rows,
        max_off_diagonal,
    })
}

/// Positive-semidefinite square root.
///
/// Eigenvalues in `[-tol_psd, 0)` are clamped to zero; an eigenvalue
/// below `-tol_psd` makes the input non-PSD and is an error.
pub fn psd_sqrt(h: &HermitianMatrix, tol_psd: f64) -> Result<HermitianMatrix> {
    let eig = eig_hermitian(h)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -tol_psd {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: lowest });
        }
    }
    let n = h.dim();
    let roots: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&x| if x < 0.0 { 0.0 } else { x.sqrt() })
        .collect();
    let mut scaled = eig.eigenvectors.clone();
    for c in 0..n {
        for r in 0..n {
            scaled[(r, c)] *= roots[c];
        }
    }
    let root = scaled.dot(&dagger(&eig.eigenvectors));
    Ok(HermitianMatrix::from_square(root))
}

/// Partial trace over the second tensor factor of an operator on a space
/// of dimension `dim_first * dim_second`, with the first factor varying
/// slowly (composite index `i * dim_second + c`).
pub fn partial_trace_second(
    x: &HermitianMatrix,
    dim_first: usize,
    dim_second: usize,
) -> Result<HermitianMatrix> {
    if x.dim() != dim_first * dim_second {
        return Err(Error::DimensionMismatch {
            context: "partial trace input size",
            expected: dim_first * dim_second,
            got: x.dim(),
        });
    }
    let mut out: CMatrix = Array2::zeros((dim_first, dim_first));
    let arr = x.as_array();
    for a in 0..dim_first {
        for b in 0..dim_first {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..dim_second {
                acc += arr[(a * dim_second + c, b * dim_second + c)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(HermitianMatrix::from_square(out))
}

/// Groups a sorted slice of real values into runs of consecutive entries
/// separated by at most `tol`; returns the half-open index ranges.
pub(crate) fn group_sorted(values: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    if values.is_empty() {
        return groups;
    }
    let mut lo = 0usize;
    for t in 1..values.len() {
        if values[t] - values[t - 1] > tol {
            groups.push((lo, t));
            lo = t;
        }
    }
    groups.push((lo, values.len()));
    groups
}

/// Default grouping tolerance for an operator of the given spectral
/// radius.
pub(crate) fn group_tol(tol_group: f64, radius: f64) -> f64 {
    tol_group * radius.max(1.0)
}
