//! Injective post-processing functions and operator-equivalence
//! certificates.
//!
//! A commutative POVM is a randomization of its sharp reconstruction.
//! To certify the converse relation — that the reconstruction is, up to
//! an injective relabeling, the compression of a sharp operator on the
//! extended space — one needs an outcome function `f` whose induced
//! values `G_j = sum_k table[j][k] * f_k` are pairwise distinct across
//! the table rows. This module constructs such an `f` from a seed
//! vector by replacing single components with small nonnegative
//! integers until every collision is resolved, keeping a replayable log
//! of the replacements, and then checks the operator identity
//! `V^dagger (sum_k f_k E_k) V = sum_j G_j E_j` on the original space.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::naimark::{dilate, project_function};
use crate::povm::{min_pairwise_gap, DiscretePOVM, LabelFunction, PVMeasure};
use crate::sharp::sharp_reconstruction;
use crate::tol::TOL_OPERATOR;

/// One collision-resolving replacement in the construction of a
/// distinct-image vector.
#[derive(Debug, Clone)]
pub struct PerturbationStep {
    /// Index of the replaced component.
    pub column: usize,
    /// Component value before the replacement.
    pub previous: f64,
    /// Component value after the replacement.
    pub replacement: f64,
    /// Values the replacement had to stay clear of: every current
    /// component, plus — for each active row pair separated in this
    /// column — the value that would equalize that pair's images.
    pub exclusions: Vec<f64>,
}

/// Function vector whose induced images over a set of table rows are
/// pairwise separated by more than the requested margin.
#[derive(Debug, Clone)]
pub struct DistinctImage {
    k_vector: Vec<f64>,
    image: Vec<f64>,
    log: Vec<PerturbationStep>,
}

impl DistinctImage {
    /// The function vector, one value per table column.
    pub fn k_vector(&self) -> &[f64] {
        &self.k_vector
    }

    /// Induced value of each table row, `image_j = row_j . k`.
    pub fn image(&self) -> &[f64] {
        &self.image
    }

    /// Replacements performed, in order.
    pub fn log(&self) -> &[PerturbationStep] {
        &self.log
    }

    /// Smallest pairwise distance among the induced values.
    pub fn min_image_gap(&self) -> f64 {
        min_pairwise_gap(&self.image)
    }
}

/// Applies a function vector to each table row: `G_j = row_j . f`.
pub fn g_of_f(rows: &Array2<f64>, f: &[f64]) -> Result<Vec<f64>> {
    if rows.ncols() != f.len() {
        return Err(Error::DimensionMismatch {
            context: "function vector length",
            expected: rows.ncols(),
            got: f.len(),
        });
    }
    Ok(rows
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum())
        .collect())
}

fn images(rows: &Array2<f64>, k: &[f64], active: usize) -> Vec<f64> {
    (0..active)
        .map(|j| (0..k.len()).map(|c| rows[(j, c)] * k[c]).sum())
        .collect()
}

fn colliding_pairs(image: &[f64], sep_min: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..image.len() {
        for b in (a + 1)..image.len() {
            if (image[a] - image[b]).abs() <= sep_min {
                out.push((a, b));
            }
        }
    }
    out
}

/// Builds a distinct-image vector starting from the counting seed
/// `(0, 1, …, m-1)`.
pub fn distinct_image_vector(
    rows: &Array2<f64>,
    tol_group: f64,
    sep_min: f64,
) -> Result<DistinctImage> {
    let seed: Vec<f64> = (0..rows.ncols()).map(|k| k as f64).collect();
    distinct_image_vector_seeded(rows, &seed, tol_group, sep_min)
}

/// Builds a distinct-image vector from a caller-supplied seed.
///
/// Rows are admitted one at a time; whenever the newest row's image
/// collides with an earlier one (distance at most `sep_min`), the first
/// colliding pair in index order is separated by replacing a single
/// component of the vector: the column where the two rows differ most,
/// set to the smallest nonnegative integer staying more than `sep_min`
/// away from every value in the step's exclusion set. Each replacement
/// must strictly reduce the number of colliding pairs; the log of steps
/// can be replayed with [`replay_perturbations`].
///
/// Fails with `InvalidSeed` when two seed components are closer than
/// `sep_min`, and with `DuplicateRows` when two rows agree within
/// `tol_group * max(1, scale)` in every column — no vector can separate
/// those robustly.
pub fn distinct_image_vector_seeded(
    rows: &Array2<f64>,
    seed: &[f64],
    tol_group: f64,
    sep_min: f64,
) -> Result<DistinctImage> {
    let n = rows.nrows();
    let m = rows.ncols();
    if n == 0 || m == 0 {
        return Err(Error::EmptyFamily);
    }
    if seed.len() != m {
        return Err(Error::DimensionMismatch {
            context: "seed length",
            expected: m,
            got: seed.len(),
        });
    }
    for &v in seed {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                context: "seed component",
            });
        }
    }
    for v in rows.iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                context: "table entry",
            });
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if (seed[i] - seed[j]).abs() <= sep_min {
                return Err(Error::InvalidSeed {
                    a: seed[i],
                    b: seed[j],
                });
            }
        }
    }
    let scale = rows.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let tol_row = tol_group * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (0..m)
                .map(|c| (rows[(i, c)] - rows[(j, c)]).abs())
                .fold(0.0f64, f64::max);
            if gap <= tol_row {
                return Err(Error::DuplicateRows { i, j });
            }
        }
    }

    let mut k: Vec<f64> = seed.to_vec();
    let mut log: Vec<PerturbationStep> = Vec::new();
    for t in 1..n {
        let active = t + 1;
        loop {
            let image = images(rows, &k, active);
            let colliding = colliding_pairs(&image, sep_min);
            if colliding.is_empty() {
                break;
            }
            let before = colliding.len();
            let (p, q) = colliding[0];

            // Column in which the colliding rows differ most; ties go to
            // the smaller index.
            let mut column = 0usize;
            let mut best = -1.0f64;
            for c in 0..m {
                let d = (rows[(p, c)] - rows[(q, c)]).abs();
                if d > best {
                    best = d;
                    column = c;
                }
            }

            // Replacing component `column` by v moves the image gap of
            // an active pair (a, b) to
            //   (image_b - image_a) + (v - k_column) * (row_b - row_a)[column],
            // which vanishes exactly at one forbidden v per pair with a
            // column gap; staying clear of those values (and of the
            // current components) resolves the chosen pair without
            // equalizing any separated pair.
            let mut exclusions: Vec<f64> = k.clone();
            for a in 0..active {
                for b in (a + 1)..active {
                    let gap_c = rows[(b, column)] - rows[(a, column)];
                    if gap_c.abs() > tol_row {
                        exclusions.push(k[column] - (image[b] - image[a]) / gap_c);
                    }
                }
            }
            let budget = (exclusions.len() + 1) * (1 + (2.0 * sep_min).ceil() as usize);
            let mut replacement = None;
            for v in 0..=budget {
                let vf = v as f64;
                if exclusions.iter().all(|&e| (vf - e).abs() > sep_min) {
                    replacement = Some(vf);
                    break;
                }
            }
            let Some(vf) = replacement else {
                return Err(Error::NumericalFailure {
                    op: "distinct_image_vector",
                    detail: format!("no admissible integer replacement among 0..={budget}"),
                });
            };
            log.push(PerturbationStep {
                column,
                previous: k[column],
                replacement: vf,
                exclusions,
            });
            k[column] = vf;

            let after = colliding_pairs(&images(rows, &k, active), sep_min).len();
            if after >= before {
                return Err(Error::NumericalFailure {
                    op: "distinct_image_vector",
                    detail: format!(
                        "collision count failed to decrease ({before} -> {after}) \
                         after replacing component {column}"
                    ),
                });
            }
        }
    }
    let image = images(rows, &k, n);
    Ok(DistinctImage {
        k_vector: k,
        image,
        log,
    })
}

/// Reapplies a recorded perturbation log to a seed vector and returns
/// the resulting function vector.
///
/// Fails when a step's recorded prior value does not match the vector
/// being rebuilt — the log then belongs to a different seed.
pub fn replay_perturbations(seed: &[f64], log: &[PerturbationStep]) -> Result<Vec<f64>> {
    let mut k = seed.to_vec();
    for (idx, step) in log.iter().enumerate() {
        if step.column >= k.len() {
            return Err(Error::DimensionMismatch {
                context: "perturbation column index",
                expected: k.len(),
                got: step.column,
            });
        }
        if k[step.column] != step.previous {
            return Err(Error::NumericalFailure {
                op: "replay_perturbations",
                detail: format!(
                    "step {idx} expected component {} = {}, found {}",
                    step.column, step.previous, k[step.column]
                ),
            });
        }
        k[step.column] = step.replacement;
    }
    Ok(k)
}

/// Certificate that a commutative POVM and its sharp reconstruction
/// determine one another: the POVM is a randomization of the
/// reconstruction, and conversely the operator `sum_j G_j E_j` — an
/// injective relabeling of the reconstruction — is the compression of
/// the sharp operator `sum_k f_k E_k` from the extended space.
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    /// Outcome function applied on the extended space.
    pub f: LabelFunction,
    /// Induced value `G_j = sum_k table[j][k] * f(outcome_k)` for each
    /// reconstruction label, in label order.
    pub g_values: Vec<f64>,
    /// `||V^dagger (sum_k f_k E_k) V - sum_j G_j E_j||_F`.
    pub operator_residual: f64,
    /// Smallest pairwise distance among the induced values.
    pub image_gap: f64,
    /// Replacements performed to reach the final function vector.
    pub log: Vec<PerturbationStep>,
    /// Starting vector: the outcome labels when pairwise separated
    /// beyond `sep_min`, otherwise the counting seed `(0, …, m-1)`.
    pub seed: Vec<f64>,
}

/// Builds an equivalence certificate for a commutative POVM.
///
/// The operator identity is accepted when its residual is within
/// `1e-9 * dim`; a larger residual is reported as a numerical failure
/// rather than silently returned.
pub fn certify_equivalence(
    povm: &DiscretePOVM,
    tol_group: f64,
    sep_min: f64,
) -> Result<EquivalenceCertificate> {
    let recon = sharp_reconstruction(povm, tol_group)?;
    let seed: Vec<f64> = if min_pairwise_gap(povm.outcomes()) > sep_min {
        povm.outcomes().to_vec()
    } else {
        (0..povm.len()).map(|x| x as f64).collect()
    };
    let distinct = distinct_image_vector_seeded(recon.table.rows(), &seed, tol_group, sep_min)?;
    let f = LabelFunction::new(
        povm.outcomes()
            .iter()
            .copied()
            .zip(distinct.k_vector().iter().copied())
            .collect(),
    )?;

    let dilation = dilate(povm)?;
    let compressed = project_function(&dilation, &f)?;
    let mut relabeled = HermitianMatrix::zeros(povm.dim());
    for (j, proj) in recon.measure.projections().iter().enumerate() {
        relabeled = &relabeled + &proj.scaled(distinct.image()[j]);
    }
    let operator_residual = (&compressed - &relabeled).fro_norm();
    let bound = TOL_OPERATOR * povm.dim() as f64;
    if operator_residual > bound {
        return Err(Error::NumericalFailure {
            op: "certify_equivalence",
            detail: format!("operator residual {operator_residual:.3e} exceeds {bound:.3e}"),
        });
    }
    Ok(EquivalenceCertificate {
        f,
        g_values: distinct.image().to_vec(),
        operator_residual,
        image_gap: distinct.min_image_gap(),
        log: distinct.log().to_vec(),
        seed,
    })
}

/// Pairs off two sharp observables whose projection families coincide
/// within `tol` in Frobenius norm.
///
/// Returns the matched `(label_a, label_b)` pairs, or `None` when the
/// families differ in size, dimension, or content. Equivalent
/// observables are functions of one another regardless of how their
/// values are named.
pub fn operators_equivalent(a: &PVMeasure, b: &PVMeasure, tol: f64) -> Option<Vec<(f64, f64)>> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut pairs = Vec::with_capacity(a.len());
    for (la, pa) in a.labels().iter().zip(a.projections()) {
        let mut matched = None;
        for (jb, pb) in b.projections().iter().enumerate() {
            if !used[jb] && (pa - pb).fro_norm() <= tol {
                matched = Some(jb);
                break;
            }
        }
        let jb = matched?;
        used[jb] = true;
        pairs.push((*la, b.labels()[jb]));
    }
    Some(pairs)
}
