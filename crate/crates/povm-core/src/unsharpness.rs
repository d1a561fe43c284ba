//! Deciders for the three ways a sharp observable can witness the
//! unsharpness of a commutative POVM, membership tests for the two
//! operator families attached to the sharp reconstruction, and
//! system–ancilla models that induce a POVM on the system alone.
//!
//! The three witness relations between a sharp observable `B` (with
//! spectral projections `Q_l`) and a POVM `F` (with effects `F_k`):
//!
//! * mixture: every effect is a convex combination of the `Q_l`
//!   (coefficients form a stochastic matrix, one row per eigenvalue
//!   of `B`);
//! * combination: the operator of `B` is a real linear combination of
//!   the effects;
//! * function: some non-constant real function `h` satisfies
//!   `h(B) = sum_k gamma_k F_k`. Constant `h` is always excluded —
//!   a constant would make the identity trivially satisfiable and
//!   witness nothing.

use std::collections::BTreeSet;

use ndarray::prelude::*;
use ndarray_linalg::{LeastSquaresSvd, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::injectivity::certify_equivalence;
use crate::linalg::{identity, kron, partial_trace_second, psd_sqrt, trace_product, CMatrix, HermitianMatrix};
use crate::povm::{min_pairwise_gap, DensityMatrix, DiscretePOVM, LabelFunction, PVMeasure};
use crate::sharp::{function_between, sharp_reconstruction};
use crate::tol::{TOL_OPERATOR, TOL_PSD};

/// Isometric real embedding of a Hermitian matrix: the `n` diagonal
/// entries followed by `sqrt(2) * (re, im)` of each strictly upper
/// entry in row-major order. Euclidean length equals the Frobenius
/// norm, so least-squares residuals in the embedded space match
/// operator-space residuals.
fn real_vec(h: &HermitianMatrix) -> Array1<f64> {
    let n = h.dim();
    let a = h.as_array();
    let mut v = Array1::<f64>::zeros(n * n);
    for i in 0..n {
        v[i] = a[(i, i)].re;
    }
    let mut pos = n;
    let w = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            v[pos] = w * a[(i, j)].re;
            v[pos + 1] = w * a[(i, j)].im;
            pos += 2;
        }
    }
    v
}

/// Inverse of [`real_vec`].
fn vec_to_hermitian(v: &ArrayView1<f64>, n: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros((n, n));
    for i in 0..n {
        m[(i, i)] = C64::new(v[i], 0.0);
    }
    let mut pos = n;
    let w = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let entry = C64::new(w * v[pos], w * v[pos + 1]);
            m[(i, j)] = entry;
            m[(j, i)] = entry.conj();
            pos += 2;
        }
    }
    HermitianMatrix::new(m).expect("reassembled matrix is Hermitian by construction")
}

/// `sum_k gamma_k family_k`. Panics if the lengths differ.
fn combination(family: &[HermitianMatrix], gamma: &[f64]) -> HermitianMatrix {
    assert_eq!(family.len(), gamma.len());
    let mut total = HermitianMatrix::zeros(family[0].dim());
    for (f, &g) in family.iter().zip(gamma) {
        total = &total + &f.scaled(g);
    }
    total
}

/// Minimum-norm least-squares coefficients expressing `target` as a
/// real combination of `family`, together with the Frobenius residual
/// `|target - sum_k gamma_k family_k|` recomputed in operator space.
///
/// The residual is reported as-is; callers decide feasibility.
pub fn least_squares_combination(
    family: &[HermitianMatrix],
    target: &HermitianMatrix,
) -> Result<(Vec<f64>, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let n = target.dim();
    for f in family {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "combination family member dimension",
                expected: n,
                got: f.dim(),
            });
        }
    }
    let mut design = Array2::<f64>::zeros((n * n, family.len()));
    for (k, f) in family.iter().enumerate() {
        design.column_mut(k).assign(&real_vec(f));
    }
    let rhs = real_vec(target);
    let fit = design.least_squares(&rhs).map_err(|e| Error::NumericalFailure {
        op: "least-squares solve",
        detail: e.to_string(),
    })?;
    let gamma: Vec<f64> = fit.solution.to_vec();
    let residual = (&combination(family, &gamma) - target).fro_norm();
    Ok((gamma, residual))
}

/// A verified certificate that a sharp observable witnesses the
/// unsharpness of a POVM, in one of the three senses.
#[derive(Debug, Clone)]
pub enum UnsharpWitness {
    /// Every effect is a mixture of the spectral projections of `B`:
    /// `F_k = sum_l coefficients[(l, k)] Q_l`, one row per eigenvalue
    /// of `B` in its given order, one column per outcome.
    Def11 {
        /// Stochastic coefficient matrix: entries in `[0, 1]` and each
        /// row sums to one.
        coefficients: Array2<f64>,
        /// Largest Frobenius deviation over the per-effect identities.
        residual: f64,
    },
    /// The operator of `B` is a real combination of the effects:
    /// `B = sum_k gamma_k F_k`.
    Def12 {
        /// Combination coefficients, one per outcome.
        gamma: Vec<f64>,
        /// Frobenius deviation of the operator identity.
        residual: f64,
    },
    /// A non-constant function of `B` is a real combination of the
    /// effects: `h(B) = sum_k gamma_k F_k`.
    Def13 {
        /// The non-constant function, defined on the eigenvalues of `B`.
        h: LabelFunction,
        /// Combination coefficients, one per outcome.
        gamma: Vec<f64>,
        /// Frobenius deviation of the operator identity.
        residual: f64,
        /// Which construction produced the witness.
        branch: Def13Branch,
    },
}

/// How a function-type witness was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Def13Branch {
    /// `B` refines the POVM, so `h` is the induced sharp-value map
    /// composed with the carrying function.
    ViaRefinement,
    /// The operator of `B` is itself a combination of the effects, so
    /// `h` is the identity on the eigenvalues of `B`.
    ViaLinearCombination,
    /// A shared direction of the two operator spans, orthogonal to the
    /// identity, defines `h` through its compression onto the
    /// eigenspaces of `B`.
    ViaSpanIntersection,
}

/// Outcome of the function-witness decision.
#[derive(Debug, Clone)]
pub struct Def13Report {
    /// The witness, when one exists.
    pub witness: Option<UnsharpWitness>,
    /// Always true: constant functions never count as witnesses, and
    /// every branch enforces that.
    pub constant_h_excluded: bool,
}

/// Decides whether every effect of the POVM is a mixture of the
/// spectral projections of `b`.
///
/// The coefficient matrix has one row per eigenvalue of `b` (in the
/// order the measure lists them) and one column per outcome; feasible
/// exactly when the reconstruction residual, the entry bounds, and the
/// row sums all hold. Returns `Ok(None)` on a well-posed "no".
pub fn check_def11(b: &PVMeasure, povm: &DiscretePOVM) -> Result<Option<UnsharpWitness>> {
    if b.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            context: "observable dimension",
            expected: povm.dim(),
            got: b.dim(),
        });
    }
    let n = povm.dim();
    let gate = TOL_OPERATOR * n as f64;

    // Compressions c_{lk} = tr(Q_l F_k) / tr(Q_l) are the only possible
    // coefficients: multiplying the candidate identity by Q_l and
    // tracing forces them.
    let mut coefficients = Array2::<f64>::zeros((b.len(), povm.len()));
    for (l, q) in b.projections().iter().enumerate() {
        let rank = q.trace();
        for (k, f) in povm.elements().iter().enumerate() {
            coefficients[(l, k)] = trace_product(q.as_array(), f.as_array()).re / rank;
        }
    }

    let mut residual: f64 = 0.0;
    for (k, f) in povm.elements().iter().enumerate() {
        let mut mix = HermitianMatrix::zeros(n);
        for (l, q) in b.projections().iter().enumerate() {
            mix = &mix + &q.scaled(coefficients[(l, k)]);
        }
        residual = residual.max((&mix - f).fro_norm());
    }
    if residual > gate {
        return Ok(None);
    }
    for l in 0..b.len() {
        let mut row_sum = 0.0;
        for k in 0..povm.len() {
            let c = coefficients[(l, k)];
            if !(-TOL_PSD..=1.0 + TOL_PSD).contains(&c) {
                return Ok(None);
            }
            row_sum += c;
        }
        if (row_sum - 1.0).abs() > TOL_OPERATOR {
            return Ok(None);
        }
    }
    Ok(Some(UnsharpWitness::Def11 {
        coefficients,
        residual,
    }))
}

/// Decides whether the operator of `b` is a real linear combination of
/// the effects. The POVM need not be commutative here. Returns
/// `Ok(None)` on a well-posed "no".
pub fn check_def12(b: &PVMeasure, povm: &DiscretePOVM) -> Result<Option<UnsharpWitness>> {
    if b.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            context: "observable dimension",
            expected: povm.dim(),
            got: b.dim(),
        });
    }
    let target = b.operator();
    let (gamma, residual) = least_squares_combination(povm.elements(), &target)?;
    if residual <= TOL_OPERATOR * povm.dim() as f64 {
        Ok(Some(UnsharpWitness::Def12 { gamma, residual }))
    } else {
        Ok(None)
    }
}

/// Decides whether some non-constant function of `b` is a real
/// combination of the effects, trying the three constructions in
/// order: refinement, direct combination, span intersection.
pub fn check_def13(
    b: &PVMeasure,
    povm: &DiscretePOVM,
    tol_group: f64,
    sep_min: f64,
) -> Result<Def13Report> {
    let n = povm.dim();
    let gate = TOL_OPERATOR * n as f64;
    let none = Def13Report {
        witness: None,
        constant_h_excluded: true,
    };

    // Refinement: when the effects are mixtures of the eigenspaces of
    // `b`, carry `b` onto the sharp reconstruction and read the values
    // of the equivalence certificate back through that map.
    if check_def11(b, povm)?.is_some() {
        match function_between(b, povm, tol_group) {
            Ok(carry) => {
                let cert = certify_equivalence(povm, tol_group, sep_min)?;
                let mut pairs = Vec::with_capacity(b.len());
                let mut used = BTreeSet::new();
                for &label in b.labels() {
                    let idx = carry.map.value(label)?.round() as usize - 1;
                    used.insert(idx);
                    pairs.push((label, cert.g_values[idx]));
                }
                if used.len() >= 2 {
                    let h_values: Vec<f64> = pairs.iter().map(|&(_, v)| v).collect();
                    let h = LabelFunction::new(pairs)?;
                    let gamma: Vec<f64> = povm
                        .outcomes()
                        .iter()
                        .map(|&k| cert.f.value(k))
                        .collect::<Result<_>>()?;
                    let lhs = combination(b.projections(), &h_values);
                    let rhs = combination(povm.elements(), &gamma);
                    let residual = (&lhs - &rhs).fro_norm();
                    if residual > gate {
                        return Err(Error::NumericalFailure {
                            op: "function witness via refinement",
                            detail: format!(
                                "operator identity residual {residual:.3e} exceeds {gate:.3e}"
                            ),
                        });
                    }
                    return Ok(Def13Report {
                        witness: Some(UnsharpWitness::Def13 {
                            h,
                            gamma,
                            residual,
                            branch: Def13Branch::ViaRefinement,
                        }),
                        constant_h_excluded: true,
                    });
                }
                // All effects are scalar on a single merged eigenspace
                // family; the induced function is constant, so this
                // construction yields nothing.
            }
            Err(Error::NotARefinement { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    // Direct combination: the identity function works whenever `b` has
    // at least two eigenvalues and its operator lies in the effect
    // span.
    if b.len() >= 2 {
        if let Some(UnsharpWitness::Def12 { gamma, residual }) = check_def12(b, povm)? {
            let h = LabelFunction::identity(b.labels())?;
            return Ok(Def13Report {
                witness: Some(UnsharpWitness::Def13 {
                    h,
                    gamma,
                    residual,
                    branch: Def13Branch::ViaLinearCombination,
                }),
                constant_h_excluded: true,
            });
        }
    }

    // Span intersection: any non-identity direction shared by
    // span{Q_l} and span{F_k} is simultaneously a function of `b` and
    // a combination of the effects. Principal angles locate shared
    // directions; the identity direction is projected away because it
    // only ever produces constant functions.
    let nn = n * n;
    let mut qmat = Array2::<f64>::zeros((nn, b.len()));
    for (l, q) in b.projections().iter().enumerate() {
        let col = real_vec(q) / q.trace().sqrt();
        qmat.column_mut(l).assign(&col);
    }
    let mut fmat = Array2::<f64>::zeros((nn, povm.len()));
    for (k, f) in povm.elements().iter().enumerate() {
        fmat.column_mut(k).assign(&real_vec(f));
    }
    let (fu, fs, _) = fmat.svd(true, false).map_err(|e| Error::NumericalFailure {
        op: "effect span factorization",
        detail: e.to_string(),
    })?;
    let fu = fu.expect("left singular vectors requested");
    let smax = fs.iter().fold(0.0f64, |m, &s| m.max(s));
    let cut = 1e-10 * smax.max(1.0);
    let rank_f = fs.iter().filter(|&&s| s > cut).count();
    if rank_f == 0 {
        return Ok(none);
    }
    let w = fu.slice(s![.., ..rank_f]);

    let overlaps = qmat.t().dot(&w);
    let (qu, qs, _) = overlaps
        .svd(true, false)
        .map_err(|e| Error::NumericalFailure {
            op: "principal angle factorization",
            detail: e.to_string(),
        })?;
    let qu = qu.expect("left singular vectors requested");
    let mut candidates: Vec<Array1<f64>> = Vec::new();
    for (i, &s) in qs.iter().enumerate() {
        if s >= 1.0 - 1e-7 {
            candidates.push(qmat.dot(&qu.column(i)));
        }
    }
    if candidates.is_empty() {
        return Ok(none);
    }

    let e_dir = real_vec(&HermitianMatrix::identity(n)) / (n as f64).sqrt();
    let mut cmat = Array2::<f64>::zeros((nn, candidates.len()));
    for (i, c) in candidates.iter().enumerate() {
        let projected = c - &(&e_dir * e_dir.dot(c));
        cmat.column_mut(i).assign(&projected);
    }
    let (cu, cs, _) = cmat.svd(true, false).map_err(|e| Error::NumericalFailure {
        op: "shared direction extraction",
        detail: e.to_string(),
    })?;
    if cs[0] <= 1e-7 {
        return Ok(none);
    }
    let shared = cu.expect("left singular vectors requested");
    let y = vec_to_hermitian(&shared.column(0), n);

    let h_values: Vec<f64> = b
        .projections()
        .iter()
        .map(|q| trace_product(q.as_array(), y.as_array()).re / q.trace())
        .collect();
    let hmax = h_values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let hmin = h_values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if hmax - hmin <= sep_min {
        return Ok(none);
    }
    let lhs = combination(b.projections(), &h_values);
    let (gamma, residual) = least_squares_combination(povm.elements(), &lhs)?;
    if residual > gate {
        return Ok(none);
    }
    let h = LabelFunction::new(b.labels().iter().copied().zip(h_values).collect())?;
    Ok(Def13Report {
        witness: Some(UnsharpWitness::Def13 {
            h,
            gamma,
            residual,
            branch: Def13Branch::ViaSpanIntersection,
        }),
        constant_h_excluded: true,
    })
}

/// Where a sharp observable sits relative to the sharp reconstruction
/// of a POVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconstructionMembership {
    /// Some function carries the observable onto the reconstruction:
    /// every effect is scalar on every eigenspace of the observable.
    pub in_a1: bool,
    /// The observable is a function of the reconstruction: it is
    /// scalar on every eigenspace of the reconstruction.
    pub in_a2_prime: bool,
}

/// Tests the two membership relations between a sharp observable and
/// the sharp reconstruction of a commutative POVM.
pub fn membership_a1_a2prime(
    b: &PVMeasure,
    povm: &DiscretePOVM,
    tol_group: f64,
) -> Result<ReconstructionMembership> {
    let in_a1 = match function_between(b, povm, tol_group) {
        Ok(_) => true,
        Err(Error::NotARefinement { .. }) => false,
        Err(e) => return Err(e),
    };
    let recon = sharp_reconstruction(povm, tol_group)?;
    let b_op = b.operator();
    let mut compressed = HermitianMatrix::zeros(povm.dim());
    for e in recon.measure.projections() {
        let beta = trace_product(e.as_array(), b_op.as_array()).re / e.trace();
        compressed = &compressed + &e.scaled(beta);
    }
    let in_a2_prime = (&compressed - &b_op).fro_norm() <= TOL_OPERATOR * povm.dim() as f64;
    Ok(ReconstructionMembership { in_a1, in_a2_prime })
}

/// A system–ancilla measurement model: sharp observables on each
/// factor, a table of pointer values indexed by (system eigenvalue,
/// ancilla eigenvalue), and an ancilla state.
#[derive(Debug, Clone)]
pub struct AncillaModel {
    system: PVMeasure,
    ancilla: PVMeasure,
    k_values: Array2<f64>,
    state: DensityMatrix,
}

impl AncillaModel {
    /// Validates the shapes: the pointer table must be
    /// `system.len() x ancilla.len()` with finite entries, and the
    /// state must live on the ancilla space.
    pub fn new(
        system: PVMeasure,
        ancilla: PVMeasure,
        k_values: Array2<f64>,
        state: DensityMatrix,
    ) -> Result<Self> {
        if k_values.nrows() != system.len() {
            return Err(Error::DimensionMismatch {
                context: "pointer table rows",
                expected: system.len(),
                got: k_values.nrows(),
            });
        }
        if k_values.ncols() != ancilla.len() {
            return Err(Error::DimensionMismatch {
                context: "pointer table columns",
                expected: ancilla.len(),
                got: k_values.ncols(),
            });
        }
        if state.dim() != ancilla.dim() {
            return Err(Error::DimensionMismatch {
                context: "ancilla state dimension",
                expected: ancilla.dim(),
                got: state.dim(),
            });
        }
        if !k_values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteValue {
                context: "pointer table entry",
            });
        }
        Ok(Self {
            system,
            ancilla,
            k_values,
            state,
        })
    }

    /// The system observable.
    pub fn system(&self) -> &PVMeasure {
        &self.system
    }

    /// The ancilla observable.
    pub fn ancilla(&self) -> &PVMeasure {
        &self.ancilla
    }

    /// Pointer values, one row per system eigenvalue, one column per
    /// ancilla eigenvalue.
    pub fn k_values(&self) -> &Array2<f64> {
        &self.k_values
    }

    /// The ancilla state.
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// The pointer observable on the composite space:
    /// `sum_{a,l} k(a,l) (E_a tensor E'_l)`.
    pub fn pointer_operator(&self) -> HermitianMatrix {
        let dim = self.system.dim() * self.ancilla.dim();
        let mut total = CMatrix::zeros((dim, dim));
        for (a, ea) in self.system.projections().iter().enumerate() {
            for (l, el) in self.ancilla.projections().iter().enumerate() {
                let weight = C64::new(self.k_values[(a, l)], 0.0);
                total = total + kron(ea.as_array(), el.as_array()).mapv(|z| z * weight);
            }
        }
        HermitianMatrix::new(total).expect("real combination of Hermitian blocks is Hermitian")
    }
}

/// Compresses a sharp measurement on a composite space onto the first
/// factor through an ancilla state: each projection `P_k` becomes
/// `tr_2((1 tensor sqrt(rho')) P_k (1 tensor sqrt(rho')))`.
///
/// The composite dimension must be an exact multiple of the state's
/// dimension. The result always sums to the identity because the
/// projections do.
pub fn povm_from_ancilla(extended: &PVMeasure, state: &DensityMatrix) -> Result<DiscretePOVM> {
    let total = extended.dim();
    let anc = state.dim();
    if total % anc != 0 {
        return Err(Error::DimensionMismatch {
            context: "composite dimension as a multiple of the ancilla dimension",
            expected: anc,
            got: total,
        });
    }
    let n = total / anc;
    let root = psd_sqrt(state.matrix(), TOL_PSD)?;
    let factor = kron(&identity(n), root.as_array());
    let mut effects = Vec::with_capacity(extended.len());
    for p in extended.projections() {
        let sandwiched = factor.dot(p.as_array()).dot(&factor);
        effects.push(partial_trace_second(
            &HermitianMatrix::new(sandwiched)?,
            n,
            anc,
        )?);
    }
    DiscretePOVM::new(extended.labels().to_vec(), effects)
}

/// The relabeling attempted when the averaged pointer map fails to be
/// injective: values of the equivalence certificate of the induced
/// POVM, pushed back through the pointer table.
#[derive(Debug, Clone)]
pub struct FallbackSearch {
    /// Function on the pointer values taken from the equivalence
    /// certificate of the induced POVM.
    pub h: LabelFunction,
    /// The re-averaged map `a -> sum_l h(k(a, l)) w_l`.
    pub r_map: LabelFunction,
    /// Whether the re-averaged map separates the system eigenvalues.
    pub r_injective: bool,
    /// Smallest pairwise gap between re-averaged values.
    pub min_r_gap: f64,
}

/// Everything the ancilla-model analysis establishes: the induced
/// POVM, the averaged pointer map, and whether the system observable
/// is recovered by the sharp reconstruction.
#[derive(Debug, Clone)]
pub struct AncillaReport {
    /// Distinct pointer values in order of first appearance
    /// (row-major) in the pointer table.
    pub outcome_labels: Vec<f64>,
    /// The POVM induced on the system by the ancilla state.
    pub induced: DiscretePOVM,
    /// The averaged pointer map `a -> sum_l k(a, l) w_l` with
    /// `w_l = tr(rho' E'_l)`.
    pub f_map: LabelFunction,
    /// Whether the averaged map separates the system eigenvalues.
    pub f_injective: bool,
    /// Smallest pairwise gap between averaged values.
    pub min_f_gap: f64,
    /// Label pairing between the sharp reconstruction of the induced
    /// POVM and the system observable, when their projection families
    /// coincide.
    pub equivalence: Option<Vec<(f64, f64)>>,
    /// Populated only when the averaged map is not injective.
    pub fallback: Option<FallbackSearch>,
}

/// Analyzes a system–ancilla model: groups equal pointer values into
/// composite outcomes, induces the system POVM, and checks whether its
/// sharp reconstruction recovers the system observable.
///
/// Pointer values closer than the grouping tolerance are identified;
/// a chain of near values whose total spread exceeds the tolerance is
/// ambiguous and reported as a label collision.
pub fn corollary3_check(
    model: &AncillaModel,
    tol_group: f64,
    sep_min: f64,
) -> Result<AncillaReport> {
    let k = model.k_values();
    let (na, nl) = k.dim();
    let scale = k.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    let tol_row = tol_group * scale;

    // Group the pointer values by transitive closeness.
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(na * nl);
    for a in 0..na {
        for l in 0..nl {
            entries.push((k[(a, l)], a, l));
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut groups: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for ent in entries {
        match groups.last_mut() {
            Some(group) if ent.0 - group.last().unwrap().0 <= tol_row => group.push(ent),
            _ => groups.push(vec![ent]),
        }
    }
    for group in &groups {
        let spread = group.last().unwrap().0 - group.first().unwrap().0;
        if spread > tol_row {
            return Err(Error::LabelCollision {
                detail: format!(
                    "pointer values from {:.6e} to {:.6e} chain together but spread {:.3e} \
                     exceeds the grouping tolerance {:.3e}",
                    group.first().unwrap().0,
                    group.last().unwrap().0,
                    spread,
                    tol_row
                ),
            });
        }
    }

    // Order outcomes by first appearance in the table (row-major) and
    // represent each group by the value at that first appearance.
    let mut keyed: Vec<(usize, f64, &Vec<(f64, usize, usize)>)> = groups
        .iter()
        .map(|group| {
            let (first_pos, first_value) = group
                .iter()
                .map(|&(v, a, l)| (a * nl + l, v))
                .min_by_key(|&(pos, _)| pos)
                .unwrap();
            (first_pos, first_value, group)
        })
        .collect();
    keyed.sort_by_key(|&(pos, _, _)| pos);

    let dim = model.system().dim() * model.ancilla().dim();
    let mut labels = Vec::with_capacity(keyed.len());
    let mut projections = Vec::with_capacity(keyed.len());
    for (_, rep, group) in &keyed {
        labels.push(*rep);
        let mut total = CMatrix::zeros((dim, dim));
        for &(_, a, l) in group.iter() {
            total = total
                + kron(
                    model.system().projections()[a].as_array(),
                    model.ancilla().projections()[l].as_array(),
                );
        }
        projections.push(HermitianMatrix::new(total)?);
    }
    let extended = PVMeasure::new(labels.clone(), projections)?;
    let induced = povm_from_ancilla(&extended, model.state())?;

    // Averaged pointer map.
    let w: Vec<f64> = model
        .ancilla()
        .projections()
        .iter()
        .map(|el| trace_product(model.state().matrix().as_array(), el.as_array()).re)
        .collect();
    let f_values: Vec<f64> = (0..na)
        .map(|a| (0..nl).map(|l| k[(a, l)] * w[l]).sum())
        .collect();
    let f_map = LabelFunction::new(
        model
            .system()
            .labels()
            .iter()
            .copied()
            .zip(f_values.iter().copied())
            .collect(),
    )?;
    let min_f_gap = min_pairwise_gap(&f_values);
    let f_injective = min_f_gap > sep_min;

    let recon = sharp_reconstruction(&induced, tol_group)?;
    let equivalence = crate::injectivity::operators_equivalent(
        &recon.measure,
        model.system(),
        TOL_OPERATOR * model.system().dim() as f64,
    );

    let fallback = if f_injective {
        None
    } else {
        let cert = certify_equivalence(&induced, tol_group, sep_min)?;
        let h = cert.f.clone();
        let r_values: Vec<f64> = (0..na)
            .map(|a| -> Result<f64> {
                let mut sum = 0.0;
                for l in 0..nl {
                    let value = h
                        .get_close(k[(a, l)], tol_row)
                        .ok_or(Error::UndefinedLabel { label: k[(a, l)] })?;
                    sum += value * w[l];
                }
                Ok(sum)
            })
            .collect::<Result<_>>()?;
        let r_map = LabelFunction::new(
            model
                .system()
                .labels()
                .iter()
                .copied()
                .zip(r_values.iter().copied())
                .collect(),
        )?;
        let min_r_gap = min_pairwise_gap(&r_values);
        let r_injective = min_r_gap > sep_min;
        Some(FallbackSearch {
            h,
            r_map,
            r_injective,
            min_r_gap,
        })
    };

    Ok(AncillaReport {
        outcome_labels: labels,
        induced,
        f_map,
        f_injective,
        min_f_gap,
        equivalence,
        fallback,
    })
}
