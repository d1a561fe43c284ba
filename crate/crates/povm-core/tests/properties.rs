//! Randomized invariants over seeded model generators.
//!
//! Each property draws its models from a ChaCha stream keyed by a
//! proptest-chosen seed, so shrinking narrows over seeds and sizes
//! while every individual case stays reproducible.

mod common;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use common::{
    dyadic_stochastic_rows, random_combination_pair, random_commutative_povm, random_density,
    random_general_povm, random_hermitian, random_mixture_pair, seeded_rng,
};
use povm_core::linalg::{dagger, fro_norm, identity, kron, trace_product};
use povm_core::tol::{SEP_MIN, TOL_GROUP, TOL_PSD};
use povm_core::{
    certify_equivalence, check_def13, eig_hermitian, g_of_f, membership_a1_a2prime,
    operators_equivalent, partial_trace_second, psd_sqrt, sharp_reconstruction,
    simultaneous_diagonalize, verify_randomization, HermitianMatrix, PVMeasure,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The eigendecomposition returns a unitary basis that rebuilds
    /// the input matrix.
    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = seeded_rng(seed);
        let h = random_hermitian(&mut rng, n);
        let eig = eig_hermitian(&h).unwrap();
        let v = &eig.eigenvectors;
        prop_assert!(fro_norm(&(&dagger(v).dot(v) - &identity(n))) <= 1e-10);
        let diag: Array1<C64> = eig.eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect();
        let rebuilt = v.dot(&Array2::from_diag(&diag)).dot(&dagger(v));
        prop_assert!(fro_norm(&(&rebuilt - h.as_array())) <= 1e-10 * n as f64);
    }

    /// A commuting family conjugated into its common eigenbasis is
    /// diagonal, and the reported eigenvalue rows rebuild each member.
    #[test]
    fn common_eigenbasis_diagonalizes(seed in any::<u64>(), n in 2usize..=5, m in 2usize..=4) {
        let mut rng = seeded_rng(seed);
        let povm = random_commutative_povm(&mut rng, n, m);
        let sim = simultaneous_diagonalize(povm.elements(), TOL_GROUP).unwrap();
        prop_assert!(sim.max_off_diagonal <= 1e-9);
        for (k, effect) in povm.elements().iter().enumerate() {
            let diag: Array1<C64> = sim
                .eigenvalue_rows
                .column(k)
                .iter()
                .map(|&l| C64::new(l, 0.0))
                .collect();
            let rebuilt = sim.basis.dot(&Array2::from_diag(&diag)).dot(&dagger(&sim.basis));
            prop_assert!(fro_norm(&(&rebuilt - effect.as_array())) <= 1e-9 * n as f64);
        }
    }

    /// The positive square root squares back to its argument.
    #[test]
    fn positive_root_squares_back(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = seeded_rng(seed);
        let a = random_hermitian(&mut rng, n);
        let g = HermitianMatrix::new(dagger(a.as_array()).dot(a.as_array())).unwrap();
        let root = psd_sqrt(&g, TOL_PSD).unwrap();
        let squared = root.as_array().dot(root.as_array());
        prop_assert!(fro_norm(&(&squared - g.as_array())) <= 1e-9 * n as f64);
    }

    /// Tracing out the second factor is adjoint to tensoring the first
    /// factor with identity: tr(tr_2(X) Y) = tr(X (Y tensor I)).
    #[test]
    fn partial_trace_is_adjoint_to_embedding(
        seed in any::<u64>(),
        n1 in 2usize..=3,
        n2 in 2usize..=3,
    ) {
        let mut rng = seeded_rng(seed);
        let x = random_hermitian(&mut rng, n1 * n2);
        let y = random_hermitian(&mut rng, n1);
        let reduced = partial_trace_second(&x, n1, n2).unwrap();
        let lhs = trace_product(reduced.as_array(), y.as_array());
        let rhs = trace_product(x.as_array(), &kron(y.as_array(), &identity(n2)));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (n1 * n2) as f64);
    }

    /// Induced images transform affinely with the outcome function,
    /// because every table row sums to one.
    #[test]
    fn induced_images_are_affine(
        seed in any::<u64>(),
        r in 1usize..=5,
        m in 2usize..=5,
        alpha in -64i32..=64,
        beta in -64i32..=64,
    ) {
        let mut rng = seeded_rng(seed);
        let rows = dyadic_stochastic_rows(&mut rng, r, m);
        let f: Vec<f64> = (0..m)
            .map(|_| {
                use rand::Rng;
                f64::from(rng.gen_range(-128i32..=128)) / 64.0
            })
            .collect();
        let a = f64::from(alpha) / 16.0;
        let b = f64::from(beta) / 16.0;
        let shifted: Vec<f64> = f.iter().map(|&v| a * v + b).collect();
        let base = g_of_f(&rows, &f).unwrap();
        let moved = g_of_f(&rows, &shifted).unwrap();
        for (g0, g1) in base.iter().zip(moved.iter()) {
            prop_assert!((a * g0 + b - g1).abs() <= 1e-10);
        }
    }

    /// Outcome probabilities form a probability vector in any state.
    #[test]
    fn probabilities_normalize(
        seed in any::<u64>(),
        n in 2usize..=5,
        m in 2usize..=5,
        commutative in any::<bool>(),
    ) {
        let mut rng = seeded_rng(seed);
        let povm = if commutative {
            random_commutative_povm(&mut rng, n, m)
        } else {
            random_general_povm(&mut rng, n, m)
        };
        let rho = random_density(&mut rng, n);
        let probs = povm.probabilities(&rho).unwrap();
        let total: f64 = probs.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        for &p in &probs {
            prop_assert!(p >= -1e-10);
        }
    }

    /// Renaming outcomes neither moves the reconstruction's
    /// projections nor disturbs the randomization table.
    #[test]
    fn reconstruction_ignores_outcome_names(
        seed in any::<u64>(),
        n in 2usize..=5,
        m in 2usize..=4,
    ) {
        let mut rng = seeded_rng(seed);
        let povm = random_commutative_povm(&mut rng, n, m);
        let renamed = povm.relabel_outcomes(|l| 2.0 * l + 3.0).unwrap();
        let base = sharp_reconstruction(&povm, TOL_GROUP).unwrap();
        let moved = sharp_reconstruction(&renamed, TOL_GROUP).unwrap();
        prop_assert_eq!(base.num_values(), moved.num_values());
        for (p, q) in base
            .measure
            .projections()
            .iter()
            .zip(moved.measure.projections())
        {
            prop_assert!((p - q).fro_norm() <= 1e-9 * n as f64);
        }
        for (a, b) in base.table.rows().iter().zip(moved.table.rows().iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    /// A sharp observable sent through its unsharp form and back is
    /// recovered up to renaming, and the randomization identity holds
    /// with an exactly separated table.
    #[test]
    fn sharp_round_trip(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = seeded_rng(seed);
        let sharp = PVMeasure::from_hermitian(&random_hermitian(&mut rng, n), TOL_GROUP).unwrap();
        let povm = sharp.to_povm().unwrap();
        let recon = sharp_reconstruction(&povm, TOL_GROUP).unwrap();
        prop_assert!(operators_equivalent(&sharp, &recon.measure, 1e-9 * n as f64).is_some());
        let report = verify_randomization(&recon, &povm, TOL_GROUP).unwrap();
        prop_assert!(report.reconstruction_residual <= 1e-9 * n as f64);
        prop_assert!(report.row_sum_deviation <= 1e-9);
    }

    /// The certificate's outcome function turns the POVM into a sharp
    /// operator equivalent to the reconstruction.
    #[test]
    fn certified_function_recovers_reconstruction(
        seed in any::<u64>(),
        n in 2usize..=5,
        m in 2usize..=4,
    ) {
        let mut rng = seeded_rng(seed);
        let povm = random_commutative_povm(&mut rng, n, m);
        let recon = sharp_reconstruction(&povm, TOL_GROUP).unwrap();
        let cert = certify_equivalence(&povm, TOL_GROUP, SEP_MIN).unwrap();
        let mut combo = HermitianMatrix::zeros(n);
        for (k, e) in povm.elements().iter().enumerate() {
            combo = &combo + &e.scaled(cert.f.value(povm.outcomes()[k]).unwrap());
        }
        let spectral = PVMeasure::from_hermitian(&combo, TOL_GROUP).unwrap();
        prop_assert!(operators_equivalent(&spectral, &recon.measure, 1e-9 * n as f64).is_some());
    }

    /// The reconstruction itself is both a function of the observable
    /// it reconstructs and a combination of that observable's effects.
    #[test]
    fn reconstruction_is_self_compatible(
        seed in any::<u64>(),
        n in 2usize..=5,
        m in 2usize..=4,
    ) {
        let mut rng = seeded_rng(seed);
        let povm = random_commutative_povm(&mut rng, n, m);
        let recon = sharp_reconstruction(&povm, TOL_GROUP).unwrap();
        let membership = membership_a1_a2prime(&recon.measure, &povm, TOL_GROUP).unwrap();
        prop_assert!(membership.in_a1);
        prop_assert!(membership.in_a2_prime);
    }

    /// A planted mixture witness always yields a function-form witness.
    #[test]
    fn mixture_witness_implies_function_form(
        seed in any::<u64>(),
        n in 2usize..=5,
        m in 2usize..=4,
    ) {
        let mut rng = seeded_rng(seed);
        let (sharp, povm) = random_mixture_pair(&mut rng, n, m);
        let report = check_def13(&sharp, &povm, TOL_GROUP, SEP_MIN).unwrap();
        prop_assert!(report.witness.is_some());
    }

    /// A planted combination witness always yields a function-form
    /// witness, and places the sharp operator in the reconstruction's
    /// linear span.
    #[test]
    fn combination_witness_implies_function_form(
        seed in any::<u64>(),
        n in 2usize..=5,
        m in 2usize..=4,
        commutative in any::<bool>(),
    ) {
        let mut rng = seeded_rng(seed);
        let (sharp, povm) = random_combination_pair(&mut rng, n, m, commutative);
        let report = check_def13(&sharp, &povm, TOL_GROUP, SEP_MIN).unwrap();
        prop_assert!(report.witness.is_some());
        if commutative {
            let membership = membership_a1_a2prime(&sharp, &povm, TOL_GROUP).unwrap();
            prop_assert!(membership.in_a2_prime);
        }
    }
}
