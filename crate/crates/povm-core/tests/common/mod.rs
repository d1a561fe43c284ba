//! Shared random-model generators for the integration suites.
//!
//! Every generator draws from a caller-seeded ChaCha stream, so any
//! failing case replays exactly from the reported seed. Stochastic
//! rows live on a 1/64 grid: distinct rows then differ by at least
//! 1/64 in some column, far above every grouping tolerance, which
//! keeps expected groupings unambiguous.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use povm_core::linalg::dagger;
use povm_core::tol::TOL_GROUP;
use povm_core::{
    eig_hermitian, CMatrix, DensityMatrix, DiscretePOVM, HermitianMatrix, PVMeasure,
};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One stochastic row on the 1/64 grid: nonnegative entries summing
/// to one.
pub fn dyadic_stochastic_row(rng: &mut ChaCha8Rng, ncols: usize) -> Vec<f64> {
    let mut cuts: Vec<u32> = (0..ncols - 1).map(|_| rng.gen_range(0..=64)).collect();
    cuts.sort_unstable();
    let mut row = Vec::with_capacity(ncols);
    let mut prev = 0u32;
    for &c in &cuts {
        row.push(f64::from(c - prev) / 64.0);
        prev = c;
    }
    row.push(f64::from(64 - prev) / 64.0);
    row
}

/// Row-stochastic matrix on the 1/64 grid.
pub fn dyadic_stochastic_rows(rng: &mut ChaCha8Rng, nrows: usize, ncols: usize) -> Array2<f64> {
    let mut out = Array2::zeros((nrows, ncols));
    for i in 0..nrows {
        let row = dyadic_stochastic_row(rng, ncols);
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let mut a: CMatrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
    }
    let h = (&a + &dagger(&a)).mapv(|z| z * 0.5);
    HermitianMatrix::new(h).expect("symmetrized matrix is Hermitian")
}

/// Random unitary: the eigenbasis of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    eig_hermitian(&random_hermitian(rng, n))
        .expect("random Hermitian matrix decomposes")
        .eigenvectors
}

fn hermitian_from(x: CMatrix) -> HermitianMatrix {
    let h = (&x + &dagger(&x)).mapv(|z| z * 0.5);
    HermitianMatrix::new(h).expect("symmetrized matrix is Hermitian")
}

/// Commutative POVM: a dyadic stochastic table conjugated into a
/// random eigenbasis. Outcome labels are 1, …, m.
pub fn random_commutative_povm(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DiscretePOVM {
    let u = random_unitary(rng, n);
    let udag = dagger(&u);
    let table = dyadic_stochastic_rows(rng, n, m);
    let mut elements = Vec::with_capacity(m);
    for k in 0..m {
        let diag: Array1<C64> = table.column(k).mapv(|v| C64::new(v, 0.0));
        elements.push(hermitian_from(u.dot(&Array2::from_diag(&diag)).dot(&udag)));
    }
    let outcomes: Vec<f64> = (1..=m).map(|k| k as f64).collect();
    DiscretePOVM::new(outcomes, elements).expect("conjugated stochastic table is a POVM")
}

/// POVM with no commutativity constraint: random positive operators
/// whitened by the inverse square root of their sum. Generic draws are
/// non-commutative. Outcome labels are 1, …, m.
pub fn random_general_povm(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DiscretePOVM {
    loop {
        let mut gram = Vec::with_capacity(m);
        let mut sum: CMatrix = Array2::zeros((n, n));
        for _ in 0..m {
            let mut a: CMatrix = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    a[[i, j]] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                }
            }
            let g = dagger(&a).dot(&a);
            sum = &sum + &g;
            gram.push(g);
        }
        let eig = eig_hermitian(&hermitian_from(sum)).expect("positive sum decomposes");
        if eig.eigenvalues[0] < 1e-6 {
            continue;
        }
        let inv_root: Array1<C64> = eig
            .eigenvalues
            .iter()
            .map(|&l| C64::new(1.0 / l.sqrt(), 0.0))
            .collect();
        let whiten = eig
            .eigenvectors
            .dot(&Array2::from_diag(&inv_root))
            .dot(&dagger(&eig.eigenvectors));
        let elements: Vec<HermitianMatrix> = gram
            .into_iter()
            .map(|g| hermitian_from(whiten.dot(&g).dot(&whiten)))
            .collect();
        let outcomes: Vec<f64> = (1..=m).map(|k| k as f64).collect();
        return DiscretePOVM::new(outcomes, elements).expect("whitened family is a POVM");
    }
}

/// Random density matrix: a normalized random positive operator.
pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    loop {
        let mut a: CMatrix = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        let g = hermitian_from(dagger(&a).dot(&a));
        let tr = g.trace();
        if tr < 1e-9 {
            continue;
        }
        return DensityMatrix::new(g.scaled(1.0 / tr)).expect("normalized positive operator");
    }
}

/// Sharp observable with `groups` distinct values, plus a POVM whose
/// every element is a fixed mixture of the sharp projections — the
/// first unsharpness relation holds by construction. The mixture table
/// has at least two distinct rows, so the POVM's reconstruction keeps
/// at least two values.
pub fn random_mixture_pair(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (PVMeasure, DiscretePOVM) {
    assert!(n >= 2, "need at least two basis directions");
    let groups = rng.gen_range(2..=n);
    let assignment: Vec<usize> = loop {
        let cand: Vec<usize> = (0..n).map(|_| rng.gen_range(0..groups)).collect();
        if (0..groups).all(|g| cand.contains(&g)) {
            break cand;
        }
    };
    let mixing: Array2<f64> = loop {
        let cand = dyadic_stochastic_rows(rng, groups, m);
        let first = cand.row(0);
        if cand
            .rows()
            .into_iter()
            .any(|row| row.iter().zip(first.iter()).any(|(a, b)| a != b))
        {
            break cand;
        }
    };
    let u = random_unitary(rng, n);
    let udag = dagger(&u);
    let mut projections = Vec::with_capacity(groups);
    for g in 0..groups {
        let diag: Array1<C64> = (0..n)
            .map(|i| C64::new(if assignment[i] == g { 1.0 } else { 0.0 }, 0.0))
            .collect();
        projections.push(hermitian_from(u.dot(&Array2::from_diag(&diag)).dot(&udag)));
    }
    let labels: Vec<f64> = (1..=groups).map(|g| g as f64).collect();
    let sharp = PVMeasure::new(labels, projections.clone()).expect("rotated basis partition");
    let mut elements = Vec::with_capacity(m);
    for k in 0..m {
        let mut e = HermitianMatrix::zeros(n);
        for (g, q) in projections.iter().enumerate() {
            e = &e + &q.scaled(mixing[[g, k]]);
        }
        elements.push(e);
    }
    let outcomes: Vec<f64> = (1..=m).map(|k| k as f64).collect();
    let povm = DiscretePOVM::new(outcomes, elements).expect("mixture of projections is a POVM");
    (sharp, povm)
}

/// POVM plus a sharp observable equal (by construction) to a real
/// combination of its effects — the second unsharpness relation holds.
/// The combination is redrawn until the resulting operator has at
/// least two distinct eigenvalues.
pub fn random_combination_pair(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    commutative: bool,
) -> (PVMeasure, DiscretePOVM) {
    let povm = if commutative {
        random_commutative_povm(rng, n, m)
    } else {
        random_general_povm(rng, n, m)
    };
    loop {
        let gamma: Vec<f64> = (0..m)
            .map(|_| f64::from(rng.gen_range(-128i32..=128)) / 64.0)
            .collect();
        let mut combo = HermitianMatrix::zeros(n);
        for (k, e) in povm.elements().iter().enumerate() {
            combo = &combo + &e.scaled(gamma[k]);
        }
        if let Ok(sharp) = PVMeasure::from_hermitian(&combo, TOL_GROUP) {
            if sharp.len() >= 2 {
                return (sharp, povm);
            }
        }
    }
}
