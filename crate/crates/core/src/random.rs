//! Random states, unitaries, and channels for tests and sampling.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, ComplexMatrix, HermitianOperator, StateVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| c64(gaussian(rng), gaussian(rng)))
}

/// Haar-random pure state of `C^d`.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    let v = StateVector::from_fn(d, |_, _| c64(gaussian(rng), gaussian(rng)));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction
/// on the diagonal of R.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = random_matrix(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c64(1.0, 0.0)
        };
        let mut column = q.column_mut(j);
        column *= phase;
    }
    q
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(&random_matrix(d, d, rng))
}

/// Kraus operators of a random channel `C^in -> C^out` with `count` operators:
/// blocks of an isometry obtained from a random unitary.
pub fn random_kraus<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    count: usize,
    rng: &mut R,
) -> Vec<ComplexMatrix> {
    let big = out_dim * count;
    assert!(big >= in_dim, "not enough Kraus operators for an isometry");
    let u = random_unitary(big, rng);
    let isometry = u.columns(0, in_dim).into_owned();
    (0..count)
        .map(|k| isometry.rows(k * out_dim, out_dim).into_owned())
        .collect()
}
