//! Random operators and states for property checks and benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::lindblad::DensityMatrix;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::wrap(ginibre(rng, n, n))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n);
    ComplexMatrix::wrap((&g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// Full-rank mixed state `G G† / tr(G G†)` with Gaussian `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n, n);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::project(ComplexMatrix::wrap(m / C64::new(tr, 0.0)), 0.0)
        .expect("Ginibre construction is a valid state")
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexVector {
    let v = DVector::from_fn(n, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    ComplexMatrix::wrap(q)
}
