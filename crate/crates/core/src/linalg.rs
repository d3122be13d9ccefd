//! Dense complex matrices and the numerical kernels built on them.
//!
//! Operators, density matrices and superoperators all use [`ComplexMatrix`].
//! Storage is dense: the systems handled here have Hilbert dimension at most
//! 16, so Liouvillians are at most 256x256.
//!
//! Vectorization is column stacking throughout the crate:
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative residual tolerance used by [`eig`] and [`solve_affine`].
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;
/// Largest accepted 1-norm condition estimate in [`solve_affine`].
pub const DEFAULT_CONDITION_BOUND: f64 = 1e12;

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_nalgebra(inner: DMatrix<C64>) -> Result<Self> {
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(inner))
    }

    /// Wraps a matrix computed from finite inputs by finite arithmetic.
    pub(crate) fn wrap(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(inner)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// The basis operator `|i⟩⟨j|` in dimension `dim`.
    pub fn basis_op(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = ONE;
        Self(m)
    }

    /// The projector `|ψ⟩⟨ψ|`.
    pub fn outer(psi: &ComplexVector) -> Self {
        Self(psi * psi.adjoint())
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) -> Result<()> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
        self.0[(i, j)] = value;
        Ok(())
    }

    pub fn entries_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self(self.0.map(|z| z * alpha))
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        Self(self.0.map(|z| z * alpha))
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().copied().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum column sum of absolute values.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.0.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖A − A†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        &self.0 * v
    }

    /// Column-stacked vectorization.
    pub fn vectorize(&self) -> ComplexVector {
        DVector::from_column_slice(self.0.as_slice())
    }

    /// Inverse of [`ComplexMatrix::vectorize`] for a square `dim x dim` matrix.
    pub fn unvectorize(v: &ComplexVector, dim: usize) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "vector of length {} is not a vectorized {dim}x{dim} matrix",
                v.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_column_slice(dim, dim, v.as_slice()))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows() == other.rows()
            && self.cols() == other.cols()
            && (&self.0 - &other.0).iter().all(|z| z.norm() <= tol)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Kronecker product, `(rows_a·rows_b) x (cols_a·cols_b)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Conjugate transpose.
pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// Eigenvalues paired with the columns of a (generally non-unitary)
/// eigenvector matrix.
#[derive(Clone, Debug)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: ComplexMatrix,
}

impl ComplexSpectrum {
    /// Largest `‖A v − λ v‖ / ‖A‖` over the stored pairs.
    pub fn max_relative_residual(&self, a: &ComplexMatrix) -> f64 {
        let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lambda)| {
                let v = self.eigenvectors.0.column(k);
                let r = &a.0 * v - v * lambda;
                r.norm() / (norm * v.norm().max(f64::MIN_POSITIVE))
            })
            .fold(0.0, f64::max)
    }

    /// `V Λ V⁻¹`.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let v_inv = inverse(&self.eigenvectors)?;
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        Ok(ComplexMatrix(&self.eigenvectors.0 * lambda * v_inv.0))
    }
}

/// Full eigendecomposition of a square complex matrix.
///
/// The matrix is balanced by a diagonal similarity, reduced to complex
/// Schur form `Q T Q†`, and eigenvectors are recovered by back-substitution
/// on the triangular factor. Eigenvectors are unit-norm columns; no
/// orthogonality is assumed.
pub fn eig(a: &ComplexMatrix) -> Result<ComplexSpectrum> {
    let n = a.dim()?;
    if n == 0 {
        return Ok(ComplexSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let (balanced, scaling) = balance(&a.0);
    let schur = nalgebra::linalg::Schur::try_new(balanced, f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge for a {n}x{n} matrix")))?;
    let (q, t) = schur.unpack();

    let t_norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let y = triangular_eigenvectors(&t, t_norm);
    let mut v = q * y;
    for i in 0..n {
        let s = scaling[i];
        v.row_mut(i).iter_mut().for_each(|z| *z *= s);
    }
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= C64::new(norm, 0.0);
        }
    }
    let spectrum = ComplexSpectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_nalgebra(v)
            .map_err(|_| Error::Eigen("non-finite eigenvector".into()))?,
    };
    let residual = spectrum.max_relative_residual(a);
    if !(residual <= DEFAULT_RESIDUAL_TOL) {
        return Err(Error::Eigen(format!(
            "eigenpair residual {residual:.3e} exceeds {DEFAULT_RESIDUAL_TOL:.1e}"
        )));
    }
    Ok(spectrum)
}

/// Parlett–Reinsch balancing with power-of-two scale factors.
/// Returns `D⁻¹ A D` and the diagonal of `D`.
fn balance(a: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].l1_norm();
                    r += b[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                b.row_mut(i).iter_mut().for_each(|z| *z /= f);
                b.column_mut(i).iter_mut().for_each(|z| *z *= f);
            }
        }
    }
    (b, d)
}

/// Eigenvectors of an upper-triangular matrix, one per diagonal entry.
fn triangular_eigenvectors(t: &DMatrix<C64>, t_norm: f64) -> DMatrix<C64> {
    let n = t.nrows();
    let eps = f64::EPSILON;
    let mut y = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let smin = (eps * lambda.norm()).max(eps * t_norm).max(f64::MIN_POSITIVE * 1e10);
        y[(k, k)] = ONE;
        let mut ymax: f64 = 1.0;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for m in (j + 1)..=k {
                s += t[(j, m)] * y[(m, k)];
            }
            let d = t[(j, j)] - lambda;
            let value = if d.norm() >= smin {
                -s / d
            } else if s.norm() <= 16.0 * (n as f64) * eps * t_norm * ymax {
                // repeated eigenvalue with a consistent equation: stay inside
                // the eigenspace instead of amplifying round-off
                ZERO
            } else {
                -s / C64::new(smin, 0.0)
            };
            ymax = ymax.max(value.norm());
            y[(j, k)] = value;
        }
    }
    y
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.dim()?;
    let eig = nalgebra::linalg::SymmetricEigen::try_new(a.hermitian_part().0, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("Hermitian eigensolver did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Matrix inverse with a 1-norm condition check against
/// [`DEFAULT_CONDITION_BOUND`].
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    inverse_with_bound(a, DEFAULT_CONDITION_BOUND)
}

pub fn inverse_with_bound(a: &ComplexMatrix, condition_bound: f64) -> Result<ComplexMatrix> {
    let n = a.dim()?;
    let lu = a.0.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
        bound: condition_bound,
    })?;
    let inv = ComplexMatrix::from_nalgebra(inv).map_err(|_| Error::Singular {
        condition: f64::INFINITY,
        bound: condition_bound,
    })?;
    let condition = if n == 0 { 1.0 } else { a.one_norm() * inv.one_norm() };
    if !(condition <= condition_bound) {
        return Err(Error::Singular {
            condition,
            bound: condition_bound,
        });
    }
    Ok(inv)
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub condition_bound: f64,
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            condition_bound: DEFAULT_CONDITION_BOUND,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

/// Solves `a·x + b = 0`, i.e. returns `x = −a⁻¹ b`.
pub fn solve_affine(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    solve_affine_with(a, b, &SolveOptions::default())
}

pub fn solve_affine_with(
    a: &ComplexMatrix,
    b: &ComplexVector,
    opts: &SolveOptions,
) -> Result<ComplexVector> {
    let n = a.dim()?;
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix is {n}x{n}",
            b.len()
        )));
    }
    let inv = inverse_with_bound(a, opts.condition_bound)?;
    let lu = a.0.clone().lu();
    let neg_b = -b;
    let mut x = lu.solve(&neg_b).ok_or(Error::Singular {
        condition: f64::INFINITY,
        bound: opts.condition_bound,
    })?;
    // one step of iterative refinement
    let r = &a.0 * &x + b;
    x -= &inv.0 * r;

    let residual = (&a.0 * &x + b).norm();
    let tolerance = opts.residual_tol * (a.frobenius_norm() * x.norm() + b.norm());
    if !(residual <= tolerance) {
        return Err(Error::Residual { residual, tolerance });
    }
    Ok(x)
}
