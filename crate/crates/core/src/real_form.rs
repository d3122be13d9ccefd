//! Real coordinates of a density matrix.
//!
//! A trace-one Hermitian matrix is described by the populations of all but
//! one reference level plus the real and imaginary parts of each
//! upper-triangular coherence. In these coordinates any Lindblad generator
//! becomes a real affine map `ẋ = G x + c`, with the trace constraint
//! carried by `c`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, I};
use crate::lindblad::{build_liouvillian, DensityMatrix, LindbladModel};

/// One real coordinate of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RealParam {
    /// `ρ_ii`
    Population(usize),
    /// `Re ρ_ij`, `i < j`
    Re(usize, usize),
    /// `Im ρ_ij`, `i < j`
    Im(usize, usize),
}

impl RealParam {
    /// Real and imaginary parts of `ρ_ij` in canonical (`i < j`) order.
    pub fn coherence(i: usize, j: usize) -> [RealParam; 2] {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        [RealParam::Re(a, b), RealParam::Im(a, b)]
    }

    pub fn label(&self, labels: &[String]) -> String {
        match *self {
            RealParam::Population(i) => format!("P[{}]", labels[i]),
            RealParam::Re(i, j) => format!("Re[{},{}]", labels[i], labels[j]),
            RealParam::Im(i, j) => format!("Im[{},{}]", labels[i], labels[j]),
        }
    }
}

/// The master equation in real coordinates, `ẋ = G x + c`.
#[derive(Clone, Debug)]
pub struct RealAffine {
    dim: usize,
    trace_index: usize,
    params: Vec<RealParam>,
    generator: DMatrix<f64>,
    source: DVector<f64>,
}

impl RealAffine {
    /// `trace_index` is the population expressed through the others.
    pub fn from_model(model: &LindbladModel, trace_index: usize) -> Result<Self> {
        Self::from_liouvillian(&build_liouvillian(model), model.dim(), trace_index)
    }

    pub fn from_liouvillian(l: &ComplexMatrix, dim: usize, trace_index: usize) -> Result<Self> {
        if l.rows() != dim * dim || !l.is_square() {
            return Err(Error::Dimension(format!("{}x{} generator for dimension {dim}", l.rows(), l.cols())));
        }
        if trace_index >= dim {
            return Err(Error::InvalidArgument(format!("trace index {trace_index} out of range")));
        }
        let mut params: Vec<RealParam> = (0..dim).filter(|&i| i != trace_index).map(RealParam::Population).collect();
        for i in 0..dim {
            for j in i + 1..dim {
                params.extend(RealParam::coherence(i, j));
            }
        }
        let mut shell = Self {
            dim,
            trace_index,
            params,
            generator: DMatrix::zeros(0, 0),
            source: DVector::zeros(0),
        };
        let apply = |b: &ComplexMatrix| ComplexMatrix::unvectorize(&l.mul_vec(&b.vectorize()), dim);
        let n = shell.params.len();
        let mut generator = DMatrix::zeros(n, n);
        for k in 0..n {
            let image = apply(&shell.direction(shell.params[k]))?;
            generator.set_column(k, &shell.encode_matrix(&image));
        }
        let reference = ComplexMatrix::basis_op(dim, trace_index, trace_index);
        shell.source = shell.encode_matrix(&apply(&reference)?);
        shell.generator = generator;
        Ok(shell)
    }

    /// Matrix direction associated with one coordinate.
    fn direction(&self, p: RealParam) -> ComplexMatrix {
        let d = self.dim;
        match p {
            RealParam::Population(i) => {
                &ComplexMatrix::basis_op(d, i, i) - &ComplexMatrix::basis_op(d, self.trace_index, self.trace_index)
            }
            RealParam::Re(i, j) => &ComplexMatrix::basis_op(d, i, j) + &ComplexMatrix::basis_op(d, j, i),
            RealParam::Im(i, j) => {
                (&ComplexMatrix::basis_op(d, i, j) - &ComplexMatrix::basis_op(d, j, i)).scale(I)
            }
        }
    }

    pub fn encode_matrix(&self, m: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.params.len(),
            self.params.iter().map(|p| match *p {
                RealParam::Population(i) => m.get(i, i).re,
                RealParam::Re(i, j) => m.get(i, j).re,
                RealParam::Im(i, j) => m.get(i, j).im,
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace_index(&self) -> usize {
        self.trace_index
    }

    pub fn params(&self) -> &[RealParam] {
        &self.params
    }

    pub fn index_of(&self, p: RealParam) -> Option<usize> {
        self.params.iter().position(|q| *q == p)
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn source(&self) -> &DVector<f64> {
        &self.source
    }

    pub fn encode(&self, rho: &DensityMatrix) -> Result<DVector<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::Dimension(format!("state dimension {} vs {}", rho.dim(), self.dim)));
        }
        Ok(self.encode_matrix(rho.matrix()))
    }

    /// Trace-one Hermitian matrix with coordinates `x` (not checked for
    /// positivity).
    pub fn decode(&self, x: &DVector<f64>) -> Result<ComplexMatrix> {
        if x.len() != self.params.len() {
            return Err(Error::Dimension(format!("{} coordinates, expected {}", x.len(), self.params.len())));
        }
        let mut m = ComplexMatrix::basis_op(self.dim, self.trace_index, self.trace_index);
        for (p, &v) in self.params.iter().zip(x.iter()) {
            m = &m + &self.direction(*p).scale_real(v);
        }
        Ok(m)
    }
}

