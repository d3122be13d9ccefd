//! Liouvillian spectrum and metastability diagnostics.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64};
use crate::real_form::RealAffine;
use crate::lindblad::{build_liouvillian, DensityMatrix, LindbladModel};

/// Eigenvalues within this multiple of `‖L‖` are treated as equal when
/// pairing conjugates and checking for the zero mode.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Real parts within this multiple of `‖L‖` count as ties when ordering.
pub const TIE_TOL: f64 = 1e-12;

/// Default lower bound on `|Re λ₃| / |Re λ₂|` for calling a spectrum metastable.
pub const DEFAULT_GAP_RATIO_THRESHOLD: f64 = 100.0;

#[derive(Clone, Debug)]
pub struct LiouvillianSpectrum {
    /// Sorted by descending real part; `eigenvalues[0]` is the zero mode.
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors (vectorized), in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    pub tau2: f64,
    pub tau3: f64,
    pub gap_ratio: f64,
    zero_mode: ComplexMatrix,
}

impl LiouvillianSpectrum {
    pub fn lambda(&self, k: usize) -> C64 {
        self.eigenvalues[k]
    }

    /// Zero-mode eigenvector, normalized to unit trace, as a density matrix.
    ///
    /// When `λ₂` is tiny the eigensolver determines this vector only to about
    /// `ε‖L‖/|λ₂|`; it is therefore refined by solving `G x + c = 0` in the
    /// real coordinates of [`RealAffine`], which is exact for the kernel.
    pub fn zero_mode_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::project(self.zero_mode.clone(), f64::INFINITY)
    }
}

fn descending_real(a: &C64, b: &C64) -> Ordering {
    b.re.total_cmp(&a.re)
}

fn tie_break(a: &C64, b: &C64) -> Ordering {
    a.im.abs().total_cmp(&b.im.abs()).then(a.im.total_cmp(&b.im))
}

/// Orders eigenvalue indices by descending real part; runs whose real parts
/// agree within `tol` are ordered by ascending `|Im|`, then ascending `Im`.
fn sorted_order(values: &[C64], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| descending_real(&values[i], &values[j]));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && (values[order[end - 1]].re - values[order[end]].re).abs() <= tol {
            end += 1;
        }
        order[start..end].sort_by(|&i, &j| tie_break(&values[i], &values[j]));
        start = end;
    }
    order
}

fn reciprocal_rate(lambda: C64) -> f64 {
    1.0 / lambda.re.abs()
}

pub fn liouvillian_spectrum(model: &LindbladModel) -> Result<LiouvillianSpectrum> {
    spectrum_of(&build_liouvillian(model), model.dim())
}

/// Spectrum of an already assembled generator acting on `dim x dim` matrices.
pub fn spectrum_of(l: &ComplexMatrix, dim: usize) -> Result<LiouvillianSpectrum> {
    let n = l.dim()?;
    if n != dim * dim || dim < 2 {
        return Err(Error::Dimension(format!("{n}x{n} generator for dimension {dim}")));
    }
    let norm = l.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = SPECTRUM_TOL * norm;
    let raw = linalg::eig(l)?;

    let zero = (0..n)
        .min_by(|&i, &j| raw.eigenvalues[i].norm().total_cmp(&raw.eigenvalues[j].norm()))
        .expect("nonempty spectrum");
    if raw.eigenvalues[zero].norm() > tol {
        return Err(Error::Eigen(format!(
            "no zero eigenvalue: smallest |λ| is {:.3e}",
            raw.eigenvalues[zero].norm()
        )));
    }
    if let Some(bad) = raw.eigenvalues.iter().find(|z| z.re > tol) {
        return Err(Error::Eigen(format!("growing mode with Re λ = {:.3e}", bad.re)));
    }

    let rest: Vec<usize> = (0..n).filter(|&k| k != zero).collect();
    let rest_values: Vec<C64> = rest.iter().map(|&k| raw.eigenvalues[k]).collect();
    let mut order = vec![zero];
    order.extend(sorted_order(&rest_values, TIE_TOL * norm).into_iter().map(|k| rest[k]));

    let eigenvalues: Vec<C64> = order.iter().map(|&k| raw.eigenvalues[k]).collect();
    check_conjugate_pairs(&eigenvalues, tol)?;
    let vecs = raw.eigenvectors.as_nalgebra();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])])?;

    let zero_mode = refined_zero_mode(l, dim, &raw.eigenvectors.as_nalgebra().column(zero).into_owned())?;

    let tau2 = reciprocal_rate(eigenvalues[1]);
    let tau3 = reciprocal_rate(eigenvalues[2]);
    Ok(LiouvillianSpectrum {
        gap_ratio: eigenvalues[2].re.abs() / eigenvalues[1].re.abs(),
        eigenvalues,
        eigenvectors,
        tau2,
        tau3,
        zero_mode,
    })
}

fn refined_zero_mode(l: &ComplexMatrix, dim: usize, raw: &ComplexVector) -> Result<ComplexMatrix> {
    let affine = RealAffine::from_liouvillian(l, dim, 0)?;
    let g = affine.generator();
    if let Some(x) = g.clone().lu().solve(&(-affine.source())) {
        if x.iter().all(|v| v.is_finite()) {
            let refined = affine.decode(&x)?;
            // accept only if it is actually in the kernel
            let residual = l.mul_vec(&refined.vectorize()).norm();
            if residual <= 1e-10 * l.frobenius_norm().max(1.0) {
                return Ok(refined);
            }
        }
    }
    let m = ComplexMatrix::unvectorize(raw, dim)?;
    let trace = m.trace();
    if trace.norm() < 1e-300 {
        return Err(Error::Eigen("zero mode has vanishing trace".into()));
    }
    Ok(m.scale(trace.inv()))
}

/// Every eigenvalue with a nonzero imaginary part must have a partner near
/// its complex conjugate.
fn check_conjugate_pairs(values: &[C64], tol: f64) -> Result<()> {
    let mut used = vec![false; values.len()];
    for (k, z) in values.iter().enumerate() {
        if used[k] || z.im.abs() <= tol {
            continue;
        }
        let partner = (0..values.len())
            .filter(|&j| j != k && !used[j])
            .min_by(|&i, &j| (values[i] - z.conj()).norm().total_cmp(&(values[j] - z.conj()).norm()));
        match partner {
            Some(j) if (values[j] - z.conj()).norm() <= tol.max(1e-7 * z.norm()) => {
                used[k] = true;
                used[j] = true;
            }
            _ => {
                return Err(Error::Eigen(format!(
                    "eigenvalue {:.6e}{:+.6e}i has no conjugate partner",
                    z.re, z.im
                )))
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetastabilityReport {
    pub is_metastable: bool,
    pub lambda2: C64,
    pub lambda3: C64,
    pub tau2: f64,
    pub tau3: f64,
    pub gap_ratio: f64,
    pub ratio_threshold: f64,
}

pub fn metastability_report(spectrum: &LiouvillianSpectrum, ratio_threshold: f64) -> MetastabilityReport {
    MetastabilityReport {
        is_metastable: spectrum.gap_ratio >= ratio_threshold,
        lambda2: spectrum.eigenvalues[1],
        lambda3: spectrum.eigenvalues[2],
        tau2: spectrum.tau2,
        tau3: spectrum.tau3,
        gap_ratio: spectrum.gap_ratio,
        ratio_threshold,
    }
}
