//! Two-qubit concurrence.
//!
//! States are stored in the product basis `{gg, ge, eg, ee}`. The
//! collective basis `{gg, S, A, ee}` with `|S⟩ = (|ge⟩ + |eg⟩)/√2` and
//! `|A⟩ = (|eg⟩ − |ge⟩)/√2` is used by the two-qubit models.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, C64, ZERO};
use crate::lindblad::DensityMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState(DensityMatrix);

impl TwoQubitState {
    /// Wraps a 4x4 density matrix given in the product basis.
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::Dimension(format!("two-qubit state needs dimension 4, got {}", rho.dim())));
        }
        Ok(Self(rho))
    }

    /// Converts a density matrix written in `{gg, S, A, ee}`.
    pub fn from_collective_basis(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::Dimension(format!("two-qubit state needs dimension 4, got {}", rho.dim())));
        }
        let b = collective_to_product();
        Ok(Self(DensityMatrix::project(&(&b * rho.matrix()) * &b.adjoint(), 0.0)?))
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.0
    }

    /// The same state written in `{gg, S, A, ee}`.
    pub fn collective_basis_matrix(&self) -> ComplexMatrix {
        let b = collective_to_product();
        &(&b.adjoint() * self.0.matrix()) * &b
    }
}

/// Unitary whose columns are `|gg⟩, |S⟩, |A⟩, |ee⟩` in product coordinates.
pub fn collective_to_product() -> ComplexMatrix {
    let s = 1.0 / SQRT_2;
    #[rustfmt::skip]
    let entries = [
        1.0, 0.0, 0.0, 0.0,
        0.0, s,   -s,  0.0,
        0.0, s,   s,   0.0,
        0.0, 0.0, 0.0, 1.0,
    ];
    ComplexMatrix::from_real_row_major(4, 4, &entries).expect("finite constant")
}

fn spin_flip() -> DMatrix<C64> {
    // σ_y ⊗ σ_y
    #[rustfmt::skip]
    let entries = [
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
    ];
    DMatrix::from_row_slice(4, 4, &entries.map(|x| C64::new(x, 0.0)))
}

/// Wootters concurrence `max(0, μ₁ − μ₂ − μ₃ − μ₄)`.
///
/// The `μ_i` (square roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`)
/// are obtained as the singular values of `Xᵀ (σ_y⊗σ_y) X` with `ρ = X X†`,
/// which avoids taking square roots of tiny eigenvalues.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64> {
    let m = rho.0.matrix().hermitian_part().into_nalgebra();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("Hermitian eigensolver did not converge".into()))?;
    let mut x = eig.eigenvectors.clone();
    for (j, &p) in eig.eigenvalues.iter().enumerate() {
        let w = p.max(0.0).sqrt();
        x.column_mut(j).iter_mut().for_each(|z| *z *= w);
    }
    let tau = x.transpose() * spin_flip() * &x;
    let mut mu: Vec<f64> = tau.singular_values().iter().copied().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).clamp(0.0, 1.0))
}

/// Embeds the X-structured state with populations `(ρ₁₁, ρ_VV, 0, ρ₂₂)`
/// on `{gg, S, A, ee}` and coherence `ρ₁₂ = ⟨gg|ρ|ee⟩`.
pub fn x_structured_state(rho11: f64, rho22: f64, rho_vv: f64, rho12: C64) -> Result<TwoQubitState> {
    let mut m = ComplexMatrix::zeros(4, 4);
    m.set(0, 0, C64::new(rho11, 0.0))?;
    m.set(1, 1, C64::new(rho_vv, 0.0))?;
    m.set(3, 3, C64::new(rho22, 0.0))?;
    m.set(0, 3, rho12)?;
    m.set(3, 0, rho12.conj())?;
    TwoQubitState::from_collective_basis(&DensityMatrix::new(m)?)
}

/// Concurrence of an X-structured state from the closed-form square roots
/// `λ₁,₂ = √(|ρ₁₂|² ± 2|ρ₁₂|√(ρ₂₂ρ₁₁) + ρ₂₂ρ₁₁)` and `λ₃ = ρ_VV`.
pub fn concurrence_x_structure(rho11: f64, rho22: f64, rho_vv: f64, rho12: C64) -> Result<f64> {
    let total = rho11 + rho22 + rho_vv;
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("populations sum to {total}")));
    }
    if rho11 < -1e-12 || rho22 < -1e-12 || rho_vv < -1e-12 {
        return Err(Error::InvalidState("negative population".into()));
    }
    let a = rho12.norm();
    // −ρ₂₂(ρ₂₂ + ρ_VV − 1) = ρ₂₂ ρ₁₁
    let pp = (-rho22 * (rho22 + rho_vv - 1.0)).max(0.0);
    if a * a > pp + 1e-12 {
        return Err(Error::InvalidState(format!(
            "|ρ₁₂|² = {:.3e} exceeds ρ₁₁ρ₂₂ = {pp:.3e}",
            a * a
        )));
    }
    let cross = 2.0 * a * pp.sqrt();
    let lambda1 = (a * a + cross + pp).max(0.0).sqrt();
    let lambda2 = (a * a - cross + pp).max(0.0).sqrt();
    let lambda3 = rho_vv.max(0.0);
    let mut mu = [lambda1, lambda2, lambda3, 0.0];
    mu.sort_by(|x, y| y.total_cmp(x));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

/// Metastable concurrence of the two-photon driven qubit pair.
pub fn metastable_concurrence(gamma: f64, omega2p: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite() && omega2p.is_finite()) {
        return Err(Error::InvalidArgument(format!("Γ = {gamma}, Ω_2p = {omega2p}")));
    }
    let w = omega2p.abs();
    if gamma == 0.0 && w == 0.0 {
        return Err(Error::InvalidArgument("Γ and Ω_2p are both zero".into()));
    }
    let g2 = gamma * gamma;
    let root = (g2 + 4.0 * w * w).sqrt();
    let base = 2.0 * w * w + g2;
    let prefactor = 2.0 * SQRT_2 * w / (g2 + 8.0 * w * w);
    Ok(prefactor * ((base + gamma * root).sqrt() - (base - gamma * root).max(0.0).sqrt()))
}

/// Two-photon Rabi frequency maximizing [`metastable_concurrence`].
pub fn optimal_two_photon_drive(gamma: f64) -> f64 {
    gamma / (2.0 * SQRT_2)
}

/// Fidelity `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_with(rho: &DensityMatrix, psi: &[C64]) -> f64 {
    let mut acc = ZERO;
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            acc += psi[i].conj() * rho.element(i, j) * psi[j];
        }
    }
    acc.re
}

/// Smallest eigenvalue of the partial transpose; negative means entangled.
pub fn partial_transpose_min_eigenvalue(rho: &TwoQubitState) -> Result<f64> {
    let m = rho.0.matrix();
    let pt = ComplexMatrix::from_fn(4, 4, |r, c| {
        let (a, b) = (r / 2, r % 2);
        let (cc, d) = (c / 2, c % 2);
        m.get(a * 2 + d, cc * 2 + b)
    })?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}
