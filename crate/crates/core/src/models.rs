//! The driven Λ system, its two-qubit realization and the chiral
//! waveguide pair.

use std::f64::consts::SQRT_2;

use crate::entanglement::TwoQubitState;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, I, ZERO};
use crate::lindblad::{DensityMatrix, LindbladModel};

/// Largest antisymmetric population that [`project_to_lambda`] drops.
pub const ANTISYMMETRIC_POPULATION_TOL: f64 = 1e-8;

pub const LAMBDA_LABELS: [&str; 3] = ["1", "2", "V"];
pub const TWO_QUBIT_LABELS: [&str; 4] = ["gg", "S", "A", "ee"];

pub const LAMBDA_1: usize = 0;
pub const LAMBDA_2: usize = 1;
pub const LAMBDA_V: usize = 2;

pub const GG: usize = 0;
pub const SYM: usize = 1;
pub const ANTI: usize = 2;
pub const EE: usize = 3;

/// Parameters of the Λ system: two real levels `1`, `2` coupled through a
/// far-detuned virtual level `V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaParams {
    pub delta1: f64,
    pub delta2: f64,
    pub delta_v: f64,
    pub omega: f64,
    pub gamma: f64,
    pub gamma_v: f64,
}

impl LambdaParams {
    pub fn new(delta1: f64, delta2: f64, delta_v: f64, omega: f64, gamma: f64, gamma_v: f64) -> Result<Self> {
        let p = Self {
            delta1,
            delta2,
            delta_v,
            omega,
            gamma,
            gamma_v,
        };
        p.validate()?;
        Ok(p)
    }

    /// `Δ₁ = Δ₂ = 0`, `Γ_V = 0`.
    pub fn resonant(delta_v: f64, omega: f64, gamma: f64) -> Self {
        Self {
            delta1: 0.0,
            delta2: 0.0,
            delta_v,
            omega,
            gamma,
            gamma_v: 0.0,
        }
    }

    pub fn with_gamma_v(self, gamma_v: f64) -> Self {
        Self { gamma_v, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta1, self.delta2, self.delta_v, self.omega, self.gamma, self.gamma_v];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite Λ parameters {self:?}")));
        }
        if self.gamma < 0.0 || self.gamma_v < 0.0 {
            return Err(Error::InvalidModel(format!(
                "decay rates must be non-negative (Γ = {}, Γ_V = {})",
                self.gamma, self.gamma_v
            )));
        }
        Ok(())
    }

    /// Two-photon Rabi frequency `Ω²/Δ_V`.
    pub fn omega2p(&self) -> f64 {
        self.omega * self.omega / self.delta_v
    }

    /// The closed-form results assume `Δ₁ = Δ₂ = 0`, `Γ_V = 0` and `Δ_V ≠ 0`.
    pub fn require_closed_form(&self) -> Result<()> {
        self.validate()?;
        if self.delta1 != 0.0 || self.delta2 != 0.0 {
            return Err(Error::Regime(format!(
                "Δ₁ = {}, Δ₂ = {} (closed forms need both zero)",
                self.delta1, self.delta2
            )));
        }
        if self.gamma_v != 0.0 {
            return Err(Error::Regime(format!("Γ_V = {} (closed forms need Γ_V = 0)", self.gamma_v)));
        }
        if self.delta_v == 0.0 {
            return Err(Error::Regime("Δ_V = 0".into()));
        }
        Ok(())
    }
}

/// Chiral waveguide pair with directional decay rates `γ_R`, `γ_L` and
/// qubits detuned by `±δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiralParams {
    pub omega: f64,
    pub delta: f64,
    pub gamma_r: f64,
    pub gamma_l: f64,
}

impl ChiralParams {
    pub fn new(omega: f64, delta: f64, gamma_r: f64, gamma_l: f64) -> Result<Self> {
        let p = Self {
            omega,
            delta,
            gamma_r,
            gamma_l,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from the collective rate `Γ` and the asymmetry `Δγ`.
    pub fn from_collective(omega: f64, delta: f64, gamma: f64, delta_gamma: f64) -> Result<Self> {
        let sum = gamma / 2.0;
        Self::new(omega, delta, (sum + delta_gamma) / 2.0, (sum - delta_gamma) / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.omega, self.delta, self.gamma_r, self.gamma_l].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite chiral parameters {self:?}")));
        }
        if self.gamma_r < 0.0 || self.gamma_l < 0.0 {
            return Err(Error::InvalidModel(format!(
                "directional rates must be non-negative (γ_R = {}, γ_L = {})",
                self.gamma_r, self.gamma_l
            )));
        }
        if self.gamma_r == 0.0 && self.gamma_l == 0.0 {
            return Err(Error::InvalidModel("γ_R and γ_L are both zero".into()));
        }
        Ok(())
    }

    /// `Γ = 2(γ_R + γ_L)`
    pub fn gamma_total(&self) -> f64 {
        2.0 * (self.gamma_r + self.gamma_l)
    }

    /// `Δγ = γ_R − γ_L`
    pub fn delta_gamma(&self) -> f64 {
        self.gamma_r - self.gamma_l
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Λ system on `{1, 2, V}`.
pub fn lambda_model(p: &LambdaParams) -> Result<LindbladModel> {
    p.validate()?;
    let mut h = ComplexMatrix::from_diagonal(&[real(p.delta1), real(p.delta2), real(p.delta_v)])?;
    for level in [LAMBDA_1, LAMBDA_2] {
        h.set(level, LAMBDA_V, real(p.omega))?;
        h.set(LAMBDA_V, level, real(p.omega))?;
    }
    let mut dissipators = vec![(p.gamma, ComplexMatrix::basis_op(3, LAMBDA_1, LAMBDA_2))];
    if p.gamma_v > 0.0 {
        dissipators.push((p.gamma_v, ComplexMatrix::basis_op(3, LAMBDA_1, LAMBDA_V)));
    }
    LindbladModel::new(labels(&LAMBDA_LABELS), h, dissipators)
}

/// Two qubits driven at the two-photon resonance, on `{gg, S, A, ee}`.
///
/// The couplings `gg ↔ S` and `S ↔ ee` carry the Λ-model `Ω` itself (the
/// collective `√2` is absorbed into it), so that restricting to
/// `{gg, S, ee}` gives [`lambda_model`] with `gg → 1`, `ee → 2`, `S → V`.
/// `Δ₁`, `Δ₂` and `Γ_V` map onto `gg`, `ee` and `S → gg` decay.
pub fn two_qubit_tpr_model(p: &LambdaParams) -> Result<LindbladModel> {
    p.validate()?;
    let mut h = ComplexMatrix::from_diagonal(&[real(p.delta1), real(p.delta_v), ZERO, real(p.delta2)])?;
    for level in [GG, EE] {
        h.set(level, SYM, real(p.omega))?;
        h.set(SYM, level, real(p.omega))?;
    }
    let mut dissipators = vec![(p.gamma, ComplexMatrix::basis_op(4, GG, EE))];
    if p.gamma_v > 0.0 {
        dissipators.push((p.gamma_v, ComplexMatrix::basis_op(4, GG, SYM)));
    }
    LindbladModel::new(labels(&TWO_QUBIT_LABELS), h, dissipators)
}

/// Index in `{gg, S, A, ee}` of each Λ level `1, 2, V`.
const LAMBDA_TO_COLLECTIVE: [usize; 3] = [GG, EE, SYM];

/// Restricts a two-qubit state to `{gg, S, ee}` and relabels it as a Λ state.
pub fn project_to_lambda(rho: &TwoQubitState) -> Result<DensityMatrix> {
    let m = rho.collective_basis_matrix();
    let population = m.get(ANTI, ANTI).re;
    if population.abs() > ANTISYMMETRIC_POPULATION_TOL {
        return Err(Error::LossyProjection { population });
    }
    let restricted = ComplexMatrix::from_fn(3, 3, |i, j| m.get(LAMBDA_TO_COLLECTIVE[i], LAMBDA_TO_COLLECTIVE[j]))?;
    let trace = restricted.trace().re;
    DensityMatrix::new(restricted.hermitian_part().scale_real(1.0 / trace))
}

/// Embeds a Λ state into `{gg, S, A, ee}` with no antisymmetric component.
pub fn embed_lambda(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 3 {
        return Err(Error::Dimension(format!("Λ state needs dimension 3, got {}", rho.dim())));
    }
    let mut m = ComplexMatrix::zeros(4, 4);
    for i in 0..3 {
        for j in 0..3 {
            m.set(LAMBDA_TO_COLLECTIVE[i], LAMBDA_TO_COLLECTIVE[j], rho.element(i, j))?;
        }
    }
    DensityMatrix::new(m)
}

/// Chiral waveguide pair on `{gg, S, A, ee}`.
///
/// The directional asymmetry enters as the Hermitian exchange
/// `⟨A|H|S⟩ = δ − iΔγ/2`; swapping `γ_R ↔ γ_L` flips its sign.
pub fn chiral_model(cp: &ChiralParams) -> Result<LindbladModel> {
    cp.validate()?;
    let drive = real(SQRT_2 * cp.omega);
    let exchange = real(cp.delta) - I * (cp.delta_gamma() / 2.0);
    let mut h = ComplexMatrix::zeros(4, 4);
    h.set(SYM, GG, drive)?;
    h.set(GG, SYM, drive)?;
    h.set(EE, SYM, drive)?;
    h.set(SYM, EE, drive)?;
    h.set(ANTI, SYM, exchange)?;
    h.set(SYM, ANTI, exchange.conj())?;
    let jump = &ComplexMatrix::basis_op(4, GG, SYM) + &ComplexMatrix::basis_op(4, SYM, EE);
    LindbladModel::new(labels(&TWO_QUBIT_LABELS), h, vec![(cp.gamma_total(), jump)])
}

/// Dark state `|A⟩⟨A|` of the two-qubit models.
pub fn antisymmetric_state() -> DensityMatrix {
    DensityMatrix::basis_state(4, ANTI).expect("index in range")
}
