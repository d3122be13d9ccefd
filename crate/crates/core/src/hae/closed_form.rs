//! Closed-form adiabatic elimination of the resonant Λ system
//! (`Δ₁ = Δ₂ = 0`, `Γ_V = 0`).
//!
//! Eliminating the virtual coherences `ρ₁V`, `ρ₂V` first leaves a damped
//! two-photon Rabi problem for `(ρ₁₂, ρ₂₂)` driven by `ρ_VV`. Eliminating
//! that in turn gives a single slow equation `ρ̇_VV = Γ_c (ρ_VV^SS − ρ_VV)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, I, ONE, ZERO};
use crate::lindblad::DensityMatrix;
use crate::models::{LambdaParams, LAMBDA_1, LAMBDA_2, LAMBDA_V};

/// Largest allowed disagreement between the linear-solve and closed-form
/// quasi-steady values.
pub const QUASI_STEADY_AGREEMENT_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Which form of the reduced two-level equations to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EliminationForm {
    /// Exact result of eliminating the virtual coherences.
    #[default]
    Full,
    /// Leading order in `Γ/Δ_V` and `Ω/Δ_V`.
    Simplified,
}

/// Time derivatives `(dρ₁₂/dt, dρ₂₂/dt)` after eliminating the virtual
/// coherences, with `ρ_VV` held fixed.
pub fn first_elimination_rhs(
    p: &LambdaParams,
    rho12: C64,
    rho22: f64,
    rho_vv: f64,
    form: EliminationForm,
) -> Result<(C64, f64)> {
    p.require_closed_form()?;
    let (g, d, om2) = (p.gamma, p.delta_v, p.omega * p.omega);
    let o2 = p.omega2p();
    match form {
        EliminationForm::Full => {
            let a = g * g + 4.0 * d * d;
            let plus = real(g) + I * (2.0 * d);
            let minus = real(g) - I * (2.0 * d);
            let d12 = (real(-g / 2.0) + real(g) * o2 / (I * g - real(2.0 * d))) * rho12 - I * o2
                + (-real(2.0 * om2) / plus + I * o2) * rho22
                + (real(2.0 * om2) / plus + I * (2.0 * o2)) * rho_vv;
            let d22 = (-g - 4.0 * g * om2 / a) * rho22
                - (real(2.0 * om2) / plus * rho12).re
                - (real(2.0 * om2) / minus * rho12.conj()).re
                + 4.0 * g * om2 / a * rho_vv;
            Ok((d12, d22))
        }
        EliminationForm::Simplified => {
            let d12 = -rho12 * (g / 2.0) - I * o2 * (1.0 - 2.0 * rho22) + I * o2 * rho_vv;
            let d22 = -g * rho22 - 2.0 * o2 * rho12.im + g / d * o2 * rho_vv;
            Ok((d12, d22))
        }
    }
}

/// Linear system `M x + b(ρ_VV) = 0` for `x = (ρ₂₂, ρ₂₁, ρ₁₂)`, from setting
/// the full reduced equations to zero. Returns `(M, b₁, b₀)` with
/// `b(ρ_VV) = b₁ ρ_VV + b₀`.
pub fn quasi_steady_system(p: &LambdaParams) -> Result<(ComplexMatrix, DVector<C64>, DVector<C64>)> {
    p.require_closed_form()?;
    let (g, d, om2) = (p.gamma, p.delta_v, p.omega * p.omega);
    let o2 = p.omega2p();
    let a = g * g + 4.0 * d * d;
    let plus = real(g) + I * (2.0 * d);
    let minus = real(g) - I * (2.0 * d);
    let two_om2 = real(2.0 * om2);
    let m = ComplexMatrix::from_row_major(
        3,
        3,
        vec![
            real(-g * (1.0 + 4.0 * om2 / a)),
            -two_om2 / minus,
            -two_om2 / plus,
            -two_om2 / minus - I * o2,
            real(-g / 2.0) + real(g * o2) / (c(-2.0 * d, -g)),
            ZERO,
            -two_om2 / plus + I * o2,
            ZERO,
            real(-g / 2.0) + real(g * o2) / (c(-2.0 * d, g)),
        ],
    )?;
    let b1 = DVector::from_vec(vec![
        real(4.0 * g * om2 / a),
        two_om2 / minus - I * (2.0 * o2),
        two_om2 / plus + I * (2.0 * o2),
    ]);
    let b0 = DVector::from_vec(vec![ZERO, I * o2, -I * o2]);
    Ok((m, b1, b0))
}

/// Denominator shared by `Γ_c` and the quasi-steady closed forms.
fn rate_denominator(p: &LambdaParams) -> f64 {
    let (g, d, om) = (p.gamma, p.delta_v, p.omega);
    let (g2, d2, om2) = (g * g, d * d, om * om);
    g2 * g2 * d2 + 32.0 * om2 * om2 * (d2 + om2) + 4.0 * g2 * (d2 * d2 + 3.0 * d2 * om2 + om2 * om2)
}

/// Closed-form quasi-steady `(ρ₂₂, ρ₁₂)` as affine functions of `ρ_VV`.
pub fn quasi_steady_closed_form(p: &LambdaParams, rho_vv: f64) -> Result<(f64, C64)> {
    p.require_closed_form()?;
    let (g, d, om) = (p.gamma, p.delta_v, p.omega);
    let (d2, om2) = (d * d, om * om);
    let om4 = om2 * om2;
    let den = rate_denominator(p);
    let rho22 = (16.0 * om4 * (d2 + om2) + 4.0 * (g * g * d2 * om2 - 4.0 * om4 * (d2 + om2)) * rho_vv) / den;
    let g_4id = c(g, 4.0 * d);
    let constant = (c(0.0, -g * d * (g * g + 4.0 * d2)) - g_4id * (2.0 * g * om2) - real(8.0 * om4)) * (2.0 * om2);
    let slope = (g_4id * (2.0 * g * om2) + c(g, d) * c(2.0 * d, g) * (g * d) + real(12.0 * om4)) * (4.0 * om2);
    Ok((rho22, (constant + slope * rho_vv) / den))
}

/// Quasi-steady `(ρ₂₂, ρ₁₂)` at fixed `ρ_VV`, from the linear system, checked
/// against [`quasi_steady_closed_form`].
pub fn quasi_steady_real(p: &LambdaParams, rho_vv: f64) -> Result<(f64, C64)> {
    if !(p.gamma > 0.0) {
        return Err(Error::Singular {
            condition: f64::INFINITY,
            bound: linalg::DEFAULT_CONDITION_BOUND,
        });
    }
    let (m, b1, b0) = quasi_steady_system(p)?;
    let b = b1 * real(rho_vv) + b0;
    let x = linalg::solve_affine(&m, &b)?;
    let (rho22, rho12) = (x[0].re, x[2]);
    let (rho22_cf, rho12_cf) = quasi_steady_closed_form(p, rho_vv)?;
    let disagreement = (rho22 - rho22_cf).abs().max((rho12 - rho12_cf).norm());
    let scale = 1.0f64.max(rho22.abs()).max(rho12.norm());
    if !(disagreement <= QUASI_STEADY_AGREEMENT_TOL * scale) {
        return Err(Error::Residual {
            residual: disagreement,
            tolerance: QUASI_STEADY_AGREEMENT_TOL * scale,
        });
    }
    Ok((rho22, rho12))
}

/// Slow relaxation rate `Γ_c`: `(full, leading order 3ΓΩ²/(2Δ_V²))`.
pub fn relaxation_rate(p: &LambdaParams) -> Result<(f64, f64)> {
    p.require_closed_form()?;
    let (g, d, om) = (p.gamma, p.delta_v, p.omega);
    let om2 = om * om;
    let den = rate_denominator(p);
    let full = if den == 0.0 {
        0.0
    } else {
        4.0 * (12.0 * g * om2 * om2 * om2 + g * g * g * om2 * (d * d + 2.0 * om2)) / den
    };
    Ok((full, 3.0 * g * om2 / (2.0 * d * d)))
}

/// Steady virtual population `Ω²(Γ² + 4Ω²) / [2Ω²(Γ² + 6Ω²) + Γ²Δ_V²]`.
pub fn steady_virtual_population(p: &LambdaParams) -> Result<f64> {
    p.require_closed_form()?;
    let (g, d, om) = (p.gamma, p.delta_v, p.omega);
    let (g2, om2) = (g * g, om * om);
    let den = 2.0 * om2 * (g2 + 6.0 * om2) + g2 * d * d;
    if den == 0.0 {
        return Err(Error::Regime("steady state is not unique (Ω = 0 or Γ = 0)".into()));
    }
    Ok(om2 * (g2 + 4.0 * om2) / den)
}

/// The five independent density-matrix elements of the Λ system.
/// `rho2v` is `⟨2|ρ|V⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaElements {
    pub rho_vv: f64,
    pub rho22: f64,
    pub rho12: C64,
    pub rho1v: C64,
    pub rho2v: C64,
}

impl LambdaElements {
    pub fn rho11(&self) -> f64 {
        1.0 - self.rho22 - self.rho_vv
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(3, 3);
        let entries = [
            (LAMBDA_1, LAMBDA_1, real(self.rho11())),
            (LAMBDA_2, LAMBDA_2, real(self.rho22)),
            (LAMBDA_V, LAMBDA_V, real(self.rho_vv)),
            (LAMBDA_1, LAMBDA_2, self.rho12),
            (LAMBDA_1, LAMBDA_V, self.rho1v),
            (LAMBDA_2, LAMBDA_V, self.rho2v),
        ];
        for (i, j, z) in entries {
            m.set(i, j, z).expect("index in range");
            m.set(j, i, z.conj()).expect("index in range");
        }
        m
    }

    /// As a density matrix; fails if the elements are not a valid state.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix())
    }

    pub fn from_density_matrix(rho: &DensityMatrix) -> Self {
        Self {
            rho_vv: rho.population(LAMBDA_V),
            rho22: rho.population(LAMBDA_2),
            rho12: rho.element(LAMBDA_1, LAMBDA_2),
            rho1v: rho.element(LAMBDA_1, LAMBDA_V),
            rho2v: rho.element(LAMBDA_2, LAMBDA_V),
        }
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        [
            (self.rho_vv - other.rho_vv).abs(),
            (self.rho22 - other.rho22).abs(),
            (self.rho12 - other.rho12).norm(),
            (self.rho1v - other.rho1v).norm(),
            (self.rho2v - other.rho2v).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Exact steady state of the resonant Λ system.
pub fn steady_elements(p: &LambdaParams) -> Result<LambdaElements> {
    p.require_closed_form()?;
    let (g, d, om) = (p.gamma, p.delta_v, p.omega);
    let om2 = om * om;
    let den = g * g * (d * d + 2.0 * om2) + 12.0 * om2 * om2;
    if den == 0.0 {
        return Err(Error::Regime("steady state is not unique (Ω = 0 or Γ = 0)".into()));
    }
    Ok(LambdaElements {
        rho_vv: om2 * (g * g + 4.0 * om2) / den,
        rho22: 4.0 * om2 * om2 / den,
        rho12: c(0.0, -2.0 * g * d * om2 / den),
        rho1v: c(-g * d, 2.0 * om2) * (g * om / den),
        rho2v: c(0.0, -2.0 * g * om2 * om / den),
    })
}

/// Populations and coherence `(ρ₂₂^M, ρ₁₂^M)` of the metastable state.
pub fn metastable_elements(p: &LambdaParams) -> Result<(f64, C64)> {
    p.require_closed_form()?;
    let (g, o2) = (p.gamma, p.omega2p());
    let den = g * g + 8.0 * o2 * o2;
    if den == 0.0 {
        return Err(Error::Regime("Γ = 0 and Ω = 0".into()));
    }
    Ok((4.0 * o2 * o2 / den, c(0.0, -2.0 * g * o2 / den)))
}

/// `κ = ½√(Γ²/4 − 16Ω_2p²)`, imaginary in the underdamped regime.
pub fn kappa(p: &LambdaParams) -> C64 {
    let o2 = p.omega2p();
    real(p.gamma * p.gamma / 4.0 - 16.0 * o2 * o2).sqrt() * 0.5
}

/// Damped two-photon Rabi oscillation `(ρ₂₂, ρ₁₂)` from `|1⟩` with `ρ_VV = 0`.
pub fn two_level_transient(p: &LambdaParams, t: f64) -> Result<(f64, C64)> {
    p.require_closed_form()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t}")));
    }
    let (g, o2) = (p.gamma, p.omega2p());
    let den = g * g + 8.0 * o2 * o2;
    if den == 0.0 {
        return Ok((0.0, ZERO));
    }
    let k = kappa(p);
    let decay = -0.75 * g * t;
    // e^{−3Γt/4} cosh κt, e^{−3Γt/4} sinh κt and e^{−3Γt/4} t sinh(κt)/κ,
    // assembled from exponentials so that long times do not overflow.
    let up = (k * t + decay).exp();
    let down = (-k * t + decay).exp();
    let cosh = (up + down) * 0.5;
    let sinh = (up - down) * 0.5;
    let sinhc_t = if (k * t).norm() < 1e-4 {
        let z2 = (k * t) * (k * t);
        (ONE + z2 / 6.0 + z2 * z2 / 120.0) * t * decay.exp()
    } else {
        sinh / k
    };
    let rho22 = 4.0 * o2 * o2 / den * (ONE - cosh - sinhc_t * (3.0 * g / 4.0)).re;
    let bracket = (ONE - cosh - sinhc_t * (3.0 * g / 16.0)) * g - k * sinh;
    let rho12 = I * (-2.0 * o2 / den) * bracket;
    Ok((rho22, rho12))
}

/// Closed-form reduction of the Λ system at fixed parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct HaeResult {
    pub omega2p: f64,
    pub kappa: C64,
    pub gamma_c_full: f64,
    pub gamma_c_simple: f64,
    pub steady: LambdaElements,
    pub metastable: (f64, C64),
    params: LambdaParams,
    coefficients: [C64; 4],
}

/// Named element of [`LambdaElements`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    RhoVV,
    Rho22,
    Rho12,
    Rho1V,
    Rho2V,
}

impl Element {
    pub const ALL: [Element; 5] = [Element::RhoVV, Element::Rho22, Element::Rho12, Element::Rho1V, Element::Rho2V];

    pub fn name(self) -> &'static str {
        match self {
            Element::RhoVV => "rhoVV",
            Element::Rho22 => "rho22",
            Element::Rho12 => "rho12",
            Element::Rho1V => "rho1V",
            Element::Rho2V => "rho2V",
        }
    }

    pub fn of(self, e: &LambdaElements) -> C64 {
        match self {
            Element::RhoVV => real(e.rho_vv),
            Element::Rho22 => real(e.rho22),
            Element::Rho12 => e.rho12,
            Element::Rho1V => e.rho1v,
            Element::Rho2V => e.rho2v,
        }
    }
}

impl HaeResult {
    pub fn new(p: &LambdaParams) -> Result<Self> {
        p.require_closed_form()?;
        if !(p.gamma > 0.0) || p.omega == 0.0 {
            return Err(Error::Regime("the slow dynamics needs Γ > 0 and Ω ≠ 0".into()));
        }
        let (gamma_c_full, gamma_c_simple) = relaxation_rate(p)?;
        let steady = steady_elements(p)?;
        let (g, d, om) = (p.gamma, p.delta_v, p.omega);
        let (g2, d2, om2) = (g * g, d * d, om * om);
        let om4 = om2 * om2;
        let den = rate_denominator(p);
        let drive = g2 + 4.0 * om2;

        // ρ_x(t) = ρ_x^SS (1 + a_x e^{−Γ_c t}) for the four non-VV elements
        let a22 = real((4.0 * om4 * (g2 + 4.0 * d2) - g2 * g2 * d2 + 16.0 * om4 * om2) / den);
        let a12 = -I
            * (2.0 * om2 * drive)
            * (c(g, 4.0 * d) * (2.0 * g * om2) + c(g, d) * c(2.0 * d, g) * (g * d) + real(12.0 * om4))
            / (g * d * den);
        let a1v = (c(g2 + 2.0 * d2, 6.0 * g * d) * c(0.0, -2.0 * g * om2)
            + real(g2 * d * (g2 + 4.0 * d2))
            + c(3.0 * d, -2.0 * g) * (8.0 * om4))
            * (2.0 * om2 * drive)
            / (c(g * d, -2.0 * om2) * (g * den));
        let a2v = -(c(g, 2.0 * d) * (g2 * d2) - c(g, -6.0 * d) * (4.0 * om4) + c(0.0, 4.0 * g * d * om2) * c(g, d))
            * drive
            / (g * den);

        Ok(Self {
            omega2p: p.omega2p(),
            kappa: kappa(p),
            gamma_c_full,
            gamma_c_simple,
            steady,
            metastable: metastable_elements(p)?,
            params: *p,
            coefficients: [a22, a12, a1v, a2v],
        })
    }

    pub fn params(&self) -> &LambdaParams {
        &self.params
    }

    /// All five elements on the slow manifold at time `t`.
    pub fn elements_at(&self, t: f64) -> LambdaElements {
        let e = (-self.gamma_c_full * t).exp();
        let [a22, a12, a1v, a2v] = self.coefficients;
        let s = &self.steady;
        LambdaElements {
            rho_vv: s.rho_vv * (1.0 - e),
            rho22: (real(s.rho22) * (ONE + a22 * e)).re,
            rho12: s.rho12 * (ONE + a12 * e),
            rho1v: s.rho1v * (ONE + a1v * e),
            rho2v: s.rho2v * (ONE + a2v * e),
        }
    }

    /// Evaluator for one element as a function of time.
    pub fn evaluator(&self, element: Element) -> impl Fn(f64) -> C64 + Send + Sync + '_ {
        move |t| element.of(&self.elements_at(t))
    }
}

/// The five slow-manifold elements at time `t`, starting from `ρ_VV = 0`.
pub fn analytic_elements(p: &LambdaParams, t: f64) -> Result<LambdaElements> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t}")));
    }
    Ok(HaeResult::new(p)?.elements_at(t))
}
