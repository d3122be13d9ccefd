//! Lindblad generator, time evolution and steady states.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_k (γ_k/2) (2 O_k ρ O_k† − {O_k† O_k, ρ})
//! ```
//!
//! so a dissipator `(γ, O)` corresponds to the canonical jump operator `√γ O`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrator::{self, AdaptiveOptions};
use crate::real_form::RealAffine;
use crate::linalg::{
    self, hermitian_eigenvalues, kron, ComplexMatrix, ComplexVector, SolveOptions, C64, I, ONE, ZERO,
};

/// Hermiticity tolerance for Hamiltonians.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-12;

/// Threshold on `|Re λ|` used to count zero modes of the generator.
pub const ZERO_MODE_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Dissipator {
    pub rate: f64,
    pub jump: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    basis_labels: Vec<String>,
    hamiltonian: ComplexMatrix,
    dissipators: Vec<Dissipator>,
}

impl LindbladModel {
    pub fn new(
        basis_labels: Vec<String>,
        hamiltonian: ComplexMatrix,
        dissipators: Vec<(f64, ComplexMatrix)>,
    ) -> Result<Self> {
        let dim = hamiltonian.dim()?;
        if basis_labels.len() != dim {
            return Err(Error::InvalidModel(format!(
                "{} basis labels for a {dim}-dimensional Hamiltonian",
                basis_labels.len()
            )));
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > HAMILTONIAN_HERMITICITY_TOL {
            return Err(Error::InvalidModel(format!(
                "Hamiltonian is not Hermitian (‖H − H†‖ = {defect:.3e})"
            )));
        }
        let dissipators = dissipators
            .into_iter()
            .enumerate()
            .map(|(k, (rate, jump))| {
                if !(rate.is_finite() && rate >= 0.0) {
                    return Err(Error::InvalidModel(format!("dissipator {k} has rate {rate}")));
                }
                if jump.rows() != dim || jump.cols() != dim {
                    return Err(Error::InvalidModel(format!(
                        "dissipator {k} is {}x{}, expected {dim}x{dim}",
                        jump.rows(),
                        jump.cols()
                    )));
                }
                Ok(Dissipator { rate, jump })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            basis_labels,
            hamiltonian,
            dissipators,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.basis_labels.iter().position(|l| l == label)
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    /// The same model with basis state `k` moved to position `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let dim = self.dim();
        let mut seen = vec![false; dim];
        if perm.len() != dim || perm.iter().any(|&p| p >= dim || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{dim}")));
        }
        let p = ComplexMatrix::from_fn(dim, dim, |i, j| if perm[j] == i { ONE } else { ZERO })?;
        let conj = |m: &ComplexMatrix| &(&p * m) * &p.transpose();
        let mut labels = vec![String::new(); dim];
        for (k, &target) in perm.iter().enumerate() {
            labels[target] = self.basis_labels[k].clone();
        }
        Self::new(
            labels,
            conj(&self.hamiltonian),
            self.dissipators.iter().map(|d| (d.rate, conj(&d.jump))).collect(),
        )
    }
}

/// Density matrix: Hermitian, unit trace and positive semidefinite up to
/// numerical noise.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_FLOOR: f64 = -1e-8;
    /// Largest drift that [`DensityMatrix::project`] is allowed to remove.
    pub const PROJECTION_BOUND: f64 = 1e-8;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.dim()?;
        let defect = matrix.hermiticity_defect();
        if defect > Self::HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (‖ρ − ρ†‖ = {defect:.3e})")));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {:.12} {:+.3e}i", trace.re, trace.im)));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?.first().copied().unwrap_or(0.0);
        if min_eig < Self::POSITIVITY_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self(matrix))
    }

    /// Removes trace and Hermiticity drift below [`Self::PROJECTION_BOUND`].
    /// Larger drift is an error; positivity is checked, never repaired.
    pub fn project(matrix: ComplexMatrix, t: f64) -> Result<Self> {
        let hermiticity = matrix.hermiticity_defect();
        if !(hermiticity <= Self::PROJECTION_BOUND) {
            return Err(Error::InvariantDrift {
                quantity: "hermiticity",
                drift: hermiticity,
                t,
            });
        }
        let trace = matrix.trace();
        let trace_drift = (trace - ONE).norm();
        if !(trace_drift <= Self::PROJECTION_BOUND) {
            return Err(Error::InvariantDrift {
                quantity: "trace",
                drift: trace_drift,
                t,
            });
        }
        Self::new(matrix.hermitian_part().scale_real(1.0 / trace.re))
    }

    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Self::new(ComplexMatrix::outer(psi))
    }

    pub fn basis_state(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidArgument(format!("basis index {i} out of range for dimension {dim}")));
        }
        Ok(Self(ComplexMatrix::basis_op(dim, i, i)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.0.get(i, j)
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0.get(i, i).re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.0)?.first().copied().unwrap_or(0.0))
    }
}

/// Strictly increasing, non-negative sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidGrid(format!("time {t} is negative or non-finite")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("times not strictly increasing at {} -> {}", w[0], w[1])));
        }
        Ok(Self(times))
    }

    pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Self> {
        if points == 1 {
            return Self::new(vec![start]);
        }
        let step = (stop - start) / (points as f64 - 1.0);
        Self::new((0..points).map(|k| start + step * k as f64).collect())
    }

    /// `points` samples with logarithmic spacing between `start > 0` and `stop`.
    pub fn logspace(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start > 0.0 && stop > start) {
            return Err(Error::InvalidGrid(format!("log grid needs 0 < start < stop, got {start}, {stop}")));
        }
        if points == 1 {
            return Self::new(vec![start]);
        }
        let (a, b) = (start.ln(), stop.ln());
        let step = (b - a) / (points as f64 - 1.0);
        let mut times: Vec<f64> = (0..points).map(|k| (a + step * k as f64).exp()).collect();
        times[0] = start;
        times[points - 1] = stop;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl EvolutionResult {
    pub fn populations(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(i)).collect()
    }

    pub fn elements(&self, i: usize, j: usize) -> Vec<C64> {
        self.states.iter().map(|s| s.element(i, j)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum EvolutionMethod {
    /// `V e^{Λt} V⁻¹ vec(ρ₀)` from the generator's eigendecomposition.
    #[default]
    Spectral,
    /// Embedded Dormand–Prince 5(4) with adaptive step size.
    Adaptive(AdaptiveOptions),
}

/// Matrix of the generator acting on column-stacked density matrices.
pub fn build_liouvillian(model: &LindbladModel) -> ComplexMatrix {
    let d = model.dim();
    let id = ComplexMatrix::identity(d);
    let h = model.hamiltonian();
    let mut l = (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(-I);
    for Dissipator { rate, jump } in model.dissipators() {
        if *rate == 0.0 {
            continue;
        }
        let ndn = &jump.adjoint() * jump;
        let term = &(&kron(&jump.conj(), jump).scale_real(2.0) - &kron(&id, &ndn)) - &kron(&ndn.transpose(), &id);
        l = &l + &term.scale_real(rate / 2.0);
    }
    l
}

/// `dρ/dt` evaluated directly from the commutator and dissipator form.
pub fn rhs(model: &LindbladModel, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    generator_action(model, rho.matrix())
}

/// The generator applied to an arbitrary square matrix.
pub fn generator_action(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows() != model.dim() || rho.cols() != model.dim() {
        return Err(Error::Dimension(format!(
            "state is {}x{}, model dimension is {}",
            rho.rows(),
            rho.cols(),
            model.dim()
        )));
    }
    let mut out = model.hamiltonian().commutator(rho).scale(-I);
    for Dissipator { rate, jump } in model.dissipators() {
        if *rate == 0.0 {
            continue;
        }
        let adj = jump.adjoint();
        let ndn = &adj * jump;
        let sandwich = &(jump * rho) * &adj;
        let term = &sandwich.scale_real(2.0) - &ndn.anticommutator(rho);
        out = &out + &term.scale_real(rate / 2.0);
    }
    Ok(out)
}

/// Precomputed eigendecomposition of a generator for repeated propagation.
///
/// Propagation runs in the real coordinates of [`RealAffine`], so every
/// output is exactly Hermitian with unit trace. When the steady state is
/// unique the decomposition is taken around it (`x(t) = x* + e^{Gt}(x₀ − x*)`),
/// which keeps slow modes near zero from contaminating the stationary part.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    affine: RealAffine,
    eigenvalues: Vec<C64>,
    vectors: DMatrix<C64>,
    inverse: DMatrix<C64>,
    /// `x*` for the shifted form; `None` selects the augmented form
    /// `d/dt (x, 1) = [[G, c], [0, 0]] (x, 1)`.
    fixed_point: Option<DVector<f64>>,
}

impl SpectralPropagator {
    pub fn new(liouvillian: &ComplexMatrix) -> Result<Self> {
        let n = liouvillian.dim()?;
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n {
            return Err(Error::Dimension(format!("{n}x{n} is not a superoperator shape")));
        }
        let affine = RealAffine::from_liouvillian(liouvillian, dim, 0)?;
        let g = affine.generator();
        let m = g.nrows();
        let fixed_point = real_affine_fixed_point(g, affine.source());
        let system = match &fixed_point {
            Some(_) => g.map(|x| C64::new(x, 0.0)),
            None => {
                let mut aug = DMatrix::zeros(m + 1, m + 1);
                aug.view_mut((0, 0), (m, m)).copy_from(&g.map(|x| C64::new(x, 0.0)));
                for i in 0..m {
                    aug[(i, m)] = C64::new(affine.source()[i], 0.0);
                }
                aug
            }
        };
        let spectrum = linalg::eig(&ComplexMatrix::from_nalgebra(system)?)?;
        let inverse = linalg::inverse_with_bound(&spectrum.eigenvectors, 1e14).map_err(|e| {
            Error::Eigen(format!("generator is not numerically diagonalizable ({e}); use the adaptive method"))
        })?;
        Ok(Self {
            affine,
            eigenvalues: spectrum.eigenvalues,
            vectors: spectrum.eigenvectors.into_nalgebra(),
            inverse: inverse.into_nalgebra(),
            fixed_point,
        })
    }

    /// Expansion coefficients of the initial state in the eigenbasis.
    pub fn coefficients(&self, rho: &ComplexMatrix) -> ComplexVector {
        let x = self.affine.encode_matrix(rho);
        let shifted: DVector<C64> = match &self.fixed_point {
            Some(fp) => (x - fp).map(|v| C64::new(v, 0.0)),
            None => x.map(|v| C64::new(v, 0.0)).insert_row(x.len(), ONE),
        };
        &self.inverse * shifted
    }

    pub fn propagate(&self, coefficients: &ComplexVector, t: f64) -> Result<ComplexMatrix> {
        let scaled = DVector::from_fn(coefficients.len(), |k, _| coefficients[k] * (self.eigenvalues[k] * t).exp());
        let y = (&self.vectors * scaled).map(|z| z.re);
        let m = self.affine.params().len();
        let x = match &self.fixed_point {
            Some(fp) => fp + y,
            None => y.rows(0, m).into_owned(),
        };
        self.affine.decode(&x)
    }
}

/// `x* = −G⁻¹ c` when `G` is comfortably invertible.
fn real_affine_fixed_point(g: &DMatrix<f64>, c: &DVector<f64>) -> Option<DVector<f64>> {
    if g.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    let lu = g.clone().lu();
    let inv = lu.try_inverse()?;
    let one_norm = |m: &DMatrix<f64>| m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    if !(one_norm(g) * one_norm(&inv) <= linalg::DEFAULT_CONDITION_BOUND) {
        return None;
    }
    let lu = g.clone().lu();
    let mut x = lu.solve(&(-c))?;
    // one refinement step
    let r = g * &x + c;
    x -= &inv * r;
    Some(x)
}

pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    times: &TimeGrid,
    method: EvolutionMethod,
) -> Result<EvolutionResult> {
    if rho0.dim() != model.dim() {
        return Err(Error::Dimension(format!(
            "initial state has dimension {}, model has {}",
            rho0.dim(),
            model.dim()
        )));
    }
    let raw: Vec<ComplexMatrix> = match method {
        EvolutionMethod::Spectral => {
            let prop = SpectralPropagator::new(&build_liouvillian(model))?;
            let c0 = prop.coefficients(rho0.matrix());
            times.times().iter().map(|&t| prop.propagate(&c0, t)).collect::<Result<_>>()?
        }
        EvolutionMethod::Adaptive(opts) => {
            let f = |m: &ComplexMatrix| generator_action(model, m);
            integrator::integrate(f, rho0.matrix().clone(), times.times(), &opts)?
        }
    };
    let states = raw
        .into_iter()
        .zip(times.times())
        .map(|(m, &t)| DensityMatrix::project(m, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionResult {
        times: times.times().to_vec(),
        states,
    })
}

/// Number of generator eigenvalues with `|Re λ| ≤ threshold`.
pub fn zero_mode_count(liouvillian: &ComplexMatrix, threshold: f64) -> Result<usize> {
    Ok(linalg::eig(liouvillian)?
        .eigenvalues
        .iter()
        .filter(|z| z.re.abs() <= threshold)
        .count())
}

/// Unique steady state, from the generator with its first row replaced by
/// the trace functional.
pub fn steady_state(model: &LindbladModel) -> Result<DensityMatrix> {
    let l = build_liouvillian(model);
    let zeros = zero_mode_count(&l, ZERO_MODE_THRESHOLD)?;
    if zeros != 1 {
        return Err(Error::DegenerateSteadyState {
            count: zeros,
            threshold: ZERO_MODE_THRESHOLD,
        });
    }
    let d = model.dim();
    let n = d * d;
    let mut a = l.clone().into_nalgebra();
    a.row_mut(0).fill(ZERO);
    for i in 0..d {
        a[(0, i * d + i)] = ONE;
    }
    let a = ComplexMatrix::from_nalgebra(a)?;
    let mut b = DVector::from_element(n, ZERO);
    b[0] = -ONE;
    let x = linalg::solve_affine_with(&a, &b, &SolveOptions::default())?;
    let rho = ComplexMatrix::unvectorize(&x, d)?;
    let residual = l.mul_vec(&x).norm();
    if residual > 1e-10 * l.frobenius_norm().max(1.0) {
        return Err(Error::Residual {
            residual,
            tolerance: 1e-10 * l.frobenius_norm().max(1.0),
        });
    }
    DensityMatrix::project(rho, f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{lambda_model, LambdaParams};
    use crate::random_states::{random_density_matrix, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn decay_model(gamma: f64) -> LindbladModel {
        LindbladModel::new(
            vec!["1".into(), "2".into()],
            ComplexMatrix::zeros(2, 2),
            vec![(gamma, ComplexMatrix::basis_op(2, 0, 1))],
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Resonant Λ-model equations of motion written out by hand, indices 0=1, 1=2, 2=V.
    fn lambda_rhs_by_hand(p: &LambdaParams, rho: &ComplexMatrix) -> [C64; 5] {
        let (om, g, dv) = (p.omega, p.gamma, p.delta_v);
        let r = |i, j| rho.get(i, j);
        let (r1v, rv2, r12, r22, rvv) = (r(0, 2), r(2, 1), r(0, 1), r(1, 1), r(2, 2));
        [
            c(2.0 * om * (r1v - rv2).im, 0.0),
            c(-g * r22.re + 2.0 * om * rv2.im, 0.0),
            I * dv * r1v + I * om * (ONE + r12 - rvv * 2.0 - r22),
            -r12 * (g / 2.0) + I * om * (r1v - rv2),
            -(I * dv + g / 2.0) * rv2 - I * om * (r12 + r22 - rvv),
        ]
    }

    #[test]
    fn pure_decay_generator() {
        let gamma = 0.7;
        let l = build_liouvillian(&decay_model(gamma));
        let out = l.mul_vec(&ComplexMatrix::basis_op(2, 1, 1).vectorize());
        let expected = (&ComplexMatrix::basis_op(2, 0, 0) - &ComplexMatrix::basis_op(2, 1, 1)).scale_real(gamma);
        assert!(ComplexMatrix::unvectorize(&out, 2).unwrap().approx_eq(&expected, 1e-15));
    }

    #[test]
    fn hamiltonian_only_generator_is_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 3);
        let model = LindbladModel::new(vec!["a".into(), "b".into(), "c".into()], h.clone(), vec![]).unwrap();
        let rho = random_density_matrix(&mut rng, 3);
        let via_l = ComplexMatrix::unvectorize(&build_liouvillian(&model).mul_vec(&rho.matrix().vectorize()), 3).unwrap();
        assert!(via_l.approx_eq(&h.commutator(rho.matrix()).scale(-I), 1e-14));
    }

    #[test]
    fn lambda_generator_matches_hand_coded_equations() {
        let p = LambdaParams::resonant(1.0, 0.01, 1e-5);
        let model = lambda_model(&p).unwrap();
        let l = build_liouvillian(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let rho = random_density_matrix(&mut rng, 3);
            let direct = rhs(&model, &rho).unwrap();
            let vectorized = ComplexMatrix::unvectorize(&l.mul_vec(&rho.matrix().vectorize()), 3).unwrap();
            let oracle = lambda_rhs_by_hand(&p, rho.matrix());
            for (m, name) in [(&direct, "rhs"), (&vectorized, "liouvillian")] {
                let got = [m.get(2, 2), m.get(1, 1), m.get(0, 2), m.get(0, 1), m.get(2, 1)];
                for k in 0..5 {
                    assert!((got[k] - oracle[k]).norm() < 1e-12, "{name} component {k}");
                }
            }
            assert!(direct.approx_eq(&vectorized, 1e-12));
            assert!(direct.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn rhs_drive_term_from_ground_state() {
        let p = LambdaParams::resonant(1.0, 0.02, 1e-3);
        let model = lambda_model(&p).unwrap();
        let rho = DensityMatrix::basis_state(3, 0).unwrap();
        let d = rhs(&model, &rho).unwrap();
        assert!((d.get(0, 2) - I * p.omega).norm() < 1e-15);
    }

    #[test]
    fn rhs_vanishes_at_steady_state() {
        let p = LambdaParams::resonant(1.0, 0.01, 1e-4);
        let model = lambda_model(&p).unwrap();
        let ss = steady_state(&model).unwrap();
        assert!(rhs(&model, &ss).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn model_validation() {
        let h = ComplexMatrix::from_row_major(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(LindbladModel::new(vec!["a".into(), "b".into()], h, vec![]).is_err());
        let z = ComplexMatrix::zeros(2, 2);
        assert!(LindbladModel::new(vec!["a".into(), "b".into()], z.clone(), vec![(-1.0, z.clone())]).is_err());
        assert!(LindbladModel::new(vec!["a".into(), "b".into()], z.clone(), vec![(1.0, ComplexMatrix::zeros(3, 3))]).is_err());
        assert!(LindbladModel::new(vec!["a".into()], z, vec![]).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        let neg = ComplexMatrix::from_real_row_major(2, 2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityMatrix::new(neg).is_err());
        let nonherm = ComplexMatrix::from_real_row_major(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(DensityMatrix::new(nonherm).is_err());
        let drift = ComplexMatrix::from_real_row_major(2, 2, &[0.5, 0.0, 0.0, 0.5 + 1e-6]).unwrap();
        assert!(matches!(DensityMatrix::project(drift, 1.0), Err(Error::InvariantDrift { quantity: "trace", .. })));
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![-1.0]).is_err());
        let g = TimeGrid::logspace(1e-2, 1e3, 6).unwrap();
        assert!((g.times()[1] - 1e-1).abs() < 1e-15);
        assert_eq!(g.last(), 1e3);
    }

    #[test]
    fn pure_exponential_decay_both_methods() {
        let gamma = 1.3;
        let model = decay_model(gamma);
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        let grid = TimeGrid::linspace(0.0, 5.0, 26).unwrap();
        let methods = [
            EvolutionMethod::Spectral,
            EvolutionMethod::Adaptive(AdaptiveOptions::default()),
        ];
        for method in methods {
            let res = evolve(&model, &rho0, &grid, method).unwrap();
            for (t, p) in res.times.iter().zip(res.populations(1)) {
                assert!((p - (-gamma * t).exp()).abs() < 1e-9, "{method:?} t={t}");
            }
        }
    }

    #[test]
    fn pure_decay_in_lambda_model_with_zero_drive() {
        let p = LambdaParams::resonant(1.0, 0.0, 1e-2);
        let model = lambda_model(&p).unwrap();
        let rho0 = DensityMatrix::basis_state(3, 1).unwrap();
        let grid = TimeGrid::linspace(0.0, 300.0, 31).unwrap();
        let res = evolve(&model, &rho0, &grid, EvolutionMethod::Spectral).unwrap();
        for (t, p22) in res.times.iter().zip(res.populations(1)) {
            assert!((p22 - (-1e-2 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_and_adaptive_agree_on_lambda_model() {
        // trajectory-figure parameters keep the explicit integrator affordable
        let p = LambdaParams::resonant(1.0, 0.1, 1e-3);
        let model = lambda_model(&p).unwrap();
        let rho0 = DensityMatrix::basis_state(3, 0).unwrap();
        let grid = TimeGrid::linspace(0.0, 10.0 / p.gamma, 101).unwrap();
        let a = evolve(&model, &rho0, &grid, EvolutionMethod::Spectral).unwrap();
        let opts = AdaptiveOptions {
            rtol: 1e-11,
            atol: 1e-13,
            ..AdaptiveOptions::default()
        };
        let b = evolve(&model, &rho0, &grid, EvolutionMethod::Adaptive(opts)).unwrap();
        let sup = a
            .states
            .iter()
            .zip(&b.states)
            .map(|(x, y)| (x.matrix() - y.matrix()).max_abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-7, "sup-norm difference {sup:e}");
    }

    #[test]
    fn steady_state_examples() {
        // a small virtual-state decay makes the Ω = 0 steady state unique
        let p = LambdaParams::new(0.0, 0.0, 1.0, 0.0, 1e-3, 1e-4).unwrap();
        let ss = steady_state(&lambda_model(&p).unwrap()).unwrap();
        assert!(ss.matrix().approx_eq(&ComplexMatrix::basis_op(3, 0, 0), 1e-10));

        let p = LambdaParams::resonant(1.0, 0.05, 1e-6);
        let ss = steady_state(&lambda_model(&p).unwrap()).unwrap();
        assert!((ss.population(2) - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn steady_state_reports_degenerate_manifold() {
        // Ω = 0 and Γ_V = 0: |V⟩⟨V| and |1⟩⟨1| are both stationary and the
        // 1–V coherences oscillate undamped
        let p = LambdaParams::resonant(1.0, 0.0, 1e-3);
        match steady_state(&lambda_model(&p).unwrap()) {
            Err(Error::DegenerateSteadyState { count, .. }) => assert!(count >= 2),
            other => panic!("expected degenerate steady state, got {other:?}"),
        }
    }

    #[test]
    fn permuted_model_has_same_dynamics() {
        let p = LambdaParams::resonant(1.0, 0.05, 1e-2);
        let model = lambda_model(&p).unwrap();
        let perm = [2, 0, 1];
        let q = model.permuted(&perm).unwrap();
        assert_eq!(q.basis_labels(), &["2".to_string(), "V".into(), "1".into()]);
        let a = steady_state(&model).unwrap();
        let b = steady_state(&q).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.element(i, j) - b.element(perm[i], perm[j])).norm() < 1e-10);
            }
        }
        assert!(model.permuted(&[0, 0, 1]).is_err());
    }
}
