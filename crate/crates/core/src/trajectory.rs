//! Quantum-jump unraveling of the master equation.
//!
//! Between jumps a state evolves under `H_eff = H − (i/2) Σ_k γ_k O_k†O_k`
//! and loses norm. With the waiting-time algorithm a jump happens when
//! `‖ψ‖²` falls to a uniform random threshold; the channel is drawn with
//! weights `γ_k ‖O_k ψ‖²`.
//!
//! Seeds: a trajectory with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! on stream 0. Trajectory `k` of an ensemble with base seed `s` uses the
//! same generator on stream `k`, so ensembles are reproducible and
//! independent of the number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64, I};
use crate::lindblad::{DensityMatrix, EvolutionResult, LindbladModel, TimeGrid};

/// Largest single-step no-jump probability loss accepted for a step size.
pub const MAX_STEP_JUMP_PROBABILITY: f64 = 0.1;

/// Jump times are located to this fraction of the step size.
pub const JUMP_TIME_RESOLUTION: f64 = 1e-6;

/// Below this survival probability the no-jump state is not normalizable.
pub const TRACE_UNDERFLOW: f64 = 1e-300;

/// Trajectories averaged together before being added to the running sum.
const ENSEMBLE_BLOCK: usize = 64;

/// `H − (i/2) Σ_k γ_k O_k†O_k`.
pub fn effective_hamiltonian(model: &LindbladModel) -> ComplexMatrix {
    let mut h = model.hamiltonian().clone();
    for d in model.dissipators() {
        let decay = &d.jump.adjoint() * &d.jump;
        h = &h - &decay.scale(I * (d.rate / 2.0));
    }
    h
}

/// Exact propagator `e^{−i H_eff t}` through the eigendecomposition of
/// `H_eff`, falling back to a matrix exponential per call when `H_eff` is
/// not numerically diagonalizable.
#[derive(Clone, Debug)]
struct NoJumpPropagator {
    h_eff: ComplexMatrix,
    diag: Option<(Vec<C64>, DMatrix<C64>, DMatrix<C64>)>,
}

impl NoJumpPropagator {
    fn new(model: &LindbladModel) -> Result<Self> {
        let h_eff = effective_hamiltonian(model);
        let diag = linalg::eig(&h_eff).ok().and_then(|s| {
            let inv = linalg::inverse_with_bound(&s.eigenvectors, 1e10).ok()?;
            Some((s.eigenvalues, s.eigenvectors.into_nalgebra(), inv.into_nalgebra()))
        });
        Ok(Self { h_eff, diag })
    }

    fn matrix(&self, t: f64) -> DMatrix<C64> {
        match &self.diag {
            Some((values, w, w_inv)) => {
                let phases = DVector::from_iterator(values.len(), values.iter().map(|e| (-I * *e * t).exp()));
                w * DMatrix::from_diagonal(&phases) * w_inv
            }
            None => (self.h_eff.as_nalgebra() * (-I * t)).exp(),
        }
    }

    fn apply(&self, psi: &ComplexVector, t: f64) -> ComplexVector {
        match &self.diag {
            Some((values, w, w_inv)) => {
                let mut c = w_inv * psi;
                for (ck, e) in c.iter_mut().zip(values) {
                    *ck *= (-I * *e * t).exp();
                }
                w * c
            }
            None => self.matrix(t) * psi,
        }
    }

    /// Largest probability of a jump within one step of length `dt`.
    fn max_jump_probability(&self, dt: f64) -> f64 {
        let smallest = self.matrix(dt).singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        1.0 - smallest * smallest
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub channel: usize,
    /// Normalized state right after the jump.
    pub state: ComplexVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub times: Vec<f64>,
    /// Normalized state at each sample time.
    pub states: Vec<ComplexVector>,
    pub jumps: Vec<Jump>,
}

fn check_initial_state(model: &LindbladModel, psi0: &ComplexVector) -> Result<()> {
    if psi0.len() != model.dim() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, model has dimension {}",
            psi0.len(),
            model.dim()
        )));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("initial state has norm {norm}")));
    }
    Ok(())
}

fn step_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max = {t_max}, dt = {dt}")));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((0..=steps).map(|k| (k as f64 * dt).min(t_max)).collect())
}

/// Precomputed pieces shared by all trajectories of one model.
struct Unraveling {
    propagator: NoJumpPropagator,
    channels: Vec<ComplexMatrix>,
    dt: f64,
}

impl Unraveling {
    fn new(model: &LindbladModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {dt}")));
        }
        let propagator = NoJumpPropagator::new(model)?;
        let probability = propagator.max_jump_probability(dt);
        if probability >= MAX_STEP_JUMP_PROBABILITY {
            return Err(Error::StepTooCoarse {
                probability,
                limit: MAX_STEP_JUMP_PROBABILITY,
            });
        }
        let channels = model
            .dissipators()
            .iter()
            .map(|d| d.jump.scale_real(d.rate.sqrt()))
            .collect();
        Ok(Self {
            propagator,
            channels,
            dt,
        })
    }

    fn threshold(rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let r: f64 = rng.random();
            if r > 0.0 {
                return r;
            }
        }
    }

    /// Runs one trajectory through the sample times, calling `sample` with
    /// the normalized state at each of them.
    fn run(
        &self,
        psi0: &ComplexVector,
        times: &[f64],
        rng: &mut ChaCha8Rng,
        mut sample: impl FnMut(usize, &ComplexVector),
    ) -> Result<Vec<Jump>> {
        let mut psi = psi0.clone();
        let mut threshold = Self::threshold(rng);
        let mut jumps = Vec::new();
        let mut t = times[0];
        sample(0, &psi.unscale(psi.norm()));
        for (k, &target) in times.iter().enumerate().skip(1) {
            while t < target {
                let h = (target - t).min(self.dt);
                let candidate = self.propagator.apply(&psi, h);
                if candidate.norm_squared() > threshold {
                    psi = candidate;
                    t = if target - t <= self.dt { target } else { t + h };
                    continue;
                }
                let (tau, at_jump) = self.locate_jump(&psi, h, threshold);
                let time = t + tau;
                let channel = self.select_channel(&at_jump, rng)?;
                let jumped = self.channels[channel].mul_vec(&at_jump);
                let norm = jumped.norm();
                if !(norm > 0.0) {
                    return Err(Error::ZeroNormJump { channel });
                }
                psi = jumped.unscale(norm);
                jumps.push(Jump {
                    time,
                    channel,
                    state: psi.clone(),
                });
                threshold = Self::threshold(rng);
                t = time;
            }
            sample(k, &psi.unscale(psi.norm()));
        }
        Ok(jumps)
    }

    /// Bisection for the first `τ ∈ (0, h]` with `‖e^{−iH_eff τ}ψ‖² ≤ r`.
    fn locate_jump(&self, psi: &ComplexVector, h: f64, threshold: f64) -> (f64, ComplexVector) {
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > JUMP_TIME_RESOLUTION * self.dt {
            let mid = 0.5 * (lo + hi);
            if self.propagator.apply(psi, mid).norm_squared() > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (hi, self.propagator.apply(psi, hi))
    }

    fn select_channel(&self, psi: &ComplexVector, rng: &mut ChaCha8Rng) -> Result<usize> {
        let weights: Vec<f64> = self.channels.iter().map(|c| c.mul_vec(psi).norm_squared()).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroNormJump { channel: 0 });
        }
        let mut u = rng.random::<f64>() * total;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                return Ok(k);
            }
            u -= w;
        }
        // rounding left u marginally above the last weight
        Ok(weights.iter().rposition(|w| *w > 0.0).expect("total weight is positive"))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One trajectory on the grid `0, dt, 2dt, …, t_max`.
pub fn sample_trajectory(
    model: &LindbladModel,
    psi0: &ComplexVector,
    t_max: f64,
    dt: f64,
    seed: u64,
) -> Result<TrajectoryRecord> {
    sample_trajectory_stream(model, psi0, t_max, dt, seed, 0)
}

/// Trajectory `stream` of the ensemble with base seed `seed`.
pub fn sample_trajectory_stream(
    model: &LindbladModel,
    psi0: &ComplexVector,
    t_max: f64,
    dt: f64,
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    check_initial_state(model, psi0)?;
    let times = step_grid(t_max, dt)?;
    let unraveling = Unraveling::new(model, dt)?;
    let mut rng = stream_rng(seed, stream);
    let mut states = Vec::with_capacity(times.len());
    let jumps = unraveling.run(psi0, &times, &mut rng, |_, psi| states.push(psi.clone()))?;
    Ok(TrajectoryRecord {
        seed,
        stream,
        times,
        states,
        jumps,
    })
}

/// Ensemble statistics on a set of sample times.
#[derive(Clone, Debug)]
pub struct EnsembleAverage {
    pub evolution: EvolutionResult,
    /// Fraction of trajectories without any jump up to each sample time.
    pub jump_free_fraction: Vec<f64>,
    pub n_traj: usize,
}

/// Mean of `|ψ⟩⟨ψ|` over `n_traj` trajectories on the grid `0, dt, …, t_max`.
pub fn ensemble_average(
    model: &LindbladModel,
    psi0: &ComplexVector,
    n_traj: usize,
    t_max: f64,
    dt: f64,
    base_seed: u64,
) -> Result<EvolutionResult> {
    let grid = TimeGrid::new(step_grid(t_max, dt)?)?;
    Ok(ensemble_average_on(model, psi0, n_traj, &grid, dt, base_seed)?.evolution)
}

/// Mean of `|ψ⟩⟨ψ|` at the times of `grid` (which must start at 0), with
/// trajectories stepped at most `dt` at a time.
pub fn ensemble_average_on(
    model: &LindbladModel,
    psi0: &ComplexVector,
    n_traj: usize,
    grid: &TimeGrid,
    dt: f64,
    base_seed: u64,
) -> Result<EnsembleAverage> {
    check_initial_state(model, psi0)?;
    if n_traj == 0 {
        return Err(Error::InvalidArgument("n_traj must be at least 1".into()));
    }
    if grid.times()[0] != 0.0 {
        return Err(Error::InvalidGrid("ensemble grid must start at t = 0".into()));
    }
    let unraveling = Unraveling::new(model, dt)?;
    let times = grid.times();
    let dim = model.dim();
    let mut sums = vec![DMatrix::<C64>::zeros(dim, dim); times.len()];
    let mut jump_free = vec![0usize; times.len()];

    // Trajectories run in parallel; partial sums are combined in trajectory
    // order so that the result does not depend on scheduling.
    let mut start = 0;
    while start < n_traj {
        let end = (start + ENSEMBLE_BLOCK).min(n_traj);
        let partials: Vec<Result<(Vec<DMatrix<C64>>, Vec<bool>)>> = (start..end)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(base_seed, k as u64);
                let mut projectors = Vec::with_capacity(times.len());
                let jumps = unraveling.run(psi0, times, &mut rng, |_, psi| projectors.push(psi * psi.adjoint()))?;
                let first_jump = jumps.first().map(|j| j.time).unwrap_or(f64::INFINITY);
                let free = times.iter().map(|&t| t < first_jump).collect();
                Ok((projectors, free))
            })
            .collect();
        for partial in partials {
            let (projectors, free) = partial?;
            for (acc, p) in sums.iter_mut().zip(projectors) {
                *acc += p;
            }
            for (count, f) in jump_free.iter_mut().zip(free) {
                *count += f as usize;
            }
        }
        start = end;
    }

    let scale = C64::new(1.0 / n_traj as f64, 0.0);
    let states = sums
        .into_iter()
        .zip(times)
        .map(|(m, &t)| DensityMatrix::project(ComplexMatrix::from_nalgebra(m * scale)?, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleAverage {
        evolution: EvolutionResult {
            times: times.to_vec(),
            states,
        },
        jump_free_fraction: jump_free.iter().map(|&c| c as f64 / n_traj as f64).collect(),
        n_traj,
    })
}

#[derive(Clone, Debug)]
pub struct NoJumpResult {
    pub times: Vec<f64>,
    /// Probability of no jump up to each time.
    pub survival: Vec<f64>,
    pub conditional_states: Vec<DensityMatrix>,
}

/// Deterministic evolution conditioned on no jump:
/// `ρ̃(t) = e^{−iH_eff t} ρ₀ e^{iH_eff† t}`, survival `tr ρ̃`.
pub fn no_jump_evolution(model: &LindbladModel, rho0: &DensityMatrix, times: &TimeGrid) -> Result<NoJumpResult> {
    if rho0.dim() != model.dim() {
        return Err(Error::Dimension(format!(
            "initial state has dimension {}, model has {}",
            rho0.dim(),
            model.dim()
        )));
    }
    let propagator = NoJumpPropagator::new(model)?;
    let rho = rho0.matrix().as_nalgebra();
    let mut survival = Vec::with_capacity(times.len());
    let mut conditional_states = Vec::with_capacity(times.len());
    for &t in times.times() {
        let u = propagator.matrix(t);
        let unnormalized = &u * rho * u.adjoint();
        let trace = unnormalized.trace().re;
        if !(trace >= TRACE_UNDERFLOW) {
            return Err(Error::TraceUnderflow { trace, t });
        }
        let conditional = ComplexMatrix::from_nalgebra(unnormalized / C64::new(trace, 0.0))?;
        conditional_states.push(DensityMatrix::project(conditional, t)?);
        survival.push(trace.min(1.0));
    }
    Ok(NoJumpResult {
        times: times.times().to_vec(),
        survival,
        conditional_states,
    })
}

/// Normalized right eigenvector of `H_eff` with the slowest decay, as a
/// projector. The no-jump state approaches it at long times.
pub fn dominant_no_jump_state(model: &LindbladModel) -> Result<DensityMatrix> {
    let spectrum = linalg::eig(&effective_hamiltonian(model))?;
    let k = (0..spectrum.eigenvalues.len())
        .max_by(|&a, &b| spectrum.eigenvalues[a].im.total_cmp(&spectrum.eigenvalues[b].im))
        .ok_or_else(|| Error::Dimension("empty model".into()))?;
    let v = spectrum.eigenvectors.as_nalgebra().column(k).into_owned();
    DensityMatrix::pure(&v.unscale(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::lindblad::{evolve, EvolutionMethod};
    use crate::models::{lambda_model, LambdaParams, LAMBDA_1, LAMBDA_2, LAMBDA_V};
    use crate::random_states::{random_hermitian, random_matrix, random_pure_state};

    fn ket(dim: usize, i: usize) -> ComplexVector {
        let mut v = DVector::from_element(dim, ZERO);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    fn decay(gamma: f64) -> LindbladModel {
        LindbladModel::new(
            vec!["1".into(), "2".into()],
            ComplexMatrix::zeros(2, 2),
            vec![(gamma, ComplexMatrix::basis_op(2, 0, 1))],
        )
        .unwrap()
    }

    #[test]
    fn effective_hamiltonian_of_lambda_model() {
        let p = LambdaParams::resonant(1.0, 0.1, 1e-3).with_gamma_v(2e-4);
        let model = lambda_model(&p).unwrap();
        let h = effective_hamiltonian(&model);
        let anti = (&h - &h.adjoint()).scale_real(0.5);
        let mut expected = ComplexMatrix::zeros(3, 3);
        expected.set(LAMBDA_2, LAMBDA_2, C64::new(0.0, -5e-4)).unwrap();
        expected.set(LAMBDA_V, LAMBDA_V, C64::new(0.0, -1e-4)).unwrap();
        assert!(anti.approx_eq(&expected, 1e-18));
        let herm = (&h + &h.adjoint()).scale_real(0.5);
        assert!(herm.approx_eq(model.hamiltonian(), 1e-18));
    }

    #[test]
    fn closed_system_has_no_jumps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(&mut rng, 3);
        let model = LindbladModel::new(vec!["a".into(), "b".into(), "c".into()], h.clone(), vec![]).unwrap();
        assert!(effective_hamiltonian(&model).approx_eq(&h, 0.0));
        let psi0 = random_pure_state(&mut rng, 3);
        let rec = sample_trajectory(&model, &psi0, 5.0, 0.5, 1).unwrap();
        assert!(rec.jumps.is_empty());
        let u = NoJumpPropagator::new(&model).unwrap();
        for (t, psi) in rec.times.iter().zip(&rec.states) {
            let exact = (h.as_nalgebra() * (-I * *t)).exp() * &psi0;
            assert!((psi - exact).norm() < 1e-10);
            assert!((u.apply(&psi0, *t) - psi).norm() < 1e-10);
        }
    }

    #[test]
    fn decay_rates_from_effective_hamiltonian_are_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let d = 4;
            let labels = (0..d).map(|k| k.to_string()).collect();
            let ops = (0..3).map(|k| (0.1 * (k + 1) as f64, random_matrix(&mut rng, d))).collect();
            let model = LindbladModel::new(labels, random_hermitian(&mut rng, d), ops).unwrap();
            let decomposition = linalg::eig(&effective_hamiltonian(&model)).unwrap();
            assert!(decomposition.eigenvalues.iter().all(|e| -2.0 * e.im >= -1e-12));
        }
    }

    #[test]
    fn coarse_step_is_rejected() {
        let model = decay(1.0);
        assert!(matches!(
            sample_trajectory(&model, &ket(2, 1), 10.0, 0.5, 0),
            Err(Error::StepTooCoarse { .. })
        ));
        assert!(sample_trajectory(&model, &ket(2, 1), 10.0, 0.05, 0).is_ok());
    }

    #[test]
    fn trajectories_are_deterministic_and_normalized() {
        let model = lambda_model(&LambdaParams::resonant(1.0, 0.1, 1e-3)).unwrap();
        let a = sample_trajectory(&model, &ket(3, LAMBDA_1), 2e4, 10.0, 42).unwrap();
        let b = sample_trajectory(&model, &ket(3, LAMBDA_1), 2e4, 10.0, 42).unwrap();
        assert_eq!(a, b);
        assert!(!a.jumps.is_empty());
        for s in &a.states {
            assert!((s.norm() - 1.0).abs() < 1e-9);
        }
        for w in a.jumps.windows(2) {
            assert!(w[0].time < w[1].time);
        }
        assert!(a.jumps.iter().all(|j| j.time >= 0.0 && j.time <= 2e4));
    }

    #[test]
    fn jump_resets_to_ground_state() {
        let model = lambda_model(&LambdaParams::resonant(1.0, 0.1, 1e-3)).unwrap();
        let rec = sample_trajectory(&model, &ket(3, LAMBDA_1), 2e4, 1.0, 7).unwrap();
        let jump = &rec.jumps[0];
        // the state right after the jump is |1⟩; check at the next sample
        let k = rec.times.iter().position(|&t| t >= jump.time).unwrap();
        let u = NoJumpPropagator::new(&model).unwrap();
        let expected = u.apply(&ket(3, LAMBDA_1), rec.times[k] - jump.time);
        let expected = expected.unscale(expected.norm());
        let overlap = (expected.adjoint() * &rec.states[k])[0].norm();
        assert!((overlap - 1.0).abs() < 1e-8);
        for j in &rec.jumps {
            assert_eq!(j.state[LAMBDA_V], ZERO);
            assert_eq!(j.state[LAMBDA_2], ZERO);
            assert!((j.state[LAMBDA_1].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn waiting_times_are_exponential() {
        let gamma = 1.0;
        let model = decay(gamma);
        let n = 10_000;
        let unraveling = Unraveling::new(&model, 0.05).unwrap();
        let times = step_grid(30.0, 0.05).unwrap();
        let mut waits: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(5, k as u64);
                let jumps = unraveling.run(&ket(2, 1), &times, &mut rng, |_, _| {}).unwrap();
                jumps.first().map(|j| j.time).unwrap_or(f64::INFINITY)
            })
            .collect();
        waits.sort_by(f64::total_cmp);
        let ks = waits
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let cdf = 1.0 - (-gamma * w).exp();
                (cdf - i as f64 / n as f64).abs().max((cdf - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS distance {ks}");
    }

    #[test]
    fn single_trajectory_ensemble_is_its_projectors() {
        let model = lambda_model(&LambdaParams::resonant(1.0, 0.1, 1e-3)).unwrap();
        let psi0 = ket(3, LAMBDA_1);
        let rec = sample_trajectory_stream(&model, &psi0, 5e3, 10.0, 3, 0).unwrap();
        let avg = ensemble_average(&model, &psi0, 1, 5e3, 10.0, 3).unwrap();
        for (s, psi) in avg.states.iter().zip(&rec.states) {
            assert!(s.matrix().approx_eq(&ComplexMatrix::outer(psi), 1e-12));
        }
    }

    #[test]
    fn ensemble_is_reproducible() {
        let model = lambda_model(&LambdaParams::resonant(1.0, 0.1, 1e-3)).unwrap();
        let grid = TimeGrid::linspace(0.0, 5e3, 11).unwrap();
        let a = ensemble_average_on(&model, &ket(3, LAMBDA_1), 100, &grid, 10.0, 9).unwrap();
        let b = ensemble_average_on(&model, &ket(3, LAMBDA_1), 100, &grid, 10.0, 9).unwrap();
        for (x, y) in a.evolution.states.iter().zip(&b.evolution.states) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn pure_decay_survival_is_exponential() {
        let model = decay(0.3);
        let grid = TimeGrid::linspace(0.0, 50.0, 51).unwrap();
        let res = no_jump_evolution(&model, &DensityMatrix::basis_state(2, 1).unwrap(), &grid).unwrap();
        for (t, s) in res.times.iter().zip(&res.survival) {
            assert!((s - (-0.3 * t).exp()).abs() < 1e-9);
        }
        let long = TimeGrid::new(vec![0.0, 1e4]).unwrap();
        assert!(matches!(
            no_jump_evolution(&model, &DensityMatrix::basis_state(2, 1).unwrap(), &long),
            Err(Error::TraceUnderflow { .. })
        ));
    }

    #[test]
    fn closed_system_no_jump_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = random_hermitian(&mut rng, 3);
        let model = LindbladModel::new(vec!["a".into(), "b".into(), "c".into()], h, vec![]).unwrap();
        let rho0 = DensityMatrix::pure(&random_pure_state(&mut rng, 3)).unwrap();
        let grid = TimeGrid::linspace(0.0, 10.0, 21).unwrap();
        let nj = no_jump_evolution(&model, &rho0, &grid).unwrap();
        let me = evolve(&model, &rho0, &grid, EvolutionMethod::Spectral).unwrap();
        for k in 0..grid.len() {
            assert!((nj.survival[k] - 1.0).abs() < 1e-12);
            assert!(nj.conditional_states[k].matrix().approx_eq(me.states[k].matrix(), 1e-10));
        }
    }

    #[test]
    fn no_jump_state_saturates_to_dominant_eigenvector() {
        // overdamped, with |V⟩ and |2⟩ both decaying faster than the 1-like mode
        let model = lambda_model(&LambdaParams::resonant(1.0, 0.1, 0.1).with_gamma_v(0.5)).unwrap();
        let grid = TimeGrid::linspace(0.0, 5e3, 201).unwrap();
        let res = no_jump_evolution(&model, &DensityMatrix::basis_state(3, LAMBDA_1).unwrap(), &grid).unwrap();
        for w in res.survival.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
        let dominant = dominant_no_jump_state(&model).unwrap();
        let last = res.conditional_states.last().unwrap();
        assert!(last.matrix().approx_eq(dominant.matrix(), 1e-8));
    }
}
