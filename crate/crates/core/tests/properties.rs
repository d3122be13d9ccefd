use metastab::entanglement::{concurrence, concurrence_x_structure, x_structured_state, TwoQubitState};
use metastab::hae::{quasi_steady_closed_form, quasi_steady_real, relaxation_rate, HaeResult};
use metastab::linalg::{self, kron, ComplexMatrix, C64, I, ONE};
use metastab::lindblad::{
    build_liouvillian, evolve, rhs, steady_state, DensityMatrix, EvolutionMethod, LindbladModel, TimeGrid,
};
use metastab::models::{
    chiral_model, embed_lambda, lambda_model, project_to_lambda, two_qubit_tpr_model, ChiralParams, LambdaParams,
    GG, LAMBDA_1,
};
use metastab::random_states::{random_density_matrix, random_hermitian, random_matrix, random_unitary};
use metastab::spectrum::liouvillian_spectrum;
use metastab::trajectory::{ensemble_average, sample_trajectory};
use nalgebra::DVector;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed generator seed so that every run explores the same cases.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x6d65_7461),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_model(seed: u64, dim: usize, channels: usize) -> LindbladModel {
    let mut r = rng(seed);
    let labels = (0..dim).map(|k| format!("s{k}")).collect();
    let h = random_hermitian(&mut r, dim);
    let ops = (0..channels)
        .map(|k| (0.1 + 0.3 * k as f64, random_matrix(&mut r, dim).scale_real(0.5)))
        .collect();
    LindbladModel::new(labels, h, ops).unwrap()
}

fn library_models(omega: f64, gamma: f64, gamma_v: f64, delta: f64) -> Vec<LindbladModel> {
    let p = LambdaParams::new(0.0, 0.0, 1.0, omega, gamma, gamma_v).unwrap();
    vec![
        lambda_model(&p).unwrap(),
        two_qubit_tpr_model(&p).unwrap(),
        chiral_model(&ChiralParams::from_collective(1.0, delta, 1.0, delta).unwrap()).unwrap(),
    ]
}

/// Resonant Λ-model equations of motion for `ρ_VV, ρ₂₂, ρ₁V, ρ₁₂, ρ_V2`.
fn lambda_equations(p: &LambdaParams, rho: &ComplexMatrix) -> [C64; 5] {
    let (om, g, dv) = (p.omega, p.gamma, p.delta_v);
    let r = |i, j| rho.get(i, j);
    let (r1v, rv2, r12, r22, rvv) = (r(0, 2), r(2, 1), r(0, 1), r(1, 1), r(2, 2));
    [
        C64::new(2.0 * om * (r1v - rv2).im, 0.0),
        C64::new(-g * r22.re + 2.0 * om * rv2.im, 0.0),
        I * dv * r1v + I * om * (ONE + r12 - rvv * 2.0 - r22),
        -r12 * (g / 2.0) + I * om * (r1v - rv2),
        -(I * dv + g / 2.0) * rv2 - I * om * (r12 + r22 - rvv),
    ]
}

fn sets_match(a: &[C64], b: &[C64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.len() == b.len()
        && a.iter().all(|z| {
            let best = (0..b.len())
                .filter(|&j| !used[j])
                .min_by(|&i, &j| (b[i] - z).norm().total_cmp(&(b[j] - z).norm()));
            match best {
                Some(j) if (b[j] - z).norm() <= tol => {
                    used[j] = true;
                    true
                }
                _ => false,
            }
        })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn kron_is_bilinear(seed in any::<u64>(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let mut r = rng(seed);
        let (a, b) = (random_matrix(&mut r, 3), random_matrix(&mut r, 2));
        let alpha = C64::new(re, im);
        let lhs = kron(&a.scale(alpha), &b);
        let rhs = kron(&a, &b).scale(alpha);
        prop_assert!(lhs.approx_eq(&rhs, 1e-13));
        let a2 = random_matrix(&mut r, 3);
        let sum = kron(&(&a + &a2), &b);
        prop_assert!(sum.approx_eq(&(&kron(&a, &b) + &kron(&a2, &b)), 1e-13));
    }

    #[test]
    fn eig_residual_is_small(seed in any::<u64>(), n in 1usize..=16) {
        let a = random_matrix(&mut rng(seed), n);
        let decomposition = linalg::eig(&a).unwrap();
        let norm = a.frobenius_norm();
        let vectors = decomposition.eigenvectors.as_nalgebra();
        for (k, lambda) in decomposition.eigenvalues.iter().enumerate() {
            let v = vectors.column(k).into_owned();
            let residual = (a.as_nalgebra() * &v - &v * *lambda).norm() / (norm * v.norm());
            prop_assert!(residual <= 1e-10, "residual {residual}");
        }
    }

    #[test]
    fn solve_affine_multiplies_back(seed in any::<u64>(), n in 1usize..=12) {
        let mut r = rng(seed);
        let a = &random_matrix(&mut r, n) + &ComplexMatrix::identity(n).scale_real(n as f64);
        let b: DVector<C64> = random_matrix(&mut r, n).as_nalgebra().column(0).into_owned();
        let x = linalg::solve_affine(&a, &b).unwrap();
        let back = a.as_nalgebra() * &x;
        prop_assert!((back + &b).norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn generators_preserve_trace(
        seed in any::<u64>(),
        omega in 0.001..0.2f64,
        gamma in 1e-6..1e-2f64,
        gamma_v in 0.0..1e-2f64,
        delta in 0.0..0.1f64,
    ) {
        let mut r = rng(seed);
        let mut models = library_models(omega, gamma, gamma_v, delta);
        models.push(random_model(seed, 4, 2));
        for model in &models {
            let l = build_liouvillian(model);
            let d = model.dim();
            for _ in 0..100 {
                let rho = random_hermitian(&mut r, d);
                let out = ComplexMatrix::unvectorize(&l.mul_vec(&rho.vectorize()), d).unwrap();
                prop_assert!(out.trace().norm() <= 1e-12 * l.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn rhs_matches_hand_coded_lambda_equations(
        seed in any::<u64>(),
        omega in 0.001..0.5f64,
        gamma in 1e-7..0.1f64,
        delta_v in 0.1..5.0f64,
    ) {
        let p = LambdaParams::resonant(delta_v, omega, gamma);
        let model = lambda_model(&p).unwrap();
        let rho = random_density_matrix(&mut rng(seed), 3);
        let d = rhs(&model, &rho).unwrap();
        let got = [d.get(2, 2), d.get(1, 1), d.get(0, 2), d.get(0, 1), d.get(2, 1)];
        let expected = lambda_equations(&p, rho.matrix());
        for k in 0..5 {
            prop_assert!((got[k] - expected[k]).norm() <= 1e-12, "component {k}");
        }
    }

    #[test]
    fn zero_mode_is_the_steady_state(seed in any::<u64>(), dim in 2usize..=4, channels in 1usize..=3) {
        let model = random_model(seed, dim, channels);
        let spectrum = liouvillian_spectrum(&model).unwrap();
        prop_assert!(spectrum.lambda(0).norm() <= 1e-10);
        let zero = spectrum.zero_mode_state().unwrap();
        let ss = steady_state(&model).unwrap();
        prop_assert!(zero.matrix().approx_eq(ss.matrix(), 1e-8));
    }

    #[test]
    fn spectrum_is_invariant_under_relabeling(seed in any::<u64>(), dim in 2usize..=4) {
        let model = random_model(seed, dim, 2);
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.rotate_left(1 + (seed as usize) % dim);
        let a = liouvillian_spectrum(&model).unwrap();
        let b = liouvillian_spectrum(&model.permuted(&perm).unwrap()).unwrap();
        prop_assert!(sets_match(&a.eigenvalues, &b.eigenvalues, 1e-10));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn evolution_keeps_density_matrix_invariants(seed in any::<u64>(), dim in 2usize..=4, adaptive in any::<bool>()) {
        let model = random_model(seed, dim, 2);
        let rho0 = random_density_matrix(&mut rng(seed ^ 1), dim);
        let grid = TimeGrid::linspace(0.0, 20.0, 41).unwrap();
        let method = if adaptive {
            EvolutionMethod::Adaptive(Default::default())
        } else {
            EvolutionMethod::Spectral
        };
        let run = evolve(&model, &rho0, &grid, method).unwrap();
        for s in &run.states {
            prop_assert!((s.matrix().trace() - ONE).norm() <= 1e-10);
            prop_assert!(s.matrix().hermiticity_defect() <= 1e-10);
            prop_assert!(s.min_eigenvalue().unwrap() >= -1e-8);
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point(seed in any::<u64>(), dim in 2usize..=4) {
        let model = random_model(seed, dim, 2);
        let ss = steady_state(&model).unwrap();
        let gap = liouvillian_spectrum(&model).unwrap().lambda(1).re.abs();
        let grid = TimeGrid::linspace(0.0, 10.0 / gap, 11).unwrap();
        let run = evolve(&model, &ss, &grid, EvolutionMethod::Spectral).unwrap();
        for s in &run.states {
            prop_assert!(s.matrix().approx_eq(ss.matrix(), 1e-8));
        }
    }

    #[test]
    fn lambda_steady_state_solves_the_rate_equations(omega in 0.001..0.1f64, log_gamma in -6.0..-2.0f64) {
        let p = LambdaParams::resonant(1.0, omega, 10f64.powf(log_gamma));
        let ss = steady_state(&lambda_model(&p).unwrap()).unwrap();
        prop_assert!(rhs(&lambda_model(&p).unwrap(), &ss).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn virtual_decay_never_closes_the_gap(omega in 0.002..0.05f64, log_gamma in -6.0..-3.0f64) {
        let gamma = 10f64.powf(log_gamma);
        let mut last = 0.0;
        for factor in [0.0, 0.01, 0.1, 1.0, 10.0] {
            let p = LambdaParams::resonant(1.0, omega, gamma).with_gamma_v(factor * gamma);
            let gap = liouvillian_spectrum(&lambda_model(&p).unwrap()).unwrap().lambda(1).re.abs();
            prop_assert!(gap >= last * (1.0 - 1e-9), "Γ_V = {}Γ: {gap} < {last}", factor);
            last = gap;
        }
    }

    #[test]
    fn quasi_steady_paths_agree(log_omega in -3.0..-1.0f64, log_gamma in -7.0..-2.0f64, v in 0.0..0.5f64) {
        let p = LambdaParams::resonant(1.0, 10f64.powf(log_omega), 10f64.powf(log_gamma));
        let (a22, a12) = quasi_steady_real(&p, v).unwrap();
        let (b22, b12) = quasi_steady_closed_form(&p, v).unwrap();
        prop_assert!((a22 - b22).abs() <= 1e-10 && (a12 - b12).norm() <= 1e-10);
    }

    #[test]
    fn analytic_virtual_population_obeys_rate_equation(log_omega in -2.5..-1.5f64, log_gamma in -6.0..-4.0f64, u in 1.0..5.0f64) {
        let p = LambdaParams::resonant(1.0, 10f64.powf(log_omega), 10f64.powf(log_gamma));
        let h = HaeResult::new(&p).unwrap();
        // well after the fast transient, around the slow relaxation
        let t = u / h.gamma_c_full;
        let dt = t * 1e-5;
        let deriv = (h.elements_at(t + dt).rho_vv - h.elements_at(t - dt).rho_vv) / (2.0 * dt);
        let expected = h.gamma_c_full * (h.steady.rho_vv - h.elements_at(t).rho_vv);
        prop_assert!((deriv - expected).abs() <= 1e-6 * expected.abs());
    }

    #[test]
    fn simplified_rate_tracks_full_rate(log_omega in -3.0..-2.0f64, log_gamma in -9.0..-7.0f64) {
        // Δ_V ≥ 100 Ω and Ω_2p ≥ 10 Γ
        let p = LambdaParams::resonant(1.0, 10f64.powf(log_omega), 10f64.powf(log_gamma));
        prop_assume!(p.omega2p() >= 10.0 * p.gamma);
        let (full, simple) = relaxation_rate(&p).unwrap();
        prop_assert!((simple / full - 1.0).abs() <= 0.05);
    }

    #[test]
    fn tpr_model_reduces_to_lambda_model(omega in 0.005..0.1f64, log_gamma in -4.0..-2.0f64) {
        let p = LambdaParams::resonant(1.0, omega, 10f64.powf(log_gamma));
        let grid = TimeGrid::linspace(0.0, 1.0 / p.gamma, 11).unwrap();
        let four = evolve(&two_qubit_tpr_model(&p).unwrap(), &DensityMatrix::basis_state(4, GG).unwrap(), &grid, EvolutionMethod::Spectral).unwrap();
        let three = evolve(&lambda_model(&p).unwrap(), &DensityMatrix::basis_state(3, LAMBDA_1).unwrap(), &grid, EvolutionMethod::Spectral).unwrap();
        for (a, b) in four.states.iter().zip(&three.states) {
            let projected = project_to_lambda(&TwoQubitState::from_collective_basis(a).unwrap()).unwrap();
            prop_assert!(projected.matrix().approx_eq(b.matrix(), 1e-9));
            let embedded = embed_lambda(b).unwrap();
            prop_assert!(embedded.matrix().approx_eq(a.matrix(), 1e-9));
        }
    }

    #[test]
    fn chiral_model_has_unique_steady_state(delta in 0.0..0.2f64, dg in 0.0..0.2f64, omega in 0.2..2.0f64) {
        prop_assume!(delta > 1e-3 || dg > 1e-3);
        let model = chiral_model(&ChiralParams::from_collective(omega, delta, 1.0, dg).unwrap()).unwrap();
        let spectrum = liouvillian_spectrum(&model).unwrap();
        prop_assert!(spectrum.lambda(0).norm() <= 1e-10);
        prop_assert!(spectrum.lambda(1).re < -1e-12);
        prop_assert!(steady_state(&model).is_ok());
    }

    #[test]
    fn chiral_gap_closes_along_rays(angle in 0.0..std::f64::consts::FRAC_PI_2) {
        let (c, s) = (angle.cos(), angle.sin());
        let mut last = f64::INFINITY;
        for scale in [0.1, 0.03, 0.01, 0.003] {
            let cp = ChiralParams::from_collective(1.0, scale * c, 1.0, scale * s).unwrap();
            let gap = liouvillian_spectrum(&chiral_model(&cp).unwrap()).unwrap().lambda(1).re.abs();
            prop_assert!(gap < last);
            last = gap;
        }
        prop_assert!(last < 1e-4);
    }

    #[test]
    fn seeded_runs_are_reproducible(seed in any::<u64>()) {
        let model = random_model(seed, 3, 2);
        let psi0 = {
            let mut v = DVector::from_element(3, C64::new(0.0, 0.0));
            v[0] = ONE;
            v
        };
        let a = sample_trajectory(&model, &psi0, 5.0, 0.01, seed).unwrap();
        let b = sample_trajectory(&model, &psi0, 5.0, 0.01, seed).unwrap();
        prop_assert_eq!(a, b);
        let ea = ensemble_average(&model, &psi0, 8, 2.0, 0.01, seed).unwrap();
        let eb = ensemble_average(&model, &psi0, 8, 2.0, 0.01, seed).unwrap();
        prop_assert_eq!(ea.states, eb.states);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn concurrence_is_invariant_under_local_unitaries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_matrix(&mut r, 4);
        let u = kron(&random_unitary(&mut r, 2), &random_unitary(&mut r, 2));
        let rotated = DensityMatrix::project(&(&u * rho.matrix()) * &u.adjoint(), 0.0).unwrap();
        let a = concurrence(&TwoQubitState::new(rho).unwrap()).unwrap();
        let b = concurrence(&TwoQubitState::new(rotated).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn x_structure_formula_matches_general_concurrence(
        a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, frac in 0.0..1.0f64, phase in 0.0..6.3f64,
    ) {
        let total = a + b + c;
        prop_assume!(total > 1e-3);
        let (r11, r22, rvv) = (a / total, b / total, c / total);
        let r12 = C64::from_polar(frac * (r11 * r22).sqrt(), phase);
        let x = concurrence_x_structure(r11, r22, rvv, r12).unwrap();
        let general = concurrence(&x_structured_state(r11, r22, rvv, r12).unwrap()).unwrap();
        prop_assert!((x - general).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn concurrence_is_bounded(seed in any::<u64>()) {
        let rho = random_density_matrix(&mut rng(seed), 4);
        let c = concurrence(&TwoQubitState::new(rho).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }
}
