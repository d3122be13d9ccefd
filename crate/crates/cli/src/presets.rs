use anyhow::Result;
use metastab::entanglement::{concurrence, concurrence_x_structure, metastable_concurrence, TwoQubitState};
use metastab::hae::{analytic_elements, dark_state_partition, numeric_hae, relaxation_rate, two_level_transient};
use metastab::lindblad::{evolve, DensityMatrix, EvolutionMethod, TimeGrid};
use metastab::models::{
    chiral_model, lambda_model, two_qubit_tpr_model, ChiralParams, LambdaParams, ANTI, GG, LAMBDA_1, LAMBDA_2,
    LAMBDA_V,
};
use metastab::spectrum::{liouvillian_spectrum, metastability_report, DEFAULT_GAP_RATIO_THRESHOLD};
use metastab::trajectory::{no_jump_evolution, sample_trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{Document, Table};
use crate::tasks::{basis_vector, RunOutput};

/// Seed of the illustrative trajectory when none is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2a,
    Fig2bc,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
}

/// Λ system driving the metastability figures, in units of `Δ_V`.
fn fig2_params() -> LambdaParams {
    LambdaParams::resonant(1.0, 0.01, 1e-5)
}

fn fig3_params() -> LambdaParams {
    LambdaParams::resonant(1.0, 0.1, 1e-3)
}

fn fig4b_params() -> Result<ChiralParams> {
    Ok(ChiralParams::from_collective(1.0, 0.01, 1.0, 0.01)?)
}

fn ground(dim: usize, i: usize) -> Result<DensityMatrix> {
    Ok(DensityMatrix::basis_state(dim, i)?)
}

/// Time grid in units of `1/Γ`.
fn log_grid(gamma: f64, from: f64, to: f64, points: usize) -> Result<TimeGrid> {
    Ok(TimeGrid::logspace(from / gamma, to / gamma, points)?)
}

pub fn run(preset: Preset, seed: Option<u64>) -> Result<RunOutput> {
    let mut out = match preset {
        Preset::Fig2a => fig2a()?,
        Preset::Fig2bc => fig2bc()?,
        Preset::Fig2d => fig2d()?,
        Preset::Fig3a => fig3a(seed.unwrap_or(DEFAULT_SEED))?,
        Preset::Fig3b => fig3b()?,
        Preset::Fig4a => fig4a()?,
        Preset::Fig4b => fig4b()?,
    };
    out.readme = Some(readme(preset));
    Ok(out)
}

fn lambda_output(documents: Vec<Document>) -> RunOutput {
    RunOutput {
        documents,
        seeds: Vec::new(),
        reference: ("delta_v", 1.0),
        readme: None,
    }
}

fn fig2a() -> Result<RunOutput> {
    let p = fig2_params();
    let grid = log_grid(p.gamma, 1e-2, 1e5, 400)?;
    let rho0 = ground(3, LAMBDA_1)?;
    let numeric = evolve(&lambda_model(&p)?, &rho0, &grid, EvolutionMethod::Spectral)?;
    let dissipative = evolve(&lambda_model(&p.with_gamma_v(p.gamma))?, &rho0, &grid, EvolutionMethod::Spectral)?;
    let mut table = Table::new([
        "t_gamma",
        "rho22_numeric",
        "rhovv_numeric",
        "rho22_analytic",
        "rhovv_analytic",
        "rhovv_numeric_gamma_v_eq_gamma",
    ]);
    for (k, &t) in grid.times().iter().enumerate() {
        // the Rabi transient form covers t ≤ 5/Γ, the slow-manifold form the rest
        let (rho22, rho_vv) = if t * p.gamma <= 5.0 {
            (two_level_transient(&p, t)?.0, analytic_elements(&p, t)?.rho_vv)
        } else {
            let e = analytic_elements(&p, t)?;
            (e.rho22, e.rho_vv)
        };
        table.push_numbers([
            t * p.gamma,
            numeric.states[k].population(LAMBDA_2),
            numeric.states[k].population(LAMBDA_V),
            rho22,
            rho_vv,
            dissipative.states[k].population(LAMBDA_V),
        ])?;
    }
    Ok(lambda_output(vec![Document::table("fig2a", table)]))
}

fn spectrum_documents(name: &str, p: &LambdaParams) -> Result<Vec<Document>> {
    let spectrum = liouvillian_spectrum(&lambda_model(p)?)?;
    let report = metastability_report(&spectrum, DEFAULT_GAP_RATIO_THRESHOLD);
    let mut table = Table::new(["k", "re_gamma", "im_gamma"]);
    for (k, z) in spectrum.eigenvalues.iter().enumerate() {
        table.push_numbers([(k + 1) as f64, z.re / p.gamma, z.im / p.gamma])?;
    }
    Ok(vec![
        Document::table(&format!("{name}_spectrum"), table),
        Document::record(
            &format!("{name}_metastability"),
            vec![
                ("gamma_v", p.gamma_v.into()),
                ("is_metastable", report.is_metastable.into()),
                ("gap_ratio", report.gap_ratio.into()),
                ("ratio_threshold", report.ratio_threshold.into()),
                ("tau2_gamma", (report.tau2 * p.gamma).into()),
                ("tau3_gamma", (report.tau3 * p.gamma).into()),
            ],
        )?,
    ])
}

fn fig2bc() -> Result<RunOutput> {
    let p = fig2_params();
    let mut documents = spectrum_documents("fig2b", &p)?;
    documents.extend(spectrum_documents("fig2c", &p.with_gamma_v(p.gamma))?);
    Ok(lambda_output(documents))
}

fn fig2d() -> Result<RunOutput> {
    let base = fig2_params();
    let gammas = TimeGrid::logspace(1e-7, 1e-3, 41)?.times().to_vec();
    // two readings of the dissipative curve are in use, so both are emitted
    type GammaV = fn(&LambdaParams) -> f64;
    let sweeps: [(&str, GammaV); 3] = [
        ("fig2d_gamma_v_zero", |_| 0.0),
        ("fig2d_gamma_v_eq_gamma", |p| p.gamma),
        ("fig2d_gamma_v_1e-5_omega2p", |p| 1e-5 * p.omega2p()),
    ];
    let mut documents = Vec::new();
    for (name, gamma_v) in sweeps {
        let rows = gammas
            .par_iter()
            .map(|&gamma| -> Result<Vec<f64>> {
                let p = LambdaParams { gamma, ..base };
                let p = p.with_gamma_v(gamma_v(&p));
                let spectrum = liouvillian_spectrum(&lambda_model(&p)?)?;
                let mut row = vec![gamma];
                row.extend(spectrum.eigenvalues[1..].iter().map(|z| z.re));
                if p.gamma_v == 0.0 {
                    let (full, simple) = relaxation_rate(&p)?;
                    row.extend([-full, -simple]);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut columns: Vec<String> = std::iter::once("gamma".to_string())
            .chain((2..=9).map(|k| format!("re_lambda_{k}")))
            .collect();
        if name == "fig2d_gamma_v_zero" {
            columns.extend(["minus_gamma_c_full".into(), "minus_gamma_c_simple".into()]);
        }
        let mut table = Table::new(columns);
        for row in rows {
            table.push_numbers(row)?;
        }
        documents.push(Document::table(name, table));
    }
    Ok(lambda_output(documents))
}

fn fig3a(seed: u64) -> Result<RunOutput> {
    let p = fig3_params();
    let model = lambda_model(&p)?;
    let rec = sample_trajectory(&model, &basis_vector(3, LAMBDA_1), 50.0 / p.gamma, 10.0, seed)?;
    let mut trajectory = Table::new(["t_gamma", "rho11", "rho22", "rhovv"]);
    for (t, psi) in rec.times.iter().zip(&rec.states) {
        trajectory.push_numbers([
            t * p.gamma,
            psi[LAMBDA_1].norm_sqr(),
            psi[LAMBDA_2].norm_sqr(),
            psi[LAMBDA_V].norm_sqr(),
        ])?;
    }
    let labels = model.basis_labels();
    let mut jumps = Table::new(["t_gamma", "channel", "operator"]);
    for j in &rec.jumps {
        let op = if j.channel == 0 {
            format!("|{}><{}|", labels[LAMBDA_1], labels[LAMBDA_2])
        } else {
            format!("|{}><{}|", labels[LAMBDA_V], labels[LAMBDA_V])
        };
        jumps.push(vec![(j.time * p.gamma).into(), j.channel.into(), op.as_str().into()])?;
    }
    let mut out = lambda_output(vec![Document::table("fig3a_trajectory", trajectory), Document::table("fig3a_jumps", jumps)]);
    out.seeds.push(seed);
    Ok(out)
}

fn fig3b() -> Result<RunOutput> {
    let p = fig3_params();
    let model = lambda_model(&p)?;
    let grid = TimeGrid::linspace(0.0, 50.0 / p.gamma, 501)?;
    let rho0 = ground(3, LAMBDA_1)?;
    let nj = no_jump_evolution(&model, &rho0, &grid)?;
    let full = evolve(&model, &rho0, &grid, EvolutionMethod::Spectral)?;
    let mut table = Table::new(["t_gamma", "survival", "rhovv_conditional", "rhovv_unconditional"]);
    for k in 0..grid.len() {
        table.push_numbers([
            grid.times()[k] * p.gamma,
            nj.survival[k],
            nj.conditional_states[k].population(LAMBDA_V),
            full.states[k].population(LAMBDA_V),
        ])?;
    }
    Ok(lambda_output(vec![Document::table("fig3b", table)]))
}

fn two_qubit_concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence(&TwoQubitState::from_collective_basis(rho)?)?)
}

fn fig4a() -> Result<RunOutput> {
    let p = fig2_params();
    let grid = log_grid(p.gamma, 1e-2, 1e5, 400)?;
    let run = evolve(&two_qubit_tpr_model(&p)?, &ground(4, GG)?, &grid, EvolutionMethod::Spectral)?;
    let c_m = metastable_concurrence(p.gamma, p.omega2p())?;
    let mut table = Table::new(["t_gamma", "concurrence_numeric", "concurrence_hae", "concurrence_metastable"]);
    for (t, s) in grid.times().iter().zip(&run.states) {
        let e = analytic_elements(&p, *t)?;
        let hae = concurrence_x_structure(e.rho11(), e.rho22, e.rho_vv, e.rho12)?;
        table.push_numbers([t * p.gamma, two_qubit_concurrence(s)?, hae, c_m])?;
    }
    Ok(lambda_output(vec![Document::table("fig4a", table)]))
}

fn fig4b() -> Result<RunOutput> {
    let cp = fig4b_params()?;
    let gamma = cp.gamma_total();
    let model = chiral_model(&cp)?;
    // the elimination describes the state once the 1/Γ transient has decayed
    let grid = log_grid(gamma, 10.0, 1e6, 400)?;
    let rho0 = ground(4, GG)?;
    let run = evolve(&model, &rho0, &grid, EvolutionMethod::Spectral)?;
    let reduction = numeric_hae(&model, &dark_state_partition())?;
    let x0 = reduction.slow_coordinates(&rho0)?;
    let mut table = Table::new(["t_gamma", "concurrence_numeric", "concurrence_hae", "rho_aa"]);
    for (t, s) in grid.times().iter().zip(&run.states) {
        let slow = reduction.reconstruct(&reduction.evolve_slow(&x0, *t)?)?;
        let hae = DensityMatrix::project(slow, *t)?;
        table.push_numbers([t * gamma, two_qubit_concurrence(s)?, two_qubit_concurrence(&hae)?, s.population(ANTI)])?;
    }
    Ok(RunOutput {
        documents: vec![Document::table("fig4b", table)],
        seeds: Vec::new(),
        reference: ("gamma", gamma),
        readme: None,
    })
}

fn readme(preset: Preset) -> String {
    let body = match preset {
        Preset::Fig2a => {
            "Λ system, Ω/Δ_V = 0.01, Γ/Δ_V = 1e-5, Γ_V = 0, starting in |1⟩.\n\n\
             fig2a: t_gamma = t·Γ; rho22_numeric and rhovv_numeric from the master equation; \
             rho22_analytic from the two-level Rabi form for t·Γ ≤ 5 and the slow-manifold form after; \
             rhovv_analytic from the slow-manifold form; rhovv_numeric_gamma_v_eq_gamma with Γ_V = Γ.\n"
        }
        Preset::Fig2bc => {
            "Liouvillian spectra of the Λ system at Ω/Δ_V = 0.01, Γ/Δ_V = 1e-5.\n\n\
             fig2b_spectrum (Γ_V = 0) and fig2c_spectrum (Γ_V = Γ): k, re_gamma = Re λ_k/Γ, im_gamma = Im λ_k/Γ, \
             ordered by decreasing real part.\n\
             fig2b_metastability, fig2c_metastability: gap ratio τ₂/τ₃, threshold, and τ₂·Γ, τ₃·Γ.\n"
        }
        Preset::Fig2d => {
            "Liouvillian eigenvalues of the Λ system against Γ at Ω/Δ_V = 0.01, in units of Δ_V.\n\n\
             Columns: gamma = Γ/Δ_V, re_lambda_k = Re λ_k/Δ_V for k = 2..9.\n\
             fig2d_gamma_v_zero also has minus_gamma_c_full and minus_gamma_c_simple, the negated slow relaxation rate \
             from adiabatic elimination (full and leading-order forms).\n\
             fig2d_gamma_v_eq_gamma uses Γ_V = Γ; fig2d_gamma_v_1e-5_omega2p uses Γ_V = 1e-5·Ω²/Δ_V.\n"
        }
        Preset::Fig3a => {
            "One quantum-jump trajectory of the Λ system, Ω/Δ_V = 0.1, Γ/Δ_V = 1e-3, step 10/Δ_V, from |1⟩. \
             The seed is recorded in manifest.json.\n\n\
             fig3a_trajectory: t_gamma = t·Γ and the populations rho11, rho22, rhovv of the conditional pure state.\n\
             fig3a_jumps: t_gamma of each jump, channel index and the jump operator.\n"
        }
        Preset::Fig3b => {
            "Λ system, Ω/Δ_V = 0.1, Γ/Δ_V = 1e-3, from |1⟩.\n\n\
             fig3b: t_gamma = t·Γ; survival = probability of no jump up to t; rhovv_conditional = ρ_VV given no jump; \
             rhovv_unconditional = ρ_VV from the master equation.\n"
        }
        Preset::Fig4a => {
            "Two qubits under two-photon driving, Ω/Δ_V = 0.01, Γ/Δ_V = 1e-5, from |gg⟩.\n\n\
             fig4a: t_gamma = t·Γ; concurrence_numeric from the master equation; concurrence_hae from the analytic \
             slow-manifold elements; concurrence_metastable = the plateau value C^m(Γ, Ω²/Δ_V).\n"
        }
        Preset::Fig4b => {
            "Chiral qubit pair, Ω/Γ = 1, δ/Γ = 0.01, Δγ/Γ = 0.01, from |gg⟩; Γ is the reference rate. Times start at 10/Γ, after the fast transient.\n\n\
             fig4b: t_gamma = t·Γ; concurrence_numeric from the master equation; concurrence_hae from the \
             numerical adiabatic elimination with the dark-state population slow; rho_aa = population of |A⟩.\n"
        }
    };
    format!("# {}\n\n{body}", serde_json::to_value(preset).unwrap().as_str().unwrap())
}
