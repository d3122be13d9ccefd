use anyhow::{bail, Context, Result};
use metastab::entanglement::{concurrence, TwoQubitState};
use metastab::hae::{chiral_relaxation_time, dark_state_partition, lambda_partition, numeric_hae, HaeResult};
use metastab::linalg::{ComplexMatrix, ComplexVector, ONE, ZERO};
use metastab::lindblad::{evolve, steady_state, DensityMatrix, EvolutionMethod, LindbladModel};
use metastab::models::embed_lambda;
use metastab::spectrum::{liouvillian_spectrum, metastability_report};
use metastab::trajectory::{ensemble_average_on, no_jump_evolution, sample_trajectory_stream};

use crate::config::{ExperimentConfig, Method, ModelConfig, PartitionChoice, TaskConfig};
use crate::output::{Cell, Document, Table};
use crate::presets;

pub struct RunOutput {
    pub documents: Vec<Document>,
    pub seeds: Vec<u64>,
    pub reference: (&'static str, f64),
    /// Column descriptions written next to the data.
    pub readme: Option<String>,
}

impl RunOutput {
    fn new(reference: (&'static str, f64)) -> Self {
        Self {
            documents: Vec::new(),
            seeds: Vec::new(),
            reference,
            readme: None,
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    if let TaskConfig::FigurePreset { name, seed } = &config.task {
        return presets::run(*name, *seed);
    }
    let model_config = config.model()?;
    let model = model_config.build()?;
    let mut out = RunOutput::new(model_config.reference_rate());
    let rate = out.reference.1;
    match &config.task {
        TaskConfig::Evolve { initial, times, method } => {
            let grid = times.grid("task.times")?;
            let rho0 = DensityMatrix::basis_state(model.dim(), index_of(&model, initial)?)?;
            let run = evolve(&model, &rho0, &grid, evolution_method(*method))?;
            out.documents.push(Document::table("evolution", state_table(&model, &run.times, &run.states, rate)?));
        }
        TaskConfig::Spectrum { threshold } => {
            let spectrum = liouvillian_spectrum(&model)?;
            let report = metastability_report(&spectrum, *threshold);
            let mut table = Table::new(["k", "re", "im"]);
            for (k, z) in spectrum.eigenvalues.iter().enumerate() {
                table.push_numbers([(k + 1) as f64, z.re / rate, z.im / rate])?;
            }
            out.documents.push(Document::table("eigenvalues", table));
            out.documents.push(Document::record(
                "metastability",
                vec![
                    ("is_metastable", report.is_metastable.into()),
                    ("gap_ratio", report.gap_ratio.into()),
                    ("ratio_threshold", report.ratio_threshold.into()),
                    ("lambda2.re", (report.lambda2.re / rate).into()),
                    ("lambda2.im", (report.lambda2.im / rate).into()),
                    ("lambda3.re", (report.lambda3.re / rate).into()),
                    ("lambda3.im", (report.lambda3.im / rate).into()),
                    ("tau2", (report.tau2 * rate).into()),
                    ("tau3", (report.tau3 * rate).into()),
                ],
            )?);
        }
        TaskConfig::Steady {} => {
            let ss = steady_state(&model)?;
            let labels = model.basis_labels();
            let mut table = Table::new(["element", "re", "im"]);
            for i in 0..model.dim() {
                for j in 0..model.dim() {
                    let z = ss.element(i, j);
                    table.push(vec![format!("rho_{}_{}", labels[i], labels[j]).as_str().into(), z.re.into(), z.im.into()])?;
                }
            }
            out.documents.push(Document::table("steady_state", table));
        }
        TaskConfig::Hae { partition, initial, times } => {
            hae(model_config, &model, *partition, initial.as_deref(), times.as_ref(), &mut out)?;
        }
        TaskConfig::Trajectories { initial, n_traj, dt, seed, times, single } => {
            let grid = times.grid("task.times")?;
            let psi0 = basis_vector(model.dim(), index_of(&model, initial)?);
            let avg = ensemble_average_on(&model, &psi0, *n_traj, &grid, *dt, *seed)?;
            let mut table = state_table(&model, &avg.evolution.times, &avg.evolution.states, rate)?;
            table.columns.push("jump_free_fraction".into());
            for (row, f) in table.rows.iter_mut().zip(&avg.jump_free_fraction) {
                row.push(Cell::Num(*f));
            }
            out.documents.push(Document::table("ensemble", table));
            if *single {
                let rec = sample_trajectory_stream(&model, &psi0, grid.last(), *dt, *seed, 0)?;
                out.documents.push(Document::table("trajectory", pure_state_table(&model, &rec.times, &rec.states, rate)?));
                let mut jumps = Table::new(["t", "channel"]);
                for j in &rec.jumps {
                    jumps.push_numbers([j.time * rate, j.channel as f64])?;
                }
                out.documents.push(Document::table("jumps", jumps));
            }
            out.seeds.push(*seed);
        }
        TaskConfig::Nojump { initial, times } => {
            let grid = times.grid("task.times")?;
            let rho0 = DensityMatrix::basis_state(model.dim(), index_of(&model, initial)?)?;
            let nj = no_jump_evolution(&model, &rho0, &grid)?;
            let mut table = state_table(&model, &nj.times, &nj.conditional_states, rate)?;
            table.columns.insert(1, "survival".into());
            for (row, s) in table.rows.iter_mut().zip(&nj.survival) {
                row.insert(1, Cell::Num(*s));
            }
            out.documents.push(Document::table("nojump", table));
        }
        TaskConfig::Concurrence { initial, times, method } => {
            let grid = times.grid("task.times")?;
            let rho0 = DensityMatrix::basis_state(model.dim(), index_of(&model, initial)?)?;
            let run = evolve(&model, &rho0, &grid, evolution_method(*method))?;
            let mut table = Table::new(["t", "concurrence"]);
            for (t, s) in run.times.iter().zip(&run.states) {
                table.push_numbers([t * rate, two_qubit_concurrence(model_config, s)?])?;
            }
            out.documents.push(Document::table("concurrence", table));
        }
        TaskConfig::FigurePreset { .. } => unreachable!("handled above"),
    }
    Ok(out)
}

fn hae(
    model_config: &ModelConfig,
    model: &LindbladModel,
    partition: Option<PartitionChoice>,
    initial: Option<&str>,
    times: Option<&crate::config::TimesConfig>,
    out: &mut RunOutput,
) -> Result<()> {
    let rate = out.reference.1;
    let choice = match (partition, model_config) {
        (Some(p), _) => p,
        (None, ModelConfig::Lambda(_)) => PartitionChoice::Lambda,
        (None, _) => PartitionChoice::DarkState,
    };
    let partition = match choice {
        PartitionChoice::Lambda => lambda_partition(),
        PartitionChoice::DarkState => dark_state_partition(),
    };
    let reduction = numeric_hae(model, &partition)?;
    let rates = reduction.relaxation_rates();
    let mut fields: Vec<(&str, Cell)> = vec![("slow_rate", (rates[0] / rate).into())];
    if let Some(fp) = &reduction.fixed_point {
        fields.push(("slow_fixed_point", fp[0].into()));
    }
    match model_config {
        ModelConfig::Lambda(p) if choice == PartitionChoice::Lambda => {
            // closed forms exist only in their regime; outside it only the numeric rate is reported
            if let Ok(h) = HaeResult::new(&p.params()?) {
                fields.push(("gamma_c_full", (h.gamma_c_full / rate).into()));
                fields.push(("gamma_c_simple", (h.gamma_c_simple / rate).into()));
                fields.push(("steady_rho_vv", h.steady.rho_vv.into()));
                fields.push(("metastable_rho22", h.metastable.0.into()));
                fields.push(("metastable_rho12.re", h.metastable.1.re.into()));
                fields.push(("metastable_rho12.im", h.metastable.1.im.into()));
            }
        }
        ModelConfig::Chiral(c) => {
            if let Ok(tau) = chiral_relaxation_time(&c.params()?) {
                fields.push(("tau_closed_form", (tau * rate).into()));
            }
        }
        _ => {}
    }
    out.documents.push(Document::record("hae", fields)?);

    if let Some(times) = times {
        let grid = times.grid("task.times")?;
        let initial = initial.context("task.initial is required when task.times is given")?;
        let rho0 = DensityMatrix::basis_state(model.dim(), index_of(model, initial)?)?;
        let x0 = reduction.slow_coordinates(&rho0)?;
        // before the fast transient has decayed the slaved state may be slightly non-positive,
        // so raw elements are written
        let states = grid
            .times()
            .iter()
            .map(|&t| reduction.reconstruct(&reduction.evolve_slow(&x0, t)?))
            .collect::<metastab::Result<Vec<_>>>()?;
        let refs: Vec<&ComplexMatrix> = states.iter().collect();
        out.documents.push(Document::table("hae_evolution", matrix_table(model, grid.times(), &refs, rate)?));
    }
    Ok(())
}

pub fn evolution_method(method: Method) -> EvolutionMethod {
    match method {
        Method::Spectral => EvolutionMethod::Spectral,
        Method::Adaptive => EvolutionMethod::Adaptive(Default::default()),
    }
}

pub fn index_of(model: &LindbladModel, label: &str) -> Result<usize> {
    model
        .label_index(label)
        .with_context(|| format!("task.initial: unknown basis label {label:?}, expected one of {:?}", model.basis_labels()))
}

pub fn basis_vector(dim: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::from_element(dim, ZERO);
    v[i] = ONE;
    v
}

/// Concurrence of a state of a two-qubit model (collective basis) or of the
/// Λ system read as the interacting pair.
pub fn two_qubit_concurrence(model_config: &ModelConfig, rho: &DensityMatrix) -> Result<f64> {
    let collective = match model_config {
        ModelConfig::Lambda(_) => embed_lambda(rho)?,
        ModelConfig::TwoQubitTpr(_) | ModelConfig::Chiral(_) => rho.clone(),
    };
    Ok(concurrence(&TwoQubitState::from_collective_basis(&collective)?)?)
}

fn element_columns(model: &LindbladModel) -> Vec<String> {
    let labels = model.basis_labels();
    let mut columns = vec!["t".to_string()];
    for l in labels {
        columns.push(format!("rho_{l}_{l}"));
    }
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            columns.push(format!("rho_{}_{}.re", labels[i], labels[j]));
            columns.push(format!("rho_{}_{}.im", labels[i], labels[j]));
        }
    }
    columns
}

/// Populations and upper-triangle coherences, time scaled by `rate`.
pub fn state_table(model: &LindbladModel, times: &[f64], states: &[DensityMatrix], rate: f64) -> Result<Table> {
    matrix_table(model, times, &states.iter().map(DensityMatrix::matrix).collect::<Vec<_>>(), rate)
}

/// As [`state_table`] for matrices that need not be valid states.
fn matrix_table(model: &LindbladModel, times: &[f64], states: &[&ComplexMatrix], rate: f64) -> Result<Table> {
    if times.len() != states.len() {
        bail!("{} times for {} states", times.len(), states.len());
    }
    let d = model.dim();
    let mut table = Table::new(element_columns(model));
    for (t, s) in times.iter().zip(states) {
        let mut row = vec![t * rate];
        row.extend((0..d).map(|i| s.get(i, i).re));
        for i in 0..d {
            for j in i + 1..d {
                let z = s.get(i, j);
                row.extend([z.re, z.im]);
            }
        }
        table.push_numbers(row)?;
    }
    Ok(table)
}

fn pure_state_table(model: &LindbladModel, times: &[f64], states: &[ComplexVector], rate: f64) -> Result<Table> {
    let rhos = states.iter().map(DensityMatrix::pure).collect::<metastab::Result<Vec<_>>>()?;
    state_table(model, times, &rhos, rate)
}
