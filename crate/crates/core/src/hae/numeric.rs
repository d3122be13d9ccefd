//! Two-step adiabatic elimination for an arbitrary Lindblad model.
//!
//! The density matrix is written in real coordinates `x` (populations other
//! than a reference level fixed by the trace, then real and imaginary parts
//! of each upper-triangular coherence) so that the master equation becomes
//! the real affine system `ẋ = G x + c`. Coordinates are split into
//! eliminated (fastest), fast and slow sets. The eliminated set is slaved to
//! the rest, then the fast set is slaved to the slow one, leaving
//! `ẋ_S = R x_S + s`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::lindblad::{DensityMatrix, LindbladModel};
pub use crate::real_form::{RealAffine, RealParam};

/// Condition-number bound for the blocks inverted during elimination.
pub const BLOCK_CONDITION_BOUND: f64 = 1e13;

/// Split of the real coordinates into eliminated, fast and slow sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub trace_index: usize,
    pub slow: Vec<RealParam>,
    pub fast: Vec<RealParam>,
    pub eliminated: Vec<RealParam>,
}

impl Partition {
    /// Validates the partition against the coordinates of `affine` and
    /// returns the index sets `(slow, fast, eliminated)`.
    fn indices(&self, affine: &RealAffine) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        if self.trace_index != affine.trace_index() {
            return Err(Error::Partition(format!(
                "partition uses trace index {}, coordinates use {}",
                self.trace_index, affine.trace_index()
            )));
        }
        if self.slow.is_empty() {
            return Err(Error::Partition("slow set is empty".into()));
        }
        let n = affine.params().len();
        let mut seen = vec![false; n];
        let mut lookup = |set: &[RealParam]| -> Result<Vec<usize>> {
            set.iter()
                .map(|p| {
                    let k = affine
                        .index_of(*p)
                        .ok_or_else(|| Error::Partition(format!("{p:?} is not a free coordinate")))?;
                    if std::mem::replace(&mut seen[k], true) {
                        return Err(Error::Partition(format!("{p:?} appears twice")));
                    }
                    Ok(k)
                })
                .collect()
        };
        let slow = lookup(&self.slow)?;
        let fast = lookup(&self.fast)?;
        let eliminated = lookup(&self.eliminated)?;
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("{:?} is not assigned to any set", affine.params()[k])));
        }
        Ok((slow, fast, eliminated))
    }
}

/// Affine slaving map `x_target = P x_source + q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlavingMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl SlavingMap {
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x + &self.offset
    }
}

/// Result of the two-step elimination.
#[derive(Clone, Debug)]
pub struct HaeReduction {
    affine: RealAffine,
    slow: Vec<usize>,
    fast: Vec<usize>,
    eliminated: Vec<usize>,
    /// `R` in `ẋ_S = R x_S + s`; relaxation rates are `|Re eig(R)|`.
    pub rate_matrix: DMatrix<f64>,
    pub source: DVector<f64>,
    /// `−R⁻¹ s`, absent when `R` is singular.
    pub fixed_point: Option<DVector<f64>>,
    /// Eliminated coordinates as a function of `(fast, slow)`.
    pub first_map: SlavingMap,
    /// Fast coordinates as a function of the slow ones.
    pub second_map: SlavingMap,
}

fn checked_inverse(block: &DMatrix<f64>, step: u8) -> Result<DMatrix<f64>> {
    if block.nrows() == 0 {
        return Ok(block.clone());
    }
    let inv = block.clone().try_inverse().ok_or_else(|| Error::SingularBlock {
        step,
        reason: "block is exactly singular".into(),
    })?;
    let one_norm = |m: &DMatrix<f64>| m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let condition = one_norm(block) * one_norm(&inv);
    if !(condition <= BLOCK_CONDITION_BOUND) {
        return Err(Error::SingularBlock {
            step,
            reason: format!("condition estimate {condition:.3e} exceeds {BLOCK_CONDITION_BOUND:.1e}"),
        });
    }
    Ok(inv)
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn select_vec(v: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_fn(rows.len(), |i, _| v[rows[i]])
}

pub fn numeric_hae(model: &LindbladModel, partition: &Partition) -> Result<HaeReduction> {
    let affine = RealAffine::from_model(model, partition.trace_index)?;
    reduce(affine, partition)
}

/// Two-step elimination on precomputed real coordinates.
pub fn reduce(affine: RealAffine, partition: &Partition) -> Result<HaeReduction> {
    let (slow, fast, eliminated) = partition.indices(&affine)?;
    let g = affine.generator();
    let c = affine.source();
    let kept: Vec<usize> = fast.iter().chain(&slow).copied().collect();

    // step 1: ẋ_E = 0
    let g_ee_inv = checked_inverse(&select(g, &eliminated, &eliminated), 1)?;
    let g_ek = select(g, &eliminated, &kept);
    let first_map = SlavingMap {
        matrix: -(&g_ee_inv * &g_ek),
        offset: -(&g_ee_inv * select_vec(c, &eliminated)),
    };
    let g_ke = select(g, &kept, &eliminated);
    let g_red = select(g, &kept, &kept) + &g_ke * &first_map.matrix;
    let c_red = select_vec(c, &kept) + &g_ke * &first_map.offset;

    // step 2: ẋ_F = 0 on the reduced system
    let nf = fast.len();
    let ns = slow.len();
    let g_ff = g_red.view((0, 0), (nf, nf)).into_owned();
    let g_fs = g_red.view((0, nf), (nf, ns)).into_owned();
    let g_sf = g_red.view((nf, 0), (ns, nf)).into_owned();
    let g_ss = g_red.view((nf, nf), (ns, ns)).into_owned();
    let g_ff_inv = checked_inverse(&g_ff, 2)?;
    let second_map = SlavingMap {
        matrix: -(&g_ff_inv * &g_fs),
        offset: -(&g_ff_inv * c_red.rows(0, nf)),
    };
    let rate_matrix = &g_ss + &g_sf * &second_map.matrix;
    let source = c_red.rows(nf, ns).into_owned() + &g_sf * &second_map.offset;
    // R is treated as singular relative to the scale of the full generator
    let smallest = rate_matrix.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    let fixed_point = if smallest > 1e-12 * g.norm() {
        rate_matrix.clone().try_inverse().map(|inv| -(inv * &source))
    } else {
        None
    };

    Ok(HaeReduction {
        affine,
        slow,
        fast,
        eliminated,
        rate_matrix,
        source,
        fixed_point,
        first_map,
        second_map,
    })
}

impl HaeReduction {
    pub fn affine(&self) -> &RealAffine {
        &self.affine
    }

    /// Slow relaxation rates `|Re μ|` for the eigenvalues `μ` of `R`, ascending.
    pub fn relaxation_rates(&self) -> Vec<f64> {
        let mut rates: Vec<f64> = self.rate_matrix.complex_eigenvalues().iter().map(|z| z.re.abs()).collect();
        rates.sort_by(f64::total_cmp);
        rates
    }

    /// Slow coordinates of a state.
    pub fn slow_coordinates(&self, rho: &DensityMatrix) -> Result<DVector<f64>> {
        Ok(select_vec(&self.affine.encode(rho)?, &self.slow))
    }

    /// Solution of `ẋ_S = R x_S + s` at time `t`.
    pub fn evolve_slow(&self, x0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        if x0.len() != self.slow.len() {
            return Err(Error::Dimension(format!("{} slow coordinates, expected {}", x0.len(), self.slow.len())));
        }
        let propagator = (&self.rate_matrix * t).exp();
        match &self.fixed_point {
            Some(fp) => Ok(fp + propagator * (x0 - fp)),
            None => {
                // x(t) = e^{Rt} x0 + ∫₀ᵗ e^{Rτ} dτ s via the augmented matrix
                let n = self.slow.len();
                let mut aug = DMatrix::zeros(n + 1, n + 1);
                aug.view_mut((0, 0), (n, n)).copy_from(&self.rate_matrix);
                aug.view_mut((0, n), (n, 1)).copy_from(&self.source);
                let e = (aug * t).exp();
                Ok(e.view((0, 0), (n, n)) * x0 + e.view((0, n), (n, 1)).column(0))
            }
        }
    }

    /// Full density matrix on the slow manifold with slow coordinates `x_s`.
    pub fn reconstruct(&self, x_s: &DVector<f64>) -> Result<ComplexMatrix> {
        let x_f = self.second_map.apply(x_s);
        let kept = DVector::from_iterator(x_f.len() + x_s.len(), x_f.iter().chain(x_s.iter()).copied());
        let x_e = self.first_map.apply(&kept);
        let mut x = DVector::zeros(self.affine.params().len());
        for (k, &i) in self.fast.iter().enumerate() {
            x[i] = x_f[k];
        }
        for (k, &i) in self.slow.iter().enumerate() {
            x[i] = x_s[k];
        }
        for (k, &i) in self.eliminated.iter().enumerate() {
            x[i] = x_e[k];
        }
        self.affine.decode(&x)
    }
}

/// Partition of the Λ system: virtual coherences eliminated first, the
/// two-photon transition fast, `ρ_VV` slow.
pub fn lambda_partition() -> Partition {
    use crate::models::{LAMBDA_1, LAMBDA_2, LAMBDA_V};
    let mut eliminated = RealParam::coherence(LAMBDA_1, LAMBDA_V).to_vec();
    eliminated.extend(RealParam::coherence(LAMBDA_2, LAMBDA_V));
    let mut fast = vec![RealParam::Population(LAMBDA_2)];
    fast.extend(RealParam::coherence(LAMBDA_1, LAMBDA_2));
    Partition {
        trace_index: LAMBDA_1,
        slow: vec![RealParam::Population(LAMBDA_V)],
        fast,
        eliminated,
    }
}

/// Partition of the four-level pair models with the dark state `|A⟩` slow
/// and its coherences eliminated first.
pub fn dark_state_partition() -> Partition {
    use crate::models::{ANTI, EE, GG, SYM};
    let mut eliminated = Vec::new();
    for other in [GG, SYM, EE] {
        eliminated.extend(RealParam::coherence(other, ANTI));
    }
    let mut fast = vec![RealParam::Population(SYM), RealParam::Population(EE)];
    for (i, j) in [(GG, SYM), (GG, EE), (SYM, EE)] {
        fast.extend(RealParam::coherence(i, j));
    }
    Partition {
        trace_index: GG,
        slow: vec![RealParam::Population(ANTI)],
        fast,
        eliminated,
    }
}
