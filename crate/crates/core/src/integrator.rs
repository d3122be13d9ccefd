//! Embedded Dormand–Prince 5(4) integrator for autonomous matrix ODEs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial derivative when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            max_steps: 50_000_000,
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the fifth- and fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(y)` from `y(0) = y0` and returns `y` at each of
/// `times` (non-negative, increasing).
pub fn integrate<F>(f: F, y0: ComplexMatrix, times: &[f64], opts: &AdaptiveOptions) -> Result<Vec<ComplexMatrix>>
where
    F: Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    let eval = |y: &DMatrix<C64>| -> Result<DMatrix<C64>> {
        Ok(f(&ComplexMatrix::wrap(y.clone()))?.into_nalgebra())
    };
    let mut y = y0.into_nalgebra();
    let mut k1 = eval(&y)?;
    let mut t = 0.0;
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            let fy = k1.norm().max(1e-10);
            (0.01 * y.norm().max(1e-5) / fy).min(times.last().copied().unwrap_or(1.0).max(1e-6))
        }
    };
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    let mut k = vec![k1.clone(); 7];

    for &target in times {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::StepUnderflow { t, step: h });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            if step < 1e-13 * t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t, step });
            }
            k[0] = k1.clone();
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        ys += kj * C64::new(step * A[s][j], 0.0);
                    }
                }
                k[s] = eval(&ys)?;
            }
            let mut y_new = y.clone();
            for (j, kj) in k.iter().enumerate().take(6) {
                if A[6][j] != 0.0 {
                    y_new += kj * C64::new(step * A[6][j], 0.0);
                }
            }
            let mut err_sq = 0.0;
            for idx in 0..y.len() {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    e += kj[idx] * (step * E[j]);
                }
                let scale = opts.atol + opts.rtol * y[idx].norm().max(y_new[idx].norm());
                err_sq += (e.norm() / scale).powi(2);
            }
            let err = (err_sq / y.len() as f64).sqrt();
            let err = if err.is_finite() { err } else { f64::MAX };
            steps += 1;
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k[6].clone();
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < 1e-13 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, step: h });
                }
            }
        }
        out.push(ComplexMatrix::from_nalgebra(y.clone())?);
    }
    Ok(out)
}
