//! Hierarchical adiabatic elimination: closed forms for the resonant Λ
//! system and a numerical two-step reduction for general models.

pub mod closed_form;
pub mod numeric;

pub use closed_form::{
    analytic_elements, first_elimination_rhs, kappa, metastable_elements, quasi_steady_closed_form,
    quasi_steady_real, quasi_steady_system, relaxation_rate, steady_elements, steady_virtual_population,
    two_level_transient, EliminationForm, Element, HaeResult, LambdaElements,
};
pub use numeric::{
    dark_state_partition, lambda_partition, numeric_hae, reduce, HaeReduction, Partition, RealAffine, RealParam,
    SlavingMap,
};

use crate::error::{Error, Result};
use crate::models::ChiralParams;

/// Formation time `τ = 24Ω² / [Γ(4δ² + Δγ²)]` of the dark state in the
/// chiral pair.
pub fn chiral_relaxation_time(cp: &ChiralParams) -> Result<f64> {
    cp.validate()?;
    let gamma = cp.gamma_total();
    let dg = cp.delta_gamma();
    let asym = 4.0 * cp.delta * cp.delta + dg * dg;
    if asym == 0.0 {
        return Err(Error::InfiniteTimescale);
    }
    Ok(24.0 * cp.omega * cp.omega / (gamma * asym))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::chiral_model;
    use crate::spectrum::liouvillian_spectrum;

    #[test]
    fn chiral_time_examples() {
        let cp = ChiralParams::from_collective(1.0, 0.01, 1.0, 0.01).unwrap();
        let tau = chiral_relaxation_time(&cp).unwrap();
        assert!((tau - 48000.0).abs() < 1e-6);
        let lambda2 = liouvillian_spectrum(&chiral_model(&cp).unwrap()).unwrap().eigenvalues[1].re.abs();
        assert!((lambda2 * tau - 1.0).abs() < 0.1);
        let dark = ChiralParams::from_collective(1.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(chiral_relaxation_time(&dark), Err(Error::InfiniteTimescale));
    }
}
