// `!(x <= tol)` is used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entanglement;
pub mod error;
pub mod hae;
pub mod integrator;
pub mod linalg;
pub mod lindblad;
pub mod models;
pub mod random_states;
pub mod real_form;
pub mod spectrum;
pub mod trajectory;

pub use error::{Error, Result};
