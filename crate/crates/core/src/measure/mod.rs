//! Exact algebra of measured finite spaces and Markov kernels between them.

mod json;
mod kernel;
mod space;
mod vectors;

pub use json::KernelJson;
pub use kernel::{
    adjointness_defect, compose, coupling, dagger, kernels_equal_ae, tensor, KernelMorphism, NULL_MASS,
};
pub use space::{MeasuredSpace, DIVISION_TOL, EXACT_TOL, RENORMALIZE_TOL};
pub use vectors::{lp_norm, mr, rn_derivative, DensityVector, FiniteMeasureVector, Lp, Predicate};
