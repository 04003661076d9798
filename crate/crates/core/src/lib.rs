//! Finite Markov kernels with Bayesian inversion, discretization-based
//! approximation of continuous kernels, and a truncated semantics for the
//! Kleene star of a small probabilistic network language.

pub mod convergence;
pub mod discretize;
pub mod error;
pub mod laws;
pub mod measure;
pub mod models;
pub mod netkat;
pub mod quadrature;
pub mod random;

pub use error::{Error, Result};
pub use measure::{KernelMorphism, MeasuredSpace, Predicate};
