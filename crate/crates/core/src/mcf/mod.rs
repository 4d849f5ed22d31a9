//! Weighted non-negative matrix co-factorization and the mastery matrix.

pub mod config;
pub mod io;
pub mod mastery;
pub mod solver;
pub mod sweep;

pub use config::{GammaPrior, InitMode, McfConfig};
pub use mastery::{mastery, MasteryMatrix, Normalization};
pub use solver::{
    fit, fit_from, gradient, initialize, multistart_fit, objective, predict_scores, FactorSet, FitResult,
    Observations, Prediction,
};
pub use sweep::{sweep, SweepRow};
