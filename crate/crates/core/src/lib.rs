pub mod cli;
pub mod data;
pub mod dina;
pub mod error;
pub mod mcf;
pub mod metrics;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
