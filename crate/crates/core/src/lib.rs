pub mod config;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod grid;
pub mod hermite;
pub mod potential;
pub mod snapshot;

pub use error::{Error, Result};
