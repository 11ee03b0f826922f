pub mod bayes;
pub mod cli;
pub mod error;
pub mod harness;
pub mod measure;
pub mod output;
pub mod purify;
pub mod qubit;
pub mod state;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
