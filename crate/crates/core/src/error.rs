use thiserror::Error;

/// Errors surfaced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A conditional state was requested for a branch whose probability is
    /// below the resolvable floor (1e-14).
    #[error("unreachable measurement branch: probability {probability:.3e} below floor")]
    UnreachableBranch { probability: f64 },

    /// A numerical invariant that should hold by construction failed.
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
