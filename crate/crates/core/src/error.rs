use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    /// Sites whose variance estimate is exactly zero, so the t-ratio is undefined.
    #[error("degenerate sites (zero variance): {}", format_sites(.0))]
    DegenerateSites(Vec<String>),

    /// A parameter combination where the sparse first-order approximation does not apply.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("posterior odds are infinite (rho = 1)")]
    InfiniteOdds,

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// Report inputs that do not describe the same panel.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_sites(sites: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = sites.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if sites.len() > SHOWN {
        out.push_str(&format!(" (and {} more)", sites.len() - SHOWN));
    }
    out
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
