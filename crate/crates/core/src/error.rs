use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The BH line `t/α` touches `G` tangentially at the crossing, so the
    /// threshold functional has no derivative there.
    #[error("degenerate crossing at t = {t_star}: 1/alpha - G'(t*) = {slack} <= 0")]
    DegenerateCrossing { t_star: f64, slack: f64 },

    #[error("no normal limit in this regime: {0}")]
    Regime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
