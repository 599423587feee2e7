use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No grid point satisfies the detection constraint.
    #[error("infeasible: no grid point reaches P_D >= {pd_min} (best achievable {best_pd})")]
    Infeasible { pd_min: f64, best_pd: f64 },

    /// A binomial coefficient does not fit the exact integer type.
    #[error("binomial coefficient C({n}, {k}) overflows")]
    Overflow { n: u32, k: u32 },

    /// Malformed configuration or scenario input.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
