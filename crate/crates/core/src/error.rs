use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("inadmissible exponents: {}", .0.join("; "))]
    Inadmissible(Vec<String>),
    #[error("time {t} outside timeline [0, {horizon}]")]
    OutsideTimeline { t: f64, horizon: f64 },
    #[error("CFL sub-stepping exceeded {max} sub-steps on interval starting at t={t}")]
    CflFailure { t: f64, max: usize },
    #[error("non-finite value detected in {0}")]
    NonFinite(String),
    #[error("inner Stokes loop stagnated after {iterations} iterations (last contraction factor {factor:.3e})")]
    InnerStagnation { iterations: usize, factor: f64 },
    #[error("maximum principle violated: sup|theta| = {observed:.6e} > {bound:.6e}")]
    MaximumPrinciple { observed: f64, bound: f64 },
    #[error("divergence constraint violated: relative divergence {0:.3e}")]
    Divergence(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
