use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not reach tolerance {tolerance:e}: estimate {estimate:e}, error {error:e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },
    #[error("singular regression: {0}")]
    SingularRegression(String),
    #[error("ambiguous classification: best R^2 = {best_r_squared}")]
    AmbiguousClassification { best_r_squared: f64 },
    #[error("drag table is not monotone near h = {h}")]
    NonMonotoneTable { h: f64 },
    #[error("step size underflow at t = {t}, h = {h:e} (dt = {dt:e})")]
    StepUnderflow { t: f64, h: f64, dt: f64 },
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::SingularRegression(_)
                | Error::AmbiguousClassification { .. }
                | Error::StepUnderflow { .. }
        )
    }
}
