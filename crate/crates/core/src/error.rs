use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, \
         error {error:e} after {intervals} intervals"
    )]
    QuadratureFailed {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("generator is singular (pivot {pivot:e}); the steady state is not unique")]
    SingularGenerator { pivot: f64 },

    #[error("steady state is not unique: {0}")]
    NonUniqueSteadyState(&'static str),

    #[error("closed-form denominator vanishes ({denominator:e})")]
    DenominatorZero { denominator: f64 },

    #[error("map is not trace preserving: basis element {element} has trace residual {residual:e}")]
    NotTracePreserving { element: String, residual: f64 },

    #[error(
        "map is not Hermiticity preserving: basis element {element} has residual {residual:e}"
    )]
    NotHermiticityPreserving { element: String, residual: f64 },

    #[error("generator has infinite dephasing; {0} is not representable")]
    InfiniteDephasing(&'static str),

    #[error("ODE step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("every candidate point in the optimization box is flagged")]
    AllPointsFlagged,
}

impl Error {
    /// True for errors caused by caller input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Domain(_) | Error::NonUniqueSteadyState(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
