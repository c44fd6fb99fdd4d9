use alloc::string::String;
use core::fmt;

/// Machine-readable reason an existence condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum RefusalCode {
    UnboundedHomogeneous,
    ResonantForcing,
    NoCommonPeriod,
    ConfigInvalid,
}

impl RefusalCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RefusalCode::UnboundedHomogeneous => "UNBOUNDED_HOMOGENEOUS",
            RefusalCode::ResonantForcing => "RESONANT_FORCING",
            RefusalCode::NoCommonPeriod => "NO_COMMON_PERIOD",
            RefusalCode::ConfigInvalid => "CONFIG_INVALID",
        }
    }
}

impl fmt::Display for RefusalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The oscillator configuration violates a structural invariant.
    InvalidSpec(String),
    /// The integrator could not keep the local error under control; usually a
    /// sign of exponentially growing solutions.
    StepSizeUnderflow { t: f64, h: f64 },
    MaxStepsExceeded { t: f64, steps: usize },
    /// State or integrand became NaN or infinite.
    NonFinite { t: f64 },
    UnsupportedHermiteOrder { m: usize, max: usize },
    /// Two homogeneous solutions with vanishing Wronskian.
    LinearlyDependentPair { omega: f64 },
    /// Hyperbolic monodromy, or parabolic without a full eigenbasis.
    UnboundedHomogeneous { trace: f64 },
    ResonantForcing { det: f64 },
    NoCommonPeriod { cap: u32 },
    /// Forcing period is not a small rational multiple of `tau`.
    IncommensurateForcing { ratio: f64 },
    /// A periodic-frame quantity was requested on a frame without a
    /// certified common period.
    NotPeriodic,
    AngleUndefined,
    OutsideEllipse { x: f64 },
    /// Two routes to the same quantity disagree beyond tolerance.
    Inconsistent {
        what: &'static str,
        first: f64,
        second: f64,
    },
}

impl Error {
    /// The existence condition this error corresponds to, if any.
    pub fn refusal_code(&self) -> Option<RefusalCode> {
        match self {
            Error::InvalidSpec(_) => Some(RefusalCode::ConfigInvalid),
            Error::UnboundedHomogeneous { .. }
            | Error::StepSizeUnderflow { .. }
            | Error::NonFinite { .. } => Some(RefusalCode::UnboundedHomogeneous),
            Error::ResonantForcing { .. } => Some(RefusalCode::ResonantForcing),
            Error::NoCommonPeriod { .. }
            | Error::IncommensurateForcing { .. }
            | Error::NotPeriodic => Some(RefusalCode::NoCommonPeriod),
            _ => None,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid oscillator spec: {msg}"),
            Error::StepSizeUnderflow { t, h } => {
                write!(f, "step size underflow at t = {t} (h = {h}): stiffness or blowup")
            }
            Error::MaxStepsExceeded { t, steps } => {
                write!(f, "integration exceeded {steps} steps at t = {t}")
            }
            Error::NonFinite { t } => write!(f, "non-finite value encountered at t = {t}"),
            Error::UnsupportedHermiteOrder { m, max } => {
                write!(f, "Hermite order {m} above supported maximum {max}")
            }
            Error::LinearlyDependentPair { omega } => {
                write!(f, "linearly dependent pair (Wronskian {omega:e})")
            }
            Error::UnboundedHomogeneous { trace } => write!(
                f,
                "Hannay angle undefined: unbounded homogeneous solutions (monodromy trace {trace})"
            ),
            Error::ResonantForcing { det } => write!(
                f,
                "resonant forcing: no periodic particular solution (det(1 - monodromy) = {det:e})"
            ),
            Error::NoCommonPeriod { cap } => {
                write!(f, "no common period of rho and x_p within {cap} base periods")
            }
            Error::IncommensurateForcing { ratio } => {
                write!(f, "forcing period ratio {ratio} to tau is not rational")
            }
            Error::NotPeriodic => f.write_str("frame has no certified common period"),
            Error::AngleUndefined => f.write_str("angle undefined at ellipse center"),
            Error::OutsideEllipse { x } => {
                write!(f, "x = {x} lies outside the ellipse's x-extent")
            }
            Error::Inconsistent { what, first, second } => {
                write!(f, "inconsistent {what}: {first} vs {second}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
