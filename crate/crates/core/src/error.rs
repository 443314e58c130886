use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::eigensolve::SpectrumResult;

/// Named hypotheses that a strip model or study can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Assumption {
    /// `a * sup |k.Theta| < 1`.
    BoundedGeodesicCurvature,
    /// `a * sup |Theta'| <= sqrt(2)`.
    HardySmallness,
    /// `k.Theta` and `|Theta'|` decay at the ends of the window.
    AsymptoticallyFlat,
    /// Boundedness of `k.Theta`, `(k.Theta)'`, `|Theta'|`, `|Theta''|`.
    ThinRegularity,
}

impl Assumption {
    pub fn name(self) -> &'static str {
        match self {
            Assumption::BoundedGeodesicCurvature => "assumption_2_1",
            Assumption::HardySmallness => "hardy_smallness",
            Assumption::AsymptoticallyFlat => "asymptotically_flat",
            Assumption::ThinRegularity => "thin_regularity",
        }
    }
}

#[derive(Debug)]
pub enum Error {
    UnknownFamily(String),
    DimensionTooSmall { what: &'static str, dim: usize, min: usize },
    NonPositive { name: &'static str, value: f64 },
    TooFewNodes { needed: usize, got: usize },
    NotOrthonormal { deviation: f64 },
    DegenerateTangent { index: usize, norm: f64 },
    VanishingCurvature { index: usize, kappa: f64 },
    GridMismatch,
    DimensionMismatch { expected: usize, got: usize },
    AssumptionViolated { assumption: Assumption, index: usize, value: f64 },
    OutOfRange { what: &'static str, value: f64, limit: f64 },
    BendingPresent { index: usize, k_theta: f64 },
    ZeroVector,
    NonPositiveMass { index: usize, value: f64 },
    IndefiniteShift { iteration: usize, curvature: f64 },
    ShiftNotBelowFloor { z: f64, floor: f64 },
    WindowTooSmall { needed: f64, got: f64 },
    Hypothesis(String),
    NotConverged(Box<SpectrumResult>),
    CgStalled { iterations: usize, relative_residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownFamily(name) => write!(f, "unknown curve family `{name}`"),
            Error::DimensionTooSmall { what, dim, min } => {
                write!(f, "{what} needs ambient dimension >= {min}, got {dim}")
            }
            Error::NonPositive { name, value } => write!(f, "`{name}` must be positive, got {value}"),
            Error::TooFewNodes { needed, got } => write!(f, "need at least {needed} nodes, got {got}"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "frame is not orthonormal (deviation {deviation:e})")
            }
            Error::DegenerateTangent { index, norm } => {
                write!(f, "tangent at node {index} has norm {norm}, curve is not arc-length parameterized")
            }
            Error::VanishingCurvature { index, kappa } => {
                write!(f, "curvature {kappa:e} at node {index} is too small for a Frenet frame")
            }
            Error::GridMismatch => write!(f, "inputs are sampled on different grids"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::AssumptionViolated { assumption, index, value } => {
                write!(f, "{} violated at node {index} (value {value})", assumption.name())
            }
            Error::OutOfRange { what, value, limit } => {
                write!(f, "{what} = {value} exceeds the admissible limit {limit}")
            }
            Error::BendingPresent { index, k_theta } => {
                write!(f, "potential formulation requires k.Theta = 0, found {k_theta:e} at node {index}")
            }
            Error::ZeroVector => write!(f, "zero vector"),
            Error::NonPositiveMass { index, value } => {
                write!(f, "mass entry {index} is {value}, expected positive")
            }
            Error::IndefiniteShift { iteration, curvature } => {
                write!(f, "shifted system is indefinite (curvature {curvature:e} at CG iteration {iteration})")
            }
            Error::ShiftNotBelowFloor { z, floor } => {
                write!(f, "shift z = {z} must lie strictly below {floor}")
            }
            Error::WindowTooSmall { needed, got } => {
                write!(f, "window half-length {got} is smaller than the required {needed}")
            }
            Error::Hypothesis(msg) => write!(f, "hypothesis not satisfied: {msg}"),
            Error::NotConverged(best) => write!(
                f,
                "eigensolver did not converge after {} iterations (max residual {:e})",
                best.iterations,
                best.residuals.iter().cloned().fold(0.0, f64::max)
            ),
            Error::CgStalled { iterations, relative_residual } => write!(
                f,
                "conjugate gradients stalled after {iterations} iterations (relative residual {relative_residual:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
