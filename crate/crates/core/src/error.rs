use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown potential family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate potential: V' and V'' both vanish near theta = {theta}")]
    DegeneratePotential { theta: f64 },
    #[error("integrator step failure at s = {s}: {reason}")]
    StepFailure { s: f64, reason: String },
    #[error("pseudo-energy drift {drift:e} exceeds allowance {allowed:e}")]
    EnergyDrift { drift: f64, allowed: f64 },
    #[error("ambiguous tangency at s = {s}")]
    TangencyAmbiguous { s: f64 },
    #[error("trajectory is constant; integer indices are undefined")]
    ConstantTrajectory,
    #[error("endpoint value {theta} lies on the stationary-point set")]
    EndpointOnBoundary { theta: f64 },
    #[error("stationary-point window [{lo}, {hi}] does not cover the trajectory")]
    WindowTooSmall { lo: f64, hi: f64 },
    #[error("no sign change found: {0}")]
    NoBracket(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("divergent arc: the path reaches a point with E - V = 0 (heteroclinic)")]
    DivergentArc,
    #[error("derivative is not finite")]
    NonFiniteDerivative,
    #[error("wrong index: expected {expected}, found {found}")]
    WrongIndex { expected: String, found: String },
    #[error("not a solution: residual {residual:e}")]
    NotASolution { residual: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("bad widths: {0}")]
    BadWidths(String),
    #[error("h and f vanish together at s = {s}")]
    SimultaneousZero { s: f64 },
    #[error("argument outside the domain: {0}")]
    DomainError(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
