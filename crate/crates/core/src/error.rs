use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sphere dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("sphere radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("points or sets live on different spheres")]
    MismatchedSpheres,
    #[error("invalid point: {0}")]
    InvalidPoint(&'static str),
    #[error("cap angle must be positive for cap sampling")]
    ZeroCapAngle,
    #[error("theta + omega = {sum} does not exceed pi/2; the intersection is trivial in this regime")]
    TrivialIntersectionRegime { sum: f64 },
    #[error("measure of this set is only available as a Monte Carlo estimate")]
    EstimateOnly,
    #[error("unsupported shape for {0}")]
    UnsupportedShape(&'static str),
    #[error("set is not axis-aligned (poles are not collinear)")]
    NotAxisAligned,
    #[error("zonal functions are defined on different grids")]
    GridMismatch,
    #[error("input must be nonincreasing in latitude")]
    NotMonotone,
    #[error("invalid kernel: {0}")]
    InvalidKernel(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid zonal function: {0}")]
    InvalidZonal(&'static str),
}
