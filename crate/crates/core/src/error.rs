use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate lattice: rho = {rho}, theta = {theta} (need rho > 0 and 0 < theta <= pi/2)")]
    DegenerateLattice { rho: f64, theta: f64 },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]")]
    InvalidRect {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("input ({x1}, {x2}) lies outside the protocol domain")]
    InputOutOfDomain { x1: f64, x2: f64 },

    #[error("probability totals differ: {0} vs {1}")]
    MismatchedTotals(f64, f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
}
