use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids do not share a header")]
    GridMismatch,
    #[error("point ({0}, {1}) is outside the grid domain")]
    OutOfDomain(f64, f64),
    #[error("integration region is empty")]
    EmptyRegion,
    #[error("no graph samples intersect the ball")]
    EmptyIntersection,
    #[error("sample point is too close to a region interface")]
    InterfaceTooClose,
    #[error("invalid surface parameters: {0}")]
    InvalidSurface(String),
    #[error("surface sampling is not injective: {0}")]
    NonInjective(String),
    #[error("unknown surface id {0:?}")]
    UnknownSurface(String),
    #[error("curve leaves the domain at its starting point")]
    ImmediateExit,
    #[error("variation support is not compactly contained in the domain")]
    SupportNotCompact,
    #[error("expression error: {0}")]
    Expr(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
