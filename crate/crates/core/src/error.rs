use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown surface kind `{0}`")]
    UnknownKind(String),
    #[error("degenerate surface parameters: {0}")]
    DegenerateParameters(String),
    #[error("invalid grid request: {0}")]
    InvalidGrid(String),
    #[error("rank-deficient chart Jacobian at node ({u:.6}, {v:.6})")]
    RankDeficient { u: f64, v: f64 },
    #[error("Newton iteration did not converge: {0}")]
    NewtonFailed(String),
    #[error("point is beyond the reach of the surface (distance {distance:.4e}, reach {reach:.4e})")]
    BeyondReach { distance: f64, reach: f64 },
    #[error("collar map is not injective: {0}")]
    InjectivityFailure(String),
    #[error("singular patch too wide: {0}")]
    PatchTooWide(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("evaluation point too close to a source: {0}")]
    TooClose(String),
    #[error("point lies outside the solution region: {0}")]
    WrongRegion(String),
    #[error("dense solve failed: {0}")]
    SolveFailed(String),
    #[error("circulation mismatch on cycle {cycle}: expected {expected}, got {got}")]
    CirculationMismatch { cycle: String, expected: f64, got: f64 },
    #[error("incoming field violates the flux compatibility condition (residual {residual:.3e})")]
    Compatibility { residual: f64 },
    #[error("flux specification does not match the surface: {0}")]
    FluxCount(String),
    #[error("trace identity check failed: relative error {0:.3e}")]
    TraceIdentity(f64),
    #[error("collar quadrature under-resolves the boundary layer: {0}")]
    UnderResolved(String),
    #[error("eigen-solver failure: {0}")]
    Eigen(String),
    #[error("single-layer matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("spectral containment violated: {0}")]
    Containment(String),
    #[error("Bessel zero search failed: {0}")]
    BesselZero(String),
    #[error("disk coefficient tail not converged: {0}")]
    UnconvergedTail(String),
    #[error("invalid slope data: {0}")]
    SlopeData(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
