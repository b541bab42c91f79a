use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("grid too coarse: {what} {value} violates limit {limit}")]
    GridTooCoarse { what: &'static str, value: f64, limit: f64 },
    #[error("wave packet escapes the domain: boundary weight {weight:e} exceeds {limit:e}")]
    PacketEscapesDomain { weight: f64, limit: f64 },
    #[error("state is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },
    #[error("states live on different grids")]
    MismatchedGrids,
    #[error("superposition has zero total norm")]
    ZeroNorm,
    #[error("invalid pointer index {0}; expected 1 or 2")]
    InvalidPointerIndex(u8),
    #[error("invalid coupling schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("shift {lambda} outside the supported range |λ| < {limit}")]
    LambdaOutOfRange { lambda: f64, limit: f64 },
    #[error("no feasible schedule for λ = {lambda}: t2 = {t2} must lie strictly before read-out {t_read}")]
    ScheduleInfeasible { lambda: f64, t2: f64, t_read: f64 },
    #[error("mean {0} outside [-1, 1]")]
    MeanOutOfRange(f64),
    #[error("λ grid is not uniform")]
    NonUniformLambdaGrid,
    #[error("samples are not Hermitian-symmetric about λ = 0")]
    AsymmetricSamples,
    #[error("inversion left an imaginary residue of {0:e}")]
    ImaginaryResidue(f64),
    #[error("invalid samples: {0}")]
    InvalidSamples(&'static str),
    #[error("invalid momentum grid: {0}")]
    InvalidMomentumGrid(&'static str),
    #[error("invalid shot plan: {0}")]
    InvalidShotPlan(&'static str),
}

impl Error {
    /// True for failures raised by a numerical guard during a computation,
    /// as opposed to inputs that were rejected up front.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::PacketEscapesDomain { .. }
                | Error::LambdaOutOfRange { .. }
                | Error::ImaginaryResidue(_)
                | Error::NotNormalized { .. }
        )
    }
}
