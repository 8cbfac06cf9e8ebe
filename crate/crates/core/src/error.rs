use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The time grid cannot represent the spectral content of an envelope.
    #[error("grid spacing {spacing:e} s undersamples the spectrum (needs < {limit:e} s)")]
    Nyquist { spacing: f64, limit: f64 },

    #[error("grid does not resolve the requested structure: {reason}")]
    Grid { reason: String },

    /// Detector averaging only applies when the window spans several round trips.
    #[error("resolution time {resolution:e} s is below {minimum:e} s (3 round trips)")]
    Window { resolution: f64, minimum: f64 },

    #[error("resolution time {resolution:e} s does not exceed the arm delay {delay:e} s")]
    Resolution { resolution: f64, delay: f64 },

    #[error("cross term integrates to {ratio:e} of R0, expected < 1e-6")]
    CrossTerm { ratio: f64 },

    #[error("comb peak {peak} is unreachable: envelope |g| = {envelope:e} <= 1e-3")]
    UnreachablePeak { peak: i64, envelope: f64 },

    #[error("excision residual {residual:.4} exceeds 0.25; wideband and comb peak shapes do not match")]
    PoorMatch { residual: f64 },

    #[error("neighbour peak {peak} keeps only {retained:.4} of its window energy (needs >= 0.9)")]
    NeighborLoss { peak: i64, retained: f64 },

    #[error("sampling density integrates to zero")]
    DegenerateDensity,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical precondition, as opposed to a bad parameter.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter { .. })
    }
}
