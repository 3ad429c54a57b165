use thiserror::Error;

/// Errors raised by the rotor-pair library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BohmError {
    #[error("configuration lies on a node of the guiding wave (R² = {density:e})")]
    Node { density: f64 },

    #[error("configuration too close to a pole of the Euler chart (|sin α| = {sin_alpha:e})")]
    Pole { sin_alpha: f64 },

    #[error("xy-projection of an angular momentum vanishes; azimuth undefined")]
    DegenerateProjection,

    #[error("finite-difference stencil touches a node or pole: {0}")]
    Stencil(String),

    #[error("ensemble carries no positive weight")]
    EmptyEnsemble,

    #[error("proposal density {density:e} exceeds rejection envelope {envelope:e}")]
    EnvelopeViolation { density: f64, envelope: f64 },

    #[error("cannot extract {0}: cos φ and sin φ both vanish")]
    IllConditionedExtraction(&'static str),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("relation only holds at ϑ = π/2 (got ϑ = {theta})")]
    Regime { theta: f64 },

    #[error("clipped mass fraction {fraction:e} exceeds the limit {limit:e}")]
    ClippedMassTooLarge { fraction: f64, limit: f64 },

    #[error("histogram bin width {bin_width} is coarser than the requested resolution {target}")]
    Resolution { bin_width: f64, target: f64 },

    #[error("step size underflow at t = {t}: {reason}")]
    StepUnderflow { t: f64, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, BohmError>;
