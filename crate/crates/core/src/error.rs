use std::io;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::netcalc::TargetSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),

    #[error("load impedance {0} cancels the reference impedance")]
    SingularLoad(Complex64),

    #[error("reflection coefficient {0} has no finite load impedance")]
    SingularReflection(Complex64),

    #[error("network resonance: |1 - S22*GammaL| = {0:e}")]
    ResonanceSingularity(f64),

    #[error("amplitude {0} is outside [0, 1]")]
    AmplitudeOutOfRange(f64),

    #[error("switch states are indistinguishable (|GammaL0 - GammaL1| = {0:e})")]
    NoContrast(f64),

    #[error("coding equation has no root; best residual {:e}", .0.residual)]
    NoSolution(Box<TargetSolution>),

    #[error("reflection magnitude must be in (0, 1], got {0}")]
    ReflectionMagnitude(f64),

    #[error("invalid genome string {input:?}: {reason}")]
    ParseGenome { input: String, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset needs at least {needed} samples, has {found}")]
    DatasetTooSmall { needed: usize, found: usize },

    #[error("oracle fingerprint mismatch: file has {found}, current constants give {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("training diverged at epoch {epoch} (loss is not finite)")]
    Divergence { epoch: usize },

    #[error("target has no weighted points")]
    EmptyTarget,

    #[error("required input {} does not exist", .0.display())]
    MissingArtifact(PathBuf),

    #[error("refusing to overwrite existing artifact {}", .0.display())]
    ArtifactExists(PathBuf),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
