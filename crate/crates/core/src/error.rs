use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion is not unit length (norm {norm})")]
    Normalization { norm: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate rigid fit: {0}")]
    DegenerateFit(String),

    #[error("radial distortion inversion did not converge for pixel ({x}, {y})")]
    DistortionInversion { x: f64, y: f64 },

    #[error("ray is parallel to the plane")]
    ParallelRay,

    #[error("plane intersection lies behind the camera (s = {s})")]
    BehindCamera { s: f64 },

    #[error("transform chain has a gap at frame {frame}")]
    Gap { frame: u32 },

    #[error("no consecutive frames with enough co-visible landmarks")]
    EmptyChain,

    #[error("frame {frame} is outside the keyframe span [{first}, {last}]")]
    Extrapolation { frame: u32, first: u32, last: u32 },

    #[error("missing in-plane rotation delta for frame {frame}")]
    MissingDelta { frame: u32 },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("{path}:{line}: {msg}")]
    Integrity { path: PathBuf, line: u64, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("cannot parse a frame number from shot name {0:?}")]
    Naming(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("body length undefined: no surviving head-tail pairs")]
    BodyLengthUndefined,

    #[error("empty track")]
    EmptyTrack,

    #[error("scene config error: {0}")]
    Config(String),

    #[error("camera motion not representable as an image-plane rigid transform: {0}")]
    NotRepresentable(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, msg: msg.into() }
    }

    pub(crate) fn integrity(path: impl Into<PathBuf>, line: u64, msg: impl Into<String>) -> Self {
        Error::Integrity { path: path.into(), line, msg: msg.into() }
    }
}
