use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use thz_envsense_core::baselines::BaselineError;
use thz_envsense_core::channel::ChannelError;
use thz_envsense_core::envmap::EnvMapError;
use thz_envsense_core::metrics::MetricsError;
use thz_envsense_core::raytrace::TraceError;
use thz_envsense_core::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: corrupt record: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("{path}: dataset format version {found} is not supported (expected {expected})")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no dataset manifest at {0}")]
    MissingDataset(PathBuf),
    #[error("scene {0} is not in the dataset")]
    UnknownScene(u64),
    #[error("missing prediction for scene {scene_id}: {path}")]
    MissingPrediction { scene_id: u64, path: PathBuf },
    #[error("prediction for scene {scene_id} has {found} bytes, expected {expected}")]
    PredictionShape {
        scene_id: u64,
        found: usize,
        expected: usize,
    },
    #[error("scene {scene_id} (seed {seed}): {source}")]
    Placement {
        scene_id: u64,
        seed: u64,
        source: ScenarioError,
    },
    #[error("scene {scene_id}: {source}")]
    Trace { scene_id: u64, source: TraceError },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    EnvMap(#[from] EnvMapError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn io(path: impl AsRef<Path>) -> impl FnOnce(io::Error) -> Self {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }

    pub fn corrupt(path: impl AsRef<Path>, reason: impl Into<String>) -> Self {
        Error::Corrupt {
            path: path.as_ref().to_path_buf(),
            reason: reason.into(),
        }
    }

    /// Errors caused by the caller's inputs rather than by the run itself.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::MissingDataset(_)
                | Error::UnknownScene(_)
                | Error::MissingPrediction { .. }
                | Error::PredictionShape { .. }
                | Error::VersionMismatch { .. }
                | Error::Scenario(_)
                | Error::Channel(_)
                | Error::EnvMap(EnvMapError::InvalidParams(_) | EnvMapError::InvalidRate(_))
                | Error::Metrics(MetricsError::InvalidThreshold(_))
                | Error::Baseline(BaselineError::InvalidPower(_))
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
