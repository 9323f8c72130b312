//! Dataset files, evaluation and rendering on top of `thz-envsense-core`.
//!
//! A corpus is a directory holding `manifest.json` and one set of files per
//! scene (see [`dataset`]). Predictions from any producer are 3-plane
//! `gen_{id}.f32` files scored by [`evaluate::evaluate_predictions`].

pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod formats;
pub mod render;

pub use config::{DatasetConfig, Split};
pub use dataset::{generate_dataset, Dataset, DatasetManifest, Generator, Record};
pub use error::{Error, Result};
pub use evaluate::{evaluate_predictions, run_baseline, Method, ReportFile};
