//! Dataset generation settings and their JSON overlay.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thz_envsense_core::envmap::DEFAULT_PSI_SMAX;
use thz_envsense_core::scenario::DEFAULT_RETRY_BUDGET;
use thz_envsense_core::{GridSpec, ScenarioConfig};

use crate::error::{Error, Result};
use crate::formats::{read_json, ChannelFile, GridFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!(
                "unknown split {other:?} (expected train or test)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub split: Split,
    pub n_scenes: usize,
    pub obstacle_count_choices: Vec<usize>,
    pub size_range_m: [f64; 2],
    pub margin_m: f64,
    pub retry_budget: u32,
    pub sampling_rate: f64,
    pub master_seed: u64,
    pub grid: GridFile,
    pub channel: ChannelFile,
    pub psi_smax: f64,
    /// Draw a uniform boresight per scene instead of the channel's fixed one.
    pub random_boresight: bool,
}

impl DatasetConfig {
    /// 4500 scenes of 1 to 5 obstacles for training, 900 scenes of 6 for
    /// testing, sensors on half of the free cells.
    pub fn for_split(split: Split) -> Self {
        let scenario = ScenarioConfig::default();
        let (n_scenes, counts) = match split {
            Split::Train => (4500, scenario.obstacle_count_choices.clone()),
            Split::Test => (900, vec![6]),
        };
        Self {
            split,
            n_scenes,
            obstacle_count_choices: counts,
            size_range_m: [scenario.size_range.0, scenario.size_range.1],
            margin_m: scenario.margin,
            retry_budget: DEFAULT_RETRY_BUDGET,
            sampling_rate: 0.5,
            master_seed: 0,
            grid: GridSpec::standard().into(),
            channel: ChannelFile::default(),
            psi_smax: DEFAULT_PSI_SMAX,
            random_boresight: false,
        }
    }

    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            obstacle_count_choices: self.obstacle_count_choices.clone(),
            size_range: (self.size_range_m[0], self.size_range_m[1]),
            margin: self.margin_m,
            retry_budget: self.retry_budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_scenes == 0 {
            return Err(Error::Config("n_scenes must be at least 1".into()));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(Error::Config(format!(
                "sampling rate must lie in (0, 1], got {}",
                self.sampling_rate
            )));
        }
        self.scenario().validate()?;
        self.grid.to_grid()?;
        self.channel.to_params()?;
        Ok(())
    }

    pub fn apply(&mut self, file: &ConfigFile) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if let Some(v) = &file.$f {
                    self.$f = v.clone();
                }
            )*};
        }
        take!(
            n_scenes,
            obstacle_count_choices,
            size_range_m,
            margin_m,
            retry_budget,
            sampling_rate,
            master_seed,
            grid,
            channel,
            psi_smax,
            random_boresight
        );
    }
}

/// Every field optional; present fields replace the split defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub split: Option<Split>,
    pub n_scenes: Option<usize>,
    pub obstacle_count_choices: Option<Vec<usize>>,
    pub size_range_m: Option<[f64; 2]>,
    pub margin_m: Option<f64>,
    pub retry_budget: Option<u32>,
    pub sampling_rate: Option<f64>,
    pub master_seed: Option<u64>,
    pub grid: Option<GridFile>,
    pub channel: Option<ChannelFile>,
    pub psi_smax: Option<f64>,
    pub random_boresight: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path).map_err(|e| match e {
            Error::Corrupt { path, reason } => {
                Error::Config(format!("{}: {reason}", path.display()))
            }
            other => other,
        })
    }
}

/// Parses `A-B` (inclusive range) or a single count `N`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid obstacle counts {s:?} (expected A-B or N)"));
    let counts: Vec<usize> = match s.split_once('-') {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        }
        None => vec![s.trim().parse().map_err(|_| bad())?],
    };
    if counts.is_empty() || counts[0] == 0 {
        return Err(bad());
    }
    Ok(counts)
}
