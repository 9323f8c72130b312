//! Weight-targeted encodings of radio maps.
//!
//! RSS in dBm is clamped to `[psi_min_dbm, psi_max_dbm]` and mapped affinely
//! onto `[psi_smin, psi_smax]`; obstacle cells get weight 1. Complete maps
//! encode as gray images. Prior maps encode sensor cells as gray and every
//! other cell as pure red `[1, 0, 0]`. Segmenting a compressed image keeps the
//! cells in `(psi_smax, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::channel::{self, ChannelParams};
use crate::raytrace::RadioMap;
use crate::scenario::{GridSpec, ObstacleMask};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvMapError {
    #[error("invalid encoding parameters: {0}")]
    InvalidParams(&'static str),
    #[error("sampling rate must lie in (0, 1], got {0}")]
    InvalidRate(f64),
    #[error("scene has no obstacle-free cells to place sensors in")]
    NoFreeCells,
    #[error("grid mismatch between inputs")]
    GridMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodeParams {
    pub psi_min_dbm: f64,
    pub psi_max_dbm: f64,
    pub psi_smin: f64,
    pub psi_smax: f64,
}

pub const DEFAULT_PSI_SMAX: f64 = 0.9;

impl EncodeParams {
    pub fn new(psi_min_dbm: f64, psi_max_dbm: f64, psi_smax: f64) -> Result<Self, EnvMapError> {
        let p = Self {
            psi_min_dbm,
            psi_max_dbm,
            psi_smin: 0.0,
            psi_smax,
        };
        p.validate()?;
        Ok(p)
    }

    /// Dataset-wide bounds: the noise floor below, and above the strongest
    /// main-lobe LOS power at one cell diagonal from the transmitter.
    pub fn for_channel(
        params: &ChannelParams,
        grid: &GridSpec,
        psi_smax: f64,
    ) -> Result<Self, EnvMapError> {
        let d_min = grid.cell_diagonal();
        let peak = params.tx_power_w()
            * channel::main_lobe_gain(params)
            * channel::free_space_gain(d_min, params)
                .map_err(|_| EnvMapError::InvalidParams("cell diagonal must be positive"))?
            + params.noise_w();
        let psi_max = channel::to_dbm(peak)
            .map_err(|_| EnvMapError::InvalidParams("non-positive peak power"))?;
        Self::new(params.noise_dbm, psi_max, psi_smax)
    }

    pub fn validate(&self) -> Result<(), EnvMapError> {
        if self.psi_smin != 0.0 {
            return Err(EnvMapError::InvalidParams("psi_smin must be 0"));
        }
        if !(self.psi_smax > self.psi_smin && self.psi_smax < 1.0) {
            return Err(EnvMapError::InvalidParams(
                "need 0 = psi_smin < psi_smax < 1",
            ));
        }
        if !(self.psi_min_dbm < self.psi_max_dbm)
            || !self.psi_min_dbm.is_finite()
            || !self.psi_max_dbm.is_finite()
        {
            return Err(EnvMapError::InvalidParams(
                "need finite psi_min_dbm < psi_max_dbm",
            ));
        }
        Ok(())
    }

    /// Weight of a non-obstacle cell with RSS `dbm` (clamped into range).
    pub fn weight_of(&self, dbm: f64) -> f64 {
        let clamped = dbm.clamp(self.psi_min_dbm, self.psi_max_dbm);
        self.psi_smin
            + self.psi_smax * (clamped - self.psi_min_dbm) / (self.psi_max_dbm - self.psi_min_dbm)
    }

    /// Inverse of [`weight_of`](Self::weight_of) on `[psi_smin, psi_smax]`.
    pub fn dbm_of(&self, weight: f64) -> f64 {
        self.psi_min_dbm
            + (weight - self.psi_smin) / self.psi_smax * (self.psi_max_dbm - self.psi_min_dbm)
    }

    /// Normalized value of a map cell: 1 if blocked, the weight otherwise.
    pub fn normalize(&self, value_dbm: Option<f64>) -> f64 {
        match value_dbm {
            Some(v) => self.weight_of(v),
            None => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap {
    grid: GridSpec,
    weights: Vec<f64>,
}

impl WeightMap {
    pub fn from_values(grid: GridSpec, weights: Vec<f64>) -> Option<Self> {
        (weights.len() == grid.len()).then_some(Self { grid, weights })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }
}

/// Sparse measurements: sensor cells (row-major, ascending) and their RSS.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorMap {
    pub grid: GridSpec,
    pub sensor_cells: Vec<usize>,
    pub values_dbm: Vec<f64>,
    pub sampling_rate: f64,
}

impl PriorMap {
    /// Sensor indicator per cell.
    pub fn sensor_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.grid.len()];
        for &i in &self.sensor_cells {
            m[i] = true;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.sensor_cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensor_cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sensor_cells
            .iter()
            .copied()
            .zip(self.values_dbm.iter().copied())
    }
}

/// Three planes of `[0, 1]` values, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedMap {
    grid: GridSpec,
    channels: [Vec<f64>; 3],
}

impl EncodedMap {
    pub fn from_planes(grid: GridSpec, channels: [Vec<f64>; 3]) -> Option<Self> {
        channels
            .iter()
            .all(|c| c.len() == grid.len())
            .then_some(Self { grid, channels })
    }

    /// Same level in all three channels.
    pub fn gray(grid: GridSpec, values: Vec<f64>) -> Option<Self> {
        (values.len() == grid.len()).then(|| Self::gray_unchecked(grid, values))
    }

    fn gray_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        Self {
            grid,
            channels: [values.clone(), values.clone(), values],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn channels(&self) -> &[Vec<f64>; 3] {
        &self.channels
    }

    pub fn pixel(&self, index: usize) -> [f64; 3] {
        [
            self.channels[0][index],
            self.channels[1][index],
            self.channels[2][index],
        ]
    }

    pub fn is_gray(&self, index: usize) -> bool {
        let [r, g, b] = self.pixel(index);
        r == g && g == b
    }

    pub fn is_red(&self, index: usize) -> bool {
        self.pixel(index) == [1.0, 0.0, 0.0]
    }
}

/// Per-cell weights: 1 on obstacles, the affine RSS weight elsewhere.
pub fn compute_weights(
    map: &RadioMap,
    mask: &ObstacleMask,
    enc: &EncodeParams,
) -> Result<WeightMap, EnvMapError> {
    if map.grid() != mask.grid() {
        return Err(EnvMapError::GridMismatch);
    }
    let weights = (0..map.grid().len())
        .map(|i| {
            if mask.is_set(i) {
                1.0
            } else {
                enc.normalize(map.get(i))
            }
        })
        .collect();
    Ok(WeightMap {
        grid: *map.grid(),
        weights,
    })
}

/// Draws `round(rate · free)` sensor cells uniformly without replacement
/// from the obstacle-free cells and copies their RSS.
pub fn sample_prior<R: Rng + ?Sized>(
    map: &RadioMap,
    mask: &ObstacleMask,
    rate: f64,
    rng: &mut R,
) -> Result<PriorMap, EnvMapError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(EnvMapError::InvalidRate(rate));
    }
    if map.grid() != mask.grid() {
        return Err(EnvMapError::GridMismatch);
    }
    let free: Vec<usize> = (0..map.grid().len()).filter(|&i| !mask.is_set(i)).collect();
    if free.is_empty() {
        return Err(EnvMapError::NoFreeCells);
    }
    let count = libm::round(rate * free.len() as f64) as usize;
    let mut sensor_cells: Vec<usize> = index::sample(rng, free.len(), count)
        .into_iter()
        .map(|k| free[k])
        .collect();
    sensor_cells.sort_unstable();
    let values_dbm = sensor_cells
        .iter()
        .map(|&i| map.get(i).ok_or(EnvMapError::GridMismatch))
        .collect::<Result<_, _>>()?;
    Ok(PriorMap {
        grid: *map.grid(),
        sensor_cells,
        values_dbm,
        sampling_rate: rate,
    })
}

/// Gray encoding of the weight map.
pub fn encode_complete(
    map: &RadioMap,
    mask: &ObstacleMask,
    enc: &EncodeParams,
) -> Result<EncodedMap, EnvMapError> {
    let w = compute_weights(map, mask, enc)?;
    Ok(EncodedMap::gray_unchecked(w.grid, w.weights))
}

/// Gray at sensor cells, red everywhere else.
pub fn encode_prior(prior: &PriorMap, enc: &EncodeParams) -> EncodedMap {
    let n = prior.grid.len();
    let mut channels = [vec![1.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, v) in prior.iter() {
        let w = enc.weight_of(v);
        for c in channels.iter_mut() {
            c[i] = w;
        }
    }
    EncodedMap {
        grid: prior.grid,
        channels,
    }
}

/// Channel mean per cell, clamped to `[0, 1]`. Gray pixels map to their
/// level exactly.
pub fn compress_channels(img: &EncodedMap) -> Vec<f64> {
    let [r, g, b] = &img.channels;
    r.iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| {
            let mean = if r == g && g == b {
                r
            } else {
                (r + g + b) / 3.0
            };
            mean.clamp(0.0, 1.0)
        })
        .collect()
}

/// Cells whose compressed value lies in `(psi_smax, 1]`.
pub fn segment(grid: GridSpec, compressed: &[f64], enc: &EncodeParams) -> ObstacleMask {
    let cells = compressed
        .iter()
        .map(|&v| v > enc.psi_smax && v <= 1.0)
        .collect();
    ObstacleMask::from_cells(grid, cells).expect("compressed map must match the grid")
}

/// Aware map from a generated image: segmented cells become blocked, the
/// rest are mapped back to dBm, and every sensor cell is overwritten with
/// its measurement.
pub fn decode_to_rss(
    generated: &EncodedMap,
    prior: &PriorMap,
    enc: &EncodeParams,
) -> Result<RadioMap, EnvMapError> {
    if generated.grid != prior.grid {
        return Err(EnvMapError::GridMismatch);
    }
    let grid = generated.grid;
    let compressed = compress_channels(generated);
    let segmented = segment(grid, &compressed, enc);
    let mut values: Vec<f64> = compressed
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if segmented.is_set(i) {
                f64::NAN
            } else {
                enc.dbm_of(w)
            }
        })
        .collect();
    for (i, v) in prior.iter() {
        values[i] = v;
    }
    RadioMap::from_values(grid, values).ok_or(EnvMapError::GridMismatch)
}

/// Weights of an aware map under the same encoding, for scoring and for
/// segmentation of estimators without an obstacle notion.
pub fn normalized_values(map: &RadioMap, enc: &EncodeParams) -> Vec<f64> {
    (0..map.grid().len())
        .map(|i| enc.normalize(map.get(i)))
        .collect()
}
