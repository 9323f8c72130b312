//! On-disk formats. Binary arrays are row-major little-endian; metadata is
//! JSON.

use std::fs;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thz_envsense_core::envmap::{EncodeParams, EncodedMap};
use thz_envsense_core::raytrace::BLOCKED_FILE_DBM;
use thz_envsense_core::{ChannelParams, GridSpec, Obstacle, ObstacleMask, Point, RadioMap, Scene};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub rows: usize,
    pub cols: usize,
    pub length_m: f64,
    pub width_m: f64,
}

impl GridFile {
    pub fn to_grid(self) -> Result<GridSpec> {
        Ok(GridSpec::new(
            self.rows,
            self.cols,
            self.length_m,
            self.width_m,
        )?)
    }
}

impl From<GridSpec> for GridFile {
    fn from(g: GridSpec) -> Self {
        Self {
            rows: g.n_rows,
            cols: g.n_cols,
            length_m: g.area_length,
            width_m: g.area_width,
        }
    }
}

/// Channel parameters with angles in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub carrier_hz: f64,
    pub beamwidth_deg: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub absorption_per_m: f64,
    pub reflection_loss_db: f64,
    pub diffraction_loss_db: f64,
    pub beam_boresight_deg: f64,
    pub sidelobe_gain_db: f64,
}

impl Default for ChannelFile {
    fn default() -> Self {
        ChannelParams::default().into()
    }
}

impl From<ChannelParams> for ChannelFile {
    fn from(p: ChannelParams) -> Self {
        Self {
            carrier_hz: p.carrier_hz,
            beamwidth_deg: p.beamwidth_rad.to_degrees(),
            tx_power_dbm: p.tx_power_dbm,
            noise_dbm: p.noise_dbm,
            absorption_per_m: p.absorption_per_m,
            reflection_loss_db: p.reflection_loss_db,
            diffraction_loss_db: p.diffraction_loss_db,
            beam_boresight_deg: p.beam_boresight_rad.to_degrees(),
            sidelobe_gain_db: p.sidelobe_gain_db,
        }
    }
}

impl ChannelFile {
    pub fn to_params(self) -> Result<ChannelParams> {
        let p = ChannelParams {
            carrier_hz: self.carrier_hz,
            beamwidth_rad: self.beamwidth_deg.to_radians(),
            tx_power_dbm: self.tx_power_dbm,
            noise_dbm: self.noise_dbm,
            absorption_per_m: self.absorption_per_m,
            reflection_loss_db: self.reflection_loss_db,
            diffraction_loss_db: self.diffraction_loss_db,
            beam_boresight_rad: self.beam_boresight_deg.to_radians(),
            sidelobe_gain_db: self.sidelobe_gain_db,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeFile {
    pub psi_min_dbm: f64,
    pub psi_max_dbm: f64,
    pub psi_smin: f64,
    pub psi_smax: f64,
}

impl From<EncodeParams> for EncodeFile {
    fn from(e: EncodeParams) -> Self {
        Self {
            psi_min_dbm: e.psi_min_dbm,
            psi_max_dbm: e.psi_max_dbm,
            psi_smin: e.psi_smin,
            psi_smax: e.psi_smax,
        }
    }
}

impl EncodeFile {
    pub fn to_params(self) -> Result<EncodeParams> {
        let e = EncodeParams {
            psi_min_dbm: self.psi_min_dbm,
            psi_max_dbm: self.psi_max_dbm,
            psi_smin: self.psi_smin,
            psi_smax: self.psi_smax,
        };
        e.validate()?;
        Ok(e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub seed: u64,
    pub bs: [f64; 2],
    pub grid: GridFile,
    /// Counter-clockwise vertices, meters.
    pub obstacles: Vec<[[f64; 2]; 4]>,
}

impl From<&Scene> for SceneFile {
    fn from(s: &Scene) -> Self {
        Self {
            seed: s.seed,
            bs: [s.bs_location.x, s.bs_location.y],
            grid: s.grid.into(),
            obstacles: s
                .obstacles
                .iter()
                .map(|o| o.vertices().map(|v| [v.x, v.y]))
                .collect(),
        }
    }
}

impl SceneFile {
    pub fn to_scene(&self) -> Result<Scene> {
        let obstacles = self
            .obstacles
            .iter()
            .map(|q| Obstacle::new(q.map(|[x, y]| Point::new(x, y))))
            .collect::<Result<_, _>>()?;
        Ok(Scene {
            obstacles,
            bs_location: Point::new(self.bs[0], self.bs[1]),
            grid: self.grid.to_grid()?,
            seed: self.seed,
        })
    }
}

/// Sensor layout; the measurements live in a companion `.f32` file in the
/// same order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFile {
    pub sampling_rate: f64,
    pub sensor_cells: Vec<usize>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::corrupt(path, format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(Error::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::corrupt(path, e.to_string()))
}

fn f32_bytes(values: impl Iterator<Item = f32>) -> Vec<u8> {
    values.flat_map(f32::to_le_bytes).collect()
}

/// Nearest `f32` not larger in magnitude than `x`, so levels stay on the
/// same side of any threshold they satisfied in `f64`.
pub fn f32_toward_zero(x: f64) -> f32 {
    let y = x as f32;
    if (y as f64).abs() > x.abs() {
        f32::from_bits(y.to_bits() - 1)
    } else {
        y
    }
}

pub fn write_f32(path: &Path, values: impl Iterator<Item = f64>) -> Result<()> {
    fs::write(path, f32_bytes(values.map(|v| v as f32))).map_err(Error::io(path))
}

pub fn read_f32(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_f32(path, &bytes, expected_len)
}

fn decode_f32(path: &Path, bytes: &[u8], expected_len: usize) -> Result<Vec<f64>> {
    if bytes.len() != 4 * expected_len {
        return Err(Error::corrupt(
            path,
            format!("expected {} bytes, found {}", 4 * expected_len, bytes.len()),
        ));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::corrupt(path, "non-finite value"));
    }
    Ok(values)
}

/// Radio map as dBm; blocked cells are stored as a sentinel far below any
/// noise floor.
pub fn write_radio_map(path: &Path, map: &RadioMap) -> Result<()> {
    write_f32(path, map.file_values())
}

pub fn read_radio_map(path: &Path, grid: GridSpec) -> Result<RadioMap> {
    let values = read_f32(path, grid.len())?
        .into_iter()
        .map(|v| if v == BLOCKED_FILE_DBM { f64::NAN } else { v })
        .collect();
    Ok(RadioMap::from_values(grid, values).expect("length checked"))
}

pub fn write_mask(path: &Path, mask: &ObstacleMask) -> Result<()> {
    let bytes: Vec<u8> = mask.as_slice().iter().map(|&b| b as u8).collect();
    fs::write(path, bytes).map_err(Error::io(path))
}

pub fn read_mask(path: &Path, grid: GridSpec) -> Result<ObstacleMask> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    if bytes.len() != grid.len() {
        return Err(Error::corrupt(
            path,
            format!("expected {} bytes, found {}", grid.len(), bytes.len()),
        ));
    }
    let cells = bytes
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::corrupt(
                path,
                format!("mask byte {other} is not 0 or 1"),
            )),
        })
        .collect::<Result<_>>()?;
    Ok(ObstacleMask::from_cells(grid, cells).expect("length checked"))
}

/// Three planes (R, G, B) back to back, values rounded toward zero.
pub fn encoded_bytes(img: &EncodedMap) -> Vec<u8> {
    f32_bytes(img.channels().iter().flatten().map(|&v| f32_toward_zero(v)))
}

pub fn write_encoded(path: &Path, img: &EncodedMap) -> Result<()> {
    fs::write(path, encoded_bytes(img)).map_err(Error::io(path))
}

pub fn decode_encoded(path: &Path, bytes: &[u8], grid: GridSpec) -> Result<EncodedMap> {
    let n = grid.len();
    let mut values = decode_f32(path, bytes, 3 * n)?;
    let b = values.split_off(2 * n);
    let g = values.split_off(n);
    Ok(EncodedMap::from_planes(grid, [values, g, b]).expect("length checked"))
}

pub fn read_encoded(path: &Path, grid: GridSpec) -> Result<EncodedMap> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_encoded(path, &bytes, grid)
}
