//! Non-learning completions of a prior map. Neither estimator has a notion
//! of obstacles, so no output cell is ever blocked.

use alloc::vec::Vec;

use thiserror::Error;

use crate::envmap::PriorMap;
use crate::raytrace::RadioMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("prior map has no sensors")]
    EmptyPrior,
    #[error("IDW power must be positive, got {0}")]
    InvalidPower(f64),
}

pub const DEFAULT_IDW_POWER: f64 = 2.0;

const TIE_REL_TOL: f64 = 1e-12;

/// Every cell copies its nearest sensor (Euclidean on cell centers); ties go
/// to the lowest row-major index.
pub fn nearest_neighbor_fill(prior: &PriorMap) -> Result<RadioMap, BaselineError> {
    if prior.is_empty() {
        return Err(BaselineError::EmptyPrior);
    }
    let grid = prior.grid;
    let sensors: Vec<_> = prior
        .iter()
        .map(|(i, v)| (grid.cell_center_of(i), v))
        .collect();
    let values = (0..grid.len())
        .map(|i| {
            let p = grid.cell_center_of(i);
            let mut best = (f64::INFINITY, 0.0);
            // Sensors are in ascending index order; distances equal up to
            // rounding count as ties and keep the first.
            for &(s, v) in &sensors {
                let d = (s - p).dot(s - p);
                if d < best.0 * (1.0 - TIE_REL_TOL) {
                    best = (d, v);
                }
            }
            best.1
        })
        .collect();
    Ok(RadioMap::from_values(grid, values).expect("grid-sized output"))
}

/// Inverse-distance weighting in the dBm domain; sensor cells keep their
/// measurements.
pub fn idw_fill(prior: &PriorMap, power: f64) -> Result<RadioMap, BaselineError> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(BaselineError::InvalidPower(power));
    }
    if prior.is_empty() {
        return Err(BaselineError::EmptyPrior);
    }
    let grid = prior.grid;
    let sensors: Vec<_> = prior
        .iter()
        .map(|(i, v)| (grid.cell_center_of(i), v))
        .collect();
    let is_sensor = prior.sensor_mask();
    let half_power = 0.5 * power;
    let mut values: Vec<f64> = (0..grid.len())
        .map(|i| {
            if is_sensor[i] {
                return 0.0;
            }
            let p = grid.cell_center_of(i);
            let (mut num, mut den) = (0.0, 0.0);
            for &(s, v) in &sensors {
                let d2 = (s - p).dot(s - p);
                let w = libm::pow(d2, -half_power);
                num += w * v;
                den += w;
            }
            num / den
        })
        .collect();
    for (i, v) in prior.iter() {
        values[i] = v;
    }
    Ok(RadioMap::from_values(grid, values).expect("grid-sized output"))
}
