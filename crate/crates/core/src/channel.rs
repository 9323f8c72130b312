//! THz propagation primitives: spreading loss with molecular absorption,
//! a flat-top transmit beam, and dBm conversions.

use core::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::wrap_angle;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("power must be positive, got {0} W")]
    NonPositivePower(f64),
    #[error("invalid channel parameters: {0}")]
    InvalidParams(&'static str),
}

/// Link-level parameters. Angles are radians here; file formats carry degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub carrier_hz: f64,
    pub beamwidth_rad: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    /// Molecular absorption coefficient, 1/m.
    pub absorption_per_m: f64,
    pub reflection_loss_db: f64,
    pub diffraction_loss_db: f64,
    pub beam_boresight_rad: f64,
    /// Gain outside the main lobe, dB relative to isotropic.
    pub sidelobe_gain_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_hz: 3.0e11,
            beamwidth_rad: 20.0_f64.to_radians(),
            tx_power_dbm: 30.0,
            noise_dbm: -90.0,
            absorption_per_m: 0.0033,
            reflection_loss_db: 10.0,
            diffraction_loss_db: 25.0,
            beam_boresight_rad: 0.0,
            sidelobe_gain_db: -20.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(ChannelError::InvalidParams("carrier_hz must be positive"));
        }
        if !(self.beamwidth_rad > 0.0 && self.beamwidth_rad <= TAU) {
            return Err(ChannelError::InvalidParams("beamwidth must lie in (0, 2π]"));
        }
        if !(self.absorption_per_m >= 0.0 && self.absorption_per_m.is_finite()) {
            return Err(ChannelError::InvalidParams(
                "absorption must be non-negative",
            ));
        }
        if !(self.tx_power_dbm > self.noise_dbm) {
            return Err(ChannelError::InvalidParams(
                "tx power must exceed the noise floor",
            ));
        }
        if !(self.reflection_loss_db >= 0.0 && self.diffraction_loss_db >= 0.0) {
            return Err(ChannelError::InvalidParams(
                "interaction losses must be non-negative",
            ));
        }
        if !self.beam_boresight_rad.is_finite() || !self.sidelobe_gain_db.is_finite() {
            return Err(ChannelError::InvalidParams(
                "beam parameters must be finite",
            ));
        }
        if main_lobe_gain(self) <= 0.0 {
            return Err(ChannelError::InvalidParams(
                "sidelobe gain too high to normalize the beam",
            ));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn tx_power_w(&self) -> f64 {
        from_dbm(self.tx_power_dbm)
    }

    pub fn noise_w(&self) -> f64 {
        from_dbm(self.noise_dbm)
    }
}

/// `(λ / 4πd)² · exp(-k d)`.
pub fn free_space_gain(distance: f64, params: &ChannelParams) -> Result<f64, ChannelError> {
    if !(distance > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance));
    }
    let spreading = params.wavelength() / (4.0 * PI * distance);
    Ok(spreading * spreading * libm::exp(-params.absorption_per_m * distance))
}

/// Linear sidelobe gain.
pub fn sidelobe_gain(params: &ChannelParams) -> f64 {
    db_to_linear(params.sidelobe_gain_db)
}

/// Main-lobe gain that makes the pattern integrate to 2π over the circle.
pub fn main_lobe_gain(params: &ChannelParams) -> f64 {
    let g_side = sidelobe_gain(params);
    let theta = params.beamwidth_rad;
    (TAU - (TAU - theta) * g_side) / theta
}

/// Flat-top sector pattern: main-lobe gain within half a beamwidth of the
/// boresight, sidelobe gain elsewhere.
pub fn beam_gain(direction_rad: f64, params: &ChannelParams) -> f64 {
    if params.beamwidth_rad >= TAU {
        return 1.0;
    }
    let off = wrap_angle(direction_rad - params.beam_boresight_rad).abs();
    if off <= 0.5 * params.beamwidth_rad {
        main_lobe_gain(params)
    } else {
        sidelobe_gain(params)
    }
}

pub fn to_dbm(watts: f64) -> Result<f64, ChannelError> {
    if !(watts > 0.0) {
        return Err(ChannelError::NonPositivePower(watts));
    }
    Ok(10.0 * libm::log10(watts * 1e3))
}

pub fn from_dbm(dbm: f64) -> f64 {
    libm::pow(10.0, dbm / 10.0) * 1e-3
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * libm::log10(ratio)
}
