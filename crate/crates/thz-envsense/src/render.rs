//! PNG renderings. Grid row `r` is image row `r`, one `scale × scale`
//! block per cell.

use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use thz_envsense_core::envmap::{compress_channels, segment, EncodeParams};
use thz_envsense_core::{EncodedMap, GridSpec, ObstacleMask};

use crate::dataset::{prediction_file, Dataset};
use crate::error::{Error, Result};
use crate::formats;

pub const ERROR_COLOR: [u8; 3] = [255, 0, 0];

fn level(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn paint(grid: GridSpec, scale: u32, color: impl Fn(usize) -> [u8; 3]) -> RgbImage {
    let scale = scale.max(1);
    RgbImage::from_fn(
        grid.n_cols as u32 * scale,
        grid.n_rows as u32 * scale,
        |x, y| {
            let i = grid.index((y / scale) as usize, (x / scale) as usize);
            Rgb(color(i))
        },
    )
}

/// Encoded map as an 8-bit RGB image.
pub fn encoded_image(img: &EncodedMap, scale: u32) -> RgbImage {
    paint(*img.grid(), scale, |i| img.pixel(i).map(level))
}

/// Gray truth levels with cells whose obstacle status was sensed wrongly
/// painted red.
pub fn error_overlay(
    truth: &EncodedMap,
    truth_mask: &ObstacleMask,
    sensed: &ObstacleMask,
    scale: u32,
) -> RgbImage {
    let gray = compress_channels(truth);
    paint(*truth.grid(), scale, |i| {
        if truth_mask.is_set(i) != sensed.is_set(i) {
            ERROR_COLOR
        } else {
            [level(gray[i]); 3]
        }
    })
}

pub fn save_png(path: &Path, img: &RgbImage) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Writes `truth_{id}.png` and `prior_{id}.png`, plus `aware_{id}.png` and
/// `error_{id}.png` when a prediction directory is given. Returns the paths.
pub fn render_scene(
    data: &Dataset,
    scene_id: u64,
    pred_dir: Option<&Path>,
    out: &Path,
    scale: u32,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(Error::io(out))?;
    let record = data.load_record(scene_id)?;
    let mut written = Vec::new();
    let mut emit = |name: String, img: RgbImage| -> Result<()> {
        let path = out.join(name);
        save_png(&path, &img)?;
        written.push(path);
        Ok(())
    };
    emit(
        format!("truth_{scene_id}.png"),
        encoded_image(&record.complete, scale),
    )?;
    emit(
        format!("prior_{scene_id}.png"),
        encoded_image(&record.prior_encoded, scale),
    )?;
    if let Some(dir) = pred_dir {
        let path = dir.join(prediction_file(scene_id));
        if !path.is_file() {
            return Err(Error::MissingPrediction { scene_id, path });
        }
        let generated = formats::read_encoded(&path, data.grid())?;
        let enc: EncodeParams = data.encode();
        let sensed = segment(data.grid(), &compress_channels(&generated), &enc);
        emit(
            format!("aware_{scene_id}.png"),
            encoded_image(&generated, scale),
        )?;
        emit(
            format!("error_{scene_id}.png"),
            error_overlay(&record.complete, &record.mask, &sensed, scale),
        )?;
    }
    Ok(written)
}
