//! Scoring of predicted maps and the interpolation baselines.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thz_envsense_core::baselines::{idw_fill, nearest_neighbor_fill};
use thz_envsense_core::envmap::{
    compress_channels, compute_weights, decode_to_rss, normalized_values, EncodeParams,
};
use thz_envsense_core::metrics::{extract_detections, weighted_mse, SceneDetections};
use thz_envsense_core::{EncodedMap, EvalReport, RadioMap};

use crate::dataset::{prediction_file, thread_pool, Dataset, Record};
use crate::error::{Error, Result};
use crate::formats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Nearest sensor.
    Nn,
    /// Inverse-distance weighting.
    Idw,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nn => "nn",
            Method::Idw => "idw",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub id: u64,
    pub mse: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// JSON form of an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub weighted_mse: f64,
    pub ap: f64,
    pub n_scenes: usize,
    pub iou_threshold: f64,
    pub per_scene: Vec<SceneReport>,
}

impl From<&EvalReport> for ReportFile {
    fn from(r: &EvalReport) -> Self {
        Self {
            weighted_mse: r.weighted_mse,
            ap: r.ap,
            n_scenes: r.n_scenes(),
            iou_threshold: r.iou_threshold,
            per_scene: r
                .per_scene
                .iter()
                .map(|s| SceneReport {
                    id: s.id,
                    mse: s.mse,
                    tp: s.counts.tp,
                    fp: s.counts.fp,
                    fn_: s.counts.fn_,
                })
                .collect(),
        }
    }
}

/// Weighted MSE of the decoded prediction and its obstacle detections.
pub fn score_prediction(
    record: &Record,
    generated: &EncodedMap,
    enc: &EncodeParams,
) -> Result<(f64, SceneDetections)> {
    let grid = record.scene.grid;
    let weights = compute_weights(&record.truth, &record.mask, enc)?;
    let aware = decode_to_rss(generated, &record.prior, enc)?;
    let mse = weighted_mse(&record.truth, &aware, &weights, enc)?;
    let detections = extract_detections(grid, &compress_channels(generated), enc);
    Ok((
        mse,
        SceneDetections {
            detections,
            ground_truth: record.ground_truth(),
        },
    ))
}

fn report(scored: Vec<(u64, f64, SceneDetections)>, iou_threshold: f64) -> Result<EvalReport> {
    let ids: Vec<u64> = scored.iter().map(|s| s.0).collect();
    let mses: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let dets: Vec<SceneDetections> = scored.into_iter().map(|s| s.2).collect();
    Ok(EvalReport::from_scenes(&ids, &mses, &dets, iou_threshold)?)
}

/// Scores `gen_{id}.f32` in `pred_dir` for every scene of the dataset.
pub fn evaluate_predictions(
    data: &Dataset,
    pred_dir: &Path,
    iou_threshold: f64,
) -> Result<EvalReport> {
    let ids: Vec<u64> = data.scene_ids().collect();
    for &id in &ids {
        let path = pred_dir.join(prediction_file(id));
        if !path.is_file() {
            return Err(Error::MissingPrediction { scene_id: id, path });
        }
    }
    let grid = data.grid();
    let enc = data.encode();
    let scored = thread_pool()?.install(|| {
        ids.par_iter()
            .map(|&id| {
                let record = data.load_record(id)?;
                let path = pred_dir.join(prediction_file(id));
                let bytes = fs::read(&path).map_err(Error::io(&path))?;
                if bytes.len() != 12 * grid.len() {
                    return Err(Error::PredictionShape {
                        scene_id: id,
                        found: bytes.len(),
                        expected: 12 * grid.len(),
                    });
                }
                let generated = formats::decode_encoded(&path, &bytes, grid)?;
                let (mse, dets) = score_prediction(&record, &generated, &enc)?;
                Ok((id, mse, dets))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    report(scored, iou_threshold)
}

/// Completes a prior map with an interpolation baseline.
pub fn fill_prior(record: &Record, method: Method, power: f64) -> Result<RadioMap> {
    Ok(match method {
        Method::Nn => nearest_neighbor_fill(&record.prior)?,
        Method::Idw => idw_fill(&record.prior, power)?,
    })
}

/// Gray encoding of an aware map, the form predictions are exchanged in.
pub fn encode_aware(aware: &RadioMap, enc: &EncodeParams) -> EncodedMap {
    EncodedMap::gray(*aware.grid(), normalized_values(aware, enc)).expect("grid-sized values")
}

/// Fills every prior with `method`, writes the results to `out` as
/// predictions and scores them.
pub fn run_baseline(
    data: &Dataset,
    method: Method,
    power: f64,
    out: &Path,
    iou_threshold: f64,
) -> Result<EvalReport> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Config(format!(
            "IDW power must be positive, got {power}"
        )));
    }
    fs::create_dir_all(out).map_err(Error::io(out))?;
    let enc = data.encode();
    let ids: Vec<u64> = data.scene_ids().collect();
    thread_pool()?.install(|| {
        ids.par_iter().try_for_each(|&id| {
            let record = data.load_record(id)?;
            let aware = fill_prior(&record, method, power)?;
            formats::write_encoded(&out.join(prediction_file(id)), &encode_aware(&aware, &enc))
        })
    })?;
    evaluate_predictions(data, out, iou_threshold)
}
