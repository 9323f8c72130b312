//! Weighted MSE of aware maps and mask-IoU average precision for obstacle
//! detection.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::envmap::{self, EncodeParams, WeightMap};
use crate::raytrace::RadioMap;
use crate::scenario::{connected_components, GridSpec};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {left} vs {right} cells")]
    ShapeMismatch { left: usize, right: usize },
    #[error("IoU threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
}

/// `(1/N) Σ w² (truth − aware)²` over already-normalized values.
pub fn weighted_mse_normalized(
    truth: &[f64],
    aware: &[f64],
    weights: &[f64],
) -> Result<f64, MetricsError> {
    if truth.len() != aware.len() {
        return Err(MetricsError::ShapeMismatch {
            left: truth.len(),
            right: aware.len(),
        });
    }
    if truth.len() != weights.len() {
        return Err(MetricsError::ShapeMismatch {
            left: truth.len(),
            right: weights.len(),
        });
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = truth
        .iter()
        .zip(aware)
        .zip(weights)
        .map(|((&t, &a), &w)| {
            let d = t - a;
            w * w * d * d
        })
        .sum();
    Ok(sum / truth.len() as f64)
}

/// Weighted MSE between two radio maps on the normalized `[0, 1]` scale.
/// Blocked cells normalize to 1.
pub fn weighted_mse(
    truth: &RadioMap,
    aware: &RadioMap,
    weights: &WeightMap,
    enc: &EncodeParams,
) -> Result<f64, MetricsError> {
    let t = envmap::normalized_values(truth, enc);
    let a = envmap::normalized_values(aware, enc);
    weighted_mse_normalized(&t, &a, weights.values())
}

/// One predicted obstacle: a 4-connected component of the segmented map.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    /// Sorted row-major cell indices.
    pub cells: Vec<usize>,
    pub score: f64,
}

/// Components of the segmented map, scored by their mean compressed value.
pub fn extract_detections(
    grid: GridSpec,
    compressed: &[f64],
    enc: &EncodeParams,
) -> Vec<Detection> {
    let mask = envmap::segment(grid, compressed, enc);
    connected_components(&mask)
        .into_iter()
        .map(|cells| {
            let score = cells.iter().map(|&i| compressed[i]).sum::<f64>() / cells.len() as f64;
            Detection { cells, score }
        })
        .collect()
}

/// Intersection over union of two sorted index sets.
pub fn mask_iou(a: &[usize], b: &[usize]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Detections and ground-truth obstacle cell sets for one scene.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SceneDetections {
    pub detections: Vec<Detection>,
    /// One sorted cell set per ground-truth obstacle.
    pub ground_truth: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApResult {
    pub ap: f64,
    pub per_scene: Vec<MatchCounts>,
}

/// All-point interpolated AP over detections pooled across scenes.
///
/// Detections are visited by descending score (ties keep scene then
/// detection order). Each one takes the unmatched ground-truth obstacle of
/// its own scene with the highest IoU, provided that IoU reaches the
/// threshold. With no ground truth the AP is 1 if there are also no
/// detections and 0 otherwise.
pub fn average_precision(
    scenes: &[SceneDetections],
    iou_threshold: f64,
) -> Result<ApResult, MetricsError> {
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(MetricsError::InvalidThreshold(iou_threshold));
    }
    let mut pooled: Vec<(usize, usize)> = scenes
        .iter()
        .enumerate()
        .flat_map(|(s, sd)| (0..sd.detections.len()).map(move |d| (s, d)))
        .collect();
    pooled.sort_by(|&(sa, da), &(sb, db)| {
        let a = scenes[sa].detections[da].score;
        let b = scenes[sb].detections[db].score;
        b.total_cmp(&a)
    });

    let total_gt: usize = scenes.iter().map(|s| s.ground_truth.len()).sum();
    let mut matched: Vec<Vec<bool>> = scenes
        .iter()
        .map(|s| vec![false; s.ground_truth.len()])
        .collect();
    let mut counts = vec![MatchCounts::default(); scenes.len()];
    let mut hits = Vec::with_capacity(pooled.len());

    for &(s, d) in &pooled {
        let det = &scenes[s].detections[d];
        let best = scenes[s]
            .ground_truth
            .iter()
            .enumerate()
            .filter(|(g, _)| !matched[s][*g])
            .map(|(g, gt)| (g, mask_iou(&det.cells, gt)))
            .filter(|&(_, iou)| iou >= iou_threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((g, _)) => {
                matched[s][g] = true;
                counts[s].tp += 1;
                hits.push(true);
            }
            None => {
                counts[s].fp += 1;
                hits.push(false);
            }
        }
    }
    for (c, sd) in counts.iter_mut().zip(scenes) {
        c.fn_ = sd.ground_truth.len() - c.tp;
    }

    let ap = if total_gt == 0 {
        if pooled.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        all_point_ap(&hits, total_gt)
    };
    Ok(ApResult {
        ap,
        per_scene: counts,
    })
}

/// Area under the precision envelope for a ranked hit list.
fn all_point_ap(hits: &[bool], total_gt: usize) -> f64 {
    let mut recall = Vec::with_capacity(hits.len());
    let mut precision = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (k, &h) in hits.iter().enumerate() {
        if h {
            tp += 1;
        }
        recall.push(tp as f64 / total_gt as f64);
        precision.push(tp as f64 / (k + 1) as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.into_iter().zip(precision) {
        ap += (r - prev_recall) * p;
        prev_recall = r;
    }
    ap
}

/// Aggregate scores for a corpus of scenes.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub weighted_mse: f64,
    pub ap: f64,
    pub iou_threshold: f64,
    pub per_scene: Vec<SceneScore>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneScore {
    pub id: u64,
    pub mse: f64,
    pub counts: MatchCounts,
}

impl EvalReport {
    /// Mean per-scene MSE and pooled AP.
    pub fn from_scenes(
        ids: &[u64],
        mses: &[f64],
        detections: &[SceneDetections],
        iou_threshold: f64,
    ) -> Result<Self, MetricsError> {
        if ids.len() != mses.len() || ids.len() != detections.len() {
            return Err(MetricsError::ShapeMismatch {
                left: ids.len(),
                right: mses.len().min(detections.len()),
            });
        }
        let ap = average_precision(detections, iou_threshold)?;
        let weighted_mse = if mses.is_empty() {
            0.0
        } else {
            mses.iter().sum::<f64>() / mses.len() as f64
        };
        let per_scene = ids
            .iter()
            .zip(mses)
            .zip(ap.per_scene)
            .map(|((&id, &mse), counts)| SceneScore { id, mse, counts })
            .collect();
        Ok(Self {
            weighted_mse,
            ap: ap.ap,
            iou_threshold,
            per_scene,
        })
    }

    pub fn n_scenes(&self) -> usize {
        self.per_scene.len()
    }
}
