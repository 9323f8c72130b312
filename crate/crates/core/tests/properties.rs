use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thz_envsense_core::baselines::{idw_fill, nearest_neighbor_fill};
use thz_envsense_core::channel::{self, ChannelParams};
use thz_envsense_core::envmap::{
    compress_channels, compute_weights, decode_to_rss, encode_complete, encode_prior,
    normalized_values, sample_prior, segment,
};
use thz_envsense_core::metrics::{average_precision, weighted_mse_normalized, SceneDetections};
use thz_envsense_core::raytrace::compute_rss;
use thz_envsense_core::scenario::{rasterize_obstacles, sample_scene};
use thz_envsense_core::{Detection, EncodeParams, EncodedMap, GridSpec, ScenarioConfig};

fn small_grid() -> GridSpec {
    GridSpec::new(12, 15, 4.0, 5.0).unwrap()
}

fn standard_enc() -> EncodeParams {
    EncodeParams::for_channel(&ChannelParams::default(), &GridSpec::standard(), 0.9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_space_gain_decreases_with_distance(d in 0.01f64..50.0, step in 1e-3f64..10.0) {
        let p = ChannelParams::default();
        let near = channel::free_space_gain(d, &p).unwrap();
        let far = channel::free_space_gain(d + step, &p).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn free_space_gain_decreases_with_absorption(d in 0.01f64..50.0, k in 0.0f64..1.0, dk in 1e-4f64..1.0) {
        let lo = ChannelParams { absorption_per_m: k, ..ChannelParams::default() };
        let hi = ChannelParams { absorption_per_m: k + dk, ..ChannelParams::default() };
        prop_assert!(channel::free_space_gain(d, &hi).unwrap() < channel::free_space_gain(d, &lo).unwrap());
    }

    #[test]
    fn beam_pattern_integrates_to_one(theta_deg in 1.0f64..360.0, side_db in -40.0f64..-3.0) {
        let p = ChannelParams {
            beamwidth_rad: theta_deg.to_radians(),
            sidelobe_gain_db: side_db,
            ..ChannelParams::default()
        };
        let theta = p.beamwidth_rad;
        let g_main = channel::main_lobe_gain(&p);
        let g_side = channel::sidelobe_gain(&p);
        // Exact integral of the flat-top pattern.
        let exact = (theta * g_main + (2.0 * PI - theta) * g_side) / (2.0 * PI);
        prop_assert!((exact - 1.0).abs() < 1e-12);
        // Midpoint sampling is off by at most two boundary samples.
        let n = 4096;
        let avg: f64 = (0..n)
            .map(|k| channel::beam_gain(-PI + (k as f64 + 0.5) * 2.0 * PI / n as f64, &p))
            .sum::<f64>() / n as f64;
        prop_assert!((avg - 1.0).abs() <= 2.0 * (g_main - g_side) / n as f64 + 1e-12);
    }

    #[test]
    fn dbm_round_trip(dbm in -200.0f64..60.0) {
        let back = channel::to_dbm(channel::from_dbm(dbm)).unwrap();
        prop_assert!((back - dbm).abs() < 1e-9);
    }

    #[test]
    fn weights_are_monotone(a in -150.0f64..0.0, b in -150.0f64..0.0) {
        let enc = standard_enc();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(enc.weight_of(lo) <= enc.weight_of(hi));
        prop_assert!(enc.weight_of(hi) <= enc.psi_smax);
        prop_assert!(enc.weight_of(lo) >= enc.psi_smin);
    }

    #[test]
    fn weighted_mse_is_symmetric_and_quadratic(
        data in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..200),
        c in 0.1f64..3.0,
    ) {
        let t: Vec<f64> = data.iter().map(|x| x.0).collect();
        let a: Vec<f64> = data.iter().map(|x| x.1).collect();
        let w: Vec<f64> = data.iter().map(|x| x.2).collect();
        let m = weighted_mse_normalized(&t, &a, &w).unwrap();
        prop_assert!(m >= 0.0);
        prop_assert!((weighted_mse_normalized(&a, &t, &w).unwrap() - m).abs() <= 1e-15);
        prop_assert_eq!(weighted_mse_normalized(&t, &t, &w).unwrap(), 0.0);
        let ts: Vec<f64> = t.iter().map(|v| v * c).collect();
        let as_: Vec<f64> = a.iter().map(|v| v * c).collect();
        let scaled = weighted_mse_normalized(&ts, &as_, &w).unwrap();
        prop_assert!((scaled - c * c * m).abs() <= 1e-12 * (1.0 + m));
    }
}

fn arb_scenes() -> impl Strategy<Value = Vec<SceneDetections>> {
    let det =
        (prop::collection::btree_set(0usize..30, 1..6), 0.0f64..1.0).prop_map(|(cells, score)| {
            Detection {
                cells: cells.into_iter().collect(),
                score,
            }
        });
    let gt = prop::collection::btree_set(0usize..30, 1..6)
        .prop_map(|s| s.into_iter().collect::<Vec<_>>());
    prop::collection::vec(
        (
            prop::collection::vec(det, 0..5),
            prop::collection::vec(gt, 0..4),
        )
            .prop_map(|(detections, ground_truth)| SceneDetections {
                detections,
                ground_truth,
            }),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ap_ignores_monotone_score_transforms(scenes in arb_scenes()) {
        let base = average_precision(&scenes, 0.5).unwrap();
        let mut moved = scenes.clone();
        for s in &mut moved {
            for d in &mut s.detections {
                d.score = (3.0 * d.score).exp() + 7.0;
            }
        }
        prop_assert_eq!(&base, &average_precision(&moved, 0.5).unwrap());
        prop_assert!((0.0..=1.0).contains(&base.ap));
    }

    #[test]
    fn removing_a_false_positive_never_lowers_ap(scenes in arb_scenes()) {
        let base = average_precision(&scenes, 0.5).unwrap();
        let total_gt: usize = scenes.iter().map(|s| s.ground_truth.len()).sum();
        prop_assume!(total_gt > 0);
        for (si, s) in scenes.iter().enumerate() {
            for di in 0..s.detections.len() {
                let mut fewer = scenes.clone();
                fewer[si].detections.remove(di);
                let reduced = average_precision(&fewer, 0.5).unwrap();
                let was_fp = reduced.per_scene[si].tp == base.per_scene[si].tp
                    && reduced.per_scene[si].fp + 1 == base.per_scene[si].fp;
                let others_same = reduced.per_scene.iter().zip(&base.per_scene).enumerate()
                    .all(|(k, (r, b))| k == si || r == b);
                if was_fp && others_same {
                    prop_assert!(reduced.ap >= base.ap - 1e-12);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scene_sampling_is_deterministic_and_valid(seed in any::<u64>()) {
        let cfg = ScenarioConfig::default();
        let grid = GridSpec::standard();
        let a = sample_scene(&cfg, &grid, seed).unwrap();
        prop_assert_eq!(&a, &sample_scene(&cfg, &grid, seed).unwrap());
        prop_assert!(cfg.obstacle_count_choices.contains(&a.obstacles.len()));
        prop_assert!(!a.is_inside_obstacle(a.bs_location));
        for (i, o) in a.obstacles.iter().enumerate() {
            for v in o.vertices() {
                prop_assert!(v.x >= cfg.margin && v.x <= grid.area_width - cfg.margin);
                prop_assert!(v.y >= cfg.margin && v.y <= grid.area_length - cfg.margin);
            }
            for b in &a.obstacles[i + 1..] {
                prop_assert!(!o.overlaps(b));
            }
        }
    }

    #[test]
    fn removing_an_obstacle_shrinks_the_mask(seed in any::<u64>()) {
        let cfg = ScenarioConfig::with_counts(vec![2, 3, 4]);
        let scene = sample_scene(&cfg, &GridSpec::standard(), seed).unwrap();
        let full = rasterize_obstacles(&scene);
        for k in 0..scene.obstacles.len() {
            let reduced = rasterize_obstacles(&scene.without_obstacle(k));
            prop_assert!(reduced.count() < full.count());
            for i in reduced.set_indices() {
                prop_assert!(full.is_set(i));
            }
        }
    }

    #[test]
    fn encoding_round_trips(seed in any::<u64>()) {
        let cfg = ScenarioConfig::default();
        let grid = GridSpec::standard();
        let params = ChannelParams::default();
        let enc = standard_enc();
        let scene = sample_scene(&cfg, &grid, seed).unwrap();
        let mask = rasterize_obstacles(&scene);
        let map = compute_rss(&scene, &params).unwrap();
        let img = encode_complete(&map, &mask, &enc).unwrap();
        let compressed = compress_channels(&img);
        prop_assert_eq!(segment(grid, &compressed, &enc), mask.clone());

        let weights = compute_weights(&map, &mask, &enc).unwrap();
        prop_assert_eq!(&compressed[..], weights.values());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = sample_prior(&map, &mask, 0.3, &mut rng).unwrap();
        let decoded = decode_to_rss(&img, &prior, &enc).unwrap();
        for i in 0..grid.len() {
            match (map.get(i), decoded.get(i)) {
                (None, None) => {}
                (Some(t), Some(d)) => {
                    let tc = t.clamp(enc.psi_min_dbm, enc.psi_max_dbm);
                    prop_assert!((tc - d).abs() < 1e-9 || prior.sensor_cells.contains(&i));
                }
                other => prop_assert!(false, "cell {} {:?}", i, other),
            }
        }
        for (i, v) in prior.iter() {
            prop_assert_eq!(decoded.get(i), Some(v));
        }
        let t = normalized_values(&map, &enc);
        let d = normalized_values(&decoded, &enc);
        prop_assert!(weighted_mse_normalized(&t, &d, weights.values()).unwrap() < 1e-18);
    }

    #[test]
    fn prior_encoding_marks_unknown_cells_red(seed in any::<u64>(), rate in 0.05f64..1.0) {
        let grid = small_grid();
        let scene = thz_envsense_core::Scene::empty(grid, seed);
        let params = ChannelParams::default();
        let enc = EncodeParams::for_channel(&params, &grid, 0.9).unwrap();
        let map = compute_rss(&scene, &params).unwrap();
        let mask = rasterize_obstacles(&scene);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = sample_prior(&map, &mask, rate, &mut rng).unwrap();
        prop_assert_eq!(prior.len(), (rate * grid.len() as f64).round() as usize);
        let img: EncodedMap = encode_prior(&prior, &enc);
        let sensors = prior.sensor_mask();
        for (i, &sensor) in sensors.iter().enumerate() {
            prop_assert_eq!(img.is_gray(i), sensor);
            prop_assert_eq!(img.is_red(i), !sensor);
        }
    }

    #[test]
    fn baselines_respect_the_prior(seed in any::<u64>(), rate in 0.05f64..0.9) {
        let cfg = ScenarioConfig::default();
        let grid = GridSpec::standard();
        let params = ChannelParams::default();
        let scene = sample_scene(&cfg, &grid, seed).unwrap();
        let mask = rasterize_obstacles(&scene);
        let map = compute_rss(&scene, &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let prior = sample_prior(&map, &mask, rate, &mut rng).unwrap();
        let lo = prior.values_dbm.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = prior.values_dbm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let nn = nearest_neighbor_fill(&prior).unwrap();
        let idw = idw_fill(&prior, 2.0).unwrap();
        for (i, v) in prior.iter() {
            prop_assert_eq!(nn.get(i), Some(v));
            prop_assert_eq!(idw.get(i), Some(v));
        }
        for m in [&nn, &idw] {
            for &v in m.values() {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
        // Brute-force references.
        let sensors: Vec<_> = prior.iter().map(|(i, v)| (grid.cell_center_of(i), v)).collect();
        for i in (0..grid.len()).step_by(7) {
            let c = grid.cell_center_of(i);
            // Cells are 5/12 m by 1/3 m, so 144·d² is an exact integer.
            let (r, col) = (i / 48, i % 48);
            let best = prior
                .iter()
                .min_by_key(|&(j, _)| {
                    let (dr, dc) = ((j / 48) as i64 - r as i64, (j % 48) as i64 - col as i64);
                    (25 * dc * dc + 16 * dr * dr, j)
                })
                .unwrap();
            prop_assert_eq!(nn.get(i), Some(best.1));
            if !prior.sensor_cells.contains(&i) {
                let (mut num, mut den) = (0.0, 0.0);
                for &(p, v) in &sensors {
                    let w = 1.0 / ((p.x - c.x).powi(2) + (p.y - c.y).powi(2));
                    num += w * v;
                    den += w;
                }
                let got = idw.get(i).unwrap();
                prop_assert!((got - num / den).abs() <= 1e-9 * (num / den).abs());
            }
        }
    }
}
