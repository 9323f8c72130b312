//! Reproducible corpora: per-scene simulation, the on-disk layout and its
//! manifest.
//!
//! ```text
//! manifest.json
//! scene_{id}.json  truth_{id}.f32  mask_{id}.u8
//! prior_{id}.json  prior_{id}.f32
//! enc_complete_{id}.f32  enc_prior_{id}.f32
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thz_envsense_core::envmap::{encode_complete, encode_prior, sample_prior, EncodeParams};
use thz_envsense_core::raytrace::compute_rss;
use thz_envsense_core::scenario::{rasterize_obstacles, sample_scene, ScenarioConfig};
use thz_envsense_core::{
    ChannelParams, EncodedMap, GridSpec, ObstacleMask, PriorMap, RadioMap, Scene,
};

use crate::config::{DatasetConfig, Split};
use crate::error::{Error, Result};
use crate::formats::{self, ChannelFile, EncodeFile, GridFile, PriorFile, SceneFile};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

const PRIOR_STREAM: u64 = 1;
const BORESIGHT_STREAM: u64 = 2;

/// Seed of one scene, a SplitMix64 hash of the master seed and the id.
pub fn scene_seed(master_seed: u64, scene_id: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(master_seed.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ scene_id)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordFiles {
    pub scene: String,
    pub truth: String,
    pub mask: String,
    pub prior: String,
    pub prior_values: String,
    pub enc_complete: String,
    pub enc_prior: String,
}

impl RecordFiles {
    pub fn for_scene(id: u64) -> Self {
        Self {
            scene: format!("scene_{id}.json"),
            truth: format!("truth_{id}.f32"),
            mask: format!("mask_{id}.u8"),
            prior: format!("prior_{id}.json"),
            prior_values: format!("prior_{id}.f32"),
            enc_complete: format!("enc_complete_{id}.f32"),
            enc_prior: format!("enc_prior_{id}.f32"),
        }
    }

    fn all(&self) -> [&str; 7] {
        [
            &self.scene,
            &self.truth,
            &self.mask,
            &self.prior,
            &self.prior_values,
            &self.enc_complete,
            &self.enc_prior,
        ]
    }
}

/// Name of a predicted 3-plane map for a scene.
pub fn prediction_file(scene_id: u64) -> String {
    format!("gen_{scene_id}.f32")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEntry {
    pub scene_id: u64,
    pub seed: u64,
    pub boresight_deg: f64,
    pub n_obstacles: usize,
    pub files: RecordFiles,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: u32,
    pub split: Split,
    pub n_scenes: usize,
    pub obstacle_count_choices: Vec<usize>,
    pub size_range_m: [f64; 2],
    pub margin_m: f64,
    pub retry_budget: u32,
    pub sampling_rate: f64,
    pub master_seed: u64,
    pub random_boresight: bool,
    pub grid: GridFile,
    pub channel: ChannelFile,
    pub encode: EncodeFile,
    pub records: Vec<RecordEntry>,
}

impl DatasetManifest {
    /// Settings that regenerate this corpus.
    pub fn config(&self) -> DatasetConfig {
        DatasetConfig {
            split: self.split,
            n_scenes: self.n_scenes,
            obstacle_count_choices: self.obstacle_count_choices.clone(),
            size_range_m: self.size_range_m,
            margin_m: self.margin_m,
            retry_budget: self.retry_budget,
            sampling_rate: self.sampling_rate,
            master_seed: self.master_seed,
            grid: self.grid,
            channel: self.channel,
            psi_smax: self.encode.psi_smax,
            random_boresight: self.random_boresight,
        }
    }
}

/// One simulated scene with everything derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub scene_id: u64,
    pub boresight_deg: f64,
    pub scene: Scene,
    pub truth: RadioMap,
    pub mask: ObstacleMask,
    pub prior: PriorMap,
    pub complete: EncodedMap,
    pub prior_encoded: EncodedMap,
}

impl Record {
    pub fn seed(&self) -> u64 {
        self.scene.seed
    }

    /// Ground-truth cell set of each obstacle.
    pub fn ground_truth(&self) -> Vec<Vec<usize>> {
        self.scene.obstacle_cells()
    }
}

/// Validated settings ready to simulate records.
#[derive(Clone, Debug)]
pub struct Generator {
    config: DatasetConfig,
    scenario: ScenarioConfig,
    grid: GridSpec,
    channel: ChannelParams,
    encode: EncodeParams,
}

impl Generator {
    pub fn new(config: DatasetConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid.to_grid()?;
        let channel = config.channel.to_params()?;
        let encode = EncodeParams::for_channel(&channel, &grid, config.psi_smax)?;
        Ok(Self {
            scenario: config.scenario(),
            config,
            grid,
            channel,
            encode,
        })
    }

    pub fn config(&self) -> &DatasetConfig {
        &self.config
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn encode(&self) -> EncodeParams {
        self.encode
    }

    pub fn channel(&self) -> ChannelParams {
        self.channel
    }

    /// Simulates scene `scene_id` in memory at full precision.
    pub fn record(&self, scene_id: u64) -> Result<Record> {
        self.record_at_rate(scene_id, self.config.sampling_rate)
    }

    /// Like [`record`](Self::record) with a different sensor density; the
    /// scene and radio map do not depend on the rate.
    pub fn record_at_rate(&self, scene_id: u64, rate: f64) -> Result<Record> {
        let seed = scene_seed(self.config.master_seed, scene_id);
        let scene =
            sample_scene(&self.scenario, &self.grid, seed).map_err(|source| Error::Placement {
                scene_id,
                seed,
                source,
            })?;
        let boresight_deg = if self.config.random_boresight {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(BORESIGHT_STREAM);
            rng.gen_range(0.0..360.0)
        } else {
            self.config.channel.beam_boresight_deg
        };
        let channel = ChannelParams {
            beam_boresight_rad: boresight_deg.to_radians(),
            ..self.channel
        };
        let mask = rasterize_obstacles(&scene);
        let truth =
            compute_rss(&scene, &channel).map_err(|source| Error::Trace { scene_id, source })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PRIOR_STREAM);
        let prior = sample_prior(&truth, &mask, rate, &mut rng)?;
        let complete = encode_complete(&truth, &mask, &self.encode)?;
        let prior_encoded = encode_prior(&prior, &self.encode);
        Ok(Record {
            scene_id,
            boresight_deg,
            scene,
            truth,
            mask,
            prior,
            complete,
            prior_encoded,
        })
    }

    fn manifest(&self, records: Vec<RecordEntry>) -> DatasetManifest {
        let c = &self.config;
        DatasetManifest {
            version: FORMAT_VERSION,
            split: c.split,
            n_scenes: c.n_scenes,
            obstacle_count_choices: c.obstacle_count_choices.clone(),
            size_range_m: c.size_range_m,
            margin_m: c.margin_m,
            retry_budget: c.retry_budget,
            sampling_rate: c.sampling_rate,
            master_seed: c.master_seed,
            random_boresight: c.random_boresight,
            grid: c.grid,
            channel: c.channel,
            encode: self.encode.into(),
            records,
        }
    }
}

/// Writes one record's files into `dir`.
pub fn write_record(dir: &Path, record: &Record) -> Result<RecordEntry> {
    let files = RecordFiles::for_scene(record.scene_id);
    formats::write_json(&dir.join(&files.scene), &SceneFile::from(&record.scene))?;
    formats::write_radio_map(&dir.join(&files.truth), &record.truth)?;
    formats::write_mask(&dir.join(&files.mask), &record.mask)?;
    let prior = PriorFile {
        sampling_rate: record.prior.sampling_rate,
        sensor_cells: record.prior.sensor_cells.clone(),
    };
    formats::write_json(&dir.join(&files.prior), &prior)?;
    formats::write_f32(
        &dir.join(&files.prior_values),
        record.prior.values_dbm.iter().copied(),
    )?;
    formats::write_encoded(&dir.join(&files.enc_complete), &record.complete)?;
    formats::write_encoded(&dir.join(&files.enc_prior), &record.prior_encoded)?;
    Ok(RecordEntry {
        scene_id: record.scene_id,
        seed: record.seed(),
        boresight_deg: record.boresight_deg,
        n_obstacles: record.scene.obstacles.len(),
        files,
    })
}

/// Rayon pool sized by `THZ_ENVSENSE_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("THZ_ENVSENSE_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::Config(format!(
                "THZ_ENVSENSE_THREADS={v:?} is not a positive integer"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// Simulates and writes every scene, then the manifest. On failure the
/// files of this run are removed and no manifest is left behind.
pub fn generate_dataset(config: DatasetConfig, out: &Path) -> Result<DatasetManifest> {
    let generator = Generator::new(config)?;
    let created = !out.exists();
    fs::create_dir_all(out).map_err(Error::io(out))?;
    let manifest_path = out.join(MANIFEST_FILE);
    let tmp_path = out.join(format!("{MANIFEST_FILE}.tmp"));
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(Error::io(&manifest_path))?;
    }
    let n = generator.config.n_scenes as u64;

    let result = thread_pool().and_then(|pool| {
        pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|id| write_record(out, &generator.record(id)?))
                .collect::<Result<Vec<_>>>()
        })
    });
    let finished = result.and_then(|records| {
        let manifest = generator.manifest(records);
        formats::write_json(&tmp_path, &manifest)?;
        fs::rename(&tmp_path, &manifest_path).map_err(Error::io(&manifest_path))?;
        Ok(manifest)
    });
    if finished.is_err() {
        for id in 0..n {
            for f in RecordFiles::for_scene(id).all() {
                let _ = fs::remove_file(out.join(f));
            }
        }
        let _ = fs::remove_file(&tmp_path);
        if created {
            let _ = fs::remove_dir(out);
        }
    }
    finished
}

/// A generated corpus opened for reading.
#[derive(Clone, Debug)]
pub struct Dataset {
    dir: PathBuf,
    manifest: DatasetManifest,
    grid: GridSpec,
    encode: EncodeParams,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(Error::MissingDataset(dir.to_path_buf()));
        }
        let value: serde_json::Value = formats::read_json(&path)?;
        let found = value.get("version").and_then(|v| v.as_u64());
        match found {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::VersionMismatch {
                    path,
                    found: v.try_into().unwrap_or(u32::MAX),
                    expected: FORMAT_VERSION,
                })
            }
            None => return Err(Error::corrupt(&path, "missing version")),
        }
        let manifest: DatasetManifest =
            serde_json::from_value(value).map_err(|e| Error::corrupt(&path, e.to_string()))?;
        let grid = manifest.grid.to_grid()?;
        let encode = manifest.encode.to_params()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            grid,
            encode,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn encode(&self) -> EncodeParams {
        self.encode
    }

    pub fn scene_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.manifest.records.iter().map(|r| r.scene_id)
    }

    pub fn entry(&self, scene_id: u64) -> Result<&RecordEntry> {
        self.manifest
            .records
            .iter()
            .find(|r| r.scene_id == scene_id)
            .ok_or(Error::UnknownScene(scene_id))
    }

    /// Reads one record back. Maps carry the `f32` precision of the files.
    pub fn load_record(&self, scene_id: u64) -> Result<Record> {
        let entry = self.entry(scene_id)?;
        let grid = self.grid;
        let f = &entry.files;
        let path = |name: &str| self.dir.join(name);

        let scene_path = path(&f.scene);
        let scene = formats::read_json::<SceneFile>(&scene_path)?
            .to_scene()
            .map_err(|e| Error::corrupt(&scene_path, e.to_string()))?;
        if scene.grid != grid || scene.seed != entry.seed {
            return Err(Error::corrupt(
                &scene_path,
                "grid or seed differs from the manifest",
            ));
        }
        let mask = formats::read_mask(&path(&f.mask), grid)?;
        let truth_path = path(&f.truth);
        let truth = formats::read_radio_map(&truth_path, grid)?;
        if (0..grid.len()).any(|i| truth.is_blocked(i) != mask.is_set(i)) {
            return Err(Error::corrupt(
                &truth_path,
                "blocked cells differ from the mask",
            ));
        }

        let prior_path = path(&f.prior);
        let prior_file: PriorFile = formats::read_json(&prior_path)?;
        let cells = &prior_file.sensor_cells;
        if cells.windows(2).any(|w| w[0] >= w[1])
            || cells.iter().any(|&i| i >= grid.len() || mask.is_set(i))
        {
            return Err(Error::corrupt(
                &prior_path,
                "sensor cells must be ascending free cells",
            ));
        }
        let values_dbm = formats::read_f32(&path(&f.prior_values), cells.len())?;
        let prior = PriorMap {
            grid,
            sensor_cells: prior_file.sensor_cells,
            values_dbm,
            sampling_rate: prior_file.sampling_rate,
        };
        let complete = formats::read_encoded(&path(&f.enc_complete), grid)?;
        let prior_encoded = formats::read_encoded(&path(&f.enc_prior), grid)?;
        Ok(Record {
            scene_id,
            boresight_deg: entry.boresight_deg,
            scene,
            truth,
            mask,
            prior,
            complete,
            prior_encoded,
        })
    }
}
