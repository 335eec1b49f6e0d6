//! Experiment configuration, dataset planning and generation, and the
//! ground-truth manifest.
//!
//! A dataset has a biased `train` split and an unbiased `test` split over
//! the same identities. Every (identity, nuisance) configuration is
//! rendered over each of the split's backgrounds. Output layout:
//!
//! ```text
//! <out>/manifest.csv
//! <out>/subsets.json        only for disentanglement protocols
//! <out>/train/id000/g0000_b017.png
//! <out>/test/...
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::background::{BackgroundSource, Backgrounds};
use crate::camera::{Camera, DEFAULT_DISTANCE, DEFAULT_FOCAL_227};
use crate::container::load_model;
use crate::eval::SubsetMap;
use crate::illumination::{SHIllumination, DEFAULT_AMBIENT_RATIO, DEFAULT_INTENSITY};
use crate::model::{
    build_toy_model, instantiate_mesh, sample_identity, MorphableModel, ToyModelSpec,
};
use crate::protocol::{disentanglement_halves, enumerate_grid, BiasProtocol, Split, Subset};
use crate::render::{render_mesh, RenderSetup, SceneParams};
use crate::seed::{derive_sample_seed, mix};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const SUBSETS_FILE: &str = "subsets.json";

// salts separating the independent random streams derived from the master seed
const SALT_MODEL: u64 = 0x006d_6f64_656c;
const SALT_IDENTITY: u64 = 0x6964;
const SALT_BACKGROUND: u64 = 0x6267;
const SALT_SPLIT: u64 = 0x7370_6c74;
const SALT_GRID: u64 = 0x6772_6964;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    /// Procedural stand-in built from the experiment seed.
    Toy(ToyModelSpec),
    /// A model container file; relative paths resolve against the config.
    File { path: PathBuf },
}

impl Default for ModelSource {
    fn default() -> Self {
        ModelSource::Toy(ToyModelSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    /// Pixels; defaults to 800 scaled by `image_size / 227`.
    pub focal_length: Option<f64>,
    /// Camera distance from the head center, mm.
    pub distance: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            focal_length: None,
            distance: DEFAULT_DISTANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightConfig {
    pub intensity: f64,
    pub ambient_ratio: f64,
    pub shift_backgrounds: bool,
}

impl Default for LightConfig {
    fn default() -> Self {
        LightConfig {
            intensity: DEFAULT_INTENSITY,
            ambient_ratio: DEFAULT_AMBIENT_RATIO,
            shift_backgrounds: true,
        }
    }
}

fn default_seed() -> u64 {
    1
}
fn default_image_size() -> u32 {
    227
}
fn default_identities() -> u32 {
    30
}
fn default_backgrounds() -> u32 {
    50
}
fn default_true() -> bool {
    true
}

/// A human-editable TOML experiment description.
///
/// ```toml
/// seed = 7
/// identities = 30
/// backgrounds = 50
///
/// [model]
/// kind = "toy"            # or kind = "file", path = "model.pfig"
/// subdivisions = 4
/// k_shape = 199
/// k_color = 199
/// k_expr = 100
///
/// [background]
/// kind = "procedural"     # or kind = "directory", path = "textures/"
/// seed = 0
///
/// [train]
/// protocol = "uniform_range"
/// yaw = { min_deg = -45.0, max_deg = 45.0, step_deg = 5.625 }
///
/// [test]                  # defaults to the full yaw grid
/// protocol = "uniform_range"
/// yaw = { min_deg = -90.0, max_deg = 90.0, step_deg = 5.625 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_image_size")]
    pub image_size: u32,
    #[serde(default = "default_identities")]
    pub identities: u32,
    /// Backgrounds per (identity, nuisance) configuration and split.
    #[serde(default = "default_backgrounds")]
    pub backgrounds: u32,
    /// Draw the train and test backgrounds from disjoint texture sets.
    #[serde(default = "default_true")]
    pub disjoint_backgrounds: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSource,
    #[serde(default)]
    pub background: BackgroundSource,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub light: LightConfig,
    pub train: BiasProtocol,
    #[serde(default = "BiasProtocol::full_yaw")]
    pub test: BiasProtocol,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(train: BiasProtocol) -> Self {
        ExperimentConfig {
            name: String::new(),
            seed: default_seed(),
            image_size: default_image_size(),
            identities: default_identities(),
            backgrounds: default_backgrounds(),
            disjoint_backgrounds: true,
            output_dir: None,
            model: ModelSource::default(),
            background: BackgroundSource::default(),
            camera: CameraConfig::default(),
            light: LightConfig::default(),
            train,
            test: BiasProtocol::full_yaw(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = PathBuf::from(".");
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.identities == 0 {
            return Err(Error::Config("identities must be >= 1".into()));
        }
        if self.backgrounds == 0 {
            return Err(Error::Config("backgrounds must be >= 1".into()));
        }
        if self.image_size == 0 {
            return Err(Error::Config("image_size must be >= 1".into()));
        }
        self.train.validate()?;
        self.test.validate()?;
        if matches!(self.test, BiasProtocol::GaussianPose { .. }) {
            return Err(Error::Config(
                "the test split must be a grid protocol".into(),
            ));
        }
        Ok(())
    }

    pub fn identity_ids(&self) -> Vec<u32> {
        (0..self.identities).collect()
    }

    pub fn camera(&self) -> Camera {
        let size = self.image_size;
        let f = self
            .camera
            .focal_length
            .unwrap_or(DEFAULT_FOCAL_227 * f64::from(size) / 227.0);
        Camera::looking_at_origin(size, size, f, self.camera.distance)
    }

    pub fn background_source(&self) -> BackgroundSource {
        match &self.background {
            BackgroundSource::Directory { path } => BackgroundSource::Directory {
                path: self.resolve(path),
            },
            BackgroundSource::Procedural { seed } => BackgroundSource::Procedural {
                seed: mix(&[self.seed, SALT_BACKGROUND, *seed]),
            },
            solid => solid.clone(),
        }
    }

    pub fn render_setup(&self) -> Result<RenderSetup> {
        let backgrounds =
            Backgrounds::open(&self.background_source(), self.image_size, self.image_size)?;
        let mut setup = RenderSetup::new(self.camera(), backgrounds);
        setup.light_intensity = self.light.intensity;
        setup.ambient_ratio = self.light.ambient_ratio;
        setup.shift_backgrounds = self.light.shift_backgrounds;
        Ok(setup)
    }

    pub fn load_model(&self) -> Result<MorphableModel> {
        match &self.model {
            ModelSource::Toy(spec) => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(&[self.seed, SALT_MODEL]));
                build_toy_model(spec, &mut rng)
            }
            ModelSource::File { path } => load_model(self.resolve(path)),
        }
    }

    /// The identity split for disentanglement protocols.
    pub fn subsets(&self) -> Option<SubsetMap> {
        if !matches!(self.train, BiasProtocol::DisentanglementSplit { .. }) {
            return None;
        }
        let (left, right) = disentanglement_halves(&self.identity_ids());
        let mut groups = BTreeMap::new();
        groups.insert("left".to_owned(), left);
        groups.insert("right".to_owned(), right);
        Some(SubsetMap { groups })
    }
}

/// Ground-truth annotation of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    /// Relative to the manifest's directory, `/`-separated.
    pub image_path: String,
    pub identity_id: u32,
    pub split: Split,
    pub yaw_deg: f64,
    pub light_azimuth_deg: f64,
    pub light_inclination_deg: f64,
    pub background_id: u32,
    pub sh: SHIllumination,
    pub seed: u64,
}

impl SampleRecord {
    pub fn scene(&self) -> SceneParams {
        SceneParams {
            identity_id: self.identity_id,
            split: self.split,
            yaw_deg: self.yaw_deg,
            light_azimuth_deg: self.light_azimuth_deg,
            light_inclination_deg: self.light_inclination_deg,
            background_id: self.background_id,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<SampleRecord>,
}

/// Degrees with four fractional digits; negative zero prints as `0.0000`.
pub fn format_deg(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_owned()
    } else {
        s
    }
}

/// Manifest columns in order.
pub fn manifest_header() -> Vec<String> {
    let mut cols: Vec<String> = [
        "image_path",
        "identity_id",
        "split",
        "yaw_deg",
        "light_azimuth_deg",
        "light_inclination_deg",
        "background_id",
    ]
    .iter()
    .map(|s| (*s).to_owned())
    .collect();
    for ch in ["r", "g", "b"] {
        for i in 0..9 {
            cols.push(format!("sh_{ch}_{i}"));
        }
    }
    cols.push("seed".to_owned());
    cols
}

impl Manifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn test_records(&self) -> Vec<SampleRecord> {
        self.split(Split::Test).cloned().collect()
    }

    pub fn to_writer<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(manifest_header())?;
        for r in &self.records {
            let mut row = vec![
                r.image_path.clone(),
                r.identity_id.to_string(),
                r.split.to_string(),
                format_deg(r.yaw_deg),
                format_deg(r.light_azimuth_deg),
                format_deg(r.light_inclination_deg),
                r.background_id.to_string(),
            ];
            // shortest representation that parses back to the same f64
            row.extend(r.sh.to_flat().iter().map(|v| format!("{v}")));
            row.push(r.seed.to_string());
            csv.write_record(&row)?;
        }
        csv.flush().map_err(|e| Error::io("<manifest>", e))?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.to_writer(&mut buf)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self> {
        let mut csv = csv::Reader::from_reader(r);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
        if header != manifest_header() {
            return Err(Error::Config(
                "manifest header does not match the schema".into(),
            ));
        }
        let mut records = Vec::new();
        for (line, row) in csv.records().enumerate() {
            let row = row?;
            let bad = |col: &str| Error::Config(format!("manifest row {}: bad {col}", line + 2));
            let num = |i: usize, col: &str| row[i].parse::<f64>().map_err(|_| bad(col));
            let mut flat = [0.0; 27];
            for (k, v) in flat.iter_mut().enumerate() {
                *v = num(7 + k, "sh coefficient")?;
            }
            records.push(SampleRecord {
                image_path: row[0].to_owned(),
                identity_id: row[1].parse().map_err(|_| bad("identity_id"))?,
                split: row[2].parse().map_err(|_| bad("split"))?,
                yaw_deg: num(3, "yaw_deg")?,
                light_azimuth_deg: num(4, "light_azimuth_deg")?,
                light_inclination_deg: num(5, "light_inclination_deg")?,
                background_id: row[6].parse().map_err(|_| bad("background_id"))?,
                sh: SHIllumination::from_flat(&flat),
                seed: row[34].parse().map_err(|_| bad("seed"))?,
            });
        }
        Ok(Manifest { records })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file))
    }
}

/// Background ids of each split: a seeded permutation of the source's
/// texture pool, cut into one block per split.
pub fn background_pools(
    config: &ExperimentConfig,
    available: Option<usize>,
) -> Result<[Vec<u32>; 2]> {
    let per_split = config.backgrounds as usize;
    let needed = if config.disjoint_backgrounds {
        2 * per_split
    } else {
        per_split
    };
    let pool_size = match available {
        None => needed,
        Some(n) if n >= needed => n,
        Some(n) => {
            return Err(Error::Config(format!(
                "background source has {n} textures, the config needs {needed}"
            )))
        }
    };
    let mut pool: Vec<u32> = (0..pool_size as u32).collect();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(mix(&[
        config.seed,
        SALT_BACKGROUND,
    ])));
    let train = pool[..per_split].to_vec();
    let test = if config.disjoint_backgrounds {
        pool[per_split..2 * per_split].to_vec()
    } else {
        train.clone()
    };
    Ok([train, test])
}

fn split_salt(split: Split) -> u64 {
    match split {
        Split::Train => 1,
        Split::Test => 2,
    }
}

/// Every sample of both splits, without rendering. Train rows come first;
/// within a split rows are ordered by identity, grid index, background.
pub fn plan_dataset(
    config: &ExperimentConfig,
    backgrounds_available: Option<usize>,
) -> Result<Manifest> {
    config.validate()?;
    let ids = config.identity_ids();
    let pools = background_pools(config, backgrounds_available)?;
    let mut records = Vec::new();
    for (split, protocol, pool) in [
        (Split::Train, &config.train, &pools[0]),
        (Split::Test, &config.test, &pools[1]),
    ] {
        let split_seed = mix(&[config.seed, SALT_SPLIT, split_salt(split)]);
        let mut grid_rng = ChaCha8Rng::seed_from_u64(mix(&[split_seed, SALT_GRID]));
        for point in enumerate_grid(protocol, &ids, &mut grid_rng)? {
            for &bg in pool {
                let seed = derive_sample_seed(
                    split_seed,
                    point.identity_id,
                    u64::from(point.grid_index),
                    bg,
                );
                let scene = SceneParams {
                    identity_id: point.identity_id,
                    split,
                    yaw_deg: point.yaw_deg,
                    light_azimuth_deg: point.light_azimuth_deg,
                    light_inclination_deg: point.light_inclination_deg,
                    background_id: bg,
                    seed,
                };
                records.push(SampleRecord {
                    image_path: format!(
                        "{split}/id{:03}/g{:04}_b{:03}.png",
                        point.identity_id, point.grid_index, bg
                    ),
                    identity_id: point.identity_id,
                    split,
                    yaw_deg: point.yaw_deg,
                    light_azimuth_deg: point.light_azimuth_deg,
                    light_inclination_deg: point.light_inclination_deg,
                    background_id: bg,
                    sh: sh_for(&config.light, &scene)?,
                    seed,
                });
            }
        }
    }
    Ok(Manifest { records })
}

fn sh_for(light: &LightConfig, scene: &SceneParams) -> Result<SHIllumination> {
    let l = crate::illumination::DirectedLight {
        azimuth: scene.light_azimuth_deg.to_radians(),
        inclination: scene.light_inclination_deg.to_radians(),
        intensity: [light.intensity; 3],
        ambient: [light.intensity * light.ambient_ratio; 3],
    };
    l.validate()?;
    Ok(crate::illumination::directed_to_sh(&l))
}

/// Seeded identity coefficients; identity `i` does not depend on how many
/// identities the experiment has.
pub fn identity_params(
    config: &ExperimentConfig,
    model: &MorphableModel,
    id: u32,
) -> crate::model::IdentityParams {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[config.seed, SALT_IDENTITY, u64::from(id)]));
    sample_identity(model, &mut rng)
}

/// Renders every planned sample under `out_dir` and writes the manifest.
/// Uses the current rayon pool.
pub fn generate_dataset_to(config: &ExperimentConfig, out_dir: &Path) -> Result<Manifest> {
    config.validate()?;
    let model = config.load_model()?;
    let setup = config.render_setup()?;
    let manifest = plan_dataset(config, setup.backgrounds.len())?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let dirs: BTreeSet<PathBuf> = manifest
        .records
        .iter()
        .filter_map(|r| Path::new(&r.image_path).parent().map(|p| out_dir.join(p)))
        .collect();
    for d in &dirs {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }

    let meshes: HashMap<u32, crate::model::Mesh> = config
        .identity_ids()
        .into_par_iter()
        .map(|id| {
            let params = identity_params(config, &model, id);
            instantiate_mesh(&model, &params).map(|m| (id, m))
        })
        .collect::<Result<_>>()?;

    manifest
        .records
        .par_iter()
        .try_for_each(|r| -> Result<()> {
            let image = render_mesh(&meshes[&r.identity_id], &r.scene(), &setup)?;
            let path = out_dir.join(&r.image_path);
            image
                .save_with_format(&path, image::ImageFormat::Png)
                .map_err(|source| Error::Image { path, source })
        })?;

    manifest.write_csv(out_dir.join(MANIFEST_FILE))?;
    if let Some(subsets) = config.subsets() {
        subsets.write_json(out_dir.join(SUBSETS_FILE))?;
    }
    log::info!(
        "wrote {} images and {} to {}",
        manifest.records.len(),
        MANIFEST_FILE,
        out_dir.display()
    );
    Ok(manifest)
}

/// [`generate_dataset_to`] into the configured `output_dir`.
pub fn generate_dataset(config: &ExperimentConfig) -> Result<Manifest> {
    let out = config
        .output_dir
        .as_ref()
        .map(|p| config.resolve(p))
        .ok_or_else(|| Error::Config("no output_dir configured".into()))?;
    generate_dataset_to(config, &out)
}

/// [`generate_dataset_to`] on a dedicated pool of `threads` workers.
pub fn generate_dataset_with_threads(
    config: &ExperimentConfig,
    out_dir: &Path,
    threads: usize,
) -> Result<Manifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param(e.to_string()))?;
    pool.install(|| generate_dataset_to(config, out_dir))
}

/// Train rows that violate the train protocol's nuisance bounds.
pub fn audit_train(manifest: &Manifest, config: &ExperimentConfig) -> Vec<String> {
    let subset_of = |id: u32| -> Option<Subset> {
        let (left, right) = disentanglement_halves(&config.identity_ids());
        if left.contains(&id) {
            Some(Subset::Left)
        } else if right.contains(&id) {
            Some(Subset::Right)
        } else {
            None
        }
    };
    manifest
        .split(Split::Train)
        .filter(|r| {
            !config
                .train
                .admits(r.yaw_deg, r.light_azimuth_deg, subset_of(r.identity_id))
        })
        .map(|r| r.image_path.clone())
        .collect()
}

/// Problems with test-split coverage: every identity must appear at every
/// configuration of the test grid with every test background, exactly once.
pub fn audit_test_coverage(manifest: &Manifest, config: &ExperimentConfig) -> Vec<String> {
    let mut problems = Vec::new();
    let ids = config.identity_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let grid = match enumerate_grid(&config.test, &ids, &mut rng) {
        Ok(g) => g,
        Err(e) => return vec![e.to_string()],
    };
    let mut want: BTreeMap<(u32, String, String), usize> = BTreeMap::new();
    for g in &grid {
        *want
            .entry((
                g.identity_id,
                format_deg(g.yaw_deg),
                format_deg(g.light_azimuth_deg),
            ))
            .or_default() += config.backgrounds as usize;
    }
    let mut got: BTreeMap<(u32, String, String), BTreeSet<u32>> = BTreeMap::new();
    for r in manifest.split(Split::Test) {
        let key = (
            r.identity_id,
            format_deg(r.yaw_deg),
            format_deg(r.light_azimuth_deg),
        );
        if !got.entry(key.clone()).or_default().insert(r.background_id) {
            problems.push(format!("duplicate test row {}", r.image_path));
        }
    }
    for (key, n) in &want {
        let have = got.get(key).map_or(0, BTreeSet::len);
        if have != *n {
            problems.push(format!(
                "identity {} yaw {} light {}: {have} of {n} backgrounds",
                key.0, key.1, key.2
            ));
        }
    }
    for key in got.keys().filter(|k| !want.contains_key(*k)) {
        problems.push(format!(
            "identity {} yaw {} light {} is not on the test grid",
            key.0, key.1, key.2
        ));
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{AngleRange, YAW_STEP_DEG};

    fn pose_range(identities: u32, backgrounds: u32) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(BiasProtocol::UniformRange {
            yaw: AngleRange::new(-45.0, 45.0, YAW_STEP_DEG),
        });
        c.identities = identities;
        c.backgrounds = backgrounds;
        c
    }

    #[test]
    fn full_scale_test_split_has_49500_rows() {
        let m = plan_dataset(&pose_range(30, 50), None).unwrap();
        assert_eq!(m.split(Split::Test).count(), 30 * 33 * 50);
        assert_eq!(m.split(Split::Train).count(), 30 * 17 * 50);
    }

    #[test]
    fn biased_train_and_full_test() {
        let c = pose_range(4, 2);
        let m = plan_dataset(&c, None).unwrap();
        assert!(m.split(Split::Train).all(|r| r.yaw_deg.abs() <= 45.0));
        let test_yaws: BTreeSet<String> = m
            .split(Split::Test)
            .map(|r| format_deg(r.yaw_deg))
            .collect();
        assert_eq!(test_yaws.len(), 33);
        assert!(test_yaws.contains("-90.0000") && test_yaws.contains("90.0000"));
        assert!(audit_train(&m, &c).is_empty());
        assert!(audit_test_coverage(&m, &c).is_empty());
    }

    #[test]
    fn backgrounds_are_disjoint_per_split_by_default() {
        let c = pose_range(2, 5);
        let [train, test] = background_pools(&c, None).unwrap();
        assert_eq!(train.len(), 5);
        assert!(train.iter().all(|b| !test.contains(b)));
        let mut shared = c.clone();
        shared.disjoint_backgrounds = false;
        let [a, b] = background_pools(&shared, None).unwrap();
        assert_eq!(a, b);
        assert!(background_pools(&c, Some(9)).is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let m = plan_dataset(&pose_range(2, 2), None).unwrap();
        let mut buf = Vec::new();
        m.to_writer(&mut buf).unwrap();
        let back = Manifest::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back.records.len(), m.records.len());
        for (a, b) in back.records.iter().zip(&m.records) {
            // SH columns are lossless
            assert_eq!(a.sh, b.sh);
            assert_eq!(a.seed, b.seed);
            assert_eq!(format_deg(a.yaw_deg), format_deg(b.yaw_deg));
        }
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("image_path,identity_id,split,yaw_deg,"));
        assert!(header.ends_with(",sh_b_8,seed"));
        assert!(text.contains(",-45.0000,0.0000,55.0000,"));
    }

    #[test]
    fn planning_is_deterministic_and_rows_unique() {
        let c = pose_range(3, 3);
        let a = plan_dataset(&c, None).unwrap();
        assert_eq!(a, plan_dataset(&c, None).unwrap());
        let keys: BTreeSet<_> = a
            .records
            .iter()
            .map(|r| {
                (
                    r.identity_id,
                    format_deg(r.yaw_deg),
                    format_deg(r.light_azimuth_deg),
                    r.background_id,
                    r.split,
                )
            })
            .collect();
        assert_eq!(keys.len(), a.records.len());
        let paths: BTreeSet<_> = a.records.iter().map(|r| &r.image_path).collect();
        assert_eq!(paths.len(), a.records.len());
    }

    #[test]
    fn config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            seed = 3
            [train]
            protocol = "sparse_pose_set"
            yaws_deg = [-45.0, 0.0, 45.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.image_size, 227);
        assert_eq!(c.identities, 30);
        assert_eq!(c.backgrounds, 50);
        assert_eq!(c.test, BiasProtocol::full_yaw());
        assert_eq!(c.model, ModelSource::Toy(ToyModelSpec::default()));
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = ExperimentConfig::from_toml_str(
            "idenitities = 3\n[train]\nprotocol = \"sparse_pose_set\"\nyaws_deg = [0.0]\n",
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn missing_model_file_is_load_error() {
        let mut c = pose_range(1, 1);
        c.model = ModelSource::File {
            path: PathBuf::from("/nonexistent/model.pfig"),
        };
        let dir = tempfile::tempdir().unwrap();
        let err = generate_dataset_to(&c, dir.path()).unwrap_err();
        assert!(matches!(err, Error::ModelLoad { .. }), "{err}");
    }

    #[test]
    fn unwritable_output_is_io_error() {
        let mut c = pose_range(1, 1);
        c.model = ModelSource::Toy(ToyModelSpec {
            subdivisions: 1,
            k_shape: 2,
            k_color: 2,
            k_expr: 1,
        });
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = generate_dataset_to(&c, &blocker.join("out")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }), "{err}");
    }
}
