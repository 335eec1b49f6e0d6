#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use facegen::dataset::{ExperimentConfig, SampleRecord, MANIFEST_FILE};
use facegen::eval::Prediction;
use facegen::model::{build_toy_model, Mesh, MorphableModel, ToyModelSpec};
use facegen::protocol::{AngleRange, BiasProtocol, PoseAxis, LIGHT_STEP_DEG, YAW_STEP_DEG};
use facegen::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_model(subdivisions: u32, k: usize) -> MorphableModel {
    let spec = ToyModelSpec {
        subdivisions,
        k_shape: k,
        k_color: k,
        k_expr: k,
    };
    build_toy_model(&spec, &mut rng(11)).unwrap()
}

/// One front-facing triangle in the z = 0 plane, far larger than any test
/// viewport, with constant attributes.
pub fn full_screen_triangle(normal: Vec3, albedo: Vec3) -> Mesh {
    Mesh {
        positions: vec![
            Vec3::new(-2000.0, -2000.0, 0.0),
            Vec3::new(2000.0, -2000.0, 0.0),
            Vec3::new(0.0, 2000.0, 0.0),
        ],
        colors: vec![albedo; 3],
        normals: vec![normal; 3],
        triangles: vec![[0, 1, 2]],
    }
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Midpoint rule in (z, phi); z is area-uniform so every point carries the
/// same weight `4π / n`.
pub fn sphere_grid(nz: usize, nphi: usize) -> (Vec<Vec3>, f64) {
    let mut points = Vec::with_capacity(nz * nphi);
    for i in 0..nz {
        let z = -1.0 + 2.0 * (i as f64 + 0.5) / nz as f64;
        let r = (1.0 - z * z).sqrt();
        for j in 0..nphi {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nphi as f64;
            points.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
        }
    }
    let w = 4.0 * std::f64::consts::PI / points.len() as f64;
    (points, w)
}

pub fn yaw_range(min: f64, max: f64) -> AngleRange {
    AngleRange::new(min, max, YAW_STEP_DEG)
}

pub fn light_range(min: f64, max: f64) -> AngleRange {
    AngleRange::new(min, max, LIGHT_STEP_DEG)
}

pub fn pose_range_config(identities: u32, backgrounds: u32) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(BiasProtocol::UniformRange {
        yaw: yaw_range(-45.0, 45.0),
    });
    c.identities = identities;
    c.backgrounds = backgrounds;
    c
}

pub fn light_bias_config(identities: u32, backgrounds: u32) -> ExperimentConfig {
    let frontal = PoseAxis::Fixed { yaw_deg: 0.0 };
    let mut c = ExperimentConfig::new(BiasProtocol::LightRange {
        light: light_range(-90.0, 0.0),
        pose: frontal,
    });
    c.test = BiasProtocol::LightRange {
        light: light_range(-90.0, 90.0),
        pose: frontal,
    };
    c.identities = identities;
    c.backgrounds = backgrounds;
    c
}

/// Predicts the true identity when `correct(row)` holds, otherwise a
/// uniform draw over `n_ids` identities.
pub fn constructed_predictions(
    records: &[SampleRecord],
    n_ids: u32,
    seed: u64,
    correct: impl Fn(&SampleRecord) -> bool,
) -> Vec<Prediction> {
    let mut r = rng(seed);
    records
        .iter()
        .map(|row| Prediction {
            image_path: row.image_path.clone(),
            predicted_identity_id: if correct(row) {
                row.identity_id
            } else {
                r.random_range(0..n_ids)
            },
        })
        .collect()
}

/// SHA-256 of the manifest and of every image it lists, keyed by path.
pub fn hash_dataset(dir: &Path, records: &[SampleRecord]) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut add = |name: &str| {
        let bytes = std::fs::read(dir.join(name)).unwrap();
        out.insert(name.to_owned(), Sha256::digest(&bytes).to_vec());
    };
    add(MANIFEST_FILE);
    for r in records {
        add(&r.image_path);
    }
    out
}
