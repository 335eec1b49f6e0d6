//! Nearest-class-mean baseline over downsampled grayscale pixels.
//!
//! No randomness and no training loop: class means of normalized features,
//! prediction by minimum Euclidean distance with ties to the lowest id.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Manifest, SampleRecord};
use crate::eval::Prediction;
use crate::protocol::Split;
use crate::raster::Image;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub width: u32,
    pub height: u32,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec {
            width: 32,
            height: 32,
        }
    }
}

impl FeatureSpec {
    pub fn dim(&self) -> usize {
        (self.width * self.height) as usize
    }
}

/// Row `i` holds the overlap of output cell `i` with each source pixel.
fn area_weights(src: u32, dst: u32) -> Vec<Vec<(usize, f64)>> {
    let scale = f64::from(src) / f64::from(dst);
    (0..dst)
        .map(|i| {
            let lo = f64::from(i) * scale;
            let hi = f64::from(i + 1) * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src as usize);
            (first..last)
                .map(|s| {
                    let overlap = (hi.min(s as f64 + 1.0) - lo.max(s as f64)).max(0.0);
                    (s, overlap)
                })
                .filter(|&(_, w)| w > 0.0)
                .collect()
        })
        .collect()
}

/// Grayscale, area-average downsample, mean subtraction and unit-norm
/// scaling. A constant image maps to the zero vector.
pub fn featurize(image: &Image, spec: &FeatureSpec) -> Vec<f64> {
    let (w, h) = image.dimensions();
    let gray: Vec<f64> = image
        .pixels()
        .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
        .collect();
    let wx = area_weights(w, spec.width);
    let wy = area_weights(h, spec.height);
    // horizontal pass: h rows x spec.width
    let mut rows = vec![0.0; h as usize * spec.width as usize];
    for y in 0..h as usize {
        let src = &gray[y * w as usize..(y + 1) * w as usize];
        for (i, ws) in wx.iter().enumerate() {
            rows[y * spec.width as usize + i] = ws.iter().map(|&(s, k)| k * src[s]).sum();
        }
    }
    let mut out = vec![0.0; spec.dim()];
    for (j, ws) in wy.iter().enumerate() {
        for i in 0..spec.width as usize {
            out[j * spec.width as usize + i] = ws
                .iter()
                .map(|&(s, k)| k * rows[s * spec.width as usize + i])
                .sum();
        }
    }
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    out.iter_mut().for_each(|v| *v -= mean);
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-9 {
        out.iter_mut().for_each(|v| *v = 0.0);
    } else {
        out.iter_mut().for_each(|v| *v /= norm);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub spec: FeatureSpec,
    /// Class mean per identity, ordered by id.
    pub means: BTreeMap<u32, Vec<f64>>,
}

/// Class means of already featurized samples.
pub fn fit(
    spec: FeatureSpec,
    samples: impl IntoIterator<Item = (u32, Vec<f64>)>,
) -> Result<ClassifierModel> {
    let mut sums: BTreeMap<u32, (Vec<f64>, usize)> = BTreeMap::new();
    for (id, f) in samples {
        if f.len() != spec.dim() {
            return Err(Error::param(format!(
                "feature length {} does not match spec dimension {}",
                f.len(),
                spec.dim()
            )));
        }
        let (sum, n) = sums.entry(id).or_insert_with(|| (vec![0.0; spec.dim()], 0));
        sum.iter_mut().zip(&f).for_each(|(s, v)| *s += v);
        *n += 1;
    }
    if sums.is_empty() {
        return Err(Error::param("no training samples"));
    }
    let means = sums
        .into_iter()
        .map(|(id, (sum, n))| (id, sum.into_iter().map(|s| s / n as f64).collect()))
        .collect();
    Ok(ClassifierModel { spec, means })
}

impl ClassifierModel {
    pub fn predict_features(&self, f: &[f64]) -> u32 {
        let mut best: Option<(u32, f64)> = None;
        for (&id, mean) in &self.means {
            let d: f64 = mean.iter().zip(f).map(|(m, v)| (m - v) * (m - v)).sum();
            // strict comparison keeps the lowest id on ties
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((id, d));
            }
        }
        best.expect("model has at least one class").0
    }
}

pub fn predict(model: &ClassifierModel, image: &Image) -> u32 {
    model.predict_features(&featurize(image, &model.spec))
}

fn load(root: &Path, record: &SampleRecord) -> Result<Image> {
    let path = root.join(&record.image_path);
    image::open(&path)
        .map(|img| img.to_rgb8())
        .map_err(|source| Error::Image { path, source })
}

/// Fits on the train split; image paths resolve against `root`.
pub fn fit_manifest(
    manifest: &Manifest,
    root: &Path,
    spec: FeatureSpec,
) -> Result<ClassifierModel> {
    let train: Vec<&SampleRecord> = manifest.split(Split::Train).collect();
    let features = train
        .par_iter()
        .map(|r| load(root, r).map(|img| (r.identity_id, featurize(&img, &spec))))
        .collect::<Result<Vec<_>>>()?;
    fit(spec, features)
}

/// One prediction per row of `split`, in manifest order.
pub fn predict_manifest(
    model: &ClassifierModel,
    manifest: &Manifest,
    root: &Path,
    split: Split,
) -> Result<Vec<Prediction>> {
    let rows: Vec<&SampleRecord> = manifest.split(split).collect();
    rows.par_iter()
        .map(|r| {
            load(root, r).map(|img| Prediction {
                image_path: r.image_path.clone(),
                predicted_identity_id: predict(model, &img),
            })
        })
        .collect()
}
