//! Background textures: a user directory of images, or seeded procedural
//! patterns for license-free runs and tests.

use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::raster::Image;
use crate::seed::mix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackgroundSource {
    /// Every `png`/`jpg`/`jpeg` file in the directory, sorted by name.
    Directory { path: PathBuf },
    /// Unbounded family of seeded noise, stripe, cell and checker textures.
    Procedural { seed: u64 },
    /// A single flat sRGB color.
    Solid { rgb: [u8; 3] },
}

impl Default for BackgroundSource {
    fn default() -> Self {
        BackgroundSource::Procedural { seed: 0 }
    }
}

/// An opened background source producing textures at the output size.
#[derive(Debug, Clone)]
pub struct Backgrounds {
    kind: Kind,
    width: u32,
    height: u32,
}

#[derive(Debug, Clone)]
enum Kind {
    Files(Vec<PathBuf>),
    Procedural(u64),
    Solid([u8; 3]),
}

impl Backgrounds {
    pub fn open(source: &BackgroundSource, width: u32, height: u32) -> Result<Self> {
        let kind = match source {
            BackgroundSource::Directory { path } => Kind::Files(list_textures(path)?),
            BackgroundSource::Procedural { seed } => Kind::Procedural(*seed),
            BackgroundSource::Solid { rgb } => Kind::Solid(*rgb),
        };
        Ok(Backgrounds {
            kind,
            width,
            height,
        })
    }

    /// Number of distinct textures; `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            Kind::Files(f) => Some(f.len()),
            Kind::Procedural(_) => None,
            Kind::Solid(_) => Some(1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Texture `id` resampled to the output size.
    pub fn texture(&self, id: u32) -> Result<Image> {
        match &self.kind {
            Kind::Files(files) => {
                let path = files.get(id as usize).ok_or_else(|| {
                    Error::param(format!(
                        "background id {id} out of range ({} textures)",
                        files.len()
                    ))
                })?;
                let img = image::open(path).map_err(|source| Error::Image {
                    path: path.clone(),
                    source,
                })?;
                Ok(image::imageops::resize(
                    &img.to_rgb8(),
                    self.width,
                    self.height,
                    FilterType::Triangle,
                ))
            }
            Kind::Procedural(seed) => Ok(procedural_texture(*seed, id, self.width, self.height)),
            Kind::Solid(rgb) => Ok(Image::from_pixel(self.width, self.height, image::Rgb(*rgb))),
        }
    }
}

fn list_textures(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!(
            "background directory {} contains no png/jpg textures",
            dir.display()
        )));
    }
    Ok(files)
}

/// Toroidal shift of a texture by `(dx, dy)` pixels.
pub fn shifted(img: &Image, dx: u32, dy: u32) -> Image {
    let (w, h) = img.dimensions();
    Image::from_fn(w, h, |x, y| *img.get_pixel((x + dx) % w, (y + dy) % h))
}

/// Deterministic texture number `id` of the procedural family `seed`.
pub fn procedural_texture(seed: u64, id: u32, width: u32, height: u32) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, u64::from(id), 0x6267]));
    let a = random_color(&mut rng);
    let b = random_color(&mut rng);
    let pattern = rng.random_range(0..4u32);
    let noise = ValueNoise::new(&mut rng, 16);
    let freq = rng.random_range(3.0..10.0);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (sin, cos) = angle.sin_cos();
    let cells = rng.random_range(4.0..14.0f64);
    let scale = 1.0 / f64::from(width.max(height));
    Image::from_fn(width, height, |x, y| {
        let u = f64::from(x) * scale;
        let v = f64::from(y) * scale;
        let n = noise.fbm(u * freq, v * freq, 4);
        let t = match pattern {
            0 => n,
            1 => {
                let s = (cos * u + sin * v) * cells * std::f64::consts::TAU + 3.0 * n;
                0.5 + 0.5 * s.sin()
            }
            2 => {
                let cu = (u * cells).fract() - 0.5;
                let cv = (v * cells).fract() - 0.5;
                let r = (cu * cu + cv * cv).sqrt() + 0.25 * (n - 0.5);
                if r < 0.3 {
                    0.15 * n
                } else {
                    0.85 + 0.15 * n
                }
            }
            _ => {
                let check = ((u * cells).floor() + (v * cells).floor()) as i64 & 1;
                0.8 * check as f64 + 0.2 * n
            }
        };
        let t = t.clamp(0.0, 1.0);
        image::Rgb([0, 1, 2].map(|c| (a[c] + (b[c] - a[c]) * t).round() as u8))
    })
}

fn random_color<R: Rng>(rng: &mut R) -> [f64; 3] {
    [0; 3].map(|_| rng.random_range(0.0..255.0))
}

/// Periodic lattice value noise.
struct ValueNoise {
    size: usize,
    values: Vec<f64>,
}

impl ValueNoise {
    fn new<R: Rng>(rng: &mut R, size: usize) -> Self {
        ValueNoise {
            size,
            values: (0..size * size).map(|_| rng.random::<f64>()).collect(),
        }
    }

    fn at(&self, x: i64, y: i64) -> f64 {
        let n = self.size as i64;
        self.values[(y.rem_euclid(n) * n + x.rem_euclid(n)) as usize]
    }

    fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
        let (ix, iy) = (x0 as i64, y0 as i64);
        let top = self.at(ix, iy) * (1.0 - sx) + self.at(ix + 1, iy) * sx;
        let bottom = self.at(ix, iy + 1) * (1.0 - sx) + self.at(ix + 1, iy + 1) * sx;
        top * (1.0 - sy) + bottom * sy
    }

    fn fbm(&self, x: f64, y: f64, octaves: u32) -> f64 {
        let mut sum = 0.0;
        let mut amp = 0.5;
        let mut norm = 0.0;
        let mut f = 1.0;
        for _ in 0..octaves {
            sum += amp * self.sample(x * f, y * f);
            norm += amp;
            amp *= 0.5;
            f *= 2.0;
        }
        sum / norm
    }
}
