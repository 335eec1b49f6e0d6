//! Three-band real spherical-harmonics lighting and Lambertian irradiance.
//!
//! Basis ordering is band-ascending, then `m = -l..=l`:
//!
//! | index | (l, m)  | function                    |
//! |-------|---------|-----------------------------|
//! | 0     | (0, 0)  | `0.282095`                  |
//! | 1     | (1, -1) | `0.488603 y`                |
//! | 2     | (1, 0)  | `0.488603 z`                |
//! | 3     | (1, 1)  | `0.488603 x`                |
//! | 4     | (2, -2) | `1.092548 xy`               |
//! | 5     | (2, -1) | `1.092548 yz`               |
//! | 6     | (2, 0)  | `0.315392 (3z² - 1)`        |
//! | 7     | (2, 1)  | `1.092548 xz`               |
//! | 8     | (2, 2)  | `0.546274 (x² - y²)`        |
//!
//! This is the usual graphics convention without the Condon-Shortley phase,
//! evaluated directly on world-frame directions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

pub const SH_COEFFS: usize = 9;

const UNIT_TOL: f64 = 1e-6;

// Normalization constants, computed from their closed forms.
fn k00() -> f64 {
    0.5 * (1.0 / PI).sqrt()
}
fn k1() -> f64 {
    (3.0 / (4.0 * PI)).sqrt()
}
fn k2_mixed() -> f64 {
    0.5 * (15.0 / PI).sqrt()
}
fn k20() -> f64 {
    0.25 * (5.0 / PI).sqrt()
}
fn k22() -> f64 {
    0.25 * (15.0 / PI).sqrt()
}

/// Cosine-lobe convolution factors per band: π, 2π/3, π/4.
pub const BAND_FACTORS: [f64; 3] = [PI, 2.0 * PI / 3.0, PI / 4.0];

fn band_of(index: usize) -> usize {
    match index {
        0 => 0,
        1..=3 => 1,
        _ => 2,
    }
}

/// Basis values without the unit-length check.
pub fn sh_basis_unchecked(d: &Vec3) -> [f64; SH_COEFFS] {
    let (x, y, z) = (d.x, d.y, d.z);
    [
        k00(),
        k1() * y,
        k1() * z,
        k1() * x,
        k2_mixed() * x * y,
        k2_mixed() * y * z,
        k20() * (3.0 * z * z - 1.0),
        k2_mixed() * x * z,
        k22() * (x * x - y * y),
    ]
}

pub fn sh_basis(direction: &Vec3) -> Result<[f64; SH_COEFFS]> {
    let len = direction.norm();
    if !((len - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::param(format!(
            "SH direction must be unit length, got |d| = {len}"
        )));
    }
    Ok(sh_basis_unchecked(direction))
}

/// 27 lighting parameters: 9 coefficients per RGB channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SHIllumination {
    pub coeffs: [[f64; SH_COEFFS]; 3],
}

impl SHIllumination {
    pub fn zero() -> Self {
        SHIllumination {
            coeffs: [[0.0; SH_COEFFS]; 3],
        }
    }

    /// Channel-major flattening, the manifest column order.
    pub fn to_flat(&self) -> [f64; 27] {
        let mut out = [0.0; 27];
        for (c, ch) in self.coeffs.iter().enumerate() {
            out[c * SH_COEFFS..(c + 1) * SH_COEFFS].copy_from_slice(ch);
        }
        out
    }

    pub fn from_flat(flat: &[f64; 27]) -> Self {
        let mut coeffs = [[0.0; SH_COEFFS]; 3];
        for (c, ch) in coeffs.iter_mut().enumerate() {
            ch.copy_from_slice(&flat[c * SH_COEFFS..(c + 1) * SH_COEFFS]);
        }
        SHIllumination { coeffs }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out
            .coeffs
            .iter_mut()
            .flatten()
            .zip(other.coeffs.iter().flatten())
        {
            *a += b;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().flatten().all(|v| v.is_finite())
    }
}

/// A distant directional light plus a uniform ambient environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedLight {
    /// Rotation about the vertical axis; 0 is frontal, positive places the
    /// light on the subject's right (`-x`).
    pub azimuth: f64,
    /// Angle from the vertical (`+y`) axis.
    pub inclination: f64,
    pub intensity: [f64; 3],
    pub ambient: [f64; 3],
}

/// Default directed-light intensity per channel.
pub const DEFAULT_INTENSITY: f64 = 1.8;
/// Ambient radiance as a fraction of the directed intensity.
pub const DEFAULT_AMBIENT_RATIO: f64 = 0.4;

impl DirectedLight {
    /// White light with the default ambient floor of 0.4 x intensity.
    pub fn new(azimuth: f64, inclination: f64) -> Self {
        let i = DEFAULT_INTENSITY;
        let a = DEFAULT_AMBIENT_RATIO * i;
        DirectedLight {
            azimuth,
            inclination,
            intensity: [i; 3],
            ambient: [a; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PI).contains(&self.inclination) {
            return Err(Error::param(format!(
                "inclination {} outside [0, pi]",
                self.inclination
            )));
        }
        if self
            .intensity
            .iter()
            .chain(&self.ambient)
            .any(|v| !(*v >= 0.0))
        {
            return Err(Error::param("light intensity and ambient must be >= 0"));
        }
        Ok(())
    }

    /// Unit vector from the surface toward the light.
    pub fn direction(&self) -> Vec3 {
        let s = self.inclination.sin();
        Vec3::new(
            -s * self.azimuth.sin(),
            self.inclination.cos(),
            s * self.azimuth.cos(),
        )
    }
}

/// Projects a constant ambient environment plus a delta light onto the
/// first three SH bands.
pub fn directed_to_sh(light: &DirectedLight) -> SHIllumination {
    let y = sh_basis_unchecked(&light.direction());
    // ∫ Y_00 dΩ = 4π · Y_00 = 2√π; higher bands integrate to zero
    let ambient_l0 = 4.0 * PI * k00();
    let mut coeffs = [[0.0; SH_COEFFS]; 3];
    for (c, ch) in coeffs.iter_mut().enumerate() {
        for (i, v) in ch.iter_mut().enumerate() {
            *v = light.intensity[c] * y[i];
        }
        ch[0] += light.ambient[c] * ambient_l0;
    }
    SHIllumination { coeffs }
}

/// Irradiance before clamping; linear in `sh`.
pub fn irradiance_unclamped(sh: &SHIllumination, normal: &Vec3) -> [f64; 3] {
    let y = sh_basis_unchecked(normal);
    let mut out = [0.0; 3];
    for (c, ch) in sh.coeffs.iter().enumerate() {
        out[c] = ch
            .iter()
            .zip(&y)
            .enumerate()
            .map(|(i, (l, yv))| BAND_FACTORS[band_of(i)] * l * yv)
            .sum();
    }
    out
}

/// Lambertian irradiance `E(n) = Σ A_l L_lm Y_lm(n)`, clipped at zero.
pub fn irradiance(sh: &SHIllumination, normal: &Vec3) -> [f64; 3] {
    irradiance_unclamped(sh, normal).map(|e| e.max(0.0))
}
