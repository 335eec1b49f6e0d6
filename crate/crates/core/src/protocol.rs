//! Bias protocols: how the nuisance parameters of a split are sampled.
//!
//! Angles are stored in degrees, the unit of configs and manifests, so
//! grid values such as `-45 + 8 * 5.625` stay exact.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Light inclination from the vertical axis used by all experiments.
pub const DEFAULT_INCLINATION_DEG: f64 = 55.0;
/// Yaw grid spacing, π/32 rad.
pub const YAW_STEP_DEG: f64 = 180.0 / 32.0;
/// Light-direction grid spacing, π/16 rad.
pub const LIGHT_STEP_DEG: f64 = 180.0 / 16.0;
/// Gaussian-biased yaw draws are clipped to ±90°.
pub const YAW_CLIP_DEG: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::param(format!("unknown split {other:?}"))),
        }
    }
}

/// Inclusive arithmetic grid `min, min+step, ..., max` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub min_deg: f64,
    pub max_deg: f64,
    pub step_deg: f64,
}

impl AngleRange {
    pub fn new(min_deg: f64, max_deg: f64, step_deg: f64) -> Self {
        AngleRange {
            min_deg,
            max_deg,
            step_deg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_deg > 0.0) || !self.step_deg.is_finite() {
            return Err(Error::param(format!("step {} must be > 0", self.step_deg)));
        }
        if !(self.min_deg <= self.max_deg) {
            return Err(Error::param(format!(
                "empty range [{}, {}]",
                self.min_deg, self.max_deg
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        if self.validate().is_err() {
            return 0;
        }
        // tolerate representation error in (max - min) / step
        ((self.max_deg - self.min_deg) / self.step_deg + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.min_deg + i as f64 * self.step_deg)
            .collect()
    }

    pub fn contains(&self, deg: f64) -> bool {
        deg >= self.min_deg - 1e-9 && deg <= self.max_deg + 1e-9
    }
}

/// Yaw handling for light-direction protocols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PoseAxis {
    Fixed { yaw_deg: f64 },
    Range(AngleRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum BiasProtocol {
    /// Yaw on an inclusive grid, frontal light.
    UniformRange { yaw: AngleRange },
    /// `n_samples` yaw draws per identity from N(mu, sigma), clipped to ±90°.
    GaussianPose {
        mu_deg: f64,
        sigma_deg: f64,
        n_samples: usize,
    },
    /// An explicit list of yaw values, frontal light.
    SparsePoseSet { yaws_deg: Vec<f64> },
    /// Light azimuth on a grid, with a fixed pose or a yaw grid.
    LightRange { light: AngleRange, pose: PoseAxis },
    /// The first half of the identities (by sorted id) gets `left`, the
    /// rest `right`; frontal light.
    DisentanglementSplit { left: AngleRange, right: AngleRange },
}

impl BiasProtocol {
    /// Full yaw range at π/32 spacing: the unbiased pose test grid.
    pub fn full_yaw() -> Self {
        BiasProtocol::UniformRange {
            yaw: AngleRange::new(-90.0, 90.0, YAW_STEP_DEG),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BiasProtocol::UniformRange { yaw } => yaw.validate(),
            BiasProtocol::GaussianPose {
                sigma_deg,
                n_samples,
                mu_deg,
            } => {
                if !(*sigma_deg > 0.0) || !mu_deg.is_finite() {
                    return Err(Error::param("gaussian pose needs finite mu and sigma > 0"));
                }
                if *n_samples == 0 {
                    return Err(Error::param("gaussian pose needs n_samples > 0"));
                }
                Ok(())
            }
            BiasProtocol::SparsePoseSet { yaws_deg } => {
                if yaws_deg.is_empty() {
                    return Err(Error::param("sparse pose set is empty"));
                }
                if yaws_deg.iter().any(|y| !y.is_finite()) {
                    return Err(Error::param("non-finite yaw in sparse pose set"));
                }
                Ok(())
            }
            BiasProtocol::LightRange { light, pose } => {
                light.validate()?;
                match pose {
                    PoseAxis::Fixed { yaw_deg } if !yaw_deg.is_finite() => {
                        Err(Error::param("non-finite fixed yaw"))
                    }
                    PoseAxis::Fixed { .. } => Ok(()),
                    PoseAxis::Range(r) => r.validate(),
                }
            }
            BiasProtocol::DisentanglementSplit { left, right } => {
                left.validate()?;
                right.validate()
            }
        }
    }

    /// Whether a sample lies within the protocol's nuisance bounds.
    /// `subset` is the disentanglement half of the sample's identity.
    pub fn admits(&self, yaw_deg: f64, light_deg: f64, subset: Option<Subset>) -> bool {
        let frontal = light_deg.abs() < 1e-9;
        match self {
            BiasProtocol::UniformRange { yaw } => yaw.contains(yaw_deg) && frontal,
            BiasProtocol::GaussianPose { .. } => yaw_deg.abs() <= YAW_CLIP_DEG && frontal,
            BiasProtocol::SparsePoseSet { yaws_deg } => {
                frontal && yaws_deg.iter().any(|y| (y - yaw_deg).abs() < 1e-9)
            }
            BiasProtocol::LightRange { light, pose } => {
                light.contains(light_deg)
                    && match pose {
                        PoseAxis::Fixed { yaw_deg: y } => (y - yaw_deg).abs() < 1e-9,
                        PoseAxis::Range(r) => r.contains(yaw_deg),
                    }
            }
            BiasProtocol::DisentanglementSplit { left, right } => {
                frontal
                    && match subset {
                        Some(Subset::Left) => left.contains(yaw_deg),
                        Some(Subset::Right) => right.contains(yaw_deg),
                        None => false,
                    }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    Left,
    Right,
}

/// Splits identities for [`BiasProtocol::DisentanglementSplit`]: the first
/// `ceil(n/2)` sorted ids are `Left`.
pub fn disentanglement_halves(identity_ids: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let mut ids = identity_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let right = ids.split_off(ids.len().div_ceil(2));
    (ids, right)
}

/// One nuisance configuration of one identity, before background expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub identity_id: u32,
    /// Position within this identity's nuisance list.
    pub grid_index: u32,
    pub yaw_deg: f64,
    pub light_azimuth_deg: f64,
    pub light_inclination_deg: f64,
}

/// Expands a protocol into nuisance configurations, identity-major in
/// sorted id order. Only `GaussianPose` consumes `rng`.
pub fn enumerate_grid<R: Rng + ?Sized>(
    protocol: &BiasProtocol,
    identity_ids: &[u32],
    rng: &mut R,
) -> Result<Vec<GridPoint>> {
    if identity_ids.is_empty() {
        return Err(Error::param("identity list is empty"));
    }
    protocol.validate()?;
    let mut ids = identity_ids.to_vec();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("duplicate identity ids"));
    }
    let incl = DEFAULT_INCLINATION_DEG;
    let (left, _) = disentanglement_halves(&ids);
    let mut out = Vec::new();
    for &id in &ids {
        let nuisances: Vec<(f64, f64)> = match protocol {
            BiasProtocol::UniformRange { yaw } => {
                yaw.values().into_iter().map(|y| (y, 0.0)).collect()
            }
            BiasProtocol::GaussianPose {
                mu_deg,
                sigma_deg,
                n_samples,
            } => {
                let normal =
                    Normal::new(*mu_deg, *sigma_deg).map_err(|e| Error::param(e.to_string()))?;
                (0..*n_samples)
                    .map(|_| (normal.sample(rng).clamp(-YAW_CLIP_DEG, YAW_CLIP_DEG), 0.0))
                    .collect()
            }
            BiasProtocol::SparsePoseSet { yaws_deg } => {
                yaws_deg.iter().map(|&y| (y, 0.0)).collect()
            }
            BiasProtocol::LightRange { light, pose } => {
                let yaws = match pose {
                    PoseAxis::Fixed { yaw_deg } => vec![*yaw_deg],
                    PoseAxis::Range(r) => r.values(),
                };
                let lights = light.values();
                yaws.iter()
                    .flat_map(|&y| lights.iter().map(move |&l| (y, l)))
                    .collect()
            }
            BiasProtocol::DisentanglementSplit { left: l, right: r } => {
                let range = if left.contains(&id) { l } else { r };
                range.values().into_iter().map(|y| (y, 0.0)).collect()
            }
        };
        out.extend(
            nuisances
                .into_iter()
                .enumerate()
                .map(|(i, (yaw, light))| GridPoint {
                    identity_id: id,
                    grid_index: i as u32,
                    yaw_deg: yaw,
                    light_azimuth_deg: light,
                    light_inclination_deg: incl,
                }),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn full_yaw_grid_has_33_points() {
        let ids = [0, 1];
        let grid = enumerate_grid(&BiasProtocol::full_yaw(), &ids, &mut rng()).unwrap();
        assert_eq!(grid.len(), 2 * 33);
        assert_eq!(grid[0].yaw_deg, -90.0);
        assert_eq!(grid[32].yaw_deg, 90.0);
        assert_eq!(grid[16].yaw_deg, 0.0);
    }

    #[test]
    fn sparse_set_has_three_points() {
        let p = BiasProtocol::SparsePoseSet {
            yaws_deg: vec![-45.0, 0.0, 45.0],
        };
        let grid = enumerate_grid(&p, &[4, 2, 9], &mut rng()).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0].identity_id, 2);
    }

    #[test]
    fn disentanglement_splits_thirty_identities() {
        let ids: Vec<u32> = (0..30).collect();
        let p = BiasProtocol::DisentanglementSplit {
            left: AngleRange::new(-90.0, 0.0, YAW_STEP_DEG),
            right: AngleRange::new(0.0, 90.0, YAW_STEP_DEG),
        };
        let grid = enumerate_grid(&p, &ids, &mut rng()).unwrap();
        let only_left = ids
            .iter()
            .filter(|&&id| {
                grid.iter()
                    .filter(|g| g.identity_id == id)
                    .all(|g| g.yaw_deg <= 0.0)
            })
            .count();
        let only_right = ids
            .iter()
            .filter(|&&id| {
                grid.iter()
                    .filter(|g| g.identity_id == id)
                    .all(|g| g.yaw_deg >= 0.0)
            })
            .count();
        assert_eq!((only_left, only_right), (15, 15));
        // frontal belongs to both halves
        assert!(ids
            .iter()
            .all(|&id| grid.iter().any(|g| g.identity_id == id && g.yaw_deg == 0.0)));
    }

    #[test]
    fn light_range_with_pose_grid_is_a_product() {
        let p = BiasProtocol::LightRange {
            light: AngleRange::new(-90.0, 0.0, LIGHT_STEP_DEG),
            pose: PoseAxis::Range(AngleRange::new(-90.0, 90.0, YAW_STEP_DEG)),
        };
        let grid = enumerate_grid(&p, &[0], &mut rng()).unwrap();
        assert_eq!(grid.len(), 33 * 9);
        assert!(grid.iter().all(|g| g.light_azimuth_deg <= 0.0));
        assert!(grid.iter().all(|g| g.light_inclination_deg == 55.0));
    }

    #[test]
    fn gaussian_pose_is_seeded_and_clipped() {
        let p = BiasProtocol::GaussianPose {
            mu_deg: 0.0,
            sigma_deg: 60.0,
            n_samples: 500,
        };
        let a = enumerate_grid(&p, &[1], &mut rng()).unwrap();
        let b = enumerate_grid(&p, &[1], &mut rng()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|g| g.yaw_deg.abs() <= 90.0));
        assert!(a.iter().any(|g| g.yaw_deg == 90.0 || g.yaw_deg == -90.0));
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(enumerate_grid(&BiasProtocol::full_yaw(), &[], &mut rng()).is_err());
        assert!(enumerate_grid(&BiasProtocol::full_yaw(), &[1, 1], &mut rng()).is_err());
        let bad = BiasProtocol::UniformRange {
            yaw: AngleRange::new(10.0, -10.0, 1.0),
        };
        assert!(bad.validate().is_err());
        let zero_step = BiasProtocol::UniformRange {
            yaw: AngleRange::new(-10.0, 10.0, 0.0),
        };
        assert!(zero_step.validate().is_err());
        assert!(BiasProtocol::SparsePoseSet { yaws_deg: vec![] }
            .validate()
            .is_err());
    }

    #[test]
    fn admits_matches_bounds() {
        let p = BiasProtocol::UniformRange {
            yaw: AngleRange::new(-45.0, 45.0, YAW_STEP_DEG),
        };
        assert!(p.admits(45.0, 0.0, None));
        assert!(!p.admits(50.625, 0.0, None));
        assert!(!p.admits(0.0, 11.25, None));
        let d = BiasProtocol::DisentanglementSplit {
            left: AngleRange::new(-90.0, 0.0, YAW_STEP_DEG),
            right: AngleRange::new(0.0, 90.0, YAW_STEP_DEG),
        };
        assert!(d.admits(-30.0, 0.0, Some(Subset::Left)));
        assert!(!d.admits(30.0, 0.0, Some(Subset::Left)));
        assert!(d.admits(0.0, 0.0, Some(Subset::Right)));
    }

    #[test]
    fn halves_are_balanced() {
        let (l, r) = disentanglement_halves(&[5, 1, 3, 2, 4]);
        assert_eq!(l, vec![1, 2, 3]);
        assert_eq!(r, vec![4, 5]);
    }
}
