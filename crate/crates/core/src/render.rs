//! Scene composition: mesh synthesis, lighting and rasterization for one
//! annotated sample.

use crate::background::{shifted, Backgrounds};
use crate::camera::{Camera, PoseParams};
use crate::illumination::{
    directed_to_sh, DirectedLight, SHIllumination, DEFAULT_AMBIENT_RATIO, DEFAULT_INTENSITY,
};
use crate::model::{instantiate_mesh, IdentityParams, Mesh, MorphableModel};
use crate::protocol::Split;
use crate::raster::{rasterize, Image};
use crate::Result;

/// One fully specified rendering configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    pub identity_id: u32,
    pub split: Split,
    pub yaw_deg: f64,
    pub light_azimuth_deg: f64,
    pub light_inclination_deg: f64,
    pub background_id: u32,
    /// Per-sample seed; selects the background texture offset.
    pub seed: u64,
}

/// Scene-independent rendering state shared by all samples.
#[derive(Debug, Clone)]
pub struct RenderSetup {
    pub camera: Camera,
    pub backgrounds: Backgrounds,
    pub light_intensity: f64,
    pub ambient_ratio: f64,
    /// Offset each background texture by a seed-derived toroidal shift.
    pub shift_backgrounds: bool,
}

impl RenderSetup {
    pub fn new(camera: Camera, backgrounds: Backgrounds) -> Self {
        RenderSetup {
            camera,
            backgrounds,
            light_intensity: DEFAULT_INTENSITY,
            ambient_ratio: DEFAULT_AMBIENT_RATIO,
            shift_backgrounds: true,
        }
    }

    pub fn light(&self, scene: &SceneParams) -> DirectedLight {
        DirectedLight {
            azimuth: scene.light_azimuth_deg.to_radians(),
            inclination: scene.light_inclination_deg.to_radians(),
            intensity: [self.light_intensity; 3],
            ambient: [self.light_intensity * self.ambient_ratio; 3],
        }
    }

    pub fn illumination(&self, scene: &SceneParams) -> Result<SHIllumination> {
        let light = self.light(scene);
        light.validate()?;
        Ok(directed_to_sh(&light))
    }

    pub fn background(&self, scene: &SceneParams) -> Result<Image> {
        let tex = self.backgrounds.texture(scene.background_id)?;
        if !self.shift_backgrounds {
            return Ok(tex);
        }
        let (w, h) = tex.dimensions();
        let dx = (scene.seed % u64::from(w)) as u32;
        let dy = ((scene.seed >> 32) % u64::from(h)) as u32;
        Ok(shifted(&tex, dx, dy))
    }
}

/// Renders an already instantiated mesh; lets callers reuse one mesh for
/// every nuisance configuration of an identity.
pub fn render_mesh(mesh: &Mesh, scene: &SceneParams, setup: &RenderSetup) -> Result<Image> {
    let pose = PoseParams::yaw(scene.yaw_deg.to_radians());
    pose.validate()?;
    let sh = setup.illumination(scene)?;
    let background = setup.background(scene)?;
    rasterize(mesh, &pose, &setup.camera, &sh, &background)
}

pub fn render_sample(
    model: &MorphableModel,
    identity: &IdentityParams,
    scene: &SceneParams,
    setup: &RenderSetup,
) -> Result<Image> {
    let mesh = instantiate_mesh(model, identity)?;
    render_mesh(&mesh, scene, setup)
}
