//! Deterministic z-buffered triangle rasterizer.
//!
//! Vertices are snapped to 1/256 pixel and coverage is decided with exact
//! integer edge functions under the top-left fill rule, so shared edges are
//! watertight and the result does not depend on how rows are split among
//! workers. Attributes are interpolated perspective-correctly and shaded
//! per pixel with spherical-harmonics Lambertian irradiance.

use rayon::prelude::*;

use crate::camera::{Camera, PoseParams};
use crate::illumination::{irradiance, SHIllumination};
use crate::model::Mesh;
use crate::{Error, Result, Vec3};

pub type Image = image::RgbImage;

/// Camera-frame near clipping plane, mm.
pub const NEAR_PLANE: f64 = 10.0;

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: f64 = (1 << SUBPIXEL_BITS) as f64;
const HALF_PIXEL: i64 = 1 << (SUBPIXEL_BITS - 1);
// keeps edge-function products inside i64
const MAX_FIXED: i64 = 1 << 26;
const BAND_ROWS: usize = 16;

/// Linear-light value to 8-bit sRGB.
pub fn linear_to_srgb8(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let s = if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn srgb8_to_linear(v: u8) -> f64 {
    let s = f64::from(v) / 255.0;
    if s <= 0.040_45 {
        s / 12.92
    } else {
        ((s + 0.055) / 1.055).powf(2.4)
    }
}

/// Reflected radiance for albedo `a` under irradiance `e`: `a·e/π`.
pub fn shade(albedo: &Vec3, e: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|c| albedo[c] * e[c] / std::f64::consts::PI)
}

#[derive(Clone, Copy)]
struct ClipVert {
    p: Vec3,
    color: Vec3,
    normal: Vec3,
}

impl ClipVert {
    fn lerp(&self, o: &ClipVert, t: f64) -> ClipVert {
        ClipVert {
            p: self.p.lerp(&o.p, t),
            color: self.color.lerp(&o.color, t),
            normal: self.normal.lerp(&o.normal, t),
        }
    }
}

struct ScreenTri {
    v: [[i64; 2]; 3],
    inv_z: [f64; 3],
    area: i64,
    /// Added to each edge function: 1 for top-left edges, else 0.
    bias: [i64; 3],
    attrs: [usize; 3],
    /// Inclusive pixel bounds: x0, y0, x1, y1.
    bbox: [i64; 4],
}

struct Prepared {
    tris: Vec<ScreenTri>,
    colors: Vec<Vec3>,
    normals: Vec<Vec3>,
}

fn clip_near(poly: &[ClipVert]) -> Vec<ClipVert> {
    let mut out = Vec::with_capacity(4);
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        let a_in = a.p.z >= NEAR_PLANE;
        let b_in = b.p.z >= NEAR_PLANE;
        if a_in {
            out.push(*a);
        }
        if a_in != b_in {
            let t = (NEAR_PLANE - a.p.z) / (b.p.z - a.p.z);
            let mut v = a.lerp(b, t);
            v.p.z = NEAR_PLANE;
            out.push(v);
        }
    }
    out
}

fn is_top_left(a: [i64; 2], b: [i64; 2]) -> bool {
    (a[1] == b[1] && b[0] > a[0]) || b[1] < a[1]
}

/// `(b - a) x (p - a)` in image coordinates (y down).
#[inline]
fn edge(a: [i64; 2], b: [i64; 2], p: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn prepare(mesh: &Mesh, pose: &PoseParams, camera: &Camera) -> Prepared {
    let rot = pose.rotation();
    let offset = Vec3::from(pose.translation);
    let cam_pos: Vec<Vec3> = mesh
        .positions
        .iter()
        .map(|p| camera.world_to_camera(&(rot * p + offset)))
        .collect();
    let world_normals: Vec<Vec3> = mesh.normals.iter().map(|n| rot * n).collect();

    let mut prepared = Prepared {
        tris: Vec::with_capacity(mesh.triangles.len()),
        colors: Vec::new(),
        normals: Vec::new(),
    };
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| cam_pos[i as usize]);
        let face = (b - a).cross(&(c - a));
        // the camera center is the camera-frame origin
        if face.dot(&a) >= 0.0 {
            continue;
        }
        let verts = t.map(|i| ClipVert {
            p: cam_pos[i as usize],
            color: mesh.colors[i as usize],
            normal: world_normals[i as usize],
        });
        let poly = if verts.iter().all(|v| v.p.z >= NEAR_PLANE) {
            verts.to_vec()
        } else {
            clip_near(&verts)
        };
        if poly.len() < 3 {
            continue;
        }
        let base = prepared.colors.len();
        let mut fixed = Vec::with_capacity(poly.len());
        for v in &poly {
            prepared.colors.push(v.color);
            prepared.normals.push(v.normal);
            let px = camera.project_camera_frame(&v.p).pixel;
            fixed.push([
                (px.x * SUBPIXEL).round() as i64,
                (px.y * SUBPIXEL).round() as i64,
            ]);
        }
        for k in 1..poly.len() - 1 {
            let idx = [0, k, k + 1];
            if let Some(tri) = screen_tri(
                idx.map(|i| fixed[i]),
                idx.map(|i| 1.0 / poly[i].p.z),
                idx.map(|i| base + i),
                camera,
            ) {
                prepared.tris.push(tri);
            }
        }
    }
    prepared
}

fn screen_tri(
    mut v: [[i64; 2]; 3],
    mut inv_z: [f64; 3],
    mut attrs: [usize; 3],
    camera: &Camera,
) -> Option<ScreenTri> {
    if v.iter().flatten().any(|c| c.abs() > MAX_FIXED) {
        log::debug!("dropping triangle outside the fixed-point range");
        return None;
    }
    let mut area = edge(v[0], v[1], v[2]);
    if area == 0 {
        return None;
    }
    if area < 0 {
        v.swap(1, 2);
        inv_z.swap(1, 2);
        attrs.swap(1, 2);
        area = -area;
    }
    let bias = [
        is_top_left(v[1], v[2]),
        is_top_left(v[2], v[0]),
        is_top_left(v[0], v[1]),
    ]
    .map(i64::from);
    // pixel x covers center 256x + 128
    let lo = |m: i64| (m - HALF_PIXEL + (1 << SUBPIXEL_BITS) - 1).div_euclid(1 << SUBPIXEL_BITS);
    let hi = |m: i64| (m - HALF_PIXEL).div_euclid(1 << SUBPIXEL_BITS);
    let xs = v.map(|p| p[0]);
    let ys = v.map(|p| p[1]);
    let x0 = lo(*xs.iter().min().unwrap()).max(0);
    let y0 = lo(*ys.iter().min().unwrap()).max(0);
    let x1 = hi(*xs.iter().max().unwrap()).min(i64::from(camera.width) - 1);
    let y1 = hi(*ys.iter().max().unwrap()).min(i64::from(camera.height) - 1);
    if x0 > x1 || y0 > y1 {
        return None;
    }
    Some(ScreenTri {
        v,
        inv_z,
        area,
        bias,
        attrs,
        bbox: [x0, y0, x1, y1],
    })
}

/// Calls `f(x, y, weights)` for every covered pixel in rows `y0..y1`;
/// `weights` are the screen-space barycentrics of the three vertices.
#[inline]
fn scan(tri: &ScreenTri, y0: i64, y1: i64, mut f: impl FnMut(i64, i64, [f64; 3])) {
    let ys = tri.bbox[1].max(y0);
    let ye = tri.bbox[3].min(y1 - 1);
    let inv_area = 1.0 / tri.area as f64;
    let [a, b, c] = tri.v;
    for y in ys..=ye {
        let py = (y << SUBPIXEL_BITS) + HALF_PIXEL;
        for x in tri.bbox[0]..=tri.bbox[2] {
            let p = [(x << SUBPIXEL_BITS) + HALF_PIXEL, py];
            let w0 = edge(b, c, p);
            let w1 = edge(c, a, p);
            let w2 = edge(a, b, p);
            if w0 + tri.bias[0] > 0 && w1 + tri.bias[1] > 0 && w2 + tri.bias[2] > 0 {
                f(
                    x,
                    y,
                    [
                        w0 as f64 * inv_area,
                        w1 as f64 * inv_area,
                        w2 as f64 * inv_area,
                    ],
                );
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Fragment {
    depth: f64,
    tri: usize,
    weights: [f64; 3],
}

/// Renders `mesh` posed by `pose` over `background`.
///
/// Back faces are culled, triangles are clipped at [`NEAR_PLANE`], and the
/// nearest surface wins. Pixel color is `albedo · E(n) / π` encoded as sRGB,
/// with `E` from [`irradiance`]. Work is split over fixed row bands on the
/// current rayon pool; output is bit-identical for any worker count.
pub fn rasterize(
    mesh: &Mesh,
    pose: &PoseParams,
    camera: &Camera,
    sh: &SHIllumination,
    background: &Image,
) -> Result<Image> {
    camera.validate()?;
    if background.dimensions() != (camera.width, camera.height) {
        return Err(Error::param(format!(
            "background is {:?}, camera expects {}x{}",
            background.dimensions(),
            camera.width,
            camera.height
        )));
    }
    if mesh.normals.len() != mesh.positions.len() || mesh.colors.len() != mesh.positions.len() {
        return Err(Error::param("mesh attribute lengths differ"));
    }
    if mesh.triangles.is_empty() {
        log::warn!("empty mesh; output is the background");
        return Ok(background.clone());
    }
    let prepared = prepare(mesh, pose, camera);
    let mut out = background.clone();
    let width = camera.width as usize;
    let row_bytes = width * 3;
    let buf: &mut [u8] = &mut out;
    buf.par_chunks_mut(row_bytes * BAND_ROWS)
        .enumerate()
        .for_each(|(band, chunk)| {
            let y0 = (band * BAND_ROWS) as i64;
            let rows = chunk.len() / row_bytes;
            let y1 = y0 + rows as i64;
            let mut frags: Vec<Option<Fragment>> = vec![None; rows * width];
            for (ti, tri) in prepared.tris.iter().enumerate() {
                if tri.bbox[3] < y0 || tri.bbox[1] >= y1 {
                    continue;
                }
                scan(tri, y0, y1, |x, y, w| {
                    let inv = w[0] * tri.inv_z[0] + w[1] * tri.inv_z[1] + w[2] * tri.inv_z[2];
                    let depth = 1.0 / inv;
                    let slot = &mut frags[(y - y0) as usize * width + x as usize];
                    if slot.is_none_or(|f| depth < f.depth) {
                        *slot = Some(Fragment {
                            depth,
                            tri: ti,
                            weights: w,
                        });
                    }
                });
            }
            for (i, frag) in frags.iter().enumerate() {
                let Some(frag) = frag else { continue };
                let tri = &prepared.tris[frag.tri];
                // perspective-correct weights
                let pw = [0, 1, 2].map(|k| frag.weights[k] * tri.inv_z[k] * frag.depth);
                let mut color = Vec3::zeros();
                let mut normal = Vec3::zeros();
                for (&a, &w) in tri.attrs.iter().zip(&pw) {
                    color += prepared.colors[a] * w;
                    normal += prepared.normals[a] * w;
                }
                let len = normal.norm();
                let normal = if len > 0.0 { normal / len } else { Vec3::z() };
                let rgb = shade(&color, irradiance(sh, &normal));
                for c in 0..3 {
                    chunk[i * 3 + c] = linear_to_srgb8(rgb[c]);
                }
            }
        });
    Ok(out)
}

/// How many triangles cover each pixel, ignoring depth. Row-major.
pub fn overdraw(mesh: &Mesh, pose: &PoseParams, camera: &Camera) -> Vec<u32> {
    let prepared = prepare(mesh, pose, camera);
    let width = camera.width as usize;
    let mut counts = vec![0u32; width * camera.height as usize];
    for tri in &prepared.tris {
        scan(tri, 0, i64::from(camera.height), |x, y, _| {
            counts[y as usize * width + x as usize] += 1;
        });
    }
    counts
}
