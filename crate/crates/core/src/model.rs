//! PCA morphable face model: shape, per-vertex color and expression.
//!
//! A face is `mean + basis · diag(sigma) · alpha` where `alpha` holds
//! standard-normal coefficients. Basis columns are stored column-major in
//! 32-bit floats (the on-disk precision, see [`crate::container`]); all
//! synthesis arithmetic runs in `f64`.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, Vec3};

const UNIT_NORM_TOL: f64 = 1e-6;

/// One linear PCA subspace: `rank` columns of length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    dim: usize,
    columns: Vec<f32>,
    sigma: Vec<f32>,
}

impl PcaBasis {
    /// `columns` is column-major: column `k` occupies `k*dim..(k+1)*dim`.
    pub fn new(dim: usize, columns: Vec<f32>, sigma: Vec<f32>) -> Result<Self> {
        if columns.len() != dim * sigma.len() {
            return Err(Error::param(format!(
                "basis has {} values, expected {} x {}",
                columns.len(),
                dim,
                sigma.len()
            )));
        }
        let basis = PcaBasis {
            dim,
            columns,
            sigma,
        };
        basis.validate()?;
        Ok(basis)
    }

    pub fn empty(dim: usize) -> Self {
        PcaBasis {
            dim,
            columns: Vec::new(),
            sigma: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (k, pair) in self.sigma.windows(2).enumerate() {
            if pair[1] > pair[0] {
                return Err(Error::param(format!(
                    "sigma not sorted non-increasing at index {}",
                    k + 1
                )));
            }
        }
        if let Some(s) = self.sigma.iter().find(|s| !(**s >= 0.0)) {
            return Err(Error::param(format!("negative or NaN sigma {s}")));
        }
        for k in 0..self.rank() {
            let norm = self
                .column(k)
                .iter()
                .map(|&v| f64::from(v).powi(2))
                .sum::<f64>()
                .sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::param(format!(
                    "basis column {k} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f32] {
        &self.sigma
    }

    pub fn columns(&self) -> &[f32] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &[f32] {
        &self.columns[k * self.dim..(k + 1) * self.dim]
    }

    /// `out += basis · diag(sigma) · coeffs`
    fn accumulate(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.rank());
        for (k, &alpha) in coeffs.iter().enumerate() {
            let scale = f64::from(self.sigma[k]) * alpha;
            if scale == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.column(k)) {
                *o += scale * f64::from(b);
            }
        }
    }
}

/// The statistical face prior.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphableModel {
    shape_mean: Vec<f32>,
    shape: PcaBasis,
    color_mean: Vec<f32>,
    color: PcaBasis,
    expr: PcaBasis,
    triangles: Vec<[u32; 3]>,
}

impl MorphableModel {
    pub fn new(
        shape_mean: Vec<f32>,
        shape: PcaBasis,
        color_mean: Vec<f32>,
        color: PcaBasis,
        expr: PcaBasis,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self> {
        if !shape_mean.len().is_multiple_of(3) {
            return Err(Error::param("shape mean length is not a multiple of 3"));
        }
        let dim = shape_mean.len();
        let n = dim / 3;
        for (name, got) in [
            ("color mean", color_mean.len()),
            ("shape basis", shape.dim),
            ("color basis", color.dim),
            ("expression basis", expr.dim),
        ] {
            if got != dim {
                return Err(Error::param(format!(
                    "{name} has dimension {got}, expected {dim}"
                )));
            }
        }
        if let Some(t) = triangles
            .iter()
            .find(|t| t.iter().any(|&i| i as usize >= n))
        {
            return Err(Error::param(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        Ok(MorphableModel {
            shape_mean,
            shape,
            color_mean,
            color,
            expr,
            triangles,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.shape_mean.len() / 3
    }

    pub fn shape_mean(&self) -> &[f32] {
        &self.shape_mean
    }

    pub fn color_mean(&self) -> &[f32] {
        &self.color_mean
    }

    pub fn shape(&self) -> &PcaBasis {
        &self.shape
    }

    pub fn color(&self) -> &PcaBasis {
        &self.color
    }

    pub fn expression(&self) -> &PcaBasis {
        &self.expr
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn k_shape(&self) -> usize {
        self.shape.rank()
    }

    pub fn k_color(&self) -> usize {
        self.color.rank()
    }

    pub fn k_expr(&self) -> usize {
        self.expr.rank()
    }
}

/// Standard-normal coefficients of one face.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityParams {
    pub alpha_shape: Vec<f64>,
    pub alpha_color: Vec<f64>,
    pub alpha_expr: Vec<f64>,
}

impl IdentityParams {
    /// The mean face.
    pub fn zeros(model: &MorphableModel) -> Self {
        IdentityParams {
            alpha_shape: vec![0.0; model.k_shape()],
            alpha_color: vec![0.0; model.k_color()],
            alpha_expr: vec![0.0; model.k_expr()],
        }
    }
}

/// Draws shape and color coefficients i.i.d. from N(0, 1), untruncated.
/// Expression stays neutral.
pub fn sample_identity<R: Rng + ?Sized>(model: &MorphableModel, rng: &mut R) -> IdentityParams {
    sample_identity_with(model, || StandardNormal.sample(rng))
}

/// Like [`sample_identity`] with an arbitrary scalar source; shape
/// coefficients are drawn first, then color.
pub fn sample_identity_with(
    model: &MorphableModel,
    mut draw: impl FnMut() -> f64,
) -> IdentityParams {
    let alpha_shape = (0..model.k_shape()).map(|_| draw()).collect();
    let alpha_color = (0..model.k_color()).map(|_| draw()).collect();
    IdentityParams {
        alpha_shape,
        alpha_color,
        alpha_expr: vec![0.0; model.k_expr()],
    }
}

/// Triangle mesh with per-vertex linear-RGB albedo and unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub positions: Vec<Vec3>,
    pub colors: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Recomputes normals as the normalized area-weighted sum of adjacent
    /// face normals. Returns the vertices referenced by no non-degenerate
    /// triangle; those get `+z`.
    pub fn recompute_normals(&mut self) -> Vec<usize> {
        let mut acc = vec![Vec3::zeros(); self.positions.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.positions[i as usize]);
            // |cross| is twice the triangle area
            let n = (b - a).cross(&(c - a));
            for &i in t {
                acc[i as usize] += n;
            }
        }
        let mut orphans = Vec::new();
        self.normals = acc
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                let len = n.norm();
                if len > 0.0 && len.is_finite() {
                    n / len
                } else {
                    orphans.push(i);
                    Vec3::z()
                }
            })
            .collect();
        if !orphans.is_empty() {
            log::warn!(
                "{} vertices have no adjacent triangle area; normal set to +z",
                orphans.len()
            );
        }
        orphans
    }
}

pub fn compute_vertex_normals(mut mesh: Mesh) -> Mesh {
    mesh.recompute_normals();
    mesh
}

fn to_vec3s(flat: &[f64]) -> Vec<Vec3> {
    flat.chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect()
}

/// Shape and expression displacement only; no color clamping or normals.
pub fn synthesize_positions(model: &MorphableModel, params: &IdentityParams) -> Result<Vec<Vec3>> {
    check_dims(model, params)?;
    let mut pos: Vec<f64> = model.shape_mean.iter().map(|&v| f64::from(v)).collect();
    model.shape.accumulate(&params.alpha_shape, &mut pos);
    model.expr.accumulate(&params.alpha_expr, &mut pos);
    Ok(to_vec3s(&pos))
}

fn check_dims(model: &MorphableModel, params: &IdentityParams) -> Result<()> {
    for (name, got, want) in [
        ("shape", params.alpha_shape.len(), model.k_shape()),
        ("color", params.alpha_color.len(), model.k_color()),
        ("expression", params.alpha_expr.len(), model.k_expr()),
    ] {
        if got != want {
            return Err(Error::param(format!(
                "{name} coefficients: got {got}, model has {want}"
            )));
        }
    }
    Ok(())
}

pub fn instantiate_mesh(model: &MorphableModel, params: &IdentityParams) -> Result<Mesh> {
    let positions = synthesize_positions(model, params)?;
    let mut col: Vec<f64> = model.color_mean.iter().map(|&v| f64::from(v)).collect();
    model.color.accumulate(&params.alpha_color, &mut col);
    let colors = to_vec3s(&col)
        .into_iter()
        .map(|c| c.map(|v| v.clamp(0.0, 1.0)))
        .collect();
    let mut mesh = Mesh {
        positions,
        colors,
        normals: Vec::new(),
        triangles: model.triangles.clone(),
    };
    mesh.recompute_normals();
    Ok(mesh)
}

/// Unit icosphere: subdivided icosahedron with outward counter-clockwise
/// winding. The vertex set is closed under `x -> -x` exactly.
pub fn icosphere(subdivisions: u32) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut tris: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (verts[a as usize] + verts[b as usize]) * 0.5;
                verts.push(m.normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (verts, tris)
}

/// Parameters of the procedural stand-in model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyModelSpec {
    pub subdivisions: u32,
    pub k_shape: usize,
    pub k_color: usize,
    pub k_expr: usize,
}

impl Default for ToyModelSpec {
    fn default() -> Self {
        ToyModelSpec {
            subdivisions: 4,
            k_shape: 199,
            k_color: 199,
            k_expr: 100,
        }
    }
}

/// Head semi-axes in millimeters (x: width, y: height, z: depth).
const HEAD_AXES: [f64; 3] = [75.0, 100.0, 88.0];

/// Builds a license-free stand-in for a scan-based model: an ellipsoidal
/// head with facial relief and coloring, and random smooth orthonormal
/// bases with geometrically decaying deviations. The mean face is exactly
/// bilaterally symmetric.
pub fn build_toy_model<R: Rng + ?Sized>(
    spec: &ToyModelSpec,
    rng: &mut R,
) -> Result<MorphableModel> {
    if spec.k_shape == 0 || spec.k_color == 0 || spec.k_expr == 0 {
        return Err(Error::param("toy model ranks must be at least 1"));
    }
    if spec.subdivisions > 7 {
        return Err(Error::param("at most 7 icosphere subdivisions"));
    }
    let (dirs, triangles) = icosphere(spec.subdivisions);
    let dim = dirs.len() * 3;
    if let Some(k) = [spec.k_shape, spec.k_color, spec.k_expr]
        .into_iter()
        .find(|&k| k > dim)
    {
        return Err(Error::param(format!(
            "rank {k} exceeds 3N = {dim} for {} subdivisions",
            spec.subdivisions
        )));
    }

    let mut shape_mean = Vec::with_capacity(dim);
    let mut color_mean = Vec::with_capacity(dim);
    for d in &dirs {
        let p = face_surface(d);
        shape_mean.extend(p.iter().map(|&v| v as f32));
        color_mean.extend(face_albedo(d).iter().map(|&v| v as f32));
    }

    let rms = |per_coord: f64| per_coord * (dim as f64).sqrt();
    let shape = smooth_basis(&dirs, spec.k_shape, rms(2.5), 0.95, rng)?;
    let color = smooth_basis(&dirs, spec.k_color, rms(0.07), 0.95, rng)?;
    let expr = smooth_basis(&dirs, spec.k_expr, rms(1.5), 0.95, rng)?;
    MorphableModel::new(shape_mean, shape, color_mean, color, expr, triangles)
}

fn bump(d: &Vec3, cx: f64, cy: f64, rx: f64, ry: f64) -> f64 {
    if d.z <= 0.0 {
        return 0.0;
    }
    let u = (d.x - cx) / rx;
    let v = (d.y - cy) / ry;
    (-0.5 * (u * u + v * v)).exp()
}

/// Mean head surface for a unit direction; symmetric in `x`.
fn face_surface(d: &Vec3) -> Vec3 {
    let ax = d.x.abs();
    let mut r = Vec3::new(d.x * HEAD_AXES[0], d.y * HEAD_AXES[1], d.z * HEAD_AXES[2]);
    let nose = 22.0 * bump(d, 0.0, -0.05, 0.08, 0.16);
    let brow = 6.0 * bump(&Vec3::new(ax, d.y, d.z), 0.32, 0.36, 0.2, 0.06);
    let sockets = -7.0 * bump(&Vec3::new(ax, d.y, d.z), 0.32, 0.22, 0.1, 0.07);
    let chin = 5.0 * bump(d, 0.0, -0.72, 0.2, 0.1);
    let outward = nose + brow + sockets + chin;
    r += d * outward;
    r
}

/// Mean linear-RGB albedo for a unit direction; symmetric in `x`.
fn face_albedo(d: &Vec3) -> Vec3 {
    let ax = d.x.abs();
    let sym = Vec3::new(ax, d.y, d.z);
    let skin = Vec3::new(0.62, 0.42, 0.33);
    let hair = Vec3::new(0.09, 0.06, 0.045);
    let eye = Vec3::new(0.05, 0.04, 0.04);
    let lips = Vec3::new(0.55, 0.2, 0.2);
    let brow_col = Vec3::new(0.12, 0.08, 0.06);

    let mut c = skin;
    // hairline: crown and back of the head
    let hair_w = smoothstep(0.45, 0.6, d.y + 0.35 * (-d.z).max(0.0));
    c = c.lerp(&hair, hair_w);
    c = c.lerp(&eye, bump(&sym, 0.32, 0.22, 0.07, 0.04));
    c = c.lerp(&brow_col, 0.9 * bump(&sym, 0.32, 0.36, 0.12, 0.03));
    c = c.lerp(&lips, 0.9 * bump(d, 0.0, -0.45, 0.16, 0.045));
    c
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Random low-frequency vector fields over the sphere, orthonormalized by
/// modified Gram-Schmidt with one re-orthogonalization pass.
fn smooth_basis<R: Rng + ?Sized>(
    dirs: &[Vec3],
    rank: usize,
    sigma0: f64,
    decay: f64,
    rng: &mut R,
) -> Result<PcaBasis> {
    const WAVES: usize = 6;
    const MAX_ATTEMPTS: usize = 32;
    let dim = dirs.len() * 3;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(rank);
    for k in 0..rank {
        let mut accepted = false;
        for attempt in 0..MAX_ATTEMPTS {
            // frequency band widens with the column index and on retries
            let max_freq = 2.5 + 0.06 * k as f64 + 0.5 * attempt as f64;
            let mut v = vec![0.0; dim];
            for axis in 0..3 {
                for _ in 0..WAVES {
                    let w = random_unit(rng);
                    let freq = rng.random_range(0.5..max_freq);
                    let phase = rng.random_range(0.0..std::f64::consts::TAU);
                    let amp: f64 = StandardNormal.sample(rng);
                    for (i, d) in dirs.iter().enumerate() {
                        v[3 * i + axis] += amp * (freq * w.dot(d) + phase).sin();
                    }
                }
            }
            let before = norm(&v);
            for _ in 0..2 {
                for c in &cols {
                    let proj = dot(&v, c);
                    v.iter_mut().zip(c).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let after = norm(&v);
            if before > 0.0 && after > 1e-6 * before {
                v.iter_mut().for_each(|x| *x /= after);
                cols.push(v);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::param(format!(
                "could not find {rank} independent smooth basis fields"
            )));
        }
    }
    let columns = cols.iter().flatten().map(|&v| v as f32).collect();
    let sigma = (0..rank)
        .map(|k| (sigma0 * decay.powi(k as i32)) as f32)
        .collect();
    PcaBasis::new(dim, columns, sigma)
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_model(seed: u64) -> MorphableModel {
        let spec = ToyModelSpec {
            subdivisions: 2,
            k_shape: 5,
            k_color: 4,
            k_expr: 3,
        };
        build_toy_model(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn reference_ranks_give_reference_lengths() {
        let spec = ToyModelSpec {
            subdivisions: 3,
            ..ToyModelSpec::default()
        };
        let model = build_toy_model(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let id = sample_identity(&model, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(id.alpha_shape.len(), 199);
        assert_eq!(id.alpha_color.len(), 199);
        assert_eq!(id.alpha_expr.len(), 100);
        assert!(id.alpha_expr.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn zero_source_gives_mean_face() {
        let model = small_model(3);
        let id = sample_identity_with(&model, || 0.0);
        assert_eq!(id, IdentityParams::zeros(&model));
        let mesh = instantiate_mesh(&model, &id).unwrap();
        for (p, m) in mesh.positions.iter().zip(model.shape_mean().chunks(3)) {
            assert_eq!(p.x, f64::from(m[0]));
            assert_eq!(p.y, f64::from(m[1]));
            assert_eq!(p.z, f64::from(m[2]));
        }
    }

    #[test]
    fn normal_sampler_moments() {
        let model = small_model(4);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| sample_identity(&model, &mut rng).alpha_shape[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn first_unit_coefficient_adds_scaled_first_column() {
        let model = small_model(5);
        let mut id = IdentityParams::zeros(&model);
        id.alpha_shape[0] = 1.0;
        let mesh = instantiate_mesh(&model, &id).unwrap();
        let s0 = f64::from(model.shape().sigma()[0]);
        let col = model.shape().column(0);
        for (i, p) in mesh.positions.iter().enumerate() {
            for a in 0..3 {
                let delta = p[a] - f64::from(model.shape_mean()[3 * i + a]);
                assert!((delta - s0 * f64::from(col[3 * i + a])).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn different_coefficients_differ() {
        let model = small_model(6);
        let a = IdentityParams::zeros(&model);
        let mut b = a.clone();
        b.alpha_shape[0] = 0.5;
        let ma = instantiate_mesh(&model, &a).unwrap();
        let mb = instantiate_mesh(&model, &b).unwrap();
        assert!(ma.positions.iter().zip(&mb.positions).any(|(p, q)| p != q));
    }

    #[test]
    fn dimension_mismatch_is_parameter_error() {
        let model = small_model(7);
        let mut id = IdentityParams::zeros(&model);
        id.alpha_color.push(0.0);
        assert!(matches!(
            instantiate_mesh(&model, &id),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn toy_basis_is_orthonormal_and_sigma_decreasing() {
        let model = small_model(8);
        for basis in [model.shape(), model.color(), model.expression()] {
            for i in 0..basis.rank() {
                for j in 0..basis.rank() {
                    let d: f64 = basis
                        .column(i)
                        .iter()
                        .zip(basis.column(j))
                        .map(|(&a, &b)| f64::from(a) * f64::from(b))
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-6, "({i},{j}) = {d}");
                }
            }
            assert!(basis.sigma().windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn toy_model_is_deterministic() {
        assert_eq!(small_model(11), small_model(11));
        assert_ne!(small_model(11), small_model(12));
    }

    #[test]
    fn toy_rank_above_3n_is_rejected() {
        let spec = ToyModelSpec {
            subdivisions: 0,
            k_shape: 37,
            k_color: 1,
            k_expr: 1,
        };
        let err = build_toy_model(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn toy_mean_is_mirror_symmetric() {
        let model = small_model(13);
        let mean = model.shape_mean();
        let verts: Vec<[f32; 3]> = mean.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        for v in &verts {
            let mirrored = [-v[0], v[1], v[2]];
            assert!(verts.contains(&mirrored), "{v:?} has no mirror image");
        }
    }

    #[test]
    fn invalid_model_rejected() {
        let bad = PcaBasis::new(3, vec![2.0, 0.0, 0.0], vec![1.0]);
        assert!(bad.is_err());
        let unsorted = PcaBasis::new(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0], vec![1.0, 2.0]);
        assert!(unsorted.is_err());
        let basis = PcaBasis::empty(3);
        let out_of_range = MorphableModel::new(
            vec![0.0; 3],
            basis.clone(),
            vec![0.0; 3],
            basis.clone(),
            basis,
            vec![[0, 1, 2]],
        );
        assert!(out_of_range.is_err());
    }

    #[test]
    fn cube_corner_normal_is_diagonal() {
        // unit cube; every face is split along the diagonal through (1,1,1)
        // so the corner gets equal area from its three faces
        let p = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
        let positions = vec![
            p(0., 0., 0.),
            p(1., 0., 0.),
            p(0., 1., 0.),
            p(1., 1., 0.),
            p(0., 0., 1.),
            p(1., 0., 1.),
            p(0., 1., 1.),
            p(1., 1., 1.),
        ];
        let triangles = vec![
            // x = 1, outward +x
            [1, 3, 7],
            [1, 7, 5],
            // y = 1, outward +y
            [2, 6, 7],
            [2, 7, 3],
            // z = 1, outward +z
            [4, 5, 7],
            [4, 7, 6],
            // remaining faces, outward
            [0, 4, 6],
            [0, 6, 2],
            [0, 1, 5],
            [0, 5, 4],
            [0, 2, 3],
            [0, 3, 1],
        ];
        let mesh = compute_vertex_normals(Mesh {
            colors: vec![Vec3::zeros(); 8],
            normals: Vec::new(),
            positions,
            triangles,
        });
        let want = Vec3::new(1.0, 1.0, 1.0).normalize();
        assert!((mesh.normals[7] - want).norm() < 1e-12);
    }

    #[test]
    fn planar_fan_normals_point_up() {
        let mut positions = vec![Vec3::zeros()];
        let k = 8;
        for i in 0..k {
            let t = std::f64::consts::TAU * i as f64 / k as f64;
            positions.push(Vec3::new(t.cos(), t.sin(), 0.0));
        }
        let triangles = (0..k)
            .map(|i| [0, 1 + i, 1 + (i + 1) % k])
            .collect::<Vec<_>>();
        let mesh = compute_vertex_normals(Mesh {
            colors: vec![Vec3::zeros(); positions.len()],
            normals: Vec::new(),
            positions,
            triangles,
        });
        for n in &mesh.normals {
            assert!((n - Vec3::z()).norm() < 1e-12);
        }
    }

    #[test]
    fn icosphere_normals_are_radial() {
        let (positions, triangles) = icosphere(3);
        let mesh = compute_vertex_normals(Mesh {
            colors: vec![Vec3::zeros(); positions.len()],
            normals: Vec::new(),
            positions: positions.clone(),
            triangles,
        });
        let max_deg = mesh
            .normals
            .iter()
            .zip(&positions)
            .map(|(n, p)| n.dot(p).clamp(-1.0, 1.0).acos().to_degrees())
            .fold(0.0, f64::max);
        assert!(max_deg < 2.0, "max deviation {max_deg} deg");
        for n in &mesh.normals {
            assert!((n.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn orphan_vertex_gets_up_normal() {
        let mut mesh = Mesh {
            positions: vec![
                Vec3::zeros(),
                Vec3::x(),
                Vec3::y(),
                Vec3::new(5.0, 5.0, 5.0),
            ],
            colors: vec![Vec3::zeros(); 4],
            normals: Vec::new(),
            triangles: vec![[0, 2, 1]],
        };
        let orphans = mesh.recompute_normals();
        assert_eq!(orphans, vec![3]);
        assert_eq!(mesh.normals[3], Vec3::z());
        assert!((mesh.normals[0] + Vec3::z()).norm() < 1e-12);
    }
}
