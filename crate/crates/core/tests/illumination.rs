mod common;

use std::f64::consts::PI;

use facegen::illumination::{
    directed_to_sh, irradiance, irradiance_unclamped, sh_basis_unchecked, DirectedLight,
    SHIllumination, SH_COEFFS,
};
use facegen::Vec3;
use rand::Rng;

use common::*;

#[test]
fn basis_is_orthonormal_under_quadrature() {
    let (points, w) = sphere_grid(100, 200);
    for i in 0..SH_COEFFS {
        for j in 0..SH_COEFFS {
            let v: f64 = points
                .iter()
                .map(|p| {
                    let y = sh_basis_unchecked(p);
                    w * y[i] * y[j]
                })
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((v - target).abs() < 1e-3, "<Y{i},Y{j}> = {v}");
        }
    }
}

#[test]
fn constant_environment_is_uniform() {
    let mut light = DirectedLight::new(0.3, 1.0);
    light.intensity = [0.0; 3];
    light.ambient = [1.0; 3];
    let sh = directed_to_sh(&light);
    let mut r = rng(1);
    let e0 = irradiance(&sh, &Vec3::y());
    // a radiance-1 environment gives E = π everywhere
    assert!((e0[0] - PI).abs() < 1e-9);
    for _ in 0..100 {
        let e = irradiance(&sh, &random_unit(&mut r));
        assert!((e[1] / e0[1] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn irradiance_peaks_facing_the_light() {
    let light = DirectedLight::new(0.7, 0.9);
    let sh = directed_to_sh(&light);
    let d = light.direction();
    let peak = irradiance(&sh, &d)[0];
    let (grid, _) = sphere_grid(25, 40);
    assert_eq!(grid.len(), 1000);
    for n in &grid {
        assert!(irradiance(&sh, n)[0] <= peak + 1e-12);
    }
}

/// Brute-force irradiance for a von Mises-Fisher lobe of total power
/// `power` around `d` plus a uniform ambient radiance. The lobe is
/// integrated in its own polar coordinates, where the density is uniform
/// in `u` under `w = 1 + ln(u + (1 - u)e^(-2κ))/κ`.
fn vmf_irradiance(n: &Vec3, d: &Vec3, kappa: f64, power: f64, ambient: f64) -> f64 {
    let (nu, nphi) = (2000, 256);
    let t1 = if d.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let t1 = (t1 - d * d.dot(&t1)).normalize();
    let t2 = d.cross(&t1);
    let mut acc = 0.0;
    for i in 0..nu {
        let u = (i as f64 + 0.5) / nu as f64;
        let w = 1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa;
        let s = (1.0 - w * w).max(0.0).sqrt();
        for j in 0..nphi {
            let phi = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
            let omega = d * w + t1 * (s * phi.cos()) + t2 * (s * phi.sin());
            acc += n.dot(&omega).max(0.0);
        }
    }
    power * acc / (nu * nphi) as f64 + PI * ambient
}

#[test]
fn three_bands_approximate_a_narrow_lobe() {
    let kappa = 400.0;
    let mut r = rng(3);
    for _ in 0..6 {
        let light = DirectedLight::new(r.random_range(-PI..PI), r.random_range(0.2..2.9));
        let d = light.direction();
        let mut delta = light;
        delta.ambient = [0.0; 3];
        let sh_delta = directed_to_sh(&delta);
        let sh_full = directed_to_sh(&light);
        for _ in 0..40 {
            let n = random_unit(&mut r);
            // lobe alone, away from the terminator
            if n.dot(&d) >= 0.5 {
                let truth = vmf_irradiance(&n, &d, kappa, light.intensity[0], 0.0);
                let approx = irradiance(&sh_delta, &n)[0];
                assert!(
                    (approx - truth).abs() / truth <= 0.10,
                    "delta: {approx} vs {truth}"
                );
            }
            // the generator's lighting, any normal
            let truth = vmf_irradiance(&n, &d, kappa, light.intensity[0], light.ambient[0]);
            let approx = irradiance(&sh_full, &n)[0];
            assert!(
                (approx - truth).abs() / truth <= 0.10,
                "full: {approx} vs {truth}"
            );
        }
    }
}

#[test]
fn unclamped_irradiance_is_linear_in_coefficients() {
    let a = directed_to_sh(&DirectedLight::new(0.4, 1.1));
    let b = directed_to_sh(&DirectedLight::new(-2.0, 0.3));
    let n = Vec3::new(0.2, -0.5, 0.8).normalize();
    let lhs = irradiance_unclamped(&a.scaled(2.0).add(&b), &n);
    let (ea, eb) = (irradiance_unclamped(&a, &n), irradiance_unclamped(&b, &n));
    for c in 0..3 {
        assert!((lhs[c] - (2.0 * ea[c] + eb[c])).abs() < 1e-12);
    }
    assert_eq!(irradiance_unclamped(&SHIllumination::zero(), &n), [0.0; 3]);
}
