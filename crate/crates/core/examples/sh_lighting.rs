//! Spherical-harmonics lighting: prints the nine coefficients of a light
//! sweep and renders the irradiance on a unit sphere for each azimuth.
//!
//!     cargo run --release --example sh_lighting -- [out.png]

use facegen::illumination::{directed_to_sh, irradiance, DirectedLight};
use facegen::raster::{linear_to_srgb8, Image};
use facegen::Vec3;

const CELL: u32 = 96;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "sh_spheres.png".into());
    let azimuths = [-90.0, -45.0, 0.0, 45.0, 90.0f64];
    let mut sheet = Image::new(CELL * azimuths.len() as u32, CELL);
    for (k, az) in azimuths.iter().enumerate() {
        let light = DirectedLight::new(az.to_radians(), 55f64.to_radians());
        let sh = directed_to_sh(&light);
        let red: Vec<String> = sh.coeffs[0].iter().map(|c| format!("{c:+.3}")).collect();
        println!("azimuth {az:+5.1}: {}", red.join(" "));
        for y in 0..CELL {
            for x in 0..CELL {
                let u = (f64::from(x) + 0.5) / f64::from(CELL) * 2.0 - 1.0;
                let v = 1.0 - (f64::from(y) + 0.5) / f64::from(CELL) * 2.0;
                let r2 = u * u + v * v;
                if r2 > 1.0 {
                    continue;
                }
                // orthographic view of a sphere facing +z
                let n = Vec3::new(u, v, (1.0 - r2).sqrt());
                let e = irradiance(&sh, &n);
                let px = e.map(|c| linear_to_srgb8(0.6 * c / std::f64::consts::PI));
                sheet.put_pixel(k as u32 * CELL + x, y, image::Rgb(px));
            }
        }
    }
    sheet.save(&out)?;
    println!("wrote {out}");
    Ok(())
}
