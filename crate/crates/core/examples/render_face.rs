//! Renders one sampled identity over a yaw x light-azimuth contact sheet.
//!
//!     cargo run --release --example render_face -- [out.png] [identity_seed]

use facegen::background::{BackgroundSource, Backgrounds};
use facegen::camera::Camera;
use facegen::model::{build_toy_model, instantiate_mesh, sample_identity, ToyModelSpec};
use facegen::protocol::Split;
use facegen::raster::Image;
use facegen::render::{render_mesh, RenderSetup, SceneParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZE: u32 = 128;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "face_sheet.png".into());
    let identity_seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);

    let model = build_toy_model(&ToyModelSpec::default(), &mut ChaCha8Rng::seed_from_u64(1))?;
    let face = sample_identity(&model, &mut ChaCha8Rng::seed_from_u64(identity_seed));
    let mesh = instantiate_mesh(&model, &face)?;
    let backgrounds = Backgrounds::open(&BackgroundSource::Procedural { seed: 9 }, SIZE, SIZE)?;
    let setup = RenderSetup::new(Camera::default_for_size(SIZE, SIZE), backgrounds);

    let yaws = [-90.0, -45.0, 0.0, 45.0, 90.0];
    let lights = [-90.0, 0.0, 90.0];
    let mut sheet = Image::new(SIZE * yaws.len() as u32, SIZE * lights.len() as u32);
    for (row, &light) in lights.iter().enumerate() {
        for (col, &yaw) in yaws.iter().enumerate() {
            let scene = SceneParams {
                identity_id: 0,
                split: Split::Test,
                yaw_deg: yaw,
                light_azimuth_deg: light,
                light_inclination_deg: 55.0,
                background_id: (row * yaws.len() + col) as u32,
                seed: 0,
            };
            let img = render_mesh(&mesh, &scene, &setup)?;
            image::imageops::replace(
                &mut sheet,
                &img,
                i64::from(SIZE) * col as i64,
                i64::from(SIZE) * row as i64,
            );
        }
    }
    sheet.save(&out)?;
    println!("wrote {out}: columns yaw {yaws:?}, rows light azimuth {lights:?}");
    Ok(())
}
