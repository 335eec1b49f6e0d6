//! Builds the procedural morphable model, samples a few faces and writes
//! the model to a container file that `ModelSource::File` can load.
//!
//!     cargo run --release --example toy_model -- [out.pfig]

use facegen::container::{load_model, save_model};
use facegen::model::{
    build_toy_model, instantiate_mesh, sample_identity, IdentityParams, ToyModelSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> facegen::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "toy_model.pfig".into());
    let spec = ToyModelSpec::default();
    let model = build_toy_model(&spec, &mut ChaCha8Rng::seed_from_u64(1))?;
    println!(
        "{} vertices, {} triangles, ranks shape/color/expression = {}/{}/{}",
        model.n_vertices(),
        model.triangles().len(),
        model.k_shape(),
        model.k_color(),
        model.k_expr()
    );
    println!("leading shape sigmas: {:?}", &model.shape().sigma()[..4]);

    let mean = instantiate_mesh(&model, &IdentityParams::zeros(&model))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..3 {
        let face = instantiate_mesh(&model, &sample_identity(&model, &mut rng))?;
        let rms = (face
            .positions
            .iter()
            .zip(&mean.positions)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            / face.positions.len() as f64)
            .sqrt();
        println!("face {i}: rms vertex offset from the mean face {rms:.2} mm");
    }

    save_model(&model, &out)?;
    let reloaded = load_model(&out)?;
    assert_eq!(reloaded, model);
    println!(
        "wrote and re-read {out} ({} bytes)",
        std::fs::metadata(&out).map_or(0, |m| m.len())
    );
    Ok(())
}
