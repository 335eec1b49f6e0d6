//! Renders a dataset from a TOML config.
//!
//!     cargo run --release --example generate_dataset -- [config.toml] [out_dir]

use std::path::PathBuf;

use facegen::dataset::{generate_dataset_to, ExperimentConfig};
use facegen::protocol::Split;

fn main() -> facegen::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let config_path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/pose_range.toml")
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| "data/pose_range".into());
    let config = ExperimentConfig::from_file(&config_path)?;
    let start = std::time::Instant::now();
    let manifest = generate_dataset_to(&config, &out)?;
    println!(
        "{}: {} train + {} test images in {:.1}s under {}",
        config.name,
        manifest.split(Split::Train).count(),
        manifest.split(Split::Test).count(),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}
