//! Fits the nearest-class-mean baseline on a generated dataset, predicts
//! its test split and decomposes the recognition rate along one nuisance.
//!
//!     cargo run --release --example baseline_eval -- <dataset_dir> [yaw|light]

use std::path::PathBuf;

use facegen::classifier::{fit_manifest, predict_manifest, FeatureSpec};
use facegen::dataset::{Manifest, MANIFEST_FILE};
use facegen::eval::{evaluate, render_report, save_predictions, Axis};
use facegen::protocol::Split;

fn main() -> facegen::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| "data/pose_range".into());
    let axis = match args.next().as_deref() {
        Some("light") => Axis::Light,
        _ => Axis::Yaw,
    };
    let manifest = Manifest::read_csv(root.join(MANIFEST_FILE))?;
    let model = fit_manifest(&manifest, &root, FeatureSpec::default())?;
    let preds = predict_manifest(&model, &manifest, &root, Split::Test)?;
    save_predictions(root.join("predictions.csv"), &preds)?;

    let report = evaluate(&manifest.test_records(), &preds, axis)?;
    println!(
        "TRR {:.4} over {} test images",
        report.total_recognition_rate, report.total
    );
    for bin in &report.per_bin {
        let bar = "#".repeat((bin.rate() * 40.0).round() as usize);
        println!("{:>9.4} {:>6.4} {bar}", bin.center_deg, bin.rate());
    }
    let [csv, svg] = render_report(&report, &root.join("reports"), "baseline")?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
