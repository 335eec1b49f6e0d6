//! Disentanglement bias end to end at a small scale: half of the identities
//! are seen only facing one way, the other half only the other way. The
//! baseline is then scored separately on each half.
//!
//!     cargo run --release --example disentanglement -- [out_dir]

use std::path::PathBuf;

use facegen::classifier::{fit_manifest, predict_manifest, FeatureSpec};
use facegen::dataset::{generate_dataset_to, ExperimentConfig};
use facegen::eval::{evaluate_subsets, render_report, Axis};
use facegen::protocol::{AngleRange, BiasProtocol, Split, YAW_STEP_DEG};

fn main() -> facegen::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| "data/disentanglement_small".into());
    let mut config = ExperimentConfig::new(BiasProtocol::DisentanglementSplit {
        left: AngleRange::new(-90.0, 0.0, YAW_STEP_DEG),
        right: AngleRange::new(0.0, 90.0, YAW_STEP_DEG),
    });
    config.name = "disentanglement_small".into();
    config.image_size = 96;
    config.identities = 8;
    config.backgrounds = 3;

    let manifest = generate_dataset_to(&config, &out)?;
    let model = fit_manifest(&manifest, &out, FeatureSpec::default())?;
    let preds = predict_manifest(&model, &manifest, &out, Split::Test)?;
    let subsets = config
        .subsets()
        .expect("disentanglement config has subsets");
    for report in evaluate_subsets(&manifest.test_records(), &preds, &subsets, Axis::Yaw)? {
        let trained = if report.label == "left" {
            "yaw <= 0"
        } else {
            "yaw >= 0"
        };
        let neg = report.mean_rate_where(|y| y < 0.0).unwrap_or(f64::NAN);
        let pos = report.mean_rate_where(|y| y > 0.0).unwrap_or(f64::NAN);
        println!(
            "{:<5} (trained on {trained}): TRR {:.4}, mean rate yaw<0 {neg:.4}, yaw>0 {pos:.4}",
            report.label, report.total_recognition_rate
        );
        render_report(
            &report,
            &out.join("reports"),
            &format!("subset_{}", report.label),
        )?;
    }
    Ok(())
}
