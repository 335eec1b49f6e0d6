//! Exercises the evaluation harness with synthetic predictors on a planned
//! (unrendered) full-scale manifest: an oracle, uniform guessing, and a
//! predictor that only knows poses within ±45°.
//!
//!     cargo run --release --example constructed_predictors

use facegen::dataset::{plan_dataset, ExperimentConfig};
use facegen::eval::{evaluate, Axis, Prediction};
use facegen::protocol::BiasProtocol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> facegen::Result<()> {
    let config = ExperimentConfig::new(BiasProtocol::full_yaw());
    let rows = plan_dataset(&config, None)?.test_records();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut predict = |knows: &dyn Fn(f64) -> bool| -> Vec<Prediction> {
        rows.iter()
            .map(|r| Prediction {
                image_path: r.image_path.clone(),
                predicted_identity_id: if knows(r.yaw_deg) {
                    r.identity_id
                } else {
                    rng.random_range(0..config.identities)
                },
            })
            .collect()
    };
    let cases: [(&str, Vec<Prediction>); 3] = [
        ("oracle", predict(&|_| true)),
        ("uniform guess", predict(&|_| false)),
        ("|yaw| <= 45 only", predict(&|y| y.abs() <= 45.0)),
    ];
    for (name, preds) in cases {
        let report = evaluate(&rows, &preds, Axis::Yaw)?;
        let curve: Vec<String> = report
            .per_bin
            .iter()
            .step_by(4)
            .map(|b| format!("{:.2}", b.rate()))
            .collect();
        println!(
            "{name:<18} TRR {:.4} over {} rows; every 4th bin: {}",
            report.total_recognition_rate,
            report.total,
            curve.join(" ")
        );
    }
    Ok(())
}
