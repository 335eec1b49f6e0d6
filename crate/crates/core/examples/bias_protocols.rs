//! Plans every sample configuration under `examples/configs` without
//! rendering, and audits the train split against its protocol and the test
//! split against the full grid.
//!
//!     cargo run --release --example bias_protocols

use std::collections::BTreeMap;
use std::path::Path;

use facegen::dataset::{audit_test_coverage, audit_train, plan_dataset, ExperimentConfig};
use facegen::protocol::Split;

fn main() -> facegen::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| facegen::Error::Io {
            path: dir.clone(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    for path in paths {
        let config = ExperimentConfig::from_file(&path)?;
        let manifest = plan_dataset(&config, None)?;
        let mut yaw_hist: BTreeMap<i64, usize> = BTreeMap::new();
        for r in manifest.split(Split::Train) {
            *yaw_hist.entry(r.yaw_deg.round() as i64).or_default() += 1;
        }
        println!(
            "{:<24} train {:>6} rows, test {:>6} rows, out-of-protocol {}, coverage problems {}",
            config.name,
            manifest.split(Split::Train).count(),
            manifest.split(Split::Test).count(),
            audit_train(&manifest, &config).len(),
            audit_test_coverage(&manifest, &config).len()
        );
        let spread: Vec<String> = yaw_hist
            .iter()
            .take(12)
            .map(|(k, n)| format!("{k:+}:{n}"))
            .collect();
        println!(
            "    train rows per whole-degree yaw (first 12): {}",
            spread.join(" ")
        );
    }
    Ok(())
}
