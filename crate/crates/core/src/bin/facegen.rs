use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use facegen::classifier::{fit_manifest, predict_manifest, FeatureSpec};
use facegen::container::save_model;
use facegen::dataset::{generate_dataset_with_threads, ExperimentConfig, Manifest, SUBSETS_FILE};
use facegen::eval::{
    evaluate, evaluate_2d, evaluate_subsets, load_predictions, render_report, save_predictions,
    summary_csv, Axis, EvalReport, SubsetMap,
};
use facegen::model::{build_toy_model, ToyModelSpec};
use facegen::protocol::Split;

#[derive(Parser)]
#[command(
    name = "facegen",
    version,
    about = "Synthetic face datasets with controlled nuisance bias"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum By {
    Yaw,
    Light,
    YawLight,
}

#[derive(Subcommand)]
enum Command {
    /// Render a dataset and its manifest from a TOML experiment config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; output does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Score a prediction CSV against the test split of a manifest.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_enum, default_value = "yaw")]
        by: By,
        /// `protocol` reads subsets.json next to the manifest; anything else is a path.
        #[arg(long)]
        subsets: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the nearest-class-mean baseline on the train split and predict the test split.
    Baseline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 32)]
        feature_size: u32,
    },
    /// Write the procedural toy morphable model to a container file.
    ToyModel {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        subdivisions: u32,
    },
}

fn manifest_root(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn run(cli: Cli) -> facegen::Result<()> {
    match cli.command {
        Command::Generate {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let threads = threads
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let manifest = generate_dataset_with_threads(&cfg, &out, threads)?;
            println!(
                "{} images written to {}",
                manifest.records.len(),
                out.display()
            );
        }
        Command::Evaluate {
            manifest,
            predictions,
            by,
            subsets,
            out,
        } => {
            let records = Manifest::read_csv(&manifest)?.test_records();
            let preds = load_predictions(&predictions)?;
            let axis = match by {
                By::Light => Axis::Light,
                By::Yaw | By::YawLight => Axis::Yaw,
            };
            let mut reports: Vec<EvalReport> = vec![match by {
                By::YawLight => evaluate_2d(&records, &preds)?,
                _ => evaluate(&records, &preds, axis)?,
            }];
            if let Some(s) = subsets {
                let path = if s == "protocol" {
                    manifest_root(&manifest).join(SUBSETS_FILE)
                } else {
                    PathBuf::from(s)
                };
                reports.extend(evaluate_subsets(
                    &records,
                    &preds,
                    &SubsetMap::read_json(path)?,
                    axis,
                )?);
            }
            for r in &reports {
                let [csv, _] = render_report(r, &out, &format!("report_{}", r.label))?;
                println!(
                    "{}: TRR {:.4} over {} rows -> {}",
                    r.label,
                    r.total_recognition_rate,
                    r.total,
                    csv.display()
                );
            }
            let summary = out.join("summary.csv");
            std::fs::write(&summary, summary_csv(&reports)).map_err(|e| facegen::Error::Io {
                path: summary.clone(),
                source: e,
            })?;
        }
        Command::Baseline {
            manifest,
            out,
            feature_size,
        } => {
            let m = Manifest::read_csv(&manifest)?;
            let root = manifest_root(&manifest);
            let spec = FeatureSpec {
                width: feature_size,
                height: feature_size,
            };
            let model = fit_manifest(&m, &root, spec)?;
            let preds = predict_manifest(&model, &m, &root, Split::Test)?;
            save_predictions(&out, &preds)?;
            println!("{} predictions written to {}", preds.len(), out.display());
        }
        Command::ToyModel {
            out,
            seed,
            subdivisions,
        } => {
            use rand::SeedableRng;
            let spec = ToyModelSpec {
                subdivisions,
                ..ToyModelSpec::default()
            };
            let model = build_toy_model(&spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))?;
            save_model(&model, &out)?;
            println!(
                "{} vertices written to {}",
                model.n_vertices(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
