//! Recognition-rate decomposition along nuisance axes.
//!
//! Predictions are joined to test-split ground truth by image path. Bins
//! are the exact grid values written by the generator (keyed by their
//! 4-decimal manifest form), and every rate is an exact ratio of integer
//! counts.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{format_deg, SampleRecord};
use crate::{Error, Result};

/// One row of the prediction CSV: `image_path,predicted_identity_id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prediction {
    pub image_path: String,
    pub predicted_identity_id: u32,
}

pub fn write_predictions<W: Write>(w: W, predictions: &[Prediction]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for p in predictions {
        csv.serialize(p)?;
    }
    csv.flush().map_err(|e| Error::io("<predictions>", e))?;
    Ok(())
}

pub fn read_predictions<R: Read>(r: R) -> Result<Vec<Prediction>> {
    let mut csv = csv::Reader::from_reader(r);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    if header != ["image_path", "predicted_identity_id"] {
        return Err(Error::Config(format!(
            "prediction header must be image_path,predicted_identity_id, got {}",
            header.join(",")
        )));
    }
    csv.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn save_predictions(path: impl AsRef<Path>, predictions: &[Prediction]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_predictions(&mut buf, predictions)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(std::io::BufReader::new(file))
}

/// Named identity groups, e.g. the left/right halves of a disentanglement
/// protocol. Stored as JSON `{"groups": {"left": [0, 1], ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubsetMap {
    pub groups: BTreeMap<String, Vec<u32>>,
}

impl SubsetMap {
    pub fn single(label: &str, ids: Vec<u32>) -> Self {
        SubsetMap {
            groups: BTreeMap::from([(label.to_owned(), ids)]),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("subset map serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Yaw,
    Light,
}

impl Axis {
    fn value(self, r: &SampleRecord) -> f64 {
        match self {
            Axis::Yaw => r.yaw_deg,
            Axis::Light => r.light_azimuth_deg,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::Yaw => "yaw",
            Axis::Light => "light direction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinStat {
    pub center_deg: f64,
    pub n: u64,
    pub correct: u64,
}

impl BinStat {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub yaw_deg: f64,
    pub light_deg: f64,
    pub n: u64,
    pub correct: u64,
}

impl GridCell {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub total: u64,
    pub correct: u64,
    pub total_recognition_rate: f64,
    pub axis: Axis,
    /// Sorted by bin center.
    pub per_bin: Vec<BinStat>,
    /// Yaw-major pose x light grid, for 2D evaluations.
    pub grid: Option<Vec<GridCell>>,
}

impl EvalReport {
    pub fn bin(&self, center_deg: f64) -> Option<&BinStat> {
        let key = bin_key(center_deg);
        self.per_bin.iter().find(|b| bin_key(b.center_deg) == key)
    }

    /// Unweighted mean of bin rates over bins whose center satisfies `keep`.
    pub fn mean_rate_where(&self, keep: impl Fn(f64) -> bool) -> Option<f64> {
        let rates: Vec<f64> = self
            .per_bin
            .iter()
            .filter(|b| keep(b.center_deg))
            .map(BinStat::rate)
            .collect();
        (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
    }
}

/// Integer bin key from the 4-decimal manifest representation.
fn bin_key(deg: f64) -> i64 {
    (deg * 1e4).round() as i64
}

fn key_center(key: i64) -> f64 {
    format_deg(key as f64 / 1e4)
        .parse()
        .expect("formatted float parses")
}

/// Checks that every test row has exactly one prediction and returns the
/// predicted id per row. Predictions for other paths are ignored.
fn join(records: &[SampleRecord], predictions: &[Prediction]) -> Result<Vec<u32>> {
    let mut by_path: HashMap<&str, Vec<u32>> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        by_path
            .entry(p.image_path.as_str())
            .or_default()
            .push(p.predicted_identity_id);
    }
    let mut seen_rows: HashMap<&str, usize> = HashMap::new();
    for r in records {
        *seen_rows.entry(r.image_path.as_str()).or_default() += 1;
    }
    let duplicate_rows: Vec<String> = seen_rows
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(p, _)| (*p).to_owned())
        .collect();
    if !duplicate_rows.is_empty() {
        return Err(validation("duplicate manifest rows", duplicate_rows));
    }

    let mut missing = Vec::new();
    let mut duplicated = Vec::new();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        match by_path.get(r.image_path.as_str()).map(Vec::as_slice) {
            None | Some([]) => missing.push(r.image_path.clone()),
            Some([id]) => out.push(*id),
            Some(_) => duplicated.push(r.image_path.clone()),
        }
    }
    if !duplicated.is_empty() {
        return Err(validation("duplicate predictions", duplicated));
    }
    if !missing.is_empty() {
        return Err(validation("missing predictions", missing));
    }
    let extra = predictions.len() - records.len();
    if extra > 0 {
        log::debug!("ignoring {extra} predictions for rows outside the evaluated set");
    }
    Ok(out)
}

fn validation(message: &str, mut paths: Vec<String>) -> Error {
    paths.sort();
    Error::Validation {
        message: message.to_owned(),
        paths,
    }
}

fn report(
    label: &str,
    axis: Axis,
    records: &[SampleRecord],
    predicted: &[u32],
    with_grid: bool,
) -> EvalReport {
    let mut bins: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
    let mut cells: BTreeMap<(i64, i64), (u64, u64)> = BTreeMap::new();
    let mut correct = 0;
    for (r, &p) in records.iter().zip(predicted) {
        let hit = u64::from(p == r.identity_id);
        correct += hit;
        let b = bins.entry(bin_key(axis.value(r))).or_default();
        b.0 += 1;
        b.1 += hit;
        if with_grid {
            let c = cells
                .entry((bin_key(r.yaw_deg), bin_key(r.light_azimuth_deg)))
                .or_default();
            c.0 += 1;
            c.1 += hit;
        }
    }
    let total = records.len() as u64;
    EvalReport {
        label: label.to_owned(),
        total,
        correct,
        total_recognition_rate: if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        },
        axis,
        per_bin: bins
            .into_iter()
            .map(|(k, (n, c))| BinStat {
                center_deg: key_center(k),
                n,
                correct: c,
            })
            .collect(),
        grid: with_grid.then(|| {
            cells
                .into_iter()
                .map(|((y, l), (n, c))| GridCell {
                    yaw_deg: key_center(y),
                    light_deg: key_center(l),
                    n,
                    correct: c,
                })
                .collect()
        }),
    }
}

/// Total recognition rate and its decomposition along `axis`. `records`
/// are the test rows to evaluate.
pub fn evaluate(
    records: &[SampleRecord],
    predictions: &[Prediction],
    axis: Axis,
) -> Result<EvalReport> {
    let predicted = join(records, predictions)?;
    Ok(report("all", axis, records, &predicted, false))
}

/// Like [`evaluate`] along yaw, plus the full yaw x light grid.
pub fn evaluate_2d(records: &[SampleRecord], predictions: &[Prediction]) -> Result<EvalReport> {
    let predicted = join(records, predictions)?;
    Ok(report("all", Axis::Yaw, records, &predicted, true))
}

/// One report per identity group, in group-name order.
pub fn evaluate_subsets(
    records: &[SampleRecord],
    predictions: &[Prediction],
    subsets: &SubsetMap,
    axis: Axis,
) -> Result<Vec<EvalReport>> {
    let predicted = join(records, predictions)?;
    Ok(subsets
        .groups
        .iter()
        .map(|(label, ids)| {
            let (rows, preds): (Vec<SampleRecord>, Vec<u32>) = records
                .iter()
                .zip(&predicted)
                .filter(|(r, _)| ids.contains(&r.identity_id))
                .map(|(r, &p)| (r.clone(), p))
                .unzip();
            report(label, axis, &rows, &preds, false)
        })
        .collect())
}

/// Report CSV: `bin_center_deg,n,rate`, or `yaw_deg,light_deg,n,rate` for
/// grid reports. Rates have four decimals.
pub fn report_csv(report: &EvalReport) -> String {
    let mut s = String::new();
    match &report.grid {
        None => {
            s.push_str("bin_center_deg,n,rate\n");
            for b in &report.per_bin {
                let _ = writeln!(s, "{},{},{:.4}", format_deg(b.center_deg), b.n, b.rate());
            }
        }
        Some(cells) => {
            s.push_str("yaw_deg,light_deg,n,rate\n");
            for c in cells {
                let _ = writeln!(
                    s,
                    "{},{},{},{:.4}",
                    format_deg(c.yaw_deg),
                    format_deg(c.light_deg),
                    c.n,
                    c.rate()
                );
            }
        }
    }
    s
}

const SVG_W: f64 = 520.0;
const SVG_H: f64 = 340.0;
const MARGIN: f64 = 52.0;

fn svg_axes(s: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        SVG_W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        SVG_W / 2.0,
        SVG_H - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        SVG_H / 2.0,
        SVG_H / 2.0,
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (-90.0, 90.0)
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Recognition rate against the binned nuisance as a line chart.
pub fn report_svg(report: &EvalReport) -> String {
    if report.grid.is_some() {
        return grid_svg(report);
    }
    let mut s = String::new();
    let title = format!(
        "{}: TRR {:.2}%",
        report.label,
        100.0 * report.total_recognition_rate
    );
    svg_axes(
        &mut s,
        &title,
        &format!("{} (deg)", report.axis.label()),
        "recognition rate",
    );
    let (x0, x1) = span(report.per_bin.iter().map(|b| b.center_deg));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (SVG_W - 2.0 * MARGIN);
    let py = |y: f64| SVG_H - MARGIN - y * (SVG_H - 2.0 * MARGIN);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        SVG_W - 2.0 * MARGIN,
        SVG_H - 2.0 * MARGIN
    );
    for tick in 0..=4 {
        let y = f64::from(tick) / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{y:.2}</text>"##,
            SVG_W - MARGIN,
            py(y),
            py(y),
            MARGIN - 4.0,
            py(y) + 4.0
        );
    }
    for tick in 0..=4 {
        let x = x0 + (x1 - x0) * f64::from(tick) / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x:.1}</text>"#,
            px(x),
            SVG_H - MARGIN + 16.0
        );
    }
    let points: Vec<String> = report
        .per_bin
        .iter()
        .map(|b| format!("{:.2},{:.2}", px(b.center_deg), py(b.rate())))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fbf" stroke-width="2" points="{}"/>"##,
        points.join(" ")
    );
    for b in &report.per_bin {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f5fbf"/>"##,
            px(b.center_deg),
            py(b.rate())
        );
    }
    s.push_str("</svg>\n");
    s
}

fn heat(rate: f64) -> String {
    // dark blue (0) to yellow (1)
    let t = rate.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(30.0, 250.0),
        lerp(30.0, 220.0),
        lerp(110.0, 40.0)
    )
}

fn grid_svg(report: &EvalReport) -> String {
    let cells = report.grid.as_deref().unwrap_or_default();
    let mut s = String::new();
    let title = format!(
        "{}: TRR {:.2}%",
        report.label,
        100.0 * report.total_recognition_rate
    );
    svg_axes(&mut s, &title, "yaw (deg)", "light direction (deg)");
    let mut yaws: Vec<i64> = cells.iter().map(|c| bin_key(c.yaw_deg)).collect();
    let mut lights: Vec<i64> = cells.iter().map(|c| bin_key(c.light_deg)).collect();
    yaws.sort_unstable();
    yaws.dedup();
    lights.sort_unstable();
    lights.dedup();
    let cw = (SVG_W - 2.0 * MARGIN) / yaws.len().max(1) as f64;
    let ch = (SVG_H - 2.0 * MARGIN) / lights.len().max(1) as f64;
    for c in cells {
        let xi = yaws.binary_search(&bin_key(c.yaw_deg)).unwrap_or(0) as f64;
        let yi = lights.binary_search(&bin_key(c.light_deg)).unwrap_or(0) as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>yaw {} light {}: {:.4}</title></rect>"#,
            MARGIN + xi * cw,
            SVG_H - MARGIN - (yi + 1.0) * ch,
            cw,
            ch,
            heat(c.rate()),
            format_deg(c.yaw_deg),
            format_deg(c.light_deg),
            c.rate()
        );
    }
    for (axis_vals, horizontal) in [(&yaws, true), (&lights, false)] {
        if let (Some(&first), Some(&last)) = (axis_vals.first(), axis_vals.last()) {
            for (k, pos) in [(first, 0.0), (last, axis_vals.len() as f64 - 1.0)] {
                let label = format!("{:.1}", k as f64 / 1e4);
                if horizontal {
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                        MARGIN + (pos + 0.5) * cw,
                        SVG_H - MARGIN + 16.0
                    );
                } else {
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
                        MARGIN - 4.0,
                        SVG_H - MARGIN - (pos + 0.5) * ch + 4.0
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>.csv` and `<stem>.svg` into `dir`; returns both paths.
pub fn render_report(report: &EvalReport, dir: &Path, stem: &str) -> Result<[PathBuf; 2]> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&csv_path, report_csv(report)).map_err(|e| Error::io(&csv_path, e))?;
    std::fs::write(&svg_path, report_svg(report)).map_err(|e| Error::io(&svg_path, e))?;
    Ok([csv_path, svg_path])
}

/// `label,n,correct,trr` for a set of reports.
pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut s = String::from("label,n,correct,trr\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{:.4}",
            r.label, r.total, r.correct, r.total_recognition_rate
        );
    }
    s
}
