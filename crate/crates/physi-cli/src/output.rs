//! Artifact emission: region CSV tables, the overlay SVG, and the run
//! manifest. Every byte written here is a pure function of the inputs, so
//! identical runs produce identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use physi::{RateRegion, RegionLabel};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// One emitted file with its content hash, as listed in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

/// Per-trial record in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub status: String,
    pub files: Vec<FileEntry>,
}

/// Top-level manifest, written once after all trials finish.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub power_linear: f64,
    pub versions: Versions,
    pub seeds: Vec<u64>,
    /// Provenance of a user-supplied channel file, when one was used.
    pub input_channels: Option<FileEntry>,
    pub wall_time_s: f64,
    pub trials: Vec<TrialReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub physi: String,
    pub cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            physi: physi::VERSION.to_string(),
            cli: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Writes `bytes` under `dir` and returns the manifest entry for the file.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry, String> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(FileEntry {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
    })
}

/// Hashes an existing file, for recording inputs like a user channel file.
pub fn hash_file(path: &Path) -> Result<FileEntry, String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(FileEntry {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Shortest f64 text that parses back to the same value.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Region table: one row per swept floor.
pub fn region_csv(region: &RateRegion) -> String {
    let mut out = String::from("r_ms,r_c,scheme_id,iterations,feasible_schemes_remaining\n");
    for p in &region.points {
        let scheme = p.scheme_id.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(p.r_ms),
            fmt_f64(p.r_c),
            scheme,
            p.iterations,
            p.feasible_schemes_remaining
        );
    }
    out
}

pub fn csv_name(label: RegionLabel, trial: usize) -> String {
    format!("{}_trial{}.csv", label.as_str(), trial)
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 48.0;

fn color(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::Gsvd => "#1f6fb4",
        RegionLabel::Tdma => "#c23b3b",
        RegionLabel::GridReference => "#2c9a54",
    }
}

/// Static overlay of region boundaries: axes, ticks, one polyline per
/// region, and a small legend. Self-contained SVG, no external references.
pub fn overlay_svg(regions: &[&RateRegion]) -> String {
    let mut x_max = 0.0f64;
    let mut y_max = 0.0f64;
    for r in regions {
        for p in &r.points {
            x_max = x_max.max(p.r_ms);
            y_max = y_max.max(p.r_c);
        }
    }
    if x_max <= 0.0 {
        x_max = 1.0;
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let inner_w = PLOT_W - MARGIN_L - MARGIN_R;
    let inner_h = PLOT_H - MARGIN_T - MARGIN_B;
    let to_x = |v: f64| MARGIN_L + v / x_max * inner_w;
    let to_y = |v: f64| PLOT_H - MARGIN_B - v / y_max * inner_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>");

    let x0 = MARGIN_L;
    let y0 = PLOT_H - MARGIN_B;
    let _ = writeln!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>",
        PLOT_W - MARGIN_R
    );
    let _ = writeln!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{MARGIN_T}\" stroke=\"black\"/>"
    );

    for i in 0..=5 {
        let fx = i as f64 / 5.0;
        let vx = fx * x_max;
        let px = to_x(vx);
        let _ = writeln!(
            s,
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 4.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{:.1}</text>",
            y0 + 18.0,
            vx
        );
        let vy = fx * y_max;
        let py = to_y(vy);
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>",
            x0 - 4.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.1}</text>",
            x0 - 8.0,
            py + 4.0,
            vy
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">multicast rate R0 (bits)</text>",
        MARGIN_L + inner_w / 2.0,
        PLOT_H - 10.0
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">\
         confidential rate Rc (bits)</text>",
        MARGIN_T + inner_h / 2.0,
        MARGIN_T + inner_h / 2.0
    );

    for r in regions {
        if r.points.is_empty() {
            continue;
        }
        let mut pts = String::new();
        for p in &r.points {
            let _ = write!(pts, "{:.2},{:.2} ", to_x(p.r_ms), to_y(p.r_c));
        }
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            pts.trim_end(),
            color(r.label)
        );
    }

    for (i, r) in regions.iter().enumerate() {
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        let lx = PLOT_W - MARGIN_R - 150.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            lx + 24.0,
            color(r.label)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            lx + 30.0,
            ly + 4.0,
            r.label.as_str()
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

/// Serializes and writes the manifest; returns its path.
pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf, String> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| format!("manifest serialization failed: {e}"))?;
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}
