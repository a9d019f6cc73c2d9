//! Configuration files, CSV results, plot scripts and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{RateRegion, SweepPoint};
use crate::scenario::{
    default_rho_grid, grid_positions, PerfectCsiBeamforming, Point, ScenarioConfig, DEFAULT_AREA_SIDE,
};

pub const CSV_HEADER: &str = "sweep_param,sweep_value,rho,primary_bound_bpcu,secondary_bound_bpcu,\
primary_perfect_bpcu,secondary_perfect_bpcu,primary_stderr,secondary_stderr";
const EMPIRICAL_COLUMNS: &str = "primary_empirical_bpcu,secondary_empirical_bpcu";
const EFFECTIVE_COLUMNS: &str = "primary_effective_bpcu,secondary_effective_bpcu";

/// Config file layout: every key optional, absent keys take the default
/// deployment.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    num_aps: Option<usize>,
    antennas_per_ap: Option<usize>,
    ap_positions: Option<Vec<Point>>,
    receiver_position: Option<Point>,
    bd_position: Option<Point>,
    transmit_power: Option<f64>,
    training_power: Option<f64>,
    noise_power: Option<f64>,
    #[serde(alias = "reflection_coefficient")]
    alpha: Option<f64>,
    tau1: Option<usize>,
    tau2: Option<usize>,
    wavelength: Option<f64>,
    pathloss_exp_ap: Option<f64>,
    pathloss_exp_bd: Option<f64>,
    rho_grid: Option<Vec<f64>>,
    num_trials: Option<usize>,
    seed: Option<u64>,
    area_side: Option<f64>,
    frame_length: Option<usize>,
    empirical_resamples: Option<usize>,
    perfect_csi_beamforming: Option<PerfectCsiBeamforming>,
}

impl ConfigFile {
    fn resolve(self) -> Result<ScenarioConfig> {
        let d = ScenarioConfig::default();
        let area_side = self.area_side.unwrap_or(DEFAULT_AREA_SIDE);
        let (num_aps, ap_positions) = match (self.num_aps, self.ap_positions) {
            (Some(m), Some(p)) => (m, p),
            (None, Some(p)) => (p.len(), p),
            (m, None) => {
                let m = m.unwrap_or(d.num_aps);
                let side = (m as f64).sqrt().round() as usize;
                if side == 0 || side * side != m {
                    return Err(Error::config(
                        "num_aps",
                        format!("{m} APs need explicit ap_positions (not a square grid)"),
                    ));
                }
                (m, grid_positions(side, area_side)?)
            }
        };
        let cfg = ScenarioConfig {
            num_aps,
            antennas_per_ap: self.antennas_per_ap.unwrap_or(d.antennas_per_ap),
            ap_positions,
            receiver_position: self.receiver_position.unwrap_or(d.receiver_position),
            bd_position: self.bd_position.unwrap_or(d.bd_position),
            transmit_power: self.transmit_power.unwrap_or(d.transmit_power),
            training_power: self.training_power.unwrap_or(d.training_power),
            noise_power: self.noise_power.unwrap_or(d.noise_power),
            alpha: self.alpha.unwrap_or(d.alpha),
            tau1: self.tau1.unwrap_or(d.tau1),
            tau2: self.tau2.unwrap_or(d.tau2),
            wavelength: self.wavelength.unwrap_or(d.wavelength),
            pathloss_exp_ap: self.pathloss_exp_ap.unwrap_or(d.pathloss_exp_ap),
            pathloss_exp_bd: self.pathloss_exp_bd.unwrap_or(d.pathloss_exp_bd),
            rho_grid: self.rho_grid.unwrap_or_else(default_rho_grid),
            num_trials: self.num_trials.unwrap_or(d.num_trials),
            seed: self.seed.unwrap_or(d.seed),
            area_side,
            frame_length: self.frame_length,
            empirical_resamples: self.empirical_resamples,
            perfect_csi_beamforming: self.perfect_csi_beamforming.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses and validates a JSON scenario description.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        // serde reports unknown keys as data errors; surface the key itself
        if let Some(key) = message
            .strip_prefix("unknown field `")
            .and_then(|rest| rest.split('`').next())
        {
            return Error::config(key, "unknown configuration key");
        }
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    })?;
    file.resolve()
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn serialize_config(config: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

/// C `%g` style rendering with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One region tagged with the sweep coordinate it belongs to.
#[derive(Debug, Clone, Copy)]
pub struct LabeledRegion<'a> {
    pub param: &'a str,
    pub value: Option<f64>,
    pub region: &'a RateRegion<f64>,
}

impl<'a> LabeledRegion<'a> {
    pub fn single(region: &'a RateRegion<f64>) -> Self {
        LabeledRegion {
            param: "none",
            value: None,
            region,
        }
    }

    pub fn from_sweep(points: &'a [SweepPoint<f64>]) -> Vec<Self> {
        points
            .iter()
            .map(|p| LabeledRegion {
                param: p.param.name(),
                value: Some(p.value),
                region: &p.region,
            })
            .collect()
    }
}

/// Renders the results table. Extra empirical/effective-throughput columns
/// are appended only when the regions carry them.
pub fn render_csv(regions: &[LabeledRegion<'_>]) -> Result<String> {
    if regions.is_empty() {
        return Err(Error::invalid("regions", "nothing to write"));
    }
    let empirical = regions.iter().any(|r| r.region.primary_empirical.is_some());
    let effective = regions.iter().any(|r| r.region.throughput_factor.is_some());

    let mut header = CSV_HEADER.to_string();
    if empirical {
        header = format!("{header},{EMPIRICAL_COLUMNS}");
    }
    if effective {
        header = format!("{header},{EFFECTIVE_COLUMNS}");
    }

    let mut rows: Vec<(f64, f64, String)> = Vec::new();
    for lr in regions {
        let r = lr.region;
        for (k, &rho) in r.rho_grid.iter().enumerate() {
            let mut line = format!(
                "{},{},{}",
                lr.param,
                lr.value.map(format_sig6).unwrap_or_default(),
                format_sig6(rho)
            );
            for v in [
                r.primary_bound.mean[k],
                r.secondary_bound.mean[k],
                r.primary_perfect.mean[k],
                r.secondary_perfect.mean[k],
                r.primary_bound.stderr[k],
                r.secondary_bound.stderr[k],
            ] {
                let _ = write!(line, ",{}", format_sig6(v));
            }
            if empirical {
                for s in [&r.primary_empirical, &r.secondary_empirical] {
                    let cell = s.as_ref().map(|s| format_sig6(s.mean[k])).unwrap_or_default();
                    let _ = write!(line, ",{cell}");
                }
            }
            if effective {
                for v in [r.primary_bound.mean[k], r.secondary_bound.mean[k]] {
                    let cell = r.throughput_factor.map(|f| format_sig6(v * f)).unwrap_or_default();
                    let _ = write!(line, ",{cell}");
                }
            }
            rows.push((lr.value.unwrap_or(f64::NEG_INFINITY), rho, line));
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut out = header;
    out.push('\n');
    for (_, _, line) in rows {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(regions: &[LabeledRegion<'_>], path: &Path) -> Result<()> {
    let text = render_csv(regions)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

const PLOT_TEMPLATE: &str = r#"#!/usr/bin/env python3
"""Primary/secondary rate regions, one curve per sweep value."""
import csv
import sys
from collections import OrderedDict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path}
OUT_PATH = {png_path}
SYMBOLS = {"tau1": "τ₁", "tau2": "τ₂", "num_aps": "M", "antennas_per_ap": "N",
           "alpha": "α", "num_trials": "trials", "snr_db": "SNR (dB)"}


def label(param, value):
    if param == "none":
        return "rate region"
    return "{}={}".format(SYMBOLS.get(param, param), value)


def main():
    curves = OrderedDict()
    with open(CSV_PATH, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["sweep_param"], row["sweep_value"])
            curves.setdefault(key, []).append(
                (float(row["rho"]), float(row["secondary_bound_bpcu"]), float(row["primary_bound_bpcu"]))
            )
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (param, value), pts in curves.items():
        pts.sort()
        ax.plot([p[1] for p in pts], [p[2] for p in pts], marker="o", markersize=3, label=label(param, value))
    ax.set_xlabel("secondary rate (bpcu)")
    ax.set_ylabel("primary rate (bpcu)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT_PATH, dpi=150)
    print("curves: {}".format(len(curves)))
    for param, value in curves:
        print(label(param, value))


if __name__ == "__main__":
    sys.exit(main())
"#;

fn python_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

/// Writes a matplotlib script that reads `csv_path` and saves a PNG beside it.
pub fn emit_plot_script(csv_path: &Path, out_path: &Path) -> Result<()> {
    if !csv_path.is_file() {
        return Err(Error::io(
            csv_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "CSV not found"),
        ));
    }
    let png = csv_path.with_extension("png");
    let script = PLOT_TEMPLATE
        .replace("{csv_path}", &python_str(&csv_path.display().to_string()))
        .replace("{png_path}", &python_str(&png.display().to_string()));
    fs::write(out_path, script).map_err(|e| Error::io(out_path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(config: &ScenarioConfig, wall_clock_seconds: f64, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            config_digest: config.digest(),
            tool_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
            wall_clock_seconds,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// dBm → W.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}
