//! Persisting and rendering characterisation results: curve CSV, run
//! manifest, and SVG overlay plots.
//!
//! Numbers in the CSV use Rust's shortest round-trip formatting, so
//! `read . write` is the identity on the numeric content. The SVG is
//! self-contained and deterministic: identical inputs give identical
//! bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metric::MetricSummary;
use crate::sensor::SensorConfig;
use crate::sweep::{CharacterisationCurve, CriticalRange, CurvePoint, SweepConfig};

pub const CURVE_CSV_HEADER: &str = "frequency_hz,mean_metric_dn,std_metric_dn,n_frames";

/// Serialize a curve as CSV with full round-trip precision.
pub fn write_curve_csv(curve: &CharacterisationCurve) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.frequency_hz, p.summary.mean_metric, p.summary.std_metric, p.summary.n_frames
        ));
    }
    out
}

/// Parse a curve CSV produced by [`write_curve_csv`].
///
/// The loaded curve carries no provenance and no per-frame values (the
/// CSV stores only the summary columns).
pub fn read_curve_csv(text: &str) -> Result<CharacterisationCurve> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedCsv("empty input".into()))?;
    if header.trim_end_matches('\r') != CURVE_CSV_HEADER {
        return Err(Error::MalformedCsv(format!(
            "expected header {CURVE_CSV_HEADER:?}, got {header:?}"
        )));
    }

    let mut points = Vec::new();
    let mut previous: Option<f64> = None;
    for (i, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::MalformedCsv(format!(
                "row {}: expected 4 fields, got {}",
                i + 1,
                fields.len()
            )));
        }
        let parse = |what: &str, s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::MalformedCsv(format!("row {}: bad {what} {s:?}", i + 1)))?;
            if !v.is_finite() {
                return Err(Error::MalformedCsv(format!(
                    "row {}: {what} must be finite",
                    i + 1
                )));
            }
            Ok(v)
        };
        let frequency_hz = parse("frequency", fields[0])?;
        let mean_metric = parse("mean metric", fields[1])?;
        let std_metric = parse("std metric", fields[2])?;
        let n_frames: usize = fields[3].parse().map_err(|_| {
            Error::MalformedCsv(format!("row {}: bad frame count {:?}", i + 1, fields[3]))
        })?;

        if let Some(prev) = previous {
            if frequency_hz <= prev {
                return Err(Error::NonMonotonicFrequency {
                    row: i + 1,
                    previous: prev,
                    current: frequency_hz,
                });
            }
        }
        previous = Some(frequency_hz);
        points.push(CurvePoint {
            frequency_hz,
            summary: MetricSummary {
                mean_metric,
                std_metric,
                n_frames,
                per_frame: Vec::new(),
            },
        });
    }

    if points.is_empty() {
        return Err(Error::MalformedCsv("no data rows".into()));
    }
    Ok(CharacterisationCurve {
        points,
        provenance: None,
    })
}

/// Digest over the canonical serialization of both configs. Any
/// single-field change produces a different fingerprint.
pub fn config_fingerprint(sensor: &SensorConfig, sweep: &SweepConfig) -> String {
    let payload =
        serde_json::to_string(&(sensor, sweep)).expect("config serialization is infallible");
    let digest = Sha256::digest(payload.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to reproduce a sweep run.
///
/// Field order matters for TOML: scalars first, config tables last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    /// RFC 3339 UTC timestamp of the run.
    pub timestamp_utc: String,
    pub run_seed: u64,
    pub config_fingerprint: String,
    pub sensor: SensorConfig,
    pub sweep: SweepConfig,
}

impl RunManifest {
    pub fn new(sensor: SensorConfig, sweep: SweepConfig, timestamp_utc: String) -> Self {
        let config_fingerprint = config_fingerprint(&sensor, &sweep);
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_utc,
            run_seed: sweep.run_seed,
            config_fingerprint,
            sensor,
            sweep,
        }
    }

    /// True when the recorded fingerprint matches one recomputed from
    /// the echoed configs.
    pub fn fingerprint_consistent(&self) -> bool {
        config_fingerprint(&self.sensor, &self.sweep) == self.config_fingerprint
    }
}

pub fn write_manifest(manifest: &RunManifest) -> Result<String> {
    toml::to_string(manifest).map_err(|e| Error::InvalidConfig(format!("manifest encode: {e}")))
}

pub fn read_manifest(text: &str) -> Result<RunManifest> {
    toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("manifest parse: {e}")))
}

/// Rendering options for [`render_overlay_svg`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PlotOptions {
    /// Logarithmic frequency axis (requires positive frequencies).
    pub log_x: bool,
}

const SVG_WIDTH: f64 = 960.0;
const SVG_HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 52.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn trim_number(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Step sizes from the 1-2-5 series covering roughly `n` intervals.
fn nice_step(range: f64, n: usize) -> f64 {
    let raw = range / n as f64;
    let pow = 10f64.powf(raw.log10().floor());
    let frac = raw / pow;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * pow
}

/// Render curves as a self-contained SVG 1.1 line chart: one polyline
/// per curve, critical ranges as shaded bands, labeled axes, legend.
/// Output is deterministic (no timestamps or random ids).
pub fn render_overlay_svg(
    curves: &[&CharacterisationCurve],
    labels: &[&str],
    ranges: &[CriticalRange],
    options: &PlotOptions,
) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::EmptyInput("no curves to plot".into()));
    }
    if labels.len() != curves.len() {
        return Err(Error::LabelMismatch {
            curves: curves.len(),
            labels: labels.len(),
        });
    }
    let all_points: Vec<&CurvePoint> = curves.iter().flat_map(|c| c.points.iter()).collect();
    if all_points.is_empty() {
        return Err(Error::EmptyInput("curves have no points".into()));
    }

    let fmin = all_points
        .iter()
        .map(|p| p.frequency_hz)
        .fold(f64::INFINITY, f64::min);
    let fmax = all_points
        .iter()
        .map(|p| p.frequency_hz)
        .fold(f64::NEG_INFINITY, f64::max);
    if options.log_x && fmin <= 0.0 {
        return Err(Error::InvalidConfig(
            "log frequency axis needs strictly positive frequencies".into(),
        ));
    }
    let vmax = all_points
        .iter()
        .map(|p| p.summary.mean_metric)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let y_top = if vmax > 0.0 { vmax * 1.05 } else { 1.0 };

    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let x_of = |f: f64| -> f64 {
        let t = if options.log_x {
            if fmax == fmin {
                0.5
            } else {
                (f.log10() - fmin.log10()) / (fmax.log10() - fmin.log10())
            }
        } else if fmax == fmin {
            0.5
        } else {
            (f - fmin) / (fmax - fmin)
        };
        MARGIN_LEFT + t * plot_w
    };
    let y_of = |v: f64| -> f64 { MARGIN_TOP + (1.0 - (v / y_top).clamp(0.0, 1.0)) * plot_h };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" \
         viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Critical ranges under everything else.
    for r in ranges {
        let x0 = x_of(r.f_low_hz.max(fmin));
        let x1 = x_of(r.f_high_hz.min(fmax));
        svg.push_str(&format!(
            "<rect class=\"critical-range\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" \
             height=\"{:.2}\" fill=\"#d62728\" fill-opacity=\"0.15\"/>\n",
            x0,
            MARGIN_TOP,
            (x1 - x0).max(1.0),
            plot_h
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = SVG_WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = SVG_HEIGHT - MARGIN_BOTTOM,
    ));

    // X ticks.
    let tick_y = SVG_HEIGHT - MARGIN_BOTTOM;
    if options.log_x {
        let e0 = fmin.log10().ceil() as i32;
        let e1 = fmax.log10().floor() as i32;
        for e in e0..=e1 {
            let f = 10f64.powi(e);
            let x = x_of(f);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{tick_y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                 stroke=\"black\"/>\n<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" \
                 text-anchor=\"middle\">{}</text>\n",
                tick_y + 6.0,
                tick_y + 20.0,
                trim_number(f)
            ));
        }
    } else if fmax > fmin {
        let step = nice_step(fmax - fmin, 6);
        let mut k = (fmin / step).ceil() as i64;
        while k as f64 * step <= fmax {
            let f = k as f64 * step;
            let x = x_of(f);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{tick_y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                 stroke=\"black\"/>\n<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" \
                 text-anchor=\"middle\">{}</text>\n",
                tick_y + 6.0,
                tick_y + 20.0,
                trim_number(f)
            ));
            k += 1;
        }
    }

    // Y ticks.
    let y_step = nice_step(y_top, 5);
    let mut k = 0i64;
    while k as f64 * y_step <= y_top {
        let v = k as f64 * y_step;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{l:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            MARGIN_LEFT - 10.0,
            y + 4.0,
            trim_number(v),
            l = MARGIN_LEFT,
        ));
        k += 1;
    }

    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">frequency (Hz)</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        SVG_HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.2})\">row noise (DN)</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Curves.
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = curve
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x_of(p.frequency_hz), y_of(p.summary.mean_metric)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
    }

    // Legend, top-right inside the plot area.
    for (i, label) in labels.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 16.0 + i as f64 * 18.0;
        let x = SVG_WIDTH - MARGIN_RIGHT - 180.0;
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            x + 24.0,
            x + 30.0,
            y + 4.0,
            xml_escape(label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
