//! Implementations of the CLI subcommands.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};

use darksweep_core::analysis::ExtractorRegistry;
use darksweep_core::config::parse_run_config;
use darksweep_core::error::Error as CoreError;
use darksweep_core::metric::{capture_reference, row_noise_burst};
use darksweep_core::pgm::{load_frame, save_frame};
use darksweep_core::report::{
    read_curve_csv, render_overlay_svg, write_curve_csv, write_manifest, PlotOptions, RunManifest,
};
use darksweep_core::sensor::{FrameRole, RawFrame, SensorInstance};
use darksweep_core::sweep::{
    compare_runs, detect_critical_ranges, run_sweep, CharacterisationCurve, CriticalRange,
    CurvePoint, SweepConfig, SweepPlan,
};

/// Command failure, split by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 1: bad flags, bad config, bad input data.
    Validation(String),
    /// Exit code 2: filesystem trouble.
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

type CmdResult = Result<(), CliError>;

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CmdResult {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn ranges_csv(ranges: &[CriticalRange]) -> String {
    let mut out = String::from("f_low_hz,f_high_hz,peak_hz,peak_metric\n");
    for r in ranges {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.f_low_hz, r.f_high_hz, r.peak_frequency_hz, r.peak_metric_dn
        ));
    }
    out
}

/// Run one sweep; when `dump_dir` is set, every captured frame is also
/// written out as PGM + sidecar (and steps run sequentially).
fn run_one(
    sensor: &SensorInstance,
    sweep_cfg: &SweepConfig,
    dump_dir: Option<&Path>,
) -> Result<CharacterisationCurve, CliError> {
    let Some(dir) = dump_dir else {
        return Ok(run_sweep(sensor, sweep_cfg)?);
    };

    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let registry = ExtractorRegistry::builtin();
    let plan = SweepPlan::new(sensor, sweep_cfg, &registry)?;

    for frame in plan.reference_frames()? {
        let path = dir.join(format!("ref_{:04}.pgm", frame.frame_index));
        save_frame(&frame, &path)?;
    }
    let mut points = Vec::with_capacity(plan.schedule().len());
    for step in 0..plan.schedule().len() {
        let (point, frames) = plan.run_step_full(step)?;
        for frame in &frames {
            let path = dir.join(format!("step_{step:04}_frame_{:03}.pgm", frame.frame_index));
            save_frame(frame, &path)?;
        }
        points.push(point);
    }
    Ok(CharacterisationCurve {
        points,
        provenance: Some(plan.provenance()),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    config_path: &Path,
    out_override: Option<&Path>,
    repeat: u32,
    seed_override: Option<u64>,
    dump_frames: bool,
    k: f64,
    log_x: bool,
) -> CmdResult {
    if repeat == 0 {
        return Err(CliError::Validation("--repeat must be at least 1".into()));
    }
    if !k.is_finite() {
        return Err(CliError::Validation("--k must be finite".into()));
    }
    let run_config = parse_run_config(&read_file(config_path)?)?;
    let out_dir: PathBuf = match (out_override, &run_config.out_dir) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(dir)) => dir.clone(),
        (None, None) => {
            return Err(CliError::Validation(
                "no output directory: set out_dir in the config or pass --out".into(),
            ))
        }
    };
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;

    let sensor = SensorInstance::new(run_config.sensor.clone())?;
    let base_seed = seed_override.unwrap_or(run_config.sweep.run_seed);

    let mut curves = Vec::with_capacity(repeat as usize);
    for i in 0..repeat {
        let sweep_cfg = SweepConfig {
            run_seed: base_seed.wrapping_add(u64::from(i)),
            ..run_config.sweep.clone()
        };
        let dump = (dump_frames && i == 0).then(|| out_dir.join("frames"));
        let curve = run_one(&sensor, &sweep_cfg, dump.as_deref())?;

        let curve_name = if repeat == 1 {
            "curve.csv".to_string()
        } else {
            format!("curve_{}.csv", i + 1)
        };
        write_file(&out_dir.join(&curve_name), write_curve_csv(&curve))?;

        let manifest = RunManifest::new(run_config.sensor.clone(), sweep_cfg, timestamp());
        let manifest_name = if repeat == 1 {
            "manifest.toml".to_string()
        } else {
            format!("manifest_{}.toml", i + 1)
        };
        write_file(&out_dir.join(&manifest_name), write_manifest(&manifest)?)?;

        println!("run {}: {} points -> {curve_name}", i + 1, curve.points.len());
        curves.push(curve);
    }

    // Critical ranges from the first run (needs at least 3 points).
    let ranges = if curves[0].points.len() >= 3 {
        detect_critical_ranges(&curves[0], k)?
    } else {
        Vec::new()
    };
    write_file(&out_dir.join("ranges.csv"), ranges_csv(&ranges))?;
    println!("critical ranges: {}", ranges.len());

    let labels: Vec<String> = (1..=repeat).map(|i| format!("run {i}")).collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let curve_refs: Vec<&CharacterisationCurve> = curves.iter().collect();
    let svg = render_overlay_svg(&curve_refs, &label_refs, &ranges, &PlotOptions { log_x })?;
    write_file(&out_dir.join("plot.svg"), svg)?;

    if repeat > 1 {
        let report = compare_runs(&curves)?;
        let mut csv = String::from("frequency_hz,relative_deviation\n");
        for (f, d) in &report.per_frequency {
            csv.push_str(&format!("{f},{d}\n"));
        }
        write_file(&out_dir.join("repeatability.csv"), csv)?;
        println!(
            "repeatability over {} runs: max relative deviation {:.4}",
            report.n_runs, report.max_relative_deviation
        );
    }

    Ok(())
}

pub fn cmd_analyze(frames_dir: &Path, out_path: &Path, plane: &str) -> CmdResult {
    let registry = ExtractorRegistry::builtin();
    let extractor = registry.resolve(plane)?;

    let entries = fs::read_dir(frames_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", frames_dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .map(|ext| ext.eq_ignore_ascii_case("pgm"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Validation(format!(
            "no frames found in {}",
            frames_dir.display()
        )));
    }

    let mut frames: Vec<(PathBuf, RawFrame)> = Vec::with_capacity(paths.len());
    for path in paths {
        let frame = load_frame(&path)?;
        frames.push((path, frame));
    }

    // Every frame must agree on geometry and pixel semantics.
    let (first_path, first) = &frames[0];
    for (path, frame) in &frames {
        let same = frame.width == first.width
            && frame.height == first.height
            && frame.bit_depth == first.bit_depth
            && frame.bayer_pattern == first.bayer_pattern
            && frame.meta.black_level == first.meta.black_level;
        if !same {
            return Err(CliError::Validation(format!(
                "inconsistent dimensions or pixel format: {} does not match {}",
                path.display(),
                first_path.display()
            )));
        }
    }

    let mut reference_frames: Vec<&(PathBuf, RawFrame)> = Vec::new();
    let mut groups: HashMap<u64, Vec<&(PathBuf, RawFrame)>> = HashMap::new();
    let mut missing: Vec<&Path> = Vec::new();
    for entry in &frames {
        let (path, frame) = entry;
        match (frame.meta.role, &frame.meta.injection) {
            (FrameRole::Reference, _) => reference_frames.push(entry),
            (FrameRole::Sample, Some(injection)) => {
                groups
                    .entry(injection.frequency_hz.to_bits())
                    .or_default()
                    .push(entry);
            }
            (FrameRole::Sample, None) => missing.push(path),
        }
    }
    if !missing.is_empty() {
        let listing: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
        return Err(CliError::Validation(format!(
            "frames lacking frequency metadata:\n  {}",
            listing.join("\n  ")
        )));
    }
    if groups.is_empty() {
        return Err(CliError::Validation(
            "no sample frames with frequency metadata found".into(),
        ));
    }

    let by_capture_order =
        |a: &&(PathBuf, RawFrame), b: &&(PathBuf, RawFrame)| {
            (a.1.frame_index, &a.0).cmp(&(b.1.frame_index, &b.0))
        };

    let reference = if reference_frames.is_empty() {
        None
    } else {
        reference_frames.sort_by(by_capture_order);
        let planes: Vec<_> = reference_frames
            .iter()
            .map(|(_, f)| extractor.extract(f))
            .collect();
        Some(capture_reference(&planes)?)
    };

    let mut freqs: Vec<f64> = groups.keys().map(|&bits| f64::from_bits(bits)).collect();
    freqs.sort_by(|a, b| a.total_cmp(b));

    let mut points = Vec::with_capacity(freqs.len());
    for f in freqs {
        let mut group = groups.remove(&f.to_bits()).expect("key from map");
        group.sort_by(by_capture_order);
        let planes: Vec<_> = group.iter().map(|(_, frame)| extractor.extract(frame)).collect();
        let summary = row_noise_burst(&planes, reference.as_ref())?;
        points.push(CurvePoint {
            frequency_hz: f,
            summary,
        });
    }

    let curve = CharacterisationCurve {
        points,
        provenance: None,
    };
    write_file(out_path, write_curve_csv(&curve))?;
    println!(
        "analyzed {} frames at {} frequencies ({} reference) -> {}",
        frames.len(),
        curve.points.len(),
        reference_frames.len(),
        out_path.display()
    );
    Ok(())
}

pub fn cmd_detect(curve_path: &Path, k: f64) -> CmdResult {
    if !k.is_finite() {
        return Err(CliError::Validation("--k must be finite".into()));
    }
    let curve = read_curve_csv(&read_file(curve_path)?)?;
    let ranges = detect_critical_ranges(&curve, k)?;
    for r in &ranges {
        println!(
            "{},{},{},{}",
            r.f_low_hz, r.f_high_hz, r.peak_frequency_hz, r.peak_metric_dn
        );
    }
    Ok(())
}

pub fn cmd_plot(curve_paths: &[PathBuf], out_path: &Path, log_x: bool) -> CmdResult {
    let mut curves = Vec::with_capacity(curve_paths.len());
    let mut labels = Vec::with_capacity(curve_paths.len());
    for path in curve_paths {
        curves.push(read_curve_csv(&read_file(path)?)?);
        labels.push(
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        );
    }
    let curve_refs: Vec<&CharacterisationCurve> = curves.iter().collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let svg = render_overlay_svg(&curve_refs, &label_refs, &[], &PlotOptions { log_x })?;
    write_file(out_path, svg)?;
    println!("{} curves -> {}", curves.len(), out_path.display());
    Ok(())
}
