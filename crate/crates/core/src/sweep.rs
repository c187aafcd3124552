//! Frequency-sweep automation: set frequency, capture a burst, measure,
//! step, repeat; plus repeatability comparison and critical-range
//! detection over the resulting curves.
//!
//! Every step draws its noise from streams keyed by `(run_seed, step,
//! frame)`, so steps may execute in any order — or concurrently — and
//! the curve is bitwise identical to a sequential run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{ExtractorRegistry, PlaneExtractor};
use crate::error::{Error, Result};
use crate::metric::{capture_reference, row_noise_burst, MetricSummary, RowReference};
use crate::rng::derive_seed;
use crate::sensor::{FrameRole, PhasePolicy, RawFrame, SensorInstance, SupplyNoiseSpec};

/// How sweep frequencies are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleMode {
    /// Fixed step from `f_start` up to `f_stop`.
    Linear { f_step: f64 },
    /// Geometric spacing; both endpoints always included.
    Log { points_per_decade: u32 },
}

fn default_frames_per_step() -> usize {
    8
}

fn default_reference_frames() -> usize {
    16
}

fn default_analysis_plane() -> String {
    "g1".to_string()
}

/// Parameters of one characterisation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub f_start: f64,
    pub f_stop: f64,
    pub schedule: ScheduleMode,
    /// Injected ripple amplitude, volts.
    pub amplitude_v: f64,
    /// Dark frames captured and measured at each frequency.
    #[serde(default = "default_frames_per_step")]
    pub frames_per_step: usize,
    /// Plane-extractor name (see [`ExtractorRegistry`]).
    #[serde(default = "default_analysis_plane")]
    pub analysis_plane: String,
    #[serde(default)]
    pub run_seed: u64,
    /// Zero-injection frames captured up front to build the row
    /// reference. Zero disables reference correction.
    #[serde(default = "default_reference_frames")]
    pub reference_frames: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            f_start: 0.0,
            f_stop: 100_000.0,
            schedule: ScheduleMode::Linear { f_step: 1000.0 },
            amplitude_v: 1.0,
            frames_per_step: default_frames_per_step(),
            analysis_plane: default_analysis_plane(),
            run_seed: 0,
            reference_frames: default_reference_frames(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.f_start.is_finite() || self.f_start < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "f_start must be finite and >= 0, got {}",
                self.f_start
            )));
        }
        if !self.f_stop.is_finite() || self.f_start > self.f_stop {
            return Err(Error::InvalidConfig(format!(
                "f_start must not exceed f_stop (f_start {}, f_stop {})",
                self.f_start, self.f_stop
            )));
        }
        match self.schedule {
            ScheduleMode::Linear { f_step } => {
                if !f_step.is_finite() || f_step <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "f_step must be finite and positive, got {f_step}"
                    )));
                }
            }
            ScheduleMode::Log { points_per_decade } => {
                if points_per_decade == 0 {
                    return Err(Error::InvalidConfig(
                        "points_per_decade must be positive".into(),
                    ));
                }
                if self.f_start <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "log schedules need f_start > 0".into(),
                    ));
                }
            }
        }
        if !self.amplitude_v.is_finite() || self.amplitude_v < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "amplitude_v must be finite and >= 0, got {}",
                self.amplitude_v
            )));
        }
        if self.frames_per_step == 0 {
            return Err(Error::InvalidConfig(
                "frames_per_step must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Ordered injection frequencies for a sweep.
///
/// Linear mode walks `f_start + k * f_step` while it stays within
/// `f_stop` (the stop frequency is included when it lands exactly on a
/// step). Log mode spaces points geometrically with the configured
/// density and always includes both endpoints.
pub fn frequency_schedule(config: &SweepConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if config.f_start == config.f_stop {
        return Ok(vec![config.f_start]);
    }
    let mut freqs = Vec::new();
    match config.schedule {
        ScheduleMode::Linear { f_step } => {
            let mut k = 0u64;
            loop {
                let f = config.f_start + k as f64 * f_step;
                if f > config.f_stop {
                    break;
                }
                freqs.push(f);
                k += 1;
            }
        }
        ScheduleMode::Log { points_per_decade } => {
            let ppd = f64::from(points_per_decade);
            let mut i = 0u64;
            loop {
                let f = config.f_start * 10f64.powf(i as f64 / ppd);
                if f >= config.f_stop {
                    break;
                }
                freqs.push(f);
                i += 1;
            }
            freqs.push(config.f_stop);
        }
    }
    Ok(freqs)
}

/// One sweep sample: frequency and burst metric summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub frequency_hz: f64,
    pub summary: MetricSummary,
}

/// Where a curve came from, when produced by [`run_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveProvenance {
    /// Digest over the sensor and sweep configs.
    pub config_fingerprint: String,
    pub run_seed: u64,
}

/// Ordered `(frequency, metric)` samples from one sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterisationCurve {
    pub points: Vec<CurvePoint>,
    /// Present when produced by a sweep; absent for curves loaded from
    /// CSV, which carries no provenance.
    pub provenance: Option<CurveProvenance>,
}

impl CharacterisationCurve {
    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency_hz).collect()
    }

    pub fn mean_metrics(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.summary.mean_metric).collect()
    }
}

/// Contiguous frequency interval whose metric exceeds the detection
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRange {
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    pub peak_frequency_hz: f64,
    pub peak_metric_dn: f64,
}

/// Agreement statistics across repeated sweep runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatabilityReport {
    pub n_runs: usize,
    pub max_relative_deviation: f64,
    /// `(frequency, relative deviation)` per schedule point.
    pub per_frequency: Vec<(f64, f64)>,
}

/// Prepared sweep: validated config, resolved extractor, schedule, and
/// the row reference captured from zero-injection frames.
///
/// Steps are pure functions of the plan and the step index.
pub struct SweepPlan<'a> {
    sensor: &'a SensorInstance,
    config: &'a SweepConfig,
    extractor: &'a dyn PlaneExtractor,
    schedule: Vec<f64>,
    reference: Option<RowReference>,
    fingerprint: String,
}

impl<'a> SweepPlan<'a> {
    pub fn new(
        sensor: &'a SensorInstance,
        config: &'a SweepConfig,
        registry: &'a ExtractorRegistry,
    ) -> Result<Self> {
        config.validate()?;
        let extractor = registry.resolve(&config.analysis_plane)?;
        let schedule = frequency_schedule(config)?;
        let fingerprint = crate::report::config_fingerprint(sensor.config(), config);

        let mut plan = Self {
            sensor,
            config,
            extractor,
            schedule,
            reference: None,
            fingerprint,
        };
        if config.reference_frames > 0 {
            let frames = plan.reference_frames()?;
            let planes: Vec<_> = frames.iter().map(|f| extractor.extract(f)).collect();
            plan.reference = Some(capture_reference(&planes)?);
        }
        Ok(plan)
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn reference(&self) -> Option<&RowReference> {
        self.reference.as_ref()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Zero-injection frames the row reference is built from.
    pub fn reference_frames(&self) -> Result<Vec<RawFrame>> {
        let seed = derive_seed(self.config.run_seed, "reference", 0);
        let spec = SupplyNoiseSpec::quiet();
        (0..self.config.reference_frames as u64)
            .map(|i| {
                let mut frame = self.sensor.capture_dark_frame_seeded(&spec, seed, i)?;
                frame.meta.role = FrameRole::Reference;
                Ok(frame)
            })
            .collect()
    }

    /// Burst of injected dark frames for one schedule step.
    pub fn step_frames(&self, step_index: usize) -> Result<Vec<RawFrame>> {
        let spec = SupplyNoiseSpec::new(
            self.schedule[step_index],
            self.config.amplitude_v,
            PhasePolicy::PerFrameRandom,
        );
        let seed = derive_seed(self.config.run_seed, "step", step_index as u64);
        (0..self.config.frames_per_step as u64)
            .map(|i| self.sensor.capture_dark_frame_seeded(&spec, seed, i))
            .collect()
    }

    /// Run one step: capture, extract, measure. Returns the curve point
    /// together with the captured frames.
    pub fn run_step_full(&self, step_index: usize) -> Result<(CurvePoint, Vec<RawFrame>)> {
        let frames = self.step_frames(step_index)?;
        let planes: Vec<_> = frames.iter().map(|f| self.extractor.extract(f)).collect();
        let summary = row_noise_burst(&planes, self.reference.as_ref())?;
        Ok((
            CurvePoint {
                frequency_hz: self.schedule[step_index],
                summary,
            },
            frames,
        ))
    }

    pub fn run_step(&self, step_index: usize) -> Result<CurvePoint> {
        Ok(self.run_step_full(step_index)?.0)
    }

    pub fn provenance(&self) -> CurveProvenance {
        CurveProvenance {
            config_fingerprint: self.fingerprint.clone(),
            run_seed: self.config.run_seed,
        }
    }
}

/// Execute a full sweep. Steps run in parallel; the result is bitwise
/// identical to running them sequentially in any order.
pub fn run_sweep(sensor: &SensorInstance, config: &SweepConfig) -> Result<CharacterisationCurve> {
    let registry = ExtractorRegistry::builtin();
    let plan = SweepPlan::new(sensor, config, &registry)?;
    let points = (0..plan.schedule().len())
        .into_par_iter()
        .map(|i| plan.run_step(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterisationCurve {
        points,
        provenance: Some(plan.provenance()),
    })
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    median_of_sorted(&sorted)
}

/// Consistency constant that scales MAD to a Gaussian sigma estimate.
const MAD_SCALE: f64 = 1.4826;

/// Default threshold multiplier for [`detect_critical_ranges`].
pub const DEFAULT_CRITICAL_K: f64 = 6.0;

/// Find maximal runs of points whose mean metric exceeds
/// `median + k * 1.4826 * MAD`. Runs separated by a single
/// sub-threshold point are merged; each range reports its argmax as
/// the peak. Ranges come back sorted by their low frequency.
pub fn detect_critical_ranges(
    curve: &CharacterisationCurve,
    k: f64,
) -> Result<Vec<CriticalRange>> {
    let n = curve.points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { got: n, need: 3 });
    }
    let means = curve.mean_metrics();
    let med = median(&means);
    let deviations: Vec<f64> = means.iter().map(|m| (m - med).abs()).collect();
    let mad = median(&deviations);
    let threshold = med + k * MAD_SCALE * mad;

    // Indices above threshold, grouped into runs; a gap of exactly one
    // below-threshold point joins its neighbors.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &m) in means.iter().enumerate() {
        if m > threshold {
            match runs.last_mut() {
                Some((_, end)) if i == *end + 1 || i == *end + 2 => *end = i,
                _ => runs.push((i, i)),
            }
        }
    }

    Ok(runs
        .into_iter()
        .map(|(start, end)| {
            let peak = (start..=end)
                .max_by(|&a, &b| means[a].total_cmp(&means[b]))
                .expect("non-empty run");
            CriticalRange {
                f_low_hz: curve.points[start].frequency_hz,
                f_high_hz: curve.points[end].frequency_hz,
                peak_frequency_hz: curve.points[peak].frequency_hz,
                peak_metric_dn: means[peak],
            }
        })
        .collect())
}

const DEVIATION_EPSILON: f64 = 1e-9;

/// Per-frequency spread across repeated runs:
/// `(max - min) / max(mean of the runs' means, 1e-9)`.
pub fn compare_runs(curves: &[CharacterisationCurve]) -> Result<RepeatabilityReport> {
    if curves.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "repeatability comparison needs at least 2 curves, got {}",
            curves.len()
        )));
    }
    let schedule = curves[0].frequencies();
    for (i, curve) in curves.iter().enumerate().skip(1) {
        if curve.frequencies() != schedule {
            return Err(Error::ScheduleMismatch(format!(
                "curve {i} has a different frequency schedule than curve 0"
            )));
        }
    }

    let mut per_frequency = Vec::with_capacity(schedule.len());
    let mut max_dev = 0.0f64;
    for (j, &freq) in schedule.iter().enumerate() {
        let values: Vec<f64> = curves
            .iter()
            .map(|c| c.points[j].summary.mean_metric)
            .collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let dev = (max - min) / mean.max(DEVIATION_EPSILON);
        max_dev = max_dev.max(dev);
        per_frequency.push((freq, dev));
    }

    Ok(RepeatabilityReport {
        n_runs: curves.len(),
        max_relative_deviation: max_dev,
        per_frequency,
    })
}
