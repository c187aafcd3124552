//! Row-noise quantification.
//!
//! The metric is the population standard deviation of the
//! (reference-corrected) row means of a plane: it responds to anything
//! that shifts whole rows together, is blind to column-pattern noise,
//! and admits exact oracles. A burst of frames is measured per frame
//! and then summarized; frames are never averaged before measurement.
//!
//! Sums use Neumaier compensation so the metric stays exact enough for
//! the tight oracle tolerances even on large planes.

use crate::error::{Error, Result};
use crate::raw::Plane;

fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    let var = neumaier_sum(values.iter().map(|&v| (v - mean) * (v - mean))) / n;
    var.sqrt()
}

/// Arithmetic mean of each row.
pub fn row_means(plane: &Plane) -> Vec<f64> {
    let w = plane.width as f64;
    (0..plane.height)
        .map(|r| neumaier_sum(plane.row(r).iter().copied()) / w)
        .collect()
}

/// Static per-row baseline used to cancel row FPN out of the metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReference {
    /// One mean per plane row.
    pub means: Vec<f64>,
}

/// Average the row means of several equally-sized planes into a
/// reference. Captured from zero-injection frames, it isolates static
/// row FPN so that subsequent metrics reflect injected noise only.
pub fn capture_reference(frames: &[Plane]) -> Result<RowReference> {
    let first = frames
        .first()
        .ok_or_else(|| Error::EmptyInput("capture_reference needs at least one frame".into()))?;
    let mut sums = vec![0.0f64; first.height];
    let mut comps = vec![0.0f64; first.height];
    for (i, frame) in frames.iter().enumerate() {
        if frame.width != first.width || frame.height != first.height {
            return Err(Error::DimensionMismatch(format!(
                "reference frame {i} is {}x{} but frame 0 is {}x{}",
                frame.width, frame.height, first.width, first.height
            )));
        }
        for (r, m) in row_means(frame).into_iter().enumerate() {
            // Neumaier step, accumulated across frames.
            let t = sums[r] + m;
            if sums[r].abs() >= m.abs() {
                comps[r] += (sums[r] - t) + m;
            } else {
                comps[r] += (m - t) + sums[r];
            }
            sums[r] = t;
        }
    }
    let n = frames.len() as f64;
    Ok(RowReference {
        means: sums
            .iter()
            .zip(&comps)
            .map(|(&s, &c)| (s + c) / n)
            .collect(),
    })
}

/// Row noise of one plane: population standard deviation of its
/// (reference-corrected) row means.
pub fn row_noise(plane: &Plane, reference: Option<&RowReference>) -> Result<f64> {
    if plane.height < 2 {
        return Err(Error::DegeneratePlane(format!(
            "row noise needs at least 2 rows, got {}",
            plane.height
        )));
    }
    let mut means = row_means(plane);
    if let Some(reference) = reference {
        if reference.means.len() != means.len() {
            return Err(Error::DimensionMismatch(format!(
                "reference has {} rows, plane has {}",
                reference.means.len(),
                means.len()
            )));
        }
        for (m, r) in means.iter_mut().zip(&reference.means) {
            *m -= r;
        }
    }
    Ok(population_std(&means))
}

/// Per-frame metrics over a burst, plus their mean and spread.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    /// Arithmetic mean of `per_frame`.
    pub mean_metric: f64,
    /// Population standard deviation of `per_frame`.
    pub std_metric: f64,
    pub n_frames: usize,
    pub per_frame: Vec<f64>,
}

/// Measure each frame of a burst and summarize. The metric is computed
/// per frame and then averaged.
pub fn row_noise_burst(frames: &[Plane], reference: Option<&RowReference>) -> Result<MetricSummary> {
    let first = frames
        .first()
        .ok_or_else(|| Error::EmptyInput("row_noise_burst needs at least one frame".into()))?;
    let mut per_frame = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        if frame.width != first.width || frame.height != first.height {
            return Err(Error::DimensionMismatch(format!(
                "burst frame {i} is {}x{} but frame 0 is {}x{}",
                frame.width, frame.height, first.width, first.height
            )));
        }
        per_frame.push(row_noise(frame, reference)?);
    }
    let mean_metric = neumaier_sum(per_frame.iter().copied()) / per_frame.len() as f64;
    let std_metric = population_std(&per_frame);
    Ok(MetricSummary {
        mean_metric,
        std_metric,
        n_frames: per_frame.len(),
        per_frame,
    })
}

/// One-sided amplitude spectrum of the mean-subtracted row means.
///
/// Entry `k` is `(k cycles per frame height, amplitude)`; a pure
/// sinusoidal banding of amplitude `A` at `k` cycles shows up as
/// magnitude `A` in bin `k`.
pub fn vertical_banding_spectrum(plane: &Plane) -> Result<Vec<(f64, f64)>> {
    if plane.height < 4 {
        return Err(Error::DegeneratePlane(format!(
            "banding spectrum needs at least 4 rows, got {}",
            plane.height
        )));
    }
    let means = row_means(plane);
    let n = means.len();
    let mean = neumaier_sum(means.iter().copied()) / n as f64;
    let centered: Vec<f64> = means.iter().map(|&m| m - mean).collect();

    let mut spectrum = Vec::with_capacity(n / 2 + 1);
    for k in 0..=n / 2 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (r, &x) in centered.iter().enumerate() {
            let angle = -std::f64::consts::TAU * k as f64 * r as f64 / n as f64;
            re += x * angle.cos();
            im += x * angle.sin();
        }
        let raw = (re * re + im * im).sqrt();
        let scale = if k == 0 || (n % 2 == 0 && k == n / 2) {
            1.0 / n as f64
        } else {
            2.0 / n as f64
        };
        spectrum.push((k as f64, raw * scale));
    }
    Ok(spectrum)
}
