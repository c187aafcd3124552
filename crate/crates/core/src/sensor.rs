//! Deterministic simulated CMOS sensor producing dark frames under
//! injected supply ripple.
//!
//! The sensor is a rolling-shutter model: rows are read out one row
//! period apart, so a time-domain ripple on the supply turns into a
//! spatial row pattern. The ripple couples through a frequency-dependent
//! transfer (DN per volt) and lands as an additive per-row offset, on
//! top of static row/column fixed-pattern noise and temporal Gaussian
//! read noise. All randomness comes from keyed streams, making every
//! frame a pure function of `(config, spec, noise seed, frame index)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::keyed_stream;

/// Color filter array layout, named by the top-left 2x2 tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BayerPattern {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

/// One of the four Bayer sites. `G1` is the green site in the top row
/// of the 2x2 tile, `G2` the green site in the bottom row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BayerChannel {
    R,
    G1,
    G2,
    B,
}

/// Primary color of a Bayer site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfaColor {
    Red,
    Green,
    Blue,
}

impl BayerPattern {
    /// 2x2 tile of this pattern in row-major order.
    pub fn tile(self) -> [[BayerChannel; 2]; 2] {
        use BayerChannel::*;
        match self {
            BayerPattern::Rggb => [[R, G1], [G2, B]],
            BayerPattern::Bggr => [[B, G1], [G2, R]],
            BayerPattern::Grbg => [[G1, R], [B, G2]],
            BayerPattern::Gbrg => [[G1, B], [R, G2]],
        }
    }

    /// Channel of the site at `(row, col)`.
    pub fn channel_at(self, row: usize, col: usize) -> BayerChannel {
        self.tile()[row % 2][col % 2]
    }

    /// Color of the site at `(row, col)`.
    pub fn color_at(self, row: usize, col: usize) -> CfaColor {
        match self.channel_at(row, col) {
            BayerChannel::R => CfaColor::Red,
            BayerChannel::B => CfaColor::Blue,
            BayerChannel::G1 | BayerChannel::G2 => CfaColor::Green,
        }
    }
}

/// Frequency-dependent coupling from supply ripple volts to per-row DN.
///
/// Piecewise interpolation between `(frequency, gain)` knots, linear in
/// log-log space, clamping to the nearest knot outside the covered
/// range. A knot pair with a zero gain falls back to linear gain
/// interpolation over log frequency, since the log of the gain is not
/// defined there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingTransfer {
    /// `(frequency_hz, gain_dn_per_volt)` knots, strictly increasing in
    /// frequency. Frequencies must be positive (the interpolation is
    /// logarithmic in frequency; queries below the first knot clamp).
    pub knots: Vec<(f64, f64)>,
}

impl CouplingTransfer {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let transfer = Self { knots };
        transfer.validate()?;
        Ok(transfer)
    }

    /// Flat transfer: one knot, same gain at every frequency.
    pub fn flat(gain_dn_per_volt: f64) -> Self {
        Self {
            knots: vec![(1000.0, gain_dn_per_volt)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() {
            return Err(Error::InvalidConfig(
                "coupling transfer needs at least one knot".into(),
            ));
        }
        let mut prev: Option<f64> = None;
        for &(f, g) in &self.knots {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "coupling knot frequency must be finite and positive, got {f}"
                )));
            }
            if !g.is_finite() || g < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "coupling knot gain must be finite and non-negative, got {g}"
                )));
            }
            if let Some(p) = prev {
                if f <= p {
                    return Err(Error::InvalidConfig(format!(
                        "coupling knot frequencies must be strictly increasing \
                         ({f} follows {p})"
                    )));
                }
            }
            prev = Some(f);
        }
        Ok(())
    }

    /// Gain at `frequency_hz`. Exact at knots, clamped outside the knot
    /// range (including `frequency_hz = 0`).
    pub fn gain_at(&self, frequency_hz: f64) -> f64 {
        let knots = &self.knots;
        let (f_first, g_first) = knots[0];
        let (f_last, g_last) = knots[knots.len() - 1];
        if frequency_hz <= f_first {
            return g_first;
        }
        if frequency_hz >= f_last {
            return g_last;
        }
        // Strictly inside: find the bracketing pair.
        let hi = knots.partition_point(|&(f, _)| f < frequency_hz);
        let (f1, g1) = knots[hi];
        if frequency_hz == f1 {
            return g1;
        }
        let (f0, g0) = knots[hi - 1];
        let w = (frequency_hz.ln() - f0.ln()) / (f1.ln() - f0.ln());
        if g0 > 0.0 && g1 > 0.0 {
            (g0.ln() + (g1.ln() - g0.ln()) * w).exp()
        } else {
            g0 + (g1 - g0) * w
        }
    }
}

/// How the ripple phase is chosen for each captured frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhasePolicy {
    /// Same phase (radians) every frame. Deterministic row patterns.
    Fixed(f64),
    /// Phase drawn per frame from a keyed stream; models a generator
    /// running asynchronously to the sensor.
    PerFrameRandom,
}

impl Default for PhasePolicy {
    fn default() -> Self {
        PhasePolicy::PerFrameRandom
    }
}

/// Injected supply ripple: a sinusoid of one frequency and amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyNoiseSpec {
    pub frequency_hz: f64,
    pub amplitude_v: f64,
    pub phase_policy: PhasePolicy,
}

impl SupplyNoiseSpec {
    pub fn new(frequency_hz: f64, amplitude_v: f64, phase_policy: PhasePolicy) -> Self {
        Self {
            frequency_hz,
            amplitude_v,
            phase_policy,
        }
    }

    /// No injection at all; equivalent to amplitude 0.
    pub fn quiet() -> Self {
        Self {
            frequency_hz: 0.0,
            amplitude_v: 0.0,
            phase_policy: PhasePolicy::Fixed(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.frequency_hz.is_finite() || self.frequency_hz < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ripple frequency must be finite and >= 0, got {}",
                self.frequency_hz
            )));
        }
        if !self.amplitude_v.is_finite() || self.amplitude_v < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ripple amplitude must be finite and >= 0, got {}",
                self.amplitude_v
            )));
        }
        if let PhasePolicy::Fixed(p) = self.phase_policy {
            if !p.is_finite() {
                return Err(Error::InvalidConfig("fixed phase must be finite".into()));
            }
        }
        Ok(())
    }

    /// Instantaneous ripple voltage `amplitude * sin(2*pi*f*t + phase)`.
    pub fn ripple_at(&self, phase: f64, t: f64) -> f64 {
        self.amplitude_v * (std::f64::consts::TAU * self.frequency_hz * t + phase).sin()
    }

    /// Phase for `frame_index` under this spec's policy.
    pub fn resolve_phase(&self, noise_seed: u64, frame_index: u64) -> f64 {
        match self.phase_policy {
            PhasePolicy::Fixed(p) => p,
            PhasePolicy::PerFrameRandom => {
                let mut rng = keyed_stream(noise_seed, "phase", 0, frame_index);
                rng.gen::<f64>() * std::f64::consts::TAU
            }
        }
    }
}

/// Per-frame capture metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionMeta {
    pub frequency_hz: f64,
    pub amplitude_v: f64,
    /// The phase actually used for this frame (resolved if random).
    pub phase_rad: f64,
}

/// Whether a frame is a sweep sample or a zero-injection reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameRole {
    #[default]
    Sample,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMeta {
    /// Noise-stream seed used for the capture, if known.
    pub seed: Option<u64>,
    pub injection: Option<InjectionMeta>,
    pub black_level: u16,
    pub role: FrameRole,
}

/// Single Bayer-mosaic dark frame, integer pixel values in DN.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub bayer_pattern: BayerPattern,
    /// Row-major, `width * height` samples.
    pub pixels: Vec<u16>,
    pub frame_index: u64,
    pub meta: FrameMeta,
}

impl RawFrame {
    pub fn pixel(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.width + col]
    }

    /// Largest representable DN for this frame's bit depth.
    pub fn max_dn(&self) -> u32 {
        (1u32 << self.bit_depth) - 1
    }
}

/// Geometry, timing, and noise parameters of the simulated sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    /// Columns; must be even (Bayer tiling).
    pub width: usize,
    /// Rows; must be even (Bayer tiling).
    pub height: usize,
    /// ADC bits, 8..=16.
    pub bit_depth: u32,
    /// DN offset representing zero light.
    pub black_level: u16,
    pub bayer_pattern: BayerPattern,
    /// Frames per second.
    pub frame_rate: f64,
    /// Vertical blanking rows between frames.
    pub v_blank_rows: usize,
    /// Temporal Gaussian read noise, DN rms.
    pub read_noise_sigma: f64,
    /// Spread of the static per-row offsets, DN.
    pub row_fpn_sigma: f64,
    /// Spread of the static per-column offsets, DN.
    pub col_fpn_sigma: f64,
    pub coupling: CouplingTransfer,
    /// Keys the sensor's random streams (FPN tables, default captures).
    pub seed: u64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            width: 1280,
            height: 800,
            bit_depth: 10,
            black_level: 64,
            bayer_pattern: BayerPattern::Rggb,
            frame_rate: 30.0,
            v_blank_rows: 20,
            read_noise_sigma: 2.0,
            row_fpn_sigma: 0.5,
            col_fpn_sigma: 0.5,
            coupling: CouplingTransfer::flat(1.0),
            seed: 0,
        }
    }
}

impl SensorConfig {
    /// Rows per frame interval including vertical blanking.
    pub fn rows_per_frame_interval(&self) -> usize {
        self.height + self.v_blank_rows
    }

    /// Time between consecutive row readouts, seconds.
    pub fn row_period(&self) -> f64 {
        1.0 / (self.frame_rate * self.rows_per_frame_interval() as f64)
    }

    /// Time between consecutive frame starts, seconds.
    pub fn frame_period(&self) -> f64 {
        self.rows_per_frame_interval() as f64 * self.row_period()
    }

    pub fn max_dn(&self) -> u32 {
        (1u32 << self.bit_depth) - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.width % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "width must be even and >= 2, got {}",
                self.width
            )));
        }
        if self.height < 2 || self.height % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "height must be even and >= 2, got {}",
                self.height
            )));
        }
        if !(8..=16).contains(&self.bit_depth) {
            return Err(Error::InvalidConfig(format!(
                "bit_depth must be in 8..=16, got {}",
                self.bit_depth
            )));
        }
        if u32::from(self.black_level) > self.max_dn() {
            return Err(Error::InvalidConfig(format!(
                "black_level {} out of range for bit_depth {}",
                self.black_level, self.bit_depth
            )));
        }
        if !self.frame_rate.is_finite() || self.frame_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "frame_rate must be finite and positive, got {}",
                self.frame_rate
            )));
        }
        let t_row = self.row_period();
        if !t_row.is_finite() || t_row <= 0.0 {
            return Err(Error::InvalidConfig(
                "row period must be finite and positive".into(),
            ));
        }
        for (name, sigma) in [
            ("read_noise_sigma", self.read_noise_sigma),
            ("row_fpn_sigma", self.row_fpn_sigma),
            ("col_fpn_sigma", self.col_fpn_sigma),
        ] {
            if !sigma.is_finite() || sigma < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {sigma}"
                )));
            }
        }
        self.coupling.validate()
    }
}

/// Immutable sensor instance with its static FPN tables drawn.
///
/// Capture is a pure function of the arguments; concurrent captures are
/// safe and independent of scheduling.
#[derive(Debug, Clone)]
pub struct SensorInstance {
    config: SensorConfig,
    row_fpn: Vec<f64>,
    col_fpn: Vec<f64>,
}

impl SensorInstance {
    /// Validates the config and draws the static FPN offset tables from
    /// the stream keyed by `(config.seed, "fpn")`. Two instances built
    /// from identical configs behave identically.
    pub fn new(config: SensorConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = keyed_stream(config.seed, "fpn", 0, 0);
        let row_fpn = (0..config.height)
            .map(|_| config.row_fpn_sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let col_fpn = (0..config.width)
            .map(|_| config.col_fpn_sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Self {
            config,
            row_fpn,
            col_fpn,
        })
    }

    pub fn config(&self) -> &SensorConfig {
        &self.config
    }

    pub fn row_fpn(&self) -> &[f64] {
        &self.row_fpn
    }

    pub fn col_fpn(&self) -> &[f64] {
        &self.col_fpn
    }

    /// Per-row ripple disturbance in DN for one frame, before
    /// quantization.
    ///
    /// Row `r` of frame `k` is sampled at row tick `n = k * (height +
    /// v_blank_rows) + r`. The sinusoid argument is accumulated in
    /// cycles and reduced modulo one cycle before evaluation, which
    /// keeps the argument small and makes frequencies congruent modulo
    /// the row rate produce identical offsets. Zero frequency or zero
    /// amplitude injects nothing.
    pub fn row_offsets(&self, spec: &SupplyNoiseSpec, phase: f64, frame_index: u64) -> Vec<f64> {
        let height = self.config.height;
        if spec.amplitude_v == 0.0 || spec.frequency_hz == 0.0 {
            return vec![0.0; height];
        }
        let gain = self.config.coupling.gain_at(spec.frequency_hz);
        let cycles_per_row = spec.frequency_hz * self.config.row_period();
        let cycles_frac = cycles_per_row - cycles_per_row.floor();
        let phase_cycles = phase / std::f64::consts::TAU;
        let base_tick = frame_index as f64 * self.config.rows_per_frame_interval() as f64;
        (0..height)
            .map(|r| {
                let tick = base_tick + r as f64;
                let arg = cycles_frac * tick + phase_cycles;
                let arg = arg - arg.floor();
                gain * (spec.amplitude_v * (std::f64::consts::TAU * arg).sin())
            })
            .collect()
    }

    /// Capture one dark frame using the sensor's own seed for the
    /// temporal noise streams.
    pub fn capture_dark_frame(&self, spec: &SupplyNoiseSpec, frame_index: u64) -> Result<RawFrame> {
        self.capture_dark_frame_seeded(spec, self.config.seed, frame_index)
    }

    /// Capture one dark frame with the temporal noise streams keyed by
    /// `noise_seed` instead of the sensor seed. The static FPN tables
    /// are unaffected; sweep harnesses use this to key captures by
    /// `(run seed, step, frame)`.
    ///
    /// `pixel(r, c) = clamp(round(black_level + row_fpn[r] + col_fpn[c]
    /// + read_noise(r, c) + row_offset[r]))` with rounding half away
    /// from zero.
    pub fn capture_dark_frame_seeded(
        &self,
        spec: &SupplyNoiseSpec,
        noise_seed: u64,
        frame_index: u64,
    ) -> Result<RawFrame> {
        spec.validate()?;
        let cfg = &self.config;
        let phase = spec.resolve_phase(noise_seed, frame_index);
        let offsets = self.row_offsets(spec, phase, frame_index);
        let max_dn = f64::from(cfg.max_dn());
        let black = f64::from(cfg.black_level);
        let sigma = cfg.read_noise_sigma;

        let mut rng = keyed_stream(noise_seed, "read", 0, frame_index);
        let mut pixels = Vec::with_capacity(cfg.width * cfg.height);
        for r in 0..cfg.height {
            let row_base = black + self.row_fpn[r] + offsets[r];
            for c in 0..cfg.width {
                let z: f64 = rng.sample(StandardNormal);
                let v = row_base + self.col_fpn[c] + sigma * z;
                pixels.push(v.round().clamp(0.0, max_dn) as u16);
            }
        }

        Ok(RawFrame {
            width: cfg.width,
            height: cfg.height,
            bit_depth: cfg.bit_depth,
            bayer_pattern: cfg.bayer_pattern,
            pixels,
            frame_index,
            meta: FrameMeta {
                seed: Some(noise_seed),
                injection: Some(InjectionMeta {
                    frequency_hz: spec.frequency_hz,
                    amplitude_v: spec.amplitude_v,
                    phase_rad: phase,
                }),
                black_level: cfg.black_level,
                role: FrameRole::Sample,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_config() -> SensorConfig {
        SensorConfig {
            width: 8,
            height: 8,
            bit_depth: 10,
            black_level: 64,
            frame_rate: 32.0,
            v_blank_rows: 0,
            read_noise_sigma: 0.0,
            row_fpn_sigma: 0.0,
            col_fpn_sigma: 0.0,
            coupling: CouplingTransfer::flat(1.0),
            seed: 7,
            ..SensorConfig::default()
        }
    }

    #[test]
    fn zero_sigma_fpn_is_exactly_zero() {
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        assert!(sensor.row_fpn().iter().all(|&v| v == 0.0));
        assert!(sensor.col_fpn().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identical_configs_identical_fpn() {
        let cfg = SensorConfig {
            row_fpn_sigma: 1.5,
            col_fpn_sigma: 0.7,
            ..quiet_config()
        };
        let a = SensorInstance::new(cfg.clone()).unwrap();
        let b = SensorInstance::new(cfg).unwrap();
        assert_eq!(a.row_fpn(), b.row_fpn());
        assert_eq!(a.col_fpn(), b.col_fpn());
    }

    #[test]
    fn odd_dimensions_rejected() {
        let cfg = SensorConfig {
            height: 3,
            ..quiet_config()
        };
        assert!(matches!(
            SensorInstance::new(cfg),
            Err(Error::InvalidConfig(_))
        ));
        let cfg = SensorConfig {
            width: 5,
            ..quiet_config()
        };
        assert!(SensorInstance::new(cfg).is_err());
    }

    #[test]
    fn bit_depth_out_of_range_rejected() {
        for bad in [7, 17] {
            let cfg = SensorConfig {
                bit_depth: bad,
                black_level: 10,
                ..quiet_config()
            };
            assert!(SensorInstance::new(cfg).is_err());
        }
    }

    #[test]
    fn non_increasing_knots_rejected() {
        let cfg = SensorConfig {
            coupling: CouplingTransfer {
                knots: vec![(1000.0, 1.0), (1000.0, 2.0)],
            },
            ..quiet_config()
        };
        assert!(SensorInstance::new(cfg).is_err());
    }

    #[test]
    fn ripple_zero_at_time_zero() {
        let spec = SupplyNoiseSpec::new(1000.0, 1.0, PhasePolicy::Fixed(0.0));
        assert_eq!(spec.ripple_at(0.0, 0.0), 0.0);
    }

    #[test]
    fn ripple_peaks_at_quarter_period() {
        let spec = SupplyNoiseSpec::new(1000.0, 1.0, PhasePolicy::Fixed(0.0));
        let v = spec.ripple_at(0.0, 0.25e-3);
        assert!((v - 1.0).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn ripple_closed_form_value() {
        // 0.5 * sin(2*pi*50*1.0 + pi/6) = 0.5 * sin(pi/6) = 0.25,
        // checked against a high-precision evaluation of the same
        // expression.
        let spec = SupplyNoiseSpec::new(50.0, 0.5, PhasePolicy::Fixed(0.0));
        let v = spec.ripple_at(std::f64::consts::FRAC_PI_6, 1.0);
        assert!((v - 0.25).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn gain_single_knot_exact_and_flat() {
        let t = CouplingTransfer::new(vec![(1000.0, 1.0)]).unwrap();
        assert_eq!(t.gain_at(1000.0), 1.0);
        assert_eq!(t.gain_at(10.0), 1.0);
        assert_eq!(t.gain_at(1e7), 1.0);
        assert_eq!(t.gain_at(0.0), 1.0);
    }

    #[test]
    fn gain_log_midpoint_is_geometric_mean() {
        let t = CouplingTransfer::new(vec![(1000.0, 1.0), (10_000.0, 10.0)]).unwrap();
        let g = t.gain_at(1000.0 * 10f64.sqrt());
        let expected = 10f64.sqrt();
        assert!(
            (g - expected).abs() / expected < 1e-12,
            "got {g}, want {expected}"
        );
    }

    #[test]
    fn gain_clamps_outside_knots() {
        let t = CouplingTransfer::new(vec![(1000.0, 1.0), (10_000.0, 10.0)]).unwrap();
        assert_eq!(t.gain_at(100.0), 1.0);
        assert_eq!(t.gain_at(100_000.0), 10.0);
        assert_eq!(t.gain_at(1000.0), 1.0);
        assert_eq!(t.gain_at(10_000.0), 10.0);
    }

    #[test]
    fn gain_zero_knot_falls_back_to_linear() {
        let t = CouplingTransfer::new(vec![(100.0, 0.0), (10_000.0, 8.0)]).unwrap();
        let g = t.gain_at(1000.0); // log midpoint of the pair
        assert!((g - 4.0).abs() < 1e-12, "got {g}");
    }

    #[test]
    fn offsets_zero_amplitude_all_zero() {
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        let spec = SupplyNoiseSpec::new(5000.0, 0.0, PhasePolicy::Fixed(0.3));
        assert!(sensor
            .row_offsets(&spec, 0.3, 0)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn offsets_quarter_row_rate_cycle() {
        // t_row = 1/(32 * 8) = 1/256 s; f = 64 Hz = quarter of the row
        // rate, so rows cycle 0, +A, 0, -A. Oracle: evaluate the
        // sinusoid per row directly.
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        let amplitude = 3.0;
        let spec = SupplyNoiseSpec::new(64.0, amplitude, PhasePolicy::Fixed(0.0));
        let offsets = sensor.row_offsets(&spec, 0.0, 0);
        for (r, &got) in offsets.iter().enumerate() {
            let expected = amplitude * (std::f64::consts::PI * r as f64 / 2.0).sin();
            assert!(
                (got - expected).abs() < 1e-12 * amplitude,
                "row {r}: got {got}, want {expected}"
            );
        }
    }

    #[test]
    fn offsets_alias_at_row_rate() {
        // Row rate 32 * 8 = 256 Hz exactly; dyadic frequencies keep the
        // cycles-per-row arithmetic exact, so f and f + 256 must give
        // bitwise-identical offsets.
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        let f = 77.25;
        let row_rate = 1.0 / sensor.config().row_period();
        assert_eq!(row_rate, 256.0);
        let a = sensor.row_offsets(
            &SupplyNoiseSpec::new(f, 2.0, PhasePolicy::Fixed(0.4)),
            0.4,
            3,
        );
        let b = sensor.row_offsets(
            &SupplyNoiseSpec::new(f + row_rate, 2.0, PhasePolicy::Fixed(0.4)),
            0.4,
            3,
        );
        assert_eq!(a, b);
    }

    #[test]
    fn offsets_double_amplitude_doubles_exactly() {
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        let one = sensor.row_offsets(
            &SupplyNoiseSpec::new(113.0, 1.3, PhasePolicy::Fixed(0.9)),
            0.9,
            2,
        );
        let two = sensor.row_offsets(
            &SupplyNoiseSpec::new(113.0, 2.6, PhasePolicy::Fixed(0.9)),
            0.9,
            2,
        );
        for (a, b) in one.iter().zip(&two) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn capture_all_quiet_is_black_level() {
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        let frame = sensor
            .capture_dark_frame(&SupplyNoiseSpec::quiet(), 0)
            .unwrap();
        assert!(frame.pixels.iter().all(|&p| p == 64));
    }

    #[test]
    fn capture_is_bitwise_deterministic() {
        let cfg = SensorConfig {
            read_noise_sigma: 2.0,
            row_fpn_sigma: 0.5,
            col_fpn_sigma: 0.5,
            ..quiet_config()
        };
        let sensor = SensorInstance::new(cfg).unwrap();
        let spec = SupplyNoiseSpec::new(120.0, 4.0, PhasePolicy::PerFrameRandom);
        let a = sensor.capture_dark_frame(&spec, 5).unwrap();
        let b = sensor.capture_dark_frame(&spec, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn capture_quarter_row_rate_rows() {
        // Flat gain 1 DN/V, amplitude 8 V, quarter row rate, phase 0:
        // rows cycle 512, 520, 512, 504 after rounding.
        let cfg = SensorConfig {
            bit_depth: 12,
            black_level: 512,
            ..quiet_config()
        };
        let sensor = SensorInstance::new(cfg).unwrap();
        let spec = SupplyNoiseSpec::new(64.0, 8.0, PhasePolicy::Fixed(0.0));
        let frame = sensor.capture_dark_frame(&spec, 0).unwrap();
        let expected = [512u16, 520, 512, 504];
        for r in 0..frame.height {
            for c in 0..frame.width {
                assert_eq!(
                    frame.pixel(r, c),
                    expected[r % 4],
                    "row {r} col {c} mismatch"
                );
            }
        }
    }

    #[test]
    fn zero_amplitude_and_zero_frequency_equivalent() {
        let cfg = SensorConfig {
            read_noise_sigma: 2.0,
            row_fpn_sigma: 0.5,
            col_fpn_sigma: 0.5,
            ..quiet_config()
        };
        let sensor = SensorInstance::new(cfg).unwrap();
        let a = sensor
            .capture_dark_frame(&SupplyNoiseSpec::new(1234.0, 0.0, PhasePolicy::Fixed(0.2)), 9)
            .unwrap();
        let b = sensor
            .capture_dark_frame(&SupplyNoiseSpec::new(0.0, 5.0, PhasePolicy::Fixed(0.2)), 9)
            .unwrap();
        assert_eq!(a.pixels, b.pixels);
    }

    #[test]
    fn extreme_amplitude_stays_in_range() {
        let cfg = SensorConfig {
            read_noise_sigma: 2.0,
            ..quiet_config()
        };
        let max = cfg.max_dn() as u16;
        let sensor = SensorInstance::new(cfg).unwrap();
        let spec = SupplyNoiseSpec::new(97.0, 1e12, PhasePolicy::Fixed(0.7));
        let frame = sensor.capture_dark_frame(&spec, 0).unwrap();
        assert!(frame.pixels.iter().all(|&p| p <= max));
    }

    #[test]
    fn negative_amplitude_rejected() {
        let sensor = SensorInstance::new(quiet_config()).unwrap();
        let spec = SupplyNoiseSpec::new(100.0, -1.0, PhasePolicy::Fixed(0.0));
        assert!(sensor.capture_dark_frame(&spec, 0).is_err());
    }
}
