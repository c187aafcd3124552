//! Cross-module property tests.

use proptest::prelude::*;

use darksweep_core::metric::row_noise;
use darksweep_core::pgm::{decode_frame, encode_pgm, encode_sidecar};
use darksweep_core::raw::{demosaic_bilinear, extract_channel_plane, Plane};
use darksweep_core::report::{read_curve_csv, write_curve_csv};
use darksweep_core::sensor::{
    BayerChannel, BayerPattern, CouplingTransfer, FrameMeta, FrameRole, InjectionMeta,
    PhasePolicy, RawFrame, SensorConfig, SensorInstance, SupplyNoiseSpec,
};
use darksweep_core::sweep::{
    detect_critical_ranges, frequency_schedule, CharacterisationCurve, CurvePoint, ScheduleMode,
    SweepConfig,
};
use darksweep_core::metric::MetricSummary;

fn any_pattern() -> impl Strategy<Value = BayerPattern> {
    prop_oneof![
        Just(BayerPattern::Rggb),
        Just(BayerPattern::Bggr),
        Just(BayerPattern::Grbg),
        Just(BayerPattern::Gbrg),
    ]
}

fn small_sensor(seed: u64, read_sigma: f64, pattern: BayerPattern) -> SensorInstance {
    SensorInstance::new(SensorConfig {
        width: 16,
        height: 16,
        bit_depth: 10,
        black_level: 64,
        bayer_pattern: pattern,
        frame_rate: 32.0,
        v_blank_rows: 0,
        read_noise_sigma: read_sigma,
        row_fpn_sigma: 0.5,
        col_fpn_sigma: 0.5,
        coupling: CouplingTransfer::flat(1.0),
        seed,
        ..SensorConfig::default()
    })
    .unwrap()
}

fn test_frame(pattern: BayerPattern, width: usize, height: usize, f: impl Fn(usize, usize) -> u16) -> RawFrame {
    let mut pixels = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            pixels.push(f(r, c));
        }
    }
    RawFrame {
        width,
        height,
        bit_depth: 16,
        bayer_pattern: pattern,
        pixels,
        frame_index: 0,
        meta: FrameMeta::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // No parameter combination may push a pixel outside the DN range.
    #[test]
    fn capture_never_leaves_dn_range(
        seed in any::<u64>(),
        amplitude in 0.0f64..1e12,
        frequency in 0.0f64..1e7,
        phase in 0.0f64..6.28,
        frame_index in 0u64..64,
    ) {
        let sensor = small_sensor(seed, 2.0, BayerPattern::Rggb);
        let spec = SupplyNoiseSpec::new(frequency, amplitude, PhasePolicy::Fixed(phase));
        let frame = sensor.capture_dark_frame(&spec, frame_index).unwrap();
        let max = sensor.config().max_dn() as u16;
        prop_assert!(frame.pixels.iter().all(|&p| p <= max));
    }

    // Frequencies congruent modulo the row rate alias to identical
    // frames (dyadic grid keeps the congruence exact in floats).
    #[test]
    fn row_rate_congruent_frequencies_alias(
        seed in any::<u64>(),
        grid_steps in 1u64..(1u64 << 30),
        cycles in 1u64..200,
        frame_index in 0u64..8,
    ) {
        let sensor = small_sensor(seed, 1.0, BayerPattern::Rggb);
        let row_rate = 1.0 / sensor.config().row_period();
        prop_assert_eq!(row_rate, 512.0);
        let f = grid_steps as f64 / (1u64 << 30) as f64 * 256.0; // dyadic, < row rate
        let f_alias = f + cycles as f64 * row_rate;
        let spec_a = SupplyNoiseSpec::new(f, 5.0, PhasePolicy::Fixed(0.3));
        let spec_b = SupplyNoiseSpec::new(f_alias, 5.0, PhasePolicy::Fixed(0.3));
        let a = sensor.capture_dark_frame(&spec_a, frame_index).unwrap();
        let b = sensor.capture_dark_frame(&spec_b, frame_index).unwrap();
        prop_assert_eq!(a.pixels, b.pixels);
    }

    // Doubling the amplitude doubles every pre-quantization row offset
    // exactly.
    #[test]
    fn row_offsets_scale_exactly_with_amplitude(
        seed in any::<u64>(),
        frequency in 1.0f64..1e6,
        amplitude in 1e-3f64..1e3,
        phase in 0.0f64..6.28,
    ) {
        let sensor = small_sensor(seed, 0.0, BayerPattern::Rggb);
        let one = sensor.row_offsets(
            &SupplyNoiseSpec::new(frequency, amplitude, PhasePolicy::Fixed(phase)),
            phase,
            1,
        );
        let two = sensor.row_offsets(
            &SupplyNoiseSpec::new(frequency, 2.0 * amplitude, PhasePolicy::Fixed(phase)),
            phase,
            1,
        );
        for (a, b) in one.iter().zip(&two) {
            prop_assert_eq!(2.0 * a, *b);
        }
    }

    // Amplitude zero and frequency zero inject identically nothing.
    #[test]
    fn zero_injection_equivalence(
        seed in any::<u64>(),
        frequency in 0.0f64..1e6,
        amplitude in 0.0f64..1e3,
        frame_index in 0u64..16,
    ) {
        let sensor = small_sensor(seed, 2.0, BayerPattern::Rggb);
        let a = sensor
            .capture_dark_frame(&SupplyNoiseSpec::new(frequency, 0.0, PhasePolicy::Fixed(0.1)), frame_index)
            .unwrap();
        let b = sensor
            .capture_dark_frame(&SupplyNoiseSpec::new(0.0, amplitude, PhasePolicy::Fixed(0.1)), frame_index)
            .unwrap();
        prop_assert_eq!(a.pixels, b.pixels);
    }

    // Metric invariances: shift, scale, column-pattern blindness.
    #[test]
    fn row_noise_invariances(
        rows in proptest::collection::vec(-100.0f64..100.0, 4..24),
        shift in -1e3f64..1e3,
        scale in -8.0f64..8.0,
        width in 2usize..12,
    ) {
        let plane = Plane::from_fn(width, rows.len(), |r, c| rows[r] + (c as f64) * 0.0);
        let base = row_noise(&plane, None).unwrap();

        let shifted = Plane::from_fn(width, rows.len(), |r, _| rows[r] + shift);
        let scaled = Plane::from_fn(width, rows.len(), |r, _| rows[r] * scale);
        prop_assert!((row_noise(&shifted, None).unwrap() - base).abs() < 1e-9);
        prop_assert!(
            (row_noise(&scaled, None).unwrap() - scale.abs() * base).abs()
                < 1e-9 * scale.abs().max(1.0)
        );

        let col_offsets: Vec<f64> = (0..width).map(|c| (c as f64 * 1.37).sin() * 50.0).collect();
        let columned = Plane::from_fn(width, rows.len(), |r, c| rows[r] + col_offsets[c]);
        prop_assert!((row_noise(&columned, None).unwrap() - base).abs() < 1e-9);
    }

    // Demosaic of a constant frame is that constant in every channel,
    // for every pattern, exactly.
    #[test]
    fn demosaic_constant_exact(
        pattern in any_pattern(),
        value in 0u16..=65535,
        half_w in 2usize..6,
        half_h in 2usize..6,
    ) {
        let frame = test_frame(pattern, 2 * half_w, 2 * half_h, |_, _| value);
        let rgb = demosaic_bilinear(&frame);
        for plane in [&rgb.r, &rgb.g, &rgb.b] {
            prop_assert!(plane.values.iter().all(|&v| v == f64::from(value)));
        }
    }

    // The four channel planes tile the frame: every pixel lands in
    // exactly one.
    #[test]
    fn channel_planes_partition_frame(
        pattern in any_pattern(),
        half_w in 1usize..8,
        half_h in 1usize..8,
    ) {
        let width = 2 * half_w;
        let frame = test_frame(pattern, width, 2 * half_h, |r, c| (r * width + c) as u16);
        let mut counts = vec![0u8; frame.pixels.len()];
        for ch in [BayerChannel::R, BayerChannel::G1, BayerChannel::G2, BayerChannel::B] {
            for v in extract_channel_plane(&frame, ch).values {
                counts[v as usize] += 1;
            }
        }
        prop_assert!(counts.iter().all(|&n| n == 1));
    }

    // PGM + sidecar round-trips bitwise.
    #[test]
    fn frame_serialization_round_trips(
        pattern in any_pattern(),
        bit_depth in 8u32..=16,
        half_w in 1usize..6,
        half_h in 1usize..6,
        seed in proptest::option::of(any::<u64>()),
        // Sidecars are TOML; frame indices live in the i64 range.
        frame_index in 0u64..=i64::MAX as u64,
        injected in proptest::option::of((0.0f64..1e6, 0.0f64..100.0, -10.0f64..10.0)),
        reference in any::<bool>(),
        pixel_seed in any::<u64>(),
    ) {
        let max = (1u64 << bit_depth) - 1;
        let width = 2 * half_w;
        let height = 2 * half_h;
        let mut state = pixel_seed | 1;
        let frame = RawFrame {
            width,
            height,
            bit_depth,
            bayer_pattern: pattern,
            pixels: (0..width * height)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 33) as u16 & max as u16
                })
                .collect(),
            frame_index,
            meta: FrameMeta {
                seed,
                injection: injected.map(|(frequency_hz, amplitude_v, phase_rad)| InjectionMeta {
                    frequency_hz,
                    amplitude_v,
                    phase_rad,
                }),
                black_level: (max / 16) as u16,
                role: if reference { FrameRole::Reference } else { FrameRole::Sample },
            },
        };
        let back = decode_frame(&encode_pgm(&frame), &encode_sidecar(&frame).unwrap(), "prop").unwrap();
        prop_assert_eq!(back, frame);
    }

    // Curve CSV round-trips every numeric value exactly.
    #[test]
    fn curve_csv_round_trips(
        start in 0.0f64..1e3,
        steps in proptest::collection::vec((1e-3f64..1e4, 0.0f64..1e4, 0.0f64..1e3, 1usize..64), 1..20),
    ) {
        let mut f = start;
        let mut points = Vec::new();
        for (df, mean, std, n) in steps {
            points.push(CurvePoint {
                frequency_hz: f,
                summary: MetricSummary {
                    mean_metric: mean,
                    std_metric: std,
                    n_frames: n,
                    per_frame: Vec::new(),
                },
            });
            f += df;
        }
        let curve = CharacterisationCurve { points, provenance: None };
        let back = read_curve_csv(&write_curve_csv(&curve)).unwrap();
        prop_assert_eq!(back.points.len(), curve.points.len());
        for (a, b) in curve.points.iter().zip(&back.points) {
            prop_assert_eq!(a.frequency_hz, b.frequency_hz);
            prop_assert_eq!(a.summary.mean_metric, b.summary.mean_metric);
            prop_assert_eq!(a.summary.std_metric, b.summary.std_metric);
            prop_assert_eq!(a.summary.n_frames, b.summary.n_frames);
        }
    }

    // Schedules are strictly increasing and respect their endpoints.
    #[test]
    fn schedules_strictly_increase(
        f_start in 1.0f64..1e4,
        span in 1.0f64..1e6,
        linear in any::<bool>(),
        step in 1.0f64..1e4,
        ppd in 1u32..40,
    ) {
        let config = SweepConfig {
            f_start,
            f_stop: f_start + span,
            schedule: if linear {
                ScheduleMode::Linear { f_step: step }
            } else {
                ScheduleMode::Log { points_per_decade: ppd }
            },
            ..SweepConfig::default()
        };
        let schedule = frequency_schedule(&config).unwrap();
        prop_assert!(!schedule.is_empty());
        prop_assert_eq!(schedule[0], f_start);
        prop_assert!(schedule.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*schedule.last().unwrap() <= f_start + span);
        if !linear {
            prop_assert_eq!(*schedule.last().unwrap(), f_start + span);
        }
    }

    // Median/MAD thresholding makes range detection shift-invariant.
    #[test]
    fn detection_shift_invariant(
        values in proptest::collection::vec(0.0f64..10.0, 5..40),
        offset in 0.0f64..1e4,
    ) {
        let make = |shift: f64| CharacterisationCurve {
            points: values
                .iter()
                .enumerate()
                .map(|(i, &v)| CurvePoint {
                    frequency_hz: i as f64 * 100.0,
                    summary: MetricSummary {
                        mean_metric: v + shift,
                        std_metric: 0.0,
                        n_frames: 1,
                        per_frame: Vec::new(),
                    },
                })
                .collect(),
            provenance: None,
        };
        let a = detect_critical_ranges(&make(0.0), 6.0).unwrap();
        let b = detect_critical_ranges(&make(offset), 6.0).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            prop_assert_eq!(ra.f_low_hz, rb.f_low_hz);
            prop_assert_eq!(ra.f_high_hz, rb.f_high_hz);
        }
    }
}
