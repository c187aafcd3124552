//! RAW Bayer frames to analyzable planes: black-level handling, channel
//! extraction, bilinear demosaic, luma.

use crate::sensor::{BayerChannel, CfaColor, RawFrame};

/// Real-valued row-major grid of DN values.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "plane size mismatch");
        Self {
            width,
            height,
            values,
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self::new(width, height, values)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.width..(row + 1) * self.width]
    }
}

/// Demosaiced image: three planes of identical dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: Plane,
    pub g: Plane,
    pub b: Plane,
}

/// Full-resolution plane of `max(pixel - black_level, 0)`.
pub fn subtract_black_level(frame: &RawFrame, black_level: u16) -> Plane {
    let black = f64::from(black_level);
    let values = frame
        .pixels
        .iter()
        .map(|&p| (f64::from(p) - black).max(0.0))
        .collect();
    Plane::new(frame.width, frame.height, values)
}

/// Subsampled plane of one Bayer site, `(width/2) x (height/2)`.
pub fn extract_channel_plane(frame: &RawFrame, channel: BayerChannel) -> Plane {
    let tile = frame.bayer_pattern.tile();
    let (tr, tc) = (0..2)
        .flat_map(|r| (0..2).map(move |c| (r, c)))
        .find(|&(r, c)| tile[r][c] == channel)
        .expect("every channel occurs in the tile");
    Plane::from_fn(frame.width / 2, frame.height / 2, |r, c| {
        f64::from(frame.pixel(2 * r + tr, 2 * c + tc))
    })
}

fn sample(frame: &RawFrame, row: isize, col: isize) -> f64 {
    let r = row.clamp(0, frame.height as isize - 1) as usize;
    let c = col.clamp(0, frame.width as isize - 1) as usize;
    f64::from(frame.pixel(r, c))
}

fn mean_at(frame: &RawFrame, row: usize, col: usize, offsets: &[(isize, isize)]) -> f64 {
    let sum: f64 = offsets
        .iter()
        .map(|&(dr, dc)| sample(frame, row as isize + dr, col as isize + dc))
        .sum();
    sum / offsets.len() as f64
}

const CROSS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const DIAGONAL: [(isize, isize); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];
const HORIZONTAL: [(isize, isize); 2] = [(0, -1), (0, 1)];
const VERTICAL: [(isize, isize); 2] = [(-1, 0), (1, 0)];

/// Bilinear demosaic. Missing colors are interpolated from the nearest
/// same-color sites; border stencils reuse clamped (replicated)
/// neighbor coordinates, so border estimates blend adjacent sites.
/// Output values are real numbers, not re-quantized.
pub fn demosaic_bilinear(frame: &RawFrame) -> RgbImage {
    let (w, h) = (frame.width, frame.height);
    let pattern = frame.bayer_pattern;
    let mut red = Vec::with_capacity(w * h);
    let mut green = Vec::with_capacity(w * h);
    let mut blue = Vec::with_capacity(w * h);

    for r in 0..h {
        for c in 0..w {
            let own = f64::from(frame.pixel(r, c));
            match pattern.color_at(r, c) {
                CfaColor::Red => {
                    red.push(own);
                    green.push(mean_at(frame, r, c, &CROSS));
                    blue.push(mean_at(frame, r, c, &DIAGONAL));
                }
                CfaColor::Blue => {
                    blue.push(own);
                    green.push(mean_at(frame, r, c, &CROSS));
                    red.push(mean_at(frame, r, c, &DIAGONAL));
                }
                CfaColor::Green => {
                    green.push(own);
                    // Green rows alternate with red or blue sites; the
                    // horizontal neighbors tell which.
                    if pattern.color_at(r, c + 1) == CfaColor::Red {
                        red.push(mean_at(frame, r, c, &HORIZONTAL));
                        blue.push(mean_at(frame, r, c, &VERTICAL));
                    } else {
                        blue.push(mean_at(frame, r, c, &HORIZONTAL));
                        red.push(mean_at(frame, r, c, &VERTICAL));
                    }
                }
            }
        }
    }

    RgbImage {
        r: Plane::new(w, h, red),
        g: Plane::new(w, h, green),
        b: Plane::new(w, h, blue),
    }
}

/// Green-weighted luma `(R + 2G + B) / 4` per pixel.
pub fn luma(rgb: &RgbImage) -> Plane {
    let values = rgb
        .r
        .values
        .iter()
        .zip(&rgb.g.values)
        .zip(&rgb.b.values)
        .map(|((&r, &g), &b)| (r + 2.0 * g + b) * 0.25)
        .collect();
    Plane::new(rgb.r.width, rgb.r.height, values)
}
