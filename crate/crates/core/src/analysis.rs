//! Analysis-plane extraction strategies.
//!
//! The row-noise metric can run on different views of a frame. Each
//! view is a strategy behind the [`PlaneExtractor`] trait, registered
//! by name and selected at runtime from the run configuration or the
//! command line. Built-in strategies:
//!
//! - `g1` — raw green-site (G1) channel plane. Default: it measures
//!   row statistics straight off the mosaic without demosaic smearing.
//! - `luma` — bilinear demosaic followed by the `(R + 2G + B) / 4`
//!   luma, exercising the RGB conversion path.
//!
//! Both subtract the black level as signed reals, without the zero
//! floor of [`crate::raw::subtract_black_level`]: the metric is
//! shift-invariant, and flooring would clip half of the noise
//! distribution of a dark frame.

use crate::error::{Error, Result};
use crate::raw::{demosaic_bilinear, extract_channel_plane, luma, Plane};
use crate::sensor::{BayerChannel, RawFrame};

/// One way of turning a raw frame into the plane the metric analyses.
pub trait PlaneExtractor: Send + Sync {
    /// Registry name used in configs and CLI flags.
    fn name(&self) -> &'static str;
    /// One-line description for listings.
    fn description(&self) -> &'static str;
    fn extract(&self, frame: &RawFrame) -> Plane;
}

fn subtract_black_signed(mut plane: Plane, black_level: u16) -> Plane {
    let black = f64::from(black_level);
    for v in &mut plane.values {
        *v -= black;
    }
    plane
}

/// Raw G1 channel plane, black level subtracted.
pub struct G1PlaneExtractor;

impl PlaneExtractor for G1PlaneExtractor {
    fn name(&self) -> &'static str {
        "g1"
    }

    fn description(&self) -> &'static str {
        "raw green-site (G1) channel plane, black level subtracted"
    }

    fn extract(&self, frame: &RawFrame) -> Plane {
        subtract_black_signed(
            extract_channel_plane(frame, BayerChannel::G1),
            frame.meta.black_level,
        )
    }
}

/// Bilinear demosaic, luma, black level subtracted.
pub struct LumaPlaneExtractor;

impl PlaneExtractor for LumaPlaneExtractor {
    fn name(&self) -> &'static str {
        "luma"
    }

    fn description(&self) -> &'static str {
        "bilinear-demosaiced luma (R + 2G + B)/4, black level subtracted"
    }

    fn extract(&self, frame: &RawFrame) -> Plane {
        subtract_black_signed(luma(&demosaic_bilinear(frame)), frame.meta.black_level)
    }
}

/// Name-addressed collection of plane extractors.
pub struct ExtractorRegistry {
    entries: Vec<Box<dyn PlaneExtractor>>,
}

impl ExtractorRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Registry with the built-in `g1` and `luma` strategies.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(G1PlaneExtractor));
        registry.register(Box::new(LumaPlaneExtractor));
        registry
    }

    pub fn register(&mut self, extractor: Box<dyn PlaneExtractor>) {
        self.entries.push(extractor);
    }

    /// Case-insensitive lookup; first registration wins.
    pub fn get(&self, name: &str) -> Option<&dyn PlaneExtractor> {
        self.entries
            .iter()
            .find(|e| e.name().eq_ignore_ascii_case(name))
            .map(|e| e.as_ref())
    }

    /// Lookup that reports the available names on failure.
    pub fn resolve(&self, name: &str) -> Result<&dyn PlaneExtractor> {
        self.get(name).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown analysis plane {name:?}; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

impl Default for ExtractorRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
