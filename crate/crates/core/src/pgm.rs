//! Frame interchange: 16-bit binary PGM rasters plus a sidecar metadata
//! record.
//!
//! The raster is a standard `P5` PGM with maxval 65535 and two-byte
//! big-endian samples. Everything the raster cannot carry (bit depth,
//! Bayer pattern, black level, frame index, injection metadata) lives
//! in a TOML sidecar next to the `.pgm` file, named by swapping the
//! extension to `.toml`. Writing then reading a frame reproduces it
//! bitwise.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor::{BayerPattern, FrameMeta, FrameRole, InjectionMeta, RawFrame};

const PGM_MAXVAL: u32 = 65535;

/// Encode the raster as binary PGM (`P5`, maxval 65535, big-endian).
pub fn encode_pgm(frame: &RawFrame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n{}\n", frame.width, frame.height, PGM_MAXVAL);
    let mut bytes = Vec::with_capacity(header.len() + frame.pixels.len() * 2);
    bytes.extend_from_slice(header.as_bytes());
    for &p in &frame.pixels {
        bytes.extend_from_slice(&p.to_be_bytes());
    }
    bytes
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    bit_depth: u32,
    bayer_pattern: BayerPattern,
    black_level: u16,
    frame_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase_rad: Option<f64>,
    /// Hex-encoded (`0x...`); TOML integers cannot hold a full u64.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<String>,
}

/// Encode the sidecar metadata record for a frame.
///
/// TOML integers are signed 64-bit, which caps the representable
/// `frame_index`; seeds are written as hex strings for the same reason.
pub fn encode_sidecar(frame: &RawFrame) -> Result<String> {
    if frame.frame_index > i64::MAX as u64 {
        return Err(Error::InvalidConfig(format!(
            "frame_index {} exceeds the sidecar integer range",
            frame.frame_index
        )));
    }
    let sidecar = Sidecar {
        bit_depth: frame.bit_depth,
        bayer_pattern: frame.bayer_pattern,
        black_level: frame.meta.black_level,
        frame_index: frame.frame_index,
        role: match frame.meta.role {
            FrameRole::Sample => None,
            FrameRole::Reference => Some("reference".to_string()),
        },
        frequency_hz: frame.meta.injection.map(|i| i.frequency_hz),
        amplitude_v: frame.meta.injection.map(|i| i.amplitude_v),
        phase_rad: frame.meta.injection.map(|i| i.phase_rad),
        seed: frame.meta.seed.map(|s| format!("{s:#018x}")),
    };
    toml::to_string(&sidecar).map_err(|e| Error::InvalidConfig(format!("sidecar encode: {e}")))
}

fn is_pgm_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c)
}

struct HeaderScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if is_pgm_whitespace(b) {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !is_pgm_whitespace(self.bytes[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader("truncated header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("bad {what} field")))
    }
}

/// Decode a frame from PGM bytes plus its sidecar record. `origin`
/// names the source in error messages.
pub fn decode_frame(pgm: &[u8], sidecar: &str, origin: &str) -> Result<RawFrame> {
    let mut scanner = HeaderScanner {
        bytes: pgm,
        pos: 0,
    };
    let magic = scanner.token()?;
    if magic != b"P5" {
        return Err(Error::MalformedHeader(format!(
            "{origin}: expected P5 magic, got {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = scanner.number("width")? as usize;
    let height = scanner.number("height")? as usize;
    let maxval = scanner.number("maxval")? as u32;
    if maxval != PGM_MAXVAL {
        return Err(Error::MalformedHeader(format!(
            "{origin}: only 16-bit PGM (maxval {PGM_MAXVAL}) is accepted, got maxval {maxval}"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if scanner.pos >= pgm.len() || !is_pgm_whitespace(pgm[scanner.pos]) {
        return Err(Error::MalformedHeader(format!(
            "{origin}: missing separator before raster"
        )));
    }
    let data = &pgm[scanner.pos + 1..];

    if width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 {
        return Err(Error::MalformedHeader(format!(
            "{origin}: frame dimensions must be even and >= 2, got {width}x{height}"
        )));
    }
    if data.len() != width * height * 2 {
        return Err(Error::DimensionMismatch(format!(
            "{origin}: raster holds {} bytes, header implies {}",
            data.len(),
            width * height * 2
        )));
    }

    let meta: Sidecar = toml::from_str(sidecar).map_err(|e| Error::BadSidecar {
        path: origin.to_string(),
        reason: e.to_string(),
    })?;
    if !(8..=16).contains(&meta.bit_depth) {
        return Err(Error::BadSidecar {
            path: origin.to_string(),
            reason: format!("bit_depth must be in 8..=16, got {}", meta.bit_depth),
        });
    }
    let max_dn = (1u32 << meta.bit_depth) - 1;
    if u32::from(meta.black_level) > max_dn {
        return Err(Error::BadSidecar {
            path: origin.to_string(),
            reason: format!(
                "black_level {} out of range for bit_depth {}",
                meta.black_level, meta.bit_depth
            ),
        });
    }
    for v in [meta.frequency_hz, meta.amplitude_v, meta.phase_rad]
        .into_iter()
        .flatten()
    {
        if !v.is_finite() {
            return Err(Error::BadSidecar {
                path: origin.to_string(),
                reason: "injection metadata must be finite".into(),
            });
        }
    }
    let role = match meta.role.as_deref() {
        None | Some("sample") => FrameRole::Sample,
        Some("reference") => FrameRole::Reference,
        Some(other) => {
            return Err(Error::BadSidecar {
                path: origin.to_string(),
                reason: format!("unknown role {other:?}"),
            })
        }
    };
    let seed = match &meta.seed {
        None => None,
        Some(text) => {
            let digits = text.strip_prefix("0x").unwrap_or(text);
            Some(u64::from_str_radix(digits, 16).map_err(|_| Error::BadSidecar {
                path: origin.to_string(),
                reason: format!("seed must be a hex string, got {text:?}"),
            })?)
        }
    };

    let mut pixels = Vec::with_capacity(width * height);
    for pair in data.chunks_exact(2) {
        let v = u16::from_be_bytes([pair[0], pair[1]]);
        if u32::from(v) > max_dn {
            return Err(Error::ValueExceedsBitDepth {
                value: u32::from(v),
                bit_depth: meta.bit_depth,
                max: max_dn,
            });
        }
        pixels.push(v);
    }

    let injection = meta.frequency_hz.map(|frequency_hz| InjectionMeta {
        frequency_hz,
        amplitude_v: meta.amplitude_v.unwrap_or(0.0),
        phase_rad: meta.phase_rad.unwrap_or(0.0),
    });

    Ok(RawFrame {
        width,
        height,
        bit_depth: meta.bit_depth,
        bayer_pattern: meta.bayer_pattern,
        pixels,
        frame_index: meta.frame_index,
        meta: FrameMeta {
            seed,
            injection,
            black_level: meta.black_level,
            role,
        },
    })
}

/// Sidecar path for a frame file: same name, `.toml` extension.
pub fn sidecar_path(pgm_path: &Path) -> PathBuf {
    pgm_path.with_extension("toml")
}

/// Write `frame` as `path` plus its sidecar.
pub fn save_frame(frame: &RawFrame, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pgm(frame))?;
    std::fs::write(sidecar_path(path), encode_sidecar(frame)?)?;
    Ok(())
}

/// Load a frame written by [`save_frame`].
pub fn load_frame(path: &Path) -> Result<RawFrame> {
    let sidecar = sidecar_path(path);
    if !sidecar.exists() {
        return Err(Error::MissingSidecar(path.display().to_string()));
    }
    let pgm = std::fs::read(path)?;
    let meta = std::fs::read_to_string(&sidecar)?;
    decode_frame(&pgm, &meta, &path.display().to_string())
}
