//! Run configuration files.
//!
//! A run config is a TOML document with a `[sensor]` section (all keys
//! optional, defaulting to the stock sensor), a `[sweep]` section, and
//! an optional `out_dir`. Unknown keys are rejected everywhere.
//!
//! ```toml
//! out_dir = "runs/example"
//!
//! [sensor]
//! width = 1280
//! height = 800
//! bit_depth = 10
//! black_level = 64
//! bayer_pattern = "RGGB"
//! frame_rate = 30.0
//! v_blank_rows = 20
//! read_noise_sigma = 2.0
//! row_fpn_sigma = 0.5
//! col_fpn_sigma = 0.5
//! seed = 42
//!
//! [sensor.coupling]
//! knots = [[1000.0, 0.5], [10000.0, 2.0], [100000.0, 0.5]]
//!
//! [sweep]
//! f_start = 0.0
//! f_stop = 100000.0
//! amplitude_v = 2.0
//! frames_per_step = 8
//! reference_frames = 16
//! analysis_plane = "g1"
//! run_seed = 1
//!
//! [sweep.schedule]
//! mode = "linear"
//! f_step = 1000.0
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor::SensorConfig;
use crate::sweep::SweepConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    /// Output directory; a CLI `--out` flag takes precedence.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub sensor: SensorConfig,
    pub sweep: SweepConfig,
}

/// Parse and validate a run configuration document.
pub fn parse_run_config(text: &str) -> Result<RunConfigFile> {
    let config: RunConfigFile =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config parse: {e}")))?;
    config.sensor.validate()?;
    config.sweep.validate()?;
    Ok(config)
}
