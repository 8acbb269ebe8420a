//! Piloerection intensity and goosebump event detection.
//!
//! Frames are normalized for illumination, band-passed with a difference of
//! Gaussians tuned to follicle-scale texture, and reduced to one RMS energy
//! per frame. A per-subject robust baseline turns that energy into a
//! z-score, and events are cut from the z trace with a two-level
//! (hysteresis) threshold, a merge gap, and a minimum duration.

mod bandpass;
mod calibrate;
mod detector;
mod streaming;
mod trace_io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_io::{FrameError, Micros};

pub use bandpass::{
    bandpass_frame, frame_intensity, intensity_trace, BandpassFilter, FilteredImage, IntensityExtractor,
};
pub use calibrate::{apply_zscore, calibrate, CalibrationProfile, MIN_CALIBRATION_SAMPLES};
pub use detector::detect_events;
pub use streaming::{Edge, StreamingDetector};
pub use trace_io::{read_events_json, read_intensity_csv, write_events_json, write_intensity_csv, EventList};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("band-pass requires 0 < sigma_lo < sigma_hi (got {lo}, {hi})")]
    SigmaOrder { lo: f64, hi: f64 },
    #[error("calibration needs at least {needed} samples inside the window, found {found}")]
    TooFewSamples { found: usize, needed: usize },
    #[error("sample {index} at {timestamp_us} us is not after its predecessor")]
    Unordered { index: usize, timestamp_us: Micros },
    #[error("sample {index} has no z-score; calibrate first")]
    Uncalibrated { index: usize },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("trace I/O: {0}")]
    Io(String),
}

/// One point of the intensity-vs-time trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensitySample {
    pub timestamp_us: Micros,
    pub raw_energy: f64,
    pub z: Option<f64>,
}

impl IntensitySample {
    pub fn scored(timestamp_us: Micros, z: f64) -> Self {
        Self {
            timestamp_us,
            raw_energy: 0.0,
            z: Some(z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// z level that opens a candidate.
    pub theta_on: f64,
    /// z level below which an open candidate closes.
    pub theta_off: f64,
    /// Seconds; shorter (merged) candidates are dropped.
    pub min_duration: f64,
    /// Seconds; candidates closer than this are merged.
    pub merge_gap: f64,
    pub band_sigma_lo: f64,
    pub band_sigma_hi: f64,
    /// Consecutive samples at or above `theta_on` needed to open a
    /// candidate; the onset is the first of them. 1 opens on any single
    /// crossing, which lets lone noise frames merge into real events.
    pub confirm_samples: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            theta_on: 3.0,
            theta_off: 1.5,
            min_duration: 1.0,
            merge_gap: 0.5,
            band_sigma_lo: 2.0,
            band_sigma_hi: 8.0,
            confirm_samples: 2,
        }
    }
}

pub(crate) fn seconds_to_micros(s: f64) -> Micros {
    (s * 1e6).round() as Micros
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        let bad = |m: &str| Err(DetectError::InvalidConfig(m.to_string()));
        if !(self.theta_off < self.theta_on) {
            return bad("theta_off must be below theta_on");
        }
        if !(self.min_duration > 0.0) {
            return bad("min_duration must be positive");
        }
        if !(self.merge_gap >= 0.0) {
            return bad("merge_gap must be non-negative");
        }
        if !(self.band_sigma_lo > 0.0 && self.band_sigma_lo < self.band_sigma_hi) {
            return bad("band sigmas must satisfy 0 < lo < hi");
        }
        if self.confirm_samples == 0 {
            return bad("confirm_samples must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn min_duration_us(&self) -> Micros {
        seconds_to_micros(self.min_duration)
    }

    pub(crate) fn merge_gap_us(&self) -> Micros {
        seconds_to_micros(self.merge_gap)
    }
}

/// A detected goosebump episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoosebumpEvent {
    pub onset_us: Micros,
    pub offset_us: Micros,
    /// Peak z inside the event.
    pub severity: f64,
    pub mean_z: f64,
}

impl GoosebumpEvent {
    pub fn duration_us(&self) -> Micros {
        self.offset_us - self.onset_us
    }
}

/// Checks strict timestamp order and that every sample carries a z-score.
pub(crate) fn scored_values(samples: &[IntensitySample]) -> Result<Vec<(Micros, f64)>, DetectError> {
    let mut out = Vec::with_capacity(samples.len());
    for (index, s) in samples.iter().enumerate() {
        if let Some(&(prev, _)) = out.last() {
            if s.timestamp_us <= prev {
                return Err(DetectError::Unordered {
                    index,
                    timestamp_us: s.timestamp_us,
                });
            }
        }
        let z = s.z.ok_or(DetectError::Uncalibrated { index })?;
        out.push((s.timestamp_us, z));
    }
    Ok(out)
}
