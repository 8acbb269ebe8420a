//! Event-locked EEG analysis.
//!
//! A recording is a channels × samples matrix in microvolts on the receiver
//! clock. Goosebump events (mapped onto that clock) cut fixed windows that
//! are baseline-corrected, screened for artifacts and averaged into an ERP;
//! separately, Welch band power is summarized per phase around each event
//! and per scalp region.

mod epochs;
mod filter;
mod io;
mod montage;
mod spectral;
mod summary;
mod synth;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marker_sync::ClockMap;
use crate::pilo_detect::GoosebumpEvent;

pub use epochs::{
    epoch_events, erp_average, reject_artifacts, Epoch, EpochSet, Erp, SkippedEvent, WINDOW_OUT_OF_BOUNDS,
};
pub use filter::{bandpass_filter, filtfilt_channel, Butterworth};
pub use io::{load_recording, write_recording, Sidecar};
pub use montage::{biosemi64, channel_group, ChannelGroup};
pub use spectral::{band_power, welch_psd, Band, Psd};
pub use summary::{phase_summary, Phase, PhaseSummary, RejectedEvent, PHASE_SECONDS};
pub use synth::{synth_recording, BurstSpec, EegSynthConfig};

#[derive(Debug, Error)]
pub enum EegError {
    #[error("{0}")]
    Io(String),
    #[error("header lists {header} channels but the sidecar names {sidecar}")]
    ChannelMismatch { header: usize, sidecar: usize },
    #[error("header column {col} is `{header}` but the sidecar names `{sidecar}`")]
    ChannelName {
        col: usize,
        header: String,
        sidecar: String,
    },
    #[error("row {row}: sample spacing deviates from 1/fs by {deviation_s:e} s")]
    NonUniformSampling { row: usize, deviation_s: f64 },
    #[error("row {row}, column {col}: `{value}` is not a number")]
    NonNumeric { row: usize, col: usize, value: String },
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("band {lo}-{hi} Hz must satisfy 0 < lo < hi < fs/2 = {nyquist} Hz")]
    BandOutsideNyquist { lo: f64, hi: f64, nyquist: f64 },
    #[error("segment of {samples} samples is shorter than {needed}")]
    SegmentTooShort { samples: usize, needed: usize },
    #[error("no unrejected epochs to average")]
    NoEpochs,
    #[error("unknown channel group `{0}`")]
    UnknownGroup(String),
    #[error("no channels belong to the {0} group")]
    EmptyGroup(ChannelGroup),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EegRecording {
    pub sampling_rate: f64,
    pub channel_names: Vec<String>,
    /// channels × samples, microvolts.
    pub samples: Array2<f64>,
    /// Receiver-clock microseconds of the first sample.
    pub t0_us: i64,
    pub subject_id: String,
}

impl EegRecording {
    pub fn new(
        sampling_rate: f64,
        channel_names: Vec<String>,
        samples: Array2<f64>,
        t0_us: i64,
        subject_id: String,
    ) -> Result<Self, EegError> {
        if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
            return Err(EegError::InvalidRecording(format!("sampling rate {sampling_rate}")));
        }
        if channel_names.len() != samples.nrows() {
            return Err(EegError::InvalidRecording(format!(
                "{} names for {} channel rows",
                channel_names.len(),
                samples.nrows()
            )));
        }
        Ok(Self {
            sampling_rate,
            channel_names,
            samples,
            t0_us,
            subject_id,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    /// Nearest sample index (possibly out of range) for a receiver time.
    pub fn sample_at(&self, t_us: i64) -> i64 {
        ((t_us - self.t0_us) as f64 * self.sampling_rate / 1e6).round() as i64
    }

    pub fn seconds_to_samples(&self, s: f64) -> i64 {
        (s * self.sampling_rate).round() as i64
    }
}

/// An event on the receiver (EEG) clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedEvent {
    pub onset_us: i64,
    pub offset_us: i64,
}

impl MappedEvent {
    pub fn duration_s(&self) -> f64 {
        (self.offset_us - self.onset_us) as f64 / 1e6
    }
}

pub fn map_events(events: &[GoosebumpEvent], map: &ClockMap) -> Vec<MappedEvent> {
    events
        .iter()
        .map(|e| MappedEvent {
            onset_us: map.map_time(e.onset_us),
            offset_us: map.map_time(e.offset_us),
        })
        .collect()
}

/// Analysis parameters with their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub filter_lo_hz: f64,
    pub filter_hi_hz: f64,
    /// Seconds relative to onset.
    pub window_s: (f64, f64),
    pub baseline_s: (f64, f64),
    pub amp_limit_uv: f64,
    pub bands: Vec<Band>,
    pub groups: Vec<ChannelGroup>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            filter_lo_hz: 1.0,
            filter_hi_hz: 45.0,
            window_s: (-5.0, 5.0),
            baseline_s: (-5.0, -4.0),
            amp_limit_uv: 100.0,
            bands: Band::standard(),
            groups: ChannelGroup::ALL.to_vec(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), EegError> {
        let bad = |m: &str| Err(EegError::InvalidConfig(m.to_string()));
        let (w0, w1) = self.window_s;
        let (b0, b1) = self.baseline_s;
        if !(w0 < w1) {
            return bad("window start must precede its end");
        }
        if !(w0 <= b0 && b0 < b1 && b1 <= w1) {
            return bad("baseline must lie inside the window");
        }
        if !(self.amp_limit_uv > 0.0) {
            return bad("amp_limit_uv must be positive");
        }
        if self.bands.is_empty() {
            return bad("at least one band is required");
        }
        for b in &self.bands {
            if !(b.lo_hz >= 0.0 && b.lo_hz < b.hi_hz) {
                return bad("every band needs 0 <= lo < hi");
            }
        }
        if self.groups.is_empty() {
            return bad("at least one channel group is required");
        }
        Ok(())
    }
}
