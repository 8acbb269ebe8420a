use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use frisson_core::eeg_analysis::{AnalysisConfig, EegSynthConfig};
use frisson_core::frame_io::{Roi, SynthConfig};
use frisson_core::pilo_detect::DetectorConfig;

use crate::CliError;

pub const SEED_ENV: &str = "FRISSON_SEED";

/// Marker streaming, and the receiver clock used when simulating one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamConfig {
    /// Where `stream` connects.
    pub connect: String,
    /// Where `receive` listens.
    pub listen: String,
    /// Replay speed relative to real time; 0 sends as fast as possible.
    pub speed: f64,
    pub sync_interval_s: f64,
    /// Simulated receiver clock: `offset + (1 + drift) * sender time`.
    pub receiver_offset_us: i64,
    pub receiver_drift: f64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            connect: "127.0.0.1:7878".into(),
            listen: "127.0.0.1:7878".into(),
            speed: 1.0,
            sync_interval_s: 1.0,
            receiver_offset_us: 0,
            receiver_drift: 0.0,
        }
    }
}

impl StreamConfig {
    /// The receiver time a sender timestamp lands on under the simulated clock.
    pub fn true_receiver_us(&self, sender_us: f64) -> f64 {
        self.receiver_offset_us as f64 + (1.0 + self.receiver_drift) * sender_us
    }
}

/// File layout of one session; relative paths resolve against `--out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub frames_dir: PathBuf,
    pub ground_truth: PathBuf,
    pub events: PathBuf,
    pub intensity_csv: PathBuf,
    pub intensity_svg: PathBuf,
    pub marker_log: PathBuf,
    pub sent_log: PathBuf,
    pub stream_events: PathBuf,
    pub eeg_csv: PathBuf,
    pub eeg_sidecar: PathBuf,
    pub report_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            frames_dir: "frames".into(),
            ground_truth: "ground_truth.json".into(),
            events: "events.json".into(),
            intensity_csv: "intensity.csv".into(),
            intensity_svg: "intensity.svg".into(),
            marker_log: "markers.log".into(),
            sent_log: "markers_sent.log".into(),
            stream_events: "stream_events.json".into(),
            eeg_csv: "eeg.csv".into(),
            eeg_sidecar: "eeg.json".into(),
            report_dir: "report".into(),
        }
    }
}

impl Paths {
    fn all(&self) -> [(&'static str, &PathBuf); 11] {
        [
            ("frames_dir", &self.frames_dir),
            ("ground_truth", &self.ground_truth),
            ("events", &self.events),
            ("intensity_csv", &self.intensity_csv),
            ("intensity_svg", &self.intensity_svg),
            ("marker_log", &self.marker_log),
            ("sent_log", &self.sent_log),
            ("stream_events", &self.stream_events),
            ("eeg_csv", &self.eeg_csv),
            ("eeg_sidecar", &self.eeg_sidecar),
            ("report_dir", &self.report_dir),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub synth: SynthConfig,
    /// Whole frame when absent.
    pub roi: Option<Roi>,
    pub calib_window_s: f64,
    pub detector: DetectorConfig,
    pub stream: StreamConfig,
    pub eeg: EegSynthConfig,
    pub analysis: AnalysisConfig,
    pub paths: Paths,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            roi: None,
            calib_window_s: 5.0,
            detector: DetectorConfig::default(),
            stream: StreamConfig::default(),
            eeg: EegSynthConfig::default(),
            analysis: AnalysisConfig::default(),
            paths: Paths::default(),
        }
    }
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: SessionConfig = serde_json::from_str(text).map_err(|e| CliError::input("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))?;
        Self::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// `FRISSON_SEED` replaces both the frame and EEG synthesis seeds.
    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<(), CliError> {
        if let Some(v) = value {
            let seed: u64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))?;
            self.synth.rng_seed = seed;
            self.eeg.rng_seed = seed;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.synth.validate()?;
        self.detector.validate()?;
        self.analysis.validate()?;
        if !(self.calib_window_s > 0.0) {
            return Err(CliError::Input("config: calib_window_s must be positive".into()));
        }
        if !(self.stream.sync_interval_s > 0.0) || !(self.stream.speed >= 0.0) {
            return Err(CliError::Input(
                "config: stream.sync_interval_s must be positive and stream.speed non-negative".into(),
            ));
        }
        if !(self.stream.receiver_drift.abs() < 0.1) {
            return Err(CliError::Input(
                "config: |stream.receiver_drift| must be below 0.1".into(),
            ));
        }
        let all = self.paths.all();
        for (i, (a, pa)) in all.iter().enumerate() {
            for (b, pb) in &all[i + 1..] {
                if pa == pb {
                    return Err(CliError::Input(format!(
                        "config: paths.{a} and paths.{b} are both {}",
                        pa.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
