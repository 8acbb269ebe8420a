//! Online session: raw intensity samples in, marker lines out.
//!
//! The first `calib_window` seconds are buffered until the baseline can be
//! fitted, then replayed through the streaming detector; after that every
//! sample is scored and pushed as it arrives. SYNC beats go out on the
//! stream clock regardless of calibration state.

use std::io::{self, Write};

use thiserror::Error;

use crate::frame_io::Micros;
use crate::marker_sync::{MarkerKind, MarkerMessage, MarkerSender, Pacer, Severity, SyncSchedule};
use crate::pilo_detect::{
    apply_zscore, calibrate, seconds_to_micros, CalibrationProfile, DetectError, DetectorConfig, Edge, GoosebumpEvent,
    IntensitySample, StreamingDetector,
};

#[derive(Debug, Error)]
pub enum LiveError {
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("marker transport: {0}")]
    Transport(#[source] io::Error),
    #[error("local marker log: {0}")]
    LocalLog(#[source] io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct LiveConfig {
    pub detector: DetectorConfig,
    pub calib_window_s: f64,
    pub sync_interval_s: f64,
}

#[derive(Debug, Clone)]
pub struct LiveReport {
    pub profile: CalibrationProfile,
    /// Scored trace, in arrival order.
    pub samples: Vec<IntensitySample>,
    pub events: Vec<GoosebumpEvent>,
    pub messages: Vec<MarkerMessage>,
}

struct Session<'a, W: Write> {
    sender: &'a mut MarkerSender<W>,
    local_log: &'a mut dyn Write,
    messages: Vec<MarkerMessage>,
    events: Vec<GoosebumpEvent>,
}

impl<W: Write> Session<'_, W> {
    fn send(&mut self, kind: MarkerKind, t: Micros, severity: Severity) -> Result<(), LiveError> {
        let m = self.sender.send(kind, t, severity).map_err(LiveError::Transport)?;
        self.local_log
            .write_all(&crate::marker_sync::encode_marker(&m))
            .and_then(|_| self.local_log.flush())
            .map_err(LiveError::LocalLog)?;
        self.messages.push(m);
        Ok(())
    }

    fn edges(&mut self, edges: Vec<Edge>) -> Result<(), LiveError> {
        for e in edges {
            match e {
                Edge::On { onset_us, peak } => self.send(MarkerKind::On, onset_us, Severity::from_z(peak))?,
                Edge::Off(ev) => {
                    self.send(MarkerKind::Off, ev.offset_us, Severity::from_z(ev.severity))?;
                    self.events.push(ev);
                }
            }
        }
        Ok(())
    }
}

/// Drives one marker connection to completion. Every line written to the
/// transport is also appended to `local_log`, so a failed connection still
/// leaves a record of what was sent.
pub fn run_live<I, W>(
    samples: I,
    config: &LiveConfig,
    pacer: &Pacer,
    sender: &mut MarkerSender<W>,
    local_log: &mut dyn Write,
) -> Result<LiveReport, LiveError>
where
    I: IntoIterator<Item = Result<IntensitySample, DetectError>>,
    W: Write,
{
    let mut detector = StreamingDetector::new(&config.detector)?;
    let mut schedule = SyncSchedule::new(seconds_to_micros(config.sync_interval_s).max(1));
    let window_us = seconds_to_micros(config.calib_window_s);
    let mut session = Session {
        sender,
        local_log,
        messages: Vec::new(),
        events: Vec::new(),
    };
    let mut pending: Vec<IntensitySample> = Vec::new();
    let mut profile: Option<CalibrationProfile> = None;
    let mut scored: Vec<IntensitySample> = Vec::new();

    for sample in samples {
        let sample = sample?;
        let t = sample.timestamp_us;
        pacer.wait_until(t);
        if schedule.due(t) {
            session.send(MarkerKind::Sync, t, Severity::ZERO)?;
        }
        match &profile {
            Some(p) => {
                let s = apply_zscore(&[sample], p)[0];
                session.edges(detector.push(&s)?)?;
                scored.push(s);
            }
            None => {
                pending.push(sample);
                if t >= window_us {
                    let p = calibrate(&pending, config.calib_window_s)?;
                    for s in apply_zscore(&pending, &p) {
                        session.edges(detector.push(&s)?)?;
                        scored.push(s);
                    }
                    pending.clear();
                    profile = Some(p);
                }
            }
        }
    }

    let profile = match profile {
        Some(p) => p,
        None => {
            // stream ended inside the calibration window
            let p = calibrate(&pending, config.calib_window_s)?;
            for s in apply_zscore(&pending, &p) {
                session.edges(detector.push(&s)?)?;
                scored.push(s);
            }
            p
        }
    };
    session.edges(detector.finish())?;

    Ok(LiveReport {
        profile,
        samples: scored,
        events: session.events,
        messages: session.messages,
    })
}
