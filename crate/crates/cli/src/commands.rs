use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::mpsc::sync_channel;
use std::time::Instant;

use serde::Serialize;

use frisson_core::eeg_analysis::{
    bandpass_filter, epoch_events, erp_average, load_recording, map_events, phase_summary, reject_artifacts,
    synth_recording, write_recording, EegRecording, Erp, MappedEvent, PhaseSummary, RejectedEvent,
};
use frisson_core::frame_io::{
    synth_frames as synth_frame_sequence, write_frames, EventInterval, FrameStream, GroundTruth,
};
use frisson_core::live::{run_live, LiveConfig, LiveReport};
use frisson_core::marker_sync::{
    check_sequence, fit_clock_map, receive_markers, ClockMap, MarkerLog, MarkerSender, Pacer, ReceiveReport,
    SimulatedClock,
};
use frisson_core::pilo_detect::{
    apply_zscore, calibrate, detect_events, intensity_trace, read_events_json, write_events_json, write_intensity_csv,
    DetectError, GoosebumpEvent, IntensityExtractor, IntensitySample,
};

use crate::svg::{intensity_svg, summary_svg};
use crate::{CliError, SessionConfig};

/// A config bound to an output directory.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: SessionConfig,
    pub out: PathBuf,
}

impl Session {
    pub fn new(config: SessionConfig, out: impl Into<PathBuf>) -> Self {
        Self {
            config,
            out: out.into(),
        }
    }

    /// Resolves a configured path against the output directory.
    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out.join(p)
        }
    }

    pub fn write_effective_config(&self) -> Result<(), CliError> {
        write_file(
            &self.out.join("effective_config.json"),
            self.config.to_json().as_bytes(),
        )
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::input(parent.display(), e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::input(path.display(), e))
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn create(path: &Path) -> Result<File, CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::input(parent.display(), e))?;
    }
    File::create(path).map_err(|e| CliError::input(path.display(), e))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(path.display(), e))
}

/// Writes the synthetic frame directory and `ground_truth.json`.
pub fn synth_frames(s: &Session) -> Result<GroundTruth, CliError> {
    let (frames, truth) = synth_frame_sequence(&s.config.synth)?;
    let dir = s.path(&s.config.paths.frames_dir);
    if dir.exists() {
        // stale frames from another config would silently mix in
        for entry in fs::read_dir(&dir).map_err(|e| CliError::input(dir.display(), e))? {
            let p = entry.map_err(|e| CliError::input(dir.display(), e))?.path();
            if p.extension().is_some_and(|x| x == "pgm") {
                fs::remove_file(&p).map_err(|e| CliError::input(p.display(), e))?;
            }
        }
    }
    write_frames(&dir, &frames)?;
    write_file(&s.path(&s.config.paths.ground_truth), &json(&truth))?;
    log::info!("wrote {} frames to {}", frames.len(), dir.display());
    Ok(truth)
}

#[derive(Debug, Clone)]
pub struct DetectOutput {
    pub samples: Vec<IntensitySample>,
    pub events: Vec<GoosebumpEvent>,
}

/// Offline detection over the frame directory.
pub fn detect(s: &Session) -> Result<DetectOutput, CliError> {
    let cfg = &s.config;
    let frames_dir = s.path(&cfg.paths.frames_dir);
    let frames: Vec<_> = FrameStream::open(&frames_dir)?.collect::<Result<_, _>>()?;
    let raw = intensity_trace(&frames, cfg.roi, &cfg.detector)?;
    let profile = calibrate(&raw, cfg.calib_window_s)?;
    let samples = apply_zscore(&raw, &profile);
    let events = detect_events(&samples, &cfg.detector)?;

    let events_path = s.path(&cfg.paths.events);
    let mut buf = Vec::new();
    write_events_json(&mut buf, &events)?;
    write_file(&events_path, &buf)?;
    let mut buf = Vec::new();
    write_intensity_csv(&mut buf, &samples)?;
    write_file(&s.path(&cfg.paths.intensity_csv), &buf)?;
    write_file(
        &s.path(&cfg.paths.intensity_svg),
        intensity_svg(&samples, &events, cfg.detector.theta_on).as_bytes(),
    )?;
    log::info!("{} events from {} frames", events.len(), frames.len());
    Ok(DetectOutput { samples, events })
}

/// Live marker emission to `addr`: frames are read and scored on a
/// producer thread while this thread paces, detects and writes lines.
pub fn stream(s: &Session, addr: &str) -> Result<LiveReport, CliError> {
    let cfg = &s.config;
    let mut frames = FrameStream::open(s.path(&cfg.paths.frames_dir))?;
    let first = frames.next().expect("FrameStream::open guarantees a frame")?;
    let extractor = IntensityExtractor::new(cfg.roi.unwrap_or_else(|| first.full_roi()), &cfg.detector)?;
    let mut local = create(&s.path(&cfg.paths.sent_log))?;

    let sock = TcpStream::connect(addr).map_err(|e| CliError::Transport(format!("connect {addr}: {e}")))?;
    let _ = sock.set_nodelay(true);

    let (tx, rx) = sync_channel::<Result<IntensitySample, DetectError>>(64);
    let producer = std::thread::spawn(move || {
        for frame in std::iter::once(Ok(first)).chain(frames) {
            let sample = frame.map_err(DetectError::from).and_then(|f| extractor.sample(&f));
            let failed = sample.is_err();
            if tx.send(sample).is_err() || failed {
                break;
            }
        }
    });

    let live = LiveConfig {
        detector: cfg.detector,
        calib_window_s: cfg.calib_window_s,
        sync_interval_s: cfg.stream.sync_interval_s,
    };
    let mut sender = MarkerSender::new(&sock);
    let pacer = Pacer::new(Instant::now(), cfg.stream.speed);
    let result = run_live(rx.iter(), &live, &pacer, &mut sender, &mut local);
    drop(rx);
    producer.join().expect("frame producer panicked");
    let report = result?;
    sock.shutdown(Shutdown::Write)
        .map_err(|e| CliError::Transport(format!("close {addr}: {e}")))?;

    let mut buf = Vec::new();
    write_events_json(&mut buf, &report.events)?;
    write_file(&s.path(&cfg.paths.stream_events), &buf)?;
    log::info!(
        "sent {} marker lines, {} events",
        report.messages.len(),
        report.events.len()
    );
    Ok(report)
}

/// Accepts one marker connection on `listener` and logs it under the
/// simulated receiver clock from the config.
pub fn receive_on(s: &Session, listener: TcpListener) -> Result<ReceiveReport, CliError> {
    let cfg = &s.config.stream;
    let (conn, peer) = listener
        .accept()
        .map_err(|e| CliError::Transport(format!("accept: {e}")))?;
    let speed = if cfg.speed > 0.0 { cfg.speed } else { 1.0 };
    let clock = SimulatedClock {
        origin: Instant::now(),
        offset_us: cfg.receiver_offset_us as f64,
        rate: speed * (1.0 + cfg.receiver_drift),
    };
    let log_path = s.path(&s.config.paths.marker_log);
    let log = BufWriter::new(create(&log_path)?);
    let report = receive_markers(conn, &clock, log).map_err(|e| CliError::Transport(format!("{peer}: {e}")))?;
    let parsed = MarkerLog::read(BufReader::new(open(&log_path)?))?;
    if let Err(e) = check_sequence(&parsed.messages()) {
        log::warn!("marker stream from {peer}: {e}");
    }
    log::info!("logged {} lines from {peer}", report.lines);
    Ok(report)
}

pub fn receive(s: &Session, addr: &str) -> Result<ReceiveReport, CliError> {
    let listener = TcpListener::bind(addr).map_err(|e| CliError::Transport(format!("bind {addr}: {e}")))?;
    receive_on(s, listener)
}

/// Ground-truth intervals in seconds from the first EEG sample, placed with
/// the simulated (true) receiver clock.
pub fn ground_truth_on_eeg(s: &Session, truth: &GroundTruth) -> Vec<EventInterval> {
    let to_eeg = |t_s: f64| (s.config.stream.true_receiver_us(t_s * 1e6) - s.config.eeg.t0_us as f64) / 1e6;
    truth
        .events
        .iter()
        .map(|e| EventInterval::new(to_eeg(e.onset_s), to_eeg(e.offset_s)))
        .collect()
}

/// Synthetic EEG with bursts during the ground-truth events.
pub fn synth_eeg(s: &Session) -> Result<EegRecording, CliError> {
    let gt_path = s.path(&s.config.paths.ground_truth);
    let truth: GroundTruth =
        serde_json::from_reader(BufReader::new(open(&gt_path)?)).map_err(|e| CliError::input(gt_path.display(), e))?;
    let rec = synth_recording(&s.config.eeg, &ground_truth_on_eeg(s, &truth))?;
    write_recording(
        &rec,
        s.path(&s.config.paths.eeg_csv),
        s.path(&s.config.paths.eeg_sidecar),
    )?;
    Ok(rec)
}

#[derive(Debug, Clone, Serialize)]
struct EpochEntry {
    event_index: usize,
    onset_us: i64,
    offset_us: i64,
    status: &'static str,
    reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct EpochsReport {
    clock_map: ClockMap,
    window_s: (f64, f64),
    baseline_s: (f64, f64),
    amp_limit_uv: f64,
    kept: usize,
    rejected: usize,
    skipped: usize,
    epochs: Vec<EpochEntry>,
}

#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    pub clock_map: ClockMap,
    pub events: Vec<MappedEvent>,
    pub erp: Erp,
    pub summary: PhaseSummary,
}

fn erp_csv(erp: &Erp, names: &[String], window_start: f64, fs: f64) -> Vec<u8> {
    let mut out = String::from("channel");
    for i in 0..erp.mean.ncols() {
        out.push(',');
        out.push_str(&(window_start + i as f64 / fs).to_string());
    }
    out.push('\n');
    for (name, row) in names.iter().zip(erp.mean.rows()) {
        out.push_str(name);
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Event-locked analysis of the EEG using the logged SYNC beats for the
/// clock map. Fails with exit code 4 when no epoch survives.
pub fn analyze(s: &Session) -> Result<AnalysisOutput, CliError> {
    let cfg = &s.config;
    let a = &cfg.analysis;
    let rec = load_recording(s.path(&cfg.paths.eeg_csv), s.path(&cfg.paths.eeg_sidecar))?;
    let events = read_events_json(BufReader::new(open(&s.path(&cfg.paths.events))?))?;
    let log = MarkerLog::read(BufReader::new(open(&s.path(&cfg.paths.marker_log))?))?;
    let clock_map = fit_clock_map(&log.sync_pairs())?;
    let mapped = map_events(&events, &clock_map);

    let filtered = bandpass_filter(&rec, a.filter_lo_hz, a.filter_hi_hz)?;
    let mut set = epoch_events(&filtered, &mapped, a.window_s, a.baseline_s);
    reject_artifacts(&mut set.epochs, a.amp_limit_uv);

    let mut excluded: Vec<RejectedEvent> = Vec::new();
    let mut entries: Vec<EpochEntry> = Vec::new();
    for sk in &set.skipped {
        excluded.push(RejectedEvent {
            event_index: sk.event_index,
            reason: sk.reason.clone(),
        });
    }
    for e in &set.epochs {
        if let Some(r) = &e.rejected {
            excluded.push(RejectedEvent {
                event_index: e.event_index,
                reason: r.clone(),
            });
        }
    }
    for (i, ev) in mapped.iter().enumerate() {
        let (status, reason) = if let Some(sk) = set.skipped.iter().find(|k| k.event_index == i) {
            ("skipped", Some(sk.reason.clone()))
        } else {
            match set
                .epochs
                .iter()
                .find(|e| e.event_index == i)
                .and_then(|e| e.rejected.clone())
            {
                Some(r) => ("rejected", Some(r)),
                None => ("kept", None),
            }
        };
        entries.push(EpochEntry {
            event_index: i,
            onset_us: ev.onset_us,
            offset_us: ev.offset_us,
            status,
            reason,
        });
    }
    let count = |k: &str| entries.iter().filter(|e| e.status == k).count();
    let report = EpochsReport {
        clock_map,
        window_s: a.window_s,
        baseline_s: a.baseline_s,
        amp_limit_uv: a.amp_limit_uv,
        kept: count("kept"),
        rejected: count("rejected"),
        skipped: count("skipped"),
        epochs: entries,
    };
    let dir = s.path(&cfg.paths.report_dir);
    write_file(&dir.join("epochs_report.json"), &json(&report))?;
    write_file(&dir.join("clock_map.json"), &json(&clock_map))?;

    if report.kept == 0 {
        return Err(CliError::EmptyAnalysis(format!(
            "none of {} events gave a usable epoch ({} skipped, {} rejected)",
            mapped.len(),
            report.skipped,
            report.rejected
        )));
    }
    let erp = erp_average(&set.epochs)?;
    let summary = phase_summary(&filtered, &mapped, &a.bands, &a.groups, &excluded)?;

    write_file(
        &dir.join("erp.csv"),
        &erp_csv(&erp, &rec.channel_names, a.window_s.0, rec.sampling_rate),
    )?;
    write_file(&dir.join("phase_summary.json"), &json(&summary))?;
    write_file(
        &dir.join("summary.svg"),
        summary_svg(&summary, &a.bands, &a.groups).as_bytes(),
    )?;
    Ok(AnalysisOutput {
        clock_map,
        events: mapped,
        erp,
        summary,
    })
}
