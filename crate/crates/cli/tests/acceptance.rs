//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line to
//! stderr (bypassing libtest capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::net::TcpListener;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::thread;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use frisson_cli::commands::{analyze, detect, receive_on, stream, synth_eeg, synth_frames};
use frisson_cli::{Session, SessionConfig};
use frisson_core::eeg_analysis::{
    bandpass_filter, epoch_events, erp_average, synth_recording, welch_psd, ChannelGroup, EegSynthConfig, Epoch,
    MappedEvent, Phase,
};
use frisson_core::frame_io::{synth_frames as synth_frame_sequence, EventInterval, Frame, SynthConfig};
use frisson_core::marker_sync::{
    decode_marker, encode_marker, fit_clock_map, MarkerKind, MarkerMessage, Severity, MAX_LINE_BYTES,
};
use frisson_core::pilo_detect::{
    apply_zscore, calibrate, detect_events, intensity_trace, DetectorConfig, Edge, GoosebumpEvent, IntensitySample,
    StreamingDetector,
};

fn report(criterion: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{criterion}: {verdict} ({detail})");
}

const FRAME_US: f64 = 1e6 / 30.0;
const CALIB_S: f64 = 5.0;

/// 60 s at 30 fps with 2-4 events; bump amplitude between 3x and 8x noise.
fn event_session(seed: u64) -> SynthConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let n = rng.random_range(2..=4);
    let mut events = Vec::new();
    let mut t = 8.0;
    for _ in 0..n {
        let on = t + rng.random_range(0.0..3.0);
        let off = on + rng.random_range(2.0..6.0);
        events.push(EventInterval::new(on, off));
        t = off + 4.0;
    }
    SynthConfig {
        duration: 60.0,
        events,
        bump_amplitude: rng.random_range(0.03..0.08),
        noise_sigma: 0.01,
        rng_seed: seed,
        ..SynthConfig::default()
    }
}

fn quiet_session(seed: u64) -> SynthConfig {
    SynthConfig {
        duration: 60.0,
        events: vec![],
        rng_seed: 500 + seed,
        ..SynthConfig::default()
    }
}

fn run_detector(frames: &[Frame]) -> Vec<GoosebumpEvent> {
    let cfg = DetectorConfig::default();
    let trace = intensity_trace(frames, None, &cfg).unwrap();
    let z = apply_zscore(&trace, &calibrate(&trace, CALIB_S).unwrap());
    detect_events(&z, &cfg).unwrap()
}

/// Largest onset/offset error in frames, or `None` if the match is not 1:1.
fn match_error(found: &[GoosebumpEvent], truth: &[EventInterval]) -> Option<f64> {
    if found.len() != truth.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (e, g) in found.iter().zip(truth) {
        worst = worst.max((e.onset_us as f64 - g.onset_s * 1e6).abs() / FRAME_US);
        worst = worst.max((e.offset_us as f64 - g.offset_s * 1e6).abs() / FRAME_US);
    }
    Some(worst)
}

#[test]
fn ac1_detection_fidelity() {
    let mut failures = Vec::new();
    let mut worst_err: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for seed in 0..20 {
        let cfg = event_session(seed);
        let started = Instant::now();
        let (frames, truth) = synth_frame_sequence(&cfg).unwrap();
        let found = run_detector(&frames);
        slowest = slowest.max(started.elapsed());
        match match_error(&found, &truth.events) {
            Some(err) if err <= 2.0 => worst_err = worst_err.max(err),
            Some(err) => failures.push(format!("seed {seed}: error {err:.2} frames")),
            None => failures.push(format!(
                "seed {seed}: {} found, {} true",
                found.len(),
                truth.events.len()
            )),
        }
    }
    let mut false_events = 0;
    for seed in 0..20 {
        let cfg = quiet_session(seed);
        let started = Instant::now();
        let (frames, _) = synth_frame_sequence(&cfg).unwrap();
        false_events += run_detector(&frames).len();
        slowest = slowest.max(started.elapsed());
    }
    let pass = failures.is_empty() && false_events == 0 && slowest < Duration::from_secs(10);
    report(
        "AC1 detection fidelity",
        pass,
        format!(
            "20 event sessions, worst error {worst_err:.2} frames, mismatches {failures:?}; \
             {false_events} false events on 20 quiet sessions; slowest session {:.2} s",
            slowest.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// Jittered piecewise-constant z runs that straddle typical thresholds.
fn random_stream(rng: &mut ChaCha8Rng) -> Vec<IntensitySample> {
    let mut out = Vec::new();
    let mut t = 0u64;
    for _ in 0..rng.random_range(1..60) {
        let z = rng.random_range(-2.0..8.0);
        for _ in 0..rng.random_range(1..50) {
            let jitter = rng.random_range(-0.3..0.3);
            out.push(IntensitySample::scored(t, z + jitter));
            t += rng.random_range(1..4) * 33_333;
        }
    }
    out
}

fn random_detector(rng: &mut ChaCha8Rng) -> DetectorConfig {
    let on = rng.random_range(1.0..5.0);
    DetectorConfig {
        theta_on: on,
        theta_off: on - rng.random_range(0.1..2.0),
        min_duration: rng.random_range(0.05..2.0),
        merge_gap: rng.random_range(0.0..1.5),
        confirm_samples: rng.random_range(1..4),
        ..DetectorConfig::default()
    }
}

#[test]
fn ac2_streaming_offline_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    let mut total_events = 0;
    for _ in 0..100 {
        let samples = random_stream(&mut rng);
        let cfg = random_detector(&mut rng);
        let offline = detect_events(&samples, &cfg).unwrap();
        let mut det = StreamingDetector::new(&cfg).unwrap();
        let mut edges = Vec::new();
        for s in &samples {
            edges.extend(det.push(s).unwrap());
        }
        edges.extend(det.finish());
        let mut open: Option<u64> = None;
        let mut streamed = Vec::new();
        let mut well_formed = true;
        for e in edges {
            match e {
                Edge::On { onset_us, .. } => {
                    well_formed &= open.is_none();
                    open = Some(onset_us);
                }
                Edge::Off(ev) => {
                    well_formed &= open == Some(ev.onset_us);
                    open = None;
                    streamed.push(ev);
                }
            }
        }
        total_events += offline.len();
        if streamed != offline || !well_formed || open.is_some() {
            mismatches += 1;
        }
    }
    report(
        "AC2 streaming/offline equivalence",
        mismatches == 0,
        format!("{mismatches} mismatches over 100 streams, {total_events} offline events"),
    );
    assert_eq!(mismatches, 0);
}

#[test]
fn ac3_brightness_invariance() {
    let mut changed = Vec::new();
    let mut compared = 0;
    for seed in 0..20 {
        let (frames, _) = synth_frame_sequence(&event_session(seed)).unwrap();
        let reference = run_detector(&frames);
        for c in [0.5, 1.5, 2.0] {
            let scaled: Vec<Frame> = frames.iter().map(|f| f.scaled(c)).collect();
            let found = run_detector(&scaled);
            compared += 1;
            let same = found.len() == reference.len()
                && found.iter().zip(&reference).all(|(a, b)| {
                    a.onset_us == b.onset_us
                        && a.offset_us == b.offset_us
                        && (a.severity - b.severity).abs() <= 1e-9 * b.severity.abs().max(1.0)
                        && (a.mean_z - b.mean_z).abs() <= 1e-9 * b.mean_z.abs().max(1.0)
                });
            if !same {
                changed.push(format!("seed {seed} c={c}"));
            }
        }
    }
    report(
        "AC3 brightness invariance",
        changed.is_empty(),
        format!("{compared} scaled runs, changed: {changed:?}"),
    );
    assert!(changed.is_empty());
}

/// Direct 2-D Gaussian convolution with half-sample mirror boundaries.
fn dense_blur(w: usize, h: usize, px: &[f64], sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mirror = |i: isize, n: usize| {
        let n = n as isize;
        let m = i.rem_euclid(2 * n);
        (if m < n { m } else { 2 * n - 1 - m }) as usize
    };
    let mut norm = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            norm += (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let k = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                    acc += k * px[mirror(y + dy, h) * w + mirror(x + dx, w)];
                }
            }
            out[y as usize * w + x as usize] = acc / norm;
        }
    }
    out
}

#[test]
fn ac4_oracle_convolution() {
    let cfg = DetectorConfig::default();
    let (w, h) = (32, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let px: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
        let frame = Frame::new(w, h, px.clone(), 0).unwrap();
        let fast = frisson_core::pilo_detect::bandpass_frame(&frame, cfg.band_sigma_lo, cfg.band_sigma_hi).unwrap();
        let lo = dense_blur(w, h, &px, cfg.band_sigma_lo);
        let hi = dense_blur(w, h, &px, cfg.band_sigma_hi);
        for i in 0..w * h {
            worst = worst.max((fast.data[i] - (lo[i] - hi[i])).abs());
        }
    }
    report(
        "AC4 oracle convolution",
        worst <= 1e-6,
        format!(
            "max abs error {worst:.3e} over 50 images, sigma {}/{}",
            cfg.band_sigma_lo, cfg.band_sigma_hi
        ),
    );
    assert!(worst <= 1e-6);
}

#[test]
fn ac5_clock_recovery() {
    let (beta, alpha) = (1.0 + 50e-6, 2_000_000.0);
    let jitter = Normal::new(0.0, 200.0).unwrap();
    let mut worst_beta: f64 = 0.0;
    let mut worst_alpha: f64 = 0.0;
    for trial in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + trial);
        let pairs: Vec<(u64, i64)> = (0..60u64)
            .map(|k| {
                let t = k * 1_000_000;
                (t, (alpha + beta * t as f64 + jitter.sample(&mut rng)).round() as i64)
            })
            .collect();
        let map = fit_clock_map(&pairs).unwrap();
        worst_beta = worst_beta.max((map.beta - beta).abs());
        worst_alpha = worst_alpha.max((map.alpha_us - alpha).abs());
    }
    let pass = worst_beta <= 1e-5 && worst_alpha <= 1000.0;
    report(
        "AC5 clock recovery",
        pass,
        format!("100 trials of 60 pairs, worst beta error {worst_beta:.2e}, worst alpha error {worst_alpha:.1} us"),
    );
    assert!(pass);
}

fn fuzz_line(rng: &mut ChaCha8Rng) -> Vec<u8> {
    const TOKENS: [&str; 14] = [
        "GB/1",
        "GB/2",
        "GB/",
        "ON",
        "OFF",
        "SYNC",
        "-",
        "0",
        "18446744073709551616",
        "1.2.3",
        " ",
        "\n",
        "-0.",
        "9999999999999999999.999",
    ];
    match rng.random_range(0..4) {
        0 => (0..rng.random_range(0..200)).map(|_| rng.random()).collect(),
        1 => {
            let mut s = Vec::new();
            for _ in 0..rng.random_range(0..12) {
                s.extend_from_slice(TOKENS[rng.random_range(0..TOKENS.len())].as_bytes());
                if rng.random_bool(0.7) {
                    s.push(b' ');
                }
            }
            s
        }
        2 => {
            let mut s = encode_marker(&random_message(rng));
            for _ in 0..rng.random_range(1..4) {
                let i = rng.random_range(0..s.len());
                match rng.random_range(0..3) {
                    0 => s[i] = rng.random(),
                    1 => {
                        s.remove(i);
                    }
                    _ => s.insert(i, rng.random()),
                }
            }
            s
        }
        _ => vec![b'7'; rng.random_range(MAX_LINE_BYTES - 2..MAX_LINE_BYTES + 200)],
    }
}

fn random_message(rng: &mut ChaCha8Rng) -> MarkerMessage {
    let kind = [MarkerKind::On, MarkerKind::Off, MarkerKind::Sync][rng.random_range(0..3)];
    MarkerMessage {
        kind,
        seq: rng.random(),
        timestamp_us: rng.random(),
        severity: Severity(rng.random_range(-1_000_000_000_000..1_000_000_000_000)),
    }
}

#[test]
fn ac6_marker_codec() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut panics = 0;
    let mut accepted = 0;
    for _ in 0..100_000 {
        let line = fuzz_line(&mut rng);
        match catch_unwind(AssertUnwindSafe(|| decode_marker(&line))) {
            Ok(Ok(_)) => accepted += 1,
            Ok(Err(_)) => {}
            Err(_) => panics += 1,
        }
    }
    let mut round_trip_failures = 0;
    for _ in 0..1000 {
        let m = random_message(&mut rng);
        let bytes = encode_marker(&m);
        let ok = decode_marker(&bytes)
            .map(|d| d == m && encode_marker(&d) == bytes)
            .unwrap_or(false);
        if !ok {
            round_trip_failures += 1;
        }
    }
    let pass = panics == 0 && round_trip_failures == 0;
    report(
        "AC6 marker codec",
        pass,
        format!(
            "{panics} panics over 100000 fuzz lines ({accepted} decoded), \
             {round_trip_failures} round-trip failures over 1000 messages"
        ),
    );
    assert!(pass);
}

#[test]
fn ac7_eeg_pipeline() {
    let fs = 256.0;
    let sine: Vec<f64> = (0..2560).map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin()).collect();
    let parseval_err = {
        let mean = sine.iter().sum::<f64>() / sine.len() as f64;
        let var = sine.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / sine.len() as f64;
        (welch_psd(&sine, fs).unwrap().total_power() - var).abs() / var
    };

    let sigma = 5.0;
    let n = 50;
    let deflection = |i: usize| 10.0 * (i as f64 / 5.0).sin();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, sigma).unwrap();
    let epochs: Vec<Epoch> = (0..n)
        .map(|_| Epoch {
            event_index: 0,
            window: (0.0, 1.0),
            data: Array2::from_shape_fn((1, 32), |(_, i)| deflection(i) + noise.sample(&mut rng)),
            rejected: None,
        })
        .collect();
    let erp = erp_average(&epochs).unwrap();
    let bound = 3.0 * sigma / (n as f64).sqrt();
    let erp_worst = (0..32)
        .map(|i| (erp.mean[[0, i]] - deflection(i)).abs())
        .fold(0.0, f64::max);

    let cfg = EegSynthConfig::default();
    let rec = bandpass_filter(
        &synth_recording(&cfg, &[EventInterval::new(20.0, 24.0)]).unwrap(),
        1.0,
        45.0,
    )
    .unwrap();
    let events: Vec<MappedEvent> = (1..11)
        .map(|k| MappedEvent {
            onset_us: k * 5_000_000 + 123_457,
            offset_us: k * 5_000_000 + 2_123_457,
        })
        .collect();
    let set = epoch_events(&rec, &events, (-5.0, 5.0), (-5.0, -4.0));
    let b = rec.seconds_to_samples(1.0) as usize;
    let baseline_worst = set
        .epochs
        .iter()
        .flat_map(|e| {
            e.data
                .rows()
                .into_iter()
                .map(|r| r.slice(ndarray::s![..b]).mean().unwrap().abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);

    let pass = parseval_err <= 0.05 && erp_worst <= bound && baseline_worst <= 1e-9 && set.epochs.len() == 10;
    report(
        "AC7 EEG pipeline",
        pass,
        format!(
            "Parseval error {:.2}%; ERP worst deviation {erp_worst:.3} uV vs bound {bound:.3} uV at N={n}; \
             worst baseline mean {baseline_worst:.2e} uV over {} epochs",
            100.0 * parseval_err,
            set.epochs.len()
        ),
    );
    assert!(pass);
}

#[test]
fn ac8_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SessionConfig::default();
    cfg.synth.duration = 48.0;
    cfg.synth.events = vec![
        EventInterval::new(10.0, 14.0),
        EventInterval::new(22.0, 26.0),
        EventInterval::new(34.0, 38.0),
    ];
    cfg.stream.speed = 8.0;
    cfg.stream.receiver_offset_us = 2_000_000;
    cfg.stream.receiver_drift = 5e-5;
    cfg.eeg.duration_s = 58.0;
    let session = Session::new(cfg, dir.path());

    let started = Instant::now();
    synth_frames(&session).unwrap();
    let offline = detect(&session).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let receiver = {
        let s = session.clone();
        thread::spawn(move || receive_on(&s, listener))
    };
    let live = stream(&session, &addr).unwrap();
    let received = receiver.join().unwrap().unwrap();
    synth_eeg(&session).unwrap();
    let out = analyze(&session).unwrap();
    let elapsed = started.elapsed();

    let ratio = |phase, group| {
        let pre = out.summary.get(Phase::Pre, "alpha", group).unwrap();
        out.summary.get(phase, "alpha", group).unwrap() / pre
    };
    let frontal = ratio(Phase::During, ChannelGroup::Frontal);
    let central = ratio(Phase::During, ChannelGroup::Central);
    let posterior = ratio(Phase::During, ChannelGroup::Posterior);
    let post = ratio(Phase::Post, ChannelGroup::Frontal);
    let pass = frontal >= 2.0
        && post <= 1.25
        && frontal > central
        && frontal > posterior
        && elapsed < Duration::from_secs(60)
        && offline.events.len() == 3
        && live.events == offline.events
        && received.on == 3
        && received.off == 3;
    report(
        "AC8 end-to-end",
        pass,
        format!(
            "frontal alpha during/pre {frontal:.2}, post/pre {post:.2}; central {central:.2}, posterior {posterior:.2}; \
             {} events detected, {} ON / {} OFF / {} SYNC received; clock beta {:.6}; {:.1} s",
            offline.events.len(),
            received.on,
            received.off,
            received.sync,
            out.clock_map.beta,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}
