use std::f64::consts::PI;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{biosemi64, Band, ChannelGroup, EegError, EegRecording};
use crate::frame_io::EventInterval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurstSpec {
    pub band: Band,
    /// Burst amplitude as a multiple of the background RMS.
    pub gain: f64,
    pub groups: Vec<String>,
    /// Raised-cosine ramp at each end, seconds.
    pub taper_s: f64,
}

impl Default for BurstSpec {
    fn default() -> Self {
        Self {
            band: Band::new("alpha", 8.0, 13.0),
            gain: 3.0,
            groups: vec!["frontal".into()],
            taper_s: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EegSynthConfig {
    pub sampling_rate_hz: f64,
    pub duration_s: f64,
    /// Receiver-clock time of the first sample.
    pub t0_us: i64,
    pub subject_id: String,
    /// Defaults to the 64-channel BioSemi montage.
    pub channel_names: Option<Vec<String>>,
    pub background_rms_uv: f64,
    pub burst: Option<BurstSpec>,
    pub rng_seed: u64,
}

impl Default for EegSynthConfig {
    fn default() -> Self {
        Self {
            sampling_rate_hz: 256.0,
            duration_s: 60.0,
            t0_us: 0,
            subject_id: "synthetic".into(),
            channel_names: None,
            background_rms_uv: 10.0,
            burst: Some(BurstSpec::default()),
            rng_seed: 11,
        }
    }
}

/// Approximately 1/f noise: white noise through a bank of leaky integrators
/// (Kellet's economy pink filter).
struct PinkFilter {
    b: [f64; 7],
}

impl PinkFilter {
    fn new() -> Self {
        Self { b: [0.0; 7] }
    }

    fn next(&mut self, white: f64) -> f64 {
        let b = &mut self.b;
        b[0] = 0.99886 * b[0] + white * 0.0555179;
        b[1] = 0.99332 * b[1] + white * 0.0750759;
        b[2] = 0.96900 * b[2] + white * 0.1538520;
        b[3] = 0.86650 * b[3] + white * 0.3104856;
        b[4] = 0.55000 * b[4] + white * 0.5329522;
        b[5] = -0.7616 * b[5] - white * 0.0168980;
        let out = b[..6].iter().sum::<f64>() + b[6] + white * 0.5362;
        b[6] = white * 0.115926;
        out
    }
}

/// Settling time for the slowest integrator before samples are kept.
const WARMUP: usize = 4096;

fn envelope(t: f64, ev: &EventInterval, taper: f64) -> f64 {
    if t < ev.onset_s || t >= ev.offset_s {
        return 0.0;
    }
    let ramp = taper.min((ev.offset_s - ev.onset_s) / 2.0);
    if ramp <= 0.0 {
        return 1.0;
    }
    let edge = (t - ev.onset_s).min(ev.offset_s - t);
    if edge >= ramp {
        1.0
    } else {
        0.5 - 0.5 * (PI * edge / ramp).cos()
    }
}

/// Synthetic multichannel EEG. `events` are seconds from the first sample;
/// during each one, channels in the burst groups get a sinusoid at the band
/// centre with amplitude `gain × background RMS`.
pub fn synth_recording(cfg: &EegSynthConfig, events: &[EventInterval]) -> Result<EegRecording, EegError> {
    let fs = cfg.sampling_rate_hz;
    if !(fs > 0.0 && cfg.duration_s > 0.0 && cfg.background_rms_uv >= 0.0) {
        return Err(EegError::InvalidConfig(
            "sampling rate and duration must be positive, background RMS non-negative".into(),
        ));
    }
    let names = cfg.channel_names.clone().unwrap_or_else(biosemi64);
    if names.is_empty() {
        return Err(EegError::InvalidConfig("no channels".into()));
    }
    let burst = match &cfg.burst {
        Some(b) => {
            if !(b.gain >= 0.0 && b.gain.is_finite()) {
                return Err(EegError::InvalidConfig(format!("burst gain {}", b.gain)));
            }
            if !(b.band.lo_hz < b.band.hi_hz && b.band.hi_hz < fs / 2.0) {
                return Err(EegError::BandOutsideNyquist {
                    lo: b.band.lo_hz,
                    hi: b.band.hi_hz,
                    nyquist: fs / 2.0,
                });
            }
            let groups = b
                .groups
                .iter()
                .map(|g| g.parse::<ChannelGroup>())
                .collect::<Result<Vec<_>, _>>()?;
            Some((b, groups))
        }
        None => None,
    };

    let n = (cfg.duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut data = Array2::<f64>::zeros((names.len(), n));
    for mut row in data.rows_mut() {
        let mut pink = PinkFilter::new();
        for _ in 0..WARMUP {
            pink.next(StandardNormal.sample(&mut rng));
        }
        for v in row.iter_mut() {
            *v = pink.next(StandardNormal.sample(&mut rng));
        }
        let mean = row.mean().unwrap_or(0.0);
        row.mapv_inplace(|v| v - mean);
        let rms = (row.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64).sqrt();
        if rms > 0.0 {
            row.mapv_inplace(|v| v * cfg.background_rms_uv / rms);
        }
    }

    if let Some((b, groups)) = burst {
        let freq = (b.band.lo_hz + b.band.hi_hz) / 2.0;
        let amp = b.gain * cfg.background_rms_uv;
        let wave: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let env: f64 = events.iter().map(|ev| envelope(t, ev, b.taper_s)).sum();
                if env == 0.0 {
                    0.0
                } else {
                    amp * env * (2.0 * PI * freq * t).sin()
                }
            })
            .collect();
        for (c, name) in names.iter().enumerate() {
            if groups.iter().any(|g| g.contains(name)) {
                data.row_mut(c).iter_mut().zip(&wave).for_each(|(v, w)| *v += w);
            }
        }
    }

    EegRecording::new(fs, names, data, cfg.t0_us, cfg.subject_id.clone())
}
