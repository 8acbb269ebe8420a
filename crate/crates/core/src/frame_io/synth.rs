use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Frame, FrameError, Micros};
use crate::imgproc::GaussianBlur;

/// A ground-truth goosebump interval in seconds of session time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventInterval {
    pub onset_s: f64,
    pub offset_s: f64,
}

impl EventInterval {
    pub fn new(onset_s: f64, offset_s: f64) -> Self {
        Self { onset_s, offset_s }
    }
}

/// Parameters of a synthetic skin sequence. All lengths are in pixels,
/// luminance amplitudes are absolute, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub frame_rate: f64,
    pub duration: f64,
    pub base_texture_scale: f64,
    pub base_texture_amplitude: f64,
    pub bump_count: usize,
    pub bump_sigma: f64,
    pub bump_amplitude: f64,
    pub ramp: f64,
    pub events: Vec<EventInterval>,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            frame_rate: 30.0,
            duration: 20.0,
            base_texture_scale: 16.0,
            base_texture_amplitude: 0.05,
            bump_count: 40,
            bump_sigma: 3.0,
            bump_amplitude: 0.08,
            ramp: 0.1,
            events: vec![EventInterval::new(8.0, 12.0)],
            noise_sigma: 0.01,
            rng_seed: 7,
        }
    }
}

pub(crate) fn validate_intervals(events: &[EventInterval]) -> Result<(), String> {
    for (i, e) in events.iter().enumerate() {
        if !(e.onset_s.is_finite() && e.offset_s.is_finite()) || e.offset_s <= e.onset_s {
            return Err(format!("event {i}: offset must exceed onset"));
        }
        if let Some(next) = events.get(i + 1) {
            if next.onset_s < e.offset_s {
                return Err(format!("events {i} and {} overlap or are unordered", i + 1));
            }
        }
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), FrameError> {
        let bad = |m: &str| Err(FrameError::InvalidConfig(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("width and height must be positive");
        }
        if !(self.frame_rate > 0.0) {
            return bad("frame_rate must be positive");
        }
        if !(self.duration > 0.0) {
            return bad("duration must be positive");
        }
        if !(self.bump_sigma > 0.0) {
            return bad("bump_sigma must be positive");
        }
        if !(0.0..=0.5).contains(&self.bump_amplitude) {
            return bad("bump_amplitude must lie in [0, 0.5]");
        }
        if !(self.noise_sigma >= 0.0) || !(self.base_texture_scale >= 0.0) || !(self.ramp >= 0.0) {
            return bad("noise_sigma, base_texture_scale and ramp must be non-negative");
        }
        validate_intervals(&self.events).map_err(FrameError::InvalidConfig)
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).round() as usize
    }

    pub fn frame_timestamp(&self, index: usize) -> Micros {
        (index as f64 * 1e6 / self.frame_rate).round() as Micros
    }

    /// Blob amplitude at time `t`: linear ramps of length `ramp` at both
    /// ends of each event, flat in between, zero outside.
    pub fn bump_envelope(&self, t: f64) -> f64 {
        self.events
            .iter()
            .find(|e| t >= e.onset_s && t <= e.offset_s)
            .map(|e| {
                if self.ramp > 0.0 {
                    let up = (t - e.onset_s) / self.ramp;
                    let down = (e.offset_s - t) / self.ramp;
                    self.bump_amplitude * up.min(down).min(1.0)
                } else if t < e.offset_s {
                    self.bump_amplitude
                } else {
                    0.0
                }
            })
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub events: Vec<EventInterval>,
    pub bump_centers: Vec<[f64; 2]>,
}

/// Generates the frame sequence and its ground truth. Deterministic in
/// `rng_seed`: the RNG draws the texture, then blob centers, then per-frame
/// noise, in that order, regardless of amplitudes.
pub fn synth_frames(config: &SynthConfig) -> Result<(Vec<Frame>, GroundTruth), FrameError> {
    config.validate()?;
    let (w, h) = (config.width, config.height);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let white: Vec<f64> = (0..w * h).map(|_| rng.sample(StandardNormal)).collect();
    let mut texture = if config.base_texture_scale > 0.0 {
        GaussianBlur::new(w, h, config.base_texture_scale).apply(&white)
    } else {
        white
    };
    let n = texture.len() as f64;
    let mean = texture.iter().sum::<f64>() / n;
    let sd = (texture.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let gain = if sd > 0.0 {
        config.base_texture_amplitude / sd
    } else {
        0.0
    };
    texture.iter_mut().for_each(|v| *v = 0.5 + (*v - mean) * gain);

    let centers: Vec<[f64; 2]> = (0..config.bump_count)
        .map(|_| [rng.random::<f64>() * w as f64, rng.random::<f64>() * h as f64])
        .collect();
    let mut blobs = vec![0.0; w * h];
    let two_s2 = 2.0 * config.bump_sigma * config.bump_sigma;
    for c in &centers {
        for y in 0..h {
            let dy = y as f64 - c[1];
            for x in 0..w {
                let dx = x as f64 - c[0];
                blobs[y * w + x] += (-(dx * dx + dy * dy) / two_s2).exp();
            }
        }
    }

    let frames = (0..config.frame_count())
        .map(|i| {
            let timestamp_us = config.frame_timestamp(i);
            let a = config.bump_envelope(timestamp_us as f64 / 1e6);
            let pixels = texture
                .iter()
                .zip(&blobs)
                .map(|(&base, &blob)| {
                    let noise: f64 = rng.sample(StandardNormal);
                    (base + a * blob + config.noise_sigma * noise).clamp(0.0, 1.0)
                })
                .collect();
            Frame {
                width: w,
                height: h,
                pixels,
                timestamp_us,
            }
        })
        .collect();

    Ok((
        frames,
        GroundTruth {
            events: config.events.clone(),
            bump_centers: centers,
        },
    ))
}
