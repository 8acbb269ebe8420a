use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::EegError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub fn new(name: &str, lo_hz: f64, hi_hz: f64) -> Self {
        Self {
            name: name.to_string(),
            lo_hz,
            hi_hz,
        }
    }

    pub fn standard() -> Vec<Band> {
        vec![
            Band::new("theta", 4.0, 8.0),
            Band::new("alpha", 8.0, 13.0),
            Band::new("beta", 13.0, 30.0),
            Band::new("gamma", 30.0, 45.0),
        ]
    }

    /// Half-open: a bin at exactly `hi_hz` belongs to the next band.
    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo_hz && f < self.hi_hz
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    /// Units²/Hz.
    pub density: Vec<f64>,
}

impl Psd {
    /// Rectangle-rule integral over all bins; equals the signal variance
    /// for a stationary segment.
    pub fn total_power(&self) -> f64 {
        let df = self.freqs.get(1).map_or(0.0, |f1| f1 - self.freqs[0]);
        self.density.iter().sum::<f64>() * df
    }

    pub fn band_mean(&self, band: &Band) -> f64 {
        let (sum, n) = self
            .freqs
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| band.contains(**f))
            .fold((0.0, 0usize), |(s, n), (_, p)| (s + p, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

/// Welch estimate: 1 s periodic-Hann segments at 50% overlap, each with its
/// mean removed; a trailing partial segment is dropped.
pub fn welch_psd(x: &[f64], sampling_rate: f64) -> Result<Psd, EegError> {
    let nperseg = (sampling_rate.round() as usize).max(2);
    if x.len() < nperseg {
        return Err(EegError::SegmentTooShort {
            samples: x.len(),
            needed: nperseg,
        });
    }
    let step = nperseg / 2;
    let window: Vec<f64> = (0..nperseg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nperseg as f64).cos())
        .collect();
    let scale = 1.0 / (sampling_rate * window.iter().map(|w| w * w).sum::<f64>());
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nperseg);
    let nbins = nperseg / 2 + 1;
    let mut acc = vec![0.0; nbins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nperseg];
    let mut segments = 0usize;
    let mut start = 0;
    while start + nperseg <= x.len() {
        let seg = &x[start..start + nperseg];
        let mean = seg.iter().sum::<f64>() / nperseg as f64;
        for ((b, v), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (nperseg.is_multiple_of(2) && k == nperseg / 2) {
                1.0
            } else {
                2.0
            };
            one_sided * scale * a / segments as f64
        })
        .collect();
    let df = sampling_rate / nperseg as f64;
    Ok(Psd {
        freqs: (0..nbins).map(|k| k as f64 * df).collect(),
        density,
    })
}

/// Mean Welch PSD inside `band`; segments shorter than 2 s are refused.
pub fn band_power(segment: &[f64], sampling_rate: f64, band: &Band) -> Result<f64, EegError> {
    let needed = (2.0 * sampling_rate).round() as usize;
    if segment.len() < needed {
        return Err(EegError::SegmentTooShort {
            samples: segment.len(),
            needed,
        });
    }
    Ok(welch_psd(segment, sampling_rate)?.band_mean(band))
}
