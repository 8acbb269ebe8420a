use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex64;

use super::{EegError, EegRecording};

/// One second-order section, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = 1.0 + z_inv * (self.a[0] + z_inv * self.a[1]);
        num / den
    }

    /// Transposed direct form II state after a constant input `u` forever.
    fn steady_state(&self, u: f64) -> ([f64; 2], f64) {
        let gain = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1]);
        let y = gain * u;
        ([y - self.b[0] * u, self.b[2] * u - self.a[1] * y], y)
    }

    fn run(&self, x: &mut [f64], mut s: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let u = *v;
            let y = b0 * u + s[0];
            s[0] = b1 * u - a1 * y + s[1];
            s[1] = b2 * u - a2 * y;
            *v = y;
        }
    }
}

/// Digital Butterworth band-pass via the bilinear transform, as a cascade
/// of `order` biquads (the band-pass has twice the prototype order).
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    sections: Vec<Biquad>,
    sampling_rate: f64,
    order: usize,
    lo_hz: f64,
    hi_hz: f64,
}

impl Butterworth {
    pub fn bandpass(order: usize, lo_hz: f64, hi_hz: f64, sampling_rate: f64) -> Result<Self, EegError> {
        let nyquist = sampling_rate / 2.0;
        if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < nyquist) {
            return Err(EegError::BandOutsideNyquist {
                lo: lo_hz,
                hi: hi_hz,
                nyquist,
            });
        }
        assert!(order > 0, "filter order must be positive");
        let c = 2.0 * sampling_rate;
        let w1 = c * (PI * lo_hz / sampling_rate).tan();
        let w2 = c * (PI * hi_hz / sampling_rate).tan();
        let w0 = (w1 * w2).sqrt();
        let bw = w2 - w1;

        let mut digital = Vec::with_capacity(2 * order);
        for k in 1..=order {
            let theta = PI * (2 * k + order - 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0 * w0).sqrt();
            for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                digital.push((c + s) / (c - s));
            }
        }
        let upper: Vec<Complex64> = digital.into_iter().filter(|z| z.im > 0.0).collect();
        assert_eq!(upper.len(), order, "band-pass poles must form conjugate pairs");

        let omega0 = 2.0 * (w0 / c).atan();
        let z0_inv = Complex64::from_polar(1.0, -omega0);
        let sections = upper
            .into_iter()
            .map(|z| {
                let mut q = Biquad {
                    b: [1.0, 0.0, -1.0],
                    a: [-2.0 * z.re, z.norm_sqr()],
                };
                let g = q.response(z0_inv).norm();
                q.b.iter_mut().for_each(|v| *v /= g);
                q
            })
            .collect();
        Ok(Self {
            sections,
            sampling_rate,
            order,
            lo_hz,
            hi_hz,
        })
    }

    /// Complex single-pass response at `f` Hz.
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.sampling_rate);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    /// Closed-form `|H(f)|^2` of the analog prototype after prewarping.
    pub fn analytic_power_gain(&self, f: f64) -> f64 {
        let c = 2.0 * self.sampling_rate;
        let warp = |x: f64| c * (PI * x / self.sampling_rate).tan();
        let (w1, w2, w) = (warp(self.lo_hz), warp(self.hi_hz), warp(f));
        let w0sq = w1 * w2;
        let x = (w * w - w0sq) / (w * (w2 - w1));
        1.0 / (1.0 + x.powi(2 * self.order as i32))
    }

    fn pass(&self, x: &mut [f64]) {
        let Some(&first) = x.first() else {
            return;
        };
        let mut u = first;
        for s in &self.sections {
            let (state, y) = s.steady_state(u);
            s.run(x, state);
            u = y;
        }
    }

    /// Forward-backward filtering of one channel with odd-reflection padding
    /// of up to 3 s at each end.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = ((3.0 * self.sampling_rate).round() as usize).min(n - 1);
        let (x0, xn) = (x[0], x[n - 1]);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x0 - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * xn - x[n - 1 - i]));
        self.pass(&mut ext);
        ext.reverse();
        self.pass(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase 4th-order Butterworth band-pass of one channel.
pub fn filtfilt_channel(x: &[f64], lo_hz: f64, hi_hz: f64, sampling_rate: f64) -> Result<Vec<f64>, EegError> {
    Ok(Butterworth::bandpass(4, lo_hz, hi_hz, sampling_rate)?.filtfilt(x))
}

/// Zero-phase 4th-order Butterworth band-pass of every channel.
pub fn bandpass_filter(rec: &EegRecording, lo_hz: f64, hi_hz: f64) -> Result<EegRecording, EegError> {
    let filter = Butterworth::bandpass(4, lo_hz, hi_hz, rec.sampling_rate)?;
    let mut out = Array2::zeros(rec.samples.raw_dim());
    for (src, mut dst) in rec.samples.rows().into_iter().zip(out.rows_mut()) {
        let row: Vec<f64> = src.iter().copied().collect();
        dst.iter_mut().zip(filter.filtfilt(&row)).for_each(|(d, v)| *d = v);
    }
    Ok(EegRecording {
        samples: out,
        ..rec.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn sine(f: f64, fs: f64, secs: f64) -> Vec<f64> {
        (0..(fs * secs) as usize)
            .map(|i| (2.0 * PI * f * i as f64 / fs).sin())
            .collect()
    }

    fn interior_rms(x: &[f64], skip: usize) -> f64 {
        let inner = &x[skip..x.len() - skip];
        (inner.iter().map(|v| v * v).sum::<f64>() / inner.len() as f64).sqrt()
    }

    #[test]
    fn sections_match_closed_form_response() {
        for (lo, hi) in [(8.0, 13.0), (1.0, 45.0), (30.0, 45.0)] {
            let f = Butterworth::bandpass(4, lo, hi, 256.0).unwrap();
            for k in 1..128 {
                let hz = k as f64;
                let got = f.response(hz).norm_sqr();
                let want = f.analytic_power_gain(hz);
                assert!(
                    (got - want).abs() < 1e-9 * want.max(1e-6),
                    "{lo}-{hi} at {hz}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn alpha_sine_passes_within_two_percent() {
        let f = Butterworth::bandpass(4, 8.0, 13.0, 256.0).unwrap();
        let x = sine(10.0, 256.0, 10.0);
        let y = f.filtfilt(&x);
        let ratio = interior_rms(&y, 256) / interior_rms(&x, 256);
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
        // zero phase: the output stays aligned with the input
        let lagged: f64 = x[256..2304]
            .iter()
            .zip(&y[256..2304])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(lagged < 0.02 * 2.0);
        assert!((ratio - f.analytic_power_gain(10.0)).abs() < 0.02);
    }

    #[test]
    fn line_noise_is_attenuated() {
        let x = sine(60.0, 256.0, 10.0);
        let y = filtfilt_channel(&x, 1.0, 45.0, 256.0).unwrap();
        assert!(interior_rms(&x, 256) / interior_rms(&y, 256) >= 20.0);
    }

    #[test]
    fn zero_in_zero_out() {
        assert!(filtfilt_channel(&[0.0; 500], 1.0, 45.0, 256.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(filtfilt_channel(&[], 1.0, 45.0, 256.0).unwrap().is_empty());
    }

    #[test]
    fn band_must_fit_below_nyquist() {
        assert!(matches!(
            Butterworth::bandpass(4, 1.0, 128.0, 256.0),
            Err(EegError::BandOutsideNyquist { .. })
        ));
        assert!(Butterworth::bandpass(4, 0.0, 10.0, 256.0).is_err());
        assert!(Butterworth::bandpass(4, 12.0, 10.0, 256.0).is_err());
    }

    #[test]
    fn passband_signal_is_nearly_unchanged() {
        // already band-limited to 8-20 Hz, well inside 1-45
        let fs = 256.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let white: Vec<f64> = (0..2560).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = filtfilt_channel(&white, 8.0, 20.0, fs).unwrap();
        let y = filtfilt_channel(&x, 1.0, 45.0, fs).unwrap();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        assert!(interior_rms(&diff, 256) < 0.03 * interior_rms(&x, 256));
    }
}
