use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame_io::Micros;

/// `receiver_us ≈ alpha_us + beta * sender_us`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockMap {
    pub alpha_us: f64,
    pub beta: f64,
    pub residual_rms_us: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClockError {
    #[error("need at least 2 sync points, got {0}")]
    TooFewPoints(usize),
    #[error("sync points all share one sender timestamp")]
    Degenerate,
    #[error("fitted drift beta = {0} is outside (0.9, 1.1)")]
    ImplausibleDrift(f64),
}

impl ClockMap {
    pub fn identity() -> Self {
        Self {
            alpha_us: 0.0,
            beta: 1.0,
            residual_rms_us: 0.0,
            n_points: 0,
        }
    }

    pub fn map_time(&self, sender_us: Micros) -> i64 {
        self.map_f64(sender_us as f64).round() as i64
    }

    pub fn map_f64(&self, sender_us: f64) -> f64 {
        self.alpha_us + self.beta * sender_us
    }

    pub fn inverse(&self, receiver_us: f64) -> f64 {
        (receiver_us - self.alpha_us) / self.beta
    }
}

/// Least-squares line through `(sender_us, receiver_us)` SYNC pairs.
pub fn fit_clock_map(pairs: &[(Micros, i64)]) -> Result<ClockMap, ClockError> {
    let n = pairs.len();
    if n < 2 {
        return Err(ClockError::TooFewPoints(n));
    }
    // centre first; raw microsecond sums lose precision quickly
    let nf = n as f64;
    let xm = pairs.iter().map(|p| p.0 as f64).sum::<f64>() / nf;
    let ym = pairs.iter().map(|p| p.1 as f64).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pairs {
        let dx = x as f64 - xm;
        sxx += dx * dx;
        sxy += dx * (y as f64 - ym);
    }
    if sxx == 0.0 {
        return Err(ClockError::Degenerate);
    }
    let beta = sxy / sxx;
    if !(beta > 0.9 && beta < 1.1) {
        return Err(ClockError::ImplausibleDrift(beta));
    }
    let alpha = ym - beta * xm;
    let ss: f64 = pairs
        .iter()
        .map(|&(x, y)| {
            let r = (y as f64 - ym) - beta * (x as f64 - xm);
            r * r
        })
        .sum();
    Ok(ClockMap {
        alpha_us: alpha,
        beta,
        residual_rms_us: (ss / nf).sqrt(),
        n_points: n,
    })
}
