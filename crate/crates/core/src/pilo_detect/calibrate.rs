use serde::{Deserialize, Serialize};

use super::{seconds_to_micros, DetectError, IntensitySample};

pub const MIN_CALIBRATION_SAMPLES: usize = 30;
const MAD_TO_SIGMA: f64 = 1.4826;
const SIGMA_FLOOR: f64 = 1e-6;

/// Per-subject baseline of the raw energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    /// Median raw energy over the calibration window.
    pub mu: f64,
    /// 1.4826 × MAD, floored at 1e-6.
    pub sigma: f64,
    pub calib_window: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Robust baseline from all samples stamped before `calib_window` seconds.
pub fn calibrate(samples: &[IntensitySample], calib_window: f64) -> Result<CalibrationProfile, DetectError> {
    let limit = seconds_to_micros(calib_window);
    let mut values: Vec<f64> = samples
        .iter()
        .filter(|s| s.timestamp_us < limit)
        .map(|s| s.raw_energy)
        .collect();
    if values.len() < MIN_CALIBRATION_SAMPLES {
        return Err(DetectError::TooFewSamples {
            found: values.len(),
            needed: MIN_CALIBRATION_SAMPLES,
        });
    }
    let mu = median(&mut values);
    let mut deviations: Vec<f64> = values.iter().map(|v| (v - mu).abs()).collect();
    let mad = median(&mut deviations);
    Ok(CalibrationProfile {
        mu,
        sigma: (MAD_TO_SIGMA * mad).max(SIGMA_FLOOR),
        calib_window,
    })
}

pub fn apply_zscore(samples: &[IntensitySample], profile: &CalibrationProfile) -> Vec<IntensitySample> {
    samples
        .iter()
        .map(|s| IntensitySample {
            z: Some((s.raw_energy - profile.mu) / profile.sigma),
            ..*s
        })
        .collect()
}
