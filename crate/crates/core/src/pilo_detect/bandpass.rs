use super::{DetectError, DetectorConfig, IntensitySample};
use crate::frame_io::{Frame, Preprocessor, Roi};
use crate::imgproc::GaussianBlur;

/// Signed band-passed image, same shape as its input.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Difference of two truncated Gaussians, `G(lo) * I - G(hi) * I`.
#[derive(Debug, Clone)]
pub struct BandpassFilter {
    width: usize,
    height: usize,
    narrow: GaussianBlur,
    wide: GaussianBlur,
}

impl BandpassFilter {
    pub fn new(width: usize, height: usize, sigma_lo: f64, sigma_hi: f64) -> Result<Self, DetectError> {
        if !(sigma_lo > 0.0 && sigma_lo < sigma_hi) {
            return Err(DetectError::SigmaOrder {
                lo: sigma_lo,
                hi: sigma_hi,
            });
        }
        Ok(Self {
            width,
            height,
            narrow: GaussianBlur::new(width, height, sigma_lo),
            wide: GaussianBlur::new(width, height, sigma_hi),
        })
    }

    pub fn apply(&self, pixels: &[f64]) -> FilteredImage {
        let mut data = self.narrow.apply(pixels);
        let wide = self.wide.apply(pixels);
        data.iter_mut().zip(&wide).for_each(|(a, b)| *a -= b);
        FilteredImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

pub fn bandpass_frame(frame: &Frame, sigma_lo: f64, sigma_hi: f64) -> Result<FilteredImage, DetectError> {
    Ok(BandpassFilter::new(frame.width, frame.height, sigma_lo, sigma_hi)?.apply(&frame.pixels))
}

/// RMS of the filtered image.
pub fn frame_intensity(img: &FilteredImage) -> f64 {
    if img.data.is_empty() {
        return 0.0;
    }
    (img.data.iter().map(|v| v * v).sum::<f64>() / img.data.len() as f64).sqrt()
}

/// Preprocess → band-pass → RMS for a fixed ROI, with all kernels built once.
#[derive(Debug, Clone)]
pub struct IntensityExtractor {
    prep: Preprocessor,
    filter: BandpassFilter,
}

impl IntensityExtractor {
    pub fn new(roi: Roi, config: &DetectorConfig) -> Result<Self, DetectError> {
        config.validate()?;
        let prep = Preprocessor::new(roi)?;
        let filter = BandpassFilter::new(roi.width, roi.height, config.band_sigma_lo, config.band_sigma_hi)?;
        Ok(Self { prep, filter })
    }

    pub fn sample(&self, frame: &Frame) -> Result<IntensitySample, DetectError> {
        let flat = self.prep.apply(frame)?;
        Ok(IntensitySample {
            timestamp_us: frame.timestamp_us,
            raw_energy: frame_intensity(&self.filter.apply(&flat.pixels)),
            z: None,
        })
    }
}

/// Uncalibrated intensity trace for a frame sequence. `roi = None` uses the
/// full frame.
pub fn intensity_trace(
    frames: &[Frame],
    roi: Option<Roi>,
    config: &DetectorConfig,
) -> Result<Vec<IntensitySample>, DetectError> {
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    let extractor = IntensityExtractor::new(roi.unwrap_or_else(|| first.full_roi()), config)?;
    frames.iter().map(|f| extractor.sample(f)).collect()
}
