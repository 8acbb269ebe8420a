use super::{Frame, FrameError, Roi};
use crate::imgproc::SmoothBlur;

const MIN_ROI: usize = 16;

/// Crop + illumination flattening for one ROI geometry.
///
/// The cropped image is divided by its own wide blur (σ = roi width / 4),
/// the ratio is normalized to unit global mean, clamped to `[0, 2]` and
/// halved into `[0, 1]`. Every step is invariant to a global gain on the
/// input, so downstream texture energy does not depend on exposure.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    roi: Roi,
    blur: SmoothBlur,
}

impl Preprocessor {
    pub fn new(roi: Roi) -> Result<Self, FrameError> {
        if roi.width < MIN_ROI || roi.height < MIN_ROI {
            return Err(FrameError::RoiTooSmall { roi });
        }
        Ok(Self {
            roi,
            blur: SmoothBlur::new(roi.width, roi.height, roi.width as f64 / 4.0),
        })
    }

    pub fn roi(&self) -> Roi {
        self.roi
    }

    pub fn apply(&self, frame: &Frame) -> Result<Frame, FrameError> {
        let r = self.roi;
        if r.x + r.width > frame.width || r.y + r.height > frame.height {
            return Err(FrameError::RoiOutOfBounds {
                roi: r,
                width: frame.width,
                height: frame.height,
            });
        }
        let mut crop = Vec::with_capacity(r.width * r.height);
        for y in r.y..r.y + r.height {
            let row = &frame.pixels[y * frame.width..(y + 1) * frame.width];
            crop.extend_from_slice(&row[r.x..r.x + r.width]);
        }

        let blurred = self.blur.apply(&crop);
        let n = crop.len() as f64;
        let blur_mean = blurred.iter().sum::<f64>() / n;
        let pixels = if blur_mean <= 1e-12 {
            vec![0.0; crop.len()]
        } else {
            let floor = 1e-12 * blur_mean;
            let ratio: Vec<f64> = crop.iter().zip(&blurred).map(|(&v, &b)| v / b.max(floor)).collect();
            let ratio_mean = ratio.iter().sum::<f64>() / n;
            ratio.iter().map(|&q| 0.5 * (q / ratio_mean).clamp(0.0, 2.0)).collect()
        };
        Ok(Frame {
            width: r.width,
            height: r.height,
            pixels,
            timestamp_us: frame.timestamp_us,
        })
    }
}

/// One-shot form of [`Preprocessor::apply`].
pub fn preprocess(frame: &Frame, roi: Roi) -> Result<Frame, FrameError> {
    Preprocessor::new(roi)?.apply(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn textured(w: usize, h: usize, seed: u64) -> Frame {
        let mut s = seed;
        let pixels = (0..w * h)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                0.2 + 0.6 * ((s >> 11) as f64 / (1u64 << 53) as f64)
            })
            .collect();
        Frame::new(w, h, pixels, 0).unwrap()
    }

    #[test]
    fn flat_field_maps_to_half() {
        let f = Frame::new(40, 32, vec![0.5; 40 * 32], 0).unwrap();
        let roi = Roi {
            x: 4,
            y: 2,
            width: 24,
            height: 20,
        };
        let out = preprocess(&f, roi).unwrap();
        assert_eq!((out.width, out.height), (24, 20));
        assert!(out.pixels.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn roi_errors() {
        let f = textured(32, 32, 1);
        let out_of_bounds = Roi {
            x: 20,
            y: 0,
            width: 16,
            height: 16,
        };
        assert!(matches!(
            preprocess(&f, out_of_bounds),
            Err(FrameError::RoiOutOfBounds { .. })
        ));
        let tiny = Roi {
            x: 0,
            y: 0,
            width: 15,
            height: 32,
        };
        assert!(matches!(preprocess(&f, tiny), Err(FrameError::RoiTooSmall { .. })));
    }

    #[test]
    fn black_frame_is_zero() {
        let f = Frame::new(16, 16, vec![0.0; 256], 0).unwrap();
        let out = preprocess(&f, f.full_roi()).unwrap();
        assert!(out.pixels.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_and_a_half_times_brighter_is_identical() {
        let f = textured(32, 32, 2);
        let a = preprocess(&f, f.full_roi()).unwrap();
        let b = preprocess(&f.scaled(1.5), f.full_roi()).unwrap();
        let worst = a
            .pixels
            .iter()
            .zip(&b.pixels)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst}");
    }

    proptest! {
        #[test]
        fn brightness_invariant(seed in 0u64..1000, gain in 0.5f64..2.0) {
            let f = textured(24, 20, seed);
            let a = preprocess(&f, f.full_roi()).unwrap();
            let b = preprocess(&f.scaled(gain), f.full_roi()).unwrap();
            for (x, y) in a.pixels.iter().zip(&b.pixels) {
                prop_assert!((x - y).abs() <= 1e-6);
            }
        }

        #[test]
        fn ignores_pixels_outside_roi(seed in 0u64..1000, fill in 0.0f64..1.0) {
            let f = textured(40, 36, seed);
            let roi = Roi { x: 5, y: 7, width: 20, height: 18 };
            let mut g = f.clone();
            for y in 0..g.height {
                for x in 0..g.width {
                    let inside = x >= roi.x && x < roi.x + roi.width && y >= roi.y && y < roi.y + roi.height;
                    if !inside {
                        g.pixels[y * g.width + x] = fill;
                    }
                }
            }
            prop_assert_eq!(preprocess(&f, roi).unwrap(), preprocess(&g, roi).unwrap());
        }
    }
}
