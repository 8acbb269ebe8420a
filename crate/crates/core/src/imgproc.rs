//! Separable linear operators on row-major `f64` images.
//!
//! Two blur flavours live here:
//!
//! * [`GaussianBlur`]: a sampled Gaussian truncated at 3σ, normalized to unit
//!   sum, with half-sample symmetric (mirror) edge handling. Used for the
//!   difference-of-Gaussians band-pass and for synthetic texture.
//! * [`SmoothBlur`]: a very wide Gaussian applied in the cosine-transform
//!   domain. Mirror extension makes the image periodic over `2n`, so a
//!   symmetric blur is diagonal in the DCT-II basis with eigenvalues
//!   `exp(-(σ·πk/n)²/2)`. Only the handful of coefficients above 1e-18 are
//!   kept, which makes the σ = width/4 illumination blur cost a few hundred
//!   thousand multiply-adds instead of several million.

/// Mirror index for half-sample symmetric extension (`.. b a | a b ..`).
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    if m < n {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Normalized Gaussian taps for offsets `-r..=r`, `r = ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "gaussian sigma must be positive");
    let radius = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// One output row of a banded `n × n` operator: dense weights for input
/// indices `start .. start + weights.len()`.
#[derive(Debug, Clone)]
struct BandRow {
    start: usize,
    weights: Vec<f64>,
}

/// A 1-D convolution along one axis with the mirror boundary folded into
/// the weights, so applying it is a plain banded matrix product.
#[derive(Debug, Clone)]
struct AxisOperator {
    rows: Vec<BandRow>,
}

impl AxisOperator {
    fn convolution(n: usize, taps: &[f64]) -> Self {
        let radius = (taps.len() / 2) as isize;
        let rows = (0..n)
            .map(|i| {
                let mut dense = vec![0.0; n];
                for (t, &w) in taps.iter().enumerate() {
                    let j = reflect(i as isize + t as isize - radius, n);
                    dense[j] += w;
                }
                let first = dense.iter().position(|&w| w != 0.0).unwrap_or(0);
                let last = dense.iter().rposition(|&w| w != 0.0).unwrap_or(0);
                BandRow {
                    start: first,
                    weights: dense[first..=last].to_vec(),
                }
            })
            .collect();
        Self { rows }
    }

    /// Applies the operator down the columns of a `height × width` image
    /// (axis length == height). Each output row is an axpy over input rows.
    fn apply_vertical(&self, src: &[f64], width: usize, dst: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            let out = &mut dst[i * width..(i + 1) * width];
            out.iter_mut().for_each(|v| *v = 0.0);
            for (k, &w) in row.weights.iter().enumerate() {
                let j = row.start + k;
                let inp = &src[j * width..(j + 1) * width];
                for (o, &x) in out.iter_mut().zip(inp) {
                    *o += w * x;
                }
            }
        }
    }
}

pub(crate) fn transpose(src: &[f64], width: usize, height: usize, dst: &mut [f64]) {
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
}

/// Separable truncated Gaussian with mirror edges, sized for one image shape.
#[derive(Debug, Clone)]
pub struct GaussianBlur {
    width: usize,
    height: usize,
    along_y: AxisOperator,
    along_x: AxisOperator,
}

impl GaussianBlur {
    pub fn new(width: usize, height: usize, sigma: f64) -> Self {
        let taps = gaussian_kernel(sigma);
        Self {
            width,
            height,
            along_y: AxisOperator::convolution(height, &taps),
            along_x: AxisOperator::convolution(width, &taps),
        }
    }

    pub fn apply(&self, src: &[f64]) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        assert_eq!(src.len(), w * h);
        let mut a = vec![0.0; w * h];
        let mut b = vec![0.0; w * h];
        self.along_y.apply_vertical(src, w, &mut a);
        transpose(&a, w, h, &mut b);
        self.along_x.apply_vertical(&b, h, &mut a);
        transpose(&a, h, w, &mut b);
        b
    }
}

/// Truncated DCT-II basis for one axis with the Gaussian eigenvalues folded
/// in: `basis[k][x] = c_k cos(πk(x+½)/n)` and `gain[k] = exp(-(σπk/n)²/2)`.
#[derive(Debug, Clone)]
struct SpectralAxis {
    n: usize,
    basis: Vec<Vec<f64>>,
    gain: Vec<f64>,
}

const SPECTRAL_CUTOFF: f64 = 1e-18;

impl SpectralAxis {
    fn new(n: usize, sigma: f64) -> Self {
        let mut basis = Vec::new();
        let mut gain = Vec::new();
        for k in 0..n {
            let omega = std::f64::consts::PI * k as f64 / n as f64;
            let g = (-(sigma * omega).powi(2) / 2.0).exp();
            if g < SPECTRAL_CUTOFF {
                break;
            }
            let scale = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            basis.push((0..n).map(|x| scale * (omega * (x as f64 + 0.5)).cos()).collect());
            gain.push(g);
        }
        Self { n, basis, gain }
    }
}

/// Wide Gaussian blur (mirror boundary, untruncated kernel) evaluated in a
/// truncated cosine basis.
#[derive(Debug, Clone)]
pub struct SmoothBlur {
    x: SpectralAxis,
    y: SpectralAxis,
}

impl SmoothBlur {
    pub fn new(width: usize, height: usize, sigma: f64) -> Self {
        assert!(sigma > 0.0);
        Self {
            x: SpectralAxis::new(width, sigma),
            y: SpectralAxis::new(height, sigma),
        }
    }

    pub fn apply(&self, src: &[f64]) -> Vec<f64> {
        let (w, h) = (self.x.n, self.y.n);
        assert_eq!(src.len(), w * h);
        let kx = self.x.basis.len();
        let ky = self.y.basis.len();

        // rows projected onto the x basis: h × kx
        let mut rows_x = vec![0.0; h * kx];
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            for (k, b) in self.x.basis.iter().enumerate() {
                rows_x[y * kx + k] = row.iter().zip(b).map(|(a, c)| a * c).sum();
            }
        }
        // full 2-D coefficients, scaled by both eigenvalues: ky × kx
        let mut coeff = vec![0.0; ky * kx];
        for (l, b) in self.y.basis.iter().enumerate() {
            for y in 0..h {
                let c = b[y];
                for k in 0..kx {
                    coeff[l * kx + k] += c * rows_x[y * kx + k];
                }
            }
        }
        for l in 0..ky {
            for k in 0..kx {
                coeff[l * kx + k] *= self.y.gain[l] * self.x.gain[k];
            }
        }
        // back along y: h × kx
        let mut back_y = vec![0.0; h * kx];
        for (l, b) in self.y.basis.iter().enumerate() {
            for y in 0..h {
                let c = b[y];
                for k in 0..kx {
                    back_y[y * kx + k] += c * coeff[l * kx + k];
                }
            }
        }
        // back along x
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            let dst = &mut out[y * w..(y + 1) * w];
            for (k, b) in self.x.basis.iter().enumerate() {
                let c = back_y[y * kx + k];
                for (o, &v) in dst.iter_mut().zip(b) {
                    *o += c * v;
                }
            }
        }
        out
    }
}
