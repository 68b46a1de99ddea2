//! Image quality metrics: relative error, SSIM and coefficient sparsity.

use crate::error::{Error, Result};
use crate::image::{ComplexImage, RealImage};

/// `||estimate - truth||_2 / ||truth||_2`.
pub fn relative_error(estimate: &ComplexImage, truth: &ComplexImage) -> Result<f64> {
    estimate.ensure_shape(truth.shape())?;
    let denom = truth.norm();
    if denom == 0.0 {
        return Err(Error::ZeroNormTruth);
    }
    let num: f64 = estimate.as_slice().iter().zip(truth.as_slice()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(num.sqrt() / denom)
}

/// SSIM constants and Gaussian window.
#[derive(Clone, Debug, PartialEq)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub window_size: usize,
    pub sigma: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self { k1: 0.01, k2: 0.03, window_size: 11, sigma: 1.5, dynamic_range: 1.0 }
    }
}

impl SsimParams {
    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn kernel_1d(&self) -> Vec<f64> {
        let half = (self.window_size / 2) as f64;
        let taps: Vec<f64> = (0..self.window_size)
            .map(|i| {
                let d = i as f64 - half;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        taps.into_iter().map(|t| t / sum).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.sigma > 0.0 && self.dynamic_range > 0.0) {
            return Err(Error::InvalidParameter("SSIM constants must be positive".into()));
        }
        if self.window_size.is_multiple_of(2) {
            return Err(Error::InvalidParameter("SSIM window size must be odd".into()));
        }
        Ok(())
    }
}

/// Symmetric (edge-repeating) reflection of `i` into `0..n`.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable correlation of `src` with `taps` along both axes, reflective padding.
fn blur(src: &[f64], rows: usize, cols: usize, taps: &[f64]) -> Vec<f64> {
    let half = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; rows * cols];
    for r in 0..rows {
        let row = &src[r * cols..(r + 1) * cols];
        for c in 0..cols {
            tmp[r * cols + c] =
                taps.iter().enumerate().map(|(k, t)| t * row[reflect(c as isize + k as isize - half, cols)]).sum();
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[reflect(r as isize + k as isize - half, rows) * cols + c])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all pixel-centered Gaussian windows.
pub fn ssim(estimate: &RealImage, truth: &RealImage, params: &SsimParams) -> Result<f64> {
    params.validate()?;
    if estimate.shape() != truth.shape() {
        return Err(Error::ShapeMismatch { expected: truth.shape(), found: estimate.shape() });
    }
    let (rows, cols) = truth.shape();
    let taps = params.kernel_1d();
    let x = estimate.as_slice();
    let y = truth.as_slice();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = blur(x, rows, cols, &taps);
    let mu_y = blur(y, rows, cols, &taps);
    let e_xx = blur(&xx, rows, cols, &taps);
    let e_yy = blur(&yy, rows, cols, &taps);
    let e_xy = blur(&xy, rows, cols, &taps);

    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let total: f64 = (0..rows * cols)
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = e_xx[i] - mx * mx;
            let vy = e_yy[i] - my * my;
            let cxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / (rows * cols) as f64)
}

/// Fraction of entries with `|v| < rel_threshold * max|coeffs|`; 1 for an all-zero input.
pub fn near_zero_fraction(coeffs: &ComplexImage, rel_threshold: f64) -> f64 {
    let max = coeffs.max_abs();
    if max == 0.0 {
        return 1.0;
    }
    near_zero_fraction_below(coeffs, rel_threshold * max)
}

/// Fraction of entries with `|v| < rel_threshold * reference`, for comparing
/// two coefficient sets against a common scale.
pub fn near_zero_fraction_with_reference(coeffs: &ComplexImage, rel_threshold: f64, reference: f64) -> f64 {
    near_zero_fraction_below(coeffs, rel_threshold * reference)
}

fn near_zero_fraction_below(coeffs: &ComplexImage, threshold: f64) -> f64 {
    let below = coeffs.as_slice().iter().filter(|v| v.norm() < threshold).count();
    below as f64 / coeffs.len() as f64
}
