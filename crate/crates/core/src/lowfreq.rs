//! Kaiser-Bessel apodized low-frequency estimate from the fully sampled region,
//! and the residual k-space data that remains for the sparse solve.

use crate::error::{Error, Result};
use crate::fourier::Dft2;
use crate::image::{ComplexImage, C64};
use crate::sampling::{block_origin, fsr_shape, SamplingMask};

/// Shape parameter and support of the separable window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub beta: f64,
    pub extent: (usize, usize),
}

/// Default Kaiser shape parameter.
pub const DEFAULT_WINDOW_BETA: f64 = 4.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Power series `sum_m ((x/2)^m / m!)^2`, stopped once a term drops below
/// `1e-16` of the running sum.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if !(0.0..=700.0).contains(&x) {
        return Err(Error::BesselOverflow(x));
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * m);
        sum += term;
        if term < 1e-16 * sum {
            return Ok(sum);
        }
    }
}

/// Kaiser window `w[n] = I0(beta * sqrt(1 - t^2)) / I0(beta)` with
/// `t = (n - N/2) / (N/2)`, so index `N/2` (the DC position) has weight 1.
pub fn kaiser_window_1d(n_points: usize, beta: f64) -> Result<Vec<f64>> {
    if n_points == 0 {
        return Err(Error::InvalidParameter("window needs at least one point".into()));
    }
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!("window beta {beta} must be non-negative")));
    }
    let denom = bessel_i0(beta)?;
    let half = (n_points / 2) as f64;
    (0..n_points)
        .map(|n| {
            let t = if half > 0.0 { ((n as f64 - half) / half).clamp(-1.0, 1.0) } else { 0.0 };
            Ok(bessel_i0(beta * (1.0 - t * t).sqrt())? / denom)
        })
        .collect()
}

/// `y_L = F* K M_L b`: windowed inverse DFT of the central fully sampled block.
pub fn low_freq_estimate(b: &ComplexImage, levels: u32, beta: f64) -> Result<ComplexImage> {
    let dft = Dft2::new(b.rows(), b.cols())?;
    low_freq_estimate_with(&dft, b, levels, beta)
}

pub fn low_freq_estimate_with(dft: &Dft2, b: &ComplexImage, levels: u32, beta: f64) -> Result<ComplexImage> {
    let (rows, cols) = b.shape();
    b.ensure_shape(dft.shape())?;
    let (h, w) = fsr_shape(rows, cols, levels)?;
    let wr = kaiser_window_1d(h, beta)?;
    let wc = kaiser_window_1d(w, beta)?;
    let (r0, c0) = block_origin(rows, cols, h, w);
    let mut windowed = ComplexImage::zeros(rows, cols);
    for (i, &a) in wr.iter().enumerate() {
        for (j, &bw) in wc.iter().enumerate() {
            let (r, c) = (r0 + i, c0 + j);
            windowed[(r, c)] = b[(r, c)] * (a * bw);
        }
    }
    dft.inverse(&windowed)
}

/// `beta = b - M F y_L`, zero at unsampled positions.
pub fn residual_data(b: &ComplexImage, mask: &SamplingMask, y_low: &ComplexImage) -> Result<ComplexImage> {
    let dft = Dft2::new(b.rows(), b.cols())?;
    residual_data_with(&dft, b, mask, y_low)
}

pub fn residual_data_with(
    dft: &Dft2,
    b: &ComplexImage,
    mask: &SamplingMask,
    y_low: &ComplexImage,
) -> Result<ComplexImage> {
    b.ensure_shape(mask.shape())?;
    y_low.ensure_shape(mask.shape())?;
    let mut predicted = dft.forward(y_low)?;
    mask.apply_in_place(&mut predicted)?;
    let residual = b.sub(&predicted)?;
    mask.apply(&residual)
}

/// Separable window weights for the whole grid (zero outside the block).
pub fn window_weights(rows: usize, cols: usize, spec: WindowSpec) -> Result<ComplexImage> {
    let (h, w) = spec.extent;
    if h == 0 || w == 0 || h > rows || w > cols {
        return Err(Error::InvalidParameter(format!("window extent {h}x{w} does not fit {rows}x{cols}")));
    }
    let wr = kaiser_window_1d(h, spec.beta)?;
    let wc = kaiser_window_1d(w, spec.beta)?;
    let (r0, c0) = block_origin(rows, cols, h, w);
    let mut out = ComplexImage::zeros(rows, cols);
    for (i, &a) in wr.iter().enumerate() {
        for (j, &b) in wc.iter().enumerate() {
            out[(r0 + i, c0 + j)] = C64::new(a * b, 0.0);
        }
    }
    Ok(out)
}
