//! Orthonormal discrete Daubechies wavelet transform with periodic boundaries.
//!
//! The 2-D transform is separable and is recursed only on the lowest-frequency
//! (LL) quadrant. Coefficients stay in-plane: after one level the image holds
//! LL top-left, LH top-right, HL bottom-left and HH bottom-right.

use std::cell::RefCell;

use crate::error::{check_divisible, Error, Result};
use crate::image::{ComplexImage, C64};

/// Orthonormal low-pass / high-pass analysis filters.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterPair {
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl FilterPair {
    /// Builds the pair from a low-pass filter; the high-pass follows the
    /// quadrature-mirror relation `g[k] = (-1)^k h[L-1-k]`.
    pub fn from_lowpass(lowpass: Vec<f64>) -> Self {
        let n = lowpass.len();
        let highpass = (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * lowpass[n - 1 - k]
            })
            .collect();
        Self { lowpass, highpass }
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }
}

/// Daubechies filters of length `order` (2 = Haar, 4 = D4), from closed form.
pub fn daubechies_filters(order: usize) -> Result<FilterPair> {
    let lowpass = match order {
        2 => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
        4 => {
            let s3 = 3f64.sqrt();
            let d = 4.0 * std::f64::consts::SQRT_2;
            vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
        }
        _ => return Err(Error::UnsupportedFilterOrder(order)),
    };
    Ok(FilterPair::from_lowpass(lowpass))
}

/// Filters plus the number of recursion levels applied to the LL quadrant.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletPlan {
    pub filters: FilterPair,
    pub levels: u32,
}

impl WaveletPlan {
    pub fn new(filters: FilterPair, levels: u32) -> Self {
        Self { filters, levels }
    }

    /// Daubechies plan of the given filter order.
    pub fn daubechies(order: usize, levels: u32) -> Result<Self> {
        Ok(Self::new(daubechies_filters(order)?, levels))
    }

    pub fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        check_divisible(rows, cols, self.levels)
    }
}

/// One analysis level on a periodic signal.
///
/// `approx[m] = sum_k lowpass[k] * signal[(2m + k) mod n]`, likewise `detail`.
pub fn dwt1_level(signal: &[C64], filters: &FilterPair) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = signal.len();
    if !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    if n < filters.len() {
        return Err(Error::SignalShorterThanFilter { len: n, filter: filters.len() });
    }
    let mut approx = vec![C64::default(); n / 2];
    let mut detail = vec![C64::default(); n / 2];
    analyze(signal, filters, &mut approx, &mut detail);
    Ok((approx, detail))
}

/// Inverse of [`dwt1_level`].
pub fn idwt1_level(approx: &[C64], detail: &[C64], filters: &FilterPair) -> Result<Vec<C64>> {
    if approx.len() != detail.len() {
        return Err(Error::ShapeMismatch { expected: (1, approx.len()), found: (1, detail.len()) });
    }
    let n = 2 * approx.len();
    if n < filters.len() {
        return Err(Error::SignalShorterThanFilter { len: n, filter: filters.len() });
    }
    let mut out = vec![C64::default(); n];
    synthesize(approx, detail, filters, &mut out);
    Ok(out)
}

// Periodized filtering; valid for any even n >= 2, including n shorter than
// the filter, where taps wrap more than once.
fn analyze(x: &[C64], filters: &FilterPair, approx: &mut [C64], detail: &mut [C64]) {
    let n = x.len();
    let (h, g) = (filters.lowpass(), filters.highpass());
    for m in 0..n / 2 {
        let mut a = C64::default();
        let mut d = C64::default();
        let mut idx = (2 * m) % n;
        for k in 0..h.len() {
            let v = x[idx];
            a += v * h[k];
            d += v * g[k];
            idx += 1;
            if idx == n {
                idx = 0;
            }
        }
        approx[m] = a;
        detail[m] = d;
    }
}

fn synthesize(approx: &[C64], detail: &[C64], filters: &FilterPair, out: &mut [C64]) {
    let n = out.len();
    let (h, g) = (filters.lowpass(), filters.highpass());
    out.fill(C64::default());
    for m in 0..n / 2 {
        let (a, d) = (approx[m], detail[m]);
        let mut idx = (2 * m) % n;
        for k in 0..h.len() {
            out[idx] += a * h[k] + d * g[k];
            idx += 1;
            if idx == n {
                idx = 0;
            }
        }
    }
}

#[derive(Default)]
struct Scratch {
    line: Vec<C64>,
    lo: Vec<C64>,
    hi: Vec<C64>,
    block: Vec<C64>,
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}

impl Scratch {
    fn reserve(&mut self, rows: usize, cols: usize) {
        let len = rows.max(cols);
        for (buf, n) in
            [(&mut self.line, len), (&mut self.lo, len / 2), (&mut self.hi, len / 2), (&mut self.block, rows * cols)]
        {
            if buf.len() < n {
                buf.resize(n, C64::default());
            }
        }
    }

    /// Runs `f` with this thread's scratch sized for a `rows x cols` image.
    fn with<R>(rows: usize, cols: usize, f: impl FnOnce(&mut Scratch) -> R) -> R {
        SCRATCH.with(|cell| {
            let mut s = cell.borrow_mut();
            s.reserve(rows, cols);
            f(&mut s)
        })
    }

    /// Copies the top-left `height x width` block of `data` into `self.block`.
    fn stash(&mut self, data: &[C64], stride: usize, height: usize, width: usize) {
        for r in 0..height {
            self.block[r * width..(r + 1) * width].copy_from_slice(&data[r * stride..r * stride + width]);
        }
    }
}

fn axpy(out: &mut [C64], x: &[C64], a: f64) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += v * a;
    }
}

/// Forward transform of the top-left `height x width` block, one level.
/// Columns are filtered a whole row at a time.
fn forward_level(data: &mut [C64], stride: usize, height: usize, width: usize, f: &FilterPair, s: &mut Scratch) {
    let (hw, hh) = (width / 2, height / 2);
    for r in 0..height {
        let row = &mut data[r * stride..r * stride + width];
        s.line[..width].copy_from_slice(row);
        analyze(&s.line[..width], f, &mut s.lo[..hw], &mut s.hi[..hw]);
        row[..hw].copy_from_slice(&s.lo[..hw]);
        row[hw..].copy_from_slice(&s.hi[..hw]);
    }
    s.stash(data, stride, height, width);
    let (h, g) = (f.lowpass(), f.highpass());
    for m in 0..hh {
        for (out_row, taps) in [(m, h), (m + hh, g)] {
            let out = &mut data[out_row * stride..out_row * stride + width];
            out.fill(C64::default());
            for (k, &t) in taps.iter().enumerate() {
                let src = (2 * m + k) % height;
                axpy(out, &s.block[src * width..(src + 1) * width], t);
            }
        }
    }
}

fn inverse_level(data: &mut [C64], stride: usize, height: usize, width: usize, f: &FilterPair, s: &mut Scratch) {
    let (hw, hh) = (width / 2, height / 2);
    s.stash(data, stride, height, width);
    for r in 0..height {
        data[r * stride..r * stride + width].fill(C64::default());
    }
    let (h, g) = (f.lowpass(), f.highpass());
    for m in 0..hh {
        for (in_row, taps) in [(m, h), (m + hh, g)] {
            for (k, &t) in taps.iter().enumerate() {
                let dst = (2 * m + k) % height;
                axpy(&mut data[dst * stride..dst * stride + width], &s.block[in_row * width..(in_row + 1) * width], t);
            }
        }
    }
    for r in 0..height {
        let row = &mut data[r * stride..r * stride + width];
        s.lo[..hw].copy_from_slice(&row[..hw]);
        s.hi[..hw].copy_from_slice(&row[hw..]);
        synthesize(&s.lo[..hw], &s.hi[..hw], f, &mut s.line[..width]);
        row.copy_from_slice(&s.line[..width]);
    }
}

/// Forward 2-D transform, recursing `plan.levels` times on the LL quadrant.
pub fn dwt2(image: &ComplexImage, plan: &WaveletPlan) -> Result<ComplexImage> {
    let mut out = image.clone();
    dwt2_in_place(&mut out, plan)?;
    Ok(out)
}

/// Exact inverse of [`dwt2`].
pub fn idwt2(coeffs: &ComplexImage, plan: &WaveletPlan) -> Result<ComplexImage> {
    let mut out = coeffs.clone();
    idwt2_in_place(&mut out, plan)?;
    Ok(out)
}

pub fn dwt2_in_place(image: &mut ComplexImage, plan: &WaveletPlan) -> Result<()> {
    let (rows, cols) = image.shape();
    plan.check_shape(rows, cols)?;
    let data = image.as_mut_slice();
    Scratch::with(rows, cols, |scratch| {
        for level in 0..plan.levels {
            forward_level(data, cols, rows >> level, cols >> level, &plan.filters, scratch);
        }
    });
    Ok(())
}

pub fn idwt2_in_place(coeffs: &mut ComplexImage, plan: &WaveletPlan) -> Result<()> {
    let (rows, cols) = coeffs.shape();
    plan.check_shape(rows, cols)?;
    let data = coeffs.as_mut_slice();
    Scratch::with(rows, cols, |scratch| {
        for level in (0..plan.levels).rev() {
            inverse_level(data, cols, rows >> level, cols >> level, &plan.filters, scratch);
        }
    });
    Ok(())
}

/// Copy of the lowest-frequency bin: the top-left `(rows/2^r) x (cols/2^r)` block.
pub fn lowest_bin_view(coeffs: &ComplexImage, levels: u32) -> Result<ComplexImage> {
    let (rows, cols) = coeffs.shape();
    check_divisible(rows, cols, levels)?;
    Ok(coeffs.block(0, 0, rows >> levels, cols >> levels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn noise(rows: usize, cols: usize, seed: u64) -> ComplexImage {
        // small LCG; independent of the crate PRNG
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexImage::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn haar_coefficients() {
        let f = daubechies_filters(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(f.lowpass(), &[s, s]);
        assert_eq!(f.highpass(), &[s, -s]);
    }

    #[test]
    fn d4_coefficients_match_closed_form() {
        let f = daubechies_filters(4).unwrap();
        let expected_lo = [0.48296291314453414, 0.8365163037378079, 0.224_143_868_042_013_4, -0.12940952255126037];
        let expected_hi = [-0.12940952255126037, -0.224_143_868_042_013_4, 0.8365163037378079, -0.48296291314453414];
        for k in 0..4 {
            assert!((f.lowpass()[k] - expected_lo[k]).abs() < 1e-15);
            assert!((f.highpass()[k] - expected_hi[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn filter_invariants() {
        for order in [2, 4] {
            let f = daubechies_filters(order).unwrap();
            let l = f.len();
            let sum: f64 = f.lowpass().iter().sum();
            let energy: f64 = f.lowpass().iter().map(|v| v * v).sum();
            let hsum: f64 = f.highpass().iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
            assert!((energy - 1.0).abs() < 1e-12);
            assert!(hsum.abs() < 1e-12);
            for k in 0..l {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(f.highpass()[k], sign * f.lowpass()[l - 1 - k]);
            }
        }
        let d4 = daubechies_filters(4).unwrap();
        let moment: f64 = d4.highpass().iter().enumerate().map(|(k, g)| k as f64 * g).sum();
        assert!(moment.abs() < 1e-12);
    }

    #[test]
    fn unsupported_order() {
        for order in [0, 1, 3, 6, 8] {
            assert!(matches!(daubechies_filters(order), Err(Error::UnsupportedFilterOrder(o)) if o == order));
        }
    }

    #[test]
    fn dwt1_constant_signal() {
        let f = daubechies_filters(4).unwrap();
        let x = vec![c(3.0); 8];
        let (a, d) = dwt1_level(&x, &f).unwrap();
        for v in a {
            assert!((v - c(3.0 * std::f64::consts::SQRT_2)).norm() < 1e-12);
        }
        for v in d {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn dwt1_haar_impulse() {
        let f = daubechies_filters(2).unwrap();
        let mut x = vec![c(0.0); 8];
        x[0] = c(1.0);
        let (a, d) = dwt1_level(&x, &f).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(a, vec![c(s), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(d, vec![c(s), c(0.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn dwt1_energy_and_inverse() {
        let f = daubechies_filters(4).unwrap();
        let x = noise(1, 16, 3).into_vec();
        let (a, d) = dwt1_level(&x, &f).unwrap();
        let e_in: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let e_out: f64 = a.iter().chain(&d).map(|v| v.norm_sqr()).sum();
        assert!((e_in - e_out).abs() < 1e-12);
        let back = idwt1_level(&a, &d, &f).unwrap();
        for (u, v) in x.iter().zip(&back) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn dwt1_errors() {
        let f = daubechies_filters(4).unwrap();
        assert!(matches!(dwt1_level(&[c(1.0); 7], &f), Err(Error::OddLength(7))));
        assert!(matches!(dwt1_level(&[c(1.0); 2], &f), Err(Error::SignalShorterThanFilter { len: 2, filter: 4 })));
    }

    #[test]
    fn dwt2_constant_image() {
        let plan = WaveletPlan::daubechies(4, 2).unwrap();
        let img = ComplexImage::from_fn(16, 16, |_, _| c(1.0));
        let w = dwt2(&img, &plan).unwrap();
        for r in 0..16 {
            for col in 0..16 {
                let expected = if r < 4 && col < 4 { 4.0 } else { 0.0 };
                assert!((w[(r, col)] - c(expected)).norm() < 1e-12, "({r},{col})");
            }
        }
    }

    #[test]
    fn zero_levels_is_identity() {
        let plan = WaveletPlan::daubechies(4, 0).unwrap();
        let img = noise(6, 10, 1);
        assert_eq!(dwt2(&img, &plan).unwrap(), img);
        assert_eq!(idwt2(&img, &plan).unwrap(), img);
    }

    #[test]
    fn dwt2_preserves_norm() {
        let plan = WaveletPlan::daubechies(4, 3).unwrap();
        let img = noise(32, 32, 5);
        let w = dwt2(&img, &plan).unwrap();
        assert!((w.norm() - img.norm()).abs() < 1e-10);
    }

    #[test]
    fn idwt2_zero_and_haar_corner() {
        let plan = WaveletPlan::daubechies(4, 2).unwrap();
        let zero = ComplexImage::zeros(8, 8);
        assert_eq!(idwt2(&zero, &plan).unwrap(), zero);

        let haar = WaveletPlan::daubechies(2, 1).unwrap();
        let mut coeffs = ComplexImage::zeros(2, 2);
        coeffs[(0, 0)] = c(1.0);
        let img = idwt2(&coeffs, &haar).unwrap();
        for v in img.as_slice() {
            assert!((v - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_64_r4() {
        let plan = WaveletPlan::daubechies(4, 4).unwrap();
        let img = noise(64, 64, 9);
        let back = idwt2(&dwt2(&img, &plan).unwrap(), &plan).unwrap();
        assert!(back.max_abs_diff(&img).unwrap() <= 1e-10);
    }

    #[test]
    fn deep_levels_shorter_than_filter_stay_orthonormal() {
        // 16x16 at r = 4 leaves a 2x2 block at the last level
        let plan = WaveletPlan::daubechies(4, 4).unwrap();
        let img = noise(16, 16, 2);
        let w = dwt2(&img, &plan).unwrap();
        assert!((w.norm() - img.norm()).abs() < 1e-12);
        assert!(idwt2(&w, &plan).unwrap().max_abs_diff(&img).unwrap() < 1e-12);
    }

    #[test]
    fn divisibility_errors_name_axis() {
        let plan = WaveletPlan::daubechies(4, 3).unwrap();
        let err = dwt2(&ComplexImage::zeros(16, 12), &plan).unwrap_err();
        assert!(matches!(err, Error::NotDivisible { axis: crate::Axis::Cols, len: 12, levels: 3 }));
        let err = idwt2(&ComplexImage::zeros(20, 16), &plan).unwrap_err();
        assert!(matches!(err, Error::NotDivisible { axis: crate::Axis::Rows, len: 20, levels: 3 }));
    }

    #[test]
    fn lowest_bin_sizes() {
        assert_eq!(lowest_bin_view(&ComplexImage::zeros(512, 512), 4).unwrap().shape(), (32, 32));
        let img = noise(16, 16, 4);
        assert_eq!(lowest_bin_view(&img, 0).unwrap(), img);
        let bin = lowest_bin_view(&img, 2).unwrap();
        assert_eq!(bin.shape(), (4, 4));
        assert_eq!(bin[(3, 2)], img[(3, 2)]);
        assert!(lowest_bin_view(&ComplexImage::zeros(12, 16), 3).is_err());
    }
}
