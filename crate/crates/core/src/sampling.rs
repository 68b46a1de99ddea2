//! Variable-density k-space sampling masks.
//!
//! Masks are stored in the DC-centered layout used for spectra: zero frequency
//! sits at `(rows / 2, cols / 2)`. Random masks draw each coordinate from an
//! independent Laplace distribution around DC using a PCG-64 generator
//! (`Lcg128Xsl64`), so masks are reproducible from `(arguments, seed)`.

use rand::{RngCore, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{check_divisible, Error, Result};
use crate::image::{ComplexImage, C64};

/// Upper bound on random draws per generated mask.
pub const DRAW_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    rows: usize,
    cols: usize,
    sampled: Vec<bool>,
    fsr_extent: Option<(usize, usize)>,
}

impl SamplingMask {
    /// Validates that the grid is non-empty, at least one location is sampled,
    /// and the declared fully sampled region (if any) is entirely sampled.
    pub fn new(rows: usize, cols: usize, sampled: Vec<bool>, fsr_extent: Option<(usize, usize)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyImage { rows, cols });
        }
        if rows.checked_mul(cols) != Some(sampled.len()) {
            return Err(Error::DataLength { rows, cols, len: sampled.len() });
        }
        if !sampled.iter().any(|&s| s) {
            return Err(Error::InvalidParameter("mask samples no locations".into()));
        }
        let mask = Self { rows, cols, sampled, fsr_extent };
        if let Some((h, w)) = fsr_extent {
            if h == 0 || w == 0 || h > rows || w > cols {
                return Err(Error::InvalidParameter(format!(
                    "fully sampled region {h}x{w} does not fit {rows}x{cols}"
                )));
            }
            let (r0, c0) = block_origin(rows, cols, h, w);
            let complete = (r0..r0 + h).all(|r| (c0..c0 + w).all(|c| mask.is_sampled(r, c)));
            if !complete {
                return Err(Error::InvalidParameter(format!(
                    "declared fully sampled region {h}x{w} is not fully sampled"
                )));
            }
        }
        Ok(mask)
    }

    /// Every location sampled.
    pub fn full(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0);
        Self { rows, cols, sampled: vec![true; rows * cols], fsr_extent: None }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Extent `(height, width)` of the fully sampled central block, if declared.
    pub fn fsr_extent(&self) -> Option<(usize, usize)> {
        self.fsr_extent
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.sampled
    }

    pub fn is_sampled(&self, r: usize, c: usize) -> bool {
        self.sampled[r * self.cols + c]
    }

    pub fn count(&self) -> usize {
        self.sampled.iter().filter(|&&s| s).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / (self.rows * self.cols) as f64
    }

    /// True if every location sampled by `other` is sampled here.
    pub fn contains(&self, other: &SamplingMask) -> bool {
        self.shape() == other.shape() && self.sampled.iter().zip(&other.sampled).all(|(&a, &b)| a || !b)
    }

    /// Zeroes every unsampled location.
    pub fn apply(&self, data: &ComplexImage) -> Result<ComplexImage> {
        let mut out = data.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, data: &mut ComplexImage) -> Result<()> {
        data.ensure_shape(self.shape())?;
        for (v, &s) in data.as_mut_slice().iter_mut().zip(&self.sampled) {
            if !s {
                *v = C64::default();
            }
        }
        Ok(())
    }
}

/// Top-left corner of the centered `h x w` block; the block spans
/// `rows/2 - h/2 .. rows/2 - h/2 + h`.
pub(crate) fn block_origin(rows: usize, cols: usize, h: usize, w: usize) -> (usize, usize) {
    (rows / 2 - h / 2, cols / 2 - w / 2)
}

/// Size of the central block whose full sampling meets Nyquist for the
/// lowest-frequency wavelet bin: `(rows / 2^r, cols / 2^r)`.
pub fn fsr_shape(rows: usize, cols: usize, levels: u32) -> Result<(usize, usize)> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyImage { rows, cols });
    }
    check_divisible(rows, cols, levels)?;
    Ok((rows >> levels, cols >> levels))
}

/// Mask sampling exactly the central [`fsr_shape`] block.
pub fn fsr_mask(rows: usize, cols: usize, levels: u32) -> Result<SamplingMask> {
    let (h, w) = fsr_shape(rows, cols, levels)?;
    let mut sampled = vec![false; rows * cols];
    fill_block(&mut sampled, rows, cols, h, w);
    SamplingMask::new(rows, cols, sampled, Some((h, w)))
}

fn fill_block(sampled: &mut [bool], rows: usize, cols: usize, h: usize, w: usize) -> usize {
    let (r0, c0) = block_origin(rows, cols, h, w);
    for r in r0..r0 + h {
        sampled[r * cols + c0..r * cols + c0 + w].fill(true);
    }
    h * w
}

pub fn sampling_fraction(mask: &SamplingMask) -> f64 {
    mask.fraction()
}

/// Uniform draw in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Zero-mean Laplace variate with scale `b` (inverse CDF).
fn laplace(rng: &mut Pcg64, b: f64) -> f64 {
    let p = unit(rng) - 0.5;
    -b * p.signum() * (1.0 - 2.0 * p.abs()).ln()
}

/// Random separable-Laplacian mask with an exact sample count.
///
/// Each axis offset from DC is Laplace distributed with standard deviation
/// `sigma_fraction * axis_length` (scale `sigma_fraction * axis_length / sqrt 2`).
/// Draws are rounded to the grid; off-grid and repeated draws are discarded.
/// With `fsr_levels = Some(r)` the central [`fsr_shape`] block is filled first;
/// otherwise the DC location is always included. Drawing stops as soon as the
/// count reaches `round(target_fraction * rows * cols)`.
pub fn gen_laplacian_mask(
    rows: usize,
    cols: usize,
    target_fraction: f64,
    sigma_fraction: f64,
    seed: u64,
    fsr_levels: Option<u32>,
) -> Result<SamplingMask> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyImage { rows, cols });
    }
    if !(target_fraction > 0.0 && target_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("sampling fraction {target_fraction} outside (0, 1]")));
    }
    if !(sigma_fraction > 0.0 && sigma_fraction.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma fraction {sigma_fraction} must be positive")));
    }
    let total = rows * cols;
    let target = ((target_fraction * total as f64).round() as usize).clamp(1, total);

    let mut sampled = vec![false; total];
    let mut fsr_extent = None;
    let mut count = match fsr_levels {
        Some(levels) => {
            let (h, w) = fsr_shape(rows, cols, levels)?;
            if target < h * w {
                return Err(Error::FsrExceedsBudget { target, fsr: h * w });
            }
            fsr_extent = Some((h, w));
            fill_block(&mut sampled, rows, cols, h, w)
        }
        None => {
            sampled[(rows / 2) * cols + cols / 2] = true;
            1
        }
    };

    if target == total {
        sampled.fill(true);
        return SamplingMask::new(rows, cols, sampled, fsr_extent);
    }

    let scale_r = sigma_fraction * rows as f64 / std::f64::consts::SQRT_2;
    let scale_c = sigma_fraction * cols as f64 / std::f64::consts::SQRT_2;
    let (center_r, center_c) = ((rows / 2) as f64, (cols / 2) as f64);
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut draws = 0u64;
    while count < target {
        if draws >= DRAW_BUDGET {
            return Err(Error::DrawBudgetExhausted { target, draws });
        }
        draws += 1;
        let r = (center_r + laplace(&mut rng, scale_r)).round();
        let c = (center_c + laplace(&mut rng, scale_c)).round();
        if !(r >= 0.0 && r < rows as f64 && c >= 0.0 && c < cols as f64) {
            continue;
        }
        let idx = r as usize * cols + c as usize;
        if !sampled[idx] {
            sampled[idx] = true;
            count += 1;
        }
    }
    SamplingMask::new(rows, cols, sampled, fsr_extent)
}
