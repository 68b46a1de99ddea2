//! Unitary 2-D DFT in DC-centered layout and the composite sensing operator
//! `A = M F W^-1`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::image::{ComplexImage, C64};
use crate::sampling::SamplingMask;
use crate::wavelet::{dwt2_in_place, idwt2_in_place, WaveletPlan};

/// Precomputed unitary 2-D DFT for one grid size.
///
/// Spatial images use the natural layout (origin at index `(0, 0)`); spectra
/// are DC-centered, with zero frequency at `(rows / 2, cols / 2)`.
#[derive(Clone)]
pub struct Dft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft2").field("rows", &self.rows).field("cols", &self.cols).finish()
    }
}

impl Dft2 {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyImage { rows, cols });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Unitary forward transform; output is DC-centered.
    pub fn forward(&self, image: &ComplexImage) -> Result<ComplexImage> {
        let mut out = image.clone();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    /// Unitary inverse transform of a DC-centered spectrum.
    pub fn inverse(&self, spectrum: &ComplexImage) -> Result<ComplexImage> {
        let mut out = spectrum.clone();
        self.inverse_in_place(&mut out)?;
        Ok(out)
    }

    pub fn forward_in_place(&self, image: &mut ComplexImage) -> Result<()> {
        image.ensure_shape(self.shape())?;
        let (rows, cols) = self.shape();
        let data = image.as_mut_slice();
        if self.even() {
            // centering by (-1)^(r + c) modulation
            checkerboard(data, cols);
            self.transform(data, &self.row_fwd, &self.col_fwd);
        } else {
            self.transform(data, &self.row_fwd, &self.col_fwd);
            let shifted = shift(data, rows, cols, rows / 2, cols / 2);
            data.copy_from_slice(&shifted);
        }
        Ok(())
    }

    pub fn inverse_in_place(&self, spectrum: &mut ComplexImage) -> Result<()> {
        spectrum.ensure_shape(self.shape())?;
        let (rows, cols) = self.shape();
        let data = spectrum.as_mut_slice();
        if self.even() {
            self.transform(data, &self.row_inv, &self.col_inv);
            checkerboard(data, cols);
        } else {
            let shifted = shift(data, rows, cols, rows - rows / 2, cols - cols / 2);
            data.copy_from_slice(&shifted);
            self.transform(data, &self.row_inv, &self.col_inv);
        }
        Ok(())
    }

    fn transform(&self, data: &mut [C64], row_fft: &Arc<dyn Fft<f64>>, col_fft: &Arc<dyn Fft<f64>>) {
        let (rows, cols) = self.shape();
        let fft_scratch = row_fft.get_inplace_scratch_len().max(col_fft.get_inplace_scratch_len());
        with_scratch(rows * cols + fft_scratch, |buf| {
            let (transposed, scratch) = buf.split_at_mut(rows * cols);
            row_fft.process_with_scratch(data, &mut scratch[..row_fft.get_inplace_scratch_len()]);
            transpose::transpose(data, transposed, cols, rows);
            col_fft.process_with_scratch(transposed, &mut scratch[..col_fft.get_inplace_scratch_len()]);
            transpose::transpose(transposed, data, rows, cols);
        });
        let norm = 1.0 / ((rows * cols) as f64).sqrt();
        for v in data.iter_mut() {
            *v *= norm;
        }
    }

    fn even(&self) -> bool {
        self.rows.is_multiple_of(2) && self.cols.is_multiple_of(2)
    }
}

thread_local! {
    static SCRATCH: RefCell<Vec<C64>> = const { RefCell::new(Vec::new()) };
}

/// Runs `f` on a per-thread buffer of at least `len` elements.
fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [C64]) -> R) -> R {
    SCRATCH.with(|cell| {
        let mut buf = cell.borrow_mut();
        if buf.len() < len {
            buf.resize(len, C64::default());
        }
        f(&mut buf[..len])
    })
}

/// Multiplies entry `(r, c)` by `(-1)^(r + c)`.
fn checkerboard(data: &mut [C64], cols: usize) {
    for (r, row) in data.chunks_exact_mut(cols).enumerate() {
        for v in row.iter_mut().skip((r + 1) % 2).step_by(2) {
            *v = -*v;
        }
    }
}

/// Circular shift: `out[(r + dr) % rows][(c + dc) % cols] = data[r][c]`.
fn shift(data: &[C64], rows: usize, cols: usize, dr: usize, dc: usize) -> Vec<C64> {
    let mut out = vec![C64::default(); rows * cols];
    for r in 0..rows {
        let rr = (r + dr) % rows;
        for c in 0..cols {
            out[rr * cols + (c + dc) % cols] = data[r * cols + c];
        }
    }
    out
}

/// Unitary 2-D DFT with DC-centered output.
pub fn dft2_unitary(image: &ComplexImage) -> Result<ComplexImage> {
    Dft2::new(image.rows(), image.cols())?.forward(image)
}

/// Inverse of [`dft2_unitary`].
pub fn idft2_unitary(spectrum: &ComplexImage) -> Result<ComplexImage> {
    Dft2::new(spectrum.rows(), spectrum.cols())?.inverse(spectrum)
}

/// Sensing operator `A = M F W^-1` over in-plane wavelet coefficients.
///
/// Data live on the full k-space grid with zeros at unsampled positions.
#[derive(Clone, Debug)]
pub struct ForwardModel {
    mask: SamplingMask,
    plan: WaveletPlan,
    dft: Dft2,
}

impl ForwardModel {
    pub fn new(mask: SamplingMask, plan: WaveletPlan) -> Result<Self> {
        let (rows, cols) = mask.shape();
        plan.check_shape(rows, cols)?;
        let dft = Dft2::new(rows, cols)?;
        Ok(Self { mask, plan, dft })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn plan(&self) -> &WaveletPlan {
        &self.plan
    }

    pub fn dft(&self) -> &Dft2 {
        &self.dft
    }

    /// `M F W^-1 z`.
    pub fn forward_apply(&self, z: &ComplexImage) -> Result<ComplexImage> {
        let mut out = z.clone();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    /// `W F* M v`, the exact adjoint of [`ForwardModel::forward_apply`].
    pub fn adjoint_apply(&self, v: &ComplexImage) -> Result<ComplexImage> {
        let mut out = v.clone();
        self.adjoint_in_place(&mut out)?;
        Ok(out)
    }

    /// Overwrites `z` with `A z`.
    pub fn forward_in_place(&self, z: &mut ComplexImage) -> Result<()> {
        z.ensure_shape(self.shape())?;
        idwt2_in_place(z, &self.plan)?;
        self.dft.forward_in_place(z)?;
        self.mask.apply_in_place(z)
    }

    /// Overwrites `v` with `A^H v`.
    pub fn adjoint_in_place(&self, v: &mut ComplexImage) -> Result<()> {
        v.ensure_shape(self.shape())?;
        self.mask.apply_in_place(v)?;
        self.dft.inverse_in_place(v)?;
        dwt2_in_place(v, &self.plan)
    }
}

pub fn forward_apply(model: &ForwardModel, z: &ComplexImage) -> Result<ComplexImage> {
    model.forward_apply(z)
}

pub fn adjoint_apply(model: &ForwardModel, v: &ComplexImage) -> Result<ComplexImage> {
    model.adjoint_apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(rows: usize, cols: usize, seed: u64) -> ComplexImage {
        let mut state = seed ^ 0x9E37_79B9_7F4A_7C15;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexImage::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let n = 8;
        let mut img = ComplexImage::zeros(n, n);
        img[(0, 0)] = C64::new(1.0, 0.0);
        let spec = dft2_unitary(&img).unwrap();
        for v in spec.as_slice() {
            assert!((v.norm() - 1.0 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_concentrates_at_dc() {
        let n = 16;
        let img = ComplexImage::from_fn(n, n, |_, _| C64::new(2.5, 0.0));
        let spec = dft2_unitary(&img).unwrap();
        for r in 0..n {
            for c in 0..n {
                let expected = if (r, c) == (n / 2, n / 2) { 2.5 * n as f64 } else { 0.0 };
                assert!((spec[(r, c)] - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary_and_invertible() {
        let img = noise(32, 32, 1);
        let spec = dft2_unitary(&img).unwrap();
        assert!((spec.norm() - img.norm()).abs() < 1e-10);
        let img = noise(64, 64, 2);
        let back = idft2_unitary(&dft2_unitary(&img).unwrap()).unwrap();
        assert!(back.max_abs_diff(&img).unwrap() < 1e-10);
    }

    #[test]
    fn odd_and_rectangular_sizes_round_trip() {
        for (r, c) in [(5, 7), (6, 9), (3, 16)] {
            let img = noise(r, c, 3);
            let spec = dft2_unitary(&img).unwrap();
            assert!((spec.norm() - img.norm()).abs() < 1e-12);
            assert!(idft2_unitary(&spec).unwrap().max_abs_diff(&img).unwrap() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_dc_only() {
        let n = 16;
        let mut spec = ComplexImage::zeros(n, n);
        spec[(n / 2, n / 2)] = C64::new(n as f64, 0.0);
        let img = idft2_unitary(&spec).unwrap();
        for v in img.as_slice() {
            assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let zero = ComplexImage::zeros(n, n);
        assert_eq!(idft2_unitary(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn full_mask_identity_wavelet_reduces_to_dft() {
        let model = ForwardModel::new(SamplingMask::full(16, 16), WaveletPlan::daubechies(4, 0).unwrap()).unwrap();
        let z = noise(16, 16, 4);
        let a = model.forward_apply(&z).unwrap();
        assert!(a.max_abs_diff(&dft2_unitary(&z).unwrap()).unwrap() < 1e-14);
        let h = model.adjoint_apply(&z).unwrap();
        assert!(h.max_abs_diff(&idft2_unitary(&z).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn forward_zero_outside_mask() {
        let mask = crate::sampling::gen_laplacian_mask(16, 16, 0.4, 0.2, 7, None).unwrap();
        let model = ForwardModel::new(mask.clone(), WaveletPlan::daubechies(4, 2).unwrap()).unwrap();
        let out = model.forward_apply(&noise(16, 16, 5)).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                if !mask.is_sampled(r, c) {
                    assert_eq!(out[(r, c)], C64::default());
                }
            }
        }
        let zero = ComplexImage::zeros(16, 16);
        assert_eq!(model.forward_apply(&zero).unwrap().max_abs(), 0.0);
        assert_eq!(model.adjoint_apply(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let model = ForwardModel::new(SamplingMask::full(16, 16), WaveletPlan::daubechies(4, 2).unwrap()).unwrap();
        let z = ComplexImage::zeros(8, 16);
        assert!(matches!(model.forward_apply(&z), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(model.adjoint_apply(&z), Err(Error::ShapeMismatch { .. })));
    }
}
