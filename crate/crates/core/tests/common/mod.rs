//! Dense reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use msbpd::{ComplexImage, SamplingMask, C64};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

pub type Matrix = Vec<Vec<C64>>;

pub fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

pub fn random_image(rng: &mut Pcg64, rows: usize, cols: usize) -> ComplexImage {
    ComplexImage::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_mask(rng: &mut Pcg64, rows: usize, cols: usize, p: f64) -> SamplingMask {
    let mut sampled: Vec<bool> = (0..rows * cols).map(|_| rng.random::<f64>() < p).collect();
    sampled[(rows / 2) * cols + cols / 2] = true;
    SamplingMask::new(rows, cols, sampled, None).unwrap()
}

pub fn zeros(n: usize, m: usize) -> Matrix {
    vec![vec![C64::default(); m]; n]
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let v = a[i][l];
            if v == C64::default() {
                continue;
            }
            for j in 0..m {
                out[i][j] += v * b[l][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Matrix) -> Matrix {
    let mut out = zeros(a[0].len(), a.len());
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = v.conj();
        }
    }
    out
}

pub fn identity(n: usize) -> Matrix {
    let mut out = zeros(n, n);
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    out
}

pub fn matvec(a: &Matrix, x: &[C64]) -> Vec<C64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// One periodic analysis level as an `n x n` matrix: low-pass rows on top.
pub fn analysis_matrix_1d(n: usize, h: &[f64]) -> Matrix {
    let len = h.len();
    let g: Vec<f64> = (0..len).map(|k| if k % 2 == 0 { h[len - 1 - k] } else { -h[len - 1 - k] }).collect();
    let mut out = zeros(n, n);
    for m in 0..n / 2 {
        for k in 0..len {
            out[m][(2 * m + k) % n] += C64::new(h[k], 0.0);
            out[n / 2 + m][(2 * m + k) % n] += C64::new(g[k], 0.0);
        }
    }
    out
}

/// Multi-level 2-D analysis of a square image by `H X H^T` on the shrinking
/// top-left block.
pub fn dense_dwt2(image: &ComplexImage, h: &[f64], levels: u32) -> ComplexImage {
    let n = image.rows();
    let mut x: Matrix = (0..n).map(|r| image.row(r).to_vec()).collect();
    let mut size = n;
    for _ in 0..levels {
        let hm = analysis_matrix_1d(size, h);
        let block: Matrix = x[..size].iter().map(|row| row[..size].to_vec()).collect();
        let out = matmul(&matmul(&hm, &block), &adjoint(&hm));
        for r in 0..size {
            x[r][..size].copy_from_slice(&out[r]);
        }
        size /= 2;
    }
    ComplexImage::from_fn(n, n, |r, c| x[r][c])
}

/// Column-stacked (row-major vectorized) operator matrix of `f`.
pub fn operator_matrix(rows: usize, cols: usize, f: impl Fn(&ComplexImage) -> ComplexImage) -> Matrix {
    let n = rows * cols;
    let mut out = zeros(n, n);
    for j in 0..n {
        let mut e = ComplexImage::zeros(rows, cols);
        e.as_mut_slice()[j] = C64::new(1.0, 0.0);
        let col = f(&e);
        for (i, v) in col.as_slice().iter().enumerate() {
            out[i][j] = *v;
        }
    }
    out
}

/// Centered unitary DFT along one axis: output `u` is frequency `u - n/2`.
pub fn centered_dft_matrix(n: usize) -> Matrix {
    let mut out = zeros(n, n);
    let scale = 1.0 / (n as f64).sqrt();
    for u in 0..n {
        let k = u as f64 - (n / 2) as f64;
        for x in 0..n {
            let phase = -2.0 * std::f64::consts::PI * k * x as f64 / n as f64;
            out[u][x] = C64::from_polar(scale, phase);
        }
    }
    out
}

pub fn dense_dft2(image: &ComplexImage) -> ComplexImage {
    let (rows, cols) = image.shape();
    let x: Matrix = (0..rows).map(|r| image.row(r).to_vec()).collect();
    let fr = centered_dft_matrix(rows);
    let fc = centered_dft_matrix(cols);
    let ct: Matrix = (0..cols).map(|i| (0..cols).map(|j| fc[j][i]).collect()).collect();
    let y = matmul(&matmul(&fr, &x), &ct);
    ComplexImage::from_fn(rows, cols, |r, c| y[r][c])
}

/// Dense `A = M F W^T` for a square image.
pub fn dense_forward_matrix(mask: &SamplingMask, h: &[f64], levels: u32) -> Matrix {
    let (rows, cols) = mask.shape();
    let w = operator_matrix(rows, cols, |e| dense_dwt2(e, h, levels));
    let f = operator_matrix(rows, cols, dense_dft2);
    let mut a = matmul(&f, &adjoint(&w));
    for (i, row) in a.iter_mut().enumerate() {
        if !mask.as_slice()[i] {
            row.iter_mut().for_each(|v| *v = C64::default());
        }
    }
    a
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm())).fold(0.0, f64::max)
}

pub fn soft(v: C64, t: f64) -> C64 {
    let m = v.norm();
    if m <= t {
        C64::default()
    } else {
        v * ((m - t) / m)
    }
}

pub fn dense_objective(a: &Matrix, d: &[C64], z: &[C64], lambda: f64) -> f64 {
    let az = matvec(a, z);
    let fit: f64 = az.iter().zip(d).map(|(p, q)| (p - q).norm_sqr()).sum();
    0.5 * fit + lambda * z.iter().map(|v| v.norm()).sum::<f64>()
}

/// Plain ISTA with unit step on the dense operator (`||A|| <= 1`).
pub fn ista(a: &Matrix, d: &[C64], lambda: f64, iters: usize) -> Vec<C64> {
    let ah = adjoint(a);
    let mut z = vec![C64::default(); d.len()];
    for _ in 0..iters {
        let r: Vec<C64> = matvec(a, &z).iter().zip(d).map(|(p, q)| p - q).collect();
        let g = matvec(&ah, &r);
        for (zi, gi) in z.iter_mut().zip(&g) {
            *zi = soft(*zi - gi, lambda);
        }
    }
    z
}

pub fn corpus_dir(size: usize) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(size.to_string())
}

/// FNV-1a over the sampled flags in row-major order.
pub fn fnv1a(mask: &SamplingMask) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in mask.as_slice() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// `(rows, cols, fraction, seed, fsr_levels, digest)` recorded from mask
/// generation with sigma fraction 0.2. Bit patterns are part of the
/// reproducibility contract across platforms.
pub type MaskCase = (usize, usize, f64, u64, Option<u32>, u64);

pub const MASK_DIGESTS: &[MaskCase] = &[
    (64, 64, 0.2, 7, None, 0xa0ce_e3d9_f745_55c2),
    (256, 256, 0.08, 1, Some(4), 0xb7fd_9e4d_7247_b1aa),
    (96, 128, 0.27, 42, Some(2), 0xcfe4_8426_1af0_9f11),
];
