//! Reconstruction pipelines (zero-fill, BPD, MSBPD), the regularization sweep
//! and the benchmark protocol.

use std::time::Instant;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Dft2, ForwardModel};
use crate::image::{ComplexImage, C64};
use crate::lowfreq::{low_freq_estimate_with, residual_data_with, DEFAULT_WINDOW_BETA};
use crate::metrics::{relative_error, ssim, SsimParams};
use crate::sampling::{fsr_mask, gen_laplacian_mask, SamplingMask};
use crate::solver::{fista, lambda_max, SolverConfig, SolverTrace};
use crate::wavelet::{idwt2_in_place, WaveletPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    ZeroFill,
    Bpd,
    Msbpd,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zerofill" | "zero-fill" => Ok(Method::ZeroFill),
            "bpd" => Ok(Method::Bpd),
            "msbpd" => Ok(Method::Msbpd),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ZeroFill => "zerofill",
            Method::Bpd => "bpd",
            Method::Msbpd => "msbpd",
        })
    }
}

/// Masked, DC-centered k-space data plus everything needed to reconstruct it.
#[derive(Clone, Debug)]
pub struct ReconRequest {
    pub data: ComplexImage,
    pub mask: SamplingMask,
    pub levels: u32,
    pub filter_order: usize,
    pub method: Method,
    pub window_beta: f64,
    /// Solver settings; `solver.lambda` is the regularization weight.
    pub solver: SolverConfig,
}

impl ReconRequest {
    /// Request with the default D4 filters, window and solver budget.
    pub fn new(data: ComplexImage, mask: SamplingMask, levels: u32, method: Method, lambda: f64) -> Self {
        Self {
            data,
            mask,
            levels,
            filter_order: 4,
            method,
            window_beta: DEFAULT_WINDOW_BETA,
            solver: SolverConfig::with_lambda(lambda),
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.solver.lambda = lambda;
        out
    }

    pub fn lambda(&self) -> f64 {
        self.solver.lambda
    }

    fn plan(&self) -> Result<WaveletPlan> {
        WaveletPlan::daubechies(self.filter_order, self.levels)
    }
}

#[derive(Clone, Debug)]
pub struct ReconReport {
    pub method: Method,
    pub image: ComplexImage,
    pub relative_error: Option<f64>,
    pub ssim: Option<f64>,
    pub lambda: f64,
    pub trace: SolverTrace,
    pub wall_time: f64,
}

/// Quality of a complex reconstruction against ground truth.
///
/// Real non-negative truth (natural images) is compared with the magnitude of
/// the estimate; any other truth is compared with the complex estimate. SSIM
/// always uses magnitudes.
pub fn score_against_truth(estimate: &ComplexImage, truth: &ComplexImage) -> Result<(f64, f64)> {
    estimate.ensure_shape(truth.shape())?;
    let truth_mag = truth.magnitude();
    let est_mag = estimate.magnitude();
    let natural = truth.as_slice().iter().all(|v| v.im == 0.0 && v.re >= 0.0);
    let err = if natural {
        relative_error(&ComplexImage::from_real(&est_mag), truth)?
    } else {
        relative_error(estimate, truth)?
    };
    let quality = ssim(&est_mag, &truth_mag, &SsimParams::default())?;
    Ok((err, quality))
}

fn finish(
    method: Method,
    image: ComplexImage,
    lambda: f64,
    trace: SolverTrace,
    started: Instant,
    truth: Option<&ComplexImage>,
) -> Result<ReconReport> {
    let (relative_error, ssim) = match truth {
        Some(t) => {
            let (e, s) = score_against_truth(&image, t)?;
            (Some(e), Some(s))
        }
        None => (None, None),
    };
    Ok(ReconReport { method, image, relative_error, ssim, lambda, trace, wall_time: started.elapsed().as_secs_f64() })
}

/// Inverse DFT of the (already masked) data.
pub fn recon_zero_fill(request: &ReconRequest, truth: Option<&ComplexImage>) -> Result<ReconReport> {
    let started = Instant::now();
    request.data.ensure_shape(request.mask.shape())?;
    let dft = Dft2::new(request.data.rows(), request.data.cols())?;
    let masked = request.mask.apply(&request.data)?;
    let image = dft.inverse(&masked)?;
    finish(Method::ZeroFill, image, request.lambda(), SolverTrace::default(), started, truth)
}

/// Penalized BPD on the wavelet coefficients; `y = W^-1 x`.
pub fn recon_bpd(request: &ReconRequest, truth: Option<&ComplexImage>) -> Result<ReconReport> {
    let started = Instant::now();
    let model = ForwardModel::new(request.mask.clone(), request.plan()?)?;
    request.data.ensure_shape(model.shape())?;
    let data = request.mask.apply(&request.data)?;
    let (mut image, trace) = fista(&model, &data, &request.solver)?;
    idwt2_in_place(&mut image, model.plan())?;
    finish(Method::Bpd, image, request.lambda(), trace, started, truth)
}

/// MSBPD: subtract the windowed low-frequency estimate, solve BPD on the
/// residual data, add the estimate back.
pub fn recon_msbpd(request: &ReconRequest, truth: Option<&ComplexImage>) -> Result<ReconReport> {
    let (rows, cols) = request.mask.shape();
    if !request.mask.contains(&fsr_mask(rows, cols, request.levels)?) {
        return Err(Error::MissingFsr);
    }
    request.data.ensure_shape((rows, cols))?;
    let dft = Dft2::new(rows, cols)?;
    let data = request.mask.apply(&request.data)?;
    let y_low = low_freq_estimate_with(&dft, &data, request.levels, request.window_beta)?;
    recon_msbpd_with_estimate(request, &y_low, truth)
}

/// MSBPD with a caller-supplied low-frequency estimate.
pub fn recon_msbpd_with_estimate(
    request: &ReconRequest,
    y_low: &ComplexImage,
    truth: Option<&ComplexImage>,
) -> Result<ReconReport> {
    let started = Instant::now();
    let model = ForwardModel::new(request.mask.clone(), request.plan()?)?;
    request.data.ensure_shape(model.shape())?;
    let data = request.mask.apply(&request.data)?;
    let residual = residual_data_with(model.dft(), &data, &request.mask, y_low)?;
    let (mut image, trace) = fista(&model, &residual, &request.solver)?;
    idwt2_in_place(&mut image, model.plan())?;
    let image = image.add(y_low)?;
    finish(Method::Msbpd, image, request.lambda(), trace, started, truth)
}

pub fn reconstruct(request: &ReconRequest, truth: Option<&ComplexImage>) -> Result<ReconReport> {
    match request.method {
        Method::ZeroFill => recon_zero_fill(request, truth),
        Method::Bpd => recon_bpd(request, truth),
        Method::Msbpd => recon_msbpd(request, truth),
    }
}

/// The data the solver sees for `request`: `b` for BPD, `beta` for MSBPD.
pub fn solver_data(request: &ReconRequest) -> Result<(ForwardModel, ComplexImage)> {
    let model = ForwardModel::new(request.mask.clone(), request.plan()?)?;
    let data = request.mask.apply(&request.data)?;
    let d = match request.method {
        Method::Msbpd => {
            let y_low = low_freq_estimate_with(model.dft(), &data, request.levels, request.window_beta)?;
            residual_data_with(model.dft(), &data, &request.mask, &y_low)?
        }
        _ => data,
    };
    Ok((model, d))
}

/// Runs `recon` for every lambda and keeps the lowest relative error against
/// `truth` (ties go to the smaller lambda). Grid points run independently.
pub fn lambda_sweep<F>(grid: &[f64], truth: &ComplexImage, recon: F) -> Result<(f64, ReconReport)>
where
    F: Fn(f64) -> Result<ReconReport> + Sync,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let runs: Vec<(f64, f64, ReconReport)> = grid
        .par_iter()
        .map(|&lambda| {
            let report = recon(lambda)?;
            let (err, _) = score_against_truth(&report.image, truth)?;
            Ok((lambda, err, report))
        })
        .collect::<Result<_>>()?;
    let best = runs
        .into_iter()
        .min_by(|a, b| {
            let ea = if a.1.is_nan() { f64::INFINITY } else { a.1 };
            let eb = if b.1.is_nan() { f64::INFINITY } else { b.1 };
            ea.total_cmp(&eb).then(a.0.total_cmp(&b.0))
        })
        .expect("grid is non-empty");
    Ok((best.0, best.2))
}

/// Regularization grid: relative points are multiplied by `||A^H d||_inf`.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaGrid {
    Relative { lo: f64, hi: f64, per_decade: usize },
    Absolute(Vec<f64>),
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Relative { lo: 1e-6, hi: 1e-1, per_decade: 12 }
    }
}

impl LambdaGrid {
    pub fn values(&self, lambda_max: f64) -> Vec<f64> {
        match self {
            LambdaGrid::Absolute(v) => v.clone(),
            LambdaGrid::Relative { lo, hi, per_decade } => {
                let (a, b) = (lo.log10(), hi.log10());
                let n = ((b - a) * *per_decade as f64).round() as usize;
                (0..=n)
                    .map(|i| {
                        let e = if n == 0 { a } else { a + (b - a) * i as f64 / n as f64 };
                        10f64.powf(e) * lambda_max
                    })
                    .collect()
            }
        }
    }
}

impl std::str::FromStr for LambdaGrid {
    type Err = Error;

    /// `rel:LO:HI:PER_DECADE` or a comma-separated list of absolute values.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("invalid lambda grid {s:?}"));
        if let Some(rest) = s.strip_prefix("rel:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            let per_decade: usize = parts[2].parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi >= lo && hi.is_finite() && per_decade > 0) {
                return Err(bad());
            }
            return Ok(LambdaGrid::Relative { lo, hi, per_decade });
        }
        let values: Vec<f64> =
            s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
        if values.is_empty() || values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(bad());
        }
        Ok(LambdaGrid::Absolute(values))
    }
}

/// Sweeps `request` over `grid` (relative grids scale by the method's own
/// `||A^H d||_inf`).
pub fn sweep_request(request: &ReconRequest, grid: &LambdaGrid, truth: &ComplexImage) -> Result<(f64, ReconReport)> {
    let values = match grid {
        LambdaGrid::Absolute(v) => v.clone(),
        LambdaGrid::Relative { .. } => {
            let (model, d) = solver_data(request)?;
            grid.values(lambda_max(&model, &d)?)
        }
    };
    lambda_sweep(&values, truth, |lambda| reconstruct(&request.with_lambda(lambda), Some(truth)))
}

/// `mask * F(truth)` plus optional complex white Gaussian noise of total
/// standard deviation `noise_sigma` on the sampled entries.
pub fn simulate_acquisition(
    truth: &ComplexImage,
    mask: &SamplingMask,
    noise_sigma: f64,
    seed: u64,
) -> Result<ComplexImage> {
    let dft = Dft2::new(truth.rows(), truth.cols())?;
    let mut data = dft.forward(truth)?;
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma / std::f64::consts::SQRT_2)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = Pcg64::seed_from_u64(seed ^ 0x6E6F_6973_6500_0000);
        for v in data.as_mut_slice() {
            *v += C64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    } else if noise_sigma < 0.0 || noise_sigma.is_nan() {
        return Err(Error::InvalidParameter(format!("noise sigma {noise_sigma} must be non-negative")));
    }
    mask.apply(&data)
}

/// One ground-truth image of a benchmark corpus.
#[derive(Clone, Debug)]
pub struct CorpusImage {
    pub id: String,
    pub image: ComplexImage,
}

#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    pub levels: u32,
    pub filter_order: usize,
    pub sigma_fraction: f64,
    pub window_beta: f64,
    pub noise_sigma: f64,
    pub solver: SolverConfig,
    pub grid: LambdaGrid,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            filter_order: 4,
            sigma_fraction: 0.20,
            window_beta: DEFAULT_WINDOW_BETA,
            noise_sigma: 0.0,
            solver: SolverConfig::default(),
            grid: LambdaGrid::default(),
        }
    }
}

/// Sampling percentages of the benchmark tables.
pub const DEFAULT_FRACTIONS: [f64; 4] = [0.27, 0.19, 0.15, 0.08];

/// One benchmark cell; also the JSON report schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: String,
    pub image_id: Option<String>,
    pub fraction: f64,
    pub seed: Option<u64>,
    pub lambda: f64,
    pub relative_error: Option<f64>,
    pub ssim: Option<f64>,
    pub iterations: usize,
    pub wall_time_s: f64,
}

pub const LABEL_BPD: &str = "bpd";
pub const LABEL_BPD_FSR: &str = "bpd_fsr";
pub const LABEL_MSBPD: &str = "msbpd";

impl BenchRecord {
    pub fn from_report(
        label: &str,
        image_id: Option<String>,
        fraction: f64,
        seed: Option<u64>,
        report: &ReconReport,
    ) -> Self {
        Self {
            method: label.to_string(),
            image_id,
            fraction,
            seed,
            lambda: report.lambda,
            relative_error: report.relative_error,
            ssim: report.ssim,
            iterations: report.trace.iterations_run,
            wall_time_s: report.wall_time,
        }
    }
}

fn method_rank(label: &str) -> usize {
    match label {
        LABEL_BPD => 0,
        LABEL_BPD_FSR => 1,
        LABEL_MSBPD => 2,
        _ => 3,
    }
}

/// For every `(image, fraction, seed)`: paired masks without and with the
/// fully sampled region at equal sample count, BPD on both and MSBPD on the
/// FSR mask, each with its own regularization sweep.
pub fn benchmark_suite(
    images: &[CorpusImage],
    fractions: &[f64],
    seeds: &[u64],
    config: &BenchmarkConfig,
) -> Result<Vec<BenchRecord>> {
    if images.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut cells = Vec::new();
    for image in images {
        for &fraction in fractions {
            for &seed in seeds {
                cells.push((image, fraction, seed));
            }
        }
    }
    let nested: Vec<Vec<BenchRecord>> = cells
        .par_iter()
        .map(|&(image, fraction, seed)| benchmark_cell(image, fraction, seed, config))
        .collect::<Result<_>>()?;
    let mut records: Vec<BenchRecord> = nested.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        a.image_id
            .cmp(&b.image_id)
            .then(b.fraction.total_cmp(&a.fraction))
            .then(a.seed.cmp(&b.seed))
            .then(method_rank(&a.method).cmp(&method_rank(&b.method)))
    });
    Ok(records)
}

fn benchmark_cell(image: &CorpusImage, fraction: f64, seed: u64, config: &BenchmarkConfig) -> Result<Vec<BenchRecord>> {
    let truth = &image.image;
    let (rows, cols) = truth.shape();
    let plain = gen_laplacian_mask(rows, cols, fraction, config.sigma_fraction, seed, None)?;
    let with_fsr = gen_laplacian_mask(rows, cols, fraction, config.sigma_fraction, seed, Some(config.levels))?;

    let runs = [
        (LABEL_BPD, &plain, Method::Bpd),
        (LABEL_BPD_FSR, &with_fsr, Method::Bpd),
        (LABEL_MSBPD, &with_fsr, Method::Msbpd),
    ];
    runs.iter()
        .map(|&(label, mask, method)| {
            let data = simulate_acquisition(truth, mask, config.noise_sigma, seed)?;
            let request = ReconRequest {
                data,
                mask: mask.clone(),
                levels: config.levels,
                filter_order: config.filter_order,
                method,
                window_beta: config.window_beta,
                solver: config.solver.clone(),
            };
            let (_, report) = sweep_request(&request, &config.grid, truth)?;
            Ok(BenchRecord::from_report(label, Some(image.id.clone()), fraction, Some(seed), &report))
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Median over seeds of a metric for one `(method, image, fraction)` group.
/// Extracts one score from a record.
pub type Metric = fn(&BenchRecord) -> Option<f64>;

pub fn median_metric(
    records: &[BenchRecord],
    method: &str,
    image_id: Option<&str>,
    fraction: f64,
    metric: Metric,
) -> Option<f64> {
    let mut values: Vec<f64> = records
        .iter()
        .filter(|r| {
            r.method == method && (image_id.is_none() || r.image_id.as_deref() == image_id) && r.fraction == fraction
        })
        .filter_map(metric)
        .collect();
    median(&mut values)
}

fn method_title(label: &str) -> &str {
    match label {
        LABEL_BPD => "BPD",
        LABEL_BPD_FSR => "BPD w/FSR",
        LABEL_MSBPD => "MSBPD",
        other => other,
    }
}

fn render_grid(title: &str, header: &[String], rows: &[(String, Vec<Option<f64>>)]) -> String {
    let mut out = format!("{title}\n");
    let first = rows.iter().map(|(n, _)| n.len()).chain([header[0].len()]).max().unwrap_or(0);
    let mut line = format!("{:<first$}", header[0]);
    for h in &header[1..] {
        line.push_str(&format!(" | {h:>6}"));
    }
    out.push_str(&line);
    out.push('\n');
    out.push_str(&"-".repeat(line.len()));
    out.push('\n');
    for (name, values) in rows {
        let mut line = format!("{name:<first$}");
        for v in values {
            match v {
                Some(v) => line.push_str(&format!(" | {v:>6.3}")),
                None => line.push_str(&format!(" | {:>6}", "-")),
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Text rendering of the benchmark: per image, error and SSIM against
/// sampling percentage; per percentage, error and SSIM against image.
/// Every entry is the median over seeds.
pub fn render_tables(records: &[BenchRecord]) -> String {
    let mut images: Vec<&str> = records.iter().filter_map(|r| r.image_id.as_deref()).collect();
    images.dedup();
    images.sort();
    images.dedup();
    let mut fractions: Vec<f64> = records.iter().map(|r| r.fraction).collect();
    fractions.sort_by(|a, b| b.total_cmp(a));
    fractions.dedup();
    let methods = [LABEL_BPD, LABEL_BPD_FSR, LABEL_MSBPD];
    let metrics: [(&str, Metric); 2] = [("Relative error", |r| r.relative_error), ("SSIM", |r| r.ssim)];

    let mut out = String::new();
    for (metric_name, metric) in metrics {
        for image in &images {
            let mut header = vec!["Sampling Percentage".to_string()];
            header.extend(fractions.iter().map(|f| format!("{:.0}%", f * 100.0)));
            let rows: Vec<_> = methods
                .iter()
                .map(|m| {
                    let vals = fractions.iter().map(|&f| median_metric(records, m, Some(image), f, metric)).collect();
                    (method_title(m).to_string(), vals)
                })
                .collect();
            out.push_str(&render_grid(&format!("{metric_name}: {image}"), &header, &rows));
            out.push('\n');
        }
        for &fraction in &fractions {
            let mut header = vec!["Image".to_string()];
            header.extend(images.iter().map(|s| s.to_string()));
            let rows: Vec<_> = methods
                .iter()
                .map(|m| {
                    let vals =
                        images.iter().map(|img| median_metric(records, m, Some(img), fraction, metric)).collect();
                    (method_title(m).to_string(), vals)
                })
                .collect();
            out.push_str(&render_grid(&format!("{metric_name} at {:.0}% sampling", fraction * 100.0), &header, &rows));
            out.push('\n');
        }
    }
    out
}
