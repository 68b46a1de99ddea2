use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use msbpd::corpus::{load_corpus_dir, phantom};
use msbpd::io::{load_complex, load_image, load_mask, save_complex, save_image, save_mask};
use msbpd::lowfreq::{low_freq_estimate, DEFAULT_WINDOW_BETA};
use msbpd::metrics::near_zero_fraction_with_reference;
use msbpd::recon::{
    benchmark_suite, reconstruct, render_tables, simulate_acquisition, sweep_request, BenchRecord, BenchmarkConfig,
    CorpusImage, LambdaGrid, ReconReport, DEFAULT_FRACTIONS,
};
use msbpd::sampling::gen_laplacian_mask;
use msbpd::wavelet::{dwt2, lowest_bin_view};
use msbpd::{Dft2, Method, ReconRequest, SolverConfig, WaveletPlan};

#[derive(Parser)]
#[command(name = "msbpd", version, about = "Wavelet-domain compressed sensing reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random separable-Laplacian sampling mask.
    MakeMask(MakeMaskArgs),
    /// Simulate masked k-space data from an image.
    Acquire(AcquireArgs),
    /// Forward wavelet transform of an image.
    Transform(TransformArgs),
    /// Reconstruct an image from masked k-space data.
    Recon(ReconArgs),
    /// Reconstruct over a regularization grid and keep the best result against a truth image.
    Sweep(SweepArgs),
    /// Run the BPD / BPD with FSR / MSBPD comparison over a corpus.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct MakeMaskArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    fraction: f64,
    /// Laplacian standard deviation as a fraction of each axis length.
    #[arg(long, default_value_t = 0.20)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fully sample the central block sized for this many wavelet levels.
    #[arg(long)]
    fsr_levels: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AcquireArgs {
    /// Ground-truth image (PGM).
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// Standard deviation of complex Gaussian noise on sampled entries.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    levels: u32,
    #[arg(long, default_value_t = 4)]
    filter_order: usize,
    /// Subtract the windowed low-frequency estimate before transforming.
    #[arg(long)]
    subtract_lowfreq: bool,
    #[arg(long, default_value_t = DEFAULT_WINDOW_BETA)]
    window_beta: f64,
    #[arg(long)]
    out: PathBuf,
    /// Print near-zero coefficient fractions (threshold 0.01 of max |W y|).
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Masked k-space data (CSI1).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, default_value = "msbpd")]
    method: Method,
    #[arg(long, default_value_t = 4)]
    levels: u32,
    #[arg(long, default_value_t = 4)]
    filter_order: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW_BETA)]
    window_beta: f64,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Reconstructed complex image (CSI1).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Magnitude of the reconstruction as an 8-bit PGM.
    #[arg(long)]
    image_out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReconArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Ground truth for scoring.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long)]
    truth: PathBuf,
    /// `rel:LO:HI:PER_DECADE` (relative to ||A^H d||_inf) or comma-separated values.
    #[arg(long, default_value = "rel:1e-6:1e-1:12")]
    lambda_grid: LambdaGrid,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Directory of PGM images.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Add the synthetic phantom at this size.
    #[arg(long)]
    phantom: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FRACTIONS)]
    fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3])]
    seeds: Vec<u64>,
    #[arg(long, default_value = "rel:1e-6:1e-1:12")]
    lambda_grid: LambdaGrid,
    #[arg(long, default_value_t = 4)]
    levels: u32,
    #[arg(long, default_value_t = 4)]
    filter_order: usize,
    #[arg(long, default_value_t = 0.20)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON records.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let name = err.chain().find_map(|e| e.downcast_ref::<msbpd::Error>()).map_or("Error", |e| e.name());
            eprintln!("error[{name}]: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::MakeMask(a) => make_mask(a),
        Command::Acquire(a) => acquire(a),
        Command::Transform(a) => transform(a),
        Command::Recon(a) => recon(a),
        Command::Sweep(a) => sweep(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

fn make_mask(a: MakeMaskArgs) -> Result<()> {
    let mask = gen_laplacian_mask(a.rows, a.cols, a.fraction, a.sigma, a.seed, a.fsr_levels)?;
    save_mask(&a.out, &mask).with_context(|| format!("writing {}", a.out.display()))?;
    println!("{:.6}", mask.fraction());
    Ok(())
}

fn acquire(a: AcquireArgs) -> Result<()> {
    let truth = read(&a.truth, load_image)?;
    let mask = read(&a.mask, load_mask)?;
    let data = simulate_acquisition(&truth, &mask, a.noise_sigma, a.seed)?;
    save_complex(&a.out, &data).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn transform(a: TransformArgs) -> Result<()> {
    let image = read(&a.input, load_image)?;
    let plan = WaveletPlan::daubechies(a.filter_order, a.levels)?;
    plan.check_shape(image.rows(), image.cols())?;
    let plain = dwt2(&image, &plan)?;
    let coeffs = if a.subtract_lowfreq {
        let spectrum = Dft2::new(image.rows(), image.cols())?.forward(&image)?;
        let y_low = low_freq_estimate(&spectrum, a.levels, a.window_beta)?;
        dwt2(&image.sub(&y_low)?, &plan)?
    } else {
        plain.clone()
    };
    save_complex(&a.out, &coeffs).with_context(|| format!("writing {}", a.out.display()))?;
    if a.stats {
        let reference = plain.max_abs();
        let ll = lowest_bin_view(&coeffs, a.levels)?;
        println!("near_zero_fraction {:.6}", near_zero_fraction_with_reference(&coeffs, 0.01, reference));
        println!("lowest_bin_near_zero_fraction {:.6}", near_zero_fraction_with_reference(&ll, 0.01, reference));
    }
    Ok(())
}

fn request_from(s: &SolveArgs, lambda: f64) -> Result<ReconRequest> {
    let data = read(&s.data, load_complex)?;
    let mask = read(&s.mask, load_mask)?;
    Ok(ReconRequest {
        data,
        mask,
        levels: s.levels,
        filter_order: s.filter_order,
        method: s.method,
        window_beta: s.window_beta,
        solver: SolverConfig { max_iters: s.iters, ..SolverConfig::with_lambda(lambda) },
    })
}

fn write_outputs(s: &SolveArgs, request: &ReconRequest, truth_path: Option<&Path>, report: &ReconReport) -> Result<()> {
    if let Some(path) = &s.out {
        save_complex(path, &report.image).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &s.image_out {
        save_image(path, &report.image.magnitude()).with_context(|| format!("writing {}", path.display()))?;
    }
    let image_id = truth_path.and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned());
    let record = BenchRecord::from_report(&report.method.to_string(), image_id, request.mask.fraction(), None, report);
    let json = serde_json::to_string_pretty(&record)?;
    match &s.report {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn recon(a: ReconArgs) -> Result<()> {
    let request = request_from(&a.solve, a.lambda)?;
    let truth = a.truth.as_deref().map(|p| read(p, load_image)).transpose()?;
    let report = reconstruct(&request, truth.as_ref())?;
    write_outputs(&a.solve, &request, a.truth.as_deref(), &report)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let request = request_from(&a.solve, 0.0)?;
    let truth = read(&a.truth, load_image)?;
    let (_, report) = sweep_request(&request, &a.lambda_grid, &truth)?;
    write_outputs(&a.solve, &request, Some(&a.truth), &report)
}

fn benchmark(a: BenchmarkArgs) -> Result<()> {
    if let Some(jobs) = a.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global()?;
    }
    let mut images = match &a.images {
        Some(dir) => load_corpus_dir(dir).with_context(|| format!("reading {}", dir.display()))?,
        None => Vec::new(),
    };
    if let Some(n) = a.phantom {
        images.push(CorpusImage { id: "phantom".into(), image: phantom(n, n) });
    }
    let config = BenchmarkConfig {
        levels: a.levels,
        filter_order: a.filter_order,
        sigma_fraction: a.sigma,
        window_beta: DEFAULT_WINDOW_BETA,
        noise_sigma: a.noise_sigma,
        solver: SolverConfig { max_iters: a.iters, ..SolverConfig::default() },
        grid: a.lambda_grid,
    };
    let records = benchmark_suite(&images, &a.fractions, &a.seeds, &config)?;
    if let Some(path) = &a.out {
        fs::write(path, serde_json::to_string_pretty(&records)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", render_tables(&records));
    Ok(())
}

fn read<T>(path: &Path, load: fn(&Path) -> msbpd::Result<T>) -> Result<T> {
    load(path).with_context(|| format!("reading {}", path.display()))
}
