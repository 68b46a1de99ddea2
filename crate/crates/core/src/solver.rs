//! FISTA with backtracking line search for
//! `min_z 1/2 ||A z - d||^2 + lambda ||z||_1` over complex coefficients.

use crate::error::{Error, Result};
use crate::fourier::ForwardModel;
use crate::image::{ComplexImage, C64};

pub use crate::recon::lambda_sweep;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub step_growth: f64,
    /// Relative objective change that ends the run early; 0 runs the full budget.
    pub objective_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            max_iters: 100,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            step_growth: 1.25,
            objective_tolerance: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { lambda, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda {} must be finite and non-negative", self.lambda)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::InvalidParameter("initial_step must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidParameter("backtrack_factor must lie in (0, 1)".into()));
        }
        if !(self.step_growth >= 1.0 && self.step_growth.is_finite()) {
            return Err(Error::InvalidParameter("step_growth must be >= 1".into()));
        }
        if self.objective_tolerance.is_nan() || self.objective_tolerance < 0.0 {
            return Err(Error::InvalidParameter("objective_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-iteration record of a solver run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub objectives: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub restarts: Vec<usize>,
    pub iterations_run: usize,
}

/// Proximal operator of `t |.|` on a complex scalar: magnitude shrinkage.
pub fn soft_threshold(v: C64, t: f64) -> C64 {
    let mag = v.norm();
    if mag <= t {
        C64::default()
    } else {
        v * (1.0 - t / mag)
    }
}

/// `1/2 ||A z - d||^2 + lambda ||z||_1`.
pub fn objective(model: &ForwardModel, d: &ComplexImage, z: &ComplexImage, lambda: f64) -> Result<f64> {
    d.ensure_shape(model.shape())?;
    let az = model.forward_apply(z)?;
    Ok(half_sq_dist(&az, d) + lambda * z.l1_norm())
}

fn half_sq_dist(a: &ComplexImage, b: &ComplexImage) -> f64 {
    0.5 * a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()
}

/// `out = w + mom * (w - prev)`.
fn extrapolate_into(out: &mut ComplexImage, w: &ComplexImage, prev: &ComplexImage, mom: f64) {
    for ((o, a), b) in out.as_mut_slice().iter_mut().zip(w.as_slice()).zip(prev.as_slice()) {
        *o = a + (a - b) * mom;
    }
}

/// Buffers reused across iterations.
struct Workspace {
    grad: ComplexImage,
    cand: ComplexImage,
    acand: ComplexImage,
}

/// One proximal-gradient step from `w` with backtracking on the step size.
/// The accepted point and its image under `A` are left in `work.cand` and
/// `work.acand`; returns the smooth term there and the accepted step.
#[allow(clippy::too_many_arguments)]
fn prox_step(
    model: &ForwardModel,
    d: &ComplexImage,
    w: &ComplexImage,
    aw: &ComplexImage,
    lambda: f64,
    mut step: f64,
    factor: f64,
    work: &mut Workspace,
) -> Result<(f64, f64)> {
    for ((g, a), b) in work.grad.as_mut_slice().iter_mut().zip(aw.as_slice()).zip(d.as_slice()) {
        *g = a - b;
    }
    let smooth_w = 0.5 * work.grad.norm_sqr();
    model.adjoint_in_place(&mut work.grad)?;
    const MAX_BACKTRACKS: usize = 200;
    for attempt in 0..=MAX_BACKTRACKS {
        // prox_{s lambda}(w - s g) = s * prox_lambda(w / s - g); the scaled form
        // keeps the lambda >= ||A^H d||_inf null solution exact from w = 0
        let inv = 1.0 / step;
        for ((c, wi), gi) in work.cand.as_mut_slice().iter_mut().zip(w.as_slice()).zip(work.grad.as_slice()) {
            *c = soft_threshold(wi * inv - gi, lambda) * step;
        }
        work.acand.copy_from(&work.cand)?;
        model.forward_in_place(&mut work.acand)?;
        let smooth = half_sq_dist(&work.acand, d);

        let mut lin = 0.0;
        let mut dist = 0.0;
        for ((zi, wi), gi) in work.cand.as_slice().iter().zip(w.as_slice()).zip(work.grad.as_slice()) {
            let diff = zi - wi;
            lin += (gi.conj() * diff).re;
            dist += diff.norm_sqr();
        }
        let bound = smooth_w + lin + dist / (2.0 * step);
        let slack = 1e-12 * smooth_w.abs().max(bound.abs());
        if smooth <= bound + slack || attempt == MAX_BACKTRACKS {
            return Ok((smooth, step));
        }
        step *= factor;
    }
    unreachable!()
}

/// Accelerated proximal gradient from `z0 = 0`.
///
/// The step size grows by `step_growth` each iteration and backtracks until the
/// quadratic majorization holds at the candidate. Whenever the accelerated
/// candidate would increase the objective, momentum restarts (`t = 1`) and the
/// step is redone from the current iterate, so the recorded objectives never
/// increase.
pub fn fista(model: &ForwardModel, d: &ComplexImage, config: &SolverConfig) -> Result<(ComplexImage, SolverTrace)> {
    config.validate()?;
    d.ensure_shape(model.shape())?;
    let (rows, cols) = model.shape();
    let lambda = config.lambda;
    let zeros = || ComplexImage::zeros(rows, cols);

    let mut z = zeros();
    let mut az = zeros();
    let mut z_prev = zeros();
    let mut az_prev = zeros();
    let mut w = zeros();
    let mut aw = zeros();
    let mut work = Workspace { grad: zeros(), cand: zeros(), acand: zeros() };
    let mut current = 0.5 * d.norm_sqr();
    let mut t = 1.0f64;
    let mut step = config.initial_step;
    let mut trace = SolverTrace::default();

    for iter in 0..config.max_iters {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        let trial_step = if iter == 0 { step } else { step * config.step_growth };

        extrapolate_into(&mut w, &z, &z_prev, mom);
        extrapolate_into(&mut aw, &az, &az_prev, mom);
        let (mut smooth, mut accepted) =
            prox_step(model, d, &w, &aw, lambda, trial_step, config.backtrack_factor, &mut work)?;
        let mut value = smooth + lambda * work.cand.l1_norm();
        t = t_next;

        if mom > 0.0 && value > current {
            (smooth, accepted) = prox_step(model, d, &z, &az, lambda, trial_step, config.backtrack_factor, &mut work)?;
            value = smooth + lambda * work.cand.l1_norm();
            t = 1.0;
            trace.restarts.push(iter);
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: iter });
        }

        std::mem::swap(&mut z_prev, &mut z);
        std::mem::swap(&mut z, &mut work.cand);
        std::mem::swap(&mut az_prev, &mut az);
        std::mem::swap(&mut az, &mut work.acand);
        step = accepted;
        trace.objectives.push(value);
        trace.step_sizes.push(step);
        trace.iterations_run = iter + 1;

        let change = (current - value).abs();
        current = value;
        if config.objective_tolerance > 0.0 && change <= config.objective_tolerance * current.abs().max(1.0) {
            break;
        }
    }
    Ok((z, trace))
}

/// Prox-gradient fixed-point residual `||z - prox(z - s grad)|| / max(1, ||z||)`.
pub fn prox_residual(model: &ForwardModel, d: &ComplexImage, z: &ComplexImage, lambda: f64, step: f64) -> Result<f64> {
    let residual = model.forward_apply(z)?.sub(d)?;
    let grad = model.adjoint_apply(&residual)?;
    let mut sq = 0.0;
    for (zi, gi) in z.as_slice().iter().zip(grad.as_slice()) {
        sq += (zi - soft_threshold(zi - gi * step, step * lambda)).norm_sqr();
    }
    Ok(sq.sqrt() / z.norm().max(1.0))
}

/// Smallest lambda for which `z = 0` is optimal: `||A^H d||_inf`.
pub fn lambda_max(model: &ForwardModel, d: &ComplexImage) -> Result<f64> {
    Ok(model.adjoint_apply(d)?.max_abs())
}
