//! Problem builders: wavelet deblurring, dual Huber-ROF denoising, a
//! synthetic lasso and the known-solution diagonal problem.

use std::sync::Arc;

use crate::analysis::KnownSolutionProblem;
use crate::error::{Error, Result};
use crate::operator::{AdjointOf, Composed, DenseMatrix, LinearOperator};
use crate::problem::{CompositeProblem, LeastSquares, Regularizer};
use crate::solvers::{self, Budget, SolverKind, SolverOptions, StepPolicy};

use super::image::{add_gaussian_noise, synth_test_image, ImageGray};
use super::operators::{DiscreteGradient, GaussianBlur, Haar2d};
use super::power::{estimate_operator_norm_sq, PowerEstimate};
use super::rng::SplitMix64;

pub const DEBLUR_LAMBDA: f64 = 2e-5;
pub const DEBLUR_NOISE_STD: f64 = 1e-3;
pub const HUBER_LAMBDA: f64 = 0.1;
pub const HUBER_EPS: f64 = 1e-3;
pub const HUBER_NOISE_STD: f64 = 0.1;

const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITERS: usize = 2000;
const POWER_SEED: u64 = 0x5EED;

/// A benchmark instance with its starting point.
#[derive(Clone, Debug)]
pub struct BenchProblem {
    pub problem: CompositeProblem,
    pub x0: Vec<f64>,
    /// How `lf_hint` was obtained; `None` when it is exact.
    pub power: Option<PowerEstimate>,
}

impl BenchProblem {
    pub fn l_f(&self) -> f64 {
        self.problem.lf_hint().expect("bench problems carry L_f")
    }
}

/// `f(x) = ‖RWx − b‖²`, `Ψ = λ‖x‖₁` with `R` the standard blur and `W` the
/// three-stage Haar synthesis. `x₀ = W*b` and `L_f = 2‖RW‖²` by power
/// iteration.
pub fn build_deblurring_problem(b: &ImageGray, lambda: f64) -> Result<BenchProblem> {
    let blur: Arc<dyn LinearOperator> = Arc::new(GaussianBlur::standard(b.n1, b.n2)?);
    let haar = Arc::new(Haar2d::new(b.n1, b.n2, 3)?);
    let a = Arc::new(Composed::new(blur, haar.clone())?);
    let power = estimate_operator_norm_sq(a.as_ref(), POWER_TOL, POWER_MAX_ITERS, POWER_SEED)?;
    let f = LeastSquares::new(a, b.pixels.clone(), 2.0)?;
    let problem = CompositeProblem::new(Arc::new(f), Regularizer::L1 { lambda })?
        .with_lf_hint(2.0 * power.value)?;
    Ok(BenchProblem {
        problem,
        x0: haar.analysis(&b.pixels),
        power: Some(power),
    })
}

/// `R·clean` plus Gaussian noise.
pub fn blurred_observation(clean: &ImageGray, noise_std: f64, seed: u64) -> Result<ImageGray> {
    let blur = GaussianBlur::standard(clean.n1, clean.n2)?;
    let blurred = ImageGray::new(clean.n1, clean.n2, blur.apply(&clean.pixels))?;
    add_gaussian_noise(&blurred, noise_std, seed)
}

/// Deblurring on the synthetic `n × n` test image.
pub fn deblurring_instance(n: usize, seed: u64, lambda: f64) -> Result<BenchProblem> {
    let clean = synth_test_image(n, n, seed)?;
    let b = blurred_observation(&clean, DEBLUR_NOISE_STD, seed)?;
    build_deblurring_problem(&b, lambda)
}

/// `f(p) = ½‖D*p − b‖²` with the Huber-ROF dual regularizer, `x₀ = Db` and
/// `L_f = ‖D‖²` by power iteration.
pub fn build_huber_rof_dual_problem(b: &ImageGray, lambda: f64, eps: f64) -> Result<BenchProblem> {
    let d = Arc::new(DiscreteGradient::new(b.n1, b.n2)?);
    let power = estimate_operator_norm_sq(d.as_ref(), POWER_TOL, POWER_MAX_ITERS, POWER_SEED)?;
    let x0 = d.apply(&b.pixels);
    let f = LeastSquares::new(Arc::new(AdjointOf(d)), b.pixels.clone(), 1.0)?;
    let problem = CompositeProblem::new(Arc::new(f), Regularizer::HuberRofDual { lambda, eps })?
        .with_lf_hint(power.value)?;
    Ok(BenchProblem { problem, x0, power: Some(power) })
}

/// Dual Huber-ROF on the synthetic `n × n` image with noise std 0.1.
pub fn huber_rof_instance(n: usize, seed: u64) -> Result<BenchProblem> {
    let clean = synth_test_image(n, n, seed)?;
    let b = add_gaussian_noise(&clean, HUBER_NOISE_STD, seed)?;
    build_huber_rof_dual_problem(&b, HUBER_LAMBDA, HUBER_EPS)
}

/// `½‖Ax − b‖² + λ‖x‖₁` with Gaussian `A/√m`, a 10%-sparse ground truth and
/// small noise. `L_f` is the exact `‖A‖²`; `x₀ = 0`.
pub fn lasso_synthetic(m: usize, n: usize, lambda: f64, seed: u64) -> Result<BenchProblem> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("empty lasso {m}x{n}")));
    }
    let mut rng = SplitMix64::new(seed);
    let s = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n).map(|_| s * rng.next_gaussian()).collect();
    let a = DenseMatrix::from_row_slice(m, n, &data);
    let x_true: Vec<f64> = (0..n)
        .map(|_| if rng.next_f64() < 0.1 { rng.next_gaussian() } else { 0.0 })
        .collect();
    let mut b = a.apply(&x_true);
    b.iter_mut().for_each(|bi| *bi += 0.01 * rng.next_gaussian());
    let l_f = a.spectral_norm_sq();
    let f = LeastSquares::new(Arc::new(a), b, 1.0)?;
    let problem = CompositeProblem::new(Arc::new(f), Regularizer::L1 { lambda })?.with_lf_hint(l_f)?;
    Ok(BenchProblem { problem, x0: vec![0.0; n], power: None })
}

/// Random diagonal quadratic plus L1 with `dᵢ ∈ [d_min, d_max]`.
pub fn quadratic_l1_known(n: usize, seed: u64, d_min: f64, d_max: f64) -> Result<KnownSolutionProblem> {
    let mut rng = SplitMix64::new(seed);
    let d = (0..n).map(|_| rng.uniform(d_min, d_max)).collect();
    let c = (0..n).map(|_| 2.0 * rng.next_gaussian()).collect();
    KnownSolutionProblem::new(d, c, 0.3)
}

/// Best objective value along a long fixed-step run of FISTA-CP, which stands
/// in for `F*` when no closed form is available.
pub fn reference_optimum(
    problem: &CompositeProblem,
    x0: &[f64],
    iterations: usize,
) -> Result<(Vec<f64>, f64)> {
    let l_f = problem
        .lf_hint()
        .ok_or_else(|| Error::MissingLipschitz("reference optimum".into()))?;
    let options = SolverOptions::new(StepPolicy::Fixed(l_f));
    let trace = solvers::run(
        SolverKind::FistaCp,
        problem,
        x0,
        &options,
        Budget::Iterations(iterations),
        None,
    )?;
    if let Some(e) = trace.abort {
        return Err(e);
    }
    let best = trace
        .records
        .iter()
        .filter_map(|r| r.f_val.finite())
        .fold(f64::INFINITY, f64::min);
    Ok((trace.final_x, best))
}
