//! Composite objectives `F = f + Ψ` as a bundle of black-box oracles.
//!
//! The smooth part `f` is any [`SmoothFunction`]; the regularizer `Ψ` is one
//! of the closed-form entries of [`Regularizer`]. All oracles are pure
//! functions of their inputs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::vector::{self, Extended};

/// Relative slack on the per-pixel ball constraint of the Huber-ROF dual.
pub const BALL_FEASIBILITY_TOL: f64 = 1e-12;

/// The smooth part `f` of a composite objective.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// For quadratics `f(x) = (s/2)‖Bx − b‖²`, the pair `(s, B)`, so that
    /// `f(x) − Q_{f,L,y}(x) = (s/2)‖B(x−y)‖² − (L/2)‖x−y‖²` exactly.
    fn curvature_form(&self) -> Option<CurvatureForm> {
        None
    }
}

/// Hessian factorization `s·BᵀB` of a quadratic smooth part.
#[derive(Clone)]
pub struct CurvatureForm {
    pub scale: f64,
    pub op: Arc<dyn LinearOperator>,
}

/// `f(x) = (scale/2)‖Ax − b‖²`.
#[derive(Clone)]
pub struct LeastSquares {
    op: Arc<dyn LinearOperator>,
    b: Vec<f64>,
    scale: f64,
}

impl LeastSquares {
    pub fn new(op: Arc<dyn LinearOperator>, b: Vec<f64>, scale: f64) -> Result<Self> {
        if b.len() != op.output_dim() {
            return Err(Error::Dimension {
                expected: op.output_dim(),
                actual: b.len(),
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "least-squares scale must be positive, got {scale}"
            )));
        }
        Ok(Self { op, b, scale })
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.op.apply(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        r
    }

    pub fn operator(&self) -> &Arc<dyn LinearOperator> {
        &self.op
    }

    pub fn target(&self) -> &[f64] {
        &self.b
    }
}

impl SmoothFunction for LeastSquares {
    fn dim(&self) -> usize {
        self.op.input_dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.scale * vector::norm_sq(&self.residual(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = self.residual(x);
        let mut g = self.op.adjoint(&r);
        g.iter_mut().for_each(|gi| *gi *= self.scale);
        g
    }

    fn curvature_form(&self) -> Option<CurvatureForm> {
        Some(CurvatureForm {
            scale: self.scale,
            op: Arc::clone(&self.op),
        })
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Smooth part given by a pair of closures.
#[derive(Clone)]
pub struct SmoothFn {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl SmoothFn {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl SmoothFunction for SmoothFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }
}

/// Closed-form regularizers with cheap proximal maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    Zero,
    /// `λ‖x‖₁`
    L1 { lambda: f64 },
    /// `(ε/(2λ))‖p‖²` subject to `‖p_ij‖² ≤ λ` per pixel; `p` is stored as
    /// interleaved pairs `(p_ij,1, p_ij,2)`.
    HuberRofDual { lambda: f64, eps: f64 },
}

impl Regularizer {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::Zero => Ok(()),
            Regularizer::L1 { lambda } if lambda > 0.0 && lambda.is_finite() => Ok(()),
            Regularizer::HuberRofDual { lambda, eps }
                if lambda > 0.0 && lambda.is_finite() && eps >= 0.0 && eps.is_finite() =>
            {
                Ok(())
            }
            other => Err(Error::InvalidParameter(format!(
                "regularizer parameters out of range: {other:?}"
            ))),
        }
    }

    /// Strong convexity modulus `μ_Ψ` implied by the regularizer itself.
    pub fn strong_convexity(&self) -> f64 {
        match *self {
            Regularizer::HuberRofDual { lambda, eps } => eps / lambda,
            _ => 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> Extended {
        match *self {
            Regularizer::Zero => Extended::Finite(0.0),
            Regularizer::L1 { lambda } => {
                Extended::Finite(lambda * x.iter().map(|v| v.abs()).sum::<f64>())
            }
            Regularizer::HuberRofDual { lambda, eps } => {
                let limit = lambda * (1.0 + BALL_FEASIBILITY_TOL);
                let mut total = 0.0;
                for pair in x.chunks_exact(2) {
                    let sq = pair[0] * pair[0] + pair[1] * pair[1];
                    if sq > limit {
                        return Extended::PosInfinity;
                    }
                    total += sq;
                }
                Extended::Finite(eps / (2.0 * lambda) * total)
            }
        }
    }

    /// `argmin_z Ψ(z) + ‖z − x‖²/(2τ)`.
    pub fn prox(&self, x: &[f64], tau: f64) -> Vec<f64> {
        match *self {
            Regularizer::Zero => x.to_vec(),
            Regularizer::L1 { lambda } => prox_l1(x, tau * lambda),
            Regularizer::HuberRofDual { lambda, eps } => prox_huber_rof_dual(x, tau, lambda, eps),
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::Zero => write!(f, "zero"),
            Regularizer::L1 { lambda } => write!(f, "l1(lambda={lambda})"),
            Regularizer::HuberRofDual { lambda, eps } => {
                write!(f, "huber_rof_dual(lambda={lambda}, eps={eps})")
            }
        }
    }
}

/// Soft thresholding: `sign(x_i)·max(|x_i| − threshold, 0)`.
pub fn prox_l1(x: &[f64], threshold: f64) -> Vec<f64> {
    debug_assert!(threshold >= 0.0);
    x.iter()
        .map(|&v| {
            let m = v.abs() - threshold;
            if m > 0.0 {
                m.copysign(v)
            } else {
                0.0
            }
        })
        .collect()
}

/// Per-pixel proximal map of the Huber-ROF dual regularizer.
///
/// The objective is radially symmetric around the origin, so the minimizer
/// is the unconstrained shrink `p/(1 + τε/λ)` pulled back onto the ball of
/// radius `√λ` when it falls outside.
pub fn prox_huber_rof_dual(p: &[f64], tau: f64, lambda: f64, eps: f64) -> Vec<f64> {
    let shrink = 1.0 / (1.0 + tau * eps / lambda);
    let radius = lambda.sqrt();
    let mut out = Vec::with_capacity(p.len());
    for pair in p.chunks_exact(2) {
        let z0 = pair[0] * shrink;
        let z1 = pair[1] * shrink;
        let sq = z0 * z0 + z1 * z1;
        if sq > lambda {
            let s = radius / sq.sqrt();
            out.push(z0 * s);
            out.push(z1 * s);
        } else {
            out.push(z0);
            out.push(z1);
        }
    }
    out
}

/// Oracle bundle for `F(x) = f(x) + Ψ(x)`.
#[derive(Clone)]
pub struct CompositeProblem {
    smooth: Arc<dyn SmoothFunction>,
    regularizer: Regularizer,
    mu_f: f64,
    mu_psi: f64,
    lf_hint: Option<f64>,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("dim", &self.dim())
            .field("regularizer", &self.regularizer)
            .field("mu_f", &self.mu_f)
            .field("mu_psi", &self.mu_psi)
            .field("lf_hint", &self.lf_hint)
            .finish()
    }
}

impl CompositeProblem {
    /// `μ_Ψ` defaults to the regularizer's own modulus, `μ_f` to zero.
    pub fn new(smooth: Arc<dyn SmoothFunction>, regularizer: Regularizer) -> Result<Self> {
        regularizer.validate()?;
        if let Regularizer::HuberRofDual { .. } = regularizer {
            if smooth.dim() % 2 != 0 {
                return Err(Error::InvalidParameter(
                    "dual field dimension must be even".into(),
                ));
            }
        }
        Ok(Self {
            mu_psi: regularizer.strong_convexity(),
            smooth,
            regularizer,
            mu_f: 0.0,
            lf_hint: None,
        })
    }

    pub fn with_mu_f(mut self, mu_f: f64) -> Result<Self> {
        if !(mu_f >= 0.0 && mu_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu_f must be >= 0, got {mu_f}")));
        }
        self.mu_f = mu_f;
        Ok(self)
    }

    pub fn with_mu_psi(mut self, mu_psi: f64) -> Result<Self> {
        if !(mu_psi >= 0.0 && mu_psi.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu_psi must be >= 0, got {mu_psi}")));
        }
        self.mu_psi = mu_psi;
        Ok(self)
    }

    pub fn with_lf_hint(mut self, lf: f64) -> Result<Self> {
        if !(lf > 0.0 && lf.is_finite()) {
            return Err(Error::InvalidParameter(format!("L_f hint must be > 0, got {lf}")));
        }
        self.lf_hint = Some(lf);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn smooth(&self) -> &Arc<dyn SmoothFunction> {
        &self.smooth
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer
    }

    pub fn mu_f(&self) -> f64 {
        self.mu_f
    }

    pub fn mu_psi(&self) -> f64 {
        self.mu_psi
    }

    /// Total strong convexity `μ = μ_f + μ_Ψ`.
    pub fn mu(&self) -> f64 {
        self.mu_f + self.mu_psi
    }

    pub fn lf_hint(&self) -> Option<f64> {
        self.lf_hint
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn f(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let v = self.smooth.value(x);
        if !v.is_finite() {
            return Err(Error::InvalidOracle(format!("f(x) = {v}")));
        }
        Ok(v)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let g = self.smooth.gradient(x);
        if g.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                actual: g.len(),
            });
        }
        if !vector::all_finite(&g) {
            return Err(Error::InvalidOracle("non-finite gradient".into()));
        }
        Ok(g)
    }

    pub fn psi(&self, x: &[f64]) -> Extended {
        self.regularizer.value(x)
    }

    pub fn prox(&self, x: &[f64], tau: f64) -> Vec<f64> {
        self.regularizer.prox(x, tau)
    }

    /// `F(x) = f(x) + Ψ(x)`; `+inf` exactly when `Ψ(x)` is.
    pub fn eval_objective(&self, x: &[f64]) -> Result<Extended> {
        let fx = self.f(x)?;
        Ok(self.psi(x).add_finite(fx))
    }

    /// `Q_{f,L,y}(x) = f(y) + ⟨∇f(y), x−y⟩ + (L/2)‖x−y‖²`.
    pub fn upper_model_q(&self, y: &[f64], l: f64, x: &[f64]) -> Result<f64> {
        let fy = self.f(y)?;
        let gy = self.grad(y)?;
        Ok(upper_model_from_parts(fy, &gy, y, l, x))
    }

    /// Proximal gradient step `T_L(y) = prox_{Ψ/L}(y − ∇f(y)/L)`.
    pub fn prox_grad_step(&self, y: &[f64], l: f64) -> Result<Vec<f64>> {
        check_positive_l(l)?;
        let gy = self.grad(y)?;
        Ok(self.prox_grad_step_from(y, &gy, l))
    }

    /// As [`Self::prox_grad_step`] with a precomputed `∇f(y)`.
    pub fn prox_grad_step_from(&self, y: &[f64], grad_y: &[f64], l: f64) -> Vec<f64> {
        let forward = vector::add_scaled(y, -1.0 / l, grad_y);
        self.prox(&forward, 1.0 / l)
    }

    /// Composite gradient `g_L(y) = L·(y − T_L(y))`.
    pub fn composite_gradient(&self, y: &[f64], l: f64) -> Result<Vec<f64>> {
        let t = self.prox_grad_step(y, l)?;
        Ok(y.iter().zip(&t).map(|(yi, ti)| l * (yi - ti)).collect())
    }
}

pub(crate) fn check_positive_l(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be > 0, got {l}")));
    }
    Ok(())
}

/// `Q_{f,L,y}(x)` from `f(y)` and `∇f(y)`.
pub fn upper_model_from_parts(f_y: f64, grad_y: &[f64], y: &[f64], l: f64, x: &[f64]) -> f64 {
    let mut inner = 0.0;
    let mut sq = 0.0;
    for ((xi, yi), gi) in x.iter().zip(y).zip(grad_y) {
        let d = xi - yi;
        inner += gi * d;
        sq += d * d;
    }
    f_y + inner + 0.5 * l * sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Identity;

    fn half_norm_sq(n: usize) -> Arc<dyn SmoothFunction> {
        Arc::new(SmoothFn::new(
            n,
            |x| 0.5 * vector::norm_sq(x),
            |x| x.to_vec(),
        ))
    }

    fn zero_fn(n: usize) -> Arc<dyn SmoothFunction> {
        Arc::new(SmoothFn::new(n, |_| 0.0, |x| vec![0.0; x.len()]))
    }

    /// Minimizes `Ψ(z) + (z − x)²/(2τ)` over a fine 1-D grid.
    fn brute_prox_1d(psi: impl Fn(f64) -> f64, x: f64, tau: f64) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let steps = 200_000;
        for i in 0..=steps {
            let z = -10.0 + 20.0 * i as f64 / steps as f64;
            let v = psi(z) + (z - x) * (z - x) / (2.0 * tau);
            if v < best.0 {
                best = (v, z);
            }
        }
        best.1
    }

    #[test]
    fn objective_values() {
        let p = CompositeProblem::new(half_norm_sq(1), Regularizer::Zero).unwrap();
        assert_eq!(p.eval_objective(&[0.0]).unwrap(), Extended::Finite(0.0));
        let p = CompositeProblem::new(half_norm_sq(1), Regularizer::L1 { lambda: 1.0 }).unwrap();
        assert_eq!(p.eval_objective(&[1.0]).unwrap(), Extended::Finite(1.5));
        let p = CompositeProblem::new(
            half_norm_sq(4),
            Regularizer::HuberRofDual { lambda: 0.1, eps: 0.001 },
        )
        .unwrap();
        assert_eq!(
            p.eval_objective(&[0.0, 0.0, 0.5, 0.0]).unwrap(),
            Extended::PosInfinity
        );
    }

    #[test]
    fn non_finite_f_is_an_oracle_error() {
        let bad = Arc::new(SmoothFn::new(1, |_| f64::NAN, |x| x.to_vec()));
        let p = CompositeProblem::new(bad, Regularizer::Zero).unwrap();
        assert!(matches!(p.eval_objective(&[1.0]), Err(Error::InvalidOracle(_))));
    }

    #[test]
    fn upper_model_examples() {
        let p = CompositeProblem::new(half_norm_sq(1), Regularizer::Zero).unwrap();
        assert_eq!(p.upper_model_q(&[1.0], 1.0, &[1.0]).unwrap(), 0.5);
        assert_eq!(p.upper_model_q(&[1.0], 1.0, &[0.0]).unwrap(), 0.0);

        let c = vec![2.0, -1.0];
        let c2 = c.clone();
        let linear = Arc::new(SmoothFn::new(
            2,
            move |x| vector::dot(&c, x),
            move |_| c2.clone(),
        ));
        let p = CompositeProblem::new(linear, Regularizer::Zero).unwrap();
        let (y, x) = ([0.3, 0.4], [1.3, -0.6]);
        for l in [0.5, 1.0, 7.0] {
            let gap = p.upper_model_q(&y, l, &x).unwrap() - p.f(&x).unwrap();
            assert!((gap - 0.5 * l * vector::dist_sq(&x, &y)).abs() < 1e-14);
        }
    }

    #[test]
    fn prox_grad_step_examples() {
        let p = CompositeProblem::new(half_norm_sq(1), Regularizer::Zero).unwrap();
        assert_eq!(p.prox_grad_step(&[1.0], 1.0).unwrap(), vec![0.0]);
        assert_eq!(p.prox_grad_step(&[0.0], 3.0).unwrap(), vec![0.0]);

        let p = CompositeProblem::new(zero_fn(1), Regularizer::L1 { lambda: 1.0 }).unwrap();
        let oracle = brute_prox_1d(|z| z.abs(), 3.0, 1.0);
        let step = p.prox_grad_step(&[3.0], 1.0).unwrap()[0];
        assert!((step - 2.0).abs() < 1e-12);
        assert!((step - oracle).abs() < 1e-4);
        assert!(p.prox_grad_step(&[3.0], 0.0).is_err());
    }

    #[test]
    fn composite_gradient_examples() {
        let p = CompositeProblem::new(zero_fn(1), Regularizer::L1 { lambda: 1.0 }).unwrap();
        let prox = brute_prox_1d(|z| z.abs(), 3.0, 0.5);
        assert!((prox - 2.5).abs() < 1e-4);
        let g = p.composite_gradient(&[3.0], 2.0).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);

        // minimizer of |x| is 0: fixed point
        assert_eq!(p.composite_gradient(&[0.0], 2.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn prox_l1_examples() {
        assert_eq!(prox_l1(&[0.5], 1.0), vec![0.0]);
        assert_eq!(prox_l1(&[3.0, -3.0], 1.0), vec![2.0, -2.0]);
        assert_eq!(prox_l1(&[1.5, -0.2], 0.0), vec![1.5, -0.2]);
        for x in [3.0, -3.0] {
            let oracle = brute_prox_1d(|z| z.abs(), x, 1.0);
            assert!((prox_l1(&[x], 1.0)[0] - oracle).abs() < 1e-4);
        }
    }

    /// 2-D grid minimization of the Huber-ROF dual prox objective for one pixel.
    fn brute_prox_pixel(p: [f64; 2], tau: f64, lambda: f64, eps: f64) -> [f64; 2] {
        let r = lambda.sqrt();
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let steps = 1200;
        for i in 0..=steps {
            for j in 0..=steps {
                let z = [
                    -r + 2.0 * r * i as f64 / steps as f64,
                    -r + 2.0 * r * j as f64 / steps as f64,
                ];
                let sq = z[0] * z[0] + z[1] * z[1];
                if sq > lambda {
                    continue;
                }
                let d = (z[0] - p[0]).powi(2) + (z[1] - p[1]).powi(2);
                let v = eps / (2.0 * lambda) * sq + d / (2.0 * tau);
                if v < best.0 {
                    best = (v, z);
                }
            }
        }
        best.1
    }

    #[test]
    fn prox_huber_examples_match_brute_force() {
        assert_eq!(prox_huber_rof_dual(&[0.0; 4], 1.0, 0.1, 0.001), vec![0.0; 4]);

        let inside = prox_huber_rof_dual(&[0.1, 0.0], 1.0, 0.1, 0.001);
        assert!((inside[0] - 0.1 / 1.01).abs() < 1e-15);
        assert_eq!(inside[1], 0.0);
        let oracle = brute_prox_pixel([0.1, 0.0], 1.0, 0.1, 0.001);
        assert!((inside[0] - oracle[0]).abs() < 1e-3 && (inside[1] - oracle[1]).abs() < 1e-3);

        let outside = prox_huber_rof_dual(&[1.0, 0.0], 1.0, 0.1, 0.001);
        assert!((outside[0] - 0.1f64.sqrt()).abs() < 1e-15);
        let oracle = brute_prox_pixel([1.0, 0.0], 1.0, 0.1, 0.001);
        assert!((outside[0] - oracle[0]).abs() < 1e-3 && (outside[1] - oracle[1]).abs() < 1e-3);

        // oblique direction exercises the shrink-then-project order
        let q = [0.5, -0.4];
        let got = prox_huber_rof_dual(&q, 3.0, 0.1, 0.05);
        let oracle = brute_prox_pixel(q, 3.0, 0.1, 0.05);
        assert!((got[0] - oracle[0]).abs() < 1e-3 && (got[1] - oracle[1]).abs() < 1e-3);
    }

    #[test]
    fn invalid_regularizers_rejected() {
        assert!(CompositeProblem::new(half_norm_sq(1), Regularizer::L1 { lambda: 0.0 }).is_err());
        assert!(CompositeProblem::new(
            half_norm_sq(2),
            Regularizer::HuberRofDual { lambda: 0.1, eps: -1.0 }
        )
        .is_err());
        assert!(CompositeProblem::new(
            half_norm_sq(3),
            Regularizer::HuberRofDual { lambda: 0.1, eps: 0.0 }
        )
        .is_err());
    }

    #[test]
    fn least_squares_gradient_and_form() {
        let ls = LeastSquares::new(Arc::new(Identity(2)), vec![1.0, 2.0], 2.0).unwrap();
        assert_eq!(ls.value(&[0.0, 0.0]), 5.0);
        assert_eq!(ls.gradient(&[0.0, 0.0]), vec![-2.0, -4.0]);
        assert_eq!(ls.curvature_form().unwrap().scale, 2.0);
    }
}
