//! Guarantee floors, rate constants and trace certification.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operator::Diagonal;
use crate::problem::{prox_l1, CompositeProblem, LeastSquares, Regularizer};
use crate::solvers::Trace;
use crate::vector::{self, Extended};

/// Worst-case quantities implied by the line-search ceiling `L_u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuaranteeParams {
    pub l_u: f64,
    pub mu_f: f64,
    pub mu_psi: f64,
}

impl GuaranteeParams {
    pub fn new(l_u: f64, mu_f: f64, mu_psi: f64) -> Result<Self> {
        if !(l_u > 0.0) || mu_f < 0.0 || mu_psi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need L_u > 0 and mu_f, mu_psi >= 0, got ({l_u}, {mu_f}, {mu_psi})"
            )));
        }
        Ok(Self { l_u, mu_f, mu_psi })
    }

    pub fn mu(&self) -> f64 {
        self.mu_f + self.mu_psi
    }

    /// `q_u = μ/(L_u + μ_Ψ)`.
    pub fn q_u(&self) -> f64 {
        self.mu() / (self.l_u + self.mu_psi)
    }
}

/// Lower bound on ACGM's `A_k`, `k ≥ 1`:
/// `(k+1)²/(4L_u)` if `μ = 0`, else `(1 − √q_u)^{−(k−1)}/(L_u − μ_f)`.
pub fn acgm_guarantee_floor(k: usize, params: &GuaranteeParams) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("the floor is defined for k >= 1".into()));
    }
    let q = params.q_u();
    if q >= 1.0 {
        return Err(Error::InvalidParameter(format!("q_u = {q} must be < 1")));
    }
    let k = k as f64;
    if params.mu() == 0.0 {
        Ok((k + 1.0).powi(2) / (4.0 * params.l_u))
    } else {
        Ok((1.0 - q.sqrt()).powf(-(k - 1.0)) / (params.l_u - params.mu_f))
    }
}

/// Asymptotic rate constants `A_k ≳ C·B^k` of AMGS and FGM.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConstants {
    pub b_amgs: f64,
    pub c_amgs: f64,
    pub b_fgm: f64,
    pub c_fgm: f64,
}

impl RateConstants {
    /// `√(B_amgs/B_fgm)`; below 1 means FGM wins asymptotically even at
    /// twice the per-iteration cost charged to AMGS.
    pub fn ratio(&self) -> f64 {
        (self.b_amgs / self.b_fgm).sqrt()
    }
}

pub fn appendix_b_rates(q: f64, l_f: f64) -> Result<RateConstants> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
    }
    if !(l_f > 0.0) {
        return Err(Error::InvalidParameter(format!("L_f must be > 0, got {l_f}")));
    }
    let s = (q / (2.0 * (1.0 - q))).sqrt();
    let d = (1.0 - q).sqrt() + (q / 2.0).sqrt();
    Ok(RateConstants {
        b_amgs: (1.0 + s).powi(2),
        c_amgs: 1.0 / (l_f * d * d),
        b_fgm: (1.0 - q.sqrt()).powi(-2),
        c_fgm: 1.0 / (2.0 * l_f),
    })
}

/// Slack allowed by [`certify_eq8`] at one iterate.
pub fn certificate_tolerance(a_k: f64, f_k: f64, f_star: f64, rhs: f64) -> f64 {
    1e-8 + 1e-9 * (a_k * (f_k.abs() + f_star.abs()) + rhs)
}

/// Per-iterate outcome of [`certify_eq8`].
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateRow {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `A_k(F(x_k) − F*) ≤ ½‖x₀ − x*‖²` for every record with `k ≥ 1`.
pub fn certify_eq8(trace: &Trace, x_star: &[f64], f_star: f64, x0: &[f64]) -> Vec<CertificateRow> {
    let rhs = 0.5 * vector::dist_sq(x0, x_star);
    trace
        .records
        .iter()
        .filter(|r| r.k >= 1)
        .map(|r| match r.f_val {
            Extended::Finite(f) => {
                let lhs = r.a * (f - f_star);
                let tol = certificate_tolerance(r.a, f, f_star, rhs);
                CertificateRow { k: r.k, lhs, rhs, pass: lhs <= rhs + tol }
            }
            Extended::PosInfinity => CertificateRow { k: r.k, lhs: f64::INFINITY, rhs, pass: false },
        })
        .collect()
}

/// One term of the gap sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRow {
    pub k: usize,
    pub delta: f64,
    /// `A_k(|F(x_k)| + |F*|) + (γ_k/2)‖v_k − x*‖²`, the size of the terms
    /// `Δ_k` is assembled from.
    pub magnitude: f64,
}

/// `Δ_k = A_k(F(x_k) − F*) + (γ_k/2)‖v_k − x*‖²` along a trace kept with
/// iterates by a method that exposes its estimate vertex and curvature.
pub fn gap_sequence(trace: &Trace, x_star: &[f64], f_star: f64) -> Result<Vec<GapRow>> {
    if trace.snapshots.len() != trace.records.len() {
        return Err(Error::MissingVertexData(0));
    }
    trace
        .records
        .iter()
        .zip(&trace.snapshots)
        .map(|(r, s)| {
            let (v, gamma) = match (&s.vertex, s.gamma) {
                (Some(v), Some(g)) => (v, g),
                _ => return Err(Error::MissingVertexData(r.k)),
            };
            let (f_term, f_mag) = if r.a == 0.0 {
                (0.0, 0.0)
            } else {
                let f = r.f_val.to_f64();
                (r.a * (f - f_star), r.a * (f.abs() + f_star.abs()))
            };
            let v_term = 0.5 * gamma * vector::dist_sq(v, x_star);
            Ok(GapRow { k: r.k, delta: f_term + v_term, magnitude: f_mag + v_term })
        })
        .collect()
}

/// Relative slack on gap monotonicity, matching the slack the descent test
/// grants each accepted step.
pub const GAP_REL_TOL: f64 = 1e-12;

/// `Δ_{k+1} ≤ Δ_k + 1e-9 + GAP_REL_TOL·magnitude_{k+1}` for each consecutive
/// pair; entry `i` covers the step from row `i` to row `i + 1`.
pub fn gap_nonincreasing(rows: &[GapRow]) -> Vec<bool> {
    rows.windows(2)
        .map(|w| w[1].delta <= w[0].delta + 1e-9 + GAP_REL_TOL * w[1].magnitude)
        .collect()
}

/// `F(y) − ‖g‖²/(2L′) − F(x₊)` with `g = L′(y − x₊)`; nonnegative when the
/// descent rule holds. `+∞` when `y` is outside the domain of `Ψ`.
pub fn descent_rule_slack(
    problem: &CompositeProblem,
    y: &[f64],
    x_next: &[f64],
    l: f64,
) -> Result<f64> {
    let l_eff = l + problem.mu_psi();
    let f_y = match problem.eval_objective(y)? {
        Extended::Finite(v) => v,
        Extended::PosInfinity => return Ok(f64::INFINITY),
    };
    let f_x = problem.eval_objective(x_next)?.to_f64();
    let g_sq = l_eff * l_eff * vector::dist_sq(y, x_next);
    Ok(f_y - g_sq / (2.0 * l_eff) - f_x)
}

/// Relaxed supporting parabola of `F` at `y`:
/// `F(x₊) + ‖g‖²/(2L′) + ⟨g, x − y⟩ + (μ/2)‖x − y‖²`, with `g = L′(y − x₊)`.
pub fn relaxed_lower_bound(
    f_next: f64,
    y: &[f64],
    x_next: &[f64],
    l_eff: f64,
    mu: f64,
    x: &[f64],
) -> f64 {
    let g: Vec<f64> = y.iter().zip(x_next).map(|(a, b)| l_eff * (a - b)).collect();
    let d = vector::sub(x, y);
    f_next + vector::norm_sq(&g) / (2.0 * l_eff) + vector::dot(&g, &d) + 0.5 * mu * vector::norm_sq(&d)
}

/// ACGM's weight recursion at `μ = 0`:
/// `A_{k+1} = (√(1/(4L)) + √(1/(4L) + A_k))²`.
pub fn acgm_weight_next_mu0(a_k: f64, l_next: f64) -> f64 {
    let h = 0.25 / l_next;
    let s = h.sqrt() + (h + a_k).sqrt();
    s * s
}

/// `f(x) = ½Σ dᵢ(xᵢ − cᵢ)²` with `Ψ = λ‖x‖₁`, whose minimizer is known
/// componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownSolutionProblem {
    pub d: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda: f64,
}

impl KnownSolutionProblem {
    pub fn new(d: Vec<f64>, c: Vec<f64>, lambda: f64) -> Result<Self> {
        if d.len() != c.len() {
            return Err(Error::Dimension { expected: d.len(), actual: c.len() });
        }
        if d.iter().any(|&di| !(di >= 0.0)) || !(lambda >= 0.0) {
            return Err(Error::InvalidParameter("need d >= 0 and lambda >= 0".into()));
        }
        if d.iter().all(|&di| di == 0.0) {
            return Err(Error::InvalidParameter("d must have a positive entry".into()));
        }
        Ok(Self { d, c, lambda })
    }

    pub fn l_f(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mu_f(&self) -> f64 {
        self.d.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The problem with `L_f` attached and, when `strongly_convex`, with
    /// `μ_f = min dᵢ` declared.
    pub fn problem(&self, strongly_convex: bool) -> Result<CompositeProblem> {
        let sqrt_d: Vec<f64> = self.d.iter().map(|v| v.sqrt()).collect();
        let b: Vec<f64> = sqrt_d.iter().zip(&self.c).map(|(s, c)| s * c).collect();
        let f = LeastSquares::new(Arc::new(Diagonal::new(sqrt_d)), b, 1.0)?;
        let reg = if self.lambda > 0.0 {
            Regularizer::L1 { lambda: self.lambda }
        } else {
            Regularizer::Zero
        };
        let p = CompositeProblem::new(Arc::new(f), reg)?.with_lf_hint(self.l_f())?;
        if strongly_convex {
            p.with_mu_f(self.mu_f())
        } else {
            Ok(p)
        }
    }

    /// `x*ᵢ = soft(cᵢ, λ/dᵢ)`, and `0` where `dᵢ = 0`.
    pub fn x_star(&self) -> Vec<f64> {
        self.d
            .iter()
            .zip(&self.c)
            .map(|(&di, &ci)| {
                if di == 0.0 {
                    0.0
                } else {
                    prox_l1(&[ci], self.lambda / di)[0]
                }
            })
            .collect()
    }

    pub fn f_star(&self) -> f64 {
        self.objective(&self.x_star())
    }

    /// `F` evaluated directly from the definition.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let smooth: f64 = self
            .d
            .iter()
            .zip(&self.c)
            .zip(x)
            .map(|((d, c), x)| 0.5 * d * (x - c).powi(2))
            .sum();
        smooth + self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Least-squares line `y ≈ slope·x + intercept` with its `R²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension { expected: xs.len(), actual: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("a fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r2 })
}
