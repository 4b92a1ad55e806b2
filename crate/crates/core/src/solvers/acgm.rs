//! ACGM in estimate-sequence form and in extrapolated form.
//!
//! Both forms share the scalar recursions below. With `μ = μ_f + μ_Ψ` and
//! `L' = L + μ_Ψ`, every accepted iteration satisfies
//! `L'·a² = A_{k+1}·γ_{k+1}` and `γ_k = 1 + A_k·μ`.

use crate::error::{Error, Result};
use crate::linesearch::Trial;
use crate::problem::CompositeProblem;
use crate::vector;

use super::{FaultInjection, Method, SolverKind, StepInfo, StepPolicy};

/// Positive root `a` of `(L + μ_Ψ)a² = (A + a)(γ + μa)`.
pub fn acgm_weight_a(gamma: f64, a_acc: f64, mu: f64, mu_f: f64, l_trial: f64) -> Result<f64> {
    let denom = l_trial - mu_f;
    if !(denom > 0.0) {
        return Err(Error::DegenerateWeight { l: l_trial, mu_f });
    }
    let b = gamma + a_acc * mu;
    Ok((b + (b * b + 4.0 * denom * a_acc * gamma).sqrt()) / (2.0 * denom))
}

/// Positive root of `t² + t(q_k t_k² − 1) − (L'_{k+1}/L'_k) t_k² = 0`.
pub fn t_update(t_k: f64, q_k: f64, l_prev_eff: f64, l_trial_eff: f64) -> f64 {
    let c = 1.0 - q_k * t_k * t_k;
    let ratio = l_trial_eff / l_prev_eff;
    0.5 * (c + (c * c + 4.0 * ratio * t_k * t_k).sqrt())
}

/// Auxiliary-point extrapolation factor
/// `β = ((t_k − 1)/t_{k+1})·(1 − q t_{k+1})/(1 − q)`.
pub fn extrapolation_beta(t_k: f64, t_next: f64, q_next: f64) -> Result<f64> {
    if q_next >= 1.0 {
        return Err(Error::DegenerateExtrapolation);
    }
    Ok((t_k - 1.0) / t_next * (1.0 - q_next * t_next) / (1.0 - q_next))
}

/// Accumulated weight recovered from the vertex factor:
/// `A = t²/(L' − μt²)`, which is `A = γt²/L'` with `γ = 1 + Aμ` solved for `A`.
pub fn weight_from_t(t: f64, l_eff: f64, mu: f64) -> f64 {
    t * t / (l_eff - mu * t * t)
}

/// State of ACGM in estimate-sequence form.
#[derive(Clone, Debug)]
pub struct AcgmEsState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a_acc: f64,
    pub gamma: f64,
    pub l: f64,
    pub k: usize,
    mu: f64,
    mu_f: f64,
    mu_psi: f64,
    policy: StepPolicy,
    fault: FaultInjection,
}

impl AcgmEsState {
    pub fn new(problem: &CompositeProblem, x0: &[f64], policy: StepPolicy, fault: FaultInjection) -> Self {
        Self {
            x: x0.to_vec(),
            v: x0.to_vec(),
            a_acc: 0.0,
            gamma: 1.0,
            l: policy.initial_l(),
            k: 0,
            mu: problem.mu(),
            mu_f: problem.mu_f(),
            mu_psi: problem.mu_psi(),
            policy,
            fault,
        }
    }
}

impl Method for AcgmEsState {
    fn kind(&self) -> SolverKind {
        SolverKind::AcgmEs
    }

    fn step(&mut self, problem: &CompositeProblem) -> Result<StepInfo> {
        let (mu, mu_f) = (self.mu, self.mu_f);
        let (x, v, a_acc, gamma) = (&self.x, &self.v, self.a_acc, self.gamma);
        let criterion = self.policy.criterion();
        let out = self.policy.search(self.k, self.l, |l_hat, test| {
            if l_hat <= mu_f {
                return Ok(Trial { candidate: None, accepted: false });
            }
            let a = acgm_weight_a(gamma, a_acc, mu, mu_f, l_hat)?;
            let gamma_next = gamma + a * mu;
            let y = if a_acc == 0.0 {
                v.clone()
            } else {
                let wx = a_acc * gamma_next;
                let wv = a * gamma;
                vector::combine(wx, x, wv, v, wx + wv)
            };
            let grad_y = problem.grad(&y)?;
            let x_next = problem.prox_grad_step_from(&y, &grad_y, l_hat);
            let accepted = !test || criterion.accepts(problem, &y, &grad_y, &x_next, l_hat)?;
            Ok(Trial { candidate: Some((a, gamma_next, y, x_next)), accepted })
        })?;

        let l_hat = out.accepted_l;
        let (a, gamma_next, y, x_next) = out.candidate;
        if self.fault != FaultInjection::SkipVertexUpdate {
            let wx = a * (l_hat + self.mu_psi);
            let wy = a * (l_hat - mu_f);
            self.v = self
                .v
                .iter()
                .zip(&x_next)
                .zip(&y)
                .map(|((vi, xi), yi)| (gamma * vi + wx * xi - wy * yi) / gamma_next)
                .collect();
        }
        self.x = x_next;
        self.a_acc += a;
        self.gamma = gamma_next;
        self.l = l_hat;
        self.k += 1;
        Ok(StepInfo {
            l: l_hat,
            weight: self.a_acc,
            backtracks: out.backtrack_count,
            gamma: Some(self.gamma),
            y,
        })
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn l(&self) -> f64 {
        self.l
    }

    fn weight(&self) -> f64 {
        self.a_acc
    }

    fn vertex(&self) -> Option<&[f64]> {
        Some(&self.v)
    }

    fn gamma(&self) -> Option<f64> {
        Some(self.gamma)
    }
}

/// State of ACGM in extrapolated form (also FISTA-CP when `L` is frozen).
#[derive(Clone, Debug)]
pub struct AcgmExState {
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub t: f64,
    pub q: f64,
    pub l: f64,
    pub k: usize,
    /// `A_k`, carried by its own recursion since recovering it from `t_k`
    /// cancels catastrophically once `q t² → 1`.
    pub a_acc: f64,
    mu: f64,
    mu_f: f64,
    mu_psi: f64,
    policy: StepPolicy,
    kind: SolverKind,
}

impl AcgmExState {
    pub fn new(problem: &CompositeProblem, x0: &[f64], policy: StepPolicy) -> Self {
        let l0 = policy.initial_l();
        let mu = problem.mu();
        Self {
            x: x0.to_vec(),
            x_prev: x0.to_vec(),
            t: 0.0,
            q: mu / (l0 + problem.mu_psi()),
            l: l0,
            k: 0,
            a_acc: 0.0,
            mu,
            mu_f: problem.mu_f(),
            mu_psi: problem.mu_psi(),
            policy,
            kind: SolverKind::AcgmEx,
        }
    }

    /// The extrapolated form with `L_k ≡ L_f` and no search.
    pub fn fista_cp(problem: &CompositeProblem, x0: &[f64], l_f: f64) -> Self {
        Self {
            kind: SolverKind::FistaCp,
            ..Self::new(problem, x0, StepPolicy::Fixed(l_f))
        }
    }

    /// `A_k` implied by the current `t_k`; agrees with `a_acc` while
    /// `1 − q_k t_k²` is well above rounding.
    pub fn weight_from_vertex_factor(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            weight_from_t(self.t, self.l + self.mu_psi, self.mu)
        }
    }
}

impl Method for AcgmExState {
    fn kind(&self) -> SolverKind {
        self.kind
    }

    fn step(&mut self, problem: &CompositeProblem) -> Result<StepInfo> {
        let (mu, mu_f, mu_psi) = (self.mu, self.mu_f, self.mu_psi);
        let (x, x_prev, t, q, l_prev) = (&self.x, &self.x_prev, self.t, self.q, self.l);
        let criterion = self.policy.criterion();
        let out = self.policy.search(self.k, self.l, |l_hat, test| {
            if l_hat <= mu_f {
                return Ok(Trial { candidate: None, accepted: false });
            }
            let q_hat = mu / (l_hat + mu_psi);
            let t_hat = t_update(t, q, l_prev + mu_psi, l_hat + mu_psi);
            let beta = extrapolation_beta(t, t_hat, q_hat)?;
            let y: Vec<f64> = x
                .iter()
                .zip(x_prev)
                .map(|(xi, pi)| xi + beta * (xi - pi))
                .collect();
            let grad_y = problem.grad(&y)?;
            let x_next = problem.prox_grad_step_from(&y, &grad_y, l_hat);
            let accepted = !test || criterion.accepts(problem, &y, &grad_y, &x_next, l_hat)?;
            Ok(Trial { candidate: Some((q_hat, t_hat, y, x_next)), accepted })
        })?;

        let (q_hat, t_hat, y, x_next) = out.candidate;
        let gamma = 1.0 + self.a_acc * mu;
        self.a_acc += acgm_weight_a(gamma, self.a_acc, mu, mu_f, out.accepted_l)?;
        self.x_prev = std::mem::replace(&mut self.x, x_next);
        self.l = out.accepted_l;
        self.q = q_hat;
        self.t = t_hat;
        self.k += 1;
        Ok(StepInfo {
            l: self.l,
            weight: self.a_acc,
            backtracks: out.backtrack_count,
            gamma: None,
            y,
        })
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn l(&self) -> f64 {
        self.l
    }

    fn weight(&self) -> f64 {
        self.a_acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Regularizer, SmoothFn};
    use std::sync::Arc;

    /// Positive root of `(L + μ_Ψ)a² − (A + a)(γ + μa)` by bisection.
    fn bisect_weight(gamma: f64, a_acc: f64, mu: f64, mu_psi: f64, l: f64) -> f64 {
        let r = |a: f64| (l + mu_psi) * a * a - (a_acc + a) * (gamma + mu * a);
        let (mut lo, mut hi) = (1e-12, 1.0);
        while r(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if r(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn weight_examples() {
        assert_eq!(acgm_weight_a(1.0, 0.0, 0.0, 0.0, 1.0).unwrap(), 1.0);
        let golden = acgm_weight_a(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((golden - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((golden - bisect_weight(1.0, 1.0, 0.0, 0.0, 1.0)).abs() < 1e-12);

        // μ = μ_Ψ = 0.01
        let a = acgm_weight_a(1.0, 0.0, 0.01, 0.0, 1.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert!(((1.0 + 0.01) * a * a - 1.0 * (1.0 + 0.01 * a)).abs() < 1e-15);

        assert!(matches!(
            acgm_weight_a(1.0, 0.0, 0.5, 0.5, 0.5),
            Err(Error::DegenerateWeight { .. })
        ));
    }

    #[test]
    fn weight_satisfies_quadratic_identity() {
        for &(gamma, a_acc, mu_f, mu_psi, l) in &[
            (1.0, 0.0, 0.0, 0.0, 3.0),
            (1.3, 4.0, 0.1, 0.05, 2.0),
            (1.0 + 7.5 * 0.2, 7.5, 0.0, 0.2, 0.7),
            (2.0, 1e3, 1e-3, 0.0, 10.0),
        ] {
            let mu = mu_f + mu_psi;
            let a = acgm_weight_a(gamma, a_acc, mu, mu_f, l).unwrap();
            let lhs = (l + mu_psi) * a * a;
            let rhs = (a_acc + a) * (gamma + mu * a);
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
            assert!((a - bisect_weight(gamma, a_acc, mu, mu_psi, l)).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn t_update_examples() {
        assert_eq!(t_update(0.0, 0.3, 1.0, 2.0), 1.0);
        let golden = t_update(1.0, 0.0, 1.0, 1.0);
        assert!((golden - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        // q t² = 1, ratio 1: fixed point
        let t = 4.0;
        assert!((t_update(t, 1.0 / (t * t), 3.0, 3.0) - t).abs() < 1e-14);
    }

    #[test]
    fn beta_examples() {
        assert_eq!(extrapolation_beta(1.0, 1.7, 0.2).unwrap(), 0.0);
        assert_eq!(extrapolation_beta(3.0, 4.0, 0.0).unwrap(), 0.5);
        assert_eq!(extrapolation_beta(2.0, 2.0, 0.5).unwrap(), 0.0);
        assert!(extrapolation_beta(2.0, 2.0, 1.0).is_err());
    }

    fn half_norm_sq() -> CompositeProblem {
        let f = SmoothFn::new(1, |x| 0.5 * x[0] * x[0], |x| x.to_vec());
        CompositeProblem::new(Arc::new(f), Regularizer::Zero).unwrap()
    }

    #[test]
    fn first_es_iteration_by_hand() {
        let p = half_norm_sq();
        let mut s = AcgmEsState::new(&p, &[1.0], StepPolicy::Fixed(1.0), FaultInjection::None);
        let info = s.step(&p).unwrap();
        assert_eq!(info.y, vec![1.0]);
        assert_eq!(s.x, vec![0.0]);
        assert_eq!(s.v, vec![0.0]);
        assert_eq!(s.a_acc, 1.0);
        assert_eq!(s.gamma, 1.0);
    }

    #[test]
    fn first_ex_iteration_starts_at_x0() {
        let p = half_norm_sq();
        let mut s = AcgmExState::new(&p, &[2.0], StepPolicy::Fixed(4.0));
        let info = s.step(&p).unwrap();
        assert_eq!(info.y, vec![2.0]);
        assert_eq!(s.t, 1.0);
        assert!((info.weight - 0.25).abs() < 1e-15);
    }
}
