//! Fast gradient method for smooth problems with a known Lipschitz constant.

use crate::error::{Error, Result};
use crate::problem::{CompositeProblem, Regularizer};
use crate::vector;

use super::{Method, SolverKind, StepInfo};

/// Positive root of `L_f a² = (A + a)(γ + μa)`.
pub fn fgm_weight_a(gamma: f64, a_acc: f64, mu: f64, l_f: f64) -> Result<f64> {
    let denom = l_f - mu;
    if !(denom > 0.0) {
        return Err(Error::DegenerateWeight { l: l_f, mu_f: mu });
    }
    let b = gamma + a_acc * mu;
    Ok((b + (b * b + 4.0 * denom * a_acc * gamma).sqrt()) / (2.0 * denom))
}

/// FGM starts from `A₀ = 1`. The weight it reports is
/// `A_k/(A₀L_f + γ₀)`, which puts its certificate in the same
/// `A_k(F(x_k) − F*) ≤ ½‖x₀ − x*‖²` form as the other methods.
#[derive(Clone, Debug)]
pub struct FgmState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a_acc: f64,
    pub gamma: f64,
    pub k: usize,
    l_f: f64,
    mu: f64,
    norm: f64,
}

impl FgmState {
    pub fn new(problem: &CompositeProblem, x0: &[f64], gamma0: Option<f64>) -> Result<Self> {
        if problem.regularizer() != Regularizer::Zero {
            return Err(Error::Misuse("FGM requires a zero regularizer".into()));
        }
        let l_f = problem.lf_hint().ok_or_else(|| Error::MissingLipschitz("FGM".into()))?;
        let mu = problem.mu();
        let gamma0 = gamma0.unwrap_or(mu.max(l_f));
        if !(gamma0 >= mu && gamma0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "FGM needs gamma0 >= mu > 0 or gamma0 > 0, got {gamma0}"
            )));
        }
        Ok(Self {
            x: x0.to_vec(),
            v: x0.to_vec(),
            a_acc: 1.0,
            gamma: gamma0,
            k: 0,
            l_f,
            mu,
            norm: l_f + gamma0,
        })
    }
}

impl Method for FgmState {
    fn kind(&self) -> SolverKind {
        SolverKind::Fgm
    }

    fn step(&mut self, problem: &CompositeProblem) -> Result<StepInfo> {
        let (mu, l_f, gamma, a_acc) = (self.mu, self.l_f, self.gamma, self.a_acc);
        let a = fgm_weight_a(gamma, a_acc, mu, l_f)?;
        let gamma_next = gamma + mu * a;
        let wx = a_acc * gamma_next;
        let wv = a * gamma;
        let y = vector::combine(wx, &self.x, wv, &self.v, wx + wv);
        let g = problem.grad(&y)?;
        self.x = vector::add_scaled(&y, -1.0 / l_f, &g);
        self.v = self
            .v
            .iter()
            .zip(&y)
            .zip(&g)
            .map(|((vi, yi), gi)| (gamma * vi + a * mu * yi - a * gi) / gamma_next)
            .collect();
        self.a_acc += a;
        self.gamma = gamma_next;
        self.k += 1;
        Ok(StepInfo {
            l: l_f,
            weight: self.weight(),
            backtracks: 0,
            gamma: Some(self.gamma),
            y,
        })
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn l(&self) -> f64 {
        self.l_f
    }

    fn weight(&self) -> f64 {
        self.a_acc / self.norm
    }

    fn vertex(&self) -> Option<&[f64]> {
        Some(&self.v)
    }

    fn gamma(&self) -> Option<f64> {
        Some(self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SmoothFn;
    use std::sync::Arc;

    #[test]
    fn one_step_reaches_minimizer_of_half_norm_sq() {
        let f = SmoothFn::new(2, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]), |x| x.to_vec());
        let p = CompositeProblem::new(Arc::new(f), Regularizer::Zero)
            .unwrap()
            .with_lf_hint(1.0)
            .unwrap();
        let mut s = FgmState::new(&p, &[3.0, -1.0], None).unwrap();
        s.step(&p).unwrap();
        assert!(s.x.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_nonzero_regularizer() {
        let f = SmoothFn::new(1, |x| 0.5 * x[0] * x[0], |x| x.to_vec());
        let p = CompositeProblem::new(Arc::new(f), Regularizer::L1 { lambda: 1.0 })
            .unwrap()
            .with_lf_hint(1.0)
            .unwrap();
        assert!(FgmState::new(&p, &[1.0], None).is_err());
    }

    #[test]
    fn normalized_weight_grows_quadratically() {
        let l_f = 4.0;
        let (mut a, gamma) = (1.0, l_f);
        for k in 1..200 {
            let step = fgm_weight_a(gamma, a, 0.0, l_f).unwrap();
            a += step;
            let k = k as f64;
            assert!(a / (2.0 * l_f) >= (k + 2.0).powi(2) / (8.0 * l_f) - 1e-12);
        }
    }
}
