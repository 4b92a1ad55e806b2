//! Accelerated method with line search on the gradient step, whose
//! estimate functions are built from linearizations at the new iterate.
//!
//! The estimate function after `k` steps is
//! `ψ_k(x) = ½‖x − x₀‖² + Σ a_i [f(x_i) + ⟨∇f(x_i), x − x_i⟩ + (μ_f/2)‖x − x_i‖²] + A_k Ψ(x)`,
//! so its vertex is `prox_{(A_k/c_k)Ψ}(z_k/c_k)` with `c_k = 1 + μ_f A_k` and
//! `z_k = x₀ + Σ a_i (μ_f x_i − ∇f(x_i))`.

use crate::error::Result;
use crate::linesearch::Trial;
use crate::problem::CompositeProblem;
use crate::vector;

use super::{Method, SolverKind, StepInfo, StepPolicy};

/// Positive root of `L a² = 2(A + a)(1 + μA)`.
pub fn amgs_weight_a(a_acc: f64, mu: f64, l: f64) -> f64 {
    let c = 1.0 + mu * a_acc;
    (c + (c * c + 2.0 * l * a_acc * c).sqrt()) / l
}

#[derive(Clone, Debug)]
pub struct AmgsState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a_acc: f64,
    pub l: f64,
    pub k: usize,
    z: Vec<f64>,
    policy: StepPolicy,
}

impl AmgsState {
    pub fn new(x0: &[f64], policy: StepPolicy) -> Self {
        Self {
            x: x0.to_vec(),
            v: x0.to_vec(),
            a_acc: 0.0,
            l: policy.initial_l(),
            k: 0,
            z: x0.to_vec(),
            policy,
        }
    }
}

impl Method for AmgsState {
    fn kind(&self) -> SolverKind {
        SolverKind::Amgs
    }

    fn step(&mut self, problem: &CompositeProblem) -> Result<StepInfo> {
        let (mu, mu_f) = (problem.mu(), problem.mu_f());
        let (x, v, a_acc) = (&self.x, &self.v, self.a_acc);
        let criterion = self.policy.criterion();
        let out = self.policy.search(self.k, self.l, |l_hat, test| {
            let a = amgs_weight_a(a_acc, mu, l_hat);
            let y = if a_acc == 0.0 {
                v.clone()
            } else {
                vector::combine(a_acc, x, a, v, a_acc + a)
            };
            let grad_y = problem.grad(&y)?;
            let x_next = problem.prox_grad_step_from(&y, &grad_y, l_hat);
            let accepted = !test || criterion.accepts(problem, &y, &grad_y, &x_next, l_hat)?;
            Ok(Trial { candidate: Some((a, y, x_next)), accepted })
        })?;

        let (a, y, x_next) = out.candidate;
        let grad_x = problem.grad(&x_next)?;
        for ((zi, xi), gi) in self.z.iter_mut().zip(&x_next).zip(&grad_x) {
            *zi += a * (mu_f * xi - gi);
        }
        self.a_acc += a;
        let c = 1.0 + mu_f * self.a_acc;
        self.v = problem.prox(&vector::scale(&self.z, 1.0 / c), self.a_acc / c);
        self.x = x_next;
        self.l = out.accepted_l;
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

    fn vertex(&self) -> Option<&[f64]> {
        Some(&self.v)
    }
}
