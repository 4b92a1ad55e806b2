//! FISTA with a non-decreasing backtracking search.

use crate::error::Result;
use crate::linesearch::Trial;
use crate::problem::CompositeProblem;

use super::{Method, SolverKind, StepInfo, StepPolicy};

/// `t_{k+1} = (1 + √(1 + 4t_k²))/2`.
pub fn fista_t_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Weight surrogate for FISTA, comparable with ACGM's `A_k`:
/// `A_{k+1} = (√(1/(4L_{k+1})) + √(1/(4L_{k+1}) + (L_k/L_{k+1})A_k))²`.
pub fn fista_weight_next(a_k: f64, l_k: f64, l_next: f64) -> f64 {
    let h = 0.25 / l_next;
    let s = h.sqrt() + (h + l_k / l_next * a_k).sqrt();
    s * s
}

#[derive(Clone, Debug)]
pub struct FistaState {
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub t: f64,
    pub l: f64,
    pub a_acc: f64,
    pub k: usize,
    policy: StepPolicy,
}

impl FistaState {
    pub fn new(x0: &[f64], policy: StepPolicy) -> Self {
        Self {
            x: x0.to_vec(),
            x_prev: x0.to_vec(),
            t: 0.0,
            l: policy.initial_l(),
            a_acc: 0.0,
            k: 0,
            policy,
        }
    }
}

impl Method for FistaState {
    fn kind(&self) -> SolverKind {
        SolverKind::Fista
    }

    fn step(&mut self, problem: &CompositeProblem) -> Result<StepInfo> {
        let t_next = fista_t_next(self.t);
        let beta = (self.t - 1.0) / t_next;
        let y: Vec<f64> = self
            .x
            .iter()
            .zip(&self.x_prev)
            .map(|(xi, pi)| xi + beta * (xi - pi))
            .collect();
        let grad_y = problem.grad(&y)?;
        let criterion = self.policy.criterion();
        let out = self.policy.search(self.k, self.l, |l_hat, test| {
            let x_next = problem.prox_grad_step_from(&y, &grad_y, l_hat);
            let accepted = !test || criterion.accepts(problem, &y, &grad_y, &x_next, l_hat)?;
            Ok(Trial { candidate: Some(x_next), accepted })
        })?;

        self.a_acc = fista_weight_next(self.a_acc, self.l, out.accepted_l);
        self.x_prev = std::mem::replace(&mut self.x, out.candidate);
        self.l = out.accepted_l;
        self.t = t_next;
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
