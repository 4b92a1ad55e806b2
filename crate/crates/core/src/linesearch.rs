//! Armijo-type backtracking over the Lipschitz estimate `L`.
//!
//! Each search starts at `L̂ = r_d · L_prev` and multiplies by `r_u` after
//! every rejection, so the `j`-th trial is `r_u^j · (r_d · L_prev)`
//! evaluated left to right. The first accepted trial wins.

use crate::error::{Error, Result};
use crate::problem::{upper_model_from_parts, CompositeProblem};
use crate::vector;

/// Relative slack on the oracle descent test, scaled by `max(1, |f(y)|)`.
pub const DESCENT_REL_TOL: f64 = 1e-12;

pub const DEFAULT_MAX_BACKTRACKS: usize = 60;

/// Which test decides whether a trial `L̂` is accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcceptanceCriterion {
    /// `f(x) ≤ Q_{f,L,y}(x) + tol`
    OracleDescent,
    /// `s‖B(x−y)‖² ≤ L‖x−y‖²` for quadratics `f = (s/2)‖B· − b‖²`.
    QuadraticResidual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchParams {
    pub l0: f64,
    pub r_u: f64,
    pub r_d: f64,
    pub max_backtracks: usize,
    pub criterion: AcceptanceCriterion,
}

impl LineSearchParams {
    pub fn new(l0: f64, r_u: f64, r_d: f64) -> Result<Self> {
        let p = Self {
            l0,
            r_u,
            r_d,
            max_backtracks: DEFAULT_MAX_BACKTRACKS,
            criterion: AcceptanceCriterion::OracleDescent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_criterion(mut self, criterion: AcceptanceCriterion) -> Self {
        self.criterion = criterion;
        self
    }

    pub fn with_max_backtracks(mut self, max_backtracks: usize) -> Self {
        self.max_backtracks = max_backtracks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return Err(Error::InvalidParameter(format!("L0 must be > 0, got {}", self.l0)));
        }
        if !(self.r_u > 1.0 && self.r_u.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_u must be > 1, got {}", self.r_u)));
        }
        // r_d = 1 is admitted for the non-decreasing FISTA search
        if !(self.r_d > 0.0 && self.r_d <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "r_d must lie in (0, 1), got {}",
                self.r_d
            )));
        }
        if self.max_backtracks == 0 {
            return Err(Error::InvalidParameter("max_backtracks must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of one backtracking search.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome<T> {
    pub accepted_l: f64,
    pub candidate: T,
    pub backtrack_count: usize,
}

/// Whether `x_candidate` passes the oracle descent test at `(y, L)`.
pub fn descent_accepts(
    problem: &CompositeProblem,
    y: &[f64],
    x_candidate: &[f64],
    l: f64,
) -> Result<bool> {
    let f_y = problem.f(y)?;
    let g_y = problem.grad(y)?;
    descent_accepts_from(problem, f_y, &g_y, y, x_candidate, l)
}

/// As [`descent_accepts`] with `f(y)` and `∇f(y)` supplied.
pub fn descent_accepts_from(
    problem: &CompositeProblem,
    f_y: f64,
    grad_y: &[f64],
    y: &[f64],
    x_candidate: &[f64],
    l: f64,
) -> Result<bool> {
    let f_x = problem.f(x_candidate)?;
    let q = upper_model_from_parts(f_y, grad_y, y, l, x_candidate);
    Ok(f_x <= q + DESCENT_REL_TOL * f_y.abs().max(1.0))
}

/// Whether `s‖B(x−y)‖² ≤ L‖x−y‖²` for the problem's quadratic smooth part.
pub fn quadratic_residual_accepts(
    problem: &CompositeProblem,
    y: &[f64],
    x_candidate: &[f64],
    l: f64,
) -> Result<bool> {
    let form = problem.smooth().curvature_form().ok_or_else(|| {
        Error::Misuse("quadratic residual test needs a quadratic smooth part".into())
    })?;
    let d = vector::sub(x_candidate, y);
    let bd = form.op.apply(&d);
    Ok(form.scale * vector::norm_sq(&bd) <= l * vector::norm_sq(&d))
}

impl AcceptanceCriterion {
    /// Evaluates the criterion at a trial; `grad_y` is reused by the oracle test.
    pub fn accepts(
        &self,
        problem: &CompositeProblem,
        y: &[f64],
        grad_y: &[f64],
        x_candidate: &[f64],
        l: f64,
    ) -> Result<bool> {
        match self {
            AcceptanceCriterion::OracleDescent => {
                let f_y = problem.f(y)?;
                descent_accepts_from(problem, f_y, grad_y, y, x_candidate, l)
            }
            AcceptanceCriterion::QuadraticResidual => {
                quadratic_residual_accepts(problem, y, x_candidate, l)
            }
        }
    }

    /// Fails early when the criterion cannot be evaluated on `problem`.
    pub fn check_applicable(&self, problem: &CompositeProblem) -> Result<()> {
        if *self == AcceptanceCriterion::QuadraticResidual
            && problem.smooth().curvature_form().is_none()
        {
            return Err(Error::Misuse(
                "quadratic residual test attached to a non-quadratic problem".into(),
            ));
        }
        Ok(())
    }
}

/// One trial of the search: the built candidate and the criterion verdict.
pub struct Trial<T> {
    pub candidate: T,
    pub accepted: bool,
}

/// Runs the search. `trial` builds and tests the candidate for a given `L̂`
/// and must be deterministic in `L̂`.
pub fn backtracking_search<T>(
    params: &LineSearchParams,
    l_prev: f64,
    mut trial: impl FnMut(f64) -> Result<Trial<T>>,
) -> Result<SearchOutcome<T>> {
    let mut l_hat = params.r_d * l_prev;
    let mut rejections = 0usize;
    loop {
        let t = trial(l_hat)?;
        if t.accepted {
            return Ok(SearchOutcome {
                accepted_l: l_hat,
                candidate: t.candidate,
                backtrack_count: rejections,
            });
        }
        if rejections >= params.max_backtracks {
            return Err(Error::LineSearchExhausted {
                max_backtracks: params.max_backtracks,
                last_l: l_hat,
            });
        }
        rejections += 1;
        l_hat *= params.r_u;
    }
}

/// Ceiling `L_u = max(r_u·L_f, r_d·L_0)` on every accepted estimate.
pub fn l_upper_bound(l_f: f64, l0: f64, r_u: f64, r_d: f64) -> f64 {
    (r_u * l_f).max(r_d * l0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Regularizer, SmoothFn};
    use std::sync::Arc;

    fn half_norm_sq() -> CompositeProblem {
        let f = SmoothFn::new(1, |x| 0.5 * x[0] * x[0], |x| x.to_vec());
        CompositeProblem::new(Arc::new(f), Regularizer::Zero).unwrap()
    }

    #[test]
    fn descent_examples() {
        let p = half_norm_sq();
        assert!(descent_accepts(&p, &[1.0], &[1.0], 0.3).unwrap());
        assert!(descent_accepts(&p, &[1.0], &[0.0], 1.0).unwrap());
        // L = 0.5: x = y − 2∇f(y) = −1, f = 0.5 > Q = −0.5
        assert!(!descent_accepts(&p, &[1.0], &[-1.0], 0.5).unwrap());
    }

    #[test]
    fn quadratic_residual_needs_a_quadratic() {
        let p = half_norm_sq();
        assert!(matches!(
            quadratic_residual_accepts(&p, &[1.0], &[0.0], 1.0),
            Err(Error::Misuse(_))
        ));
        assert!(AcceptanceCriterion::QuadraticResidual.check_applicable(&p).is_err());
    }

    #[test]
    fn always_accepting_trial() {
        let params = LineSearchParams::new(1.0, 2.0, 0.9).unwrap();
        let out = backtracking_search(&params, 3.0, |l| {
            Ok(Trial { candidate: l, accepted: true })
        })
        .unwrap();
        assert_eq!(out.accepted_l, 0.9 * 3.0);
        assert_eq!(out.backtrack_count, 0);
    }

    #[test]
    fn hand_simulated_search_on_half_norm_sq() {
        let p = half_norm_sq();
        let params = LineSearchParams::new(0.5, 2.0, 0.9).unwrap();
        let y = [1.0];
        let mut trials = Vec::new();
        let out = backtracking_search(&params, 0.5, |l| {
            trials.push(l);
            let x = p.prox_grad_step(&y, l)?;
            let accepted = descent_accepts(&p, &y, &x, l)?;
            Ok(Trial { candidate: x, accepted })
        })
        .unwrap();
        assert_eq!(out.backtrack_count, 2);
        assert_eq!(trials, vec![0.45, 0.45 * 2.0, 0.45 * 2.0 * 2.0]);
        assert!((out.accepted_l - 1.8).abs() < 1e-15);
        assert!(trials.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn exhausted_search_reports_last_trial() {
        let params = LineSearchParams::new(1.0, 2.0, 0.5).unwrap().with_max_backtracks(3);
        let err = backtracking_search(&params, 1.0, |l| {
            Ok(Trial { candidate: l, accepted: false })
        })
        .unwrap_err();
        match err {
            Error::LineSearchExhausted { last_l, max_backtracks } => {
                assert_eq!(max_backtracks, 3);
                assert_eq!(last_l, 0.5 * 8.0);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn large_previous_estimate_needs_no_backtrack() {
        let p = half_norm_sq();
        let params = LineSearchParams::new(1.0, 2.0, 0.9).unwrap();
        let y = [0.7];
        let out = backtracking_search(&params, 1.0 / 0.9, |l| {
            let x = p.prox_grad_step(&y, l)?;
            Ok(Trial { accepted: descent_accepts(&p, &y, &x, l)?, candidate: x })
        })
        .unwrap();
        assert_eq!(out.backtrack_count, 0);
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(l_upper_bound(2.0, 0.6, 2.0, 0.9), 4.0);
        assert!((l_upper_bound(2.0, 20.0, 2.0, 0.9) - 18.0).abs() < 1e-12);
        assert_eq!(l_upper_bound(1.0, 2.0, 2.0, 1.0), 2.0);
    }

    #[test]
    fn invalid_params() {
        assert!(LineSearchParams::new(0.0, 2.0, 0.9).is_err());
        assert!(LineSearchParams::new(1.0, 1.0, 0.9).is_err());
        assert!(LineSearchParams::new(1.0, 2.0, 0.0).is_err());
        assert!(LineSearchParams::new(1.0, 2.0, 1.5).is_err());
    }
}
