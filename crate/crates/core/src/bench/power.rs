//! Largest eigenvalue of `A*A` by power iteration.

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::vector;

use super::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEstimate {
    /// Rayleigh quotient `‖Av‖²` at the last unit iterate; a lower bound on `‖A‖²`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs power iteration on `A*A` from a seeded Gaussian start until the
/// relative change of the Rayleigh quotient is at most `tol`. Running out of
/// iterations is not an error; the estimate is then flagged unconverged.
pub fn estimate_operator_norm_sq(
    op: &dyn LinearOperator,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<PowerEstimate> {
    if !(tol > 0.0) || max_iters == 0 {
        return Err(Error::InvalidParameter("need tol > 0 and max_iters >= 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut v = rng.gaussian_vec(op.input_dim());
    let mut nv = vector::norm(&v);
    if nv == 0.0 {
        return Err(Error::InvalidParameter("operator has zero input dimension".into()));
    }
    let mut value = 0.0;
    for it in 1..=max_iters {
        v.iter_mut().for_each(|x| *x /= nv);
        let av = op.apply(&v);
        let next = vector::norm_sq(&av);
        let w = op.adjoint(&av);
        nv = vector::norm(&w);
        let change = (next - value).abs();
        value = next;
        if nv == 0.0 {
            return Ok(PowerEstimate { value: 0.0, iterations: it, converged: true });
        }
        v = w;
        if it > 1 && change <= tol * value {
            return Ok(PowerEstimate { value, iterations: it, converged: true });
        }
    }
    Ok(PowerEstimate { value, iterations: max_iters, converged: false })
}
