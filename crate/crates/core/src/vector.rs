//! Dense vector helpers and the extended-real value type.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; imaging problems flatten their
//! grids row-major into this representation.

use std::fmt;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `x + alpha * d`
pub fn add_scaled(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), d.len());
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

/// `(wa * a + wb * b) / denom`
pub fn combine(wa: f64, a: &[f64], wb: f64, b: &[f64], denom: f64) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(ai, bi)| (wa * ai + wb * bi) / denom)
        .collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A real number or `+inf`.
///
/// Regularizers may be infinite outside their feasible set; this type keeps
/// that case out of ordinary float arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    /// Lossy conversion for reporting; `+inf` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn add_finite(self, v: f64) -> Extended {
        match self {
            Extended::Finite(a) => Extended::Finite(a + v),
            Extended::PosInfinity => Extended::PosInfinity,
        }
    }

    /// `self <= other` in the extended order.
    pub fn le(self, other: Extended) -> bool {
        match (self, other) {
            (_, Extended::PosInfinity) => true,
            (Extended::PosInfinity, Extended::Finite(_)) => false,
            (Extended::Finite(a), Extended::Finite(b)) => a <= b,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_order() {
        assert!(Extended::Finite(1.0).le(Extended::PosInfinity));
        assert!(!Extended::PosInfinity.le(Extended::Finite(1e300)));
        assert!(Extended::PosInfinity.le(Extended::PosInfinity));
        assert_eq!(Extended::PosInfinity.add_finite(3.0), Extended::PosInfinity);
        assert_eq!(Extended::Finite(1.0).add_finite(0.5).finite(), Some(1.5));
    }

    #[test]
    fn combine_matches_hand_values() {
        let v = combine(1.0, &[2.0, 0.0], 3.0, &[0.0, 4.0], 2.0);
        assert_eq!(v, vec![1.0, 6.0]);
        assert_eq!(dist_sq(&[1.0, 2.0], &[0.0, 0.0]), 5.0);
    }
}
