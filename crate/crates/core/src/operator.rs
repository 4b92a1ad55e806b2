//! Linear operators with explicit adjoints.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A linear map `R^input_dim -> R^output_dim` together with its adjoint.
pub trait LinearOperator: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;
}

/// Dense matrix operator.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    matrix: DMatrix<f64>,
}

impl DenseMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    /// Builds from row-major data.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Exact squared spectral norm from the eigenvalues of `A^T A`.
    pub fn spectral_norm_sq(&self) -> f64 {
        let gram = self.matrix.transpose() * &self.matrix;
        gram.symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v))
    }
}

impl LinearOperator for DenseMatrix {
    fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(y);
        self.matrix.tr_mul(&v).as_slice().to_vec()
    }
}

/// Diagonal operator `x -> d .* x`.
#[derive(Clone, Debug)]
pub struct Diagonal {
    diag: Vec<f64>,
}

impl Diagonal {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }
}

impl LinearOperator for Diagonal {
    fn input_dim(&self) -> usize {
        self.diag.len()
    }

    fn output_dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.diag).map(|(a, d)| a * d).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.apply(y)
    }
}

/// Identity on `R^n`.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn input_dim(&self) -> usize {
        self.0
    }

    fn output_dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}

/// `outer ∘ inner`: applies `inner` first.
#[derive(Clone)]
pub struct Composed {
    outer: Arc<dyn LinearOperator>,
    inner: Arc<dyn LinearOperator>,
}

impl Composed {
    pub fn new(outer: Arc<dyn LinearOperator>, inner: Arc<dyn LinearOperator>) -> Result<Self> {
        if outer.input_dim() != inner.output_dim() {
            return Err(Error::Dimension {
                expected: outer.input_dim(),
                actual: inner.output_dim(),
            });
        }
        Ok(Self { outer, inner })
    }
}

impl LinearOperator for Composed {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.outer.output_dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.outer.apply(&self.inner.apply(x))
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.inner.adjoint(&self.outer.adjoint(y))
    }
}

/// Swaps the roles of an operator and its adjoint.
#[derive(Clone)]
pub struct AdjointOf(pub Arc<dyn LinearOperator>);

impl LinearOperator for AdjointOf {
    fn input_dim(&self) -> usize {
        self.0.output_dim()
    }

    fn output_dim(&self) -> usize {
        self.0.input_dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.adjoint(x)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.0.apply(y)
    }
}
