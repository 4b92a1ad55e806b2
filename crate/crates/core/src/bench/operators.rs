//! Imaging operators on row-major `n1 × n2` grids.

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

/// Half-sample symmetric index: `…, 1, 0 | 0, 1, …, n−1 | n−1, n−2, …`.
fn reflect(idx: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = idx.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Separable Gaussian blur with reflexive boundary conditions.
///
/// The 1-D kernel samples the Gaussian at integer offsets `−r..=r` and is
/// normalized to sum 1, so the 2-D outer-product kernel also sums to 1.
#[derive(Clone, Debug)]
pub struct GaussianBlur {
    n1: usize,
    n2: usize,
    kernel: Vec<f64>,
    // source column of each entry of a padded row
    pad_idx: Vec<usize>,
    // reflected source rows, `taps` per output row
    cols_idx: Vec<usize>,
}

impl GaussianBlur {
    pub fn new(n1: usize, n2: usize, sigma: f64, size: usize) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::InvalidParameter(format!("kernel size must be odd, got {size}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidParameter(format!("empty grid {n1}x{n2}")));
        }
        let r = (size / 2) as isize;
        let mut kernel: Vec<f64> = (-r..=r)
            .map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let s: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= s);
        let pad_idx = (-r..n2 as isize + r).map(|m| reflect(m, n2)).collect();
        let cols_idx = (0..n1 as isize)
            .flat_map(|i| (-r..=r).map(move |t| reflect(i + t, n1)))
            .collect();
        Ok(Self { n1, n2, kernel, pad_idx, cols_idx })
    }

    /// The blur used by the deblurring benchmark: `σ = 4`, `9 × 9`.
    pub fn standard(n1: usize, n2: usize) -> Result<Self> {
        Self::new(n1, n2, 4.0, 9)
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    // Horizontal pass on a reflected copy of each row; `transpose` scatters
    // into the padded row and folds the margins back.
    fn pass_rows(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let taps = self.kernel.len();
        let mut out = vec![0.0; n1 * n2];
        let mut buf = vec![0.0; n2 + taps - 1];
        for i in 0..n1 {
            let (src, dst) = (&x[i * n2..(i + 1) * n2], &mut out[i * n2..(i + 1) * n2]);
            if transpose {
                buf.iter_mut().for_each(|b| *b = 0.0);
                for (j, &v) in src.iter().enumerate() {
                    for (b, &w) in buf[j..j + taps].iter_mut().zip(&self.kernel) {
                        *b += w * v;
                    }
                }
                for (m, &b) in buf.iter().enumerate() {
                    dst[self.pad_idx[m]] += b;
                }
            } else {
                for (b, &m) in buf.iter_mut().zip(&self.pad_idx) {
                    *b = src[m];
                }
                for (j, d) in dst.iter_mut().enumerate() {
                    *d = buf[j..j + taps].iter().zip(&self.kernel).map(|(b, w)| b * w).sum();
                }
            }
        }
        out
    }

    // Vertical pass as whole-row axpys.
    fn pass_cols(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let taps = self.kernel.len();
        let mut out = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for (&m, &w) in self.cols_idx[i * taps..(i + 1) * taps].iter().zip(&self.kernel) {
                let (from, to) = if transpose { (i, m) } else { (m, i) };
                let src = &x[from * n2..(from + 1) * n2];
                for (d, s) in out[to * n2..(to + 1) * n2].iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        out
    }
}

impl LinearOperator for GaussianBlur {
    fn input_dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn output_dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.pass_cols(&self.pass_rows(x, false), false)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.pass_rows(&self.pass_cols(y, true), true)
    }
}

/// Orthonormal 2-D Haar wavelet transform with `stages` levels.
///
/// `apply` is the synthesis (inverse) transform `W`, taking coefficients to
/// an image; `adjoint` is the analysis transform `W* = W⁻¹`. Each stage acts
/// on the top-left coarse block, rows first, with approximations in the
/// first half and details in the second.
#[derive(Clone, Debug)]
pub struct Haar2d {
    n1: usize,
    n2: usize,
    stages: usize,
}

impl Haar2d {
    pub fn new(n1: usize, n2: usize, stages: usize) -> Result<Self> {
        let block = 1usize << stages;
        if n1 == 0 || n2 == 0 || n1 % block != 0 || n2 % block != 0 {
            return Err(Error::InvalidParameter(format!(
                "{n1}x{n2} grid is not divisible by 2^{stages}"
            )));
        }
        Ok(Self { n1, n2, stages })
    }

    pub fn analysis(&self, img: &[f64]) -> Vec<f64> {
        let mut c = img.to_vec();
        let (mut h, mut w) = (self.n1, self.n2);
        for _ in 0..self.stages {
            self.rows_forward(&mut c, h, w);
            self.cols_forward(&mut c, h, w);
            h /= 2;
            w /= 2;
        }
        c
    }

    pub fn synthesis(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut c = coeffs.to_vec();
        for s in (0..self.stages).rev() {
            let (h, w) = (self.n1 >> s, self.n2 >> s);
            self.cols_inverse(&mut c, h, w);
            self.rows_inverse(&mut c, h, w);
        }
        c
    }

    fn rows_forward(&self, c: &mut [f64], h: usize, w: usize) {
        let mut tmp = vec![0.0; w];
        for i in 0..h {
            let row = &mut c[i * self.n2..i * self.n2 + w];
            for k in 0..w / 2 {
                tmp[k] = (row[2 * k] + row[2 * k + 1]) * std::f64::consts::FRAC_1_SQRT_2;
                tmp[w / 2 + k] = (row[2 * k] - row[2 * k + 1]) * std::f64::consts::FRAC_1_SQRT_2;
            }
            row.copy_from_slice(&tmp);
        }
    }

    fn rows_inverse(&self, c: &mut [f64], h: usize, w: usize) {
        let mut tmp = vec![0.0; w];
        for i in 0..h {
            let row = &mut c[i * self.n2..i * self.n2 + w];
            for k in 0..w / 2 {
                let (a, d) = (row[k], row[w / 2 + k]);
                tmp[2 * k] = (a + d) * std::f64::consts::FRAC_1_SQRT_2;
                tmp[2 * k + 1] = (a - d) * std::f64::consts::FRAC_1_SQRT_2;
            }
            row.copy_from_slice(&tmp);
        }
    }

    fn cols_forward(&self, c: &mut [f64], h: usize, w: usize) {
        let mut tmp = vec![0.0; h];
        for j in 0..w {
            for k in 0..h / 2 {
                let (a, b) = (c[2 * k * self.n2 + j], c[(2 * k + 1) * self.n2 + j]);
                tmp[k] = (a + b) * std::f64::consts::FRAC_1_SQRT_2;
                tmp[h / 2 + k] = (a - b) * std::f64::consts::FRAC_1_SQRT_2;
            }
            for (k, v) in tmp.iter().enumerate() {
                c[k * self.n2 + j] = *v;
            }
        }
    }

    fn cols_inverse(&self, c: &mut [f64], h: usize, w: usize) {
        let mut tmp = vec![0.0; h];
        for j in 0..w {
            for k in 0..h / 2 {
                let (a, d) = (c[k * self.n2 + j], c[(h / 2 + k) * self.n2 + j]);
                tmp[2 * k] = (a + d) * std::f64::consts::FRAC_1_SQRT_2;
                tmp[2 * k + 1] = (a - d) * std::f64::consts::FRAC_1_SQRT_2;
            }
            for (k, v) in tmp.iter().enumerate() {
                c[k * self.n2 + j] = *v;
            }
        }
    }
}

impl LinearOperator for Haar2d {
    fn input_dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn output_dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.synthesis(x)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.analysis(y)
    }
}

/// Forward differences with the last row/column clamped:
/// `(Du)_{ij} = (u_{min(i+1,n1−1),j} − u_{ij}, u_{i,min(j+1,n2−1)} − u_{ij})`,
/// interleaved per pixel.
#[derive(Clone, Debug)]
pub struct DiscreteGradient {
    n1: usize,
    n2: usize,
}

impl DiscreteGradient {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidParameter(format!("empty grid {n1}x{n2}")));
        }
        Ok(Self { n1, n2 })
    }
}

impl LinearOperator for DiscreteGradient {
    fn input_dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn output_dim(&self) -> usize {
        2 * self.n1 * self.n2
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let mut p = vec![0.0; 2 * n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let c = u[i * n2 + j];
                let idx = 2 * (i * n2 + j);
                if i + 1 < n1 {
                    p[idx] = u[(i + 1) * n2 + j] - c;
                }
                if j + 1 < n2 {
                    p[idx + 1] = u[i * n2 + j + 1] - c;
                }
            }
        }
        p
    }

    /// Negative divergence.
    fn adjoint(&self, p: &[f64]) -> Vec<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let mut u = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let idx = 2 * (i * n2 + j);
                if i + 1 < n1 {
                    u[(i + 1) * n2 + j] += p[idx];
                    u[i * n2 + j] -= p[idx];
                }
                if j + 1 < n2 {
                    u[i * n2 + j + 1] += p[idx + 1];
                    u[i * n2 + j] -= p[idx + 1];
                }
            }
        }
        u
    }
}
