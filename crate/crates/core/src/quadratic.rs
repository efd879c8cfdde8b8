use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// `q(x) = ½xᵀAx + bᵀx + c` with symmetric `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFunction {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
}

impl QuadraticFunction {
    /// Checks shapes and symmetry (to 1e-12 per entry), then symmetrizes `A`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: n,
            });
        }
        if !c.is_finite() || a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (a[(i, j)] - a[(j, i)]).abs();
                if gap > tol::SYMMETRY {
                    return Err(Error::NotSymmetric { row: i, col: j, gap });
                }
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, b, c })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(a: &[&[f64]], b: &[f64], c: f64) -> Result<Self> {
        let n = a.len();
        for row in a {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        let flat: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_column_slice(b),
            c,
        )
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }

    /// `uᵀAu` (full form, no ½).
    pub fn form(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.a * u))
    }

    /// `d ↦ q(p + d)`.
    pub fn shifted(&self, p: &DVector<f64>) -> Result<QuadraticFunction> {
        let c = self.eval(p)?;
        Ok(QuadraticFunction {
            a: self.a.clone(),
            b: &self.b + &self.a * p,
            c,
        })
    }

    /// Same quadratic part with a new linear term and constant.
    pub fn with_linear(&self, b: DVector<f64>, c: f64) -> Result<QuadraticFunction> {
        QuadraticFunction::new(self.a.clone(), b, c)
    }
}
