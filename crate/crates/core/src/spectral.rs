//! Full-domain quadratics: eigen-decomposition, threshold, envelope domain and value.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{AffineSubspace, EnvelopeDomain, Warning};
use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::quadratic::QuadraticFunction;
use crate::tol;

/// `A = QᵀDQ` with the eigenvectors as the rows of `Q` and eigenvalues non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub q: DMatrix<f64>,
    pub lambdas: DVector<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Eigenvector `i` (row `i` of `Q`).
    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.q.row(i).transpose()
    }

    pub fn smallest(&self) -> f64 {
        self.lambdas[self.dim() - 1]
    }

    /// Indices whose eigenvalue equals `lambda` within `tol·(1+|lambda|)`.
    pub fn cluster_of(&self, lambda: f64, tol: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| (self.lambdas[i] - lambda).abs() <= tol * (1.0 + lambda.abs()))
            .collect()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.q.transpose() * DMatrix::from_diagonal(&self.lambdas) * &self.q
    }
}

/// Cyclic Jacobi. Returns unsorted eigenvalues and eigenvectors as columns.
pub(crate) fn jacobi_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (m.diagonal(), v)
}

/// Spectral decomposition of a symmetric matrix.
pub fn eig_decompose_sym(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if gap > tol::SYMMETRY {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    let sym = (a + a.transpose()) * 0.5;
    let (vals, vecs) = jacobi_eigen(&sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let lambdas = DVector::from_iterator(n, order.iter().map(|&i| vals[i]));
    let q = DMatrix::from_fn(n, n, |r, c| vecs[(c, order[r])]);
    Ok(SpectralDecomposition { q, lambdas })
}

/// Tolerance knob for the eigenvalue case analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub eig_cluster_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            eig_cluster_tol: tol::EIG_CLUSTER,
        }
    }
}

/// Threshold and envelope domain of a quadratic on all of `ℝⁿ`.
#[derive(Debug, Clone)]
pub struct FullDomainAnalysis {
    pub r_bar: f64,
    pub decomposition: SpectralDecomposition,
    pub domain: EnvelopeDomain,
    pub warnings: Vec<Warning>,
}

impl FullDomainAnalysis {
    /// Indices of the eigenvalues tied with the smallest one.
    pub fn min_cluster(&self, opts: SpectralOptions) -> Vec<usize> {
        self.decomposition
            .cluster_of(self.decomposition.smallest(), opts.eig_cluster_tol)
    }
}

pub fn analyze_full_domain(
    f: &QuadraticFunction,
    opts: SpectralOptions,
) -> Result<FullDomainAnalysis> {
    let dec = eig_decompose_sym(f.a())?;
    let tol = opts.eig_cluster_tol;
    let n = dec.dim();
    let mut warnings = Vec::new();
    let mut lam_n = dec.smallest();
    if lam_n.abs() <= tol {
        if lam_n < 0.0 {
            warnings.push(Warning::NearZeroEigenvalue(lam_n));
        }
        lam_n = 0.0;
    }
    let b = f.b();
    let domain = if lam_n > 0.0 {
        EnvelopeDomain::FullSpace
    } else if lam_n < 0.0 {
        let normals: Vec<(DVector<f64>, f64)> = dec
            .cluster_of(lam_n, tol)
            .into_iter()
            .map(|i| {
                let q = dec.vector(i);
                let rhs = -q.dot(b) / dec.lambdas[i];
                (q, rhs)
            })
            .collect();
        let mut basepoint = DVector::zeros(n);
        for (q, rhs) in &normals {
            basepoint += q * *rhs;
        }
        EnvelopeDomain::Affine(AffineSubspace { basepoint, normals })
    } else {
        let bscale = 1.0 + b.amax();
        let blocked = (0..n)
            .filter(|&i| dec.lambdas[i].abs() <= tol)
            .any(|i| dec.vector(i).dot(b).abs() > tol * bscale);
        if blocked {
            EnvelopeDomain::Empty
        } else {
            EnvelopeDomain::FullSpace
        }
    };
    Ok(FullDomainAnalysis {
        r_bar: (-lam_n).max(0.0),
        decomposition: dec,
        domain,
        warnings,
    })
}

/// `max{0, -λₙ}` for a quadratic on `ℝⁿ`.
pub fn threshold_full_domain(f: &QuadraticFunction) -> Result<f64> {
    Ok(analyze_full_domain(f, SpectralOptions::default())?.r_bar)
}

/// `dom e_r̄ f` for a quadratic on `ℝⁿ`.
pub fn envelope_domain_full(f: &QuadraticFunction) -> Result<EnvelopeDomain> {
    Ok(analyze_full_domain(f, SpectralOptions::default())?.domain)
}

/// Exact `e_r f(x̄)` for a quadratic on `ℝⁿ`; `-∞` when the infimum is unbounded.
pub fn envelope_value_full(f: &QuadraticFunction, r: f64, xbar: &DVector<f64>) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::NegativeProxParameter(r));
    }
    let n = f.dim();
    if xbar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: xbar.len(),
        });
    }
    let dec = eig_decompose_sym(f.a())?;
    let z = &dec.q * xbar;
    let beta = &dec.q * f.b();
    let mut value = f.c();
    for i in 0..n {
        let lam = dec.lambdas[i];
        let curv = lam + r;
        let lin = beta[i] - r * z[i];
        let band = tol::EIG_CLUSTER * (1.0 + lam.abs());
        if curv > band {
            value += -lin * lin / (2.0 * curv) + 0.5 * r * z[i] * z[i];
        } else if curv >= -band {
            if lin.abs() > tol::EIG_CLUSTER * (1.0 + beta[i].abs() + r * z[i].abs()) {
                return Ok(f64::NEG_INFINITY);
            }
            value += 0.5 * r * z[i] * z[i];
        } else {
            return Ok(f64::NEG_INFINITY);
        }
    }
    Ok(value)
}

/// Reconstruction error of a decomposition, relative to `1 + ‖A‖_max`.
pub fn reconstruction_error(a: &DMatrix<f64>, dec: &SpectralDecomposition) -> f64 {
    max_abs(&(dec.reconstruct() - a)) / (1.0 + max_abs(a))
}
