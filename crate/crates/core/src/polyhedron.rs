//! Halfspaces, polyhedral sets and the LP-backed geometry on them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpOutcome};
use crate::tol;

/// The closed halfspace `{x : aᵀx <= beta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    a: DVector<f64>,
    beta: f64,
}

impl HalfSpace {
    pub fn new(a: DVector<f64>, beta: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if !beta.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if a.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroNormal);
        }
        Ok(Self { a, beta })
    }

    pub fn from_slice(a: &[f64], beta: f64) -> Result<Self> {
        Self::new(DVector::from_column_slice(a), beta)
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn offset(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `beta - aᵀx`; nonnegative inside.
    pub fn slack(&self, x: &DVector<f64>) -> f64 {
        self.beta - self.a.dot(x)
    }
}

/// Affine hull `{point + basis * z}` of a polyhedral set.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineHull {
    pub point: DVector<f64>,
    /// Orthonormal columns spanning the direction space (may have zero columns).
    pub basis: DMatrix<f64>,
}

impl AffineHull {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Finite intersection of closed halfspaces. No halfspaces means the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralSet {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
}

impl PolyhedralSet {
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for h in &halfspaces {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.dim(),
                });
            }
        }
        Ok(Self { dim, halfspaces })
    }

    /// Convenience constructor from `(a, beta)` rows.
    pub fn from_rows(dim: usize, rows: &[(&[f64], f64)]) -> Result<Self> {
        let hs = rows
            .iter()
            .map(|(a, b)| HalfSpace::from_slice(a, *b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, hs)
    }

    pub fn whole_space(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn is_whole_space(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn is_cone(&self) -> bool {
        self.halfspaces.iter().all(|h| h.beta == 0.0)
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Membership with the default absolute slack tolerance.
    pub fn contains(&self, x: &DVector<f64>) -> Result<bool> {
        self.contains_with(x, tol::MEMBERSHIP)
    }

    pub fn contains_with(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.halfspaces.iter().all(|h| h.slack(x) >= -tol))
    }

    pub fn intersect(&self, other: &PolyhedralSet) -> Result<PolyhedralSet> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        Ok(PolyhedralSet {
            dim: self.dim,
            halfspaces: hs,
        })
    }

    /// The set `S + v`.
    pub fn translate(&self, v: &DVector<f64>) -> Result<PolyhedralSet> {
        self.check_dim(v)?;
        let hs = self
            .halfspaces
            .iter()
            .map(|h| HalfSpace {
                a: h.a.clone(),
                beta: h.beta + h.a.dot(v),
            })
            .collect();
        Ok(PolyhedralSet {
            dim: self.dim,
            halfspaces: hs,
        })
    }

    /// The cone `{d : aᵢᵀd <= 0}` built from the same normals.
    pub fn direction_cone(&self) -> PolyhedralSet {
        PolyhedralSet {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| HalfSpace {
                    a: h.a.clone(),
                    beta: 0.0,
                })
                .collect(),
        }
    }

    fn lp_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows = self
            .halfspaces
            .iter()
            .map(|h| h.a.iter().copied().collect())
            .collect();
        let rhs = self.halfspaces.iter().map(|h| h.beta).collect();
        (rows, rhs)
    }

    /// Maximize `cᵀx` over the set.
    pub fn maximize(&self, c: &DVector<f64>) -> LpOutcome {
        let (rows, rhs) = self.lp_rows();
        lp::maximize(c.as_slice(), &rows, &rhs, None)
    }

    /// Minimize `cᵀx` over the set.
    pub fn minimize(&self, c: &DVector<f64>) -> LpOutcome {
        let (rows, rhs) = self.lp_rows();
        lp::minimize(c.as_slice(), &rows, &rhs, None)
    }

    /// Some point of the set, or `None` when it is empty.
    pub fn feasible_point(&self) -> Option<DVector<f64>> {
        if self.halfspaces.is_empty() {
            return Some(DVector::zeros(self.dim));
        }
        match self.maximize(&DVector::zeros(self.dim)) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// True iff the recession cone is `{0}`.
    pub fn is_bounded(&self) -> Result<bool> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(self.direction_cone().cone_is_trivial())
    }

    /// For a cone: maximize each `±e_k` over the cone within the unit box.
    pub(crate) fn cone_is_trivial(&self) -> bool {
        let n = self.dim;
        let (rows, rhs) = self.direction_cone().lp_rows();
        let bounds = vec![(-1.0, 1.0); n];
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; n];
                c[k] = sign;
                match lp::maximize(&c, &rows, &rhs, Some(&bounds)) {
                    LpOutcome::Optimal { value, .. } if value > tol::LP_ZERO => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// Indices of constraints that hold with equality on the whole set.
    pub fn implicit_equalities(&self) -> Vec<usize> {
        let (rows, rhs) = self.lp_rows();
        (0..self.halfspaces.len())
            .filter(|&i| {
                let h = &self.halfspaces[i];
                match lp::minimize(&rows[i], &rows, &rhs, None) {
                    LpOutcome::Optimal { value, .. } => {
                        value >= h.beta - tol::LP_ZERO * (1.0 + h.beta.abs())
                    }
                    _ => false,
                }
            })
            .collect()
    }

    /// Affine hull of a nonempty set.
    pub fn affine_hull(&self) -> Option<AffineHull> {
        let point = self.feasible_point()?;
        let eq = self.implicit_equalities();
        let normals: Vec<DVector<f64>> =
            eq.iter().map(|&i| self.halfspaces[i].a.clone()).collect();
        let basis = linalg::null_space(&normals, self.dim);
        Some(AffineHull { point, basis })
    }

    /// A relative Chebyshev center: `(hull, center, radius)`.
    ///
    /// The search is kept within a box of half-width `cap` around a feasible
    /// point, so unbounded sets still get a finite center.
    pub fn relative_center(&self, cap: f64) -> Option<(AffineHull, DVector<f64>, f64)> {
        let hull = self.affine_hull()?;
        let d = hull.dim();
        if d == 0 {
            let p = hull.point.clone();
            return Some((hull, p, 0.0));
        }
        let (rows, rhs) = self.reduced_rows(&hull);
        let mut lp_rows = Vec::with_capacity(rows.len());
        for row in &rows {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut r = row.clone();
            r.push(norm);
            lp_rows.push(r);
        }
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        let mut bounds = vec![(-cap, cap); d];
        bounds.push((0.0, cap));
        let (z, t) = match lp::maximize(&obj, &lp_rows, &rhs, Some(&bounds)) {
            LpOutcome::Optimal { x, value } => (x.rows(0, d).into_owned(), value),
            _ => (DVector::zeros(d), 0.0),
        };
        let center = &hull.point + &hull.basis * &z;
        Some((hull, center, t))
    }

    /// Constraints expressed in the hull coordinates `z`, implicit ones dropped.
    fn reduced_rows(&self, hull: &AffineHull) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for h in &self.halfspaces {
            let g = hull.basis.transpose() * &h.a;
            if g.norm() <= 1e-10 * h.a.norm() {
                continue;
            }
            rows.push(g.iter().copied().collect());
            rhs.push(h.beta - h.a.dot(&hull.point));
        }
        (rows, rhs)
    }

    /// Sample points of the set: the relative center plus `count` random
    /// points on random chords from it, all within `cap` of the center.
    pub fn sample_points<R: Rng>(&self, count: usize, cap: f64, rng: &mut R) -> Vec<DVector<f64>> {
        let Some((hull, center, _)) = self.relative_center(cap) else {
            return Vec::new();
        };
        let mut out = vec![center.clone()];
        let d = hull.dim();
        if d == 0 {
            return out;
        }
        let z0 = hull.basis.transpose() * (&center - &hull.point);
        let (rows, rhs) = self.reduced_rows(&hull);
        for _ in 0..count {
            let w: DVector<f64> = loop {
                let w = DVector::<f64>::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
                let n = w.norm();
                if n > 1e-3 && n <= 1.0 {
                    break w / n;
                }
            };
            let mut tmax = cap;
            for (row, &beta) in rows.iter().zip(&rhs) {
                let g: f64 = row.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                if g > 1e-14 {
                    let s: f64 = beta - row.iter().zip(z0.iter()).map(|(a, b)| a * b).sum::<f64>();
                    tmax = tmax.min(s.max(0.0) / g);
                }
            }
            let t = rng.gen_range(0.0..=1.0) * tmax;
            let z = &z0 + w * t;
            out.push(&hull.point + &hull.basis * z);
        }
        out
    }

    /// A point of `self ∩ int other`, if any.
    pub fn interior_overlap(&self, other: &PolyhedralSet) -> Result<Option<DVector<f64>>> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let n = self.dim;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for h in &self.halfspaces {
            let mut r: Vec<f64> = h.a.iter().copied().collect();
            r.push(0.0);
            rows.push(r);
            rhs.push(h.beta);
        }
        for h in &other.halfspaces {
            let mut r: Vec<f64> = h.a.iter().copied().collect();
            r.push(h.a.norm());
            rows.push(r);
            rhs.push(h.beta);
        }
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
        bounds.push((f64::NEG_INFINITY, 1.0));
        match lp::maximize(&obj, &rows, &rhs, Some(&bounds)) {
            LpOutcome::Optimal { x, value } if value > tol::LP_ZERO => {
                Ok(Some(x.rows(0, n).into_owned()))
            }
            _ => Ok(None),
        }
    }

    /// A point where every constraint is tight, if one exists.
    pub fn apex(&self) -> Option<DVector<f64>> {
        if self.halfspaces.is_empty() || self.is_cone() {
            return Some(DVector::zeros(self.dim));
        }
        let m = self.halfspaces.len();
        let n = self.dim;
        let a = DMatrix::from_fn(m, n, |i, j| self.halfspaces[i].a[j]);
        let beta = DVector::from_fn(m, |i, _| self.halfspaces[i].beta);
        let p = linalg::least_squares(&a, &beta);
        let scale = 1.0 + beta.amax() + a.amax() * p.amax();
        let resid = (&a * &p - &beta).amax();
        (resid <= 1e-9 * scale).then_some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn zero_normal_rejected() {
        assert_eq!(HalfSpace::from_slice(&[0.0, 0.0], 1.0), Err(Error::ZeroNormal));
    }

    #[test]
    fn emptiness() {
        let s = PolyhedralSet::from_rows(1, &[(&[1.0], -1.0), (&[-1.0], -1.0)]).unwrap();
        assert!(s.is_empty());
        let t = PolyhedralSet::from_rows(1, &[(&[-1.0], 0.0)]).unwrap();
        assert!(!t.is_empty());
        assert!(!PolyhedralSet::whole_space(3).unwrap().is_empty());
    }

    #[test]
    fn boundedness() {
        let boxed = PolyhedralSet::from_rows(
            2,
            &[(&[1.0, 0.0], 1.0), (&[-1.0, 0.0], 1.0), (&[0.0, 1.0], 1.0), (&[0.0, -1.0], 1.0)],
        )
        .unwrap();
        assert!(boxed.is_bounded().unwrap());
        let half = PolyhedralSet::from_rows(2, &[(&[0.0, 1.0], 0.0)]).unwrap();
        assert!(!half.is_bounded().unwrap());
        let empty = PolyhedralSet::from_rows(1, &[(&[1.0], -1.0), (&[-1.0], -1.0)]).unwrap();
        assert_eq!(empty.is_bounded(), Err(Error::EmptySet));
    }

    #[test]
    fn implicit_equalities_of_a_line() {
        let line = PolyhedralSet::from_rows(2, &[(&[0.0, 1.0], 0.0), (&[0.0, -1.0], 0.0)]).unwrap();
        assert_eq!(line.implicit_equalities(), vec![0, 1]);
        let hull = line.affine_hull().unwrap();
        assert_eq!(hull.dim(), 1);
        assert!(hull.basis[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn chebyshev_center_of_box() {
        let boxed = PolyhedralSet::from_rows(
            2,
            &[(&[1.0, 0.0], 1.0), (&[-1.0, 0.0], 1.0), (&[0.0, 1.0], 3.0), (&[0.0, -1.0], 3.0)],
        )
        .unwrap();
        let (_, _, r) = boxed.relative_center(10.0).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn samples_are_members() {
        let s = PolyhedralSet::from_rows(2, &[(&[-1.0, 0.0], 0.0), (&[1.0, -1.0], 0.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = s.sample_points(20, 10.0, &mut rng);
        assert_eq!(pts.len(), 21);
        for p in &pts {
            assert!(s.contains(p).unwrap());
        }
    }

    #[test]
    fn overlap_detection() {
        let left = PolyhedralSet::from_rows(1, &[(&[1.0], 0.0)]).unwrap();
        let right = PolyhedralSet::from_rows(1, &[(&[-1.0], 0.0)]).unwrap();
        assert!(left.interior_overlap(&right).unwrap().is_none());
        let all = PolyhedralSet::whole_space(1).unwrap();
        assert!(all.interior_overlap(&all).unwrap().is_some());
    }

    #[test]
    fn apex_of_translated_cone() {
        let s = PolyhedralSet::from_rows(2, &[(&[0.0, -1.0], 0.0), (&[1.0, 0.0], -2.0)]).unwrap();
        let p = s.apex().unwrap();
        assert!((p - v(&[-2.0, 0.0])).norm() < 1e-12);
        let strip = PolyhedralSet::from_rows(2, &[(&[0.0, 1.0], 1.0), (&[0.0, -1.0], 1.0)]).unwrap();
        assert!(strip.apex().is_none());
    }

    #[test]
    fn translation_moves_membership() {
        let s = PolyhedralSet::from_rows(1, &[(&[1.0], 0.0)]).unwrap();
        let t = s.translate(&v(&[2.0])).unwrap();
        assert!(t.contains(&v(&[1.5])).unwrap());
        assert!(!s.contains(&v(&[1.5])).unwrap());
    }
}
