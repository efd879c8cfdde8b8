//! Quadratics on general unbounded polyhedra, reduced to the cone of recession directions.

use nalgebra::DVector;

use crate::conic::{classify_point_conic, threshold_conic, ConicAnalysis, DirectionSet};
use crate::domain::Membership;
use crate::error::{Error, Result};
use crate::lp::LpOutcome;
use crate::polyhedron::PolyhedralSet;
use crate::quadratic::QuadraticFunction;
use crate::tol;

/// `{d : aᵢᵀd <= 0}` for a nonempty set.
pub fn recession_cone(s: &PolyhedralSet) -> Result<PolyhedralSet> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(s.direction_cone())
}

/// A set, its recession cone and a point of the set to hang the cone on.
#[derive(Debug, Clone, PartialEq)]
pub struct RecessionReduction {
    pub original: PolyhedralSet,
    pub cone: PolyhedralSet,
    pub anchor: DVector<f64>,
}

impl RecessionReduction {
    /// Anchors at the apex when the set is a translated cone, else at a feasible point.
    pub fn new(s: &PolyhedralSet) -> Result<Self> {
        let cone = recession_cone(s)?;
        let anchor = match s.apex() {
            Some(p) => p,
            None => s.feasible_point().ok_or(Error::EmptySet)?,
        };
        Ok(Self {
            original: s.clone(),
            cone,
            anchor,
        })
    }
}

/// Threshold analysis of one quadratic on one polyhedral set.
#[derive(Debug, Clone)]
pub struct PolyhedralAnalysis {
    pub r_bar: f64,
    pub bounded: bool,
    pub reduction: RecessionReduction,
    /// Set when the region equals `apex + cone`; classification is then exact.
    pub apex: Option<DVector<f64>>,
    /// Cone analysis; on a translated cone it refers to `d ↦ f(apex + d)`.
    pub conic: Option<ConicAnalysis>,
}

impl PolyhedralAnalysis {
    pub fn g(&self) -> Option<f64> {
        self.conic.as_ref().map(|c| c.g)
    }

    /// Minimizing directions, if the region is unbounded.
    pub fn directions(&self) -> Option<&DirectionSet> {
        self.conic.as_ref().map(|c| &c.phi)
    }

    /// A point of the envelope domain when `G < 0`: `b/r̄`, shifted back when anchored at an apex.
    pub fn witness(&self) -> Option<DVector<f64>> {
        let c = self.conic.as_ref()?;
        if c.g >= 0.0 || self.apex.is_none() {
            return None;
        }
        let p = self.apex.as_ref()?;
        Some(p + &c.linear / c.r_bar)
    }
}

/// `r̄` of `f` restricted to `s`; depends only on directions of recession.
pub fn threshold_polyhedral(f: &QuadraticFunction, s: &PolyhedralSet) -> Result<PolyhedralAnalysis> {
    if f.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: f.dim(),
        });
    }
    let reduction = RecessionReduction::new(s)?;
    if reduction.cone.cone_is_trivial() {
        return Ok(PolyhedralAnalysis {
            r_bar: 0.0,
            bounded: true,
            reduction,
            apex: None,
            conic: None,
        });
    }
    let apex = s.apex();
    let conic = match &apex {
        Some(p) => threshold_conic(&f.shifted(p)?, &reduction.cone)?,
        None => threshold_conic(f, &reduction.cone)?,
    };
    Ok(PolyhedralAnalysis {
        r_bar: conic.r_bar,
        bounded: false,
        reduction,
        apex,
        conic: Some(conic),
    })
}

/// Membership of `x̄` in `dom e_r̄ f` for `f` restricted to `s`.
///
/// On a translated cone the cone rules apply exactly after shifting to the apex.
/// Otherwise a negative coefficient only counts when some ray of `s` carries it:
/// along `x̂ + t u` the envelope objective is linear in `t` with slope
/// `(b − r̄x̄)ᵀu + x̂ᵀ(A + r̄I)u`, so NonMember needs that slope negative for some `x̂ ∈ s`.
pub fn classify_point_polyhedral(
    f: &QuadraticFunction,
    s: &PolyhedralSet,
    analysis: &PolyhedralAnalysis,
    xbar: &DVector<f64>,
) -> Result<Membership> {
    let n = s.dim();
    for found in [f.dim(), xbar.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    if analysis.bounded {
        return Ok(Membership::Member);
    }
    let conic = analysis.conic.as_ref().ok_or(Error::EmptySet)?;
    if conic.g > 0.0 {
        return Ok(Membership::Member);
    }
    if let Some(p) = &analysis.apex {
        return classify_point_conic(conic, &f.shifted(p)?, &(xbar - p));
    }
    let r = conic.r_bar;
    let w = f.b() - xbar * r;
    let mut all_positive = true;
    for u in conic.phi.directions() {
        let h = w.dot(u);
        if h < -tol::SIGN && ray_slope(f, s, r, h, u) < -tol::SIGN {
            return Ok(Membership::NonMember);
        }
        if h <= tol::SIGN {
            all_positive = false;
        }
    }
    let interior = !conic.interior_flags.is_empty() && conic.interior_flags.iter().all(|&b| b);
    if interior && conic.phi.is_isolated() && all_positive {
        return Ok(Membership::Member);
    }
    Ok(Membership::Indeterminate)
}

/// `h + min_{x̂ ∈ s} x̂ᵀ(A + rI)u`.
fn ray_slope(f: &QuadraticFunction, s: &PolyhedralSet, r: f64, h: f64, u: &DVector<f64>) -> f64 {
    let c = f.a() * u + u * r;
    match s.minimize(&c) {
        LpOutcome::Optimal { value, .. } => h + value,
        LpOutcome::Unbounded => f64::NEG_INFINITY,
        LpOutcome::Infeasible => f64::INFINITY,
    }
}
