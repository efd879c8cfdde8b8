//! Classification results for envelope domains.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::aggregate::PointwiseClassifier;
use crate::error::{Error, Result};

/// Tri-state answer to "is x̄ in the envelope domain?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Membership {
    Member,
    NonMember,
    /// The sign data sits in the boundary band where the theory gives no answer.
    Indeterminate,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Membership::Member => "Member",
            Membership::NonMember => "NonMember",
            Membership::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// `{x : qᵢᵀx = rhsᵢ}`; no equations means the full space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspace {
    pub basepoint: DVector<f64>,
    pub normals: Vec<(DVector<f64>, f64)>,
}

impl AffineSubspace {
    pub fn dim(&self) -> usize {
        self.basepoint.len()
    }

    pub fn contains(&self, x: &DVector<f64>) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .normals
            .iter()
            .all(|(q, rhs)| (q.dot(x) - rhs).abs() <= 1e-9 * (1.0 + rhs.abs())))
    }
}

/// Shape of `dom e_r̄ f`.
#[derive(Debug, Clone)]
pub enum EnvelopeDomain {
    FullSpace,
    Empty,
    Affine(AffineSubspace),
    Pointwise(PointwiseClassifier),
}

impl EnvelopeDomain {
    pub fn classify(&self, x: &DVector<f64>) -> Result<Membership> {
        match self {
            EnvelopeDomain::FullSpace => Ok(Membership::Member),
            EnvelopeDomain::Empty => Ok(Membership::NonMember),
            EnvelopeDomain::Affine(s) => Ok(if s.contains(x)? {
                Membership::Member
            } else {
                Membership::NonMember
            }),
            EnvelopeDomain::Pointwise(c) => c.classify(x),
        }
    }

    pub fn class(&self) -> DomainClass {
        match self {
            EnvelopeDomain::FullSpace => DomainClass::Full,
            EnvelopeDomain::Empty => DomainClass::Empty,
            EnvelopeDomain::Affine(_) => DomainClass::Affine,
            EnvelopeDomain::Pointwise(_) => DomainClass::Pointwise,
        }
    }
}

/// Payload-free label of an [`EnvelopeDomain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainClass {
    Full,
    Empty,
    Affine,
    Pointwise,
}

impl fmt::Display for DomainClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainClass::Full => "full",
            DomainClass::Empty => "empty",
            DomainClass::Affine => "affine",
            DomainClass::Pointwise => "pointwise",
        };
        f.write_str(s)
    }
}

/// Numerical situations surfaced to the caller instead of being silently resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// Smallest eigenvalue in `(-tol, 0)` was treated as zero.
    NearZeroEigenvalue(f64),
    /// Minimum of the form over the cone was snapped to zero.
    NearZeroMinimum(f64),
    /// Face enumeration and the angular grid disagree on the minimum.
    GridDisagreement { faces: f64, grid: f64 },
    /// Face enumeration was skipped for budget reasons; sampling was used.
    FaceEnumerationSkipped,
    /// The grid suggests a continuum of minimizers that the eigen-structure did not show.
    GridContinuum,
    /// Positive threshold together with a full-space envelope domain.
    PositiveThresholdFullDomain,
}
