//! Piecewise linear-quadratic functions: evaluation and validation.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyhedron::PolyhedralSet;
use crate::quadratic::QuadraticFunction;
use crate::tol;

/// Seed used by [`PlqFunction::validate`] when none is given.
pub const DEFAULT_SEED: u64 = 0x504c_5121;

/// One quadratic together with the region where it applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub quadratic: QuadraticFunction,
    pub region: PolyhedralSet,
}

impl Piece {
    pub fn new(quadratic: QuadraticFunction, region: PolyhedralSet) -> Result<Self> {
        if quadratic.dim() != region.dim() {
            return Err(Error::DimensionMismatch {
                expected: region.dim(),
                found: quadratic.dim(),
            });
        }
        Ok(Self { quadratic, region })
    }
}

/// `f(x) = fᵢ(x)` for `x ∈ Sᵢ`, `+∞` outside every region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlqFunction {
    dim: usize,
    pieces: Vec<Piece>,
}

impl PlqFunction {
    pub fn new(dim: usize, pieces: Vec<Piece>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if pieces.is_empty() {
            return Err(Error::NoPieces);
        }
        for p in &pieces {
            if p.region.dim() != dim || p.quadratic.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.region.dim().max(p.quadratic.dim()),
                });
            }
        }
        Ok(Self { dim, pieces })
    }

    /// A single quadratic on all of `ℝⁿ`.
    pub fn full_domain(q: QuadraticFunction) -> Result<Self> {
        let n = q.dim();
        Self::new(n, vec![Piece::new(q, PolyhedralSet::whole_space(n)?)?])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value of the first piece whose region contains `x`, or `+∞`.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        for p in &self.pieces {
            if p.region.contains(x)? {
                return Ok(p.quadratic.eval_unchecked(x));
            }
        }
        Ok(f64::INFINITY)
    }

    /// The function with piece `index` removed (0-based).
    pub fn without_piece(&self, index: usize) -> Result<Self> {
        if index >= self.pieces.len() {
            return Err(Error::IndexOutOfRange {
                index,
                max: self.pieces.len() - 1,
            });
        }
        let mut pieces = self.pieces.clone();
        pieces.remove(index);
        Self::new(self.dim, pieces)
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with_seed(DEFAULT_SEED)
    }

    /// Checks interior-disjointness and continuity on shared boundaries.
    pub fn validate_with_seed(&self, seed: u64) -> ValidationReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = Vec::new();
        let m = self.pieces.len();
        for i in 0..m {
            for j in (i + 1)..m {
                let (pi, pj) = (&self.pieces[i], &self.pieces[j]);
                let overlap = pi
                    .region
                    .interior_overlap(&pj.region)
                    .ok()
                    .flatten()
                    .or_else(|| pj.region.interior_overlap(&pi.region).ok().flatten());
                if let Some(w) = overlap {
                    violations.push(Violation::InteriorOverlap {
                        i: i + 1,
                        j: j + 1,
                        witness: w.iter().copied().collect(),
                    });
                    continue;
                }
                let Ok(common) = pi.region.intersect(&pj.region) else {
                    continue;
                };
                let Some(hull) = common.affine_hull() else {
                    continue;
                };
                let d = hull.dim();
                let count = (2 * self.dim).max((d + 1) * (d + 2) / 2) + 2;
                let mut worst: Option<(DVector<f64>, f64)> = None;
                for x in common.sample_points(count, 10.0, &mut rng) {
                    let fi = pi.quadratic.eval_unchecked(&x);
                    let fj = pj.quadratic.eval_unchecked(&x);
                    let gap = (fi - fj).abs();
                    if gap > tol::CONTINUITY_RTOL * (1.0 + fi.abs())
                        && worst.as_ref().is_none_or(|(_, g)| gap > *g)
                    {
                        worst = Some((x, gap));
                    }
                }
                if let Some((x, gap)) = worst {
                    violations.push(Violation::Discontinuity {
                        i: i + 1,
                        j: j + 1,
                        witness: x.iter().copied().collect(),
                        gap,
                    });
                }
            }
        }
        ValidationReport { violations }
    }
}

/// A defect found by validation. Piece numbers start at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Discontinuity {
        i: usize,
        j: usize,
        witness: Vec<f64>,
        gap: f64,
    },
    InteriorOverlap {
        i: usize,
        j: usize,
        witness: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
