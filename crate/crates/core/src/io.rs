//! The PLQ JSON file format.
//!
//! ```json
//! {"dim": 2, "pieces": [{"A": [[0,2],[2,-2]], "b": [1,1], "c": 0,
//!   "region": {"halfspaces": [{"a": [0,1], "beta": 0}]}}]}
//! ```
//!
//! `A` is row-major and must be symmetric; an empty halfspace list is all of `ℝⁿ`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plq::{Piece, PlqFunction};
use crate::polyhedron::{HalfSpace, PolyhedralSet};
use crate::quadratic::QuadraticFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlqDoc {
    pub dim: usize,
    pub pieces: Vec<PieceDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub c: f64,
    pub region: RegionDoc,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDoc {
    #[serde(default)]
    pub halfspaces: Vec<HalfSpaceDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceDoc {
    pub a: Vec<f64>,
    pub beta: f64,
}

impl PlqDoc {
    pub fn into_function(self) -> Result<PlqFunction> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in self.pieces {
            if p.a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.a.len(),
                });
            }
            if let Some(row) = p.a.iter().find(|row| row.len() != n) {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            let a = DMatrix::from_fn(n, n, |i, j| p.a[i][j]);
            let q = QuadraticFunction::new(a, nalgebra::DVector::from_vec(p.b), p.c)?;
            let halfspaces = p
                .region
                .halfspaces
                .into_iter()
                .map(|h| HalfSpace::from_slice(&h.a, h.beta))
                .collect::<Result<Vec<_>>>()?;
            pieces.push(Piece::new(q, PolyhedralSet::new(n, halfspaces)?)?);
        }
        PlqFunction::new(n, pieces)
    }

    pub fn from_function(f: &PlqFunction) -> Self {
        Self {
            dim: f.dim(),
            pieces: f
                .pieces()
                .iter()
                .map(|p| {
                    let a = p.quadratic.a();
                    PieceDoc {
                        a: (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect(),
                        b: p.quadratic.b().iter().copied().collect(),
                        c: p.quadratic.c(),
                        region: RegionDoc {
                            halfspaces: p
                                .region
                                .halfspaces()
                                .iter()
                                .map(|h| HalfSpaceDoc {
                                    a: h.normal().iter().copied().collect(),
                                    beta: h.offset(),
                                })
                                .collect(),
                        },
                    }
                })
                .collect(),
        }
    }
}

/// Parses a PLQ document; syntax errors carry line and column.
pub fn parse_plq(text: &str) -> Result<PlqFunction> {
    let doc: PlqDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_function()
}

pub fn read_plq(path: &Path) -> Result<PlqFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_plq(&text)
}

pub fn to_json_string(f: &PlqFunction) -> String {
    serde_json::to_string_pretty(&PlqDoc::from_function(f)).expect("plain data serializes")
}
