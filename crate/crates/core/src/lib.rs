//! Thresholds of prox-boundedness for piecewise linear-quadratic functions.
//!
//! The threshold `r̄` is the smallest prox-parameter for which the Moreau
//! envelope `e_r f(x̄) = inf_y f(y) + r/2‖y − x̄‖²` is finite somewhere.
//! [`threshold_plq`] computes it exactly from piece data and describes the set
//! of points where `e_r̄ f` is finite; [`oracle`] evaluates envelopes by brute
//! force as an independent check.

pub mod aggregate;
pub mod cli;
pub mod conic;
pub mod domain;
pub mod error;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod plq;
pub mod polyhedron;
pub mod quadratic;
pub mod recession;
pub mod spectral;
pub mod tol;

pub use aggregate::{classify_point_plq, threshold_plq, ThresholdReport};
pub use conic::{classify_point_conic, threshold_conic, ConicAnalysis, DirectionSet};
pub use domain::{DomainClass, EnvelopeDomain, Membership, Warning};
pub use error::{Error, Result};
pub use oracle::{envelope_numeric, threshold_bracket, OracleConfig, OracleVerdict, VerdictKind};
pub use plq::{Piece, PlqFunction};
pub use polyhedron::{HalfSpace, PolyhedralSet};
pub use quadratic::QuadraticFunction;
pub use recession::{classify_point_polyhedral, threshold_polyhedral};
pub use spectral::{envelope_domain_full, envelope_value_full, threshold_full_domain};
