//! Threshold of a whole PLQ function: the largest piece threshold, and the
//! envelope domain as the intersection over pieces attaining it.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainClass, EnvelopeDomain, Membership, Warning};
use crate::error::{Error, Result};
use crate::plq::PlqFunction;
use crate::recession::{classify_point_polyhedral, threshold_polyhedral, PolyhedralAnalysis};
use crate::tol;

/// Summary of one piece. `index` starts at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceSummary {
    pub index: usize,
    pub r_bar: f64,
    pub g: Option<f64>,
    pub domain: DomainClass,
    pub phi: Option<Vec<DVector<f64>>>,
    pub phi_isolated: bool,
    pub warnings: Vec<Warning>,
}

/// Per-piece analyses for the active pieces, answering membership queries.
#[derive(Debug, Clone)]
pub struct PointwiseClassifier {
    function: PlqFunction,
    analyses: Vec<Option<PolyhedralAnalysis>>,
    active: Vec<usize>,
}

impl PointwiseClassifier {
    pub fn classify(&self, xbar: &DVector<f64>) -> Result<Membership> {
        if xbar.len() != self.function.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.function.dim(),
                found: xbar.len(),
            });
        }
        let mut all_member = true;
        for &i in &self.active {
            let verdict = self.classify_piece(i, xbar)?;
            match verdict {
                Membership::NonMember => return Ok(Membership::NonMember),
                Membership::Indeterminate => all_member = false,
                Membership::Member => {}
            }
        }
        Ok(if all_member {
            Membership::Member
        } else {
            Membership::Indeterminate
        })
    }

    /// Classification against piece `i` alone (0-based).
    pub fn classify_piece(&self, i: usize, xbar: &DVector<f64>) -> Result<Membership> {
        let piece = &self.function.pieces()[i];
        match &self.analyses[i] {
            Some(an) => classify_point_polyhedral(&piece.quadratic, &piece.region, an, xbar),
            None => Ok(Membership::Member),
        }
    }
}

/// Threshold of a PLQ function with per-piece detail.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub r_bar: f64,
    pub pieces: Vec<PieceSummary>,
    /// 1-based indices of the pieces attaining `r_bar`.
    pub active_set: Vec<usize>,
    pub overall_domain: EnvelopeDomain,
    pub flags: Vec<Warning>,
    classifier: PointwiseClassifier,
}

impl ThresholdReport {
    pub fn analysis(&self, index: usize) -> Option<&PolyhedralAnalysis> {
        self.classifier.analyses.get(index.checked_sub(1)?)?.as_ref()
    }

    pub fn bounded_below(&self) -> bool {
        self.r_bar == 0.0
            && self
                .active_set
                .iter()
                .all(|&i| self.pieces[i - 1].domain == DomainClass::Full)
    }

    /// Membership of `x̄` restricted to active piece `index` (1-based).
    pub fn classify_piece(&self, index: usize, xbar: &DVector<f64>) -> Result<Membership> {
        if index == 0 || index > self.pieces.len() {
            return Err(Error::IndexOutOfRange {
                index,
                max: self.pieces.len(),
            });
        }
        self.classifier.classify_piece(index - 1, xbar)
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            r_bar: self.r_bar,
            active_set: self.active_set.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceJson {
                    index: p.index,
                    r_bar: p.r_bar,
                    g: p.g,
                    domain: p.domain,
                    phi: p
                        .phi
                        .as_ref()
                        .map(|dirs| dirs.iter().map(|u| u.iter().copied().collect()).collect()),
                })
                .collect(),
        }
    }
}

/// Serialized form of a [`ThresholdReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub r_bar: f64,
    pub active_set: Vec<usize>,
    pub pieces: Vec<PieceJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceJson {
    pub index: usize,
    pub r_bar: f64,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub domain: DomainClass,
    pub phi: Option<Vec<Vec<f64>>>,
}

fn piece_class(an: &PolyhedralAnalysis, f: &PlqFunction, i: usize) -> Result<DomainClass> {
    if an.bounded {
        return Ok(DomainClass::Full);
    }
    let conic = an.conic.as_ref().ok_or(Error::EmptySet)?;
    if let Some(full) = &conic.full_space {
        return Ok(full.domain.class());
    }
    if conic.g > 0.0 {
        return Ok(DomainClass::Full);
    }
    if conic.g < 0.0 {
        return Ok(DomainClass::Pointwise);
    }
    // With r̄ = 0 the sign data does not depend on x̄, so one query decides.
    let piece = &f.pieces()[i];
    let probe = DVector::zeros(f.dim());
    Ok(match classify_point_polyhedral(&piece.quadratic, &piece.region, an, &probe)? {
        Membership::Member => DomainClass::Full,
        Membership::NonMember => DomainClass::Empty,
        Membership::Indeterminate => DomainClass::Pointwise,
    })
}

/// Validates `f`, then computes the threshold report.
pub fn threshold_plq(f: &PlqFunction) -> Result<ThresholdReport> {
    let report = f.validate();
    if !report.is_valid() {
        return Err(Error::InvalidPlq(report.violations.len()));
    }
    threshold_plq_unchecked(f)
}

/// Threshold report without running validation first.
pub fn threshold_plq_unchecked(f: &PlqFunction) -> Result<ThresholdReport> {
    let mut analyses = Vec::with_capacity(f.pieces().len());
    let mut pieces = Vec::with_capacity(f.pieces().len());
    for (i, piece) in f.pieces().iter().enumerate() {
        if piece.region.is_empty() {
            analyses.push(None);
            pieces.push(PieceSummary {
                index: i + 1,
                r_bar: 0.0,
                g: None,
                domain: DomainClass::Full,
                phi: None,
                phi_isolated: true,
                warnings: Vec::new(),
            });
            continue;
        }
        let an = threshold_polyhedral(&piece.quadratic, &piece.region)?;
        let domain = piece_class(&an, f, i)?;
        pieces.push(PieceSummary {
            index: i + 1,
            r_bar: an.r_bar,
            g: an.g(),
            domain,
            phi: an.directions().map(|d| d.directions().to_vec()),
            phi_isolated: an.directions().is_none_or(|d| d.is_isolated()),
            warnings: an.conic.as_ref().map(|c| c.warnings.clone()).unwrap_or_default(),
        });
        analyses.push(Some(an));
    }
    let r_bar = pieces.iter().map(|p| p.r_bar).fold(0.0, f64::max);
    let band = tol::ACTIVE_SET_RTOL * (1.0 + r_bar);
    let active: Vec<usize> = (0..pieces.len())
        .filter(|&i| r_bar - pieces[i].r_bar <= band)
        .collect();
    let classifier = PointwiseClassifier {
        function: f.clone(),
        analyses,
        active: active.clone(),
    };
    let bounded_below = r_bar == 0.0 && active.iter().all(|&i| pieces[i].domain == DomainClass::Full);
    let overall_domain = if bounded_below {
        EnvelopeDomain::FullSpace
    } else if active.iter().any(|&i| pieces[i].domain == DomainClass::Empty) {
        EnvelopeDomain::Empty
    } else if let [only] = active.as_slice() {
        match classifier.analyses[*only]
            .as_ref()
            .and_then(|a| a.conic.as_ref())
            .and_then(|c| c.full_space.as_ref())
        {
            Some(full) if matches!(full.domain, EnvelopeDomain::Affine(_)) => full.domain.clone(),
            _ => EnvelopeDomain::Pointwise(classifier.clone()),
        }
    } else {
        EnvelopeDomain::Pointwise(classifier.clone())
    };
    let mut flags = Vec::new();
    if r_bar > 0.0 && active.iter().all(|&i| pieces[i].domain == DomainClass::Full) {
        flags.push(Warning::PositiveThresholdFullDomain);
    }
    Ok(ThresholdReport {
        r_bar,
        pieces,
        active_set: active.iter().map(|i| i + 1).collect(),
        overall_domain,
        flags,
        classifier,
    })
}

/// Membership of `x̄` in `dom e_r̄ f`: intersection over the active pieces.
pub fn classify_point_plq(report: &ThresholdReport, f: &PlqFunction, xbar: &DVector<f64>) -> Result<Membership> {
    if xbar.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: xbar.len(),
        });
    }
    report.classifier.classify(xbar)
}

/// True iff `f` is bounded below: `r̄ = 0` and every active piece has full domain.
pub fn bounded_below_shortcut(f: &PlqFunction) -> Result<bool> {
    Ok(threshold_plq(f)?.bounded_below())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plq::Piece;
    use crate::polyhedron::PolyhedralSet;
    use crate::quadratic::QuadraticFunction;

    fn line_piece(sign: f64, a: f64, b: f64, c: f64) -> Piece {
        Piece::new(
            QuadraticFunction::from_rows(&[&[a]], &[b], c).unwrap(),
            PolyhedralSet::from_rows(1, &[(&[sign], 0.0)]).unwrap(),
        )
        .unwrap()
    }

    fn x(v: f64) -> DVector<f64> {
        DVector::from_vec(vec![v])
    }

    #[test]
    fn two_sided_negative_square() {
        let f = PlqFunction::new(1, vec![line_piece(1.0, -2.0, 0.0, 0.0), line_piece(-1.0, -2.0, 0.0, 0.0)])
            .unwrap();
        let rep = threshold_plq(&f).unwrap();
        assert!((rep.r_bar - 2.0).abs() < 1e-12);
        assert_eq!(rep.active_set, vec![1, 2]);
        assert_eq!(classify_point_plq(&rep, &f, &x(0.0)).unwrap(), Membership::Member);
        assert_eq!(classify_point_plq(&rep, &f, &x(0.1)).unwrap(), Membership::NonMember);
    }

    #[test]
    fn bounded_below_cases() {
        let sq = PlqFunction::full_domain(QuadraticFunction::from_rows(&[&[2.0]], &[0.0], 0.0).unwrap()).unwrap();
        assert!(bounded_below_shortcut(&sq).unwrap());
        let rep = threshold_plq(&sq).unwrap();
        assert_eq!(rep.active_set, vec![1]);
        assert!(matches!(rep.overall_domain, EnvelopeDomain::FullSpace));
        let lin = PlqFunction::full_domain(QuadraticFunction::from_rows(&[&[0.0]], &[1.0], 0.0).unwrap()).unwrap();
        assert!(!bounded_below_shortcut(&lin).unwrap());
        assert!(matches!(threshold_plq(&lin).unwrap().overall_domain, EnvelopeDomain::Empty));
    }

    #[test]
    fn invalid_function_is_rejected() {
        let f = PlqFunction::new(1, vec![line_piece(1.0, 2.0, 0.0, 0.0), line_piece(-1.0, 2.0, 0.0, 1.0)])
            .unwrap();
        assert_eq!(threshold_plq(&f).unwrap_err(), Error::InvalidPlq(1));
    }

    #[test]
    fn json_round_trip() {
        let f = PlqFunction::new(1, vec![line_piece(1.0, -2.0, 0.0, 0.0), line_piece(-1.0, -2.0, 0.0, 0.0)])
            .unwrap();
        let json = threshold_plq(&f).unwrap().to_json();
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"G\""));
        let back: ReportJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, json);
    }
}
