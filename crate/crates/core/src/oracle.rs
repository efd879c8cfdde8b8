//! Brute-force Moreau envelope evaluation over growing boxes, and threshold
//! bracketing by bisection on the prox-parameter.
//!
//! Nothing here uses eigenvalues or cones; it only evaluates the pieces.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plq::{Piece, PlqFunction};

/// Box schedule and grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub base_radius: f64,
    pub growth: f64,
    pub rounds: usize,
    /// Points per axis; `None` picks 64 up to dimension 2, 16 in dimension 3, fewer beyond.
    pub grid_density: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            base_radius: 4.0,
            growth: 2.0,
            rounds: 12,
            grid_density: None,
        }
    }
}

impl OracleConfig {
    /// Settings used while bracketing: many more rounds, coarser grid.
    pub fn bracketing() -> Self {
        Self {
            base_radius: 4.0,
            growth: 2.0,
            rounds: 30,
            grid_density: Some(16),
        }
    }

    fn density(&self, dim: usize) -> usize {
        let d = self.grid_density.unwrap_or(match dim {
            0..=2 => 64,
            3 => 16,
            _ => 8,
        });
        let cap = (200_000f64).powf(1.0 / dim as f64).floor() as usize;
        d.min(cap).max(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VerdictKind {
    Finite { value: f64, argmin: DVector<f64> },
    DivergentNegInf { ray: DVector<f64> },
    Inconclusive,
}

/// Outcome of a numerical envelope evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub kind: VerdictKind,
    pub radius_used: f64,
    /// Best value found at each radius.
    pub history: Vec<f64>,
}

impl OracleVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self.kind, VerdictKind::Finite { .. })
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.kind, VerdictKind::DivergentNegInf { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self.kind {
            VerdictKind::Finite { value, .. } => Some(value),
            VerdictKind::DivergentNegInf { .. } => Some(f64::NEG_INFINITY),
            VerdictKind::Inconclusive => None,
        }
    }
}

type Best = Option<(f64, Vec<f64>)>;

/// One piece restricted to a box around `x̄`, with everything flattened for speed.
struct BoxProblem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    r: f64,
    xbar: Vec<f64>,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl BoxProblem {
    fn new(piece: &Piece, r: f64, xbar: &DVector<f64>, radius: f64) -> Self {
        let n = xbar.len();
        let q = &piece.quadratic;
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for h in piece.region.halfspaces() {
            normals.push(h.normal().iter().copied().collect());
            offsets.push(h.offset());
        }
        for k in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[k] = s;
                normals.push(e);
                offsets.push(s * xbar[k] + radius);
            }
        }
        Self {
            n,
            a: (0..n * n).map(|idx| q.a()[(idx / n, idx % n)]).collect(),
            b: q.b().iter().copied().collect(),
            c: q.c(),
            r,
            xbar: xbar.iter().copied().collect(),
            normals,
            offsets,
        }
    }

    /// `f(y) + r/2‖y − x̄‖²`.
    fn objective(&self, y: &[f64]) -> f64 {
        let n = self.n;
        let mut quad = 0.0;
        let mut dist = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.a[i * n + j] * y[j]).sum();
            quad += y[i] * row;
            let d = y[i] - self.xbar[i];
            dist += d * d;
        }
        let lin: f64 = self.b.iter().zip(y).map(|(b, y)| b * y).sum();
        0.5 * quad + lin + self.c + 0.5 * self.r * dist
    }

    fn feasible(&self, y: &[f64]) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(a, &b)| {
            let ay: f64 = a.iter().zip(y).map(|(a, y)| a * y).sum();
            ay <= b + 1e-9 * (1.0 + b.abs())
        })
    }

    fn consider(&self, y: &[f64], best: &mut Best) {
        if !y.iter().all(|v| v.is_finite()) || !self.feasible(y) {
            return;
        }
        let v = self.objective(y);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            *best = Some((v, y.to_vec()));
        }
    }

    fn grid(&self, radius: f64, density: usize, best: &mut Best) {
        let n = self.n;
        let step = 2.0 * radius / (density - 1) as f64;
        let mut idx = vec![0usize; n];
        let mut y = vec![0.0; n];
        loop {
            for k in 0..n {
                y[k] = self.xbar[k] - radius + step * idx[k] as f64;
            }
            self.consider(&y, best);
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < density {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        // Pattern search from the best grid point; the step grows after a
        // success so long valleys are crossed quickly.
        if let Some((mut v, mut y)) = best.clone() {
            let mut h = step;
            let mut budget = 400;
            let mut t = y.clone();
            while h > 1e-12 * (1.0 + radius) && budget > 0 {
                budget -= 1;
                let mut improved = false;
                for k in 0..n {
                    for s in [1.0, -1.0] {
                        t.copy_from_slice(&y);
                        t[k] += s * h;
                        if self.feasible(&t) {
                            let tv = self.objective(&t);
                            if tv < v {
                                v = tv;
                                y.copy_from_slice(&t);
                                improved = true;
                            }
                        }
                    }
                }
                if improved {
                    h = (2.0 * h).min(step);
                } else {
                    h *= 0.5;
                }
            }
            self.consider(&y, best);
        }
    }

    /// Stationary points of the objective on every face cut out by up to `n` constraints.
    fn faces(&self, best: &mut Best) {
        let n = self.n;
        let m = self.normals.len();
        let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
        while let Some(active) = stack.pop() {
            let k = active.len();
            let size = n + k;
            let mut kkt = DMatrix::zeros(size, size);
            let mut rhs = DVector::zeros(size);
            for i in 0..n {
                for j in 0..n {
                    kkt[(i, j)] = self.a[i * n + j];
                }
                kkt[(i, i)] += self.r;
                rhs[i] = self.r * self.xbar[i] - self.b[i];
            }
            for (row, &c) in active.iter().enumerate() {
                for j in 0..n {
                    kkt[(n + row, j)] = self.normals[c][j];
                    kkt[(j, n + row)] = self.normals[c][j];
                }
                rhs[n + row] = self.offsets[c];
            }
            if let Some(sol) = kkt.lu().solve(&rhs) {
                self.consider(&sol.as_slice()[..n], best);
            }
            if k < n {
                let start = active.last().map_or(0, |&l| l + 1);
                for c in start..m {
                    let mut next = active.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
    }
}

fn piece_box_min(
    piece: &Piece,
    r: f64,
    xbar: &DVector<f64>,
    radius: f64,
    density: usize,
) -> Option<(f64, DVector<f64>)> {
    let problem = BoxProblem::new(piece, r, xbar, radius);
    let mut best = None;
    problem.grid(radius, density, &mut best);
    problem.faces(&mut best);
    best.map(|(v, y)| (v, DVector::from_vec(y)))
}

fn check(f_dim: usize, r: f64, xbar: &DVector<f64>) -> Result<()> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::NegativeProxParameter(r));
    }
    if xbar.len() != f_dim {
        return Err(Error::DimensionMismatch {
            expected: f_dim,
            found: xbar.len(),
        });
    }
    Ok(())
}

fn run(
    pieces: &[&Piece],
    r: f64,
    xbar: &DVector<f64>,
    cfg: &OracleConfig,
) -> OracleVerdict {
    let n = xbar.len();
    let density = cfg.density(n);
    let mut history = Vec::with_capacity(cfg.rounds);
    let mut argmins = Vec::with_capacity(cfg.rounds);
    let mut radius = cfg.base_radius;
    let mut radius_used = radius;
    for _ in 0..cfg.rounds {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for p in pieces {
            if let Some((v, y)) = piece_box_min(p, r, xbar, radius, density) {
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, y));
                }
            }
        }
        match best {
            Some((v, y)) => {
                history.push(v);
                argmins.push(Some(y));
            }
            None => {
                history.push(f64::INFINITY);
                argmins.push(None);
            }
        }
        radius_used = radius;
        radius *= cfg.growth;
    }
    let kind = decide(&history, &argmins, xbar, cfg.growth);
    OracleVerdict {
        kind,
        radius_used,
        history,
    }
}

fn decide(history: &[f64], argmins: &[Option<DVector<f64>>], xbar: &DVector<f64>, growth: f64) -> VerdictKind {
    let k = history.len();
    if k >= 2 {
        let (prev, last) = (history[k - 2], history[k - 1]);
        if prev.is_finite() && last.is_finite() && (last - prev).abs() <= 1e-6 * last.abs().max(1.0) {
            if let Some(y) = &argmins[k - 1] {
                return VerdictKind::Finite {
                    value: last,
                    argmin: y.clone(),
                };
            }
        }
    }
    if k >= 4 && history[k - 4..].iter().all(|v| v.is_finite()) {
        let d: Vec<f64> = (k - 3..k).map(|j| history[j - 1] - history[j]).collect();
        let growing = d.iter().all(|&x| x > 0.0) && d[1] >= 0.95 * growth * d[0] && d[2] >= 0.95 * growth * d[1];
        if growing && d[2] > 10.0 {
            if let Some(y) = &argmins[k - 1] {
                let ray = y - xbar;
                let norm = ray.norm();
                let ray = if norm > 0.0 { ray / norm } else { ray };
                return VerdictKind::DivergentNegInf { ray };
            }
        }
    }
    VerdictKind::Inconclusive
}

/// Numerical `e_r f(x̄)` for a PLQ function.
pub fn envelope_numeric(f: &PlqFunction, r: f64, xbar: &DVector<f64>, cfg: &OracleConfig) -> Result<OracleVerdict> {
    check(f.dim(), r, xbar)?;
    let pieces: Vec<&Piece> = f.pieces().iter().collect();
    Ok(run(&pieces, r, xbar, cfg))
}

/// Numerical `inf_{y ∈ Sᵢ} fᵢ(y) + r/2‖y − x̄‖²` for one piece.
pub fn envelope_numeric_piece(piece: &Piece, r: f64, xbar: &DVector<f64>, cfg: &OracleConfig) -> Result<OracleVerdict> {
    check(piece.region.dim(), r, xbar)?;
    Ok(run(&[piece], r, xbar, cfg))
}

/// Result of bracketing the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    /// `+∞` when no finite probe was found.
    pub hi: f64,
    /// `hi − lo <= tol` was reached.
    pub converged: bool,
    /// Bisection stopped on probes that stayed inconclusive.
    pub inconclusive: bool,
    pub probes: usize,
}

impl Bracket {
    /// True when `r` lies in `[lo − slack, hi + slack]`.
    pub fn contains(&self, r: f64, slack: f64) -> bool {
        r >= self.lo - slack && r <= self.hi + slack
    }
}

pub fn threshold_bracket(f: &PlqFunction, xbar: &DVector<f64>, tol: f64) -> Result<Bracket> {
    threshold_bracket_with(f, xbar, tol, &OracleConfig::bracketing())
}

/// Bisection on `r` between divergent and finite probes at `x̄`.
pub fn threshold_bracket_with(
    f: &PlqFunction,
    xbar: &DVector<f64>,
    tol: f64,
    cfg: &OracleConfig,
) -> Result<Bracket> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    check(f.dim(), 0.0, xbar)?;
    let mut probes = 0usize;
    let mut probe = |r: f64| -> Result<VerdictKind> {
        probes += 1;
        Ok(envelope_numeric(f, r, xbar, cfg)?.kind)
    };
    if matches!(probe(0.0)?, VerdictKind::Finite { .. }) {
        return Ok(Bracket {
            lo: 0.0,
            hi: 0.0,
            converged: true,
            inconclusive: false,
            probes,
        });
    }
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    for k in 0..=10 {
        let r = 2f64.powi(k);
        match probe(r)? {
            VerdictKind::Finite { .. } => {
                hi = r;
                break;
            }
            VerdictKind::DivergentNegInf { .. } => lo = r,
            VerdictKind::Inconclusive => {}
        }
    }
    if hi.is_infinite() {
        return Ok(Bracket {
            lo,
            hi,
            converged: false,
            inconclusive: false,
            probes,
        });
    }
    let mut inconclusive = false;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        let mut decided = false;
        for r in [mid, mid - width / 8.0, mid + width / 8.0] {
            match probe(r)? {
                VerdictKind::Finite { .. } => {
                    hi = r;
                    decided = true;
                }
                VerdictKind::DivergentNegInf { .. } => {
                    lo = r;
                    decided = true;
                }
                VerdictKind::Inconclusive => {}
            }
            if decided {
                break;
            }
        }
        if !decided {
            inconclusive = true;
            break;
        }
    }
    Ok(Bracket {
        lo,
        hi,
        converged: hi - lo <= tol,
        inconclusive,
        probes,
    })
}
