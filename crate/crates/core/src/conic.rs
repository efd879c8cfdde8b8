//! Quadratics restricted to polyhedral cones: spherical coordinates, the
//! minimum of the quadratic form over the cone, and point classification.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{Membership, Warning};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, null_space};
use crate::lp::{self, LpOutcome};
use crate::polyhedron::PolyhedralSet;
use crate::quadratic::QuadraticFunction;
use crate::spectral::{analyze_full_domain, jacobi_eigen, FullDomainAnalysis, SpectralOptions};
use crate::tol;

/// Generalized spherical coordinates `(ρ, φ₁, …, φₙ₋₁)`.
///
/// `x₁ = ρ cos φ₁`, `xᵢ = ρ Sinᵢ₋₁φ cos φᵢ`, `xₙ = ρ Sinₙ₋₁φ`, with
/// `φ₁ ∈ [0, 2π)` and the remaining angles in `[0, π]`. In one dimension
/// there are no angles and `rho` carries the sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub rho: f64,
    pub phi: Vec<f64>,
}

impl SphericalPoint {
    pub fn from_cartesian(x: &DVector<f64>) -> Self {
        let n = x.len();
        if n <= 1 {
            return Self {
                rho: x.get(0).copied().unwrap_or(0.0),
                phi: Vec::new(),
            };
        }
        let rho = x.norm();
        let sigma = if x[n - 1] < 0.0 { -1.0 } else { 1.0 };
        let tail = |k: usize| x.rows(k, n - k).norm();
        let mut phi = Vec::with_capacity(n - 1);
        let mut p1 = (sigma * tail(1)).atan2(x[0]);
        if p1 < 0.0 {
            p1 += TAU;
        }
        if p1 >= TAU {
            p1 -= TAU;
        }
        phi.push(p1);
        for k in 1..n - 1 {
            phi.push(tail(k + 1).atan2(sigma * x[k]));
        }
        Self { rho, phi }
    }

    pub fn to_cartesian(&self) -> DVector<f64> {
        if self.phi.is_empty() {
            return DVector::from_element(1, self.rho);
        }
        unit_direction(&self.phi) * self.rho
    }
}

/// `Sin_k φ = ∏_{i≤k} sin φᵢ`, with `Sin₀ = 1`. Valid for `0 ≤ k ≤ n−1`.
pub fn sin_k(phi: &[f64], k: usize) -> Result<f64> {
    if k > phi.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: phi.len(),
        });
    }
    Ok(phi[..k].iter().map(|p| p.sin()).product())
}

/// `cos φᵢ` with the convention `φₙ = 0` (1-based `i`).
fn cos_i(phi: &[f64], i: usize) -> f64 {
    if i > phi.len() {
        1.0
    } else {
        phi[i - 1].cos()
    }
}

/// The unit vector `u(φ)` of the chart.
pub fn unit_direction(phi: &[f64]) -> DVector<f64> {
    let n = phi.len() + 1;
    let mut u = DVector::zeros(n);
    let mut prod = 1.0;
    for i in 0..n {
        let c = if i < phi.len() { phi[i].cos() } else { 1.0 };
        u[i] = prod * c;
        if i < phi.len() {
            prod *= phi[i].sin();
        }
    }
    u
}

fn check_angles(n: usize, phi: &[f64]) -> Result<()> {
    if phi.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1),
            found: phi.len(),
        });
    }
    Ok(())
}

/// `G(φ) = Σᵢ Σⱼ aᵢⱼ Sinᵢ₋₁φ cos φᵢ Sinⱼ₋₁φ cos φⱼ`.
pub fn g_of_phi(a: &DMatrix<f64>, phi: &[f64]) -> Result<f64> {
    let n = a.nrows();
    check_angles(n, phi)?;
    let mut total = 0.0;
    for i in 1..=n {
        let ci = sin_k(phi, i - 1)? * cos_i(phi, i);
        for j in 1..=n {
            let cj = sin_k(phi, j - 1)? * cos_i(phi, j);
            total += a[(i - 1, j - 1)] * ci * cj;
        }
    }
    Ok(total)
}

/// `H_r(ρ̄, φ̄; φ) = Σᵢ (bᵢ − ρ̄ r Sinᵢ₋₁φ̄ cos φ̄ᵢ) Sinᵢ₋₁φ cos φᵢ`, where `(ρ̄, φ̄)` are the
/// spherical coordinates of `x̄`.
pub fn h_r(b: &DVector<f64>, r: f64, xbar: &DVector<f64>, phi: &[f64]) -> Result<f64> {
    let n = b.len();
    if xbar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: xbar.len(),
        });
    }
    check_angles(n, phi)?;
    let bar = SphericalPoint::from_cartesian(xbar);
    let mut total = 0.0;
    for i in 1..=n {
        let xb = bar.rho * sin_k(&bar.phi, i - 1)? * cos_i(&bar.phi, i);
        total += (b[i - 1] - r * xb) * sin_k(phi, i - 1)? * cos_i(phi, i);
    }
    Ok(total)
}

/// `K_r(ρ̄, φ̄) = c + (ρ̄² r / 2) Σᵢ Sin²ᵢ₋₁φ̄ cos² φ̄ᵢ`.
pub fn k_r(c: f64, r: f64, xbar: &DVector<f64>) -> f64 {
    let bar = SphericalPoint::from_cartesian(xbar);
    let n = xbar.len();
    let sum: f64 = (1..=n)
        .map(|i| {
            let s: f64 = bar.phi[..i - 1].iter().map(|p| p.sin()).product();
            let c = cos_i(&bar.phi, i);
            s * s * c * c
        })
        .sum();
    c + bar.rho * bar.rho * r / 2.0 * sum
}

/// Minimizing directions of the form over cone ∩ sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DirectionSet {
    Isolated(Vec<DVector<f64>>),
    /// A continuum of minimizers, represented by samples.
    NonIsolated(Vec<DVector<f64>>),
}

impl DirectionSet {
    pub fn directions(&self) -> &[DVector<f64>] {
        match self {
            DirectionSet::Isolated(v) | DirectionSet::NonIsolated(v) => v,
        }
    }

    pub fn is_isolated(&self) -> bool {
        matches!(self, DirectionSet::Isolated(_))
    }
}

/// Result of minimizing `uᵀAu` over the unit vectors of a cone.
#[derive(Debug, Clone)]
pub struct ConeMinimum {
    pub g: f64,
    pub phi: DirectionSet,
    /// Orthonormal basis of the eigenspace holding a continuum of minimizers.
    pub continuum: Option<DMatrix<f64>>,
    /// Minimum found by the angular grid, when it ran.
    pub grid_g: Option<f64>,
    pub warnings: Vec<Warning>,
}

fn in_cone(cone: &PolyhedralSet, u: &DVector<f64>, slack: f64) -> bool {
    cone.halfspaces()
        .iter()
        .all(|h| h.normal().dot(u) <= slack * h.normal().norm())
}

fn is_interior(cone: &PolyhedralSet, u: &DVector<f64>) -> bool {
    cone.halfspaces()
        .iter()
        .all(|h| h.normal().dot(u) / h.normal().norm() < -tol::INTERIOR)
}

struct Candidate {
    u: DVector<f64>,
    value: f64,
    cluster: Option<usize>,
}

struct Cluster {
    basis: DMatrix<f64>,
    directions: Vec<DVector<f64>>,
    continuum: bool,
}

fn rank_of(dirs: &[DVector<f64>]) -> usize {
    if dirs.is_empty() {
        return 0;
    }
    let n = dirs[0].len();
    let mut gram = DMatrix::zeros(n, n);
    for d in dirs {
        gram += d * d.transpose();
    }
    let (vals, _) = jacobi_eigen(&gram);
    vals.iter().filter(|&&v| v > 1e-8).count()
}

/// Feasible directions of `cone ∩ span(U)` found by maximizing `±e_k` in the coefficients.
fn cone_directions_in_span(cone: &PolyhedralSet, basis: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let k = basis.ncols();
    let rows: Vec<Vec<f64>> = cone
        .halfspaces()
        .iter()
        .map(|h| (basis.transpose() * h.normal()).iter().copied().collect())
        .collect();
    let rhs = vec![0.0; rows.len()];
    let bounds = vec![(-1.0, 1.0); k];
    let mut out: Vec<DVector<f64>> = Vec::new();
    for j in 0..k {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; k];
            c[j] = sign;
            if let LpOutcome::Optimal { x, value } = lp::maximize(&c, &rows, &rhs, Some(&bounds)) {
                if value <= 1e-7 {
                    continue;
                }
                let u = basis * x;
                let norm = u.norm();
                if norm <= 1e-9 {
                    continue;
                }
                let u = u / norm;
                if in_cone(cone, &u, 1e-9) && !out.iter().any(|v| (v - &u).norm() < 1e-7) {
                    out.push(u);
                }
            }
        }
    }
    out
}

fn subsets_up_to(m: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_size.min(m) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l| l + 1);
            for j in start..m {
                let mut t = s.clone();
                t.push(j);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn binomial_budget(m: usize, max_size: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for k in 0..=max_size.min(m) {
        total = total.saturating_add(c);
        c = c.saturating_mul(m - k) / (k + 1);
    }
    total
}

const FACE_BUDGET: usize = 50_000;

/// `G = min{uᵀAu : u ∈ cone, ‖u‖ = 1}` and its minimizers.
pub fn min_form_over_cone(a: &DMatrix<f64>, cone: &PolyhedralSet) -> Result<ConeMinimum> {
    let n = cone.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.nrows(),
        });
    }
    if !cone.is_cone() {
        return Err(Error::NotACone);
    }
    if cone.cone_is_trivial() {
        return Err(Error::TrivialCone);
    }
    let a = (a + a.transpose()) * 0.5;
    let m = cone.halfspaces().len();
    let mut warnings = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut clusters: Vec<Cluster> = Vec::new();

    let max_size = n.saturating_sub(1);
    if n <= 4 || binomial_budget(m, max_size) <= FACE_BUDGET {
        for subset in subsets_up_to(m, max_size) {
            let normals: Vec<DVector<f64>> = subset
                .iter()
                .map(|&i| cone.halfspaces()[i].normal().clone())
                .collect();
            let v = null_space(&normals, n);
            let d = v.ncols();
            if d == 0 {
                continue;
            }
            let b = v.transpose() * &a * &v;
            let b = (&b + b.transpose()) * 0.5;
            let (vals, vecs) = jacobi_eigen(&b);
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
            let mut k = 0;
            while k < d {
                let lam = vals[order[k]];
                let mut end = k + 1;
                while end < d && (vals[order[end]] - lam).abs() <= tol::EIG_CLUSTER * (1.0 + lam.abs()) {
                    end += 1;
                }
                if end - k == 1 {
                    let u = &v * vecs.column(order[k]);
                    let u = &u / u.norm();
                    for s in [1.0, -1.0] {
                        let us = &u * s;
                        if in_cone(cone, &us, 1e-9) {
                            let value = us.dot(&(&a * &us));
                            candidates.push(Candidate { u: us, value, cluster: None });
                        }
                    }
                } else {
                    let w = DMatrix::from_columns(
                        &(k..end).map(|t| vecs.column(order[t]).into_owned()).collect::<Vec<_>>(),
                    );
                    let basis = &v * w;
                    let dirs = cone_directions_in_span(cone, &basis);
                    let continuum = rank_of(&dirs) >= 2;
                    let id = clusters.len();
                    for u in &dirs {
                        let value = u.dot(&(&a * u));
                        candidates.push(Candidate { u: u.clone(), value, cluster: Some(id) });
                    }
                    clusters.push(Cluster { basis, directions: dirs, continuum });
                }
                k = end;
            }
        }
    } else {
        warnings.push(Warning::FaceEnumerationSkipped);
        for (u, value) in sampled_search(&a, cone) {
            candidates.push(Candidate { u, value, cluster: None });
        }
    }

    let mut g = candidates
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);

    let mut grid_g = None;
    let mut grid_best: Option<DVector<f64>> = None;
    let mut grid_run: Option<Vec<DVector<f64>>> = None;
    if n == 2 || n == 3 {
        if let Some(scan) = angular_grid(&a, cone) {
            grid_g = Some(scan.value);
            if n == 2 && g.is_finite() {
                grid_run = grid_continuum_2d(&a, cone, g);
            }
            grid_best = Some(scan.u);
        }
    }
    if let (Some(gg), Some(u)) = (grid_g, grid_best.as_ref()) {
        if !g.is_finite() || gg < g - 1e-6 * (1.0 + g.abs()) {
            warnings.push(Warning::GridDisagreement { faces: g, grid: gg });
            candidates.push(Candidate { u: u.clone(), value: gg, cluster: None });
            g = gg;
        }
    }
    if !g.is_finite() {
        return Err(Error::TrivialCone);
    }

    let tie = tol::EIG_CLUSTER * (1.0 + g.abs()).max(max_abs(&a));
    let mut phi: Vec<DVector<f64>> = Vec::new();
    let mut continuum_basis: Option<DMatrix<f64>> = None;
    for c in &candidates {
        if c.value - g > tie {
            continue;
        }
        if !phi.iter().any(|v| (v - &c.u).norm() < 1e-7) {
            phi.push(c.u.clone());
        }
        if let Some(id) = c.cluster {
            if clusters[id].continuum && continuum_basis.is_none() {
                continuum_basis = Some(clusters[id].basis.clone());
                let dirs = &clusters[id].directions;
                for i in 0..dirs.len() {
                    for j in (i + 1)..dirs.len() {
                        let mid = &dirs[i] + &dirs[j];
                        let norm = mid.norm();
                        if norm > 1e-6 {
                            let mid = mid / norm;
                            if in_cone(cone, &mid, 1e-9) && !phi.iter().any(|v| (v - &mid).norm() < 1e-7) {
                                phi.push(mid);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut set = if continuum_basis.is_some() {
        DirectionSet::NonIsolated(phi)
    } else {
        DirectionSet::Isolated(phi)
    };
    if let (Some(run), true) = (grid_run, set.is_isolated()) {
        warnings.push(Warning::GridContinuum);
        let mut dirs = set.directions().to_vec();
        dirs.extend(run);
        set = DirectionSet::NonIsolated(dirs);
    }
    Ok(ConeMinimum {
        g,
        phi: set,
        continuum: continuum_basis,
        grid_g,
        warnings,
    })
}

struct GridScan {
    value: f64,
    u: DVector<f64>,
}

/// Dense angular grid plus pattern-search refinement (dimensions 2 and 3).
fn angular_grid(a: &DMatrix<f64>, cone: &PolyhedralSet) -> Option<GridScan> {
    let n = a.nrows();
    // Flat copies keep the inner loop free of allocations.
    let flat: Vec<f64> = a.iter().copied().collect();
    let normals: Vec<Vec<f64>> = cone
        .halfspaces()
        .iter()
        .map(|h| {
            let len = h.normal().norm();
            h.normal().iter().map(|v| v / len).collect()
        })
        .collect();
    let form = |phi: &[f64]| {
        let mut u = [0.0f64; 3];
        let mut prod = 1.0;
        for i in 0..n {
            let c = if i < phi.len() { phi[i].cos() } else { 1.0 };
            u[i] = prod * c;
            if i < phi.len() {
                prod *= phi[i].sin();
            }
        }
        let inside = normals
            .iter()
            .all(|h| h.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>() <= 1e-12);
        inside.then(|| {
            let mut v = 0.0;
            for j in 0..n {
                for i in 0..n {
                    v += u[i] * flat[i + j * n] * u[j];
                }
            }
            v
        })
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |phi: Vec<f64>| {
        if let Some(v) = form(&phi) {
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, phi));
            }
        }
    };
    let (steps, n1) = if n == 2 { (vec![TAU / 1440.0], 1440) } else { (vec![TAU / 720.0, PI / 360.0], 720) };
    if n == 2 {
        for i in 0..n1 {
            consider(vec![i as f64 * steps[0]]);
        }
    } else {
        for i in 0..n1 {
            for j in 0..=360 {
                consider(vec![i as f64 * steps[0], j as f64 * steps[1]]);
            }
        }
    }
    let (mut value, mut phi) = best?;
    // Axis and diagonal moves; diagonals let the search slide along a cone face.
    let moves: Vec<Vec<f64>> = if n == 2 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        let mut m = Vec::new();
        for s in [-1.0, 0.0, 1.0] {
            for t in [-1.0, 0.0, 1.0] {
                if s != 0.0 || t != 0.0 {
                    m.push(vec![s, t]);
                }
            }
        }
        m
    };
    let mut step = steps[0];
    while step > 1e-13 {
        let mut improved = false;
        for mv in &moves {
            let trial: Vec<f64> = phi.iter().zip(mv).map(|(p, d)| p + d * step).collect();
            if let Some(v) = form(&trial) {
                if v < value {
                    value = v;
                    phi = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Some(GridScan {
        value,
        u: unit_direction(&phi),
    })
}

/// In the plane: a run of more than five consecutive near-minimal grid angles whose
/// ends are themselves minimal signals a continuum. Returns the run's directions.
fn grid_continuum_2d(a: &DMatrix<f64>, cone: &PolyhedralSet, g: f64) -> Option<Vec<DVector<f64>>> {
    const N: usize = 720;
    let step = TAU / N as f64;
    let near: Vec<bool> = (0..N)
        .map(|i| {
            let u = unit_direction(&[i as f64 * step]);
            in_cone(cone, &u, 1e-12) && u.dot(&(a * &u)) <= g + 1e-4
        })
        .collect();
    if near.iter().all(|&b| b) {
        let ends = [0.0, PI];
        return confirm_run(a, g, &ends.map(|t| unit_direction(&[t])));
    }
    let start = (0..N).find(|&i| !near[i])?;
    let mut i = 0;
    while i < N {
        let idx = (start + i) % N;
        if near[idx] {
            let mut len = 0;
            while len < N && near[(start + i + len) % N] {
                len += 1;
            }
            if len > 5 {
                let first = unit_direction(&[idx as f64 * step]);
                let last = unit_direction(&[((idx + len - 1) % N) as f64 * step]);
                if let Some(run) = confirm_run(a, g, &[first, last]) {
                    return Some(run);
                }
            }
            i += len;
        } else {
            i += 1;
        }
    }
    None
}

fn confirm_run(a: &DMatrix<f64>, g: f64, ends: &[DVector<f64>]) -> Option<Vec<DVector<f64>>> {
    ends.iter()
        .all(|u| u.dot(&(a * u)) - g <= tol::EIG_CLUSTER * (1.0 + g.abs()))
        .then(|| ends.to_vec())
}

/// Deterministic random search used when face enumeration is too large.
fn sampled_search(a: &DMatrix<f64>, cone: &PolyhedralSet) -> Vec<(DVector<f64>, f64)> {
    use rand::{Rng, SeedableRng};
    let n = a.nrows();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best: Option<(DVector<f64>, f64)> = None;
    for _ in 0..20_000 {
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = u.norm();
        if norm < 1e-6 {
            continue;
        }
        let u = u / norm;
        if !in_cone(cone, &u, 0.0) {
            continue;
        }
        let v = u.dot(&(a * &u));
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((u, v));
        }
    }
    let Some((mut u, mut v)) = best else {
        return Vec::new();
    };
    let mut step = 0.1;
    while step > 1e-12 {
        let mut improved = false;
        for k in 0..n {
            for s in [1.0, -1.0] {
                let mut t = u.clone();
                t[k] += s * step;
                let t = &t / t.norm();
                let tv = t.dot(&(a * &t));
                if in_cone(cone, &t, 0.0) && tv < v {
                    u = t;
                    v = tv;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    vec![(u, v)]
}

/// Threshold analysis of a quadratic on a cone.
#[derive(Debug, Clone)]
pub struct ConicAnalysis {
    pub g: f64,
    pub r_bar: f64,
    pub phi: DirectionSet,
    pub interior_flags: Vec<bool>,
    pub cone: PolyhedralSet,
    /// Linear coefficient of the analyzed quadratic.
    pub linear: DVector<f64>,
    pub continuum: Option<DMatrix<f64>>,
    /// Present when the cone is all of `ℝⁿ`.
    pub full_space: Option<FullDomainAnalysis>,
    pub grid_g: Option<f64>,
    pub warnings: Vec<Warning>,
}

/// `r̄ = max{0, −G}` together with `Φ` and interior flags.
pub fn threshold_conic(f: &QuadraticFunction, cone: &PolyhedralSet) -> Result<ConicAnalysis> {
    if f.dim() != cone.dim() {
        return Err(Error::DimensionMismatch {
            expected: cone.dim(),
            found: f.dim(),
        });
    }
    if cone.is_whole_space() {
        return full_space_analysis(f, cone);
    }
    let min = min_form_over_cone(f.a(), cone)?;
    let mut warnings = min.warnings;
    let mut g = min.g;
    if g != 0.0 && g.abs() <= tol::EIG_CLUSTER * (1.0 + max_abs(f.a())) {
        warnings.push(Warning::NearZeroMinimum(g));
        g = 0.0;
    }
    let interior_flags = min.phi.directions().iter().map(|u| is_interior(cone, u)).collect();
    Ok(ConicAnalysis {
        g,
        r_bar: (-g).max(0.0),
        phi: min.phi,
        interior_flags,
        cone: cone.clone(),
        linear: f.b().clone(),
        continuum: min.continuum,
        full_space: None,
        grid_g: min.grid_g,
        warnings,
    })
}

fn full_space_analysis(f: &QuadraticFunction, cone: &PolyhedralSet) -> Result<ConicAnalysis> {
    let opts = SpectralOptions::default();
    let full = analyze_full_domain(f, opts)?;
    let lam_n = full.decomposition.smallest();
    let g = if full.r_bar > 0.0 {
        -full.r_bar
    } else if lam_n.abs() <= opts.eig_cluster_tol {
        0.0
    } else {
        lam_n
    };
    let cluster = full.min_cluster(opts);
    let mut dirs = Vec::new();
    for &i in &cluster {
        let q = full.decomposition.vector(i);
        dirs.push(-&q);
        dirs.push(q);
    }
    let (phi, continuum) = if cluster.len() == 1 {
        (DirectionSet::Isolated(dirs), None)
    } else {
        let k = cluster.len();
        for i in 0..k {
            for j in (i + 1)..k {
                let s = (full.decomposition.vector(cluster[i]) + full.decomposition.vector(cluster[j]))
                    / 2f64.sqrt();
                dirs.push(s);
            }
        }
        let basis = DMatrix::from_columns(
            &cluster.iter().map(|&i| full.decomposition.vector(i)).collect::<Vec<_>>(),
        );
        (DirectionSet::NonIsolated(dirs), Some(basis))
    };
    let n = phi.directions().len();
    Ok(ConicAnalysis {
        g,
        r_bar: full.r_bar,
        interior_flags: vec![true; n],
        phi,
        cone: cone.clone(),
        linear: f.b().clone(),
        continuum,
        warnings: full.warnings.clone(),
        full_space: Some(full),
        grid_g: None,
    })
}

/// Membership of `x̄` in `dom e_r̄ f` for a quadratic on a cone.
pub fn classify_point_conic(
    analysis: &ConicAnalysis,
    f: &QuadraticFunction,
    xbar: &DVector<f64>,
) -> Result<Membership> {
    let n = analysis.cone.dim();
    for found in [f.dim(), xbar.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    if let Some(full) = &analysis.full_space {
        return full.domain.classify(xbar);
    }
    if analysis.g > 0.0 {
        return Ok(Membership::Member);
    }
    let b = f.b();
    let w = b - xbar * analysis.r_bar;
    if analysis.r_bar > 0.0 && w.amax() <= tol::SIGN * (1.0 + b.amax()) {
        return Ok(Membership::Member);
    }
    let hs: Vec<f64> = analysis.phi.directions().iter().map(|u| w.dot(u)).collect();
    if hs.iter().any(|&h| h < -tol::SIGN) {
        return Ok(Membership::NonMember);
    }
    match &analysis.phi {
        DirectionSet::NonIsolated(_) => {
            if let Some(basis) = &analysis.continuum {
                if continuum_witness(&analysis.cone, basis, &w).is_some() {
                    return Ok(Membership::NonMember);
                }
            }
            Ok(Membership::Indeterminate)
        }
        DirectionSet::Isolated(_) => {
            if !hs.is_empty() && hs.iter().all(|&h| h > tol::SIGN) {
                Ok(Membership::Member)
            } else {
                Ok(Membership::Indeterminate)
            }
        }
    }
}

/// A unit direction in `cone ∩ span(basis)` with `wᵀu < −tol`, found by LP.
fn continuum_witness(cone: &PolyhedralSet, basis: &DMatrix<f64>, w: &DVector<f64>) -> Option<DVector<f64>> {
    let k = basis.ncols();
    let rows: Vec<Vec<f64>> = cone
        .halfspaces()
        .iter()
        .map(|h| (basis.transpose() * h.normal()).iter().copied().collect())
        .collect();
    let rhs = vec![0.0; rows.len()];
    let obj: Vec<f64> = (basis.transpose() * w).iter().copied().collect();
    let bounds = vec![(-1.0, 1.0); k];
    let LpOutcome::Optimal { x, .. } = lp::minimize(&obj, &rows, &rhs, Some(&bounds)) else {
        return None;
    };
    let u = basis * x;
    let norm = u.norm();
    if norm < 1e-9 {
        return None;
    }
    let u = u / norm;
    (w.dot(&u) < -tol::SIGN && in_cone(cone, &u, 1e-9)).then_some(u)
}

/// Consequences of `G < 0`: the domain is neither empty nor everything.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainExtent {
    pub dom_nonempty: bool,
    pub dom_proper: bool,
    pub witness: DVector<f64>,
}

/// Witness `b / r̄` for a cone analysis with negative minimum.
pub fn nonempty_nontrivial_check(analysis: &ConicAnalysis) -> Result<DomainExtent> {
    if analysis.g >= 0.0 {
        return Err(Error::NonNegativeMinimum(analysis.g));
    }
    Ok(DomainExtent {
        dom_nonempty: true,
        dom_proper: true,
        witness: &analysis.linear / analysis.r_bar,
    })
}
