#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use plq_threshold::conic::{g_of_phi, h_r, k_r, min_form_over_cone, nonempty_nontrivial_check, SphericalPoint};
use plq_threshold::io::{parse_plq, read_plq, to_json_string};
use plq_threshold::oracle::envelope_numeric_piece;
use plq_threshold::polyhedron::PolyhedralSet;
use plq_threshold::recession::recession_cone;
use plq_threshold::spectral::{eig_decompose_sym, reconstruction_error};
use plq_threshold::{
    classify_point_conic, classify_point_polyhedral, envelope_numeric, envelope_value_full, threshold_conic,
    threshold_plq, threshold_polyhedral, HalfSpace, Membership, OracleConfig, PlqFunction, QuadraticFunction,
    VerdictKind,
};
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> PlqFunction {
    read_plq(&fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, lim: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-lim..=lim));
    (&m + m.transpose()) * 0.5
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, lim: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-lim..=lim))
}

/// A cone in the plane spanned by two random unit rays less than π apart.
pub fn random_planar_cone<R: Rng>(rng: &mut R) -> PolyhedralSet {
    let start = rng.gen_range(0.0..std::f64::consts::TAU);
    let width = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
    let (t0, t1) = (start, start + width);
    let lo = v(&[t0.sin(), -t0.cos()]);
    let hi = v(&[-t1.sin(), t1.cos()]);
    PolyhedralSet::new(
        2,
        vec![
            HalfSpace::new(lo, 0.0).unwrap(),
            HalfSpace::new(hi, 0.0).unwrap(),
        ],
    )
    .unwrap()
}

/// Spherical round trip plus the G/H/K split of the envelope objective along a ray.
pub fn check_coordinate_identities(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: f64,
    r: f64,
    xbar: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<(), String> {
    let n = y.len();
    if n < 2 || y.norm() < 1e-6 {
        return Ok(());
    }
    let sp = SphericalPoint::from_cartesian(y);
    let back = sp.to_cartesian();
    let scale = 1.0 + y.norm();
    if (&back - y).norm() > 1e-12 * scale {
        return Err(format!("round trip {y} -> {back}"));
    }
    let u = y / y.norm();
    let g = g_of_phi(a, &sp.phi).map_err(|e| e.to_string())?;
    let g_direct = u.dot(&(a * &u));
    if (g - g_direct).abs() > 1e-12 * (1.0 + a.abs().max()) {
        return Err(format!("G {g} vs {g_direct}"));
    }
    let h = h_r(b, r, xbar, &sp.phi).map_err(|e| e.to_string())?;
    let h_direct = (b - xbar * r).dot(&u);
    let hs = 1.0 + b.abs().max() + r * xbar.norm();
    if (h - h_direct).abs() > 1e-12 * hs {
        return Err(format!("H {h} vs {h_direct}"));
    }
    let k = k_r(c, r, xbar);
    let k_direct = c + 0.5 * r * xbar.norm_squared();
    if (k - k_direct).abs() > 1e-12 * (1.0 + k_direct.abs()) {
        return Err(format!("K {k} vs {k_direct}"));
    }
    let rho = sp.rho;
    let direct = 0.5 * y.dot(&(a * y)) + b.dot(y) + c + 0.5 * r * (y - xbar).norm_squared();
    let split = 0.5 * rho * rho * (g + r) + rho * h + k;
    if (direct - split).abs() > 1e-10 * (1.0 + direct.abs()) {
        return Err(format!("objective {direct} vs split {split}"));
    }
    Ok(())
}

/// Reconstruction, orthonormality and ordering of the eigen-decomposition.
pub fn check_eigen_invariants(a: &DMatrix<f64>) -> Result<(), String> {
    let dec = eig_decompose_sym(a).map_err(|e| e.to_string())?;
    let n = a.nrows();
    let scale = 1.0 + a.abs().max();
    let err = reconstruction_error(a, &dec);
    if err > 1e-9 * scale {
        return Err(format!("reconstruction error {err}"));
    }
    let qqt = &dec.q * dec.q.transpose();
    if (qqt - DMatrix::identity(n, n)).abs().max() > 1e-9 {
        return Err("eigenvectors not orthonormal".into());
    }
    if dec.lambdas.as_slice().windows(2).any(|w| w[0] < w[1]) {
        return Err("eigenvalues not sorted".into());
    }
    let mut reference: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    reference.sort_by(|x, y| y.total_cmp(x));
    for (l, r) in dec.lambdas.iter().zip(&reference) {
        if (l - r).abs() > 1e-9 * scale {
            return Err(format!("eigenvalue {l} vs reference {r}"));
        }
    }
    Ok(())
}

/// `min uᵀ(tA)u` over `t·cone` equals `t` times the original minimum.
pub fn check_cone_scaling(a: &DMatrix<f64>, cone: &PolyhedralSet, t: f64) -> Result<(), String> {
    let base = min_form_over_cone(a, cone).map_err(|e| e.to_string())?.g;
    let scaled = min_form_over_cone(&(a * t), cone).map_err(|e| e.to_string())?.g;
    if (scaled - t * base).abs() > 1e-9 * (1.0 + t * a.abs().max()) {
        return Err(format!("G(tA) = {scaled}, t·G(A) = {}", t * base));
    }
    let rescaled = PolyhedralSet::new(
        cone.dim(),
        cone.halfspaces()
            .iter()
            .map(|h| HalfSpace::new(h.normal() * (1.0 + t), 0.0).unwrap())
            .collect(),
    )
    .unwrap();
    let same = min_form_over_cone(a, &rescaled).map_err(|e| e.to_string())?.g;
    if (same - base).abs() > 1e-9 * (1.0 + a.abs().max()) {
        return Err(format!("rescaled normals changed G: {same} vs {base}"));
    }
    Ok(())
}

/// A cone in `ℝⁿ` cut by at most `n` random normals, so it has interior.
pub fn random_cone<R: Rng>(rng: &mut R, n: usize) -> PolyhedralSet {
    if n == 2 && rng.gen_bool(0.5) {
        return random_planar_cone(rng);
    }
    let k = rng.gen_range(1..=n);
    let hs = (0..k)
        .map(|_| loop {
            let a = random_vector(rng, n, 1.0);
            if a.norm() > 0.1 {
                break HalfSpace::new(a, 0.0).unwrap();
            }
        })
        .collect();
    PolyhedralSet::new(n, hs).unwrap()
}

pub fn quadratic(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> QuadraticFunction {
    QuadraticFunction::new(a, b, c).unwrap()
}

/// `r ↦ e_r f(x̄)` never decreases, for a quadratic on the whole space.
pub fn check_monotone_full(f: &QuadraticFunction, xbar: &DVector<f64>, rs: &[f64]) -> Result<(), String> {
    let mut sorted = rs.to_vec();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let values: Vec<f64> = sorted
        .iter()
        .map(|&r| envelope_value_full(f, r, xbar).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    for (w, r) in values.windows(2).zip(sorted.windows(2)) {
        if w[0] > w[1] + 1e-9 * (1.0 + w[1].abs()) {
            return Err(format!("e_{}(x̄) = {} > e_{}(x̄) = {}", r[0], w[0], r[1], w[1]));
        }
    }
    Ok(())
}

/// The threshold on a cone does not see `b` or `c`.
pub fn check_bc_invariance(
    a: &DMatrix<f64>,
    cone: &PolyhedralSet,
    b1: &DVector<f64>,
    c1: f64,
    b2: &DVector<f64>,
    c2: f64,
) -> Result<(), String> {
    let r1 = threshold_conic(&quadratic(a.clone(), b1.clone(), c1), cone)
        .map_err(|e| e.to_string())?
        .r_bar;
    let r2 = threshold_conic(&quadratic(a.clone(), b2.clone(), c2), cone)
        .map_err(|e| e.to_string())?
        .r_bar;
    if (r1 - r2).abs() > 1e-12 * (1.0 + r1.abs()) {
        return Err(format!("r̄ changed with b, c: {r1} vs {r2}"));
    }
    Ok(())
}

/// `p + K` has recession cone `K` and the same threshold as `K`.
pub fn check_anchor_independence(
    f: &QuadraticFunction,
    cone: &PolyhedralSet,
    p: &DVector<f64>,
) -> Result<(), String> {
    let shifted = cone.translate(p).map_err(|e| e.to_string())?;
    let rec = recession_cone(&shifted).map_err(|e| e.to_string())?;
    for (h, k) in rec.halfspaces().iter().zip(cone.halfspaces()) {
        if (h.normal() - k.normal()).amax() > 1e-15 || h.offset() != 0.0 {
            return Err("recession cone of p + K differs from K".into());
        }
    }
    let on_cone = threshold_conic(f, cone).map_err(|e| e.to_string())?.r_bar;
    let on_shift = threshold_polyhedral(f, &shifted).map_err(|e| e.to_string())?.r_bar;
    if (on_cone - on_shift).abs() > 1e-9 * (1.0 + on_cone) {
        return Err(format!("r̄ on K = {on_cone}, on p + K = {on_shift}"));
    }
    Ok(())
}

/// When `G < 0`, `b/r̄` lies in the domain, on the cone and on a translate of it.
pub fn check_witness(f: &QuadraticFunction, cone: &PolyhedralSet, p: &DVector<f64>) -> Result<(), String> {
    let an = threshold_conic(f, cone).map_err(|e| e.to_string())?;
    if an.g >= -1e-6 {
        return Ok(());
    }
    let ext = nonempty_nontrivial_check(&an).map_err(|e| e.to_string())?;
    if !(ext.dom_nonempty && ext.dom_proper) {
        return Err("G < 0 but the domain was not reported nonempty and proper".into());
    }
    let m = classify_point_conic(&an, f, &ext.witness).map_err(|e| e.to_string())?;
    if m != Membership::Member {
        return Err(format!("witness {} classified {m}", ext.witness));
    }
    let shifted = cone.translate(p).map_err(|e| e.to_string())?;
    let pa = threshold_polyhedral(f, &shifted).map_err(|e| e.to_string())?;
    let w = pa.witness().ok_or("translated cone has no witness")?;
    let m = classify_point_polyhedral(f, &shifted, &pa, &w).map_err(|e| e.to_string())?;
    if m != Membership::Member {
        return Err(format!("translated witness {w} classified {m}"));
    }
    Ok(())
}

/// The overall threshold is the largest piece threshold.
pub fn check_max_rule(f: &PlqFunction) -> Result<(), String> {
    let report = threshold_plq(f).map_err(|e| e.to_string())?;
    let mut best = 0.0f64;
    for p in f.pieces() {
        if p.region.is_empty() {
            continue;
        }
        let r = threshold_polyhedral(&p.quadratic, &p.region).map_err(|e| e.to_string())?.r_bar;
        best = best.max(r);
    }
    if (report.r_bar - best).abs() > 1e-12 * (1.0 + best) {
        return Err(format!("report r̄ = {}, max over pieces = {best}", report.r_bar));
    }
    for &i in &report.active_set {
        if (report.pieces[i - 1].r_bar - report.r_bar).abs() > 1e-9 * (1.0 + best) {
            return Err(format!("piece {i} in the active set with r̄ = {}", report.pieces[i - 1].r_bar));
        }
    }
    Ok(())
}

/// JSON output parses back to a function that agrees at random points.
pub fn check_round_trip<R: Rng>(f: &PlqFunction, rng: &mut R) -> Result<(), String> {
    let g = parse_plq(&to_json_string(f)).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let x = random_vector(rng, f.dim(), 4.0);
        let (u, w) = (f.evaluate(&x).unwrap(), g.evaluate(&x).unwrap());
        if u != w {
            return Err(format!("f({x}) = {u} but reparsed gives {w}"));
        }
    }
    Ok(())
}

/// `e_r f = minᵢ e_r fᵢ` at `r = r̄ + 0.1`, checked against direct evaluation of `f`.
pub fn check_piecewise_min<R: Rng>(f: &PlqFunction, rng: &mut R) -> Result<(), String> {
    let report = threshold_plq(f).map_err(|e| e.to_string())?;
    let r = report.r_bar + 0.1;
    let xbar = random_vector(rng, f.dim(), 2.0);
    let cfg = OracleConfig::default();
    let whole = envelope_numeric(f, r, &xbar, &cfg).map_err(|e| e.to_string())?;
    let VerdictKind::Finite { value, argmin } = whole.kind else {
        return Err(format!("envelope at r = {r} not finite: {:?}", whole.kind));
    };
    let tol = 1e-4 * (1.0 + value.abs());
    let mut per_piece = f64::INFINITY;
    for p in f.pieces() {
        if p.region.is_empty() {
            continue;
        }
        let v = envelope_numeric_piece(p, r, &xbar, &cfg).map_err(|e| e.to_string())?;
        let Some(x) = v.value() else {
            return Err("piece envelope inconclusive".into());
        };
        per_piece = per_piece.min(x);
    }
    if (per_piece - value).abs() > tol {
        return Err(format!("min over pieces {per_piece} vs whole {value}"));
    }
    let objective = |y: &DVector<f64>| f.evaluate(y).unwrap() + 0.5 * r * (y - &xbar).norm_squared();
    let attained = objective(&argmin);
    if (attained - value).abs() > tol {
        return Err(format!("value {value} but f at the minimizer gives {attained}"));
    }
    for _ in 0..2000 {
        let y = &xbar + random_vector(rng, f.dim(), 20.0);
        if objective(&y) < value - tol {
            return Err(format!("sample {y} beats the envelope value {value}"));
        }
    }
    if let [only] = f.pieces() {
        if only.region.is_whole_space() {
            let exact = envelope_value_full(&only.quadratic, r, &xbar).map_err(|e| e.to_string())?;
            if (exact - value).abs() > tol {
                return Err(format!("closed form {exact} vs oracle {value}"));
            }
        }
    }
    Ok(())
}

/// Face enumeration and the angular grid agree on `G` whenever the grid ran.
pub fn check_grid_agreement(a: &DMatrix<f64>, cone: &PolyhedralSet) -> Result<(), String> {
    let m = min_form_over_cone(a, cone).map_err(|e| e.to_string())?;
    if let Some(grid) = m.grid_g {
        // The grid samples the sphere, so it can only overshoot the true minimum.
        if grid < m.g - 1e-6 * (1.0 + a.amax()) {
            return Err(format!("grid found {grid} below the exact minimum {}", m.g));
        }
        // Refinement is exact on a circle; on the 2-sphere it can stall against a face.
        let slack = if a.nrows() == 2 { 1e-6 } else { 1e-2 };
        if grid - m.g > slack * (1.0 + a.amax()) {
            return Err(format!("grid {grid} far above the exact minimum {}", m.g));
        }
    }
    Ok(())
}
