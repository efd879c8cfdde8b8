//! Random valid 2-D PLQ functions for cross-checking the analysis against the oracle.
//!
//! Two shapes are produced. Parallel strips cut by lines `nᵀx = tᵢ`, where the
//! next quadratic adds `(nᵀx − tᵢ)(αᵀx + γ)` so the seam stays continuous. Fans
//! of 3 or 4 sectors around an apex, where the seam terms are chosen so that
//! going once around returns to the first quadratic.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::f64::consts::PI;

use crate::plq::{Piece, PlqFunction};
use crate::polyhedron::{HalfSpace, PolyhedralSet};
use crate::quadratic::QuadraticFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub max_pieces: usize,
    /// Every entry of `A`, `b`, `c` and the region data lies in `[−bound, bound]`.
    pub bound: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_pieces: 4,
            bound: 5.0,
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, lim: f64) -> f64 {
    rng.gen_range(-lim..=lim)
}

fn random_quadratic<R: Rng>(rng: &mut R, bound: f64) -> (DMatrix<f64>, DVector<f64>, f64) {
    let (a11, a12, a22) = (uniform(rng, bound), uniform(rng, bound), uniform(rng, bound));
    let a = DMatrix::from_row_slice(2, 2, &[a11, a12, a12, a22]);
    let b = DVector::from_fn(2, |_, _| uniform(rng, bound));
    (a, b, uniform(rng, bound))
}

fn within(bound: f64, a: &DMatrix<f64>, b: &DVector<f64>, c: f64) -> bool {
    a.iter().chain(b.iter()).all(|v| v.abs() <= bound) && c.abs() <= bound
}

fn piece(a: &DMatrix<f64>, b: &DVector<f64>, c: f64, rows: &[(DVector<f64>, f64)]) -> Option<Piece> {
    let q = QuadraticFunction::new(a.clone(), b.clone(), c).ok()?;
    let hs = rows
        .iter()
        .map(|(n, beta)| HalfSpace::new(n.clone(), *beta))
        .collect::<Result<Vec<_>, _>>()
        .ok()?;
    Piece::new(q, PolyhedralSet::new(2, hs).ok()?).ok()
}

fn strips<R: Rng>(rng: &mut R, cfg: &GeneratorConfig, k: usize) -> Option<PlqFunction> {
    let theta = rng.gen_range(0.0..PI);
    let n = DVector::from_vec(vec![theta.cos(), theta.sin()]);
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| uniform(rng, 3.0)).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    if cuts.windows(2).any(|w| w[1] - w[0] < 0.2) {
        return None;
    }
    let (mut a, mut b, mut c) = random_quadratic(rng, cfg.bound);
    let mut pieces = Vec::with_capacity(k);
    for i in 0..k {
        let mut rows = Vec::new();
        if i > 0 {
            rows.push((-&n, -cuts[i - 1]));
        }
        if i + 1 < k {
            rows.push((n.clone(), cuts[i]));
        }
        if !within(cfg.bound, &a, &b, c) {
            return None;
        }
        pieces.push(piece(&a, &b, c, &rows)?);
        if i + 1 < k {
            let t = cuts[i];
            let alpha = DVector::from_fn(2, |_, _| uniform(rng, 1.0));
            let gamma = uniform(rng, 1.0);
            a += &n * alpha.transpose() + &alpha * n.transpose();
            b += &n * gamma - &alpha * t;
            c -= t * gamma;
        }
    }
    PlqFunction::new(2, pieces).ok()
}

fn fan<R: Rng>(rng: &mut R, cfg: &GeneratorConfig, k: usize) -> Option<PlqFunction> {
    let apex = DVector::from_fn(2, |_, _| uniform(rng, 2.0));
    let start = rng.gen_range(0.0..2.0 * PI);
    let mut gaps: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = gaps.iter().sum();
    gaps.iter_mut().for_each(|g| *g *= 2.0 * PI / total);
    if gaps.iter().any(|&g| g >= PI - 0.1) {
        return None;
    }
    let mut angles = vec![start];
    for g in &gaps[..k - 1] {
        angles.push(angles.last().unwrap() + g);
    }
    // Left normal of each boundary ray; sector i lies between rays i and i+1.
    let left: Vec<DVector<f64>> = angles
        .iter()
        .map(|t| DVector::from_vec(vec![-t.sin(), t.cos()]))
        .collect();

    // Crossing ray j+1 adds (ℓⱼᵀy)(αⱼᵀy + γⱼ) with y = x − apex. The sum over
    // all rays must vanish: Σ sym(ℓⱼαⱼᵀ) = 0 and Σ γⱼℓⱼ = 0.
    let m = k;
    let mut alphas: Vec<DVector<f64>> = (0..m).map(|_| DVector::from_fn(2, |_, _| uniform(rng, 1.0))).collect();
    let mut gammas: Vec<f64> = (0..m).map(|_| uniform(rng, 1.0)).collect();
    let sym = |l: &DVector<f64>, a: &DVector<f64>| {
        let s = l * a.transpose() + a * l.transpose();
        DVector::from_vec(vec![s[(0, 0)], s[(0, 1)], s[(1, 1)]])
    };
    let mut resid = DVector::zeros(3);
    for j in 0..m - 2 {
        resid += sym(&left[(j + 1) % m], &alphas[j]);
    }
    let mut sys = DMatrix::zeros(3, 4);
    for (col, j) in [(0, m - 2), (2, m - 1)] {
        let l = &left[(j + 1) % m];
        for e in 0..2 {
            let mut unit = DVector::zeros(2);
            unit[e] = 1.0;
            sys.set_column(col + e, &sym(l, &unit));
        }
    }
    let sol = sys.svd(true, true).solve(&(-&resid), 1e-12).ok()?;
    alphas[m - 2] = DVector::from_vec(vec![sol[0], sol[1]]);
    alphas[m - 1] = DVector::from_vec(vec![sol[2], sol[3]]);
    let mut lin = DVector::zeros(2);
    for j in 0..m - 2 {
        lin += &left[(j + 1) % m] * gammas[j];
    }
    let pair = DMatrix::from_columns(&[left[(m - 1) % m].clone(), left[0].clone()]);
    let g = pair.lu().solve(&(-&lin))?;
    gammas[m - 2] = g[0];
    gammas[m - 1] = g[1];

    let (mut a, mut b, mut c) = random_quadratic(rng, cfg.bound);
    let mut pieces = Vec::with_capacity(k);
    for i in 0..k {
        let lo = &left[i];
        let hi = &left[(i + 1) % k];
        let rows = [(-lo, -lo.dot(&apex)), (hi.clone(), hi.dot(&apex))];
        if !within(cfg.bound, &a, &b, c) {
            return None;
        }
        pieces.push(piece(&a, &b, c, &rows)?);
        if i + 1 < k {
            // (ℓᵀy)(αᵀy + γ) expanded in x with y = x − p.
            let (l, al, ga) = (hi, &alphas[i], gammas[i]);
            let (lp, ap) = (l.dot(&apex), al.dot(&apex));
            a += l * al.transpose() + al * l.transpose();
            b += l * (ga - ap) - al * lp;
            c += lp * (ap - ga);
        }
    }
    PlqFunction::new(2, pieces).ok()
}

/// One random valid instance; retries until construction and validation succeed.
pub fn random_plq<R: Rng>(rng: &mut R, cfg: &GeneratorConfig) -> PlqFunction {
    loop {
        let k = rng.gen_range(1..=cfg.max_pieces.max(1));
        let candidate = if k >= 3 && rng.gen_bool(0.5) {
            fan(rng, cfg, k)
        } else {
            strips(rng, cfg, k)
        };
        if let Some(f) = candidate {
            if f.validate().is_valid() {
                return f;
            }
        }
    }
}

pub fn random_instances<R: Rng>(rng: &mut R, count: usize, cfg: &GeneratorConfig) -> Vec<PlqFunction> {
    (0..count).map(|_| random_plq(rng, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_are_valid_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = GeneratorConfig::default();
        let mut fans = 0;
        for f in random_instances(&mut rng, 40, &cfg) {
            assert!(f.validate().is_valid());
            assert!(f.pieces().len() <= 4);
            for p in f.pieces() {
                let q = &p.quadratic;
                assert!(within(5.0, q.a(), q.b(), q.c()));
            }
            if f.pieces().iter().all(|p| p.region.halfspaces().len() == 2) && f.pieces().len() >= 3 {
                fans += 1;
            }
        }
        assert!(fans > 0);
    }

    #[test]
    fn fan_closes_continuously() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GeneratorConfig { max_pieces: 4, bound: 1e6 };
        let mut built = 0;
        while built < 20 {
            if let Some(f) = fan(&mut rng, &cfg, 4) {
                assert!(f.validate().is_valid(), "{f:?}");
                built += 1;
            }
        }
    }
}
