//! Dense two-phase simplex for the small LPs used by the geometry code.
//!
//! Bland's rule throughout, so degenerate problems (duplicate or opposite
//! rows are common here) cannot cycle.

use nalgebra::DVector;

/// Result of a linear program.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&DVector<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, *value)),
            _ => None,
        }
    }
}

const PIVOT_TOL: f64 = 1e-11;

struct Tableau {
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.t[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.t.len() {
            if i == row {
                continue;
            }
            let factor = self.t[i][col];
            if factor != 0.0 {
                for (v, pv) in self.t[i].iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                self.rhs[i] -= factor * pivot_rhs;
                self.t[i][col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost · z` over the `allowed` columns, starting from the current basis.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Step {
        let scale = 1.0 + cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        loop {
            let entering = (0..cost.len()).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let d = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.t)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                d > 1e-10 * scale
            });
            let Some(j) = entering else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][j];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            let slack = 1e-12 * (1.0 + best.abs());
                            ratio < best - slack || (ratio <= best + slack && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, j),
                None => return Step::Unbounded,
            }
        }
    }
}

/// Maximize `objective · x` subject to `rows[i] · x <= rhs[i]` and per-variable bounds.
///
/// `bounds` defaults to free variables when `None`.
pub fn maximize(
    objective: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
    bounds: Option<&[(f64, f64)]>,
) -> LpOutcome {
    let n = objective.len();
    // x_k = offset_k + Σ coef · z_col with every z_col >= 0.
    let mut offset = vec![0.0; n];
    let mut map: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut caps: Vec<(usize, f64)> = Vec::new();
    let mut ncols = 0;
    for k in 0..n {
        let (lo, hi) = bounds.map_or((f64::NEG_INFINITY, f64::INFINITY), |b| b[k]);
        if lo > hi {
            return LpOutcome::Infeasible;
        }
        if lo.is_finite() {
            offset[k] = lo;
            map[k].push((ncols, 1.0));
            if hi.is_finite() {
                caps.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            offset[k] = hi;
            map[k].push((ncols, -1.0));
            ncols += 1;
        } else {
            map[k].push((ncols, 1.0));
            map[k].push((ncols + 1, -1.0));
            ncols += 2;
        }
    }

    let mut dense: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows.len() + caps.len());
    for (row, &beta) in rows.iter().zip(rhs) {
        let mut z = vec![0.0; ncols];
        let mut b = beta;
        for k in 0..n {
            b -= row[k] * offset[k];
            for &(col, coef) in &map[k] {
                z[col] += row[k] * coef;
            }
        }
        dense.push((z, b));
    }
    for (col, cap) in caps {
        let mut z = vec![0.0; ncols];
        z[col] = 1.0;
        dense.push((z, cap));
    }
    let mut cost = vec![0.0; ncols];
    for k in 0..n {
        for &(col, coef) in &map[k] {
            cost[col] += objective[k] * coef;
        }
    }

    // Columns: structural, one slack per row, then one artificial per negative row.
    let m = dense.len();
    let negative: Vec<usize> = (0..m).filter(|&i| dense[i].1 < 0.0).collect();
    let total = ncols + m + negative.len();
    let mut tab = Tableau {
        t: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
    };
    for (i, (z, b)) in dense.iter().enumerate() {
        let mut row = vec![0.0; total];
        row[..ncols].copy_from_slice(z);
        row[ncols + i] = 1.0;
        if let Some(a) = negative.iter().position(|&r| r == i) {
            row.iter_mut().for_each(|v| *v = -*v);
            row[ncols + m + a] = 1.0;
            tab.rhs.push(-b);
            tab.basis.push(ncols + m + a);
        } else {
            tab.rhs.push(*b);
            tab.basis.push(ncols + i);
        }
        tab.t.push(row);
    }

    if !negative.is_empty() {
        let mut phase1 = vec![0.0; total];
        phase1[ncols + m..].iter_mut().for_each(|v| *v = -1.0);
        tab.optimize(&phase1, &vec![true; total]);
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(&b, _)| b >= ncols + m)
            .map(|(_, &v)| v)
            .sum();
        let scale = 1.0 + dense.iter().fold(0.0f64, |s, (_, b)| s.max(b.abs()));
        if infeas > 1e-9 * scale {
            return LpOutcome::Infeasible;
        }
        for i in 0..m {
            if tab.basis[i] >= ncols + m {
                if let Some(j) = (0..ncols + m).find(|&j| tab.t[i][j].abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }
    }
    let allowed: Vec<bool> = (0..total).map(|j| j < ncols + m).collect();
    let mut full_cost = vec![0.0; total];
    full_cost[..ncols].copy_from_slice(&cost);
    if let Step::Unbounded = tab.optimize(&full_cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut z = vec![0.0; total];
    for (&b, &v) in tab.basis.iter().zip(&tab.rhs) {
        z[b] = v.max(0.0);
    }
    let x = DVector::from_fn(n, |k, _| {
        offset[k] + map[k].iter().map(|&(c, coef)| coef * z[c]).sum::<f64>()
    });
    let value = objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum::<f64>();
    LpOutcome::Optimal { x, value }
}

/// Minimize instead of maximize.
pub fn minimize(
    objective: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
    bounds: Option<&[(f64, f64)]>,
) -> LpOutcome {
    let neg: Vec<f64> = objective.iter().map(|v| -v).collect();
    match maximize(&neg, rows, rhs, bounds) {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_box() {
        let out = maximize(
            &[1.0, 1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[2.0, 3.0],
            None,
        );
        let (_, v) = out.optimal().unwrap();
        assert!((v - 5.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inf = maximize(&[0.0], &[vec![1.0], vec![-1.0]], &[-1.0, -1.0], None);
        assert_eq!(inf, LpOutcome::Infeasible);
        let unb = maximize(&[1.0], &[vec![-1.0]], &[0.0], None);
        assert_eq!(unb, LpOutcome::Unbounded);
    }

    #[test]
    fn minimize_negates() {
        let out = minimize(&[1.0], &[vec![-1.0]], &[2.0], None);
        assert!((out.optimal().unwrap().1 + 2.0).abs() < 1e-9);
    }

    #[test]
    fn unused_free_variable() {
        let out = minimize(&[0.0, 1.0], &[vec![0.0, 1.0], vec![0.0, -1.0]], &[0.0, 0.0], None);
        assert!(out.optimal().unwrap().1.abs() < 1e-12);
    }

    #[test]
    fn degenerate_duplicate_rows_terminate() {
        let a = [0.5045539761076897, 0.8633801510307733];
        let rows = vec![a.to_vec(), vec![-a[0], -a[1]], a.to_vec()];
        let rhs = [1.3510123066858402, -1.3510123066858402, 2.075281720730758];
        let out = minimize(&a, &rows, &rhs, None);
        assert!((out.optimal().unwrap().1 - 1.3510123066858402).abs() < 1e-9);
    }

    #[test]
    fn bounds_are_respected() {
        let out = maximize(&[1.0, -1.0], &[], &[], Some(&[(-1.0, 2.0), (0.5, f64::INFINITY)]));
        let (x, v) = out.optimal().unwrap();
        assert!((v - 1.5).abs() < 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
        let out = minimize(&[1.0], &[], &[], Some(&[(f64::NEG_INFINITY, 3.0)]));
        assert_eq!(out, LpOutcome::Unbounded);
    }
}
