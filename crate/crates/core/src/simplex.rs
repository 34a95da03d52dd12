//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Sized for the small linear programs that arise on recession cones
//! (tens of variables). Solves
//!
//! ```text
//! maximize  cᵀx   subject to   A x <= b,  x >= 0
//! ```

use nalgebra::DMatrix;

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `obj` over the columns allowed to enter. Returns false when
    /// the objective is unbounded.
    fn optimize(&mut self, obj: &[f64], allowed: impl Fn(usize) -> bool) -> bool {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.width).filter(|&j| allowed(j)).find(|&j| {
                let reduced = obj[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| obj[b] * self.rows[i][j])
                        .sum::<f64>();
                reduced > PIVOT_EPS
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_EPS
                                || (ratio <= lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
        // Bland's rule terminates; the cap only guards against round-off loops.
        true
    }
}

pub fn maximize(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> LpOutcome {
    let (m, n) = (a.nrows(), a.ncols());
    assert_eq!(c.len(), n, "objective length must match column count");
    assert_eq!(b.len(), m, "rhs length must match row count");

    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    // Columns: x (n), slacks (m), artificials (n_art), rhs.
    let width = n + m + n_art;
    let mut rows = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0; m];
    let mut art_idx = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            rows[i][j] = sign * a[(i, j)];
        }
        rows[i][n + i] = sign;
        rows[i][width] = sign * b[i];
        if b[i] < 0.0 {
            rows[i][n + m + art_idx] = 1.0;
            basis[i] = n + m + art_idx;
            art_idx += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau { rows, basis, width };

    if n_art > 0 {
        let mut phase1 = vec![0.0; width];
        for v in phase1.iter_mut().skip(n + m) {
            *v = -1.0;
        }
        tab.optimize(&phase1, |_| true);
        let infeasibility: f64 = (0..m)
            .filter(|&r| tab.basis[r] >= n + m)
            .map(|r| tab.rhs(r))
            .sum();
        if infeasibility > 1e-9 * (1.0 + b.iter().fold(0.0_f64, |s, v| s.max(v.abs()))) {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-level) artificials out of the basis.
        for r in 0..m {
            if tab.basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&j| tab.rows[r][j].abs() > PIVOT_EPS) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    if !tab.optimize(&obj, |j| j < n + m) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.rhs(r);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

/// Optimizes `obj·z` over `{z : rows·z <= rhs, |z_i| <= 1}` by splitting
/// `z = p - q`. Returns `None` when the region is empty.
pub fn optimize_in_box(
    obj: &[f64],
    rows: &DMatrix<f64>,
    rhs: &[f64],
    maximize_obj: bool,
) -> Option<(Vec<f64>, f64)> {
    let d = obj.len();
    let r = rows.nrows();
    if d == 0 {
        return rhs.iter().all(|&b| b >= 0.0).then(|| (Vec::new(), 0.0));
    }
    let sign = if maximize_obj { 1.0 } else { -1.0 };
    let mut a = DMatrix::zeros(r + 2 * d, 2 * d);
    let mut b = vec![0.0; r + 2 * d];
    for i in 0..r {
        for j in 0..d {
            a[(i, j)] = rows[(i, j)];
            a[(i, d + j)] = -rows[(i, j)];
        }
        b[i] = rhs[i];
    }
    for j in 0..2 * d {
        a[(r + j, j)] = 1.0;
        b[r + j] = 1.0;
    }
    let c: Vec<f64> = (0..2 * d)
        .map(|j| if j < d { sign * obj[j] } else { -sign * obj[j - d] })
        .collect();
    match maximize(&c, &a, &b) {
        LpOutcome::Optimal { x, .. } => {
            let z: Vec<f64> = (0..d).map(|j| x[j] - x[d + j]).collect();
            let value = z.iter().zip(obj).map(|(zi, oi)| zi * oi).sum();
            Some((z, value))
        }
        LpOutcome::Infeasible => None,
        // The box keeps every objective bounded.
        LpOutcome::Unbounded => None,
    }
}

/// [`optimize_in_box`] over the homogeneous cone `rows·z <= 0`, which always
/// contains the origin.
pub fn optimize_over_cone_box(obj: &[f64], rows: &DMatrix<f64>, maximize_obj: bool) -> (Vec<f64>, f64) {
    let rhs = vec![0.0; rows.nrows()];
    optimize_in_box(obj, rows, &rhs, maximize_obj).unwrap_or_else(|| (vec![0.0; obj.len()], 0.0))
}
