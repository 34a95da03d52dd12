//! Lagrangian dual lower bounds.
//!
//! For any `μ >= 0`, `inf_x f(x) + Σ μ_i g_i(x)` is a lower bound on the
//! constrained infimum (weak duality). Each evaluation is an exact
//! unconstrained quadratic minimization. The dual is concave in `μ`; a
//! logarithmic grid locates a good region and coordinate golden-section
//! passes polish it.

use crate::error::Result;
use crate::gtrs::{unconstrained_argmin, Argmin};
use crate::model::{QuadraticFunction, Vector};

const FULL_GRID_LIMIT: usize = 40_000;
const POLISH_PASSES: usize = 3;
const GOLDEN_STEPS: usize = 40;
const ASCENT_PASSES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DualBound {
    /// Best lower bound found; `-inf` when every probed multiplier failed.
    pub value: f64,
    pub multipliers: Vec<f64>,
    /// Minimizer of the Lagrangian at the best multipliers.
    pub point: Option<Vector>,
}

fn grid() -> Vec<f64> {
    let mut g = vec![0.0];
    for k in -3..=6 {
        let base = 10f64.powi(k);
        g.extend([base, 2.0 * base, 5.0 * base]);
    }
    g
}

fn lagrangian(f: &QuadraticFunction, gs: &[QuadraticFunction], mu: &[f64]) -> QuadraticFunction {
    gs.iter()
        .zip(mu)
        .filter(|(_, &m)| m != 0.0)
        .fold(f.clone(), |acc, (g, &m)| acc.combined(m, g))
}

fn evaluate(f: &QuadraticFunction, gs: &[QuadraticFunction], mu: &[f64]) -> Result<(f64, Option<Vector>)> {
    Ok(match unconstrained_argmin(&lagrangian(f, gs, mu))? {
        Argmin::Minimum { value, point } => (value, Some(point)),
        Argmin::Unbounded { .. } => (f64::NEG_INFINITY, None),
    })
}

/// Best Lagrangian lower bound on `inf { f : g_i <= 0 }`.
pub fn lagrangian_bound(f: &QuadraticFunction, gs: &[QuadraticFunction]) -> Result<DualBound> {
    let m = gs.len();
    let values = grid();
    let mut best_mu = vec![0.0; m];
    let (mut best, mut best_point) = evaluate(f, gs, &best_mu)?;

    let full = (values.len() as f64).powi(m as i32) <= FULL_GRID_LIMIT as f64;
    if m > 0 && full {
        let mut idx = vec![0usize; m];
        loop {
            let mu: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
            let (v, pt) = evaluate(f, gs, &mu)?;
            if v > best {
                best = v;
                best_mu = mu;
                best_point = pt;
            }
            let mut pos = 0;
            while pos < m {
                idx[pos] += 1;
                if idx[pos] < values.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == m {
                break;
            }
        }
    } else if m > 0 {
        for _ in 0..ASCENT_PASSES {
            let mut improved = false;
            for i in 0..m {
                for &v in &values {
                    let mut mu = best_mu.clone();
                    mu[i] = v;
                    let (val, pt) = evaluate(f, gs, &mu)?;
                    if val > best {
                        best = val;
                        best_mu = mu;
                        best_point = pt;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    if best.is_finite() {
        for _ in 0..POLISH_PASSES {
            for i in 0..m {
                let center = best_mu[i];
                let (mut a, mut b) = if center == 0.0 { (0.0, 1e-3) } else { (center / 10.0, center * 10.0) };
                let phi = 0.5 * (5f64.sqrt() - 1.0);
                let probe = |x: f64| -> Result<(f64, Option<Vector>)> {
                    let mut mu = best_mu.clone();
                    mu[i] = x;
                    evaluate(f, gs, &mu)
                };
                for _ in 0..GOLDEN_STEPS {
                    let x1 = b - phi * (b - a);
                    let x2 = a + phi * (b - a);
                    if probe(x1)?.0 >= probe(x2)?.0 {
                        b = x2;
                    } else {
                        a = x1;
                    }
                }
                let x = 0.5 * (a + b);
                let (val, pt) = probe(x)?;
                if val > best {
                    best = val;
                    best_mu[i] = x;
                    best_point = pt;
                }
            }
        }
    }

    Ok(DualBound {
        value: best,
        multipliers: best_mu,
        point: best_point,
    })
}
