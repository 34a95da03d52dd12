//! Brute-force grid oracle.
//!
//! Scans the grid `{j h : |j h| <= R}` on the head coordinates (tail fixed
//! at zero). When the full grid is too large, a power-of-two coarse grid is
//! scanned exhaustively and the best candidates are refined by local grid
//! descent while the step halves down to the requested one.
//!
//! Points count as feasible when `g_i <= 1e-9 + h² L`, with `L` the largest
//! constraint curvature and `h` the current step.
//!
//! Grid descent stalls in curved valleys, so the best grid point is finally
//! polished by Newton's method on the KKT system of every active set, with
//! the box faces `½x_j² <= ½R²` added as constraints. The polished point is
//! kept only when it is feasible and better.

use serde::Serialize;

use crate::error::{QpError, Result};
use crate::model::{normalize_problem, Operator, Problem, QuadraticFunction, Vector};
use crate::search::kkt_refine;
use crate::spectral::eig_sym;

const BASE_TOL: f64 = 1e-9;
/// Largest dimension for which refinement scans a full local box.
const FULL_NEIGHBOURHOOD_DIM: usize = 8;
const LOCAL_BOX_POINTS: usize = 20_000;
const MAX_HALF_WIDTH: i64 = 8;
const DESCENT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub radius: f64,
    pub grid_step: f64,
    /// Maximum number of grid points scanned exhaustively.
    pub budget: usize,
    /// Overrides the curvature slack; `Some(0.0)` demands strict feasibility.
    pub slack: Option<f64>,
    /// Number of coarse candidates refined.
    pub refine_top: usize,
    /// Polish the best grid point on the KKT system.
    pub polish: bool,
}

impl OracleConfig {
    pub fn new(radius: f64, grid_step: f64) -> Self {
        OracleConfig {
            radius,
            grid_step,
            budget: 2_000_000,
            slack: None,
            refine_top: 8,
            polish: true,
        }
    }

    pub fn strict(mut self) -> Self {
        self.slack = Some(0.0);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// `+inf` when no grid point is feasible.
    pub inf_estimate: f64,
    pub argmin: Option<Vector>,
    pub radius: f64,
    /// Step of the finest grid actually visited.
    pub grid_step: f64,
    pub attained_in_box: bool,
    pub exhaustive: bool,
}

/// Dense copy of a quadratic restricted to the head coordinates.
struct Dense {
    d: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
}

impl Dense {
    fn new(q: &QuadraticFunction, d: usize) -> Self {
        let op = q.op.padded(d);
        let a = (0..d * d).map(|k| op.block[(k / d, k % d)]).collect();
        let b = (0..d).map(|i| q.lin.get(i)).collect();
        Dense { d, a, b, c: q.constant }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut quad = 0.0;
        for i in 0..self.d {
            let row = &self.a[i * self.d..(i + 1) * self.d];
            let ax: f64 = row.iter().zip(x).map(|(r, v)| r * v).sum();
            quad += x[i] * ax;
        }
        let lin: f64 = self.b.iter().zip(x).map(|(b, v)| b * v).sum();
        0.5 * quad + lin + self.c
    }
}

struct Scanner {
    f: Dense,
    gs: Vec<Dense>,
    curvature: f64,
    slack: Option<f64>,
    radius: f64,
}

impl Scanner {
    fn new(p: &Problem, radius: f64, slack: Option<f64>) -> Result<Self> {
        let d = p.head_dim();
        let mut curvature: f64 = 0.0;
        for g in &p.constraints {
            let op = g.op.padded(d);
            if d > 0 {
                let eig = eig_sym(&op.block)?;
                curvature = curvature.max(eig.values[d - 1].abs()).max(eig.values[0].abs());
            }
        }
        Ok(Scanner {
            f: Dense::new(&p.objective, d),
            gs: p.constraints.iter().map(|g| Dense::new(g, d)).collect(),
            curvature,
            slack,
            radius,
        })
    }

    fn tol(&self, h: f64) -> f64 {
        match self.slack {
            Some(0.0) => BASE_TOL,
            Some(s) => BASE_TOL + s,
            None => BASE_TOL + h * h * self.curvature,
        }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        self.gs.iter().map(|g| g.eval(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn feasible(&self, x: &[f64], tol: f64) -> bool {
        self.gs.iter().all(|g| g.eval(x) <= tol)
    }

    fn in_box(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.radius + 1e-12 * self.radius.max(1.0))
    }
}

fn half_count(radius: f64, h: f64) -> i64 {
    (radius / h + 1e-9).floor() as i64
}

fn grid_size(radius: f64, h: f64, d: usize) -> f64 {
    ((2 * half_count(radius, h) + 1) as f64).powi(d as i32)
}

/// Calls `visit` on every grid point of step `h`.
fn for_each_point(d: usize, radius: f64, h: f64, mut visit: impl FnMut(&[f64])) {
    let n = half_count(radius, h);
    let mut idx = vec![-n; d];
    let mut x: Vec<f64> = idx.iter().map(|&j| j as f64 * h).collect();
    loop {
        visit(&x);
        let mut pos = 0;
        while pos < d {
            if idx[pos] < n {
                idx[pos] += 1;
                x[pos] = idx[pos] as f64 * h;
                break;
            }
            idx[pos] = -n;
            x[pos] = -n as f64 * h;
            pos += 1;
        }
        if pos == d {
            break;
        }
    }
}

/// Keeps the `k` best `(value, point)` pairs, ordered by value.
fn push_top(top: &mut Vec<(f64, Vec<f64>)>, k: usize, value: f64, x: &[f64]) {
    if top.len() == k && value >= top[k - 1].0 {
        return;
    }
    let pos = top.partition_point(|(v, _)| *v <= value);
    top.insert(pos, (value, x.to_vec()));
    top.truncate(k);
}

/// Half-width (in steps) of the local refinement box, chosen so that one
/// box scan stays near `LOCAL_BOX_POINTS` points.
fn box_half_width(d: usize) -> i64 {
    let mut w = 1;
    while w < MAX_HALF_WIDTH && ((2 * (w + 1) + 1) as f64).powi(d as i32) <= LOCAL_BOX_POINTS as f64 {
        w += 1;
    }
    w
}

/// Offsets visited around a refinement centre: the full box in low
/// dimension, coordinate lines otherwise.
fn local_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if d <= FULL_NEIGHBOURHOOD_DIM {
        let w = box_half_width(d);
        let side = (2 * w + 1) as usize;
        let total = side.pow(d as u32);
        for code in 0..total {
            let mut c = code;
            let off: Vec<i64> = (0..d)
                .map(|_| {
                    let o = (c % side) as i64 - w;
                    c /= side;
                    o
                })
                .collect();
            if off.iter().any(|&o| o != 0) {
                out.push(off);
            }
        }
    } else {
        for i in 0..d {
            for o in -MAX_HALF_WIDTH..=MAX_HALF_WIDTH {
                if o != 0 {
                    let mut off = vec![0; d];
                    off[i] = o;
                    out.push(off);
                }
            }
        }
    }
    out
}

/// Local grid search at step `h`: recentres on the best point of the local
/// box until it stops moving. Feasible points beat infeasible ones, then
/// lower objective (or lower violation) wins.
fn descend(s: &Scanner, x0: Vec<f64>, h: f64, offsets: &[Vec<i64>]) -> Vec<f64> {
    let tol = s.tol(h);
    let key = |y: &[f64]| -> (bool, f64) {
        if s.feasible(y, tol) {
            (false, s.f.eval(y))
        } else {
            (true, s.violation(y))
        }
    };
    let mut x = x0;
    let mut here = key(&x);
    let mut y = x.clone();
    for _ in 0..DESCENT_CAP {
        let mut best: Option<((bool, f64), Vec<f64>)> = None;
        for off in offsets {
            for ((yi, xi), o) in y.iter_mut().zip(&x).zip(off) {
                *yi = xi + *o as f64 * h;
            }
            if !s.in_box(&y) {
                continue;
            }
            let k = key(&y);
            if k.partial_cmp(&here) == Some(std::cmp::Ordering::Less)
                && best.as_ref().map_or(true, |(b, _)| k.partial_cmp(b) == Some(std::cmp::Ordering::Less))
            {
                best = Some((k, y.clone()));
            }
        }
        match best {
            Some((k, z)) => {
                here = k;
                x = z;
            }
            None => break,
        }
    }
    x
}

pub fn oracle_minimize(p: &Problem, radius: f64, grid_step: f64) -> Result<OracleResult> {
    oracle_minimize_with(p, &OracleConfig::new(radius, grid_step))
}

pub fn oracle_minimize_with(p: &Problem, cfg: &OracleConfig) -> Result<OracleResult> {
    let run = scan(p, cfg)?;
    let (mut inf_estimate, mut argmin) = match run.ranked.into_iter().next() {
        Some((v, x)) => (v, Some(x)),
        None => (f64::INFINITY, None),
    };
    if let (true, Some(x)) = (cfg.polish, &argmin) {
        let max_viol = if cfg.slack == Some(0.0) { 0.0 } else { BASE_TOL };
        if let Some((v, y)) = polish(&normalize_problem(p)?, &Vector::new(x.clone()), cfg.radius, max_viol) {
            if v < inf_estimate {
                inf_estimate = v;
                argmin = Some(y.into_coords());
            }
        }
    }
    let attained_in_box = argmin
        .as_ref()
        .is_some_and(|x| x.iter().all(|v| v.abs() < cfg.radius - 0.5 * run.step));
    Ok(OracleResult {
        inf_estimate,
        argmin: argmin.map(Vector::new),
        radius: cfg.radius,
        grid_step: run.step,
        attained_in_box,
        exhaustive: run.exhaustive,
    })
}

fn polish(p: &Problem, x: &Vector, radius: f64, max_viol: f64) -> Option<(f64, Vector)> {
    let d = p.head_dim();
    if d == 0 {
        return None;
    }
    let mut boxed = p.clone();
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        boxed.constraints.push(QuadraticFunction::new(
            Operator::diagonal(&e, 0.0),
            Vector::zeros(d),
            -0.5 * radius * radius,
        ));
    }
    let y = kkt_refine(&boxed, &boxed.objective, x, f64::INFINITY);
    let inside = y.coords().iter().all(|v| v.abs() <= radius);
    (inside && y.is_finite() && boxed.max_violation(&y) <= max_viol).then(|| (p.objective.eval(&y), y))
}

/// Best feasible grid points found by the scan, best first (at most
/// `refine_top` of them).
pub fn oracle_candidates(p: &Problem, cfg: &OracleConfig) -> Result<Vec<Vector>> {
    Ok(scan(p, cfg)?.ranked.into_iter().map(|(_, x)| Vector::new(x)).collect())
}

struct Scan {
    ranked: Vec<(f64, Vec<f64>)>,
    step: f64,
    exhaustive: bool,
}

fn scan(p: &Problem, cfg: &OracleConfig) -> Result<Scan> {
    if !(cfg.radius > 0.0 && cfg.grid_step > 0.0) {
        return Err(QpError::PreconditionViolation("radius and grid step must be positive".into()));
    }
    let p = normalize_problem(p)?;
    let d = p.head_dim();
    let s = Scanner::new(&p, cfg.radius, cfg.slack)?;

    let exhaustive = grid_size(cfg.radius, cfg.grid_step, d) <= cfg.budget as f64;
    let mut h = if exhaustive {
        cfg.grid_step
    } else {
        let mut h0 = 2f64.powi(cfg.grid_step.log2().floor() as i32);
        while grid_size(cfg.radius, h0, d) > cfg.budget as f64 {
            h0 *= 2.0;
        }
        h0
    };

    // Coarse candidates are ranked with the target step's slack so that the
    // large slack of a coarse step does not favour badly infeasible points.
    // The least-violating points back them up when the feasible set is thin.
    let keep = cfg.refine_top.max(1);
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut closest: Vec<(f64, Vec<f64>)> = Vec::new();
    let tol = s.tol(cfg.grid_step.min(h));
    for_each_point(d, cfg.radius, h, |x| {
        let v = s.violation(x);
        if v <= tol {
            push_top(&mut top, keep, s.f.eval(x), x);
        } else if !exhaustive {
            push_top(&mut closest, keep, v, x);
        }
    });
    if !exhaustive {
        let offsets = local_offsets(d);
        let mut cands: Vec<Vec<f64>> = top.into_iter().chain(closest).map(|(_, x)| x).collect();
        loop {
            let mut next: Vec<Vec<f64>> = Vec::with_capacity(cands.len());
            for x in cands {
                let y = descend(&s, x, h, &offsets);
                if !next.contains(&y) {
                    next.push(y);
                }
            }
            cands = next;
            if h <= cfg.grid_step {
                break;
            }
            h *= 0.5;
        }
        let tol = s.tol(h);
        top = Vec::new();
        for x in cands {
            if s.feasible(&x, tol) && !top.iter().any(|(_, y)| *y == x) {
                push_top(&mut top, keep, s.f.eval(&x), &x);
            }
        }
    }
    Ok(Scan { ranked: top, step: h, exhaustive })
}

/// Minimal-norm grid point of `{x in F : f(x) <= a}`, ties broken
/// lexicographically. Feasibility is strict here (no curvature slack).
pub fn minimal_norm_level_point(p: &Problem, a: f64, cfg: &OracleConfig) -> Result<Vector> {
    let p = normalize_problem(p)?;
    let d = p.head_dim();
    let s = Scanner::new(&p, cfg.radius, Some(0.0))?;
    let mut h = cfg.grid_step;
    while grid_size(cfg.radius, h, d) > cfg.budget as f64 {
        h *= 2.0;
    }
    let tol = s.tol(h);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_point(d, cfg.radius, h, |x| {
        if !s.feasible(x, tol) || s.f.eval(x) > a {
            return;
        }
        let n: f64 = x.iter().map(|v| v * v).sum();
        let better = match &best {
            None => true,
            Some((bn, bx)) => n < *bn || (n == *bn && x.iter().partial_cmp(bx.iter()) == Some(std::cmp::Ordering::Less)),
        };
        if better {
            best = Some((n, x.to_vec()));
        }
    });
    best.map(|(_, x)| Vector::new(x)).ok_or(QpError::EmptyLevelSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Operator, SpaceDesc};

    fn quad(diag: &[f64], lin: &[f64], constant: f64) -> QuadraticFunction {
        QuadraticFunction::new(Operator::diagonal(diag, 0.0), Vector::new(lin.to_vec()), constant)
    }

    #[test]
    fn norm_squared_unconstrained() {
        let p = Problem::new(SpaceDesc::FiniteDim(2), quad(&[2.0, 2.0], &[], 0.0), vec![]);
        let r = oracle_minimize(&p, 3.0, 0.5).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.inf_estimate, 0.0);
        assert!(r.attained_in_box);
        assert_eq!(r.argmin.unwrap().norm(), 0.0);
    }

    #[test]
    fn linear_objective_hits_the_box() {
        let p = Problem::new(SpaceDesc::FiniteDim(1), quad(&[0.0], &[1.0], 0.0), vec![]);
        let r = oracle_minimize(&p, 2.0, 0.5).unwrap();
        assert_eq!(r.inf_estimate, -2.0);
        assert!(!r.attained_in_box);
    }

    #[test]
    fn infeasible_grid_reports_infinity() {
        // ½x² + 1 <= 0 has no solutions.
        let p = Problem::new(SpaceDesc::FiniteDim(1), quad(&[0.0], &[], 0.0), vec![quad(&[1.0], &[], 1.0)]);
        let r = oracle_minimize(&p, 1.0, 0.25).unwrap();
        assert_eq!(r.inf_estimate, f64::INFINITY);
        assert!(r.argmin.is_none());
    }

    #[test]
    fn coarse_to_fine_matches_exhaustive() {
        // min x1 + x2 s.t. ½(x1² + x2²) - ½ <= 0: value -√2.
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            quad(&[0.0, 0.0], &[1.0, 1.0], 0.0),
            vec![quad(&[1.0, 1.0], &[], -0.5)],
        );
        let mut cfg = OracleConfig::new(2.0, 1.0 / 1024.0);
        cfg.budget = 1000;
        let r = oracle_minimize_with(&p, &cfg).unwrap();
        assert!(!r.exhaustive);
        assert!((r.inf_estimate + 2f64.sqrt()).abs() < 1e-2, "{r:?}");
    }

    #[test]
    fn minimal_norm_level_point_cases() {
        let p = Problem::new(SpaceDesc::FiniteDim(2), quad(&[2.0, 2.0], &[], 0.0), vec![]);
        let cfg = OracleConfig::new(2.0, 0.5);
        assert_eq!(minimal_norm_level_point(&p, f64::INFINITY, &cfg).unwrap().norm(), 0.0);
        assert_eq!(minimal_norm_level_point(&p, -1.0, &cfg), Err(QpError::EmptyLevelSet));
        // f = x1: level a = -1 has minimal-norm point (-1, 0).
        let p = Problem::new(SpaceDesc::FiniteDim(2), quad(&[0.0, 0.0], &[1.0], 0.0), vec![]);
        let x = minimal_norm_level_point(&p, -1.0, &cfg).unwrap();
        assert_eq!(x.coords(), &[-1.0, 0.0]);
    }
}
