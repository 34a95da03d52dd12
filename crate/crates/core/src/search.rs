//! Feasible points, local refinement and ray verification.
//!
//! These routines produce and polish candidate points; none of them is a
//! certificate on its own. Callers re-check every point they report.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::gtrs::strict_point;
use crate::model::{Problem, QuadraticFunction, Vector};
use crate::tolerance;

const PENALTY_ITERS: usize = 200;
const NEWTON_ITERS: usize = 60;
const MAX_ACTIVE: usize = 8;

fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.ncols() == 0 {
        return Some(DVector::zeros(0));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    svd.solve(b, 1e-12 * smax.max(1e-300)).ok()
}

fn to_head(x: &Vector, k: usize) -> DVector<f64> {
    x.head(k)
}

/// A point with `max_i g_i <= 1e-9`, or `None` if none was found.
///
/// Tries the origin and the exact minimizers of each constraint first, then
/// runs a Gauss-Newton method on `Σ max(g_i + δ, 0)²`, first with a margin
/// `δ > 0` and then with `δ = 0`.
pub fn find_feasible_point(p: &Problem) -> Result<Option<Vector>> {
    let k = p.head_dim();
    let mut starts = vec![Vector::zeros(k)];
    let mut stricts = Vec::new();
    for (i, g) in p.constraints.iter().enumerate() {
        if let Ok(x) = strict_point(g, i) {
            stricts.push(x.padded(k));
        }
    }
    if !stricts.is_empty() {
        let mean = stricts
            .iter()
            .fold(Vector::zeros(k), |acc, x| acc.axpy(1.0 / stricts.len() as f64, x));
        starts.push(mean);
    }
    starts.extend(stricts);

    let pick = |cands: &[Vector]| {
        cands
            .iter()
            .filter(|x| p.max_violation(x) <= tolerance::FEASIBLE)
            .min_by(|a, b| p.max_violation(a).total_cmp(&p.max_violation(b)))
            .cloned()
    };
    if let Some(x) = pick(&starts) {
        return Ok(Some(x));
    }
    let mut found = Vec::new();
    for s in &starts {
        let mut x = s.clone();
        for delta in [1e-3, 0.0] {
            x = penalty_descent(p, &x, delta);
        }
        found.push(x);
    }
    Ok(pick(&found))
}

fn penalty(p: &Problem, x: &Vector, delta: f64) -> f64 {
    p.constraints.iter().map(|g| (g.eval(x) + delta).max(0.0).powi(2)).sum()
}

fn penalty_descent(p: &Problem, x0: &Vector, delta: f64) -> Vector {
    let k = p.head_dim();
    let mut x = x0.padded(k);
    for _ in 0..PENALTY_ITERS {
        let active: Vec<&QuadraticFunction> = p.constraints.iter().filter(|g| g.eval(&x) + delta > 0.0).collect();
        if active.is_empty() {
            break;
        }
        let r = DVector::from_iterator(active.len(), active.iter().map(|g| g.eval(&x) + delta));
        let j = DMatrix::from_fn(active.len(), k, |i, c| active[i].gradient(&x).get(c));
        let Some(step) = lstsq(&j, &(-&r)) else { break };
        let step = Vector::from_dvector(&step);
        let base = penalty(p, &x, delta);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial = x.axpy(alpha, &step);
            if penalty(p, &trial, delta) < base {
                x = trial;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    x
}

/// Newton refinement on the KKT system of `min obj` over `p`'s feasible set.
///
/// Every subset of the constraints that are nearly active at `x0` (within
/// `active_tol`) is tried as an active set. The best feasible point among
/// the converged ones and `x0` itself is returned.
pub fn kkt_refine(p: &Problem, obj: &QuadraticFunction, x0: &Vector, active_tol: f64) -> Vector {
    let k = p.head_dim();
    let x0 = x0.padded(k);
    let mut near: Vec<usize> = (0..p.m()).filter(|&i| p.constraints[i].eval(&x0) >= -active_tol).collect();
    near.sort_by(|&a, &b| p.constraints[b].eval(&x0).total_cmp(&p.constraints[a].eval(&x0)));
    near.truncate(MAX_ACTIVE);

    let mut best = x0.clone();
    let mut best_val = if p.max_violation(&x0) <= tolerance::FEASIBLE { obj.eval(&x0) } else { f64::INFINITY };
    for mask in 0..(1usize << near.len()) {
        let set: Vec<usize> = (0..near.len()).filter(|b| mask >> b & 1 == 1).map(|b| near[b]).collect();
        if let Some(x) = newton_kkt(p, obj, &x0, &set) {
            if p.max_violation(&x) <= tolerance::FEASIBLE {
                let v = obj.eval(&x);
                if v < best_val {
                    best_val = v;
                    best = x;
                }
            }
        }
    }
    best
}

fn newton_kkt(p: &Problem, obj: &QuadraticFunction, x0: &Vector, set: &[usize]) -> Option<Vector> {
    let k = p.head_dim();
    let s = set.len();
    let gs: Vec<&QuadraticFunction> = set.iter().map(|&i| &p.constraints[i]).collect();
    let mut x = to_head(x0, k);
    let grad_at = |q: &QuadraticFunction, x: &DVector<f64>| to_head(&q.gradient(&Vector::from_dvector(x)), k);
    // Least-squares multiplier estimate.
    let jac = |x: &DVector<f64>| {
        let mut j = DMatrix::zeros(k, s);
        for (c, g) in gs.iter().enumerate() {
            j.set_column(c, &grad_at(g, x));
        }
        j
    };
    let mut mu = lstsq(&jac(&x), &(-grad_at(obj, &x))).unwrap_or_else(|| DVector::zeros(s));
    let scale = grad_at(obj, &x).norm().max(1.0);
    for _ in 0..NEWTON_ITERS {
        let xv = Vector::from_dvector(&x);
        let j = jac(&x);
        let r1 = grad_at(obj, &x) + &j * &mu;
        let r2 = DVector::from_iterator(s, gs.iter().map(|g| g.eval(&xv)));
        let res = (r1.norm_squared() + r2.norm_squared()).sqrt();
        if res <= 1e-13 * scale {
            return Some(xv);
        }
        let mut h = obj.op.block.clone();
        for (c, g) in gs.iter().enumerate() {
            h += &g.op.block * mu[c];
        }
        let mut kkt = DMatrix::zeros(k + s, k + s);
        kkt.view_mut((0, 0), (k, k)).copy_from(&h);
        kkt.view_mut((0, k), (k, s)).copy_from(&j);
        kkt.view_mut((k, 0), (s, k)).copy_from(&j.transpose());
        let mut rhs = DVector::zeros(k + s);
        rhs.rows_mut(0, k).copy_from(&(-r1));
        rhs.rows_mut(k, s).copy_from(&(-r2));
        let step = lstsq(&kkt, &rhs)?;
        if !step.iter().all(|v| v.is_finite()) {
            return None;
        }
        x += step.rows(0, k);
        mu += step.rows(k, s);
    }
    let xv = Vector::from_dvector(&x);
    let j = jac(&x);
    let r1 = grad_at(obj, &x) + &j * &mu;
    let r2: f64 = gs.iter().map(|g| g.eval(&xv).powi(2)).sum();
    ((r1.norm_squared() + r2).sqrt() <= 1e-9 * scale).then_some(xv)
}

/// Feasible-only compass search on `obj`, halving the step down to
/// `min_step`.
pub fn pattern_search(p: &Problem, obj: &QuadraticFunction, x0: &Vector, step0: f64, min_step: f64) -> Vector {
    let k = p.head_dim();
    let mut x = x0.padded(k);
    if p.max_violation(&x) > tolerance::FEASIBLE {
        return x;
    }
    let mut dirs: Vec<Vector> = Vec::new();
    for i in 0..k {
        dirs.push(Vector::basis(k, i));
        dirs.push(Vector::basis(k, i).scaled(-1.0));
    }
    if k <= 12 {
        for i in 0..k {
            for j in i + 1..k {
                for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut v = Vector::zeros(k);
                    v.set(i, a);
                    v.set(j, b);
                    dirs.push(v.scaled(std::f64::consts::FRAC_1_SQRT_2));
                }
            }
        }
    }
    let mut fx = obj.eval(&x);
    let mut step = step0;
    let mut evals = 0usize;
    while step >= min_step && evals < 200_000 {
        let mut best: Option<(Vector, f64)> = None;
        for d in &dirs {
            let trial = x.axpy(step, d);
            evals += 1;
            if p.max_violation(&trial) > tolerance::FEASIBLE {
                continue;
            }
            let ft = obj.eval(&trial);
            if ft < best.as_ref().map_or(fx, |b| b.1) {
                best = Some((trial, ft));
            }
        }
        match best {
            Some((t, ft)) => {
                x = t;
                fx = ft;
            }
            None => step *= 0.5,
        }
    }
    x
}

/// Re-verifies that `base + t·ray` stays feasible and drives `f` to `-inf`.
///
/// Feasibility (within `1e-6`) and strict decrease are checked at
/// `t ∈ {1, 10, 100, 1000}`; unboundedness itself is read from the exact
/// quadratic profile along the ray.
pub fn verify_unbounded_ray(p: &Problem, base: &Vector, ray: &Vector) -> bool {
    let rn = ray.norm();
    if !(rn > 0.0) || !base.is_finite() || !ray.is_finite() {
        return false;
    }
    let f = &p.objective;
    let curv_tol = 1e-9 * rn * rn * f.op.frobenius().max(f.op.tail.abs()).max(1.0);
    let curv = f.op.form(ray);
    let slope = f.gradient(base).dot(ray);
    let descends = curv < -curv_tol || (curv <= curv_tol && slope < -1e-9 * rn * f.gradient(base).norm().max(1.0));
    if !descends {
        return false;
    }
    for g in &p.constraints {
        let gc = g.op.form(ray);
        let gs = g.gradient(base).dot(ray);
        let scale = g.op.frobenius().max(g.op.tail.abs()).max(1.0) * rn * rn;
        if gc > 1e-12 * scale || (gc.abs() <= 1e-12 * scale && gs > 1e-9 * rn) {
            return false;
        }
    }
    let mut prev = f.eval(base);
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let x = base.axpy(t, ray);
        if p.max_violation(&x) > tolerance::VERIFY {
            return false;
        }
        let v = f.eval(&x);
        if !(v < prev) {
            return false;
        }
        prev = v;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Operator, SpaceDesc};

    fn quad(diag: &[f64], lin: &[f64], constant: f64) -> QuadraticFunction {
        QuadraticFunction::new(Operator::diagonal(diag, 0.0), Vector::new(lin.to_vec()), constant)
    }

    #[test]
    fn feasible_point_of_shifted_ball_intersection() {
        // (x-2)² <= 1 and (y+3)² <= 1
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            quad(&[0.0, 0.0], &[], 0.0),
            vec![quad(&[2.0, 0.0], &[-4.0, 0.0], 3.0), quad(&[0.0, 2.0], &[0.0, 6.0], 8.0)],
        );
        let x = find_feasible_point(&p).unwrap().unwrap();
        assert!(p.max_violation(&x) <= 1e-9);
    }

    #[test]
    fn infeasible_problem_yields_none() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(1),
            quad(&[0.0], &[], 0.0),
            vec![quad(&[0.0], &[1.0], 1.0), quad(&[0.0], &[-1.0], 1.0)],
        );
        assert!(find_feasible_point(&p).unwrap().is_none());
    }

    #[test]
    fn kkt_refine_lands_on_boundary_minimum() {
        // min x + y on the unit disc: (-1, -1)/√2
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            quad(&[0.0, 0.0], &[1.0, 1.0], 0.0),
            vec![quad(&[1.0, 1.0], &[], -0.5)],
        );
        let x = kkt_refine(&p, &p.objective, &Vector::new(vec![-0.7, -0.69]), 0.1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x[0] + r).abs() < 1e-10 && (x[1] + r).abs() < 1e-10);
    }

    #[test]
    fn ray_verification() {
        let p = Problem::new(SpaceDesc::FiniteDim(2), quad(&[0.0, 1.0], &[1.0, 0.0], 0.0), vec![quad(&[0.0, 1.0], &[], 0.0)]);
        let base = Vector::zeros(2);
        assert!(verify_unbounded_ray(&p, &base, &Vector::new(vec![-1.0, 0.0])));
        assert!(!verify_unbounded_ray(&p, &base, &Vector::new(vec![1.0, 0.0])));
        assert!(!verify_unbounded_ray(&p, &base, &Vector::new(vec![-1.0, 1.0])));
    }
}
