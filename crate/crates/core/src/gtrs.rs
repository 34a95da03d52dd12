//! Exact unconstrained quadratic minimization and the single-constraint
//! solver built on the S-lemma multiplier.
//!
//! For one convex constraint `g` with a strictly feasible point, `f` is
//! bounded below on `{g <= 0}` exactly when some `λ >= 0` makes `f + λ g`
//! bounded below on the whole space. The solver maximizes the concave dual
//! `φ(λ) = inf (f + λ g)` and then moves inside the argmin set of
//! `f + λ* g` until complementary slackness holds.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{QpError, Result};
use crate::model::{normalize_problem, psd_slack, Operator, Problem, QuadraticFunction, Vector};
use crate::spectral::{eig_sym, null_space, pseudo_solve};
use crate::tolerance;

const LAMBDA_CAP: f64 = 1e12;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum Argmin {
    Minimum { value: f64, point: Vector },
    /// Unit direction along which the function decreases without bound.
    Unbounded { ray: Vector },
}

/// Minimizes `q` over the whole space.
///
/// A negative tail or a negative block eigenvalue gives a curvature ray; a
/// linear part with mass in the kernel gives the linear ray `-P lin`.
/// Otherwise the minimum-norm stationary point is returned. Tail coordinates
/// of the minimizer vanish because `lin` is supported in the head.
pub fn unconstrained_argmin(q: &QuadraticFunction) -> Result<Argmin> {
    let k = q.op.head_dim().max(q.lin.dim());
    let op = q.op.padded(k);
    if op.tail < 0.0 {
        return Ok(Argmin::Unbounded {
            ray: Vector::basis(k + 1, k),
        });
    }
    if k == 0 {
        return Ok(Argmin::Minimum {
            value: q.constant,
            point: Vector::zeros(0),
        });
    }
    let eig = eig_sym(&op.block)?;
    if eig.values[0] < -psd_slack(&op.block) {
        let mut ray = Vector::from_dvector(&eig.vectors.column(0).into_owned());
        if q.lin.dot(&ray) > 0.0 {
            ray = -&ray;
        }
        return Ok(Argmin::Unbounded { ray });
    }
    let lin = q.lin.head(k);
    let (x, kernel_part) = pseudo_solve(&eig, &(-&lin));
    let kn = kernel_part.norm();
    if kn > tolerance::NULL_REL * lin.norm().max(1.0) {
        return Ok(Argmin::Unbounded {
            ray: Vector::from_dvector(&(kernel_part / kn)),
        });
    }
    let point = Vector::from_dvector(&x);
    Ok(Argmin::Minimum {
        value: q.eval(&point),
        point,
    })
}

fn block_is_psd(op: &Operator) -> Result<bool> {
    Ok(op.min_block_eigenvalue()? >= -psd_slack(&op.block))
}

/// Smallest `λ >= 0` with `T + λ T1` positive semidefinite.
///
/// The psd multipliers form a closed half-line, so the block threshold is
/// bracketed by doubling and then bisected. Fails with `NoPsdShift` when a
/// negative direction of `T` lies in the kernel of `T1`.
pub fn lambda_bar(t: &Operator, t1: &Operator) -> Result<f64> {
    let tail_req = if t.tail >= 0.0 {
        0.0
    } else if t1.tail > 0.0 {
        -t.tail / t1.tail
    } else {
        return Err(QpError::NoPsdShift);
    };
    if block_is_psd(t)? {
        return Ok(tail_req);
    }
    // Exact sign during bracketing so that λ̄ is not biased by the slack.
    let nonneg = |lam: f64| -> Result<bool> { Ok(t.combined(lam, t1).min_block_eigenvalue()? >= 0.0) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !nonneg(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > LAMBDA_CAP {
            return Err(QpError::NoPsdShift);
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if nonneg(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(tail_req))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    OnBoundary,
    RetractedFromInterior,
    RetractedFromExterior,
    Interior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Vector,
    pub value: f64,
    pub multiplier: f64,
    pub case_tag: CaseTag,
    pub kkt_residual: f64,
    pub retraction_ray: Option<Vector>,
    pub step: Option<f64>,
    /// `inf (f + λ* g)`, equal to `value` up to round-off.
    pub dual_value: f64,
}

/// Moves `x_star` along the kernel ray `v_bar` onto `{g1 = 0}`.
///
/// Because `T1 v_bar = 0`, `g1` is affine along the ray:
/// `g1(x* + t v) = g1(x*) + t <c1, v>`.
pub fn retract_to_boundary(x_star: &Vector, v_bar: &Vector, g1: &QuadraticFunction) -> Result<(Vector, f64)> {
    let scale = v_bar.norm().max(1.0) * g1.op.frobenius().max(g1.op.tail.abs()).max(1.0);
    if g1.op.apply(v_bar).norm() > tolerance::NULL_REL * scale {
        return Err(QpError::PreconditionViolation("T1 v_bar must vanish".into()));
    }
    let slope = g1.lin.dot(v_bar);
    if slope >= -1e-10 {
        return Err(QpError::PreconditionViolation("<c1, v_bar> must be negative".into()));
    }
    let gval = g1.eval(x_star);
    if gval == 0.0 {
        return Ok((x_star.clone(), 0.0));
    }
    let (point, step) = if gval < 0.0 {
        let t = gval / slope;
        (x_star.axpy(-t, v_bar), t)
    } else {
        let t = -gval / slope;
        (x_star.axpy(t, v_bar), t)
    };
    Ok((point, step))
}

/// Strictly feasible point of a convex constraint, from its exact minimum.
///
/// If `g` is unbounded below the base point `0` is pushed along the descent
/// ray until `g = -1`.
pub(crate) fn strict_point(g: &QuadraticFunction, index: usize) -> Result<Vector> {
    match unconstrained_argmin(g)? {
        Argmin::Minimum { value, point } => {
            if value <= -tolerance::WITNESS {
                Ok(point)
            } else {
                Err(QpError::NoSlaterPoint { index, min_value: value })
            }
        }
        Argmin::Unbounded { ray } => {
            let base = Vector::zeros(ray.dim());
            let t = descend_to_level(g, &base, &ray, -1.0)
                .ok_or(QpError::NoSlaterPoint { index, min_value: f64::NEG_INFINITY })?;
            Ok(base.axpy(t, &ray))
        }
    }
}

/// Smallest `t >= 0` with `q(base + t·dir) = level`, when `q` starts above
/// the level and eventually drops below it.
pub(crate) fn descend_to_level(q: &QuadraticFunction, base: &Vector, dir: &Vector, level: f64) -> Option<f64> {
    let a = 0.5 * q.op.form(dir);
    let b = q.gradient(base).dot(dir);
    let c = q.eval(base) - level;
    if c <= 0.0 {
        return Some(0.0);
    }
    smallest_positive_root(a, b, c)
}

/// Smallest positive root of `a t² + b t + c` (with `c > 0`).
pub(crate) fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let eps = 1e-14 * (a.abs() + b.abs()).max(1e-300);
    if a.abs() <= eps {
        return (b < 0.0).then(|| -c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable pair of roots.
    let qq = -0.5 * (b + b.signum() * sq);
    let mut roots = vec![];
    if qq != 0.0 {
        roots.push(qq / a);
        roots.push(c / qq);
    } else {
        roots.push(0.0);
    }
    roots.into_iter().filter(|&t| t > 0.0).reduce(f64::min)
}

fn project(basis: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    basis * (basis.transpose() * v)
}

/// Negative-curvature direction of `f` inside `ker T1`, oriented so that
/// `<c1, v> <= 0`. Such a direction is a feasible ray along which `f`
/// decreases quadratically.
fn curvature_ray_in_constraint_kernel(f: &QuadraticFunction, g: &QuadraticFunction, sequence: bool) -> Result<Option<Vector>> {
    let k = f.op.head_dim();
    if sequence && g.op.tail == 0.0 && f.op.tail < 0.0 {
        return Ok(Some(Vector::basis(k + 1, k)));
    }
    if k == 0 {
        return Ok(None);
    }
    let n = eig_sym(&g.op.block)?.kernel();
    if n.ncols() == 0 {
        return Ok(None);
    }
    let reduced = n.transpose() * &f.op.block * &n;
    let eig = eig_sym(&reduced)?;
    if eig.values[0] >= -psd_slack(&reduced) {
        return Ok(None);
    }
    let mut v = Vector::from_dvector(&(&n * eig.vectors.column(0)));
    if g.lin.dot(&v) > 0.0 {
        v = -&v;
    }
    Ok(Some(v))
}

struct Stationary {
    x: Vector,
    consistent: bool,
}

fn stationary_point(f: &QuadraticFunction, g: &QuadraticFunction, lambda: f64) -> Result<(Stationary, QuadraticFunction)> {
    let l = f.combined(lambda, g);
    let k = l.op.head_dim();
    if k == 0 {
        return Ok((Stationary { x: Vector::zeros(0), consistent: true }, l));
    }
    let eig = eig_sym(&l.op.block)?;
    let lin = l.lin.head(k);
    let (x, kp) = pseudo_solve(&eig, &(-&lin));
    let consistent = kp.norm() <= tolerance::NULL_REL * lin.norm().max(1.0);
    Ok((Stationary { x: Vector::from_dvector(&x), consistent }, l))
}

/// Solves `min f` subject to one convex quadratic constraint.
///
/// Requires a strictly feasible point and an objective bounded below on the
/// feasible set; unboundedness is reported as `NotBoundedBelow` with a ray
/// when one can be constructed.
pub fn solve_single_constraint(p: &Problem) -> Result<Solution> {
    let p = normalize_problem(p)?;
    if p.m() != 1 {
        return Err(QpError::PreconditionViolation(format!(
            "single-constraint solver needs m = 1, got m = {}",
            p.m()
        )));
    }
    let f = &p.objective;
    let g = &p.constraints[0];
    let sequence = p.space.is_sequence();
    let k = p.head_dim();

    // Common kernel K0 = ker T ∩ ker T1 on the head.
    let k0 = if k == 0 {
        DMatrix::zeros(0, 0)
    } else {
        let n1 = eig_sym(&g.op.block)?.kernel();
        if n1.ncols() == 0 {
            DMatrix::zeros(k, 0)
        } else {
            &n1 * null_space(&(&f.op.block * &n1))
        }
    };
    let c = f.lin.head(k);
    let c1 = g.lin.head(k);
    let pc = project(&k0, &c);
    let pc1 = project(&k0, &c1);
    let vec_tol = tolerance::NULL_REL * c.norm().max(c1.norm()).max(1.0);

    let base = match unconstrained_argmin(g)? {
        Argmin::Minimum { value, point } => {
            if value > tolerance::FEASIBLE {
                return Err(QpError::InfeasibleProblem);
            }
            point
        }
        Argmin::Unbounded { .. } => strict_point(g, 0)?,
    };

    // f linear and decreasing along a kernel direction that keeps g fixed.
    if pc1.norm() <= vec_tol && pc.norm() > vec_tol {
        let ray = Vector::from_dvector(&(-&pc / pc.norm()));
        return Err(QpError::NotBoundedBelow { ray: Some(ray), base: Some(base) });
    }

    let slater = strict_point(g, 0)?;
    let lam_bar = match lambda_bar(&f.op, &g.op) {
        Ok(l) => l,
        Err(QpError::NoPsdShift) => {
            return match curvature_ray_in_constraint_kernel(f, g, sequence)? {
                Some(ray) => Err(QpError::NotBoundedBelow { ray: Some(ray), base: Some(slater) }),
                None => Err(QpError::NoPsdShift),
            };
        }
        Err(e) => return Err(e),
    };

    let lam_star = if pc1.norm() > vec_tol {
        // Only one multiplier keeps the linear part orthogonal to K0.
        let lam_f = -pc.dot(&pc1) / pc1.norm_squared();
        let residual = (&pc + &pc1 * lam_f).norm();
        let floor = lam_bar - 1e-9 * lam_bar.max(1.0);
        if residual > vec_tol || lam_f < floor {
            let ray = if residual > vec_tol {
                let r = &pc - &pc1 * (pc.dot(&pc1) / pc1.norm_squared());
                Some(Vector::from_dvector(&(-&r / r.norm())))
            } else if lam_f < 0.0 {
                Some(Vector::from_dvector(&(-&pc1 / pc1.norm())))
            } else {
                None
            };
            return Err(QpError::NotBoundedBelow { ray, base: Some(slater) });
        }
        lam_f.max(lam_bar)
    } else {
        search_multiplier(f, g, lam_bar)?
    };

    finish_at_multiplier(f, g, lam_star, sequence)
}

/// Root of the nonincreasing map `λ -> g(x_λ)` on `[λ̄, ∞)`, or `λ̄` itself
/// when the constraint is already satisfied there.
fn search_multiplier(f: &QuadraticFunction, g: &QuadraticFunction, lam_bar: f64) -> Result<f64> {
    let (st, _) = stationary_point(f, g, lam_bar)?;
    let tol = boundary_tol(g, &st.x);
    if st.consistent && g.eval(&st.x) <= tol {
        return Ok(lam_bar);
    }
    let value_at = |lam: f64| -> Result<f64> {
        let (st, _) = stationary_point(f, g, lam)?;
        Ok(if st.consistent { g.eval(&st.x) } else { f64::INFINITY })
    };
    let mut lo = lam_bar;
    let mut step = lam_bar.max(1.0);
    let mut hi = lam_bar + step;
    while value_at(hi)? > 0.0 {
        lo = hi;
        step *= 2.0;
        hi = lam_bar + step;
        if hi > LAMBDA_CAP {
            return Err(QpError::ConvergenceFailure { sweeps: BISECTION_STEPS });
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if value_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn boundary_tol(g: &QuadraticFunction, x: &Vector) -> f64 {
    tolerance::WITNESS * g.constant.abs().max(x.norm_sq()).max(1.0)
}

/// Reduced data of `g` on the affine set `x + span(zs)`:
/// `g(x + Σ y_a z_a) = ½ yᵀ M y + hᵀ y + g(x)`.
fn restrict(g: &QuadraticFunction, x: &Vector, zs: &[Vector]) -> QuadraticFunction {
    let r = zs.len();
    let tz: Vec<Vector> = zs.iter().map(|z| g.op.apply(z)).collect();
    let m = DMatrix::from_fn(r, r, |a, b| 0.5 * (zs[a].dot(&tz[b]) + zs[b].dot(&tz[a])));
    let grad = g.gradient(x);
    let h: Vec<f64> = zs.iter().map(|z| grad.dot(z)).collect();
    QuadraticFunction::new(Operator::new(m, 0.0), Vector::new(h), g.eval(x))
}

fn combine(zs: &[Vector], y: &Vector) -> Vector {
    zs.iter()
        .enumerate()
        .fold(Vector::default(), |acc, (a, z)| acc.axpy(y.get(a), z))
}

fn finish_at_multiplier(f: &QuadraticFunction, g: &QuadraticFunction, lam: f64, sequence: bool) -> Result<Solution> {
    let (st, lag) = stationary_point(f, g, lam)?;
    let x_star = st.x;
    let gval = g.eval(&x_star);
    let tol = boundary_tol(g, &x_star);
    let dual_value = lag.eval(&x_star);

    // Directions spanning the argmin set of the Lagrangian.
    let k = lag.op.head_dim();
    let mut zs: Vec<Vector> = Vec::new();
    if k > 0 {
        let eig = eig_sym(&lag.op.block)?;
        let kernel = eig.kernel();
        for j in 0..kernel.ncols() {
            zs.push(Vector::from_dvector(&kernel.column(j).into_owned()));
        }
    }
    let tail_scale = f.op.tail.abs().max(g.op.tail.abs()).max(1.0);
    if sequence && lag.op.tail.abs() <= 1e-12 * tail_scale && g.op.tail > 0.0 {
        zs.push(Vector::basis(k + 1, k));
    }

    let finish = |point: Vector, tag: CaseTag, ray: Option<Vector>, step: Option<f64>| -> Solution {
        let kkt_residual = lag.gradient(&point).norm();
        Solution {
            value: f.eval(&point),
            point,
            multiplier: lam,
            case_tag: tag,
            kkt_residual,
            retraction_ray: ray,
            step,
            dual_value,
        }
    };

    if gval.abs() <= tol || (lam == 0.0 && gval < 0.0) {
        let tag = if lam == 0.0 { CaseTag::Interior } else { CaseTag::OnBoundary };
        return Ok(finish(x_star, tag, None, None));
    }

    let reduced = restrict(g, &x_star, &zs);
    if gval < 0.0 {
        // Hard case: a kernel direction with positive constraint curvature
        // reaches the boundary without changing the Lagrangian.
        if !zs.is_empty() {
            let eig = eig_sym(&reduced.op.block)?;
            let top = eig.dim() - 1;
            if eig.values[top] > tolerance::NULL_REL * reduced.op.block.norm().max(1.0) {
                let y = Vector::from_dvector(&eig.vectors.column(top).into_owned());
                let z = combine(&zs, &y);
                let z = z.scaled(1.0 / z.norm());
                let a = 0.5 * g.op.form(&z);
                let b = g.gradient(&x_star).dot(&z);
                // a s² + b s + gval = 0 with gval < 0 has a positive root.
                let s = (-b + (b * b - 4.0 * a * gval).sqrt()) / (2.0 * a);
                return Ok(finish(x_star.axpy(s, &z), CaseTag::OnBoundary, Some(z), Some(s)));
            }
            // Constraint affine on the argmin set: retract along -P c1.
            let h = &reduced.lin;
            if h.norm() > tolerance::NULL_REL * g.lin.norm().max(1.0) {
                let v = combine(&zs, h).scaled(-1.0);
                let v_bar = v.scaled(1.0 / v.norm());
                let (point, step) = retract_to_boundary(&x_star, &v_bar, g)?;
                return Ok(finish(point, CaseTag::RetractedFromInterior, Some(v_bar), Some(step)));
            }
        }
        return Err(QpError::HardCaseNoRay);
    }

    // g(x*) > 0: find a point of the argmin set inside {g <= 0} and take
    // the boundary crossing on the segment towards it.
    let dir = match unconstrained_argmin(&reduced)? {
        Argmin::Minimum { value, point } => {
            if value > tol {
                return Err(QpError::HardCaseNoRay);
            }
            combine(&zs, &point)
        }
        Argmin::Unbounded { ray } => combine(&zs, &ray),
    };
    let dn = dir.norm();
    if dn == 0.0 {
        return Err(QpError::HardCaseNoRay);
    }
    let unit = dir.scaled(1.0 / dn);
    if g.op.apply(&unit).norm() <= tolerance::NULL_REL * g.op.frobenius().max(1.0) && g.lin.dot(&unit) < -1e-10 {
        let (point, step) = retract_to_boundary(&x_star, &unit, g)?;
        return Ok(finish(point, CaseTag::RetractedFromExterior, Some(unit), Some(step)));
    }
    let a = 0.5 * g.op.form(&unit);
    let b = g.gradient(&x_star).dot(&unit);
    let s = smallest_positive_root(a, b, gval).ok_or(QpError::HardCaseNoRay)?;
    Ok(finish(x_star.axpy(s, &unit), CaseTag::RetractedFromExterior, Some(unit), Some(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpaceDesc;

    fn quad(diag: &[f64], lin: &[f64], constant: f64) -> QuadraticFunction {
        QuadraticFunction::new(Operator::diagonal(diag, 0.0), Vector::new(lin.to_vec()), constant)
    }

    fn finite(n: usize, f: QuadraticFunction, gs: Vec<QuadraticFunction>) -> Problem {
        Problem::new(SpaceDesc::FiniteDim(n), f, gs)
    }

    #[test]
    fn argmin_of_norm_squared() {
        let q = QuadraticFunction::new(Operator::scalar(1.0), Vector::default(), 0.0);
        assert_eq!(
            unconstrained_argmin(&q).unwrap(),
            Argmin::Minimum { value: 0.0, point: Vector::zeros(0) }
        );
    }

    #[test]
    fn argmin_one_dimensional() {
        match unconstrained_argmin(&quad(&[1.0], &[-2.0], 0.0)).unwrap() {
            Argmin::Minimum { value, point } => {
                assert!((point[0] - 2.0).abs() < 1e-12);
                assert!((value + 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn argmin_linear_direction_in_kernel() {
        match unconstrained_argmin(&quad(&[0.0], &[1.0], 0.0)).unwrap() {
            Argmin::Unbounded { ray } => assert_eq!(ray.coords(), &[-1.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn argmin_negative_tail_escapes_beyond_head() {
        let q = QuadraticFunction::new(Operator::diagonal(&[1.0], -1.0), Vector::default(), 0.0);
        match unconstrained_argmin(&q).unwrap() {
            Argmin::Unbounded { ray } => assert_eq!(ray.coords(), &[0.0, 1.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lambda_bar_examples() {
        let l = lambda_bar(&Operator::diagonal(&[-1.0], 0.0), &Operator::diagonal(&[1.0], 0.0)).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        assert_eq!(lambda_bar(&Operator::diagonal(&[2.0], 0.0), &Operator::diagonal(&[1.0], 0.0)).unwrap(), 0.0);
        assert_eq!(
            lambda_bar(&Operator::diagonal(&[-1.0, 1.0], 0.0), &Operator::diagonal(&[0.0, 1.0], 0.0)),
            Err(QpError::NoPsdShift)
        );
    }

    #[test]
    fn trust_region_hard_case() {
        // min ½(-x1² + x2²) s.t. ½|x|² - ½ <= 0
        let p = finite(2, quad(&[-1.0, 1.0], &[], 0.0), vec![quad(&[1.0, 1.0], &[], -0.5)]);
        let s = solve_single_constraint(&p).unwrap();
        assert!((s.value + 0.5).abs() < 1e-12);
        assert!((s.multiplier - 1.0).abs() < 1e-12);
        assert_eq!(s.case_tag, CaseTag::OnBoundary);
        assert!((s.point[0].abs() - 1.0).abs() < 1e-12);
        assert!(s.kkt_residual < 1e-9);
    }

    #[test]
    fn parabola_constraint_with_forced_multiplier() {
        // min -x1² + 2 x2 s.t. ½x1² - x2 <= 0: value 0, multiplier 2
        let p = finite(2, quad(&[-2.0, 0.0], &[0.0, 2.0], 0.0), vec![quad(&[1.0, 0.0], &[0.0, -1.0], 0.0)]);
        let s = solve_single_constraint(&p).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.multiplier - 2.0).abs() < 1e-12);
        assert!(s.kkt_residual < 1e-9);
    }

    #[test]
    fn parabola_constraint_unbounded_without_ray() {
        // min -x1² + x2 s.t. ½x1² - x2 <= 0 decreases along the parabola.
        let p = finite(2, quad(&[-2.0, 0.0], &[0.0, 1.0], 0.0), vec![quad(&[1.0, 0.0], &[0.0, -1.0], 0.0)]);
        assert!(matches!(
            solve_single_constraint(&p),
            Err(QpError::NotBoundedBelow { ray: None, .. })
        ));
    }

    #[test]
    fn linear_objective_over_flat_constraint() {
        // min x1 s.t. ½x2² <= 0
        let p = finite(2, quad(&[0.0, 0.0], &[1.0, 0.0], 0.0), vec![quad(&[0.0, 1.0], &[], 0.0)]);
        match solve_single_constraint(&p) {
            Err(QpError::NotBoundedBelow { ray: Some(ray), .. }) => {
                assert!((ray[0] + 1.0).abs() < 1e-12 && ray[1].abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interior_minimizer() {
        // min ½(x1 - 1)² - ½ s.t. ½x1² - 2 <= 0: x = 1 inside
        let p = finite(1, quad(&[1.0], &[-1.0], 0.0), vec![quad(&[1.0], &[], -2.0)]);
        let s = solve_single_constraint(&p).unwrap();
        assert_eq!(s.case_tag, CaseTag::Interior);
        assert_eq!(s.multiplier, 0.0);
        assert!((s.point[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exterior_unconstrained_minimizer() {
        // min ½(x1 - 3)² s.t. ½x1² - ½ <= 0 -> x = 1, λ = 2
        let p = finite(1, quad(&[1.0], &[-3.0], 0.0), vec![quad(&[1.0], &[], -0.5)]);
        let s = solve_single_constraint(&p).unwrap();
        assert_eq!(s.case_tag, CaseTag::OnBoundary);
        assert!((s.point[0] - 1.0).abs() < 1e-9);
        assert!((s.multiplier - 2.0).abs() < 1e-9);
    }

    #[test]
    fn retraction_examples() {
        // g = <c1, x> + α with c1 = (-1, 0), T1 = diag(0, 1)
        let g = quad(&[0.0, 1.0], &[-1.0, 0.0], 0.0);
        let v = Vector::new(vec![1.0, 0.0]);
        let x = Vector::new(vec![0.5, 0.0]);
        assert!((g.eval(&x) + 0.5).abs() < 1e-15);
        let (pt, t) = retract_to_boundary(&x, &v, &g).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        assert!(g.eval(&pt).abs() < 1e-15);
        let on = Vector::new(vec![0.0, 0.0]);
        assert_eq!(retract_to_boundary(&on, &v, &g).unwrap(), (on.clone(), 0.0));
        let bad = Vector::new(vec![0.0, 1.0]);
        assert!(matches!(retract_to_boundary(&x, &bad, &g), Err(QpError::PreconditionViolation(_))));
    }

    #[test]
    fn no_slater_point_detected() {
        let p = finite(1, quad(&[1.0], &[], 0.0), vec![quad(&[1.0], &[], 0.0)]);
        assert!(matches!(solve_single_constraint(&p), Err(QpError::NoSlaterPoint { .. })));
    }
}
