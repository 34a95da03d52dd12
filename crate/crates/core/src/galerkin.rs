//! Galerkin truncations and attainment diagnostics.
//!
//! A sequence-space problem restricted to its first `n` coordinates is an
//! ordinary finite-dimensional QP. Zero-padding embeds each truncation's
//! feasible set into the next one, so the truncated infima are
//! nonincreasing in `n`. Minimizers whose norm keeps growing while the
//! infima settle are the typical footprint of an infimum that is not
//! attained.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::certify::best_feasible_point;
use crate::error::{QpError, Result};
use crate::gtrs::{solve_single_constraint, unconstrained_argmin, Argmin};
use crate::model::{prepare_problem, Operator, Problem, QuadraticFunction, SpaceDesc, Vector};
use crate::search::find_feasible_point;

/// Levels compared when testing that the infima have settled.
pub const CAUCHY_WINDOW: usize = 3;
pub const CAUCHY_TOL: f64 = 1e-2;
/// Minimizer norm growth (last over first level) read as escape to infinity.
pub const GROWTH_FACTOR: f64 = 2.0;
/// Growth below this over the window counts as a norm plateau.
const PLATEAU_FACTOR: f64 = 1.25;

/// Leading `n x n` section of a sequence-space problem.
pub fn truncate(p: &Problem, n: usize) -> Result<Problem> {
    if p.space != SpaceDesc::SequenceSpace {
        return Err(QpError::InvalidDimension("only sequence-space problems can be truncated".into()));
    }
    let p = prepare_problem(p)?;
    if n < p.head_dim() || n == 0 {
        return Err(QpError::InvalidDimension(format!(
            "truncation level {n} is below the head dimension {}",
            p.head_dim()
        )));
    }
    let cut = |q: &QuadraticFunction| {
        let op = q.op.padded(n);
        QuadraticFunction::new(Operator::new(op.block, 0.0), q.lin.padded(n), q.constant)
    };
    Ok(Problem::new(
        SpaceDesc::FiniteDim(n),
        cut(&p.objective),
        p.constraints.iter().map(cut).collect(),
    ))
}

/// Midpoint discretization of `min ½∫ t x(t)² dt` subject to
/// `1 - ∫ x(t)/√t dt <= 0` on `[0, 1]`, with nodes `t_j = (j - ½)/n` and
/// weight `1/n`.
pub fn discretized_multiplication_problem(n: usize) -> Result<Problem> {
    if n < 2 {
        return Err(QpError::InvalidDimension("discretization needs n >= 2".into()));
    }
    let h = 1.0 / n as f64;
    let t: Vec<f64> = (1..=n).map(|j| (j as f64 - 0.5) * h).collect();
    let block = DMatrix::from_diagonal(&t.iter().map(|tj| tj * h).collect::<Vec<_>>().into());
    let lin = Vector::new(t.iter().map(|tj| -h / tj.sqrt()).collect());
    Ok(Problem::new(
        SpaceDesc::FiniteDim(n),
        QuadraticFunction::new(Operator::new(block, 0.0), Vector::zeros(n), 0.0),
        vec![QuadraticFunction::new(Operator::zero(n), lin, 1.0)],
    ))
}

/// `∫ t x_n(t)² dt` for `x_n = √n` on `[1/n², 1/n]` and zero elsewhere,
/// a feasible sequence whose values tend to zero.
pub fn multiplication_witness_value(n: u32) -> f64 {
    let n = n as f64;
    0.5 * n * (1.0 / (n * n) - 1.0 / (n * n * n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Diagnosis {
    AttainmentLikely,
    NonAttainmentSignature,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub levels: Vec<usize>,
    pub inf_values: Vec<f64>,
    pub minimizer_norms: Vec<f64>,
    pub diagnosis: Diagnosis,
    pub notes: Vec<String>,
}

/// Sweeps the truncations of a sequence-space problem.
pub fn sweep(p: &Problem, levels: &[usize]) -> Result<SweepReport> {
    sweep_with(levels, |n| truncate(p, n))
}

/// Sweeps a family of finite problems, one per level. Each level is warm
/// started from the zero-padded minimizer of the previous one, which keeps
/// the recorded infima nonincreasing whenever the family nests.
pub fn sweep_with(levels: &[usize], mut build: impl FnMut(usize) -> Result<Problem>) -> Result<SweepReport> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QpError::PreconditionViolation("levels must be strictly ascending".into()));
    }
    let mut inf_values = Vec::with_capacity(levels.len());
    let mut minimizer_norms = Vec::with_capacity(levels.len());
    let mut notes = Vec::new();
    let mut prev: Option<Vector> = None;
    for &n in levels {
        let p = build(n)?;
        let (x, v) = solve_level(&p, prev.as_ref())?;
        if let Some(warm) = prev.as_ref().map(|x| x.padded(p.head_dim())) {
            let wv = p.objective.eval(&warm);
            if p.max_violation(&warm) <= 1e-9 && wv < v - 1e-12 * v.abs().max(1.0) {
                notes.push(format!("level {n}: warm start beat the level solver ({wv} < {v})"));
            }
        }
        minimizer_norms.push(x.norm());
        inf_values.push(v);
        prev = Some(x);
    }
    let diagnosis = diagnose(&inf_values, &minimizer_norms);
    notes.push(format!(
        "diagnosis is heuristic (Cauchy window {CAUCHY_WINDOW}, tolerance {CAUCHY_TOL}, norm growth factor {GROWTH_FACTOR}); it is not a proof"
    ));
    Ok(SweepReport {
        levels: levels.to_vec(),
        inf_values,
        minimizer_norms,
        diagnosis,
        notes,
    })
}

fn solve_level(p: &Problem, warm: Option<&Vector>) -> Result<(Vector, f64)> {
    let p = prepare_problem(p)?;
    let k = p.head_dim();
    let mut best: Option<(Vector, f64)> = None;
    let offer = |x: Vector, best: &mut Option<(Vector, f64)>| {
        if p.max_violation(&x) <= 1e-9 {
            let v = p.objective.eval(&x);
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                *best = Some((x, v));
            }
        }
    };
    if let Some(w) = warm {
        offer(w.padded(k), &mut best);
    }
    match p.m() {
        0 => match unconstrained_argmin(&p.objective)? {
            Argmin::Minimum { point, .. } => offer(point, &mut best),
            Argmin::Unbounded { .. } => return Err(QpError::NotBoundedBelow { ray: None, base: None }),
        },
        1 => match solve_single_constraint(&p) {
            Ok(sol) => offer(sol.point, &mut best),
            Err(QpError::NotBoundedBelow { ray, base }) => return Err(QpError::NotBoundedBelow { ray, base }),
            Err(_) => {}
        },
        _ => {}
    }
    if best.is_none() || p.m() >= 2 {
        let x_feas = find_feasible_point(&p)?.ok_or(QpError::InfeasibleProblem)?;
        let extra: Vec<Vector> = best.iter().map(|(x, _)| x.clone()).collect();
        if let Some((x, _)) = best_feasible_point(&p, &x_feas, &extra)? {
            offer(x, &mut best);
        }
    }
    best.ok_or(QpError::InfeasibleProblem)
}

fn diagnose(values: &[f64], norms: &[f64]) -> Diagnosis {
    let n = values.len();
    if n < CAUCHY_WINDOW {
        return Diagnosis::Inconclusive;
    }
    let window = &values[n - CAUCHY_WINDOW..];
    let spread = window.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - window.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(spread <= CAUCHY_TOL) {
        return Diagnosis::Inconclusive;
    }
    let first = norms[0];
    let last = norms[n - 1];
    let increasing = norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    if increasing && last > 1e-12 && last >= GROWTH_FACTOR * first {
        return Diagnosis::NonAttainmentSignature;
    }
    let tail = &norms[n - CAUCHY_WINDOW..];
    let lo = tail.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = tail.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if hi <= PLATEAU_FACTOR * lo || hi <= 1e-12 {
        Diagnosis::AttainmentLikely
    } else {
        Diagnosis::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rules() {
        let p = Problem::new(
            SpaceDesc::SequenceSpace,
            QuadraticFunction::new(Operator::diagonal(&[-1.0, 2.0], 3.0), Vector::new(vec![1.0]), 0.0),
            vec![],
        );
        let t = truncate(&p, 4).unwrap();
        assert_eq!(t.space, SpaceDesc::FiniteDim(4));
        assert_eq!(t.objective.op.block, DMatrix::from_diagonal(&vec![-1.0, 2.0, 3.0, 3.0].into()));
        assert_eq!(truncate(&p, 2).unwrap().objective.op.block, p.objective.op.block);
        assert!(matches!(truncate(&p, 1), Err(QpError::InvalidDimension(_))));
        assert!(matches!(truncate(&t, 5), Err(QpError::InvalidDimension(_))));
    }

    #[test]
    fn multiplication_discretization_n4() {
        let p = discretized_multiplication_problem(4).unwrap();
        let d: Vec<f64> = (0..4).map(|i| p.objective.op.block[(i, i)]).collect();
        let expected = [0.125 / 4.0, 0.375 / 4.0, 0.625 / 4.0, 0.875 / 4.0];
        for (a, b) in d.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(multiplication_witness_value(4), 0.1171875);
    }

    #[test]
    fn constant_objective_plateaus() {
        let p = Problem::new(SpaceDesc::SequenceSpace, QuadraticFunction::new(Operator::scalar(0.0), Vector::zeros(0), 0.0), vec![]);
        let r = sweep(&p, &[2, 4, 8]).unwrap();
        assert_eq!(r.inf_values, vec![0.0; 3]);
        assert_eq!(r.diagnosis, Diagnosis::AttainmentLikely);
    }

    #[test]
    fn diagnosis_rules() {
        assert_eq!(diagnose(&[1.0, 1.0], &[1.0, 1.0]), Diagnosis::Inconclusive);
        assert_eq!(diagnose(&[0.3, 0.2, 0.1, 0.05], &[1.0, 1.2, 1.3, 1.3]), Diagnosis::Inconclusive);
        assert_eq!(diagnose(&[0.01, 0.005, 0.002], &[1.0, 1.5, 2.5]), Diagnosis::NonAttainmentSignature);
        assert_eq!(diagnose(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]), Diagnosis::AttainmentLikely);
    }
}
