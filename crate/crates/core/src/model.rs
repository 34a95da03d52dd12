//! Vectors, operators, quadratic functions and problems.
//!
//! Every element of the ambient space is a finite coordinate prefix with an
//! identically zero tail. Every operator is a dense symmetric head block
//! followed by a scalar multiple of the identity acting on the remaining
//! coordinates. In a finite-dimensional space of dimension `n` the block is
//! `n x n` after normalization and the tail is unused.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QpError, Result};
use crate::spectral::eig_sym;
use crate::tolerance;

/// Default cap on the common head dimension produced by [`normalize_problem`].
pub const DEFAULT_PAD_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceDesc {
    FiniteDim(usize),
    SequenceSpace,
}

impl SpaceDesc {
    pub fn is_sequence(&self) -> bool {
        matches!(self, SpaceDesc::SequenceSpace)
    }
}

/// Finitely supported coordinate sequence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// Standard basis vector `e_i` (zero-based) stored with dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim.max(i + 1)];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn from_dvector(v: &DVector<f64>) -> Self {
        Vector(v.iter().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Coordinate `i`, reading zero beyond the stored prefix.
    pub fn get(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, value: f64) {
        if i >= self.0.len() {
            self.0.resize(i + 1, 0.0);
        }
        self.0[i] = value;
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Zero-pads (never truncates) to at least `dim` coordinates.
    pub fn padded(&self, dim: usize) -> Vector {
        let mut v = self.0.clone();
        if v.len() < dim {
            v.resize(dim, 0.0);
        }
        Vector(v)
    }

    /// First `k` coordinates, zero-padded when the vector is shorter.
    pub fn head(&self, k: usize) -> DVector<f64> {
        DVector::from_fn(k, |i, _| self.get(i))
    }

    /// Index one past the last nonzero coordinate.
    pub fn support_len(&self) -> usize {
        self.0.iter().rposition(|x| *x != 0.0).map_or(0, |i| i + 1)
    }

    /// Euclidean norm of the coordinates at positions `>= k`.
    pub fn tail_norm(&self, k: usize) -> f64 {
        self.0.iter().skip(k).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|x| a * x).collect())
    }

    /// `self + a * other`, with dimension the larger of the two.
    pub fn axpy(&self, a: f64, other: &Vector) -> Vector {
        let d = self.dim().max(other.dim());
        Vector((0..d).map(|i| self.get(i) + a * other.get(i)).collect())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, a: f64) -> Vector {
        self.scaled(a)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

/// Self-adjoint operator `block ⊕ tail·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub block: DMatrix<f64>,
    pub tail: f64,
}

impl Operator {
    pub fn new(block: DMatrix<f64>, tail: f64) -> Self {
        Operator { block, tail }
    }

    pub fn from_rows(rows: &[Vec<f64>], tail: f64) -> Self {
        let k = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let block = DMatrix::from_fn(k, cols, |i, j| rows[i].get(j).copied().unwrap_or(f64::NAN));
        Operator { block, tail }
    }

    pub fn diagonal(diag: &[f64], tail: f64) -> Self {
        Operator {
            block: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            tail,
        }
    }

    /// `tail·I` with an empty head block.
    pub fn scalar(tail: f64) -> Self {
        Operator {
            block: DMatrix::zeros(0, 0),
            tail,
        }
    }

    pub fn zero(k: usize) -> Self {
        Operator {
            block: DMatrix::zeros(k, k),
            tail: 0.0,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.block.nrows()
    }

    pub fn frobenius(&self) -> f64 {
        self.block.norm()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        apply_operator(self, x)
    }

    /// The quadratic form `<x, T x>`.
    pub fn form(&self, x: &Vector) -> f64 {
        x.dot(&self.apply(x))
    }

    pub fn is_zero(&self) -> bool {
        self.frobenius() <= tolerance::ZERO_BLOCK && self.tail == 0.0
    }

    /// Grows the block to `k x k`, filling new diagonal entries with the tail.
    pub fn padded(&self, k: usize) -> Operator {
        let old = self.head_dim();
        if k <= old {
            return self.clone();
        }
        let mut block = DMatrix::zeros(k, k);
        block.view_mut((0, 0), (old, old)).copy_from(&self.block);
        for i in old..k {
            block[(i, i)] = self.tail;
        }
        Operator {
            block,
            tail: self.tail,
        }
    }

    /// `self + a * other` on a common head dimension.
    pub fn combined(&self, a: f64, other: &Operator) -> Operator {
        let k = self.head_dim().max(other.head_dim());
        let lhs = self.padded(k);
        let rhs = other.padded(k);
        Operator {
            block: &lhs.block + &rhs.block * a,
            tail: lhs.tail + a * rhs.tail,
        }
    }

    /// Smallest block eigenvalue, `+inf` for an empty block.
    pub fn min_block_eigenvalue(&self) -> Result<f64> {
        if self.head_dim() == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(eig_sym(&self.block)?.values[0])
    }

    pub fn is_psd(&self) -> Result<bool> {
        Ok(self.tail >= 0.0 && self.min_block_eigenvalue()? >= -psd_slack(&self.block))
    }
}

pub(crate) fn psd_slack(block: &DMatrix<f64>) -> f64 {
    tolerance::PSD_REL * block.norm().max(1.0)
}

/// `T x`; the result has dimension `max(k, dim x)`.
pub fn apply_operator(t: &Operator, x: &Vector) -> Vector {
    let k = t.head_dim();
    let d = k.max(x.dim());
    let mut out = vec![0.0; d];
    for (i, o) in out.iter_mut().enumerate().take(k) {
        *o = (0..k.min(x.dim())).map(|j| t.block[(i, j)] * x[j]).sum();
    }
    for (i, o) in out.iter_mut().enumerate().skip(k) {
        *o = t.tail * x.get(i);
    }
    Vector(out)
}

/// `½<x, op x> + <lin, x> + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunction {
    pub op: Operator,
    pub lin: Vector,
    pub constant: f64,
}

impl QuadraticFunction {
    pub fn new(op: Operator, lin: Vector, constant: f64) -> Self {
        QuadraticFunction { op, lin, constant }
    }

    /// The vacuous constraint `0 <= 0`.
    pub fn zero() -> Self {
        QuadraticFunction::new(Operator::zero(0), Vector::default(), 0.0)
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        eval_quadratic(self, x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.op.apply(x).axpy(1.0, &self.lin)
    }

    /// True for `0 <= c` with `c <= 0`: zero operator, zero linear part,
    /// nonpositive constant.
    pub fn is_vacuous(&self) -> bool {
        self.op.is_zero() && self.lin.norm_inf() == 0.0 && self.constant <= 0.0
    }

    /// `self + a * other`.
    pub fn combined(&self, a: f64, other: &QuadraticFunction) -> QuadraticFunction {
        QuadraticFunction {
            op: self.op.combined(a, &other.op),
            lin: self.lin.axpy(a, &other.lin),
            constant: self.constant + a * other.constant,
        }
    }
}

/// Quadratic term first, then linear, then constant.
pub fn eval_quadratic(q: &QuadraticFunction, x: &Vector) -> f64 {
    let quad = 0.5 * q.op.form(x);
    let lin = q.lin.dot(x);
    quad + lin + q.constant
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub space: SpaceDesc,
    pub objective: QuadraticFunction,
    pub constraints: Vec<QuadraticFunction>,
}

impl Problem {
    pub fn new(space: SpaceDesc, objective: QuadraticFunction, constraints: Vec<QuadraticFunction>) -> Self {
        Problem {
            space,
            objective,
            constraints,
        }
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Largest block dimension or vector length across all data.
    pub fn head_dim(&self) -> usize {
        self.functions()
            .map(|q| q.op.head_dim().max(q.lin.dim()))
            .max()
            .unwrap_or(0)
    }

    pub fn functions(&self) -> impl Iterator<Item = &QuadraticFunction> {
        std::iter::once(&self.objective).chain(self.constraints.iter())
    }

    pub fn objective_value(&self, x: &Vector) -> f64 {
        self.objective.eval(x)
    }

    /// `max_i g_i(x)`, or `-inf` without constraints.
    pub fn max_violation(&self, x: &Vector) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    pub fn index_sets(&self) -> IndexSets {
        let (i0, i1) = (0..self.m()).partition(|&i| self.constraints[i].op.is_zero());
        IndexSets { i0, i1 }
    }

    /// Drops vacuous `0 <= c` (c <= 0) constraints; they never change `F`.
    pub fn without_vacuous_constraints(&self) -> Problem {
        Problem {
            space: self.space,
            objective: self.objective.clone(),
            constraints: self
                .constraints
                .iter()
                .filter(|g| !g.is_vacuous())
                .cloned()
                .collect(),
        }
    }
}

/// Constraint indices split by whether the operator vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub i0: Vec<usize>,
    pub i1: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionRef {
    Objective,
    Constraint(usize),
}

impl fmt::Display for FunctionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionRef::Objective => write!(f, "objective"),
            FunctionRef::Constraint(i) => write!(f, "constraint {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Issue {
    NotSquare { which: FunctionRef, rows: usize, cols: usize },
    NonFinite { which: FunctionRef },
    Asymmetric { which: FunctionRef, max_deviation: f64 },
    NotPsd { which: FunctionRef, eigenvalue: f64 },
    NegativeTail { which: FunctionRef, tail: f64 },
    Dimension { which: FunctionRef, detail: String },
    TailInFiniteSpace { which: FunctionRef, tail: f64 },
    ObjectiveConstant { value: f64 },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NotSquare { which, rows, cols } => write!(f, "{which}: block is {rows}x{cols}"),
            Issue::NonFinite { which } => write!(f, "{which}: non-finite entry"),
            Issue::Asymmetric { which, max_deviation } => {
                write!(f, "{which}: block not symmetric (max deviation {max_deviation:e})")
            }
            Issue::NotPsd { which, eigenvalue } => {
                write!(f, "{which}: not positive semidefinite (eigenvalue {eigenvalue})")
            }
            Issue::NegativeTail { which, tail } => {
                write!(f, "{which}: not positive semidefinite (tail {tail})")
            }
            Issue::Dimension { which, detail } => write!(f, "{which}: {detail}"),
            Issue::TailInFiniteSpace { which, tail } => {
                write!(f, "{which}: tail {tail} must be 0 in a finite-dimensional space")
            }
            Issue::ObjectiveConstant { value } => write!(f, "objective constant {value} must be 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(QpError::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_problem(p: &Problem) -> ValidationReport {
    let mut issues = Vec::new();
    if p.space == SpaceDesc::FiniteDim(0) {
        issues.push(Issue::Dimension {
            which: FunctionRef::Objective,
            detail: "finite dimension must be at least 1".into(),
        });
    }
    if p.objective.constant != 0.0 {
        issues.push(Issue::ObjectiveConstant {
            value: p.objective.constant,
        });
    }
    let refs = std::iter::once(FunctionRef::Objective).chain((0..p.m()).map(FunctionRef::Constraint));
    for (which, q) in refs.zip(p.functions()) {
        check_function(p.space, which, q, &mut issues);
    }
    ValidationReport { issues }
}

fn check_function(space: SpaceDesc, which: FunctionRef, q: &QuadraticFunction, issues: &mut Vec<Issue>) {
    let b = &q.op.block;
    if b.nrows() != b.ncols() {
        issues.push(Issue::NotSquare {
            which,
            rows: b.nrows(),
            cols: b.ncols(),
        });
        return;
    }
    if !b.iter().all(|x| x.is_finite()) || !q.op.tail.is_finite() || !q.lin.is_finite() || !q.constant.is_finite() {
        issues.push(Issue::NonFinite { which });
        return;
    }
    if let SpaceDesc::FiniteDim(n) = space {
        if b.nrows() > n {
            issues.push(Issue::Dimension {
                which,
                detail: format!("block dimension {} exceeds space dimension {n}", b.nrows()),
            });
        }
        if q.lin.dim() > n {
            issues.push(Issue::Dimension {
                which,
                detail: format!("vector dimension {} exceeds space dimension {n}", q.lin.dim()),
            });
        }
        if q.op.tail != 0.0 {
            issues.push(Issue::TailInFiniteSpace { which, tail: q.op.tail });
        }
    }
    let max_abs = b.amax();
    let max_dev = (0..b.nrows())
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (b[(i, j)] - b[(j, i)]).abs())
        .fold(0.0, f64::max);
    if max_dev > tolerance::SYMMETRY_REL * max_abs.max(1.0) {
        issues.push(Issue::Asymmetric {
            which,
            max_deviation: max_dev,
        });
        return;
    }
    if matches!(which, FunctionRef::Constraint(_)) {
        if q.op.tail < 0.0 && space.is_sequence() {
            issues.push(Issue::NegativeTail { which, tail: q.op.tail });
        }
        if b.nrows() > 0 {
            match eig_sym(&symmetrized(b)) {
                Ok(eig) if eig.values[0] < -psd_slack(b) => issues.push(Issue::NotPsd {
                    which,
                    eigenvalue: eig.values[0],
                }),
                Ok(_) => {}
                Err(e) => issues.push(Issue::Dimension {
                    which,
                    detail: e.to_string(),
                }),
            }
        }
    }
}

pub(crate) fn symmetrized(b: &DMatrix<f64>) -> DMatrix<f64> {
    (b + b.transpose()) * 0.5
}

/// Pads every block and vector to one common head dimension.
///
/// In a finite space of dimension `n` the common dimension is `n`; in the
/// sequence space it is the largest block or vector support. Blocks are
/// symmetrized exactly, which leaves every quadratic form unchanged.
pub fn normalize_problem(p: &Problem) -> Result<Problem> {
    normalize_problem_with_cap(p, DEFAULT_PAD_CAP)
}

pub fn normalize_problem_with_cap(p: &Problem, cap: usize) -> Result<Problem> {
    for q in p.functions() {
        if q.op.block.nrows() != q.op.block.ncols() {
            return Err(QpError::InvalidDimension(format!(
                "block is {}x{}",
                q.op.block.nrows(),
                q.op.block.ncols()
            )));
        }
    }
    let k = match p.space {
        SpaceDesc::FiniteDim(0) => {
            return Err(QpError::InvalidDimension("finite dimension must be at least 1".into()))
        }
        SpaceDesc::FiniteDim(n) => {
            let needed = p.head_dim();
            if needed > n {
                return Err(QpError::InvalidDimension(format!(
                    "data of dimension {needed} in a space of dimension {n}"
                )));
            }
            n
        }
        SpaceDesc::SequenceSpace => p.head_dim(),
    };
    if k > cap {
        return Err(QpError::PadOverflow { requested: k, cap });
    }
    let pad = |q: &QuadraticFunction| {
        let op = q.op.padded(k);
        QuadraticFunction {
            op: Operator::new(symmetrized(&op.block), op.tail),
            lin: q.lin.padded(k),
            constant: q.constant,
        }
    };
    Ok(Problem {
        space: p.space,
        objective: pad(&p.objective),
        constraints: p.constraints.iter().map(pad).collect(),
    })
}

/// Validates and normalizes in one step.
pub fn prepare_problem(p: &Problem) -> Result<Problem> {
    validate_problem(p).into_result()?;
    normalize_problem(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64], tail: f64) -> Operator {
        Operator::diagonal(d, tail)
    }

    #[test]
    fn apply_matches_shifted_diagonal() {
        let t = diag(&[-1.0, 0.0, 1.0, 0.0], 1.0);
        let x = Vector::new(vec![1.0, 2.0, 0.0, 0.0, 7.0]);
        assert_eq!(apply_operator(&t, &x).coords(), &[-1.0, 0.0, 0.0, 0.0, 7.0]);
    }

    #[test]
    fn apply_dense_block() {
        let t = Operator::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]], 0.0);
        assert_eq!(apply_operator(&t, &Vector::new(vec![1.0, 1.0])).coords(), &[3.0, 3.0]);
    }

    #[test]
    fn apply_to_zero_vector() {
        let t = Operator::from_rows(&[vec![2.0, -1.0], vec![-1.0, 5.0]], 3.0);
        let y = apply_operator(&t, &Vector::zeros(4));
        assert!(y.coords().iter().all(|v| *v == 0.0));
        assert_eq!(y.dim(), 4);
    }

    #[test]
    fn constant_function_evaluates_to_constant() {
        let q = QuadraticFunction::new(Operator::zero(2), Vector::zeros(2), -3.25);
        assert_eq!(eval_quadratic(&q, &Vector::new(vec![4.0, -9.0])), -3.25);
    }

    #[test]
    fn finite_space_rejects_long_vector() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(3),
            QuadraticFunction::new(Operator::zero(3), Vector::zeros(5), 0.0),
            vec![],
        );
        assert!(matches!(normalize_problem(&p), Err(QpError::InvalidDimension(_))));
    }

    #[test]
    fn pad_cap_is_enforced() {
        let p = Problem::new(
            SpaceDesc::SequenceSpace,
            QuadraticFunction::new(Operator::scalar(1.0), Vector::zeros(10), 0.0),
            vec![],
        );
        assert_eq!(
            normalize_problem_with_cap(&p, 8),
            Err(QpError::PadOverflow { requested: 10, cap: 8 })
        );
    }

    #[test]
    fn normalize_is_idempotent_on_uniform_data() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            QuadraticFunction::new(diag(&[1.0, -1.0], 0.0), Vector::new(vec![1.0, 0.0]), 0.0),
            vec![QuadraticFunction::new(diag(&[1.0, 1.0], 0.0), Vector::new(vec![0.0, 1.0]), -1.0)],
        );
        assert_eq!(normalize_problem(&p).unwrap(), p);
    }

    #[test]
    fn validation_flags_non_psd_constraint() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(1),
            QuadraticFunction::new(Operator::zero(1), Vector::zeros(1), 0.0),
            vec![QuadraticFunction::new(diag(&[-1.0], 0.0), Vector::zeros(1), 0.0)],
        );
        let report = validate_problem(&p);
        assert_eq!(report.issues.len(), 1);
        match &report.issues[0] {
            Issue::NotPsd { eigenvalue, .. } => assert!((eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("unexpected issue {other:?}"),
        }
    }

    #[test]
    fn validation_flags_asymmetry() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            QuadraticFunction::new(Operator::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]], 0.0), Vector::zeros(2), 0.0),
            vec![],
        );
        assert!(matches!(validate_problem(&p).issues[..], [Issue::Asymmetric { .. }]));
    }

    #[test]
    fn index_sets_partition_constraints() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            QuadraticFunction::new(Operator::zero(2), Vector::zeros(2), 0.0),
            vec![
                QuadraticFunction::new(Operator::zero(2), Vector::new(vec![1.0, 0.0]), 0.0),
                QuadraticFunction::new(diag(&[1.0, 0.0], 0.0), Vector::zeros(2), -1.0),
            ],
        );
        assert_eq!(p.index_sets(), IndexSets { i0: vec![0], i1: vec![1] });
    }
}
