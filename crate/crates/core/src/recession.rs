//! Recession cone of the feasible set and the hypothesis checks phrased on
//! it.
//!
//! For psd constraint operators the recession cone of a nonempty feasible
//! set is `{v : T_i v = 0, <c_i, v> <= 0 for all i}`. It is stored as an
//! orthonormal basis `V` of the common kernel on the head coordinates, the
//! rows `c_iᵀ V`, and a flag telling whether the coordinates beyond the head
//! are free (every constraint tail is zero).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dual::lagrangian_bound;
use crate::error::{QpError, Result};
use crate::model::{normalize_problem, psd_slack, Operator, Problem, QuadraticFunction, Vector};
use crate::search::{find_feasible_point, kkt_refine, pattern_search};
use crate::simplex::{optimize_in_box, optimize_over_cone_box};
use crate::spectral::{common_kernel, eig_sym, null_space};
use crate::tolerance;

const GENERATOR_SUBSET_CAP: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RecessionCone {
    pub head_dim: usize,
    /// Orthonormal columns spanning the common kernel of the constraint
    /// blocks (`K x d`).
    pub basis: DMatrix<f64>,
    /// Row `i` is `c_iᵀ V` (`m x d`).
    pub inequality_rows: DMatrix<f64>,
    /// Coordinates beyond the head belong to the cone.
    pub tail_free: bool,
    lins: Vec<Vector>,
}

impl RecessionCone {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `V u` as an element of the ambient space.
    pub fn lift(&self, u: &DVector<f64>) -> Vector {
        Vector::from_dvector(&(&self.basis * u))
    }

    /// First coordinate beyond the head, when such directions lie in the cone.
    pub fn tail_direction(&self) -> Option<Vector> {
        self.tail_free.then(|| Vector::basis(self.head_dim + 1, self.head_dim))
    }

    pub fn contains(&self, v: &Vector) -> bool {
        membership(self, v)
    }

    /// Generators of the head part of the cone, lineality directions in both
    /// signs. `None` when extreme-ray enumeration is too large.
    pub fn head_generators(&self) -> Option<Vec<Vector>> {
        Some(cone_generators(&self.inequality_rows)?.iter().map(|u| self.lift(u)).collect())
    }
}

pub fn recession_cone(p: &Problem) -> Result<RecessionCone> {
    let p = normalize_problem(p)?;
    let k = p.head_dim();
    let basis = if p.m() == 0 {
        DMatrix::identity(k, k)
    } else {
        let blocks: Vec<&DMatrix<f64>> = p.constraints.iter().map(|g| &g.op.block).collect();
        common_kernel(&blocks, k)?
    };
    let d = basis.ncols();
    let lins: Vec<Vector> = p.constraints.iter().map(|g| g.lin.padded(k)).collect();
    let inequality_rows = DMatrix::from_fn(p.m(), d, |i, j| lins[i].head(k).dot(&basis.column(j)));
    let tail_free = p.space.is_sequence() && p.constraints.iter().all(|g| g.op.tail == 0.0);
    Ok(RecessionCone {
        head_dim: k,
        basis: if k == 0 { DMatrix::zeros(0, 0) } else { basis },
        inequality_rows,
        tail_free,
        lins,
    })
}

/// `v` in the cone within `1e-8` (scaled by `max(1, |v|)`).
pub fn membership(cone: &RecessionCone, v: &Vector) -> bool {
    let tol = tolerance::MEMBERSHIP * v.norm().max(1.0);
    let k = cone.head_dim;
    let head = v.head(k);
    let proj = &cone.basis * (cone.basis.transpose() * &head);
    if (&head - proj).norm() > tol {
        return false;
    }
    if cone.lins.iter().any(|c| c.dot(v) > tol) {
        return false;
    }
    cone.tail_free || v.tail_norm(k) <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanSign {
    PsdOnSpan,
    NsdOnSpan,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroFormSet {
    /// `Q_N = Vᵀ T V`.
    pub reduced_form: DMatrix<f64>,
    /// Sign of the objective form on the span of the cone, tail included.
    pub classification: SpanSign,
    /// Kernel of `Q_N` in cone coordinates. Together with the cone
    /// inequalities it describes the zero set when the form is
    /// semidefinite on the span.
    pub zero_subspace_basis: DMatrix<f64>,
    pub tail_in_zero_set: bool,
    /// Objective tail when tail directions lie in the cone.
    pub tail_curvature: Option<f64>,
}

pub fn zero_form_set(cone: &RecessionCone, t: &Operator) -> Result<ZeroFormSet> {
    let k = cone.head_dim;
    let t = t.padded(k);
    let v = &cone.basis;
    let q = if cone.dim() == 0 { DMatrix::zeros(0, 0) } else { v.transpose() * &t.block * v };
    let q = (&q + q.transpose()) * 0.5;
    let (head_psd, head_nsd, zero) = if q.nrows() == 0 {
        (true, true, DMatrix::zeros(0, 0))
    } else {
        let eig = eig_sym(&q)?;
        let slack = psd_slack(&q);
        let lo = eig.values[0];
        let hi = eig.values[eig.dim() - 1];
        (lo >= -slack, hi <= slack, eig.kernel())
    };
    let tail_curvature = cone.tail_free.then_some(t.tail);
    let (psd, nsd) = match tail_curvature {
        Some(c) => (head_psd && c >= 0.0, head_nsd && c <= 0.0),
        None => (head_psd, head_nsd),
    };
    let classification = if psd {
        SpanSign::PsdOnSpan
    } else if nsd {
        SpanSign::NsdOnSpan
    } else {
        SpanSign::Indefinite
    };
    Ok(ZeroFormSet {
        reduced_form: q,
        classification,
        zero_subspace_basis: zero,
        tail_in_zero_set: tail_curvature == Some(0.0),
        tail_curvature,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Holds,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Vector>,
    /// Companion point for witnesses that pair a direction with a point.
    pub base: Option<Vector>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn holds(note: impl Into<String>) -> Self {
        Verdict { status: Status::Holds, witness: None, base: None, notes: vec![note.into()] }
    }

    pub fn unknown(note: impl Into<String>) -> Self {
        Verdict { status: Status::Unknown, witness: None, base: None, notes: vec![note.into()] }
    }

    pub fn violated(witness: Vector, note: impl Into<String>) -> Self {
        Verdict { status: Status::Violated, witness: Some(witness), base: None, notes: vec![note.into()] }
    }

    pub fn with_base(mut self, base: Vector) -> Self {
        self.base = Some(base);
        self
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }
}

/// Recession cone and zero-form set of one problem, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeAnalysis {
    pub problem: Problem,
    pub cone: RecessionCone,
    pub zero_set: ZeroFormSet,
}

impl ConeAnalysis {
    pub fn new(p: &Problem) -> Result<Self> {
        let problem = normalize_problem(p)?;
        let cone = recession_cone(&problem)?;
        let zero_set = zero_form_set(&cone, &problem.objective.op)?;
        Ok(ConeAnalysis { problem, cone, zero_set })
    }

    /// Objective form `<v, T v>`.
    pub fn form(&self, v: &Vector) -> f64 {
        self.problem.objective.op.form(v)
    }

    fn kernel_rows(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let z = &self.zero_set.zero_subspace_basis;
        let rows = if z.ncols() == 0 { DMatrix::zeros(self.problem.m(), 0) } else { &self.cone.inequality_rows * z };
        let ambient = if z.ncols() == 0 { DMatrix::zeros(self.cone.head_dim, 0) } else { &self.cone.basis * z };
        (rows, ambient)
    }

    /// True when the zero-form set is provably `{0}`.
    pub fn zero_set_trivial(&self) -> bool {
        if self.zero_set.classification == SpanSign::Indefinite || self.zero_set.tail_in_zero_set {
            return false;
        }
        let (rows, _) = self.kernel_rows();
        let z = rows.ncols();
        (0..z).all(|j| {
            let mut obj = vec![0.0; z];
            obj[j] = 1.0;
            let (_, hi) = optimize_over_cone_box(&obj, &rows, true);
            let (_, lo) = optimize_over_cone_box(&obj, &rows, false);
            hi <= tolerance::WITNESS && lo >= -tolerance::WITNESS
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionAShortcut {
    /// Every constraint operator vanishes, so there is nothing to check.
    NoQuadraticConstraints,
    /// `c_i = 0` for every constraint with a nonzero operator.
    VanishingLinearParts,
    /// The zero-form set is `{0}`.
    TrivialZeroFormSet,
}

pub fn condition_a_shortcut(a: &ConeAnalysis) -> Option<ConditionAShortcut> {
    let sets = a.problem.index_sets();
    if sets.i1.is_empty() {
        return Some(ConditionAShortcut::NoQuadraticConstraints);
    }
    if sets.i1.iter().all(|&i| a.problem.constraints[i].lin.norm_inf() == 0.0) {
        return Some(ConditionAShortcut::VanishingLinearParts);
    }
    a.zero_set_trivial().then_some(ConditionAShortcut::TrivialZeroFormSet)
}

fn unit(v: Vector) -> Vector {
    let n = v.norm();
    if n > 0.0 {
        v.scaled(1.0 / n)
    } else {
        v
    }
}

/// Re-checks a Condition (A) witness against the definition.
pub fn verify_condition_a_witness(a: &ConeAnalysis, v: &Vector, index: usize) -> bool {
    let n2 = v.norm_sq();
    membership(&a.cone, v)
        && a.form(v).abs() <= tolerance::WITNESS * n2
        && a.problem.constraints[index].lin.dot(v).abs() > tolerance::WITNESS
}

pub fn check_condition_a(p: &Problem) -> Result<Verdict> {
    Ok(check_condition_a_with(&ConeAnalysis::new(p)?))
}

/// Condition (A): `<c_i, v> = 0` for every constraint with a nonzero
/// operator and every cone direction `v` with `<v, T v> = 0`.
pub fn check_condition_a_with(a: &ConeAnalysis) -> Verdict {
    match condition_a_shortcut(a) {
        Some(ConditionAShortcut::NoQuadraticConstraints) => {
            return Verdict::holds("every constraint operator is zero");
        }
        Some(ConditionAShortcut::VanishingLinearParts) => {
            return Verdict::holds("linear parts vanish on every quadratic constraint");
        }
        Some(ConditionAShortcut::TrivialZeroFormSet) => return Verdict::holds("zero-form set is {0}"),
        None => {}
    }
    let i1 = a.problem.index_sets().i1;

    // Kernel of Q_N intersected with the cone: Q vanishes there exactly.
    let (rows, ambient) = a.kernel_rows();
    for &i in &i1 {
        let obj: Vec<f64> = (0..rows.ncols()).map(|j| a.cone.lins[i].head(a.cone.head_dim).dot(&ambient.column(j))).collect();
        let (w, val) = optimize_over_cone_box(&obj, &rows, false);
        if val < -tolerance::WITNESS {
            let v = unit(Vector::from_dvector(&(&ambient * DVector::from_vec(w))));
            if verify_condition_a_witness(a, &v, i) {
                return Verdict::violated(v, format!("<c_{}, v> < 0 on a zero-form direction", i + 1));
            }
        }
    }
    if a.zero_set.classification != SpanSign::Indefinite {
        return Verdict::holds("linear programs over the zero-form cone found no violation");
    }

    // Indefinite form on the span: the zero set is not polyhedral.
    let mut any_active = false;
    for &i in &i1 {
        let obj: Vec<f64> = a.cone.inequality_rows.row(i).iter().copied().collect();
        let (_, lo) = optimize_over_cone_box(&obj, &a.cone.inequality_rows, false);
        if lo < -tolerance::WITNESS {
            any_active = true;
            if let Some(v) = indefinite_witness(a, i, -lo) {
                return Verdict::violated(v, format!("<c_{}, v> < 0 on a zero-form direction (sign-change search)", i + 1));
            }
        }
    }
    if !any_active {
        return Verdict::holds("every <c_i, .> vanishes on the whole recession cone");
    }
    Verdict::unknown("objective form indefinite on the cone and the seeded search found no witness")
}

/// Point of the cone in coordinates `(w, s)`: head part `V w` and tail
/// weight `s` on the first coordinate beyond the head.
#[derive(Debug, Clone)]
struct ConePoint {
    w: DVector<f64>,
    s: f64,
}

impl ConePoint {
    fn axpy(&self, a: f64, o: &ConePoint) -> ConePoint {
        ConePoint { w: &self.w + &o.w * a, s: self.s + a * o.s }
    }
}

fn bilinear(a: &ConeAnalysis, x: &ConePoint, y: &ConePoint) -> f64 {
    let head = if x.w.len() == 0 { 0.0 } else { x.w.dot(&(&a.zero_set.reduced_form * &y.w)) };
    head + a.zero_set.tail_curvature.unwrap_or(0.0) * x.s * y.s
}

fn lift_point(a: &ConeAnalysis, x: &ConePoint) -> Vector {
    let mut v = a.cone.lift(&x.w).padded(a.cone.head_dim);
    if x.s != 0.0 {
        v.set(a.cone.head_dim, x.s);
    }
    v
}

/// Cone points from random linear objectives over the unit box. With
/// `strict = Some((i, eps))` the extra row `<c_i, v> <= -eps` is imposed.
fn sample_cone_points(a: &ConeAnalysis, rng: &mut ChaCha8Rng, strict: Option<(usize, f64)>) -> Vec<ConePoint> {
    let d = a.cone.dim();
    let mut rows = a.cone.inequality_rows.clone();
    let mut rhs = vec![0.0; rows.nrows()];
    if let Some((i, eps)) = strict {
        let n = rows.nrows();
        rows = rows.insert_row(n, 0.0);
        let last = rows.nrows() - 1;
        for j in 0..d {
            rows[(last, j)] = a.cone.inequality_rows[(i, j)];
        }
        rhs.push(-eps);
    }
    let mut out = Vec::new();
    for _ in 0..tolerance::MULTI_STARTS {
        let obj: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some((w, _)) = optimize_in_box(&obj, &rows, &rhs, true) {
            out.push(ConePoint { w: DVector::from_vec(w), s: 0.0 });
        }
    }
    out
}

fn indefinite_witness(a: &ConeAnalysis, i: usize, depth: f64) -> Option<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(tolerance::seed() ^ (i as u64));
    let strict = sample_cone_points(a, &mut rng, Some((i, 0.5 * depth)));
    let mut all = sample_cone_points(a, &mut rng, None);
    if a.cone.tail_free {
        all.push(ConePoint { w: DVector::zeros(a.cone.dim()), s: 1.0 });
    }
    let row: Vec<f64> = a.cone.inequality_rows.row(i).iter().copied().collect();
    let lin = |x: &ConePoint| x.w.iter().zip(&row).map(|(p, q)| p * q).sum::<f64>();

    let mut cands: Vec<ConePoint> = strict.clone();
    for s in &strict {
        for b in strict.iter().chain(all.iter()) {
            for sigma in [0.1, 1.0, 10.0, 100.0] {
                cands.push(s.axpy(sigma, b));
            }
        }
    }
    let scale = |x: &ConePoint| x.w.norm_squared() + x.s * x.s;
    let mut pos = None;
    let mut neg = None;
    for c in &cands {
        if lin(c) >= -tolerance::WITNESS {
            continue;
        }
        let q = bilinear(a, c, c);
        let tol = tolerance::WITNESS * scale(c);
        if q.abs() <= 1e-3 * tol {
            let v = unit(lift_point(a, c));
            if verify_condition_a_witness(a, &v, i) {
                return Some(v);
            }
        } else if q > 0.0 && pos.is_none() {
            pos = Some(c.clone());
        } else if q < 0.0 && neg.is_none() {
            neg = Some(c.clone());
        }
        if pos.is_some() && neg.is_some() {
            break;
        }
    }
    let (p0, n0) = (pos?, neg?);
    // q(τ) = Q(p + τ(n - p)) changes sign on (0, 1).
    let d = n0.axpy(-1.0, &p0);
    let qa = bilinear(a, &d, &d);
    let qb = 2.0 * bilinear(a, &p0, &d);
    let qc = bilinear(a, &p0, &p0);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let q_at = |t: f64| qc + t * (qb + t * qa);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if q_at(lo).abs() <= q_at(hi).abs() { lo } else { hi };
    let v = unit(lift_point(a, &p0.axpy(t, &d)));
    verify_condition_a_witness(a, &v, i).then_some(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EavesVerdicts {
    pub cond_ii: Verdict,
    pub cond_iii: Verdict,
}

pub fn check_eaves(p: &Problem) -> Result<EavesVerdicts> {
    let a = ConeAnalysis::new(p)?;
    let x = find_feasible_point(&a.problem)?.ok_or(QpError::InfeasibleProblem)?;
    check_eaves_with(&a, &x)
}

/// Eaves-type conditions: (ii) `<v, T v> >= 0` on the recession cone and
/// (iii) `<T x + c, v> >= 0` for feasible `x` and zero-form directions `v`.
pub fn check_eaves_with(a: &ConeAnalysis, feasible: &Vector) -> Result<EavesVerdicts> {
    Ok(EavesVerdicts {
        cond_ii: eaves_ii(a),
        cond_iii: eaves_iii(a, feasible)?,
    })
}

fn eaves_ii(a: &ConeAnalysis) -> Verdict {
    if a.zero_set.classification == SpanSign::PsdOnSpan {
        return Verdict::holds("objective form psd on the span of the cone");
    }
    let mut cands: Vec<ConePoint> = Vec::new();
    if let Some(c) = a.zero_set.tail_curvature {
        if c < 0.0 {
            cands.push(ConePoint { w: DVector::zeros(a.cone.dim()), s: 1.0 });
        }
    }
    if a.cone.dim() > 0 {
        if let Ok(eig) = eig_sym(&a.zero_set.reduced_form) {
            for j in 0..eig.dim() {
                if eig.values[j] < 0.0 {
                    let w = eig.vectors.column(j).into_owned();
                    cands.push(ConePoint { w: w.clone(), s: 0.0 });
                    cands.push(ConePoint { w: -w, s: 0.0 });
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tolerance::seed());
    let samples = sample_cone_points(a, &mut rng, None);
    for (x, s) in samples.iter().enumerate() {
        cands.push(s.clone());
        for t in samples.iter().skip(x + 1) {
            cands.push(s.axpy(1.0, t));
        }
    }
    for c in &cands {
        let v = lift_point(a, c);
        let n2 = v.norm_sq();
        if n2 == 0.0 || !membership(&a.cone, &v) {
            continue;
        }
        if a.form(&v) < -tolerance::WITNESS * n2 {
            return Verdict::violated(unit(v), "cone direction with <v, T v> < 0");
        }
    }
    Verdict::unknown("objective form not psd on the cone span and no negative direction found")
}

/// Generators of the polyhedral cone `{w : A w <= 0}`: plus and minus a
/// lineality basis, then the extreme rays of the pointed part. `None` when
/// enumeration would be too large.
pub(crate) fn cone_generators(a_rows: &DMatrix<f64>) -> Option<Vec<DVector<f64>>> {
    let z = a_rows.ncols();
    if z == 0 {
        return Some(Vec::new());
    }
    let tol = 1e-9 * a_rows.norm().max(1.0);
    let keep: Vec<usize> = (0..a_rows.nrows()).filter(|&r| a_rows.row(r).norm() > tol).collect();
    let a = DMatrix::from_fn(keep.len(), z, |r, c| a_rows[(keep[r], c)]);
    let lineality = if a.nrows() == 0 { DMatrix::identity(z, z) } else { null_space(&a) };
    let mut gens: Vec<DVector<f64>> = Vec::new();
    for j in 0..lineality.ncols() {
        let c = lineality.column(j).into_owned();
        gens.push(c.clone());
        gens.push(-c);
    }
    let l = lineality.ncols();
    if l == z {
        return Some(gens);
    }
    let w = if l == 0 { DMatrix::identity(z, z) } else { null_space(&lineality.transpose()) };
    let b = &a * &w;
    let p = w.ncols();
    let feasible = |y: &DVector<f64>| (&b * y).iter().all(|&v| v <= 1e-9 * y.norm().max(1e-300) * b.norm().max(1.0));
    let mut rays: Vec<DVector<f64>> = Vec::new();
    let push = |y: DVector<f64>, rays: &mut Vec<DVector<f64>>| {
        let n = y.norm();
        if n == 0.0 || !feasible(&y) {
            return;
        }
        let y = y / n;
        if rays.iter().all(|r| (r - &y).norm() > 1e-9) {
            rays.push(y);
        }
    };
    if p == 1 {
        push(DVector::from_element(1, 1.0), &mut rays);
        push(DVector::from_element(1, -1.0), &mut rays);
    } else {
        let r = b.nrows();
        let size = p - 1;
        if size > r {
            return Some(gens);
        }
        let mut count = 1usize;
        for i in 0..size {
            count = count.saturating_mul(r - i) / (i + 1);
        }
        if count > GENERATOR_SUBSET_CAP {
            return None;
        }
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let sub = DMatrix::from_fn(size, p, |x, y| b[(idx[x], y)]);
            let ns = null_space(&sub);
            if ns.ncols() == 1 {
                let y = ns.column(0).into_owned();
                push(y.clone(), &mut rays);
                push(-y, &mut rays);
            }
            // Next combination.
            let mut pos = size;
            while pos > 0 {
                pos -= 1;
                if idx[pos] < r - size + pos {
                    idx[pos] += 1;
                    for q in pos + 1..size {
                        idx[q] = idx[q - 1] + 1;
                    }
                    break;
                }
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || size == 0 {
                break;
            }
        }
    }
    gens.extend(rays.into_iter().map(|y| &w * y));
    Some(gens)
}

fn eaves_iii(a: &ConeAnalysis, x_feas: &Vector) -> Result<Verdict> {
    if a.zero_set.classification == SpanSign::Indefinite {
        return Ok(Verdict::unknown("zero-form set not polyhedral (indefinite form on the cone)"));
    }
    let (rows, ambient) = a.kernel_rows();
    let Some(gens) = cone_generators(&rows) else {
        return Ok(Verdict::unknown("too many candidate extreme rays"));
    };
    let p = &a.problem;
    let f = &p.objective;
    let t_scale = f.op.frobenius().max(f.op.tail.abs()).max(1.0);
    let mut structural = true;
    for g in &gens {
        let v = Vector::from_dvector(&(&ambient * g));
        let tv = f.op.apply(&v);
        let cv = f.lin.dot(&v);
        if tv.norm() <= tolerance::NULL_REL * t_scale * v.norm().max(1.0) {
            if cv < -tolerance::WITNESS {
                return Ok(Verdict::violated(unit(v), "T v = 0 and <c, v> < 0").with_base(x_feas.clone()));
            }
            continue;
        }
        structural = false;
        // min over F of <T v, x> + <c, v>: convex, certified by duality.
        let lin_obj = QuadraticFunction::new(Operator::zero(0), tv.clone(), cv);
        let bound = lagrangian_bound(&lin_obj, &p.constraints)?;
        if bound.value >= -tolerance::WITNESS {
            continue;
        }
        // Search for a feasible x with a negative value.
        let mut cands = vec![x_feas.clone()];
        let (_, cone_amb) = (a.cone.inequality_rows.clone(), &a.cone.basis);
        let obj: Vec<f64> = (0..a.cone.dim()).map(|j| tv.head(a.cone.head_dim).dot(&cone_amb.column(j))).collect();
        let (w, val) = optimize_over_cone_box(&obj, &a.cone.inequality_rows, false);
        if val < -tolerance::WITNESS {
            let r = a.cone.lift(&DVector::from_vec(w));
            let slope = tv.dot(&r);
            let t = ((lin_obj.eval(x_feas) + 1.0) / -slope).max(0.0);
            cands.push(x_feas.axpy(t, &r));
        }
        if let Some(pt) = &bound.point {
            cands.push(pt.clone());
        }
        let mut refined = Vec::new();
        for c in &cands {
            let r = kkt_refine(p, &lin_obj, c, 1e-3);
            refined.push(pattern_search(p, &lin_obj, &r, 1.0, 1e-9));
        }
        if let Some(x) = refined
            .into_iter()
            .filter(|x| p.max_violation(x) <= tolerance::FEASIBLE)
            .find(|x| lin_obj.eval(x) < -tolerance::WITNESS)
        {
            return Ok(Verdict::violated(unit(v), "feasible x with <T x + c, v> < 0").with_base(x));
        }
        return Ok(Verdict::unknown("neither a dual certificate nor a violating point was found"));
    }
    if structural {
        Ok(Verdict::holds("T v = 0 and <c, v> >= 0 on every zero-form generator"))
    } else {
        Ok(Verdict::holds("Lagrangian bounds certify <T x + c, v> >= 0 on every generator"))
    }
}
