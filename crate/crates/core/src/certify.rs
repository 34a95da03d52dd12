//! Existence certification.
//!
//! Hypotheses are evaluated once into a table of three-valued verdicts and
//! the existence rules fire in a fixed priority order. A YES always comes
//! with a feasibility-checked point; when no rule fires, a point whose value
//! meets a Lagrangian lower bound still proves attainment.

use std::fmt;

use serde::Serialize;

use crate::dual::lagrangian_bound;
use crate::error::{QpError, Result};
use crate::gtrs::{solve_single_constraint, strict_point, unconstrained_argmin, Argmin, CaseTag, Solution};
use crate::model::{prepare_problem, Problem, Vector};
use crate::oracle::{oracle_candidates, OracleConfig};
use crate::recession::{
    check_condition_a_with, check_eaves_with, condition_a_shortcut, ConditionAShortcut, ConeAnalysis, Status,
    Verdict,
};
use crate::search::{find_feasible_point, kkt_refine, pattern_search, verify_unbounded_ray};
use crate::spectral::{classify_form, FormClass};
use crate::tolerance;

/// Largest head dimension for which witness search consults the grid oracle.
const ORACLE_WITNESS_DIM: usize = 6;

/// Relative value difference below which witnesses are compared by violation.
const SLACK_MARGIN: f64 = 1e-8;

/// Strictly feasible point of constraint `i`.
pub fn slater_point(p: &Problem, i: usize) -> Result<Vector> {
    let p = prepare_problem(p)?;
    let g = p
        .constraints
        .get(i)
        .ok_or_else(|| QpError::PreconditionViolation(format!("no constraint with index {i}")))?;
    strict_point(g, i)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Boundedness {
    Bounded { lower_bound: f64, multiplier: Option<f64> },
    Unbounded { witness_ray: Vector, base_point: Vector },
    Unknown { best_probe: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessVerdict {
    #[serde(flatten)]
    pub status: Boundedness,
    pub notes: Vec<String>,
}

impl BoundednessVerdict {
    fn new(status: Boundedness, note: impl Into<String>) -> Self {
        BoundednessVerdict { status, notes: vec![note.into()] }
    }

    pub fn lower_bound(&self) -> Option<f64> {
        match self.status {
            Boundedness::Bounded { lower_bound, .. } => Some(lower_bound),
            _ => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self.status, Boundedness::Unbounded { .. })
    }

    fn as_verdict(&self) -> Verdict {
        let mut v = match &self.status {
            Boundedness::Bounded { lower_bound, .. } => Verdict::holds(format!("f >= {lower_bound} on F")),
            Boundedness::Unbounded { witness_ray, base_point } => {
                Verdict::violated(witness_ray.clone(), "feasible descent ray").with_base(base_point.clone())
            }
            Boundedness::Unknown { best_probe } => Verdict::unknown(format!("best probe value {best_probe}")),
        };
        v.notes.extend(self.notes.iter().cloned());
        v
    }
}

/// Lower bound, or a re-verified unbounded ray, for `f` on `F`.
pub fn check_bounded_below(p: &Problem) -> Result<BoundednessVerdict> {
    let p = prepare_problem(p)?.without_vacuous_constraints();
    let x_feas = find_feasible_point(&p)?.ok_or(QpError::InfeasibleProblem)?;
    bounded_below(&p, &x_feas, None)
}

fn bounded_below(p: &Problem, x_feas: &Vector, cone: Option<&ConeAnalysis>) -> Result<BoundednessVerdict> {
    let f = &p.objective;
    if p.m() == 0 {
        return Ok(match unconstrained_argmin(f)? {
            Argmin::Minimum { value, .. } => {
                BoundednessVerdict::new(Boundedness::Bounded { lower_bound: value, multiplier: None }, "exact unconstrained minimum")
            }
            Argmin::Unbounded { ray } => BoundednessVerdict::new(
                Boundedness::Unbounded { witness_ray: ray, base_point: Vector::zeros(p.head_dim()) },
                "unconstrained descent ray",
            ),
        });
    }

    let mut notes = Vec::new();
    if p.m() == 1 {
        match solve_single_constraint(p) {
            Ok(sol) => {
                return Ok(BoundednessVerdict::new(
                    Boundedness::Bounded { lower_bound: sol.dual_value.min(sol.value), multiplier: Some(sol.multiplier) },
                    "S-lemma multiplier",
                ));
            }
            Err(QpError::NotBoundedBelow { ray: Some(ray), base }) => {
                let base = base.unwrap_or_else(|| x_feas.clone());
                if verify_unbounded_ray(p, &base, &ray) {
                    return Ok(BoundednessVerdict::new(
                        Boundedness::Unbounded { witness_ray: ray, base_point: base },
                        "descent ray from the multiplier search",
                    ));
                }
                notes.push("multiplier search reported unboundedness but its ray failed re-verification".into());
            }
            Err(QpError::NotBoundedBelow { ray: None, .. }) => {
                notes.push("no multiplier certifies a lower bound, yet no single descent ray exists".into());
            }
            Err(e @ (QpError::NoSlaterPoint { .. } | QpError::HardCaseNoRay | QpError::NoPsdShift)) => {
                notes.push(format!("multiplier search unavailable: {e}"));
            }
            Err(e) => return Err(e),
        }
    }

    let bound = lagrangian_bound(f, &p.constraints)?;
    if bound.value.is_finite() && notes.is_empty() {
        return Ok(BoundednessVerdict::new(
            Boundedness::Bounded { lower_bound: bound.value, multiplier: None },
            format!("Lagrangian bound at multipliers {:?}", bound.multipliers),
        ));
    }
    if bound.value.is_finite() {
        let mut v = BoundednessVerdict::new(Boundedness::Bounded { lower_bound: bound.value, multiplier: None }, "Lagrangian bound");
        v.notes.extend(notes);
        return Ok(v);
    }

    // Look for a feasible descent ray in the recession cone.
    let owned;
    let a = match cone {
        Some(a) => a,
        None => {
            owned = ConeAnalysis::new(p)?;
            &owned
        }
    };
    let eaves = check_eaves_with(a, x_feas)?;
    for v in [&eaves.cond_ii, &eaves.cond_iii] {
        if v.status != Status::Violated {
            continue;
        }
        let Some(ray) = &v.witness else { continue };
        for base in [Some(x_feas), v.base.as_ref()].into_iter().flatten() {
            if verify_unbounded_ray(p, base, ray) {
                let mut out = BoundednessVerdict::new(
                    Boundedness::Unbounded { witness_ray: ray.clone(), base_point: base.clone() },
                    "recession direction along which f decreases",
                );
                out.notes.extend(notes);
                return Ok(out);
            }
        }
    }
    let probe = best_feasible_point(p, x_feas, &[])?.map_or(f.eval(x_feas), |(_, v)| v);
    let mut out = BoundednessVerdict::new(Boundedness::Unknown { best_probe: probe }, "no Lagrangian bound and no verified ray");
    out.notes.extend(notes);
    Ok(out)
}

/// Best feasible point from local refinement of several starts.
pub(crate) fn best_feasible_point(p: &Problem, x_feas: &Vector, extra: &[Vector]) -> Result<Option<(Vector, f64)>> {
    let f = &p.objective;
    let k = p.head_dim();
    let mut starts: Vec<Vector> = vec![x_feas.clone()];
    starts.extend(extra.iter().cloned());
    for (i, g) in p.constraints.iter().enumerate() {
        if let Ok(x) = strict_point(g, i) {
            starts.push(x);
        }
    }
    if k > 0 && k <= ORACLE_WITNESS_DIM {
        let radius = (2.0 * x_feas.norm()).max(10.0);
        let mut cfg = OracleConfig::new(radius, radius / 256.0);
        cfg.budget = 200_000;
        starts.extend(oracle_candidates(p, &cfg)?);
    }
    // Values within the margin count as ties, broken by lower violation, so a
    // point cannot win by leaning on the feasibility slack.
    let mut best: Option<(Vector, f64, f64)> = None;
    for s in starts {
        let s = s.padded(k);
        // Every active set is tried, before and after the compass search,
        // which alone stalls on slanted boundaries.
        let r = kkt_refine(p, f, &s, f64::INFINITY);
        let c = pattern_search(p, f, &r, 0.1 * r.norm().max(1.0), 1e-12);
        let c = kkt_refine(p, f, &c, f64::INFINITY);
        for x in [s, r, c] {
            let viol = p.max_violation(&x).max(0.0);
            if viol > tolerance::FEASIBLE {
                continue;
            }
            let v = f.eval(&x);
            let better = best.as_ref().map_or(true, |(_, b, b_viol)| {
                let margin = SLACK_MARGIN * b.abs().max(1.0);
                v < b - margin || (v <= b + margin && (viol < *b_viol || (viol == *b_viol && v < *b)))
            });
            if better {
                best = Some((x, v, viol));
            }
        }
    }
    Ok(best.map(|(x, v, _)| (x, v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Existence {
    Yes,
    NoUnbounded,
    Unknown,
}

impl fmt::Display for Existence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Existence::Yes => "YES",
            Existence::NoUnbounded => "NO_UNBOUNDED",
            Existence::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    FrankWolfe1,
    SingleConstraint,
    FrankWolfe2,
    Eaves,
    /// Frank-Wolfe type 1 with Condition (A) from vanishing constraint operators.
    LinearConstraints,
    /// Frank-Wolfe type 1 with Condition (A) from vanishing linear parts.
    VanishingLinearParts,
    /// Frank-Wolfe type 1 with a trivial zero-form set.
    TrivialZeroFormSet,
    Unconstrained,
    /// No rule fired but a feasible point meets a certified lower bound.
    VerifiedMinimizer,
    None,
}

impl Rule {
    pub fn title(&self) -> &'static str {
        match self {
            Rule::FrankWolfe1 => "Frank-Wolfe type 1",
            Rule::SingleConstraint => "single convex constraint with Legendre objective",
            Rule::FrankWolfe2 => "Frank-Wolfe type 2 (compact operators with closed range)",
            Rule::Eaves => "Eaves type",
            Rule::LinearConstraints => "Frank-Wolfe type 1, linear constraints",
            Rule::VanishingLinearParts => "Frank-Wolfe type 1, vanishing linear parts",
            Rule::TrivialZeroFormSet => "Frank-Wolfe type 1, trivial zero-form set",
            Rule::Unconstrained => "Frank-Wolfe type 1, unconstrained",
            Rule::VerifiedMinimizer => "verified minimizer (value meets a certified lower bound)",
            Rule::None => "none",
        }
    }

    /// Hypotheses a rule relies on, by table name.
    pub fn hypotheses(&self) -> &'static [&'static str] {
        match self {
            Rule::FrankWolfe1
            | Rule::LinearConstraints
            | Rule::VanishingLinearParts
            | Rule::TrivialZeroFormSet
            | Rule::Unconstrained => &[LEGENDRE, BOUNDED, CONDITION_A],
            Rule::SingleConstraint => &[SINGLE_CONSTRAINT, LEGENDRE, BOUNDED],
            Rule::FrankWolfe2 => &[COMPACT_CLOSED_RANGE, BOUNDED, CONDITION_A],
            Rule::Eaves => &[FEASIBLE, EAVES_II, EAVES_III, CONDITION_A, LEGENDRE],
            Rule::VerifiedMinimizer => &[BOUNDED],
            Rule::None => &[],
        }
    }
}

pub const FEASIBLE: &str = "feasible_set_nonempty";
pub const LEGENDRE: &str = "legendre_objective";
pub const BOUNDED: &str = "bounded_below";
pub const CONDITION_A: &str = "condition_a";
pub const SINGLE_CONSTRAINT: &str = "single_constraint";
pub const COMPACT_CLOSED_RANGE: &str = "compact_closed_range";
pub const EAVES_II: &str = "eaves_recession_curvature";
pub const EAVES_III: &str = "eaves_recession_slope";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPoint {
    pub point: Vector,
    pub value: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub exists: Existence,
    pub fired_rule: Rule,
    pub hypotheses: Vec<Hypothesis>,
    pub boundedness: BoundednessVerdict,
    pub objective_class: FormClass,
    pub witness: Option<WitnessPoint>,
    /// Exact single-constraint solution when the solver ran.
    #[serde(skip)]
    pub solution: Option<Solution>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn hypothesis(&self, name: &str) -> Option<&Verdict> {
        self.hypotheses.iter().find(|h| h.name == name).map(|h| &h.verdict)
    }

    fn holds(&self, name: &str) -> bool {
        self.hypothesis(name).is_some_and(Verdict::is_holds)
    }
}

fn flag(ok: bool, yes: &str, no: &str) -> Verdict {
    if ok {
        Verdict::holds(yes)
    } else {
        Verdict {
            status: Status::Violated,
            witness: None,
            base: None,
            notes: vec![no.to_string()],
        }
    }
}

/// Evaluates every hypothesis and fires the first applicable rule.
pub fn certify_existence(p: &Problem) -> Result<Certificate> {
    let original = prepare_problem(p)?;
    let p = original.without_vacuous_constraints();
    let mut notes = Vec::new();
    if p.m() < original.m() {
        notes.push(format!("dropped {} vacuous constraint(s)", original.m() - p.m()));
    }
    let x_feas = find_feasible_point(&p)?.ok_or(QpError::InfeasibleProblem)?;

    let objective_class = classify_form(&p.objective.op, p.space)?;
    let legendre = objective_class.legendre;
    let mut compact = objective_class.compact_closed_range;
    for g in &p.constraints {
        compact &= classify_form(&g.op, p.space)?.compact_closed_range;
    }
    let analysis = ConeAnalysis::new(&p)?;
    let cond_a = check_condition_a_with(&analysis);
    let boundedness = bounded_below(&p, &x_feas, Some(&analysis))?;
    let eaves = check_eaves_with(&analysis, &x_feas)?;

    let mut cert = Certificate {
        exists: Existence::Unknown,
        fired_rule: Rule::None,
        hypotheses: vec![
            Hypothesis { name: FEASIBLE, verdict: Verdict::holds("feasible point found").with_base(x_feas.clone()) },
            Hypothesis {
                name: LEGENDRE,
                verdict: flag(legendre, "objective form is Legendre", "objective form is not Legendre"),
            },
            Hypothesis { name: BOUNDED, verdict: boundedness.as_verdict() },
            Hypothesis { name: CONDITION_A, verdict: cond_a },
            Hypothesis {
                name: SINGLE_CONSTRAINT,
                verdict: flag(p.m() == 1, "exactly one constraint", &format!("{} constraints", p.m())),
            },
            Hypothesis {
                name: COMPACT_CLOSED_RANGE,
                verdict: flag(compact, "all operators compact with closed range", "some operator is not compact"),
            },
            Hypothesis { name: EAVES_II, verdict: eaves.cond_ii },
            Hypothesis { name: EAVES_III, verdict: eaves.cond_iii },
        ],
        boundedness,
        objective_class,
        witness: None,
        solution: None,
        notes,
    };

    let shortcut = condition_a_shortcut(&analysis);
    let fw1 = if p.m() == 0 {
        Rule::Unconstrained
    } else {
        match shortcut {
            Some(ConditionAShortcut::NoQuadraticConstraints) => Rule::LinearConstraints,
            Some(ConditionAShortcut::VanishingLinearParts) => Rule::VanishingLinearParts,
            Some(ConditionAShortcut::TrivialZeroFormSet) => Rule::TrivialZeroFormSet,
            None => Rule::FrankWolfe1,
        }
    };
    let unbounded = cert.boundedness.is_unbounded();
    let rule = [fw1, Rule::SingleConstraint, Rule::FrankWolfe2, Rule::Eaves]
        .into_iter()
        .find(|r| !unbounded && r.hypotheses().iter().all(|h| cert.holds(h)));

    // Witness: exact solvers when available, local refinement otherwise.
    let mut extra = Vec::new();
    if p.m() == 0 {
        if let Argmin::Minimum { point, .. } = unconstrained_argmin(&p.objective)? {
            extra.push(point);
        }
    } else if p.m() == 1 && !unbounded {
        if let Ok(sol) = solve_single_constraint(&p) {
            extra.push(sol.point.clone());
            cert.solution = Some(sol);
        }
    }
    let witness = if unbounded { None } else { best_feasible_point(&p, &x_feas, &extra)? };

    if let Some(rule) = rule {
        cert.exists = Existence::Yes;
        cert.fired_rule = rule;
    } else if let Boundedness::Unbounded { .. } = cert.boundedness.status {
        cert.exists = Existence::NoUnbounded;
    } else if let (Some(lb), Some((_, v))) = (cert.boundedness.lower_bound(), &witness) {
        if *v <= lb + tolerance::VERIFY * lb.abs().max(1.0) {
            cert.exists = Existence::Yes;
            cert.fired_rule = Rule::VerifiedMinimizer;
            cert.notes.push(format!("feasible point with value {v} meets the lower bound {lb}"));
        }
    }
    if cert.exists == Existence::Yes {
        cert.witness = witness.map(|(point, value)| WitnessPoint {
            max_violation: p.max_violation(&point).max(0.0),
            point,
            value,
        });
        if cert.witness.is_none() {
            cert.notes.push("existence certified but no feasible witness point was produced".into());
        }
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Exact single-constraint solver with an S-lemma multiplier.
    SingleConstraint,
    /// Witness attached to an existence certificate.
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub exists: Existence,
    pub method: Option<SolveMethod>,
    pub point: Option<Vector>,
    pub value: Option<f64>,
    pub max_violation: Option<f64>,
    pub multiplier: Option<f64>,
    pub case_tag: Option<CaseTag>,
    pub kkt_residual: Option<f64>,
    pub retraction_ray: Option<Vector>,
    pub notes: Vec<String>,
}

/// Computes a minimizer when existence can be certified.
///
/// One constraint goes to the exact solver; everything else returns the
/// certificate's witness. An unbounded problem is an error carrying the ray.
pub fn solve_problem(p: &Problem) -> Result<SolveReport> {
    let cert = certify_existence(p)?;
    if let Boundedness::Unbounded { witness_ray, base_point } = &cert.boundedness.status {
        return Err(QpError::NotBoundedBelow { ray: Some(witness_ray.clone()), base: Some(base_point.clone()) });
    }
    let mut report = SolveReport {
        exists: cert.exists,
        method: None,
        point: None,
        value: None,
        max_violation: None,
        multiplier: None,
        case_tag: None,
        kkt_residual: None,
        retraction_ray: None,
        notes: cert.notes.clone(),
    };
    let prepared = prepare_problem(p)?;
    if let Some(sol) = &cert.solution {
        report.method = Some(SolveMethod::SingleConstraint);
        report.max_violation = Some(prepared.max_violation(&sol.point).max(0.0));
        report.point = Some(sol.point.clone());
        report.value = Some(sol.value);
        report.multiplier = Some(sol.multiplier);
        report.case_tag = Some(sol.case_tag);
        report.kkt_residual = Some(sol.kkt_residual);
        report.retraction_ray = sol.retraction_ray.clone();
    } else if let Some(w) = &cert.witness {
        report.method = Some(SolveMethod::Certificate);
        report.point = Some(w.point.clone());
        report.value = Some(w.value);
        report.max_violation = Some(w.max_violation);
    } else {
        report.notes.push("existence not certified; no minimizer reported".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Operator, QuadraticFunction, SpaceDesc};

    fn quad(diag: &[f64], lin: &[f64], constant: f64) -> QuadraticFunction {
        QuadraticFunction::new(Operator::diagonal(diag, 0.0), Vector::new(lin.to_vec()), constant)
    }

    #[test]
    fn slater_point_examples() {
        let p = Problem::new(
            SpaceDesc::FiniteDim(3),
            quad(&[0.0, 0.0, 0.0], &[], 0.0),
            vec![quad(&[0.0, 0.0, 1.0], &[-1.0, 0.0, 0.0], -1.0)],
        );
        let x = slater_point(&p, 0).unwrap();
        assert!(p.constraints[0].eval(&x) <= -1e-8);
        let p = Problem::new(SpaceDesc::FiniteDim(1), quad(&[0.0], &[], 0.0), vec![quad(&[2.0], &[], 0.0)]);
        assert!(matches!(slater_point(&p, 0), Err(QpError::NoSlaterPoint { .. })));
    }

    #[test]
    fn linear_objective_unconstrained_is_unbounded() {
        let p = Problem::new(SpaceDesc::SequenceSpace, quad(&[], &[1.0], 0.0), vec![]);
        let b = check_bounded_below(&p).unwrap();
        match b.status {
            Boundedness::Unbounded { witness_ray, .. } => assert!(witness_ray[0] < 0.0),
            other => panic!("{other:?}"),
        }
        let c = certify_existence(&p).unwrap();
        assert_eq!(c.exists, Existence::NoUnbounded);
    }

    #[test]
    fn single_constraint_rule_fires() {
        // min -x² s.t. x² <= 1 (finite dimension, so Legendre).
        let p = Problem::new(SpaceDesc::FiniteDim(1), quad(&[-2.0], &[], 0.0), vec![quad(&[2.0], &[], -1.0)]);
        let c = certify_existence(&p).unwrap();
        assert_eq!(c.exists, Existence::Yes);
        // c_1 = 0, so the type 1 corollary fires first.
        assert_eq!(c.fired_rule, Rule::VanishingLinearParts);
        let w = c.witness.unwrap();
        assert!((w.value + 1.0).abs() < 1e-9);

        // min x1 - ½x2² s.t. ½x2² - x1 <= 0: Condition (A) fails along e1.
        let p = Problem::new(
            SpaceDesc::FiniteDim(2),
            quad(&[0.0, -1.0], &[1.0, 0.0], 0.0),
            vec![quad(&[0.0, 1.0], &[-1.0, 0.0], 0.0)],
        );
        let c = certify_existence(&p).unwrap();
        assert_eq!(c.hypothesis(CONDITION_A).unwrap().status, Status::Violated);
        assert_eq!(c.fired_rule, Rule::SingleConstraint);
        assert!(c.witness.unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn unconstrained_convex_problem() {
        let p = Problem::new(SpaceDesc::FiniteDim(2), quad(&[1.0, 1.0], &[1.0, 0.0], 0.0), vec![]);
        let c = certify_existence(&p).unwrap();
        assert_eq!(c.fired_rule, Rule::Unconstrained);
        assert!((c.witness.unwrap().value + 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_problem_errors() {
        let p = Problem::new(SpaceDesc::FiniteDim(1), quad(&[0.0], &[], 0.0), vec![quad(&[2.0], &[], 1.0)]);
        assert_eq!(certify_existence(&p), Err(QpError::InfeasibleProblem));
    }
}
