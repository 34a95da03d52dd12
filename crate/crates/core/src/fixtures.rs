//! Worked examples with expected-fact tables.
//!
//! Each fixture runs a scripted pipeline and compares what it observes with
//! a list of expected facts. A fact carries a provenance note saying where
//! the expectation comes from: either the example's own claim or an
//! independent derivation. Facts whose expectation departs from the
//! example's printed claim carry a discrepancy note and must still pass.

use serde::Serialize;

use crate::certify::{certify_existence, Boundedness, Existence, Rule, EAVES_II, EAVES_III};
use crate::error::{QpError, Result};
use crate::galerkin::{discretized_multiplication_problem, multiplication_witness_value, sweep_with, truncate, Diagnosis};
use crate::model::{apply_operator, validate_problem, Operator, Problem, QuadraticFunction, SpaceDesc, Vector};
use crate::oracle::oracle_minimize;
use crate::recession::{verify_condition_a_witness, ConeAnalysis, Status};
use crate::report::num;
use crate::spectral::classify_form;

pub const FIXTURES: [(&str, &str); 6] = [
    ("legendre_shift", "Legendre classification of T x = (0, x2, x3, ...)"),
    ("mult_operator", "the multiplication form Q(x) = int t x(t)^2 dt is not Legendre"),
    ("ell2_solvable", "sequence-space QP with two constraints and optimal value 1"),
    ("l2_nonattained", "L2[0,1] QP with infimum 0 that is never attained"),
    ("bk02", "three-dimensional QP that is bounded below but has no solution"),
    ("condA_not_necessary", "solvable QP on which Condition (A) fails"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fact {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureResult {
    pub name: String,
    pub description: String,
    pub facts: Vec<Fact>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl FixtureResult {
    pub fn fact(&self, name: &str) -> Option<&Fact> {
        self.facts.iter().find(|f| f.name == name)
    }
}

#[derive(Default)]
struct Facts {
    facts: Vec<Fact>,
    notes: Vec<String>,
}

impl Facts {
    fn check(
        &mut self,
        name: &str,
        expected: impl Into<String>,
        observed: impl Into<String>,
        pass: bool,
        provenance: &str,
    ) -> &mut Fact {
        self.facts.push(Fact {
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            pass,
            provenance: provenance.into(),
            discrepancy: None,
        });
        self.facts.last_mut().unwrap()
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

impl Fact {
    fn discrepancy(&mut self, note: &str) {
        self.discrepancy = Some(note.into());
    }
}

fn q(op: Operator, lin: &[f64], constant: f64) -> QuadraticFunction {
    QuadraticFunction::new(op, Vector::new(lin.to_vec()), constant)
}

fn vec_str(v: &Vector) -> String {
    let parts: Vec<String> = v.coords().iter().map(|&x| num(x)).collect();
    format!("({})", parts.join(", "))
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Holds => "HOLDS",
        Status::Violated => "VIOLATED",
        Status::Unknown => "UNKNOWN",
    }
}

/// Sequence-space problem with optimal value 1.
///
/// `f(x) = ½(-x1² + x3² + Σ_{j>=5} x_j²) + x2 + x3` subject to
/// `½x1² - x2 - x3 + 1 <= 0` and `½x3² <= 0`.
pub fn ell2_solvable_problem() -> Problem {
    Problem::new(
        SpaceDesc::SequenceSpace,
        q(Operator::diagonal(&[-1.0, 0.0, 1.0, 0.0], 1.0), &[0.0, 1.0, 1.0], 0.0),
        vec![
            q(Operator::diagonal(&[1.0], 0.0), &[0.0, -1.0, -1.0], 1.0),
            q(Operator::diagonal(&[0.0, 0.0, 1.0], 0.0), &[], 0.0),
        ],
    )
}

/// `min -x2 x3 + 2 x1` subject to `½x2² - x1 <= 0` and `½x3² - x1 - 1 <= 0`.
pub fn bk02_problem() -> Problem {
    Problem::new(
        SpaceDesc::FiniteDim(3),
        q(
            Operator::from_rows(&[vec![0.0, 0.0, 0.0], vec![0.0, 0.0, -1.0], vec![0.0, -1.0, 0.0]], 0.0),
            &[2.0, 0.0, 0.0],
            0.0,
        ),
        vec![
            q(Operator::diagonal(&[0.0, 1.0, 0.0], 0.0), &[-1.0, 0.0, 0.0], 0.0),
            q(Operator::diagonal(&[0.0, 0.0, 1.0], 0.0), &[-1.0, 0.0, 0.0], -1.0),
        ],
    )
}

/// `f(x) = ½(-x2² + Σ_{j>=3} x_j²)` subject to `½Σ_{j>=2} x_j² <= 0` and
/// `½x3² + x1 <= 0`. The feasible set is `{(t, 0, 0, ...) : t <= 0}` and
/// every feasible point is optimal.
pub fn cond_a_not_necessary_problem() -> Problem {
    Problem::new(
        SpaceDesc::SequenceSpace,
        q(Operator::diagonal(&[0.0, -1.0], 1.0), &[], 0.0),
        vec![
            q(Operator::diagonal(&[0.0], 1.0), &[], 0.0),
            q(Operator::diagonal(&[0.0, 0.0, 1.0], 0.0), &[1.0, 0.0, 0.0], 0.0),
        ],
    )
}

/// Levels of the non-attainment sweep.
pub const L2_LEVELS: [usize; 4] = [8, 16, 32, 64];

/// Problem analyzed by a fixture, when it has one. The `l2_nonattained`
/// fixture returns its coarsest discretization.
pub fn fixture_problem(name: &str) -> Result<Option<Problem>> {
    Ok(match name {
        "legendre_shift" | "mult_operator" => None,
        "ell2_solvable" => Some(ell2_solvable_problem()),
        "l2_nonattained" => Some(discretized_multiplication_problem(L2_LEVELS[0])?),
        "bk02" => Some(bk02_problem()),
        "condA_not_necessary" => Some(cond_a_not_necessary_problem()),
        other => return Err(QpError::UnknownFixture(other.into())),
    })
}

pub fn run_fixture(name: &str) -> Result<FixtureResult> {
    let (_, description) =
        FIXTURES.iter().find(|(n, _)| *n == name).ok_or_else(|| QpError::UnknownFixture(name.into()))?;
    let mut facts = Facts::default();
    match name {
        "legendre_shift" => legendre_shift(&mut facts)?,
        "mult_operator" => mult_operator(&mut facts)?,
        "ell2_solvable" => ell2_solvable(&mut facts)?,
        "l2_nonattained" => l2_nonattained(&mut facts)?,
        "bk02" => bk02(&mut facts)?,
        _ => cond_a_not_necessary(&mut facts)?,
    }
    let passed = facts.facts.iter().all(|f| f.pass);
    Ok(FixtureResult {
        name: name.into(),
        description: (*description).into(),
        facts: facts.facts,
        notes: facts.notes,
        passed,
    })
}

pub fn run_all() -> Result<Vec<FixtureResult>> {
    FIXTURES.iter().map(|(n, _)| run_fixture(n)).collect()
}

/// `<e_j, T e_j>` for the first few coordinates beyond the head.
fn tail_probe(t: &Operator) -> Vec<f64> {
    let k = t.head_dim();
    (k..k + 64).step_by(16).map(|j| t.form(&Vector::basis(j + 1, j))).collect()
}

fn legendre_shift(f: &mut Facts) -> Result<()> {
    let t = Operator::diagonal(&[0.0], 1.0);
    let c = classify_form(&t, SpaceDesc::SequenceSpace)?;
    f.check("legendre", "true", c.legendre.to_string(), c.legendre, "stated: the form is Legendre");
    f.check("compact", "false", c.compact.to_string(), !c.compact, "derived: a nonzero identity tail is not compact");
    f.check("psd", "true", c.psd.to_string(), c.psd, "derived: spectrum {0} plus tail 1");
    let probe = tail_probe(&t);
    f.check(
        "unit_vector_probe",
        "Q(e_j) = 1 beyond the head",
        format!("{:?}", probe.iter().map(|&x| num(x)).collect::<Vec<_>>()),
        probe.iter().all(|&v| (v - 1.0).abs() <= 1e-12),
        "derived: Q(e_j) stays at the tail value, so e_j -> 0 weakly cannot refute the Legendre property",
    );
    let id = classify_form(&Operator::scalar(1.0), SpaceDesc::SequenceSpace)?;
    f.check(
        "identity_legendre_not_compact",
        "legendre=true compact=false",
        format!("legendre={} compact={}", id.legendre, id.compact),
        id.legendre && !id.compact,
        "stated: <x, I x> is Legendre while I is not compact",
    );
    Ok(())
}

fn mult_operator(f: &mut Facts) -> Result<()> {
    f.note("T x(t) = t x(t) on L2[0,1] is represented by its midpoint discretization with 16 nodes and a zero tail");
    let disc = discretized_multiplication_problem(16)?;
    let t = Operator::new(disc.objective.op.block.clone(), 0.0);
    let c = classify_form(&t, SpaceDesc::SequenceSpace)?;
    f.check("legendre", "false", c.legendre.to_string(), !c.legendre, "stated: the form is not Legendre");
    f.check(
        "compact_closed_range",
        "true",
        c.compact_closed_range.to_string(),
        c.compact_closed_range,
        "derived: finite-rank representation with zero tail",
    );
    f.check("weakly_continuous", "true", c.weakly_continuous.to_string(), c.weakly_continuous, "derived: compact operator");
    let probe = tail_probe(&t);
    f.check(
        "unit_vector_probe",
        "Q(e_j) = 0 with ||e_j|| = 1",
        format!("{:?}", probe.iter().map(|&x| num(x)).collect::<Vec<_>>()),
        probe.iter().all(|&v| v.abs() <= 1e-12),
        "derived: e_j -> 0 weakly and Q(e_j) -> Q(0) but ||e_j|| = 1, refuting the Legendre property",
    );
    let values: Vec<f64> = [4u32, 8, 16, 32, 64].iter().map(|&n| multiplication_witness_value(n)).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    f.check(
        "witness_sequence",
        "Q(x_n) decreasing to 0 while ||x_n||² = 1 - 1/n",
        format!("{:?}", values.iter().map(|&x| num(x)).collect::<Vec<_>>()),
        decreasing && values[4] < 0.04,
        "derived: x_n = sqrt(n) on [1/n², 1/n] gives Q(x_n) = (n/2)(1/n² - 1/n⁴)",
    );
    Ok(())
}

fn ell2_solvable(f: &mut Facts) -> Result<()> {
    let p = ell2_solvable_problem();
    f.note(
        "the second constraint operator is printed as the shift (0, 0, 0, x3, x4, ...), which is not self-adjoint; \
         it is encoded as diag(0, 0, 1) with zero tail to match the displayed feasible set",
    );
    let c = classify_form(&p.objective.op, p.space)?;
    f.check(
        "objective_class",
        "legendre=true psd=false",
        format!("legendre={} psd={}", c.legendre, c.psd),
        c.legendre && !c.psd,
        "stated: the objective form is Legendre",
    );
    let tx = apply_operator(&p.objective.op, &Vector::new(vec![1.0, 2.0, 0.0, 0.0, 7.0]));
    f.check(
        "apply_operator",
        "(-1, 0, 0, 0, 7)",
        vec_str(&tx),
        tx == Vector::new(vec![-1.0, 0.0, 0.0, 0.0, 7.0]),
        "stated: T x = (-x1, 0, x3, 0, x5, ...)",
    );
    let v010 = p.objective.eval(&Vector::new(vec![0.0, 1.0, 0.0]));
    f.check("f(0,1,0)", "1", num(v010), v010 == 1.0, "derived: hand evaluation 0 + 1 + 0");
    let v120 = p.objective.eval(&Vector::new(vec![1.0, 2.0, 0.0]));
    f.check("f(1,2,0)", "1.5", num(v120), v120 == 1.5, "derived: hand evaluation ½(-1) + 2").discrepancy(
        "the example prints f(x*) = 1 for x* = (1, 2, 0, ...); direct evaluation gives 1.5",
    );

    let a = ConeAnalysis::new(&p)?;
    let displayed = [vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, -1.0]];
    let outside = [vec![0.0, -1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]];
    let in_displayed = |v: &Vector| v.get(0).abs() <= 1e-9 && v.get(2).abs() <= 1e-9 && v.get(1) >= -1e-9;
    let gens = a.cone.head_generators().unwrap_or_default();
    let mutual = !gens.is_empty()
        && gens.iter().all(in_displayed)
        && displayed.iter().all(|v| a.cone.contains(&Vector::new(v.clone())))
        && outside.iter().all(|v| !a.cone.contains(&Vector::new(v.clone())));
    f.check(
        "recession_cone",
        "{(0, v2, 0, v4, v5, ...) : v2 >= 0}, tail_free=true",
        format!("{} head generators, tail_free={}", gens.len(), a.cone.tail_free),
        mutual && a.cone.tail_free && a.cone.contains(&Vector::basis(9, 8)),
        "stated: the cone is {(0, v2, 0, v4, v5, ...)}; head coordinates compared by mutual generator membership",
    );

    let cond_a = crate::recession::check_condition_a_with(&a);
    let reverified = cond_a
        .witness
        .as_ref()
        .is_some_and(|v| (0..p.m()).any(|i| verify_condition_a_witness(&a, v, i)));
    f.check(
        "condition_a",
        "VIOLATED with re-verifiable witness",
        format!(
            "{} witness {}",
            status_str(cond_a.status),
            cond_a.witness.as_ref().map_or("none".into(), vec_str)
        ),
        cond_a.status == Status::Violated && reverified,
        "derived: v = (0, 1, 0, 0) lies in the cone, <v, T v> = 0 and <c1, v> = -1",
    )
    .discrepancy(
        "the example lists the zero-form set as {(0, 0, 0, v4, 0, ...)} and concludes Condition (A) holds; \
         with the displayed T the zero-form set also contains (0, v2, 0, 0) with v2 >= 0",
    );

    let cert = certify_existence(&p)?;
    let wv = cert.witness.as_ref().map(|w| w.value);
    f.check(
        "existence",
        "YES with a feasible witness of value 1",
        format!("{} via {:?}, witness value {}", cert.exists, cert.fired_rule, wv.map_or("none".into(), num)),
        cert.exists == Existence::Yes
            && cert.witness.as_ref().is_some_and(|w| (w.value - 1.0).abs() <= 1e-6 && w.max_violation <= 1e-8),
        "stated: f(x) >= 1 on F; the bound is attained at (0, 1, 0, ...)",
    );

    let t5 = truncate(&p, 5)?;
    let oracle = oracle_minimize(&t5, 4.0, 1e-3)?;
    let pipeline = certify_existence(&t5)?;
    let pv = pipeline.witness.as_ref().map(|w| w.value);
    let agree = (oracle.inf_estimate - 1.0).abs() <= 1e-6 && pv.is_some_and(|v| (v - 1.0).abs() <= 1e-6);
    f.check(
        "truncation_n5",
        "oracle and certifier both give 1 within 1e-6",
        format!("oracle {}, certifier {}", num(oracle.inf_estimate), pv.map_or("none".into(), num)),
        agree,
        "derived: grid oracle on [-4, 4]^5 with step 1e-3, certifier witness on the same truncation",
    );
    Ok(())
}

fn l2_nonattained(f: &mut Facts) -> Result<()> {
    f.note(
        "L2[0,1] is discretized at midpoints t_j = (j - ½)/n with weight 1/n; \
         the sweep studies that grid family, not the function space itself",
    );
    let r = sweep_with(&L2_LEVELS, discretized_multiplication_problem)?;
    let vals = &r.inf_values;
    let shown = |xs: &[f64]| format!("{:?}", xs.iter().map(|&x| num(x)).collect::<Vec<_>>());
    f.check("positive_values", "all > 0", shown(vals), vals.iter().all(|&v| v > 0.0), "stated: f(x) > 0 on F");
    f.check(
        "decreasing_to_zero",
        "strictly decreasing, halving with n",
        shown(vals),
        vals.windows(2).all(|w| w[1] < w[0]) && vals[vals.len() - 1] < vals[0] / 4.0,
        "stated: the infimum of f over F is 0",
    );
    let norms = &r.minimizer_norms;
    f.check(
        "norm_growth",
        "last / first >= 2",
        shown(norms),
        norms[norms.len() - 1] >= 2.0 * norms[0],
        "derived: minimizers concentrate near t = 0",
    );
    f.check(
        "diagnosis",
        "NON_ATTAINMENT_SIGNATURE",
        serde_json::to_value(r.diagnosis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        r.diagnosis == Diagnosis::NonAttainmentSignature,
        "derived: settled infima with escaping minimizer norms",
    );
    let w4 = multiplication_witness_value(4);
    f.check(
        "witness_value_n4",
        "0.1171875",
        num(w4),
        w4 == 0.1171875,
        "stated: (n/2)(1/n² - 1/n⁴) along x_n = sqrt(n) on [1/n², 1/n]",
    );
    f.note("(n/2)(1/n² - 1/n⁴) is the integral of t x_n(t)², twice the objective value at x_n");
    Ok(())
}

fn bk02(f: &mut Facts) -> Result<()> {
    let p = bk02_problem();
    let report = validate_problem(&p);
    f.check("validation", "OK", if report.is_ok() { "OK".into() } else { format!("{report}") }, report.is_ok(), "stated: T1 = diag(0, 1, 0), T2 = diag(0, 0, 1) are psd");

    let a = ConeAnalysis::new(&p)?;
    let gens = a.cone.head_generators().unwrap_or_default();
    let e1 = Vector::new(vec![1.0, 0.0, 0.0]);
    let mutual = gens.len() == 1 && (gens[0].axpy(-1.0, &e1)).norm() <= 1e-9 && a.cone.contains(&e1);
    f.check(
        "recession_cone",
        "{v : v1 >= 0, v2 = v3 = 0}",
        format!("generators {:?}", gens.iter().map(vec_str).collect::<Vec<_>>()),
        mutual && !a.cone.contains(&e1.scaled(-1.0)),
        "stated: the cone is {v1 >= 0, v2 = 0, v3 = 0}",
    );

    let cond_a = crate::recession::check_condition_a_with(&a);
    let reverified = cond_a.witness.as_ref().is_some_and(|v| {
        (v.axpy(-1.0, &e1)).norm() <= 1e-9 && (0..p.m()).any(|i| verify_condition_a_witness(&a, v, i))
    });
    f.check(
        "condition_a",
        "VIOLATED with witness (1, 0, 0)",
        format!("{} witness {}", status_str(cond_a.status), cond_a.witness.as_ref().map_or("none".into(), vec_str)),
        cond_a.status == Status::Violated && reverified,
        "stated: Condition (A) does not hold",
    );

    let cert = certify_existence(&p)?;
    f.check(
        "existence",
        "UNKNOWN",
        cert.exists.to_string(),
        cert.exists == Existence::Unknown && cert.fired_rule == Rule::None,
        "derived: Condition (A) fails and m = 2, so no rule applies and no point meets the bound",
    );
    f.note("ground truth from the example: the problem has no solution");
    let lb = cert.boundedness.lower_bound();
    f.check(
        "bounded_below",
        "BOUNDED with lower bound -1",
        crate::report::boundedness(&cert.boundedness.status),
        matches!(cert.boundedness.status, Boundedness::Bounded { .. }) && lb.is_some_and(|v| (v + 1.0).abs() <= 1e-6),
        "derived: f + g1 + g2 = ½(x2 - x3)² - 1 >= -1",
    )
    .discrepancy("an UNKNOWN boundedness verdict was anticipated; the Lagrangian dual certifies the bound -1 directly");

    let mut estimates = Vec::new();
    let mut attained = Vec::new();
    for r in [10.0, 100.0, 1000.0] {
        let o = oracle_minimize(&p, r, 1e-4)?;
        estimates.push(o.inf_estimate);
        attained.push(o.attained_in_box);
    }
    f.check(
        "oracle_radius_sweep",
        "strictly decreasing, within 0.05 of -1 at R = 1000, never attained inside the box",
        format!(
            "{:?} attained_in_box {:?}",
            estimates.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            attained
        ),
        estimates.windows(2).all(|w| w[1] < w[0])
            && (estimates[2] + 1.0).abs() <= 0.05
            && attained.iter().all(|a| !a),
        "derived: on [-R, R]³ the minimum sits on the face x1 = R at (R, ±sqrt(2R), ±sqrt(2R + 2)) with value 2R - 2 sqrt(R(R + 1)), which tends to -1",
    );
    Ok(())
}

fn cond_a_not_necessary(f: &mut Facts) -> Result<()> {
    let p = cond_a_not_necessary_problem();
    let a = ConeAnalysis::new(&p)?;
    let gens = a.cone.head_generators().unwrap_or_default();
    let minus_e1 = Vector::new(vec![-1.0]);
    let only_minus_e1 = gens.len() == 1 && (gens[0].axpy(-1.0, &minus_e1.padded(gens[0].dim()))).norm() <= 1e-9;
    f.check(
        "recession_cone",
        "{(v1, 0, 0, ...) : v1 <= 0}",
        format!("generators {:?}, tail_free={}", gens.iter().map(vec_str).collect::<Vec<_>>(), a.cone.tail_free),
        only_minus_e1 && !a.cone.tail_free && !a.cone.contains(&Vector::new(vec![1.0])),
        "stated: the cone is {v = (v1, 0, 0, ...) : v1 <= 0}",
    );

    let cond_a = crate::recession::check_condition_a_with(&a);
    let reverified = cond_a.witness.as_ref().is_some_and(|v| {
        verify_condition_a_witness(&a, v, 1) && (p.constraints[1].lin.dot(v) + 1.0).abs() <= 1e-9
    });
    f.check(
        "condition_a",
        "VIOLATED with witness (-1, 0, ...) and <c2, v> = -1",
        format!("{} witness {}", status_str(cond_a.status), cond_a.witness.as_ref().map_or("none".into(), vec_str)),
        cond_a.status == Status::Violated && reverified,
        "stated: Condition (A) does not hold for this problem",
    );

    let cert = certify_existence(&p)?;
    for (name, label) in [(EAVES_II, "eaves_curvature"), (EAVES_III, "eaves_slope")] {
        let s = cert.hypothesis(name).map(|v| v.status);
        f.check(
            label,
            "HOLDS",
            s.map_or("missing", status_str),
            s == Some(Status::Holds),
            "derived: T kills e1 and c is orthogonal to e1",
        );
    }
    let lb = cert.boundedness.lower_bound();
    f.check(
        "bounded_below",
        "lower bound 0",
        lb.map_or("none".into(), num),
        lb.is_some_and(|v| v.abs() <= 1e-9),
        "stated: f(x) = 0 on F",
    );
    f.check(
        "existence",
        "YES with a verified witness of value 0",
        format!(
            "{} via {:?}, witness {}",
            cert.exists,
            cert.fired_rule,
            cert.witness.as_ref().map_or("none".into(), |w| format!("{} at {}", num(w.value), vec_str(&w.point)))
        ),
        cert.exists == Existence::Yes
            && cert.fired_rule == Rule::VerifiedMinimizer
            && cert.witness.as_ref().is_some_and(|w| w.value.abs() <= 1e-6 && w.max_violation <= 1e-8),
        "stated: the solution set coincides with F",
    );
    f.note("Condition (A) is sufficient, not necessary: it fails here and the problem is still solvable");
    Ok(())
}
