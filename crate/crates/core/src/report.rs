//! Report rendering.
//!
//! JSON reports wrap the payload in `{"kind", "feasibility_tol", "result"}`.
//! Payload keys follow the serde field names of the library types. Numbers in
//! JSON and CSV are rounded to 12 significant digits so identical runs
//! produce identical bytes.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::certify::{Boundedness, Certificate, SolveReport};
use crate::fixtures::{FixtureResult, FIXTURES};
use crate::galerkin::SweepReport;
use crate::model::Vector;
use crate::recession::{Status, Verdict};
use crate::tolerance;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected text, json or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub format: Format,
    /// Constraint values up to this count as feasible in the report.
    pub tol: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { format: Format::Text, tol: tolerance::REPORT }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Certificate(&'a Certificate),
    Solve(&'a SolveReport),
    Sweep(&'a SweepReport),
    Fixture(&'a FixtureResult),
    Fixtures(&'a [FixtureResult]),
    FixtureList,
}

impl Report<'_> {
    fn kind(&self) -> &'static str {
        match self {
            Report::Certificate(_) => "certificate",
            Report::Solve(_) => "solve",
            Report::Sweep(_) => "sweep",
            Report::Fixture(_) => "fixture",
            Report::Fixtures(_) => "fixtures",
            Report::FixtureList => "fixture_list",
        }
    }
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal rendering of `x` after rounding.
pub fn num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else if !r.is_finite() || (1e-6..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn render_report(report: &Report, opts: &RenderOptions) -> String {
    match opts.format {
        Format::Json => render_json(report, opts),
        Format::Csv => render_csv(report),
        Format::Text => render_text(report, opts),
    }
}

fn render_json(report: &Report, opts: &RenderOptions) -> String {
    let result = match report {
        Report::Certificate(c) => {
            let mut v = to_value(c);
            if let Some(w) = &c.witness {
                v["witness"]["feasible"] = Value::Bool(w.max_violation <= opts.tol);
            }
            v
        }
        Report::Solve(s) => {
            let mut v = to_value(s);
            v["feasible"] = s.max_violation.map_or(Value::Null, |m| Value::Bool(m <= opts.tol));
            v
        }
        Report::Sweep(s) => to_value(s),
        Report::Fixture(f) => to_value(f),
        Report::Fixtures(fs) => json!({
            "passed": fs.iter().all(|f| f.passed),
            "fixtures": to_value(fs),
        }),
        Report::FixtureList => Value::Array(
            FIXTURES.iter().map(|(n, d)| json!({"name": n, "description": d})).collect(),
        ),
    };
    let doc = json!({
        "kind": report.kind(),
        "feasibility_tol": opts.tol,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&rounded(doc)).expect("json values serialize");
    s.push('\n');
    s
}

fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |fields: &[String]| w.write_record(fields).expect("in-memory csv write");
    let s = |x: &str| x.to_string();
    match report {
        Report::Sweep(r) => {
            row(&[s("level"), s("inf_value"), s("minimizer_norm")]);
            for ((n, v), norm) in r.levels.iter().zip(&r.inf_values).zip(&r.minimizer_norms) {
                row(&[n.to_string(), num(*v), num(*norm)]);
            }
        }
        Report::Certificate(c) => {
            row(&[s("hypothesis"), s("status"), s("required")]);
            let required = c.fired_rule.hypotheses();
            for h in &c.hypotheses {
                row(&[s(h.name), status(h.verdict.status).into(), required.contains(&h.name).to_string()]);
            }
        }
        Report::Solve(r) => {
            row(&[s("key"), s("value")]);
            row(&[s("exists"), r.exists.to_string()]);
            row(&[s("value"), r.value.map_or(String::new(), num)]);
            row(&[s("max_violation"), r.max_violation.map_or(String::new(), num)]);
            row(&[s("multiplier"), r.multiplier.map_or(String::new(), num)]);
            if let Some(p) = &r.point {
                for (i, x) in p.coords().iter().enumerate() {
                    row(&[format!("x{}", i + 1), num(*x)]);
                }
            }
        }
        Report::Fixture(f) => {
            row(&[s("fixture"), s("fact"), s("expected"), s("observed"), s("pass")]);
            fixture_rows(f, &mut row);
        }
        Report::Fixtures(fs) => {
            row(&[s("fixture"), s("fact"), s("expected"), s("observed"), s("pass")]);
            for f in fs.iter() {
                fixture_rows(f, &mut row);
            }
        }
        Report::FixtureList => {
            row(&[s("name"), s("description")]);
            for (n, d) in FIXTURES {
                row(&[s(n), s(d)]);
            }
        }
    }
    drop(row);
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

fn fixture_rows(f: &FixtureResult, row: &mut impl FnMut(&[String])) {
    for fact in &f.facts {
        row(&[f.name.clone(), fact.name.clone(), fact.expected.clone(), fact.observed.clone(), fact.pass.to_string()]);
    }
}

fn status(s: Status) -> &'static str {
    match s {
        Status::Holds => "HOLDS",
        Status::Violated => "VIOLATED",
        Status::Unknown => "UNKNOWN",
    }
}

fn point(v: &Vector) -> String {
    let parts: Vec<String> = v.coords().iter().map(|&x| num(x)).collect();
    format!("({})", parts.join(", "))
}

fn verdict_line(out: &mut String, indent: &str, name: &str, v: &Verdict) {
    let _ = write!(out, "{indent}{name:<28} {:<9}", status(v.status));
    if let Some(w) = &v.witness {
        let _ = write!(out, " witness {}", point(w));
    }
    if let Some(b) = &v.base {
        let _ = write!(out, " at {}", point(b));
    }
    if let Some(n) = v.notes.first() {
        let _ = write!(out, "  [{n}]");
    }
    out.push('\n');
}

fn render_text(report: &Report, opts: &RenderOptions) -> String {
    let mut out = String::new();
    match report {
        Report::Certificate(c) => certificate_text(&mut out, c, opts),
        Report::Solve(r) => solve_text(&mut out, r, opts),
        Report::Sweep(r) => sweep_text(&mut out, r),
        Report::Fixture(f) => fixture_text(&mut out, f),
        Report::Fixtures(fs) => {
            for f in fs.iter() {
                fixture_text(&mut out, f);
            }
            let passed = fs.iter().filter(|f| f.passed).count();
            let _ = writeln!(out, "{passed}/{} fixtures passed", fs.len());
        }
        Report::FixtureList => {
            for (n, d) in FIXTURES {
                let _ = writeln!(out, "{n:<22} {d}");
            }
        }
    }
    out
}

fn certificate_text(out: &mut String, c: &Certificate, opts: &RenderOptions) {
    let _ = writeln!(out, "existence: {}", c.exists);
    let _ = writeln!(out, "Theorem: {}", c.fired_rule.title());
    for name in c.fired_rule.hypotheses() {
        if let Some(v) = c.hypothesis(name) {
            verdict_line(out, "  ", name, v);
        }
    }
    if let Some(w) = &c.witness {
        let feasible = if w.max_violation <= opts.tol { "feasible" } else { "NOT feasible" };
        let _ = writeln!(
            out,
            "witness: value {} at {} (max violation {}, {feasible} at tol {})",
            num(w.value),
            point(&w.point),
            num(w.max_violation),
            num(opts.tol)
        );
    }
    let _ = writeln!(out, "boundedness: {}", boundedness(&c.boundedness.status));
    let k = &c.objective_class;
    let _ = writeln!(
        out,
        "objective form: psd={} legendre={} weakly_lsc={} compact={} tail={}{}",
        k.psd,
        k.legendre,
        k.weakly_lsc,
        k.compact,
        num(k.tail),
        if k.borderline_tail { " (borderline tail, classified by sign)" } else { "" }
    );
    out.push_str("hypotheses:\n");
    for h in &c.hypotheses {
        verdict_line(out, "  ", h.name, &h.verdict);
    }
    notes(out, c.notes.iter().chain(&c.boundedness.notes));
}

pub(crate) fn boundedness(b: &Boundedness) -> String {
    match b {
        Boundedness::Bounded { lower_bound, multiplier } => match multiplier {
            Some(m) => format!("BOUNDED (lower bound {}, multiplier {})", num(*lower_bound), num(*m)),
            None => format!("BOUNDED (lower bound {})", num(*lower_bound)),
        },
        Boundedness::Unbounded { witness_ray, base_point } => {
            format!("UNBOUNDED (ray {} from {})", point(witness_ray), point(base_point))
        }
        Boundedness::Unknown { best_probe } => format!("UNKNOWN (best probe value {})", num(*best_probe)),
    }
}

fn solve_text(out: &mut String, r: &SolveReport, opts: &RenderOptions) {
    let _ = writeln!(out, "existence: {}", r.exists);
    if let (Some(p), Some(v)) = (&r.point, r.value) {
        let _ = writeln!(out, "minimizer: {}", point(p));
        let _ = writeln!(out, "value: {}", num(v));
    }
    if let Some(m) = r.max_violation {
        let feasible = if m <= opts.tol { "feasible" } else { "NOT feasible" };
        let _ = writeln!(out, "max violation: {} ({feasible} at tol {})", num(m), num(opts.tol));
    }
    if let Some(m) = r.multiplier {
        let _ = writeln!(out, "multiplier: {}", num(m));
    }
    if let Some(t) = r.case_tag {
        let _ = writeln!(out, "case: {}", to_value(&t).as_str().unwrap_or_default());
    }
    if let Some(k) = r.kkt_residual {
        let _ = writeln!(out, "kkt residual: {}", num(k));
    }
    if let Some(ray) = &r.retraction_ray {
        let _ = writeln!(out, "retraction ray: {}", point(ray));
    }
    notes(out, r.notes.iter());
}

fn sweep_text(out: &mut String, r: &SweepReport) {
    let _ = writeln!(out, "{:>8}  {:>20}  {:>20}", "level", "inf_value", "minimizer_norm");
    for ((n, v), norm) in r.levels.iter().zip(&r.inf_values).zip(&r.minimizer_norms) {
        let _ = writeln!(out, "{n:>8}  {:>20}  {:>20}", num(*v), num(*norm));
    }
    let _ = writeln!(out, "diagnosis: {}", to_value(&r.diagnosis).as_str().unwrap_or_default());
    notes(out, r.notes.iter());
}

fn fixture_text(out: &mut String, f: &FixtureResult) {
    let passed = f.facts.iter().filter(|x| x.pass).count();
    let _ = writeln!(
        out,
        "fixture {}: {} ({passed}/{} facts)",
        f.name,
        if f.passed { "PASS" } else { "FAIL" },
        f.facts.len()
    );
    let _ = writeln!(out, "  {}", f.description);
    for fact in &f.facts {
        let _ = writeln!(out, "  [{}] {}", if fact.pass { "pass" } else { "FAIL" }, fact.name);
        let _ = writeln!(out, "      expected:   {}", fact.expected);
        let _ = writeln!(out, "      observed:   {}", fact.observed);
        let _ = writeln!(out, "      provenance: {}", fact.provenance);
        if let Some(d) = &fact.discrepancy {
            let _ = writeln!(out, "      DISCREPANCY: {d}");
        }
    }
    notes(out, f.notes.iter());
}

fn notes<'a>(out: &mut String, notes: impl Iterator<Item = &'a String>) {
    let mut first = true;
    for n in notes {
        if first {
            out.push_str("notes:\n");
            first = false;
        }
        let _ = writeln!(out, "  - {n}");
    }
}
