//! JSON problem files.
//!
//! ```json
//! {
//!   "space": {"kind": "finite", "dim": 3},
//!   "objective": {"block": [[0, 0], [0, 1]], "tail": 0, "c": [1, 0], "const": 0},
//!   "constraints": [{"block": [[1]], "tail": 0, "c": [], "const": -1}]
//! }
//! ```
//!
//! `tail`, `c`, `const` and `constraints` may be omitted and default to zero
//! or empty. `dim` is required for finite spaces and rejected for sequence
//! spaces.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{QpError, Result};
use crate::model::{validate_problem, Operator, Problem, QuadraticFunction, SpaceDesc, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Finite,
    Sequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpace {
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

/// Square matrix given as a list of rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
struct Rows(Vec<Vec<f64>>);

impl<'de> Deserialize<'de> for Rows {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(serde::de::Error::custom(format!(
                "block must be square: row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Ok(Rows(rows))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFunction {
    #[serde(default)]
    block: Rows,
    #[serde(default)]
    tail: f64,
    #[serde(default)]
    c: Vec<f64>,
    #[serde(default, rename = "const")]
    constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    space: FileSpace,
    objective: FileFunction,
    #[serde(default)]
    constraints: Vec<FileFunction>,
}

impl FileFunction {
    fn into_function(self) -> QuadraticFunction {
        let n = self.block.0.len();
        let block = DMatrix::from_fn(n, n, |i, j| self.block.0[i][j]);
        QuadraticFunction::new(Operator::new(block, self.tail), Vector::new(self.c), self.constant)
    }

    fn from_function(q: &QuadraticFunction) -> Self {
        let b = &q.op.block;
        FileFunction {
            block: Rows((0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b[(i, j)]).collect()).collect()),
            tail: q.op.tail,
            c: q.lin.coords().to_vec(),
            constant: q.constant,
        }
    }
}

/// Reads a problem without validating it.
pub fn parse_problem_unchecked(text: &str) -> Result<Problem> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = if path.is_empty() || path == "." {
            inner.to_string()
        } else {
            format!("{path}: {inner}")
        };
        QpError::Parse { line: inner.line(), column: inner.column(), message }
    })?;
    let space = match (file.space.kind, file.space.dim) {
        (Kind::Finite, Some(n)) => SpaceDesc::FiniteDim(n),
        (Kind::Finite, None) => return Err(semantic("space.dim", "finite spaces need a dimension")),
        (Kind::Sequence, None) => SpaceDesc::SequenceSpace,
        (Kind::Sequence, Some(_)) => return Err(semantic("space.dim", "sequence spaces take no dimension")),
    };
    Ok(Problem::new(
        space,
        file.objective.into_function(),
        file.constraints.into_iter().map(FileFunction::into_function).collect(),
    ))
}

fn semantic(path: &str, message: &str) -> QpError {
    QpError::Parse { line: 0, column: 0, message: format!("{path}: {message}") }
}

/// Reads and validates a problem.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let p = parse_problem_unchecked(text)?;
    validate_problem(&p).into_result()?;
    Ok(p)
}

pub fn render_problem(p: &Problem) -> String {
    let file = ProblemFile {
        space: match p.space {
            SpaceDesc::FiniteDim(n) => FileSpace { kind: Kind::Finite, dim: Some(n) },
            SpaceDesc::SequenceSpace => FileSpace { kind: Kind::Sequence, dim: None },
        },
        objective: FileFunction::from_function(&p.objective),
        constraints: p.constraints.iter().map(FileFunction::from_function).collect(),
    };
    serde_json::to_string_pretty(&file).expect("problem files always serialize")
}
