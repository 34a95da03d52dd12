//! Existence certification and constructive solving for quadratic programs
//! with a possibly nonconvex objective and convex quadratic constraints,
//! posed in finite dimensions or in the sequence space of square-summable
//! reals.

pub mod certify;
pub mod dual;
pub mod error;
pub mod fixtures;
pub mod galerkin;
pub mod gtrs;
pub mod model;
pub mod oracle;
pub mod problem_file;
pub mod recession;
pub mod report;
pub mod search;
pub mod simplex;
pub mod spectral;
pub mod tolerance;

pub use error::{QpError, Result};
pub use model::{
    normalize_problem, prepare_problem, validate_problem, FunctionRef, Operator, Problem,
    QuadraticFunction, SpaceDesc, ValidationReport, Vector,
};
