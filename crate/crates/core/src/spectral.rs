//! Symmetric eigendecomposition and classification of quadratic forms.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QpError, Result};
use crate::model::{psd_slack, Operator, SpaceDesc};
use crate::tolerance;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Threshold below which an eigenvalue is treated as zero.
    pub fn null_threshold(&self) -> f64 {
        let norm = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        tolerance::NULL_REL * norm.max(1.0)
    }

    /// Orthonormal basis of the numerical kernel (columns).
    pub fn kernel(&self) -> DMatrix<f64> {
        let thr = self.null_threshold();
        self.columns_where(|v| v.abs() <= thr)
    }

    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| keep(self.values[i])).collect();
        DMatrix::from_fn(self.dim(), idx.len(), |r, c| self.vectors[(r, idx[c])])
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Every sweep visits the off-diagonal pairs in row-major order and
/// annihilates each with a plane rotation; rotations are accumulated into
/// the eigenvector matrix. Iteration stops once the off-diagonal mass is
/// negligible relative to the Frobenius norm. Output is a pure function of
/// the input bits.
pub fn eig_sym(b: &DMatrix<f64>) -> Result<SymEigen> {
    let n = b.nrows();
    if n != b.ncols() {
        return Err(QpError::InvalidDimension(format!("eigensolver needs a square matrix, got {}x{}", n, b.ncols())));
    }
    let mut a = (b + b.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let total = a.norm();
    let target = (1e-14 * total).powi(2);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                if apq.abs() <= f64::EPSILON * 1e-2 * (a[(p, p)].abs() + a[(q, q)].abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        return Err(QpError::ConvergenceFailure { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    // Fix the sign: largest-magnitude component positive.
    for mut col in vectors.column_iter_mut() {
        let (mut best, mut idx) = (0.0, 0);
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best + 1e-14 {
                best = x.abs();
                idx = i;
            }
        }
        if col[idx] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Minimum-norm solution of `B x = rhs` restricted to the numerical range of
/// `B`. Returns the solution and the norm of the component of `rhs` lying in
/// the numerical kernel (zero when the system is consistent).
pub fn pseudo_solve(eig: &SymEigen, rhs: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let thr = eig.null_threshold();
    let n = eig.dim();
    let mut x = DVector::zeros(n);
    let mut kernel_part = DVector::zeros(n);
    for i in 0..n {
        let u = eig.vectors.column(i);
        let coef = u.dot(rhs);
        if eig.values[i].abs() > thr {
            x += u * (coef / eig.values[i]);
        } else {
            kernel_part += u * coef;
        }
    }
    (x, kernel_part)
}

/// Orthonormal basis of the intersection of kernels of psd blocks.
///
/// For psd matrices the common kernel equals the kernel of their sum.
pub fn common_kernel(blocks: &[&DMatrix<f64>], k: usize) -> Result<DMatrix<f64>> {
    let mut sum = DMatrix::<f64>::zeros(k, k);
    for b in blocks {
        sum += *b;
    }
    if k == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    Ok(eig_sym(&sum)?.kernel())
}

/// Orthonormal basis (columns) of the null space of an arbitrary matrix.
///
/// Singular values at most `1e-9·max(1, sigma_max)` count as zero. The input
/// is padded with zero rows so the SVD returns a full right basis.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let thr = tolerance::NULL_REL * sigma_max.max(1.0);
    let idx: Vec<usize> = (0..cols).filter(|&i| svd.singular_values[i] <= thr).collect();
    DMatrix::from_fn(cols, idx.len(), |r, c| v_t[(idx[c], r)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormClass {
    pub psd: bool,
    pub weakly_lsc: bool,
    pub weakly_continuous: bool,
    pub legendre: bool,
    pub compact: bool,
    pub compact_closed_range: bool,
    pub spectrum_head: Vec<f64>,
    pub tail: f64,
    /// Positive tail below `1e-12`: classified by sign alone.
    pub borderline_tail: bool,
}

/// Classifies `x -> <x, T x>` on the given space.
///
/// In the sequence space the form splits as `tail·||x||²` plus a finite-rank
/// part, so the sign of the tail decides everything: a positive tail gives a
/// Legendre form, a zero tail a compact (finite-rank, closed-range) operator
/// whose form is weakly continuous, and a negative tail destroys weak lower
/// semicontinuity.
pub fn classify_form(t: &Operator, space: SpaceDesc) -> Result<FormClass> {
    let spectrum_head = if t.head_dim() == 0 {
        Vec::new()
    } else {
        eig_sym(&t.block)?.values
    };
    let head_psd = spectrum_head.first().map_or(true, |&v| v >= -psd_slack(&t.block));
    Ok(match space {
        SpaceDesc::FiniteDim(_) => FormClass {
            psd: head_psd,
            weakly_lsc: true,
            weakly_continuous: true,
            legendre: true,
            compact: true,
            compact_closed_range: true,
            spectrum_head,
            tail: t.tail,
            borderline_tail: false,
        },
        SpaceDesc::SequenceSpace => FormClass {
            psd: head_psd && t.tail >= 0.0,
            weakly_lsc: t.tail >= 0.0,
            weakly_continuous: t.tail == 0.0,
            legendre: t.tail > 0.0,
            compact: t.tail == 0.0,
            compact_closed_range: t.tail == 0.0,
            spectrum_head,
            tail: t.tail,
            borderline_tail: t.tail > 0.0 && t.tail < 1e-12,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(b: &DMatrix<f64>, eig: &SymEigen) -> f64 {
        (0..eig.dim())
            .map(|i| {
                let v = eig.vectors.column(i);
                (b * v - v * eig.values[i]).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_input() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let eig = eig_sym(&b).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(eig.vectors.column(0).as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(eig.vectors.column(1).as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(eig.vectors.column(2).as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn swap_matrix() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = eig_sym(&b).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vectors.column(0);
        let v1 = eig.vectors.column(1);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] + v0[1]).abs() < 1e-14);
        assert!((v1[0] - v1[1]).abs() < 1e-14 && (v1[0].abs() - h).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let m = DMatrix::from_fn(8, 8, |_, _| rng.gen_range(-3.0..3.0));
            let b = &m + m.transpose();
            let eig = eig_sym(&b).unwrap();
            let lambda = DMatrix::from_diagonal(&DVector::from_vec(eig.values.clone()));
            let rebuilt = &eig.vectors * lambda * eig.vectors.transpose();
            assert!((rebuilt - &b).norm() <= 1e-9 * b.norm().max(1.0));
            assert!(residual(&b, &eig) <= 1e-10 * b.norm().max(1.0));
            let gram = eig.vectors.transpose() * &eig.vectors;
            assert!((gram - DMatrix::identity(8, 8)).norm() <= 1e-9);
            let trace: f64 = b.diagonal().sum();
            let sum: f64 = eig.values.iter().sum();
            assert!((trace - sum).abs() <= 1e-9 * trace.abs().max(1.0));
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn deterministic_for_identical_input() {
        let b = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, -1.0, 3.0, 0.25, 0.5, 0.25, -1.0]);
        assert_eq!(eig_sym(&b).unwrap(), eig_sym(&b.clone()).unwrap());
    }

    #[test]
    fn pseudo_solve_splits_kernel() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]));
        let eig = eig_sym(&b).unwrap();
        let (x, k) = pseudo_solve(&eig, &DVector::from_vec(vec![4.0, 3.0]));
        assert_eq!(x.as_slice(), &[2.0, 0.0]);
        assert_eq!(k.as_slice(), &[0.0, 3.0]);
    }

    #[test]
    fn identity_is_legendre_not_compact() {
        let c = classify_form(&Operator::scalar(1.0), SpaceDesc::SequenceSpace).unwrap();
        assert!(c.legendre && !c.compact && c.psd && c.weakly_lsc);
    }

    #[test]
    fn zero_is_compact_not_legendre() {
        let c = classify_form(&Operator::scalar(0.0), SpaceDesc::SequenceSpace).unwrap();
        assert!(!c.legendre && c.compact && c.compact_closed_range && c.weakly_continuous);
    }

    #[test]
    fn shift_operator_is_legendre() {
        let c = classify_form(&Operator::diagonal(&[0.0], 1.0), SpaceDesc::SequenceSpace).unwrap();
        assert!(c.legendre && c.psd);
    }

    #[test]
    fn indefinite_head_with_positive_tail() {
        let c = classify_form(&Operator::diagonal(&[-1.0, 0.0, 1.0, 0.0], 1.0), SpaceDesc::SequenceSpace).unwrap();
        assert!(c.legendre && !c.psd);
    }

    #[test]
    fn negative_tail_loses_lsc() {
        let c = classify_form(&Operator::diagonal(&[1.0], -0.5), SpaceDesc::SequenceSpace).unwrap();
        assert!(!c.weakly_lsc && !c.legendre && !c.compact);
    }

    #[test]
    fn finite_dimension_always_legendre() {
        let t = Operator::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]], 0.0);
        let c = classify_form(&t, SpaceDesc::FiniteDim(2)).unwrap();
        assert!(c.legendre && c.compact_closed_range && !c.psd);
    }

    #[test]
    fn tiny_tail_is_flagged() {
        let c = classify_form(&Operator::scalar(1e-14), SpaceDesc::SequenceSpace).unwrap();
        assert!(c.legendre && c.borderline_tail);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = null_space(&m);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-12);
        assert!((n.transpose() * &n - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
