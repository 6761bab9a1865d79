//! Dense complex linear algebra on top of `faer`, run single-threaded so that
//! results do not depend on the thread count.

use std::sync::Once;

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::{Mat, Par};
use num_complex::Complex64;

use crate::error::{QnmError, Result};

pub type CMat = Mat<Complex64>;

fn sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(Par::Seq));
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    sequential();
    a.eigenvalues()
        .map_err(|e| QnmError::LinearAlgebra(format!("eigenvalue iteration failed: {e:?}")))
}

/// Frobenius norm.
pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

/// Eigenvector for an already computed eigenvalue by two steps of inverse
/// iteration, with its normwise backward error `|A v - lambda v| / (|A|_F |v|)`.
pub fn eigenpair(a: &CMat, lambda: Complex64) -> Result<(Vec<Complex64>, f64)> {
    sequential();
    let n = a.nrows();
    let shift = lambda + Complex64::new(1e-11, 1e-11) * lambda.norm().max(1e-3);
    let shifted = CMat::from_fn(n, n, |i, j| if i == j { a[(i, j)] - shift } else { a[(i, j)] });
    let lu = shifted.partial_piv_lu();
    let mut v = CMat::from_fn(n, 1, |i, _| Complex64::new(1.0, 0.1 * (i % 7) as f64));
    for _ in 0..3 {
        lu.solve_in_place(&mut v);
        let norm = v.norm_l2();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QnmError::LinearAlgebra("inverse iteration broke down".into()));
        }
        v = CMat::from_fn(n, 1, |i, _| v[(i, 0)] / norm);
    }
    let av = a * &v;
    let resid = CMat::from_fn(n, 1, |i, _| av[(i, 0)] - lambda * v[(i, 0)]);
    let backward = resid.norm_l2() / frobenius(a).max(f64::MIN_POSITIVE);
    Ok(((0..n).map(|i| v[(i, 0)]).collect(), backward))
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    sequential();
    a.singular_values()
        .map_err(|e| QnmError::LinearAlgebra(format!("singular value iteration failed: {e:?}")))
}

/// Least-squares solution of `a x = b` by column-pivoted QR.
pub fn least_squares(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    sequential();
    if a.nrows() != b.len() || a.nrows() < a.ncols() {
        return Err(QnmError::LinearAlgebra(format!(
            "least squares with {} rows, {} columns and {} right-hand entries",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut rhs = CMat::from_fn(b.len(), 1, |i, _| b[i]);
    a.col_piv_qr().solve_lstsq_in_place(&mut rhs);
    let x: Vec<Complex64> = (0..a.ncols()).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|z| !z.is_finite()) {
        return Err(QnmError::LinearAlgebra(
            "least squares produced non-finite values".into(),
        ));
    }
    Ok(x)
}

/// Thin SVD factors `(U, s, V)`.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    sequential();
    let svd = a
        .thin_svd()
        .map_err(|e| QnmError::LinearAlgebra(format!("svd failed: {e:?}")))?;
    let k = a.nrows().min(a.ncols());
    let s = (0..k).map(|i| svd.S()[i].re).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triangular_eigenvalues_and_backward_error() {
        let a = CMat::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f64 + 1.0, -0.1 * i as f64)
            } else if j > i {
                c(0.3, 0.2)
            } else {
                c(0.0, 0.0)
            }
        });
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (k, e) in ev.iter().enumerate() {
            assert!((e - c(k as f64 + 1.0, -0.1 * k as f64)).norm() < 1e-12);
            let (_, be) = eigenpair(&a, *e).unwrap();
            assert!(be < 1e-12, "{be}");
        }
    }

    #[test]
    fn least_squares_recovers_line() {
        let ts: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let a = CMat::from_fn(10, 2, |i, j| if j == 0 { c(1.0, 0.0) } else { c(ts[i], 0.0) });
        let b: Vec<Complex64> = ts.iter().map(|t| c(2.0 - 0.5 * t, *t)).collect();
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((x[1] - c(-0.5, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = CMat::from_fn(3, 3, |i, j| if i == j { c(0.0, (i + 1) as f64) } else { c(0.0, 0.0) });
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
        let (u, sv, v) = svd(&a).unwrap();
        assert_eq!(u.ncols(), 3);
        assert_eq!(v.nrows(), 3);
        assert!((sv[1] - 2.0).abs() < 1e-14);
    }
}
