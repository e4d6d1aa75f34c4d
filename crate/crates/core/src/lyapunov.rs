//! Steady state of a linear Langevin system: `Q V + V Qᵀ = −D`.
//!
//! The equation is vectorised as `(I ⊗ Q + Q ⊗ I) vec(V) = −vec(D)` and
//! solved directly. For the 6×6 problems in this crate that is a 36×36
//! dense LU, which is both exact to rounding and microsecond-scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Largest real part among the eigenvalues of `q`.
pub fn spectral_abscissa(q: &DMatrix<f64>) -> f64 {
    q.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `‖Q V + V Qᵀ + D‖_F`.
pub fn lyapunov_residual(q: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    (q * v + v * q.transpose() + d).norm()
}

/// Residual bound accepted for a solve: `1e-10 · max(1, ‖D‖_F)`.
pub fn residual_bound(d: &DMatrix<f64>) -> f64 {
    1e-10 * d.norm().max(1.0)
}

/// Solves `Q V + V Qᵀ = −D` for a Hurwitz-stable drift `Q`.
pub fn solve_lyapunov(q: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let n = q.nrows();
    if q.ncols() != n || d.shape() != (n, n) || n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidMatrix(format!(
            "drift {:?} and diffusion {:?} must be matching square matrices of even size",
            q.shape(),
            d.shape()
        )));
    }
    let abscissa = spectral_abscissa(q);
    if abscissa >= 0.0 || abscissa.is_nan() {
        return Err(Error::UnstableDrift {
            max_real_part: abscissa,
        });
    }

    // column-major vec: vec(QV) = (I⊗Q) vec V, vec(VQᵀ) = (Q⊗I) vec V
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(q) + q.kronecker(&id);
    let rhs = -DVector::from_column_slice(d.as_slice());
    let x = k.full_piv_lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let v = DMatrix::from_column_slice(n, n, x.as_slice());
    let v = (&v + v.transpose()) * 0.5;
    CovarianceMatrix::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn decoupled_single_mode() {
        let q = DMatrix::identity(2, 2) * -1.0;
        let d = DMatrix::identity(2, 2) * 3.0;
        let v = solve_lyapunov(&q, &d).unwrap();
        assert_relative_eq!(v.entries().clone(), DMatrix::identity(2, 2) * 1.5, epsilon = 1e-14);
    }

    #[test]
    fn unstable_drift_is_rejected() {
        let mut q = DMatrix::identity(2, 2) * -1.0;
        q[(1, 1)] = 0.1;
        let d = DMatrix::identity(2, 2);
        match solve_lyapunov(&q, &d) {
            Err(Error::UnstableDrift { max_real_part }) => {
                assert_relative_eq!(max_real_part, 0.1, epsilon = 1e-12)
            }
            other => panic!("expected UnstableDrift, got {other:?}"),
        }
    }

    #[test]
    fn damped_rotation_satisfies_equation() {
        #[rustfmt::skip]
        let q = DMatrix::from_row_slice(4, 4, &[
            -1.0, 2.0, 0.0, 0.5,
            -2.0, -1.0, 0.3, 0.0,
            0.0, -0.3, -0.5, 1.0,
            -0.5, 0.0, -1.0, -0.5,
        ]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.5, 0.5]));
        let v = solve_lyapunov(&q, &d).unwrap();
        assert!(lyapunov_residual(&q, &d, v.entries()) <= residual_bound(&d));
    }

    #[test]
    fn shape_mismatch() {
        let q = DMatrix::identity(2, 2) * -1.0;
        let d = DMatrix::identity(4, 4);
        assert!(matches!(solve_lyapunov(&q, &d), Err(Error::InvalidMatrix(_))));
    }
}
