//! Dense complex linear algebra: the matrix type, biorthogonal
//! eigendecomposition, the intertwiner null-space solver and spectral
//! exponentiation.

mod eigen;
mod intertwiner;
mod matrix;
mod svd;

pub use eigen::{eig, eigenvalues, EigenCluster, EigenSystem};
pub use intertwiner::{intertwining_residual, solve_intertwiner, IntertwinerSpace, DEFAULT_NULL_TOL};
pub use matrix::{ComplexMatrix, C64};

pub(crate) use matrix::{condition_number, frobenius, singular_values};
pub(crate) use svd::svd;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest real exponent allowed in `exp(...)` before reporting overflow.
pub const EXPONENT_LIMIT: f64 = 300.0;

/// Default eigen-solver tolerance, relative to the matrix norm.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `U(t) = sum_i exp(-i lambda_i t) R_i L_i`.
pub fn mat_exp_evolution(sys: &EigenSystem, t: f64) -> Result<ComplexMatrix> {
    let (r, l) = sys.require_complete()?;
    let phases = sys
        .eigenvalues()
        .iter()
        .map(|&lambda| evolution_phase(lambda, t))
        .collect::<Result<Vec<_>>>()?;
    let scaled = DMatrix::from_fn(r.nrows(), r.ncols(), |i, j| r[(i, j)] * phases[j]);
    ComplexMatrix::new(scaled * l)
}

/// `exp(-i lambda t)`, guarded against overflow of the growing modes.
pub(crate) fn evolution_phase(lambda: C64, t: f64) -> Result<C64> {
    let exponent = lambda.im * t;
    if exponent > EXPONENT_LIMIT {
        return Err(Error::Overflow {
            exponent,
            limit: EXPONENT_LIMIT,
        });
    }
    Ok((C64::new(0.0, -t) * lambda).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_time_zero() {
        let sys = eig(&ComplexMatrix::two_level(0.6).unwrap(), DEFAULT_TOL).unwrap();
        let u = mat_exp_evolution(&sys, 0.0).unwrap();
        assert!(frobenius(&(u.matrix() - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn diagonal_pair_closed_form() {
        let sys = eig(&ComplexMatrix::conjugate_pair(1.0, 0.8).unwrap(), DEFAULT_TOL).unwrap();
        let u = mat_exp_evolution(&sys, 1.0).unwrap();
        let grow = C64::new(0.8, -1.0).exp();
        let decay = C64::new(-0.8, -1.0).exp();
        assert!((u[(0, 0)] - grow).norm() < 1e-14);
        assert!((u[(1, 1)] - decay).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-15 && u[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn hermitian_is_unitary() {
        let h = ComplexMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.3, -0.7)],
            vec![C64::new(0.3, 0.7), C64::new(-2.0, 0.0)],
        ])
        .unwrap();
        let sys = eig(&h, DEFAULT_TOL).unwrap();
        for &t in &[0.3, 2.0, -7.5] {
            let u = mat_exp_evolution(&sys, t).unwrap();
            let defect = u.adjoint().matrix() * u.matrix() - DMatrix::identity(2, 2);
            assert!(frobenius(&defect) < 1e-12);
        }
    }

    #[test]
    fn defective_is_rejected() {
        let sys = eig(&ComplexMatrix::two_level(1.0).unwrap(), DEFAULT_TOL).unwrap();
        assert!(matches!(
            mat_exp_evolution(&sys, 1.0),
            Err(Error::Defective { .. })
        ));
    }

    #[test]
    fn overflow_guard() {
        let sys = eig(&ComplexMatrix::conjugate_pair(1.0, 1.0).unwrap(), DEFAULT_TOL).unwrap();
        assert!(mat_exp_evolution(&sys, 299.0).is_ok());
        assert!(matches!(
            mat_exp_evolution(&sys, 301.0),
            Err(Error::Overflow { .. })
        ));
    }
}
