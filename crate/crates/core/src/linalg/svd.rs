//! Singular value decomposition with an accuracy check.
//!
//! Decompositions come from faer. nalgebra's SVD is kept only as a fallback:
//! on some rank-deficient inputs it returns singular values wrong in the
//! fourth digit while its factors stay orthonormal. Every result is verified
//! by reconstruction and orthonormality before use.

use faer::Mat;
use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest accepted reconstruction or orthonormality defect, relative to `|A|`.
const CHECK_TOL: f64 = 1e-12;

/// Thin SVD `A = U diag(sigma) V_t` with `sigma` descending.
pub(crate) struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub sigma: Vec<f64>,
    pub v_t: DMatrix<T>,
}

/// Element types with a faer thin SVD.
pub(crate) trait Scalar: ComplexField<RealField = f64> + Copy {
    fn faer_svd(a: &DMatrix<Self>) -> Option<Svd<Self>>;
}

macro_rules! faer_scalar {
    ($t:ty, $re:expr) => {
        impl Scalar for $t {
            fn faer_svd(a: &DMatrix<Self>) -> Option<Svd<Self>> {
                let m = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
                let s = m.thin_svd().ok()?;
                let (u, v) = (s.U(), s.V());
                let k = u.ncols();
                let d = s.S().column_vector();
                Some(Svd::sorted(
                    DMatrix::from_fn(a.nrows(), k, |i, j| u[(i, j)]),
                    (0..k).map(|j| $re(d[j])).collect(),
                    DMatrix::from_fn(k, a.ncols(), |i, j| ComplexField::conjugate(v[(j, i)])),
                ))
            }
        }
    };
}

faer_scalar!(f64, |x: f64| x);
faer_scalar!(C64, |z: C64| z.re);

impl<T: Scalar> Svd<T> {
    fn sorted(u: DMatrix<T>, sigma: Vec<f64>, v_t: DMatrix<T>) -> Self {
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        Self {
            u: DMatrix::from_fn(u.nrows(), order.len(), |i, k| u[(i, order[k])]),
            sigma: order.iter().map(|&k| sigma[k]).collect(),
            v_t: DMatrix::from_fn(order.len(), v_t.ncols(), |k, j| v_t[(order[k], j)]),
        }
    }

    fn defect(&self, a: &DMatrix<T>) -> f64 {
        let k = self.sigma.len();
        let scaled = DMatrix::from_fn(self.u.nrows(), k, |i, j| self.u[(i, j)] * T::from_real(self.sigma[j]));
        let recon = (scaled * &self.v_t - a).norm() / a.norm().max(f64::MIN_POSITIVE);
        let identity = DMatrix::<T>::identity(k, k);
        let u_orth = (self.u.adjoint() * &self.u - &identity).norm();
        let v_orth = (&self.v_t * self.v_t.adjoint() - &identity).norm();
        recon.max(u_orth).max(v_orth)
    }
}

fn nalgebra_svd<T: Scalar>(a: &DMatrix<T>) -> Option<Svd<T>> {
    let s = a.clone().try_svd(true, true, f64::EPSILON, 0)?;
    let sigma = s.singular_values.iter().copied().collect();
    Some(Svd::sorted(s.u?, sigma, s.v_t?))
}

/// Verified thin SVD.
pub(crate) fn svd<T: Scalar>(a: &DMatrix<T>) -> Result<Svd<T>> {
    let mut best = f64::INFINITY;
    for candidate in [T::faer_svd(a), nalgebra_svd(a)].into_iter().flatten() {
        let d = candidate.defect(a);
        if d <= CHECK_TOL {
            return Ok(candidate);
        }
        best = best.min(d);
    }
    Err(Error::SvdInaccurate { defect: best })
}
