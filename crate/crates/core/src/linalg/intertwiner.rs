use nalgebra::DMatrix;

use super::matrix::{frobenius, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Relative singular-value cutoff used when the caller has no preference.
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// All solutions `V` of `V H = H^dagger V`, as a Frobenius-orthonormal basis.
#[derive(Debug, Clone)]
pub struct IntertwinerSpace {
    hamiltonian: ComplexMatrix,
    basis: Vec<ComplexMatrix>,
    singular_values: Vec<f64>,
}

impl IntertwinerSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    /// Singular values of the vectorized map, ascending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn max_residual(&self) -> f64 {
        self.basis
            .iter()
            .map(|b| intertwining_residual(&self.hamiltonian, b))
            .fold(0.0, f64::max)
    }

    /// Orthogonal projection of `x` onto the space.
    pub fn project(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.hamiltonian.dim();
        self.basis.iter().fold(DMatrix::zeros(n, n), |acc, b| {
            let c: C64 = b.iter().zip(x.iter()).map(|(bi, xi)| bi.conj() * xi).sum();
            acc + b.matrix() * c
        })
    }

    /// Relative distance of `x` from the space.
    pub fn distance(&self, x: &DMatrix<C64>) -> f64 {
        frobenius(&(x - self.project(x))) / frobenius(x).max(f64::MIN_POSITIVE)
    }
}

/// `|V H - H^dagger V| / (|V| |H|)`.
pub fn intertwining_residual(h: &ComplexMatrix, v: &DMatrix<C64>) -> f64 {
    let lhs = v * h.matrix() - h.matrix().adjoint() * v;
    let denom = (frobenius(v) * h.norm()).max(f64::MIN_POSITIVE);
    frobenius(&lhs) / denom
}

/// Null space of `V -> V H - H^dagger V`, by SVD of its `n^2 x n^2` matrix.
///
/// The dimension is the number of singular values at or below
/// `tol * sigma_max`.
pub fn solve_intertwiner(h: &ComplexMatrix, tol: f64) -> Result<IntertwinerSpace> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = h.dim();
    let nn = n * n;
    let hm = h.matrix();

    // Column (i, j) is the image of the unit matrix E_ij, flattened row-major.
    let mut map = DMatrix::<C64>::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            let col = i * n + j;
            for q in 0..n {
                map[(i * n + q, col)] += hm[(j, q)];
            }
            for p in 0..n {
                map[(p * n + j, col)] -= hm[(i, p)].conj();
            }
        }
    }

    let svd = super::svd::svd(&map)?;
    let v_t = svd.v_t;
    // Ascending, so the null directions come first.
    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&a, &b| svd.sigma[a].total_cmp(&svd.sigma[b]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.sigma[k]).collect();
    let sigma_max = singular_values.last().copied().unwrap_or(0.0);
    let cutoff = tol * sigma_max;

    let basis = order
        .iter()
        .zip(&singular_values)
        .take_while(|(_, &s)| s <= cutoff)
        .map(|(&k, _)| {
            let row = v_t.row(k);
            let mut b = DMatrix::from_fn(n, n, |p, q| row[p * n + q].conj());
            fix_phase(&mut b);
            ComplexMatrix::new(b)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(IntertwinerSpace {
        hamiltonian: h.clone(),
        basis,
        singular_values,
    })
}

/// Rotate so the first entry within 1e-8 of the largest modulus is real positive.
pub(crate) fn fix_phase(m: &mut DMatrix<C64>) {
    let biggest = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if biggest == 0.0 {
        return;
    }
    let n = m.nrows();
    let pivot = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|ij| m[ij])
        .find(|z| z.norm() >= biggest * (1.0 - 1e-8))
        .expect("largest entry exists");
    let phase = pivot.conj() / pivot.norm();
    m.iter_mut().for_each(|z| *z *= phase);
}
