//! Eigendecomposition of small dense complex matrices.
//!
//! Eigenvalues come from the closed-form quadratic for `n = 2` and from a
//! Hessenberg reduction followed by single-shift complex QR for `n >= 3`.
//! Right eigenvectors are null vectors of `H - lambda I` obtained by SVD, which
//! doubles as the rank test for defectiveness. Left eigenvectors are the rows
//! of the inverse of the right-eigenvector matrix, so biorthonormality and
//! completeness hold by construction.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use super::matrix::{frobenius, ComplexMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 100;
const MAX_BLOCK_DEPTH: usize = 4;

/// A group of numerically coincident eigenvalues whose eigenspace is too
/// small to span them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    #[serde(
        serialize_with = "crate::serde_util::complex",
        deserialize_with = "crate::serde_util::de_complex"
    )]
    pub value: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<C64>,
    right: Option<DMatrix<C64>>,
    left: Option<DMatrix<C64>>,
    defective_clusters: Vec<EigenCluster>,
    residual: f64,
    tol: f64,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_defective(&self) -> bool {
        !self.defective_clusters.is_empty()
    }

    pub fn defective_clusters(&self) -> &[EigenCluster] {
        &self.defective_clusters
    }

    /// Right eigenvectors as columns, unit Euclidean length.
    pub fn right_vectors(&self) -> Option<&DMatrix<C64>> {
        self.right.as_ref()
    }

    /// Left eigenvectors as rows, scaled so that `L_i R_i = 1`.
    pub fn left_vectors(&self) -> Option<&DMatrix<C64>> {
        self.left.as_ref()
    }

    pub fn right(&self, i: usize) -> Option<DVector<C64>> {
        self.right.as_ref().map(|r| r.column(i).into_owned())
    }

    pub fn left(&self, i: usize) -> Option<RowDVector<C64>> {
        self.left.as_ref().map(|l| l.row(i).into_owned())
    }

    /// Largest relative eigen-equation residual `|H R_i - lambda_i R_i| / |H|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `|sum_i R_i L_i - I|`, or `None` for a defective system.
    pub fn completeness_residual(&self) -> Option<f64> {
        let (r, l) = (self.right.as_ref()?, self.left.as_ref()?);
        let n = self.dim();
        Some(frobenius(&(r * l - DMatrix::<C64>::identity(n, n))))
    }

    /// `max_ij |L_i R_j - delta_ij|`, or `None` for a defective system.
    pub fn biorthonormality_residual(&self) -> Option<f64> {
        let (r, l) = (self.right.as_ref()?, self.left.as_ref()?);
        let n = self.dim();
        let g = l * r - DMatrix::<C64>::identity(n, n);
        Some(g.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub(crate) fn require_complete(&self) -> Result<(&DMatrix<C64>, &DMatrix<C64>)> {
        match (&self.right, &self.left) {
            (Some(r), Some(l)) => Ok((r, l)),
            _ => Err(defective_error(&self.defective_clusters)),
        }
    }
}

pub(crate) fn defective_error(clusters: &[EigenCluster]) -> Error {
    match clusters.first() {
        Some(c) => Error::Defective {
            value: format!("{}", c.value),
            algebraic: c.algebraic,
            geometric: c.geometric,
        },
        None => Error::Defective {
            value: "?".into(),
            algebraic: 0,
            geometric: 0,
        },
    }
}

/// Eigenvalues of `h`, without eigenvectors.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<C64>> {
    eigenvalues_of(h.matrix())
}

fn eigenvalues_of(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    match a.nrows() {
        0 => Ok(vec![]),
        1 => Ok(vec![a[(0, 0)]]),
        2 => Ok(quadratic_eigenvalues(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]).to_vec()),
        _ => hessenberg_qr(a),
    }
}

/// Roots of `(a - x)(d - x) - bc`, ordered as `m + sqrt(q)`, `m - sqrt(q)`
/// with `m = (a + d)/2`, `q = ((a - d)/2)^2 + bc`. The smaller root is
/// recovered from the determinant to avoid cancellation.
pub(crate) fn quadratic_eigenvalues(a: C64, b: C64, c: C64, d: C64) -> [C64; 2] {
    let m = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let sq = (half * half + b * c).sqrt();
    let (p, q) = (m + sq, m - sq);
    let det = a * d - b * c;
    if p.norm() >= q.norm() {
        if p.norm() > 0.0 {
            [p, det / p]
        } else {
            [p, q]
        }
    } else {
        [det / q, q]
    }
}

fn hessenberg_qr(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = a.nrows();
    let mut h = a.clone();
    let two = C64::new(2.0, 0.0);

    // Householder reduction to upper Hessenberg form.
    for k in 0..n - 2 {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);

        for j in k..n {
            let s: C64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= two * vi * s;
            }
        }
        for r in 0..n {
            let s: C64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| h[(r, k + 1 + i)] * vi)
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(r, k + 1 + i)] -= two * s * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }

    let scale = frobenius(&h).max(f64::MIN_POSITIVE);
    let max_iter = MAX_SWEEPS_PER_EIGENVALUE * n;
    let mut total = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    let mut rotations: Vec<(f64, C64)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let off = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let reference = if diag > 0.0 { diag } else { scale };
            if off <= f64::EPSILON * reference {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NoConvergence { iterations: total });
        }

        let (a, b, c, d) = (
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        let shift = if since_deflation % 11 == 10 {
            d + C64::new(0.75, 0.5) * c.norm()
        } else {
            let [p, q] = quadratic_eigenvalues(a, b, c, d);
            if (p - d).norm() <= (q - d).norm() {
                p
            } else {
                q
            }
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let rho = x.norm().hypot(y.norm());
            let (cs, sn) = if rho == 0.0 {
                (1.0, C64::new(0.0, 0.0))
            } else if x.norm() == 0.0 {
                (0.0, C64::new(1.0, 0.0))
            } else {
                (x.norm() / rho, (x / x.norm()) * y.conj() / rho)
            };
            for j in k..=hi {
                let (u, w) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = u * cs + sn * w;
                h[(k + 1, j)] = -sn.conj() * u + w * cs;
            }
            rotations.push((cs, sn));
        }
        for (offset, &(cs, sn)) in rotations.iter().enumerate() {
            let k = lo + offset;
            for r in lo..=(k + 1).min(hi) {
                let (u, w) = (h[(r, k)], h[(r, k + 1)]);
                h[(r, k)] = u * cs + sn.conj() * w;
                h[(r, k + 1)] = -sn * u + w * cs;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }

    Ok((0..n).map(|i| h[(i, i)]).collect())
}

/// Eigenvalues, unit right eigenvectors and biorthonormal left eigenvectors.
///
/// Eigenvalues closer than `sqrt(tol) * |H|` are grouped and their eigenspace
/// dimension is measured as the number of singular values of `H - mu I`
/// below `tol * |H|` (plus the cluster spread). A cluster whose eigenspace is
/// smaller than its size marks the system defective and no vectors are
/// returned.
pub fn eig(h: &ComplexMatrix, tol: f64) -> Result<EigenSystem> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    eig_block(h.matrix(), tol, 0)
}

fn eig_block(a: &DMatrix<C64>, tol: f64, depth: usize) -> Result<EigenSystem> {
    let n = a.nrows();
    let scale = frobenius(a);
    if scale == 0.0 {
        return Ok(EigenSystem {
            eigenvalues: vec![C64::new(0.0, 0.0); n],
            right: Some(DMatrix::identity(n, n)),
            left: Some(DMatrix::identity(n, n)),
            defective_clusters: vec![],
            residual: 0.0,
            tol,
        });
    }

    let estimates = eigenvalues_of(a)?;
    let groups = cluster(&estimates, tol.sqrt() * scale);

    let mut values = estimates.clone();
    let mut right = DMatrix::<C64>::zeros(n, n);
    let mut defective = Vec::new();

    for group in &groups {
        let m = group.len();
        if m == 1 {
            let i = group[0];
            let shifted = a - DMatrix::identity(n, n) * estimates[i];
            let (_, basis) = smallest_right_singular(&shifted, 1)?;
            right.set_column(i, &basis.column(0));
            continue;
        }

        let mu = group.iter().map(|&i| estimates[i]).sum::<C64>() / m as f64;
        let spread = group
            .iter()
            .map(|&i| (estimates[i] - mu).norm())
            .fold(0.0, f64::max);
        let shifted = a - DMatrix::identity(n, n) * mu;
        let (sigma, basis) = smallest_right_singular(&shifted, m)?;
        let threshold = tol * scale + 2.0 * spread;
        let geometric = sigma.iter().take_while(|&&s| s <= threshold).count();
        if geometric < m || depth >= MAX_BLOCK_DEPTH {
            defective.push(EigenCluster {
                value: mu,
                algebraic: m,
                geometric: geometric.min(m),
            });
            continue;
        }

        // Restrict H to the cluster's invariant subspace and diagonalize there.
        let reduced = basis.adjoint() * a * &basis;
        let (sub_values, sub_vectors) = diagonalize_reduced(&reduced, tol, scale, depth)?;
        match sub_vectors {
            Some(z) => {
                let vecs = &basis * z;
                for (k, &i) in group.iter().enumerate() {
                    values[i] = sub_values[k];
                    right.set_column(i, &vecs.column(k));
                }
            }
            None => defective.push(EigenCluster {
                value: mu,
                algebraic: m,
                geometric: m - 1,
            }),
        }
    }

    if !defective.is_empty() {
        return Ok(EigenSystem {
            eigenvalues: values,
            right: None,
            left: None,
            defective_clusters: defective,
            residual: f64::NAN,
            tol,
        });
    }

    for j in 0..n {
        let mut col = right.column(j).into_owned();
        gauge(&mut col);
        right.set_column(j, &col);
    }
    let left = right
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("right eigenvector matrix".into()))?;

    let residual = (0..n)
        .map(|i| (a * right.column(i) - right.column(i) * values[i]).norm() / scale)
        .fold(0.0, f64::max);

    Ok(EigenSystem {
        eigenvalues: values,
        right: Some(right),
        left: Some(left),
        defective_clusters: vec![],
        residual,
        tol,
    })
}

fn diagonalize_reduced(
    k: &DMatrix<C64>,
    tol: f64,
    scale: f64,
    depth: usize,
) -> Result<(Vec<C64>, Option<DMatrix<C64>>)> {
    let m = k.nrows();
    let mu = k.trace() / m as f64;
    let centered = k - DMatrix::identity(m, m) * mu;
    let width = frobenius(&centered);
    if width <= tol * scale {
        return Ok(((0..m).map(|i| k[(i, i)]).collect(), Some(DMatrix::identity(m, m))));
    }
    let sub = eig_block(&(centered / C64::new(width, 0.0)), tol, depth + 1)?;
    let values = sub
        .eigenvalues
        .iter()
        .map(|&nu| mu + nu * width)
        .collect();
    Ok((values, sub.right))
}

/// Single-linkage grouping of eigenvalues within `radius`.
fn cluster(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// The `count` smallest singular values (ascending) with their right singular vectors.
pub(crate) fn smallest_right_singular(a: &DMatrix<C64>, count: usize) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = a.ncols();
    let svd = super::svd::svd(a)?;
    let mut order: Vec<usize> = (0..svd.sigma.len()).collect();
    order.sort_by(|&i, &j| svd.sigma[i].total_cmp(&svd.sigma[j]));
    let sigma = order.iter().map(|&i| svd.sigma[i]).collect();
    let mut basis = DMatrix::<C64>::zeros(n, count);
    for (k, &i) in order.iter().take(count).enumerate() {
        let col = svd.v_t.row(i).adjoint();
        basis.set_column(k, &col);
    }
    Ok((sigma, basis))
}

/// Unit length; first component above `sqrt(eps)` of the largest made real positive.
pub(crate) fn gauge(v: &mut DVector<C64>) {
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    v.unscale_mut(norm);
    let biggest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cutoff = f64::EPSILON.sqrt() * biggest;
    if let Some(z) = v.iter().find(|z| z.norm() > cutoff).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|c| *c *= phase);
    }
}
