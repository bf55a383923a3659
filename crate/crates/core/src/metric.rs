//! Metric operators `V` with `V H = H^dagger V`, the `V` inner product and
//! the biorthogonal closure relation built from it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, frobenius, intertwining_residual, singular_values, svd, ComplexMatrix,
    EigenSystem, IntertwinerSpace, C64,
};

/// Metrics with a larger condition number are reported as not invertible.
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

/// Relative singular-value cutoff separating the Hermitian span from redundancy.
const HERMITIAN_SPAN_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricPolicy {
    /// Best-conditioned Hermitian element of the solution space.
    HermitianRepresentative,
    /// `-i sigma_y` for a diagonal conjugate-pair 2x2 system.
    PaperGauge,
    /// First basis vector of the solution space.
    FirstBasis,
}

impl FromStr for MetricPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermitian-representative" => Ok(Self::HermitianRepresentative),
            "paper-gauge" => Ok(Self::PaperGauge),
            "first-basis" => Ok(Self::FirstBasis),
            other => Err(Error::Format(format!("policy: unknown value `{other}`"))),
        }
    }
}

impl fmt::Display for MetricPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HermitianRepresentative => "hermitian-representative",
            Self::PaperGauge => "paper-gauge",
            Self::FirstBasis => "first-basis",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MetricConfig {
    pub max_condition: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            max_condition: DEFAULT_MAX_CONDITION,
        }
    }
}

/// An intertwiner `V` with its diagnostics.
///
/// Serializes as the matrix interchange object plus the flag fields, so the
/// file is also readable as a plain matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricOperator {
    #[serde(flatten)]
    v: ComplexMatrix,
    pub hermitian: bool,
    pub invertible: bool,
    pub condition_estimate: f64,
    /// `|V H - H^dagger V| / (|V| |H|)` against the source Hamiltonian.
    pub residual: f64,
    pub policy: MetricPolicy,
}

impl MetricOperator {
    fn certify(h: &ComplexMatrix, v: ComplexMatrix, policy: MetricPolicy, cfg: &MetricConfig) -> Self {
        let condition_estimate = v.condition_number();
        Self {
            hermitian: v.is_hermitian(HERMITIAN_TOL),
            invertible: condition_estimate <= cfg.max_condition,
            condition_estimate,
            residual: intertwining_residual(h, v.matrix()),
            policy,
            v,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.v
    }
}

pub fn build_metric(
    sys: &EigenSystem,
    space: &IntertwinerSpace,
    policy: MetricPolicy,
) -> Result<MetricOperator> {
    build_metric_with(sys, space, policy, &MetricConfig::default())
}

/// Select an invertible `V` from the intertwiner solution space.
pub fn build_metric_with(
    sys: &EigenSystem,
    space: &IntertwinerSpace,
    policy: MetricPolicy,
    cfg: &MetricConfig,
) -> Result<MetricOperator> {
    let h = space.hamiltonian();
    if sys.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: sys.dim(),
        });
    }
    let (_, left) = sys.require_complete()?;
    if space.dimension() == 0 {
        return Err(Error::EmptyIntertwinerSpace);
    }

    let v = match policy {
        MetricPolicy::PaperGauge => paper_gauge(h)?,
        MetricPolicy::FirstBasis => {
            let b = space.basis()[0].matrix();
            normalized(b)
        }
        MetricPolicy::HermitianRepresentative => {
            let v = hermitian_representative(sys, left, space)?;
            let cond = condition_number(&v);
            if cond.is_nan() || cond > cfg.max_condition {
                return Err(Error::NoInvertibleMetric { condition: cond });
            }
            v
        }
    };
    Ok(MetricOperator::certify(h, ComplexMatrix::new(v)?, policy, cfg))
}

fn normalized(v: &DMatrix<C64>) -> DMatrix<C64> {
    let s = singular_values(v)[0];
    v / C64::new(s, 0.0)
}

fn paper_gauge(h: &ComplexMatrix) -> Result<DMatrix<C64>> {
    if h.dim() != 2 {
        return Err(Error::GaugeUnavailable(format!(
            "requires a 2x2 matrix, got {0}x{0}",
            h.dim()
        )));
    }
    let scale = h.norm();
    let off = h[(0, 1)].norm() + h[(1, 0)].norm();
    if off > 1e-14 * scale {
        return Err(Error::GaugeUnavailable("matrix is not diagonal".into()));
    }
    let (a, d) = (h[(0, 0)], h[(1, 1)]);
    if (a - d.conj()).norm() > 1e-12 * scale || a.im == 0.0 {
        return Err(Error::GaugeUnavailable(
            "diagonal is not a complex-conjugate pair".into(),
        ));
    }
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    Ok(DMatrix::from_row_slice(2, 2, &[o, -one, one, o]))
}

/// Real orthonormal basis (under `Re tr(A^dagger B)`) of the Hermitian solutions.
///
/// The Hermitian and anti-Hermitian parts of each basis element span the
/// Hermitian subspace with heavy redundancy, so the span is taken from an
/// SVD of their real vectorizations rather than by Gram-Schmidt.
fn hermitian_basis(space: &IntertwinerSpace) -> Result<Vec<DMatrix<C64>>> {
    let n = space.hamiltonian().dim();
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, 0.5);
    let candidates: Vec<DMatrix<C64>> = space
        .basis()
        .iter()
        .flat_map(|b| {
            let (b, bh) = (b.matrix(), b.matrix().adjoint());
            [(b + &bh) * half, (b - &bh) * half_i]
        })
        .collect();
    let x = DMatrix::<f64>::from_fn(2 * n * n, candidates.len(), |r, k| {
        let z = candidates[k][r / 2];
        if r % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let svd = svd(&x)?;
    let u = svd.u;
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    Ok((0..svd.sigma.len())
        .filter(|&k| top > 0.0 && svd.sigma[k] > HERMITIAN_SPAN_TOL * top)
        .map(|k| DMatrix::from_fn(n, n, |i, j| {
            let r = 2 * (i + j * n);
            C64::new(u[(r, k)], u[(r + 1, k)])
        }))
        .collect())
}

fn real_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn combine(basis: &[DMatrix<C64>], coeffs: &[f64]) -> DMatrix<C64> {
    let n = basis[0].nrows();
    basis
        .iter()
        .zip(coeffs)
        .fold(DMatrix::zeros(n, n), |acc, (b, &c)| acc + b * C64::new(c, 0.0))
}

/// `sigma_min / sigma_max`, zero for the zero matrix.
fn inverse_condition(m: &DMatrix<C64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

fn unit(c: &mut [f64]) {
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        c.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Seed `L^dagger G L` with `G` linking each eigenvalue to its conjugate
/// partner, projected on the Hermitian solutions and refined by a
/// coordinate pattern search over real coefficients.
fn hermitian_representative(
    sys: &EigenSystem,
    left: &DMatrix<C64>,
    space: &IntertwinerSpace,
) -> Result<DMatrix<C64>> {
    let basis = hermitian_basis(space)?;
    let d = basis.len();
    let objective = |c: &[f64]| inverse_condition(&combine(&basis, c));

    let seed = left.adjoint() * partner_matrix(sys.eigenvalues(), sys.tol()) * left;
    let mut start: Vec<f64> = basis.iter().map(|b| real_inner(b, &seed)).collect();
    unit(&mut start);
    let mut best_c = start;
    let mut best = objective(&best_c);
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        let f = objective(&e);
        if f > best * (1.0 + 1e-9) {
            best = f;
            best_c = e;
        }
    }

    let mut step = 0.5;
    let mut evals = 0;
    while step > 1e-6 && evals < 400 * d.max(1) {
        let mut improved = false;
        'dirs: for k in 0..d {
            for sign in [1.0, -1.0] {
                let mut trial = best_c.clone();
                trial[k] += sign * step;
                unit(&mut trial);
                evals += 1;
                let f = objective(&trial);
                if f > best * (1.0 + 1e-12) {
                    best = f;
                    best_c = trial;
                    improved = true;
                    break 'dirs;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let v = combine(&basis, &best_c);
    let v = (&v + v.adjoint()) * C64::new(0.5, 0.0);
    let v = normalized(&v);
    let sign = sign_reference(&v);
    Ok(v * C64::new(sign, 0.0))
}

/// `G_ij = 1` where `lambda_j` is the conjugate partner of `lambda_i`.
fn partner_matrix(values: &[C64], tol: f64) -> DMatrix<C64> {
    let n = values.len();
    let radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let abs_tol = tol.sqrt() * radius;
    let mut g = DMatrix::<C64>::zeros(n, n);
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        if values[i].im.abs() <= abs_tol {
            g[(i, i)] = C64::new(1.0, 0.0);
            used[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .map(|j| (j, (values[i] - values[j].conj()).norm()))
            .filter(|&(_, dist)| dist <= abs_tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        used[i] = true;
        if let Some((j, _)) = partner {
            used[j] = true;
            g[(i, j)] = C64::new(1.0, 0.0);
            g[(j, i)] = C64::new(1.0, 0.0);
        }
    }
    g
}

/// Sign making the trace positive, or the leading large real entry positive
/// when the trace vanishes.
fn sign_reference(v: &DMatrix<C64>) -> f64 {
    let tr = v.trace().re;
    if tr.abs() > 1e-10 {
        return tr.signum();
    }
    let biggest = v.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let n = v.nrows();
    let pick = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|ij| v[ij])
        .find(|z| biggest > 1e-10 && z.re.abs() >= biggest * (1.0 - 1e-8));
    match pick {
        Some(z) => z.re.signum(),
        None => {
            let z = v
                .iter()
                .copied()
                .max_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
                .unwrap_or(C64::new(1.0, 0.0));
            if z.im < 0.0 {
                -1.0
            } else {
                1.0
            }
        }
    }
}

/// A ket `|R>` together with its `V`-dual bra `<R|V`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub ket: DVector<C64>,
    pub bra: RowDVector<C64>,
}

impl DualPair {
    pub fn new(ket: DVector<C64>, v: &ComplexMatrix) -> Result<Self> {
        if ket.len() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                found: ket.len(),
            });
        }
        let bra = ket.adjoint() * v.matrix();
        Ok(Self { ket, bra })
    }
}

/// `x^dagger V y`.
pub fn v_inner(x: &DVector<C64>, y: &DVector<C64>, v: &ComplexMatrix) -> Result<C64> {
    for len in [x.len(), y.len()] {
        if len != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                found: len,
            });
        }
    }
    Ok((x.adjoint() * v.matrix() * y)[(0, 0)])
}

/// `G_ij = x_i^dagger V x_j`.
pub fn gram_matrix(vectors: &[DVector<C64>], v: &ComplexMatrix) -> Result<DMatrix<C64>> {
    let k = vectors.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = v_inner(&vectors[i], &vectors[j], v)?;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub residual: f64,
    /// `G_ij = <R_i|V|R_j>`.
    pub gram: DMatrix<C64>,
    /// Weights `W = G^-1` of the outer products `|R_i><R_j|V`.
    pub weights: DMatrix<C64>,
}

/// `| sum_ij W_ij |R_i><R_j|V - I |` with `W` the inverse of the `V` Gram matrix.
pub fn closure_check(pairs: &[DualPair]) -> Result<ClosureReport> {
    let n = pairs.first().map(|p| p.ket.len()).unwrap_or(0);
    if pairs.len() != n || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pairs.len(),
        });
    }
    let gram = DMatrix::from_fn(n, n, |i, j| (&pairs[i].bra * &pairs[j].ket)[(0, 0)]);
    if condition_number(&gram) > 1e14 {
        return Err(Error::Singular(
            "V Gram matrix of the kets (incomplete or defective set)".into(),
        ));
    }
    let weights = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("V Gram matrix".into()))?;
    let mut sum = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if weights[(i, j)] != C64::new(0.0, 0.0) {
                sum += &pairs[i].ket * &pairs[j].bra * weights[(i, j)];
            }
        }
    }
    let residual = frobenius(&(sum - DMatrix::identity(n, n)));
    Ok(ClosureReport {
        residual,
        gram,
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoHermiticity {
    /// `|V H - H^dagger V| / (|V| |H|)`.
    pub intertwining: f64,
    /// `|V H V^-1 - H^dagger| / |H|`.
    pub similarity: f64,
}

pub fn verify_pseudo_hermiticity(h: &ComplexMatrix, v: &ComplexMatrix) -> Result<PseudoHermiticity> {
    if h.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.dim(),
        });
    }
    let v_inv = v.inverse()?;
    let similar = v.matrix() * h.matrix() * v_inv.matrix() - h.matrix().adjoint();
    Ok(PseudoHermiticity {
        intertwining: intertwining_residual(h, v.matrix()),
        similarity: frobenius(&similar) / h.norm().max(f64::MIN_POSITIVE),
    })
}
