//! Antilinear (PT-type) symmetry checks and spectrum classification.
//!
//! An antilinear map is represented as `v -> P conj(v)` with `P` invertible;
//! `H` is symmetric when `P conj(H) P^-1 = H`. Such a symmetry forces the
//! spectrum to be real or to come in complex-conjugate pairs, which
//! `classify_spectrum` checks.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, ComplexMatrix, EigenCluster, EigenSystem, C64};

/// Largest condition number accepted for the linear part `P`.
pub const MAX_PARITY_CONDITION: f64 = 1e12;

/// Default classification tolerance, relative to the spectral radius.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct AntilinearSymmetry {
    parity: ComplexMatrix,
    parity_inverse: ComplexMatrix,
}

impl AntilinearSymmetry {
    pub fn new(parity: ComplexMatrix) -> Result<Self> {
        let cond = parity.condition_number();
        if cond > MAX_PARITY_CONDITION {
            return Err(Error::Singular(format!(
                "parity operator has condition number {cond:e}"
            )));
        }
        let parity_inverse = parity.inverse()?;
        Ok(Self {
            parity,
            parity_inverse,
        })
    }

    /// `P = sigma_x`, `T = K`.
    pub fn sigma_x() -> Self {
        Self::new(ComplexMatrix::sigma_x()).expect("sigma_x is invertible")
    }

    /// The exchange (anti-diagonal identity) parity in dimension `n`.
    pub fn exchange(n: usize) -> Self {
        let p = DMatrix::from_fn(n, n, |i, j| {
            if i + j + 1 == n {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(ComplexMatrix::new(p).expect("exchange matrix is valid"))
            .expect("exchange matrix is invertible")
    }

    pub fn parity(&self) -> &ComplexMatrix {
        &self.parity
    }

    pub fn dim(&self) -> usize {
        self.parity.dim()
    }

    /// `P conj(H) P^-1`.
    pub fn conjugate(&self, h: &ComplexMatrix) -> DMatrix<C64> {
        self.parity.matrix() * h.conj().matrix() * self.parity_inverse.matrix()
    }

    /// `P conj(v)`.
    pub fn apply(&self, v: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        self.parity.matrix() * v.map(|z| z.conj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub residual: f64,
}

/// Whether `P conj(H) P^-1 = H` within `tol * |H|`.
pub fn check_pt(h: &ComplexMatrix, sym: &AntilinearSymmetry, tol: f64) -> Result<SymmetryCheck> {
    if sym.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: sym.dim(),
        });
    }
    let diff = sym.conjugate(h) - h.matrix();
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let residual = frobenius(&diff) / scale;
    Ok(SymmetryCheck {
        symmetric: residual <= tol,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealValue {
    pub value: f64,
    pub multiplicity: usize,
}

/// Eigenvalues `e0 + i gamma` and `e0 - i gamma`, `gamma > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    pub e0: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub real_values: Vec<RealValue>,
    pub conjugate_pairs: Vec<ConjugatePair>,
    #[serde(
        serialize_with = "crate::serde_util::complex_vec",
        deserialize_with = "crate::serde_util::de_complex_vec"
    )]
    pub unmatched: Vec<C64>,
    /// Defective clusters. Their eigenvalues are also counted in the
    /// categories above; this is an annotation, not a separate category.
    pub exceptional: Vec<EigenCluster>,
    pub broken_antilinearity: bool,
    pub tol_used: f64,
}

impl SpectrumReport {
    /// Total number of eigenvalues accounted for.
    pub fn count(&self) -> usize {
        self.real_values.iter().map(|r| r.multiplicity).sum::<usize>()
            + 2 * self.conjugate_pairs.len()
            + self.unmatched.len()
    }

    pub fn is_exceptional(&self) -> bool {
        !self.exceptional.is_empty()
    }

    /// The eigenvalue list the report describes.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.count());
        for r in &self.real_values {
            out.extend(std::iter::repeat_n(C64::new(r.value, 0.0), r.multiplicity));
        }
        for p in &self.conjugate_pairs {
            out.push(C64::new(p.e0, p.gamma));
            out.push(C64::new(p.e0, -p.gamma));
        }
        out.extend_from_slice(&self.unmatched);
        out
    }
}

fn by_real_then_imag(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Sort eigenvalues into real values, conjugate pairs and unmatched values.
///
/// `tol` is relative to the spectral radius. Values with `|Im| <= tol` are
/// real; the rest are paired in ascending-real-part order, each with its
/// nearest unused conjugate partner within `tol`.
pub fn classify_spectrum(eigenvalues: &[C64], tol: f64) -> Result<SpectrumReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if let Some(z) = eigenvalues.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(format!("eigenvalue {z}")));
    }
    let radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let abs_tol = if radius > 0.0 { tol * radius } else { tol };

    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(by_real_then_imag);

    let (real, complex): (Vec<C64>, Vec<C64>) =
        sorted.into_iter().partition(|z| z.im.abs() <= abs_tol);

    let mut real_values: Vec<RealValue> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    let flush = |group: &mut Vec<f64>, out: &mut Vec<RealValue>| {
        if !group.is_empty() {
            out.push(RealValue {
                value: group.iter().sum::<f64>() / group.len() as f64,
                multiplicity: group.len(),
            });
            group.clear();
        }
    };
    for z in &real {
        if group.first().is_some_and(|&g| (z.re - g).abs() > abs_tol) {
            flush(&mut group, &mut real_values);
        }
        group.push(z.re);
    }
    flush(&mut group, &mut real_values);

    let mut used = vec![false; complex.len()];
    let mut conjugate_pairs = Vec::new();
    let mut unmatched = Vec::new();
    for i in 0..complex.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = complex[i];
        let partner = (0..complex.len())
            .filter(|&j| !used[j] && complex[j].im.signum() != z.im.signum())
            .map(|j| (j, (z - complex[j].conj()).norm()))
            .filter(|&(_, d)| d <= abs_tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, _)) => {
                used[j] = true;
                let w = complex[j];
                conjugate_pairs.push(ConjugatePair {
                    e0: 0.5 * (z.re + w.re),
                    gamma: 0.5 * (z.im.abs() + w.im.abs()),
                });
            }
            None => unmatched.push(z),
        }
    }

    Ok(SpectrumReport {
        real_values,
        conjugate_pairs,
        broken_antilinearity: !unmatched.is_empty(),
        unmatched,
        exceptional: Vec::new(),
        tol_used: abs_tol,
    })
}

/// Classify an eigensystem's spectrum and attach its defective clusters.
pub fn classify_eigensystem(sys: &EigenSystem, tol: f64) -> Result<SpectrumReport> {
    let mut report = classify_spectrum(sys.eigenvalues(), tol)?;
    report.exceptional = sys.defective_clusters().to_vec();
    Ok(report)
}

/// Whether every eigenvector is mapped by `v -> P conj(v)` back into its own
/// eigenspace (unbroken symmetry).
///
/// Requires `H` to pass `check_pt` at `tol` and a complete eigensystem.
pub fn pt_unbroken(
    h: &ComplexMatrix,
    sym: &AntilinearSymmetry,
    sys: &EigenSystem,
    tol: f64,
) -> Result<bool> {
    let check = check_pt(h, sym, tol)?;
    if !check.symmetric {
        return Err(Error::NotSymmetric {
            residual: check.residual,
        });
    }
    let (right, left) = sys.require_complete()?;
    let n = sys.dim();
    let values = sys.eigenvalues();
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    // Same-eigenvalue projector per eigenvector.
    for i in 0..n {
        let mut projector = DMatrix::<C64>::zeros(n, n);
        for j in (0..n).filter(|&j| (values[j] - values[i]).norm() <= tol.sqrt() * scale) {
            projector += right.column(j) * left.row(j);
        }
        let image = sym.apply(&right.column(i).into_owned());
        let outside = &image - &projector * &image;
        if outside.norm() > tol.sqrt() * image.norm() {
            return Ok(false);
        }
    }
    Ok(true)
}
