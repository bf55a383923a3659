use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix with finite entries.
///
/// Every operator in the crate (Hamiltonians, metrics, parity maps, evolution
/// operators) is carried in this type. Construction validates shape and
/// finiteness, so downstream routines never see NaN or Inf input.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        if let Some((k, _)) = m
            .iter()
            .enumerate()
            .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
        {
            // column-major storage
            let n = m.nrows();
            return Err(Error::NonFinite(format!(
                "entries[{}][{}]",
                k % n,
                k / n
            )));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Format(format!(
                    "entries: row {i} has {} columns, expected {n}",
                    r.len()
                )));
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// The two-level matrix `[[1+i, s], [s, 1-i]]`, symmetric under
    /// `sigma_1` composed with complex conjugation for every real `s`.
    pub fn two_level(s: f64) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let i = C64::i();
        let s = C64::new(s, 0.0);
        Self::from_rows(&[vec![one + i, s], vec![s, one - i]])
    }

    /// `diag(E0 + i*gamma, E0 - i*gamma)`: the diagonalized conjugate-pair system.
    pub fn conjugate_pair(e0: f64, gamma: f64) -> Result<Self> {
        Self::diagonal(&[C64::new(e0, gamma), C64::new(e0, -gamma)])
    }

    pub fn sigma_x() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Self(DMatrix::from_row_slice(2, 2, &[o, l, l, o]))
    }

    pub fn sigma_y() -> Self {
        let o = C64::new(0.0, 0.0);
        let i = C64::i();
        Self(DMatrix::from_row_slice(2, 2, &[o, -i, i, o]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Elementwise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.0)
    }

    pub fn spectral_norm(&self) -> f64 {
        singular_values(&self.0).first().copied().unwrap_or(0.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        frobenius(&(&self.0 - self.0.adjoint())) <= tol * self.norm().max(f64::MIN_POSITIVE)
    }

    /// Ratio of extreme singular values; infinite for a singular matrix.
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.0)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.condition_number() > 1e14 {
            return Err(Error::Singular(format!(
                "condition number {:e}",
                self.condition_number()
            )));
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or_else(|| Error::Singular("inverse failed".into()))
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<C64>;
    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

pub(crate) fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
///
/// Falls back to nalgebra's unverified values if no decomposition passes the
/// accuracy check, so norms and condition numbers stay available.
pub(crate) fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    match super::svd::svd(m) {
        Ok(s) => s.sigma,
        Err(_) => {
            let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        }
    }
}

pub(crate) fn condition_number(m: &DMatrix<C64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Interchange layout: `{ "n": int, "entries": [[[re, im], ...], ...] }`, row-major.
#[derive(Serialize, Deserialize)]
pub(crate) struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        MatrixFile {
            n,
            entries: (0..n)
                .map(|i| (0..n).map(|j| crate::serde_util::pair(m[(i, j)])).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        if f.entries.len() != f.n {
            return Err(Error::Format(format!(
                "entries: {} rows but n = {}",
                f.entries.len(),
                f.n
            )));
        }
        let rows: Vec<Vec<C64>> = f
            .entries
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        Self::from_rows(&rows)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        ComplexMatrix::try_from(f).map_err(serde::de::Error::custom)
    }
}

impl ComplexMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::try_from(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serialization is infallible")
    }
}
