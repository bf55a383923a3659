//! `[re, im]` pair encoding for complex numbers in JSON artifacts.

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `[re, im]` with signed zeros folded to `+0`.
pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re + 0.0, z.im + 0.0]
}

pub fn complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    pair(*z).serialize(s)
}

pub fn de_complex<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let [re, im] = <[f64; 2]>::deserialize(d)?;
    Ok(Complex64::new(re, im))
}

pub fn complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&pair(*z))?;
    }
    seq.end()
}

pub fn de_complex_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
    let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
    Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}
