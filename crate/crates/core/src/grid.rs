use crate::error::{Error, Result};

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::InvalidGrid("grid bounds must be finite".into()));
    }
    match points {
        0 => Err(Error::InvalidGrid("grid needs at least one point".into())),
        1 => Ok(vec![start]),
        _ if stop <= start => Err(Error::InvalidGrid(format!(
            "grid stop {stop} must exceed start {start}"
        ))),
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            let mut v: Vec<f64> = (0..points).map(|k| start + step * k as f64).collect();
            v[points - 1] = stop;
            Ok(v)
        }
    }
}
