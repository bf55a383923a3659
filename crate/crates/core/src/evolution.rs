//! Time evolution under non-Hermitian `H` via the spectral formula, with the
//! Dirac norm and the `V` norm tracked side by side.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eig, evolution_phase, frobenius, mat_exp_evolution, ComplexMatrix, EigenSystem, C64,
    DEFAULT_TOL,
};
use crate::table::{num, Table};

#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    /// `<psi|psi>`.
    pub dirac_norms: Vec<f64>,
    /// `<psi|V|psi>`, present when a metric was supplied.
    pub v_norms: Option<Vec<C64>>,
}

impl StateTrajectory {
    /// Largest finite-difference rate `|v(t_k+1) - v(t_k)| / (t_k+1 - t_k)`.
    pub fn max_v_norm_rate(&self) -> Option<f64> {
        let v = self.v_norms.as_ref()?;
        Some(
            self.times
                .windows(2)
                .zip(v.windows(2))
                .map(|(t, v)| (v[1] - v[0]).norm() / (t[1] - t[0]))
                .fold(0.0, f64::max),
        )
    }

    /// Columns `t, re_psi_k, im_psi_k..., dirac_norm, re_v_norm, im_v_norm`;
    /// the `v_norm` cells are empty without a metric.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut header = vec!["t".to_string()];
        for k in 0..n {
            header.push(format!("re_psi_{k}"));
            header.push(format!("im_psi_{k}"));
        }
        header.extend(["dirac_norm", "re_v_norm", "im_v_norm"].map(String::from));
        let mut table = Table::new(&header);
        for (i, (&t, psi)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = vec![num(t)];
            for z in psi.iter() {
                row.push(num(z.re));
                row.push(num(z.im));
            }
            row.push(num(self.dirac_norms[i]));
            match &self.v_norms {
                Some(v) => {
                    row.push(num(v[i].re));
                    row.push(num(v[i].im));
                }
                None => row.extend([String::new(), String::new()]),
            }
            table.row(&row);
        }
        table.finish()
    }
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidGrid("time grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("time grid contains non-finite values".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("time grid is not strictly ascending".into()));
    }
    Ok(())
}

fn check_state(psi0: &DVector<C64>, n: usize) -> Result<()> {
    if psi0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: psi0.len(),
        });
    }
    if psi0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("initial state".into()));
    }
    Ok(())
}

/// `psi(t) = U(t) psi0` for every time in the grid.
pub fn evolve(
    h: &ComplexMatrix,
    psi0: &DVector<C64>,
    times: &[f64],
    metric: Option<&ComplexMatrix>,
) -> Result<StateTrajectory> {
    let sys = eig(h, DEFAULT_TOL)?;
    evolve_with(&sys, psi0, times, metric)
}

/// As [`evolve`], reusing an existing eigendecomposition.
pub fn evolve_with(
    sys: &EigenSystem,
    psi0: &DVector<C64>,
    times: &[f64],
    metric: Option<&ComplexMatrix>,
) -> Result<StateTrajectory> {
    let (right, left) = sys.require_complete()?;
    let n = sys.dim();
    check_state(psi0, n)?;
    validate_times(times)?;
    if let Some(v) = metric {
        if v.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.dim(),
            });
        }
    }

    let coeffs = left * psi0;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let mut amp = coeffs.clone();
        for (a, &lambda) in amp.iter_mut().zip(sys.eigenvalues()) {
            *a *= evolution_phase(lambda, t)?;
        }
        states.push(right * amp);
    }
    let dirac_norms = states.iter().map(|s| s.norm_squared()).collect();
    let v_norms = metric.map(|v| {
        states
            .iter()
            .map(|s| (s.adjoint() * v.matrix() * s)[(0, 0)])
            .collect()
    });
    Ok(StateTrajectory {
        times: times.to_vec(),
        states,
        dirac_norms,
        v_norms,
    })
}

#[derive(Debug, Clone)]
pub struct ResidualCurve {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ResidualCurve {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// `|V^-1 U(t)^dagger V U(t) - I|` over the grid.
pub fn pseudounitarity_residual(
    h: &ComplexMatrix,
    v: &ComplexMatrix,
    times: &[f64],
) -> Result<ResidualCurve> {
    validate_times(times)?;
    if v.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.dim(),
        });
    }
    let v_inv = v.inverse()?;
    let sys = eig(h, DEFAULT_TOL)?;
    let n = h.dim();
    let residuals = times
        .iter()
        .map(|&t| {
            let u = mat_exp_evolution(&sys, t)?;
            let p = v_inv.matrix() * u.matrix().adjoint() * v.matrix() * u.matrix();
            Ok(frobenius(&(p - DMatrix::identity(n, n))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualCurve {
        times: times.to_vec(),
        residuals,
    })
}

/// `|U(t)^dagger U(t) - I|`: the ordinary unitarity defect.
pub fn unitarity_residual(h: &ComplexMatrix, t: f64) -> Result<f64> {
    let sys = eig(h, DEFAULT_TOL)?;
    let u = mat_exp_evolution(&sys, t)?;
    let n = h.dim();
    Ok(frobenius(
        &(u.matrix().adjoint() * u.matrix() - DMatrix::identity(n, n)),
    ))
}

/// Labels of the two modes of `diag(E0 + i gamma, E0 - i gamma)`. They are
/// transition channels (populating and depopulating the upper level), not
/// ground and excited levels.
pub const CHANNEL_LABELS: [&str; 2] = [
    "excitation transition E0+i*gamma (growing mode)",
    "decay transition E0-i*gamma (decaying mode)",
];

const CONSERVATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct TwoLevelReport {
    #[serde(skip)]
    pub trajectory: StateTrajectory,
    pub channels: [&'static str; 2],
    /// `|c_1(t)|^2`.
    pub excitation_population: Vec<f64>,
    /// `|c_2(t)|^2`.
    pub decay_population: Vec<f64>,
    pub dirac_total: Vec<f64>,
    pub dirac_conserved: bool,
    pub v_norm_conserved: bool,
}

fn conserved<T: Copy>(values: &[T], dist: impl Fn(T, T) -> f64, mag: impl Fn(T) -> f64) -> bool {
    let first = values[0];
    let scale = mag(first).max(1.0);
    values.iter().all(|&x| dist(x, first) <= CONSERVATION_TOL * scale)
}

/// Evolve under `diag(E0 + i gamma, E0 - i gamma)` with `V = -i sigma_y`.
pub fn two_level_scenario(
    e0: f64,
    gamma: f64,
    psi0: &DVector<C64>,
    times: &[f64],
) -> Result<TwoLevelReport> {
    if !(gamma > 0.0 && gamma.is_finite()) || !e0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "two-level scenario needs finite E0 and gamma > 0, got E0 = {e0}, gamma = {gamma}"
        )));
    }
    let h = ComplexMatrix::conjugate_pair(e0, gamma)?;
    let v = fixed_gauge_metric();
    let trajectory = evolve(&h, psi0, times, Some(&v))?;
    let excitation_population: Vec<f64> =
        trajectory.states.iter().map(|s| s[0].norm_sqr()).collect();
    let decay_population: Vec<f64> = trajectory.states.iter().map(|s| s[1].norm_sqr()).collect();
    let dirac_total = trajectory.dirac_norms.clone();
    let dirac_conserved = conserved(&dirac_total, |a, b| (a - b).abs(), f64::abs);
    let v_norm_conserved = conserved(
        trajectory.v_norms.as_deref().expect("metric supplied"),
        |a: C64, b: C64| (a - b).norm(),
        |a: C64| a.norm(),
    );
    Ok(TwoLevelReport {
        trajectory,
        channels: CHANNEL_LABELS,
        excitation_population,
        decay_population,
        dirac_total,
        dirac_conserved,
        v_norm_conserved,
    })
}

/// `V = -i sigma_y = [[0, -1], [1, 0]]`.
pub fn fixed_gauge_metric() -> ComplexMatrix {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    ComplexMatrix::from_rows(&[vec![o, -l], vec![l, o]]).expect("constant matrix")
}
