//! The two second-order wave equations obtained by setting `E = i d/dt` in
//! the PT pole pair and in the damped-oscillator pole pair, together with a
//! fixed-step RK4 integrator for monic complex IVPs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, EXPONENT_LIMIT};
use crate::response::ResonanceParams;
use crate::table::{num, Table};

/// Largest admitted `step * max|root|`.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

/// `psi'' + c1 psi' + c0 psi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveEquation {
    #[serde(serialize_with = "crate::serde_util::complex", deserialize_with = "crate::serde_util::de_complex")]
    pub c1: C64,
    #[serde(serialize_with = "crate::serde_util::complex", deserialize_with = "crate::serde_util::de_complex")]
    pub c0: C64,
}

impl WaveEquation {
    /// `(c2, c1, c0)` with `c2 = 1`.
    pub fn coefficients(&self) -> (C64, C64, C64) {
        (C64::new(1.0, 0.0), self.c1, self.c0)
    }

    /// Roots of `r^2 + c1 r + c0`; solutions are `exp(r t)`.
    pub fn roots(&self) -> [C64; 2] {
        let m = -self.c1 / 2.0;
        let q = (m * m - self.c0).sqrt();
        let (big, small) = if (m + q).norm() >= (m - q).norm() { (m + q, m - q) } else { (m - q, m + q) };
        if big.norm() == 0.0 {
            return [big, small];
        }
        // Vieta: avoid cancellation in the smaller root.
        [big, self.c0 / big]
    }

    /// Energy-space poles `E = i r`.
    pub fn energy_poles(&self) -> [C64; 2] {
        let i = C64::new(0.0, 1.0);
        self.roots().map(|r| i * r)
    }

    /// Evaluates `psi'' + c1 psi' + c0 psi`.
    pub fn residual(&self, psi: C64, dpsi: C64, ddpsi: C64) -> C64 {
        ddpsi + self.c1 * dpsi + self.c0 * psi
    }
}

/// `(1, 2i E0, -E0^2 - gamma^2)`: roots `-i E0 +- gamma`, energy poles `E0 +- i gamma`.
pub fn pt_wave_equation(p: &ResonanceParams) -> WaveEquation {
    WaveEquation {
        c1: C64::new(0.0, 2.0 * p.e0),
        c0: C64::new(-p.e0 * p.e0 - p.gamma * p.gamma, 0.0),
    }
}

/// `(1, 2 gamma, E0^2 + gamma^2)`: roots `-gamma -+ i E0`, energy poles `+-E0 - i gamma`.
pub fn damped_oscillator_equation(p: &ResonanceParams) -> WaveEquation {
    WaveEquation {
        c1: C64::new(2.0 * p.gamma, 0.0),
        c0: C64::new(p.e0 * p.e0 + p.gamma * p.gamma, 0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationKind {
    Pt,
    Damped,
}

impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pt" => Ok(Self::Pt),
            "damped" => Ok(Self::Damped),
            other => Err(Error::Format(format!("equation: unknown value `{other}`"))),
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pt => "pt",
            Self::Damped => "damped",
        })
    }
}

pub fn wave_equation(kind: EquationKind, p: &ResonanceParams) -> WaveEquation {
    match kind {
        EquationKind::Pt => pt_wave_equation(p),
        EquationKind::Damped => damped_oscillator_equation(p),
    }
}

/// Canonical initial data `(psi(0), psi'(0))`.
///
/// PT: `(0, 1)`, the antisymmetric combination of `exp(-i E0 t -+ gamma t)`
/// with unit slope. Damped: `(1, -i E0 - gamma)`, the pure mode
/// `exp(-i E0 t - gamma t)`.
pub fn canonical_initial(kind: EquationKind, p: &ResonanceParams) -> (C64, C64) {
    match kind {
        EquationKind::Pt => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        EquationKind::Damped => (C64::new(1.0, 0.0), C64::new(-p.gamma, -p.e0)),
    }
}

/// Closed-form solution for the canonical initial data.
pub fn canonical_solution(kind: EquationKind, p: &ResonanceParams, t: f64) -> C64 {
    let carrier = C64::from_polar(1.0, -p.e0 * t);
    match kind {
        // (exp(gamma t) - exp(-gamma t)) / (2 gamma)
        EquationKind::Pt => carrier * ((p.gamma * t).sinh() / p.gamma),
        EquationKind::Damped => carrier * (-p.gamma * t).exp(),
    }
}

/// Monic second-order IVP started at `t = 0` and sampled on `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderIvp {
    pub equation: WaveEquation,
    pub psi0: C64,
    pub dpsi0: C64,
    pub times: Vec<f64>,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
}

impl TimeSeries {
    /// Columns `t, re_psi, im_psi, re_dpsi, im_dpsi`.
    pub fn to_csv(&self) -> String {
        let mut table = Table::new(&["t", "re_psi", "im_psi", "re_dpsi", "im_dpsi"]);
        for i in 0..self.times.len() {
            table.row(&[
                num(self.times[i]),
                num(self.psi[i].re),
                num(self.psi[i].im),
                num(self.dpsi[i].re),
                num(self.dpsi[i].im),
            ]);
        }
        table.finish()
    }

    /// `max_i |psi(t_i) - f(t_i)|`.
    pub fn max_error(&self, f: impl Fn(f64) -> C64) -> f64 {
        self.times
            .iter()
            .zip(&self.psi)
            .map(|(&t, &z)| (z - f(t)).norm())
            .fold(0.0, f64::max)
    }
}

fn rk4_step(eq: &WaveEquation, y: (C64, C64), h: f64) -> (C64, C64) {
    let f = |(psi, dpsi): (C64, C64)| (dpsi, -eq.c1 * dpsi - eq.c0 * psi);
    let add = |(a, b): (C64, C64), (c, d): (C64, C64), s: f64| (a + c * s, b + d * s);
    let k1 = f(y);
    let k2 = f(add(y, k1, h / 2.0));
    let k3 = f(add(y, k2, h / 2.0));
    let k4 = f(add(y, k3, h));
    (
        y.0 + (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * (h / 6.0),
        y.1 + (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * (h / 6.0),
    )
}

/// Classical RK4 on `(psi, psi')`. Each interval between consecutive
/// sample times is split into equal substeps no longer than `step`.
pub fn integrate(ivp: &SecondOrderIvp) -> Result<TimeSeries> {
    let eq = &ivp.equation;
    if !(ivp.step > 0.0 && ivp.step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {}", ivp.step)));
    }
    for (name, z) in [("c1", eq.c1), ("c0", eq.c0), ("psi0", ivp.psi0), ("dpsi0", ivp.dpsi0)] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite(name.into()));
        }
    }
    crate::evolution::validate_times(&ivp.times)?;
    if ivp.times[0] < 0.0 {
        return Err(Error::InvalidGrid("time grid must start at t >= 0".into()));
    }
    let roots = eq.roots();
    let product = ivp.step * roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    if product > MAX_STEP_PRODUCT {
        return Err(Error::StepTooLarge {
            step: ivp.step,
            product,
            limit: MAX_STEP_PRODUCT,
        });
    }
    let growth = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
    let t_end = *ivp.times.last().expect("validated non-empty");
    if growth * t_end > EXPONENT_LIMIT {
        return Err(Error::Overflow {
            exponent: growth * t_end,
            limit: EXPONENT_LIMIT,
        });
    }

    let mut y = (ivp.psi0, ivp.dpsi0);
    let mut t = 0.0;
    let mut psi = Vec::with_capacity(ivp.times.len());
    let mut dpsi = Vec::with_capacity(ivp.times.len());
    for &target in &ivp.times {
        let span = target - t;
        if span > 0.0 {
            // Slack keeps exact multiples of the step from gaining a substep to rounding.
            let n = (span / ivp.step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                y = rk4_step(eq, y, h);
            }
            if !(y.0.re.is_finite() && y.0.im.is_finite() && y.1.re.is_finite() && y.1.im.is_finite()) {
                return Err(Error::Overflow {
                    exponent: growth * target,
                    limit: EXPONENT_LIMIT,
                });
            }
        }
        t = target;
        psi.push(y.0);
        dpsi.push(y.1);
    }
    Ok(TimeSeries {
        times: ivp.times.clone(),
        psi,
        dpsi,
    })
}
