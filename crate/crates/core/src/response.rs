//! Resonance response: the single-pole Breit-Wigner propagator and the
//! two-pole PT propagator, their phase shifts and Wigner time delays, and the
//! time-domain transform `D(t) = (1/2pi) int dE exp(-iEt) D(E)`.
//!
//! The transform is evaluated by residues with explicit per-pole contour
//! membership. For the PT pair both poles are assigned to the lower contour,
//! which yields a decaying and a growing mode for `t > 0`. The Breit-Wigner
//! transform can also be evaluated by direct real-axis quadrature as a check.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, EXPONENT_LIMIT};
use crate::table::{num, Table};

/// Energy `E0` and half-width `gamma > 0` of a resonance (`hbar = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceParams {
    pub e0: f64,
    pub gamma: f64,
}

impl ResonanceParams {
    pub fn new(e0: f64, gamma: f64) -> Result<Self> {
        if !e0.is_finite() {
            return Err(Error::InvalidParameter(format!("e0 must be finite, got {e0}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(Self { e0, gamma })
    }

    /// The default curve grid: 2001 points over `E0 +- 20 gamma`.
    pub fn default_energy_grid(&self) -> Vec<f64> {
        crate::grid::linspace(self.e0 - 20.0 * self.gamma, self.e0 + 20.0 * self.gamma, 2001)
            .expect("valid default grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `tan delta = gamma / (E0 - E)`: positive delay.
    Delay,
    /// `tan delta = -gamma / (E0 - E)`: time advance.
    Advance,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Delay => 1.0,
            Branch::Advance => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagatorKind {
    BreitWigner,
    PtPair,
}

impl FromStr for PropagatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "breit-wigner" => Ok(Self::BreitWigner),
            "pt-pair" => Ok(Self::PtPair),
            other => Err(Error::Format(format!("kind: unknown value `{other}`"))),
        }
    }
}

impl fmt::Display for PropagatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BreitWigner => "breit-wigner",
            Self::PtPair => "pt-pair",
        })
    }
}

/// `1 / (E - E0 + i gamma)`.
pub fn bw_propagator(e: f64, p: &ResonanceParams) -> C64 {
    let value = C64::new(1.0, 0.0) / C64::new(e - p.e0, p.gamma);
    debug_assert!((value - bw_propagator_rationalized(e, p)).norm() <= 4.0 * f64::EPSILON * value.norm());
    value
}

/// `(E - E0 - i gamma) / ((E - E0)^2 + gamma^2)`.
pub fn bw_propagator_rationalized(e: f64, p: &ResonanceParams) -> C64 {
    let x = e - p.e0;
    C64::new(x, -p.gamma) / (x * x + p.gamma * p.gamma)
}

/// The PT propagator as `(two-pole sum, closed form)`:
/// `1/(E - (E0 - i gamma)) - 1/(E - (E0 + i gamma))` and
/// `-2i gamma / ((E - E0)^2 + gamma^2)`.
pub fn pt_propagator_forms(e: f64, p: &ResonanceParams) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    let lower = C64::new(p.e0, -p.gamma);
    let upper = C64::new(p.e0, p.gamma);
    let e = C64::new(e, 0.0);
    let sum = one / (e - lower) - one / (e - upper);
    let x = e.re - p.e0;
    let closed = C64::new(0.0, -2.0 * p.gamma / (x * x + p.gamma * p.gamma));
    (sum, closed)
}

pub fn pt_propagator(e: f64, p: &ResonanceParams) -> C64 {
    let (sum, closed) = pt_propagator_forms(e, p);
    debug_assert!((sum - closed).norm() <= 1e-13 * closed.norm());
    sum
}

pub fn propagator(kind: PropagatorKind, e: f64, p: &ResonanceParams) -> C64 {
    match kind {
        PropagatorKind::BreitWigner => bw_propagator(e, p),
        PropagatorKind::PtPair => pt_propagator(e, p),
    }
}

/// Scattering phase shift, continuous in `E` with `delta(-inf) = 0`.
///
/// Delay: rises through `pi/2` at `E0` towards `pi`. Advance: the mirror
/// image, falling through `-pi/2`.
pub fn phase_shift(e: f64, p: &ResonanceParams, branch: Branch) -> f64 {
    // atan2(gamma, E0 - E) stays inside (0, pi) for gamma > 0, so no branch jumps.
    branch.sign() * p.gamma.atan2(p.e0 - e)
}

/// Scattering amplitude `exp(i delta) sin(delta)` with unit normalization.
pub fn scattering_amplitude(e: f64, p: &ResonanceParams, branch: Branch) -> C64 {
    let d = phase_shift(e, p, branch);
    C64::from_polar(d.sin(), d)
}

/// `d delta / dE = +- gamma / ((E - E0)^2 + gamma^2)`.
pub fn time_delay(e: f64, p: &ResonanceParams, branch: Branch) -> f64 {
    let x = e - p.e0;
    branch.sign() * p.gamma / (x * x + p.gamma * p.gamma)
}

/// Centered difference of [`phase_shift`] with step `1e-6 gamma`.
pub fn time_delay_finite_difference(e: f64, p: &ResonanceParams, branch: Branch) -> f64 {
    let h = 1e-6 * p.gamma;
    (phase_shift(e + h, p, branch) - phase_shift(e - h, p, branch)) / (2.0 * h)
}

/// Which half-plane closure a pole's residue contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    /// Picked up when closing below, i.e. for `t > 0`.
    #[serde(rename = "lower-contour")]
    Lower,
    /// Picked up when closing above, i.e. for `t < 0`.
    #[serde(rename = "upper-contour")]
    Upper,
}

/// `D(E) = sum_k r_k / (E - p_k)` with per-pole contour membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorModel {
    #[serde(
        serialize_with = "crate::serde_util::complex_vec",
        deserialize_with = "crate::serde_util::de_complex_vec"
    )]
    poles: Vec<C64>,
    #[serde(
        serialize_with = "crate::serde_util::complex_vec",
        deserialize_with = "crate::serde_util::de_complex_vec"
    )]
    residues: Vec<C64>,
    closure: Vec<Closure>,
}

impl PropagatorModel {
    pub fn new(poles: Vec<C64>, residues: Vec<C64>, closure: Vec<Closure>) -> Result<Self> {
        if poles.len() != residues.len() || poles.len() != closure.len() {
            return Err(Error::InvalidParameter(format!(
                "{} poles, {} residues, {} closure flags",
                poles.len(),
                residues.len(),
                closure.len()
            )));
        }
        for (i, a) in poles.iter().enumerate() {
            if poles[..i].contains(a) {
                return Err(Error::InvalidParameter(format!("repeated pole {a}")));
            }
        }
        Ok(Self {
            poles,
            residues,
            closure,
        })
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn residues(&self) -> &[C64] {
        &self.residues
    }

    pub fn closure(&self) -> &[Closure] {
        &self.closure
    }

    /// `sum_k r_k / (E - p_k)` at complex `E`.
    pub fn evaluate(&self, e: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&p, &r)| r / (e - p))
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization is infallible")
    }
}

/// Breit-Wigner: one pole `E0 - i gamma`. PT pair: poles `E0 -+ i gamma`
/// with residues `+-1`, both on the lower contour.
pub fn build_model(kind: PropagatorKind, p: &ResonanceParams) -> PropagatorModel {
    let lower = C64::new(p.e0, -p.gamma);
    let upper = C64::new(p.e0, p.gamma);
    let one = C64::new(1.0, 0.0);
    let (poles, residues, closure) = match kind {
        PropagatorKind::BreitWigner => (vec![lower], vec![one], vec![Closure::Lower]),
        PropagatorKind::PtPair => (
            vec![lower, upper],
            vec![one, -one],
            vec![Closure::Lower, Closure::Lower],
        ),
    };
    PropagatorModel::new(poles, residues, closure).expect("poles are distinct")
}

/// Residue evaluation of `(1/2pi) int dE exp(-iEt) D(E)`.
///
/// `t >= 0`: `sum over lower-contour poles of -i r_k exp(-i p_k t)`.
/// `t < 0`: `sum over upper-contour poles of +i r_k exp(-i p_k t)`.
pub fn inverse_ft(model: &PropagatorModel, t: f64) -> Result<C64> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be finite, got {t}")));
    }
    let (wanted, factor) = if t >= 0.0 {
        (Closure::Lower, C64::new(0.0, -1.0))
    } else {
        (Closure::Upper, C64::new(0.0, 1.0))
    };
    let mut total = C64::new(0.0, 0.0);
    for ((&p, &r), &c) in model.poles.iter().zip(&model.residues).zip(&model.closure) {
        if c != wanted {
            continue;
        }
        let exponent = p.im * t;
        if exponent > EXPONENT_LIMIT {
            return Err(Error::Overflow {
                exponent,
                limit: EXPONENT_LIMIT,
            });
        }
        total += factor * r * (C64::new(0.0, -t) * p).exp();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: C64,
    /// Size of the neglected tails beyond `E0 +- L`.
    pub tail_bound: f64,
}

const GAUSS_ORDER: usize = 8;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre evaluation of the Breit-Wigner transform over
/// `[E0 - L, E0 + L]` with `panels` panels.
pub fn quadrature_ift(p: &ResonanceParams, t: f64, half_width: f64, panels: usize) -> Result<QuadratureEstimate> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "truncation half-width must be positive, got {half_width}"
        )));
    }
    if panels == 0 {
        return Err(Error::InvalidParameter("panel count must be positive".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be finite, got {t}")));
    }
    let (nodes, weights) = gauss_legendre(GAUSS_ORDER);
    let h = 2.0 * half_width / panels as f64;
    let gamma = C64::new(0.0, p.gamma);
    // Integrate in x = E - E0 and restore exp(-i E0 t) at the end.
    let mut total = C64::new(0.0, 0.0);
    for k in 0..panels {
        let center = -half_width + (k as f64 + 0.5) * h;
        let mut panel = C64::new(0.0, 0.0);
        for (&xi, &wi) in nodes.iter().zip(&weights) {
            let x = center + 0.5 * h * xi;
            panel += C64::from_polar(wi, -x * t) / (x + gamma);
        }
        total += panel * (0.5 * h);
    }
    let value = total * C64::from_polar(1.0, -p.e0 * t) / (2.0 * PI);
    let tail_bound = if t == 0.0 {
        p.gamma / (PI * half_width)
    } else {
        1.0 / (PI * half_width * t.abs())
    };
    Ok(QuadratureEstimate { value, tail_bound })
}

/// Energy-domain curves on a grid.
#[derive(Debug, Clone)]
pub struct ResponseCurve {
    pub kind: PropagatorKind,
    pub energies: Vec<f64>,
    pub propagator: Vec<C64>,
    pub phase_delay: Vec<f64>,
    pub phase_advance: Vec<f64>,
    pub delay: Vec<f64>,
    pub advance: Vec<f64>,
}

pub fn response_curve(kind: PropagatorKind, p: &ResonanceParams, energies: &[f64]) -> Result<ResponseCurve> {
    crate::evolution::validate_times(energies)?;
    let map = |f: &dyn Fn(f64) -> f64| energies.iter().map(|&e| f(e)).collect::<Vec<_>>();
    Ok(ResponseCurve {
        kind,
        energies: energies.to_vec(),
        propagator: energies.iter().map(|&e| propagator(kind, e, p)).collect(),
        phase_delay: map(&|e| phase_shift(e, p, Branch::Delay)),
        phase_advance: map(&|e| phase_shift(e, p, Branch::Advance)),
        delay: map(&|e| time_delay(e, p, Branch::Delay)),
        advance: map(&|e| time_delay(e, p, Branch::Advance)),
    })
}

impl ResponseCurve {
    /// Columns `E, re_D, im_D, delta_delay, delta_advance, dT_delay, dT_advance`.
    pub fn to_csv(&self) -> String {
        let mut table = Table::new(&[
            "E",
            "re_D",
            "im_D",
            "delta_delay",
            "delta_advance",
            "dT_delay",
            "dT_advance",
        ]);
        for i in 0..self.energies.len() {
            table.row(&[
                num(self.energies[i]),
                num(self.propagator[i].re),
                num(self.propagator[i].im),
                num(self.phase_delay[i]),
                num(self.phase_advance[i]),
                num(self.delay[i]),
                num(self.advance[i]),
            ]);
        }
        table.finish()
    }
}

/// `D(t)` by residues on a time grid.
pub fn time_response(model: &PropagatorModel, times: &[f64]) -> Result<Vec<C64>> {
    times.iter().map(|&t| inverse_ft(model, t)).collect()
}

/// Columns `t, re_D, im_D`.
pub fn time_response_csv(times: &[f64], values: &[C64]) -> String {
    let mut table = Table::new(&["t", "re_D", "im_D"]);
    for (&t, z) in times.iter().zip(values) {
        table.row(&[num(t), num(z.re), num(z.im)]);
    }
    table.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ResonanceParams {
        ResonanceParams::new(1.0, 0.8).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ResonanceParams::new(1.0, 0.0).is_err());
        assert!(ResonanceParams::new(1.0, -1.0).is_err());
        assert!(ResonanceParams::new(f64::NAN, 1.0).is_err());
        assert_eq!(params().default_energy_grid().len(), 2001);
    }

    #[test]
    fn bw_values() {
        let p = params();
        let at_peak = bw_propagator(p.e0, &p);
        assert!((at_peak - C64::new(0.0, -1.0 / p.gamma)).norm() < 1e-15);
        // 1 / (gamma + i gamma) = (1 - i) / (2 gamma)
        let off = bw_propagator(p.e0 + p.gamma, &p);
        assert!((off - C64::new(1.0, -1.0) / (2.0 * p.gamma)).norm() < 1e-15);
        for e in [p.e0 + 1e6 * p.gamma, p.e0 - 1e6 * p.gamma] {
            assert!(bw_propagator(e, &p).norm() <= 1.0000001e-6 / p.gamma);
        }
    }

    #[test]
    fn pt_values() {
        let p = params();
        let at_peak = pt_propagator(p.e0, &p);
        assert!((at_peak - C64::new(0.0, -2.0 / p.gamma)).norm() < 1e-15);
        assert!((at_peak.im - 2.0 * bw_propagator(p.e0, &p).im).abs() < 1e-15);
        for e in [-50.0, -1.0, 0.3, 1.0, 7.0, 1e4] {
            let d = pt_propagator(e, &p);
            assert!(d.re.abs() <= 1e-15 * d.norm());
            assert!(d.im < 0.0);
        }
    }

    #[test]
    fn phase_shift_values() {
        let p = params();
        assert_eq!(phase_shift(p.e0, &p, Branch::Delay), PI / 2.0);
        assert_eq!(phase_shift(p.e0, &p, Branch::Advance), -PI / 2.0);
        let far = phase_shift(p.e0 - 1e9, &p, Branch::Delay);
        assert!(far > 0.0 && far < 1e-8);
        let high = phase_shift(p.e0 + 1e9, &p, Branch::Delay);
        assert!((high - PI).abs() < 1e-8);
    }

    #[test]
    fn phase_shift_is_monotone() {
        let p = params();
        let grid = p.default_energy_grid();
        let d: Vec<f64> = grid.iter().map(|&e| phase_shift(e, &p, Branch::Delay)).collect();
        let a: Vec<f64> = grid.iter().map(|&e| phase_shift(e, &p, Branch::Advance)).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]));
        assert!(a.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn amplitude_matches_pole_forms() {
        // exp(i delta) sin delta = gamma / (E0 - i gamma - E) (delay),
        //                        = -gamma / (E0 + i gamma - E) (advance)
        let p = params();
        for e in [-3.0, 0.2, 1.0, 1.7, 9.0] {
            let delay = scattering_amplitude(e, &p, Branch::Delay);
            let expect = C64::new(p.gamma, 0.0) / C64::new(p.e0 - e, -p.gamma);
            assert!((delay - expect).norm() < 1e-15);
            let adv = scattering_amplitude(e, &p, Branch::Advance);
            let expect = -C64::new(p.gamma, 0.0) / C64::new(p.e0 - e, p.gamma);
            assert!((adv - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn time_delay_values() {
        let p = params();
        assert!((time_delay(p.e0, &p, Branch::Delay) - 1.0 / p.gamma).abs() < 1e-15);
        assert!((time_delay(p.e0, &p, Branch::Advance) + 1.0 / p.gamma).abs() < 1e-15);
        for e in [p.e0 - p.gamma, p.e0 + p.gamma] {
            assert!((time_delay(e, &p, Branch::Delay) - 0.5 / p.gamma).abs() < 1e-15);
        }
        let fd = time_delay_finite_difference(p.e0 + 3.0, &p, Branch::Advance);
        let exact = time_delay(p.e0 + 3.0, &p, Branch::Advance);
        assert!(((fd - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn models() {
        let p = params();
        let bw = build_model(PropagatorKind::BreitWigner, &p);
        assert_eq!(bw.poles(), &[C64::new(1.0, -0.8)]);
        assert_eq!(bw.residues(), &[C64::new(1.0, 0.0)]);
        assert_eq!(bw.closure(), &[Closure::Lower]);
        let pt = build_model(PropagatorKind::PtPair, &p);
        assert_eq!(pt.poles(), &[C64::new(1.0, -0.8), C64::new(1.0, 0.8)]);
        assert_eq!(pt.residues(), &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        assert_eq!(pt.closure(), &[Closure::Lower, Closure::Lower]);

        let zero = C64::new(0.0, 0.0);
        assert!((bw.evaluate(zero) - bw_propagator(0.0, &p)).norm() < 1e-15);
        assert!((pt.evaluate(zero) - pt_propagator_forms(0.0, &p).1).norm() < 1e-15);
    }

    #[test]
    fn model_validation_and_json() {
        let one = C64::new(1.0, 0.0);
        assert!(PropagatorModel::new(vec![one, one], vec![one, one], vec![Closure::Lower; 2]).is_err());
        assert!(PropagatorModel::new(vec![one], vec![], vec![Closure::Lower]).is_err());
        let pt = build_model(PropagatorKind::PtPair, &params());
        let json = pt.to_json();
        assert!(json.contains("\"lower-contour\""));
        let back: PropagatorModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pt);
    }

    #[test]
    fn inverse_transform_closed_forms() {
        let p = params();
        let bw = build_model(PropagatorKind::BreitWigner, &p);
        let pt = build_model(PropagatorKind::PtPair, &p);
        for t in [0.1, 1.0, 3.5] {
            let decay = C64::new(-p.gamma * t, -p.e0 * t).exp();
            let grow = C64::new(p.gamma * t, -p.e0 * t).exp();
            let i = C64::new(0.0, 1.0);
            assert!((inverse_ft(&bw, t).unwrap() + i * decay).norm() < 1e-15);
            assert!((inverse_ft(&pt, t).unwrap() + i * (decay - grow)).norm() < 1e-13);
        }
        assert_eq!(inverse_ft(&bw, -1.0).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(inverse_ft(&pt, -1.0).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(inverse_ft(&pt, 0.0).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(inverse_ft(&bw, 0.0).unwrap(), C64::new(0.0, -1.0));
    }

    #[test]
    fn upper_contour_pole_contributes_for_negative_time() {
        let pole = C64::new(2.0, 0.5);
        let m = PropagatorModel::new(vec![pole], vec![C64::new(1.0, 0.0)], vec![Closure::Upper]).unwrap();
        assert_eq!(inverse_ft(&m, 1.0).unwrap(), C64::new(0.0, 0.0));
        let t = -2.0;
        let expected = C64::new(0.0, 1.0) * (C64::new(0.0, -t) * pole).exp();
        assert!((inverse_ft(&m, t).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn inverse_transform_overflow_guard() {
        let pt = build_model(PropagatorKind::PtPair, &params());
        assert!(inverse_ft(&pt, 370.0).is_ok());
        assert!(matches!(inverse_ft(&pt, 380.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn gauss_legendre_is_exact_for_low_degree() {
        let (x, w) = gauss_legendre(GAUSS_ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..(2 * GAUSS_ORDER) {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn quadrature_argument_checks() {
        let p = params();
        assert!(quadrature_ift(&p, 1.0, 0.0, 10).is_err());
        assert!(quadrature_ift(&p, 1.0, 10.0, 0).is_err());
        assert!(quadrature_ift(&p, f64::NAN, 10.0, 10).is_err());
    }

    #[test]
    fn tail_bound_scales_inversely_with_width() {
        let p = params();
        let a = quadrature_ift(&p, 0.5, 100.0, 1000).unwrap();
        let b = quadrature_ift(&p, 0.5, 200.0, 2000).unwrap();
        assert!((a.tail_bound / b.tail_bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn curve_csv() {
        let p = params();
        let curve = response_curve(PropagatorKind::PtPair, &p, &[0.0, 1.0, 2.0]).unwrap();
        let csv = curve.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "E,re_D,im_D,delta_delay,delta_advance,dT_delay,dT_advance");
        let peak: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
        assert!((peak[6] + 1.0 / 0.8).abs() < 1e-15);
        assert!(response_curve(PropagatorKind::PtPair, &p, &[1.0, 0.0]).is_err());
    }
}
