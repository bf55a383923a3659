//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pt_resonance::evolution::{evolve, pseudounitarity_residual, unitarity_residual};
use pt_resonance::grid::linspace;
use pt_resonance::linalg::{eig, eigenvalues, solve_intertwiner, ComplexMatrix, C64, DEFAULT_NULL_TOL, DEFAULT_TOL};
use pt_resonance::metric::{build_metric, closure_check, v_inner, verify_pseudo_hermiticity, DualPair, MetricPolicy};
use pt_resonance::odes::{canonical_initial, integrate, pt_wave_equation, wave_equation, EquationKind, SecondOrderIvp};
use pt_resonance::response::{
    build_model, inverse_ft, pt_propagator_forms, quadrature_ift, time_delay, time_delay_finite_difference,
    Branch, PropagatorKind, ResonanceParams,
};
use pt_resonance::symmetry::classify_spectrum;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Largest relative error over the two possible pairings of two-element lists.
fn pair_error(got: &[C64], want: &[C64], scale: f64) -> f64 {
    let direct = (got[0] - want[0]).norm().max((got[1] - want[1]).norm());
    let swapped = (got[0] - want[1]).norm().max((got[1] - want[0]).norm());
    direct.min(swapped) / scale
}

fn m(s: f64) -> ComplexMatrix {
    ComplexMatrix::two_level(s).unwrap()
}

fn eigenvalue_reproduction() -> Outcome {
    let mut worst = 0.0_f64;
    for s in [1.25, 1.5, 2.0] {
        let r = (s * s - 1.0_f64).sqrt();
        let want = [c(1.0 + r, 0.0), c(1.0 - r, 0.0)];
        let got = eigenvalues(&m(s)).map_err(|e| e.to_string())?;
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(pair_error(&got, &want, scale));
    }
    for s in [0.3, 0.6, 0.9] {
        let r = (1.0f64 - s * s).sqrt();
        let want = [c(1.0, r), c(1.0, -r)];
        let got = eigenvalues(&m(s)).map_err(|e| e.to_string())?;
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(pair_error(&got, &want, scale));
    }
    ensure(worst <= 1e-12, format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn fixed_gauge_metric() -> Outcome {
    let gamma = 0.8;
    let h = ComplexMatrix::conjugate_pair(1.0, gamma).unwrap();
    let sys = eig(&h, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let space = solve_intertwiner(&h, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
    let metric = build_metric(&sys, &space, MetricPolicy::PaperGauge).map_err(|e| e.to_string())?;
    let expected = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    ensure(*metric.matrix().matrix() == expected, "V differs from [[0,-1],[1,0]]")?;
    let ph = verify_pseudo_hermiticity(&h, metric.matrix()).map_err(|e| e.to_string())?;
    ensure(ph.intertwining <= 1e-15, format!("intertwining residual {:e}", ph.intertwining))?;
    ensure(ph.similarity <= 1e-15, format!("similarity residual {:e}", ph.similarity))?;
    Ok(format!("V exact, residuals {:.1e}/{:.1e}", ph.intertwining, ph.similarity))
}

fn inner_product_table() -> Outcome {
    let v = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(-1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
    let up = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let um = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
    let ip = |x: &DVector<C64>, y: &DVector<C64>| v_inner(x, y, &v).unwrap();
    let values = [
        ("u+ V u+", ip(&up, &up), c(0.0, 0.0)),
        ("u- V u-", ip(&um, &um), c(0.0, 0.0)),
        ("u- V u+", ip(&um, &up), c(1.0, 0.0)),
        ("u+ V u-", ip(&up, &um), c(-1.0, 0.0)),
    ];
    for (name, got, want) in values {
        ensure(got == want, format!("{name} = {got}, expected {want}"))?;
    }
    let plus = DualPair::new(up.clone(), &v).unwrap();
    let minus = DualPair::new(um.clone(), &v).unwrap();
    ensure(plus.bra.iter().copied().eq([c(0.0, 0.0), c(-1.0, 0.0)]), "bra u+ V != (0, -1)")?;
    ensure(minus.bra.iter().copied().eq([c(1.0, 0.0), c(0.0, 0.0)]), "bra u- V != (1, 0)")?;
    // u+ u-^dagger V - u- u+^dagger V = I
    let explicit = &up * &minus.bra - &um * &plus.bra;
    ensure(explicit == DMatrix::identity(2, 2), "explicit closure differs from I")?;
    let report = closure_check(&[plus, minus]).map_err(|e| e.to_string())?;
    ensure(report.residual == 0.0, format!("closure residual {:e}", report.residual))?;
    Ok("six values and closure exact".into())
}

fn constructed_metric(h: &ComplexMatrix) -> Result<ComplexMatrix, String> {
    let sys = eig(h, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let space = solve_intertwiner(h, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
    let metric = build_metric(&sys, &space, MetricPolicy::HermitianRepresentative).map_err(|e| e.to_string())?;
    Ok(metric.matrix().clone())
}

fn pseudounitarity() -> Outcome {
    let h = m(0.6);
    let v = constructed_metric(&h)?;
    let times = linspace(0.0, 5.0, 201).unwrap();
    let curve = pseudounitarity_residual(&h, &v, &times).map_err(|e| e.to_string())?;
    let defect = unitarity_residual(&h, 1.0).map_err(|e| e.to_string())?;
    ensure(curve.max() <= 1e-10, format!("pseudounitarity residual {:e}", curve.max()))?;
    ensure(defect >= 0.1, format!("unitarity defect at t=1 only {defect:e}"))?;
    Ok(format!("max residual {:.1e}, |U^dagger U - I|(1) = {defect:.3}", curve.max()))
}

fn v_norm_conservation() -> Outcome {
    let h = m(0.6);
    let v = constructed_metric(&h)?;
    let times = linspace(0.0, 5.0, 5001).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let psi0 = DVector::from_fn(2, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let traj = evolve(&h, &psi0, &times, Some(&v)).map_err(|e| e.to_string())?;
        worst = worst.max(traj.max_v_norm_rate().expect("metric supplied"));
    }
    ensure(worst <= 1e-8, format!("max drift rate {worst:e}"))?;
    Ok(format!("max drift rate {worst:.1e} over 20 states"))
}

fn propagator_identity() -> Outcome {
    let p = ResonanceParams::new(1.0, 0.8).unwrap();
    let grid = linspace(p.e0 - 100.0 * p.gamma, p.e0 + 100.0 * p.gamma, 10_000).unwrap();
    let mut worst = 0.0_f64;
    for e in grid {
        let (sum, _) = pt_propagator_forms(e, &p);
        let x = e - p.e0;
        let oracle = c(0.0, -2.0 * p.gamma / (x * x + p.gamma * p.gamma));
        worst = worst.max((sum - oracle).norm() / oracle.norm());
    }
    ensure(worst <= 1e-13, format!("max relative difference {worst:e}"))?;
    Ok(format!("max relative difference {worst:.1e}"))
}

fn delay_and_advance() -> Outcome {
    let p = ResonanceParams::new(1.0, 0.8).unwrap();
    let peak_delay = time_delay(p.e0, &p, Branch::Delay);
    let peak_adv = time_delay(p.e0, &p, Branch::Advance);
    ensure((peak_delay - 1.0 / p.gamma).abs() <= 1e-12, format!("delay at E0 = {peak_delay}"))?;
    ensure((peak_adv + 1.0 / p.gamma).abs() <= 1e-12, format!("advance at E0 = {peak_adv}"))?;
    let mut worst = 0.0_f64;
    for e in p.default_energy_grid() {
        for branch in [Branch::Delay, Branch::Advance] {
            let exact = time_delay(e, &p, branch);
            let fd = time_delay_finite_difference(e, &p, branch);
            worst = worst.max(((fd - exact) / exact).abs());
        }
        let (d, a) = (time_delay(e, &p, Branch::Delay), time_delay(e, &p, Branch::Advance));
        ensure(d == -a, format!("antisymmetry broken at E = {e}"))?;
    }
    ensure(worst <= 1e-6, format!("finite-difference relative error {worst:e}"))?;
    Ok(format!("peaks exact to 1e-12, finite-difference error {worst:.1e}"))
}

fn residue_transform() -> Outcome {
    let p = ResonanceParams::new(1.0, 0.8).unwrap();
    let model = build_model(PropagatorKind::BreitWigner, &p);
    let (half_width, panels) = (1e4 * p.gamma, 200_000);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for t in [0.5, 1.0, 2.0] {
        let q = quadrature_ift(&p, t, half_width, panels).map_err(|e| e.to_string())?;
        let r = inverse_ft(&model, t).map_err(|e| e.to_string())?;
        worst = worst.max((q.value - r).norm());
    }
    let negative = quadrature_ift(&p, -1.0, half_width, panels).map_err(|e| e.to_string())?.value.norm();
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-4, format!("max |quadrature - residue| {worst:e}"))?;
    ensure(negative <= 1e-4, format!("|quadrature(t=-1)| = {negative:e}"))?;
    ensure(elapsed < 10.0, format!("took {elapsed:.1} s"))?;
    Ok(format!("max |delta| {worst:.1e}, |D(-1)| {negative:.1e}, {elapsed:.2} s"))
}

fn ode_cross_check() -> Outcome {
    let p = ResonanceParams::new(1.0, 0.8).unwrap();
    let model = build_model(PropagatorKind::PtPair, &p);
    // D'(0+) from the residue sum: sum_k (-i r_k)(-i p_k).
    let slope: C64 = model
        .poles()
        .iter()
        .zip(model.residues())
        .map(|(&pole, &r)| -r * pole)
        .sum();
    let (psi0, dpsi0) = canonical_initial(EquationKind::Pt, &p);
    let times = linspace(0.0, 5.0, 501).unwrap();
    let ivp = SecondOrderIvp {
        equation: pt_wave_equation(&p),
        psi0,
        dpsi0,
        times: times.clone(),
        step: 1e-3,
    };
    let series = integrate(&ivp).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for (&t, &psi) in times.iter().zip(&series.psi).skip(1) {
        let d = inverse_ft(&model, t).map_err(|e| e.to_string())?;
        worst = worst.max((psi * (slope / dpsi0) - d).norm());
    }
    ensure(worst <= 1e-6, format!("max |psi - D_PT| {worst:e}"))?;

    // Halving the step: both equations against their closed forms.
    let coarse_grid = linspace(0.0, 5.0, 26).unwrap();
    let mut ratios = Vec::new();
    for kind in [EquationKind::Pt, EquationKind::Damped] {
        let eq = wave_equation(kind, &p);
        let (a, b) = canonical_initial(kind, &p);
        let r = eq.roots();
        // Closed form: psi = alpha exp(r0 t) + beta exp(r1 t) fitted to (a, b).
        let beta = (b - r[0] * a) / (r[1] - r[0]);
        let alpha = a - beta;
        let exact = |t: f64| alpha * (r[0] * t).exp() + beta * (r[1] * t).exp();
        let mut errors = Vec::new();
        for step in [0.05, 0.025] {
            let ivp = SecondOrderIvp {
                equation: eq,
                psi0: a,
                dpsi0: b,
                times: coarse_grid.clone(),
                step,
            };
            errors.push(integrate(&ivp).map_err(|e| e.to_string())?.max_error(exact));
        }
        ratios.push(errors[0] / errors[1]);
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(min_ratio >= 14.0, format!("convergence factors {ratios:?}"))?;
    Ok(format!("max |delta| {worst:.1e}, convergence factors {:.1}/{:.1}", ratios[0], ratios[1]))
}

fn exceptional_point() -> Outcome {
    let h = m(1.0);
    let sys = eig(&h, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure(sys.is_defective(), "M(1) not flagged defective")?;
    let space = solve_intertwiner(&h, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
    let refused = build_metric(&sys, &space, MetricPolicy::HermitianRepresentative);
    ensure(refused.is_err(), "metric construction accepted M(1)")?;

    let bin = env!("CARGO_BIN_EXE_ptr");
    let classify = Command::new(bin).args(["classify", "--s", "1"]).output().map_err(|e| e.to_string())?;
    ensure(classify.status.code() == Some(3), format!("classify exit {:?}", classify.status.code()))?;
    let metric = Command::new(bin).args(["metric", "--s", "1"]).output().map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&metric.stderr);
    ensure(metric.status.code() == Some(3), format!("metric exit {:?}", metric.status.code()))?;
    ensure(stderr.contains("defective"), format!("no diagnostic: {stderr}"))?;
    ensure(metric.stdout.is_empty(), "metric wrote output for M(1)")?;
    Ok("defective, classify exit 3, metric refused".into())
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Real symmetric orthogonal involution `Q diag(+-1) Q^T`.
fn random_parity(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let signs = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| if i == 0 || rng.random_bool(0.5) { 1.0 } else { -1.0 }));
    &q * signs * q.transpose()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let entries: Vec<C64> = (0..4).map(|_| random_complex(&mut rng)).collect();
        let h = ComplexMatrix::new(DMatrix::from_row_slice(2, 2, &entries)).unwrap();
        let (a, b, cc, d) = (entries[0], entries[1], entries[2], entries[3]);
        let tr = a + d;
        let disc = (tr * tr - (a * d - b * cc) * 4.0).sqrt();
        let want = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        let got = eigenvalues(&h).map_err(|e| e.to_string())?;
        let scale = want.iter().map(|z| z.norm()).fold(h.norm(), f64::max);
        worst = worst.max(pair_error(&got, &want, scale));
    }
    ensure(worst <= 1e-12, format!("2x2 max relative error {worst:e}"))?;

    let mut unmatched = 0;
    for k in 0..200 {
        let n = 2 + k % 5;
        let p = random_parity(&mut rng, n).map(|x| c(x, 0.0));
        let a = DMatrix::from_fn(n, n, |_, _| random_complex(&mut rng));
        // P conj(H) P^-1 = H with P^-1 = P.
        let h = (&a + &p * a.map(|z| z.conj()) * &p) / c(2.0, 0.0);
        let h = ComplexMatrix::new(h).unwrap();
        let report = classify_spectrum(&eigenvalues(&h).map_err(|e| e.to_string())?, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        unmatched += report.unmatched.len();
    }
    ensure(unmatched == 0, format!("{unmatched} unmatched eigenvalues over 200 PT matrices"))?;
    Ok(format!("2x2 max relative error {worst:.1e}; 200 PT matrices fully paired"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("eigenvalue reproduction", eigenvalue_reproduction),
        ("fixed-gauge metric", fixed_gauge_metric),
        ("inner-product table", inner_product_table),
        ("pseudounitarity", pseudounitarity),
        ("V-norm conservation", v_norm_conservation),
        ("propagator identity", propagator_identity),
        ("time delay and advance", delay_and_advance),
        ("residue inverse transform", residue_transform),
        ("ODE cross-check", ode_cross_check),
        ("exceptional point", exceptional_point),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
