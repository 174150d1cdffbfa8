mod common;

use std::f64::consts::{PI, TAU};

use boussinesq_core::config::RunConfig;
use boussinesq_core::duhamel::{graded_times, uniform_times, Timeline};
use boussinesq_core::exponents::Regime;
use boussinesq_core::field::{divergence, gradient, Grid, PhysicalField, Shape, SpectralField};
use boussinesq_core::harmonic::{heat_propagate, leray_project};
use boussinesq_core::solver::*;
use common::*;
use proptest::prelude::*;

fn sine_theta(n: usize) -> SpectralField<f64> {
    PhysicalField::scalar_fn(&grid(2, n), |x| x[0].sin()).to_spectral()
}

#[test]
fn viscosity_laws() {
    let t = ViscosityLaw::tanh(0.1).unwrap();
    assert!((t.eval(1.0) - (1.0 + 0.1 * 1f64.tanh())).abs() < 1e-15);
    assert_eq!((t.deviation(), t.nu_min()), (0.1, 0.9));
    assert!(ViscosityLaw::tanh(1.0).is_err());
    let table = ViscosityLaw::UserTable { theta: vec![-1.0, 0.0, 1.0], nu: vec![0.98, 1.0, 1.03] };
    table.validate().unwrap();
    assert!((table.eval(0.5) - 1.015).abs() < 1e-15);
    assert!((table.eval(-0.25) - 0.995).abs() < 1e-15);
    assert_eq!(table.eval(-7.0), 0.98);
    assert_eq!(table.eval(7.0), 1.03);
    assert!((table.deviation() - 0.03).abs() < 1e-15);
    assert!(ViscosityLaw::UserTable { theta: vec![0.0, 0.0], nu: vec![1.0, 1.0] }.validate().is_err());
    assert!(ViscosityLaw::UserTable { theta: vec![0.0, 1.0], nu: vec![1.0, -1.0] }.validate().is_err());
    assert!(ViscosityLaw::Constant.is_constant());
    let m = ViscosityLaw::Constant.minus_one(&sine_theta(16)).unwrap();
    assert_eq!(m.lp_norm(2.0).unwrap(), 0.0);
}

#[test]
fn smallness_examples() {
    for regime in [Regime::Theorem1, Regime::Theorem2] {
        let e = eta_value(0.01, 0.02, 1.0, 1.0, 2.0, regime);
        assert!((e - 0.03 * std::f64::consts::E).abs() < 1e-15);
        assert!((e - 0.081548).abs() < 1e-6);
    }
    let g = grid(2, 32);
    let v = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 1 { 0.3 * x[0].sin() } else { 0.0 }).to_spectral();
    let data = InitialData::from_prepared(sine_theta(32), v).unwrap();
    let rep = eta(&data, &ViscosityLaw::Constant, 1.2, 2.0, Regime::Theorem1, 1.0, 0.05).unwrap();
    assert_eq!(rep.eta, 0.0);
    assert!(rep.ud_besov > 0.0 && rep.below_threshold);
    let err = eta(&data, &ViscosityLaw::Constant, 1.5, 2.0, Regime::Theorem1, 1.0, 0.05).unwrap_err().to_string();
    assert!(err.contains("p < dr/(2r-1)"), "{err}");
}

#[test]
fn interface_truncation_is_gibbs_bounded() {
    let g = grid(2, 128);
    let raw = PhysicalField::scalar_fn(&g, |x| if x[0] < PI { -1.0 } else { 1.0 });
    let zero = SpectralField::zeros(&g, Shape::Vector);
    let data = prepare_data(&raw, &zero, 4, None).unwrap();
    assert_eq!(data.theta_raw_sup, 1.0);
    assert!(data.theta_sup <= 1.2, "{}", data.theta_sup);
    assert!(data.theta_sup > 0.9);
    assert!(prepare_data(&raw, &zero, 6, None).is_err());
    assert!(prepare_data(&raw, &zero, -1, None).is_err());
    assert!(prepare_data(&raw, &zero, 2, Some(0.0)).is_err());
    let cut = prepare_data(&raw, &zero, 2, Some(2.0)).unwrap();
    assert!(cut.theta_sup <= 1.2);
}

#[test]
fn truncation_preserves_band_limited_data() {
    let g = grid(2, 64);
    let u = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { x[1].sin() + 0.5 * (2.0 * x[1]).cos() } else { 0.3 * x[0].cos() })
        .to_spectral();
    let raw = PhysicalField::scalar_fn(&g, |x| x[0].sin());
    let data = prepare_data(&raw, &u, 3, None).unwrap();
    assert!(data.u0.sub(&u).unwrap().lp_norm(2.0).unwrap() < 1e-12);
    let one = prepare_data(&raw, &PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { x[1].sin() } else { 0.0 }).to_spectral(), 0, None)
        .unwrap();
    assert!(one.theta0.sub(&raw.to_spectral()).unwrap().lp_norm(2.0).unwrap() < 1e-12);
    assert!(one.u0.component(0).lp_norm(2.0).unwrap() > 1.0);
}

#[test]
fn transport_without_velocity() {
    let th = sine_theta(32);
    let times = graded_times(1.0, 16).unwrap();
    let u = Timeline::zeros(times.clone(), th.grid(), Shape::Vector).unwrap();
    let frozen = transport_step(&th, &u, 0.0).unwrap();
    for s in frozen.snapshots() {
        assert_eq!(s.coefficients(), th.coefficients());
    }
    let eps = 0.3;
    let diffused = transport_step(&th, &u, eps).unwrap();
    for (s, &t) in diffused.snapshots().iter().zip(&times) {
        assert!(s.sub(&th.scaled((-eps * t).exp())).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-8);
    }
    assert!(transport_step(&th, &u, -1.0).is_err());
}

#[test]
fn transport_conserves_mean_and_energy() {
    let g = grid(2, 64);
    let th = PhysicalField::scalar_fn(&g, |x| 0.2 + x[0].cos() * (x[1]).sin()).to_spectral();
    let u0 = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { 0.5 * x[1].sin() } else { 0.4 * x[0].cos() }).to_spectral();
    let u = Timeline::constant(graded_times(1.0, 16).unwrap(), &u0).unwrap();
    let (out, stats) = transport_step_with(&th, &u, 0.0, &TransportOptions::default()).unwrap();
    assert!(stats.substeps > 16);
    let m0 = th.mean(0);
    let e0 = th.lp_norm(2.0).unwrap();
    for s in out.snapshots() {
        assert!((s.mean(0) - m0).abs() < 1e-12);
        assert!((s.lp_norm(2.0).unwrap() / e0 - 1.0).abs() < 1e-3);
    }
    let bad = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { x[0].sin() } else { 0.0 }).to_spectral();
    let bad = Timeline::constant(graded_times(1.0, 4).unwrap(), &bad).unwrap();
    assert!(transport_step(&th, &bad, 0.0).is_err());
}

fn ctx() -> boussinesq_core::monitor::NormContext {
    SolverConfig::default().context(2).unwrap()
}

#[test]
fn stokes_zero_and_heat_flow() {
    let g = grid(2, 32);
    let times = graded_times(1.0, 16).unwrap();
    let zero_u = Timeline::zeros(times.clone(), &g, Shape::Vector).unwrap();
    let zero_t = Timeline::zeros(times.clone(), &g, Shape::Scalar).unwrap();
    let (u, pi) = linear_stokes_solve(&zero_u, &zero_t, &InitialData::zeros(&g), &ViscosityLaw::Constant, 1.0, &ctx()).unwrap();
    assert!(u.snapshots().iter().chain(pi.snapshots()).all(|s| s.lp_norm(2.0).unwrap() == 0.0));
    let v = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { (2.0 * x[1]).sin() } else { 0.0 }).to_spectral();
    let data = InitialData::from_prepared(SpectralField::zeros(&g, Shape::Scalar), v.clone()).unwrap();
    let (u, pi) = linear_stokes_solve(&zero_u, &zero_t, &data, &ViscosityLaw::Constant, 1.0, &ctx()).unwrap();
    for (s, &t) in u.snapshots().iter().zip(&times) {
        assert!(s.sub(&heat_propagate(&v, t).unwrap()).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-10);
    }
    assert!(pi.snapshots().iter().all(|s| s.lp_norm(2.0).unwrap() < 1e-14));
}

#[test]
fn pressure_of_a_gradient() {
    // g = ∇cos x₁ is pure gradient, so Π = cos x₁ under ∇Π = (I − P)g
    let g = grid(2, 32);
    let times = uniform_times(1.0, 2).unwrap();
    let phi = PhysicalField::scalar_fn(&g, |x| x[0].cos()).to_spectral();
    let gt = Timeline::constant(times.clone(), &gradient(&phi).unwrap()).unwrap();
    let th = Timeline::zeros(times.clone(), &g, Shape::Scalar).unwrap();
    let u = Timeline::zeros(times.clone(), &g, Shape::Vector).unwrap();
    let pi = recover_pressure(&gt, &th, &u, &ViscosityLaw::Constant).unwrap();
    assert!(pi.last().sub(&phi).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-13);
    let zero = recover_pressure(&th.map(|_| SpectralField::zeros(&g, Shape::Vector)).unwrap(), &th, &u, &ViscosityLaw::Constant).unwrap();
    assert_eq!(zero.last().lp_norm(2.0).unwrap(), 0.0);
}

#[test]
fn pressure_gradient_is_the_leray_complement() {
    let g = grid(2, 32);
    let times = uniform_times(1.0, 1).unwrap();
    let law = ViscosityLaw::tanh(0.3).unwrap();
    for seed in 0..4 {
        let gv = random_smooth(&g, Shape::Vector, seed);
        let th = random_smooth(&g, Shape::Scalar, seed + 10);
        let un = leray_project(&random_smooth(&g, Shape::Vector, seed + 20)).unwrap();
        let pi = recover_pressure(
            &Timeline::constant(times.clone(), &gv).unwrap(),
            &Timeline::constant(times.clone(), &th).unwrap(),
            &Timeline::constant(times.clone(), &un).unwrap(),
            &law,
        )
        .unwrap();
        let rhs = gv.add(&divergence(&viscous_stress(&un, &th, &law).unwrap()).unwrap()).unwrap().without_nyquist();
        let complement = rhs.sub(&leray_project(&rhs).unwrap()).unwrap();
        let grad = gradient(pi.last()).unwrap();
        let err = grad.sub(&complement).unwrap().lp_norm(2.0).unwrap();
        assert!(err <= 1e-8 * complement.lp_norm(2.0).unwrap(), "seed {seed}: {err}");
    }
}

fn quick(eps: f64) -> SolverConfig {
    SolverConfig { time: TimeSpec { horizon: 1.0, intervals: 8, graded: true }, ..theorem1(eps) }
}

#[test]
fn zero_data_gives_zero_solution() {
    let g = grid(2, 16);
    let run = picard_solve(&InitialData::zeros(&g), &ViscosityLaw::tanh(0.1).unwrap(), &quick(0.1)).unwrap();
    assert_eq!(run.history.status, RunStatus::Converged);
    assert_eq!(run.history.iterations, 1);
    let s = run.final_state();
    for tl in [&s.theta, &s.u, &s.pi] {
        assert!(tl.snapshots().iter().all(|f| f.coefficients().iter().all(|z| z.norm() == 0.0)));
    }
}

#[test]
fn small_data_contracts() {
    let data = shear_data(32, 0.001, 0.2, 0.3);
    let run = picard_solve(&data, &ViscosityLaw::tanh(0.02).unwrap(), &quick(0.1)).unwrap();
    let h = &run.history;
    assert_eq!(h.status, RunStatus::Converged);
    assert!(h.delta_u.last().unwrap() < &1e-7);
    assert!(h.ratios.iter().skip(1).all(|&r| r < 1.0), "{:?}", h.ratios);
    assert!(h.max_principle_ok && h.max_divergence <= 1e-8);
    assert!(h.inner_max_factor.iter().all(|&f| f < 0.5), "{:?}", h.inner_max_factor);
}

#[test]
fn sweep_determinism_and_validation() {
    let data = shear_data(16, 0.001, 0.2, 0.3);
    let law = ViscosityLaw::tanh(0.02).unwrap();
    let rep = epsilon_sweep(&data, &law, &quick(0.1), &[0.1, 0.1]).unwrap();
    assert_eq!(rep.u_differences, vec![0.0]);
    assert_eq!(rep.theta_differences, vec![0.0]);
    assert!(epsilon_sweep(&data, &law, &quick(0.1), &[0.1]).is_err());
    assert!(epsilon_sweep(&data, &law, &quick(0.1), &[0.01, 0.1]).is_err());
    assert!(epsilon_sweep(&data, &law, &quick(0.1), &[0.1, -0.1]).is_err());
}

#[test]
fn sweep_without_velocity_is_pure_diffusion() {
    let g = grid(2, 16);
    let th = sine_theta(16);
    let data = InitialData::from_prepared(th.clone(), SpectralField::zeros(&g, Shape::Vector)).unwrap();
    let cfg = quick(0.1);
    let eps = [0.2, 0.05, 0.0];
    let rep = epsilon_sweep(&data, &ViscosityLaw::tanh(0.02).unwrap(), &cfg, &eps).unwrap();
    let times = cfg.time.nodes().unwrap();
    let l2 = th.lp_norm(2.0).unwrap();
    for (k, w) in eps.windows(2).enumerate() {
        let oracle = times.iter().map(|&t| ((-w[0] * t).exp() - (-w[1] * t).exp()).abs()).fold(0.0, f64::max) * l2;
        assert!((rep.theta_differences[k] - oracle).abs() < 1e-8, "{} vs {oracle}", rep.theta_differences[k]);
    }
}

#[test]
fn single_precision_smoke() {
    let g = Grid::<f32>::new(2, 16, TAU as f32).unwrap();
    let u = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { 0.001 * x[1].sin() } else { 0.2 * x[0].sin() });
    let t = PhysicalField::scalar_fn(&g, |x| 0.3 * (x[0] + x[1]).cos());
    let data = InitialData::from_prepared(t.to_spectral().dealiased(), u.to_spectral().dealiased()).unwrap();
    let cfg = SolverConfig { tol_outer: 1e-4, ..quick(0.1) };
    let run = picard_solve(&data, &ViscosityLaw::tanh(0.02).unwrap(), &cfg).unwrap();
    assert_eq!(run.history.status, RunStatus::Converged);
    assert!(run.final_state().u.last().is_finite());
}

#[test]
fn three_dimensional_smoke() {
    let g = grid(3, 16);
    let u = PhysicalField::from_fn(&g, Shape::Vector, |x, c| match c {
        0 => 0.001 * x[2].sin(),
        1 => 0.001 * x[0].sin(),
        _ => 0.1 * x[1].sin(),
    });
    let t = PhysicalField::scalar_fn(&g, |x| 0.2 * x[0].cos());
    let data = InitialData::from_prepared(t.to_spectral().dealiased(), u.to_spectral().dealiased()).unwrap();
    let cfg = SolverConfig { p: 1.6, time: TimeSpec { horizon: 0.5, intervals: 4, graded: true }, ..theorem1(0.1) };
    let run = picard_solve(&data, &ViscosityLaw::tanh(0.02).unwrap(), &cfg).unwrap();
    assert_eq!(run.history.status, RunStatus::Converged);
    assert!(run.history.max_principle_ok);
}

#[test]
fn config_problems_are_aggregated() {
    let cfg = SolverConfig { p: 1.5, eps: -1.0, ..SolverConfig::default() };
    let probs = cfg.problems(2);
    assert!(probs.len() >= 2, "{probs:?}");
    assert!(cfg.validate(2).is_err());
    let mut rc = RunConfig::default();
    rc.solver.p = 1.5;
    assert!(!rc.problems().is_empty());
    assert!(RunConfig::from_json(r#"{"schema":"boussinesq-run/1","bogus":1}"#).is_err());
}

#[test]
fn lambda_recipe_value() {
    let k = LambdaConstants::default();
    let want = (4.0f64 * 0.05).powf(8.0) * (1.0 * 0.3 + 0.5f64).powf(4.0);
    assert!((lambda_recipe(0.3, 2.0, &k) - want).abs() < 1e-18);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn transport_keeps_mean_exactly(seed in any::<u64>()) {
        let g = grid(2, 16);
        let th = random_smooth(&g, Shape::Scalar, seed).add(&PhysicalField::scalar_fn(&g, |_| 0.7).to_spectral()).unwrap();
        let u0 = leray_project(&random_smooth(&g, Shape::Vector, seed ^ 7)).unwrap().scaled(0.1);
        let u = Timeline::constant(graded_times(0.5, 4).unwrap(), &u0).unwrap();
        let out = transport_step(&th, &u, 0.05).unwrap();
        for s in out.snapshots() {
            prop_assert!((s.mean(0) - th.mean(0)).abs() < 1e-12);
        }
    }
}
