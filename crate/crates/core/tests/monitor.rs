mod common;

use boussinesq_core::besov::{besov_norm_heat, geometric_nodes, random_corpus, BesovIndex, DyadicLadder};
use boussinesq_core::duhamel::{graded_times, uniform_times, DampingWeight, Timeline};
use boussinesq_core::exponents::Regime;
use boussinesq_core::field::{PhysicalField, Shape};
use boussinesq_core::harmonic::heat_propagate;
use boussinesq_core::monitor::*;
use boussinesq_core::solver::{eta_value, SmallnessReport};
use common::*;
use proptest::prelude::*;

fn sine_timeline(times: Vec<f64>, decay: f64) -> Timeline<f64> {
    let g = grid(2, 16);
    let s = PhysicalField::scalar_fn(&g, |x| x[0].sin()).to_spectral();
    Timeline::from_fn(times, |t| s.scaled((-decay * t).exp())).unwrap()
}

fn random_timeline(seed: u64, shape: Shape) -> Timeline<f64> {
    let g = grid(2, 16);
    Timeline::try_from_fn(graded_times(1.0, 8).unwrap(), |i, _| Ok(random_smooth(&g, shape, seed.wrapping_add(i as u64))))
        .unwrap()
}

#[test]
fn decaying_mode_long_horizon() {
    let f = sine_timeline(uniform_times(40.0, 4000).unwrap(), 1.0);
    let spec = SpaceTimeNormSpec::unweighted(2.0, 2.0).unwrap();
    let got = spacetime_norm(&f, &spec).unwrap();
    let oracle = 4.442883 * 0.5f64.sqrt() * (1.0 - (-80.0f64).exp()).sqrt();
    assert!((got - oracle).abs() < 1e-4, "{got} vs {oracle}");
    assert!((got - 3.1416).abs() < 1e-3);
}

#[test]
fn weighted_constant_in_time() {
    let f = sine_timeline(graded_times(2.0, 16).unwrap(), 0.0);
    let sin2 = 4.442883;
    for (rho, a) in [(2.0, 0.2), (4.0, 0.1), (1.5, 0.3)] {
        let got = spacetime_norm(&f, &SpaceTimeNormSpec::new(rho, 2.0, a).unwrap()).unwrap();
        let b: f64 = a * rho + 1.0;
        let oracle = sin2 * (2f64.powf(b) / b).powf(1.0 / rho);
        assert!((got / oracle - 1.0).abs() < 5e-3, "rho={rho} a={a}: {got} vs {oracle}");
    }
    let sup = spacetime_norm(&f, &SpaceTimeNormSpec::new(f64::INFINITY, 2.0, 0.5).unwrap()).unwrap();
    assert!((sup - sin2 * 2f64.sqrt()).abs() < 1e-5);
}

#[test]
fn zero_and_invalid_specs() {
    let z = Timeline::zeros(graded_times(1.0, 4).unwrap(), &grid(2, 8), Shape::Scalar).unwrap();
    assert_eq!(spacetime_norm(&z, &SpaceTimeNormSpec::unweighted(2.0, 3.0).unwrap()).unwrap(), 0.0);
    let err = SpaceTimeNormSpec::new(2.0, 2.0, 0.5).unwrap_err().to_string();
    assert!(err.contains("rho' < 1"), "{err}");
    assert!(SpaceTimeNormSpec::unweighted(0.5, 2.0).is_err());
    assert!(SpaceTimeNormSpec::unweighted(2.0, 0.9).is_err());
    assert!(SpaceTimeNormSpec::new(f64::INFINITY, 2.0, 3.0).is_ok());
}

#[test]
fn heat_flow_space_time_norm_matches_heat_besov() {
    // s = −2/r: ∫ (t^{1/r}‖e^{tΔ}u‖_p)^r dt/t = ‖e^{tΔ}u‖^r_{L^r_t L^p_x}
    let g = grid(2, 64);
    let (lo, hi) = DyadicLadder::for_grid(&g).unwrap().heat_window();
    let mut times = vec![0.0];
    times.extend(geometric_nodes(lo * 1e-2, hi, 64));
    for (p, r) in [(3.0, 2.0), (2.0, 4.0)] {
        for f in random_corpus(&g, 2, 4).unwrap() {
            let flow = Timeline::try_from_fn(times.clone(), |_, t| heat_propagate(&f, t)).unwrap();
            let st = spacetime_norm(&flow, &SpaceTimeNormSpec::unweighted(r, p).unwrap()).unwrap();
            let heat = besov_norm_heat(&f, &BesovIndex::new(p, r, -2.0 / r).unwrap()).unwrap();
            let ratio = st / heat;
            assert!((0.1..=10.0).contains(&ratio), "p={p} r={r}: {ratio}");
        }
    }
}

#[test]
fn theorem_report_of_zero_solution() {
    let times = graded_times(1.0, 4).unwrap();
    let g = grid(2, 16);
    let th = Timeline::zeros(times.clone(), &g, Shape::Scalar).unwrap();
    let u = Timeline::zeros(times.clone(), &g, Shape::Vector).unwrap();
    for (regime, p, r) in [(Regime::Theorem1, 1.2, 2.0), (Regime::Theorem2, 1.6, 16.0)] {
        let ctx = NormContext::new(regime, 2, p, r).unwrap();
        let ledger = state_norms(&th, &u, &th, &ctx).unwrap();
        assert!(ledger.values().all(|&v| v == 0.0));
        let eta = SmallnessReport {
            nu_dev: 0.0,
            uh_besov: 0.0,
            ud_besov: 0.0,
            c_r: 1.0,
            c_0: 0.1,
            eta: 0.0,
            regime,
            p,
            r,
            below_threshold: true,
        };
        let reports = theorem_report(&ledger, &eta, 0.0, "converged");
        assert_eq!(reports.len(), 4);
        for rep in &reports {
            assert_eq!(rep.lhs_total, 0.0);
            assert_eq!(rep.inferred_constant, 0.0);
        }
        let rows = ledger_rows("zero", &reports);
        let mut buf = Vec::new();
        write_ledger_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("run_id,inequality,lhs,rhs_shape,inferred_c"));
        assert_eq!(text.lines().count(), 5);
    }
}

#[test]
fn inferred_constant_is_the_ratio() {
    let mut ledger = NormLedger::new();
    ledger.insert("h: grad u L^r".into(), 0.3);
    ledger.insert("h: u L^2r".into(), 0.1);
    ledger.insert("h: total".into(), 0.4);
    ledger.insert("d: u L^2r".into(), 2.0);
    ledger.insert("pressure".into(), 0.05);
    ledger.insert("theta sup".into(), 0.5);
    let eta = SmallnessReport {
        nu_dev: 0.01,
        uh_besov: 0.02,
        ud_besov: 1.0,
        c_r: 1.0,
        c_0: 0.1,
        eta: eta_value(0.01, 0.02, 1.0, 1.0, 2.0, Regime::Theorem1),
        regime: Regime::Theorem1,
        p: 1.2,
        r: 2.0,
        below_threshold: true,
    };
    let reps = theorem_report(&ledger, &eta, 0.5, "converged");
    assert!((reps[0].inferred_constant - 0.4 / eta.eta).abs() < 1e-14);
    assert_eq!(reps[0].lhs.len(), 2);
    assert!((reps[1].inferred_constant - 2.0).abs() < 1e-14);
    assert!((reps[2].inferred_constant - 0.05 / eta.eta).abs() < 1e-14);
    assert!((reps[3].inferred_constant - 1.0).abs() < 1e-14);
}

#[test]
fn delta_u_identities() {
    let ctx = NormContext::new(Regime::Theorem1, 2, 1.2, 2.0).unwrap();
    let a = random_timeline(1, Shape::Vector);
    let b = random_timeline(50, Shape::Vector);
    assert_eq!(delta_u(&a, &a, 3.0, &ctx).unwrap(), 0.0);
    let plain: f64 = ctx.delta_norms(&b.sub(&a).unwrap(), None).unwrap().iter().map(|x| x.1).sum();
    assert_eq!(delta_u(&a, &b, 0.0, &ctx).unwrap(), plain);
    let other = Timeline::zeros(graded_times(1.0, 8).unwrap(), &grid(2, 8), Shape::Vector).unwrap();
    assert!(delta_u(&a, &other, 0.0, &ctx).is_err());
    assert_eq!(ctx.delta_norms(&a, None).unwrap().len(), 4);
    let ctx2 = NormContext::new(Regime::Theorem2, 2, 1.6, 16.0).unwrap().with_shift(0.02).unwrap();
    assert_eq!(ctx2.delta_norms(&a, None).unwrap().len(), 3);
}

#[test]
fn context_validation() {
    assert!(NormContext::new(Regime::Theorem1, 2, 1.5, 2.0).is_err());
    assert!(NormContext::new(Regime::Theorem1, 2, 3.0, 2.0).is_err());
    assert!(NormContext::new(Regime::Theorem2, 3, 2.25, 8.0).is_err());
    let ctx = NormContext::new(Regime::Theorem1, 2, 1.2, 2.0).unwrap();
    assert!(ctx.with_shift(0.0).is_err());
    assert!(ctx.with_shift(0.3).is_err());
    assert!(ctx.with_shift(0.2).is_ok());
}

#[test]
fn damping_does_not_touch_time_zero() {
    let times = graded_times(1.0, 8).unwrap();
    let w = DampingWeight::new(&times, &vec![1.0; times.len()], 2.0).unwrap();
    let expected = (-2.0f64).exp();
    assert!((w.h(0, times.len() - 1) - expected).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spacetime_norm_homogeneous(seed in any::<u64>(), c in -4.0f64..4.0, rho in 1.0f64..8.0, q in 1.0f64..6.0) {
        let f = random_timeline(seed, Shape::Scalar);
        let spec = SpaceTimeNormSpec::unweighted(rho, q).unwrap();
        let a = spacetime_norm(&f.scaled(c).unwrap(), &spec).unwrap();
        let b = c.abs() * spacetime_norm(&f, &spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn spacetime_norm_monotone_in_horizon(seed in any::<u64>(), rho in 1.0f64..8.0, a in 0.0f64..0.4) {
        let f = random_timeline(seed, Shape::Scalar);
        let v = node_norms(&f, 2.0).unwrap();
        let weight = if a * rho / (rho - 1.0).max(1e-9) < 1.0 { a } else { 0.0 };
        let cum = time_norm_cumulative(f.times(), &v, rho, weight);
        prop_assert!(cum.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn delta_u_monotone_in_lambda(seed in any::<u64>(), l1 in 0.0f64..50.0, dl in 0.0f64..50.0) {
        let ctx = NormContext::new(Regime::Theorem1, 2, 1.2, 2.0).unwrap();
        let a = random_timeline(seed, Shape::Vector);
        let b = random_timeline(seed ^ 0xabcdef, Shape::Vector);
        let d1 = delta_u(&a, &b, l1, &ctx).unwrap();
        let d2 = delta_u(&a, &b, l1 + dl, &ctx).unwrap();
        prop_assert!(d2 <= d1 * (1.0 + 1e-12));
    }
}
