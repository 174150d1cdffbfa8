mod common;

use std::f64::consts::{PI, TAU};

use boussinesq_core::field::io::{read_binary, write_binary, write_csv};
use boussinesq_core::field::{derivative, divergence, gradient, multiply, Grid, PhysicalField, Shape, SpectralField};
use boussinesq_core::harmonic::leray_project;
use common::*;
use proptest::prelude::*;
use rustfft::num_complex::Complex;

#[test]
fn grid_wavenumbers_are_integers_on_two_pi_box() {
    let g = grid(2, 64);
    let mut ms: Vec<i64> = (0..64).map(|i| g.mode(i)[1]).collect();
    ms.sort();
    assert_eq!(ms, (-32..32).collect::<Vec<_>>());
    for i in 0..g.npts() {
        let k = g.wavevector(i);
        let m = g.mode(i);
        assert_eq!(k[0], m[0] as f64);
        assert_eq!(k[1], m[1] as f64);
    }
}

#[test]
fn unit_box_has_two_pi_spacing() {
    let g = Grid::<f64>::new(3, 8, 1.0).unwrap();
    assert!((g.k_min() - TAU).abs() < 1e-12);
    let i = g.index_of_mode([0, 0, 1]).unwrap();
    assert!((g.wavevector(i)[2] - TAU).abs() < 1e-12);
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(Grid::<f64>::new(2, 63, TAU).is_err());
    assert!(Grid::<f64>::new(2, 4, TAU).is_err());
    assert!(Grid::<f64>::new(4, 8, TAU).is_err());
    assert!(Grid::<f64>::new(2, 8, -1.0).is_err());
}

#[test]
fn constant_maps_to_zero_mode() {
    let g = grid(2, 16);
    let f = PhysicalField::scalar_fn(&g, |_| 1.0).to_spectral();
    for (i, z) in f.coefficients().iter().enumerate() {
        let want = if i == g.index_of_mode([0, 0, 0]).unwrap() { 1.0 } else { 0.0 };
        assert!((z.re - want).abs() < 1e-14 && z.im.abs() < 1e-14);
    }
    let back = f.to_physical();
    assert!(back.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
}

#[test]
fn sine_has_imaginary_half_coefficients() {
    let g = grid(2, 16);
    let f = PhysicalField::scalar_fn(&g, |x| x[0].sin()).to_spectral();
    let plus = f.coefficient(0, [1, 0, 0]).unwrap();
    let minus = f.coefficient(0, [-1, 0, 0]).unwrap();
    assert!((plus - Complex::new(0.0, -0.5)).norm() < 1e-14);
    assert!((minus - Complex::new(0.0, 0.5)).norm() < 1e-14);
    let energy: f64 = f.coefficients().iter().map(|z| z.norm_sqr()).sum();
    assert!((energy - 0.5).abs() < 1e-14);

    let mut c = vec![Complex::new(0.0, 0.0); g.npts()];
    c[g.index_of_mode([1, 0, 0]).unwrap()] = Complex::new(0.0, -0.5);
    c[g.index_of_mode([-1, 0, 0]).unwrap()] = Complex::new(0.0, 0.5);
    let s = SpectralField::from_coefficients(&g, Shape::Scalar, c).unwrap().to_physical();
    let want = PhysicalField::scalar_fn(&g, |x| x[0].sin());
    assert!(max_abs_diff(s.values(), want.values()) < 1e-14);
    let z = SpectralField::<f64>::zeros(&g, Shape::Scalar).to_physical();
    assert!(z.values().iter().all(|v| *v == 0.0));
}

#[test]
fn derivative_of_single_modes() {
    let g = grid(2, 32);
    let s = PhysicalField::scalar_fn(&g, |x| x[0].sin()).to_spectral();
    let c = PhysicalField::scalar_fn(&g, |x| x[0].cos());
    assert!(max_abs_diff(derivative(&s, 0).unwrap().to_physical().values(), c.values()) < 1e-13);
    assert!(derivative(&s, 1).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-14);
    assert!(derivative(&s, 2).is_err());
}

#[test]
fn stream_function_velocity_is_solenoidal() {
    let g = grid(2, 32);
    let psi = PhysicalField::scalar_fn(&g, |x| x[0].sin() * x[1].sin()).to_spectral();
    let u = SpectralField::from_components(vec![derivative(&psi, 1).unwrap().scaled(-1.0), derivative(&psi, 0).unwrap()]).unwrap();
    assert!(divergence(&u).unwrap().lp_norm(2.0).unwrap() < 1e-12);
}

#[test]
fn derivative_zeroes_own_nyquist_plane() {
    let g = grid(2, 8);
    let f = PhysicalField::scalar_fn(&g, |x| (4.0 * x[0]).cos() + (4.0 * x[1]).cos()).to_spectral();
    let d0 = derivative(&f, 0).unwrap();
    assert!(d0.lp_norm(2.0).unwrap() < 1e-13);
}

#[test]
fn product_examples() {
    let g = grid(2, 32);
    let s = PhysicalField::scalar_fn(&g, |x| x[0].sin()).to_spectral();
    let one = PhysicalField::scalar_fn(&g, |_| 1.0).to_spectral();
    assert!(multiply(&one, &s).unwrap().sub(&s).unwrap().lp_norm(2.0).unwrap() < 1e-13);
    let sq = multiply(&s, &s).unwrap().to_physical();
    let want = PhysicalField::scalar_fn(&g, |x| (1.0 - (2.0 * x[0]).cos()) / 2.0);
    assert!(max_abs_diff(sq.values(), want.values()) < 1e-13);
    // both factors live entirely above the 2/3 cutoff
    let hi = PhysicalField::scalar_fn(&g, |x| (12.0 * x[0]).cos() + (13.0 * x[1]).sin()).to_spectral();
    assert!(multiply(&hi, &hi).unwrap().lp_norm(2.0).unwrap() < 1e-13);
    let v = SpectralField::<f64>::zeros(&g, Shape::Vector);
    assert!(multiply(&v, &v).is_err());
}

#[test]
fn lebesgue_norm_examples() {
    let g = grid(2, 64);
    let one = PhysicalField::scalar_fn(&g, |_| 1.0);
    assert!((one.lp_norm(2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
    let s = PhysicalField::scalar_fn(&g, |x| x[0].sin());
    assert!((s.lp_norm(2.0).unwrap() - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
    assert!((s.lp_norm(2.0).unwrap() - 4.442883).abs() < 1e-6);
    let sup = s.lp_norm(f64::INFINITY).unwrap();
    assert!(sup <= 1.0 && 1.0 - sup <= (PI / 64.0).powi(2) / 2.0);
    assert!(s.lp_norm(0.5).is_err());
}

#[test]
fn binary_snapshot_round_trip() {
    let g = grid(2, 16);
    let f = random_physical(&g, Shape::Vector, 5);
    let mut buf = Vec::new();
    write_binary(&f, &mut buf).unwrap();
    assert_eq!(buf.len(), 4 + 4 + 8 + 4 + 8 * 2 * 256);
    let back: PhysicalField<f64> = read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.values(), f.values());
    assert_eq!(back.shape(), Shape::Vector);
    assert!(read_binary::<f64, _>(&buf[..10]).is_err());
    let mut text = Vec::new();
    write_csv(&f, &mut text).unwrap();
    assert_eq!(String::from_utf8(text).unwrap().lines().count(), 1 + 256);
}

#[test]
fn single_precision_round_trip() {
    let g = Grid::<f32>::new(2, 32, std::f32::consts::TAU).unwrap();
    let f = PhysicalField::scalar_fn(&g, |x| x[0].sin() * (2.0 * x[1]).cos());
    let back = f.to_spectral().to_physical();
    let err = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
    assert!(err < 1e-5);
    let d = derivative(&f.to_spectral(), 0).unwrap().to_physical();
    let want = PhysicalField::scalar_fn(&g, |x| x[0].cos() * (2.0 * x[1]).cos());
    let err = d.values().iter().zip(want.values()).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
    assert!(err < 1e-4);
}

#[test]
fn three_dimensional_transform() {
    let g = grid(3, 16);
    let f = PhysicalField::scalar_fn(&g, |x| x[0].sin() * x[1].cos() * (2.0 * x[2]).sin());
    let back = f.to_spectral().to_physical();
    assert!(max_abs_diff(f.values(), back.values()) < 1e-13);
    let grad = gradient(&f.to_spectral()).unwrap();
    assert_eq!(grad.shape(), Shape::Vector);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), dim in 2usize..=3) {
        let g = grid(dim, if dim == 2 { 32 } else { 8 });
        let f = random_physical(&g, Shape::Scalar, seed);
        let back = f.to_spectral().to_physical();
        let scale = f.lp_norm(2.0).unwrap();
        let diff: Vec<f64> = f.values().iter().zip(back.values()).map(|(a, b)| a - b).collect();
        let err = PhysicalField::from_values(&g, Shape::Scalar, diff).unwrap().lp_norm(2.0).unwrap();
        prop_assert!(err <= 1e-12 * scale);
    }

    #[test]
    fn parseval_identity(seed in any::<u64>()) {
        let g = grid(2, 32);
        let f = random_physical(&g, Shape::Scalar, seed);
        let l2 = f.lp_norm(2.0).unwrap();
        let e = f.to_spectral().energy();
        prop_assert!((l2 * l2 - e).abs() <= 1e-12 * e);
    }

    #[test]
    fn derivative_commutes_with_transforms(a in -3i64..=3, b in -3i64..=3, amp in -2.0f64..2.0) {
        let g = grid(2, 16);
        let f = PhysicalField::scalar_fn(&g, |x| amp * (a as f64 * x[0] + b as f64 * x[1]).sin()).to_spectral();
        let want = PhysicalField::scalar_fn(&g, |x| amp * a as f64 * (a as f64 * x[0] + b as f64 * x[1]).cos());
        let got = derivative(&f, 0).unwrap().to_physical();
        prop_assert!(max_abs_diff(got.values(), want.values()) <= 1e-12 * (1.0 + amp.abs() * 3.0));
    }

    #[test]
    fn projected_fields_are_solenoidal(seed in any::<u64>(), dim in 2usize..=3) {
        let g = grid(dim, if dim == 2 { 32 } else { 8 });
        let u = leray_project(&random_physical(&g, Shape::Vector, seed).to_spectral()).unwrap();
        let div = divergence(&u).unwrap().lp_norm(2.0).unwrap();
        prop_assert!(div <= 1e-10 * u.lp_norm(2.0).unwrap());
    }

    #[test]
    fn product_is_bilinear_and_commutative(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), c in -3.0f64..3.0) {
        let g = grid(2, 16);
        let a = random_physical(&g, Shape::Scalar, s1).to_spectral();
        let b = random_physical(&g, Shape::Scalar, s2).to_spectral();
        let e = random_physical(&g, Shape::Scalar, s3).to_spectral();
        let ab = multiply(&a, &b).unwrap();
        let ba = multiply(&b, &a).unwrap();
        let scale = ab.lp_norm(2.0).unwrap().max(1e-300);
        prop_assert!(ab.sub(&ba).unwrap().lp_norm(2.0).unwrap() <= 1e-12 * scale);
        let lhs = multiply(&a.scaled(c).add(&e).unwrap(), &b).unwrap();
        let rhs = ab.scaled(c).add(&multiply(&e, &b).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().lp_norm(2.0).unwrap() <= 1e-12 * lhs.lp_norm(2.0).unwrap().max(1.0));
    }

    #[test]
    fn lebesgue_norm_is_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0, p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY])) {
        let g = grid(2, 16);
        let f = random_physical(&g, Shape::Scalar, seed).to_spectral();
        let a = f.scaled(c).lp_norm(p).unwrap();
        let b = c.abs() * f.lp_norm(p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }
}
