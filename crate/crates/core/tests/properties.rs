use std::f64::consts::PI;

use proptest::prelude::*;

use parastokes_core::capacity::{cap_exact_model, cap_upper_volume};
use parastokes_core::conditions::{check_a, DensityMeaning, GapFunction, RadialDensity, Thresholds};
use parastokes_core::cutoffs::{custom_energy, phi_energy, PhiCutoff, StandardCutoff};
use parastokes_core::inequalities::{lindqvist_lhs, psi, tmax_check};
use parastokes_core::numerics::{integrate, QuadratureConfig};
use parastokes_core::profiles::{parse_segment_lines, render};
use parastokes_core::sobolev::{build_counterexample, verify_counterexample, CheckStatus, CounterexampleSpec};
use parastokes_core::stokes::{ball_divergence_integral, div_radial, make_unit_mass_field};
use parastokes_core::{
    Exponent, FnRadial, ModelManifold, RadialFunction, RadialProfile, Segment, SegmentKind, VolumeConstant,
};

fn model(i: usize) -> ModelManifold {
    match i {
        0 => ModelManifold::euclidean(2).unwrap(),
        1 => ModelManifold::euclidean(3).unwrap(),
        2 => ModelManifold::euclidean(4).unwrap(),
        3 => ModelManifold::cusp(),
        _ => ModelManifold::hyperbolic(3).unwrap(),
    }
}

fn exponent() -> impl Strategy<Value = Exponent> {
    (1.1f64..5.0).prop_map(|p| Exponent::new(p).unwrap())
}

fn annulus() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..4.0, 0.05f64..4.0).prop_map(|(a, w)| (a, a + w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_quadrature_is_exact(c in prop::collection::vec(-3.0f64..3.0, 1..8), b in 0.1f64..5.0) {
        let f = |t: f64| c.iter().rev().fold(0.0, |acc, k| acc * t + k);
        let exact: f64 = c.iter().enumerate().map(|(i, k)| k * b.powi(i as i32 + 1) / (i as f64 + 1.0)).sum();
        let q = integrate(f, 0.0, b, &QuadratureConfig::default()).unwrap();
        prop_assert!((q.value - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn segment_lines_round_trip(
        c in 0.1f64..5.0,
        beta in -2.0f64..2.0,
        lam in -1.0f64..1.0,
        cuts in (0.5f64..2.0, 0.5f64..2.0),
    ) {
        let (a, b) = (cuts.0, cuts.0 + cuts.1);
        let segs = vec![
            Segment::new(SegmentKind::Linear { slope: c }, 0.0, a),
            Segment::new(SegmentKind::Power { coefficient: c, exponent: beta }, a, b),
            Segment::new(SegmentKind::Exponential { coefficient: c, rate: lam }, b, f64::INFINITY),
        ];
        let text = render(&segs);
        prop_assert_eq!(parse_segment_lines(&text).unwrap(), segs);
    }

    #[test]
    fn volume_is_additive(i in 0usize..5, (a, b) in annulus()) {
        let m = model(i);
        let lhs = m.volume(b).unwrap();
        let rhs = m.volume(a).unwrap() + m.shell_volume(a, b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn capacity_below_volume_bound(i in 0usize..5, e in exponent(), (a, b) in annulus()) {
        let m = model(i);
        let exact = cap_exact_model(&m, e, a, b).unwrap();
        let bound = cap_upper_volume(&m, e, a, b, VolumeConstant::TwoPowP).unwrap();
        prop_assert!(exact <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn capacity_decreases_with_outer_radius(i in 0usize..5, e in exponent(), (a, b) in annulus(), extra in 0.01f64..3.0) {
        let m = model(i);
        let c1 = cap_exact_model(&m, e, a, b).unwrap();
        let c2 = cap_exact_model(&m, e, a, b + extra).unwrap();
        prop_assert!(c2 < c1);
    }

    #[test]
    fn phi_is_monotone_between_zero_and_one(i in 0usize..5, e in exponent(), (a, b) in annulus()) {
        let m = model(i);
        let phi = PhiCutoff::new(&m, e, a, b).unwrap();
        let mut prev = 1.0;
        for k in 0..=20 {
            let v = phi.eval(a + (b - a) * k as f64 / 20.0).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            prop_assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn standard_cutoff_never_beats_phi(i in 0usize..5, e in exponent(), (a, b) in annulus(), eps in 0.0f64..1.0) {
        let m = model(i);
        let xi = StandardCutoff::new(a, b, eps).unwrap();
        let energy = custom_energy(&m, e, &xi, a, b).unwrap();
        prop_assert!(energy >= phi_energy(&m, e, a, b).unwrap() * (1.0 - 1e-9));
    }

    #[test]
    fn condition_a_is_homogeneous(scale in 0.1f64..10.0, r in 1.0f64..20.0) {
        let m = ModelManifold::euclidean(3).unwrap();
        let e = Exponent::new(2.0).unwrap();
        let d = |s: f64| RadialDensity::new(FnRadial::new(move |t| s / (1.0 + t * t), |_| 0.0), DensityMeaning::QPower);
        let base = check_a(&m, e, &d(1.0), GapFunction::default(), &[r], Thresholds::default()).unwrap();
        let scaled = check_a(&m, e, &d(scale), GapFunction::default(), &[r], Thresholds::default()).unwrap();
        prop_assert!((scaled.ratios[0] - scale * base.ratios[0]).abs() <= 1e-10 * scaled.ratios[0]);
    }

    #[test]
    fn unit_mass_field_integrates_to_one(i in 0usize..4, c in 1.0f64..5.0, w in 0.1f64..0.9) {
        let m = model(i);
        let bump = RadialProfile::bump(c, w, 1.0).unwrap();
        let f = make_unit_mass_field(&m, &bump).unwrap();
        let b = ball_divergence_integral(&m, &f, c + w + 1.0).unwrap();
        prop_assert!((b.value - 1.0).abs() <= 1e-12);
        prop_assert!(b.residual <= 1e-9);
        let inside = ball_divergence_integral(&m, &f, c).unwrap();
        prop_assert!(inside.value > 0.0 && inside.value < 1.0);
        prop_assert!(div_radial(&m, &f, c).unwrap().value > 0.0);
    }

    #[test]
    fn lindqvist_symmetry_and_homogeneity(
        x in prop::collection::vec(-5.0f64..5.0, 3),
        y in prop::collection::vec(-5.0f64..5.0, 3),
        p in 1.1f64..4.0,
        lam in 0.1f64..10.0,
    ) {
        let l = lindqvist_lhs(&x, &y, p).unwrap();
        prop_assert!(l >= -1e-12);
        prop_assert!((l - lindqvist_lhs(&y, &x, p).unwrap()).abs() <= 1e-12 * (1.0 + l));
        let s = psi(&x, &y, p).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert!((s - psi(&y, &x, p).unwrap()).abs() <= 1e-12 * (1.0 + s));
        let xs: Vec<f64> = x.iter().map(|v| lam * v).collect();
        let ys: Vec<f64> = y.iter().map(|v| lam * v).collect();
        let scale = lam.powf(p);
        prop_assert!((lindqvist_lhs(&xs, &ys, p).unwrap() - scale * l).abs() <= 1e-9 * (1.0 + scale * l));
        prop_assert!((psi(&xs, &ys, p).unwrap() - scale * s).abs() <= 1e-9 * (1.0 + scale * s));
    }

    #[test]
    fn tmax_value_scales_like_inverse_root(a in 0.5f64..1e4) {
        let r = tmax_check(a).unwrap();
        prop_assert!((r.argmax - 2.0 * a).abs() <= 1e-9 * a.max(1.0));
        prop_assert!((r.value * a.sqrt() - 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn admissible_counterexamples_confirm(beta in 0.3f64..0.7, h in 3.9f64..8.0) {
        let spec = CounterexampleSpec { m: 3, q: 1.5, beta, h, gamma: 1.0, smoothing_width: 0.1 };
        let m = build_counterexample(&spec).unwrap();
        let rep = verify_counterexample(&m, &spec, 200.0).unwrap();
        prop_assert_eq!(rep.volume.status, CheckStatus::Pass);
        prop_assert_eq!(rep.tail.status, CheckStatus::Pass);
        prop_assert_eq!(rep.growth.status, CheckStatus::Fail);
        let bigger = CounterexampleSpec { h: 2.0 * h, ..spec };
        let rep2 = verify_counterexample(&build_counterexample(&bigger).unwrap(), &bigger, 200.0).unwrap();
        prop_assert_eq!(rep2.volume.status, CheckStatus::Pass);
    }
}

#[test]
fn evans_gradient_is_a_p() {
    let m = ModelManifold::euclidean(3).unwrap();
    let e = Exponent::new(2.0).unwrap();
    let f = m.evans(e);
    for r in [0.5, 1.0, 3.0] {
        assert!((f.derivative(r) - 1.0 / (4.0 * PI * r * r)).abs() < 1e-14);
    }
}
