//! Acceptance gate. Prints one line per criterion and exits non-zero when any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parastokes_core::capacity::{cap_exact_model, cap_upper_surface, cap_upper_volume, classify_parabolicity};
use parastokes_core::conditions::{gradient_energy, Exhaustion, GapFunction};
use parastokes_core::cutoffs::{custom_energy, energy_sweep, phi_energy, random_cutoffs};
use parastokes_core::inequalities::{count_violations, estimate_cp, negpart_grid, tmax_check};
use parastokes_core::sobolev::{
    build_counterexample, lower_area_check, verify_counterexample, CheckStatus, CounterexampleSpec, SobolevParams,
};
use parastokes_core::stokes::{
    ball_divergence_integral, make_unit_mass_field, random_fields, theorem_harness, HarnessCondition, HarnessOptions,
    StokesError,
};
use parastokes_core::{Certificate, Exponent, ModelManifold, Parabolicity, RadialField, RadialProfile};

fn p(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cusp = ModelManifold::cusp();
    let mut worst: f64 = 0.0;
    for q in [1.5, 2.0, 3.0] {
        for (r1, r2) in [(1.0, 2.0), (2.0, 4.0)] {
            let closed =
                2.0 * PI * (q - 1.0f64).powf(1.0 - q) * ((r2 / (q - 1.0)).exp() - (r1 / (q - 1.0)).exp()).powf(1.0 - q);
            let got = phi_energy(&cusp, p(q), r1, r2).unwrap();
            worst = worst.max(rel(got, closed));
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-6 && within(t, Duration::from_secs(1)),
        format!("max rel err {worst:.2e} (tol 1e-6), runtime {t:?} (< 1 s)"),
    )
}

fn criterion_2() -> Outcome {
    let cusp = ModelManifold::cusp();
    let radii: Vec<f64> = (5..=20).map(f64::from).collect();
    let rows = energy_sweep(&cusp, p(2.0), &radii, 1e-3, false).unwrap();
    let phi: Vec<f64> = rows.iter().map(|r| r.phi_energy * (2.0 * r.r).exp()).collect();
    let xi: Vec<f64> = rows.iter().map(|r| r.xi_bound * r.r * r.r * r.r.exp()).collect();
    let band = |v: &[f64]| {
        let max = v.iter().copied().fold(f64::MIN, f64::max);
        let min = v.iter().copied().fold(f64::MAX, f64::min);
        max / min
    };
    let (bp, bx) = (band(&phi), band(&xi));
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let at15 = rows.iter().find(|r| r.r == 15.0).unwrap().ratio;
    outcome(
        bp < 3.0 && bx < 3.0 && decreasing && at15 < 1e-3,
        format!(
            "phi band {bp:.4}, xi band {bx:.4} (< 3), ratio decreasing {decreasing}, ratio(15) {at15:.3e} (< 1e-3)"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let models = [
        ("R2", ModelManifold::euclidean(2).unwrap()),
        ("R3", ModelManifold::euclidean(3).unwrap()),
        ("R4", ModelManifold::euclidean(4).unwrap()),
        ("cusp", ModelManifold::cusp()),
    ];
    let mut worst: f64 = 0.0;
    let mut ordering_violations = 0;
    for (_, m) in &models {
        for _ in 0..20 {
            let e = p(rng.random_range(1.2..4.0));
            let r1 = rng.random_range(0.1..5.0);
            let r2 = r1 + rng.random_range(0.1..5.0);
            let exact = cap_exact_model(m, e, r1, r2).unwrap();
            let surface = cap_upper_surface(m, e, r1, r2).unwrap();
            let volume = cap_upper_volume(m, e, r1, r2, parastokes_core::VolumeConstant::TwoPowP).unwrap();
            worst = worst.max(rel(surface, exact));
            if exact > volume {
                ordering_violations += 1;
            }
        }
    }
    let r3 = &models[1].1;
    let eight_pi = cap_exact_model(r3, p(2.0), 1.0, 2.0).unwrap();
    let err = (eight_pi - 8.0 * PI).abs();
    outcome(
        worst <= 1e-9 && ordering_violations == 0 && err <= 1e-6,
        format!(
            "surface vs exact max rel {worst:.2e} (tol 1e-9), volume-bound violations {ordering_violations}, \
             R3 (1,2) = {eight_pi:.9} (8 pi +/- 1e-6)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let v = |m: ModelManifold, q: f64| classify_parabolicity(&m, p(q)).unwrap();
    let r2 = v(ModelManifold::euclidean(2).unwrap(), 2.0).verdict == Parabolicity::Parabolic;
    let r3 = v(ModelManifold::euclidean(3).unwrap(), 2.0);
    let cert = match r3.certificate {
        Certificate::FiniteIntegral { value: Some(x), .. } => x,
        _ => f64::NAN,
    };
    let r3_ok = r3.verdict == Parabolicity::NonParabolic && (cert - 1.0 / (4.0 * PI)).abs() <= 1e-8;
    let rm = (2..=4).all(|m| v(ModelManifold::euclidean(m).unwrap(), m as f64).verdict == Parabolicity::Parabolic);
    let cusp = v(ModelManifold::cusp(), 2.0).verdict == Parabolicity::Parabolic;
    let t = start.elapsed();
    outcome(
        r2 && r3_ok && rm && cusp && within(t, Duration::from_secs(1)),
        format!(
            "R2 parabolic {r2}, R3 certificate {cert:.10} (1/(4 pi) +/- 1e-8), R^m p=m parabolic {rm}, \
             cusp parabolic {cusp}, runtime {t:?}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let models = [
        ModelManifold::euclidean(3).unwrap(),
        ModelManifold::cusp(),
        ModelManifold::hyperbolic(2).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for m in &models {
        for q in [1.5, 2.0, 3.0] {
            let e = p(q);
            let f = m.evans(e);
            for i in 0..50 {
                let r = 0.2 + 8.8 * i as f64 / 49.0;
                worst = worst.max(m.radial_p_laplacian_residual(e, &f, r).unwrap().value.abs());
            }
        }
    }
    let cusp = &models[1];
    let mut energy_err: f64 = 0.0;
    for q in [1.5, 2.0, 3.0] {
        let e = p(q);
        let f = cusp.evans(e);
        for r in [0.1, 1.0, 5.0] {
            let (a, b) = (f.level_radius(r).unwrap(), f.level_radius(2.0 * r).unwrap());
            energy_err = energy_err.max(rel(gradient_energy(cusp, e, &f, a, b).unwrap(), r));
        }
    }
    outcome(
        worst <= 1e-6 && energy_err <= 1e-6,
        format!("max |residual| {worst:.2e} (tol 1e-6, 450 points), level-annulus energy max rel {energy_err:.2e} (tol 1e-6)"),
    )
}

fn criterion_6() -> Outcome {
    let models = [
        ModelManifold::euclidean(3).unwrap(),
        ModelManifold::cusp(),
        ModelManifold::hyperbolic(2).unwrap(),
    ];
    let (r1, r2) = (1.0, 3.0);
    let mut violations = 0;
    let mut checked = 0;
    let mut min_gap = f64::INFINITY;
    for (i, m) in models.iter().enumerate() {
        for (j, q) in [1.5, 2.0, 3.0, 4.0].into_iter().enumerate() {
            let e = p(q);
            let phi = phi_energy(m, e, r1, r2).unwrap();
            let cutoffs = random_cutoffs(600 + 10 * i as u64 + j as u64, 200, r1, r2, 10).unwrap();
            for c in &cutoffs {
                let energy = custom_energy(m, e, c, r1, r2).unwrap();
                checked += 1;
                min_gap = min_gap.min((energy - phi) / phi);
                if energy < phi - 1e-9 * phi {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0 && checked == 2400,
        format!("{checked} cutoffs, {violations} violations, min relative excess {min_gap:.3e}"),
    )
}

fn criterion_7() -> Outcome {
    let e = p(2.0);
    let r3 = ModelManifold::euclidean(3).unwrap();
    let opts = HarnessOptions::default();
    let ladder: Vec<f64> = (1..=10).map(|k| 2f64.powi(k)).collect();
    let mut notes = Vec::new();
    let mut pass = true;

    let bump = RadialProfile::bump(1.0, 0.5, 1.0).unwrap();
    let um = make_unit_mass_field(&r3, &bump).unwrap();
    match theorem_harness(&r3, e, &um, &HarnessCondition::A(GapFunction::default()), &ladder, opts) {
        Ok(rep) => {
            let ratio_err = rep
                .condition_report
                .ratios
                .iter()
                .map(|r| (r - 1.0).abs())
                .fold(0.0, f64::max);
            let ball_err = rep
                .ball_integrals
                .iter()
                .map(|b| (b.value - 1.0).abs())
                .fold(0.0, f64::max);
            let violated = rep.condition_report.verdict == parastokes_core::Verdict::Violated;
            pass &= ratio_err <= 1e-6 && ball_err <= 1e-6 && violated && rep.max_residual <= 1e-6;
            notes.push(format!(
                "unit mass: |ratio-1| {ratio_err:.1e}, |ball-1| {ball_err:.1e}, violated {violated}, residual {:.1e}",
                rep.max_residual
            ));
        }
        Err(err) => {
            pass = false;
            notes.push(format!("unit mass: {err}"));
        }
    }

    let pf = RadialField::p_flux(&r3, e);
    let mut pf_err: f64 = 0.0;
    let mut pf_res: f64 = 0.0;
    for r in [1.5, 2.0, 4.0, 8.0, 16.0, 64.0] {
        let b = ball_divergence_integral(&r3, &pf, r).unwrap();
        pf_err = pf_err.max(b.value.abs());
        pf_res = pf_res.max(b.residual);
    }
    pass &= pf_err <= 1e-8 && pf_res <= 1e-6;
    notes.push(format!("p-flux: max |ball| {pf_err:.1e}, residual {pf_res:.1e}"));

    let mut flagged = 0;
    let mut errors = 0;
    let mut residual: f64 = 0.0;
    let mut total = 0;
    for (k, dim) in [2u32, 3, 4].into_iter().enumerate() {
        let m = ModelManifold::euclidean(dim).unwrap();
        let fields = random_fields(&m, 70 + k as u64, 20).unwrap();
        for f in &fields {
            total += 1;
            let cond = if total % 3 == 0 {
                HarnessCondition::Karp
            } else if total % 3 == 1 {
                HarnessCondition::A(GapFunction::default())
            } else {
                HarnessCondition::V(GapFunction::default())
            };
            match theorem_harness(&m, e, f, &cond, &ladder, opts) {
                Ok(rep) => residual = residual.max(rep.max_residual),
                Err(StokesError::TheoremContradiction(_)) => flagged += 1,
                Err(err) => {
                    errors += 1;
                    notes.push(format!("field {}: {err}", f.label));
                }
            }
        }
    }
    pass &= flagged == 0 && errors == 0 && total >= 50 && residual <= 1e-6;
    notes.push(format!(
        "random suite: {total} fields, {flagged} flagged, {errors} errors, residual {residual:.1e}"
    ));

    let cusp = ModelManifold::cusp();
    let pf = RadialField::p_flux(&cusp, e);
    match theorem_harness(
        &cusp,
        e,
        &pf,
        &HarnessCondition::E(Exhaustion::Evans),
        &[0.5, 1.0, 2.0, 4.0],
        opts,
    ) {
        Ok(rep) => notes.push(format!("cusp p-flux under E: {:?}", rep.condition_report.verdict)),
        Err(err) => {
            pass = false;
            notes.push(format!("cusp p-flux: {err}"));
        }
    }
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let two = estimate_cp(2.0, 3, 10_000, 11).unwrap();
    let err2 = (two.estimated_cp - 0.5).abs();
    pass &= err2 <= 1e-12;
    notes.push(format!("C(2) = {} (0.5 +/- 1e-12)", two.estimated_cp));
    for q in [1.5, 3.0] {
        let est = estimate_cp(q, 2, 100_000, 12).unwrap();
        let bad = count_violations(q, 2, 0.99 * est.estimated_cp, 100_000, 13).unwrap();
        pass &= bad == 0;
        notes.push(format!("p={q}: C = {:.6}, fresh violations {bad}", est.estimated_cp));
    }
    let grid_fail = negpart_grid(10_000, 14).len();
    pass &= grid_fail == 0;
    notes.push(format!("negative-part grid failures {grid_fail}/10000"));
    let mut worst: f64 = 0.0;
    for a in [1.0, 4.0, 100.0] {
        let r = tmax_check(a).unwrap();
        worst = worst.max((r.argmax - 2.0 * a).abs());
        pass &= r.increasing_below_argmax;
    }
    pass &= worst <= 1e-9;
    notes.push(format!("max |argmax - 2A| {worst:.1e} (tol 1e-9)"));
    outcome(pass, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let spec = CounterexampleSpec {
        m: 3,
        q: 1.5,
        beta: 0.5,
        h: 4.0,
        gamma: 1.0,
        smoothing_width: 0.1,
    };
    let m = build_counterexample(&spec).unwrap();
    let rep = verify_counterexample(&m, &spec, 1000.0).unwrap();
    let exponent = rep.tail.decay_exponent.unwrap_or(f64::NAN);
    let tail_ok = rep.tail.status == CheckStatus::Pass && (exponent - 2.0).abs() < 1e-12;
    let growth_ok = rep.growth.status == CheckStatus::Fail
        && rep.growth.strictly_increasing
        && rep.growth.tenfold_at.is_some_and(|r| r < 1000.0);
    let vol_ok = rep.volume.status == CheckStatus::Pass && rep.volume.radii == 200;

    let r3 = ModelManifold::euclidean(3).unwrap();
    let params = SobolevParams::euclidean(3, 2.0).unwrap();
    let la = lower_area_check(&params, &r3, &[0.5, 1.0, 2.0, 5.0, 10.0, 100.0], 1e-9).unwrap();
    let const_err = la
        .products
        .iter()
        .map(|v| (v - 1.0 / (4.0 * PI)).abs())
        .fold(0.0, f64::max);
    let t = start.elapsed();
    outcome(
        vol_ok && tail_ok && growth_ok && const_err <= 1e-6 && within(t, Duration::from_secs(10)),
        format!(
            "(i) min V/(gamma r^3) {:.3} over {} radii, (ii) decay exponent {exponent}, \
             (iii) increasing {} tenfold at r = {:?}, Euclidean product err {const_err:.1e}, runtime {t:?}",
            rep.volume.min_ratio, rep.volume.radii, rep.growth.strictly_increasing, rep.growth.tenfold_at
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form energy on the cusp", criterion_1),
        ("asymptotic separation of cutoff energies", criterion_2),
        ("capacity ordering and tightness", criterion_3),
        ("parabolicity table", criterion_4),
        ("Evans potential", criterion_5),
        ("radial optimality", criterion_6),
        ("Stokes harness soundness", criterion_7),
        ("Lindqvist suite", criterion_8),
        ("counterexample verification", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "acceptance {} [{}] {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
