//! One function per scenario command. Each returns the rendered report and
//! whether its verdicts are clean.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use parastokes_core::capacity::CapacityRow;
use parastokes_core::conditions::{check_a, check_e, check_karp, check_v, Exhaustion};
use parastokes_core::cutoffs::energy_sweep;
use parastokes_core::inequalities::{count_violations, estimate_cp, CpEstimate};
use parastokes_core::profiles::parse_radial;
use parastokes_core::report::{to_csv, to_json};
use parastokes_core::sobolev::{build_counterexample, counterexample_rows, verify_counterexample, CounterexampleSpec};
use parastokes_core::stokes::{
    make_unit_mass_field, random_fields, theorem_harness, HarnessCondition, HarnessOptions, StokesError,
};
use parastokes_core::{
    classify_parabolicity, CapacityBounds, Conclusion, ConditionReport, DensityMeaning, Exponent, GapFunction,
    ModelManifold, Parabolicity, RadialDensity, RadialField, RadialProfile, StokesReport, Thresholds, Verdict,
    VolumeConstant,
};

use crate::scenario::{invalid, Command, Format, Scenario};

pub struct Outcome {
    pub text: String,
    /// Reasons the run is inconclusive; empty when clean.
    pub inconclusive: Vec<String>,
}

pub fn run(scn: &Scenario, tol: Option<f64>) -> Result<Outcome> {
    let manifold = match &scn.manifold {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
            Some(ModelManifold::parse(&text).map_err(|e| invalid(path, e.to_string()))?)
        }
        None => None,
    };
    let m = || manifold.as_ref().expect("validated at load");
    match scn.command {
        Command::Analyze => analyze(scn, m()),
        Command::Capacity => capacity(scn, m(), tol.unwrap_or(1e-9)),
        Command::Parabolicity => parabolicity(scn, m()),
        Command::CutoffSweep => cutoff_sweep(scn, m()),
        Command::Condition => condition(scn, m()),
        Command::Stokes => stokes(scn, m(), tol.unwrap_or(HarnessOptions::default().tol)),
        Command::Lindqvist => lindqvist(scn),
        Command::SobolevCounterexample => sobolev_counterexample(scn),
    }
}

/// A scalar or a list.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn exponents(&self) -> Result<Vec<Exponent>> {
        let ps = match self {
            OneOrMany::One(p) => vec![*p],
            OneOrMany::Many(ps) => ps.clone(),
        };
        Ok(ps.into_iter().map(Exponent::new).collect::<Result<_, _>>()?)
    }
}

fn default_p() -> OneOrMany {
    OneOrMany::One(2.0)
}

fn render<B: Serialize, R: Serialize>(scn: &Scenario, body: &B, rows: &[R]) -> Result<String> {
    Ok(match scn.format {
        Format::Json => to_json(scn.command.name(), body)?,
        Format::Csv => to_csv(rows)?,
    })
}

fn require_seed(scn: &Scenario, seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| {
        invalid(
            &scn.file,
            format!("key `params.seed` is required for command `{}`", scn.command.name()),
        )
        .into()
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeParams {
    #[serde(default = "default_p")]
    p: OneOrMany,
    #[serde(default = "default_analyze_radii")]
    radii: Vec<f64>,
}

fn default_analyze_radii() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

#[derive(Serialize)]
struct AnalyzeRadius {
    r: f64,
    area: f64,
    volume: f64,
}

#[derive(Serialize)]
struct AnalyzeBody {
    dim: u32,
    base_radius: f64,
    omega: f64,
    profile: String,
    radii: Vec<AnalyzeRadius>,
    parabolicity: Vec<parastokes_core::ParabolicityVerdict>,
}

fn analyze(scn: &Scenario, m: &ModelManifold) -> Result<Outcome> {
    let p: AnalyzeParams = scn.params()?;
    let volumes = m.volumes_at(&p.radii)?;
    let radii = p
        .radii
        .iter()
        .zip(volumes)
        .map(|(&r, volume)| {
            Ok(AnalyzeRadius {
                r,
                area: m.area(r)?,
                volume,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let parabolicity =
        p.p.exponents()?
            .into_iter()
            .map(|e| classify_parabolicity(m, e))
            .collect::<Result<Vec<_>, _>>()?;
    let inconclusive = undetermined(&parabolicity);
    let body = AnalyzeBody {
        dim: m.dim,
        base_radius: m.base_radius,
        omega: m.omega,
        profile: m.render(),
        radii,
        parabolicity,
    };
    Ok(Outcome {
        text: render::<_, ()>(scn, &body, &[])?,
        inconclusive,
    })
}

fn undetermined(verdicts: &[parastokes_core::ParabolicityVerdict]) -> Vec<String> {
    verdicts
        .iter()
        .filter(|v| v.verdict == Parabolicity::Undetermined)
        .map(|v| format!("parabolicity undetermined for p = {}", v.p))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacityParams {
    #[serde(default = "default_p")]
    p: OneOrMany,
    annuli: Vec<(f64, f64)>,
    #[serde(default = "default_constant")]
    constant: ConstantName,
}

#[derive(Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ConstantName {
    TwoPowP,
    ImprovedP,
}

fn default_constant() -> ConstantName {
    ConstantName::TwoPowP
}

#[derive(Serialize)]
struct CapacityBody {
    tol: f64,
    bounds: Vec<CapacityBounds>,
}

fn capacity(scn: &Scenario, m: &ModelManifold, tol: f64) -> Result<Outcome> {
    let p: CapacityParams = scn.params()?;
    let constant = match p.constant {
        ConstantName::TwoPowP => VolumeConstant::TwoPowP,
        ConstantName::ImprovedP => VolumeConstant::ImprovedP,
    };
    let mut bounds = Vec::new();
    for e in p.p.exponents()? {
        for &(r1, r2) in &p.annuli {
            bounds.push(CapacityBounds::compute(m, e, r1, r2, constant)?);
        }
    }
    let inconclusive = bounds
        .iter()
        .filter(|b| !b.is_consistent(tol))
        .map(|b| format!("bounds below the exact capacity for p = {}, ({}, {})", b.p, b.r1, b.r2))
        .collect();
    let rows: Vec<CapacityRow> = bounds.iter().map(CapacityRow::from).collect();
    Ok(Outcome {
        text: render(scn, &CapacityBody { tol, bounds }, &rows)?,
        inconclusive,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParabolicityParams {
    #[serde(default = "default_p")]
    p: OneOrMany,
}

#[derive(Serialize)]
struct ParabolicityRow {
    p: f64,
    verdict: Parabolicity,
    evans_limit: Option<f64>,
}

#[derive(Serialize)]
struct ParabolicityBody {
    verdicts: Vec<parastokes_core::ParabolicityVerdict>,
}

fn parabolicity(scn: &Scenario, m: &ModelManifold) -> Result<Outcome> {
    let p: ParabolicityParams = scn.params()?;
    let verdicts =
        p.p.exponents()?
            .into_iter()
            .map(|e| classify_parabolicity(m, e))
            .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<ParabolicityRow> = verdicts
        .iter()
        .map(|v| ParabolicityRow {
            p: v.p,
            verdict: v.verdict,
            evans_limit: match &v.certificate {
                parastokes_core::Certificate::FiniteIntegral { value, .. } => *value,
                _ => None,
            },
        })
        .collect();
    let inconclusive = undetermined(&verdicts);
    Ok(Outcome {
        text: render(scn, &ParabolicityBody { verdicts }, &rows)?,
        inconclusive,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    p: f64,
    radii: Vec<f64>,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default)]
    per_unit_sphere: bool,
}

fn default_epsilon() -> f64 {
    1e-3
}

#[derive(Serialize)]
struct SweepBody<'a> {
    p: f64,
    epsilon: f64,
    per_unit_sphere: bool,
    rows: &'a [parastokes_core::cutoffs::SweepRow],
}

fn cutoff_sweep(scn: &Scenario, m: &ModelManifold) -> Result<Outcome> {
    let p: SweepParams = scn.params()?;
    let rows = energy_sweep(m, Exponent::new(p.p)?, &p.radii, p.epsilon, p.per_unit_sphere)?;
    let body = SweepBody {
        p: p.p,
        epsilon: p.epsilon,
        per_unit_sphere: p.per_unit_sphere,
        rows: &rows,
    };
    Ok(Outcome {
        text: render(scn, &body, &rows)?,
        inconclusive: Vec::new(),
    })
}

#[derive(Clone, Copy, Deserialize)]
enum ConditionName {
    E,
    A,
    V,
    #[serde(rename = "karp")]
    Karp,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdParams {
    #[serde(default = "default_support")]
    support: f64,
    #[serde(default = "default_violation")]
    violation: f64,
}

fn default_support() -> f64 {
    Thresholds::default().support
}

fn default_violation() -> f64 {
    Thresholds::default().violation
}

fn thresholds(t: Option<ThresholdParams>) -> Thresholds {
    t.map(|t| Thresholds {
        support: t.support,
        violation: t.violation,
    })
    .unwrap_or_default()
}

#[derive(Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MeaningName {
    AbsX,
    QPower,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionParams {
    condition: ConditionName,
    #[serde(default = "default_p_value")]
    p: f64,
    radii: Vec<f64>,
    /// Segment lines describing the density profile.
    density: String,
    meaning: Option<MeaningName>,
    gap: Option<GapFunction>,
    thresholds: Option<ThresholdParams>,
}

fn default_p_value() -> f64 {
    2.0
}

#[derive(Serialize)]
struct ConditionRow {
    #[serde(rename = "R")]
    r: f64,
    ratio: f64,
}

fn condition_rows(report: &ConditionReport) -> Vec<ConditionRow> {
    report
        .tested_radii
        .iter()
        .zip(&report.ratios)
        .map(|(&r, &ratio)| ConditionRow { r, ratio })
        .collect()
}

fn condition(scn: &Scenario, m: &ModelManifold) -> Result<Outcome> {
    let p: ConditionParams = scn.params()?;
    let e = Exponent::new(p.p)?;
    let profile = parse_radial(&p.density).map_err(|err| invalid(&scn.file, format!("key `params.density`: {err}")))?;
    let meaning = match p.meaning {
        Some(MeaningName::AbsX) => DensityMeaning::AbsX,
        Some(MeaningName::QPower) => DensityMeaning::QPower,
        None if matches!(p.condition, ConditionName::Karp) => DensityMeaning::AbsX,
        None => DensityMeaning::QPower,
    };
    let density = RadialDensity::new(profile, meaning);
    let gap = p.gap.unwrap_or_default();
    let thresholds = thresholds(p.thresholds);
    let report = match p.condition {
        ConditionName::A => check_a(m, e, &density, gap, &p.radii, thresholds)?,
        ConditionName::V => check_v(m, e, &density, gap, &p.radii, thresholds)?,
        ConditionName::E => check_e(m, e, &Exhaustion::Evans, &density, &p.radii, p.gap, thresholds)?,
        ConditionName::Karp => check_karp(m, &density, &p.radii, thresholds)?,
    };
    let inconclusive = match report.verdict {
        Verdict::Inconclusive => vec![format!("condition {:?} inconclusive", report.condition)],
        _ => Vec::new(),
    };
    let rows = condition_rows(&report);
    Ok(Outcome {
        text: render(scn, &report, &rows)?,
        inconclusive,
    })
}

#[derive(Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FieldName {
    UnitMass,
    PFlux,
    Random,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StokesParams {
    field: FieldName,
    #[serde(default = "default_p_value")]
    p: f64,
    radii: Vec<f64>,
    condition: ConditionName,
    gap: Option<GapFunction>,
    /// `(center, half_width, amplitude)` of the unit-mass bump.
    #[serde(default = "default_bump")]
    bump: (f64, f64, f64),
    seed: Option<u64>,
    #[serde(default = "default_count")]
    count: usize,
    thresholds: Option<ThresholdParams>,
}

fn default_bump() -> (f64, f64, f64) {
    (1.0, 0.5, 1.0)
}

fn default_count() -> usize {
    1
}

#[derive(Serialize)]
struct StokesCsvRow {
    field: String,
    #[serde(rename = "R")]
    r: f64,
    ball_integral: f64,
    flux: f64,
    condition_ratio: Option<f64>,
}

#[derive(Serialize)]
struct StokesBody {
    seed: Option<u64>,
    runs: Vec<StokesRun>,
}

#[derive(Serialize)]
struct StokesRun {
    contradiction: bool,
    #[serde(flatten)]
    report: StokesReport,
}

fn stokes(scn: &Scenario, m: &ModelManifold, tol: f64) -> Result<Outcome> {
    let p: StokesParams = scn.params()?;
    let e = Exponent::new(p.p)?;
    let (fields, seed): (Vec<RadialField>, _) = match p.field {
        FieldName::UnitMass => {
            let (c, w, a) = p.bump;
            (vec![make_unit_mass_field(m, &RadialProfile::bump(c, w, a)?)?], None)
        }
        FieldName::PFlux => (vec![RadialField::p_flux(m, e)], None),
        FieldName::Random => {
            let seed = require_seed(scn, p.seed)?;
            (random_fields(m, seed, p.count)?, Some(seed))
        }
    };
    let gap = p.gap.unwrap_or_default();
    let cond = match p.condition {
        ConditionName::E => HarnessCondition::E(Exhaustion::Evans),
        ConditionName::A => HarnessCondition::A(gap),
        ConditionName::V => HarnessCondition::V(gap),
        ConditionName::Karp => HarnessCondition::Karp,
    };
    let opts = HarnessOptions {
        tol,
        thresholds: thresholds(p.thresholds),
    };
    let mut runs = Vec::with_capacity(fields.len());
    let mut inconclusive = Vec::new();
    for field in &fields {
        let (report, contradiction) = match theorem_harness(m, e, field, &cond, &p.radii, opts) {
            Ok(r) => (r, false),
            Err(StokesError::TheoremContradiction(r)) => (*r, true),
            Err(err) => return Err(err.into()),
        };
        if contradiction {
            inconclusive.push(format!(
                "{}: nonzero divergence although the theorem applies",
                report.field
            ));
        } else if let Conclusion::Inconclusive { reason } = &report.conclusion {
            inconclusive.push(format!("{}: {reason}", report.field));
        }
        runs.push(StokesRun { contradiction, report });
    }
    let rows: Vec<StokesCsvRow> = runs
        .iter()
        .flat_map(|run| {
            run.report.rows().into_iter().map(|row| StokesCsvRow {
                field: run.report.field.clone(),
                r: row.r,
                ball_integral: row.ball_integral,
                flux: row.flux,
                condition_ratio: row.condition_ratio,
            })
        })
        .collect();
    Ok(Outcome {
        text: render(scn, &StokesBody { seed, runs }, &rows)?,
        inconclusive,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LindqvistParams {
    p: f64,
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_samples")]
    samples: usize,
    seed: Option<u64>,
    /// Constant to test; violations make the run inconclusive.
    check: Option<f64>,
}

fn default_n() -> usize {
    2
}

fn default_samples() -> usize {
    100_000
}

#[derive(Serialize)]
struct LindqvistBody {
    #[serde(flatten)]
    estimate: CpEstimate,
    check: Option<f64>,
    violations: Option<usize>,
}

fn lindqvist(scn: &Scenario) -> Result<Outcome> {
    let p: LindqvistParams = scn.params()?;
    let seed = require_seed(scn, p.seed)?;
    let estimate = estimate_cp(p.p, p.n, p.samples, seed)?;
    let violations = p
        .check
        .map(|c| count_violations(p.p, p.n, c, p.samples, seed))
        .transpose()?;
    let inconclusive = match violations {
        Some(v) if v > 0 => vec![format!(
            "{v} samples violate the inequality with C = {}",
            p.check.unwrap()
        )],
        _ => Vec::new(),
    };
    let body = LindqvistBody {
        estimate,
        check: p.check,
        violations,
    };
    Ok(Outcome {
        text: render(scn, &body, &[estimate])?,
        inconclusive,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterexampleParams {
    #[serde(default = "default_m")]
    m: u32,
    q: f64,
    beta: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_smoothing")]
    smoothing_width: f64,
    #[serde(default = "default_r_max")]
    r_max: f64,
    #[serde(default = "default_rows")]
    rows: usize,
}

fn default_m() -> u32 {
    3
}

fn default_gamma() -> f64 {
    1.0
}

fn default_smoothing() -> f64 {
    0.1
}

fn default_r_max() -> f64 {
    1000.0
}

fn default_rows() -> usize {
    200
}

fn sobolev_counterexample(scn: &Scenario) -> Result<Outcome> {
    let p: CounterexampleParams = scn.params()?;
    let spec = CounterexampleSpec {
        m: p.m,
        q: p.q,
        beta: p.beta,
        h: p.h,
        gamma: p.gamma,
        smoothing_width: p.smoothing_width,
    };
    spec.validate()
        .map_err(|err| invalid(&scn.file, format!("[params]: {err}")))?;
    let m = build_counterexample(&spec)?;
    let report = verify_counterexample(&m, &spec, p.r_max)?;
    let inconclusive = if report.confirms() {
        Vec::new()
    } else {
        vec![format!("checks do not confirm the counterexample: {}", report.note)]
    };
    let text = match scn.format {
        Format::Json => to_json(scn.command.name(), &report)?,
        Format::Csv => to_csv(&counterexample_rows(&m, &spec, p.r_max, p.rows)?)?,
    };
    Ok(Outcome { text, inconclusive })
}
