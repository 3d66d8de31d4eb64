//! Integral decay conditions for radial densities, evaluated along a finite
//! radius sequence.
//!
//! A liminf over `R → ∞` cannot be computed; every verdict here describes the
//! tested sequence only.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Exponent, GeometryError, ModelManifold};
use crate::numerics::{integrate_with_breaks, invert_nondecreasing};
use crate::radial::RadialFunction;

pub const LIMINF_QUALIFIER: &str =
    "verdict describes the tested radius sequence only; it is not a statement about the liminf";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("condition {condition:?} needs a density of meaning {expected:?}")]
    Meaning {
        condition: Condition,
        expected: DensityMeaning,
    },
    #[error("gap function must be positive, got g({at}) = {value}")]
    Gap { at: f64, value: f64 },
    #[error("no radii to test")]
    NoRadii,
    #[error("radius must be positive, got {0}")]
    Radius(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    E,
    A,
    V,
    Karp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMeaning {
    /// `|X|`
    AbsX,
    /// `|X|^{p/(p-1)}`
    QPower,
}

/// A non-negative radial density per unit volume.
#[derive(Clone)]
pub struct RadialDensity {
    pub profile: Arc<dyn RadialFunction>,
    pub meaning: DensityMeaning,
}

impl RadialDensity {
    pub fn new(profile: impl RadialFunction + 'static, meaning: DensityMeaning) -> Self {
        Self {
            profile: Arc::new(profile),
            meaning,
        }
    }

    fn require(&self, condition: Condition, expected: DensityMeaning) -> Result<(), ConditionError> {
        if self.meaning != expected {
            return Err(ConditionError::Meaning { condition, expected });
        }
        Ok(())
    }
}

impl std::fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialDensity")
            .field("meaning", &self.meaning)
            .finish_non_exhaustive()
    }
}

/// Width `g(R)` of the shell `[R, R + g(R)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapFunction {
    /// `c R`
    Proportional { c: f64 },
    /// `c`
    Constant { c: f64 },
    /// `c R^k`
    Power { c: f64, exponent: f64 },
}

impl Default for GapFunction {
    fn default() -> Self {
        GapFunction::Proportional { c: 1.0 }
    }
}

impl GapFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            GapFunction::Proportional { c } => c * r,
            GapFunction::Constant { c } => c,
            GapFunction::Power { c, exponent } => c * r.powf(exponent),
        }
    }

    pub fn description(&self) -> String {
        match *self {
            GapFunction::Proportional { c } => format!("g(R) = {c} R"),
            GapFunction::Constant { c } => format!("g(R) = {c}"),
            GapFunction::Power { c, exponent } => format!("g(R) = {c} R^{exponent}"),
        }
    }

    fn checked(&self, r: f64) -> Result<f64, ConditionError> {
        let value = self.eval(r);
        if !(value > 0.0 && value.is_finite()) {
            return Err(ConditionError::Gap { at: r, value });
        }
        Ok(value)
    }
}

/// Multipliers applied to the first ratio to obtain the decision thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub support: f64,
    pub violation: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            support: 1e-3,
            violation: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Supported,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusFailure {
    pub radius: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub tested_radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub achieved_inf: f64,
    pub verdict: Verdict,
    pub gap_function_description: String,
    pub support_threshold: f64,
    pub violation_threshold: f64,
    /// Theil-Sen slope of `ln ratio` against `ln R` over positive ratios.
    pub trend_slope: Option<f64>,
    pub failures: Vec<RadiusFailure>,
    pub notes: Vec<String>,
    pub qualifier: &'static str,
}

impl ConditionReport {
    fn assemble(
        condition: Condition,
        gap_description: String,
        thresholds: Thresholds,
        outcomes: Vec<(f64, Result<f64, ConditionError>)>,
        notes: Vec<String>,
    ) -> Self {
        let mut radii = Vec::new();
        let mut ratios = Vec::new();
        let mut failures = Vec::new();
        for (r, outcome) in outcomes {
            match outcome {
                Ok(v) if v.is_finite() => {
                    radii.push(r);
                    ratios.push(v);
                }
                Ok(v) => failures.push(RadiusFailure {
                    radius: r,
                    message: format!("non-finite ratio {v}"),
                }),
                Err(e) => failures.push(RadiusFailure {
                    radius: r,
                    message: e.to_string(),
                }),
            }
        }
        let achieved_inf = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let initial = ratios.first().copied().unwrap_or(f64::NAN);
        let support_threshold = thresholds.support * initial;
        let violation_threshold = thresholds.violation * initial;
        let trend_slope = theil_sen_log_slope(&radii, &ratios);
        let verdict = if !failures.is_empty() || ratios.len() < 2 {
            Verdict::Inconclusive
        } else {
            let last = *ratios.last().expect("non-empty");
            let trending = last == 0.0 || trend_slope.is_some_and(|s| s < 0.0);
            let tail = &ratios[ratios.len() / 2..];
            if achieved_inf <= support_threshold && trending {
                Verdict::Supported
            } else if initial > 0.0 && tail.iter().all(|&v| v >= violation_threshold) {
                Verdict::Violated
            } else {
                Verdict::Inconclusive
            }
        };
        Self {
            condition,
            tested_radii: radii,
            ratios,
            achieved_inf,
            verdict,
            gap_function_description: gap_description,
            support_threshold,
            violation_threshold,
            trend_slope,
            failures,
            notes,
            qualifier: LIMINF_QUALIFIER,
        }
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Median of pairwise slopes of `(ln R, ln ratio)` over positive ratios.
pub fn theil_sen_log_slope(radii: &[f64], ratios: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(ratios)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&r, &v)| (r.ln(), v.ln()))
        .collect();
    let mut slopes = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = pts[j].0 - pts[i].0;
            if dx != 0.0 {
                slopes.push((pts[j].1 - pts[i].1) / dx);
            }
        }
    }
    median(slopes)
}

fn check_radii(radii: &[f64]) -> Result<(), ConditionError> {
    if radii.is_empty() {
        return Err(ConditionError::NoRadii);
    }
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
        return Err(ConditionError::Radius(r));
    }
    Ok(())
}

fn breaks(m: &ModelManifold, extra: &dyn RadialFunction, a: f64, b: f64) -> Vec<f64> {
    let mut v = m.breakpoints(a, b);
    v.extend(extra.breakpoints(a, b));
    v
}

/// `∫_a^b density · A`.
fn mass(m: &ModelManifold, density: &RadialDensity, a: f64, b: f64) -> Result<f64, ConditionError> {
    let d = density.profile.as_ref();
    let q = integrate_with_breaks(
        |s| d.value(s) * m.area_unchecked(s),
        a,
        b,
        &breaks(m, d, a, b),
        &m.quadrature,
    )
    .map_err(GeometryError::from)?;
    Ok(q.value)
}

/// `(∫_R^{R+g} f A) / (∫_R^{R+g} a_p)`.
pub fn check_a(
    m: &ModelManifold,
    e: Exponent,
    density: &RadialDensity,
    gap: GapFunction,
    radii: &[f64],
    thresholds: Thresholds,
) -> Result<ConditionReport, ConditionError> {
    density.require(Condition::A, DensityMeaning::QPower)?;
    check_radii(radii)?;
    let outcomes = radii
        .par_iter()
        .map(|&r| {
            let ratio = (|| {
                let g = gap.checked(r)?;
                Ok(mass(m, density, r, r + g)? / m.a_p_integral(e, r, r + g)?)
            })();
            (r, ratio)
        })
        .collect();
    Ok(ConditionReport::assemble(
        Condition::A,
        gap.description(),
        thresholds,
        outcomes,
        Vec::new(),
    ))
}

/// `∫_R^{R+g} (t / V(t))^{1/(p-1)} dt`.
pub fn volume_kernel_integral(m: &ModelManifold, e: Exponent, a: f64, b: f64) -> Result<f64, GeometryError> {
    let va = m.volume(a)?;
    let q = integrate_with_breaks(
        |t| {
            let v = va + m.shell_volume(a, t).unwrap_or(f64::NAN);
            (t / v).powf(1.0 / (e.p - 1.0))
        },
        a,
        b,
        &m.breakpoints(a, b),
        &m.quadrature,
    )?;
    Ok(q.value)
}

/// Like [`check_a`] with the volume kernel `(t/V(t))^{1/(p-1)}` in the
/// denominator.
pub fn check_v(
    m: &ModelManifold,
    e: Exponent,
    density: &RadialDensity,
    gap: GapFunction,
    radii: &[f64],
    thresholds: Thresholds,
) -> Result<ConditionReport, ConditionError> {
    density.require(Condition::V, DensityMeaning::QPower)?;
    check_radii(radii)?;
    let outcomes = radii
        .par_iter()
        .map(|&r| {
            let ratio = (|| {
                let g = gap.checked(r)?;
                Ok(mass(m, density, r, r + g)? / volume_kernel_integral(m, e, r, r + g)?)
            })();
            (r, ratio)
        })
        .collect();
    Ok(ConditionReport::assemble(
        Condition::V,
        gap.description(),
        thresholds,
        outcomes,
        Vec::new(),
    ))
}

/// Exhaustion function used by [`check_e`].
#[derive(Clone)]
pub enum Exhaustion {
    /// `f(r) = ∫_{base}^r a_p`.
    Evans,
    /// Any nondecreasing unbounded radial function.
    Custom(Arc<dyn RadialFunction>),
}

impl std::fmt::Debug for Exhaustion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exhaustion::Evans => f.write_str("Evans"),
            Exhaustion::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Radius where the exhaustion reaches `level`.
fn level_radius(m: &ModelManifold, e: Exponent, f: &Exhaustion, level: f64) -> Result<f64, ConditionError> {
    match f {
        Exhaustion::Evans => Ok(m.evans(e).level_radius(level)?),
        Exhaustion::Custom(f) => {
            const LIMIT: f64 = 1e12;
            invert_nondecreasing(|s| f.value(s), level, 1e-9, 1.0, LIMIT).ok_or(ConditionError::Geometry(
                GeometryError::LevelNotAttained { level, limit: LIMIT },
            ))
        }
    }
}

/// `(1/g(r)) (∫_G |∇f|^p)^{1/p} (∫_G density)^{(p-1)/p}` over
/// `G(r) = f^{-1}[r, r + g(r))`. With the default `g(r) = r`, `G` is the
/// level annulus `C(r) = f^{-1}[r, 2r)`.
pub fn check_e(
    m: &ModelManifold,
    e: Exponent,
    exhaustion: &Exhaustion,
    density: &RadialDensity,
    radii: &[f64],
    gap: Option<GapFunction>,
    thresholds: Thresholds,
) -> Result<ConditionReport, ConditionError> {
    density.require(Condition::E, DensityMeaning::QPower)?;
    check_radii(radii)?;
    let gap = gap.unwrap_or_default();
    let evans = matches!(exhaustion, Exhaustion::Evans);
    let outcomes: Vec<(f64, Result<_, ConditionError>)> = radii
        .par_iter()
        .map(|&r| {
            let out = (|| {
                let g = gap.checked(r)?;
                let lo = level_radius(m, e, exhaustion, r)?;
                let hi = level_radius(m, e, exhaustion, r + g)?;
                let numeric = match exhaustion {
                    Exhaustion::Evans => gradient_energy(m, e, &m.evans(e), lo, hi)?,
                    Exhaustion::Custom(f) => gradient_energy(m, e, f.as_ref(), lo, hi)?,
                };
                let energy = if evans { g } else { numeric };
                let dens = mass(m, density, lo, hi)?;
                let ratio = energy.powf(1.0 / e.p) * dens.powf((e.p - 1.0) / e.p) / g;
                let deviation = if evans { (numeric - g).abs() / g } else { 0.0 };
                Ok((ratio, deviation))
            })();
            (r, out)
        })
        .collect();
    let mut notes = Vec::new();
    if evans {
        let worst = outcomes
            .iter()
            .filter_map(|(_, o)| o.as_ref().ok().map(|x| x.1))
            .fold(0.0, f64::max);
        notes.push(format!(
            "exhaustion is the Evans potential: closed form ∫_G |∇f|^p = g(r) used; \
             largest relative deviation of the quadrature value {worst:.3e}"
        ));
    }
    let outcomes = outcomes.into_iter().map(|(r, o)| (r, o.map(|x| x.0))).collect();
    Ok(ConditionReport::assemble(
        Condition::E,
        gap.description(),
        thresholds,
        outcomes,
        notes,
    ))
}

/// `∫_a^b |f'|^p A`.
pub fn gradient_energy<F: RadialFunction + ?Sized>(
    m: &ModelManifold,
    e: Exponent,
    f: &F,
    a: f64,
    b: f64,
) -> Result<f64, GeometryError> {
    let mut br = m.breakpoints(a, b);
    br.extend(f.breakpoints(a, b));
    let q = integrate_with_breaks(
        |s| f.derivative(s).abs().powf(e.p) * m.area_unchecked(s),
        a,
        b,
        &br,
        &m.quadrature,
    )?;
    Ok(q.value)
}

/// `(1/R) ∫_R^{2R} |X| A`.
pub fn check_karp(
    m: &ModelManifold,
    density: &RadialDensity,
    radii: &[f64],
    thresholds: Thresholds,
) -> Result<ConditionReport, ConditionError> {
    density.require(Condition::Karp, DensityMeaning::AbsX)?;
    check_radii(radii)?;
    let outcomes = radii
        .par_iter()
        .map(|&r| (r, mass(m, density, r, 2.0 * r).map(|v| v / r)))
        .collect();
    Ok(ConditionReport::assemble(
        Condition::Karp,
        "B_{2R} minus B_R".to_string(),
        thresholds,
        outcomes,
        Vec::new(),
    ))
}
