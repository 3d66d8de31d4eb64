//! Radial vector fields `X = x(r) ∂_r` and the divergence-theorem harness.
//!
//! Everything runs through the flux `F(r) = x(r) A(r)`: `div X = F'/A`, and
//! `∫_{B_R} div X = F(R) − F(0⁺)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conditions::{
    check_a, check_e, check_karp, check_v, Condition, ConditionError, ConditionReport, DensityMeaning, Exhaustion,
    GapFunction, RadialDensity, Thresholds, Verdict,
};
use crate::geometry::{Exponent, GeometryError, ModelManifold};
use crate::numerics::{integrate_improper, integrate_with_breaks, Convergence, Envelope, TailError, TailModel};
use crate::profiles::RadialProfile;
use crate::radial::{FnRadial, RadialFunction};

/// Integrals start at the pole unless a field says otherwise; quadrature
/// never evaluates the endpoint itself.
pub const DEFAULT_INNER_RADIUS: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StokesError {
    #[error("invalid field: {0}")]
    Field(String),
    #[error("radius must be positive, got {0}")]
    Radius(f64),
    #[error("empty radius ladder")]
    EmptyLadder,
    #[error(
        "theorem contradiction: condition supported and (div X)_- integrable, \
         but the total divergence is nonzero"
    )]
    TheoremContradiction(Box<StokesReport>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Tail(#[from] TailError),
}

/// How the field is specified.
#[derive(Clone)]
pub enum FieldRepr {
    /// The coefficient `x(r)`.
    Coefficient(Arc<dyn RadialFunction>),
    /// The flux `F(r) = x(r) A(r)`.
    Flux(Arc<dyn RadialFunction>),
}

/// `X = x(r) ∂_r` with a declared flux limit at the inner radius.
#[derive(Clone)]
pub struct RadialField {
    pub repr: FieldRepr,
    /// Integrals start here.
    pub inner_radius: f64,
    /// Declared `lim F` at the inner radius (the pole flux).
    pub inner_flux: f64,
    /// Tail model of `(F')_-`, the negative part of `div X` per unit radius.
    pub negative_divergence_tail: Option<TailModel>,
    pub label: String,
}

impl std::fmt::Debug for RadialField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialField")
            .field("label", &self.label)
            .field("inner_radius", &self.inner_radius)
            .field("inner_flux", &self.inner_flux)
            .field("negative_divergence_tail", &self.negative_divergence_tail)
            .finish_non_exhaustive()
    }
}

/// `div X` at a point; `one_sided` marks a stencil that avoided a kink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Divergence {
    pub value: f64,
    pub one_sided: bool,
}

impl RadialField {
    pub fn from_coefficient(x: impl RadialFunction + 'static, label: impl Into<String>) -> Self {
        Self {
            repr: FieldRepr::Coefficient(Arc::new(x)),
            inner_radius: DEFAULT_INNER_RADIUS,
            inner_flux: 0.0,
            negative_divergence_tail: None,
            label: label.into(),
        }
    }

    pub fn from_flux(flux: impl RadialFunction + 'static, label: impl Into<String>) -> Self {
        Self {
            repr: FieldRepr::Flux(Arc::new(flux)),
            inner_radius: DEFAULT_INNER_RADIUS,
            inner_flux: 0.0,
            negative_divergence_tail: None,
            label: label.into(),
        }
    }

    pub fn zero() -> Self {
        let mut f = Self::from_flux(FnRadial::constant(0.0), "zero");
        f.negative_divergence_tail = Some(TailModel::zero(1.0).expect("positive start"));
        f
    }

    pub fn with_inner(mut self, radius: f64, flux: f64) -> Self {
        self.inner_radius = radius;
        self.inner_flux = flux;
        self
    }

    pub fn with_negative_tail(mut self, tail: TailModel) -> Self {
        self.negative_divergence_tail = Some(tail);
        self
    }

    /// `|∇f|^{p-2} ∇f` for the Evans potential: `x = a_p^{p-1} = 1/A`,
    /// flux ≡ 1, integrals from the base radius.
    pub fn p_flux(m: &ModelManifold, e: Exponent) -> Self {
        let (mx, md) = (m.clone(), m.clone());
        let x = FnRadial::new(
            move |r| mx.a_p_unchecked(e, r).powf(e.p - 1.0),
            move |r| {
                let a = md.area_unchecked(r);
                -md.area_derivative(r) / (a * a)
            },
        )
        .with_breakpoints(m.breakpoints(0.0, 1e6));
        let mut f = Self::from_coefficient(x, format!("p-flux field (p = {})", e.p));
        f.inner_radius = m.base_radius;
        f.inner_flux = 1.0;
        f.negative_divergence_tail = Some(TailModel::zero(m.base_radius).expect("positive base"));
        f
    }

    pub fn coefficient(&self, m: &ModelManifold, r: f64) -> f64 {
        match &self.repr {
            FieldRepr::Coefficient(x) => x.value(r),
            FieldRepr::Flux(f) => f.value(r) / m.area_unchecked(r),
        }
    }

    pub fn flux_unchecked(&self, m: &ModelManifold, r: f64) -> f64 {
        match &self.repr {
            FieldRepr::Coefficient(x) => x.value(r) * m.area_unchecked(r),
            FieldRepr::Flux(f) => f.value(r),
        }
    }

    /// `F(R) = x(R) A(∂B_R)`.
    pub fn flux(&self, m: &ModelManifold, r: f64) -> Result<f64, StokesError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(StokesError::Radius(r));
        }
        Ok(self.flux_unchecked(m, r))
    }

    /// Analytic `F'`.
    pub fn flux_derivative(&self, m: &ModelManifold, r: f64) -> f64 {
        match &self.repr {
            FieldRepr::Coefficient(x) => x.derivative(r) * m.area_unchecked(r) + x.value(r) * m.area_derivative(r),
            FieldRepr::Flux(f) => f.derivative(r),
        }
    }

    pub fn breakpoints(&self, m: &ModelManifold, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = m.breakpoints(lo, hi);
        match &self.repr {
            FieldRepr::Coefficient(x) => b.extend(x.breakpoints(lo, hi)),
            FieldRepr::Flux(f) => b.extend(f.breakpoints(lo, hi)),
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Density `|X|^{p/(p-1)}` or `|X|` built from the coefficient.
    pub fn density(&self, m: &ModelManifold, meaning: DensityMeaning, e: Exponent) -> RadialDensity {
        let field = self.clone();
        let manifold = m.clone();
        let power = match meaning {
            DensityMeaning::AbsX => 1.0,
            DensityMeaning::QPower => e.q,
        };
        let breaks = self.breakpoints(m, 0.0, f64::INFINITY);
        RadialDensity::new(
            FnRadial::new(move |r| field.coefficient(&manifold, r).abs().powf(power), |_| f64::NAN)
                .with_breakpoints(breaks),
            meaning,
        )
    }
}

/// `div X(r) = F'(r)/A(r)` by central differences of the flux, with step
/// `1e-5 max(1, r)`; one-sided second-order stencils next to kinks.
pub fn div_radial(m: &ModelManifold, field: &RadialField, r: f64) -> Result<Divergence, StokesError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(StokesError::Radius(r));
    }
    let mut h = 1e-5 * r.max(1.0);
    if r - 2.0 * h <= 0.0 {
        h = 0.25 * r;
    }
    let f = |s: f64| field.flux_unchecked(m, s);
    let kinks = field.breakpoints(m, r - 2.0 * h, r + 2.0 * h);
    let area = m.area_unchecked(r);
    let (d, one_sided) = if kinks.is_empty() {
        ((f(r + h) - f(r - h)) / (2.0 * h), false)
    } else if kinks.iter().all(|&k| k <= r) {
        ((-3.0 * f(r) + 4.0 * f(r + h) - f(r + 2.0 * h)) / (2.0 * h), true)
    } else {
        ((3.0 * f(r) - 4.0 * f(r - h) + f(r - 2.0 * h)) / (2.0 * h), true)
    };
    Ok(Divergence {
        value: d / area,
        one_sided,
    })
}

/// `∫_{B_R} div X` in flux form together with its quadrature cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallIntegral {
    pub radius: f64,
    /// `F(R) − F(0⁺)`.
    pub value: f64,
    /// `∫_{r₀}^R F'` by quadrature.
    pub quadrature: f64,
    pub flux: f64,
    /// `|quadrature − F(R) + F(0⁺)|`.
    pub residual: f64,
}

pub fn ball_divergence_integral(m: &ModelManifold, field: &RadialField, r: f64) -> Result<BallIntegral, StokesError> {
    let flux = field.flux(m, r)?;
    let r0 = field.inner_radius;
    let quadrature = if r > r0 {
        integrate_with_breaks(
            |s| field.flux_derivative(m, s),
            r0,
            r,
            &field.breakpoints(m, r0, r),
            &m.quadrature,
        )
        .map_err(GeometryError::from)?
        .value
    } else {
        0.0
    };
    let value = flux - field.inner_flux;
    Ok(BallIntegral {
        radius: r,
        value,
        quadrature,
        flux,
        residual: (quadrature - value).abs(),
    })
}

/// Field with `div X = bump / ∫ bump·A`, so the total divergence is 1.
pub fn make_unit_mass_field(m: &ModelManifold, bump: &RadialProfile) -> Result<RadialField, StokesError> {
    let end = bump
        .support_end()
        .ok_or_else(|| StokesError::Field("bump must be compactly supported".into()))?;
    let start = bump.piecewise().support_start().max(DEFAULT_INNER_RADIUS);
    let probe = 512;
    for i in 0..=probe {
        let t = start + (end - start) * i as f64 / probe as f64;
        if bump.value(t) < -1e-12 {
            return Err(StokesError::Field(format!("bump is negative at r = {t}")));
        }
    }
    let breaks = bump.piecewise().breakpoints_in(0.0, f64::INFINITY);
    let cumulative = {
        let (m, bump, breaks) = (m.clone(), bump.clone(), breaks.clone());
        move |r: f64| -> f64 {
            if r <= start {
                return 0.0;
            }
            let hi = r.min(end);
            integrate_with_breaks(
                |s| bump.value(s) * m.area_unchecked(s),
                start,
                hi,
                &breaks,
                &m.quadrature,
            )
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
        }
    };
    let total = cumulative(end);
    if !(total > 0.0 && total.is_finite()) {
        return Err(StokesError::Field(format!("bump has mass {total}")));
    }
    let (md, bd) = (m.clone(), bump.clone());
    let flux = FnRadial::new(
        move |r| if r >= end { 1.0 } else { cumulative(r) / total },
        move |r| bd.value(r) * md.area_unchecked(r) / total,
    )
    .with_breakpoints(breaks);
    Ok(RadialField::from_flux(flux, "unit-mass field").with_negative_tail(TailModel::zero(end)?))
}

/// Condition used by [`theorem_harness`].
#[derive(Debug, Clone)]
pub enum HarnessCondition {
    /// Level-set condition with the given exhaustion; the ladder values are
    /// used as levels of the exhaustion.
    E(Exhaustion),
    A(GapFunction),
    V(GapFunction),
    Karp,
}

impl HarnessCondition {
    pub fn condition(&self) -> Condition {
        match self {
            HarnessCondition::E(_) => Condition::E,
            HarnessCondition::A(_) => Condition::A,
            HarnessCondition::V(_) => Condition::V,
            HarnessCondition::Karp => Condition::Karp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnessOptions {
    /// Agreement tolerance for the ladder of ball integrals.
    pub tol: f64,
    pub thresholds: Thresholds,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    Vanishes,
    Nonzero { value: f64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativePart {
    pub verdict: Convergence,
    pub value: Option<f64>,
    pub bounds: Option<(f64, f64)>,
    pub tail: Option<String>,
}

impl NegativePart {
    pub fn finite(&self) -> bool {
        self.verdict == Convergence::Converges
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesReport {
    pub field: String,
    pub p: f64,
    pub ball_integrals: Vec<BallIntegral>,
    pub condition_report: ConditionReport,
    pub neg_part: NegativePart,
    /// Limit estimate from the ladder, before sub-verdicts are taken into
    /// account.
    pub ladder_estimate: Conclusion,
    pub conclusion: Conclusion,
    pub theorem_applies: bool,
    pub inconsistent_with_theorem: bool,
    pub max_residual: f64,
    pub tol: f64,
}

/// One CSV row of a harness run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StokesRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub ball_integral: f64,
    pub flux: f64,
    pub condition_ratio: Option<f64>,
}

impl StokesReport {
    pub fn rows(&self) -> Vec<StokesRow> {
        self.ball_integrals
            .iter()
            .map(|b| StokesRow {
                r: b.radius,
                ball_integral: b.value,
                flux: b.flux,
                condition_ratio: self
                    .condition_report
                    .tested_radii
                    .iter()
                    .position(|&t| t == b.radius)
                    .map(|i| self.condition_report.ratios[i]),
            })
            .collect()
    }
}

/// Limit of the last three ladder values: all small, all equal, or an Aitken
/// Δ² extrapolation.
pub fn ladder_limit(values: &[f64], tol: f64) -> Conclusion {
    if values.len() < 3 {
        return Conclusion::Inconclusive {
            reason: "ladder needs at least three radii".into(),
        };
    }
    let last = &values[values.len() - 3..];
    if last.iter().any(|v| !v.is_finite()) {
        return Conclusion::Inconclusive {
            reason: "non-finite ball integral".into(),
        };
    }
    if last.iter().all(|v| v.abs() <= tol) {
        return Conclusion::Vanishes;
    }
    let (a, b, c) = (last[0], last[1], last[2]);
    if (a - b).abs() <= tol && (b - c).abs() <= tol && (a - c).abs() <= tol {
        return Conclusion::Nonzero { value: c };
    }
    let d1 = b - a;
    let d2 = c - b;
    let denom = d2 - d1;
    if denom == 0.0 || d2 * d1 <= 0.0 || (d2 / d1).abs() >= 1.0 {
        return Conclusion::Inconclusive {
            reason: "ball integrals do not settle along the ladder".into(),
        };
    }
    let limit = c - d2 * d2 / denom;
    if !limit.is_finite() {
        return Conclusion::Inconclusive {
            reason: "extrapolation failed".into(),
        };
    }
    if limit.abs() <= tol {
        Conclusion::Vanishes
    } else {
        Conclusion::Nonzero { value: limit }
    }
}

/// Ball integrals along `radii`, the chosen condition for `|X|`, the
/// integrability of `(div X)_-`, and the resulting conclusion.
///
/// A run where the theorem applies (condition supported and `(div X)_-`
/// integrable) yet the divergence does not vanish returns
/// [`StokesError::TheoremContradiction`].
pub fn theorem_harness(
    m: &ModelManifold,
    e: Exponent,
    field: &RadialField,
    condition: &HarnessCondition,
    radii: &[f64],
    opts: HarnessOptions,
) -> Result<StokesReport, StokesError> {
    if radii.is_empty() {
        return Err(StokesError::EmptyLadder);
    }
    let mut ladder = radii.to_vec();
    ladder.sort_by(f64::total_cmp);
    let ball_integrals = ladder
        .par_iter()
        .map(|&r| ball_divergence_integral(m, field, r))
        .collect::<Result<Vec<_>, _>>()?;
    let max_residual = ball_integrals.iter().map(|b| b.residual).fold(0.0, f64::max);

    let condition_report = match condition {
        HarnessCondition::E(f) => {
            let d = field.density(m, DensityMeaning::QPower, e);
            check_e(m, e, f, &d, &ladder, None, opts.thresholds)?
        }
        HarnessCondition::A(g) => {
            let d = field.density(m, DensityMeaning::QPower, e);
            check_a(m, e, &d, *g, &ladder, opts.thresholds)?
        }
        HarnessCondition::V(g) => {
            let d = field.density(m, DensityMeaning::QPower, e);
            check_v(m, e, &d, *g, &ladder, opts.thresholds)?
        }
        HarnessCondition::Karp => {
            let d = field.density(m, DensityMeaning::AbsX, e);
            check_karp(m, &d, &ladder, opts.thresholds)?
        }
    };

    let neg_part = match &field.negative_divergence_tail {
        None => NegativePart {
            verdict: Convergence::Undetermined,
            value: None,
            bounds: None,
            tail: None,
        },
        Some(tail) => {
            let r0 = field.inner_radius;
            let horizon = crate::numerics::BOUNDED_TAIL_HORIZON * r0.max(tail.valid_from);
            let res = integrate_improper(
                |s| (-field.flux_derivative(m, s)).max(0.0),
                r0,
                tail,
                &field.breakpoints(m, r0, horizon),
                &m.quadrature.with_tolerance(1e-10),
            )
            .map_err(GeometryError::from)?;
            NegativePart {
                verdict: res.verdict,
                value: res.value,
                bounds: res.bounds,
                tail: Some(tail.describe()),
            }
        }
    };

    let values: Vec<f64> = ball_integrals.iter().map(|b| b.value).collect();
    let ladder_estimate = ladder_limit(&values, opts.tol);
    let conclusion = if condition_report.verdict == Verdict::Inconclusive {
        Conclusion::Inconclusive {
            reason: "condition verdict is inconclusive".into(),
        }
    } else if neg_part.verdict == Convergence::Undetermined {
        Conclusion::Inconclusive {
            reason: "integrability of (div X)_- is undetermined".into(),
        }
    } else {
        ladder_estimate.clone()
    };
    let theorem_applies = condition_report.verdict == Verdict::Supported && neg_part.finite();
    let inconsistent = theorem_applies && matches!(conclusion, Conclusion::Nonzero { .. });
    let report = StokesReport {
        field: field.label.clone(),
        p: e.p,
        ball_integrals,
        condition_report,
        neg_part,
        ladder_estimate,
        conclusion,
        theorem_applies,
        inconsistent_with_theorem: inconsistent,
        max_residual,
        tol: opts.tol,
    };
    if inconsistent {
        return Err(StokesError::TheoremContradiction(Box::new(report)));
    }
    Ok(report)
}

/// Seeded family of test fields: signed sums of unit-mass fields (some with
/// zero net mass) and decaying fluxes `c r^j / (1 + r²)^{(j+k)/2}`.
pub fn random_fields(m: &ModelManifold, seed: u64, count: usize) -> Result<Vec<RadialField>, StokesError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i % 2 == 0 {
            let n = rng.random_range(1..=3usize);
            let mut cursor = 1.0;
            let mut parts = Vec::new();
            for _ in 0..n {
                let w = rng.random_range(0.2..0.5);
                let c = cursor + w + rng.random_range(0.0..1.0);
                cursor = c + w;
                parts.push((c, w, rng.random_range(-2.0..2.0)));
            }
            if rng.random_bool(0.5) {
                let head: f64 = parts[..n - 1].iter().map(|p| p.2).sum();
                if n == 1 {
                    parts[0].2 = 0.0;
                } else {
                    parts[n - 1].2 = -head;
                }
            }
            out.push(bump_sum_field(m, &parts)?);
        } else {
            let c = rng.random_range(-2.0..2.0);
            let j = rng.random_range(1..=3) as f64;
            let k = rng.random_range(1.0..3.0);
            out.push(decaying_flux_field(c, j, k)?);
        }
    }
    Ok(out)
}

/// `F = Σ a_i F_i` with `F_i` the unit-mass flux of a bump `(center, half_width)`.
pub fn bump_sum_field(m: &ModelManifold, parts: &[(f64, f64, f64)]) -> Result<RadialField, StokesError> {
    let mut fields = Vec::with_capacity(parts.len());
    let mut end: f64 = DEFAULT_INNER_RADIUS;
    for &(c, w, _) in parts {
        let bump = RadialProfile::bump(c, w, 1.0).map_err(|e| StokesError::Field(e.to_string()))?;
        fields.push(make_unit_mass_field(m, &bump)?);
        end = end.max(c + w);
    }
    let weights: Vec<f64> = parts.iter().map(|p| p.2).collect();
    let (fv, wv) = (fields.clone(), weights.clone());
    let (fd, wd) = (fields.clone(), weights.clone());
    let breaks: Vec<f64> = fields
        .iter()
        .flat_map(|f| match &f.repr {
            FieldRepr::Flux(g) => g.breakpoints(0.0, f64::INFINITY),
            FieldRepr::Coefficient(x) => x.breakpoints(0.0, f64::INFINITY),
        })
        .collect();
    let flux_of = |f: &RadialField, r: f64, d: bool| match &f.repr {
        FieldRepr::Flux(g) if d => g.derivative(r),
        FieldRepr::Flux(g) => g.value(r),
        FieldRepr::Coefficient(_) => f64::NAN,
    };
    let flux = FnRadial::new(
        move |r| fv.iter().zip(&wv).map(|(f, w)| w * flux_of(f, r, false)).sum(),
        move |r| fd.iter().zip(&wd).map(|(f, w)| w * flux_of(f, r, true)).sum(),
    )
    .with_breakpoints(breaks);
    let label = format!(
        "bump sum {:?}",
        parts.iter().map(|p| (p.0, p.1, p.2)).collect::<Vec<_>>()
    );
    Ok(RadialField::from_flux(flux, label).with_negative_tail(TailModel::zero(end)?))
}

/// `F = c r^j / (1 + r²)^{(j+k)/2}`, which decays like `c r^{-k}`.
pub fn decaying_flux_field(c: f64, j: f64, k: f64) -> Result<RadialField, StokesError> {
    if !(k > 0.0 && j > 0.0) {
        return Err(StokesError::Field("decaying flux needs j > 0 and k > 0".into()));
    }
    let s = 0.5 * (j + k);
    let flux = FnRadial::new(
        move |r| c * r.powf(j) * (1.0 + r * r).powf(-s),
        move |r| {
            let q = 1.0 + r * r;
            c * (j * r.powf(j - 1.0) * q.powf(-s) - 2.0 * s * r.powf(j + 1.0) * q.powf(-s - 1.0))
        },
    );
    // |(F')_-| <= |c| (j + k) r^{-k-1}
    let tail = TailModel::bounded(
        Envelope::Power {
            coefficient: 0.0,
            exponent: 0.0,
        },
        Envelope::Power {
            coefficient: c.abs() * (j + k),
            exponent: -k - 1.0,
        },
        1.0,
    )?;
    Ok(RadialField::from_flux(flux, format!("decaying flux c={c} j={j} k={k}")).with_negative_tail(tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn euclidean_divergences() {
        let r3 = ModelManifold::euclidean(3).unwrap();
        let x = RadialField::from_coefficient(FnRadial::new(|r| r, |_| 1.0), "r d_r");
        assert_relative_eq!(div_radial(&r3, &x, 2.0).unwrap().value, 3.0, max_relative = 1e-8);
        assert_relative_eq!(x.flux(&r3, 1.0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        let pf = RadialField::p_flux(&r3, p(2.0));
        assert!(div_radial(&r3, &pf, 2.0).unwrap().value.abs() < 1e-9);
        let zero = RadialField::zero();
        assert_eq!(div_radial(&r3, &zero, 2.0).unwrap().value, 0.0);
        assert_eq!(ball_divergence_integral(&r3, &zero, 5.0).unwrap().value, 0.0);
    }

    #[test]
    fn p_flux_is_constant() {
        for m in [ModelManifold::euclidean(3).unwrap(), ModelManifold::cusp()] {
            for q in [1.5, 2.0, 3.0] {
                let f = RadialField::p_flux(&m, p(q));
                for r in [1.5, 2.0, 5.0] {
                    assert!((f.flux(&m, r).unwrap() - 1.0).abs() < 1e-12);
                    let b = ball_divergence_integral(&m, &f, r).unwrap();
                    assert!(b.value.abs() < 1e-12 && b.residual < 1e-10);
                }
            }
        }
    }

    #[test]
    fn unit_mass() {
        let m = ModelManifold::euclidean(3).unwrap();
        let bump = RadialProfile::bump(2.0, 0.5, 1.0).unwrap();
        let f = make_unit_mass_field(&m, &bump).unwrap();
        let b = ball_divergence_integral(&m, &f, 4.0).unwrap();
        assert_relative_eq!(b.value, 1.0, max_relative = 1e-12);
        assert!(b.residual < 1e-10);
        let total = {
            let q =
                integrate_with_breaks(|s| bump.value(s) * m.area_unchecked(s), 1.5, 2.5, &[], &m.quadrature).unwrap();
            q.value
        };
        for i in 1..100 {
            let r = 1.5 + i as f64 / 100.0;
            let d = div_radial(&m, &f, r).unwrap().value;
            assert!((d - bump.value(r) / total).abs() < 1e-6);
        }
        let f2 = bump_sum_field(&m, &[(2.0, 0.5, 0.5), (4.0, 0.5, 0.5)]).unwrap();
        assert_relative_eq!(
            ball_divergence_integral(&m, &f2, 3.0).unwrap().value,
            0.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            ball_divergence_integral(&m, &f2, 6.0).unwrap().value,
            1.0,
            max_relative = 1e-12
        );
        assert!(make_unit_mass_field(&m, &RadialProfile::constant(0.0)).is_err());
    }

    #[test]
    fn harness_examples() {
        let e = p(2.0);
        let cusp = ModelManifold::cusp();
        let pf = RadialField::p_flux(&cusp, e);
        let rep = theorem_harness(
            &cusp,
            e,
            &pf,
            &HarnessCondition::E(Exhaustion::Evans),
            &[0.5, 1.0, 2.0, 4.0, 8.0],
            HarnessOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.conclusion, Conclusion::Vanishes);
        assert_eq!(rep.condition_report.verdict, Verdict::Violated);
        assert!(!rep.theorem_applies);

        let r3 = ModelManifold::euclidean(3).unwrap();
        let um = make_unit_mass_field(&r3, &RadialProfile::bump(1.5, 0.5, 1.0).unwrap()).unwrap();
        let radii: Vec<f64> = (2..10).map(|k| 2f64.powi(k)).collect();
        let rep = theorem_harness(
            &r3,
            e,
            &um,
            &HarnessCondition::A(GapFunction::default()),
            &radii,
            HarnessOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.condition_report.verdict, Verdict::Violated);
        match rep.conclusion {
            Conclusion::Nonzero { value } => assert_relative_eq!(value, 1.0, max_relative = 1e-9),
            c => panic!("{c:?}"),
        }

        let zero_net = bump_sum_field(&r3, &[(1.5, 0.4, 1.0), (3.0, 0.4, -1.0)]).unwrap();
        let rep = theorem_harness(
            &r3,
            e,
            &zero_net,
            &HarnessCondition::A(GapFunction::default()),
            &radii,
            HarnessOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.condition_report.verdict, Verdict::Supported);
        assert_eq!(rep.conclusion, Conclusion::Vanishes);
    }

    #[test]
    fn aitken_limits() {
        let v: Vec<f64> = (0..6).map(|k| 2.0 + 0.5f64.powi(k)).collect();
        match ladder_limit(&v, 1e-9) {
            Conclusion::Nonzero { value } => assert_relative_eq!(value, 2.0, max_relative = 1e-12),
            c => panic!("{c:?}"),
        }
        assert_eq!(
            ladder_limit(&[1.0, -1.0, 1.0], 1e-6),
            Conclusion::Inconclusive {
                reason: "ball integrals do not settle along the ladder".into()
            }
        );
    }

    #[test]
    fn decaying_field_vanishes() {
        let r3 = ModelManifold::euclidean(3).unwrap();
        let f = decaying_flux_field(1.3, 2.0, 1.5).unwrap();
        let radii: Vec<f64> = (1..=10).map(|k| 2f64.powi(k)).collect();
        let rep = theorem_harness(
            &r3,
            p(2.0),
            &f,
            &HarnessCondition::A(GapFunction::default()),
            &radii,
            HarnessOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.ladder_estimate, Conclusion::Vanishes);
        assert!(rep.neg_part.finite());
        assert!(rep.max_residual < 1e-8);
    }
}
