//! Area decay forced by a Euclidean-type Sobolev inequality, and a model with
//! Euclidean volume growth and `a_q ∈ L¹` on which that decay fails.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{unit_sphere_area, Exponent, GeometryError, ModelManifold};
use crate::numerics::{integrate_with_breaks, Convergence, Envelope, TailKind};
use crate::profiles::{AlternatingPattern, Segment, SegmentKind, WarpingProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SobolevError {
    #[error("infeasible parameters, {constraint}: {detail}")]
    Infeasible { constraint: &'static str, detail: String },
    #[error("invalid radii: {0}")]
    Radii(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn infeasible(constraint: &'static str, detail: String) -> SobolevError {
    SobolevError::Infeasible { constraint, detail }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// `‖u‖_{p} ≤ S_M ‖∇u‖_q` with `p = mq/(m−q)`, and `V(B_r) ≥ γ r^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevParams {
    pub m: u32,
    pub q: f64,
    pub p_sob: f64,
    pub s_m: f64,
    pub gamma: f64,
}

impl SobolevParams {
    pub fn new(m: u32, q: f64, s_m: f64, gamma: f64) -> Result<Self, SobolevError> {
        if !(q > 1.0 && q < m as f64) {
            return Err(infeasible("1 < q < m", format!("q = {q}, m = {m}")));
        }
        if !(s_m > 0.0 && s_m.is_finite()) {
            return Err(infeasible("S_M > 0", format!("S_M = {s_m}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(infeasible("gamma > 0", format!("gamma = {gamma}")));
        }
        let mf = m as f64;
        Ok(Self {
            m,
            q,
            p_sob: mf * q / (mf - q),
            s_m,
            gamma,
        })
    }

    /// Flat `ℝ^m` with the sharp constant and `γ` the unit-ball volume.
    pub fn euclidean(m: u32, q: f64) -> Result<Self, SobolevError> {
        let s = euclidean_sobolev_constant(m, q)?;
        Self::new(m, q, s, unit_sphere_area(m) / m as f64)
    }

    pub fn exponent(&self) -> Exponent {
        Exponent::new(self.q).expect("q > 1")
    }

    /// `C_S = γ^{−(m−q)/(m(q−1))} S_M^{q/(q−1)}`.
    pub fn area_constant(&self) -> f64 {
        let (m, q) = (self.m as f64, self.q);
        self.gamma.powf(-(m - q) / (m * (q - 1.0))) * self.s_m.powf(q / (q - 1.0))
    }
}

/// Sharp constant of `‖u‖_{mq/(m−q)} ≤ S ‖∇u‖_q` on `ℝ^m`.
pub fn euclidean_sobolev_constant(m: u32, q: f64) -> Result<f64, SobolevError> {
    let n = m as f64;
    if !(q > 1.0 && q < n) {
        return Err(infeasible("1 < q < m", format!("q = {q}, m = {m}")));
    }
    let g = libm::tgamma;
    let ratio = g(1.0 + n / 2.0) * g(n) / (g(n / q) * g(1.0 + n - n / q));
    Ok(std::f64::consts::PI.powf(-0.5)
        * n.powf(-1.0 / q)
        * ((q - 1.0) / (n - q)).powf(1.0 - 1.0 / q)
        * ratio.powf(1.0 / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityRelation {
    /// `V(B_{r1})^{q/p}`
    pub lhs: f64,
    /// `S_M^q / (∫_{r1}^{r2} a_q)^{q−1}`
    pub rhs: f64,
    pub holds: bool,
}

/// Volume against capacity. `r2 = ∞` is allowed; a divergent `∫ a_q` then
/// drives the right side to 0 and the relation fails.
pub fn sobolev_capacity_relation(
    params: &SobolevParams,
    m: &ModelManifold,
    r1: f64,
    r2: f64,
    tol: f64,
) -> Result<CapacityRelation, SobolevError> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(SobolevError::Radii(format!("need 0 < r1 < r2, got ({r1}, {r2})")));
    }
    let e = params.exponent();
    let lhs = m.volume(r1)?.powf(params.q / params.p_sob);
    let integral = if r2.is_finite() {
        Some(m.a_p_integral(e, r1, r2)?)
    } else {
        let res = m.a_p_improper(e, r1)?;
        match res.verdict {
            Convergence::Diverges => None,
            Convergence::Converges => Some(res.value.unwrap_or_else(|| res.bounds.expect("bounds").0)),
            Convergence::Undetermined => return Err(SobolevError::Radii("tail of a_q is undetermined".into())),
        }
    };
    let rhs = match integral {
        Some(i) => params.s_m.powf(params.q) / i.powf(params.q - 1.0),
        None => 0.0,
    };
    Ok(CapacityRelation {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerAreaReport {
    pub c_s: f64,
    pub radii: Vec<f64>,
    /// `r^{(m−q)/(q−1)} ∫_r^∞ a_q`
    pub products: Vec<f64>,
    pub max_product: f64,
    pub status: CheckStatus,
    pub note: Option<String>,
}

/// `r^{(m−q)/(q−1)} ∫_r^∞ a_q ≤ C_S` on `r_grid`.
pub fn lower_area_check(
    params: &SobolevParams,
    m: &ModelManifold,
    r_grid: &[f64],
    tol: f64,
) -> Result<LowerAreaReport, SobolevError> {
    let e = params.exponent();
    let c_s = params.area_constant();
    let kappa = (params.m as f64 - params.q) / (params.q - 1.0);
    let results = r_grid
        .par_iter()
        .map(|&r| m.a_p_improper(e, r).map(|res| (r, res)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut products = Vec::with_capacity(results.len());
    let mut note = None;
    let mut status = CheckStatus::Pass;
    for (r, res) in results {
        match res.verdict {
            Convergence::Converges => {
                let (lo, hi) = res.bounds.unwrap_or((f64::NAN, f64::NAN));
                let value = res.value.unwrap_or(0.5 * (lo + hi));
                let prod = r.powf(kappa) * value;
                products.push(prod);
                // with an enclosure, only its lower end decides a failure
                if r.powf(kappa) * lo.min(value) > c_s * (1.0 + tol) {
                    status = CheckStatus::Fail;
                } else if status == CheckStatus::Pass && prod > c_s * (1.0 + tol) {
                    status = CheckStatus::Inconclusive;
                    note = Some(format!("enclosure straddles C_S at r = {r}"));
                }
            }
            Convergence::Diverges => {
                products.push(f64::INFINITY);
                status = CheckStatus::Fail;
                note = Some("a_q is not integrable; the product is infinite".into());
            }
            Convergence::Undetermined => {
                products.push(f64::NAN);
                if status == CheckStatus::Pass {
                    status = CheckStatus::Inconclusive;
                }
                note = Some("tail of a_q is undetermined".into());
            }
        }
    }
    let max_product = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LowerAreaReport {
        c_s,
        radii: r_grid.to_vec(),
        products,
        max_product,
        status,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleSpec {
    pub m: u32,
    pub q: f64,
    pub beta: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub gamma: f64,
    pub smoothing_width: f64,
}

impl CounterexampleSpec {
    pub fn beta_interval(&self) -> (f64, f64) {
        let m = self.m as f64;
        ((self.q - 1.0) / (m - 1.0), (m - self.q) / (m - 1.0))
    }

    /// `(1/4) (m 10^m γ / ω_{m−1})^{1/(m−1)}`, with `ω_{m−1}` the Euclidean unit
    /// sphere area.
    pub fn h_threshold(&self) -> f64 {
        let m = self.m as f64;
        0.25 * (m * 10f64.powf(m) * self.gamma / unit_sphere_area(self.m)).powf(1.0 / (m - 1.0))
    }

    pub fn validate(&self) -> Result<(), SobolevError> {
        let m = self.m as f64;
        if self.m < 2 {
            return Err(infeasible("m >= 2", format!("m = {}", self.m)));
        }
        if !(self.q > 1.0 && self.q < 0.5 * (m + 1.0)) {
            return Err(infeasible(
                "1 < q < (m+1)/2",
                format!("q = {}, upper bound {}", self.q, 0.5 * (m + 1.0)),
            ));
        }
        let (lo, hi) = self.beta_interval();
        if !(self.beta > lo && self.beta < hi) {
            return Err(infeasible(
                "(q-1)/(m-1) < beta < (m-q)/(m-1)",
                format!("beta = {} outside ({lo}, {hi})", self.beta),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(infeasible("gamma > 0", format!("gamma = {}", self.gamma)));
        }
        let threshold = self.h_threshold();
        if !(self.h > threshold && self.h.is_finite()) {
            return Err(infeasible(
                "H > (1/4)(m 10^m gamma / A(unit sphere))^{1/(m-1)}",
                format!("H = {} not above {threshold}", self.h),
            ));
        }
        if !(self.smoothing_width > 0.0 && self.smoothing_width <= 1.0) {
            return Err(infeasible(
                "0 < smoothing width <= 1",
                format!("width = {}", self.smoothing_width),
            ));
        }
        Ok(())
    }

    fn pattern(&self) -> AlternatingPattern {
        AlternatingPattern {
            beta: self.beta,
            slope: self.h,
            width: self.smoothing_width,
        }
    }
}

/// Model with `h = H t` on `[4k+1, 4k+2]`, `h = t^β` on `[4k+3, 4k+4]` and
/// smoothstep gluing in between.
pub fn build_counterexample(spec: &CounterexampleSpec) -> Result<ModelManifold, SobolevError> {
    spec.validate()?;
    let pattern = spec.pattern();
    let mut profile = WarpingProfile::new(vec![Segment::new(
        SegmentKind::Alternating(pattern),
        0.0,
        f64::INFINITY,
    )])
    .map_err(GeometryError::from)?;
    profile.smoothing_width = Some(spec.smoothing_width);
    // h ≥ t^β on t ≥ 1; below 1 the linear branch is the pole behaviour
    for i in 0..=4000 {
        let t = 1.0 + i as f64 * 0.025;
        if pattern.value(t) < t.powf(spec.beta) * (1.0 - 1e-14) {
            return Err(infeasible("h >= t^beta", format!("fails at t = {t}")));
        }
    }
    Ok(ModelManifold::new(spec.m, profile)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeCheck {
    pub status: CheckStatus,
    pub radii: usize,
    /// `min V(B_r) / (γ r^m)` over the grid.
    pub min_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub status: CheckStatus,
    /// Decay exponent of the `a_q` envelope on power segments.
    pub decay_exponent: Option<f64>,
    pub expected_exponent: f64,
    pub tail: String,
    pub integral_bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCheck {
    /// `Fail` means the lower-area bound fails: the product grows.
    pub status: CheckStatus,
    pub subsequence: Vec<f64>,
    /// Lower bounds for the products, `r^κ ∫_r^T a_q` with `T` common.
    pub products: Vec<f64>,
    pub strictly_increasing: bool,
    /// Upper bound for the initial product, including the tail past `T`.
    pub initial_upper: f64,
    pub growth_factor: f64,
    /// First subsequence radius where the product exceeds 10 times the
    /// initial bound.
    pub tenfold_at: Option<f64>,
    pub truncation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub spec: CounterexampleSpec,
    pub smoothing_width: Option<f64>,
    pub h_threshold: f64,
    pub sphere_area: f64,
    pub volume: VolumeCheck,
    pub tail: TailCheck,
    pub growth: GrowthCheck,
    pub note: String,
}

impl CounterexampleReport {
    /// Volume growth holds, `a_q` is integrable, and the lower-area product
    /// grows.
    pub fn confirms(&self) -> bool {
        self.volume.status == CheckStatus::Pass
            && self.tail.status == CheckStatus::Pass
            && self.growth.status == CheckStatus::Fail
    }
}

/// Row of the counterexample CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CounterexampleRow {
    pub r: f64,
    pub volume_ratio: f64,
    pub lower_area_product: f64,
}

/// Runs the three checks up to `r_max`: (i) `V(B_r) ≥ γ r^m` at 200 radii,
/// (ii) `∫^∞ a_q < ∞` from the tail model, (iii) growth of the lower-area
/// product along `r = 4k + 3`.
pub fn verify_counterexample(
    m: &ModelManifold,
    spec: &CounterexampleSpec,
    r_max: f64,
) -> Result<CounterexampleReport, SobolevError> {
    spec.validate()?;
    if !(r_max > 7.0 && r_max.is_finite()) {
        return Err(SobolevError::Radii(format!("r_max must exceed 7, got {r_max}")));
    }
    let mf = spec.m as f64;
    let e = Exponent::new(spec.q)?;

    let grid: Vec<f64> = (1..=200).map(|i| r_max * i as f64 / 200.0).collect();
    let vols = m.volumes_at(&grid)?;
    let min_ratio = grid
        .iter()
        .zip(&vols)
        .map(|(r, v)| v / (spec.gamma * r.powf(mf)))
        .fold(f64::INFINITY, f64::min);
    let volume = VolumeCheck {
        status: if min_ratio >= 1.0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        radii: grid.len(),
        min_ratio,
    };

    let expected_exponent = spec.beta * (mf - 1.0) / (spec.q - 1.0);
    let tail = match m.a_p_tail(e) {
        Ok(model) => {
            let decay = match model.kind {
                TailKind::Bounded {
                    upper: Envelope::Power { exponent, .. },
                    ..
                }
                | TailKind::Power { exponent, .. } => Some(-exponent),
                _ => None,
            };
            let res = m.a_p_improper(e, m.base_radius)?;
            let status = match res.verdict {
                Convergence::Converges => CheckStatus::Pass,
                Convergence::Diverges => CheckStatus::Fail,
                Convergence::Undetermined => CheckStatus::Inconclusive,
            };
            TailCheck {
                status,
                decay_exponent: decay,
                expected_exponent,
                tail: model.describe(),
                integral_bounds: res.bounds,
            }
        }
        Err(err) => TailCheck {
            status: CheckStatus::Inconclusive,
            decay_exponent: None,
            expected_exponent,
            tail: err.to_string(),
            integral_bounds: None,
        },
    };

    let growth = growth_check(m, spec, e, r_max)?;
    Ok(CounterexampleReport {
        spec: *spec,
        smoothing_width: m.profile.smoothing_width,
        h_threshold: spec.h_threshold(),
        sphere_area: unit_sphere_area(spec.m),
        volume,
        tail,
        growth,
        note: "growth along a subsequence up to r_max is evidence of an unbounded product, not a proof".into(),
    })
}

/// `∫_r^T a_q` for each sorted `r`, summed from panels one period long.
fn truncated_tail_integrals(
    m: &ModelManifold,
    e: Exponent,
    radii: &[f64],
    truncation: f64,
) -> Result<Vec<f64>, SobolevError> {
    let Some(&first) = radii.first() else {
        return Ok(Vec::new());
    };
    let mut knots: Vec<f64> = radii.to_vec();
    let mut t = first;
    while t < truncation {
        knots.push(t);
        t += AlternatingPattern::PERIOD;
    }
    knots.push(truncation);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces = knots
        .par_windows(2)
        .map(|w| {
            integrate_with_breaks(
                |s| m.a_p_unchecked(e, s),
                w[0],
                w[1],
                &m.breakpoints(w[0], w[1]),
                &m.quadrature,
            )
            .map(|q| q.value)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(GeometryError::from)?;
    let mut suffix = vec![0.0; knots.len()];
    for i in (0..pieces.len()).rev() {
        suffix[i] = suffix[i + 1] + pieces[i];
    }
    Ok(radii.iter().map(|r| suffix[knots.partition_point(|k| k < r)]).collect())
}

fn growth_check(
    m: &ModelManifold,
    spec: &CounterexampleSpec,
    e: Exponent,
    r_max: f64,
) -> Result<GrowthCheck, SobolevError> {
    let kappa = (spec.m as f64 - spec.q) / (spec.q - 1.0);
    let subsequence = spec.pattern().power_onsets(r_max);
    let truncation = crate::numerics::BOUNDED_TAIL_HORIZON * r_max;
    let suffix = truncated_tail_integrals(m, e, &subsequence, truncation)?;
    let products: Vec<f64> = subsequence
        .iter()
        .zip(&suffix)
        .map(|(r, s)| r.powf(kappa) * s)
        .collect();
    let strictly_increasing = products.windows(2).all(|w| w[1] > w[0]);
    // tail past T from the upper envelope of a_q
    let beyond = m
        .a_p_tail(e)
        .ok()
        .and_then(|t| match t.kind {
            TailKind::Bounded { upper, .. } => upper.remainder(truncation),
            TailKind::Power { .. } | TailKind::Exponential { .. } => t.exact().and_then(|x| x.remainder(truncation)),
        })
        .unwrap_or(f64::INFINITY);
    let initial_upper = subsequence
        .first()
        .map(|r| products[0] + r.powf(kappa) * beyond)
        .unwrap_or(f64::NAN);
    let last = products.last().copied().unwrap_or(f64::NAN);
    let tenfold_at = subsequence
        .iter()
        .zip(&products)
        .find(|(_, p)| **p > 10.0 * initial_upper)
        .map(|(r, _)| *r);
    let status = if subsequence.len() < 2 || !initial_upper.is_finite() {
        CheckStatus::Inconclusive
    } else if strictly_increasing && tenfold_at.is_some() {
        CheckStatus::Fail
    } else {
        CheckStatus::Inconclusive
    };
    Ok(GrowthCheck {
        status,
        subsequence,
        products,
        strictly_increasing,
        initial_upper,
        growth_factor: last / initial_upper,
        tenfold_at,
        truncation,
    })
}

/// `(r, V/r^m, product)` on an even grid of `count` radii up to `r_max`.
pub fn counterexample_rows(
    m: &ModelManifold,
    spec: &CounterexampleSpec,
    r_max: f64,
    count: usize,
) -> Result<Vec<CounterexampleRow>, SobolevError> {
    let e = Exponent::new(spec.q)?;
    let kappa = (spec.m as f64 - spec.q) / (spec.q - 1.0);
    let grid: Vec<f64> = (1..=count).map(|i| r_max * i as f64 / count as f64).collect();
    let vols = m.volumes_at(&grid)?;
    let truncation = crate::numerics::BOUNDED_TAIL_HORIZON * r_max;
    let (lo, hi) = match m.a_p_tail(e)?.kind {
        TailKind::Bounded { lower, upper } => (
            lower.remainder(truncation).unwrap_or(f64::NAN),
            upper.remainder(truncation).unwrap_or(f64::NAN),
        ),
        _ => (f64::NAN, f64::NAN),
    };
    let beyond = 0.5 * (lo + hi);
    let products: Vec<f64> = truncated_tail_integrals(m, e, &grid, truncation)?
        .iter()
        .zip(&grid)
        .map(|(s, r)| r.powf(kappa) * (s + beyond))
        .collect();
    Ok(grid
        .iter()
        .zip(&vols)
        .zip(&products)
        .map(|((&r, &v), &p)| CounterexampleRow {
            r,
            volume_ratio: v / r.powf(spec.m as f64),
            lower_area_product: p,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> CounterexampleSpec {
        CounterexampleSpec {
            m: 3,
            q: 1.5,
            beta: 0.5,
            h: 4.0,
            gamma: 1.0,
            smoothing_width: 0.1,
        }
    }

    #[test]
    fn sharp_constant() {
        let s = euclidean_sobolev_constant(3, 2.0).unwrap();
        let closed = (3.0 * PI).powf(-0.5) * (libm::tgamma(3.0) / libm::tgamma(1.5)).powf(1.0 / 3.0);
        assert_relative_eq!(s, closed, max_relative = 1e-13);
        assert_relative_eq!(s, 0.427261, max_relative = 1e-5);
    }

    #[test]
    fn euclidean_relations() {
        let r3 = ModelManifold::euclidean(3).unwrap();
        let p = SobolevParams::euclidean(3, 2.0).unwrap();
        assert_eq!(p.p_sob, 6.0);
        for (a, b) in [(1.0, 2.0), (1.0, 10.0)] {
            assert!(sobolev_capacity_relation(&p, &r3, a, b, 1e-9).unwrap().holds);
        }
        let la = lower_area_check(&p, &r3, &[0.5, 1.0, 3.0, 10.0], 1e-9).unwrap();
        for v in &la.products {
            assert_relative_eq!(*v, 1.0 / (4.0 * PI), max_relative = 1e-9);
        }
        assert_eq!(la.status, CheckStatus::Pass);
        assert!(la.c_s >= 1.0 / (4.0 * PI));
    }

    #[test]
    fn divergent_a_q_is_detected() {
        let cusp = ModelManifold::cusp();
        let p = SobolevParams::new(2, 1.5, 1.0, 0.1).unwrap();
        let rel = sobolev_capacity_relation(&p, &cusp, 1.0, f64::INFINITY, 1e-9).unwrap();
        assert_eq!(rel.rhs, 0.0);
        assert!(!rel.holds);
    }

    #[test]
    fn spec_validation() {
        let s = spec();
        assert_eq!(s.beta_interval(), (0.25, 0.75));
        assert!(s.h_threshold() > 3.8 && s.h_threshold() < 3.9);
        assert!(build_counterexample(&s).is_ok());
        let err = build_counterexample(&CounterexampleSpec { beta: 0.9, ..s }).unwrap_err();
        assert!(err.to_string().contains("beta"));
        let err = build_counterexample(&CounterexampleSpec { h: 3.0, ..s }).unwrap_err();
        assert!(err.to_string().contains("H >"));
    }

    #[test]
    fn counterexample_checks() {
        let s = spec();
        let m = build_counterexample(&s).unwrap();
        let rep = verify_counterexample(&m, &s, 1000.0).unwrap();
        assert_eq!(rep.volume.status, CheckStatus::Pass);
        assert_eq!(rep.tail.status, CheckStatus::Pass);
        assert_relative_eq!(rep.tail.decay_exponent.unwrap(), 2.0, max_relative = 1e-12);
        assert!(rep.growth.strictly_increasing);
        assert!(rep.growth.tenfold_at.unwrap() < 1000.0);
        assert!(rep.confirms());
    }
}
