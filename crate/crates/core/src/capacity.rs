//! Annulus p-capacities on models, their upper bounds, and p-parabolicity.

use std::cell::RefCell;

use serde::Serialize;

use crate::geometry::{Exponent, GeometryError, ModelManifold};
use crate::numerics::{integrate_with_breaks, Convergence, TailKind};

/// Constant in front of the volume bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeConstant {
    /// `2^p`
    TwoPowP,
    /// `p`
    ImprovedP,
}

impl VolumeConstant {
    pub fn factor(self, p: f64) -> f64 {
        match self {
            VolumeConstant::TwoPowP => 2f64.powf(p),
            VolumeConstant::ImprovedP => p,
        }
    }
}

fn check_annulus(r1: f64, r2: f64) -> Result<(), GeometryError> {
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(GeometryError::Domain {
            what: "condenser radii",
            requirement: "0 < r1 < r2 < inf",
            value: r2 - r1,
        });
    }
    Ok(())
}

/// `Cap_p(B̄_{r1}, B_{r2}) = (∫_{r1}^{r2} a_p)^{1-p}`, attained by the radial
/// p-harmonic cutoff.
pub fn cap_exact_model(m: &ModelManifold, e: Exponent, r1: f64, r2: f64) -> Result<f64, GeometryError> {
    check_annulus(r1, r2)?;
    Ok(m.a_p_integral(e, r1, r2)?.powf(1.0 - e.p))
}

/// Surface-area upper bound `(∫_{r1}^{r2} a_p)^{1-p}`.
pub fn cap_upper_surface(m: &ModelManifold, e: Exponent, r1: f64, r2: f64) -> Result<f64, GeometryError> {
    check_annulus(r1, r2)?;
    Ok(m.a_p_integral(e, r1, r2)?.powf(1.0 - e.p))
}

/// `∫_{r1}^{r2} b_p`.
pub fn b_p_integral(m: &ModelManifold, e: Exponent, r1: f64, r2: f64) -> Result<f64, GeometryError> {
    check_annulus(r1, r2)?;
    let failure = RefCell::new(None);
    let q = integrate_with_breaks(
        |t| match m.b_p(e, r1, t) {
            Ok(v) => v,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        },
        r1,
        r2,
        &m.breakpoints(r1, r2),
        &m.quadrature,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(q?.value)
}

/// Volume upper bound `K (∫_{r1}^{r2} b_p)^{1-p}`.
pub fn cap_upper_volume(
    m: &ModelManifold,
    e: Exponent,
    r1: f64,
    r2: f64,
    constant: VolumeConstant,
) -> Result<f64, GeometryError> {
    Ok(constant.factor(e.p) * b_p_integral(m, e, r1, r2)?.powf(1.0 - e.p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBounds {
    pub p: f64,
    pub r1: f64,
    pub r2: f64,
    pub exact_model: f64,
    pub surface_bound: f64,
    pub volume_bound: f64,
    pub volume_bound_constant: VolumeConstant,
    pub tightness_surface: f64,
    pub tightness_volume: f64,
}

impl CapacityBounds {
    pub fn compute(
        m: &ModelManifold,
        e: Exponent,
        r1: f64,
        r2: f64,
        constant: VolumeConstant,
    ) -> Result<Self, GeometryError> {
        let exact_model = cap_exact_model(m, e, r1, r2)?;
        let surface_bound = cap_upper_surface(m, e, r1, r2)?;
        let volume_bound = cap_upper_volume(m, e, r1, r2, constant)?;
        Ok(Self {
            p: e.p,
            r1,
            r2,
            exact_model,
            surface_bound,
            volume_bound,
            volume_bound_constant: constant,
            tightness_surface: exact_model / surface_bound,
            tightness_volume: exact_model / volume_bound,
        })
    }

    /// Both bounds dominate the exact value up to relative `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.exact_model <= self.surface_bound * (1.0 + tol) && self.exact_model <= self.volume_bound * (1.0 + tol)
    }
}

/// Row layout of the capacity CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CapacityRow {
    pub p: f64,
    pub r1: f64,
    pub r2: f64,
    pub exact: f64,
    pub surface_bound: f64,
    pub volume_bound: f64,
    pub tightness_volume: f64,
}

impl From<&CapacityBounds> for CapacityRow {
    fn from(b: &CapacityBounds) -> Self {
        Self {
            p: b.p,
            r1: b.r1,
            r2: b.r2,
            exact: b.exact_model,
            surface_bound: b.surface_bound,
            volume_bound: b.volume_bound,
            tightness_volume: b.tightness_volume,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parabolicity {
    Parabolic,
    NonParabolic,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// `f(∞) = ∫_{base}^∞ a_p`, with its enclosure.
    FiniteIntegral {
        value: Option<f64>,
        bounds: (f64, f64),
    },
    /// Analytic description of the non-integrable tail of `a_p`.
    DivergentTail {
        description: String,
        exponent: Option<f64>,
        rate: Option<f64>,
    },
    Unavailable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicityVerdict {
    pub p: f64,
    pub verdict: Parabolicity,
    pub certificate: Certificate,
    pub base_radius: f64,
    pub omega: f64,
}

/// Parabolic exactly when `∫_{base}^∞ a_p = ∞`, decided from the tail of `h`.
pub fn classify_parabolicity(m: &ModelManifold, e: Exponent) -> Result<ParabolicityVerdict, GeometryError> {
    let verdict = |verdict, certificate| ParabolicityVerdict {
        p: e.p,
        verdict,
        certificate,
        base_radius: m.base_radius,
        omega: m.omega,
    };
    let tail = match m.a_p_tail(e) {
        Ok(t) => t,
        Err(GeometryError::Profile(err)) => {
            return Ok(verdict(
                Parabolicity::Undetermined,
                Certificate::Unavailable {
                    reason: err.to_string(),
                },
            ))
        }
        Err(err) => return Err(err),
    };
    let result = m.evans_limit(e)?;
    Ok(match result.verdict {
        Convergence::Converges => {
            let bounds = result.bounds.unwrap_or_else(|| {
                let v = result.value.expect("exact tail carries a value");
                (v - result.error, v + result.error)
            });
            verdict(
                Parabolicity::NonParabolic,
                Certificate::FiniteIntegral {
                    value: result.value,
                    bounds,
                },
            )
        }
        Convergence::Diverges => {
            let (exponent, rate) = match tail.kind {
                TailKind::Power { exponent, .. } => (Some(exponent), None),
                TailKind::Exponential { rate, .. } => (None, Some(rate)),
                TailKind::Bounded { .. } => (None, None),
            };
            verdict(
                Parabolicity::Parabolic,
                Certificate::DivergentTail {
                    description: format!("a_p tail {}", tail.describe()),
                    exponent,
                    rate,
                },
            )
        }
        Convergence::Undetermined => verdict(
            Parabolicity::Undetermined,
            Certificate::Unavailable {
                reason: format!("envelopes of the a_p tail do not decide: {}", tail.describe()),
            },
        ),
    })
}
