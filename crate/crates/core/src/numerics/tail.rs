//! Tail models for integrals over `[a, oo)`.
//!
//! Divergence is never inferred from truncated quadrature: the verdict comes
//! from the analytic form of the tail alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::quadrature::{integrate_with_breaks, QuadratureConfig, QuadratureError};

/// Truncation horizon for bounded tails, as a multiple of the start radius.
pub const BOUNDED_TAIL_HORIZON: f64 = 16.0;

/// A single analytic comparison function, `c t^k` or `c e^{λ t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Envelope {
    Power { coefficient: f64, exponent: f64 },
    Exponential { coefficient: f64, rate: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Power { coefficient, exponent } => coefficient * t.powf(exponent),
            Envelope::Exponential { coefficient, rate } => coefficient * (rate * t).exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Envelope::Power { coefficient, .. } | Envelope::Exponential { coefficient, .. } => coefficient == 0.0,
        }
    }

    /// Whether `∫_T^∞ |self|` is finite.
    pub fn integrable(&self) -> bool {
        match *self {
            _ if self.is_zero() => true,
            Envelope::Power { exponent, .. } => exponent < -1.0,
            Envelope::Exponential { rate, .. } => rate < 0.0,
        }
    }

    /// `∫_T^∞ self`, when finite.
    pub fn remainder(&self, from: f64) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        if !self.integrable() {
            return None;
        }
        Some(match *self {
            Envelope::Power { coefficient, exponent } => -coefficient * from.powf(exponent + 1.0) / (exponent + 1.0),
            Envelope::Exponential { coefficient, rate } => -coefficient * (rate * from).exp() / rate,
        })
    }

    /// `scale · self^power` for a non-negative envelope.
    pub fn map_power(&self, scale: f64, power: f64) -> Envelope {
        match *self {
            Envelope::Power { coefficient, exponent } => Envelope::Power {
                coefficient: scale * coefficient.powf(power),
                exponent: exponent * power,
            },
            Envelope::Exponential { coefficient, rate } => Envelope::Exponential {
                coefficient: scale * coefficient.powf(power),
                rate: rate * power,
            },
        }
    }

    fn growth_key(&self) -> (i8, f64) {
        match *self {
            Envelope::Power { exponent, .. } => (0, exponent),
            Envelope::Exponential { rate, .. } if rate > 0.0 => (1, rate),
            Envelope::Exponential { rate, .. } if rate < 0.0 => (-1, rate),
            Envelope::Exponential { .. } => (0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailKind {
    /// `f(t) = c t^k` exactly on the tail.
    Power { coefficient: f64, exponent: f64 },
    /// `f(t) = c e^{λ t}` exactly on the tail.
    Exponential { coefficient: f64, rate: f64 },
    /// `lower(t) ≤ f(t) ≤ upper(t)` on the tail, with non-negative envelopes.
    Bounded { lower: Envelope, upper: Envelope },
}

/// Asymptotic description of an integrand on `[valid_from, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub kind: TailKind,
    pub valid_from: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TailError {
    #[error("tail must start at a positive radius, got {0}")]
    NonPositiveStart(f64),
    #[error("bounded tail envelopes must be non-negative")]
    NegativeEnvelope,
    #[error("lower envelope exceeds upper envelope on the tail")]
    CrossedEnvelopes,
    #[error("power map requires a positive scale")]
    BadScale,
}

impl TailModel {
    pub fn new(kind: TailKind, valid_from: f64) -> Result<Self, TailError> {
        if !(valid_from > 0.0) {
            return Err(TailError::NonPositiveStart(valid_from));
        }
        if let TailKind::Bounded { lower, upper } = kind {
            check_envelopes(&lower, &upper, valid_from)?;
        }
        Ok(Self { kind, valid_from })
    }

    /// Exact `c t^k` tail.
    pub fn power(coefficient: f64, exponent: f64, valid_from: f64) -> Result<Self, TailError> {
        Self::new(TailKind::Power { coefficient, exponent }, valid_from)
    }

    /// Exact `t^{-α}` decay from `t = 1`.
    pub fn power_decay(alpha: f64) -> Self {
        Self {
            kind: TailKind::Power {
                coefficient: 1.0,
                exponent: -alpha,
            },
            valid_from: 1.0,
        }
    }

    pub fn exponential(coefficient: f64, rate: f64, valid_from: f64) -> Result<Self, TailError> {
        Self::new(TailKind::Exponential { coefficient, rate }, valid_from)
    }

    pub fn bounded(lower: Envelope, upper: Envelope, valid_from: f64) -> Result<Self, TailError> {
        Self::new(TailKind::Bounded { lower, upper }, valid_from)
    }

    /// Identically zero beyond `valid_from`.
    pub fn zero(valid_from: f64) -> Result<Self, TailError> {
        Self::power(0.0, 0.0, valid_from)
    }

    /// Tail model of `scale · f^power`, assuming `f ≥ 0` on the tail.
    /// Envelopes swap roles for negative powers.
    pub fn map_power(&self, scale: f64, power: f64) -> Result<TailModel, TailError> {
        if !(scale > 0.0) {
            return Err(TailError::BadScale);
        }
        let kind = match self.kind {
            TailKind::Power { coefficient, exponent } => TailKind::Power {
                coefficient: scale * coefficient.powf(power),
                exponent: exponent * power,
            },
            TailKind::Exponential { coefficient, rate } => TailKind::Exponential {
                coefficient: scale * coefficient.powf(power),
                rate: rate * power,
            },
            TailKind::Bounded { lower, upper } => {
                let (l, u) = (lower.map_power(scale, power), upper.map_power(scale, power));
                if power >= 0.0 {
                    TailKind::Bounded { lower: l, upper: u }
                } else {
                    TailKind::Bounded { lower: u, upper: l }
                }
            }
        };
        Ok(TailModel {
            kind,
            valid_from: self.valid_from,
        })
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TailKind::Power { coefficient, exponent } => {
                format!("power {coefficient}*t^{exponent} from t={}", self.valid_from)
            }
            TailKind::Exponential { coefficient, rate } => {
                format!("exponential {coefficient}*e^({rate} t) from t={}", self.valid_from)
            }
            TailKind::Bounded { lower, upper } => {
                format!("bounded between {lower:?} and {upper:?} from t={}", self.valid_from)
            }
        }
    }

    pub fn exact(&self) -> Option<Envelope> {
        match self.kind {
            TailKind::Power { coefficient, exponent } => Some(Envelope::Power { coefficient, exponent }),
            TailKind::Exponential { coefficient, rate } => Some(Envelope::Exponential { coefficient, rate }),
            TailKind::Bounded { .. } => None,
        }
    }

    /// Convergence of `∫^∞ f` decided from the model alone.
    pub fn convergence(&self) -> Convergence {
        match self.kind {
            TailKind::Power { .. } | TailKind::Exponential { .. } => {
                if self.exact().is_some_and(|e| e.integrable()) {
                    Convergence::Converges
                } else {
                    Convergence::Diverges
                }
            }
            TailKind::Bounded { lower, upper } => {
                if upper.integrable() {
                    Convergence::Converges
                } else if !lower.is_zero() && !lower.integrable() {
                    Convergence::Diverges
                } else {
                    Convergence::Undetermined
                }
            }
        }
    }
}

fn check_envelopes(lower: &Envelope, upper: &Envelope, from: f64) -> Result<(), TailError> {
    let coeff = |e: &Envelope| match *e {
        Envelope::Power { coefficient, .. } | Envelope::Exponential { coefficient, .. } => coefficient,
    };
    if coeff(lower) < 0.0 || coeff(upper) < 0.0 {
        return Err(TailError::NegativeEnvelope);
    }
    if lower.is_zero() {
        return Ok(());
    }
    let slack = 1e-12 * upper.value(from).abs();
    if lower.value(from) > upper.value(from) + slack || lower.growth_key() > upper.growth_key() {
        return Err(TailError::CrossedEnvelopes);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converges,
    Diverges,
    Undetermined,
}

/// Outcome of [`integrate_improper`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceResult {
    pub verdict: Convergence,
    /// Present only when the integral converges and is pinned to tolerance.
    pub value: Option<f64>,
    /// Rigorous enclosure when the tail is only bounded by envelopes.
    pub bounds: Option<(f64, f64)>,
    /// Quadrature error estimate of the numerical part.
    pub error: f64,
}

impl ConvergenceResult {
    pub fn converges(&self) -> bool {
        self.verdict == Convergence::Converges
    }
}

/// `∫_a^∞ f`, split into quadrature on `[a, T]` and an analytic remainder.
///
/// For exact tails `T = max(a, valid_from)` and the remainder is exact. For
/// bounded tails `T = BOUNDED_TAIL_HORIZON · max(a, valid_from)` and the
/// envelopes yield an enclosure; `value` is reported only when the enclosure
/// is within tolerance.
pub fn integrate_improper<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    tail: &TailModel,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<ConvergenceResult, QuadratureError> {
    let verdict = tail.convergence();
    if verdict != Convergence::Converges {
        return Ok(ConvergenceResult {
            verdict,
            value: None,
            bounds: None,
            error: 0.0,
        });
    }
    let start = a.max(tail.valid_from);
    match tail.kind {
        TailKind::Bounded { lower, upper } => {
            let horizon = BOUNDED_TAIL_HORIZON * start;
            let q = integrate_with_breaks(&f, a, horizon, breaks, cfg)?;
            let lo = q.value + lower.remainder(horizon).unwrap_or(0.0) - q.error;
            let hi = q.value + upper.remainder(horizon).unwrap_or(0.0) + q.error;
            let mid = 0.5 * (lo + hi);
            let value = (hi - lo <= cfg.abs_tol.max(cfg.rel_tol * mid.abs())).then_some(mid);
            Ok(ConvergenceResult {
                verdict,
                value,
                bounds: Some((lo, hi)),
                error: q.error,
            })
        }
        _ => {
            let exact = tail.exact().expect("exact tail");
            let q = integrate_with_breaks(&f, a, start, breaks, cfg)?;
            let rem = exact.remainder(start).expect("integrable tail");
            let value = q.value + rem;
            Ok(ConvergenceResult {
                verdict,
                value: Some(value),
                bounds: Some((value - q.error, value + q.error)),
                error: q.error,
            })
        }
    }
}
