//! Piecewise-analytic radial profiles.
//!
//! A profile is an ordered list of [`Segment`]s covering `(0, ∞)`. Evaluation
//! is right-continuous at breakpoints. [`WarpingProfile`] additionally
//! requires strict positivity and describes the warping function `h` of a
//! model metric `dt² + h(t)² dθ²`; [`RadialProfile`] carries signed data such
//! as densities and cutoff shapes.

mod alternating;
mod parse;
mod pchip;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Envelope, TailError, TailModel};
use crate::radial::RadialFunction;

pub use alternating::AlternatingPattern;
pub use parse::{parse_radial, parse_segment_line, parse_segment_lines, parse_warping, render};
pub use pchip::MonotoneCubic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("segment {index}: {message}")]
    Invalid { index: usize, message: String },
    #[error("segment {index} starts at {found} but the previous one ends at {expected} (gap)")]
    Gap { index: usize, expected: f64, found: f64 },
    #[error("segment {index} starts at {found} before the previous one ends at {expected} (overlap)")]
    Overlap { index: usize, expected: f64, found: f64 },
    #[error("segment {index} is not positive at t = {at} (value {value})")]
    NonPositive { index: usize, at: f64, value: f64 },
    #[error("profile has no segments")]
    Empty,
    #[error("first segment must start at 0, found {0}")]
    BadOrigin(f64),
    #[error("last segment must extend to infinity, found {0}")]
    Bounded(f64),
    #[error("radius must be positive, got {0}")]
    Domain(f64),
    #[error("tail of segment {index} cannot be classified ({kind})")]
    UndeterminedTail { index: usize, kind: &'static str },
    #[error(transparent)]
    Tail(#[from] TailError),
}

/// Analytic form of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// `c t^β`
    Power {
        coefficient: f64,
        exponent: f64,
    },
    /// `c e^{λ t}`
    Exponential {
        coefficient: f64,
        rate: f64,
    },
    /// `H t`
    Linear {
        slope: f64,
    },
    Constant {
        value: f64,
    },
    /// `c sinh(λ t)`
    Sinh {
        coefficient: f64,
        rate: f64,
    },
    /// `Σ c_k (t − origin)^k`
    Polynomial {
        origin: f64,
        coefficients: Vec<f64>,
    },
    Tabulated(MonotoneCubic),
    /// Smoothstep blend between two analytic forms across the segment.
    Blend {
        from: Box<SegmentKind>,
        to: Box<SegmentKind>,
    },
    Alternating(AlternatingPattern),
}

impl SegmentKind {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentKind::Power { .. } => "power",
            SegmentKind::Exponential { .. } => "exp",
            SegmentKind::Linear { .. } => "linear",
            SegmentKind::Constant { .. } => "const",
            SegmentKind::Sinh { .. } => "sinh",
            SegmentKind::Polynomial { .. } => "poly",
            SegmentKind::Tabulated(_) => "tabulated",
            SegmentKind::Blend { .. } => "blend",
            SegmentKind::Alternating(_) => "alternating",
        }
    }

    fn eval(&self, lo: f64, hi: f64, t: f64, from_left: bool) -> (f64, f64) {
        match self {
            SegmentKind::Power { coefficient, exponent } => {
                let v = coefficient * t.powf(*exponent);
                (v, if *exponent == 0.0 { 0.0 } else { exponent * v / t })
            }
            SegmentKind::Exponential { coefficient, rate } => {
                let v = coefficient * (rate * t).exp();
                (v, rate * v)
            }
            SegmentKind::Linear { slope } => (slope * t, *slope),
            SegmentKind::Constant { value } => (*value, 0.0),
            SegmentKind::Sinh { coefficient, rate } => {
                (coefficient * (rate * t).sinh(), coefficient * rate * (rate * t).cosh())
            }
            SegmentKind::Polynomial { origin, coefficients } => {
                let x = t - origin;
                let mut v = 0.0;
                let mut d = 0.0;
                for c in coefficients.iter().rev() {
                    d = d * x + v;
                    v = v * x + c;
                }
                (v, d)
            }
            SegmentKind::Tabulated(m) => {
                if from_left {
                    let knots = m.knots();
                    if let Ok(i) = knots.binary_search_by(|k| k.total_cmp(&t)) {
                        if i > 0 {
                            let h = 1e-9 * (knots[i] - knots[i - 1]);
                            return (m.value(t), m.derivative(t - h));
                        }
                    }
                }
                (m.value(t), m.derivative(t))
            }
            SegmentKind::Blend { from, to } => {
                let (f0, d0) = from.eval(lo, hi, t, from_left);
                let (f1, d1) = to.eval(lo, hi, t, from_left);
                let w = hi - lo;
                let u = ((t - lo) / w).clamp(0.0, 1.0);
                let s = u * u * (3.0 - 2.0 * u);
                let ds = 6.0 * u * (1.0 - u) / w;
                ((1.0 - s) * f0 + s * f1, (1.0 - s) * d0 + s * d1 + ds * (f1 - f0))
            }
            SegmentKind::Alternating(p) => {
                if from_left {
                    (p.value(t), p.left_derivative(t))
                } else {
                    (p.value(t), p.derivative(t))
                }
            }
        }
    }

    fn internal_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            SegmentKind::Tabulated(m) => m.knots().iter().copied().filter(|&k| k > lo && k < hi).collect(),
            SegmentKind::Alternating(p) => p.breakpoints(lo, hi),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub lo: f64,
    pub hi: f64,
}

impl Segment {
    pub fn new(kind: SegmentKind, lo: f64, hi: f64) -> Self {
        Self { kind, lo, hi }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.kind.eval(self.lo, self.hi, t, false).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.kind.eval(self.lo, self.hi, t, false).1
    }

    fn left_derivative(&self, t: f64) -> f64 {
        self.kind.eval(self.lo, self.hi, t, true).1
    }
}

/// Derivative at a point; at breakpoints both one-sided values are returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Slope {
    Exact(f64),
    OneSided { left: f64, right: f64 },
}

impl Slope {
    pub fn exact(self) -> Option<f64> {
        match self {
            Slope::Exact(v) => Some(v),
            Slope::OneSided { .. } => None,
        }
    }
}

/// Segment list covering `(0, ∞)` without sign requirements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piecewise {
    segments: Vec<Segment>,
}

impl Piecewise {
    /// Checks coverage of `(0, ∞)` and per-segment well-formedness.
    pub fn new(segments: Vec<Segment>) -> Result<Self, ProfileError> {
        let first = segments.first().ok_or(ProfileError::Empty)?;
        if first.lo != 0.0 {
            return Err(ProfileError::BadOrigin(first.lo));
        }
        for (index, seg) in segments.iter().enumerate() {
            if !(seg.lo < seg.hi) || seg.lo.is_nan() {
                return Err(ProfileError::Invalid {
                    index,
                    message: format!("empty interval [{}, {})", seg.lo, seg.hi),
                });
            }
            if index > 0 {
                let expected = segments[index - 1].hi;
                if seg.lo > expected {
                    return Err(ProfileError::Gap {
                        index,
                        expected,
                        found: seg.lo,
                    });
                }
                if seg.lo < expected {
                    return Err(ProfileError::Overlap {
                        index,
                        expected,
                        found: seg.lo,
                    });
                }
            }
            validate_kind(index, seg)?;
        }
        let last = segments.last().expect("non-empty");
        if last.hi != f64::INFINITY {
            return Err(ProfileError::Bounded(last.hi));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn index_of(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.lo <= t).saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> Result<f64, ProfileError> {
        if !(t > 0.0) {
            return Err(ProfileError::Domain(t));
        }
        Ok(self.value_unchecked(t))
    }

    pub fn value_unchecked(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return f64::NAN;
        }
        self.segments[self.index_of(t)].value(t)
    }

    pub fn derivative_unchecked(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return f64::NAN;
        }
        self.segments[self.index_of(t)].derivative(t)
    }

    /// Analytic derivative, or both one-sided values at a breakpoint.
    pub fn derivative(&self, t: f64) -> Result<Slope, ProfileError> {
        if !(t > 0.0) {
            return Err(ProfileError::Domain(t));
        }
        let i = self.index_of(t);
        let seg = &self.segments[i];
        let right = seg.derivative(t);
        if i > 0 && seg.lo == t {
            let left = self.segments[i - 1].derivative(t);
            return Ok(Slope::OneSided { left, right });
        }
        let eps = t * 1e-15;
        if seg.kind.internal_breakpoints(t - eps, t + eps).contains(&t) {
            return Ok(Slope::OneSided {
                left: seg.left_derivative(t),
                right,
            });
        }
        Ok(Slope::Exact(right))
    }

    /// Segment boundaries and internal kinks in `(lo, hi)`, sorted.
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for seg in &self.segments {
            if seg.hi <= lo || seg.lo >= hi {
                continue;
            }
            if seg.lo > lo {
                out.push(seg.lo);
            }
            out.extend(seg.kind.internal_breakpoints(lo.max(seg.lo), hi.min(seg.hi)));
        }
        out.retain(|&t| t > lo && t < hi);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Asymptotic model of the last segment.
    pub fn tail_class(&self) -> Result<TailModel, ProfileError> {
        let index = self.segments.len() - 1;
        let seg = &self.segments[index];
        let from = if seg.lo > 0.0 { seg.lo } else { 1.0 };
        let undetermined = |kind| ProfileError::UndeterminedTail { index, kind };
        let model = match &seg.kind {
            SegmentKind::Power { coefficient, exponent } => TailModel::power(*coefficient, *exponent, from)?,
            SegmentKind::Linear { slope } => TailModel::power(*slope, 1.0, from)?,
            SegmentKind::Constant { value } => TailModel::power(*value, 0.0, from)?,
            SegmentKind::Exponential { coefficient, rate } => TailModel::exponential(*coefficient, *rate, from)?,
            SegmentKind::Sinh { coefficient, rate } => {
                let (c, l) = (coefficient.abs(), rate.abs());
                if c == 0.0 || l == 0.0 {
                    TailModel::zero(from)?
                } else {
                    let start = from.max(1.0);
                    TailModel::bounded(
                        Envelope::Exponential {
                            coefficient: 0.5 * c * (1.0 - (-2.0 * l * start).exp()),
                            rate: l,
                        },
                        Envelope::Exponential {
                            coefficient: 0.5 * c,
                            rate: l,
                        },
                        start,
                    )?
                }
            }
            SegmentKind::Alternating(p) => {
                let start = from.max(1.0);
                TailModel::bounded(
                    Envelope::Power {
                        coefficient: p.slope.min(1.0),
                        exponent: p.beta.min(1.0),
                    },
                    Envelope::Power {
                        coefficient: p.slope.max(1.0),
                        exponent: p.beta.max(1.0),
                    },
                    start,
                )?
            }
            SegmentKind::Polynomial { .. } => return Err(undetermined("poly")),
            SegmentKind::Tabulated(_) => return Err(undetermined("tabulated")),
            SegmentKind::Blend { .. } => return Err(undetermined("blend")),
        };
        Ok(model)
    }

    /// Largest `t` with non-zero values, when the profile ends in a zero
    /// constant.
    pub fn support_end(&self) -> Option<f64> {
        let mut end = None;
        for seg in self.segments.iter().rev() {
            match seg.kind {
                SegmentKind::Constant { value: 0.0 } => end = Some(seg.lo),
                _ => break,
            }
        }
        end
    }

    /// Smallest `t` with non-zero values, when the profile starts with a zero
    /// constant.
    pub fn support_start(&self) -> f64 {
        let mut start = 0.0;
        for seg in &self.segments {
            match seg.kind {
                SegmentKind::Constant { value: 0.0 } => start = seg.hi,
                _ => break,
            }
        }
        start
    }
}

fn validate_kind(index: usize, seg: &Segment) -> Result<(), ProfileError> {
    let invalid = |message: &str| ProfileError::Invalid {
        index,
        message: message.to_string(),
    };
    let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
    match &seg.kind {
        SegmentKind::Power { coefficient, exponent } if !finite(&[*coefficient, *exponent]) => {
            Err(invalid("non-finite power parameters"))
        }
        SegmentKind::Exponential { coefficient, rate } if !finite(&[*coefficient, *rate]) => {
            Err(invalid("non-finite exponential parameters"))
        }
        SegmentKind::Linear { slope } if !slope.is_finite() => Err(invalid("non-finite slope")),
        SegmentKind::Constant { value } if !value.is_finite() => Err(invalid("non-finite constant")),
        SegmentKind::Sinh { coefficient, rate } if !finite(&[*coefficient, *rate]) => {
            Err(invalid("non-finite sinh parameters"))
        }
        SegmentKind::Polynomial { coefficients, origin }
            if coefficients.is_empty() || !finite(coefficients) || !origin.is_finite() =>
        {
            Err(invalid("polynomial needs finite coefficients"))
        }
        SegmentKind::Blend { from, to } => {
            if !seg.hi.is_finite() {
                return Err(invalid("blend segment must be bounded"));
            }
            if matches!(**from, SegmentKind::Blend { .. }) || matches!(**to, SegmentKind::Blend { .. }) {
                return Err(invalid("blend cannot blend another blend"));
            }
            validate_kind(index, &Segment::new((**from).clone(), seg.lo, seg.hi))?;
            validate_kind(index, &Segment::new((**to).clone(), seg.lo, seg.hi))
        }
        SegmentKind::Alternating(p) => p.validate().map_err(invalid),
        _ => Ok(()),
    }
}

/// Sample radii used for positivity checks on a segment.
fn probe_points(seg: &Segment) -> Vec<f64> {
    let lo = if seg.lo > 0.0 { seg.lo } else { 1e-9 };
    let hi = if seg.hi.is_finite() { seg.hi } else { lo.max(1.0) * 1e3 };
    let n = 256;
    let mut pts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    if seg.hi.is_finite() {
        pts.pop();
        pts.push(seg.hi * (1.0 - 1e-15));
    }
    pts
}

fn check_positive(index: usize, seg: &Segment) -> Result<(), ProfileError> {
    let nonpositive = |at: f64, value: f64| ProfileError::NonPositive { index, at, value };
    match &seg.kind {
        SegmentKind::Power { coefficient, .. } | SegmentKind::Exponential { coefficient, .. } => {
            if *coefficient <= 0.0 {
                return Err(nonpositive(seg.lo, *coefficient));
            }
        }
        SegmentKind::Linear { slope } => {
            if *slope <= 0.0 {
                return Err(nonpositive(seg.lo.max(1.0), *slope));
            }
        }
        SegmentKind::Constant { value } => {
            if *value <= 0.0 {
                return Err(nonpositive(seg.lo, *value));
            }
        }
        SegmentKind::Sinh { coefficient, rate } => {
            if coefficient * rate <= 0.0 {
                return Err(nonpositive(seg.lo.max(1.0), coefficient * rate));
            }
        }
        SegmentKind::Tabulated(m) => {
            if let Some((at, value)) = m.samples().find(|&(_, v)| v <= 0.0) {
                return Err(nonpositive(at, value));
            }
        }
        SegmentKind::Alternating(_) => {}
        SegmentKind::Polynomial { .. } | SegmentKind::Blend { .. } => {
            for t in probe_points(seg) {
                let v = seg.value(t);
                if !(v > 0.0) {
                    return Err(nonpositive(t, v));
                }
            }
            if let SegmentKind::Blend { from, to } = &seg.kind {
                check_positive(index, &Segment::new((**from).clone(), seg.lo, seg.hi))?;
                check_positive(index, &Segment::new((**to).clone(), seg.lo, seg.hi))?;
            }
        }
    }
    Ok(())
}

/// Warping function `h > 0` of a model manifold.
///
/// The pole behaviour `h(0) = 0, h'(0⁺) = 1` is metadata only: integrals
/// starting at 0 use the first segment as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpingProfile {
    inner: Piecewise,
    /// Width of cubic transition segments, when the profile was built with
    /// glued branches.
    pub smoothing_width: Option<f64>,
}

impl WarpingProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ProfileError> {
        let inner = Piecewise::new(segments)?;
        for (index, seg) in inner.segments.iter().enumerate() {
            check_positive(index, seg)?;
        }
        Ok(Self {
            inner,
            smoothing_width: None,
        })
    }

    /// `h(t) = t`.
    pub fn euclidean() -> Self {
        Self::new(vec![Segment::new(
            SegmentKind::Linear { slope: 1.0 },
            0.0,
            f64::INFINITY,
        )])
        .expect("valid profile")
    }

    /// `h(t) = e^{-t}` for `t ≥ 1`, joined continuously to `e^{-1} t` on `(0, 1)`.
    pub fn cusp() -> Self {
        Self::new(vec![
            Segment::new(SegmentKind::Linear { slope: (-1.0f64).exp() }, 0.0, 1.0),
            Segment::new(
                SegmentKind::Exponential {
                    coefficient: 1.0,
                    rate: -1.0,
                },
                1.0,
                f64::INFINITY,
            ),
        ])
        .expect("valid profile")
    }

    /// `h(t) = sinh t`.
    pub fn hyperbolic() -> Self {
        Self::new(vec![Segment::new(
            SegmentKind::Sinh {
                coefficient: 1.0,
                rate: 1.0,
            },
            0.0,
            f64::INFINITY,
        )])
        .expect("valid profile")
    }

    pub fn piecewise(&self) -> &Piecewise {
        &self.inner
    }

    pub fn segments(&self) -> &[Segment] {
        self.inner.segments()
    }

    pub fn eval(&self, t: f64) -> Result<f64, ProfileError> {
        self.inner.eval(t)
    }

    pub fn derivative(&self, t: f64) -> Result<Slope, ProfileError> {
        self.inner.derivative(t)
    }

    pub fn tail_class(&self) -> Result<TailModel, ProfileError> {
        self.inner.tail_class()
    }

    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.inner.breakpoints_in(lo, hi)
    }
}

impl RadialFunction for WarpingProfile {
    fn value(&self, r: f64) -> f64 {
        self.inner.value_unchecked(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.inner.derivative_unchecked(r)
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.inner.breakpoints_in(lo, hi)
    }
}

/// Signed piecewise radial data: densities, cutoff shapes, field coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    inner: Piecewise,
}

impl RadialProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ProfileError> {
        Ok(Self {
            inner: Piecewise::new(segments)?,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![Segment::new(SegmentKind::Constant { value }, 0.0, f64::INFINITY)]).expect("valid profile")
    }

    /// Continuous piecewise-linear profile through `knots` (strictly
    /// increasing abscissae, first knot > 0), constant outside.
    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Self, ProfileError> {
        if knots.len() < 2 {
            return Err(ProfileError::Invalid {
                index: 0,
                message: "piecewise-linear profile needs two knots".into(),
            });
        }
        let mut segs = vec![Segment::new(
            SegmentKind::Constant { value: knots[0].1 },
            0.0,
            knots[0].0,
        )];
        for w in knots.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            segs.push(Segment::new(
                SegmentKind::Polynomial {
                    origin: t0,
                    coefficients: vec![v0, (v1 - v0) / (t1 - t0)],
                },
                t0,
                t1,
            ));
        }
        let last = knots[knots.len() - 1];
        segs.push(Segment::new(
            SegmentKind::Constant { value: last.1 },
            last.0,
            f64::INFINITY,
        ));
        Self::new(segs)
    }

    /// Smooth bump `amplitude (1 − ((t − center)/half_width)²)²` supported on
    /// `[center − half_width, center + half_width]`.
    pub fn bump(center: f64, half_width: f64, amplitude: f64) -> Result<Self, ProfileError> {
        Self::bumps(&[(center, half_width, amplitude)])
    }

    /// Sum of disjoint bumps given as `(center, half_width, amplitude)`,
    /// sorted by center.
    pub fn bumps(bumps: &[(f64, f64, f64)]) -> Result<Self, ProfileError> {
        let mut segs = Vec::new();
        let mut cursor = 0.0;
        for &(c, w, a) in bumps {
            let (lo, hi) = (c - w, c + w);
            if !(w > 0.0) || lo <= 0.0 || lo < cursor {
                return Err(ProfileError::Invalid {
                    index: segs.len(),
                    message: format!("bump at {c} with half-width {w} is not admissible"),
                });
            }
            if lo > cursor {
                segs.push(Segment::new(SegmentKind::Constant { value: 0.0 }, cursor, lo));
            }
            // a (1 - x^2)^2 with x = (t - c)/w
            let w2 = w * w;
            segs.push(Segment::new(
                SegmentKind::Polynomial {
                    origin: c,
                    coefficients: vec![a, 0.0, -2.0 * a / w2, 0.0, a / (w2 * w2)],
                },
                lo,
                hi,
            ));
            cursor = hi;
        }
        segs.push(Segment::new(
            SegmentKind::Constant { value: 0.0 },
            cursor,
            f64::INFINITY,
        ));
        Self::new(segs)
    }

    pub fn piecewise(&self) -> &Piecewise {
        &self.inner
    }

    pub fn segments(&self) -> &[Segment] {
        self.inner.segments()
    }

    pub fn eval(&self, t: f64) -> Result<f64, ProfileError> {
        self.inner.eval(t)
    }

    pub fn derivative(&self, t: f64) -> Result<Slope, ProfileError> {
        self.inner.derivative(t)
    }

    pub fn support_end(&self) -> Option<f64> {
        self.inner.support_end()
    }
}

impl RadialFunction for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.inner.value_unchecked(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.inner.derivative_unchecked(r)
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.inner.breakpoints_in(lo, hi)
    }
}
