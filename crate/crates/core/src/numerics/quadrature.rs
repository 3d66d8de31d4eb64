//! Globally adaptive Gauss-Kronrod (10/21) quadrature.
//!
//! The interval with the largest error estimate is bisected first; ties are
//! broken by creation order, so a given integrand and configuration always
//! produce the same subdivision sequence and bit-identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kronrod abscissae on [-1, 1], non-negative half, largest first.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_626_368_528,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights belonging to the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

/// Error targets for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadratureError::InvalidConfig("abs_tol must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QuadratureError::InvalidConfig("rel_tol must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadratureError::InvalidConfig("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Same configuration with both tolerances replaced by `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self.rel_tol = tol;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integrand is not finite at t = {at}")]
    NonFinite { at: f64 },
    #[error("no convergence within {subdivisions} subdivisions (best estimate {estimate:e} +/- {error:e})")]
    NotConverged {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// `∫|f|` over the panel.
    magnitude: f64,
    /// Error is at the round-off floor or the panel cannot be halved further.
    saturated: bool,
    seq: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Max-heap on error; earlier panels win ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, seq: u64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite { at: center });
    }
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = (fc * WGK[10]).abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite { at: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let mut saturated = false;
    if floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && error <= floor {
        error = floor;
        saturated = true;
    }
    if half.abs() <= 100.0 * f64::EPSILON * center.abs().max(f64::MIN_POSITIVE) {
        saturated = true;
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        magnitude: res_abs,
        saturated,
        seq,
    })
}

/// Integrates `f` over `[a, b]`.
///
/// `a == b` yields zero. When every remaining panel is at its round-off floor
/// the result is returned even if the requested tolerance was not met; the
/// reported `error` then reflects the floor.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature, QuadratureError> {
    integrate_with_breaks(f, a, b, &[], cfg)
}

/// Like [`integrate`], with mandatory subdivision points. Points outside
/// `(a, b)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Quadrature, QuadratureError> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0 });
    }

    let mut nodes: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&t| t.is_finite() && t > a && t < b)
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut seq = 0u64;
    let mut heap = BinaryHeap::with_capacity(nodes.len() + 64);
    let mut done: Vec<Panel> = Vec::new();
    let mut lo = a;
    for &hi in nodes.iter().chain(std::iter::once(&b)) {
        let panel = kronrod(&f, lo, hi, seq)?;
        seq += 1;
        heap.push(panel);
        lo = hi;
    }

    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut heap_err: f64 = heap.iter().map(|p| p.error).sum();
    let mut magnitude: f64 = heap.iter().map(|p| p.magnitude).sum();
    // Cancellation in a signed integrand caps the attainable accuracy.
    let target = |total: f64, magnitude: f64| cfg.target(total).max(100.0 * f64::EPSILON * magnitude);
    let mut done_err = 0.0;
    let mut subdivisions = 0usize;

    loop {
        if heap_err + done_err <= target(total, magnitude) {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        // The running error sum drifts under cancellation; resync it when it
        // exceeds what the largest panel allows.
        if worst.error * ((heap.len() + 1) as f64) * (1.0 + 1e-6) < heap_err {
            heap_err = worst.error + heap.iter().map(|p| p.error).sum::<f64>();
            if heap_err + done_err <= target(total, magnitude) {
                heap.push(worst);
                break;
            }
        }
        if worst.saturated {
            heap_err -= worst.error;
            done_err += worst.error;
            done.push(worst);
            continue;
        }
        if subdivisions >= cfg.max_subdivisions {
            heap.push(worst);
            let (estimate, error) = sum_panels(heap.iter().chain(done.iter()));
            return Err(QuadratureError::NotConverged {
                estimate,
                error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&f, worst.a, mid, seq)?;
        let right = kronrod(&f, mid, worst.b, seq + 1)?;
        seq += 2;
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        heap_err += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
    }

    let (value, error) = sum_panels(heap.iter().chain(done.iter()));
    Ok(Quadrature { value, error })
}

fn sum_panels<'a>(panels: impl Iterator<Item = &'a Panel>) -> (f64, f64) {
    let mut all: Vec<&Panel> = panels.collect();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = all.iter().map(|p| p.value).sum();
    let error = all.iter().map(|p| p.error).sum();
    (value, error)
}

/// Smallest `t` in `[lo, ..)` with `f(t) >= target` for a nondecreasing `f`,
/// located by bracket doubling then bisection. `None` when no bracket is found
/// below `limit`.
pub fn invert_nondecreasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, initial_hi: f64, limit: f64) -> Option<f64> {
    let mut a = lo;
    if f(a) >= target {
        return Some(a);
    }
    let mut b = initial_hi.max(lo + f64::EPSILON.max(lo.abs() * 1e-12));
    while f(b) < target {
        a = b;
        let width = (b - lo).max(1e-12);
        b = lo + 2.0 * width;
        if b > limit || !b.is_finite() {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) >= target {
            b = mid;
        } else {
            a = mid;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn constant_integrand() {
        let q = integrate(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn inverse_square() {
        let q = integrate(|t| t.powi(-2), 1.0, 2.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn exponential() {
        let e = std::f64::consts::E;
        let q = integrate(f64::exp, 1.0, 2.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, e * e - e, max_relative = 1e-12);
        assert!((q.value - 4.670774).abs() < 1e-6);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(matches!(
            integrate(|t| t, 2.0, 1.0, &cfg()),
            Err(QuadratureError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|t| t, 1.0, 1.0, &cfg()).unwrap().value, 0.0);
    }

    #[test]
    fn nan_integrand_reported() {
        let r = integrate(|t| if t > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &cfg());
        assert!(matches!(r, Err(QuadratureError::NonFinite { .. })));
    }

    #[test]
    fn budget_exhaustion_carries_estimate() {
        let tight = QuadratureConfig::new(1e-300, 1e-300, 2).unwrap();
        // sqrt has an endpoint singularity in its derivative
        match integrate(f64::sqrt, 0.0, 1.0, &tight) {
            Err(QuadratureError::NotConverged { estimate, .. }) => {
                assert!((estimate - 2.0 / 3.0).abs() < 1e-3)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn breaks_resolve_jumps() {
        let step = |t: f64| if t < 0.3 { 1.0 } else { 2.0 };
        let q = integrate_with_breaks(step, 0.0, 1.0, &[0.3], &cfg()).unwrap();
        assert_relative_eq!(q.value, 0.3 + 1.4, max_relative = 1e-14);
    }

    #[test]
    fn deterministic_bits() {
        let f = |t: f64| (3.0 * t).sin() / (1.0 + t * t);
        let a = integrate(f, 0.0, 10.0, &cfg()).unwrap();
        let b = integrate(f, 0.0, 10.0, &cfg()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuadratureConfig::new(0.0, 1e-9, 10).is_err());
        assert!(QuadratureConfig::new(1e-9, -1.0, 10).is_err());
        assert!(QuadratureConfig::new(1e-9, 1e-9, 0).is_err());
    }

    #[test]
    fn inversion() {
        let t = invert_nondecreasing(|t| t * t, 9.0, 0.0, 1.0, 1e6).unwrap();
        assert_relative_eq!(t, 3.0, max_relative = 1e-12);
        assert!(invert_nondecreasing(|t: f64| 1.0 - (-t).exp(), 2.0, 0.0, 1.0, 1e6).is_none());
    }
}
