//! Radial scalar functions on `(0, ∞)`.

use std::sync::Arc;

/// A scalar function of the radial coordinate.
///
/// At breakpoints both methods follow the right-continuous convention.
/// Values for `r ≤ 0` are unspecified and may be `NaN`.
pub trait RadialFunction: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
    /// Points in `(lo, hi)` where the function or its derivative may jump.
    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl<T: RadialFunction + ?Sized> RadialFunction for Arc<T> {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (**self).derivative(r)
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        (**self).breakpoints(lo, hi)
    }
}

impl<T: RadialFunction + ?Sized> RadialFunction for &T {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (**self).derivative(r)
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        (**self).breakpoints(lo, hi)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial function assembled from closures.
#[derive(Clone)]
pub struct FnRadial {
    value: ScalarFn,
    derivative: ScalarFn,
    breaks: Vec<f64>,
}

impl FnRadial {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            breaks: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, mut breaks: Vec<f64>) -> Self {
        breaks.sort_by(f64::total_cmp);
        self.breaks = breaks;
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }
}

impl std::fmt::Debug for FnRadial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnRadial")
            .field("breaks", &self.breaks)
            .finish_non_exhaustive()
    }
}

impl RadialFunction for FnRadial {
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.breaks.iter().copied().filter(|&t| t > lo && t < hi).collect()
    }
}
