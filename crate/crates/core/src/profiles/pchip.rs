use serde::{Deserialize, Serialize};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
///
/// Flat extrapolation outside the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, &'static str> {
        if xs.len() != ys.len() {
            return Err("abscissae and values differ in length");
        }
        if xs.len() < 2 {
            return Err("at least two samples are required");
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("abscissae must be strictly increasing");
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err("samples must be finite");
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 {
                0.0
            } else {
                0.5 * (secants[i - 1] + secants[i])
            };
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secants[i];
            let b = slopes[i + 1] / secants[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * secants[i];
                slopes[i + 1] = tau * b * secants[i];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn cell(&self, x: f64) -> Option<usize> {
        let n = self.xs.len();
        if x < self.xs[0] || x >= self.xs[n - 1] {
            return None;
        }
        Some(self.xs.partition_point(|&k| k <= x) - 1)
    }

    pub fn value(&self, x: f64) -> f64 {
        let Some(i) = self.cell(x) else {
            return if x < self.xs[0] {
                self.ys[0]
            } else {
                self.ys[self.ys.len() - 1]
            };
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let Some(i) = self.cell(x) else {
            return 0.0;
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * self.ys[i]) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[i]
            + ((-6.0 * t2 + 6.0 * t) * self.ys[i + 1]) / h
            + (3.0 * t2 - 2.0 * t) * self.slopes[i + 1]
    }
}
