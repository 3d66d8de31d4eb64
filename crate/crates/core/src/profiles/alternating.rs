use serde::{Deserialize, Serialize};

/// Warping pattern of period 4 alternating between `H t` and `t^β`.
///
/// With `τ = t − 4k`:
///
/// ```text
/// τ ∈ [0, w)        blend t^β → H t   (k ≥ 1; plain H t when k = 0)
/// τ ∈ [w, 3 − w)    H t
/// τ ∈ [3 − w, 3)    blend H t → t^β
/// τ ∈ [3, 4)        t^β
/// ```
///
/// so `h ≡ H t` on every `[4k+1, 4k+2]` and `h ≡ t^β` on every `[4k+3, 4k+4]`.
/// Blends use the cubic smoothstep weight, which keeps `h` between the two
/// branches and makes the gluing C¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternatingPattern {
    pub beta: f64,
    pub slope: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Linear,
    Power,
    /// Weight rises from the power branch to the linear one over `[start, start + w]`.
    Up {
        start: f64,
    },
    /// Weight falls from the linear branch to the power one over `[start, start + w]`.
    Down {
        start: f64,
    },
}

fn smoothstep(u: f64) -> (f64, f64) {
    (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u))
}

impl AlternatingPattern {
    pub const PERIOD: f64 = 4.0;

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.slope > 0.0 && self.slope.is_finite()) {
            return Err("alternating slope H must be positive");
        }
        if !self.beta.is_finite() {
            return Err("alternating exponent must be finite");
        }
        if !(self.width > 0.0 && self.width <= 1.0) {
            return Err("alternating transition width must lie in (0, 1]");
        }
        Ok(())
    }

    fn locate(&self, t: f64, from_left: bool) -> Piece {
        let mut k = (t / Self::PERIOD).floor();
        let mut tau = t - Self::PERIOD * k;
        if from_left && tau == 0.0 && k >= 1.0 {
            k -= 1.0;
            tau = Self::PERIOD;
        }
        let base = Self::PERIOD * k;
        let w = self.width;
        let before = |edge: f64| if from_left { tau <= edge } else { tau < edge };
        if before(w) {
            if k == 0.0 {
                Piece::Linear
            } else {
                Piece::Up { start: base }
            }
        } else if before(3.0 - w) {
            Piece::Linear
        } else if before(3.0) {
            Piece::Down { start: base + 3.0 - w }
        } else {
            Piece::Power
        }
    }

    fn branches(&self, t: f64) -> ((f64, f64), (f64, f64)) {
        let pw = t.powf(self.beta);
        ((self.slope * t, self.slope), (pw, self.beta * pw / t))
    }

    fn eval(&self, t: f64, from_left: bool) -> (f64, f64) {
        let ((lin, dlin), (pw, dpw)) = self.branches(t);
        let blend = |start: f64, from: (f64, f64), to: (f64, f64)| {
            let (s, ds) = smoothstep(((t - start) / self.width).clamp(0.0, 1.0));
            let ds = ds / self.width;
            (
                (1.0 - s) * from.0 + s * to.0,
                (1.0 - s) * from.1 + s * to.1 + ds * (to.0 - from.0),
            )
        };
        match self.locate(t, from_left) {
            Piece::Linear => (lin, dlin),
            Piece::Power => (pw, dpw),
            Piece::Up { start } => blend(start, (pw, dpw), (lin, dlin)),
            Piece::Down { start } => blend(start, (lin, dlin), (pw, dpw)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t, false).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t, false).1
    }

    pub fn left_derivative(&self, t: f64) -> f64 {
        self.eval(t, true).1
    }

    /// Internal breakpoints in the open interval `(lo, hi)`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(hi > lo) {
            return Vec::new();
        }
        let first = (lo / Self::PERIOD).floor().max(0.0) as u64;
        let hi_cap = if hi.is_finite() { hi } else { lo + 1e3 };
        let last = (hi_cap / Self::PERIOD).ceil() as u64;
        let w = self.width;
        let mut out = Vec::new();
        for k in first..=last {
            let base = Self::PERIOD * k as f64;
            let candidates: &[f64] = if k == 0 {
                &[3.0 - w, 3.0]
            } else {
                &[0.0, w, 3.0 - w, 3.0]
            };
            for &off in candidates {
                let t = base + off;
                if t > lo && t < hi && out.last() != Some(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Radii `4k + 3` where the power branch begins, up to `limit`.
    pub fn power_onsets(&self, limit: f64) -> Vec<f64> {
        (0..)
            .map(|k| Self::PERIOD * k as f64 + 3.0)
            .take_while(|&t| t <= limit)
            .collect()
    }
}
