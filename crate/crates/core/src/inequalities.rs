//! Scalar inequalities behind the vanishing theorem for differences of
//! p-harmonic maps: the monotonicity of `v ↦ |v|^{p-2} v`, the bound on the
//! negative divergence part, and the maximum of `2t/(A+t)^{3/2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InequalityError {
    #[error("exponent must exceed 1, got {0}")]
    Exponent(f64),
    #[error("vectors must be non-empty and of equal length")]
    Dimension,
    #[error("non-finite vector entry")]
    NonFinite,
    #[error("degenerate sampling: {0}")]
    Sampling(String),
    #[error("{what} must be positive, got {value}")]
    Domain { what: &'static str, value: f64 },
}

fn check(x: &[f64], y: &[f64], p: f64) -> Result<(), InequalityError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(InequalityError::Exponent(p));
    }
    if x.is_empty() || x.len() != y.len() {
        return Err(InequalityError::Dimension);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(InequalityError::NonFinite);
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `|x−y|^p` for `p ≥ 2`, `|x−y|² / (|x|+|y|)^{2−p}` for `1 < p < 2`
/// (zero at `x = y = 0`).
pub fn psi(x: &[f64], y: &[f64], p: f64) -> Result<f64, InequalityError> {
    check(x, y, p)?;
    Ok(psi_unchecked(x, y, p))
}

fn psi_unchecked(x: &[f64], y: &[f64], p: f64) -> f64 {
    let d2 = dist_sq(x, y);
    if p >= 2.0 {
        d2.powf(0.5 * p)
    } else if d2 == 0.0 {
        0.0
    } else {
        d2 * (norm(x) + norm(y)).powf(p - 2.0)
    }
}

/// `⟨|x|^{p−2}x − |y|^{p−2}y, x − y⟩`, with `|0|^{p−2}·0 = 0`.
pub fn lindqvist_lhs(x: &[f64], y: &[f64], p: f64) -> Result<f64, InequalityError> {
    check(x, y, p)?;
    Ok(lhs_unchecked(x, y, p))
}

fn lhs_unchecked(x: &[f64], y: &[f64], p: f64) -> f64 {
    let scale = |v: &[f64]| {
        let n = norm(v);
        if n == 0.0 {
            0.0
        } else {
            n.powf(p - 2.0)
        }
    };
    let (sx, sy) = (scale(x), scale(y));
    x.iter().zip(y).map(|(a, b)| (sx * a - sy * b) * (a - b)).sum()
}

fn ratio(x: &[f64], y: &[f64], p: f64) -> Option<f64> {
    let psi = psi_unchecked(x, y, p);
    (psi > 0.0).then(|| lhs_unchecked(x, y, p) / (2.0 * psi))
}

pub const MIN_SAMPLES: usize = 1000;
const SHARDS: u64 = 16;

/// Empirical `C(p)`: the smallest `lhs / (2 Ψ)` seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpEstimate {
    pub p: f64,
    pub n: usize,
    #[serde(rename = "estimated_Cp")]
    pub estimated_cp: f64,
    pub seed: u64,
    pub sample_count: usize,
}

/// Deterministic pairs where the infimum tends to sit. The ratio depends only
/// on `|y|/|x|` and the angle between them, so a grid in those two parameters
/// covers it; scaled copies probe tiny norms.
fn adversarial_pairs(n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let angles: Vec<f64> = if n == 1 {
        vec![0.0, std::f64::consts::PI]
    } else {
        (0..=200)
            .map(|k| std::f64::consts::PI * (k as f64 / 200.0).max(1e-4))
            .collect()
    };
    for i in 0..=200 {
        let s = i as f64 / 200.0;
        for &th in &angles {
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            x[0] = 1.0;
            y[0] = s * th.cos();
            if n > 1 {
                y[1] = s * th.sin();
            }
            out.push((x, y));
        }
    }
    let tiny: Vec<_> = out
        .iter()
        .step_by(97)
        .map(|(x, y)| {
            (
                x.iter().map(|v| v * 1e-50).collect(),
                y.iter().map(|v| v * 1e-50).collect(),
            )
        })
        .collect();
    out.extend(tiny);
    out
}

fn shard_seed(seed: u64, shard: u64) -> u64 {
    // splitmix64 step
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(shard + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Infimum of `lhs / (2Ψ)` over Gaussian pairs plus adversarial pairs. The
/// sampling is split into shards with derived seeds, so the result does not
/// depend on the thread count.
pub fn estimate_cp(p: f64, n: usize, sample_count: usize, seed: u64) -> Result<CpEstimate, InequalityError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(InequalityError::Exponent(p));
    }
    if n == 0 {
        return Err(InequalityError::Dimension);
    }
    if sample_count < MIN_SAMPLES {
        return Err(InequalityError::Sampling(format!(
            "need at least {MIN_SAMPLES} samples, got {sample_count}"
        )));
    }
    let per = sample_count.div_ceil(SHARDS as usize);
    let random = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(seed, s));
            let take = per.min(sample_count.saturating_sub(s as usize * per));
            let mut best = f64::INFINITY;
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            for _ in 0..take {
                x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                y.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                if let Some(r) = ratio(&x, &y, p) {
                    best = best.min(r);
                }
            }
            best
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let adversarial = adversarial_pairs(n)
        .par_iter()
        .filter_map(|(x, y)| ratio(x, y, p))
        .reduce(|| f64::INFINITY, f64::min);
    let estimated_cp = random.min(adversarial);
    if !(estimated_cp > 0.0 && estimated_cp.is_finite()) {
        return Err(InequalityError::Sampling(format!(
            "estimate {estimated_cp} is not positive"
        )));
    }
    Ok(CpEstimate {
        p,
        n,
        estimated_cp,
        seed,
        sample_count,
    })
}

/// Counts pairs among `sample_count` fresh Gaussian draws where
/// `lhs < 2 c Ψ`.
pub fn count_violations(p: f64, n: usize, c: f64, sample_count: usize, seed: u64) -> Result<usize, InequalityError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(InequalityError::Exponent(p));
    }
    if n == 0 {
        return Err(InequalityError::Dimension);
    }
    let per = sample_count.div_ceil(SHARDS as usize);
    Ok((0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(seed, s));
            let take = per.min(sample_count.saturating_sub(s as usize * per));
            let mut bad = 0;
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            for _ in 0..take {
                x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                y.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                if lhs_unchecked(&x, &y, p) < 2.0 * c * psi_unchecked(&x, &y, p) {
                    bad += 1;
                }
            }
            bad
        })
        .sum())
}

/// `2t/(A+t)^{3/2} Σ ≤ (2/√A) Σ` with `Σ = du_p + dv_p`.
pub fn fa_negpart_bound_check(du_p: f64, dv_p: f64, t: f64, a: f64) -> bool {
    let sigma = du_p + dv_p;
    let lhs = 2.0 * t / (a + t).powf(1.5) * sigma;
    let rhs = 2.0 / a.sqrt() * sigma;
    lhs <= rhs * (1.0 + 1e-12)
}

/// Grid of `points` seeded samples with `t ∈ [0, 10⁶]`, `A ∈ (1, 10⁶]`;
/// returns the failures.
pub fn negpart_grid(points: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..points {
        // log-uniform in both, so that small and large scales are covered
        let t = if i % 10 == 0 {
            0.0
        } else {
            10f64.powf(rng.random_range(-6.0..6.0))
        };
        let a = 10f64.powf(rng.random_range(0.0..6.0)).max(1.0 + 1e-12);
        let du = rng.random_range(0.0..10.0);
        let dv = rng.random_range(0.0..10.0);
        if !fa_negpart_bound_check(du, dv, t, a) {
            bad.push((du, dv, t, a));
        }
    }
    bad
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmaxReport {
    pub a: f64,
    pub argmax: f64,
    pub value: f64,
    pub increasing_below_argmax: bool,
}

/// `g(t) = 2t/(A+t)^{3/2}`.
pub fn tmax_objective(a: f64, t: f64) -> f64 {
    2.0 * t / (a + t).powf(1.5)
}

/// Maximizer of `g` on `[0, ∞)`: golden section on `[0, 10A]`, refined by
/// bisection on the sign of `g' ∝ 2A − t`; monotonicity is checked on a
/// 1000-point grid of `(0, argmax)`.
pub fn tmax_check(a: f64) -> Result<TmaxReport, InequalityError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(InequalityError::Domain { what: "A", value: a });
    }
    let g = |t: f64| tmax_objective(a, t);
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 10.0 * a);
    let mut c = hi - invphi * (hi - lo);
    let mut d = lo + invphi * (hi - lo);
    while hi - lo > 1e-6 * a.max(1.0) {
        if g(c) > g(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - invphi * (hi - lo);
        d = lo + invphi * (hi - lo);
    }
    // g'(t) = (A+t)^{-5/2} (2A - t)
    let slope = |t: f64| (a + t).powf(-2.5) * (2.0 * a - t);
    lo -= 1e-6 * a.max(1.0);
    hi += 1e-6 * a.max(1.0);
    while hi - lo > 1e-12 * a.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let argmax = 0.5 * (lo + hi);
    let grid: Vec<f64> = (1..=1000).map(|k| argmax * k as f64 / 1001.0).collect();
    let increasing = grid.windows(2).all(|w| g(w[1]) > g(w[0]));
    Ok(TmaxReport {
        a,
        argmax,
        value: g(argmax),
        increasing_below_argmax: increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&[1.0, 0.0], &[0.0, 0.0], 3.0).unwrap(), 1.0);
        assert_relative_eq!(
            psi(&[1.0, 0.0], &[-1.0, 0.0], 1.5).unwrap(),
            4.0 / 2f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(psi(&[0.0], &[0.0], 1.5).unwrap(), 0.0);
        assert_relative_eq!(psi(&[1.0, 2.0], &[0.5, -1.0], 2.0).unwrap(), 9.25, max_relative = 1e-15);
        assert!(psi(&[1.0], &[0.0], 1.0).is_err());
        assert!(psi(&[1.0], &[0.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn lhs_examples() {
        assert_eq!(lindqvist_lhs(&[1.0, 0.0], &[0.0, 0.0], 3.0).unwrap(), 1.0);
        assert_eq!(lindqvist_lhs(&[1.0, 3.0], &[1.0, 3.0], 1.7).unwrap(), 0.0);
        assert_relative_eq!(
            lindqvist_lhs(&[1.0, 2.0], &[0.5, -1.0], 2.0).unwrap(),
            9.25,
            max_relative = 1e-15
        );
        assert_eq!(lindqvist_lhs(&[0.0, 0.0], &[0.0, 0.0], 1.5).unwrap(), 0.0);
    }

    #[test]
    fn cp_p2_is_half() {
        let e = estimate_cp(2.0, 3, 2000, 7).unwrap();
        assert!((e.estimated_cp - 0.5).abs() < 1e-12);
        assert!(estimate_cp(2.0, 3, 10, 7).is_err());
    }

    #[test]
    fn cp_p3_matches_antipodal_pairs() {
        // x = -y gives 2^{1-p}, the infimum for p >= 2
        let e = estimate_cp(3.0, 2, 5000, 1).unwrap();
        assert_relative_eq!(e.estimated_cp, 0.25, max_relative = 1e-9);
    }

    #[test]
    fn tmax_values() {
        let r = tmax_check(1.0).unwrap();
        assert!((r.argmax - 2.0).abs() < 1e-9);
        assert_relative_eq!(r.value, 4.0 / (3.0 * 3f64.sqrt()), max_relative = 1e-12);
        assert!(r.increasing_below_argmax);
        let r = tmax_check(4.0).unwrap();
        assert!((r.argmax - 8.0).abs() < 1e-9);
        assert_relative_eq!(r.value, 4.0 / (6.0 * 3f64.sqrt()), max_relative = 1e-12);
        assert!(tmax_check(0.0).is_err());
    }

    #[test]
    fn negpart_examples() {
        assert!(fa_negpart_bound_check(1.0, 2.0, 0.0, 2.0));
        assert!(fa_negpart_bound_check(1.0, 2.0, 4.0, 2.0));
        assert!(negpart_grid(1000, 3).is_empty());
    }
}
