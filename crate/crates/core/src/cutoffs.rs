//! Radial cutoffs between two spheres and their p-energies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Exponent, GeometryError, ModelManifold};
use crate::numerics::integrate_with_breaks;
use crate::profiles::{ProfileError, RadialProfile};
use crate::radial::RadialFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CutoffError {
    #[error("cutoff must equal {expected} at r = {at}, found {found}")]
    BoundaryValue { at: f64, expected: f64, found: f64 },
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("a random cutoff needs at least one interior knot")]
    NoKnots,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

fn check_radii(r1: f64, r2: f64) -> Result<(), GeometryError> {
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(GeometryError::Domain {
            what: "cutoff radii",
            requirement: "0 < r1 < r2 < inf",
            value: r2 - r1,
        });
    }
    Ok(())
}

/// The capacity-optimal cutoff `φ(r) = ∫_r^{r2} a_p / ∫_{r1}^{r2} a_p`.
#[derive(Debug, Clone, Copy)]
pub struct PhiCutoff<'a> {
    manifold: &'a ModelManifold,
    e: Exponent,
    pub r1: f64,
    pub r2: f64,
    total: f64,
}

impl<'a> PhiCutoff<'a> {
    pub fn new(manifold: &'a ModelManifold, e: Exponent, r1: f64, r2: f64) -> Result<Self, GeometryError> {
        check_radii(r1, r2)?;
        let total = manifold.a_p_integral(e, r1, r2)?;
        Ok(Self {
            manifold,
            e,
            r1,
            r2,
            total,
        })
    }

    /// `∫_{r1}^{r2} a_p`.
    pub fn normalizer(&self) -> f64 {
        self.total
    }

    pub fn eval(&self, r: f64) -> Result<f64, GeometryError> {
        if r <= self.r1 {
            return Ok(1.0);
        }
        if r >= self.r2 {
            return Ok(0.0);
        }
        Ok(self.manifold.a_p_integral(self.e, r, self.r2)? / self.total)
    }

    /// `∫|∇φ|^p dV = (∫_{r1}^{r2} a_p)^{1-p}`.
    pub fn energy(&self) -> f64 {
        self.total.powf(1.0 - self.e.p)
    }
}

impl RadialFunction for PhiCutoff<'_> {
    fn value(&self, r: f64) -> f64 {
        self.eval(r).unwrap_or(f64::NAN)
    }
    fn derivative(&self, r: f64) -> f64 {
        if r < self.r1 || r >= self.r2 {
            0.0
        } else {
            -self.manifold.a_p_unchecked(self.e, r) / self.total
        }
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = self.manifold.breakpoints(lo, hi);
        b.extend([self.r1, self.r2].into_iter().filter(|&t| t > lo && t < hi));
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

pub fn phi_eval(m: &ModelManifold, e: Exponent, r1: f64, r2: f64, r: f64) -> Result<f64, GeometryError> {
    PhiCutoff::new(m, e, r1, r2)?.eval(r)
}

pub fn phi_energy(m: &ModelManifold, e: Exponent, r1: f64, r2: f64) -> Result<f64, GeometryError> {
    Ok(PhiCutoff::new(m, e, r1, r2)?.energy())
}

/// `((1+ε)/(r2−r1))^p ∫_{r1}^{r2} A`.
pub fn xi_energy_bound(m: &ModelManifold, e: Exponent, r1: f64, r2: f64, epsilon: f64) -> Result<f64, CutoffError> {
    check_radii(r1, r2)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(CutoffError::Epsilon(epsilon));
    }
    Ok(((1.0 + epsilon) / (r2 - r1)).powf(e.p) * m.shell_volume(r1, r2)?)
}

/// Piecewise-C¹ ramp from 1 at `r1` to 0 at `r2` with slope at most
/// `(1+ε)/(r2−r1)`: a straight descent joined to the constants by quadratic
/// corners of width `c = (r2−r1) ε/(1+ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardCutoff {
    pub r1: f64,
    pub r2: f64,
    pub epsilon: f64,
}

impl StandardCutoff {
    pub const PLOT_EPSILON: f64 = 1e-3;

    pub fn new(r1: f64, r2: f64, epsilon: f64) -> Result<Self, CutoffError> {
        check_radii(r1, r2)?;
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(CutoffError::Epsilon(epsilon));
        }
        Ok(Self { r1, r2, epsilon })
    }

    pub fn max_slope(&self) -> f64 {
        (1.0 + self.epsilon) / (self.r2 - self.r1)
    }

    fn corner(&self) -> f64 {
        (self.r2 - self.r1) * self.epsilon / (1.0 + self.epsilon)
    }
}

impl RadialFunction for StandardCutoff {
    fn value(&self, r: f64) -> f64 {
        let (l, c, s) = (self.r2 - self.r1, self.corner(), self.max_slope());
        let x = r - self.r1;
        if x <= 0.0 {
            1.0
        } else if x >= l {
            0.0
        } else if x < c {
            1.0 - s * x * x / (2.0 * c)
        } else if x <= l - c {
            1.0 - s * c / 2.0 - s * (x - c)
        } else {
            s * (l - x) * (l - x) / (2.0 * c)
        }
    }
    fn derivative(&self, r: f64) -> f64 {
        let (l, c, s) = (self.r2 - self.r1, self.corner(), self.max_slope());
        let x = r - self.r1;
        if x < 0.0 || x >= l {
            0.0
        } else if x < c {
            -s * x / c
        } else if x <= l - c {
            -s
        } else {
            -s * (l - x) / c
        }
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let c = self.corner();
        let mut b: Vec<f64> = [self.r1, self.r1 + c, self.r2 - c, self.r2]
            .into_iter()
            .filter(|&t| t > lo && t < hi)
            .collect();
        b.dedup();
        b
    }
}

/// `∫_{r1}^{r2} |ψ'|^p A` after checking `ψ(r1) = 1` and `ψ(r2) = 0`.
pub fn custom_energy<F: RadialFunction + ?Sized>(
    m: &ModelManifold,
    e: Exponent,
    psi: &F,
    r1: f64,
    r2: f64,
) -> Result<f64, CutoffError> {
    check_radii(r1, r2)?;
    for (at, expected) in [(r1, 1.0), (r2, 0.0)] {
        let found = psi.value(at);
        if !((found - expected).abs() <= 1e-9) {
            return Err(CutoffError::BoundaryValue { at, expected, found });
        }
    }
    let mut breaks = m.breakpoints(r1, r2);
    breaks.extend(psi.breakpoints(r1, r2));
    let q = integrate_with_breaks(
        |s| psi.derivative(s).abs().powf(e.p) * m.area_unchecked(s),
        r1,
        r2,
        &breaks,
        &m.quadrature,
    )
    .map_err(GeometryError::from)?;
    Ok(q.value)
}

/// Piecewise-linear decreasing cutoff with `interior` random knots: sorted
/// uniform abscissae in `(r1, r2)` and drops given by normalized uniform
/// increments.
pub fn random_cutoff<R: Rng + ?Sized>(
    rng: &mut R,
    r1: f64,
    r2: f64,
    interior: usize,
) -> Result<RadialProfile, CutoffError> {
    check_radii(r1, r2)?;
    if interior == 0 {
        return Err(CutoffError::NoKnots);
    }
    let mut xs: Vec<f64> = (0..interior).map(|_| rng.random_range(r1..r2)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let drops: Vec<f64> = (0..=xs.len())
        .map(|_| rng.random::<f64>() + f64::MIN_POSITIVE)
        .collect();
    let total: f64 = drops.iter().sum();
    let mut knots = vec![(r1, 1.0)];
    let mut level = 1.0;
    for (x, d) in xs.iter().zip(&drops) {
        level -= d / total;
        if *x > knots.last().expect("non-empty").0 {
            knots.push((*x, level.max(0.0)));
        }
    }
    knots.push((r2, 0.0));
    Ok(RadialProfile::piecewise_linear(&knots)?)
}

/// `count` cutoffs from a ChaCha8 stream seeded with `seed`.
pub fn random_cutoffs(
    seed: u64,
    count: usize,
    r1: f64,
    r2: f64,
    interior: usize,
) -> Result<Vec<RadialProfile>, CutoffError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_cutoff(&mut rng, r1, r2, interior)).collect()
}

/// `max(min(2r − f, r), 0)`.
pub fn plateau_value(f: f64, r: f64) -> f64 {
    (2.0 * r - f).min(r).max(0.0)
}

/// Truncation `f_r = max(min(2r − f, r), 0)` of an exhaustion `f`.
#[derive(Debug, Clone, Copy)]
pub struct Plateau<F> {
    pub f: F,
    pub r: f64,
}

pub fn plateau_truncation<F: RadialFunction>(f: F, r: f64) -> Plateau<F> {
    Plateau { f, r }
}

impl<F: RadialFunction> RadialFunction for Plateau<F> {
    fn value(&self, s: f64) -> f64 {
        plateau_value(self.f.value(s), self.r)
    }
    fn derivative(&self, s: f64) -> f64 {
        let v = self.f.value(s);
        if v >= self.r && v < 2.0 * self.r {
            -self.f.derivative(s)
        } else {
            0.0
        }
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.f.breakpoints(lo, hi)
    }
}

/// One row of an energy sweep over annuli `(r, 2r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub phi_energy: f64,
    pub xi_bound: f64,
    pub ratio: f64,
}

/// Energies of `φ_{r,2r}` and the bound for `ξ_{r,2r}`, optionally divided by
/// the unit-sphere area.
pub fn energy_sweep(
    m: &ModelManifold,
    e: Exponent,
    radii: &[f64],
    epsilon: f64,
    per_unit_sphere: bool,
) -> Result<Vec<SweepRow>, CutoffError> {
    let scale = if per_unit_sphere { 1.0 / m.omega } else { 1.0 };
    radii
        .iter()
        .map(|&r| {
            let phi = phi_energy(m, e, r, 2.0 * r)? * scale;
            let xi = xi_energy_bound(m, e, r, 2.0 * r, epsilon)? * scale;
            Ok(SweepRow {
                r,
                phi_energy: phi,
                xi_bound: xi,
                ratio: phi / xi,
            })
        })
        .collect()
}
