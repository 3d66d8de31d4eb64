//! Metric quantities of model manifolds `dt² + h(t)² dθ²`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{
    integrate_improper, integrate_with_breaks, ConvergenceResult, QuadratureConfig, QuadratureError, TailModel,
};
use crate::profiles::{parse_segment_line, render, ProfileError, WarpingProfile};
use crate::radial::RadialFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{what} must satisfy {requirement}, got {value}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("dimension must be at least 2, got {0}")]
    Dimension(u32),
    #[error("exponent p must be greater than 1, got {0}")]
    Exponent(f64),
    #[error("base radius must be positive, got {0}")]
    BaseRadius(f64),
    #[error("level {level} is not attained by the exhaustion below radius {limit}")]
    LevelNotAttained { level: f64, limit: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

fn domain(what: &'static str, requirement: &'static str, value: f64) -> GeometryError {
    GeometryError::Domain {
        what,
        requirement,
        value,
    }
}

/// Area of the unit sphere `S^{m-1} ⊂ ℝ^m`.
pub fn unit_sphere_area(m: u32) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * unit_sphere_area(m - 2),
    }
}

/// A Hölder pair `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponent {
    pub p: f64,
    pub q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, GeometryError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(GeometryError::Exponent(p));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }
}

/// Rotationally symmetric manifold of dimension `m` with warping function `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelManifold {
    pub dim: u32,
    pub profile: WarpingProfile,
    pub omega: f64,
    pub base_radius: f64,
    pub quadrature: QuadratureConfig,
}

impl ModelManifold {
    pub fn new(dim: u32, profile: WarpingProfile) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::Dimension(dim));
        }
        Ok(Self {
            dim,
            profile,
            omega: unit_sphere_area(dim),
            base_radius: 1.0,
            quadrature: QuadratureConfig::default(),
        })
    }

    pub fn with_base_radius(mut self, base: f64) -> Result<Self, GeometryError> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(GeometryError::BaseRadius(base));
        }
        self.base_radius = base;
        Ok(self)
    }

    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Result<Self, GeometryError> {
        cfg.validate()?;
        self.quadrature = cfg;
        Ok(self)
    }

    /// Flat `ℝ^m`.
    pub fn euclidean(dim: u32) -> Result<Self, GeometryError> {
        Self::new(dim, WarpingProfile::euclidean())
    }

    /// Surface with `h(t) = e^{-t}` for `t ≥ 1`.
    pub fn cusp() -> Self {
        Self::new(2, WarpingProfile::cusp()).expect("dimension 2")
    }

    /// Hyperbolic space of curvature −1.
    pub fn hyperbolic(dim: u32) -> Result<Self, GeometryError> {
        Self::new(dim, WarpingProfile::hyperbolic())
    }

    /// Kinks of `h` in `(lo, hi)`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.profile.breakpoints_in(lo, hi)
    }

    fn check_radius(t: f64) -> Result<(), GeometryError> {
        if !(t > 0.0) || t.is_infinite() {
            return Err(domain("radius", "0 < t < inf", t));
        }
        Ok(())
    }

    /// `A(∂B_t) = ω h(t)^{m-1}` without domain checks.
    pub fn area_unchecked(&self, t: f64) -> f64 {
        self.omega * self.profile.value(t).powi(self.dim as i32 - 1)
    }

    pub fn area(&self, t: f64) -> Result<f64, GeometryError> {
        Self::check_radius(t)?;
        Ok(self.area_unchecked(t))
    }

    /// `dA/dt` (right derivative at kinks).
    pub fn area_derivative(&self, t: f64) -> f64 {
        let k = self.dim as i32 - 1;
        self.omega * k as f64 * self.profile.value(t).powi(k - 1) * RadialFunction::derivative(&self.profile, t)
    }

    /// `∫_a^b A(s) ds`.
    pub fn shell_volume(&self, a: f64, b: f64) -> Result<f64, GeometryError> {
        if !(a >= 0.0 && b >= a && b.is_finite()) {
            return Err(domain("shell", "0 <= a <= b < inf", b - a));
        }
        let q = integrate_with_breaks(
            |s| self.area_unchecked(s),
            a,
            b,
            &self.breakpoints(a, b),
            &self.quadrature,
        )?;
        Ok(q.value)
    }

    /// `V(B_t) = ∫_0^t A(s) ds`.
    pub fn volume(&self, t: f64) -> Result<f64, GeometryError> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(domain("radius", "0 <= t < inf", t));
        }
        self.shell_volume(0.0, t)
    }

    /// Volumes at nondecreasing radii, accumulated shell by shell.
    pub fn volumes_at(&self, radii: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let mut out = Vec::with_capacity(radii.len());
        let (mut prev, mut acc) = (0.0, 0.0);
        for &r in radii {
            if r < prev {
                return Err(domain("radius sequence", "nondecreasing", r));
            }
            acc += self.shell_volume(prev, r)?;
            out.push(acc);
            prev = r;
        }
        Ok(out)
    }

    pub fn a_p_unchecked(&self, e: Exponent, t: f64) -> f64 {
        self.area_unchecked(t).powf(-1.0 / (e.p - 1.0))
    }

    /// `a_p(t) = A(∂B_t)^{-1/(p-1)}`.
    pub fn a_p(&self, e: Exponent, t: f64) -> Result<f64, GeometryError> {
        Self::check_radius(t)?;
        Ok(self.a_p_unchecked(e, t))
    }

    /// `b_p(t) = ((t − r₁) / (V(t) − V(r₁)))^{1/(p-1)}`.
    pub fn b_p(&self, e: Exponent, r1: f64, t: f64) -> Result<f64, GeometryError> {
        Self::check_radius(r1)?;
        if !(t > r1) {
            return Err(domain("t", "t > r1", t));
        }
        let shell = self.shell_volume(r1, t)?;
        Ok(((t - r1) / shell).powf(1.0 / (e.p - 1.0)))
    }

    /// `∫_a^b a_p(s) ds` for `0 < a ≤ b`.
    pub fn a_p_integral(&self, e: Exponent, a: f64, b: f64) -> Result<f64, GeometryError> {
        Self::check_radius(a)?;
        if !(b >= a) || b.is_infinite() {
            return Err(domain("upper limit", "finite and >= lower limit", b));
        }
        let q = integrate_with_breaks(
            |s| self.a_p_unchecked(e, s),
            a,
            b,
            &self.breakpoints(a, b),
            &self.quadrature,
        )?;
        Ok(q.value)
    }

    /// Tail model of `a_p` derived from the tail of `h`.
    pub fn a_p_tail(&self, e: Exponent) -> Result<TailModel, GeometryError> {
        let h = self.profile.tail_class()?;
        let power = -(self.dim as f64 - 1.0) / (e.p - 1.0);
        let scale = self.omega.powf(-1.0 / (e.p - 1.0));
        Ok(h.map_power(scale, power).map_err(ProfileError::from)?)
    }

    /// `∫_a^∞ a_p`, decided by the tail model.
    pub fn a_p_improper(&self, e: Exponent, a: f64) -> Result<ConvergenceResult, GeometryError> {
        Self::check_radius(a)?;
        let tail = self.a_p_tail(e)?;
        let horizon = crate::numerics::BOUNDED_TAIL_HORIZON * a.max(tail.valid_from);
        Ok(integrate_improper(
            |s| self.a_p_unchecked(e, s),
            a,
            &tail,
            &self.breakpoints(a, horizon),
            &self.quadrature,
        )?)
    }

    /// Evans-type potential `f(r) = ∫_{base}^r a_p` (signed below the base).
    pub fn evans_potential(&self, e: Exponent, r: f64) -> Result<f64, GeometryError> {
        Self::check_radius(r)?;
        let base = self.base_radius;
        if r >= base {
            self.a_p_integral(e, base, r)
        } else {
            Ok(-self.a_p_integral(e, r, base)?)
        }
    }

    /// `f(∞)`; finite exactly when the manifold is not p-parabolic.
    pub fn evans_limit(&self, e: Exponent) -> Result<ConvergenceResult, GeometryError> {
        self.a_p_improper(e, self.base_radius)
    }

    pub fn evans(&self, e: Exponent) -> EvansPotential<'_> {
        EvansPotential { manifold: self, e }
    }

    /// `(A |u'|^{p-2} u')' / A` at `r`, by differences of the flux.
    pub fn radial_p_laplacian_residual<U: RadialFunction + ?Sized>(
        &self,
        e: Exponent,
        u: &U,
        r: f64,
    ) -> Result<Residual, GeometryError> {
        Self::check_radius(r)?;
        let flux = |s: f64| {
            let d = u.derivative(s);
            if d == 0.0 {
                0.0
            } else {
                self.area_unchecked(s) * d.abs().powf(e.p - 2.0) * d
            }
        };
        let mut h = 1e-5 * r.max(1.0);
        if r - h <= 0.0 {
            h = 0.5 * r;
        }
        let mut kinks = self.breakpoints(r - h, r + h);
        kinks.extend(u.breakpoints(r - h, r + h));
        let area = self.area_unchecked(r);
        let (value, one_sided) = if kinks.is_empty() {
            ((flux(r + h) - flux(r - h)) / (2.0 * h * area), false)
        } else if kinks.iter().all(|&k| k <= r) {
            (
                (-3.0 * flux(r) + 4.0 * flux(r + h) - flux(r + 2.0 * h)) / (2.0 * h * area),
                true,
            )
        } else {
            (
                (3.0 * flux(r) - 4.0 * flux(r - h) + flux(r - 2.0 * h)) / (2.0 * h * area),
                true,
            )
        };
        Ok(Residual { value, one_sided })
    }

    /// Reads the manifold file grammar: `dim <m>`, optional `base <r0>`,
    /// then segment lines.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut dim = None;
        let mut base = None;
        let mut segments = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut words = body.split_whitespace();
            let head = words.next().unwrap_or("");
            let parse_err = |message: String| ProfileError::Parse { line, message };
            match head {
                "dim" | "base" => {
                    let rest: Vec<&str> = words.collect();
                    if rest.len() != 1 {
                        return Err(parse_err(format!("'{head}' takes exactly one value")).into());
                    }
                    if head == "dim" {
                        let m = rest[0]
                            .parse::<u32>()
                            .map_err(|_| parse_err(format!("invalid dimension '{}'", rest[0])))?;
                        dim = Some(m);
                    } else {
                        let r = rest[0]
                            .parse::<f64>()
                            .map_err(|_| parse_err(format!("invalid base radius '{}'", rest[0])))?;
                        base = Some(r);
                    }
                }
                _ => segments.push(parse_segment_line(body, line)?),
            }
        }
        let dim = dim.ok_or(ProfileError::Parse {
            line: 0,
            message: "missing 'dim' line".into(),
        })?;
        let manifold = Self::new(dim, WarpingProfile::new(segments)?)?;
        match base {
            Some(b) => manifold.with_base_radius(b),
            None => Ok(manifold),
        }
    }

    pub fn render(&self) -> String {
        format!(
            "dim {}\nbase {}\n{}",
            self.dim,
            self.base_radius,
            render(self.profile.segments())
        )
    }
}

/// Residual of the radial p-Laplacian; `one_sided` marks evaluations next to
/// a kink, where a one-sided second-order stencil was used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub one_sided: bool,
}

/// The potential `f(r) = ∫_{base}^r a_p` as a radial function.
#[derive(Debug, Clone, Copy)]
pub struct EvansPotential<'a> {
    manifold: &'a ModelManifold,
    e: Exponent,
}

impl EvansPotential<'_> {
    pub fn exponent(&self) -> Exponent {
        self.e
    }

    pub fn eval(&self, r: f64) -> Result<f64, GeometryError> {
        self.manifold.evans_potential(self.e, r)
    }

    /// The radius where `f` reaches `level ≥ 0`, by safeguarded Newton steps
    /// on incremental integrals.
    pub fn level_radius(&self, level: f64) -> Result<f64, GeometryError> {
        const LIMIT: f64 = 1e12;
        let m = self.manifold;
        if !(level >= 0.0) {
            return Err(domain("level", "level >= 0", level));
        }
        let (mut lo, mut f_lo) = (m.base_radius, 0.0);
        if level == 0.0 {
            return Ok(lo);
        }
        let mut hi = 2.0 * lo;
        let mut f_hi = f_lo + m.a_p_integral(self.e, lo, hi)?;
        while f_hi < level {
            if hi > LIMIT {
                return Err(GeometryError::LevelNotAttained { level, limit: LIMIT });
            }
            lo = hi;
            f_lo = f_hi;
            hi *= 2.0;
            f_hi = f_lo + m.a_p_integral(self.e, lo, hi)?;
        }
        let (mut x, mut fx) = (lo, f_lo);
        for _ in 0..200 {
            let slope = m.a_p_unchecked(self.e, x);
            let mut next = x + (level - fx) / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let f_next = fx
                + if next >= x {
                    m.a_p_integral(self.e, x, next)?
                } else {
                    -m.a_p_integral(self.e, next, x)?
                };
            if f_next < level {
                lo = next;
            } else {
                hi = next;
            }
            let step = (next - x).abs();
            x = next;
            fx = f_next;
            if step <= 4.0 * f64::EPSILON * x || (level - fx).abs() <= 1e-15 * level {
                break;
            }
        }
        Ok(x)
    }
}

impl RadialFunction for EvansPotential<'_> {
    fn value(&self, r: f64) -> f64 {
        self.eval(r).unwrap_or(f64::NAN)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.manifold.a_p_unchecked(self.e, r)
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.manifold.breakpoints(lo, hi)
    }
}
