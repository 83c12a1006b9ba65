//! Locally layered stable Levy measures: representation, characteristic
//! exponents and the structural hypothesis audits (moments, equator
//! condition, Orey-Masuda cone bound, Hoelder continuity of the exponent).
//!
//! A measure here is nu = nu_0 + nu_inf with inner layer
//! nu_0(dz) = q(r, theta) dr Lambda(dtheta) on r in (0, 1] and a finite
//! tail nu_inf supported on |z| > 1. The radial density factors as
//! q(r, theta) = c0(theta) a(r) r^(-1-alpha) with a shape function
//! a(r) -> 1 as r -> 0, which keeps every acceptance ratio and quadrature
//! finite and testable.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, QuadParams};
use crate::rng::RngStream;

/// One atom of the spherical measure Lambda.
#[derive(Debug, Clone)]
pub struct SpectralAtom {
    /// Unit direction on S^{d-1}.
    pub direction: DVector<f64>,
    /// Lambda({direction}) > 0.
    pub weight: f64,
    /// Limit intensity c0(direction) > 0.
    pub c0: f64,
}

#[derive(Clone)]
pub enum SpectralMeasure {
    Atoms(Vec<SpectralAtom>),
    /// Rotationally invariant Lambda with the given total mass and a
    /// constant c0.
    Isotropic { dim: usize, total_mass: f64, c0: f64 },
}

impl fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralMeasure::Atoms(a) => write!(f, "Atoms({} atoms)", a.len()),
            SpectralMeasure::Isotropic { dim, total_mass, c0 } => {
                write!(f, "Isotropic(d={dim}, mass={total_mass}, c0={c0})")
            }
        }
    }
}

/// Radial shape a(r) = q(r, theta) r^{1+alpha} / c0(theta), identical
/// across directions.
#[derive(Clone)]
pub enum RadialProfile {
    PureStable,
    /// a(r) = exp(-mu r).
    Tempered { mu: f64 },
    /// a(r) = (r / (2 sinh(r/2)))^{1+alpha}; the Lamperti-stable small-r
    /// shape, an exact sub-stable envelope.
    Lamperti,
    /// User shape; must satisfy a(r) -> 1 as r -> 0 and a <= 1 for the
    /// rejection sampler to stay exact.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::PureStable => write!(f, "PureStable"),
            RadialProfile::Tempered { mu } => write!(f, "Tempered(mu={mu})"),
            RadialProfile::Lamperti => write!(f, "Lamperti"),
            RadialProfile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl RadialProfile {
    pub fn shape(&self, r: f64, alpha: f64) -> f64 {
        match self {
            RadialProfile::PureStable => 1.0,
            RadialProfile::Tempered { mu } => (-mu * r).exp(),
            RadialProfile::Lamperti => {
                if r < 1e-8 {
                    1.0
                } else {
                    (r / (2.0 * (0.5 * r).sinh())).powf(1.0 + alpha)
                }
            }
            RadialProfile::Custom(f) => f(r),
        }
    }

    pub fn is_pure_stable(&self) -> bool {
        matches!(self, RadialProfile::PureStable)
    }
}

/// Finite tail measure nu_inf on |z| > 1. Radial laws are combined with
/// the direction law induced by the (normalized) spectral measure, except
/// for explicit point masses.
#[derive(Debug, Clone)]
pub enum TailSpec {
    None,
    /// c0(theta) r^{-1-alpha} continued to r > 1: makes a pure-stable
    /// inner layer exactly alpha-stable.
    StableContinuation,
    /// rate x Uniform(r_min, r_max) radius, 1 <= r_min < r_max.
    UniformShell { rate: f64, r_min: f64, r_max: f64 },
    /// rate x Pareto radius density p r^{-1-p} on (1, inf).
    Pareto { rate: f64, exponent: f64 },
    /// Fixed jumps with individual rates.
    PointMasses(Vec<(DVector<f64>, f64)>),
}

#[derive(Debug, Clone)]
pub struct LevyMeasureSpec {
    pub alpha: f64,
    pub spectral: SpectralMeasure,
    pub radial: RadialProfile,
    pub tail: TailSpec,
    /// Declared finite-moment order for the tail.
    pub beta: f64,
    pub symmetric_small_jumps: bool,
}

impl LevyMeasureSpec {
    pub fn dim(&self) -> usize {
        match &self.spectral {
            SpectralMeasure::Atoms(a) => a[0].direction.len(),
            SpectralMeasure::Isotropic { dim, .. } => *dim,
        }
    }

    /// Smallest c0 over the support of Lambda.
    pub fn c0_min(&self) -> f64 {
        match &self.spectral {
            SpectralMeasure::Atoms(a) => a.iter().map(|x| x.c0).fold(f64::INFINITY, f64::min),
            SpectralMeasure::Isotropic { c0, .. } => *c0,
        }
    }

    pub fn c0_max(&self) -> f64 {
        match &self.spectral {
            SpectralMeasure::Atoms(a) => a.iter().map(|x| x.c0).fold(0.0, f64::max),
            SpectralMeasure::Isotropic { c0, .. } => *c0,
        }
    }

    /// Lambda(S^{d-1}).
    pub fn spectral_mass(&self) -> f64 {
        match &self.spectral {
            SpectralMeasure::Atoms(a) => a.iter().map(|x| x.weight).sum(),
            SpectralMeasure::Isotropic { total_mass, .. } => *total_mass,
        }
    }

    /// sum of w c0 over atoms, or total_mass * c0: the mass of Lambda_1.
    pub fn weighted_c0_mass(&self) -> f64 {
        match &self.spectral {
            SpectralMeasure::Atoms(a) => a.iter().map(|x| x.weight * x.c0).sum(),
            SpectralMeasure::Isotropic { total_mass, c0, .. } => total_mass * c0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidSpec(format!("alpha = {} not in (0,2)", self.alpha)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidSpec("beta must be positive".into()));
        }
        match &self.spectral {
            SpectralMeasure::Atoms(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidSpec("empty spectral measure".into()));
                }
                let d = atoms[0].direction.len();
                for a in atoms {
                    if a.direction.len() != d {
                        return Err(Error::InvalidSpec("mixed atom dimensions".into()));
                    }
                    if (a.direction.norm() - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidSpec("atom direction is not a unit vector".into()));
                    }
                    if !(a.weight > 0.0 && a.weight.is_finite()) {
                        return Err(Error::InvalidSpec("atom weight must be positive and finite".into()));
                    }
                    if !(a.c0 > 0.0 && a.c0.is_finite()) {
                        return Err(Error::InvalidSpec("atom c0 must be positive and finite".into()));
                    }
                }
                if self.symmetric_small_jumps && !self.atoms_symmetric(1e-9) {
                    return Err(Error::InvalidSpec(
                        "symmetric_small_jumps asserted but atoms are not symmetric".into(),
                    ));
                }
            }
            SpectralMeasure::Isotropic { dim, total_mass, c0 } => {
                if *dim == 0 {
                    return Err(Error::InvalidSpec("dimension 0".into()));
                }
                if !(*total_mass > 0.0) || !(*c0 > 0.0) {
                    return Err(Error::InvalidSpec("isotropic mass and c0 must be positive".into()));
                }
            }
        }
        // Layered condition: shape converges to 1 on a decreasing r-grid.
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let r = 10f64.powi(-k);
            let dev = (self.radial.shape(r, self.alpha) - 1.0).abs();
            if dev > prev + 1e-12 && dev > 1e-3 {
                return Err(Error::InvalidSpec(
                    "radial shape does not converge to the stable profile as r -> 0".into(),
                ));
            }
            prev = prev.min(dev);
        }
        if (self.radial.shape(1e-8, self.alpha) - 1.0).abs() > 1e-3 {
            return Err(Error::InvalidSpec("radial shape limit at 0 differs from c0".into()));
        }
        match &self.tail {
            TailSpec::StableContinuation => {
                if self.beta >= self.alpha {
                    return Err(Error::InvalidSpec(format!(
                        "stable-continuation tail has finite moments only below alpha; beta = {} >= alpha = {}",
                        self.beta, self.alpha
                    )));
                }
            }
            TailSpec::Pareto { rate, exponent } => {
                if !(*rate >= 0.0 && *exponent > 0.0) {
                    return Err(Error::InvalidSpec("Pareto tail needs rate >= 0 and exponent > 0".into()));
                }
            }
            TailSpec::UniformShell { rate, r_min, r_max } => {
                if !(*rate >= 0.0 && *r_min >= 1.0 && r_max > r_min) {
                    return Err(Error::InvalidSpec("uniform shell needs rate >= 0 and 1 <= r_min < r_max".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn atoms_symmetric(&self, tol: f64) -> bool {
        let atoms = match &self.spectral {
            SpectralMeasure::Atoms(a) => a,
            SpectralMeasure::Isotropic { .. } => return true,
        };
        atoms.iter().all(|a| {
            atoms.iter().any(|b| {
                (&a.direction + &b.direction).norm() < tol
                    && (a.weight - b.weight).abs() < tol * (1.0 + a.weight)
                    && (a.c0 - b.c0).abs() < tol * (1.0 + a.c0)
            })
        })
    }

    /// True if the whole measure (tail included) is symmetric under z -> -z.
    pub fn is_symmetric(&self) -> bool {
        let tail_sym = match &self.tail {
            TailSpec::None | TailSpec::StableContinuation | TailSpec::UniformShell { .. } | TailSpec::Pareto { .. } => {
                self.atoms_symmetric(1e-9)
            }
            TailSpec::PointMasses(pm) => pm.iter().all(|(z, w)| {
                pm.iter()
                    .any(|(z2, w2)| (z + z2).norm() < 1e-9 && (w - w2).abs() < 1e-9 * (1.0 + w))
            }),
        };
        self.atoms_symmetric(1e-9) && tail_sym
    }

    /// Exact alpha-stable law of the driver when the spec is pure-stable
    /// with the stable tail continuation; None otherwise.
    pub fn exact_stable_law(&self) -> Option<StableLaw> {
        if self.radial.is_pure_stable() && matches!(self.tail, TailSpec::StableContinuation) {
            Some(self.short_range_stable_law())
        } else {
            None
        }
    }

    /// S_alpha(Lambda_1) with Lambda_1(dtheta) = c0(theta) Lambda(dtheta):
    /// the short-range limit law of the inner layer.
    pub fn short_range_stable_law(&self) -> StableLaw {
        let ca = c_alpha(self.alpha);
        match &self.spectral {
            SpectralMeasure::Isotropic { dim, total_mass, c0 } => {
                let k = ca * total_mass * c0 * sphere_cos_alpha_moment(*dim, self.alpha);
                StableLaw {
                    alpha: self.alpha,
                    components: StableComponents::Isotropic { dim: *dim, sigma: k.powf(1.0 / self.alpha) },
                }
            }
            SpectralMeasure::Atoms(atoms) => {
                // Pair up +/- directions; each pair feeds one 1D factor.
                let mut used = vec![false; atoms.len()];
                let mut comps = Vec::new();
                for i in 0..atoms.len() {
                    if used[i] {
                        continue;
                    }
                    used[i] = true;
                    let mut gamma_i = atoms[i].weight * atoms[i].c0;
                    for j in (i + 1)..atoms.len() {
                        if !used[j] && (&atoms[i].direction + &atoms[j].direction).norm() < 1e-9 {
                            used[j] = true;
                            gamma_i += atoms[j].weight * atoms[j].c0;
                            break;
                        }
                    }
                    comps.push((atoms[i].direction.clone(), (ca * gamma_i).powf(1.0 / self.alpha)));
                }
                StableLaw { alpha: self.alpha, components: StableComponents::AxisFactors(comps) }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exact symmetric stable laws
// ---------------------------------------------------------------------------

/// Symmetric alpha-stable law given by its scale-spectral structure:
/// psi(u) = -sum_j sigma_j^alpha |<u, theta_j>|^alpha  (axis factors), or
/// psi(u) = -(sigma |u|)^alpha                          (isotropic).
#[derive(Debug, Clone)]
pub struct StableLaw {
    pub alpha: f64,
    pub components: StableComponents,
}

#[derive(Debug, Clone)]
pub enum StableComponents {
    Isotropic { dim: usize, sigma: f64 },
    /// (unit direction, scale sigma_j) of independent 1D factors.
    AxisFactors(Vec<(DVector<f64>, f64)>),
}

impl StableLaw {
    pub fn dim(&self) -> usize {
        match &self.components {
            StableComponents::Isotropic { dim, .. } => *dim,
            StableComponents::AxisFactors(v) => v[0].0.len(),
        }
    }

    /// Characteristic exponent psi(u), real for these symmetric laws.
    pub fn exponent(&self, u: &DVector<f64>) -> f64 {
        match &self.components {
            StableComponents::Isotropic { sigma, .. } => -(sigma * u.norm()).powf(self.alpha),
            StableComponents::AxisFactors(v) => -v
                .iter()
                .map(|(th, s)| (s * u.dot(th).abs()).powf(self.alpha))
                .sum::<f64>(),
        }
    }

    /// Scale the law by c > 0 (law of c X).
    pub fn scaled(&self, c: f64) -> StableLaw {
        let components = match &self.components {
            StableComponents::Isotropic { dim, sigma } => {
                StableComponents::Isotropic { dim: *dim, sigma: sigma * c }
            }
            StableComponents::AxisFactors(v) => StableComponents::AxisFactors(
                v.iter().map(|(t, s)| (t.clone(), s * c)).collect(),
            ),
        };
        StableLaw { alpha: self.alpha, components }
    }
}

/// 1 - cos(y) without cancellation.
#[inline]
pub fn one_minus_cos(y: f64) -> f64 {
    let s = (0.5 * y).sin();
    2.0 * s * s
}

/// sin(y) - y without cancellation.
#[inline]
pub fn sin_minus_linear(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y3 = y * y * y;
        -y3 / 6.0 + y3 * y * y / 120.0
    } else {
        y.sin() - y
    }
}

/// C_alpha = int_0^inf (1 - cos s) s^{-1-alpha} ds, the constant linking a
/// stable Levy density c |r|^{-1-alpha} to the scale-spectral weight.
pub fn c_alpha(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 2.0);
    let p = QuadParams { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2048 };
    let breaks = quad::geometric_breaks(0.0, 1.0, 0.1, 14);
    let head = quad::integrate_with_breaks(|s| [one_minus_cos(s) * s.powf(-1.0 - alpha)], 1e-280, 1.0, &breaks, &p);
    // On [1, inf): int s^{-1-alpha} = 1/alpha exactly, minus the oscillatory part.
    head.value[0] + 1.0 / alpha - quad::cos_power_tail(1.0, 1.0 + alpha)
}

/// E |<e1, Theta>|^alpha for Theta uniform on S^{d-1}.
pub fn sphere_cos_alpha_moment(dim: usize, alpha: f64) -> f64 {
    if dim == 1 {
        return 1.0;
    }
    let d = dim as f64;
    gamma(d / 2.0) * gamma((alpha + 1.0) / 2.0) / (gamma(0.5) * gamma((alpha + d) / 2.0))
}

// ---------------------------------------------------------------------------
// Characteristic exponent
// ---------------------------------------------------------------------------

/// Gauss-Legendre style reduction of a sphere average to the cosine
/// t = <v, theta>: weights proportional to (1-t^2)^{(d-3)/2} on [-1,1].
/// Returns (t_i, w_i) with sum w_i = 1.
fn sphere_cosine_rule(dim: usize, n: usize) -> Vec<(f64, f64)> {
    assert!(dim >= 2);
    let p = QuadParams::default();
    let pow = (dim as f64 - 3.0) / 2.0;
    let total = quad::integrate_with_breaks(
        |t| [(1.0 - t * t).max(0.0).powf(pow)],
        -1.0 + 1e-12,
        1.0 - 1e-12,
        &quad::geometric_breaks(-1.0, 1.0, 0.5, 8),
        &p,
    )
    .value[0];
    // Midpoint rule on a Chebyshev-like stretched grid is plenty here; the
    // integrands downstream are smooth in t.
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = -1.0 + 2.0 * i as f64 / n as f64;
        let b = -1.0 + 2.0 * (i + 1) as f64 / n as f64;
        let w = quad::integrate(|t| [(1.0 - t * t).max(0.0).powf(pow)], a.max(-1.0 + 1e-12), b.min(1.0 - 1e-12), &p).value[0];
        out.push((0.5 * (a + b), w / total));
    }
    out
}

/// Inner-layer compensated cosine integral for projection s:
/// int_0^1 (cos(s r) - 1) a(r) r^{-1-alpha} dr.
fn inner_cos_integral(spec: &LevyMeasureSpec, s: f64, params: &QuadParams) -> (f64, f64) {
    let alpha = spec.alpha;
    let breaks = quad::geometric_breaks(0.0, 1.0, 0.15, 12);
    let r = quad::integrate_with_breaks(
        |x| {
            let a = spec.radial.shape(x, alpha);
            [-one_minus_cos(s * x) * a * x.powf(-1.0 - alpha)]
        },
        1e-300,
        1.0,
        &breaks,
        params,
    );
    (r.value[0], r.error)
}

/// Inner-layer compensated sine integral: int_0^1 (sin(s r) - s r) a(r) r^{-1-alpha} dr.
fn inner_sin_integral(spec: &LevyMeasureSpec, s: f64, params: &QuadParams) -> (f64, f64) {
    let alpha = spec.alpha;
    let breaks = quad::geometric_breaks(0.0, 1.0, 0.15, 12);
    let r = quad::integrate_with_breaks(
        |x| {
            let a = spec.radial.shape(x, alpha);
            [sin_minus_linear(s * x) * a * x.powf(-1.0 - alpha)]
        },
        1e-300,
        1.0,
        &breaks,
        params,
    );
    (r.value[0], r.error)
}

/// int_1^inf (cos(s r) - 1) r^{-1-alpha} dr for the stable tail continuation.
/// (substitute x = s r: s^alpha int_s^inf cos(x) x^{-1-alpha} dx - 1/alpha)
fn continuation_cos_integral(alpha: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let s = s.abs();
    s.powf(alpha) * quad::cos_power_tail(s, 1.0 + alpha) - 1.0 / alpha
}

/// int_1^inf sin(s r) r^{-1-alpha} dr (odd in s).
fn continuation_sin_integral(alpha: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let sa = s.abs();
    let v = sa.powf(alpha) * quad::sin_power_tail(sa, 1.0 + alpha);
    if s >= 0.0 {
        v
    } else {
        -v
    }
}

/// Tail radial characteristic averages E[exp(i s R)] - 1 for the radial law
/// of each tail family (complex), scaled by nothing; the caller multiplies
/// by rate and the direction average.
fn tail_radial_char(tail: &TailSpec, _alpha: f64, s: f64, _params: &QuadParams) -> (Complex64, f64) {
    match tail {
        TailSpec::None | TailSpec::PointMasses(_) => (Complex64::new(0.0, 0.0), 0.0),
        TailSpec::StableContinuation => {
            // handled by caller via continuation_cos_integral (needs w*c0 weighting)
            unreachable!("stable continuation handled separately")
        }
        TailSpec::UniformShell { r_min, r_max, .. } => {
            if s == 0.0 {
                return (Complex64::new(0.0, 0.0), 0.0);
            }
            let w = r_max - r_min;
            let re = ((s * r_max).sin() - (s * r_min).sin()) / (s * w) - 1.0;
            let im = ((s * r_min).cos() - (s * r_max).cos()) / (s * w);
            (Complex64::new(re, im), 0.0)
        }
        TailSpec::Pareto { exponent, .. } => {
            if s == 0.0 {
                return (Complex64::new(0.0, 0.0), 0.0);
            }
            let p = *exponent;
            let sa = s.abs();
            let re = p * sa.powf(p) * quad::cos_power_tail(sa, 1.0 + p) - 1.0;
            let im0 = p * sa.powf(p) * quad::sin_power_tail(sa, 1.0 + p);
            let im = if s >= 0.0 { im0 } else { -im0 };
            (Complex64::new(re, im), 1e-12)
        }
    }
}

pub fn tail_total_rate(spec: &LevyMeasureSpec) -> f64 {
    match &spec.tail {
        TailSpec::None => 0.0,
        TailSpec::StableContinuation => spec.weighted_c0_mass() / spec.alpha,
        TailSpec::UniformShell { rate, .. } | TailSpec::Pareto { rate, .. } => *rate,
        TailSpec::PointMasses(pm) => pm.iter().map(|(_, w)| w).sum(),
    }
}

/// Levy-Khintchine characteristic exponent
/// psi(u) = int (e^{i<u,z>} - 1 - i<u,z> 1_{|z|<=1}) nu(dz),
/// by adaptive radial x angular quadrature; exact closed form for
/// pure-stable specs with the stable tail continuation.
pub fn char_exponent(spec: &LevyMeasureSpec, u: &DVector<f64>, params: &QuadParams) -> Result<Complex64> {
    spec.validate()?;
    if u.len() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "u has dimension {}, spec has {}",
            u.len(),
            spec.dim()
        )));
    }
    if u.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let Some(law) = spec.exact_stable_law() {
        return Ok(Complex64::new(law.exponent(u), 0.0));
    }

    let mut psi = Complex64::new(0.0, 0.0);
    let mut err = 0.0;

    // Inner layer (and stable continuation, which shares the angular data).
    let continuation = matches!(spec.tail, TailSpec::StableContinuation);
    match &spec.spectral {
        SpectralMeasure::Atoms(atoms) => {
            for a in atoms {
                let s = u.dot(&a.direction);
                let (re, e1) = inner_cos_integral(spec, s, params);
                let (im, e2) = inner_sin_integral(spec, s, params);
                psi += Complex64::new(re, im) * (a.weight * a.c0);
                err += (e1 + e2) * a.weight * a.c0;
                if continuation {
                    let tre = continuation_cos_integral(spec.alpha, s);
                    let tim = continuation_sin_integral(spec.alpha, s);
                    psi += Complex64::new(tre, tim) * (a.weight * a.c0);
                }
            }
        }
        SpectralMeasure::Isotropic { dim, total_mass, c0 } => {
            let un = u.norm();
            if *dim == 1 {
                // "Sphere" is two points, half mass each; odd parts cancel.
                let (re, e1) = inner_cos_integral(spec, un, params);
                psi += Complex64::new(re * total_mass * c0, 0.0);
                err += e1 * total_mass * c0;
                if continuation {
                    let tre = continuation_cos_integral(spec.alpha, un);
                    psi += Complex64::new(tre * total_mass * c0, 0.0);
                }
            } else {
                let rule = sphere_cosine_rule(*dim, 48);
                for (t, w) in rule {
                    let s = un * t;
                    let (re, e1) = inner_cos_integral(spec, s, params);
                    psi += Complex64::new(re * w * total_mass * c0, 0.0);
                    err += e1 * w * total_mass * c0;
                    if continuation {
                        let tre = continuation_cos_integral(spec.alpha, s);
                        psi += Complex64::new(tre * w * total_mass * c0, 0.0);
                    }
                }
            }
        }
    }

    // Remaining tail families.
    match &spec.tail {
        TailSpec::None | TailSpec::StableContinuation => {}
        TailSpec::PointMasses(pm) => {
            for (z, rate) in pm {
                let phase = u.dot(z);
                psi += Complex64::new(-one_minus_cos(phase), phase.sin()) * *rate;
            }
        }
        tail @ (TailSpec::UniformShell { .. } | TailSpec::Pareto { .. }) => {
            let rate = tail_total_rate(spec);
            match &spec.spectral {
                SpectralMeasure::Atoms(atoms) => {
                    let mass = spec.spectral_mass();
                    for a in atoms {
                        let s = u.dot(&a.direction);
                        let (c, e) = tail_radial_char(tail, spec.alpha, s, params);
                        psi += c * (rate * a.weight / mass);
                        err += e * rate * a.weight / mass;
                    }
                }
                SpectralMeasure::Isotropic { dim, .. } => {
                    let un = u.norm();
                    if *dim == 1 {
                        let (cp, e1) = tail_radial_char(tail, spec.alpha, un, params);
                        let (cm, e2) = tail_radial_char(tail, spec.alpha, -un, params);
                        psi += (cp + cm) * (0.5 * rate);
                        err += 0.5 * rate * (e1 + e2);
                    } else {
                        let rule = sphere_cosine_rule(*dim, 48);
                        for (t, w) in rule {
                            let (c, e) = tail_radial_char(tail, spec.alpha, un * t, params);
                            psi += c * (rate * w);
                            err += e * rate * w;
                        }
                    }
                }
            }
        }
    }

    if err > 1e-4 * (1.0 + psi.norm()) {
        return Err(Error::QuadratureNonConvergence { residual: err });
    }
    Ok(psi)
}

/// Evaluations of psi on a grid of points, with quadrature metadata.
#[derive(Debug, Clone)]
pub struct CharExponentGrid {
    pub points: Vec<DVector<f64>>,
    pub values: Vec<Complex64>,
    pub quad_error: f64,
}

pub fn char_exponent_grid(
    spec: &LevyMeasureSpec,
    points: &[DVector<f64>],
    params: &QuadParams,
) -> Result<CharExponentGrid> {
    let mut values = Vec::with_capacity(points.len());
    for u in points {
        values.push(char_exponent(spec, u, params)?);
    }
    Ok(CharExponentGrid { points: points.to_vec(), values, quad_error: params.abs_tol })
}

// ---------------------------------------------------------------------------
// Hypothesis audits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct MomentCheck {
    /// int_{|z|>1} |z|^beta nu_inf(dz), possibly the diverging partial sum.
    pub value: f64,
    pub pass: bool,
}

/// Quadrature check of the tail moment hypothesis. Divergence is reported
/// as a fail flag, not an error.
pub fn verify_moment_hypothesis(spec: &LevyMeasureSpec, beta: f64) -> Result<MomentCheck> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let p = QuadParams::default();
    let radial_moment = |density: &dyn Fn(f64) -> f64| -> MomentCheck {
        // decade blocks [10^k, 10^{k+1}]; block sizes of a power-law tail
        // decay geometrically, so the remainder is extrapolated from the
        // observed block ratio.
        let mut total = 0.0;
        let mut lo = 1.0;
        let mut prev_block = f64::INFINITY;
        for _ in 0..24 {
            let hi = lo * 10.0;
            let r = quad::integrate_with_breaks(
                |x| [x.powf(beta) * density(x)],
                lo,
                hi,
                &[lo * 2.0, lo * 5.0],
                &p,
            );
            let block = r.value[0];
            total += block;
            if !total.is_finite() || total > 1e12 {
                return MomentCheck { value: total, pass: false };
            }
            if block <= 0.0 {
                return MomentCheck { value: total, pass: true };
            }
            let ratio = block / prev_block;
            if prev_block.is_finite() && ratio < 0.999 {
                let remainder = block * ratio / (1.0 - ratio);
                if remainder < 1e-6 * total.max(1e-300) {
                    return MomentCheck { value: total + remainder, pass: true };
                }
            }
            prev_block = block;
            lo = hi;
        }
        MomentCheck { value: total, pass: false }
    };
    Ok(match &spec.tail {
        TailSpec::None => MomentCheck { value: 0.0, pass: true },
        TailSpec::StableContinuation => {
            let c = spec.weighted_c0_mass();
            let alpha = spec.alpha;
            radial_moment(&move |r: f64| c * r.powf(-1.0 - alpha))
        }
        TailSpec::UniformShell { rate, r_min, r_max } => {
            let (rate, r_min, r_max) = (*rate, *r_min, *r_max);
            let w = r_max - r_min;
            radial_moment(&move |r: f64| if r >= r_min && r <= r_max { rate / w } else { 0.0 })
        }
        TailSpec::Pareto { rate, exponent } => {
            let (rate, pex) = (*rate, *exponent);
            radial_moment(&move |r: f64| rate * pex * r.powf(-1.0 - pex))
        }
        TailSpec::PointMasses(pm) => {
            let v: f64 = pm.iter().map(|(z, w)| w * z.norm().powf(beta)).sum();
            MomentCheck { value: v, pass: v.is_finite() }
        }
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EquatorReport {
    pub essinf_c0: f64,
    pub span_rank: usize,
    /// inf over unit v of int cos^2(angle(v, theta)) Lambda(dtheta).
    pub min_directional_mass: f64,
    pub pass: bool,
}

/// Audit of the equator condition: Lambda spans R^d and c0 is bounded away
/// from zero on its support.
pub fn equator_report(spec: &LevyMeasureSpec) -> Result<EquatorReport> {
    match &spec.spectral {
        SpectralMeasure::Atoms(atoms) => {
            if atoms.is_empty() {
                return Err(Error::InvalidSpec("empty spectral measure".into()));
            }
            let d = atoms[0].direction.len();
            let mut m = DMatrix::<f64>::zeros(d, d);
            let mut dirs = DMatrix::<f64>::zeros(d, atoms.len());
            for (j, a) in atoms.iter().enumerate() {
                m += a.weight * &a.direction * a.direction.transpose();
                dirs.set_column(j, &a.direction);
            }
            let rank = dirs.rank(1e-10);
            // v -> v^T M v is minimized at the smallest eigenvalue of M.
            let eig = m.symmetric_eigen();
            let min_mass = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            let essinf = spec.c0_min();
            Ok(EquatorReport {
                essinf_c0: essinf,
                span_rank: rank,
                min_directional_mass: min_mass.max(0.0),
                pass: essinf > 0.0 && rank == d,
            })
        }
        SpectralMeasure::Isotropic { dim, total_mass, c0 } => Ok(EquatorReport {
            essinf_c0: *c0,
            span_rank: *dim,
            min_directional_mass: total_mass / *dim as f64,
            pass: *c0 > 0.0,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OreyMasudaStatus {
    Pass,
    Fail,
    /// |v| below the threshold C_angle: the cone bound makes no claim.
    Inconclusive,
}

#[derive(Debug, Clone, Copy)]
pub struct OreyMasudaBound {
    pub integral: f64,
    pub lower_bound: f64,
    /// C_angle = 1/r0.
    pub threshold: f64,
    pub status: OreyMasudaStatus,
}

impl OreyMasudaBound {
    pub fn passed(&self) -> bool {
        self.status == OreyMasudaStatus::Pass
    }
}

/// Largest grid radius r0 with sup_theta |r^{1+alpha} q - c0| <= c0_min/2.
fn cone_r0(spec: &LevyMeasureSpec) -> f64 {
    let bound = 0.5 * spec.c0_min() / spec.c0_max();
    let mut r0 = 0.0;
    for k in 0..400 {
        let r = 1.0 - k as f64 / 400.0;
        if r <= 0.0 {
            break;
        }
        if (spec.radial.shape(r, spec.alpha) - 1.0).abs() <= bound {
            r0 = r;
            break;
        }
    }
    if r0 == 0.0 {
        // fall back to a geometric scan
        let mut r = 1.0;
        for _ in 0..60 {
            r *= 0.7;
            if (spec.radial.shape(r, spec.alpha) - 1.0).abs() <= bound {
                return r;
            }
        }
        return 1e-9;
    }
    r0
}

/// Orey-Masuda cone condition: int_{|<v,z>|<=1} <v,z>^2 nu_0(dz) against
/// the lower bound (c0_min / (2(2-alpha))) * min_directional_mass * |v|^alpha.
pub fn orey_masuda_bound(spec: &LevyMeasureSpec, v: &DVector<f64>, params: &QuadParams) -> Result<OreyMasudaBound> {
    spec.validate()?;
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::InvalidParameter("|v| must be positive".into()));
    }
    let alpha = spec.alpha;
    let radial = |s: f64| -> f64 {
        // int_0^{min(1, 1/|s|)} r^2 * a(r) r^{-1-alpha} dr   (times s^2 later)
        let cap = if s.abs() > 1.0 { 1.0 / s.abs() } else { 1.0 };
        let breaks = quad::geometric_breaks(0.0, cap, 0.15, 10);
        quad::integrate_with_breaks(
            |r| [r.powf(1.0 - alpha) * spec.radial.shape(r, alpha)],
            1e-300,
            cap,
            &breaks,
            params,
        )
        .value[0]
    };
    let integral = match &spec.spectral {
        SpectralMeasure::Atoms(atoms) => atoms
            .iter()
            .map(|a| {
                let s = v.dot(&a.direction);
                a.weight * a.c0 * s * s * radial(s)
            })
            .sum::<f64>(),
        SpectralMeasure::Isotropic { dim, total_mass, c0 } => {
            if *dim == 1 {
                total_mass * c0 * vn * vn * radial(vn)
            } else {
                let rule = sphere_cosine_rule(*dim, 64);
                total_mass
                    * c0
                    * rule
                        .iter()
                        .map(|(t, w)| {
                            let s = vn * t;
                            w * s * s * radial(s)
                        })
                        .sum::<f64>()
            }
        }
    };
    let eq = equator_report(spec)?;
    let c_angle = spec.c0_min() / (2.0 * (2.0 - alpha)) * eq.min_directional_mass;
    let lower = c_angle * vn.powf(alpha);
    let threshold = 1.0 / cone_r0(spec);
    let status = if vn <= threshold {
        OreyMasudaStatus::Inconclusive
    } else if lower > 0.0 && integral >= lower {
        OreyMasudaStatus::Pass
    } else {
        OreyMasudaStatus::Fail
    };
    Ok(OreyMasudaBound { integral, lower_bound: lower, threshold, status })
}

/// Max Hoelder quotient |psi(z1)-psi(z2)| / |z1-z2|^{beta /\ 1} over sampled
/// pairs in the ball |z| <= 1/2 at separation <= pair_scale.
pub fn holder_exponent_estimate(
    spec: &LevyMeasureSpec,
    pair_scale: f64,
    n_pairs: usize,
    stream: RngStream,
) -> Result<f64> {
    if !(pair_scale > 0.0 && pair_scale <= 0.5) {
        return Err(Error::InvalidParameter("pair_scale must lie in (0, 1/2]".into()));
    }
    let d = spec.dim();
    let gamma_exp = spec.beta.min(1.0);
    let params = QuadParams::default();
    let mut rng = stream.rng();
    let mut max_q: f64 = 0.0;
    let mut drawn = 0usize;
    while drawn < n_pairs {
        let z1 = sample_ball(&mut rng, d, 0.5);
        let z2 = loop {
            let dz = sample_ball(&mut rng, d, pair_scale);
            let cand = &z1 + &dz;
            if cand.norm() <= 0.5 {
                break cand;
            }
        };
        let sep = (&z1 - &z2).norm();
        if sep < 1e-12 {
            continue;
        }
        let p1 = char_exponent(spec, &z1, &params)?;
        let p2 = char_exponent(spec, &z2, &params)?;
        max_q = max_q.max((p1 - p2).norm() / sep.powf(gamma_exp));
        drawn += 1;
    }
    Ok(max_q)
}

fn sample_ball<R: rand::RngCore>(rng: &mut R, d: usize, radius: f64) -> DVector<f64> {
    use crate::rng::{normal, uniform_open01};
    let mut v = DVector::<f64>::zeros(d);
    for i in 0..d {
        v[i] = normal(rng);
    }
    let n = v.norm();
    if n == 0.0 {
        return v;
    }
    let r = radius * uniform_open01(rng).powf(1.0 / d as f64);
    v * (r / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> QuadParams {
        QuadParams::default()
    }

    pub fn sym_1d(alpha: f64, c0: f64, radial: RadialProfile, tail: TailSpec, beta: f64) -> LevyMeasureSpec {
        LevyMeasureSpec {
            alpha,
            spectral: SpectralMeasure::Atoms(vec![
                SpectralAtom { direction: DVector::from_vec(vec![1.0]), weight: 1.0, c0 },
                SpectralAtom { direction: DVector::from_vec(vec![-1.0]), weight: 1.0, c0 },
            ]),
            radial,
            tail,
            beta,
            symmetric_small_jumps: true,
        }
    }

    #[test]
    fn c_alpha_at_one_is_half_pi() {
        assert_abs_diff_eq!(c_alpha(1.0), std::f64::consts::FRAC_PI_2, epsilon = 1e-9);
    }

    #[test]
    fn sphere_moment_alpha_two_is_inverse_dim() {
        // E <e1, Theta>^2 = 1/d; the closed form must degrade gracefully there.
        for d in 2..=4 {
            assert_abs_diff_eq!(sphere_cos_alpha_moment(d, 2.0 - 1e-12), 1.0 / d as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn char_exponent_at_zero_vanishes() {
        let spec = sym_1d(1.2, 1.0, RadialProfile::Tempered { mu: 0.5 }, TailSpec::None, 1.0);
        let v = char_exponent(&spec, &DVector::from_vec(vec![0.0]), &p()).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cauchy_exponent_oracle() {
        // 1D symmetric pure-stable alpha = 1 with c0 = 1, weights 1 at +-1:
        // closed form psi(u) = -pi |u|; brute-force oracle
        // 2 * int_0^inf (cos(ur) - 1) r^{-2} dr frozen below.
        let spec = sym_1d(1.0, 1.0, RadialProfile::PureStable, TailSpec::StableContinuation, 0.5);
        for &u in &[0.5, 1.0, 3.0] {
            let psi = char_exponent(&spec, &DVector::from_vec(vec![u]), &p()).unwrap();
            // oracle: brute-force quadrature, independent of the implementation path;
            // the non-oscillatory -int_1^inf r^{-2} dr = -1 part is exact.
            let brute = {
                let head = quad::integrate_with_breaks(
                    |r| [-one_minus_cos(u * r) / (r * r)],
                    1e-300,
                    1.0,
                    &quad::geometric_breaks(0.0, 1.0, 0.1, 14),
                    &p(),
                )
                .value[0];
                let osc = quad::integrate_tail(
                    |r| [(u * r).cos() / (r * r)],
                    1.0,
                    2.0 * std::f64::consts::PI / u,
                    &p(),
                    8192,
                )
                .value[0];
                2.0 * (head + osc - 1.0)
            };
            assert_abs_diff_eq!(psi.re, brute, epsilon = 2e-5 * (1.0 + u.abs()));
            assert_abs_diff_eq!(psi.re, -std::f64::consts::PI * u, epsilon = 2e-4 * (1.0 + u));
            assert_abs_diff_eq!(psi.im, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn isotropic_pure_stable_scaling() {
        let spec = LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Isotropic { dim: 2, total_mass: 1.0, c0: 1.0 },
            radial: RadialProfile::PureStable,
            tail: TailSpec::StableContinuation,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let u = DVector::from_vec(vec![0.3, -0.4]);
        let u2 = &u * 2.0;
        let p1 = char_exponent(&spec, &u, &p()).unwrap();
        let p2 = char_exponent(&spec, &u2, &p()).unwrap();
        assert_abs_diff_eq!(p2.re / p1.re, 2f64.powf(1.5), epsilon = 1e-9);
    }

    #[test]
    fn isotropic_closed_form_matches_angular_quadrature() {
        // Same measure, two routes: the exact K |u|^alpha closed form and a
        // tempered spec with mu -> 0 forced down the quadrature path.
        let alpha = 1.5;
        let iso = |radial: RadialProfile, tail: TailSpec| LevyMeasureSpec {
            alpha,
            spectral: SpectralMeasure::Isotropic { dim: 3, total_mass: 2.0, c0: 0.7 },
            radial,
            tail,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let exact = iso(RadialProfile::PureStable, TailSpec::StableContinuation);
        let quadr = iso(RadialProfile::Custom(Arc::new(|_| 1.0)), TailSpec::StableContinuation);
        let u = DVector::from_vec(vec![0.2, 0.5, -0.3]);
        let a = char_exponent(&exact, &u, &p()).unwrap();
        let b = char_exponent(&quadr, &u, &p()).unwrap();
        assert_abs_diff_eq!(a.re, b.re, epsilon = 3e-4 * a.re.abs());
    }

    #[test]
    fn conjugate_symmetry_and_negative_real_part() {
        let spec = sym_1d(
            1.3,
            1.0,
            RadialProfile::Tempered { mu: 1.0 },
            TailSpec::Pareto { rate: 0.7, exponent: 1.2 },
            0.8,
        );
        for &u in &[0.4, 1.7, 5.0] {
            let pu = char_exponent(&spec, &DVector::from_vec(vec![u]), &p()).unwrap();
            let pm = char_exponent(&spec, &DVector::from_vec(vec![-u]), &p()).unwrap();
            assert_abs_diff_eq!(pu.re, pm.re, epsilon = 1e-8);
            assert_abs_diff_eq!(pu.im, -pm.im, epsilon = 1e-8);
            assert!(pu.re <= 0.0);
            // symmetric spec: imaginary part vanishes
            assert_abs_diff_eq!(pu.im, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn moment_check_uniform_shell() {
        let spec = sym_1d(
            1.2,
            1.0,
            RadialProfile::PureStable,
            TailSpec::UniformShell { rate: 1.0, r_min: 1.0, r_max: 2.0 },
            1.0,
        );
        let m = verify_moment_hypothesis(&spec, 1.0).unwrap();
        assert!(m.pass);
        assert!(m.value >= 1.0 && m.value <= 2.0, "value {}", m.value);
        // oracle: rate * E R = 1.5 for U(1,2)
        assert_abs_diff_eq!(m.value, 1.5, epsilon = 1e-8);
    }

    #[test]
    fn moment_check_pareto_pass_and_fail() {
        let mk = |pex: f64| {
            sym_1d(1.2, 1.0, RadialProfile::PureStable, TailSpec::Pareto { rate: 2.0, exponent: pex }, 1.0)
        };
        // beta < p: closed-form oracle rate * p/(p - beta)
        let m = verify_moment_hypothesis(&mk(1.5), 1.0).unwrap();
        assert!(m.pass);
        assert_abs_diff_eq!(m.value, 2.0 * 1.5 / 0.5, epsilon = 1e-6);
        // beta >= p: divergent
        let m = verify_moment_hypothesis(&mk(0.8), 1.0).unwrap();
        assert!(!m.pass);
    }

    #[test]
    fn equator_cross_atoms() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let atoms = vec![
            SpectralAtom { direction: e1.clone(), weight: 1.0, c0: 1.0 },
            SpectralAtom { direction: -e1.clone(), weight: 1.0, c0: 1.0 },
            SpectralAtom { direction: e2.clone(), weight: 1.0, c0: 1.0 },
            SpectralAtom { direction: -e2.clone(), weight: 1.0, c0: 1.0 },
        ];
        let spec = LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Atoms(atoms),
            radial: RadialProfile::PureStable,
            tail: TailSpec::None,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let r = equator_report(&spec).unwrap();
        assert_eq!(r.span_rank, 2);
        assert_abs_diff_eq!(r.essinf_c0, 1.0);
        // oracle: enumerate v over a fine angular grid and minimize v^T M v
        let grid_min = (0..20_000)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 20_000.0;
                let (c, s) = (th.cos(), th.sin());
                2.0 * c * c + 2.0 * s * s
            })
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(r.min_directional_mass, grid_min, epsilon = 1e-9);
        assert_abs_diff_eq!(r.min_directional_mass, 2.0, epsilon = 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn equator_proper_subspace_fails() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let spec = LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Atoms(vec![
                SpectralAtom { direction: e1.clone(), weight: 1.0, c0: 1.0 },
                SpectralAtom { direction: -e1, weight: 1.0, c0: 1.0 },
            ]),
            radial: RadialProfile::PureStable,
            tail: TailSpec::None,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let r = equator_report(&spec).unwrap();
        assert_eq!(r.span_rank, 1);
        assert!(!r.pass);
    }

    #[test]
    fn equator_isotropic() {
        let spec = LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Isotropic { dim: 3, total_mass: 2.4, c0: 1.0 },
            radial: RadialProfile::PureStable,
            tail: TailSpec::None,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let r = equator_report(&spec).unwrap();
        assert_eq!(r.span_rank, 3);
        assert_abs_diff_eq!(r.min_directional_mass, 2.4 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn orey_masuda_isotropic_passes_above_threshold() {
        let spec = LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Isotropic { dim: 2, total_mass: 1.0, c0: 1.0 },
            radial: RadialProfile::PureStable,
            tail: TailSpec::None,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let v = DVector::from_vec(vec![10.0, 0.0]);
        let b = orey_masuda_bound(&spec, &v, &p()).unwrap();
        assert!(b.passed(), "integral {} lower {}", b.integral, b.lower_bound);
    }

    #[test]
    fn orey_masuda_power_law_scaling_of_bound() {
        let spec = sym_1d(1.5, 1.0, RadialProfile::PureStable, TailSpec::None, 1.0);
        let b1 = orey_masuda_bound(&spec, &DVector::from_vec(vec![10.0]), &p()).unwrap();
        let b2 = orey_masuda_bound(&spec, &DVector::from_vec(vec![20.0]), &p()).unwrap();
        assert_abs_diff_eq!(b2.lower_bound / b1.lower_bound, 2f64.powf(1.5), epsilon = 1e-12);
    }

    #[test]
    fn orey_masuda_orthogonal_direction_does_not_pass() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let spec = LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Atoms(vec![
                SpectralAtom { direction: e1.clone(), weight: 1.0, c0: 1.0 },
                SpectralAtom { direction: -e1, weight: 1.0, c0: 1.0 },
            ]),
            radial: RadialProfile::PureStable,
            tail: TailSpec::None,
            beta: 1.0,
            symmetric_small_jumps: true,
        };
        let b = orey_masuda_bound(&spec, &DVector::from_vec(vec![0.0, 10.0]), &p()).unwrap();
        assert_abs_diff_eq!(b.integral, 0.0, epsilon = 1e-12);
        assert!(!b.passed());
    }

    #[test]
    fn holder_quotient_bounded_jumps_lipschitz() {
        // bounded jumps only: psi is globally Lipschitz; the quotient at
        // exponent 1 stays bounded as the pair scale shrinks
        let spec = LevyMeasureSpec {
            beta: 2.0,
            ..sym_1d(1.2, 1.0, RadialProfile::PureStable, TailSpec::None, 2.0)
        };
        let q1 = holder_exponent_estimate(&spec, 0.1, 40, RngStream::new(5)).unwrap();
        let q2 = holder_exponent_estimate(&spec, 0.001, 40, RngStream::new(6)).unwrap();
        assert!(q2 < 4.0 * q1.max(1.0), "q1 {q1} q2 {q2}");
    }

    #[test]
    fn holder_quotient_symmetric_antipodal_is_zero() {
        let spec = sym_1d(1.2, 1.0, RadialProfile::PureStable, TailSpec::None, 1.0);
        let z = DVector::from_vec(vec![0.2]);
        let a = char_exponent(&spec, &z, &p()).unwrap();
        let b = char_exponent(&spec, &(-z), &p()).unwrap();
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn holder_quotient_pareto_tail_stabilizes() {
        let spec = sym_1d(
            1.2,
            1.0,
            RadialProfile::PureStable,
            TailSpec::Pareto { rate: 1.0, exponent: 0.6 },
            0.5,
        );
        let qs: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .enumerate()
            .map(|(i, &s)| holder_exponent_estimate(&spec, s, 25, RngStream::new(10 + i as u64)).unwrap())
            .collect();
        // bounded (no blow-up) as the scale shrinks
        assert!(qs[2] < 10.0 * qs[0].max(1.0), "{qs:?}");
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = sym_1d(1.2, 1.0, RadialProfile::PureStable, TailSpec::None, 1.0);
        spec.alpha = 2.0;
        assert!(spec.validate().is_err());
        let spec = sym_1d(1.2, 1.0, RadialProfile::PureStable, TailSpec::StableContinuation, 1.5);
        assert!(spec.validate().is_err()); // beta >= alpha under continuation
    }
}
