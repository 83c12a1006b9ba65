//! Hartman-Grobman constants of the linearization, omega-limit sets,
//! cutoff time scales, and the normal-growth / profile-existence checks.
//!
//! The flow satisfies e^{lambda t} t^{1-ell} phi^x_t -> sum_k e^{i w_k t} v^k
//! as t -> infinity; this module extracts (lambda, ell, {w_k, v^k}) either
//! exactly from Db(0) or empirically from an integrated trajectory. The
//! time shift tau of the general decomposition is fixed to 0 here and
//! absorbed into the scaling of the vectors, which is the only combination
//! entering any downstream formula.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{flow_path, VectorFieldModel};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ExactLinear,
    Empirical,
}

/// One rotating component e^{i omega t} v; real modes have omega = 0 and a
/// real vector, complex modes appear in conjugate pairs (omega, -omega).
#[derive(Debug, Clone)]
pub struct HGMode {
    pub omega: f64,
    pub v: DVector<Complex64>,
}

#[derive(Debug, Clone)]
pub struct HGData {
    pub lambda: f64,
    pub ell: usize,
    /// Fixed to zero; the gauge freedom is folded into the mode vectors.
    pub tau: f64,
    pub modes: Vec<HGMode>,
    pub provenance: Provenance,
    /// Residual diagnostics of the empirical fit (zero for exact data).
    pub fit_residual: f64,
}

/// Outcome of a linearization request: x = 0 carries no Hartman-Grobman
/// data and downstream reports the absence of a cutoff.
#[derive(Debug, Clone)]
pub enum Linearization {
    Degenerate,
    Data(HGData),
}

impl Linearization {
    pub fn data(&self) -> Option<&HGData> {
        match self {
            Linearization::Data(d) => Some(d),
            Linearization::Degenerate => None,
        }
    }
}

impl HGData {
    /// v(t) = sum_k e^{i omega_k t} v^k, real by the conjugate-pair
    /// structure.
    pub fn v_of_t(&self, t: f64) -> DVector<f64> {
        let d = self.modes[0].v.len();
        let mut acc = DVector::<Complex64>::zeros(d);
        for m in &self.modes {
            let phase = Complex64::from_polar(1.0, m.omega * t);
            acc += m.v.map(|c| c * phase);
        }
        let imag = acc.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        debug_assert!(imag < 1e-8 * (1.0 + acc.norm()), "imaginary residual {imag}");
        acc.map(|c| c.re)
    }

    pub fn dim(&self) -> usize {
        self.modes[0].v.len()
    }

    /// Structural invariants: conjugate pairing, nonvanishing rotation
    /// vector, linear independence of the mode vectors.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || self.ell == 0 {
            return Err(Error::InvalidParameter("lambda > 0 and ell >= 1 required".into()));
        }
        for m in &self.modes {
            if m.omega.abs() > 0.0 {
                let has_conj = self.modes.iter().any(|m2| {
                    (m2.omega + m.omega).abs() < 1e-10
                        && (0..m.v.len()).all(|i| (m2.v[i] - m.v[i].conj()).norm() < 1e-8 * (1.0 + m.v[i].norm()))
                });
                if !has_conj {
                    return Err(Error::InvalidParameter("complex mode without conjugate partner".into()));
                }
            }
        }
        // liminf |v(t)| > 0 on a grid
        let min_norm = (0..512)
            .map(|j| self.v_of_t(0.37 + j as f64 * 0.61803398875).norm())
            .fold(f64::INFINITY, f64::min);
        if !(min_norm > 1e-10) {
            return Err(Error::Degenerate("rotation vector passes through zero".into()));
        }
        // linear independence (complex rank of the mode matrix)
        let d = self.dim();
        let m = self.modes.len();
        let mat = DMatrix::<Complex64>::from_fn(d, m, |r, c| self.modes[c].v[r]);
        let rank = mat.svd(false, false).rank(1e-10);
        if rank < m {
            return Err(Error::InvalidParameter("mode vectors are linearly dependent".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Exact linearization
// ---------------------------------------------------------------------------

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Hartman-Grobman data of the linear flow e^{-Jt}x: eigenstructure of J
/// via clustered eigenvalues plus rank tests of (J - lambda I)^k, with x
/// expanded over the generalized eigenspaces.
pub fn hg_from_linearization(j: &DMatrix<f64>, x: &DVector<f64>) -> Result<Linearization> {
    let d = j.nrows();
    if j.ncols() != d || x.len() != d {
        return Err(Error::DimensionMismatch("J must be square and match x".into()));
    }
    if x.norm() == 0.0 {
        return Ok(Linearization::Degenerate);
    }
    let eigs = j.clone().complex_eigenvalues();
    let jnorm = j.norm().max(1e-300);
    if eigs.iter().any(|l| l.re <= 0.0) {
        return Err(Error::InvalidParameter(
            "all eigenvalues of J must have positive real part".into(),
        ));
    }
    // cluster eigenvalues
    let tol = 1e-8 * jnorm;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for l in eigs.iter() {
        let l = Complex64::new(l.re, l.im);
        match clusters.iter_mut().find(|(c, _)| (*c - l).norm() < tol) {
            Some((c, k)) => {
                *c = (*c * (*k as f64) + l) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((l, 1)),
        }
    }

    let jc = to_complex(j);
    let xc: DVector<Complex64> = x.map(|v| Complex64::new(v, 0.0));

    // generalized eigenbasis per cluster
    struct Cluster {
        lambda: Complex64,
        basis: DMatrix<Complex64>, // d x m_alg
    }
    let mut cl = Vec::with_capacity(clusters.len());
    for (lam, mult) in &clusters {
        let mut a = jc.clone();
        for i in 0..d {
            a[(i, i)] -= lam;
        }
        // (J - lam)^mult
        let mut power = DMatrix::<Complex64>::identity(d, d);
        for _ in 0..*mult {
            power = &power * &a;
        }
        let svd = power.clone().svd(true, true);
        // null space: right singular vectors for singular values below tol
        let v_t = svd.v_t.as_ref().unwrap();
        let sv = &svd.singular_values;
        let cutoff = 1e-8 * sv[0].max(1e-300);
        let null_dims: Vec<usize> = (0..d).filter(|&i| sv[i] < cutoff).collect();
        if null_dims.len() != *mult {
            return Err(Error::JordanAmbiguity {
                candidates: vec![null_dims.len(), *mult],
            });
        }
        let basis = DMatrix::<Complex64>::from_fn(d, null_dims.len(), |r, c| v_t[(null_dims[c], r)].conj());
        cl.push(Cluster { lambda: *lam, basis });
    }

    // expand x over the union basis
    let total: usize = cl.iter().map(|c| c.basis.ncols()).sum();
    if total != d {
        return Err(Error::JordanAmbiguity { candidates: vec![total, d] });
    }
    let mut big = DMatrix::<Complex64>::zeros(d, d);
    let mut col = 0;
    for c in &cl {
        for k in 0..c.basis.ncols() {
            big.set_column(col, &c.basis.column(k));
            col += 1;
        }
    }
    let coeffs = big
        .lu()
        .solve(&xc)
        .ok_or_else(|| Error::Degenerate("generalized eigenbasis is singular".into()))?;

    // per-cluster component of x and its Jordan chain height
    struct Component {
        lambda: Complex64,
        chain: Vec<DVector<Complex64>>, // w_0 = y, w_k = (J - lam)^k y, up to the last nonzero
    }
    let mut comps = Vec::new();
    let mut col = 0;
    for c in &cl {
        let m = c.basis.ncols();
        let mut y = DVector::<Complex64>::zeros(d);
        for k in 0..m {
            let ck = coeffs[col + k];
            y += DVector::from_fn(d, |r, _| c.basis[(r, k)] * ck);
        }
        col += m;
        let ynorm = y.norm();
        if ynorm < 1e-10 * x.norm() {
            continue; // x has numerically no component in this cluster
        }
        let mut a = jc.clone();
        for i in 0..d {
            a[(i, i)] -= c.lambda;
        }
        let mut chain = vec![y.clone()];
        let mut w = y;
        for _ in 0..m.saturating_sub(1) {
            w = &a * &w;
            if w.norm() < 1e-9 * ynorm * jnorm.max(1.0) {
                break;
            }
            chain.push(w.clone());
        }
        comps.push(Component { lambda: c.lambda, chain });
    }
    if comps.is_empty() {
        return Ok(Linearization::Degenerate);
    }

    let lambda = comps.iter().map(|c| c.lambda.re).fold(f64::INFINITY, f64::min);
    let dominant: Vec<&Component> = comps.iter().filter(|c| c.lambda.re < lambda + 1e-9 * jnorm).collect();
    let ell = dominant.iter().map(|c| c.chain.len()).max().unwrap();
    // leading term of e^{-Jt} y on a chain of height ell:
    // e^{-lam t} (-t)^{ell-1}/(ell-1)! w_{ell-1}; modes with shorter chains
    // at the same real part vanish relative to t^{ell-1}.
    let mut fact = 1.0;
    for k in 1..ell {
        fact *= k as f64;
    }
    let sign = if (ell - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut modes = Vec::new();
    for c in dominant.iter().filter(|c| c.chain.len() == ell) {
        let v = c.chain[ell - 1].map(|z| z * (sign / fact));
        modes.push(HGMode { omega: -c.lambda.im, v });
    }
    let hg = HGData {
        lambda,
        ell,
        tau: 0.0,
        modes,
        provenance: Provenance::ExactLinear,
        fit_residual: 0.0,
    };
    hg.validate()?;
    Ok(Linearization::Data(hg))
}

// ---------------------------------------------------------------------------
// Empirical linearization from the nonlinear flow
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct EmpiricalOptions {
    /// Number of uniform samples over the horizon.
    pub samples: usize,
    /// Fraction of the horizon used as the fit window (from the right).
    pub window: f64,
    /// Residual threshold for the nonconvergence error.
    pub residual_tol: f64,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        EmpiricalOptions { samples: 600, window: 0.75, residual_tol: 0.5 }
    }
}

/// Fit lambda, ell by least squares of ln|phi_t| against -lambda t +
/// (ell - 1) ln t on the tail window, then recover the rotating vector by
/// harmonic regression of e^{lambda t} t^{1-ell} phi_t.
pub fn hg_empirical(
    vf: &VectorFieldModel,
    x: &DVector<f64>,
    horizon: f64,
    opts: &EmpiricalOptions,
) -> Result<Linearization> {
    if x.norm() == 0.0 {
        return Ok(Linearization::Degenerate);
    }
    let n = opts.samples;
    let grid: Vec<f64> = (1..=n).map(|k| horizon * k as f64 / n as f64).collect();
    let ode_opts = OdeOptions { abs_tol: 1e-12, rel_tol: 1e-10, h_max: 0.25, max_steps: 5_000_000 };
    let path = flow_path(vf, x, &grid, &ode_opts)?;
    if path.last().unwrap().norm() > 1e-6 * x.norm() {
        return Err(Error::NonConvergence {
            residual: path.last().unwrap().norm() / x.norm(),
        });
    }

    let start = ((1.0 - opts.window) * n as f64) as usize;
    let window: Vec<(f64, &DVector<f64>)> = grid[start..]
        .iter()
        .cloned()
        .zip(path[start..].iter())
        .filter(|(_, p)| p.norm() > 1e-280)
        .collect();
    if window.len() < 16 {
        return Err(Error::NonConvergence { residual: f64::INFINITY });
    }

    // regress ln|phi| = c + beta t + gamma ln t, with an oscillation
    // correction ln|v(t)| supplied by later refinement rounds
    let fit_decay = |correction: &dyn Fn(f64) -> f64| -> Result<(f64, f64, f64)> {
        let mut ata = DMatrix::<f64>::zeros(3, 3);
        let mut atb = DVector::<f64>::zeros(3);
        for (t, p) in &window {
            let row = [1.0, *t, t.ln()];
            let y = p.norm().ln() - correction(*t);
            for i in 0..3 {
                for j in 0..3 {
                    ata[(i, j)] += row[i] * row[j];
                }
                atb[i] += row[i] * y;
            }
        }
        let sol = ata
            .lu()
            .solve(&atb)
            .ok_or_else(|| Error::NonConvergence { residual: f64::INFINITY })?;
        let mut resid = 0.0f64;
        for (t, p) in &window {
            let pred = sol[0] + sol[1] * t + sol[2] * t.ln();
            resid = resid.max((p.norm().ln() - correction(*t) - pred).abs());
        }
        Ok((-sol[1], sol[2], resid))
    };

    let (lambda, gamma, fit_residual) = fit_decay(&|_| 0.0)?;
    let ell = (gamma.round().max(0.0) as usize) + 1;
    if lambda <= 0.0 {
        return Err(Error::NonConvergence { residual: lambda });
    }
    if fit_residual > opts.residual_tol {
        return Err(Error::NonConvergence { residual: fit_residual });
    }

    // rotation: r(t) = e^{lambda t} t^{1-ell} phi_t; the decay rate is
    // refined in alternation with the harmonic model, which removes the
    // bias the oscillating |v(t)| induces on the slope over short windows
    let d = vf.dim();
    let mut lambda = lambda;
    let mut modes_model: Option<Vec<HGMode>> = None;
    for _round in 0..3 {
        if let Some(modes) = &modes_model {
            let probe = HGData {
                lambda,
                ell,
                tau: 0.0,
                modes: modes.clone(),
                provenance: Provenance::Empirical,
                fit_residual: 0.0,
            };
            let (l2, _, _) = fit_decay(&|t| probe.v_of_t(t).norm().ln())?;
            if l2 > 0.0 {
                lambda = l2;
            }
        }
    let rs: Vec<(f64, DVector<f64>)> = window
        .iter()
        .map(|(t, p)| (*t, (*p) * (lambda * t).exp() * t.powf(1.0 - ell as f64)))
        .collect();
    // dominant frequency by scanning a dense grid of the periodogram
    let mean = {
        let mut acc = DVector::<f64>::zeros(d);
        for (_, r) in &rs {
            acc += r;
        }
        acc / rs.len() as f64
    };
    let mut best_omega = 0.0;
    let mut best_power = 0.0;
    let t_span = rs.last().unwrap().0 - rs[0].0;
    let omega_max = std::f64::consts::PI * rs.len() as f64 / t_span * 0.5;
    let mut w = 0.5 * std::f64::consts::PI / t_span;
    while w < omega_max {
        let mut c = DVector::<Complex64>::zeros(d);
        for (t, r) in &rs {
            let ph = Complex64::from_polar(1.0, -w * t);
            for i in 0..d {
                c[i] += ph * (r[i] - mean[i]);
            }
        }
        let p = c.norm();
        if p > best_power {
            best_power = p;
            best_omega = w;
        }
        w += 0.1 * std::f64::consts::PI / t_span;
    }
    // amplitude of the oscillating part relative to the mean decides m
    let osc_amp = 2.0 * best_power / rs.len() as f64;
    let has_rotation = osc_amp > 1e-4 * (1.0 + mean.norm());

    let mut modes = Vec::new();
    if !has_rotation {
        modes.push(HGMode { omega: 0.0, v: mean.map(|x| Complex64::new(x, 0.0)) });
    } else {
        // refine omega by local scan, then LS for the pair vector
        let mut omega = best_omega;
        let mut step = 0.25 * std::f64::consts::PI / t_span;
        for _ in 0..40 {
            let pw = |w: f64| -> f64 {
                let mut c = DVector::<Complex64>::zeros(d);
                for (t, r) in &rs {
                    let ph = Complex64::from_polar(1.0, -w * t);
                    for i in 0..d {
                        c[i] += ph * (r[i] - mean[i]);
                    }
                }
                c.norm()
            };
            let (pm, p0, pp) = (pw(omega - step), pw(omega), pw(omega + step));
            if pm > p0 {
                omega -= step;
            } else if pp > p0 {
                omega += step;
            } else {
                step *= 0.5;
            }
        }
        // LS fit r_i(t) = a_i + b_i cos wt + c_i sin wt per component
        let mut a = DVector::<f64>::zeros(d);
        let mut b = DVector::<f64>::zeros(d);
        let mut cvec = DVector::<f64>::zeros(d);
        for i in 0..d {
            let mut ata = DMatrix::<f64>::zeros(3, 3);
            let mut atb = DVector::<f64>::zeros(3);
            for (t, r) in &rs {
                let row = [1.0, (omega * t).cos(), (omega * t).sin()];
                for p in 0..3 {
                    for q in 0..3 {
                        ata[(p, q)] += row[p] * row[q];
                    }
                    atb[p] += row[p] * r[i];
                }
            }
            let s = ata.lu().solve(&atb).ok_or(Error::NonConvergence { residual: f64::INFINITY })?;
            a[i] = s[0];
            b[i] = s[1];
            cvec[i] = s[2];
        }
        // b cos + c sin = 2 Re(e^{iwt} v) with v = (b - i c)/2
        let v_pair: DVector<Complex64> = DVector::from_fn(d, |i, _| Complex64::new(b[i] / 2.0, -cvec[i] / 2.0));
        // keep the constant mode only if dropping it genuinely hurts the fit
        let scale = rs.iter().map(|(_, r)| r.norm()).fold(0.0, f64::max);
        let resid = |with_const: bool| -> f64 {
            let mut worst = 0.0f64;
            for (t, r) in &rs {
                let mut e = 0.0;
                for i in 0..d {
                    let pred = if with_const { a[i] } else { 0.0 }
                        + b[i] * (omega * t).cos()
                        + cvec[i] * (omega * t).sin();
                    e += (r[i] - pred) * (r[i] - pred);
                }
                worst = worst.max(e.sqrt());
            }
            worst
        };
        if resid(false) > resid(true) + 0.01 * scale {
            modes.push(HGMode { omega: 0.0, v: a.map(|x| Complex64::new(x, 0.0)) });
        }
        modes.push(HGMode { omega, v: v_pair.clone() });
        modes.push(HGMode { omega: -omega, v: v_pair.map(|z| z.conj()) });
    }

    modes_model = Some(modes);
    }

    let modes = modes_model.unwrap();
    // residual of the harmonic model on the final round
    let rs: Vec<(f64, DVector<f64>)> = window
        .iter()
        .map(|(t, p)| (*t, (*p) * (lambda * t).exp() * t.powf(1.0 - ell as f64)))
        .collect();
    let hg = HGData {
        lambda,
        ell,
        tau: 0.0,
        modes,
        provenance: Provenance::Empirical,
        fit_residual,
    };
    let mut resid = 0.0f64;
    for (t, r) in &rs {
        resid = resid.max((hg.v_of_t(*t) - r).norm() / (1.0 + r.norm()));
    }
    let hg = HGData { fit_residual: fit_residual.max(resid), ..hg };
    if hg.fit_residual > opts.residual_tol {
        return Err(Error::NonConvergence { residual: hg.fit_residual });
    }
    hg.validate()?;
    Ok(Linearization::Data(hg))
}

// ---------------------------------------------------------------------------
// Omega-limit sets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum OmegaRepresentation {
    Singleton(DVector<f64>),
    FiniteCycle(Vec<DVector<f64>>),
    TorusSample(Vec<DVector<f64>>),
}

#[derive(Debug, Clone)]
pub struct OmegaSet {
    pub representation: OmegaRepresentation,
    pub min_norm: f64,
    pub max_norm: f64,
}

impl OmegaSet {
    pub fn points(&self) -> &[DVector<f64>] {
        match &self.representation {
            OmegaRepresentation::Singleton(_) => std::slice::from_ref(match &self.representation {
                OmegaRepresentation::Singleton(v) => v,
                _ => unreachable!(),
            }),
            OmegaRepresentation::FiniteCycle(v) | OmegaRepresentation::TorusSample(v) => v,
        }
    }

    /// min and max of |M v| over the representation points.
    pub fn norms_under(&self, m: Option<&DMatrix<f64>>) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for p in self.points() {
            let n = match m {
                Some(m) => (m * p).norm(),
                None => p.norm(),
            };
            lo = lo.min(n);
            hi = hi.max(n);
        }
        (lo, hi)
    }
}

/// Rational multiple of 2 pi with denominator <= qmax?
fn rational_angle(omega: f64, qmax: usize) -> Option<usize> {
    let ratio = omega.abs() / (2.0 * std::f64::consts::PI);
    for q in 1..=qmax {
        let p = (ratio * q as f64).round();
        if p > 0.0 && (ratio * q as f64 - p).abs() < 1e-9 * q as f64 {
            return Some(q);
        }
    }
    None
}

/// Closure of { v(t) : t large } represented as a singleton, a finite
/// cycle (all angles rational multiples of 2 pi, sampled at integer
/// times), or a quasi-uniform torus sample.
pub fn omega_set(hg: &HGData, n_samples: usize, offset: f64) -> OmegaSet {
    let rotating: Vec<&HGMode> = hg.modes.iter().filter(|m| m.omega > 0.0).collect();
    let representation = if rotating.is_empty() {
        OmegaRepresentation::Singleton(hg.v_of_t(0.0))
    } else if let Some(q) = rotating
        .iter()
        .map(|m| rational_angle(m.omega, 64))
        .collect::<Option<Vec<_>>>()
        .map(|qs| qs.into_iter().fold(1, lcm))
    {
        let pts = (0..q).map(|j| hg.v_of_t(j as f64)).collect();
        OmegaRepresentation::FiniteCycle(pts)
    } else {
        // quasi-uniform times: golden-ratio stride on the fastest period
        let w = rotating.iter().map(|m| m.omega).fold(0.0, f64::max);
        let stride = 2.0 * std::f64::consts::PI / w * 1.61803398875;
        let pts = (0..n_samples)
            .map(|j| hg.v_of_t(offset + stride * j as f64))
            .collect();
        OmegaRepresentation::TorusSample(pts)
    };
    let set = OmegaSet { representation, min_norm: 0.0, max_norm: 0.0 };
    let (lo, hi) = set.norms_under(None);
    OmegaSet { min_norm: lo, max_norm: hi, ..set }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

// ---------------------------------------------------------------------------
// Normal growth and profile existence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthVerdict {
    ProfileSufficient,
    ProfileRefuted,
    Undetermined,
}

#[derive(Debug, Clone, Copy)]
pub struct NormalGrowthReport {
    pub orthogonal: bool,
    pub equal_norms: bool,
    pub verdict: GrowthVerdict,
}

/// Orthogonality of the family {real parts, imaginary parts} of the
/// rotating modes (together with any real mode) and equality of the
/// real/imaginary norms within each pair. Sufficient for the omega set to
/// lie on a sphere; necessary in the non-resonant case.
pub fn normal_growth(hg: &HGData, tol: f64) -> NormalGrowthReport {
    let mut family: Vec<DVector<f64>> = Vec::new();
    let mut equal_norms = true;
    let mut non_resonant = true;
    for m in &hg.modes {
        if m.omega > 0.0 {
            let re = m.v.map(|c| c.re);
            let im = m.v.map(|c| c.im);
            let (nr, ni) = (re.norm(), im.norm());
            if (nr - ni).abs() > tol * (nr + ni).max(1e-300) {
                equal_norms = false;
            }
            family.push(re);
            family.push(im);
            if rational_angle(m.omega, 64).is_some() {
                non_resonant = false;
            }
        } else if m.omega == 0.0 {
            family.push(m.v.map(|c| c.re));
        }
    }
    let mut orthogonal = true;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let dot = family[i].dot(&family[j]).abs();
            if dot > tol * family[i].norm() * family[j].norm() {
                orthogonal = false;
            }
        }
    }
    let rotating = hg.modes.iter().any(|m| m.omega > 0.0);
    let verdict = if !rotating {
        GrowthVerdict::ProfileSufficient
    } else if orthogonal && equal_norms {
        GrowthVerdict::ProfileSufficient
    } else if non_resonant {
        GrowthVerdict::ProfileRefuted
    } else {
        GrowthVerdict::Undetermined
    };
    NormalGrowthReport { orthogonal, equal_norms, verdict }
}

#[derive(Debug, Clone)]
pub struct ZinfModel {
    pub rotationally_invariant: bool,
    /// Optional invertible matrix making M Z_inf rotationally invariant.
    pub m: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileVerdict {
    Profile,
    WindowOnly,
    Undetermined,
}

/// Sphere test of the profile characterization: a profile exists iff the
/// (M-image of the) omega set lies on a sphere, under a rotationally
/// invariant unimodal limit law.
pub fn profile_exists(omega: &OmegaSet, zinf: &ZinfModel, tol: f64) -> ProfileVerdict {
    if matches!(omega.representation, OmegaRepresentation::Singleton(_)) {
        return ProfileVerdict::Profile;
    }
    if !zinf.rotationally_invariant && zinf.m.is_none() {
        return ProfileVerdict::Undetermined;
    }
    let (lo, hi) = omega.norms_under(zinf.m.as_ref());
    if hi - lo <= tol * hi.max(1e-300) {
        ProfileVerdict::Profile
    } else {
        ProfileVerdict::WindowOnly
    }
}

// ---------------------------------------------------------------------------
// Cutoff schedule
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffSchedule {
    pub eps: f64,
    pub t_eps: f64,
    pub w_eps: f64,
}

/// t_eps = ln(1/eps)/lambda + (ell-1)/lambda ln ln(1/eps), w_eps = 1/lambda.
pub fn cutoff_schedule(hg: &HGData, eps: f64) -> Result<CutoffSchedule> {
    if !(eps > 0.0) || eps >= 1.0 {
        return Err(Error::InvalidParameter("eps must lie in (0, 1)".into()));
    }
    if hg.ell > 1 && eps >= (-1.0f64).exp() {
        return Err(Error::InvalidParameter(
            "eps must be below 1/e for the log-log term of a defective linearization".into(),
        ));
    }
    let l = (1.0 / eps).ln();
    let t_eps = l / hg.lambda + (hg.ell as f64 - 1.0) / hg.lambda * l.ln();
    Ok(CutoffSchedule { eps, t_eps, w_eps: 1.0 / hg.lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::VectorField;
    use approx::assert_abs_diff_eq;

    fn hg_simple(lambda: f64, ell: usize) -> HGData {
        HGData {
            lambda,
            ell,
            tau: 0.0,
            modes: vec![HGMode { omega: 0.0, v: DVector::from_vec(vec![Complex64::new(1.0, 0.0)]) }],
            provenance: Provenance::ExactLinear,
            fit_residual: 0.0,
        }
    }

    fn oscillator_j(d1: f64, d2: f64, a: f64, eta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[2.0 * d1 + a, eta, -eta, 2.0 * d2 + a])
    }

    #[test]
    fn scalar_linearization() {
        let j = DMatrix::from_vec(1, 1, vec![0.7]);
        let x = DVector::from_vec(vec![2.0]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let hg = hg.data().unwrap();
        assert_abs_diff_eq!(hg.lambda, 0.7, epsilon = 1e-12);
        assert_eq!(hg.ell, 1);
        assert_eq!(hg.modes.len(), 1);
        assert_abs_diff_eq!(hg.modes[0].v[0].re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_initial_point_is_degenerate() {
        let j = DMatrix::from_vec(1, 1, vec![0.7]);
        assert!(matches!(
            hg_from_linearization(&j, &DVector::zeros(1)).unwrap(),
            Linearization::Degenerate
        ));
    }

    /// Oracle: e^{lambda t} t^{1-ell} e^{-Jt} x -> v(t) on a time grid.
    fn check_against_matrix_exponential(j: &DMatrix<f64>, x: &DVector<f64>) {
        let hg = hg_from_linearization(j, x).unwrap();
        let hg = hg.data().unwrap();
        for &t in &[18.0, 23.0, 29.0] {
            let flow = ((-t) * j).exp() * x;
            let rescaled = flow * (hg.lambda * t).exp() * t.powf(1.0 - hg.ell as f64);
            let predicted = hg.v_of_t(t);
            // subdominant chain terms decay like 1/t relative to the limit
            let slack = if hg.ell > 1 { 2.0 * x.norm() / t } else { 1e-5 };
            assert!(
                (rescaled.clone() - &predicted).norm() < slack * (1.0 + predicted.norm()),
                "t={t} rescaled={rescaled:?} predicted={predicted:?}"
            );
        }
    }

    #[test]
    fn oscillator_complex_pair_matches_flow() {
        // eigenvalues d1 + d2 + a +- i sqrt(|Delta|)/2 for Delta < 0
        let j = oscillator_j(1.0, 1.0, 0.0, 1.0);
        let x = DVector::from_vec(vec![1.0, 0.5]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let hg2 = hg.data().unwrap();
        assert_abs_diff_eq!(hg2.lambda, 2.0, epsilon = 1e-10);
        assert_eq!(hg2.ell, 1);
        // omega = sqrt(|Delta|)/2 = eta = 1
        let w = hg2.modes.iter().map(|m| m.omega.abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-10);
        check_against_matrix_exponential(&j, &x);
        check_against_matrix_exponential(&oscillator_j(1.0, 1.5, 0.2, 0.8), &x);
    }

    #[test]
    fn jordan_block_chain_detection() {
        // For the upper-triangular block [[l, 1], [0, l]], e2 sits on top
        // of the chain: e^{-Jt} e2 = e^{-lt}(e2 - t e1) grows like t e^{-lt}
        // (ell = 2), while e1 is a true eigenvector (ell = 1).
        let j = DMatrix::from_row_slice(2, 2, &[0.9, 1.0, 0.0, 0.9]);
        let top = hg_from_linearization(&j, &DVector::from_vec(vec![0.0, 1.0])).unwrap();
        let top = top.data().unwrap();
        assert_eq!(top.ell, 2);
        assert_abs_diff_eq!(top.lambda, 0.9, epsilon = 1e-9);
        check_against_matrix_exponential(&j, &DVector::from_vec(vec![0.0, 1.0]));
        let bottom = hg_from_linearization(&j, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(bottom.data().unwrap().ell, 1);
    }

    #[test]
    fn generic_point_picks_smallest_real_part() {
        let j = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        assert_abs_diff_eq!(hg.data().unwrap().lambda, 0.5, epsilon = 1e-12);
        // non-generic: no component on the slow eigenspace
        let x = DVector::from_vec(vec![0.0, 1.0]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        assert_abs_diff_eq!(hg.data().unwrap().lambda, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn empirical_matches_exact_for_linear_fields() {
        let q = oscillator_j(1.0, 1.2, 0.1, 0.9);
        let vf = VectorFieldModel::new(VectorField::Linear { q: q.clone() }, 0.5).unwrap();
        let x = DVector::from_vec(vec![1.3, -0.4]);
        let exact = hg_from_linearization(&q, &x).unwrap();
        let exact = exact.data().unwrap();
        let emp = hg_empirical(&vf, &x, 60.0 / exact.lambda, &EmpiricalOptions::default()).unwrap();
        let emp = emp.data().unwrap();
        assert!((emp.lambda - exact.lambda).abs() < 1e-4, "emp {} exact {}", emp.lambda, exact.lambda);
        assert_eq!(emp.ell, exact.ell);
        let we = emp.modes.iter().map(|m| m.omega.abs()).fold(0.0, f64::max);
        let wx = exact.modes.iter().map(|m| m.omega.abs()).fold(0.0, f64::max);
        assert!((we - wx).abs() < 5e-3, "emp {we} exact {wx}");
    }

    #[test]
    fn empirical_fput_gradient_single_limit() {
        // 1D FPUT: ell = 1, m = 1, v = x/sqrt(1+x^2) from the separable
        // closed form
        let vf = VectorFieldModel::new(
            VectorField::Fput {
                a: DMatrix::identity(1, 1),
                b: DMatrix::identity(1, 1),
                eta: None,
            },
            1.0,
        )
        .unwrap();
        let x0 = 1.0;
        let hg = hg_empirical(&vf, &DVector::from_vec(vec![x0]), 16.0, &EmpiricalOptions::default()).unwrap();
        let hg = hg.data().unwrap();
        assert_abs_diff_eq!(hg.lambda, 1.0, epsilon = 2e-4);
        assert_eq!(hg.ell, 1);
        assert_eq!(hg.modes.len(), 1);
        let v = hg.modes[0].v[0].re;
        assert_abs_diff_eq!(v, x0 / (1.0f64 + x0 * x0).sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn empirical_zero_point_degenerate() {
        let vf = VectorFieldModel::new(
            VectorField::Linear { q: DMatrix::identity(1, 1) },
            1.0,
        )
        .unwrap();
        assert!(matches!(
            hg_empirical(&vf, &DVector::zeros(1), 10.0, &EmpiricalOptions::default()).unwrap(),
            Linearization::Degenerate
        ));
    }

    #[test]
    fn rotation_vector_is_real_on_grid() {
        let j = oscillator_j(1.0, 1.4, 0.0, 1.1);
        let x = DVector::from_vec(vec![0.7, 0.9]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let hg = hg.data().unwrap();
        for k in 0..64 {
            let t = k as f64 * 0.37;
            let v = hg.v_of_t(t); // panics in debug if imaginary residual > 1e-8
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn omega_set_variants() {
        // singleton
        let hg = hg_simple(1.0, 1);
        let o = omega_set(&hg, 512, 0.0);
        assert!(matches!(o.representation, OmegaRepresentation::Singleton(_)));
        assert_abs_diff_eq!(o.min_norm, 1.0, epsilon = 1e-12);

        // one conjugate pair at 2 pi / 3: cycle of 3 points
        let v = DVector::from_vec(vec![Complex64::new(0.5, -0.1)]);
        let hg = HGData {
            lambda: 1.0,
            ell: 1,
            tau: 0.0,
            modes: vec![
                HGMode { omega: 2.0 * std::f64::consts::PI / 3.0, v: v.clone() },
                HGMode { omega: -2.0 * std::f64::consts::PI / 3.0, v: v.map(|z| z.conj()) },
            ],
            provenance: Provenance::ExactLinear,
            fit_residual: 0.0,
        };
        let o = omega_set(&hg, 512, 0.0);
        match &o.representation {
            OmegaRepresentation::FiniteCycle(pts) => {
                assert_eq!(pts.len(), 3);
                // oracle: the three integer-time evaluations
                for (j, p) in pts.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0 * j as f64);
                    let expect = 2.0 * (v[0] * phase).re;
                    assert_abs_diff_eq!(p[0], expect, epsilon = 1e-12);
                }
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn omega_set_profile_case_constant_norm() {
        // oscillator d1 = d2: circular orbit, all cloud points share a norm
        let j = oscillator_j(1.0, 1.0, 0.0, 1.0);
        let x = DVector::from_vec(vec![0.8, -0.3]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let hg = hg.data().unwrap();
        let o1 = omega_set(hg, 4096, 0.0);
        assert!(o1.max_norm - o1.min_norm < 1e-8, "spread {}", o1.max_norm - o1.min_norm);
        // stability under a different quasi-random offset
        let o2 = omega_set(hg, 4096, 0.71);
        assert!((o1.max_norm - o2.max_norm).abs() < 1e-6);
        assert!((o1.min_norm - o2.min_norm).abs() < 1e-6);
    }

    #[test]
    fn normal_growth_profile_and_refuted() {
        // d1 = d2 = 1, eta = 1: Re v = (1, 0), Im v = (0, 1) direction
        let j = oscillator_j(1.0, 1.0, 0.0, 1.0);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let r = normal_growth(hg.data().unwrap(), 1e-8);
        assert!(r.orthogonal && r.equal_norms);
        assert_eq!(r.verdict, GrowthVerdict::ProfileSufficient);

        // d1 < d2: skewed pair, angle irrational vs pi: refuted
        let j = oscillator_j(1.0, 1.5, 0.0, 1.0);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let r = normal_growth(hg.data().unwrap(), 1e-8);
        assert!(!(r.orthogonal && r.equal_norms));
        assert_eq!(r.verdict, GrowthVerdict::ProfileRefuted);

        // single real mode: vacuously sufficient
        let r = normal_growth(&hg_simple(1.0, 1), 1e-8);
        assert_eq!(r.verdict, GrowthVerdict::ProfileSufficient);
    }

    #[test]
    fn profile_verdicts() {
        let zinf = ZinfModel { rotationally_invariant: true, m: None };
        // singleton: profile
        let hg = hg_simple(1.0, 1);
        let o = omega_set(&hg, 512, 0.0);
        assert_eq!(profile_exists(&o, &zinf, 1e-6), ProfileVerdict::Profile);
        // circular orbit: profile
        let j = oscillator_j(1.0, 1.0, 0.0, 1.0);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let o = omega_set(hg.data().unwrap(), 2048, 0.0);
        assert_eq!(profile_exists(&o, &zinf, 1e-6), ProfileVerdict::Profile);
        // elliptic orbit: window only
        let j = oscillator_j(1.0, 1.5, 0.0, 1.0);
        let hg = hg_from_linearization(&j, &x).unwrap();
        let o = omega_set(hg.data().unwrap(), 2048, 0.0);
        assert_eq!(profile_exists(&o, &zinf, 1e-2), ProfileVerdict::WindowOnly);
        assert!((o.max_norm - o.min_norm) / o.max_norm > 0.1);
    }

    #[test]
    fn schedule_formula_and_monotonicity() {
        // lambda = 1, ell = 1, eps = e^-5: t = 5, w = 1
        let s = cutoff_schedule(&hg_simple(1.0, 1), (-5.0f64).exp()).unwrap();
        assert_abs_diff_eq!(s.t_eps, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.w_eps, 1.0, epsilon = 1e-15);

        // lambda = 2, ell = 3, eps = 1e-2 (frozen 30-digit oracle)
        let s = cutoff_schedule(&hg_simple(2.0, 3), 1e-2).unwrap();
        assert_abs_diff_eq!(s.t_eps, 3.829764718801946793238436624, epsilon = 1e-12);
        assert_abs_diff_eq!(s.w_eps, 0.5, epsilon = 1e-15);

        // monotone in 1/eps, halving difference -> ln 2/lambda
        let hg = hg_simple(1.7, 2);
        let ladder: Vec<f64> = (1..40).map(|k| 10f64.powf(-(k as f64) * 0.25 - 1.0)).collect();
        let mut prev = 0.0;
        for &e in &ladder {
            let s = cutoff_schedule(&hg, e).unwrap();
            assert!(s.t_eps > prev);
            prev = s.t_eps;
        }
        // ell = 1: halving difference is exactly ln 2 / lambda
        let hg1 = hg_simple(1.7, 1);
        let e = 1e-9;
        let d1 = cutoff_schedule(&hg1, e / 2.0).unwrap().t_eps - cutoff_schedule(&hg1, e).unwrap().t_eps;
        assert_abs_diff_eq!(d1, 2.0f64.ln() / 1.7, epsilon = 1e-12);
        // ell = 2: the log-log correction vanishes along the eps ladder
        let limit = 2.0f64.ln() / 1.7;
        let mut gaps = Vec::new();
        for &e in &[1e-4, 1e-8, 1e-16, 1e-32] {
            let d = cutoff_schedule(&hg, e / 2.0).unwrap().t_eps - cutoff_schedule(&hg, e).unwrap().t_eps;
            gaps.push((d - limit).abs());
        }
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[3] < 6e-3, "{gaps:?}");

        // domain error branch
        assert!(cutoff_schedule(&hg_simple(1.0, 2), 0.5).is_err());
        assert!(cutoff_schedule(&hg_simple(1.0, 1), 0.5).is_ok());
    }
}
