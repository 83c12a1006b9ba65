//! Increment generation for locally layered stable Levy processes.
//!
//! Exact symmetric alpha-stable increments come from the
//! Chambers-Mallows-Stuck transform (1D), the sub-Gaussian radial mixture
//! (isotropic d > 1) and independent 1D factors along atom directions
//! (discrete symmetric spectral measures). General layered measures are
//! sampled by acceptance-rejection of the radial profile against the
//! pure-stable envelope plus an independent compound-Poisson tail.

use nalgebra::DVector;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{self, HistOpts};
use crate::error::{Error, Result};
use crate::levy::{LevyMeasureSpec, SpectralMeasure, StableComponents, StableLaw, TailSpec};
use crate::rng::{exponential, normal, poisson, uniform_open01, RngStream};

const SHARD: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeTag {
    ExactStable,
    AcceptReject,
    CompoundPoisson,
}

/// A batch of i.i.d. process increments over a time step `dt`.
#[derive(Debug, Clone)]
pub struct IncrementBatch {
    pub dt: f64,
    pub increments: Vec<DVector<f64>>,
    /// Number of tail (nu_inf) jumps folded into each increment; all zero
    /// for exact-stable sampling where the decomposition is not tracked.
    pub tail_jumps: Vec<u32>,
    /// Variance of the discarded sub-threshold inner jumps over dt
    /// (radial second moment integrated against the spectral mass).
    pub truncated_variance: f64,
    pub scheme: SchemeTag,
}

impl IncrementBatch {
    pub fn n(&self) -> usize {
        self.increments.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.increments.is_empty() {
            return Err(Error::InvalidParameter("empty batch".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if self.increments.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Degenerate("non-finite increment".into()));
        }
        Ok(())
    }

    /// Little-endian 64-bit float dump, row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.increments.first().map(|v| v.len()).unwrap_or(0);
        let mut out = Vec::with_capacity(8 * d * self.increments.len());
        for v in &self.increments {
            for &x in v.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Exact stable sampling primitives
// ---------------------------------------------------------------------------

/// Standard symmetric alpha-stable variate, E e^{iuX} = e^{-|u|^alpha}.
pub fn standard_sas<R: RngCore>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 2.0);
    let v = std::f64::consts::PI * (uniform_open01(rng) - 0.5);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w = exponential(rng);
    let av = alpha * v;
    (av.sin() / v.cos().powf(1.0 / alpha)) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive stable variate with Laplace transform E e^{-l A} = e^{-l^a},
/// a in (0,1): the totally skewed Chambers-Mallows-Stuck form, whose
/// normalizing constant cancels in this parametrization.
pub fn positive_stable<R: RngCore>(a: f64, rng: &mut R) -> f64 {
    debug_assert!(a > 0.0 && a < 1.0);
    let v = std::f64::consts::PI * (uniform_open01(rng) - 0.5);
    let w = exponential(rng);
    let shifted = a * (v + std::f64::consts::FRAC_PI_2);
    (shifted.sin() / v.cos().powf(1.0 / a)) * ((v - shifted).cos() / w).powf((1.0 - a) / a)
}

fn positive_stable_checked<R: RngCore>(a: f64, rng: &mut R) -> f64 {
    loop {
        let x = positive_stable(a, rng);
        if x.is_finite() && x > 0.0 {
            return x;
        }
    }
}

fn sample_stable_vector<R: RngCore>(law: &StableLaw, scale: f64, rng: &mut R) -> DVector<f64> {
    match &law.components {
        StableComponents::Isotropic { dim, sigma } => {
            let s = sigma * scale;
            if *dim == 1 {
                DVector::from_vec(vec![s * standard_sas(law.alpha, rng)])
            } else {
                // sub-Gaussian: sqrt(A) N(0, 2 s^2 I) has exponent -(s|u|)^alpha
                let a = positive_stable_checked(law.alpha / 2.0, rng);
                let g = (2.0 * a).sqrt() * s;
                let mut v = DVector::<f64>::zeros(*dim);
                for i in 0..*dim {
                    v[i] = g * normal(rng);
                }
                v
            }
        }
        StableComponents::AxisFactors(factors) => {
            let d = factors[0].0.len();
            let mut v = DVector::<f64>::zeros(d);
            for (dir, sigma) in factors {
                let xi = sigma * scale * standard_sas(law.alpha, rng);
                v += dir * xi;
            }
            v
        }
    }
}

/// Exact symmetric alpha-stable increments over `dt`, with characteristic
/// function exp(dt psi) for psi given by the law.
pub fn stable_increment(law: &StableLaw, dt: f64, n: usize, stream: RngStream) -> Result<IncrementBatch> {
    if !(law.alpha > 0.0 && law.alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("alpha = {} not in (0,2)", law.alpha)));
    }
    if !(dt > 0.0) || n == 0 {
        return Err(Error::InvalidParameter("dt > 0 and n >= 1 required".into()));
    }
    let scale = dt.powf(1.0 / law.alpha);
    let shards: Vec<Vec<DVector<f64>>> = (0..n.div_ceil(SHARD))
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream.substream(shard as u64).rng();
            let count = SHARD.min(n - shard * SHARD);
            (0..count).map(|_| sample_stable_vector(law, scale, &mut rng)).collect()
        })
        .collect();
    let increments: Vec<DVector<f64>> = shards.into_iter().flatten().collect();
    let nn = increments.len();
    Ok(IncrementBatch {
        dt,
        increments,
        tail_jumps: vec![0; nn],
        truncated_variance: 0.0,
        scheme: SchemeTag::ExactStable,
    })
}

// ---------------------------------------------------------------------------
// Compound Poisson
// ---------------------------------------------------------------------------

/// Sum over Poisson(rate dt) i.i.d. jumps drawn by `jump`.
pub fn compound_poisson<F>(
    rate: f64,
    dim: usize,
    jump: F,
    dt: f64,
    n: usize,
    stream: RngStream,
) -> Result<IncrementBatch>
where
    F: Fn(&mut rand_chacha::ChaCha12Rng) -> DVector<f64> + Sync,
{
    if rate < 0.0 {
        return Err(Error::InvalidParameter("rate must be nonnegative".into()));
    }
    if !(dt > 0.0) || n == 0 {
        return Err(Error::InvalidParameter("dt > 0 and n >= 1 required".into()));
    }
    let shards: Vec<(Vec<DVector<f64>>, Vec<u32>)> = (0..n.div_ceil(SHARD))
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream.substream(shard as u64).rng();
            let count = SHARD.min(n - shard * SHARD);
            let mut incs = Vec::with_capacity(count);
            let mut tags = Vec::with_capacity(count);
            for _ in 0..count {
                let k = poisson(&mut rng, rate * dt);
                let mut v = DVector::<f64>::zeros(dim);
                for _ in 0..k {
                    v += jump(&mut rng);
                }
                incs.push(v);
                tags.push(k as u32);
            }
            (incs, tags)
        })
        .collect();
    let mut increments = Vec::with_capacity(n);
    let mut tail_jumps = Vec::with_capacity(n);
    for (i, t) in shards {
        increments.extend(i);
        tail_jumps.extend(t);
    }
    Ok(IncrementBatch {
        dt,
        increments,
        tail_jumps,
        truncated_variance: 0.0,
        scheme: SchemeTag::CompoundPoisson,
    })
}

// ---------------------------------------------------------------------------
// Tail jump law of a spec
// ---------------------------------------------------------------------------

enum DirectionLaw {
    Atoms(Vec<(DVector<f64>, f64)>, f64),
    Isotropic(usize),
}

impl DirectionLaw {
    fn of(spec: &LevyMeasureSpec) -> DirectionLaw {
        match &spec.spectral {
            SpectralMeasure::Atoms(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                DirectionLaw::Atoms(atoms.iter().map(|a| (a.direction.clone(), a.weight)).collect(), total)
            }
            SpectralMeasure::Isotropic { dim, .. } => DirectionLaw::Isotropic(*dim),
        }
    }

    /// Direction law of Lambda_1 (weights w * c0).
    fn of_weighted(spec: &LevyMeasureSpec) -> DirectionLaw {
        match &spec.spectral {
            SpectralMeasure::Atoms(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.weight * a.c0).sum();
                DirectionLaw::Atoms(
                    atoms.iter().map(|a| (a.direction.clone(), a.weight * a.c0)).collect(),
                    total,
                )
            }
            SpectralMeasure::Isotropic { dim, .. } => DirectionLaw::Isotropic(*dim),
        }
    }

    fn sample<R: RngCore>(&self, rng: &mut R) -> DVector<f64> {
        match self {
            DirectionLaw::Atoms(atoms, total) => {
                let mut u = uniform_open01(rng) * total;
                for (dir, w) in atoms {
                    u -= w;
                    if u <= 0.0 {
                        return dir.clone();
                    }
                }
                atoms.last().unwrap().0.clone()
            }
            DirectionLaw::Isotropic(d) => {
                let mut v = DVector::<f64>::zeros(*d);
                loop {
                    for i in 0..*d {
                        v[i] = normal(rng);
                    }
                    let n = v.norm();
                    if n > 0.0 {
                        return v / n;
                    }
                }
            }
        }
    }
}

/// Rate and jump sampler of nu_inf, or None when the tail is empty.
pub fn tail_jump_sampler(
    spec: &LevyMeasureSpec,
) -> Option<(f64, Box<dyn Fn(&mut rand_chacha::ChaCha12Rng) -> DVector<f64> + Sync + Send>)> {
    let rate = crate::levy::tail_total_rate(spec);
    if rate <= 0.0 {
        return None;
    }
    let alpha = spec.alpha;
    match &spec.tail {
        TailSpec::None => None,
        TailSpec::StableContinuation => {
            let dirs = DirectionLaw::of_weighted(spec);
            Some((
                rate,
                Box::new(move |rng| {
                    let r = uniform_open01(rng).powf(-1.0 / alpha);
                    dirs.sample(rng) * r
                }),
            ))
        }
        TailSpec::UniformShell { r_min, r_max, .. } => {
            let (lo, hi) = (*r_min, *r_max);
            let dirs = DirectionLaw::of(spec);
            Some((
                rate,
                Box::new(move |rng| {
                    let r = lo + (hi - lo) * uniform_open01(rng);
                    dirs.sample(rng) * r
                }),
            ))
        }
        TailSpec::Pareto { exponent, .. } => {
            let p = *exponent;
            let dirs = DirectionLaw::of(spec);
            Some((
                rate,
                Box::new(move |rng| {
                    let r = uniform_open01(rng).powf(-1.0 / p);
                    dirs.sample(rng) * r
                }),
            ))
        }
        TailSpec::PointMasses(pm) => {
            let pm: Vec<(DVector<f64>, f64)> = pm.clone();
            let total: f64 = pm.iter().map(|(_, w)| w).sum();
            Some((
                rate,
                Box::new(move |rng| {
                    let mut u = uniform_open01(rng) * total;
                    for (z, w) in &pm {
                        u -= w;
                        if u <= 0.0 {
                            return z.clone();
                        }
                    }
                    pm.last().unwrap().0.clone()
                }),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Layered-stable increments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct LlslOptions {
    /// Inner truncation radius: jumps below are discarded, their variance
    /// is reported in the batch.
    pub delta_r: f64,
    /// Optional cap on expected envelope candidates per increment; raises
    /// delta_r when the fixed radius would be too expensive.
    pub candidate_budget: Option<f64>,
}

impl Default for LlslOptions {
    fn default() -> Self {
        LlslOptions { delta_r: 1e-4, candidate_budget: None }
    }
}

struct InnerAtom {
    direction: DVector<f64>,
    envelope_rate: f64,
}

/// Reusable single-increment sampler for a layered measure: all the
/// per-spec precomputation (validation, envelope check, truncation radius,
/// atom rates, tail law) happens once at construction.
pub struct LlslSampler {
    dim: usize,
    alpha: f64,
    pure: bool,
    exact: Option<StableLaw>,
    isotropic: bool,
    atoms: Vec<InnerAtom>,
    total_env_rate: f64,
    dinv_a: f64,
    delta: f64,
    tail: Option<(f64, Box<dyn Fn(&mut rand_chacha::ChaCha12Rng) -> DVector<f64> + Sync + Send>)>,
    shape: crate::levy::RadialProfile,
    /// discarded-jump variance per unit time
    pub truncated_variance_rate: f64,
}

impl LlslSampler {
    pub fn new(spec: &LevyMeasureSpec, reference_dt: f64, opts: &LlslOptions) -> Result<Self> {
        spec.validate()?;
        if !spec.is_symmetric() && spec.alpha >= 1.0 {
            return Err(Error::Unsupported(
                "non-symmetric small jumps with alpha >= 1 need drift compensation, out of scope".into(),
            ));
        }
        let alpha = spec.alpha;
        let pure = spec.radial.is_pure_stable();
        if !pure {
            for k in 0..1000 {
                let r = (k as f64 + 0.5) / 1000.0;
                let a = spec.radial.shape(r, alpha);
                if a > 1.0 + 1e-9 {
                    return Err(Error::EnvelopeViolation { r, ratio: a });
                }
            }
        }
        let wc0 = spec.weighted_c0_mass();
        let mut delta = opts.delta_r.clamp(1e-12, 0.5);
        if let Some(budget) = opts.candidate_budget {
            // reference_dt * wc0 * (delta^-alpha - 1)/alpha <= budget
            let target = (budget * alpha / (reference_dt * wc0) + 1.0).powf(-1.0 / alpha);
            delta = delta.max(target.min(0.5));
        }
        let trunc_rate = {
            let p = crate::quad::QuadParams::default();
            let breaks = crate::quad::geometric_breaks(0.0, delta, 0.2, 8);
            let integral = crate::quad::integrate_with_breaks(
                |r| [r.powf(1.0 - alpha) * spec.radial.shape(r, alpha)],
                1e-300,
                delta,
                &breaks,
                &p,
            )
            .value[0];
            wc0 * integral
        };
        let atoms: Vec<InnerAtom> = match &spec.spectral {
            SpectralMeasure::Atoms(list) => list
                .iter()
                .map(|a| InnerAtom {
                    direction: a.direction.clone(),
                    envelope_rate: a.weight * a.c0 * (delta.powf(-alpha) - 1.0) / alpha,
                })
                .collect(),
            SpectralMeasure::Isotropic { dim, total_mass, c0 } => vec![InnerAtom {
                direction: DVector::zeros(*dim),
                envelope_rate: total_mass * c0 * (delta.powf(-alpha) - 1.0) / alpha,
            }],
        };
        Ok(LlslSampler {
            dim: spec.dim(),
            alpha,
            pure,
            exact: spec.exact_stable_law(),
            isotropic: matches!(spec.spectral, SpectralMeasure::Isotropic { .. }),
            total_env_rate: atoms.iter().map(|a| a.envelope_rate).sum(),
            atoms,
            dinv_a: delta.powf(-alpha),
            delta,
            tail: tail_jump_sampler(spec),
            shape: spec.radial.clone(),
            truncated_variance_rate: trunc_rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn truncation_radius(&self) -> f64 {
        self.delta
    }

    /// Draw one increment over dt; returns the vector and the tail-jump
    /// count (0 on the exact-stable path, where the split is not tracked).
    pub fn sample(&self, dt: f64, rng: &mut rand_chacha::ChaCha12Rng) -> (DVector<f64>, u32) {
        if let Some(law) = &self.exact {
            return (sample_stable_vector(law, dt.powf(1.0 / law.alpha), rng), 0);
        }
        let mut v = DVector::<f64>::zeros(self.dim);
        let k = poisson(rng, dt * self.total_env_rate);
        for _ in 0..k {
            let mut pick = uniform_open01(rng) * self.total_env_rate;
            let mut idx = 0;
            for (i, a) in self.atoms.iter().enumerate() {
                idx = i;
                pick -= a.envelope_rate;
                if pick <= 0.0 {
                    break;
                }
            }
            // envelope radius: inverse CDF of r^{-1-alpha} on (delta, 1]
            let u = uniform_open01(rng);
            let r = (self.dinv_a - u * (self.dinv_a - 1.0)).powf(-1.0 / self.alpha);
            let accept = self.pure || uniform_open01(rng) <= self.shape.shape(r, self.alpha);
            if accept {
                if self.isotropic {
                    let dir = DirectionLaw::Isotropic(self.dim).sample(rng);
                    v += dir * r;
                } else {
                    v += &self.atoms[idx].direction * r;
                }
            }
        }
        let mut tcount = 0u32;
        if let Some((rate, jump)) = &self.tail {
            let kt = poisson(rng, rate * dt);
            for _ in 0..kt {
                v += jump(rng);
            }
            tcount = kt as u32;
        }
        (v, tcount)
    }
}

/// One increment of the layered measure over dt: accepted envelope jumps
/// with r in (delta_r, 1], plus an independent compound-Poisson tail. For
/// symmetric specs no drift compensation is added (odd terms cancel).
pub fn llsl_increment(
    spec: &LevyMeasureSpec,
    dt: f64,
    n: usize,
    stream: RngStream,
    opts: &LlslOptions,
) -> Result<IncrementBatch> {
    if !(dt > 0.0) || n == 0 {
        return Err(Error::InvalidParameter("dt > 0 and n >= 1 required".into()));
    }
    // Exact path: the whole measure is one stable law.
    if let Some(law) = spec.exact_stable_law() {
        spec.validate()?;
        return stable_increment(&law, dt, n, stream);
    }
    let sampler = LlslSampler::new(spec, dt, opts)?;
    let shards: Vec<(Vec<DVector<f64>>, Vec<u32>)> = (0..n.div_ceil(SHARD))
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream.substream(shard as u64).rng();
            let count = SHARD.min(n - shard * SHARD);
            let mut incs = Vec::with_capacity(count);
            let mut tags = Vec::with_capacity(count);
            for _ in 0..count {
                let (v, t) = sampler.sample(dt, &mut rng);
                incs.push(v);
                tags.push(t);
            }
            (incs, tags)
        })
        .collect();

    let mut increments = Vec::with_capacity(n);
    let mut tail_jumps = Vec::with_capacity(n);
    for (i, t) in shards {
        increments.extend(i);
        tail_jumps.extend(t);
    }
    Ok(IncrementBatch {
        dt,
        increments,
        tail_jumps,
        truncated_variance: sampler.truncated_variance_rate * dt,
        scheme: SchemeTag::AcceptReject,
    })
}

// ---------------------------------------------------------------------------
// Short-range diagnostic
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShortRangeRow {
    pub h: f64,
    /// grid-TV between h^{-1/alpha} L_h and an exact S_alpha(Lambda_1) sample
    pub tv: f64,
    pub tv_ci: f64,
    /// empirical fraction of increments containing at least one tail jump
    pub tail_fraction: f64,
    /// 1 - exp(-rate h)
    pub tail_fraction_theory: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShortRangeTable {
    pub rows: Vec<ShortRangeRow>,
    /// mean + 3 sd of the two-sample distance between equal laws
    pub noise_floor: f64,
}

/// Distances between the rescaled short-time law h^{-1/alpha} L_h and its
/// exact stable limit S_alpha(Lambda_1), for each h in a decreasing list.
/// Centering vectors are zero for the symmetric drivers in scope.
pub fn short_range_diagnostic(
    spec: &LevyMeasureSpec,
    h_list: &[f64],
    n: usize,
    stream: RngStream,
    opts: &LlslOptions,
) -> Result<ShortRangeTable> {
    spec.validate()?;
    if h_list.windows(2).any(|w| w[1] >= w[0]) || h_list.iter().any(|&h| h <= 0.0) {
        return Err(Error::InvalidParameter("h_list must be strictly decreasing and positive".into()));
    }
    if !spec.is_symmetric() && (spec.alpha - 1.0).abs() < 1e-9 {
        return Err(Error::Unsupported(
            "centering for non-symmetric alpha = 1 drivers is undefined in scope".into(),
        ));
    }
    let limit_law = spec.short_range_stable_law();
    let rate = crate::levy::tail_total_rate(spec);
    let hist = HistOpts { bins_per_axis: Some(24), ..Default::default() };

    // one shared reference sample keeps the noise component correlated
    // across the h column, which protects the monotonicity read-out
    let ref_batch = stable_increment(&limit_law, 1.0, n, stream.substream(0xeef))?;
    let noise_floor = distance::two_sample_noise_floor(
        |m, s| stable_increment(&limit_law, 1.0, m, s).unwrap().increments,
        n,
        5,
        stream.substream(0xf100),
        &hist,
    )?;

    // The comparison happens at scale h^{1/alpha}, so the truncation radius
    // must shrink with h: pick kappa so the discarded-jump noise stays at
    // 1% of the rescaled law, uniformly in h.
    let alpha = spec.alpha;
    let wc0 = spec.weighted_c0_mass();
    let kappa = (1e-4 * (2.0 - alpha) / wc0).powf(1.0 / (2.0 - alpha));

    let mut rows = Vec::with_capacity(h_list.len());
    for (i, &h) in h_list.iter().enumerate() {
        let h_opts = LlslOptions {
            delta_r: opts.delta_r.min(kappa * h.powf(1.0 / alpha)),
            candidate_budget: opts.candidate_budget,
        };
        let batch = llsl_increment(spec, h, n, stream.substream(100 + i as u64), &h_opts)?;
        let scale = h.powf(-1.0 / spec.alpha);
        let rescaled: Vec<DVector<f64>> = batch.increments.iter().map(|v| v * scale).collect();
        let est = distance::tv_hist(&rescaled, &ref_batch.increments, &hist)?;
        let tail_fraction =
            batch.tail_jumps.iter().filter(|&&k| k > 0).count() as f64 / batch.n() as f64;
        rows.push(ShortRangeRow {
            h,
            tv: est.value,
            tv_ci: est.ci,
            tail_fraction,
            tail_fraction_theory: 1.0 - (-rate * h).exp(),
        });
    }
    Ok(ShortRangeTable { rows, noise_floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{RadialProfile, SpectralAtom};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn budget(b: f64) -> LlslOptions {
        LlslOptions { delta_r: 1e-4, candidate_budget: Some(b) }
    }

    fn sym_1d_spec(alpha: f64, radial: RadialProfile, tail: TailSpec, beta: f64) -> LevyMeasureSpec {
        LevyMeasureSpec {
            alpha,
            spectral: SpectralMeasure::Atoms(vec![
                SpectralAtom { direction: DVector::from_vec(vec![1.0]), weight: 1.0, c0: 1.0 },
                SpectralAtom { direction: DVector::from_vec(vec![-1.0]), weight: 1.0, c0: 1.0 },
            ]),
            radial,
            tail,
            beta,
            symmetric_small_jumps: true,
        }
    }

    fn one_d(law: &StableLaw, dt: f64, n: usize, seed: u64) -> Vec<f64> {
        stable_increment(law, dt, n, RngStream::new(seed))
            .unwrap()
            .increments
            .iter()
            .map(|v| v[0])
            .collect()
    }

    fn quantile(sorted: &[f64], q: f64) -> f64 {
        sorted[((sorted.len() as f64) * q) as usize]
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let mut rng = RngStream::new(77).rng();
        for &a in &[0.4, 0.75, 0.9] {
            let n = 100_000;
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for _ in 0..n {
                let x = positive_stable(a, &mut rng);
                s1 += (-x).exp();
                s2 += (-2.0 * x).exp();
            }
            let e1 = (-1.0f64).exp();
            let e2 = (-(2.0f64).powf(a)).exp();
            assert_abs_diff_eq!(s1 / n as f64, e1, epsilon = 5e-3);
            assert_abs_diff_eq!(s2 / n as f64, e2, epsilon = 5e-3);
        }
    }

    #[test]
    fn cauchy_quartiles() {
        // alpha = 1, scale 1, dt = 1: standard Cauchy has quartiles -1, 0, 1
        let law = StableLaw { alpha: 1.0, components: StableComponents::Isotropic { dim: 1, sigma: 1.0 } };
        let mut xs = one_d(&law, 1.0, 200_000, 11);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // quantile se: sqrt(q(1-q)/n)/f(x_q); f(+-1) = 1/(2 pi)
        let se = (0.25f64 / 200_000.0).sqrt() * 2.0 * std::f64::consts::PI;
        assert_abs_diff_eq!(quantile(&xs, 0.5), 0.0, epsilon = 6.0 * (0.25f64 / 200_000.0).sqrt() * std::f64::consts::PI);
        assert_abs_diff_eq!(quantile(&xs, 0.25), -1.0, epsilon = 6.0 * se);
        assert_abs_diff_eq!(quantile(&xs, 0.75), 1.0, epsilon = 6.0 * se);
    }

    fn ecf(samples: &[DVector<f64>], u: &DVector<f64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in samples {
            let phase = u.dot(v);
            acc += Complex64::new(phase.cos(), phase.sin());
        }
        acc / samples.len() as f64
    }

    #[test]
    fn stable_increment_matches_exponent_1d() {
        let law = StableLaw { alpha: 1.6, components: StableComponents::Isotropic { dim: 1, sigma: 0.8 } };
        let dt = 0.3;
        let batch = stable_increment(&law, dt, 100_000, RngStream::new(7)).unwrap();
        let tol = 3.0 / (batch.n() as f64).sqrt();
        for &u in &[0.5, 1.0, 2.0, 4.0] {
            let uu = DVector::from_vec(vec![u]);
            let expected = (dt * law.exponent(&uu)).exp();
            let got = ecf(&batch.increments, &uu);
            assert!((got.re - expected).abs() < tol, "u={u} got {got} want {expected}");
            assert!(got.im.abs() < tol);
        }
    }

    #[test]
    fn stable_increment_matches_exponent_isotropic_2d() {
        let law = StableLaw { alpha: 1.8, components: StableComponents::Isotropic { dim: 2, sigma: 1.0 } };
        let batch = stable_increment(&law, 1.0, 100_000, RngStream::new(8)).unwrap();
        let tol = 3.0 / (batch.n() as f64).sqrt();
        for u in [[0.7, 0.0], [0.5, -0.5], [1.5, 1.0]] {
            let uu = DVector::from_vec(u.to_vec());
            let expected = law.exponent(&uu).exp();
            let got = ecf(&batch.increments, &uu);
            assert!((got.re - expected).abs() < tol, "u={uu:?} got {got} want {expected}");
            assert!(got.im.abs() < tol);
        }
    }

    #[test]
    fn stable_increment_matches_exponent_axes_2d() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let law = StableLaw {
            alpha: 1.5,
            components: StableComponents::AxisFactors(vec![(e1, 1.0), (e2, 0.5)]),
        };
        let batch = stable_increment(&law, 1.0, 100_000, RngStream::new(9)).unwrap();
        let tol = 3.0 / (batch.n() as f64).sqrt();
        for u in [[1.0, 0.0], [0.3, 0.9], [-1.0, 0.5]] {
            let uu = DVector::from_vec(u.to_vec());
            let expected = law.exponent(&uu).exp();
            let got = ecf(&batch.increments, &uu);
            assert!((got.re - expected).abs() < tol, "u={uu:?} got {got} want {expected}");
        }
    }

    #[test]
    fn stable_self_similarity_two_sample() {
        // increments over c dt equal in law c^{1/alpha} increments over dt
        let law = StableLaw { alpha: 1.4, components: StableComponents::Isotropic { dim: 1, sigma: 1.0 } };
        let c: f64 = 3.0;
        let a = stable_increment(&law, c * 0.2, 20_000, RngStream::new(21)).unwrap();
        let b = stable_increment(&law, 0.2, 20_000, RngStream::new(22)).unwrap();
        let scaled: Vec<DVector<f64>> = b.increments.iter().map(|v| v * c.powf(1.0 / 1.4)).collect();
        let hist = HistOpts { bins_per_axis: Some(20), ..Default::default() };
        let floor = distance::two_sample_noise_floor(
            |m, s| stable_increment(&law, c * 0.2, m, s).unwrap().increments,
            20_000,
            6,
            RngStream::new(23),
            &hist,
        )
        .unwrap();
        let est = distance::tv_hist(&a.increments, &scaled, &hist).unwrap();
        assert!(est.value <= floor, "tv {} floor {}", est.value, floor);
    }

    #[test]
    fn batch_reproducibility_bit_for_bit() {
        let law = StableLaw { alpha: 1.8, components: StableComponents::Isotropic { dim: 2, sigma: 0.7 } };
        let a = stable_increment(&law, 0.5, 20_001, RngStream::new(5)).unwrap();
        let b = stable_increment(&law, 0.5, 20_001, RngStream::new(5)).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        let spec = sym_1d_spec(0.8, RadialProfile::Tempered { mu: 1.0 }, TailSpec::None, 0.5);
        let a = llsl_increment(&spec, 0.5, 9_000, RngStream::new(6), &budget(300.0)).unwrap();
        let b = llsl_increment(&spec, 0.5, 9_000, RngStream::new(6), &budget(300.0)).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_eq!(a.tail_jumps, b.tail_jumps);
    }

    #[test]
    fn symmetry_two_sample() {
        let spec = sym_1d_spec(
            0.9,
            RadialProfile::Tempered { mu: 0.5 },
            TailSpec::UniformShell { rate: 0.5, r_min: 1.0, r_max: 2.0 },
            1.0,
        );
        let batch = llsl_increment(&spec, 1.0, 20_000, RngStream::new(31), &budget(400.0)).unwrap();
        let negated: Vec<DVector<f64>> = batch.increments.iter().map(|v| -v).collect();
        let hist = HistOpts { bins_per_axis: Some(20), ..Default::default() };
        let floor = distance::two_sample_noise_floor(
            |m, s| llsl_increment(&spec, 1.0, m, s, &budget(400.0)).unwrap().increments,
            20_000,
            5,
            RngStream::new(32),
            &hist,
        )
        .unwrap();
        let est = distance::tv_hist(&batch.increments, &negated, &hist).unwrap();
        assert!(est.value <= floor, "tv {} floor {}", est.value, floor);
    }

    #[test]
    fn llsl_pure_stable_equals_exact_stable() {
        // pure-stable profile with the stable continuation: the envelope is
        // exact and the laws agree exactly
        let spec = sym_1d_spec(1.8, RadialProfile::PureStable, TailSpec::StableContinuation, 0.5);
        let a = llsl_increment(&spec, 0.7, 50_000, RngStream::new(41), &LlslOptions::default()).unwrap();
        assert_eq!(a.scheme, SchemeTag::ExactStable);
        let law = spec.exact_stable_law().unwrap();
        let b = stable_increment(&law, 0.7, 50_000, RngStream::new(42)).unwrap();
        let hist = HistOpts { bins_per_axis: Some(24), ..Default::default() };
        let floor = distance::two_sample_noise_floor(
            |m, s| stable_increment(&law, 0.7, m, s).unwrap().increments,
            50_000,
            5,
            RngStream::new(43),
            &hist,
        )
        .unwrap();
        let est = distance::tv_hist(&a.increments, &b.increments, &hist).unwrap();
        assert!(est.value <= floor, "tv {} floor {}", est.value, floor);
    }

    #[test]
    fn llsl_ecf_matches_char_exponent() {
        // tempered inner layer + shell tail against the quadrature exponent
        let spec = sym_1d_spec(
            0.8,
            RadialProfile::Tempered { mu: 1.0 },
            TailSpec::UniformShell { rate: 0.7, r_min: 1.0, r_max: 2.0 },
            1.0,
        );
        let dt = 0.6;
        let n = 100_000;
        let batch = llsl_increment(&spec, dt, n, RngStream::new(51), &budget(300.0)).unwrap();
        let tol = 4.0 / (n as f64).sqrt();
        let qp = crate::quad::QuadParams::default();
        for &u in &[0.4, 1.0, 2.5, 5.0] {
            let uu = DVector::from_vec(vec![u]);
            let psi = crate::levy::char_exponent(&spec, &uu, &qp).unwrap();
            let expected = (psi * dt).exp();
            let got = ecf(&batch.increments, &uu);
            assert!(
                (got - expected).norm() < tol + batch.truncated_variance.sqrt() * u,
                "u={u} got {got} want {expected}"
            );
        }
    }

    #[test]
    fn llsl_tempering_sweep_converges_to_stable() {
        // mu -> 0 approaches the pure-stable law: grid TV decreasing
        let n = 30_000;
        let reference = {
            let spec = sym_1d_spec(0.8, RadialProfile::PureStable, TailSpec::StableContinuation, 0.5);
            let law = spec.exact_stable_law().unwrap();
            stable_increment(&law, 1.0, n, RngStream::new(61)).unwrap().increments
        };
        let hist = HistOpts { bins_per_axis: Some(16), ..Default::default() };
        let mut last = f64::INFINITY;
        for (i, &mu) in [1.0, 0.1, 0.01].iter().enumerate() {
            let spec = sym_1d_spec(0.8, RadialProfile::Tempered { mu }, TailSpec::StableContinuation, 0.5);
            let batch = llsl_increment(&spec, 1.0, n, RngStream::new(70 + i as u64), &budget(400.0)).unwrap();
            let est = distance::tv_hist(&batch.increments, &reference, &hist).unwrap();
            assert!(est.value < last + 0.01, "mu={mu}: {} vs {}", est.value, last);
            last = est.value;
        }
        assert!(last < 0.05, "final TV {last}");
    }

    #[test]
    fn tail_point_mass_poisson_counts() {
        // jump count over [0, t] is Poisson(rate t): chi-square GOF
        let z0 = DVector::from_vec(vec![3.0]);
        let spec = sym_1d_spec(0.8, RadialProfile::PureStable, TailSpec::PointMasses(vec![(z0, 0.9)]), 1.0);
        let t = 2.0;
        let n = 50_000;
        let batch = llsl_increment(&spec, t, n, RngStream::new(81), &budget(200.0)).unwrap();
        let lam = 0.9 * t;
        let mut obs = [0f64; 8];
        for &k in &batch.tail_jumps {
            obs[(k as usize).min(7)] += 1.0;
        }
        let mut exp = [0f64; 8];
        let mut cum = 0.0;
        let mut pk = (-lam).exp();
        for k in 0..7 {
            exp[k] = pk * n as f64;
            cum += pk;
            pk *= lam / (k as f64 + 1.0);
        }
        exp[7] = (1.0 - cum) * n as f64;
        let chi2: f64 = obs
            .iter()
            .zip(exp.iter())
            .filter(|(_, e)| **e > 1.0)
            .map(|(o, e)| (o - e) * (o - e) / e)
            .sum();
        // 7 dof, 0.999 quantile ~ 24.3
        assert!(chi2 < 24.3, "chi2 {chi2} obs {obs:?} exp {exp:?}");
    }

    #[test]
    fn compound_poisson_basics() {
        // zero rate: all-zero batch
        let b = compound_poisson(0.0, 1, |_| DVector::from_vec(vec![1.0]), 1.0, 100, RngStream::new(1)).unwrap();
        assert!(b.increments.iter().all(|v| v[0] == 0.0));
        // deterministic unit jumps: increment equals the count exactly
        let b = compound_poisson(2.0, 1, |_| DVector::from_vec(vec![1.0]), 3.0, 50_000, RngStream::new(2)).unwrap();
        for (v, &k) in b.increments.iter().zip(b.tail_jumps.iter()) {
            assert_eq!(v[0], k as f64);
        }
        // mean count = rate * dt = 6
        let mean: f64 = b.tail_jumps.iter().map(|&k| k as f64).sum::<f64>() / b.n() as f64;
        let se = (6.0f64 / b.n() as f64).sqrt();
        assert!((mean - 6.0).abs() < 5.0 * se, "mean {mean}");
    }

    #[test]
    fn short_range_tempered_decreasing() {
        let spec = sym_1d_spec(0.8, RadialProfile::Tempered { mu: 3.0 }, TailSpec::None, 1.0);
        let table = short_range_diagnostic(
            &spec,
            &[1.0, 0.1, 0.01, 0.001],
            30_000,
            RngStream::new(91),
            &budget(4000.0),
        )
        .unwrap();
        let tvs: Vec<f64> = table.rows.iter().map(|r| r.tv).collect();
        for w in tvs.windows(2) {
            assert!(w[1] < w[0] + 0.01, "{tvs:?}");
        }
        assert!(
            tvs[3] < 2.0 * table.noise_floor + 0.01,
            "tv {} floor {}",
            tvs[3],
            table.noise_floor
        );
    }

    #[test]
    fn short_range_heavy_tail_fraction_matches_poisson() {
        let spec = sym_1d_spec(0.8, RadialProfile::PureStable, TailSpec::Pareto { rate: 2.0, exponent: 1.5 }, 1.0);
        let table = short_range_diagnostic(&spec, &[0.5, 0.1], 40_000, RngStream::new(95), &budget(4000.0)).unwrap();
        for row in &table.rows {
            let se = (row.tail_fraction_theory * (1.0 - row.tail_fraction_theory) / 40_000.0).sqrt();
            assert!(
                (row.tail_fraction - row.tail_fraction_theory).abs() < 5.0 * se + 1e-3,
                "h={} frac {} theory {}",
                row.h,
                row.tail_fraction,
                row.tail_fraction_theory
            );
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let law = StableLaw { alpha: 2.0, components: StableComponents::Isotropic { dim: 1, sigma: 1.0 } };
        assert!(stable_increment(&law, 1.0, 10, RngStream::new(0)).is_err());
        let spec = sym_1d_spec(1.2, RadialProfile::PureStable, TailSpec::None, 1.0);
        assert!(llsl_increment(&spec, 0.0, 10, RngStream::new(0), &LlslOptions::default()).is_err());
    }

    #[test]
    fn envelope_violation_detected() {
        use std::sync::Arc;
        let spec = sym_1d_spec(
            1.2,
            RadialProfile::Custom(Arc::new(|r| 1.0 + 0.5 * r)),
            TailSpec::None,
            1.0,
        );
        // shape exceeds 1: not a valid sub-stable envelope
        assert!(matches!(
            llsl_increment(&spec, 1.0, 10, RngStream::new(0), &LlslOptions::default()),
            Err(Error::EnvelopeViolation { .. })
        ));
    }
}
