//! Total-variation distance computation: histogram estimators with
//! bootstrap confidence intervals, Fourier inversion for linear (OU-type)
//! marginals, closed 1D formulas for symmetric unimodal laws, radial-shift
//! quadrature, and the exact Slutsky counterexample.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{self, LevyMeasureSpec, StableLaw};
use crate::quad::{self, QuadParams};
use crate::rng::{poisson, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TvMethod {
    Hist,
    Fourier,
    Closed1d,
    RadialQuad,
}

impl TvMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TvMethod::Hist => "hist",
            TvMethod::Fourier => "fourier",
            TvMethod::Closed1d => "closed-1d",
            TvMethod::RadialQuad => "radial-quad",
        }
    }
}

/// A total-variation value with an uncertainty half-width.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TVEstimate {
    pub value: f64,
    /// 95% half-width for the hist method; a deterministic error bound for
    /// the quadrature methods.
    pub ci: f64,
    pub method: TvMethod,
    /// Number of cells (hist) or lattice points (fourier); 0 otherwise.
    pub grid: usize,
    /// Reported upward bias order of the raw histogram estimator
    /// (before the subtraction applied to `value`).
    pub bias: f64,
}

// ---------------------------------------------------------------------------
// Histogram estimator
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct HistOpts {
    /// Bins per axis; None picks floor(n^(1/(d+2))) capped at 64.
    pub bins_per_axis: Option<usize>,
    /// Bootstrap replicates for the CI.
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for HistOpts {
    fn default() -> Self {
        HistOpts { bins_per_axis: None, bootstrap: 200, seed: 0x7_1e57 }
    }
}

fn quantile_edges(pool: &mut [f64], bins: usize) -> Vec<f64> {
    pool.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = pool.len();
    let mut edges = Vec::with_capacity(bins - 1);
    for k in 1..bins {
        let q = k as f64 / bins as f64;
        let idx = ((n as f64) * q) as usize;
        edges.push(pool[idx.min(n - 1)]);
    }
    edges.dedup_by(|a, b| a == b);
    edges
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|e| *e < x)
}

/// Empirical total variation between two vector samples on a shared
/// equal-mass product binning, with a bootstrap CI and a noise-bias
/// subtraction. The raw sum (1/2) sum |pA - pB| is biased upward by the
/// sampling noise of near-equal cells; the subtraction removes the folded
/// normal mean of that noise, attenuated where the gap is genuine.
pub fn tv_hist(a: &[DVector<f64>], b: &[DVector<f64>], opts: &HistOpts) -> Result<TVEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("empty sample set".into()));
    }
    let d = a[0].len();
    if b[0].len() != d {
        return Err(Error::DimensionMismatch(format!("{} vs {}", d, b[0].len())));
    }
    let n = a.len().min(b.len());
    let bins_axis = opts
        .bins_per_axis
        .unwrap_or_else(|| ((n as f64).powf(1.0 / (d as f64 + 2.0)) as usize).clamp(2, 64));
    let total_bins = bins_axis.pow(d as u32);
    if n < 4 * total_bins {
        return Err(Error::TooFewSamples { n, bins: total_bins });
    }

    // Shared per-axis quantile edges from the pooled sample.
    let mut axis_edges: Vec<Vec<f64>> = Vec::with_capacity(d);
    for ax in 0..d {
        let mut pool: Vec<f64> = a.iter().chain(b.iter()).map(|v| v[ax]).collect();
        axis_edges.push(quantile_edges(&mut pool, bins_axis));
    }
    let strides: Vec<usize> = (0..d)
        .map(|ax| axis_edges[..ax].iter().map(|e| e.len() + 1).product())
        .collect();
    let cells: usize = axis_edges.iter().map(|e| e.len() + 1).product();

    let index = |v: &DVector<f64>| -> usize {
        (0..d).map(|ax| bin_of(&axis_edges[ax], v[ax]) * strides[ax]).sum()
    };
    let mut members_a: Vec<Vec<u32>> = vec![Vec::new(); cells];
    let mut members_b: Vec<Vec<u32>> = vec![Vec::new(); cells];
    for (i, v) in a.iter().enumerate() {
        members_a[index(v)].push(i as u32);
    }
    for (i, v) in b.iter().enumerate() {
        members_b[index(v)].push(i as u32);
    }

    // Refinement pass: a frame cell holding substantial mass from both
    // samples is split recursively (at the pooled median of the widest
    // axis) so that regions where one law has already died out are not
    // averaged against the other. Keeps the disjoint-support distance at
    // 1 - O(1/n) instead of 1 - O(1/bins).
    let refine_min = 32usize;
    let mut counts: Vec<(u64, u64)> = Vec::with_capacity(cells * 2);
    let mut stack: Vec<(Vec<u32>, Vec<u32>, usize)> = Vec::new();
    for i in 0..cells {
        stack.push((std::mem::take(&mut members_a[i]), std::mem::take(&mut members_b[i]), 10));
    }
    while let Some((ia, ib, depth)) = stack.pop() {
        if depth == 0 || ia.len() < refine_min || ib.len() < refine_min {
            counts.push((ia.len() as u64, ib.len() as u64));
            continue;
        }
        // widest pooled spread picks the split axis
        let mut best_ax = 0;
        let mut best_spread = -1.0;
        for ax in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in &ia {
                let x = a[i as usize][ax];
                lo = lo.min(x);
                hi = hi.max(x);
            }
            for &i in &ib {
                let x = b[i as usize][ax];
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_ax = ax;
            }
        }
        // pooled median along that axis
        let mut vals: Vec<f64> = ia
            .iter()
            .map(|&i| a[i as usize][best_ax])
            .chain(ib.iter().map(|&i| b[i as usize][best_ax]))
            .collect();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let cut = vals[vals.len() / 2];
        let (la, ra): (Vec<u32>, Vec<u32>) = ia.into_iter().partition(|&i| a[i as usize][best_ax] < cut);
        let (lb, rb): (Vec<u32>, Vec<u32>) = ib.into_iter().partition(|&i| b[i as usize][best_ax] < cut);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let gap = |ka: usize, kb: usize| (ka as f64 / na - kb as f64 / nb).abs();
        let before = gap(la.len() + ra.len(), lb.len() + rb.len());
        let after = gap(la.len(), lb.len()) + gap(ra.len(), rb.len());
        let sd = ((la.len() + ra.len()) as f64 / (na * na) + (lb.len() + rb.len()) as f64 / (nb * nb)).sqrt();
        let degenerate = (la.is_empty() && lb.is_empty()) || (ra.is_empty() && rb.is_empty());
        // keep the split only if it separates genuinely more mass than
        // counting noise could fake
        if degenerate || after - before < 4.0 * sd {
            let (ka, kb) = (la.len() + ra.len(), lb.len() + rb.len());
            counts.push((ka as u64, kb as u64));
            continue;
        }
        stack.push((la, lb, depth - 1));
        stack.push((ra, rb, depth - 1));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);

    let mut raw = 0.0;
    let mut bias = 0.0;
    for &(ka, kb) in &counts {
        let pa = ka as f64 / na;
        let pb = kb as f64 / nb;
        let gap = (pa - pb).abs();
        raw += gap;
        let var = pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb;
        if var > 0.0 {
            let sd = var.sqrt();
            bias += sd * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * (gap / sd).powi(2)).exp();
        }
    }
    let raw = 0.5 * raw;
    let bias = 0.5 * bias;

    // Poissonized bootstrap over the final cell counts.
    let mut rng = RngStream::new(opts.seed).substream(0xb007).rng();
    let mut reps = Vec::with_capacity(opts.bootstrap);
    let ncells = counts.len();
    let mut ra = vec![0u64; ncells];
    let mut rb = vec![0u64; ncells];
    for _ in 0..opts.bootstrap {
        let mut ta = 0u64;
        let mut tb = 0u64;
        for (i, &(ka, kb)) in counts.iter().enumerate() {
            ra[i] = poisson(&mut rng, ka as f64);
            rb[i] = poisson(&mut rng, kb as f64);
            ta += ra[i];
            tb += rb[i];
        }
        if ta == 0 || tb == 0 {
            continue;
        }
        let mut rv = 0.0;
        for i in 0..ncells {
            rv += (ra[i] as f64 / ta as f64 - rb[i] as f64 / tb as f64).abs();
        }
        reps.push(0.5 * rv);
    }
    let mean = reps.iter().sum::<f64>() / reps.len().max(1) as f64;
    let var = reps.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (reps.len().max(2) - 1) as f64;
    let ci = 1.96 * var.sqrt() + 0.5 * bias;

    Ok(TVEstimate {
        value: (raw - bias).clamp(0.0, 1.0),
        ci,
        method: TvMethod::Hist,
        grid: counts.len(),
        bias,
    })
}

/// Convenience wrapper for scalar samples.
pub fn tv_hist_1d(a: &[f64], b: &[f64], opts: &HistOpts) -> Result<TVEstimate> {
    let av: Vec<DVector<f64>> = a.iter().map(|&x| DVector::from_vec(vec![x])).collect();
    let bv: Vec<DVector<f64>> = b.iter().map(|&x| DVector::from_vec(vec![x])).collect();
    tv_hist(&av, &bv, opts)
}

/// Same-law two-sample distance level: mean + 3 sd of tv_hist between
/// independent samples drawn by `sampler`, used as a noise floor for
/// distributional-identity tests.
pub fn two_sample_noise_floor<F: FnMut(usize, RngStream) -> Vec<DVector<f64>>>(
    mut sampler: F,
    n: usize,
    reps: usize,
    stream: RngStream,
    opts: &HistOpts,
) -> Result<f64> {
    let mut vals = Vec::with_capacity(reps);
    for r in 0..reps {
        let a = sampler(n, stream.substream(2 * r as u64));
        let b = sampler(n, stream.substream(2 * r as u64 + 1));
        vals.push(tv_hist(&a, &b, opts)?.value);
    }
    let mean = vals.iter().sum::<f64>() / reps as f64;
    let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps.max(2) - 1) as f64).sqrt();
    Ok(mean + 3.0 * sd)
}

// ---------------------------------------------------------------------------
// Fourier inversion on a 1D lattice
// ---------------------------------------------------------------------------

/// Symmetric 1D lattice u_k = (k - n/2) du, k = 0..n, n even.
#[derive(Debug, Clone, Copy)]
pub struct Lattice1D {
    pub du: f64,
    pub n: usize,
}

impl Lattice1D {
    pub fn points(&self) -> Vec<f64> {
        let m = self.n as i64 / 2;
        (0..self.n as i64).map(|k| (k - m) as f64 * self.du).collect()
    }

    pub fn dx(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.du)
    }
}

/// Invert a characteristic function sampled on the lattice to a density on
/// the dual grid x_j = (j - n/2) dx, dx = 2 pi / (n du).
pub fn invert_charfn(chi: &[Complex64], grid: &Lattice1D) -> Vec<f64> {
    let n = grid.n;
    assert_eq!(chi.len(), n);
    assert!(n.is_power_of_two());
    let m = n / 2;
    let mut buf: Vec<Complex64> = chi
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { *c } else { -*c })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = grid.du / (2.0 * std::f64::consts::PI);
    let msign = if m % 2 == 0 { 1.0 } else { -1.0 };
    buf.iter()
        .enumerate()
        .map(|(j, v)| {
            let jsign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (v * scale * jsign * msign).re
        })
        .collect()
}

/// Total variation of two laws given their characteristic functions on a
/// shared lattice, by inversion and an L1 lattice sum. The attached error
/// combines boundary (truncation) mass and the negative-part defect.
pub fn tv_fourier_ou(char_a: &[Complex64], char_b: &[Complex64], grid: &Lattice1D) -> Result<TVEstimate> {
    if char_a.len() != grid.n || char_b.len() != grid.n {
        return Err(Error::DimensionMismatch("characteristic grids must match the lattice".into()));
    }
    let boundary = char_a[0]
        .norm()
        .max(char_a[grid.n - 1].norm())
        .max(char_b[0].norm())
        .max(char_b[grid.n - 1].norm());
    if boundary > 1e-12 {
        return Err(Error::GridTooSmall { boundary, required: 1e-12 });
    }
    let fa = invert_charfn(char_a, grid);
    let fb = invert_charfn(char_b, grid);
    let dx = grid.dx();
    let mut l1 = 0.0;
    let mut neg = 0.0;
    let mut mass_a = 0.0;
    let mut mass_b = 0.0;
    for j in 0..grid.n {
        l1 += (fa[j] - fb[j]).abs() * dx;
        neg += (fa[j].min(0.0).abs() + fb[j].min(0.0).abs()) * dx;
        mass_a += fa[j] * dx;
        mass_b += fb[j] * dx;
    }
    let mass_defect = (mass_a - 1.0).abs().max((mass_b - 1.0).abs());
    // Riemann-sum discretization of the L1 lattice sum: second-difference
    // curvature estimate of the integrand.
    let mut curv = 0.0;
    for j in 1..grid.n - 1 {
        let g = |i: usize| (fa[i] - fb[i]).abs();
        curv += (g(j + 1) - 2.0 * g(j) + g(j - 1)).abs();
    }
    let disc = curv * dx / 24.0;
    let err = grid.n as f64 * boundary * grid.du + neg + mass_defect + disc;
    Ok(TVEstimate {
        value: (0.5 * l1).clamp(0.0, 1.0),
        ci: err,
        method: TvMethod::Fourier,
        grid: grid.n,
        bias: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Closed forms and radial-shift quadrature
// ---------------------------------------------------------------------------

/// TV between X and X + z for a symmetric unimodal law with strictly
/// increasing CDF F: the distance is 2 F(|z|/2) - 1.
pub fn tv_shift_unimodal_1d<F: Fn(f64) -> f64>(cdf: F, z: f64) -> f64 {
    let z = z.abs();
    (2.0 * cdf(0.5 * z) - 1.0).clamp(0.0, 1.0)
}

/// TV between f(.) and f(. - r e1) for a radial density f(z) = g(|z|)
/// with strictly decreasing g, by quadrature in the half-plane spanned by
/// the shift. `g` must be normalized: S_{d-1} int g(s) s^{d-1} ds = 1.
pub fn tv_radial_shift<G: Fn(f64) -> f64>(g: G, r: f64, d: usize, params: &QuadParams) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::InvalidParameter("shift must be nonnegative".into()));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    // monotonicity check on a grid
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let s = 1e-3 + k as f64 * 0.05;
        let v = g(s);
        if v > prev * (1.0 + 1e-9) {
            return Err(Error::InvalidParameter(format!("radial profile not decreasing at s = {s}")));
        }
        prev = v;
    }

    // Extent: expand until the radial mass beyond L is negligible.
    let mut l = 10.0 * (1.0 + r);
    let sphere = sphere_area(d);
    loop {
        let tail = quad::integrate(|s| [g(s) * s.powf(d as f64 - 1.0)], l, 2.0 * l, params).value[0];
        if sphere * tail < 1e-10 || l > 1e6 {
            break;
        }
        l *= 2.0;
    }

    if d == 1 {
        // f(x + r) vs f(x); sign change at x = -r/2
        let val = quad::integrate_with_breaks(
            |x| [(g((x + r).abs()) - g(x.abs())).abs()],
            -l,
            l,
            &[-r / 2.0, -r, 0.0],
            params,
        )
        .value[0];
        return Ok((0.5 * val).clamp(0.0, 1.0));
    }

    // d >= 2: cylindrical coordinates (x along e1, s = |z_perp|):
    // integral = S_{d-2} int dx int_0^inf |g(|(x+r, s)|) - g(|(x, s)|)| s^{d-2} ds
    let ring = sphere_area(d - 1);
    let inner = |x: f64| -> f64 {
        let q = quad::integrate_with_breaks(
            |s: f64| {
                let za = ((x + r) * (x + r) + s * s).sqrt();
                let zb = (x * x + s * s).sqrt();
                [(g(za) - g(zb)).abs() * s.powf(d as f64 - 2.0)]
            },
            1e-12,
            l,
            &quad::geometric_breaks(0.0, l, 0.3, 6),
            &QuadParams { abs_tol: params.abs_tol, rel_tol: 1e-7, max_intervals: 256 },
        );
        q.value[0]
    };
    let outer = quad::integrate_with_breaks(
        |x| [inner(x)],
        -l,
        l,
        &[-r / 2.0, -r, 0.0],
        &QuadParams { abs_tol: params.abs_tol.max(1e-9), rel_tol: 1e-6, max_intervals: 512 },
    );
    Ok((0.5 * ring * outer.value[0]).clamp(0.0, 1.0))
}

/// Surface area of S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    use statrs::function::gamma::gamma;
    if d == 1 {
        return 2.0; // S^0 = two points
    }
    let df = d as f64;
    2.0 * std::f64::consts::PI.powf(df / 2.0) / gamma(df / 2.0)
}

// ---------------------------------------------------------------------------
// Stationary OU characteristic function
// ---------------------------------------------------------------------------

/// chi(z) = exp( int_0^inf psi(eps e^{-J^T s} z) ds ) with geometric time
/// truncation justified by the exponential decay of |e^{-J^T s} z|.
pub fn ou_stationary_charfn(
    j: &DMatrix<f64>,
    spec: &LevyMeasureSpec,
    eps: f64,
    z: &DVector<f64>,
    params: &QuadParams,
) -> Result<Complex64> {
    let delta_j = min_real_eigenvalue(j)?;
    if delta_j <= 0.0 {
        return Err(Error::InvalidParameter("J must have eigenvalues with positive real part".into()));
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let jt = j.transpose();
    let exact = spec.exact_stable_law();
    let psi_at = |s: f64| -> Result<Complex64> {
        let m = (&jt * (-s)).exp();
        let v = m * z * eps;
        match &exact {
            Some(law) => Ok(Complex64::new(law.exponent(&v), 0.0)),
            None => levy::char_exponent(spec, &v, params),
        }
    };
    // Composite panels on blocks of length 1/delta_J, stopping when a
    // block contributes below tolerance.
    let block = 1.0 / delta_j;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut lo = 0.0;
    let mut converged = false;
    for _ in 0..200 {
        let mut block_val = Complex64::new(0.0, 0.0);
        let nsub = 8;
        for i in 0..nsub {
            let a = lo + block * i as f64 / nsub as f64;
            let b = lo + block * (i + 1) as f64 / nsub as f64;
            // 3-point Gauss on [a, b]
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let x1 = 0.774_596_669_241_483_4;
            let (w0, w1) = (8.0 / 9.0, 5.0 / 9.0);
            block_val += (psi_at(c)? * w0 + psi_at(c - h * x1)? * w1 + psi_at(c + h * x1)? * w1) * h;
        }
        acc += block_val;
        lo += block;
        if block_val.norm() < params.abs_tol.max(1e-13) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::QuadratureNonConvergence { residual: f64::NAN });
    }
    Ok(acc.exp())
}

pub fn min_real_eigenvalue(j: &DMatrix<f64>) -> Result<f64> {
    let eig = j.clone().complex_eigenvalues();
    Ok(eig.iter().map(|l| l.re).fold(f64::INFINITY, f64::min))
}

// ---------------------------------------------------------------------------
// Symmetric alpha-stable CDF / density (Gil-Pelaez)
// ---------------------------------------------------------------------------

/// P(X <= x) for a symmetric 1D alpha-stable law with exponent
/// psi(u) = -(sigma |u|)^alpha.
pub fn sas_cdf(alpha: f64, sigma: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    0.5 + gil_pelaez_sine(alpha, sigma, x) / std::f64::consts::PI
}

/// P(X > x), accurate in the far tail up to the absolute quadrature error.
pub fn sas_tail(alpha: f64, sigma: f64, x: f64) -> f64 {
    (1.0 - sas_cdf(alpha, sigma, x)).max(0.0)
}

/// Density of the same law.
pub fn sas_density(alpha: f64, sigma: f64, x: f64) -> f64 {
    let p = QuadParams { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 2048 };
    let u_max = (42.0f64).powf(1.0 / alpha) / sigma;
    let xa = x.abs();
    let r = if xa < 1e-12 {
        quad::integrate(|u| [(-(sigma * u).powf(alpha)).exp()], 0.0, u_max, &p)
    } else {
        let period = 2.0 * std::f64::consts::PI / xa;
        quad::integrate_with_breaks(
            |u| [(u * xa).cos() * (-(sigma * u).powf(alpha)).exp()],
            0.0,
            u_max,
            &multiples(period, u_max),
            &p,
        )
    };
    (r.value[0] / std::f64::consts::PI).max(0.0)
}

fn multiples(step: f64, up_to: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = step;
    while x < up_to && v.len() < 4096 {
        v.push(x);
        x += step;
    }
    v
}

/// int_0^inf sin(u x) e^{-(sigma u)^alpha} / u du (odd in x).
fn gil_pelaez_sine(alpha: f64, sigma: f64, x: f64) -> f64 {
    let xa = x.abs();
    let u_max = (42.0f64).powf(1.0 / alpha) / sigma;
    let p = QuadParams { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 4096 };
    let period = 2.0 * std::f64::consts::PI / xa.max(1e-300);
    let r = quad::integrate_with_breaks(
        |u| {
            if u == 0.0 {
                [xa]
            } else {
                [(u * xa).sin() * (-(sigma * u).powf(alpha)).exp() / u]
            }
        },
        0.0,
        u_max,
        &multiples(period, u_max),
        &p,
    );
    // remainder beyond u_max is below e^{-42}
    if x >= 0.0 {
        r.value[0]
    } else {
        -r.value[0]
    }
}

/// The 1D stationary OU law for dZ = -lambda Z dt + dL with a symmetric
/// stable driver of scale sigma: again symmetric stable, with scale
/// sigma / (alpha lambda)^(1/alpha).
pub fn sas_ou_stationary(alpha: f64, driver_sigma: f64, lambda: f64) -> StableLaw {
    let sigma = driver_sigma / (alpha * lambda).powf(1.0 / alpha);
    StableLaw {
        alpha,
        components: levy::StableComponents::Isotropic { dim: 1, sigma },
    }
}

// ---------------------------------------------------------------------------
// Slutsky counterexample
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlutskyReport {
    pub n: usize,
    pub a_n: f64,
    /// TV(X_n, U): exact piecewise integration of |f_n - 1|.
    pub tv_xn_vs_u: f64,
    /// TV(X_n + Y_n, U) = 1 exactly: the sum is discrete, U continuous.
    pub tv_sum_vs_u: f64,
}

/// Exact Slutsky-counterexample distances. X_n = U_n + R_n with U_n the
/// discrete uniform on {j/n} and R_n uniform on [0, a_n]; X_n + Y_n = U_n.
pub fn slutsky_demo(n: usize, a_n: f64) -> Result<SlutskyReport> {
    if n == 0 || !(a_n > 0.0) {
        return Err(Error::InvalidParameter("need n >= 1 and a_n > 0".into()));
    }
    // density of X_n: f(z) = (1/(n a_n)) * #{j : z - a_n <= j/n <= z};
    // breakpoint sweep over starts j/n and ends j/n + a_n
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * n + 2);
    for j in 1..=n {
        let s = j as f64 / n as f64;
        events.push((s, 1));
        events.push((s + a_n, -1));
    }
    events.push((0.0, 0));
    events.push((1.0, 0));
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1)));
    let height = 1.0 / (n as f64 * a_n);
    let mut active = 0i64;
    let mut tv = 0.0;
    let mut prev = 0.0f64;
    for &(x, delta) in &events {
        if x > prev {
            let f = active as f64 * height;
            let lo = prev;
            let hi = x;
            // uniform density is 1 on (0,1], 0 beyond; split at 1 if needed
            if hi <= 1.0 {
                tv += (f - 1.0).abs() * (hi - lo);
            } else if lo >= 1.0 {
                tv += f * (hi - lo);
            } else {
                tv += (f - 1.0).abs() * (1.0 - lo) + f * (hi - 1.0);
            }
            prev = x;
        }
        active += delta as i64;
    }
    if prev < 1.0 {
        tv += 1.0 - prev;
    }
    Ok(SlutskyReport { n, a_n, tv_xn_vs_u: 0.5 * tv, tv_sum_vs_u: 1.0 })
}
