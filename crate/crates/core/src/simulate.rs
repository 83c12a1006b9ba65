//! Monte Carlo simulation of the nonlinear process X, its first-order
//! (Freidlin-Wentzell) approximation Y, the homogeneous OU process Z and
//! its stationary samples, plus the quantitative gap and moment audits.
//!
//! The scheme is the jump Euler recursion X_{k+1} = X_k - b(X_k) dt +
//! eps dL_k, with the drift map sub-stepped where the local Jacobian makes
//! a full explicit step unstable (heavy-tail jumps can park a path far out,
//! where superlinear drifts would otherwise blow up the recursion).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::VectorFieldModel;
use crate::error::{Error, Result};
use crate::levy::LevyMeasureSpec;
use crate::rng::RngStream;
use crate::sampling::{LlslOptions, LlslSampler};

const SHARD: usize = 2048;
const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessTag {
    X,
    Y,
    Z,
    Zinf,
}

/// Endpoint samples of a simulated process on a time grid (empty grid and
/// a single slot for stationary samples).
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub tag: ProcessTag,
    pub eps: f64,
    pub x0: DVector<f64>,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    /// endpoints[k][p] = state of path p at t_grid[k]
    pub endpoints: Vec<Vec<DVector<f64>>>,
    pub stream: RngStream,
}

impl PathEnsemble {
    pub fn n(&self) -> usize {
        self.endpoints.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn at(&self, k: usize) -> &[DVector<f64>] {
        &self.endpoints[k]
    }

    /// Scalar view of a 1D ensemble at grid index k.
    pub fn scalars_at(&self, k: usize) -> Vec<f64> {
        self.endpoints[k].iter().map(|v| v[0]).collect()
    }

    /// Little-endian f64 dump of one grid slice, row-major.
    pub fn to_bytes(&self, k: usize) -> Vec<u8> {
        let mut out = Vec::new();
        for v in &self.endpoints[k] {
            for &x in v.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Step schedule
// ---------------------------------------------------------------------------

/// Euler steps of size <= dt hitting every output time exactly: uniform dt
/// sub-grid with an exact remainder step before each output point.
fn step_schedule(t_grid: &[f64], dt: f64) -> Result<Vec<(f64, bool)>> {
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be increasing and nonnegative".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let mut steps = Vec::new();
    let mut t = 0.0;
    for &target in t_grid {
        while target - t > dt * (1.0 + 1e-12) {
            steps.push((dt, false));
            t += dt;
        }
        let rem = target - t;
        if rem > 1e-14 {
            steps.push((rem, true));
            t = target;
        } else {
            // grid point collides with a step boundary
            if let Some(last) = steps.last_mut() {
                last.1 = true;
            } else {
                steps.push((0.0, true));
            }
        }
    }
    Ok(steps)
}

/// Drift map over one step: explicit Euler, sub-stepped so that each
/// sub-step satisfies h |Db| <= 1/4 at the current state.
fn drift_step(vf: &VectorFieldModel, x: &mut DVector<f64>, dt: f64) -> Result<()> {
    let mut remaining = dt;
    let mut guard = 0;
    while remaining > 0.0 {
        let jn = vf.db(x).norm().max(1e-12);
        let h = remaining.min(0.25 / jn);
        *x -= vf.b(x) * h;
        remaining -= h;
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Stiffness { t: dt - remaining, norm: x.norm() });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// X and the coupled first-order approximation
// ---------------------------------------------------------------------------

pub struct SimOptions {
    pub llsl: LlslOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { llsl: LlslOptions::default() }
    }
}

/// Jump Euler solution of dX = -b(X) dt + eps dL.
pub fn simulate_x(
    vf: &VectorFieldModel,
    spec: &LevyMeasureSpec,
    eps: f64,
    x0: &DVector<f64>,
    t_grid: &[f64],
    dt: f64,
    n: usize,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<PathEnsemble> {
    let (x, _) = simulate_engine(vf, spec, eps, x0, t_grid, dt, n, stream, false, opts)?;
    Ok(x)
}

/// First-order approximation Y^eps_t(x) = phi^x_t + eps Y^x_t with the
/// variation-of-constants Euler discretization; shares the increment
/// stream with X when `coupled`.
pub fn simulate_y_first_order(
    vf: &VectorFieldModel,
    spec: &LevyMeasureSpec,
    eps: f64,
    x0: &DVector<f64>,
    t_grid: &[f64],
    dt: f64,
    n: usize,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<PathEnsemble> {
    let (_, y) = simulate_engine(vf, spec, eps, x0, t_grid, dt, n, stream, true, opts)?;
    Ok(y.unwrap())
}

/// X and Y driven by the same increments (common random numbers).
pub fn simulate_coupled_xy(
    vf: &VectorFieldModel,
    spec: &LevyMeasureSpec,
    eps: f64,
    x0: &DVector<f64>,
    t_grid: &[f64],
    dt: f64,
    n: usize,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<(PathEnsemble, PathEnsemble)> {
    let (x, y) = simulate_engine(vf, spec, eps, x0, t_grid, dt, n, stream, true, opts)?;
    Ok((x, y.unwrap()))
}

#[allow(clippy::too_many_arguments)]
fn simulate_engine(
    vf: &VectorFieldModel,
    spec: &LevyMeasureSpec,
    eps: f64,
    x0: &DVector<f64>,
    t_grid: &[f64],
    dt: f64,
    n: usize,
    stream: RngStream,
    with_y: bool,
    opts: &SimOptions,
) -> Result<(PathEnsemble, Option<PathEnsemble>)> {
    if vf.dim() != spec.dim() || vf.dim() != x0.len() {
        return Err(Error::DimensionMismatch("field, noise and initial point dimensions differ".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n >= 1 required".into()));
    }
    if eps < 0.0 {
        return Err(Error::InvalidParameter("eps must be nonnegative".into()));
    }
    let steps = step_schedule(t_grid, dt)?;
    let sampler = if eps > 0.0 { Some(LlslSampler::new(spec, dt, &opts.llsl)?) } else { None };
    let d = vf.dim();

    // Deterministic skeleton for Y: the same Euler drift recursion applied
    // to phi, so that a linear field makes X and Y agree path by path.
    let (phi_skeleton, jacobians) = if with_y {
        let mut phi = x0.clone();
        let mut phis = Vec::with_capacity(steps.len());
        let mut jacs = Vec::with_capacity(steps.len());
        for &(h, _) in &steps {
            jacs.push(vf.db(&phi));
            phis.push(phi.clone());
            if h > 0.0 {
                drift_step(vf, &mut phi, h)?;
            }
        }
        phis.push(phi);
        (phis, jacs)
    } else {
        (Vec::new(), Vec::new())
    };

    let shard_results: Vec<Result<(Vec<Vec<DVector<f64>>>, Option<Vec<Vec<DVector<f64>>>>)>> = (0..n
        .div_ceil(SHARD))
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream.substream(shard as u64).rng();
            let count = SHARD.min(n - shard * SHARD);
            let mut out_x: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(count); t_grid.len()];
            let mut out_y: Option<Vec<Vec<DVector<f64>>>> =
                with_y.then(|| vec![Vec::with_capacity(count); t_grid.len()]);
            for p in 0..count {
                let mut x = x0.clone();
                let mut yy = DVector::<f64>::zeros(d); // the eps-free fluctuation Y^x
                let mut slot = 0;
                for (k, &(h, output)) in steps.iter().enumerate() {
                    if h > 0.0 {
                        drift_step(vf, &mut x, h)
                            .map_err(|_| Error::Divergence { path: shard * SHARD + p, seed: stream.seed, step: k })?;
                        if with_y {
                            let j = &jacobians[k];
                            yy -= j * &yy * h;
                        }
                        if let Some(s) = &sampler {
                            let (inc, _) = s.sample(h, &mut rng);
                            if eps > 0.0 {
                                x += &inc * eps;
                            }
                            if with_y {
                                yy += &inc;
                            }
                        }
                    }
                    if x.norm() > OVERFLOW_GUARD {
                        return Err(Error::Divergence { path: shard * SHARD + p, seed: stream.seed, step: k });
                    }
                    if output {
                        out_x[slot].push(x.clone());
                        if let Some(oy) = out_y.as_mut() {
                            oy[slot].push(&phi_skeleton[k + 1] + &yy * eps);
                        }
                        slot += 1;
                    }
                }
            }
            Ok((out_x, out_y))
        })
        .collect();

    let mut endpoints_x: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(n); t_grid.len()];
    let mut endpoints_y: Option<Vec<Vec<DVector<f64>>>> =
        with_y.then(|| vec![Vec::with_capacity(n); t_grid.len()]);
    for r in shard_results {
        let (ox, oy) = r?;
        for (k, v) in ox.into_iter().enumerate() {
            endpoints_x[k].extend(v);
        }
        if let (Some(ey), Some(oy)) = (endpoints_y.as_mut(), oy) {
            for (k, v) in oy.into_iter().enumerate() {
                ey[k].extend(v);
            }
        }
    }
    let x_ens = PathEnsemble {
        tag: ProcessTag::X,
        eps,
        x0: x0.clone(),
        t_grid: t_grid.to_vec(),
        dt,
        endpoints: endpoints_x,
        stream,
    };
    let y_ens = endpoints_y.map(|e| PathEnsemble {
        tag: ProcessTag::Y,
        eps,
        x0: x0.clone(),
        t_grid: t_grid.to_vec(),
        dt,
        endpoints: e,
        stream,
    });
    Ok((x_ens, y_ens))
}

// ---------------------------------------------------------------------------
// Stationary OU samples
// ---------------------------------------------------------------------------

/// Samples approximating eps Z_inf: the linear OU dZ = -J Z dt + dL run
/// from zero to a horizon where e^{-delta_J T} < tol.
pub fn simulate_z_stationary(
    j: &DMatrix<f64>,
    spec: &LevyMeasureSpec,
    eps: f64,
    n: usize,
    stream: RngStream,
    tol: f64,
    opts: &SimOptions,
) -> Result<PathEnsemble> {
    let d = j.nrows();
    if d != spec.dim() {
        return Err(Error::DimensionMismatch("J and noise dimensions differ".into()));
    }
    let delta_j = crate::distance::min_real_eigenvalue(j)?;
    if delta_j <= 0.0 {
        return Err(Error::InvalidParameter("J must have eigenvalues with positive real part".into()));
    }
    let horizon = (1.0 / tol).ln() / delta_j;
    let dt = (0.02 / delta_j).min(0.1 / j.norm().max(1e-12));
    let steps = (horizon / dt).ceil() as usize;
    let sampler = LlslSampler::new(spec, dt, &opts.llsl)?;

    let shards: Vec<Vec<DVector<f64>>> = (0..n.div_ceil(SHARD))
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream.substream(shard as u64).rng();
            let count = SHARD.min(n - shard * SHARD);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut z = DVector::<f64>::zeros(d);
                for _ in 0..steps {
                    z -= j * &z * dt;
                    let (inc, _) = sampler.sample(dt, &mut rng);
                    z += inc;
                }
                out.push(z * eps);
            }
            out
        })
        .collect();
    let samples: Vec<DVector<f64>> = shards.into_iter().flatten().collect();
    Ok(PathEnsemble {
        tag: ProcessTag::Zinf,
        eps,
        x0: DVector::zeros(d),
        t_grid: vec![horizon],
        dt,
        endpoints: vec![samples],
        stream,
    })
}

// ---------------------------------------------------------------------------
// Freidlin-Wentzell gap statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GapStats {
    pub t: f64,
    pub threshold: f64,
    /// empirical P(|X_t - Y_t| >= threshold)
    pub exceed_prob: f64,
    /// Wilson 95% interval
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Default exceedance threshold Delta_eps^{1/alpha} eps with
/// Delta_eps = eps^{alpha/2}, i.e. eps^{3/2}.
pub fn fw_default_threshold(eps: f64) -> f64 {
    eps.powf(1.5)
}

/// Coupled exceedance probability of the first-order approximation gap.
#[allow(clippy::too_many_arguments)]
pub fn fw_gap_stats(
    vf: &VectorFieldModel,
    spec: &LevyMeasureSpec,
    eps: f64,
    x0: &DVector<f64>,
    t: f64,
    dt: f64,
    n: usize,
    threshold: Option<f64>,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<GapStats> {
    let thr = threshold.unwrap_or_else(|| fw_default_threshold(eps));
    let (x, y) = simulate_coupled_xy(vf, spec, eps, x0, &[t], dt, n, stream, opts)?;
    let mut count = 0usize;
    for (a, b) in x.at(0).iter().zip(y.at(0).iter()) {
        if (a - b).norm() >= thr {
            count += 1;
        }
    }
    let nn = x.n() as f64;
    let p = count as f64 / nn;
    // Wilson interval at z = 1.96
    let z = 1.96f64;
    let denom = 1.0 + z * z / nn;
    let center = (p + z * z / (2.0 * nn)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * nn)) / nn).sqrt() / denom;
    Ok(GapStats {
        t,
        threshold: thr,
        exceed_prob: p,
        ci_low: (center - half).max(0.0),
        ci_high: (center + half).min(1.0),
        n: x.n(),
    })
}

// ---------------------------------------------------------------------------
// Moment audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentRow {
    pub t: f64,
    pub empirical: f64,
    pub se: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentAudit {
    pub gamma: f64,
    pub clamped: bool,
    pub rows: Vec<MomentRow>,
    pub pass: bool,
}

/// Check E|X_t|^gamma <= e^{-delta gamma t} |x|^gamma + C eps^gamma with a
/// frozen constant C, allowing CLT slack on the empirical side.
pub fn moment_audit(
    ensemble: &PathEnsemble,
    gamma: f64,
    vf: &VectorFieldModel,
    beta: f64,
    c_frozen: f64,
) -> Result<MomentAudit> {
    if ensemble.tag != ProcessTag::X {
        return Err(Error::InvalidParameter("moment audit expects an X ensemble".into()));
    }
    let cap = beta.min(1.0);
    let (gamma, clamped) = if gamma > cap { (cap, true) } else { (gamma, false) };
    let x0g = ensemble.x0.norm().powf(gamma);
    let mut rows = Vec::with_capacity(ensemble.t_grid.len());
    let mut pass = true;
    for (k, &t) in ensemble.t_grid.iter().enumerate() {
        let vals: Vec<f64> = ensemble.at(k).iter().map(|v| v.norm().powf(gamma)).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let bound = (-vf.delta * gamma * t).exp() * x0g + c_frozen * ensemble.eps.powf(gamma);
        if mean > bound + 2.0 * se {
            pass = false;
        }
        rows.push(MomentRow { t, empirical: mean, se, bound });
    }
    Ok(MomentAudit { gamma, clamped, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{self, HistOpts};
    use crate::dynamics::{VectorField, VectorFieldModel};
    use crate::levy::{RadialProfile, SpectralAtom, SpectralMeasure, TailSpec};
    use approx::assert_abs_diff_eq;

    fn stable_1d_spec(alpha: f64) -> LevyMeasureSpec {
        LevyMeasureSpec {
            alpha,
            spectral: SpectralMeasure::Atoms(vec![
                SpectralAtom { direction: DVector::from_vec(vec![1.0]), weight: 1.0, c0: 1.0 },
                SpectralAtom { direction: DVector::from_vec(vec![-1.0]), weight: 1.0, c0: 1.0 },
            ]),
            radial: RadialProfile::PureStable,
            tail: TailSpec::StableContinuation,
            beta: 0.5,
            symmetric_small_jumps: true,
        }
    }

    fn linear_1d(lambda: f64) -> VectorFieldModel {
        VectorFieldModel::new(VectorField::Linear { q: DMatrix::from_vec(1, 1, vec![lambda]) }, lambda).unwrap()
    }

    fn fput_1d() -> VectorFieldModel {
        VectorFieldModel::new(
            VectorField::Fput {
                a: DMatrix::identity(1, 1),
                b: DMatrix::identity(1, 1),
                eta: None,
            },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_noise_follows_flow_at_euler_order() {
        let vf = fput_1d();
        let x0 = DVector::from_vec(vec![1.3]);
        let grid = [1.0, 2.5];
        let run = |dt: f64| {
            simulate_x(&vf, &stable_1d_spec(1.8), 0.0, &x0, &grid, dt, 1, RngStream::new(1), &SimOptions::default())
                .unwrap()
        };
        let exact: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let x = 1.3f64;
                x * (-t).exp() / (1.0 + x * x * (1.0 - (-2.0 * t).exp())).sqrt()
            })
            .collect();
        let coarse = run(0.02);
        let fine = run(0.005);
        for k in 0..grid.len() {
            let e_coarse = (coarse.at(k)[0][0] - exact[k]).abs();
            let e_fine = (fine.at(k)[0][0] - exact[k]).abs();
            assert!(e_coarse < 0.02, "coarse error {e_coarse}");
            // first-order convergence in dt
            assert!(e_fine < 0.5 * e_coarse, "coarse {e_coarse} fine {e_fine}");
        }
    }

    #[test]
    fn linear_field_couples_exactly() {
        let vf = linear_1d(1.0);
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![2.0]);
        let (x, y) = simulate_coupled_xy(
            &vf,
            &spec,
            0.1,
            &x0,
            &[0.5, 1.5],
            0.01,
            2000,
            RngStream::new(7),
            &SimOptions::default(),
        )
        .unwrap();
        for k in 0..2 {
            for (a, b) in x.at(k).iter().zip(y.at(k).iter()) {
                assert!((a - b).norm() < 1e-12, "gap {}", (a - b).norm());
            }
        }
    }

    #[test]
    fn y_at_origin_is_scaled_ou() {
        // x = 0: Y^eps_t(0) = eps Z_t in law; check the empirical
        // characteristic function against the OU formula
        let vf = linear_1d(0.8);
        let spec = stable_1d_spec(1.8);
        let law = spec.exact_stable_law().unwrap();
        let k_scale = match &law.components {
            crate::levy::StableComponents::AxisFactors(f) => f[0].1.powf(1.8),
            _ => unreachable!(),
        };
        let eps = 0.5;
        let t = 2.0;
        let y = simulate_y_first_order(
            &vf,
            &spec,
            eps,
            &DVector::zeros(1),
            &[t],
            0.005,
            60_000,
            RngStream::new(9),
            &SimOptions::default(),
        )
        .unwrap();
        let vals = y.scalars_at(0);
        for &u in &[0.5f64, 1.5] {
            let mut re = 0.0;
            for v in &vals {
                re += (u * v).cos();
            }
            re /= vals.len() as f64;
            // char fn of eps Z_t: exp(-K eps^a |u|^a (1-e^{-a lam t})/(a lam))
            let a = 1.8;
            let lam = 0.8;
            let expect = (-k_scale * (eps * u).powf(a) * (1.0 - (-a * lam * t).exp()) / (a * lam)).exp();
            assert!((re - expect).abs() < 4.0 / (vals.len() as f64).sqrt() + 0.01, "u={u} got {re} want {expect}");
        }
    }

    #[test]
    fn stationary_scaling_and_saturation() {
        let spec = stable_1d_spec(1.8);
        let j = DMatrix::from_vec(1, 1, vec![1.0]);
        let opts = SimOptions::default();
        let a = simulate_z_stationary(&j, &spec, 0.1, 20_000, RngStream::new(11), 1e-6, &opts).unwrap();
        // doubling the horizon (tol^2) leaves the law unchanged
        let b = simulate_z_stationary(&j, &spec, 0.1, 20_000, RngStream::new(12), 1e-12, &opts).unwrap();
        let hist = HistOpts { bins_per_axis: Some(20), ..Default::default() };
        let floor = distance::two_sample_noise_floor(
            |m, s| {
                simulate_z_stationary(&j, &spec, 0.1, m, s, 1e-6, &SimOptions::default())
                    .unwrap()
                    .endpoints
                    .remove(0)
            },
            20_000,
            4,
            RngStream::new(13),
            &hist,
        )
        .unwrap();
        let est = distance::tv_hist(a.at(0), b.at(0), &hist).unwrap();
        assert!(est.value <= floor, "tv {} floor {}", est.value, floor);
        // scaling: samples at eps and eps' differ by the factor in law
        let c = simulate_z_stationary(&j, &spec, 0.2, 20_000, RngStream::new(14), 1e-6, &opts).unwrap();
        let rescaled: Vec<DVector<f64>> = a.at(0).iter().map(|v| v * 2.0).collect();
        let est = distance::tv_hist(&rescaled, c.at(0), &hist).unwrap();
        assert!(est.value <= floor, "tv {} floor {}", est.value, floor);
    }

    #[test]
    fn ensembles_are_reproducible() {
        let vf = fput_1d();
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![1.0]);
        let run = || {
            simulate_x(&vf, &spec, 0.1, &x0, &[1.0], 0.01, 5000, RngStream::new(21), &SimOptions::default()).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.to_bytes(0), b.to_bytes(0));
    }

    #[test]
    fn fw_gap_linear_is_zero_and_threshold_infinite_is_zero() {
        let vf = linear_1d(1.0);
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![1.0]);
        let g = fw_gap_stats(&vf, &spec, 0.1, &x0, 1.0, 0.01, 2000, None, RngStream::new(31), &SimOptions::default())
            .unwrap();
        assert_eq!(g.exceed_prob, 0.0);
        let g = fw_gap_stats(
            &vf,
            &spec,
            0.1,
            &x0,
            1.0,
            0.01,
            2000,
            Some(f64::INFINITY),
            RngStream::new(32),
            &SimOptions::default(),
        )
        .unwrap();
        assert_eq!(g.exceed_prob, 0.0);
    }

    #[test]
    fn fw_gap_nonlinear_scales_down_with_eps() {
        let vf = fput_1d();
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![1.0]);
        let mut probs = Vec::new();
        for (i, &eps) in [0.2, 0.05].iter().enumerate() {
            let t = (1.0f64 / eps).ln();
            let g = fw_gap_stats(
                &vf,
                &spec,
                eps,
                &x0,
                t,
                0.01,
                4000,
                None,
                RngStream::new(40 + i as u64),
                &SimOptions::default(),
            )
            .unwrap();
            probs.push(g.exceed_prob);
        }
        assert!(probs[1] < probs[0], "{probs:?}");
    }

    #[test]
    fn moment_audit_deterministic_and_noisy() {
        let vf = fput_1d();
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![1.5]);
        let grid = [0.5, 1.0, 2.0, 4.0];
        // eps = 0: E|X_t|^g = |phi_t|^g <= e^{-delta g t}|x|^g
        let ens = simulate_x(&vf, &spec, 0.0, &x0, &grid, 0.01, 4, RngStream::new(51), &SimOptions::default()).unwrap();
        let audit = moment_audit(&ens, 0.5, &vf, 0.5, 10.0).unwrap();
        assert!(audit.pass, "{audit:?}");
        // noisy: x = 0 plateau scales like eps^gamma (exact for linear drift)
        let lin = linear_1d(1.0);
        let zero = DVector::zeros(1);
        let mut plateaus = Vec::new();
        for (i, &eps) in [0.2, 0.1].iter().enumerate() {
            let ens = simulate_x(&lin, &spec, eps, &zero, &[6.0], 0.02, 30_000, RngStream::new(60 + i as u64), &SimOptions::default())
                .unwrap();
            let audit = moment_audit(&ens, 0.5, &lin, 0.5, 10.0).unwrap();
            plateaus.push(audit.rows[0].empirical);
        }
        let ratio = plateaus[1] / plateaus[0];
        assert_abs_diff_eq!(ratio, 0.5f64.powf(0.5), epsilon = 0.05);
        // gamma above beta /\ 1 is clamped
        let ens = simulate_x(&vf, &spec, 0.1, &zero, &[1.0], 0.02, 1000, RngStream::new(70), &SimOptions::default()).unwrap();
        let audit = moment_audit(&ens, 0.9, &vf, 0.5, 10.0).unwrap();
        assert!(audit.clamped);
        assert_abs_diff_eq!(audit.gamma, 0.5);
    }

    #[test]
    fn weak_order_sanity_dt_refinement() {
        // halving dt moves the endpoint law by less than the Monte Carlo
        // noise floor against a dt/4 reference
        let vf = linear_1d(1.0);
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![1.0]);
        let t = [2.0];
        let n = 30_000;
        let run = |dt: f64, seed: u64| {
            simulate_x(&vf, &spec, 0.3, &x0, &t, dt, n, RngStream::new(seed), &SimOptions::default()).unwrap()
        };
        let ref_fine = run(0.005, 80);
        let half = run(0.01, 81);
        let hist = HistOpts { bins_per_axis: Some(20), ..Default::default() };
        let floor = distance::two_sample_noise_floor(
            |m, s| {
                simulate_x(&vf, &spec, 0.3, &x0, &t, 0.005, m, s, &SimOptions::default())
                    .unwrap()
                    .endpoints
                    .remove(0)
            },
            n,
            4,
            RngStream::new(82),
            &hist,
        )
        .unwrap();
        let est = distance::tv_hist(half.at(0), ref_fine.at(0), &hist).unwrap();
        assert!(est.value <= floor, "tv {} floor {}", est.value, floor);
    }

    #[test]
    fn divergence_error_reports_path() {
        // a repelling cubic (violating the coercivity hypothesis, used only
        // for negative testing) drives the state past the overflow guard
        use std::sync::Arc;
        let vf = VectorFieldModel {
            field: VectorField::Custom {
                dim: 1,
                b: Arc::new(|x: &DVector<f64>| -x.map(|v| v * v * v)),
                db: Arc::new(|x: &DVector<f64>| DMatrix::from_vec(1, 1, vec![-3.0 * x[0] * x[0]])),
            },
            delta: 1.0,
        };
        let spec = stable_1d_spec(1.8);
        let x0 = DVector::from_vec(vec![2.0]);
        let r = simulate_x(&vf, &spec, 0.0, &x0, &[5.0], 0.01, 2, RngStream::new(90), &SimOptions::default());
        assert!(matches!(r, Err(Error::Divergence { .. })), "{r:?}");
    }
}
