//! Adaptive Dormand-Prince 5(4) integration for the deterministic flow
//! and the fundamental-matrix equations.

use nalgebra::DVector;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { abs_tol: 1e-10, rel_tol: 1e-8, h_max: 1.0, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates (a crude global bound).
    pub accumulated_error: f64,
}

/// Integrate dy/dt = f(t, y) from t0 to t1, reporting states at the sorted
/// output times (which must lie in [t0, t1]; t1 itself need not be listed).
pub fn integrate_path<F>(
    f: F,
    t0: f64,
    y0: &DVector<f64>,
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<DVector<f64>>, OdeStats)>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    assert!(outputs.windows(2).all(|w| w[0] <= w[1]), "output times must be sorted");
    let mut results = Vec::with_capacity(outputs.len());
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0.clone();
    let mut h = opts.h_max.min(1e-3);
    let mut k: Vec<DVector<f64>> = vec![DVector::zeros(y0.len()); 7];

    for &tout in outputs {
        if tout < t - 1e-14 {
            return Err(Error::InvalidParameter("output time before current time".into()));
        }
        while t < tout {
            if stats.steps + stats.rejected > opts.max_steps {
                return Err(Error::Stiffness { t, norm: y.norm() });
            }
            let mut step = h.min(tout - t);
            // single DP45 trial step, repeated until accepted
            loop {
                for i in 0..7 {
                    let mut yi = y.clone();
                    for (j, kj) in k.iter().enumerate().take(i) {
                        if A[i][j] != 0.0 {
                            yi += kj * (step * A[i][j]);
                        }
                    }
                    k[i] = f(t + C[i] * step, &yi);
                }
                let mut y5 = y.clone();
                let mut err = 0.0f64;
                {
                    let mut diff = DVector::<f64>::zeros(y.len());
                    for i in 0..7 {
                        if B5[i] != 0.0 {
                            y5 += &k[i] * (step * B5[i]);
                        }
                        let db = B5[i] - B4[i];
                        if db != 0.0 {
                            diff += &k[i] * (step * db);
                        }
                    }
                    for i in 0..y.len() {
                        let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
                        err = err.max((diff[i] / sc).abs());
                    }
                }
                if err <= 1.0 && err.is_finite() {
                    t += step;
                    y = y5;
                    stats.steps += 1;
                    stats.accumulated_error += err * opts.abs_tol;
                    if y.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Stiffness { t, norm: f64::INFINITY });
                    }
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = (step * grow).min(opts.h_max);
                    break;
                }
                stats.rejected += 1;
                step *= if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                if step < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Stiffness { t, norm: y.norm() });
                }
            }
        }
        results.push(y.clone());
    }
    Ok((results, stats))
}

/// Endpoint-only convenience wrapper.
pub fn integrate_to<F>(f: F, t0: f64, y0: &DVector<f64>, t1: f64, opts: &OdeOptions) -> Result<(DVector<f64>, OdeStats)>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let (mut v, stats) = integrate_path(f, t0, y0, &[t1], opts)?;
    Ok((v.pop().unwrap(), stats))
}
