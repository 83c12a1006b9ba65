//! Coercive vector-field models, the deterministic flow, and the
//! inhomogeneous fundamental matrix with its decay bounds as runtime
//! invariants.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, OdeStats};
use crate::rng::{normal, uniform_open01, RngStream};

/// Bounded perturbation of the FPUT potential: eta(x) = (amp/k^2) cos(k x1).
/// Its Hessian is -amp cos(k x1) e1 e1^T >= -amp, so amp plays the role of
/// the allowed curvature deficit.
#[derive(Debug, Clone, Copy)]
pub struct CosineEta {
    pub amp: f64,
    pub k: f64,
}

/// Oscillator Hamiltonian perturbation G(x) = (a/2)|x|^2 + ripple, with
/// ripple (kappa/k^2) sin^3(k x1): vanishing value, gradient and Hessian
/// at the origin, second derivative dipping to a - 3 kappa.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorG {
    pub a: f64,
    pub ripple: Option<(f64, f64)>, // (kappa, k)
}

#[derive(Clone)]
pub enum VectorField {
    /// b(x) = Q x.
    Linear { q: DMatrix<f64> },
    /// b(x) = A^T A x + <Bx,Bx> B^T B x + grad eta(x).
    Fput { a: DMatrix<f64>, b: DMatrix<f64>, eta: Option<CosineEta> },
    /// The planar rotation-plus-gradient field with Hamiltonian
    /// H = d1 x1^2 + d2 x2^2 + G.
    Oscillator { delta1: f64, delta2: f64, eta: f64, g: OscillatorG },
    Custom {
        dim: usize,
        b: Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>,
        db: Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>,
    },
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Linear { .. } => write!(f, "Linear"),
            VectorField::Fput { .. } => write!(f, "Fput"),
            VectorField::Oscillator { delta1, delta2, eta, .. } => {
                write!(f, "Oscillator(d1={delta1}, d2={delta2}, eta={eta})")
            }
            VectorField::Custom { dim, .. } => write!(f, "Custom(d={dim})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VectorFieldModel {
    pub field: VectorField,
    /// Declared coercivity constant.
    pub delta: f64,
}

impl VectorFieldModel {
    pub fn new(field: VectorField, delta: f64) -> Result<Self> {
        let model = VectorFieldModel { field, delta };
        let zero = DVector::zeros(model.dim());
        if model.b(&zero).norm() > 1e-12 {
            return Err(Error::InvalidSpec("b(0) must vanish".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidSpec("coercivity constant must be positive".into()));
        }
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        match &self.field {
            VectorField::Linear { q } => q.nrows(),
            VectorField::Fput { a, .. } => a.nrows(),
            VectorField::Oscillator { .. } => 2,
            VectorField::Custom { dim, .. } => *dim,
        }
    }

    pub fn b(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.field {
            VectorField::Linear { q } => q * x,
            VectorField::Fput { a, b, eta } => {
                let mut v = a.transpose() * (a * x);
                let bx = b * x;
                v += b.transpose() * &bx * bx.dot(&bx);
                if let Some(e) = eta {
                    v[0] += -(e.amp / e.k) * (e.k * x[0]).sin();
                }
                v
            }
            VectorField::Oscillator { delta1, delta2, eta, g } => {
                let (x1, x2) = (x[0], x[1]);
                let mut d1h = 2.0 * delta1 * x1 + g.a * x1;
                let d2h = 2.0 * delta2 * x2 + g.a * x2;
                if let Some((kappa, k)) = g.ripple {
                    let s = (k * x1).sin();
                    let c = (k * x1).cos();
                    d1h += (3.0 * kappa / k) * s * s * c;
                }
                DVector::from_vec(vec![eta * x2 + d1h, -eta * x1 + d2h])
            }
            VectorField::Custom { b, .. } => b(x),
        }
    }

    /// Exact Jacobian of b. For the FPUT field the derivative of the cubic
    /// term is 2 (B^T B x)(B^T B x)^T + |Bx|^2 B^T B, which collapses to
    /// the familiar 3 (Bx)^2 B^2 form in one dimension.
    pub fn db(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.field {
            VectorField::Linear { q } => q.clone(),
            VectorField::Fput { a, b, eta } => {
                let mut m = a.transpose() * a;
                let bx = b * x;
                let btbx = b.transpose() * &bx;
                m += 2.0 * &btbx * btbx.transpose();
                m += bx.dot(&bx) * b.transpose() * b;
                if let Some(e) = eta {
                    m[(0, 0)] += -e.amp * (e.k * x[0]).cos();
                }
                m
            }
            VectorField::Oscillator { delta1, delta2, eta, g } => {
                let mut g11 = g.a;
                let g22 = g.a;
                let g12 = 0.0;
                if let Some((kappa, k)) = g.ripple {
                    let s = (k * x[0]).sin();
                    let c = (k * x[0]).cos();
                    g11 += 3.0 * kappa * (2.0 * s * c * c - s * s * s);
                }
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[2.0 * delta1 + g11, eta + g12, -eta + g12, 2.0 * delta2 + g22],
                )
            }
            VectorField::Custom { db, .. } => db(x),
        }
    }

    /// Linearization at the fixed point.
    pub fn jacobian_at_zero(&self) -> DMatrix<f64> {
        self.db(&DVector::zeros(self.dim()))
    }

    /// True when b is a linear map, so the flow equals e^{-Jt} x exactly
    /// (quadratic Hamiltonian perturbations keep the oscillator linear).
    pub fn is_linear(&self) -> bool {
        match &self.field {
            VectorField::Linear { .. } => true,
            VectorField::Oscillator { g, .. } => g.ripple.is_none(),
            VectorField::Fput { b, eta, .. } => b.norm() == 0.0 && eta.is_none(),
            VectorField::Custom { .. } => false,
        }
    }

    /// Sampled sup of |Db| over the ball |u| <= r, with a safety factor;
    /// the paper's C(|x|) constant, statistically estimated.
    pub fn db_sup_bound(&self, r: f64) -> f64 {
        let d = self.dim();
        let mut rng = RngStream::new(0xdb_5).rng();
        let mut best = self.jacobian_at_zero().norm(); // Frobenius dominates the 2-norm
        for _ in 0..512 {
            let mut v = DVector::<f64>::zeros(d);
            for i in 0..d {
                v[i] = normal(&mut rng);
            }
            let n = v.norm();
            if n == 0.0 {
                continue;
            }
            let radius = r * uniform_open01(&mut rng).powf(1.0 / d as f64);
            let u = v * (radius / n);
            best = best.max(self.db(&u).norm());
        }
        1.1 * best
    }
}

// ---------------------------------------------------------------------------
// Coercivity audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct CoercivityReport {
    /// min over samples of <Db(x) y, y> for |y| = 1
    pub min_jacobian_form: f64,
    /// min over pairs of <b(x)-b(x'), x-x'>/|x-x'|^2
    pub min_secant_form: f64,
    pub pass: bool,
}

/// Monte Carlo audit of the coercivity hypothesis on the ball |x| <= r.
/// Failure is a report, not an error.
pub fn coercivity_audit(vf: &VectorFieldModel, r: f64, n: usize, stream: RngStream) -> CoercivityReport {
    let d = vf.dim();
    let mut rng = stream.rng();
    let ball = |rng: &mut rand_chacha::ChaCha12Rng, radius: f64| -> DVector<f64> {
        let mut v = DVector::<f64>::zeros(d);
        for i in 0..d {
            v[i] = normal(rng);
        }
        let nr = v.norm();
        if nr == 0.0 {
            return v;
        }
        v * (radius * uniform_open01(rng).powf(1.0 / d as f64) / nr)
    };
    let mut min_jac = f64::INFINITY;
    let mut min_sec = f64::INFINITY;
    for _ in 0..n {
        let x = ball(&mut rng, r);
        let mut y = ball(&mut rng, 1.0);
        let ny = y.norm();
        if ny == 0.0 {
            continue;
        }
        y /= ny;
        min_jac = min_jac.min((vf.db(&x) * &y).dot(&y));
        let x2 = ball(&mut rng, r);
        let dx = &x - &x2;
        let nd = dx.norm_squared();
        if nd > 1e-20 {
            min_sec = min_sec.min((vf.b(&x) - vf.b(&x2)).dot(&dx) / nd);
        }
    }
    let tol = 1e-9;
    CoercivityReport {
        min_jacobian_form: min_jac,
        min_secant_form: min_sec,
        pass: min_jac >= vf.delta * (1.0 - tol) - tol && min_sec >= vf.delta * (1.0 - tol) - tol,
    }
}

// ---------------------------------------------------------------------------
// Flow
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub x: DVector<f64>,
    pub t: f64,
    pub endpoint: DVector<f64>,
    pub stats: OdeStats,
}

pub fn default_flow_opts() -> OdeOptions {
    OdeOptions { abs_tol: 1e-10, rel_tol: 1e-8, h_max: 0.25, max_steps: 5_000_000 }
}

/// phi^x_t: adaptive solution of d phi/dt = -b(phi), with the exponential
/// decay invariant asserted post hoc.
pub fn flow(vf: &VectorFieldModel, x: &DVector<f64>, t: f64, opts: &OdeOptions) -> Result<FlowResult> {
    if t < 0.0 {
        return Err(Error::InvalidParameter("flow horizon must be nonnegative".into()));
    }
    if t == 0.0 {
        return Ok(FlowResult { x: x.clone(), t, endpoint: x.clone(), stats: OdeStats::default() });
    }
    let (endpoint, stats) = ode::integrate_to(|_, y| -vf.b(y), 0.0, x, t, opts)?;
    let bound = (-vf.delta * t).exp() * x.norm() * (1.0 + 10.0 * opts.rel_tol) + 10.0 * opts.abs_tol;
    if endpoint.norm() > bound {
        return Err(Error::Degenerate(format!(
            "flow decay invariant violated: |phi| = {} > {}",
            endpoint.norm(),
            bound
        )));
    }
    Ok(FlowResult { x: x.clone(), t, endpoint, stats })
}

/// Flow sampled on a sorted time grid in one integration pass.
pub fn flow_path(vf: &VectorFieldModel, x: &DVector<f64>, grid: &[f64], opts: &OdeOptions) -> Result<Vec<DVector<f64>>> {
    let (ys, _) = ode::integrate_path(|_, y| -vf.b(y), 0.0, x, grid, opts)?;
    Ok(ys)
}

// ---------------------------------------------------------------------------
// Fundamental matrices
// ---------------------------------------------------------------------------

/// Solutions Phi_t of d Phi/dt = Phi Db(phi^x_{T+t}), Phi_0 = I, along a
/// time grid, with the inverse obtained from the adjoint equation
/// d Phi^{-1}/dt = -Db(phi^x_{T+t}) Phi^{-1} rather than by inversion.
#[derive(Debug, Clone)]
pub struct FundamentalPath {
    pub offset: f64,
    pub times: Vec<f64>,
    pub phi: Vec<DMatrix<f64>>,
    pub phi_inv: Vec<DMatrix<f64>>,
    /// set when some ||Phi|| ||Phi^-1|| exceeded 1e8
    pub conditioning_warning: bool,
    /// flow point phi^x_T at the offset
    pub base_point: DVector<f64>,
}

pub fn fundamental_matrix(
    vf: &VectorFieldModel,
    x: &DVector<f64>,
    offset: f64,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<FundamentalPath> {
    if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be increasing and nonnegative".into()));
    }
    let d = vf.dim();
    let base = if offset > 0.0 {
        flow(vf, x, offset, opts)?.endpoint
    } else {
        x.clone()
    };
    // joint state: [w (d) | Phi (d^2, row-major) | PhiInv (d^2)]
    let mut y0 = DVector::<f64>::zeros(d + 2 * d * d);
    for i in 0..d {
        y0[i] = base[i];
    }
    for i in 0..d {
        y0[d + i * d + i] = 1.0;
        y0[d + d * d + i * d + i] = 1.0;
    }
    let rhs = |_: f64, y: &DVector<f64>| -> DVector<f64> {
        let w = DVector::from_iterator(d, (0..d).map(|i| y[i]));
        let j = vf.db(&w);
        let mut out = DVector::<f64>::zeros(d + 2 * d * d);
        let bw = vf.b(&w);
        for i in 0..d {
            out[i] = -bw[i];
        }
        // dPhi = Phi J ; dPhiInv = -J PhiInv
        for r in 0..d {
            for c in 0..d {
                let mut acc = 0.0;
                let mut acc_inv = 0.0;
                for k in 0..d {
                    acc += y[d + r * d + k] * j[(k, c)];
                    acc_inv -= j[(r, k)] * y[d + d * d + k * d + c];
                }
                out[d + r * d + c] = acc;
                out[d + d * d + r * d + c] = acc_inv;
            }
        }
        out
    };
    let grid_full: Vec<f64> = grid.to_vec();
    let (states, _) = ode::integrate_path(rhs, 0.0, &y0, &grid_full, opts)?;
    let mut phi = Vec::with_capacity(grid.len());
    let mut phi_inv = Vec::with_capacity(grid.len());
    let mut warn = false;
    for s in &states {
        let m = DMatrix::from_fn(d, d, |r, c| s[d + r * d + c]);
        let mi = DMatrix::from_fn(d, d, |r, c| s[d + d * d + r * d + c]);
        if m.norm() * mi.norm() > 1e8 {
            warn = true;
        }
        phi.push(m);
        phi_inv.push(mi);
    }
    Ok(FundamentalPath {
        offset,
        times: grid_full,
        phi,
        phi_inv,
        conditioning_warning: warn,
        base_point: base,
    })
}

/// Spectral (2-) norm via SVD.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values[0]
}

/// Matrix-flow decay bounds evaluated on an index pair (s <= t):
/// returns (|Phi_t^{-1} Phi_s|, |Phi_s^{-1} Phi_t|).
pub fn transition_norms(path: &FundamentalPath, i: usize, j: usize) -> (f64, f64) {
    assert!(i <= j);
    let contracting = &path.phi_inv[j] * &path.phi[i];
    let expanding = &path.phi_inv[i] * &path.phi[j];
    (spectral_norm(&contracting), spectral_norm(&expanding))
}
