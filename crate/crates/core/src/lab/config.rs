//! Experiment configuration: a single TOML file with nested tables for
//! the system, the noise and the experiment. Unknown keys are errors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{CosineEta, OscillatorG, VectorField, VectorFieldModel};
use crate::error::{Error, Result};
use crate::levy::{LevyMeasureSpec, RadialProfile, SpectralAtom, SpectralMeasure, TailSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub noise: NoiseConfig,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// linear | fput | oscillator
    pub kind: String,
    pub x0: Vec<f64>,
    /// linear: the full drift matrix Q (row-major rows)
    #[serde(default)]
    pub q: Option<Vec<Vec<f64>>>,
    /// fput: matrices A and B (row-major rows), optional cosine eta
    #[serde(default)]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub eta_amp: Option<f64>,
    #[serde(default)]
    pub eta_k: Option<f64>,
    /// oscillator parameters
    #[serde(default)]
    pub delta1: Option<f64>,
    #[serde(default)]
    pub delta2: Option<f64>,
    #[serde(default)]
    pub rotation: Option<f64>,
    #[serde(default)]
    pub g_a: Option<f64>,
    #[serde(default)]
    pub g_ripple_kappa: Option<f64>,
    #[serde(default)]
    pub g_ripple_k: Option<f64>,
    /// declared coercivity constant
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub alpha: f64,
    /// isotropic | axes
    pub spectral: String,
    /// isotropic: total mass of Lambda; axes: per-pair weights
    #[serde(default)]
    pub total_mass: Option<f64>,
    #[serde(default)]
    pub dim: Option<usize>,
    pub c0: f64,
    /// pure-stable | tempered | lamperti
    pub radial: String,
    #[serde(default)]
    pub tempering_mu: Option<f64>,
    /// stable-continuation | none | uniform-shell | pareto
    pub tail: String,
    #[serde(default)]
    pub tail_rate: Option<f64>,
    #[serde(default)]
    pub tail_r_min: Option<f64>,
    #[serde(default)]
    pub tail_r_max: Option<f64>,
    #[serde(default)]
    pub tail_exponent: Option<f64>,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// strictly decreasing ladder in (0, 1/e)
    pub eps_ladder: Vec<f64>,
    #[serde(default = "default_delta_grid")]
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_rho_grid")]
    pub rho_grid: Vec<f64>,
    #[serde(default = "default_n")]
    pub n_endpoints: usize,
    /// dt = w_eps / dt_factor
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    pub seed: u64,
    /// longrun | eps-zinf | both
    #[serde(default = "default_mu_mode")]
    pub mu_mode: String,
    #[serde(default = "default_equilibrium_tol")]
    pub equilibrium_tol: f64,
    #[serde(default = "default_eta_list")]
    pub eta_list: Vec<f64>,
    /// window for the profile tail fit
    #[serde(default = "default_tail_window")]
    pub tail_fit_window: (f64, f64),
}

fn default_delta_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0]
}

fn default_rho_grid() -> Vec<f64> {
    (-6..=6).map(|k| k as f64 * 0.5).collect()
}

fn default_n() -> usize {
    200_000
}

fn default_dt_factor() -> f64 {
    50.0
}

fn default_mu_mode() -> String {
    "eps-zinf".into()
}

fn default_equilibrium_tol() -> f64 {
    0.05
}

fn default_eta_list() -> Vec<f64> {
    vec![0.25, 0.4]
}

fn default_tail_window() -> (f64, f64) {
    (-4.0, -2.0)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization")
    }

    pub fn validate(&self) -> Result<()> {
        let ladder = &self.experiment.eps_ladder;
        if ladder.is_empty() {
            return Err(Error::Config("eps ladder must be nonempty".into()));
        }
        let e_inv = (-1.0f64).exp();
        for w in ladder.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Config("eps ladder must be strictly decreasing".into()));
            }
        }
        if ladder.iter().any(|&e| e <= 0.0 || e >= e_inv) {
            return Err(Error::Config("eps ladder must lie in (0, 1/e)".into()));
        }
        let dg = &self.experiment.delta_grid;
        if dg.iter().any(|&d| d <= 0.0) || !dg.iter().any(|&d| d < 1.0) || !dg.iter().any(|&d| d > 1.0) {
            return Err(Error::Config("delta grid must be positive with values below and above 1".into()));
        }
        if self.experiment.n_endpoints < 1000 {
            return Err(Error::Config("n_endpoints too small".into()));
        }
        match self.experiment.mu_mode.as_str() {
            "longrun" | "eps-zinf" | "both" => {}
            other => return Err(Error::Config(format!("unknown mu mode '{other}'"))),
        }
        self.vector_field()?;
        self.levy_spec()?.validate()?;
        Ok(())
    }

    pub fn vector_field(&self) -> Result<VectorFieldModel> {
        let s = &self.system;
        let mat = |rows: &Option<Vec<Vec<f64>>>, name: &str| -> Result<DMatrix<f64>> {
            let rows = rows
                .as_ref()
                .ok_or_else(|| Error::Config(format!("system.{name} required for kind '{}'", s.kind)))?;
            let r = rows.len();
            let c = rows.first().map(|x| x.len()).unwrap_or(0);
            if r == 0 || rows.iter().any(|row| row.len() != c) {
                return Err(Error::Config(format!("system.{name} must be a rectangular matrix")));
            }
            Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
        };
        let field = match s.kind.as_str() {
            "linear" => VectorField::Linear { q: mat(&s.q, "q")? },
            "fput" => {
                let eta = match (s.eta_amp, s.eta_k) {
                    (Some(amp), Some(k)) => Some(CosineEta { amp, k }),
                    (None, None) => None,
                    _ => return Err(Error::Config("eta_amp and eta_k must come together".into())),
                };
                VectorField::Fput { a: mat(&s.a, "a")?, b: mat(&s.b, "b")?, eta }
            }
            "oscillator" => {
                let d1 = s.delta1.ok_or_else(|| Error::Config("oscillator needs delta1".into()))?;
                let d2 = s.delta2.ok_or_else(|| Error::Config("oscillator needs delta2".into()))?;
                let eta = s.rotation.ok_or_else(|| Error::Config("oscillator needs rotation".into()))?;
                let ripple = match (s.g_ripple_kappa, s.g_ripple_k) {
                    (Some(kappa), Some(k)) => Some((kappa, k)),
                    (None, None) => None,
                    _ => return Err(Error::Config("ripple kappa and k must come together".into())),
                };
                VectorField::Oscillator {
                    delta1: d1,
                    delta2: d2,
                    eta,
                    g: OscillatorG { a: s.g_a.unwrap_or(0.0), ripple },
                }
            }
            other => return Err(Error::Config(format!("unknown system kind '{other}'"))),
        };
        let vf = VectorFieldModel::new(field, s.delta)?;
        if vf.dim() != s.x0.len() {
            return Err(Error::Config("x0 dimension does not match the system".into()));
        }
        Ok(vf)
    }

    pub fn x0(&self) -> DVector<f64> {
        DVector::from_vec(self.system.x0.clone())
    }

    pub fn levy_spec(&self) -> Result<LevyMeasureSpec> {
        let n = &self.noise;
        let dim = n.dim.unwrap_or(self.system.x0.len());
        let spectral = match n.spectral.as_str() {
            "isotropic" => SpectralMeasure::Isotropic {
                dim,
                total_mass: n.total_mass.unwrap_or(1.0),
                c0: n.c0,
            },
            "axes" => {
                let w = n.total_mass.unwrap_or(2.0 * dim as f64) / (2.0 * dim as f64);
                let mut atoms = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    let mut e = DVector::<f64>::zeros(dim);
                    e[i] = 1.0;
                    atoms.push(SpectralAtom { direction: e.clone(), weight: w, c0: n.c0 });
                    atoms.push(SpectralAtom { direction: -e, weight: w, c0: n.c0 });
                }
                SpectralMeasure::Atoms(atoms)
            }
            other => return Err(Error::Config(format!("unknown spectral kind '{other}'"))),
        };
        let radial = match n.radial.as_str() {
            "pure-stable" => RadialProfile::PureStable,
            "tempered" => RadialProfile::Tempered {
                mu: n.tempering_mu.ok_or_else(|| Error::Config("tempered radial needs tempering_mu".into()))?,
            },
            "lamperti" => RadialProfile::Lamperti,
            other => return Err(Error::Config(format!("unknown radial profile '{other}'"))),
        };
        let tail = match n.tail.as_str() {
            "none" => TailSpec::None,
            "stable-continuation" => TailSpec::StableContinuation,
            "uniform-shell" => TailSpec::UniformShell {
                rate: n.tail_rate.ok_or_else(|| Error::Config("shell tail needs tail_rate".into()))?,
                r_min: n.tail_r_min.unwrap_or(1.0),
                r_max: n.tail_r_max.ok_or_else(|| Error::Config("shell tail needs tail_r_max".into()))?,
            },
            "pareto" => TailSpec::Pareto {
                rate: n.tail_rate.ok_or_else(|| Error::Config("pareto tail needs tail_rate".into()))?,
                exponent: n
                    .tail_exponent
                    .ok_or_else(|| Error::Config("pareto tail needs tail_exponent".into()))?,
            },
            other => return Err(Error::Config(format!("unknown tail kind '{other}'"))),
        };
        Ok(LevyMeasureSpec {
            alpha: n.alpha,
            spectral,
            radial,
            tail,
            beta: n.beta,
            symmetric_small_jumps: true,
        })
    }

    /// FNV-1a hash of the canonical JSON serialization, for provenance.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config json");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{h:016x}")
    }
}
