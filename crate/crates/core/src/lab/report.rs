//! Machine-readable experiment reports: report.json plus flat CSVs with
//! fixed column sets (UTF-8, LF, '.' decimal separator). Every numeric
//! cell carries its uncertainty and every pass/fail flag derives from the
//! recorded numbers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{GrowthVerdict, ProfileVerdict};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub eps: f64,
    pub t_eps: f64,
    pub w_eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvCurveRow {
    pub eps: f64,
    pub delta: f64,
    pub t: f64,
    pub tv: f64,
    pub ci: f64,
    pub method: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRow {
    pub eps: f64,
    pub rho: f64,
    pub g_hat: f64,
    pub ci: f64,
    /// semi-analytic overlay; NaN when no closed route exists
    pub g_theory: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingRow {
    pub eps: f64,
    pub eta: f64,
    pub tmix: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumRow {
    pub eps: f64,
    /// TV between the long-run law of X and eps Z_inf
    pub tv: f64,
    pub ci: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditSection {
    pub coercivity_min_jacobian: f64,
    pub coercivity_min_secant: f64,
    pub coercivity_pass: bool,
    pub equator_essinf_c0: f64,
    pub equator_rank: usize,
    pub equator_min_directional_mass: f64,
    pub equator_pass: bool,
    pub tail_moment_value: f64,
    pub tail_moment_pass: bool,
    pub orey_masuda_pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSection {
    pub lambda: f64,
    pub ell: usize,
    pub omegas: Vec<f64>,
    pub growth_verdict: GrowthVerdict,
    pub profile_verdict: ProfileVerdict,
    /// (max - min)/max of |v| over the omega-set representation
    pub omega_norm_spread: f64,
    pub zinf_rotationally_invariant: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFitReport {
    pub alpha_hat: f64,
    pub curvature: f64,
    pub doubly_exponential: bool,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CutoffReport {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// wall-clock stamp; the only field allowed to differ between
    /// identical runs
    pub timestamp: String,
    pub schedule: Vec<ScheduleRow>,
    pub audit: Option<AuditSection>,
    pub spectral: Option<SpectralSection>,
    pub tv_curve: Vec<TvCurveRow>,
    pub profile: Vec<ProfileRow>,
    pub mixing: Vec<MixingRow>,
    pub equilibrium: Vec<EquilibriumRow>,
    pub tail_fit: Option<TailFitReport>,
    pub flags: BTreeMap<String, bool>,
}

impl CutoffReport {
    pub fn all_flags_pass(&self) -> bool {
        self.flags.values().all(|&v| v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report json")
    }

    pub fn tv_curve_csv(&self) -> String {
        let mut s = String::from("eps,delta,t,tv,ci,method\n");
        for r in &self.tv_curve {
            s.push_str(&format!("{},{},{},{},{},{}\n", r.eps, r.delta, r.t, r.tv, r.ci, r.method));
        }
        s
    }

    pub fn profile_csv(&self) -> String {
        let mut s = String::from("eps,rho,g_hat,ci,g_theory\n");
        for r in &self.profile {
            let th = if r.g_theory.is_nan() { String::new() } else { format!("{}", r.g_theory) };
            s.push_str(&format!("{},{},{},{},{}\n", r.eps, r.rho, r.g_hat, r.ci, th));
        }
        s
    }

    pub fn mixing_csv(&self) -> String {
        let mut s = String::from("eps,eta,tmix,censored\n");
        for r in &self.mixing {
            let t = if r.censored { String::new() } else { format!("{}", r.tmix) };
            s.push_str(&format!("{},{},{},{}\n", r.eps, r.eta, t, r.censored));
        }
        s
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("report.json"))?;
        f.write_all(self.to_json().as_bytes())?;
        std::fs::write(dir.join("tv_curve.csv"), self.tv_curve_csv())?;
        std::fs::write(dir.join("profile.csv"), self.profile_csv())?;
        std::fs::write(dir.join("mixing.csv"), self.mixing_csv())?;
        Ok(())
    }
}
