//! Built-in experiment presets: the linear benchmark, the 1D gradient
//! (FPUT) system, the two nonlinear oscillator variants, and the
//! short-range tempered driver.

use super::config::{ExperimentConfig, ExperimentSection, NoiseConfig, OutputSection, SystemConfig};

fn stable_noise_1d(beta: f64) -> NoiseConfig {
    NoiseConfig {
        alpha: 1.8,
        spectral: "axes".into(),
        total_mass: Some(2.0),
        dim: Some(1),
        c0: 1.0,
        radial: "pure-stable".into(),
        tempering_mu: None,
        tail: "stable-continuation".into(),
        tail_rate: None,
        tail_r_min: None,
        tail_r_max: None,
        tail_exponent: None,
        beta,
    }
}

fn experiment(ladder: Vec<f64>, n: usize, seed: u64) -> ExperimentSection {
    ExperimentSection {
        eps_ladder: ladder,
        delta_grid: vec![0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0],
        rho_grid: (-6..=6).map(|k| k as f64 * 0.5).collect(),
        n_endpoints: n,
        dt_factor: 50.0,
        seed,
        mu_mode: "eps-zinf".into(),
        equilibrium_tol: 0.05,
        eta_list: vec![0.25, 0.4],
        tail_fit_window: (-4.0, -2.0),
    }
}

fn system_linear_1d(lambda: f64, x0: f64) -> SystemConfig {
    SystemConfig {
        kind: "linear".into(),
        x0: vec![x0],
        q: Some(vec![vec![lambda]]),
        a: None,
        b: None,
        eta_amp: None,
        eta_k: None,
        delta1: None,
        delta2: None,
        rotation: None,
        g_a: None,
        g_ripple_kappa: None,
        g_ripple_k: None,
        delta: lambda,
    }
}

fn system_fput_1d(b_coef: f64, x0: f64) -> SystemConfig {
    SystemConfig {
        kind: "fput".into(),
        x0: vec![x0],
        q: None,
        a: Some(vec![vec![1.0]]),
        b: Some(vec![vec![b_coef]]),
        eta_amp: None,
        eta_k: None,
        delta1: None,
        delta2: None,
        rotation: None,
        g_a: None,
        g_ripple_kappa: None,
        g_ripple_k: None,
        delta: 1.0,
    }
}

fn system_oscillator(d1: f64, d2: f64) -> SystemConfig {
    SystemConfig {
        kind: "oscillator".into(),
        x0: vec![1.0, 0.0],
        q: None,
        a: None,
        b: None,
        eta_amp: None,
        eta_k: None,
        delta1: Some(d1),
        delta2: Some(d2),
        rotation: Some(1.0),
        g_a: Some(0.0),
        g_ripple_kappa: None,
        g_ripple_k: None,
        delta: 2.0 * d1.min(d2),
    }
}

/// 1D stable Ornstein-Uhlenbeck benchmark: semi-analytic cross-checks
/// available at every step.
pub fn linear_1d() -> ExperimentConfig {
    ExperimentConfig {
        system: system_linear_1d(1.0, 2.0),
        noise: stable_noise_1d(0.5),
        experiment: experiment(
            vec![1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3],
            200_000,
            2026_0401,
        ),
        output: OutputSection::default(),
    }
}

/// 1D gradient system b(x) = x + (b_coef^2 x)^2 b_coef^2 x: profile cutoff
/// with a singleton omega-limit set.
pub fn fput_1d() -> ExperimentConfig {
    ExperimentConfig {
        system: system_fput_1d(2f64.sqrt(), 1.0),
        noise: stable_noise_1d(0.5),
        experiment: experiment(vec![1e-1, 10f64.powf(-1.5), 1e-2], 200_000, 2026_0402),
        output: OutputSection::default(),
    }
}

/// Planar oscillator with equal dampings: circular orbits, isotropic
/// driver, cutoff profile.
pub fn oscillator_profile() -> ExperimentConfig {
    ExperimentConfig {
        system: system_oscillator(1.0, 1.0),
        noise: NoiseConfig {
            spectral: "isotropic".into(),
            total_mass: Some(1.0),
            dim: Some(2),
            ..stable_noise_1d(0.5)
        },
        experiment: ExperimentSection {
            n_endpoints: 100_000,
            ..experiment(vec![10f64.powf(-1.5), 1e-2], 100_000, 2026_0403)
        },
        output: OutputSection::default(),
    }
}

/// Unequal dampings with a non-resonant rotation: window cutoff without a
/// profile.
pub fn oscillator_noprofile() -> ExperimentConfig {
    ExperimentConfig {
        system: system_oscillator(1.0, 1.5),
        noise: NoiseConfig {
            spectral: "isotropic".into(),
            total_mass: Some(1.0),
            dim: Some(2),
            ..stable_noise_1d(0.5)
        },
        experiment: ExperimentSection {
            n_endpoints: 100_000,
            ..experiment(vec![10f64.powf(-1.5), 1e-2], 100_000, 2026_0404)
        },
        output: OutputSection::default(),
    }
}

/// Moment-bound constants frozen from a one-off calibration run
/// (max over the ladder of (E|X_t|^gamma - e^{-delta gamma t}|x|^gamma)
/// / eps^gamma, times a 1.5 safety factor).
pub const MOMENT_C_LINEAR: f64 = 2.13;
pub const MOMENT_C_FPUT: f64 = 2.11;

/// Small-noise linear benchmark whose profile overlay reaches deep into
/// the stable tail on rho in [-4, -2]; used for the tail-exponent fit.
pub fn stable_tail_overlay() -> ExperimentConfig {
    let mut cfg = linear_1d();
    cfg.noise.c0 = 0.05;
    cfg.experiment.seed = 2026_0406;
    cfg
}

/// Tempered 1D driver for the short-range stable-limit diagnostic.
pub fn tempered_short_range() -> ExperimentConfig {
    ExperimentConfig {
        system: system_linear_1d(1.0, 1.0),
        noise: NoiseConfig {
            alpha: 0.8,
            radial: "tempered".into(),
            tempering_mu: Some(3.0),
            tail: "none".into(),
            beta: 1.0,
            ..stable_noise_1d(1.0)
        },
        experiment: experiment(vec![1e-1, 1e-2], 100_000, 2026_0405),
        output: OutputSection::default(),
    }
}
