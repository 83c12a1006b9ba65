//! Property tests of the spec-level invariants: characteristic-exponent
//! structure over randomized measures, estimator bounds and symmetries,
//! schedule monotonicity, and the cone bound on random directions.

use cutoff_lab::distance::{self, HistOpts, Lattice1D};
use cutoff_lab::levy::{self, LevyMeasureSpec, RadialProfile, SpectralAtom, SpectralMeasure, TailSpec};
use cutoff_lab::quad::QuadParams;
use cutoff_lab::rng::{normal, RngStream};
use cutoff_lab::spectral::{self, HGData, HGMode, Provenance};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn sym_spec(alpha: f64, c0: f64, mu: Option<f64>, tail: TailSpec, beta: f64) -> LevyMeasureSpec {
    LevyMeasureSpec {
        alpha,
        spectral: SpectralMeasure::Atoms(vec![
            SpectralAtom { direction: DVector::from_vec(vec![1.0]), weight: 1.0, c0 },
            SpectralAtom { direction: DVector::from_vec(vec![-1.0]), weight: 1.0, c0 },
        ]),
        radial: match mu {
            Some(m) => RadialProfile::Tempered { mu: m },
            None => RadialProfile::PureStable,
        },
        tail,
        beta,
        symmetric_small_jumps: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// psi(0) = 0, Re psi <= 0, psi(-u) = conj(psi(u)), and vanishing
    /// imaginary part for symmetric specs.
    #[test]
    fn char_exponent_structure(
        alpha in 0.3f64..1.9,
        c0 in 0.2f64..2.0,
        mu in 0.0f64..2.0,
        u in 0.05f64..8.0,
        shell in proptest::bool::ANY,
    ) {
        let tail = if shell {
            TailSpec::UniformShell { rate: 0.8, r_min: 1.0, r_max: 2.5 }
        } else {
            TailSpec::None
        };
        let spec = sym_spec(alpha, c0, (mu > 0.05).then_some(mu), tail, 1.0);
        let qp = QuadParams::default();
        let z = levy::char_exponent(&spec, &DVector::from_vec(vec![0.0]), &qp).unwrap();
        prop_assert_eq!(z, Complex64::new(0.0, 0.0));
        let p = levy::char_exponent(&spec, &DVector::from_vec(vec![u]), &qp).unwrap();
        let m = levy::char_exponent(&spec, &DVector::from_vec(vec![-u]), &qp).unwrap();
        prop_assert!(p.re <= 1e-10);
        prop_assert!((p.re - m.re).abs() <= 1e-7 * (1.0 + p.re.abs()));
        prop_assert!((p.im + m.im).abs() <= 1e-7 * (1.0 + p.im.abs()));
        prop_assert!(p.im.abs() <= 1e-7 * (1.0 + p.norm()));
    }

    /// Isotropic pure-stable scaling |psi(cu)| = c^alpha |psi(u)| to 1e-6
    /// relative for c in {2, 5, 10}.
    #[test]
    fn isotropic_stable_scaling(alpha in 0.4f64..1.95, unorm in 0.1f64..3.0) {
        let spec = LevyMeasureSpec {
            alpha,
            spectral: SpectralMeasure::Isotropic { dim: 2, total_mass: 1.5, c0: 0.8 },
            radial: RadialProfile::PureStable,
            tail: TailSpec::StableContinuation,
            beta: 0.5 * alpha.min(1.0),
            symmetric_small_jumps: true,
        };
        let qp = QuadParams::default();
        let u = DVector::from_vec(vec![unorm, 0.3 * unorm]);
        let base = levy::char_exponent(&spec, &u, &qp).unwrap().norm();
        for c in [2.0f64, 5.0, 10.0] {
            let s = levy::char_exponent(&spec, &(&u * c), &qp).unwrap().norm();
            prop_assert!((s / base - c.powf(alpha)).abs() <= 1e-6 * c.powf(alpha));
        }
    }

    /// Cutoff schedule: monotone in 1/eps, window fixed at 1/lambda.
    #[test]
    fn schedule_monotone(lambda in 0.2f64..4.0, ell in 1usize..4, e1 in 0.01f64..0.2, factor in 1.1f64..20.0) {
        let hg = HGData {
            lambda,
            ell,
            tau: 0.0,
            modes: vec![HGMode { omega: 0.0, v: DVector::from_vec(vec![Complex64::new(1.0, 0.0)]) }],
            provenance: Provenance::ExactLinear,
            fit_residual: 0.0,
        };
        let s1 = spectral::cutoff_schedule(&hg, e1).unwrap();
        let s2 = spectral::cutoff_schedule(&hg, e1 / factor).unwrap();
        prop_assert!(s2.t_eps > s1.t_eps);
        prop_assert!((s1.w_eps - 1.0 / lambda).abs() < 1e-14);
    }

    /// Slutsky distances stay in [0, 1]; the discrete sum always sits at 1.
    #[test]
    fn slutsky_bounds(n in 2usize..2000, a_exp in -3.0f64..0.5) {
        let a_n = (n as f64).powf(a_exp);
        let r = distance::slutsky_demo(n, a_n).unwrap();
        prop_assert!(r.tv_xn_vs_u >= 0.0 && r.tv_xn_vs_u <= 1.0 + 1e-12);
        prop_assert_eq!(r.tv_sum_vs_u, 1.0);
    }
}

/// tv_hist is symmetric in its arguments and bounded in [0, 1].
#[test]
fn tv_hist_symmetry_and_bounds() {
    let mut rng = RngStream::new(400).rng();
    let a: Vec<DVector<f64>> = (0..8000).map(|_| DVector::from_vec(vec![normal(&mut rng)])).collect();
    let b: Vec<DVector<f64>> = (0..8000).map(|_| DVector::from_vec(vec![0.7 + normal(&mut rng)])).collect();
    let opts = HistOpts::default();
    let ab = distance::tv_hist(&a, &b, &opts).unwrap();
    let ba = distance::tv_hist(&b, &a, &opts).unwrap();
    assert!((ab.value - ba.value).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&ab.value));
}

/// Triangle inequality on estimates with CI slack.
#[test]
fn tv_hist_triangle_inequality() {
    let mut rng = RngStream::new(401).rng();
    let mk = |shift: f64, rng: &mut rand_chacha::ChaCha12Rng| -> Vec<DVector<f64>> {
        (0..20_000).map(|_| DVector::from_vec(vec![shift + normal(rng)])).collect()
    };
    let a = mk(0.0, &mut rng);
    let b = mk(0.6, &mut rng);
    let c = mk(1.4, &mut rng);
    let opts = HistOpts::default();
    let ab = distance::tv_hist(&a, &b, &opts).unwrap();
    let bc = distance::tv_hist(&b, &c, &opts).unwrap();
    let ac = distance::tv_hist(&a, &c, &opts).unwrap();
    assert!(
        ac.value <= ab.value + bc.value + 3.0 * (ab.ci + bc.ci + ac.ci),
        "ac {} ab {} bc {}",
        ac.value,
        ab.value,
        bc.value
    );
}

/// Common orthogonal maps leave the estimate within the CI (2D rotation).
#[test]
fn tv_hist_orthogonal_invariance() {
    let mut rng = RngStream::new(402).rng();
    let mk = |shift: f64, rng: &mut rand_chacha::ChaCha12Rng| -> Vec<DVector<f64>> {
        (0..30_000)
            .map(|_| DVector::from_vec(vec![shift + normal(rng), normal(rng)]))
            .collect()
    };
    let a = mk(0.0, &mut rng);
    let b = mk(1.0, &mut rng);
    let opts = HistOpts::default();
    let base = distance::tv_hist(&a, &b, &opts).unwrap();
    let th = 0.83f64;
    let rot = |v: &DVector<f64>| {
        DVector::from_vec(vec![th.cos() * v[0] - th.sin() * v[1], th.sin() * v[0] + th.cos() * v[1]])
    };
    let ar: Vec<_> = a.iter().map(&rot).collect();
    let br: Vec<_> = b.iter().map(&rot).collect();
    let rotated = distance::tv_hist(&ar, &br, &opts).unwrap();
    assert!(
        (base.value - rotated.value).abs() <= base.ci + rotated.ci + 0.01,
        "base {} rotated {}",
        base.value,
        rotated.value
    );
}

/// Convolution with an independent component contracts the Fourier-route
/// distance (the cancellation property of independent shifts).
#[test]
fn fourier_convolution_contracts() {
    let grid = Lattice1D { du: 0.05, n: 4096 };
    let pts = grid.points();
    let gauss = |u: f64, m: f64, s2: f64| Complex64::from_polar((-0.5 * s2 * u * u).exp(), m * u);
    let ca: Vec<Complex64> = pts.iter().map(|&u| gauss(u, 0.0, 1.0)).collect();
    let cb: Vec<Complex64> = pts.iter().map(|&u| gauss(u, 1.0, 1.0)).collect();
    let base = distance::tv_fourier_ou(&ca, &cb, &grid).unwrap();
    for s2w in [0.5, 2.0] {
        let caw: Vec<Complex64> = pts.iter().map(|&u| gauss(u, 0.0, 1.0 + s2w)).collect();
        let cbw: Vec<Complex64> = pts.iter().map(|&u| gauss(u, 1.0, 1.0 + s2w)).collect();
        let conv = distance::tv_fourier_ou(&caw, &cbw, &grid).unwrap();
        assert!(conv.value <= base.value + base.ci + conv.ci, "{} vs {}", conv.value, base.value);
    }
}

/// Cone bound holds on 100 random directions at |v| = 10 C_angle for
/// specs passing the equator audit.
#[test]
fn orey_masuda_random_directions() {
    let qp = QuadParams::default();
    let specs = [
        LevyMeasureSpec {
            alpha: 1.5,
            spectral: SpectralMeasure::Isotropic { dim: 2, total_mass: 1.0, c0: 1.0 },
            radial: RadialProfile::PureStable,
            tail: TailSpec::None,
            beta: 1.0,
            symmetric_small_jumps: true,
        },
        sym_spec(1.2, 0.7, Some(0.8), TailSpec::UniformShell { rate: 0.5, r_min: 1.0, r_max: 2.0 }, 1.0),
    ];
    for spec in &specs {
        assert!(levy::equator_report(spec).unwrap().pass);
        let d = spec.dim();
        let mut rng = RngStream::new(403).rng();
        for _ in 0..100 {
            let mut v = DVector::<f64>::zeros(d);
            for i in 0..d {
                v[i] = normal(&mut rng);
            }
            if v.norm() == 0.0 {
                continue;
            }
            let probe = levy::orey_masuda_bound(spec, &v, &qp).unwrap();
            let v10 = &v * (10.0 * probe.threshold / v.norm());
            let b = levy::orey_masuda_bound(spec, &v10, &qp).unwrap();
            assert!(b.passed(), "spec {:?} v {:?}: {:?}", spec.alpha, v10, b);
        }
    }
}
