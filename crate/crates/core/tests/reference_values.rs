//! Values frozen from an independent reference implementation, and
//! cross-module consistency checks.

use decosim::analysis::{self, FitOptions, IsingRecipe};
use decosim::bose_hubbard::{self, BoseHubbardParams};
use decosim::decoherence::{self, TimeGrid};
use decosim::oracle;
use decosim::spectrum::{build_echo_spectrum, build_spectrum, IsingParams, MomentumConvention};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
#[allow(clippy::approx_constant)]
fn echo_spectrum_n8() {
    // (φ, ε⁺, ε⁻, α⁺, α⁻) for λ₀ = 0.2, λ₁ = 5
    let expected = [
        (
            0.39269908169872414,
            20.060544781342532,
            -3.6843646773563137,
            -1.0699377343538883,
            1.4917361570639973,
        ),
        (
            1.1780972450961724,
            20.340468014214245,
            -1.5051116113854004,
            -0.18146717615650532,
            1.3870637636293939,
        ),
        (
            1.9634954084936207,
            20.340468014214245,
            1.5051116113853986,
            0.5489323024875108,
            1.3870637636293939,
        ),
        (
            2.748893571891069,
            20.060544781342532,
            3.6843646773563137,
            1.2280580738156868,
            1.4917361570639973,
        ),
    ];
    let e = build_echo_spectrum(&IsingParams::new(8, 0.2, 5.0).unwrap()).unwrap();
    assert_eq!(e.modes.len(), expected.len());
    for (m, x) in e.modes.iter().zip(expected) {
        assert!(close(m.momentum, x.0, 1e-14));
        assert!(close(m.epsilon_plus, x.1, 1e-13));
        assert!(close(m.epsilon_minus, x.2, 1e-12));
        assert!(close(m.alpha_plus, x.3, 1e-13));
        assert!(close(m.alpha_minus, x.4, 1e-13));
    }
}

#[test]
fn cumulative_variance_n50() {
    for (l1, variance, mean) in [
        (5.0, 12.81487758817167, 10.100252539845789),
        (10.0, 12.578272005613353, 20.05003132843168),
        (40.0, 12.504883384831325, 80.01250048835756),
    ] {
        let env = decoherence::cumulative_variance(&build_spectrum(&IsingParams::new(50, 0.0, l1).unwrap()).unwrap());
        assert!(close(env.variance, variance, 1e-12), "{l1}: {}", env.variance);
        assert!(close(env.mean_energy, mean, 1e-13));
        assert_eq!(env.n_modes, 25);
    }
}

#[test]
fn variance_grows_like_a_quarter_of_chain_length() {
    for (n, variance) in [
        (100, 25.009766769662598),
        (200, 50.019533539325174),
        (400, 100.03906707865028),
    ] {
        let env = decoherence::cumulative_variance(&build_spectrum(&IsingParams::new(n, 0.0, 40.0).unwrap()).unwrap());
        assert!(close(env.variance, variance, 1e-11));
    }
}

#[test]
fn oracle_matches_product_formulas_n8() {
    let grid = TimeGrid::from_zero(4.0, 401).unwrap();
    let p = IsingParams::new(8, 0.2, 5.0).unwrap();
    let s = build_spectrum(&p).unwrap();
    let e = build_echo_spectrum(&p).unwrap();
    let survival = oracle::oracle_survival(8, 1.0, 0.2, 5.0, grid).unwrap();
    let echo = oracle::oracle_echo(8, 1.0, 0.2, 5.0, grid).unwrap();
    for (i, t) in grid.times().into_iter().enumerate() {
        assert!((survival.r[i] - decoherence::decoherence_factor(&s, t)).norm() <= 1e-8);
        assert!((echo.r[i] - decoherence::echo_factor(&e, t)).norm() <= 1e-8);
    }
}

#[test]
fn spectral_route_matches_product_route() {
    let grid = TimeGrid::from_zero(4.0, 201).unwrap();
    for n in [4, 6, 8, 10] {
        let decomp = oracle::survival_decomposition(n, 1.0, 0.5, 2.0).unwrap();
        assert!((decomp.weight_sum() - 1.0).abs() < 1e-10);
        let spectral = decoherence::survival_from_spectrum(&decomp, grid).unwrap();
        let s = build_spectrum(&IsingParams::new(n, 0.5, 2.0).unwrap()).unwrap();
        for (i, t) in grid.times().into_iter().enumerate() {
            assert!((spectral.r[i] - decoherence::decoherence_factor(&s, t)).norm() <= 1e-8);
        }
    }
}

#[test]
fn oracle_ground_energy_is_free_fermion_sum() {
    let g = oracle::oracle_ground(8, 1.0, 5.0).unwrap();
    let s = build_spectrum(&IsingParams::new(8, 0.2, 5.0).unwrap()).unwrap();
    assert!(((g.energy - s.ground_energy(1)) / s.ground_energy(1)).abs() < 1e-3);
}

#[test]
fn paper_convention_improves_with_chain_length() {
    let grid = TimeGrid::from_zero(4.0, 401).unwrap();
    let deviation = |n: usize| {
        let oracle = oracle::oracle_survival(n, 1.0, 0.2, 2.0, grid).unwrap();
        let p = IsingParams::new(n, 0.2, 2.0)
            .unwrap()
            .with_convention(MomentumConvention::Paper);
        let s = build_spectrum(&p).unwrap();
        grid.times()
            .into_iter()
            .zip(&oracle.r)
            .map(|(t, r)| (decoherence::decoherence_factor(&s, t) - r).norm())
            .fold(0.0, f64::max)
    };
    let (d6, d10) = (deviation(6), deviation(10));
    assert!(d10 < d6, "{d10} vs {d6}");
}

#[test]
fn convention_choice_fades_at_large_chain_length() {
    for (n, bound) in [(50, 0.05), (200, 0.015)] {
        for l1 in [2.0, 5.0, 10.0, 40.0] {
            let p = IsingParams::new(n, 0.0, l1).unwrap();
            let anti = decoherence::cumulative_variance(&build_spectrum(&p).unwrap()).variance;
            let paper = decoherence::cumulative_variance(
                &build_spectrum(&p.with_convention(MomentumConvention::Paper)).unwrap(),
            )
            .variance;
            assert!((paper - anti).abs() / anti < bound, "N={n} λ₁={l1}");
        }
    }
}

#[test]
fn envelope_tracks_revival_peaks() {
    for l1 in [5.0, 10.0, 40.0] {
        let s = build_spectrum(&IsingParams::new(50, 0.0, l1).unwrap()).unwrap();
        let env = decoherence::cumulative_variance(&s);
        let t_max = env.decay_time(0.1).unwrap();
        let grid = TimeGrid::from_zero(2.0 * t_max, 40001).unwrap();
        let series = decoherence::decoherence_series(&s, grid, true);
        let peaks = analysis::dominant_peaks(&analysis::extract_envelope(&series).unwrap());
        assert!(peaks.len() >= 2);
        for (t, v) in peaks.into_iter().filter(|p| p.0 <= t_max) {
            let predicted = env.envelope(t);
            assert!(
                (v.ln() - predicted.ln()).abs() <= 0.5,
                "λ₁={l1} t={t}: {v} vs {predicted}"
            );
        }
    }
}

#[test]
fn lindenberg_reports_across_the_transition() {
    let strong = decoherence::lindenberg_check(&build_spectrum(&IsingParams::new(50, 0.0, 40.0).unwrap()).unwrap());
    assert!(strong.satisfied);
    assert!((strong.mean_cos2 - 0.5).abs() < 0.1);
    let weak = decoherence::lindenberg_check(&build_spectrum(&IsingParams::new(50, 0.0, 0.1).unwrap()).unwrap());
    assert!(!weak.satisfied);
}

#[test]
fn echo_approximation_oscillation_shrinks_with_field() {
    // Amplitude of the K(t)/λ₁ term at the time where K is largest.
    let amplitude = |l1: f64| {
        let e = build_echo_spectrum(&IsingParams::new(50, 0.0, l1).unwrap()).unwrap();
        (0..=2000)
            .map(|i| 0.3 * i as f64 / 2000.0)
            .map(|t| (decoherence::echo_k(&e, t) / l1).abs())
            .fold(0.0, f64::max)
    };
    let ratio = amplitude(10.0) / amplitude(40.0);
    assert!((3.0..5.0).contains(&ratio), "{ratio}");
}

#[test]
fn mott_ldos_variance_is_exact() {
    // H₁ = −g T with ⟨T⟩ = 0 and ‖T |1…1⟩‖² = 2·2·L = 24 for L = 6
    let params = BoseHubbardParams::new(6, 6, 0.0, 1.0).unwrap();
    for g in [5.0, 10.0, 20.0, 50.0] {
        let q = bose_hubbard::quench(&params, 0.0, g).unwrap();
        let (mean, variance) = analysis::ldos_moments(&q.decomposition).unwrap();
        assert!(mean.abs() < 1e-9 * g);
        assert!(close(variance, 24.0 * g * g, 1e-9));
    }
}

#[test]
fn bose_hubbard_width_is_universal() {
    let params = BoseHubbardParams::new(6, 6, 0.0, 1.0).unwrap();
    let widths: Vec<f64> = [10.0, 20.0, 50.0]
        .into_iter()
        .map(|g| {
            let q = bose_hubbard::quench(&params, 0.0, g).unwrap();
            let n_points = (3.0 / decoherence::TimeGrid::max_resolving_dt(q.eigen.spectral_norm())) as usize * 4;
            let grid = TimeGrid::from_zero(3.0, n_points.max(20001)).unwrap();
            let series = decoherence::survival_from_spectrum(&q.decomposition, grid).unwrap();
            analysis::fit_peak_envelope(&series, &FitOptions::default())
                .unwrap()
                .width2
        })
        .collect();
    let (lo, hi) = widths
        .iter()
        .fold((f64::MAX, 0.0_f64), |(l, h), &w| (l.min(w), h.max(w)));
    assert!(hi / lo < 1.15, "{widths:?}");
    assert!(lo > 1.5 && hi < 3.0, "{widths:?}");
}

#[test]
fn bose_hubbard_two_site_survival() {
    let q = bose_hubbard::quench(&BoseHubbardParams::new(2, 1, 0.0, 1.0).unwrap(), 0.0, 3.0);
    // zero hopping with one boson on two sites is degenerate; pick |10⟩ explicitly
    assert!(q.unwrap().ground.is_degenerate());
    let b = bose_hubbard::enumerate_basis(2, 1, 10).unwrap();
    let h = bose_hubbard::build_hamiltonian(&BoseHubbardParams::new(2, 1, 3.0, 1.0).unwrap(), &b).unwrap();
    let eig = bose_hubbard::eigendecompose(&h).unwrap();
    let start = b.basis_vector(&bose_hubbard::FockState::new(vec![1, 0])).unwrap();
    let d = bose_hubbard::spectral_weights(&start, &eig).unwrap();
    let grid = TimeGrid::from_zero(2.0, 101).unwrap();
    let s = decoherence::survival_from_spectrum(&d, grid).unwrap();
    for (t, a) in grid.times().into_iter().zip(&s.abs2) {
        assert!((a - (3.0 * t).cos().powi(2)).abs() < 1e-12);
    }
}

#[test]
fn short_time_law_matches_ldos_variance() {
    for g in [0.5, 20.0] {
        let q = bose_hubbard::quench(&BoseHubbardParams::new(6, 6, 0.0, 1.0).unwrap(), 0.0, g).unwrap();
        let (_, variance) = analysis::ldos_moments(&q.decomposition).unwrap();
        let t_max = 0.01 / variance.sqrt();
        let s =
            decoherence::survival_from_spectrum(&q.decomposition, TimeGrid::from_zero(t_max, 101).unwrap()).unwrap();
        let fitted = analysis::short_time_variance(&s, t_max).unwrap();
        assert!((fitted / variance - 1.0).abs() < 0.02);
    }
}

#[test]
fn ising_scan_finds_the_critical_point() {
    let lambdas: Vec<f64> = (2..=30).map(|i| i as f64 / 10.0).collect();
    let grid = TimeGrid::from_zero(10.0, 20001).unwrap();
    let r = analysis::critical_scan(&IsingRecipe::new(200), &lambdas, grid, 0.3).unwrap();
    assert!((r.lambda_c_estimate - 1.0).abs() <= 0.1 + 1e-12);
    assert!(!r.low_confidence);
    assert_eq!(r.probe_min_lambda, Some(1.0));
    // widths rise monotonically up to the transition
    let below: Vec<f64> = r
        .lambdas
        .iter()
        .zip(&r.widths)
        .filter(|(l, _)| **l <= r.lambda_c_estimate)
        .map(|(_, w)| w.unwrap())
        .collect();
    assert!(below.windows(2).all(|w| w[1] >= w[0]), "{below:?}");
}

#[test]
fn weak_coupling_scan_is_low_confidence() {
    let lambdas: Vec<f64> = (1..=6).map(|i| 0.01 * i as f64).collect();
    let grid = TimeGrid::from_zero(10.0, 2001).unwrap();
    let r = analysis::critical_scan(&IsingRecipe::new(50), &lambdas, grid, 0.3).unwrap();
    assert!(r.low_confidence);
    assert!(r.widths.iter().flatten().all(|&w| w < 0.05), "{:?}", r.widths);
}

#[test]
fn bose_hubbard_scan_saturates() {
    let params = BoseHubbardParams::new(6, 6, 0.0, 1.0).unwrap();
    let lambdas: Vec<f64> = (0..8).map(|i| 0.5 * 10f64.powf(2.0 * i as f64 / 7.0)).collect();
    let grid = TimeGrid::from_zero(3.0, 40001).unwrap();
    let r = analysis::critical_scan(&analysis::BoseHubbardRecipe::new(params), &lambdas, grid, 0.2).unwrap();
    let tail: Vec<f64> = r.widths[5..].iter().map(|w| w.unwrap()).collect();
    let (lo, hi) = tail.iter().fold((f64::MAX, 0.0_f64), |(l, h), &w| (l.min(w), h.max(w)));
    assert!(hi / lo < 1.15, "{:?}", r.widths);
}
