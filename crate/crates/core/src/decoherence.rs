//! Decoherence factor, Gaussian envelope, and echo overlap of the Ising
//! environment.
//!
//! With both environment Hamiltonians quadratic in fermions, the overlap
//! factorizes over mode pairs:
//!
//! ```text
//! r(t) = Π_k ( cos²α_k e^{iε_k t} + sin²α_k e^{−iε_k t} )
//! ```
//!
//! where `ε_k` is the quasiparticle energy under `λ₁`. When the mixing weights
//! satisfy Lindenberg-type conditions, `|r|²` is a fast oscillation under a
//! Gaussian `exp(−s̃² t²)` whose width is the weighted energy variance
//! `s̃² = Σ sin²2α_k (ε_k − ε̄)²`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bose_hubbard::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::spectrum::{BogoliubovSpectrum, EchoSpectrum};

/// Mode count above which products are accumulated as log-magnitude + phase.
pub const LOG_PATH_MODES: usize = 200;

/// Uniform time grid `t_start, t_start + dt, …, t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(t_start >= 0.0 && t_start.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_start must be finite and non-negative, got {t_start}"
            )));
        }
        if !(t_end > t_start && t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must exceed t_start, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_points,
        })
    }

    /// Grid on `[0, t_end]`.
    pub fn from_zero(t_end: f64, n_points: usize) -> Result<Self> {
        Self::new(0.0, t_end, n_points)
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }

    /// Largest step resolving oscillations at angular frequency `max_energy`.
    pub fn max_resolving_dt(max_energy: f64) -> f64 {
        std::f64::consts::PI / (4.0 * max_energy)
    }

    pub fn resolves(&self, max_energy: f64) -> bool {
        max_energy <= 0.0 || self.dt() <= Self::max_resolving_dt(max_energy) * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSeries {
    pub grid: TimeGrid,
    pub r: Vec<Complex64>,
    pub abs2: Vec<f64>,
    pub envelope: Option<Vec<f64>>,
}

impl DecoherenceSeries {
    pub fn from_amplitudes(grid: TimeGrid, r: Vec<Complex64>) -> Self {
        let abs2 = r.iter().map(|z| z.norm_sqr()).collect();
        Self {
            grid,
            r,
            abs2,
            envelope: None,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Largest `|r(t)| − 1` over the grid.
    pub fn max_overshoot(&self) -> f64 {
        self.r.iter().map(|z| z.norm() - 1.0).fold(f64::MIN, f64::max)
    }
}

/// Parameters of the Gaussian-times-oscillation envelope
/// `exp(−s̃² t²)·|cos ε̄t|^{N/2}` of `|r(t)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeParams {
    pub variance: f64,
    pub mean_energy: f64,
    pub n_spins: usize,
    /// Number of mode pairs actually summed.
    pub n_modes: usize,
}

impl EnvelopeParams {
    /// Gaussian part only.
    pub fn gaussian(&self, t: f64) -> f64 {
        (-self.variance * t * t).exp()
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let osc = (self.mean_energy * t).cos().abs();
        self.gaussian(t) * osc.powf(self.n_spins as f64 / 2.0)
    }

    /// Time at which the Gaussian part falls to `level`.
    pub fn decay_time(&self, level: f64) -> Option<f64> {
        (self.variance > 0.0 && level > 0.0 && level < 1.0).then(|| (-level.ln() / self.variance).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindenbergReport {
    pub mean_cos2: f64,
    pub s2: f64,
    /// `s2 / ε̄²`
    pub ratio: f64,
    pub satisfied: bool,
}

fn mode_factor(cos2: f64, sin2: f64, phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, (cos2 - sin2) * s)
}

fn product<I: Iterator<Item = Complex64>>(factors: I, log_path: bool) -> Complex64 {
    if !log_path {
        return factors.fold(Complex64::new(1.0, 0.0), |acc, f| acc * f);
    }
    let (mut log_mag, mut phase) = (0.0, 0.0);
    for f in factors {
        let m = f.norm();
        if m == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        log_mag += m.ln();
        phase += f.arg();
    }
    Complex64::from_polar(log_mag.exp(), phase)
}

/// `Π_k (cos²α_k e^{iε_k t} + sin²α_k e^{−iε_k t})` with `ε_k` under `λ₁`.
pub fn decoherence_factor(spectrum: &BogoliubovSpectrum, t: f64) -> Complex64 {
    product(
        spectrum.modes.iter().map(|m| {
            let (s, c) = m.alpha.sin_cos();
            mode_factor(c * c, s * s, m.epsilon1 * t)
        }),
        spectrum.len() > LOG_PATH_MODES,
    )
}

/// Same product with each `ε_k` replaced by `ε_k − ε̄`.
///
/// The common carrier frequency `ε̄` is removed, so the modulus traces the
/// Gaussian envelope without the fast `|cos ε̄t|` oscillation. At
/// `t = nπ/ε̄` it equals `|r(t)|`.
pub fn demodulated_factor(spectrum: &BogoliubovSpectrum, t: f64) -> Complex64 {
    let mean = mean_energy(spectrum);
    product(
        spectrum.modes.iter().map(|m| {
            let (s, c) = m.alpha.sin_cos();
            mode_factor(c * c, s * s, (m.epsilon1 - mean) * t)
        }),
        spectrum.len() > LOG_PATH_MODES,
    )
}

fn evaluate<F>(grid: TimeGrid, f: F) -> DecoherenceSeries
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let r: Vec<Complex64> = (0..grid.n_points).into_par_iter().map(|i| f(grid.time(i))).collect();
    DecoherenceSeries::from_amplitudes(grid, r)
}

pub fn decoherence_series(spectrum: &BogoliubovSpectrum, grid: TimeGrid, with_envelope: bool) -> DecoherenceSeries {
    let mut series = evaluate(grid, |t| decoherence_factor(spectrum, t));
    if with_envelope && !spectrum.is_empty() {
        let env = cumulative_variance(spectrum);
        series.envelope = Some(grid.times().into_iter().map(|t| env.envelope(t)).collect());
    }
    series
}

pub fn demodulated_series(spectrum: &BogoliubovSpectrum, grid: TimeGrid) -> DecoherenceSeries {
    evaluate(grid, |t| demodulated_factor(spectrum, t))
}

fn mean_energy(spectrum: &BogoliubovSpectrum) -> f64 {
    if spectrum.is_empty() {
        return 0.0;
    }
    spectrum.modes.iter().map(|m| m.epsilon1).sum::<f64>() / spectrum.len() as f64
}

/// `s̃² = Σ sin²2α_k (ε_k − ε̄)²` with `ε̄` the arithmetic mean of `ε_k`.
pub fn cumulative_variance(spectrum: &BogoliubovSpectrum) -> EnvelopeParams {
    let mean = mean_energy(spectrum);
    let variance = spectrum
        .modes
        .iter()
        .map(|m| (2.0 * m.alpha).sin().powi(2) * (m.epsilon1 - mean).powi(2))
        .sum();
    EnvelopeParams {
        variance,
        mean_energy: mean,
        n_spins: spectrum.params.n_spins,
        n_modes: spectrum.len(),
    }
}

pub fn lindenberg_check(spectrum: &BogoliubovSpectrum) -> LindenbergReport {
    let n = spectrum.len().max(1) as f64;
    let mean_cos2 = spectrum.modes.iter().map(|m| m.alpha.cos().powi(2)).sum::<f64>() / n;
    let s2: f64 = spectrum
        .modes
        .iter()
        .map(|m| (2.0 * m.alpha).sin().powi(2) * m.epsilon1.powi(2))
        .sum();
    let mean = mean_energy(spectrum);
    let ratio = if mean > 0.0 { s2 / (mean * mean) } else { f64::INFINITY };
    LindenbergReport {
        mean_cos2,
        s2,
        ratio,
        satisfied: (mean_cos2 - 0.5).abs() < 0.1 && s2 > 10.0 * mean * mean,
    }
}

/// Overlap `⟨g₀| e^{−iH(−λ₁)t} e^{−iH(λ₁)t} |g₀⟩`; `t` is the duration of
/// each segment, so the total evolved time is `2t`.
pub fn echo_factor(echo: &EchoSpectrum, t: f64) -> Complex64 {
    product(
        echo.modes.iter().map(|m| {
            let (sm, cm) = m.alpha_minus.sin_cos();
            let (sp, cp) = m.alpha_plus.sin_cos();
            let (s_plus, c_plus) = (m.epsilon_plus * t).sin_cos();
            let (s_minus, c_minus) = (m.epsilon_minus * t).sin_cos();
            Complex64::new(
                c_plus * cm * cm + c_minus * sm * sm,
                s_plus * cm * cp + s_minus * sm * sp,
            )
        }),
        echo.modes.len() > LOG_PATH_MODES,
    )
}

/// Echo overlap on a grid of segment times.
pub fn echo_series(echo: &EchoSpectrum, grid: TimeGrid) -> DecoherenceSeries {
    evaluate(grid, |t| echo_factor(echo, t))
}

/// `K(t) = 2 Σ_k sin(ε⁻_k t) cos φ_k sin² φ_k`.
pub fn echo_k(echo: &EchoSpectrum, t: f64) -> f64 {
    2.0 * echo
        .modes
        .iter()
        .map(|m| (m.epsilon_minus * t).sin() * m.momentum.cos() * m.momentum.sin().powi(2))
        .sum::<f64>()
}

/// Large-`λ₁` approximation of `|r_echo(t)|²` at segment time `t`:
/// `exp(−4s̃²t²)·(1 − K(t)/λ₁ · sin(4Jλ₁t))`.
pub fn echo_approximation(spectrum: &BogoliubovSpectrum, echo: &EchoSpectrum, t: f64) -> Result<f64> {
    let lambda1 = echo.params.lambda1;
    if lambda1 == 0.0 {
        return Err(Error::DivideByZero("echo approximation needs lambda1 > 0"));
    }
    let s2 = cumulative_variance(spectrum).variance;
    let carrier = 4.0 * echo.params.coupling * lambda1 * t;
    Ok((-4.0 * s2 * t * t).exp() * (1.0 - echo_k(echo, t) / lambda1 * carrier.sin()))
}

/// `r(t) = Σ_n p_n e^{−iE_n t}`.
pub fn survival_from_spectrum(decomp: &SpectralDecomposition, grid: TimeGrid) -> Result<DecoherenceSeries> {
    let sum: f64 = decomp.weights.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedWeights { sum });
    }
    Ok(evaluate(grid, |t| {
        decomp
            .energies
            .iter()
            .zip(&decomp.weights)
            .map(|(&e, &p)| Complex64::from_polar(p, -e * t))
            .sum()
    }))
}
