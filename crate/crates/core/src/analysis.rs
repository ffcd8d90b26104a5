//! Envelope extraction, Gaussian width fits, LDOS statistics, and the
//! critical-point scan.

use rayon::prelude::*;
use serde::Serialize;

use crate::bose_hubbard::{self, BoseHubbardParams, SpectralDecomposition};
use crate::decoherence::{self, DecoherenceSeries, TimeGrid};
use crate::error::{Error, Result};
use crate::spectrum::{build_spectrum, IsingParams, MomentumConvention};

/// A point `(t, |r(t)|²)` on an envelope.
pub type EnvelopePoint = (f64, f64);

pub const MIN_PEAKS: usize = 3;

/// Strict local maxima of `values`, each refined by a parabola through the
/// logarithms of the three samples around it.
pub fn local_maxima(times: &[f64], values: &[f64]) -> Vec<EnvelopePoint> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
        if !(y1 > y0 && y1 > y2) {
            continue;
        }
        let (mut t, mut v) = (times[i], y1);
        if y0 > 0.0 && y2 > 0.0 {
            let (l0, l1, l2) = (y0.ln(), y1.ln(), y2.ln());
            let curvature = l0 - 2.0 * l1 + l2;
            if curvature < 0.0 {
                let shift = 0.5 * (l0 - l2) / curvature;
                t += shift * (times[i + 1] - times[i]);
                v = (l1 - 0.25 * (l0 - l2) * shift).exp();
            }
        }
        out.push((t, v));
    }
    out
}

/// The first sample followed by every strict local maximum of `|r|²`.
pub fn extract_envelope(series: &DecoherenceSeries) -> Result<Vec<EnvelopePoint>> {
    if series.len() < 3 {
        return Err(Error::TooFewPeaks {
            found: 0,
            needed: MIN_PEAKS,
        });
    }
    let times = series.times();
    let maxima = local_maxima(&times, &series.abs2);
    if maxima.len() < MIN_PEAKS {
        return Err(Error::TooFewPeaks {
            found: maxima.len(),
            needed: MIN_PEAKS,
        });
    }
    let mut out = Vec::with_capacity(maxima.len() + 1);
    out.push((times[0], series.abs2[0]));
    out.extend(maxima);
    Ok(out)
}

/// Keeps the tallest maximum per revival period.
///
/// The period `T` is the time of the first maximum reaching half the
/// tallest one; one point is kept per window `[(k − ½)T, (k + ½)T)`.
/// Sub-revival ripples between the main peaks are discarded. The first
/// point of `envelope` is always kept.
pub fn dominant_peaks(envelope: &[EnvelopePoint]) -> Vec<EnvelopePoint> {
    let Some((&first, maxima)) = envelope.split_first() else {
        return Vec::new();
    };
    let tallest = maxima.iter().map(|p| p.1).fold(0.0, f64::max);
    let Some(period) = maxima
        .iter()
        .find(|p| p.1 >= 0.5 * tallest)
        .map(|p| p.0 - first.0)
        .filter(|&t| t > 0.0)
    else {
        return vec![first];
    };
    let t_last = maxima.last().map_or(first.0, |p| p.0);
    let mut out = vec![first];
    for k in 1.. {
        let lo = first.0 + (k as f64 - 0.5) * period;
        if lo > t_last {
            break;
        }
        let hi = lo + period;
        let best = maxima
            .iter()
            .filter(|p| p.0 >= lo && p.0 < hi)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        out.extend(best);
    }
    out
}

/// Every sample of `|r|²` as an envelope point, for series without a fast
/// carrier oscillation.
pub fn decay_profile(series: &DecoherenceSeries) -> Vec<EnvelopePoint> {
    series.times().into_iter().zip(series.abs2.iter().copied()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// Points are used up to the first one below this value.
    pub floor: f64,
    /// Values at or below this are never used.
    pub noise: f64,
    /// Stop at the first point that rises above its predecessor.
    pub monotone: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            floor: 1e-2,
            noise: 1e-12,
            monotone: true,
        }
    }
}

impl FitOptions {
    /// Leading run of `points` admitted by the options.
    pub fn admit<'a>(&self, points: &'a [EnvelopePoint]) -> &'a [EnvelopePoint] {
        let mut end = 0;
        for (i, p) in points.iter().enumerate() {
            let rises = self.monotone && i > 0 && p.1 > points[i - 1].1;
            if p.1 < self.floor || p.1 <= self.noise || rises {
                break;
            }
            end = i + 1;
        }
        &points[..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    /// `s²` in `exp(−s² t²)`.
    pub width2: f64,
    /// `log` of the fitted prefactor.
    pub log_intercept: f64,
    /// `π / Δt` with `Δt` the mean spacing of the points used.
    pub mean_freq: f64,
    pub rms_log_residual: f64,
    pub n_peaks_used: usize,
}

pub fn fit_gaussian_width(envelope: &[EnvelopePoint]) -> Result<GaussianFit> {
    fit_gaussian_width_with(envelope, &FitOptions::default())
}

/// Least-squares line through `(t², log value)`; `width2 = −slope`.
pub fn fit_gaussian_width_with(envelope: &[EnvelopePoint], options: &FitOptions) -> Result<GaussianFit> {
    let points = options.admit(envelope);
    if points.len() < MIN_PEAKS {
        return Err(Error::TooFewPeaks {
            found: points.len(),
            needed: MIN_PEAKS,
        });
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0 * p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx <= f64::EPSILON * x_mean.abs().max(1.0) * n {
        return Err(Error::DegenerateFit("all envelope times are equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let span = points[points.len() - 1].0 - points[0].0;
    let spacing = span / (points.len() - 1) as f64;
    Ok(GaussianFit {
        // a flat envelope can give a slope of −0.0 or a tiny positive value
        width2: (-slope).max(0.0),
        log_intercept: intercept,
        mean_freq: if spacing > 0.0 {
            std::f64::consts::PI / spacing
        } else {
            0.0
        },
        rms_log_residual: rms,
        n_peaks_used: points.len(),
    })
}

/// Envelope → revival peaks → Gaussian fit, for series with a carrier.
pub fn fit_peak_envelope(series: &DecoherenceSeries, options: &FitOptions) -> Result<GaussianFit> {
    let envelope = extract_envelope(series)?;
    fit_gaussian_width_with(&dominant_peaks(&envelope), options)
}

/// Gaussian fit through the raw samples, for series without a carrier.
pub fn fit_decay(series: &DecoherenceSeries, options: &FitOptions) -> Result<GaussianFit> {
    fit_gaussian_width_with(&decay_profile(series), options)
}

fn check_weights(decomp: &SpectralDecomposition) -> Result<()> {
    let sum = decomp.weight_sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedWeights { sum });
    }
    Ok(())
}

/// `(Σ p_n E_n, Σ p_n E_n² − mean²)`.
pub fn ldos_moments(decomp: &SpectralDecomposition) -> Result<(f64, f64)> {
    check_weights(decomp)?;
    let pairs = || decomp.energies.iter().zip(&decomp.weights);
    let mean: f64 = pairs().map(|(e, p)| p * e).sum();
    // centred sum keeps the variance non-negative
    let variance: f64 = pairs().map(|(e, p)| p * (e - mean).powi(2)).sum();
    Ok((mean, variance))
}

/// Weights summed into `n_bins` uniform bins over `[min E, max E]`, as
/// `(bin centre, weight)`.
pub fn ldos_histogram(decomp: &SpectralDecomposition, n_bins: usize) -> Result<Vec<(f64, f64)>> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter("need at least one histogram bin".into()));
    }
    check_weights(decomp)?;
    let lo = decomp.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = decomp.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / n_bins as f64;
    let mut bins: Vec<(f64, f64)> = (0..n_bins).map(|i| (lo + (i as f64 + 0.5) * width, 0.0)).collect();
    for (e, p) in decomp.energies.iter().zip(&decomp.weights) {
        let i = (((e - lo) / width) as usize).min(n_bins - 1);
        bins[i].1 += p;
    }
    Ok(bins)
}

/// `σ²` from `1 − |r(t)|² ≈ σ² t²`, least squares through the origin over
/// the samples with `t ≤ t_max`.
pub fn short_time_variance(series: &DecoherenceSeries, t_max: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (t, a) in series.times().into_iter().zip(&series.abs2) {
        if t > t_max {
            break;
        }
        num += t * t * (1.0 - a);
        den += t.powi(4);
    }
    if den == 0.0 {
        return Err(Error::DegenerateFit("no samples with t > 0 in the short-time window"));
    }
    Ok(num / den)
}

/// RMS of `values − envelope` over the samples where `envelope ≥ floor`.
pub fn oscillation_residual(values: &[f64], envelope: &[f64], floor: f64) -> Option<f64> {
    let (sum, n) = values
        .iter()
        .zip(envelope)
        .filter(|(_, &e)| e >= floor)
        .fold((0.0, 0usize), |(s, n), (v, e)| (s + (v - e).powi(2), n + 1));
    (n > 0).then(|| (sum / n as f64).sqrt())
}

/// One point of a critical scan.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub fit: Result<GaussianFit>,
    pub probe_abs2: Result<f64>,
}

/// An environment family parameterized by the coupling `λ`.
pub trait EnvironmentRecipe: Sync {
    fn name(&self) -> &'static str;

    /// Width fit and probe value `|r(probe_time)|²` at coupling `lambda`.
    fn scan_point(&self, lambda: f64, grid: TimeGrid, probe_time: f64) -> ScanPoint;
}

/// Ising chain quenched from `λ₀` to the scanned `λ`.
///
/// Widths come from the demodulated overlap (see
/// [`decoherence::demodulated_factor`]), whose modulus decays without the
/// carrier oscillation. Near the critical point the Gaussian dies out
/// before the first carrier revival, so the peaks of `|r|²` itself cannot
/// be fitted. The probe value is read from the same demodulated overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingRecipe {
    pub n_spins: usize,
    pub coupling: f64,
    pub lambda0: f64,
    pub convention: MomentumConvention,
    pub fit: FitOptions,
}

impl IsingRecipe {
    pub fn new(n_spins: usize) -> Self {
        Self {
            n_spins,
            coupling: 1.0,
            lambda0: 0.0,
            convention: MomentumConvention::Antiperiodic,
            fit: FitOptions::default(),
        }
    }

    fn params(&self, lambda: f64) -> Result<IsingParams> {
        Ok(IsingParams::new(self.n_spins, self.lambda0, lambda)?
            .with_coupling(self.coupling)?
            .with_convention(self.convention))
    }
}

impl EnvironmentRecipe for IsingRecipe {
    fn name(&self) -> &'static str {
        "ising"
    }

    fn scan_point(&self, lambda: f64, grid: TimeGrid, probe_time: f64) -> ScanPoint {
        let spectrum = self.params(lambda).and_then(|p| build_spectrum(&p));
        match spectrum {
            Ok(s) => ScanPoint {
                fit: fit_decay(&decoherence::demodulated_series(&s, grid), &self.fit),
                probe_abs2: Ok(decoherence::demodulated_factor(&s, probe_time).norm_sqr()),
            },
            Err(e) => ScanPoint {
                fit: Err(e.clone()),
                probe_abs2: Err(e),
            },
        }
    }
}

/// Bose-Hubbard chain quenched from hopping `λ₀` to the scanned hopping.
/// Widths come from the revival peaks of `|r|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoseHubbardRecipe {
    pub params: BoseHubbardParams,
    pub lambda0: f64,
    pub fit: FitOptions,
}

impl BoseHubbardRecipe {
    pub fn new(params: BoseHubbardParams) -> Self {
        Self {
            params,
            lambda0: 0.0,
            fit: FitOptions::default(),
        }
    }
}

impl EnvironmentRecipe for BoseHubbardRecipe {
    fn name(&self) -> &'static str {
        "bose-hubbard"
    }

    fn scan_point(&self, lambda: f64, grid: TimeGrid, probe_time: f64) -> ScanPoint {
        let quench = bose_hubbard::quench(&self.params, self.lambda0, lambda);
        match quench {
            Ok(q) => {
                let d = &q.decomposition;
                let probe = TimeGrid::new(probe_time, probe_time + 1.0, 2)
                    .and_then(|g| decoherence::survival_from_spectrum(d, g))
                    .map(|s| s.abs2[0]);
                ScanPoint {
                    fit: decoherence::survival_from_spectrum(d, grid).and_then(|s| fit_peak_envelope(&s, &self.fit)),
                    probe_abs2: probe,
                }
            }
            Err(e) => ScanPoint {
                fit: Err(e.clone()),
                probe_abs2: Err(e),
            },
        }
    }
}

pub const MIN_SCAN_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalScanResult {
    pub lambdas: Vec<f64>,
    /// Fitted `width2`; `None` where the fit failed.
    pub widths: Vec<Option<f64>>,
    pub probe_decay: Vec<Option<f64>>,
    /// Midpoint of the interval with the steepest rise of `width2(λ)`.
    pub lambda_c_estimate: f64,
    /// Steepest rise at either end of the grid, or fewer than half of the
    /// fits succeeded: the transition is probably not inside the grid.
    pub low_confidence: bool,
    /// `λ` of the smallest probe value.
    pub probe_min_lambda: Option<f64>,
    /// `(λ, message)` for every failed fit.
    pub failures: Vec<(f64, String)>,
}

pub fn critical_scan<R: EnvironmentRecipe + ?Sized>(
    recipe: &R,
    lambdas: &[f64],
    grid: TimeGrid,
    probe_time: f64,
) -> Result<CriticalScanResult> {
    if lambdas.len() < MIN_SCAN_POINTS {
        return Err(Error::InvalidParameter(format!(
            "a scan needs at least {MIN_SCAN_POINTS} coupling values, got {}",
            lambdas.len()
        )));
    }
    if lambdas
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        || lambdas.iter().any(|l| !l.is_finite())
    {
        return Err(Error::InvalidParameter(
            "scan couplings must be finite and strictly ascending".into(),
        ));
    }
    if !(probe_time >= 0.0 && probe_time.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "probe time must be non-negative, got {probe_time}"
        )));
    }
    let points: Vec<ScanPoint> = lambdas
        .par_iter()
        .map(|&l| recipe.scan_point(l, grid, probe_time))
        .collect();

    let widths: Vec<Option<f64>> = points.iter().map(|p| p.fit.as_ref().ok().map(|f| f.width2)).collect();
    let probe_decay: Vec<Option<f64>> = points.iter().map(|p| p.probe_abs2.as_ref().ok().copied()).collect();
    let failures = lambdas
        .iter()
        .zip(&points)
        .filter_map(|(&l, p)| p.fit.as_ref().err().map(|e| (l, e.to_string())))
        .collect();

    let valid: Vec<(usize, f64)> = widths
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.map(|w| (i, w)))
        .collect();
    let steepest = valid
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let ((i, a), (j, b)) = (w[0], w[1]);
            (k, i, j, (b - a) / (lambdas[j] - lambdas[i]))
        })
        .max_by(|x, y| x.3.total_cmp(&y.3));
    let Some((k, i, j, _)) = steepest else {
        return Err(Error::DegenerateFit("fewer than two coupling values produced a width"));
    };
    let n_intervals = valid.len() - 1;
    let low_confidence = k == 0 || k + 1 == n_intervals || 2 * valid.len() < lambdas.len();

    let probe_min_lambda = probe_decay
        .iter()
        .zip(lambdas)
        .filter_map(|(p, &l)| p.map(|p| (l, p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, _)| l);

    Ok(CriticalScanResult {
        lambdas: lambdas.to_vec(),
        widths,
        probe_decay,
        lambda_c_estimate: 0.5 * (lambdas[i] + lambdas[j]),
        low_confidence,
        probe_min_lambda,
        failures,
    })
}
