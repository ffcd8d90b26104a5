//! Bogoliubov spectra of the transverse-field Ising environment.
//!
//! For a chain of `N` spins with Hamiltonian
//! `H(λ) = −J (Σ σᶻᵢσᶻᵢ₊₁ − λ Σ σˣᵢ)` the Jordan-Wigner fermions pair up
//! into modes `(k, −k)`. Each pair has quasiparticle energy
//! `ε(λ, φ) = 2J √(1 + λ² − 2λ cos φ)` and a Bogoliubov angle `θ(λ, φ)` with
//! `tan θ = sin φ / (λ − cos φ)`. Two Hamiltonians `H(λ₀)`, `H(λ₁)` are
//! connected by the mixing angle `α = (θ(λ₁) − θ(λ₀)) / 2`.
//!
//! Angles use the branch `θ = atan2(sin φ, λ − cos φ)`, which is continuous
//! in `λ` for `sin φ ≠ 0` and tends to `0⁺` as `λ → ∞`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Momentum quantization of the positive-`k` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentumConvention {
    /// `φ = 2πk/N`, keeping the `k` with `0 < φ < π`.
    Paper,
    /// `φ = π(2m − 1)/N`, `m = 1..=⌊N/2⌋`. Exact for the even-parity sector
    /// of the periodic chain with an even number of spins.
    #[default]
    Antiperiodic,
}

impl std::str::FromStr for MomentumConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "antiperiodic" => Ok(Self::Antiperiodic),
            other => Err(Error::InvalidParameter(format!(
                "unknown momentum convention `{other}` (expected `paper` or `antiperiodic`)"
            ))),
        }
    }
}

impl std::fmt::Display for MomentumConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Antiperiodic => "antiperiodic",
        })
    }
}

/// Parameters of a pair of Ising environments `H(λ₀)`, `H(λ₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingParams {
    pub n_spins: usize,
    pub coupling: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub convention: MomentumConvention,
}

impl IsingParams {
    /// `J = 1`, antiperiodic momenta.
    pub fn new(n_spins: usize, lambda0: f64, lambda1: f64) -> Result<Self> {
        Self {
            n_spins,
            coupling: 1.0,
            lambda0,
            lambda1,
            convention: MomentumConvention::Antiperiodic,
        }
        .validated()
    }

    pub fn with_coupling(self, coupling: f64) -> Result<Self> {
        Self { coupling, ..self }.validated()
    }

    pub fn with_convention(self, convention: MomentumConvention) -> Self {
        Self { convention, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        if self.n_spins < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 spins, got {}",
                self.n_spins
            )));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling J must be positive, got {}",
                self.coupling
            )));
        }
        for (name, v) in [("lambda0", self.lambda0), ("lambda1", self.lambda1)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(self)
    }

    /// Momenta of the modes entering the product formulas, ascending.
    pub fn momenta(&self) -> Vec<f64> {
        self.momentum_split().0
    }

    /// Momenta dropped because `sin φ = 0` (`φ ∈ {0, π}`); they only
    /// contribute a phase.
    pub fn excluded_momenta(&self) -> Vec<f64> {
        self.momentum_split().1
    }

    fn momentum_split(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_spins;
        match self.convention {
            MomentumConvention::Antiperiodic => {
                let kept = (1..=n / 2).map(|m| PI * (2 * m - 1) as f64 / n as f64).collect();
                let excluded = if n % 2 == 1 { vec![PI] } else { Vec::new() };
                (kept, excluded)
            }
            MomentumConvention::Paper => {
                // 0 < 2πk/N < π  ⇔  0 < 2k < N
                let kept = (1..)
                    .take_while(|&k| 2 * k < n)
                    .map(|k| 2.0 * PI * k as f64 / n as f64)
                    .collect();
                let mut excluded = vec![0.0];
                if n.is_multiple_of(2) {
                    excluded.push(PI);
                }
                (kept, excluded)
            }
        }
    }
}

/// Quasiparticle energy `2J √(1 + λ² − 2λ cos φ)`.
pub fn dispersion(lambda: f64, coupling: f64, phi: f64) -> f64 {
    // (λ − cos φ)² + sin² φ avoids cancellation near the critical point
    let (s, c) = phi.sin_cos();
    2.0 * coupling * (lambda - c).hypot(s)
}

/// Bogoliubov angle `θ = atan2(sin φ, λ − cos φ)`, in `(−π, π]`.
pub fn bogoliubov_angle(lambda: f64, phi: f64) -> Result<f64> {
    let (s, c) = phi.sin_cos();
    let x = lambda - c;
    if s.abs() < 1e-15 && x.abs() < 1e-15 {
        return Err(Error::SingularAngle { lambda, phi });
    }
    let theta = s.atan2(x);
    Ok(if theta <= -PI { PI } else { theta })
}

/// One `(k, −k)` mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModePair {
    /// 1-based position in the ascending momentum list.
    pub index: usize,
    pub momentum: f64,
    pub epsilon0: f64,
    pub epsilon1: f64,
    pub theta0: f64,
    pub theta1: f64,
    /// `(θ₁ − θ₀) / 2`
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovSpectrum {
    pub params: IsingParams,
    pub modes: Vec<ModePair>,
    /// Momenta left out of the product (see [`IsingParams::excluded_momenta`]).
    pub excluded: Vec<f64>,
}

impl BogoliubovSpectrum {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest `ε₁` over the modes.
    pub fn max_energy(&self) -> f64 {
        self.modes.iter().map(|m| m.epsilon1).fold(0.0, f64::max)
    }

    /// Ground-state energy `−Σ_{k>0} ε_k` of `H(λ)` restricted to these
    /// modes, for `λ = λ₀` (`which = 0`) or `λ₁`.
    pub fn ground_energy(&self, which: usize) -> f64 {
        -self
            .modes
            .iter()
            .map(|m| if which == 0 { m.epsilon0 } else { m.epsilon1 })
            .sum::<f64>()
    }
}

pub fn build_spectrum(params: &IsingParams) -> Result<BogoliubovSpectrum> {
    let params = params.validated()?;
    let j = params.coupling;
    let modes = params
        .momenta()
        .into_iter()
        .enumerate()
        .map(|(i, phi)| {
            let theta0 = bogoliubov_angle(params.lambda0, phi)?;
            let theta1 = bogoliubov_angle(params.lambda1, phi)?;
            Ok(ModePair {
                index: i + 1,
                momentum: phi,
                epsilon0: dispersion(params.lambda0, j, phi),
                epsilon1: dispersion(params.lambda1, j, phi),
                theta0,
                theta1,
                alpha: 0.5 * (theta1 - theta0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BogoliubovSpectrum {
        excluded: params.excluded_momenta(),
        params,
        modes,
    })
}

/// Per-mode data for the echo sequence `H(λ₁)` then `H(−λ₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EchoMode {
    pub momentum: f64,
    /// `ε(λ₁) + ε(−λ₁)`
    pub epsilon_plus: f64,
    /// `ε(λ₁) − ε(−λ₁)`
    pub epsilon_minus: f64,
    /// `α̃ + α`
    pub alpha_plus: f64,
    /// `α̃ − α`
    pub alpha_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoSpectrum {
    pub params: IsingParams,
    pub modes: Vec<EchoMode>,
}

pub fn build_echo_spectrum(params: &IsingParams) -> Result<EchoSpectrum> {
    let forward = build_spectrum(params)?;
    let j = forward.params.coupling;
    let lambda1 = forward.params.lambda1;
    let modes = forward
        .modes
        .iter()
        .map(|m| {
            let flipped_energy = dispersion(-lambda1, j, m.momentum);
            let alpha_tilde = 0.5 * (bogoliubov_angle(-lambda1, m.momentum)? - m.theta0);
            Ok(EchoMode {
                momentum: m.momentum,
                epsilon_plus: m.epsilon1 + flipped_energy,
                epsilon_minus: m.epsilon1 - flipped_energy,
                alpha_plus: alpha_tilde + m.alpha,
                alpha_minus: alpha_tilde - m.alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EchoSpectrum {
        params: forward.params,
        modes,
    })
}
