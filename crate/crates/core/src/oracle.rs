//! Brute-force reference for the Ising product formulas.
//!
//! Builds `H(λ) = −J (Σ Z_i Z_{i+1} − λ Σ X_i)` on the full `2^N` spin space
//! (periodic, site 1 = most significant bit, bit 0 = `Z = +1`) and evolves
//! the ground state of `H(λ₀)` exactly.
//!
//! `H` commutes with the global flip `P = Π X_i`, so the evolution is done
//! inside the parity sector of the initial ground state. A sector state
//! `(|s⟩ ± |s̄⟩)/√2` is labelled by the representative `s` with its most
//! significant bit clear, which halves the matrix dimension.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bose_hubbard::SpectralDecomposition;
use crate::decoherence::{survival_from_spectrum, DecoherenceSeries, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymmetricEigen};

pub const MAX_SPINS: usize = 12;

/// Relative gap of `H(λ₀)` below which the ground state counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpinChainMatrix {
    pub n_spins: usize,
    pub coupling: f64,
    pub lambda: f64,
    pub matrix: Matrix,
}

fn validate(n_spins: usize, coupling: f64, lambdas: &[f64]) -> Result<()> {
    if n_spins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 spins, got {n_spins}")));
    }
    if n_spins > MAX_SPINS {
        return Err(Error::DimensionTooLarge {
            dimension: 1 << n_spins,
            max: 1 << MAX_SPINS,
        });
    }
    if !(coupling > 0.0 && coupling.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "coupling J must be positive, got {coupling}"
        )));
    }
    if let Some(l) = lambdas.iter().find(|l| !l.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be finite, got {l}")));
    }
    Ok(())
}

/// `−J Σ z_i z_{i+1}` for the basis state `s`.
fn bond_energy(n_spins: usize, coupling: f64, s: usize) -> f64 {
    let z = |i: usize| if (s >> (n_spins - 1 - i)) & 1 == 0 { 1.0 } else { -1.0 };
    -coupling * (0..n_spins).map(|i| z(i) * z((i + 1) % n_spins)).sum::<f64>()
}

/// Dense `2^N × 2^N` Hamiltonian in the computational basis.
pub fn build_spin_hamiltonian(n_spins: usize, coupling: f64, lambda: f64) -> Result<SpinChainMatrix> {
    validate(n_spins, coupling, &[lambda])?;
    let dim = 1 << n_spins;
    let mut m = Matrix::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] = bond_energy(n_spins, coupling, s);
        for i in 0..n_spins {
            m[(s ^ (1 << i), s)] += coupling * lambda;
        }
    }
    Ok(SpinChainMatrix {
        n_spins,
        coupling,
        lambda,
        matrix: m,
    })
}

/// Eigenvalue of the global flip `Π X_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Block of `H` on the sector of the given parity, dimension `2^{N−1}`.
pub fn sector_hamiltonian(n_spins: usize, coupling: f64, lambda: f64, parity: Parity) -> Result<Matrix> {
    validate(n_spins, coupling, &[lambda])?;
    let dim = 1 << (n_spins - 1);
    let all = (1 << n_spins) - 1;
    let sign = parity.sign();
    let mut m = Matrix::zeros(dim, dim);
    for b in 0..dim {
        m[(b, b)] += bond_energy(n_spins, coupling, b);
        for i in 0..n_spins {
            let t = b ^ (1 << i);
            if t < dim {
                m[(t, b)] += coupling * lambda;
            } else {
                m[(t ^ all, b)] += sign * coupling * lambda;
            }
        }
    }
    Ok(m)
}

/// Embeds a sector vector into the full `2^N` space.
pub fn embed(n_spins: usize, parity: Parity, v: &[f64]) -> Vec<f64> {
    let all = (1usize << n_spins) - 1;
    let mut full = vec![0.0; 1 << n_spins];
    for (s, &c) in v.iter().enumerate() {
        full[s] = c * std::f64::consts::FRAC_1_SQRT_2;
        full[s ^ all] = parity.sign() * c * std::f64::consts::FRAC_1_SQRT_2;
    }
    full
}

#[derive(Debug, Clone)]
pub struct OracleGround {
    pub parity: Parity,
    pub energy: f64,
    /// Gap to the next level over both sectors.
    pub gap: f64,
    /// `max |E|` of `H(λ₀)` over both sectors.
    pub norm: f64,
    /// Ground state in sector coordinates.
    pub vector: Vec<f64>,
}

/// Ground state of `H(λ)`; fails if it is degenerate within
/// `1e-10·‖H‖`.
pub fn oracle_ground(n_spins: usize, coupling: f64, lambda: f64) -> Result<OracleGround> {
    let even = linalg::symmetric_eigen(&sector_hamiltonian(n_spins, coupling, lambda, Parity::Even)?)?;
    let odd = linalg::symmetric_eigen(&sector_hamiltonian(n_spins, coupling, lambda, Parity::Odd)?)?;
    let (parity, low, other) = if even.values[0] <= odd.values[0] {
        (Parity::Even, &even, &odd)
    } else {
        (Parity::Odd, &odd, &even)
    };
    let next = low.values.get(1).copied().unwrap_or(f64::INFINITY).min(other.values[0]);
    let gap = next - low.values[0];
    let norm = even.spectral_norm().max(odd.spectral_norm());
    let tolerance = DEGENERACY_TOLERANCE * norm;
    if gap < tolerance {
        return Err(Error::DegenerateGroundState { gap, tolerance });
    }
    Ok(OracleGround {
        parity,
        energy: low.values[0],
        gap,
        norm,
        vector: low.vector(0).to_vec(),
    })
}

fn project(eig: &SymmetricEigen, v: &[f64]) -> Vec<f64> {
    (0..eig.dimension()).map(|n| linalg::dot(eig.vector(n), v)).collect()
}

/// LDOS of the `H(λ₀)` ground state in the eigenbasis of `H(λ₁)`.
pub fn survival_decomposition(
    n_spins: usize,
    coupling: f64,
    lambda0: f64,
    lambda1: f64,
) -> Result<SpectralDecomposition> {
    validate(n_spins, coupling, &[lambda0, lambda1])?;
    let ground = oracle_ground(n_spins, coupling, lambda0)?;
    let h1 = sector_hamiltonian(n_spins, coupling, lambda1, ground.parity)?;
    let eig = linalg::symmetric_eigen(&h1)?;
    let weights = project(&eig, &ground.vector).into_iter().map(|c| c * c).collect();
    SpectralDecomposition::new(eig.values, weights)
}

/// `⟨g₀| e^{−iH(λ₁)t} |g₀⟩` by exact diagonalization.
pub fn oracle_survival(
    n_spins: usize,
    coupling: f64,
    lambda0: f64,
    lambda1: f64,
    grid: TimeGrid,
) -> Result<DecoherenceSeries> {
    survival_from_spectrum(&survival_decomposition(n_spins, coupling, lambda0, lambda1)?, grid)
}

/// `⟨g₀| e^{−iH(−λ₁)t} e^{−iH(λ₁)t} |g₀⟩` with `t` the segment time.
pub fn oracle_echo(
    n_spins: usize,
    coupling: f64,
    lambda0: f64,
    lambda1: f64,
    grid: TimeGrid,
) -> Result<DecoherenceSeries> {
    validate(n_spins, coupling, &[lambda0, lambda1])?;
    let ground = oracle_ground(n_spins, coupling, lambda0)?;
    let forward = linalg::symmetric_eigen(&sector_hamiltonian(n_spins, coupling, lambda1, ground.parity)?)?;
    let backward = linalg::symmetric_eigen(&sector_hamiltonian(n_spins, coupling, -lambda1, ground.parity)?)?;
    let c = project(&forward, &ground.vector);
    let b = project(&backward, &ground.vector);
    let dim = c.len();
    // overlap[m][n] = ⟨φ⁻_m | φ⁺_n⟩
    let overlap: Vec<Vec<f64>> = (0..dim)
        .map(|m| {
            (0..dim)
                .map(|n| linalg::dot(backward.vector(m), forward.vector(n)))
                .collect()
        })
        .collect();
    let r = (0..grid.n_points)
        .into_par_iter()
        .map(|i| {
            let t = grid.time(i);
            let evolved: Vec<Complex64> = (0..dim)
                .map(|n| Complex64::from_polar(c[n], -forward.values[n] * t))
                .collect();
            (0..dim)
                .map(|m| {
                    let inner: Complex64 = overlap[m].iter().zip(&evolved).map(|(&o, z)| z * o).sum();
                    Complex64::from_polar(b[m], -backward.values[m] * t) * inner
                })
                .sum()
        })
        .collect();
    Ok(DecoherenceSeries::from_amplitudes(grid, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::decoherence_factor;
    use crate::spectrum::{build_spectrum, IsingParams};

    #[test]
    fn two_spin_diagonal() {
        let h = build_spin_hamiltonian(2, 1.0, 0.0).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h.matrix[(i, i)]).collect();
        assert_eq!(diag, vec![-2.0, 2.0, 2.0, -2.0]);
        assert_eq!(h.matrix.asymmetry(), 0.0);
    }

    #[test]
    fn zero_field_is_diagonal() {
        let h = build_spin_hamiltonian(5, 1.3, 0.0).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                if i != j {
                    assert_eq!(h.matrix[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        assert!(matches!(
            build_spin_hamiltonian(13, 1.0, 1.0),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(build_spin_hamiltonian(1, 1.0, 1.0).is_err());
        assert!(build_spin_hamiltonian(4, 0.0, 1.0).is_err());
    }

    #[test]
    fn sectors_reproduce_full_spectrum() {
        let (n, j, l) = (6, 1.0, 0.7);
        let full = linalg::symmetric_eigenvalues(&build_spin_hamiltonian(n, j, l).unwrap().matrix).unwrap();
        let mut split: Vec<f64> = [Parity::Even, Parity::Odd]
            .into_iter()
            .flat_map(|p| linalg::symmetric_eigenvalues(&sector_hamiltonian(n, j, l, p).unwrap()).unwrap())
            .collect();
        split.sort_by(f64::total_cmp);
        for (a, b) in full.iter().zip(&split) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn sector_ground_state_is_full_ground_state() {
        let (n, j, l) = (6, 1.0, 0.4);
        let h = build_spin_hamiltonian(n, j, l).unwrap();
        let g = oracle_ground(n, j, l).unwrap();
        let v = embed(n, g.parity, &g.vector);
        assert!((linalg::dot(&v, &v) - 1.0).abs() < 1e-12);
        let hv = h.matrix.mul_vec(&v);
        let res: f64 = hv.iter().zip(&v).map(|(a, b)| (a - g.energy * b).powi(2)).sum();
        assert!(res.sqrt() < 1e-10);
    }

    #[test]
    fn opposite_parity_overlaps_vanish() {
        let (n, j) = (6, 1.0);
        let g = oracle_ground(n, j, 0.3).unwrap();
        let g_full = embed(n, g.parity, &g.vector);
        let eig = linalg::symmetric_eigen(&build_spin_hamiltonian(n, j, 2.0).unwrap().matrix).unwrap();
        let all = (1usize << n) - 1;
        for k in 0..eig.dimension() {
            let v = eig.vector(k);
            let parity: f64 = (0..v.len()).map(|s| v[s] * v[s ^ all]).sum();
            let overlap = linalg::dot(v, &g_full);
            if parity < -0.5 {
                assert!(overlap.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_zero_field_ground_state_is_rejected() {
        assert!(matches!(
            oracle_survival(6, 1.0, 0.0, 2.0, TimeGrid::from_zero(1.0, 3).unwrap()),
            Err(Error::DegenerateGroundState { .. })
        ));
    }

    #[test]
    fn ground_energy_matches_free_fermions() {
        let g = oracle_ground(8, 1.0, 5.0).unwrap();
        let s = build_spectrum(&IsingParams::new(8, 5.0, 5.0).unwrap()).unwrap();
        assert!((g.energy / s.ground_energy(1) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn survival_matches_product_formula() {
        let grid = TimeGrid::from_zero(4.0, 201).unwrap();
        let s = build_spectrum(&IsingParams::new(6, 0.5, 2.0).unwrap()).unwrap();
        let oracle = oracle_survival(6, 1.0, 0.5, 2.0, grid).unwrap();
        for (t, r) in grid.times().into_iter().zip(&oracle.r) {
            assert!((decoherence_factor(&s, t) - r).norm() < 1e-10);
        }
    }

    #[test]
    fn echo_trivial_limits() {
        let grid = TimeGrid::from_zero(2.0, 21).unwrap();
        let e = oracle_echo(4, 1.0, 0.5, 0.0, grid).unwrap();
        assert!((e.r[0] - 1.0).norm() < 1e-12);
        let doubled = TimeGrid::from_zero(4.0, 21).unwrap();
        let s = oracle_survival(4, 1.0, 0.5, 0.0, doubled).unwrap();
        for (a, b) in e.r.iter().zip(&s.r) {
            assert!((a - b).norm() < 1e-12);
        }
        let same = oracle_echo(4, 1.0, 0.5, 0.5, grid).unwrap();
        assert!(same.abs2.iter().all(|a| a <= &(1.0 + 1e-12)));
    }
}
