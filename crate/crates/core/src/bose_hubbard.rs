//! Exact diagonalization of the one-dimensional Bose-Hubbard environment
//!
//! ```text
//! H = −g Σ_<i,j> (a†_i a_j + a†_j a_i) + u Σ_i n_i (n_i − 1)
//! ```
//!
//! in the occupation-number basis at fixed particle number. The hopping `g`
//! plays the role of the coupling `λ`.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymmetricEigen};

pub const DEFAULT_MAX_DIM: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "open" => Ok(Self::Open),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary `{other}` (expected `periodic` or `open`)"
            ))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Open => "open",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoseHubbardParams {
    pub n_sites: usize,
    pub n_bosons: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub boundary: Boundary,
    pub max_dim: usize,
}

impl BoseHubbardParams {
    /// Periodic chain with the default dimension cap.
    pub fn new(n_sites: usize, n_bosons: usize, hopping: f64, interaction: f64) -> Result<Self> {
        Self {
            n_sites,
            n_bosons,
            hopping,
            interaction,
            boundary: Boundary::Periodic,
            max_dim: DEFAULT_MAX_DIM,
        }
        .validated()
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn with_max_dim(self, max_dim: usize) -> Self {
        Self { max_dim, ..self }
    }

    pub fn with_hopping(self, hopping: f64) -> Result<Self> {
        Self { hopping, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        if !(self.hopping >= 0.0 && self.hopping.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hopping must be finite and non-negative, got {}",
                self.hopping
            )));
        }
        if !(self.interaction > 0.0 && self.interaction.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interaction u must be positive, got {}",
                self.interaction
            )));
        }
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        basis_dimension(self.n_sites, self.n_bosons)
    }

    /// Unordered nearest-neighbour bonds, each listed once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.n_sites;
        let n_bonds = match self.boundary {
            Boundary::Periodic => l,
            Boundary::Open => l.saturating_sub(1),
        };
        (0..n_bonds)
            .map(|i| (i, (i + 1) % l))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// `C(n + L − 1, L − 1)`, saturating at `usize::MAX`.
pub fn basis_dimension(n_sites: usize, n_bosons: usize) -> usize {
    if n_sites == 0 {
        return 0;
    }
    let k = (n_sites - 1).min(n_bosons) as u128;
    let top = (n_bosons + n_sites - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc = C(top − k + i + 1, i + 1)
        acc = match acc.checked_mul(top - k + i + 1) {
            Some(v) => v / (i + 1),
            None => return usize::MAX,
        };
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FockState {
    pub occupations: Vec<u32>,
}

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self { occupations }
    }

    /// Unit filling `(1, 1, …, 1)`.
    pub fn uniform(n_sites: usize) -> Self {
        Self::new(vec![1; n_sites])
    }

    pub fn total(&self) -> usize {
        self.occupations.iter().map(|&n| n as usize).sum()
    }

    /// `Σ n_i (n_i − 1)`
    pub fn pair_count(&self) -> f64 {
        self.occupations.iter().map(|&n| (n as f64) * (n as f64 - 1.0)).sum()
    }

    /// Sites relabelled `i → i + shift (mod L)`.
    pub fn rotated(&self, shift: usize) -> Self {
        let l = self.occupations.len();
        let mut occ = vec![0; l];
        for (i, &n) in self.occupations.iter().enumerate() {
            occ[(i + shift) % l] = n;
        }
        Self::new(occ)
    }
}

impl std::fmt::Display for FockState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("|")?;
        for n in &self.occupations {
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Fock states at fixed `(L, n)`, ordered lexicographically descending.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub n_sites: usize,
    pub n_bosons: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl FockBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &FockState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Unit vector on `state`.
    pub fn basis_vector(&self, state: &FockState) -> Option<Vec<f64>> {
        let i = self.index_of(state)?;
        let mut v = vec![0.0; self.len()];
        v[i] = 1.0;
        Some(v)
    }
}

pub fn enumerate_basis(n_sites: usize, n_bosons: usize, max_dim: usize) -> Result<FockBasis> {
    if n_sites == 0 {
        return Err(Error::InvalidParameter("need at least one site".into()));
    }
    let dimension = basis_dimension(n_sites, n_bosons);
    if dimension > max_dim {
        return Err(Error::DimensionTooLarge {
            dimension,
            max: max_dim,
        });
    }
    let mut states = Vec::with_capacity(dimension);
    let mut prefix = Vec::with_capacity(n_sites);
    fill(&mut prefix, n_bosons as u32, n_sites, &mut states);
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(FockBasis {
        n_sites,
        n_bosons,
        states,
        index,
    })
}

fn fill(prefix: &mut Vec<u32>, left: u32, sites: usize, out: &mut Vec<FockState>) {
    if sites == 1 {
        prefix.push(left);
        out.push(FockState::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for k in (0..=left).rev() {
        prefix.push(k);
        fill(prefix, left - k, sites - 1, out);
        prefix.pop();
    }
}

#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub matrix: Matrix,
}

impl DenseHamiltonian {
    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    pub fn asymmetry(&self) -> f64 {
        self.matrix.asymmetry()
    }

    pub fn norm_bound(&self) -> f64 {
        self.matrix.norm_inf()
    }
}

pub fn build_hamiltonian(params: &BoseHubbardParams, basis: &FockBasis) -> Result<DenseHamiltonian> {
    if basis.n_sites != params.n_sites || basis.n_bosons != params.n_bosons {
        return Err(Error::InvalidParameter(format!(
            "basis is for (L={}, n={}), parameters are (L={}, n={})",
            basis.n_sites, basis.n_bosons, params.n_sites, params.n_bosons
        )));
    }
    let dim = basis.len();
    let bonds = params.bonds();
    let mut h = Matrix::zeros(dim, dim);
    let mut target = FockState::new(vec![0; params.n_sites]);
    for (a, state) in basis.states().iter().enumerate() {
        h[(a, a)] = params.interaction * state.pair_count();
        if params.hopping == 0.0 {
            continue;
        }
        for &(i, j) in &bonds {
            for (to, from) in [(i, j), (j, i)] {
                let n_from = state.occupations[from];
                if n_from == 0 {
                    continue;
                }
                let n_to = state.occupations[to];
                target.occupations.clone_from(&state.occupations);
                target.occupations[from] -= 1;
                target.occupations[to] += 1;
                let b = basis.index_of(&target).expect("hopping preserves particle number");
                h[(b, a)] -= params.hopping * (((n_to + 1) * n_from) as f64).sqrt();
            }
        }
    }
    Ok(DenseHamiltonian { matrix: h })
}

/// Full eigendecomposition with the residual and orthonormality checked.
pub fn eigendecompose(h: &DenseHamiltonian) -> Result<SymmetricEigen> {
    let eig = linalg::symmetric_eigen(&h.matrix)?;
    let scale = eig.spectral_norm().max(f64::MIN_POSITIVE);
    let residual = eig.max_residual(&h.matrix);
    if residual > 1e-8 * scale {
        return Err(Error::ConvergenceFailure(format!(
            "eigenpair residual {residual:e} exceeds 1e-8 of the norm {scale:e}"
        )));
    }
    let ortho = eig.orthonormality_error();
    if ortho > 1e-10 {
        return Err(Error::ConvergenceFailure(format!(
            "eigenvectors deviate from orthonormality by {ortho:e}"
        )));
    }
    Ok(eig)
}

/// Relative gap below which a ground state counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub vector: Vec<f64>,
    pub energy: f64,
    /// Distance to the next level; `None` for a one-dimensional space.
    pub gap: Option<f64>,
    /// Gap tolerance `1e-10·‖H‖` the gap was compared against.
    pub tolerance: f64,
}

impl GroundState {
    pub fn is_degenerate(&self) -> bool {
        self.gap.is_some_and(|g| g <= self.tolerance)
    }

    /// The degeneracy as an error value, for callers that treat it as fatal.
    pub fn degeneracy(&self) -> Option<Error> {
        self.is_degenerate().then(|| Error::DegenerateGroundState {
            gap: self.gap.unwrap_or(0.0),
            tolerance: self.tolerance,
        })
    }
}

/// Lowest eigenvector of `H(params.hopping)`.
///
/// At zero hopping and unit filling the answer is the Mott state
/// `(1, …, 1)`, returned without diagonalizing.
pub fn ground_state(params: &BoseHubbardParams, basis: &FockBasis) -> Result<GroundState> {
    if params.hopping == 0.0 && params.n_bosons == params.n_sites {
        let mott = FockState::uniform(params.n_sites);
        let vector = basis
            .basis_vector(&mott)
            .ok_or_else(|| Error::InvalidParameter("basis does not match parameters".into()))?;
        let gap = (basis.len() > 1).then_some(2.0 * params.interaction);
        // largest diagonal entry: every boson on one site
        let n = params.n_bosons as f64;
        let norm = params.interaction * n * (n - 1.0);
        return Ok(GroundState {
            vector,
            energy: 0.0,
            gap,
            tolerance: DEGENERACY_TOLERANCE * norm,
        });
    }
    let h = build_hamiltonian(params, basis)?;
    let eig = eigendecompose(&h)?;
    Ok(GroundState {
        vector: eig.vector(0).to_vec(),
        energy: eig.values[0],
        gap: (eig.dimension() > 1).then(|| eig.values[1] - eig.values[0]),
        tolerance: DEGENERACY_TOLERANCE * eig.spectral_norm(),
    })
}

/// Local density of states `Σ_n p_n δ(E − E_n)` of an initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralDecomposition {
    /// Checks lengths, ascending energies, and `Σ p_n = 1 ± 1e-10`.
    pub fn new(energies: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if energies.len() != weights.len() || energies.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} energies but {} weights",
                energies.len(),
                weights.len()
            )));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("energies must be ascending".into()));
        }
        let sum = weights.iter().sum::<f64>();
        if (sum - 1.0).abs() > 1e-10 || weights.iter().any(|&p| p < 0.0) {
            return Err(Error::UnnormalizedWeights { sum });
        }
        Ok(Self { energies, weights })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `p_n = |⟨ground0|φ_n⟩|²` over the eigenvectors of the quenched Hamiltonian.
pub fn spectral_weights(ground0: &[f64], eigen: &SymmetricEigen) -> Result<SpectralDecomposition> {
    let norm = linalg::dot(ground0, ground0).sqrt();
    if (norm - 1.0).abs() > 1e-10 || ground0.len() != eigen.dimension() {
        return Err(Error::UnnormalizedInput { norm });
    }
    let weights = (0..eigen.dimension())
        .map(|n| linalg::dot(ground0, eigen.vector(n)).powi(2))
        .collect();
    SpectralDecomposition::new(eigen.values.clone(), weights)
}

/// Everything needed to follow a quench `g = λ₀ → λ₁` at fixed `(L, n, u)`.
#[derive(Debug, Clone)]
pub struct Quench {
    pub basis: FockBasis,
    pub ground: GroundState,
    pub eigen: SymmetricEigen,
    pub decomposition: SpectralDecomposition,
    /// Largest residual `‖Hv − Ev‖` of the quenched decomposition.
    pub residual: f64,
}

/// Ground state of `H(λ₀)` decomposed in the eigenbasis of `H(λ₁)`.
pub fn quench(params: &BoseHubbardParams, lambda0: f64, lambda1: f64) -> Result<Quench> {
    let basis = enumerate_basis(params.n_sites, params.n_bosons, params.max_dim)?;
    let ground = ground_state(&params.with_hopping(lambda0)?, &basis)?;
    let h1 = build_hamiltonian(&params.with_hopping(lambda1)?, &basis)?;
    let eigen = eigendecompose(&h1)?;
    let residual = eigen.max_residual(&h1.matrix);
    let decomposition = spectral_weights(&ground.vector, &eigen)?;
    Ok(Quench {
        basis,
        ground,
        eigen,
        decomposition,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: usize, n: usize, g: f64) -> BoseHubbardParams {
        BoseHubbardParams::new(l, n, g, 1.0).unwrap()
    }

    #[test]
    fn basis_examples() {
        let b = enumerate_basis(2, 2, DEFAULT_MAX_DIM).unwrap();
        let occ: Vec<_> = b.states().iter().map(|s| s.occupations.clone()).collect();
        assert_eq!(occ, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_basis(6, 6, DEFAULT_MAX_DIM).unwrap().len(), 462);
        assert_eq!(enumerate_basis(1, 5, DEFAULT_MAX_DIM).unwrap().len(), 1);
        assert_eq!(basis_dimension(8, 8), 6435);
        assert!(matches!(
            enumerate_basis(8, 8, 5000),
            Err(Error::DimensionTooLarge {
                dimension: 6435,
                max: 5000
            })
        ));
    }

    #[test]
    fn basis_is_ordered_and_indexed() {
        let b = enumerate_basis(4, 5, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(b.len(), basis_dimension(4, 5));
        assert!(b.states().windows(2).all(|w| w[0] > w[1]));
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(s.total(), 5);
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn two_site_single_boson() {
        let p = params(2, 1, 0.7);
        assert_eq!(p.bonds(), vec![(0, 1)]);
        let b = enumerate_basis(2, 1, DEFAULT_MAX_DIM).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        assert_eq!(h.matrix, Matrix::from_rows(&[&[0.0, -0.7], &[-0.7, 0.0]]));
        let g = ground_state(&p, &b).unwrap();
        assert!((g.energy + 0.7).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.vector[0].abs() - s).abs() < 1e-12 && (g.vector[1].abs() - s).abs() < 1e-12);
        assert!(g.vector[0] * g.vector[1] > 0.0);
    }

    #[test]
    fn interaction_diagonal() {
        let p = params(6, 6, 0.0);
        let b = enumerate_basis(6, 6, DEFAULT_MAX_DIM).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        let first = b.index_of(&FockState::new(vec![2, 0, 1, 1, 1, 1])).unwrap();
        assert_eq!(h.matrix[(first, first)], 2.0);
        let mott = b.index_of(&FockState::uniform(6)).unwrap();
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i != j {
                    assert_eq!(h.matrix[(i, j)], 0.0);
                }
            }
            if i != mott {
                assert!(h.matrix[(i, i)] > 0.0);
            }
        }
        assert_eq!(h.matrix[(mott, mott)], 0.0);
    }

    #[test]
    fn ground_states() {
        let b = enumerate_basis(6, 6, DEFAULT_MAX_DIM).unwrap();
        let mott = ground_state(&params(6, 6, 0.0), &b).unwrap();
        assert_eq!(mott.vector, b.basis_vector(&FockState::uniform(6)).unwrap());
        assert!(!mott.is_degenerate());
        let weak = ground_state(&params(6, 6, 0.5), &b).unwrap();
        assert!(weak.energy < 0.0);
        assert!(!weak.is_degenerate());
        // zero hopping below unit filling: many zero-energy states
        let b = enumerate_basis(4, 2, DEFAULT_MAX_DIM).unwrap();
        let flat = ground_state(&params(4, 2, 0.0), &b).unwrap();
        assert!(flat.is_degenerate());
        assert!(matches!(flat.degeneracy(), Some(Error::DegenerateGroundState { .. })));
    }

    #[test]
    fn quench_weights() {
        let same = quench(&params(4, 4, 0.0), 0.8, 0.8).unwrap();
        assert!((same.decomposition.weights[0] - 1.0).abs() < 1e-10);

        let b = enumerate_basis(2, 1, DEFAULT_MAX_DIM).unwrap();
        let start = b.basis_vector(&FockState::new(vec![1, 0])).unwrap();
        let h = build_hamiltonian(&params(2, 1, 3.0), &b).unwrap();
        let d = spectral_weights(&start, &eigendecompose(&h).unwrap()).unwrap();
        assert_eq!(d.energies.len(), 2);
        assert!((d.energies[0] + 3.0).abs() < 1e-14 && (d.energies[1] - 3.0).abs() < 1e-14);
        assert!(d.weights.iter().all(|p| (p - 0.5).abs() < 1e-14));

        assert!(matches!(
            spectral_weights(&[1.0, 1.0], &eigendecompose(&h).unwrap()),
            Err(Error::UnnormalizedInput { .. })
        ));
    }

    #[test]
    fn translation_invariant_ldos() {
        let p = params(5, 4, 1.3);
        let b = enumerate_basis(5, 4, DEFAULT_MAX_DIM).unwrap();
        let eig = eigendecompose(&build_hamiltonian(&p, &b).unwrap()).unwrap();
        let start = FockState::new(vec![2, 0, 1, 0, 1]);
        let grouped = |s: &FockState| {
            let v = b.basis_vector(s).unwrap();
            let d = spectral_weights(&v, &eig).unwrap();
            // sum weights over degenerate levels
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (e, w) in d.energies.iter().zip(&d.weights) {
                match out.last_mut() {
                    Some((e0, w0)) if (e - *e0).abs() < 1e-9 => *w0 += w,
                    _ => out.push((*e, *w)),
                }
            }
            out
        };
        let reference = grouped(&start);
        for shift in 1..5 {
            let rotated = grouped(&start.rotated(shift));
            assert_eq!(rotated.len(), reference.len());
            for ((e0, w0), (e1, w1)) in reference.iter().zip(&rotated) {
                assert!((e0 - e1).abs() < 1e-9 && (w0 - w1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn open_chain_has_one_fewer_bond() {
        let p = params(5, 1, 1.0);
        assert_eq!(p.bonds().len(), 5);
        assert_eq!(p.with_boundary(Boundary::Open).bonds().len(), 4);
        assert!(params(1, 3, 1.0).bonds().is_empty());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BoseHubbardParams::new(0, 1, 1.0, 1.0).is_err());
        assert!(BoseHubbardParams::new(2, 1, -1.0, 1.0).is_err());
        assert!(BoseHubbardParams::new(2, 1, 1.0, 0.0).is_err());
        let b = enumerate_basis(3, 2, DEFAULT_MAX_DIM).unwrap();
        assert!(build_hamiltonian(&params(3, 3, 1.0), &b).is_err());
        assert!(SpectralDecomposition::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
    }
}
