//! Spin-chain Hamiltonians for storage-only and four-level arrays.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interactions::InteractionCoefficients;
use crate::quantum_core::{assemble, CMat, HamiltonianTerm, OpLabel, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelSet {
    /// {0s, 1s} per site
    Storage2,
    /// {0s, 1s, 0a, 1a} per site
    Full4,
}

impl LevelSet {
    pub fn local_dim(self) -> usize {
        match self {
            LevelSet::Storage2 => 2,
            LevelSet::Full4 => 4,
        }
    }
}

/// Largest Hilbert-space dimension the dense simulators accept.
pub const MAX_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinChainConfig {
    pub n_atoms: usize,
    pub levels: LevelSet,
    pub coefficients: InteractionCoefficients,
    /// nearest-neighbour spacing, m
    pub separation: f64,
    pub open_chain: bool,
    /// pairs farther apart than this many sites are dropped
    pub range_cutoff: Option<usize>,
    /// added to J_ss, rad/s
    pub j_offset: f64,
}

impl SpinChainConfig {
    pub fn new(
        n_atoms: usize,
        levels: LevelSet,
        coefficients: InteractionCoefficients,
    ) -> Result<Self> {
        let c = Self {
            n_atoms,
            levels,
            separation: coefficients.separation,
            coefficients,
            open_chain: true,
            range_cutoff: None,
            j_offset: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=10).contains(&self.n_atoms) {
            return invalid(format!("n_atoms = {} outside [2, 10]", self.n_atoms));
        }
        if self.dim() > MAX_DIM {
            return Err(Error::Budget(format!(
                "Hilbert space dimension {} exceeds {MAX_DIM}",
                self.dim()
            )));
        }
        if !(self.separation > 0.0) {
            return invalid("separation must be positive");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.levels.local_dim().pow(self.n_atoms as u32)
    }

    pub fn local_dim(&self) -> usize {
        self.levels.local_dim()
    }

    /// Site distance in lattice units, or None if beyond the cutoff.
    pub fn distance(&self, i: usize, j: usize) -> Option<usize> {
        let d = i.abs_diff(j);
        let d = if self.open_chain {
            d
        } else {
            d.min(self.n_atoms - d)
        };
        match self.range_cutoff {
            Some(c) if d > c => None,
            _ if d == 0 => None,
            _ => Some(d),
        }
    }

    pub fn pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n_atoms {
            for j in i + 1..self.n_atoms {
                if let Some(d) = self.distance(i, j) {
                    out.push((i, j, d));
                }
            }
        }
        out
    }
}

/// Which coefficient groups enter the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermMask {
    /// J and J_z couplings
    pub couplings: bool,
    /// Δ terms
    pub detunings: bool,
}

impl Default for TermMask {
    fn default() -> Self {
        Self {
            couplings: true,
            detunings: true,
        }
    }
}

/// Per-pair operators at unit geometric scale, ready to be weighted.
#[derive(Debug, Clone)]
pub struct ChainOperators {
    /// (i, j, distance, operator at 1/distance⁶)
    pub pairs: Vec<(usize, usize, usize, CMat)>,
    /// S_z on each site (storage block)
    pub site_sz: Vec<CMat>,
    /// S̄_z on each site (active block), full4 only
    pub site_szbar: Vec<CMat>,
    pub dim: usize,
}

fn pair_terms(
    c: &InteractionCoefficients,
    j_offset: f64,
    levels: LevelSet,
    i: usize,
    j: usize,
    mask: TermMask,
) -> Vec<HamiltonianTerm> {
    use OpLabel::*;
    let t = HamiltonianTerm::new;
    let mut v = Vec::new();
    if mask.couplings {
        let jss = c.j_ss + j_offset;
        v.push(t(c.jz_ss, &[i, j], &[Sz, Sz]));
        v.push(t(jss, &[i, j], &[Sx, Sx]));
        v.push(t(jss, &[i, j], &[Sy, Sy]));
    }
    if mask.detunings {
        v.push(t(c.delta_ss, &[i, j], &[Sz, N]));
        v.push(t(c.delta_ss, &[i, j], &[N, Sz]));
    }
    if levels == LevelSet::Full4 {
        if mask.couplings {
            v.push(t(c.jz_sa, &[i, j], &[Sz, SbarZ]));
            v.push(t(c.jz_sa, &[i, j], &[SbarZ, Sz]));
            v.push(t(c.jz_aa, &[i, j], &[SbarZ, SbarZ]));
        }
        if mask.detunings {
            v.push(t(c.delta_sa, &[i, j], &[Sz, Nbar]));
            v.push(t(c.delta_sa, &[i, j], &[Nbar, Sz]));
            v.push(t(c.delta_as, &[i, j], &[N, SbarZ]));
            v.push(t(c.delta_as, &[i, j], &[SbarZ, N]));
            v.push(t(c.delta_aa, &[i, j], &[SbarZ, Nbar]));
            v.push(t(c.delta_aa, &[i, j], &[Nbar, SbarZ]));
        }
    }
    v
}

impl ChainOperators {
    pub fn new(config: &SpinChainConfig, mask: TermMask) -> Result<Self> {
        config.validate()?;
        let (n, ld) = (config.n_atoms, config.local_dim());
        let mut pairs = Vec::new();
        for (i, j, d) in config.pairs() {
            let terms = pair_terms(
                &config.coefficients,
                config.j_offset,
                config.levels,
                i,
                j,
                mask,
            );
            pairs.push((i, j, d, assemble(&terms, n, ld)?));
        }
        let site = |l: OpLabel| -> Result<Vec<CMat>> {
            (0..n)
                .map(|s| assemble(&[HamiltonianTerm::new(1.0, &[s], &[l])], n, ld))
                .collect()
        };
        let site_sz = site(OpLabel::Sz)?;
        let site_szbar = if config.levels == LevelSet::Full4 {
            site(OpLabel::SbarZ)?
        } else {
            Vec::new()
        };
        Ok(Self {
            pairs,
            site_sz,
            site_szbar,
            dim: config.dim(),
        })
    }

    /// Σ_pairs f_ij / d⁶ · O_ij, with f_ij = 1 − 6 x_ij / r_ij when displacements are given.
    pub fn interaction(&self, separation: f64, displacements: Option<&[f64]>) -> CMat {
        let mut h = CMat::zeros((self.dim, self.dim));
        for (i, j, d, op) in &self.pairs {
            let r = *d as f64;
            let mut s = r.powi(-6);
            if let Some(x) = displacements {
                s *= 1.0 - 6.0 * (x[*j] - x[*i]) / (r * separation);
            }
            h.scaled_add(C64::new(s, 0.0), op);
        }
        h
    }
}

/// Interaction Hamiltonian of the chain, optionally with per-site displacements along the chain axis.
pub fn build_hamiltonian(config: &SpinChainConfig, displacements: Option<&[f64]>) -> Result<CMat> {
    if let Some(x) = displacements {
        if x.len() != config.n_atoms {
            return Err(Error::Dimension {
                expected: config.n_atoms,
                got: x.len(),
            });
        }
    }
    Ok(ChainOperators::new(config, TermMask::default())?
        .interaction(config.separation, displacements))
}

/// Σ_i S_a^i on the storage block for Cartesian axis index `k`.
pub fn global_drive(config: &SpinChainConfig, k: usize) -> Result<CMat> {
    let label = [OpLabel::Sx, OpLabel::Sy, OpLabel::Sz][k];
    let terms: Vec<HamiltonianTerm> = (0..config.n_atoms)
        .map(|s| HamiltonianTerm::new(1.0, &[s], &[label]))
        .collect();
    assemble(&terms, config.n_atoms, config.local_dim())
}

/// Storage ↔ active swap |0a⟩⟨0s| + |1a⟩⟨1s| + h.c. on one site.
pub fn pi_sa_local() -> CMat {
    let mut m = CMat::zeros((4, 4));
    for (a, b) in [(0, 2), (1, 3)] {
        m[[a, b]] = C64::new(1.0, 0.0);
        m[[b, a]] = C64::new(1.0, 0.0);
    }
    m
}

/// Indices of the all-storage subspace {0s, 1s}^⊗n.
pub fn storage_subspace(config: &SpinChainConfig) -> Vec<usize> {
    let ld = config.local_dim();
    (0..config.dim())
        .filter(|&idx| {
            let mut x = idx;
            (0..config.n_atoms).all(|_| {
                let d = x % ld;
                x /= ld;
                d < 2
            })
        })
        .collect()
}
