//! Effective spin couplings between circular-state atoms and the ancilla.

mod multipole;
mod pair;

pub use multipole::{multipole_element, one_body_element, MultipoleTable};
pub use pair::{
    build_pair_basis, BlockLevel, CircularPair, MixedPair, PairBasis, PairShift, PairWindows,
    OVERLAP_THRESHOLD,
};

use serde::Serialize;

use crate::atomic_structure::{FieldConfig, FineStructure, RydbergLevel, Species, SpeciesTable};
use crate::constants::TWO_PI;
use crate::error::{invalid, Error, Result};

/// Principal quantum numbers of the storage (0s, 1s) and active (0a, 1a) states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct QubitLevels {
    pub storage: (u32, u32),
    pub active: (u32, u32),
}

impl Default for QubitLevels {
    fn default() -> Self {
        Self {
            storage: (59, 61),
            active: (56, 64),
        }
    }
}

/// Effective couplings (rad/s) in the Pauli convention S_z = ±1, with the first
/// state of each qubit mapped to S_z = +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionCoefficients {
    pub j_ss: f64,
    pub jz_ss: f64,
    pub jz_sa: f64,
    pub jz_aa: f64,
    pub delta_ss: f64,
    pub delta_sa: f64,
    pub delta_as: f64,
    pub delta_aa: f64,
    /// m
    pub separation: f64,
    pub fields: FieldConfig,
    /// residual exchange between 1s and 1a, rad/s
    pub exchange_1s_1a: f64,
}

impl InteractionCoefficients {
    /// Reference coefficient set at 12 μm, 0.313 V/cm, 1.39 G.
    pub fn reference_table() -> Self {
        let h = |x: f64| TWO_PI * x;
        Self {
            j_ss: h(-918.0),
            jz_ss: h(1840.0),
            jz_sa: h(-10620.0),
            jz_aa: h(33610.0),
            delta_ss: h(-1510.0),
            delta_sa: h(144.0),
            delta_as: h(-6600.0),
            delta_aa: h(-6240.0),
            separation: 12e-6,
            fields: FieldConfig {
                ez: 0.313,
                bz: 1.39,
            },
            exchange_1s_1a: h(-0.9),
        }
    }

    pub fn zero() -> Self {
        Self {
            j_ss: 0.0,
            jz_ss: 0.0,
            jz_sa: 0.0,
            jz_aa: 0.0,
            delta_ss: 0.0,
            delta_sa: 0.0,
            delta_as: 0.0,
            delta_aa: 0.0,
            separation: 12e-6,
            fields: FieldConfig::zero(),
            exchange_1s_1a: 0.0,
        }
    }

    /// (name, value) for the eight couplings in table order.
    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("J_ss", self.j_ss),
            ("Jz_ss", self.jz_ss),
            ("Jz_sa", self.jz_sa),
            ("Jz_aa", self.jz_aa),
            ("Delta_ss", self.delta_ss),
            ("Delta_sa", self.delta_sa),
            ("Delta_as", self.delta_as),
            ("Delta_aa", self.delta_aa),
        ]
    }

    /// All couplings multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            j_ss: self.j_ss * s,
            jz_ss: self.jz_ss * s,
            jz_sa: self.jz_sa * s,
            jz_aa: self.jz_aa * s,
            delta_ss: self.delta_ss * s,
            delta_sa: self.delta_sa * s,
            delta_as: self.delta_as * s,
            delta_aa: self.delta_aa * s,
            exchange_1s_1a: self.exchange_1s_1a * s,
            ..*self
        }
    }

    /// CZ time π/(4 Jz_aa).
    pub fn t_pi(&self) -> f64 {
        std::f64::consts::PI / (4.0 * self.jz_aa.abs())
    }
}

fn check_separation(separation: f64) -> Result<()> {
    if !(3e-6..=50e-6).contains(&separation) {
        return invalid(format!("separation {separation} m outside [3, 50] μm"));
    }
    Ok(())
}

/// Both atoms in the array plane, displaced along x.
fn in_plane(separation: f64) -> [f64; 3] {
    [separation, 0.0, 0.0]
}

/// Storage-pair couplings only: (J_ss, Jz_ss, Delta_ss).
#[derive(Debug, Clone)]
pub struct StoragePairs {
    nn: CircularPair,
    pp: CircularPair,
    np: CircularPair,
}

impl StoragePairs {
    pub fn new(levels: &QubitLevels, windows: &PairWindows) -> Result<Self> {
        let (a, b) = levels.storage;
        Ok(Self {
            nn: CircularPair::new(a, a, windows)?,
            pp: CircularPair::new(b, b, windows)?,
            np: CircularPair::new(a, b, windows)?,
        })
    }

    pub fn evaluate(&self, separation: f64, fields: &FieldConfig) -> Result<(f64, f64, f64)> {
        let r = in_plane(separation);
        let vnn = self.nn.solve(r, fields)?.mean;
        let vpp = self.pp.solve(r, fields)?.mean;
        let np = self.np.solve(r, fields)?;
        let jz = (vnn - 2.0 * np.mean + vpp) / 4.0;
        Ok((np.exchange, jz, (vnn - vpp) / 4.0))
    }
}

/// Full coefficient extraction at one geometry and field point.
pub fn extract_coefficients(
    separation: f64,
    fields: &FieldConfig,
    windows: &PairWindows,
) -> Result<InteractionCoefficients> {
    extract_coefficients_for(&QubitLevels::default(), separation, fields, windows)
}

pub fn extract_coefficients_for(
    levels: &QubitLevels,
    separation: f64,
    fields: &FieldConfig,
    windows: &PairWindows,
) -> Result<InteractionCoefficients> {
    check_separation(separation)?;
    let r = in_plane(separation);
    let (s0, s1) = levels.storage;
    let (a0, a1) = levels.active;
    let solve = |x: u32, y: u32| CircularPair::new(x, y, windows)?.solve(r, fields);
    let (j_ss, jz_ss, delta_ss) =
        StoragePairs::new(levels, windows)?.evaluate(separation, fields)?;
    let v_a00 = solve(a0, a0)?.mean;
    let v_a11 = solve(a1, a1)?.mean;
    let v_a01 = solve(a0, a1)?.mean;
    let v_00 = solve(s0, a0)?.mean;
    let v_01 = solve(s0, a1)?.mean;
    let v_10 = solve(s1, a0)?.mean;
    let p_11 = solve(s1, a1)?;
    let v_11 = p_11.mean;
    let out = InteractionCoefficients {
        j_ss,
        jz_ss,
        jz_sa: (v_00 - v_01 - v_10 + v_11) / 4.0,
        jz_aa: (v_a00 - 2.0 * v_a01 + v_a11) / 4.0,
        delta_ss,
        delta_sa: (v_00 + v_01 - v_10 - v_11) / 4.0,
        delta_as: (v_00 - v_01 + v_10 - v_11) / 4.0,
        delta_aa: (v_a00 - v_a11) / 4.0,
        separation,
        fields: *fields,
        exchange_1s_1a: p_11.exchange,
    };
    for (name, v) in out.named() {
        if !v.is_finite() {
            return Err(Error::Convergence {
                what: format!("{name} is not finite"),
                achieved: v,
            });
        }
    }
    Ok(out)
}

/// Points on the dipolar contour Jz_ss = −2 J_ss: for each Bz, every Ez root
/// bracketed by the grid, refined until |Jz_ss + 2 J_ss| < 2π × 1 Hz.
pub fn tune_dipolar_condition(
    separation: f64,
    bz_values: &[f64],
    ez_grid: &[f64],
    windows: &PairWindows,
) -> Result<Vec<FieldConfig>> {
    check_separation(separation)?;
    if ez_grid.len() < 2 {
        return invalid("need at least two Ez grid points");
    }
    let pairs = StoragePairs::new(&QubitLevels::default(), windows)?;
    let residual = |ez: f64, bz: f64| -> Result<f64> {
        let (j, jz, _) = pairs.evaluate(separation, &FieldConfig::new(ez, bz)?)?;
        Ok(jz + 2.0 * j)
    };
    let tol = TWO_PI * 1.0;
    let mut out = Vec::new();
    for &bz in bz_values {
        let vals: Vec<f64> = ez_grid
            .iter()
            .map(|&e| residual(e, bz))
            .collect::<Result<_>>()?;
        for k in 0..ez_grid.len() - 1 {
            let (mut lo, mut hi) = (ez_grid[k], ez_grid[k + 1]);
            let (mut flo, fhi) = (vals[k], vals[k + 1]);
            if flo == 0.0 {
                out.push(FieldConfig::new(lo, bz)?);
                continue;
            }
            if flo.signum() == fhi.signum() {
                continue;
            }
            let mut root = None;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = residual(mid, bz)?;
                if fm.abs() < tol {
                    root = Some(mid);
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            match root {
                Some(ez) => out.push(FieldConfig::new(ez, bz)?),
                None => {
                    return Err(Error::Convergence {
                        what: format!("dipolar root at Bz={bz}"),
                        achieved: hi - lo,
                    });
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoSignChange {
            quantity: "Jz_ss + 2 J_ss".into(),
        });
    }
    Ok(out)
}

/// Low-ℓ ancilla state and its basis truncation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AncillaSpec {
    pub n: u32,
    pub l: u32,
    /// ancilla atom keeps |n − n_ancilla| ≤ n_window and l ≤ l_max
    pub n_window: u32,
    pub l_max: u32,
    pub fine_structure: FineStructureChoice,
    /// circular-atom truncation and pair energy window
    pub windows: PairWindows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FineStructureChoice {
    Stretched,
    Lower,
    Average,
}

impl From<FineStructureChoice> for FineStructure {
    fn from(c: FineStructureChoice) -> Self {
        match c {
            FineStructureChoice::Stretched => FineStructure::Stretched,
            FineStructureChoice::Lower => FineStructure::Lower,
            FineStructureChoice::Average => FineStructure::Average,
        }
    }
}

impl Default for AncillaSpec {
    fn default() -> Self {
        Self {
            n: 55,
            l: 0,
            n_window: 3,
            l_max: 4,
            fine_structure: FineStructureChoice::Stretched,
            windows: PairWindows {
                n_window: 2,
                m_depth: 3,
                m_total_window: 100,
                energy_window: TWO_PI * 20e9,
                multipole_order: 2,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncillaResult {
    /// V_{a,n}, rad/s
    pub shift: f64,
    pub overlap: f64,
    pub admixture: f64,
    pub basis_size: usize,
}

/// Pair problem for the ancilla and one circular atom; reusable across geometries.
pub fn ancilla_pair(n_circ: u32, spec: &AncillaSpec) -> Result<MixedPair> {
    let table = SpeciesTable::builtin();
    let fs: FineStructure = spec.fine_structure.into();
    let mut a_levels = Vec::new();
    let lo = spec.n.saturating_sub(spec.n_window).max(1);
    for n in lo..=spec.n + spec.n_window {
        for l in 0..=spec.l_max.min(n - 1) {
            for m in -(l as i32)..=l as i32 {
                a_levels.push(RydbergLevel::rb87(n, l, m, table, fs)?);
            }
        }
    }
    let target_a = RydbergLevel::rb87(spec.n, spec.l, 0, table, fs)?;
    let b_levels = pair::near_circular_levels(n_circ, &spec.windows, Species::Rb87)?;
    let target_b = RydbergLevel::circular(n_circ)?;
    MixedPair::new(a_levels, b_levels, (target_a, target_b), &spec.windows)
}

/// V_{a,n} for the ancilla at the origin and circular atom nC at `displacement` (m).
pub fn ancilla_interaction(
    n_circ: u32,
    fields: &FieldConfig,
    displacement: [f64; 3],
    spec: &AncillaSpec,
) -> Result<AncillaResult> {
    let p = ancilla_pair(n_circ, spec)?;
    let lvl = p.solve(displacement, fields)?;
    Ok(AncillaResult {
        shift: lvl.shift,
        overlap: lvl.overlap,
        admixture: admixture_probability(&lvl),
        basis_size: p.basis_size(),
    })
}

/// P_ε = 1 − |⟨unperturbed|eigenstate⟩|².
pub fn admixture_probability(level: &BlockLevel) -> f64 {
    (1.0 - level.overlap).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_windows_keep_only_target_and_swap() {
        let a = RydbergLevel::circular(59).unwrap();
        let b = RydbergLevel::circular(61).unwrap();
        let basis = build_pair_basis((a, b), &PairWindows::zero()).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis.contains(&a, &b) && basis.contains(&b, &a));
        let same = build_pair_basis((a, a), &PairWindows::zero()).unwrap();
        assert_eq!(same.len(), 1);
    }

    #[test]
    fn rejects_bad_separation() {
        assert!(extract_coefficients(1e-6, &FieldConfig::zero(), &PairWindows::zero()).is_err());
    }
}
