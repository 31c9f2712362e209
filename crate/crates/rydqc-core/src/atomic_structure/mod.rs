//! Hydrogenic Rydberg levels, matrix elements and single-atom field terms.

mod angular;
mod radial;
mod species;

pub use angular::{assoc_legendre, c_kq, c_kq_element, clebsch_gordan, wigner_3j};
pub use radial::{hydrogenic_radial, radial_integral, GRID_STEP};
pub use species::{DefectRow, FineStructure, Species, SpeciesTable};

use libm::lgamma;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::constants::{A0, C, E_CHARGE, HBAR, MU_B, TWO_PI};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RydbergLevel {
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub species: Species,
    pub defect: f64,
}

impl RydbergLevel {
    pub fn new(n: u32, l: u32, m: i32, species: Species, defect: f64) -> Result<Self> {
        if n == 0 || l >= n || m.unsigned_abs() > l {
            return invalid(format!("invalid level n={n} l={l} m={m}"));
        }
        if !defect.is_finite() || defect < 0.0 || defect >= n as f64 {
            return invalid(format!("invalid quantum defect {defect} for n={n}"));
        }
        Ok(Self {
            n,
            l,
            m,
            species,
            defect,
        })
    }

    pub fn hydrogenic(n: u32, l: u32, m: i32) -> Result<Self> {
        Self::new(n, l, m, Species::Hydrogenic, 0.0)
    }

    /// Rb-87 level with the tabulated defect for l, zero above the table.
    pub fn rb87(n: u32, l: u32, m: i32, table: &SpeciesTable, fs: FineStructure) -> Result<Self> {
        let d = table.defect(Species::Rb87, n, l, fs);
        Self::new(n, l, m, Species::Rb87, d)
    }

    /// Circular state |nC⟩ with m = +(n−1).
    pub fn circular(n: u32) -> Result<Self> {
        Self::new(n, n.saturating_sub(1), n as i32 - 1, Species::Rb87, 0.0)
    }

    pub fn is_circular(&self) -> bool {
        self.l + 1 == self.n && self.m.unsigned_abs() + 1 == self.n
    }

    pub fn n_eff(&self) -> f64 {
        self.n as f64 - self.defect
    }

    pub fn with_m(&self, m: i32) -> Result<Self> {
        Self::new(self.n, self.l, m, self.species, self.defect)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// V/cm
    pub ez: f64,
    /// G
    pub bz: f64,
}

impl FieldConfig {
    pub fn new(ez: f64, bz: f64) -> Result<Self> {
        if !ez.is_finite() || !bz.is_finite() {
            return invalid("field values must be finite");
        }
        Ok(Self { ez, bz })
    }

    pub fn zero() -> Self {
        Self { ez: 0.0, bz: 0.0 }
    }

    /// Negative components are allowed but unusual.
    pub fn is_signed(&self) -> bool {
        self.ez < 0.0 || self.bz < 0.0
    }
}

/// Binding energy as an angular frequency (negative).
pub fn level_energy(level: &RydbergLevel) -> f64 {
    let ns = level.n_eff();
    -TWO_PI * C * level.species.rydberg_constant() / (ns * ns)
}

/// ⟨a| r^k |b⟩ in m^k.
pub fn radial_matrix_element(a: &RydbergLevel, b: &RydbergLevel, k: i32) -> Result<f64> {
    Ok(radial_matrix_element_au(a, b, k)? * A0.powi(k))
}

/// ⟨a| r^k |b⟩ in a0^k.
pub fn radial_matrix_element_au(a: &RydbergLevel, b: &RydbergLevel, k: i32) -> Result<f64> {
    radial_integral(a.n, a.l, a.defect, b.n, b.l, b.defect, k)
}

/// log of |ψ_nC|² in atomic units (a0⁻³), r in a0.
pub fn circular_log_density_au(n: u32, r: f64, theta: f64) -> f64 {
    let l = (n - 1) as f64;
    let nf = n as f64;
    // radial: (2/n)^{2n+1}/(2n)! r^{2l} e^{-2r/n}
    let log_r = (2.0 * nf + 1.0) * (2.0 / nf).ln() - lgamma(2.0 * nf + 1.0) + 2.0 * l * r.ln()
        - 2.0 * r / nf;
    // |Y_ll|² = (2l+1)!/(4π 4^l (l!)²) sin^{2l}θ
    let log_y = lgamma(2.0 * l + 2.0)
        - (4.0 * std::f64::consts::PI).ln()
        - l * 4f64.ln()
        - 2.0 * lgamma(l + 1.0)
        + 2.0 * l * theta.sin().ln();
    log_r + log_y
}

/// |ψ_nC(r, θ)|² in m⁻³, r in m.
pub fn circular_density(n: u32, r: f64, theta: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n >= 2 && theta.sin() == 0.0 {
        return 0.0;
    }
    circular_log_density_au(n, r / A0, theta).exp() / A0.powi(3)
}

/// Manifold-n Stark and Zeeman Hamiltonian (rad/s) over {|n,l,m⟩ : m ≥ m_min},
/// relative to the field-free manifold energy. The electron charge is −e, so
/// the Stark term is +e Ez z.
pub fn single_atom_hamiltonian(
    n: u32,
    fields: &FieldConfig,
    m_min: i32,
) -> Result<(Vec<RydbergLevel>, Array2<f64>)> {
    if m_min < 0 || m_min > n as i32 - 1 {
        return invalid(format!("m_min {m_min} outside [0, {}]", n - 1));
    }
    let mut basis = Vec::new();
    for l in 0..n {
        for m in m_min..=l as i32 {
            basis.push(RydbergLevel::new(n, l, m, Species::Rb87, 0.0)?);
        }
    }
    let h = field_hamiltonian(&basis, fields)?;
    Ok((basis, h))
}

/// Zeeman diagonal plus same-manifold Stark couplings over an arbitrary level
/// list (no binding energies).
pub fn field_hamiltonian(basis: &[RydbergLevel], fields: &FieldConfig) -> Result<Array2<f64>> {
    let dim = basis.len();
    let mut h = Array2::zeros((dim, dim));
    let zeeman = MU_B * fields.bz * 1e-4 / HBAR;
    let stark = E_CHARGE * fields.ez * 100.0 * A0 / HBAR;
    for (i, a) in basis.iter().enumerate() {
        h[[i, i]] = a.m as f64 * zeeman;
        if fields.ez == 0.0 {
            continue;
        }
        for (j, b) in basis.iter().enumerate().skip(i + 1) {
            if a.n != b.n || a.m != b.m || a.l.abs_diff(b.l) != 1 || a.defect != b.defect {
                continue;
            }
            let ang = c_kq_element(a.l as i64, a.m as i64, 1, 0, b.l as i64, b.m as i64);
            let v = stark * ang * radial_matrix_element_au(a, b, 1)?;
            h[[i, j]] = v;
            h[[j, i]] = v;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
    Pi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipoleChannel {
    pub to: RydbergLevel,
    /// Labelled by m_upper − m_lower.
    pub polarization: Polarization,
    /// |ω_to − ω_from| in rad/s.
    pub frequency: f64,
    /// True when `to` lies below `from`.
    pub emission: bool,
    /// |⟨to| r |from⟩|² in m².
    pub strength: f64,
}

/// Dipole-allowed partners of `from` with n′ ≤ n_max, excluding its own manifold.
pub fn dipole_channels(from: &RydbergLevel, n_max: u32) -> Result<Vec<DipoleChannel>> {
    let mut out = Vec::new();
    let e0 = level_energy(from);
    for n2 in 1..=n_max {
        if n2 == from.n {
            continue;
        }
        for l2 in [from.l as i64 - 1, from.l as i64 + 1] {
            if l2 < 0 || l2 >= n2 as i64 {
                continue;
            }
            for q in -1..=1i64 {
                let m2 = from.m as i64 + q;
                if m2.abs() > l2 {
                    continue;
                }
                let to = RydbergLevel::new(n2, l2 as u32, m2 as i32, from.species, 0.0)?;
                let ang = c_kq_element(l2, m2, 1, q, from.l as i64, from.m as i64);
                let rad = radial_matrix_element(&to, from, 1)?;
                let e1 = level_energy(&to);
                let emission = e1 < e0;
                let dm_up = if emission {
                    from.m - to.m
                } else {
                    to.m - from.m
                };
                let polarization = match dm_up {
                    1 => Polarization::SigmaPlus,
                    -1 => Polarization::SigmaMinus,
                    _ => Polarization::Pi,
                };
                out.push(DipoleChannel {
                    to,
                    polarization,
                    frequency: (e1 - e0).abs(),
                    emission,
                    strength: (rad * ang).powi(2),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_validation() {
        assert!(RydbergLevel::hydrogenic(5, 5, 0).is_err());
        assert!(RydbergLevel::hydrogenic(5, 2, 3).is_err());
        assert!(RydbergLevel::circular(60).unwrap().is_circular());
        assert!(!RydbergLevel::hydrogenic(60, 59, 58).unwrap().is_circular());
    }

    #[test]
    fn energy_increases_towards_threshold() {
        let mut prev = f64::NEG_INFINITY;
        for n in [10, 50, 100, 1000, 10000] {
            let e = level_energy(&RydbergLevel::circular(n).unwrap());
            assert!(e < 0.0 && e > prev);
            prev = e;
        }
    }

    #[test]
    fn circular_transition_in_stopband() {
        let f = (level_energy(&RydbergLevel::circular(60).unwrap())
            - level_energy(&RydbergLevel::circular(59).unwrap()))
            / TWO_PI;
        let r = crate::constants::rydberg_reduced(crate::constants::M_RB87);
        let oracle = r * C * (1.0 / 59f64.powi(2) - 1.0 / 60f64.powi(2));
        assert!((f - oracle).abs() < 1e-9 * oracle);
        assert!(f > 20e9 && f < 40e9, "{f}");
    }

    #[test]
    fn rb_s_state_below_hydrogenic() {
        let t = SpeciesTable::builtin();
        let s = RydbergLevel::rb87(55, 0, 0, t, FineStructure::Stretched).unwrap();
        assert!((s.defect - 3.1312).abs() < 1e-3);
        assert!(
            level_energy(&s)
                < level_energy(&RydbergLevel::new(55, 0, 0, Species::Rb87, 0.0).unwrap())
        );
    }

    #[test]
    fn pure_zeeman_and_zero_field() {
        let (b, h) = single_atom_hamiltonian(20, &FieldConfig::zero(), 14).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
        let (b2, h2) =
            single_atom_hamiltonian(20, &FieldConfig::new(0.0, 1.39).unwrap(), 14).unwrap();
        assert_eq!(b.len(), b2.len());
        let ic = b2.iter().position(|l| l.is_circular()).unwrap();
        let expect = 19.0 * MU_B * 1.39e-4 / HBAR;
        assert!((h2[[ic, ic]] - expect).abs() < 1e-9 * expect);
        for i in 0..h2.nrows() {
            for j in 0..h2.ncols() {
                if i != j {
                    assert_eq!(h2[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn density_vanishes_on_axis() {
        assert_eq!(circular_density(5, 10.0 * A0, 0.0), 0.0);
    }
}
