//! CODATA 2018 values in SI units.

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const H: f64 = 6.626_070_15e-34;
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const M_E: f64 = 9.109_383_701_5e-31;
pub const K_B: f64 = 1.380_649e-23;
pub const A0: f64 = 5.291_772_109_03e-11;
pub const RYDBERG_INF: f64 = 10_973_731.568_160;
pub const MU_B: f64 = 9.274_010_078_3e-24;
pub const AMU: f64 = 1.660_539_066_60e-27;
pub const M_PROTON: f64 = 1.672_621_923_69e-27;
pub const M_RB87: f64 = 86.909_180_531 * AMU;
pub const R_ELECTRON: f64 = 2.817_940_326_2e-15;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Hartree energy expressed as an angular frequency.
pub const HARTREE_RAD: f64 = 2.0 * RYDBERG_INF * C * TWO_PI;

/// Rydberg constant corrected for the nuclear mass `m_nuc` (kg), in 1/m.
pub fn rydberg_reduced(m_nuc: f64) -> f64 {
    RYDBERG_INF / (1.0 + M_E / m_nuc)
}
