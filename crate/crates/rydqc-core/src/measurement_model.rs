//! Closed-form budget for ancilla blockade readout.

use std::f64::consts::PI;

use libm::lgamma;
use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementParams {
    /// blockade shift V_{a,64}, rad/s
    pub v_blockade: f64,
    /// ancilla Rydberg lifetime, s
    pub tau_a: f64,
    /// admixture of the blockading pair
    pub p_eps_target: f64,
    /// admixture for the non-blockading states
    pub p_eps_others: f64,
    /// admixture of the nearest neighbour
    pub p_eps_nn: f64,
    /// differential shift on a storage neighbour, rad/s
    pub neighbor_shift: f64,
    /// s
    pub t_meas: f64,
    /// s
    pub tau_circ: f64,
}

impl Default for MeasurementParams {
    fn default() -> Self {
        Self {
            v_blockade: 2.0 * PI * 20e6,
            tau_a: 200e-6,
            p_eps_target: 0.2,
            p_eps_others: 1e-4,
            p_eps_nn: 1e-3,
            neighbor_shift: 2.0 * PI * 1e3,
            t_meas: 10e-3,
            tau_circ: 3.33,
        }
    }
}

impl MeasurementParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.v_blockade, self.tau_a, self.t_meas, self.tau_circ];
        if pos.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return invalid("V, τ_a, t_meas and τ_circ must be positive and finite");
        }
        for p in [self.p_eps_target, self.p_eps_others, self.p_eps_nn] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("admixture probability {p} outside [0, 1]"));
            }
        }
        if !(self.neighbor_shift >= 0.0) {
            return invalid("neighbour shift must be ≥ 0");
        }
        if self.v_blockade * self.tau_a <= 10.0 {
            return invalid("blockade budget needs V·τ_a > 10");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockadeBudget {
    /// optimal ancilla Rabi frequency (πV²/τ_a)^{1/3}, rad/s
    pub omega_opt: f64,
    /// ½(π/(Vτ_a))^{2/3}
    pub p_g: f64,
    /// (π/(Vτ_a))^{4/3}
    pub p_sc: f64,
    /// P_ε(target)·P_sc
    pub p_p_blockaded: f64,
    /// P_ε(others)·P_g/2
    pub p_p_unblockaded: f64,
    /// (P_g/2)·P_ε(NN)
    pub p_p_nn: f64,
    /// mean ancilla excitation time 2π/(8Ω̃), s
    pub excitation_time: f64,
    pub phi: f64,
    /// φ²/6
    pub p_phi: f64,
}

pub fn blockade_gate_budget(p: &MeasurementParams) -> Result<BlockadeBudget> {
    p.validate()?;
    let x = PI / (p.v_blockade * p.tau_a);
    let omega_opt = (PI * p.v_blockade * p.v_blockade / p.tau_a).cbrt();
    let p_g = 0.5 * x.powf(2.0 / 3.0);
    let p_sc = x.powf(4.0 / 3.0);
    let excitation_time = 2.0 * PI / (8.0 * omega_opt);
    let phi = p.neighbor_shift * excitation_time;
    Ok(BlockadeBudget {
        omega_opt,
        p_g,
        p_sc,
        p_p_blockaded: p.p_eps_target * p_sc,
        p_p_unblockaded: p.p_eps_others * p_g / 2.0,
        p_p_nn: p_g / 2.0 * p.p_eps_nn,
        excitation_time,
        phi,
        p_phi: phi * phi / 6.0,
    })
}

/// The two-term error model whose minimum gives Ω̃ and P_g:
/// ε(Ω) = Ω²/(6V²) + π/(3Ωτ_a).
pub fn blockade_error_model(omega: f64, v: f64, tau_a: f64) -> f64 {
    omega * omega / (6.0 * v * v) + PI / (3.0 * omega * tau_a)
}

/// Largest array with one expected defect, 1/(P_g + t_meas/τ_circ); infinite when both vanish.
pub fn array_budget(p_g: f64, t_meas: f64, tau_circ: f64) -> Result<f64> {
    if !(p_g >= 0.0) || !(t_meas >= 0.0) || !(tau_circ > 0.0) {
        return invalid("need P_g ≥ 0, t_meas ≥ 0 and τ_circ > 0");
    }
    let p = p_g + t_meas / tau_circ;
    Ok(if p == 0.0 { f64::INFINITY } else { 1.0 / p })
}

/// Error of a majority vote over `k` independent shots with per-shot error p.
/// Ties (even k) count as half an error.
pub fn majority_vote_error(p: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || k == 0 {
        return invalid("need 0 ≤ p ≤ 1 and k ≥ 1");
    }
    let ln_c =
        |j: u32| lgamma(k as f64 + 1.0) - lgamma(j as f64 + 1.0) - lgamma((k - j) as f64 + 1.0);
    let term = |j: u32| {
        if (p == 0.0 && j > 0) || (p == 1.0 && j < k) {
            0.0
        } else {
            (ln_c(j) + j as f64 * p.ln() + (k - j) as f64 * (1.0 - p).ln()).exp()
        }
    };
    let mut err = 0.0;
    for j in 0..=k {
        if 2 * j > k {
            err += term(j);
        } else if 2 * j == k {
            err += 0.5 * term(j);
        }
    }
    Ok(err.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_budget_values() {
        let b = blockade_gate_budget(&MeasurementParams::default()).unwrap();
        assert!((b.omega_opt / (2.0 * PI) - 1.0e6).abs() < 1e3);
        assert!((b.p_g - 1.25e-3).abs() < 0.01e-3);
        assert!((b.p_sc - 6.25e-6).abs() < 0.05e-6);
    }

    #[test]
    fn majority_vote_limits() {
        assert!((majority_vote_error(0.1, 1).unwrap() - 0.1).abs() < 1e-15);
        let e3 = majority_vote_error(0.1, 3).unwrap();
        assert!((e3 - (3.0 * 0.01 * 0.9 + 0.001)).abs() < 1e-15);
        assert_eq!(majority_vote_error(0.0, 5).unwrap(), 0.0);
    }
}
