//! BB1 composite pulses against static amplitude errors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quantum_core::{dagger, pauli, CMat};

/// exp(−iθ(cos φ σ_x + sin φ σ_y)/2)
pub fn phased_rotation(phase: f64, angle: f64) -> CMat {
    let n = pauli(0).mapv(|z| z * phase.cos()) + pauli(1).mapv(|z| z * phase.sin());
    CMat::eye(2).mapv(|z| z * (angle / 2.0).cos())
        + n.mapv(|z| z * Complex64::new(0.0, -(angle / 2.0).sin()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bb1 {
    /// (phase, nominal angle) in time order
    pub pulses: Vec<(f64, f64)>,
    /// 1 − |Tr(U_target† U)/2|² with the error applied to every pulse
    pub infidelity: f64,
    /// same for the bare pulse
    pub bare_infidelity: f64,
}

fn gate_infidelity(target: &CMat, u: &CMat) -> f64 {
    let tr: Complex64 = dagger(target).dot(u).diag().sum();
    (1.0 - (tr / 2.0).norm_sqr()).max(0.0)
}

/// θ_0 followed by π_φ 2π_{3φ} π_φ with φ = arccos(−θ/4π).
pub fn bb1_sequence(theta: f64, epsilon: f64) -> Result<Bb1> {
    if epsilon.abs() >= 0.2 {
        return invalid(format!("|ε| = {} must be below 0.2", epsilon.abs()));
    }
    let phi = (-theta / (4.0 * PI)).acos();
    let pulses = vec![(0.0, theta), (phi, PI), (3.0 * phi, 2.0 * PI), (phi, PI)];
    let mut u = CMat::eye(2);
    for &(p, a) in &pulses {
        u = phased_rotation(p, a * (1.0 + epsilon)).dot(&u);
    }
    let target = phased_rotation(0.0, theta);
    Ok(Bb1 {
        infidelity: gate_infidelity(&target, &u),
        bare_infidelity: gate_infidelity(&target, &phased_rotation(0.0, theta * (1.0 + epsilon))),
        pulses,
    })
}
