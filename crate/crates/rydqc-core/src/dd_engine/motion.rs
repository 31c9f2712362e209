//! Classical thermal motion of trapped atoms during decoupling and gates.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::chain::{global_drive, ChainOperators, LevelSet, SpinChainConfig, TermMask};
use super::sequence::PulseSequence;
use super::simulate::{cycle_segments, embed_storage, global_kron, ideal_site_cycle, Segment};
use crate::constants::{HBAR, K_B, M_RB87, TWO_PI};
use crate::error::{invalid, Error, Result};
use crate::quadrature::composite;
use crate::quantum_core::{
    haar_average_error, mean_sem, sample_rng, CMat, HermitianEigen, MonteCarloEstimate, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionConfig {
    /// K
    pub temperature: f64,
    /// rad/s
    pub trap_omega: f64,
    /// kg
    pub mass: f64,
    /// fractional trap-depth mismatch of the storage pair
    pub eta_s: f64,
    /// same for the active pair
    pub eta_a: f64,
    /// t_c = 2 trap periods when set, otherwise the sequence's own t_c
    pub matched: bool,
    pub samples: usize,
    pub seed: u64,
}

impl MotionConfig {
    pub fn new(temperature: f64, trap_omega: f64, eta_s: f64) -> Result<Self> {
        let m = Self {
            temperature,
            trap_omega,
            mass: M_RB87,
            eta_s,
            eta_a: eta_s,
            matched: true,
            samples: 20,
            seed: 1,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !(self.trap_omega > 0.0) || !(self.mass > 0.0) {
            return invalid("motion needs T ≥ 0, ω > 0 and m > 0");
        }
        if self.samples < 10 {
            return invalid(format!(
                "motion needs at least 10 samples, got {}",
                self.samples
            ));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        TWO_PI / self.trap_omega
    }

    /// rms position k_BT/(mω²)
    pub fn position_sigma(&self) -> f64 {
        (K_B * self.temperature / (self.mass * self.trap_omega * self.trap_omega)).sqrt()
    }

    pub fn velocity_sigma(&self) -> f64 {
        (K_B * self.temperature / self.mass).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MotionChannel {
    /// ½η′mω²x² S_z with η′ = η/2
    Eta,
    /// Δ terms modulated by the pair distance
    Delta,
    /// J, J_z modulated by the pair distance
    Couplings,
}

impl MotionChannel {
    pub const ALL: [MotionChannel; 3] = [
        MotionChannel::Eta,
        MotionChannel::Delta,
        MotionChannel::Couplings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MotionChannel::Eta => "eta",
            MotionChannel::Delta => "delta_ss",
            MotionChannel::Couplings => "J_terms",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelError {
    pub channel: String,
    pub per_cycle: MonteCarloEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotionResult {
    pub sequence: String,
    pub t_c: f64,
    pub cycles: usize,
    /// all channels together, error per atom per cycle
    pub total: MonteCarloEstimate,
    pub channels: Vec<ChannelError>,
    /// integrator step, s
    pub step: f64,
    /// relative change of the total under step halving
    pub halving_change: f64,
}

/// Trajectory x(t) = x₀ cos ωt + (v₀/ω) sin ωt for each atom.
#[derive(Debug, Clone)]
pub struct Trajectories {
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub omega: f64,
}

impl Trajectories {
    pub fn thermal(n: usize, motion: &MotionConfig, sample: u64) -> Self {
        let mut rng = sample_rng(motion.seed, sample);
        let (sx, sv) = (motion.position_sigma(), motion.velocity_sigma());
        let mut x0 = Vec::with_capacity(n);
        let mut v0 = Vec::with_capacity(n);
        for _ in 0..n {
            x0.push(sx * rng.sample::<f64, _>(StandardNormal));
            v0.push(sv * rng.sample::<f64, _>(StandardNormal));
        }
        Self {
            x0,
            v0,
            omega: motion.trap_omega,
        }
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let (c, s) = ((self.omega * t).cos(), (self.omega * t).sin());
        self.x0
            .iter()
            .zip(&self.v0)
            .map(|(x, v)| x * c + v / self.omega * s)
            .collect()
    }
}

struct MotionModel<'a> {
    config: &'a SpinChainConfig,
    couplings: ChainOperators,
    detunings: ChainOperators,
    drives: [CMat; 2],
    eta_prefactor: f64,
}

impl MotionModel<'_> {
    fn hamiltonian(&self, x: &[f64], channels: &[MotionChannel]) -> CMat {
        let a = self.config.separation;
        let dim = self.couplings.dim;
        let mut h = CMat::zeros((dim, dim));
        if channels.contains(&MotionChannel::Couplings) {
            h = h + self.couplings.interaction(a, Some(x));
        }
        if channels.contains(&MotionChannel::Delta) {
            h = h + self.detunings.interaction(a, Some(x));
        }
        if channels.contains(&MotionChannel::Eta) {
            for (i, sz) in self.couplings.site_sz.iter().enumerate() {
                h.scaled_add(C64::new(self.eta_prefactor * x[i] * x[i], 0.0), sz);
            }
        }
        h
    }

    #[allow(clippy::too_many_arguments)]
    fn propagate(
        &self,
        segs: &[Segment],
        cycles: usize,
        t_c: f64,
        max_free: f64,
        max_pulse: f64,
        traj: &Trajectories,
        channels: &[MotionChannel],
    ) -> Result<CMat> {
        let dim = self.couplings.dim;
        let mut u = CMat::eye(dim);
        for c in 0..cycles {
            let mut t = c as f64 * t_c;
            for seg in segs {
                let (dur, drive, limit) = match *seg {
                    Segment::Free { duration } => (duration, None, max_free),
                    Segment::Drive {
                        axis,
                        rabi,
                        duration,
                    } => (duration, Some((axis, rabi)), max_pulse.min(max_free)),
                    Segment::Kick { .. } => {
                        return invalid("motion simulation needs finite pulses (duty > 0)")
                    }
                };
                let pieces = (dur / limit).ceil().max(1.0) as usize;
                let dt = dur / pieces as f64;
                for p in 0..pieces {
                    let tm = t + (p as f64 + 0.5) * dt;
                    let mut h = self.hamiltonian(&traj.at(tm), channels);
                    if let Some((axis, rabi)) = drive {
                        let (k, sgn) = axis.components();
                        h.scaled_add(C64::new(sgn * rabi, 0.0), &self.drives[k]);
                    }
                    u = HermitianEigen::new(&h)?.exp(dt).dot(&u);
                }
                t += dur;
            }
        }
        Ok(u)
    }
}

/// Spin–motion errors for a storage chain; returns the error per atom per cycle.
pub fn simulate_with_motion(
    seq: &PulseSequence,
    config: &SpinChainConfig,
    motion: &MotionConfig,
    channels: &[MotionChannel],
    cycles: usize,
) -> Result<MotionResult> {
    motion.validate()?;
    if config.levels != LevelSet::Storage2 {
        return invalid("motion simulation uses the storage2 level set");
    }
    if cycles == 0 {
        return invalid("need at least one cycle");
    }
    let seq = if motion.matched {
        seq.clone().with_timing(2.0 * motion.period(), seq.duty())?
    } else {
        seq.clone()
    };
    let segs = cycle_segments(&seq, 0.0)?;
    let model = MotionModel {
        config,
        couplings: ChainOperators::new(
            config,
            TermMask {
                couplings: true,
                detunings: false,
            },
        )?,
        detunings: ChainOperators::new(
            config,
            TermMask {
                couplings: false,
                detunings: true,
            },
        )?,
        drives: [global_drive(config, 0)?, global_drive(config, 1)?],
        eta_prefactor: 0.5
            * (motion.eta_s / 2.0)
            * motion.mass
            * motion.trap_omega
            * motion.trap_omega
            / HBAR,
    };
    let n = config.n_atoms;
    let u0_cycle = global_kron(&embed_storage(&ideal_site_cycle(&seq), 2), n);
    let mut u0 = CMat::eye(config.dim());
    for _ in 0..cycles {
        u0 = u0_cycle.dot(&u0);
    }
    let max_free = motion.period() / 64.0;
    let max_pulse = seq.t_p / 8.0;
    let run = |set: &[MotionChannel], scale: f64| -> Result<MonteCarloEstimate> {
        let errs: Vec<f64> = (0..motion.samples as u64)
            .map(|s| {
                let traj = Trajectories::thermal(n, motion, s);
                let u = model.propagate(
                    &segs,
                    cycles,
                    seq.t_c,
                    max_free * scale,
                    max_pulse * scale,
                    &traj,
                    set,
                )?;
                let w = crate::quantum_core::dagger(&u0).dot(&u);
                Ok(haar_average_error(&w, n) / cycles as f64)
            })
            .collect::<Result<_>>()?;
        Ok(mean_sem(&errs))
    };
    let all = MotionChannel::ALL
        .iter()
        .copied()
        .filter(|c| channels.contains(c))
        .collect::<Vec<_>>();
    let total = run(&all, 1.0)?;
    let half = run(&all, 0.5)?;
    let floor = 1e-14;
    let halving_change = (total.mean - half.mean).abs() / half.mean.abs().max(floor);
    if halving_change > 0.1 && (total.mean - half.mean).abs() > floor {
        return Err(Error::Convergence {
            what: "motion integrator step halving".into(),
            achieved: halving_change,
        });
    }
    let mut per = Vec::new();
    for &c in &all {
        per.push(ChannelError {
            channel: c.name().into(),
            per_cycle: run(&[c], 1.0)?,
        });
    }
    Ok(MotionResult {
        sequence: seq.name.clone(),
        t_c: seq.t_c,
        cycles,
        total,
        channels: per,
        step: max_free,
        halving_change,
    })
}

/// Incoherent error over two trap periods, 2·2π/(ω τ_circ).
pub fn incoherent_reference(trap_omega: f64, tau_circ: f64) -> f64 {
    2.0 * TWO_PI / (trap_omega * tau_circ)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateMotionPhase {
    /// rms over trajectories of (1/t_π)∫(a/(a + x₁₂))⁶dt − 1
    pub jz_residual: f64,
    /// rms dephasing phase η_a k_B T t_π/(2ħ)
    pub phi_d: f64,
    /// φ_D²/6, zero when echoed
    pub p_phi: f64,
    /// common-mode phase removed by the echo
    pub echo_phase: Option<f64>,
}

/// (1/t)∫₀ᵗ (a/(a + x₀cos(ωs + φ)))⁶ ds − 1 for a single relative trajectory.
pub fn jz_average_residual(t_pi: f64, omega: f64, separation: f64, x0: f64, phase: f64) -> f64 {
    let periods = (omega * t_pi / TWO_PI).ceil().max(1.0) as usize;
    let nodes = composite(0.0, t_pi, 16 * periods, 16);
    let avg: f64 = nodes
        .iter()
        .map(|&(t, w)| {
            let x = x0 * (omega * t + phase).cos();
            w * (separation / (separation + x)).powi(6)
        })
        .sum::<f64>()
        / t_pi;
    avg - 1.0
}

pub fn gate_motion_phase(
    t_pi: f64,
    motion: &MotionConfig,
    separation: f64,
    echo: bool,
) -> Result<GateMotionPhase> {
    if !(t_pi > 0.0) || !(separation > 0.0) {
        return invalid("t_π and separation must be positive");
    }
    motion.validate()?;
    let omega = motion.trap_omega;
    if echo {
        let k = t_pi * omega / (2.0 * TWO_PI);
        if (k - k.round()).abs() > 1e-6 || k.round() < 1.0 {
            return invalid("echo needs t_π = 2π(2n)/ω");
        }
    }
    let phi_d = motion.eta_a * K_B * motion.temperature * t_pi / (2.0 * HBAR);
    let mut acc = 0.0;
    for s in 0..motion.samples as u64 {
        let traj = Trajectories::thermal(2, motion, s);
        let dx = traj.x0[1] - traj.x0[0];
        let dv = (traj.v0[1] - traj.v0[0]) / omega;
        let amp = dx.hypot(dv);
        let phase = (-dv).atan2(dx);
        acc += jz_average_residual(t_pi, omega, separation, amp, phase).powi(2);
    }
    let jz_residual = (acc / motion.samples as f64).sqrt();
    Ok(if echo {
        GateMotionPhase {
            jz_residual,
            phi_d,
            p_phi: 0.0,
            echo_phase: Some(phi_d),
        }
    } else {
        GateMotionPhase {
            jz_residual,
            phi_d,
            p_phi: phi_d * phi_d / 6.0,
            echo_phase: None,
        }
    })
}
