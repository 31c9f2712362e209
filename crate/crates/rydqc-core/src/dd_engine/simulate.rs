//! Dense propagation of decoupled storage arrays and active-state gates.

use std::collections::HashMap;

use ndarray::linalg::kron;
use ndarray::s;
use rand::Rng;
use serde::Serialize;

use super::chain::{
    global_drive, pi_sa_local, storage_subspace, ChainOperators, LevelSet, SpinChainConfig,
    TermMask,
};
use super::sequence::{rotation, Axis, PulseSequence};
use crate::error::{invalid, Error, Result};
use crate::quantum_core::{
    assemble, average_error_per_atom, haar_average_error, kron_chain, relative_block, sample_rng,
    CMat, HamiltonianTerm, HermitianEigen, MonteCarloEstimate, OpLabel, Propagator, C64,
};

/// One piece of a cycle: free evolution or a drive about `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Free {
        duration: f64,
    },
    Drive {
        axis: Axis,
        rabi: f64,
        duration: f64,
    },
    /// zero-duration rotation
    Kick {
        axis: Axis,
        angle: f64,
    },
}

/// Time-ordered segments of one cycle; `angle_error` scales every rotation by (1 + ε).
pub fn cycle_segments(seq: &PulseSequence, angle_error: f64) -> Result<Vec<Segment>> {
    seq.validate()?;
    let mut out = Vec::new();
    let mut t = 0.0;
    for p in &seq.pulses {
        let dur = seq.pulse_duration(p.angle);
        let start = (p.center * seq.t_c - 0.5 * dur).max(t);
        if start > t {
            out.push(Segment::Free {
                duration: start - t,
            });
        }
        let angle = p.angle * (1.0 + angle_error);
        if dur > 0.0 {
            out.push(Segment::Drive {
                axis: p.axis,
                rabi: angle / (2.0 * dur),
                duration: dur,
            });
        } else {
            out.push(Segment::Kick {
                axis: p.axis,
                angle,
            });
        }
        t = start + dur;
    }
    if seq.t_c > t {
        out.push(Segment::Free {
            duration: seq.t_c - t,
        });
    }
    Ok(out)
}

/// The same cycle re-cut to start right after the last pulse of the preceding cycle.
pub fn segments_after_last_pulse(segs: &[Segment]) -> Vec<Segment> {
    let mut out: Vec<Segment> = segs.to_vec();
    let lead = match out.first() {
        Some(Segment::Free { duration }) => {
            let d = *duration;
            out.remove(0);
            d
        }
        _ => 0.0,
    };
    let tail = match out.last() {
        Some(Segment::Free { duration }) => {
            let d = *duration;
            out.pop();
            d
        }
        _ => 0.0,
    };
    if lead + tail > 0.0 {
        out.insert(
            0,
            Segment::Free {
                duration: lead + tail,
            },
        );
    }
    out
}

/// Propagates a fixed interaction Hamiltonian through cycle segments, caching
/// the eigendecomposition for each distinct drive.
pub(crate) struct CyclePropagator {
    h_int: CMat,
    drives: [CMat; 2],
    cache: HashMap<(u8, u64), HermitianEigen>,
    kicks: HashMap<(u8, u64), CMat>,
    local_dim: usize,
    n_atoms: usize,
}

fn axis_key(a: Axis) -> u8 {
    a as u8
}

impl CyclePropagator {
    pub fn new(config: &SpinChainConfig, h_int: CMat) -> Result<Self> {
        Ok(Self {
            h_int,
            drives: [global_drive(config, 0)?, global_drive(config, 1)?],
            cache: HashMap::new(),
            kicks: HashMap::new(),
            local_dim: config.local_dim(),
            n_atoms: config.n_atoms,
        })
    }

    fn eigen(&mut self, axis: Option<Axis>, rabi: f64) -> Result<&HermitianEigen> {
        let key = (axis.map_or(255, axis_key), rabi.to_bits());
        if !self.cache.contains_key(&key) {
            let mut h = self.h_int.clone();
            if let Some(a) = axis {
                let (k, sgn) = a.components();
                h.scaled_add(C64::new(sgn * rabi, 0.0), &self.drives[k]);
            }
            self.cache.insert(key, HermitianEigen::new(&h)?);
        }
        Ok(&self.cache[&key])
    }

    fn kick(&mut self, axis: Axis, angle: f64) -> &CMat {
        let (ld, n) = (self.local_dim, self.n_atoms);
        self.kicks
            .entry((axis_key(axis), angle.to_bits()))
            .or_insert_with(|| global_kron(&embed_storage(&rotation(axis, angle), ld), n))
    }

    /// U for the given segments, each split into `substeps` equal pieces.
    pub fn run(&mut self, segments: &[Segment], substeps: usize) -> Result<CMat> {
        let dim = self.h_int.nrows();
        let mut u = CMat::eye(dim);
        let sub = substeps.max(1);
        for seg in segments {
            let step = match *seg {
                Segment::Free { duration } => {
                    let e = self.eigen(None, 0.0)?;
                    let one = e.exp(duration / sub as f64);
                    power(&one, sub)
                }
                Segment::Drive {
                    axis,
                    rabi,
                    duration,
                } => {
                    let e = self.eigen(Some(axis), rabi)?;
                    let one = e.exp(duration / sub as f64);
                    power(&one, sub)
                }
                Segment::Kick { axis, angle } => self.kick(axis, angle).clone(),
            };
            u = step.dot(&u);
        }
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { segment: 0 });
        }
        Ok(u)
    }
}

fn power(m: &CMat, k: usize) -> CMat {
    let mut out = m.clone();
    for _ in 1..k {
        out = m.dot(&out);
    }
    out
}

/// Places a 2×2 storage operator in the local basis (identity on the active block).
pub(crate) fn embed_storage(u2: &CMat, local_dim: usize) -> CMat {
    let mut m = CMat::eye(local_dim);
    m.slice_mut(s![0..2, 0..2]).assign(u2);
    m
}

pub(crate) fn global_kron(local: &CMat, n: usize) -> CMat {
    let mut out = CMat::eye(1);
    for _ in 0..n {
        out = kron(&out, local);
    }
    out
}

pub(crate) fn product_kron(locals: &[CMat]) -> CMat {
    kron_chain(locals)
}

/// Single-site ideal cycle propagator: the nominal pulses without interactions.
pub fn ideal_site_cycle(seq: &PulseSequence) -> CMat {
    let mut u = CMat::eye(2);
    for p in &seq.pulses {
        u = rotation(p.axis, p.angle).dot(&u);
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageOptions {
    pub twirl: bool,
    /// static fractional rotation-angle error ε
    pub pulse_angle_error: f64,
    /// Haar samples for the Monte-Carlo estimate
    pub samples: usize,
    pub seed: u64,
    /// pieces per segment; the result must not depend on it
    pub substeps: usize,
}

impl Default for StorageOptions {
    fn default() -> Self {
        Self {
            twirl: false,
            pulse_angle_error: 0.0,
            samples: 20,
            seed: 1,
            substeps: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorPoint {
    pub cycles: usize,
    /// s
    pub time: f64,
    /// Haar Monte-Carlo estimate over `samples` states
    pub monte_carlo: MonteCarloEstimate,
    /// closed-form Haar average
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTrace {
    pub sequence: String,
    pub points: Vec<ErrorPoint>,
}

impl ErrorTrace {
    pub fn exact(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.exact).collect()
    }
}

const TWIRL_SEED_MIX: u64 = 0x7477_6972_6c00_0000;

fn twirl_layer(n: usize, local_dim: usize, seed: u64, cycle: u64) -> CMat {
    let mut rng = sample_rng(seed ^ TWIRL_SEED_MIX, cycle);
    let locals: Vec<CMat> = (0..n)
        .map(|_| {
            let axis = rng.random_range(0..3usize);
            let k = rng.random_range(0..4u32) as f64;
            let u2 = match axis {
                0 => rotation(Axis::X, k * std::f64::consts::FRAC_PI_2),
                1 => rotation(Axis::Y, k * std::f64::consts::FRAC_PI_2),
                _ => {
                    let ph = k * std::f64::consts::FRAC_PI_4;
                    ndarray::array![
                        [C64::from_polar(1.0, -ph), C64::new(0.0, 0.0)],
                        [C64::new(0.0, 0.0), C64::from_polar(1.0, ph)]
                    ]
                }
            };
            embed_storage(&u2, local_dim)
        })
        .collect();
    product_kron(&locals)
}

/// Average storage error per atom at refocus times 1..=n_cycles.
pub fn simulate_storage(
    seq: &PulseSequence,
    config: &SpinChainConfig,
    n_cycles: usize,
    opts: &StorageOptions,
) -> Result<ErrorTrace> {
    if config.levels != LevelSet::Storage2 || config.n_atoms > 8 {
        return Err(Error::Budget(
            "storage simulation supports storage2 chains of at most 8 atoms".into(),
        ));
    }
    let h = ChainOperators::new(config, TermMask::default())?.interaction(config.separation, None);
    simulate_storage_with(seq, config, h, n_cycles, opts)
}

pub(crate) fn simulate_storage_with(
    seq: &PulseSequence,
    config: &SpinChainConfig,
    h_int: CMat,
    n_cycles: usize,
    opts: &StorageOptions,
) -> Result<ErrorTrace> {
    if n_cycles == 0 || opts.samples == 0 {
        return invalid("need at least one cycle and one sample");
    }
    let n = config.n_atoms;
    let ld = config.local_dim();
    let segs = cycle_segments(seq, opts.pulse_angle_error)?;
    let mut prop = CyclePropagator::new(config, h_int)?;
    let u_cycle = prop.run(&segs, opts.substeps)?;
    let u0_cycle = global_kron(&embed_storage(&ideal_site_cycle(seq), ld), n);
    let mut u = CMat::eye(config.dim());
    let mut u0 = CMat::eye(config.dim());
    let mut points = Vec::with_capacity(n_cycles);
    for c in 1..=n_cycles {
        u = u_cycle.dot(&u);
        u0 = u0_cycle.dot(&u0);
        if opts.twirl {
            let t = twirl_layer(n, ld, opts.seed, c as u64);
            u = t.dot(&u);
            u0 = t.dot(&u0);
        }
        let (pu, pu0) = (
            Propagator {
                matrix: u.clone(),
                elapsed: c as f64 * seq.t_c,
            },
            Propagator {
                matrix: u0.clone(),
                elapsed: c as f64 * seq.t_c,
            },
        );
        let w = relative_block(&pu, &pu0, None)?;
        points.push(ErrorPoint {
            cycles: c,
            time: c as f64 * seq.t_c,
            monte_carlo: average_error_per_atom(&pu, &pu0, n, opts.samples, opts.seed, None)?,
            exact: haar_average_error(&w, n),
        });
    }
    Ok(ErrorTrace {
        sequence: seq.name.clone(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateOptions {
    /// gate window N′ − N in cycles; t_c is set to t_π / gate_cycles when given
    pub gate_cycles: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Π_sa right after the last pulse of a cycle instead of mid-interval
    pub swap_after_pulse: bool,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            gate_cycles: Some(1),
            samples: 20,
            seed: 1,
            swap_after_pulse: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateResult {
    pub sequence: String,
    /// closed-form Haar average of ε_CZ
    pub eps_cz: f64,
    pub monte_carlo: MonteCarloEstimate,
    pub t_c: f64,
    pub t_gate: f64,
}

/// Full propagator, ideal reference and storage-subspace indices of a gate.
pub struct GatePropagators {
    pub u: CMat,
    pub u_ref: CMat,
    pub subspace: Vec<usize>,
    pub t_c: f64,
    pub t_gate: f64,
}

/// Gate pair occupies the two middle sites.
pub fn gate_pair(n_atoms: usize) -> (usize, usize) {
    (n_atoms / 2 - 1, n_atoms / 2)
}

/// Static Hamiltonian the ideal gate implements: J_z^aa and the Δ shifts of the active pair.
pub fn ideal_gate_hamiltonian(config: &SpinChainConfig) -> Result<CMat> {
    let (g1, g2) = gate_pair(config.n_atoms);
    let c = &config.coefficients;
    let mut terms = Vec::new();
    for (i, j, d) in config.pairs() {
        let s = (d as f64).powi(-6);
        let gi = i == g1 || i == g2;
        let gj = j == g1 || j == g2;
        if gi && gj {
            terms.push(HamiltonianTerm::new(
                c.jz_aa * s,
                &[i, j],
                &[OpLabel::SbarZ, OpLabel::SbarZ],
            ));
            terms.push(HamiltonianTerm::new(
                c.delta_aa * s,
                &[i, j],
                &[OpLabel::SbarZ, OpLabel::Nbar],
            ));
            terms.push(HamiltonianTerm::new(
                c.delta_aa * s,
                &[i, j],
                &[OpLabel::Nbar, OpLabel::SbarZ],
            ));
        } else if gi {
            terms.push(HamiltonianTerm::new(
                c.delta_as * s,
                &[i, j],
                &[OpLabel::SbarZ, OpLabel::N],
            ));
        } else if gj {
            terms.push(HamiltonianTerm::new(
                c.delta_as * s,
                &[i, j],
                &[OpLabel::N, OpLabel::SbarZ],
            ));
        }
    }
    assemble(&terms, config.n_atoms, config.local_dim())
}

pub fn gate_propagators(
    seq: &PulseSequence,
    config: &SpinChainConfig,
    opts: &GateOptions,
) -> Result<GatePropagators> {
    if config.levels != LevelSet::Full4 {
        return invalid("gate simulation needs the full4 level set");
    }
    let t_pi = config.coefficients.t_pi();
    let (seq, cycles) = match opts.gate_cycles {
        Some(0) => return invalid("gate_cycles must be ≥ 1"),
        Some(k) => (seq.clone().with_timing(t_pi / k as f64, seq.duty())?, k),
        None => {
            let k = (t_pi / seq.t_c).round();
            if k < 1.0 || (t_pi / seq.t_c - k).abs() > 1e-6 {
                return invalid(format!(
                    "gate time {t_pi:.4e} s is not a multiple of t_c = {:.4e} s",
                    seq.t_c
                ));
            }
            (seq.clone(), k as usize)
        }
    };
    let n = config.n_atoms;
    let (g1, g2) = gate_pair(n);
    let h = ChainOperators::new(config, TermMask::default())?.interaction(config.separation, None);
    let mut segs = cycle_segments(&seq, 0.0)?;
    if opts.swap_after_pulse {
        segs = segments_after_last_pulse(&segs);
    }
    let mut prop = CyclePropagator::new(config, h)?;
    let u_cycle = prop.run(&segs, 1)?;
    let locals: Vec<CMat> = (0..n)
        .map(|i| {
            if i == g1 || i == g2 {
                pi_sa_local()
            } else {
                CMat::eye(4)
            }
        })
        .collect();
    let pi_sa = product_kron(&locals);
    let mut dd = CMat::eye(config.dim());
    for _ in 0..cycles {
        dd = u_cycle.dot(&dd);
    }
    let u = pi_sa.dot(&dd).dot(&pi_sa);

    let t_gate = cycles as f64 * seq.t_c;
    let h_ideal = ideal_gate_hamiltonian(config)?;
    let ideal = HermitianEigen::new(&h_ideal)?.exp(t_gate);
    let u0_site = embed_storage(&power(&ideal_site_cycle(&seq), cycles), 4);
    let u0 = global_kron(&u0_site, n);
    let u_ref = pi_sa.dot(&u0).dot(&ideal).dot(&pi_sa);
    Ok(GatePropagators {
        u,
        u_ref,
        subspace: storage_subspace(config),
        t_c: seq.t_c,
        t_gate,
    })
}

/// ε_CZ = 1 − |⟨ψ|U_CZ† U|ψ⟩|² averaged over storage-subspace Haar states.
pub fn simulate_gate(
    seq: &PulseSequence,
    config: &SpinChainConfig,
    opts: &GateOptions,
) -> Result<GateResult> {
    let g = gate_propagators(seq, config, opts)?;
    let pu = Propagator {
        matrix: g.u,
        elapsed: g.t_gate,
    };
    let pr = Propagator {
        matrix: g.u_ref,
        elapsed: g.t_gate,
    };
    let w = relative_block(&pu, &pr, Some(&g.subspace))?;
    Ok(GateResult {
        sequence: seq.name.clone(),
        eps_cz: haar_average_error(&w, 1),
        monte_carlo: average_error_per_atom(
            &pu,
            &pr,
            1,
            opts.samples,
            opts.seed,
            Some(&g.subspace),
        )?,
        t_c: g.t_c,
        t_gate: g.t_gate,
    })
}
