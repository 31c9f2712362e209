//! Pulse sequences, toggling frames and decoupling conditions.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quantum_core::{dagger, expm_hermitian, pauli, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axis {
    X,
    Y,
    MinusX,
    MinusY,
}

impl Axis {
    /// Cartesian index and sign.
    pub fn components(self) -> (usize, f64) {
        match self {
            Axis::X => (0, 1.0),
            Axis::Y => (1, 1.0),
            Axis::MinusX => (0, -1.0),
            Axis::MinusY => (1, -1.0),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Axis::X => Axis::MinusX,
            Axis::Y => Axis::MinusY,
            Axis::MinusX => Axis::X,
            Axis::MinusY => Axis::Y,
        }
    }

    pub const ALL: [Axis; 4] = [Axis::X, Axis::Y, Axis::MinusX, Axis::MinusY];
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "+x" => Ok(Axis::X),
            "y" | "+y" => Ok(Axis::Y),
            "-x" => Ok(Axis::MinusX),
            "-y" => Ok(Axis::MinusY),
            _ => invalid(format!("unknown axis '{s}' (expected x, y, -x, -y)")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::MinusX => "-x",
            Axis::MinusY => "-y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    pub axis: Axis,
    /// rotation angle in rad, π/2 or π
    pub angle: f64,
    /// pulse center as a fraction of t_c
    pub center: f64,
}

impl Pulse {
    /// Single-site rotation exp(−iθσ_a/2).
    pub fn rotation(&self) -> CMat {
        rotation(self.axis, self.angle)
    }
}

pub fn rotation(axis: Axis, angle: f64) -> CMat {
    let (k, s) = axis.components();
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let m = Complex64::new(0.0, -(angle / 2.0).sin() * s);
    CMat::eye(2).mapv(|z| z * c) + pauli(k).mapv(|z| z * m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSequence {
    pub name: String,
    pub pulses: Vec<Pulse>,
    /// cycle period, s
    pub t_c: f64,
    /// π/2 pulse duration, s; π pulses last 2 t_p
    pub t_p: f64,
}

/// Default period t_c·J_ss.
pub const DEFAULT_TC_JSS: f64 = 0.021;
pub const DEFAULT_DUTY: f64 = 0.025;

impl PulseSequence {
    /// Equidistant pulses centered at (k − ½)t_c/N.
    pub fn equidistant(name: &str, ops: &[(Axis, f64)], t_c: f64, duty: f64) -> Result<Self> {
        let n = ops.len();
        let pulses = ops
            .iter()
            .enumerate()
            .map(|(k, &(axis, angle))| Pulse {
                axis,
                angle,
                center: (k as f64 + 0.5) / n as f64,
            })
            .collect();
        let mut s = Self {
            name: name.to_string(),
            pulses,
            t_c,
            t_p: 0.0,
        };
        s.set_duty(duty)?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// N_p t_p / t_c
    pub fn duty(&self) -> f64 {
        self.pulses.len() as f64 * self.t_p / self.t_c
    }

    pub fn set_duty(&mut self, duty: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&duty) {
            return invalid(format!("duty cycle {duty} outside [0, 1]"));
        }
        self.t_p = if self.pulses.is_empty() {
            0.0
        } else {
            duty * self.t_c / self.pulses.len() as f64
        };
        self.validate()
    }

    pub fn with_timing(mut self, t_c: f64, duty: f64) -> Result<Self> {
        if !(t_c > 0.0) {
            return invalid("t_c must be positive");
        }
        self.t_c = t_c;
        self.set_duty(duty)?;
        Ok(self)
    }

    /// Duration of a pulse of angle θ at the common Rabi frequency.
    pub fn pulse_duration(&self, angle: f64) -> f64 {
        self.t_p * angle.abs() / FRAC_PI_2
    }

    /// Checks that all pulses fit in [0, t_c] without overlapping.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_c > 0.0) || !(self.t_p >= 0.0) {
            return invalid("t_c must be positive and t_p nonnegative");
        }
        let mut end = 0.0f64;
        for (k, p) in self.pulses.iter().enumerate() {
            if !p.angle.is_finite() || p.angle == 0.0 {
                return invalid(format!("pulse {k} has invalid angle {}", p.angle));
            }
            let half = 0.5 * self.pulse_duration(p.angle) / self.t_c;
            let tol = 1e-12;
            if p.center - half < end - tol || p.center + half > 1.0 + tol {
                return invalid(format!(
                    "pulse {k} overlaps its neighbour or leaves the cycle"
                ));
            }
            end = p.center + half;
        }
        if self.duty() > 1.0 + 1e-12 {
            return invalid("duty cycle exceeds 1");
        }
        Ok(())
    }

    /// The same pattern traversed backwards with inverted rotations.
    pub fn inverse(&self) -> Self {
        let n = self.pulses.len();
        let pulses = self
            .pulses
            .iter()
            .rev()
            .enumerate()
            .map(|(k, p)| Pulse {
                axis: p.axis.opposite(),
                angle: p.angle,
                center: (k as f64 + 0.5) / n as f64,
            })
            .collect();
        Self {
            name: format!("{}-inverse", self.name),
            pulses,
            t_c: self.t_c,
            t_p: self.t_p,
        }
    }

    /// Concatenation within one (doubled) period, keeping the Rabi frequency.
    pub fn append(&self, other: &Self, name: &str) -> Self {
        let mut pulses = Vec::with_capacity(self.len() + other.len());
        for p in &self.pulses {
            pulses.push(Pulse {
                center: 0.5 * p.center,
                ..*p
            });
        }
        for p in &other.pulses {
            pulses.push(Pulse {
                center: 0.5 + 0.5 * p.center,
                ..*p
            });
        }
        Self {
            name: name.to_string(),
            pulses,
            t_c: self.t_c + other.t_c,
            t_p: self.t_p,
        }
    }

    /// Parses `time_fraction axis angle_degrees` lines; `#` starts a comment.
    pub fn parse(name: &str, text: &str, t_c: f64, duty: f64) -> Result<Self> {
        let mut pulses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let center: f64 = fields[0]
                .parse()
                .map_err(|_| err(format!("bad time fraction '{}'", fields[0])))?;
            if !(0.0..1.0).contains(&center) {
                return Err(err(format!("time fraction {center} outside [0, 1)")));
            }
            let axis: Axis = fields[1].parse().map_err(|e: Error| err(e.to_string()))?;
            let angle = match fields[2] {
                "90" => FRAC_PI_2,
                "180" => PI,
                a => return Err(err(format!("angle must be 90 or 180, got '{a}'"))),
            };
            if let Some(prev) = pulses.last().map(|p: &Pulse| p.center) {
                if center <= prev {
                    return Err(err("pulse times must increase".into()));
                }
            }
            pulses.push(Pulse {
                axis,
                angle,
                center,
            });
        }
        if pulses.is_empty() {
            return invalid("sequence file contains no pulses");
        }
        let mut s = Self {
            name: name.to_string(),
            pulses,
            t_c,
            t_p: 0.0,
        };
        s.set_duty(duty)?;
        Ok(s)
    }

    /// Text form accepted by `parse`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.name);
        for p in &self.pulses {
            out.push_str(&format!(
                "{:.6} {} {}\n",
                p.center,
                p.axis,
                (p.angle.to_degrees()).round()
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuiltinSequences {
    pub sequence1: PulseSequence,
    pub sequence2: PulseSequence,
    pub sequence3: PulseSequence,
}

impl BuiltinSequences {
    pub fn get(&self, k: usize) -> Option<&PulseSequence> {
        match k {
            1 => Some(&self.sequence1),
            2 => Some(&self.sequence2),
            3 => Some(&self.sequence3),
            _ => None,
        }
    }
}

/// The three built-in sequences with period `t_c` and duty cycle `duty`.
/// Sequence 3 runs over 2 t_c.
pub fn builtin_sequences(t_c: f64, duty: f64) -> Result<BuiltinSequences> {
    use Axis::*;
    let q = FRAC_PI_2;
    let s1 = [
        (MinusY, q),
        (X, q),
        (X, PI),
        (MinusX, q),
        (MinusY, q),
        (X, PI),
    ];
    let unit = [(MinusY, q), (X, q), (Y, q), (X, q)];
    let s2: Vec<(Axis, f64)> = unit.iter().cycle().take(12).copied().collect();
    let sequence1 = PulseSequence::equidistant("sequence1", &s1, t_c, duty)?;
    let sequence2 = PulseSequence::equidistant("sequence2", &s2, t_c, duty)?;
    let sequence3 = sequence2.append(&sequence2.inverse(), "sequence3");
    sequence3.validate()?;
    Ok(BuiltinSequences {
        sequence1,
        sequence2,
        sequence3,
    })
}

pub fn builtin_by_name(name: &str, t_c: f64, duty: f64) -> Result<PulseSequence> {
    let b = builtin_sequences(t_c, duty)?;
    match name {
        "1" | "sequence1" => Ok(b.sequence1),
        "2" | "sequence2" => Ok(b.sequence2),
        "3" | "sequence3" => Ok(b.sequence3),
        _ => invalid(format!("unknown built-in sequence '{name}' (1, 2 or 3)")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToggleFrames {
    /// F_k for the k-th interval; row 0 precedes the first pulse
    pub f: Vec<[i8; 3]>,
    /// β_k = F_{k+1} × F_k, cyclic
    pub beta: Vec<[i8; 3]>,
    /// frame after the full cycle
    pub closing: [i8; 3],
}

fn frame_of(q: &CMat) -> [f64; 3] {
    let m = dagger(q).dot(&pauli(2)).dot(q);
    let mut out = [0.0; 3];
    for (mu, o) in out.iter_mut().enumerate() {
        *o = m.dot(&pauli(mu)).diag().sum().re / 2.0;
    }
    out
}

fn snap(v: [f64; 3]) -> Result<[i8; 3]> {
    let mut out = [0i8; 3];
    let mut nonzero = 0;
    for (o, x) in out.iter_mut().zip(v) {
        let r = x.round();
        if (x - r).abs() > 1e-9 || r.abs() > 1.0 {
            return invalid(format!(
                "frame component {x} is not in {{-1, 0, 1}}; pulse angles must be multiples of π/2"
            ));
        }
        *o = r as i8;
        nonzero += (r != 0.0) as usize;
    }
    if nonzero != 1 {
        return invalid("frame is not a signed unit vector");
    }
    Ok(out)
}

fn cross(a: [i8; 3], b: [i8; 3]) -> [i8; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Toggling frames of S_z under ideal instantaneous pulses.
pub fn toggling_frames(seq: &PulseSequence) -> Result<ToggleFrames> {
    let mut q = CMat::eye(2);
    let mut f = vec![[0, 0, 1]];
    for p in &seq.pulses {
        q = p.rotation().dot(&q);
        f.push(snap(frame_of(&q))?);
    }
    let closing = f.pop().unwrap_or([0, 0, 1]);
    if f.is_empty() {
        f.push([0, 0, 1]);
    }
    let n = f.len();
    let beta = (0..n).map(|k| cross(f[(k + 1) % n], f[k])).collect();
    Ok(ToggleFrames { f, beta, closing })
}

/// Frame rows via the explicit SO(3) image of each rotation, independent of
/// the 2×2 conjugation route.
pub fn toggling_frames_so3(seq: &PulseSequence) -> Vec<[f64; 3]> {
    // Heisenberg image of σ_z: v_k = R(P_1)…R(P_k) ẑ
    let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut out = vec![[0.0, 0.0, 1.0]];
    for p in &seq.pulses {
        let (k, s) = p.axis.components();
        let th = -p.angle * s;
        let (c, sn) = (th.cos(), th.sin());
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let mut r = [[0.0; 3]; 3];
        r[k][k] = 1.0;
        r[i][i] = c;
        r[i][j] = -sn;
        r[j][i] = sn;
        r[j][j] = c;
        let mut next = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                next[a][b] = (0..3).map(|x| m[a][x] * r[x][b]).sum();
            }
        }
        m = next;
        out.push([m[0][2], m[1][2], m[2][2]]);
    }
    out.pop();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionResult {
    pub index: usize,
    pub pass: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n_periods: u32,
    pub conditions: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn passes(&self, index: usize) -> bool {
        self.conditions[index - 1].pass
    }

    pub fn residual(&self, index: usize) -> f64 {
        self.conditions[index - 1].residual
    }
}

pub const CONDITION_TOL: f64 = 1e-9;

/// Evaluates the eight decoupling conditions with ω̄τN = 2π·n_periods.
pub fn check_conditions(seq: &PulseSequence, n_periods: u32) -> Result<ConditionReport> {
    let frames = toggling_frames(seq)?;
    Ok(check_frames(&frames, n_periods))
}

pub fn check_frames(frames: &ToggleFrames, n_periods: u32) -> ConditionReport {
    let n = frames.f.len();
    let ph = |k: usize, mult: f64| {
        Complex64::from_polar(
            1.0,
            -mult * (k + 1) as f64 * 2.0 * PI * n_periods as f64 / n as f64,
        )
    };
    let resid = |rows: &[[f64; 3]], mult: f64, offset: f64| -> f64 {
        (0..3)
            .map(|mu| {
                let s: Complex64 = rows
                    .iter()
                    .enumerate()
                    .map(|(k, r)| ph(k, mult) * r[mu])
                    .sum();
                if mult == 0.0 {
                    (s.re - offset).abs()
                } else {
                    s.norm()
                }
            })
            .fold(0.0, f64::max)
    };
    let to_f = |v: &[[i8; 3]]| {
        v.iter()
            .map(|r| [r[0] as f64, r[1] as f64, r[2] as f64])
            .collect::<Vec<_>>()
    };
    let f = to_f(&frames.f);
    let abs_f: Vec<[f64; 3]> = f
        .iter()
        .map(|r| [r[0].abs(), r[1].abs(), r[2].abs()])
        .collect();
    let b = to_f(&frames.beta);
    let third = n as f64 / 3.0;
    let residuals = [
        resid(&f, 0.0, 0.0),
        resid(&abs_f, 0.0, third),
        resid(&b, 0.0, 0.0),
        resid(&f, 1.0, 0.0),
        resid(&f, 2.0, 0.0),
        resid(&abs_f, 1.0, 0.0),
        resid(&b, 1.0, 0.0),
        resid(&b, 2.0, 0.0),
    ];
    // the "or ω̄τ = 2πn" alternatives of conditions 4–6
    let tau_multiple = |m: u32| (m * n_periods).is_multiple_of(n as u32);
    let conditions = residuals
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let alt = match i + 1 {
                4 | 6 => tau_multiple(1),
                5 => tau_multiple(2),
                _ => false,
            };
            ConditionResult {
                index: i + 1,
                pass: r < CONDITION_TOL || alt,
                residual: r,
            }
        })
        .collect();
    ConditionReport {
        n_periods,
        conditions,
    }
}

/// Single-site propagator for a rotation about `axis` by angle θ as a Hermitian generator route,
/// used to cross-check `rotation`.
pub fn rotation_via_expm(axis: Axis, angle: f64) -> Result<CMat> {
    let (k, s) = axis.components();
    expm_hermitian(&pauli(k).mapv(|z| z * (0.5 * s)), angle)
}
