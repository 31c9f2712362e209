//! Ponderomotive traps and drives for circular states.

use std::f64::consts::PI;

use libm::{j0, lgamma};
use num_complex::Complex64;
use serde::Serialize;

use crate::atomic_structure::circular_log_density_au;
use crate::constants::{A0, C, EPS0, E_CHARGE, HBAR, K_B, M_E, M_RB87, R_ELECTRON};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{circular_average, circular_nodes};

const PANELS: usize = 8;
const ORDER: usize = 16;
const PHI_POINTS: usize = 64;

/// Ponderomotive energy per unit intensity, U/I in rad/s per (W/m²).
pub fn ponderomotive_coefficient(omega: f64) -> f64 {
    E_CHARGE * E_CHARGE / (2.0 * EPS0 * C * M_E * omega * omega) / HBAR
}

/// ⟨nC| U_p(R + r) |nC⟩ for intensity `intensity(x)` (W/m², x in m).
pub fn pond_shift(
    n: u32,
    omega: f64,
    intensity: &dyn Fn([f64; 3]) -> f64,
    center: [f64; 3],
) -> Result<f64> {
    if n == 0 || !(omega > 0.0) {
        return invalid("need n ≥ 1 and ω > 0");
    }
    let mut bad = None;
    let avg = circular_average(n, PANELS, ORDER, |r, t| {
        let rr = r * A0;
        let mut s = 0.0;
        for k in 0..PHI_POINTS {
            let ph = 2.0 * PI * k as f64 / PHI_POINTS as f64;
            let p = [
                center[0] + rr * t.sin() * ph.cos(),
                center[1] + rr * t.sin() * ph.sin(),
                center[2] + rr * t.cos(),
            ];
            let i = intensity(p);
            if !(i >= 0.0) || !i.is_finite() {
                bad = Some(i);
            }
            s += i;
        }
        s / PHI_POINTS as f64
    });
    if let Some(i) = bad {
        return invalid(format!("intensity must be finite and nonnegative, got {i}"));
    }
    if !avg.is_finite() {
        return Err(Error::Convergence {
            what: "ponderomotive quadrature".into(),
            achieved: avg,
        });
    }
    Ok(ponderomotive_coefficient(omega) * avg)
}

/// Fundamental Gaussian beam propagating along z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBeam {
    pub waist: f64,
    pub wavelength: f64,
    pub power: f64,
}

impl GaussianBeam {
    pub fn intensity(&self, p: [f64; 3]) -> f64 {
        let zr = PI * self.waist * self.waist / self.wavelength;
        let w2 = self.waist * self.waist * (1.0 + (p[2] / zr).powi(2));
        2.0 * self.power / (PI * w2) * (-2.0 * (p[0] * p[0] + p[1] * p[1]) / w2).exp()
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * C / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum LatticeOrientation {
    InPlane,
    ZAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub wavelength: f64,
    pub orientation: LatticeOrientation,
    /// spatial period; λ/2 for a retro-reflected lattice
    pub period: f64,
    /// W/m²
    pub single_beam_intensity: f64,
}

impl LatticeSpec {
    pub fn new(
        wavelength: f64,
        orientation: LatticeOrientation,
        period: Option<f64>,
    ) -> Result<Self> {
        if !(300e-9..=2000e-9).contains(&wavelength) {
            return invalid(format!("wavelength {wavelength} m outside [300, 2000] nm"));
        }
        let period = period.unwrap_or(wavelength / 2.0);
        if period < wavelength / 2.0 * (1.0 - 1e-12) {
            return invalid("lattice period below λ/2");
        }
        Ok(Self {
            wavelength,
            orientation,
            period,
            single_beam_intensity: 1.0,
        })
    }
}

/// ∫|ψ_nC|² cos(K·r) d³r with K = 2π/period, for either orientation.
pub fn lattice_depth_factor(n: u32, lattice: &LatticeSpec) -> f64 {
    depth_factor_k(n, 2.0 * PI / lattice.period, lattice.orientation)
}

fn depth_factor_k(n: u32, k: f64, orientation: LatticeOrientation) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let norm = circular_average(n, PANELS, ORDER, |_, _| 1.0);
    let v = circular_average(n, PANELS, ORDER, |r, t| {
        let kr = k * r * A0;
        match orientation {
            LatticeOrientation::InPlane => j0(kr * t.sin()),
            LatticeOrientation::ZAxis => (kr * t.cos()).cos(),
        }
    });
    (v / norm).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagicPoint {
    pub wavelength: f64,
    pub eta_s: f64,
    pub eta_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicSearch {
    /// roots of η_a
    pub eta_a_roots: Vec<MagicPoint>,
    /// roots of η_s
    pub eta_s_roots: Vec<MagicPoint>,
    /// minimum of max(|η_a|, |η_s|) on the scan
    pub compromise: MagicPoint,
}

/// η = (f₁ − f₀)/f₀ for the pair (n0, n1).
pub fn eta(n0: u32, n1: u32, lattice: &LatticeSpec) -> f64 {
    let f0 = lattice_depth_factor(n0, lattice);
    let f1 = lattice_depth_factor(n1, lattice);
    (f1 - f0) / f0
}

fn point(
    lambda: f64,
    storage: (u32, u32),
    active: (u32, u32),
    o: LatticeOrientation,
) -> Result<MagicPoint> {
    let l = LatticeSpec::new(lambda, o, None)?;
    Ok(MagicPoint {
        wavelength: lambda,
        eta_s: eta(storage.0, storage.1, &l),
        eta_a: eta(active.0, active.1, &l),
    })
}

/// Scan [λ_lo, λ_hi] in `steps` and refine every sign change of η_a and η_s.
pub fn find_magic_wavelengths(
    storage: (u32, u32),
    active: (u32, u32),
    orientation: LatticeOrientation,
    range: (f64, f64),
    steps: usize,
) -> Result<MagicSearch> {
    if steps < 2 || !(range.1 > range.0) {
        return invalid("need an increasing range and at least two steps");
    }
    let grid: Vec<f64> = (0..=steps)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / steps as f64)
        .collect();
    let pts: Vec<MagicPoint> = grid
        .iter()
        .map(|&l| point(l, storage, active, orientation))
        .collect::<Result<_>>()?;
    let refine = |a: f64, b: f64, pick: &dyn Fn(&MagicPoint) -> f64| -> Result<MagicPoint> {
        let (mut lo, mut hi) = (a, b);
        let mut flo = pick(&point(lo, storage, active, orientation)?);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = pick(&point(mid, storage, active, orientation)?);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        point(0.5 * (lo + hi), storage, active, orientation)
    };
    let mut eta_a_roots = Vec::new();
    let mut eta_s_roots = Vec::new();
    for k in 0..steps {
        if pts[k].eta_a.signum() != pts[k + 1].eta_a.signum() {
            eta_a_roots.push(refine(grid[k], grid[k + 1], &|p| p.eta_a)?);
        }
        if pts[k].eta_s.signum() != pts[k + 1].eta_s.signum() {
            eta_s_roots.push(refine(grid[k], grid[k + 1], &|p| p.eta_s)?);
        }
    }
    if eta_a_roots.is_empty() && eta_s_roots.is_empty() {
        return Err(Error::NoSignChange {
            quantity: "η_a and η_s".into(),
        });
    }
    let cost = |p: &MagicPoint| p.eta_a.abs().max(p.eta_s.abs());
    let mut compromise = *pts
        .iter()
        .chain(&eta_a_roots)
        .chain(&eta_s_roots)
        .min_by(|a, b| cost(a).total_cmp(&cost(b)))
        .unwrap();
    // golden-section polish between the two roots when both exist
    if let (Some(a), Some(s)) = (eta_a_roots.first(), eta_s_roots.first()) {
        let (mut lo, mut hi) = (
            a.wavelength.min(s.wavelength),
            a.wavelength.max(s.wavelength),
        );
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..40 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if cost(&point(x1, storage, active, orientation)?)
                < cost(&point(x2, storage, active, orientation)?)
            {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let p = point(0.5 * (lo + hi), storage, active, orientation)?;
        if cost(&p) < cost(&compromise) {
            compromise = p;
        }
    }
    Ok(MagicSearch {
        eta_a_roots,
        eta_s_roots,
        compromise,
    })
}

/// Paraxial LG_{0m} beam; the azimuthal factor e^{imφ} is kept separate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LgBeam {
    pub p: u32,
    pub m: i32,
    pub waist: f64,
    pub wavelength: f64,
    pub power: f64,
}

impl LgBeam {
    pub fn new(m: i32, waist: f64, wavelength: f64, power: f64) -> Result<Self> {
        if !(waist > wavelength / 4.0) || !(power >= 0.0) {
            return invalid("LG beam needs waist > λ/4 and power ≥ 0");
        }
        Ok(Self {
            p: 0,
            m,
            waist,
            wavelength,
            power,
        })
    }

    /// Waist for a focusing numerical aperture, w0 = λ/(π NA).
    pub fn from_na(m: i32, na: f64, wavelength: f64, power: f64) -> Result<Self> {
        Self::new(m, wavelength / (PI * na), wavelength, power)
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * C / self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }
}

/// E_{0m}(r, z) in V/m, normalized so that ∫ (ε₀c/2)|E|² dA equals the power.
pub fn lg_field(beam: &LgBeam, r: f64, z: f64) -> Complex64 {
    let am = beam.m.unsigned_abs() as i32;
    let zr = beam.rayleigh_range();
    let w = beam.waist * (1.0 + (z / zr).powi(2)).sqrt();
    let k = 2.0 * PI / beam.wavelength;
    let amp0 = (4.0 * beam.power
        / (PI * beam.waist * beam.waist * EPS0 * C)
        / lgamma(am as f64 + 1.0).exp())
    .sqrt();
    let mag = amp0 * (beam.waist / w) * (2f64.sqrt() * r / w).powi(am) * (-r * r / (w * w)).exp();
    let curvature = if z == 0.0 {
        0.0
    } else {
        k * r * r / (2.0 * z * (1.0 + (zr / z).powi(2)))
    };
    let gouy = (am + 1) as f64 * (z / zr).atan();
    Complex64::from_polar(mag, -curvature + gouy)
}

/// Rabi frequency from the two evaluation paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PondRabi {
    /// ring approximation with r₀ = a₀(n² + n′²)/2
    pub ring: f64,
    /// full quadrature over both circular wavefunctions
    pub full: f64,
}

fn beam_product(b1: &LgBeam, b2: &LgBeam, p: [f64; 3]) -> Complex64 {
    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let ang = p[1].atan2(p[0]);
    lg_field(b1, rho, p[2])
        * lg_field(b2, rho, p[2]).conj()
        * Complex64::from_polar(1.0, (b1.m - b2.m) as f64 * ang)
}

/// Ponderomotive coupling ⟨n′C|U_p|nC⟩/ħ from the interference of two LG beams
/// at transverse offset `offset` of the beam axis relative to the atom.
pub fn pond_rabi(
    n: u32,
    n_prime: u32,
    beam1: &LgBeam,
    beam2: &LgBeam,
    offset: [f64; 3],
) -> Result<PondRabi> {
    if (beam1.waist - beam2.waist).abs() > 1e-12 * beam1.waist {
        return invalid("beams must share a waist");
    }
    let dn = n_prime as i64 - n as i64;
    let dm = (beam1.m - beam2.m) as i64;
    let omega = 0.5 * (beam1.omega() + beam2.omega());
    let k = E_CHARGE * E_CHARGE / (4.0 * HBAR * M_E * omega * omega);
    let r0 = 0.5 * A0 * ((n * n + n_prime * n_prime) as f64);
    let centered = offset.iter().all(|&c| c == 0.0);
    let ring = if centered {
        if dn != dm {
            0.0
        } else {
            k * (lg_field(beam1, r0, 0.0) * lg_field(beam2, r0, 0.0).conj()).re
        }
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        let np = 4 * PHI_POINTS;
        for i in 0..np {
            let ph = 2.0 * PI * i as f64 / np as f64;
            let p = [
                r0 * ph.cos() - offset[0],
                r0 * ph.sin() - offset[1],
                -offset[2],
            ];
            acc += beam_product(beam1, beam2, p) * Complex64::from_polar(1.0, -(dn as f64) * ph);
        }
        k * (acc / np as f64).norm()
    };
    let full = k * transition_integral(n, n_prime, &|p| {
        beam_product(
            beam1,
            beam2,
            [p[0] - offset[0], p[1] - offset[1], p[2] - offset[2]],
        )
    })?
    .norm();
    Ok(PondRabi { ring, full })
}

/// ∫ ψ*_{n′C} ψ_{nC} g(r) d³r for circular states (r in m).
pub fn transition_integral(
    n: u32,
    n_prime: u32,
    g: &dyn Fn([f64; 3]) -> Complex64,
) -> Result<Complex64> {
    let (rs, ts) = circular_nodes(n.min(n_prime), n.max(n_prime), PANELS, ORDER);
    let dn = n_prime as f64 - n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(r, wr) in &rs {
        for &(t, wt) in &ts {
            let amp =
                0.5 * (circular_log_density_au(n, r, t) + circular_log_density_au(n_prime, r, t));
            let w = wr * wt * amp.exp() * r * r * t.sin();
            if w == 0.0 {
                continue;
            }
            let rr = r * A0;
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..PHI_POINTS {
                let ph = 2.0 * PI * i as f64 / PHI_POINTS as f64;
                let p = [
                    rr * t.sin() * ph.cos(),
                    rr * t.sin() * ph.sin(),
                    rr * t.cos(),
                ];
                s += g(p) * Complex64::from_polar(1.0, -dn * ph);
            }
            acc += s * (w * 2.0 * PI / PHI_POINTS as f64);
        }
    }
    if !acc.re.is_finite() || !acc.im.is_finite() {
        return Err(Error::Convergence {
            what: "transition integral".into(),
            achieved: f64::NAN,
        });
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionSensitivity {
    /// Gaussian falloff length of Ω(r)/Ω(0), m
    pub sigma: f64,
    /// relative rms residual of the fit
    pub fit_residual: f64,
}

/// Offsets used in the Gaussian fit reach this fraction of the waist.
pub const FIT_RANGE: f64 = 0.3;

/// Fit Ω(r) = Ω₀ exp(−r²/2σ²) over transverse offsets up to `FIT_RANGE`·w₀.
pub fn rabi_position_sensitivity(
    n: u32,
    n_prime: u32,
    beam1: &LgBeam,
    beam2: &LgBeam,
) -> Result<PositionSensitivity> {
    let r_max = FIT_RANGE * beam1.waist;
    let omega0 = pond_rabi(n, n_prime, beam1, beam2, [0.0; 3])?.full;
    let pts = 8;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut samples = Vec::new();
    for i in 1..=pts {
        let d = r_max * i as f64 / pts as f64;
        let ratio = pond_rabi(n, n_prime, beam1, beam2, [d, 0.0, 0.0])?.full / omega0;
        let y = ratio.ln();
        samples.push((d, ratio));
        num += d.powi(4);
        den += d * d * y;
    }
    let sigma = (-num / den / 2.0).sqrt();
    let res = (samples
        .iter()
        .map(|&(d, r)| (r - (-d * d / (2.0 * sigma * sigma)).exp()).powi(2))
        .sum::<f64>()
        / pts as f64)
        .sqrt();
    if !sigma.is_finite() || res > 0.01 {
        return Err(Error::Convergence {
            what: "Gaussian fit of Ω(r)".into(),
            achieved: res,
        });
    }
    Ok(PositionSensitivity {
        sigma,
        fit_residual: res,
    })
}

/// Mean fractional rotation-angle error for thermal motion along one transverse
/// axis: 1 − ⟨exp(−x²/2σ²)⟩ = 1 − (1 + s²/σ²)^{−1/2}, s² = k_B T/(m ω²).
pub fn thermal_rotation_error(sigma: f64, temperature: f64, trap_omega: f64) -> f64 {
    let s2 = K_B * temperature / (M_RB87 * trap_omega * trap_omega);
    1.0 - 1.0 / (1.0 + s2 / (sigma * sigma)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThomsonErrors {
    /// photons/s at the intensity giving `trap_depth`
    pub scatter_rate: f64,
    /// 1/s, 3×10⁻⁷ × depth in Hz
    pub state_change_rate: f64,
    /// (16π/3) r_e ω / c
    pub error_per_pi: f64,
    /// 4e²ω/(3ε₀mₑc²) evaluated literally
    pub printed_expression: f64,
}

/// Fraction of Thomson scattering events that change the circular state, per Hz of depth.
pub const STATE_CHANGE_PER_HZ: f64 = 3e-7;

pub fn thomson_errors(omega: f64, trap_depth: f64) -> Result<ThomsonErrors> {
    if !(omega > 0.0) || !(trap_depth > 0.0) {
        return invalid("ω and trap depth must be positive");
    }
    let sigma_t = 8.0 * PI / 3.0 * R_ELECTRON * R_ELECTRON;
    let intensity = trap_depth / ponderomotive_coefficient(omega);
    Ok(ThomsonErrors {
        scatter_rate: intensity * sigma_t / (HBAR * omega),
        state_change_rate: STATE_CHANGE_PER_HZ * trap_depth / (2.0 * PI),
        error_per_pi: 16.0 * PI / 3.0 * R_ELECTRON * omega / C,
        printed_expression: 4.0 * E_CHARGE * E_CHARGE * omega / (3.0 * EPS0 * M_E * C * C),
    })
}

/// Raman comparison 2√2 π Γ/Δ_FS (both as ordinary frequencies).
pub fn raman_error(linewidth_hz: f64, fine_structure_hz: f64) -> f64 {
    2.0 * 2f64.sqrt() * PI * linewidth_hz / fine_structure_hz
}
