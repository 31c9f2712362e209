//! Radiative and useful lifetimes of circular states in an engineered LDOS.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::atomic_structure::{dipole_channels, DipoleChannel, Polarization, RydbergLevel};
use crate::constants::{C, EPS0, E_CHARGE, HBAR, K_B, TWO_PI};
use crate::error::{invalid, Error, Result};
use crate::ponderomotive::STATE_CHANGE_PER_HZ;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdosRow {
    pub frequency_hz: f64,
    #[serde(rename = "P_sigma")]
    pub p_sigma: f64,
    #[serde(rename = "P_pi")]
    pub p_pi: f64,
}

/// Purcell factor P(ω) relative to free space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LdosModel {
    FreeSpace,
    /// P = p_min on the closed band [f_low, f_high], 1 elsewhere
    Bandstop {
        p_min: f64,
        f_low: f64,
        f_high: f64,
    },
    Tabulated(Vec<LdosRow>),
}

impl LdosModel {
    pub fn bandstop(p_min: f64, f_low: f64, f_high: f64) -> Result<Self> {
        if !(p_min >= 0.0) || !(f_low > 0.0) || !(f_high > f_low) {
            return invalid("bandstop needs p_min ≥ 0 and 0 < f_low < f_high");
        }
        Ok(Self::Bandstop {
            p_min,
            f_low,
            f_high,
        })
    }

    /// The cryostat-style default: P = 1e-4 from 20 to 40 GHz.
    pub fn default_bandstop() -> Self {
        Self::Bandstop {
            p_min: 1e-4,
            f_low: 20e9,
            f_high: 40e9,
        }
    }

    pub fn tabulated(rows: Vec<LdosRow>) -> Result<Self> {
        if rows.len() < 2 {
            return invalid("LDOS table needs at least two rows");
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.frequency_hz > 0.0)
                || !(r.p_sigma >= 0.0)
                || !(r.p_pi >= 0.0)
                || !r.p_sigma.is_finite()
                || !r.p_pi.is_finite()
            {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: "frequency must be positive and P values finite and ≥ 0".into(),
                });
            }
            if i > 0 && r.frequency_hz <= rows[i - 1].frequency_hz {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: "frequencies must increase strictly".into(),
                });
            }
        }
        Ok(Self::Tabulated(rows))
    }

    /// Reads `frequency_hz,P_sigma,P_pi` CSV.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                msg: e.to_string(),
            })?
            .clone();
        if header.iter().collect::<Vec<_>>() != ["frequency_hz", "P_sigma", "P_pi"] {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "expected header frequency_hz,P_sigma,P_pi, got {}",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize().enumerate() {
            rows.push(rec.map_err(|e: csv::Error| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?);
        }
        Self::tabulated(rows)
    }
}

/// Evaluate the LDOS model. Tables interpolate ln P linearly in frequency,
/// falling back to linear interpolation when an endpoint is zero.
pub fn purcell(model: &LdosModel, frequency: f64, polarization: Polarization) -> Result<f64> {
    if !(frequency > 0.0) {
        return invalid(format!("frequency must be positive, got {frequency}"));
    }
    match model {
        LdosModel::FreeSpace => Ok(1.0),
        LdosModel::Bandstop {
            p_min,
            f_low,
            f_high,
        } => Ok(if (*f_low..=*f_high).contains(&frequency) {
            *p_min
        } else {
            1.0
        }),
        LdosModel::Tabulated(rows) => {
            let lo = rows[0].frequency_hz;
            let hi = rows[rows.len() - 1].frequency_hz;
            if frequency < lo || frequency > hi {
                return Err(Error::OutOfRange {
                    value: frequency,
                    lo,
                    hi,
                });
            }
            let k = rows
                .partition_point(|r| r.frequency_hz <= frequency)
                .clamp(1, rows.len() - 1);
            let (a, b) = (&rows[k - 1], &rows[k]);
            let pick = |r: &LdosRow| {
                if polarization == Polarization::Pi {
                    r.p_pi
                } else {
                    r.p_sigma
                }
            };
            let (pa, pb) = (pick(a), pick(b));
            let t = (frequency - a.frequency_hz) / (b.frequency_hz - a.frequency_hz);
            Ok(if pa > 0.0 && pb > 0.0 {
                (pa.ln() + t * (pb.ln() - pa.ln())).exp()
            } else {
                pa + t * (pb - pa)
            })
        }
    }
}

/// Wall-loss floor 1 − R ≈ 4√(2ε₀ω/σ).
pub fn pmin_from_conductivity(conductivity: f64, frequency: f64) -> Result<f64> {
    if !(conductivity > 0.0) || !(frequency > 0.0) {
        return invalid("conductivity and frequency must be positive");
    }
    Ok(4.0 * (2.0 * EPS0 * TWO_PI * frequency / conductivity).sqrt())
}

/// Free-space spontaneous rate for a channel (1/s).
pub fn einstein_a(channel: &DipoleChannel) -> f64 {
    let w = channel.frequency;
    w.powi(3) * E_CHARGE * E_CHARGE * channel.strength
        / (3.0 * std::f64::consts::PI * EPS0 * HBAR * C.powi(3))
}

/// Mean photon number at angular frequency ω; exactly 0 at T = 0.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelRate {
    pub to: RydbergLevel,
    pub polarization: Polarization,
    pub frequency_hz: f64,
    pub emission: bool,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRate {
    pub total: f64,
    pub channels: Vec<ChannelRate>,
}

impl DecayRate {
    pub fn lifetime(&self) -> f64 {
        1.0 / self.total
    }
}

/// Total decay rate of nC with spontaneous, stimulated and absorptive channels up to n_max.
pub fn total_decay_rate(n: u32, model: &LdosModel, t_b: f64, n_max: u32) -> Result<DecayRate> {
    if n < 2 || n_max < n + 3 {
        return invalid(format!(
            "need n ≥ 2 and n_max ≥ n + 3 (n = {n}, n_max = {n_max})"
        ));
    }
    if !(t_b >= 0.0) {
        return invalid("temperature must be ≥ 0");
    }
    let from = RydbergLevel::circular(n)?;
    let mut channels = Vec::new();
    for ch in dipole_channels(&from, n_max)? {
        let nbar = thermal_occupation(ch.frequency, t_b);
        let weight = if ch.emission { 1.0 + nbar } else { nbar };
        if weight == 0.0 {
            continue;
        }
        let p = purcell(model, ch.frequency / TWO_PI, ch.polarization)?;
        channels.push(ChannelRate {
            to: ch.to,
            polarization: ch.polarization,
            frequency_hz: ch.frequency / TWO_PI,
            emission: ch.emission,
            rate: einstein_a(&ch) * p * weight,
        });
    }
    let total = channels.iter().map(|c| c.rate).sum();
    Ok(DecayRate { total, channels })
}

/// Default channel cutoff above n.
pub const DEFAULT_DN_MAX: u32 = 6;

/// `total_decay_rate` with n_max = n + 6, checked against doubling the cutoff.
pub fn converged_decay_rate(n: u32, model: &LdosModel, t_b: f64) -> Result<DecayRate> {
    let a = total_decay_rate(n, model, t_b, n + DEFAULT_DN_MAX)?;
    let b = total_decay_rate(n, model, t_b, n + 2 * DEFAULT_DN_MAX)?;
    let rel = (a.total - b.total).abs() / b.total;
    if rel > 1e-2 {
        return Err(Error::Convergence {
            what: "channel cutoff".into(),
            achieved: rel,
        });
    }
    Ok(b)
}

/// Inverse of the summed loss rates (1/s); trap loss uses 3e-7 per Hz of depth.
pub fn useful_lifetime(
    radiative_rate: f64,
    trap_depth_hz: f64,
    collision_rate: f64,
) -> Result<f64> {
    if !(radiative_rate >= 0.0) || !(trap_depth_hz >= 0.0) || !(collision_rate >= 0.0) {
        return invalid("rates must be nonnegative");
    }
    Ok(1.0 / (radiative_rate + STATE_CHANGE_PER_HZ * trap_depth_hz + collision_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandstop_edges_are_inside() {
        let m = LdosModel::default_bandstop();
        assert_eq!(purcell(&m, 20e9, Polarization::Pi).unwrap(), 1e-4);
        assert_eq!(purcell(&m, 40e9, Polarization::SigmaPlus).unwrap(), 1e-4);
        assert_eq!(purcell(&m, 41e9, Polarization::SigmaPlus).unwrap(), 1.0);
    }

    #[test]
    fn csv_table_round_trip() {
        let text = "frequency_hz,P_sigma,P_pi\n1e9,1,0.5\n1e10,1e-2,0.5\n";
        let m = LdosModel::from_csv(text.as_bytes()).unwrap();
        let p = purcell(&m, 5.5e9, Polarization::SigmaMinus).unwrap();
        assert!((p - 0.1).abs() < 1e-12);
        assert!(purcell(&m, 2e10, Polarization::Pi).is_err());
        assert!(LdosModel::from_csv("f,P_sigma,P_pi\n1,1,1\n2,1,1\n".as_bytes()).is_err());
        assert!(
            LdosModel::from_csv("frequency_hz,P_sigma,P_pi\n2,1,1\n1,1,1\n".as_bytes()).is_err()
        );
    }

    #[test]
    fn conductivity_floor() {
        let p = pmin_from_conductivity(5e9, 50e9).unwrap();
        assert!((p - 1.3e-4).abs() < 0.05e-4, "{p}");
    }

    #[test]
    fn useful_lifetime_composition() {
        let t = useful_lifetime(1.0 / 20.0, 1e6, 1.0 / 400.0).unwrap();
        assert!((t - 2.8).abs() < 0.05, "{t}");
    }
}
