//! Radial wavefunctions on a shared grid x = sqrt(r / a0).
//!
//! Every wavefunction is stored as y(x) = r^{3/4} R(r) on x_i = i·h, so that
//! ⟨a|r^k|b⟩ = ∫ 2 x^{2k+2} y_a y_b dx. Signs are fixed so that y > 0 in the
//! classically forbidden outer tail.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use libm::lgamma;

use crate::error::{Error, Result};

pub const GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct WfKey {
    n: u32,
    l: u32,
    defect_bits: u64,
}

fn outer_radius(nstar: f64) -> f64 {
    2.0 * nstar * (nstar + 25.0)
}

fn grid_len(nstar: f64) -> usize {
    (outer_radius(nstar).sqrt() / GRID_STEP) as usize + 2
}

/// Generalized Laguerre L_k^α(ρ) by upward recurrence.
fn laguerre(k: u32, alpha: f64, rho: f64) -> f64 {
    let mut l0 = 1.0;
    if k == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - rho;
    for j in 1..k {
        let j = j as f64;
        let l2 = ((2.0 * j + 1.0 + alpha - rho) * l1 - (j + alpha) * l0) / (j + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Hydrogenic R_nl(r), r in a0, evaluated in log space.
pub fn hydrogenic_radial(n: u32, l: u32, r: f64) -> f64 {
    let nf = n as f64;
    let rho = 2.0 * r / nf;
    let k = n - l - 1;
    let log_norm = 0.5
        * (3.0 * (2.0 / nf).ln() + lgamma(k as f64 + 1.0)
            - (2.0 * nf).ln()
            - lgamma((n + l) as f64 + 1.0));
    let lag = laguerre(k, (2 * l + 1) as f64, rho);
    let tail_sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    if rho == 0.0 {
        return if l == 0 {
            log_norm.exp() * lag * tail_sign
        } else {
            0.0
        };
    }
    if lag == 0.0 {
        return 0.0;
    }
    let mag = (log_norm + l as f64 * rho.ln() - rho / 2.0 + lag.abs().ln()).exp();
    mag * lag.signum() * tail_sign
}

fn hydrogenic_grid(n: u32, l: u32) -> Vec<f64> {
    let len = grid_len(n as f64);
    (0..len)
        .map(|i| {
            let x = i as f64 * GRID_STEP;
            let r = x * x;
            r.powf(0.75) * hydrogenic_radial(n, l, r)
        })
        .collect()
}

/// Coulomb-tail wavefunction at effective quantum number n* by inward Numerov
/// integration, truncated where it starts to diverge inside the core.
fn numerov_grid(nstar: f64, l: u32) -> Result<Vec<f64>> {
    let h = GRID_STEP;
    let len = grid_len(nstar);
    let energy = -0.5 / (nstar * nstar);
    let ll = (l * (l + 1)) as f64;
    let g: Vec<f64> = (0..len)
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let x = i as f64 * h;
            let r = x * x;
            4.0 * r * (ll / (r * r) - 2.0 / r - 2.0 * energy) + 0.75 / r
        })
        .collect();
    let r_in = if l > 0 { (0.25 * ll).max(1.0) } else { 1.0 };
    let mut y = vec![0.0; len];
    y[len - 1] = 1e-10;
    y[len - 2] = 1e-10 * (g[len - 1].max(0.0).sqrt() * h).exp();
    let c = h * h / 12.0;
    let mut stop = 0;
    for i in (2..len - 1).rev() {
        y[i - 1] = (2.0 * y[i] * (1.0 + 5.0 * c * g[i]) - y[i + 1] * (1.0 - c * g[i + 1]))
            / (1.0 - c * g[i - 1]);
        let r = ((i - 1) as f64 * h).powi(2);
        if r < r_in && y[i - 1].abs() > y[i].abs() {
            stop = i - 1;
            break;
        }
        if !y[i - 1].is_finite() {
            return Err(Error::Convergence {
                what: format!("Numerov n*={nstar} l={l}"),
                achieved: f64::NAN,
            });
        }
    }
    for v in y.iter_mut().take(stop + 1) {
        *v = 0.0;
    }
    let norm: f64 = y
        .iter()
        .enumerate()
        .map(|(i, v)| 2.0 * (i as f64 * h).powi(2) * v * v)
        .sum::<f64>()
        * h;
    let s = norm.sqrt();
    Ok(y.into_iter().map(|v| v / s).collect())
}

struct Cache {
    wf: Mutex<HashMap<WfKey, Arc<Vec<f64>>>>,
    elems: Mutex<HashMap<(WfKey, WfKey, i32), f64>>,
}

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Cache {
        wf: Mutex::new(HashMap::new()),
        elems: Mutex::new(HashMap::new()),
    })
}

fn wavefunction(n: u32, l: u32, defect: f64) -> Result<Arc<Vec<f64>>> {
    let key = WfKey {
        n,
        l,
        defect_bits: defect.to_bits(),
    };
    if let Some(w) = cache().wf.lock().unwrap().get(&key) {
        return Ok(w.clone());
    }
    let w = Arc::new(if defect == 0.0 {
        hydrogenic_grid(n, l)
    } else {
        numerov_grid(n as f64 - defect, l)?
    });
    cache().wf.lock().unwrap().insert(key, w.clone());
    Ok(w)
}

/// ⟨n1 l1| r^k |n2 l2⟩ in units of a0^k.
pub fn radial_integral(
    n1: u32,
    l1: u32,
    d1: f64,
    n2: u32,
    l2: u32,
    d2: f64,
    k: i32,
) -> Result<f64> {
    let mut ka = WfKey {
        n: n1,
        l: l1,
        defect_bits: d1.to_bits(),
    };
    let mut kb = WfKey {
        n: n2,
        l: l2,
        defect_bits: d2.to_bits(),
    };
    if (ka.n, ka.l, ka.defect_bits) > (kb.n, kb.l, kb.defect_bits) {
        std::mem::swap(&mut ka, &mut kb);
    }
    if let Some(v) = cache().elems.lock().unwrap().get(&(ka, kb, k)) {
        return Ok(*v);
    }
    let ya = wavefunction(ka.n, ka.l, f64::from_bits(ka.defect_bits))?;
    let yb = wavefunction(kb.n, kb.l, f64::from_bits(kb.defect_bits))?;
    let h = GRID_STEP;
    let p = 2 * k + 2;
    let sum: f64 = ya
        .iter()
        .zip(yb.iter())
        .enumerate()
        .skip(1)
        .map(|(i, (a, b))| 2.0 * (i as f64 * h).powi(p) * a * b)
        .sum();
    let val = sum * h;
    if !val.is_finite() {
        return Err(Error::Convergence {
            what: format!("radial integral ({n1},{l1})-({n2},{l2}) k={k}"),
            achieved: val,
        });
    }
    cache().elems.lock().unwrap().insert((ka, kb, k), val);
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydrogen_ground_state() {
        assert!((hydrogenic_radial(1, 0, 0.0) - 2.0).abs() < 1e-12);
        assert!((hydrogenic_radial(1, 0, 1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn numerov_reproduces_hydrogen_at_integer_nstar() {
        for &(n, l) in &[(40u32, 1u32), (30, 2), (20, 5)] {
            let a = numerov_grid(n as f64, l).unwrap();
            let b = hydrogenic_grid(n, l);
            let ov: f64 = a
                .iter()
                .zip(&b)
                .enumerate()
                .map(|(i, (x, y))| 2.0 * (i as f64 * GRID_STEP).powi(2) * x * y)
                .sum::<f64>()
                * GRID_STEP;
            assert!((ov - 1.0).abs() < 1e-4, "({n},{l}) overlap {ov}");
        }
    }

    #[test]
    fn normalization_and_mean_radius() {
        let n0 = radial_integral(59, 58, 0.0, 59, 58, 0.0, 0).unwrap();
        assert!((n0 - 1.0).abs() < 1e-10);
        let r = radial_integral(59, 58, 0.0, 59, 58, 0.0, 1).unwrap();
        assert!((r - 59.0 * 59.5).abs() < 1e-6 * r);
        // <r> = (3n² − l(l+1))/2 for l = 0
        let r = radial_integral(30, 0, 0.0, 30, 0, 0.0, 1).unwrap();
        assert!((r - 1350.0).abs() < 1e-6 * r);
    }
}
