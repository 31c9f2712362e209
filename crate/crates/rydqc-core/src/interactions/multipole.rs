//! Two-atom multipole expansion of the Coulomb interaction.

use libm::lgamma;
use num_complex::Complex64;

use crate::atomic_structure::{
    c_kq, c_kq_element, clebsch_gordan, radial_matrix_element_au, RydbergLevel,
};
use crate::constants::{A0, EPS0, E_CHARGE, HBAR};
use crate::error::{invalid, Result};

/// Coefficients c[k1][k2][q1][q2] (rad/s per a0^{k1+k2}) such that
/// V = Σ c · (r1^k1 C_{k1 q1}) (r2^k2 C_{k2 q2}), with R pointing from atom 1
/// to atom 2.
#[derive(Debug, Clone)]
pub struct MultipoleTable {
    order: usize,
    coef: Vec<Complex64>,
}

impl MultipoleTable {
    pub fn new(r: [f64; 3], order: u32) -> Result<Self> {
        let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !(dist > 0.0) || !dist.is_finite() {
            return invalid("separation must be positive");
        }
        if order == 0 {
            return invalid("multipole order must be at least 1");
        }
        let theta = (r[2] / dist).clamp(-1.0, 1.0).acos();
        let phi = r[1].atan2(r[0]);
        let ord = order as usize;
        let w = 2 * ord + 1;
        let mut coef = vec![Complex64::new(0.0, 0.0); (ord + 1) * (ord + 1) * w * w];
        let lf = |n: i64| lgamma(n as f64 + 1.0);
        for k1 in 1..=ord as i64 {
            for k2 in 1..=ord as i64 {
                let kk = k1 + k2;
                let sign = if k2 % 2 == 0 { 1.0 } else { -1.0 };
                let pref = E_CHARGE * E_CHARGE / (4.0 * std::f64::consts::PI * EPS0)
                    * sign
                    * (0.5 * (lf(2 * kk) - lf(2 * k1) - lf(2 * k2))).exp()
                    / dist.powi(kk as i32 + 1)
                    * A0.powi(kk as i32)
                    / HBAR;
                for q1 in -k1..=k1 {
                    for q2 in -k2..=k2 {
                        let cg = clebsch_gordan(k1, q1, k2, q2, kk, q1 + q2);
                        if cg == 0.0 {
                            continue;
                        }
                        let val = c_kq(kk, q1 + q2, theta, phi).conj() * (pref * cg);
                        let idx = Self::index(ord, k1 as usize, k2 as usize, q1, q2);
                        coef[idx] = val;
                    }
                }
            }
        }
        Ok(Self { order: ord, coef })
    }

    fn index(ord: usize, k1: usize, k2: usize, q1: i64, q2: i64) -> usize {
        let w = 2 * ord + 1;
        (((k1 * (ord + 1) + k2) * w) + (q1 + ord as i64) as usize) * w + (q2 + ord as i64) as usize
    }

    pub fn order(&self) -> u32 {
        self.order as u32
    }

    pub fn get(&self, k1: usize, k2: usize, q1: i64, q2: i64) -> Complex64 {
        if k1 == 0
            || k2 == 0
            || k1 > self.order
            || k2 > self.order
            || q1.unsigned_abs() as usize > k1
            || q2.unsigned_abs() as usize > k2
        {
            return Complex64::new(0.0, 0.0);
        }
        self.coef[Self::index(self.order, k1, k2, q1, q2)]
    }
}

/// ⟨a| r^k C_kq |b⟩ in a0^k with q = m_a − m_b.
pub fn one_body_element(a: &RydbergLevel, b: &RydbergLevel, k: u32) -> Result<f64> {
    let q = a.m as i64 - b.m as i64;
    if q.unsigned_abs() > k as u64 || (a.l + b.l + k) % 2 == 1 || a.l.abs_diff(b.l) > k {
        return Ok(0.0);
    }
    let ang = c_kq_element(a.l as i64, a.m as i64, k as i64, q, b.l as i64, b.m as i64);
    if ang == 0.0 {
        return Ok(0.0);
    }
    Ok(ang * radial_matrix_element_au(a, b, k as i32)?)
}

/// ⟨pa| V |pb⟩ in rad/s for atoms separated by `r` (m), atom 1 → atom 2.
pub fn multipole_element(
    pa: (&RydbergLevel, &RydbergLevel),
    pb: (&RydbergLevel, &RydbergLevel),
    r: [f64; 3],
    max_order: u32,
) -> Result<Complex64> {
    let table = MultipoleTable::new(r, max_order)?;
    let q1 = pa.0.m as i64 - pb.0.m as i64;
    let q2 = pa.1.m as i64 - pb.1.m as i64;
    let mut v = Complex64::new(0.0, 0.0);
    for k1 in 1..=max_order {
        let e1 = one_body_element(pa.0, pb.0, k1)?;
        if e1 == 0.0 {
            continue;
        }
        for k2 in 1..=max_order {
            let e2 = one_body_element(pa.1, pb.1, k2)?;
            if e2 == 0.0 {
                continue;
            }
            v += table.get(k1 as usize, k2 as usize, q1, q2) * (e1 * e2);
        }
    }
    Ok(v)
}
