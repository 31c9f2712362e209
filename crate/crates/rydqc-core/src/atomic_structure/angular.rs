//! Wigner symbols and spherical tensors, in log space for large j.

use libm::lgamma;
use num_complex::Complex64;

fn lf(n: i64) -> f64 {
    lgamma(n as f64 + 1.0)
}

/// Wigner 3j symbol for integer arguments.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1 == 0 && m2 == 0 && m3 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return 0.0;
    }
    let tri =
        0.5 * (lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1));
    let pre =
        0.5 * (lf(j1 + m1) + lf(j1 - m1) + lf(j2 + m2) + lf(j2 - m2) + lf(j3 + m3) + lf(j3 - m3));
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = lf(k)
            + lf(j1 + j2 - j3 - k)
            + lf(j1 - m1 - k)
            + lf(j2 + m2 - k)
            + lf(j3 - j2 + m1 + k)
            + lf(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (tri + pre - den).exp();
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    phase * sum
}

/// ⟨j1 m1 j2 m2 | J M⟩
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let phase = if (j1 - j2 + m).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    phase * ((2 * j + 1) as f64).sqrt() * wigner_3j(j1, j2, j, m1, m2, -m)
}

/// ⟨l1 m1 | C_kq | l2 m2⟩ for the unnormalized spherical harmonic C_kq.
pub fn c_kq_element(l1: i64, m1: i64, k: i64, q: i64, l2: i64, m2: i64) -> f64 {
    if m1 != m2 + q || (l1 + l2 + k) % 2 == 1 {
        return 0.0;
    }
    let phase = if m1.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase
        * (((2 * l1 + 1) * (2 * l2 + 1)) as f64).sqrt()
        * wigner_3j(l1, k, l2, 0, 0, 0)
        * wigner_3j(l1, k, l2, -m1, q, m2)
}

/// Associated Legendre P_l^m(x), m ≥ 0, with the Condon-Shortley phase.
pub fn assoc_legendre(l: i64, m: i64, x: f64) -> f64 {
    let mut pmm = 1.0;
    if m > 0 {
        let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        let mut f = 1.0;
        for _ in 0..m {
            pmm *= -f * s;
            f += 2.0;
        }
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        pll = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

/// C_kq(θ, φ) = sqrt(4π/(2k+1)) Y_kq(θ, φ).
pub fn c_kq(k: i64, q: i64, theta: f64, phi: f64) -> Complex64 {
    let qa = q.abs();
    let norm = (0.5 * (lf(k - qa) - lf(k + qa))).exp();
    let base = norm * assoc_legendre(k, qa, theta.cos());
    let val = Complex64::from_polar(base, qa as f64 * phi);
    if q >= 0 {
        val
    } else {
        let s = if qa % 2 == 0 { 1.0 } else { -1.0 };
        val.conj() * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_3j_values() {
        // (1 1 0; 0 0 0) = -1/sqrt(3)
        assert!((wigner_3j(1, 1, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // (1 1 2; 1 -1 0) = 1/sqrt(30)
        assert!((wigner_3j(1, 1, 2, 1, -1, 0) - 1.0 / 30f64.sqrt()).abs() < 1e-14);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
    }

    #[test]
    fn cg_orthonormal_rows() {
        for m in -2..=2 {
            let s: f64 = (-1..=1)
                .flat_map(|m1| (-1..=1).map(move |m2| (m1, m2)))
                .filter(|(m1, m2)| m1 + m2 == m)
                .map(|(m1, m2)| clebsch_gordan(1, m1, 1, m2, 2, m).powi(2))
                .sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn large_l_symbols_are_finite() {
        let v = c_kq_element(69, 69, 1, 1, 68, 68);
        assert!(v.is_finite() && v.abs() > 0.1);
    }

    #[test]
    fn c_kq_matches_closed_forms() {
        let (th, ph) = (0.7_f64, 0.3_f64);
        assert!((c_kq(1, 0, th, ph).re - th.cos()).abs() < 1e-14);
        let c11 = c_kq(1, 1, th, ph);
        let expect = Complex64::from_polar(-th.sin() / 2f64.sqrt(), ph);
        assert!((c11 - expect).norm() < 1e-14);
        let c2 = c_kq(2, 0, th, ph).re;
        assert!((c2 - 0.5 * (3.0 * th.cos().powi(2) - 1.0)).abs() < 1e-14);
    }
}
