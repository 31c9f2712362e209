//! Gauss-Legendre rules and circular-state integration grids.

use std::f64::consts::PI;

use crate::atomic_structure::circular_log_density_au;

/// Nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n <= 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite rule with `panels` equal panels of `order` nodes on [a, b].
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((c + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

/// (node, weight) pairs.
pub type Nodes = Vec<(f64, f64)>;

/// (r, θ) nodes in atomic units covering circular states n_lo..=n_hi.
pub fn circular_nodes(n_lo: u32, n_hi: u32, panels: usize, order: usize) -> (Nodes, Nodes) {
    let lo = n_lo as f64;
    let hi = n_hi as f64;
    let r_a = (lo * lo - 12.0 * lo.powf(1.5)).max(0.0);
    let r_b = hi * hi + 16.0 * hi.powf(1.5) + 20.0;
    let l = (n_lo.max(2) - 1) as f64;
    let half = (10.0 / (2.0 * l).sqrt()).min(PI / 2.0);
    (
        composite(r_a, r_b, panels, order),
        composite(PI / 2.0 - half, PI / 2.0 + half, panels, order),
    )
}

/// ∫|ψ_nC|² g(r, θ) dV / (2π) with r in a0 (φ integral left to the caller).
pub fn circular_average(
    n: u32,
    panels: usize,
    order: usize,
    mut g: impl FnMut(f64, f64) -> f64,
) -> f64 {
    let (rs, ts) = circular_nodes(n, n, panels, order);
    let mut sum = 0.0;
    for &(r, wr) in &rs {
        for &(t, wt) in &ts {
            let d = circular_log_density_au(n, r, t).exp();
            if d == 0.0 {
                continue;
            }
            sum += wr * wt * d * r * r * t.sin() * g(r, t);
        }
    }
    2.0 * PI * sum
}
