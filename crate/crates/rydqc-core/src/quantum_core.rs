//! Dense linear algebra shared by the simulation modules.
//!
//! Index convention: site 0 varies slowest in every tensor product.
//! Spin operators are Pauli matrices (eigenvalues ±1).

use ndarray::{linalg::kron, Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: CVec,
    local_dim: usize,
    n_sites: usize,
}

impl StateVector {
    pub fn new(amplitudes: CVec, local_dim: usize, n_sites: usize) -> Result<Self> {
        let dim = local_dim.pow(n_sites as u32);
        if amplitudes.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return invalid(format!("state norm {norm} differs from 1"));
        }
        Ok(Self {
            amplitudes,
            local_dim,
            n_sites,
        })
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn evolve(&self, u: &Propagator) -> Result<Self> {
        if u.dim() != self.amplitudes.len() {
            return Err(Error::Dimension {
                expected: self.amplitudes.len(),
                got: u.dim(),
            });
        }
        let mut amps = u.matrix.dot(&self.amplitudes);
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.mapv_inplace(|a| a / norm);
        Ok(Self {
            amplitudes: amps,
            local_dim: self.local_dim,
            n_sites: self.n_sites,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: CMat,
    pub elapsed: f64,
}

impl Propagator {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMat::eye(dim),
            elapsed: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |U†U − I|
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.matrix.t().mapv(|z| z.conj()).dot(&self.matrix);
        max_abs_diff(&p, &CMat::eye(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() < tol
    }

    /// Apply `next` after `self`.
    pub fn then(&self, next: &Propagator) -> Propagator {
        Propagator {
            matrix: next.matrix.dot(&self.matrix),
            elapsed: self.elapsed + next.elapsed,
        }
    }

    pub fn dagger(&self) -> Propagator {
        Propagator {
            matrix: dagger(&self.matrix),
            elapsed: -self.elapsed,
        }
    }
}

pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// max |H − H†|
pub fn hermiticity_residual(h: &CMat) -> f64 {
    max_abs_diff(h, &dagger(h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpLabel {
    Sx,
    Sy,
    Sz,
    N,
    SbarX,
    SbarY,
    SbarZ,
    Nbar,
    I,
}

pub fn pauli(axis: usize) -> CMat {
    match axis {
        0 => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        1 => ndarray::array![[ZERO, -I], [I, ZERO]],
        _ => ndarray::array![[ONE, ZERO], [ZERO, -ONE]],
    }
}

/// Single-site matrix for `label`.
///
/// With `local_dim == 4` the basis is ordered {0s, 1s, 0a, 1a}; S acts on the
/// storage block and S̄ on the active block. With `local_dim == 2` only storage
/// operators exist and `n` is the identity.
pub fn local_operator(label: OpLabel, local_dim: usize) -> Result<CMat> {
    use OpLabel::*;
    match local_dim {
        2 => match label {
            Sx => Ok(pauli(0)),
            Sy => Ok(pauli(1)),
            Sz => Ok(pauli(2)),
            N | I => Ok(CMat::eye(2)),
            _ => invalid(format!("{label:?} needs the four-level site basis")),
        },
        4 => {
            let mut m = CMat::zeros((4, 4));
            let place = |m: &mut CMat, off: usize, b: &CMat| {
                for r in 0..2 {
                    for c in 0..2 {
                        m[[off + r, off + c]] = b[[r, c]];
                    }
                }
            };
            match label {
                Sx => place(&mut m, 0, &pauli(0)),
                Sy => place(&mut m, 0, &pauli(1)),
                Sz => place(&mut m, 0, &pauli(2)),
                N => place(&mut m, 0, &CMat::eye(2)),
                SbarX => place(&mut m, 2, &pauli(0)),
                SbarY => place(&mut m, 2, &pauli(1)),
                SbarZ => place(&mut m, 2, &pauli(2)),
                Nbar => place(&mut m, 2, &CMat::eye(2)),
                I => m = CMat::eye(4),
            }
            Ok(m)
        }
        d => invalid(format!("local dimension {d} not supported (2 or 4)")),
    }
}

pub fn kron_chain(ops: &[CMat]) -> CMat {
    let mut out = CMat::eye(1);
    for op in ops {
        out = kron(&out, op);
    }
    out
}

pub fn embed_operator(
    local_op: &CMat,
    site: usize,
    n_sites: usize,
    local_dim: usize,
) -> Result<CMat> {
    if local_op.nrows() != local_dim || local_op.ncols() != local_dim {
        return Err(Error::Dimension {
            expected: local_dim,
            got: local_op.nrows().max(local_op.ncols()),
        });
    }
    if site >= n_sites {
        return invalid(format!("site {site} out of range for {n_sites} sites"));
    }
    let ops: Vec<CMat> = (0..n_sites)
        .map(|s| {
            if s == site {
                local_op.clone()
            } else {
                CMat::eye(local_dim)
            }
        })
        .collect();
    Ok(kron_chain(&ops))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub coefficient: f64,
    pub site_indices: Vec<usize>,
    pub operator_labels: Vec<OpLabel>,
}

impl HamiltonianTerm {
    pub fn new(coefficient: f64, sites: &[usize], labels: &[OpLabel]) -> Self {
        Self {
            coefficient,
            site_indices: sites.to_vec(),
            operator_labels: labels.to_vec(),
        }
    }
}

/// Sum of terms as a dense matrix.
pub fn assemble(terms: &[HamiltonianTerm], n_sites: usize, local_dim: usize) -> Result<CMat> {
    let dim = local_dim.pow(n_sites as u32);
    let mut h = CMat::zeros((dim, dim));
    let id = CMat::eye(local_dim);
    for t in terms {
        if t.site_indices.len() != t.operator_labels.len() {
            return Err(Error::Dimension {
                expected: t.site_indices.len(),
                got: t.operator_labels.len(),
            });
        }
        if t.coefficient == 0.0 {
            continue;
        }
        let mut ops = vec![id.clone(); n_sites];
        for (&s, &l) in t.site_indices.iter().zip(&t.operator_labels) {
            if s >= n_sites {
                return invalid(format!("site {s} out of range for {n_sites} sites"));
            }
            ops[s] = ops[s].dot(&local_operator(l, local_dim)?);
        }
        h.scaled_add(C64::new(t.coefficient, 0.0), &kron_chain(&ops));
    }
    Ok(h)
}

/// Spectral decomposition of a Hermitian matrix, reusable for any duration.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(h: &CMat) -> Result<Self> {
        // LAPACK sees a row-major complex matrix as its transpose (= conjugate), which conjugates
        // the eigenvectors; hand it column-major storage instead.
        let mut f = CMat::zeros(h.raw_dim().f());
        f.assign(h);
        let (values, vectors) = f
            .eigh(UPLO::Upper)
            .map_err(|e| Error::Linalg(e.to_string()))?;
        Ok(Self { values, vectors })
    }

    /// exp(−i H t)
    pub fn exp(&self, t: f64) -> CMat {
        let phases = self.values.mapv(|e| C64::from_polar(1.0, -e * t));
        let scaled = &self.vectors * &phases.insert_axis(ndarray::Axis(0));
        scaled.dot(&dagger(&self.vectors))
    }
}

/// exp(−i H t) for Hermitian H.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    Ok(HermitianEigen::new(h)?.exp(t))
}

/// Product of exp(−i H_k dt_k) applied in schedule order.
pub fn propagate(schedule: &[(CMat, f64)]) -> Result<Propagator> {
    let Some(first) = schedule.first() else {
        return Ok(Propagator::identity(1));
    };
    let dim = first.0.nrows();
    let mut u = Propagator::identity(dim);
    for (k, (h, dt)) in schedule.iter().enumerate() {
        if h.nrows() != dim || h.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: h.nrows(),
            });
        }
        if !(*dt >= 0.0) {
            return invalid(format!("segment {k} has negative duration {dt}"));
        }
        let scale = max_abs(h).max(f64::MIN_POSITIVE);
        let res = hermiticity_residual(h);
        if res > 1e-12 * scale {
            return Err(Error::NonHermitian {
                segment: k,
                residual: res,
            });
        }
        let step = expm_hermitian(h, *dt).map_err(|_| Error::NonFinite { segment: k })?;
        if step.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { segment: k });
        }
        u = u.then(&Propagator {
            matrix: step,
            elapsed: *dt,
        });
    }
    Ok(u)
}

/// Generator for Monte-Carlo sample `stream` under `seed`.
pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_vector(dim: usize, rng: &mut ChaCha8Rng) -> CVec {
    let mut v: CVec = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|a| a / norm);
    v
}

/// Haar-random pure state as a flat vector of dimension `dim`.
pub fn haar_vector(dim: usize, seed: u64, stream: u64) -> Result<CVec> {
    if dim == 0 {
        return invalid("Haar state of dimension 0");
    }
    Ok(gaussian_vector(dim, &mut sample_rng(seed, stream)))
}

pub fn haar_state(dim: usize, seed: u64) -> Result<StateVector> {
    let v = haar_vector(dim, seed, 0)?;
    Ok(StateVector {
        amplitudes: v,
        local_dim: dim,
        n_sites: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub sem: f64,
    pub samples: usize,
}

/// Restriction of W = U_ref† U to the index set `subspace` (all indices if None).
pub fn relative_block(
    u: &Propagator,
    u_ref: &Propagator,
    subspace: Option<&[usize]>,
) -> Result<CMat> {
    if u.dim() != u_ref.dim() {
        return Err(Error::Dimension {
            expected: u_ref.dim(),
            got: u.dim(),
        });
    }
    let w = dagger(&u_ref.matrix).dot(&u.matrix);
    Ok(match subspace {
        None => w,
        Some(idx) => {
            if let Some(&bad) = idx.iter().find(|&&i| i >= w.nrows()) {
                return invalid(format!("subspace index {bad} out of range"));
            }
            CMat::from_shape_fn((idx.len(), idx.len()), |(r, c)| w[[idx[r], idx[c]]])
        }
    })
}

/// Monte-Carlo estimate of mean (1 − |⟨ψ|U_ref† U|ψ⟩|²)/n_atoms over Haar states
/// supported on `subspace`.
pub fn average_error_per_atom(
    u: &Propagator,
    u_ref: &Propagator,
    n_atoms: usize,
    n_samples: usize,
    seed: u64,
    subspace: Option<&[usize]>,
) -> Result<MonteCarloEstimate> {
    if n_samples == 0 || n_atoms == 0 {
        return invalid("need at least one sample and one atom");
    }
    let w = relative_block(u, u_ref, subspace)?;
    let dim = w.nrows();
    let errs: Vec<f64> = (0..n_samples as u64)
        .map(|i| {
            let psi = gaussian_vector(dim, &mut sample_rng(seed, i));
            let wpsi = w.dot(&psi);
            let ov: C64 = psi.iter().zip(wpsi.iter()).map(|(a, b)| a.conj() * b).sum();
            ((1.0 - ov.norm_sqr()).max(0.0)) / n_atoms as f64
        })
        .collect();
    Ok(mean_sem(&errs))
}

/// Exact Haar average of (1 − |⟨ψ|W|ψ⟩|²)/n_atoms for the block W, from
/// E|⟨ψ|W|ψ⟩|² = (|Tr W|² + Tr W W†)/(d(d+1)).
pub fn haar_average_error(w: &CMat, n_atoms: usize) -> f64 {
    let d = w.nrows() as f64;
    let tr: C64 = w.diag().sum();
    let frob: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    ((1.0 - (tr.norm_sqr() + frob) / (d * (d + 1.0))) / n_atoms as f64).max(0.0)
}

pub fn mean_sem(xs: &[f64]) -> MonteCarloEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sem = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    MonteCarloEstimate {
        mean,
        sem,
        samples: xs.len(),
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pauli_z_on_site_zero_is_slowest() {
        let z = embed_operator(&pauli(2), 0, 2, 2).unwrap();
        let diag: Vec<f64> = z.diag().iter().map(|c| c.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn complex_eigenvectors_solve_eigenproblem() {
        let h = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.2, 0.7)],
            [C64::new(0.2, -0.7), C64::new(-0.5, 0.0)]
        ];
        let e = HermitianEigen::new(&h).unwrap();
        for k in 0..2 {
            let v = e.vectors.column(k).to_owned();
            let r = h.dot(&v) - v.mapv(|z| z * e.values[k]);
            assert!(r.iter().all(|z| z.norm() < 1e-12));
        }
        // exp(−iθσ_y/2) = cos(θ/2) − i sin(θ/2) σ_y
        let u = expm_hermitian(&pauli(1).mapv(|z| z * 0.5), 0.3).unwrap();
        assert!((u[[0, 1]].re + 0.15f64.sin()).abs() < 1e-12);
        assert!((u[[1, 0]].re - 0.15f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn identity_embeds_to_identity() {
        let e = embed_operator(&CMat::eye(2), 1, 3, 2).unwrap();
        assert_eq!(max_abs_diff(&e, &CMat::eye(8)), 0.0);
    }

    #[test]
    fn embed_rejects_wrong_size() {
        let err = embed_operator(&CMat::eye(3), 0, 2, 2).unwrap_err();
        assert!(matches!(err, Error::Dimension { got: 3, .. }));
    }

    #[test]
    fn rabi_flop_gives_sigma_x() {
        let omega = 2.0 * PI * 1e6;
        let h = pauli(0).mapv(|z| z * 0.5 * omega);
        let u = propagate(&[(h, PI / omega)]).unwrap();
        let target = pauli(0).mapv(|z| z * -I);
        assert!(max_abs_diff(&u.matrix, &target) < 1e-12);
    }

    #[test]
    fn empty_schedule_is_identity() {
        let u = propagate(&[]).unwrap();
        assert_eq!(u.dim(), 1);
        assert!(u.is_unitary(1e-15));
    }

    #[test]
    fn rejects_non_hermitian_segment() {
        let mut h = pauli(0);
        h[[0, 1]] = C64::new(2.0, 0.0);
        let err = propagate(&[(pauli(2), 1.0), (h, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::NonHermitian { segment: 1, .. }));
    }

    #[test]
    fn four_level_operators_act_on_their_blocks() {
        let sz = local_operator(OpLabel::Sz, 4).unwrap();
        let sbz = local_operator(OpLabel::SbarZ, 4).unwrap();
        let d: Vec<f64> = sz.diag().iter().map(|c| c.re).collect();
        let db: Vec<f64> = sbz.diag().iter().map(|c| c.re).collect();
        assert_eq!(d, vec![1.0, -1.0, 0.0, 0.0]);
        assert_eq!(db, vec![0.0, 0.0, 1.0, -1.0]);
        assert!(local_operator(OpLabel::SbarX, 2).is_err());
    }

    #[test]
    fn haar_dim_one_and_determinism() {
        let s = haar_state(1, 9).unwrap();
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        let a = haar_state(16, 42).unwrap();
        let b = haar_state(16, 42).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert!(haar_state(0, 1).is_err());
    }

    #[test]
    fn haar_first_moment() {
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| haar_vector(4, 7, i).unwrap()[0].norm_sqr())
            .collect();
        let est = mean_sem(&xs);
        assert!((est.mean - 0.25).abs() < 3.0 * est.sem, "{est:?}");
    }

    #[test]
    fn equal_propagators_have_zero_error() {
        let u = Propagator {
            matrix: expm_hermitian(&pauli(1), 0.3).unwrap(),
            elapsed: 0.0,
        };
        let e = average_error_per_atom(&u, &u, 1, 10, 1, None).unwrap();
        assert!(e.mean < 1e-15);
        let mut g = u.clone();
        g.matrix.mapv_inplace(|z| z * C64::from_polar(1.0, 0.7));
        let e = average_error_per_atom(&g, &u, 1, 10, 1, None).unwrap();
        assert!(e.mean < 1e-12);
    }

    #[test]
    fn small_z_rotation_matches_haar_oracle() {
        // E|⟨ψ|e^{-iθσz/2}|ψ⟩|² over the Bloch sphere is 1 − sin²(θ/2)·2/3.
        let theta: f64 = 0.01;
        let u = Propagator {
            matrix: expm_hermitian(&pauli(2), theta / 2.0).unwrap(),
            elapsed: 0.0,
        };
        let id = Propagator::identity(2);
        let oracle = (2.0 / 3.0) * (theta / 2.0).sin().powi(2);
        let est = average_error_per_atom(&u, &id, 1, 100_000, 3, None).unwrap();
        assert!(
            (est.mean - oracle).abs() < 3.0 * est.sem,
            "{est:?} vs {oracle}"
        );
        let w = relative_block(&u, &id, None).unwrap();
        assert!((haar_average_error(&w, 1) - oracle).abs() < 1e-15);
    }
}
