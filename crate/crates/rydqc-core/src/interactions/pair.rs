//! Truncated pair basis and diagonalization of one-atom plus multipole terms.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

use crate::atomic_structure::{field_hamiltonian, level_energy, FieldConfig, RydbergLevel};
use crate::constants::TWO_PI;
use crate::error::{invalid, Error, Result};

use super::multipole::{one_body_element, MultipoleTable};

/// Truncation of the pair basis around a target pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairWindows {
    /// |n − n_target| ≤ n_window
    pub n_window: u32,
    /// per atom: m ≥ n_target − 1 − m_depth
    pub m_depth: u32,
    /// |m1 + m2 − M_target| ≤ m_total_window
    pub m_total_window: u32,
    /// zero-field pair detuning cut, rad/s
    pub energy_window: f64,
    /// largest multipole order per atom (1 = dipole, 2 = quadrupole)
    pub multipole_order: u32,
}

impl Default for PairWindows {
    fn default() -> Self {
        Self {
            n_window: 2,
            m_depth: 5,
            m_total_window: 5,
            energy_window: TWO_PI * 10e9,
            multipole_order: 2,
        }
    }
}

impl PairWindows {
    pub fn zero() -> Self {
        Self {
            n_window: 0,
            m_depth: 0,
            m_total_window: 0,
            energy_window: 0.0,
            multipole_order: 2,
        }
    }

    /// Every window one step larger.
    pub fn enlarged(&self) -> Self {
        Self {
            n_window: self.n_window + 1,
            m_depth: self.m_depth + 1,
            m_total_window: self.m_total_window + 1,
            energy_window: self.energy_window * 1.5,
            multipole_order: self.multipole_order,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairBasis {
    pub entries: Vec<(RydbergLevel, RydbergLevel)>,
    pub target: (RydbergLevel, RydbergLevel),
    pub windows: PairWindows,
}

impl PairBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, a: &RydbergLevel, b: &RydbergLevel) -> bool {
        self.entries.iter().any(|(x, y)| x == a && y == b)
    }
}

/// Single-atom states sharing one set of multipole operator matrices.
#[derive(Debug)]
pub(crate) struct AtomSet {
    pub levels: Vec<RydbergLevel>,
    /// ops[k-1][i][j] = ⟨i| r^k C_kq |j⟩, q = m_i − m_j, in a0^k
    pub ops: Vec<Array2<f64>>,
}

impl AtomSet {
    pub fn new(levels: Vec<RydbergLevel>, order: u32) -> Result<Self> {
        let d = levels.len();
        let mut ops = Vec::new();
        for k in 1..=order {
            let mut m = Array2::zeros((d, d));
            for i in 0..d {
                for j in i..d {
                    let v = one_body_element(&levels[i], &levels[j], k)?;
                    if v != 0.0 {
                        m[[i, j]] = v;
                        // ⟨j|C_{k,-q}|i⟩ = (−1)^q ⟨i|C_kq|j⟩
                        let q = levels[i].m - levels[j].m;
                        m[[j, i]] = if q.rem_euclid(2) == 0 { v } else { -v };
                    }
                }
            }
            ops.push(m);
        }
        Ok(Self { levels, ops })
    }

    /// One-atom Hamiltonian relative to `anchor` (rad/s).
    pub fn hamiltonian(
        &self,
        fields: &FieldConfig,
        anchor: f64,
        offset: f64,
    ) -> Result<Array2<f64>> {
        let mut h = field_hamiltonian(&self.levels, fields)?;
        for (i, l) in self.levels.iter().enumerate() {
            h[[i, i]] += level_energy(l) - anchor + offset;
        }
        Ok(h)
    }
}

/// Near-circular levels around `n_target`.
pub(crate) fn near_circular_levels(
    n_target: u32,
    w: &PairWindows,
    species: crate::Species,
) -> Result<Vec<RydbergLevel>> {
    let m_min = n_target as i64 - 1 - w.m_depth as i64;
    let mut out = Vec::new();
    let lo = n_target.saturating_sub(w.n_window).max(1);
    for n in lo..=n_target + w.n_window {
        for l in 0..n {
            for m in m_min.max(-(l as i64))..=l as i64 {
                out.push(RydbergLevel::new(n, l, m as i32, species, 0.0)?);
            }
        }
    }
    Ok(out)
}

fn level_key(l: &RydbergLevel) -> (u32, u32, i32, u64) {
    (l.n, l.l, l.m, l.defect.to_bits())
}

fn union_levels(a: Vec<RydbergLevel>, b: Vec<RydbergLevel>) -> Vec<RydbergLevel> {
    let mut all = a;
    for l in b {
        if !all.contains(&l) {
            all.push(l);
        }
    }
    all.sort_by_key(level_key);
    all
}

/// Ordered pairs (i, j) of set indices passing the energy and M windows,
/// sorted by |detuning| then lexicographically.
fn select_pairs(
    a: &[RydbergLevel],
    b: &[RydbergLevel],
    target: (&RydbergLevel, &RydbergLevel),
    w: &PairWindows,
) -> Vec<(usize, usize)> {
    let e_t = level_energy(target.0) + level_energy(target.1);
    let m_t = target.0.m + target.1.m;
    let mut out: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if (x.m + y.m - m_t).unsigned_abs() > w.m_total_window {
                continue;
            }
            let det = (level_energy(x) + level_energy(y) - e_t).abs();
            let is_target = (x == target.0 && y == target.1) || (x == target.1 && y == target.0);
            if det > w.energy_window * (1.0 + 1e-12) && !is_target {
                continue;
            }
            out.push((det, i, j));
        }
    }
    out.sort_by(|p, q| {
        p.0.partial_cmp(&q.0)
            .unwrap()
            .then_with(|| level_key(&a[p.1]).cmp(&level_key(&a[q.1])))
            .then_with(|| level_key(&b[p.2]).cmp(&level_key(&b[q.2])))
    });
    out.into_iter().map(|(_, i, j)| (i, j)).collect()
}

fn validate_targets(a: &RydbergLevel, b: &RydbergLevel) -> Result<()> {
    for l in [a, b] {
        if !l.is_circular() || l.m < 0 {
            return invalid(format!(
                "target level n={} l={} m={} must be circular with m = n−1",
                l.n, l.l, l.m
            ));
        }
    }
    Ok(())
}

/// Pair basis for two circular atoms.
pub fn build_pair_basis(
    target: (RydbergLevel, RydbergLevel),
    windows: &PairWindows,
) -> Result<PairBasis> {
    validate_targets(&target.0, &target.1)?;
    let levels = union_levels(
        near_circular_levels(target.0.n, windows, target.0.species)?,
        near_circular_levels(target.1.n, windows, target.1.species)?,
    );
    let pairs = select_pairs(&levels, &levels, (&target.0, &target.1), windows);
    if pairs.is_empty() {
        return invalid("empty pair basis");
    }
    Ok(PairBasis {
        entries: pairs.iter().map(|&(i, j)| (levels[i], levels[j])).collect(),
        target,
        windows: *windows,
    })
}

/// Eigen-solution of one block with the index of the target component(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockLevel {
    /// interaction shift of the identified eigenstate, rad/s
    pub shift: f64,
    /// squared overlap with the unperturbed target vector
    pub overlap: f64,
}

/// Result of one pair problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairShift {
    /// (E+ + E−)/2 − E_ref, rad/s
    pub mean: f64,
    /// (E+ − E−)/4 in the Pauli-operator convention, rad/s (0 for equal levels)
    pub exchange: f64,
    /// smallest identification overlap among the blocks used
    pub min_overlap: f64,
    pub basis_size: usize,
}

pub const OVERLAP_THRESHOLD: f64 = 0.5;

fn identify(h: &Array2<f64>, target: &[(usize, f64)], label: &str) -> Result<(f64, f64)> {
    let (w, v) = h
        .eigh(UPLO::Upper)
        .map_err(|e| Error::Linalg(e.to_string()))?;
    let mut best = (0, -1.0);
    for k in 0..w.len() {
        let amp: f64 = target.iter().map(|&(i, c)| v[[i, k]] * c).sum();
        let ov = amp * amp;
        if ov > best.1 {
            best = (k, ov);
        }
    }
    if best.1 < OVERLAP_THRESHOLD {
        return Err(Error::LevelCrossing {
            state: label.to_string(),
            overlap: best.1,
        });
    }
    // The eigenvalue carries roundoff of order eps·‖H‖ from far-detuned basis states; the
    // Rayleigh quotient weights those by their tiny amplitudes and is far more accurate.
    let x = v.column(best.0);
    let rq = x.dot(&h.dot(&x)) / x.dot(&x);
    Ok((rq, best.1))
}

fn in_plane_frame(r: [f64; 3]) -> [f64; 3] {
    [(r[0] * r[0] + r[1] * r[1]).sqrt(), 0.0, r[2]]
}

fn interaction_fn<'a>(
    sa: &'a AtomSet,
    sb: &'a AtomSet,
    table: &'a MultipoleTable,
) -> impl Fn(usize, usize, usize, usize) -> f64 + 'a {
    move |i, j, k, l| {
        let q1 = (sa.levels[i].m - sa.levels[k].m) as i64;
        let q2 = (sb.levels[j].m - sb.levels[l].m) as i64;
        let mut v = 0.0;
        for (k1, o1) in sa.ops.iter().enumerate() {
            let a = o1[[i, k]];
            if a == 0.0 {
                continue;
            }
            for (k2, o2) in sb.ops.iter().enumerate() {
                let b = o2[[j, l]];
                if b == 0.0 {
                    continue;
                }
                v += table.get(k1 + 1, k2 + 1, q1, q2).re * a * b;
            }
        }
        v
    }
}

/// Two atoms drawn from one level set (identical species, circular targets).
#[derive(Debug, Clone)]
pub struct CircularPair {
    set: Arc<AtomSet>,
    pairs: Vec<(usize, usize)>,
    target: (usize, usize),
    anchor: f64,
    windows: PairWindows,
}

impl CircularPair {
    pub fn new(na: u32, nb: u32, windows: &PairWindows) -> Result<Self> {
        let a = RydbergLevel::circular(na)?;
        let b = RydbergLevel::circular(nb)?;
        let basis = build_pair_basis((a, b), windows)?;
        let levels = union_levels(
            near_circular_levels(na, windows, a.species)?,
            near_circular_levels(nb, windows, b.species)?,
        );
        let set = Arc::new(AtomSet::new(levels, windows.multipole_order)?);
        let idx: HashMap<(u32, u32, i32, u64), usize> = set
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| (level_key(l), i))
            .collect();
        let pairs = basis
            .entries
            .iter()
            .map(|(x, y)| (idx[&level_key(x)], idx[&level_key(y)]))
            .collect();
        let target = (idx[&level_key(&a)], idx[&level_key(&b)]);
        let anchor = 0.5 * (level_energy(&a) + level_energy(&b));
        Ok(Self {
            set,
            pairs,
            target,
            anchor,
            windows: *windows,
        })
    }

    pub fn basis_size(&self) -> usize {
        self.pairs.len()
    }

    pub fn windows(&self) -> &PairWindows {
        &self.windows
    }

    /// Shift of the target pair at displacement `r` (m) from atom 1 to atom 2.
    pub fn solve(&self, r: [f64; 3], fields: &FieldConfig) -> Result<PairShift> {
        self.solve_with_offset(r, fields, 0.0)
    }

    /// As `solve`, with every one-atom energy shifted by `offset` (rad/s).
    pub fn solve_with_offset(
        &self,
        r: [f64; 3],
        fields: &FieldConfig,
        offset: f64,
    ) -> Result<PairShift> {
        let r = in_plane_frame(r);
        let table = MultipoleTable::new(r, self.windows.multipole_order)?;
        let h1 = self.set.hamiltonian(fields, self.anchor, offset)?;
        let (ta, tb) = self.target;
        for t in [ta, tb] {
            let off: f64 = (0..h1.ncols())
                .filter(|&c| c != t)
                .map(|c| h1[[t, c]].abs())
                .sum();
            if off > 0.0 {
                return invalid("target level is not an eigenstate of the one-atom Hamiltonian");
            }
        }
        let e_ref = h1[[ta, ta]] + h1[[tb, tb]];
        let v = interaction_fn(&self.set, &self.set, &table);
        let full = |i: usize, j: usize, k: usize, l: usize| -> f64 {
            let mut x = v(i, j, k, l);
            if j == l {
                x += h1[[i, k]];
            }
            if i == k {
                x += h1[[j, l]];
            }
            x
        };
        let label = |s: &str| format!("({},{}){}", self.set.levels[ta].n, self.set.levels[tb].n, s);
        if r[2].abs() > 1e-15 * r[0].abs().max(r[2].abs()) {
            return self.solve_unsymmetrized(&full, e_ref, label(""));
        }
        let eps = |i: usize, j: usize| -> f64 {
            if (self.set.levels[i].m + self.set.levels[j].m).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let sign_t = eps(ta, tb);
        let mut energies = Vec::new();
        let mut min_ov = 1.0f64;
        let taus: Vec<f64> = if ta == tb {
            vec![1.0]
        } else {
            vec![sign_t, -sign_t]
        };
        for tau in taus {
            let canon: Vec<(usize, usize)> = self
                .pairs
                .iter()
                .filter(|&&(i, j)| i < j || (i == j && tau > 0.0))
                .copied()
                .collect();
            let norm = |i: usize, j: usize| if i == j { 2.0 } else { 2f64.sqrt() };
            let d = canon.len();
            let mut h = Array2::zeros((d, d));
            for (p, &(i, j)) in canon.iter().enumerate() {
                for (q, &(k, l)) in canon.iter().enumerate().skip(p) {
                    let x = 2.0 * (full(i, j, k, l) + tau * eps(k, l) * full(i, j, l, k))
                        / (norm(i, j) * norm(k, l));
                    h[[p, q]] = x;
                    h[[q, p]] = x;
                }
            }
            let key = (ta.min(tb), ta.max(tb));
            let t = canon
                .iter()
                .position(|&c| c == key)
                .ok_or_else(|| Error::Invalid("target missing from basis".into()))?;
            for p in 0..d {
                h[[p, p]] -= e_ref;
            }
            let suffix = if tau * sign_t > 0.0 { "+" } else { "-" };
            let (e, ov) = identify(&h, &[(t, 1.0)], &label(suffix))?;
            energies.push(e);
            min_ov = min_ov.min(ov);
        }
        let (mean, exchange) = if energies.len() == 1 {
            (energies[0], 0.0)
        } else {
            (
                0.5 * (energies[0] + energies[1]),
                0.25 * (energies[0] - energies[1]),
            )
        };
        Ok(PairShift {
            mean,
            exchange,
            min_overlap: min_ov,
            basis_size: self.pairs.len(),
        })
    }

    /// Pair Hamiltonian in the product basis, relative to the unperturbed target
    /// energy. Every element is evaluated on its own, without mirroring.
    pub fn pair_hamiltonian(&self, r: [f64; 3], fields: &FieldConfig) -> Result<Array2<f64>> {
        let r = in_plane_frame(r);
        let table = MultipoleTable::new(r, self.windows.multipole_order)?;
        let h1 = self.set.hamiltonian(fields, self.anchor, 0.0)?;
        let (ta, tb) = self.target;
        let e_ref = h1[[ta, ta]] + h1[[tb, tb]];
        let v = interaction_fn(&self.set, &self.set, &table);
        let d = self.pairs.len();
        let mut h = Array2::zeros((d, d));
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for (q, &(k, l)) in self.pairs.iter().enumerate() {
                let mut x = v(i, j, k, l);
                if j == l {
                    x += h1[[i, k]];
                }
                if i == k {
                    x += h1[[j, l]];
                }
                h[[p, q]] = x;
            }
            h[[p, p]] -= e_ref;
        }
        Ok(h)
    }

    fn solve_unsymmetrized(
        &self,
        full: &dyn Fn(usize, usize, usize, usize) -> f64,
        e_ref: f64,
        label: String,
    ) -> Result<PairShift> {
        let d = self.pairs.len();
        let mut h = Array2::zeros((d, d));
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for (q, &(k, l)) in self.pairs.iter().enumerate().skip(p) {
                let x = full(i, j, k, l);
                h[[p, q]] = x;
                h[[q, p]] = x;
            }
            h[[p, p]] -= e_ref;
        }
        let (ta, tb) = self.target;
        let pa = self.pairs.iter().position(|&c| c == (ta, tb)).unwrap();
        if ta == tb {
            let (e, ov) = identify(&h, &[(pa, 1.0)], &label)?;
            return Ok(PairShift {
                mean: e,
                exchange: 0.0,
                min_overlap: ov,
                basis_size: d,
            });
        }
        let pb = self.pairs.iter().position(|&c| c == (tb, ta)).unwrap();
        let s = 0.5f64.sqrt();
        let (ep, op) = identify(&h, &[(pa, s), (pb, s)], &format!("{label}+"))?;
        let (em, om) = identify(&h, &[(pa, s), (pb, -s)], &format!("{label}-"))?;
        Ok(PairShift {
            mean: 0.5 * (ep + em),
            exchange: 0.25 * (ep - em),
            min_overlap: op.min(om),
            basis_size: d,
        })
    }
}

/// Two distinguishable atoms, each with its own level set.
#[derive(Debug, Clone)]
pub struct MixedPair {
    set_a: Arc<AtomSet>,
    set_b: Arc<AtomSet>,
    pairs: Vec<(usize, usize)>,
    target: usize,
    anchors: (f64, f64),
    order: u32,
}

impl MixedPair {
    pub(crate) fn new(
        levels_a: Vec<RydbergLevel>,
        levels_b: Vec<RydbergLevel>,
        target: (RydbergLevel, RydbergLevel),
        windows: &PairWindows,
    ) -> Result<Self> {
        let ia = levels_a
            .iter()
            .position(|l| *l == target.0)
            .ok_or_else(|| Error::Invalid("target A missing".into()))?;
        let ib = levels_b
            .iter()
            .position(|l| *l == target.1)
            .ok_or_else(|| Error::Invalid("target B missing".into()))?;
        let pairs = select_pairs(&levels_a, &levels_b, (&target.0, &target.1), windows);
        let t = pairs.iter().position(|&p| p == (ia, ib)).unwrap();
        let anchors = (level_energy(&target.0), level_energy(&target.1));
        Ok(Self {
            set_a: Arc::new(AtomSet::new(levels_a, windows.multipole_order)?),
            set_b: Arc::new(AtomSet::new(levels_b, windows.multipole_order)?),
            pairs,
            target: t,
            anchors,
            order: windows.multipole_order,
        })
    }

    pub fn basis_size(&self) -> usize {
        self.pairs.len()
    }

    /// Shift and overlap of the product target at displacement `r` (m).
    pub fn solve(&self, r: [f64; 3], fields: &FieldConfig) -> Result<BlockLevel> {
        let r = in_plane_frame(r);
        let table = MultipoleTable::new(r, self.order)?;
        let ha = self.set_a.hamiltonian(fields, self.anchors.0, 0.0)?;
        let hb = self.set_b.hamiltonian(fields, self.anchors.1, 0.0)?;
        let (ta, tb) = self.pairs[self.target];
        let e_ref = ha[[ta, ta]] + hb[[tb, tb]];
        let v = interaction_fn(&self.set_a, &self.set_b, &table);
        let d = self.pairs.len();
        let mut h = Array2::zeros((d, d));
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for (q, &(k, l)) in self.pairs.iter().enumerate().skip(p) {
                let mut x = v(i, j, k, l);
                if j == l {
                    x += ha[[i, k]];
                }
                if i == k {
                    x += hb[[j, l]];
                }
                h[[p, q]] = x;
                h[[q, p]] = x;
            }
            h[[p, p]] -= e_ref;
        }
        let label = format!("ancilla+{}C", self.set_b.levels[tb].n);
        let (e, ov) = identify(&h, &[(self.target, 1.0)], &label)?;
        Ok(BlockLevel {
            shift: e,
            overlap: ov,
        })
    }
}
