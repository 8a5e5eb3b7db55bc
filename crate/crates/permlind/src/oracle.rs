//! Dense full-Hilbert-space reference model for small systems.
//!
//! Every system is represented explicitly, so the Hilbert space is
//! `(d+1)^N * prod(fock)` and nothing is gained from symmetry; that is the
//! point. The master equation is evaluated with textbook operator algebra,
//! entirely independent of the symmetric-basis assembly, and the two are
//! compared through the Hilbert-Schmidt projection `P[s] = tr[B_s rho]` onto
//! the symmetrized basis elements.
//!
//! A hard size cap keeps every reference run at desk scale.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{Count, SymBasis};
use crate::dynamics::DensityVector;

/// Hilbert-space dimension cap for reference models.
pub const MAX_HILBERT_DIM: usize = 64;

#[derive(Error, Debug, PartialEq)]
pub enum OracleError {
    #[error("Hilbert dimension {0} exceeds the reference cap of {MAX_HILBERT_DIM}")]
    SizeBound(usize),
    #[error("density matrix dimension {0} does not match the model ({1})")]
    DimensionMismatch(usize, usize),
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Minimal complex sparse matrix in triplet form; the reference models are
/// tiny, assembled once, and applied to dense density matrices.
#[derive(Clone, Debug)]
pub struct SparseMat {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseMat {
    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect(),
        }
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, a * v)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self { dim: self.dim, entries }.compressed()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut entries = Vec::new();
        for &(r, k, v) in &self.entries {
            for &(c, w) in &by_row[k] {
                entries.push((r, c, v * w));
            }
        }
        Self { dim: self.dim, entries }.compressed()
    }

    fn compressed(mut self) -> Self {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, C64)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|&(_, _, v)| v != czero());
        Self { dim: self.dim, entries: out }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::from_elem((self.dim, self.dim), czero());
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `out += coeff * (self . rho)`
    pub fn acc_left(&self, rho: &Array2<C64>, coeff: C64, out: &mut Array2<C64>) {
        for &(r, k, v) in &self.entries {
            let cv = coeff * v;
            for c in 0..self.dim {
                out[(r, c)] += cv * rho[(k, c)];
            }
        }
    }

    /// `out += coeff * (rho . self)`
    pub fn acc_right(&self, rho: &Array2<C64>, coeff: C64, out: &mut Array2<C64>) {
        for &(k, c, v) in &self.entries {
            let cv = coeff * v;
            for r in 0..self.dim {
                out[(r, c)] += cv * rho[(r, k)];
            }
        }
    }

    /// `tr[self . rho]`
    pub fn expectation(&self, rho: &Array2<C64>) -> C64 {
        self.entries.iter().map(|&(r, c, v)| v * rho[(c, r)]).sum()
    }
}

struct RawTerm {
    left: SparseMat,
    right: SparseMat,
    coeff: C64,
}

struct Channel {
    jump: SparseMat,
    jump_dag: SparseMat,
    ada: SparseMat,
    half_rate: f64,
}

/// Explicit model on the full tensor-product space.
pub struct DenseModel {
    n_systems: usize,
    n_levels: usize,
    focks: Vec<usize>,
    dim: usize,
    site_stride: Vec<usize>,
    mode_stride: Vec<usize>,
    hamiltonian: SparseMat,
    channels: Vec<Channel>,
    raw: Vec<RawTerm>,
}

impl DenseModel {
    pub fn new(n_systems: usize, n_levels: usize, focks: &[usize]) -> Result<Self, OracleError> {
        let mode_space: usize = focks.iter().product();
        let dim = n_levels.pow(n_systems as u32) * mode_space;
        if dim > MAX_HILBERT_DIM {
            return Err(OracleError::SizeBound(dim));
        }
        let mut site_stride = vec![0usize; n_systems];
        let mut acc = mode_space;
        for i in (0..n_systems).rev() {
            site_stride[i] = acc;
            acc *= n_levels;
        }
        let mut mode_stride = vec![0usize; focks.len()];
        let mut acc = 1usize;
        for j in (0..focks.len()).rev() {
            mode_stride[j] = acc;
            acc *= focks[j];
        }
        Ok(Self {
            n_systems,
            n_levels,
            focks: focks.to_vec(),
            dim,
            site_stride,
            mode_stride,
            hamiltonian: SparseMat::zero(dim),
            channels: Vec::new(),
            raw: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_systems(&self) -> usize {
        self.n_systems
    }

    fn site_level(&self, idx: usize, site: usize) -> usize {
        (idx / self.site_stride[site]) % self.n_levels
    }

    fn mode_occ(&self, idx: usize, mode: usize) -> usize {
        (idx / self.mode_stride[mode]) % self.focks[mode]
    }

    /// `sigma_kl = |k><l|` acting on one site.
    pub fn sigma(&self, site: usize, k: usize, l: usize) -> SparseMat {
        let stride = self.site_stride[site] as isize;
        let entries = (0..self.dim)
            .filter(|&idx| self.site_level(idx, site) == l)
            .map(|idx| {
                let row = (idx as isize + (k as isize - l as isize) * stride) as usize;
                (row, idx, C64::new(1.0, 0.0))
            })
            .collect();
        SparseMat { dim: self.dim, entries }
    }

    /// Collective operator `J_kl = sum_i sigma_kl^i`.
    pub fn collective(&self, k: usize, l: usize) -> SparseMat {
        let mut acc = SparseMat::zero(self.dim);
        for site in 0..self.n_systems {
            acc = acc.plus(&self.sigma(site, k, l));
        }
        acc
    }

    /// Truncated annihilation operator of a mode.
    pub fn annihilator(&self, mode: usize) -> SparseMat {
        let entries = (0..self.dim)
            .filter_map(|idx| {
                let m = self.mode_occ(idx, mode);
                (m >= 1).then(|| {
                    (idx - self.mode_stride[mode], idx, C64::new((m as f64).sqrt(), 0.0))
                })
            })
            .collect();
        SparseMat { dim: self.dim, entries }
    }

    /// Exact number operator `b†b` of a mode (diagonal).
    pub fn number_op(&self, mode: usize) -> SparseMat {
        let entries = (0..self.dim)
            .filter_map(|idx| {
                let m = self.mode_occ(idx, mode);
                (m > 0).then(|| (idx, idx, C64::new(m as f64, 0.0)))
            })
            .collect();
        SparseMat { dim: self.dim, entries }
    }

    pub fn add_hamiltonian(&mut self, h: &SparseMat) {
        self.hamiltonian = self.hamiltonian.plus(h);
    }

    /// Lindblad channel `half_rate * (2 A rho A† - A†A rho - rho A†A)`.
    pub fn add_dissipator(&mut self, jump: SparseMat, half_rate: f64) {
        let jump_dag = jump.dagger();
        let ada = jump_dag.matmul(&jump);
        self.channels.push(Channel { jump, jump_dag, ada, half_rate });
    }

    /// Raw superoperator term `coeff * (left . rho . right)`.
    pub fn add_raw_term(&mut self, left: SparseMat, right: SparseMat, coeff: C64) {
        self.raw.push(RawTerm { left, right, coeff });
    }

    /// `d rho / dt = i(rho H - H rho) + dissipators + raw terms`.
    pub fn rhs(&self, rho: &Array2<C64>) -> Array2<C64> {
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let mut out = Array2::from_elem((self.dim, self.dim), czero());
        self.hamiltonian.acc_right(rho, i, &mut out);
        self.hamiltonian.acc_left(rho, -i, &mut out);
        let mut tmp = Array2::from_elem((self.dim, self.dim), czero());
        for ch in &self.channels {
            let r = C64::new(ch.half_rate, 0.0);
            tmp.fill(czero());
            ch.jump.acc_left(rho, one, &mut tmp);
            ch.jump_dag.acc_right(&tmp, 2.0 * r, &mut out);
            ch.ada.acc_left(rho, -r, &mut out);
            ch.ada.acc_right(rho, -r, &mut out);
        }
        for term in &self.raw {
            tmp.fill(czero());
            term.left.acc_left(rho, one, &mut tmp);
            term.right.acc_right(&tmp, term.coeff, &mut out);
        }
        out
    }

    /// Materialize the superoperator under row-major vectorization,
    /// `vec(A rho B) = kron(A, B^T) vec(rho)`.
    pub fn superoperator(&self) -> Array2<C64> {
        let n2 = self.dim * self.dim;
        let mut sup = Array2::from_elem((n2, n2), czero());
        let i = C64::new(0.0, 1.0);
        let id = SparseMat::identity(self.dim);
        let dim = self.dim;
        let mut add = |a: &SparseMat, b: &SparseMat, coeff: C64| {
            // vec index (r, c) -> r * dim + c; A rho B touches rho[(ca, rb)]
            for &(ra, ca, va) in &a.entries {
                for &(rb, cb, vb) in &b.entries {
                    sup[(ra * dim + cb, ca * dim + rb)] += coeff * va * vb;
                }
            }
        };
        add(&id, &self.hamiltonian, i);
        add(&self.hamiltonian, &id, -i);
        for ch in &self.channels {
            let r = C64::new(ch.half_rate, 0.0);
            add(&ch.jump, &ch.jump_dag, 2.0 * r);
            add(&ch.ada, &id, -r);
            add(&id, &ch.ada, -r);
        }
        for term in &self.raw {
            add(&term.left, &term.right, term.coeff);
        }
        sup
    }

    /// Fixed-step RK4 on the dense density matrix; the monitor runs after
    /// every step.
    pub fn evolve_rk4<F: FnMut(f64, &Array2<C64>)>(
        &self,
        rho0: &Array2<C64>,
        dt: f64,
        steps: usize,
        mut monitor: F,
    ) -> Array2<C64> {
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);
        let sixth = C64::new(dt / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        let mut rho = rho0.clone();
        for step in 1..=steps {
            let k1 = self.rhs(&rho);
            let k2 = self.rhs(&(&rho + &(&k1 * half)));
            let k3 = self.rhs(&(&rho + &(&k2 * half)));
            let k4 = self.rhs(&(&rho + &(&k3 * full)));
            rho = &rho + &((&(&k1 + &(&k2 * two)) + &(&(&k3 * two) + &k4)) * sixth);
            monitor(step as f64 * dt, &rho);
        }
        rho
    }

    /// Hilbert-Schmidt projection onto the symmetric basis:
    /// `P[s] = tr[B_s rho]` with the unnormalized symmetrization sum.
    pub fn symmetrize_project(
        &self,
        basis: &SymBasis,
        rho: &Array2<C64>,
    ) -> Result<DensityVector, OracleError> {
        self.check_dim(rho)?;
        let mut out = DensityVector::zeros(basis.n_states());
        for (s_idx, s) in basis.states().enumerate() {
            let mut acc = czero();
            self.for_each_arrangement(basis, s, |rights, lefts| {
                let row = self.flat_index(rights, s, basis, true);
                let col = self.flat_index(lefts, s, basis, false);
                acc += rho[(row, col)];
            });
            out.set(s_idx, acc);
        }
        Ok(out)
    }

    /// Inverse of the projection on the symmetric subspace:
    /// `rho = sum_s P[s] / nu_s * B_s†` reproduces `tr[B_s rho] = P[s]`.
    pub fn reconstruct(
        &self,
        basis: &SymBasis,
        dm: &DensityVector,
    ) -> Result<Array2<C64>, OracleError> {
        let mut rho = Array2::from_elem((self.dim, self.dim), czero());
        for (s_idx, s) in basis.states().enumerate() {
            let coeff = dm.get(s_idx) / basis.multiplicity(s) as f64;
            if coeff == czero() {
                continue;
            }
            self.for_each_arrangement(basis, s, |rights, lefts| {
                let row = self.flat_index(rights, s, basis, true);
                let col = self.flat_index(lefts, s, basis, false);
                rho[(row, col)] += coeff;
            });
        }
        Ok(rho)
    }

    fn check_dim(&self, rho: &Array2<C64>) -> Result<(), OracleError> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(OracleError::DimensionMismatch(rho.nrows(), self.dim));
        }
        Ok(())
    }

    /// Iterate all distinct arrangements of the state's single-system
    /// matrices `sigma_kl`; the callback receives per-site right (bra) and
    /// left (ket) label lists.
    fn for_each_arrangement(
        &self,
        basis: &SymBasis,
        s: &[Count],
        mut f: impl FnMut(&[usize], &[usize]),
    ) {
        let spec = basis.spec();
        let mut pool: Vec<((usize, usize), u32)> = Vec::new();
        for (slot, &(dim, _)) in spec.dims().iter().enumerate() {
            if s[slot] > 0 {
                pool.push(((dim.left as usize, dim.right as usize), s[slot]));
            }
        }
        let n00 = basis.implicit_n00(s);
        if n00 > 0 {
            pool.push(((0, 0), n00));
        }
        let n = self.n_systems;
        let mut lefts = vec![0usize; n];
        let mut rights = vec![0usize; n];
        fn rec(
            pool: &mut Vec<((usize, usize), u32)>,
            lefts: &mut [usize],
            rights: &mut [usize],
            site: usize,
            f: &mut impl FnMut(&[usize], &[usize]),
        ) {
            if site == lefts.len() {
                f(rights, lefts);
                return;
            }
            for i in 0..pool.len() {
                if pool[i].1 == 0 {
                    continue;
                }
                pool[i].1 -= 1;
                let (k, l) = pool[i].0;
                lefts[site] = k;
                rights[site] = l;
                rec(pool, lefts, rights, site + 1, f);
                pool[i].1 += 1;
            }
        }
        rec(&mut pool, &mut lefts, &mut rights, 0, &mut f);
    }

    /// Compose a full-space index from per-site levels and the state's mode
    /// numbers (kets when `use_kets`, bras otherwise).
    fn flat_index(&self, site_levels: &[usize], s: &[Count], basis: &SymBasis, use_kets: bool) -> usize {
        let mut idx = 0usize;
        for (i, &lvl) in site_levels.iter().enumerate() {
            idx += lvl * self.site_stride[i];
        }
        for j in 0..self.focks.len() {
            let m = if use_kets { basis.mode_ket(s, j) } else { basis.mode_bra(s, j) };
            idx += m as usize * self.mode_stride[j];
        }
        idx
    }

    /// Exchange two systems in a full density matrix.
    pub fn swap_sites(&self, rho: &Array2<C64>, a: usize, b: usize) -> Array2<C64> {
        let map: Vec<usize> = (0..self.dim)
            .map(|idx| {
                let la = self.site_level(idx, a) as isize;
                let lb = self.site_level(idx, b) as isize;
                (idx as isize
                    + (lb - la) * self.site_stride[a] as isize
                    + (la - lb) * self.site_stride[b] as isize) as usize
            })
            .collect();
        let mut out = Array2::from_elem((self.dim, self.dim), czero());
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(map[r], map[c])] = rho[(r, c)];
            }
        }
        out
    }
}

pub fn trace(rho: &Array2<C64>) -> C64 {
    (0..rho.nrows()).map(|i| rho[(i, i)]).sum()
}

/// Smallest eigenvalue of a hermitian matrix.
pub fn min_eigenvalue_hermitian(h: &Array2<C64>) -> f64 {
    eigenvalues_hermitian(h).into_iter().fold(f64::INFINITY, f64::min)
}

/// All eigenvalues of a hermitian matrix (ascending), via cyclic Jacobi on
/// the real symmetric embedding `[[Re, -Im], [Im, Re]]`; each eigenvalue of
/// the embedding appears twice, so every second one is returned.
pub fn eigenvalues_hermitian(h: &Array2<C64>) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for r in 0..n {
        for c in 0..n {
            a[r][c] = h[(r, c)].re;
            a[r][c + n] = -h[(r, c)].im;
            a[r + n][c] = h[(r, c)].im;
            a[r + n][c + n] = h[(r, c)].re;
        }
    }
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in p + 1..m {
                off = off.max(a[p][q].abs());
            }
        }
        if off < 1e-14 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs.into_iter().step_by(2).collect()
}

/// Per-observable maximum absolute deviation between two sampled runs.
pub fn compare_trajectories(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "trajectories sampled on different grids");
    if a.is_empty() {
        return Vec::new();
    }
    let n_obs = a[0].len();
    let mut out = vec![0.0f64; n_obs];
    for (ra, rb) in a.iter().zip(b) {
        for k in 0..n_obs {
            out[k] = out[k].max((ra[k] - rb[k]).abs());
        }
    }
    out
}
