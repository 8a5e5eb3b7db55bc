//! Assembly of sparse Liouville-space operators on the symmetric basis.
//!
//! Everything is built from two elementary multi-level-system moves plus a
//! small set of bosonic ladder primitives:
//!
//! * a *nonconnecting* arrow scales a state by one of its counts,
//!   `op[s, s] += c * n_xy(s)`;
//! * a *connecting* arrow shifts one count up and another down,
//!   `op[s, s'] += c * (n_inc(s) + 1)` with `s' = s + e_inc - e_dec`,
//!   gated on `n_dec(s) > 0`.
//!
//! Collective operators `J_xy` acting on one side of the density matrix are
//! sums of such arrows over the level index closed by the identity, restricted
//! to tracked dimensions. Ready-made templates cover the common Hamiltonian
//! and Lindblad contributions; anything else can be composed from one-sided
//! operators with [`SparseOperator::product`] and [`SparseOperator::axpy`].
//!
//! Hamiltonian templates add `i(rho H - H rho)`: contributions acting on the
//! left of the density matrix carry the minus sign. Shifted targets outside
//! the truncated index space are silently discarded and counted in
//! [`SparseOperator::dropped_arrows`].

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{Count, DimRef, MlsDim, SymBasis};
use crate::sparse::{SparseError, SparseOperator};

#[derive(Error, Debug, PartialEq)]
pub enum AssembleError {
    #[error("dimension {0} is neither tracked nor the implicit n00")]
    DimNotTracked(MlsDim),
    #[error("connecting arrow needs two distinct dimensions, got {0} twice")]
    IncompatiblePair(MlsDim),
    #[error("collective sum needs {missing} (paired with {present}); track it or add elementary arrows")]
    CollectiveTermMissing { present: MlsDim, missing: MlsDim },
    #[error("mode index {0} out of range")]
    UnknownMode(usize),
    #[error("level index {0} out of range")]
    LevelOutOfRange(u8),
    #[error("dephasing acts on polarizations, {0} is a density dimension")]
    DephOnDensity(MlsDim),
    #[error("reachability pruning needs a non-empty support")]
    EmptySupport,
    #[error("operator must be frozen")]
    NotFrozen,
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Which side of the density matrix an operator acts on: `A rho` or `rho A`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Elementary one-mode Liouville operators in the coefficient representation
/// `rho_{m,m'}`; `L`/`R` is the side of the density matrix.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ModeOp {
    /// `b rho`
    BL,
    /// `rho b`
    BR,
    /// `b† rho`
    BdL,
    /// `rho b†`
    BdR,
    /// `b†b rho`
    BdBL,
    /// `rho b†b`
    BdBR,
    /// `b b† rho`
    BBdL,
    /// `rho b b†`
    BBdR,
    /// `b rho b†`
    BLBdR,
    /// `b† rho b`
    BdLBR,
}

/// Ready-made Liouvillian contributions. Hamiltonian kinds add
/// `i(rho H - H rho)`; Lindblad kinds take half-rates, i.e. `rate = gamma/2`
/// adds `gamma/2 (2 A rho A† - A†A rho - rho A†A)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum TemplateKind {
    /// `H = freq * J_xx`
    MlsH0 { level: u8, freq: f64 },
    /// `H = freq * b†b`
    ModeH0 { mode: usize, freq: f64 },
    /// `H = g (J_xy b† + J_yx b)` (rotating frame, excitation conserving)
    MlsModeRwa { x: u8, y: u8, mode: usize, g: f64 },
    /// `H = g (J_xy + J_yx)(b† + b)`
    MlsModeNonRwa { x: u8, y: u8, mode: usize, g: f64 },
    /// `H = amp (J_xy + J_yx)` (drive in its rotating frame)
    MlsCohDrive { x: u8, y: u8, amp: f64 },
    /// `H = amp (b + b†)` (drive in its rotating frame)
    ModeCohDrive { mode: usize, amp: f64 },
    /// Individual relaxation `from -> to`: the connecting arrow plus the
    /// population part of the anticommutator. Decay-induced dephasing of the
    /// coherence dimensions is added by separate [`TemplateKind::LindbladDephMls`]
    /// terms, one per tracked polarization involving `from`.
    LindbladRelaxMls { from: u8, to: u8, rate: f64 },
    /// Pure dephasing of a single polarization dimension: `-rate * n_xy`.
    LindbladDephMls { dim: MlsDim, rate: f64 },
    /// Mode decay at half-rate `rate = kappa/2`.
    LindbladMode { mode: usize, rate: f64 },
    /// Mode coupled to a thermal bath with mean occupation `mean_occ`.
    LindbladModeThermal { mode: usize, rate: f64, mean_occ: f64 },
}

fn check_level(basis: &SymBasis, level: u8) -> Result<(), AssembleError> {
    if level >= basis.spec().n_levels() {
        Err(AssembleError::LevelOutOfRange(level))
    } else {
        Ok(())
    }
}

fn check_mode(basis: &SymBasis, mode: usize) -> Result<(), AssembleError> {
    if mode >= basis.spec().n_modes() {
        Err(AssembleError::UnknownMode(mode))
    } else {
        Ok(())
    }
}

fn resolve(basis: &SymBasis, dim: MlsDim) -> Result<DimRef, AssembleError> {
    basis
        .spec()
        .resolve(dim)
        .map_err(|_| AssembleError::DimNotTracked(dim))
}

/// `op[s, s] += c * n_xy(s)` for every state.
pub fn add_mls_nonconnecting(
    basis: &SymBasis,
    op: &mut SparseOperator,
    dim: MlsDim,
    c: C64,
) -> Result<(), AssembleError> {
    let dim = resolve(basis, dim)?;
    for (row, s) in basis.states().enumerate() {
        let n = basis.count_ref(s, dim);
        if n != 0 {
            op.add(row, row, c * n as f64)?;
        }
    }
    Ok(())
}

/// `op[s, s'] += c * (n_inc(s) + 1)` with `s' = s + e_inc - e_dec`, for every
/// state with `n_dec(s) > 0` whose shifted target is inside the truncation.
pub fn add_mls_connecting(
    basis: &SymBasis,
    op: &mut SparseOperator,
    inc: MlsDim,
    dec: MlsDim,
    c: C64,
) -> Result<(), AssembleError> {
    if inc == dec {
        return Err(AssembleError::IncompatiblePair(inc));
    }
    let inc_ref = resolve(basis, inc)?;
    let dec_ref = resolve(basis, dec)?;
    connecting_resolved(basis, op, inc_ref, dec_ref, c)
}

fn connecting_resolved(
    basis: &SymBasis,
    op: &mut SparseOperator,
    inc: DimRef,
    dec: DimRef,
    c: C64,
) -> Result<(), AssembleError> {
    let mut scratch: Vec<Count> = Vec::new();
    for row in 0..basis.n_states() {
        let s = basis.state(row);
        if basis.count_ref(s, dec) == 0 {
            continue;
        }
        scratch.clear();
        scratch.extend_from_slice(s);
        if let DimRef::Tracked(slot) = inc {
            scratch[slot] += 1;
        }
        if let DimRef::Tracked(slot) = dec {
            scratch[slot] -= 1;
        }
        match basis.index_of_flat(&scratch) {
            Some(col) => {
                let factor = (basis.count_ref(s, inc) + 1) as f64;
                op.add(row, col, c * factor)?;
            }
            None => op.note_dropped(),
        }
    }
    Ok(())
}

/// One-sided collective operator `J_xy` acting from `side`, added as the sum
/// of elementary arrows over the closing level index `k`.
///
/// Levels whose dimensions are entirely absent are skipped (their counts are
/// identically zero in the reduced description). A term whose decremented
/// dimension exists but whose incremented one does not would push amplitude
/// out of the tracked space and is an error.
pub fn add_collective(
    basis: &SymBasis,
    op: &mut SparseOperator,
    side: Side,
    x: u8,
    y: u8,
    c: C64,
) -> Result<(), AssembleError> {
    check_level(basis, x)?;
    check_level(basis, y)?;
    let spec = basis.spec();
    if x == y {
        for k in 0..spec.n_levels() {
            let dim = match side {
                // tr[P J_xx rho] = sum_k n_kx ; tr[P rho J_xx] = sum_k n_xk
                Side::Left => MlsDim::new(k, x),
                Side::Right => MlsDim::new(x, k),
            };
            if let Some(dim_ref) = spec.resolve_opt(dim) {
                for (row, s) in basis.states().enumerate() {
                    let n = basis.count_ref(s, dim_ref);
                    if n != 0 {
                        op.add(row, row, c * n as f64)?;
                    }
                }
            }
        }
        return Ok(());
    }
    for k in 0..spec.n_levels() {
        // tr[P J_xy rho]: n_ky + 1, n_kx - 1 ; tr[P rho J_xy]: n_xk + 1, n_yk - 1
        let (inc, dec) = match side {
            Side::Left => (MlsDim::new(k, y), MlsDim::new(k, x)),
            Side::Right => (MlsDim::new(x, k), MlsDim::new(y, k)),
        };
        let Some(dec_ref) = spec.resolve_opt(dec) else {
            continue; // count identically zero, term vanishes exactly
        };
        let Some(inc_ref) = spec.resolve_opt(inc) else {
            return Err(AssembleError::CollectiveTermMissing { present: dec, missing: inc });
        };
        connecting_resolved(basis, op, inc_ref, dec_ref, c)?;
    }
    Ok(())
}

/// Add an elementary mode operator scaled by `c`.
pub fn add_mode_elementary(
    basis: &SymBasis,
    op: &mut SparseOperator,
    mode: usize,
    kind: ModeOp,
    c: C64,
) -> Result<(), AssembleError> {
    check_mode(basis, mode)?;
    let n_dims = basis.spec().n_dims();
    let ket_slot = n_dims + 2 * mode;
    let bra_slot = ket_slot + 1;
    let fock = basis.spec().modes()[mode].fock;
    let mut scratch: Vec<Count> = Vec::new();
    for row in 0..basis.n_states() {
        let s = basis.state(row);
        let m = s[ket_slot];
        let mb = s[bra_slot];
        // (ket shift, bra shift, amplitude); diagonal kinds handled inline.
        let (dk, db, factor) = match kind {
            ModeOp::BL => (1i64, 0i64, ((m + 1) as f64).sqrt()),
            ModeOp::BdL => {
                if m == 0 {
                    continue;
                }
                (-1, 0, (m as f64).sqrt())
            }
            ModeOp::BR => {
                if mb == 0 {
                    continue;
                }
                (0, -1, (mb as f64).sqrt())
            }
            ModeOp::BdR => (0, 1, ((mb + 1) as f64).sqrt()),
            ModeOp::BLBdR => (1, 1, (((m + 1) * (mb + 1)) as f64).sqrt()),
            ModeOp::BdLBR => {
                if m == 0 || mb == 0 {
                    continue;
                }
                (-1, -1, ((m * mb) as f64).sqrt())
            }
            ModeOp::BdBL => {
                if m != 0 {
                    op.add(row, row, c * m as f64)?;
                }
                continue;
            }
            ModeOp::BdBR => {
                if mb != 0 {
                    op.add(row, row, c * mb as f64)?;
                }
                continue;
            }
            // bb† on the truncated ladder: the top Fock state is annihilated,
            // consistent with composing the truncated b and b† matrices.
            ModeOp::BBdL => {
                if m + 1 < fock {
                    op.add(row, row, c * (m + 1) as f64)?;
                } else {
                    op.note_dropped();
                }
                continue;
            }
            ModeOp::BBdR => {
                if mb + 1 < fock {
                    op.add(row, row, c * (mb + 1) as f64)?;
                } else {
                    op.note_dropped();
                }
                continue;
            }
        };
        scratch.clear();
        scratch.extend_from_slice(s);
        scratch[ket_slot] = (m as i64 + dk) as Count;
        scratch[bra_slot] = (mb as i64 + db) as Count;
        match basis.index_of_flat(&scratch) {
            Some(col) => op.add(row, col, c * factor)?,
            None => op.note_dropped(),
        }
    }
    Ok(())
}

/// Build a frozen one-sided collective operator `J_xy^{side}`.
pub fn collective_operator(
    basis: &SymBasis,
    side: Side,
    x: u8,
    y: u8,
) -> Result<SparseOperator, AssembleError> {
    let mut op = SparseOperator::new(basis.n_states());
    add_collective(basis, &mut op, side, x, y, C64::new(1.0, 0.0))?;
    op.freeze();
    Ok(op)
}

/// Build a frozen elementary mode operator.
pub fn mode_operator(
    basis: &SymBasis,
    mode: usize,
    kind: ModeOp,
) -> Result<SparseOperator, AssembleError> {
    let mut op = SparseOperator::new(basis.n_states());
    add_mode_elementary(basis, &mut op, mode, kind, C64::new(1.0, 0.0))?;
    op.freeze();
    Ok(op)
}

/// Add all arrows of a ready-made Liouvillian.
pub fn add_template(
    basis: &SymBasis,
    op: &mut SparseOperator,
    kind: TemplateKind,
) -> Result<(), AssembleError> {
    let i = C64::new(0.0, 1.0);
    match kind {
        TemplateKind::MlsH0 { level, freq } => {
            add_collective(basis, op, Side::Right, level, level, i * freq)?;
            add_collective(basis, op, Side::Left, level, level, -i * freq)?;
        }
        TemplateKind::ModeH0 { mode, freq } => {
            add_mode_elementary(basis, op, mode, ModeOp::BdBR, i * freq)?;
            add_mode_elementary(basis, op, mode, ModeOp::BdBL, -i * freq)?;
        }
        TemplateKind::MlsCohDrive { x, y, amp } => {
            add_collective(basis, op, Side::Right, x, y, i * amp)?;
            add_collective(basis, op, Side::Right, y, x, i * amp)?;
            add_collective(basis, op, Side::Left, x, y, -i * amp)?;
            add_collective(basis, op, Side::Left, y, x, -i * amp)?;
        }
        TemplateKind::ModeCohDrive { mode, amp } => {
            add_mode_elementary(basis, op, mode, ModeOp::BR, i * amp)?;
            add_mode_elementary(basis, op, mode, ModeOp::BdR, i * amp)?;
            add_mode_elementary(basis, op, mode, ModeOp::BL, -i * amp)?;
            add_mode_elementary(basis, op, mode, ModeOp::BdL, -i * amp)?;
        }
        TemplateKind::MlsModeRwa { x, y, mode, g } => {
            check_mode(basis, mode)?;
            let jxy_r = collective_operator(basis, Side::Right, x, y)?;
            let jyx_r = collective_operator(basis, Side::Right, y, x)?;
            let jxy_l = collective_operator(basis, Side::Left, x, y)?;
            let jyx_l = collective_operator(basis, Side::Left, y, x)?;
            let bd_r = mode_operator(basis, mode, ModeOp::BdR)?;
            let b_r = mode_operator(basis, mode, ModeOp::BR)?;
            let bd_l = mode_operator(basis, mode, ModeOp::BdL)?;
            let b_l = mode_operator(basis, mode, ModeOp::BL)?;
            op.axpy(i * g, &jxy_r.product(&bd_r)?)?;
            op.axpy(i * g, &jyx_r.product(&b_r)?)?;
            op.axpy(-i * g, &jxy_l.product(&bd_l)?)?;
            op.axpy(-i * g, &jyx_l.product(&b_l)?)?;
        }
        TemplateKind::MlsModeNonRwa { x, y, mode, g } => {
            check_mode(basis, mode)?;
            let n = basis.n_states();
            let mut j_r = SparseOperator::new(n);
            add_collective(basis, &mut j_r, Side::Right, x, y, C64::new(1.0, 0.0))?;
            add_collective(basis, &mut j_r, Side::Right, y, x, C64::new(1.0, 0.0))?;
            j_r.freeze();
            let mut j_l = SparseOperator::new(n);
            add_collective(basis, &mut j_l, Side::Left, x, y, C64::new(1.0, 0.0))?;
            add_collective(basis, &mut j_l, Side::Left, y, x, C64::new(1.0, 0.0))?;
            j_l.freeze();
            let mut m_r = SparseOperator::new(n);
            add_mode_elementary(basis, &mut m_r, mode, ModeOp::BR, C64::new(1.0, 0.0))?;
            add_mode_elementary(basis, &mut m_r, mode, ModeOp::BdR, C64::new(1.0, 0.0))?;
            m_r.freeze();
            let mut m_l = SparseOperator::new(n);
            add_mode_elementary(basis, &mut m_l, mode, ModeOp::BL, C64::new(1.0, 0.0))?;
            add_mode_elementary(basis, &mut m_l, mode, ModeOp::BdL, C64::new(1.0, 0.0))?;
            m_l.freeze();
            op.axpy(i * g, &j_r.product(&m_r)?)?;
            op.axpy(-i * g, &j_l.product(&m_l)?)?;
        }
        TemplateKind::LindbladRelaxMls { from, to, rate } => {
            check_level(basis, from)?;
            check_level(basis, to)?;
            let n_ff = MlsDim::new(from, from);
            let n_tt = MlsDim::new(to, to);
            add_mls_connecting(basis, op, n_ff, n_tt, C64::new(2.0 * rate, 0.0))?;
            add_mls_nonconnecting(basis, op, n_ff, C64::new(-2.0 * rate, 0.0))?;
        }
        TemplateKind::LindbladDephMls { dim, rate } => {
            if dim.is_density() {
                return Err(AssembleError::DephOnDensity(dim));
            }
            add_mls_nonconnecting(basis, op, dim, C64::new(-rate, 0.0))?;
        }
        TemplateKind::LindbladMode { mode, rate } => {
            add_mode_elementary(basis, op, mode, ModeOp::BLBdR, C64::new(2.0 * rate, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BdBL, C64::new(-rate, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BdBR, C64::new(-rate, 0.0))?;
        }
        TemplateKind::LindbladModeThermal { mode, rate, mean_occ } => {
            let down = rate * (mean_occ + 1.0);
            let up = rate * mean_occ;
            add_mode_elementary(basis, op, mode, ModeOp::BLBdR, C64::new(2.0 * down, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BdBL, C64::new(-down, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BdBR, C64::new(-down, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BdLBR, C64::new(2.0 * up, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BBdL, C64::new(-up, 0.0))?;
            add_mode_elementary(basis, op, mode, ModeOp::BBdR, C64::new(-up, 0.0))?;
        }
    }
    Ok(())
}

/// Result of reachability pruning: the kept sub-basis, the operator remapped
/// onto it, and for each kept state its index in the original basis.
pub struct Pruned {
    pub basis: SymBasis,
    pub operator: SparseOperator,
    pub kept: Vec<usize>,
}

/// Restrict `op` to the states whose amplitude can become nonzero when the
/// evolution starts inside `support`.
///
/// State `v` can be populated from `u` when `op[v, u] != 0`; the kept set is
/// the closure of the support under that relation (reachability in the
/// transposed nonzero pattern). Entries of kept rows pointing at removed
/// columns multiply amplitudes that stay identically zero and are discarded
/// exactly.
pub fn prune_reachable(
    basis: &SymBasis,
    op: &SparseOperator,
    support: &[usize],
) -> Result<Pruned, AssembleError> {
    if support.is_empty() {
        return Err(AssembleError::EmptySupport);
    }
    if !op.is_frozen() {
        return Err(AssembleError::NotFrozen);
    }
    let n = basis.n_states();
    // adjacency of the transposed pattern: column -> rows touching it
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c, _) in op.entries() {
        if r != c {
            adj[c].push(r);
        }
    }
    let mut seen = vec![false; n];
    let mut queue: Vec<usize> = Vec::new();
    for &s in support {
        assert!(s < n, "support index out of range");
        if !seen[s] {
            seen[s] = true;
            queue.push(s);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
    let mut new_index = vec![usize::MAX; n];
    for (new, &old) in kept.iter().enumerate() {
        new_index[old] = new;
    }
    let mut reduced = SparseOperator::new(kept.len());
    for (new_row, &old_row) in kept.iter().enumerate() {
        for (c, v) in op.row(old_row) {
            if seen[c] {
                reduced.add(new_row, new_index[c], v)?;
            }
        }
    }
    reduced.freeze();
    Ok(Pruned {
        basis: basis.filtered(&kept),
        operator: reduced,
        kept,
    })
}

/// Max deviation from the conjugation symmetry `op[T s, T s'] = conj(op[s, s'])`
/// where `T` transposes a state. An operator satisfying this maps hermitian
/// coefficient vectors to hermitian ones.
pub fn hermiticity_pairing_defect(basis: &SymBasis, op: &SparseOperator) -> f64 {
    let transpose: Vec<Option<usize>> = (0..basis.n_states())
        .map(|i| basis.transpose_index(i))
        .collect();
    let mut worst = 0.0f64;
    for (r, c, v) in op.entries() {
        let partner = match (transpose[r], transpose[c]) {
            (Some(tr), Some(tc)) => op.get(tr, tc),
            _ => C64::new(0.0, 0.0),
        };
        worst = worst.max((partner - v.conj()).norm());
    }
    worst
}

/// Infinity norm of `t^T L` where `t` is 1 on density elements: how far the
/// operator is from preserving the trace.
pub fn trace_row_norm(basis: &SymBasis, op: &SparseOperator) -> f64 {
    let mut colsum = vec![C64::new(0.0, 0.0); op.dim()];
    for (row, s) in basis.states().enumerate() {
        if !basis.is_density_element(s) {
            continue;
        }
        for (c, v) in op.row(row) {
            colsum[c] += v;
        }
    }
    colsum.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{define_system, ModeSpec, MultiIndex, SystemSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tls_spec(n: Count, modes: &[ModeSpec]) -> SystemSpec {
        let dims = vec![
            (MlsDim::new(1, 1), n + 1),
            (MlsDim::new(1, 0), n + 1),
            (MlsDim::new(0, 1), n + 1),
        ];
        define_system(n, 2, &dims, &[0.0, 1.0], modes).unwrap()
    }

    fn laser_spec(n: Count) -> SystemSpec {
        let dims = vec![
            (MlsDim::new(2, 2), n + 1),
            (MlsDim::new(1, 1), n + 1),
            (MlsDim::new(1, 0), n + 1),
            (MlsDim::new(0, 1), n + 1),
        ];
        define_system(n, 3, &dims, &[0.0, 1.0, 2.0], &[]).unwrap()
    }

    fn idx(basis: &SymBasis, mls: &[Count]) -> usize {
        basis
            .index_of(&MultiIndex { mls: mls.to_vec(), modes: vec![] })
            .unwrap()
    }

    fn idx_m(basis: &SymBasis, mls: &[Count], m: (Count, Count)) -> usize {
        basis
            .index_of(&MultiIndex { mls: mls.to_vec(), modes: vec![m] })
            .unwrap()
    }

    #[test]
    fn nonconnecting_scales_by_count() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        add_mls_nonconnecting(&basis, &mut op, MlsDim::new(1, 1), c(1.0, 0.0)).unwrap();
        op.freeze();
        let r200 = idx(&basis, &[2, 0, 0]);
        let r000 = idx(&basis, &[0, 0, 0]);
        assert_eq!(op.get(r200, r200), c(2.0, 0.0));
        assert_eq!(op.get(r000, r000), c(0.0, 0.0));
    }

    #[test]
    fn nonconnecting_implicit_n00() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        add_mls_nonconnecting(&basis, &mut op, MlsDim::new(0, 0), c(1.0, 0.0)).unwrap();
        op.freeze();
        let r100 = idx(&basis, &[1, 0, 0]);
        assert_eq!(op.get(r100, r100), c(1.0, 0.0)); // n00 = 2 - 1
        let r011 = idx(&basis, &[0, 1, 1]);
        assert_eq!(op.get(r011, r011), c(0.0, 0.0)); // n00 = 2 - 1 - 1
    }

    #[test]
    fn connecting_shifts_counts() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        // raise n10, lower the implicit n00
        let mut op = SparseOperator::new(basis.n_states());
        add_mls_connecting(&basis, &mut op, MlsDim::new(1, 0), MlsDim::new(0, 0), c(1.0, 0.0)).unwrap();
        op.freeze();
        let r000 = idx(&basis, &[0, 0, 0]);
        let c010 = idx(&basis, &[0, 1, 0]);
        assert_eq!(op.get(r000, c010), c(1.0, 0.0));
        // theta gate: n00 = 0 rows get nothing
        let r200 = idx(&basis, &[2, 0, 0]);
        assert_eq!(op.row(r200).count(), 0);

        // raise n11, lower n00: factor n11 + 1
        let mut op = SparseOperator::new(basis.n_states());
        add_mls_connecting(&basis, &mut op, MlsDim::new(1, 1), MlsDim::new(0, 0), c(1.0, 0.0)).unwrap();
        op.freeze();
        let r100 = idx(&basis, &[1, 0, 0]);
        let c200 = idx(&basis, &[2, 0, 0]);
        assert_eq!(op.get(r100, c200), c(2.0, 0.0));
    }

    #[test]
    fn connecting_rejects_equal_dims() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        let err = add_mls_connecting(&basis, &mut op, MlsDim::new(1, 0), MlsDim::new(1, 0), c(1.0, 0.0));
        assert_eq!(err.unwrap_err(), AssembleError::IncompatiblePair(MlsDim::new(1, 0)));
    }

    #[test]
    fn collective_j10_left() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let op = collective_operator(&basis, Side::Left, 1, 0).unwrap();
        let r100 = idx(&basis, &[1, 0, 0]);
        let c010 = idx(&basis, &[0, 1, 0]);
        assert_eq!(op.get(r100, c010), c(1.0, 0.0));
    }

    #[test]
    fn collective_j11_left_diagonal() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let op = collective_operator(&basis, Side::Left, 1, 1).unwrap();
        let r110 = idx(&basis, &[1, 1, 0]);
        // sum_k n_k1 = n01 + n11 = 0 + 1
        assert_eq!(op.get(r110, r110), c(1.0, 0.0));
    }

    #[test]
    fn collective_equals_explicit_arrow_sum() {
        let basis = SymBasis::enumerate(&tls_spec(3, &[])).unwrap();
        for (side, pairs) in [
            // J_10 left: k = 0 -> (n00 up, n01 down); k = 1 -> (n10 up, n11 down)
            (Side::Left, vec![
                (MlsDim::new(0, 0), MlsDim::new(0, 1)),
                (MlsDim::new(1, 0), MlsDim::new(1, 1)),
            ]),
            // J_10 right: k = 0 -> (n10 up, n00 down); k = 1 -> (n11 up, n01 down)
            (Side::Right, vec![
                (MlsDim::new(1, 0), MlsDim::new(0, 0)),
                (MlsDim::new(1, 1), MlsDim::new(0, 1)),
            ]),
        ] {
            let collective = {
                let mut op = SparseOperator::new(basis.n_states());
                add_collective(&basis, &mut op, side, 1, 0, c(1.0, 0.0)).unwrap();
                op.freeze();
                op
            };
            let explicit = {
                let mut op = SparseOperator::new(basis.n_states());
                for (inc, dec) in &pairs {
                    add_mls_connecting(&basis, &mut op, *inc, *dec, c(1.0, 0.0)).unwrap();
                }
                op.freeze();
                op
            };
            assert_eq!(collective.max_abs_diff(&explicit), 0.0);
        }
    }

    #[test]
    fn collective_on_reduced_sketch_skips_decoupled_levels() {
        let basis = SymBasis::enumerate(&laser_spec(2)).unwrap();
        // J_10 on the reduced laser dims: only the k = 0, 1 terms survive.
        let op = collective_operator(&basis, Side::Left, 1, 0).unwrap();
        // every row has at most 2 entries (one per surviving k)
        for row in 0..op.dim() {
            assert!(op.row(row).count() <= 2);
        }
    }

    #[test]
    fn collective_rows_have_at_most_one_entry_per_level() {
        // on the full three-level space the k-sum gives at most d+1 = 3
        // entries per row
        let dims: Vec<(MlsDim, Count)> = [(2u8, 2u8), (2, 1), (2, 0), (1, 2), (1, 1), (1, 0), (0, 2), (0, 1)]
            .iter()
            .map(|&(k, l)| (MlsDim::new(k, l), 4))
            .collect();
        let spec = define_system(3, 3, &dims, &[0.0, 1.0, 2.0], &[]).unwrap();
        let basis = SymBasis::enumerate(&spec).unwrap();
        for side in [Side::Left, Side::Right] {
            let op = collective_operator(&basis, side, 1, 0).unwrap();
            for row in 0..op.dim() {
                assert!(op.row(row).count() <= 3);
            }
        }
    }

    #[test]
    fn collective_missing_inc_dim_errors() {
        // track n10 but not n01: J_01 left needs to raise n01 from n00
        let dims = vec![(MlsDim::new(1, 1), 3), (MlsDim::new(1, 0), 3)];
        let spec = define_system(2, 2, &dims, &[0.0, 1.0], &[]).unwrap();
        let basis = SymBasis::enumerate(&spec).unwrap();
        let err = collective_operator(&basis, Side::Left, 0, 1);
        assert!(matches!(err, Err(AssembleError::CollectiveTermMissing { .. })));
    }

    #[test]
    fn mode_number_operator_diagonal() {
        let basis = SymBasis::enumerate(&tls_spec(1, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        let op = mode_operator(&basis, 0, ModeOp::BdBL).unwrap();
        for m in 0..4 {
            let r = idx_m(&basis, &[0, 0, 0], (m, m));
            assert_eq!(op.get(r, r), c(m as f64, 0.0));
        }
    }

    #[test]
    fn mode_ladder_elements() {
        let basis = SymBasis::enumerate(&tls_spec(1, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        let bl = mode_operator(&basis, 0, ModeOp::BL).unwrap();
        let r = idx_m(&basis, &[0, 0, 0], (0, 0));
        let col = idx_m(&basis, &[0, 0, 0], (1, 0));
        assert_eq!(bl.get(r, col), c(1.0, 0.0));

        let blbdr = mode_operator(&basis, 0, ModeOp::BLBdR).unwrap();
        let r11 = idx_m(&basis, &[0, 0, 0], (1, 1));
        let c22 = idx_m(&basis, &[0, 0, 0], (2, 2));
        assert_eq!(blbdr.get(r11, c22), c(2.0, 0.0));
    }

    #[test]
    fn truncated_bbd_annihilates_top_state() {
        let basis = SymBasis::enumerate(&tls_spec(1, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        let bbd = mode_operator(&basis, 0, ModeOp::BBdL).unwrap();
        let top = idx_m(&basis, &[0, 0, 0], (3, 0));
        assert_eq!(bbd.get(top, top), c(0.0, 0.0));
        assert!(bbd.dropped_arrows() > 0);
        // agrees with the matrix product of the truncated ladders up to the
        // roundoff of sqrt(m)^2
        let bl = mode_operator(&basis, 0, ModeOp::BL).unwrap();
        let bdl = mode_operator(&basis, 0, ModeOp::BdL).unwrap();
        assert!(bl.product(&bdl).unwrap().max_abs_diff(&bbd) < 1e-14);
    }

    #[test]
    fn bdb_equals_ladder_product() {
        let basis = SymBasis::enumerate(&tls_spec(1, &[ModeSpec { fock: 5, energy: 1.0 }])).unwrap();
        let bdb = mode_operator(&basis, 0, ModeOp::BdBL).unwrap();
        let bl = mode_operator(&basis, 0, ModeOp::BL).unwrap();
        let bdl = mode_operator(&basis, 0, ModeOp::BdL).unwrap();
        assert!(bdl.product(&bl).unwrap().max_abs_diff(&bdb) < 1e-14);
    }

    #[test]
    fn left_and_right_factors_commute() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[ModeSpec { fock: 3, energy: 1.0 }])).unwrap();
        let j10_l = collective_operator(&basis, Side::Left, 1, 0).unwrap();
        let b_r = mode_operator(&basis, 0, ModeOp::BR).unwrap();
        let ab = j10_l.product(&b_r).unwrap();
        let ba = b_r.product(&j10_l).unwrap();
        assert_eq!(ab.max_abs_diff(&ba), 0.0);
    }

    #[test]
    fn relax_template_matches_decay_equation() {
        // gamma = 1, template rate gamma/2
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        add_template(&basis, &mut op, TemplateKind::LindbladRelaxMls { from: 1, to: 0, rate: 0.5 }).unwrap();
        op.freeze();
        let r100 = idx(&basis, &[1, 0, 0]);
        let c200 = idx(&basis, &[2, 0, 0]);
        assert_eq!(op.get(r100, c200), c(2.0, 0.0)); // 2r(n11 + 1) = 2
        assert_eq!(op.get(r100, r100), c(-1.0, 0.0)); // -2r n11 = -1
        // coherence rows carry no decay-induced dephasing from this template
        let r010 = idx(&basis, &[0, 1, 0]);
        assert_eq!(op.get(r010, r010), c(0.0, 0.0));
    }

    #[test]
    fn deph_template_scales_polarization() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        add_template(&basis, &mut op, TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.5 }).unwrap();
        op.freeze();
        let r010 = idx(&basis, &[0, 1, 0]);
        assert_eq!(op.get(r010, r010), c(-0.5, 0.0));
        let r100 = idx(&basis, &[1, 0, 0]);
        assert_eq!(op.get(r100, r100), c(0.0, 0.0));

        let mut op = SparseOperator::new(basis.n_states());
        let err = add_template(&basis, &mut op, TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 1), rate: 0.5 });
        assert_eq!(err.unwrap_err(), AssembleError::DephOnDensity(MlsDim::new(1, 1)));
    }

    #[test]
    fn template_errors_name_the_problem() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        // relaxation onto the same level degenerates to a nonconnecting pair
        let mut op = SparseOperator::new(basis.n_states());
        let err = add_template(&basis, &mut op, TemplateKind::LindbladRelaxMls { from: 1, to: 1, rate: 0.1 });
        assert!(matches!(err, Err(AssembleError::IncompatiblePair(_))));
        // dephasing on an untracked dimension
        let sparse_dims = vec![(MlsDim::new(1, 1), 3)];
        let spec = define_system(2, 2, &sparse_dims, &[0.0, 1.0], &[]).unwrap();
        let sparse_basis = SymBasis::enumerate(&spec).unwrap();
        let mut op = SparseOperator::new(sparse_basis.n_states());
        let err = add_template(
            &sparse_basis,
            &mut op,
            TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.1 },
        );
        assert_eq!(err.unwrap_err(), AssembleError::DimNotTracked(MlsDim::new(1, 0)));
        // a mode template on a system without modes
        let mut op = SparseOperator::new(basis.n_states());
        let err = add_template(&basis, &mut op, TemplateKind::LindbladMode { mode: 0, rate: 0.1 });
        assert_eq!(err.unwrap_err(), AssembleError::UnknownMode(0));
    }

    #[test]
    fn thermal_mode_at_zero_occupation_is_plain_decay() {
        let basis = SymBasis::enumerate(&tls_spec(1, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        let mut a = SparseOperator::new(basis.n_states());
        add_template(&basis, &mut a, TemplateKind::LindbladMode { mode: 0, rate: 0.3 }).unwrap();
        a.freeze();
        let mut b = SparseOperator::new(basis.n_states());
        add_template(&basis, &mut b, TemplateKind::LindbladModeThermal { mode: 0, rate: 0.3, mean_occ: 0.0 }).unwrap();
        b.freeze();
        assert_eq!(a.max_abs_diff(&b), 0.0);
    }

    fn all_templates() -> Vec<TemplateKind> {
        vec![
            TemplateKind::MlsH0 { level: 1, freq: 0.7 },
            TemplateKind::ModeH0 { mode: 0, freq: 1.3 },
            TemplateKind::MlsModeRwa { x: 0, y: 1, mode: 0, g: 0.9 },
            TemplateKind::MlsModeNonRwa { x: 0, y: 1, mode: 0, g: 0.4 },
            TemplateKind::MlsCohDrive { x: 1, y: 0, amp: 0.8 },
            TemplateKind::ModeCohDrive { mode: 0, amp: 0.6 },
            TemplateKind::LindbladRelaxMls { from: 1, to: 0, rate: 0.25 },
            TemplateKind::LindbladRelaxMls { from: 0, to: 1, rate: 0.15 },
            TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.2 },
            TemplateKind::LindbladDephMls { dim: MlsDim::new(0, 1), rate: 0.2 },
            TemplateKind::LindbladMode { mode: 0, rate: 0.35 },
            TemplateKind::LindbladModeThermal { mode: 0, rate: 0.35, mean_occ: 0.7 },
        ]
    }

    #[test]
    fn every_template_preserves_the_trace() {
        let basis = SymBasis::enumerate(&tls_spec(3, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        for kind in all_templates() {
            let mut op = SparseOperator::new(basis.n_states());
            add_template(&basis, &mut op, kind).unwrap();
            op.freeze();
            let defect = trace_row_norm(&basis, &op);
            assert!(defect < 1e-12, "{kind:?}: trace row norm {defect}");
        }
    }

    #[test]
    fn templates_map_hermitian_to_hermitian() {
        let basis = SymBasis::enumerate(&tls_spec(3, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        // each template alone, except dephasing which is hermiticity
        // preserving only as a conjugate pair of arrows
        for kind in all_templates() {
            if matches!(kind, TemplateKind::LindbladDephMls { .. }) {
                continue;
            }
            let mut op = SparseOperator::new(basis.n_states());
            add_template(&basis, &mut op, kind).unwrap();
            op.freeze();
            let defect = hermiticity_pairing_defect(&basis, &op);
            assert!(defect < 1e-12, "{kind:?}: pairing defect {defect}");
        }
        let mut pair = SparseOperator::new(basis.n_states());
        add_template(&basis, &mut pair, TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.2 }).unwrap();
        add_template(&basis, &mut pair, TemplateKind::LindbladDephMls { dim: MlsDim::new(0, 1), rate: 0.2 }).unwrap();
        pair.freeze();
        assert!(hermiticity_pairing_defect(&basis, &pair) < 1e-12);
        // and the full sum of everything at once
        let mut all = SparseOperator::new(basis.n_states());
        for kind in all_templates() {
            add_template(&basis, &mut all, kind).unwrap();
        }
        all.freeze();
        assert!(hermiticity_pairing_defect(&basis, &all) < 1e-12);
    }

    #[test]
    fn connecting_arrows_add_at_most_one_entry_per_row() {
        let basis = SymBasis::enumerate(&tls_spec(3, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        add_mls_connecting(&basis, &mut op, MlsDim::new(1, 1), MlsDim::new(0, 0), c(1.0, 0.0)).unwrap();
        op.freeze();
        for row in 0..op.dim() {
            assert!(op.row(row).count() <= 1);
        }
    }

    #[test]
    fn prune_zero_operator_keeps_support_only() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        op.freeze();
        let pruned = prune_reachable(&basis, &op, &[3]).unwrap();
        assert_eq!(pruned.basis.n_states(), 1);
        assert_eq!(pruned.kept, vec![3]);
        match prune_reachable(&basis, &op, &[]) {
            Err(AssembleError::EmptySupport) => {}
            _ => panic!("empty support must be rejected"),
        }
    }

    #[test]
    fn prune_follows_influence_direction() {
        // three states, chain: d/dt p0 <- p1 <- p2 (entries L[0,1], L[1,2]).
        // From support {0} everything that can feed state 0 must be kept.
        let basis = SymBasis::enumerate(&tls_spec(1, &[])).unwrap();
        let mut op = SparseOperator::new(basis.n_states());
        op.add(0, 1, c(1.0, 0.0)).unwrap();
        op.add(1, 2, c(1.0, 0.0)).unwrap();
        op.freeze();
        // support {0}: state 0 influences nothing else; nothing else becomes
        // populated when starting from 0.
        let pruned = prune_reachable(&basis, &op, &[0]).unwrap();
        assert_eq!(pruned.kept, vec![0]);
        // support {2}: amplitude flows 2 -> 1 -> 0.
        let pruned = prune_reachable(&basis, &op, &[2]).unwrap();
        assert_eq!(pruned.kept, vec![0, 1, 2]);
    }
}
