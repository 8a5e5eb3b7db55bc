//! Degrees of freedom and enumeration of the permutation-symmetric basis.
//!
//! A collection of N identical (d+1)-level systems is described by counts
//! `n_kl`: the number of systems currently represented by the single-system
//! matrix `|k><l|`. The counts of all tracked dimensions plus the implicit
//! ground density `n00` always sum to N, so `n00` is never stored. Bosonic
//! modes contribute a (ket, bra) Fock index pair each. A basis state is one
//! admissible assignment of all these numbers.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

/// Quantum-number count type used throughout.
pub type Count = u32;

/// Identifier of a multi-level-system dimension `n_kl`.
///
/// `left == right` marks a density (population) dimension, `left != right` a
/// polarization (coherence) dimension.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct MlsDim {
    pub left: u8,
    pub right: u8,
}

impl MlsDim {
    pub fn new(left: u8, right: u8) -> Self {
        Self { left, right }
    }

    pub fn is_density(&self) -> bool {
        self.left == self.right
    }

    /// The hermitian partner `n_lk`.
    pub fn transposed(&self) -> Self {
        Self { left: self.right, right: self.left }
    }
}

impl fmt::Display for MlsDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}{}", self.left, self.right)
    }
}

/// One bosonic mode: truncated Fock ladder plus the bare energy used for
/// thermal-state preparation and file headers.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModeSpec {
    /// Number of retained Fock states; indices run over `0..fock`.
    pub fock: Count,
    /// Mode energy in angular-frequency units (hbar = 1).
    pub energy: f64,
}

/// Resolution of an `MlsDim` against a [`SystemSpec`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DimRef {
    /// The eliminated ground density `n00 = N - sum(tracked counts)`.
    Implicit00,
    /// Position in the tracked-dimension list.
    Tracked(usize),
}

#[derive(Error, Debug, PartialEq)]
pub enum SpecError {
    #[error("dimension list must not be empty")]
    EmptyDims,
    #[error("duplicate dimension {0}")]
    DuplicateDim(MlsDim),
    #[error("n00 is the implicit ground density and cannot be declared")]
    ImplicitGroundDim,
    #[error("dimension {dim} references level {level}, but the system has {n_levels} levels")]
    LevelOutOfRange { dim: MlsDim, level: u8, n_levels: u8 },
    #[error("cutoff for {0} must be at least 1")]
    ZeroCutoff(MlsDim),
    #[error("a mode must retain at least one Fock state")]
    ZeroFock,
    #[error("need one energy per level ({expected}), got {got}")]
    EnergyCount { expected: usize, got: usize },
    #[error("system must have at least two levels")]
    TooFewLevels,
    #[error("dimension {0} is not tracked (and is not the implicit n00)")]
    UntrackedDim(MlsDim),
    #[error("basis size exceeds the 64-bit index space")]
    IndexOverflow,
}

/// Declaration of the degrees of freedom: how many systems, how many levels,
/// which `n_kl` are tracked (with per-dimension cutoffs) and which modes exist.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    n_systems: Count,
    n_levels: u8,
    dims: Vec<(MlsDim, Count)>,
    level_energies: Vec<f64>,
    modes: Vec<ModeSpec>,
}

/// Validate and build a [`SystemSpec`].
///
/// Dimensions are tracked in declaration order; modes are numbered `0, 1, ...`
/// in declaration order. Cutoffs larger than `N + 1` are clamped (a count can
/// never exceed N). `level_energies` holds one entry per level.
pub fn define_system(
    n_systems: Count,
    n_levels: u8,
    dims: &[(MlsDim, Count)],
    level_energies: &[f64],
    modes: &[ModeSpec],
) -> Result<SystemSpec, SpecError> {
    if n_levels < 2 {
        return Err(SpecError::TooFewLevels);
    }
    if dims.is_empty() {
        return Err(SpecError::EmptyDims);
    }
    if level_energies.len() != n_levels as usize {
        return Err(SpecError::EnergyCount { expected: n_levels as usize, got: level_energies.len() });
    }
    let mut seen = Vec::new();
    let mut clamped = Vec::with_capacity(dims.len());
    for &(dim, cutoff) in dims {
        if dim == MlsDim::new(0, 0) {
            return Err(SpecError::ImplicitGroundDim);
        }
        for level in [dim.left, dim.right] {
            if level >= n_levels {
                return Err(SpecError::LevelOutOfRange { dim, level, n_levels });
            }
        }
        if seen.contains(&dim) {
            return Err(SpecError::DuplicateDim(dim));
        }
        if cutoff == 0 {
            return Err(SpecError::ZeroCutoff(dim));
        }
        seen.push(dim);
        clamped.push((dim, cutoff.min(n_systems + 1)));
    }
    for mode in modes {
        if mode.fock == 0 {
            return Err(SpecError::ZeroFock);
        }
    }
    Ok(SystemSpec {
        n_systems,
        n_levels,
        dims: clamped,
        level_energies: level_energies.to_vec(),
        modes: modes.to_vec(),
    })
}

impl SystemSpec {
    pub fn n_systems(&self) -> Count {
        self.n_systems
    }

    pub fn n_levels(&self) -> u8 {
        self.n_levels
    }

    /// Tracked dimensions with their cutoffs, in declaration order.
    pub fn dims(&self) -> &[(MlsDim, Count)] {
        &self.dims
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn level_energies(&self) -> &[f64] {
        &self.level_energies
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn dim_position(&self, dim: MlsDim) -> Option<usize> {
        self.dims.iter().position(|&(d, _)| d == dim)
    }

    /// Resolve a dimension to its tracked slot or the implicit `n00`.
    pub fn resolve(&self, dim: MlsDim) -> Result<DimRef, SpecError> {
        if dim == MlsDim::new(0, 0) {
            return Ok(DimRef::Implicit00);
        }
        self.dim_position(dim)
            .map(DimRef::Tracked)
            .ok_or(SpecError::UntrackedDim(dim))
    }

    /// Like [`resolve`](Self::resolve) but with `None` for absent dimensions,
    /// for callers that skip decoupled degrees of freedom.
    pub fn resolve_opt(&self, dim: MlsDim) -> Option<DimRef> {
        if dim == MlsDim::new(0, 0) {
            Some(DimRef::Implicit00)
        } else {
            self.dim_position(dim).map(DimRef::Tracked)
        }
    }
}

/// A basis state: one count per tracked dimension plus a (ket, bra) Fock pair
/// per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub mls: Vec<Count>,
    pub modes: Vec<(Count, Count)>,
}

impl MultiIndex {
    /// Flatten into the internal layout `[dims..., m0_ket, m0_bra, ...]`.
    pub(crate) fn flatten(&self) -> Vec<Count> {
        let mut flat = self.mls.clone();
        for &(k, b) in &self.modes {
            flat.push(k);
            flat.push(b);
        }
        flat
    }

    pub(crate) fn from_flat(flat: &[Count], n_dims: usize) -> Self {
        let mls = flat[..n_dims].to_vec();
        let modes = flat[n_dims..].chunks(2).map(|c| (c[0], c[1])).collect();
        Self { mls, modes }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.mls.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        for &(k, b) in &self.modes {
            write!(f, ";{k},{b}")?;
        }
        write!(f, "]")
    }
}

/// Number of admissible configurations of `m` counts summing to at most N with
/// no truncation: `binomial(N + m - 1, N)`.
///
/// Exact integer arithmetic; overflow beyond 64 bits is an error.
pub fn dimension_count(n_systems: u64, m: u64) -> Result<u64, SpecError> {
    assert!(m >= 1, "at least one dimension required");
    binomial(n_systems + m - 1, n_systems).ok_or(SpecError::IndexOverflow)
}

/// `binomial(n, k)` with exact 128-bit intermediates, `None` on overflow of
/// the 64-bit result.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    u64::try_from(acc).ok()
}

/// The enumerated symmetric basis with a bijective linear index.
///
/// Immutable after construction; lookups are served from a lazily built map,
/// so enumeration itself stays allocation-light.
pub struct SymBasis {
    spec: SystemSpec,
    width: usize,
    arena: Vec<Count>,
    n_states: usize,
    lookup: OnceLock<HashMap<Vec<Count>, usize>>,
    /// For each tracked dim, the slot of its hermitian partner (None when the
    /// partner is untracked).
    transposed_slot: Vec<Option<usize>>,
}

impl SymBasis {
    fn state_width(spec: &SystemSpec) -> usize {
        spec.n_dims() + 2 * spec.n_modes()
    }

    /// Enumerate all states satisfying the cutoffs and `sum(counts) <= N`, in
    /// lexicographic order (dims in declaration order outermost, then the
    /// (ket, bra) pair of each mode).
    pub fn enumerate(spec: &SystemSpec) -> Result<Self, SpecError> {
        let width = Self::state_width(spec);
        let n_mls = count_mls_states(spec);
        let mode_space: u64 = spec
            .modes()
            .iter()
            .try_fold(1u64, |acc, m| acc.checked_mul((m.fock as u64).checked_pow(2)?))
            .ok_or(SpecError::IndexOverflow)?;
        let total = n_mls.checked_mul(mode_space).ok_or(SpecError::IndexOverflow)?;
        let n_states = usize::try_from(total).map_err(|_| SpecError::IndexOverflow)?;
        n_states
            .checked_mul(width)
            .ok_or(SpecError::IndexOverflow)?;

        let mut arena = Vec::with_capacity(n_states * width);
        let mut scratch = vec![0; width];
        visit_mls_states(spec, &mut |mls| {
            scratch[..mls.len()].copy_from_slice(mls);
            emit_mode_product(spec, &mut scratch, mls.len(), &mut arena);
        });
        debug_assert_eq!(arena.len(), n_states * width);

        let transposed_slot = spec
            .dims()
            .iter()
            .map(|&(d, _)| spec.dim_position(d.transposed()))
            .collect();

        Ok(Self {
            spec: spec.clone(),
            width,
            arena,
            n_states,
            lookup: OnceLock::new(),
            transposed_slot,
        })
    }

    /// Build a basis restricted to the given (sorted, deduplicated) subset of
    /// this basis's states. Used by reachability pruning.
    pub(crate) fn filtered(&self, keep: &[usize]) -> SymBasis {
        let mut arena = Vec::with_capacity(keep.len() * self.width);
        for &i in keep {
            arena.extend_from_slice(self.state(i));
        }
        SymBasis {
            spec: self.spec.clone(),
            width: self.width,
            arena,
            n_states: keep.len(),
            lookup: OnceLock::new(),
            transposed_slot: self.transposed_slot.clone(),
        }
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Flat view `[dims..., m0_ket, m0_bra, ...]` of state `i`.
    pub fn state(&self, i: usize) -> &[Count] {
        &self.arena[i * self.width..(i + 1) * self.width]
    }

    pub fn multi_index(&self, i: usize) -> MultiIndex {
        MultiIndex::from_flat(self.state(i), self.spec.n_dims())
    }

    /// Like [`multi_index`](Self::multi_index) but `None` instead of a panic
    /// for a linear index out of range.
    pub fn checked_multi_index(&self, i: usize) -> Option<MultiIndex> {
        (i < self.n_states).then(|| self.multi_index(i))
    }

    pub fn states(&self) -> impl Iterator<Item = &[Count]> {
        self.arena.chunks_exact(self.width)
    }

    fn lookup_map(&self) -> &HashMap<Vec<Count>, usize> {
        self.lookup.get_or_init(|| {
            self.states()
                .enumerate()
                .map(|(i, s)| (s.to_vec(), i))
                .collect()
        })
    }

    /// Linear index of a flat state, `None` if it is outside the truncation.
    pub fn index_of_flat(&self, flat: &[Count]) -> Option<usize> {
        self.lookup_map().get(flat).copied()
    }

    pub fn index_of(&self, idx: &MultiIndex) -> Option<usize> {
        if idx.mls.len() != self.spec.n_dims() || idx.modes.len() != self.spec.n_modes() {
            return None;
        }
        self.index_of_flat(&idx.flatten())
    }

    /// Count of tracked dimension `slot` in state `s`.
    pub fn count(&self, s: &[Count], slot: usize) -> Count {
        s[slot]
    }

    /// Implicit ground-state count `n00 = N - sum(all tracked counts)`.
    pub fn implicit_n00(&self, s: &[Count]) -> Count {
        let used: Count = s[..self.spec.n_dims()].iter().sum();
        self.spec.n_systems() - used
    }

    pub fn count_ref(&self, s: &[Count], dim: DimRef) -> Count {
        match dim {
            DimRef::Implicit00 => self.implicit_n00(s),
            DimRef::Tracked(slot) => s[slot],
        }
    }

    pub fn mode_ket(&self, s: &[Count], mode: usize) -> Count {
        s[self.spec.n_dims() + 2 * mode]
    }

    pub fn mode_bra(&self, s: &[Count], mode: usize) -> Count {
        s[self.spec.n_dims() + 2 * mode + 1]
    }

    /// True when the state carries population: every polarization count is
    /// zero and every mode has equal ket and bra indices.
    pub fn is_density_element(&self, s: &[Count]) -> bool {
        for (slot, &(dim, _)) in self.spec.dims().iter().enumerate() {
            if !dim.is_density() && s[slot] != 0 {
                return false;
            }
        }
        (0..self.spec.n_modes()).all(|j| self.mode_ket(s, j) == self.mode_bra(s, j))
    }

    /// Index of the hermitian-conjugate state (all `n_kl <-> n_lk`, mode
    /// ket <-> bra). `None` when a transposed dimension is untracked or the
    /// partner falls outside the truncation.
    pub fn transpose_index(&self, i: usize) -> Option<usize> {
        let s = self.state(i);
        let n_dims = self.spec.n_dims();
        let mut flat = vec![0; self.width];
        for slot in 0..n_dims {
            if s[slot] == 0 {
                continue;
            }
            match self.transposed_slot[slot] {
                Some(t) => flat[t] = s[slot],
                None => return None,
            }
        }
        for j in 0..self.spec.n_modes() {
            flat[n_dims + 2 * j] = self.mode_bra(s, j);
            flat[n_dims + 2 * j + 1] = self.mode_ket(s, j);
        }
        self.index_of_flat(&flat)
    }

    /// Multiplicity of the state's MLS configuration: the multinomial
    /// `N! / (n00! * prod n_kl!)`, i.e. the number of distinct arrangements
    /// summed over in the unnormalized symmetric basis element.
    pub fn multiplicity(&self, s: &[Count]) -> u64 {
        let n_dims = self.spec.n_dims();
        let mut counts: Vec<u64> = s[..n_dims].iter().map(|&c| c as u64).collect();
        counts.push(self.implicit_n00(s) as u64);
        multinomial(self.spec.n_systems() as u64, &counts)
    }
}

/// `n! / prod(counts!)` where `counts` sums to `n`. Exact via incremental
/// binomials; callers keep `n` small enough for u64.
pub fn multinomial(n: u64, counts: &[u64]) -> u64 {
    debug_assert_eq!(counts.iter().sum::<u64>(), n);
    let mut remaining = n;
    let mut acc: u64 = 1;
    for &c in counts {
        acc = acc
            .checked_mul(binomial(remaining, c).expect("multinomial overflow"))
            .expect("multinomial overflow");
        remaining -= c;
    }
    acc
}

/// Number of admissible MLS configurations under the spec's cutoffs.
pub fn count_mls_states(spec: &SystemSpec) -> u64 {
    let mut count = 0u64;
    visit_mls_states(spec, &mut |_| count += 1);
    count
}

/// Streaming enumeration of MLS count vectors in lexicographic order.
fn visit_mls_states(spec: &SystemSpec, visit: &mut impl FnMut(&[Count])) {
    let n_dims = spec.n_dims();
    let mut counts = vec![0; n_dims];
    fn rec(
        spec: &SystemSpec,
        counts: &mut [Count],
        slot: usize,
        used: Count,
        visit: &mut impl FnMut(&[Count]),
    ) {
        if slot == counts.len() {
            visit(counts);
            return;
        }
        let cutoff = spec.dims()[slot].1;
        let max = cutoff.saturating_sub(1).min(spec.n_systems() - used);
        for v in 0..=max {
            counts[slot] = v;
            rec(spec, counts, slot + 1, used + v, visit);
        }
        counts[slot] = 0;
    }
    rec(spec, &mut counts, 0, 0, visit);
}

/// Append the full (ket, bra) mode product for one MLS configuration.
fn emit_mode_product(spec: &SystemSpec, scratch: &mut [Count], base: usize, arena: &mut Vec<Count>) {
    fn rec(spec: &SystemSpec, scratch: &mut [Count], base: usize, mode: usize, arena: &mut Vec<Count>) {
        if mode == spec.n_modes() {
            arena.extend_from_slice(scratch);
            return;
        }
        let fock = spec.modes()[mode].fock;
        for ket in 0..fock {
            for bra in 0..fock {
                scratch[base + 2 * mode] = ket;
                scratch[base + 2 * mode + 1] = bra;
                rec(spec, scratch, base, mode + 1, arena);
            }
        }
    }
    rec(spec, scratch, base, 0, arena);
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tls_dims(cutoff: Count) -> Vec<(MlsDim, Count)> {
        vec![
            (MlsDim::new(1, 1), cutoff),
            (MlsDim::new(1, 0), cutoff),
            (MlsDim::new(0, 1), cutoff),
        ]
    }

    fn tls_spec(n: Count, modes: &[ModeSpec]) -> SystemSpec {
        define_system(n, 2, &tls_dims(n + 1), &[0.0, 1.0], modes).unwrap()
    }

    #[test]
    fn define_system_validates() {
        let spec = tls_spec(2, &[]);
        assert_eq!(spec.n_dims(), 3);
        assert_eq!(spec.n_systems(), 2);

        // minimal N=1 system
        let spec1 = define_system(1, 2, &tls_dims(2), &[0.0, 1.0], &[]).unwrap();
        assert_eq!(spec1.n_systems(), 1);

        // explicit n00 is rejected
        let err = define_system(2, 2, &[(MlsDim::new(0, 0), 3)], &[0.0, 1.0], &[]);
        assert_eq!(err.unwrap_err(), SpecError::ImplicitGroundDim);

        let err = define_system(2, 2, &[(MlsDim::new(1, 1), 3), (MlsDim::new(1, 1), 3)], &[0.0, 1.0], &[]);
        assert_eq!(err.unwrap_err(), SpecError::DuplicateDim(MlsDim::new(1, 1)));

        let err = define_system(2, 2, &[(MlsDim::new(2, 1), 3)], &[0.0, 1.0], &[]);
        assert!(matches!(err.unwrap_err(), SpecError::LevelOutOfRange { .. }));

        let err = define_system(2, 2, &[(MlsDim::new(1, 1), 0)], &[0.0, 1.0], &[]);
        assert_eq!(err.unwrap_err(), SpecError::ZeroCutoff(MlsDim::new(1, 1)));

        let err = define_system(2, 2, &[], &[0.0, 1.0], &[]);
        assert_eq!(err.unwrap_err(), SpecError::EmptyDims);
    }

    #[test]
    fn two_spins_have_ten_states() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        assert_eq!(basis.n_states(), 10);
        // Exactly the configurations with n11 + n10 + n01 <= 2, in
        // lexicographic order.
        let expected: Vec<Vec<Count>> = vec![
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![0, 0, 2],
            vec![0, 1, 0],
            vec![0, 1, 1],
            vec![0, 2, 0],
            vec![1, 0, 0],
            vec![1, 0, 1],
            vec![1, 1, 0],
            vec![2, 0, 0],
        ];
        let got: Vec<Vec<Count>> = basis.states().map(|s| s.to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn single_spin_has_four_states() {
        let basis = SymBasis::enumerate(&tls_spec(1, &[])).unwrap();
        assert_eq!(basis.n_states(), 4);
    }

    #[test]
    fn reduced_three_level_laser_n2() {
        // n22, n11, n10, n01 tracked: m = 5 effective dims, C(2+4, 2) = 15.
        let dims = vec![
            (MlsDim::new(2, 2), 3),
            (MlsDim::new(1, 1), 3),
            (MlsDim::new(1, 0), 3),
            (MlsDim::new(0, 1), 3),
        ];
        let spec = define_system(2, 3, &dims, &[0.0, 1.0, 2.0], &[]).unwrap();
        let basis = SymBasis::enumerate(&spec).unwrap();
        assert_eq!(basis.n_states(), 15);
        assert_eq!(dimension_count(2, 5).unwrap(), 15);
    }

    #[test]
    fn dimension_count_examples() {
        assert_eq!(dimension_count(2, 4).unwrap(), 10);
        assert_eq!(dimension_count(1, 4).unwrap(), 4);
        assert_eq!(dimension_count(10, 4).unwrap(), 286);
    }

    #[test]
    fn count_matches_enumeration_untruncated() {
        for m in [4u64, 5, 9] {
            for n in 0..=12u64 {
                let n_levels = if m <= 4 { 2 } else { 3 };
                let dims: Vec<(MlsDim, Count)> = all_dims(n_levels)
                    .into_iter()
                    .take(m as usize - 1)
                    .map(|d| (d, n as Count + 1))
                    .collect();
                let energies = vec![0.0; n_levels as usize];
                let spec = define_system(n as Count, n_levels, &dims, &energies, &[]).unwrap();
                assert_eq!(count_mls_states(&spec), dimension_count(n, m).unwrap());
            }
        }
    }

    pub(crate) fn all_dims(n_levels: u8) -> Vec<MlsDim> {
        let mut dims = Vec::new();
        for k in 0..n_levels {
            for l in 0..n_levels {
                if (k, l) != (0, 0) {
                    dims.push(MlsDim::new(k, l));
                }
            }
        }
        dims
    }

    #[test]
    fn mode_space_is_a_product() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[ModeSpec { fock: 4, energy: 1.0 }])).unwrap();
        assert_eq!(basis.n_states(), 10 * 16);
        let two = [ModeSpec { fock: 3, energy: 1.0 }, ModeSpec { fock: 2, energy: 0.5 }];
        let basis = SymBasis::enumerate(&tls_spec(2, &two)).unwrap();
        assert_eq!(basis.n_states(), 10 * 9 * 4);
    }

    #[test]
    fn index_map_round_trip() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[ModeSpec { fock: 3, energy: 1.0 }])).unwrap();
        // all-zero state comes first
        assert_eq!(basis.index_of_flat(&[0, 0, 0, 0, 0]), Some(0));
        for i in 0..basis.n_states() {
            let mi = basis.multi_index(i);
            assert_eq!(basis.index_of(&mi), Some(i));
        }
        // out-of-truncation query is absent
        assert_eq!(
            basis.index_of(&MultiIndex { mls: vec![3, 0, 0], modes: vec![(0, 0)] }),
            None
        );
        // linear index out of range is reported, not wrapped
        assert!(basis.checked_multi_index(basis.n_states()).is_none());
        assert!(basis.checked_multi_index(0).is_some());
    }

    #[test]
    fn density_element_predicate() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[ModeSpec { fock: 3, energy: 1.0 }])).unwrap();
        let at = |mls: [Count; 3], m: (Count, Count)| {
            let i = basis
                .index_of(&MultiIndex { mls: mls.to_vec(), modes: vec![m] })
                .unwrap();
            basis.is_density_element(basis.state(i))
        };
        assert!(at([1, 0, 0], (2, 2)));
        assert!(!at([0, 1, 0], (0, 0)));
        assert!(!at([1, 0, 0], (1, 0)));
    }

    #[test]
    fn transpose_pairs_states() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[ModeSpec { fock: 3, energy: 1.0 }])).unwrap();
        let idx = |mls: [Count; 3], m: (Count, Count)| {
            basis.index_of(&MultiIndex { mls: mls.to_vec(), modes: vec![m] }).unwrap()
        };
        assert_eq!(
            basis.transpose_index(idx([0, 1, 0], (2, 1))),
            Some(idx([0, 0, 1], (1, 2)))
        );
        // densities with diagonal modes are fixed points
        let d = idx([2, 0, 0], (1, 1));
        assert_eq!(basis.transpose_index(d), Some(d));
    }

    #[test]
    fn multiplicity_is_multinomial() {
        let basis = SymBasis::enumerate(&tls_spec(2, &[])).unwrap();
        let mult = |mls: [Count; 3]| {
            let i = basis.index_of(&MultiIndex { mls: mls.to_vec(), modes: vec![] }).unwrap();
            basis.multiplicity(basis.state(i))
        };
        assert_eq!(mult([0, 0, 0]), 1);
        assert_eq!(mult([1, 0, 0]), 2);
        assert_eq!(mult([2, 0, 0]), 1);
        assert_eq!(mult([0, 1, 1]), 2);
        assert_eq!(mult([1, 1, 0]), 2);
    }
}
