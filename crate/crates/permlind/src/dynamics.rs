//! States, observables and time integration on the symmetric basis.
//!
//! The density matrix is a coefficient vector `P[s] = tr[B_s rho]`, one entry
//! per basis state; the unnormalized basis makes the trace the plain sum of
//! density-element coefficients. Observables are linear functionals (dual
//! vectors) evaluated by an unconjugated dot product.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{multinomial, MlsDim, MultiIndex, SymBasis};
use crate::liouville::{mode_operator, ModeOp};
use crate::sparse::SparseOperator;

#[derive(Error, Debug)]
pub enum SolveError {
    #[error("state {0} lies outside the enumerated basis")]
    InvalidState(MultiIndex),
    #[error("temperature must be positive (use Temperature::Zero for the beta -> infinity limit)")]
    NonPositiveTemperature,
    #[error("thermal preparation touches level {0} but its density dimension is not tracked")]
    ThermalNeedsDensityDim(u8),
    #[error("operator must be frozen before solving")]
    NotFrozen,
    #[error("dimension mismatch: operator {0}, state {1}")]
    DimensionMismatch(usize, usize),
    #[error("{0} is a polarization dimension; occupation observables need a density dimension")]
    PolarizationObservable(MlsDim),
    #[error("mode index {0} out of range")]
    UnknownMode(usize),
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("adaptive step fell below dt_min = {dt_min} at t = {t}")]
    StepUnderflow { t: f64, dt_min: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("bordered steady-state system is singular (degenerate null space?)")]
    SingularSystem,
    #[error("steady-state iteration stalled at residual {residual:e} (target {target:e})")]
    NoConvergence { residual: f64, target: f64 },
    #[error(transparent)]
    Assemble(#[from] crate::liouville::AssembleError),
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
}

/// Coefficient vector of the density matrix on a symmetric basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityVector {
    data: Vec<C64>,
}

impl DensityVector {
    pub fn zeros(n: usize) -> Self {
        Self { data: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_vec(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: C64) {
        self.data[i] = v;
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Indices carrying any amplitude; the support used by pruning.
    pub fn support(&self) -> Vec<usize> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != C64::new(0.0, 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

/// A linear functional on coefficient vectors.
#[derive(Clone, Debug)]
pub struct DualVector {
    data: Vec<C64>,
}

impl DualVector {
    pub fn from_vec(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Bilinear evaluation `sum_s dual[s] * dm[s]` (no conjugation).
    pub fn dot(&self, dm: &DensityVector) -> C64 {
        self.data
            .iter()
            .zip(dm.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// The trace functional: 1 on every density element, 0 elsewhere.
pub fn trace_functional(basis: &SymBasis) -> DualVector {
    let data = basis
        .states()
        .map(|s| {
            if basis.is_density_element(s) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    DualVector::from_vec(data)
}

/// Temperature for thermal preparation, in the same (angular frequency)
/// units as the stored energies, with k_B = hbar = 1.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Temperature {
    Finite(f64),
    /// The beta -> infinity limit: everything in the lowest-energy level and
    /// the mode vacua.
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Pure(MultiIndex),
    Thermal(Temperature),
}

/// Coefficient 1 at the named basis state, 0 elsewhere.
///
/// Any basis state is allowed, but only density elements are physically
/// meaningful populations; check [`SymBasis::is_density_element`] and warn.
pub fn pure_state(basis: &SymBasis, qnumbers: &MultiIndex) -> Result<DensityVector, SolveError> {
    let idx = basis
        .index_of(qnumbers)
        .ok_or_else(|| SolveError::InvalidState(qnumbers.clone()))?;
    let mut dm = DensityVector::zeros(basis.n_states());
    dm.set(idx, C64::new(1.0, 0.0));
    Ok(dm)
}

/// Product thermal state: Boltzmann level populations with multinomial
/// multiplicity on the multi-level systems, a renormalized geometric
/// distribution on each truncated Fock ladder.
pub fn thermal_state(basis: &SymBasis, temperature: Temperature) -> Result<DensityVector, SolveError> {
    let spec = basis.spec();
    let n_levels = spec.n_levels() as usize;
    let energies = spec.level_energies();

    let level_weights: Vec<f64> = match temperature {
        Temperature::Zero => {
            let ground = energies
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(k, _)| k)
                .unwrap();
            (0..n_levels).map(|k| if k == ground { 1.0 } else { 0.0 }).collect()
        }
        Temperature::Finite(t) => {
            if !(t > 0.0) {
                return Err(SolveError::NonPositiveTemperature);
            }
            let raw: Vec<f64> = energies.iter().map(|e| (-e / t).exp()).collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / z).collect()
        }
    };
    // every thermally populated excited level needs its density dimension
    for k in 1..n_levels {
        if level_weights[k] > 0.0 && spec.dim_position(MlsDim::new(k as u8, k as u8)).is_none() {
            return Err(SolveError::ThermalNeedsDensityDim(k as u8));
        }
    }

    let mode_weights: Vec<Vec<f64>> = spec
        .modes()
        .iter()
        .map(|mode| {
            let m = mode.fock as usize;
            match temperature {
                Temperature::Zero => {
                    let mut w = vec![0.0; m];
                    w[0] = 1.0;
                    w
                }
                Temperature::Finite(t) => {
                    let raw: Vec<f64> = (0..m).map(|i| (-(i as f64) * mode.energy / t).exp()).collect();
                    let z: f64 = raw.iter().sum();
                    raw.into_iter().map(|w| w / z).collect()
                }
            }
        })
        .collect();

    let n = spec.n_systems() as u64;
    let density_slots: Vec<(usize, usize)> = spec
        .dims()
        .iter()
        .enumerate()
        .filter(|(_, (d, _))| d.is_density())
        .map(|(slot, (d, _))| (slot, d.left as usize))
        .collect();

    let mut dm = DensityVector::zeros(basis.n_states());
    for (i, s) in basis.states().enumerate() {
        if !basis.is_density_element(s) {
            continue;
        }
        let mut counts: Vec<u64> = Vec::with_capacity(density_slots.len() + 1);
        let mut weight = 1.0f64;
        for &(slot, level) in &density_slots {
            let c = s[slot] as u64;
            counts.push(c);
            weight *= level_weights[level].powi(c as i32);
        }
        let n00 = basis.implicit_n00(s) as u64;
        counts.push(n00);
        weight *= level_weights[0].powi(n00 as i32);
        if weight == 0.0 {
            continue;
        }
        let mult = multinomial(n, &counts) as f64;
        let mut coeff = mult * weight;
        for (j, w) in mode_weights.iter().enumerate() {
            coeff *= w[basis.mode_ket(s, j) as usize];
        }
        dm.set(i, C64::new(coeff, 0.0));
    }
    Ok(dm)
}

pub fn init_state(basis: &SymBasis, kind: &InitialState) -> Result<DensityVector, SolveError> {
    match kind {
        InitialState::Pure(q) => pure_state(basis, q),
        InitialState::Thermal(t) => thermal_state(basis, *t),
    }
}

/// Max deviation from hermiticity: `|conj(P[s]) - P[T s]|` over all states,
/// where `T` transposes a state (absent partners count as zero).
pub fn hermiticity_defect(basis: &SymBasis, dm: &DensityVector) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..basis.n_states() {
        let partner = basis
            .transpose_index(i)
            .map(|j| dm.get(j))
            .unwrap_or_else(|| C64::new(0.0, 0.0));
        worst = worst.max((dm.get(i).conj() - partner).norm());
    }
    worst
}

/// Observable kinds backed by dual vectors.
pub enum ObservableKind {
    /// `<J_kk>`: occupation of level k, from the density dimension `n_kk`.
    MlsOccupation(MlsDim),
    /// `<b† b>` of a mode.
    ModeOccupation(usize),
    /// `tr[O rho]` for a custom frozen left-action operator `O rho`.
    Custom(SparseOperator),
    /// Equal-time second-order coherence `<b†b†bb> / <b†b>^2`.
    G2Zero(usize),
}

/// A materialized observable: either a single functional or a ratio of two.
pub enum Observable {
    Linear(DualVector),
    Ratio { num: DualVector, den: DualVector },
}

impl Observable {
    /// Real expectation value; `None` when a ratio's denominator vanishes.
    pub fn evaluate(&self, dm: &DensityVector) -> Option<f64> {
        match self {
            Observable::Linear(d) => Some(d.dot(dm).re),
            Observable::Ratio { num, den } => {
                let d = den.dot(dm).re;
                if d.abs() < 1e-300 {
                    None
                } else {
                    Some(num.dot(dm).re / (d * d))
                }
            }
        }
    }
}

/// `dual = Op^T t`: the functional computing `tr[O rho]` from the
/// superoperator of the left action `O rho`.
pub fn dual_from_left_operator(
    basis: &SymBasis,
    op: &SparseOperator,
) -> Result<DualVector, SolveError> {
    if !op.is_frozen() {
        return Err(SolveError::NotFrozen);
    }
    if op.dim() != basis.n_states() {
        return Err(SolveError::DimensionMismatch(op.dim(), basis.n_states()));
    }
    let t = trace_functional(basis);
    let mut out = vec![C64::new(0.0, 0.0); op.dim()];
    op.matvec_transpose(t.as_slice(), &mut out);
    Ok(DualVector::from_vec(out))
}

pub fn make_observable(basis: &SymBasis, kind: ObservableKind) -> Result<Observable, SolveError> {
    match kind {
        ObservableKind::MlsOccupation(dim) => {
            if !dim.is_density() {
                return Err(SolveError::PolarizationObservable(dim));
            }
            let dim_ref = basis
                .spec()
                .resolve(dim)
                .map_err(|_| SolveError::Assemble(crate::liouville::AssembleError::DimNotTracked(dim)))?;
            let data = basis
                .states()
                .map(|s| {
                    if basis.is_density_element(s) {
                        C64::new(basis.count_ref(s, dim_ref) as f64, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            Ok(Observable::Linear(DualVector::from_vec(data)))
        }
        ObservableKind::ModeOccupation(mode) => {
            if mode >= basis.spec().n_modes() {
                return Err(SolveError::UnknownMode(mode));
            }
            let data = basis
                .states()
                .map(|s| {
                    if basis.is_density_element(s) {
                        C64::new(basis.mode_ket(s, mode) as f64, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            Ok(Observable::Linear(DualVector::from_vec(data)))
        }
        ObservableKind::Custom(op) => Ok(Observable::Linear(dual_from_left_operator(basis, &op)?)),
        ObservableKind::G2Zero(mode) => {
            if mode >= basis.spec().n_modes() {
                return Err(SolveError::UnknownMode(mode));
            }
            let bl = mode_operator(basis, mode, ModeOp::BL)?;
            let bdl = mode_operator(basis, mode, ModeOp::BdL)?;
            let bdbl = mode_operator(basis, mode, ModeOp::BdBL)?;
            // b†b†bb as left actions, composed in operator order
            let num_op = bdl.product(&bdl)?.product(&bl)?.product(&bl)?;
            let num = dual_from_left_operator(basis, &num_op)?;
            let den = dual_from_left_operator(basis, &bdbl)?;
            Ok(Observable::Ratio { num, den })
        }
    }
}

/// Distribution kinds resolved into real vectors over an index.
pub enum DistributionKind {
    /// Probability of finding `m` quanta in a mode.
    ModeNumber(usize),
    /// Probability of finding `n` systems in a level (via its density dim).
    MlsExcitation(MlsDim),
}

/// Partition of the trace along one quantum number; entries sum to the trace.
pub fn distribution(
    basis: &SymBasis,
    dm: &DensityVector,
    kind: &DistributionKind,
) -> Result<Vec<f64>, SolveError> {
    match kind {
        DistributionKind::ModeNumber(mode) => {
            if *mode >= basis.spec().n_modes() {
                return Err(SolveError::UnknownMode(*mode));
            }
            let len = basis.spec().modes()[*mode].fock as usize;
            let mut out = vec![0.0; len];
            for (i, s) in basis.states().enumerate() {
                if basis.is_density_element(s) {
                    out[basis.mode_ket(s, *mode) as usize] += dm.get(i).re;
                }
            }
            Ok(out)
        }
        DistributionKind::MlsExcitation(dim) => {
            if !dim.is_density() {
                return Err(SolveError::PolarizationObservable(*dim));
            }
            let dim_ref = basis
                .spec()
                .resolve(*dim)
                .map_err(|_| SolveError::Assemble(crate::liouville::AssembleError::DimNotTracked(*dim)))?;
            let len = match dim_ref {
                crate::basis::DimRef::Tracked(slot) => basis.spec().dims()[slot].1 as usize,
                crate::basis::DimRef::Implicit00 => basis.spec().n_systems() as usize + 1,
            };
            let mut out = vec![0.0; len];
            for (i, s) in basis.states().enumerate() {
                if basis.is_density_element(s) {
                    out[basis.count_ref(s, dim_ref) as usize] += dm.get(i).re;
                }
            }
            Ok(out)
        }
    }
}

/// Integration method.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4Fixed { dt: f64 },
    /// Embedded Bogacki-Shampine 3(2) pair with PI step control.
    RkAdaptive32 {
        rtol: f64,
        atol: f64,
        dt_initial: f64,
        dt_min: f64,
        dt_max: f64,
    },
}

#[derive(Copy, Clone, Debug)]
pub struct SolverConfig {
    pub method: Method,
    pub t_end: f64,
    /// Monitor every this many accepted steps (a final call at `t_end` is
    /// always made).
    pub monitor_every: u32,
}

pub const DEFAULT_MONITOR_EVERY: u32 = 30;

#[derive(Copy, Clone, Debug, Default)]
pub struct EvolveStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evals: u64,
}

fn check_finite(y: &[C64], t: f64) -> Result<(), SolveError> {
    let s: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    if s.is_finite() {
        Ok(())
    } else {
        Err(SolveError::NonFinite { t })
    }
}

fn norm2(y: &[C64]) -> f64 {
    y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate `d/dt P = L P` from 0 to `t_end`.
///
/// The monitor runs after every `monitor_every`-th accepted step and once at
/// `t_end` (not duplicated when the last step coincides).
pub fn evolve<F: FnMut(f64, &DensityVector)>(
    l: &SparseOperator,
    dm: &DensityVector,
    cfg: &SolverConfig,
    mut monitor: F,
) -> Result<(DensityVector, EvolveStats), SolveError> {
    if !l.is_frozen() {
        return Err(SolveError::NotFrozen);
    }
    if l.dim() != dm.len() {
        return Err(SolveError::DimensionMismatch(l.dim(), dm.len()));
    }
    if !(cfg.t_end > 0.0) {
        return Err(SolveError::InvalidConfig("t_end must be positive".into()));
    }
    let cadence = cfg.monitor_every.max(1) as u64;
    let mut stats = EvolveStats::default();
    let mut state = dm.clone();
    let n = state.len();

    match cfg.method {
        Method::Rk4Fixed { dt } => {
            if !(dt > 0.0) {
                return Err(SolveError::InvalidConfig("dt must be positive".into()));
            }
            let mut k1 = vec![C64::new(0.0, 0.0); n];
            let mut k2 = k1.clone();
            let mut k3 = k1.clone();
            let mut k4 = k1.clone();
            let mut tmp = k1.clone();

            let n_full = (cfg.t_end / dt + 1e-9).floor() as u64;
            let rem = cfg.t_end - n_full as f64 * dt;
            let extra = rem > 1e-12 * cfg.t_end.max(1.0);
            let total = n_full + extra as u64;
            let mut last_monitored = false;
            for step in 1..=total {
                let h = if step <= n_full { dt } else { rem };
                let y = state.as_mut_slice();
                l.matvec(y, &mut k1);
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                l.matvec(&tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                l.matvec(&tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = y[i] + h * k3[i];
                }
                l.matvec(&tmp, &mut k4);
                for i in 0..n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                stats.rhs_evals += 4;
                stats.accepted_steps += 1;
                let t = if step == total { cfg.t_end } else { step as f64 * dt };
                check_finite(state.as_slice(), t)?;
                last_monitored = step % cadence == 0;
                if last_monitored {
                    monitor(t, &state);
                }
            }
            if !last_monitored {
                monitor(cfg.t_end, &state);
            }
        }
        Method::RkAdaptive32 { rtol, atol, dt_initial, dt_min, dt_max } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(SolveError::InvalidConfig("rtol and atol must be positive".into()));
            }
            if !(dt_initial > 0.0 && dt_min > 0.0 && dt_max >= dt_min) {
                return Err(SolveError::InvalidConfig("step bounds must be positive".into()));
            }
            let mut k1 = vec![C64::new(0.0, 0.0); n];
            let mut k2 = k1.clone();
            let mut k3 = k1.clone();
            let mut k4 = k1.clone();
            let mut tmp = k1.clone();
            let mut y_new = k1.clone();

            let mut t = 0.0f64;
            let mut h = dt_initial.clamp(dt_min, dt_max);
            l.matvec(state.as_slice(), &mut k1); // FSAL seed
            stats.rhs_evals += 1;
            let mut err_prev: f64 = 1.0;
            let mut last_monitored_at_end = false;
            while t < cfg.t_end {
                let h_eff = h.min(cfg.t_end - t);
                let y = state.as_slice();
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h_eff * k1[i];
                }
                l.matvec(&tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = y[i] + 0.75 * h_eff * k2[i];
                }
                l.matvec(&tmp, &mut k3);
                for i in 0..n {
                    y_new[i] = y[i] + h_eff * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
                }
                l.matvec(&y_new, &mut k4);
                stats.rhs_evals += 3;
                // embedded 2nd-order difference
                let mut err_sq = 0.0f64;
                for i in 0..n {
                    let e = h_eff
                        * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i]
                            - 1.0 / 8.0 * k4[i]);
                    err_sq += e.norm_sqr();
                }
                let err = err_sq.sqrt();
                let scale = atol + rtol * norm2(&y_new).max(norm2(y));
                let ratio = err / scale;
                if ratio <= 1.0 {
                    t += h_eff;
                    state.as_mut_slice().copy_from_slice(&y_new);
                    std::mem::swap(&mut k1, &mut k4); // FSAL
                    stats.accepted_steps += 1;
                    check_finite(state.as_slice(), t)?;
                    if stats.accepted_steps % cadence == 0 {
                        monitor(t, &state);
                        last_monitored_at_end = t >= cfg.t_end;
                    }
                    let e = ratio.max(1e-10);
                    let fac = 0.9 * e.powf(-0.7 / 3.0) * err_prev.powf(0.4 / 3.0);
                    h = (h_eff * fac.clamp(0.2, 5.0)).clamp(dt_min, dt_max);
                    err_prev = e;
                } else {
                    stats.rejected_steps += 1;
                    let fac = (0.9 * ratio.powf(-1.0 / 3.0)).max(0.1);
                    h = h_eff * fac;
                    if h < dt_min {
                        return Err(SolveError::StepUnderflow { t, dt_min });
                    }
                }
            }
            if !last_monitored_at_end {
                monitor(cfg.t_end, &state);
            }
        }
    }
    Ok((state, stats))
}
