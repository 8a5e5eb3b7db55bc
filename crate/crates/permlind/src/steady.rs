//! Direct steady-state computation: the null vector of the Liouvillian,
//! normalized to unit trace.
//!
//! Physical Liouvillians have the trace functional as a left null vector, so
//! their rows are linearly dependent. Replacing one redundant row (the first
//! density state) with the trace row yields a regular bordered system
//! `M x = e` whose solution satisfies `L x = 0` on all other rows and
//! `trace(x) = 1`. One sparse LU factorization plus a few refinement passes
//! (inverse iteration at zero shift) reaches the residual target; a singular
//! bordered matrix signals a degenerate null space.

use num_complex::Complex64 as C64;

use crate::basis::SymBasis;
use crate::dynamics::{trace_functional, DensityVector, SolveError};
use crate::sparse::SparseOperator;
use crate::splu::{self, CscMatrix};

/// Residual target relative to the operator norm: `|L x|_inf <= TOL * |L|_inf`.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

const MAX_REFINEMENTS: u32 = 40;

#[derive(Clone, Copy, Debug)]
pub struct SteadyStats {
    /// Final relative residual `|L x|_inf / |L|_inf`.
    pub residual: f64,
    /// Refinement solves performed (including the initial one).
    pub iterations: u32,
    /// Complex multiply-adds in the factorization.
    pub factor_ops: u64,
    /// Complex multiply-adds of one triangular solve.
    pub solve_ops: u64,
    /// Stored entries of the Liouvillian.
    pub liouvillian_nnz: u64,
    /// Total cost in units of one Liouvillian matrix-vector product.
    pub matvec_equivalents: f64,
}

/// Compute the unit-trace steady state of a frozen Liouvillian.
pub fn steady_state(
    basis: &SymBasis,
    l: &SparseOperator,
) -> Result<(DensityVector, SteadyStats), SolveError> {
    if !l.is_frozen() {
        return Err(SolveError::NotFrozen);
    }
    let n = l.dim();
    if n != basis.n_states() {
        return Err(SolveError::DimensionMismatch(n, basis.n_states()));
    }
    let trace = trace_functional(basis);
    let replaced_row = basis
        .states()
        .position(|s| basis.is_density_element(s))
        .expect("basis has at least one density element");

    let mut triplets: Vec<(usize, usize, C64)> = Vec::with_capacity(l.nnz() + n);
    for (r, c, v) in l.entries() {
        if r != replaced_row {
            triplets.push((r, c, v));
        }
    }
    for (c, &t) in trace.as_slice().iter().enumerate() {
        if t != C64::new(0.0, 0.0) {
            triplets.push((replaced_row, c, t));
        }
    }
    let bordered = CscMatrix::from_triplets(n, triplets);
    let perm = splu::reverse_cuthill_mckee(&bordered);
    let permuted = bordered.permuted(&perm);
    let lu = splu::factor(&permuted).map_err(|_| SolveError::SingularSystem)?;

    let mut pos = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        pos[old] = new;
    }
    let solve = |rhs: &[C64]| -> Vec<C64> {
        let permuted_rhs: Vec<C64> = perm.iter().map(|&old| rhs[old]).collect();
        let xp = lu.solve(&permuted_rhs);
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (new, &old) in perm.iter().enumerate() {
            x[old] = xp[new];
        }
        x
    };

    let l_norm = l.norm_inf();
    let target_abs = STEADY_RESIDUAL_TOL * l_norm;

    let mut b = vec![C64::new(0.0, 0.0); n];
    b[replaced_row] = C64::new(1.0, 0.0);
    let mut x = solve(&b);
    let mut iterations = 1u32;

    let mut lx = vec![C64::new(0.0, 0.0); n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        // normalize the trace before measuring the residual
        let tr = trace
            .as_slice()
            .iter()
            .zip(&x)
            .map(|(a, b)| a * b)
            .sum::<C64>();
        if tr.norm() < 1e-300 {
            return Err(SolveError::SingularSystem);
        }
        for v in &mut x {
            *v /= tr;
        }
        l.matvec(&x, &mut lx);
        residual = lx.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if residual <= target_abs {
            break;
        }
        // bordered residual: -(L x) off the trace row, 1 - trace(x) = 0 on it
        let mut r = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            if i != replaced_row {
                r[i] = -lx[i];
            }
        }
        let dx = solve(&r);
        for i in 0..n {
            x[i] += dx[i];
        }
        iterations += 1;
    }
    if residual > target_abs {
        return Err(SolveError::NoConvergence { residual, target: target_abs });
    }
    let nnz = l.nnz() as u64;
    let total_ops = lu.factor_ops + iterations as u64 * (lu.solve_ops() + nnz);
    let stats = SteadyStats {
        residual: residual / l_norm,
        iterations,
        factor_ops: lu.factor_ops,
        solve_ops: lu.solve_ops(),
        liouvillian_nnz: nnz,
        matvec_equivalents: total_ops as f64 / nnz as f64,
    };
    Ok((DensityVector::from_vec(x), stats))
}
