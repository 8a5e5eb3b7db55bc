//! Permutation-symmetric Lindblad master equations for ensembles of identical
//! multi-level systems coupled to bosonic modes.
//!
//! Identical emitters make the master equation invariant under exchanging any
//! two of them. Expanding the density matrix in symmetrized Liouville-space
//! basis elements turns the exponential many-body problem into a polynomial
//! one: the state is a coefficient vector indexed by occupation numbers
//! `{n_kl}` (how many systems sit in each single-system matrix `|k><l|`) and
//! truncated Fock index pairs, and the Liouvillian becomes a sparse matrix on
//! that space.
//!
//! The crate is organized along the pipeline:
//!
//! * [`basis`] declares degrees of freedom and enumerates/indexes the basis;
//! * [`liouville`] assembles sparse Liouvillians from elementary arrows,
//!   collective operators, mode primitives and ready-made templates, and
//!   prunes decoupled states by graph reachability;
//! * [`dynamics`] prepares states, builds observables and distributions, and
//!   integrates in time (fixed RK4 or an embedded 3(2) pair);
//! * [`steady`] computes steady states by a trace-bordered sparse LU solve;
//! * [`oracle`] is a dense full-Hilbert-space reference implementation used
//!   to validate the reduction at small system sizes;
//! * [`frontend`] parses declarative model files, drives full runs, and
//!   writes column-oriented output; the `permlind` binary wraps it.
//!
//! The runnable `examples/` directory walks through every major capability.
//! Units: hbar = k_B = 1, all energies and rates in angular frequency.

pub mod basis;
pub mod dynamics;
pub mod frontend;
pub mod liouville;
pub mod oracle;
pub mod sparse;
pub mod splu;
pub mod steady;

pub use basis::{define_system, dimension_count, MlsDim, ModeSpec, MultiIndex, SymBasis, SystemSpec};
pub use dynamics::{
    distribution, evolve, hermiticity_defect, init_state, make_observable, pure_state,
    thermal_state, trace_functional, DensityVector, DistributionKind, DualVector, InitialState,
    Method, Observable, ObservableKind, SolverConfig, Temperature,
};
pub use liouville::{
    add_collective, add_mls_connecting, add_mls_nonconnecting, add_mode_elementary, add_template,
    collective_operator, mode_operator, prune_reachable, ModeOp, Side, TemplateKind,
};
pub use sparse::SparseOperator;
pub use steady::steady_state;
