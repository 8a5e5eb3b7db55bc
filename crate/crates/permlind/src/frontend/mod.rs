//! Declarative model files, the run pipeline, and the command-line driver.
//!
//! A model document names the system, an ordered list of Liouvillian terms,
//! the initial state, the solve mode and the output files; the grammar is
//! line-oriented (see `parse`). [`build_run`] turns a document into an
//! assembled, frozen Liouvillian with bound observables, optionally pruned to
//! the states reachable from the initial support.

pub mod builtin;
pub mod cli;
pub mod dense;
pub mod parse;
pub mod writer;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::basis::{define_system, MlsDim, ModeSpec, MultiIndex, SpecError, SymBasis};
use crate::dynamics::{
    init_state, make_observable, DensityVector, DistributionKind, InitialState, Observable,
    ObservableKind, SolveError, Temperature, DEFAULT_MONITOR_EVERY,
};
use crate::liouville::{
    add_mls_connecting, add_mls_nonconnecting, add_mode_elementary, add_template,
    collective_operator, mode_operator, prune_reachable, AssembleError, ModeOp, Side,
    TemplateKind,
};
use crate::sparse::SparseOperator;

pub use parse::{parse_model, print_model, ParseError};

#[derive(Error, Debug)]
pub enum RunError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `[system]` section.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDecl {
    pub systems: u32,
    pub levels: u8,
    pub dims: Vec<DimDecl>,
    pub energies: Vec<f64>,
    pub modes: Vec<ModeDecl>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimDecl {
    pub dim: MlsDim,
    /// Maximum count + 1; defaults to `systems + 1` (untruncated).
    pub cutoff: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeDecl {
    pub name: String,
    pub fock: u32,
    pub energy: f64,
}

/// One `[liouvillian]` line.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    MlsH0 { level: u8, freq: f64 },
    ModeH0 { mode: String, freq: f64 },
    MlsModeRwa { x: u8, y: u8, mode: String, g: f64 },
    MlsModeNonRwa { x: u8, y: u8, mode: String, g: f64 },
    MlsCohDrive { x: u8, y: u8, amp: f64 },
    ModeCohDrive { mode: String, amp: f64 },
    LindbladRelaxMls { from: MlsDim, to: MlsDim, rate: f64 },
    LindbladDephMls { dim: MlsDim, rate: f64 },
    LindbladMode { mode: String, rate: f64 },
    LindbladModeThermal { mode: String, rate: f64, mean_occ: f64 },
    Nonconnecting { dim: MlsDim, coeff: C64 },
    Connecting { inc: MlsDim, dec: MlsDim, coeff: C64 },
    ModeElementary { kind: ModeOp, mode: String, coeff: C64 },
    /// One-sided operator product `coeff * F1 . F2 . ...` (matrix order).
    Product { coeff: C64, factors: Vec<Factor> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Collective { x: u8, y: u8, side: Side },
    Mode { atom: ModeAtom, side: Side, mode: String },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ModeAtom {
    B,
    Bd,
    BdB,
    BBd,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialDecl {
    Pure(Vec<u32>),
    Thermal(Temperature),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveMode {
    Rk4 { dt: f64, t_end: f64 },
    Adaptive { rtol: f64, atol: f64, dt_initial: f64, dt_min: f64, dt_max: f64, t_end: f64 },
    Steady,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveDecl {
    pub mode: SolveMode,
    pub prune: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableDecl {
    pub label: String,
    pub kind: ObsKindDecl,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObsKindDecl {
    MlsOccupation(MlsDim),
    ModeOccupation(String),
    G2Zero(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropFileDecl {
    pub name: String,
    pub columns: Vec<ObservableDecl>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistKindDecl {
    ModeNumber(String),
    MlsExcitation(MlsDim),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistFileDecl {
    pub name: String,
    pub kind: DistKindDecl,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputDecl {
    pub cadence: u32,
    pub files: Vec<PropFileDecl>,
    pub distributions: Vec<DistFileDecl>,
}

impl Default for OutputDecl {
    fn default() -> Self {
        Self { cadence: DEFAULT_MONITOR_EVERY, files: Vec::new(), distributions: Vec::new() }
    }
}

/// A fully parsed model file.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDocument {
    pub system: SystemDecl,
    pub terms: Vec<Term>,
    pub initial: InitialDecl,
    pub solve: SolveDecl,
    pub output: OutputDecl,
}

impl ModelDocument {
    pub fn mode_index(&self, name: &str) -> Option<usize> {
        self.system.modes.iter().position(|m| m.name == name)
    }
}

/// Static facts about a built run, printed as the run report.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub basis_states: usize,
    /// States before pruning, when pruning ran.
    pub unpruned_states: Option<usize>,
    pub nnz: usize,
    pub dropped_arrows: u64,
}

/// A bound property file: labels plus materialized observables.
pub struct PropFileBound {
    pub name: String,
    pub labels: Vec<String>,
    pub observables: Vec<Observable>,
}

pub struct DistFileBound {
    pub name: String,
    pub kind: DistributionKind,
}

/// Everything needed to solve and write output.
pub struct Run {
    pub basis: SymBasis,
    pub liouvillian: SparseOperator,
    pub initial: DensityVector,
    /// False when the initial state is a coherence rather than a population.
    pub initial_physical: bool,
    pub solve: SolveDecl,
    pub cadence: u32,
    pub prop_files: Vec<PropFileBound>,
    pub dist_files: Vec<DistFileBound>,
    pub report: RunReport,
}

fn mode_index(doc: &ModelDocument, name: &str) -> Result<usize, RunError> {
    doc.mode_index(name)
        .ok_or_else(|| RunError::Invalid(format!("mode '{name}' is not declared")))
}

fn mode_atom_op(atom: ModeAtom, side: Side) -> ModeOp {
    match (atom, side) {
        (ModeAtom::B, Side::Left) => ModeOp::BL,
        (ModeAtom::B, Side::Right) => ModeOp::BR,
        (ModeAtom::Bd, Side::Left) => ModeOp::BdL,
        (ModeAtom::Bd, Side::Right) => ModeOp::BdR,
        (ModeAtom::BdB, Side::Left) => ModeOp::BdBL,
        (ModeAtom::BdB, Side::Right) => ModeOp::BdBR,
        (ModeAtom::BBd, Side::Left) => ModeOp::BBdL,
        (ModeAtom::BBd, Side::Right) => ModeOp::BBdR,
    }
}

/// Add one document term to the operator under assembly.
pub fn assemble_term(
    doc: &ModelDocument,
    basis: &SymBasis,
    op: &mut SparseOperator,
    term: &Term,
) -> Result<(), RunError> {
    match term {
        Term::MlsH0 { level, freq } => {
            add_template(basis, op, TemplateKind::MlsH0 { level: *level, freq: *freq })?
        }
        Term::ModeH0 { mode, freq } => {
            let mode = mode_index(doc, mode)?;
            add_template(basis, op, TemplateKind::ModeH0 { mode, freq: *freq })?
        }
        Term::MlsModeRwa { x, y, mode, g } => {
            let mode = mode_index(doc, mode)?;
            add_template(basis, op, TemplateKind::MlsModeRwa { x: *x, y: *y, mode, g: *g })?
        }
        Term::MlsModeNonRwa { x, y, mode, g } => {
            let mode = mode_index(doc, mode)?;
            add_template(basis, op, TemplateKind::MlsModeNonRwa { x: *x, y: *y, mode, g: *g })?
        }
        Term::MlsCohDrive { x, y, amp } => {
            add_template(basis, op, TemplateKind::MlsCohDrive { x: *x, y: *y, amp: *amp })?
        }
        Term::ModeCohDrive { mode, amp } => {
            let mode = mode_index(doc, mode)?;
            add_template(basis, op, TemplateKind::ModeCohDrive { mode, amp: *amp })?
        }
        Term::LindbladRelaxMls { from, to, rate } => {
            if !from.is_density() || !to.is_density() {
                return Err(RunError::Invalid(format!(
                    "relaxation takes density dimensions, got {from} -> {to}"
                )));
            }
            add_template(
                basis,
                op,
                TemplateKind::LindbladRelaxMls { from: from.left, to: to.left, rate: *rate },
            )?
        }
        Term::LindbladDephMls { dim, rate } => {
            add_template(basis, op, TemplateKind::LindbladDephMls { dim: *dim, rate: *rate })?
        }
        Term::LindbladMode { mode, rate } => {
            let mode = mode_index(doc, mode)?;
            add_template(basis, op, TemplateKind::LindbladMode { mode, rate: *rate })?
        }
        Term::LindbladModeThermal { mode, rate, mean_occ } => {
            let mode = mode_index(doc, mode)?;
            add_template(
                basis,
                op,
                TemplateKind::LindbladModeThermal { mode, rate: *rate, mean_occ: *mean_occ },
            )?
        }
        Term::Nonconnecting { dim, coeff } => add_mls_nonconnecting(basis, op, *dim, *coeff)?,
        Term::Connecting { inc, dec, coeff } => add_mls_connecting(basis, op, *inc, *dec, *coeff)?,
        Term::ModeElementary { kind, mode, coeff } => {
            let mode = mode_index(doc, mode)?;
            add_mode_elementary(basis, op, mode, *kind, *coeff)?
        }
        Term::Product { coeff, factors } => {
            if factors.is_empty() {
                return Err(RunError::Invalid("product needs at least one factor".into()));
            }
            let mut acc: Option<SparseOperator> = None;
            for f in factors {
                let m = match f {
                    Factor::Collective { x, y, side } => collective_operator(basis, *side, *x, *y)?,
                    Factor::Mode { atom, side, mode } => {
                        let mode = mode_index(doc, mode)?;
                        mode_operator(basis, mode, mode_atom_op(*atom, *side))?
                    }
                };
                acc = Some(match acc {
                    None => m,
                    Some(prev) => prev.product(&m).map_err(AssembleError::from)?,
                });
            }
            op.axpy(*coeff, &acc.unwrap()).map_err(AssembleError::from)?;
        }
    }
    Ok(())
}

/// Resolve the `[system]` section into a validated [`crate::basis::SystemSpec`].
pub fn system_spec(decl: &SystemDecl) -> Result<crate::basis::SystemSpec, RunError> {
    let dims: Vec<(MlsDim, u32)> = decl
        .dims
        .iter()
        .map(|d| (d.dim, d.cutoff.unwrap_or(decl.systems + 1)))
        .collect();
    let modes: Vec<ModeSpec> = decl
        .modes
        .iter()
        .map(|m| ModeSpec { fock: m.fock, energy: m.energy })
        .collect();
    Ok(define_system(decl.systems, decl.levels, &dims, &decl.energies, &modes)?)
}

fn initial_state_decl(
    doc: &ModelDocument,
    basis: &SymBasis,
) -> Result<(DensityVector, bool), RunError> {
    match &doc.initial {
        InitialDecl::Pure(qnumbers) => {
            let n_dims = doc.system.dims.len();
            let expected = n_dims + 2 * doc.system.modes.len();
            if qnumbers.len() != expected {
                return Err(RunError::Invalid(format!(
                    "qnumbers needs {expected} entries (dims then ket/bra per mode), got {}",
                    qnumbers.len()
                )));
            }
            let mi = MultiIndex {
                mls: qnumbers[..n_dims].to_vec(),
                modes: qnumbers[n_dims..].chunks(2).map(|c| (c[0], c[1])).collect(),
            };
            let physical = basis
                .index_of(&mi)
                .map(|i| basis.is_density_element(basis.state(i)))
                .unwrap_or(false);
            let dm = init_state(basis, &InitialState::Pure(mi))?;
            Ok((dm, physical))
        }
        InitialDecl::Thermal(t) => Ok((init_state(basis, &InitialState::Thermal(*t))?, true)),
    }
}

fn bind_outputs(
    doc: &ModelDocument,
    basis: &SymBasis,
) -> Result<(Vec<PropFileBound>, Vec<DistFileBound>), RunError> {
    let mut prop_files = Vec::new();
    for f in &doc.output.files {
        let mut labels = Vec::new();
        let mut observables = Vec::new();
        for col in &f.columns {
            let kind = match &col.kind {
                ObsKindDecl::MlsOccupation(dim) => ObservableKind::MlsOccupation(*dim),
                ObsKindDecl::ModeOccupation(name) => {
                    ObservableKind::ModeOccupation(mode_index(doc, name)?)
                }
                ObsKindDecl::G2Zero(name) => ObservableKind::G2Zero(mode_index(doc, name)?),
            };
            labels.push(col.label.clone());
            observables.push(make_observable(basis, kind)?);
        }
        prop_files.push(PropFileBound { name: f.name.clone(), labels, observables });
    }
    let mut dist_files = Vec::new();
    for d in &doc.output.distributions {
        let kind = match &d.kind {
            DistKindDecl::ModeNumber(name) => DistributionKind::ModeNumber(mode_index(doc, name)?),
            DistKindDecl::MlsExcitation(dim) => DistributionKind::MlsExcitation(*dim),
        };
        dist_files.push(DistFileBound { name: d.name.clone(), kind });
    }
    Ok((prop_files, dist_files))
}

/// Build the basis, assemble and freeze the Liouvillian, prepare the initial
/// state, optionally prune, and bind all outputs.
pub fn build_run(doc: &ModelDocument) -> Result<Run, RunError> {
    let spec = system_spec(&doc.system)?;
    let basis = SymBasis::enumerate(&spec)?;
    let mut op = SparseOperator::new(basis.n_states());
    for term in &doc.terms {
        assemble_term(doc, &basis, &mut op, term)?;
    }
    op.freeze();
    let (initial, initial_physical) = initial_state_decl(doc, &basis)?;

    let (basis, op, initial, unpruned_states) = if doc.solve.prune {
        let support = initial.support();
        if support.is_empty() {
            return Err(RunError::Invalid("initial state is zero; nothing to prune from".into()));
        }
        let full_states = basis.n_states();
        let pruned = prune_reachable(&basis, &op, &support)?;
        let mut reduced_init = DensityVector::zeros(pruned.basis.n_states());
        for (new, &old) in pruned.kept.iter().enumerate() {
            reduced_init.set(new, initial.get(old));
        }
        (pruned.basis, pruned.operator, reduced_init, Some(full_states))
    } else {
        (basis, op, initial, None)
    };

    let (prop_files, dist_files) = bind_outputs(doc, &basis)?;
    let report = RunReport {
        basis_states: basis.n_states(),
        unpruned_states,
        nnz: op.nnz(),
        dropped_arrows: op.dropped_arrows(),
    };
    Ok(Run {
        basis,
        liouvillian: op,
        initial,
        initial_physical,
        solve: doc.solve.clone(),
        cadence: doc.output.cadence,
        prop_files,
        dist_files,
        report,
    })
}
