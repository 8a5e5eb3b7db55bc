//! Translation of a model document into the dense reference model.
//!
//! The dense side works on the full tensor-product space with textbook
//! operator algebra; it shares no assembly code with the symmetric-basis
//! path. Hamiltonian templates become operator matrices, Lindblad templates
//! become jump channels, and elementary arrows become their defining
//! per-site `A rho B` sums.

use num_complex::Complex64 as C64;

use super::{Factor, InitialDecl, ModeAtom, ModelDocument, ObsKindDecl, RunError, Term};
use crate::basis::SymBasis;
use crate::dynamics::{init_state, InitialState};
use crate::liouville::{ModeOp, Side};
use crate::oracle::{DenseModel, SparseMat};

fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Build the reference model for a document (subject to the oracle size cap).
pub fn dense_model(doc: &ModelDocument) -> Result<DenseModel, RunError> {
    let focks: Vec<usize> = doc.system.modes.iter().map(|m| m.fock as usize).collect();
    let mut model = DenseModel::new(doc.system.systems as usize, doc.system.levels as usize, &focks)?;
    let n = doc.system.systems as usize;
    for term in &doc.terms {
        match term {
            Term::MlsH0 { level, freq } => {
                let x = *level as usize;
                model.add_hamiltonian(&model.collective(x, x).scaled(cr(*freq)));
            }
            Term::ModeH0 { mode, freq } => {
                let j = doc.mode_index(mode).unwrap();
                model.add_hamiltonian(&model.number_op(j).scaled(cr(*freq)));
            }
            Term::MlsModeRwa { x, y, mode, g } => {
                let j = doc.mode_index(mode).unwrap();
                let b = model.annihilator(j);
                let h = model
                    .collective(*x as usize, *y as usize)
                    .matmul(&b.dagger())
                    .plus(&model.collective(*y as usize, *x as usize).matmul(&b))
                    .scaled(cr(*g));
                model.add_hamiltonian(&h);
            }
            Term::MlsModeNonRwa { x, y, mode, g } => {
                let j = doc.mode_index(mode).unwrap();
                let b = model.annihilator(j);
                let jsum = model
                    .collective(*x as usize, *y as usize)
                    .plus(&model.collective(*y as usize, *x as usize));
                let h = jsum.matmul(&b.plus(&b.dagger())).scaled(cr(*g));
                model.add_hamiltonian(&h);
            }
            Term::MlsCohDrive { x, y, amp } => {
                let h = model
                    .collective(*x as usize, *y as usize)
                    .plus(&model.collective(*y as usize, *x as usize))
                    .scaled(cr(*amp));
                model.add_hamiltonian(&h);
            }
            Term::ModeCohDrive { mode, amp } => {
                let j = doc.mode_index(mode).unwrap();
                let b = model.annihilator(j);
                model.add_hamiltonian(&b.plus(&b.dagger()).scaled(cr(*amp)));
            }
            Term::LindbladRelaxMls { from, to, rate } => {
                // the template's three arrows: jump gain plus the population
                // part of the anticommutator; coherence dephasing arrives via
                // the document's explicit deph terms
                let f = from.left as usize;
                let t = to.left as usize;
                for site in 0..n {
                    let jump = model.sigma(site, t, f);
                    let pop = model.sigma(site, f, f);
                    model.add_raw_term(jump.clone(), jump.dagger(), cr(2.0 * rate));
                    model.add_raw_term(pop.clone(), pop, cr(-2.0 * rate));
                }
            }
            Term::LindbladDephMls { dim, rate } => {
                let x = dim.left as usize;
                let y = dim.right as usize;
                for site in 0..n {
                    model.add_raw_term(model.sigma(site, y, y), model.sigma(site, x, x), cr(-rate));
                }
            }
            Term::LindbladMode { mode, rate } => {
                let j = doc.mode_index(mode).unwrap();
                model.add_dissipator(model.annihilator(j), *rate);
            }
            Term::LindbladModeThermal { mode, rate, mean_occ } => {
                let j = doc.mode_index(mode).unwrap();
                model.add_dissipator(model.annihilator(j), rate * (mean_occ + 1.0));
                model.add_dissipator(model.annihilator(j).dagger(), rate * mean_occ);
            }
            Term::Nonconnecting { dim, coeff } => {
                let x = dim.left as usize;
                let y = dim.right as usize;
                for site in 0..n {
                    model.add_raw_term(model.sigma(site, y, y), model.sigma(site, x, x), *coeff);
                }
            }
            Term::Connecting { inc, dec, coeff } => {
                let (a, b) = (inc.left as usize, inc.right as usize);
                let (c, d) = (dec.left as usize, dec.right as usize);
                for site in 0..n {
                    model.add_raw_term(model.sigma(site, d, b), model.sigma(site, a, c), *coeff);
                }
            }
            Term::ModeElementary { kind, mode, coeff } => {
                let j = doc.mode_index(mode).unwrap();
                let b = model.annihilator(j);
                let id = SparseMat::identity(model.dim());
                let (left, right) = match kind {
                    ModeOp::BL => (b, id),
                    ModeOp::BR => (id, b),
                    ModeOp::BdL => (b.dagger(), id),
                    ModeOp::BdR => (id, b.dagger()),
                    ModeOp::BdBL => (model.number_op(j), id),
                    ModeOp::BdBR => (id, model.number_op(j)),
                    ModeOp::BBdL => (b.matmul(&b.dagger()), id),
                    ModeOp::BBdR => (id, b.matmul(&b.dagger())),
                    ModeOp::BLBdR => (b.clone(), b.dagger()),
                    ModeOp::BdLBR => (b.dagger(), b),
                };
                model.add_raw_term(left, right, *coeff);
            }
            Term::Product { coeff, factors } => {
                // one-sided factors commute across sides; lefts compose in
                // listed order, rights in reverse (the rightmost matrix in a
                // product acts on the state first)
                let mut left = SparseMat::identity(model.dim());
                let mut right = SparseMat::identity(model.dim());
                for f in factors {
                    let (op, side) = factor_matrix(&model, doc, f);
                    match side {
                        Side::Left => left = left.matmul(&op),
                        Side::Right => right = op.matmul(&right),
                    }
                }
                model.add_raw_term(left, right, *coeff);
            }
        }
    }
    Ok(model)
}

fn factor_matrix(model: &DenseModel, doc: &ModelDocument, f: &Factor) -> (SparseMat, Side) {
    match f {
        Factor::Collective { x, y, side } => (model.collective(*x as usize, *y as usize), *side),
        Factor::Mode { atom, side, mode } => {
            let j = doc.mode_index(mode).unwrap();
            let b = model.annihilator(j);
            let op = match atom {
                ModeAtom::B => b,
                ModeAtom::Bd => b.dagger(),
                ModeAtom::BdB => model.number_op(j),
                ModeAtom::BBd => b.matmul(&b.dagger()),
            };
            (op, *side)
        }
    }
}

/// Dense-side observable: a plain operator expectation or the g2 ratio.
pub enum DenseObservable {
    Linear(SparseMat),
    G2 { num: SparseMat, den: SparseMat },
}

impl DenseObservable {
    pub fn evaluate(&self, rho: &ndarray::Array2<C64>) -> Option<f64> {
        match self {
            DenseObservable::Linear(op) => Some(op.expectation(rho).re),
            DenseObservable::G2 { num, den } => {
                let d = den.expectation(rho).re;
                if d.abs() < 1e-300 {
                    None
                } else {
                    Some(num.expectation(rho).re / (d * d))
                }
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, DenseObservable::Linear(_))
    }
}

pub fn dense_observable(model: &DenseModel, doc: &ModelDocument, kind: &ObsKindDecl) -> DenseObservable {
    match kind {
        ObsKindDecl::MlsOccupation(dim) => {
            DenseObservable::Linear(model.collective(dim.left as usize, dim.left as usize))
        }
        ObsKindDecl::ModeOccupation(name) => {
            DenseObservable::Linear(model.number_op(doc.mode_index(name).unwrap()))
        }
        ObsKindDecl::G2Zero(name) => {
            let j = doc.mode_index(name).unwrap();
            let b = model.annihilator(j);
            let bd = b.dagger();
            let num = bd.matmul(&bd).matmul(&b).matmul(&b);
            DenseObservable::G2 { num, den: model.number_op(j) }
        }
    }
}

/// The document's initial state as a full density matrix, via reconstruction
/// from the symmetric coefficients on the unpruned basis.
pub fn dense_initial(
    doc: &ModelDocument,
    basis: &SymBasis,
    model: &DenseModel,
) -> Result<ndarray::Array2<C64>, RunError> {
    let dm = match &doc.initial {
        InitialDecl::Pure(q) => {
            let n_dims = doc.system.dims.len();
            let mi = crate::basis::MultiIndex {
                mls: q[..n_dims].to_vec(),
                modes: q[n_dims..].chunks(2).map(|c| (c[0], c[1])).collect(),
            };
            init_state(basis, &InitialState::Pure(mi))?
        }
        InitialDecl::Thermal(t) => init_state(basis, &InitialState::Thermal(*t))?,
    };
    Ok(model.reconstruct(basis, &dm)?)
}
