//! Building a Liouvillian that has no ready-made template: the phonon-laser
//! coupling g J_11 (b + b†), composed from one-sided collective and ladder
//! operators with sparse matrix products. Hamiltonian pieces acting from the
//! left of the density matrix carry the minus sign of the commutator.
//!
//! ```bash
//! cargo run --example custom_liouvillian
//! ```

use num_complex::Complex64 as C64;
use permlind::basis::{define_system, MlsDim, ModeSpec, SymBasis};
use permlind::dynamics::{evolve, make_observable, thermal_state, Method, ObservableKind, SolverConfig, Temperature};
use permlind::liouville::{add_template, collective_operator, mode_operator, ModeOp, Side, TemplateKind};
use permlind::sparse::SparseOperator;

fn main() {
    let n = 2;
    let (delta, w_ph, g, e_drive, gamma, kappa) = (-1.0, 1.0, 0.5, 0.3, 0.2, 0.1);
    let dims = vec![
        (MlsDim::new(1, 1), n + 1),
        (MlsDim::new(1, 0), n + 1),
        (MlsDim::new(0, 1), n + 1),
    ];
    let spec = define_system(n, 2, &dims, &[0.0, 1.0], &[ModeSpec { fock: 4, energy: w_ph }]).unwrap();
    let basis = SymBasis::enumerate(&spec).unwrap();
    let i = C64::new(0.0, 1.0);

    // one-sided elementary operators
    let j11_l = collective_operator(&basis, Side::Left, 1, 1).unwrap();
    let j11_r = collective_operator(&basis, Side::Right, 1, 1).unwrap();
    let b_l = mode_operator(&basis, 0, ModeOp::BL).unwrap();
    let b_r = mode_operator(&basis, 0, ModeOp::BR).unwrap();
    let bd_l = mode_operator(&basis, 0, ModeOp::BdL).unwrap();
    let bd_r = mode_operator(&basis, 0, ModeOp::BdR).unwrap();

    let mut l = SparseOperator::new(basis.n_states());
    // i g (rho J11 (b + b†) - J11 (b + b†) rho), assembled as matrix products
    l.axpy(i * g, &j11_r.product(&b_r).unwrap()).unwrap();
    l.axpy(i * g, &j11_r.product(&bd_r).unwrap()).unwrap();
    l.axpy(-i * g, &j11_l.product(&b_l).unwrap()).unwrap();
    l.axpy(-i * g, &j11_l.product(&bd_l).unwrap()).unwrap();
    // the rest uses ready-made templates
    add_template(&basis, &mut l, TemplateKind::MlsH0 { level: 1, freq: delta }).unwrap();
    add_template(&basis, &mut l, TemplateKind::ModeH0 { mode: 0, freq: w_ph }).unwrap();
    add_template(&basis, &mut l, TemplateKind::MlsCohDrive { x: 1, y: 0, amp: e_drive }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladRelaxMls { from: 1, to: 0, rate: gamma / 2.0 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: gamma / 2.0 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim: MlsDim::new(0, 1), rate: gamma / 2.0 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladMode { mode: 0, rate: kappa / 2.0 }).unwrap();
    l.freeze();
    println!("assembled {} nonzeros, {} dropped arrows", l.nnz(), l.dropped_arrows());

    let dm = thermal_state(&basis, Temperature::Zero).unwrap();
    let j11 = make_observable(&basis, ObservableKind::MlsOccupation(MlsDim::new(1, 1))).unwrap();
    let ph = make_observable(&basis, ObservableKind::ModeOccupation(0)).unwrap();
    let cfg = SolverConfig { method: Method::Rk4Fixed { dt: 0.002 }, t_end: 20.0, monitor_every: 1000 };
    println!("{:>6} {:>10} {:>10}", "t", "<J_11>", "<b†b>");
    evolve(&l, &dm, &cfg, |t, s| {
        println!("{t:>6.1} {:>10.6} {:>10.6}", j11.evaluate(s).unwrap(), ph.evaluate(s).unwrap());
    })
    .unwrap();
}
