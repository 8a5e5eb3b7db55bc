//! Open Tavis-Cummings relaxation assembled directly through the library API:
//! N two-level systems exchange one excitation with a lossy cavity.
//!
//! ```bash
//! cargo run --example tavis_cummings
//! ```

use permlind::basis::{define_system, MlsDim, ModeSpec, MultiIndex, SymBasis};
use permlind::dynamics::{
    evolve, make_observable, pure_state, trace_functional, Method, ObservableKind, SolverConfig,
};
use permlind::liouville::{add_template, TemplateKind};
use permlind::sparse::SparseOperator;

fn main() {
    let n = 2;
    let (g, gamma, kappa) = (1.0, 0.1, 0.4);
    let dims = vec![
        (MlsDim::new(1, 1), n + 1),
        (MlsDim::new(1, 0), n + 1),
        (MlsDim::new(0, 1), n + 1),
    ];
    let spec = define_system(n, 2, &dims, &[0.0, 1.0], &[ModeSpec { fock: 4, energy: 1.0 }]).unwrap();
    let basis = SymBasis::enumerate(&spec).unwrap();

    let mut l = SparseOperator::new(basis.n_states());
    add_template(&basis, &mut l, TemplateKind::MlsModeRwa { x: 0, y: 1, mode: 0, g }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladRelaxMls { from: 1, to: 0, rate: gamma / 2.0 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: gamma / 2.0 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim: MlsDim::new(0, 1), rate: gamma / 2.0 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladMode { mode: 0, rate: kappa / 2.0 }).unwrap();
    l.freeze();
    println!("basis: {} states, Liouvillian: {} nonzeros", basis.n_states(), l.nnz());

    // one shared excitation, empty cavity
    let dm = pure_state(&basis, &MultiIndex { mls: vec![1, 0, 0], modes: vec![(0, 0)] }).unwrap();
    let j11 = make_observable(&basis, ObservableKind::MlsOccupation(MlsDim::new(1, 1))).unwrap();
    let occ = make_observable(&basis, ObservableKind::ModeOccupation(0)).unwrap();
    let trace = trace_functional(&basis);

    let cfg = SolverConfig { method: Method::Rk4Fixed { dt: 0.002 }, t_end: 10.0, monitor_every: 250 };
    println!("{:>6} {:>10} {:>10} {:>12}", "t", "<J_11>", "<b†b>", "trace-1");
    let (_final, stats) = evolve(&l, &dm, &cfg, |t, state| {
        println!(
            "{t:>6.2} {:>10.6} {:>10.6} {:>12.2e}",
            j11.evaluate(state).unwrap(),
            occ.evaluate(state).unwrap(),
            trace.dot(state).re - 1.0,
        );
    })
    .unwrap();
    println!("({} steps, {} right-hand-side evaluations)", stats.accepted_steps, stats.rhs_evals);
}
