//! Polynomial scaling in practice: assemble and step the relaxation model
//! for growing ensemble sizes and report basis sizes and wall times.
//!
//! ```bash
//! cargo run --release --example scaling
//! ```

use std::time::Instant;

use permlind::basis::{define_system, MlsDim, ModeSpec, MultiIndex, SymBasis};
use permlind::dynamics::{evolve, pure_state, Method, SolverConfig};
use permlind::liouville::{add_template, TemplateKind};
use permlind::sparse::SparseOperator;

fn main() {
    println!(
        "{:>4} {:>10} {:>10} {:>12} {:>12}",
        "N", "states", "nonzeros", "assemble s", "100 steps s"
    );
    for n in [2u32, 5, 10, 20, 40] {
        let dims = vec![
            (MlsDim::new(1, 1), n + 1),
            (MlsDim::new(1, 0), n + 1),
            (MlsDim::new(0, 1), n + 1),
        ];
        let spec = define_system(n, 2, &dims, &[0.0, 1.0], &[ModeSpec { fock: 4, energy: 1.0 }]).unwrap();
        let t0 = Instant::now();
        let basis = SymBasis::enumerate(&spec).unwrap();
        let mut l = SparseOperator::new(basis.n_states());
        add_template(&basis, &mut l, TemplateKind::MlsModeRwa { x: 0, y: 1, mode: 0, g: 1.0 }).unwrap();
        add_template(&basis, &mut l, TemplateKind::LindbladRelaxMls { from: 1, to: 0, rate: 0.05 }).unwrap();
        add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.05 }).unwrap();
        add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim: MlsDim::new(0, 1), rate: 0.05 }).unwrap();
        add_template(&basis, &mut l, TemplateKind::LindbladMode { mode: 0, rate: 0.2 }).unwrap();
        l.freeze();
        let assemble = t0.elapsed().as_secs_f64();

        let mut q = vec![0u32; 3];
        q[0] = 1; // one excited system
        let dm = pure_state(&basis, &MultiIndex { mls: q, modes: vec![(0, 0)] }).unwrap();
        let dt = 0.002;
        let cfg = SolverConfig { method: Method::Rk4Fixed { dt }, t_end: 100.0 * dt, monitor_every: u32::MAX };
        let t1 = Instant::now();
        evolve(&l, &dm, &cfg, |_, _| {}).unwrap();
        let stepping = t1.elapsed().as_secs_f64();
        println!(
            "{n:>4} {:>10} {:>10} {assemble:>12.3} {stepping:>12.3}",
            basis.n_states(),
            l.nnz()
        );
    }
}
