//! Three-level lambda systems: cavity coupling on one leg, a coherent drive
//! on the other, all eight coherence dimensions tracked. Runs the bundled
//! model document and prints the level populations.
//!
//! ```bash
//! cargo run --example lambda_system
//! ```

use permlind::dynamics::{evolve, Method, SolverConfig};
use permlind::frontend::{build_run, builtin, SolveMode};

fn main() {
    let doc = builtin::document("ex3a").unwrap();
    println!("model:\n{}", permlind::frontend::print_model(&doc));
    let run = build_run(&doc).unwrap();
    println!("basis: {} states, nonzeros: {}", run.report.basis_states, run.report.nnz);
    let SolveMode::Rk4 { dt, t_end } = doc.solve.mode else { unreachable!() };
    let cfg = SolverConfig { method: Method::Rk4Fixed { dt }, t_end, monitor_every: 500 };
    println!("{:>6} {:>10} {:>10} {:>10}", "t", "<J_11>", "<J_22>", "<b†b>");
    evolve(&run.liouvillian, &run.initial, &cfg, |t, s| {
        let v: Vec<f64> = run.prop_files[0]
            .observables
            .iter()
            .map(|o| o.evaluate(s).unwrap())
            .collect();
        println!("{t:>6.2} {:>10.6} {:>10.6} {:>10.6}", v[0], v[1], v[2]);
    })
    .unwrap();
}
