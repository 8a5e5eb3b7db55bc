//! Direct steady-state computation for the two-level laser: a single sparse
//! factorization against brute-force time integration.
//!
//! ```bash
//! cargo run --release --example steady_state
//! ```

use permlind::dynamics::{evolve, Method, SolverConfig};
use permlind::frontend::{build_run, builtin};
use permlind::steady::steady_state;

fn main() {
    let doc = builtin::document("ex2").unwrap();
    let run = build_run(&doc).unwrap();
    println!("two-level laser: {} states, {} nonzeros", run.report.basis_states, run.report.nnz);

    let (steady, stats) = steady_state(&run.basis, &run.liouvillian).unwrap();
    println!(
        "direct solve: residual {:.2e}, {} refinements, cost {:.1} matvec equivalents",
        stats.residual, stats.iterations, stats.matvec_equivalents
    );
    for (obs, label) in run.prop_files[0].observables.iter().zip(&run.prop_files[0].labels) {
        match obs.evaluate(&steady) {
            Some(v) => println!("  {label} = {v:.8}"),
            None => println!("  {label} undefined"),
        }
    }

    // the slow way: integrate until nothing moves
    let cfg = SolverConfig {
        method: Method::RkAdaptive32 {
            rtol: 1e-10,
            atol: 1e-12,
            dt_initial: 1e-2,
            dt_min: 1e-12,
            dt_max: 5.0,
        },
        t_end: 200.0,
        monitor_every: u32::MAX,
    };
    let (integrated, st) = evolve(&run.liouvillian, &run.initial, &cfg, |_, _| {}).unwrap();
    println!("adaptive integration to t = 200: {} rhs evaluations", st.rhs_evals);
    for (obs, label) in run.prop_files[0].observables.iter().zip(&run.prop_files[0].labels) {
        let a = obs.evaluate(&steady).unwrap();
        let b = obs.evaluate(&integrated).unwrap();
        println!("  {label}: direct {a:.8} vs integrated {b:.8} ({:.1e})", (a - b).abs());
    }
}
