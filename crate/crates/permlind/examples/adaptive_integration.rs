//! Fixed-step RK4 versus the embedded 3(2) adaptive integrator on the same
//! relaxation problem.
//!
//! ```bash
//! cargo run --example adaptive_integration
//! ```

use permlind::dynamics::{evolve, Method, SolverConfig};
use permlind::frontend::{build_run, builtin};

fn main() {
    let doc = builtin::document("ex1").unwrap();
    let run = build_run(&doc).unwrap();
    let t_end = 10.0;

    let fixed = SolverConfig { method: Method::Rk4Fixed { dt: 1e-3 }, t_end, monitor_every: u32::MAX };
    let (a, sa) = evolve(&run.liouvillian, &run.initial, &fixed, |_, _| {}).unwrap();

    let adaptive = SolverConfig {
        method: Method::RkAdaptive32 {
            rtol: 1e-8,
            atol: 1e-10,
            dt_initial: 1e-3,
            dt_min: 1e-12,
            dt_max: 1.0,
        },
        t_end,
        monitor_every: u32::MAX,
    };
    let (b, sb) = evolve(&run.liouvillian, &run.initial, &adaptive, |_, _| {}).unwrap();

    println!("fixed RK4:   {} steps, {} rhs evaluations", sa.accepted_steps, sa.rhs_evals);
    println!(
        "adaptive 3(2): {} accepted, {} rejected, {} rhs evaluations",
        sb.accepted_steps, sb.rejected_steps, sb.rhs_evals
    );
    for (bound, label) in run.prop_files.iter().zip(["observables"]) {
        println!("{label}:");
        for (obs, name) in bound.observables.iter().zip(&bound.labels) {
            let (x, y) = (obs.evaluate(&a), obs.evaluate(&b));
            match (x, y) {
                (Some(x), Some(y)) => {
                    println!("  {name}: fixed {x:.10}, adaptive {y:.10}, difference {:.2e}", (x - y).abs())
                }
                _ => println!("  {name}: undefined (zero denominator)"),
            }
        }
    }
}
