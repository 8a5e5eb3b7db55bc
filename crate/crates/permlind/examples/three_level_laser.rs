//! Three-level laser on the reduced sketch: only n22, n11, n10, n01 are
//! declared, so the four decoupled coherence dimensions never exist and the
//! basis scales like N^4 instead of N^8.
//!
//! ```bash
//! cargo run --example three_level_laser
//! ```

use permlind::basis::{define_system, dimension_count, MlsDim, ModeSpec, SymBasis};
use permlind::dynamics::{
    distribution, evolve, make_observable, thermal_state, DistributionKind, Method,
    ObservableKind, SolverConfig, Temperature,
};
use permlind::liouville::{add_template, TemplateKind};
use permlind::sparse::SparseOperator;

fn main() {
    let n = 6;
    let fock = 6;
    let dims = vec![
        (MlsDim::new(2, 2), n + 1),
        (MlsDim::new(1, 1), n + 1),
        (MlsDim::new(1, 0), n + 1),
        (MlsDim::new(0, 1), n + 1),
    ];
    let spec = define_system(n, 3, &dims, &[0.0, 1.0, 2.0], &[ModeSpec { fock, energy: 1.0 }]).unwrap();
    let basis = SymBasis::enumerate(&spec).unwrap();
    println!(
        "reduced laser basis: {} states (all nine dimensions would give {})",
        basis.n_states(),
        dimension_count(n as u64, 9).unwrap() * (fock as u64).pow(2),
    );

    let mut l = SparseOperator::new(basis.n_states());
    // pump 0 -> 2, fast relaxation 2 -> 1, lasing transition 1 -> 0
    add_template(&basis, &mut l, TemplateKind::LindbladRelaxMls { from: 0, to: 2, rate: 0.4 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladRelaxMls { from: 2, to: 1, rate: 0.5 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladRelaxMls { from: 1, to: 0, rate: 0.05 }).unwrap();
    for dim in [MlsDim::new(1, 0), MlsDim::new(0, 1)] {
        // decay-induced dephasing from the pump and the spontaneous emission
        add_template(&basis, &mut l, TemplateKind::LindbladDephMls { dim, rate: 0.45 }).unwrap();
    }
    add_template(&basis, &mut l, TemplateKind::MlsModeRwa { x: 0, y: 1, mode: 0, g: 0.7 }).unwrap();
    add_template(&basis, &mut l, TemplateKind::LindbladMode { mode: 0, rate: 0.15 }).unwrap();
    l.freeze();

    let dm = thermal_state(&basis, Temperature::Zero).unwrap();
    let occ = make_observable(&basis, ObservableKind::ModeOccupation(0)).unwrap();
    let g2 = make_observable(&basis, ObservableKind::G2Zero(0)).unwrap();
    let cfg = SolverConfig { method: Method::Rk4Fixed { dt: 0.005 }, t_end: 40.0, monitor_every: 1000 };
    println!("{:>6} {:>10} {:>8}", "t", "<b†b>", "g2(0)");
    let (final_state, _) = evolve(&l, &dm, &cfg, |t, s| {
        let g2v = g2.evaluate(s).map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        println!("{t:>6.1} {:>10.5} {:>8}", occ.evaluate(s).unwrap(), g2v);
    })
    .unwrap();
    println!("photon-number distribution at t_end:");
    let dist = distribution(&basis, &final_state, &DistributionKind::ModeNumber(0)).unwrap();
    for (m, p) in dist.iter().enumerate() {
        println!("  |{m}>  {p:.5}  {}", "#".repeat((p * 120.0) as usize));
    }
}
