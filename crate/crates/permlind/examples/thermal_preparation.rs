//! Thermal initial states: Boltzmann level populations with multinomial
//! multiplicities, truncated geometric photon statistics.
//!
//! ```bash
//! cargo run --example thermal_preparation
//! ```

use permlind::basis::{define_system, MlsDim, ModeSpec, SymBasis};
use permlind::dynamics::{
    distribution, thermal_state, trace_functional, DistributionKind, Temperature,
};

fn main() {
    let n = 5;
    let dims = vec![
        (MlsDim::new(1, 1), n + 1),
        (MlsDim::new(1, 0), n + 1),
        (MlsDim::new(0, 1), n + 1),
    ];
    let spec = define_system(n, 2, &dims, &[0.0, 1.0], &[ModeSpec { fock: 8, energy: 0.6 }]).unwrap();
    let basis = SymBasis::enumerate(&spec).unwrap();
    for t in [Temperature::Finite(0.4), Temperature::Finite(1.5), Temperature::Zero] {
        let dm = thermal_state(&basis, t).unwrap();
        let trace = trace_functional(&basis).dot(&dm).re;
        println!("temperature {t:?}: trace = {trace:.12}");
        let exc = distribution(&basis, &dm, &DistributionKind::MlsExcitation(MlsDim::new(1, 1))).unwrap();
        println!("  excited-spin count distribution:");
        for (k, p) in exc.iter().enumerate() {
            println!("    {k} excited: {p:.5}  {}", "#".repeat((p * 80.0) as usize));
        }
        let ph = distribution(&basis, &dm, &DistributionKind::ModeNumber(0)).unwrap();
        println!("  mean photon number: {:.5}", ph.iter().enumerate().map(|(m, p)| m as f64 * p).sum::<f64>());
    }
}
