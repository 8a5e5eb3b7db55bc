//! The exactness check behind `permlind verify`: run a model on the reduced
//! symmetric basis and on the full tensor-product space, same fixed step,
//! and compare the observables.
//!
//! ```bash
//! cargo run --example reference_check
//! ```

use permlind::frontend::cli::verify;

fn main() {
    for name in ["ex1", "ex3a", "ex4"] {
        println!("== {name}, N = 2 ==");
        let report = verify(name, 2, Some(0.005), Some(10.0)).unwrap();
        print!("{}", report.render());
    }
}
