//! The declarative model-file format: parse a document from text, inspect it,
//! run it, and print it back in canonical form.
//!
//! ```bash
//! cargo run --example model_files
//! ```

use permlind::frontend::cli::execute;
use permlind::frontend::{parse_model, print_model};

const MODEL: &str = "
# a driven, damped cavity with one spectator spin
[system]
systems = 1
levels = 2
dim n11
dim n10
dim n01
energies = 0.0 1.0
mode cav fock=10 energy=1.0

[liouvillian]
mode_coh_drive cav 0.2
lindblad_mode cav 0.5
lindblad_relax_mls n11 n00 0.25
lindblad_deph_mls n10 0.25
lindblad_deph_mls n01 0.25

[initial]
kind = thermal
temperature = zero

[solve]
method = adaptive
rtol = 1e-8
atol = 1e-10
t_end = 20.0

[output]
cadence = 10
file cavity.dat
observable <bdb> mode_occupation cav
observable g2 g2_zero cav
distribution photons.dat mode_number cav
";

fn main() {
    let doc = parse_model(MODEL).unwrap();
    println!(
        "parsed: {} systems, {} terms, {} output files",
        doc.system.systems,
        doc.terms.len(),
        doc.output.files.len()
    );
    let dir = std::env::temp_dir().join("permlind-model-files-example");
    execute(&doc, &dir).unwrap();
    let text = std::fs::read_to_string(dir.join("cavity.dat")).unwrap();
    let tail: Vec<&str> = text.lines().rev().take(3).collect();
    println!("last rows of cavity.dat:");
    for line in tail.iter().rev() {
        println!("  {line}");
    }
    println!("\ncanonical form:\n{}", print_model(&doc));
    std::fs::remove_dir_all(&dir).ok();
}
