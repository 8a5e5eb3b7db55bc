//! Enumerate the permutation-symmetric basis and compare its size with the
//! full tensor-product description.
//!
//! ```bash
//! cargo run --example basis_counting
//! ```

use permlind::basis::{define_system, dimension_count, MlsDim, SymBasis};

fn main() {
    // two two-level systems, all three explicit dimensions n11, n10, n01
    let dims = vec![
        (MlsDim::new(1, 1), 3),
        (MlsDim::new(1, 0), 3),
        (MlsDim::new(0, 1), 3),
    ];
    let spec = define_system(2, 2, &dims, &[0.0, 1.0], &[]).unwrap();
    let basis = SymBasis::enumerate(&spec).unwrap();
    println!("symmetric basis states for N = 2 two-level systems:");
    for (i, s) in basis.states().enumerate() {
        let n00 = basis.implicit_n00(s);
        let kind = if basis.is_density_element(s) { "density" } else { "coherence" };
        println!(
            "  {i:2}  [n11={} n10={} n01={} | n00={n00}]  {kind}",
            s[0], s[1], s[2]
        );
    }
    println!("total: {} states (full approach: 4^2 = 16)\n", basis.n_states());

    println!("scaling with N (two-level, m = 4 effective dimensions):");
    println!("  {:>3} {:>16} {:>12}", "N", "full 4^N", "symmetric");
    for n in [1u64, 2, 5, 10, 15, 20] {
        let full = 4u128.pow(n as u32);
        let sym = dimension_count(n, 4).unwrap();
        println!("  {n:>3} {full:>16} {sym:>12}");
    }
}
