//! Entrywise cross-validation of the symmetric-basis assembly against the
//! dense reference model.
//!
//! For every supported Liouvillian term, assembled alone, the reduced matrix
//! must equal the dense generator sandwiched through the Hilbert-Schmidt
//! projection: column s' of the reduced operator is the projection of
//! `L_dense(B_s'† / nu_s')`. This pins every coefficient, shift and sign of
//! the arrow calculus to textbook operator algebra.

use num_complex::Complex64 as C64;
use permlind::basis::{MlsDim, SymBasis};
use permlind::dynamics::DensityVector;
use permlind::frontend::{
    assemble_term, build_run, system_spec, DimDecl, InitialDecl, ModeAtom, ModeDecl,
    ModelDocument, OutputDecl, SolveDecl, SolveMode, SystemDecl, Term,
};
use permlind::frontend::dense::dense_model;
use permlind::liouville::{ModeOp, Side};
use permlind::sparse::SparseOperator;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn doc_with(system: SystemDecl, terms: Vec<Term>) -> ModelDocument {
    let n_q = system.dims.len() + 2 * system.modes.len();
    ModelDocument {
        system,
        terms,
        initial: InitialDecl::Pure(vec![0; n_q]),
        solve: SolveDecl { mode: SolveMode::Rk4 { dt: 0.01, t_end: 1.0 }, prune: false },
        output: OutputDecl::default(),
    }
}

fn tls_system(n: u32, fock: u32) -> SystemDecl {
    SystemDecl {
        systems: n,
        levels: 2,
        dims: vec![
            DimDecl { dim: MlsDim::new(1, 1), cutoff: None },
            DimDecl { dim: MlsDim::new(1, 0), cutoff: None },
            DimDecl { dim: MlsDim::new(0, 1), cutoff: None },
        ],
        energies: vec![0.0, 1.0],
        modes: vec![ModeDecl { name: "cav".into(), fock, energy: 1.0 }],
    }
}

fn three_level_system(n: u32) -> SystemDecl {
    let dims = [(2, 2), (2, 1), (2, 0), (1, 2), (1, 1), (1, 0), (0, 2), (0, 1)]
        .map(|(k, l)| DimDecl { dim: MlsDim::new(k, l), cutoff: None })
        .to_vec();
    SystemDecl {
        systems: n,
        levels: 3,
        dims,
        energies: vec![0.0, 1.0, 2.0],
        modes: vec![],
    }
}

fn laser_sketch_system(n: u32, fock: u32) -> SystemDecl {
    SystemDecl {
        systems: n,
        levels: 3,
        dims: vec![
            DimDecl { dim: MlsDim::new(2, 2), cutoff: None },
            DimDecl { dim: MlsDim::new(1, 1), cutoff: None },
            DimDecl { dim: MlsDim::new(1, 0), cutoff: None },
            DimDecl { dim: MlsDim::new(0, 1), cutoff: None },
        ],
        energies: vec![0.0, 1.0, 2.0],
        modes: vec![ModeDecl { name: "cav".into(), fock, energy: 1.0 }],
    }
}

/// Assemble one term on the reduced basis and compare it entrywise with the
/// projected dense generator.
fn assert_term_matches(system: SystemDecl, term: Term, tol: f64) {
    let doc = doc_with(system, vec![term.clone()]);
    let spec = system_spec(&doc.system).unwrap();
    let basis = SymBasis::enumerate(&spec).unwrap();
    let mut reduced = SparseOperator::new(basis.n_states());
    assemble_term(&doc, &basis, &mut reduced, &term).unwrap();
    reduced.freeze();

    let model = dense_model(&doc).unwrap();
    let n = basis.n_states();
    let mut worst = 0.0f64;
    let mut unit = DensityVector::zeros(n);
    for col in 0..n {
        unit.set(col, c(1.0, 0.0));
        let rho_col = model.reconstruct(&basis, &unit).unwrap();
        unit.set(col, c(0.0, 0.0));
        let w = model.rhs(&rho_col);
        let projected = model.symmetrize_project(&basis, &w).unwrap();
        for row in 0..n {
            let dev = (projected.get(row) - reduced.get(row, col)).norm();
            if dev > worst {
                worst = dev;
            }
        }
    }
    assert!(worst <= tol, "{term:?}: entrywise deviation {worst:.3e} > {tol:e}");
}

#[test]
fn tls_templates_match_dense_generator() {
    let terms = vec![
        Term::MlsH0 { level: 1, freq: 0.7 },
        Term::ModeH0 { mode: "cav".into(), freq: 1.3 },
        Term::MlsModeRwa { x: 0, y: 1, mode: "cav".into(), g: 0.9 },
        Term::MlsModeNonRwa { x: 0, y: 1, mode: "cav".into(), g: 0.4 },
        Term::MlsCohDrive { x: 1, y: 0, amp: 0.8 },
        Term::ModeCohDrive { mode: "cav".into(), amp: 0.6 },
        Term::LindbladRelaxMls { from: MlsDim::new(1, 1), to: MlsDim::new(0, 0), rate: 0.25 },
        Term::LindbladRelaxMls { from: MlsDim::new(0, 0), to: MlsDim::new(1, 1), rate: 0.15 },
        Term::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.2 },
        Term::LindbladDephMls { dim: MlsDim::new(0, 1), rate: 0.2 },
        Term::LindbladMode { mode: "cav".into(), rate: 0.35 },
        Term::LindbladModeThermal { mode: "cav".into(), rate: 0.35, mean_occ: 0.7 },
    ];
    for term in terms {
        assert_term_matches(tls_system(2, 3), term, 1e-12);
    }
}

#[test]
fn elementary_arrows_match_dense_generator() {
    let terms = vec![
        Term::Nonconnecting { dim: MlsDim::new(1, 1), coeff: c(0.3, -0.4) },
        Term::Nonconnecting { dim: MlsDim::new(1, 0), coeff: c(-0.2, 0.9) },
        Term::Nonconnecting { dim: MlsDim::new(0, 0), coeff: c(0.5, 0.1) },
        Term::Connecting { inc: MlsDim::new(1, 1), dec: MlsDim::new(0, 0), coeff: c(1.0, 0.5) },
        Term::Connecting { inc: MlsDim::new(0, 0), dec: MlsDim::new(1, 1), coeff: c(0.7, 0.0) },
        Term::Connecting { inc: MlsDim::new(1, 0), dec: MlsDim::new(0, 0), coeff: c(0.0, 1.0) },
        Term::Connecting { inc: MlsDim::new(1, 1), dec: MlsDim::new(0, 1), coeff: c(0.4, -0.1) },
        Term::Connecting { inc: MlsDim::new(1, 0), dec: MlsDim::new(0, 1), coeff: c(-0.3, 0.2) },
    ];
    for term in terms {
        assert_term_matches(tls_system(2, 2), term, 1e-12);
    }
}

#[test]
fn mode_elementary_ops_match_dense_generator() {
    for kind in [
        ModeOp::BL,
        ModeOp::BR,
        ModeOp::BdL,
        ModeOp::BdR,
        ModeOp::BdBL,
        ModeOp::BdBR,
        ModeOp::BBdL,
        ModeOp::BBdR,
        ModeOp::BLBdR,
        ModeOp::BdLBR,
    ] {
        let term = Term::ModeElementary { kind, mode: "cav".into(), coeff: c(0.8, -0.6) };
        assert_term_matches(tls_system(1, 4), term, 1e-12);
    }
}

#[test]
fn product_terms_match_dense_generator() {
    let terms = vec![
        // population-phonon coupling pieces
        Term::Product {
            coeff: c(0.0, 0.5),
            factors: vec![
                permlind::frontend::Factor::Collective { x: 1, y: 1, side: Side::Right },
                permlind::frontend::Factor::Mode { atom: ModeAtom::B, side: Side::Right, mode: "cav".into() },
            ],
        },
        Term::Product {
            coeff: c(0.0, -0.5),
            factors: vec![
                permlind::frontend::Factor::Collective { x: 1, y: 1, side: Side::Left },
                permlind::frontend::Factor::Mode { atom: ModeAtom::Bd, side: Side::Left, mode: "cav".into() },
            ],
        },
        // same-space composition: b†b†bb from the left
        Term::Product {
            coeff: c(1.0, 0.0),
            factors: vec![
                permlind::frontend::Factor::Mode { atom: ModeAtom::Bd, side: Side::Left, mode: "cav".into() },
                permlind::frontend::Factor::Mode { atom: ModeAtom::Bd, side: Side::Left, mode: "cav".into() },
                permlind::frontend::Factor::Mode { atom: ModeAtom::B, side: Side::Left, mode: "cav".into() },
                permlind::frontend::Factor::Mode { atom: ModeAtom::B, side: Side::Left, mode: "cav".into() },
            ],
        },
        // mixed-side, same-space: b† rho b via two one-sided factors
        Term::Product {
            coeff: c(0.3, 0.4),
            factors: vec![
                permlind::frontend::Factor::Mode { atom: ModeAtom::Bd, side: Side::Left, mode: "cav".into() },
                permlind::frontend::Factor::Mode { atom: ModeAtom::B, side: Side::Right, mode: "cav".into() },
            ],
        },
        // collective flip from the right times a ladder from the right
        Term::Product {
            coeff: c(0.0, 1.0),
            factors: vec![
                permlind::frontend::Factor::Collective { x: 0, y: 1, side: Side::Right },
                permlind::frontend::Factor::Mode { atom: ModeAtom::Bd, side: Side::Right, mode: "cav".into() },
            ],
        },
    ];
    for term in terms {
        assert_term_matches(tls_system(2, 3), term, 1e-12);
    }
}

#[test]
fn three_level_collective_sums_match_dense_generator() {
    let terms = vec![
        Term::MlsH0 { level: 2, freq: -0.4 },
        Term::MlsCohDrive { x: 2, y: 1, amp: 0.7 },
        Term::MlsCohDrive { x: 2, y: 0, amp: 0.3 },
        Term::LindbladRelaxMls { from: MlsDim::new(1, 1), to: MlsDim::new(2, 2), rate: 0.2 },
        Term::LindbladRelaxMls { from: MlsDim::new(2, 2), to: MlsDim::new(0, 0), rate: 0.4 },
        Term::LindbladDephMls { dim: MlsDim::new(2, 1), rate: 0.3 },
    ];
    for term in terms {
        assert_term_matches(three_level_system(2), term, 1e-12);
    }
}

#[test]
fn reduced_laser_sketch_matches_dense_generator() {
    // with the decoupled n2x dimensions absent, the projected dense generator
    // still agrees entrywise on the reduced basis for the laser's terms
    let terms = vec![
        Term::MlsModeRwa { x: 0, y: 1, mode: "cav".into(), g: 0.7 },
        Term::LindbladRelaxMls { from: MlsDim::new(0, 0), to: MlsDim::new(2, 2), rate: 0.4 },
        Term::LindbladRelaxMls { from: MlsDim::new(2, 2), to: MlsDim::new(1, 1), rate: 0.5 },
        Term::LindbladRelaxMls { from: MlsDim::new(1, 1), to: MlsDim::new(0, 0), rate: 0.05 },
        Term::LindbladDephMls { dim: MlsDim::new(1, 0), rate: 0.45 },
        Term::LindbladDephMls { dim: MlsDim::new(0, 1), rate: 0.45 },
        Term::LindbladMode { mode: "cav".into(), rate: 0.15 },
    ];
    for term in terms {
        assert_term_matches(laser_sketch_system(2, 3), term, 1e-12);
    }
}

#[test]
fn full_example_documents_match_dense_generator() {
    // whole Liouvillians, not just single terms
    for name in ["ex1", "ex3a", "ex4"] {
        let mut doc = permlind::frontend::builtin::document(name).unwrap();
        doc.system.systems = 2;
        for d in &mut doc.system.dims {
            d.cutoff = None;
        }
        if let Some(m) = doc.system.modes.first_mut() {
            m.fock = 3;
        }
        let run = build_run(&doc).unwrap();
        let spec = system_spec(&doc.system).unwrap();
        let basis = SymBasis::enumerate(&spec).unwrap();
        let model = dense_model(&doc).unwrap();
        let n = basis.n_states();
        let mut worst = 0.0f64;
        let mut unit = DensityVector::zeros(n);
        for col in 0..n {
            unit.set(col, c(1.0, 0.0));
            let rho_col = model.reconstruct(&basis, &unit).unwrap();
            unit.set(col, c(0.0, 0.0));
            let projected = model.symmetrize_project(&basis, &model.rhs(&rho_col)).unwrap();
            for row in 0..n {
                let dev = (projected.get(row) - run.liouvillian.get(row, col)).norm();
                worst = worst.max(dev);
            }
        }
        assert!(worst <= 1e-12, "{name}: full-document deviation {worst:.3e}");
    }
}
