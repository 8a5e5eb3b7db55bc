//! Model-file grammar: golden documents, malformed inputs with positioned
//! errors, print/parse round trips, and output determinism.

mod common;

use permlind::frontend::cli::execute;
use permlind::frontend::{
    build_run, builtin, parse_model, print_model, InitialDecl, ModelDocument, SolveMode, Term,
};

fn golden_docs() -> Vec<(&'static str, ModelDocument)> {
    builtin::NAMES
        .iter()
        .map(|name| (*name, builtin::document(name).unwrap()))
        .collect()
}

#[test]
fn golden_files_parse_build_and_run() {
    for (name, mut doc) in golden_docs() {
        let run = build_run(&doc).expect(name);
        assert!(run.report.basis_states > 0);
        assert!(run.report.nnz > 0);
        if name == "ex1" {
            // 10 spin states times 4^2 mode pairs
            assert_eq!(run.report.basis_states, 160);
        }
        // a short timed run of each document (steady models switched to rk4)
        if matches!(doc.solve.mode, SolveMode::Steady) {
            doc.solve.mode = SolveMode::Rk4 { dt: 0.01, t_end: 0.3 };
        } else {
            match &mut doc.solve.mode {
                SolveMode::Rk4 { t_end, .. } | SolveMode::Adaptive { t_end, .. } => *t_end = 0.3,
                SolveMode::Steady => unreachable!(),
            }
        }
        let dir = std::env::temp_dir().join(format!("permlind-golden-{name}-{}", std::process::id()));
        execute(&doc, &dir).expect(name);
        std::fs::remove_dir_all(&dir).ok();
    }
}

#[test]
fn golden_files_round_trip() {
    for (name, doc) in golden_docs() {
        let printed = print_model(&doc);
        let reparsed = parse_model(&printed).expect(name);
        assert_eq!(doc, reparsed, "{name}: print/parse round trip changed the document");
    }
}

#[test]
fn minimal_document_parses_with_four_terms() {
    let text = "\
[system]
systems = 2
levels = 2
dim n11
dim n10
dim n01
energies = 0.0 1.0
mode cav fock=4 energy=1.0

[liouvillian]
mls_h0 1 0.0
mls_mode_rwa 0 1 cav 1.0
lindblad_relax_mls n11 n00 0.05
lindblad_mode cav 0.2

[initial]
kind = pure
qnumbers = 1 0 0 0 0

[solve]
method = rk4
dt = 0.002
t_end = 10.0
";
    let doc = parse_model(text).unwrap();
    assert_eq!(doc.terms.len(), 4);
    assert!(matches!(doc.terms[1], Term::MlsModeRwa { .. }));
    assert!(matches!(doc.initial, InitialDecl::Pure(_)));
    // no [output] section: defaults, no files
    assert!(doc.output.files.is_empty());
    assert_eq!(doc.output.cadence, 30);
    build_run(&doc).unwrap();
}

/// Every malformed input produces an error carrying the offending line.
#[test]
fn malformed_inputs_give_positioned_errors() {
    let cases = common::malformed_cases();
    assert!(cases.len() >= 20);
    for (i, (input, line, fragment)) in cases.iter().enumerate() {
        let err = parse_model(input).expect_err(&format!("case {i} should fail"));
        assert_eq!(err.line, *line, "case {i}: wrong line in '{err}'");
        assert!(
            err.to_string().contains(fragment),
            "case {i}: error '{err}' should mention '{fragment}'"
        );
        assert!(err.col >= 1);
    }
}

#[test]
fn term_order_is_immaterial() {
    let doc = builtin::document("ex1").unwrap();
    let mut reversed = doc.clone();
    reversed.terms.reverse();
    let a = build_run(&doc).unwrap();
    let b = build_run(&reversed).unwrap();
    assert_eq!(a.report.nnz, b.report.nnz);
    // bit-identical entries regardless of assembly order
    for ((r1, c1, v1), (r2, c2, v2)) in a.liouvillian.entries().zip(b.liouvillian.entries()) {
        assert_eq!((r1, c1), (r2, c2));
        assert_eq!(v1.re.to_bits(), v2.re.to_bits());
        assert_eq!(v1.im.to_bits(), v2.im.to_bits());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let mut doc = builtin::document("ex1").unwrap();
    doc.solve.mode = SolveMode::Rk4 { dt: 0.005, t_end: 1.0 };
    let base = std::env::temp_dir().join(format!("permlind-det-{}", std::process::id()));
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    execute(&doc, &dir_a).unwrap();
    execute(&doc, &dir_b).unwrap();
    for name in ["observables.dat", "mode_dist.dat"] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    std::fs::remove_dir_all(&base).ok();
}

#[test]
fn monitor_rows_and_headers() {
    let mut doc = builtin::document("ex1").unwrap();
    // 100 steps at cadence 30: rows at steps 30, 60, 90 and at t_end
    doc.solve.mode = SolveMode::Rk4 { dt: 0.01, t_end: 1.0 };
    let dir = std::env::temp_dir().join(format!("permlind-rows-{}", std::process::id()));
    execute(&doc, &dir).unwrap();
    let text = std::fs::read_to_string(dir.join("observables.dat")).unwrap();
    let header: Vec<&str> = text.lines().take(1).collect();
    assert!(header[0].starts_with("# time"));
    assert!(header[0].contains("<J_11>"), "user label missing from first header line");
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 100 / 30 + 1);
    // 17 significant digits in scientific notation
    let first = rows[0].split_whitespace().next().unwrap();
    assert!(first.contains('e'));
    // distribution files carry one `# t=` block per monitor event
    let dist = std::fs::read_to_string(dir.join("mode_dist.dat")).unwrap();
    let blocks = dist.lines().filter(|l| l.starts_with("# t=")).count();
    assert_eq!(blocks, rows.len());
    std::fs::remove_dir_all(&dir).ok();
}
