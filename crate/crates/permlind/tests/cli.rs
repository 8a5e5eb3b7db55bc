//! The command-line surface: subcommands, flags, exit codes.

use permlind::frontend::cli::run_cli;

fn cli(args: &[&str]) -> i32 {
    run_cli(std::iter::once("permlind").chain(args.iter().copied()))
}

#[test]
fn dims_subcommand() {
    assert_eq!(cli(&["dims", "--max-n", "5"]), 0);
    assert_eq!(cli(&["dims", "--levels", "2", "--max-n", "3"]), 0);
    assert_eq!(cli(&["dims", "--levels", "7"]), 1);
}

#[test]
fn examples_subcommand_runs_and_prints() {
    assert_eq!(cli(&["examples", "ex1", "--print"]), 0);
    assert_eq!(cli(&["examples", "nonsense", "--print"]), 1);
    let dir = std::env::temp_dir().join(format!("permlind-cli-{}", std::process::id()));
    let dir_s = dir.to_str().unwrap();
    assert_eq!(
        cli(&["examples", "ex1", "--t-end", "0.5", "--out-dir", dir_s]),
        0
    );
    assert!(dir.join("observables.dat").exists());
    assert!(dir.join("mode_dist.dat").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_subcommand_with_overrides() {
    let dir = std::env::temp_dir().join(format!("permlind-cli-run-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("m.model");
    std::fs::write(&model, permlind::frontend::builtin::EX1).unwrap();
    let dir_s = dir.to_str().unwrap();
    let model_s = model.to_str().unwrap();
    // every row when monitoring each step
    assert_eq!(
        cli(&["run", model_s, "--t-end", "0.1", "--monitor-every", "1", "--out-dir", dir_s]),
        0
    );
    let text = std::fs::read_to_string(dir.join("observables.dat")).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 50, "one row per step at dt = 0.002, t_end = 0.1");
    // a missing file is a clean failure
    assert_eq!(cli(&["run", dir.join("absent.model").to_str().unwrap()]), 1);
    // conflicting overrides are rejected
    assert_eq!(cli(&["run", model_s, "--steady", "--dt", "0.1"]), 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_subcommand_exit_codes() {
    assert_eq!(cli(&["verify", "ex1", "--n", "1", "--t-end", "1.0"]), 0);
    assert_eq!(cli(&["verify", "nonsense"]), 1);
    // a reference model too large for the cap is a clean failure
    assert_eq!(cli(&["verify", "ex3a", "--n", "4"]), 1);
}

#[test]
fn steady_flag_runs_ex2() {
    let dir = std::env::temp_dir().join(format!("permlind-cli-steady-{}", std::process::id()));
    let dir_s = dir.to_str().unwrap();
    assert_eq!(cli(&["examples", "ex2", "--out-dir", dir_s]), 0);
    let text = std::fs::read_to_string(dir.join("observables.dat")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1, "steady solve writes a single row");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failed_runs_leave_an_abort_marker() {
    // a negative half-rate feeds exponential growth; RK4 at this step size
    // diverges and the run must mark its output files before exiting
    let text = "\
[system]
systems = 1
levels = 2
dim n11
dim n10
dim n01
energies = 0.0 1.0
mode cav fock=3 energy=1.0

[liouvillian]
lindblad_mode cav -80.0

[initial]
kind = pure
qnumbers = 0 0 0 2 2

[solve]
method = rk4
dt = 0.5
t_end = 400.0

[output]
cadence = 5
file obs.dat
observable <bdb> mode_occupation cav
";
    let dir = std::env::temp_dir().join(format!("permlind-cli-abort-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("diverge.model");
    std::fs::write(&model, text).unwrap();
    let code = cli(&["run", model.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(code, 1);
    let out = std::fs::read_to_string(dir.join("obs.dat")).unwrap();
    assert!(
        out.lines().any(|l| l.starts_with("# run aborted:")),
        "missing failure marker in:\n{out}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn g2_of_an_empty_mode_is_written_as_nan() {
    let text = "\
[system]
systems = 1
levels = 2
dim n11
dim n10
dim n01
energies = 0.0 1.0
mode cav fock=3 energy=1.0

[liouvillian]
lindblad_mode cav 0.1

[initial]
kind = thermal
temperature = zero

[solve]
method = rk4
dt = 0.01
t_end = 0.1

[output]
cadence = 5
file obs.dat
observable g2 g2_zero cav
";
    let dir = std::env::temp_dir().join(format!("permlind-cli-nan-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("vacuum.model");
    std::fs::write(&model, text).unwrap();
    assert_eq!(cli(&["run", model.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]), 0);
    let out = std::fs::read_to_string(dir.join("obs.dat")).unwrap();
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(!rows.is_empty());
    for row in rows {
        assert!(row.ends_with(" nan"), "expected nan sentinel, got '{row}'");
    }
    std::fs::remove_dir_all(&dir).ok();
}
