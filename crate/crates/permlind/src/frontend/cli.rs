//! Command-line driver: `run`, `examples`, `dims`, `verify`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use super::builtin;
use super::dense::{dense_initial, dense_model, dense_observable, DenseObservable};
use super::writer::{DistWriter, PropWriter};
use super::{build_run, parse_model, ModelDocument, Run, RunError, SolveMode};
use crate::basis::{binomial, SymBasis};
use crate::dynamics::{distribution, evolve, Method, SolverConfig};
use crate::steady::steady_state;

#[derive(Parser)]
#[command(name = "permlind", version, about = "Permutation-symmetric Lindblad master equations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone, Default)]
struct RunFlags {
    /// Monitor every n-th accepted step
    #[arg(long)]
    monitor_every: Option<u32>,
    /// Directory for output files
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the fixed step (switches the solve to fixed-step RK4)
    #[arg(long)]
    dt: Option<f64>,
    /// Override the end time
    #[arg(long)]
    t_end: Option<f64>,
    /// Solve for the steady state instead of integrating
    #[arg(long)]
    steady: bool,
    /// Prune states unreachable from the initial support
    #[arg(long)]
    prune: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a model file, assemble, solve and write output files
    Run {
        model: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run one of the built-in example models
    Examples {
        /// ex1 | ex2 | ex3a | ex3b | ex4
        name: String,
        #[command(flatten)]
        flags: RunFlags,
        /// Print the model text instead of running it
        #[arg(long)]
        print: bool,
    },
    /// Print full vs symmetric basis-size scaling
    Dims {
        /// Restrict to two- or three-level systems
        #[arg(long)]
        levels: Option<u8>,
        #[arg(long, default_value_t = 20)]
        max_n: u32,
    },
    /// Compare a built-in example against the dense reference model
    Verify {
        /// ex1 | ex2 | ex3a | ex3b | ex4
        name: String,
        /// System count for the comparison (kept small by the reference cap)
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version output
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.cmd {
        Cmd::Run { model, flags } => run_model_file(&model, &flags),
        Cmd::Examples { name, flags, print } => {
            if print {
                match builtin::text(&name) {
                    Some(text) => {
                        print!("{text}");
                        Ok(())
                    }
                    None => Err(RunError::Invalid(format!("unknown example '{name}'"))),
                }
            } else {
                run_example(&name, &flags)
            }
        }
        Cmd::Dims { levels, max_n } => dims_table(levels, max_n).map(|t| print!("{t}")),
        Cmd::Verify { name, n, dt, t_end } => verify(&name, n, dt, t_end).and_then(|report| {
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                Err(RunError::Invalid(format!(
                    "reduced and reference runs deviate by {:.3e}",
                    report.worst()
                )))
            }
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_model_file(path: &Path, flags: &RunFlags) -> Result<(), RunError> {
    let text = std::fs::read_to_string(path)?;
    let mut doc = parse_model(&text)?;
    apply_flags(&mut doc, flags)?;
    execute(&doc, flags.out_dir.as_deref().unwrap_or(Path::new(".")))
}

fn run_example(name: &str, flags: &RunFlags) -> Result<(), RunError> {
    let mut doc = builtin::document(name)?;
    apply_flags(&mut doc, flags)?;
    execute(&doc, flags.out_dir.as_deref().unwrap_or(Path::new(".")))
}

fn apply_flags(doc: &mut ModelDocument, flags: &RunFlags) -> Result<(), RunError> {
    if let Some(c) = flags.monitor_every {
        if c == 0 {
            return Err(RunError::Invalid("--monitor-every must be at least 1".into()));
        }
        doc.output.cadence = c;
    }
    if flags.prune {
        doc.solve.prune = true;
    }
    if flags.steady {
        doc.solve.mode = SolveMode::Steady;
        if flags.dt.is_some() || flags.t_end.is_some() {
            return Err(RunError::Invalid("choose one solve mode: --steady conflicts with --dt/--t-end".into()));
        }
        return Ok(());
    }
    let current_t_end = match &doc.solve.mode {
        SolveMode::Rk4 { t_end, .. } | SolveMode::Adaptive { t_end, .. } => Some(*t_end),
        SolveMode::Steady => None,
    };
    match (flags.dt, flags.t_end) {
        (None, None) => {}
        (dt, t_end) => {
            let t_end = t_end
                .or(current_t_end)
                .ok_or_else(|| RunError::Invalid("--t-end required to turn a steady model into a timed run".into()))?;
            match (&doc.solve.mode, dt) {
                (SolveMode::Adaptive { rtol, atol, dt_initial, dt_min, dt_max, .. }, None) => {
                    doc.solve.mode = SolveMode::Adaptive {
                        rtol: *rtol,
                        atol: *atol,
                        dt_initial: *dt_initial,
                        dt_min: *dt_min,
                        dt_max: *dt_max,
                        t_end,
                    };
                }
                (SolveMode::Rk4 { dt: old_dt, .. }, None) => {
                    doc.solve.mode = SolveMode::Rk4 { dt: *old_dt, t_end };
                }
                (SolveMode::Steady, None) => {
                    return Err(RunError::Invalid("--dt required to turn a steady model into a timed run".into()));
                }
                (_, Some(dt)) => {
                    doc.solve.mode = SolveMode::Rk4 { dt, t_end };
                }
            }
        }
    }
    Ok(())
}

fn method_of(mode: &SolveMode) -> Option<Method> {
    match mode {
        SolveMode::Rk4 { dt, .. } => Some(Method::Rk4Fixed { dt: *dt }),
        SolveMode::Adaptive { rtol, atol, dt_initial, dt_min, dt_max, .. } => Some(Method::RkAdaptive32 {
            rtol: *rtol,
            atol: *atol,
            dt_initial: *dt_initial,
            dt_min: *dt_min,
            dt_max: *dt_max,
        }),
        SolveMode::Steady => None,
    }
}

fn print_report(run: &Run) {
    println!("basis states: {}", run.report.basis_states);
    if let Some(full) = run.report.unpruned_states {
        println!("pruned from: {full}");
    }
    println!("liouvillian nonzeros: {}", run.report.nnz);
    println!("dropped arrows: {}", run.report.dropped_arrows);
}

/// Run a document end to end, writing all declared output files into `dir`.
pub fn execute(doc: &ModelDocument, dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(dir)?;
    let t_build = Instant::now();
    let run = build_run(doc)?;
    let build_seconds = t_build.elapsed().as_secs_f64();
    if !run.initial_physical {
        eprintln!(
            "warning: initial state is not a physical population (nonzero polarization or mode ket != bra)"
        );
    }
    print_report(&run);

    let mut prop_writers = Vec::new();
    for f in &run.prop_files {
        prop_writers.push(PropWriter::create(dir, &f.name, &f.labels, doc)?);
    }
    let mut dist_writers = Vec::new();
    for d in &run.dist_files {
        dist_writers.push(DistWriter::create(dir, &d.name, doc)?);
    }

    let t_solve = Instant::now();
    let solve_result: Result<String, RunError> = match method_of(&run.solve.mode) {
        Some(method) => {
            let t_end = match &run.solve.mode {
                SolveMode::Rk4 { t_end, .. } | SolveMode::Adaptive { t_end, .. } => *t_end,
                SolveMode::Steady => unreachable!(),
            };
            let cfg = SolverConfig { method, t_end, monitor_every: run.cadence };
            let mut io_error: Option<std::io::Error> = None;
            let out = evolve(&run.liouvillian, &run.initial, &cfg, |t, state| {
                if io_error.is_some() {
                    return;
                }
                for (bound, writer) in run.prop_files.iter().zip(prop_writers.iter_mut()) {
                    let vals: Vec<Option<f64>> =
                        bound.observables.iter().map(|o| o.evaluate(state)).collect();
                    if let Err(e) = writer.write_row(t, &vals) {
                        io_error = Some(e);
                        return;
                    }
                }
                for (bound, writer) in run.dist_files.iter().zip(dist_writers.iter_mut()) {
                    match distribution(&run.basis, state, &bound.kind) {
                        Ok(d) => {
                            if let Err(e) = writer.write_block(t, &d) {
                                io_error = Some(e);
                                return;
                            }
                        }
                        Err(_) => unreachable!("distribution kinds validated at build"),
                    }
                }
            });
            match (out, io_error) {
                (Err(e), _) => Err(e.into()),
                (Ok(_), Some(e)) => Err(e.into()),
                (Ok((_, stats)), None) => Ok(format!(
                    "solve: {} steps accepted, {} rejected, {} rhs evaluations",
                    stats.accepted_steps, stats.rejected_steps, stats.rhs_evals
                )),
            }
        }
        None => (|| {
            let (state, stats) = steady_state(&run.basis, &run.liouvillian)?;
            for (bound, writer) in run.prop_files.iter().zip(prop_writers.iter_mut()) {
                let vals: Vec<Option<f64>> =
                    bound.observables.iter().map(|o| o.evaluate(&state)).collect();
                writer.write_row(0.0, &vals)?;
            }
            for (bound, writer) in run.dist_files.iter().zip(dist_writers.iter_mut()) {
                let d = distribution(&run.basis, &state, &bound.kind)?;
                writer.write_block(0.0, &d)?;
            }
            Ok(format!(
                "steady state: relative residual {:.3e}, {} refinement solves, {:.1} matvec equivalents",
                stats.residual, stats.iterations, stats.matvec_equivalents
            ))
        })(),
    };
    let solve_seconds = t_solve.elapsed().as_secs_f64();

    match solve_result {
        Ok(line) => {
            println!("{line}");
            let mut written: Vec<String> = Vec::new();
            for w in prop_writers {
                written.push(w.path.display().to_string());
                w.finish()?;
            }
            for w in dist_writers {
                written.push(w.path.display().to_string());
                w.finish()?;
            }
            println!("phase seconds: build={build_seconds:.3} solve={solve_seconds:.3}");
            if !written.is_empty() {
                println!("wrote: {}", written.join(" "));
            }
            Ok(())
        }
        Err(e) => {
            let reason = e.to_string();
            for w in &mut prop_writers {
                w.abort(&reason);
            }
            for w in &mut dist_writers {
                w.abort(&reason);
            }
            Err(e)
        }
    }
}

/// Full (exponential) versus symmetric (polynomial) state counts.
pub fn dims_table(levels: Option<u8>, max_n: u32) -> Result<String, RunError> {
    if let Some(l) = levels {
        if !(l == 2 || l == 3) {
            return Err(RunError::Invalid("--levels must be 2 or 3".into()));
        }
    }
    let mut out = String::new();
    let header = match levels {
        Some(2) => "# N full_2lvl sym_2lvl",
        Some(3) => "# N full_3lvl sym_3lvl laser_3lvl",
        _ => "# N full_2lvl sym_2lvl full_3lvl sym_3lvl laser_3lvl",
    };
    out.push_str(header);
    out.push('\n');
    for n in 1..=max_n {
        let full2 = 4u128
            .checked_pow(n)
            .ok_or_else(|| RunError::Invalid("full two-level count overflows".into()))?;
        let full3 = 9u128
            .checked_pow(n)
            .ok_or_else(|| RunError::Invalid("full three-level count overflows".into()))?;
        let sym2 = binomial(n as u64 + 3, n as u64)
            .ok_or_else(|| RunError::Invalid("symmetric count overflows".into()))?;
        let sym3 = binomial(n as u64 + 8, n as u64)
            .ok_or_else(|| RunError::Invalid("symmetric count overflows".into()))?;
        let laser3 = binomial(n as u64 + 4, n as u64)
            .ok_or_else(|| RunError::Invalid("symmetric count overflows".into()))?;
        let row = match levels {
            Some(2) => format!("{n} {full2} {sym2}"),
            Some(3) => format!("{n} {full3} {sym3} {laser3}"),
            _ => format!("{n} {full2} {sym2} {full3} {sym3} {laser3}"),
        };
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Result of a reduced-versus-dense comparison.
pub struct VerifyReport {
    pub labels: Vec<String>,
    pub deviations: Vec<f64>,
    pub tolerance: f64,
    pub samples: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.deviations.iter().all(|d| *d < self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (label, dev) in self.labels.iter().zip(&self.deviations) {
            out.push_str(&format!("{label}: max deviation {dev:.3e}\n"));
        }
        out.push_str(&format!(
            "{} samples, tolerance {:.1e}: {}\n",
            self.samples,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

pub const VERIFY_TOLERANCE: f64 = 1e-8;

/// Run a built-in example on the reduced basis and on the dense reference
/// model at the same fixed step, and compare the occupation observables.
pub fn verify(name: &str, n: u32, dt: Option<f64>, t_end: Option<f64>) -> Result<VerifyReport, RunError> {
    let mut doc = builtin::document(name)?;
    doc.system.systems = n;
    for d in &mut doc.system.dims {
        d.cutoff = None; // untruncated at the new N
    }
    let (dt, t_end) = match (&doc.solve.mode, dt, t_end) {
        (SolveMode::Rk4 { dt: d0, t_end: t0 }, dt, t_end) => (dt.unwrap_or(*d0), t_end.unwrap_or(*t0)),
        (_, dt, t_end) => (dt.unwrap_or(0.005), t_end.unwrap_or(5.0)),
    };
    let steps = (t_end / dt).round().max(1.0) as usize;
    let t_end = steps as f64 * dt;
    doc.solve.mode = SolveMode::Rk4 { dt, t_end };
    doc.output.cadence = 1;

    // the reduced run (honoring a prune request in the document)
    let run = build_run(&doc)?;
    let linear_cols: Vec<(usize, usize, String)> = doc
        .output
        .files
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| {
            f.columns.iter().enumerate().filter_map(move |(ci, col)| {
                if matches!(col.kind, super::ObsKindDecl::G2Zero(_)) {
                    None
                } else {
                    Some((fi, ci, col.label.clone()))
                }
            })
        })
        .collect();
    let mut reduced_rows: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let cfg = SolverConfig {
        method: Method::Rk4Fixed { dt },
        t_end,
        monitor_every: 1,
    };
    evolve(&run.liouvillian, &run.initial, &cfg, |_t, state| {
        let row: Vec<f64> = linear_cols
            .iter()
            .map(|(fi, ci, _)| {
                run.prop_files[*fi].observables[*ci]
                    .evaluate(state)
                    .unwrap_or(f64::NAN)
            })
            .collect();
        reduced_rows.push(row);
    })?;

    // the dense reference run on the same grid
    let model = dense_model(&doc)?;
    let full_basis = SymBasis::enumerate(&super::system_spec(&doc.system)?)?;
    let rho0 = dense_initial(&doc, &full_basis, &model)?;
    let dense_obs: Vec<DenseObservable> = linear_cols
        .iter()
        .map(|(fi, ci, _)| dense_observable(&model, &doc, &doc.output.files[*fi].columns[*ci].kind))
        .collect();
    let mut dense_rows: Vec<Vec<f64>> = Vec::with_capacity(steps);
    model.evolve_rk4(&rho0, dt, steps, |_t, rho| {
        let row: Vec<f64> = dense_obs.iter().map(|o| o.evaluate(rho).unwrap_or(f64::NAN)).collect();
        dense_rows.push(row);
    });

    let deviations = crate::oracle::compare_trajectories(&reduced_rows, &dense_rows);
    Ok(VerifyReport {
        labels: linear_cols.into_iter().map(|(_, _, l)| l).collect(),
        deviations,
        tolerance: VERIFY_TOLERANCE,
        samples: steps,
    })
}
