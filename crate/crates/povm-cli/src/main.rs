//! Command-line interface for commutative POVM analysis.
//!
//! Exit codes: 0 success or feasible; 1 well-posed negative verdict
//! (not commutative, no witness, no certificate); 2 input error
//! (unreadable, malformed, or invalid model, bad flags); 3 numerical
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use povm_core::io::{load_model, Model};
use povm_core::linalg::{dagger, fro_norm, identity};
use povm_core::presets::{diagonal_triple, misregistered_spin_half, spin_one_z};
use povm_core::tol::{SEP_MIN, TOL_GROUP};
use povm_core::{
    certify_equivalence, check_def11, check_def12, check_def13, corollary3_check, dilate, g_of_f,
    least_squares_combination, membership_a1_a2prime, sharp_reconstruction, Def13Branch,
    DiscretePOVM, Error, HermitianMatrix, PVMeasure, Result, UnsharpWitness,
};

#[derive(Parser)]
#[command(
    name = "povm",
    version,
    about = "Analyze commutative POVMs: sharp reconstructions, dilations, equivalence certificates, unsharpness witnesses"
)]
struct Cli {
    /// Eigenvalue grouping tolerance (overrides the POVM_TOL
    /// environment variable; default 1e-9).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Minimum pairwise separation for induced values (default 1e-6).
    #[arg(long, global = true)]
    sep: Option<f64>,

    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model file of any kind.
    Validate {
        /// Model file (schema "povm/1").
        file: PathBuf,
    },
    /// Check pairwise commutativity of a POVM.
    Commutes {
        /// POVM file.
        file: PathBuf,
    },
    /// Compute the sharp reconstruction of a commutative POVM.
    Reconstruct {
        /// POVM file.
        file: PathBuf,
    },
    /// Dilate a POVM to a sharp measurement on an extended space.
    Dilate {
        /// POVM file.
        file: PathBuf,
    },
    /// Build the equivalence certificate: an injective outcome
    /// function whose induced values separate the reconstruction.
    Equiv {
        /// POVM file.
        file: PathBuf,
    },
    /// Decide one of the three unsharpness relations between a sharp
    /// observable and a POVM.
    Unsharp {
        /// Which relation: 11 mixture, 12 combination, 13 function.
        #[arg(long, value_parser = ["11", "12", "13"])]
        def: String,
        /// Sharp observable file (kind "pv").
        #[arg(long)]
        sharp: PathBuf,
        /// POVM file.
        file: PathBuf,
    },
    /// Analyze a system-ancilla model file.
    Ancilla {
        /// Ancilla model file (kind "ancilla_model").
        file: PathBuf,
    },
    /// Run a built-in example end to end (no files needed).
    Demo {
        /// Which example.
        name: DemoName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    /// Two-outcome misregistered spin pair and its certificate.
    Example3,
    /// Three-outcome diagonal family and its reconstruction.
    Example4,
    /// Membership of sharp observables relative to a reconstruction.
    Example5,
    /// The three witness verdicts for the spin observable against the
    /// diagonal family.
    Grabowski,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match resolve_tol(cli.tol) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let sep = cli.sep.unwrap_or(SEP_MIN);
    if !(sep.is_finite() && sep > 0.0) {
        eprintln!("error: --sep must be a positive number");
        return ExitCode::from(2);
    }
    match run(cli.command, cli.json, tol, sep) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// --tol beats POVM_TOL beats the built-in default.
fn resolve_tol(flag: Option<f64>) -> std::result::Result<f64, String> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("POVM_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("POVM_TOL is not a number: `{s}`"))?,
            Err(_) => TOL_GROUP,
        },
    };
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err("tolerance must be a positive number".to_string())
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NumericalFailure { .. } => 3,
        // A non-commutative POVM has no reconstruction; that is a
        // well-posed mathematical "no", not an input defect.
        Error::CommutativityViolation { .. } => 1,
        _ => 2,
    }
}

fn load_povm(path: &Path) -> Result<DiscretePOVM> {
    match load_model(path)? {
        Model::Povm(p) => Ok(p),
        other => Err(Error::MalformedModel {
            detail: format!("expected kind `povm`, found `{}`", other.kind()),
        }),
    }
}

fn load_pv(path: &Path) -> Result<PVMeasure> {
    match load_model(path)? {
        Model::Sharp(p) => Ok(p),
        other => Err(Error::MalformedModel {
            detail: format!("expected kind `pv`, found `{}`", other.kind()),
        }),
    }
}

/// Rounds to twelve decimals for display, then trims: float noise far
/// below every tolerance in the crate disappears, exact fractions stay
/// short.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.12}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

fn fmt_tuple(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
    format!("({})", parts.join(", "))
}

fn fmt_pairs(pairs: &[(f64, f64)]) -> String {
    let parts: Vec<String> = pairs
        .iter()
        .map(|&(a, b)| format!("{} -> {}", fmt_num(a), fmt_num(b)))
        .collect();
    parts.join(", ")
}

fn emit(json_mode: bool, lines: &[String], value: &Value) {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = if json_mode {
        writeln!(out, "{value}")
    } else {
        lines.iter().try_for_each(|line| writeln!(out, "{line}"))
    };
    if let Err(e) = result {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            // Downstream closed the pipe (`povm ... | head`); there is
            // nothing left to say and nothing went wrong.
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(2);
    }
}

fn run(command: Command, json_mode: bool, tol: f64, sep: f64) -> Result<u8> {
    match command {
        Command::Validate { file } => {
            let model = load_model(&file)?;
            let (lines, value) = describe_model(&model);
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        Command::Commutes { file } => {
            let povm = load_povm(&file)?;
            let report = povm.is_commutative(tol);
            let mut lines = vec![format!("commutative: {}", report.commutative)];
            if let Some((i, j)) = report.worst_pair {
                lines.push(format!(
                    "worst pair: ({i}, {j}) with commutator norm {:.3e}",
                    report.worst_norm
                ));
            }
            let value = json!({
                "commutative": report.commutative,
                "worst_pair": report.worst_pair.map(|(i, j)| vec![i, j]),
                "worst_norm": report.worst_norm,
            });
            emit(json_mode, &lines, &value);
            Ok(if report.commutative { 0 } else { 1 })
        }
        Command::Reconstruct { file } => {
            let povm = load_povm(&file)?;
            let recon = sharp_reconstruction(&povm, tol)?;
            let images = g_of_f(recon.table.rows(), povm.outcomes())?;
            let mut lines = vec![
                format!("N={}", recon.num_values()),
                format!(
                    "labels: {{{}}}",
                    recon
                        .measure
                        .labels()
                        .iter()
                        .map(|&l| fmt_num(l))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ];
            let mut rows_json = Vec::new();
            for (j, row) in recon.table.rows().rows().into_iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
                lines.push(format!("row {}: {}", j + 1, cells.join(" ")));
                rows_json.push(row.to_vec());
            }
            lines.push(format!("G_f(identity) = {}", fmt_tuple(&images)));
            let value = json!({
                "num_values": recon.num_values(),
                "labels": recon.measure.labels(),
                "rows": rows_json,
                "g_identity": images,
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        Command::Dilate { file } => {
            let povm = load_povm(&file)?;
            let dilation = dilate(&povm)?;
            let v = dilation.isometry();
            let gram = dagger(v).dot(v);
            let gram_residual = fro_norm(&(&gram - &identity(povm.dim())));
            let mut compression_residual: f64 = 0.0;
            for (k, p) in dilation.extended().projections().iter().enumerate() {
                let back = dilation.compress(p)?;
                compression_residual =
                    compression_residual.max((&back - &povm.elements()[k]).fro_norm());
            }
            let lines = vec![
                format!("system dimension: {}", dilation.system_dim()),
                format!("extended dimension: {}", dilation.extended_dim()),
                format!("outcomes: {}", povm.len()),
                format!("isometry gram residual = {gram_residual:.3e}"),
                format!("max compression residual = {compression_residual:.3e}"),
            ];
            let value = json!({
                "system_dim": dilation.system_dim(),
                "extended_dim": dilation.extended_dim(),
                "outcomes": povm.len(),
                "gram_residual": gram_residual,
                "max_compression_residual": compression_residual,
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        Command::Equiv { file } => {
            let povm = load_povm(&file)?;
            let cert = certify_equivalence(&povm, tol, sep)?;
            let f_values: Vec<f64> = cert.f.values();
            let lines = vec![
                format!("f = {}", fmt_tuple(&f_values)),
                format!("G_f = {}", fmt_tuple(&cert.g_values)),
                format!("operator residual = {:.3e}", cert.operator_residual),
                format!("image gap = {}", fmt_num(cert.image_gap)),
                format!("perturbation steps = {}", cert.log.len()),
            ];
            let value = json!({
                "f": cert.f.pairs().iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
                "g_values": cert.g_values,
                "operator_residual": cert.operator_residual,
                "image_gap": cert.image_gap,
                "perturbation_steps": cert.log.len(),
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        Command::Unsharp { def, sharp, file } => {
            let b = load_pv(&sharp)?;
            let povm = load_povm(&file)?;
            run_unsharp(&def, &b, &povm, json_mode, tol, sep)
        }
        Command::Ancilla { file } => {
            let model = match load_model(&file)? {
                Model::Ancilla(m) => m,
                other => {
                    return Err(Error::MalformedModel {
                        detail: format!("expected kind `ancilla_model`, found `{}`", other.kind()),
                    })
                }
            };
            let report = corollary3_check(&model, tol, sep)?;
            let fallback_ok = report
                .fallback
                .as_ref()
                .map_or(false, |fb| fb.r_injective);
            let certified = report.equivalence.is_some() && (report.f_injective || fallback_ok);
            let mut lines = vec![
                format!(
                    "outcomes: {}",
                    report
                        .outcome_labels
                        .iter()
                        .map(|&v| fmt_num(v))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                format!("f: {}", fmt_pairs(report.f_map.pairs())),
                format!(
                    "f injective: {} (min gap {})",
                    report.f_injective,
                    fmt_num(report.min_f_gap)
                ),
            ];
            match &report.equivalence {
                Some(pairs) => lines.push(format!(
                    "reconstruction matches system observable: yes ({})",
                    fmt_pairs(pairs)
                )),
                None => lines.push("reconstruction matches system observable: no".to_string()),
            }
            if let Some(fb) = &report.fallback {
                lines.push(format!("fallback h: {}", fmt_pairs(fb.h.pairs())));
                lines.push(format!("fallback r: {}", fmt_pairs(fb.r_map.pairs())));
                lines.push(format!(
                    "fallback r injective: {} (min gap {})",
                    fb.r_injective,
                    fmt_num(fb.min_r_gap)
                ));
            }
            lines.push(format!("certified: {}", if certified { "yes" } else { "no" }));
            let value = json!({
                "outcome_labels": report.outcome_labels,
                "f": report.f_map.pairs().iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
                "f_injective": report.f_injective,
                "min_f_gap": report.min_f_gap,
                "equivalence": report.equivalence.as_ref().map(|pairs| {
                    pairs.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>()
                }),
                "fallback": report.fallback.as_ref().map(|fb| json!({
                    "h": fb.h.pairs().iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
                    "r": fb.r_map.pairs().iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
                    "r_injective": fb.r_injective,
                    "min_r_gap": fb.min_r_gap,
                })),
                "certified": certified,
            });
            emit(json_mode, &lines, &value);
            Ok(if certified { 0 } else { 1 })
        }
        Command::Demo { name } => run_demo(name, json_mode, tol, sep),
    }
}

fn describe_model(model: &Model) -> (Vec<String>, Value) {
    match model {
        Model::Povm(p) => (
            vec![format!(
                "valid povm: dimension {}, {} outcomes",
                p.dim(),
                p.len()
            )],
            json!({"valid": true, "kind": "povm", "dim": p.dim(), "outcomes": p.len()}),
        ),
        Model::Sharp(p) => (
            vec![format!(
                "valid pv: dimension {}, {} values",
                p.dim(),
                p.len()
            )],
            json!({"valid": true, "kind": "pv", "dim": p.dim(), "values": p.len()}),
        ),
        Model::Density(d) => (
            vec![format!("valid density: dimension {}", d.dim())],
            json!({"valid": true, "kind": "density", "dim": d.dim()}),
        ),
        Model::Ancilla(m) => (
            vec![format!(
                "valid ancilla_model: system dimension {}, ancilla dimension {}, {} x {} pointer values",
                m.system().dim(),
                m.ancilla().dim(),
                m.k_values().nrows(),
                m.k_values().ncols()
            )],
            json!({
                "valid": true,
                "kind": "ancilla_model",
                "system_dim": m.system().dim(),
                "ancilla_dim": m.ancilla().dim(),
                "pointer_rows": m.k_values().nrows(),
                "pointer_cols": m.k_values().ncols(),
            }),
        ),
    }
}

fn branch_name(branch: Def13Branch) -> &'static str {
    match branch {
        Def13Branch::ViaRefinement => "refinement",
        Def13Branch::ViaLinearCombination => "linear combination",
        Def13Branch::ViaSpanIntersection => "span intersection",
    }
}

fn run_unsharp(
    def: &str,
    b: &PVMeasure,
    povm: &DiscretePOVM,
    json_mode: bool,
    tol: f64,
    sep: f64,
) -> Result<u8> {
    match def {
        "11" => {
            if let Some(UnsharpWitness::Def11 {
                coefficients,
                residual,
            }) = check_def11(b, povm)?
            {
                let mut lines = vec!["def11: FEASIBLE".to_string()];
                let mut rows_json = Vec::new();
                for (l, row) in coefficients.rows().into_iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
                    lines.push(format!(
                        "row {}: {}",
                        fmt_num(b.labels()[l]),
                        cells.join(" ")
                    ));
                    rows_json.push(row.to_vec());
                }
                lines.push(format!("residual = {residual:.3e}"));
                let value = json!({
                    "def": "11",
                    "feasible": true,
                    "coefficients": rows_json,
                    "residual": residual,
                });
                emit(json_mode, &lines, &value);
                Ok(0)
            } else {
                emit(
                    json_mode,
                    &["def11: INFEASIBLE".to_string()],
                    &json!({"def": "11", "feasible": false}),
                );
                Ok(1)
            }
        }
        "12" => {
            if let Some(UnsharpWitness::Def12 { gamma, residual }) = check_def12(b, povm)? {
                let lines = vec![
                    "def12: FEASIBLE".to_string(),
                    format!("gamma = {}", fmt_tuple(&gamma)),
                    format!("residual = {residual:.3e}"),
                ];
                let value = json!({
                    "def": "12",
                    "feasible": true,
                    "gamma": gamma,
                    "residual": residual,
                });
                emit(json_mode, &lines, &value);
                Ok(0)
            } else {
                let (_, residual) = least_squares_combination(povm.elements(), &b.operator())?;
                emit(
                    json_mode,
                    &[format!(
                        "def12: INFEASIBLE (least-squares residual {residual:.3e})"
                    )],
                    &json!({"def": "12", "feasible": false, "least_squares_residual": residual}),
                );
                Ok(1)
            }
        }
        "13" => {
            let report = check_def13(b, povm, tol, sep)?;
            match report.witness {
                Some(UnsharpWitness::Def13 {
                    h,
                    gamma,
                    residual,
                    branch,
                }) => {
                    let lines = vec![
                        "def13: FEASIBLE".to_string(),
                        format!("branch: {}", branch_name(branch)),
                        format!("h: {}", fmt_pairs(h.pairs())),
                        format!("gamma = {}", fmt_tuple(&gamma)),
                        format!("residual = {residual:.3e}"),
                    ];
                    let value = json!({
                        "def": "13",
                        "feasible": true,
                        "branch": branch_name(branch),
                        "h": h.pairs().iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
                        "gamma": gamma,
                        "residual": residual,
                        "constant_h_excluded": report.constant_h_excluded,
                    });
                    emit(json_mode, &lines, &value);
                    Ok(0)
                }
                _ => {
                    emit(
                        json_mode,
                        &["def13: INFEASIBLE".to_string()],
                        &json!({
                            "def": "13",
                            "feasible": false,
                            "constant_h_excluded": report.constant_h_excluded,
                        }),
                    );
                    Ok(1)
                }
            }
        }
        _ => unreachable!("clap restricts --def to 11|12|13"),
    }
}

fn run_demo(name: DemoName, json_mode: bool, tol: f64, sep: f64) -> Result<u8> {
    match name {
        DemoName::Example3 => {
            let povm = misregistered_spin_half(0.1, 0.2)?;
            let commutes = povm.is_commutative(tol);
            let recon = sharp_reconstruction(&povm, tol)?;
            let cert = certify_equivalence(&povm, tol, sep)?;
            let dilation = dilate(&povm)?;
            let lines = vec![
                "two-outcome misregistered pair at eps = 0.1, delta = 0.2".to_string(),
                format!("commutative: {}", commutes.commutative),
                format!("N={}", recon.num_values()),
                format!(
                    "labels: {{{}}}",
                    recon
                        .measure
                        .labels()
                        .iter()
                        .map(|&l| fmt_num(l))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                format!("f = {}", fmt_tuple(&cert.f.values())),
                format!("G_f = {}", fmt_tuple(&cert.g_values)),
                format!("extended dimension: {}", dilation.extended_dim()),
            ];
            let value = json!({
                "demo": "example3",
                "commutative": commutes.commutative,
                "num_values": recon.num_values(),
                "f": cert.f.values(),
                "g_values": cert.g_values,
                "extended_dim": dilation.extended_dim(),
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        DemoName::Example4 => {
            let povm = diagonal_triple()?;
            let recon = sharp_reconstruction(&povm, tol)?;
            let images = g_of_f(recon.table.rows(), povm.outcomes())?;
            let mut lines = vec![
                "three-outcome diagonal family on a three-level system".to_string(),
                format!("N={}", recon.num_values()),
                format!(
                    "labels: {{{}}}",
                    recon
                        .measure
                        .labels()
                        .iter()
                        .map(|&l| fmt_num(l))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ];
            let mut rows_json = Vec::new();
            for (j, row) in recon.table.rows().rows().into_iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
                lines.push(format!("row {}: {}", j + 1, cells.join(" ")));
                rows_json.push(row.to_vec());
            }
            lines.push(format!("G_f(identity) = {}", fmt_tuple(&images)));
            let value = json!({
                "demo": "example4",
                "num_values": recon.num_values(),
                "labels": recon.measure.labels(),
                "rows": rows_json,
                "g_identity": images,
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        DemoName::Example5 => {
            let povm = diagonal_triple()?;
            let recon = sharp_reconstruction(&povm, tol)?;
            let own = membership_a1_a2prime(&recon.measure, &povm, tol)?;
            let fine = membership_a1_a2prime(&spin_one_z()?, &povm, tol)?;
            let relabeled = PVMeasure::from_hermitian(
                &HermitianMatrix::from_diagonal(&[1.8, 1.8, 2.25]),
                tol,
            )?;
            let remapped = membership_a1_a2prime(&relabeled, &povm, tol)?;
            let lines = vec![
                "membership relative to the reconstruction of the diagonal family".to_string(),
                format!(
                    "reconstruction itself: in_A1 = {}, in_A2' = {}",
                    own.in_a1, own.in_a2_prime
                ),
                format!(
                    "fine spin observable: in_A1 = {}, in_A2' = {}",
                    fine.in_a1, fine.in_a2_prime
                ),
                format!(
                    "relabeled reconstruction diag(1.8, 1.8, 2.25): in_A1 = {}, in_A2' = {}",
                    remapped.in_a1, remapped.in_a2_prime
                ),
            ];
            let value = json!({
                "demo": "example5",
                "reconstruction": {"in_a1": own.in_a1, "in_a2_prime": own.in_a2_prime},
                "fine_spin": {"in_a1": fine.in_a1, "in_a2_prime": fine.in_a2_prime},
                "relabeled": {"in_a1": remapped.in_a1, "in_a2_prime": remapped.in_a2_prime},
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
        DemoName::Grabowski => {
            let b = spin_one_z()?;
            let povm = diagonal_triple()?;
            let def11 = check_def11(&b, &povm)?.is_some();
            let def12 = check_def12(&b, &povm)?;
            let def13 = check_def13(&b, &povm, tol, sep)?;
            let mut lines = vec![
                "sharp spin observable against the three-outcome diagonal family".to_string(),
                format!("def11: {}", if def11 { "FEASIBLE" } else { "INFEASIBLE" }),
            ];
            let def12_residual = match &def12 {
                Some(_) => None,
                None => {
                    let (_, residual) =
                        least_squares_combination(povm.elements(), &b.operator())?;
                    Some(residual)
                }
            };
            match def12_residual {
                None => lines.push("def12: FEASIBLE".to_string()),
                Some(residual) => lines.push(format!(
                    "def12: INFEASIBLE (least-squares residual {residual:.3e})"
                )),
            }
            let def13_feasible = def13.witness.is_some();
            lines.push(format!(
                "def13: {}",
                if def13_feasible { "FEASIBLE" } else { "INFEASIBLE" }
            ));
            let branch = match &def13.witness {
                Some(UnsharpWitness::Def13 { branch, .. }) => Some(branch_name(*branch)),
                _ => None,
            };
            let value = json!({
                "demo": "grabowski",
                "def11_feasible": def11,
                "def12_feasible": def12.is_some(),
                "def12_least_squares_residual": def12_residual,
                "def13_feasible": def13_feasible,
                "def13_branch": branch,
            });
            emit(json_mode, &lines, &value);
            Ok(0)
        }
    }
}
