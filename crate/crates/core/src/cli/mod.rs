//! Command-line front end.
//!
//! Exit status: 0 when every check passed, 1 when a check failed, 2 for
//! unreadable or malformed input.

pub mod specs;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::channels::{apply, apply_schur, is_cptp, schur_channel, CPTP_TOL};
use crate::classical::{commutation_defect, verify_axioms, ClassicalStructure};
use crate::error::Error;
use crate::matrix::ComplexMatrix;
use crate::metrology::{
    family_qfi, family_qfi_finite_difference, scaling, scaling_experiment_with, Protocol, ScalingConfig,
    DEFAULT_CUTOFF, DEFAULT_STEP,
};
use crate::protocols::{
    check_channel_equivalence, check_operator_equivalence, ChannelProtocolSpec, OperatorProtocolSpec,
};
use specs::{named_basis, ChannelFile, MatrixJson, ProtocolFile, StateSpec};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qchan", version, about = "Classical structures, dephasing channels and protocol equivalence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Pass/fail tolerance; each command has its own default.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the five classical-structure identities for a basis.
    CheckAxioms {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        dim: Option<usize>,
        /// computational, fourier or random.
        #[arg(long)]
        basis: Option<String>,
    },
    /// Build a dephasing channel, check it is CPTP and compare its Kraus
    /// form with the Schur product.
    Channel {
        #[command(flatten)]
        common: CommonArgs,
        /// Qubit dephasing rate, used when no spec is given.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Compare the entangled and sequential protocols of a spec.
    Equivalence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Quantum Fisher information of one protocol.
    Qfi {
        #[command(flatten)]
        common: CommonArgs,
        /// ramsey, ghz_parallel or sequential.
        #[arg(long, default_value = "ghz_parallel")]
        protocol: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = crate::metrology::DEFAULT_PHI)]
        phi: f64,
    },
    /// QFI against probe number for all three protocols.
    Scaling {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        gammas: Vec<f64>,
        #[arg(long, default_value_t = crate::metrology::DEFAULT_PHI)]
        phi: f64,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::CheckAxioms { common, .. }
            | Command::Channel { common, .. }
            | Command::Equivalence { common, .. }
            | Command::Qfi { common, .. }
            | Command::Scaling { common, .. } => common,
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            Command::CheckAxioms { .. } | Command::Equivalence { .. } => 1e-10,
            Command::Channel { .. } | Command::Qfi { .. } => 1e-8,
            Command::Scaling { .. } => 1e-6,
        }
    }
}

/// A rendered report and whether its checks passed.
struct Outcome {
    json: Value,
    csv: String,
    passed: bool,
    summary: String,
}

enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TraceNotRestored { .. } => Failure::Check(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CmdResult = std::result::Result<Outcome, Failure>;

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let common = cli.command.common().clone();
    let tol = common.tol.unwrap_or_else(|| cli.command.default_tol());
    if !(tol > 0.0 && tol.is_finite()) {
        let _ = writeln!(err, "error: --tol must be a positive number, got {tol}");
        return EXIT_INPUT;
    }

    let result = match &cli.command {
        Command::CheckAxioms { dim, basis, .. } => check_axioms(&common, tol, *dim, basis.as_deref()),
        Command::Channel { gamma, phi, .. } => channel(&common, tol, *gamma, *phi),
        Command::Equivalence { dim, .. } => equivalence(&common, tol, *dim),
        Command::Qfi {
            protocol, n, gamma, phi, ..
        } => qfi(tol, protocol, *n, *gamma, *phi),
        Command::Scaling { n_max, gammas, phi, .. } => scaling_cmd(&common, tol, *n_max, gammas, *phi),
    };

    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INPUT;
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "check failed: {msg}");
            return EXIT_FAIL;
        }
    };

    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => outcome.csv,
    };
    let written = match &common.out {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| format!("cannot write report: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_INPUT;
    }
    if outcome.passed {
        EXIT_PASS
    } else {
        let _ = writeln!(err, "check failed: {}", outcome.summary);
        EXIT_FAIL
    }
}

fn read_spec<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("malformed spec {}: {e}", path.display())))
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    serde_json::to_value(MatrixJson::from(m)).expect("matrix serializes")
}

fn csv_pairs(pairs: &[(&str, String)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in pairs {
        writeln!(s, "{k},{v}").unwrap();
    }
    s
}

fn check_axioms(common: &CommonArgs, tol: f64, dim: Option<usize>, basis: Option<&str>) -> CmdResult {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct AxiomSpec {
        #[serde(default)]
        basis: Option<specs::BasisSpec>,
        #[serde(default)]
        dim: Option<usize>,
    }
    let (cs, label) = match &common.spec {
        Some(path) => {
            let spec: AxiomSpec = read_spec(path)?;
            let basis = spec.basis.unwrap_or(specs::BasisSpec::Named("computational".into()));
            let label = match &basis {
                specs::BasisSpec::Named(n) => n.clone(),
                specs::BasisSpec::Matrix(_) => "explicit".into(),
            };
            let d = spec
                .dim
                .or(dim)
                .or(match &basis {
                    specs::BasisSpec::Matrix(m) => Some(m.rows),
                    _ => None,
                })
                .unwrap_or(2);
            (basis.resolve(d, common.seed)?, label)
        }
        None => {
            let label = basis.unwrap_or("computational").to_string();
            (named_basis(&label, dim.unwrap_or(2), common.seed)?, label)
        }
    };
    let report = verify_axioms(&cs);
    let max_error = report.max_error();
    let passed = max_error <= tol;
    let errors: serde_json::Map<String, Value> = report.named().iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let mut csv = String::from("identity,error\n");
    for (k, v) in report.named() {
        writeln!(csv, "{k},{v:?}").unwrap();
    }
    Ok(Outcome {
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "check-axioms",
            "basis": label,
            "dim": cs.dim(),
            "tol": tol,
            "errors": errors,
            "max_error": max_error,
            "passed": passed,
        }),
        csv,
        passed,
        summary: format!("max identity error {max_error:e} exceeds {tol:e}"),
    })
}

fn channel(common: &CommonArgs, tol: f64, gamma: Option<f64>, phi: Option<f64>) -> CmdResult {
    let file = match &common.spec {
        Some(path) => {
            if gamma.is_some() || phi.is_some() {
                return Err(Failure::Input("--gamma/--phi cannot be combined with --spec".into()));
            }
            read_spec::<ChannelFile>(path)?
        }
        None => ChannelFile {
            basis: None,
            dim: None,
            channel: specs::ChannelSpec::QubitDephasing {
                gamma: gamma.unwrap_or(0.0),
                phi: phi.unwrap_or(0.0),
            },
            input_state: None,
        },
    };
    let d = file.dim(None);
    let cs: ClassicalStructure = match &file.basis {
        Some(b) => b.resolve(d, common.seed)?,
        None => named_basis("computational", d, common.seed)?,
    };
    let b = file.channel.correlation(&cs)?;
    let ch = schur_channel(&cs, &b)?;
    let cptp = is_cptp(&ch, tol.max(CPTP_TOL));
    let rho = file
        .input_state
        .clone()
        .unwrap_or(StateSpec::Named("plus".into()))
        .resolve(&cs)?;
    let via_kraus = apply(&ch, &rho)?;
    let via_schur = apply_schur(&cs, &b, &rho)?;
    let deviation = via_kraus.max_abs_diff(&via_schur);
    let pops_in = cs.to_basis_coords(&rho).diagonal();
    let pops_out = cs.to_basis_coords(&via_schur).diagonal();
    let population_deviation = pops_in
        .iter()
        .zip(&pops_out)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let passed = cptp.passed && deviation <= tol && population_deviation <= tol;
    let csv = csv_pairs(&[
        ("dim", d.to_string()),
        ("kraus_count", ch.kraus().len().to_string()),
        ("trace_defect", format!("{:?}", cptp.trace_defect)),
        ("min_choi_eigenvalue", format!("{:?}", cptp.min_choi_eigenvalue)),
        ("kraus_vs_schur_deviation", format!("{deviation:?}")),
        ("population_deviation", format!("{population_deviation:?}")),
        ("passed", passed.to_string()),
    ]);
    Ok(Outcome {
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "channel",
            "dim": d,
            "tol": tol,
            "correlation": matrix_value(b.matrix()),
            "kraus": ch.kraus().iter().map(matrix_value).collect::<Vec<_>>(),
            "cptp": cptp,
            "input_state": matrix_value(&rho),
            "output_state": matrix_value(&via_schur),
            "kraus_vs_schur_deviation": deviation,
            "population_deviation": population_deviation,
            "passed": passed,
        }),
        csv,
        passed,
        summary: format!(
            "cptp={} kraus/schur deviation {deviation:e}, population deviation {population_deviation:e}, tol {tol:e}",
            cptp.passed
        ),
    })
}

fn equivalence(common: &CommonArgs, tol: f64, dim: Option<usize>) -> CmdResult {
    let path = common
        .spec
        .as_ref()
        .ok_or_else(|| Failure::Input("equivalence needs --spec <path>".into()))?;
    let file: ProtocolFile = read_spec(path)?;
    let cs = file.structure(dim, common.seed)?;
    let (kind, n, report, extra) = match (&file.channels, &file.operators) {
        (Some(_), Some(_)) => return Err(Failure::Input("spec lists both channels and operators".into())),
        (None, None) => return Err(Failure::Input("spec lists neither channels nor operators".into())),
        (Some(channels), None) => {
            let channels = file.expand(channels)?;
            let n = channels.len();
            let correlations = channels.iter().map(|c| c.correlation(&cs)).collect::<crate::Result<Vec<_>>>()?;
            let input = file
                .input_state
                .clone()
                .unwrap_or(StateSpec::Named("plus".into()))
                .resolve(&cs)?;
            let perm = file.permutation.clone().unwrap_or_else(|| (0..n).collect());
            let spec = ChannelProtocolSpec::new(cs.clone(), correlations, perm, input)?;
            let report = check_channel_equivalence(&spec, tol)?;
            let trace = report.parallel_result.trace().re;
            ("channel", n, report, json!({ "output_trace": trace }))
        }
        (None, Some(ops)) => {
            if file.input_state.is_some() {
                return Err(Failure::Input("input_state only applies to channel protocols".into()));
            }
            let ops = file.expand(ops)?;
            let n = ops.len();
            let mats = ops.iter().map(|o| o.resolve(&cs)).collect::<crate::Result<Vec<_>>>()?;
            let defects = mats.iter().map(|m| commutation_defect(&cs, m)).collect::<crate::Result<Vec<_>>>()?;
            let perm = file.permutation.clone().unwrap_or_else(|| (0..n).collect());
            let spec = OperatorProtocolSpec::new_unchecked(cs.clone(), mats, perm)?;
            let report = check_operator_equivalence(&spec, tol)?;
            ("operator", n, report, json!({ "commutation_defects": defects }))
        }
    };
    let mut json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "equivalence",
        "kind": kind,
        "n": n,
        "dim": cs.dim(),
        "tol": tol,
        "max_abs_deviation": report.max_abs_deviation,
        "parallel_result": matrix_value(&report.parallel_result),
        "sequential_result": matrix_value(&report.sequential_result),
        "passed": report.passed,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        map.extend(more);
    }
    let csv = csv_pairs(&[
        ("kind", kind.to_string()),
        ("n", n.to_string()),
        ("dim", cs.dim().to_string()),
        ("max_abs_deviation", format!("{:?}", report.max_abs_deviation)),
        ("passed", report.passed.to_string()),
    ]);
    Ok(Outcome {
        json,
        csv,
        passed: report.passed,
        summary: format!("deviation {:e} exceeds {tol:e}", report.max_abs_deviation),
    })
}

fn closed_form(protocol: Protocol, n: usize, gamma: f64) -> f64 {
    let n = n as f64;
    match protocol {
        Protocol::Ramsey => n * (-2.0 * gamma).exp(),
        Protocol::GhzParallel | Protocol::Sequential => n * n * (-2.0 * n * gamma).exp(),
    }
}

fn qfi(tol: f64, protocol: &str, n: usize, gamma: f64, phi: f64) -> CmdResult {
    let protocol = Protocol::parse(protocol).ok_or_else(|| {
        Failure::Input(format!("unknown protocol '{protocol}' (expected ramsey, ghz_parallel or sequential)"))
    })?;
    let fam = protocol.family(n, gamma)?;
    let analytic = family_qfi(&fam, phi, DEFAULT_STEP, DEFAULT_CUTOFF)?;
    let fd = family_qfi_finite_difference(&fam, phi, DEFAULT_STEP, DEFAULT_CUTOFF)?;
    let expected = closed_form(protocol, n, gamma);
    let scale = expected.abs().max(1.0);
    let method_gap = (analytic.value - fd.value).abs();
    let closed_gap = (analytic.value - expected).abs();
    let passed = method_gap <= tol * scale && closed_gap <= tol * scale;
    let csv = csv_pairs(&[
        ("protocol", protocol.name().to_string()),
        ("n", n.to_string()),
        ("gamma", format!("{gamma:?}")),
        ("phi", format!("{phi:?}")),
        ("qfi", format!("{:?}", analytic.value)),
        ("qfi_finite_difference", format!("{:?}", fd.value)),
        ("closed_form", format!("{expected:?}")),
        ("trace_rho_sld", format!("{:?}", analytic.trace_rho_sld)),
        ("passed", passed.to_string()),
    ]);
    Ok(Outcome {
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "qfi",
            "protocol": protocol,
            "n": n,
            "gamma": gamma,
            "phi": phi,
            "tol": tol,
            "qfi": analytic.value,
            "method": analytic.method,
            "qfi_finite_difference": fd.value,
            "closed_form": expected,
            "delta_phi": if analytic.value > 0.0 { 1.0 / analytic.value.sqrt() } else { f64::INFINITY },
            "trace_rho_sld": analytic.trace_rho_sld,
            "residual": analytic.residual,
            "support_cutoff_used": analytic.support_cutoff_used,
            "passed": passed,
        }),
        csv,
        passed,
        summary: format!(
            "qfi {} vs finite difference {} vs closed form {expected}, tol {tol:e}",
            analytic.value, fd.value
        ),
    })
}

fn scaling_cmd(common: &CommonArgs, tol: f64, n_max: usize, gammas: &[f64], phi: f64) -> CmdResult {
    if common.spec.is_some() {
        return Err(Failure::Input("scaling takes no --spec".into()));
    }
    let mut config = ScalingConfig::new(n_max, gammas.to_vec(), common.seed);
    config.phi_eval = phi;
    let rows = scaling_experiment_with(&config)?;

    let lookup = |n: usize, p: Protocol, g: f64| {
        rows.iter()
            .find(|r| r.n == n && r.protocol == p && r.gamma == g)
            .map(|r| r.qfi)
            .expect("row present")
    };
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut max_gap = 0.0f64;
    let mut max_noiseless = 0.0f64;
    for r in rows.iter().filter(|r| r.protocol == Protocol::GhzParallel) {
        max_gap = max_gap.max(rel(r.qfi, lookup(r.n, Protocol::Sequential, r.gamma)));
        if r.gamma == 0.0 {
            let n = r.n as f64;
            max_noiseless = max_noiseless
                .max(rel(r.qfi, n * n))
                .max(rel(lookup(r.n, Protocol::Ramsey, 0.0), n));
        }
    }
    let passed = max_gap <= tol && max_noiseless <= tol;
    let mut gammas_sorted = config.gammas.clone();
    gammas_sorted.sort_by(f64::total_cmp);
    gammas_sorted.dedup();
    Ok(Outcome {
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "scaling",
            "metadata": {
                "seed": config.seed,
                "phi_eval": config.phi_eval,
                "h": config.h,
                "cutoff": config.cutoff,
                "n_max": n_max,
                "gammas": gammas_sorted,
            },
            "tol": tol,
            "rows": rows,
            "max_parallel_sequential_gap": max_gap,
            "max_noiseless_deviation": max_noiseless,
            "passed": passed,
        }),
        csv: scaling::rows_to_csv(&rows),
        passed,
        summary: format!("parallel/sequential gap {max_gap:e}, noiseless deviation {max_noiseless:e}, tol {tol:e}"),
    })
}
