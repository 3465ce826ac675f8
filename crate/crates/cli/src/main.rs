mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use rsdp_witness::format::MatrixFile;
use rsdp_witness::hermitian::trace_product;
use rsdp_witness::lfr::witness_structure;
use rsdp_witness::multipartite::{detect_multipartite, seesaw_min_product_n};
use rsdp_witness::sdp::SolverSettings;
use rsdp_witness::sprocedure::{
    detect_with_sprocedure, simple_multiplier, validate_multiplier, Multiplier,
    DEFAULT_MULTIPLIER_SAMPLES,
};
use rsdp_witness::witness::{
    detect_entanglement, ppt_check, DetectSettings, Verdict, VerdictKind, DETECT_EPS,
};
use rsdp_witness::Error;

use report::ReportFile;

const SEESAW_RESTARTS: usize = 20;
const SEESAW_ITERS: usize = 500;
/// A product-state value below this fails block positivity.
const SEESAW_FLOOR: f64 = -1e-7;
/// Slack on `Tr W = 1` for witnesses read from files, wide enough for
/// matrices printed to four decimals.
const VERIFY_TRACE_TOL: f64 = 1e-3;
const NEGATIVE_EIG_TOL: f64 = 1e-9;

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_MULTIPLIER: u8 = 4;
const EXIT_NOT_WITNESS: u8 = 5;

#[derive(Parser)]
#[command(name = "rsdp-witness", version, about = "Entanglement witnesses by semidefinite relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Theorem2,
    Sprocedure,
    Cuts,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a witness that detects the state.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "theorem2")]
        method: Method,
        /// Solver duality-gap tolerance.
        #[arg(long, default_value_t = SolverSettings::default().gap_tol)]
        tol: f64,
        #[arg(long, default_value_t = DETECT_EPS)]
        detect_eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples for checking a user-supplied multiplier.
        #[arg(long, default_value_t = DEFAULT_MULTIPLIER_SAMPLES)]
        samples: usize,
        /// Multiplier matrix file (sprocedure only); defaults to diag(-I, I).
        #[arg(long)]
        multiplier: Option<PathBuf>,
    },
    /// Positive-partial-transpose test.
    Ppt {
        #[arg(long)]
        input: PathBuf,
    },
    /// Check that a matrix is a witness and evaluate it on a state.
    Verify {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// See-saw restarts.
        #[arg(long, default_value_t = SEESAW_RESTARTS)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidMultiplier { .. } => EXIT_MULTIPLIER,
        Error::Solver { .. } | Error::IllPosed(_) => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

fn fmt_value(v: f64) -> String {
    if !v.is_finite() || v == 0.0 || v.abs() >= 1e-3 {
        format!("{}", (v * 1e6).round() / 1e6)
    } else {
        format!("{v:.3e}")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            input,
            output,
            method,
            tol,
            detect_eps,
            seed,
            samples,
            multiplier,
        } => {
            let settings = DetectSettings {
                solver: SolverSettings {
                    gap_tol: tol,
                    ..SolverSettings::default()
                },
                detect_eps,
            };
            cmd_solve(&input, output.as_deref(), method, &settings, seed, samples, multiplier.as_deref())
        }
        Command::Ppt { input } => cmd_ppt(&input),
        Command::Verify {
            witness,
            input,
            samples,
            seed,
        } => cmd_verify(&witness, &input, samples, seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn cmd_solve(
    input: &std::path::Path,
    output: Option<&std::path::Path>,
    method: Method,
    settings: &DetectSettings,
    seed: u64,
    samples: usize,
    multiplier: Option<&std::path::Path>,
) -> Result<u8, Error> {
    settings.solver.validate()?;
    let rho = MatrixFile::read(input)?.to_density()?;
    let start = Instant::now();
    let mut cuts = None;
    let mut multiplier_worst = None;
    let verdict: Verdict = match method {
        Method::Theorem2 => detect_entanglement(&rho, settings)?,
        Method::Cuts => {
            let out = detect_multipartite(&rho, settings)?;
            cuts = Some(out.cuts);
            out.verdict
        }
        Method::Sprocedure => {
            let (d_a, d_b) = rho.bipartite_dims()?;
            let structure = witness_structure(d_a, d_b);
            let p = match multiplier {
                Some(path) => Multiplier::from_matrix(&MatrixFile::read(path)?.to_operator()?)?,
                None => simple_multiplier(structure.size()),
            };
            if !p.is_simple() {
                multiplier_worst = Some(validate_multiplier(&p, &structure, samples, seed)?.worst);
            }
            detect_with_sprocedure(&rho, &p, settings, samples, seed)?
        }
    };
    let seesaw_value = match &verdict.witness {
        Some(w) => Some(
            seesaw_min_product_n(w.op(), w.dims(), SEESAW_RESTARTS, SEESAW_ITERS, seed)?.value,
        ),
        None => None,
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    let label = match verdict.kind {
        VerdictKind::Entangled => "ENTANGLED",
        VerdictKind::Inconclusive => "INCONCLUSIVE",
    };
    println!("{label} value={}", fmt_value(verdict.value));

    if let Some(path) = output {
        let report = ReportFile {
            method: verdict.method.clone(),
            verdict: verdict.kind,
            value: verdict.value.is_finite().then_some(verdict.value),
            detect_eps: settings.detect_eps,
            certificates: verdict.certificates.clone(),
            witness: verdict
                .witness
                .as_ref()
                .map(|w| MatrixFile::from_operator(w.op(), w.dims(), Some("witness"))),
            seesaw_value,
            multiplier_worst,
            cuts,
            seed,
            wall_time_s,
        };
        debug_assert!(report.is_consistent());
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(0)
}

fn cmd_ppt(input: &std::path::Path) -> Result<u8, Error> {
    let rho = MatrixFile::read(input)?.to_density()?;
    let res = ppt_check(&rho)?;
    if res.is_ppt {
        println!("PPT");
    } else {
        println!("NPT min_eig={}", fmt_value(res.min_pt_eigenvalue));
    }
    Ok(0)
}

fn cmd_verify(
    witness: &std::path::Path,
    input: &std::path::Path,
    restarts: usize,
    seed: u64,
) -> Result<u8, Error> {
    let wf = MatrixFile::read(witness)?;
    let w = wf.to_operator()?;
    let rho = MatrixFile::read(input)?.to_density()?;
    if wf.dims != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "witness dims {:?} differ from state dims {:?}",
            wf.dims,
            rho.dims()
        )));
    }
    let trace = w.trace();
    let min_eig = w.min_eigenvalue();
    let value = trace_product(&w, rho.op())?;
    let seesaw = if wf.dims.len() >= 2 {
        seesaw_min_product_n(&w, &wf.dims, restarts, SEESAW_ITERS, seed)?.value
    } else {
        min_eig
    };
    println!("trace={}", fmt_value(trace));
    println!("min_eig={}", fmt_value(min_eig));
    println!("value={}", fmt_value(value));
    println!("seesaw_min={}", fmt_value(seesaw));

    let mut failures = Vec::new();
    if (trace - 1.0).abs() > VERIFY_TRACE_TOL {
        failures.push("trace is not 1");
    }
    if min_eig >= -NEGATIVE_EIG_TOL {
        failures.push("no negative eigenvalue");
    }
    if seesaw < SEESAW_FLOOR {
        failures.push("negative on a product state");
    }
    if failures.is_empty() {
        println!("PASS");
        Ok(0)
    } else {
        println!("FAIL: {}", failures.join(", "));
        Ok(EXIT_NOT_WITNESS)
    }
}
