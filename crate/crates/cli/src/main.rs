//! `qmoney`: analyze, certify, simulate and compose counterfeiting attacks on
//! quantum money schemes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmoney::certificates::{self, certify, Certificate, CertificateReport};
use qmoney::channels::ChoiOperator;
use qmoney::cloners::{
    buzek_hillery_cloner, measure_in_basis, passthrough_cloner, ticket_cloner, werner_cloner,
    wiesner_optimal_cloner, TicketStrategy,
};
use qmoney::composition::{
    r_norm_formula, repeated_value, threshold_conditions_hold, threshold_problem, threshold_value,
    verify_r_norm, DENSE_R_LIMIT,
};
use qmoney::io::{read_certificate, read_scheme, write_certificate, SchemeFile};
use qmoney::schemes::{
    build_q_classical, build_q_quantum, build_q_symmetric, fourier_ticket_scheme, quantum_problem,
    sic_qubit_ensemble, six_state_ensemble, two_basis_ensemble, wiesner_ensemble, Ensemble,
    TicketScheme,
};
use qmoney::sdp::{direct_sum_problem, solve, solve_block_diagonal, CloningSdp};
use qmoney::simulator::{
    simulate_bell_attack, simulate_honest_verification, simulate_quantum_attack,
    simulate_ticket_attack, TrialConfig,
};
use qmoney::{Error, HermitianOperator};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIMENSION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qmoney",
    version,
    about = "Optimal simple counterfeiting attacks on quantum money"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the cloning SDP of a scheme and report the optimal attack value.
    Analyze {
        /// Built-in name (wiesner, six-state, sic, symmetric:D, two-basis:D,
        /// ticket:D) or a scheme file.
        #[arg(long)]
        scheme: String,
        /// Number of parallel repetitions.
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = qmoney::sdp::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Write the analysis record as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the single-copy primal/dual pair as a certificate file.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Check a certificate file independently of the solver.
    Certify {
        file: PathBuf,
        /// Tolerance; defaults to the one stored in the file.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo simulation of an attack against the verifier.
    Simulate {
        #[arg(long, required_unless_present = "attack")]
        scheme: Option<String>,
        /// optimal, buzek-hillery, werner, passthrough, ticket-cloner,
        /// measure-0, measure-1 or honest.
        #[arg(long)]
        strategy: Option<String>,
        /// Special attacks that do not fit the scheme/strategy model.
        #[arg(long, value_enum, conflicts_with_all = ["scheme", "strategy"])]
        attack: Option<Attack>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Value of "at least t of n" verification and whether it is certified.
    Threshold {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also solve the composed SDP directly (small cases only).
        #[arg(long)]
        direct: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Attack {
    Bell,
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Io(_) | Error::InvalidArgument(_) => EXIT_USAGE,
            Error::Dimension(_) => EXIT_DIMENSION,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

/// Formats with ten significant digits.
fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..10).contains(&magnitude) {
        return format!("{x:.9e}");
    }
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("records serialize");
    std::fs::write(path, text).map_err(|e| Failure::from(Error::Io(e)))
}

enum Scheme {
    Quantum(Ensemble),
    Symmetric(usize),
    Ticket(TicketScheme),
}

fn parse_dim(name: &str, arg: &str) -> CliResult<usize> {
    match arg.parse::<usize>() {
        Ok(d) if d >= 2 => Ok(d),
        _ => Err(usage(format!(
            "`{name}` needs a dimension >= 2, got {arg:?}"
        ))),
    }
}

fn resolve_scheme(scheme_arg: &str) -> CliResult<Scheme> {
    let (name, arg) = match scheme_arg.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (scheme_arg, None),
    };
    let scheme = match (name, arg) {
        ("wiesner", None) => Scheme::Quantum(wiesner_ensemble()),
        ("six-state", None) => Scheme::Quantum(six_state_ensemble()),
        ("sic", None) => Scheme::Quantum(sic_qubit_ensemble()),
        ("symmetric", Some(a)) => Scheme::Symmetric(parse_dim(name, a)?),
        ("two-basis", Some(a)) => Scheme::Quantum(two_basis_ensemble(parse_dim(name, a)?)?),
        ("ticket", Some(a)) => Scheme::Ticket(fourier_ticket_scheme(parse_dim(name, a)?)?),
        _ if Path::new(scheme_arg).exists() => match read_scheme(scheme_arg)? {
            SchemeFile::Quantum(e) => Scheme::Quantum(e),
            SchemeFile::Ticket(t) => Scheme::Ticket(t),
        },
        _ => return Err(usage(format!("unknown scheme {scheme_arg:?}"))),
    };
    Ok(scheme)
}

#[derive(Serialize)]
struct CertificateSummary {
    certified: bool,
    tolerance: f64,
    primal_value: f64,
    dual_value: f64,
    gap: f64,
    primal_min_eigenvalue: f64,
    primal_trace_defect: f64,
    dual_min_eigenvalue: f64,
}

impl From<&CertificateReport> for CertificateSummary {
    fn from(r: &CertificateReport) -> Self {
        Self {
            certified: r.certified,
            tolerance: r.tolerance,
            primal_value: r.primal_value,
            dual_value: r.dual_value,
            gap: r.gap,
            primal_min_eigenvalue: r.primal.min_eigenvalue,
            primal_trace_defect: r.primal.trace_defect,
            dual_min_eigenvalue: r.dual.min_eigenvalue,
        }
    }
}

#[derive(Serialize)]
struct AnalysisRecord {
    scheme: String,
    n: u32,
    single_value: f64,
    value: f64,
    certificate: CertificateSummary,
    iterations: usize,
    gap: f64,
}

/// Single-copy solve: problem, primal, dual, solver iterations.
fn solve_single(
    scheme: &Scheme,
    tol: f64,
) -> CliResult<(CloningSdp, HermitianOperator, HermitianOperator, usize)> {
    match scheme {
        Scheme::Quantum(e) => {
            let p = quantum_problem(build_q_quantum(e), e.dim())?;
            let s = solve(&p, tol)?;
            Ok((p, s.primal_x, s.dual_y, s.iterations))
        }
        Scheme::Symmetric(d) => {
            let p = quantum_problem(build_q_symmetric(*d)?, *d)?;
            let s = solve(&p, tol)?;
            Ok((p, s.primal_x, s.dual_y, s.iterations))
        }
        Scheme::Ticket(t) => {
            let objective = build_q_classical(t);
            let problems = objective.problems()?;
            let weights = objective.weights();
            let blocks = solve_block_diagonal(&problems, &weights, tol)?;
            let (x, y) = blocks.assemble(&problems)?;
            let p = direct_sum_problem(&problems, &weights)?;
            let iterations = blocks.blocks.iter().map(|b| b.iterations).sum();
            Ok((p, x, y, iterations))
        }
    }
}

fn cmd_analyze(
    scheme_arg: &str,
    n: u32,
    tol: f64,
    output: Option<&Path>,
    certificate: Option<&Path>,
) -> CliResult<()> {
    let scheme = resolve_scheme(scheme_arg)?;
    let (p, x, y, iterations) = solve_single(&scheme, tol)?;
    let report = certify(&x, &y, &p, 10.0 * tol)?;
    let single_value = report.primal_value;
    let value = repeated_value(single_value.clamp(0.0, 1.0), n as usize)?;
    let record = AnalysisRecord {
        scheme: scheme_arg.to_string(),
        n,
        single_value,
        value,
        certificate: CertificateSummary::from(&report),
        iterations,
        gap: report.gap,
    };
    println!("scheme:        {scheme_arg}");
    println!("repetitions:   {n}");
    println!("single value:  {}", sig(single_value));
    println!("value:         {}", sig(value));
    println!("dual value:    {}", sig(report.dual_value));
    println!("gap:           {}", sig(report.gap));
    println!("iterations:    {iterations}");
    println!(
        "certificate:   {}",
        if report.certified {
            "certified"
        } else {
            "not-certified"
        }
    );
    if let Some(path) = output {
        write_json(path, &record)?;
    }
    if let Some(path) = certificate {
        let cert = Certificate {
            q: p.q().clone(),
            primal_x: x,
            dual_y: y,
            tolerance: certificates::DEFAULT_TOLERANCE,
            value: single_value,
        };
        write_certificate(&cert, path)?;
    }
    if report.certified {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FAILURE,
            message: "solver output did not certify".into(),
        })
    }
}

#[derive(Serialize)]
struct CertifyRecord {
    file: String,
    claimed_value: f64,
    claimed_value_matches: bool,
    certified: bool,
    report: CertificateSummary,
}

fn cmd_certify(file: &Path, tol: Option<f64>, output: Option<&Path>) -> CliResult<()> {
    let cert = read_certificate(file)?;
    let tol = tol.unwrap_or(cert.tolerance);
    let check = cert.check(tol)?;
    let r = &check.report;
    println!("primal value:        {}", sig(r.primal_value));
    println!("dual value:          {}", sig(r.dual_value));
    println!("gap:                 {}", sig(r.gap));
    println!(
        "primal feasible:     {} (min eigenvalue {}, trace defect {})",
        r.primal.feasible,
        sig(r.primal.min_eigenvalue),
        sig(r.primal.trace_defect)
    );
    println!(
        "dual feasible:       {} (dual residual: min eigenvalue {})",
        r.dual.feasible,
        sig(r.dual.min_eigenvalue)
    );
    println!(
        "claimed value:       {} ({})",
        sig(check.claimed_value),
        if check.claimed_value_matches {
            "matches"
        } else {
            "mismatch"
        }
    );
    println!("tolerance:           {}", sig(tol));
    println!(
        "verdict:             {}",
        if check.certified {
            "certified"
        } else {
            "not-certified"
        }
    );
    if let Some(path) = output {
        write_json(
            path,
            &CertifyRecord {
                file: file.display().to_string(),
                claimed_value: check.claimed_value,
                claimed_value_matches: check.claimed_value_matches,
                certified: check.certified,
                report: CertificateSummary::from(r),
            },
        )?;
    }
    if check.certified {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FAILURE,
            message: "certificate rejected".into(),
        })
    }
}

fn quantum_strategy(name: &str, scheme_arg: &str, d: usize) -> CliResult<ChoiOperator> {
    let cloner = match name {
        "optimal" => match scheme_arg {
            "wiesner" => wiesner_optimal_cloner(),
            "six-state" | "sic" => buzek_hillery_cloner(),
            _ => {
                return Err(usage(format!(
                    "no built-in optimal cloner for {scheme_arg:?}; pick werner, buzek-hillery or passthrough"
                )))
            }
        },
        "buzek-hillery" if d == 2 => buzek_hillery_cloner(),
        "buzek-hillery" => return Err(usage("buzek-hillery is a qubit cloner")),
        "werner" => werner_cloner(d)?,
        "passthrough" => passthrough_cloner(d)?,
        _ => return Err(usage(format!("strategy {name:?} does not apply to a quantum scheme"))),
    };
    Ok(cloner)
}

fn ticket_strategy(name: &str, t: &TicketScheme) -> CliResult<Option<TicketStrategy>> {
    Ok(match name {
        "ticket-cloner" | "optimal" => Some(ticket_cloner(t.dim())?),
        "measure-0" => Some(measure_in_basis(t.basis_pair(), 0)?),
        "measure-1" => Some(measure_in_basis(t.basis_pair(), 1)?),
        "honest" => None,
        _ => {
            return Err(usage(format!(
                "strategy {name:?} does not apply to a ticket scheme"
            )))
        }
    })
}

fn print_trial(label: &str, r: &qmoney::simulator::TrialReport) {
    println!("{label}successes:  {}", r.successes);
    println!("{label}trials:     {}", r.trials);
    println!("{label}empirical:  {}", sig(r.empirical));
    match (r.analytic, r.z) {
        (Some(a), Some(z)) => {
            println!("{label}analytic:   {}", sig(a));
            println!("{label}std error:  {}", sig(r.standard_error));
            println!("{label}z:          {}", sig(z));
        }
        _ => println!("{label}analytic:   unknown"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    scheme: Option<&str>,
    strategy: Option<&str>,
    attack: Option<Attack>,
    n: usize,
    trials: u64,
    seed: u64,
    output: Option<&Path>,
) -> CliResult<()> {
    if let Some(Attack::Bell) = attack {
        let r = simulate_bell_attack(n, trials, seed)?;
        println!("attack:     bell (n = {n})");
        print_trial("", &r.first_note);
        println!(
            "second note accepted given first: {}",
            sig(r.conditional_second_rate)
        );
        if let Some(path) = output {
            write_json(path, &r)?;
        }
        return Ok(());
    }
    let scheme_arg = scheme.ok_or_else(|| usage("--scheme is required"))?;
    let cfg = TrialConfig::new(trials, seed).with_repetitions(n);
    let report = match resolve_scheme(scheme_arg)? {
        Scheme::Quantum(e) => {
            let j = quantum_strategy(strategy.unwrap_or("optimal"), scheme_arg, e.dim())?;
            simulate_quantum_attack(&e, &j, &cfg)?
        }
        Scheme::Symmetric(_) => {
            return Err(usage(
                "symmetric:D defines only the objective; simulate an explicit ensemble instead",
            ))
        }
        Scheme::Ticket(t) => match ticket_strategy(strategy.unwrap_or("ticket-cloner"), &t)? {
            Some(s) => simulate_ticket_attack(&t, &s, &cfg)?,
            None => simulate_honest_verification(&t, &cfg)?,
        },
    };
    println!("scheme:     {scheme_arg}");
    print_trial("", &report);
    if let Some(path) = output {
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ThresholdRecord {
    scheme: String,
    n: usize,
    t: usize,
    alpha: f64,
    value: f64,
    conditions_hold: bool,
    certified: bool,
    r_norm_dense: Option<f64>,
    r_norm_formula: f64,
    direct_value: Option<f64>,
}

fn cmd_threshold(
    scheme_arg: &str,
    n: usize,
    t: usize,
    tol: f64,
    direct: bool,
    output: Option<&Path>,
) -> CliResult<()> {
    let e = match resolve_scheme(scheme_arg)? {
        Scheme::Quantum(e) => e,
        _ => {
            return Err(usage(
                "threshold composition is defined for quantum-verification ensembles",
            ))
        }
    };
    let p = quantum_problem(build_q_quantum(&e), e.dim())?;
    let alpha = solve(&p, tol)?.primal_value.clamp(0.0, 1.0);
    let value = threshold_value(alpha, n, t)?;
    let conditions_hold = threshold_conditions_hold(&e, alpha)?;
    let formula = r_norm_formula(&e, n, t)?;
    let dense = if e
        .dim()
        .pow(3)
        .checked_pow(n as u32)
        .is_some_and(|x| x <= DENSE_R_LIMIT)
    {
        Some(verify_r_norm(&e, n, t)?.lhs)
    } else {
        None
    };
    let direct_value = if direct {
        Some(solve(&threshold_problem(&e, n, t)?, tol.max(1e-8))?.primal_value)
    } else {
        None
    };
    println!("scheme:       {scheme_arg}");
    println!("alpha:        {}", sig(alpha));
    println!("n, t:         {n}, {t}");
    println!(
        "value:        {}{}",
        sig(value),
        if conditions_hold {
            ""
        } else {
            " not-certified"
        }
    );
    println!(
        "conditions:   {}",
        if conditions_hold {
            "hold"
        } else {
            "fail (not-certified)"
        }
    );
    match dense {
        Some(l) => println!("|R| dense:    {} (formula {})", sig(l), sig(formula)),
        None => println!("|R| formula:  {} (formula-only)", sig(formula)),
    }
    if let Some(v) = direct_value {
        println!("direct SDP:   {}", sig(v));
    }
    if let Some(path) = output {
        write_json(
            path,
            &ThresholdRecord {
                scheme: scheme_arg.to_string(),
                n,
                t,
                alpha,
                value,
                conditions_hold,
                certified: conditions_hold,
                r_norm_dense: dense,
                r_norm_formula: formula,
                direct_value,
            },
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze {
            scheme,
            n,
            tol,
            output,
            certificate,
        } => cmd_analyze(&scheme, n, tol, output.as_deref(), certificate.as_deref()),
        Command::Certify { file, tol, output } => cmd_certify(&file, tol, output.as_deref()),
        Command::Simulate {
            scheme,
            strategy,
            attack,
            n,
            trials,
            seed,
            output,
        } => cmd_simulate(
            scheme.as_deref(),
            strategy.as_deref(),
            attack,
            n,
            trials,
            seed,
            output.as_deref(),
        ),
        Command::Threshold {
            scheme,
            n,
            t,
            tol,
            direct,
            output,
        } => cmd_threshold(&scheme, n, t, tol, direct, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
