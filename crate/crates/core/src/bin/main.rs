//! Batch scenario runner.
//!
//! Four subcommands expose the library over machine-readable CSV/JSON:
//! `violation-scan`, `process-compare`, `lhv-oracle`, `fine-test`. All
//! output is deterministic for a fixed (config, seed); rows are ordered by
//! d ascending. Exit codes: 0 success, 1 validation error, 2
//! internal-consistency failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qudit_bell::behavior_io::parse_behavior;
use qudit_bell::cglmp::{i_from_behavior, i_quantum, quantum_behavior, CglmpBreakdown};
use qudit_bell::error::Error;
use qudit_bell::hvt::{
    c_reconstruction_test, enumerate_strategies, fine_membership, no_signaling_check, Membership,
    MAX_D, MIN_D,
};
use qudit_bell::quantum::Pvm;
use qudit_bell::sequences::{MeasurementScenario, ProcessKind};
use qudit_bell::states::{cglmp_bases, maximally_entangled_density, BASIS_OFFSETS};
use qudit_bell::{Behavior64, Density64, Scenario64, Tolerances64};

#[derive(Parser)]
#[command(name = "qudit-bell", version, about = "Qudit Bell-test laboratory runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// I for the maximally entangled state under the standard bases, per d.
    ViolationScan(ViolationScanArgs),
    /// I under all three measurement processes on one fixture.
    ProcessCompare(ProcessCompareArgs),
    /// Exhaustive maximum of I over deterministic local strategies.
    LhvOracle(LhvOracleArgs),
    /// Local-hidden-variable membership of a behavior via both LPs.
    FineTest(FineTestArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override for the behavior-equality tolerance used in LP verdicts.
    #[arg(long)]
    tol: Option<f64>,
    /// Recorded in the output meta block; no command here draws randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ViolationScanArgs {
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[arg(long, default_value_t = 8)]
    d_max: usize,
    #[arg(long, value_parser = parse_process, default_value = "never-measured")]
    process: ProcessKind,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ProcessCompareArgs {
    /// Dimension of the fixture.
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[arg(long, value_enum, default_value_t = Fixture::Cglmp)]
    fixture: Fixture,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LhvOracleArgs {
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[arg(long, default_value_t = 4)]
    d_max: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FineTestArgs {
    /// Behavior table JSON file; a built-in fixture is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FineFixture::Product)]
    fixture: FineFixture,
    /// Dimension of the built-in fixture.
    #[arg(long, default_value_t = 2)]
    d_min: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fixture {
    /// Maximally entangled state with the optimal Fourier bases.
    Cglmp,
    /// All four observables computational: processes must coincide.
    Commuting,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FineFixture {
    /// Separable |00><00| under the Fourier bases: Bell local.
    Product,
    /// Maximally entangled state under the Fourier bases: nonlocal.
    Cglmp,
}

fn parse_process(s: &str) -> Result<ProcessKind, String> {
    ProcessKind::parse(s).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Output plumbing

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct Meta {
    version: String,
    command: String,
    seed: u64,
    tolerances: MetaTolerances,
    offsets: MetaOffsets,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct MetaTolerances {
    hermiticity: f64,
    trace: f64,
    psd: f64,
    pvm: f64,
    basis: f64,
    prob_imag: f64,
    zero_prob: f64,
    normalization: f64,
    behavior_eq: f64,
    no_signaling: f64,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct MetaOffsets {
    alpha_1: f64,
    alpha_2: f64,
    beta_1: f64,
    beta_2: f64,
}

fn meta(command: &str, common: &CommonArgs, tol: &Tolerances64) -> Meta {
    Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed: common.seed,
        tolerances: MetaTolerances {
            hermiticity: tol.hermiticity,
            trace: tol.trace,
            psd: tol.psd,
            pvm: tol.pvm,
            basis: tol.basis,
            prob_imag: tol.prob_imag,
            zero_prob: tol.zero_prob,
            normalization: tol.normalization,
            behavior_eq: tol.behavior_eq,
            no_signaling: tol.no_signaling,
        },
        offsets: MetaOffsets {
            alpha_1: BASIS_OFFSETS.alpha_1,
            alpha_2: BASIS_OFFSETS.alpha_2,
            beta_1: BASIS_OFFSETS.beta_1,
            beta_2: BASIS_OFFSETS.beta_2,
        },
    }
}

fn tolerances(common: &CommonArgs) -> Result<Tolerances64, Error> {
    let mut tol = Tolerances64::default();
    if let Some(t) = common.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!("--tol must be a positive finite number, got {t}")));
        }
        tol.behavior_eq = t;
    }
    Ok(tol)
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn write_output(common: &CommonArgs, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(common: &CommonArgs, csv: String, json_doc: &T) -> Result<(), Error> {
    let text = match common.format {
        Format::Csv => csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json_doc)
                .map_err(|e| Error::InvalidInput(format!("serialization: {e}")))?;
            s.push('\n');
            s
        }
    };
    write_output(common, &text)
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------------------
// violation-scan

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct ViolationRow {
    d: usize,
    i_total: f64,
    p_a1_eq_b1: f64,
    p_b1_eq_a2_plus_1: f64,
    p_a2_eq_b2: f64,
    p_b2_eq_a1: f64,
    alpha_1: f64,
    alpha_2: f64,
    beta_1: f64,
    beta_2: f64,
    process: String,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct ViolationDoc {
    meta: Meta,
    rows: Vec<ViolationRow>,
}

const VIOLATION_HEADER: [&str; 11] = [
    "d", "i_total", "p_a1_eq_b1", "p_b1_eq_a2_plus_1", "p_a2_eq_b2", "p_b2_eq_a1",
    "alpha_1", "alpha_2", "beta_1", "beta_2", "process",
];

fn check_d_range(d_min: usize, d_max: usize) -> Result<(), Error> {
    if d_min < MIN_D || d_max > MAX_D || d_min > d_max {
        return Err(Error::InvalidInput(format!(
            "d range [{d_min}, {d_max}] must lie within [{MIN_D}, {MAX_D}] with d-min <= d-max"
        )));
    }
    Ok(())
}

fn cmd_violation_scan(args: &ViolationScanArgs) -> Result<(), Error> {
    check_d_range(args.d_min, args.d_max)?;
    let tol = tolerances(&args.common)?;
    let mut rows = Vec::new();
    for d in args.d_min..=args.d_max {
        let rho = maximally_entangled_density::<f64>(d, &tol)?;
        let scenario = cglmp_bases::<f64>(d, &tol)?;
        let b = i_quantum(&rho, &scenario, args.process, &tol)?;
        rows.push(ViolationRow {
            d,
            i_total: b.total,
            p_a1_eq_b1: b.terms[0],
            p_b1_eq_a2_plus_1: b.terms[1],
            p_a2_eq_b2: b.terms[2],
            p_b2_eq_a1: b.terms[3],
            alpha_1: BASIS_OFFSETS.alpha_1,
            alpha_2: BASIS_OFFSETS.alpha_2,
            beta_1: BASIS_OFFSETS.beta_1,
            beta_2: BASIS_OFFSETS.beta_2,
            process: args.process.label().to_string(),
        });
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                fmt(r.i_total),
                fmt(r.p_a1_eq_b1),
                fmt(r.p_b1_eq_a2_plus_1),
                fmt(r.p_a2_eq_b2),
                fmt(r.p_b2_eq_a1),
                fmt(r.alpha_1),
                fmt(r.alpha_2),
                fmt(r.beta_1),
                fmt(r.beta_2),
                r.process.clone(),
            ]
        })
        .collect();
    let doc = ViolationDoc { meta: meta("violation-scan", &args.common, &tol), rows };
    emit(&args.common, csv_table(&VIOLATION_HEADER, &csv_rows), &doc)
}

// ---------------------------------------------------------------------------
// process-compare

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct ProcessRow {
    process: String,
    i_total: f64,
    p_a1_eq_b1: f64,
    p_b1_eq_a2_plus_1: f64,
    p_a2_eq_b2: f64,
    p_b2_eq_a1: f64,
    max_pairwise_delta_i: f64,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct ProcessDoc {
    meta: Meta,
    fixture: String,
    d: usize,
    rows: Vec<ProcessRow>,
}

const PROCESS_HEADER: [&str; 7] = [
    "process", "i_total", "p_a1_eq_b1", "p_b1_eq_a2_plus_1", "p_a2_eq_b2", "p_b2_eq_a1",
    "max_pairwise_delta_i",
];

fn fixture_scenario(fixture: Fixture, d: usize, tol: &Tolerances64) -> Result<(Density64, Scenario64), Error> {
    let rho = maximally_entangled_density::<f64>(d, tol)?;
    let scenario = match fixture {
        Fixture::Cglmp => cglmp_bases::<f64>(d, tol)?,
        Fixture::Commuting => {
            let comp = || Pvm::<f64>::computational(d);
            MeasurementScenario::new(comp(), comp(), comp(), comp())?
        }
    };
    Ok((rho, scenario))
}

fn cmd_process_compare(args: &ProcessCompareArgs) -> Result<(), Error> {
    check_d_range(args.d_min, args.d_min)?;
    let tol = tolerances(&args.common)?;
    let d = args.d_min;
    let (rho, scenario) = fixture_scenario(args.fixture, d, &tol)?;
    let breakdowns: Vec<(ProcessKind, CglmpBreakdown<f64>)> = ProcessKind::ALL
        .iter()
        .map(|&kind| Ok((kind, i_quantum(&rho, &scenario, kind, &tol)?)))
        .collect::<Result<_, Error>>()?;
    let mut max_delta = 0.0f64;
    for (i, (_, a)) in breakdowns.iter().enumerate() {
        for (_, b) in &breakdowns[i + 1..] {
            max_delta = max_delta.max((a.total - b.total).abs());
        }
    }
    let rows: Vec<ProcessRow> = breakdowns
        .iter()
        .map(|(kind, b)| ProcessRow {
            process: kind.label().to_string(),
            i_total: b.total,
            p_a1_eq_b1: b.terms[0],
            p_b1_eq_a2_plus_1: b.terms[1],
            p_a2_eq_b2: b.terms[2],
            p_b2_eq_a1: b.terms[3],
            max_pairwise_delta_i: max_delta,
        })
        .collect();
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.process.clone(),
                fmt(r.i_total),
                fmt(r.p_a1_eq_b1),
                fmt(r.p_b1_eq_a2_plus_1),
                fmt(r.p_a2_eq_b2),
                fmt(r.p_b2_eq_a1),
                fmt(r.max_pairwise_delta_i),
            ]
        })
        .collect();
    let fixture_name = match args.fixture {
        Fixture::Cglmp => "cglmp",
        Fixture::Commuting => "commuting",
    };
    let doc = ProcessDoc {
        meta: meta("process-compare", &args.common, &tol),
        fixture: fixture_name.to_string(),
        d,
        rows,
    };
    emit(&args.common, csv_table(&PROCESS_HEADER, &csv_rows), &doc)
}

// ---------------------------------------------------------------------------
// lhv-oracle

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct LhvRow {
    d: usize,
    max_i: f64,
    num_maximizers: usize,
    /// Maximizing (j, k, l, m) strategies.
    maximizers: Vec<[usize; 4]>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct LhvDoc {
    meta: Meta,
    rows: Vec<LhvRow>,
}

const LHV_HEADER: [&str; 4] = ["d", "max_i", "num_maximizers", "maximizers"];

fn cmd_lhv_oracle(args: &LhvOracleArgs) -> Result<(), Error> {
    check_d_range(args.d_min, args.d_max)?;
    if args.d_max > 4 {
        return Err(Error::InvalidInput(format!(
            "exhaustive strategy enumeration is limited to d <= 4, got d-max = {}",
            args.d_max
        )));
    }
    let tol = tolerances(&args.common)?;
    let mut rows = Vec::new();
    for d in args.d_min..=args.d_max {
        let mut max_i = f64::NEG_INFINITY;
        let mut maximizers: Vec<[usize; 4]> = Vec::new();
        for s in enumerate_strategies(d)? {
            let c = qudit_bell::hvt::strategy_to_c::<f64>(s, d)?;
            let value = qudit_bell::cglmp::i_from_c(&c)?.total;
            if value > max_i + 1e-12 {
                max_i = value;
                maximizers.clear();
            }
            if (value - max_i).abs() <= 1e-12 {
                maximizers.push([s.j, s.k, s.l, s.m]);
            }
        }
        rows.push(LhvRow { d, max_i, num_maximizers: maximizers.len(), maximizers });
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let listed: Vec<String> = r
                .maximizers
                .iter()
                .map(|s| format!("{}.{}.{}.{}", s[0], s[1], s[2], s[3]))
                .collect();
            vec![
                r.d.to_string(),
                fmt(r.max_i),
                r.num_maximizers.to_string(),
                listed.join(";"),
            ]
        })
        .collect();
    let doc = LhvDoc { meta: meta("lhv-oracle", &args.common, &tol), rows };
    emit(&args.common, csv_table(&LHV_HEADER, &csv_rows), &doc)
}

// ---------------------------------------------------------------------------
// fine-test

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct CertificateJson {
    weights: Vec<f64>,
    responses_a1: Vec<Vec<f64>>,
    responses_a2: Vec<Vec<f64>>,
    responses_b1: Vec<Vec<f64>>,
    responses_b2: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct FineDoc {
    meta: Meta,
    source: String,
    d: usize,
    i_total: f64,
    vertex_lp_verdict: String,
    /// Reproduction error when feasible, infeasibility margin otherwise.
    vertex_lp_value: f64,
    c_lp_verdict: String,
    c_lp_value: f64,
    lps_agree: bool,
    certificate: Option<CertificateJson>,
}

const FINE_HEADER: [&str; 8] = [
    "source", "d", "i_total", "vertex_lp_verdict", "vertex_lp_value",
    "c_lp_verdict", "c_lp_value", "lps_agree",
];

fn load_behavior(args: &FineTestArgs, tol: &Tolerances64) -> Result<(String, Behavior64), Error> {
    match &args.input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            Ok((path.display().to_string(), parse_behavior(&text, tol)?))
        }
        None => {
            check_d_range(args.d_min, args.d_min)?;
            let d = args.d_min;
            let scenario = cglmp_bases::<f64>(d, tol)?;
            let rho = match args.fixture {
                FineFixture::Product => {
                    let basis = qudit_bell::quantum::PureState::<f64>::basis_state(d * d, 0);
                    Density64::from_pure(&basis, (d, d), tol)?
                }
                FineFixture::Cglmp => maximally_entangled_density::<f64>(d, tol)?,
            };
            let name = match args.fixture {
                FineFixture::Product => format!("fixture:product(d={d})"),
                FineFixture::Cglmp => format!("fixture:cglmp(d={d})"),
            };
            Ok((name, quantum_behavior(&rho, &scenario, ProcessKind::NeverMeasured, tol)?))
        }
    }
}

fn cmd_fine_test(args: &FineTestArgs) -> Result<(), Error> {
    let tol = tolerances(&args.common)?;
    let (source, behavior) = load_behavior(args, &tol)?;
    let ns = no_signaling_check(&behavior, &tol);
    if !ns.passed {
        eprintln!(
            "no-signaling check failed: max discrepancy {} at {}",
            ns.max_discrepancy, ns.worst
        );
        return Err(Error::SignalingBehavior { discrepancy: ns.max_discrepancy });
    }
    let i_total = i_from_behavior(&behavior).total;
    let vertex = fine_membership(&behavior, &tol)?;
    let c_test = c_reconstruction_test(&behavior, &tol)?;
    let lps_agree = vertex.is_feasible() == c_test.is_feasible();
    let (vertex_verdict, vertex_value, certificate) = match &vertex {
        Membership::Feasible { certificate, reproduction_error } => (
            "feasible",
            *reproduction_error,
            Some(CertificateJson {
                weights: certificate.weights.clone(),
                responses_a1: certificate.responses_a1.clone(),
                responses_a2: certificate.responses_a2.clone(),
                responses_b1: certificate.responses_b1.clone(),
                responses_b2: certificate.responses_b2.clone(),
            }),
        ),
        Membership::Infeasible { margin } => ("infeasible", *margin, None),
    };
    let (c_verdict, c_value) = match &c_test {
        Membership::Feasible { reproduction_error, .. } => ("feasible", *reproduction_error),
        Membership::Infeasible { margin } => ("infeasible", *margin),
    };
    let doc = FineDoc {
        meta: meta("fine-test", &args.common, &tol),
        source: source.clone(),
        d: behavior.d(),
        i_total,
        vertex_lp_verdict: vertex_verdict.to_string(),
        vertex_lp_value: vertex_value,
        c_lp_verdict: c_verdict.to_string(),
        c_lp_value: c_value,
        lps_agree,
        certificate,
    };
    let csv_rows = vec![vec![
        source,
        behavior.d().to_string(),
        fmt(i_total),
        vertex_verdict.to_string(),
        fmt(vertex_value),
        c_verdict.to_string(),
        fmt(c_value),
        lps_agree.to_string(),
    ]];
    if !lps_agree {
        // Fine's theorem guarantees agreement; a mismatch is an internal error.
        emit(&args.common, csv_table(&FINE_HEADER, &csv_rows), &doc)?;
        return Err(Error::LpInconclusive { iterations: 0 });
    }
    emit(&args.common, csv_table(&FINE_HEADER, &csv_rows), &doc)
}

// ---------------------------------------------------------------------------

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::OutcomeCountOutOfRange { .. }
        | Error::NonOrthonormalBasis { .. }
        | Error::DimensionMismatch { .. }
        | Error::SignalingBehavior { .. } => 1,
        Error::ImaginaryProbability { .. }
        | Error::ImpossibleOutcome { .. }
        | Error::LpInconclusive { .. }
        | Error::LpUnbounded
        | Error::LpPhase1Infeasible => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are success; bad flags are validation errors.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::ViolationScan(args) => cmd_violation_scan(args),
        Command::ProcessCompare(args) => cmd_process_compare(args),
        Command::LhvOracle(args) => cmd_lhv_oracle(args),
        Command::FineTest(args) => cmd_fine_test(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
