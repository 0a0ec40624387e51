//! Command-line surface for the workbench: builds family instances,
//! certifies user-supplied codes, evaluates bounds, and runs self-checks.
//!
//! Exit codes: 0 success, 1 input error, 2 precondition or guard failure,
//! 3 budget exhausted (inconclusive), 4 internal verification failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qlrc::asymptotic::{asym_bounds, crossover_delta, emit_curves};
use qlrc::budget::DEFAULT_BUDGET;
use qlrc::certificate::{
    canonical_json, certificate_from_json, classical_certificate, family_certificate,
    quantum_certificate, validate_certificate, Certificate,
};
use qlrc::css::{
    css_compose, pure_optimal_check, q_singleton_bound, q_singleton_dim_bound, q_singleton_rhs,
    quantum_locality_certificate, QuantumLocalityOutcome,
};
use qlrc::families::{
    css_grs_pair_build, cyclic_family_one, cyclic_family_two, QuantumFamilyBuild,
};
use qlrc::galois::{Elem, FieldSpec};
use qlrc::linear::{LinearCode, Matrix};
use qlrc::locality::{
    certificate_from_witnesses, cm_bound, locality_certificate, singleton_like_bound,
    LocalityOutcome, OracleKind, OraclePref, Verdict,
};
use qlrc::{Budget, Error, ExactRate};

#[derive(Parser)]
#[command(
    name = "qlrc",
    version,
    about = "Builds, certifies, and bounds locally recoverable codes, classical and quantum"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Enumeration budget in codewords (default 2^28).
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Worker threads for the oracles (env QLRC_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Config file with key=value lines; keys: budget, threads.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a named family instance and emit its certificate.
    Build {
        #[command(subcommand)]
        family: Family,
    },
    /// Run the oracle chain on user-supplied generator matrices.
    Certify(CertifyArgs),
    /// Evaluate bounds numerically or emit asymptotic curves.
    Bounds {
        #[command(subcommand)]
        kind: BoundsCmd,
    },
    /// Build and re-validate the reference instances.
    Selftest,
}

#[derive(Subcommand)]
enum Family {
    /// Two GRS-derived block codes composed into a pure CSS code.
    #[command(name = "grs-pair")]
    GrsPair {
        /// Field order.
        #[arg(long)]
        q: u64,
        /// Target quantum distance.
        #[arg(long)]
        d: usize,
        /// Number of repair blocks.
        #[arg(long)]
        u: usize,
        /// Locality.
        #[arg(long)]
        r: usize,
        /// Certificate path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-composed cyclic code with distance l+1.
    #[command(name = "cyclic-1")]
    Cyclic1 {
        /// Field order; u(r+1) must divide q-1.
        #[arg(long)]
        q: u64,
        /// Number of repair blocks.
        #[arg(long)]
        u: usize,
        /// Locality.
        #[arg(long)]
        r: usize,
        /// Distance parameter; the built code has distance l+1.
        #[arg(long)]
        l: usize,
        /// Certificate path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-composed cyclic code of length u(r+1) with distance 3.
    #[command(name = "cyclic-2")]
    Cyclic2 {
        /// Field order; r+1 must divide q-1.
        #[arg(long)]
        q: u64,
        /// Length multiplier, coprime to q.
        #[arg(long)]
        u: usize,
        /// Locality.
        #[arg(long)]
        r: usize,
        /// Certificate path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CertifyArgs {
    /// One or two code files, JSON of the form {"q": 13, "generator": [[...], ...]}.
    #[arg(required = true, num_args = 1..=2)]
    codes: Vec<PathBuf>,

    /// Locality target.
    #[arg(long)]
    r: usize,

    /// Compose into a CSS quantum code (one file self-composes).
    #[arg(long)]
    quantum: bool,

    /// Dimension oracle for the CM bound reports.
    #[arg(long, value_enum, default_value_t = OracleChoice::Exact)]
    oracle: OracleChoice,

    /// Certificate path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Print every bound applicable to the given parameters.
    Eval(EvalArgs),
    /// Emit the three asymptotic rate curves as CSV.
    Asymptotic(AsymptoticArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Code length.
    #[arg(long)]
    n: usize,
    /// Locality.
    #[arg(long)]
    r: usize,
    /// Field order, enables the CM bound.
    #[arg(long)]
    q: Option<u64>,
    /// Classical dimension.
    #[arg(long)]
    k: Option<usize>,
    /// Classical distance.
    #[arg(long)]
    d: Option<usize>,
    /// Quantum dimension.
    #[arg(long)]
    kappa: Option<usize>,
    /// Quantum distance.
    #[arg(long)]
    delta: Option<usize>,
    /// Dimension oracle for the CM bound.
    #[arg(long, value_enum, default_value_t = OracleChoice::Exact)]
    oracle: OracleChoice,
}

#[derive(Args)]
struct AsymptoticArgs {
    /// Locality.
    #[arg(long)]
    r: usize,
    /// Field order.
    #[arg(long)]
    q: u64,
    /// Grid step in relative distance.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Grid endpoint.
    #[arg(long, default_value_t = 0.5)]
    max: f64,
    /// CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleChoice {
    Exact,
    Upper,
}

impl From<OracleChoice> for OraclePref {
    fn from(choice: OracleChoice) -> OraclePref {
        match choice {
            OracleChoice::Exact => OraclePref::Exact,
            OracleChoice::Upper => OraclePref::Upper,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn guard(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Failure {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match err {
            Error::Guard(_)
            | Error::Degenerate(_)
            | Error::NotStrictSubcode(_)
            | Error::RootOfUnity { .. } => 2,
            Error::BudgetExceeded { .. } | Error::Infeasible(_) => 3,
            Error::Verification(_) => 4,
            _ => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

struct Settings {
    budget: Budget,
}

fn parse_config(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::input(format!(
                "config line {}: expected key=value",
                idx + 1
            )));
        };
        let key = key.trim();
        if key != "budget" && key != "threads" {
            return Err(Failure::input(format!(
                "config line {}: unknown key {key}",
                idx + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_setting<T: FromStr>(source: &str, name: &str, raw: &str) -> Result<T, Failure>
where
    T::Err: Display,
{
    raw.parse()
        .map_err(|e| Failure::input(format!("{source} value for {name}: {e}")))
}

fn resolve(global: &Global) -> Result<Settings, Failure> {
    let config = match &global.config {
        Some(path) => parse_config(path)?,
        None => BTreeMap::new(),
    };
    let budget = match (global.budget, config.get("budget")) {
        (Some(max), _) => max,
        (None, Some(raw)) => parse_setting("config", "budget", raw)?,
        (None, None) => DEFAULT_BUDGET,
    };
    let threads = match (global.threads, config.get("threads")) {
        (Some(t), _) => Some(t),
        (None, Some(raw)) => Some(parse_setting("config", "threads", raw)?),
        (None, None) => match std::env::var("QLRC_THREADS") {
            Ok(raw) => Some(parse_setting("environment", "QLRC_THREADS", &raw)?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::input("threads must be at least 1"));
        }
        // A pool built earlier in the process wins; that is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(Settings {
        budget: Budget::new(budget),
    })
}

fn write_output(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bound_name(report: &qlrc::locality::BoundReport) -> String {
    serde_json::to_string(&report.bound)
        .unwrap_or_default()
        .trim_matches('"')
        .to_string()
}

/// Serializes, writes, and enforces the exit contract: any violated verdict
/// on a certified build is a verification failure, never a quiet success.
fn finish_certificate(cert: &Certificate, out: Option<&Path>) -> CmdResult {
    let text = canonical_json(cert)?;
    write_output(out, &text)?;
    let violated: Vec<String> = cert
        .reports
        .iter()
        .filter(|rep| rep.verdict == Verdict::Violated)
        .map(bound_name)
        .collect();
    if !violated.is_empty() {
        return Err(Failure::verification(format!(
            "certified code violates {}",
            violated.join(", ")
        )));
    }
    Ok(())
}

fn cmd_build(family: &Family, settings: &Settings) -> CmdResult {
    let start = Instant::now();
    let budget = &settings.budget;
    let (name, params, build, out): (&str, Vec<(&str, i64)>, QuantumFamilyBuild, _) = match family
    {
        Family::GrsPair { q, d, u, r, out } => {
            let field = FieldSpec::from_order(*q)?;
            let build = css_grs_pair_build(&field, *d, *u, *r, None, budget)?;
            let params = vec![
                ("q", *q as i64),
                ("d", *d as i64),
                ("u", *u as i64),
                ("r", *r as i64),
            ];
            ("grs-pair", params, build, out)
        }
        Family::Cyclic1 { q, u, r, l, out } => {
            let build = cyclic_family_one(*q, *u, *r, *l, budget)?;
            let params = vec![
                ("q", *q as i64),
                ("u", *u as i64),
                ("r", *r as i64),
                ("l", *l as i64),
            ];
            ("cyclic-1", params, build, out)
        }
        Family::Cyclic2 { q, u, r, out } => {
            let build = cyclic_family_two(*q, *u, *r, budget)?;
            let params = vec![("q", *q as i64), ("u", *u as i64), ("r", *r as i64)];
            ("cyclic-2", params, build, out)
        }
    };
    let cert = family_certificate(
        name,
        &params,
        &build,
        OraclePref::Exact,
        start.elapsed().as_millis() as u64,
        budget.used(),
    )?;
    let qc = &build.quantum;
    eprintln!(
        "{name}: [[{}, {}, {}]]_{} with locality {}, {} bound reports",
        qc.n(),
        qc.kappa(),
        qc.delta(),
        qc.field().order(),
        build.locality_c1.r,
        cert.reports.len(),
    );
    finish_certificate(&cert, out.as_deref())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeInput {
    q: u64,
    generator: Vec<Vec<Elem>>,
}

fn load_code(path: &Path) -> Result<LinearCode, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let input: CodeInput = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let field = FieldSpec::from_order(input.q)?;
    if input.generator.is_empty() {
        return Err(Failure::input(format!(
            "{}: generator needs at least one row",
            path.display()
        )));
    }
    let rows = Matrix::from_rows(input.generator)?;
    Ok(LinearCode::from_generator(&field, rows)?)
}

fn cmd_certify(args: &CertifyArgs, settings: &Settings) -> CmdResult {
    let start = Instant::now();
    let budget = &settings.budget;
    let codes: Vec<LinearCode> = args
        .codes
        .iter()
        .map(|path| load_code(path))
        .collect::<Result<_, _>>()?;

    if !args.quantum {
        if codes.len() != 1 {
            return Err(Failure::input(
                "classical certification takes one code; pass --quantum to compose two",
            ));
        }
        let code = &codes[0];
        code.certify_distance(budget)?;
        let locality = match locality_certificate(code, args.r, budget)? {
            LocalityOutcome::Certified(cert) => cert,
            LocalityOutcome::Refused { r, uncovered } => {
                return Err(Failure::guard(format!(
                    "no repair set of size at most {r} covers coordinate(s) {uncovered:?}"
                )));
            }
        };
        let params = [("q", code.field().order() as i64), ("r", args.r as i64)];
        let cert = classical_certificate(
            "certify",
            &params,
            code,
            &locality,
            args.oracle_pref(),
            start.elapsed().as_millis() as u64,
            budget.used(),
        )?;
        return finish_certificate(&cert, args.out.as_deref());
    }

    let (c1, c2) = match codes.len() {
        1 => (codes[0].clone(), codes[0].clone()),
        _ => (codes[0].clone(), codes[1].clone()),
    };
    let q = c1.field().order();
    let mut qc = css_compose(c1, c2, budget)?;
    let quantum = match quantum_locality_certificate(&qc, args.r, budget)? {
        QuantumLocalityOutcome::Certified(cert) => cert,
        QuantumLocalityOutcome::Refused { r, uncovered } => {
            return Err(Failure::guard(format!(
                "no dual pair with joint support at most {} covers coordinate(s) {uncovered:?}",
                r + 1
            )));
        }
    };
    let words1 = quantum.pairs.iter().map(|p| p.word1.clone()).collect();
    let words2 = quantum.pairs.iter().map(|p| p.word2.clone()).collect();
    let locality_c1 = certificate_from_witnesses(qc.c1(), args.r, words1)?;
    let locality_c2 = certificate_from_witnesses(qc.c2(), args.r, words2)?;
    qc.set_locality(quantum)?;
    let optimal = if qc.is_certified() {
        Some(pure_optimal_check(&qc, args.r)?)
    } else {
        None
    };
    let params = [("q", q as i64), ("r", args.r as i64)];
    let cert = quantum_certificate(
        "certify",
        &params,
        &qc,
        &locality_c1,
        &locality_c2,
        optimal,
        args.oracle_pref(),
        start.elapsed().as_millis() as u64,
        budget.used(),
    )?;
    let certified = qc.is_certified();
    finish_certificate(&cert, args.out.as_deref())?;
    if !certified {
        return Err(Failure {
            code: 3,
            message: "distance is claimed, not certified: the budget ran out \
                      (certificate written without bound reports)"
                .into(),
        });
    }
    Ok(())
}

impl CertifyArgs {
    fn oracle_pref(&self) -> OraclePref {
        self.oracle.into()
    }
}

fn verdict_word(achieved: i64, bound: i64) -> &'static str {
    match achieved.cmp(&bound) {
        std::cmp::Ordering::Less => "satisfied-strict",
        std::cmp::Ordering::Equal => "meets-with-equality",
        std::cmp::Ordering::Greater => "violated",
    }
}

fn oracle_word(kind: OracleKind) -> &'static str {
    match kind {
        OracleKind::Exact => "exact",
        OracleKind::Upper => "upper",
        OracleKind::Skipped => "skipped",
    }
}

fn cmd_bounds_eval(args: &EvalArgs) -> CmdResult {
    if args.k.is_none() && args.kappa.is_none() {
        return Err(Failure::input(
            "pass --k for classical bounds, --kappa for quantum bounds, or both",
        ));
    }
    let pref: OraclePref = args.oracle.into();
    let mut lines: Vec<String> = Vec::new();

    if let Some(k) = args.k {
        let bound = singleton_like_bound(args.n, k, args.r)?;
        lines.push(format!(
            "C-Singleton: n {} k {} r {} -> d <= {}",
            args.n, k, args.r, bound
        ));
        if let Some(d) = args.d {
            lines.push(format!(
                "  achieved d = {d}: {}",
                verdict_word(d as i64, bound)
            ));
        }
    }
    if let (Some(q), Some(d)) = (args.q, args.d) {
        let (bound, kind) = cm_bound(q, args.n, d, args.r, pref)?;
        lines.push(format!(
            "C-CM ({} oracle): n {} d {} r {} q {} -> k <= {}",
            oracle_word(kind),
            args.n,
            d,
            args.r,
            q,
            bound
        ));
        if let Some(k) = args.k {
            lines.push(format!(
                "  achieved k = {k}: {}",
                verdict_word(k as i64, bound as i64)
            ));
        }
    }
    if let Some(kappa) = args.kappa {
        let rhs = q_singleton_rhs(args.n, kappa, args.r)?;
        let dmax = q_singleton_bound(args.n, kappa, args.r)?;
        lines.push(format!(
            "Q-Singleton: n {} kappa {} r {} -> 2 delta <= {}, delta <= {}",
            args.n, kappa, args.r, rhs, dmax
        ));
        if let Some(delta) = args.delta {
            lines.push(format!(
                "  achieved delta = {delta}: {}",
                verdict_word(2 * delta as i64, rhs)
            ));
        }
        let deltas: Vec<usize> = match args.delta {
            Some(delta) => vec![delta],
            None if dmax >= 1 => (1..=dmax as usize).collect(),
            None => Vec::new(),
        };
        for delta in deltas {
            let bound = q_singleton_dim_bound(args.n, delta, args.r)?;
            lines.push(format!(
                "Q-Singleton-dim: delta {delta} -> kappa <= {bound}, kappa {kappa} {}",
                verdict_word(kappa as i64, bound)
            ));
        }
    }
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn cmd_bounds_asymptotic(args: &AsymptoticArgs) -> CmdResult {
    if !(args.step > 0.0) {
        return Err(Failure::input("step must be positive"));
    }
    if !(0.0..=1.0).contains(&args.max) {
        return Err(Failure::input("max must lie in [0, 1]"));
    }
    let steps = (args.max / args.step).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * args.step).collect();
    let csv = emit_curves(args.r, args.q, &grid)?;
    write_output(args.out.as_deref(), &csv)
}

struct Expect {
    n: usize,
    kappa: usize,
    delta: usize,
}

fn selftest_build(
    name: &str,
    params: &[(&str, i64)],
    build: &QuantumFamilyBuild,
    expect: Expect,
    budget: &Budget,
) -> CmdResult {
    let qc = &build.quantum;
    if (qc.n(), qc.kappa(), qc.delta()) != (expect.n, expect.kappa, expect.delta) {
        return Err(Failure::verification(format!(
            "{name}: built [[{}, {}, {}]], expected [[{}, {}, {}]]",
            qc.n(),
            qc.kappa(),
            qc.delta(),
            expect.n,
            expect.kappa,
            expect.delta
        )));
    }
    let cert = family_certificate(name, params, build, OraclePref::Exact, 0, budget.used())?;
    let text = canonical_json(&cert)?;
    let reloaded = certificate_from_json(&text)?;
    validate_certificate(&reloaded)?;
    if canonical_json(&reloaded)? != text {
        return Err(Failure::verification(format!(
            "{name}: canonical JSON round trip is not byte identical"
        )));
    }
    println!(
        "ok {name} [[{}, {}, {}]]_{}",
        qc.n(),
        qc.kappa(),
        qc.delta(),
        qc.field().order()
    );
    Ok(())
}

fn cmd_selftest(settings: &Settings) -> CmdResult {
    let budget = &settings.budget;
    let f4 = FieldSpec::from_order(4)?;
    let f7 = FieldSpec::from_order(7)?;
    selftest_build(
        "grs-pair",
        &[("q", 4), ("d", 2), ("u", 1), ("r", 3)],
        &css_grs_pair_build(&f4, 2, 1, 3, None, budget)?,
        Expect {
            n: 4,
            kappa: 2,
            delta: 2,
        },
        budget,
    )?;
    selftest_build(
        "grs-pair",
        &[("q", 7), ("d", 3), ("u", 1), ("r", 4)],
        &css_grs_pair_build(&f7, 3, 1, 4, None, budget)?,
        Expect {
            n: 5,
            kappa: 1,
            delta: 3,
        },
        budget,
    )?;
    selftest_build(
        "cyclic-1",
        &[("q", 13), ("u", 1), ("r", 3), ("l", 1)],
        &cyclic_family_one(13, 1, 3, 1, budget)?,
        Expect {
            n: 4,
            kappa: 2,
            delta: 2,
        },
        budget,
    )?;
    selftest_build(
        "cyclic-2",
        &[("q", 13), ("u", 2), ("r", 5)],
        &cyclic_family_two(13, 2, 5, budget)?,
        Expect {
            n: 12,
            kappa: 6,
            delta: 3,
        },
        budget,
    )?;

    let at_zero = asym_bounds::<ExactRate>(2, 2, ExactRate::new(0, 1))?;
    if at_zero.r_dim != ExactRate::new(4, 9)
        || at_zero.r_dist != ExactRate::new(1, 2)
        || at_zero.r_cm != ExactRate::new(1, 2)
    {
        return Err(Failure::verification(
            "asymptotic intercepts at delta = 0 are off",
        ));
    }
    let cross = crossover_delta::<ExactRate>(2, 2)?;
    let at_cross = asym_bounds::<ExactRate>(2, 2, cross)?;
    if cross != ExactRate::new(1, 16) || at_cross.r_dim != at_cross.r_cm {
        return Err(Failure::verification(
            "dimension and CM curves do not cross where computed",
        ));
    }
    println!("ok asymptotic intercepts and crossover");
    println!(
        "all self-checks passed ({} words enumerated)",
        budget.used()
    );
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let settings = resolve(&cli.global)?;
    match &cli.cmd {
        Cmd::Build { family } => cmd_build(family, &settings),
        Cmd::Certify(args) => cmd_certify(args, &settings),
        Cmd::Bounds { kind } => match kind {
            BoundsCmd::Eval(args) => cmd_bounds_eval(args),
            BoundsCmd::Asymptotic(args) => cmd_bounds_asymptotic(args),
        },
        Cmd::Selftest => cmd_selftest(&settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems are input errors; --help and --version are not.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
