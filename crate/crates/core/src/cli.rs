//! Command-line front end.
//!
//! Exit codes: 0 success, 1 negative outcome (`--expect-violation` not met,
//! table mismatch, failed self-test), 2 usage or input error, 3 numerical
//! validation failure.

use std::fs;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::criteria::{Criterion, CriterionReport, Mode, ModeKind};
use crate::error::{Error, Result};
use crate::matrix::{extreme_eigenvalues, kron, Operator, C64};
use crate::observables::{slot_aligned_basis, padded_basis, WeightedObservableSpec};
use crate::output::fmt_sig;
use crate::scan::{
    region_scan, threshold_scan_many, CriterionConfig, NoiseFamily, ScanSettings, ThresholdOutcome, TwoStateFamily,
};
use crate::selftest;
use crate::skew::OrderParam;
use crate::statespec::StateSpec;
use crate::tables::{reproduce_table1, reproduce_table2, TableReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "skewent", version, about = "Skew-information entanglement criteria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long, default_value = "prop1")]
    criterion: Criterion,
    #[arg(long, default_value = "separable")]
    mode: ModeKind,
    /// Order parameter: a non-positive number or `-inf`.
    #[arg(long, default_value = "-inf", allow_hyphen_values = true)]
    s: OrderParam,
    /// Per-qubit weights on (sigma_x, sigma_y, sigma_z) for criterion 2.
    #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
    c: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one criterion on one state.
    Detect {
        #[arg(long)]
        state: StateSpec,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        query: QueryArgs,
        /// Exit with status 1 unless the criterion is violated.
        #[arg(long)]
        expect_violation: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Noise thresholds of `p * state + (1 - p) * white`.
    Scan {
        #[arg(long)]
        state: StateSpec,
        /// One or more comma-separated k values.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 1.0)]
        p_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        coarse_step: f64,
        /// Bisection tolerance on p.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verdict map of the GHZ / phased-GHZ / white-noise simplex.
    Region {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        k: Vec<usize>,
        #[arg(long, default_value = "prop2")]
        criterion: Criterion,
        #[arg(long, default_value = "separable")]
        mode: ModeKind,
        #[arg(long, default_value = "-inf", allow_hyphen_values = true)]
        s: OrderParam,
        #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Separability thresholds of the noisy six-qubit Dicke state.
    Table1 {
        /// Allowed distance from the reference values.
        #[arg(long, default_value_t = 5e-4)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Producibility thresholds of the noisy six-qubit Dicke state.
    Table2 {
        #[arg(long, default_value_t = 5e-4)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the padded local bases for register dimension `dim`.
    Bases {
        #[arg(long)]
        dim: usize,
        /// Verify orthonormality and the slot-aligned identities.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the randomized invariant suite.
    Selftest {
        #[arg(long, default_value_t = 20240611)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

struct Emitted {
    text: String,
    code: i32,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn cli_main<S: AsRef<str>>(argv: &[S]) -> i32 {
    let args: Vec<&str> = argv.iter().map(AsRef::as_ref).collect();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (result, out) = run(cli.command);
    match result {
        Ok(emitted) => match write_output(out.as_deref(), &emitted.text) {
            Ok(()) => emitted.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn write_output(path: Option<&str>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn run(command: Command) -> (Result<Emitted>, Option<String>) {
    match command {
        Command::Detect { state, k, query, expect_violation, output } => {
            (detect(&state, k, &query, expect_violation, output.format), output.out)
        }
        Command::Scan { state, k, query, p_min, p_max, coarse_step, tol, output } => {
            let settings = ScanSettings { p_min, p_max, coarse_step, tol };
            (scan(&state, &k, &query, &settings, output.format), output.out)
        }
        Command::Region { n, k, criterion, mode, s, c, step, output } => {
            let query = QueryArgs { criterion, mode, s, c };
            (region(n, &k, &query, step, output.format), output.out)
        }
        Command::Table1 { tol, output } => (table(1, tol, output.format), output.out),
        Command::Table2 { tol, output } => (table(2, tol, output.format), output.out),
        Command::Bases { dim, check, output } => (bases(dim, check, output.format), output.out),
        Command::Selftest { seed, output } => (run_selftest(seed, output.format), output.out),
    }
}

fn parse_weights(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!("--c expects three comma-separated weights, got '{text}'")));
    }
    let mut c = [0.0; 3];
    for (slot, p) in c.iter_mut().zip(&parts) {
        *slot = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::InvalidArgument(format!("bad weight '{p}' in --c")))?;
    }
    Ok(c)
}

fn config_for(query: &QueryArgs, dims: &[usize], k: usize) -> Result<CriterionConfig> {
    let mode = Mode::new(query.mode, k);
    mode.validate(dims.len())?;
    match query.criterion {
        Criterion::Prop1 => Ok(CriterionConfig::prop1(mode, query.s)),
        Criterion::Prop2 => {
            if dims.iter().any(|&d| d != 2) {
                return Err(Error::InvalidArgument("criterion 2 from the command line supports qubit registers only".into()));
            }
            let spec = WeightedObservableSpec::pauli(dims.len(), parse_weights(&query.c)?)?;
            Ok(CriterionConfig::prop2(mode, query.s, spec))
        }
    }
}

const REPORT_CSV_HEADER: &str = "criterion,k,mode,s,lhs,bound,margin,violated,interpretation,state_spec";

fn report_csv_row(r: &CriterionReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},\"{}\"",
        r.criterion,
        r.k,
        r.mode,
        r.s,
        fmt_sig(r.lhs),
        fmt_sig(r.bound),
        fmt_sig(r.margin),
        u8::from(r.violated),
        r.interpretation.replace(',', ";"),
        r.state_spec.as_deref().unwrap_or("").replace('"', "'")
    )
}

fn detect(spec: &StateSpec, k: usize, query: &QueryArgs, expect: bool, format: Option<Format>) -> Result<Emitted> {
    let state = spec.build()?;
    let config = config_for(query, state.dims(), k)?;
    let n = state.num_sites();
    let report = CriterionReport::new(config.criterion, config.mode, config.s, n, config.lhs(&state)?, config.bound(state.dims())?)
        .with_state_spec(spec.to_string());
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => report.to_json(),
        Format::Csv => format!("{REPORT_CSV_HEADER}\n{}", report_csv_row(&report)),
    };
    let code = if expect && !report.violated { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(Emitted { text: with_newline(text), code })
}

fn scan(spec: &StateSpec, ks: &[usize], query: &QueryArgs, settings: &ScanSettings, format: Option<Format>) -> Result<Emitted> {
    let target = spec.build()?;
    let dims = target.dims().to_vec();
    let family = NoiseFamily::new(format!("p*{spec} + (1-p)*white"), target);
    let configs = ks.iter().map(|&k| config_for(query, &dims, k)).collect::<Result<Vec<_>>>()?;
    let outcomes = threshold_scan_many(&family, &configs, settings)?;
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => {
            let items: Vec<serde_json::Value> =
                outcomes.iter().zip(&configs).map(|(o, c)| o.to_json(c, &family.description)).collect();
            serde_json::to_string(&items).expect("scan serializes")
        }
        Format::Csv => {
            let mut out = String::from("criterion,k,mode,s,status,p_star,p_lo,p_hi,bound,residual\n");
            for (o, c) in outcomes.iter().zip(&configs) {
                let prefix = format!("{},{},{},{}", c.criterion, c.mode.k(), c.mode.kind(), c.s);
                let rows: Vec<_> = match o {
                    ThresholdOutcome::Crossing(r) => vec![("threshold", r)],
                    ThresholdOutcome::MultipleCrossings(rs) => rs.iter().map(|r| ("multiple", r)).collect(),
                    ThresholdOutcome::NoCrossing => {
                        out.push_str(&format!("{prefix},none,,,,,\n"));
                        continue;
                    }
                };
                for (status, r) in rows {
                    out.push_str(&format!(
                        "{prefix},{status},{},{},{},{},{}\n",
                        fmt_sig(r.p_star),
                        fmt_sig(r.bracket.0),
                        fmt_sig(r.bracket.1),
                        fmt_sig(r.bound),
                        fmt_sig(r.residual)
                    ));
                }
            }
            out
        }
    };
    Ok(Emitted { text: with_newline(text), code: EXIT_OK })
}

fn region(n: usize, ks: &[usize], query: &QueryArgs, step: f64, format: Option<Format>) -> Result<Emitted> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("region needs N >= 2, got {n}")));
    }
    let family = TwoStateFamily::ghz(n)?;
    let configs = ks.iter().map(|&k| config_for(query, family.dims(), k)).collect::<Result<Vec<_>>>()?;
    let grid = region_scan(&family, &configs, step)?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Csv => grid.to_csv(),
        Format::Json => grid.to_json(),
    };
    Ok(Emitted { text: with_newline(text), code: EXIT_OK })
}

fn table(which: u8, tol: f64, format: Option<Format>) -> Result<Emitted> {
    let start = Instant::now();
    let settings = ScanSettings::default();
    let report: TableReport = if which == 1 {
        reproduce_table1(&settings, tol)?
    } else {
        reproduce_table2(&settings, tol)?
    };
    let elapsed = start.elapsed().as_secs_f64();
    let text = match format.unwrap_or(Format::Json) {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("table serializes");
            v["elapsed_seconds"] = json!(crate::output::round_sig(elapsed));
            serde_json::to_string(&v).expect("table serializes")
        }
    };
    let code = if report.passed { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Emitted { text: with_newline(text), code })
}

fn matrix_rows(op: &Operator) -> Vec<Vec<[f64; 2]>> {
    let m = op.matrix();
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [crate::output::round_sig(m[(r, c)].re), crate::output::round_sig(m[(r, c)].im)]).collect())
        .collect()
}

fn bases(dim: usize, check: bool, format: Option<Format>) -> Result<Emitted> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("--dim must be at least 2, got {dim}")));
    }
    let mut sites = Vec::new();
    let mut checks = Vec::new();
    let mut all_ok = true;
    for di in 2..=dim {
        let padded = padded_basis(di, dim)?;
        let slot = slot_aligned_basis(di, dim)?;
        if check {
            let native = &padded.operators[..di * di];
            let mut ortho = 0.0f64;
            for (u, a) in native.iter().enumerate() {
                for (v, b) in native.iter().enumerate() {
                    let target = if u == v { 1.0 } else { 0.0 };
                    ortho = ortho.max((a.hs_inner(b) - C64::new(target, 0.0)).norm());
                }
            }
            let mut squares = Operator::zeros(di);
            for op in &slot.operators {
                squares.add_scaled(1.0, &op.matmul(op)?)?;
            }
            let square_dev = squares.max_abs_diff(&Operator::identity(di).scale(di as f64));
            let mut cross_max = f64::NEG_INFINITY;
            for dj in 2..=dim {
                let other = slot_aligned_basis(dj, dim)?;
                let mut sum = Operator::zeros(di * dj);
                for (a, b) in slot.operators.iter().zip(&other.operators) {
                    sum.add_scaled(1.0, &kron(a, b))?;
                }
                cross_max = cross_max.max(extreme_eigenvalues(&sum)?.1);
            }
            let ok = ortho <= 1e-12 && square_dev <= 1e-12 && cross_max <= 1.0 + 1e-12;
            all_ok &= ok;
            checks.push(json!({
                "site_dim": di,
                "orthonormality_error": crate::output::round_sig(ortho),
                "square_sum_deviation": crate::output::round_sig(square_dev),
                "max_cross_eigenvalue": crate::output::round_sig(cross_max),
                "passed": ok,
            }));
        }
        sites.push((di, padded, slot));
    }

    let text = match format.unwrap_or(Format::Json) {
        Format::Json => {
            let entries: Vec<serde_json::Value> = sites
                .iter()
                .map(|(di, padded, slot)| {
                    json!({
                        "site_dim": di,
                        "padded": padded.operators.iter().map(matrix_rows).collect::<Vec<_>>(),
                        "slot_aligned": slot.operators.iter().map(matrix_rows).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut v = json!({ "dim": dim, "bases": entries });
            if check {
                v["checks"] = json!(checks);
                v["passed"] = json!(all_ok);
            }
            serde_json::to_string(&v).expect("bases serialize")
        }
        Format::Csv => {
            let mut out = String::from("site_dim,ordering,index,row,col,re,im\n");
            for (di, padded, slot) in &sites {
                for (name, basis) in [("padded", padded), ("slot_aligned", slot)] {
                    for (u, op) in basis.operators.iter().enumerate() {
                        let m = op.matrix();
                        for r in 0..m.nrows() {
                            for c in 0..m.ncols() {
                                out.push_str(&format!(
                                    "{di},{name},{u},{r},{c},{},{}\n",
                                    fmt_sig(m[(r, c)].re),
                                    fmt_sig(m[(r, c)].im)
                                ));
                            }
                        }
                    }
                }
            }
            out
        }
    };
    let code = if check && !all_ok { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(Emitted { text: with_newline(text), code })
}

fn run_selftest(seed: u64, format: Option<Format>) -> Result<Emitted> {
    let start = Instant::now();
    let mut results = selftest::run_all(seed)?;
    let settings = ScanSettings::default();
    for (name, report) in [
        ("tables: separability thresholds of the noisy Dicke state", reproduce_table1(&settings, 5e-4)?),
        ("tables: producibility thresholds of the noisy Dicke state", reproduce_table2(&settings, 5e-4)?),
    ] {
        let worst = report
            .rows
            .iter()
            .filter(|r| !r.flagged)
            .map(|r| r.abs_diff.unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        let worst = if report.monotone { worst } else { f64::INFINITY };
        results.push(selftest::CheckResult {
            name: name.to_string(),
            passed: report.passed,
            instances: report.rows.len(),
            worst_excess: worst,
            tolerance: 5e-4,
        });
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = results.iter().all(|r| r.passed);
    let text = match format.unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string(&json!({
            "seed": seed,
            "passed": passed,
            "elapsed_seconds": crate::output::round_sig(elapsed),
            "checks": results,
        }))
        .expect("selftest serializes"),
        Format::Csv => {
            let mut out: String = results.iter().map(|r| r.line() + "\n").collect();
            out.push_str(&format!(
                "{} of {} checks passed in {elapsed:.1} s\n",
                results.iter().filter(|r| r.passed).count(),
                results.len()
            ));
            out
        }
    };
    Ok(Emitted { text: with_newline(text), code: if passed { EXIT_OK } else { EXIT_NEGATIVE } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_parse() {
        assert_eq!(parse_weights("0, 0,1").unwrap(), [0.0, 0.0, 1.0]);
        assert!(parse_weights("1,2").is_err());
        assert!(parse_weights("a,0,1").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(cli_main(&["skewent", "detect", "--bogus"]), EXIT_USAGE);
        assert_eq!(cli_main(&["skewent", "detect", "--state", "dicke(N=6", "--k", "2"]), EXIT_USAGE);
        assert_eq!(cli_main(&["skewent", "detect", "--state", "ghz(N=3)", "--k", "9"]), EXIT_USAGE);
    }

    #[test]
    fn detect_exit_codes() {
        let base = ["skewent", "detect", "--state", "mix(0.8: dicke(N=6,m=3), 0.2: white(N=6,d=2))", "--k", "2", "--s", "-inf"];
        let mut args = base.to_vec();
        args.push("--expect-violation");
        assert_eq!(cli_main(&args), EXIT_OK);
        let weak = ["skewent", "detect", "--state", "white(N=3,d=2)", "--k", "2", "--expect-violation"];
        assert_eq!(cli_main(&weak), EXIT_NEGATIVE);
    }
}
