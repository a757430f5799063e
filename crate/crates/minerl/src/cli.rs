//! Command-line front end: parse, check, and optionally run a program,
//! reporting results as human-readable text or as one line of JSON.
//!
//! Exit codes: 0 success, 1 type error or stuck evaluation, 2 parse
//! error, 3 timeout (solver budget or fuel) or an internal failure. The
//! JSON output is a single object with a fixed field order so identical
//! inputs produce identical bytes.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::ast::{parse_program, parse_type, LineMap, Span};
use crate::checker::{check_program, CheckOptions, CheckResult, Diagnostic, DiagnosticKind};
use crate::interp::{run, OracleState, OracleStrategy, RunOutcome};
use crate::types::TyStore;
use crate::ast::value_to_string;

#[derive(Parser)]
#[command(name = "minerl", version, about = "Typed pattern matching over set-theoretic types", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type check a program and print its type
    Check(CommonArgs),
    /// Evaluate a program and print the resulting value
    Run(CommonArgs),
    /// Type check, then evaluate
    Both(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Source file
    input: PathBuf,
    /// Machine-readable output on standard output
    #[arg(long)]
    json: bool,
    /// Evaluation step limit
    #[arg(long, default_value_t = 10_000)]
    fuel: u64,
    /// Guard oracle: `true`, `false`, or `seed:N`
    #[arg(long, default_value = "true")]
    oracle: String,
    /// Constraint-solving step budget
    #[arg(long, default_value_t = 1_000_000)]
    tally_budget: u64,
    /// Cap on candidate substitutions kept per solver call
    #[arg(long, default_value_t = 64)]
    max_solutions: usize,
    /// Check the main expression against this type
    #[arg(long)]
    expect: Option<String>,
    /// Print generated and rewritten constraints to standard error
    #[arg(long)]
    trace: bool,
    /// Disable exhaustiveness checking for all definitions
    #[arg(long)]
    no_exhaustiveness: bool,
}

// ---------------------------------------------------------------------------
// Output shapes
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct JsonOut {
    status: &'static str,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    ty: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    diagnostics: Vec<JsonDiag>,
}

#[derive(Serialize)]
struct JsonDiag {
    kind: String,
    line: usize,
    col: usize,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

/// Outcome of one subcommand, still independent of the output format.
struct Report {
    exit: i32,
    status: &'static str,
    ty: Option<String>,
    value: Option<String>,
    diagnostics: Vec<JsonDiag>,
}

impl Report {
    fn ok() -> Report {
        Report { exit: 0, status: "ok", ty: None, value: None, diagnostics: Vec::new() }
    }

    fn error(exit: i32, status: &'static str) -> Report {
        Report { exit, status, ty: None, value: None, diagnostics: Vec::new() }
    }
}

fn json_diag(d: &Diagnostic, lines: &LineMap) -> JsonDiag {
    let (line, col) = lines.line_col(d.span.start);
    JsonDiag {
        kind: d.kind.name().to_string(),
        line,
        col,
        message: d.message.clone(),
        residual_type: d.residual_type.clone(),
        witness: d.witness.clone(),
    }
}

fn plain_diag(kind: &str, span: Span, message: String, lines: &LineMap) -> JsonDiag {
    let (line, col) = lines.line_col(span.start);
    JsonDiag { kind: kind.to_string(), line, col, message, residual_type: None, witness: None }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

pub fn main() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    run_cli(&args, &mut out, &mut err)
}

/// Run the CLI against explicit arguments and sinks; tests drive this
/// directly to capture exact bytes.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap renders its own help/usage text; --help and --version
            // exit successfully.
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{}", text);
                return 2;
            }
            let _ = write!(out, "{}", text);
            return 0;
        }
    };
    let (mode, a) = match &cli.cmd {
        Cmd::Check(a) => (Mode::Check, a),
        Cmd::Run(a) => (Mode::Run, a),
        Cmd::Both(a) => (Mode::Both, a),
    };
    let report = execute(mode, a, err);
    emit(&report, a.json, out, err);
    report.exit
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Check,
    Run,
    Both,
}

fn execute(mode: Mode, a: &CommonArgs, err: &mut dyn Write) -> Report {
    let src = match std::fs::read_to_string(&a.input) {
        Ok(s) => s,
        Err(e) => {
            let mut r = Report::error(2, "error");
            r.diagnostics.push(JsonDiag {
                kind: "ParseError".to_string(),
                line: 1,
                col: 1,
                message: format!("cannot read {}: {}", a.input.display(), e),
                residual_type: None,
                witness: None,
            });
            return r;
        }
    };
    let lines = LineMap::new(&src);
    let oracle = match parse_oracle(&a.oracle) {
        Ok(o) => o,
        Err(msg) => {
            let mut r = Report::error(2, "error");
            r.diagnostics.push(plain_diag("ParseError", Span::default(), msg, &lines));
            return r;
        }
    };
    let mut st = TyStore::new();
    let prog = match parse_program(&src, &mut st) {
        Ok(p) => p,
        Err(e) => {
            let mut r = Report::error(2, "error");
            r.diagnostics.push(plain_diag("ParseError", e.span, e.message, &lines));
            return r;
        }
    };

    let mut report = Report::ok();
    if mode == Mode::Check || mode == Mode::Both {
        let expected = match &a.expect {
            None => None,
            Some(text) => match parse_type(text, &mut st) {
                Ok(t) => Some(t),
                Err(e) => {
                    let mut r = Report::error(2, "error");
                    r.diagnostics.push(plain_diag(
                        "ParseError",
                        Span::default(),
                        format!("in --expect: {}", e.message),
                        &lines,
                    ));
                    return r;
                }
            },
        };
        let opts = CheckOptions {
            budget: a.tally_budget,
            max_solutions: a.max_solutions,
            no_exhaustiveness: a.no_exhaustiveness,
            trace: a.trace,
        };
        let checked = check_program(&mut st, &prog, expected, &opts);
        if a.trace {
            for line in &checked.trace {
                let _ = writeln!(err, "{}", line);
            }
        }
        if checked.truncated {
            let _ = writeln!(
                err,
                "warning: kept only {} candidate substitutions; rerun with a larger --max-solutions to explore more",
                a.max_solutions
            );
        }
        match checked.result {
            CheckResult::Ok { ty, .. } => {
                report.ty = Some(st.ty_to_string(ty));
            }
            CheckResult::Err(diags) => {
                let timeout = diags.iter().any(|d| d.kind == DiagnosticKind::Timeout);
                let mut r = if timeout {
                    Report::error(3, "timeout")
                } else {
                    Report::error(1, "error")
                };
                r.diagnostics = diags.iter().map(|d| json_diag(d, &lines)).collect();
                return r;
            }
        }
    }
    if mode == Mode::Run || mode == Mode::Both {
        let mut oracle_state = OracleState::new(oracle);
        match run(&prog, a.fuel, &mut oracle_state) {
            RunOutcome::Final(v) => {
                report.value = Some(value_to_string(&v));
            }
            RunOutcome::Stuck(reason) => {
                let mut r = Report::error(1, "error");
                r.ty = report.ty;
                r.diagnostics.push(plain_diag(
                    "Stuck",
                    prog.main.span,
                    format!("evaluation got stuck: {}", reason),
                    &lines,
                ));
                return r;
            }
            RunOutcome::OutOfFuel => {
                let mut r = Report::error(3, "timeout");
                r.ty = report.ty;
                r.diagnostics.push(plain_diag(
                    "Timeout",
                    prog.main.span,
                    format!("evaluation did not finish within {} steps", a.fuel),
                    &lines,
                ));
                return r;
            }
        }
    }
    report
}

fn parse_oracle(text: &str) -> Result<OracleStrategy, String> {
    match text {
        "true" => Ok(OracleStrategy::AlwaysTrue),
        "false" => Ok(OracleStrategy::AlwaysFalse),
        _ => match text.strip_prefix("seed:") {
            Some(n) => n
                .parse::<u64>()
                .map(OracleStrategy::Seeded)
                .map_err(|_| format!("invalid oracle seed `{}`", n)),
            None => Err(format!(
                "invalid --oracle `{}`: expected true, false, or seed:N",
                text
            )),
        },
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn emit(report: &Report, json: bool, out: &mut dyn Write, err: &mut dyn Write) {
    if json {
        let payload = JsonOut {
            status: report.status,
            ty: report.ty.clone(),
            value: report.value.clone(),
            diagnostics: report
                .diagnostics
                .iter()
                .map(|d| JsonDiag {
                    kind: d.kind.clone(),
                    line: d.line,
                    col: d.col,
                    message: d.message.clone(),
                    residual_type: d.residual_type.clone(),
                    witness: d.witness.clone(),
                })
                .collect(),
        };
        let text = serde_json::to_string(&payload).expect("serializable output");
        let _ = writeln!(out, "{}", text);
        return;
    }
    if let Some(ty) = &report.ty {
        let _ = writeln!(out, "{}", ty);
    }
    if let Some(v) = &report.value {
        let _ = writeln!(out, "{}", v);
    }
    let color = std::env::var("MINERL_COLOR").map(|v| v == "1").unwrap_or(false);
    for d in &report.diagnostics {
        let kind = if color {
            format!("\x1b[31m{}\x1b[0m", d.kind)
        } else {
            d.kind.clone()
        };
        let _ = writeln!(err, "{}:{}: {}: {}", d.line, d.col, kind, d.message);
        if let Some(r) = &d.residual_type {
            let _ = writeln!(err, "  uncovered type: {}", r);
        }
        if let Some(w) = &d.witness {
            let _ = writeln!(err, "  example unmatched value: {}", w);
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = std::iter::once("minerl".to_string())
            .chain(args.iter().map(|s| s.to_string()))
            .collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(&argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn write_temp(name: &str, contents: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("minerl-cli-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn check_prints_the_type() {
        let p = write_temp("const.mel", "in 1");
        let (code, out, _err) = run_args(&["check", p.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(out, "1\n");
    }

    #[test]
    fn run_prints_the_value() {
        let p = write_temp("id.mel", "id = fun x -> x in id 1");
        let (code, out, _err) = run_args(&["run", p.to_str().unwrap(), "--fuel", "10"]);
        assert_eq!(code, 0);
        assert_eq!(out, "1\n");
    }

    #[test]
    fn both_prints_type_then_value() {
        let p = write_temp("both.mel", "in (1, 2.0)");
        let (code, out, _err) = run_args(&["both", p.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(out, "(1, Float)\n(1, 2.0)\n");
    }

    #[test]
    fn json_check_is_byte_stable() {
        let p = write_temp("stable.mel", "in 1");
        let first = run_args(&["check", p.to_str().unwrap(), "--json"]);
        let second = run_args(&["check", p.to_str().unwrap(), "--json"]);
        assert_eq!(first, second);
        assert_eq!(first.0, 0);
        assert_eq!(first.1, "{\"status\":\"ok\",\"type\":\"1\",\"diagnostics\":[]}\n");
    }

    #[test]
    fn parse_error_exits_two() {
        let p = write_temp("broken.mel", "in in");
        let (code, out, _err) = run_args(&["check", p.to_str().unwrap(), "--json"]);
        assert_eq!(code, 2);
        assert!(out.contains("\"status\":\"error\""));
        assert!(out.contains("\"kind\":\"ParseError\""));
    }

    #[test]
    fn type_error_exits_one_with_json_kind() {
        let p = write_temp("badapp.mel", "f : Int -> Int = fun n -> n\nin f 2.5");
        let (code, out, _err) = run_args(&["check", p.to_str().unwrap(), "--json"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"status\":\"error\""));
        assert!(out.contains("\"kind\":\"TypeError\""));
    }

    #[test]
    fn non_exhaustive_reports_residual_and_witness() {
        let p = write_temp(
            "nonex.mel",
            "f : (0 | 1) -> Int = fun n -> case n of 0 -> 0 end\nin f 0",
        );
        let (code, out, _err) = run_args(&["check", p.to_str().unwrap(), "--json"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"kind\":\"NonExhaustive\""));
        assert!(out.contains("\"residual_type\":\"1\""));
        assert!(out.contains("\"witness\":\"1\""));
    }

    #[test]
    fn stuck_evaluation_exits_one() {
        let p = write_temp("stuck.mel", "in 1 2");
        let (code, out, _err) = run_args(&["run", p.to_str().unwrap(), "--json"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"kind\":\"Stuck\""));
    }

    #[test]
    fn fuel_exhaustion_is_a_timeout() {
        let p = write_temp(
            "loop.mel",
            "loop = fun x -> loop x\nin loop 0",
        );
        let (code, out, _err) = run_args(&["run", p.to_str().unwrap(), "--fuel", "50", "--json"]);
        assert_eq!(code, 3);
        assert!(out.contains("\"status\":\"timeout\""));
    }

    #[test]
    fn expect_flag_gates_the_type() {
        let p = write_temp("expect.mel", "in 1");
        let (ok, _, _) = run_args(&["check", p.to_str().unwrap(), "--expect", "Int"]);
        assert_eq!(ok, 0);
        let (bad, _, _) = run_args(&["check", p.to_str().unwrap(), "--expect", "Float"]);
        assert_eq!(bad, 1);
    }

    #[test]
    fn oracle_strategies_parse() {
        assert!(matches!(parse_oracle("true"), Ok(OracleStrategy::AlwaysTrue)));
        assert!(matches!(parse_oracle("false"), Ok(OracleStrategy::AlwaysFalse)));
        assert!(matches!(parse_oracle("seed:7"), Ok(OracleStrategy::Seeded(7))));
        assert!(parse_oracle("maybe").is_err());
    }

    #[test]
    fn missing_file_is_a_parse_error() {
        let (code, out, _err) = run_args(&["check", "/nonexistent/nope.mel", "--json"]);
        assert_eq!(code, 2);
        assert!(out.contains("cannot read"));
    }

    #[test]
    fn trace_goes_to_stderr() {
        let p = write_temp("traced.mel", "in 1");
        let (code, out, err) = run_args(&["check", p.to_str().unwrap(), "--trace"]);
        assert_eq!(code, 0);
        assert_eq!(out, "1\n");
        assert!(err.contains("(main"));
    }

    #[test]
    fn unreachable_branch_reports_index() {
        let p = write_temp(
            "unreach.mel",
            "f : Int -> Int = fun n -> case n of 2.0 -> 0 ; x -> 0 end\nin f 1",
        );
        let (code, out, _err) = run_args(&["check", p.to_str().unwrap(), "--json"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"kind\":\"UnreachableBranch\""));
        assert!(out.contains("branch 1"));
    }
}
