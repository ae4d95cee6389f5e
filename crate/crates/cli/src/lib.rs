//! Command logic for the `fsec` binary. Every command returns an
//! [`Outcome`] instead of printing, so tests can drive it in-process.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsec_core::lrcheck::witness::parse_witness;
use fsec_core::typecheck::erase_env;
use fsec_core::{
    check_erni, parse, simple_type_of, subtype, trace, type_of, DomainSpec, ErniError, EvalError, Literal, Mode,
    ParseError, Prim, SecType, SourceProgram, TypeError, TypeErrorKind, Value, Verdict,
};
use serde_json::{json, Value as Json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_PARSE_ERROR: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_VIOLATED: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn out(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn err(code: i32, stderr: String) -> Self {
        Outcome { code, stdout: String::new(), stderr }
    }

    fn record(code: i32, format: Format, text: String, record: Json) -> Self {
        match format {
            Format::Text if code == EXIT_OK || code == EXIT_VIOLATED || code == EXIT_INCONCLUSIVE => {
                Outcome::out(code, text)
            }
            Format::Text => Outcome::err(code, text),
            Format::Structured => Outcome::out(code, format!("{record}\n")),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fsec",
    version,
    about = "Type checker, evaluator and noninterference checker for faceted existential security types"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the security type of a program.
    Check(CheckArgs),
    /// Evaluate a closed program.
    Run(RunArgs),
    /// Print every reduction step of a closed program.
    Trace(RunArgs),
    /// Search for a noninterference counterexample at the declared observation type.
    Erni(ErniArgs),
    /// Run the built-in property suites.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
    Witness,
}

#[derive(Args, Debug)]
struct CheckArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct RunArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Maximum number of reduction steps.
    #[arg(long, default_value_t = 100_000)]
    fuel: u64,
    /// Skip security typing; simple typing is still required.
    #[arg(long)]
    unchecked: bool,
}

#[derive(Args, Debug)]
struct ErniArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Witness file to replay; implies `--mode witness`.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace a primitive carrier, e.g. `Int=0..9`, `Bool=true`, `String=a,aa,""`.
    #[arg(long, value_parser = parse_carrier)]
    carrier: Vec<(Prim, Vec<Literal>)>,
    /// Maximum number of reduction steps per evaluation.
    #[arg(long, default_value_t = 100_000)]
    fuel: u64,
    /// Allow different representation types for unconstrained type variables.
    #[arg(long)]
    hetero: bool,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Parses `--carrier` values. Ranges are inclusive.
pub fn parse_carrier(s: &str) -> Result<(Prim, Vec<Literal>), String> {
    let (prim, rest) = s.split_once('=').ok_or("expected PRIM=VALUES")?;
    let prim = match prim.trim() {
        "Int" => Prim::Int,
        "Bool" => Prim::Bool,
        "String" => Prim::String,
        other => return Err(format!("unknown primitive type `{other}`")),
    };
    let rest = rest.trim();
    if prim == Prim::Int {
        if let Some((lo, hi)) = rest.split_once("..") {
            let lo: i64 = lo.trim().parse().map_err(|_| format!("bad integer `{lo}`"))?;
            let hi: i64 = hi.trim().parse().map_err(|_| format!("bad integer `{hi}`"))?;
            if hi < lo || hi - lo >= 1024 {
                return Err(format!("bad range {lo}..{hi}"));
            }
            return Ok((prim, (lo..=hi).map(Literal::Int).collect()));
        }
    }
    let mut lits = Vec::new();
    for item in rest.split(',') {
        let item = item.trim();
        let lit = match prim {
            Prim::Int => Literal::Int(item.parse().map_err(|_| format!("bad integer `{item}`"))?),
            Prim::Bool => Literal::Bool(item.parse().map_err(|_| format!("bad boolean `{item}`"))?),
            Prim::String => Literal::Str(item.trim_matches('"').to_string()),
        };
        if !lits.contains(&lit) {
            lits.push(lit);
        }
    }
    Ok((prim, lits))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome::err(EXIT_USAGE, text)
            } else {
                Outcome::out(EXIT_OK, text)
            }
        }
    }
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check(a) => cmd_check(&a.path, a.format),
        Command::Run(a) => cmd_run(&a, false),
        Command::Trace(a) => cmd_run(&a, true),
        Command::Erni(a) => cmd_erni(&a),
        Command::Selftest(a) => cmd_selftest(a.seed, a.format),
    }
}

fn display_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn load(path: &Path, command: &str, format: Format) -> Result<SourceProgram, Outcome> {
    let name = display_name(path);
    let text = std::fs::read_to_string(path).map_err(|e| {
        Outcome::record(
            EXIT_NO_INPUT,
            format,
            format!("{name}: cannot read file: {e}\n"),
            json!({"command": command, "file": name, "status": "io_error", "message": e.to_string()}),
        )
    })?;
    parse(&text).map_err(|e| parse_failure(command, &name, &e, format))
}

fn parse_failure(command: &str, name: &str, e: &ParseError, format: Format) -> Outcome {
    Outcome::record(
        EXIT_PARSE_ERROR,
        format,
        format!("{name}:{e}\n"),
        json!({
            "command": command, "file": name, "status": "parse_error",
            "line": e.span.line, "col": e.span.col, "message": e.to_string(),
        }),
    )
}

fn type_failure(command: &str, name: &str, e: &TypeError, format: Format) -> Outcome {
    Outcome::record(
        EXIT_TYPE_ERROR,
        format,
        format!("{name}:{e}\n"),
        json!({
            "command": command, "file": name, "status": "type_error", "kind": e.kind.name(),
            "line": e.span.line, "col": e.span.col, "message": e.message,
            "expected": e.expected, "found": e.found,
        }),
    )
}

fn security_type(prog: &SourceProgram) -> Result<SecType, TypeError> {
    let main = prog.resolved_main();
    let s = type_of(&prog.tyvars, &prog.input_env(), &main)?;
    if let Some(obs) = &prog.observe {
        if !subtype(&s, obs) {
            return Err(TypeError {
                kind: TypeErrorKind::Mismatch,
                span: main.span,
                message: "program type is not a subtype of the observation type".into(),
                expected: Some(obs.to_string()),
                found: Some(s.to_string()),
            });
        }
    }
    Ok(s)
}

pub fn cmd_check(path: &Path, format: Format) -> Outcome {
    let name = display_name(path);
    let prog = match load(path, "check", format) {
        Ok(p) => p,
        Err(o) => return o,
    };
    match security_type(&prog) {
        Ok(s) => Outcome::record(
            EXIT_OK,
            format,
            format!("{s}\n"),
            json!({"command": "check", "file": name, "status": "ok", "type": s.to_string()}),
        ),
        Err(e) => type_failure("check", &name, &e, format),
    }
}

fn cmd_run(a: &RunArgs, show_trace: bool) -> Outcome {
    let command = if show_trace { "trace" } else { "run" };
    let name = display_name(&a.path);
    let prog = match load(&a.path, command, a.format) {
        Ok(p) => p,
        Err(o) => return o,
    };
    if let Some((x, _)) = prog.inputs.first() {
        return Outcome::err(
            EXIT_USAGE,
            format!("{name}: `{command}` needs a closed program, but `{x}` is an input\n"),
        );
    }
    let main = prog.resolved_main();
    if let Err(e) = simple_type_of(&prog.tyvars.names(), &erase_env(&prog.input_env()), &main) {
        return type_failure(command, &name, &e, a.format);
    }
    if !a.unchecked {
        if let Err(e) = security_type(&prog) {
            return type_failure(command, &name, &e, a.format);
        }
    }
    let t = trace(&main, a.fuel);
    let mut text = String::new();
    if show_trace {
        for (i, e) in t.terms.iter().enumerate() {
            text.push_str(&format!("{i:>4}  {e}\n"));
        }
    }
    let steps = t.steps();
    let terms: Vec<String> = if show_trace { t.terms.iter().map(|e| e.to_string()).collect() } else { Vec::new() };
    let mut record = json!({"command": command, "file": name, "steps": steps});
    if show_trace {
        record["trace"] = json!(terms);
    }
    match &t.outcome {
        Ok(v) => {
            text.push_str(&format!("{v}\n"));
            record["status"] = json!("value");
            record["value"] = json!(v.to_string());
            Outcome::record(EXIT_OK, a.format, text, record)
        }
        Err(e) => {
            text.push_str(&format!("error: {e}\n"));
            match e {
                EvalError::FuelExhausted { .. } => record["status"] = json!("fuel_exhausted"),
                EvalError::Stuck { term, reason } => {
                    record["status"] = json!("stuck");
                    record["reason"] = json!(reason.to_string());
                    record["term"] = json!(term.to_string());
                }
            }
            match a.format {
                Format::Text => Outcome { code: EXIT_RUNTIME, stdout: text, stderr: String::new() },
                Format::Structured => Outcome::out(EXIT_RUNTIME, format!("{record}\n")),
            }
        }
    }
}

fn domain(prog: &SourceProgram, a: &ErniArgs) -> DomainSpec {
    let main = prog.resolved_main();
    let mut dom = DomainSpec::default();
    for (p, lits) in prog.carriers.iter().chain(&a.carrier) {
        dom.set_carrier(*p, lits);
    }
    dom.add_literals(&main.literals());
    dom.add_closures(&main);
    dom.fuel = a.fuel;
    dom.hetero = a.hetero;
    dom
}

fn pair_json(a: &Value, b: &Value) -> Json {
    json!([a.to_string(), b.to_string()])
}

fn verdict_json(name: &str, v: &Verdict, elapsed_ms: u128) -> Json {
    match v {
        Verdict::Holds { mode, rel_envs, substitutions } => json!({
            "command": "erni", "file": name, "verdict": "holds", "mode": mode,
            "relation_environments": rel_envs, "input_pairs": substitutions, "elapsed_ms": elapsed_ms,
        }),
        Verdict::Violated { rho, gamma, outputs } => json!({
            "command": "erni", "file": name, "verdict": "violated",
            "relations": rho.iter().map(|(x, e)| json!({
                "var": x, "left": e.t1.to_string(), "right": e.t2.to_string(),
                "pairs": e.rel.iter().map(|(a, b)| pair_json(a, b)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "inputs": gamma.bindings.iter().map(|(x, a, b)| json!({
                "name": x, "left": a.to_string(), "right": b.to_string(),
            })).collect::<Vec<_>>(),
            "outputs": outputs.as_ref().map(|(a, b)| pair_json(a, b)),
            "witness": fsec_core::lrcheck::witness::render_witness(rho, gamma, outputs.as_ref()),
            "elapsed_ms": elapsed_ms,
        }),
        Verdict::Inconclusive { reason } => json!({
            "command": "erni", "file": name, "verdict": "inconclusive", "reason": reason, "elapsed_ms": elapsed_ms,
        }),
    }
}

fn cmd_erni(a: &ErniArgs) -> Outcome {
    let name = display_name(&a.path);
    let prog = match load(&a.path, "erni", a.format) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let Some(obs) = prog.observe.clone() else {
        return Outcome::err(EXIT_USAGE, format!("{name}: `erni` needs an `observe` declaration\n"));
    };
    let mode = match (a.mode, &a.witness) {
        (Some(ModeArg::Witness) | None, Some(w)) => {
            let wname = display_name(w);
            let text = match std::fs::read_to_string(w) {
                Ok(t) => t,
                Err(e) => return Outcome::err(EXIT_NO_INPUT, format!("{wname}: cannot read file: {e}\n")),
            };
            match parse_witness(&text) {
                Ok((rho, gamma)) => Mode::Witness { rho, gamma },
                Err(e) => return parse_failure("erni", &wname, &e, a.format),
            }
        }
        (Some(ModeArg::Witness), None) => {
            return Outcome::err(EXIT_USAGE, "`--mode witness` needs `--witness FILE`\n".into());
        }
        (Some(_), Some(_)) => {
            return Outcome::err(EXIT_USAGE, "`--witness` can only be used in witness mode\n".into());
        }
        (Some(ModeArg::Sampled), None) => Mode::Sampled { samples: a.samples, seed: a.seed },
        (Some(ModeArg::Exhaustive) | None, None) => Mode::Exhaustive,
    };
    let dom = domain(&prog, a);
    let main = prog.resolved_main();
    let start = Instant::now();
    let result = check_erni(&prog.tyvars, &prog.input_env(), &main, &obs, &dom, &mode);
    let elapsed = start.elapsed().as_millis();
    match result {
        Ok(v) => {
            let code = match &v {
                Verdict::Holds { .. } => EXIT_OK,
                Verdict::Violated { .. } => EXIT_VIOLATED,
                Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
            };
            Outcome::record(
                code,
                a.format,
                {
                    let t = v.to_string();
                    if t.ends_with('\n') {
                        t
                    } else {
                        format!("{t}\n")
                    }
                },
                verdict_json(&name, &v, elapsed),
            )
        }
        Err(ErniError::NotSimplyTyped(e)) | Err(ErniError::NotSecurityTyped(e)) => {
            type_failure("erni", &name, &e, a.format)
        }
        Err(e) => Outcome::record(
            EXIT_TYPE_ERROR,
            a.format,
            format!("{name}: {e}\n"),
            json!({"command": "erni", "file": name, "status": "error", "message": e.to_string()}),
        ),
    }
}

fn cmd_selftest(seed: u64, format: Format) -> Outcome {
    let reports = fsec_core::selftest::run_all(seed);
    let ok = reports.iter().all(|r| r.passed());
    let mut out = String::new();
    for r in &reports {
        match format {
            Format::Text => out.push_str(&format!("{r}\n")),
            Format::Structured => {
                let rec = json!({
                    "command": "selftest", "suite": r.name, "seed": seed,
                    "passed": r.passed(), "checked": r.checked, "failures": r.failures,
                });
                out.push_str(&format!("{rec}\n"));
            }
        }
    }
    Outcome::out(if ok { EXIT_OK } else { EXIT_TYPE_ERROR }, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carrier_flags() {
        assert_eq!(
            parse_carrier("Int=0..2").unwrap(),
            (Prim::Int, vec![Literal::Int(0), Literal::Int(1), Literal::Int(2)])
        );
        assert_eq!(parse_carrier("Int=-1, 5").unwrap().1, vec![Literal::Int(-1), Literal::Int(5)]);
        assert_eq!(parse_carrier("Bool=true").unwrap().1, vec![Literal::Bool(true)]);
        assert_eq!(
            parse_carrier("String=a,aa,\"\"").unwrap().1,
            vec![Literal::Str("a".into()), Literal::Str("aa".into()), Literal::Str(String::new())]
        );
        assert!(parse_carrier("Float=1").is_err());
        assert!(parse_carrier("Int=3..1").is_err());
        assert!(parse_carrier("Int").is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run(["fsec", "check"]).code, EXIT_USAGE);
        assert_eq!(run(["fsec", "check", "x.fsec", "--bogus"]).code, EXIT_USAGE);
        assert_eq!(run(["fsec", "frobnicate"]).code, EXIT_USAGE);
        assert_eq!(run(["fsec", "--help"]).code, EXIT_OK);
    }

    #[test]
    fn missing_file() {
        let o = run(["fsec", "check", "/nonexistent/file.fsec"]);
        assert_eq!(o.code, EXIT_NO_INPUT);
        assert!(o.stderr.contains("file.fsec"));
    }
}
