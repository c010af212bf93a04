//! Command-line front end: argument parsing, run configuration, and the
//! versioned JSON report envelope. Exit codes: 0 pass, 1 refuted,
//! 2 inconclusive (fuel or truncation), 3 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::henceforth::{henceforth, henceforth_rel, up_to_box_check, DirectPredicates, HenceforthError};
use crate::law::{flatness_check, resolve_law, simplicity_check, LawError, LawSpec, RankAssignment};
use crate::predicates::{invariant_check, logical_check, predicate_from_json, predicate_to_json, PredError, Predicate};
use crate::semantics::{EvalError, GammaN, Model, TraceEnd, DEFAULT_FUEL};
use crate::stlc::{self, LTraceEnd, LUniverse};
use crate::syntax::{close_universe, parse_term_in, Universe};
use crate::wtcheck::{respects_weak_check, sn_theorem_report, Verdict};

pub const SCHEMA_VERSION: u32 = 1;
pub const FUEL_ENV: &str = "HOGSOS_FUEL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Pred(#[from] PredError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Henceforth(#[from] HenceforthError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Refuted,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Refuted => 1,
            Status::Inconclusive => 2,
        }
    }

    /// Downgrades a pass to inconclusive when the universe is truncated.
    fn relative_to(self, closed: bool) -> Status {
        if self == Status::Pass && !closed {
            Status::Inconclusive
        } else {
            self
        }
    }
}

pub const EXIT_USAGE: i32 = 3;

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Parser, Debug)]
#[command(name = "hogsos", version, about = "Operational semantics, logical predicates and termination certificates for typed combinatory logic and STLC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by the combinatory-logic subcommands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Built-in law name (xtcl-cbn, xtcl-cbv, xtcl-nd) or a rule file
    #[arg(long, default_value = "xtcl-cbn")]
    pub law: String,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub type_bound: usize,
    #[arg(long, default_value_t = 7, value_parser = positive)]
    pub size_bound: usize,
    /// Largest enumerated term used as a function argument
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub label_bound: usize,
    #[arg(long, env = FUEL_ENV, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
    /// Maximum number of terms added by universe closure [default: 200000,
    /// or 0 for nondeterministic laws]
    #[arg(long)]
    pub closure_fuel: Option<usize>,
    /// Accepted and recorded; every analysis is deterministic
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Nondeterministic reduct graphs grow too fast for closure to finish at
/// useful bounds, so those laws default to the enumerated terms alone.
pub fn default_closure_fuel(law: &LawSpec) -> usize {
    if law.powerset {
        0
    } else {
        200_000
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StlcConfig {
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub type_bound: usize,
    #[arg(long, default_value_t = 6, value_parser = positive)]
    pub size_bound: usize,
    /// Longest enumerated context
    #[arg(long, default_value_t = 2)]
    pub ctx_len: usize,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub label_bound: usize,
    #[arg(long, env = FUEL_ENV, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
    #[arg(long, default_value_t = 200_000)]
    pub closure_fuel: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate and close the term universe, printing statistics
    Enumerate {
        #[command(flatten)]
        config: RunConfig,
        /// Also list the members of every type
        #[arg(long)]
        list: bool,
    },
    /// Print the reduction trace of a term
    Trace {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long)]
        term: String,
        /// Emit the JSON report instead of the plain trace
        #[arg(long)]
        json: bool,
    },
    /// Check that P is an S-relative invariant
    CheckInvariant {
        #[command(flatten)]
        config: RunConfig,
        /// Predicate name (top, bottom, down, box_down, plotkin, tait) or JSON file
        #[arg(long)]
        s: String,
        #[arg(long)]
        p: String,
    },
    /// Check that a predicate is logical
    CheckLogical {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long)]
        pred: String,
    },
    /// Compute □P, or □(S,P) with --relative
    Henceforth {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, default_value = "down")]
        pred: String,
        #[arg(long)]
        relative: Option<String>,
        /// Include the resulting predicate in the report
        #[arg(long)]
        emit: bool,
    },
    /// Certify termination by induction up to □
    CertifySn {
        #[command(flatten)]
        config: RunConfig,
        /// JSON object mapping operator names to ranks
        #[arg(long)]
        rank: Option<PathBuf>,
    },
    /// Check relative flatness under a rank assignment
    Flatness {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long)]
        rank: Option<PathBuf>,
    },
    /// Check that the law is simple
    Simplicity {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Check that the law respects weak transitions
    WeakRespect {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        /// Witness budget; defaults to the fuel
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// All hypotheses of the strong normalization theorem plus direct evaluation
    SnReport {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long)]
        rank: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Simply typed λ-calculus
    #[command(subcommand)]
    Stlc(StlcCommand),
}

#[derive(Subcommand, Debug)]
pub enum StlcCommand {
    /// Certify type safety by induction up to ■
    CertifySafety {
        #[command(flatten)]
        config: StlcConfig,
    },
    /// Certify termination by induction up to ■
    CertifySn {
        #[command(flatten)]
        config: StlcConfig,
    },
    /// Print the reduction trace of a closed λ-term
    Trace {
        #[arg(long)]
        term: String,
        #[arg(long, env = FUEL_ENV, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
}

/// What a subcommand produced.
pub struct Outcome {
    pub status: Status,
    /// The full report.
    pub report: Value,
    /// Plain-text rendering printed instead of the report, if any.
    pub text: Option<String>,
    pub output: Option<PathBuf>,
}

impl Command {
    fn xtcl_config_mut(&mut self) -> Option<&mut RunConfig> {
        match self {
            Command::Enumerate { config, .. }
            | Command::Trace { config, .. }
            | Command::CheckInvariant { config, .. }
            | Command::CheckLogical { config, .. }
            | Command::Henceforth { config, .. }
            | Command::CertifySn { config, .. }
            | Command::Flatness { config, .. }
            | Command::Simplicity { config }
            | Command::WeakRespect { config, .. }
            | Command::SnReport { config, .. } => Some(config),
            Command::Stlc(_) => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Enumerate { .. } => "enumerate",
            Command::Trace { .. } => "trace",
            Command::CheckInvariant { .. } => "check-invariant",
            Command::CheckLogical { .. } => "check-logical",
            Command::Henceforth { .. } => "henceforth",
            Command::CertifySn { .. } => "certify-sn",
            Command::Flatness { .. } => "flatness",
            Command::Simplicity { .. } => "simplicity",
            Command::WeakRespect { .. } => "weak-respect",
            Command::SnReport { .. } => "sn-report",
            Command::Stlc(StlcCommand::CertifySafety { .. }) => "stlc certify-safety",
            Command::Stlc(StlcCommand::CertifySn { .. }) => "stlc certify-sn",
            Command::Stlc(StlcCommand::Trace { .. }) => "stlc trace",
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// A built-in law name, or the path of a rule file.
pub fn load_law_selector(sel: &str) -> Result<LawSpec, CliError> {
    if let Some(l) = LawSpec::builtin(sel) {
        return Ok(l);
    }
    let path = Path::new(sel);
    if !path.exists() {
        return Err(CliError::Usage(format!("`{sel}` is neither a built-in law nor a rule file")));
    }
    Ok(resolve_law(&read(path)?)?)
}

fn load_rank(path: Option<&Path>, law: &LawSpec) -> Result<RankAssignment, CliError> {
    match path {
        Some(p) => Ok(RankAssignment::from_json(&read(p)?)?),
        None => Ok(RankAssignment::standard(law)),
    }
}

pub fn build_universe(model: &Model, c: &RunConfig) -> Result<Universe, CliError> {
    let u = Universe::enumerate(model.law().signature(), c.size_bound, c.type_bound).with_label_bound(c.label_bound);
    let fuel = c.closure_fuel.unwrap_or_else(|| default_closure_fuel(model.law()));
    Ok(close_universe(u, &model.step_fn(), fuel)?)
}

/// Termination within fuel on every member (every maximal trace, for
/// nondeterministic laws), with the number of members that ran out of fuel.
pub fn termination(model: &Model, u: &Universe, fuel: usize) -> Result<(Predicate, usize), EvalError> {
    let mut exhausted = 0;
    let mut bits = Vec::with_capacity(u.len());
    let mut nd = model.nd_explorer();
    for t in u.terms() {
        let ok = if model.law().powerset {
            let o = nd.explore(t, fuel)?;
            exhausted += o.fuel_exhausted as usize;
            o.all_terminate
        } else {
            match model.gamma_n(t, fuel)? {
                GammaN::Value { .. } => true,
                GammaN::Stuck(_) => false,
                GammaN::Reducing(_) => {
                    exhausted += 1;
                    false
                }
            }
        };
        bits.push(ok);
    }
    Ok((Predicate::from_bits(bits), exhausted))
}

/// A predicate by name, or read from a JSON file.
pub fn load_predicate(sel: &str, model: &Model, u: &Universe, fuel: usize) -> Result<Predicate, CliError> {
    Ok(match sel {
        "top" => Predicate::full(u.len()),
        "bottom" => Predicate::empty(u.len()),
        "down" => termination(model, u, fuel)?.0,
        "box_down" | "plotkin" | "tait" => DirectPredicates::new(model, u, fuel).table(sel)?,
        path => predicate_from_json(&read(Path::new(path))?, u)?,
    })
}

fn status_of(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Refuted
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

struct Body {
    status: Status,
    result: Value,
    universe: Option<Value>,
    text: Option<String>,
}

fn body(status: Status, result: Value, universe: Option<Value>) -> Body {
    Body { status, result, universe, text: None }
}

/// Runs one subcommand.
pub fn run(mut cli: Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    if let Some(c) = cli.command.xtcl_config_mut() {
        if c.closure_fuel.is_none() {
            c.closure_fuel = Some(default_closure_fuel(&load_law_selector(&c.law)?));
        }
    }
    let name = cli.command.name();
    let (config, output) = match &cli.command {
        Command::Enumerate { config, .. }
        | Command::Trace { config, .. }
        | Command::CheckInvariant { config, .. }
        | Command::CheckLogical { config, .. }
        | Command::Henceforth { config, .. }
        | Command::CertifySn { config, .. }
        | Command::Flatness { config, .. }
        | Command::Simplicity { config }
        | Command::WeakRespect { config, .. }
        | Command::SnReport { config, .. } => (to_value(config), config.output.clone()),
        Command::Stlc(StlcCommand::CertifySafety { config } | StlcCommand::CertifySn { config }) => {
            (to_value(config), config.output.clone())
        }
        Command::Stlc(StlcCommand::Trace { fuel, .. }) => (json!({ "fuel": fuel }), None),
    };
    let extra = match &cli.command {
        Command::Trace { term, .. } | Command::Stlc(StlcCommand::Trace { term, .. }) => json!({ "term": term }),
        Command::CheckInvariant { s, p, .. } => json!({ "s": s, "p": p }),
        Command::CheckLogical { pred, .. } => json!({ "pred": pred }),
        Command::Henceforth { pred, relative, .. } => json!({ "pred": pred, "relative": relative }),
        Command::CertifySn { rank, .. } | Command::Flatness { rank, .. } => json!({ "rank": rank }),
        Command::WeakRespect { n_max, k_max, .. } => json!({ "n_max": n_max, "k_max": k_max }),
        Command::SnReport { rank, n_max, k_max, .. } => json!({ "rank": rank, "n_max": n_max, "k_max": k_max }),
        _ => json!({}),
    };
    let b = match cli.command {
        Command::Stlc(sub) => run_stlc(sub)?,
        other => run_xtcl(other)?,
    };
    let mut config = config;
    if let (Value::Object(c), Value::Object(e)) = (&mut config, extra) {
        c.extend(e);
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "hogsos",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "config": config,
        "status": b.status,
        "universe": b.universe,
        "result": b.result,
        "timing_ms": start.elapsed().as_millis() as u64,
    });
    Ok(Outcome { status: b.status, report, text: b.text, output })
}

fn run_xtcl(cmd: Command) -> Result<Body, CliError> {
    let config = match &cmd {
        Command::Enumerate { config, .. }
        | Command::Trace { config, .. }
        | Command::CheckInvariant { config, .. }
        | Command::CheckLogical { config, .. }
        | Command::Henceforth { config, .. }
        | Command::CertifySn { config, .. }
        | Command::Flatness { config, .. }
        | Command::Simplicity { config }
        | Command::WeakRespect { config, .. }
        | Command::SnReport { config, .. } => config.clone(),
        Command::Stlc(_) => unreachable!("handled by run_stlc"),
    };
    let law = load_law_selector(&config.law)?;
    let model = Model::new(law);
    let fuel = config.fuel;
    match cmd {
        Command::Enumerate { list, .. } => {
            let u = build_universe(&model, &config)?;
            let mut result = json!({});
            if list {
                result = predicate_to_json(&Predicate::full(u.len()), &u);
            }
            Ok(body(status_of(true).relative_to(u.is_closed()), result, Some(to_value(&u.stats()))))
        }
        Command::Trace { term, json, .. } => {
            let t = parse_term_in(&term, &model.law().signature()).map_err(|e| CliError::Usage(e.to_string()))?;
            if model.law().powerset {
                let o = model.nd_traces(&t, fuel)?;
                let status = if o.all_terminate {
                    Status::Pass
                } else if o.fuel_exhausted {
                    Status::Inconclusive
                } else {
                    Status::Refuted
                };
                return Ok(body(status, to_value(&o), None));
            }
            let tr = model.reduce_trace(&t, fuel)?;
            let status = match tr.end {
                TraceEnd::Done | TraceEnd::Fun => Status::Pass,
                TraceEnd::Stuck => Status::Refuted,
                TraceEnd::Fuel => Status::Inconclusive,
            };
            let result = json!({
                "terms": tr.terms.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "steps": tr.steps(),
                "end": tr.end,
            });
            let mut b = body(status, result, None);
            if !json {
                b.text = Some(tr.to_string());
            }
            Ok(b)
        }
        Command::CheckInvariant { s, p, .. } => {
            let u = build_universe(&model, &config)?;
            let s = load_predicate(&s, &model, &u, fuel)?;
            let p = load_predicate(&p, &model, &u, fuel)?;
            let r = invariant_check(&model, &u, &s, &p)?;
            Ok(body(status_of(r.holds).relative_to(u.is_closed()), to_value(&r), Some(to_value(&u.stats()))))
        }
        Command::CheckLogical { pred, .. } => {
            let u = build_universe(&model, &config)?;
            let p = load_predicate(&pred, &model, &u, fuel)?;
            let r = logical_check(&model, &u, &p)?;
            Ok(body(status_of(r.holds).relative_to(u.is_closed()), to_value(&r), Some(to_value(&u.stats()))))
        }
        Command::Henceforth { pred, relative, emit, .. } => {
            let u = build_universe(&model, &config)?;
            let p = load_predicate(&pred, &model, &u, fuel)?;
            let (count, predicate, details) = match relative {
                Some(s) => {
                    let s = load_predicate(&s, &model, &u, fuel)?;
                    let g = henceforth_rel(&model, &u, &s, &p)?;
                    (g.count(), g, json!({}))
                }
                None => match henceforth(&model, &u, &p) {
                    Ok(h) => (h.result_count, h.result.clone(), to_value(&h)),
                    Err(HenceforthError::NoConvergence { limit }) => {
                        let r = json!({ "converged": false, "limit": limit });
                        return Ok(body(Status::Inconclusive, r, Some(to_value(&u.stats()))));
                    }
                    Err(e) => return Err(e.into()),
                },
            };
            let mut result = json!({
                "converged": true,
                "input_count": p.count(),
                "result_count": count,
                "details": details,
            });
            if emit {
                result["predicate"] = predicate_to_json(&predicate, &u);
            }
            Ok(body(Status::Pass.relative_to(u.is_closed()), result, Some(to_value(&u.stats()))))
        }
        Command::CertifySn { rank, .. } => {
            let rank = load_rank(rank.as_deref(), model.law())?;
            let u = build_universe(&model, &config)?;
            let (down, exhausted) = termination(&model, &u, fuel)?;
            let r = up_to_box_check(&model, &rank, &u, &down)?;
            let ok = r.certified && r.conclusion_confirmed;
            let status = if ok {
                Status::Pass.relative_to(u.is_closed())
            } else if exhausted > 0 {
                Status::Inconclusive
            } else {
                Status::Refuted
            };
            let mut result = to_value(&r);
            result["fuel_exhausted"] = json!(exhausted);
            result["verdict"] = json!(if ok { "SN" } else { "not certified" });
            Ok(body(status, result, Some(to_value(&u.stats()))))
        }
        Command::Flatness { rank, .. } => {
            let rank = load_rank(rank.as_deref(), model.law())?;
            let r = flatness_check(model.law(), &rank)?;
            Ok(body(status_of(r.accepted), to_value(&r), None))
        }
        Command::Simplicity { .. } => {
            let r = simplicity_check(model.law());
            Ok(body(status_of(r.accepted), to_value(&r), None))
        }
        Command::WeakRespect { n_max, k_max, .. } => {
            let u = build_universe(&model, &config)?;
            let r = respects_weak_check(&model, &u, n_max, k_max.unwrap_or(fuel))?;
            let status = match r.verdict {
                Verdict::Pass => Status::Pass.relative_to(u.is_closed()),
                Verdict::Fail => Status::Refuted,
                Verdict::Inconclusive => Status::Inconclusive,
            };
            Ok(body(status, to_value(&r), Some(to_value(&u.stats()))))
        }
        Command::SnReport { rank, n_max, k_max, .. } => {
            let rank = load_rank(rank.as_deref(), model.law())?;
            let u = build_universe(&model, &config)?;
            let r = sn_theorem_report(&model, &rank, &u, n_max, k_max.unwrap_or(fuel), fuel)?;
            let (_, exhausted) = termination(&model, &u, fuel)?;
            let status = if r.certified {
                Status::Pass.relative_to(u.is_closed())
            } else if r.weak_respect.verdict == Verdict::Inconclusive || exhausted > 0 {
                Status::Inconclusive
            } else {
                Status::Refuted
            };
            Ok(body(status, to_value(&r), Some(to_value(&u.stats()))))
        }
        Command::Stlc(_) => unreachable!("handled by run_stlc"),
    }
}

fn run_stlc(cmd: StlcCommand) -> Result<Body, CliError> {
    match cmd {
        StlcCommand::Trace { term, fuel } => {
            let t = stlc::parse_lterm(&term, &[]).map_err(|e| CliError::Usage(e.to_string()))?;
            let ty = stlc::typecheck(&[], &t).map_err(|e| CliError::Usage(e.to_string()))?;
            let tr = stlc::ltrace(&t, fuel);
            let status = match tr.end {
                LTraceEnd::Done | LTraceEnd::Fun => Status::Pass,
                LTraceEnd::Stuck => Status::Refuted,
                LTraceEnd::Fuel => Status::Inconclusive,
            };
            let result = json!({
                "type": ty.to_string(),
                "terms": tr.terms.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "end": tr.end,
            });
            Ok(Body { status, result, universe: None, text: Some(tr.to_string()) })
        }
        StlcCommand::CertifySafety { config } => stlc_certify(&config, "Safe", stlc::safe_pred),
        StlcCommand::CertifySn { config } => stlc_certify(&config, "terminates", stlc::lterm_down),
    }
}

fn stlc_certify(
    c: &StlcConfig,
    name: &str,
    pred: fn(&stlc::LTerm, usize) -> crate::henceforth::Direct,
) -> Result<Body, CliError> {
    let mut u = LUniverse::enumerate(c.size_bound, c.type_bound, c.ctx_len, c.label_bound);
    u.close(c.closure_fuel);
    let mut exhausted = 0;
    let p = u.predicate(|_, t| match pred(t, c.fuel) {
        crate::henceforth::Direct::Holds => true,
        crate::henceforth::Direct::Fails => false,
        crate::henceforth::Direct::Fuel => {
            exhausted += 1;
            false
        }
    });
    let r = stlc::up_to_black_check(&u, name, &p)?;
    let ok = r.certified && r.conclusion_confirmed;
    let status = if ok {
        Status::Pass.relative_to(u.is_closed())
    } else if exhausted > 0 {
        Status::Inconclusive
    } else {
        Status::Refuted
    };
    let mut result = to_value(&r);
    result["fuel_exhausted"] = json!(exhausted);
    Ok(Body { status, result, universe: Some(to_value(&u.stats())), text: None })
}

/// Parses `args`, runs, writes the report, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli) {
        Ok(out) => {
            let rendered = match &out.text {
                Some(t) => t.clone(),
                None => format!("{}\n", serde_json::to_string_pretty(&out.report).expect("reports serialize")),
            };
            match &out.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &rendered) {
                        eprintln!("error: {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                }
                None => {
                    let _ = std::io::stdout().write_all(rendered.as_bytes());
                }
            }
            out.status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<Outcome, CliError> {
        let mut v = vec!["hogsos"];
        v.extend_from_slice(args);
        run(Cli::try_parse_from(v).unwrap())
    }

    #[test]
    fn trace_text() {
        let out = run_args(&["trace", "--term", "(app I[unit] e)"]).unwrap();
        assert_eq!(out.status, Status::Pass);
        assert_eq!(out.text.unwrap(), "(app I[unit] e)\ne ✓\n");
        assert_eq!(out.report["schema_version"], 1);
    }

    #[test]
    fn bad_term_is_usage() {
        assert!(matches!(run_args(&["trace", "--term", "(app e e)"]), Err(CliError::Usage(_))));
        assert!(matches!(run_args(&["simplicity", "--law", "no-such-law"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn zero_bound_rejected() {
        assert!(Cli::try_parse_from(["hogsos", "enumerate", "--size-bound", "0"]).is_err());
    }

    #[test]
    fn small_analyses() {
        let small = ["--size-bound", "4", "--type-bound", "3", "--label-bound", "3"];
        for cmd in [&["certify-sn"][..], &["sn-report"], &["weak-respect"], &["check-logical", "--pred", "down"], &["henceforth"]] {
            let mut args = cmd.to_vec();
            args.extend_from_slice(&small);
            let out = run_args(&args).unwrap();
            assert_eq!(out.status, Status::Pass, "{cmd:?}");
        }
        let tiny = ["--size-bound", "3", "--type-bound", "2"];
        let out = run_args(&[&["check-invariant", "--s", "bottom", "--p", "top"][..], &tiny].concat()).unwrap();
        assert_eq!(out.status, Status::Pass);
        let file = std::env::temp_dir().join(format!("hogsos-cli-{}.json", std::process::id()));
        std::fs::write(&file, r#"{"unit": ["(app I[unit] e)"]}"#).unwrap();
        let f = file.to_str().unwrap();
        let out = run_args(&[&["check-invariant", "--s", "top", "--p", f][..], &tiny].concat()).unwrap();
        std::fs::remove_file(&file).unwrap();
        assert_eq!(out.status, Status::Refuted);
        assert_eq!(out.report["result"]["violations"][0]["term"], "(app I[unit] e)");
    }

    #[test]
    fn stlc_commands() {
        let out = run_args(&["stlc", "trace", "--term", r"(\x:unit. x ())"]).unwrap();
        assert_eq!(out.text.unwrap(), "(\\x0:unit. x0 ())\n() ✓\n");
        let out = run_args(&["stlc", "certify-safety", "--size-bound", "4", "--type-bound", "2"]).unwrap();
        assert_eq!(out.status, Status::Pass);
        assert!(matches!(run_args(&["stlc", "trace", "--term", "(() ())"]), Err(CliError::Usage(_))));
    }
}
