//! Subcommand dispatch.
//!
//! Exit codes: 0 for positive outcomes, 1 for negative verdicts (target
//! not covered, search exhausted, validation findings, a bounded-false
//! formula, failing suites), 2 for usage and parse errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tasynth_core::cover::{
    compositions, covers_from, ta_covers_report, CoverVerdict, CoverWitness, SearchBounds,
};
use tasynth_core::pad::{self, parse_formula, parse_poly};
use tasynth_core::reduction::{compile_formula, nonneg_to_general};
use tasynth_core::sketch::{collect_indeterminates, instantiate, Assignment, SketchAutomaton};
use tasynth_core::suites;
use tasynth_core::synth::{synthesize, verify_candidate, Mode, SynthesisQuery, SynthesisVerdict};
use tasynth_core::ta::{self, Configuration, TaError, ThresholdAutomaton, Valuation};

use crate::format::{parse_document, parse_ta, print_sketch};
use crate::models::{builtin_model, MODEL_NAMES};
use crate::report::Report;

#[derive(Parser)]
#[command(
    name = "tasynth",
    version,
    about = "Threshold automata: exact semantics, coverability, sketch compilation and coefficient search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Built-in model name (st87, st87-sketch, fig7).
    #[arg(long, conflicts_with = "file")]
    model: Option<String>,
    /// Automaton document to load.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Indeterminate assignment `name=value`; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Nonneg,
    Integer,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemma1,
    Lemma2,
    Monotonicity,
    ThirdPhase,
    Wrapup,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check an automaton document or built-in model for structural defects.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Print the canonical document form.
    Print {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Apply a run of rule ids to an initial configuration.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Parameter value `name=value`; repeatable, must cover all parameters.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Initial process count `location=count`; repeatable.
        #[arg(long = "at", value_name = "LOC=COUNT")]
        at: Vec<String>,
        /// Rule ids, whitespace or comma separated.
        #[arg(long)]
        run: String,
    },
    /// Search for a covering run.
    Cover {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        target: String,
        /// Bound on every parameter when enumerating valuations.
        #[arg(long, default_value_t = 4)]
        param_bound: i64,
        /// Maximum run length; defaults to the exhaustive bound for acyclic
        /// automata and is required for cyclic ones.
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_configs: usize,
        /// Pin the parameter valuation instead of enumerating; repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Pin the initial process counts (requires --param); repeatable.
        #[arg(long = "at", value_name = "LOC=COUNT")]
        at: Vec<String>,
        /// Worker threads for the valuation sweep.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compile a formula into a sketch document.
    Compile {
        #[arg(long)]
        formula: String,
        /// Also apply the non-negative-to-general wrap-up gadget.
        #[arg(long)]
        general: bool,
    },
    /// Bounded validity oracle for a formula.
    Oracle {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 3)]
        bx: i64,
        #[arg(long, default_value_t = 3)]
        by: i64,
    },
    /// Rewrite a general divisibility `f | g` into the fragment.
    Lift {
        /// The dividing polynomial f, over x variables.
        #[arg(long)]
        divisor: String,
        /// The divided polynomial g, over x and y variables.
        #[arg(long)]
        dividend: String,
    },
    /// Run the grid-equivalence suites.
    LemmaCheck {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Override the grid bound of the selected suites.
        #[arg(long)]
        max: Option<i64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 20260217)]
        seed: u64,
    },
    /// Search for an assignment under which the target is not coverable.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2)]
        assign_bound: i64,
        #[arg(long, default_value_t = 4)]
        param_bound: i64,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_configs: usize,
    },
}

/// A usage or parse failure; always exits with status 2.
struct CmdError(String);

impl<T: std::fmt::Display> From<T> for CmdError {
    fn from(err: T) -> Self {
        CmdError(err.to_string())
    }
}

type CmdResult = Result<i32, CmdError>;

fn load_sketch(args: &ModelArgs) -> Result<SketchAutomaton, CmdError> {
    match (&args.model, &args.file) {
        (Some(name), None) => builtin_model(name).ok_or_else(|| {
            CmdError(format!(
                "unknown model `{name}`; built-ins: {}",
                MODEL_NAMES.join(", ")
            ))
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError(format!("{}: {e}", path.display())))?;
            parse_ta(&text).map_err(|errors| {
                CmdError(
                    errors
                        .iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join("; "),
                )
            })
        }
        _ => Err(CmdError("pass exactly one of --model or --file".into())),
    }
}

fn parse_pairs(pairs: &[String], what: &str) -> Result<Vec<(String, i64)>, CmdError> {
    pairs
        .iter()
        .map(|pair| {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| CmdError(format!("{what} `{pair}` is not NAME=VALUE")))?;
            let value = value
                .parse::<i64>()
                .map_err(|_| CmdError(format!("{what} `{pair}` has a non-integer value")))?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}

fn parse_assignment(set: &[String]) -> Result<Assignment, CmdError> {
    Ok(Assignment(parse_pairs(set, "--set")?.into_iter().collect()))
}

fn instantiated(args: &ModelArgs) -> Result<ThresholdAutomaton, CmdError> {
    let sketch = load_sketch(args)?;
    let mu = parse_assignment(&args.set)?;
    let missing: Vec<String> = collect_indeterminates(&sketch)
        .into_iter()
        .filter(|name| mu.get(name).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(CmdError(format!(
            "indeterminates without --set value: {}",
            missing.join(", ")
        )));
    }
    instantiate(&sketch, &mu).map_err(|e| CmdError(e.to_string()))
}

fn fmt_valuation(v: &Valuation, order: &[String]) -> String {
    order
        .iter()
        .filter_map(|name| v.get(name).map(|value| format!("{name}={value}")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_nonzero(v: &Valuation, order: &[String]) -> String {
    let parts: Vec<String> = order
        .iter()
        .filter_map(|name| match v.get(name) {
            Some(&value) if value != 0 => Some(format!("{name}={value}")),
            _ => None,
        })
        .collect();
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(" ")
    }
}

fn witness_records(report: &mut Report, ta: &ThresholdAutomaton, witness: &CoverWitness) {
    report.push("witness.p", fmt_valuation(&witness.p, &ta.env.params));
    report.push(
        "witness.kappa0",
        fmt_nonzero(&witness.kappa0, &ta.locations),
    );
    report.push(
        "witness.run",
        if witness.run.is_empty() {
            "-".to_string()
        } else {
            witness.run.join(" ")
        },
    );
    report.push("witness.length", witness.run.len());
}

fn model_records(report: &mut Report, args: &ModelArgs) {
    if let Some(name) = &args.model {
        report.push("model", name);
    }
    if let Some(path) = &args.file {
        report.push("file", path.display());
    }
    if !args.set.is_empty() {
        report.push("assignment", args.set.join(" "));
    }
}

fn cmd_validate<W: Write>(out: &mut W, args: &ModelArgs) -> CmdResult {
    let findings: Vec<String> = match (&args.model, &args.file) {
        (Some(name), None) => {
            let sketch =
                builtin_model(name).ok_or_else(|| CmdError(format!("unknown model `{name}`")))?;
            tasynth_core::sketch::validate_sketch(&sketch)
                .iter()
                .map(|d| d.to_string())
                .collect()
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError(format!("{}: {e}", path.display())))?;
            let (_, diagnostics) = parse_document(&text).map_err(|errors| {
                CmdError(
                    errors
                        .iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join("; "),
                )
            })?;
            diagnostics.iter().map(|d| d.to_string()).collect()
        }
        _ => return Err(CmdError("pass exactly one of --model or --file".into())),
    };
    let mut report = Report::new();
    report.push("command", "validate");
    model_records(&mut report, args);
    report.push("findings", findings.len());
    for (i, finding) in findings.iter().enumerate() {
        report.push(&format!("finding.{i}"), finding);
    }
    write!(out, "{}", report.to_text())?;
    Ok(if findings.is_empty() { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_cover<W: Write>(
    out: &mut W,
    args: &ModelArgs,
    target: &str,
    param_bound: i64,
    horizon: Option<u64>,
    max_configs: usize,
    params: &[String],
    at: &[String],
    jobs: usize,
) -> CmdResult {
    let ta = instantiated(args)?;
    if !ta.locations.contains(&target.to_string()) {
        return Err(CmdError(format!("unknown target location `{target}`")));
    }
    let mut report = Report::new();
    report.push("command", "cover");
    model_records(&mut report, args);
    report.push("target", target);

    let exit = if params.is_empty() {
        if !at.is_empty() {
            return Err(CmdError("--at requires --param".into()));
        }
        let mut bounds = SearchBounds::new(param_bound).with_max_configs(max_configs);
        if let Some(h) = horizon {
            bounds = bounds.with_horizon(h);
        }
        let result =
            ta_covers_report(&ta, target, &bounds, jobs).map_err(|e| CmdError(e.to_string()))?;
        report.push("valuations.checked", result.valuations_checked);
        report.push("start-points.checked", result.start_points_checked);
        for (i, d) in result.diagnostics.iter().enumerate() {
            report.push(&format!("diagnostic.{i}"), d);
        }
        match &result.verdict {
            CoverVerdict::Covered(witness) => {
                report.push("verdict", "covered");
                witness_records(&mut report, &ta, witness);
                0
            }
            CoverVerdict::NotCoveredWithinBounds { bounds, exact } => {
                report.push("verdict", "not-covered-within-bounds");
                report.push("bounds.param-bound", bounds.param_bound);
                report.push(
                    "bounds.horizon",
                    bounds
                        .horizon
                        .map(|h| h.to_string())
                        .unwrap_or_else(|| "auto".into()),
                );
                report.push("bounds.max-configs", bounds.max_configs);
                report.push("exact", exact);
                report.push("note", "bounded search; no claim beyond the stated bounds");
                1
            }
        }
    } else {
        // Pinned valuation.
        let p: Valuation = parse_pairs(params, "--param")?.into_iter().collect();
        let pairs = parse_pairs(at, "--at")?;
        let kappa: Vec<(&str, i64)> = pairs.iter().map(|(l, c)| (l.as_str(), *c)).collect();
        let c0 = if at.is_empty() {
            None
        } else {
            Some(
                Configuration::initial(&ta, &kappa, p.clone())
                    .map_err(|e| CmdError(e.to_string()))?,
            )
        };
        report.push("pinned.p", fmt_valuation(&p, &ta.env.params));
        let found = match c0 {
            Some(c0) => covers_from(&ta, &c0, target, horizon, max_configs)
                .map_err(|e| CmdError(e.to_string()))?
                .map(|run| (c0.kappa.clone(), run)),
            None => {
                // All process distributions for the pinned valuation.
                let mut bounds = SearchBounds::new(0).with_max_configs(max_configs);
                if let Some(h) = horizon {
                    bounds = bounds.with_horizon(h);
                }
                single_valuation_cover(&ta, target, &p, &bounds)?
            }
        };
        match found {
            Some((kappa0, run)) => {
                report.push("verdict", "covered");
                let witness = CoverWitness { p, kappa0, run };
                witness_records(&mut report, &ta, &witness);
                0
            }
            None => {
                report.push("verdict", "not-covered-within-bounds");
                report.push(
                    "bounds.horizon",
                    horizon
                        .map(|h| h.to_string())
                        .unwrap_or_else(|| "auto".into()),
                );
                report.push("note", "bounded search; no claim beyond the stated bounds");
                1
            }
        }
    };
    write!(out, "{}", report.to_text())?;
    Ok(exit)
}

/// Covers-from over every composition of `N(p)` processes at one pinned
/// valuation, in colexicographic order.
fn single_valuation_cover(
    ta: &ThresholdAutomaton,
    target: &str,
    p: &Valuation,
    bounds: &SearchBounds,
) -> Result<Option<(Valuation, Vec<String>)>, CmdError> {
    let n = ta.env.size(p).map_err(|e| CmdError(e.to_string()))?;
    if n < 0 {
        return Err(CmdError(format!(
            "the size function is negative ({n}) at this valuation"
        )));
    }
    if !ta.env.admits(p).map_err(|e| CmdError(e.to_string()))? {
        return Err(CmdError(
            "the valuation violates the resilience condition".into(),
        ));
    }
    for comp in compositions(n, ta.initial.len()) {
        let kappa: Vec<(&str, i64)> = ta
            .initial
            .iter()
            .zip(&comp)
            .map(|(l, c)| (l.as_str(), *c))
            .collect();
        let c0 =
            Configuration::initial(ta, &kappa, p.clone()).map_err(|e| CmdError(e.to_string()))?;
        if let Some(run) = covers_from(ta, &c0, target, bounds.horizon, bounds.max_configs)
            .map_err(|e| CmdError(e.to_string()))?
        {
            return Ok(Some((c0.kappa, run)));
        }
    }
    Ok(None)
}

fn cmd_simulate<W: Write>(
    out: &mut W,
    args: &ModelArgs,
    params: &[String],
    at: &[String],
    run: &str,
) -> CmdResult {
    let ta = instantiated(args)?;
    let p: Valuation = parse_pairs(params, "--param")?.into_iter().collect();
    let pairs = parse_pairs(at, "--at")?;
    let kappa: Vec<(&str, i64)> = pairs.iter().map(|(l, c)| (l.as_str(), *c)).collect();
    let c0 = Configuration::initial(&ta, &kappa, p).map_err(|e| CmdError(e.to_string()))?;
    let ids: Vec<&str> = run
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .collect();

    let mut report = Report::new();
    report.push("command", "simulate");
    model_records(&mut report, args);
    report.push("run", ids.join(" "));
    let exit = match ta::apply_run(&ta, &c0, &ids) {
        Ok(end) => {
            report.push("status", "ok");
            report.push("final.kappa", fmt_nonzero(&end.kappa, &ta.locations));
            report.push("final.g", fmt_valuation(&end.g, &ta.shared));
            report.push("final.p", fmt_valuation(&end.p, &ta.env.params));
            0
        }
        Err(TaError::RunStep { index, source }) => match *source {
            TaError::UnknownRule(id) => {
                return Err(CmdError(format!("step {index}: unknown rule `{id}`")))
            }
            other => {
                report.push("status", "failed");
                report.push("failed.step", index);
                report.push("failed.reason", other);
                1
            }
        },
        Err(other) => return Err(CmdError(other.to_string())),
    };
    write!(out, "{}", report.to_text())?;
    Ok(exit)
}

fn cmd_compile<W: Write>(out: &mut W, formula: &str, general: bool) -> CmdResult {
    let parsed = parse_formula(formula).map_err(|e| CmdError(e.to_string()))?;
    let output = compile_formula(&parsed);
    let sketch = if general {
        nonneg_to_general(&output.sketch, &output.target).map_err(|e| CmdError(e.to_string()))?
    } else {
        output.sketch
    };
    write!(out, "{}", print_sketch(&sketch))?;
    Ok(0)
}

fn cmd_oracle<W: Write>(out: &mut W, formula: &str, bx: i64, by: i64) -> CmdResult {
    let parsed = parse_formula(formula).map_err(|e| CmdError(e.to_string()))?;
    let valid = pad::bounded_validity(&parsed, bx, by);
    let mut report = Report::new();
    report.push("command", "oracle");
    report.push("formula", parsed.to_string());
    report.push("bx", bx);
    report.push("by", by);
    report.push("bounded-valid", valid);
    report.push(
        "note",
        "bounded oracle surrogate; not a decision of true validity",
    );
    write!(out, "{}", report.to_text())?;
    Ok(if valid { 0 } else { 1 })
}

fn cmd_lift<W: Write>(out: &mut W, divisor: &str, dividend: &str) -> CmdResult {
    let f = parse_poly(divisor).map_err(|e| CmdError(format!("--divisor: {e}")))?;
    let g = parse_poly(dividend).map_err(|e| CmdError(format!("--dividend: {e}")))?;
    let max_x = f
        .x_coeffs
        .keys()
        .chain(g.x_coeffs.keys())
        .max()
        .copied()
        .unwrap_or(0);
    let max_y = f
        .y_coeffs
        .keys()
        .chain(g.y_coeffs.keys())
        .max()
        .copied()
        .unwrap_or(0);
    let lifted = pad::lift_general_divisibility(max_x, max_y, &f, &g)
        .map_err(|e| CmdError(e.to_string()))?;
    writeln!(out, "{lifted}")?;
    Ok(0)
}

fn cmd_lemma_check<W: Write>(
    out: &mut W,
    suite: SuiteArg,
    max: Option<i64>,
    trials: usize,
    seed: u64,
) -> CmdResult {
    let mut outcomes = Vec::new();
    let pick = |default: i64| max.unwrap_or(default);
    if matches!(suite, SuiteArg::Lemma1 | SuiteArg::All) {
        outcomes.push(suites::lemma1(pick(3)));
    }
    if matches!(suite, SuiteArg::Lemma2 | SuiteArg::All) {
        outcomes.push(suites::lemma2(pick(2)));
    }
    if matches!(suite, SuiteArg::Monotonicity | SuiteArg::All) {
        outcomes.push(suites::monotonicity(trials, seed));
    }
    if matches!(suite, SuiteArg::ThirdPhase | SuiteArg::All) {
        outcomes.push(suites::third_phase(pick(3)));
    }
    if matches!(suite, SuiteArg::Wrapup | SuiteArg::All) {
        outcomes.push(suites::wrapup(pick(3)));
    }

    let mut report = Report::new();
    report.push("command", "lemma-check");
    let mut all_passed = true;
    for outcome in &outcomes {
        report.push(&format!("suite.{}.cases", outcome.suite), outcome.cases);
        report.push(
            &format!("suite.{}.failures", outcome.suite),
            outcome.failures.len(),
        );
        for (i, failure) in outcome.failures.iter().take(5).enumerate() {
            report.push(&format!("suite.{}.failure.{i}", outcome.suite), failure);
        }
        all_passed = all_passed && outcome.passed();
    }
    report.push("verdict", if all_passed { "pass" } else { "fail" });
    write!(out, "{}", report.to_text())?;
    Ok(if all_passed { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth<W: Write>(
    out: &mut W,
    args: &ModelArgs,
    target: &str,
    mode: ModeArg,
    assign_bound: i64,
    param_bound: i64,
    horizon: Option<u64>,
    max_configs: usize,
) -> CmdResult {
    if !args.set.is_empty() {
        return Err(CmdError(
            "--set conflicts with synth; the loop assigns indeterminates".into(),
        ));
    }
    let sketch = load_sketch(args)?;
    if !sketch.locations.contains(&target.to_string()) {
        return Err(CmdError(format!("unknown target location `{target}`")));
    }
    let mut cover_bounds = SearchBounds::new(param_bound).with_max_configs(max_configs);
    if let Some(h) = horizon {
        cover_bounds = cover_bounds.with_horizon(h);
    }
    let query = SynthesisQuery {
        sketch: sketch.clone(),
        target: target.to_string(),
        mode: match mode {
            ModeArg::Nonneg => Mode::NonNegative,
            ModeArg::Integer => Mode::Integer,
        },
        assignment_bound: assign_bound,
        cover_bounds: cover_bounds.clone(),
    };
    let outcome = synthesize(&query).map_err(|e| CmdError(e.to_string()))?;

    let mut report = Report::new();
    report.push("command", "synth");
    model_records(&mut report, args);
    report.push("target", target);
    report.push(
        "mode",
        match mode {
            ModeArg::Nonneg => "nonneg",
            ModeArg::Integer => "integer",
        },
    );
    report.push("assign-bound", assign_bound);
    report.push("param-bound", param_bound);
    report.push("assignments.tried", outcome.assignments_tried);
    report.push("cache.hits", outcome.cache_hits);

    let exit = match &outcome.verdict {
        SynthesisVerdict::Candidate { mu, evidence } => {
            report.push("verdict", "candidate");
            report.push("candidate", mu);
            report.push("evidence.param-bound", evidence.bounds.param_bound);
            report.push("evidence.valuations", evidence.valuations_checked);
            report.push("evidence.start-points", evidence.start_points_checked);
            report.push("evidence.exact", evidence.exact);
            report.push(
                "evidence.note",
                "bounded certificate; no claim of unbounded non-coverability",
            );
            let check = verify_candidate(&sketch, mu, target, &cover_bounds)
                .map_err(|e| CmdError(e.to_string()))?;
            report.push("verified", check.confirmed);
            0
        }
        SynthesisVerdict::Exhausted { bound } => {
            report.push("verdict", "exhausted");
            report.push("exhausted.bound", *bound);
            1
        }
    };
    report.push("refuted.count", outcome.refuted.len());
    for (i, (mu, witness)) in outcome.refuted.iter().take(10).enumerate() {
        report.push(&format!("refuted.{i}.mu"), mu);
        report.push(
            &format!("refuted.{i}.p"),
            fmt_valuation(&witness.p, &sketch.env.params),
        );
        report.push(
            &format!("refuted.{i}.run"),
            if witness.run.is_empty() {
                "-".to_string()
            } else {
                witness.run.join(" ")
            },
        );
    }
    report.push("skipped.count", outcome.skipped.len());
    write!(out, "{}", report.to_text())?;
    Ok(exit)
}

/// Parses and runs one invocation; `argv` excludes the binary name.
/// Returns the process exit code and writes to the given streams.
pub fn run_command<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let full = std::iter::once("tasynth".to_string()).chain(argv.iter().cloned());
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0 by convention.
            let message = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{message}");
                return 2;
            }
            let _ = write!(out, "{message}");
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Validate { model } => cmd_validate(out, model),
        Command::Print { model } => load_sketch(model).map(|sketch| {
            let _ = write!(out, "{}", print_sketch(&sketch));
            0
        }),
        Command::Simulate {
            model,
            params,
            at,
            run,
        } => cmd_simulate(out, model, params, at, run),
        Command::Cover {
            model,
            target,
            param_bound,
            horizon,
            max_configs,
            params,
            at,
            jobs,
        } => cmd_cover(
            out,
            model,
            target,
            *param_bound,
            *horizon,
            *max_configs,
            params,
            at,
            *jobs,
        ),
        Command::Compile { formula, general } => cmd_compile(out, formula, *general),
        Command::Oracle { formula, bx, by } => cmd_oracle(out, formula, *bx, *by),
        Command::Lift { divisor, dividend } => cmd_lift(out, divisor, dividend),
        Command::LemmaCheck {
            suite,
            max,
            trials,
            seed,
        } => cmd_lemma_check(out, *suite, *max, *trials, *seed),
        Command::Synth {
            model,
            target,
            mode,
            assign_bound,
            param_bound,
            horizon,
            max_configs,
        } => cmd_synth(
            out,
            model,
            target,
            *mode,
            *assign_bound,
            *param_bound,
            *horizon,
            *max_configs,
        ),
    };
    match result {
        Ok(code) => code,
        Err(CmdError(message)) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_command(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run(&["cover", "--target", "l3"]);
        assert_eq!(code, 2, "{err}");
        let (code, _, _) = run(&["no-such-command"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn unknown_model_exits_two() {
        let (code, _, err) = run(&["print", "--model", "st88"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown model"));
    }
}
