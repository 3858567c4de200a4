use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ratimpl::axioms::{check, verify_report, AxiomId};
use ratimpl::certificate::Section;
use ratimpl::corpus::{self, Status};
use ratimpl::env::{parse_environment, Validation};
use ratimpl::mechanism::{build, verify_certificates, BuildError, CanonicalMechanism, Variant, DEFAULT_N_MAX};
use ratimpl::rationalizability::{check_implementation, solve_rationalizable, FiniteGame};
use ratimpl::report::{self, GameFile};
use ratimpl::{Environment, Rational};

#[derive(Parser)]
#[command(name = "ratimpl", version, about = "Exact checks for rationalizable implementation in finite environments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// How strictly environment files are validated.
    #[arg(long, global = true, value_enum, default_value_t = ValidationArg::Lenient)]
    validation: ValidationArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum ValidationArg {
    Strict,
    Lenient,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Theorem1,
    Theorem2,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Theorem1 => Variant::Theorem1,
            VariantArg::Theorem2 => Variant::Theorem2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide implementability conditions.
    Check {
        /// Environment file or bundled example name.
        env: String,
        /// Condition id, or `all`.
        #[arg(long, default_value = "all")]
        axiom: String,
    },
    /// Search partitions refining the scf partition.
    Partition {
        env: String,
        /// One of smm-star, smm-star-star, sem-star-star, or `all`.
        #[arg(long, default_value = "all")]
        axiom: String,
    },
    /// Build a canonical mechanism and write it as JSON.
    Mechanism {
        env: String,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        nmax: u32,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the certificate system of a mechanism.
    Certify {
        /// Mechanism file, or an environment to build from.
        input: String,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        nmax: u32,
    },
    /// Compute rationalizable strategies of a finite game.
    Solve {
        game: String,
        /// Payoff state for games bound to an environment; all states if omitted.
        #[arg(long)]
        state: Option<String>,
    },
    /// Run the regression suite over the bundled examples.
    Examples {
        /// Run every example.
        #[arg(long)]
        all: bool,
        names: Vec<String>,
    },
}

/// Input or usage problems, reported with exit status 2.
struct InputError(anyhow::Error);

type Outcome = std::result::Result<bool, InputError>;

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn read_input(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        return fs::read_to_string(path).with_context(|| format!("reading {arg}"));
    }
    corpus::source(arg)
        .map(str::to_string)
        .ok_or_else(|| anyhow!("{arg} is neither a file nor a bundled example"))
}

fn load_env(arg: &str, common: &Common) -> Result<Environment> {
    let validation = match common.validation {
        ValidationArg::Strict => Validation::Strict,
        ValidationArg::Lenient => Validation::Lenient,
    };
    let text = read_input(arg)?;
    let env: Environment = parse_environment(&text, validation).with_context(|| format!("parsing {arg}"))?;
    for w in env.warnings() {
        eprintln!("warning: {arg}: {w}");
    }
    Ok(env)
}

fn axioms(selector: &str, allowed: &[AxiomId]) -> Result<Vec<AxiomId>> {
    if selector == "all" {
        return Ok(allowed.to_vec());
    }
    let id: AxiomId = selector.parse()?;
    if !allowed.contains(&id) {
        bail!("{selector} is not valid here");
    }
    Ok(vec![id])
}

/// Stdout writes that tolerate a closed pipe.
fn write_out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(common: &Common, value: &Value, text: String) {
    match common.format {
        Format::Json => write_out(&format!("{}\n", serde_json::to_string_pretty(value).expect("values serialize"))),
        Format::Text => write_out(&text),
    }
}

/// `{"kind": "x", "a": "b"}` as `x a=b`.
fn describe(v: &Value) -> String {
    let Some(obj) = v.as_object() else {
        return v.to_string();
    };
    let mut parts = Vec::new();
    for (k, x) in obj {
        match (k.as_str(), x) {
            ("kind", Value::String(s)) => parts.insert(0, s.clone()),
            (_, Value::String(s)) => parts.push(format!("{k}={s}")),
            (_, Value::Array(items)) if items.iter().all(Value::is_string) => {
                let items: Vec<&str> = items.iter().filter_map(Value::as_str).collect();
                parts.push(format!("{k}={{{}}}", items.join(",")));
            }
            (_, Value::Object(_)) => parts.push(format!("{k}=[{}]", lottery_text(x))),
            _ => parts.push(format!("{k}={x}")),
        }
    }
    parts.join(" ")
}

fn lottery_text(v: &Value) -> String {
    v.as_object()
        .map(|m| {
            m.iter()
                .filter(|(_, p)| p.as_str() != Some("0/1"))
                .map(|(z, p)| format!("{z}:{}", p.as_str().unwrap_or_default()))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default()
}

fn axiom_text(v: &Value) -> String {
    let mut out = format!(
        "{}: {}\n",
        v["title"].as_str().unwrap_or_default(),
        if v["holds"] == json!(true) { "holds" } else { "fails" }
    );
    if let Some(p) = v.get("partition").filter(|p| !p.is_null()) {
        out += &format!("  partition: {}\n", blocks_text(p));
    }
    for c in v["counterexamples"].as_array().into_iter().flatten() {
        out += &format!("  counterexample: {}\n", describe(c));
    }
    for w in v["witnesses"].as_array().into_iter().flatten() {
        out += &format!("  witness for {}\n", describe(&w["obligation"]));
        for d in w["discharges"].as_array().into_iter().flatten() {
            out += &format!("    {}\n", discharge_text(d));
        }
    }
    for n in v["notes"].as_array().into_iter().flatten() {
        out += &format!("  note: {}\n", n.as_str().unwrap_or_default());
    }
    out
}

fn discharge_text(d: &Value) -> String {
    if let Some(plan) = d.get("plan").and_then(Value::as_array) {
        let steps: Vec<String> = plan
            .iter()
            .map(|e| format!("{}: [{}]", e["state"].as_str().unwrap_or_default(), lottery_text(&e["lottery"])))
            .collect();
        return format!("plan by {}: {}", d["agent"].as_str().unwrap_or_default(), steps.join("; "));
    }
    if let Some(steps) = d.get("steps").and_then(Value::as_array) {
        let steps: Vec<String> = steps
            .iter()
            .map(|e| {
                format!(
                    "drop {} via {} [{}]",
                    e["state"].as_str().unwrap_or_default(),
                    e["agent"].as_str().unwrap_or_default(),
                    lottery_text(&e["lottery"])
                )
            })
            .collect();
        return format!("elimination: {}", steps.join("; "));
    }
    describe(d)
}

fn blocks_text(p: &Value) -> String {
    let blocks: Vec<String> = p
        .as_array()
        .into_iter()
        .flatten()
        .map(|b| {
            let states: Vec<&str> = b.as_array().into_iter().flatten().filter_map(Value::as_str).collect();
            format!("{{{}}}", states.join(","))
        })
        .collect();
    format!("{{{}}}", blocks.join(","))
}

fn run_check(env_arg: &str, selector: &str, allowed: &[AxiomId], common: &Common) -> Outcome {
    let env = load_env(env_arg, common)?;
    let ids = axioms(selector, allowed)?;
    let mut values = Vec::new();
    let mut text = String::new();
    let mut all = true;
    for id in ids {
        let r = check(&env, id)?;
        if let Err(e) = verify_report(&env, &r) {
            return Err(anyhow!("internal witness check failed for {}: {e}", id.id()).into());
        }
        all &= r.holds;
        let v = report::axiom_report_json(&env, &r);
        text += &axiom_text(&v);
        values.push(v);
    }
    let value = if values.len() == 1 {
        values.pop().unwrap()
    } else {
        json!({"environment": env.name, "reports": values})
    };
    emit(common, &value, text);
    Ok(all)
}

fn build_or_report(env: &Environment, variant: Variant, nmax: u32, common: &Common) -> std::result::Result<Option<CanonicalMechanism<Rational>>, InputError> {
    match build(env, variant, nmax) {
        Ok(m) => Ok(Some(m)),
        Err(BuildError::Precondition(r)) => {
            let v = json!({"built": false, "reason": format!("precondition {} fails", r.axiom.title()), "report": report::axiom_report_json(env, &r)});
            let text = format!("mechanism not built: precondition fails\n{}", axiom_text(&v["report"]));
            emit(common, &v, text);
            Ok(None)
        }
        Err(BuildError::Validation(e)) => Err(anyhow!("environment rejected: {e}").into()),
        Err(BuildError::NMax) => Err(anyhow!("--nmax must be at least 1").into()),
        Err(e) => {
            let v = json!({"built": false, "reason": e.to_string()});
            emit(common, &v, format!("mechanism not built: {e}\n"));
            Ok(None)
        }
    }
}

fn run_mechanism(env_arg: &str, variant: Variant, nmax: u32, out: Option<&Path>, common: &Common) -> Outcome {
    let env = load_env(env_arg, common)?;
    let Some(mech) = build_or_report(&env, variant, nmax, common)? else {
        return Ok(false);
    };
    let file = serde_json::to_string_pretty(&report::mechanism_json(&mech))? + "\n";
    match out {
        Some(path) => {
            fs::write(path, &file).with_context(|| format!("writing {}", path.display()))?;
            let v = json!({"built": true, "variant": variant.id(), "out": path.display().to_string(), "sigma_size": mech.sigma.len(), "messages_per_agent": mech.messages_per_agent().to_string()});
            let text = format!(
                "{} mechanism written to {} (|Σ| = {}, {} messages per agent)\n",
                variant,
                path.display(),
                mech.sigma.len(),
                mech.messages_per_agent()
            );
            emit(common, &v, text);
        }
        None => write_out(&file),
    }
    Ok(true)
}

fn section_text(s: &Section<Rational>) -> String {
    let failed = s.failures().count();
    let mut out = format!(
        "  {}: {} of {} inequalities hold\n",
        s.name,
        s.entries.len() - failed,
        s.entries.len()
    );
    for e in s.failures() {
        let side = |x: &Option<Rational>| x.as_ref().map_or("none".to_string(), |v| v.to_string());
        out += &format!(
            "    FAIL {} [{}]: {} {} {}\n",
            e.label,
            e.instance,
            side(&e.lhs),
            e.relation.symbol(),
            side(&e.rhs)
        );
    }
    for n in &s.notes {
        out += &format!("    note: {n}\n");
    }
    out
}

fn run_certify(input: &str, variant: Option<Variant>, nmax: u32, common: &Common) -> Outcome {
    let text = read_input(input)?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {input}"))?;
    let mech = if v.get("environment").is_some() && v.get("sigma").is_some() {
        report::parse_mechanism::<Rational>(&text).with_context(|| format!("parsing mechanism {input}"))?
    } else {
        let env = load_env(input, common)?;
        let variant = variant.ok_or_else(|| anyhow!("--variant is required when certifying an environment"))?;
        match build_or_report(&env, variant, nmax, common)? {
            Some(m) => m,
            None => return Ok(false),
        }
    };
    let cert = verify_certificates(&mech);
    let mut out = format!(
        "{} certificates: {}\n",
        cert.variant,
        if cert.passed { "all hold" } else { "FAILED" }
    );
    for s in &cert.sections {
        out += &section_text(s);
    }
    emit(common, &report::certificate_json(&cert), out);
    Ok(cert.passed)
}

fn survivors_text(game: &FiniteGame<Rational>, v: &Value) -> String {
    let mut out = String::new();
    for (i, p) in game.players().iter().enumerate() {
        let labels: Vec<&str> = v["survivors"][p].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
        out += &format!(
            "  {p}: {} of {} survive: {}\n",
            labels.len(),
            game.n_strategies(i),
            labels.join(" ")
        );
    }
    for t in v["trace"].as_array().into_iter().flatten() {
        out += &format!(
            "  round {}: {} drops {}\n",
            t["round"],
            t["player"].as_str().unwrap_or_default(),
            t["strategy"].as_str().unwrap_or_default()
        );
    }
    out
}

fn run_solve(game_arg: &str, state: Option<&str>, common: &Common) -> Outcome {
    let text = read_input(game_arg)?;
    let file = report::parse_game::<Rational>(&text, |r| {
        read_input(r).map_err(|e| ratimpl::error::ParseError::Invalid(e.to_string()))
    })?;
    match file {
        GameFile::Payoffs(game) => {
            if state.is_some() {
                return Err(anyhow!("--state needs a game bound to an environment").into());
            }
            let r = solve_rationalizable(&game)?;
            let v = report::survivors_json(&game, &r);
            emit(common, &v, format!("rationalizable strategies after {} rounds\n{}", r.rounds, survivors_text(&game, &v)));
            Ok(true)
        }
        GameFile::Bound { env, state: fixed, games } => {
            let chosen = match state {
                Some(id) => Some(env.state_index(id).ok_or_else(|| anyhow!("unknown state {id}"))?),
                None => fixed,
            };
            if let Some(s) = chosen {
                let r = solve_rationalizable(&games[s])?;
                let v = report::survivors_json(&games[s], &r);
                let text = format!("rationalizable strategies at {}\n{}", env.state_name(s), survivors_text(&games[s], &v));
                emit(common, &v, text);
                return Ok(true);
            }
            let r = check_implementation(&env, &games)?;
            let v = report::implementation_json(&env, &games, &r);
            let mut text = format!("implements the scf: {}\n", if r.implemented { "yes" } else { "no" });
            for (st, sv) in r.states.iter().zip(v["states"].as_array().into_iter().flatten()) {
                text += &format!(
                    "{}: {}\n{}",
                    env.state_name(st.state),
                    if st.implemented { "implemented" } else { "not implemented" },
                    survivors_text(&games[st.state], &sv["solution"])
                );
            }
            emit(common, &v, text);
            Ok(r.implemented)
        }
    }
}

fn run_examples(all: bool, names: &[String], common: &Common) -> Outcome {
    let selected: Vec<String> = if all || names.is_empty() {
        corpus::NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    let mut rows = Vec::new();
    for n in &selected {
        rows.extend(corpus::run_example(n)?);
    }
    let ok = rows.iter().all(|r| r.status != Status::Fail);
    let values: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "example": r.example,
                "check": r.check,
                "expected": r.expected,
                "actual": r.actual,
                "status": r.status.to_string(),
            })
        })
        .collect();
    let mut text = String::new();
    for r in &rows {
        text += &format!(
            "{:<8} {:<5} {:<48} expected {:<26} got {}\n",
            r.status.to_string(),
            r.example,
            r.check,
            r.expected,
            r.actual
        );
    }
    let failed = rows.iter().filter(|r| r.status == Status::Fail).count();
    let flagged = rows.iter().filter(|r| r.status == Status::Flagged).count();
    text += &format!("{} checks, {failed} failed, {flagged} flagged\n", rows.len());
    emit(common, &json!({"passed": ok, "rows": values}), text);
    Ok(ok)
}

fn run(cli: &Cli) -> Outcome {
    let common = &cli.common;
    match &cli.command {
        Command::Check { env, axiom } => run_check(env, axiom, &AxiomId::ALL, common),
        Command::Partition { env, axiom } => {
            let allowed = [
                AxiomId::StrictMaskinStar,
                AxiomId::StrictMaskinStarStar,
                AxiomId::StrictEventStarStar,
            ];
            run_check(env, axiom, &allowed, common)
        }
        Command::Mechanism {
            env,
            variant,
            nmax,
            out,
        } => run_mechanism(env, (*variant).into(), *nmax, out.as_deref(), common),
        Command::Certify { input, variant, nmax } => run_certify(input, variant.map(Into::into), *nmax, common),
        Command::Solve { game, state } => run_solve(game, state.as_deref(), common),
        Command::Examples { all, names } => run_examples(*all, names, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
