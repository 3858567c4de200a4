//! JSON rendering of every report type, plus the mechanism and game file formats.
//!
//! Field order is fixed so identical inputs give byte-identical output.

use serde_json::{json, Map, Value};

use crate::axioms::{AxiomId, AxiomReport, Candidate, Discharge, EliminationOrder, EliminationStep, Obligation};
use crate::certificate::{Entry, Section};
use crate::env::{parse_scalar_value, ActiveSets, Environment, Lottery, Validation};
use crate::error::ParseError;
use crate::lemma::{LemmaYSystem, Provenance, SigmaSet};
use crate::mechanism::{CanonicalMechanism, CertificateReport, Variant};
use crate::partition::Partition;
use crate::rationalizability::{FiniteGame, ImplementationReport, LemmaPropertiesReport, SurvivorSets};
use crate::scalar::Scalar;

fn ratio<T: Scalar>(x: &T) -> Value {
    Value::String(x.to_ratio_string())
}

fn opt_ratio<T: Scalar>(x: &Option<T>) -> Value {
    x.as_ref().map_or(Value::Null, ratio)
}

/// Full outcome → probability map, zeros included.
pub fn lottery_json<T: Scalar>(env: &Environment<T>, y: &Lottery<T>) -> Value {
    let mut m = Map::new();
    for (z, p) in y.probs().iter().enumerate() {
        m.insert(env.outcome_name(z).to_string(), ratio(p));
    }
    Value::Object(m)
}

/// An outcome id (degenerate lottery) or a partial outcome → probability map.
pub fn parse_lottery<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Lottery<T>, ParseError> {
    match v {
        Value::String(id) => Ok(env.degenerate(outcome_id(env, id)?)),
        Value::Object(m) => {
            let mut probs = vec![T::zero(); env.n_outcomes()];
            for (id, p) in m {
                probs[outcome_id(env, id)?] = parse_scalar_value(p)?;
            }
            Lottery::new(probs)
        }
        other => Err(ParseError::Invalid(format!("lottery expected, got {other}"))),
    }
}

fn outcome_id<T: Scalar>(env: &Environment<T>, id: &str) -> Result<usize, ParseError> {
    env.outcome_index(id).ok_or_else(|| ParseError::UnknownId {
        kind: "outcome",
        id: id.to_string(),
    })
}

fn state_id<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<usize, ParseError> {
    let id = v.as_str().ok_or_else(|| ParseError::Invalid(format!("state id expected, got {v}")))?;
    env.state_index(id).ok_or_else(|| ParseError::UnknownId {
        kind: "state",
        id: id.to_string(),
    })
}

fn agent_id<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<usize, ParseError> {
    let id = v.as_str().ok_or_else(|| ParseError::Invalid(format!("agent id expected, got {v}")))?;
    env.agent_index(id).ok_or_else(|| ParseError::UnknownId {
        kind: "agent",
        id: id.to_string(),
    })
}

fn state_list<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Vec<usize>, ParseError> {
    v.as_array()
        .ok_or_else(|| ParseError::Invalid("state list expected".into()))?
        .iter()
        .map(|s| state_id(env, s))
        .collect()
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, ParseError> {
    v.get(key).ok_or_else(|| ParseError::Invalid(format!("missing field {key:?}")))
}

fn states_json<T: Scalar>(env: &Environment<T>, states: &[usize]) -> Value {
    Value::Array(states.iter().map(|&s| json!(env.state_name(s))).collect())
}

pub fn partition_json<T: Scalar>(env: &Environment<T>, p: &Partition) -> Value {
    Value::Array(p.blocks().iter().map(|b| states_json(env, b)).collect())
}

pub fn parse_partition<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Partition, ParseError> {
    let blocks = v
        .as_array()
        .ok_or_else(|| ParseError::Invalid("partition must be a list of blocks".into()))?
        .iter()
        .map(|b| state_list(env, b))
        .collect::<Result<Vec<_>, _>>()?;
    Partition::new(blocks, env.n_states())
}

pub fn active_sets_json<T: Scalar>(env: &Environment<T>, active: &ActiveSets) -> Value {
    let mut m = Map::new();
    for (s, set) in active.per_state().iter().enumerate() {
        let agents: Vec<&str> = set.iter().map(|&i| env.agent_name(i)).collect();
        m.insert(env.state_name(s).to_string(), json!(agents));
    }
    Value::Object(m)
}

pub fn obligation_json<T: Scalar>(env: &Environment<T>, ob: &Obligation) -> Value {
    let a = |i: usize| json!(env.agent_name(i));
    let s = |t: usize| json!(env.state_name(t));
    match ob {
        Obligation::AgentState { agent, state } => json!({"kind": "agent-state", "agent": a(*agent), "state": s(*state)}),
        Obligation::StatePair { state, other } => json!({"kind": "state-pair", "state": s(*state), "other": s(*other)}),
        Obligation::Veto { state, outcome } => {
            json!({"kind": "veto", "state": s(*state), "outcome": env.outcome_name(*outcome)})
        }
        Obligation::BlockAgainst { block, true_state } => {
            json!({"kind": "block-against", "block": states_json(env, block), "true_state": s(*true_state)})
        }
        Obligation::Event { true_state, event } => {
            json!({"kind": "event", "event": states_json(env, event), "true_state": s(*true_state)})
        }
        Obligation::Dictator {
            agent,
            state,
            other,
            reference,
        } => json!({
            "kind": "dictator",
            "agent": a(*agent),
            "state": s(*state),
            "other": s(*other),
            "reference": s(*reference),
        }),
        Obligation::Elimination { true_state } => json!({"kind": "elimination", "true_state": s(*true_state)}),
    }
}

pub fn parse_obligation<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Obligation, ParseError> {
    let kind = field(v, "kind")?.as_str().unwrap_or_default();
    let st = |k: &str| field(v, k).and_then(|x| state_id(env, x));
    Ok(match kind {
        "agent-state" => Obligation::AgentState {
            agent: agent_id(env, field(v, "agent")?)?,
            state: st("state")?,
        },
        "state-pair" => Obligation::StatePair {
            state: st("state")?,
            other: st("other")?,
        },
        "veto" => Obligation::Veto {
            state: st("state")?,
            outcome: outcome_id(env, field(v, "outcome")?.as_str().unwrap_or_default())?,
        },
        "block-against" => Obligation::BlockAgainst {
            block: state_list(env, field(v, "block")?)?,
            true_state: st("true_state")?,
        },
        "event" => Obligation::Event {
            true_state: st("true_state")?,
            event: state_list(env, field(v, "event")?)?,
        },
        "dictator" => Obligation::Dictator {
            agent: agent_id(env, field(v, "agent")?)?,
            state: st("state")?,
            other: st("other")?,
            reference: st("reference")?,
        },
        "elimination" => Obligation::Elimination {
            true_state: st("true_state")?,
        },
        other => return Err(ParseError::Invalid(format!("unknown obligation kind {other:?}"))),
    })
}

pub fn discharge_json<T: Scalar>(env: &Environment<T>, d: &Discharge<T>) -> Value {
    let a = |i: usize| json!(env.agent_name(i));
    match d {
        Discharge::WorseOutcome { outcome } => json!({"kind": "worse-outcome", "outcome": env.outcome_name(*outcome)}),
        Discharge::Note(text) => json!({"kind": "note", "text": text}),
        Discharge::Blocking { agent, state, lottery } => json!({
            "kind": "blocking",
            "agent": a(*agent),
            "state": env.state_name(*state),
            "lottery": lottery_json(env, lottery),
        }),
        Discharge::CommonBlocking { agent, lottery } => json!({
            "kind": "common-blocking",
            "agent": a(*agent),
            "lottery": lottery_json(env, lottery),
        }),
        Discharge::ContingentPlan { agent, plan } => json!({
            "kind": "contingent-plan",
            "agent": a(*agent),
            "plan": plan
                .iter()
                .map(|(s, y)| json!({"state": env.state_name(*s), "lottery": lottery_json(env, y)}))
                .collect::<Vec<_>>(),
        }),
        Discharge::Elimination(order) => json!({
            "kind": "elimination",
            "sequence": states_json(env, &order.sequence),
            "steps": order
                .steps
                .iter()
                .map(|st| json!({
                    "state": env.state_name(st.state),
                    "agent": a(st.agent),
                    "lottery": lottery_json(env, &st.lottery),
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn parse_discharge<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Discharge<T>, ParseError> {
    let kind = field(v, "kind")?.as_str().unwrap_or_default();
    let lot = |x: &Value| field(x, "lottery").and_then(|l| parse_lottery(env, l));
    Ok(match kind {
        "worse-outcome" => Discharge::WorseOutcome {
            outcome: outcome_id(env, field(v, "outcome")?.as_str().unwrap_or_default())?,
        },
        "note" => Discharge::Note(field(v, "text")?.as_str().unwrap_or_default().to_string()),
        "blocking" => Discharge::Blocking {
            agent: agent_id(env, field(v, "agent")?)?,
            state: state_id(env, field(v, "state")?)?,
            lottery: lot(v)?,
        },
        "common-blocking" => Discharge::CommonBlocking {
            agent: agent_id(env, field(v, "agent")?)?,
            lottery: lot(v)?,
        },
        "contingent-plan" => Discharge::ContingentPlan {
            agent: agent_id(env, field(v, "agent")?)?,
            plan: field(v, "plan")?
                .as_array()
                .ok_or_else(|| ParseError::Invalid("plan must be a list".into()))?
                .iter()
                .map(|e| Ok((state_id(env, field(e, "state")?)?, lot(e)?)))
                .collect::<Result<_, ParseError>>()?,
        },
        "elimination" => Discharge::Elimination(EliminationOrder {
            sequence: state_list(env, field(v, "sequence")?)?,
            steps: field(v, "steps")?
                .as_array()
                .ok_or_else(|| ParseError::Invalid("steps must be a list".into()))?
                .iter()
                .map(|e| {
                    Ok(EliminationStep {
                        state: state_id(env, field(e, "state")?)?,
                        agent: agent_id(env, field(e, "agent")?)?,
                        lottery: lot(e)?,
                    })
                })
                .collect::<Result<_, ParseError>>()?,
        }),
        other => return Err(ParseError::Invalid(format!("unknown discharge kind {other:?}"))),
    })
}

fn candidate_json<T: Scalar>(env: &Environment<T>, c: &Candidate) -> Value {
    json!({
        "partition": partition_json(env, &c.partition),
        "passes": c.passes,
        "failing": c.failing.iter().map(|o| obligation_json(env, o)).collect::<Vec<_>>(),
    })
}

pub fn axiom_report_json<T: Scalar>(env: &Environment<T>, r: &AxiomReport<T>) -> Value {
    let mut m = Map::new();
    m.insert("axiom".into(), json!(r.axiom.id()));
    m.insert("title".into(), json!(r.axiom.title()));
    m.insert("holds".into(), json!(r.holds));
    if r.axiom.searches_partitions() {
        m.insert(
            "partition".into(),
            r.partition.as_ref().map_or(Value::Null, |p| partition_json(env, p)),
        );
        m.insert(
            "candidates".into(),
            Value::Array(r.candidates.iter().map(|c| candidate_json(env, c)).collect()),
        );
    }
    m.insert(
        "witnesses".into(),
        Value::Array(
            r.witnesses
                .iter()
                .map(|w| {
                    json!({
                        "obligation": obligation_json(env, &w.obligation),
                        "discharges": w.discharges.iter().map(|d| discharge_json(env, d)).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        ),
    );
    m.insert(
        "counterexamples".into(),
        Value::Array(r.counterexamples.iter().map(|o| obligation_json(env, o)).collect()),
    );
    m.insert("notes".into(), json!(r.notes));
    Value::Object(m)
}

fn provenance_json<T: Scalar>(env: &Environment<T>, p: &Provenance) -> Value {
    match p {
        Provenance::ScfImage { state } => json!({"kind": p.tag(), "state": env.state_name(*state)}),
        Provenance::Penalty { agent, state, other } => json!({
            "kind": p.tag(),
            "agent": env.agent_name(*agent),
            "state": env.state_name(*state),
            "other": env.state_name(*other),
        }),
        Provenance::Blocking {
            axiom,
            obligation,
            agent,
        } => json!({
            "kind": p.tag(),
            "axiom": axiom.id(),
            "obligation": obligation_json(env, obligation),
            "agent": env.agent_name(*agent),
        }),
    }
}

fn parse_provenance<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Provenance, ParseError> {
    let st = |k: &str| field(v, k).and_then(|x| state_id(env, x));
    Ok(match field(v, "kind")?.as_str().unwrap_or_default() {
        "scf-image" => Provenance::ScfImage { state: st("state")? },
        "penalty" => Provenance::Penalty {
            agent: agent_id(env, field(v, "agent")?)?,
            state: st("state")?,
            other: st("other")?,
        },
        "blocking-witness" => Provenance::Blocking {
            axiom: field(v, "axiom")?
                .as_str()
                .unwrap_or_default()
                .parse::<AxiomId>()
                .map_err(|e| ParseError::Invalid(e.to_string()))?,
            obligation: parse_obligation(env, field(v, "obligation")?)?,
            agent: agent_id(env, field(v, "agent")?)?,
        },
        other => return Err(ParseError::Invalid(format!("unknown provenance {other:?}"))),
    })
}

pub fn sigma_json<T: Scalar>(env: &Environment<T>, sigma: &SigmaSet<T>) -> Value {
    Value::Array(
        sigma
            .entries()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                json!({
                    "index": k,
                    "provenance": provenance_json(env, &e.provenance),
                    "lottery": lottery_json(env, &e.lottery),
                })
            })
            .collect(),
    )
}

/// `[agent][state]` tables keyed by ids.
fn agent_state_json<T: Scalar>(env: &Environment<T>, table: &[Vec<Lottery<T>>]) -> Value {
    let mut m = Map::new();
    for (i, row) in table.iter().enumerate() {
        let mut per = Map::new();
        for (s, y) in row.iter().enumerate() {
            per.insert(env.state_name(s).to_string(), lottery_json(env, y));
        }
        m.insert(env.agent_name(i).to_string(), Value::Object(per));
    }
    Value::Object(m)
}

pub fn lemma_json<T: Scalar>(env: &Environment<T>, sys: &LemmaYSystem<T>) -> Value {
    let mut agent_mix = Map::new();
    let mut penalty = Map::new();
    for i in 0..env.n_agents() {
        agent_mix.insert(env.agent_name(i).to_string(), lottery_json(env, &sys.agent_mix[i]));
        let mut per = Map::new();
        for s in 0..env.n_states() {
            let mut inner = Map::new();
            for t in 0..env.n_states() {
                inner.insert(env.state_name(t).to_string(), lottery_json(env, sys.penalty(i, s, t)));
            }
            per.insert(env.state_name(s).to_string(), Value::Object(inner));
        }
        penalty.insert(env.agent_name(i).to_string(), Value::Object(per));
    }
    json!({
        "epsilon": ratio(&sys.epsilon),
        "worst": agent_state_json(env, &sys.worst),
        "agent_mix": Value::Object(agent_mix),
        "state_mix": agent_state_json(env, &sys.state_mix),
        "worst_mix": lottery_json(env, &sys.worst_mix),
        "reward": agent_state_json(env, &sys.reward),
        "penalty": Value::Object(penalty),
    })
}

fn parse_agent_state<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<Vec<Vec<Lottery<T>>>, ParseError> {
    (0..env.n_agents())
        .map(|i| {
            let row = field(v, env.agent_name(i))?;
            (0..env.n_states())
                .map(|s| parse_lottery(env, field(row, env.state_name(s))?))
                .collect()
        })
        .collect()
}

pub fn parse_lemma<T: Scalar>(env: &Environment<T>, v: &Value) -> Result<LemmaYSystem<T>, ParseError> {
    let agent_mix = (0..env.n_agents())
        .map(|i| parse_lottery(env, field(field(v, "agent_mix")?, env.agent_name(i))?))
        .collect::<Result<_, _>>()?;
    let pen = field(v, "penalty")?;
    let penalty = (0..env.n_agents())
        .map(|i| {
            let per = field(pen, env.agent_name(i))?;
            (0..env.n_states())
                .map(|s| {
                    let inner = field(per, env.state_name(s))?;
                    (0..env.n_states())
                        .map(|t| parse_lottery(env, field(inner, env.state_name(t))?))
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_, ParseError>>()?;
    Ok(LemmaYSystem {
        worst: parse_agent_state(env, field(v, "worst")?)?,
        agent_mix,
        state_mix: parse_agent_state(env, field(v, "state_mix")?)?,
        worst_mix: parse_lottery(env, field(v, "worst_mix")?)?,
        reward: parse_agent_state(env, field(v, "reward")?)?,
        penalty,
        epsilon: parse_scalar_value(field(v, "epsilon")?)?,
    })
}

fn entry_json<T: Scalar>(e: &Entry<T>) -> Value {
    json!({
        "label": e.label,
        "instance": e.instance,
        "lhs": opt_ratio(&e.lhs),
        "relation": e.relation.symbol(),
        "rhs": opt_ratio(&e.rhs),
        "holds": e.holds,
    })
}

pub fn section_json<T: Scalar>(s: &Section<T>) -> Value {
    json!({
        "name": s.name,
        "passed": s.passed(),
        "entries": s.entries.iter().map(entry_json).collect::<Vec<_>>(),
        "notes": s.notes,
    })
}

pub fn certificate_json<T: Scalar>(r: &CertificateReport<T>) -> Value {
    json!({
        "variant": r.variant.id(),
        "passed": r.passed,
        "sections": r.sections.iter().map(section_json).collect::<Vec<_>>(),
    })
}

pub fn mechanism_json<T: Scalar>(m: &CanonicalMechanism<T>) -> Value {
    let env = &m.env;
    let mut out = Map::new();
    out.insert("variant".into(), json!(m.variant.id()));
    out.insert("n_max".into(), json!(m.n_max));
    out.insert("messages_per_agent".into(), json!(m.messages_per_agent().to_string()));
    out.insert("environment".into(), env.to_json());
    match m.variant {
        Variant::Theorem1 => {
            let p = m.partition.as_ref().expect("theorem1 mechanism carries a partition");
            out.insert("partition".into(), partition_json(env, p));
        }
        Variant::Theorem2 => {
            let a = m.active_sets.as_ref().expect("theorem2 mechanism carries active sets");
            out.insert("active_sets".into(), active_sets_json(env, a));
        }
    }
    out.insert("sigma".into(), sigma_json(env, &m.sigma));
    out.insert("lemma".into(), lemma_json(env, &m.lemma));
    Value::Object(out)
}

/// Reads a mechanism file as written by [`mechanism_json`]. Nothing is re-derived
/// except the active sets, so certificates judge the stored lotteries.
pub fn parse_mechanism<T: Scalar>(text: &str) -> Result<CanonicalMechanism<T>, ParseError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let variant: Variant = field(&v, "variant")?.as_str().unwrap_or_default().parse()?;
    let n_max = field(&v, "n_max")?
        .as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| ParseError::Invalid("n_max must be a positive integer".into()))?;
    let env_text = field(&v, "environment")?.to_string();
    let env = crate::env::parse_environment::<T>(&env_text, Validation::Strict)?;
    let (partition, active_sets) = match variant {
        Variant::Theorem1 => (Some(parse_partition(&env, field(&v, "partition")?)?), None),
        Variant::Theorem2 => (None, Some(ActiveSets::new(&env))),
    };
    let mut sigma = SigmaSet::new();
    for e in field(&v, "sigma")?
        .as_array()
        .ok_or_else(|| ParseError::Invalid("sigma must be a list".into()))?
    {
        let y = parse_lottery(&env, field(e, "lottery")?)?;
        let before = sigma.len();
        sigma.insert(y, parse_provenance(&env, field(e, "provenance")?)?);
        if sigma.len() == before {
            return Err(ParseError::Invalid("sigma lists a lottery twice".into()));
        }
    }
    let lemma = parse_lemma(&env, field(&v, "lemma")?)?;
    Ok(CanonicalMechanism {
        variant,
        env,
        partition,
        active_sets,
        sigma,
        lemma,
        n_max,
    })
}

pub fn survivors_json<T: Scalar>(game: &FiniteGame<T>, r: &SurvivorSets<T>) -> Value {
    let label = |i: usize, s: usize| json!(game.strategy_labels(i)[s]);
    let opp_json = |i: usize, opp: &[usize]| -> Value {
        let mut m = Map::new();
        for (j, &s) in opp.iter().enumerate() {
            if j != i {
                m.insert(game.players()[j].clone(), label(j, s));
            }
        }
        Value::Object(m)
    };
    let mut survivors = Map::new();
    for (i, set) in r.sets.iter().enumerate() {
        survivors.insert(
            game.players()[i].clone(),
            Value::Array(set.iter().map(|&s| label(i, s)).collect()),
        );
    }
    let trace: Vec<Value> = r
        .trace
        .iter()
        .map(|t| {
            json!({
                "round": t.round,
                "player": game.players()[t.player],
                "strategy": label(t.player, t.strategy),
                "reason": "best reply to no belief over surviving opponents",
                "dominated_by": t
                    .dominator
                    .iter()
                    .map(|(s, p)| json!({"strategy": label(t.player, *s), "weight": ratio(p)}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let beliefs: Vec<Value> = r
        .beliefs
        .iter()
        .flatten()
        .map(|w| {
            json!({
                "player": game.players()[w.player],
                "strategy": label(w.player, w.strategy),
                "belief": w
                    .distribution
                    .iter()
                    .map(|(opp, p)| json!({"opponents": opp_json(w.player, opp), "weight": ratio(p)}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "rounds": r.rounds,
        "survivors": Value::Object(survivors),
        "trace": trace,
        "beliefs": beliefs,
    })
}

pub fn implementation_json<T: Scalar>(
    env: &Environment<T>,
    games: &[FiniteGame<T>],
    r: &ImplementationReport<T>,
) -> Value {
    let states: Vec<Value> = r
        .states
        .iter()
        .map(|s| {
            let game = &games[s.state];
            let offending: Vec<Value> = s
                .offending
                .iter()
                .map(|p| {
                    let labels: Vec<&str> = p
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| game.strategy_labels(i)[k].as_str())
                        .collect();
                    json!(labels)
                })
                .collect();
            json!({
                "state": env.state_name(s.state),
                "implemented": s.implemented,
                "solution": survivors_json(game, &s.survivors),
                "offending_profiles": offending,
            })
        })
        .collect();
    json!({"implemented": r.implemented, "states": states})
}

pub fn lemma_properties_json<T: Scalar>(env: &Environment<T>, r: &LemmaPropertiesReport) -> Value {
    json!({
        "applicable": r.applicable,
        "holds": r.holds,
        "inclusions": r
            .inclusions
            .iter()
            .map(|c| json!({
                "state": env.state_name(c.state),
                "other": env.state_name(c.other),
                "included": c.included,
                "equal": c.equal,
            }))
            .collect::<Vec<_>>(),
        "inactive": r
            .inactive
            .iter()
            .map(|c| json!({
                "state": env.state_name(c.state),
                "agent": env.agent_name(c.agent),
                "full_set": c.full_set,
                "constant_outcome": c.constant_outcome,
            }))
            .collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

/// A parsed game file.
#[derive(Clone, Debug)]
pub enum GameFile<T: Scalar> {
    Payoffs(FiniteGame<T>),
    /// Outcome map bound to an environment: one game per state, plus the state asked for.
    Bound {
        env: Environment<T>,
        state: Option<usize>,
        games: Vec<FiniteGame<T>>,
    },
}

/// Game files carry `players`, `strategies`, then either `payoffs` (one dense
/// list per player) or `environment` with `outcomes` (`dense` list or
/// `sparse` entries with a `default`). `resolve` turns an environment
/// reference string into its file text.
pub fn parse_game<T: Scalar>(
    text: &str,
    resolve: impl Fn(&str) -> Result<String, ParseError>,
) -> Result<GameFile<T>, ParseError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let players: Vec<String> = serde_json::from_value(field(&v, "players")?.clone())
        .map_err(|e| ParseError::Invalid(format!("players: {e}")))?;
    let strategies: Vec<Vec<String>> = serde_json::from_value(field(&v, "strategies")?.clone())
        .map_err(|e| ParseError::Invalid(format!("strategies: {e}")))?;
    let shape = |e: crate::rationalizability::GameError| ParseError::Invalid(e.to_string());
    if let Some(p) = v.get("payoffs") {
        let payoffs = p
            .as_array()
            .ok_or_else(|| ParseError::Invalid("payoffs must be one list per player".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| ParseError::Invalid("payoff row must be a list".into()))?
                    .iter()
                    .map(parse_scalar_value)
                    .collect::<Result<Vec<T>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        return FiniteGame::from_payoffs(players, strategies, payoffs)
            .map(GameFile::Payoffs)
            .map_err(shape);
    }
    let env_text = match field(&v, "environment")? {
        Value::String(r) => resolve(r)?,
        obj => obj.to_string(),
    };
    let env = crate::env::parse_environment::<T>(&env_text, Validation::Lenient)?;
    if players != env.agents() {
        return Err(ParseError::Invalid("players must match the environment's agents".into()));
    }
    let state = match v.get("state") {
        Some(s) => Some(state_id(&env, s)?),
        None => None,
    };
    let counts: Vec<usize> = strategies.iter().map(Vec::len).collect();
    let index_of = |labels: &[Value]| -> Result<Vec<usize>, ParseError> {
        if labels.len() != counts.len() {
            return Err(ParseError::Invalid("profile length differs from player count".into()));
        }
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let l = l.as_str().unwrap_or_default();
                strategies[i]
                    .iter()
                    .position(|s| s == l)
                    .ok_or_else(|| ParseError::UnknownId {
                        kind: "strategy",
                        id: l.to_string(),
                    })
            })
            .collect()
    };
    let outcomes = field(&v, "outcomes")?;
    let total: usize = counts.iter().product();
    let table: Vec<Lottery<T>> = if let Some(dense) = outcomes.get("dense") {
        let list = dense
            .as_array()
            .ok_or_else(|| ParseError::Invalid("dense outcomes must be a list".into()))?;
        if list.len() != total {
            return Err(ParseError::Invalid(format!("dense outcomes need {total} entries")));
        }
        list.iter().map(|y| parse_lottery(&env, y)).collect::<Result<_, _>>()?
    } else {
        let default = match outcomes.get("default") {
            Some(d) => Some(parse_lottery(&env, d)?),
            None => None,
        };
        let mut table: Vec<Option<Lottery<T>>> = vec![default; total];
        let strides: Vec<usize> = (0..counts.len()).map(|k| counts[k + 1..].iter().product()).collect();
        for e in field(outcomes, "sparse")?
            .as_array()
            .ok_or_else(|| ParseError::Invalid("sparse outcomes must be a list".into()))?
        {
            let profile = index_of(
                field(e, "profile")?
                    .as_array()
                    .ok_or_else(|| ParseError::Invalid("profile must be a list".into()))?,
            )?;
            let k: usize = profile.iter().zip(&strides).map(|(a, b)| a * b).sum();
            table[k] = Some(parse_lottery(&env, field(e, "lottery")?)?);
        }
        table
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ParseError::Invalid("sparse outcomes leave profiles unassigned and no default".into()))?
    };
    let games = (0..env.n_states())
        .map(|s| FiniteGame::from_outcomes(&env, s, strategies.clone(), table.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(shape)?;
    Ok(GameFile::Bound { env, state, games })
}
