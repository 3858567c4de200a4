//! Finite environments, lotteries and the derived primitives.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Deserialize;
use serde_json::Value;

use crate::error::ParseError;
use crate::partition::Partition;
use crate::scalar::Scalar;

pub type AgentId = usize;
pub type StateId = usize;
pub type OutcomeId = usize;

/// A set of agents, kept sorted.
pub type AgentSet = BTreeSet<AgentId>;

/// Probability vector over the outcomes, indexed by outcome position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lottery<T> {
    probs: Vec<T>,
}

impl<T: Scalar> Lottery<T> {
    /// Validates nonnegativity and exact unit mass.
    pub fn new(probs: Vec<T>) -> Result<Self, ParseError> {
        if probs.is_empty() {
            return Err(ParseError::Invalid("lottery over no outcomes".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(ParseError::Invalid("negative probability".into()));
        }
        let total = crate::scalar::sum(&probs);
        if !total.is_one() {
            return Err(ParseError::Invalid(format!(
                "probabilities sum to {}",
                total.to_ratio_string()
            )));
        }
        Ok(Lottery { probs })
    }

    pub fn degenerate(n_outcomes: usize, z: OutcomeId) -> Self {
        let mut probs = vec![T::zero(); n_outcomes];
        probs[z] = T::one();
        Lottery { probs }
    }

    pub fn uniform(n_outcomes: usize) -> Self {
        let w = crate::scalar::recip_usize::<T>(n_outcomes);
        Lottery {
            probs: vec![w; n_outcomes],
        }
    }

    /// Convex combination `Σ w_k · y_k`; weights must be nonnegative and sum to one.
    pub fn combine(parts: &[(T, &Lottery<T>)]) -> Self {
        assert!(!parts.is_empty());
        let n = parts[0].1.len();
        let mut probs = vec![T::zero(); n];
        for (w, y) in parts {
            assert_eq!(y.len(), n);
            for (acc, p) in probs.iter_mut().zip(&y.probs) {
                *acc = acc.clone() + w.clone() * p.clone();
            }
        }
        debug_assert!(crate::scalar::sum(&probs).is_one());
        Lottery { probs }
    }

    /// `(1 - w)·self + w·other`.
    pub fn mix(&self, w: &T, other: &Lottery<T>) -> Self {
        Lottery::combine(&[(T::one() - w.clone(), self), (w.clone(), other)])
    }

    /// Uniform average of the given lotteries.
    pub fn average(parts: &[&Lottery<T>]) -> Self {
        let w = crate::scalar::recip_usize::<T>(parts.len());
        let weighted: Vec<(T, &Lottery<T>)> = parts.iter().map(|y| (w.clone(), *y)).collect();
        Lottery::combine(&weighted)
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<T>) -> Self {
        Lottery { probs }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, z: OutcomeId) -> &T {
        &self.probs[z]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> Vec<OutcomeId> {
        (0..self.probs.len())
            .filter(|&z| !self.probs[z].is_zero())
            .collect()
    }

    /// The outcome carrying all mass, if there is one.
    pub fn as_degenerate(&self) -> Option<OutcomeId> {
        self.probs.iter().position(|p| p.is_one())
    }
}

/// Which contour set of a benchmark lottery a `ContourSpec` describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContourKind {
    /// `u(benchmark) >= u(y)`
    WeakLower,
    /// `u(benchmark) > u(y)`
    StrictLower,
    /// `u(y) > u(benchmark)`
    StrictUpper,
}

impl ContourKind {
    pub fn id(self) -> &'static str {
        match self {
            ContourKind::WeakLower => "weak-lower",
            ContourKind::StrictLower => "strict-lower",
            ContourKind::StrictUpper => "strict-upper",
        }
    }
}

/// A contour set of `benchmark` for `agent` at `state`, kept as a constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContourSpec<T> {
    pub agent: AgentId,
    pub benchmark: Lottery<T>,
    pub state: StateId,
    pub kind: ContourKind,
}

/// Whether mechanism-level constraints are enforced at load time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Validation {
    Strict,
    #[default]
    Lenient,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment<T> {
    pub name: Option<String>,
    pub notes: Vec<String>,
    agents: Vec<String>,
    states: Vec<String>,
    outcomes: Vec<String>,
    // [agent][state][outcome]
    utility: Vec<T>,
    scf: Vec<OutcomeId>,
    stated_active: Option<Vec<AgentSet>>,
    warnings: Vec<String>,
}

impl<T: Scalar> Environment<T> {
    /// Builds an environment from dense tables; `utility[i][θ][z]`.
    pub fn new(
        agents: Vec<String>,
        states: Vec<String>,
        outcomes: Vec<String>,
        utility: Vec<Vec<Vec<T>>>,
        scf: Vec<OutcomeId>,
        validation: Validation,
    ) -> Result<Self, ParseError> {
        check_unique("agent", &agents)?;
        check_unique("state", &states)?;
        check_unique("outcome", &outcomes)?;
        if agents.is_empty() || states.is_empty() || outcomes.is_empty() {
            return Err(ParseError::Invalid(
                "agents, states and outcomes must be nonempty".into(),
            ));
        }
        if scf.len() != states.len() || scf.iter().any(|&z| z >= outcomes.len()) {
            return Err(ParseError::Invalid("scf must map every state to an outcome".into()));
        }
        let mut flat = Vec::with_capacity(agents.len() * states.len() * outcomes.len());
        if utility.len() != agents.len() {
            return Err(ParseError::Invalid("utility table has wrong agent count".into()));
        }
        for row in utility {
            if row.len() != states.len() {
                return Err(ParseError::Invalid("utility table has wrong state count".into()));
            }
            for cell in row {
                if cell.len() != outcomes.len() {
                    return Err(ParseError::Invalid(
                        "utility table has wrong outcome count".into(),
                    ));
                }
                flat.extend(cell);
            }
        }
        let mut env = Environment {
            name: None,
            notes: Vec::new(),
            agents,
            states,
            outcomes,
            utility: flat,
            scf,
            stated_active: None,
            warnings: Vec::new(),
        };
        env.warnings = env.strict_problems();
        if validation == Validation::Strict {
            env.validate_strict()?;
        }
        Ok(env)
    }

    /// Problems that make the environment unusable for mechanism construction.
    fn strict_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.agents.len() < 3 {
            out.push(format!("needs at least 3 agents, has {}", self.agents.len()));
        }
        if self.scf_image().len() < 2 {
            out.push("scf image has fewer than 2 outcomes".to_string());
        }
        out
    }

    pub fn validate_strict(&self) -> Result<(), ParseError> {
        let problems = self.strict_problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ParseError::Strict(problems.join("; ")))
        }
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn agent_name(&self, i: AgentId) -> &str {
        &self.agents[i]
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn outcome_name(&self, z: OutcomeId) -> &str {
        &self.outcomes[z]
    }

    pub fn agent_index(&self, id: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a == id)
    }

    pub fn state_index(&self, id: &str) -> Option<StateId> {
        self.states.iter().position(|a| a == id)
    }

    pub fn outcome_index(&self, id: &str) -> Option<OutcomeId> {
        self.outcomes.iter().position(|a| a == id)
    }

    /// `u_i(z, θ)` for a pure outcome.
    pub fn u(&self, i: AgentId, z: OutcomeId, state: StateId) -> &T {
        let no = self.outcomes.len();
        &self.utility[(i * self.states.len() + state) * no + z]
    }

    /// Row `z ↦ u_i(z, θ)`.
    pub fn utility_row(&self, i: AgentId, state: StateId) -> &[T] {
        let no = self.outcomes.len();
        let start = (i * self.states.len() + state) * no;
        &self.utility[start..start + no]
    }

    /// `u_i(y, θ) = Σ_z y_z u_i(z, θ)`.
    pub fn eu(&self, i: AgentId, y: &Lottery<T>, state: StateId) -> T {
        self.utility_row(i, state)
            .iter()
            .zip(y.probs())
            .fold(T::zero(), |acc, (u, p)| acc + u.clone() * p.clone())
    }

    pub fn scf(&self, state: StateId) -> OutcomeId {
        self.scf[state]
    }

    pub fn scf_lottery(&self, state: StateId) -> Lottery<T> {
        Lottery::degenerate(self.n_outcomes(), self.scf[state])
    }

    /// `f(Θ)` in outcome order.
    pub fn scf_image(&self) -> Vec<OutcomeId> {
        let set: BTreeSet<OutcomeId> = self.scf.iter().copied().collect();
        set.into_iter().collect()
    }

    pub fn degenerate(&self, z: OutcomeId) -> Lottery<T> {
        Lottery::degenerate(self.n_outcomes(), z)
    }

    /// Lowest-index outcome minimising `u_i(·, θ)`.
    pub fn worst_outcome(&self, i: AgentId, state: StateId) -> OutcomeId {
        argbest(self.utility_row(i, state), |a, b| a < b)
    }

    /// Lowest-index outcome maximising `u_i(·, θ)`.
    pub fn best_outcome(&self, i: AgentId, state: StateId) -> OutcomeId {
        argbest(self.utility_row(i, state), |a, b| a > b)
    }

    /// Active sets as printed in the source material, when the file carries them.
    pub fn stated_active_sets(&self) -> Option<&[AgentSet]> {
        self.stated_active.as_deref()
    }

    /// Renders the environment in the file format accepted by [`parse_environment`].
    pub fn to_json(&self) -> Value {
        let mut scf = serde_json::Map::new();
        for (s, name) in self.states.iter().enumerate() {
            scf.insert(name.clone(), Value::String(self.outcomes[self.scf[s]].clone()));
        }
        let mut utilities = serde_json::Map::new();
        for (i, agent) in self.agents.iter().enumerate() {
            let mut per_state = serde_json::Map::new();
            for (s, state) in self.states.iter().enumerate() {
                let mut row = serde_json::Map::new();
                for (z, outcome) in self.outcomes.iter().enumerate() {
                    row.insert(
                        outcome.clone(),
                        Value::String(self.u(i, z, s).to_ratio_string()),
                    );
                }
                per_state.insert(state.clone(), Value::Object(row));
            }
            utilities.insert(agent.clone(), Value::Object(per_state));
        }
        let mut out = serde_json::Map::new();
        if let Some(name) = &self.name {
            out.insert("name".into(), Value::String(name.clone()));
        }
        out.insert("agents".into(), serde_json::json!(self.agents));
        out.insert("states".into(), serde_json::json!(self.states));
        out.insert("outcomes".into(), serde_json::json!(self.outcomes));
        out.insert("scf".into(), Value::Object(scf));
        out.insert("utilities".into(), Value::Object(utilities));
        Value::Object(out)
    }
}

fn argbest<T: Scalar>(row: &[T], better: impl Fn(&T, &T) -> bool) -> OutcomeId {
    let mut best = 0;
    for z in 1..row.len() {
        if better(&row[z], &row[best]) {
            best = z;
        }
    }
    best
}

fn check_unique(kind: &'static str, ids: &[String]) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(ParseError::DuplicateId {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct RawEnvironment {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    notes: Vec<String>,
    agents: Vec<String>,
    states: Vec<String>,
    outcomes: Vec<String>,
    scf: BTreeMap<String, String>,
    utilities: BTreeMap<String, BTreeMap<String, BTreeMap<String, Value>>>,
    #[serde(default)]
    stated_active_sets: Option<BTreeMap<String, Vec<String>>>,
}

/// Reads a rational given as a JSON integer or a `"p/q"` string.
pub fn parse_scalar_value<T: Scalar>(v: &Value) -> Result<T, ParseError> {
    match v {
        Value::String(s) => T::parse_ratio(s),
        Value::Number(n) => match n.as_i64() {
            Some(k) => Ok(T::int(k)),
            None => Err(ParseError::InvalidRational(n.to_string())),
        },
        other => Err(ParseError::InvalidRational(other.to_string())),
    }
}

/// Parses an environment file.
pub fn parse_environment<T: Scalar>(
    text: &str,
    validation: Validation,
) -> Result<Environment<T>, ParseError> {
    let raw: RawEnvironment =
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    check_unique("agent", &raw.agents)?;
    check_unique("state", &raw.states)?;
    check_unique("outcome", &raw.outcomes)?;
    let index = |ids: &[String]| -> HashMap<String, usize> {
        ids.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect()
    };
    let agent_ix = index(&raw.agents);
    let state_ix = index(&raw.states);
    let outcome_ix = index(&raw.outcomes);

    for key in raw.scf.keys() {
        if !state_ix.contains_key(key) {
            return Err(ParseError::UnknownId {
                kind: "state",
                id: key.clone(),
            });
        }
    }
    let mut scf = Vec::with_capacity(raw.states.len());
    for s in &raw.states {
        let z = raw.scf.get(s).ok_or_else(|| ParseError::MissingScf(s.clone()))?;
        let zi = *outcome_ix.get(z).ok_or_else(|| ParseError::UnknownId {
            kind: "outcome",
            id: z.clone(),
        })?;
        scf.push(zi);
    }

    for (agent, per_state) in &raw.utilities {
        if !agent_ix.contains_key(agent) {
            return Err(ParseError::UnknownId {
                kind: "agent",
                id: agent.clone(),
            });
        }
        for (state, row) in per_state {
            if !state_ix.contains_key(state) {
                return Err(ParseError::UnknownId {
                    kind: "state",
                    id: state.clone(),
                });
            }
            for outcome in row.keys() {
                if !outcome_ix.contains_key(outcome) {
                    return Err(ParseError::UnknownId {
                        kind: "outcome",
                        id: outcome.clone(),
                    });
                }
            }
        }
    }

    let mut utility = Vec::with_capacity(raw.agents.len());
    for a in &raw.agents {
        let mut rows = Vec::with_capacity(raw.states.len());
        for s in &raw.states {
            let mut cells = Vec::with_capacity(raw.outcomes.len());
            for z in &raw.outcomes {
                let missing = || ParseError::MissingUtility {
                    agent: a.clone(),
                    state: s.clone(),
                    outcome: z.clone(),
                };
                let v = raw
                    .utilities
                    .get(a)
                    .and_then(|m| m.get(s))
                    .and_then(|m| m.get(z))
                    .ok_or_else(missing)?;
                cells.push(parse_scalar_value::<T>(v)?);
            }
            rows.push(cells);
        }
        utility.push(rows);
    }

    let mut env = Environment::new(
        raw.agents.clone(),
        raw.states.clone(),
        raw.outcomes.clone(),
        utility,
        scf,
        validation,
    )?;
    env.name = raw.name;
    env.notes = raw.notes;
    if let Some(stated) = raw.stated_active_sets {
        let mut sets = vec![AgentSet::new(); raw.states.len()];
        for (state, agents) in stated {
            let s = *state_ix.get(&state).ok_or_else(|| ParseError::UnknownId {
                kind: "state",
                id: state.clone(),
            })?;
            for a in agents {
                let i = *agent_ix.get(&a).ok_or(ParseError::UnknownId {
                    kind: "agent",
                    id: a.clone(),
                })?;
                sets[s].insert(i);
            }
        }
        env.stated_active = Some(sets);
    }
    Ok(env)
}

/// `u_i(y, θ)`.
pub fn expected_utility<T: Scalar>(
    env: &Environment<T>,
    i: AgentId,
    y: &Lottery<T>,
    state: StateId,
) -> T {
    env.eu(i, y, state)
}

pub fn satisfies_contour<T: Scalar>(
    env: &Environment<T>,
    spec: &ContourSpec<T>,
    y: &Lottery<T>,
) -> bool {
    let uy = env.eu(spec.agent, y, spec.state);
    let ub = env.eu(spec.agent, &spec.benchmark, spec.state);
    match spec.kind {
        ContourKind::WeakLower => ub >= uy,
        ContourKind::StrictLower => ub > uy,
        ContourKind::StrictUpper => uy > ub,
    }
}

/// `I^θ`: agents with some outcome strictly worse than `f(θ)` at `θ`.
pub fn active_agents<T: Scalar>(env: &Environment<T>, state: StateId) -> AgentSet {
    let f = env.scf(state);
    (0..env.n_agents())
        .filter(|&i| {
            let row = env.utility_row(i, state);
            row.iter().any(|u| *u < row[f])
        })
        .collect()
}

/// `I^E`, the intersection of `I^θ` over a nonempty event.
pub fn active_agents_event<T: Scalar>(
    env: &Environment<T>,
    event: &[StateId],
) -> Result<AgentSet, ParseError> {
    if event.is_empty() {
        return Err(ParseError::Invalid("empty event".into()));
    }
    Ok(ActiveSets::new(env).event(event))
}

/// Per-state active sets with event intersections on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSets {
    per_state: Vec<AgentSet>,
}

impl ActiveSets {
    pub fn new<T: Scalar>(env: &Environment<T>) -> Self {
        ActiveSets {
            per_state: (0..env.n_states()).map(|s| active_agents(env, s)).collect(),
        }
    }

    pub fn from_sets(per_state: Vec<AgentSet>) -> Self {
        ActiveSets { per_state }
    }

    pub fn at(&self, state: StateId) -> &AgentSet {
        &self.per_state[state]
    }

    pub fn per_state(&self) -> &[AgentSet] {
        &self.per_state
    }

    pub fn contains(&self, state: StateId, i: AgentId) -> bool {
        self.per_state[state].contains(&i)
    }

    /// `∩_{θ ∈ E} I^θ`; the empty event yields the empty set.
    pub fn event(&self, event: &[StateId]) -> AgentSet {
        let mut iter = event.iter();
        let Some(&first) = iter.next() else {
            return AgentSet::new();
        };
        let mut acc = self.per_state[first].clone();
        for &s in iter {
            acc = acc.intersection(&self.per_state[s]).copied().collect();
        }
        acc
    }

    /// `I^Θ`.
    pub fn core(&self) -> AgentSet {
        let all: Vec<StateId> = (0..self.per_state.len()).collect();
        self.event(&all)
    }

    /// The dictator at `θ`, when `I^θ` is a singleton.
    pub fn dictator(&self, state: StateId) -> Option<AgentId> {
        let set = &self.per_state[state];
        if set.len() == 1 {
            set.iter().next().copied()
        } else {
            None
        }
    }
}

/// Discrepancy between stated and recomputed active sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSetErratum {
    pub state: StateId,
    pub stated: AgentSet,
    pub recomputed: AgentSet,
}

/// Compares the active sets printed in the file (if any) with recomputed ones.
pub fn active_set_errata<T: Scalar>(env: &Environment<T>) -> Vec<ActiveSetErratum> {
    let Some(stated) = env.stated_active_sets() else {
        return Vec::new();
    };
    let actual = ActiveSets::new(env);
    (0..env.n_states())
        .filter(|&s| stated[s] != *actual.at(s))
        .map(|s| ActiveSetErratum {
            state: s,
            stated: stated[s].clone(),
            recomputed: actual.at(s).clone(),
        })
        .collect()
}

/// `P_f`: states grouped by equal scf value.
pub fn scf_partition<T: Scalar>(env: &Environment<T>) -> Partition {
    let mut groups: BTreeMap<OutcomeId, Vec<StateId>> = BTreeMap::new();
    for s in 0..env.n_states() {
        groups.entry(env.scf(s)).or_default().push(s);
    }
    Partition::new(groups.into_values().collect(), env.n_states())
        .expect("scf groups form a partition")
}

/// Outcome beating every other one by strict pairwise majority at `θ`.
pub fn condorcet_winner<T: Scalar>(env: &Environment<T>, state: StateId) -> Option<OutcomeId> {
    (0..env.n_outcomes()).find(|&z| {
        (0..env.n_outcomes()).filter(|&w| w != z).all(|w| {
            let mut pro = 0usize;
            let mut con = 0usize;
            for i in 0..env.n_agents() {
                let (uz, uw) = (env.u(i, z, state), env.u(i, w, state));
                if uz > uw {
                    pro += 1;
                } else if uz < uw {
                    con += 1;
                }
            }
            pro > con
        })
    })
}

pub fn is_condorcet_function<T: Scalar>(env: &Environment<T>) -> bool {
    (0..env.n_states()).all(|s| condorcet_winner(env, s) == Some(env.scf(s)))
}
