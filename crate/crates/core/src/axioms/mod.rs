//! Decision procedures for the implementability conditions.
//!
//! Every check returns an [`AxiomReport`] whose witnesses can be re-verified
//! with exact arithmetic by [`verify_report`].

mod basic;
mod events;
mod search;
mod verify;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::env::{ActiveSets, AgentId, ContourKind, Environment, Lottery, OutcomeId, StateId};
use crate::error::AxiomError;
use crate::lp::find_blocking_plan;
use crate::partition::Partition;
use crate::scalar::Scalar;

pub use basic::{
    check_maskin_monotonicity, check_no_veto, check_nwa, check_responsiveness, check_strict_maskin,
};
pub use events::{
    check_dictator_monotonicity, check_strict_event_monotonicity, check_strict_iterated_elimination,
    check_strict_iterated_elimination_all, EliminationOrder, EliminationStep,
};
pub use search::{
    check_strict_event_star_star, check_strict_maskin_star, check_strict_maskin_star_star,
    evaluate_strict_maskin_star_star,
};
pub use verify::verify_report;

pub use crate::partition::{enumerate_refinements, Partition as StatePartition};

/// Largest state count for which events are enumerated.
pub const EVENT_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomId {
    Nwa,
    Responsiveness,
    Maskin,
    NoVeto,
    StrictMaskin,
    StrictMaskinStar,
    StrictMaskinStarStar,
    StrictEvent,
    Dictator,
    StrictIterated,
    StrictEventStarStar,
}

impl AxiomId {
    pub const ALL: [AxiomId; 11] = [
        AxiomId::Nwa,
        AxiomId::Responsiveness,
        AxiomId::Maskin,
        AxiomId::NoVeto,
        AxiomId::StrictMaskin,
        AxiomId::StrictMaskinStar,
        AxiomId::StrictMaskinStarStar,
        AxiomId::StrictEvent,
        AxiomId::Dictator,
        AxiomId::StrictIterated,
        AxiomId::StrictEventStarStar,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AxiomId::Nwa => "nwa",
            AxiomId::Responsiveness => "responsiveness",
            AxiomId::Maskin => "maskin",
            AxiomId::NoVeto => "no-veto",
            AxiomId::StrictMaskin => "smm",
            AxiomId::StrictMaskinStar => "smm-star",
            AxiomId::StrictMaskinStarStar => "smm-star-star",
            AxiomId::StrictEvent => "sem",
            AxiomId::Dictator => "dictator",
            AxiomId::StrictIterated => "sie",
            AxiomId::StrictEventStarStar => "sem-star-star",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            AxiomId::Nwa => "no worst alternative",
            AxiomId::Responsiveness => "responsiveness",
            AxiomId::Maskin => "Maskin monotonicity",
            AxiomId::NoVeto => "no-veto power",
            AxiomId::StrictMaskin => "strict Maskin monotonicity",
            AxiomId::StrictMaskinStar => "strict Maskin monotonicity*",
            AxiomId::StrictMaskinStarStar => "strict Maskin monotonicity**",
            AxiomId::StrictEvent => "strict event monotonicity",
            AxiomId::Dictator => "dictator monotonicity",
            AxiomId::StrictIterated => "strict iterated-elimination monotonicity",
            AxiomId::StrictEventStarStar => "strict event monotonicity**",
        }
    }

    /// Whether the condition quantifies over refinements of `P_f`.
    pub fn searches_partitions(self) -> bool {
        matches!(
            self,
            AxiomId::StrictMaskinStar | AxiomId::StrictMaskinStarStar | AxiomId::StrictEventStarStar
        )
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AxiomId {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomId::ALL
            .iter()
            .copied()
            .find(|a| a.id() == s)
            .ok_or_else(|| AxiomError::UnknownAxiom(s.to_string()))
    }
}

/// One quantified instance of a condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    /// Some outcome is strictly worse than `f(state)` for `agent`.
    AgentState { agent: AgentId, state: StateId },
    /// Ordered pair of states (`state` plays θ, `other` plays θ').
    StatePair { state: StateId, other: StateId },
    /// `outcome` is a top outcome for at least `|I| - 1` agents at `state`.
    Veto { state: StateId, outcome: OutcomeId },
    /// Reports in `block` must be refuted at true state `true_state`.
    BlockAgainst { block: Vec<StateId>, true_state: StateId },
    /// Event `event` against true state `true_state`.
    Event { true_state: StateId, event: Vec<StateId> },
    /// Dictator instance `(i, θ, θ', θ'')`.
    Dictator {
        agent: AgentId,
        state: StateId,
        other: StateId,
        reference: StateId,
    },
    /// An elimination order ending at `true_state`.
    Elimination { true_state: StateId },
}

/// One way an obligation is met.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Discharge<T> {
    WorseOutcome { outcome: OutcomeId },
    Note(String),
    /// `lottery` is below the benchmark at `state` for `agent` and above it at the true state.
    Blocking {
        agent: AgentId,
        state: StateId,
        lottery: Lottery<T>,
    },
    /// One lottery below the benchmark at every state of the block.
    CommonBlocking { agent: AgentId, lottery: Lottery<T> },
    /// A state-contingent plan `θ̂ ↦ y^θ̂`.
    ContingentPlan {
        agent: AgentId,
        plan: Vec<(StateId, Lottery<T>)>,
    },
    Elimination(EliminationOrder<T>),
}

impl<T: Scalar> Discharge<T> {
    /// Lotteries carried by this discharge.
    pub fn lotteries(&self) -> Vec<&Lottery<T>> {
        match self {
            Discharge::Blocking { lottery, .. } | Discharge::CommonBlocking { lottery, .. } => {
                vec![lottery]
            }
            Discharge::ContingentPlan { plan, .. } => plan.iter().map(|(_, y)| y).collect(),
            Discharge::Elimination(order) => order.steps.iter().map(|s| &s.lottery).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness<T> {
    pub obligation: Obligation,
    pub discharges: Vec<Discharge<T>>,
}

/// Outcome of testing one refinement during a partition search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub partition: Partition,
    pub passes: bool,
    pub failing: Vec<Obligation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport<T> {
    pub axiom: AxiomId,
    pub holds: bool,
    /// Passing partition, for conditions that search refinements.
    pub partition: Option<Partition>,
    pub candidates: Vec<Candidate>,
    pub witnesses: Vec<Witness<T>>,
    pub counterexamples: Vec<Obligation>,
    pub notes: Vec<String>,
}

impl<T: Scalar> AxiomReport<T> {
    fn from_parts(axiom: AxiomId, witnesses: Vec<Witness<T>>, counterexamples: Vec<Obligation>) -> Self {
        AxiomReport {
            axiom,
            holds: counterexamples.is_empty(),
            partition: None,
            candidates: Vec::new(),
            witnesses,
            counterexamples,
            notes: Vec::new(),
        }
    }

    /// Witness for a given obligation, if it was discharged.
    pub fn witness_for(&self, obligation: &Obligation) -> Option<&Witness<T>> {
        self.witnesses.iter().find(|w| &w.obligation == obligation)
    }
}

/// Runs the named check.
pub fn check<T: Scalar>(env: &Environment<T>, axiom: AxiomId) -> Result<AxiomReport<T>, AxiomError> {
    Ok(match axiom {
        AxiomId::Nwa => check_nwa(env),
        AxiomId::Responsiveness => check_responsiveness(env),
        AxiomId::Maskin => check_maskin_monotonicity(env),
        AxiomId::NoVeto => check_no_veto(env),
        AxiomId::StrictMaskin => check_strict_maskin(env),
        AxiomId::StrictMaskinStar => check_strict_maskin_star(env),
        AxiomId::StrictMaskinStarStar => check_strict_maskin_star_star(env),
        AxiomId::StrictEvent => check_strict_event_monotonicity(env)?,
        AxiomId::Dictator => check_dictator_monotonicity(env),
        AxiomId::StrictIterated => check_strict_iterated_elimination_all(env),
        AxiomId::StrictEventStarStar => check_strict_event_star_star(env)?,
    })
}

type Memo<K, T> = RefCell<HashMap<K, Option<Lottery<T>>>>;

/// Memoised blocking LPs shared by the checks of one environment.
pub(crate) struct Blocking<'a, T: Scalar> {
    pub env: &'a Environment<T>,
    pub active: ActiveSets,
    strict: Memo<(AgentId, StateId, StateId), T>,
    dictator: Memo<(AgentId, StateId, StateId, StateId), T>,
}

impl<'a, T: Scalar> Blocking<'a, T> {
    pub fn new(env: &'a Environment<T>) -> Self {
        Blocking {
            env,
            active: ActiveSets::new(env),
            strict: RefCell::new(HashMap::new()),
            dictator: RefCell::new(HashMap::new()),
        }
    }

    /// `y` with `u_i(f(θ̂),θ̂) > u_i(y,θ̂)` and `u_i(y,θ') > u_i(f(θ̂),θ')`.
    pub fn strict(&self, i: AgentId, from: StateId, to: StateId) -> Option<Lottery<T>> {
        if from == to {
            return None;
        }
        if let Some(hit) = self.strict.borrow().get(&(i, from, to)) {
            return hit.clone();
        }
        let f = self.env.scf_lottery(from);
        let y = find_blocking_plan(
            self.env,
            i,
            &[
                (from, ContourKind::StrictLower, f.clone()),
                (to, ContourKind::StrictUpper, f),
            ],
        );
        self.strict.borrow_mut().insert((i, from, to), y.clone());
        y
    }

    /// `y` with `u_i(f(θ''),θ'') >= u_i(y,θ'')` and `u_i(y,θ') > u_i(f(θ),θ')`.
    pub fn weak(&self, i: AgentId, state: StateId, other: StateId, reference: StateId) -> Option<Lottery<T>> {
        let key = (i, state, other, reference);
        if let Some(hit) = self.dictator.borrow().get(&key) {
            return hit.clone();
        }
        let y = find_blocking_plan(
            self.env,
            i,
            &[
                (reference, ContourKind::WeakLower, self.env.scf_lottery(reference)),
                (other, ContourKind::StrictUpper, self.env.scf_lottery(state)),
            ],
        );
        self.dictator.borrow_mut().insert(key, y.clone());
        y
    }

    /// One `y` strictly below `f` at every state of `block` and strictly above at `to`.
    pub fn common(&self, i: AgentId, block: &[StateId], to: StateId) -> Option<Lottery<T>> {
        if block.contains(&to) {
            return None;
        }
        let f = self.env.scf_lottery(block[0]);
        let mut req: Vec<(StateId, ContourKind, Lottery<T>)> = block
            .iter()
            .map(|&s| (s, ContourKind::StrictLower, f.clone()))
            .collect();
        req.push((to, ContourKind::StrictUpper, f));
        find_blocking_plan(self.env, i, &req)
    }
}

/// Events as sorted state lists, in bitmask order.
pub fn all_events(n_states: usize) -> impl Iterator<Item = Vec<StateId>> {
    (1u64..(1u64 << n_states)).map(move |mask| (0..n_states).filter(|&s| mask >> s & 1 == 1).collect())
}

pub fn check_event_cap(n_states: usize) -> Result<(), AxiomError> {
    if n_states > EVENT_CAP {
        Err(AxiomError::EventCap {
            cap: EVENT_CAP,
            got: n_states,
        })
    } else {
        Ok(())
    }
}
