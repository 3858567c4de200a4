use super::{all_events, check_event_cap, AxiomId, AxiomReport, Blocking, Discharge, Obligation, Witness};
use crate::env::{AgentId, Environment, Lottery, StateId};
use crate::error::AxiomError;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationStep<T> {
    pub state: StateId,
    pub agent: AgentId,
    pub lottery: Lottery<T>,
}

/// `(θ¹, …, θⁿ)` with one witness per deleted state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrder<T> {
    pub sequence: Vec<StateId>,
    pub steps: Vec<EliminationStep<T>>,
}

impl<T> EliminationOrder<T> {
    pub fn true_state(&self) -> StateId {
        *self.sequence.last().expect("orders are nonempty")
    }
}

pub fn check_strict_event_monotonicity<T: Scalar>(env: &Environment<T>) -> Result<AxiomReport<T>, AxiomError> {
    check_event_cap(env.n_states())?;
    let blocking = Blocking::new(env);
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    for event in all_events(env.n_states()) {
        let core = blocking.active.event(&event);
        for t in 0..env.n_states() {
            if event.iter().all(|&s| env.scf(s) == env.scf(t)) {
                continue;
            }
            let ob = Obligation::Event {
                true_state: t,
                event: event.clone(),
            };
            let found = event.iter().find_map(|&s| {
                core.iter()
                    .find_map(|&i| blocking.strict(i, s, t).map(|y| (s, i, y)))
            });
            match found {
                Some((s, i, lottery)) => witnesses.push(Witness {
                    obligation: ob,
                    discharges: vec![Discharge::Blocking {
                        agent: i,
                        state: s,
                        lottery,
                    }],
                }),
                None => counter.push(ob),
            }
        }
    }
    Ok(AxiomReport::from_parts(AxiomId::StrictEvent, witnesses, counter))
}

pub fn check_dictator_monotonicity<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let blocking = Blocking::new(env);
    let (witnesses, counter) = dictator_obligations(
        &blocking,
        |s| blocking.active.dictator(s),
        |s, t| env.scf(s) != env.scf(t),
    );
    let mut report = AxiomReport::from_parts(AxiomId::Dictator, witnesses, counter);
    if report.witnesses.is_empty() && report.holds {
        report.notes.push("no state has a single active agent".into());
    }
    report
}

/// Dictator instances `(i, θ, θ', θ'')` where `dictator_of(θ) = Some(i)`
/// and `separated(θ, θ')`.
pub(super) fn dictator_obligations<T: Scalar>(
    blocking: &Blocking<'_, T>,
    dictator_of: impl Fn(StateId) -> Option<AgentId>,
    separated: impl Fn(StateId, StateId) -> bool,
) -> (Vec<Witness<T>>, Vec<Obligation>) {
    let env = blocking.env;
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    for s in 0..env.n_states() {
        let Some(i) = dictator_of(s) else { continue };
        for t in 0..env.n_states() {
            if !separated(s, t) {
                continue;
            }
            for r in 0..env.n_states() {
                let ob = Obligation::Dictator {
                    agent: i,
                    state: s,
                    other: t,
                    reference: r,
                };
                match blocking.weak(i, s, t, r) {
                    Some(lottery) => witnesses.push(Witness {
                        obligation: ob,
                        discharges: vec![Discharge::Blocking {
                            agent: i,
                            state: r,
                            lottery,
                        }],
                    }),
                    None => counter.push(ob),
                }
            }
        }
    }
    (witnesses, counter)
}

/// Greedy elimination towards `true_state`; `None` if it gets stuck.
pub fn check_strict_iterated_elimination<T: Scalar>(
    env: &Environment<T>,
    true_state: StateId,
) -> Option<EliminationOrder<T>> {
    let blocking = Blocking::new(env);
    eliminate(&blocking, true_state)
}

pub(crate) fn eliminate<T: Scalar>(blocking: &Blocking<'_, T>, true_state: StateId) -> Option<EliminationOrder<T>> {
    let env = blocking.env;
    let mut remaining: Vec<StateId> = (0..env.n_states()).collect();
    let mut steps = Vec::new();
    while remaining.len() > 1 {
        let core = blocking.active.event(&remaining);
        let next = remaining.iter().filter(|&&s| s != true_state).find_map(|&s| {
            core.iter()
                .find_map(|&i| blocking.strict(i, s, true_state).map(|y| (s, i, y)))
        });
        let (s, agent, lottery) = next?;
        remaining.retain(|&x| x != s);
        steps.push(EliminationStep {
            state: s,
            agent,
            lottery,
        });
    }
    let mut sequence: Vec<StateId> = steps.iter().map(|st| st.state).collect();
    sequence.push(true_state);
    Some(EliminationOrder { sequence, steps })
}

/// The iterated-elimination condition for every true state.
pub fn check_strict_iterated_elimination_all<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let blocking = Blocking::new(env);
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    for t in 0..env.n_states() {
        let ob = Obligation::Elimination { true_state: t };
        match eliminate(&blocking, t) {
            Some(order) => witnesses.push(Witness {
                obligation: ob,
                discharges: vec![Discharge::Elimination(order)],
            }),
            None => counter.push(ob),
        }
    }
    AxiomReport::from_parts(AxiomId::StrictIterated, witnesses, counter)
}
