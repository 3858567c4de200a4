use super::{AxiomId, AxiomReport, Discharge, Obligation};
use crate::env::{active_agents, AgentId, Environment, Lottery, StateId};
use crate::partition::Partition;
use crate::scalar::Scalar;

fn strict_block<T: Scalar>(env: &Environment<T>, i: AgentId, y: &Lottery<T>, from: StateId, to: StateId) -> bool {
    let f = env.scf_lottery(from);
    env.eu(i, y, from) < env.eu(i, &f, from) && env.eu(i, y, to) > env.eu(i, &f, to)
}

fn active_event<T: Scalar>(env: &Environment<T>, event: &[StateId]) -> Vec<AgentId> {
    (0..env.n_agents())
        .filter(|&i| event.iter().all(|&s| active_agents(env, s).contains(&i)))
        .collect()
}

/// Re-checks every discharge in `report` with exact arithmetic.
pub fn verify_report<T: Scalar>(env: &Environment<T>, report: &AxiomReport<T>) -> Result<(), String> {
    if report.holds != report.counterexamples.is_empty() {
        return Err("holds flag disagrees with the counterexample list".into());
    }
    let partition: Option<&Partition> = report
        .partition
        .as_ref()
        .or_else(|| report.candidates.first().map(|c| &c.partition));
    for w in &report.witnesses {
        if w.discharges.is_empty() {
            return Err(format!("{:?} has no discharge", w.obligation));
        }
        for d in &w.discharges {
            for y in d.lotteries() {
                if y.len() != env.n_outcomes() {
                    return Err("lottery has the wrong dimension".into());
                }
            }
            if !discharges(env, report.axiom, partition, &w.obligation, d) {
                return Err(format!("discharge {d:?} does not meet {:?}", w.obligation));
            }
        }
    }
    Ok(())
}

fn discharges<T: Scalar>(
    env: &Environment<T>,
    axiom: AxiomId,
    partition: Option<&Partition>,
    ob: &Obligation,
    d: &Discharge<T>,
) -> bool {
    use AxiomId as A;
    match (axiom, ob, d) {
        (A::Nwa, Obligation::AgentState { agent, state }, Discharge::WorseOutcome { outcome }) => {
            env.u(*agent, *outcome, *state) < env.u(*agent, env.scf(*state), *state)
        }
        (A::Responsiveness, Obligation::StatePair { state, other }, Discharge::Note(_)) => {
            env.scf(*state) != env.scf(*other)
        }
        (A::NoVeto, Obligation::Veto { state, outcome }, Discharge::Note(_)) => *outcome == env.scf(*state),
        (
            A::Maskin | A::StrictMaskin,
            Obligation::StatePair { state, other },
            Discharge::Blocking { agent, state: s, lottery },
        ) => {
            if s != state || env.scf(*state) == env.scf(*other) {
                return false;
            }
            if axiom == A::StrictMaskin {
                strict_block(env, *agent, lottery, *state, *other)
            } else {
                let f = env.scf_lottery(*state);
                env.eu(*agent, lottery, *state) <= env.eu(*agent, &f, *state)
                    && env.eu(*agent, lottery, *other) > env.eu(*agent, &f, *other)
            }
        }
        (
            A::StrictMaskinStar,
            Obligation::BlockAgainst { block, true_state },
            Discharge::CommonBlocking { agent, lottery },
        ) => !block.contains(true_state) && block.iter().all(|&s| strict_block(env, *agent, lottery, s, *true_state)),
        (
            A::StrictMaskinStarStar,
            Obligation::BlockAgainst { block, true_state },
            Discharge::ContingentPlan { agent, plan },
        ) => !block.contains(true_state) && plan_covers(env, *agent, plan, block, *true_state),
        (A::StrictEvent, Obligation::Event { true_state, event }, Discharge::Blocking { agent, state, lottery }) => {
            event.contains(state)
                && active_event(env, event).contains(agent)
                && strict_block(env, *agent, lottery, *state, *true_state)
        }
        (
            A::Dictator | A::StrictEventStarStar,
            Obligation::Dictator {
                agent,
                state,
                other,
                reference,
            },
            Discharge::Blocking {
                agent: a,
                state: r,
                lottery,
            },
        ) => {
            let home: Vec<StateId> = match (axiom, partition) {
                (A::Dictator, _) => vec![*state],
                (_, Some(p)) => p.block_of(*state).to_vec(),
                _ => return false,
            };
            let f_ref = env.scf_lottery(*reference);
            let f = env.scf_lottery(*state);
            a == agent
                && r == reference
                && active_event(env, &home) == vec![*agent]
                && env.eu(*agent, lottery, *reference) <= env.eu(*agent, &f_ref, *reference)
                && env.eu(*agent, lottery, *other) > env.eu(*agent, &f, *other)
        }
        (
            A::StrictEventStarStar,
            Obligation::Event { true_state, event },
            Discharge::ContingentPlan { agent, plan },
        ) => {
            let Some(p) = partition else { return false };
            let Some(&(first, _)) = plan.first() else { return false };
            let block = p.block_of(first);
            block.iter().all(|s| event.contains(s))
                && active_event(env, event).contains(agent)
                && plan_covers(env, *agent, plan, block, *true_state)
        }
        (A::StrictIterated, Obligation::Elimination { true_state }, Discharge::Elimination(order)) => {
            let mut seq = order.sequence.clone();
            seq.sort_unstable();
            if seq != (0..env.n_states()).collect::<Vec<_>>()
                || order.true_state() != *true_state
                || order.steps.len() + 1 != order.sequence.len()
            {
                return false;
            }
            let mut remaining: Vec<StateId> = (0..env.n_states()).collect();
            for (k, step) in order.steps.iter().enumerate() {
                if step.state != order.sequence[k]
                    || !active_event(env, &remaining).contains(&step.agent)
                    || !strict_block(env, step.agent, &step.lottery, step.state, *true_state)
                {
                    return false;
                }
                remaining.retain(|&s| s != step.state);
            }
            true
        }
        _ => false,
    }
}

fn plan_covers<T: Scalar>(
    env: &Environment<T>,
    agent: AgentId,
    plan: &[(StateId, Lottery<T>)],
    block: &[StateId],
    to: StateId,
) -> bool {
    plan.len() == block.len()
        && block
            .iter()
            .all(|s| plan.iter().any(|(t, y)| t == s && strict_block(env, agent, y, *s, to)))
}
