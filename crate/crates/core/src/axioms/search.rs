use super::events::dictator_obligations;
use super::{check_event_cap, AxiomId, AxiomReport, Blocking, Candidate, Discharge, Obligation, Witness};
use crate::env::{scf_partition, Environment, StateId};
use crate::error::AxiomError;
use crate::partition::{enumerate_refinements, Partition};
use crate::scalar::Scalar;

type Evaluation<T> = (Vec<Witness<T>>, Vec<Obligation>);

fn search<T: Scalar>(
    env: &Environment<T>,
    axiom: AxiomId,
    evaluate: impl Fn(&Partition) -> Evaluation<T>,
) -> AxiomReport<T> {
    let mut candidates = Vec::new();
    let mut first: Option<Evaluation<T>> = None;
    for p in enumerate_refinements(&scf_partition(env)) {
        let (witnesses, failing) = evaluate(&p);
        let passes = failing.is_empty();
        candidates.push(Candidate {
            partition: p.clone(),
            passes,
            failing: failing.clone(),
        });
        if passes {
            return AxiomReport {
                axiom,
                holds: true,
                partition: Some(p),
                candidates,
                witnesses,
                counterexamples: Vec::new(),
                notes: Vec::new(),
            };
        }
        if first.is_none() {
            first = Some((witnesses, failing));
        }
    }
    let (witnesses, counterexamples) = first.expect("P_f is always a candidate");
    AxiomReport {
        axiom,
        holds: false,
        partition: None,
        candidates,
        witnesses,
        counterexamples,
        notes: vec![format!("no partition satisfies {}", axiom.title())],
    }
}

fn block_obligations<T: Scalar>(
    env: &Environment<T>,
    p: &Partition,
    discharge: impl Fn(&[StateId], StateId) -> Vec<Discharge<T>>,
) -> Evaluation<T> {
    let mut witnesses = Vec::new();
    let mut failing = Vec::new();
    for block in p.blocks() {
        for t in 0..env.n_states() {
            if block.contains(&t) {
                continue;
            }
            let ob = Obligation::BlockAgainst {
                block: block.clone(),
                true_state: t,
            };
            let d = discharge(block, t);
            if d.is_empty() {
                failing.push(ob);
            } else {
                witnesses.push(Witness {
                    obligation: ob,
                    discharges: d,
                });
            }
        }
    }
    (witnesses, failing)
}

/// Per-agent contingent plans refuting `block` at `t`.
fn plans<T: Scalar>(blocking: &Blocking<'_, T>, agents: impl Iterator<Item = usize>, block: &[StateId], t: StateId) -> Vec<Discharge<T>> {
    agents
        .filter_map(|i| {
            let plan: Option<Vec<_>> = block
                .iter()
                .map(|&s| blocking.strict(i, s, t).map(|y| (s, y)))
                .collect();
            plan.map(|plan| Discharge::ContingentPlan { agent: i, plan })
        })
        .collect()
}

pub fn check_strict_maskin_star<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let blocking = Blocking::new(env);
    search(env, AxiomId::StrictMaskinStar, |p| {
        block_obligations(env, p, |block, t| {
            (0..env.n_agents())
                .filter_map(|i| {
                    blocking
                        .common(i, block, t)
                        .map(|lottery| Discharge::CommonBlocking { agent: i, lottery })
                })
                .collect()
        })
    })
}

pub fn check_strict_maskin_star_star<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let blocking = Blocking::new(env);
    search(env, AxiomId::StrictMaskinStarStar, |p| {
        block_obligations(env, p, |block, t| plans(&blocking, 0..env.n_agents(), block, t))
    })
}

/// The ** condition for one given partition (no search).
pub fn evaluate_strict_maskin_star_star<T: Scalar>(env: &Environment<T>, p: &Partition) -> AxiomReport<T> {
    let blocking = Blocking::new(env);
    let (witnesses, failing) = block_obligations(env, p, |block, t| plans(&blocking, 0..env.n_agents(), block, t));
    let mut report = AxiomReport::from_parts(AxiomId::StrictMaskinStarStar, witnesses, failing);
    report.candidates.push(Candidate {
        partition: p.clone(),
        passes: report.holds,
        failing: report.counterexamples.clone(),
    });
    if report.holds {
        report.partition = Some(p.clone());
    }
    report
}

pub fn check_strict_event_star_star<T: Scalar>(env: &Environment<T>) -> Result<AxiomReport<T>, AxiomError> {
    check_event_cap(env.n_states())?;
    let blocking = Blocking::new(env);
    Ok(search(env, AxiomId::StrictEventStarStar, |p| {
        let mut witnesses = Vec::new();
        let mut failing = Vec::new();
        let nb = p.n_blocks();
        // part 1: unions of blocks
        for mask in 1u64..(1u64 << nb) {
            let chosen: Vec<usize> = (0..nb).filter(|&k| mask >> k & 1 == 1).collect();
            let mut union: Vec<StateId> = chosen.iter().flat_map(|&k| p.blocks()[k].iter().copied()).collect();
            union.sort_unstable();
            let core = blocking.active.event(&union);
            for t in 0..env.n_states() {
                if chosen.len() == 1 && p.block_index(t) == chosen[0] {
                    continue;
                }
                let ob = Obligation::Event {
                    true_state: t,
                    event: union.clone(),
                };
                let found = chosen
                    .iter()
                    .find_map(|&k| plans(&blocking, core.iter().copied(), &p.blocks()[k], t).into_iter().next());
                match found {
                    Some(d) => witnesses.push(Witness {
                        obligation: ob,
                        discharges: vec![d],
                    }),
                    None => failing.push(ob),
                }
            }
        }
        // part 2: dictators of blocks
        let block_dictator = |s: StateId| {
            let set = blocking.active.event(p.block_of(s));
            if set.len() == 1 {
                set.into_iter().next()
            } else {
                None
            }
        };
        let (w2, f2) = dictator_obligations(&blocking, block_dictator, |s, t| !p.same_block(s, t));
        witnesses.extend(w2);
        failing.extend(f2);
        (witnesses, failing)
    }))
}
