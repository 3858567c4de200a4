use super::{AxiomId, AxiomReport, Blocking, Discharge, Obligation, Witness};
use crate::env::{active_agents, Environment};
use crate::scalar::Scalar;

pub fn check_nwa<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    for i in 0..env.n_agents() {
        for s in 0..env.n_states() {
            let ob = Obligation::AgentState { agent: i, state: s };
            let worst = env.worst_outcome(i, s);
            if env.u(i, worst, s) < env.u(i, env.scf(s), s) {
                witnesses.push(Witness {
                    obligation: ob,
                    discharges: vec![Discharge::WorseOutcome { outcome: worst }],
                });
            } else {
                counter.push(ob);
            }
        }
    }
    debug_assert_eq!(
        counter.is_empty(),
        (0..env.n_states()).all(|s| active_agents(env, s).len() == env.n_agents())
    );
    AxiomReport::from_parts(AxiomId::Nwa, witnesses, counter)
}

pub fn check_responsiveness<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    for s in 0..env.n_states() {
        for t in s + 1..env.n_states() {
            let ob = Obligation::StatePair { state: s, other: t };
            if env.scf(s) == env.scf(t) {
                counter.push(ob);
            } else {
                witnesses.push(Witness {
                    obligation: ob,
                    discharges: vec![Discharge::Note("distinct scf values".into())],
                });
            }
        }
    }
    AxiomReport::from_parts(AxiomId::Responsiveness, witnesses, counter)
}

/// Shared body of the two Maskin-type pair conditions.
fn pairwise<T: Scalar>(env: &Environment<T>, strict: bool) -> (Vec<Witness<T>>, Vec<Obligation>) {
    let blocking = Blocking::new(env);
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    for s in 0..env.n_states() {
        for t in 0..env.n_states() {
            if env.scf(s) == env.scf(t) {
                continue;
            }
            let ob = Obligation::StatePair { state: s, other: t };
            let discharges: Vec<Discharge<T>> = (0..env.n_agents())
                .filter_map(|j| {
                    let y = if strict {
                        blocking.strict(j, s, t)
                    } else {
                        blocking.weak(j, s, t, s)
                    };
                    y.map(|lottery| Discharge::Blocking {
                        agent: j,
                        state: s,
                        lottery,
                    })
                })
                .collect();
            if discharges.is_empty() {
                counter.push(ob);
            } else {
                witnesses.push(Witness {
                    obligation: ob,
                    discharges,
                });
            }
        }
    }
    (witnesses, counter)
}

pub fn check_maskin_monotonicity<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let (w, c) = pairwise(env, false);
    AxiomReport::from_parts(AxiomId::Maskin, w, c)
}

pub fn check_strict_maskin<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let (w, c) = pairwise(env, true);
    AxiomReport::from_parts(AxiomId::StrictMaskin, w, c)
}

pub fn check_no_veto<T: Scalar>(env: &Environment<T>) -> AxiomReport<T> {
    let mut witnesses = Vec::new();
    let mut counter = Vec::new();
    let need = env.n_agents().saturating_sub(1);
    for s in 0..env.n_states() {
        for z in 0..env.n_outcomes() {
            let tops = (0..env.n_agents())
                .filter(|&i| {
                    let row = env.utility_row(i, s);
                    row.iter().all(|u| *u <= row[z])
                })
                .count();
            if tops < need {
                continue;
            }
            let ob = Obligation::Veto { state: s, outcome: z };
            if z == env.scf(s) {
                witnesses.push(Witness {
                    obligation: ob,
                    discharges: vec![Discharge::Note(format!("{tops} agents rank it top; it is the scf value"))],
                });
            } else {
                counter.push(ob);
            }
        }
    }
    AxiomReport::from_parts(AxiomId::NoVeto, witnesses, counter)
}
