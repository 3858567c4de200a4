//! The auxiliary lottery system behind both canonical mechanisms, and the
//! finite lottery menu Σ.

use std::collections::HashMap;

use thiserror::Error;

use crate::axioms::{AxiomId, AxiomReport, Obligation};
use crate::certificate::{Entry, Section};
use crate::env::{ActiveSets, AgentId, Environment, Lottery, StateId};
use crate::lp::Relation;
use crate::scalar::Scalar;

/// `ȳ`, `y*_i(θ)`, `z_i(θ,θ')` and the intermediate averages they are built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaYSystem<T> {
    /// `ȳ_i(θ)`, indexed `[i][θ]`.
    pub worst: Vec<Vec<Lottery<T>>>,
    /// `ȳ_i`.
    pub agent_mix: Vec<Lottery<T>>,
    /// `y_i(θ)`, indexed `[i][θ]`.
    pub state_mix: Vec<Vec<Lottery<T>>>,
    /// `ȳ`.
    pub worst_mix: Lottery<T>,
    /// `y*_i(θ)`, indexed `[i][θ]`.
    pub reward: Vec<Vec<Lottery<T>>>,
    /// `z_i(θ,θ')`, indexed `[i][θ][θ']`.
    pub penalty: Vec<Vec<Vec<Lottery<T>>>>,
    pub epsilon: T,
}

impl<T: Scalar> LemmaYSystem<T> {
    pub fn penalty(&self, i: AgentId, state: StateId, other: StateId) -> &Lottery<T> {
        &self.penalty[i][state][other]
    }

    pub fn reward(&self, i: AgentId, state: StateId) -> &Lottery<T> {
        &self.reward[i][state]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lemma certificate failed: {0}")]
pub struct LemmaError(pub String);

/// Builds the system with ε at half the smallest threshold, then re-verifies it.
pub fn build_lemma_y<T: Scalar>(env: &Environment<T>) -> Result<LemmaYSystem<T>, LemmaError> {
    let base = build_lemma_y_with_epsilon(env, T::one());
    let eps = choose_epsilon(env, &base);
    let sys = build_lemma_y_with_epsilon(env, eps);
    let section = lemma_certificates(env, &sys);
    let failure = section.failures().next().map(|e| format!("{} at {}", e.label, e.instance));
    match failure {
        None => Ok(sys),
        Some(msg) => Err(LemmaError(msg)),
    }
}

/// The construction for a given ε, without verification.
pub fn build_lemma_y_with_epsilon<T: Scalar>(env: &Environment<T>, epsilon: T) -> LemmaYSystem<T> {
    let active = ActiveSets::new(env);
    let (ni, ns) = (env.n_agents(), env.n_states());
    let worst: Vec<Vec<Lottery<T>>> = (0..ni)
        .map(|i| {
            (0..ns)
                .map(|s| {
                    if active.contains(s, i) {
                        env.degenerate(env.worst_outcome(i, s))
                    } else {
                        env.scf_lottery(s)
                    }
                })
                .collect()
        })
        .collect();
    let agent_mix: Vec<Lottery<T>> = worst.iter().map(|row| Lottery::average(&row.iter().collect::<Vec<_>>())).collect();
    // the θ slot of the average is replaced by f(θ)
    let state_mix: Vec<Vec<Lottery<T>>> = (0..ni)
        .map(|i| {
            (0..ns)
                .map(|s| {
                    let f = env.scf_lottery(s);
                    let parts: Vec<&Lottery<T>> = (0..ns).map(|t| if t == s { &f } else { &worst[i][t] }).collect();
                    Lottery::average(&parts)
                })
                .collect()
        })
        .collect();
    let worst_mix = Lottery::average(&agent_mix.iter().collect::<Vec<_>>());
    let reward: Vec<Vec<Lottery<T>>> = (0..ni)
        .map(|i| {
            (0..ns)
                .map(|s| {
                    let parts: Vec<&Lottery<T>> = (0..ni).map(|j| if j == i { &state_mix[i][s] } else { &agent_mix[j] }).collect();
                    Lottery::average(&parts)
                })
                .collect()
        })
        .collect();
    let penalty = (0..ni)
        .map(|i| {
            (0..ns)
                .map(|s| {
                    (0..ns)
                        .map(|t| {
                            let w = if s == t { &agent_mix[i] } else { &state_mix[i][s] };
                            worst[i][t].mix(&epsilon, w)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    LemmaYSystem {
        worst,
        agent_mix,
        state_mix,
        worst_mix,
        reward,
        penalty,
        epsilon,
    }
}

/// Half the smallest ε-threshold of the penalty constraints, capped at ½.
///
/// With `z = (1-ε)·ȳ_i(θ') + ε·w`, the constraint `u(f(θ')) > u(z)` reads
/// `g > ε·d` with `g = u(f(θ')) - u(ȳ_i(θ'))` and `d = u(w) - u(ȳ_i(θ'))`.
fn choose_epsilon<T: Scalar>(env: &Environment<T>, base: &LemmaYSystem<T>) -> T {
    let active = ActiveSets::new(env);
    let mut best = T::one();
    for t in 0..env.n_states() {
        for &i in active.at(t) {
            let low = env.eu(i, &base.worst[i][t], t);
            let g = env.eu(i, &env.scf_lottery(t), t) - low.clone();
            for s in 0..env.n_states() {
                let w = if s == t { &base.agent_mix[i] } else { &base.state_mix[i][s] };
                let d = env.eu(i, w, t) - low.clone();
                if d.is_positive() {
                    let threshold = g.clone() / d;
                    if threshold < best {
                        best = threshold;
                    }
                }
            }
        }
    }
    best / T::int(2)
}

/// The three inequality families, every quantified instance.
pub fn lemma_certificates<T: Scalar>(env: &Environment<T>, sys: &LemmaYSystem<T>) -> Section<T> {
    let active = ActiveSets::new(env);
    let mut sec = Section::new("lemma");
    let ns = env.n_states();
    for s in 0..ns {
        for &i in active.at(s) {
            sec.entries.push(Entry::compare(
                "reward_beats_worst_mix",
                format!("agent {}, state {}", env.agent_name(i), env.state_name(s)),
                env.eu(i, &sys.reward[i][s], s),
                Relation::Gt,
                env.eu(i, &sys.worst_mix, s),
            ));
        }
    }
    for s in 0..ns {
        for t in 0..ns {
            for &i in active.at(t) {
                sec.entries.push(Entry::compare(
                    "scf_beats_penalty",
                    format!(
                        "agent {}, penalty ({}, {})",
                        env.agent_name(i),
                        env.state_name(s),
                        env.state_name(t)
                    ),
                    env.eu(i, &env.scf_lottery(t), t),
                    Relation::Gt,
                    env.eu(i, &sys.penalty[i][s][t], t),
                ));
            }
        }
    }
    for s in 0..ns {
        for t in 0..ns {
            if s == t {
                continue;
            }
            for &i in active.at(s) {
                sec.entries.push(Entry::compare(
                    "penalty_order",
                    format!(
                        "agent {}, penalties ({}, {}) vs ({}, {})",
                        env.agent_name(i),
                        env.state_name(s),
                        env.state_name(t),
                        env.state_name(t),
                        env.state_name(t)
                    ),
                    env.eu(i, &sys.penalty[i][s][t], s),
                    Relation::Gt,
                    env.eu(i, &sys.penalty[i][t][t], s),
                ));
            }
        }
    }
    sec
}

/// Why a lottery is in Σ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    ScfImage { state: StateId },
    Penalty { agent: AgentId, state: StateId, other: StateId },
    Blocking { axiom: AxiomId, obligation: Obligation, agent: AgentId },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::ScfImage { .. } => "scf-image",
            Provenance::Penalty { .. } => "penalty",
            Provenance::Blocking { .. } => "blocking-witness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaEntry<T> {
    pub lottery: Lottery<T>,
    /// First reason the lottery was added.
    pub provenance: Provenance,
}

/// Ordered, duplicate-free finite menu of lotteries.
#[derive(Clone, Debug)]
pub struct SigmaSet<T> {
    entries: Vec<SigmaEntry<T>>,
    index: HashMap<Lottery<T>, usize>,
}

impl<T: Scalar> SigmaSet<T> {
    pub fn new() -> Self {
        SigmaSet {
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Adds `lottery` unless present; returns its position.
    pub fn insert(&mut self, lottery: Lottery<T>, provenance: Provenance) -> usize {
        if let Some(&k) = self.index.get(&lottery) {
            return k;
        }
        let k = self.entries.len();
        self.index.insert(lottery.clone(), k);
        self.entries.push(SigmaEntry { lottery, provenance });
        k
    }

    pub fn entries(&self) -> &[SigmaEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> &Lottery<T> {
        &self.entries[k].lottery
    }

    pub fn position(&self, y: &Lottery<T>) -> Option<usize> {
        self.index.get(y).copied()
    }

    pub fn lotteries(&self) -> impl Iterator<Item = &Lottery<T>> {
        self.entries.iter().map(|e| &e.lottery)
    }

    /// Replaces the lottery at `k` in place. Meant for negative controls.
    pub fn replace(&mut self, k: usize, lottery: Lottery<T>) {
        self.index.retain(|_, v| *v != k);
        self.index.entry(lottery.clone()).or_insert(k);
        self.entries[k].lottery = lottery;
    }
}

impl<T: Scalar> PartialEq for SigmaSet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl<T: Scalar> Eq for SigmaSet<T> {}

impl<T: Scalar> Default for SigmaSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigmaError {
    #[error("{axiom} does not hold, so its witnesses cannot populate the menu")]
    NotDischarged { axiom: AxiomId },
    #[error("obligation {0} has no discharge")]
    Missing(String),
}

/// `f(Θ)`, every penalty, and the primary lotteries of each report's witnesses.
pub fn build_sigma<T: Scalar>(
    env: &Environment<T>,
    lemma: &LemmaYSystem<T>,
    reports: &[&AxiomReport<T>],
) -> Result<SigmaSet<T>, SigmaError> {
    let mut sigma = SigmaSet::new();
    for s in 0..env.n_states() {
        sigma.insert(env.scf_lottery(s), Provenance::ScfImage { state: s });
    }
    for i in 0..env.n_agents() {
        for s in 0..env.n_states() {
            for t in 0..env.n_states() {
                sigma.insert(
                    lemma.penalty[i][s][t].clone(),
                    Provenance::Penalty {
                        agent: i,
                        state: s,
                        other: t,
                    },
                );
            }
        }
    }
    for report in reports {
        if !report.holds {
            return Err(SigmaError::NotDischarged { axiom: report.axiom });
        }
        for w in &report.witnesses {
            let d = w
                .discharges
                .first()
                .ok_or_else(|| SigmaError::Missing(format!("{:?}", w.obligation)))?;
            let agent = match d {
                crate::axioms::Discharge::Blocking { agent, .. }
                | crate::axioms::Discharge::CommonBlocking { agent, .. }
                | crate::axioms::Discharge::ContingentPlan { agent, .. } => *agent,
                _ => continue,
            };
            for y in d.lotteries() {
                sigma.insert(
                    y.clone(),
                    Provenance::Blocking {
                        axiom: report.axiom,
                        obligation: w.obligation.clone(),
                        agent,
                    },
                );
            }
        }
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{corpus, Rational};
    use num_traits::{One, Signed};

    #[test]
    fn every_example_verifies() {
        for name in corpus::NAMES {
            let env = corpus::load::<Rational>(name).unwrap();
            let sys = build_lemma_y(&env).unwrap();
            assert!(sys.epsilon.is_positive() && sys.epsilon < Rational::one());
            let half = build_lemma_y_with_epsilon(&env, sys.epsilon.clone() / Rational::int(2));
            assert!(lemma_certificates(&env, &half).passed(), "{name}");
        }
    }

    #[test]
    fn worst_outcome_for_active_agent() {
        let env = corpus::load::<Rational>("ex1b").unwrap();
        let sys = build_lemma_y(&env).unwrap();
        let c = env.outcome_index("c").unwrap();
        assert_eq!(sys.worst[0][0].as_degenerate(), Some(c));
    }

    #[test]
    fn inactive_agents_skipped() {
        let env = corpus::load::<Rational>("ex1a").unwrap();
        let sys = build_lemma_y(&env).unwrap();
        let sec = lemma_certificates(&env, &sys);
        assert!(sec.entries.iter().all(|e| !e.instance.starts_with("agent i4")));
        for s in 0..env.n_states() {
            assert_eq!(sys.worst[3][s], env.scf_lottery(s));
        }
    }
}
