//! The two canonical mechanisms, their outcome rules, and exact replay of
//! the elimination argument as inequality certificates.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use crate::axioms::{
    all_events, check_dictator_monotonicity, check_event_cap, check_nwa, check_responsiveness,
    check_strict_event_monotonicity, check_strict_maskin_star_star, evaluate_strict_maskin_star_star,
    AxiomReport,
};
use crate::certificate::{Entry, FadingMix, Section};
use crate::env::{scf_partition, ActiveSets, AgentId, Environment, Lottery, OutcomeId, StateId};
use crate::error::{AxiomError, ParseError};
use crate::lemma::{build_lemma_y, build_sigma, lemma_certificates, LemmaError, LemmaYSystem, SigmaError, SigmaSet};
use crate::lp::Relation;
use crate::partition::Partition;
use crate::scalar::Scalar;

pub const DEFAULT_N_MAX: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Partition-based agreement; needs no worst alternative.
    Theorem1,
    /// Agreement among active agents; needs responsiveness.
    Theorem2,
}

impl Variant {
    pub fn id(self) -> &'static str {
        match self {
            Variant::Theorem1 => "theorem1",
            Variant::Theorem2 => "theorem2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Variant {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theorem1" => Ok(Variant::Theorem1),
            "theorem2" => Ok(Variant::Theorem2),
            _ => Err(ParseError::Invalid(format!("unknown variant {s:?}"))),
        }
    }
}

/// `[m¹, m², m³, m⁴]`: a state, a positive integer, a Σ-index per state, an outcome.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    pub m1: StateId,
    pub m2: u32,
    pub m3: Vec<usize>,
    pub m4: OutcomeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Rule1,
    Rule2a,
    Rule2b,
    Rule3,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Rule1 => "rule1",
            Rule::Rule2a => "rule2a",
            Rule::Rule2b => "rule2b",
            Rule::Rule3 => "rule3",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleClassification {
    pub rule: Rule,
    pub agreed_state: Option<StateId>,
    pub deviator: Option<AgentId>,
    pub hypothetical_state: Option<StateId>,
    pub winner: Option<AgentId>,
}

#[derive(Debug, Error)]
pub enum BuildError<T: Scalar> {
    #[error(transparent)]
    Validation(#[from] ParseError),
    #[error("truncation bound must be >= 1")]
    NMax,
    #[error("precondition {} fails", .0.axiom.title())]
    Precondition(Box<AxiomReport<T>>),
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error(transparent)]
    Lemma(#[from] LemmaError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error("{0}")]
    Partition(String),
    #[error("no agent is active at every state")]
    EmptyCore,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MessageError {
    #[error("profile has {got} messages for {expected} agents")]
    ProfileLength { expected: usize, got: usize },
    #[error("agent {agent}: {reason}")]
    OutOfRange { agent: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalMechanism<T: Scalar> {
    pub variant: Variant,
    pub env: Environment<T>,
    /// Agreement classes, Theorem-1 variant.
    pub partition: Option<Partition>,
    /// Agreement sets, Theorem-2 variant.
    pub active_sets: Option<ActiveSets>,
    pub sigma: SigmaSet<T>,
    pub lemma: LemmaYSystem<T>,
    pub n_max: u32,
}

fn precondition<T: Scalar>(report: AxiomReport<T>) -> Result<(), BuildError<T>> {
    if report.holds {
        Ok(())
    } else {
        Err(BuildError::Precondition(Box::new(report)))
    }
}

pub fn build_theorem1_mechanism<T: Scalar>(
    env: &Environment<T>,
    partition: &Partition,
    sigma: SigmaSet<T>,
    lemma: LemmaYSystem<T>,
    n_max: u32,
) -> Result<CanonicalMechanism<T>, BuildError<T>> {
    env.validate_strict()?;
    if n_max == 0 {
        return Err(BuildError::NMax);
    }
    precondition(check_nwa(env))?;
    if partition.n_states() != env.n_states() || !partition.refines(&scf_partition(env)) {
        return Err(BuildError::Partition("partition does not refine the scf partition".into()));
    }
    precondition(evaluate_strict_maskin_star_star(env, partition))?;
    Ok(CanonicalMechanism {
        variant: Variant::Theorem1,
        env: env.clone(),
        partition: Some(partition.clone()),
        active_sets: None,
        sigma,
        lemma,
        n_max,
    })
}

pub fn build_theorem2_mechanism<T: Scalar>(
    env: &Environment<T>,
    sigma: SigmaSet<T>,
    lemma: LemmaYSystem<T>,
    n_max: u32,
) -> Result<CanonicalMechanism<T>, BuildError<T>> {
    env.validate_strict()?;
    if n_max == 0 {
        return Err(BuildError::NMax);
    }
    precondition(check_responsiveness(env))?;
    precondition(check_strict_event_monotonicity(env)?)?;
    precondition(check_dictator_monotonicity(env))?;
    let active = ActiveSets::new(env);
    if active.core().is_empty() {
        return Err(BuildError::EmptyCore);
    }
    Ok(CanonicalMechanism {
        variant: Variant::Theorem2,
        env: env.clone(),
        partition: None,
        active_sets: Some(active),
        sigma,
        lemma,
        n_max,
    })
}

/// Lemma, partition search, Σ and mechanism in one go.
pub fn theorem1<T: Scalar>(env: &Environment<T>, n_max: u32) -> Result<CanonicalMechanism<T>, BuildError<T>> {
    env.validate_strict()?;
    precondition(check_nwa(env))?;
    let report = check_strict_maskin_star_star(env);
    let Some(partition) = report.partition.clone() else {
        return Err(BuildError::Precondition(Box::new(report)));
    };
    let lemma = build_lemma_y(env)?;
    let sigma = build_sigma(env, &lemma, &[&report])?;
    build_theorem1_mechanism(env, &partition, sigma, lemma, n_max)
}

pub fn theorem2<T: Scalar>(env: &Environment<T>, n_max: u32) -> Result<CanonicalMechanism<T>, BuildError<T>> {
    env.validate_strict()?;
    precondition(check_responsiveness(env))?;
    let sem = check_strict_event_monotonicity(env)?;
    precondition(sem.clone())?;
    let dict = check_dictator_monotonicity(env);
    precondition(dict.clone())?;
    let lemma = build_lemma_y(env)?;
    let sigma = build_sigma(env, &lemma, &[&sem, &dict])?;
    build_theorem2_mechanism(env, sigma, lemma, n_max)
}

pub fn build<T: Scalar>(env: &Environment<T>, variant: Variant, n_max: u32) -> Result<CanonicalMechanism<T>, BuildError<T>> {
    match variant {
        Variant::Theorem1 => theorem1(env, n_max),
        Variant::Theorem2 => theorem2(env, n_max),
    }
}

impl<T: Scalar> CanonicalMechanism<T> {
    /// `|Θ| · n_max · |Σ|^|Θ| · |Z|`.
    pub fn messages_per_agent(&self) -> BigInt {
        let env = &self.env;
        BigInt::from(env.n_states())
            * BigInt::from(self.n_max)
            * BigInt::from(self.sigma.len()).pow(env.n_states() as u32)
            * BigInt::from(env.n_outcomes())
    }

    pub fn validate_message(&self, agent: usize, m: &Message) -> Result<(), MessageError> {
        let env = &self.env;
        let bad = |reason: String| Err(MessageError::OutOfRange { agent, reason });
        if m.m1 >= env.n_states() {
            return bad(format!("state index {} out of range", m.m1));
        }
        if m.m2 == 0 || m.m2 > self.n_max {
            return bad(format!("integer {} outside [1, {}]", m.m2, self.n_max));
        }
        if m.m3.len() != env.n_states() || m.m3.iter().any(|&k| k >= self.sigma.len()) {
            return bad("plan must give one menu index per state".into());
        }
        if m.m4 >= env.n_outcomes() {
            return bad(format!("outcome index {} out of range", m.m4));
        }
        Ok(())
    }

    pub fn validate_profile(&self, profile: &[Message]) -> Result<(), MessageError> {
        if profile.len() != self.env.n_agents() {
            return Err(MessageError::ProfileLength {
                expected: self.env.n_agents(),
                got: profile.len(),
            });
        }
        profile
            .iter()
            .enumerate()
            .try_for_each(|(i, m)| self.validate_message(i, m))
    }

    fn same_class(&self, a: StateId, b: StateId) -> bool {
        match &self.partition {
            Some(p) => p.same_block(a, b),
            None => a == b,
        }
    }

    /// Agents other than `skip` all report a state equivalent to `anchor` with integer 1.
    fn others_agree(&self, profile: &[Message], skip: Option<AgentId>, anchor: StateId) -> bool {
        profile
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .all(|(_, m)| m.m2 == 1 && self.same_class(m.m1, anchor))
    }

    fn agreement(&self, profile: &[Message]) -> Option<StateId> {
        match (&self.partition, &self.active_sets) {
            (Some(_), _) => {
                let anchor = profile[0].m1;
                self.others_agree(profile, None, anchor).then_some(anchor)
            }
            (None, Some(active)) => (0..self.env.n_states()).find(|&s| {
                active
                    .at(s)
                    .iter()
                    .all(|&i| profile[i].m1 == s && profile[i].m2 == 1)
            }),
            (None, None) => unreachable!("mechanism without agreement classes"),
        }
    }

    fn unilateral(&self, profile: &[Message]) -> Option<(AgentId, StateId)> {
        let n = profile.len();
        (0..n).find_map(|i| {
            let anchor = profile[(i + 1) % n].m1;
            self.others_agree(profile, Some(i), anchor).then_some((i, anchor))
        })
    }

    pub fn classify_profile(&self, profile: &[Message]) -> RuleClassification {
        if let Some(s) = self.agreement(profile) {
            return RuleClassification {
                rule: Rule::Rule1,
                agreed_state: Some(s),
                deviator: None,
                hypothetical_state: None,
                winner: None,
            };
        }
        if let Some((i, hat)) = self.unilateral(profile) {
            let env = &self.env;
            let y = self.sigma.get(profile[i].m3[hat]);
            let guard = env.eu(i, &env.scf_lottery(hat), hat) >= env.eu(i, y, hat);
            return RuleClassification {
                rule: if guard { Rule::Rule2a } else { Rule::Rule2b },
                agreed_state: None,
                deviator: Some(i),
                hypothetical_state: Some(hat),
                winner: None,
            };
        }
        let top = profile.iter().map(|m| m.m2).max().unwrap_or(0);
        let j = profile.iter().rposition(|m| m.m2 == top).expect("nonempty profile");
        RuleClassification {
            rule: Rule::Rule3,
            agreed_state: None,
            deviator: None,
            hypothetical_state: None,
            winner: Some(j),
        }
    }

    /// `g(m)`.
    pub fn outcome(&self, profile: &[Message]) -> Lottery<T> {
        let c = self.classify_profile(profile);
        let env = &self.env;
        let fade = |n: u32| T::one() / T::int(n as i64 + 1);
        match c.rule {
            Rule::Rule1 => env.scf_lottery(c.agreed_state.unwrap()),
            Rule::Rule2a => {
                let (i, hat) = (c.deviator.unwrap(), c.hypothetical_state.unwrap());
                self.sigma
                    .get(profile[i].m3[hat])
                    .mix(&fade(profile[i].m2), self.lemma.penalty(i, hat, hat))
            }
            Rule::Rule2b => {
                let (i, hat) = (c.deviator.unwrap(), c.hypothetical_state.unwrap());
                self.lemma.penalty(i, hat, hat).clone()
            }
            Rule::Rule3 => {
                let j = c.winner.unwrap();
                env.degenerate(profile[j].m4)
                    .mix(&fade(profile[j].m2), &self.lemma.worst_mix)
            }
        }
    }

    /// Σ index maximising `u_i(·, θ*)` among entries weakly below `f(θ)` at θ.
    pub fn best_challenge(&self, i: AgentId, state: StateId, true_state: StateId) -> Option<usize> {
        let env = &self.env;
        let cap = env.eu(i, &env.scf_lottery(state), state);
        let mut best: Option<(usize, T)> = None;
        for (k, y) in self.sigma.lotteries().enumerate() {
            if env.eu(i, y, state) > cap {
                continue;
            }
            let v = env.eu(i, y, true_state);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((k, v));
            }
        }
        best.map(|(k, _)| k)
    }

    /// Agents whose incentives the proof quantifies over at `true_state`.
    fn quantified(&self, true_state: StateId) -> Vec<AgentId> {
        match &self.active_sets {
            Some(a) if self.variant == Variant::Theorem2 => a.at(true_state).iter().copied().collect(),
            _ => (0..self.env.n_agents()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateReport<T> {
    pub variant: Variant,
    pub sections: Vec<Section<T>>,
    pub passed: bool,
}

impl<T: Scalar> CertificateReport<T> {
    pub fn section(&self, name: &str) -> Option<&Section<T>> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Replays every inequality the elimination argument relies on.
pub fn verify_certificates<T: Scalar>(mech: &CanonicalMechanism<T>) -> CertificateReport<T> {
    let cert = Certifier::new(mech);
    let mut sections = vec![lemma_certificates(&mech.env, &mech.lemma), cert.sigma()];
    sections.push(cert.step1());
    sections.push(cert.step2());
    sections.push(cert.step3());
    sections.push(cert.step4());
    sections.push(cert.step5());
    let passed = sections.iter().all(|s| s.passed());
    CertificateReport {
        variant: mech.variant,
        sections,
        passed,
    }
}

struct Certifier<'a, T: Scalar> {
    mech: &'a CanonicalMechanism<T>,
    env: &'a Environment<T>,
    active: ActiveSets,
}

impl<'a, T: Scalar> Certifier<'a, T> {
    fn new(mech: &'a CanonicalMechanism<T>) -> Self {
        Certifier {
            mech,
            env: &mech.env,
            active: ActiveSets::new(&mech.env),
        }
    }

    fn agent(&self, i: AgentId) -> &str {
        self.env.agent_name(i)
    }

    fn state(&self, s: StateId) -> &str {
        self.env.state_name(s)
    }

    fn u(&self, i: AgentId, y: &Lottery<T>, s: StateId) -> T {
        self.env.eu(i, y, s)
    }

    fn uf(&self, i: AgentId, of: StateId, at: StateId) -> T {
        self.u(i, &self.env.scf_lottery(of), at)
    }

    fn strictly_blocks(&self, i: AgentId, y: &Lottery<T>, from: StateId, to: StateId) -> bool {
        self.u(i, y, from) < self.uf(i, from, from) && self.u(i, y, to) > self.uf(i, from, to)
    }

    /// First Σ entry with `i` blocking `from` at `to`.
    fn sigma_block(&self, i: AgentId, from: StateId, to: StateId) -> Option<usize> {
        self.mech
            .sigma
            .lotteries()
            .position(|y| self.strictly_blocks(i, y, from, to))
    }

    fn challenge_value(&self, i: AgentId, state: StateId, true_state: StateId) -> Option<T> {
        self.mech
            .best_challenge(i, state, true_state)
            .map(|k| self.u(i, self.mech.sigma.get(k), true_state))
    }

    fn best_pure(&self, i: AgentId, true_state: StateId) -> T {
        self.env.u(i, self.env.best_outcome(i, true_state), true_state).clone()
    }

    fn sigma(&self) -> Section<T> {
        let env = self.env;
        let mech = self.mech;
        let mut sec = Section::new("sigma");
        let mut missing = Vec::new();
        for s in 0..env.n_states() {
            if mech.sigma.position(&env.scf_lottery(s)).is_none() {
                missing.push(format!("f({})", self.state(s)));
            }
        }
        for i in 0..env.n_agents() {
            for s in 0..env.n_states() {
                for t in 0..env.n_states() {
                    if mech.sigma.position(mech.lemma.penalty(i, s, t)).is_none() {
                        missing.push(format!("z_{}({}, {})", self.agent(i), self.state(s), self.state(t)));
                    }
                }
            }
        }
        for m in missing {
            sec.entries.push(Entry::missing("sigma_membership", m, Relation::Ge));
        }
        match mech.variant {
            Variant::Theorem1 => self.sigma_plans(&mut sec),
            Variant::Theorem2 => self.sigma_events(&mut sec),
        }
        sec
    }

    fn sigma_plans(&self, sec: &mut Section<T>) {
        let env = self.env;
        let p = self.mech.partition.as_ref().expect("theorem1 mechanism carries a partition");
        for block in p.blocks() {
            for t in 0..env.n_states() {
                if block.contains(&t) {
                    continue;
                }
                let found = (0..env.n_agents()).find_map(|i| {
                    let plan: Option<Vec<(StateId, usize)>> =
                        block.iter().map(|&s| self.sigma_block(i, s, t).map(|k| (s, k))).collect();
                    plan.map(|plan| (i, plan))
                });
                let names: Vec<&str> = block.iter().map(|&s| self.state(s)).collect();
                match found {
                    Some((i, plan)) => {
                        for (s, k) in plan {
                            let y = self.mech.sigma.get(k);
                            sec.entries.push(Entry::compare(
                                "sigma_plan_block",
                                format!(
                                    "block {{{}}} vs true {}: agent {}, report {}, menu entry {k}",
                                    names.join(","),
                                    self.state(t),
                                    self.agent(i),
                                    self.state(s)
                                ),
                                self.u(i, y, t),
                                Relation::Gt,
                                self.uf(i, s, t),
                            ));
                        }
                    }
                    None => sec.entries.push(Entry::missing(
                        "sigma_plan_block",
                        format!("block {{{}}} vs true {}", names.join(","), self.state(t)),
                        Relation::Gt,
                    )),
                }
            }
        }
    }

    fn sigma_events(&self, sec: &mut Section<T>) {
        let env = self.env;
        let ns = env.n_states();
        let core = self.active.core();
        sec.entries.push(Entry::compare(
            "active_core_nonempty",
            "agents active at every state",
            T::int(core.len() as i64),
            Relation::Gt,
            T::zero(),
        ));
        if check_event_cap(ns).is_err() {
            sec.notes.push("event enumeration skipped: too many states".into());
            sec.entries.push(Entry::missing("sigma_event_block", "state count above the event cap", Relation::Gt));
        } else {
            for event in all_events(ns) {
                let idle = self.active.event(&event);
                let names: Vec<&str> = event.iter().map(|&s| self.state(s)).collect();
                for t in 0..ns {
                    if event.iter().all(|&s| env.scf(s) == env.scf(t)) {
                        continue;
                    }
                    let found = event.iter().find_map(|&s| {
                        idle.iter()
                            .find_map(|&i| self.sigma_block(i, s, t).map(|k| (s, i, k)))
                    });
                    let inst = format!("event {{{}}} vs true {}", names.join(","), self.state(t));
                    sec.entries.push(match found {
                        Some((s, i, k)) => Entry::compare(
                            "sigma_event_block",
                            format!("{inst}: agent {}, report {}, menu entry {k}", self.agent(i), self.state(s)),
                            self.u(i, self.mech.sigma.get(k), t),
                            Relation::Gt,
                            self.uf(i, s, t),
                        ),
                        None => Entry::missing("sigma_event_block", inst, Relation::Gt),
                    });
                }
            }
        }
        for s in 0..ns {
            let Some(i) = self.active.dictator(s) else { continue };
            for t in 0..ns {
                if env.scf(s) == env.scf(t) {
                    continue;
                }
                sec.entries.push(Entry::compare(
                    "dictator_truthful",
                    format!("dictator {} at {}, true {}", self.agent(i), self.state(s), self.state(t)),
                    self.uf(i, t, t),
                    Relation::Gt,
                    self.uf(i, s, t),
                ));
                for r in 0..ns {
                    let found = self.mech.sigma.lotteries().position(|y| {
                        self.u(i, y, r) <= self.uf(i, r, r) && self.u(i, y, t) > self.uf(i, s, t)
                    });
                    let inst = format!(
                        "dictator {} at {}, true {}, reference {}",
                        self.agent(i),
                        self.state(s),
                        self.state(t),
                        self.state(r)
                    );
                    sec.entries.push(match found {
                        Some(k) => Entry::compare(
                            "sigma_dictator_block",
                            format!("{inst}: menu entry {k}"),
                            self.u(i, self.mech.sigma.get(k), t),
                            Relation::Gt,
                            self.uf(i, s, t),
                        ),
                        None => Entry::missing("sigma_dictator_block", inst, Relation::Gt),
                    });
                }
            }
        }
    }

    /// Truth-telling is a Nash equilibrium.
    fn step1(&self) -> Section<T> {
        let env = self.env;
        let mech = self.mech;
        let mut sec = Section::new("step1");
        let half = T::one() / T::int(2);
        for t in 0..env.n_states() {
            for i in mech.quantified(t) {
                let z = mech.lemma.penalty(i, t, t);
                let stay = self.uf(i, t, t);
                sec.entries.push(Entry::compare(
                    "scf_beats_penalty",
                    format!("true {}, agent {}, outright penalty", self.state(t), self.agent(i)),
                    stay.clone(),
                    Relation::Gt,
                    self.u(i, z, t),
                ));
                for (k, y) in mech.sigma.lotteries().enumerate() {
                    if self.u(i, y, t) > stay {
                        continue;
                    }
                    let fam = FadingMix::new(self.u(i, y, t), self.u(i, z, t), half.clone());
                    let (rel, sup) = fam.weak_bound();
                    sec.entries.push(Entry::compare(
                        "deviation_no_gain",
                        format!(
                            "true {}, agent {}, challenge with menu entry {k}, sup over integers",
                            self.state(t),
                            self.agent(i)
                        ),
                        stay.clone(),
                        rel,
                        sup,
                    ));
                }
                if mech.variant == Variant::Theorem2 {
                    for s in 0..env.n_states() {
                        if s != t && self.active.dictator(s) == Some(i) {
                            sec.entries.push(Entry::compare(
                                "dictator_truthful",
                                format!("true {}, dictator {} claims {}", self.state(t), self.agent(i), self.state(s)),
                                stay.clone(),
                                Relation::Gt,
                                self.uf(i, s, t),
                            ));
                        }
                    }
                }
            }
            if mech.variant == Variant::Theorem2 {
                let idle: Vec<&str> = (0..env.n_agents())
                    .filter(|&i| !self.active.contains(t, i))
                    .map(|i| self.agent(i))
                    .collect();
                if !idle.is_empty() {
                    sec.notes.push(format!(
                        "true {}: {} cannot move the outcome away from agreement",
                        self.state(t),
                        idle.join(", ")
                    ));
                }
            }
        }
        sec
    }

    /// Best replies put no weight on Rules 2 and 3.
    fn step2(&self) -> Section<T> {
        let env = self.env;
        let mech = self.mech;
        let mut sec = Section::new("step2");
        let half = T::one() / T::int(2);
        for t in 0..env.n_states() {
            for i in mech.quantified(t) {
                let top = self.best_pure(i, t);
                for s in 0..env.n_states() {
                    // others agreeing on s without i already meet Rule 1
                    if mech.variant == Variant::Theorem2 && !self.active.contains(s, i) {
                        continue;
                    }
                    let z = mech.lemma.penalty(i, s, s);
                    let inst = format!("true {}, agent {}, hypothetical {}", self.state(t), self.agent(i), self.state(s));
                    let Some(best) = self.challenge_value(i, s, t) else {
                        sec.entries.push(Entry::missing("challenge_beats_penalty", inst, Relation::Gt));
                        continue;
                    };
                    sec.entries.push(Entry::compare(
                        "challenge_beats_penalty",
                        inst.clone(),
                        best.clone(),
                        Relation::Gt,
                        self.u(i, z, t),
                    ));
                    let cap = self.uf(i, s, s);
                    for (k, y) in mech.sigma.lotteries().enumerate() {
                        if self.u(i, y, s) > cap {
                            continue;
                        }
                        let fam = FadingMix::new(self.u(i, y, t), self.u(i, z, t), T::zero());
                        let (rel, sup) = fam.strict_bound();
                        sec.entries.push(Entry::compare(
                            "challenge_gap_rule2",
                            format!("{inst}, menu entry {k}, sup over integers"),
                            best.clone(),
                            rel,
                            sup,
                        ));
                    }
                }
                for z in 0..env.n_outcomes() {
                    let fam = FadingMix::new(
                        env.u(i, z, t).clone(),
                        self.u(i, &mech.lemma.worst_mix, t),
                        half.clone(),
                    );
                    let (rel, sup) = fam.strict_bound();
                    sec.entries.push(Entry::compare(
                        "challenge_gap_rule3",
                        format!(
                            "true {}, agent {}, outcome {}, sup over integers",
                            self.state(t),
                            self.agent(i),
                            env.outcome_name(z)
                        ),
                        top.clone(),
                        rel,
                        sup,
                    ));
                }
            }
        }
        sec
    }

    fn step3(&self) -> Section<T> {
        let mut sec = Section::new("step3");
        match self.mech.variant {
            Variant::Theorem1 => {
                sec.notes
                    .push("integers above 1 trigger Rule 2 or 3 with certainty, which step 2 excludes".into());
            }
            Variant::Theorem2 => {
                for t in 0..self.env.n_states() {
                    self.eliminate(t, &mut sec);
                }
            }
        }
        sec
    }

    /// Agreement on each false state is ruled out along an elimination order.
    fn eliminate(&self, t: StateId, sec: &mut Section<T>) {
        let env = self.env;
        let mut remaining: Vec<StateId> = (0..env.n_states()).collect();
        let mut step = 0;
        while remaining.len() > 1 {
            step += 1;
            let idle = self.active.event(&remaining);
            let found = remaining.iter().filter(|&&s| s != t).find_map(|&s| {
                idle.iter()
                    .find_map(|&j| self.sigma_block(j, s, t).map(|k| (s, j, k)))
            });
            let Some((s, j, k)) = found else {
                sec.entries.push(Entry::missing(
                    "elimination_gain",
                    format!("true {}, step {step}: no deletable state", self.state(t)),
                    Relation::Gt,
                ));
                return;
            };
            let base = format!("true {}, step {step}, agent {} against {}", self.state(t), self.agent(j), self.state(s));
            let lost = self.uf(j, s, t);
            sec.entries.push(Entry::compare(
                "elimination_gain",
                format!("{base}, menu entry {k}"),
                self.u(j, self.mech.sigma.get(k), t),
                Relation::Gt,
                lost.clone(),
            ));
            let top = self.best_pure(j, t);
            let challenge = |r: StateId| self.challenge_value(j, r, t);
            if self.active.dictator(s) == Some(j) {
                for r in 0..env.n_states() {
                    let inst = format!("{base}, challenge at {}", self.state(r));
                    sec.entries.push(match challenge(r) {
                        Some(v) => Entry::compare("dictator_gap_rule2", inst, v, Relation::Gt, lost.clone()),
                        None => Entry::missing("dictator_gap_rule2", inst, Relation::Gt),
                    });
                }
                sec.entries.push(Entry::compare("dictator_gap_rule3", base, top, Relation::Gt, lost));
            } else {
                sec.entries.push(match challenge(s) {
                    Some(v) => Entry::compare("deviator_gap_rule2", base.clone(), v, Relation::Gt, lost.clone()),
                    None => Entry::missing("deviator_gap_rule2", base.clone(), Relation::Gt),
                });
                sec.entries.push(Entry::compare("deviator_gap_rule3", base, top, Relation::Gt, lost));
            }
            remaining.retain(|&x| x != s);
        }
    }

    fn step4(&self) -> Section<T> {
        let env = self.env;
        let mut sec = Section::new("step4");
        match self.mech.variant {
            Variant::Theorem1 => {
                let p = self.mech.partition.as_ref().expect("theorem1 mechanism carries a partition");
                for t in 0..env.n_states() {
                    for block in p.blocks() {
                        if block.contains(&t) {
                            continue;
                        }
                        let names: Vec<&str> = block.iter().map(|&s| self.state(s)).collect();
                        let inst = format!("true {}, block {{{}}}", self.state(t), names.join(","));
                        let gains = |j: AgentId| -> Option<Vec<(StateId, T)>> {
                            block
                                .iter()
                                .map(|&s| {
                                    self.challenge_value(j, s, t)
                                        .filter(|v| *v > self.uf(j, s, t))
                                        .map(|v| (s, v))
                                })
                                .collect()
                        };
                        match (0..env.n_agents()).find_map(|j| gains(j).map(|g| (j, g))) {
                            Some((j, g)) => {
                                for (s, v) in g {
                                    sec.entries.push(Entry::compare(
                                        "whistle_blower_gain",
                                        format!("{inst}: agent {}, report {}", self.agent(j), self.state(s)),
                                        v,
                                        Relation::Gt,
                                        self.uf(j, s, t),
                                    ));
                                }
                            }
                            None => sec.entries.push(Entry::missing("whistle_blower_gain", inst, Relation::Gt)),
                        }
                    }
                }
            }
            Variant::Theorem2 => {
                sec.notes.push(
                    "agents active everywhere can only agree on the true state, by steps 2 and 3".into(),
                );
            }
        }
        sec
    }

    fn step5(&self) -> Section<T> {
        let mut sec = Section::new("step5");
        sec.notes.push(match self.mech.variant {
            Variant::Theorem1 => "every agent reports inside the true block, by steps 2 and 4".into(),
            Variant::Theorem2 => "active agents report the true state, by steps 2 and 4".into(),
        });
        sec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{corpus, Rational};

    fn msg(m1: StateId, m2: u32, ns: usize) -> Message {
        Message {
            m1,
            m2,
            m3: vec![0; ns],
            m4: 0,
        }
    }

    #[test]
    fn classification_rules() {
        let env = corpus::load::<Rational>("ex1b").unwrap();
        let mech = theorem2(&env, 8).unwrap();
        let ns = env.n_states();
        let n = env.n_agents();
        let all: Vec<Message> = (0..n).map(|_| msg(0, 1, ns)).collect();
        let c = mech.classify_profile(&all);
        assert_eq!((c.rule, c.agreed_state), (Rule::Rule1, Some(0)));
        assert_eq!(mech.outcome(&all), env.scf_lottery(0));

        let mut dev = all.clone();
        dev[1] = msg(2, 5, ns);
        let c = mech.classify_profile(&dev);
        assert!(matches!(c.rule, Rule::Rule2a | Rule::Rule2b));
        assert_eq!(c.deviator, Some(1));

        let mut multi = all.clone();
        multi[0] = msg(1, 7, ns);
        multi[1] = msg(2, 7, ns);
        let c = mech.classify_profile(&multi);
        assert_eq!((c.rule, c.winner), (Rule::Rule3, Some(1)));
        let y = mech.outcome(&multi);
        let expect = env.degenerate(0).mix(&Rational::frac(1, 8), &mech.lemma.worst_mix);
        assert_eq!(y, expect);
    }

    #[test]
    fn zero_truncation_rejected() {
        let env = corpus::load::<Rational>("ex1b").unwrap();
        assert!(matches!(theorem2(&env, 0), Err(BuildError::NMax)));
    }
}
