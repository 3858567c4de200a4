//! Rationalizable strategies of finite normal-form games.
//!
//! Strategies are removed when they are a best reply to no belief over the
//! surviving opponent profiles. Beliefs may correlate opponents.

use thiserror::Error;

use crate::env::{active_agents, Environment, Lottery, StateId};
use crate::lp::{solve_max_slack_with, LinearConstraint, Normalization, Relation};
use crate::mechanism::{CanonicalMechanism, Message};
use crate::scalar::Scalar;

pub const DEFAULT_PROFILE_CAP: usize = 1_000_000;
pub const PROFILE_CAP_VAR: &str = "RATIMPL_PROFILE_CAP";

/// Cap on the number of pure profiles, read from the environment when set.
pub fn profile_cap() -> usize {
    std::env::var(PROFILE_CAP_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_PROFILE_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("profile space has {profiles} profiles, above the cap of {cap}")]
    TooLarge { profiles: String, cap: usize },
    #[error("malformed game: {0}")]
    Shape(String),
    #[error("independent beliefs are only supported for two players")]
    Independence,
    #[error("game carries no outcome map")]
    NoOutcomes,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BeliefModel {
    #[default]
    Correlated,
    /// Product beliefs. Coincides with correlated beliefs for two players.
    Independent,
}

pub type Profile = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGame<T> {
    players: Vec<String>,
    strategies: Vec<Vec<String>>,
    /// `payoffs[i][k]` for profile index `k`, last player varying fastest.
    payoffs: Vec<Vec<T>>,
    outcomes: Option<Vec<Lottery<T>>>,
    strides: Vec<usize>,
}

fn profile_space(counts: &[usize], cap: usize) -> Result<usize, GameError> {
    if counts.is_empty() || counts.contains(&0) {
        return Err(GameError::Shape("every player needs at least one strategy".into()));
    }
    let mut total: u128 = 1;
    for &c in counts {
        total = total.saturating_mul(c as u128);
    }
    if total > cap as u128 {
        return Err(GameError::TooLarge {
            profiles: total.to_string(),
            cap,
        });
    }
    Ok(total as usize)
}

/// Calls `visit` on every profile of the product `sets[0] × sets[1] × …`.
pub fn for_each_profile(sets: &[Vec<usize>], mut visit: impl FnMut(&[usize])) {
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; sets.len()];
    let mut profile: Vec<usize> = sets.iter().map(|s| s[0]).collect();
    loop {
        visit(&profile);
        let mut k = sets.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < sets[k].len() {
                profile[k] = sets[k][pos[k]];
                break;
            }
            pos[k] = 0;
            profile[k] = sets[k][0];
        }
    }
}

impl<T: Scalar> FiniteGame<T> {
    /// Raw payoff tensors, one dense vector per player.
    pub fn from_payoffs(
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
        payoffs: Vec<Vec<T>>,
    ) -> Result<Self, GameError> {
        Self::assemble(players, strategies, payoffs, None, profile_cap())
    }

    /// Payoffs `u_i(g(m), θ)` from an outcome per profile.
    pub fn from_outcomes(
        env: &Environment<T>,
        state: StateId,
        strategies: Vec<Vec<String>>,
        outcomes: Vec<Lottery<T>>,
    ) -> Result<Self, GameError> {
        if strategies.len() != env.n_agents() {
            return Err(GameError::Shape("one strategy list per agent expected".into()));
        }
        if outcomes.iter().any(|y| y.len() != env.n_outcomes()) {
            return Err(GameError::Shape("lottery dimension differs from the outcome set".into()));
        }
        let payoffs = (0..env.n_agents())
            .map(|i| outcomes.iter().map(|y| env.eu(i, y, state)).collect())
            .collect();
        Self::assemble(env.agents().to_vec(), strategies, payoffs, Some(outcomes), profile_cap())
    }

    /// Builds `g` once and binds it to every state.
    pub fn family(
        env: &Environment<T>,
        strategies: Vec<Vec<String>>,
        g: impl Fn(&[usize]) -> Lottery<T>,
    ) -> Result<Vec<Self>, GameError> {
        let counts: Vec<usize> = strategies.iter().map(Vec::len).collect();
        profile_space(&counts, profile_cap())?;
        let sets: Vec<Vec<usize>> = counts.iter().map(|&c| (0..c).collect()).collect();
        let mut outcomes = Vec::new();
        for_each_profile(&sets, |p| outcomes.push(g(p)));
        (0..env.n_states())
            .map(|s| Self::from_outcomes(env, s, strategies.clone(), outcomes.clone()))
            .collect()
    }

    /// The canonical mechanism restricted to the given message lists.
    pub fn from_mechanism(mech: &CanonicalMechanism<T>, messages: &[Vec<Message>]) -> Result<Vec<Self>, GameError> {
        for (i, list) in messages.iter().enumerate() {
            for m in list {
                mech.validate_message(i, m).map_err(|e| GameError::Shape(e.to_string()))?;
            }
        }
        let env = &mech.env;
        let labels = messages
            .iter()
            .map(|list| list.iter().map(|m| message_label(env, m)).collect())
            .collect();
        Self::family(env, labels, |p| {
            let profile: Vec<Message> = p.iter().enumerate().map(|(i, &k)| messages[i][k].clone()).collect();
            mech.outcome(&profile)
        })
    }

    fn assemble(
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
        payoffs: Vec<Vec<T>>,
        outcomes: Option<Vec<Lottery<T>>>,
        cap: usize,
    ) -> Result<Self, GameError> {
        if players.len() != strategies.len() || players.len() != payoffs.len() {
            return Err(GameError::Shape("players, strategies and payoffs disagree in length".into()));
        }
        let counts: Vec<usize> = strategies.iter().map(Vec::len).collect();
        let total = profile_space(&counts, cap)?;
        if payoffs.iter().any(|p| p.len() != total) {
            return Err(GameError::Shape(format!("payoff vectors must have {total} entries")));
        }
        if outcomes.as_ref().is_some_and(|o| o.len() != total) {
            return Err(GameError::Shape(format!("outcome map must have {total} entries")));
        }
        let mut strides = vec![1; counts.len()];
        for k in (0..counts.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * counts[k + 1];
        }
        Ok(FiniteGame {
            players,
            strategies,
            payoffs,
            outcomes,
            strides,
        })
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn n_strategies(&self, i: usize) -> usize {
        self.strategies[i].len()
    }

    pub fn n_profiles(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn strategy_labels(&self, i: usize) -> &[String] {
        &self.strategies[i]
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(s, k)| s * k).sum()
    }

    pub fn profile(&self, mut index: usize) -> Profile {
        self.strides
            .iter()
            .map(|&k| {
                let s = index / k;
                index %= k;
                s
            })
            .collect()
    }

    pub fn payoff(&self, i: usize, profile: &[usize]) -> &T {
        &self.payoffs[i][self.index(profile)]
    }

    pub fn outcome(&self, profile: &[usize]) -> Option<&Lottery<T>> {
        self.outcomes.as_ref().map(|o| &o[self.index(profile)])
    }

    pub fn has_outcomes(&self) -> bool {
        self.outcomes.is_some()
    }

    pub fn full_sets(&self) -> Vec<Vec<usize>> {
        (0..self.n_players()).map(|i| (0..self.n_strategies(i)).collect()).collect()
    }

    /// Opponent profiles drawn from `sets`, stored as full profiles with slot `i` unset.
    fn opponent_profiles(&self, i: usize, sets: &[Vec<usize>]) -> Vec<Profile> {
        let mut restricted = sets.to_vec();
        restricted[i] = vec![0];
        let mut out = Vec::new();
        for_each_profile(&restricted, |p| out.push(p.to_vec()));
        out
    }

    fn payoff_with(&self, i: usize, s: usize, opp: &[usize]) -> &T {
        let idx = self.index(opp) + s * self.strides[i];
        &self.payoffs[i][idx]
    }
}

pub fn message_label<T: Scalar>(env: &Environment<T>, m: &Message) -> String {
    let plan: Vec<String> = m.m3.iter().map(|k| k.to_string()).collect();
    format!(
        "({}, {}, [{}], {})",
        env.state_name(m.m1),
        m.m2,
        plan.join(","),
        env.outcome_name(m.m4)
    )
}

/// `λ₋ᵢ` as a list of opponent profiles with positive weight. Slot `i` of each profile is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefWitness<T> {
    pub player: usize,
    pub strategy: usize,
    pub distribution: Vec<(Profile, T)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationRecord<T> {
    pub round: usize,
    pub player: usize,
    pub strategy: usize,
    /// Mixture over the full strategy set beating `strategy` against every surviving opponent profile.
    pub dominator: Vec<(usize, T)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorSets<T> {
    pub sets: Vec<Vec<usize>>,
    pub rounds: usize,
    pub trace: Vec<EliminationRecord<T>>,
    /// One witness per survivor, aligned with `sets`.
    pub beliefs: Vec<Vec<BeliefWitness<T>>>,
}

impl<T: Scalar> SurvivorSets<T> {
    pub fn contains(&self, i: usize, s: usize) -> bool {
        self.sets[i].binary_search(&s).is_ok()
    }

    pub fn profiles(&self) -> Vec<Profile> {
        let mut out = Vec::new();
        for_each_profile(&self.sets, |p| out.push(p.to_vec()));
        out
    }

    /// Product-set inclusion.
    pub fn is_subset(&self, other: &SurvivorSets<T>) -> bool {
        self.sets
            .iter()
            .zip(&other.sets)
            .all(|(a, b)| a.iter().all(|s| b.binary_search(s).is_ok()))
    }
}

/// A belief over `sets₋ᵢ` to which `s` is a best reply among all of `i`'s strategies.
pub fn best_reply_witness<T: Scalar>(
    game: &FiniteGame<T>,
    i: usize,
    s: usize,
    sets: &[Vec<usize>],
) -> Result<Option<BeliefWitness<T>>, GameError> {
    let opps = game.opponent_profiles(i, sets);
    let others: Vec<usize> = (0..game.n_strategies(i)).filter(|&t| t != s).collect();
    // a pure profile often suffices
    for opp in &opps {
        let v = game.payoff_with(i, s, opp);
        if others.iter().all(|&t| game.payoff_with(i, t, opp) <= v) {
            return Ok(Some(BeliefWitness {
                player: i,
                strategy: s,
                distribution: vec![(opp.clone(), T::one())],
            }));
        }
    }
    let mut constraints = Vec::new();
    for &t in &others {
        let coefficients: Vec<T> = opps
            .iter()
            .map(|opp| game.payoff_with(i, s, opp).clone() - game.payoff_with(i, t, opp).clone())
            .collect();
        if coefficients.iter().all(|c| c.is_zero()) {
            continue;
        }
        constraints.push(LinearConstraint::new(coefficients, Relation::Ge, T::zero()));
    }
    let result = solve_max_slack_with(opps.len(), &constraints, Normalization::Vertex)
        .map_err(|e| GameError::Inconsistent(e.to_string()))?;
    Ok(result.witness.map(|w| BeliefWitness {
        player: i,
        strategy: s,
        distribution: opps
            .into_iter()
            .zip(w.probs().iter().cloned())
            .filter(|(_, p)| !p.is_zero())
            .collect(),
    }))
}

/// A mixture over all of `i`'s strategies strictly beating `s` against every profile of `sets₋ᵢ`.
pub fn dominating_mixture<T: Scalar>(
    game: &FiniteGame<T>,
    i: usize,
    s: usize,
    sets: &[Vec<usize>],
) -> Result<Option<Vec<(usize, T)>>, GameError> {
    let opps = game.opponent_profiles(i, sets);
    let constraints: Vec<LinearConstraint<T>> = opps
        .iter()
        .map(|opp| {
            let coefficients = (0..game.n_strategies(i))
                .map(|t| game.payoff_with(i, t, opp).clone())
                .collect();
            LinearConstraint::new(coefficients, Relation::Gt, game.payoff_with(i, s, opp).clone())
        })
        .collect();
    let result = solve_max_slack_with(game.n_strategies(i), &constraints, Normalization::Vertex)
        .map_err(|e| GameError::Inconsistent(e.to_string()))?;
    Ok(result.witness.map(|w| {
        w.probs()
            .iter()
            .cloned()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .collect()
    }))
}

pub fn solve_rationalizable<T: Scalar>(game: &FiniteGame<T>) -> Result<SurvivorSets<T>, GameError> {
    solve_rationalizable_with(game, BeliefModel::Correlated)
}

pub fn solve_rationalizable_with<T: Scalar>(
    game: &FiniteGame<T>,
    model: BeliefModel,
) -> Result<SurvivorSets<T>, GameError> {
    if model == BeliefModel::Independent && game.n_players() > 2 {
        return Err(GameError::Independence);
    }
    profile_space(
        &(0..game.n_players()).map(|i| game.n_strategies(i)).collect::<Vec<_>>(),
        profile_cap(),
    )?;
    let mut sets = game.full_sets();
    let mut trace = Vec::new();
    let mut round = 0;
    loop {
        round += 1;
        let mut next = sets.clone();
        let mut beliefs = Vec::with_capacity(sets.len());
        let mut removed = Vec::new();
        for i in 0..game.n_players() {
            let mut kept = Vec::new();
            for &s in &sets[i] {
                match best_reply_witness(game, i, s, &sets)? {
                    Some(w) => kept.push(w),
                    None => removed.push((i, s)),
                }
            }
            beliefs.push(kept);
        }
        if removed.is_empty() {
            return Ok(SurvivorSets {
                sets,
                rounds: round,
                trace,
                beliefs,
            });
        }
        for (i, s) in removed {
            let dominator = dominating_mixture(game, i, s, &sets)?.ok_or_else(|| {
                GameError::Inconsistent(format!("player {i} strategy {s} has neither belief nor dominator"))
            })?;
            trace.push(EliminationRecord {
                round,
                player: i,
                strategy: s,
                dominator,
            });
            next[i].retain(|&x| x != s);
        }
        sets = next;
    }
}

/// Re-checks every belief and every elimination certificate exactly.
pub fn verify_survivors<T: Scalar>(game: &FiniteGame<T>, result: &SurvivorSets<T>) -> Result<(), String> {
    let mut sets = game.full_sets();
    let mut round = 1;
    for rec in &result.trace {
        if rec.round != round {
            for r in result.trace.iter().filter(|r| r.round == round) {
                sets[r.player].retain(|&x| x != r.strategy);
            }
            round = rec.round;
        }
        let total = rec.dominator.iter().fold(T::zero(), |a, (_, p)| a + p.clone());
        if !total.is_one() || rec.dominator.iter().any(|(_, p)| p.is_negative()) {
            return Err(format!("dominator of {}:{} is not a distribution", rec.player, rec.strategy));
        }
        for opp in game.opponent_profiles(rec.player, &sets) {
            let mixed = rec.dominator.iter().fold(T::zero(), |a, (t, p)| {
                a + p.clone() * game.payoff_with(rec.player, *t, &opp).clone()
            });
            if mixed <= *game.payoff_with(rec.player, rec.strategy, &opp) {
                return Err(format!("dominator of {}:{} fails at {opp:?}", rec.player, rec.strategy));
            }
        }
    }
    for r in result.trace.iter().filter(|r| r.round == round) {
        sets[r.player].retain(|&x| x != r.strategy);
    }
    if sets != result.sets {
        return Err("trace does not reproduce the survivor sets".into());
    }
    for (i, ws) in result.beliefs.iter().enumerate() {
        let strategies: Vec<usize> = ws.iter().map(|w| w.strategy).collect();
        if strategies != result.sets[i] {
            return Err(format!("player {i}: beliefs do not match survivors"));
        }
        for w in ws {
            check_belief(game, w, &result.sets)?;
        }
    }
    Ok(())
}

fn check_belief<T: Scalar>(game: &FiniteGame<T>, w: &BeliefWitness<T>, sets: &[Vec<usize>]) -> Result<(), String> {
    let i = w.player;
    let total = w.distribution.iter().fold(T::zero(), |a, (_, p)| a + p.clone());
    if !total.is_one() {
        return Err(format!("belief for {i}:{} does not sum to 1", w.strategy));
    }
    for (opp, p) in &w.distribution {
        let inside = opp
            .iter()
            .enumerate()
            .all(|(j, s)| j == i || sets[j].binary_search(s).is_ok());
        if !p.is_positive() || !inside {
            return Err(format!("belief for {i}:{} leaves the survivor set", w.strategy));
        }
    }
    let value = |t: usize| {
        w.distribution
            .iter()
            .fold(T::zero(), |a, (opp, p)| a + p.clone() * game.payoff_with(i, t, opp).clone())
    };
    let own = value(w.strategy);
    if (0..game.n_strategies(i)).any(|t| value(t) > own) {
        return Err(format!("strategy {i}:{} is not a best reply to its belief", w.strategy));
    }
    Ok(())
}

/// One best-reply round applied to `sets`: the strategies in `sets` with a witness.
pub fn best_reply_image<T: Scalar>(game: &FiniteGame<T>, sets: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, GameError> {
    (0..game.n_players())
        .map(|i| {
            let mut kept = Vec::new();
            for s in 0..game.n_strategies(i) {
                if best_reply_witness(game, i, s, sets)?.is_some() {
                    kept.push(s);
                }
            }
            Ok(kept)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateImplementation<T> {
    pub state: StateId,
    pub implemented: bool,
    pub survivors: SurvivorSets<T>,
    /// Surviving profiles whose outcome differs from `f(θ)`.
    pub offending: Vec<Profile>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplementationReport<T> {
    pub states: Vec<StateImplementation<T>>,
    pub implemented: bool,
}

fn same_shape<T: Scalar>(a: &FiniteGame<T>, b: &FiniteGame<T>) -> bool {
    a.strategies == b.strategies && a.outcomes == b.outcomes
}

/// Solves the game of every state; `games[θ]` is the game at θ.
pub fn check_implementation<T: Scalar>(
    env: &Environment<T>,
    games: &[FiniteGame<T>],
) -> Result<ImplementationReport<T>, GameError> {
    if games.len() != env.n_states() {
        return Err(GameError::Shape("one game per state expected".into()));
    }
    if games.iter().any(|g| !g.has_outcomes()) {
        return Err(GameError::NoOutcomes);
    }
    if games.iter().any(|g| !same_shape(g, &games[0])) {
        return Err(GameError::Shape("games must share messages and outcomes".into()));
    }
    let mut states = Vec::new();
    for (s, game) in games.iter().enumerate() {
        let survivors = solve_rationalizable(game)?;
        let target = env.scf_lottery(s);
        let offending: Vec<Profile> = survivors
            .profiles()
            .into_iter()
            .filter(|p| game.outcome(p) != Some(&target))
            .collect();
        states.push(StateImplementation {
            state: s,
            implemented: offending.is_empty(),
            survivors,
            offending,
        });
    }
    let implemented = states.iter().all(|s| s.implemented);
    Ok(ImplementationReport { states, implemented })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionCheck {
    pub state: StateId,
    pub other: StateId,
    pub included: bool,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InactiveCheck {
    pub state: StateId,
    pub agent: usize,
    pub full_set: bool,
    pub constant_outcome: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaPropertiesReport {
    pub applicable: bool,
    pub inclusions: Vec<InclusionCheck>,
    pub inactive: Vec<InactiveCheck>,
    pub holds: bool,
    pub notes: Vec<String>,
}

/// Consequences of implementation: nested survivor sets coincide, and inactive
/// agents keep every strategy without affecting the outcome.
pub fn check_lemma_properties<T: Scalar>(
    env: &Environment<T>,
    games: &[FiniteGame<T>],
    report: &ImplementationReport<T>,
) -> LemmaPropertiesReport {
    if !report.implemented || games.len() != report.states.len() {
        return LemmaPropertiesReport {
            applicable: false,
            inclusions: Vec::new(),
            inactive: Vec::new(),
            holds: false,
            notes: vec!["not applicable: the games do not implement the social choice function".into()],
        };
    }
    let mut inclusions = Vec::new();
    for a in &report.states {
        for b in &report.states {
            if a.state == b.state {
                continue;
            }
            let included = a.survivors.is_subset(&b.survivors);
            inclusions.push(InclusionCheck {
                state: a.state,
                other: b.state,
                included,
                equal: included && b.survivors.is_subset(&a.survivors),
            });
        }
    }
    let mut inactive = Vec::new();
    for st in &report.states {
        let game = &games[st.state];
        let active = active_agents(env, st.state);
        let target = env.scf_lottery(st.state);
        for i in (0..env.n_agents()).filter(|i| !active.contains(i)) {
            let full_set = st.survivors.sets[i].len() == game.n_strategies(i);
            let mut sets = st.survivors.sets.clone();
            sets[i] = (0..game.n_strategies(i)).collect();
            let mut constant_outcome = true;
            for_each_profile(&sets, |p| {
                if game.outcome(p) != Some(&target) {
                    constant_outcome = false;
                }
            });
            inactive.push(InactiveCheck {
                state: st.state,
                agent: i,
                full_set,
                constant_outcome,
            });
        }
    }
    let holds = inclusions.iter().all(|c| !c.included || c.equal)
        && inactive.iter().all(|c| c.full_set && c.constant_outcome);
    LemmaPropertiesReport {
        applicable: true,
        inclusions,
        inactive,
        holds,
        notes: Vec::new(),
    }
}
