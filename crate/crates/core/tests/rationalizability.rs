mod common;

use common::{q, random_game, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use ratimpl::env::Validation;
use ratimpl::mechanism::{theorem1, Message};
use ratimpl::rationalizability::{
    best_reply_image, best_reply_witness, check_implementation, check_lemma_properties, dominating_mixture,
    for_each_profile, solve_rationalizable, solve_rationalizable_with, verify_survivors, BeliefModel, FiniteGame,
    GameError,
};
use ratimpl::{corpus, Environment, Lottery, Rational};

fn labels(counts: &[usize]) -> Vec<Vec<String>> {
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (0..c).map(|s| format!("p{i}s{s}")).collect())
        .collect()
}

fn game(counts: &[usize], payoffs: Vec<Vec<i64>>) -> FiniteGame<Rational> {
    let players = (0..counts.len()).map(|i| format!("p{i}")).collect();
    let payoffs = payoffs.into_iter().map(|p| p.into_iter().map(q).collect()).collect();
    FiniteGame::from_payoffs(players, labels(counts), payoffs).unwrap()
}

fn with(opp: &[usize], i: usize, s: usize) -> Vec<usize> {
    let mut p = opp.to_vec();
    p[i] = s;
    p
}

/// The belief makes `s` a best reply over all of `i`'s strategies.
fn belief_ok(g: &FiniteGame<Rational>, i: usize, s: usize, dist: &[(Vec<usize>, Rational)], sets: &[Vec<usize>]) -> bool {
    let total: Rational = dist.iter().map(|(_, p)| p.clone()).sum();
    let support_ok = dist
        .iter()
        .all(|(p, w)| *w > q(0) && (0..g.n_players()).all(|j| j == i || sets[j].contains(&p[j])));
    let value = |t: usize| -> Rational { dist.iter().map(|(p, w)| w * g.payoff(i, &with(p, i, t))).sum() };
    total == q(1) && support_ok && (0..g.n_strategies(i)).all(|t| value(t) <= value(s))
}

/// The mixture strictly beats `s` against every profile of `sets₋ᵢ`.
fn dominator_ok(g: &FiniteGame<Rational>, i: usize, s: usize, mix: &[(usize, Rational)], sets: &[Vec<usize>]) -> bool {
    let total: Rational = mix.iter().map(|(_, p)| p.clone()).sum();
    let mut opp_sets = sets.to_vec();
    opp_sets[i] = vec![0];
    let mut beats = true;
    for_each_profile(&opp_sets, |p| {
        let v: Rational = mix.iter().map(|(t, w)| w * g.payoff(i, &with(p, i, *t))).sum();
        if v <= *g.payoff(i, &with(p, i, s)) {
            beats = false;
        }
    });
    total == q(1) && mix.iter().all(|(_, w)| *w >= q(0)) && beats
}

fn pure_nash(g: &FiniteGame<Rational>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_profile(&g.full_sets(), |p| {
        let stable = (0..g.n_players()).all(|i| (0..g.n_strategies(i)).all(|t| g.payoff(i, &with(p, i, t)) <= g.payoff(i, p)));
        if stable {
            out.push(p.to_vec());
        }
    });
    out
}

#[test]
fn matching_pennies_keeps_everything() {
    let g = game(&[2, 2], vec![vec![1, -1, -1, 1], vec![-1, 1, 1, -1]]);
    let r = solve_rationalizable(&g).unwrap();
    assert_eq!(r.sets, vec![vec![0, 1], vec![0, 1]]);
    assert!(r.trace.is_empty());
    for i in 0..2 {
        for w in &r.beliefs[i] {
            assert!(belief_ok(&g, i, w.strategy, &w.distribution, &r.sets));
        }
    }
}

#[test]
fn strategy_dominated_only_by_a_mixture() {
    // rows T, M, B against L, R; B is never a best reply but no pure row beats it
    let g = game(&[3, 2], vec![vec![3, 0, 0, 3, 1, 1], vec![0; 6]]);
    let r = solve_rationalizable(&g).unwrap();
    assert_eq!(r.sets[0], vec![0, 1]);
    assert_eq!(r.trace.len(), 1);
    let rec = &r.trace[0];
    assert_eq!((rec.player, rec.strategy), (0, 2));
    assert!(dominator_ok(&g, 0, 2, &rec.dominator, &g.full_sets()));
    assert_eq!(rec.dominator.len(), 2);
    verify_survivors(&g, &r).unwrap();
}

#[test]
fn constant_payoffs_keep_everything() {
    let g = game(&[2, 3, 2], vec![vec![4; 12], vec![0; 12], vec![-1; 12]]);
    let r = solve_rationalizable(&g).unwrap();
    assert_eq!(r.sets, g.full_sets());
    assert_eq!(r.rounds, 1);
}

#[test]
fn three_round_elimination_chain() {
    // rows U, D; columns L, C, R
    let g = game(&[2, 3], vec![vec![1, 1, 0, 0, 0, 2], vec![0, 2, 1, 3, 1, 0]]);
    let r = solve_rationalizable(&g).unwrap();
    assert_eq!(r.sets, vec![vec![0], vec![1]]);
    let order: Vec<(usize, usize, usize)> = r.trace.iter().map(|x| (x.round, x.player, x.strategy)).collect();
    assert_eq!(order, vec![(1, 1, 2), (2, 0, 1), (3, 1, 0)]);
    verify_survivors(&g, &r).unwrap();
}

#[test]
fn independent_beliefs_limited_to_two_players() {
    let mut r = rng(3);
    let g = loop {
        let g = random_game(&mut r);
        if g.n_players() == 3 {
            break g;
        }
    };
    assert_eq!(solve_rationalizable_with(&g, BeliefModel::Independent), Err(GameError::Independence));
    let two = game(&[2, 2], vec![vec![3, 0, 5, 1], vec![3, 5, 0, 1]]);
    assert_eq!(
        solve_rationalizable_with(&two, BeliefModel::Independent).unwrap().sets,
        solve_rationalizable(&two).unwrap().sets
    );
}

#[test]
fn random_games_satisfy_duality_and_fixed_point() {
    let mut r = rng(11);
    for _ in 0..200 {
        let g = random_game(&mut r);
        let res = solve_rationalizable(&g).unwrap();
        verify_survivors(&g, &res).unwrap();

        // every round: each strategy has exactly one of the two certificates
        let mut sets = g.full_sets();
        for round in 1..=res.rounds {
            for i in 0..g.n_players() {
                for &s in &sets[i] {
                    let belief = best_reply_witness(&g, i, s, &sets).unwrap();
                    let dom = dominating_mixture(&g, i, s, &sets).unwrap();
                    assert!(belief.is_some() != dom.is_some());
                    if let Some(b) = belief {
                        assert!(belief_ok(&g, i, s, &b.distribution, &sets));
                    }
                    if let Some(d) = dom {
                        assert!(dominator_ok(&g, i, s, &d, &sets));
                    }
                }
            }
            for rec in res.trace.iter().filter(|x| x.round == round) {
                sets[rec.player].retain(|&x| x != rec.strategy);
            }
        }
        assert_eq!(sets, res.sets);

        assert_eq!(best_reply_image(&g, &res.sets).unwrap(), res.sets);
        for p in pure_nash(&g) {
            assert!((0..g.n_players()).all(|i| res.contains(i, p[i])));
        }

        // random product sets closed under best replies stay inside
        for _ in 0..5 {
            let t: Vec<Vec<usize>> = (0..g.n_players())
                .map(|i| {
                    let mut s: Vec<usize> = (0..g.n_strategies(i)).filter(|_| r.gen_bool(0.5)).collect();
                    if s.is_empty() {
                        s.push(r.gen_range(0..g.n_strategies(i)));
                    }
                    s
                })
                .collect();
            let image = best_reply_image(&g, &t).unwrap();
            if t.iter().zip(&image).all(|(a, b)| a.iter().all(|x| b.contains(x))) {
                assert!(t.iter().enumerate().all(|(i, a)| a.iter().all(|&x| res.contains(i, x))));
            }
        }
    }
}

#[test]
fn one_at_a_time_elimination_reaches_the_same_sets() {
    let mut r = rng(13);
    for _ in 0..100 {
        let g = random_game(&mut r);
        let res = solve_rationalizable(&g).unwrap();
        let mut sets = g.full_sets();
        loop {
            let mut candidates: Vec<(usize, usize)> = (0..g.n_players())
                .flat_map(|i| sets[i].iter().map(move |&s| (i, s)))
                .collect();
            candidates.shuffle(&mut r);
            let hit = candidates
                .into_iter()
                .find(|&(i, s)| dominating_mixture(&g, i, s, &sets).unwrap().is_some());
            match hit {
                Some((i, s)) => sets[i].retain(|&x| x != s),
                None => break,
            }
        }
        assert_eq!(sets, res.sets);
    }
}

/// Two states with opposite strict preferences over a and b, plus agent i4
/// who is indifferent everywhere. With `twin`, a third state copies the second.
fn voting_env(twin: bool) -> Environment {
    let mut states = vec!["theta1".to_string(), "theta2".to_string()];
    let mut scf = vec![0, 1];
    if twin {
        states.push("theta2p".into());
        scf.push(1);
    }
    let prefs = |s: usize| if s == 0 { vec![q(2), q(0)] } else { vec![q(0), q(2)] };
    let mut utility: Vec<Vec<Vec<Rational>>> = (0..3)
        .map(|_| (0..states.len()).map(|s| prefs(s.min(1))).collect())
        .collect();
    utility.push(vec![vec![q(1), q(1)]; states.len()]);
    Environment::new(
        ["i1", "i2", "i3", "i4"].map(String::from).to_vec(),
        states,
        vec!["a".into(), "b".into()],
        utility,
        scf,
        Validation::Lenient,
    )
    .unwrap()
}

/// Each of the first three agents reports state 0 or 1; the outcome averages `f` of the reports.
fn voting_games(e: &Environment) -> Vec<FiniteGame<Rational>> {
    let third = q(1) / q(3);
    FiniteGame::family(e, labels(&[2, 2, 2, 2]), |p| {
        let a: Rational = p[..3].iter().filter(|&&k| k == 0).map(|_| third.clone()).sum();
        Lottery::new(vec![a.clone(), q(1) - a]).unwrap()
    })
    .unwrap()
}

#[test]
fn averaging_mechanism_implements_and_keeps_lemma_properties() {
    let e = voting_env(false);
    let games = voting_games(&e);
    let rep = check_implementation(&e, &games).unwrap();
    assert!(rep.implemented);
    assert_eq!(rep.states[0].survivors.sets, vec![vec![0], vec![0], vec![0], vec![0, 1]]);
    let props = check_lemma_properties(&e, &games, &rep);
    assert!(props.applicable && props.holds);
    assert_eq!(props.inactive.len(), 2);
    assert!(props.inactive.iter().all(|c| c.agent == 3 && c.full_set && c.constant_outcome));

    let e = voting_env(true);
    let games = voting_games(&e);
    let rep = check_implementation(&e, &games).unwrap();
    assert!(rep.implemented);
    assert_eq!(rep.states[1].survivors.sets, rep.states[2].survivors.sets);
    let props = check_lemma_properties(&e, &games, &rep);
    assert!(props.holds);
    assert!(props.inclusions.iter().any(|c| c.state == 1 && c.other == 2 && c.equal));
}

#[test]
fn constant_mechanism_fails_where_scf_moves() {
    let e = voting_env(false);
    let games = FiniteGame::family(&e, labels(&[2, 1, 1, 1]), |_| e.degenerate(0)).unwrap();
    let rep = check_implementation(&e, &games).unwrap();
    assert!(!rep.implemented);
    assert!(rep.states[0].implemented && !rep.states[1].implemented);
    assert_eq!(rep.states[1].offending.len(), 2);
    let props = check_lemma_properties(&e, &games, &rep);
    assert!(!props.applicable && !props.holds);
}

#[test]
fn truncated_canonical_mechanism_is_not_enough() {
    let e = corpus::load::<Rational>("ex1b").unwrap();
    let mech = theorem1(&e, 2).unwrap();
    let ns = e.n_states();
    let truthful: Vec<usize> = (0..ns).map(|s| mech.sigma.position(&e.scf_lottery(s)).unwrap()).collect();
    let list: Vec<Message> = (0..ns)
        .flat_map(|s| {
            let plan = truthful.clone();
            [
                Message { m1: s, m2: 1, m3: plan.clone(), m4: e.scf(s) },
                Message { m1: s, m2: 2, m3: plan, m4: e.scf((s + 1) % ns) },
            ]
        })
        .collect();
    let messages = vec![list; e.n_agents()];
    let games = FiniteGame::from_mechanism(&mech, &messages).unwrap();
    let rep = check_implementation(&e, &games).unwrap();
    assert!(!rep.implemented);
    let escalation_survives = rep.states.iter().any(|st| {
        (0..e.n_agents()).any(|i| st.survivors.sets[i].iter().any(|&k| messages[i][k].m2 == 2))
    });
    assert!(escalation_survives);
}
