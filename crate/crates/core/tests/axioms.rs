mod common;

use common::{active, blocks, permutations, random_any_env, rng, weakly_blocks};
use ratimpl::axioms::{
    check, check_strict_iterated_elimination, check_strict_maskin_star, check_strict_maskin_star_star, verify_report,
    AxiomId, Discharge, Obligation,
};
use ratimpl::env::{active_set_errata, scf_partition, ActiveSets, ContourKind};
use ratimpl::lp::contour_containment;
use ratimpl::{corpus, Environment, Rational};

fn env(name: &str) -> Environment {
    corpus::load::<Rational>(name).unwrap()
}

fn st(e: &Environment, id: &str) -> usize {
    e.state_index(id).unwrap()
}

fn pure(e: &Environment, z: &str) -> ratimpl::Lottery {
    e.degenerate(e.outcome_index(z).unwrap())
}

#[test]
fn example_1a_no_worst_alternative_fails_only_for_i4() {
    let e = env("ex1a");
    let r = check(&e, AxiomId::Nwa).unwrap();
    let i4 = e.agent_index("i4").unwrap();
    let expected: Vec<Obligation> = (0..3).map(|s| Obligation::AgentState { agent: i4, state: s }).collect();
    assert!(!r.holds);
    assert_eq!(r.counterexamples, expected);
    assert!(check(&e, AxiomId::Responsiveness).unwrap().holds);
    assert!(check(&e, AxiomId::StrictMaskin).unwrap().holds);
}

#[test]
fn example_1b_elimination_order() {
    let e = env("ex1b");
    let order = check_strict_iterated_elimination(&e, 0).unwrap();
    assert_eq!(order.sequence, vec![1, 2, 0]);
    for step in &order.steps {
        assert_eq!(step.lottery, pure(&e, "a"));
    }
    let r = check(&e, AxiomId::Dictator).unwrap();
    assert!(r.holds && r.witnesses.is_empty());
}

#[test]
fn example_2_active_sets() {
    let e = env("ex2");
    let a = ActiveSets::new(&e);
    let names = |s: usize| a.at(s).iter().map(|&i| e.agent_name(i).to_string()).collect::<Vec<_>>();
    assert_eq!(names(0), ["i1", "i2", "i3"]);
    assert_eq!(names(1), ["i1", "i2", "i4"]);
    assert_eq!(names(2), ["i1", "i3", "i4"]);
    let ev: Vec<String> = a.event(&[0, 1]).iter().map(|&i| e.agent_name(i).to_string()).collect();
    assert_eq!(ev, ["i1", "i2"]);
}

#[test]
fn example_3a_partition_witness() {
    let e = env("ex3a");
    let r = check(&e, AxiomId::Responsiveness).unwrap();
    assert_eq!(r.counterexamples, vec![Obligation::StatePair { state: 0, other: 1 }]);
    let r = check_strict_maskin_star(&e);
    let p = r.partition.unwrap();
    assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
    // pure c blocks {θ1,θ2} at θ3 for someone, and pure b blocks θ3 at θ1 and θ2
    let c = pure(&e, "c");
    let b = pure(&e, "b");
    let strict = |i: usize, y: &ratimpl::Lottery, from: usize, to: usize| {
        let f = e.scf_lottery(from);
        e.eu(i, y, from) < e.eu(i, &f, from) && e.eu(i, y, to) > e.eu(i, &f, to)
    };
    assert!((0..e.n_agents()).any(|i| strict(i, &c, 0, 2) && strict(i, &c, 1, 2)));
    for t in [0, 1] {
        assert!((0..e.n_agents()).any(|i| strict(i, &b, 2, t)));
    }
}

#[test]
fn example_3c_contour_containment() {
    let e = env("ex3c");
    let a = pure(&e, "a");
    for i in 0..e.n_agents() {
        assert!(contour_containment(&e, i, &a, st(&e, "theta1"), st(&e, "theta2p"), ContourKind::WeakLower, ContourKind::WeakLower));
    }
}

#[test]
fn example_4_star_fails_star_star_plans() {
    let e = env("ex4");
    let r = check_strict_maskin_star(&e);
    assert!(!r.holds && r.partition.is_none());
    assert_eq!(r.notes, ["no partition satisfies strict Maskin monotonicity*"]);

    let r = check_strict_maskin_star_star(&e);
    assert_eq!(r.partition.as_ref(), Some(&scf_partition(&e)));
    let block = vec![0, 1, 2];
    let w = r
        .witness_for(&Obligation::BlockAgainst { block, true_state: 3 })
        .unwrap();
    let (b, c) = (pure(&e, "b"), pure(&e, "c"));
    let plan_of = |agent: usize| {
        w.discharges.iter().find_map(|d| match d {
            Discharge::ContingentPlan { agent: a, plan } if *a == agent => Some(plan.clone()),
            _ => None,
        })
    };
    assert_eq!(plan_of(0).unwrap(), vec![(0, b.clone()), (1, c.clone()), (2, c)]);
    assert!(plan_of(2).is_none());
    for t in 0..3 {
        let w = r
            .witness_for(&Obligation::BlockAgainst { block: vec![3], true_state: t })
            .unwrap();
        assert!(w.discharges.contains(&Discharge::ContingentPlan { agent: 2, plan: vec![(3, b.clone())] }));
    }
    assert!(check(&e, AxiomId::StrictEventStarStar).unwrap().holds);
}

#[test]
fn examples_5_and_6_event_conditions() {
    for name in ["ex5", "ex6"] {
        let e = env(name);
        assert!(check(&e, AxiomId::Maskin).unwrap().holds, "{name}");
        assert!(check(&e, AxiomId::NoVeto).unwrap().holds, "{name}");
    }
    let e6 = env("ex6");
    assert!(ActiveSets::new(&e6).core().is_empty());
    assert!(active_set_errata(&e6).is_empty());
    assert!(!check(&e6, AxiomId::StrictEvent).unwrap().holds);
    assert!(check_strict_iterated_elimination(&e6, 0).is_none());

    let e5 = env("ex5");
    let errata = active_set_errata(&e5);
    assert_eq!(errata.len(), 1);
    assert_eq!(errata[0].state, 1);
    let recomputed: Vec<&str> = errata[0].recomputed.iter().map(|&i| e5.agent_name(i)).collect();
    assert_eq!(recomputed, ["i3", "i4"]);
    // recomputed sets make the event condition hold
    assert!(check(&e5, AxiomId::StrictEvent).unwrap().holds);
}

#[test]
fn example_7_forced_partition_and_theta4() {
    let e = env("ex7");
    assert!(check(&e, AxiomId::Nwa).unwrap().holds);
    let r = check_strict_maskin_star_star(&e);
    assert!(!r.holds);
    assert_eq!(r.candidates[0].partition, scf_partition(&e));
    assert!(r
        .counterexamples
        .iter()
        .any(|o| matches!(o, Obligation::BlockAgainst { true_state: 3, .. })));
    let a = pure(&e, "a");
    assert!(contour_containment(&e, 0, &a, 0, 3, ContourKind::StrictLower, ContourKind::WeakLower));
}

#[test]
fn every_report_verifies() {
    for name in corpus::NAMES {
        let e = env(name);
        for a in AxiomId::ALL {
            let r = check(&e, a).unwrap();
            verify_report(&e, &r).unwrap_or_else(|m| panic!("{name} {}: {m}", a.id()));
        }
    }
    let mut r = rng(5);
    for _ in 0..60 {
        let e = random_any_env(&mut r);
        for a in AxiomId::ALL {
            let rep = check(&e, a).unwrap();
            verify_report(&e, &rep).unwrap();
        }
    }
}

#[test]
fn pairwise_conditions_match_pair_mixture_oracle() {
    let mut r = rng(17);
    for _ in 0..150 {
        let e = random_any_env(&mut r);
        let ns = e.n_states();
        let pairs = || (0..ns).flat_map(|s| (0..ns).map(move |t| (s, t))).filter(|&(s, t)| e.scf(s) != e.scf(t));
        let strict = pairs().all(|(s, t)| (0..e.n_agents()).any(|i| blocks(&e, i, s, t)));
        let weak = pairs().all(|(s, t)| (0..e.n_agents()).any(|i| weakly_blocks(&e, i, s, t)));
        assert_eq!(check(&e, AxiomId::StrictMaskin).unwrap().holds, strict);
        assert_eq!(check(&e, AxiomId::Maskin).unwrap().holds, weak);
    }
}

#[test]
fn greedy_elimination_matches_every_ordering() {
    let mut r = rng(23);
    for _ in 0..120 {
        let e = random_any_env(&mut r);
        let ns = e.n_states();
        for t in 0..ns {
            let others: Vec<usize> = (0..ns).filter(|&s| s != t).collect();
            let exists = permutations(&others).into_iter().any(|order| {
                let mut remaining: Vec<usize> = (0..ns).collect();
                order.iter().all(|&s| {
                    let core: Vec<usize> = (0..e.n_agents())
                        .filter(|i| remaining.iter().all(|&x| active(&e, x).contains(i)))
                        .collect();
                    let ok = core.iter().any(|&i| blocks(&e, i, s, t));
                    remaining.retain(|&x| x != s);
                    ok
                })
            });
            assert_eq!(check_strict_iterated_elimination(&e, t).is_some(), exists);
        }
    }
}
