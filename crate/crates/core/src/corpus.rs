//! The bundled example environments.

use std::fmt;

use crate::axioms::{check, AxiomId, Obligation};
use crate::env::{active_set_errata, parse_environment, ActiveSets, ContourKind, Environment, Validation};
use crate::error::ParseError;
use crate::lemma::build_lemma_y;
use crate::lp::contour_containment;
use crate::mechanism::{build, verify_certificates, Variant};
use crate::scalar::Scalar;
use crate::Rational;

pub const NAMES: [&str; 10] = [
    "ex1a", "ex1b", "ex2", "ex3a", "ex3b", "ex3c", "ex4", "ex5", "ex6", "ex7",
];

/// Raw JSON of a bundled example.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "ex1a" => include_str!("../corpus/ex1a.json"),
        "ex1b" => include_str!("../corpus/ex1b.json"),
        "ex2" => include_str!("../corpus/ex2.json"),
        "ex3a" => include_str!("../corpus/ex3a.json"),
        "ex3b" => include_str!("../corpus/ex3b.json"),
        "ex3c" => include_str!("../corpus/ex3c.json"),
        "ex4" => include_str!("../corpus/ex4.json"),
        "ex5" => include_str!("../corpus/ex5.json"),
        "ex6" => include_str!("../corpus/ex6.json"),
        "ex7" => include_str!("../corpus/ex7.json"),
        _ => return None,
    })
}

pub fn load<T: Scalar>(name: &str) -> Result<Environment<T>, ParseError> {
    let text = source(name).ok_or_else(|| ParseError::Invalid(format!("no bundled example named {name}")))?;
    parse_environment(text, Validation::Lenient)
}

/// Outcome recorded for one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Holds,
    Fails,
    /// The source claims failure but the encoded data make the property hold.
    HoldsWithErratum,
}

impl Expect {
    pub fn id(self) -> &'static str {
        match self {
            Expect::Holds => "holds",
            Expect::Fails => "fails",
            Expect::HoldsWithErratum => "holds-with-erratum",
        }
    }

    fn judge(self, holds: bool) -> Status {
        match (self, holds) {
            (Expect::Holds, true) | (Expect::Fails, false) => Status::Pass,
            (Expect::HoldsWithErratum, true) => Status::Flagged,
            _ => Status::Fail,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// Matches a documented discrepancy; not a failure.
    Flagged,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Flagged => "flagged",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub example: &'static str,
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub status: Status,
}

use Expect::{Fails as N, Holds as Y, HoldsWithErratum as E};

/// Per example, in `AxiomId::ALL` order.
const AXIOM_TABLE: [(&str, [Expect; 11]); 10] = [
    ("ex1a", [N, Y, Y, Y, Y, Y, Y, Y, Y, Y, Y]),
    ("ex1b", [Y, Y, Y, Y, Y, Y, Y, Y, Y, Y, Y]),
    ("ex2", [N, Y, Y, Y, Y, Y, Y, Y, Y, Y, Y]),
    ("ex3a", [Y, N, Y, N, Y, Y, Y, Y, Y, N, Y]),
    ("ex3b", [Y, Y, Y, N, Y, Y, Y, Y, Y, Y, Y]),
    ("ex3c", [Y, N, Y, N, Y, Y, Y, Y, Y, N, Y]),
    ("ex4", [Y, N, Y, Y, Y, N, Y, Y, Y, N, Y]),
    ("ex5", [N, Y, Y, Y, Y, Y, Y, E, Y, Y, Y]),
    ("ex6", [N, Y, Y, Y, Y, Y, Y, N, Y, N, N]),
    ("ex7", [Y, N, Y, Y, Y, N, N, Y, Y, N, N]),
];

/// Mechanisms whose build and certificate replay are pinned.
const MECHANISM_TABLE: [(&str, Variant, Expect); 20] = [
    ("ex1a", Variant::Theorem1, N),
    ("ex1a", Variant::Theorem2, Y),
    ("ex1b", Variant::Theorem1, Y),
    ("ex1b", Variant::Theorem2, Y),
    ("ex2", Variant::Theorem1, N),
    ("ex2", Variant::Theorem2, Y),
    ("ex3a", Variant::Theorem1, Y),
    ("ex3a", Variant::Theorem2, N),
    ("ex3b", Variant::Theorem1, Y),
    ("ex3b", Variant::Theorem2, Y),
    ("ex3c", Variant::Theorem1, Y),
    ("ex3c", Variant::Theorem2, N),
    ("ex4", Variant::Theorem1, Y),
    ("ex4", Variant::Theorem2, N),
    ("ex5", Variant::Theorem1, N),
    ("ex5", Variant::Theorem2, Y),
    ("ex6", Variant::Theorem1, N),
    ("ex6", Variant::Theorem2, N),
    ("ex7", Variant::Theorem1, N),
    ("ex7", Variant::Theorem2, N),
];

/// Witness partitions pinned by the table: (example, axiom, blocks by state name).
const PARTITION_TABLE: [(&str, AxiomId, &[&[&str]]); 4] = [
    ("ex3a", AxiomId::StrictMaskinStar, &[&["theta1", "theta2"], &["theta3"]]),
    ("ex4", AxiomId::StrictMaskinStarStar, &[&["theta1", "theta2", "theta3"], &["theta4"]]),
    ("ex4", AxiomId::StrictEventStarStar, &[&["theta1", "theta2", "theta3"], &["theta4"]]),
    ("ex1b", AxiomId::StrictMaskinStarStar, &[&["theta1"], &["theta2"], &["theta3"]]),
];

/// Recomputed active sets: (example, per-state agent lists).
const ACTIVE_TABLE: [(&str, &[&[&str]]); 4] = [
    ("ex2", &[&["i1", "i2", "i3"], &["i1", "i2", "i4"], &["i1", "i3", "i4"]]),
    ("ex5", &[&["i3", "i4"], &["i3", "i4"]]),
    ("ex6", &[&["i2", "i3"], &["i1", "i3"], &["i1", "i2"]]),
    ("ex7", &[&["i1", "i2", "i3"], &["i1", "i2", "i3"], &["i1", "i2", "i3"], &["i1", "i2", "i3"]]),
];

fn row(example: &'static str, check: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, status: Status) -> Row {
    Row {
        example,
        check: check.into(),
        expected: expected.into(),
        actual: actual.into(),
        status,
    }
}

fn holds_word(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn names_of<T: Scalar>(env: &Environment<T>, blocks: &[Vec<usize>]) -> String {
    let inner: Vec<String> = blocks
        .iter()
        .map(|b| b.iter().map(|&s| env.state_name(s)).collect::<Vec<_>>().join(","))
        .map(|b| format!("{{{b}}}"))
        .collect();
    format!("{{{}}}", inner.join(","))
}

fn expected_blocks(blocks: &[&[&str]]) -> String {
    let inner: Vec<String> = blocks.iter().map(|b| format!("{{{}}}", b.join(","))).collect();
    format!("{{{}}}", inner.join(","))
}

/// Runs every pinned check of one bundled example.
pub fn run_example(name: &str) -> Result<Vec<Row>, ParseError> {
    let Some(example) = NAMES.iter().copied().find(|n| *n == name) else {
        return Err(ParseError::Invalid(format!("no bundled example named {name}")));
    };
    let env = load::<Rational>(example)?;
    let mut rows = Vec::new();

    if let Some((_, table)) = AXIOM_TABLE.iter().find(|(n, _)| *n == example) {
        for (axiom, expect) in AxiomId::ALL.iter().zip(table) {
            let report = check(&env, *axiom).map_err(|e| ParseError::Invalid(e.to_string()))?;
            let actual = holds_word(report.holds);
            rows.push(row(example, axiom.id(), expect.id(), actual, expect.judge(report.holds)));
        }
    }

    for (_, axiom, blocks) in PARTITION_TABLE.iter().filter(|(n, ..)| *n == example) {
        let report = check(&env, *axiom).map_err(|e| ParseError::Invalid(e.to_string()))?;
        let want = expected_blocks(blocks);
        let got = report
            .partition
            .as_ref()
            .map_or("none".to_string(), |p| names_of(&env, p.blocks()));
        let status = if got == want { Status::Pass } else { Status::Fail };
        rows.push(row(example, format!("{} partition", axiom.id()), want, got, status));
    }

    for (_, sets) in ACTIVE_TABLE.iter().filter(|(n, _)| *n == example) {
        let active = ActiveSets::new(&env);
        let fmt_sets = |per: Vec<Vec<String>>| -> String {
            per.iter().map(|s| format!("{{{}}}", s.join(","))).collect::<Vec<_>>().join(" ")
        };
        let got = fmt_sets(
            active
                .per_state()
                .iter()
                .map(|s| s.iter().map(|&i| env.agent_name(i).to_string()).collect())
                .collect(),
        );
        let want = fmt_sets(sets.iter().map(|s| s.iter().map(|a| a.to_string()).collect()).collect());
        let status = if got == want { Status::Pass } else { Status::Fail };
        rows.push(row(example, "active sets", want, got, status));
    }

    let errata = active_set_errata(&env);
    if env.stated_active_sets().is_some() {
        let (expected, status) = match (example, errata.is_empty()) {
            ("ex5", false) => ("stated sets differ (erratum)", Status::Flagged),
            (_, true) => ("stated sets match", Status::Pass),
            _ => ("stated sets match", Status::Fail),
        };
        let actual = if errata.is_empty() {
            "stated sets match".to_string()
        } else {
            let states: Vec<&str> = errata.iter().map(|e| env.state_name(e.state)).collect();
            format!("differ at {}", states.join(","))
        };
        rows.push(row(example, "stated active sets", expected, actual, status));
    }

    if example == "ex6" {
        let core = ActiveSets::new(&env).core();
        let status = if core.is_empty() { Status::Pass } else { Status::Fail };
        let got = if core.is_empty() {
            "none".to_string()
        } else {
            core.iter().map(|&i| env.agent_name(i)).collect::<Vec<_>>().join(",")
        };
        rows.push(row(example, "agents active everywhere", "none", got, status));
    }

    if example == "ex1a" {
        let report = check(&env, AxiomId::Nwa).map_err(|e| ParseError::Invalid(e.to_string()))?;
        let i4 = env.agent_index("i4");
        let exact = report.counterexamples.len() == env.n_states()
            && report
                .counterexamples
                .iter()
                .all(|o| matches!(o, Obligation::AgentState { agent, .. } if Some(*agent) == i4));
        let status = if exact { Status::Pass } else { Status::Fail };
        rows.push(row(
            example,
            "nwa counterexamples",
            "i4 at every state",
            format!("{} counterexamples", report.counterexamples.len()),
            status,
        ));
    }

    if example == "ex7" {
        let report = check(&env, AxiomId::StrictMaskinStarStar).map_err(|e| ParseError::Invalid(e.to_string()))?;
        let theta4 = env.state_index("theta4");
        let at4 = report
            .counterexamples
            .iter()
            .any(|o| matches!(o, Obligation::BlockAgainst { true_state, .. } if Some(*true_state) == theta4));
        let status = if at4 { Status::Pass } else { Status::Fail };
        let actual = if at4 { "unrefuted block" } else { "refuted everywhere" };
        rows.push(row(example, "smm-star-star no whistle-blower at theta4", "unrefuted block", actual, status));
    }

    let containment: &[(&str, &str, &str, ContourKind, ContourKind, bool)] = match example {
        "ex3c" => &[("theta1", "theta2p", "a", ContourKind::WeakLower, ContourKind::WeakLower, true)],
        "ex7" => &[("theta1", "theta4", "a", ContourKind::StrictLower, ContourKind::WeakLower, false)],
        _ => &[],
    };
    for &(from, to, x, inner, outer, all_agents) in containment {
        let (s, t) = (env.state_index(from).unwrap(), env.state_index(to).unwrap());
        let x = env.degenerate(env.outcome_index(x).unwrap());
        let agents: Vec<usize> = if all_agents { (0..env.n_agents()).collect() } else { vec![0] };
        let ok = agents
            .iter()
            .all(|&i| contour_containment(&env, i, &x, s, t, inner, outer));
        let who = if all_agents { "every agent" } else { env.agent_name(0) };
        rows.push(row(
            example,
            format!("{} contour of a at {from} inside {} at {to}, {who}", inner.id(), outer.id()),
            "holds",
            holds_word(ok),
            Y.judge(ok),
        ));
    }

    let lemma = build_lemma_y(&env);
    rows.push(row(example, "lemma system", "holds", holds_word(lemma.is_ok()), Y.judge(lemma.is_ok())));

    for (_, variant, expect) in MECHANISM_TABLE.iter().filter(|(n, ..)| *n == example) {
        let (actual, ok) = match build(&env, *variant, crate::mechanism::DEFAULT_N_MAX) {
            Ok(mech) => {
                let cert = verify_certificates(&mech);
                (if cert.passed { "certified" } else { "certificate failure" }.to_string(), cert.passed)
            }
            Err(e) => (format!("not built: {e}"), false),
        };
        let expected = match expect {
            Expect::Holds => "certified",
            _ => "not built",
        };
        rows.push(row(example, format!("{variant} mechanism"), expected, actual, expect.judge(ok)));
    }
    Ok(rows)
}

pub fn run_all() -> Result<Vec<Row>, ParseError> {
    let mut rows = Vec::new();
    for name in NAMES {
        rows.extend(run_example(name)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn every_example_parses() {
        for name in NAMES {
            let env = load::<Rational>(name).unwrap();
            assert_eq!(env.name.as_deref(), Some(name));
        }
        assert!(load::<Rational>("ex9").is_err());
    }

    #[test]
    fn regression_table_has_no_failures() {
        let rows = run_all().unwrap();
        let bad: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert_eq!(rows.iter().filter(|r| r.status == Status::Flagged).count(), 2);
    }
}
