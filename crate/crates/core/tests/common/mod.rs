#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratimpl::env::{Environment, Validation};
use ratimpl::rationalizability::FiniteGame;
use ratimpl::{Rational, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64) -> Rational {
    Rational::int(n)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// Integer utilities in [-3, 3]. With `responsive`, f is injective (needs states <= outcomes).
pub fn random_env(rng: &mut ChaCha8Rng, agents: usize, states: usize, outcomes: usize, responsive: bool) -> Environment<Rational> {
    let utility = (0..agents)
        .map(|_| {
            (0..states)
                .map(|_| (0..outcomes).map(|_| q(rng.gen_range(-3..=3))).collect())
                .collect()
        })
        .collect();
    let scf: Vec<usize> = if responsive {
        let mut zs: Vec<usize> = (0..outcomes).collect();
        zs.shuffle(rng);
        zs.truncate(states);
        zs
    } else {
        (0..states).map(|_| rng.gen_range(0..outcomes)).collect()
    };
    Environment::new(
        names("i", agents),
        names("theta", states),
        (0..outcomes).map(|z| ((b'a' + z as u8) as char).to_string()).collect(),
        utility,
        scf,
        Validation::Lenient,
    )
    .unwrap()
}

/// Responsive, three agents, |Θ| <= 4 and |Z| <= 3 (so |Θ| <= |Z|).
pub fn random_responsive_env(rng: &mut ChaCha8Rng) -> Environment<Rational> {
    let outcomes = rng.gen_range(2..=3);
    let states = rng.gen_range(2..=outcomes);
    random_env(rng, 3, states, outcomes, true)
}

/// Three agents, |Θ| <= 4, |Z| <= 3, any scf.
pub fn random_any_env(rng: &mut ChaCha8Rng) -> Environment<Rational> {
    let outcomes = rng.gen_range(2..=3);
    let states = rng.gen_range(2..=4);
    random_env(rng, 3, states, outcomes, false)
}

/// At most three players with at most four strategies each, payoffs in [-3, 3].
pub fn random_game(rng: &mut ChaCha8Rng) -> FiniteGame<Rational> {
    let players = rng.gen_range(1..=3);
    let counts: Vec<usize> = (0..players).map(|_| rng.gen_range(1..=4)).collect();
    let total: usize = counts.iter().product();
    let payoffs = (0..players)
        .map(|_| (0..total).map(|_| q(rng.gen_range(-3..=3))).collect())
        .collect();
    let strategies = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (0..c).map(|s| format!("p{i}s{s}")).collect())
        .collect();
    FiniteGame::from_payoffs(names("p", players), strategies, payoffs).unwrap()
}

/// `u_i(z, θ)` read straight from the table.
pub fn u(env: &Environment<Rational>, i: usize, z: usize, s: usize) -> Rational {
    env.u(i, z, s).clone()
}

/// Agents with some outcome strictly below f(θ), by direct scan.
pub fn active(env: &Environment<Rational>, s: usize) -> Vec<usize> {
    (0..env.n_agents())
        .filter(|&i| (0..env.n_outcomes()).any(|z| u(env, i, z, s) < u(env, i, env.scf(s), s)))
        .collect()
}

/// Whether some t in [0, 1] makes every `g0 + g1·t > 0` (or `>= 0` when not strict).
fn interval_nonempty(rows: &[(Rational, Rational, bool)]) -> bool {
    let (mut lo, mut lo_strict) = (q(0), false);
    let (mut hi, mut hi_strict) = (q(1), false);
    for (g0, g1, strict) in rows {
        if g1 == &q(0) {
            if g0 < &q(0) || (*strict && g0 == &q(0)) {
                return false;
            }
            continue;
        }
        let root = -g0.clone() / g1.clone();
        if g1 > &q(0) {
            if root > lo || (root == lo && *strict) {
                lo = root;
                lo_strict = *strict;
            }
        } else if root < hi || (root == hi && *strict) {
            hi = root;
            hi_strict = *strict;
        }
    }
    lo < hi || (lo == hi && !lo_strict && !hi_strict)
}

/// Brute force over mixtures of two outcomes: some lottery with `a·y < α`
/// (or `<=` when `weak_lower`) and `b·y > β`.
pub fn two_row_feasible(a: &[Rational], alpha: &Rational, weak_lower: bool, b: &[Rational], beta: &Rational) -> bool {
    let n = a.len();
    for p in 0..n {
        for r in 0..n {
            // y = (1-t)·e_p + t·e_r
            let rows = [
                (alpha.clone() - a[p].clone(), a[p].clone() - a[r].clone(), !weak_lower),
                (b[p].clone() - beta.clone(), b[r].clone() - b[p].clone(), true),
            ];
            if interval_nonempty(&rows) {
                return true;
            }
        }
    }
    false
}

fn row(env: &Environment<Rational>, i: usize, s: usize) -> Vec<Rational> {
    (0..env.n_outcomes()).map(|z| u(env, i, z, s)).collect()
}

/// Agent `i` weakly blocks `from` at `to`: `y` no better at `from`, strictly better at `to`.
pub fn weakly_blocks(env: &Environment<Rational>, i: usize, from: usize, to: usize) -> bool {
    let f = env.scf(from);
    two_row_feasible(&row(env, i, from), &u(env, i, f, from), true, &row(env, i, to), &u(env, i, f, to))
}

/// Agent `i` strictly blocks `from` at `to` with some lottery.
pub fn blocks(env: &Environment<Rational>, i: usize, from: usize, to: usize) -> bool {
    let f = env.scf(from);
    two_row_feasible(&row(env, i, from), &u(env, i, f, from), false, &row(env, i, to), &u(env, i, f, to))
}

/// Exact solution of a square system by Gaussian elimination, if nonsingular.
pub fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] != q(0))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r][col] != q(0) {
                let k = a[r][col].clone() / a[col][col].clone();
                for c in col..n {
                    let v = a[col][c].clone() * k.clone();
                    a[r][c] -= v;
                }
                let v = b[col].clone() * k;
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|r| b[r].clone() / a[r][r].clone()).collect())
}

/// Every permutation of `items`.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}
