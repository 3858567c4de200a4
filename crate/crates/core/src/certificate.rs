//! Exact inequality certificates.

use crate::lp::Relation;
use crate::scalar::Scalar;

/// One checked inequality `lhs (relation) rhs`.
///
/// Existential claims that found no witness carry no values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry<T> {
    pub label: &'static str,
    pub instance: String,
    pub lhs: Option<T>,
    pub relation: Relation,
    pub rhs: Option<T>,
    pub holds: bool,
}

impl<T: Scalar> Entry<T> {
    pub fn compare(label: &'static str, instance: impl Into<String>, lhs: T, relation: Relation, rhs: T) -> Self {
        let holds = relation.holds(&lhs, &rhs);
        Entry {
            label,
            instance: instance.into(),
            lhs: Some(lhs),
            relation,
            rhs: Some(rhs),
            holds,
        }
    }

    /// An existential obligation with no witness.
    pub fn missing(label: &'static str, instance: impl Into<String>, relation: Relation) -> Self {
        Entry {
            label,
            instance: instance.into(),
            lhs: None,
            relation,
            rhs: None,
            holds: false,
        }
    }
}

/// A titled group of entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section<T> {
    pub name: String,
    pub entries: Vec<Entry<T>>,
    pub notes: Vec<String>,
}

impl<T: Scalar> Section<T> {
    pub fn new(name: impl Into<String>) -> Self {
        Section {
            name: name.into(),
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry<T>> {
        self.entries.iter().filter(|e| !e.holds)
    }
}

/// Values `w·limit + (1 - w)·tail` for weights `w0 < w1 < ... → 1`, such as
/// the payoff of a lottery mixed with a fading penalty as the integer grows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FadingMix<T> {
    pub limit: T,
    pub tail: T,
    pub first_weight: T,
}

impl<T: Scalar> FadingMix<T> {
    pub fn new(limit: T, tail: T, first_weight: T) -> Self {
        FadingMix {
            limit,
            tail,
            first_weight,
        }
    }

    /// Supremum over the family and whether some member attains it.
    pub fn supremum(&self) -> (T, bool) {
        if self.tail > self.limit {
            let w = &self.first_weight;
            (w.clone() * self.limit.clone() + (T::one() - w.clone()) * self.tail.clone(), true)
        } else {
            // constant if equal, otherwise increasing towards the limit
            (self.limit.clone(), self.tail == self.limit)
        }
    }

    /// The single comparison equivalent to `bound > a` for every member `a`.
    pub fn strict_bound(&self) -> (Relation, T) {
        match self.supremum() {
            (s, true) => (Relation::Gt, s),
            (s, false) => (Relation::Ge, s),
        }
    }

    /// `bound >= a` for every member.
    pub fn weak_bound(&self) -> (Relation, T) {
        (Relation::Ge, self.supremum().0)
    }

    /// Member at weight `w`.
    pub fn at(&self, w: &T) -> T {
        w.clone() * self.limit.clone() + (T::one() - w.clone()) * self.tail.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn fading_mix_matches_members() {
        // weights n/(n+1) for n = 1..
        for (limit, tail) in [(3, 1), (1, 3), (2, 2), (-1, 0)] {
            let fam = FadingMix::new(q(limit, 1), q(tail, 1), q(1, 2));
            let (sup, attained) = fam.supremum();
            let members: Vec<Rational> = (1..200).map(|n| fam.at(&q(n, n + 1))).collect();
            assert!(members.iter().all(|m| *m <= sup));
            assert_eq!(attained, members.contains(&sup));
            let (rel, rhs) = fam.strict_bound();
            for b in [sup.clone(), sup.clone() + q(1, 10), sup.clone() - q(1, 10)] {
                let claimed = rel.holds(&b, &rhs);
                let direct = members.iter().all(|m| b > *m);
                // the first 200 members suffice to refute a bound below the limit
                if b < sup || attained {
                    assert_eq!(claimed, direct, "limit {limit} tail {tail} bound {b}");
                } else {
                    assert!(claimed && direct);
                }
            }
        }
    }
}
