//! Partitions of the state set and enumeration of refinements.

use crate::env::StateId;
use crate::error::ParseError;

/// Partition of `{0, .., n-1}` in canonical form: blocks sorted internally and
/// ordered by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<StateId>>, n_states: usize) -> Result<Self, ParseError> {
        let mut block_of = vec![usize::MAX; n_states];
        for b in blocks.iter_mut() {
            if b.is_empty() {
                return Err(ParseError::Invalid("empty partition block".into()));
            }
            b.sort_unstable();
        }
        blocks.sort();
        for (k, b) in blocks.iter().enumerate() {
            for &s in b {
                if s >= n_states || block_of[s] != usize::MAX {
                    return Err(ParseError::Invalid(format!(
                        "state {s} missing or repeated in partition"
                    )));
                }
                block_of[s] = k;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(ParseError::Invalid("partition does not cover every state".into()));
        }
        Ok(Partition { blocks, block_of })
    }

    pub fn singletons(n_states: usize) -> Self {
        Partition::new((0..n_states).map(|s| vec![s]).collect(), n_states).unwrap()
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_states(&self) -> usize {
        self.block_of.len()
    }

    /// Index of the block containing `state`.
    pub fn block_index(&self, state: StateId) -> usize {
        self.block_of[state]
    }

    /// `P(θ)`.
    pub fn block_of(&self, state: StateId) -> &[StateId] {
        &self.blocks[self.block_of[state]]
    }

    pub fn same_block(&self, a: StateId, b: StateId) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n_states() == coarser.n_states()
            && self.blocks.iter().all(|b| {
                let k = coarser.block_of[b[0]];
                b.iter().all(|&s| coarser.block_of[s] == k)
            })
    }
}

/// All set partitions of `items`, as restricted growth strings, ordered by
/// block count and then lexicographically.
fn set_partitions(items: &[StateId]) -> Vec<Vec<Vec<StateId>>> {
    let n = items.len();
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().map_or(0, |m| m + 1);
        out.push((blocks, rgs.clone()));
        // next restricted growth string
        let mut k = n;
        let mut advanced = false;
        while k > 1 {
            k -= 1;
            let max_prefix = rgs[..k].iter().max().copied().unwrap_or(0);
            if rgs[k] <= max_prefix {
                rgs[k] += 1;
                for r in rgs.iter_mut().skip(k + 1) {
                    *r = 0;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    out.sort();
    out.into_iter()
        .map(|(count, rgs)| {
            let mut blocks = vec![Vec::new(); count];
            for (pos, &b) in rgs.iter().enumerate() {
                blocks[b].push(items[pos]);
            }
            blocks
        })
        .collect()
}

/// Every refinement of `coarse`, fewest blocks first, in a fixed order.
pub fn enumerate_refinements(coarse: &Partition) -> Refinements {
    let per_block: Vec<Vec<Vec<Vec<StateId>>>> =
        coarse.blocks().iter().map(|b| set_partitions(b)).collect();
    Refinements {
        n_states: coarse.n_states(),
        min_blocks: coarse.n_blocks(),
        max_blocks: coarse.n_states(),
        target: coarse.n_blocks(),
        cursor: vec![0; per_block.len()],
        fresh: true,
        per_block,
    }
}

/// Lazy iterator behind [`enumerate_refinements`].
pub struct Refinements {
    n_states: usize,
    min_blocks: usize,
    max_blocks: usize,
    target: usize,
    per_block: Vec<Vec<Vec<Vec<StateId>>>>,
    cursor: Vec<usize>,
    fresh: bool,
}

impl Refinements {
    fn step(&mut self) -> bool {
        for k in (0..self.cursor.len()).rev() {
            self.cursor[k] += 1;
            if self.cursor[k] < self.per_block[k].len() {
                return true;
            }
            self.cursor[k] = 0;
        }
        false
    }

    fn block_total(&self) -> usize {
        self.cursor
            .iter()
            .enumerate()
            .map(|(k, &c)| self.per_block[k][c].len())
            .sum()
    }
}

impl Iterator for Refinements {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        loop {
            if self.target > self.max_blocks || self.target < self.min_blocks {
                return None;
            }
            if self.fresh {
                self.fresh = false;
            } else if !self.step() {
                self.target += 1;
                self.cursor.iter_mut().for_each(|c| *c = 0);
                self.fresh = true;
                continue;
            }
            if self.block_total() == self.target {
                let blocks: Vec<Vec<StateId>> = self
                    .cursor
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &c)| self.per_block[k][c].iter().cloned())
                    .collect();
                return Some(Partition::new(blocks, self.n_states).expect("valid refinement"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(n: usize) -> usize {
        set_partitions(&(0..n).collect::<Vec<_>>()).len()
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(
            (1..=6).map(bell).collect::<Vec<_>>(),
            vec![1, 2, 5, 15, 52, 203]
        );
    }

    #[test]
    fn refinement_counts() {
        let p = Partition::new(vec![vec![0, 1, 2], vec![3]], 4).unwrap();
        let all: Vec<_> = enumerate_refinements(&p).collect();
        assert_eq!(all.len(), 5);
        assert_eq!(all[0], p);
        assert!(all.iter().all(|q| q.refines(&p)));
        assert!(all.windows(2).all(|w| w[0].n_blocks() <= w[1].n_blocks()));

        let q = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        assert_eq!(enumerate_refinements(&q).count(), 4);

        let s = Partition::singletons(3);
        assert_eq!(enumerate_refinements(&s).collect::<Vec<_>>(), vec![s]);
    }

    #[test]
    fn refinements_are_distinct() {
        let p = Partition::new(vec![vec![0, 2, 4], vec![1, 3]], 5).unwrap();
        let all: Vec<_> = enumerate_refinements(&p).collect();
        assert_eq!(all.len(), 5 * 2);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn canonical_form() {
        let p = Partition::new(vec![vec![3, 1], vec![2, 0]], 4).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert!(Partition::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(Partition::new(vec![vec![0]], 2).is_err());
    }
}
