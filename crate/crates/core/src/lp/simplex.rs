//! Dense two-phase simplex over an exact field, Bland's rule throughout.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub(crate) struct Row<T> {
    pub coef: Vec<T>,
    pub cmp: Cmp,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Solution<T> {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<T>, value: T },
}

struct Tableau<T> {
    // m rows of width ncols + 1 (rhs last)
    rows: Vec<Vec<T>>,
    // reduced costs, width ncols + 1; value in the last slot
    obj: Vec<T>,
    basis: Vec<usize>,
    allowed: Vec<bool>,
}

impl<T: Scalar> Tableau<T> {
    fn ncols(&self) -> usize {
        self.allowed.len()
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.ncols() + 1;
        let p = self.rows[r][j].clone();
        if !p.is_one() {
            for k in 0..w {
                if !self.rows[r][k].is_zero() {
                    self.rows[r][k] = self.rows[r][k].clone() / p.clone();
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for k in 0..w {
                if !pivot_row[k].is_zero() {
                    row[k] = row[k].clone() - f.clone() * pivot_row[k].clone();
                }
            }
        }
        if !self.obj[j].is_zero() {
            let f = self.obj[j].clone();
            for k in 0..w {
                if !pivot_row[k].is_zero() {
                    self.obj[k] = self.obj[k].clone() - f.clone() * pivot_row[k].clone();
                }
            }
        }
        self.basis[r] = j;
    }

    /// Sets reduced costs for maximising `c · x` under the current basis.
    fn set_objective(&mut self, c: &[T]) {
        let w = self.ncols() + 1;
        let mut obj: Vec<T> = (0..w)
            .map(|k| if k < c.len() { -c[k].clone() } else { T::zero() })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = if b < c.len() { c[b].clone() } else { T::zero() };
            if cb.is_zero() {
                continue;
            }
            for k in 0..w {
                if !self.rows[r][k].is_zero() {
                    obj[k] = obj[k].clone() + cb.clone() * self.rows[r][k].clone();
                }
            }
        }
        self.obj = obj;
    }

    /// Runs primal simplex; `false` on unboundedness.
    fn optimise(&mut self) -> bool {
        let rhs = self.ncols();
        loop {
            let entering = (0..self.ncols()).find(|&j| self.allowed[j] && self.obj[j].is_negative());
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if a.is_positive() {
                    let ratio = self.rows[r][rhs].clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((lr, lv)) => {
                            ratio < *lv || (ratio == *lv && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }
}

/// Maximises `objective · x` subject to `rows` and `x >= 0`.
pub(crate) fn maximize<T: Scalar>(nvars: usize, rows: &[Row<T>], objective: &[T]) -> Solution<T> {
    let m = rows.len();
    let mut normalized: Vec<Row<T>> = rows
        .iter()
        .map(|row| {
            debug_assert_eq!(row.coef.len(), nvars);
            if row.rhs.is_negative() {
                Row {
                    coef: row.coef.iter().map(|c| -c.clone()).collect(),
                    cmp: match row.cmp {
                        Cmp::Le => Cmp::Ge,
                        Cmp::Ge => Cmp::Le,
                        Cmp::Eq => Cmp::Eq,
                    },
                    rhs: -row.rhs.clone(),
                }
            } else {
                row.clone()
            }
        })
        .collect();

    let n_slack = normalized.iter().filter(|r| r.cmp != Cmp::Eq).count();
    let n_art = normalized.iter().filter(|r| r.cmp != Cmp::Le).count();
    let ncols = nvars + n_slack + n_art;
    let art_start = nvars + n_slack;
    let mut tab_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (nvars, art_start);
    for row in normalized.iter_mut() {
        let mut line = vec![T::zero(); ncols + 1];
        for (k, c) in row.coef.iter().enumerate() {
            line[k] = c.clone();
        }
        line[ncols] = row.rhs.clone();
        match row.cmp {
            Cmp::Le => {
                line[next_slack] = T::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Cmp::Ge => {
                line[next_slack] = -T::one();
                next_slack += 1;
                line[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
            Cmp::Eq => {
                line[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        tab_rows.push(line);
    }
    let mut tab = Tableau {
        rows: tab_rows,
        obj: Vec::new(),
        basis,
        allowed: vec![true; ncols],
    };

    if n_art > 0 {
        let phase1: Vec<T> = (0..ncols)
            .map(|k| if k >= art_start { -T::one() } else { T::zero() })
            .collect();
        tab.set_objective(&phase1);
        tab.optimise();
        if tab.obj[ncols].is_negative() {
            return Solution::Infeasible;
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                let col = (0..art_start).find(|&j| !tab.rows[r][j].is_zero());
                match col {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for j in art_start..ncols {
            tab.allowed[j] = false;
        }
    }

    tab.set_objective(objective);
    if !tab.optimise() {
        return Solution::Unbounded;
    }
    let mut x = vec![T::zero(); nvars];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < nvars {
            x[b] = tab.rows[r][ncols].clone();
        }
    }
    let value = tab.obj[ncols].clone();
    Solution::Optimal { x, value }
}
