//! Exact feasibility and max-slack optimisation over the probability simplex.
//!
//! Strict inequalities are tightened by a common margin δ that is then
//! maximised; an open system is nonempty exactly when the optimum is positive.

pub(crate) mod simplex;

use crate::env::{AgentId, ContourKind, ContourSpec, Environment, Lottery, StateId};
use crate::error::LpError;
use crate::scalar::Scalar;
use simplex::{maximize, Cmp, Row, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Gt | Relation::Lt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Lt => "<",
        }
    }

    pub fn holds<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
        }
    }
}

/// `coefficients · y  (relation)  bound`, one coefficient per simplex coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint<T> {
    pub coefficients: Vec<T>,
    pub relation: Relation,
    pub bound: T,
}

impl<T: Scalar> LinearConstraint<T> {
    pub fn new(coefficients: Vec<T>, relation: Relation, bound: T) -> Self {
        LinearConstraint {
            coefficients,
            relation,
            bound,
        }
    }

    pub fn lhs(&self, y: &[T]) -> T {
        self.coefficients
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (c, p)| acc + c.clone() * p.clone())
    }

    pub fn is_satisfied(&self, y: &[T]) -> bool {
        self.relation.holds(&self.lhs(y), &self.bound)
    }

    /// Margin by which `y` satisfies the constraint (negative when violated).
    pub fn margin(&self, y: &[T]) -> T {
        let lhs = self.lhs(y);
        match self.relation {
            Relation::Ge | Relation::Gt => lhs - self.bound.clone(),
            Relation::Le | Relation::Lt => self.bound.clone() - lhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpResult<T> {
    pub status: LpStatus,
    pub witness: Option<Lottery<T>>,
    /// Optimal common margin δ* when strict constraints are present.
    pub slack: Option<T>,
}

impl<T> LpResult<T> {
    pub fn is_feasible(&self) -> bool {
        self.status == LpStatus::Feasible
    }
}

/// How a witness is picked among optimal points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// Lexicographically smallest point of the optimal face.
    #[default]
    LexMin,
    /// Whatever vertex the simplex run ends on.
    Vertex,
}

struct Program<T> {
    dim: usize,
    rows: Vec<Row<T>>,
    has_strict: bool,
}

impl<T: Scalar> Program<T> {
    /// Variables: `y_0..y_{dim-1}` then `δ⁺, δ⁻` when any constraint is strict.
    fn build(dim: usize, constraints: &[LinearConstraint<T>], delta: Option<&T>) -> Self {
        let has_strict = delta.is_none() && constraints.iter().any(|c| c.relation.is_strict());
        let nvars = dim + if has_strict { 2 } else { 0 };
        let mut rows = Vec::with_capacity(constraints.len() + 1);
        let mut simplex_row = vec![T::one(); dim];
        simplex_row.resize(nvars, T::zero());
        rows.push(Row {
            coef: simplex_row,
            cmp: Cmp::Eq,
            rhs: T::one(),
        });
        for c in constraints {
            let mut coef = c.coefficients.clone();
            coef.resize(nvars, T::zero());
            let mut rhs = c.bound.clone();
            let cmp = match c.relation {
                Relation::Ge | Relation::Gt => Cmp::Ge,
                Relation::Le | Relation::Lt => Cmp::Le,
            };
            if c.relation.is_strict() {
                // Gt: a·y - δ >= b ; Lt: a·y + δ <= b
                let sign = if c.relation == Relation::Gt { -T::one() } else { T::one() };
                match delta {
                    Some(d) => {
                        rhs = rhs - sign * d.clone();
                    }
                    None => {
                        coef[dim] = sign.clone();
                        coef[dim + 1] = -sign;
                    }
                }
            }
            rows.push(Row { coef, cmp, rhs });
        }
        Program {
            dim,
            rows,
            has_strict,
        }
    }

    fn nvars(&self) -> usize {
        self.dim + if self.has_strict { 2 } else { 0 }
    }
}

fn check_dims<T>(dim: usize, constraints: &[LinearConstraint<T>]) -> Result<(), LpError> {
    if dim == 0 {
        return Err(LpError::EmptyDomain);
    }
    for c in constraints {
        if c.coefficients.len() != dim {
            return Err(LpError::DimensionMismatch {
                expected: dim,
                got: c.coefficients.len(),
            });
        }
    }
    Ok(())
}

/// Maximises the common margin of the strict constraints over the simplex of
/// dimension `dim`, returning the lexicographically smallest optimal witness.
pub fn solve_max_slack<T: Scalar>(
    dim: usize,
    constraints: &[LinearConstraint<T>],
) -> Result<LpResult<T>, LpError> {
    solve_max_slack_with(dim, constraints, Normalization::LexMin)
}

pub fn solve_max_slack_with<T: Scalar>(
    dim: usize,
    constraints: &[LinearConstraint<T>],
    normalization: Normalization,
) -> Result<LpResult<T>, LpError> {
    check_dims(dim, constraints)?;
    let prog = Program::build(dim, constraints, None);
    let nvars = prog.nvars();
    let mut objective = vec![T::zero(); nvars];
    if prog.has_strict {
        objective[dim] = T::one();
        objective[dim + 1] = -T::one();
    }
    let (x, slack) = match maximize(nvars, &prog.rows, &objective) {
        Solution::Infeasible => {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                witness: None,
                slack: None,
            })
        }
        Solution::Unbounded => unreachable!("margin is bounded on the simplex"),
        Solution::Optimal { x, value } => (x, prog.has_strict.then_some(value)),
    };
    if let Some(d) = &slack {
        if !d.is_positive() {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                witness: None,
                slack,
            });
        }
    }
    let point = match normalization {
        Normalization::Vertex => x[..dim].to_vec(),
        Normalization::LexMin => lex_min(dim, constraints, slack.as_ref()),
    };
    let witness = Lottery::from_vec_unchecked(point);
    debug_assert!(constraints.iter().all(|c| c.is_satisfied(witness.probs())));
    Ok(LpResult {
        status: LpStatus::Feasible,
        witness: Some(witness),
        slack,
    })
}

/// Lexicographic minimum of the face where every strict row has margin `δ`.
fn lex_min<T: Scalar>(dim: usize, constraints: &[LinearConstraint<T>], delta: Option<&T>) -> Vec<T> {
    let base = Program::build(dim, constraints, delta);
    let mut rows = base.rows;
    let mut fixed: Vec<T> = Vec::with_capacity(dim);
    for k in 0..dim {
        if k + 1 == dim {
            let rest = crate::scalar::sum(&fixed);
            fixed.push(T::one() - rest);
            break;
        }
        let mut objective = vec![T::zero(); dim];
        objective[k] = -T::one();
        let value = match maximize(dim, &rows, &objective) {
            Solution::Optimal { value, .. } => -value,
            _ => unreachable!("optimal face is nonempty"),
        };
        let mut unit = vec![T::zero(); dim];
        unit[k] = T::one();
        rows.push(Row {
            coef: unit,
            cmp: Cmp::Eq,
            rhs: value.clone(),
        });
        fixed.push(value);
    }
    fixed
}

/// `u_i(y, θ) (rel) bound` as a linear constraint on `y`.
pub fn utility_constraint<T: Scalar>(
    env: &Environment<T>,
    i: AgentId,
    state: StateId,
    relation: Relation,
    bound: T,
) -> LinearConstraint<T> {
    LinearConstraint::new(env.utility_row(i, state).to_vec(), relation, bound)
}

/// Constraint saying `y` lies in the contour set described by `spec`.
pub fn contour_constraint<T: Scalar>(env: &Environment<T>, spec: &ContourSpec<T>) -> LinearConstraint<T> {
    let b = env.eu(spec.agent, &spec.benchmark, spec.state);
    let rel = match spec.kind {
        ContourKind::WeakLower => Relation::Le,
        ContourKind::StrictLower => Relation::Lt,
        ContourKind::StrictUpper => Relation::Gt,
    };
    utility_constraint(env, spec.agent, spec.state, rel, b)
}

/// A lottery in every listed contour set of agent `i`, if one exists.
pub fn find_blocking_plan<T: Scalar>(
    env: &Environment<T>,
    i: AgentId,
    requirements: &[(StateId, ContourKind, Lottery<T>)],
) -> Option<Lottery<T>> {
    assert!(!requirements.is_empty(), "blocking plan needs requirements");
    let constraints: Vec<LinearConstraint<T>> = requirements
        .iter()
        .map(|(state, kind, benchmark)| {
            contour_constraint(
                env,
                &ContourSpec {
                    agent: i,
                    benchmark: benchmark.clone(),
                    state: *state,
                    kind: *kind,
                },
            )
        })
        .collect();
    solve_max_slack(env.n_outcomes(), &constraints)
        .expect("dimensions come from the environment")
        .witness
}

/// Whether the `inner` contour of `x` at `θ` lies inside the `outer` contour
/// of `x` at `θ'` for agent `i`.
pub fn contour_containment<T: Scalar>(
    env: &Environment<T>,
    i: AgentId,
    x: &Lottery<T>,
    state: StateId,
    other: StateId,
    inner: ContourKind,
    outer: ContourKind,
) -> bool {
    assert!(
        inner != ContourKind::StrictUpper && outer != ContourKind::StrictUpper,
        "containment is defined for lower contours"
    );
    let inside = contour_constraint(
        env,
        &ContourSpec {
            agent: i,
            benchmark: x.clone(),
            state,
            kind: inner,
        },
    );
    // y escapes the outer set
    let bound = env.eu(i, x, other);
    let escape_rel = match outer {
        ContourKind::WeakLower => Relation::Gt,
        _ => Relation::Ge,
    };
    let escape = utility_constraint(env, i, other, escape_rel, bound);
    !solve_max_slack_with(env.n_outcomes(), &[inside, escape], Normalization::Vertex)
        .expect("dimensions come from the environment")
        .is_feasible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational as Q;

    fn q(n: i64) -> Q {
        Q::int(n)
    }

    #[test]
    fn margin_capped_by_geometry() {
        // y_0 > 1/2 on the 2-simplex: δ* = 1/2 at y = (1, 0)
        let c = LinearConstraint::new(vec![q(1), q(0)], Relation::Gt, Q::frac(1, 2));
        let r = solve_max_slack(2, &[c]).unwrap();
        assert!(r.is_feasible());
        assert_eq!(r.slack, Some(Q::frac(1, 2)));
        assert_eq!(r.witness.unwrap().probs(), &[q(1), q(0)]);
    }

    #[test]
    fn weak_only_lexmin() {
        let c = LinearConstraint::new(vec![q(1), q(1), q(0)], Relation::Ge, Q::frac(1, 3));
        let r = solve_max_slack(3, &[c]).unwrap();
        assert_eq!(r.slack, None);
        assert_eq!(
            r.witness.unwrap().probs(),
            &[q(0), Q::frac(1, 3), Q::frac(2, 3)]
        );
    }

    #[test]
    fn open_system_with_zero_margin_is_infeasible() {
        // y_0 > 0 and y_0 < 0
        let a = LinearConstraint::new(vec![q(1), q(0)], Relation::Gt, q(0));
        let b = LinearConstraint::new(vec![q(1), q(0)], Relation::Lt, q(0));
        let r = solve_max_slack(2, &[a, b]).unwrap();
        assert!(!r.is_feasible());
        assert_eq!(r.slack, Some(q(0)));
    }

    #[test]
    fn errors() {
        assert_eq!(
            solve_max_slack::<Q>(0, &[]).unwrap_err(),
            LpError::EmptyDomain
        );
        let c = LinearConstraint::new(vec![q(1)], Relation::Gt, q(0));
        assert!(matches!(
            solve_max_slack(2, &[c]),
            Err(LpError::DimensionMismatch { .. })
        ));
    }
}
