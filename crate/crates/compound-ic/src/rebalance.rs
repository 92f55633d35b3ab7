//! Maps a point of the projected-system polytope, whose layer rates may be
//! negative, to a componentwise-nonnegative point satisfying the guarded
//! system with the same per-user totals.

use crate::constraints::{ConstraintSystem, Nonneg};
use crate::error::{Error, Result};
use std::fmt;

/// Absolute tolerance of the membership checks.
pub const CHECK_TOL: f64 = 1e-9;

/// One mass transfer: the negative rate of `from` is added to `to` and
/// `from` is set to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub user: usize,
    pub from: usize,
    pub to: usize,
    pub amount: f64,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |l: usize| if l == 0 { format!("R{}p", self.user) } else { format!("R{}.{}", self.user, l) };
        write!(f, "{} += {} ({}), {} = 0", name(self.to), name(self.from), self.amount, name(self.from))
    }
}

fn check_len(x: &[f64], n_states: usize) -> Result<()> {
    if x.len() != 2 * (n_states + 1) {
        return Err(Error::InvalidInput(format!("rate vector needs {} entries, got {}", 2 * (n_states + 1), x.len())));
    }
    Ok(())
}

fn push(y: &mut [f64], user: usize, from: usize, to: usize, base: usize, steps: &mut Vec<Step>) {
    if y[base + from] < 0.0 {
        let v = y[base + from];
        y[base + to] += v;
        y[base + from] = 0.0;
        steps.push(Step { user, from, to, amount: v });
    }
}

/// Inner-to-outer pass (negative level `l` moves to `l + 1`), then
/// outer-to-inner pass (negative level `l` moves to `l - 1`), per user.
pub fn rebalance_trace(x: &[f64], n_states: usize) -> Result<(Vec<f64>, Vec<Step>)> {
    check_len(x, n_states)?;
    let mut y = x.to_vec();
    let mut steps = Vec::new();
    for user in 1..=2 {
        let base = (user - 1) * (n_states + 1);
        for l in 0..n_states {
            push(&mut y, user, l, l + 1, base, &mut steps);
        }
        for l in (1..=n_states).rev() {
            push(&mut y, user, l, l - 1, base, &mut steps);
        }
    }
    Ok((y, steps))
}

pub fn rebalance(x: &[f64], n_states: usize) -> Result<Vec<f64>> {
    Ok(rebalance_trace(x, n_states)?.0)
}

/// The two passes in the opposite order: outer-to-inner first. Kept for
/// comparison; it can break a guarded inequality (see the tests).
pub fn rebalance_as_printed_trace(x: &[f64], n_states: usize) -> Result<(Vec<f64>, Vec<Step>)> {
    check_len(x, n_states)?;
    let mut y = x.to_vec();
    let mut steps = Vec::new();
    for user in 1..=2 {
        let base = (user - 1) * (n_states + 1);
        for l in (1..=n_states).rev() {
            push(&mut y, user, l, l - 1, base, &mut steps);
        }
        for l in 0..n_states {
            push(&mut y, user, l, l + 1, base, &mut steps);
        }
    }
    Ok((y, steps))
}

pub fn rebalance_as_printed(x: &[f64], n_states: usize) -> Result<Vec<f64>> {
    Ok(rebalance_as_printed_trace(x, n_states)?.0)
}

fn row_sum(sys: &ConstraintSystem, i: usize, x: &[f64]) -> f64 {
    sys.constraints[i].lhs.iter().map(|c| x[c.index(sys.n_states)]).sum()
}

/// Membership in the projected system: every inequality and per-user-sum
/// nonnegativity. The error names the first violated row.
pub fn check_projected(x: &[f64], sys: &ConstraintSystem, rhs: &[f64], tol: f64) -> Result<()> {
    check_len(x, sys.n_states)?;
    let m = sys.n_states + 1;
    for k in 0..2 {
        let s: f64 = x[k * m..(k + 1) * m].iter().sum();
        if s < -tol {
            return Err(Error::Precondition(format!("user {} total {s} is negative", k + 1)));
        }
    }
    for (i, c) in sys.constraints.iter().enumerate() {
        let s = row_sum(sys, i, x);
        if s > rhs[i] + tol {
            return Err(Error::Precondition(format!("row {} violated: {s} > {}", c.tag, rhs[i])));
        }
    }
    Ok(())
}

/// Membership in the guarded system: componentwise nonnegativity, and each
/// inequality whose guard layers carry positive rate.
pub fn check_conditional(x: &[f64], sys: &ConstraintSystem, rhs: &[f64], tol: f64) -> Result<()> {
    check_len(x, sys.n_states)?;
    if let Some(j) = x.iter().position(|&v| v < 0.0) {
        return Err(Error::Invariant(format!("component {j} is negative ({})", x[j])));
    }
    for (i, c) in sys.constraints.iter().enumerate() {
        let guard: f64 = c.guard.iter().map(|r| x[r.index(sys.n_states)]).sum();
        if guard <= 0.0 {
            continue;
        }
        let s = row_sum(sys, i, x);
        if s > rhs[i] + tol {
            return Err(Error::Invariant(format!("guarded row {} violated: {s} > {}", c.tag, rhs[i])));
        }
    }
    Ok(())
}

/// Validates the input, rebalances, and validates the output.
pub fn rebalance_checked(x: &[f64], sys: &ConstraintSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    if sys.nonneg != Nonneg::UserSums {
        return Err(Error::Precondition("input system must use per-user-sum nonnegativity".into()));
    }
    check_projected(x, sys, rhs, CHECK_TOL)?;
    let y = rebalance(x, sys.n_states)?;
    check_conditional(&y, sys, rhs, CHECK_TOL)?;
    Ok(y)
}
