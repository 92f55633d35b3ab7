//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! The programs solved here have at most a few hundred rows, so a dense
//! tableau is adequate and keeps pivoting deterministic.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Cmp, f64)>,
    free: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Reduced-cost threshold for entering columns.
const COST_TOL: f64 = 1e-11;
/// Smallest admissible pivot magnitude.
const PIVOT_TOL: f64 = 1e-10;
/// Phase-one infeasibility threshold.
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

impl LinearProgram {
    /// `n` variables, all nonnegative until marked free.
    pub fn new(n: usize) -> Self {
        LinearProgram { n, objective: vec![0.0; n], rows: Vec::new(), free: vec![false; n] }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn set_objective(&mut self, c: &[f64]) -> &mut Self {
        assert_eq!(c.len(), self.n, "objective length");
        self.objective = c.to_vec();
        self
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    pub fn set_all_free(&mut self) -> &mut Self {
        self.free.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn add_row(&mut self, coeffs: &[f64], cmp: Cmp, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.n, "row length");
        self.rows.push((coeffs.to_vec(), cmp, rhs));
        self
    }

    /// Maximizes the objective.
    pub fn maximize(&self) -> Result<LpSolution> {
        let mut t = Tableau::build(self)?;
        let z = t.solve(&self.objective_std())?;
        let x = t.recover(self);
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
        debug_assert!((value - z).abs() <= 1e-6 * (1.0 + z.abs()));
        Ok(LpSolution { value, x })
    }

    /// Minimizes the objective.
    pub fn minimize(&self) -> Result<LpSolution> {
        let mut neg = self.clone();
        neg.objective.iter_mut().for_each(|c| *c = -*c);
        let s = neg.maximize()?;
        Ok(LpSolution { value: -s.value, x: s.x })
    }

    /// Largest row violation of `x`, including sign restrictions.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, cmp, b) in &self.rows {
            let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            let v = match cmp {
                Cmp::Le => lhs - b,
                Cmp::Ge => b - lhs,
                Cmp::Eq => (lhs - b).abs(),
            };
            worst = worst.max(v);
        }
        for (v, free) in x.iter().zip(&self.free) {
            if !free {
                worst = worst.max(-v);
            }
        }
        worst
    }

    /// Objective over the split columns (free variables appear twice).
    fn objective_std(&self) -> Vec<f64> {
        let mut c = Vec::new();
        for j in 0..self.n {
            c.push(self.objective[j]);
            if self.free[j] {
                c.push(-self.objective[j]);
            }
        }
        c
    }
}

struct Tableau {
    m: usize,
    /// Structural (split) columns + slack columns + artificial columns.
    cols: usize,
    n_struct: usize,
    first_art: usize,
    /// Row-major `m x (cols + 1)`; last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
    banned: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let n_struct: usize = (0..lp.n).map(|j| if lp.free[j] { 2 } else { 1 }).sum();
        let n_slack = lp.rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let m = lp.rows.len();
        // Decide which rows need an artificial column.
        let mut needs_art = Vec::with_capacity(m);
        for (_, cmp, b) in &lp.rows {
            if !b.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite right-hand side {b}")));
            }
            let slack_positive = match cmp {
                Cmp::Le => *b >= 0.0,
                Cmp::Ge => *b < 0.0,
                Cmp::Eq => false,
            };
            needs_art.push(!slack_positive);
        }
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let cols = n_struct + n_slack + n_art;
        let w = cols + 1;
        let mut a = vec![0.0; m * w];
        let mut basis = vec![0; m];
        let mut slack = n_struct;
        let mut art = n_struct + n_slack;
        for (i, (coef, cmp, b)) in lp.rows.iter().enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            let row = &mut a[i * w..(i + 1) * w];
            let mut c = 0;
            for (&v, &free) in coef.iter().zip(&lp.free) {
                if !v.is_finite() {
                    return Err(Error::InvalidInput("non-finite coefficient".into()));
                }
                row[c] = sign * v;
                c += 1;
                if free {
                    row[c] = -sign * v;
                    c += 1;
                }
            }
            match cmp {
                Cmp::Le => {
                    row[slack] = sign;
                    if !needs_art[i] {
                        basis[i] = slack;
                    }
                    slack += 1;
                }
                Cmp::Ge => {
                    row[slack] = -sign;
                    if !needs_art[i] {
                        basis[i] = slack;
                    }
                    slack += 1;
                }
                Cmp::Eq => {}
            }
            if needs_art[i] {
                row[art] = 1.0;
                basis[i] = art;
                art += 1;
            }
            row[cols] = sign * b;
        }
        Ok(Tableau { m, cols, n_struct, first_art: n_struct + n_slack, a, basis, banned: vec![false; cols] })
    }

    fn w(&self) -> usize {
        self.cols + 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.w();
        let p = self.a[r * w + c];
        for j in 0..w {
            self.a[r * w + j] /= p;
        }
        self.a[r * w + c] = 1.0;
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Runs primal simplex for `max cost . x` from the current basis.
    /// Returns the objective value.
    fn run(&mut self, cost: &[f64]) -> Result<f64> {
        let w = self.w();
        let mut pivots = 0;
        loop {
            // Reduced costs d_j = c_j - c_B . column_j.
            let mut enter = None;
            for j in 0..self.cols {
                if self.banned[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for i in 0..self.m {
                    d -= cost[self.basis[i]] * self.a[i * w + j];
                }
                if d > COST_TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else {
                let z = (0..self.m).map(|i| cost[self.basis[i]] * self.a[i * w + self.cols]).sum();
                return Ok(z);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let aij = self.a[i * w + c];
                if aij > PIVOT_TOL {
                    let ratio = self.a[i * w + self.cols].max(0.0) / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12 * (1.0 + best.abs())
                                || (ratio <= best + 1e-12 * (1.0 + best.abs()) && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, c);
            pivots += 1;
            if pivots > MAX_PIVOTS {
                return Err(Error::ResourceLimit("simplex pivot limit".into()));
            }
        }
    }

    fn solve(&mut self, cost_std: &[f64]) -> Result<f64> {
        let w = self.w();
        if self.first_art < self.cols {
            let mut c1 = vec![0.0; self.cols];
            for c in c1.iter_mut().skip(self.first_art) {
                *c = -1.0;
            }
            let z = self.run(&c1)?;
            if z < -FEAS_TOL * (1.0 + self.rhs_scale()) {
                return Err(Error::Infeasible);
            }
            // Drive remaining artificials out of the basis.
            let mut i = 0;
            while i < self.m {
                if self.basis[i] >= self.first_art {
                    let col = (0..self.first_art).find(|&j| self.a[i * w + j].abs() > PIVOT_TOL);
                    match col {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => self.drop_row(i),
                    }
                } else {
                    i += 1;
                }
            }
            for j in self.first_art..self.cols {
                self.banned[j] = true;
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..self.n_struct].copy_from_slice(cost_std);
        self.run(&cost)
    }

    fn rhs_scale(&self) -> f64 {
        let w = self.w();
        (0..self.m).map(|i| self.a[i * w + self.cols].abs()).fold(0.0, f64::max)
    }

    fn drop_row(&mut self, i: usize) {
        let w = self.w();
        self.a.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.m -= 1;
    }

    fn recover(&self, lp: &LinearProgram) -> Vec<f64> {
        let w = self.w();
        let mut std = vec![0.0; self.n_struct];
        for i in 0..self.m {
            if self.basis[i] < self.n_struct {
                std[self.basis[i]] = self.a[i * w + self.cols];
            }
        }
        let mut x = Vec::with_capacity(lp.n);
        let mut c = 0;
        for j in 0..lp.n {
            if lp.free[j] {
                x.push(std[c] - std[c + 1]);
                c += 2;
            } else {
                x.push(std[c]);
                c += 1;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[3.0, 5.0])
            .add_row(&[1.0, 0.0], Cmp::Le, 4.0)
            .add_row(&[0.0, 2.0], Cmp::Le, 12.0)
            .add_row(&[3.0, 2.0], Cmp::Le, 18.0);
        let s = lp.maximize().unwrap();
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // min x + y, x + y = 3, x - y >= 1, x, y >= 0 -> 3
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 1.0])
            .add_row(&[1.0, 1.0], Cmp::Eq, 3.0)
            .add_row(&[1.0, -1.0], Cmp::Ge, 1.0);
        let s = lp.minimize().unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!(lp.max_violation(&s.x) < 1e-12);
    }

    #[test]
    fn free_variables() {
        // max -x, x >= -5 (free) -> 5 at x = -5
        let mut lp = LinearProgram::new(1);
        lp.set_objective(&[-1.0]).set_free(0).add_row(&[1.0], Cmp::Ge, -5.0);
        let s = lp.maximize().unwrap();
        assert!((s.value - 5.0).abs() < 1e-12);
        assert!((s.x[0] + 5.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(&[1.0]).add_row(&[1.0], Cmp::Le, 1.0).add_row(&[1.0], Cmp::Ge, 2.0);
        assert_eq!(lp.maximize(), Err(Error::Infeasible));
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 0.0]).add_row(&[0.0, 1.0], Cmp::Le, 1.0);
        assert_eq!(lp.maximize(), Err(Error::Unbounded));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 2.0])
            .add_row(&[1.0, 1.0], Cmp::Eq, 1.0)
            .add_row(&[2.0, 2.0], Cmp::Eq, 2.0);
        let s = lp.maximize().unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.set_objective(&[0.75, -150.0, 0.02, -6.0])
            .add_row(&[0.25, -60.0, -0.04, 9.0], Cmp::Le, 0.0)
            .add_row(&[0.5, -90.0, -0.02, 3.0], Cmp::Le, 0.0)
            .add_row(&[0.0, 0.0, 1.0, 0.0], Cmp::Le, 1.0);
        let s = lp.maximize().unwrap();
        assert!((s.value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn box_in_six_dimensions() {
        let mut lp = LinearProgram::new(6);
        lp.set_objective(&[1.0; 6]).set_all_free();
        for j in 0..6 {
            let mut r = vec![0.0; 6];
            r[j] = 1.0;
            lp.add_row(&r, Cmp::Le, 1.0);
        }
        assert!((lp.maximize().unwrap().value - 6.0).abs() < 1e-12);
    }
}
