//! Small dense two-phase simplex solver.
//!
//! Used for the transport formulation of the earthmover distance and as the
//! generic-LP route for the smooth calibration error. Problems here have at
//! most a few thousand columns, so a dense tableau is adequate.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

/// A linear program over nonnegative variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

impl LinearProgram {
    /// `objective[i]` is the cost of variable `i`; every variable is `>= 0`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        Self {
            sense,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `sum coeffs[k].1 * x[coeffs[k].0]  rel  rhs`.
    pub fn constrain(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(i, _)| i < self.objective.len()));
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let n_slack = lp
            .constraints
            .iter()
            .filter(|c| c.rel != Relation::Eq)
            .count();
        let n_art = lp
            .constraints
            .iter()
            .filter(|c| c.rel != Relation::Le || c.rhs < 0.0)
            .count();
        let artificial_start = n + n_slack;
        let n_total = artificial_start + n_art;
        let mut rows = vec![vec![0.0; n_total]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut art = artificial_start;
        for (r, c) in lp.constraints.iter().enumerate() {
            for &(i, a) in &c.coeffs {
                rows[r][i] += a;
            }
            rhs[r] = c.rhs;
            let mut slack_col = None;
            match c.rel {
                Relation::Le => {
                    rows[r][slack] = 1.0;
                    slack_col = Some(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    rows[r][slack] = -1.0;
                    slack_col = Some(slack);
                    slack += 1;
                }
                Relation::Eq => {}
            }
            if rhs[r] < 0.0 {
                for a in rows[r].iter_mut() {
                    *a = -*a;
                }
                rhs[r] = -rhs[r];
            }
            match slack_col {
                Some(s) if rows[r][s] > 0.0 => basis[r] = s,
                _ => {
                    rows[r][art] = 1.0;
                    basis[r] = art;
                    art += 1;
                }
            }
        }
        // shrink artificials actually used
        let used = art;
        for row in &mut rows {
            row.truncate(used);
        }
        Self {
            rows,
            rhs,
            basis,
            n_struct: n,
            n_total: used,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, col: usize, cost: &mut [f64], obj: &mut f64) {
        let p = self.rows[r][col];
        for a in self.rows[r].iter_mut() {
            *a /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a -= f * b;
                }
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i].abs() < 1e-15 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = cost[col];
        if f != 0.0 {
            for (a, b) in cost.iter_mut().zip(&pivot_row) {
                *a -= f * b;
            }
            *obj -= f * pivot_rhs;
        }
        self.basis[r] = col;
    }

    /// Minimizes the reduced-cost row `cost` over columns `< allowed`.
    fn optimize(&mut self, cost: &mut [f64], obj: &mut f64, allowed: usize) -> Result<()> {
        let mut degenerate_streak = 0usize;
        let max_iter = 50_000 + 50 * (self.rows.len() + self.n_total);
        for _ in 0..max_iter {
            let bland = degenerate_streak > 50;
            let entering = if bland {
                (0..allowed).find(|&j| cost[j] < -PIVOT_TOL)
            } else {
                (0..allowed)
                    .filter(|&j| cost[j] < -PIVOT_TOL)
                    .min_by(|&a, &b| cost[a].total_cmp(&cost[b]))
            };
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-15
                                || (ratio <= lratio + 1e-15 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::LinearProgram("unbounded"));
            };
            degenerate_streak = if ratio <= 1e-15 { degenerate_streak + 1 } else { 0 };
            self.pivot(r, col, cost, obj);
        }
        Err(Error::LinearProgram("not converging (iteration limit)"))
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let width = self.n_total;
        // phase 1: minimize the sum of artificials
        if self.artificial_start < width {
            let mut cost = vec![0.0; width];
            let mut obj = 0.0;
            cost[self.artificial_start..].fill(1.0);
            for r in 0..self.rows.len() {
                if self.basis[r] >= self.artificial_start {
                    for (c, a) in cost.iter_mut().zip(&self.rows[r]) {
                        *c -= a;
                    }
                    obj -= self.rhs[r];
                }
            }
            self.optimize(&mut cost, &mut obj, width)?;
            if -obj > FEASIBILITY_TOL {
                return Err(Error::LinearProgram("infeasible"));
            }
            // drive remaining artificials out of the basis
            let mut redundant = Vec::new();
            for r in 0..self.rows.len() {
                if self.basis[r] >= self.artificial_start {
                    let col = (0..self.artificial_start)
                        .find(|&j| self.rows[r][j].abs() > PIVOT_TOL);
                    match col {
                        Some(col) => self.pivot(r, col, &mut cost, &mut obj),
                        None => redundant.push(r),
                    }
                }
            }
            for r in redundant.into_iter().rev() {
                self.rows.remove(r);
                self.rhs.remove(r);
                self.basis.remove(r);
            }
        }
        // phase 2
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; width];
        for (j, &c) in lp.objective.iter().enumerate() {
            cost[j] = sign * c;
        }
        let mut obj = 0.0;
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            let cb = cost[b];
            if cb != 0.0 {
                for (c, a) in cost.iter_mut().zip(&self.rows[r]) {
                    *c -= cb * a;
                }
                obj -= cb * self.rhs[r];
            }
        }
        self.optimize(&mut cost, &mut obj, self.artificial_start)?;
        let mut x = vec![0.0; self.n_struct];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[r];
            }
        }
        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { value, x })
    }
}
