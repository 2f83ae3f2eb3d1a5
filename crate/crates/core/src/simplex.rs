//! Self-contained dense two-phase simplex solver.
//!
//! Minimizes `c . x` subject to rows `a . x (<=|=) b` and `x >= 0`.
//! Bland's rule is used throughout, so the method cannot cycle; an
//! iteration cap still guards against numerical stalls and is surfaced to
//! the caller instead of returning a wrong answer.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpProblem<F> {
    num_vars: usize,
    objective: Vec<F>,
    rows: Vec<(Vec<F>, Relation, F)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<F> {
    pub x: Vec<F>,
    pub objective: F,
}

impl<F: Scalar> LpProblem<F> {
    pub fn new(num_vars: usize, objective: Vec<F>) -> Self {
        assert_eq!(objective.len(), num_vars);
        LpProblem {
            num_vars,
            objective,
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<F>, relation: Relation, rhs: F) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push((coeffs, relation, rhs));
    }

    /// Solves with a dense full tableau. Returns the optimum over
    /// `x >= 0`, or an error if infeasible, unbounded, or the iteration cap
    /// is exceeded.
    pub fn solve(&self, max_iterations: usize) -> Result<LpSolution<F>> {
        Tableau::build(self).solve(max_iterations)
    }
}

struct Tableau<F> {
    m: usize,
    /// structural + slack variables (artificials live past this index)
    n: usize,
    n_total: usize,
    /// row-major (m rows of n_total coefficients) plus rhs column
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    /// phase-2 cost vector padded over all columns
    cost: Vec<F>,
    eps: F,
}

impl<F: Scalar> Tableau<F> {
    fn build(p: &LpProblem<F>) -> Self {
        let m = p.rows.len();
        let num_slacks = p.rows.iter().filter(|(_, r, _)| *r == Relation::Le).count();
        let n = p.num_vars + num_slacks;
        let n_total = n + m; // one artificial per row; unused ones stay zero
        let mut rows = vec![vec![F::zero(); n_total]; m];
        let mut rhs = vec![F::zero(); m];
        let mut basis = vec![0usize; m];
        let mut slack_idx = p.num_vars;
        for (i, (coeffs, relation, b)) in p.rows.iter().enumerate() {
            let mut flip = F::one();
            if *b < F::zero() {
                flip = -F::one();
            }
            for (j, &c) in coeffs.iter().enumerate() {
                rows[i][j] = flip * c;
            }
            rhs[i] = flip * *b;
            if *relation == Relation::Le {
                rows[i][slack_idx] = flip;
                slack_idx += 1;
            }
        }
        // Artificial basis: prefer a positive slack column where available,
        // otherwise install the artificial.
        for i in 0..m {
            let slack_col = (p.num_vars..n).find(|&j| rows[i][j] == F::one() && {
                // the slack belongs to exactly this row
                (0..m).all(|r| r == i || rows[r][j] == F::zero())
            });
            match slack_col {
                Some(j) => basis[i] = j,
                None => {
                    rows[i][n + i] = F::one();
                    basis[i] = n + i;
                }
            }
        }
        let mut cost = vec![F::zero(); n_total];
        cost[..p.num_vars].copy_from_slice(&p.objective);
        let eps = F::epsilon().sqrt() * F::of(1e-2);
        Tableau {
            m,
            n,
            n_total,
            rows,
            rhs,
            basis,
            cost,
            eps,
        }
    }

    /// Reduced-cost row z_j - c_j for the given cost vector.
    fn reduced_costs(&self, cost: &[F]) -> Vec<F> {
        let mut z = vec![F::zero(); self.n_total];
        for j in 0..self.n_total {
            let mut acc = -cost[j];
            for i in 0..self.m {
                acc += cost[self.basis[i]] * self.rows[i][j];
            }
            z[j] = acc;
        }
        z
    }

    fn objective_value(&self, cost: &[F]) -> F {
        let mut acc = F::zero();
        for i in 0..self.m {
            acc += cost[self.basis[i]] * self.rhs[i];
        }
        acc
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        let inv = pivot.recip();
        for j in 0..self.n_total {
            self.rows[row][j] *= inv;
        }
        self.rhs[row] *= inv;
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == F::zero() {
                continue;
            }
            for j in 0..self.n_total {
                let delta = factor * self.rows[row][j];
                self.rows[i][j] -= delta;
            }
            let delta_rhs = factor * self.rhs[row];
            self.rhs[i] -= delta_rhs;
            if self.rhs[i] < F::zero() && self.rhs[i] > -self.eps {
                self.rhs[i] = F::zero();
            }
        }
        self.basis[row] = col;
    }

    /// One simplex phase with Bland's rule over the allowed column range.
    fn run_phase(
        &mut self,
        cost: &[F],
        allowed_cols: usize,
        budget: &mut usize,
    ) -> Result<()> {
        loop {
            if *budget == 0 {
                return Err(Error::LpInconclusive { iterations: 0 });
            }
            *budget -= 1;
            let z = self.reduced_costs(cost);
            // Bland: smallest index with z_j - c_j > eps enters (minimization).
            let entering = (0..allowed_cols).find(|&j| z[j] > self.eps);
            let col = match entering {
                Some(c) => c,
                None => return Ok(()),
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = F::infinity();
            for i in 0..self.m {
                let a = self.rows[i][col];
                if a > self.eps {
                    let ratio = self.rhs[i] / a;
                    let better = ratio < best_ratio - self.eps
                        || (ratio < best_ratio + self.eps
                            && leave.map_or(true, |l| self.basis[i] < self.basis[l]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let row = match leave {
                Some(r) => r,
                None => return Err(Error::LpUnbounded),
            };
            self.pivot(row, col);
        }
    }

    fn solve(mut self, max_iterations: usize) -> Result<LpSolution<F>> {
        let mut budget = max_iterations;

        // Phase 1: minimize the sum of artificials.
        let mut phase1_cost = vec![F::zero(); self.n_total];
        for j in self.n..self.n_total {
            phase1_cost[j] = F::one();
        }
        self.run_phase(&phase1_cost, self.n_total, &mut budget)
            .map_err(|e| match e {
                Error::LpInconclusive { .. } => Error::LpInconclusive { iterations: max_iterations },
                other => other,
            })?;
        let infeasibility = self.objective_value(&phase1_cost);
        if infeasibility > F::of(1e-7).max(self.eps) {
            return Err(Error::LpPhase1Infeasible);
        }
        // Pivot any artificial still basic out where possible; a row with no
        // eligible pivot is redundant and harmless at value zero.
        for i in 0..self.m {
            if self.basis[i] >= self.n {
                if let Some(col) = (0..self.n).find(|&j| self.rows[i][j].abs() > self.eps) {
                    self.pivot(i, col);
                }
            }
        }

        // Phase 2 over structural + slack columns only.
        let cost = self.cost.clone();
        self.run_phase(&cost, self.n, &mut budget).map_err(|e| match e {
            Error::LpInconclusive { .. } => Error::LpInconclusive { iterations: max_iterations },
            other => other,
        })?;

        let mut x = vec![F::zero(); self.n];
        for i in 0..self.m {
            if self.basis[i] < self.n {
                x[self.basis[i]] = self.rhs[i];
            }
        }
        let objective = self.objective_value(&cost);
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_minimization() {
        // min x0 + x1  s.t.  x0 + x1 >= ... use equalities:
        // x0 + 2 x1 = 4, x0 + x1 <= 3  ->  optimum x = (0, 2), obj 2.
        let mut lp = LpProblem::<f64>::new(2, vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 2.0], Relation::Eq, 4.0);
        lp.add_row(vec![1.0, 1.0], Relation::Le, 3.0);
        let sol = lp.solve(1000).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9, "{sol:?}");
        assert!((sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x0 = 1 and x0 = 2 simultaneously.
        let mut lp = LpProblem::<f64>::new(1, vec![0.0]);
        lp.add_row(vec![1.0], Relation::Eq, 1.0);
        lp.add_row(vec![1.0], Relation::Eq, 2.0);
        assert!(matches!(lp.solve(1000), Err(Error::LpPhase1Infeasible)));
    }

    #[test]
    fn detects_unbounded() {
        // min -x0 with only x0 >= 0: unbounded below.
        let mut lp = LpProblem::<f64>::new(1, vec![-1.0]);
        lp.add_row(vec![0.0], Relation::Eq, 0.0);
        assert!(matches!(lp.solve(1000), Err(Error::LpUnbounded)));
    }

    #[test]
    fn handles_negative_rhs() {
        // -x0 <= -2  i.e. x0 >= 2; min x0 -> 2.
        let mut lp = LpProblem::<f64>::new(1, vec![1.0]);
        lp.add_row(vec![-1.0], Relation::Le, -2.0);
        let sol = lp.solve(1000).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Multiple redundant equalities around a single vertex.
        let mut lp = LpProblem::<f64>::new(3, vec![1.0, 2.0, 3.0]);
        lp.add_row(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0);
        lp.add_row(vec![2.0, 2.0, 2.0], Relation::Eq, 2.0);
        lp.add_row(vec![1.0, 0.0, 0.0], Relation::Le, 1.0);
        let sol = lp.solve(1000).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }
}
