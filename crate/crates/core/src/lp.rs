//! Dense two-phase tableau simplex for standard-form linear programs.
//!
//! Problems are `maximize c·x subject to A x = b, x >= 0`. Pivoting follows
//! Bland's rule throughout, so the solver terminates on degenerate problems
//! and is fully deterministic.

use thiserror::Error;

/// Relative primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Entries smaller than this are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-10;

const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// `maximize c·x` subject to `A x = b`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLP {
    pub objective: Vec<f64>,
    /// Row-major, `rows() x cols()`.
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPResult {
    pub status: LpStatus,
    pub value: f64,
    pub solution: Vec<f64>,
    pub iterations: usize,
}

/// Maps the variables of an inequality-form program onto the columns of the
/// standard-form program built by [`from_inequalities`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMap {
    pub original: usize,
    /// Column of the slack variable attached to each inequality row.
    pub slack_of_row: Vec<usize>,
}

impl VariableMap {
    /// The original (non-slack) variables of a standard-form solution.
    pub fn original_values<'a>(&self, solution: &'a [f64]) -> &'a [f64] {
        &solution[..self.original]
    }
}

impl StandardFormLP {
    pub fn new(objective: Vec<f64>, matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self, LpError> {
        let lp = Self {
            objective,
            matrix,
            rhs,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.matrix.len() != self.rhs.len() {
            return Err(LpError::Dimension(format!(
                "{} constraint rows but {} right-hand sides",
                self.matrix.len(),
                self.rhs.len()
            )));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != self.cols() {
                return Err(LpError::Dimension(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.cols()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite("constraint matrix"));
            }
        }
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("right-hand side"));
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        Ok(())
    }

    /// `‖A x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn feasibility_limit(&self) -> f64 {
        let bmax = self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        FEASIBILITY_TOL * (1.0 + bmax)
    }
}

/// Builds `maximize c·x s.t. A_ineq x <= b_ineq, A_eq x = b_eq, x >= 0` in
/// standard form by appending one slack column per inequality row. Inequality
/// rows come first in the resulting matrix.
pub fn from_inequalities(
    objective: &[f64],
    a_ineq: &[Vec<f64>],
    b_ineq: &[f64],
    a_eq: &[Vec<f64>],
    b_eq: &[f64],
) -> Result<(StandardFormLP, VariableMap), LpError> {
    let n = objective.len();
    if a_ineq.len() != b_ineq.len() || a_eq.len() != b_eq.len() {
        return Err(LpError::Dimension(
            "row count does not match right-hand side length".into(),
        ));
    }
    if let Some(bad) = a_ineq.iter().chain(a_eq).find(|r| r.len() != n) {
        return Err(LpError::Dimension(format!(
            "row with {} entries, expected {n}",
            bad.len()
        )));
    }
    let slacks = a_ineq.len();
    let total = n + slacks;
    let mut c = objective.to_vec();
    c.resize(total, 0.0);
    let mut matrix = Vec::with_capacity(a_ineq.len() + a_eq.len());
    for (i, row) in a_ineq.iter().enumerate() {
        let mut r = row.clone();
        r.resize(total, 0.0);
        r[n + i] = 1.0;
        matrix.push(r);
    }
    for row in a_eq {
        let mut r = row.clone();
        r.resize(total, 0.0);
        matrix.push(r);
    }
    let rhs = b_ineq.iter().chain(b_eq).copied().collect();
    let lp = StandardFormLP::new(c, matrix, rhs)?;
    Ok((
        lp,
        VariableMap {
            original: n,
            slack_of_row: (n..total).collect(),
        },
    ))
}

struct Tableau {
    /// `m` constraint rows of width `n + 1`; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    iterations: usize,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            *v /= p;
        }
        self.rows[pr][pc] = 1.0;
        let pivot_row = self.rows[pr].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f == 0.0 {
                continue;
            }
            for j in 0..=w {
                row[j] -= f * pivot_row[j];
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.iterations += 1;
    }

    /// Reduced costs `c_j − c_B B⁻¹ A_j` for the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * self.rows[r][j];
            }
        }
        d
    }

    /// Runs Bland-rule pivots maximizing `cost` over the allowed columns.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<PivotOutcome, LpError> {
        let scale = cost.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-11 * scale;
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(LpError::Numeric("iteration limit exceeded".into()));
            }
            let d = self.reduced_costs(cost);
            let entering = (0..self.width).find(|&j| allowed[j] && d[j] > tol);
            let Some(pc) = entering else {
                return Ok(PivotOutcome::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][pc];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio && !tie
                            || tie && self.basis[r] < self.basis[br]
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                None => return Ok(PivotOutcome::Unbounded),
                Some((pr, _)) => self.pivot(pr, pc),
            }
        }
    }
}

/// Solves `lp` with the two-phase simplex method.
pub fn solve(lp: &StandardFormLP) -> Result<LPResult, LpError> {
    lp.validate()?;
    let m = lp.rows();
    let n = lp.cols();
    let width = n + m;

    let mut rows = Vec::with_capacity(m);
    for (i, (row, &b)) in lp.matrix.iter().zip(&lp.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width + 1];
        for (j, &a) in row.iter().enumerate() {
            r[j] = sign * a;
        }
        r[n + i] = 1.0;
        r[width] = sign * b;
        rows.push(r);
    }
    let mut tab = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
        iterations: 0,
    };

    // Phase one: drive the artificial columns to zero.
    let mut phase1 = vec![0.0; width];
    for c in phase1.iter_mut().skip(n) {
        *c = -1.0;
    }
    let all = vec![true; width];
    tab.optimize(&phase1, &all)?;
    let infeasibility: f64 = (0..m)
        .filter(|&r| tab.basis[r] >= n)
        .map(|r| tab.rhs(r).abs())
        .sum();
    if infeasibility > lp.feasibility_limit() {
        return Ok(LPResult {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            solution: vec![0.0; n],
            iterations: tab.iterations,
        });
    }

    // Pivot remaining zero-level artificials out of the basis, dropping
    // redundant rows.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            let col = (0..n).find(|&j| tab.rows[r][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = lp.objective.clone();
    cost.resize(width, 0.0);
    let mut allowed = vec![true; width];
    for a in allowed.iter_mut().skip(n) {
        *a = false;
    }
    let outcome = tab.optimize(&cost, &allowed)?;
    if let PivotOutcome::Unbounded = outcome {
        return Ok(LPResult {
            status: LpStatus::Unbounded,
            value: f64::INFINITY,
            solution: vec![0.0; n],
            iterations: tab.iterations,
        });
    }

    let mut solution = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            solution[b] = tab.rhs(r);
        }
    }
    let residual = lp.residual(&solution);
    if residual > lp.feasibility_limit() {
        return Err(LpError::Numeric(format!(
            "primal residual {residual:e} exceeds tolerance"
        )));
    }
    if let Some(v) = solution.iter().find(|v| **v < -lp.feasibility_limit()) {
        return Err(LpError::Numeric(format!("negative basic variable {v:e}")));
    }
    Ok(LPResult {
        status: LpStatus::Optimal,
        value: lp.objective_value(&solution),
        solution,
        iterations: tab.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> StandardFormLP {
        StandardFormLP::new(c, a, b).unwrap()
    }

    #[test]
    fn single_equality() {
        let res = solve(&lp(vec![1.0], vec![vec![1.0]], vec![1.0])).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_constraint_with_slack() {
        let res = solve(&lp(vec![1.0, 1.0, 0.0], vec![vec![1.0, 1.0, 1.0]], vec![1.0])).unwrap();
        assert!((res.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_vertex() {
        // Basic feasible vertices: (0,0)=0, (4,0)=12, (0,2)=4, (3,1)=11.
        let res = solve(&lp(
            vec![3.0, 2.0, 0.0, 0.0],
            vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            vec![4.0, 6.0],
        ))
        .unwrap();
        assert!((res.value - 12.0).abs() < 1e-12);
        assert!((res.solution[0] - 4.0).abs() < 1e-12);
        assert!(res.solution[1].abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inf = solve(&lp(vec![1.0, 0.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]))
            .unwrap();
        assert_eq!(inf.status, LpStatus::Infeasible);
        let unb = solve(&lp(vec![1.0, 0.0], vec![vec![1.0, -1.0]], vec![1.0])).unwrap();
        assert_eq!(unb.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let res = solve(&lp(
            vec![1.0, 2.0, 0.0],
            vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]],
            vec![3.0, 6.0],
        ))
        .unwrap();
        assert!((res.value - 6.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -x - s = -2  ->  x + s = 2
        let res = solve(&lp(vec![1.0, 0.0], vec![vec![-1.0, -1.0]], vec![-2.0])).unwrap();
        assert!((res.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inequality_builder_shapes() {
        let (s, map) = from_inequalities(&[1.0, 1.0], &[vec![1.0, 1.0]], &[1.0], &[], &[]).unwrap();
        assert_eq!((s.cols(), s.rows()), (3, 1));
        assert_eq!(map.slack_of_row, vec![2]);
        let (s, map) = from_inequalities(&[1.0, 2.0], &[], &[], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert_eq!(s.objective, vec![1.0, 2.0]);
        assert_eq!(s.matrix, vec![vec![1.0, 1.0]]);
        assert!(map.slack_of_row.is_empty());
        assert!(from_inequalities(&[1.0], &[vec![1.0, 1.0]], &[1.0], &[], &[]).is_err());
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example (Beale) in standard form.
        let c = vec![0.75, -150.0, 0.02, -6.0, 0.0, 0.0, 0.0];
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let res = solve(&lp(c, a, vec![0.0, 0.0, 1.0])).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let p = lp(
            vec![3.0, 2.0, 0.0, 0.0],
            vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            vec![4.0, 6.0],
        );
        assert_eq!(solve(&p).unwrap(), solve(&p).unwrap());
    }
}
