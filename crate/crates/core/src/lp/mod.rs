//! Dense linear programming kernel.
//!
//! Every program built elsewhere in the crate (vertex LPs, skeleton-cover LPs,
//! big-M MILPs, membership and witness LPs) is expressed as a
//! [`LinearProgram`] and handed to [`solve_lp`] or [`solve_milp`].

mod milp;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::LpError;
use crate::tolerances::Tolerances;

pub use milp::{solve_milp, solve_milp_with, IntegralitySpec, MilpOptions};

/// Row relation of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

/// A dense linear program
///
/// `optimize objective · x  s.t.  constraint_matrix[r] · x (sense_r) rhs_r,  lo ≤ x ≤ hi`.
///
/// Bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: ObjectiveSense,
    pub objective_coefficients: Vec<f64>,
    pub constraint_matrix: Vec<Vec<f64>>,
    pub constraint_senses: Vec<ConstraintSense>,
    pub right_hand_sides: Vec<f64>,
    pub variable_lower_bounds: Vec<f64>,
    pub variable_upper_bounds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve.
///
/// `dual_values` follow the convention `∂ objective / ∂ rhs_r` for the problem as
/// stated (so for a minimization, `≤` rows carry non-positive and `≥` rows
/// non-negative multipliers). They are empty unless the status is optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal_values: Vec<f64>,
    pub objective_value: f64,
    pub dual_values: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub(crate) fn without_point(status: LpStatus) -> Self {
        let objective_value = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Optimal => f64::NAN,
        };
        LpSolution {
            status,
            primal_values: Vec::new(),
            objective_value,
            dual_values: Vec::new(),
            iterations: 0,
        }
    }
}

impl LinearProgram {
    /// An empty program over `num_vars` free variables with zero objective.
    pub fn new(num_vars: usize, sense: ObjectiveSense) -> Self {
        LinearProgram {
            sense,
            objective_coefficients: vec![0.0; num_vars],
            constraint_matrix: Vec::new(),
            constraint_senses: Vec::new(),
            right_hand_sides: Vec::new(),
            variable_lower_bounds: vec![f64::NEG_INFINITY; num_vars],
            variable_upper_bounds: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective_coefficients.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraint_matrix.len()
    }

    pub fn add_row(&mut self, coefficients: Vec<f64>, sense: ConstraintSense, rhs: f64) {
        self.constraint_matrix.push(coefficients);
        self.constraint_senses.push(sense);
        self.right_hand_sides.push(rhs);
    }

    /// Checks the shape and finiteness invariants.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let m = self.num_rows();
        if self.constraint_senses.len() != m || self.right_hand_sides.len() != m {
            return Err(LpError::MalformedProgram(format!(
                "{} rows but {} senses and {} right-hand sides",
                m,
                self.constraint_senses.len(),
                self.right_hand_sides.len()
            )));
        }
        if self.variable_lower_bounds.len() != n || self.variable_upper_bounds.len() != n {
            return Err(LpError::MalformedProgram(format!(
                "{} objective coefficients but {} lower and {} upper bounds",
                n,
                self.variable_lower_bounds.len(),
                self.variable_upper_bounds.len()
            )));
        }
        for (r, row) in self.constraint_matrix.iter().enumerate() {
            if row.len() != n {
                return Err(LpError::MalformedProgram(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LpError::MalformedProgram(format!("row {r} has a non-finite entry")));
            }
        }
        if self.objective_coefficients.iter().any(|v| !v.is_finite())
            || self.right_hand_sides.iter().any(|v| !v.is_finite())
        {
            return Err(LpError::MalformedProgram("non-finite objective or right-hand side".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.variable_lower_bounds[j], self.variable_upper_bounds[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::MalformedProgram(format!("variable {j} has invalid bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Largest violation of a row or bound at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, row) in self.constraint_matrix.iter().enumerate() {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let rhs = self.right_hand_sides[r];
            let v = match self.constraint_senses[r] {
                ConstraintSense::Le => lhs - rhs,
                ConstraintSense::Ge => rhs - lhs,
                ConstraintSense::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.variable_lower_bounds[j] - v);
            worst = worst.max(v - self.variable_upper_bounds[j]);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective_coefficients.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Incremental construction with sparse rows; variables may be added at any time.
#[derive(Debug, Clone)]
pub struct LpBuilder {
    sense: ObjectiveSense,
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, ConstraintSense, f64)>,
}

impl LpBuilder {
    pub fn new(sense: ObjectiveSense) -> Self {
        LpBuilder { sense, costs: Vec::new(), lower: Vec::new(), upper: Vec::new(), rows: Vec::new() }
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.costs.len() - 1
    }

    /// Adds `count` variables sharing cost and bounds; returns their indices.
    pub fn add_vars(&mut self, count: usize, cost: f64, lower: f64, upper: f64) -> Vec<usize> {
        (0..count).map(|_| self.add_var(cost, lower, upper)).collect()
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.costs[var] = cost;
    }

    /// Adds a row; repeated indices are summed.
    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: ConstraintSense, rhs: f64) {
        self.rows.push((terms, sense, rhs));
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn build(&self) -> LinearProgram {
        let n = self.costs.len();
        let mut lp = LinearProgram::new(n, self.sense);
        lp.objective_coefficients.clone_from(&self.costs);
        lp.variable_lower_bounds.clone_from(&self.lower);
        lp.variable_upper_bounds.clone_from(&self.upper);
        for (terms, sense, rhs) in &self.rows {
            let mut dense = vec![0.0; n];
            for &(j, v) in terms {
                dense[j] += v;
            }
            lp.add_row(dense, *sense, *rhs);
        }
        lp
    }
}

/// Solves with the default tolerance bundle.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &Tolerances::default())
}

pub fn solve_lp_with(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution, LpError> {
    lp.validate()?;
    simplex::solve(lp, tol)
}
