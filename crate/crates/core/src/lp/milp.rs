//! Branch-and-bound over bounded integer variables.
//!
//! Best-bound node selection, most-fractional branching, deeper nodes first on
//! equal bounds. Integral leaves are re-solved with the integer variables fixed
//! at their rounded values so that reported points are exactly integral.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{solve_lp_with, LinearProgram, LpSolution, LpStatus, ObjectiveSense};
use crate::error::LpError;
use crate::tolerances::Tolerances;

/// Indices of the variables that must take integer values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralitySpec {
    pub integer_variable_indices: Vec<usize>,
}

impl IntegralitySpec {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IntegralitySpec { integer_variable_indices: v }
    }

    pub fn is_empty(&self) -> bool {
        self.integer_variable_indices.is_empty()
    }

    pub fn validate(&self, lp: &LinearProgram) -> Result<(), LpError> {
        for &j in &self.integer_variable_indices {
            if j >= lp.num_vars() {
                return Err(LpError::MalformedProgram(format!(
                    "integer index {j} out of range ({} variables)",
                    lp.num_vars()
                )));
            }
            let (lo, hi) = (lp.variable_lower_bounds[j], lp.variable_upper_bounds[j]);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(LpError::UnboundedInteger(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub node_limit: usize,
    pub tolerances: Tolerances,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions { node_limit: 200_000, tolerances: Tolerances::default() }
    }
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    solution: LpSolution,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: "greater" = smaller bound, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

fn improves(key: f64, incumbent: f64) -> bool {
    !incumbent.is_finite() || key < incumbent - 1e-9 * (1.0 + incumbent.abs())
}

pub fn solve_milp(lp: &LinearProgram, spec: &IntegralitySpec) -> Result<LpSolution, LpError> {
    solve_milp_with(lp, spec, &MilpOptions::default())
}

pub fn solve_milp_with(
    lp: &LinearProgram,
    spec: &IntegralitySpec,
    opts: &MilpOptions,
) -> Result<LpSolution, LpError> {
    let tol = &opts.tolerances;
    if spec.is_empty() {
        return solve_lp_with(lp, tol);
    }
    lp.validate()?;
    spec.validate(lp)?;
    let sign = match lp.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let ints = &spec.integer_variable_indices;

    let mut work = lp.clone();
    // integer bounds tightened to integers
    for &j in ints {
        work.variable_lower_bounds[j] = (work.variable_lower_bounds[j] - tol.integrality).ceil();
        work.variable_upper_bounds[j] = (work.variable_upper_bounds[j] + tol.integrality).floor();
    }

    let mut total_iterations = 0usize;
    let root = solve_lp_with(&work, tol)?;
    total_iterations += root.iterations;
    match root.status {
        LpStatus::Optimal => {}
        status => {
            let mut s = LpSolution::without_point(status);
            s.iterations = total_iterations;
            return Ok(s);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        bound: sign * root.objective_value,
        depth: 0,
        seq,
        lower: work.variable_lower_bounds.clone(),
        upper: work.variable_upper_bounds.clone(),
        solution: root,
    });
    let mut incumbent: Option<LpSolution> = None;
    let mut incumbent_key = f64::INFINITY;
    let mut nodes = 1usize;

    while let Some(node) = heap.pop() {
        if !improves(node.bound, incumbent_key) {
            break;
        }
        // most fractional integer variable
        let mut branch: Option<(usize, f64)> = None;
        let mut best_frac = tol.integrality;
        for &j in ints {
            let v = node.solution.primal_values[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best_frac {
                best_frac = frac;
                branch = Some((j, v));
            }
        }
        match branch {
            None => {
                // integral: polish with integers fixed
                let mut fixed = work.clone();
                fixed.variable_lower_bounds.clone_from(&node.lower);
                fixed.variable_upper_bounds.clone_from(&node.upper);
                for &j in ints {
                    let r = node.solution.primal_values[j].round();
                    fixed.variable_lower_bounds[j] = r;
                    fixed.variable_upper_bounds[j] = r;
                }
                let polished = solve_lp_with(&fixed, tol)?;
                total_iterations += polished.iterations;
                let candidate = if polished.is_optimal() { polished } else { node.solution };
                let key = sign * candidate.objective_value;
                if improves(key, incumbent_key) {
                    incumbent_key = key;
                    incumbent = Some(candidate);
                }
            }
            Some((j, v)) => {
                for up in [false, true] {
                    let mut lower = node.lower.clone();
                    let mut upper = node.upper.clone();
                    if up {
                        lower[j] = v.ceil();
                    } else {
                        upper[j] = v.floor();
                    }
                    if nodes >= opts.node_limit {
                        return Err(LpError::NodeLimit(opts.node_limit));
                    }
                    nodes += 1;
                    let mut child_lp = work.clone();
                    child_lp.variable_lower_bounds.clone_from(&lower);
                    child_lp.variable_upper_bounds.clone_from(&upper);
                    let sol = solve_lp_with(&child_lp, tol)?;
                    total_iterations += sol.iterations;
                    match sol.status {
                        LpStatus::Infeasible => {}
                        LpStatus::Unbounded => {
                            let mut s = LpSolution::without_point(LpStatus::Unbounded);
                            s.iterations = total_iterations;
                            return Ok(s);
                        }
                        LpStatus::Optimal => {
                            let bound = sign * sol.objective_value;
                            if improves(bound, incumbent_key) {
                                seq += 1;
                                heap.push(Node { bound, depth: node.depth + 1, seq, lower, upper, solution: sol });
                            }
                        }
                    }
                }
            }
        }
    }

    match incumbent {
        Some(mut s) => {
            s.iterations = total_iterations;
            Ok(s)
        }
        None => {
            let mut s = LpSolution::without_point(LpStatus::Infeasible);
            s.iterations = total_iterations;
            Ok(s)
        }
    }
}
