use std::time::Instant;

use super::{finish_k_adaptable, require_deterministic, Outcome, Program, SolveOptions, SolveReport};
use crate::error::SolveError;
use crate::lp::{ConstraintSense, LpSolution, LpStatus};
use crate::model::{Instance, Method};

pub(crate) fn status_outcome(sol: &LpSolution) -> Option<Outcome> {
    match sol.status {
        LpStatus::Optimal => None,
        LpStatus::Infeasible => Some(Outcome::Infeasible),
        LpStatus::Unbounded => Some(Outcome::Unbounded),
    }
}

pub fn solve_adapt1(inst: &Instance) -> Result<SolveReport, SolveError> {
    solve_adapt1_with(inst, &SolveOptions::default())
}

/// One second-stage vector feasible at every vertex of Ω.
pub fn solve_adapt1_with(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    require_deterministic(inst)?;
    let mut prog = Program::new(inst, 1);
    for v in inst.omega.vertices() {
        prog.constrain_at(0, v);
    }
    let lp = prog.solve(&opts.tolerances)?;
    let mut report = SolveReport::new(Outcome::Infeasible);
    report.candidates_explored = 1;
    report.lp_solves = 1;
    report.outcome = match status_outcome(&lp) {
        Some(o) => o,
        None => {
            let sol = prog.extract(&lp, Method::Adapt1)?;
            Outcome::Optimal(finish_k_adaptable(inst, sol, &mut report, opts)?)
        }
    };
    report.wall_time = start.elapsed();
    Ok(report)
}

pub fn solve_comp_adapt(inst: &Instance) -> Result<SolveReport, SolveError> {
    solve_comp_adapt_with(inst, &SolveOptions::default())
}

/// One second-stage copy per vertex of Ω; `ys[v]` is the decision at vertex `v`.
pub fn solve_comp_adapt_with(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    require_deterministic(inst)?;
    let verts = inst.omega.vertices();
    let mut prog = Program::new(inst, verts.len());
    for (i, v) in verts.iter().enumerate() {
        prog.constrain_at(i, v);
    }
    let lp = prog.solve(&opts.tolerances)?;
    let mut report = SolveReport::new(Outcome::Infeasible);
    report.candidates_explored = 1;
    report.lp_solves = 1;
    report.outcome = match status_outcome(&lp) {
        Some(o) => o,
        None => Outcome::Optimal(prog.extract(&lp, Method::CompAdapt)?),
    };
    report.wall_time = start.elapsed();
    Ok(report)
}

pub fn solve_adapt_1d(inst: &Instance, k: usize) -> Result<SolveReport, SolveError> {
    solve_adapt_1d_with(inst, k, &SolveOptions::default())
}

/// Breakpoints `0 ≤ s_1 ≤ … ≤ s_{k−1} ≤ 1` along the segment Ω; piece `i` is
/// constrained at both of its end parameters.
pub fn solve_adapt_1d_with(inst: &Instance, k: usize, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    require_deterministic(inst)?;
    if k == 0 {
        return Err(SolveError::UnsupportedK(0));
    }
    let omega = &inst.omega;
    if omega.affine_dimension() != 1 {
        return Err(SolveError::NotOneDimensional(omega.affine_dimension()));
    }
    let edge = omega.edges()[0];
    let tail = omega.vertex(edge.tail_index).to_vec();
    let head = omega.vertex(edge.head_index).to_vec();
    let dir: Vec<f64> = head.iter().zip(&tail).map(|(h, t)| h - t).collect();

    let mut prog = Program::new(inst, k);
    let s: Vec<usize> = (1..k).map(|_| prog.lp.add_var(0.0, 0.0, 1.0)).collect();
    for w in s.windows(2) {
        prog.lp.add_row(vec![(w[0], 1.0), (w[1], -1.0)], ConstraintSense::Le, 0.0);
    }
    for i in 0..k {
        for end in [i, i + 1] {
            if end == 0 {
                prog.constrain_at(i, &tail);
            } else if end == k {
                prog.constrain_at(i, &head);
            } else {
                prog.constrain_at_param(i, &tail, &[(s[end - 1], dir.clone())], None);
            }
        }
    }
    let lp = prog.solve(&opts.tolerances)?;
    let mut report = SolveReport::new(Outcome::Infeasible);
    report.candidates_explored = 1;
    report.lp_solves = 1;
    report.outcome = match status_outcome(&lp) {
        Some(o) => o,
        None => {
            report.breakpoints = Some(s.iter().map(|&j| lp.primal_values[j]).collect());
            let sol = prog.extract(&lp, Method::OneDimensional)?;
            Outcome::Optimal(finish_k_adaptable(inst, sol, &mut report, opts)?)
        }
    };
    report.wall_time = start.elapsed();
    Ok(report)
}
