//! The optimization programs: k = 1, complete adaptability, the one-dimensional
//! breakpoint program, skeleton-cover enumeration for k = 2 and k = 3, the
//! big-M MILP for k = 2 and the scenario lower bound.

use std::time::Duration;

use serde::Serialize;

use crate::covers::{CoverEnumeration, SkeletonCover};
use crate::error::{LpError, ModelError, SolveError};
use crate::lp::{
    solve_lp_with, solve_milp_with, ConstraintSense, IntegralitySpec, LpBuilder, LpSolution, MilpOptions,
    ObjectiveSense,
};
use crate::model::{HalfSpace, Instance, Method, Piece, Solution};
use crate::tolerances::Tolerances;
use crate::verify::{verify_cover, CoverCertificate};

mod basic;
mod enumeration;
mod milp;

pub use basic::{
    solve_adapt1, solve_adapt1_with, solve_adapt_1d, solve_adapt_1d_with, solve_comp_adapt, solve_comp_adapt_with,
};
pub use enumeration::{solve_adapt2_enum, solve_adapt2_enum_with, solve_adapt3_enum, solve_adapt3_enum_with};
pub use milp::{solve_adapt2_milp, solve_adapt2_milp_with, solve_scenario_lb, solve_scenario_lb_with};

/// Knobs shared by every solver.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tolerances: Tolerances,
    /// Worker threads for the enumeration; `None` uses the global pool.
    pub threads: Option<usize>,
    pub enumeration: CoverEnumeration,
    /// Big-M override for the MILP formulations.
    pub big_m: Option<f64>,
    /// Run the cover oracle on every feasible k-adaptable output.
    pub certify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerances: Tolerances::default(),
            threads: None,
            enumeration: CoverEnumeration::default(),
            big_m: None,
            certify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub candidates_explored: u64,
    pub lp_solves: u64,
    pub wall_time: Duration,
    pub winning_candidate: Option<SkeletonCover>,
    /// Breakpoints of the one-dimensional program, as parameters in [0, 1] along Ω.
    pub breakpoints: Option<Vec<f64>>,
    pub certificate: Option<CoverCertificate>,
    /// Big-M value the final MILP was solved with.
    pub big_m: Option<f64>,
}

impl SolveReport {
    pub(crate) fn new(outcome: Outcome) -> Self {
        SolveReport {
            outcome,
            candidates_explored: 0,
            lp_solves: 0,
            wall_time: Duration::ZERO,
            winning_candidate: None,
            breakpoints: None,
            certificate: None,
            big_m: None,
        }
    }

    pub fn solution(&self) -> Option<&Solution> {
        match &self.outcome {
            Outcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    /// Objective value; `+∞` when infeasible and `−∞` when unbounded.
    pub fn value(&self) -> f64 {
        match &self.outcome {
            Outcome::Optimal(s) => s.objective,
            Outcome::Infeasible => f64::INFINITY,
            Outcome::Unbounded => f64::NEG_INFINITY,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.outcome == Outcome::Infeasible
    }
}

/// `{ω : A(ω)x + B(ω)y_i ≤ b(ω)}` per piece, one half-space per row.
pub fn recover_cover(inst: &Instance, sol: &Solution) -> Result<Vec<Piece>, ModelError> {
    if sol.x.len() != inst.dim_x() || sol.ys.is_empty() || sol.ys.iter().any(|y| y.len() != inst.dim_y()) {
        return Err(ModelError::DimensionMismatch(format!(
            "solution has x∈R^{} and {} second-stage vectors of sizes {:?}; instance expects x∈R^{}, y∈R^{}",
            sol.x.len(),
            sol.ys.len(),
            sol.ys.iter().map(Vec::len).collect::<Vec<_>>(),
            inst.dim_x(),
            inst.dim_y()
        )));
    }
    let m = inst.num_rows();
    let n = inst.omega_dim();
    let pieces = sol
        .ys
        .iter()
        .enumerate()
        .map(|(index, y)| {
            let term = |l: Option<usize>| -> Vec<f64> {
                fn pick(map: &crate::model::AffineMap, l: Option<usize>) -> &[f64] {
                    match l {
                        None => &map.constant_term,
                        Some(l) => &map.coefficient_terms[l],
                    }
                }
                let (a, b, r) = (pick(&inst.a, l), pick(&inst.b_mat, l), pick(&inst.rhs, l));
                (0..m)
                    .map(|row| {
                        let ax: f64 = (0..inst.dim_x()).map(|j| a[row * inst.dim_x() + j] * sol.x[j]).sum();
                        let by: f64 = (0..inst.dim_y()).map(|j| b[row * inst.dim_y() + j] * y[j]).sum();
                        ax + by - r[row]
                    })
                    .collect()
            };
            let constant = term(None);
            let linear: Vec<Vec<f64>> = (0..n).map(|l| term(Some(l))).collect();
            let rows = (0..m)
                .map(|r| HalfSpace { normal: (0..n).map(|l| linear[l][r]).collect(), offset: -constant[r] })
                .collect();
            Piece { index, rows }
        })
        .collect();
    Ok(pieces)
}

pub(crate) fn require_deterministic(inst: &Instance) -> Result<(), SolveError> {
    inst.validate()?;
    if inst.is_deterministic_ab() {
        Ok(())
    } else {
        Err(SolveError::RequiresDeterministicAB)
    }
}

/// `min c·x + z` with `z ≥ d·y_i` for k copies of the second stage.
pub(crate) struct Program<'a> {
    inst: &'a Instance,
    pub lp: LpBuilder,
    pub x: Vec<usize>,
    pub ys: Vec<Vec<usize>>,
    integers: Vec<usize>,
}

impl<'a> Program<'a> {
    pub fn new(inst: &'a Instance, k: usize) -> Self {
        let mut lp = LpBuilder::new(ObjectiveSense::Minimize);
        let x: Vec<usize> =
            inst.x_bounds.iter().zip(&inst.c).map(|(bd, &c)| lp.add_var(c, bd.lower, bd.upper)).collect();
        let ys: Vec<Vec<usize>> = (0..k)
            .map(|_| inst.y_bounds.iter().map(|bd| lp.add_var(0.0, bd.lower, bd.upper)).collect())
            .collect();
        let z = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
        for y in &ys {
            let mut terms: Vec<(usize, f64)> = y.iter().zip(&inst.d).map(|(&j, &d)| (j, d)).collect();
            terms.push((z, -1.0));
            lp.add_row(terms, ConstraintSense::Le, 0.0);
        }
        let mut integers: Vec<usize> = inst.x_integer.iter().map(|&j| x[j]).collect();
        for y in &ys {
            integers.extend(inst.y_integer.iter().map(|&j| y[j]));
        }
        Program { inst, lp, x, ys, integers }
    }

    pub fn mark_integer(&mut self, var: usize) {
        self.integers.push(var);
    }

    /// Row `r` of `A(ω)x + B(ω)y_piece` as sparse terms.
    fn lhs(&self, piece: usize, r: usize, omega: &[f64]) -> Vec<(usize, f64)> {
        let inst = self.inst;
        let mut terms = Vec::with_capacity(self.x.len() + inst.dim_y() + 4);
        for (j, &v) in self.x.iter().enumerate() {
            let a = inst.a.entry(r, j, omega);
            if a != 0.0 {
                terms.push((v, a));
            }
        }
        for (j, &v) in self.ys[piece].iter().enumerate() {
            let b = inst.b_mat.entry(r, j, omega);
            if b != 0.0 {
                terms.push((v, b));
            }
        }
        terms
    }

    /// `A(ω)x + B(ω)y_piece ≤ b(ω)` at a fixed point.
    pub fn constrain_at(&mut self, piece: usize, omega: &[f64]) {
        let b = self.inst.rhs_at(omega);
        for (r, &br) in b.iter().enumerate() {
            let terms = self.lhs(piece, r, omega);
            self.lp.add_row(terms, ConstraintSense::Le, br);
        }
    }

    /// Same rows, switched off unless `indicator` = 1: `… + M_r·indicator ≤ b_r(ω) + M_r`.
    pub fn constrain_at_if(&mut self, piece: usize, omega: &[f64], indicator: usize, big_m: &[f64]) {
        let b = self.inst.rhs_at(omega);
        for (r, &br) in b.iter().enumerate() {
            let mut terms = self.lhs(piece, r, omega);
            terms.push((indicator, big_m[r]));
            self.lp.add_row(terms, ConstraintSense::Le, br + big_m[r]);
        }
    }

    /// Rows at `ω = base + Σ_j v_j dir_j` where the `v_j` are LP variables.
    /// A and B must be deterministic; `b(ω)` is then affine in the `v_j`.
    /// With `switch = Some((var, M))` the rows relax by `M` unless `var` = 1.
    pub fn constrain_at_param(&mut self, piece: usize, base: &[f64], dirs: &[(usize, Vec<f64>)], switch: Option<(usize, &[f64])>) {
        let b0 = self.inst.rhs_at(base);
        let slopes: Vec<Vec<f64>> = dirs.iter().map(|(_, d)| self.rhs_slope(d)).collect();
        for (r, &br) in b0.iter().enumerate() {
            let mut terms = self.lhs(piece, r, base);
            for ((v, _), s) in dirs.iter().zip(&slopes) {
                if s[r] != 0.0 {
                    terms.push((*v, -s[r]));
                }
            }
            let mut rhs = br;
            if let Some((ind, big_m)) = switch {
                terms.push((ind, big_m[r]));
                rhs += big_m[r];
            }
            self.lp.add_row(terms, ConstraintSense::Le, rhs);
        }
    }

    /// Linear part of b applied to a direction.
    fn rhs_slope(&self, dir: &[f64]) -> Vec<f64> {
        let rhs = &self.inst.rhs;
        (0..rhs.rows).map(|r| rhs.coefficient_terms.iter().zip(dir).map(|(t, d)| t[r] * d).sum()).collect()
    }

    pub fn solve(&self, tol: &Tolerances) -> Result<LpSolution, LpError> {
        let lp = self.lp.build();
        if self.integers.is_empty() {
            solve_lp_with(&lp, tol)
        } else {
            let opts = MilpOptions { tolerances: tol.clone(), ..MilpOptions::default() };
            solve_milp_with(&lp, &IntegralitySpec::new(self.integers.iter().copied()), &opts)
        }
    }

    pub fn extract(&self, sol: &LpSolution, method: Method) -> Result<Solution, ModelError> {
        let x: Vec<f64> = self.x.iter().map(|&j| sol.primal_values[j]).collect();
        let ys: Vec<Vec<f64>> =
            self.ys.iter().map(|y| y.iter().map(|&j| sol.primal_values[j]).collect()).collect();
        let objective = self.inst.objective_of(&x, &ys)?;
        Ok(Solution { x, ys, objective, method, pieces: None })
    }
}

/// Attaches recovered pieces and, when requested, the oracle's certificate.
pub(crate) fn finish_k_adaptable(
    inst: &Instance,
    mut sol: Solution,
    report: &mut SolveReport,
    opts: &SolveOptions,
) -> Result<Solution, SolveError> {
    sol.pieces = Some(recover_cover(inst, &sol)?);
    if opts.certify {
        let cert = verify_cover(inst, &sol, opts.tolerances.verify)?;
        if !cert.is_covered() {
            log::warn!(
                "{}: {} output failed the cover oracle (slack {:.3e})",
                inst.name,
                sol.method.as_str(),
                cert.max_uncovered_slack
            );
        }
        report.certificate = Some(cert);
    }
    Ok(sol)
}
