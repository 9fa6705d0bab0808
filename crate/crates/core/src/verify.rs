//! Cover certification for candidate `(x, y_1, …, y_k)`.
//!
//! For fixed `(x, y_i)` every row residual `g_{i,r}(ω) = (A(ω)x + B(ω)y_i − b(ω))_r`
//! is affine in ω. A point is uncovered iff each piece has some row with
//! positive residual there, so it suffices to try every choice of one row per
//! piece and maximize the smallest chosen residual over Ω.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::lp::{solve_lp_with, ConstraintSense, LpBuilder, LpStatus, ObjectiveSense};
use crate::model::{dot, HalfSpace, Instance, Solution};
use crate::solvers::recover_cover;
use crate::tolerances::Tolerances;

pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Covered,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// Per piece, the rows whose residual at `point` exceeds the tolerance.
    pub violated_rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCertificate {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Largest `min_i g_{i,r_i}` found over the examined row choices. When
    /// pruning removes every choice this is an upper bound no larger than the
    /// tolerance.
    pub max_uncovered_slack: f64,
    pub lp_solves: usize,
}

impl CoverCertificate {
    pub fn is_covered(&self) -> bool {
        self.verdict == Verdict::Covered
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub budget: u128,
    pub tolerances: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { budget: DEFAULT_BUDGET, tolerances: Tolerances::default() }
    }
}

pub fn verify_cover(inst: &Instance, sol: &Solution, tol: f64) -> Result<CoverCertificate, VerifyError> {
    verify_cover_with(inst, sol, tol, &VerifyOptions::default())
}

/// Residual `g(ω) = −slack` of a recovered row.
fn residual(h: &HalfSpace, omega: &[f64]) -> f64 {
    dot(&h.normal, omega) - h.offset
}

pub fn verify_cover_with(inst: &Instance, sol: &Solution, tol: f64, opts: &VerifyOptions) -> Result<CoverCertificate, VerifyError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(VerifyError::BadTolerance(tol));
    }
    let pieces = recover_cover(inst, sol)?;
    let verts = inst.omega.vertices();

    // rows that cannot exceed tol anywhere in Ω are dropped
    let mut active: Vec<Vec<&HalfSpace>> = Vec::with_capacity(pieces.len());
    let mut piece_peak = Vec::with_capacity(pieces.len());
    for p in &pieces {
        let mut rows = Vec::new();
        let mut peak = f64::NEG_INFINITY;
        for h in &p.rows {
            let m = verts.iter().map(|v| residual(h, v)).fold(f64::NEG_INFINITY, f64::max);
            peak = peak.max(m);
            if m > tol {
                rows.push(h);
            }
        }
        active.push(rows);
        piece_peak.push(peak);
    }
    if active.iter().any(Vec::is_empty) {
        let bound = piece_peak.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok(CoverCertificate { verdict: Verdict::Covered, witness: None, max_uncovered_slack: bound, lp_solves: 0 });
    }
    let combinations: u128 = active.iter().map(|r| r.len() as u128).product();
    if combinations > opts.budget {
        return Err(VerifyError::CombinatorialBudgetExceeded { combinations, budget: opts.budget });
    }

    let radix: Vec<usize> = active.iter().map(Vec::len).collect();
    let results: Vec<Result<(f64, Vec<f64>), VerifyError>> = (0..combinations as usize)
        .into_par_iter()
        .map(|mut code| {
            let chosen: Vec<&HalfSpace> = radix
                .iter()
                .zip(&active)
                .map(|(&r, rows)| {
                    let h = rows[code % r];
                    code /= r;
                    h
                })
                .collect();
            max_min_residual(verts, &chosen, &opts.tolerances)
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let (t, w) = r?;
        if best.as_ref().map_or(true, |(bt, _)| t > *bt) {
            best = Some((t, w));
        }
    }
    let (t, point) = best.expect("at least one combination");
    let lp_solves = combinations as usize;
    if t > tol {
        let violated_rows = pieces
            .iter()
            .map(|p| (0..p.rows.len()).filter(|&r| residual(&p.rows[r], &point) > tol).collect())
            .collect();
        Ok(CoverCertificate {
            verdict: Verdict::NotCovered,
            witness: Some(Witness { point, violated_rows }),
            max_uncovered_slack: t,
            lp_solves,
        })
    } else {
        Ok(CoverCertificate { verdict: Verdict::Covered, witness: None, max_uncovered_slack: t, lp_solves })
    }
}

/// `max t  s.t.  ω ∈ conv(verts), residual_i(ω) ≥ t` for each chosen row.
fn max_min_residual(verts: &[Vec<f64>], rows: &[&HalfSpace], tol: &Tolerances) -> Result<(f64, Vec<f64>), VerifyError> {
    let mut lp = LpBuilder::new(ObjectiveSense::Maximize);
    let lam = lp.add_vars(verts.len(), 0.0, 0.0, f64::INFINITY);
    let t = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
    lp.add_row(lam.iter().map(|&j| (j, 1.0)).collect(), ConstraintSense::Eq, 1.0);
    for h in rows {
        // Σ λ_v (normal·v) − offset ≥ t
        let mut terms: Vec<(usize, f64)> = lam.iter().zip(verts).map(|(&j, v)| (j, dot(&h.normal, v))).collect();
        terms.push((t, -1.0));
        lp.add_row(terms, ConstraintSense::Ge, h.offset);
    }
    let sol = solve_lp_with(&lp.build(), tol)?;
    if sol.status != LpStatus::Optimal {
        // conv(verts) is nonempty and t is bounded by the rows, so this is numerical trouble
        return Err(VerifyError::Lp(crate::error::LpError::MalformedProgram(format!(
            "residual maximization ended {:?}",
            sol.status
        ))));
    }
    let dim = verts[0].len();
    let mut point = vec![0.0; dim];
    for (&j, v) in lam.iter().zip(verts) {
        let w = sol.primal_values[j];
        for d in 0..dim {
            point[d] += w * v[d];
        }
    }
    let exact = rows.iter().map(|h| residual(h, &point)).fold(f64::INFINITY, f64::min);
    Ok((exact, point))
}

/// Covered, objective matches `claimed_objective` within `tol`, integer flags respected.
pub fn check_solution(inst: &Instance, sol: &Solution, claimed_objective: f64, tol: f64) -> Result<bool, VerifyError> {
    let cert = verify_cover(inst, sol, tol)?;
    if !cert.is_covered() {
        return Ok(false);
    }
    let value = inst.objective_value(sol).map_err(VerifyError::Model)?;
    if (value - claimed_objective).abs() > tol {
        return Ok(false);
    }
    Ok(integrality_respected(inst, sol, tol))
}

pub fn integrality_respected(inst: &Instance, sol: &Solution, tol: f64) -> bool {
    let near = |v: f64| (v - v.round()).abs() <= tol;
    inst.x_integer.iter().all(|&j| near(sol.x[j])) && sol.ys.iter().all(|y| inst.y_integer.iter().all(|&j| near(y[j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::get_instance;
    use crate::model::Method;

    fn sol(x: Vec<f64>, ys: Vec<Vec<f64>>) -> Solution {
        Solution { x, ys, objective: 0.0, method: Method::Reference, pieces: None }
    }

    #[test]
    fn problem_p_reference_is_covered() {
        let p = get_instance("P").unwrap();
        let cert = verify_cover(&p.instance, &sol(vec![2.0, 2.0, 0.0, 2.0], vec![vec![2.0]]), 1e-6).unwrap();
        assert_eq!(cert.verdict, Verdict::Covered);
        assert!(check_solution(&p.instance, &sol(vec![2.0, 2.0, 0.0, 2.0], vec![vec![2.0]]), 2.0, 1e-6).unwrap());
        assert!(!check_solution(&p.instance, &sol(vec![2.0, 2.0, 0.0, 2.0], vec![vec![2.0]]), 3.0, 1e-6).unwrap());
    }

    #[test]
    fn problem_p_bad_second_stage_has_witness_at_one() {
        let p = get_instance("P").unwrap();
        let s = sol(vec![0.0; 4], vec![vec![5.0]]);
        let cert = verify_cover(&p.instance, &s, 1e-6).unwrap();
        assert_eq!(cert.verdict, Verdict::NotCovered);
        let w = cert.witness.unwrap();
        assert!((w.point[0] - 1.0).abs() < 1e-9);
        // row 5(ω+2) ≤ 10 is violated by 5 at ω = 1
        assert!((cert.max_uncovered_slack - 5.0).abs() < 1e-9);
        let res = p.instance.evaluate_constraints(&s.x, &s.ys[0], &w.point).unwrap();
        assert!(w.violated_rows[0].iter().all(|&r| res[r] > 1e-6));
        assert!(w.violated_rows[0].contains(&3));
    }

    #[test]
    fn problem_r_reference_is_covered_and_integral() {
        let r = get_instance("R").unwrap();
        let s = &r.reference_solutions[0];
        assert!(check_solution(&r.instance, s, 0.0, 1e-6).unwrap());
        let frac = sol(vec![], vec![vec![0.0], vec![0.5]]);
        assert!(!integrality_respected(&r.instance, &frac, 1e-6));
    }

    #[test]
    fn problem_r_single_piece_is_not_covered() {
        let r = get_instance("R").unwrap();
        let cert = verify_cover(&r.instance, &sol(vec![], vec![vec![0.0]]), 1e-6).unwrap();
        assert_eq!(cert.verdict, Verdict::NotCovered);
    }

    #[test]
    fn budget_and_tolerance_errors() {
        let p = get_instance("P").unwrap();
        let s = sol(vec![0.0; 4], vec![vec![5.0]; 3]);
        let opts = VerifyOptions { budget: 0, ..VerifyOptions::default() };
        assert!(matches!(
            verify_cover_with(&p.instance, &s, 1e-6, &opts),
            Err(VerifyError::CombinatorialBudgetExceeded { .. })
        ));
        assert!(matches!(verify_cover(&p.instance, &s, 0.0), Err(VerifyError::BadTolerance(_))));
        assert!(matches!(verify_cover(&p.instance, &sol(vec![0.0], vec![vec![5.0]]), 1e-6), Err(VerifyError::Model(_))));
    }
}
