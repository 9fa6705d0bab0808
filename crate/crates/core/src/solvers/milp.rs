//! Big-M formulations: the monolithic k = 2 MILP and the scenario lower bound.

use std::time::Instant;

use super::basic::status_outcome;
use super::{finish_k_adaptable, require_deterministic, Outcome, Program, SolveOptions, SolveReport};
use crate::covers::{forced_labeling_k2, SkeletonCover, VertexCover};
use crate::error::{ModelError, SolveError};
use crate::lp::{ConstraintSense, LpSolution};
use crate::model::{Instance, Method};

/// How many times M may be doubled before giving up.
const MAX_DOUBLINGS: usize = 6;

/// `2·max_v ‖b(v)‖∞`, floored at 1 so that `b ≡ 0` still relaxes rows.
fn default_big_m(inst: &Instance) -> f64 {
    (2.0 * inst.max_rhs_norm()).max(1.0)
}

/// Largest value of `A_r(ω)x + B_r(ω)y` over the variable box, per row, or
/// `None` when some variable is unbounded.
fn box_row_max(inst: &Instance, omega: &[f64]) -> Option<Vec<f64>> {
    if !inst.x_bounds.iter().chain(&inst.y_bounds).all(|b| b.is_finite()) {
        return None;
    }
    let a = inst.a.eval(omega);
    let b = inst.b_mat.eval(omega);
    let (nx, ny) = (inst.dim_x(), inst.dim_y());
    let hi = |coef: f64, lo: f64, up: f64| (coef * lo).max(coef * up);
    Some(
        (0..inst.num_rows())
            .map(|r| {
                let ax: f64 = (0..nx).map(|j| hi(a[r * nx + j], inst.x_bounds[j].lower, inst.x_bounds[j].upper)).sum();
                let by: f64 = (0..ny).map(|j| hi(b[r * ny + j], inst.y_bounds[j].lower, inst.y_bounds[j].upper)).sum();
                ax + by
            })
            .collect(),
    )
}

pub fn solve_adapt2_milp(inst: &Instance, big_m: Option<f64>) -> Result<SolveReport, SolveError> {
    solve_adapt2_milp_with(inst, &SolveOptions { big_m, ..SolveOptions::default() })
}

struct Adapt2Vars {
    /// `a[i][v]`: vertex v belongs to V_i.
    a: Vec<Vec<usize>>,
    alpha: Vec<usize>,
    /// `b_e`: t_e rows are active.
    active: Vec<usize>,
}

/// Single MILP over vertex memberships, edge activations and edge placements.
pub fn solve_adapt2_milp_with(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    require_deterministic(inst)?;
    let p = &inst.omega;
    let nv = p.num_vertices();
    let m_rows = inst.num_rows();

    // with a bounded box the relaxed rows can never bind; otherwise check afterwards
    let exact_m = box_row_max(inst, &vec![0.0; inst.omega_dim()]).map(|hi| {
        let low_b = (0..m_rows)
            .map(|r| p.vertices().iter().map(|v| inst.rhs_at(v)[r]).fold(f64::INFINITY, f64::min))
            .collect::<Vec<_>>();
        hi.iter().zip(&low_b).map(|(h, lb)| h.max(h - lb)).fold(0.0_f64, f64::max)
    });
    let mut big_m = match (opts.big_m, exact_m) {
        (Some(m), _) => m,
        (None, Some(e)) => default_big_m(inst).max(e + 1.0),
        (None, None) => default_big_m(inst),
    };
    let trusted = exact_m.is_some_and(|e| big_m >= e);

    let mut report = SolveReport::new(Outcome::Infeasible);
    for attempt in 0..=MAX_DOUBLINGS {
        let (prog, vars) = build_adapt2(inst, big_m);
        let lp = prog.solve(&opts.tolerances)?;
        report.candidates_explored += 1;
        report.lp_solves += 1;
        report.big_m = Some(big_m);
        if let Some(o) = status_outcome(&lp) {
            if trusted || o == Outcome::Unbounded || attempt == MAX_DOUBLINGS {
                if !trusted && o == Outcome::Infeasible {
                    log::warn!("{}: infeasible for every M up to {big_m}", inst.name);
                }
                report.outcome = o;
                report.wall_time = start.elapsed();
                return Ok(report);
            }
            log::warn!("{}: infeasible with M = {big_m}; retrying with 2M", inst.name);
            big_m *= 2.0;
            continue;
        }
        let sol = prog.extract(&lp, Method::Milp)?;
        let binding = !trusted && relaxed_rows_bind(inst, &prog, &vars, &lp, big_m);
        let sol = finish_k_adaptable(inst, sol, &mut report, opts)?;
        let covered = report.certificate.as_ref().map_or(true, |c| c.is_covered());
        if binding || !covered {
            if attempt == MAX_DOUBLINGS {
                return Err(SolveError::BigMTooSmall(big_m));
            }
            log::warn!("{}: M = {big_m} may cut off solutions; retrying with 2M", inst.name);
            big_m *= 2.0;
            report.certificate = None;
            continue;
        }
        let assignment: Vec<u8> = (0..nv)
            .map(|v| (0..2).filter(|&i| lp.primal_values[vars.a[i][v]] > 0.5).fold(0u8, |m, i| m | 1 << i))
            .collect();
        let vc = VertexCover { k: 2, assignment };
        let lab = forced_labeling_k2(p, &vc);
        let mut sc = SkeletonCover::with_placements(p, vc, lab, 0.5, 0.0, 0.0);
        for (e, slot) in sc.alpha_t.iter_mut().enumerate() {
            if slot.is_some() {
                *slot = Some(lp.primal_values[vars.alpha[e]].clamp(0.0, 1.0));
            }
        }
        report.winning_candidate = Some(sc);
        report.outcome = Outcome::Optimal(sol);
        report.wall_time = start.elapsed();
        return Ok(report);
    }
    unreachable!("loop returns on its last attempt")
}

fn build_adapt2(inst: &Instance, big_m: f64) -> (Program<'_>, Adapt2Vars) {
    let p = &inst.omega;
    let nv = p.num_vertices();
    let mut prog = Program::new(inst, 2);
    let a: Vec<Vec<usize>> = (0..2)
        .map(|_| {
            (0..nv)
                .map(|_| {
                    let v = prog.lp.add_var(0.0, 0.0, 1.0);
                    prog.mark_integer(v);
                    v
                })
                .collect()
        })
        .collect();
    // vertex 0 can always be placed in the first piece
    if nv > 0 {
        prog.lp.add_row(vec![(a[0][0], 1.0)], ConstraintSense::Ge, 1.0);
    }
    for (v, pt) in p.vertices().iter().enumerate() {
        for i in 0..2 {
            // A x + B y_i + (M − b_r(v)) a ≤ M
            let shift: Vec<f64> = inst.rhs_at(pt).iter().map(|b| big_m - b).collect();
            prog.constrain_at_if(i, pt, a[i][v], &shift);
        }
        prog.lp.add_row(vec![(a[0][v], 1.0), (a[1][v], 1.0)], ConstraintSense::Ge, 1.0);
    }
    let mut alpha = Vec::new();
    let mut active = Vec::new();
    let m_vec = vec![big_m; inst.num_rows()];
    for e in p.edges() {
        let al = prog.lp.add_var(0.0, 0.0, 1.0);
        let be = prog.lp.add_var(0.0, 0.0, 1.0);
        prog.mark_integer(be);
        let tail = p.vertex(e.tail_index);
        let dir: Vec<f64> = p.vertex(e.head_index).iter().zip(tail).map(|(h, t)| h - t).collect();
        for i in 0..2 {
            prog.constrain_at_param(i, tail, &[(al, dir.clone())], Some((be, &m_vec)));
        }
        let (t, h) = (e.tail_index, e.head_index);
        // a_{1,t} + a_{2,h} − a_{2,t} − a_{1,h} − 1 ≤ b_e and the mirror
        prog.lp.add_row(
            vec![(a[0][t], 1.0), (a[1][h], 1.0), (a[1][t], -1.0), (a[0][h], -1.0), (be, -1.0)],
            ConstraintSense::Le,
            1.0,
        );
        prog.lp.add_row(
            vec![(a[1][t], 1.0), (a[0][h], 1.0), (a[0][t], -1.0), (a[1][h], -1.0), (be, -1.0)],
            ConstraintSense::Le,
            1.0,
        );
        alpha.push(al);
        active.push(be);
    }
    (prog, Adapt2Vars { a, alpha, active })
}

/// Whether some switched-off row sits within tolerance of its relaxed bound.
fn relaxed_rows_bind(inst: &Instance, prog: &Program, vars: &Adapt2Vars, lp: &LpSolution, big_m: f64) -> bool {
    let slack_tol = 1e-6 * (1.0 + big_m);
    let x: Vec<f64> = prog.x.iter().map(|&j| lp.primal_values[j]).collect();
    let p = &inst.omega;
    for i in 0..2 {
        let y: Vec<f64> = prog.ys[i].iter().map(|&j| lp.primal_values[j]).collect();
        for (v, pt) in p.vertices().iter().enumerate() {
            if lp.primal_values[vars.a[i][v]] < 0.5 {
                let lhs: Vec<f64> = inst.a.mul_vec(pt, &x).iter().zip(inst.b_mat.mul_vec(pt, &y)).map(|(a, b)| a + b).collect();
                if lhs.iter().any(|&l| l >= big_m - slack_tol) {
                    return true;
                }
            }
        }
        for (ei, e) in p.edges().iter().enumerate() {
            if lp.primal_values[vars.active[ei]] < 0.5 {
                let al = lp.primal_values[vars.alpha[ei]];
                let pt = crate::geometry::lerp(p.vertex(e.tail_index), p.vertex(e.head_index), al);
                let res = inst.evaluate_constraints(&x, &y, &pt).expect("shapes checked");
                if res.iter().any(|&r| r >= big_m - slack_tol) {
                    return true;
                }
            }
        }
    }
    false
}

pub fn solve_scenario_lb(inst: &Instance, scenarios: &[Vec<f64>], k: usize, big_m: Option<f64>) -> Result<SolveReport, SolveError> {
    solve_scenario_lb_with(inst, scenarios, k, &SolveOptions { big_m, ..SolveOptions::default() })
}

/// Assignment MILP: every scenario is assigned to at least one piece whose
/// second-stage vector satisfies the constraints there. Works for uncertain
/// A and B since each scenario fixes ω.
pub fn solve_scenario_lb_with(inst: &Instance, scenarios: &[Vec<f64>], k: usize, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    inst.validate()?;
    if k == 0 {
        return Err(SolveError::UnsupportedK(0));
    }
    let scale = 1.0 + inst.omega.vertices().iter().flatten().fold(0.0_f64, |a, b| a.max(b.abs()));
    for (index, s) in scenarios.iter().enumerate() {
        if s.len() != inst.omega_dim() {
            return Err(ModelError::DimensionMismatch(format!(
                "scenario {index} has {} coordinates, Ω lives in R^{}",
                s.len(),
                inst.omega_dim()
            ))
            .into());
        }
        if !inst.omega.contains_point(s, 1e-7 * scale) {
            return Err(SolveError::ScenarioOutsideOmega { index });
        }
    }

    // per (scenario, row) relaxation; exact when every variable is bounded
    let exact: Option<Vec<Vec<f64>>> = scenarios
        .iter()
        .map(|s| {
            box_row_max(inst, s).map(|hi| hi.iter().zip(inst.rhs_at(s)).map(|(h, b)| (h - b).max(0.0) + 1.0).collect())
        })
        .collect();
    let mut big_m = opts.big_m.unwrap_or_else(|| default_big_m(inst));
    let trusted = exact.is_some() && opts.big_m.is_none();

    let mut report = SolveReport::new(Outcome::Infeasible);
    for attempt in 0..=MAX_DOUBLINGS {
        let mut prog = Program::new(inst, k);
        let mut assign = vec![Vec::new(); scenarios.len()];
        for (si, s) in scenarios.iter().enumerate() {
            if k == 1 {
                prog.constrain_at(0, s);
                continue;
            }
            let ms: Vec<f64> = match &exact {
                Some(e) if opts.big_m.is_none() => e[si].clone(),
                _ => vec![big_m; inst.num_rows()],
            };
            for i in 0..k {
                let z = prog.lp.add_var(0.0, if si == 0 && i == 0 { 1.0 } else { 0.0 }, 1.0);
                prog.mark_integer(z);
                prog.constrain_at_if(i, s, z, &ms);
                assign[si].push(z);
            }
            prog.lp.add_row(assign[si].iter().map(|&z| (z, 1.0)).collect(), ConstraintSense::Ge, 1.0);
        }
        let lp = prog.solve(&opts.tolerances)?;
        report.candidates_explored += 1;
        report.lp_solves += 1;
        if k > 1 && !trusted {
            report.big_m = Some(big_m);
        }
        if let Some(o) = status_outcome(&lp) {
            if trusted || k == 1 || o == Outcome::Unbounded || attempt == MAX_DOUBLINGS {
                if !trusted && k > 1 && o == Outcome::Infeasible {
                    log::warn!("{}: scenario program infeasible for every M up to {big_m}", inst.name);
                }
                report.outcome = o;
                report.wall_time = start.elapsed();
                return Ok(report);
            }
            big_m *= 2.0;
            continue;
        }
        let sol = prog.extract(&lp, Method::ScenarioBound)?;
        if k > 1 && !trusted {
            let tol = 1e-6 * (1.0 + big_m);
            let binding = scenarios.iter().enumerate().any(|(si, s)| {
                (0..k).any(|i| {
                    lp.primal_values[assign[si][i]] < 0.5
                        && inst
                            .evaluate_constraints(&sol.x, &sol.ys[i], s)
                            .expect("shapes checked")
                            .iter()
                            .any(|&r| r >= big_m - tol)
                })
            });
            if binding {
                if attempt == MAX_DOUBLINGS {
                    return Err(SolveError::BigMTooSmall(big_m));
                }
                log::warn!("{}: scenario M = {big_m} binds; retrying with 2M", inst.name);
                big_m *= 2.0;
                continue;
            }
        }
        report.outcome = Outcome::Optimal(sol);
        report.wall_time = start.elapsed();
        return Ok(report);
    }
    unreachable!("loop returns on its last attempt")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::get_instance;
    use crate::solvers::{solve_adapt1, solve_adapt2_enum};

    fn inst(name: &str) -> Instance {
        get_instance(name).unwrap().instance
    }

    #[test]
    fn milp_matches_enumeration_on_corpus() {
        for name in ["square", "interval", "triangle", "fixed", "fixed-square"] {
            let e = solve_adapt2_enum(&inst(name)).unwrap();
            let m = solve_adapt2_milp(&inst(name), None).unwrap();
            assert_eq!(e.is_infeasible(), m.is_infeasible(), "{name}");
            if !e.is_infeasible() {
                assert!((e.value() - m.value()).abs() < 1e-5, "{name}: {} vs {}", e.value(), m.value());
                assert!(m.certificate.as_ref().unwrap().is_covered());
            }
        }
    }

    #[test]
    fn milp_on_fixed_matches_adapt1() {
        let a = solve_adapt1(&inst("fixed")).unwrap().value();
        assert!((solve_adapt2_milp(&inst("fixed"), None).unwrap().value() - a).abs() < 1e-9);
    }

    #[test]
    fn scenario_bound_on_p() {
        let r = solve_scenario_lb(&inst("P"), &[vec![0.0], vec![0.5], vec![1.0]], 2, None).unwrap();
        assert!((r.value() - 2.0).abs() < 1e-6, "{}", r.value());
        let r = solve_scenario_lb(&inst("P"), &[vec![0.0]], 2, None).unwrap();
        assert!(r.value().abs() < 1e-9);
    }

    #[test]
    fn scenario_bound_on_q_is_infeasible() {
        let pts: Vec<Vec<f64>> = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0].iter().map(|&w| vec![w]).collect();
        assert!(solve_scenario_lb(&inst("Q"), &pts, 3, None).unwrap().is_infeasible());
    }

    #[test]
    fn single_scenario_single_piece_is_plain_lp() {
        let r = solve_scenario_lb(&inst("interval"), &[vec![0.25]], 1, None).unwrap();
        assert!((r.value() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn scenario_outside_omega_rejected() {
        assert_eq!(
            solve_scenario_lb(&inst("interval"), &[vec![0.5], vec![1.5]], 2, None).unwrap_err(),
            SolveError::ScenarioOutsideOmega { index: 1 }
        );
    }
}
