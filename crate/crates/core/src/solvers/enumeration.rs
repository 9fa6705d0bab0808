//! Enumeration over nice 1-skeleton covers. Each candidate is one LP in which
//! the points t_e, u_e, v_e (and t_f for faces in F) are decision variables.

use std::time::Instant;

use rayon::prelude::*;

use super::basic::status_outcome;
use super::{finish_k_adaptable, require_deterministic, Outcome, Program, SolveOptions, SolveReport};
use crate::covers::{
    compute_f_counted, enumerate_labelings, enumerate_vertex_covers, forced_labeling_k2, labelings_with, EdgeLabeling,
    SkeletonCover, VertexCover,
};
use crate::error::SolveError;
use crate::lp::ConstraintSense;
use crate::model::{Instance, Method, Solution};
use crate::tolerances::Tolerances;

pub fn solve_adapt2_enum(inst: &Instance) -> Result<SolveReport, SolveError> {
    solve_adapt2_enum_with(inst, &SolveOptions::default())
}

pub fn solve_adapt2_enum_with(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    enumerate(inst, 2, opts)
}

pub fn solve_adapt3_enum(inst: &Instance) -> Result<SolveReport, SolveError> {
    solve_adapt3_enum_with(inst, &SolveOptions::default())
}

pub fn solve_adapt3_enum_with(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    enumerate(inst, 3, opts)
}

enum Candidate {
    Infeasible,
    Unbounded,
    Optimal { value: f64, solution: Solution, cover: SkeletonCover },
}

/// Best candidate of one vertex cover plus work counters.
struct CoverResult {
    best: Candidate,
    candidates: u64,
    lp_solves: u64,
}

/// Replaces `best` only on a strict improvement beyond 1e-9, so the earliest
/// candidate in enumeration order wins ties.
fn better(best: &Candidate, next: &Candidate) -> bool {
    match (best, next) {
        (Candidate::Unbounded, _) => false,
        (_, Candidate::Unbounded) => true,
        (_, Candidate::Infeasible) => false,
        (Candidate::Infeasible, _) => true,
        (Candidate::Optimal { value: a, .. }, Candidate::Optimal { value: b, .. }) => *b < *a - 1e-9,
    }
}

fn enumerate(inst: &Instance, k: usize, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    require_deterministic(inst)?;
    let covers: Vec<VertexCover> = enumerate_vertex_covers(&inst.omega, k, opts.enumeration).collect();
    let reduced = opts.enumeration.single_membership;
    let work = || -> Vec<Result<CoverResult, SolveError>> {
        covers.par_iter().map(|vc| solve_cover(inst, vc, k, reduced, &opts.tolerances)).collect()
    };
    let results = match opts.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                work()
            }
        },
        None => work(),
    };

    let mut best = Candidate::Infeasible;
    let mut report = SolveReport::new(Outcome::Infeasible);
    for r in results {
        let r = r?;
        report.candidates_explored += r.candidates;
        report.lp_solves += r.lp_solves;
        if better(&best, &r.best) {
            best = r.best;
        }
    }
    report.outcome = match best {
        Candidate::Infeasible => Outcome::Infeasible,
        Candidate::Unbounded => Outcome::Unbounded,
        Candidate::Optimal { solution, cover, .. } => {
            report.winning_candidate = Some(cover);
            Outcome::Optimal(finish_k_adaptable(inst, solution, &mut report, opts)?)
        }
    };
    report.wall_time = start.elapsed();
    log::info!(
        "{}: k={k}, {} candidates, {} LP solves, {:?}",
        inst.name,
        report.candidates_explored,
        report.lp_solves,
        report.wall_time
    );
    Ok(report)
}

fn solve_cover(inst: &Instance, vc: &VertexCover, k: usize, reduced: bool, tol: &Tolerances) -> Result<CoverResult, SolveError> {
    let mut out = CoverResult { best: Candidate::Infeasible, candidates: 0, lp_solves: 0 };
    let p = &inst.omega;
    let labelings: Box<dyn Iterator<Item = EdgeLabeling>> = if k == 3 {
        if reduced {
            Box::new(labelings_with(p, vc, true))
        } else {
            Box::new(enumerate_labelings(p, vc))
        }
    } else {
        Box::new(std::iter::once(forced_labeling_k2(p, vc)))
    };
    for lab in labelings {
        let sc = SkeletonCover::with_placements(p, vc.clone(), lab, 0.5, 1.0 / 3.0, 2.0 / 3.0);
        let faces = if k == 3 {
            let (f, solves) = compute_f_counted(p, &sc, tol)?;
            out.lp_solves += solves as u64;
            f
        } else {
            Vec::new()
        };
        let cand = solve_candidate(inst, sc, &faces, tol)?;
        out.candidates += 1;
        out.lp_solves += 1;
        let stop = matches!(cand, Candidate::Unbounded);
        if better(&out.best, &cand) {
            out.best = cand;
        }
        if stop {
            break;
        }
    }
    Ok(out)
}

/// The LP of one skeleton cover. Placements in `sc` are replaced by the optimal ones.
fn solve_candidate(inst: &Instance, mut sc: SkeletonCover, faces: &[usize], tol: &Tolerances) -> Result<Candidate, SolveError> {
    let p = &inst.omega;
    let k = sc.k();
    let mut prog = Program::new(inst, k);
    let vc = sc.vertex_cover.clone();
    for (v, pt) in p.vertices().iter().enumerate() {
        for i in 0..k {
            if vc.contains(v, i) {
                prog.constrain_at(i, pt);
            }
        }
    }
    let mut alpha_t = vec![None; p.edges().len()];
    let mut alpha_uv = vec![None; p.edges().len()];
    for (ei, e) in p.edges().iter().enumerate() {
        let tail = p.vertex(e.tail_index);
        let dir: Vec<f64> = p.vertex(e.head_index).iter().zip(tail).map(|(h, t)| h - t).collect();
        let label = sc.labeling.labels[ei];
        match label.count_ones() {
            2 => {
                let a = prog.lp.add_var(0.0, 0.0, 1.0);
                for i in (0..k).filter(|&i| label >> i & 1 == 1) {
                    prog.constrain_at_param(i, tail, &[(a, dir.clone())], None);
                }
                alpha_t[ei] = Some(a);
            }
            3 => {
                let u = prog.lp.add_var(0.0, 0.0, 1.0);
                let v = prog.lp.add_var(0.0, 0.0, 1.0);
                prog.lp.add_row(vec![(u, 1.0), (v, -1.0)], ConstraintSense::Le, 0.0);
                for i in 0..k {
                    let has_tail = vc.contains(e.tail_index, i);
                    let has_head = vc.contains(e.head_index, i);
                    if has_tail || !has_head {
                        prog.constrain_at_param(i, tail, &[(u, dir.clone())], None);
                    }
                    if has_head || !has_tail {
                        prog.constrain_at_param(i, tail, &[(v, dir.clone())], None);
                    }
                }
                alpha_uv[ei] = Some((u, v));
            }
            _ => {}
        }
    }
    for &fi in faces {
        let verts = &p.faces()[fi].vertex_indices;
        let base = p.vertex(verts[0]);
        let weights: Vec<(usize, Vec<f64>)> = verts[1..]
            .iter()
            .map(|&v| {
                let w = prog.lp.add_var(0.0, 0.0, 1.0);
                (w, p.vertex(v).iter().zip(base).map(|(a, b)| a - b).collect())
            })
            .collect();
        prog.lp.add_row(weights.iter().map(|(w, _)| (*w, 1.0)).collect(), ConstraintSense::Le, 1.0);
        for i in 0..k {
            prog.constrain_at_param(i, base, &weights, None);
        }
    }
    let lp = prog.solve(tol)?;
    if let Some(o) = status_outcome(&lp) {
        return Ok(match o {
            Outcome::Unbounded => Candidate::Unbounded,
            _ => Candidate::Infeasible,
        });
    }
    for (ei, a) in alpha_t.iter().enumerate() {
        if let Some(a) = a {
            sc.alpha_t[ei] = Some(lp.primal_values[*a].clamp(0.0, 1.0));
        }
    }
    for (ei, uv) in alpha_uv.iter().enumerate() {
        if let Some((u, v)) = uv {
            let (au, av) = (lp.primal_values[*u].clamp(0.0, 1.0), lp.primal_values[*v].clamp(0.0, 1.0));
            sc.alpha_u[ei] = Some(au.min(av));
            sc.alpha_v[ei] = Some(au.max(av));
        }
    }
    let solution = prog.extract(&lp, Method::Enumeration)?;
    Ok(Candidate::Optimal { value: solution.objective, solution, cover: sc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::get_instance;
    use crate::covers::CoverEnumeration;
    use crate::solvers::{solve_adapt1, solve_adapt_1d};

    fn inst(name: &str) -> Instance {
        get_instance(name).unwrap().instance
    }

    #[test]
    fn square_two_pieces() {
        let r = solve_adapt2_enum(&inst("square")).unwrap();
        assert!((r.value() - 2.0).abs() < 1e-7);
        assert!(r.candidates_explored <= 81);
        assert!(r.certificate.as_ref().unwrap().is_covered());
        let raw = SolveOptions {
            enumeration: CoverEnumeration { symmetry_pruning: false, single_membership: false },
            ..SolveOptions::default()
        };
        let r2 = solve_adapt2_enum_with(&inst("square"), &raw).unwrap();
        assert_eq!(r2.candidates_explored, 81);
        assert!((r2.value() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn interval_matches_one_dimensional_program() {
        let e = solve_adapt2_enum(&inst("interval")).unwrap();
        let t = solve_adapt_1d(&inst("interval"), 2).unwrap();
        assert!((e.value() - 1.0).abs() < 1e-7);
        assert!((e.value() - t.value()).abs() < 1e-6);
        let e3 = solve_adapt3_enum(&inst("interval")).unwrap();
        let t3 = solve_adapt_1d(&inst("interval"), 3).unwrap();
        assert!((e3.value() - t3.value()).abs() < 1e-6);
    }

    #[test]
    fn deterministic_rhs_matches_adapt1() {
        for name in ["fixed", "fixed-square"] {
            let a = solve_adapt1(&inst(name)).unwrap().value();
            assert!((solve_adapt2_enum(&inst(name)).unwrap().value() - a).abs() < 1e-9);
            assert!((solve_adapt3_enum(&inst(name)).unwrap().value() - a).abs() < 1e-9);
        }
    }

    #[test]
    fn uncertain_matrices_rejected() {
        assert_eq!(solve_adapt2_enum(&inst("R")).unwrap_err(), SolveError::RequiresDeterministicAB);
    }

    #[test]
    fn thread_count_does_not_change_the_answer() {
        let one = SolveOptions { threads: Some(1), ..SolveOptions::default() };
        let four = SolveOptions { threads: Some(4), ..SolveOptions::default() };
        let a = solve_adapt2_enum_with(&inst("square"), &one).unwrap();
        let b = solve_adapt2_enum_with(&inst("square"), &four).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.winning_candidate, b.winning_candidate);
    }
}
