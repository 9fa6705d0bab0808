//! Acceptance run: one test and one PASS/FAIL line per criterion.
//!
//! `cargo test -p finadapt --test acceptance -- --nocapture --test-threads 1` shows
//! the lines with the measured values.

use std::time::{Duration, Instant};

use finadapt::corpus::{generate_random, get_instance};
use finadapt::covers::{uncovered_skeleton_point, CoverEnumeration};
use finadapt::lp::{solve_lp, solve_milp, ConstraintSense, IntegralitySpec, LinearProgram, LpStatus, ObjectiveSense};
use finadapt::render::render_svg;
use finadapt::solvers::{
    solve_adapt1, solve_adapt2_enum, solve_adapt2_enum_with, solve_adapt2_milp, solve_adapt3_enum_with, solve_adapt_1d,
    solve_comp_adapt, solve_scenario_lb, SolveOptions, SolveReport,
};
use finadapt::verify::{check_solution, integrality_respected, verify_cover};
use finadapt::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let result = result.and_then(|d| {
        if elapsed <= limit {
            Ok(d)
        } else {
            Err(format!("{d}; took {elapsed:.2?}, limit {limit:?}"))
        }
    });
    match &result {
        Ok(d) => println!("PASS [{id}] {name}: {d} ({elapsed:.2?})"),
        Err(d) => println!("FAIL [{id}] {name}: {d} ({elapsed:.2?})"),
    }
    result.is_ok()
}

fn criterion_1() -> Outcome {
    let p = get_instance("P").unwrap();
    let sol = &p.reference_solutions[0];
    ensure(sol.x == vec![2.0, 2.0, 0.0, 2.0] && sol.ys == vec![vec![2.0]], || "unexpected reference point".into())?;
    let cert = verify_cover(&p.instance, sol, 1e-6).map_err(|e| e.to_string())?;
    ensure(cert.is_covered(), || format!("reference not covered: {cert:?}"))?;
    ensure(check_solution(&p.instance, sol, 2.0, 1e-6).map_err(|e| e.to_string())?, || "objective 2 not confirmed".into())?;
    let lb = solve_scenario_lb(&p.instance, &[vec![0.0], vec![0.5], vec![1.0]], 2, None).map_err(|e| e.to_string())?;
    ensure(close(lb.value(), 2.0, 1e-6), || format!("lower bound {}", lb.value()))?;
    Ok(format!("reference covered, objective 2, scenario bound {}", lb.value()))
}

fn criterion_2() -> Outcome {
    let q = get_instance("Q").unwrap();
    let sc = [vec![0.0], vec![1.0 / 3.0], vec![2.0 / 3.0], vec![1.0]];
    let lb = solve_scenario_lb(&q.instance, &sc, 3, None).map_err(|e| e.to_string())?;
    ensure(lb.is_infeasible(), || format!("expected infeasible, got {}", lb.value()))?;
    Ok("scenario relaxation with k = 3 infeasible".into())
}

fn svg_polygons(svg: &str) -> Vec<Vec<[f64; 2]>> {
    svg.lines()
        .filter(|l| l.contains("<polygon"))
        .map(|l| {
            let start = l.find("points=\"").unwrap() + 8;
            let end = start + l[start..].find('"').unwrap();
            l[start..end]
                .split_whitespace()
                .map(|pair| {
                    let (x, y) = pair.split_once(',').unwrap();
                    [x.parse().unwrap(), -y.parse::<f64>().unwrap()]
                })
                .collect()
        })
        .collect()
}

fn same_vertex_set(a: &[[f64; 2]], b: &[[f64; 2]], tol: f64) -> bool {
    a.len() == b.len()
        && b.iter().all(|q| a.iter().any(|p| close(p[0], q[0], tol) && close(p[1], q[1], tol)))
        && a.iter().all(|q| b.iter().any(|p| close(p[0], q[0], tol) && close(p[1], q[1], tol)))
}

fn criterion_3() -> Outcome {
    let r = get_instance("R").unwrap();
    let sol = &r.reference_solutions[0];
    ensure(sol.ys == vec![vec![0.0], vec![1.0]], || "unexpected reference point".into())?;
    let cert = verify_cover(&r.instance, sol, 1e-6).map_err(|e| e.to_string())?;
    ensure(cert.is_covered(), || format!("reference not covered: {cert:?}"))?;
    ensure(integrality_respected(&r.instance, sol, 1e-9), || "y not binary".into())?;
    let svg = render_svg(&r.instance, sol).map_err(|e| e.to_string())?;
    let polys = svg_polygons(&svg);
    ensure(polys.len() == 3, || format!("{} polygons in the SVG", polys.len()))?;
    let hex1 = [[-1.0, 1.0], [0.0, 2.0], [1.0, 1.0], [1.0, -1.0], [0.0, -2.0], [-1.0, -1.0]];
    let hex2 = [[-1.0, 1.0], [1.0, 1.0], [2.0, 0.0], [1.0, -1.0], [-1.0, -1.0], [-2.0, 0.0]];
    ensure(same_vertex_set(&polys[0], &hex1, 1e-6), || format!("piece 1 is {:?}", polys[0]))?;
    ensure(same_vertex_set(&polys[1], &hex2, 1e-6), || format!("piece 2 is {:?}", polys[1]))?;
    Ok("reference covered with binary y, both hexagons drawn".into())
}

fn criterion_4() -> Outcome {
    let sq = get_instance("square").unwrap().instance;
    let e = solve_adapt2_enum(&sq).map_err(|e| e.to_string())?;
    ensure(e.candidates_explored <= 81, || format!("{} candidates", e.candidates_explored))?;
    ensure(close(e.value(), 2.0, 1e-5), || format!("enumeration value {}", e.value()))?;
    let m = solve_adapt2_milp(&sq, None).map_err(|e| e.to_string())?;
    ensure(close(m.value(), e.value(), 1e-5), || format!("MILP value {}", m.value()))?;
    Ok(format!("{} candidates, value {}, MILP {}", e.candidates_explored, e.value(), m.value()))
}

fn criterion_5() -> Outcome {
    let tri = get_instance("triangle").unwrap().instance;
    let single = SolveOptions { threads: Some(1), ..SolveOptions::default() };
    let three = solve_adapt3_enum_with(&tri, &single).map_err(|e| e.to_string())?;
    ensure(close(three.value(), 1.6, 1e-5), || format!("k = 3 value {}", three.value()))?;
    ensure(three.candidates_explored <= 7u64.pow(6), || format!("{} candidates", three.candidates_explored))?;
    let two = solve_adapt2_enum_with(&tri, &single).map_err(|e| e.to_string())?;
    ensure(two.is_infeasible(), || format!("k = 2 value {}", two.value()))?;
    let one = solve_adapt1(&tri).map_err(|e| e.to_string())?;
    ensure(one.is_infeasible(), || format!("k = 1 value {}", one.value()))?;
    Ok(format!("k = 3 value {} from {} candidates, k = 1, 2 infeasible", three.value(), three.candidates_explored))
}

/// Best `max_i y_i` over breakpoints on a grid, for instances whose rows read
/// `β_r y ≤ b_r(ω)` with a scalar y and minimization of y.
fn breakpoint_grid_oracle(inst: &Instance, k: usize, step: f64) -> f64 {
    let lo = inst.omega.vertex(0)[0].min(inst.omega.vertex(1)[0]);
    let hi = inst.omega.vertex(0)[0].max(inst.omega.vertex(1)[0]);
    let piece_min = |a: f64, b: f64| -> f64 {
        let (mut low, mut up) = (f64::NEG_INFINITY, f64::INFINITY);
        for r in 0..inst.num_rows() {
            let beta = inst.b_const(r, 0);
            for w in [a, b] {
                let rhs = inst.rhs_at(&[w])[r];
                if beta > 0.0 {
                    up = up.min(rhs / beta);
                } else if beta < 0.0 {
                    low = low.max(rhs / beta);
                }
            }
        }
        if low <= up + 1e-12 {
            low
        } else {
            f64::INFINITY
        }
    };
    let n = ((hi - lo) / step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
    // nondecreasing breakpoint indices 0 = s_0 ≤ s_1 ≤ … ≤ s_k = n
    fn best(grid: &[f64], from: usize, left: usize, piece_min: &dyn Fn(f64, f64) -> f64) -> f64 {
        let n = grid.len() - 1;
        if left == 1 {
            return piece_min(grid[from], grid[n]);
        }
        (from..=n)
            .map(|to| piece_min(grid[from], grid[to]).max(best(grid, to, left - 1, piece_min)))
            .fold(f64::INFINITY, f64::min)
    }
    best(&grid, 0, k, &piece_min)
}

fn criterion_6() -> Outcome {
    let iv = get_instance("interval").unwrap().instance;
    let one = solve_adapt_1d(&iv, 1).map_err(|e| e.to_string())?;
    ensure(one.is_infeasible(), || format!("k = 1 value {}", one.value()))?;
    let two = solve_adapt_1d(&iv, 2).map_err(|e| e.to_string())?;
    ensure(close(two.value(), 1.0, 1e-6), || format!("k = 2 value {}", two.value()))?;
    let oracle = breakpoint_grid_oracle(&iv, 2, 1e-3);
    ensure(close(two.value(), oracle, 1e-6), || format!("grid oracle {oracle}"))?;
    ensure(breakpoint_grid_oracle(&iv, 1, 1e-3).is_infinite(), || "oracle finds k = 1 feasible".into())?;
    let e = solve_adapt2_enum(&iv).map_err(|e| e.to_string())?;
    ensure(close(e.value(), two.value(), 1e-6), || format!("enumeration value {}", e.value()))?;
    Ok(format!("k = 1 infeasible, k = 2 value {}, grid oracle {oracle}, enumeration {}", two.value(), e.value()))
}

fn random_case(seed: u64) -> Instance {
    generate_random(seed, 1 + (seed % 2) as usize, 2 + (seed % 5) as usize)
}

/// k = 3 runs the full labelling scope on segments and triangles and the
/// single-membership scope on larger polygons.
fn k3_options(inst: &Instance) -> SolveOptions {
    let single_membership = inst.omega.num_vertices() > 3;
    SolveOptions { enumeration: CoverEnumeration { symmetry_pruning: true, single_membership }, ..SolveOptions::default() }
}

fn leq(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol || (a.is_infinite() && a == b)
}

fn feasible_outputs_verify(inst: &Instance, reports: &[(&str, &SolveReport)]) -> Result<(), String> {
    for (label, r) in reports {
        if let Some(sol) = r.solution() {
            let cert = verify_cover(inst, sol, 1e-6).map_err(|e| format!("{label}: {e}"))?;
            ensure(cert.is_covered(), || format!("{}: {label} output not covered", inst.name))?;
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut sampled = 0;
    for seed in 0..50u64 {
        let inst = random_case(seed);
        let a1 = solve_adapt1(&inst).map_err(|e| e.to_string())?;
        let a2 = solve_adapt2_enum(&inst).map_err(|e| e.to_string())?;
        let a3 = solve_adapt3_enum_with(&inst, &k3_options(&inst)).map_err(|e| e.to_string())?;
        let comp = solve_comp_adapt(&inst).map_err(|e| e.to_string())?;
        let milp = solve_adapt2_milp(&inst, None).map_err(|e| e.to_string())?;
        let (v1, v2, v3, vc) = (a1.value(), a2.value(), a3.value(), comp.value());
        ensure(leq(v2, v1, 1e-6) && leq(v3, v2, 1e-6) && leq(vc, v3, 1e-6), || {
            format!("{}: values {v1} ≥ {v2} ≥ {v3} ≥ {vc} violated", inst.name)
        })?;
        feasible_outputs_verify(&inst, &[("k=1", &a1), ("k=2", &a2), ("k=3", &a3), ("milp", &milp)])?;
        ensure(close(milp.value(), v2, 1e-5) || (milp.value().is_infinite() && milp.value() == v2), || {
            format!("{}: enumeration {v2}, MILP {}", inst.name, milp.value())
        })?;
        for r in [&a2, &a3] {
            if let Some(sc) = &r.winning_candidate {
                let gap = uncovered_skeleton_point(&inst.omega, sc, 21, 1e-6).map_err(|e| e.to_string())?;
                ensure(gap.is_none(), || format!("{}: skeleton point {gap:?} uncovered", inst.name))?;
                sampled += 1;
            }
        }
    }
    Ok(format!("50 instances, {sampled} winning skeleton covers sampled"))
}

struct RandomProgram {
    lp: LinearProgram,
    binaries: usize,
}

/// Binaries first, then up to two continuous variables in [-5, 5].
fn random_program(rng: &mut ChaCha8Rng) -> RandomProgram {
    let binaries = rng.gen_range(1..=6);
    let continuous = if rng.gen_bool(0.5) { 2 } else { 0 };
    let n = binaries + continuous;
    let sense = if rng.gen_bool(0.5) { ObjectiveSense::Minimize } else { ObjectiveSense::Maximize };
    let mut lp = LinearProgram::new(n, sense);
    let r = |rng: &mut ChaCha8Rng, a: f64| (rng.gen_range(-a..a) * 4.0).round() / 4.0;
    lp.objective_coefficients = (0..n).map(|_| r(rng, 3.0)).collect();
    for j in 0..n {
        let b = if j < binaries { (0.0, 1.0) } else { (-5.0, 5.0) };
        lp.variable_lower_bounds[j] = b.0;
        lp.variable_upper_bounds[j] = b.1;
    }
    for _ in 0..rng.gen_range(2..=5) {
        let row: Vec<f64> = (0..n).map(|_| r(rng, 3.0)).collect();
        let s = if rng.gen_bool(0.7) { ConstraintSense::Le } else { ConstraintSense::Ge };
        let rhs = r(rng, 4.0) + if s == ConstraintSense::Le { 1.0 } else { -1.0 };
        lp.add_row(row, s, rhs);
    }
    RandomProgram { lp, binaries }
}

fn row_ok(coeffs: &[f64], s: ConstraintSense, rhs: f64, x: &[f64]) -> bool {
    let v: f64 = coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
    match s {
        ConstraintSense::Le => v <= rhs + 1e-9,
        ConstraintSense::Ge => v >= rhs - 1e-9,
        ConstraintSense::Eq => (v - rhs).abs() <= 1e-9,
    }
}

/// Optimal value over every binary assignment; the two continuous variables
/// (if any) are handled by enumerating vertices of the planar feasible region.
fn exhaustive(p: &RandomProgram) -> Option<f64> {
    let lp = &p.lp;
    let n = lp.num_vars();
    let better = |a: f64, b: f64| if lp.sense == ObjectiveSense::Minimize { a < b } else { a > b };
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << p.binaries) {
        let mut x: Vec<f64> = (0..p.binaries).map(|j| f64::from((mask >> j) & 1)).collect();
        let mut points = Vec::new();
        if n == p.binaries {
            points.push(x.clone());
        } else {
            // lines a·(u, v) = c in the continuous plane
            let mut lines: Vec<(f64, f64, f64)> = vec![(1.0, 0.0, -5.0), (1.0, 0.0, 5.0), (0.0, 1.0, -5.0), (0.0, 1.0, 5.0)];
            for (row, rhs) in lp.constraint_matrix.iter().zip(&lp.right_hand_sides) {
                let fixed: f64 = row[..p.binaries].iter().zip(&x).map(|(a, b)| a * b).sum();
                lines.push((row[p.binaries], row[p.binaries + 1], rhs - fixed));
            }
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (a1, b1, c1) = lines[i];
                    let (a2, b2, c2) = lines[j];
                    let det = a1 * b2 - a2 * b1;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let u = (c1 * b2 - c2 * b1) / det;
                    let v = (a1 * c2 - a2 * c1) / det;
                    if u.abs() <= 5.0 + 1e-9 && v.abs() <= 5.0 + 1e-9 {
                        let mut full = x.clone();
                        full.extend([u, v]);
                        points.push(full);
                    }
                }
            }
        }
        for pt in points {
            let feasible = lp
                .constraint_matrix
                .iter()
                .zip(&lp.constraint_senses)
                .zip(&lp.right_hand_sides)
                .all(|((row, s), rhs)| row_ok(row, *s, *rhs, &pt));
            if feasible {
                let val: f64 = lp.objective_coefficients.iter().zip(&pt).map(|(a, b)| a * b).sum();
                if best.map_or(true, |b| better(val, b)) {
                    best = Some(val);
                }
            }
        }
        x.clear();
    }
    best
}

/// `y·b + Σ_j d_j·bound_j` with reduced costs `d = c − Aᵀy`, plus dual sign checks.
fn duality_gap(lp: &LinearProgram, primal: f64, duals: &[f64], tol: f64) -> Result<f64, String> {
    let min = lp.sense == ObjectiveSense::Minimize;
    let mut dual_obj = 0.0;
    for (r, (&y, s)) in duals.iter().zip(&lp.constraint_senses).enumerate() {
        let wrong = match (s, min) {
            (ConstraintSense::Le, true) | (ConstraintSense::Ge, false) => y > tol,
            (ConstraintSense::Ge, true) | (ConstraintSense::Le, false) => y < -tol,
            (ConstraintSense::Eq, _) => false,
        };
        if wrong {
            return Err(format!("row {r} multiplier {y} has the wrong sign"));
        }
        dual_obj += y * lp.right_hand_sides[r];
    }
    for j in 0..lp.num_vars() {
        let d = lp.objective_coefficients[j] - (0..lp.num_rows()).map(|r| duals[r] * lp.constraint_matrix[r][j]).sum::<f64>();
        if d.abs() <= tol {
            continue;
        }
        let at_lower = (d > 0.0) == min;
        let bound = if at_lower { lp.variable_lower_bounds[j] } else { lp.variable_upper_bounds[j] };
        if !bound.is_finite() {
            return Err(format!("reduced cost {d} of variable {j} points at an infinite bound"));
        }
        dual_obj += d * bound;
    }
    Ok((primal - dual_obj).abs())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut duality_checked = 0;
    for case in 0..100 {
        let p = random_program(&mut rng);
        let spec = IntegralitySpec::new(0..p.binaries);
        let sol = solve_milp(&p.lp, &spec).map_err(|e| e.to_string())?;
        match (exhaustive(&p), sol.status) {
            (None, LpStatus::Infeasible) => {}
            (Some(v), LpStatus::Optimal) => {
                ensure(close(sol.objective_value, v, 1e-7), || format!("case {case}: B&B {} vs exhaustive {v}", sol.objective_value))?
            }
            (e, s) => return Err(format!("case {case}: B&B {s:?} vs exhaustive {e:?}")),
        }
        let relaxed = solve_lp(&p.lp).map_err(|e| e.to_string())?;
        if relaxed.is_optimal() {
            let gap = duality_gap(&p.lp, relaxed.objective_value, &relaxed.dual_values, 1e-9)?;
            ensure(gap <= 1e-7, || format!("case {case}: duality gap {gap}"))?;
            duality_checked += 1;
        }
    }
    Ok(format!("100 programs match exhaustive enumeration, {duality_checked} relaxations dual-certified"))
}

#[test]
fn criterion_1_problem_p_certification() {
    assert!(run(1, "problem P certification", Duration::from_secs(1), criterion_1));
}

#[test]
fn criterion_2_problem_q_infeasibility() {
    assert!(run(2, "problem Q infeasibility", Duration::from_secs(1), criterion_2));
}

#[test]
fn criterion_3_problem_r_cover_and_figure() {
    assert!(run(3, "problem R cover and figure", Duration::from_secs(1), criterion_3));
}

#[test]
fn criterion_4_square_k2_enumeration_and_milp() {
    assert!(run(4, "square, k = 2 enumeration and MILP", Duration::from_secs(5), criterion_4));
}

#[test]
fn criterion_5_triangle_k3_enumeration() {
    assert!(run(5, "triangle, k = 3 enumeration", Duration::from_secs(120), criterion_5));
}

#[test]
fn criterion_6_interval_one_dimensional_program() {
    assert!(run(6, "interval, one-dimensional program", Duration::from_secs(1), criterion_6));
}

#[test]
fn criterion_7_random_property_suite() {
    assert!(run(7, "random property suite", Duration::from_secs(600), criterion_7));
}

#[test]
fn criterion_8_lp_milp_kernel() {
    assert!(run(8, "LP/MILP kernel", Duration::from_secs(60), criterion_8));
}
