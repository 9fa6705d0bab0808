//! Two-phase primal simplex on a dense tableau.
//!
//! Variables are shifted/reflected/split so that every column is non-negative,
//! finite boxes become explicit rows, and each row gets a slack (inequalities)
//! or an artificial (equalities and rows whose slack cannot start basic).
//! Pricing is Dantzig's rule until a run of degenerate pivots, after which the
//! phase switches to Bland's rule for the remaining iterations.

use super::{ConstraintSense, LinearProgram, LpSolution, LpStatus, ObjectiveSense};
use crate::error::LpError;
use crate::tolerances::Tolerances;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const DROP_TOL: f64 = 1e-14;

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone)]
enum ColumnMap {
    Shift { col: usize, offset: f64 },
    Reflect { col: usize, offset: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn obj_row(&self) -> usize {
        self.m
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.data[pr * w + pc];
        let inv = 1.0 / p;
        for c in 0..w {
            self.data[pr * w + c] *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            for (c, v) in row.iter_mut().enumerate() {
                let pv = pivot_row[c];
                if pv != 0.0 {
                    *v -= f * pv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    }
                }
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

fn run_phase(
    t: &mut Tableau,
    allowed: &[bool],
    opt_tol: f64,
    iterations: &mut usize,
    limit: usize,
) -> Result<PhaseOutcome, LpError> {
    let obj = t.obj_row();
    let ncols = t.width - 1;
    let mut bland = false;
    let mut streak = 0usize;
    loop {
        if *iterations >= limit {
            return Err(LpError::IterationLimit(limit));
        }
        // entering column
        let mut enter = None;
        let mut best = -opt_tol;
        for c in 0..ncols {
            if !allowed[c] {
                continue;
            }
            let d = t.at(obj, c);
            if bland {
                if d < -opt_tol {
                    enter = Some(c);
                    break;
                }
            } else if d < best {
                best = d;
                enter = Some(c);
            }
        }
        let Some(pc) = enter else {
            return Ok(PhaseOutcome::Optimal);
        };
        // ratio test
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..t.m {
            let a = t.at(r, pc);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = t.rhs(r).max(0.0) / a;
            match leave {
                None => {
                    leave = Some(r);
                    best_ratio = ratio;
                }
                Some(cur) => {
                    let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                    if ratio < best_ratio && !tie {
                        leave = Some(r);
                        best_ratio = ratio;
                    } else if tie {
                        let better = if bland {
                            t.basis[r] < t.basis[cur]
                        } else {
                            a > t.at(cur, pc)
                        };
                        if better {
                            leave = Some(r);
                            best_ratio = best_ratio.min(ratio);
                        }
                    }
                }
            }
        }
        let Some(pr) = leave else {
            return Ok(PhaseOutcome::Unbounded);
        };
        if best_ratio <= 1e-12 {
            streak += 1;
            if streak >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            streak = 0;
        }
        t.pivot(pr, pc);
        *iterations += 1;
    }
}

fn load_objective(t: &mut Tableau, costs: &[f64]) {
    let w = t.width;
    let obj = t.obj_row();
    for c in 0..w {
        t.data[obj * w + c] = 0.0;
    }
    for (c, &v) in costs.iter().enumerate() {
        t.data[obj * w + c] = v;
    }
    for r in 0..t.m {
        let cb = costs[t.basis[r]];
        if cb == 0.0 {
            continue;
        }
        for c in 0..w {
            let v = t.data[r * w + c];
            if v != 0.0 {
                t.data[obj * w + c] -= cb * v;
            }
        }
    }
}

pub(super) fn solve(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    let sign = match lp.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };

    // Column mapping.
    let mut maps = Vec::with_capacity(n);
    let mut struct_cols = 0usize;
    let mut box_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.variable_lower_bounds[j], lp.variable_upper_bounds[j]);
        if lo > hi + tol.feasibility {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        let map = if lo.is_finite() {
            let col = struct_cols;
            struct_cols += 1;
            if hi.is_finite() {
                box_rows.push((col, (hi - lo).max(0.0)));
            }
            ColumnMap::Shift { col, offset: lo }
        } else if hi.is_finite() {
            let col = struct_cols;
            struct_cols += 1;
            ColumnMap::Reflect { col, offset: hi }
        } else {
            let pos = struct_cols;
            struct_cols += 2;
            ColumnMap::Split { pos, neg: pos + 1 }
        };
        maps.push(map);
    }

    let m_orig = lp.num_rows();
    let m = m_orig + box_rows.len();

    // Standard-form rows over structural columns.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut senses: Vec<ConstraintSense> = Vec::with_capacity(m);
    for r in 0..m_orig {
        let mut row = vec![0.0; struct_cols];
        let mut b = lp.right_hand_sides[r];
        for (j, &a) in lp.constraint_matrix[r].iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                ColumnMap::Shift { col, offset } => {
                    row[col] += a;
                    b -= a * offset;
                }
                ColumnMap::Reflect { col, offset } => {
                    row[col] -= a;
                    b -= a * offset;
                }
                ColumnMap::Split { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        rows.push(row);
        rhs.push(b);
        senses.push(lp.constraint_senses[r]);
    }
    for &(col, width) in &box_rows {
        let mut row = vec![0.0; struct_cols];
        row[col] = 1.0;
        rows.push(row);
        rhs.push(width);
        senses.push(ConstraintSense::Le);
    }

    // Slack columns, then artificial columns.
    let mut slack_of_row: Vec<Option<(usize, f64)>> = vec![None; m];
    let mut ncols = struct_cols;
    for r in 0..m {
        match senses[r] {
            ConstraintSense::Le => {
                slack_of_row[r] = Some((ncols, 1.0));
                ncols += 1;
            }
            ConstraintSense::Ge => {
                slack_of_row[r] = Some((ncols, -1.0));
                ncols += 1;
            }
            ConstraintSense::Eq => {}
        }
    }
    let mut row_sign = vec![1.0; m];
    for r in 0..m {
        if rhs[r] < 0.0 {
            row_sign[r] = -1.0;
        }
    }
    // An artificial is needed unless the (sign-normalized) slack is +1.
    let mut art_of_row: Vec<Option<usize>> = vec![None; m];
    for r in 0..m {
        let needs = match slack_of_row[r] {
            Some((_, s)) => s * row_sign[r] < 0.0,
            None => true,
        };
        if needs {
            art_of_row[r] = Some(ncols);
            ncols += 1;
        }
    }

    let width = ncols + 1;
    let mut data = vec![0.0; (m + 1) * width];
    let mut basis = vec![0usize; m];
    for r in 0..m {
        let s = row_sign[r];
        for (c, &v) in rows[r].iter().enumerate() {
            data[r * width + c] = s * v;
        }
        if let Some((c, v)) = slack_of_row[r] {
            data[r * width + c] = s * v;
        }
        if let Some(c) = art_of_row[r] {
            data[r * width + c] = 1.0;
            basis[r] = c;
        } else {
            basis[r] = slack_of_row[r].expect("row without artificial has a slack").0;
        }
        data[r * width + ncols] = s * rhs[r];
    }
    let mut t = Tableau { m, width, data, basis };

    let is_art: Vec<bool> = {
        let mut v = vec![false; ncols];
        for c in art_of_row.iter().flatten() {
            v[*c] = true;
        }
        v
    };
    let limit = 200 * (m + ncols) + 10_000;
    let mut iterations = 0usize;
    let rhs_scale = 1.0 + rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));

    // Phase 1.
    if is_art.iter().any(|&a| a) {
        let costs: Vec<f64> = is_art.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        load_objective(&mut t, &costs);
        let allowed = vec![true; ncols];
        run_phase(&mut t, &allowed, tol.optimality, &mut iterations, limit)?;
        let infeas: f64 = (0..m).filter(|&r| is_art[t.basis[r]]).map(|r| t.rhs(r).max(0.0)).sum();
        if infeas > tol.feasibility * rhs_scale {
            let mut sol = LpSolution::without_point(LpStatus::Infeasible);
            sol.iterations = iterations;
            return Ok(sol);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !is_art[t.basis[r]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for c in 0..ncols {
                if is_art[c] {
                    continue;
                }
                let a = t.at(r, c).abs();
                if a > PIVOT_TOL && best.map_or(true, |(_, b)| a > b) {
                    best = Some((c, a));
                }
            }
            if let Some((c, _)) = best {
                t.pivot(r, c);
            }
        }
    }

    // Phase 2.
    let mut costs = vec![0.0; ncols];
    for (j, map) in maps.iter().enumerate() {
        let c = sign * lp.objective_coefficients[j];
        match *map {
            ColumnMap::Shift { col, .. } => costs[col] += c,
            ColumnMap::Reflect { col, .. } => costs[col] -= c,
            ColumnMap::Split { pos, neg } => {
                costs[pos] += c;
                costs[neg] -= c;
            }
        }
    }
    load_objective(&mut t, &costs);
    let allowed: Vec<bool> = is_art.iter().map(|&a| !a).collect();
    let outcome = run_phase(&mut t, &allowed, tol.optimality, &mut iterations, limit)?;
    if let PhaseOutcome::Unbounded = outcome {
        let mut sol = LpSolution::without_point(LpStatus::Unbounded);
        sol.iterations = iterations;
        return Ok(sol);
    }

    let mut values = vec![0.0; ncols];
    for r in 0..m {
        values[t.basis[r]] = t.rhs(r).max(0.0);
    }
    let primal: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColumnMap::Shift { col, offset } => offset + values[col],
            ColumnMap::Reflect { col, offset } => offset - values[col],
            ColumnMap::Split { pos, neg } => values[pos] - values[neg],
        })
        .collect();

    // Row multipliers of the standard form from the reduced cost of a unit column:
    // d_u = 0 - y_r * sigma  =>  y_r = -d_u / sigma.
    let obj = t.obj_row();
    let mut duals = Vec::with_capacity(m_orig);
    for r in 0..m_orig {
        let y_std = if let Some((c, s)) = slack_of_row[r] {
            -t.at(obj, c) / (s * row_sign[r])
        } else {
            let c = art_of_row[r].expect("equality row carries an artificial");
            -t.at(obj, c)
        };
        // undo the row negation and the max->min flip
        duals.push(sign * row_sign[r] * y_std);
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&primal),
        primal_values: primal,
        dual_values: duals,
        iterations,
    })
}
