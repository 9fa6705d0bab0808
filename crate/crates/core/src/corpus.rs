//! Built-in instances with known values and reference solutions, plus a
//! seeded random generator for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Polytope;
use crate::model::{AffineMap, Bounds, Instance, Method, Solution};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown corpus instance `{0}`")]
pub struct UnknownInstance(pub String);

/// Which optimal value a [`KnownValue`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Adapt(usize),
    CompAdapt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Expected {
    Value(f64),
    Infeasible,
}

/// Where a known value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// Stated for the published counter-examples.
    Literature,
    /// Worked out by hand for the synthetic instances.
    HandDerivation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownValue {
    pub target: Target,
    pub expected: Expected,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub instance: Instance,
    pub known_values: Vec<KnownValue>,
    pub reference_solutions: Vec<Solution>,
}

impl CorpusEntry {
    pub fn known(&self, target: Target) -> Option<Expected> {
        self.known_values.iter().find(|k| k.target == target).map(|k| k.expected)
    }
}

pub const NAMES: &[&str] = &["P", "Q", "R", "interval", "square", "triangle", "fixed", "fixed-square"];

pub fn get_instance(name: &str) -> Result<CorpusEntry, UnknownInstance> {
    match name {
        "P" => Ok(problem_p()),
        "Q" => Ok(problem_q()),
        "R" => Ok(problem_r()),
        "interval" => Ok(interval()),
        "square" => Ok(square()),
        "triangle" => Ok(triangle()),
        "fixed" => Ok(fixed(false)),
        "fixed-square" => Ok(fixed(true)),
        other => Err(UnknownInstance(other.to_string())),
    }
}

fn known(target: Target, expected: Expected, source: Source) -> KnownValue {
    KnownValue { target, expected, source }
}

fn reference(x: Vec<f64>, ys: Vec<Vec<f64>>, objective: f64) -> Solution {
    Solution { x, ys, objective, method: Method::Reference, pieces: None }
}

fn unit_interval() -> Polytope {
    Polytope::build(&[vec![0.0], vec![1.0]]).expect("unit interval")
}

fn unit_square() -> Polytope {
    Polytope::build(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).expect("unit square")
}

/// Rows given as `(A const, A coeff per ω, B const, B coeff per ω, b const, b coeff per ω)`.
struct RowSpec {
    a: (Vec<f64>, Vec<Vec<f64>>),
    b_mat: (Vec<f64>, Vec<Vec<f64>>),
    rhs: (f64, Vec<f64>),
}

fn assemble(name: &str, c: Vec<f64>, d: Vec<f64>, rows: Vec<RowSpec>, omega: Polytope, xb: Vec<Bounds>, yb: Vec<Bounds>, yint: Vec<usize>) -> Instance {
    let m = rows.len();
    let n = omega.ambient_dimension();
    let (nx, ny) = (c.len(), d.len());
    let a = AffineMap::from_entries(m, nx, n, |r, j| (rows[r].a.0[j], rows[r].a.1.iter().map(|t| t[j]).collect()));
    let b_mat = AffineMap::from_entries(m, ny, n, |r, j| (rows[r].b_mat.0[j], rows[r].b_mat.1.iter().map(|t| t[j]).collect()));
    let rhs = AffineMap::from_entries(m, 1, n, |r, _| (rows[r].rhs.0, rows[r].rhs.1.clone()));
    Instance::new(name, c, d, a, b_mat, rhs, omega, xb, yb, vec![], yint).expect("corpus instance is well-formed")
}

fn row(a: Vec<f64>, a_w: Vec<Vec<f64>>, b: Vec<f64>, b_w: Vec<Vec<f64>>, rhs: f64, rhs_w: Vec<f64>) -> RowSpec {
    RowSpec { a: (a, a_w), b_mat: (b, b_w), rhs: (rhs, rhs_w) }
}

/// min x1 s.t. x2 − x3 ≤ x1, x3 ≤ ωx4 ≤ x2, (ω+2)y + (3−ω)x4 = 10, all ≥ 0, Ω = [0,1].
fn problem_p() -> CorpusEntry {
    let z4 = vec![0.0; 4];
    let rows = vec![
        row(vec![-1.0, 1.0, -1.0, 0.0], vec![z4.clone()], vec![0.0], vec![vec![0.0]], 0.0, vec![0.0]),
        row(vec![0.0, 0.0, 1.0, 0.0], vec![vec![0.0, 0.0, 0.0, -1.0]], vec![0.0], vec![vec![0.0]], 0.0, vec![0.0]),
        row(vec![0.0, -1.0, 0.0, 0.0], vec![vec![0.0, 0.0, 0.0, 1.0]], vec![0.0], vec![vec![0.0]], 0.0, vec![0.0]),
        row(vec![0.0, 0.0, 0.0, 3.0], vec![vec![0.0, 0.0, 0.0, -1.0]], vec![2.0], vec![vec![1.0]], 10.0, vec![0.0]),
        row(vec![0.0, 0.0, 0.0, -3.0], vec![vec![0.0, 0.0, 0.0, 1.0]], vec![-2.0], vec![vec![-1.0]], -10.0, vec![0.0]),
    ];
    let instance = assemble(
        "P",
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0],
        rows,
        unit_interval(),
        vec![Bounds::NONNEGATIVE; 4],
        vec![Bounds::NONNEGATIVE],
        vec![],
    );
    CorpusEntry {
        instance,
        known_values: vec![
            known(Target::CompAdapt, Expected::Value(0.0), Source::Literature),
            known(Target::Adapt(1), Expected::Value(2.0), Source::Literature),
            known(Target::Adapt(2), Expected::Value(2.0), Source::Literature),
            known(Target::Adapt(3), Expected::Value(2.0), Source::Literature),
        ],
        reference_solutions: vec![reference(vec![2.0, 2.0, 0.0, 2.0], vec![vec![2.0]], 2.0)],
    }
}

/// min x1 s.t. ω − x1 ≤ y ≤ ω + x1, x1(ω − 0.1) ≤ x2 ≤ x1(ω + 0.1), x, y ∈ [0,1], Ω = [0,1].
fn problem_q() -> CorpusEntry {
    let rows = vec![
        row(vec![-1.0, 0.0], vec![vec![0.0, 0.0]], vec![-1.0], vec![vec![0.0]], 0.0, vec![-1.0]),
        row(vec![-1.0, 0.0], vec![vec![0.0, 0.0]], vec![1.0], vec![vec![0.0]], 0.0, vec![1.0]),
        row(vec![-0.1, -1.0], vec![vec![1.0, 0.0]], vec![0.0], vec![vec![0.0]], 0.0, vec![0.0]),
        row(vec![-0.1, 1.0], vec![vec![-1.0, 0.0]], vec![0.0], vec![vec![0.0]], 0.0, vec![0.0]),
    ];
    let unit = Bounds::new(0.0, 1.0);
    let instance = assemble("Q", vec![1.0, 0.0], vec![0.0], rows, unit_interval(), vec![unit; 2], vec![unit], vec![]);
    CorpusEntry {
        instance,
        known_values: vec![
            known(Target::CompAdapt, Expected::Value(0.0), Source::Literature),
            known(Target::Adapt(1), Expected::Infeasible, Source::Literature),
            known(Target::Adapt(2), Expected::Infeasible, Source::Literature),
            known(Target::Adapt(3), Expected::Infeasible, Source::Literature),
        ],
        reference_solutions: vec![],
    }
}

/// min 0 s.t. (ω2 − ω1)y ≤ 1 − ω1, (ω1 − ω2)y ≤ 1 + ω1, y ∈ {0,1}, Ω the diamond of radius 2.
fn problem_r() -> CorpusEntry {
    let rows = vec![
        row(vec![], vec![vec![], vec![]], vec![0.0], vec![vec![-1.0], vec![1.0]], 1.0, vec![-1.0, 0.0]),
        row(vec![], vec![vec![], vec![]], vec![0.0], vec![vec![1.0], vec![-1.0]], 1.0, vec![1.0, 0.0]),
    ];
    let omega = Polytope::build(&[vec![-2.0, 0.0], vec![0.0, -2.0], vec![2.0, 0.0], vec![0.0, 2.0]]).expect("diamond");
    let instance = assemble("R", vec![], vec![0.0], rows, omega, vec![], vec![Bounds::new(0.0, 1.0)], vec![0]);
    CorpusEntry {
        instance,
        known_values: vec![
            known(Target::Adapt(1), Expected::Infeasible, Source::HandDerivation),
            known(Target::Adapt(2), Expected::Value(0.0), Source::Literature),
        ],
        reference_solutions: vec![reference(vec![], vec![vec![0.0], vec![1.0]], 0.0)],
    }
}

/// y ∈ [ω, ω + 0.5] on Ω = [0,1], minimize the worst y.
fn interval() -> CorpusEntry {
    let rows = vec![
        row(vec![], vec![vec![]], vec![-1.0], vec![vec![0.0]], 0.0, vec![-1.0]),
        row(vec![], vec![vec![]], vec![1.0], vec![vec![0.0]], 0.5, vec![1.0]),
    ];
    let instance = assemble("interval", vec![], vec![1.0], rows, unit_interval(), vec![], vec![Bounds::FREE], vec![]);
    CorpusEntry {
        instance,
        known_values: vec![
            known(Target::CompAdapt, Expected::Value(1.0), Source::HandDerivation),
            known(Target::Adapt(1), Expected::Infeasible, Source::HandDerivation),
            known(Target::Adapt(2), Expected::Value(1.0), Source::HandDerivation),
            known(Target::Adapt(3), Expected::Value(1.0), Source::HandDerivation),
        ],
        reference_solutions: vec![reference(vec![], vec![vec![0.5], vec![1.0]], 1.0)],
    }
}

/// y ∈ [ω1 + ω2, ω1 + ω2 + 1.5] on the unit square.
fn square() -> CorpusEntry {
    let rows = vec![
        row(vec![], vec![vec![], vec![]], vec![-1.0], vec![vec![0.0], vec![0.0]], 0.0, vec![-1.0, -1.0]),
        row(vec![], vec![vec![], vec![]], vec![1.0], vec![vec![0.0], vec![0.0]], 1.5, vec![1.0, 1.0]),
    ];
    let instance = assemble("square", vec![], vec![1.0], rows, unit_square(), vec![], vec![Bounds::FREE], vec![]);
    CorpusEntry {
        instance,
        known_values: vec![
            known(Target::CompAdapt, Expected::Value(2.0), Source::HandDerivation),
            known(Target::Adapt(1), Expected::Infeasible, Source::HandDerivation),
            known(Target::Adapt(2), Expected::Value(2.0), Source::HandDerivation),
            known(Target::Adapt(3), Expected::Value(2.0), Source::HandDerivation),
        ],
        reference_solutions: vec![reference(vec![], vec![vec![0.5], vec![2.0]], 2.0)],
    }
}

/// y ∈ [g(ω) − 0.4, g(ω) + 0.4] with g = ω1 + 2ω2 on the standard triangle.
fn triangle() -> CorpusEntry {
    let rows = vec![
        row(vec![], vec![vec![], vec![]], vec![-1.0], vec![vec![0.0], vec![0.0]], 0.4, vec![-1.0, -2.0]),
        row(vec![], vec![vec![], vec![]], vec![1.0], vec![vec![0.0], vec![0.0]], 0.4, vec![1.0, 2.0]),
    ];
    let omega = Polytope::build(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).expect("triangle");
    let instance = assemble("triangle", vec![], vec![1.0], rows, omega, vec![], vec![Bounds::FREE], vec![]);
    CorpusEntry {
        instance,
        known_values: vec![
            known(Target::CompAdapt, Expected::Value(1.6), Source::HandDerivation),
            known(Target::Adapt(1), Expected::Infeasible, Source::HandDerivation),
            known(Target::Adapt(2), Expected::Infeasible, Source::HandDerivation),
            known(Target::Adapt(3), Expected::Value(1.6), Source::HandDerivation),
        ],
        reference_solutions: vec![reference(vec![], vec![vec![0.4], vec![1.0], vec![1.6]], 1.6)],
    }
}

/// min x s.t. x ≥ 3, with nothing depending on ω.
fn fixed(square: bool) -> CorpusEntry {
    let (omega, name) = if square { (unit_square(), "fixed-square") } else { (unit_interval(), "fixed") };
    let n = omega.ambient_dimension();
    let rows = vec![row(vec![-1.0], vec![vec![0.0]; n], vec![], vec![vec![]; n], -3.0, vec![0.0; n])];
    let instance = assemble(name, vec![1.0], vec![], rows, omega, vec![Bounds::FREE], vec![], vec![]);
    let mut known_values = vec![known(Target::CompAdapt, Expected::Value(3.0), Source::HandDerivation)];
    for k in 1..=3 {
        known_values.push(known(Target::Adapt(k), Expected::Value(3.0), Source::HandDerivation));
    }
    CorpusEntry { instance, known_values, reference_solutions: vec![reference(vec![3.0], vec![vec![]], 3.0)] }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// A random instance with deterministic A and B, reproducible from `seed`.
///
/// One first-stage and one second-stage variable; rows come in pairs
/// `g(ω) − w ≤ a·(x, y) ≤ g(ω) + w` so that adaptivity matters. Ω is a segment
/// (`dim = 1`) or a polygon with at most five vertices (`dim = 2`).
///
/// # Panics
/// If `dim` is not 1 or 2, or `rows` is not in `1..=8`.
pub fn generate_random(seed: u64, dim: usize, rows: usize) -> Instance {
    assert!((1..=2).contains(&dim), "dim must be 1 or 2");
    assert!((1..=8).contains(&rows), "rows must be in 1..=8");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = if dim == 1 {
        let lo = round3(rng.gen_range(-1.0..0.0));
        let hi = round3(rng.gen_range(0.5..1.5));
        Polytope::build(&[vec![lo], vec![hi]]).expect("segment")
    } else {
        loop {
            let count = rng.gen_range(3..=5);
            let mut angles: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            angles.sort_by(f64::total_cmp);
            let pts: Vec<Vec<f64>> = angles
                .iter()
                .map(|a| {
                    let r = rng.gen_range(0.6..1.0);
                    vec![round3(r * a.cos()), round3(r * a.sin())]
                })
                .collect();
            if let Ok(p) = Polytope::build(&pts) {
                if p.affine_dimension() == 2 {
                    break p;
                }
            }
        }
    };

    let mut specs = Vec::with_capacity(rows);
    while specs.len() < rows {
        let ax = round3(rng.gen_range(-1.0..1.0));
        let ay = round3(rng.gen_range(0.5..1.5)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let g0 = round3(rng.gen_range(-1.0..1.0));
        let gw: Vec<f64> = (0..dim).map(|_| round3(rng.gen_range(-1.5..1.5))).collect();
        let w = round3(rng.gen_range(0.2..1.0));
        let zeros = vec![vec![0.0]; dim];
        specs.push(row(vec![ax], zeros.clone(), vec![ay], zeros.clone(), g0 + w, gw.clone()));
        if specs.len() < rows {
            specs.push(row(vec![-ax], zeros.clone(), vec![-ay], zeros, w - g0, gw.iter().map(|v| -v).collect()));
        }
    }
    let c = vec![round3(rng.gen_range(-1.0..1.0))];
    let d = vec![round3(rng.gen_range(-1.0..1.0))];
    assemble(
        &format!("random-{seed}-{dim}-{rows}"),
        c,
        d,
        specs,
        omega,
        vec![Bounds::new(-1.0, 1.0)],
        vec![Bounds::new(-4.0, 4.0)],
        vec![],
    )
}
