//! Two-stage robust instances with affine uncertainty and the solution value type.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Polytope;

/// Dense row-major matrix valued affine function of ω:
/// `constant + Σ_j ω_j · coefficients[j]`.
///
/// Vectors (such as the right-hand side) are `rows × 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub rows: usize,
    pub cols: usize,
    pub constant_term: Vec<f64>,
    pub coefficient_terms: Vec<Vec<f64>>,
}

impl AffineMap {
    pub fn new(rows: usize, cols: usize, constant_term: Vec<f64>, coefficient_terms: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let size = rows * cols;
        if constant_term.len() != size || coefficient_terms.iter().any(|t| t.len() != size) {
            return Err(ModelError::DimensionMismatch(format!("affine map terms must all have {rows}x{cols} entries")));
        }
        Ok(AffineMap { rows, cols, constant_term, coefficient_terms })
    }

    pub fn zeros(rows: usize, cols: usize, omega_dim: usize) -> Self {
        AffineMap {
            rows,
            cols,
            constant_term: vec![0.0; rows * cols],
            coefficient_terms: vec![vec![0.0; rows * cols]; omega_dim],
        }
    }

    /// Builds from per-row closures returning `(constant, [coeff per ω_j])` for each entry.
    pub fn from_entries(rows: usize, cols: usize, omega_dim: usize, entry: impl Fn(usize, usize) -> (f64, Vec<f64>)) -> Self {
        let mut m = AffineMap::zeros(rows, cols, omega_dim);
        for r in 0..rows {
            for c in 0..cols {
                let (k, coeffs) = entry(r, c);
                m.constant_term[r * cols + c] = k;
                for (j, v) in coeffs.into_iter().enumerate() {
                    m.coefficient_terms[j][r * cols + c] = v;
                }
            }
        }
        m
    }

    pub fn omega_dim(&self) -> usize {
        self.coefficient_terms.len()
    }

    pub fn entry(&self, r: usize, c: usize, omega: &[f64]) -> f64 {
        let i = r * self.cols + c;
        self.constant_term[i] + self.coefficient_terms.iter().zip(omega).map(|(t, w)| t[i] * w).sum::<f64>()
    }

    /// Row-major values at ω.
    pub fn eval(&self, omega: &[f64]) -> Vec<f64> {
        let mut out = self.constant_term.clone();
        for (t, &w) in self.coefficient_terms.iter().zip(omega) {
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(t) {
                *o += w * v;
            }
        }
        out
    }

    /// Whether every coefficient term vanishes (entrywise |·| ≤ 1e-12).
    pub fn is_constant(&self) -> bool {
        self.coefficient_terms.iter().flatten().all(|v| v.abs() <= 1e-12)
    }

    /// Matrix-vector product at ω.
    pub fn mul_vec(&self, omega: &[f64], v: &[f64]) -> Vec<f64> {
        let m = self.eval(omega);
        (0..self.rows).map(|r| (0..self.cols).map(|c| m[r * self.cols + c] * v[c]).sum()).collect()
    }
}

/// Closed interval with possibly infinite ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const FREE: Bounds = Bounds { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    pub const NONNEGATIVE: Bounds = Bounds { lower: 0.0, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Self {
        Bounds { lower, upper }
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }
}

/// `min c·x + max_i d·y_i  s.t.  A(ω)x + B(ω)y_i ≤ b(ω)` on every piece of a cover of Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub a: AffineMap,
    pub b_mat: AffineMap,
    pub rhs: AffineMap,
    pub omega: Polytope,
    pub x_bounds: Vec<Bounds>,
    pub y_bounds: Vec<Bounds>,
    pub x_integer: Vec<usize>,
    pub y_integer: Vec<usize>,
}

impl Instance {
    /// Assembles an instance and checks every shape invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        c: Vec<f64>,
        d: Vec<f64>,
        a: AffineMap,
        b_mat: AffineMap,
        rhs: AffineMap,
        omega: Polytope,
        x_bounds: Vec<Bounds>,
        y_bounds: Vec<Bounds>,
        x_integer: Vec<usize>,
        y_integer: Vec<usize>,
    ) -> Result<Self, ModelError> {
        let inst = Instance { name: name.into(), c, d, a, b_mat, rhs, omega, x_bounds, y_bounds, x_integer, y_integer };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let m = self.rhs.rows;
        let mismatch = |msg: String| Err(ModelError::DimensionMismatch(msg));
        if self.rhs.cols != 1 {
            return mismatch(format!("b must be a column vector, got {} columns", self.rhs.cols));
        }
        if self.a.rows != m || self.b_mat.rows != m {
            return mismatch(format!("A has {} rows, B has {}, b has {m}", self.a.rows, self.b_mat.rows));
        }
        if self.a.cols != self.c.len() {
            return mismatch(format!("A has {} columns but c has {} entries", self.a.cols, self.c.len()));
        }
        if self.b_mat.cols != self.d.len() {
            return mismatch(format!("B has {} columns but d has {} entries", self.b_mat.cols, self.d.len()));
        }
        let n = self.omega.ambient_dimension();
        for (name, map) in [("A", &self.a), ("B", &self.b_mat), ("b", &self.rhs)] {
            if map.omega_dim() != n {
                return mismatch(format!("{name} has {} uncertainty terms, Ω lives in R^{n}", map.omega_dim()));
            }
        }
        if self.x_bounds.len() != self.c.len() || self.y_bounds.len() != self.d.len() {
            return mismatch("bounds must have one interval per variable".into());
        }
        if self.x_integer.iter().any(|&j| j >= self.c.len()) || self.y_integer.iter().any(|&j| j >= self.d.len()) {
            return mismatch("integer index out of range".into());
        }
        let all_finite = self.c.iter().chain(&self.d).all(|v| v.is_finite())
            && [&self.a, &self.b_mat, &self.rhs]
                .iter()
                .all(|m| m.constant_term.iter().chain(m.coefficient_terms.iter().flatten()).all(|v| v.is_finite()));
        if !all_finite {
            return mismatch("non-finite coefficient".into());
        }
        for bd in self.x_bounds.iter().chain(&self.y_bounds) {
            if bd.lower.is_nan() || bd.upper.is_nan() || bd.lower > bd.upper {
                return mismatch(format!("invalid bounds [{}, {}]", bd.lower, bd.upper));
            }
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.rows
    }

    pub fn dim_x(&self) -> usize {
        self.c.len()
    }

    pub fn dim_y(&self) -> usize {
        self.d.len()
    }

    pub fn omega_dim(&self) -> usize {
        self.omega.ambient_dimension()
    }

    /// `A(ω)x + B(ω)y − b(ω)`; non-positive entries are satisfied rows.
    pub fn evaluate_constraints(&self, x: &[f64], y: &[f64], omega: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.dim_x() || y.len() != self.dim_y() || omega.len() != self.omega_dim() {
            return Err(ModelError::DimensionMismatch(format!(
                "expected x∈R^{}, y∈R^{}, ω∈R^{}; got {}, {}, {}",
                self.dim_x(),
                self.dim_y(),
                self.omega_dim(),
                x.len(),
                y.len(),
                omega.len()
            )));
        }
        let ax = self.a.mul_vec(omega, x);
        let by = self.b_mat.mul_vec(omega, y);
        let b = self.rhs.eval(omega);
        Ok((0..self.num_rows()).map(|r| ax[r] + by[r] - b[r]).collect())
    }

    /// True iff A and B do not depend on ω.
    pub fn is_deterministic_ab(&self) -> bool {
        self.a.is_constant() && self.b_mat.is_constant()
    }

    /// `c·x + max_i d·y_i`.
    pub fn objective_value(&self, sol: &Solution) -> Result<f64, ModelError> {
        self.objective_of(&sol.x, &sol.ys)
    }

    pub fn objective_of(&self, x: &[f64], ys: &[Vec<f64>]) -> Result<f64, ModelError> {
        if x.len() != self.dim_x() || ys.is_empty() || ys.iter().any(|y| y.len() != self.dim_y()) {
            return Err(ModelError::DimensionMismatch("solution shape does not match the instance".into()));
        }
        let first: f64 = dot(&self.c, x);
        let second = ys.iter().map(|y| dot(&self.d, y)).fold(f64::NEG_INFINITY, f64::max);
        Ok(first + second)
    }

    /// `b(ω)` at a vertex of Ω.
    pub fn rhs_at(&self, omega: &[f64]) -> Vec<f64> {
        self.rhs.eval(omega)
    }

    /// Row-major `A` and `B` (constant terms; meaningful when deterministic).
    pub fn a_const(&self, r: usize, j: usize) -> f64 {
        self.a.constant_term[r * self.a.cols + j]
    }

    pub fn b_const(&self, r: usize, j: usize) -> f64 {
        self.b_mat.constant_term[r * self.b_mat.cols + j]
    }

    /// `max_{v ∈ V(Ω)} ‖b(v)‖∞`.
    pub fn max_rhs_norm(&self) -> f64 {
        self.omega
            .vertices()
            .iter()
            .flat_map(|v| self.rhs.eval(v))
            .fold(0.0_f64, |a, b| a.max(b.abs()))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Which program produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Adapt1,
    CompAdapt,
    OneDimensional,
    Enumeration,
    Milp,
    ScenarioBound,
    Reference,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Adapt1 => "adapt1",
            Method::CompAdapt => "comp_adapt",
            Method::OneDimensional => "one_dimensional",
            Method::Enumeration => "enumeration",
            Method::Milp => "milp",
            Method::ScenarioBound => "scenario_bound",
            Method::Reference => "reference",
        }
    }
}

/// One inequality `normal · ω ≤ offset` of a recovered piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn slack(&self, omega: &[f64]) -> f64 {
        self.offset - dot(&self.normal, omega)
    }
}

/// H-representation of `{ω ∈ Ω : A(ω)x + B(ω)y_i ≤ b(ω)}` (intersected with Ω implicitly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub index: usize,
    pub rows: Vec<HalfSpace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub objective: f64,
    pub method: Method,
    pub pieces: Option<Vec<Piece>>,
}

impl Solution {
    pub fn k(&self) -> usize {
        self.ys.len()
    }
}
