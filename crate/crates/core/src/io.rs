//! JSON wire formats: instance files, solution files and scenario lists.
//!
//! Instance files hold `A`, `B` and `b` as `{"const": …, "coeffs": […]}` with
//! one coefficient term per coordinate of ω. Matrices are arrays of rows;
//! `b` is a flat array. Bounds are `[lo, hi]` pairs where `null` means
//! unbounded.

use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::geometry::Polytope;
use crate::model::{AffineMap, Bounds, Instance, Method, Piece, Solution};
use crate::verify::{CoverCertificate, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixTerm {
    #[serde(rename = "const")]
    pub constant: Vec<Vec<f64>>,
    #[serde(default)]
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorTerm {
    #[serde(rename = "const")]
    pub constant: Vec<f64>,
    #[serde(default)]
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub name: String,
    pub omega_vertices: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    #[serde(rename = "A")]
    pub a: MatrixTerm,
    #[serde(rename = "B")]
    pub b_mat: MatrixTerm,
    #[serde(rename = "b")]
    pub rhs: VectorTerm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_bounds: Option<Vec<[Option<f64>; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_bounds: Option<Vec<[Option<f64>; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_integer: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y_integer: Vec<usize>,
}

fn matrix_map(field: &str, term: &MatrixTerm, rows: usize, cols: usize, omega_dim: usize) -> Result<AffineMap, FormatError> {
    let flatten = |what: &str, m: &[Vec<f64>]| -> Result<Vec<f64>, FormatError> {
        if m.len() != rows {
            return Err(FormatError::field(field, format!("{what} has {} rows, expected {rows}", m.len())));
        }
        if let Some((r, row)) = m.iter().enumerate().find(|(_, row)| row.len() != cols) {
            return Err(FormatError::field(field, format!("{what} row {r} has {} entries, expected {cols}", row.len())));
        }
        Ok(m.iter().flatten().copied().collect())
    };
    if term.coeffs.len() != omega_dim {
        return Err(FormatError::field(
            field,
            format!("{} coefficient terms, expected one per coordinate of Ω ({omega_dim})", term.coeffs.len()),
        ));
    }
    let constant = flatten("const", &term.constant)?;
    let coeffs = term
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, m)| flatten(&format!("coeffs[{j}]"), m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AffineMap::new(rows, cols, constant, coeffs)?)
}

fn vector_map(term: &VectorTerm, rows: usize, omega_dim: usize) -> Result<AffineMap, FormatError> {
    if term.coeffs.len() != omega_dim {
        return Err(FormatError::field(
            "b",
            format!("{} coefficient terms, expected one per coordinate of Ω ({omega_dim})", term.coeffs.len()),
        ));
    }
    if let Some((j, t)) = term.coeffs.iter().enumerate().find(|(_, t)| t.len() != rows) {
        return Err(FormatError::field("b", format!("coeffs[{j}] has {} entries, expected {rows}", t.len())));
    }
    Ok(AffineMap::new(rows, 1, term.constant.clone(), term.coeffs.clone())?)
}

fn parse_bounds(field: &str, raw: &Option<Vec<[Option<f64>; 2]>>, n: usize) -> Result<Vec<Bounds>, FormatError> {
    match raw {
        None => Ok(vec![Bounds::FREE; n]),
        Some(v) if v.len() != n => Err(FormatError::field(field, format!("{} intervals for {n} variables", v.len()))),
        Some(v) => v
            .iter()
            .enumerate()
            .map(|(j, [lo, hi])| {
                let b = Bounds::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY));
                if b.lower > b.upper {
                    Err(FormatError::field(field, format!("interval {j} is empty: [{}, {}]", b.lower, b.upper)))
                } else {
                    Ok(b)
                }
            })
            .collect(),
    }
}

fn bound_pairs(bounds: &[Bounds]) -> Vec<[Option<f64>; 2]> {
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    bounds.iter().map(|b| [finite(b.lower), finite(b.upper)]).collect()
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, FormatError> {
        if self.omega_vertices.is_empty() {
            return Err(FormatError::field("omega_vertices", "at least one point is required"));
        }
        let omega = Polytope::build(&self.omega_vertices)
            .map_err(|e| FormatError::field("omega_vertices", e.to_string()))?;
        let n = omega.ambient_dimension();
        let m = self.rhs.constant.len();
        let a = matrix_map("A", &self.a, m, self.c.len(), n)?;
        let b_mat = matrix_map("B", &self.b_mat, m, self.d.len(), n)?;
        let rhs = vector_map(&self.rhs, m, n)?;
        let x_bounds = parse_bounds("x_bounds", &self.x_bounds, self.c.len())?;
        let y_bounds = parse_bounds("y_bounds", &self.y_bounds, self.d.len())?;
        if let Some(&j) = self.x_integer.iter().find(|&&j| j >= self.c.len()) {
            return Err(FormatError::field("x_integer", format!("index {j} out of range")));
        }
        if let Some(&j) = self.y_integer.iter().find(|&&j| j >= self.d.len()) {
            return Err(FormatError::field("y_integer", format!("index {j} out of range")));
        }
        Ok(Instance::new(self.name, self.c, self.d, a, b_mat, rhs, omega, x_bounds, y_bounds, self.x_integer, self.y_integer)?)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let matrix = |map: &AffineMap| MatrixTerm {
            constant: rows_of(&map.constant_term, map.rows, map.cols),
            coeffs: map.coefficient_terms.iter().map(|t| rows_of(t, map.rows, map.cols)).collect(),
        };
        InstanceFile {
            name: inst.name.clone(),
            omega_vertices: inst.omega.vertices().to_vec(),
            c: inst.c.clone(),
            d: inst.d.clone(),
            a: matrix(&inst.a),
            b_mat: matrix(&inst.b_mat),
            rhs: VectorTerm { constant: inst.rhs.constant_term.clone(), coeffs: inst.rhs.coefficient_terms.clone() },
            x_bounds: Some(bound_pairs(&inst.x_bounds)),
            y_bounds: Some(bound_pairs(&inst.y_bounds)),
            x_integer: inst.x_integer.clone(),
            y_integer: inst.y_integer.clone(),
        }
    }
}

fn rows_of(flat: &[f64], rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|r| flat[r * cols..(r + 1) * cols].to_vec()).collect()
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.into_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance files serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// `null` when not finite.
    pub max_uncovered_slack: Option<f64>,
}

impl From<&CoverCertificate> for CertificateFile {
    fn from(c: &CoverCertificate) -> Self {
        CertificateFile {
            verdict: c.verdict,
            witness: c.witness.clone(),
            max_uncovered_slack: c.max_uncovered_slack.is_finite().then_some(c.max_uncovered_slack),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    #[serde(default = "optimal")]
    pub status: SolveStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<Piece>>,
    /// Breakpoints of the one-dimensional program.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
}

fn optimal() -> SolveStatus {
    SolveStatus::Optimal
}

impl SolutionFile {
    pub fn status_only(status: SolveStatus, method: Method, k: usize) -> Self {
        SolutionFile {
            status,
            x: None,
            ys: None,
            objective: None,
            method: Some(method),
            k: Some(k),
            certificate: None,
            pieces: None,
            breakpoints: None,
        }
    }

    pub fn from_solution(sol: &Solution, cert: Option<&CoverCertificate>) -> Self {
        SolutionFile {
            status: SolveStatus::Optimal,
            x: Some(sol.x.clone()),
            ys: Some(sol.ys.clone()),
            objective: Some(sol.objective),
            method: Some(sol.method),
            k: Some(sol.k()),
            certificate: cert.map(CertificateFile::from),
            pieces: sol.pieces.clone(),
            breakpoints: None,
        }
    }

    /// The `(x, ys)` point; the objective defaults to the value recomputed from the instance.
    pub fn to_solution(&self, inst: &Instance) -> Result<Solution, FormatError> {
        if self.status != SolveStatus::Optimal {
            return Err(FormatError::field("status", "file records no solution"));
        }
        let x = self.x.clone().unwrap_or_default();
        let ys = self.ys.clone().ok_or_else(|| FormatError::field("ys", "missing"))?;
        if ys.is_empty() {
            return Err(FormatError::field("ys", "at least one second-stage vector is required"));
        }
        if let Some(k) = self.k {
            if k != ys.len() {
                return Err(FormatError::field("k", format!("k = {k} but {} second-stage vectors", ys.len())));
            }
        }
        if x.len() != inst.dim_x() {
            return Err(FormatError::field("x", format!("{} entries, instance has {}", x.len(), inst.dim_x())));
        }
        if let Some((i, y)) = ys.iter().enumerate().find(|(_, y)| y.len() != inst.dim_y()) {
            return Err(FormatError::field("ys", format!("vector {i} has {} entries, instance has {}", y.len(), inst.dim_y())));
        }
        if x.iter().chain(ys.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(FormatError::field("x/ys", "non-finite entry"));
        }
        let computed = inst.objective_of(&x, &ys)?;
        Ok(Solution {
            x,
            ys,
            objective: self.objective.unwrap_or(computed),
            method: self.method.unwrap_or(Method::Reference),
            pieces: self.pieces.clone(),
        })
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn solution_to_json(file: &SolutionFile) -> String {
    serde_json::to_string_pretty(file).expect("solution files serialize")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioPoint {
    Scalar(f64),
    Point(Vec<f64>),
}

/// A JSON array of points; bare numbers are read as one-dimensional points.
pub fn parse_scenarios(text: &str) -> Result<Vec<Vec<f64>>, FormatError> {
    let raw: Vec<ScenarioPoint> = serde_json::from_str(text)?;
    let pts: Vec<Vec<f64>> = raw
        .into_iter()
        .map(|p| match p {
            ScenarioPoint::Scalar(v) => vec![v],
            ScenarioPoint::Point(v) => v,
        })
        .collect();
    if let Some(i) = pts.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(FormatError::field(format!("[{i}]"), "non-finite coordinate"));
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{get_instance, NAMES};

    #[test]
    fn corpus_round_trips() {
        for name in NAMES {
            let inst = get_instance(name).unwrap().instance;
            let text = instance_to_json(&inst);
            let back = parse_instance(&text).unwrap();
            assert_eq!(back, inst, "{name}");
        }
    }

    #[test]
    fn truncated_json_reports_position() {
        let text = instance_to_json(&get_instance("P").unwrap().instance);
        let cut = &text[..text.len() / 2];
        match parse_instance(cut) {
            Err(FormatError::Json { line, .. }) => assert!(line > 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_errors_name_the_field() {
        let inst = get_instance("interval").unwrap().instance;
        let mut file = InstanceFile::from_instance(&inst);
        file.b_mat.constant.pop();
        match file.into_instance() {
            Err(FormatError::Field { field, .. }) => assert_eq!(field, "B"),
            other => panic!("unexpected {other:?}"),
        }
        let mut file = InstanceFile::from_instance(&inst);
        file.y_bounds = Some(vec![[Some(2.0), Some(1.0)]]);
        assert!(matches!(file.into_instance(), Err(FormatError::Field { field, .. }) if field == "y_bounds"));
    }

    #[test]
    fn null_bounds_are_infinite() {
        let text = r#"{"name":"t","omega_vertices":[[0],[1]],"c":[],"d":[1],
            "A":{"const":[[]],"coeffs":[[[]]]},"B":{"const":[[-1]],"coeffs":[[[0]]]},
            "b":{"const":[0],"coeffs":[[-1]]},"y_bounds":[[null, 4]]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.y_bounds[0], Bounds::new(f64::NEG_INFINITY, 4.0));
    }

    #[test]
    fn minimal_solution_file() {
        let inst = get_instance("P").unwrap().instance;
        let f = parse_solution(r#"{"x":[0,0,0,0],"ys":[[5]]}"#).unwrap();
        let s = f.to_solution(&inst).unwrap();
        assert_eq!(s.objective, 0.0);
        assert!(parse_solution(r#"{"x":[0],"ys":[[5]],"bogus":1}"#).is_err());
        assert!(parse_solution(r#"{"x":[0],"ys":[[5]]}"#).unwrap().to_solution(&inst).is_err());
    }

    #[test]
    fn scenario_lists() {
        assert_eq!(parse_scenarios("[0, 0.5, [1]]").unwrap(), vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert!(parse_scenarios("[[0, 1], ").is_err());
    }
}
