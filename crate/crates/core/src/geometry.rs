//! Polytopes from vertex lists: extreme points, face lattice up to the 2-faces
//! (plus the top face), oriented edges and point membership.
//!
//! Faces are found by brute force. Every affinely independent subset of
//! `dim` vertices spans a candidate hyperplane inside the affine hull; it is a
//! facet hyperplane iff all vertices lie weakly on one side. Lower faces are
//! intersections of facet vertex sets.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::lp::{solve_lp_with, ConstraintSense, LpBuilder, LpStatus, ObjectiveSense};
use crate::tolerances::Tolerances;

/// Size caps for the brute-force face enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolytopeLimits {
    pub max_points: usize,
    pub max_dim: usize,
}

impl Default for PolytopeLimits {
    fn default() -> Self {
        PolytopeLimits { max_points: 12, max_dim: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub vertex_indices: Vec<usize>,
    pub dimension: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub tail_index: usize,
    pub head_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    ambient_dimension: usize,
    affine_dimension: usize,
    faces: Vec<Face>,
    edges: Vec<OrientedEdge>,
}

pub fn build_polytope(points: &[Vec<f64>]) -> Result<Polytope, GeometryError> {
    Polytope::build_with(points, PolytopeLimits::default(), &Tolerances::default())
}

impl Polytope {
    pub fn build(points: &[Vec<f64>]) -> Result<Polytope, GeometryError> {
        build_polytope(points)
    }

    pub fn build_with(
        points: &[Vec<f64>],
        limits: PolytopeLimits,
        tol: &Tolerances,
    ) -> Result<Polytope, GeometryError> {
        let Some(first) = points.first() else {
            return Err(GeometryError::DegenerateInput("no points".into()));
        };
        let n = first.len();
        if points.iter().any(|p| p.len() != n) {
            return Err(GeometryError::DegenerateInput("points of differing dimension".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::DegenerateInput("non-finite coordinate".into()));
        }
        if points.len() > limits.max_points || n > limits.max_dim {
            return Err(GeometryError::TooLarge {
                points: points.len(),
                dim: n,
                max_points: limits.max_points,
                max_dim: limits.max_dim,
            });
        }

        let mut unique: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if !unique.iter().any(|q| dist(p, q) <= tol.point) {
                unique.push(p.clone());
            }
        }

        let (rank, coords) = intrinsic_coordinates(&unique, tol.rank);
        let scale = 1.0 + coords.iter().flatten().fold(0.0_f64, |a, b| a.max(b.abs()));
        let plane_tol = 1e-9 * scale;

        // extreme points
        let keep: Vec<usize> = match rank {
            0 => vec![0],
            1 => {
                let (mut lo, mut hi) = (0, 0);
                for (i, c) in coords.iter().enumerate() {
                    if c[0] < coords[lo][0] {
                        lo = i;
                    }
                    if c[0] > coords[hi][0] {
                        hi = i;
                    }
                }
                let mut v = vec![lo, hi];
                v.sort_unstable();
                v
            }
            _ => {
                let mut v = Vec::new();
                for i in 0..coords.len() {
                    let others: Vec<&[f64]> =
                        coords.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c.as_slice()).collect();
                    if linf_distance_to_hull(&others, &coords[i], tol)? > plane_tol {
                        v.push(i);
                    }
                }
                v
            }
        };
        let vertices: Vec<Vec<f64>> = keep.iter().map(|&i| unique[i].clone()).collect();
        let vcoords: Vec<Vec<f64>> = keep.iter().map(|&i| coords[i].clone()).collect();
        let nv = vertices.len();

        let mut face_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
        face_sets.insert((0..nv).collect());
        for v in 0..nv {
            face_sets.insert(vec![v]);
        }
        if rank == 1 {
            // the segment itself is the only edge
        } else if rank >= 2 {
            let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
            for subset in combinations(nv, rank) {
                let base = &vcoords[subset[0]];
                let diffs: Vec<Vec<f64>> =
                    subset[1..].iter().map(|&s| sub(&vcoords[s], base)).collect();
                let Some(normal) = hyperplane_normal(&diffs, rank) else { continue };
                let offset = dot(&normal, base);
                let side: Vec<f64> = vcoords.iter().map(|q| dot(&normal, q) - offset).collect();
                let above = side.iter().any(|&s| s > plane_tol);
                let below = side.iter().any(|&s| s < -plane_tol);
                if above && below {
                    continue;
                }
                let on: Vec<usize> = (0..nv).filter(|&v| side[v].abs() <= plane_tol).collect();
                facets.insert(on);
            }
            // close under intersection
            let mut all: BTreeSet<Vec<usize>> = facets.clone();
            loop {
                let current: Vec<Vec<usize>> = all.iter().cloned().collect();
                let mut added = false;
                for (a, fa) in current.iter().enumerate() {
                    for fb in &current[a + 1..] {
                        let inter: Vec<usize> = fa.iter().filter(|v| fb.contains(v)).copied().collect();
                        if !inter.is_empty() && all.insert(inter) {
                            added = true;
                        }
                    }
                }
                if !added {
                    break;
                }
            }
            face_sets.extend(all);
        }

        let mut faces: Vec<Face> = face_sets
            .into_iter()
            .map(|vs| {
                let pts: Vec<Vec<f64>> = vs.iter().map(|&v| vcoords[v].clone()).collect();
                let dimension = affine_rank(&pts, tol.rank);
                Face { vertex_indices: vs, dimension }
            })
            .collect();
        faces.sort_by(|a, b| a.dimension.cmp(&b.dimension).then_with(|| a.vertex_indices.cmp(&b.vertex_indices)));

        let mut edges: Vec<OrientedEdge> = faces
            .iter()
            .filter(|f| f.dimension == 1)
            .map(|f| {
                let (a, b) = (f.vertex_indices[0], f.vertex_indices[f.vertex_indices.len() - 1]);
                if lex_less(&vertices[b], &vertices[a]) {
                    OrientedEdge { tail_index: b, head_index: a }
                } else {
                    OrientedEdge { tail_index: a, head_index: b }
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.tail_index.min(e.head_index), e.tail_index.max(e.head_index)));

        Ok(Polytope { vertices, ambient_dimension: n, affine_dimension: rank, faces, edges })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn ambient_dimension(&self) -> usize {
        self.ambient_dimension
    }

    pub fn affine_dimension(&self) -> usize {
        self.affine_dimension
    }

    /// All faces from the vertices up to the polytope itself, ordered by dimension.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn top_face(&self) -> &Face {
        self.faces.last().expect("polytope has at least its top face")
    }

    pub fn two_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.dimension == 2)
    }

    /// Indices (into [`Polytope::edges`]) of the edges lying in `face`.
    pub fn face_edges(&self, face: &Face) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| face.vertex_indices.contains(&e.tail_index) && face.vertex_indices.contains(&e.head_index))
            .map(|(i, _)| i)
            .collect()
    }

    /// Vertex indices of a 2-face in cyclic order, or `None` when its edges do
    /// not form a single closed cycle.
    pub fn face_cycle(&self, face: &Face) -> Option<Vec<usize>> {
        if face.dimension != 2 {
            return None;
        }
        let edges = self.face_edges(face);
        let neighbors = |v: usize| -> Vec<usize> {
            edges
                .iter()
                .filter_map(|&e| {
                    let e = self.edges[e];
                    if e.tail_index == v {
                        Some(e.head_index)
                    } else if e.head_index == v {
                        Some(e.tail_index)
                    } else {
                        None
                    }
                })
                .collect()
        };
        let start = face.vertex_indices[0];
        let mut cycle = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let nb = neighbors(cur);
            if nb.len() != 2 {
                return None;
            }
            let next = if prev == usize::MAX { nb[0].min(nb[1]) } else if nb[0] == prev { nb[1] } else { nb[0] };
            if next == start {
                break;
            }
            if cycle.contains(&next) {
                return None;
            }
            cycle.push(next);
            prev = cur;
            cur = next;
        }
        (cycle.len() == face.vertex_indices.len()).then_some(cycle)
    }

    /// `(1 - alpha) * tail + alpha * head`.
    pub fn edge_point(&self, edge: &OrientedEdge, alpha: f64) -> Result<Vec<f64>, GeometryError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(GeometryError::OutOfRange(alpha));
        }
        Ok(lerp(&self.vertices[edge.tail_index], &self.vertices[edge.head_index], alpha))
    }

    /// L∞ distance from `x` to the polytope (computed by LP).
    pub fn distance(&self, x: &[f64]) -> Result<f64, GeometryError> {
        let refs: Vec<&[f64]> = self.vertices.iter().map(Vec::as_slice).collect();
        linf_distance_to_hull(&refs, x, &Tolerances::default())
    }

    /// Whether `x` lies within L∞ distance `tol` of the polytope.
    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.ambient_dimension {
            return false;
        }
        self.distance(x).map(|d| d <= tol).unwrap_or(false)
    }
}

pub fn contains_point(p: &Polytope, x: &[f64], tol: f64) -> bool {
    p.contains_point(x, tol)
}

pub(crate) fn lerp(a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - alpha) * x + alpha * y).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Affine rank of a point set (singular values below `rel * max` dropped).
pub(crate) fn affine_rank(points: &[Vec<f64>], rel: f64) -> usize {
    intrinsic_coordinates(points, rel).0
}

/// Rank of the affine hull and coordinates of every point in an orthonormal
/// basis of it (origin at the first point).
fn intrinsic_coordinates(points: &[Vec<f64>], rel: f64) -> (usize, Vec<Vec<f64>>) {
    if points.len() <= 1 {
        return (0, vec![Vec::new(); points.len()]);
    }
    let n = points[0].len();
    let origin = &points[0];
    let rows = points.len() - 1;
    let m = DMatrix::from_fn(rows, n, |r, c| points[r + 1][c] - origin[c]);
    if n == 0 {
        return (0, vec![Vec::new(); points.len()]);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax <= 1e-300 {
        return (0, vec![Vec::new(); points.len()]);
    }
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let basis: Vec<usize> = idx.into_iter().filter(|&i| svd.singular_values[i] > rel * smax).collect();
    let rank = basis.len();
    let coords = points
        .iter()
        .map(|p| {
            basis
                .iter()
                .map(|&b| (0..n).map(|c| v_t[(b, c)] * (p[c] - origin[c])).sum())
                .collect()
        })
        .collect();
    (rank, coords)
}

/// Unit normal of the hyperplane through 0 spanned by `diffs` (dim-1 vectors in R^dim).
fn hyperplane_normal(diffs: &[Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(diffs.len() + 1, dim);
    let mut normal = vec![0.0; dim];
    for (i, slot) in normal.iter_mut().enumerate() {
        let minor = DMatrix::from_fn(dim - 1, dim - 1, |r, c| diffs[r][if c < i { c } else { c + 1 }]);
        let det = if dim == 1 { 1.0 } else { minor.determinant() };
        *slot = if i % 2 == 0 { det } else { -det };
    }
    let norm = dot(&normal, &normal).sqrt();
    let scale: f64 = diffs.iter().map(|d| dot(d, d).sqrt()).product::<f64>().max(1e-300);
    if norm <= 1e-10 * scale {
        return None;
    }
    Some(normal.into_iter().map(|v| v / norm).collect())
}

/// L∞ distance from `x` to `conv(points)`; infinite for an empty set.
pub(crate) fn linf_distance_to_hull(points: &[&[f64]], x: &[f64], tol: &Tolerances) -> Result<f64, GeometryError> {
    if points.is_empty() {
        return Ok(f64::INFINITY);
    }
    let mut b = LpBuilder::new(ObjectiveSense::Minimize);
    let lambdas = b.add_vars(points.len(), 0.0, 0.0, f64::INFINITY);
    let s = b.add_var(1.0, 0.0, f64::INFINITY);
    b.add_row(lambdas.iter().map(|&l| (l, 1.0)).collect(), ConstraintSense::Eq, 1.0);
    for d in 0..x.len() {
        let mut up: Vec<(usize, f64)> = lambdas.iter().zip(points).map(|(&l, p)| (l, p[d])).collect();
        let mut down: Vec<(usize, f64)> = up.iter().map(|&(l, v)| (l, -v)).collect();
        up.push((s, -1.0));
        down.push((s, -1.0));
        b.add_row(up, ConstraintSense::Le, x[d]);
        b.add_row(down, ConstraintSense::Le, -x[d]);
    }
    let sol = solve_lp_with(&b.build(), tol)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective_value.max(0.0)),
        _ => Ok(f64::INFINITY),
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
