//! Nice 1-skeleton covers: vertex covers, admissible edge labelings, the
//! point sets V̄_i and the set F of 2-faces that need an extra shared point.
//!
//! Piece indices are 0-based here; a vertex membership or an edge label is a
//! bitmask over pieces (bit `i` = piece `i`).

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::geometry::{lerp, linf_distance_to_hull, OrientedEdge, Polytope};
use crate::lp::{solve_lp_with, ConstraintSense, LpBuilder, LpStatus, ObjectiveSense};
use crate::tolerances::Tolerances;

/// Membership of every vertex of Ω in the sets V_1..V_k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexCover {
    pub k: usize,
    pub assignment: Vec<u8>,
}

impl VertexCover {
    pub fn contains(&self, vertex: usize, piece: usize) -> bool {
        self.assignment[vertex] >> piece & 1 == 1
    }

    /// Vertices of V_piece.
    pub fn members(&self, piece: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&v| self.contains(v, piece)).collect()
    }

    pub fn is_valid(&self) -> bool {
        let full = (1u8 << self.k) - 1;
        self.assignment.iter().all(|&m| m != 0 && m & !full == 0)
    }
}

/// Label λ(e) of every edge, as piece bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeLabeling {
    pub labels: Vec<u8>,
}

/// A vertex cover, a labeling and the placements of t_e (2-labeled edges) and
/// u_e ≤ v_e (3-labeled edges) as parameters along each oriented edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonCover {
    pub vertex_cover: VertexCover,
    pub labeling: EdgeLabeling,
    pub alpha_t: Vec<Option<f64>>,
    pub alpha_u: Vec<Option<f64>>,
    pub alpha_v: Vec<Option<f64>>,
}

/// Options shaping the vertex-cover stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverEnumeration {
    /// Keep one representative per orbit under permuting piece indices.
    pub symmetry_pruning: bool,
    /// Restrict to covers where each vertex lies in exactly one V_i, with the
    /// matching reduced label sets. Every closed convex cover still has a
    /// compatible candidate (assign each vertex to one piece containing it).
    pub single_membership: bool,
}

impl Default for CoverEnumeration {
    fn default() -> Self {
        CoverEnumeration { symmetry_pruning: true, single_membership: false }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    match k {
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => {
            let mut out = Vec::new();
            for p in permutations(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out.sort();
            out
        }
    }
}

fn permute_mask(mask: u8, perm: &[usize]) -> u8 {
    let mut out = 0u8;
    for (i, &to) in perm.iter().enumerate() {
        if mask >> i & 1 == 1 {
            out |= 1 << to;
        }
    }
    out
}

/// Iterator over vertex covers in odometer order (first vertex fastest).
pub struct VertexCoverIter {
    k: usize,
    choices: Vec<u8>,
    state: Vec<usize>,
    perms: Vec<Vec<usize>>,
    prune: bool,
    done: bool,
}

impl Iterator for VertexCoverIter {
    type Item = VertexCover;

    fn next(&mut self) -> Option<VertexCover> {
        loop {
            if self.done {
                return None;
            }
            let assignment: Vec<u8> = self.state.iter().map(|&s| self.choices[s]).collect();
            // advance
            let mut i = 0;
            loop {
                if i == self.state.len() {
                    self.done = true;
                    break;
                }
                self.state[i] += 1;
                if self.state[i] < self.choices.len() {
                    break;
                }
                self.state[i] = 0;
                i += 1;
            }
            if self.prune && !is_canonical(&assignment, &self.perms) {
                continue;
            }
            return Some(VertexCover { k: self.k, assignment });
        }
    }
}

/// The assignment is the lexicographic minimum of its orbit (compared from the
/// first vertex on).
fn is_canonical(assignment: &[u8], perms: &[Vec<usize>]) -> bool {
    perms.iter().all(|perm| {
        for &m in assignment {
            let pm = permute_mask(m, perm);
            if pm != m {
                return pm > m;
            }
        }
        true
    })
}

/// Every assignment of each vertex to a nonempty subset of the k pieces.
pub fn enumerate_vertex_covers(p: &Polytope, k: usize, opts: CoverEnumeration) -> VertexCoverIter {
    assert!((1..=3).contains(&k), "k must be 1, 2 or 3");
    let choices: Vec<u8> = if opts.single_membership {
        (0..k).map(|i| 1u8 << i).collect()
    } else {
        (1..(1u8 << k)).collect()
    };
    VertexCoverIter {
        k,
        choices,
        state: vec![0; p.num_vertices()],
        perms: permutations(k),
        prune: opts.symmetry_pruning,
        done: p.num_vertices() == 0,
    }
}

/// Labels admissible for an edge with endpoint memberships `tail`, `head` among 3 pieces.
pub fn admissible_labels(tail: u8, head: u8) -> Vec<u8> {
    let mut out = Vec::new();
    for label in 1u8..8 {
        let bits: Vec<usize> = (0..3).filter(|&i| label >> i & 1 == 1).collect();
        let has = |m: u8, i: usize| m >> i & 1 == 1;
        let ok = match bits.as_slice() {
            [i] => has(tail, *i) && has(head, *i),
            [i, j] => (has(tail, *i) && has(head, *j)) || (has(tail, *j) && has(head, *i)),
            _ => permutations(3).iter().any(|p| {
                let (i, j, l) = (p[0], p[1], p[2]);
                has(tail, i) && has(head, j) && !has(tail, l) && !has(head, l)
            }),
        };
        if ok {
            out.push(label);
        }
    }
    out
}

fn reduced_labels(tail: u8, head: u8) -> Vec<u8> {
    if tail & head != 0 {
        vec![tail & head & (!(tail & head) + 1)]
    } else {
        let mut v = vec![tail | head];
        if (tail | head).count_ones() == 2 {
            v.push(0b111);
        }
        v
    }
}

/// Iterator over the cartesian product of per-edge label lists.
pub struct LabelingIter {
    options: Vec<Vec<u8>>,
    state: Vec<usize>,
    done: bool,
}

impl Iterator for LabelingIter {
    type Item = EdgeLabeling;

    fn next(&mut self) -> Option<EdgeLabeling> {
        if self.done {
            return None;
        }
        let labels = self.state.iter().zip(&self.options).map(|(&s, o)| o[s]).collect();
        let mut i = 0;
        loop {
            if i == self.state.len() {
                self.done = true;
                break;
            }
            self.state[i] += 1;
            if self.state[i] < self.options[i].len() {
                break;
            }
            self.state[i] = 0;
            i += 1;
        }
        Some(EdgeLabeling { labels })
    }
}

impl LabelingIter {
    pub fn count_total(&self) -> u128 {
        self.options.iter().map(|o| o.len() as u128).product()
    }
}

/// Every labeling satisfying the single/pair/triple conditions against `vc` (k = 3).
pub fn enumerate_labelings(p: &Polytope, vc: &VertexCover) -> LabelingIter {
    labelings_with(p, vc, false)
}

pub(crate) fn labelings_with(p: &Polytope, vc: &VertexCover, reduced: bool) -> LabelingIter {
    let options: Vec<Vec<u8>> = p
        .edges()
        .iter()
        .map(|e| {
            let (t, h) = (vc.assignment[e.tail_index], vc.assignment[e.head_index]);
            if reduced {
                reduced_labels(t, h)
            } else {
                admissible_labels(t, h)
            }
        })
        .collect();
    let done = options.iter().any(|o| o.is_empty());
    LabelingIter { state: vec![0; options.len()], options, done }
}

/// For k = 2 the labeling is forced: an edge gets both pieces iff its endpoints
/// share no V_i, otherwise the lowest shared piece.
pub fn forced_labeling_k2(p: &Polytope, vc: &VertexCover) -> EdgeLabeling {
    let labels = p
        .edges()
        .iter()
        .map(|e| {
            let shared = vc.assignment[e.tail_index] & vc.assignment[e.head_index];
            if shared == 0 {
                0b11
            } else {
                shared & (!shared + 1)
            }
        })
        .collect();
    EdgeLabeling { labels }
}

impl SkeletonCover {
    /// Places t_e, u_e, v_e at fixed fractions along each edge.
    pub fn with_placements(p: &Polytope, vc: VertexCover, labeling: EdgeLabeling, t: f64, u: f64, v: f64) -> Self {
        let m = p.edges().len();
        let mut sc = SkeletonCover {
            vertex_cover: vc,
            labeling,
            alpha_t: vec![None; m],
            alpha_u: vec![None; m],
            alpha_v: vec![None; m],
        };
        for e in 0..m {
            match sc.labeling.labels[e].count_ones() {
                2 => sc.alpha_t[e] = Some(t),
                3 => {
                    sc.alpha_u[e] = Some(u);
                    sc.alpha_v[e] = Some(v);
                }
                _ => {}
            }
        }
        sc
    }

    pub fn k(&self) -> usize {
        self.vertex_cover.k
    }

    /// Checks the labeling conditions and placement order.
    pub fn is_valid(&self, p: &Polytope) -> bool {
        if !self.vertex_cover.is_valid() || self.labeling.labels.len() != p.edges().len() {
            return false;
        }
        p.edges().iter().enumerate().all(|(i, e)| {
            let (t, h) = (self.vertex_cover.assignment[e.tail_index], self.vertex_cover.assignment[e.head_index]);
            let label = self.labeling.labels[i];
            let label_ok = if self.k() == 2 {
                forced_labeling_k2(p, &self.vertex_cover).labels[i] == label || admissible_labels(t, h).contains(&label)
            } else {
                admissible_labels(t, h).contains(&label)
            };
            let in_unit = |a: Option<f64>| a.map_or(false, |a| (0.0..=1.0).contains(&a));
            let place_ok = match label.count_ones() {
                2 => in_unit(self.alpha_t[i]),
                3 => in_unit(self.alpha_u[i]) && in_unit(self.alpha_v[i]) && self.alpha_u[i] <= self.alpha_v[i],
                _ => true,
            };
            label_ok && place_ok
        })
    }
}

fn point_on(p: &Polytope, e: &OrientedEdge, alpha: f64) -> Vec<f64> {
    lerp(p.vertex(e.tail_index), p.vertex(e.head_index), alpha)
}

/// The point set V̄_i: the vertices of V_i, the t_e of 2-labeled edges whose
/// label contains i, and on 3-labeled edges u_e and v_e when V_i holds no
/// endpoint, u_e when it holds the tail, v_e when it holds the head.
pub fn build_vbar(p: &Polytope, sc: &SkeletonCover, piece: usize) -> Vec<Vec<f64>> {
    let vc = &sc.vertex_cover;
    let mut pts: Vec<Vec<f64>> = vc.members(piece).into_iter().map(|v| p.vertex(v).to_vec()).collect();
    for (i, e) in p.edges().iter().enumerate() {
        let label = sc.labeling.labels[i];
        match label.count_ones() {
            2 if label >> piece & 1 == 1 => {
                pts.push(point_on(p, e, sc.alpha_t[i].expect("2-labeled edge has t_e")));
            }
            3 => {
                let u = sc.alpha_u[i].expect("3-labeled edge has u_e");
                let v = sc.alpha_v[i].expect("3-labeled edge has v_e");
                let has_tail = vc.contains(e.tail_index, piece);
                let has_head = vc.contains(e.head_index, piece);
                if !has_tail && !has_head {
                    pts.push(point_on(p, e, u));
                    pts.push(point_on(p, e, v));
                } else {
                    if has_tail {
                        pts.push(point_on(p, e, u));
                    }
                    if has_head {
                        pts.push(point_on(p, e, v));
                    }
                }
            }
            _ => {}
        }
    }
    pts
}

/// Whether conv(a) ∩ conv(b) meets the segment [s0, s1].
fn hulls_meet_on_segment(a: &[Vec<f64>], b: &[Vec<f64>], s0: &[f64], s1: &[f64], tol: &Tolerances) -> Result<bool, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Ok(false);
    }
    let n = s0.len();
    let mut lp = LpBuilder::new(ObjectiveSense::Minimize);
    let mu = lp.add_vars(2, 0.0, 0.0, f64::INFINITY);
    let la = lp.add_vars(a.len(), 0.0, 0.0, f64::INFINITY);
    let lb = lp.add_vars(b.len(), 0.0, 0.0, f64::INFINITY);
    for set in [&mu, &la, &lb] {
        lp.add_row(set.iter().map(|&j| (j, 1.0)).collect(), ConstraintSense::Eq, 1.0);
    }
    for d in 0..n {
        let seg: Vec<(usize, f64)> = vec![(mu[0], s0[d]), (mu[1], s1[d])];
        let mut ra = seg.clone();
        ra.extend(la.iter().zip(a).map(|(&j, p)| (j, -p[d])));
        lp.add_row(ra, ConstraintSense::Eq, 0.0);
        let mut rb = seg;
        rb.extend(lb.iter().zip(b).map(|(&j, p)| (j, -p[d])));
        lp.add_row(rb, ConstraintSense::Eq, 0.0);
    }
    Ok(solve_lp_with(&lp.build(), tol)?.status == LpStatus::Optimal)
}

/// Indices (into `p.faces()`) of the 2-faces on whose boundary the hulls of the
/// V̄_i pairwise intersect, for the placements stored in `sc`.
pub fn compute_f_for(p: &Polytope, sc: &SkeletonCover, tol: &Tolerances) -> Result<Vec<usize>, GeometryError> {
    compute_f_counted(p, sc, tol).map(|(f, _)| f)
}

/// As [`compute_f_for`], also returning the number of LPs solved.
pub(crate) fn compute_f_counted(p: &Polytope, sc: &SkeletonCover, tol: &Tolerances) -> Result<(Vec<usize>, usize), GeometryError> {
    let k = sc.k();
    let vbars: Vec<Vec<Vec<f64>>> = (0..k).map(|i| build_vbar(p, sc, i)).collect();
    if vbars.iter().any(Vec::is_empty) {
        return Ok((Vec::new(), 0));
    }
    let mut solves = 0;
    let mut out = Vec::new();
    for (fi, face) in p.faces().iter().enumerate() {
        if face.dimension != 2 {
            continue;
        }
        let edges = p.face_edges(face);
        let mut all_pairs = true;
        'pairs: for i in 0..k {
            for j in i + 1..k {
                let mut met = false;
                for &e in &edges {
                    let edge = p.edges()[e];
                    solves += 1;
                    if hulls_meet_on_segment(&vbars[i], &vbars[j], p.vertex(edge.tail_index), p.vertex(edge.head_index), tol)? {
                        met = true;
                        break;
                    }
                }
                if !met {
                    all_pairs = false;
                    break 'pairs;
                }
            }
        }
        if all_pairs {
            out.push(fi);
        }
    }
    Ok((out, solves))
}

/// F(V_1, V_2, V_3, λ) with t_e at 1/2 and (u_e, v_e) at (1/3, 2/3).
pub fn compute_f(p: &Polytope, vc: &VertexCover, lab: &EdgeLabeling) -> Result<Vec<usize>, GeometryError> {
    let sc = SkeletonCover::with_placements(p, vc.clone(), lab.clone(), 0.5, 1.0 / 3.0, 2.0 / 3.0);
    compute_f_for(p, &sc, &Tolerances::default())
}

/// Samples `samples` evenly spaced points per edge and returns the first one
/// outside every conv(V̄_i) by more than `tol`.
pub fn uncovered_skeleton_point(p: &Polytope, sc: &SkeletonCover, samples: usize, tol: f64) -> Result<Option<Vec<f64>>, GeometryError> {
    let vbars: Vec<Vec<Vec<f64>>> = (0..sc.k()).map(|i| build_vbar(p, sc, i)).collect();
    let t = Tolerances::default();
    for e in p.edges() {
        for s in 0..samples {
            let alpha = if samples <= 1 { 0.0 } else { s as f64 / (samples - 1) as f64 };
            let x = point_on(p, e, alpha);
            let mut covered = false;
            for vb in &vbars {
                let refs: Vec<&[f64]> = vb.iter().map(Vec::as_slice).collect();
                if linf_distance_to_hull(&refs, &x, &t)? <= tol {
                    covered = true;
                    break;
                }
            }
            if !covered {
                return Ok(Some(x));
            }
        }
    }
    Ok(None)
}
