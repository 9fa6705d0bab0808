//! SVG pictures of two-dimensional covers: the outline of Ω and each recovered
//! piece clipped to Ω.

use std::fmt::Write;

use crate::error::RenderError;
use crate::geometry::Polytope;
use crate::model::{HalfSpace, Instance, Solution};
use crate::solvers::recover_cover;

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 0.05;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Vertices of a planar Ω in counter-clockwise order.
pub fn omega_polygon(p: &Polytope) -> Result<Vec<[f64; 2]>, RenderError> {
    if p.ambient_dimension() != 2 || p.affine_dimension() != 2 {
        return Err(RenderError::NotTwoDimensional { ambient: p.ambient_dimension(), affine: p.affine_dimension() });
    }
    let order = p.face_cycle(p.top_face()).expect("a polygon has a boundary cycle");
    let mut poly: Vec<[f64; 2]> = order.iter().map(|&v| [p.vertex(v)[0], p.vertex(v)[1]]).collect();
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    Ok(poly)
}

fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - a[1] * b[0]
    })
    .sum::<f64>()
        / 2.0
}

/// Clips `poly` by each half-plane `normal·ω ≤ offset` in turn.
pub fn piece_polygon(poly: &[[f64; 2]], rows: &[HalfSpace]) -> Vec<[f64; 2]> {
    const EPS: f64 = 1e-12;
    let mut cur = poly.to_vec();
    for h in rows {
        if cur.is_empty() {
            break;
        }
        let s = |q: &[f64; 2]| h.offset - (h.normal[0] * q[0] + h.normal[1] * q[1]);
        let mut next = Vec::with_capacity(cur.len() + 1);
        for i in 0..cur.len() {
            let (a, b) = (cur[i], cur[(i + 1) % cur.len()]);
            let (sa, sb) = (s(&a), s(&b));
            if sa >= -EPS {
                next.push(a);
            }
            if (sa >= -EPS) != (sb >= -EPS) {
                let t = sa / (sa - sb);
                next.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        cur = dedup_ring(next);
    }
    cur
}

fn dedup_ring(pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let close = |a: &[f64; 2], b: &[f64; 2]| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12;
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().map_or(true, |q| !close(q, &p)) {
            out.push(p);
        }
    }
    while out.len() > 1 && close(&out[0], out.last().unwrap()) {
        out.pop();
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn points_attr(poly: &[[f64; 2]]) -> String {
    poly.iter().map(|q| format!("{},{}", num(q[0]), num(-q[1]))).collect::<Vec<_>>().join(" ")
}

/// Ω outline, one translucent polygon per recovered piece and a legend with the y_i.
pub fn render_svg(inst: &Instance, sol: &Solution) -> Result<String, RenderError> {
    let omega = omega_polygon(&inst.omega)?;
    let pieces = recover_cover(inst, sol)?;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for q in &omega {
        for d in 0..2 {
            lo[d] = lo[d].min(q[d]);
            hi[d] = hi[d].max(q[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let pad = span * MARGIN;
    let size = span + 2.0 * pad;
    // y is flipped so that ω₂ grows upwards
    let (vx, vy) = (lo[0] - pad, -hi[1] - pad);
    let stroke = size / 300.0;
    let font = size / 30.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="{} {} {} {}">"#,
        num(vx),
        num(vy),
        num(size),
        num(size),
        c = CANVAS
    );
    let _ = writeln!(svg, "  <title>{}</title>", escape(&inst.name));
    for piece in &pieces {
        let poly = piece_polygon(&omega, &piece.rows);
        if poly.is_empty() {
            continue;
        }
        let color = COLORS[piece.index % COLORS.len()];
        let _ = writeln!(
            svg,
            r#"  <polygon points="{}" fill="{color}" fill-opacity="0.35" stroke="{color}" stroke-width="{}"/>"#,
            points_attr(&poly),
            num(stroke)
        );
    }
    let _ = writeln!(
        svg,
        r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        points_attr(&omega),
        num(stroke * 1.5)
    );
    for (i, y) in sol.ys.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let ty = vy + font * (1.2 + 1.3 * i as f64);
        let label = y.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="{}" fill="{color}">y{} = ({label})</text>"#,
            num(vx + font * 0.5),
            num(ty),
            num(font),
            i + 1
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::get_instance;

    fn same_vertex_set(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
        a.len() == b.len()
            && b.iter().all(|q| a.iter().any(|p| (p[0] - q[0]).abs() < 1e-6 && (p[1] - q[1]).abs() < 1e-6))
    }

    #[test]
    fn problem_r_hexagons() {
        let r = get_instance("R").unwrap();
        let omega = omega_polygon(&r.instance.omega).unwrap();
        let pieces = recover_cover(&r.instance, &r.reference_solutions[0]).unwrap();
        let p1 = piece_polygon(&omega, &pieces[0].rows);
        let p2 = piece_polygon(&omega, &pieces[1].rows);
        let hex1 = [[-1.0, 1.0], [0.0, 2.0], [1.0, 1.0], [1.0, -1.0], [0.0, -2.0], [-1.0, -1.0]];
        let hex2 = [[-1.0, 1.0], [1.0, 1.0], [2.0, 0.0], [1.0, -1.0], [-1.0, -1.0], [-2.0, 0.0]];
        assert!(same_vertex_set(&p1, &hex1), "{p1:?}");
        assert!(same_vertex_set(&p2, &hex2), "{p2:?}");
    }

    #[test]
    fn svg_is_deterministic() {
        let r = get_instance("R").unwrap();
        let a = render_svg(&r.instance, &r.reference_solutions[0]).unwrap();
        let b = render_svg(&r.instance, &r.reference_solutions[0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<polygon").count(), 3);
        assert!(a.contains(r#"width="600""#));
    }

    #[test]
    fn one_dimensional_rejected() {
        let e = get_instance("interval").unwrap();
        assert!(matches!(
            render_svg(&e.instance, &e.reference_solutions[0]),
            Err(RenderError::NotTwoDimensional { ambient: 1, .. })
        ));
    }

    #[test]
    fn clipping_by_a_missing_halfplane_empties() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let h = HalfSpace { normal: vec![1.0, 0.0], offset: -1.0 };
        assert!(piece_polygon(&sq, &[h]).is_empty());
        let half = HalfSpace { normal: vec![1.0, 0.0], offset: 0.5 };
        assert!((signed_area(&piece_polygon(&sq, &[half])) - 0.5).abs() < 1e-12);
    }
}
