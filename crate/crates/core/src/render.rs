//! Deterministic SVG output for curves and coverings.

use std::fmt::Write;

use crate::tcurve::TCurve;
use crate::trilattice::EPoint;

const PALETTE: [&str; 8] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// One polyline to draw, colored by `id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgCurve {
    pub id: usize,
    pub points: Vec<EPoint>,
}

impl SvgCurve {
    pub fn from_curve(c: &TCurve, id: usize) -> Self {
        SvgCurve { id, points: c.vertices() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Pixels per unit edge.
    pub scale: f64,
    /// Corner rounding radius as a fraction of the unit edge.
    pub corner: f64,
    pub stroke_width: f64,
    pub lattice: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { scale: 20.0, corner: 0.2, stroke_width: 2.0, lattice: false }
    }
}

fn xy(p: EPoint) -> (f64, f64) {
    let (x, y) = p.to_xy();
    (x, 0.0 - y)
}

fn toward(from: (f64, f64), to: (f64, f64), dist: f64) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return from;
    }
    let t = (dist / len).min(0.5);
    (from.0 + dx * t, from.1 + dy * t)
}

/// Path data with every interior corner replaced by a quadratic Bézier.
pub fn path_data(points: &[EPoint], corner: f64, scale: f64) -> String {
    let pts: Vec<(f64, f64)> = points.iter().map(|&p| xy(p)).map(|(x, y)| (x * scale, y * scale)).collect();
    let mut d = String::new();
    let Some(&first) = pts.first() else { return d };
    write!(d, "M{:.3},{:.3}", first.0, first.1).unwrap();
    let r = corner * scale;
    for w in pts.windows(3) {
        let (a, v, b) = (w[0], w[1], w[2]);
        let p = toward(v, a, r);
        let q = toward(v, b, r);
        write!(d, " L{:.3},{:.3} Q{:.3},{:.3} {:.3},{:.3}", p.0, p.1, v.0, v.1, q.0, q.1).unwrap();
    }
    if pts.len() > 1 {
        let last = pts[pts.len() - 1];
        write!(d, " L{:.3},{:.3}", last.0, last.1).unwrap();
    }
    d
}

pub fn render_svg(curves: &[SvgCurve], style: &SvgStyle) -> String {
    let all: Vec<EPoint> = curves.iter().flat_map(|c| c.points.iter().copied()).collect();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if all.is_empty() {
        out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"1\" height=\"1\" viewBox=\"0 0 1 1\"></svg>\n");
        return out;
    }
    let s = style.scale;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &p in &all {
        let (x, y) = xy(p);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let m = 1.0;
    let (vx, vy, vw, vh) = ((x0 - m) * s, (y0 - m) * s, (x1 - x0 + 2.0 * m) * s, (y1 - y0 + 2.0 * m) * s);
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{vw:.3}\" height=\"{vh:.3}\" viewBox=\"{vx:.3} {vy:.3} {vw:.3} {vh:.3}\">"
    )
    .unwrap();
    if style.lattice {
        out.push_str("<g stroke=\"#dddddd\" stroke-width=\"0.5\">\n");
        let amin = all.iter().map(|p| p.a).min().unwrap();
        let amax = all.iter().map(|p| p.a).max().unwrap();
        let bmin = all.iter().map(|p| p.b).min().unwrap();
        let bmax = all.iter().map(|p| p.b).max().unwrap();
        let inside = |p: EPoint| {
            let (x, y) = xy(p);
            x >= x0 - m && x <= x1 + m && y >= y0 - m && y <= y1 + m
        };
        for b in bmin - 1..=bmax + 1 {
            for a in amin - 2 - (bmax - bmin)..=amax + 2 + (bmax - bmin) {
                let p = EPoint::new(a, b);
                for u in [EPoint::new(1, 0), EPoint::new(0, 1), EPoint::new(-1, 1)] {
                    let q = p + u;
                    if inside(p) && inside(q) {
                        let (px, py) = xy(p);
                        let (qx, qy) = xy(q);
                        writeln!(
                            out,
                            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\"/>",
                            px * s,
                            py * s,
                            qx * s,
                            qy * s
                        )
                        .unwrap();
                    }
                }
            }
        }
        out.push_str("</g>\n");
    }
    for c in curves {
        if c.points.is_empty() {
            continue;
        }
        writeln!(
            out,
            "<path id=\"curve-{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3}\" stroke-linecap=\"round\" d=\"{}\"/>",
            c.id,
            PALETTE[c.id % PALETTE.len()],
            style.stroke_width,
            path_data(&c.points, style.corner, s)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foldseq::{gen_t, Lambda};
    use crate::tcurve::realize;
    use crate::trilattice::Dir6;

    #[test]
    fn one_folding_has_two_corners() {
        let c = realize(&gen_t(&"+".parse::<Lambda>().unwrap()), EPoint::ZERO, Dir6::new(0));
        let svg = render_svg(&[SvgCurve::from_curve(&c, 0)], &SvgStyle::default());
        assert_eq!(svg.matches("<path").count(), 1);
        assert_eq!(svg.matches('Q').count(), 2);
        assert!(svg.contains("M0.000,0.000"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_is_valid() {
        let svg = render_svg(&[], &SvgStyle::default());
        assert!(svg.contains("<svg") && svg.contains("</svg>"));
        assert!(!svg.contains("<path"));
    }

    #[test]
    fn deterministic_and_lattice() {
        let c = realize(&gen_t(&"+-".parse::<Lambda>().unwrap()), EPoint::ZERO, Dir6::new(0));
        let style = SvgStyle { lattice: true, ..SvgStyle::default() };
        let a = render_svg(&[SvgCurve::from_curve(&c, 3)], &style);
        let b = render_svg(&[SvgCurve::from_curve(&c, 3)], &style);
        assert_eq!(a, b);
        assert!(a.contains("<line"));
        assert!(a.contains(PALETTE[3]));
    }

    #[test]
    fn corner_points_at_radius() {
        // corner at (1,0) between 0 and (0,1): rounding starts 0.2 before it
        let d = path_data(&[EPoint::ZERO, EPoint::new(1, 0), EPoint::new(0, 1)], 0.2, 1.0);
        assert!(d.starts_with("M0.000,0.000 L0.800,0.000 Q1.000,0.000 0.900,-0.173"), "{d}");
    }
}
