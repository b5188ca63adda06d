//! SVG rendering of a detected line family.
//!
//! Left panel: each line as its dual point, in the affine chart of the
//! dual plane that keeps the most points finite, real parts of the two
//! chart coordinates. Right panel: the lines over real x in the chart
//! z = 1 of the primal plane, as the curves (x, Re y). Witness lines are
//! highlighted and vertices are marked in the primal panel.

use std::fmt::Write as _;

use crate::linalg::{Complex3, C64};
use crate::report::{from_coords, Coords, LineCensusReport, RunReport};

const PANEL: f64 = 360.0;
const MARGIN: f64 = 30.0;
/// Chart coordinates beyond this are treated as at infinity.
const FAR: f64 = 1e6;

pub struct PlotInput {
    pub title: String,
    pub lines: Vec<Coords>,
    pub witness: Vec<Coords>,
    pub vertices: Vec<Coords>,
}

impl From<&RunReport> for PlotInput {
    fn from(r: &RunReport) -> Self {
        PlotInput {
            title: format!(
                "{} (Li {}, LiG {})",
                r.group.name, r.census.li, r.census.lig
            ),
            lines: r.lambda.lines.iter().map(|l| l.dual).collect(),
            witness: r.census.witness.clone(),
            vertices: r.census.vertices.clone(),
        }
    }
}

impl From<&LineCensusReport> for PlotInput {
    fn from(r: &LineCensusReport) -> Self {
        PlotInput {
            title: format!("line family (Li {}, LiG {})", r.census.li, r.census.lig),
            lines: r.lines.iter().map(|l| l.dual).collect(),
            witness: r.census.witness.clone(),
            vertices: r.census.vertices.clone(),
        }
    }
}

/// Affine chart of the dual plane: the coordinate dividing out, and the
/// two remaining ones in order.
pub fn dual_chart(lines: &[Complex3]) -> (usize, [usize; 2]) {
    let finite = |k: usize| {
        lines
            .iter()
            .filter(|v| v[k].norm() * FAR > v.max_abs())
            .count()
    };
    // prefer the last coordinate on ties, the usual chart
    let k = (0..3).rev().max_by_key(|&k| finite(k)).unwrap_or(2);
    let rest = match k {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    (k, rest)
}

/// Chart coordinates of the dual points; `None` for points at infinity.
pub fn dual_points(lines: &[Coords]) -> Vec<Option<(C64, C64)>> {
    let v: Vec<Complex3> = lines.iter().map(from_coords).collect();
    let (k, [i, j]) = dual_chart(&v);
    v.iter()
        .map(|d| {
            if d[k].norm() * FAR <= d.max_abs() {
                return None;
            }
            Some((d[i] / d[k], d[j] / d[k]))
        })
        .collect()
}

struct Frame {
    x0: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Frame {
    fn fit(x0: f64, pts: &[(f64, f64)]) -> Frame {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (-1.0, -1.0);
            hi = (1.0, 1.0);
        }
        // square frame with a margin, never degenerate
        let cx = (lo.0 + hi.0) / 2.0;
        let cy = (lo.1 + hi.1) / 2.0;
        let half = ((hi.0 - lo.0).max(hi.1 - lo.1) / 2.0).max(1e-9) * 1.1;
        Frame {
            x0,
            lo: (cx - half, cy - half),
            hi: (cx + half, cy + half),
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = (x - self.lo.0) / (self.hi.0 - self.lo.0);
        let sy = (y - self.lo.1) / (self.hi.1 - self.lo.1);
        (self.x0 + MARGIN + sx * PANEL, MARGIN + (1.0 - sy) * PANEL)
    }
}

fn same(a: &Coords, b: &Coords) -> bool {
    crate::linalg::fs_angle(&from_coords(a).0, &from_coords(b).0) < 1e-9
}

/// Renders the two panels. No timestamp is written, so equal inputs give
/// equal documents.
pub fn emit_svg(input: &PlotInput) -> String {
    let width = 2.0 * (PANEL + 2.0 * MARGIN);
    let height = PANEL + 2.0 * MARGIN + 30.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(&input.title));
    let _ = writeln!(
        s,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
    let right = PANEL + 2.0 * MARGIN;
    for x0 in [0.0, right] {
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{MARGIN}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#999"/>"##,
            x0 + MARGIN
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}">dual chart: lines as points (real parts)</text>"#,
        MARGIN - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">primal chart z = 1: (x, Re y) over real x</text>"#,
        right + MARGIN,
        MARGIN - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}">{}</text>"#,
        height - 10.0,
        escape(&input.title)
    );

    if input.lines.is_empty() {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="middle" fill="#b00">no lines detected</text>"##,
            width / 2.0,
            MARGIN + PANEL / 2.0
        );
        s.push_str("</svg>\n");
        return s;
    }

    let is_witness: Vec<bool> = input
        .lines
        .iter()
        .map(|l| input.witness.iter().any(|w| same(l, w)))
        .collect();

    // dual panel
    let pts = dual_points(&input.lines);
    let finite: Vec<(f64, f64)> = pts.iter().flatten().map(|(u, v)| (u.re, v.re)).collect();
    let frame = Frame::fit(0.0, &finite);
    let mut at_infinity = 0;
    for (p, w) in pts.iter().zip(&is_witness) {
        let Some((u, v)) = p else {
            at_infinity += 1;
            continue;
        };
        let (x, y) = frame.map(u.re, v.re);
        if *w {
            let _ = writeln!(
                s,
                r##"<circle cx="{x:.3}" cy="{y:.3}" r="4.5" fill="#d62728" stroke="black" stroke-width="0.6"/>"##
            );
        } else {
            let _ = writeln!(
                s,
                r##"<circle cx="{x:.3}" cy="{y:.3}" r="2" fill="#1f77b4"/>"##
            );
        }
    }
    if at_infinity > 0 {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{at_infinity} dual points at infinity</text>"#,
            MARGIN + 4.0,
            MARGIN + PANEL - 4.0
        );
    }

    // primal panel, curves y(x) = −(a x + c)/b for real x in [−2, 2]
    let xs: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
    let frame = Frame::fit(right, &[(-2.0, -2.0), (2.0, 2.0)]);
    let clip = |y: f64| y.clamp(-2.2, 2.2);
    for (l, w) in input.lines.iter().zip(&is_witness) {
        let d = from_coords(l);
        let (a, b, cc) = (d[0], d[1], d[2]);
        let path: Vec<(f64, f64)> = if b.norm() * FAR > d.max_abs() {
            xs.iter()
                .map(|&x| (x, clip((-(a * x + cc) / b).re)))
                .collect()
        } else if a.norm() * FAR > d.max_abs() {
            // vertical: x = −c/a
            let x = (-cc / a).re.clamp(-2.2, 2.2);
            vec![(x, -2.2), (x, 2.2)]
        } else {
            continue;
        };
        let mut dstr = String::new();
        for (i, (x, y)) in path.iter().enumerate() {
            let (px, py) = frame.map(*x, *y);
            let _ = write!(dstr, "{}{px:.3},{py:.3} ", if i == 0 { "M" } else { "L" });
        }
        let (stroke, width) = if *w {
            ("#d62728", 2.0)
        } else {
            ("#1f77b4", 0.6)
        };
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-opacity="0.8"/>"#,
            dstr.trim_end()
        );
    }
    for v in &input.vertices {
        let p = from_coords(v);
        if p[2].norm() * FAR <= p.max_abs() {
            continue;
        }
        let (x, y) = ((p[0] / p[2]).re, (p[1] / p[2]).re);
        let (px, py) = frame.map(x.clamp(-2.2, 2.2), y.clamp(-2.2, 2.2));
        let _ = writeln!(
            s,
            r#"<path d="M{:.3},{:.3} L{:.3},{:.3} M{:.3},{:.3} L{:.3},{:.3}" stroke="black" stroke-width="2"/>"#,
            px - 6.0,
            py - 6.0,
            px + 6.0,
            py + 6.0,
            px - 6.0,
            py + 6.0,
            px + 6.0,
            py - 6.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">{} lines, {} witness, {} vertices</text>"#,
        right + MARGIN + 4.0,
        MARGIN + PANEL - 4.0,
        input.lines.len(),
        input.witness.len(),
        input.vertices.len()
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
