//! Clustered families of lines and points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::index::ProjIndex;
use crate::linalg::{fs_angle, orthonormal_complement, C64};
use crate::proj::{incident, line_through_tol, ProjLine, ProjPoint};

/// Merge radius for lines and points in ℂP².
pub const TOL_CLUSTER: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    KernelAccumulation,
    EqComplement,
    KulkarniL0,
    KulkarniL1,
    KulkarniL2,
    KulkarniLambda,
    CyclicUnion,
    Input,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilFlag {
    pub point: ProjPoint,
    /// Number of family lines through the point.
    pub count: usize,
    /// The pencil's lines cover an open set.
    pub sweeping: bool,
    /// Three members spanning the circle of parameters, when there is one.
    #[serde(default)]
    pub circle: Option<[ProjLine; 3]>,
}

impl PencilFlag {
    /// Whether `q` lies on a line of the pencil's closure: the line joining
    /// it to the vertex has its parameter on the pencil circle.
    pub fn absorbs(&self, q: &ProjPoint, tol: f64) -> bool {
        let Some(refs) = &self.circle else {
            return false;
        };
        if q.distance(&self.point) < tol {
            return true;
        }
        let Ok(l) = line_through_tol(&self.point, q, 1e-12) else {
            return true;
        };
        let z = pencil_coordinates(&self.point, &[refs[0], refs[1], refs[2], l]);
        cross_ratio_residual(z[0], z[1], z[2], z[3]) <= CIRCLE_TOL
    }
}

/// Relative cross-ratio residual below which four pencil parameters are
/// taken to be concyclic.
pub const CIRCLE_TOL: f64 = 1e-5;

/// Coordinates [s:t] of lines through `p` in a unitary basis of the pencil.
fn pencil_coordinates(p: &ProjPoint, lines: &[ProjLine]) -> Vec<(C64, C64)> {
    // duals of lines through p form the plane annihilated by p
    let (a, b) = orthonormal_complement(&p.coords().conj());
    lines
        .iter()
        .map(|l| (a.hdot(l.dual()), b.hdot(l.dual())))
        .collect()
}

fn bracket(x: (C64, C64), y: (C64, C64)) -> C64 {
    x.0 * y.1 - x.1 * y.0
}

/// |Im| of the cross ratio (z0, z1; z2, w), relative to its size; zero
/// exactly when the four parameters are concyclic.
fn cross_ratio_residual(z0: (C64, C64), z1: (C64, C64), z2: (C64, C64), w: (C64, C64)) -> f64 {
    let num = bracket(z0, z2) * bracket(z1, w);
    let den = bracket(z0, w) * bracket(z1, z2);
    let scale = num.norm() + den.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (num * den.conj()).im.abs() / (scale * scale)
}

/// Three spread-out members spanning the circle of parameters, if at
/// least three quarters of the members lie on it.
pub fn pencil_circle(p: &ProjPoint, lines: &[ProjLine]) -> Option<[ProjLine; 3]> {
    if lines.len() < 3 {
        return None;
    }
    let z = pencil_coordinates(p, lines);
    let gap = |i: usize, j: usize| bracket(z[i], z[j]).norm();
    let i0 = 0;
    let i1 = (0..z.len())
        .max_by(|&a, &b| gap(i0, a).total_cmp(&gap(i0, b)))
        .unwrap();
    let i2 = (0..z.len())
        .max_by(|&a, &b| {
            gap(i0, a)
                .min(gap(i1, a))
                .total_cmp(&gap(i0, b).min(gap(i1, b)))
        })
        .unwrap();
    if gap(i0, i1).min(gap(i0, i2)).min(gap(i1, i2)) < 1e-9 {
        return None;
    }
    let off = z
        .iter()
        .filter(|&&w| cross_ratio_residual(z[i0], z[i1], z[i2], w) > CIRCLE_TOL)
        .count();
    (off * 4 <= lines.len()).then_some([lines[i0], lines[i1], lines[i2]])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub lines: Vec<(ProjLine, usize)>,
    pub points: Vec<(ProjPoint, usize)>,
    pub pencils: Vec<PencilFlag>,
    pub provenance: Provenance,
    #[serde(skip, default = "line_index")]
    line_index: ProjIndex,
    #[serde(skip, default = "point_index")]
    point_index: ProjIndex,
}

fn line_index() -> ProjIndex {
    ProjIndex::new(TOL_CLUSTER)
}

fn point_index() -> ProjIndex {
    ProjIndex::new(TOL_CLUSTER)
}

impl LimitEstimate {
    pub fn new(provenance: Provenance) -> Self {
        LimitEstimate {
            lines: Vec::new(),
            points: Vec::new(),
            pencils: Vec::new(),
            provenance,
            line_index: line_index(),
            point_index: point_index(),
        }
    }

    pub fn from_parts(
        provenance: Provenance,
        lines: impl IntoIterator<Item = (ProjLine, usize)>,
        points: impl IntoIterator<Item = (ProjPoint, usize)>,
    ) -> Self {
        let mut out = Self::new(provenance);
        for (l, w) in lines {
            out.add_line(l, w);
        }
        for (p, w) in points {
            out.add_point(p, w);
        }
        out
    }

    /// Rebuilds the lookup structures after deserialization, merging
    /// entries that fall within the cluster tolerance.
    pub fn reindexed(self) -> Self {
        let mut out = Self::new(self.provenance);
        for (l, w) in self.lines {
            out.add_line(l, w.max(1));
        }
        for (p, w) in self.points {
            out.add_point(p, w.max(1));
        }
        out.pencils = self.pencils;
        out
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty() && self.points.is_empty()
    }

    /// Returns true when the line was new.
    pub fn add_line(&mut self, l: ProjLine, weight: usize) -> bool {
        let (i, new) = self.line_index.insert(&l.dual().0);
        if new {
            self.lines.push((l, weight));
        } else {
            self.lines[i].1 += weight;
        }
        new
    }

    pub fn add_point(&mut self, p: ProjPoint, weight: usize) -> bool {
        let (i, new) = self.point_index.insert(&p.coords().0);
        if new {
            self.points.push((p, weight));
        } else {
            self.points[i].1 += weight;
        }
        new
    }

    pub fn merge(&mut self, other: &LimitEstimate) {
        for (l, w) in &other.lines {
            self.add_line(*l, *w);
        }
        for (p, w) in &other.points {
            self.add_point(*p, *w);
        }
    }

    pub fn find_line(&self, l: &ProjLine) -> Option<usize> {
        self.line_index.find(&l.dual().0)
    }

    pub fn find_point(&self, p: &ProjPoint) -> Option<usize> {
        self.point_index.find(&p.coords().0)
    }

    pub fn line_list(&self) -> Vec<ProjLine> {
        self.lines.iter().map(|(l, _)| *l).collect()
    }

    pub fn point_list(&self) -> Vec<ProjPoint> {
        self.points.iter().map(|(p, _)| *p).collect()
    }

    /// Drops points lying on one of the lines or in the closure of a
    /// circular pencil, keeping isolated points only.
    pub fn isolated_points(&self, tol: f64) -> Vec<ProjPoint> {
        self.points
            .iter()
            .filter(|(p, _)| !self.absorbed(p, tol))
            .map(|(p, _)| *p)
            .collect()
    }

    fn absorbed(&self, p: &ProjPoint, tol: f64) -> bool {
        self.pencils.iter().any(|f| f.absorbs(p, tol))
            || self.lines.iter().any(|(l, _)| incident(p, l, tol))
    }

    pub fn without_points_on_lines(&self, tol: f64) -> LimitEstimate {
        let mut out = LimitEstimate::from_parts(self.provenance, self.lines.clone(), []);
        out.pencils = self.pencils.clone();
        for (p, w) in &self.points {
            if !self.absorbed(p, tol) {
                out.add_point(*p, *w);
            }
        }
        out
    }
}

/// Directed distance sup_{a∈A} inf_{b∈B} in the Fubini–Study metric.
///
/// Members of A with a neighbour in B inside the index radius get their
/// exact nearest distance from the index; only the rest are scanned.
fn directed(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let mut index = ProjIndex::new(TOL_CLUSTER);
    for y in b {
        index.push(y);
    }
    a.par_iter()
        .map(|x| match index.find(x) {
            Some(j) => fs_angle(x, &b[j]),
            None => b
                .iter()
                .map(|y| fs_angle(x, y))
                .fold(f64::INFINITY, f64::min),
        })
        .reduce(|| 0.0, f64::max)
}

fn hausdorff_vecs(a: Vec<Vec<C64>>, b: Vec<Vec<C64>>) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed(&a, &b).max(directed(&b, &a)),
    }
}

/// Hausdorff distance between two line families, measured on dual points.
pub fn hausdorff_lines(a: &[ProjLine], b: &[ProjLine]) -> f64 {
    hausdorff_vecs(
        a.iter().map(|l| l.dual().0.to_vec()).collect(),
        b.iter().map(|l| l.dual().0.to_vec()).collect(),
    )
}

pub fn hausdorff_points(a: &[ProjPoint], b: &[ProjPoint]) -> f64 {
    hausdorff_vecs(
        a.iter().map(|p| p.coords().0.to_vec()).collect(),
        b.iter().map(|p| p.coords().0.to_vec()).collect(),
    )
}

/// sup over `a` of the distance to the nearest line of `b` (∞ if `b` is
/// empty and `a` is not).
pub fn directed_lines(a: &[ProjLine], b: &[ProjLine]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let av: Vec<_> = a.iter().map(|l| l.dual().0.to_vec()).collect();
    let bv: Vec<_> = b.iter().map(|l| l.dual().0.to_vec()).collect();
    directed(&av, &bv)
}

pub fn directed_points(a: &[ProjPoint], b: &[ProjPoint]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let av: Vec<_> = a.iter().map(|p| p.coords().0.to_vec()).collect();
    let bv: Vec<_> = b.iter().map(|p| p.coords().0.to_vec()).collect();
    directed(&av, &bv)
}
