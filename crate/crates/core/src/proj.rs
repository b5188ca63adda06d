//! Points and lines of the complex projective plane.
//!
//! Both are stored as unit vectors of ℂ³ in a canonical phase: the
//! largest-modulus coordinate is real and positive (near-ties resolved to
//! the lowest index). A point `p` lies on a line `l` when the bilinear
//! pairing `⟨p, l.dual⟩` vanishes, so joins and meets are plain cross
//! products and line duals transform by the inverse transpose.

use serde::{Deserialize, Serialize};

use crate::error::{KlabError, Result};
use crate::linalg::{det3, fs_angle, Complex3, Matrix3, C64};

/// Default separation below which two points (or two lines) count as equal.
pub const TOL_DISTINCT: f64 = 1e-9;
/// Default incidence tolerance on `|⟨p, l⟩|`.
pub const TOL_INCIDENCE: f64 = 1e-9;

const ZERO_CUTOFF: f64 = 1e-300;

fn canonical(v: &Complex3) -> Result<Complex3> {
    if !v.is_finite() {
        return Err(KlabError::InvalidInput("non-finite coordinates".into()));
    }
    let m = v.max_abs();
    if m <= ZERO_CUTOFF {
        return Err(KlabError::ZeroVector);
    }
    if is_canonical(v) {
        return Ok(*v);
    }
    let w = v.scale(1.0 / m);
    let w = w.scale(1.0 / w.norm());
    let wm = w.max_abs();
    let k = (0..3)
        .find(|&i| w[i].norm() >= wm * (1.0 - 1e-9))
        .unwrap_or(0);
    let phase = w[k] / w[k].norm();
    let mut out = w.scale_c(phase.conj());
    // the pivot is real by construction; drop the rounding residue
    out.0[k] = C64::new(out.0[k].norm(), 0.0);
    Ok(out)
}

fn is_canonical(v: &Complex3) -> bool {
    if (v.norm_sqr() - 1.0).abs() > 4e-16 {
        return false;
    }
    let m = v.max_abs();
    let k = (0..3)
        .find(|&i| v[i].norm() >= m * (1.0 - 1e-9))
        .unwrap_or(0);
    v[k].im == 0.0 && v[k].re > 0.0
}

/// A point of ℂP².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    coords: Complex3,
}

impl ProjPoint {
    pub fn new(v: Complex3) -> Result<Self> {
        Ok(ProjPoint {
            coords: canonical(&v)?,
        })
    }

    pub fn real(a: f64, b: f64, d: f64) -> Result<Self> {
        Self::new(Complex3::real(a, b, d))
    }

    /// The coordinate point `[e_i]`.
    pub fn basis(i: usize) -> Self {
        ProjPoint {
            coords: Complex3::basis(i),
        }
    }

    pub fn coords(&self) -> &Complex3 {
        &self.coords
    }

    pub fn distance(&self, o: &ProjPoint) -> f64 {
        fs_distance(self, o)
    }

    /// Image under a linear map; `None` when the image vector vanishes.
    pub fn transform(&self, m: &Matrix3) -> Option<ProjPoint> {
        ProjPoint::new(m.mul_vec(&self.coords)).ok()
    }
}

/// A complex line of ℂP², stored through its dual vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjLine {
    dual: Complex3,
}

impl ProjLine {
    pub fn from_dual(v: Complex3) -> Result<Self> {
        Ok(ProjLine {
            dual: canonical(&v)?,
        })
    }

    /// The coordinate line `{x_i = 0}`.
    pub fn coordinate(i: usize) -> Self {
        ProjLine {
            dual: Complex3::basis(i),
        }
    }

    pub fn dual(&self) -> &Complex3 {
        &self.dual
    }

    /// The dual point in the dual plane.
    pub fn dual_point(&self) -> ProjPoint {
        ProjPoint { coords: self.dual }
    }

    pub fn distance(&self, o: &ProjLine) -> f64 {
        fs_angle(&self.dual.0, &o.dual.0)
    }

    /// Image of the line under the projective map with matrix `m`: duals
    /// transform by the inverse transpose.
    pub fn transform(&self, m: &Matrix3) -> Option<ProjLine> {
        let inv_t = m.inverse()?.transpose();
        ProjLine::from_dual(inv_t.mul_vec(&self.dual)).ok()
    }

    /// Two points spanning the line (orthonormal in the Hermitian sense).
    pub fn spanning_points(&self) -> (ProjPoint, ProjPoint) {
        // null space of the 1×3 row `dual` under the bilinear pairing is the
        // Hermitian orthogonal complement of conj(dual)
        let d = self.dual.conj();
        let k = (0..3)
            .min_by(|&a, &b| d[a].norm().partial_cmp(&d[b].norm()).unwrap())
            .unwrap();
        let e = Complex3::basis(k);
        let mut u = e - d.scale_c(d.hdot(&e));
        u = u.scale(1.0 / u.norm());
        let w = d.cross(&u).conj();
        // w is Hermitian-orthogonal to d and u
        let p = ProjPoint::new(u).expect("nonzero");
        let q = ProjPoint::new(w).expect("nonzero");
        (p, q)
    }
}

/// Fubini–Study distance in `[0, π/2]`.
pub fn fs_distance(a: &ProjPoint, b: &ProjPoint) -> f64 {
    fs_angle(&a.coords.0, &b.coords.0)
}

pub fn point_new(v: Complex3) -> Result<ProjPoint> {
    ProjPoint::new(v)
}

pub fn line_through(p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine> {
    line_through_tol(p, q, TOL_DISTINCT)
}

pub fn line_through_tol(p: &ProjPoint, q: &ProjPoint, tol: f64) -> Result<ProjLine> {
    let d = fs_distance(p, q);
    if d <= tol {
        return Err(KlabError::CoincidentPoints(d));
    }
    ProjLine::from_dual(p.coords.cross(&q.coords))
}

pub fn meet(l1: &ProjLine, l2: &ProjLine) -> Result<ProjPoint> {
    meet_tol(l1, l2, TOL_DISTINCT)
}

pub fn meet_tol(l1: &ProjLine, l2: &ProjLine, tol: f64) -> Result<ProjPoint> {
    let d = l1.distance(l2);
    if d <= tol {
        return Err(KlabError::CoincidentLines(d));
    }
    ProjPoint::new(l1.dual.cross(&l2.dual))
}

/// `|⟨p, l⟩|` for unit representatives.
pub fn incidence_residual(p: &ProjPoint, l: &ProjLine) -> f64 {
    p.coords.dot(&l.dual).norm()
}

pub fn incident(p: &ProjPoint, l: &ProjLine, tol: f64) -> bool {
    incidence_residual(p, l) < tol
}

/// `|det|` of three unit dual vectors: zero exactly when the lines are
/// concurrent.
pub fn concurrency_residual(a: &ProjLine, b: &ProjLine, d: &ProjLine) -> f64 {
    det3(&a.dual, &b.dual, &d.dual).norm()
}

/// Pairwise distinct and no three concurrent.
pub fn in_general_position(lines: &[ProjLine]) -> bool {
    in_general_position_tol(lines, TOL_DISTINCT)
}

pub fn in_general_position_tol(lines: &[ProjLine], tol: f64) -> bool {
    let n = lines.len();
    for i in 0..n {
        for j in i + 1..n {
            if lines[i].distance(&lines[j]) <= tol {
                return false;
            }
            for k in j + 1..n {
                if concurrency_residual(&lines[i], &lines[j], &lines[k]) < tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Affine coordinates in one of the three standard charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartCoords {
    Finite(C64, C64),
    AtInfinity,
}

pub fn affine_chart(p: &ProjPoint, chart: usize) -> ChartCoords {
    assert!(chart < 3, "chart index must be 0, 1 or 2");
    let v = p.coords();
    let h = v[chart];
    if h.norm() < 1e-12 {
        return ChartCoords::AtInfinity;
    }
    let others: Vec<C64> = (0..3).filter(|&i| i != chart).map(|i| v[i] / h).collect();
    ChartCoords::Finite(others[0], others[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn pt(a: f64, b: f64, d: f64) -> ProjPoint {
        ProjPoint::real(a, b, d).unwrap()
    }

    #[test]
    fn canonical_representatives() {
        assert_eq!(pt(1.0, 0.0, 0.0), ProjPoint::basis(0));
        let p = ProjPoint::new(Complex3::new(c(0.0, 2.0), c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(p, ProjPoint::basis(0));
        let s = 1.0 / 3f64.sqrt();
        let a = pt(s, s, s);
        let b = pt(-1.0, -1.0, -1.0);
        assert!(fs_distance(&a, &b) < 1e-15);
        assert!((a.coords()[0] - b.coords()[0]).norm() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(matches!(
            ProjPoint::real(0.0, 0.0, 0.0),
            Err(KlabError::ZeroVector)
        ));
    }

    #[test]
    fn joins() {
        let l = line_through(&ProjPoint::basis(0), &ProjPoint::basis(1)).unwrap();
        assert_eq!(l, ProjLine::coordinate(2));
        let l = line_through(&ProjPoint::basis(1), &ProjPoint::basis(2)).unwrap();
        assert_eq!(l, ProjLine::coordinate(0));
        // cross product (1,1,0)×(1,0,1) = (1,-1,-1)
        let l = line_through(&pt(1.0, 1.0, 0.0), &pt(1.0, 0.0, 1.0)).unwrap();
        let want = ProjLine::from_dual(Complex3::real(1.0, -1.0, -1.0)).unwrap();
        assert!(l.distance(&want) < 1e-15);
        assert!(matches!(
            line_through(&pt(1.0, 2.0, 3.0), &pt(2.0, 4.0, 6.0)),
            Err(KlabError::CoincidentPoints(_))
        ));
    }

    #[test]
    fn meets() {
        let p = meet(&ProjLine::coordinate(2), &ProjLine::coordinate(0)).unwrap();
        assert_eq!(p, ProjPoint::basis(1));
        let p = meet(&ProjLine::coordinate(0), &ProjLine::coordinate(1)).unwrap();
        assert_eq!(p, ProjPoint::basis(2));
        let l1 = ProjLine::from_dual(Complex3::real(1.0, 1.0, 1.0)).unwrap();
        let l2 = ProjLine::from_dual(Complex3::real(1.0, -1.0, 0.0)).unwrap();
        let p = meet(&l1, &l2).unwrap();
        assert!(fs_distance(&p, &pt(1.0, 1.0, -2.0)) < 1e-15);
        assert!(matches!(meet(&l1, &l1), Err(KlabError::CoincidentLines(_))));
    }

    #[test]
    fn incidence() {
        let l = ProjLine::coordinate(2);
        assert!(incident(&ProjPoint::basis(0), &l, TOL_INCIDENCE));
        assert!(!incident(&ProjPoint::basis(2), &l, TOL_INCIDENCE));
        let l = ProjLine::from_dual(Complex3::real(1.0, -1.0, 0.0)).unwrap();
        assert!(incident(&pt(1.0, 1.0, 1.0), &l, TOL_INCIDENCE));
    }

    #[test]
    fn distances() {
        let e1 = ProjPoint::basis(0);
        assert_eq!(fs_distance(&e1, &e1), 0.0);
        assert!((fs_distance(&e1, &ProjPoint::basis(1)) - FRAC_PI_2).abs() < 1e-15);
        assert!((fs_distance(&pt(1.0, 1.0, 0.0), &e1) - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn general_position_examples() {
        let tri: Vec<_> = (0..3).map(ProjLine::coordinate).collect();
        assert!(in_general_position(&tri));
        // three lines through [e1]: duals with zero first coordinate
        let pencil = vec![
            ProjLine::from_dual(Complex3::real(0.0, 1.0, 0.0)).unwrap(),
            ProjLine::from_dual(Complex3::real(0.0, 0.0, 1.0)).unwrap(),
            ProjLine::from_dual(Complex3::real(0.0, 1.0, 2.0)).unwrap(),
        ];
        assert!(!in_general_position(&pencil));
        let mut four = tri.clone();
        four.push(ProjLine::from_dual(Complex3::real(1.0, 1.0, 1.0)).unwrap());
        assert!(in_general_position(&four));
    }

    #[test]
    fn charts() {
        match affine_chart(&pt(1.0, 2.0, 3.0), 0) {
            ChartCoords::Finite(a, b) => {
                assert!((a - c(2.0, 0.0)).norm() < 1e-14 && (b - c(3.0, 0.0)).norm() < 1e-14)
            }
            _ => panic!(),
        }
        assert_eq!(affine_chart(&pt(0.0, 1.0, 0.0), 0), ChartCoords::AtInfinity);
        match affine_chart(&pt(2.0, 4.0, 6.0), 0) {
            ChartCoords::Finite(a, b) => {
                assert!((a - c(2.0, 0.0)).norm() < 1e-14 && (b - c(3.0, 0.0)).norm() < 1e-14)
            }
            _ => panic!(),
        }
    }

    #[test]
    fn spanning_points_lie_on_line() {
        let l = ProjLine::from_dual(Complex3::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.0))).unwrap();
        let (p, q) = l.spanning_points();
        assert!(incidence_residual(&p, &l) < 1e-14);
        assert!(incidence_residual(&q, &l) < 1e-14);
        assert!((fs_distance(&p, &q) - FRAC_PI_2).abs() < 1e-12);
    }
}
