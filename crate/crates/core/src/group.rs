//! Elements of PSL(3,C).

use serde::{Deserialize, Serialize};

use crate::dynamics::{LimitEstimate, Provenance};
use crate::eigen::{eigen3, EigenData, EigenGroup};
use crate::error::{KlabError, Result};
use crate::linalg::{fs_angle, Complex3, Matrix3, C64};
use crate::proj::{line_through_tol, ProjLine, ProjPoint};

/// Determinant below this is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;
/// Projective equality tolerance on canonical representatives.
pub const TOL_CANON: f64 = 1e-9;
/// Tolerance for gⁿ = id in finite-order detection.
pub const TOL_ORDER: f64 = 1e-8;
/// Relative tolerance on eigenvalue moduli.
pub const TOL_MODULI: f64 = 1e-7;
pub const DEFAULT_K_MAX: usize = 120;
/// Eigenvectors are accurate to about this times the condition number.
pub const ROUNDOFF: f64 = 1e-16;
/// Fixed sets and limit kernels of elements conditioned worse than this
/// are not trusted.
pub const COND_RELIABLE: f64 = 1e9;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GroupElement {
    lift: Matrix3,
    canon: Matrix3,
}

fn canonical_matrix(m: &Matrix3) -> Matrix3 {
    let idx = m.dominant_index();
    let e = m.0[idx / 3][idx % 3];
    m.scale(e.conj() / (e.norm() * e.norm()))
}

impl GroupElement {
    pub fn new(m: Matrix3) -> Result<Self> {
        if !m.is_finite() {
            return Err(KlabError::InvalidInput("non-finite matrix entry".into()));
        }
        let d = m.det();
        if d.norm() <= SINGULAR_DET {
            return Err(KlabError::SingularMatrix(d.norm()));
        }
        if (d - C64::new(1.0, 0.0)).norm() < 1e-14 {
            // already a lift; rescaling would only perturb the last bits
            return Ok(Self::from_lift(m));
        }
        let lift = m.scale(C64::new(1.0, 0.0) / d.cbrt());
        Ok(Self::from_lift(lift))
    }

    /// Trusts that `lift` already has determinant 1.
    fn from_lift(lift: Matrix3) -> Self {
        GroupElement {
            lift,
            canon: canonical_matrix(&lift),
        }
    }

    pub fn identity() -> Self {
        Self::from_lift(Matrix3::identity())
    }

    pub fn lift(&self) -> &Matrix3 {
        &self.lift
    }

    pub fn canon(&self) -> &Matrix3 {
        &self.canon
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        // renormalize so det drift does not accumulate along long words
        let m = self.lift * other.lift;
        let d = m.det();
        if (d - C64::new(1.0, 0.0)).norm() < 1e-13 {
            Self::from_lift(m)
        } else {
            Self::from_lift(m.scale(C64::new(1.0, 0.0) / d.cbrt()))
        }
    }

    pub fn inverse(&self) -> GroupElement {
        // adjugate of a det-1 matrix is its inverse
        let m = self.lift.adjugate();
        let d = m.det();
        Self::from_lift(m.scale(C64::new(1.0, 0.0) / d.cbrt()))
    }

    /// max|g|·max|g⁻¹| for the det-1 lift; eigenvectors of the weaker
    /// eigenvalues are lost to roundoff once this nears 1/ε.
    pub fn condition(&self) -> f64 {
        self.lift.max_abs() * self.lift.adjugate().max_abs()
    }

    pub fn pow(&self, n: i64) -> GroupElement {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = GroupElement::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    /// Fubini–Study distance between canonical representatives in CP⁸.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        fs_angle(&self.canon.entries(), &other.canon.entries())
    }

    pub fn eq_tol(&self, other: &GroupElement, tol: f64) -> bool {
        self.distance(other) < tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.eq_tol(&GroupElement::identity(), tol)
    }

    pub fn act(&self, p: &ProjPoint) -> ProjPoint {
        p.transform(&self.lift)
            .expect("invertible map has no kernel")
    }

    pub fn act_line(&self, l: &ProjLine) -> ProjLine {
        l.transform(&self.lift)
            .expect("invertible map sends lines to lines")
    }

    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.compose(self).compose(&h.inverse())
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_tol(other, TOL_CANON)
    }
}

pub fn element_new(m: Matrix3) -> Result<GroupElement> {
    GroupElement::new(m)
}

pub fn element_eq(a: &GroupElement, b: &GroupElement) -> bool {
    a == b
}

pub fn compose(a: &GroupElement, b: &GroupElement) -> GroupElement {
    a.compose(b)
}

pub fn inverse(a: &GroupElement) -> GroupElement {
    a.inverse()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    Elliptic,
    Parabolic,
    Loxodromic,
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementClass {
    pub kind: ElementKind,
    pub diagonalizable: bool,
    /// Ascending.
    pub moduli: [f64; 3],
}

fn moduli_equal(moduli: &[f64; 3]) -> bool {
    let hi = moduli[2];
    hi == 0.0 || (hi - moduli[0]) <= TOL_MODULI * hi
}

pub fn classify(g: &GroupElement) -> ElementClass {
    classify_eigen(&eigen3(&g.lift))
}

pub fn classify_eigen(e: &EigenData) -> ElementClass {
    let moduli = e.moduli();
    let kind = if !moduli_equal(&moduli) {
        ElementKind::Loxodromic
    } else if e.diagonalizable {
        ElementKind::Elliptic
    } else {
        ElementKind::Parabolic
    };
    ElementClass {
        kind,
        diagonalizable: e.diagonalizable,
        moduli,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedSet {
    pub points: Vec<ProjPoint>,
    /// Lines of fixed points, one per eigenvalue with a 2-dimensional
    /// eigenspace.
    pub fixed_lines: Vec<ProjLine>,
}

fn eigenspace_line(g: &EigenGroup) -> Option<ProjLine> {
    if g.vectors.len() != 2 {
        return None;
    }
    ProjLine::from_dual(g.vectors[0].cross(&g.vectors[1])).ok()
}

pub fn fixed_points(g: &GroupElement) -> Result<FixedSet> {
    if g.is_identity(TOL_CANON) {
        return Err(KlabError::IdentityElement);
    }
    fixed_set_from_eigen(&eigen3(&g.lift))
}

/// Fixed points and lines of fixed points read off an eigendecomposition.
pub fn fixed_set_from_eigen(e: &EigenData) -> Result<FixedSet> {
    let mut points = Vec::new();
    let mut fixed_lines = Vec::new();
    for grp in &e.groups {
        for v in &grp.vectors {
            points.push(ProjPoint::new(*v)?);
        }
        if let Some(l) = eigenspace_line(grp) {
            fixed_lines.push(l);
        }
    }
    Ok(FixedSet {
        points,
        fixed_lines,
    })
}

/// Lines mapped to themselves: eigenvectors of the transposed lift.
pub fn invariant_lines(g: &GroupElement) -> Result<Vec<ProjLine>> {
    if g.is_identity(TOL_CANON) {
        return Err(KlabError::IdentityElement);
    }
    let e = eigen3(&g.lift.transpose());
    e.pairs()
        .into_iter()
        .map(|(_, v)| ProjLine::from_dual(v))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Order {
    Finite(usize),
    InfiniteOrExceeds,
}

pub fn order_of(g: &GroupElement, k_max: usize) -> Order {
    let mut acc = *g;
    for n in 1..=k_max.max(1) {
        if acc.is_identity(TOL_ORDER) {
            return Order::Finite(n);
        }
        acc = acc.compose(g);
    }
    Order::InfiniteOrExceeds
}

fn line_of(a: &Complex3, b: &Complex3) -> Result<ProjLine> {
    let p = ProjPoint::new(*a)?;
    let q = ProjPoint::new(*b)?;
    line_through_tol(&p, &q, 1e-12)
}

/// Generalized eigenvector for a defective eigenvalue: the direction of
/// ker (M − λ)² orthogonal to the eigenvector.
fn generalized_partner(m: &Matrix3, lambda: C64, eig: &Complex3) -> Complex3 {
    let shifted = m.sub_scalar(lambda);
    let sq = shifted * shifted;
    let s = sq.svd();
    // two smallest right singular vectors span ker (M − λ)²
    let (a, b) = (s.v[2], s.v[1]);
    let pa = a - eig.scale_c(eig.hdot(&a));
    let pb = b - eig.scale_c(eig.hdot(&b));
    if pa.norm() >= pb.norm() {
        pa
    } else {
        pb
    }
}

/// Closed-form limit set of the cyclic group generated by `g`.
///
/// Diagonalizable lifts with three distinct moduli give the two lines
/// through the middle eigenvector; a repeated modulus gives the line of
/// the repeated pair plus the remaining eigenvector. Defective lifts use
/// the Jordan tables: two lines when loxodromic, the eigenvector line when
/// parabolic.
pub fn cyclic_limit_set(g: &GroupElement) -> Result<LimitEstimate> {
    let e = eigen3(&g.lift);
    if e.ill_conditioned {
        return Err(KlabError::IllConditioned(e.condition));
    }
    let class = classify_eigen(&e);
    if class.kind == ElementKind::Elliptic {
        return Err(KlabError::EllipticUnsupported);
    }
    let mut out = LimitEstimate::new(Provenance::ClosedForm);
    let m = g.lift;

    if e.diagonalizable {
        let mut pairs = e.pairs();
        pairs.sort_by(|a, b| a.0.norm().partial_cmp(&b.0.norm()).unwrap());
        let r: Vec<f64> = pairs.iter().map(|p| p.0.norm()).collect();
        let close = |x: f64, y: f64| (x - y).abs() <= TOL_MODULI * x.max(y);
        let v: Vec<Complex3> = pairs.iter().map(|p| p.1).collect();
        if close(r[0], r[1]) {
            out.add_line(line_of(&v[0], &v[1])?, 1);
            out.add_point(ProjPoint::new(v[2])?, 1);
        } else if close(r[1], r[2]) {
            out.add_line(line_of(&v[1], &v[2])?, 1);
            out.add_point(ProjPoint::new(v[0])?, 1);
        } else {
            out.add_line(line_of(&v[1], &v[0])?, 1);
            out.add_line(line_of(&v[1], &v[2])?, 1);
        }
        return Ok(out);
    }

    let defective = e
        .groups
        .iter()
        .find(|grp| grp.vectors.len() < grp.algebraic)
        .expect("non-diagonalizable data has a defective eigenvalue");
    if defective.algebraic == 3 {
        if defective.vectors.len() == 2 {
            // one 2-block and one 1-block for the same eigenvalue
            out.add_line(eigenspace_line(defective).unwrap(), 1);
        } else {
            let w = generalized_partner(&m, defective.value, &defective.vectors[0]);
            out.add_line(line_of(&defective.vectors[0], &w)?, 1);
        }
        return Ok(out);
    }
    let other = e
        .groups
        .iter()
        .find(|grp| grp.algebraic == 1)
        .expect("a double eigenvalue leaves a simple one");
    let v_j = defective.vectors[0];
    let v_o = other.vectors[0];
    let first = line_of(&v_o, &v_j)?;
    if class.kind == ElementKind::Loxodromic {
        let w = generalized_partner(&m, defective.value, &v_j);
        out.add_line(first, 1);
        out.add_line(line_of(&v_j, &w)?, 1);
    } else {
        // ellipto-parabolic: moduli agree, only the eigenvector line survives
        out.add_line(first, 1);
    }
    Ok(out)
}
