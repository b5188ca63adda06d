//! Sampled approximations of the Kulkarni sets L₀, L₁, L₂ and of Λ(Γ).

use rayon::prelude::*;
use serde::Serialize;

use super::ball::BallEnumeration;
use super::estimate::{
    hausdorff_lines, hausdorff_points, pencil_circle, LimitEstimate, PencilFlag, Provenance,
};
use super::family::{c_gamma_family, eq_complement_family, DEFAULT_FAMILY_CAP};
use super::limits::{accumulate, DEFAULT_EPS_CLUSTER};
use super::{enumerate_ball, enumerate_ball_partial, GroupSpec, DEFAULT_CAP};
use crate::census::{find_pencils, DEFAULT_PENCIL_THRESHOLD, TOL_CONCURRENT};
use crate::eigen::eigen3;
use crate::error::{KlabError, Result};
use crate::group::{
    classify_eigen, fixed_set_from_eigen, order_of, ElementKind, Order, COND_RELIABLE,
    DEFAULT_K_MAX,
};
use crate::linalg::{c, orthonormal_complement, Complex3, C64};
use crate::proj::{incidence_residual, ProjLine, ProjPoint};
use crate::pseudo::{Image, PseudoProjMap};

/// Seeds closer than this to L₀ are discarded.
const SEED_EXCLUSION: f64 = 1e-6;
/// Points of Λ closer than this to one of its lines are absorbed by it.
const ON_LINE: f64 = 1e-6;
pub const UNION_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeedConfig {
    pub count: usize,
    /// Offset into the low-discrepancy sequence.
    pub offset: u64,
    pub sphere_radius: f64,
    pub sphere_samples: usize,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig {
            count: 64,
            offset: 0,
            sphere_radius: 1e-2,
            sphere_samples: 8,
        }
    }
}

impl SeedConfig {
    /// Default configuration with the offset taken from `KLAB_SEED`.
    pub fn from_env() -> Result<Self> {
        let offset = match std::env::var("KLAB_SEED") {
            Ok(s) => s.trim().parse::<u64>().map_err(|_| {
                KlabError::InvalidInput(format!(
                    "KLAB_SEED must be a non-negative integer, got {s:?}"
                ))
            })?,
            Err(_) => 0,
        };
        Ok(SeedConfig {
            offset,
            ..Self::default()
        })
    }

    pub fn seeds(&self) -> Vec<ProjPoint> {
        const BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];
        (0..self.count as u64)
            .filter_map(|i| {
                let n = 1 + i + self.offset.wrapping_mul(self.count as u64);
                let h: Vec<f64> = BASES
                    .iter()
                    .map(|&b| 2.0 * radical_inverse(n, b) - 1.0)
                    .collect();
                ProjPoint::new(Complex3::new(c(h[0], h[1]), c(h[2], h[3]), c(h[4], h[5]))).ok()
            })
            .collect()
    }
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

/// Points at Fubini–Study distance `r` from `p`.
pub fn fs_sphere(p: &ProjPoint, r: f64, samples: usize) -> Vec<ProjPoint> {
    let v = *p.coords();
    let (u1, u2) = orthonormal_complement(&v);
    (0..samples)
        .filter_map(|j| {
            let phi = 2.399_963_229_728_653 * j as f64;
            let psi = 1.0 + 3.883_222_077_450_933 * j as f64;
            let w = u1.scale(phi.cos()) + u2.scale_c(C64::from_polar(phi.sin(), psi));
            ProjPoint::new(v.scale(r.cos()) + w.scale(r.sin())).ok()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KulkarniEstimate {
    pub l0: LimitEstimate,
    pub l1: LimitEstimate,
    pub l2: LimitEstimate,
}

fn near_l0(p: &ProjPoint, l0: &LimitEstimate) -> bool {
    l0.points
        .iter()
        .any(|(q, _)| p.distance(q) < SEED_EXCLUSION)
        || l0
            .lines
            .iter()
            .any(|(l, _)| incidence_residual(p, l) < SEED_EXCLUSION)
}

/// L₀ from the ball: fixed points and lines of fixed points of elements
/// of infinite order.
pub fn l0_from_ball(ball: &BallEnumeration) -> LimitEstimate {
    let sets: Vec<_> = ball
        .elements
        .par_iter()
        .skip(1)
        .filter_map(|e| {
            let g = &e.element;
            if g.condition() > COND_RELIABLE {
                return None;
            }
            let eig = eigen3(g.lift());
            let infinite = classify_eigen(&eig).kind != ElementKind::Elliptic
                || order_of(g, DEFAULT_K_MAX) == Order::InfiniteOrExceeds;
            if !infinite {
                return None;
            }
            fixed_set_from_eigen(&eig).ok()
        })
        .collect();
    let mut l0 = LimitEstimate::new(Provenance::KulkarniL0);
    for s in sets {
        // points on a line of fixed points add nothing to it
        for p in s.points {
            if !s
                .fixed_lines
                .iter()
                .any(|l| incidence_residual(&p, l) < ON_LINE)
            {
                l0.add_point(p, 1);
            }
        }
        for l in s.fixed_lines {
            l0.add_line(l, 1);
        }
    }
    l0
}

pub fn kulkarni_from_ball(
    ball: &BallEnumeration,
    limits: &[PseudoProjMap],
    seeds: &SeedConfig,
) -> KulkarniEstimate {
    let l0 = l0_from_ball(ball);
    let base: Vec<ProjPoint> = seeds
        .seeds()
        .into_iter()
        .filter(|p| !near_l0(p, &l0))
        .collect();
    // A limit sends every point off its kernel into its image, and the
    // images of points off L₀ are orbit cluster points: a rank-one limit
    // contributes its image point, a rank-two limit its whole image line
    // (the closure of the images of the seeds).
    let mut l1 = LimitEstimate::new(Provenance::KulkarniL1);
    let mut pending = Vec::new();
    for m in limits {
        let hits = base.iter().filter(|p| m.act(p).is_ok()).count();
        if hits == 0 {
            pending.push(m);
            continue;
        }
        match m.image() {
            Image::IPoint(q) => {
                l1.add_point(*q, hits);
            }
            Image::ILine(l) => {
                l1.add_line(*l, hits);
            }
            Image::Full => {}
        }
    }
    let in_l1 = |q: &ProjPoint| {
        l1.find_point(q).is_some()
            || l1
                .lines
                .iter()
                .any(|(l, _)| incidence_residual(q, l) < ON_LINE)
    };
    // images under limits already recorded lie in L₁
    let mut l2 = LimitEstimate::new(Provenance::KulkarniL2);
    for p in &base {
        if in_l1(p) {
            continue;
        }
        for s in fs_sphere(p, seeds.sphere_radius, seeds.sphere_samples) {
            for q in pending.iter().filter_map(|m| m.act(&s).ok()) {
                if !in_l1(&q) {
                    l2.add_point(q, 1);
                }
            }
        }
    }
    KulkarniEstimate { l0, l1, l2 }
}

pub fn kulkarni_estimate(
    spec: &GroupSpec,
    radius: usize,
    seeds: &SeedConfig,
) -> Result<KulkarniEstimate> {
    if radius < 2 {
        return Err(KlabError::BadParameters("radius must be at least 2".into()));
    }
    let ball = enumerate_ball(spec, radius, DEFAULT_CAP)?;
    let limits = accumulate(&ball, DEFAULT_EPS_CLUSTER);
    Ok(kulkarni_from_ball(&ball, &limits, seeds))
}

/// Whether the parameters of the pencil members lie on one circle of the
/// Riemann sphere. A pencil whose parameters fill an open set sweeps out a
/// region of the plane.
pub fn pencil_is_circular(p: &ProjPoint, lines: &[ProjLine]) -> bool {
    pencil_circle(p, lines).is_some()
}

fn pencil_flags(est: &LimitEstimate, hints: &[ProjPoint]) -> (Vec<PencilFlag>, Vec<Vec<usize>>) {
    let lines = est.line_list();
    let found = find_pencils(&lines, DEFAULT_PENCIL_THRESHOLD, hints, TOL_CONCURRENT);
    let flags = found
        .iter()
        .map(|p| {
            let members: Vec<ProjLine> = p.members.iter().map(|&i| lines[i]).collect();
            let circle = pencil_circle(&p.point, &members);
            PencilFlag {
                point: p.point,
                count: members.len(),
                sweeping: circle.is_none(),
                circle,
            }
        })
        .collect();
    (flags, found.into_iter().map(|p| p.members).collect())
}

/// Λ from its ingredients: the kernel lines that do not merely sweep out
/// an open region, the lines of fixed points, and the sampled points that
/// lie off those lines.
pub fn lambda_from_parts(eq: &LimitEstimate, k: &KulkarniEstimate) -> LimitEstimate {
    let hints = k.l0.point_list();
    let (flags, members) = pencil_flags(eq, &hints);
    let mut only_sweeping = vec![false; eq.lines.len()];
    let mut in_circular = vec![false; eq.lines.len()];
    for (f, m) in flags.iter().zip(&members) {
        for &i in m {
            if f.sweeping {
                only_sweeping[i] = true;
            } else {
                in_circular[i] = true;
            }
        }
    }
    let mut out = LimitEstimate::new(Provenance::KulkarniLambda);
    for (i, (l, w)) in eq.lines.iter().enumerate() {
        if !only_sweeping[i] || in_circular[i] {
            out.add_line(*l, *w);
        }
    }
    for part in [&k.l0, &k.l1, &k.l2] {
        for (l, w) in &part.lines {
            out.add_line(*l, *w);
        }
    }
    let lines = out.line_list();
    let circular: Vec<PencilFlag> = flags.into_iter().filter(|f| !f.sweeping).collect();
    for part in [&k.l0, &k.l1, &k.l2] {
        for (p, w) in &part.points {
            let absorbed = circular.iter().any(|f| f.absorbs(p, ON_LINE))
                || lines.iter().any(|l| incidence_residual(p, l) < ON_LINE);
            if !absorbed {
                out.add_point(*p, *w);
            }
        }
    }
    out.pencils = circular;
    out
}

pub fn lambda_estimate(
    spec: &GroupSpec,
    radius: usize,
    seeds: &SeedConfig,
) -> Result<LimitEstimate> {
    if radius < 2 {
        return Err(KlabError::BadParameters("radius must be at least 2".into()));
    }
    let ball = enumerate_ball(spec, radius, DEFAULT_CAP)?;
    let limits = accumulate(&ball, DEFAULT_EPS_CLUSTER);
    let k = kulkarni_from_ball(&ball, &limits, seeds);
    let eq = eq_complement_family(spec, &ball, DEFAULT_FAMILY_CAP)
        .estimate_at(radius, Provenance::EqComplement);
    Ok(lambda_from_parts(&eq, &k))
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionCheck {
    pub line_distance: f64,
    pub point_distance: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares Λ with the closure of the union of cyclic limit sets.
pub fn union_check(lambda: &LimitEstimate, cgamma: &LimitEstimate) -> UnionCheck {
    let line_distance = hausdorff_lines(&lambda.line_list(), &cgamma.line_list());
    let isolated = |e: &LimitEstimate| e.isolated_points(ON_LINE);
    let point_distance = hausdorff_points(&isolated(lambda), &isolated(cgamma));
    UnionCheck {
        line_distance,
        point_distance,
        tol: UNION_TOL,
        pass: line_distance < UNION_TOL && point_distance < UNION_TOL,
    }
}

/// Union check at `radius`; if the ball cap cuts the enumeration short,
/// the largest complete radius is used.
pub fn lambda_union_check(spec: &GroupSpec, radius: usize) -> Result<UnionCheck> {
    if radius < 2 {
        return Err(KlabError::BadParameters("radius must be at least 2".into()));
    }
    spec.validate()?;
    let ball = enumerate_ball_partial(spec, radius, DEFAULT_CAP);
    if ball.radius < 2 {
        return Err(KlabError::CapExceeded {
            cap: DEFAULT_CAP,
            radius: ball.radius,
            partial: Box::new(ball),
        });
    }
    let limits = accumulate(&ball, DEFAULT_EPS_CLUSTER);
    let k = kulkarni_from_ball(&ball, &limits, &SeedConfig::from_env()?);
    let eq = eq_complement_family(spec, &ball, DEFAULT_FAMILY_CAP)
        .estimate_at(ball.radius, Provenance::EqComplement);
    let lambda = lambda_from_parts(&eq, &k);
    let cg = c_gamma_family(spec, &ball, DEFAULT_FAMILY_CAP)
        .estimate_at(ball.radius, Provenance::CyclicUnion);
    Ok(union_check(&lambda, &cg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use crate::linalg::Matrix3;

    #[test]
    fn sphere_points_at_radius() {
        let p = ProjPoint::real(1.0, -2.0, 0.5).unwrap();
        for q in fs_sphere(&p, 1e-2, 8) {
            assert!((q.distance(&p) - 1e-2).abs() < 1e-12);
        }
    }

    #[test]
    fn seeds_are_deterministic_and_offset() {
        let a = SeedConfig::default().seeds();
        assert_eq!(a.len(), 64);
        let b = SeedConfig::default().seeds();
        assert!(a.iter().zip(&b).all(|(x, y)| x.distance(y) == 0.0));
        let shifted = SeedConfig {
            offset: 3,
            ..SeedConfig::default()
        }
        .seeds();
        assert!(shifted[0].distance(&a[0]) > 1e-3);
    }

    #[test]
    fn real_pencil_is_circular_complex_is_not() {
        let p = ProjPoint::basis(0);
        // lines through [1:0:0]: duals (0, 1, t)
        let real: Vec<ProjLine> = (0..12)
            .map(|t| ProjLine::from_dual(Complex3::real(0.0, 1.0, t as f64 * 0.3 - 1.0)).unwrap())
            .collect();
        assert!(pencil_is_circular(&p, &real));
        let swept: Vec<ProjLine> = (0..12)
            .map(|t| {
                let s = t as f64;
                ProjLine::from_dual(Complex3::new(
                    c(0.0, 0.0),
                    c(1.0, 0.0),
                    c(s.sin(), (2.0 * s).cos()),
                ))
                .unwrap()
            })
            .collect();
        assert!(!pencil_is_circular(&p, &swept));
    }

    #[test]
    fn diagonal_loxodromic_lambda() {
        let g = GroupElement::new(Matrix3::diag_real(0.5, 2.0, 1.0)).unwrap();
        let spec = GroupSpec::new("d", vec![g]).unwrap();
        let k = kulkarni_estimate(&spec, 6, &SeedConfig::default()).unwrap();
        for i in 0..3 {
            assert!(k.l0.find_point(&ProjPoint::basis(i)).is_some());
        }
        let lam = lambda_estimate(&spec, 6, &SeedConfig::default()).unwrap();
        assert_eq!(lam.lines.len(), 2);
        assert!(lam.isolated_points(ON_LINE).is_empty());
    }

    #[test]
    fn finite_group_is_empty() {
        let a = GroupElement::new(Matrix3::diag_real(1.0, -1.0, -1.0)).unwrap();
        let b = GroupElement::new(Matrix3::from_real([
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ]))
        .unwrap();
        let spec = GroupSpec::new("fin", vec![a, b]).unwrap();
        let k = kulkarni_estimate(&spec, 6, &SeedConfig::default()).unwrap();
        assert!(k.l0.is_empty() && k.l1.is_empty() && k.l2.is_empty());
    }
}
