//! Invariant families of lines and points built from cyclic limits.
//!
//! The family at level k contains the family at level k − 1, the base
//! objects of every element of word length k, and the images under each
//! letter of everything that first appeared at level k − 1. Recording the
//! level of each entry makes the families for all radii available from one
//! enumeration, and they are nested by construction.

use rayon::prelude::*;
use serde::Serialize;

use super::ball::{letters, BallEnumeration};
use super::estimate::{LimitEstimate, Provenance, TOL_CLUSTER};
use super::limits::cyclic_limits;
use super::{enumerate_ball, GroupSpec, DEFAULT_CAP};
use crate::error::{KlabError, Result};
use crate::group::{classify, cyclic_limit_set, ElementKind, GroupElement, ROUNDOFF};
use crate::index::ProjIndex;
use crate::linalg::{projective_stretch, Matrix3};
use crate::proj::{ProjLine, ProjPoint};
use crate::pseudo::Kernel;

/// Largest number of lines or points a family may hold.
pub const DEFAULT_FAMILY_CAP: usize = 20_000;
/// Entries whose accumulated error bound exceeds this are dropped.
pub const MAX_ENTRY_ERROR: f64 = 1e-7;

type Base = (Vec<ProjLine>, Vec<ProjPoint>);

#[derive(Clone, Debug, Serialize)]
pub struct KernelFamily {
    pub radius: usize,
    /// (line, level, multiplicity)
    pub lines: Vec<(ProjLine, usize, usize)>,
    pub points: Vec<(ProjPoint, usize, usize)>,
    /// The cap was hit; the family is then no longer invariant.
    pub capped: bool,
    /// Elements without a cyclic limit set (elliptic of infinite order).
    pub skipped_elliptic: usize,
    /// Elements too ill-conditioned for their eigenvectors to be trusted;
    /// their objects still enter as images of earlier entries.
    pub skipped_ill_conditioned: usize,
    /// Images dropped because the letter stretched the entry's error
    /// bound past `MAX_ENTRY_ERROR`. Invariance holds up to these.
    pub dropped_imprecise: usize,
    #[serde(skip)]
    line_index: ProjIndex,
    #[serde(skip)]
    point_index: ProjIndex,
}

impl KernelFamily {
    fn empty(radius: usize) -> Self {
        KernelFamily {
            radius,
            lines: Vec::new(),
            points: Vec::new(),
            capped: false,
            skipped_elliptic: 0,
            skipped_ill_conditioned: 0,
            dropped_imprecise: 0,
            line_index: ProjIndex::new(TOL_CLUSTER),
            point_index: ProjIndex::new(TOL_CLUSTER),
        }
    }

    fn add_line(&mut self, l: ProjLine, level: usize, cap: usize) -> bool {
        if let Some(i) = self.line_index.find(&l.dual().0) {
            self.lines[i].2 += 1;
            return false;
        }
        if self.lines.len() >= cap {
            self.capped = true;
            return false;
        }
        self.line_index.push(&l.dual().0);
        self.lines.push((l, level, 1));
        true
    }

    fn add_point(&mut self, p: ProjPoint, level: usize, cap: usize) -> bool {
        if let Some(i) = self.point_index.find(&p.coords().0) {
            self.points[i].2 += 1;
            return false;
        }
        if self.points.len() >= cap {
            self.capped = true;
            return false;
        }
        self.point_index.push(&p.coords().0);
        self.points.push((p, level, 1));
        true
    }

    fn build<F>(spec: &GroupSpec, ball: &BallEnumeration, base: F, cap: usize) -> Self
    where
        F: Fn(&GroupElement) -> Option<Base> + Sync,
    {
        let alphabet = letters(spec);
        // lines move by the inverse transpose of the lift
        let actions: Vec<(Matrix3, Matrix3)> = alphabet
            .iter()
            .map(|(_, g)| (*g.lift(), g.lift().adjugate().transpose()))
            .collect();
        let mut fam = Self::empty(ball.radius);
        let mut fresh_lines: Vec<(ProjLine, f64)> = Vec::new();
        let mut fresh_points: Vec<(ProjPoint, f64)> = Vec::new();
        for k in 1..=ball.radius {
            let bases: Vec<Option<(Option<Base>, f64)>> = ball
                .level(k)
                .par_iter()
                .map(|e| {
                    let err = ROUNDOFF * e.element.condition();
                    (err <= MAX_ENTRY_ERROR).then(|| (base(&e.element), err))
                })
                .collect();
            let images: Vec<(Vec<(ProjLine, f64)>, Vec<(ProjPoint, f64)>)> = actions
                .par_iter()
                .map(|(m, mt)| {
                    (
                        fresh_lines
                            .iter()
                            .filter_map(|(l, e)| {
                                let err = e * projective_stretch(mt, l.dual()) + ROUNDOFF;
                                Some((l.transform(m)?, err))
                            })
                            .collect(),
                        fresh_points
                            .iter()
                            .filter_map(|(p, e)| {
                                let err = e * projective_stretch(m, p.coords()) + ROUNDOFF;
                                Some((p.transform(m)?, err))
                            })
                            .collect(),
                    )
                })
                .collect();
            let mut new_lines = Vec::new();
            let mut new_points = Vec::new();
            for b in bases {
                let Some((b, err)) = b else {
                    fam.skipped_ill_conditioned += 1;
                    continue;
                };
                let Some((ls, ps)) = b else {
                    fam.skipped_elliptic += 1;
                    continue;
                };
                for l in ls {
                    if fam.add_line(l, k, cap) {
                        new_lines.push((l, err));
                    }
                }
                for p in ps {
                    if fam.add_point(p, k, cap) {
                        new_points.push((p, err));
                    }
                }
            }
            for (ls, ps) in images {
                for (l, err) in ls {
                    if err > MAX_ENTRY_ERROR {
                        fam.dropped_imprecise += 1;
                    } else if fam.add_line(l, k, cap) {
                        new_lines.push((l, err));
                    }
                }
                for (p, err) in ps {
                    if err > MAX_ENTRY_ERROR {
                        fam.dropped_imprecise += 1;
                    } else if fam.add_point(p, k, cap) {
                        new_points.push((p, err));
                    }
                }
            }
            fresh_lines = new_lines;
            fresh_points = new_points;
        }
        fam
    }

    /// Entries first seen at level ≤ `level`.
    pub fn estimate_at(&self, level: usize, provenance: Provenance) -> LimitEstimate {
        LimitEstimate::from_parts(
            provenance,
            self.lines
                .iter()
                .filter(|e| e.1 <= level)
                .map(|e| (e.0, e.2)),
            self.points
                .iter()
                .filter(|e| e.1 <= level)
                .map(|e| (e.0, e.2)),
        )
    }

    pub fn line_count_at(&self, level: usize) -> usize {
        self.lines.iter().filter(|e| e.1 <= level).count()
    }
}

/// Kernels of the limits of g^{±n}.
pub fn kernel_base(g: &GroupElement) -> Option<Base> {
    let lim = cyclic_limits(g);
    if lim.forward.is_none() && lim.backward.is_none() {
        return None;
    }
    let mut lines = Vec::new();
    let mut points = Vec::new();
    for m in lim.forward.iter().chain(lim.backward.iter()) {
        match m.kernel() {
            Kernel::KLine(l) => lines.push(*l),
            Kernel::KPoint(p) => points.push(*p),
            Kernel::Empty => {}
        }
    }
    Some((lines, points))
}

fn cyclic_base(g: &GroupElement) -> Option<Base> {
    match cyclic_limit_set(g) {
        Ok(est) => Some((est.line_list(), est.point_list())),
        Err(_) => {
            // finite-order elliptics have empty limit set; only elliptics
            // of infinite order are reported as skipped
            if classify(g).kind == ElementKind::Elliptic
                && crate::group::order_of(g, crate::group::DEFAULT_K_MAX)
                    == crate::group::Order::InfiniteOrExceeds
            {
                None
            } else {
                Some((Vec::new(), Vec::new()))
            }
        }
    }
}

/// Kernels of all cyclic limits in the ball, closed under the generators.
pub fn eq_complement_family(spec: &GroupSpec, ball: &BallEnumeration, cap: usize) -> KernelFamily {
    KernelFamily::build(
        spec,
        ball,
        |g| Some(kernel_base(g).unwrap_or_default()),
        cap,
    )
}

/// Union of the cyclic limit sets in the ball, closed under the generators.
pub fn c_gamma_family(spec: &GroupSpec, ball: &BallEnumeration, cap: usize) -> KernelFamily {
    KernelFamily::build(spec, ball, cyclic_base, cap)
}

fn ball_for(spec: &GroupSpec, radius: usize) -> Result<BallEnumeration> {
    if radius == 0 {
        return Err(KlabError::BadParameters("radius must be positive".into()));
    }
    enumerate_ball(spec, radius, DEFAULT_CAP)
}

/// Estimate of P² \ Eq(Γ) from the ball of the given radius.
pub fn eq_complement(spec: &GroupSpec, radius: usize) -> Result<LimitEstimate> {
    let ball = ball_for(spec, radius)?;
    let fam = eq_complement_family(spec, &ball, DEFAULT_FAMILY_CAP);
    Ok(fam.estimate_at(radius, Provenance::EqComplement))
}

/// Estimate of the closure of the union of cyclic limit sets.
pub fn c_gamma_estimate(spec: &GroupSpec, radius: usize) -> Result<LimitEstimate> {
    let ball = ball_for(spec, radius)?;
    let fam = c_gamma_family(spec, &ball, DEFAULT_FAMILY_CAP);
    Ok(fam.estimate_at(radius, Provenance::CyclicUnion))
}
