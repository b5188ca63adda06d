//! Limits of normalized lifts in P(M(3,C)).

use rayon::prelude::*;
use serde::Serialize;

use super::ball::BallEnumeration;
use crate::eigen::eigen3;
use crate::group::{classify_eigen, ElementKind, GroupElement, TOL_MODULI};
use crate::index::ProjIndex;
use crate::linalg::Matrix3;
use crate::pseudo::PseudoProjMap;

pub const DEFAULT_EPS_CLUSTER: f64 = 1e-3;
/// Squarings used to push gⁿ to its limit (n = 2⁶⁴).
const SQUARINGS: usize = 64;

/// A cluster point of the normalized powers gⁿ, n → +∞.
///
/// When a single dominant eigenvalue is semisimple, repeated normalized
/// squaring converges geometrically and is numerically stable. Several
/// dominant eigenvalues of equal modulus are handled by the product below. When a
/// dominant eigenvalue is defective, powers converge only like 1/n and
/// squaring cancels catastrophically in a non-triangular basis, so the
/// limit is read off the Jordan structure instead: the product
/// (M − λ)^(k−1) · Π_{μ≠λ} (M − μ)^{m_μ} has the same kernel and image as
/// the true limit.
pub fn power_limit(g: &GroupElement) -> Option<PseudoProjMap> {
    let m = *g.lift();
    let e = eigen3(&m);
    let class = classify_eigen(&e);
    if class.kind == ElementKind::Elliptic {
        return None;
    }
    let rmax = class.moduli[2];
    let dominant: Vec<_> = e
        .groups
        .iter()
        .filter(|grp| grp.value.norm() >= rmax * (1.0 - TOL_MODULI))
        .collect();
    let jordan = |grp: &crate::eigen::EigenGroup| grp.algebraic + 1 - grp.vectors.len();
    let defective = dominant
        .iter()
        .filter(|grp| grp.vectors.len() < grp.algebraic)
        .max_by_key(|grp| jordan(grp));
    let limit = match defective {
        Some(top) => {
            let k = jordan(top);
            let shifted = m.sub_scalar(top.value);
            let mut acc = Matrix3::identity();
            for _ in 1..k {
                acc = acc * shifted;
            }
            for grp in &e.groups {
                if (grp.value - top.value).norm() <= TOL_MODULI * rmax {
                    continue;
                }
                let s = m.sub_scalar(grp.value);
                for _ in 0..grp.algebraic {
                    acc = acc * s;
                }
            }
            acc
        }
        None if dominant.len() > 1 => {
            // distinct dominant eigenvalues of one modulus: the powers rotate
            // forever and squaring would amplify roundoff in their moduli.
            // Every cluster point has the kernel and image of this product.
            let mut acc = Matrix3::identity();
            for grp in &e.groups {
                if dominant.iter().any(|d| std::ptr::eq(*d, grp)) {
                    continue;
                }
                let s = m.sub_scalar(grp.value);
                for _ in 0..grp.algebraic {
                    acc = acc * s;
                }
            }
            acc
        }
        None => {
            let mut a = m.max_normalized();
            for _ in 0..SQUARINGS {
                let next = (a * a).max_normalized();
                let settled = (next - a).max_abs() <= 1e-15;
                a = next;
                if settled {
                    break;
                }
            }
            a
        }
    };
    let psp = PseudoProjMap::new(limit).ok()?;
    if psp.rank() == 3 {
        None
    } else {
        Some(psp)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CyclicLimits {
    pub forward: Option<PseudoProjMap>,
    pub backward: Option<PseudoProjMap>,
}

/// Limits of g^{±n}.
pub fn cyclic_limits(g: &GroupElement) -> CyclicLimits {
    CyclicLimits {
        forward: power_limit(g),
        backward: power_limit(&g.inverse()),
    }
}

/// Cluster points of the ball in P(M(3,C)).
///
/// Candidates are the limits of cyclic sequences gⁿ for every ball
/// element, together with normalized lifts from the outer shell (word
/// length ≥ radius − 1) that are already numerically rank-deficient. They
/// are clustered greedily at `eps_cluster`; cyclic limits come first, so
/// they become the representatives. Rank-3 maps never appear.
pub fn accumulate(ball: &BallEnumeration, eps_cluster: f64) -> Vec<PseudoProjMap> {
    let cyclic: Vec<PseudoProjMap> = ball
        .elements
        .par_iter()
        .skip(1)
        .flat_map_iter(|entry| {
            let c = cyclic_limits(&entry.element);
            c.forward.into_iter().chain(c.backward)
        })
        .collect();
    let shell_from = ball.radius.saturating_sub(1).max(1);
    let start = ball.level_starts[shell_from.min(ball.level_starts.len() - 1)];
    let shell: Vec<PseudoProjMap> = ball.elements[start..]
        .par_iter()
        .filter_map(|entry| {
            let p = PseudoProjMap::new(*entry.element.lift()).ok()?;
            (p.rank() < 3).then_some(p)
        })
        .collect();
    let mut index = ProjIndex::new(eps_cluster);
    let mut reps = Vec::new();
    for p in cyclic.into_iter().chain(shell) {
        let key = p.matrix().entries();
        if index.find(&key).is_none() {
            index.push(&key);
            reps.push(p);
        }
    }
    reps
}
