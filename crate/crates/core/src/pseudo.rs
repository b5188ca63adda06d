//! Pseudo-projective maps: nonzero 3×3 matrices up to scale.

use serde::Serialize;

use crate::error::{KlabError, Result};
use crate::linalg::{fs_angle, Matrix3};
use crate::proj::{ProjLine, ProjPoint};

/// σ_i / σ_max below this counts as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Singular-value ratios inside this band are reported as borderline.
pub const BORDERLINE: (f64, f64) = (1e-10, 1e-6);
/// Points closer than this to the kernel cannot be mapped.
pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub enum Kernel {
    Empty,
    KPoint(ProjPoint),
    KLine(ProjLine),
}

#[derive(Clone, Debug, Serialize)]
pub enum Image {
    Full,
    ILine(ProjLine),
    IPoint(ProjPoint),
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RankDiagnostics {
    /// σ_i / σ_max, descending.
    pub ratios: [f64; 3],
    /// Some ratio falls in the borderline band, so the rank is ambiguous.
    pub borderline: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoProjMap {
    matrix: Matrix3,
    rank: usize,
    kernel: Kernel,
    image: Image,
    diagnostics: RankDiagnostics,
}

impl PseudoProjMap {
    pub fn new(m: Matrix3) -> Result<Self> {
        if !m.is_finite() {
            return Err(KlabError::InvalidInput("non-finite matrix entry".into()));
        }
        if m.max_abs() == 0.0 {
            return Err(KlabError::ZeroMatrix);
        }
        let matrix = m.max_normalized();
        let svd = matrix.svd();
        let ratios = svd.ratios();
        let rank = ratios.iter().filter(|&&r| r >= RANK_TOL).count().max(1);
        let borderline = ratios[1..]
            .iter()
            .any(|&r| r >= BORDERLINE.0 && r <= BORDERLINE.1);
        // right singular vectors of the null part span the kernel; left
        // singular vectors of the nonzero part span the image
        let (kernel, image) = match rank {
            3 => (Kernel::Empty, Image::Full),
            2 => (
                Kernel::KPoint(ProjPoint::new(svd.v[2])?),
                Image::ILine(ProjLine::from_dual(svd.u[0].cross(&svd.u[1]))?),
            ),
            _ => (
                Kernel::KLine(ProjLine::from_dual(svd.v[1].cross(&svd.v[2]))?),
                Image::IPoint(ProjPoint::new(svd.u[0])?),
            ),
        };
        Ok(PseudoProjMap {
            matrix,
            rank,
            kernel,
            image,
            diagnostics: RankDiagnostics { ratios, borderline },
        })
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn diagnostics(&self) -> &RankDiagnostics {
        &self.diagnostics
    }

    /// Fubini–Study distance from `p` to the kernel (π/2 if empty).
    pub fn kernel_distance(&self, p: &ProjPoint) -> f64 {
        match &self.kernel {
            Kernel::Empty => std::f64::consts::FRAC_PI_2,
            Kernel::KPoint(k) => p.distance(k),
            Kernel::KLine(l) => {
                // angle between p and the plane l: complement of the angle to its normal
                let n = l.dual().conj();
                let cos_n = p.coords().hdot(&n).norm() / (n.norm() * p.coords().norm());
                std::f64::consts::FRAC_PI_2 - cos_n.clamp(0.0, 1.0).acos()
            }
        }
    }

    pub fn act(&self, p: &ProjPoint) -> Result<ProjPoint> {
        if self.kernel_distance(p) <= KERNEL_TOL {
            return Err(KlabError::InKernel);
        }
        ProjPoint::new(self.matrix.mul_vec(p.coords())).map_err(|_| KlabError::InKernel)
    }

    pub fn distance(&self, other: &PseudoProjMap) -> f64 {
        fs_angle(&self.matrix.entries(), &other.matrix.entries())
    }
}

pub fn psp_new(m: Matrix3) -> Result<PseudoProjMap> {
    PseudoProjMap::new(m)
}

pub fn psp_act(m: &PseudoProjMap, p: &ProjPoint) -> Result<ProjPoint> {
    m.act(p)
}

pub fn psp_distance(a: &PseudoProjMap, b: &PseudoProjMap) -> f64 {
    a.distance(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rank_one_diag() {
        let m = psp_new(Matrix3::diag_real(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(m.rank(), 1);
        match m.kernel() {
            Kernel::KLine(l) => assert!(l.distance(&ProjLine::coordinate(0)) < 1e-14),
            k => panic!("{k:?}"),
        }
        match m.image() {
            Image::IPoint(p) => assert!(p.distance(&ProjPoint::basis(0)) < 1e-14),
            i => panic!("{i:?}"),
        }
        let p = psp_act(&m, &ProjPoint::real(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(p.distance(&ProjPoint::basis(0)) < 1e-14);
    }

    #[test]
    fn rank_two_diag() {
        let m = psp_new(Matrix3::diag_real(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(m.rank(), 2);
        match m.kernel() {
            Kernel::KPoint(p) => assert!(p.distance(&ProjPoint::basis(2)) < 1e-14),
            k => panic!("{k:?}"),
        }
        match m.image() {
            Image::ILine(l) => assert!(l.distance(&ProjLine::coordinate(2)) < 1e-14),
            i => panic!("{i:?}"),
        }
        let p = psp_act(&m, &ProjPoint::real(0.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(p.distance(&ProjPoint::basis(1)) < 1e-14);
        assert!(matches!(
            psp_act(&m, &ProjPoint::basis(2)),
            Err(KlabError::InKernel)
        ));
    }

    #[test]
    fn invertible_has_empty_kernel() {
        let m = psp_new(Matrix3::from_real([
            [2.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 3.0],
        ]))
        .unwrap();
        assert_eq!(m.rank(), 3);
        assert!(matches!(m.kernel(), Kernel::Empty));
    }

    #[test]
    fn distances() {
        let a = psp_new(Matrix3::diag_real(1.0, 0.0, 0.0)).unwrap();
        let b = psp_new(Matrix3::diag_real(0.0, 1.0, 0.0)).unwrap();
        assert!((psp_distance(&a, &b) - FRAC_PI_2).abs() < 1e-14);
        let m = Matrix3::from_real([[1.0, 2.0, 3.0], [0.0, 1.0, 0.0], [4.0, 0.0, 1.0]]);
        let x = psp_new(m).unwrap();
        let y = psp_new(m.scale(c(0.0, -7.0))).unwrap();
        assert!(psp_distance(&x, &y) < 1e-14);
        assert!(psp_distance(&x, &x) == 0.0);
    }

    #[test]
    fn zero_rejected() {
        assert!(matches!(
            psp_new(Matrix3::zero()),
            Err(KlabError::ZeroMatrix)
        ));
    }

    #[test]
    fn borderline_flagged() {
        let m = psp_new(Matrix3::diag_real(1.0, 1.0, 1e-8)).unwrap();
        assert!(m.diagnostics().borderline);
    }
}
