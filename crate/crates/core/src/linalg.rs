//! Small dense complex linear algebra: 3-vectors, 3×3 matrices and a
//! one-sided Jacobi SVD.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A vector of ℂ³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex3(pub [C64; 3]);

impl Complex3 {
    pub const fn new(a: C64, b: C64, d: C64) -> Self {
        Complex3([a, b, d])
    }

    pub fn real(a: f64, b: f64, d: f64) -> Self {
        Complex3([c(a, 0.0), c(b, 0.0), c(d, 0.0)])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [ZERO; 3];
        v[i] = ONE;
        Complex3(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        // scaled to avoid overflow for huge entries
        let m = self.max_abs();
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        let s = self.scale(1.0 / m);
        m * s.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Complex3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Complex3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Unconjugated bilinear pairing Σ aᵢbᵢ.
    pub fn dot(&self, o: &Complex3) -> C64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    /// Hermitian product Σ conj(aᵢ) bᵢ.
    pub fn hdot(&self, o: &Complex3) -> C64 {
        self.0[0].conj() * o.0[0] + self.0[1].conj() * o.0[1] + self.0[2].conj() * o.0[2]
    }

    /// Bilinear cross product; the result pairs to zero with both inputs.
    pub fn cross(&self, o: &Complex3) -> Complex3 {
        let a = &self.0;
        let b = &o.0;
        Complex3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn conj(&self) -> Complex3 {
        Complex3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }
}

impl Index<usize> for Complex3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl Add for Complex3 {
    type Output = Complex3;
    fn add(self, o: Complex3) -> Complex3 {
        Complex3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Complex3 {
    type Output = Complex3;
    fn sub(self, o: Complex3) -> Complex3 {
        Complex3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Complex3 {
    type Output = Complex3;
    fn neg(self) -> Complex3 {
        self.scale(-1.0)
    }
}

/// Determinant of the matrix whose rows are `a`, `b`, `d`.
pub fn det3(a: &Complex3, b: &Complex3, d: &Complex3) -> C64 {
    a.dot(&b.cross(d))
}

/// Dense 3×3 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix3(pub [[C64; 3]; 3]);

impl Matrix3 {
    pub const fn zero() -> Self {
        Matrix3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag([ONE, ONE, ONE])
    }

    pub fn diag(d: [C64; 3]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn diag_real(a: f64, b: f64, d: f64) -> Self {
        Self::diag([c(a, 0.0), c(b, 0.0), c(d, 0.0)])
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = c(rows[i][j], 0.0);
            }
        }
        m
    }

    pub fn from_rows(r: [Complex3; 3]) -> Self {
        Matrix3([r[0].0, r[1].0, r[2].0])
    }

    pub fn from_cols(cols: [Complex3; 3]) -> Self {
        Self::from_rows(cols).transpose()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [C64; 9] {
        let mut out = [ZERO; 9];
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = self.0[i][j];
            }
        }
        out
    }

    pub fn from_entries(e: &[C64; 9]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = e[3 * i + j];
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> Complex3 {
        Complex3(self.0[i])
    }

    pub fn col(&self, j: usize) -> Complex3 {
        Complex3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = self.transpose();
        for z in m.0.iter_mut().flatten() {
            *z = z.conj();
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for z in m.0.iter_mut().flatten() {
            *z *= s;
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        let mut m = *self;
        for z in m.0.iter_mut().flatten() {
            *z *= s;
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> C64 {
        det3(&self.row(0), &self.row(1), &self.row(2))
    }

    /// Sum of principal 2×2 minors.
    pub fn minor_sum(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1]
    }

    /// Classical adjugate, `adj(M)·M = det(M)·I`.
    pub fn adjugate(&self) -> Self {
        let r0 = self.row(0);
        let r1 = self.row(1);
        let r2 = self.row(2);
        // columns of the adjugate are cross products of rows
        Self::from_cols([r1.cross(&r2), r2.cross(&r0), r0.cross(&r1)])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }

    pub fn mul_vec(&self, v: &Complex3) -> Complex3 {
        Complex3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = self.0.iter().flatten().map(|z| (z / m).norm_sqr()).sum();
        m * s.sqrt()
    }

    /// Index (row-major) of the largest-modulus entry; near-ties (relative
    /// 1e-9) go to the lowest index.
    pub fn dominant_index(&self) -> usize {
        let e = self.entries();
        let m = self.max_abs();
        e.iter()
            .position(|z| z.norm() >= m * (1.0 - 1e-9))
            .unwrap_or(0)
    }

    /// Rescaled so that the dominant entry equals 1.
    pub fn max_normalized(&self) -> Self {
        let k = self.dominant_index();
        let z = self.entries()[k];
        if z.norm() == 0.0 {
            return *self;
        }
        self.scale(z.inv())
    }

    pub fn sub_scalar(&self, s: C64) -> Self {
        let mut m = *self;
        for i in 0..3 {
            m.0[i][i] -= s;
        }
        m
    }

    pub fn svd(&self) -> Svd {
        svd3(self)
    }
}

impl Index<(usize, usize)> for Matrix3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, o: Matrix3) -> Matrix3 {
        let mut m = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] =
                    self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        m
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(self, o: Matrix3) -> Matrix3 {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(self, o: Matrix3) -> Matrix3 {
        self + o.scale_re(-1.0)
    }
}

/// Singular value decomposition `M = U·diag(σ)·Vᴴ`, σ sorted descending.
#[derive(Clone, Copy, Debug)]
pub struct Svd {
    pub u: [Complex3; 3],
    pub sigma: [f64; 3],
    pub v: [Complex3; 3],
}

impl Svd {
    /// Singular values relative to the largest one.
    pub fn ratios(&self) -> [f64; 3] {
        let s0 = self.sigma[0];
        if s0 == 0.0 {
            return [0.0; 3];
        }
        [1.0, self.sigma[1] / s0, self.sigma[2] / s0]
    }
}

/// One-sided (Hestenes) Jacobi SVD. Small singular values come out with
/// high relative accuracy, unlike the normal-equations route through MᴴM.
pub fn svd3(m: &Matrix3) -> Svd {
    let scale = m.max_abs();
    let mut cols = [m.col(0), m.col(1), m.col(2)];
    let mut v = [Complex3::basis(0), Complex3::basis(1), Complex3::basis(2)];
    if scale == 0.0 || !scale.is_finite() {
        return Svd {
            u: v,
            sigma: [0.0; 3],
            v,
        };
    }
    for c in cols.iter_mut() {
        *c = c.scale(1.0 / scale);
    }
    for _sweep in 0..40 {
        let mut rotated = false;
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let alpha = cols[i].norm_sqr();
            let beta = cols[j].norm_sqr();
            let gamma = cols[i].hdot(&cols[j]);
            let g = gamma.norm();
            if g <= 1e-17 * (alpha * beta).sqrt() || g == 0.0 {
                continue;
            }
            rotated = true;
            let phase = gamma / g;
            let zeta = (beta - alpha) / (2.0 * g);
            let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
            let t = sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let cs = 1.0 / (1.0 + t * t).sqrt();
            let sn = cs * t;
            let aj = cols[j].scale_c(phase.conj());
            let vj = v[j].scale_c(phase.conj());
            let ai = cols[i];
            let vi = v[i];
            cols[i] = ai.scale(cs) - aj.scale(sn);
            cols[j] = ai.scale(sn) + aj.scale(cs);
            v[i] = vi.scale(cs) - vj.scale(sn);
            v[j] = vi.scale(sn) + vj.scale(cs);
        }
        if !rotated {
            break;
        }
    }
    let mut idx = [0usize, 1, 2];
    let norms = [cols[0].norm(), cols[1].norm(), cols[2].norm()];
    idx.sort_by(|&a, &b| {
        norms[b]
            .partial_cmp(&norms[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = [
        norms[idx[0]] * scale,
        norms[idx[1]] * scale,
        norms[idx[2]] * scale,
    ];
    let v_sorted = [v[idx[0]], v[idx[1]], v[idx[2]]];
    let mut u = [Complex3::basis(0); 3];
    for k in 0..3 {
        let n = norms[idx[k]];
        u[k] = if n > 0.0 {
            cols[idx[k]].scale(1.0 / n)
        } else {
            Complex3([ZERO; 3])
        };
    }
    // complete U for zero singular values
    for k in 0..3 {
        if norms[idx[k]] == 0.0 {
            u[k] = complete_orthonormal(&u, k);
        }
    }
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

fn complete_orthonormal(u: &[Complex3; 3], k: usize) -> Complex3 {
    for e in 0..3 {
        let mut w = Complex3::basis(e);
        for (j, uj) in u.iter().enumerate() {
            if j != k && uj.norm_sqr() > 0.5 {
                w = w - uj.scale_c(uj.hdot(&w));
            }
        }
        let n = w.norm();
        if n > 1e-6 {
            return w.scale(1.0 / n);
        }
    }
    Complex3::basis(0)
}

/// Local Lipschitz factor, in the Fubini–Study metric, of the projective
/// map [x] ↦ [m·x] at the unit vector `v` (Frobenius bound, within √2).
pub fn projective_stretch(m: &Matrix3, v: &Complex3) -> f64 {
    let w = m.mul_vec(v);
    let wn = w.norm();
    if wn == 0.0 {
        return f64::INFINITY;
    }
    let u = w.scale(1.0 / wn);
    let (a, b) = orthonormal_complement(v);
    let off = |t: Complex3| {
        let mt = m.mul_vec(&t);
        (mt - u.scale_c(u.hdot(&mt))).norm_sqr()
    };
    (off(a) + off(b)).sqrt() / wn
}

/// Two unit vectors completing the unit vector `v` to a unitary basis.
pub fn orthonormal_complement(v: &Complex3) -> (Complex3, Complex3) {
    let k = (0..3)
        .min_by(|&a, &b| v.0[a].norm().total_cmp(&v.0[b].norm()))
        .unwrap();
    let e = Complex3::basis(k);
    let a = e - v.scale_c(v.hdot(&e));
    let a = a.scale(1.0 / a.norm());
    // v × a conjugated is Hermitian-orthogonal to both
    let b = v.cross(&a).conj();
    let b = b.scale(1.0 / b.norm());
    (a, b)
}

/// Fubini–Study angle between two nonzero vectors of ℂⁿ given as slices.
/// Uses `atan2(sin, cos)` so that tiny distances keep full relative accuracy.
pub fn fs_angle(a: &[C64], b: &[C64]) -> f64 {
    let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    if a == b {
        return 0.0;
    }
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() / (na * nb);
    // component of b/|b| orthogonal to a/|a|
    let sin2: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (y / nb - (x / na) * ip).norm_sqr())
        .sum();
    sin2.sqrt().atan2(ip.norm())
}
