//! Closed-form eigendecomposition of 3×3 complex matrices.
//!
//! Roots of the characteristic cubic come from Cardano's formula followed
//! by one Newton step on the cubic. Eigenvectors of simple eigenvalues are
//! the best-conditioned cross product of two rows of `M − λI`; repeated
//! eigenvalues take their null space from the SVD of `M − λI`, which also
//! decides the geometric multiplicity.

use serde::Serialize;

use crate::linalg::{c, Complex3, Matrix3, C64, ZERO};

/// Relative tolerance used to group two roots into a double eigenvalue and
/// to count null singular values of `M − λI`.
pub const MULTIPLICITY_TOL: f64 = 1e-7;
/// Repeated roots below this fraction of the spectral radius are
/// rechecked on the adjugate.
const SMALL_CLUSTER: f64 = 1e-2;
/// Condition estimates above this flag the decomposition.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Clone, Debug, Serialize)]
pub struct EigenGroup {
    pub value: C64,
    pub algebraic: usize,
    /// Basis of the eigenspace; its length is the geometric multiplicity.
    pub vectors: Vec<Complex3>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenData {
    /// Eigenvalues with multiplicity, sorted by increasing modulus.
    pub eigenvalues: [C64; 3],
    pub groups: Vec<EigenGroup>,
    pub diagonalizable: bool,
    pub condition: f64,
    pub ill_conditioned: bool,
}

impl EigenData {
    /// Every (λ, v) pair, one per eigenvector.
    pub fn pairs(&self) -> Vec<(C64, Complex3)> {
        self.groups
            .iter()
            .flat_map(|g| g.vectors.iter().map(move |v| (g.value, *v)))
            .collect()
    }

    pub fn moduli(&self) -> [f64; 3] {
        [
            self.eigenvalues[0].norm(),
            self.eigenvalues[1].norm(),
            self.eigenvalues[2].norm(),
        ]
    }
}

fn cubic(a: C64, b: C64, cc: C64, x: C64) -> (C64, C64) {
    let f = ((x + a) * x + b) * x + cc;
    let df = (c(3.0, 0.0) * x + c(2.0, 0.0) * a) * x + b;
    (f, df)
}

/// Roots of `x³ + a x² + b x + cc`.
pub fn cubic_roots(a: C64, b: C64, cc: C64) -> [C64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + cc;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let sq = disc.sqrt();
    let u3a = -q / 2.0 + sq;
    let u3b = -q / 2.0 - sq;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
    let mut xs = [ZERO; 3];
    if u3.norm() > 0.0 {
        let u = u3.cbrt();
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let mut uk = u;
        for x in xs.iter_mut() {
            *x = uk - p / (uk * 3.0);
            uk *= w;
        }
    }
    let mut roots = [xs[0] - shift, xs[1] - shift, xs[2] - shift];
    for r in roots.iter_mut() {
        let (f, df) = cubic(a, b, cc, *r);
        if df.norm() > 1e-8 {
            let step = f / df;
            if step.re.is_finite() && step.im.is_finite() {
                *r -= step;
            }
        }
    }
    roots
}

struct RootCluster {
    value: C64,
    mult: usize,
}

fn group_roots(roots: [C64; 3], a: C64, b: C64, cc: C64) -> Vec<RootCluster> {
    let rho = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = rho.max(1e-3);
    let p = b - a * a / 3.0;
    let d = |i: usize, j: usize| (roots[i] - roots[j]).norm();
    let spread = d(0, 1).max(d(0, 2)).max(d(1, 2));
    // a triple root is only located to ~eps^(1/3), so its test is on the
    // depressed coefficients rather than the root spread
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    if spread <= 1e-7 * scale
        || (p.norm() <= 1e-10 * scale * scale && q.norm() <= 1e-14 * scale * scale * scale)
    {
        return vec![RootCluster {
            value: -a / 3.0,
            mult: 3,
        }];
    }
    let pairs = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)];
    let (i, j, k) = pairs
        .into_iter()
        .min_by(|x, y| d(x.0, x.1).partial_cmp(&d(y.0, y.1)).unwrap())
        .unwrap();
    let gap = d(i, j);
    let mean = (roots[i] + roots[j]) / 2.0;
    let (_, dfm) = cubic(a, b, cc, mean);
    let near_double = gap <= MULTIPLICITY_TOL * scale
        || (gap <= 1e-5 * scale && dfm.norm() <= 1e-9 * scale * scale);
    if near_double {
        // the pair sums to tr − λ_k, which is better conditioned than either root
        let value = (-a - roots[k]) / 2.0;
        return vec![
            RootCluster { value, mult: 2 },
            RootCluster {
                value: roots[k],
                mult: 1,
            },
        ];
    }
    roots
        .iter()
        .map(|&value| RootCluster { value, mult: 1 })
        .collect()
}

fn best_cross(m: &Matrix3) -> Option<Complex3> {
    let r = [m.row(0), m.row(1), m.row(2)];
    let cands = [r[0].cross(&r[1]), r[0].cross(&r[2]), r[1].cross(&r[2])];
    let best = cands
        .into_iter()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())?;
    let n = best.norm();
    if n > 1e-14 {
        Some(best.scale(1.0 / n))
    } else {
        None
    }
}

fn null_space(m: &Matrix3, max_dim: usize) -> Vec<Complex3> {
    let s = m.svd();
    let mut out = Vec::new();
    for k in (0..3).rev() {
        if out.len() >= max_dim {
            break;
        }
        if s.sigma[k] <= MULTIPLICITY_TOL || out.is_empty() {
            out.push(s.v[k]);
        }
    }
    out
}

/// Eigendecomposition of a 3×3 complex matrix.
///
/// Roots much smaller than the largest are poorly separated in the
/// normalized cubic; a repeated small root is rechecked on the adjugate,
/// where those roots become the large ones.
pub fn eigen3(m: &Matrix3) -> EigenData {
    let direct = eigen3_direct(m);
    let top = direct.eigenvalues[2].norm();
    let small_repeat = direct
        .groups
        .iter()
        .any(|g| g.algebraic > 1 && g.value.norm() < SMALL_CLUSTER * top);
    let det = m.det();
    if !small_repeat || det.norm() == 0.0 {
        return direct;
    }
    let mut adj = eigen3_direct(&m.adjugate());
    if adj.groups.len() <= direct.groups.len() {
        return direct;
    }
    // adj(M) = det·M⁻¹ has eigenvalues det/λ on the same eigenvectors
    for g in &mut adj.groups {
        g.value = det / g.value;
    }
    for z in &mut adj.eigenvalues {
        *z = det / *z;
    }
    adj.eigenvalues
        .sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
    adj
}

fn eigen3_direct(m: &Matrix3) -> EigenData {
    let scale = m.max_abs();
    if scale == 0.0 || !m.is_finite() {
        return EigenData {
            eigenvalues: [ZERO; 3],
            groups: vec![EigenGroup {
                value: ZERO,
                algebraic: 3,
                vectors: vec![Complex3::basis(0), Complex3::basis(1), Complex3::basis(2)],
            }],
            diagonalizable: true,
            condition: if scale == 0.0 { 1.0 } else { f64::INFINITY },
            ill_conditioned: scale != 0.0,
        };
    }
    let a_mat = m.scale_re(1.0 / scale);
    let a = -a_mat.trace();
    let b = a_mat.minor_sum();
    let cc = -a_mat.det();
    let roots = cubic_roots(a, b, cc);
    let clusters = group_roots(roots, a, b, cc);

    let mut groups = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let shifted = a_mat.sub_scalar(cl.value);
        let vectors = if cl.mult == 1 {
            match best_cross(&shifted) {
                Some(v) => vec![v],
                None => null_space(&shifted, 1),
            }
        } else {
            null_space(&shifted, cl.mult)
        };
        groups.push(EigenGroup {
            value: cl.value * scale,
            algebraic: cl.mult,
            vectors,
        });
    }
    let n_vec: usize = groups.iter().map(|g| g.vectors.len()).sum();
    let diagonalizable = n_vec == 3;
    let mut cols = [Complex3([ZERO; 3]); 3];
    for (slot, v) in cols
        .iter_mut()
        .zip(groups.iter().flat_map(|g| g.vectors.iter()))
    {
        *slot = *v;
    }
    let sv = Matrix3::from_cols(cols).svd();
    let smallest = sv.sigma[n_vec.max(1) - 1];
    let condition = if smallest > 0.0 {
        sv.sigma[0] / smallest
    } else {
        f64::INFINITY
    };

    let mut eigenvalues = [ZERO; 3];
    let mut i = 0;
    for g in &groups {
        for _ in 0..g.algebraic {
            eigenvalues[i] = g.value;
            i += 1;
        }
    }
    eigenvalues.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
    EigenData {
        eigenvalues,
        groups,
        diagonalizable,
        condition,
        ill_conditioned: condition > ILL_CONDITIONED,
    }
}
