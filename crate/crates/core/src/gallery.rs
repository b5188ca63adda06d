//! Example groups with known line counts.
//!
//! Affine maps (w, z) ↦ A(w, z) + t act on [w:z:1] through the block
//! matrix [[A, t], [0, 1]]; lifts are normalized to determinant one.

use serde::Serialize;

use crate::census::Bucket;
use crate::dynamics::GroupSpec;
use crate::eigen::eigen3;
use crate::error::{KlabError, Result};
use crate::group::GroupElement;
use crate::linalg::{c, Matrix3, C64, ONE, ZERO};

#[derive(Clone, Debug, Serialize)]
pub struct GalleryEntry {
    pub id: &'static str,
    pub spec: GroupSpec,
    pub li: Bucket,
    pub lig: Bucket,
    /// Radius the example is run at by default.
    pub radius: usize,
    /// Number of vertices claimed for the example, when stated.
    pub vertices: Option<usize>,
}

pub const IDS: [&str; 6] = [
    "suspension4",
    "schottky_susp",
    "coordinate_triangle",
    "torus_bundle",
    "triangular_lox",
    "translations",
];

fn affine(a: [[C64; 2]; 2], t: [C64; 2]) -> Result<GroupElement> {
    GroupElement::new(Matrix3([
        [a[0][0], a[0][1], t[0]],
        [a[1][0], a[1][1], t[1]],
        [ZERO, ZERO, ONE],
    ]))
}

fn translation(w: C64, z: C64) -> Result<GroupElement> {
    affine([[ONE, ZERO], [ZERO, ONE]], [w, z])
}

fn bad(msg: impl Into<String>) -> KlabError {
    KlabError::BadParameters(msg.into())
}

fn fmt_c(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Translations of ℂ² by four ℝ-linearly independent vectors.
pub fn translations(v: [[C64; 2]; 4]) -> Result<GroupSpec> {
    let rows: Vec<[f64; 4]> = v
        .iter()
        .map(|x| [x[0].re, x[0].im, x[1].re, x[1].im])
        .collect();
    if det4(&rows).abs() < 1e-9 {
        return Err(bad("translation vectors are not R-linearly independent"));
    }
    let gens = v
        .iter()
        .map(|x| translation(x[0], x[1]))
        .collect::<Result<Vec<_>>>()?;
    GroupSpec::new("translations", gens)
}

fn det4(m: &[[f64; 4]]) -> f64 {
    let mut a: Vec<[f64; 4]> = m.to_vec();
    let mut det = 1.0;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                a[r][k] -= f * a[col][k];
            }
        }
    }
    det
}

pub fn default_translations() -> Result<GroupSpec> {
    translations([
        [ONE, ZERO],
        [c(0.0, 1.0), ZERO],
        [ZERO, ONE],
        [ZERO, c(0.0, 1.0)],
    ])
}

/// Single generator [[a,0,0],[1,b,0],[0,0,c]] with |a| < |b| < |c|.
pub fn triangular_lox(a: C64, b: C64, cc: C64) -> Result<GroupSpec> {
    if !(a.norm() > 0.0 && a.norm() < b.norm() && b.norm() < cc.norm()) {
        return Err(bad("need 0 < |a| < |b| < |c|"));
    }
    let g = GroupElement::new(Matrix3([[a, ZERO, ZERO], [ONE, b, ZERO], [ZERO, ZERO, cc]]))?;
    Ok(GroupSpec::new("triangular_lox", vec![g])?
        .with_meta("a", fmt_c(a))
        .with_meta("b", fmt_c(b))
        .with_meta("c", fmt_c(cc)))
}

/// diag(a, a, a⁻²) together with the cyclic permutation of coordinates.
pub fn coordinate_triangle(a: C64) -> Result<GroupSpec> {
    if a.norm() == 0.0 || (a.norm() - 1.0).abs() < 1e-9 {
        return Err(bad("need |a| different from 0 and 1"));
    }
    let m = GroupElement::new(Matrix3::diag([a, a, (a * a).inv()]))?;
    let b = GroupElement::new(Matrix3::from_real([
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
    ]))?;
    Ok(GroupSpec::new("coordinate_triangle", vec![m, b])?.with_meta("a", fmt_c(a)))
}

/// Hyperbolic Möbius map with attracting fixed point p, repelling fixed
/// point q and multiplier k > 1.
fn hyperbolic(p: f64, q: f64, k: f64) -> [[f64; 2]; 2] {
    let s = k.sqrt();
    let d = p - q;
    [
        [(p * s - q / s) / d, (p * q / s - p * q * s) / d],
        [(s - 1.0 / s) / d, (p / s - q * s) / d],
    ]
}

/// Isometric circles (center, radius) of a real Möbius map and its inverse.
fn isometric_circles(h: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let (a, cc, d) = (h[0][0], h[1][0], h[1][1]);
    let r = 1.0 / cc.abs();
    [(-d / cc, r), (a / cc, r)]
}

/// Block suspension of the Schottky group generated by two hyperbolic
/// maps with multiplier `k` and fixed points `±center ± rho`, together
/// with the scalar `g` acting as diag(g, g, g⁻²).
pub fn schottky_susp(k: f64, center: f64, rho: f64, g: C64) -> Result<GroupSpec> {
    if !(k > 1.0 && rho > 0.0 && center > 0.0) {
        return Err(bad("need multiplier > 1 and positive center and radius"));
    }
    if (g.norm() - 1.0).abs() < 1e-9 || g.norm() == 0.0 {
        return Err(bad("need |g| different from 0 and 1"));
    }
    let h1 = hyperbolic(center + rho, center - rho, k);
    let h2 = hyperbolic(-center - rho, -center + rho, k);
    let disks: Vec<(f64, f64)> = isometric_circles(&h1)
        .into_iter()
        .chain(isometric_circles(&h2))
        .collect();
    let mut margin = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            let gap = (disks[i].0 - disks[j].0).abs() - disks[i].1 - disks[j].1;
            margin = margin.min(gap);
        }
    }
    if margin <= 1e-3 {
        return Err(bad(format!(
            "isometric circles are not disjoint (margin {margin:.3e})"
        )));
    }
    let block = |h: [[f64; 2]; 2]| {
        GroupElement::new(Matrix3::from_real([
            [h[0][0], h[0][1], 0.0],
            [h[1][0], h[1][1], 0.0],
            [0.0, 0.0, 1.0],
        ]))
    };
    let scalar = GroupElement::new(Matrix3::diag([g, g, (g * g).inv()]))?;
    Ok(
        GroupSpec::new("schottky_susp", vec![block(h1)?, block(h2)?, scalar])?
            .with_meta("multiplier", k.to_string())
            .with_meta("center", center.to_string())
            .with_meta("rho", rho.to_string())
            .with_meta("g", fmt_c(g))
            .with_meta("isometric_circle_margin", format!("{margin:.6}")),
    )
}

/// Suspension of a hyperbolic 2×2 integer matrix: the diagonal map by its
/// eigenvalues, translations by (1, c) and (c, 1) where (1, c) is the
/// expanding eigenvector, and the coordinate swap.
pub fn suspension4(m: [[f64; 2]; 2]) -> Result<GroupSpec> {
    let [[p, q], [r, s]] = m;
    if ((p * s - q * r) - 1.0).abs() > 1e-12 {
        return Err(bad("seed matrix must have determinant 1"));
    }
    let tr = p + s;
    if tr.abs() <= 2.0 {
        return Err(bad("seed matrix must have real eigenvalues of modulus ≠ 1"));
    }
    if q == 0.0 {
        return Err(bad("seed matrix must have a nonzero off-diagonal entry"));
    }
    let disc = (tr * tr - 4.0).sqrt();
    let ap = (tr + tr.signum() * disc) / 2.0;
    let am = 1.0 / ap;
    let cv = (ap - p) / q;
    // the diagonal map must preserve the lattice spanned by (1, c), (c, 1)
    let basis = [[1.0, cv], [cv, 1.0]];
    let det = 1.0 - cv * cv;
    if det.abs() < 1e-9 {
        return Err(bad("translation vectors are dependent"));
    }
    for v in basis {
        let img = [ap * v[0], am * v[1]];
        let n = (img[0] - cv * img[1]) / det;
        let k = (img[1] - cv * img[0]) / det;
        if (n - n.round()).abs() > 1e-9 || (k - k.round()).abs() > 1e-9 {
            return Err(bad(
                "translation lattice is not preserved by the diagonal map; the group is not discrete",
            ));
        }
    }
    let g0 = affine([[c(ap, 0.0), ZERO], [ZERO, c(am, 0.0)]], [ZERO, ZERO])?;
    let g1 = translation(ONE, c(cv, 0.0))?;
    let g2 = translation(c(cv, 0.0), ONE)?;
    let g3 = affine([[ZERO, ONE], [ONE, ZERO]], [ZERO, ZERO])?;
    Ok(GroupSpec::new("suspension4", vec![g0, g1, g2, g3])?
        .with_meta("seed_matrix", format!("[[{p},{q}],[{r},{s}]]"))
        .with_meta("alpha_plus", ap.to_string())
        .with_meta("alpha_minus", am.to_string()))
}

/// Torus-bundle group of an integer matrix with one real eigenvalue α > 1
/// and a complex pair β, β̄: the map (w, z) ↦ (αw, βz) and translations by
/// the coordinates of the eigenvectors of α and β.
pub fn torus_bundle(m: [[f64; 3]; 3]) -> Result<GroupSpec> {
    let mat = Matrix3::from_real(m);
    if (mat.det() - ONE).norm() > 1e-9 {
        return Err(bad("matrix must have determinant 1"));
    }
    let e = eigen3(&mat);
    let real = e
        .groups
        .iter()
        .find(|g| g.value.im.abs() < 1e-9 && g.value.re > 1.0 && g.algebraic == 1);
    let cplx = e
        .groups
        .iter()
        .find(|g| g.value.im > 1e-9 && g.algebraic == 1);
    let (Some(ra), Some(cb)) = (real, cplx) else {
        return Err(bad("need a real eigenvalue > 1 and a non-real pair"));
    };
    let alpha = ra.value.re;
    let beta = cb.value;
    // real representative of the α-eigenvector
    let v = ra.vectors[0];
    let k = (0..3)
        .max_by(|&i, &j| v.0[i].norm().total_cmp(&v.0[j].norm()))
        .unwrap();
    let a: Vec<f64> = v.0.iter().map(|x| (x / v.0[k]).re).collect();
    let b = cb.vectors[0];
    let mut gens = vec![affine([[c(alpha, 0.0), ZERO], [ZERO, beta]], [ZERO, ZERO])?];
    for i in 0..3 {
        gens.push(translation(c(a[i], 0.0), b.0[i])?);
    }
    Ok(GroupSpec::new("torus_bundle", gens)?
        .with_meta("matrix", format!("{m:?}"))
        .with_meta("alpha", alpha.to_string())
        .with_meta("beta", fmt_c(beta)))
}

fn entry(
    id: &'static str,
    spec: GroupSpec,
    li: Bucket,
    lig: u8,
    radius: usize,
    vertices: Option<usize>,
) -> GalleryEntry {
    GalleryEntry {
        id,
        spec,
        li,
        lig: Bucket::Finite(lig),
        radius,
        vertices,
    }
}

pub fn build(id: &str) -> Result<GalleryEntry> {
    use Bucket::{Finite, Infinite};
    Ok(match id {
        "suspension4" => entry(
            "suspension4",
            suspension4([[3.0, 1.0], [-1.0, 0.0]])?,
            Infinite,
            4,
            10,
            None,
        ),
        "schottky_susp" => entry(
            "schottky_susp",
            schottky_susp(9.0, 2.0, 0.5, c(2.0, 0.0))?,
            Infinite,
            3,
            10,
            None,
        ),
        "coordinate_triangle" => entry(
            "coordinate_triangle",
            coordinate_triangle(c(2.0, 0.0))?,
            Finite(3),
            3,
            10,
            None,
        ),
        "torus_bundle" => entry(
            "torus_bundle",
            torus_bundle([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])?,
            Infinite,
            2,
            12,
            Some(2),
        ),
        "triangular_lox" => entry(
            "triangular_lox",
            triangular_lox(c(0.5, 0.0), ONE, c(2.0, 0.0))?,
            Finite(2),
            2,
            10,
            None,
        ),
        "translations" => entry(
            "translations",
            default_translations()?,
            Finite(1),
            1,
            10,
            None,
        ),
        other => {
            return Err(KlabError::InvalidInput(format!(
                "unknown gallery id {other:?}"
            )))
        }
    })
}

pub fn gallery() -> Result<Vec<GalleryEntry>> {
    IDS.iter().map(|id| build(id)).collect()
}
