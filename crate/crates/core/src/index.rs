//! Tolerance-aware quantized hashing of projective classes.
//!
//! Vectors are phase-normalized on their dominant coordinate and their
//! real components are bucketed on a grid. A query only visits the cells
//! its coordinates are close to the boundary of, so lookups cost one cell
//! in the common case. Candidates are confirmed with the exact
//! Fubini–Study distance.

use std::collections::HashMap;

use crate::linalg::{fs_angle, C64};

// Exact zeros and simple dyadic entries are common; shifting the grid keeps
// them away from cell boundaries.
const GRID_OFFSET: f64 = std::f64::consts::FRAC_1_PI;
/// Cell width in units of the merge radius. Wide cells keep queries away
/// from cell boundaries, so most lookups touch a single cell.
const CELL_FACTOR: f64 = 200.0;

/// Normalized real coordinates of a vector under the phase fixed by
/// coordinate `k`, scaled to unit norm.
fn normalized(v: &[C64], k: usize) -> Vec<f64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ph = v[k].conj() / (v[k].norm() * n);
    let mut out = Vec::with_capacity(2 * v.len());
    for z in v {
        let w = z * ph;
        out.push(w.re);
        out.push(w.im);
    }
    out
}

#[derive(Clone, Debug)]
pub struct ProjIndex {
    tol: f64,
    cell: f64,
    map: HashMap<(u8, Vec<i64>), Vec<usize>>,
    reps: Vec<Vec<C64>>,
}

impl ProjIndex {
    /// `tol` is the Fubini–Study merge radius.
    pub fn new(tol: f64) -> Self {
        ProjIndex {
            tol,
            // unit vectors within FS angle t differ by at most ~4t in any real
            // coordinate after aligning phases on a near-dominant coordinate
            cell: CELL_FACTOR * tol,
            map: HashMap::new(),
            reps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, i: usize) -> &[C64] {
        &self.reps[i]
    }

    fn dominant(v: &[C64]) -> (usize, f64) {
        let mut best = 0;
        let mut m = 0.0;
        for (i, z) in v.iter().enumerate() {
            let a = z.norm();
            if a > m * (1.0 + 1e-9) {
                m = a;
                best = i;
            }
        }
        (best, m)
    }

    fn key(&self, coords: &[f64]) -> Vec<i64> {
        coords
            .iter()
            .map(|x| (x / self.cell + GRID_OFFSET).floor() as i64)
            .collect()
    }

    /// Index of a stored class within `tol` of `v`, if any.
    pub fn find(&self, v: &[C64]) -> Option<usize> {
        self.find_within(v, self.tol)
    }

    /// Index of the nearest stored class within `radius` (clamped to `tol`).
    pub fn find_within(&self, v: &[C64], radius: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        self.visit(v, radius, |i, d| {
            if best.is_none_or(|b| d < b.1) {
                best = Some((i, d));
            }
        });
        best.map(|b| b.0)
    }

    /// All stored classes within `radius` (clamped to `tol`), ascending.
    pub fn find_all(&self, v: &[C64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(v, radius, |i, _| out.push(i));
        out.sort_unstable();
        out.dedup();
        out
    }

    fn visit(&self, v: &[C64], radius: f64, mut f: impl FnMut(usize, f64)) {
        let radius = radius.min(self.tol);
        let (_, m) = Self::dominant(v);
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if m == 0.0 {
            return;
        }
        let slack = 5.0 * self.tol;
        for k in 0..v.len() {
            // any coordinate that could be dominant for a nearby vector
            if v[k].norm() < m - 2.0 * slack * n {
                continue;
            }
            let coords = normalized(v, k);
            let base = self.key(&coords);
            let mut alts: Vec<(usize, i64)> = Vec::new();
            for (d, x) in coords.iter().enumerate() {
                let fr = x / self.cell + GRID_OFFSET - base[d] as f64;
                if fr * self.cell < slack {
                    alts.push((d, -1));
                } else if (1.0 - fr) * self.cell < slack {
                    alts.push((d, 1));
                }
            }
            if alts.len() > 12 {
                // degenerate geometry; fall back to a scan
                for (i, r) in self.reps.iter().enumerate() {
                    let dist = fs_angle(r, v);
                    if dist < radius {
                        f(i, dist);
                    }
                }
                return;
            }
            for mask in 0u32..(1u32 << alts.len()) {
                let mut key = base.clone();
                for (bit, (d, delta)) in alts.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        key[*d] += delta;
                    }
                }
                if let Some(ids) = self.map.get(&(k as u8, key)) {
                    for &i in ids {
                        let dist = fs_angle(&self.reps[i], v);
                        if dist < radius {
                            f(i, dist);
                        }
                    }
                }
            }
        }
    }

    /// Inserts without checking for an existing match.
    pub fn push(&mut self, v: &[C64]) -> usize {
        let (k, _) = Self::dominant(v);
        let coords = normalized(v, k);
        let key = self.key(&coords);
        let id = self.reps.len();
        self.reps.push(v.to_vec());
        self.map.entry((k as u8, key)).or_default().push(id);
        id
    }

    /// Returns `(index, true)` when `v` was new.
    pub fn insert(&mut self, v: &[C64]) -> (usize, bool) {
        match self.find(v) {
            Some(i) => (i, false),
            None => (self.push(v), true),
        }
    }
}
