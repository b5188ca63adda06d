//! Combinatorics of line families: pencils, maximal subfamilies in general
//! position, vertices, and the Li/LiG buckets.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::dynamics::{LimitEstimate, PencilFlag};
use crate::index::ProjIndex;
use crate::proj::{concurrency_residual, meet_tol, ProjLine, ProjPoint};

/// Three lines with |det| of their unit duals below this are concurrent.
pub const TOL_CONCURRENT: f64 = 1e-8;
/// Concurrency residuals inside this band are numerically ambiguous.
pub const GUARD_BAND: (f64, f64) = (1e-10, 1e-6);
pub const DEFAULT_PENCIL_THRESHOLD: usize = 10;
pub const DEFAULT_INFINITE_THRESHOLD: usize = 50;
/// Largest family searched exactly.
pub const EXACT_LIMIT: usize = 64;
/// Members kept per pencil when a large family is reduced for the search.
const PENCIL_SAMPLE: usize = 6;
/// Node budget of the exact search before it gives up on optimality.
const NODE_BUDGET: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub enum Bucket {
    Zero,
    Finite(u8),
    Infinite,
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bucket::Zero => write!(f, "0"),
            Bucket::Finite(n) => write!(f, "{n}"),
            Bucket::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Bucket {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Bucket {
    pub fn parse(s: &str) -> Option<Bucket> {
        match s {
            "0" => Some(Bucket::Zero),
            "inf" | "∞" | "infinite" => Some(Bucket::Infinite),
            _ => s.parse::<u8>().ok().map(Bucket::Finite),
        }
    }
}

/// Lines of a family through a common point.
#[derive(Clone, Debug, Serialize)]
pub struct Pencil {
    pub point: ProjPoint,
    pub members: Vec<usize>,
}

fn unit_residual(p: &ProjPoint, l: &ProjLine) -> f64 {
    // both representatives are unit vectors
    p.coords().dot(l.dual()).norm()
}

/// Points through which at least `threshold` lines of the family pass.
///
/// Candidate points are the supplied `hints` plus pairwise meets inside a
/// deterministic sample of the family that at least three sampled lines
/// share; every candidate is then counted against the whole family.
pub fn find_pencils(
    lines: &[ProjLine],
    threshold: usize,
    hints: &[ProjPoint],
    tol: f64,
) -> Vec<Pencil> {
    let n = lines.len();
    if n < threshold.max(3) {
        return Vec::new();
    }
    let mut sample: Vec<usize> = (0..n.min(48)).collect();
    if n > 48 {
        let step = n as f64 / 48.0;
        sample.extend((0..48).map(|i| ((i as f64 + 0.5) * step) as usize));
        sample.sort_unstable();
        sample.dedup();
    }
    let mut cands = ProjIndex::new(1e-7);
    let mut mult: Vec<usize> = Vec::new();
    let mut points: Vec<ProjPoint> = Vec::new();
    for (a, &i) in sample.iter().enumerate() {
        for &j in &sample[a + 1..] {
            if let Ok(p) = meet_tol(&lines[i], &lines[j], 1e-12) {
                let (k, new) = cands.insert(&p.coords().0);
                if new {
                    mult.push(1);
                    points.push(p);
                } else {
                    mult[k] += 1;
                }
            }
        }
    }
    let mut candidates: Vec<ProjPoint> = hints.to_vec();
    // three concurrent lines give three coincident pairwise meets
    candidates.extend(
        points
            .iter()
            .zip(&mult)
            .filter(|(_, &m)| m >= 3)
            .map(|(p, _)| *p),
    );
    let mut seen = ProjIndex::new(1e-7);
    let mut out = Vec::new();
    for p in candidates {
        if !seen.insert(&p.coords().0).1 {
            continue;
        }
        let members: Vec<usize> = (0..n)
            .filter(|&i| unit_residual(&p, &lines[i]) <= tol)
            .collect();
        if members.len() >= threshold {
            out.push(Pencil { point: p, members });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralPosition {
    pub size: usize,
    /// Indices into the input family.
    pub witness: Vec<usize>,
    /// False when the value is only a lower bound (heuristic search).
    pub exact: bool,
    /// Triples whose concurrency residual fell in the guard band.
    pub ambiguous_triples: usize,
}

struct Search {
    n: usize,
    /// conflict[i][j]: lines k making (i, j, k) concurrent.
    conflict: Vec<Vec<u64>>,
    best: Vec<usize>,
    nodes: u64,
    exhausted: bool,
}

impl Search {
    fn run(&mut self, chosen: &mut Vec<usize>, cand: u64) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            self.exhausted = true;
            return;
        }
        if chosen.len() > self.best.len() {
            self.best = chosen.clone();
        }
        if cand == 0 || chosen.len() + cand.count_ones() as usize <= self.best.len() {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let rest = cand & !(1u64 << v);
        let mut blocked = 0u64;
        for &c in chosen.iter() {
            blocked |= self.conflict[v][c];
        }
        chosen.push(v);
        self.run(chosen, rest & !blocked);
        chosen.pop();
        if self.exhausted {
            return;
        }
        self.run(chosen, rest);
    }
}

fn concurrent(a: &ProjLine, b: &ProjLine, d: &ProjLine, tol: f64) -> bool {
    concurrency_residual(a, b, d) <= tol
}

fn exact_search(lines: &[ProjLine], tol: f64) -> GeneralPosition {
    let n = lines.len();
    debug_assert!(n <= EXACT_LIMIT);
    let mut conflict = vec![vec![0u64; n]; n];
    let mut ambiguous = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let r = concurrency_residual(&lines[i], &lines[j], &lines[k]);
                if r >= GUARD_BAND.0 && r <= GUARD_BAND.1 {
                    ambiguous += 1;
                }
                if r <= tol {
                    conflict[i][j] |= 1 << k;
                    conflict[j][i] |= 1 << k;
                    conflict[i][k] |= 1 << j;
                    conflict[k][i] |= 1 << j;
                    conflict[j][k] |= 1 << i;
                    conflict[k][j] |= 1 << i;
                }
            }
        }
    }
    let mut s = Search {
        n,
        conflict,
        best: Vec::new(),
        nodes: 0,
        exhausted: false,
    };
    let all = if s.n == 64 {
        u64::MAX
    } else {
        (1u64 << s.n) - 1
    };
    s.run(&mut Vec::new(), all);
    GeneralPosition {
        size: s.best.len(),
        witness: s.best,
        exact: !s.exhausted,
        ambiguous_triples: ambiguous,
    }
}

fn compatible(lines: &[ProjLine], set: &[usize], cand: usize, tol: f64) -> bool {
    for (a, &i) in set.iter().enumerate() {
        for &j in &set[a + 1..] {
            if concurrent(&lines[i], &lines[j], &lines[cand], tol) {
                return false;
            }
        }
    }
    true
}

/// Greedy construction followed by one-for-two exchange passes.
fn heuristic_search(lines: &[ProjLine], tol: f64) -> GeneralPosition {
    let n = lines.len();
    let mut set: Vec<usize> = Vec::new();
    for i in 0..n {
        if compatible(lines, &set, i, tol) {
            set.push(i);
        }
    }
    let mut improved = true;
    let mut passes = 0;
    while improved && passes < 8 {
        improved = false;
        passes += 1;
        'outer: for drop in 0..set.len() {
            let mut base = set.clone();
            base.remove(drop);
            let mut added = Vec::new();
            for c in 0..n {
                if base.contains(&c) || c == set[drop] {
                    continue;
                }
                let mut trial = base.clone();
                trial.extend(&added);
                if compatible(lines, &trial, c, tol) {
                    added.push(c);
                    if added.len() == 2 {
                        base.extend(added);
                        set = base;
                        improved = true;
                        break 'outer;
                    }
                }
            }
        }
    }
    set.sort_unstable();
    GeneralPosition {
        size: set.len(),
        witness: set,
        exact: false,
        ambiguous_triples: 0,
    }
}

/// Indices of a reduced family for the search: lines outside every pencil,
/// lines shared by two pencils, and a spread sample of each pencil.
pub fn reduce_for_search(n: usize, pencils: &[Pencil]) -> Vec<usize> {
    let mut count = vec![0usize; n];
    for p in pencils {
        for &m in &p.members {
            count[m] += 1;
        }
    }
    let mut keep: Vec<bool> = count.iter().map(|&c| c != 1).collect();
    for p in pencils {
        let single: Vec<usize> = p
            .members
            .iter()
            .copied()
            .filter(|&m| count[m] == 1)
            .collect();
        let take = single.len().min(PENCIL_SAMPLE);
        for t in 0..take {
            keep[single[t * single.len() / take]] = true;
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

pub fn max_general_position_tol(lines: &[ProjLine], tol: f64) -> GeneralPosition {
    if lines.len() <= EXACT_LIMIT {
        return exact_search(lines, tol);
    }
    let pencils = find_pencils(lines, DEFAULT_PENCIL_THRESHOLD, &[], tol);
    let reduced = reduce_for_search(lines.len(), &pencils);
    if reduced.len() <= EXACT_LIMIT {
        let sub: Vec<ProjLine> = reduced.iter().map(|&i| lines[i]).collect();
        let mut r = exact_search(&sub, tol);
        r.witness = r.witness.iter().map(|&i| reduced[i]).collect();
        // exact on the reduced family only
        r.exact = false;
        return r;
    }
    heuristic_search(lines, tol)
}

/// Largest subfamily with no three lines concurrent.
pub fn max_general_position(lines: &[ProjLine]) -> (usize, Vec<ProjLine>) {
    let r = max_general_position_tol(lines, TOL_CONCURRENT);
    (r.size, r.witness.iter().map(|&i| lines[i]).collect())
}

/// Meets of two witness lines through which at least `threshold` family
/// lines pass.
pub fn detect_vertices(
    lines: &[ProjLine],
    witness: &[ProjLine],
    pencil_threshold: usize,
) -> Vec<ProjPoint> {
    let mut seen = ProjIndex::new(1e-7);
    let mut out = Vec::new();
    for (a, l1) in witness.iter().enumerate() {
        for l2 in &witness[a + 1..] {
            let Ok(p) = meet_tol(l1, l2, 1e-12) else {
                continue;
            };
            let through = lines
                .iter()
                .filter(|l| unit_residual(&p, l) <= TOL_CONCURRENT)
                .count();
            if through >= pencil_threshold && seen.insert(&p.coords().0).1 {
                out.push(p);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CensusConfig {
    pub infinite_threshold: usize,
    pub pencil_threshold: usize,
    pub tol: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            infinite_threshold: DEFAULT_INFINITE_THRESHOLD,
            pencil_threshold: DEFAULT_PENCIL_THRESHOLD,
            tol: TOL_CONCURRENT,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub raw_count: usize,
    pub pencils: Vec<PencilFlag>,
    pub li_bucket: Bucket,
    pub lig_value: usize,
    pub lig_exact: bool,
    pub lig_bucket: Bucket,
    pub vertices: Vec<ProjPoint>,
    pub witness: Vec<ProjLine>,
    /// Buckets under the strict and loose readings of ambiguous triples,
    /// present only when they disagree with the primary reading.
    pub ambiguous_alternatives: Vec<(Bucket, Bucket)>,
    pub diagnostics: Vec<String>,
}

impl CensusReport {
    pub fn buckets(&self) -> (Bucket, Bucket) {
        (self.li_bucket, self.lig_bucket)
    }

    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous_alternatives.is_empty()
    }
}

fn lig_bucket(value: usize, diagnostics: &mut Vec<String>) -> Bucket {
    match value {
        0 => Bucket::Zero,
        1..=4 => Bucket::Finite(value as u8),
        _ => {
            diagnostics.push(format!(
                "theorem-coerced: {value} lines in general position reported as infinite"
            ));
            Bucket::Infinite
        }
    }
}

/// Buckets a detected line family. `previous` is the family at the
/// preceding radius; finite counts must agree with it to be reported.
pub fn classify_census_with(
    est: &LimitEstimate,
    previous: Option<&LimitEstimate>,
    cfg: &CensusConfig,
) -> CensusReport {
    let lines = est.line_list();
    let mut diagnostics = Vec::new();
    let hints: Vec<ProjPoint> = est.pencils.iter().map(|p| p.point).collect();
    let found = find_pencils(&lines, cfg.pencil_threshold, &hints, cfg.tol);
    let mut pencils: Vec<PencilFlag> = found
        .iter()
        .map(|p| {
            let known = est
                .pencils
                .iter()
                .find(|q| q.point.distance(&p.point) < 1e-7);
            PencilFlag {
                point: p.point,
                count: p.members.len(),
                sweeping: known.is_some_and(|q| q.sweeping),
                circle: known.and_then(|q| q.circle),
            }
        })
        .collect();
    for q in &est.pencils {
        if !pencils.iter().any(|p| p.point.distance(&q.point) < 1e-7) {
            pencils.push(q.clone());
        }
    }
    let raw = lines.len();

    let li_bucket = if raw == 0 {
        Bucket::Zero
    } else if !pencils.is_empty() {
        diagnostics.push("pencil detected: infinitely many lines".into());
        Bucket::Infinite
    } else if raw >= cfg.infinite_threshold {
        Bucket::Infinite
    } else if raw > 3 {
        diagnostics.push(format!("theorem-coerced: {raw} lines reported as infinite"));
        Bucket::Infinite
    } else if previous.is_some_and(|p| p.lines.len() != raw) {
        diagnostics.push(format!(
            "line count {raw} differs from the previous radius; treated as still growing"
        ));
        Bucket::Infinite
    } else {
        Bucket::Finite(raw as u8)
    };

    let gp_on = |tol: f64| -> GeneralPosition {
        if raw <= EXACT_LIMIT {
            return exact_search(&lines, tol);
        }
        let reduced = reduce_for_search(raw, &found);
        if reduced.len() <= EXACT_LIMIT {
            let sub: Vec<ProjLine> = reduced.iter().map(|&i| lines[i]).collect();
            let mut r = exact_search(&sub, tol);
            r.witness = r.witness.iter().map(|&i| reduced[i]).collect();
            r.exact = false;
            r
        } else {
            heuristic_search(&lines, tol)
        }
    };
    let gp = gp_on(cfg.tol);
    if !gp.exact {
        diagnostics.push("general-position value is a lower bound".into());
    }
    let mut lig = lig_bucket(gp.size, &mut diagnostics);
    if let Some(prev) = previous {
        let prev_lines = prev.line_list();
        if lig != Bucket::Infinite && prev_lines.len() <= EXACT_LIMIT && raw <= EXACT_LIMIT {
            let prev_gp = exact_search(&prev_lines, cfg.tol);
            if prev_gp.size != gp.size {
                diagnostics.push(format!(
                    "general-position value {} differs from {} at the previous radius",
                    gp.size, prev_gp.size
                ));
            }
        }
    }
    let mut alternatives = Vec::new();
    if gp.ambiguous_triples > 0 {
        diagnostics.push(format!(
            "{} concurrency triples inside the guard band",
            gp.ambiguous_triples
        ));
        for tol in [GUARD_BAND.0, GUARD_BAND.1] {
            let alt = gp_on(tol);
            let mut scratch = Vec::new();
            let b = lig_bucket(alt.size, &mut scratch);
            if b != lig {
                alternatives.push((li_bucket, b));
            }
        }
    }
    if lig == Bucket::Zero && raw > 0 {
        lig = Bucket::Finite(1);
    }
    let witness: Vec<ProjLine> = gp.witness.iter().map(|&i| lines[i]).collect();
    let vertices = detect_vertices(&lines, &witness, cfg.pencil_threshold);
    CensusReport {
        raw_count: raw,
        pencils,
        li_bucket,
        lig_value: gp.size,
        lig_exact: gp.exact,
        lig_bucket: lig,
        vertices,
        witness,
        ambiguous_alternatives: alternatives,
        diagnostics,
    }
}

pub fn classify_census(est: &LimitEstimate, infinite_threshold: usize) -> CensusReport {
    let cfg = CensusConfig {
        infinite_threshold,
        ..CensusConfig::default()
    };
    classify_census_with(est, None, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Provenance;
    use crate::linalg::Complex3;

    fn line(a: f64, b: f64, d: f64) -> ProjLine {
        ProjLine::from_dual(Complex3::real(a, b, d)).unwrap()
    }

    fn coordinate_triangle() -> Vec<ProjLine> {
        (0..3).map(ProjLine::coordinate).collect()
    }

    /// Lines through [e1] = [1:0:0]: duals (0, 1, t).
    fn pencil_e1(k: usize) -> Vec<ProjLine> {
        (0..k)
            .map(|t| line(0.0, 1.0, t as f64 * 0.7 - 2.0))
            .collect()
    }

    #[test]
    fn triangle_is_in_general_position() {
        let (n, w) = max_general_position(&coordinate_triangle());
        assert_eq!(n, 3);
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn pencil_has_two() {
        assert_eq!(max_general_position(&pencil_e1(7)).0, 2);
    }

    #[test]
    fn vertices_of_triangle_plus_pencil() {
        let mut lines = coordinate_triangle();
        // lines through [e3] = [0:0:1]: duals (1, t, 0)
        lines.extend((1..=10).map(|t| line(1.0, t as f64 * 0.37, 0.0)));
        let (_, witness) = max_general_position(&lines);
        let v = detect_vertices(&lines, &witness, 10);
        assert_eq!(v.len(), 1);
        assert!(v[0].distance(&ProjPoint::basis(2)) < 1e-12);
        assert!(detect_vertices(&coordinate_triangle(), &coordinate_triangle(), 10).is_empty());
    }

    #[test]
    fn buckets() {
        let est = LimitEstimate::from_parts(
            Provenance::Input,
            coordinate_triangle().into_iter().map(|l| (l, 1)),
            [],
        );
        let r = classify_census(&est, 50);
        assert_eq!(r.buckets(), (Bucket::Finite(3), Bucket::Finite(3)));

        let two = LimitEstimate::from_parts(
            Provenance::Input,
            coordinate_triangle().into_iter().take(2).map(|l| (l, 1)),
            [],
        );
        assert_eq!(
            classify_census(&two, 50).buckets(),
            (Bucket::Finite(2), Bucket::Finite(2))
        );
    }

    #[test]
    fn sixty_lines_two_pencils_with_gp_two() {
        // 60 lines through one point: LiG 2, Li infinite
        let lines = pencil_e1(60);
        let est =
            LimitEstimate::from_parts(Provenance::Input, lines.into_iter().map(|l| (l, 1)), []);
        let r = classify_census(&est, 50);
        assert_eq!(r.buckets(), (Bucket::Infinite, Bucket::Finite(2)));
    }

    #[test]
    fn pencils_found_in_large_family() {
        let mut lines = pencil_e1(80);
        lines.extend((0..80).map(|t| line(1.0, 0.0, t as f64 * 0.11 + 0.05)));
        let ps = find_pencils(&lines, 10, &[], TOL_CONCURRENT);
        assert_eq!(ps.len(), 2);
        let (n, _) = max_general_position(&lines);
        assert_eq!(n, 4);
    }
}
