//! Breadth-first enumeration of word balls.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GroupSpec;
use crate::error::{KlabError, Result};
use crate::group::{GroupElement, TOL_CANON};
use crate::index::ProjIndex;
use crate::linalg::C64;

/// Lookup radius in CP⁸ for duplicate candidates.
const CANDIDATE_RADIUS: f64 = 1e-8;
/// g·h⁻¹ this close to the identity means g = h, for well-conditioned g;
/// the threshold grows with the roundoff of the product.
const SAME_ELEMENT: f64 = 1e-7;
const SAME_ELEMENT_MAX: f64 = 1e-4;
/// g·h⁻¹ this close to the identity without being it suggests a
/// non-discrete group.
const NEAR_IDENTITY: f64 = 1e-3;

/// Generator `gen` (0-based), or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u16,
    pub inverse: bool,
}

impl std::fmt::Display for Letter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.inverse {
            write!(f, "g{}^-1", self.gen)
        } else {
            write!(f, "g{}", self.gen)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallEntry {
    pub element: GroupElement,
    pub word: Vec<Letter>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DedupStats {
    pub products: usize,
    pub duplicates: usize,
    /// New elements e with e·h⁻¹ near, but not at, the identity for some
    /// stored h close to e.
    pub near_collisions: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallEnumeration {
    /// Largest word length fully enumerated.
    pub radius: usize,
    pub elements: Vec<BallEntry>,
    /// `elements[level_starts[k]..level_starts[k + 1]]` have word length k.
    pub level_starts: Vec<usize>,
    pub truncated: bool,
    pub stats: DedupStats,
}

impl BallEnumeration {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn level(&self, k: usize) -> &[BallEntry] {
        if k + 1 >= self.level_starts.len() {
            return &[];
        }
        &self.elements[self.level_starts[k]..self.level_starts[k + 1]]
    }

    /// Number of word-length levels present (including length 0).
    pub fn levels(&self) -> usize {
        self.level_starts.len().saturating_sub(1)
    }

    pub fn upto(&self, k: usize) -> &[BallEntry] {
        let end = self.level_starts[(k + 1).min(self.level_starts.len() - 1)];
        &self.elements[..end]
    }

    /// The ball of radius `k ≤ self.radius`.
    pub fn truncated_to(&self, k: usize) -> BallEnumeration {
        let k = k.min(self.radius);
        BallEnumeration {
            radius: k,
            elements: self.upto(k).to_vec(),
            level_starts: self.level_starts[..=k + 1].to_vec(),
            truncated: false,
            stats: self.stats.clone(),
        }
    }

    pub fn suspected_non_discrete(&self) -> bool {
        self.stats.near_collisions > 0
    }
}

/// Generators and inverses with duplicates (involutions, repeated
/// generators, explicitly listed inverses) removed.
pub(crate) fn letters(spec: &GroupSpec) -> Vec<(Letter, GroupElement)> {
    let mut out: Vec<(Letter, GroupElement)> = Vec::new();
    for (i, g) in spec.generators.iter().enumerate() {
        for (inverse, e) in [(false, *g), (true, g.inverse())] {
            if e.is_identity(TOL_CANON) || out.iter().any(|(_, x)| x.eq_tol(&e, TOL_CANON)) {
                continue;
            }
            let letter = Letter {
                gen: i as u16,
                inverse,
            };
            out.push((letter, e));
        }
    }
    out
}

/// Enumerates the ball, stopping early at `cap` elements; the result is
/// flagged `truncated` in that case.
pub fn enumerate_ball_partial(spec: &GroupSpec, radius: usize, cap: usize) -> BallEnumeration {
    enumerate_ball_tol(spec, radius, cap, TOL_CANON)
}

/// As `enumerate_ball_partial`, with `tol` as the CP⁸ distance below which
/// two canonical forms are the same element outright.
pub fn enumerate_ball_tol(
    spec: &GroupSpec,
    radius: usize,
    cap: usize,
    tol: f64,
) -> BallEnumeration {
    let alphabet = letters(spec);
    let mut index = ProjIndex::new(CANDIDATE_RADIUS);
    let id = GroupElement::identity();
    index.push(&id.canon().entries());
    let mut ball = BallEnumeration {
        radius: 0,
        elements: vec![BallEntry {
            element: id,
            word: Vec::new(),
        }],
        level_starts: vec![0, 1],
        truncated: false,
        stats: DedupStats::default(),
    };
    for level in 1..=radius {
        let prev = ball.level_starts[level - 1]..ball.level_starts[level];
        let elements = &ball.elements;
        let stored = &index;
        // products and their comparison with earlier levels run in
        // parallel; insertion order stays fixed
        let products: Vec<(usize, Letter, GroupElement, [C64; 9], Match)> = prev
            .into_par_iter()
            .flat_map_iter(|i| {
                let base = elements[i].element;
                alphabet.iter().map(move |(l, g)| {
                    let e = base.compose(g);
                    let key = e.canon().entries();
                    let m = lookup(stored, elements, &e, &key, tol);
                    (i, *l, e, key, m)
                })
            })
            .collect();
        let mut level_index = ProjIndex::new(CANDIDATE_RADIUS);
        let mut level_elements: Vec<BallEntry> = Vec::new();
        let mut complete = true;
        for (i, letter, e, key, m) in products {
            ball.stats.products += 1;
            let m = match m {
                Match::Duplicate => m,
                _ => m.or(lookup(&level_index, &level_elements, &e, &key, tol)),
            };
            match m {
                Match::Duplicate => {
                    ball.stats.duplicates += 1;
                    continue;
                }
                Match::Near => ball.stats.near_collisions += 1,
                Match::New => {}
            }
            if ball.elements.len() + level_elements.len() >= cap {
                complete = false;
                break;
            }
            level_index.push(&key);
            let mut word = ball.elements[i].word.clone();
            word.push(letter);
            level_elements.push(BallEntry { element: e, word });
        }
        for entry in level_elements {
            index.push(&entry.element.canon().entries());
            ball.elements.push(entry);
        }
        ball.level_starts.push(ball.elements.len());
        if !complete {
            ball.truncated = true;
            break;
        }
        ball.radius = level;
    }
    ball
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Match {
    New,
    Near,
    Duplicate,
}

impl Match {
    fn or(self, other: Match) -> Match {
        match (self, other) {
            (Match::Duplicate, _) | (_, Match::Duplicate) => Match::Duplicate,
            (Match::Near, _) | (_, Match::Near) => Match::Near,
            _ => Match::New,
        }
    }
}

/// Compares `e` with the stored elements near it in CP⁸.
///
/// Nearby in CP⁸ is not enough for equality: distinct elements accumulate
/// on the boundary, so equality is decided by e·h⁻¹ unless the canonical
/// forms agree to the canonical tolerance.
fn lookup(
    index: &ProjIndex,
    elements: &[BallEntry],
    e: &GroupElement,
    key: &[C64; 9],
    tol: f64,
) -> Match {
    let candidates = index.find_all(key, CANDIDATE_RADIUS);
    if candidates.is_empty() {
        return Match::New;
    }
    let cond = e.condition();
    let same = (1e-15 * cond).clamp(SAME_ELEMENT, SAME_ELEMENT_MAX);
    let mut out = Match::New;
    for j in candidates {
        let h = &elements[j].element;
        if h.eq_tol(e, tol) {
            return Match::Duplicate;
        }
        let q = e.compose(&h.inverse());
        if q.is_identity(same) {
            return Match::Duplicate;
        }
        if cond < 1e6 && q.is_identity(NEAR_IDENTITY) {
            out = Match::Near;
        }
    }
    out
}

pub fn enumerate_ball(spec: &GroupSpec, radius: usize, cap: usize) -> Result<BallEnumeration> {
    if radius < 1 || cap < 1 {
        return Err(KlabError::BadParameters(
            "radius and cap must be at least 1".into(),
        ));
    }
    spec.validate()?;
    let ball = enumerate_ball_partial(spec, radius, cap);
    if ball.truncated {
        return Err(KlabError::CapExceeded {
            cap,
            radius: ball.radius,
            partial: Box::new(ball),
        });
    }
    Ok(ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix3;

    fn cyclic(d: [f64; 3]) -> GroupSpec {
        let g = GroupElement::new(Matrix3::diag_real(d[0], d[1], d[2])).unwrap();
        GroupSpec::new("cyclic", vec![g]).unwrap()
    }

    #[test]
    fn cyclic_ball_size() {
        let b = enumerate_ball(&cyclic([2.0, 1.0, 0.5]), 5, 1000).unwrap();
        assert_eq!(b.len(), 11);
        assert_eq!(b.levels(), 6);
        assert_eq!(b.level(0).len(), 1);
        for k in 1..=5 {
            assert_eq!(b.level(k).len(), 2);
        }
    }

    #[test]
    fn listed_inverse_is_redundant() {
        let g = GroupElement::new(Matrix3::diag_real(2.0, 1.0, 0.5)).unwrap();
        let two = GroupSpec::new("both", vec![g, g.inverse()]).unwrap();
        let b = enumerate_ball(&two, 5, 1000).unwrap();
        assert_eq!(b.len(), 11);
    }

    #[test]
    fn cap_reports_partial() {
        match enumerate_ball(&cyclic([2.0, 1.0, 0.5]), 5, 4) {
            Err(KlabError::CapExceeded { partial, cap, .. }) => {
                assert_eq!(cap, 4);
                assert_eq!(partial.len(), 4);
                assert!(partial.truncated);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inverse_closed() {
        let a = GroupElement::new(Matrix3::from_real([
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]))
        .unwrap();
        let b = GroupElement::new(Matrix3::from_real([
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ]))
        .unwrap();
        let spec = GroupSpec::new("ab", vec![a, b]).unwrap();
        let ball = enumerate_ball(&spec, 4, 100_000).unwrap();
        for e in ball.upto(3) {
            let inv = e.element.inverse();
            assert!(ball.elements.iter().any(|x| x.element == inv));
        }
    }
}
