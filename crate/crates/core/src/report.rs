//! End-to-end runs and their reports.
//!
//! Reports hold plain numbers only, so that they read back without the
//! library and serialize byte-identically for identical runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::census::{classify_census_with, Bucket, CensusConfig, CensusReport};
use crate::dynamics::{
    accumulate, c_gamma_family, enumerate_ball_tol, eq_complement_family, kulkarni_from_ball,
    lambda_from_parts, union_check, BallEnumeration, GroupSpec, KernelFamily, LimitEstimate,
    PencilFlag, Provenance, SeedConfig, DEFAULT_CAP, DEFAULT_EPS_CLUSTER, DEFAULT_FAMILY_CAP,
};
use crate::error::{KlabError, Result};
use crate::gallery::GalleryEntry;
use crate::group::TOL_CANON;
use crate::linalg::Complex3;
use crate::proj::ProjLine;

/// Homogeneous coordinates as `[re, im]` pairs.
pub type Coords = [[f64; 2]; 3];

pub fn coords(v: &Complex3) -> Coords {
    v.0.map(|z| [z.re, z.im])
}

pub fn from_coords(c: &Coords) -> Complex3 {
    Complex3(c.map(|[re, im]| crate::linalg::c(re, im)))
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub radius: usize,
    pub cap: usize,
    pub family_cap: usize,
    pub eps_cluster: f64,
    /// CP⁸ distance at which two group elements are identified outright.
    pub tol: f64,
    pub seeds: SeedConfig,
    pub census: CensusConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            radius: 10,
            cap: DEFAULT_CAP,
            family_cap: DEFAULT_FAMILY_CAP,
            eps_cluster: DEFAULT_EPS_CLUSTER,
            tol: TOL_CANON,
            seeds: SeedConfig::default(),
            census: CensusConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radius < 2 {
            return Err(KlabError::BadParameters("radius must be at least 2".into()));
        }
        if self.cap < 1 || self.family_cap < 1 {
            return Err(KlabError::BadParameters("caps must be positive".into()));
        }
        if !(self.eps_cluster > 0.0 && self.tol > 0.0) {
            return Err(KlabError::BadParameters(
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineEntry {
    pub dual: Coords,
    pub weight: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub coords: Coords,
    pub weight: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilView {
    pub point: Coords,
    pub count: usize,
    pub sweeping: bool,
}

impl From<&PencilFlag> for PencilView {
    fn from(p: &PencilFlag) -> Self {
        PencilView {
            point: coords(p.point.coords()),
            count: p.count,
            sweeping: p.sweeping,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateView {
    pub lines: Vec<LineEntry>,
    pub points: Vec<PointEntry>,
    pub pencils: Vec<PencilView>,
}

impl From<&LimitEstimate> for EstimateView {
    fn from(e: &LimitEstimate) -> Self {
        EstimateView {
            lines: e
                .lines
                .iter()
                .map(|(l, w)| LineEntry {
                    dual: coords(l.dual()),
                    weight: *w,
                })
                .collect(),
            points: e
                .points
                .iter()
                .map(|(p, w)| PointEntry {
                    coords: coords(p.coords()),
                    weight: *w,
                })
                .collect(),
            pencils: e.pencils.iter().map(PencilView::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFlags {
    pub capped: bool,
    pub skipped_elliptic: usize,
    pub skipped_ill_conditioned: usize,
    pub dropped_imprecise: usize,
}

impl From<&KernelFamily> for FamilyFlags {
    fn from(f: &KernelFamily) -> Self {
        FamilyFlags {
            capped: f.capped,
            skipped_elliptic: f.skipped_elliptic,
            skipped_ill_conditioned: f.skipped_ill_conditioned,
            dropped_imprecise: f.dropped_imprecise,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSummary {
    pub requested_radius: usize,
    /// Largest radius enumerated completely; everything below uses it.
    pub radius: usize,
    pub elements: usize,
    pub truncated: bool,
    pub products: usize,
    pub duplicates: usize,
    pub near_collisions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartCounts {
    pub lines: usize,
    pub points: usize,
}

impl From<&LimitEstimate> for PartCounts {
    fn from(e: &LimitEstimate) -> Self {
        PartCounts {
            lines: e.lines.len(),
            points: e.points.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KulkarniSummary {
    pub l0: PartCounts,
    pub l1: PartCounts,
    pub l2: PartCounts,
}

/// Distances are `None` when one side is empty and the other is not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionView {
    pub line_distance: Option<f64>,
    pub point_distance: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusView {
    pub raw_count: usize,
    pub li: String,
    pub lig: String,
    pub lig_value: usize,
    pub lig_exact: bool,
    pub witness: Vec<Coords>,
    pub vertices: Vec<Coords>,
    pub pencils: Vec<PencilView>,
    pub ambiguous_alternatives: Vec<(String, String)>,
    pub diagnostics: Vec<String>,
}

impl From<&CensusReport> for CensusView {
    fn from(r: &CensusReport) -> Self {
        CensusView {
            raw_count: r.raw_count,
            li: r.li_bucket.to_string(),
            lig: r.lig_bucket.to_string(),
            lig_value: r.lig_value,
            lig_exact: r.lig_exact,
            witness: r.witness.iter().map(|l| coords(l.dual())).collect(),
            vertices: r.vertices.iter().map(|p| coords(p.coords())).collect(),
            pencils: r.pencils.iter().map(PencilView::from).collect(),
            ambiguous_alternatives: r
                .ambiguous_alternatives
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

impl CensusView {
    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous_alternatives.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub li: String,
    pub lig: String,
    pub vertices: Option<usize>,
}

impl From<&GalleryEntry> for Expected {
    fn from(e: &GalleryEntry) -> Self {
        Expected {
            li: e.li.to_string(),
            lig: e.lig.to_string(),
            vertices: e.vertices,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Mismatch,
    Ambiguous,
    NoExpectation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass | Outcome::NoExpectation => 0,
            Outcome::Mismatch => 1,
            Outcome::Ambiguous => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupView {
    pub name: String,
    pub generators: Vec<Vec<[f64; 2]>>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigView {
    pub radius: usize,
    pub cap: usize,
    pub family_cap: usize,
    pub eps_cluster: f64,
    pub tol: f64,
    pub seed_offset: u64,
    pub seed_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub group: GroupView,
    pub config: ConfigView,
    pub ball: BallSummary,
    pub limits: usize,
    pub eq_family: FamilyFlags,
    pub eq_complement: EstimateView,
    pub kulkarni: KulkarniSummary,
    pub lambda: EstimateView,
    pub c_gamma_family: FamilyFlags,
    pub c_gamma: EstimateView,
    pub union_check: UnionView,
    pub census: CensusView,
    pub expected: Option<Expected>,
    pub vertices_match: Option<bool>,
    pub outcome: Outcome,
    pub diagnostics: Vec<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Λ at the complete radius of `ball`, with the eq family it came from.
fn lambda_at(
    spec: &GroupSpec,
    ball: &BallEnumeration,
    cfg: &RunConfig,
) -> (
    KernelFamily,
    LimitEstimate,
    crate::dynamics::KulkarniEstimate,
    usize,
) {
    let limits = accumulate(ball, cfg.eps_cluster);
    let fam = eq_complement_family(spec, ball, cfg.family_cap);
    let eq = fam.estimate_at(ball.radius, Provenance::EqComplement);
    let k = kulkarni_from_ball(ball, &limits, &cfg.seeds);
    let lambda = lambda_from_parts(&eq, &k);
    (fam, lambda, k, limits.len())
}

fn outcome(census: &CensusReport, expected: Option<&Expected>) -> Outcome {
    let Some(exp) = expected else {
        return if census.is_ambiguous() {
            Outcome::Ambiguous
        } else {
            Outcome::NoExpectation
        };
    };
    let want = (Bucket::parse(&exp.li), Bucket::parse(&exp.lig));
    let hit = |(li, lig): (Bucket, Bucket)| want == (Some(li), Some(lig));
    if hit(census.buckets()) && !census.is_ambiguous() {
        Outcome::Pass
    } else if hit(census.buckets()) || census.ambiguous_alternatives.iter().any(|a| hit(*a)) {
        Outcome::Ambiguous
    } else {
        Outcome::Mismatch
    }
}

/// Runs every estimator on one group. Λ is the region whose lines are
/// counted; the previous radius is consulted for small finite counts.
pub fn run(spec: &GroupSpec, expected: Option<Expected>, cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    spec.validate()?;
    let mut diagnostics = Vec::new();
    let ball = enumerate_ball_tol(spec, cfg.radius, cfg.cap, cfg.tol);
    if ball.radius < 2 {
        return Err(KlabError::CapExceeded {
            cap: cfg.cap,
            radius: ball.radius,
            partial: Box::new(ball),
        });
    }
    if ball.truncated {
        diagnostics.push(format!(
            "ball cap {} reached; estimates use the complete radius {}",
            cfg.cap, ball.radius
        ));
    }
    if ball.suspected_non_discrete() {
        diagnostics.push(format!(
            "{} near-identity collisions: the group may not be discrete",
            ball.stats.near_collisions
        ));
    }
    let (eq_fam, lambda, k, limits) = lambda_at(spec, &ball, cfg);
    let eq = eq_fam.estimate_at(ball.radius, Provenance::EqComplement);
    if eq_fam.capped {
        diagnostics.push(format!(
            "eq family capped at {} lines; it is not invariant at this radius",
            cfg.family_cap
        ));
    }
    let previous = (lambda.lines.len() <= 3 && ball.radius > 2).then(|| {
        let smaller = ball.truncated_to(ball.radius - 1);
        lambda_at(spec, &smaller, cfg).1
    });
    let census = classify_census_with(&lambda, previous.as_ref(), &cfg.census);
    let cg_fam = c_gamma_family(spec, &ball, cfg.family_cap);
    let cg = cg_fam.estimate_at(ball.radius, Provenance::CyclicUnion);
    let u = union_check(&lambda, &cg);
    let vertices_match = expected
        .as_ref()
        .and_then(|e| e.vertices)
        .map(|n| census.vertices.len() == n);
    let outcome = outcome(&census, expected.as_ref());
    Ok(RunReport {
        group: GroupView {
            name: spec.name.clone(),
            generators: spec
                .generators
                .iter()
                .map(|g| g.lift().entries().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            metadata: spec.metadata.clone(),
        },
        config: ConfigView {
            radius: cfg.radius,
            cap: cfg.cap,
            family_cap: cfg.family_cap,
            eps_cluster: cfg.eps_cluster,
            tol: cfg.tol,
            seed_offset: cfg.seeds.offset,
            seed_count: cfg.seeds.count,
        },
        ball: BallSummary {
            requested_radius: cfg.radius,
            radius: ball.radius,
            elements: ball.len(),
            truncated: ball.truncated,
            products: ball.stats.products,
            duplicates: ball.stats.duplicates,
            near_collisions: ball.stats.near_collisions,
        },
        limits,
        eq_family: FamilyFlags::from(&eq_fam),
        eq_complement: EstimateView::from(&eq),
        kulkarni: KulkarniSummary {
            l0: PartCounts::from(&k.l0),
            l1: PartCounts::from(&k.l1),
            l2: PartCounts::from(&k.l2),
        },
        lambda: EstimateView::from(&lambda),
        c_gamma_family: FamilyFlags::from(&cg_fam),
        c_gamma: EstimateView::from(&cg),
        union_check: UnionView {
            line_distance: finite(u.line_distance),
            point_distance: finite(u.point_distance),
            tol: u.tol,
            pass: u.pass,
        },
        census: CensusView::from(&census),
        expected,
        vertices_match,
        outcome,
        diagnostics,
    })
}

/// Runs a gallery example at `cfg.radius`, checking the stated buckets.
pub fn run_gallery(entry: &GalleryEntry, cfg: &RunConfig) -> Result<RunReport> {
    run(&entry.spec, Some(Expected::from(entry)), cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCensusReport {
    pub lines: Vec<LineEntry>,
    pub census: CensusView,
}

/// Census of a user-supplied line family; no radius history is available.
pub fn census_of_lines(lines: &[ProjLine], cfg: &CensusConfig) -> LineCensusReport {
    let est = LimitEstimate::from_parts(
        Provenance::Input,
        lines.iter().map(|l| (*l, 1)),
        std::iter::empty(),
    );
    let mut census = CensusView::from(&classify_census_with(&est, None, cfg));
    census
        .diagnostics
        .push("bucket rules assume the family bounds an invariant region".into());
    LineCensusReport {
        lines: EstimateView::from(&est).lines,
        census,
    }
}

/// Compact JSON; large line families make indentation costly.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports hold plain data") + "\n"
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn csv_err(e: csv::Error) -> KlabError {
    KlabError::Io(std::io::Error::other(e))
}

fn coord_fields(c: &Coords) -> Vec<String> {
    c.iter()
        .flat_map(|[re, im]| [re.to_string(), im.to_string()])
        .collect()
}

/// Flat tables: every line and point of every estimate, and a key/value
/// summary.
pub fn write_csv(report: &RunReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let header = [
        "estimate", "index", "weight", "re0", "im0", "re1", "im1", "re2", "im2",
    ];
    let parts = [
        ("eq_complement", &report.eq_complement),
        ("lambda", &report.lambda),
        ("c_gamma", &report.c_gamma),
    ];
    let lines_path = dir.join(format!("{stem}_lines.csv"));
    let mut w = csv::Writer::from_path(&lines_path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for (name, est) in parts {
        for (i, l) in est.lines.iter().enumerate() {
            let mut rec = vec![name.to_string(), i.to_string(), l.weight.to_string()];
            rec.extend(coord_fields(&l.dual));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    let points_path = dir.join(format!("{stem}_points.csv"));
    let mut w = csv::Writer::from_path(&points_path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for (name, est) in parts {
        for (i, p) in est.points.iter().enumerate() {
            let mut rec = vec![name.to_string(), i.to_string(), p.weight.to_string()];
            rec.extend(coord_fields(&p.coords));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    let summary_path = dir.join(format!("{stem}_summary.csv"));
    let mut w = csv::Writer::from_path(&summary_path).map_err(csv_err)?;
    let opt = |x: Option<f64>| x.map_or("inf".to_string(), |v| v.to_string());
    let rows: Vec<(&str, String)> = vec![
        ("group", report.group.name.clone()),
        ("radius", report.ball.radius.to_string()),
        ("ball_elements", report.ball.elements.to_string()),
        ("ball_truncated", report.ball.truncated.to_string()),
        ("limits", report.limits.to_string()),
        ("eq_lines", report.eq_complement.lines.len().to_string()),
        ("lambda_lines", report.lambda.lines.len().to_string()),
        ("lambda_points", report.lambda.points.len().to_string()),
        ("c_gamma_lines", report.c_gamma.lines.len().to_string()),
        ("union_line_distance", opt(report.union_check.line_distance)),
        (
            "union_point_distance",
            opt(report.union_check.point_distance),
        ),
        ("union_pass", report.union_check.pass.to_string()),
        ("li", report.census.li.clone()),
        ("lig", report.census.lig.clone()),
        ("lig_value", report.census.lig_value.to_string()),
        ("vertices", report.census.vertices.len().to_string()),
        ("outcome", format!("{:?}", report.outcome).to_lowercase()),
    ];
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for (k, v) in rows {
        w.write_record([k, v.as_str()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(vec![lines_path, points_path, summary_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn small(radius: usize) -> RunConfig {
        RunConfig {
            radius,
            ..RunConfig::default()
        }
    }

    #[test]
    fn triangle_passes() {
        let e = gallery::build("coordinate_triangle").unwrap();
        let r = run_gallery(&e, &small(8)).unwrap();
        assert_eq!((r.census.li.as_str(), r.census.lig.as_str()), ("3", "3"));
        assert_eq!(r.outcome, Outcome::Pass);
        assert!(r.union_check.pass);
    }

    #[test]
    fn report_round_trips_through_json() {
        let e = gallery::build("translations").unwrap();
        let r = run_gallery(&e, &small(4)).unwrap();
        let text = to_json(&r);
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn mismatch_detected() {
        let e = gallery::build("triangular_lox").unwrap();
        let mut exp = Expected::from(&e);
        exp.lig = "3".into();
        let r = run(&e.spec, Some(exp), &small(5)).unwrap();
        assert_eq!(r.outcome, Outcome::Mismatch);
        assert_eq!(r.outcome.exit_code(), 1);
    }

    #[test]
    fn radius_below_two_rejected() {
        let e = gallery::build("translations").unwrap();
        assert!(matches!(
            run_gallery(&e, &small(1)),
            Err(KlabError::BadParameters(_))
        ));
    }

    #[test]
    fn csv_tables_written() {
        let e = gallery::build("coordinate_triangle").unwrap();
        let r = run_gallery(&e, &small(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_csv(&r, dir.path(), "t").unwrap();
        let lines = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(
            lines.lines().count(),
            1 + r.eq_complement.lines.len() + r.lambda.lines.len() + r.c_gamma.lines.len()
        );
    }

    #[test]
    fn line_census_of_triangle() {
        let ls: Vec<ProjLine> = (0..3).map(ProjLine::coordinate).collect();
        let r = census_of_lines(&ls, &CensusConfig::default());
        assert_eq!(r.census.lig, "3");
        assert_eq!(r.lines.len(), 3);
    }
}
