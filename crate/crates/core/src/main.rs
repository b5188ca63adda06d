use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use klab::census::CensusConfig;
use klab::dynamics::{SeedConfig, DEFAULT_CAP, DEFAULT_EPS_CLUSTER};
use klab::group::{classify, cyclic_limit_set, fixed_points, GroupElement, TOL_CANON};
use klab::plot::{emit_svg, PlotInput};
use klab::report::{
    census_of_lines, coords, run, run_gallery, to_json, write_csv, EstimateView, LineCensusReport,
    Outcome, RunConfig, RunReport,
};
use klab::{gallery, spec_io, KlabError};

#[derive(Parser)]
#[command(
    name = "klab",
    version,
    about = "Limit sets and line census for subgroups of PSL(3,C)"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Word length of the ball [default: 10, or the gallery entry's radius]
    #[arg(long, global = true)]
    radius: Option<usize>,
    /// Largest number of ball elements.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Clustering radius for accumulated limit maps.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_CLUSTER)]
    eps_cluster: f64,
    /// Distance at which two group elements are identified.
    #[arg(long, global = true, default_value_t = TOL_CANON)]
    tol: f64,
    /// Directory for report files; without it JSON goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output formats (repeatable).
    #[arg(long, global = true, value_enum)]
    format: Vec<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify one matrix and give its fixed and cyclic limit sets.
    Classify { matrix: PathBuf },
    /// Estimate Eq, Λ and C(Γ) for a group spec.
    LimitSet { group: PathBuf },
    /// Line census of a group spec or of a line family.
    Census { input: PathBuf },
    /// The example gallery.
    Gallery {
        #[command(subcommand)]
        cmd: GalleryCmd,
    },
    /// Render a report as SVG.
    Plot { report: PathBuf },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// Run examples and check their stated census buckets.
    Run {
        #[arg(long)]
        id: Option<String>,
    },
    /// Write the example group specs as JSON.
    Export,
}

struct Failure(KlabError);

impl From<KlabError> for Failure {
    fn from(e: KlabError) -> Self {
        Failure(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

impl Opts {
    fn config(&self, radius: usize) -> Result<RunConfig, Failure> {
        let cfg = RunConfig {
            radius: self.radius.unwrap_or(radius),
            cap: self.cap,
            eps_cluster: self.eps_cluster,
            tol: self.tol,
            seeds: SeedConfig::from_env()?,
            ..RunConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn formats(&self) -> Vec<Format> {
        if self.format.is_empty() {
            vec![Format::Json]
        } else {
            self.format.clone()
        }
    }

    fn out_dir(&self) -> Result<Option<&Path>, Failure> {
        let needs_dir = self.formats().iter().any(|f| *f != Format::Json);
        match &self.out {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                Ok(Some(d))
            }
            None if needs_dir => {
                Err(KlabError::BadParameters("csv and svg output need --out".into()).into())
            }
            None => Ok(None),
        }
    }
}

fn exit_code(outcomes: &[Outcome]) -> u8 {
    if outcomes.contains(&Outcome::Mismatch) {
        1
    } else if outcomes.contains(&Outcome::Ambiguous) {
        3
    } else {
        0
    }
}

fn stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn emit_reports(reports: &[RunReport], opts: &Opts) -> Result<(), Failure> {
    let formats = opts.formats();
    let Some(dir) = opts.out_dir()? else {
        if reports.len() == 1 {
            print!("{}", to_json(&reports[0]));
        } else {
            print!("{}", to_json(&reports));
        }
        return Ok(());
    };
    for r in reports {
        let stem = stem(&r.group.name);
        for f in &formats {
            match f {
                Format::Json => std::fs::write(dir.join(format!("{stem}.json")), to_json(r))?,
                Format::Csv => {
                    write_csv(r, dir, &stem)?;
                }
                Format::Svg => std::fs::write(
                    dir.join(format!("{stem}.svg")),
                    emit_svg(&PlotInput::from(r)),
                )?,
            }
        }
    }
    Ok(())
}

fn summary(r: &RunReport) {
    let expected = r
        .expected
        .as_ref()
        .map(|e| format!(" expected ({}, {})", e.li, e.lig))
        .unwrap_or_default();
    eprintln!(
        "{}: radius {} ball {} | Li {} LiG {} vertices {}{} | {:?}",
        r.group.name,
        r.ball.radius,
        r.ball.elements,
        r.census.li,
        r.census.lig,
        r.census.vertices.len(),
        expected,
        r.outcome
    );
}

#[derive(Serialize)]
struct Classification {
    lift: serde_json::Value,
    kind: String,
    diagonalizable: bool,
    moduli: [f64; 3],
    fixed_points: Vec<klab::report::Coords>,
    fixed_lines: Vec<klab::report::Coords>,
    cyclic_limit_set: Option<EstimateView>,
    note: Option<String>,
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    let opts = &cli.opts;
    match &cli.cmd {
        Cmd::Classify { matrix } => {
            let m = spec_io::parse_matrix(&std::fs::read_to_string(matrix)?)?;
            let g = GroupElement::new(m)?;
            let class = classify(&g);
            let (fixed_points, fixed_lines) = match fixed_points(&g) {
                Ok(f) => (
                    f.points.iter().map(|p| coords(p.coords())).collect(),
                    f.fixed_lines.iter().map(|l| coords(l.dual())).collect(),
                ),
                Err(_) => (Vec::new(), Vec::new()),
            };
            let (cyclic, note) = match cyclic_limit_set(&g) {
                Ok(e) => (Some(EstimateView::from(&e)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let out = Classification {
                lift: spec_io::matrix_to_value(g.lift()),
                kind: format!("{:?}", class.kind).to_lowercase(),
                diagonalizable: class.diagonalizable,
                moduli: class.moduli,
                fixed_points,
                fixed_lines,
                cyclic_limit_set: cyclic,
                note,
            };
            print!("{}", to_json(&out));
            Ok(0)
        }
        Cmd::LimitSet { group } => {
            let spec = spec_io::read_group(group)?;
            let report = run(&spec, None, &opts.config(10)?)?;
            summary(&report);
            emit_reports(std::slice::from_ref(&report), opts)?;
            Ok(exit_code(&[report.outcome]))
        }
        Cmd::Census { input } => {
            let text = std::fs::read_to_string(input)?;
            if spec_io::is_group_json(&text) {
                let spec = spec_io::parse_group(&text)?;
                let report = run(&spec, None, &opts.config(10)?)?;
                summary(&report);
                emit_reports(std::slice::from_ref(&report), opts)?;
                return Ok(exit_code(&[report.outcome]));
            }
            let lines = spec_io::parse_lines(&text)?;
            let report = census_of_lines(&lines, &CensusConfig::default());
            eprintln!(
                "{} lines | Li {} LiG {} vertices {}",
                report.lines.len(),
                report.census.li,
                report.census.lig,
                report.census.vertices.len()
            );
            emit_line_census(&report, opts)?;
            Ok(if report.census.is_ambiguous() { 3 } else { 0 })
        }
        Cmd::Gallery {
            cmd: GalleryCmd::Run { id },
        } => {
            let ids: Vec<&str> = match id {
                Some(id) if gallery::IDS.contains(&id.as_str()) => vec![id.as_str()],
                Some(id) => {
                    return Err(KlabError::InvalidInput(format!(
                        "unknown gallery id {id:?}; known: {}",
                        gallery::IDS.join(", ")
                    ))
                    .into())
                }
                None => gallery::IDS.to_vec(),
            };
            let mut reports = Vec::new();
            for id in ids {
                let entry = gallery::build(id)?;
                let report = run_gallery(&entry, &opts.config(entry.radius)?)?;
                summary(&report);
                reports.push(report);
            }
            emit_reports(&reports, opts)?;
            let outcomes: Vec<Outcome> = reports.iter().map(|r| r.outcome).collect();
            Ok(exit_code(&outcomes))
        }
        Cmd::Gallery {
            cmd: GalleryCmd::Export,
        } => {
            let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            for e in gallery::gallery()? {
                let path = dir.join(format!("{}.json", e.id));
                spec_io::write_group(&e.spec, &path)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(0)
        }
        Cmd::Plot { report } => {
            let text = std::fs::read_to_string(report)?;
            let input = match serde_json::from_str::<RunReport>(&text) {
                Ok(r) => PlotInput::from(&r),
                Err(_) => {
                    let r: LineCensusReport =
                        serde_json::from_str(&text).map_err(KlabError::from)?;
                    PlotInput::from(&r)
                }
            };
            let svg = emit_svg(&input);
            match &opts.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    let name = report
                        .file_stem()
                        .and_then(|s| s.to_str())
                        .unwrap_or("plot");
                    std::fs::write(dir.join(format!("{name}.svg")), svg)?;
                }
                None => print!("{svg}"),
            }
            Ok(0)
        }
    }
}

fn emit_line_census(report: &LineCensusReport, opts: &Opts) -> Result<(), Failure> {
    let Some(dir) = opts.out_dir()? else {
        print!("{}", to_json(report));
        return Ok(());
    };
    for f in opts.formats() {
        match f {
            Format::Json => std::fs::write(dir.join("census.json"), to_json(report))?,
            Format::Svg => {
                std::fs::write(dir.join("census.svg"), emit_svg(&PlotInput::from(report)))?
            }
            Format::Csv => {
                let mut w = csv::Writer::from_path(dir.join("census_lines.csv"))
                    .map_err(|e| KlabError::Io(std::io::Error::other(e)))?;
                let header = ["index", "witness", "re0", "im0", "re1", "im1", "re2", "im2"];
                w.write_record(header)
                    .map_err(|e| KlabError::Io(std::io::Error::other(e)))?;
                for (i, l) in report.lines.iter().enumerate() {
                    let witness = report.census.witness.contains(&l.dual);
                    let mut rec = vec![i.to_string(), witness.to_string()];
                    rec.extend(
                        l.dual
                            .iter()
                            .flat_map(|[re, im]| [re.to_string(), im.to_string()]),
                    );
                    w.write_record(&rec)
                        .map_err(|e| KlabError::Io(std::io::Error::other(e)))?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}
