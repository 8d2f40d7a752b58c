//! `schemecheck`: generate catalog objects, analyze graphs, schemes and
//! spherical sets, print bound tables and run family scans.

mod render;

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use schemecheck_core::analysis::{any_failed, bound_tables, BoundTable};
use schemecheck_core::generators::{build_graph, build_scheme, family_intersection};
use schemecheck_core::numerics::ensure_dense;
use schemecheck_core::schemes::validate_scheme;
use schemecheck_core::spherical::{parse_gram, verify_sphere_theorem, SphereRoute, SphericalSet};
use schemecheck_core::{
    analyze_graph, analyze_scheme, scan, AnalysisOptions64, FamilySpec, Graph, IntersectionNumbers, RelationPartition,
    ScanFamily, Scheme64, SeedSet, TheoremReport, DEFAULT_MAX_DENSE, DEFAULT_TOL,
};

#[derive(Parser, Debug)]
#[command(name = "schemecheck", version, about = "Spectral checks for regular graphs, association schemes and spherical sets")]
struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Largest point count handled with dense matrices.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DENSE)]
    max_dense: usize,
    /// Seeds for the generic-element draws.
    #[arg(long, global = true, value_enum, default_value_t = SeedChoice::Primary)]
    seed_set: SeedChoice,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a catalog object as an edge list, relation matrix or intersection tensor.
    Gen {
        /// cycle, complete, petersen, hoffman-singleton, paley, johnson, hamming
        family: String,
        /// Integer parameters of the family, e.g. `hamming 3 2`.
        args: Vec<u64>,
        /// Output format; johnson and hamming default to a relation matrix.
        #[arg(long, value_enum)]
        format: Option<GenFormat>,
        /// Write to a file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Spectral report for a graph in edge-list format.
    AnalyzeGraph { path: PathBuf },
    /// Full report for a relation matrix, or an intersection tensor with `--parametric`.
    AnalyzeScheme {
        path: PathBuf,
        #[arg(long)]
        parametric: bool,
        #[command(flatten)]
        route: RouteArgs,
    },
    /// Eigenvalue check for a spherical set given by its Gram matrix.
    AnalyzeGram {
        path: PathBuf,
        #[command(flatten)]
        route: RouteArgs,
    },
    /// Print Moore-bound and absolute-bound tables.
    Bounds {
        #[arg(long, default_value_t = 10)]
        max_arg: u64,
        #[arg(long, default_value_t = 5)]
        max_d: u64,
    },
    /// Evaluate both size conditions across a family, e.g. `scan johnson3 6..60`.
    Scan {
        #[arg(value_enum)]
        family: ScanChoice,
        /// Inclusive range `a..b` (or `a..=b`).
        range: String,
    },
}

#[derive(clap::Args, Debug)]
struct RouteArgs {
    /// Which hypothesis drives the spherical eigenvalue check.
    #[arg(long, value_enum, default_value_t = RouteChoice::Large)]
    route: RouteChoice,
    /// Bound on the number of inner products for `--route large`; defaults to the observed count.
    #[arg(long)]
    degree_bound: Option<usize>,
}

impl RouteArgs {
    fn route(&self) -> SphereRoute {
        match self.route {
            RouteChoice::Schur => SphereRoute::SchurDiameter,
            RouteChoice::Large => SphereRoute::LargeSet { degree_bound: self.degree_bound },
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeedChoice {
    Primary,
    Alternate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenFormat {
    Edges,
    Relations,
    /// Intersection numbers, the input of `analyze-scheme --parametric`.
    Tensor,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouteChoice {
    /// Schur-diameter equal to the number of inner products.
    Schur,
    /// Size above the absolute bound.
    Large,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScanChoice {
    Johnson3,
    Hamming3,
}

#[derive(Serialize)]
struct BoundsOutput<'a> {
    moore: &'a BoundTable,
    absolute: &'a BoundTable,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let (a, b) = s.split_once("..").with_context(|| format!("range `{s}` must look like a..b"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().with_context(|| format!("bad range start `{a}`"))?;
    let b: usize = b.trim().parse().with_context(|| format!("bad range end `{b}`"))?;
    if a > b {
        bail!("empty range {a}..{b}");
    }
    Ok(a..=b)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn subject(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn emit_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

struct Run {
    output: String,
    failed: bool,
}

fn reports_run(reports: &[TheoremReport], json: bool) -> Result<Run> {
    let output = if json { emit_json(&reports)? } else { render::reports(reports) };
    Ok(Run { output, failed: any_failed(reports) })
}

fn gen(family: &str, args: &[u64], format: Option<GenFormat>, max_dense: usize) -> Result<String> {
    let spec = FamilySpec::from_args(family, args)?;
    let default = match spec {
        FamilySpec::Johnson { .. } | FamilySpec::Hamming { .. } => GenFormat::Relations,
        _ => GenFormat::Edges,
    };
    Ok(match format.unwrap_or(default) {
        GenFormat::Edges => build_graph(&spec, max_dense)?.to_edge_list(),
        GenFormat::Relations => build_scheme(&spec, max_dense)?.to_text(),
        GenFormat::Tensor => {
            let n = usize::try_from(spec.point_count()?).context("point count overflows usize")?;
            let p = match spec {
                FamilySpec::Johnson { .. } | FamilySpec::Hamming { .. } => family_intersection(&spec)?,
                _ => validate_scheme(&build_scheme(&spec, max_dense)?)?,
            };
            p.to_text(n)
        }
    })
}

fn execute(cli: &Cli) -> Result<Run> {
    let seeds = match cli.seed_set {
        SeedChoice::Primary => SeedSet::Primary,
        SeedChoice::Alternate => SeedSet::Alternate,
    };
    let tol = cli.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--tol must be a positive number");
    }
    let opts = |route: SphereRoute| AnalysisOptions64 { tol, max_dense: cli.max_dense, seeds, sphere_route: route };
    match &cli.command {
        Command::Gen { family, args, format, output } => {
            let text = gen(family, args, *format, cli.max_dense)?;
            match output {
                Some(path) => {
                    fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
                    Ok(Run { output: String::new(), failed: false })
                }
                None => Ok(Run { output: text, failed: false }),
            }
        }
        Command::AnalyzeGraph { path } => {
            let g = Graph::parse_edge_list(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let reports = analyze_graph(&g, &subject(path), &opts(SphereRoute::LargeSet { degree_bound: None }))?;
            reports_run(&reports, cli.json)
        }
        Command::AnalyzeScheme { path, parametric, route } => {
            let text = read(path)?;
            let scheme = if *parametric {
                let (n, p) = IntersectionNumbers::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
                Scheme64::parametric(&p, n, tol, seeds)?
            } else {
                let rel = RelationPartition::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
                ensure_dense(rel.n(), cli.max_dense)?;
                Scheme64::explicit(rel, tol, seeds)?
            };
            let reports = analyze_scheme(&scheme, &subject(path), &opts(route.route()))?;
            reports_run(&reports, cli.json)
        }
        Command::AnalyzeGram { path, route } => {
            let gram = parse_gram(&read(path)?, tol).with_context(|| format!("parsing {}", path.display()))?;
            ensure_dense(gram.n(), cli.max_dense)?;
            let set = SphericalSet::from_gram(gram, tol)?;
            let report = verify_sphere_theorem(&set, tol, route.route(), &subject(path))?;
            reports_run(&[report], cli.json)
        }
        Command::Bounds { max_arg, max_d } => {
            if *max_arg == 0 {
                bail!("--max-arg must be at least 1");
            }
            let (moore, absolute) = bound_tables(*max_arg, *max_d);
            let output = if cli.json {
                emit_json(&BoundsOutput { moore: &moore, absolute: &absolute })?
            } else {
                render::bounds(&moore, &absolute)
            };
            Ok(Run { output, failed: false })
        }
        Command::Scan { family, range } => {
            let family = match family {
                ScanChoice::Johnson3 => ScanFamily::Johnson3,
                ScanChoice::Hamming3 => ScanFamily::Hamming3,
            };
            let res = scan(family, parse_range(range)?, tol, seeds);
            let output = if cli.json { emit_json(&res)? } else { render::scan(&res) };
            Ok(Run { output, failed: false })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(run) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(run.output.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            if run.failed {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
