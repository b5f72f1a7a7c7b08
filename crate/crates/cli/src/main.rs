//! `isograph`: extract, verify and summarize iso-surfaces of volume-fraction fields.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use isograph::cube_graph::DEFAULT_ISO_TOLERANCE;
use isograph::isopath_extract::IsoContext;
use isograph::mesh_io::{read_field, write_mesh, MeshFormat, MeshHeader, SurfaceMesh};
use isograph::scalar_grid::{enclosed_volume, label_vertices, solve_iso_level};
use isograph::surface_geometry::{extract_oriented, AreaWeighting};
use isograph::topo_verify::{check_all, VerifyConfig};

const THREADS_ENV: &str = "ISOGRAPH_THREADS";
const DEFAULT_ISO: f64 = 0.5;
const DEFAULT_EPS: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "isograph", version, about = "Connected iso-surface extraction on cuboid grids")]
struct Cli {
    /// File of `key=value` defaults (iso, eps, format, curvature, weighting, threads, seed, ring_trials, random_fields).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads. Falls back to ISOGRAPH_THREADS, then the config file.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract, orient and export the iso-surface of a field.
    Extract(ExtractArgs),
    /// Run the exhaustive and sampled topology checks.
    Verify(VerifyArgs),
    /// Print component count, area, enclosed volume and volume residual.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
struct ExtractArgs {
    field: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, conflicts_with = "solve_volume")]
    iso: Option<f64>,
    /// Choose the iso-level that reproduces the field's disperse volume.
    #[arg(long)]
    solve_volume: bool,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Add a per-vertex mean-curvature channel (PLY only).
    #[arg(long)]
    curvature: bool,
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ring_trials: Option<u64>,
    #[arg(long)]
    random_fields: Option<u64>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    field: PathBuf,
    #[arg(long)]
    iso: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Obj,
    Ply,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightingArg {
    Mixed,
    OneThird,
    IsoPoints,
}

/// Error caused by bad arguments rather than bad data.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Default, Debug)]
struct Config(BTreeMap<String, String>);

impl Config {
    fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Config(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config value {key}={v} is not valid"))),
        }
    }
}

fn check_iso(c: f64) -> Result<f64> {
    if c > 0.0 && c < 1.0 {
        Ok(c)
    } else {
        Err(usage(format!("iso-level {c} is outside (0, 1)")))
    }
}

fn check_eps(e: f64) -> Result<f64> {
    if e > 0.0 && e.is_finite() {
        Ok(e)
    } else {
        Err(usage(format!("tolerance {e} must be positive")))
    }
}

fn setup_threads(flag: Option<usize>, cfg: &Config) -> Result<()> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| usage(format!("{THREADS_ENV}={v} is not a thread count")))?),
        Err(_) => None,
    };
    let n = match flag.or(env) {
        Some(n) => Some(n),
        None => cfg.get::<usize>("threads")?,
    };
    if let Some(n) = n {
        if n == 0 {
            bail!(usage("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run_extract(a: &ExtractArgs, cfg: &Config) -> Result<()> {
    let format = match a.format {
        Some(FormatArg::Obj) => MeshFormat::Obj,
        Some(FormatArg::Ply) => MeshFormat::Ply,
        None => match cfg.get::<String>("format")?.as_deref() {
            Some("obj") => MeshFormat::Obj,
            Some("ply") => MeshFormat::Ply,
            Some(other) => bail!(usage(format!("unknown format {other}"))),
            None => MeshFormat::from_extension(&a.output)
                .ok_or_else(|| usage(format!("cannot infer a mesh format from {}", a.output.display())))?,
        },
    };
    let solve = a.solve_volume || cfg.get::<bool>("solve_volume")?.unwrap_or(false) && a.iso.is_none();
    let eps = check_eps(a.eps.or(cfg.get("eps")?).unwrap_or(DEFAULT_EPS))?;
    let iso = check_iso(a.iso.or(cfg.get("iso")?).unwrap_or(DEFAULT_ISO))?;
    let curvature = a.curvature || cfg.get::<bool>("curvature")?.unwrap_or(false);
    let weighting = match a.weighting {
        Some(WeightingArg::Mixed) => AreaWeighting::Mixed,
        Some(WeightingArg::OneThird) => AreaWeighting::OneThird,
        Some(WeightingArg::IsoPoints) => AreaWeighting::IsoPoints,
        None => match cfg.get::<String>("weighting")?.as_deref() {
            None | Some("mixed") => AreaWeighting::Mixed,
            Some("one-third") => AreaWeighting::OneThird,
            Some("iso-points") => AreaWeighting::IsoPoints,
            Some(other) => bail!(usage(format!("unknown weighting {other}"))),
        },
    };
    if curvature && format == MeshFormat::Obj {
        bail!(usage("--curvature needs PLY output"));
    }

    let (field, part) = read_field(&a.field).with_context(|| format!("reading {}", a.field.display()))?;
    let labels = label_vertices(&field, &part)?;
    let (c, header_eps) = if solve {
        let s = solve_iso_level(&labels, &part, &field, eps)?;
        println!(
            "solve iso={:?} residual={:e} iterations={} attained={} bracket=[{:?}, {:?}]",
            s.iso, s.residual, s.iterations, s.attained, s.bracket.0, s.bracket.1
        );
        if !s.attained {
            eprintln!("warning: |gamma| < {eps:e} not attained; the enclosed volume jumps across the target inside the final bracket");
        }
        (s.iso, Some(eps))
    } else {
        (iso, None)
    };
    let ctx = IsoContext::new(&labels, &part, c, DEFAULT_ISO_TOLERANCE)?;
    let oriented = extract_oriented(&ctx)?;
    let mut mesh = SurfaceMesh::from_surface(&oriented.surface, &oriented.topology);
    if curvature {
        mesh.attach_curvature(&oriented.surface, &oriented.topology, weighting);
    }
    write_mesh(&mesh, &MeshHeader::new(c, header_eps), format, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    println!(
        "iso={:?} components={} triangles={} vertices={} unresolved_orientation={}",
        c,
        mesh.component_count(),
        mesh.triangles.len(),
        mesh.vertices.len(),
        oriented.orientation.unresolved.len()
    );
    println!("wrote {}", a.output.display());
    Ok(())
}

fn run_stats(a: &StatsArgs, cfg: &Config) -> Result<()> {
    let iso = check_iso(a.iso.or(cfg.get("iso")?).unwrap_or(DEFAULT_ISO))?;
    let (field, part) = read_field(&a.field).with_context(|| format!("reading {}", a.field.display()))?;
    let labels = label_vertices(&field, &part)?;
    let ctx = IsoContext::new(&labels, &part, iso, DEFAULT_ISO_TOLERANCE)?;
    let oriented = extract_oriented(&ctx)?;
    let volume = enclosed_volume(&labels, &part, iso)?;
    let target = field.disperse_volume(&part);
    println!("iso {iso:?}");
    println!("components {}", oriented.topology.components.len());
    println!("area {:?}", oriented.surface.area());
    println!("enclosed_volume {volume:?}");
    println!("target_volume {target:?}");
    if target > 0.0 {
        println!("gamma {:e}", 1.0 - volume / target);
    } else {
        println!("gamma undefined");
    }
    Ok(())
}

fn run_verify(a: &VerifyArgs, cfg: &Config) -> Result<bool> {
    let d = VerifyConfig::default();
    let vc = VerifyConfig {
        seed: a.seed.or(cfg.get("seed")?).unwrap_or(d.seed),
        ring_trials: a.ring_trials.or(cfg.get("ring_trials")?).unwrap_or(d.ring_trials),
        random_fields: a.random_fields.or(cfg.get("random_fields")?).unwrap_or(d.random_fields),
        field_size: d.field_size,
    };
    let report = check_all(&vc);
    print!("{report}");
    Ok(report.passed())
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    setup_threads(cli.threads, &cfg)?;
    match &cli.command {
        Command::Extract(a) => run_extract(a, &cfg).map(|_| true),
        Command::Stats(a) => run_stats(a, &cfg).map(|_| true),
        Command::Verify(a) => run_verify(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
