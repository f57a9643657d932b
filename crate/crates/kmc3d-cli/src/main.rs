//! kmc3d command line: run diffusive-capture simulations, evaluate the
//! analytic reference formulas, generate meshes, estimate capacitances and
//! build reinsertion tables.
//!
//! Exit codes: 0 success, 1 configuration/geometry error, 2 numerical
//! failure. Failures print a machine-readable JSON line to stderr.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{RunConfig, SourceSpec};
use kmc3d::analytic;
use kmc3d::engine::{
    estimate_capacitance, run_plane, run_polyhedron, PropagatorTables, Release, RunSettings,
    SimulationResult, Target,
};
use kmc3d::error::Error;
use kmc3d::geometry::{
    make_cube, make_ellipsoid_skirt, make_fibonacci_sphere, Geometry, GeometryJson, Vec3,
};
use kmc3d::propagators::{
    build_reinsertion_table, HemisphereCdfTable, ReinsertionTable, HEMI_DEFAULT_POINTS,
};
use kmc3d::stats::{bootstrap, LogHistogram};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "kmc3d", version, about = "Kinetic Monte Carlo for 3D diffusive capture")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a JSON config.
    Run(RunArgs),
    /// Evaluate an analytic reference formula over a grid to CSV.
    Analytic(AnalyticArgs),
    /// Generate a built-in mesh and write its JSON description.
    Mesh(MeshArgs),
    /// Estimate a capacitance by uniform release on an enclosing shell.
    Capacitance(CapacitanceArgs),
    /// Precompute a reinsertion table and write it as JSON.
    TableBuild(TableBuildArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the run configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the particle count.
    #[arg(long)]
    particles: Option<u64>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker count (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Reuse a prebuilt reinsertion table (from table-build).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Formula: plane-flux | plane-cdf | splitting-planar | splitting-sphere
    /// | strieder | robin-kappa | homog-sphere | sphere-arrival | cube-equiv
    formula: String,
    /// Planar geometry JSON (plane-* and splitting-planar formulas).
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Release point x,y,z.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    x0: Option<Vec<f64>>,
    /// Evaluation grid start:stop:count[:lin|log] (default log spacing).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    diffusivity: f64,
    /// Pore count for the Fibonacci configuration (splitting-sphere).
    #[arg(long)]
    pores: Option<usize>,
    /// Absorbing area fraction sigma = N a^2 / 4.
    #[arg(long)]
    sigma: Option<f64>,
    /// Pore radius (robin-kappa; derived from sigma and pores when absent).
    #[arg(long)]
    pore_radius: Option<f64>,
    /// Homogenized Robin rate (homog-sphere; derived when absent).
    #[arg(long)]
    kappa: Option<f64>,
    /// Release distance R (homog-sphere, sphere-arrival, cube-equiv).
    #[arg(long)]
    release_r: Option<f64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeshArgs {
    /// Generator: cube | fibonacci-sphere | ellipsoid-skirt
    generator: String,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long)]
    pores: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    r_eq: f64,
    #[arg(long, default_value_t = 1)]
    refinement: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CapacitanceArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long)]
    release_radius: f64,
    #[arg(long, default_value_t = 1_000_000)]
    particles: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 100)]
    bootstrap: usize,
    #[arg(long, default_value_t = 1.0)]
    diffusivity: f64,
}

#[derive(Args)]
struct TableBuildArgs {
    #[arg(long, default_value_t = 3.0)]
    ratio: f64,
    #[arg(long, default_value_t = 400)]
    mu: usize,
    #[arg(long, default_value_t = 400)]
    nu: usize,
    #[arg(long, default_value_t = 1.0)]
    diffusivity: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Mesh(args) => cmd_mesh(args),
        Command::Capacitance(args) => cmd_capacitance(args),
        Command::TableBuild(args) => cmd_table_build(args),
    };
    if let Err(e) = outcome {
        let (code, kind) = match &e {
            Error::Numerical(_) => (2, "numerical"),
            Error::Domain(_) => (1, "config"),
            Error::Config(_) => (1, "config"),
            Error::Io(_) | Error::Serde(_) => (1, "config"),
        };
        eprintln!(
            "{}",
            serde_json::json!({ "error": e.to_string(), "kind": kind })
        );
        std::process::exit(code);
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    if let Some(m) = args.particles {
        cfg.particles = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(dir) = args.out_dir {
        cfg.out_dir = dir;
    }
    cfg.validate()?;
    let config_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let geometry = cfg.build_geometry(&config_dir)?;
    let ratio = cfg.effective_ratio(&geometry);

    let canonical = cfg.canonical_json();
    let digest = hex_digest(canonical.as_bytes());

    let mut settings = RunSettings::new(cfg.diffusivity, cfg.particles, cfg.seed);
    settings.workers = cfg.workers;
    settings.config_digest = digest.clone();

    let tables = load_or_build_tables(args.table.as_deref(), ratio, (cfg.tables.mu, cfg.tables.nu))?;

    let release = match cfg.source {
        SourceSpec::Point { point } => Release::Point(Vec3::from(point)),
        SourceSpec::Shell { shell_radius } => Release::Shell(shell_radius),
    };
    let result = match &geometry {
        Geometry::Planar(scene) => run_plane(scene, release, &settings, &tables)?,
        Geometry::Mesh(mesh) => run_polyhedron(mesh, release, &settings, &tables)?,
    };

    std::fs::create_dir_all(&cfg.out_dir)?;
    write_capture_csv(&cfg.out_dir.join("capture_times.csv"), &result)?;
    let histogram = build_histogram(&cfg, &result)?;
    if let Some(h) = &histogram {
        write_histogram_csv(&cfg.out_dir.join("histogram.csv"), h)?;
    }
    let summary = summary_json(&cfg, &canonical, &digest, &result);
    std::fs::write(
        cfg.out_dir.join("result.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;

    // Console summary.
    println!("particles {}", result.particles);
    println!(
        "captured {} ({:.6})",
        result.captures(),
        result.capture_fraction()
    );
    println!("escaped {}", result.escapes);
    if result.flagged > 0 {
        println!("flagged {}", result.flagged);
    }
    for (label, times) in result.target_labels.iter().zip(&result.capture_times) {
        println!(
            "target {label}: {} ({:.6})",
            times.len(),
            times.len() as f64 / result.particles as f64
        );
    }
    if let SourceSpec::Shell { shell_radius } = cfg.source {
        let p = result.capture_fraction();
        if p > 0.0 && p < 1.0 {
            let cv = ((1.0 - p) / (p * result.particles as f64)).sqrt();
            println!("capacitance {:.8} cv {:.3e}", shell_radius * p, cv);
        }
    }
    println!("digest {digest}");
    Ok(())
}

fn load_or_build_tables(
    table_path: Option<&Path>,
    ratio: f64,
    grid: (usize, usize),
) -> Result<PropagatorTables, Error> {
    let hemisphere = HemisphereCdfTable::build(HEMI_DEFAULT_POINTS)?;
    let reinsertion = match table_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let table: ReinsertionTable = serde_json::from_str(&text)?;
            if (table.ratio - ratio).abs() > 1e-12 {
                return Err(Error::config(format!(
                    "cached table ratio {} does not match the geometry ratio {ratio}",
                    table.ratio
                )));
            }
            table
        }
        None => build_reinsertion_table(ratio, grid, 1.0)?,
    };
    Ok(PropagatorTables {
        hemisphere,
        reinsertion,
    })
}

fn build_histogram(
    cfg: &RunConfig,
    result: &SimulationResult,
) -> Result<Option<LogHistogram>, Error> {
    let all = result.all_times();
    if all.is_empty() {
        return Ok(None);
    }
    let (t_min, t_max, bins) = match &cfg.histogram {
        Some(h) => (h.t_min, h.t_max, h.bins),
        None => {
            let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = all.iter().cloned().fold(0.0_f64, f64::max);
            (lo * 0.999, hi * 1.001, 60)
        }
    };
    let mut h = LogHistogram::new(t_min, t_max, bins, result.particles)?;
    for (label, times) in result.target_labels.iter().zip(&result.capture_times) {
        for &t in times {
            h.record(label, t);
        }
    }
    Ok(Some(h))
}

fn summary_json(
    cfg: &RunConfig,
    canonical: &str,
    digest: &str,
    result: &SimulationResult,
) -> serde_json::Value {
    let per_target: serde_json::Map<String, serde_json::Value> = result
        .target_labels
        .iter()
        .zip(&result.capture_times)
        .map(|(label, times)| {
            (
                label.clone(),
                serde_json::json!({
                    "count": times.len(),
                    "fraction": times.len() as f64 / result.particles as f64,
                }),
            )
        })
        .collect();
    let capacitance = match cfg.source {
        SourceSpec::Shell { shell_radius } => {
            let p = result.capture_fraction();
            if p > 0.0 && p < 1.0 {
                serde_json::json!({
                    "estimate": shell_radius * p,
                    "cv": ((1.0 - p) / (p * result.particles as f64)).sqrt(),
                })
            } else {
                serde_json::Value::Null
            }
        }
        _ => serde_json::Value::Null,
    };
    serde_json::json!({
        "provenance": {
            "config": serde_json::from_str::<serde_json::Value>(canonical).unwrap(),
            "config_digest": digest,
            "seed": result.seed,
            "version": env!("CARGO_PKG_VERSION"),
        },
        "summary": {
            "particles": result.particles,
            "captures": result.captures(),
            "escapes": result.escapes,
            "flagged": result.flagged,
            "capture_fraction": result.capture_fraction(),
            "total_steps": result.total_steps,
            "per_target": per_target,
            "capacitance": capacitance,
            "result_digest": result.digest(),
        },
    })
}

fn write_capture_csv(path: &Path, result: &SimulationResult) -> Result<(), Error> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "label,time")?;
    for (label, times) in result.target_labels.iter().zip(&result.capture_times) {
        for t in times {
            writeln!(out, "{label},{t}")?;
        }
    }
    Ok(())
}

fn write_histogram_csv(path: &Path, h: &LogHistogram) -> Result<(), Error> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let labels: Vec<&String> = h.counts.keys().collect();
    let header: Vec<String> = labels.iter().map(|l| format!("count_{l}")).collect();
    writeln!(out, "bin_left,bin_right,{}", header.join(","))?;
    for i in 0..h.n_bins() {
        let row: Vec<String> = labels
            .iter()
            .map(|l| h.counts[l.as_str()][i].to_string())
            .collect();
        writeln!(out, "{},{},{}", h.edges[i], h.edges[i + 1], row.join(","))?;
    }
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// analytic
// ---------------------------------------------------------------------------

fn parse_grid(spec: Option<&str>) -> Result<Vec<f64>, Error> {
    let spec = spec.ok_or_else(|| Error::config("--grid start:stop:count[:lin|log] required".to_string()))?;
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 3 || parts.len() > 4 {
        return Err(Error::config(format!("bad grid spec '{spec}'")));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::config(format!("bad grid start '{}'", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::config(format!("bad grid stop '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::config(format!("bad grid count '{}'", parts[2])))?;
    let log = match parts.get(3) {
        Some(&"lin") => false,
        Some(&"log") | None => true,
        Some(other) => return Err(Error::config(format!("bad grid mode '{other}'"))),
    };
    if count < 2 || !(stop > start) || (log && !(start > 0.0)) {
        return Err(Error::config(format!("bad grid spec '{spec}'")));
    }
    Ok((0..count)
        .map(|i| {
            let w = i as f64 / (count - 1) as f64;
            if log {
                (start.ln() + (stop.ln() - start.ln()) * w).exp()
            } else {
                start + (stop - start) * w
            }
        })
        .collect())
}

fn load_planar_pores(path: Option<&PathBuf>) -> Result<Vec<analytic::PoreSpec>, Error> {
    let path = path.ok_or_else(|| Error::config("--geometry required".to_string()))?;
    let text = std::fs::read_to_string(path)?;
    let gj: GeometryJson = serde_json::from_str(&text)?;
    match gj.build()? {
        Geometry::Planar(scene) => Ok(scene
            .pores()
            .iter()
            .map(|p| analytic::PoreSpec::circular(p.center, p.radius))
            .collect()),
        Geometry::Mesh(_) => Err(Error::config(
            "this formula expects a planar geometry".to_string(),
        )),
    }
}

fn fibonacci_centers(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

fn cmd_analytic(args: AnalyticArgs) -> Result<(), Error> {
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    let d = args.diffusivity;
    let x0 = args
        .x0
        .as_ref()
        .map(|v| Vec3::new(v[0], v[1], v[2]));
    match args.formula.as_str() {
        "plane-flux" | "plane-cdf" => {
            let pores = load_planar_pores(args.geometry.as_ref())?;
            let x0 = x0.ok_or_else(|| Error::config("--x0 required".to_string()))?;
            let grid = parse_grid(args.grid.as_deref())?;
            let labels: Vec<String> = (0..pores.len()).map(|i| format!("pore{i}")).collect();
            writeln!(out, "t,{},total", labels.join(","))?;
            for &t in &grid {
                let (per, total) = if args.formula == "plane-flux" {
                    analytic::planar_flux(t, &pores, x0, d)?
                } else {
                    analytic::planar_cdf(t, &pores, x0, d)?
                };
                let cols: Vec<String> = per.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{t},{},{total}", cols.join(","))?;
            }
        }
        "splitting-planar" => {
            let pores = load_planar_pores(args.geometry.as_ref())?;
            let x0 = x0.ok_or_else(|| Error::config("--x0 required".to_string()))?;
            let q = analytic::splitting_planar(&pores, x0)?;
            writeln!(out, "pore,Q")?;
            for (i, v) in q.iter().enumerate() {
                writeln!(out, "pore{i},{v}")?;
            }
        }
        "splitting-sphere" => {
            let n = args
                .pores
                .ok_or_else(|| Error::config("--pores required".to_string()))?;
            let sigma = args
                .sigma
                .ok_or_else(|| Error::config("--sigma required".to_string()))?;
            let x0 = x0.ok_or_else(|| Error::config("--x0 required".to_string()))?;
            let a = 2.0 * (sigma / n as f64).sqrt();
            let centers = fibonacci_centers(n);
            let q = analytic::splitting_sphere(&centers, a, x0)?;
            writeln!(out, "pore,Q")?;
            for (i, v) in q.iter().enumerate() {
                writeln!(out, "pore{i},{v}")?;
            }
        }
        "strieder" => {
            let grid = parse_grid(args.grid.as_deref())?;
            writeln!(out, "d,C")?;
            for &dsep in &grid {
                writeln!(out, "{dsep},{}", analytic::strieder_capacitance(dsep)?)?;
            }
        }
        "robin-kappa" => {
            let sigma = args
                .sigma
                .ok_or_else(|| Error::config("--sigma required".to_string()))?;
            let a = match (args.pore_radius, args.pores) {
                (Some(a), _) => a,
                (None, Some(n)) => 2.0 * (sigma / n as f64).sqrt(),
                (None, None) => {
                    return Err(Error::config(
                        "--pore-radius or --pores required".to_string(),
                    ))
                }
            };
            writeln!(out, "kappa")?;
            writeln!(out, "{}", analytic::robin_kappa(sigma, a, d)?)?;
        }
        "homog-sphere" => {
            let big_r = args
                .release_r
                .ok_or_else(|| Error::config("--release-r required".to_string()))?;
            let kappa = match (args.kappa, args.sigma, args.pores) {
                (Some(k), _, _) => k,
                (None, Some(sigma), Some(n)) => {
                    let a = args
                        .pore_radius
                        .unwrap_or(2.0 * (sigma / n as f64).sqrt());
                    analytic::robin_kappa(sigma, a, d)?
                }
                _ => {
                    return Err(Error::config(
                        "--kappa or (--sigma and --pores) required".to_string(),
                    ))
                }
            };
            let grid = parse_grid(args.grid.as_deref())?;
            writeln!(out, "t,flux,cdf")?;
            for &t in &grid {
                let (flux, cdf) = analytic::homog_sphere(t, big_r, kappa, d)?;
                writeln!(out, "{t},{flux},{cdf}")?;
            }
        }
        "sphere-arrival" => {
            let big_r = args
                .release_r
                .ok_or_else(|| Error::config("--release-r required".to_string()))?;
            let grid = parse_grid(args.grid.as_deref())?;
            writeln!(out, "t,pdf,cdf")?;
            for &t in &grid {
                let (pdf, cdf) = analytic::sphere_arrival(t, big_r, d)?;
                writeln!(out, "{t},{pdf},{cdf}")?;
            }
        }
        "cube-equiv" => {
            let big_r = args
                .release_r
                .ok_or_else(|| Error::config("--release-r required".to_string()))?;
            let grid = parse_grid(args.grid.as_deref())?;
            writeln!(out, "t,cdf")?;
            for &t in &grid {
                writeln!(out, "{t},{}", analytic::cube_equiv_cdf(t, big_r, d)?)?;
            }
        }
        other => {
            return Err(Error::config(format!("unknown analytic formula '{other}'")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mesh
// ---------------------------------------------------------------------------

fn cmd_mesh(args: MeshArgs) -> Result<(), Error> {
    let mesh = match args.generator.as_str() {
        "cube" => make_cube(args.side)?,
        "fibonacci-sphere" => {
            let n = args
                .pores
                .ok_or_else(|| Error::config("--pores required".to_string()))?;
            let sigma = args
                .sigma
                .ok_or_else(|| Error::config("--sigma required".to_string()))?;
            make_fibonacci_sphere(n, sigma, args.refinement)?
        }
        "ellipsoid-skirt" => make_ellipsoid_skirt(args.r_eq, args.refinement)?,
        other => return Err(Error::config(format!("unknown mesh generator '{other}'"))),
    };
    let gj = GeometryJson::from_mesh(&mesh);
    std::fs::write(&args.out, serde_json::to_string(&gj)?)?;
    println!("vertices {}", mesh.vertices.len());
    println!("faces {}", mesh.faces.len());
    println!("absorbing_fraction {:.6}", mesh.absorbing_area_fraction());
    println!("bounding_radius {:.6}", mesh.bounding_sphere_radius);
    Ok(())
}

// ---------------------------------------------------------------------------
// capacitance
// ---------------------------------------------------------------------------

fn cmd_capacitance(args: CapacitanceArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.geometry)?;
    let gj: GeometryJson = serde_json::from_str(&text)?;
    let geometry = gj.build()?;
    let ratio = match &geometry {
        Geometry::Planar(s) => s.reinsertion_ratio,
        Geometry::Mesh(m) => m.reinsertion_ratio,
    };
    let tables = PropagatorTables::build_default(ratio)?;
    let mut settings = RunSettings::new(args.diffusivity, args.particles, args.seed);
    settings.workers = args.workers;
    let est = match &geometry {
        Geometry::Planar(scene) => {
            estimate_capacitance(Target::Planar(scene), args.release_radius, &settings, &tables)?
        }
        Geometry::Mesh(mesh) => {
            estimate_capacitance(Target::Mesh(mesh), args.release_radius, &settings, &tables)?
        }
    };
    let (_, stderr) = bootstrap(
        est.result.captures(),
        est.result.particles,
        args.bootstrap,
        args.seed ^ 0x9e3779b97f4a7c15,
    );
    println!("capacitance {:.10}", est.capacitance);
    println!("capture_fraction {:.8}", est.result.capture_fraction());
    println!("cv {:.6e}", est.cv);
    println!("bootstrap_stderr {:.6e}", stderr * args.release_radius);
    Ok(())
}

// ---------------------------------------------------------------------------
// table-build
// ---------------------------------------------------------------------------

fn cmd_table_build(args: TableBuildArgs) -> Result<(), Error> {
    let table = build_reinsertion_table(args.ratio, (args.mu, args.nu), args.diffusivity)?;
    std::fs::write(&args.out, serde_json::to_string(&table)?)?;
    println!(
        "table ratio {} grid {}x{} diffusivity {} warnings {}",
        table.ratio,
        args.mu,
        args.nu,
        args.diffusivity,
        table.convergence_warnings
    );
    Ok(())
}
