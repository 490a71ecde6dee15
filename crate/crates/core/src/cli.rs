//! Command line front end: `generate`, `verify`, `periods`, `report`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

use crate::catalog::{default_mesh_grid, make_family, torus_period_b, FamilySpec, TorusPeriods};
use crate::error::{Error, Result};
use crate::mesh::{export, sample_mesh, MeshFormat, MeshGrid};
use crate::parse::{parse_complex, parse_grid, parse_range, parse_sweep, CParam};
use crate::quadrature::QuadConfig;
use crate::report::{summarize, verify, Suite, VerifyOptions};

#[derive(Parser, Debug)]
#[command(name = "harmonica", version, about = "Harmonic immersions of Riemann surfaces from Weierstrass data")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed of the random identity sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long = "tol-abs", global = true)]
    tol_abs: Option<f64>,
    #[arg(long = "tol-rel", global = true)]
    tol_rel: Option<f64>,
    #[arg(long = "tol-max-subdivisions", global = true)]
    tol_max_subdivisions: Option<usize>,
    #[arg(long = "tol-tail-growth", global = true)]
    tol_tail_growth: Option<f64>,
    #[arg(long = "tol-clearance", global = true)]
    tol_clearance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a family on a parameter grid and write a mesh.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        /// Grid size NxM.
        #[arg(long, default_value = "128x128")]
        grid: String,
        /// Log-polar radius range lo:hi in rho = log|z|.
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        /// Rectangular grid ranges lo:hi (both required).
        #[arg(long = "re", allow_hyphen_values = true)]
        re_range: Option<String>,
        #[arg(long = "im", allow_hyphen_values = true)]
        im_range: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Output format; taken from the file extension when omitted.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run verification suites; exit 0 iff every suite passes.
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Number of random points of the identity suite.
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// Solve the torus period problem for b(a).
    Periods {
        #[arg(long, default_value = "torus")]
        family: String,
        #[arg(long, conflicts_with = "sweep")]
        a: Option<f64>,
        /// lo:hi:n
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Full JSON verification report; exits 0 whenever the report could be produced.
    Report {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// plane, harmonic_graph, helicoid_y1, helicoid_y2, rotational, horn, catenoid, flujo,
    /// torus, non_qc_y, remark_contra
    #[arg(long, required_unless_present = "spec")]
    family: Option<String>,
    /// JSON family spec file.
    #[arg(long, conflicts_with = "family")]
    spec: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Comma-separated polynomial coefficients c0,c1,... of the harmonic graph.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Obj,
    Ply,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Identities,
    Ends,
    Curvature,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Ends => Suite::Ends,
            SuiteArg::Curvature => Suite::Curvature,
            SuiteArg::All => Suite::All,
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameters(format!("{family} needs --{flag}")))
}

fn real_of(s: &str, flag: &str) -> Result<f64> {
    let z = parse_complex(s)?;
    if z.im != 0.0 {
        return Err(Error::InvalidParameters(format!("--{flag} must be real, got {s}")));
    }
    Ok(z.re)
}

impl FamilyArgs {
    fn spec(&self) -> Result<FamilySpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)?;
            return Ok(serde_json::from_str(&text)?);
        }
        let name = self.family.as_deref().unwrap_or_default();
        let cplx = |v: &Option<String>, flag: &str| -> Result<CParam> {
            Ok(CParam(parse_complex(need(v.as_deref(), flag, name)?)?))
        };
        Ok(match name {
            "plane" => FamilySpec::Plane,
            "harmonic_graph" | "graph" => {
                let text = need(self.coeffs.as_deref(), "coeffs", name)?;
                let coeffs = text.split(',').map(|t| parse_complex(t).map(CParam)).collect::<Result<_>>()?;
                FamilySpec::HarmonicGraph { coeffs }
            }
            "helicoid_y1" | "y1" => FamilySpec::HelicoidY1,
            "helicoid_y2" | "y2" => FamilySpec::HelicoidY2,
            "rotational" => FamilySpec::Rotational { b: cplx(&self.b, "b")? },
            "horn" => FamilySpec::Horn { r1: self.r1.unwrap_or(0.0), r2: self.r2.unwrap_or(0.0) },
            "catenoid" => FamilySpec::Catenoid {
                alpha: cplx(&self.alpha, "alpha")?,
                beta: cplx(&self.beta, "beta")?,
                r1: self.r1.unwrap_or(0.0),
                r2: self.r2.unwrap_or(0.0),
            },
            "flujo" => FamilySpec::Flujo {
                b: real_of(need(self.b.as_deref(), "b", name)?, "b")?,
                c: need(self.c, "c", name)?,
            },
            "torus" => FamilySpec::Torus {
                a: need(self.a, "a", name)?,
                b: self.b.as_deref().map(|s| real_of(s, "b")).transpose()?,
            },
            "non_qc_y" => FamilySpec::NonQcY,
            "remark_contra" => FamilySpec::RemarkContra,
            other => return Err(Error::InvalidParameters(format!("unknown family '{other}'"))),
        })
    }
}

fn config(cli: &Cli) -> Result<QuadConfig> {
    let mut cfg = QuadConfig::default();
    if let Some(v) = cli.tol_abs {
        cfg.abs_tol = v;
    }
    if let Some(v) = cli.tol_rel {
        cfg.rel_tol = v;
    }
    if let Some(v) = cli.tol_max_subdivisions {
        cfg.max_subdivisions = v;
    }
    if let Some(v) = cli.tol_tail_growth {
        cfg.tail_radius_growth = v;
    }
    if let Some(v) = cli.tol_clearance {
        cfg.clearance = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct MeshSummary<'a> {
    schema_version: u32,
    family: &'a FamilySpec,
    path: String,
    vertices: usize,
    faces: usize,
    area: f64,
}

#[derive(Serialize)]
struct PeriodTable {
    schema_version: u32,
    rows: Vec<TorusPeriods>,
    /// "increasing", "decreasing" or "none" for b over the sweep.
    trend: Option<&'static str>,
}

fn trend(rows: &[TorusPeriods]) -> &'static str {
    let inc = rows.windows(2).all(|w| w[1].b > w[0].b);
    let dec = rows.windows(2).all(|w| w[1].b < w[0].b);
    match (inc, dec) {
        (true, _) => "increasing",
        (_, true) => "decreasing",
        _ => "none",
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Generate { family, grid, rho, re_range, im_range, out: path, format } => {
            let spec = family.spec()?;
            let (n1, n2) = parse_grid(grid)?;
            let grid = match (rho, re_range, im_range) {
                (Some(r), None, None) => MeshGrid::log_polar(parse_range(r)?, n1, n2),
                (None, Some(re), Some(im)) => {
                    MeshGrid::Rect { re: parse_range(re)?, im: parse_range(im)?, nx: n1, ny: n2 }
                }
                (None, None, None) => default_mesh_grid(&spec, n1, n2),
                _ => return Err(Error::InvalidParameters("give either --rho or both --re and --im".into())),
            };
            let format = match format {
                Some(FormatArg::Obj) => MeshFormat::Obj,
                Some(FormatArg::Ply) => MeshFormat::Ply,
                Some(FormatArg::Csv) => MeshFormat::Csv,
                None => MeshFormat::from_path(path).ok_or_else(|| {
                    Error::InvalidParameters(format!("cannot infer a mesh format from {}", path.display()))
                })?,
            };
            let fam = make_family(&spec, &cfg)?;
            let mesh = sample_mesh(&fam.immersion, &grid, &cfg)?;
            export(&mesh, path, format)?;
            let summary = MeshSummary {
                schema_version: crate::report::SCHEMA_VERSION,
                family: &spec,
                path: path.display().to_string(),
                vertices: mesh.vertices.len(),
                faces: mesh.faces.len(),
                area: mesh.area(),
            };
            if cli.json {
                emit_json(out, &summary)?;
            } else {
                writeln!(
                    out,
                    "wrote {} ({} vertices, {} faces, area {:.6})",
                    summary.path, summary.vertices, summary.faces, summary.area
                )?;
            }
            Ok(0)
        }
        Command::Verify { family, suite, points } => {
            let spec = family.spec()?;
            let opts = VerifyOptions { suite: (*suite).into(), points: *points, seed: cli.seed };
            let report = verify(&spec, &cfg, &opts)?;
            if cli.json {
                emit_json(out, &report)?;
            } else {
                write!(out, "{}", summarize(&report))?;
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Periods { family, a, sweep } => {
            if family != "torus" {
                return Err(Error::InvalidParameters(format!("periods supports only the torus, got '{family}'")));
            }
            let values = match (a, sweep) {
                (Some(a), None) => vec![*a],
                (None, Some(s)) => parse_sweep(s)?,
                _ => return Err(Error::InvalidParameters("periods needs --a or --sweep".into())),
            };
            let rows = values.iter().map(|&a| torus_period_b(a, &cfg)).collect::<Result<Vec<_>>>()?;
            let table = PeriodTable {
                schema_version: crate::report::SCHEMA_VERSION,
                trend: (rows.len() > 1).then(|| trend(&rows)),
                rows,
            };
            if cli.json {
                emit_json(out, &table)?;
            } else {
                writeln!(out, "{:>8} {:>18} {:>10} {:>10} {:>18} {:>18}", "a", "b(a)", "res_g1", "res_g2", "-2J1/J2", "-2J2/J1")?;
                for r in &table.rows {
                    writeln!(
                        out,
                        "{:>8.4} {:>18.12} {:>10.2e} {:>10.2e} {:>18.12} {:>18.12}",
                        r.a, r.b, r.gamma1_residual, r.gamma2_real, r.ratio_b, r.inverse_ratio_b
                    )?;
                }
                if let Some(t) = table.trend {
                    writeln!(out, "trend of b over the sweep: {t}")?;
                }
            }
            Ok(0)
        }
        Command::Report { family, points, out: path } => {
            let spec = family.spec()?;
            let opts = VerifyOptions { suite: Suite::All, points: *points, seed: cli.seed };
            let report = verify(&spec, &cfg, &opts)?;
            match path {
                Some(p) => {
                    let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
                    emit_json(&mut f, &report)?;
                    f.flush()?;
                    if !cli.json {
                        write!(out, "{}", summarize(&report))?;
                    }
                }
                None => emit_json(out, &report)?,
            }
            Ok(0)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("HARMONICA_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[derive(Serialize)]
struct ErrorReport {
    schema_version: u32,
    error: String,
    exit_code: i32,
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    configure_threads();
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            if cli.json {
                let _ = emit_json(
                    out,
                    &ErrorReport { schema_version: crate::report::SCHEMA_VERSION, error: e.to_string(), exit_code: code },
                );
            }
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}
