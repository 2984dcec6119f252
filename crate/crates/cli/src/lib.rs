//! Command-line front end: argument parsing, report serialization and the
//! SVG/CSV emitters.
//!
//! Exit codes: 0 on success, 1 on input, usage or genericity errors, 2 when
//! a verified identity fails.

pub mod csv_out;
pub mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use nalgebra::Vector3;
use normal_field::battery::{self, BatteryConfig};
use normal_field::evolute::{compute_index_report_with, CurveInvariants};
use normal_field::field::{self, Tolerances};
use normal_field::sphere;
use normal_field::surface::{self, Surface, SurfaceOptions, SurfaceSpec};
use normal_field::{ClosedCurve, CurveSpec, Point2};
use serde_json::{json, Value};

pub const GRAMMAR: &str =
    "normal-field (curve|surface|field) (analyze|critical-points|indices|verify|emit) \
[--spec FILE] [--point X,Y[,Z]] [--rho-range A:B] [--res NT,NR] [--battery N_CURVES,N_POINTS] \
[--seed S] [--out FILE] [--svg FILE] [--csv FILE] [--tol-genericity T] [--view cylinder|sphere]";

pub const THREADS_ENV: &str = "NORMAL_FIELD_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subject {
    Curve,
    Surface,
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Analyze,
    CriticalPoints,
    Indices,
    Verify,
    Emit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum View {
    #[default]
    Cylinder,
    Sphere,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] normal_field::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                normal_field::Error::IdentityMismatch(_) | normal_field::Error::MatrixMismatch(_),
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "normal-field", version, override_usage = GRAMMAR)]
#[command(
    about = "Critical points and index identities of normal maps of convex curves and surfaces"
)]
struct Args {
    #[arg(value_enum)]
    subject: Subject,
    #[arg(value_enum)]
    command: Command,
    /// JSON curve or surface spec
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Query point
    #[arg(long, value_name = "X,Y[,Z]", allow_hyphen_values = true, value_parser = parse_point)]
    point: Option<Coords>,
    /// Range of ρ for field grids and normal segments
    #[arg(long = "rho-range", value_name = "A:B", allow_hyphen_values = true, value_parser = parse_range)]
    rho_range: Option<(f64, f64)>,
    /// Grid resolution
    #[arg(long, value_name = "NT,NR", value_parser = parse_pair)]
    res: Option<(usize, usize)>,
    /// Random battery size
    #[arg(long, value_name = "N_CURVES,N_POINTS", value_parser = parse_pair)]
    battery: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Minimum distance from the query point to the curve and its evolute
    #[arg(long = "tol-genericity", value_name = "T")]
    tol_genericity: Option<f64>,
    /// Field plot style for `field emit`
    #[arg(long, value_enum, default_value_t)]
    view: View,
}

#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn parse_point(s: &str) -> Result<Coords, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if !(2..=3).contains(&v.len()) || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected X,Y or X,Y,Z, got {s:?}"));
    }
    Ok(Coords(v))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if !(a < b) {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected N,M, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

/// A validated command line.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subject: Subject,
    pub command: Command,
    pub spec: Option<PathBuf>,
    pub point: Option<Vec<f64>>,
    pub rho_range: Option<(f64, f64)>,
    pub res: Option<(usize, usize)>,
    pub battery: Option<(usize, usize)>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub tol_genericity: Option<f64>,
    pub view: View,
}

impl RunConfig {
    /// Parses and validates `args` (program name first). Help and version
    /// requests come back as a clap error of the corresponding kind.
    pub fn parse<I, T>(args: I) -> Result<Result<Self, CliError>, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let a = Args::try_parse_from(args)?;
        Ok(RunConfig {
            subject: a.subject,
            command: a.command,
            spec: a.spec,
            point: a.point.map(|c| c.0),
            rho_range: a.rho_range,
            res: a.res,
            battery: a.battery,
            seed: a.seed,
            out: a.out,
            svg: a.svg,
            csv: a.csv,
            tol_genericity: a.tol_genericity,
            view: a.view,
        }
        .validated())
    }

    fn validated(self) -> Result<Self, CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if let Some(t) = self.tol_genericity {
            if !(t > 0.0) {
                return usage(format!("--tol-genericity must be positive, got {t}"));
            }
        }
        if let Some((a, b)) = self.res {
            if a < 2 || b < 2 {
                return usage(format!("--res must be at least 2,2, got {a},{b}"));
            }
        }
        if let Some((n, m)) = self.battery {
            if n == 0 || m == 0 {
                return usage(format!("--battery sizes must be positive, got {n},{m}"));
            }
            if self.subject == Subject::Surface {
                return usage("--battery applies to curves only".into());
            }
            if self.command != Command::Verify {
                return usage("--battery is only accepted by verify".into());
            }
        }
        let dim = if self.subject == Subject::Surface {
            3
        } else {
            2
        };
        if let Some(p) = &self.point {
            if p.len() != dim {
                return usage(format!(
                    "--point needs {dim} coordinates for {:?}",
                    self.subject
                ));
            }
        }
        let needs_point = match self.command {
            Command::Verify => self.battery.is_none(),
            Command::Emit => self.subject == Subject::Field,
            _ => true,
        };
        if needs_point && self.point.is_none() {
            return usage("--point is required".into());
        }
        if self.spec.is_none() && self.battery.is_none() {
            return usage("--spec is required".into());
        }
        Ok(self)
    }

    fn point2(&self) -> Option<Point2> {
        self.point.as_ref().map(|p| Point2::new(p[0], p[1]))
    }

    fn point3(&self) -> Option<Vector3<f64>> {
        self.point.as_ref().map(|p| Vector3::new(p[0], p[1], p[2]))
    }

    fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(t) = self.tol_genericity {
            tol.genericity = t;
        }
        tol
    }

    fn surface_options(&self) -> SurfaceOptions {
        let mut opts = SurfaceOptions::default();
        if let Some((u, v)) = self.res {
            opts.grid_u = u;
            opts.grid_v = v;
        }
        if let Some(t) = self.tol_genericity {
            opts.genericity = t;
        }
        opts
    }
}

/// What a command produced: a summary for the terminal, a JSON report, and
/// whether every verified identity held.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub report: Value,
    pub passed: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn load_curve(path: &Path) -> Result<(CurveSpec, ClosedCurve), CliError> {
    let spec = CurveSpec::from_json(&read(path)?)?;
    let curve = ClosedCurve::strict(&spec)?;
    Ok((spec, curve))
}

fn load_surface(path: &Path) -> Result<(SurfaceSpec, Surface), CliError> {
    let spec = SurfaceSpec::from_json(&read(path)?)?;
    let s = surface::make_surface(&spec)?;
    Ok((spec, s))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn write_csv(
    path: &Path,
    f: impl FnOnce(BufWriter<fs::File>) -> csv::Result<()>,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    f(BufWriter::new(file)).map_err(|source| CliError::Csv {
        path: path.into(),
        source,
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn fmt_opt(v: Option<i64>) -> String {
    v.map_or_else(|| "null".to_string(), |x| x.to_string())
}

/// Runs one validated command.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match (cfg.subject, cfg.command) {
        (Subject::Surface, _) => surface_command(cfg),
        (_, Command::Verify) if cfg.battery.is_some() => battery_command(cfg),
        (Subject::Curve, Command::Emit) => curve_emit(cfg),
        (Subject::Field, Command::Emit) => field_emit(cfg),
        _ => curve_command(cfg),
    }
}

fn curve_command(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (spec, curve) = load_curve(cfg.spec.as_deref().expect("validated"))?;
    let p = cfg.point2().expect("validated");
    let tol = cfg.tolerances();
    let cps = field::critical_points_with(&curve, p, &tol)?;
    let mut s = String::new();
    let mut report = json!({ "spec": to_value(&spec), "point": [p.x, p.y] });
    let _ = writeln!(s, "{} critical points at p = ({}, {})", cps.len(), p.x, p.y);
    if cfg.command != Command::Indices {
        for c in &cps {
            let _ = writeln!(
                s,
                "  t* = {:.10}  rho* = {:.10}  {:<6}  index {:+}  1/k = {:.6}",
                c.t_star, c.rho_star, c.kind, c.index, c.fold_value
            );
        }
        report["critical_points"] = to_value(&cps);
    }
    if cfg.command == Command::CriticalPoints {
        if let Some(path) = &cfg.csv {
            write_csv(path, |w| csv_out::critical_points(w, &cps))?;
        }
        return Ok(Outcome {
            summary: s,
            report,
            passed: true,
        });
    }
    let inv = CurveInvariants::compute(&curve)?;
    let index = compute_index_report_with(&curve, &inv, p, &tol)?;
    let v = index.vector();
    let _ = writeln!(
        s,
        "r_alpha {}  r_beta {}  nu {}  i_N {}  i_S {}",
        v[0].unwrap(),
        fmt_opt(v[1]),
        fmt_opt(v[2]),
        index.i_north,
        index.i_south
    );
    let _ = writeln!(
        s,
        "n_p {}  m_p {}  N_p {}  w_alpha_p {}  w_beta_p {}",
        index.n_p, index.m_p, index.big_n_p, index.w_alpha_p, index.w_beta_p
    );
    let mut passed = index.all_identities_hold();
    for f in index.checks.failures() {
        let _ = writeln!(s, "FAILED: {f}");
    }
    report["index_report"] = to_value(&index);
    if cfg.command == Command::Verify || cfg.command == Command::Analyze {
        let check = battery::critical_point_check(&curve, p, &cps)?;
        if !check.holds() {
            let _ = writeln!(s, "FAILED: critical point structure {check:?}");
        }
        passed &= check.holds();
        report["critical_check"] = to_value(&check);
        let q = battery::quadrature_windings(&curve, p)?;
        let quad_ok = q.w_alpha == index.w_alpha_p && q.w_beta == index.w_beta_p;
        if !quad_ok {
            let _ = writeln!(s, "FAILED: quadrature windings {q:?}");
        }
        passed &= quad_ok;
        report["quadrature"] = to_value(&q);
    }
    if let Some(path) = &cfg.csv {
        match cfg.command {
            Command::Analyze => write_csv(path, |w| csv_out::critical_points(w, &cps))?,
            _ => write_csv(path, |w| csv_out::index_report(w, &index))?,
        }
    }
    if cfg.command == Command::Analyze {
        if let Some(path) = &cfg.svg {
            let style = curve_style(cfg, &curve);
            write_text(path, &svg::curve_plot(&curve, &style, Some(p))?)?;
        }
    }
    let _ = writeln!(
        s,
        "identities: {}",
        if passed { "all hold" } else { "FAILED" }
    );
    report["identities_hold"] = json!(passed);
    Ok(Outcome {
        summary: s,
        report,
        passed,
    })
}

fn curve_style(cfg: &RunConfig, curve: &ClosedCurve) -> svg::CurvePlotStyle {
    let (k_min, _) = curve.curvature_range();
    let mut style = svg::CurvePlotStyle {
        rho_min: -0.5 / k_min,
        ..Default::default()
    };
    if let Some((a, _)) = cfg.rho_range {
        style.rho_min = a;
    }
    if let Some((n, _)) = cfg.res {
        style.normals = n;
    }
    style
}

fn curve_emit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (spec, curve) = load_curve(cfg.spec.as_deref().expect("validated"))?;
    let p = cfg.point2();
    if let Some(path) = &cfg.svg {
        write_text(
            path,
            &svg::curve_plot(&curve, &curve_style(cfg, &curve), p)?,
        )?;
    }
    let samples = cfg.res.map_or(512, |r| r.0);
    if let Some(path) = &cfg.csv {
        write_csv(path, |w| csv_out::curve_samples(w, &curve, samples))?;
    }
    let (k_min, k_max) = curve.curvature_range();
    Ok(Outcome {
        summary: format!(
            "curve of length {:.6}, curvature in [{k_min:.6}, {k_max:.6}]\n",
            curve.length()
        ),
        report: json!({
            "spec": to_value(&spec),
            "length": curve.length(),
            "curvature_range": [k_min, k_max],
        }),
        passed: true,
    })
}

/// Default ρ window: the fold curve and every critical point, with margin.
fn default_rho_range(curve: &ClosedCurve, cps: &[field::CriticalPoint]) -> (f64, f64) {
    let (k_min, _) = curve.curvature_range();
    let r = 1.0 / k_min;
    let lo = cps.iter().map(|c| c.rho_star).fold(-0.5 * r, f64::min);
    let hi = cps.iter().map(|c| c.rho_star).fold(r, f64::max);
    let pad = 0.1 * (hi - lo);
    (lo - pad, hi + pad)
}

fn field_emit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (spec, curve) = load_curve(cfg.spec.as_deref().expect("validated"))?;
    let p = cfg.point2().expect("validated");
    let cps = field::critical_points_with(&curve, p, &cfg.tolerances())?;
    let range = cfg
        .rho_range
        .unwrap_or_else(|| default_rho_range(&curve, &cps));
    let (nt, nr) = cfg.res.unwrap_or((48, 24));
    let mut report =
        json!({ "spec": to_value(&spec), "point": [p.x, p.y], "critical_points": to_value(&cps) });
    let mut s = format!(
        "{} critical points; grid {nt}x{nr} over rho in [{}, {}]\n",
        cps.len(),
        range.0,
        range.1
    );
    match cfg.view {
        View::Cylinder => {
            let grid = field::field_grid(&curve, p, range.0, range.1, nt, nr)?;
            if let Some(path) = &cfg.svg {
                write_text(path, &svg::cylinder_plot(&grid, &cps, range))?;
            }
            if let Some(path) = &cfg.csv {
                write_csv(path, |w| csv_out::field_samples(w, &grid.samples))?;
            }
        }
        View::Sphere => {
            let projected = sphere::project_field(&curve, p, nt, nr)?;
            let _ = writeln!(
                s,
                "pole indices: N {}  S {}",
                projected.i_north, projected.i_south
            );
            report["i_N"] = json!(projected.i_north);
            report["i_S"] = json!(projected.i_south);
            if let Some(path) = &cfg.svg {
                write_text(path, &svg::sphere_plot(&projected))?;
            }
            if let Some(path) = &cfg.csv {
                let grid = field::field_grid(&curve, p, range.0, range.1, nt, nr)?;
                write_csv(path, |w| csv_out::field_samples(w, &grid.samples))?;
            }
        }
    }
    Ok(Outcome {
        summary: s,
        report,
        passed: true,
    })
}

fn battery_command(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (curves, points) = cfg.battery.expect("validated");
    let mut config = BatteryConfig {
        curves,
        points,
        seed: cfg.seed,
        ..Default::default()
    };
    if let Some(t) = cfg.tol_genericity {
        config.margin = t;
    }
    let report = battery::run_battery(&config)?;
    if let Some(path) = &cfg.csv {
        write_csv(path, |w| csv_out::battery(w, &report))?;
    }
    let mut s = format!(
        "battery: {} curves x {} points, seed {}: {} cases\n",
        curves,
        points,
        cfg.seed,
        report.cases.len()
    );
    for f in &report.failures {
        let _ = writeln!(s, "FAILED: {f}");
    }
    let passed = report.passed();
    let _ = writeln!(
        s,
        "identities: {}",
        if passed { "all hold" } else { "FAILED" }
    );
    Ok(Outcome {
        summary: s,
        report: json!({ "battery": to_value(&report), "identities_hold": passed }),
        passed,
    })
}

fn surface_command(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (spec, s) = load_surface(cfg.spec.as_deref().expect("validated"))?;
    let opts = cfg.surface_options();
    let mut out = String::new();
    let mut report = json!({ "spec": to_value(&spec) });
    if cfg.command == Command::Emit {
        let umb = surface::umbilics_with(&s, &opts).unwrap_or_default();
        let (p, points) = match cfg.point3() {
            Some(p) => (p, surface::surface_critical_points_with(&s, &p, &opts)?),
            None => (Vector3::zeros(), Vec::new()),
        };
        if let Some(path) = &cfg.svg {
            write_text(path, &svg::surface_plot(&s, p, &points, &umb))?;
        }
        if let Some(path) = &cfg.csv {
            write_csv(path, |w| csv_out::surface_points(w, &points))?;
        }
        let _ = writeln!(
            out,
            "{} umbilics, {} critical points",
            umb.len(),
            points.len()
        );
        report["umbilics"] = to_value(&umb);
        report["critical_points"] = to_value(&points);
        return Ok(Outcome {
            summary: out,
            report,
            passed: true,
        });
    }
    let p = cfg.point3().expect("validated");
    report["point"] = json!([p.x, p.y, p.z]);
    if cfg.command == Command::CriticalPoints {
        let points = surface::surface_critical_points_with(&s, &p, &opts)?;
        let _ = writeln!(out, "{} critical points", points.len());
        for c in &points {
            let _ = writeln!(
                out,
                "  {:?} at ({:.8}, {:.8}, {:.8})  rho* = {:.8}  index {:+}",
                c.d2_type, c.position[0], c.position[1], c.position[2], c.rho_star, c.index
            );
        }
        if let Some(path) = &cfg.csv {
            write_csv(path, |w| csv_out::surface_points(w, &points))?;
        }
        report["critical_points"] = to_value(&points);
        return Ok(Outcome {
            summary: out,
            report,
            passed: true,
        });
    }
    let r = surface::compute_surface_report(&s, &p, &opts)?;
    let _ = writeln!(
        out,
        "n_plus {}  n_minus {}  n_zero {}  N_p {}  index sum {}",
        r.n_plus, r.n_minus, r.n_zero, r.big_n_p, r.index_sum
    );
    let _ = writeln!(
        out,
        "w_beta1_p {}  w_beta2_p {}  Gauss degree {}",
        r.w_beta1_p, r.w_beta2_p, r.gauss_degree
    );
    for f in r.checks.failures() {
        let _ = writeln!(out, "FAILED: {f}");
    }
    if cfg.command == Command::Analyze {
        let umb = surface::umbilics_with(&s, &opts)?;
        let _ = writeln!(out, "{} umbilics", umb.len());
        for u in &umb {
            let _ = writeln!(
                out,
                "  ({:.8}, {:.8}, {:.8})  k = {:.8}",
                u.position[0], u.position[1], u.position[2], u.curvature
            );
        }
        report["umbilics"] = to_value(&umb);
        if let Some(path) = &cfg.svg {
            write_text(path, &svg::surface_plot(&s, p, &r.critical_points, &umb))?;
        }
    }
    if let Some(path) = &cfg.csv {
        match cfg.command {
            Command::Analyze => {
                write_csv(path, |w| csv_out::surface_points(w, &r.critical_points))?
            }
            _ => write_csv(path, |w| csv_out::surface_report(w, &r))?,
        }
    }
    let passed = r.checks.all();
    let _ = writeln!(
        out,
        "identities: {}",
        if passed { "all hold" } else { "FAILED" }
    );
    report["surface_report"] = to_value(&r);
    report["identities_hold"] = json!(passed);
    Ok(Outcome {
        summary: out,
        report,
        passed,
    })
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn envelope(cfg: &RunConfig, mut report: Value) -> Value {
    report["subject"] = json!(format!("{:?}", cfg.subject).to_lowercase());
    report["command"] = json!(cfg
        .command
        .to_possible_value()
        .map(|v| v.get_name().to_string()));
    report["seed"] = json!(cfg.seed);
    report
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::parse(args) {
        Ok(Ok(cfg)) => cfg,
        Ok(Err(e)) => {
            eprintln!("error: {e}\n\nUsage: {GRAMMAR}");
            return 1;
        }
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("\nUsage: {GRAMMAR}");
                return 1;
            }
            return 0;
        }
    };
    configure_threads();
    let (code, report) = match execute(&cfg) {
        Ok(o) => {
            print!("{}", o.summary);
            (if o.passed { 0 } else { 2 }, o.report)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (
                e.exit_code(),
                json!({ "error": e.to_string(), "exit_code": e.exit_code() }),
            )
        }
    };
    if let Some(path) = &cfg.out {
        let text = serde_json::to_string_pretty(&envelope(&cfg, report)).expect("json");
        if let Err(e) = write_text(path, &(text + "\n")) {
            eprintln!("error: {e}");
            return code.max(1);
        }
    }
    code
}
