//! Command-line surface: subcommand dispatch, flag parsing, and deterministic
//! CSV/text report emission.
//!
//! Exit codes: 0 success, 2 validation error (flags, scene, missing targets),
//! 3 numerical failure (quadrature guard, singular pencil). Identical scene,
//! seed and flags produce byte-identical report files; `FOCKDENS_THREADS`
//! caps the worker pool without affecting output bytes.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;

use crate::algebra::ComplexVector;
use crate::density::{self, DensityError};
use crate::focknum::{self, FockError, RatioTarget};
use crate::hypersurface::{self, Hypersurface, SurfaceError};
use crate::mc::derive_seed;
use crate::scene::{parse_scene, Scene, SceneError};
use crate::sequences::{self, SeqError, Sequence1D};
use crate::singularity::{self, SingError};

#[derive(Debug)]
enum CliError {
    Scene(SceneError),
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Scene(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn surface_is_usage(e: &SurfaceError) -> bool {
    matches!(e, SurfaceError::InvalidParameter(_) | SurfaceError::ZeroPolynomial)
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        CliError::Scene(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        if surface_is_usage(&e) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match &e {
            DensityError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            DensityError::Surface(s) if surface_is_usage(s) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SingError> for CliError {
    fn from(e: SingError) -> Self {
        match &e {
            SingError::NewtonUndefinedN1 | SingError::InvalidParameter(_) => {
                CliError::Usage(e.to_string())
            }
            SingError::Surface(s) if surface_is_usage(s) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match &e {
            FockError::NonQuadraticWeight
            | FockError::Underdetermined
            | FockError::InvalidParameter(_)
            | FockError::Weight(_) => CliError::Usage(e.to_string()),
            FockError::Surface(s) if surface_is_usage(s) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        match &e {
            SeqError::DegenerateLevi => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fockdens",
    version,
    about = "Density, singularity and sampling diagnostics for weighted Fock spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hypersurface density at one ball.
    Density(DensityArgs),
    /// Density over a centers x radii grid with trend summary.
    DensityScan(ScanArgs),
    /// Singular weight values by the Newton and/or log-modulus routes.
    Singularity(SingArgs),
    /// Heuristic uniform-flatness certificate for the hypersurface.
    Flatness(FlatArgs),
    /// Two-sided sampling-ratio bounds for a truncated basis window.
    SamplingRatio(RatioArgs),
    /// Minimum-norm extension of monomial data from the hypersurface.
    Extend(ExtendArgs),
    /// Zero-counting ratio against the weighted disc mass.
    Jensen(JensenArgs),
    /// Product-sequence interpolation/sampling criterion.
    ProductCheck(ProductArgs),
    /// Disc-count density of a 1-D sequence, or of its line union on C^2.
    SeqDensity(SeqDensityArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Scene description file (JSON).
    #[arg(long, value_name = "FILE")]
    scene: PathBuf,
    /// Output directory for report files; created if missing.
    #[arg(long, value_name = "DIR", default_value = "reports")]
    out: PathBuf,
    /// Master seed (default 42); per-cell seeds are derived by counter hashing.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo budget per evaluation cell; overrides the scene default.
    #[arg(long)]
    budget: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<(Scene, u64, usize), CliError> {
        let scene = parse_scene(&self.scene)?;
        let seed = self.seed.unwrap_or(scene.defaults.seed);
        let budget = self.budget.unwrap_or(scene.defaults.budget);
        if budget == 0 {
            return Err(usage("budget must be positive"));
        }
        Ok((scene, seed, budget))
    }
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    /// Ball center: comma-separated complex components, e.g. "0,0" or "1.5,0.5-2i".
    #[arg(long)]
    center: String,
    #[arg(long)]
    radius: f64,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Centers file: one point per line as 2n reals "re im re im ...".
    #[arg(long, value_name = "FILE")]
    centers: PathBuf,
    /// Comma-separated strictly ascending radii, e.g. "1,2,4,8".
    #[arg(long)]
    radii: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodFlag {
    Newton,
    LogT,
    Both,
}

#[derive(Args, Debug)]
struct SingArgs {
    #[command(flatten)]
    common: Common,
    /// Evaluation points file: one point per line as 2n reals.
    #[arg(long, value_name = "FILE")]
    points: PathBuf,
    #[arg(long)]
    radius: f64,
    #[arg(long, value_enum, default_value_t = MethodFlag::Both)]
    method: MethodFlag,
}

#[derive(Args, Debug)]
struct FlatArgs {
    #[command(flatten)]
    common: Common,
    /// Region center, comma-separated complex components.
    #[arg(long)]
    center: String,
    #[arg(long)]
    radius: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TargetFlag {
    /// Surface if the scene has one, else a sole named sequence, else ambient.
    Auto,
    Surface,
    Ambient,
    Points,
}

#[derive(Args, Debug)]
struct RatioArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    window_radius: f64,
    /// Truncation degree of the polynomial window.
    #[arg(long)]
    degree: usize,
    #[arg(long, value_enum, default_value_t = TargetFlag::Auto)]
    target: TargetFlag,
    /// Points file for --target points (one point per line as 2n reals).
    #[arg(long, value_name = "FILE")]
    points: Option<PathBuf>,
    /// Named scene sequence for --target points (1-D scenes).
    #[arg(long)]
    sequence: Option<String>,
}

#[derive(Args, Debug)]
struct ExtendArgs {
    #[command(flatten)]
    common: Common,
    /// Exponents of the monomial whose restriction is extended, e.g. "6,0".
    #[arg(long)]
    monomial: String,
    /// Ambient truncation degree of the extension basis.
    #[arg(long)]
    degree: usize,
    /// Surface sampling window radius around the origin.
    #[arg(long)]
    window_radius: f64,
    /// Ridge parameter; 0 means strict minimum-norm.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
}

#[derive(Args, Debug)]
struct JensenArgs {
    #[command(flatten)]
    common: Common,
    /// Named 1-D sequence of zeros; defaults to the scene's only one.
    #[arg(long)]
    sequence: Option<String>,
    #[arg(long)]
    radius: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeFlag {
    Interp,
    Samp,
}

#[derive(Args, Debug)]
struct ProductArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: ModeFlag,
    /// Slice-counting radius of the criterion.
    #[arg(long)]
    r: f64,
    /// Density slack; defaults to the scene value.
    #[arg(long)]
    eps: Option<f64>,
    /// Named product sequence; defaults to the scene's only one.
    #[arg(long)]
    name: Option<String>,
    /// Grid of test points: real lattice over [-extent, extent]^2.
    #[arg(long, default_value_t = 1.0)]
    grid_extent: f64,
    #[arg(long, default_value_t = 0.5)]
    grid_step: f64,
}

#[derive(Args, Debug)]
struct SeqDensityArgs {
    #[command(flatten)]
    common: Common,
    /// Named 1-D sequence; defaults to the scene's only one.
    #[arg(long)]
    sequence: Option<String>,
    /// Disc (n=1) or ball (n=2) center.
    #[arg(long)]
    center: String,
    #[arg(long)]
    radius: f64,
}

/// Parses one complex component: "1.5", "-2i", "1+2i", "3.5e-1-0.25i", "i".
fn parse_complex(tok: &str) -> Result<Complex<f64>, CliError> {
    let s = tok.trim();
    let bad = || usage(format!("cannot parse complex component {tok:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        let bytes = body.as_bytes();
        let mut split = None;
        for (idx, &b) in bytes.iter().enumerate().skip(1) {
            if (b == b'+' || b == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
            }
        }
        let parse_im = |t: &str| -> Result<f64, CliError> {
            match t {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => t.parse().map_err(|_| bad()),
            }
        };
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].parse().map_err(|_| bad())?;
                Ok(Complex::new(re, parse_im(&body[idx..])?))
            }
            None => Ok(Complex::new(0.0, parse_im(body)?)),
        }
    } else {
        Ok(Complex::new(s.parse().map_err(|_| bad())?, 0.0))
    }
}

fn parse_center(text: &str, n: usize) -> Result<ComplexVector<f64>, CliError> {
    let comps: Result<Vec<_>, _> = text.split(',').map(parse_complex).collect();
    let comps = comps?;
    if comps.len() != n {
        return Err(usage(format!(
            "center has {} components, scene dimension is {n}",
            comps.len()
        )));
    }
    Ok(ComplexVector::from_vec(comps))
}

fn parse_radii(text: &str) -> Result<Vec<f64>, CliError> {
    let radii: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    let radii = radii.map_err(|_| usage(format!("cannot parse radii list {text:?}")))?;
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(usage("radii must be positive"));
    }
    Ok(radii)
}

/// Reads points as lines of `2n` whitespace-separated reals.
fn parse_points_file(path: &Path, n: usize) -> Result<Vec<ComplexVector<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read points file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let nums = nums.map_err(|_| {
            usage(format!("points file line {}: expected reals, got {raw:?}", idx + 1))
        })?;
        if nums.len() != 2 * n {
            return Err(usage(format!(
                "points file line {}: expected {} reals for dimension {n}, got {}",
                idx + 1,
                2 * n,
                nums.len()
            )));
        }
        out.push(ComplexVector::from_vec(
            nums.chunks(2).map(|p| Complex::new(p[0], p[1])).collect(),
        ));
    }
    if out.is_empty() {
        return Err(usage(format!("points file {} has no points", path.display())));
    }
    Ok(out)
}

fn parse_monomial(text: &str, n: usize) -> Result<Vec<u16>, CliError> {
    let alpha: Result<Vec<u16>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    let alpha = alpha.map_err(|_| usage(format!("cannot parse monomial exponents {text:?}")))?;
    if alpha.len() != n {
        return Err(usage(format!(
            "monomial has {} exponents, scene dimension is {n}",
            alpha.len()
        )));
    }
    Ok(alpha)
}

/// Real test lattice over `[-extent, extent]^2`, imaginary parts zero.
fn real_grid(extent: f64, step: f64) -> Result<Vec<ComplexVector<f64>>, CliError> {
    if !(step > 0.0) || !(extent >= 0.0) {
        return Err(usage("grid step must be positive and extent nonnegative"));
    }
    let kmax = (2.0 * extent / step + 1e-9).floor() as i64;
    let mut grid = Vec::new();
    for i in 0..=kmax {
        for j in 0..=kmax {
            let x1 = -extent + i as f64 * step;
            let x2 = -extent + j as f64 * step;
            grid.push(ComplexVector::from_vec(vec![
                Complex::new(x1, 0.0),
                Complex::new(x2, 0.0),
            ]));
        }
    }
    Ok(grid)
}

fn need_surface(scene: &Scene) -> Result<&Hypersurface<f64>, CliError> {
    scene
        .surface
        .as_ref()
        .ok_or_else(|| usage("this command needs a hypersurface in the scene"))
}

fn named_points<'a>(
    scene: &'a Scene,
    name: Option<&str>,
) -> Result<&'a Sequence1D<f64>, CliError> {
    match name {
        Some(n) => scene
            .points
            .get(n)
            .ok_or_else(|| usage(format!("no 1-D sequence named {n:?} in the scene"))),
        None if scene.points.len() == 1 => Ok(scene.points.values().next().expect("len 1")),
        None => Err(usage(format!(
            "scene has {} 1-D sequences; pick one with --sequence",
            scene.points.len()
        ))),
    }
}

fn named_product<'a>(
    scene: &'a Scene,
    name: Option<&str>,
) -> Result<&'a sequences::ProductSequence<f64>, CliError> {
    match name {
        Some(n) => scene
            .products
            .get(n)
            .ok_or_else(|| usage(format!("no product sequence named {n:?} in the scene"))),
        None if scene.products.len() == 1 => Ok(scene.products.values().next().expect("len 1")),
        None => Err(usage(format!(
            "scene has {} product sequences; pick one with --name",
            scene.products.len()
        ))),
    }
}

/// Shortest exact decimal in scientific notation; deterministic bytes.
fn f(v: f64) -> String {
    format!("{v:e}")
}

struct Report {
    buf: String,
}

impl Report {
    fn csv(header: &[String]) -> Self {
        let mut buf = String::with_capacity(256);
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self { buf }
    }

    fn text() -> Self {
        Self { buf: String::new() }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    fn line(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    fn write(self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, self.buf)?;
        Ok(path)
    }
}

fn header_cells(strs: &[&str]) -> Vec<String> {
    strs.iter().map(|s| s.to_string()).collect()
}

fn point_header(n: usize) -> Vec<String> {
    let mut h = Vec::with_capacity(2 * n);
    for i in 0..n {
        h.push(format!("z{i}_re"));
        h.push(format!("z{i}_im"));
    }
    h
}

fn point_cells(z: &ComplexVector<f64>) -> Vec<String> {
    z.iter().flat_map(|c| [f(c.re), f(c.im)]).collect()
}

fn cmd_density(a: &DensityArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, seed, budget) = a.common.load()?;
    let h = need_surface(&scene)?;
    let z = parse_center(&a.center, scene.dimension)?;
    let rep = density::density_at(h, &scene.weight, &z, a.radius, budget, seed)?;
    let mut header = point_header(scene.dimension);
    header.extend(header_cells(&["radius", "density", "std_error"]));
    let mut csv = Report::csv(&header);
    let mut cells = point_cells(&z);
    cells.extend([f(a.radius), f(rep.density), f(rep.mc_std_error)]);
    csv.row(cells);
    Ok(vec![csv.write(&a.common.out, "density.csv")?])
}

fn cmd_density_scan(a: &ScanArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, seed, budget) = a.common.load()?;
    let h = need_surface(&scene)?;
    let centers = parse_points_file(&a.centers, scene.dimension)?;
    let radii = parse_radii(&a.radii)?;
    let scan = density::density_scan(h, &scene.weight, &centers, &radii, budget, seed)?;

    let mut header = vec!["center_index".to_string()];
    header.extend(point_header(scene.dimension));
    header.extend(header_cells(&["radius", "density", "std_error"]));
    let mut csv = Report::csv(&header);
    for (ci, row) in scan.reports.iter().enumerate() {
        for rep in row {
            let mut cells = vec![ci.to_string()];
            cells.extend(point_cells(&centers[ci]));
            cells.extend([f(rep.radius), f(rep.density), f(rep.mc_std_error)]);
            csv.row(cells);
        }
    }
    let csv_path = csv.write(&a.common.out, "density_scan.csv")?;

    let mut summary = Report::text();
    for (ri, &r) in scan.radii.iter().enumerate() {
        summary.line(&format!(
            "radius {}: sup {} inf {}",
            f(r),
            f(scan.sup_per_radius[ri]),
            f(scan.inf_per_radius[ri])
        ));
    }
    let trend_line = |name: &str, t: &density::Trend<f64>| {
        let limit = t
            .richardson_limit
            .map_or_else(|| "none".to_string(), f);
        format!("{name} trend: {:?}, extrapolated limit: {limit}", t.label)
    };
    summary.line(&trend_line("sup", &scan.sup_trend));
    summary.line(&trend_line("inf", &scan.inf_trend));
    let sum_path = summary.write(&a.common.out, "density_scan_summary.txt")?;
    Ok(vec![csv_path, sum_path])
}

fn cmd_singularity(a: &SingArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, seed, budget) = a.common.load()?;
    let h = need_surface(&scene)?;
    let points = parse_points_file(&a.points, scene.dimension)?;
    let mut header = point_header(scene.dimension);
    header.extend(header_cells(&["route", "value", "std_error"]));
    let mut csv = Report::csv(&header);
    for (i, z) in points.iter().enumerate() {
        let mut rows = Vec::new();
        if matches!(a.method, MethodFlag::Newton | MethodFlag::Both) {
            let s = derive_seed(seed, &[0xc1, i as u64, 0]);
            rows.push(("newton", singularity::s_r_newton(h, z, a.radius, budget, s)?));
        }
        if matches!(a.method, MethodFlag::LogT | MethodFlag::Both) {
            let s = derive_seed(seed, &[0xc1, i as u64, 1]);
            rows.push(("log_t", singularity::s_r_log_t(h, z, a.radius, budget, s)?));
        }
        for (route, val) in rows {
            let mut cells = point_cells(z);
            cells.extend([route.to_string(), f(val.value), f(val.quadrature_error)]);
            csv.row(cells);
        }
    }
    Ok(vec![csv.write(&a.common.out, "singularity.csv")?])
}

fn cmd_flatness(a: &FlatArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, seed, budget) = a.common.load()?;
    let h = need_surface(&scene)?;
    let z = parse_center(&a.center, scene.dimension)?;
    let rep = hypersurface::flatness_check(h, &z, a.radius, budget, seed)?;
    // Spread across an independent replicate stands in for a formal error bar.
    let rep2 = hypersurface::flatness_check(h, &z, a.radius, budget, derive_seed(seed, &[0xf1]))?;
    let spread = (rep.epsilon_estimate - rep2.epsilon_estimate).abs() * 0.5;
    let mut header = point_header(scene.dimension);
    header.extend(header_cells(&[
        "radius",
        "epsilon_estimate",
        "max_graph_constant",
        "min_normal_injectivity",
        "samples",
        "seed_spread",
    ]));
    let mut csv = Report::csv(&header);
    let mut cells = point_cells(&z);
    cells.extend([
        f(a.radius),
        f(rep.epsilon_estimate),
        f(rep.max_graph_constant),
        f(rep.min_normal_injectivity),
        rep.samples.to_string(),
        f(spread),
    ]);
    csv.row(cells);
    Ok(vec![csv.write(&a.common.out, "flatness.csv")?])
}

fn cmd_sampling_ratio(a: &RatioArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, seed, budget) = a.common.load()?;
    let seq_points = |name: Option<&str>| -> Result<Vec<ComplexVector<f64>>, CliError> {
        if scene.dimension != 1 {
            return Err(usage("--sequence targets need a 1-D scene; use --points"));
        }
        let s = named_points(&scene, name)?;
        Ok(s.points()
            .iter()
            .map(|&p| ComplexVector::from_vec(vec![p]))
            .collect())
    };
    let points: Option<Vec<ComplexVector<f64>>> = match (&a.target, &a.points) {
        (TargetFlag::Surface | TargetFlag::Ambient, _) => None,
        (TargetFlag::Points, Some(file)) => Some(parse_points_file(file, scene.dimension)?),
        (TargetFlag::Points, None) => Some(seq_points(a.sequence.as_deref())?),
        (TargetFlag::Auto, Some(file)) => Some(parse_points_file(file, scene.dimension)?),
        (TargetFlag::Auto, None) => {
            if scene.surface.is_some() {
                None
            } else if !scene.points.is_empty() {
                Some(seq_points(a.sequence.as_deref())?)
            } else {
                None
            }
        }
    };
    let target = match (&a.target, &points) {
        (TargetFlag::Ambient, _) => RatioTarget::AmbientBall,
        (_, Some(pts)) => RatioTarget::Points(pts),
        (TargetFlag::Surface, None) => RatioTarget::Surface(need_surface(&scene)?),
        (TargetFlag::Auto, None) => match &scene.surface {
            Some(h) => RatioTarget::Surface(h),
            None => RatioTarget::AmbientBall,
        },
        (TargetFlag::Points, None) => unreachable!("resolved above"),
    };
    let rep = focknum::sampling_ratio_bounds(
        target,
        &scene.weight,
        a.window_radius,
        a.degree,
        budget,
        seed,
    )?;
    let mut csv = Report::csv(&header_cells(&[
        "window_radius",
        "degree",
        "lower",
        "upper",
        "gram_condition",
        "mass_leak",
    ]));
    csv.row(vec![
        f(rep.window_radius),
        rep.degree.to_string(),
        f(rep.lower),
        f(rep.upper),
        f(rep.conditioning),
        f(rep.mass_leak),
    ]);
    Ok(vec![csv.write(&a.common.out, "sampling_ratio.csv")?])
}

fn cmd_extend(a: &ExtendArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, seed, budget) = a.common.load()?;
    let h = need_surface(&scene)?;
    let alpha = parse_monomial(&a.monomial, scene.dimension)?;
    if !(a.lambda >= 0.0) {
        return Err(usage("lambda must be nonnegative"));
    }
    let origin = ComplexVector::from_vec(vec![Complex::new(0.0, 0.0); scene.dimension]);
    let sampling =
        hypersurface::sample_surface_in_ball(h, &origin, a.window_radius, budget, seed)?;
    let monomial_at = |z: &ComplexVector<f64>| -> Complex<f64> {
        alpha
            .iter()
            .enumerate()
            .map(|(i, &k)| z[i].powu(u32::from(k)))
            .product()
    };
    let data: Vec<_> = sampling
        .samples
        .iter()
        .map(|s| (s.clone(), monomial_at(&s.point)))
        .collect();
    let rep = focknum::min_norm_extension(h, &data, &scene.weight, a.degree, a.lambda)?;

    let mut coeffs = Report::csv(&header_cells(&["multi_index", "re", "im", "abs"]));
    for (idx, c) in &rep.coefficients {
        let tag = idx
            .iter()
            .map(u16::to_string)
            .collect::<Vec<_>>()
            .join(";");
        coeffs.row(vec![tag, f(c.re), f(c.im), f(c.norm())]);
    }
    let coeff_path = coeffs.write(&a.common.out, "extension_coefficients.csv")?;

    let mut summary = Report::csv(&header_cells(&[
        "ambient_norm_sq",
        "surface_norm_sq",
        "ratio",
        "residual",
    ]));
    summary.row(vec![
        f(rep.ambient_norm_sq),
        f(rep.surface_norm_sq),
        f(rep.ratio),
        f(rep.residual),
    ]);
    let sum_path = summary.write(&a.common.out, "extension_summary.csv")?;
    Ok(vec![coeff_path, sum_path])
}

fn cmd_jensen(a: &JensenArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, _, _) = a.common.load()?;
    if scene.dimension != 1 {
        return Err(usage("jensen needs a 1-D scene"));
    }
    let zeros = named_points(&scene, a.sequence.as_deref())?;
    let rep = focknum::jensen_ratio(zeros.points(), &scene.weight, a.radius)?;
    let mut csv = Report::csv(&header_cells(&["radius", "lhs", "rhs", "ratio", "error"]));
    // Both sides are closed-form sums; only rounding enters.
    let round_off = f64::EPSILON * (rep.lhs.abs() + rep.rhs.abs());
    csv.row(vec![f(rep.radius), f(rep.lhs), f(rep.rhs), f(rep.ratio), f(round_off)]);
    Ok(vec![csv.write(&a.common.out, "jensen.csv")?])
}

fn cmd_product_check(a: &ProductArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, _, _) = a.common.load()?;
    let ps = named_product(&scene, a.name.as_deref())?;
    let eps = a.eps.unwrap_or(scene.defaults.eps);
    let grid = real_grid(a.grid_extent, a.grid_step)?;
    let rep = match a.mode {
        ModeFlag::Interp => sequences::product_interp_check(ps, &scene.weight, a.r, eps, &grid)?,
        ModeFlag::Samp => sequences::product_samp_check(ps, &scene.weight, a.r, eps, &grid)?,
    };

    let mut header = point_header(2);
    header.extend(header_cells(&[
        "lhs",
        "rhs",
        "margin",
        "lhs_dbar",
        "rhs_dbar",
        "margin_dbar",
        "error",
    ]));
    let mut csv = Report::csv(&header);
    for m in &rep.margins {
        let mut cells = point_cells(&m.point);
        // Counts and closed forms: exact up to rounding.
        cells.extend([
            f(m.lhs),
            f(m.rhs),
            f(m.margin),
            f(m.lhs_dbar),
            f(m.rhs_dbar),
            f(m.margin_dbar),
            f(0.0),
        ]);
        csv.row(cells);
    }
    let margins_path = csv.write(&a.common.out, "product_margins.csv")?;

    let mode = match a.mode {
        ModeFlag::Interp => "interpolation",
        ModeFlag::Samp => "sampling",
    };
    let mut verdict = Report::text();
    verdict.line(&format!("criterion: {mode}"));
    verdict.line(&format!("verdict: {}", rep.verdict));
    verdict.line(&format!("min_margin: {}", f(rep.min_margin)));
    verdict.line(&format!("max_margin: {}", f(rep.max_margin)));
    for (j, d) in rep.lambda_densities.iter().enumerate() {
        verdict.line(&format!("lambda_{j}_density: {}", f(*d)));
    }
    verdict.line(&format!("note: {}", rep.caveat));
    let verdict_path = verdict.write(&a.common.out, "product_verdict.txt")?;
    Ok(vec![margins_path, verdict_path])
}

fn cmd_seq_density(a: &SeqDensityArgs) -> Result<Vec<PathBuf>, CliError> {
    let (scene, _, _) = a.common.load()?;
    let s = named_points(&scene, a.sequence.as_deref())?;
    let center = parse_center(&a.center, scene.dimension)?;
    let density = match scene.dimension {
        1 => sequences::density_1d(s, &scene.weight, center[0], a.radius)?,
        2 => sequences::gamma_cross_c_density(s, &scene.weight, &center, a.radius)?,
        n => return Err(usage(format!("seq-density needs dimension 1 or 2, scene has {n}"))),
    };
    let mut header = point_header(scene.dimension);
    header.extend(header_cells(&["radius", "density", "error"]));
    let mut csv = Report::csv(&header);
    let mut cells = point_cells(&center);
    cells.extend([f(a.radius), f(density), f(0.0)]);
    csv.row(cells);
    Ok(vec![csv.write(&a.common.out, "seq_density.csv")?])
}

fn init_threads() {
    if let Ok(v) = std::env::var("FOCKDENS_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k >= 1 {
                // Ignore "already initialized": tests share a process pool.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn execute(cmd: &Command) -> Result<Vec<PathBuf>, CliError> {
    match cmd {
        Command::Density(a) => cmd_density(a),
        Command::DensityScan(a) => cmd_density_scan(a),
        Command::Singularity(a) => cmd_singularity(a),
        Command::Flatness(a) => cmd_flatness(a),
        Command::SamplingRatio(a) => cmd_sampling_ratio(a),
        Command::Extend(a) => cmd_extend(a),
        Command::Jensen(a) => cmd_jensen(a),
        Command::ProductCheck(a) => cmd_product_check(a),
        Command::SeqDensity(a) => cmd_seq_density(a),
    }
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print with code 0; usage errors with 2.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads();
    match execute(&cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}
