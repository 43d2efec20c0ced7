//! The `surfinv` command line.
//!
//! Every command prints a JSON report on stdout and writes its files into the
//! output directory (`--out-dir`, else `$SURFINV_OUT_DIR`, else the working
//! directory).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bonnet::{path_consistency_diagnostic, reconstruct, FrameState, ReconstructOptions, Verification};
use crate::canonical::{verify_canonical, CanonicalConfig, InvariantGrid, InvariantMode};
use crate::catalog::{CatalogEntry, Profile};
use crate::compatibility::{
    codazzi_residual_general, codazzi_residual_principal, compatibility_floor, gauss_residual_canonical,
    gauss_residual_canonical_kh, gauss_residual_general, gauss_residual_principal, FloorTest, ReportSummary,
};
use crate::error::Error;
use crate::io::{read_invariant_grid, to_json, write_invariant_grid, write_obj};
use crate::numerics::{BaseIndex, GridSpec, ScalarGrid};
use crate::pipeline::{analyze_surface, canonicalize, observed_orders, round_trip, RoundTripErrors};
use crate::shape::geodesic_curvatures_of_parametric_lines;
use crate::special::{
    cmc_residual, flat_characterization, minimal_natural_residual, weingarten_residual, FlatSummary, WeingartenData,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UMBILIC: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_INCOMPATIBLE: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

pub const OUT_DIR_ENV: &str = "SURFINV_OUT_DIR";

/// Inclusive parameter range `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(format!("expected min:max:count, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}` in `{s}`"));
        let (min, max) = (num(min)?, num(max)?);
        let count: usize = count.trim().parse().map_err(|_| format!("bad count in `{s}`"))?;
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(format!("range `{s}` needs finite min < max"));
        }
        if count < 3 {
            return Err(format!("range `{s}` needs at least 3 samples"));
        }
        Ok(Self { min, max, count })
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad value in `{s}`"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_index(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected i,j, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad index `{x}`"));
    Ok((p(i)?, p(j)?))
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "surfinv", version, about = "Surface invariants, canonical principal parameters and reconstruction")]
pub struct Cli {
    /// Directory for written files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Catalog surface name.
    #[arg(long)]
    pub surface: String,
    /// Surface parameter, repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// `u` range `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<GridRange>,
    /// `v` range `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<GridRange>,
    /// CSV profile with columns s,r,z for `revolution`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CanonicalArgs {
    /// Base node `i,j`; the centre node by default.
    #[arg(long, value_parser = parse_index)]
    pub base_index: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub ubar0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub vbar0: f64,
    /// Largest accepted spread of the map integrands.
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub codazzi_tol: f64,
    /// Relative umbilic tolerance.
    #[arg(long, default_value_t = crate::shape::UMBILIC_TOL, value_parser = positive)]
    pub umbilic_tol: f64,
}

impl CanonicalArgs {
    fn config(&self) -> CanonicalConfig {
        CanonicalConfig {
            ubar0: self.ubar0,
            vbar0: self.vbar0,
            codazzi_tol: self.codazzi_tol,
            umbilic_tol: self.umbilic_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialKind {
    Minimal,
    Cmc,
    Flat,
    Weingarten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Nu,
    Kh,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forms, curvatures and compatibility residuals of a catalog chart.
    Analyze {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = crate::shape::UMBILIC_TOL, value_parser = positive)]
        umbilic_tol: f64,
    },
    /// Carry a catalog chart over to canonical principal parameters.
    Canonicalize {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        canonical: CanonicalArgs,
        /// Invariants to write in the output file.
        #[arg(long, value_enum, default_value_t = ModeArg::Nu)]
        mode: ModeArg,
        /// Output invariant grid; `<surface>_canonical.json` by default.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compatibility residuals of an invariant grid.
    Check {
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the surface of an invariant grid.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        /// Output OBJ; `mesh.obj` by default.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write vertex normals.
        #[arg(long)]
        normals: bool,
        /// Refuse invariants that fail the refinement test.
        #[arg(long)]
        strict: bool,
    },
    /// Analyze, canonicalize, reconstruct and align, optionally on refined grids.
    Roundtrip {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        canonical: CanonicalArgs,
        /// Number of grid halvings after the first run.
        #[arg(long, default_value_t = 0)]
        refine: u32,
        #[arg(long)]
        strict: bool,
    },
    /// Residuals for minimal, CMC, flat and Weingarten surfaces.
    Special {
        #[arg(long, value_enum)]
        kind: SpecialKind,
        #[arg(long)]
        input: PathBuf,
        /// Weingarten relation `minimal` (f = t, g = -t) or `offset=c` (f = t + c, g = t - c).
        #[arg(long, default_value = "minimal")]
        relation: String,
    },
}

/// Failure of a command with the exit code to report.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Umbilic { .. } => EXIT_UMBILIC,
            Error::IncompatibleInvariants { .. } => EXIT_INCOMPATIBLE,
            Error::UnknownSurface(_) => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn default_range(entry: &CatalogEntry) -> ((f64, f64), (f64, f64)) {
    use std::f64::consts::PI;
    match entry.name() {
        "sphere" => ((-1.0, 1.0), (0.0, 3.0)),
        "cylinder" => ((0.0, PI), (0.0, 2.0)),
        "cone" => ((0.0, PI), (0.5, 2.0)),
        "torus" => ((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        "catenoid" => ((-1.0, 1.0), (0.0, PI)),
        "monge" => ((-0.5, 0.5), (-0.5, 0.5)),
        "revolution" => (entry.domain().u, (0.0, 2.0 * PI)),
        _ => ((-1.0, 1.0), (-1.0, 1.0)),
    }
}

fn surface_and_grid(args: &SurfaceArgs) -> CliResult<(CatalogEntry, GridSpec)> {
    let profile = match &args.profile {
        Some(p) => Some(Profile::from_csv(p)?),
        None => None,
    };
    let entry = CatalogEntry::from_name(&args.surface, &args.params, profile).map_err(|e| match e {
        Error::UnknownSurface(_) | Error::Invalid(_) => CliError::usage(e.to_string()),
        other => other.into(),
    })?;
    let (du, dv) = default_range(&entry);
    let u = args.u.unwrap_or(GridRange { min: du.0, max: du.1, count: 65 });
    let v = args.v.unwrap_or(GridRange { min: dv.0, max: dv.1, count: 65 });
    let spec = GridSpec::from_ranges((u.min, u.max, u.count), (v.min, v.max, v.count))?;
    Ok((entry, spec))
}

fn base_index(arg: Option<(usize, usize)>, spec: &GridSpec) -> CliResult<Option<BaseIndex>> {
    match arg {
        Some((i, j)) => Ok(Some(BaseIndex::new(i, j, spec)?)),
        None => Ok(None),
    }
}

#[derive(Debug, Serialize)]
struct GridSummary {
    nodes: [usize; 2],
    origin: [f64; 2],
    spacing: [f64; 2],
}

impl From<GridSpec> for GridSummary {
    fn from(s: GridSpec) -> Self {
        Self { nodes: [s.nu, s.nv], origin: [s.u0, s.v0], spacing: [s.du, s.dv] }
    }
}

#[derive(Debug, Serialize)]
struct UmbilicSummary {
    count: usize,
    worst: [usize; 2],
    worst_gap: f64,
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    command: &'static str,
    surface: String,
    params: BTreeMap<String, f64>,
    grid: GridSummary,
    principal: bool,
    max_gauss_identity: f64,
    max_mean_identity: f64,
    max_abs_k: f64,
    max_abs_h: f64,
    umbilics: UmbilicSummary,
    geodesic_max_abs: Option<[f64; 2]>,
    residuals: Vec<ReportSummary>,
    invariants_file: Option<String>,
}

#[derive(Debug, Serialize)]
struct CanonicalizeReport {
    command: &'static str,
    surface: String,
    base_index: [usize; 2],
    ubar0: f64,
    vbar0: f64,
    a: f64,
    b: f64,
    mode: InvariantMode,
    u_variation: f64,
    v_variation: f64,
    ubar_range: [f64; 2],
    vbar_range: [f64; 2],
    grid: GridSummary,
    residuals: Vec<ReportSummary>,
    output: String,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    command: &'static str,
    mode: InvariantMode,
    grid: GridSummary,
    residuals: Vec<ReportSummary>,
    floor: Option<FloorTest>,
    path_consistency: f64,
    compatible: bool,
}

#[derive(Debug, Serialize)]
struct ReconstructReport {
    command: &'static str,
    grid: GridSummary,
    floor: Option<FloorTest>,
    verification: Verification,
    warnings: Vec<String>,
    output: String,
}

#[derive(Debug, Serialize)]
struct RoundTripReport {
    command: &'static str,
    surface: String,
    levels: Vec<RoundTripErrors>,
    gauss_orders: Vec<f64>,
    alignment_orders: Vec<f64>,
    curvature_orders: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SpecialReport {
    command: &'static str,
    kind: &'static str,
    residual: ReportSummary,
    flat: Option<FlatSummary>,
}

struct Context<'a> {
    out_dir: PathBuf,
    stdout: &'a mut dyn Write,
}

impl Context<'_> {
    fn path(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.out_dir.join(name)
        }
    }

    fn emit<T: Serialize>(&mut self, report: &T, file: &str) -> CliResult<()> {
        let text = to_json(report)?;
        std::fs::write(self.out_dir.join(file), &text).map_err(Error::from)?;
        self.stdout.write_all(text.as_bytes()).map_err(Error::from)?;
        Ok(())
    }
}

fn max_abs_diff(a: &ScalarGrid, b: &ScalarGrid) -> f64 {
    a.max_abs_diff(b)
}

fn cmd_analyze(ctx: &mut Context, surface: &SurfaceArgs, umbilic_tol: f64) -> CliResult<i32> {
    let (entry, spec) = surface_and_grid(surface)?;
    let analysis = analyze_surface(&entry, &spec)?;
    let (nu1, nu2) = (analysis.nu1(), analysis.nu2());
    let (k, h) = (analysis.gauss(), analysis.mean());
    let product = nu1.zip_map(&nu2, |a, b| a * b)?;
    let sum = nu1.zip_map(&nu2, |a, b| a + b)?;
    let umbilics = analysis.umbilics(umbilic_tol)?;
    let forms = analysis.fields();
    let mut residuals = vec![gauss_residual_general(&forms)?.summary()];
    let (c1, c2) = codazzi_residual_general(&forms)?;
    residuals.push(c1.summary());
    residuals.push(c2.summary());
    let mut geodesic = None;
    let mut invariants_file = None;
    if analysis.principal {
        residuals.push(gauss_residual_principal(&forms)?.summary());
        let (g1, g2) = geodesic_curvatures_of_parametric_lines(&forms)?;
        geodesic = Some([g1.max_abs(), g2.max_abs()]);
        if umbilics.is_clear() {
            let (p1, p2) = codazzi_residual_principal(&nu1, &nu2, &forms.e, &forms.g)?;
            residuals.push(p1.summary());
            residuals.push(p2.summary());
            let base = spec.center();
            let inv = InvariantGrid::from_nu(
                nu1.clone(),
                nu2.clone(),
                *forms.e.at(base.i, base.j),
                *forms.g.at(base.i, base.j),
                base,
            )?;
            let name = format!("{}_nu.json", entry.name());
            write_invariant_grid(&ctx.out_dir.join(&name), &inv)?;
            invariants_file = Some(name);
        }
    }
    let report = AnalyzeReport {
        command: "analyze",
        surface: entry.name().to_string(),
        params: entry.params().clone(),
        grid: spec.into(),
        principal: analysis.principal,
        max_gauss_identity: max_abs_diff(&k, &product),
        max_mean_identity: max_abs_diff(&h.map(|x| 2.0 * x), &sum),
        max_abs_k: k.max_abs(),
        max_abs_h: h.max_abs(),
        umbilics: UmbilicSummary {
            count: umbilics.count,
            worst: [umbilics.worst.0, umbilics.worst.1],
            worst_gap: umbilics.worst_gap,
        },
        geodesic_max_abs: geodesic,
        residuals,
        invariants_file,
    };
    ctx.emit(&report, &format!("{}_analyze.json", entry.name()))?;
    Ok(if umbilics.is_clear() { EXIT_OK } else { EXIT_UMBILIC })
}

fn cmd_canonicalize(
    ctx: &mut Context,
    surface: &SurfaceArgs,
    canonical: &CanonicalArgs,
    mode: ModeArg,
    output: Option<&Path>,
) -> CliResult<i32> {
    let (entry, spec) = surface_and_grid(surface)?;
    let base = base_index(canonical.base_index, &spec)?;
    let c = canonicalize(&entry, &spec, base, &canonical.config())?;
    let (r1, r2) = verify_canonical(&c.invariants, &c.e, &c.g)?;
    let inv = match mode {
        ModeArg::Nu => c.invariants.clone(),
        ModeArg::Kh => c.invariants.to_kh_mode()?,
    };
    let name =
        output.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(format!("{}_canonical.json", entry.name())));
    let path = ctx.path(&name);
    write_invariant_grid(&path, &inv)?;
    let b = inv.base();
    let report = CanonicalizeReport {
        command: "canonicalize",
        surface: entry.name().to_string(),
        base_index: [b.i, b.j],
        ubar0: c.maps.ubar0,
        vbar0: c.maps.vbar0,
        a: inv.a(),
        b: inv.b(),
        mode: inv.mode(),
        u_variation: c.maps.u_variation,
        v_variation: c.maps.v_variation,
        ubar_range: c.maps.ubar.range().into(),
        vbar_range: c.maps.vbar.range().into(),
        grid: inv.spec().into(),
        residuals: vec![r1.summary(), r2.summary(), gauss_residual_canonical(&inv)?.summary()],
        output: name.display().to_string(),
    };
    ctx.emit(&report, &format!("{}_canonicalize.json", entry.name()))?;
    Ok(EXIT_OK)
}

fn floor_of(inv: &InvariantGrid) -> CliResult<Option<FloorTest>> {
    match inv.coarsened() {
        Ok(c) if c.spec().nu >= 3 && c.spec().nv >= 3 => Ok(Some(compatibility_floor(inv)?)),
        _ => Ok(None),
    }
}

fn cmd_check(ctx: &mut Context, input: &Path) -> CliResult<i32> {
    let inv = read_invariant_grid(input)?;
    let residuals = vec![gauss_residual_canonical(&inv)?.summary(), gauss_residual_canonical_kh(&inv)?.summary()];
    let floor = floor_of(&inv)?;
    let forms = crate::bonnet::coefficients_from_invariants(&inv)?;
    let path_consistency = path_consistency_diagnostic(&forms, &FrameState::default(), inv.base())?;
    let compatible = !floor.is_some_and(|f| f.incompatible);
    let report = CheckReport {
        command: "check",
        mode: inv.mode(),
        grid: inv.spec().into(),
        residuals,
        floor,
        path_consistency,
        compatible,
    };
    ctx.emit(&report, "check.json")?;
    Ok(if compatible { EXIT_OK } else { EXIT_INCOMPATIBLE })
}

fn cmd_reconstruct(
    ctx: &mut Context,
    input: &Path,
    output: Option<&Path>,
    normals: bool,
    strict: bool,
) -> CliResult<i32> {
    let inv = read_invariant_grid(input)?;
    let options = ReconstructOptions { strict, ..Default::default() };
    let rec = reconstruct(&inv, &options)?;
    let name = output.unwrap_or(Path::new("mesh.obj"));
    write_obj(&ctx.path(name), &rec.mesh, normals)?;
    let report = ReconstructReport {
        command: "reconstruct",
        grid: inv.spec().into(),
        floor: rec.floor,
        verification: rec.verification,
        warnings: rec.warnings,
        output: name.display().to_string(),
    };
    ctx.emit(&report, "reconstruct.json")?;
    Ok(EXIT_OK)
}

fn refined(spec: &GridSpec, level: u32) -> CliResult<GridSpec> {
    let f = 1usize << level;
    let nu = (spec.nu - 1) * f + 1;
    let nv = (spec.nv - 1) * f + 1;
    Ok(GridSpec::new(nu, nv, spec.u0, spec.v0, spec.du / f as f64, spec.dv / f as f64)?)
}

fn cmd_roundtrip(
    ctx: &mut Context,
    surface: &SurfaceArgs,
    canonical: &CanonicalArgs,
    refine: u32,
    strict: bool,
) -> CliResult<i32> {
    let (entry, spec) = surface_and_grid(surface)?;
    let options = ReconstructOptions { strict, ..Default::default() };
    let mut levels = Vec::new();
    for level in 0..=refine {
        let s = refined(&spec, level)?;
        // keep the base on the same parameter point across levels
        let base = match canonical.base_index {
            Some((i, j)) => Some(BaseIndex::new(i << level, j << level, &s)?),
            None => None,
        };
        let run = round_trip(&entry, &s, base, &canonical.config(), &options)?;
        levels.push(run.errors);
    }
    let col = |f: fn(&RoundTripErrors) -> f64| levels.iter().map(f).collect::<Vec<_>>();
    let report = RoundTripReport {
        command: "roundtrip",
        surface: entry.name().to_string(),
        gauss_orders: observed_orders(&col(|e| e.gauss)),
        alignment_orders: observed_orders(&col(|e| e.alignment_rms)),
        curvature_orders: observed_orders(&col(|e| e.curvature)),
        levels,
    };
    let text = to_json(&report)?;
    std::fs::write(ctx.out_dir.join(format!("{}_roundtrip.json", entry.name())), &text).map_err(Error::from)?;
    let mut table = String::from("nodes        gauss_residual  order  alignment_rms  order  curvature_err  order\n");
    for (k, e) in report.levels.iter().enumerate() {
        let order = |o: &[f64]| if k == 0 { "   -  ".to_string() } else { format!("{:6.3}", o[k - 1]) };
        table.push_str(&format!(
            "{:>4}x{:<4}  {:14.6e} {}  {:13.6e} {}  {:13.6e} {}\n",
            e.nodes[0],
            e.nodes[1],
            e.gauss,
            order(&report.gauss_orders),
            e.alignment_rms,
            order(&report.alignment_orders),
            e.curvature,
            order(&report.curvature_orders),
        ));
    }
    ctx.stdout.write_all(table.as_bytes()).map_err(Error::from)?;
    Ok(EXIT_OK)
}

/// `sqrt(H^2 - K)` at the base node, which turns the principal-curvature
/// constants into those of the `K, H` description.
fn kh_constants(inv: &InvariantGrid) -> CliResult<(f64, f64)> {
    let nu = inv.to_nu_mode()?;
    let b = nu.base();
    let d0 = 0.5 * (nu.field1().at(b.i, b.j) - nu.field2().at(b.i, b.j)).abs();
    Ok((nu.a() * d0, nu.b() * d0))
}

fn positive_branch(inv: &InvariantGrid) -> CliResult<ScalarGrid> {
    let (nu1, nu2) = inv.nu_fields()?;
    for f in [nu1, nu2] {
        if f.values.iter().all(|x| *x > 0.0) {
            return Ok(f);
        }
    }
    Err(Error::Positivity("neither principal curvature is positive everywhere".into()).into())
}

type Branch = Box<dyn Fn(f64) -> f64>;

fn weingarten_data(inv: &InvariantGrid, relation: &str) -> CliResult<WeingartenData> {
    let nu_inv = inv.to_nu_mode()?;
    let (a, b) = (nu_inv.a(), nu_inv.b());
    let base = nu_inv.base();
    let (field, f, g): (ScalarGrid, Branch, Branch) = if relation == "minimal" {
        // nu1 = nu, nu2 = -nu; flipping the normal makes nu positive
        let nu1 = nu_inv.field1();
        let sign = if *nu1.at(base.i, base.j) < 0.0 { -1.0 } else { 1.0 };
        (nu1.map(|x| sign * x), Box::new(|t| t), Box::new(|t| -t))
    } else if let Some(c) = relation.strip_prefix("offset=") {
        let c: f64 = c.parse().map_err(|_| CliError::usage(format!("bad offset in relation `{relation}`")))?;
        let (_, h) = nu_inv.kh_fields()?;
        (h, Box::new(move |t| t + c), Box::new(move |t| t - c))
    } else {
        return Err(CliError::usage(format!("unknown relation `{relation}`")));
    };
    let lo = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 1e-3 * (hi - lo).max(lo.abs().max(hi.abs())).max(1e-3);
    let nu0 = *field.at(base.i, base.j);
    Ok(WeingartenData::from_functions(f, g, (lo - pad, hi + pad, 401), field, 1.0 / b, 1.0 / a, nu0)?)
}

fn cmd_special(ctx: &mut Context, kind: SpecialKind, input: &Path, relation: &str) -> CliResult<i32> {
    let inv = read_invariant_grid(input)?;
    let (report, name, flat) = match kind {
        SpecialKind::Minimal => {
            let (a, b) = kh_constants(&inv)?;
            (minimal_natural_residual(&positive_branch(&inv)?, a, b)?, "minimal", None)
        }
        SpecialKind::Cmc => {
            let (k, h) = inv.kh_fields()?;
            let b = inv.base();
            let h0 = *h.at(b.i, b.j);
            let spread = h.values.iter().map(|x| (x - h0).abs()).fold(0.0, f64::max);
            if spread > 1e-10 * h0.abs().max(1.0) {
                return Err(Error::Invalid(format!("mean curvature is not constant (spread {spread:e})")).into());
            }
            let (a, bb) = kh_constants(&inv)?;
            (cmc_residual(&k, h0, a, bb)?, "cmc", None)
        }
        SpecialKind::Flat => {
            let (_, h) = inv.kh_fields()?;
            let fit = flat_characterization(&h)?;
            let summary = fit.summary();
            (fit.report, "flat", Some(summary))
        }
        SpecialKind::Weingarten => (weingarten_residual(&weingarten_data(&inv, relation)?)?, "weingarten", None),
    };
    let out = SpecialReport { command: "special", kind: name, residual: report.summary(), flat };
    ctx.emit(&out, &format!("special_{name}.json"))?;
    Ok(EXIT_OK)
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    let out_dir = resolve_out_dir(cli.out_dir);
    std::fs::create_dir_all(&out_dir).map_err(Error::from)?;
    let mut ctx = Context { out_dir, stdout };
    match &cli.command {
        Command::Analyze { surface, umbilic_tol } => cmd_analyze(&mut ctx, surface, *umbilic_tol),
        Command::Canonicalize { surface, canonical, mode, output } => {
            cmd_canonicalize(&mut ctx, surface, canonical, *mode, output.as_deref())
        }
        Command::Check { input } => cmd_check(&mut ctx, input),
        Command::Reconstruct { input, output, normals, strict } => {
            cmd_reconstruct(&mut ctx, input, output.as_deref(), *normals, *strict)
        }
        Command::Roundtrip { surface, canonical, refine, strict } => {
            cmd_roundtrip(&mut ctx, surface, canonical, *refine, *strict)
        }
        Command::Special { kind, input, relation } => cmd_special(&mut ctx, *kind, input, relation),
    }
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
