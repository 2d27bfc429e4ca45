//! Batch front end: every verb reads JSON files and prints one JSON document.
//!
//! Slots are numbered from 1 on the command line. Errors in the input exit
//! with status 2, a failed `verify` with status 1.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::bundle::{
    bp_add, bp_bullet, bp_rotate, bp_star_with, project, section_of, sup_norm, untrivialize, BundleFile, BundlePoint,
    StarRule,
};
use crate::cauchy::{cauchy_deriv, cauchy_eval, Polydisc};
use crate::error::{Error, Result};
use crate::io::{load, load_frame, load_series, save, to_json, PointFile};
use crate::quat::{frame_rotate, Frame, Quaternion, UnitImaginary, UnitQuaternion};
use crate::series::{
    bullet_product, eval_slice, multi_derivative, star_inverse, star_inverse_via_symmetrization, star_product,
    MultiSeries,
};
use crate::several::{SampleGrid, SlotFunction};
use crate::slice::split_components;
use crate::verify::{run_suite, Check, Fixtures, Suite};

/// Environment variable capping the worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "SLICEBUNDLE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "slicebundle", version, about = "Slice regular functions of several quaternionic variables")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Evaluate a series with the quaternion in one slot.
    Eval(EvalArgs),
    /// Star product of two series.
    Starmul(PairArgs),
    /// Bullet product of two series relative to a frame.
    Bulletmul(BulletArgs),
    /// Truncated star inverse of a one-variable series.
    Invert(InvertArgs),
    /// Project a bundle point to the base, as a series or at a point.
    Project(ProjectArgs),
    /// Real components of a value or of a bundle point at a grid point.
    Components(ComponentsArgs),
    /// Cauchy quadrature of a series or of its derivatives.
    Cauchy(CauchyArgs),
    /// Algebra, norms and trivializations of bundle points.
    Bundle(BundleArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    slot: usize,
    #[arg(long)]
    point: PathBuf,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    lhs: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    /// Also write the result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BulletArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long)]
    frame: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InvertRoute {
    /// Coefficient recursion on the series itself.
    Recursion,
    /// Inverse of the symmetrization times the conjugate.
    Symmetrization,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long)]
    degree: u32,
    #[arg(long, value_enum, default_value = "recursion")]
    route: InvertRoute,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    slot: usize,
    /// Evaluate at this point instead of printing the series.
    #[arg(long)]
    point: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ComponentsArgs {
    /// Split `w,x,y,z` in `--frame`.
    #[arg(long, value_parser = parse_quaternion, conflicts_with = "bundle")]
    value: Option<Quaternion>,
    #[arg(long, required_unless_present = "bundle")]
    frame: Option<PathBuf>,
    /// Components `(α, β, γ, δ)` of a bundle point at `--point`.
    #[arg(long, requires = "point")]
    bundle: Option<PathBuf>,
    #[arg(long)]
    point: Option<PathBuf>,
    /// Slot holding `q` when the point file has one.
    #[arg(long, default_value_t = 1)]
    slot: usize,
}

#[derive(Debug, Args)]
struct CauchyArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    slot: usize,
    /// Real centers `a1,…,an`, or complex ones `x1,y1,…,xn,yn`.
    #[arg(long, value_parser = parse_list)]
    center: Reals,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Multi-index of the derivative, e.g. `1,1`.
    #[arg(long, value_parser = parse_index)]
    deriv: Option<Index>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BundleOp {
    Add,
    Bullet,
    Star,
    Rotate,
    Norm,
    Trivialize,
    Untrivialize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Corrected,
    Printed,
}

#[derive(Debug, Args)]
struct BundleArgs {
    #[arg(long, value_enum)]
    op: BundleOp,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: Option<PathBuf>,
    /// Unit quaternion `w,x,y,z`.
    #[arg(long, value_parser = parse_quaternion)]
    u: Option<Quaternion>,
    /// Base slot for `trivialize` and `untrivialize`.
    #[arg(long, default_value_t = 1)]
    slot: usize,
    /// Target frame for `trivialize`; defaults to the point's own frame.
    #[arg(long)]
    frame: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "corrected")]
    rule: RuleArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = Suite::from_str)]
    suite: Suite,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory with the regression fixtures; built-in copies otherwise.
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Reals(Vec<f64>);

#[derive(Debug, Clone)]
struct Index(Vec<u32>);

fn split<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|t| t.trim().parse::<T>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

fn parse_list(s: &str) -> std::result::Result<Reals, String> {
    split(s).map(Reals)
}

fn parse_index(s: &str) -> std::result::Result<Index, String> {
    split(s).map(Index)
}

fn parse_quaternion(s: &str) -> std::result::Result<Quaternion, String> {
    match split::<f64>(s)?[..] {
        [w, x, y, z] => Ok(Quaternion::new(w, x, y, z)),
        _ => Err("expected four comma-separated numbers".into()),
    }
}

fn slot0(slot: usize, n: usize) -> Result<usize> {
    if slot == 0 || slot > n {
        return Err(Error::SlotOutOfRange { slot, n });
    }
    Ok(slot - 1)
}

fn unit(u: Option<Quaternion>) -> Result<UnitQuaternion> {
    UnitQuaternion::new(u.ok_or_else(|| Error::Schema("--u is required for this operation".into()))?)
}

/// What a verb prints, and whether it counts as success.
struct Outcome {
    json: String,
    ok: bool,
}

impl Outcome {
    fn of<T: Serialize>(v: &T) -> Self {
        Outcome { json: to_json(v), ok: true }
    }
}

#[derive(Serialize)]
struct Value {
    value: Quaternion,
}

#[derive(Serialize)]
struct Components {
    components: [f64; 4],
}

#[derive(Serialize)]
struct Projection {
    slot: usize,
    axis: UnitImaginary,
    series: MultiSeries,
}

#[derive(Serialize)]
struct Quadrature {
    value: Quaternion,
    series_value: Quaternion,
    abs_error: f64,
}

#[derive(Serialize)]
struct Norm {
    sup_norm: f64,
    grid_points: usize,
}

#[derive(Serialize)]
struct Untrivialized {
    frame: Frame,
    slot: usize,
    base: BundleFile,
}

#[derive(Serialize)]
struct Report {
    suite: String,
    seed: u64,
    checks: Vec<Check>,
    pass: bool,
}

/// A bundle point without series backing, tabulated on a sample grid.
#[derive(Serialize)]
struct SampledPoint {
    frame: Frame,
    points: Vec<Vec<[f64; 2]>>,
    components: Vec<[f64; 4]>,
}

fn emit_point(bp: &BundlePoint, out: Option<&Path>) -> Result<Outcome> {
    if bp.harmonic().is_some() {
        let file = BundleFile::from_point(bp)?;
        if let Some(path) = out {
            save(path, &file)?;
        }
        return Ok(Outcome::of(&file));
    }
    let grid = SampleGrid::identity(bp.domain(), 4);
    let sampled = SampledPoint {
        frame: bp.frame,
        points: grid.iter().map(|p| p.iter().map(|z| [z.re, z.im]).collect()).collect(),
        components: grid.iter().map(|p| bp.components(p)).collect(),
    };
    if let Some(path) = out {
        save(path, &sampled)?;
    }
    Ok(Outcome::of(&sampled))
}

fn emit_series(s: &MultiSeries, out: Option<&Path>) -> Result<Outcome> {
    if let Some(path) = out {
        save(path, s)?;
    }
    Ok(Outcome::of(s))
}

fn load_point(path: &Path) -> Result<BundlePoint> {
    load::<BundleFile>(path)?.into_point()
}

fn execute(verb: Verb) -> Result<Outcome> {
    match verb {
        Verb::Eval(a) => {
            let f = load_series(&a.series)?;
            let fr = load_frame(&a.frame)?;
            let l = slot0(a.slot, f.n())?;
            let p = load::<PointFile>(&a.point)?.eval_point(l, fr.i())?;
            Ok(Outcome::of(&Value { value: eval_slice(&f, &p)? }))
        }
        Verb::Starmul(a) => emit_series(&star_product(&load_series(&a.lhs)?, &load_series(&a.rhs)?)?, a.out.as_deref()),
        Verb::Bulletmul(a) => {
            let fr = load_frame(&a.frame)?;
            let r = bullet_product(&load_series(&a.pair.lhs)?, &load_series(&a.pair.rhs)?, &fr)?;
            emit_series(&r, a.pair.out.as_deref())
        }
        Verb::Invert(a) => {
            let f = load_series(&a.series)?;
            let g = match a.route {
                InvertRoute::Recursion => star_inverse(&f, a.degree)?,
                InvertRoute::Symmetrization => star_inverse_via_symmetrization(&f, a.degree)?,
            };
            emit_series(&g, a.out.as_deref())
        }
        Verb::Project(a) => {
            let bp = load_point(&a.bundle)?;
            let l = slot0(a.slot, bp.arity())?;
            let base = project(&bp, l)?;
            match a.point {
                Some(path) => {
                    let p = load::<PointFile>(&path)?.eval_point(l, bp.frame.i())?;
                    let value = base.eval(p.q, &p.zs)?;
                    Ok(Outcome::of(&Value { value }))
                }
                None => {
                    let h = bp.require_harmonic()?;
                    Ok(Outcome::of(&Projection { slot: a.slot, axis: bp.frame.i(), series: h.as_series() }))
                }
            }
        }
        Verb::Components(a) => {
            if let Some(path) = a.bundle {
                let bp = load_point(&path)?;
                let point_path = a.point.expect("clap enforces --point");
                let pf = load::<PointFile>(&point_path)?;
                let slot = if pf.q.is_some() { slot0(a.slot, bp.arity())? } else { 0 };
                let p = pf.grid_point(slot, bp.frame.i())?;
                bp.domain().check(&p)?;
                return Ok(Outcome::of(&Components { components: bp.components(&p) }));
            }
            let fr = load_frame(a.frame.as_deref().expect("clap enforces --frame"))?;
            let v = a.value.ok_or_else(|| Error::Schema("components needs --value or --bundle".into()))?;
            Ok(Outcome::of(&Components { components: split_components(v, &fr) }))
        }
        Verb::Cauchy(a) => {
            let f = load_series(&a.series)?;
            let fr = load_frame(&a.frame)?;
            let l = slot0(a.slot, f.n())?;
            let c = &a.center.0;
            let centers: Vec<Complex64> = if c.len() == f.n() {
                c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
            } else if c.len() == 2 * f.n() {
                c.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
            } else {
                return Err(Error::Schema(format!("--center needs {} or {} numbers", f.n(), 2 * f.n())));
            };
            let pd = Polydisc::new(centers, a.radius, fr.i())?;
            let t = load::<PointFile>(&a.target)?.eval_point(l, fr.i())?;
            let (value, exact) = match a.deriv.as_ref().map(|d| &d.0) {
                Some(alpha) => (cauchy_deriv(&f, &pd, l, &fr, &t, alpha, a.nodes)?, eval_slice(&multi_derivative(&f, alpha)?, &t)?),
                None => (cauchy_eval(&f, &pd, l, &fr, &t, a.nodes)?, eval_slice(&f, &t)?),
            };
            Ok(Outcome::of(&Quadrature { value, series_value: exact, abs_error: value.max_abs_diff(&exact) }))
        }
        Verb::Bundle(a) => bundle_op(a),
        Verb::Verify(a) => {
            let fx = match &a.fixtures {
                Some(dir) => Fixtures::load(dir)?,
                None => Fixtures::builtin(),
            };
            let checks = run_suite(a.suite, a.seed, &fx)?;
            let pass = checks.iter().all(|c| c.pass);
            let report = Report { suite: format!("{:?}", a.suite).to_lowercase(), seed: a.seed, checks, pass };
            Ok(Outcome { json: to_json(&report), ok: pass })
        }
    }
}

fn bundle_op(a: BundleArgs) -> Result<Outcome> {
    let x = load_point(&a.a)?;
    let second = || -> Result<BundlePoint> {
        load_point(a.b.as_deref().ok_or_else(|| Error::Schema("--b is required for this operation".into()))?)
    };
    let out = a.out.as_deref();
    match a.op {
        BundleOp::Add => emit_point(&bp_add(&x, &second()?)?, out),
        BundleOp::Bullet => emit_point(&bp_bullet(&x, &second()?)?, out),
        BundleOp::Star => {
            let rule = match a.rule {
                RuleArg::Corrected => StarRule::Corrected,
                RuleArg::Printed => StarRule::AsPrinted,
            };
            emit_point(&bp_star_with(&x, &second()?, rule)?, out)
        }
        BundleOp::Rotate => emit_point(&bp_rotate(&unit(a.u)?, &x), out),
        BundleOp::Norm => {
            let grid = SampleGrid::default_sup(x.domain());
            Ok(Outcome::of(&Norm { sup_norm: sup_norm(&x, &grid), grid_points: grid.len() }))
        }
        BundleOp::Trivialize => {
            let l = slot0(a.slot, x.arity())?;
            let fr = match &a.frame {
                Some(path) => load_frame(path)?,
                None => x.frame,
            };
            // `φ_u[f, fr]` is the section of `f` in `R_u(fr)`; `section_of`
            // keeps the series data when that frame is the point's own.
            let f = project(&x, l)?;
            emit_point(&section_of(&f, frame_rotate(&unit(a.u)?, &fr)), out)
        }
        BundleOp::Untrivialize => {
            let l = slot0(a.slot, x.arity())?;
            // The base function is the projection of the given point, so the
            // point itself is printed as its data.
            let (_, fr) = untrivialize(&unit(a.u)?, &x, l)?;
            Ok(Outcome::of(&Untrivialized { frame: fr, slot: a.slot, base: BundleFile::from_point(&x)? }))
        }
    }
}

fn init_threads() {
    let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

/// Parses `args` (program name first), runs the verb and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    init_threads();
    match execute(cli.verb) {
        Ok(o) => {
            let _ = writeln!(stdout, "{}", o.json);
            if o.ok {
                0
            } else {
                let _ = writeln!(stderr, "verification failed");
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
