//! Machine checks of the identities and bounds, grouped into suites.
//!
//! Every check draws its random inputs from a generator seeded by the suite
//! seed and its own name, so checks are reproducible one by one. Reported
//! residuals are maxima over sample grids, which do not depend on the order
//! of parallel evaluation.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{
    compatibility_residual, cont_proy, cont_trivia, hom_add_residual, hom_bullet_residual, hom_star_residual,
    project, project_trivialize_residual, retrivialize_residual, rotation_identity_residual, section_bound, trivialize,
    untrivialize_roundtrip_residual, BundlePoint, StarRule,
};
use crate::cauchy::{cauchy_deriv, cauchy_eval, Polydisc};
use crate::error::{Error, Result};
use crate::io::{load, PointFile};
use crate::quat::{frame_rotate, transition, Frame, Quaternion, UnitImaginary, UnitQuaternion};
use crate::random::{
    multi_indices_total, random_frame, random_in_disc, random_quad, random_quaternion, random_series,
    random_unit_imaginary, random_unit_quaternion,
};
use crate::series::{
    eval_slice, multi_derivative, star_inverse, star_inverse_via_symmetrization, star_product, EvalPoint, MultiSeries,
};
use crate::several::{
    gamma_square_residual, gamma_swap_extension, p_ell, q_after_p_roundtrip, Domain, Extension, HarmonicQuadruple,
    QuadField, SampleGrid, SlotFunction,
};
use crate::slice::{assemble_components, representation_formula, split_components, SliceValuePair};

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(check: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        Check { check: check.into(), max_residual, tolerance, pass: max_residual <= tolerance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Quaternions, frames and the one-slice component maps.
    Core,
    /// Power series: evaluation, products, inversion.
    Series,
    /// Extension and restriction of quadruples, the example, `Γ`.
    Several,
    /// Cauchy quadrature and its derivative extension.
    Cauchy,
    /// Bundle maps, continuity bounds and homomorphisms.
    Bundle,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "core" => Suite::Core,
            "series" => Suite::Series,
            "several" => Suite::Several,
            "cauchy" => Suite::Cauchy,
            "bundle" => Suite::Bundle,
            "all" => Suite::All,
            other => return Err(Error::Schema(format!("unknown suite {other:?}"))),
        })
    }
}

/// Input files shared by the regression checks.
#[derive(Debug, Clone)]
pub struct Fixtures {
    /// `F + G j` of the worked example: `F = z1 z2 + z2²`, `G = z1² − 3 z2`.
    pub example_series: MultiSeries,
    /// The same data as a quadruple on discs of radius 2.
    pub example_quad: HarmonicQuadruple,
    pub frame: Frame,
    /// `q = e1`, `z2 = 1`.
    pub point: PointFile,
    /// `q e2`.
    pub a: MultiSeries,
    /// `q e1`.
    pub b: MultiSeries,
}

impl Fixtures {
    pub fn builtin() -> Self {
        let fr = Frame::STANDARD;
        let one = fr.i().embed(Complex64::new(1.0, 0.0));
        let f = MultiSeries::from_terms(2, 2, vec![0.0; 2], [(vec![1, 1], one), (vec![0, 2], one)]).expect("valid");
        let g = MultiSeries::from_terms(2, 2, vec![0.0; 2], [(vec![2, 0], one), (vec![0, 1], one * -3.0)]).expect("valid");
        let domain = Domain::new(vec![0.0; 2], vec![2.0; 2]).expect("valid");
        let example_quad = HarmonicQuadruple::with_domain(f, g, fr, domain).expect("valid");
        let mono = |u: Quaternion| MultiSeries::from_terms(1, 1, vec![0.0], [(vec![1], u)]).expect("valid");
        Fixtures {
            example_series: example_quad.as_series(),
            example_quad,
            frame: fr,
            point: PointFile { q: Some(Quaternion::E1), z: vec![[1.0, 0.0]] },
            a: mono(Quaternion::E2),
            b: mono(Quaternion::E1),
        }
    }

    /// Reads `example_series.json`, `example_quad.json`, `frame.json`,
    /// `point.json`, `a.json` and `b.json` from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(Fixtures {
            example_series: load(&dir.join("example_series.json"))?,
            example_quad: load(&dir.join("example_quad.json"))?,
            frame: load(&dir.join("frame.json"))?,
            point: load(&dir.join("point.json"))?,
            a: load(&dir.join("a.json"))?,
            b: load(&dir.join("b.json"))?,
        })
    }
}

fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a of the check name keeps the streams of different checks apart.
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v > m || v.is_nan() { v } else { m })
}

/// Runs one suite, or all of them in order.
pub fn run_suite(suite: Suite, seed: u64, fx: &Fixtures) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Core {
        out.extend(quaternion_laws(seed));
        out.extend(component_maps(seed));
    }
    if all || suite == Suite::Series {
        out.extend(series_fixtures(fx)?);
        out.extend(representation_formula_consistency(seed)?);
        out.extend(star_inverse_checks(seed)?);
    }
    if all || suite == Suite::Several {
        out.extend(extension_restriction(seed)?);
        out.extend(example_regression(fx)?);
        out.extend(gamma_isomorphism(seed)?);
    }
    if all || suite == Suite::Cauchy {
        out.extend(cauchy_formula(seed)?);
        out.extend(cauchy_derivatives(seed)?);
    }
    if all || suite == Suite::Bundle {
        out.extend(bundle_axioms(seed)?);
        out.extend(continuity_bounds(seed)?);
        out.extend(homomorphisms(seed)?);
    }
    Ok(out)
}

// ── Core ─────────────────────────────────────────────────────────────

pub fn quaternion_laws(seed: u64) -> Vec<Check> {
    let mut rng = rng_for(seed, "quaternion_laws");
    let (mut assoc, mut frames, mut compose, mut iso) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (a, b, c) = (random_quaternion(&mut rng, 2.0), random_quaternion(&mut rng, 2.0), random_quaternion(&mut rng, 2.0));
        let scale = 1.0 + a.norm() * b.norm() * c.norm();
        assoc = assoc.max(((a * b) * c).max_abs_diff(&(a * (b * c))) / scale);
        let (u, v) = (random_unit_quaternion(&mut rng), random_unit_quaternion(&mut rng));
        let (fr, fr2) = (random_frame(&mut rng), random_frame(&mut rng));
        let r = frame_rotate(&u, &fr);
        let (inner, det) = r.check();
        frames = frames.max(inner.abs()).max((det - 1.0).abs());
        compose = compose.max(frame_rotate(&u, &frame_rotate(&v, &fr)).r6_distance(&frame_rotate(&u.compose(&v), &fr)));
        iso = iso.max((frame_rotate(&u, &fr).r6_distance(&frame_rotate(&u, &fr2)) - fr.r6_distance(&fr2)).abs());
    }
    let mut cocycle = 0.0f64;
    for _ in 0..100 {
        let (u, v, w) = (random_unit_quaternion(&mut rng), random_unit_quaternion(&mut rng), random_unit_quaternion(&mut rng));
        let fr = random_frame(&mut rng);
        cocycle = cocycle
            .max(transition(&u, &u, &fr).r6_distance(&fr))
            .max(transition(&v, &w, &transition(&u, &v, &fr)).r6_distance(&transition(&u, &w, &fr)));
    }
    vec![
        Check::new("core.associativity (relative)", assoc, 1e-13),
        Check::new("core.rotated_frames_valid", frames, 1e-11),
        Check::new("core.rotation_composition", compose, 1e-12),
        Check::new("core.rotation_isometry", iso, 1e-12),
        Check::new("core.transition_cocycle", cocycle, 1e-12),
    ]
}

pub fn component_maps(seed: u64) -> Vec<Check> {
    let mut rng = rng_for(seed, "component_maps");
    let mut round = 0.0f64;
    for _ in 0..1000 {
        let fr = random_frame(&mut rng);
        let v = random_quaternion(&mut rng, 5.0);
        round = round.max(assemble_components(split_components(v, &fr), &fr).max_abs_diff(&v));
        let d = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let back = split_components(assemble_components(d, &fr), &fr);
        round = round.max(max_of((0..4).map(|k| (back[k] - d[k]).abs())));
    }
    vec![Check::new("core.split_assemble_roundtrip", round, 1e-13)]
}

// ── Series ───────────────────────────────────────────────────────────

pub fn series_fixtures(fx: &Fixtures) -> Result<Vec<Check>> {
    let p = fx.point.eval_point(0, fx.frame.i())?;
    let v = eval_slice(&fx.example_series, &p)?;
    let eval = v.max_abs_diff(&Quaternion::new(1.0, 1.0, -4.0, 0.0));
    let ab = star_product(&fx.a, &fx.b)?;
    let star = ab.coeff(&[2]).max_abs_diff(&Quaternion::new(0.0, 0.0, 0.0, -1.0));
    Ok(vec![
        Check::new("series.example_eval_at_e1", eval, 1e-15),
        Check::new("series.star_product_fixture", star, 1e-15),
    ])
}

/// Reconstruction from the two slice values against direct evaluation.
pub fn representation_formula_consistency(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "representation_formula");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3);
        let f = random_series(&mut rng, n, 4, 1.0);
        let slot = rng.gen_range(0..n);
        let axis = random_unit_imaginary(&mut rng);
        let target = random_unit_imaginary(&mut rng);
        let (x, y) = random_in_disc(&mut rng, 0.0, 0.9);
        let zs: Vec<Complex64> = (1..n)
            .map(|_| {
                let (a, b) = random_in_disc(&mut rng, 0.0, 0.9);
                Complex64::new(a, b)
            })
            .collect();
        let at = |q: Quaternion| eval_slice(&f, &EvalPoint::new(slot, q, zs.clone(), axis));
        let sv = SliceValuePair {
            f_plus: at(axis.embed(Complex64::new(x, y)))?,
            f_minus: at(axis.embed(Complex64::new(x, -y)))?,
            frame_axis: axis,
        };
        let direct = at(target.embed(Complex64::new(x, y)))?;
        worst = worst.max(representation_formula(&sv, target).max_abs_diff(&direct));
    }
    Ok(vec![Check::new("series.representation_formula", worst, 1e-12)])
}

pub fn star_inverse_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "star_inverse");
    let (mut unit, mut routes) = (0.0f64, 0.0f64);
    let one = MultiSeries::constant(1, Quaternion::ONE);
    for _ in 0..50 {
        let mut f = random_series(&mut rng, 1, 4, 0.5);
        let u0 = f.coeff(&[0]);
        f.set_term(vec![0], u0 + Quaternion::real(if u0.w >= 0.0 { 0.5 } else { -0.5 }))?;
        let g = star_inverse(&f, 12)?;
        unit = unit.max(star_product(&f, &g)?.truncate(12).max_coeff_diff(&one));
        routes = routes.max(g.max_coeff_diff(&star_inverse_via_symmetrization(&f, 12)?));
    }
    Ok(vec![
        Check::new("series.star_inverse_identity", unit, 1e-11),
        Check::new("series.star_inverse_routes_agree", routes, 1e-10),
    ])
}

// ── Several variables ────────────────────────────────────────────────

/// `Q∘P = id` and `P∘Q = id` on 20 random degree-4 quadruples per arity.
pub fn extension_restriction(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "extension_restriction");
    let mut out = Vec::new();
    for n in 1..=3 {
        let (mut qp, mut pq) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let fr = random_frame(&mut rng);
            let quad: Arc<dyn QuadField> = Arc::new(random_quad(&mut rng, n, 4, fr));
            let grid = SampleGrid::identity(quad.domain(), 8);
            for l in 0..n {
                let (a, b) = q_after_p_roundtrip(quad.clone(), &fr, l, &grid)?;
                qp = qp.max(a);
                pq = pq.max(b);
            }
        }
        out.push(Check::new(format!("several.q_after_p[n={n}]"), qp, 1e-10));
        out.push(Check::new(format!("several.p_after_q[n={n}]"), pq, 1e-10));
    }
    Ok(out)
}

/// The worked example's extensions in both slots, written out term by term.
pub fn example_expansion(slot: usize, x1: f64, y1: f64, x2: f64, y2: f64, iq: UnitImaginary, fr: &Frame) -> Quaternion {
    let (i, j, ij) = (fr.i().as_quaternion(), fr.j().as_quaternion(), fr.ij());
    let bracket = |a: f64, b: f64, c: f64, d: f64| Quaternion::real(a) + i * b + j * c + ij * d;
    let plain = bracket(
        x1 * x2 - y1 * y2 + x2 * x2 - y2 * y2,
        x1 * y2 + x2 * y1 + 2.0 * x2 * y2,
        x1 * x1 - y1 * y1 - 3.0 * x2,
        2.0 * x1 * y1 - 3.0 * y2,
    );
    let flipped = if slot == 0 {
        bracket(
            x1 * x2 + y1 * y2 + x2 * x2 - y2 * y2,
            x1 * y2 - x2 * y1 + 2.0 * x2 * y2,
            x1 * x1 - y1 * y1 - 3.0 * x2,
            -2.0 * x1 * y1 - 3.0 * y2,
        )
    } else {
        bracket(
            x1 * x2 + y1 * y2 + x2 * x2 - y2 * y2,
            -x1 * y2 + x2 * y1 - 2.0 * x2 * y2,
            x1 * x1 - y1 * y1 - 3.0 * x2,
            2.0 * x1 * y1 + 3.0 * y2,
        )
    };
    let ii = iq.as_quaternion() * i;
    (Quaternion::ONE + ii) * flipped * 0.5 + (Quaternion::ONE - ii) * plain * 0.5
}

pub fn example_regression(fx: &Fixtures) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let fr = fx.example_quad.frame();
    let r = 0.95 * fx.example_quad.domain().radii().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    for slot in 0..2 {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let (x1, y1) = random_in_disc(&mut rng, 0.0, r);
            let (x2, y2) = random_in_disc(&mut rng, 0.0, r);
            let iq = random_unit_imaginary(&mut rng);
            let (xs, ys) = if slot == 0 { (x1, y1.abs()) } else { (x2, y2.abs()) };
            let q = iq.embed(Complex64::new(xs, ys));
            let other = if slot == 0 { Complex64::new(x2, y2) } else { Complex64::new(x1, y1) };
            let v = p_ell(&fx.example_quad, &fr, slot, q, &[other])?;
            let (y1, y2) = if slot == 0 { (y1.abs(), y2) } else { (y1, y2.abs()) };
            worst = worst.max(v.max_abs_diff(&example_expansion(slot, x1, y1, x2, y2, iq, &fr)));
        }
        out.push(Check::new(format!("several.example_expansion[slot={}]", slot + 1), worst, 1e-12));
    }
    Ok(out)
}

/// `Γ²_{ℓ,m} ∘ Γ²_{ℓ,m} = id` and `𝒫_ℓ = Γ²_{m,ℓ} ∘ 𝒫_m`.
pub fn gamma_isomorphism(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "gamma");
    let (mut double, mut square) = (0.0f64, 0.0f64);
    for n in 2..=3 {
        for _ in 0..5 {
            let fr = random_frame(&mut rng);
            let quad = random_quad(&mut rng, n, 3, fr);
            let grid = SampleGrid::identity(quad.domain(), if n == 2 { 8 } else { 4 });
            let shared: Arc<dyn QuadField> = Arc::new(quad.clone());
            for l in 0..n {
                for m in 0..n {
                    let f = Extension::new(shared.clone(), fr, l)?;
                    let back = gamma_swap_extension(&gamma_swap_extension(&f, l, m)?, l, m)?;
                    let axis = random_unit_imaginary(&mut rng);
                    double = double.max(grid.par_max(|_, p| Ok(back.eval_at(p, axis)?.max_abs_diff(&f.eval_at(p, axis)?)))?);
                    square = square.max(gamma_square_residual(&quad, l, m, &grid)?);
                }
            }
        }
    }
    Ok(vec![
        Check::new("several.gamma_double_swap", double, 1e-11),
        Check::new("several.gamma_commuting_square", square, 1e-11),
    ])
}

// ── Cauchy ───────────────────────────────────────────────────────────

struct CauchyCase {
    f: MultiSeries,
    frame: Frame,
    targets: Vec<EvalPoint>,
}

/// Degree-6 polynomials in two variables with targets of modulus at most 0.6,
/// half of them off the frame slice.
fn cauchy_cases(seed: u64) -> Vec<CauchyCase> {
    let mut rng = rng_for(seed, "cauchy_cases");
    (0..10)
        .map(|_| {
            let frame = random_frame(&mut rng);
            let f = random_series(&mut rng, 2, 6, 1.0);
            let targets = (0..6)
                .map(|k| {
                    let slot = k % 2;
                    let axis = if k < 3 { frame.i() } else { random_unit_imaginary(&mut rng) };
                    // The first target of each kind sits on the 0.6 sphere.
                    let r = if k % 3 == 0 { 0.6 } else { 0.6 * rng.gen::<f64>().sqrt() };
                    let th = rng.gen_range(0.0..std::f64::consts::TAU);
                    let q = axis.embed(Complex64::from_polar(r, th));
                    let (a, b) = random_in_disc(&mut rng, 0.0, 0.6);
                    EvalPoint::new(slot, q, vec![Complex64::new(a, b)], frame.i())
                })
                .collect();
            CauchyCase { f, frame, targets }
        })
        .collect()
}

pub fn cauchy_formula(seed: u64) -> Result<Vec<Check>> {
    let (mut worst, mut spectral) = (0.0f64, 0.0f64);
    for case in cauchy_cases(seed) {
        let pd = Polydisc::centered(2, 1.0, case.frame.i())?;
        for t in &case.targets {
            let exact = eval_slice(&case.f, t)?;
            let err = |m: usize| -> Result<f64> { Ok(cauchy_eval(&case.f, &pd, t.slot, &case.frame, t, m)?.max_abs_diff(&exact)) };
            worst = worst.max(err(64)?);
            let (e16, e32) = (err(16)?, err(32)?);
            // Below the rounding floor the ratio carries no information.
            if e32 > 1e-13 {
                spectral = spectral.max(e32 / e16);
            }
        }
    }
    Ok(vec![
        Check::new("cauchy.formula[m=64]", worst, 1e-10),
        Check::new("cauchy.error_ratio[m=32/m=16]", spectral, 1e-3),
    ])
}

/// Derivative quadrature at the default 64 nodes and at 128 nodes. The
/// aliasing error of the trapezoid rule for `∂³` at radius ratio 0.6 is of
/// order `α! m³ 0.6^m`, about `1e-8` at 64 nodes.
pub fn cauchy_derivatives(seed: u64) -> Result<Vec<Check>> {
    let (mut w64, mut w128) = (0.0f64, 0.0f64);
    let alphas: Vec<Vec<u32>> = (0..=3).flat_map(|d| multi_indices_total(2, d).into_iter().filter(move |a| a.iter().sum::<u32>() == d)).collect();
    for case in cauchy_cases(seed) {
        let pd = Polydisc::centered(2, 1.0, case.frame.i())?;
        for alpha in &alphas {
            let d = multi_derivative(&case.f, alpha)?;
            for t in case.targets.iter().step_by(2) {
                let exact = eval_slice(&d, t)?;
                let err = |m: usize| -> Result<f64> { Ok(cauchy_deriv(&case.f, &pd, t.slot, &case.frame, t, alpha, m)?.max_abs_diff(&exact)) };
                w64 = w64.max(err(64)?);
                w128 = w128.max(err(128)?);
            }
        }
    }
    Ok(vec![
        Check::new("cauchy.derivatives[|alpha|<=3, m=64]", w64, 1e-9),
        Check::new("cauchy.derivatives[|alpha|<=3, m=128]", w128, 1e-9),
    ])
}

// ── Bundle ───────────────────────────────────────────────────────────

fn random_base(rng: &mut ChaCha8Rng, n: usize, deg: u32) -> (Arc<dyn SlotFunction>, usize) {
    let fr = random_frame(rng);
    let quad = random_quad(rng, n, deg, fr);
    let l = rng.gen_range(0..n);
    (Arc::new(Extension::new(Arc::new(quad), fr, l).expect("slot in range")), l)
}

/// 100 random draws for each bundle identity.
pub fn bundle_axioms(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "bundle_axioms");
    let (mut proj, mut inv, mut reinv, mut compat, mut cocycle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let grids = [SampleGrid::identity(&Domain::unit_balls(1), 8), SampleGrid::identity(&Domain::unit_balls(2), 8)];
    for k in 0..100 {
        let n = 1 + k % 2;
        let grid = &grids[n - 1];
        let (f, l) = random_base(&mut rng, n, 3);
        let fr = random_frame(&mut rng);
        let (u, v, w) = (random_unit_quaternion(&mut rng), random_unit_quaternion(&mut rng), random_unit_quaternion(&mut rng));
        proj = proj.max(project_trivialize_residual(&u, &f, &fr, grid)?);
        inv = inv.max(untrivialize_roundtrip_residual(&u, &f, &fr, grid, false)?);
        let bp = trivialize(&v, f.clone(), &fr);
        reinv = reinv.max(retrivialize_residual(&u, &bp, l, grid)?);
        compat = compat.max(compatibility_residual(&u, &v, &f, &fr, grid)?);
        cocycle = cocycle
            .max(transition(&u, &u, &fr).r6_distance(&fr))
            .max(transition(&v, &w, &transition(&u, &v, &fr)).r6_distance(&transition(&u, &w, &fr)));
    }
    Ok(vec![
        Check::new("bundle.project_after_trivialize", proj, 1e-11),
        Check::new("bundle.untrivialize_after_trivialize", inv, 1e-11),
        Check::new("bundle.trivialize_after_untrivialize", reinv, 1e-11),
        Check::new("bundle.trivialization_compatibility", compat, 1e-11),
        Check::new("bundle.transition_cocycle", cocycle, 1e-11),
    ])
}

/// Largest `lhs / rhs` over 50 random pairs for each bound; at most 1 means
/// no violation.
pub fn continuity_bounds(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "continuity_bounds");
    let (mut proy, mut trivia, mut sect) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..50 {
        let n = 1 + k % 2;
        let domain = Domain::unit_balls(n);
        let grid = SampleGrid::default_sup(&domain);
        let l = rng.gen_range(0..n);
        let (fa, fb) = (random_frame(&mut rng), random_frame(&mut rng));
        let a = BundlePoint::from_quad(random_quad(&mut rng, n, 3, fa));
        let b = BundlePoint::from_quad(random_quad(&mut rng, n, 3, fb));
        let bound = cont_proy(&a, &b, l, &grid)?;
        proy = proy.max(bound.lhs / bound.rhs);

        let f: Arc<dyn SlotFunction> = Arc::new(project(&a, l)?);
        let g: Arc<dyn SlotFunction> = Arc::new(project(&b, l)?);
        let u = random_unit_quaternion(&mut rng);
        let bound = cont_trivia(&u, &f, &fa, &g, &fb, &grid)?;
        trivia = trivia.max(bound.lhs / bound.rhs);

        let fr = random_frame(&mut rng);
        let bound = section_bound(&f, &g, &fr, &grid)?;
        sect = sect.max(bound.lhs / bound.rhs);
    }
    Ok(vec![
        Check::new("bundle.cont_proy (lhs/rhs)", proy, 1.0),
        Check::new("bundle.cont_trivia (lhs/rhs)", trivia, 1.0),
        Check::new("bundle.section_bound (lhs/rhs)", sect, 1.0),
    ])
}

/// `𝒫_ℓ` against `+`, `•`, `∗` and `ℛ_u` on 20 random pairs.
pub fn homomorphisms(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, "homomorphisms");
    let (mut add, mut bullet, mut star, mut rot) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let grid = SampleGrid::identity(&Domain::unit_balls(2), 8);
    for _ in 0..20 {
        let fr = random_frame(&mut rng);
        let a = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
        let b = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
        let u: UnitQuaternion = random_unit_quaternion(&mut rng);
        for l in 0..2 {
            add = add.max(hom_add_residual(&a, &b, l, &grid)?);
            bullet = bullet.max(hom_bullet_residual(&a, &b, l, &grid)?);
            star = star.max(hom_star_residual(&a, &b, l, StarRule::Corrected, &grid)?);
            rot = rot.max(rotation_identity_residual(&u, &a, l, &grid)?);
        }
    }
    Ok(vec![
        Check::new("bundle.project_respects_sum", add, 1e-10),
        Check::new("bundle.project_respects_bullet", bullet, 1e-10),
        Check::new("bundle.project_respects_star", star, 1e-10),
        Check::new("bundle.rotation_identity", rot, 1e-10),
    ])
}
