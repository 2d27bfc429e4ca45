//! The fiber-bundle layer over quadruple data.
//!
//! A bundle point is a quadruple field `(α, β; γ, δ)` together with a frame
//! `(i, j)`. The projection `𝒫_ℓ` extends the quadruple into slot `ℓ`; a
//! section reads the four frame components of a base function back off the
//! frame slice; the trivialization `φ_u` is the section in the rotated frame.
//!
//! Equality of functions is agreement on a sample grid at a stated tolerance.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{frame_rotate, Frame, Quaternion, UnitImaginary, UnitQuaternion};
use crate::series::{eval_slice, join_cd, split_cd, star_product, EvalPoint, MultiSeries};
use crate::several::{
    component_sups, component_sups_diff, max_diff4, p_ell_at, probe_axes, sup_norm_diff, Domain, Extension,
    HarmonicQuadruple, QuadField, Restriction, SampleGrid, SlotFunction, ZeroField, MAX_ARITY,
};
use crate::slice::{representation_formula, split_components, SliceValuePair};

/// Frames closer than this in `ℝ⁶` count as the same frame.
pub const FRAME_EQ_TOL: f64 = 1e-12;
/// Tolerance of the pullback membership test.
pub const PULLBACK_TOL: f64 = 1e-10;

/// An element of the base space: `P^ℓ` of a quadruple in a frame.
pub type BaseFunction = Extension;

/// `((α, β; γ, δ), (i, j))`.
#[derive(Clone)]
pub struct BundlePoint {
    pub quad: Arc<dyn QuadField>,
    pub frame: Frame,
}

impl std::fmt::Debug for BundlePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BundlePoint")
            .field("arity", &self.quad.arity())
            .field("frame", &self.frame)
            .field("series_backed", &self.quad.as_harmonic().is_some())
            .finish()
    }
}

impl BundlePoint {
    pub fn new(quad: Arc<dyn QuadField>, frame: Frame) -> Self {
        BundlePoint { quad, frame }
    }

    /// The quadruple with its own frame.
    pub fn from_quad(quad: HarmonicQuadruple) -> Self {
        let frame = quad.frame();
        BundlePoint { quad: Arc::new(quad), frame }
    }

    pub fn zero(domain: Domain, frame: Frame) -> Self {
        BundlePoint { quad: Arc::new(ZeroField { domain }), frame }
    }

    pub fn domain(&self) -> &Domain {
        self.quad.domain()
    }

    pub fn arity(&self) -> usize {
        self.quad.arity()
    }

    pub fn components(&self, p: &[Complex64]) -> [f64; 4] {
        self.quad.components(p)
    }

    /// The series form of the quadruple decoded in this point's frame, when
    /// the quadruple is series-backed.
    pub fn harmonic(&self) -> Option<HarmonicQuadruple> {
        self.quad.as_harmonic().map(|h| h.reframed(self.frame))
    }

    /// Series form, or an error naming the missing backing.
    pub fn require_harmonic(&self) -> Result<HarmonicQuadruple> {
        self.harmonic()
            .ok_or_else(|| Error::Schema("bundle point is not backed by a pair of series".into()))
    }
}

fn same_frame(a: &Frame, b: &Frame) -> Result<()> {
    if a.r6_distance(b) > FRAME_EQ_TOL {
        return Err(Error::FrameMismatch);
    }
    Ok(())
}

fn same_domain(a: &Domain, b: &Domain) -> Result<()> {
    if a.arity() != b.arity() {
        return Err(Error::DimensionMismatch { expected: a.arity(), found: b.arity() });
    }
    if a != b {
        return Err(Error::OutOfDomain("bundle points live on different domains".into()));
    }
    Ok(())
}

// ── Projection, sections, trivializations ────────────────────────────

/// `𝒫_ℓ(bp) = P^ℓ_{i,j}[(α, β, γ, δ)]`.
pub fn project(bp: &BundlePoint, l: usize) -> Result<BaseFunction> {
    Extension::new(bp.quad.clone(), bp.frame, l)
}

/// `S^ℓ_{i,j}[f]`: the components `E_1..E_4` of `f` in `fr`, read off `f`
/// pointwise.
pub fn section(f: Arc<dyn SlotFunction>, fr: Frame) -> BundlePoint {
    BundlePoint { quad: Arc::new(Restriction { h: f, frame: fr }), frame: fr }
}

/// [`section`] of a base function, keeping the series backing when the
/// frames agree.
pub fn section_of(f: &BaseFunction, fr: Frame) -> BundlePoint {
    if f.frame.r6_distance(&fr) <= FRAME_EQ_TOL {
        if let Some(h) = f.quad.as_harmonic() {
            return BundlePoint { quad: Arc::new(h.reframed(fr)), frame: fr };
        }
    }
    section(Arc::new(f.clone()), fr)
}

/// `φ_u^ℓ[f, (i, j)] = S^ℓ_{R_u(i,j)}[f]`.
pub fn trivialize(u: &UnitQuaternion, f: Arc<dyn SlotFunction>, fr: &Frame) -> BundlePoint {
    section(f, frame_rotate(u, fr))
}

/// `(φ_u^ℓ)⁻¹[bp] = (𝒫_ℓ[bp], R_ū(frame))`.
///
/// The base function is the projection of `bp` itself; only the frame
/// coordinate is rotated back.
pub fn untrivialize(u: &UnitQuaternion, bp: &BundlePoint, l: usize) -> Result<(BaseFunction, Frame)> {
    Ok((project(bp, l)?, frame_rotate(&u.conj(), &bp.frame)))
}

/// The inverse with the quadruple re-extended in the rotated-back frame.
/// Kept to show that it does not invert [`trivialize`] when `u` moves `i`.
pub fn untrivialize_as_printed(u: &UnitQuaternion, bp: &BundlePoint, l: usize) -> Result<(BaseFunction, Frame)> {
    let back = frame_rotate(&u.conj(), &bp.frame);
    Ok((Extension::new(bp.quad.clone(), back, l)?, back))
}

/// One section of `f` per frame: the fiber over `f`.
pub fn fiber_sample(f: Arc<dyn SlotFunction>, frames: &[Frame]) -> Vec<BundlePoint> {
    frames.iter().map(|fr| section(f.clone(), *fr)).collect()
}

// ── Algebra ──────────────────────────────────────────────────────────

/// Which matrix formula the `∗` product uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarRule {
    /// Entries derived from the coefficient convolution of `F + G j`.
    Corrected,
    /// Entries as typeset: `−γ(η∘𝓘)` in the top-right and `βτ + ατ` in the
    /// bottom-right.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Bullet,
    Star(StarRule),
}

/// Pointwise matrix formula applied to two quadruple fields.
struct OpField {
    a: Arc<dyn QuadField>,
    b: Arc<dyn QuadField>,
    op: Op,
    series: Option<HarmonicQuadruple>,
}

impl QuadField for OpField {
    fn domain(&self) -> &Domain {
        self.a.domain()
    }

    fn as_harmonic(&self) -> Option<&HarmonicQuadruple> {
        self.series.as_ref()
    }

    fn components(&self, p: &[Complex64]) -> [f64; 4] {
        let [al, be, ga, de] = self.a.components(p);
        let [rh, si, ta, et] = self.b.components(p);
        match self.op {
            Op::Add => [al + rh, be + si, ga + ta, de + et],
            Op::Bullet => [al * rh - be * si, al * si + be * rh, ga * ta - de * et, ga * et + de * ta],
            Op::Star(rule) => {
                let mut buf = [Complex64::new(0.0, 0.0); MAX_ARITY];
                let n = p.len();
                for (d, s) in buf[..n].iter_mut().zip(p) {
                    *d = s.conj();
                }
                let [rt, st, tt, et_] = self.b.components(&buf[..n]);
                match rule {
                    StarRule::Corrected => [
                        al * rh - be * si - ga * tt - de * et_,
                        al * si + be * rh + ga * et_ - de * tt,
                        al * ta - be * et + ga * rt + de * st,
                        al * et + be * ta - ga * st + de * rt,
                    ],
                    StarRule::AsPrinted => [
                        al * rh - be * si - ga * tt - de * et_,
                        al * si + be * rh - ga * et_ - de * tt,
                        al * ta - be * et + ga * rt + de * st,
                        be * ta + al * ta - ga * st + de * rt,
                    ],
                }
            }
        }
    }
}

fn binary(a: &BundlePoint, b: &BundlePoint, op: Op) -> Result<BundlePoint> {
    same_frame(&a.frame, &b.frame)?;
    same_domain(a.domain(), b.domain())?;
    let fr = a.frame;
    let series = match (a.harmonic(), b.harmonic()) {
        (Some(x), Some(y)) => match op {
            Op::Add => Some(x.add(&y)?),
            Op::Bullet => Some(HarmonicQuadruple::with_domain(
                star_product(x.f(), y.f())?,
                star_product(x.g(), y.g())?,
                fr,
                a.domain().clone(),
            )?),
            Op::Star(StarRule::Corrected) => {
                Some(HarmonicQuadruple::from_series(&star_product(&x.as_series(), &y.as_series())?, fr)?)
            }
            Op::Star(StarRule::AsPrinted) => None,
        },
        _ => None,
    };
    Ok(BundlePoint { quad: Arc::new(OpField { a: a.quad.clone(), b: b.quad.clone(), op, series }), frame: fr })
}

/// `A + B`, entrywise.
pub fn bp_add(a: &BundlePoint, b: &BundlePoint) -> Result<BundlePoint> {
    binary(a, b, Op::Add)
}

/// `A •_{i,j} B = (αρ − βσ, ασ + βρ; γτ − δη, γη + δτ)`.
pub fn bp_bullet(a: &BundlePoint, b: &BundlePoint) -> Result<BundlePoint> {
    binary(a, b, Op::Bullet)
}

/// `A ∗ B` on unit balls, with the corrected entries.
pub fn bp_star(a: &BundlePoint, b: &BundlePoint) -> Result<BundlePoint> {
    bp_star_with(a, b, StarRule::Corrected)
}

pub fn bp_star_with(a: &BundlePoint, b: &BundlePoint, rule: StarRule) -> Result<BundlePoint> {
    if !a.domain().is_unit_balls() || !b.domain().is_unit_balls() {
        return Err(Error::DomainUnsupported);
    }
    binary(a, b, Op::Star(rule))
}

/// `ℛ_u(A)`: the same quadruple over the frame `R_u(i, j)`.
pub fn bp_rotate(u: &UnitQuaternion, a: &BundlePoint) -> BundlePoint {
    let frame = frame_rotate(u, &a.frame);
    let quad: Arc<dyn QuadField> = match a.quad.as_harmonic() {
        Some(h) => Arc::new(h.reframed(frame)),
        None => a.quad.clone(),
    };
    BundlePoint { quad, frame }
}

// ── Base-function products ───────────────────────────────────────────

/// `(f • g)(x + I y)` in slot `f.slot()`: the slice values are split as
/// `f₁ + f₂ j`, multiplied leg by leg, and extended off the slice by the
/// Representation Formula.
pub fn base_bullet_at(
    f: &dyn SlotFunction,
    g: &dyn SlotFunction,
    fr: &Frame,
    p: &[Complex64],
    axis: UnitImaginary,
) -> Result<Quaternion> {
    let l = f.slot();
    let mut pm = p.to_vec();
    pm[l] = pm[l].conj();
    let leg = |q: &[Complex64]| -> Result<Quaternion> {
        let (c1, d1) = split_cd(f.eval_at(q, fr.i())?, fr);
        let (c2, d2) = split_cd(g.eval_at(q, fr.i())?, fr);
        Ok(join_cd(c1 * c2, d1 * d2, fr))
    };
    let sv = SliceValuePair { f_plus: leg(p)?, f_minus: leg(&pm)?, frame_axis: fr.i() };
    Ok(representation_formula(&sv, axis))
}

/// `(f ∗ g)` at `(…, x + I y, …)` for series-backed base functions: the slot
/// evaluation of the convolution of their series.
pub fn base_star_at(f: &HarmonicQuadruple, g: &HarmonicQuadruple, l: usize, p: &[Complex64], axis: UnitImaginary) -> Result<Quaternion> {
    let fr = f.frame();
    let u = star_product(&f.as_series(), &g.reframed(fr).as_series())?;
    eval_series_at(&u, l, p, axis, fr.i())
}

fn eval_series_at(u: &MultiSeries, l: usize, p: &[Complex64], axis: UnitImaginary, slice: UnitImaginary) -> Result<Quaternion> {
    let mut zs = p.to_vec();
    let z = zs.remove(l);
    eval_slice(u, &EvalPoint::new(l, axis.embed(z), zs, slice))
}

// ── Identities as residuals ──────────────────────────────────────────

/// `max ‖f(p, I) − g(p, I)‖` over the grid, with `I` cycling through the probe
/// axes and the frame axis.
pub fn base_residual<F, G>(grid: &SampleGrid, f: F, g: G) -> Result<f64>
where
    F: Fn(&[Complex64], UnitImaginary) -> Result<Quaternion> + Sync,
    G: Fn(&[Complex64], UnitImaginary) -> Result<Quaternion> + Sync,
{
    let axes = probe_axes();
    grid.par_max(|k, p| {
        let axis = axes[k % axes.len()];
        Ok(f(p, axis)?.max_abs_diff(&g(p, axis)?))
    })
}

/// `𝒫_ℓ(A + B) − (𝒫_ℓA + 𝒫_ℓB)`.
pub fn hom_add_residual(a: &BundlePoint, b: &BundlePoint, l: usize, grid: &SampleGrid) -> Result<f64> {
    let s = bp_add(a, b)?;
    let (pa, pb, ps) = (project(a, l)?, project(b, l)?, project(&s, l)?);
    base_residual(grid, |p, ax| ps.eval_at(p, ax), |p, ax| Ok(pa.eval_at(p, ax)? + pb.eval_at(p, ax)?))
}

/// `𝒫_ℓ(A • B) − 𝒫_ℓA • 𝒫_ℓB`.
pub fn hom_bullet_residual(a: &BundlePoint, b: &BundlePoint, l: usize, grid: &SampleGrid) -> Result<f64> {
    let s = bp_bullet(a, b)?;
    let (pa, pb, ps) = (project(a, l)?, project(b, l)?, project(&s, l)?);
    base_residual(grid, |p, ax| ps.eval_at(p, ax), |p, ax| base_bullet_at(&pa, &pb, &a.frame, p, ax))
}

/// `𝒫_ℓ(A ∗ B) − 𝒫_ℓA ∗ 𝒫_ℓB`, the matrix entries taken from `rule` and
/// the right side from the series convolution.
pub fn hom_star_residual(a: &BundlePoint, b: &BundlePoint, l: usize, rule: StarRule, grid: &SampleGrid) -> Result<f64> {
    let s = bp_star_with(a, b, rule)?;
    let (ha, hb) = (a.require_harmonic()?, b.require_harmonic()?);
    let u = star_product(&ha.as_series(), &hb.as_series())?;
    let ps = project(&s, l)?;
    let i = a.frame.i();
    base_residual(grid, |p, ax| ps.eval_at(p, ax), |p, ax| eval_series_at(&u, l, p, ax, i))
}

/// `𝒫_ℓ(ℛ_u A) − P^ℓ_{R_u(i,j)}[u · Q^ℓ_{i,j}[𝒫_ℓ A] · ū]`.
pub fn rotation_identity_residual(u: &UnitQuaternion, a: &BundlePoint, l: usize, grid: &SampleGrid) -> Result<f64> {
    let r = bp_rotate(u, a);
    let fr = a.frame;
    let rfr = r.frame;
    let pa: Arc<dyn SlotFunction> = Arc::new(project(a, l)?);
    let w = RotatedRestriction { h: pa, frame: fr, u: *u, target: rfr };
    let pr = project(&r, l)?;
    base_residual(grid, |p, ax| pr.eval_at(p, ax), |p, ax| p_ell_at(&w, &rfr, l, p, ax))
}

/// Components in `target` of `u · h(…, x + iy, …) · ū`.
struct RotatedRestriction {
    h: Arc<dyn SlotFunction>,
    frame: Frame,
    u: UnitQuaternion,
    target: Frame,
}

impl QuadField for RotatedRestriction {
    fn domain(&self) -> &Domain {
        self.h.domain()
    }
    fn components(&self, p: &[Complex64]) -> [f64; 4] {
        match self.h.eval_at(p, self.frame.i()) {
            Ok(v) => split_components(self.u.rotate(v), &self.target),
            Err(_) => [f64::NAN; 4],
        }
    }
}

/// Residual of `𝒫_ℓ ∘ φ_u = (f, fr) ↦ f`.
pub fn project_trivialize_residual(u: &UnitQuaternion, f: &Arc<dyn SlotFunction>, fr: &Frame, grid: &SampleGrid) -> Result<f64> {
    let bp = trivialize(u, f.clone(), fr);
    let back = project(&bp, f.slot())?;
    base_residual(grid, |p, ax| back.eval_at(p, ax), |p, ax| f.eval_at(p, ax))
}

/// Residual of `φ_u⁻¹ ∘ φ_u = id`: base function and frame.
pub fn untrivialize_roundtrip_residual(
    u: &UnitQuaternion,
    f: &Arc<dyn SlotFunction>,
    fr: &Frame,
    grid: &SampleGrid,
    printed: bool,
) -> Result<f64> {
    let bp = trivialize(u, f.clone(), fr);
    let (g, back) = if printed { untrivialize_as_printed(u, &bp, f.slot())? } else { untrivialize(u, &bp, f.slot())? };
    let r = base_residual(grid, |p, ax| g.eval_at(p, ax), |p, ax| f.eval_at(p, ax))?;
    Ok(r.max(back.r6_distance(fr)))
}

/// Residual of `φ_u ∘ φ_u⁻¹ = id` on the quadruple values and the frame.
pub fn retrivialize_residual(u: &UnitQuaternion, bp: &BundlePoint, l: usize, grid: &SampleGrid) -> Result<f64> {
    let (f, fr) = untrivialize(u, bp, l)?;
    let again = trivialize(u, Arc::new(f), &fr);
    Ok(quad_residual(bp, &again, grid).max(again.frame.r6_distance(&bp.frame)))
}

/// `φ_u[f, (i, j)]` against `φ_v[f, R_{v̄u}(i, j)]`.
pub fn compatibility_residual(
    u: &UnitQuaternion,
    v: &UnitQuaternion,
    f: &Arc<dyn SlotFunction>,
    fr: &Frame,
    grid: &SampleGrid,
) -> Result<f64> {
    let a = trivialize(u, f.clone(), fr);
    let b = trivialize(v, f.clone(), &crate::quat::transition(u, v, fr));
    Ok(quad_residual(&a, &b, grid).max(a.frame.r6_distance(&b.frame)))
}

/// Largest component difference of two quadruple fields on the grid.
pub fn quad_residual(a: &BundlePoint, b: &BundlePoint, grid: &SampleGrid) -> f64 {
    component_sups_diff(a.quad.as_ref(), Some(b.quad.as_ref()), grid).into_iter().fold(0.0, f64::max)
}

// ── Norms ────────────────────────────────────────────────────────────

/// `‖A‖_∞ = Σ_k sup |A_k| + ‖(i, j)‖_{ℝ⁶}`.
pub fn sup_norm(a: &BundlePoint, grid: &SampleGrid) -> f64 {
    component_sups(a.quad.as_ref(), grid).iter().sum::<f64>() + a.frame.r6_norm()
}

/// `‖A‖_∞` of the difference: component sups of `A − B` plus the frame distance.
pub fn diff_sup_norm(a: &BundlePoint, b: &BundlePoint, grid: &SampleGrid) -> f64 {
    component_sups_diff(a.quad.as_ref(), Some(b.quad.as_ref()), grid).iter().sum::<f64>() + a.frame.r6_distance(&b.frame)
}

/// `‖A(p)‖ = Σ_k |A_k(p)| + ‖(i, j)‖_{ℝ⁶}`.
pub fn pointwise_norm(a: &BundlePoint, p: &[Complex64]) -> f64 {
    a.components(p).iter().map(|c| c.abs()).sum::<f64>() + a.frame.r6_norm()
}

/// `‖(f, (i, j))‖_{∞,ℓ} = ‖f‖_∞ + ‖(i, j)‖_{ℝ⁶}`.
pub fn base_norm(f: &BaseFunction, grid: &SampleGrid) -> Result<f64> {
    Ok(sup_norm_diff(f, None, grid)? + f.frame.r6_norm())
}

// ── Continuity bounds ────────────────────────────────────────────────

/// Sampled left and right sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lhs: f64,
    pub rhs: f64,
}

impl Bound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `‖P_{i,j}[A] − P_{k,l}[B]‖_{∞,ℓ}` against
/// `2‖(A − B, (i − k, j − l))‖_∞ (1 + Σ ‖B_k‖_∞)`.
pub fn cont_proy(a: &BundlePoint, b: &BundlePoint, l: usize, grid: &SampleGrid) -> Result<Bound> {
    same_domain(a.domain(), b.domain())?;
    let (pa, pb) = (project(a, l)?, project(b, l)?);
    let lhs = sup_norm_diff(&pa, Some(&pb), grid)? + a.frame.r6_distance(&b.frame);
    let delta = diff_sup_norm(a, b, grid);
    let rho: f64 = component_sups(b.quad.as_ref(), grid).iter().sum();
    Ok(Bound { lhs, rhs: 2.0 * delta * (1.0 + rho) })
}

/// `‖φ_u[f, (i, j)] − φ_u[g, (k, l)]‖_∞` against
/// `4‖f − g‖_∞ + (2‖g‖_∞ + 1)‖(i, j) − (k, l)‖ + 4 sup ‖g(…, x + i′y, …) − g(…, x + k′y, …)‖`,
/// where `i′ = u i ū` and `k′ = u k ū` are the axes the two sections read.
pub fn cont_trivia(
    u: &UnitQuaternion,
    f: &Arc<dyn SlotFunction>,
    fr_a: &Frame,
    g: &Arc<dyn SlotFunction>,
    fr_b: &Frame,
    grid: &SampleGrid,
) -> Result<Bound> {
    same_domain(f.domain(), g.domain())?;
    let a = trivialize(u, f.clone(), fr_a);
    let b = trivialize(u, g.clone(), fr_b);
    let lhs = diff_sup_norm(&a, &b, grid);
    let (ia, ib) = (a.frame.i(), b.frame.i());
    let drift = grid.par_max(|_, p| Ok((g.eval_at(p, ia)? - g.eval_at(p, ib)?).norm()))?;
    let rhs = 4.0 * sup_norm_diff(f.as_ref(), Some(g.as_ref()), grid)?
        + (2.0 * sup_norm_diff(g.as_ref(), None, grid)? + 1.0) * fr_a.r6_distance(fr_b)
        + 4.0 * drift;
    Ok(Bound { lhs, rhs })
}

/// `‖S[f] − S[g]‖_∞ ≤ 4‖f − g‖_∞` in one frame.
pub fn section_bound(f: &Arc<dyn SlotFunction>, g: &Arc<dyn SlotFunction>, fr: &Frame, grid: &SampleGrid) -> Result<Bound> {
    same_domain(f.domain(), g.domain())?;
    let lhs = diff_sup_norm(&section(f.clone(), *fr), &section(g.clone(), *fr), grid);
    Ok(Bound { lhs, rhs: 4.0 * sup_norm_diff(f.as_ref(), Some(g.as_ref()), grid)? })
}

// ── Pullback ─────────────────────────────────────────────────────────

/// `max |𝒫_ℓ(bp) − P^ℓ_{i,j}[(Re f, Im f, 0, 0)]|` over the grid.
pub fn pullback_residual(candidate: &MultiSeries, bp: &BundlePoint, fr: &Frame, l: usize, grid: &SampleGrid) -> Result<f64> {
    let zero = MultiSeries::new(candidate.n(), 0, candidate.center().to_vec())?;
    let m = HarmonicQuadruple::with_domain(candidate.clone(), zero, *fr, bp.domain().clone())?;
    let lhs = project(bp, l)?;
    base_residual(grid, |p, ax| lhs.eval_at(p, ax), |p, ax| p_ell_at(&m, fr, l, p, ax))
}

/// Whether `(f, bp)` lies in the pullback of the bundle along
/// `f ↦ P^ℓ_{i,j}[f]`, tested on the grid at [`PULLBACK_TOL`].
pub fn pullback_member(candidate: &MultiSeries, bp: &BundlePoint, fr: &Frame, l: usize, grid: &SampleGrid) -> Result<bool> {
    Ok(pullback_residual(candidate, bp, fr, l, grid)? <= PULLBACK_TOL)
}

// ── File format ──────────────────────────────────────────────────────

/// `{"F": …, "G": …}` with optional per-variable radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadData {
    #[serde(rename = "F")]
    pub f: MultiSeries,
    #[serde(rename = "G")]
    pub g: MultiSeries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

/// `{"frame": …, "quad": {"F": …, "G": …}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    pub frame: Frame,
    pub quad: QuadData,
}

impl BundleFile {
    /// Serializable form of a series-backed bundle point.
    pub fn from_point(bp: &BundlePoint) -> Result<Self> {
        let h = bp.require_harmonic()?;
        let unit = Domain::new(h.f().center().to_vec(), vec![1.0; h.f().n()])?;
        let radii = (bp.domain() != &unit).then(|| bp.domain().radii().to_vec());
        Ok(BundleFile { frame: bp.frame, quad: QuadData { f: h.f().clone(), g: h.g().clone(), radii } })
    }

    pub fn into_point(self) -> Result<BundlePoint> {
        let QuadData { f, g, radii } = self.quad;
        let radii = radii.unwrap_or_else(|| vec![1.0; f.n()]);
        let domain = Domain::new(f.center().to_vec(), radii)?;
        let h = HarmonicQuadruple::with_domain(f, g, self.frame, domain)?;
        Ok(BundlePoint { quad: Arc::new(h), frame: self.frame })
    }
}

/// Largest component difference between a point's quadruple and its series
/// backing; zero for points that are their own series.
pub fn backing_residual(bp: &BundlePoint, grid: &SampleGrid) -> Option<f64> {
    let h = bp.harmonic()?;
    Some(grid.iter().map(|p| max_diff4(&bp.components(p), &h.components(p))).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::transition;
    use crate::random::{random_frame, random_quad, random_unit_quaternion};
    use crate::series::bullet_product;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn grid2() -> SampleGrid {
        SampleGrid::identity(&Domain::unit_balls(2), 4)
    }

    fn sup2() -> SampleGrid {
        SampleGrid::sup(&Domain::unit_balls(2), 2, 16)
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, deg: u32) -> BundlePoint {
        let fr = random_frame(rng);
        BundlePoint::from_quad(random_quad(rng, n, deg, fr))
    }

    fn random_base(rng: &mut ChaCha8Rng, l: usize) -> Arc<dyn SlotFunction> {
        let bp = random_point(rng, 2, 3);
        Arc::new(project(&bp, l).unwrap())
    }

    /// `F = z1 z2 + z2²`, `G = z1² − 3 z2` in `(e1, e2)` on discs of radius 2.
    fn example_point() -> BundlePoint {
        let q = HarmonicQuadruple::from_complex(
            2,
            2,
            vec![0.0, 0.0],
            &[(vec![1, 1], c(1.0, 0.0)), (vec![0, 2], c(1.0, 0.0))],
            &[(vec![2, 0], c(1.0, 0.0)), (vec![0, 1], c(-3.0, 0.0))],
            Frame::STANDARD,
        )
        .unwrap();
        BundlePoint::from_quad(q.on_domain(Domain::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap()).unwrap())
    }

    /// The expanded first-slot extension of the example, term by term.
    fn example_p1(x1: f64, y1: f64, x2: f64, y2: f64, iq: UnitImaginary) -> Quaternion {
        let fr = Frame::STANDARD;
        let (i, j, ij) = (fr.i().as_quaternion(), fr.j().as_quaternion(), fr.ij());
        let flipped = Quaternion::real(x1 * x2 + y1 * y2 + x2 * x2 - y2 * y2)
            + i * (x1 * y2 - x2 * y1 + 2.0 * x2 * y2)
            + j * (x1 * x1 - y1 * y1 - 3.0 * x2)
            + ij * (-2.0 * x1 * y1 - 3.0 * y2);
        let plain = Quaternion::real(x1 * x2 - y1 * y2 + x2 * x2 - y2 * y2)
            + i * (x1 * y2 + x2 * y1 + 2.0 * x2 * y2)
            + j * (x1 * x1 - y1 * y1 - 3.0 * x2)
            + ij * (2.0 * x1 * y1 - 3.0 * y2);
        let ii = iq.as_quaternion() * i;
        (Quaternion::ONE + ii) * flipped * 0.5 + (Quaternion::ONE - ii) * plain * 0.5
    }

    #[test]
    fn zero_point_projects_to_zero() {
        let bp = BundlePoint::zero(Domain::unit_balls(2), Frame::STANDARD);
        let f = project(&bp, 1).unwrap();
        for p in grid2().iter() {
            assert_eq!(f.eval_at(p, UnitImaginary::E3).unwrap(), Quaternion::ZERO);
        }
        let s = section(Arc::new(f), Frame::STANDARD);
        assert_eq!(sup_norm(&s, &grid2()), Frame::STANDARD.r6_norm());
    }

    #[test]
    fn example_projection_matches_expansion() {
        let f = project(&example_point(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (x1, y1) = crate::random::random_in_disc(&mut rng, 0.0, 1.9);
            let (x2, y2) = crate::random::random_in_disc(&mut rng, 0.0, 1.9);
            let iq = crate::random::random_unit_imaginary(&mut rng);
            let v = f.eval(iq.embed(c(x1, y1.abs())), &[c(x2, y2)]).unwrap();
            let w = example_p1(x1, y1.abs(), x2, y2, iq);
            assert!(v.max_abs_diff(&w) < 1e-12, "{v:?} vs {w:?}");
        }
    }

    #[test]
    fn project_after_section_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for l in 0..2 {
            let f = random_base(&mut rng, l);
            let fr = random_frame(&mut rng);
            let back = project(&section(f.clone(), fr), l).unwrap();
            let r = base_residual(&grid2(), |p, ax| back.eval_at(p, ax), |p, ax| f.eval_at(p, ax)).unwrap();
            assert!(r < 1e-11, "{r}");
        }
    }

    #[test]
    fn section_of_projection_recovers_quad() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let bp = random_point(&mut rng, 2, 3);
        let f = project(&bp, 1).unwrap();
        let s = section(Arc::new(f.clone()), bp.frame);
        assert!(quad_residual(&bp, &s, &grid2()) < 1e-11);
        let kept = section_of(&f, bp.frame);
        assert!(kept.harmonic().is_some());
        assert!(quad_residual(&bp, &kept, &grid2()) == 0.0);
        assert!(section(Arc::new(ZeroFunction::new()), Frame::STANDARD).components(&[c(0.1, 0.2), c(0.0, 0.3)]) == [0.0; 4]);
    }

    struct ZeroFunction(Domain);

    impl ZeroFunction {
        fn new() -> Self {
            ZeroFunction(Domain::unit_balls(2))
        }
    }

    impl SlotFunction for ZeroFunction {
        fn domain(&self) -> &Domain {
            &self.0
        }
        fn slot(&self) -> usize {
            0
        }
        fn eval(&self, _: Quaternion, _: &[Complex64]) -> Result<Quaternion> {
            Ok(Quaternion::ZERO)
        }
    }

    #[test]
    fn trivializations() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let g = grid2();
        for _ in 0..5 {
            let f = random_base(&mut rng, 0);
            let fr = random_frame(&mut rng);
            let (u, v) = (random_unit_quaternion(&mut rng), random_unit_quaternion(&mut rng));

            let id = trivialize(&UnitQuaternion::IDENTITY, f.clone(), &fr);
            assert!(quad_residual(&id, &section(f.clone(), fr), &g) == 0.0 && id.frame == fr);

            assert!(project_trivialize_residual(&u, &f, &fr, &g).unwrap() < 1e-11);
            assert!(compatibility_residual(&u, &v, &f, &fr, &g).unwrap() < 1e-11);
            assert!(untrivialize_roundtrip_residual(&u, &f, &fr, &g, false).unwrap() < 1e-11);
            // Re-extending in the rotated-back frame reads the components
            // against the wrong axes.
            assert!(untrivialize_roundtrip_residual(&u, &f, &fr, &g, true).unwrap() > 1e-3);

            let bp = trivialize(&u, f.clone(), &fr);
            assert!(retrivialize_residual(&u, &bp, 0, &g).unwrap() < 1e-11);
            assert!(transition(&u, &u, &fr).r6_distance(&fr) < 1e-15);
        }
    }

    #[test]
    fn untrivialize_at_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let bp = random_point(&mut rng, 2, 2);
        let (f, fr) = untrivialize(&UnitQuaternion::IDENTITY, &bp, 1).unwrap();
        assert_eq!(fr, bp.frame);
        let p = project(&bp, 1).unwrap();
        for q in grid2().iter() {
            assert_eq!(f.eval_at(q, UnitImaginary::E2).unwrap(), p.eval_at(q, UnitImaginary::E2).unwrap());
        }
    }

    #[test]
    fn fibers_over_a_base_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let f = random_base(&mut rng, 1);
        let frames: Vec<Frame> = (0..10).map(|_| random_frame(&mut rng)).collect();
        let fiber = fiber_sample(f.clone(), &frames);
        assert_eq!(fiber.len(), 10);
        for (bp, fr) in fiber.iter().zip(&frames) {
            assert_eq!(bp.frame, *fr);
            let back = project(bp, 1).unwrap();
            let r = base_residual(&grid2(), |p, ax| back.eval_at(p, ax), |p, ax| f.eval_at(p, ax)).unwrap();
            assert!(r < 1e-11);
            let again = section(Arc::new(back), *fr);
            assert!(quad_residual(bp, &again, &grid2()) < 1e-12);
        }
        let one = fiber_sample(f.clone(), &frames[..1]);
        assert!(quad_residual(&one[0], &section(f, frames[0]), &grid2()) == 0.0);
    }

    #[test]
    fn sums_and_bullets() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let fr = random_frame(&mut rng);
        let a = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
        let b = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
        let g = grid2();

        let z = bp_add(&a, &BundlePoint::zero(Domain::unit_balls(2), fr)).unwrap();
        assert!(quad_residual(&z, &a, &g) == 0.0);

        let ab = bp_bullet(&a, &b).unwrap();
        for p in g.iter() {
            let (x, y, v) = (a.components(p), b.components(p), ab.components(p));
            assert_eq!(v[0], x[0] * y[0] - x[1] * y[1]);
        }
        assert!(backing_residual(&ab, &g).unwrap() < 1e-13);
        let series = bullet_product(&a.require_harmonic().unwrap().as_series(), &b.require_harmonic().unwrap().as_series(), &fr).unwrap();
        assert!(ab.require_harmonic().unwrap().as_series().max_coeff_diff(&series) < 1e-14);

        for l in 0..2 {
            assert!(hom_add_residual(&a, &b, l, &g).unwrap() < 1e-10);
            assert!(hom_bullet_residual(&a, &b, l, &g).unwrap() < 1e-10);
        }

        let fr2 = random_frame(&mut rng);
        let other = BundlePoint::from_quad(random_quad(&mut rng, 2, 1, fr2));
        assert_eq!(bp_add(&a, &other).unwrap_err(), Error::FrameMismatch);
        assert_eq!(bp_bullet(&a, &other).unwrap_err(), Error::FrameMismatch);
    }

    #[test]
    fn star_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let g = grid2();
        for _ in 0..4 {
            let fr = random_frame(&mut rng);
            let a = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
            let b = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
            let ab = bp_star(&a, &b).unwrap();
            assert!(backing_residual(&ab, &g).unwrap() < 1e-12);
            for l in 0..2 {
                assert!(hom_star_residual(&a, &b, l, StarRule::Corrected, &g).unwrap() < 1e-10);
                assert!(hom_star_residual(&a, &b, l, StarRule::AsPrinted, &g).unwrap() > 1e-3);
            }
        }
        let ex = example_point();
        assert_eq!(bp_star(&ex, &ex).unwrap_err(), Error::DomainUnsupported);
    }

    #[test]
    fn rotation_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_point(&mut rng, 2, 3);
        let u = random_unit_quaternion(&mut rng);
        let r = bp_rotate(&u, &a);
        assert!(quad_residual(&r, &a, &grid2()) < 1e-13);
        assert!(r.frame.r6_distance(&frame_rotate(&u, &a.frame)) == 0.0);
        for l in 0..2 {
            assert!(rotation_identity_residual(&u, &a, l, &grid2()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let fr = random_frame(&mut rng);
        let a = BundlePoint::from_quad(random_quad(&mut rng, 2, 2, fr));
        let b = BundlePoint::from_quad(random_quad(&mut rng, 2, 2, fr));
        let g = sup2();
        let s = bp_add(&a, &b).unwrap();
        assert!(sup_norm(&s, &g) <= sup_norm(&a, &g) + sup_norm(&b, &g));
        for p in g.iter().take(50) {
            assert!(pointwise_norm(&a, p) <= sup_norm(&a, &g) + 1e-15);
        }
        let f = project(&a, 0).unwrap();
        let n = base_norm(&f, &g).unwrap();
        assert!(n >= fr.r6_norm() && n.is_finite());
        assert_eq!(diff_sup_norm(&a, &a, &g), 0.0);
    }

    #[test]
    fn continuity_bounds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = sup2();
        for _ in 0..5 {
            let a = random_point(&mut rng, 2, 2);
            let b = random_point(&mut rng, 2, 2);
            let bound = cont_proy(&a, &b, 0, &g).unwrap();
            assert!(bound.holds(), "{bound:?}");

            let f = random_base(&mut rng, 1);
            let h = random_base(&mut rng, 1);
            let fr = random_frame(&mut rng);
            let bound = section_bound(&f, &h, &fr, &g).unwrap();
            assert!(bound.holds(), "{bound:?}");

            let u = random_unit_quaternion(&mut rng);
            let bound = cont_trivia(&u, &f, &fr, &h, &random_frame(&mut rng), &g).unwrap();
            assert!(bound.holds(), "{bound:?}");
        }
    }

    #[test]
    fn pullback_membership() {
        let g = grid2();
        let fr = Frame::STANDARD;
        let zero = MultiSeries::zero(2, 0);
        let z = BundlePoint::zero(Domain::unit_balls(2), fr);
        assert!(pullback_member(&zero, &z, &fr, 0, &g).unwrap());

        let i = fr.i();
        let f = MultiSeries::from_terms(2, 2, vec![0.0; 2], [(vec![1, 1], i.embed(c(1.0, 0.0))), (vec![0, 2], i.embed(c(1.0, 0.0)))]).unwrap();
        let m = HarmonicQuadruple::new(f.clone(), MultiSeries::zero(2, 0), fr).unwrap();
        let ext = Extension::new(Arc::new(m), fr, 0).unwrap();
        let bp = section(Arc::new(ext), fr);
        assert!(pullback_member(&f, &bp, &fr, 0, &g).unwrap());

        let with_g = HarmonicQuadruple::new(f.clone(), f.clone(), fr).unwrap();
        let bp = BundlePoint::from_quad(with_g);
        assert!(!pullback_member(&f, &bp, &fr, 0, &g).unwrap());
        assert!(pullback_residual(&f, &bp, &fr, 0, &g).unwrap() > 0.1);
    }

    #[test]
    fn bundle_file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for bp in [random_point(&mut rng, 2, 3), example_point()] {
            let text = serde_json::to_string(&BundleFile::from_point(&bp).unwrap()).unwrap();
            let back: BundleFile = serde_json::from_str(&text).unwrap();
            let back = back.into_point().unwrap();
            assert_eq!(back.frame, bp.frame);
            for p in SampleGrid::identity(bp.domain(), 3).iter() {
                let (x, y) = (back.components(p), bp.components(p));
                let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                assert!(max_diff4(&x, &y) <= 1e-15 * scale);
            }
        }
        let f = random_base(&mut rng, 0);
        let rotated = trivialize(&random_unit_quaternion(&mut rng), f, &Frame::STANDARD);
        assert!(BundleFile::from_point(&rotated).is_err());
        let bad = r#"{"frame":{"i":[1,0,0],"j":[0,1,0]},"quad":{"F":{"n":1,"max_deg":1,"center":[0],"terms":[{"alpha":[1],"coeff":[0,0,1,0]}]},"G":{"n":1,"max_deg":0,"center":[0],"terms":[]}}}"#;
        let parsed: BundleFile = serde_json::from_str(bad).unwrap();
        assert!(matches!(parsed.into_point(), Err(Error::NotInSlice { .. })));
    }

    /// Central-difference Cauchy–Riemann residual of `(E_1, E_2)` in the
    /// variable `k` at `p`.
    fn cr_residual(bp: &BundlePoint, p: &[Complex64], k: usize, h: f64) -> f64 {
        let at = |dx: f64, dy: f64| {
            let mut q = p.to_vec();
            q[k] += c(dx, dy);
            bp.components(&q)
        };
        let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        let d = |a: [f64; 4], b: [f64; 4], m: usize| (a[m] - b[m]) / (2.0 * h);
        let r1 = d(xp, xm, 0) - d(yp, ym, 1);
        let r2 = d(yp, ym, 0) + d(xp, xm, 1);
        r1.abs().max(r2.abs())
    }

    #[test]
    fn rotated_sections_in_other_slots() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let fr = Frame::STANDARD;
        let f: Arc<dyn SlotFunction> = Arc::new(project(&BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr)), 0).unwrap());
        let p = [c(0.2, 0.3), c(-0.1, 0.25)];
        // Same frame: harmonic pairs in the second variable.
        let same = section(f.clone(), fr);
        assert!(cr_residual(&same, &p, 1, 1e-4) < 1e-6);
        // Rotating the frame axis breaks the pairing in the complex slot while
        // slot 1 stays conjugate harmonic.
        let u = UnitQuaternion::from_axis_angle(UnitImaginary::E2, 0.7);
        let moved = trivialize(&u, f, &fr);
        assert!(cr_residual(&moved, &p, 0, 1e-4) < 1e-6);
        assert!(cr_residual(&moved, &p, 1, 1e-4) > 1e-2);
    }
}
