//! Truncated multivariable power series with quaternion coefficients.
//!
//! A [`MultiSeries`] stores `f = Σ_α (q − w_ℓ)^{*α_ℓ} ∏_{k≠ℓ} (z_k − w_k)^{α_k} u_α`
//! with right coefficients `u_α` and real expansion centers `w_k`. Which
//! variable is quaternionic is a property of the evaluation point, not of the
//! series.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{slice_coords, Frame, Quaternion, UnitImaginary};
use crate::slice::split_components;

/// Coefficients at or below this norm are dropped.
pub const PRUNE_TOL: f64 = 1e-300;
/// Constant terms below this norm are not star-inverted.
pub const INVERTIBLE_TOL: f64 = 1e-10;

pub type MultiIndex = Vec<u32>;

// ── Data model ───────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct MultiSeries {
    n: usize,
    max_deg: u32,
    center: Vec<f64>,
    terms: BTreeMap<MultiIndex, Quaternion>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesRepr {
    n: usize,
    max_deg: u32,
    center: Vec<f64>,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    alpha: MultiIndex,
    coeff: Quaternion,
}

impl TryFrom<SeriesRepr> for MultiSeries {
    type Error = Error;
    fn try_from(r: SeriesRepr) -> Result<Self> {
        let mut s = MultiSeries::new(r.n, r.max_deg, r.center)?;
        for t in r.terms {
            if !t.coeff.is_finite() {
                return Err(Error::Schema(format!("non-finite coefficient at {:?}", t.alpha)));
            }
            s.add_term(t.alpha, t.coeff)?;
        }
        Ok(s)
    }
}

impl From<MultiSeries> for SeriesRepr {
    fn from(s: MultiSeries) -> Self {
        SeriesRepr {
            n: s.n,
            max_deg: s.max_deg,
            center: s.center,
            terms: s.terms.into_iter().map(|(alpha, coeff)| TermRepr { alpha, coeff }).collect(),
        }
    }
}

impl MultiSeries {
    /// The zero series.
    pub fn new(n: usize, max_deg: u32, center: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if center.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: center.len() });
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Schema("non-finite expansion center".into()));
        }
        Ok(MultiSeries { n, max_deg, center, terms: BTreeMap::new() })
    }

    /// The zero series centered at the origin.
    pub fn zero(n: usize, max_deg: u32) -> Self {
        MultiSeries::new(n, max_deg, vec![0.0; n]).expect("n > 0")
    }

    /// Builds a series from `(α, u_α)` pairs; repeated indices accumulate.
    pub fn from_terms<I>(n: usize, max_deg: u32, center: Vec<f64>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Quaternion)>,
    {
        let mut s = MultiSeries::new(n, max_deg, center)?;
        for (a, u) in terms {
            s.add_term(a, u)?;
        }
        Ok(s)
    }

    /// The constant `c` in `n` variables.
    pub fn constant(n: usize, c: Quaternion) -> Self {
        let mut s = MultiSeries::zero(n, 0);
        s.add_term(vec![0; n], c).expect("in bounds");
        s
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn max_deg(&self) -> u32 {
        self.max_deg
    }

    #[inline]
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    #[inline]
    pub fn terms(&self) -> &BTreeMap<MultiIndex, Quaternion> {
        &self.terms
    }

    pub fn coeff(&self, alpha: &[u32]) -> Quaternion {
        self.terms.get(alpha).copied().unwrap_or(Quaternion::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree among stored terms.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0)
    }

    fn check_index(&self, alpha: &[u32]) -> Result<()> {
        if alpha.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: alpha.len() });
        }
        if alpha.iter().any(|&a| a > self.max_deg) {
            return Err(Error::DegreeOutOfBounds { alpha: alpha.to_vec(), max_deg: self.max_deg });
        }
        Ok(())
    }

    /// Adds `u` to the coefficient at `alpha`, keeping the canonical form.
    pub fn add_term(&mut self, alpha: MultiIndex, u: Quaternion) -> Result<()> {
        self.check_index(&alpha)?;
        let v = self.coeff(&alpha) + u;
        if v.norm() <= PRUNE_TOL {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, v);
        }
        Ok(())
    }

    /// Overwrites the coefficient at `alpha`.
    pub fn set_term(&mut self, alpha: MultiIndex, u: Quaternion) -> Result<()> {
        self.check_index(&alpha)?;
        if u.norm() <= PRUNE_TOL {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, u);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, u| u.norm() > PRUNE_TOL);
    }

    /// Applies `g` to every coefficient.
    pub fn map_coeffs(&self, g: impl Fn(Quaternion) -> Quaternion) -> MultiSeries {
        let mut out = MultiSeries { terms: BTreeMap::new(), ..self.clone() };
        out.terms = self.terms.iter().map(|(a, u)| (a.clone(), g(*u))).collect();
        out.prune();
        out
    }

    /// `f · b`.
    pub fn right_mul(&self, b: Quaternion) -> MultiSeries {
        self.map_coeffs(|u| u * b)
    }

    /// `b · f`, which is slice regular only for real `b` or in-slice evaluation.
    pub fn left_mul(&self, b: Quaternion) -> MultiSeries {
        self.map_coeffs(|u| b * u)
    }

    /// Same variables and centers.
    pub fn check_compatible(&self, other: &MultiSeries) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.center != other.center {
            return Err(Error::CenterMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiSeries) -> Result<MultiSeries> {
        self.check_compatible(other)?;
        let mut out = MultiSeries {
            max_deg: self.max_deg.max(other.max_deg),
            ..self.clone()
        };
        for (a, u) in &other.terms {
            out.add_term(a.clone(), *u)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiSeries) -> Result<MultiSeries> {
        self.add(&other.map_coeffs(|u| -u))
    }

    /// Drops every term of total degree above `deg` and caps the per-variable bound.
    pub fn truncate(&self, deg: u32) -> MultiSeries {
        let mut out = MultiSeries { max_deg: self.max_deg.min(deg), terms: BTreeMap::new(), ..self.clone() };
        for (a, u) in &self.terms {
            if a.iter().sum::<u32>() <= deg {
                out.terms.insert(a.clone(), *u);
            }
        }
        out
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coeff_diff(&self, other: &MultiSeries) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, u) in &self.terms {
            worst = worst.max(u.max_abs_diff(&other.coeff(a)));
        }
        for (a, v) in &other.terms {
            if !self.terms.contains_key(a) {
                worst = worst.max(v.max_abs_diff(&Quaternion::ZERO));
            }
        }
        worst
    }
}

// ── Evaluation ───────────────────────────────────────────────────────

/// `(x_1, y_1, …, q, …, x_n, y_n)`: the quaternionic value sits in `slot`
/// (0-based), the remaining variables are complex numbers of `C(axis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub slot: usize,
    pub q: Quaternion,
    pub zs: Vec<Complex64>,
    pub axis: UnitImaginary,
}

impl EvalPoint {
    pub fn new(slot: usize, q: Quaternion, zs: Vec<Complex64>, axis: UnitImaginary) -> Self {
        EvalPoint { slot, q, zs, axis }
    }

    /// Number of variables described by the point.
    pub fn arity(&self) -> usize {
        self.zs.len() + 1
    }

    /// Same point with `q` replaced by its conjugate.
    pub fn conj_slot(&self) -> EvalPoint {
        EvalPoint { q: self.q.conj(), ..self.clone() }
    }

    /// Complex coordinates of every variable in `C(axis)`: the quaternionic
    /// slot is written as `x + i y` with `(x, y)` from its slice coordinates.
    pub fn slice_grid(&self) -> Vec<Complex64> {
        let sc = slice_coords(self.q);
        let mut out = Vec::with_capacity(self.arity());
        out.extend_from_slice(&self.zs[..self.slot.min(self.zs.len())]);
        out.push(Complex64::new(sc.x, sc.y));
        if self.slot < self.zs.len() {
            out.extend_from_slice(&self.zs[self.slot..]);
        }
        out
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.arity() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.arity() });
        }
        if self.slot >= n {
            return Err(Error::SlotOutOfRange { slot: self.slot, n });
        }
        Ok(())
    }
}

/// The two weights `½(1 + I_q i)` and `½(1 − I_q i)` of the slice extension.
#[inline]
pub(crate) fn half_projectors(i_q: UnitImaginary, axis: UnitImaginary) -> (Quaternion, Quaternion) {
    let ii = i_q.as_quaternion() * axis.as_quaternion();
    ((Quaternion::ONE + ii) * 0.5, (Quaternion::ONE - ii) * 0.5)
}

/// `(q − w)^{*m} = ½(1 + I_q i)(z̄ − w)^m + ½(1 − I_q i)(z − w)^m` with `z = x + i y`.
pub fn star_power(q: Quaternion, w: f64, m: u32, axis: UnitImaginary) -> Quaternion {
    let sc = slice_coords(q);
    let (plus, minus) = half_projectors(sc.axis, axis);
    let z = Complex64::new(sc.x - w, sc.y);
    plus * axis.embed(z.conj().powu(m)) + minus * axis.embed(z.powu(m))
}

/// Table `[(q − w)^{*0}, …, (q − w)^{*max}]`.
fn star_power_table(q: Quaternion, w: f64, max: u32, axis: UnitImaginary) -> Vec<Quaternion> {
    let sc = slice_coords(q);
    let (plus, minus) = half_projectors(sc.axis, axis);
    let z = Complex64::new(sc.x - w, sc.y);
    let zb = z.conj();
    let (mut pz, mut pzb) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut out = Vec::with_capacity(max as usize + 1);
    for _ in 0..=max {
        out.push(plus * axis.embed(pzb) + minus * axis.embed(pz));
        pz *= z;
        pzb *= zb;
    }
    out
}

pub(crate) fn complex_power_table(z: Complex64, max: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..=max {
        out.push(p);
        p *= z;
    }
    out
}

/// `Σ_α (q − w_ℓ)^{*α_ℓ} · ∏_{k≠ℓ}(z_k − w_k)^{α_k} · u_α`, summed in
/// lexicographic order of `α` with the factors multiplied in that order.
pub fn eval_slice(f: &MultiSeries, p: &EvalPoint) -> Result<Quaternion> {
    p.validate(f.n)?;
    let l = p.slot;
    let star = star_power_table(p.q, f.center[l], f.max_deg, p.axis);
    let tables: Vec<Vec<Complex64>> = (0..f.n)
        .map(|k| {
            if k == l {
                Vec::new()
            } else {
                let idx = if k < l { k } else { k - 1 };
                complex_power_table(p.zs[idx] - f.center[k], f.max_deg)
            }
        })
        .collect();
    let mut acc = Quaternion::ZERO;
    for (alpha, u) in &f.terms {
        let mut c = Complex64::new(1.0, 0.0);
        for (k, &a) in alpha.iter().enumerate() {
            if k != l {
                c *= tables[k][a as usize];
            }
        }
        acc += star[alpha[l] as usize] * p.axis.embed(c) * *u;
    }
    Ok(acc)
}

// ── Products ─────────────────────────────────────────────────────────

/// Coefficient convolution `Σ_{α+β=δ} u_α v_β`.
pub fn star_product(f: &MultiSeries, g: &MultiSeries) -> Result<MultiSeries> {
    f.check_compatible(g)?;
    let mut out = MultiSeries::new(f.n, f.max_deg + g.max_deg, f.center.clone())?;
    let mut acc: BTreeMap<MultiIndex, Quaternion> = BTreeMap::new();
    for (a, u) in &f.terms {
        for (b, v) in &g.terms {
            let d: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
            *acc.entry(d).or_insert(Quaternion::ZERO) += *u * *v;
        }
    }
    out.terms = acc;
    out.prune();
    Ok(out)
}

/// Splits `u = c + d j` with `c, d ∈ C(i)`, returned as complex coordinates.
#[inline]
pub fn split_cd(u: Quaternion, fr: &Frame) -> (Complex64, Complex64) {
    let d = split_components(u, fr);
    (Complex64::new(d[0], d[1]), Complex64::new(d[2], d[3]))
}

/// `c + d j` for complex coordinates in `C(i)`.
#[inline]
pub fn join_cd(c: Complex64, d: Complex64, fr: &Frame) -> Quaternion {
    let i = fr.i();
    i.embed(c) + i.embed(d) * fr.j().as_quaternion()
}

/// `(c ∗ c′) + (d ∗ d′) j`, the convolutions taken in `C(i)`.
pub fn bullet_product(f: &MultiSeries, g: &MultiSeries, fr: &Frame) -> Result<MultiSeries> {
    f.check_compatible(g)?;
    let fs: Vec<_> = f.terms.iter().map(|(a, u)| (a, split_cd(*u, fr))).collect();
    let gs: Vec<_> = g.terms.iter().map(|(a, u)| (a, split_cd(*u, fr))).collect();
    let mut acc: BTreeMap<MultiIndex, (Complex64, Complex64)> = BTreeMap::new();
    for (a, (c, d)) in &fs {
        for (b, (c2, d2)) in &gs {
            let idx: MultiIndex = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
            let e = acc.entry(idx).or_default();
            e.0 += c * c2;
            e.1 += d * d2;
        }
    }
    let mut out = MultiSeries::new(f.n, f.max_deg + g.max_deg, f.center.clone())?;
    out.terms = acc.into_iter().map(|(a, (c, d))| (a, join_cd(c, d, fr))).collect();
    out.prune();
    Ok(out)
}

/// `f^c`: every coefficient conjugated.
pub fn series_conjugate(f: &MultiSeries) -> MultiSeries {
    f.map_coeffs(|u| u.conj())
}

fn require_one_variable(f: &MultiSeries) -> Result<()> {
    if f.n != 1 {
        return Err(Error::ArityUnsupported { supported: 1, found: f.n });
    }
    Ok(())
}

/// `f^s = f ∗ f^c`; its coefficients are real.
pub fn symmetrize(f: &MultiSeries) -> Result<MultiSeries> {
    require_one_variable(f)?;
    star_product(f, &series_conjugate(f))
}

/// Solves `f ∗ g = 1` through degree `n_max` by `g_m = −u₀⁻¹ Σ_{k≥1} u_k g_{m−k}`.
fn inverse_recursion(f: &MultiSeries, n_max: u32) -> Result<MultiSeries> {
    let u0 = f.coeff(&[0]);
    let u0_inv = u0.inverse()?;
    let mut g = vec![Quaternion::ZERO; n_max as usize + 1];
    g[0] = u0_inv;
    for m in 1..=n_max as usize {
        let mut s = Quaternion::ZERO;
        for k in 1..=m {
            s += f.coeff(&[k as u32]) * g[m - k];
        }
        g[m] = -(u0_inv * s);
    }
    MultiSeries::from_terms(
        1,
        n_max,
        f.center.clone(),
        g.into_iter().enumerate().map(|(m, c)| (vec![m as u32], c)),
    )
}

/// Truncated star inverse `f^{−∗}` through degree `n_max`.
pub fn star_inverse(f: &MultiSeries, n_max: u32) -> Result<MultiSeries> {
    require_one_variable(f)?;
    let norm = f.coeff(&[0]).norm();
    if norm < INVERTIBLE_TOL {
        return Err(Error::NonInvertibleConstantTerm { norm });
    }
    inverse_recursion(f, n_max)
}

/// The same inverse computed as `(f^s)^{−∗} ∗ f^c`, truncated at `n_max`.
/// Real series are central for `∗`, which makes this a right inverse too.
pub fn star_inverse_via_symmetrization(f: &MultiSeries, n_max: u32) -> Result<MultiSeries> {
    require_one_variable(f)?;
    let norm = f.coeff(&[0]).norm();
    if norm < INVERTIBLE_TOL {
        return Err(Error::NonInvertibleConstantTerm { norm });
    }
    let fs = symmetrize(f)?.truncate(n_max);
    let inv = inverse_recursion(&fs, n_max)?;
    Ok(star_product(&inv, &series_conjugate(&f.truncate(n_max)))?.truncate(n_max))
}

/// Formal partial derivative in variable `k` (0-based).
pub fn coefficient_derivative(f: &MultiSeries, k: usize) -> Result<MultiSeries> {
    if k >= f.n {
        return Err(Error::SlotOutOfRange { slot: k, n: f.n });
    }
    let mut out = MultiSeries { terms: BTreeMap::new(), ..f.clone() };
    for (a, u) in &f.terms {
        if a[k] == 0 {
            continue;
        }
        let mut b = a.clone();
        b[k] -= 1;
        out.terms.insert(b, *u * a[k] as f64);
    }
    out.prune();
    Ok(out)
}

/// Applies [`coefficient_derivative`] `alpha[k]` times in every variable.
pub fn multi_derivative(f: &MultiSeries, alpha: &[u32]) -> Result<MultiSeries> {
    if alpha.len() != f.n {
        return Err(Error::DimensionMismatch { expected: f.n, found: alpha.len() });
    }
    let mut out = f.clone();
    for (k, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            out = coefficient_derivative(&out, k)?;
        }
    }
    Ok(out)
}

/// `(½[f(q) + f(q̄)], ½[f(q) − f(q̄)])` for series centered at the origin
/// and points strictly inside the unit ball.
pub fn holo_antiholo_split(f: &MultiSeries, p: &EvalPoint) -> Result<(Quaternion, Quaternion)> {
    if f.center.iter().any(|&c| c != 0.0) {
        return Err(Error::DomainUnsupported);
    }
    p.validate(f.n)?;
    if p.q.norm() >= 1.0 || p.zs.iter().any(|z| z.norm() >= 1.0) {
        return Err(Error::OutOfDomain("point is not strictly inside the unit ball".into()));
    }
    let a = eval_slice(f, p)?;
    let b = eval_slice(f, &p.conj_slot())?;
    Ok(((a + b) * 0.5, (a - b) * 0.5))
}

// ── Slot rebinding ───────────────────────────────────────────────────

/// A series read with a chosen quaternionic slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotView<'a> {
    pub series: &'a MultiSeries,
    pub slot: usize,
}

impl<'a> SlotView<'a> {
    pub fn new(series: &'a MultiSeries, slot: usize) -> Result<Self> {
        if slot >= series.n {
            return Err(Error::SlotOutOfRange { slot, n: series.n });
        }
        Ok(SlotView { series, slot })
    }

    /// Evaluates with `q` in the active slot and `zs` in the others.
    pub fn eval(&self, q: Quaternion, zs: &[Complex64], axis: UnitImaginary) -> Result<Quaternion> {
        eval_slice(self.series, &EvalPoint::new(self.slot, q, zs.to_vec(), axis))
    }
}

/// Exchanges the roles of slots `l` and `m`; coefficients are untouched.
pub fn gamma_swap<'a>(view: &SlotView<'a>, l: usize, m: usize) -> Result<SlotView<'a>> {
    let n = view.series.n;
    for s in [l, m] {
        if s >= n {
            return Err(Error::SlotOutOfRange { slot: s, n });
        }
    }
    let slot = if view.slot == l {
        m
    } else if view.slot == m {
        l
    } else {
        view.slot
    };
    Ok(SlotView { series: view.series, slot })
}
