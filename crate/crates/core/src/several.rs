//! Harmonic quadruples and the extension/restriction pair `P^ℓ`, `Q^ℓ`.
//!
//! A quadruple `(α, β, γ, δ)` lives on `∏ S_{Ω_k}`, a product of full discs in
//! the `(x_k, y_k)` planes. Given a frame `(i, j)` and a slot `ℓ`, it extends
//! to a function that is quaternionic in variable `ℓ`:
//!
//! `P^ℓ(q) = ½(1 + I_q i) X∘Inv^ℓ + ½(1 − I_q i) X`, with `X = α + iβ + jγ + ijδ`.
//!
//! Grid points are passed as slices of complex numbers `x_k + √-1 y_k`; they
//! are abstract coordinates, not elements of any particular slice.

use std::cell::RefCell;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{slice_coords, Frame, Quaternion, UnitImaginary};
use crate::series::{gamma_swap, split_cd, EvalPoint, MultiSeries, SlotView};
use crate::slice::{assemble_components, split_components};

/// Largest supported number of variables.
pub const MAX_ARITY: usize = 16;
/// Coefficients of a quadruple series may leave `C(i)` by at most this much.
pub const SLICE_TOL: f64 = 1e-12;
/// Interior fraction of the radius used by the identity grids.
pub const GRID_SHRINK: f64 = 0.9;

// ── Points and domains ───────────────────────────────────────────────

/// `(x_1, y_1, …, x_n, y_n)`, stored as `x_k + √-1 y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub coords: Vec<Complex64>,
}

impl GridPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        GridPoint { coords }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        GridPoint { coords: pairs.iter().map(|&(x, y)| Complex64::new(x, y)).collect() }
    }

    /// The point with `y_ℓ` negated.
    pub fn inv_ell(&self, l: usize) -> Result<GridPoint> {
        if l >= self.coords.len() {
            return Err(Error::SlotOutOfRange { slot: l, n: self.coords.len() });
        }
        let mut c = self.coords.clone();
        c[l] = c[l].conj();
        Ok(GridPoint { coords: c })
    }

    /// Every `y_k` negated.
    pub fn flip_all(&self) -> GridPoint {
        GridPoint { coords: self.coords.iter().map(|z| z.conj()).collect() }
    }
}

/// `Inv^ℓ` on a grid point.
pub fn inv_ell(p: &GridPoint, l: usize) -> Result<GridPoint> {
    p.inv_ell(l)
}

/// `∏ B⁴(c_k, r_k)` with real centers; its slice domain is a product of discs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    centers: Vec<f64>,
    radii: Vec<f64>,
}

impl Domain {
    pub fn new(centers: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::DimensionMismatch { expected: centers.len(), found: radii.len() });
        }
        if centers.is_empty() || centers.len() > MAX_ARITY {
            return Err(Error::ArityUnsupported { supported: MAX_ARITY, found: centers.len() });
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::Schema("domain radii must be positive and centers finite".into()));
        }
        Ok(Domain { centers, radii })
    }

    /// `B⁴(0, 1)ⁿ`.
    pub fn unit_balls(n: usize) -> Self {
        Domain::new(vec![0.0; n], vec![1.0; n]).expect("valid arity")
    }

    pub fn arity(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn is_unit_balls(&self) -> bool {
        self.centers.iter().all(|&c| c == 0.0) && self.radii.iter().all(|&r| r == 1.0)
    }

    pub fn contains(&self, p: &[Complex64]) -> bool {
        p.len() == self.arity()
            && p.iter()
                .zip(self.centers.iter().zip(&self.radii))
                .all(|(z, (c, r))| (z - c).norm_sqr() < r * r)
    }

    pub fn check(&self, p: &[Complex64]) -> Result<()> {
        if p.len() != self.arity() {
            return Err(Error::DimensionMismatch { expected: self.arity(), found: p.len() });
        }
        if !self.contains(p) {
            return Err(Error::OutOfDomain(format!("{p:?}")));
        }
        Ok(())
    }
}

// ── Sample grids ─────────────────────────────────────────────────────

/// A flat list of grid points sharing one arity.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    n: usize,
    data: Vec<Complex64>,
    /// Points per disc when the grid is a tensor product, last disc fastest.
    dims: Option<Vec<usize>>,
}

impl SampleGrid {
    pub fn from_points(n: usize, points: &[GridPoint]) -> Self {
        let data = points.iter().flat_map(|p| p.coords.iter().copied()).collect();
        SampleGrid { n, data, dims: None }
    }

    fn product(per_disc: &[Vec<Complex64>]) -> Self {
        let n = per_disc.len();
        let total: usize = per_disc.iter().map(|d| d.len()).product();
        let mut data = Vec::with_capacity(total * n);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            for k in 0..n {
                data.push(per_disc[k][idx[k]]);
            }
            for k in (0..n).rev() {
                idx[k] += 1;
                if idx[k] < per_disc[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        SampleGrid { n, data, dims: Some(per_disc.iter().map(|d| d.len()).collect()) }
    }

    /// Point indices ordered so that coordinate `l` varies fastest; plain
    /// order for grids without product structure.
    pub fn order_slot_fastest(&self, l: usize) -> Vec<usize> {
        let Some(dims) = self.dims.as_ref().filter(|d| l < d.len()) else {
            return (0..self.len()).collect();
        };
        // Row-major strides of the stored layout.
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let mut order = Vec::with_capacity(self.len());
        let outer: Vec<usize> = (0..dims.len()).filter(|&k| k != l).collect();
        let mut idx = vec![0usize; dims.len()];
        loop {
            let base: usize = outer.iter().map(|&k| idx[k] * strides[k]).sum();
            order.extend((0..dims[l]).map(|j| base + j * strides[l]));
            let mut carry = true;
            for &k in outer.iter().rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    carry = false;
                    break;
                }
                idx[k] = 0;
            }
            if carry {
                break;
            }
        }
        order
    }

    /// `per_coord × per_coord` tensor points per disc on the square inscribed
    /// in `GRID_SHRINK · r`, multiplied out over the discs.
    pub fn identity(domain: &Domain, per_coord: usize) -> Self {
        let discs: Vec<Vec<Complex64>> = domain
            .centers
            .iter()
            .zip(&domain.radii)
            .map(|(&c, &r)| {
                let a = GRID_SHRINK * r / std::f64::consts::SQRT_2;
                let t: Vec<f64> = (0..per_coord)
                    .map(|k| if per_coord == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (per_coord - 1) as f64 })
                    .collect();
                let mut pts = Vec::with_capacity(per_coord * per_coord);
                for &tx in &t {
                    for &ty in &t {
                        pts.push(Complex64::new(c + a * tx, a * ty));
                    }
                }
                pts
            })
            .collect();
        SampleGrid::product(&discs)
    }

    /// Boundary-biased nodes for sup-norm estimates: the disc center plus
    /// `radial` Chebyshev radii times `angular` equispaced angles per disc.
    pub fn sup(domain: &Domain, radial: usize, angular: usize) -> Self {
        let discs: Vec<Vec<Complex64>> = domain
            .centers
            .iter()
            .zip(&domain.radii)
            .map(|(&c, &r)| {
                let mut pts = vec![Complex64::new(c, 0.0)];
                for k in 1..=radial {
                    let rho = r * ((2 * k - 1) as f64 * std::f64::consts::PI / (4 * radial) as f64).cos();
                    for m in 0..angular {
                        let th = std::f64::consts::TAU * m as f64 / angular as f64;
                        pts.push(Complex64::new(c + rho * th.cos(), rho * th.sin()));
                    }
                }
                pts
            })
            .collect();
        SampleGrid::product(&discs)
    }

    /// The default sup grid: dense for one or two variables, coarser beyond.
    pub fn default_sup(domain: &Domain) -> Self {
        match domain.arity() {
            1 => SampleGrid::sup(domain, 8, 64),
            2 => SampleGrid::sup(domain, 4, 64),
            _ => SampleGrid::sup(domain, 2, 12),
        }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.n)
    }

    /// `max_k f(k, p_k)` over the grid, evaluated in parallel. The maximum is
    /// order independent, so the result is deterministic.
    pub fn par_max<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(usize, &[Complex64]) -> Result<f64> + Sync,
    {
        self.data
            .par_chunks_exact(self.n)
            .enumerate()
            .map(|(k, p)| f(k, p))
            .try_reduce(|| 0.0, |a, b| Ok(if b > a || b.is_nan() { b } else { a }))
    }
}

// ── Quadruple fields ─────────────────────────────────────────────────

/// A real quadruple `(α, β, γ, δ)` on `∏ S_{Ω_k}`.
pub trait QuadField: Send + Sync {
    fn domain(&self) -> &Domain;

    /// `(α, β, γ, δ)` at `p`.
    fn components(&self, p: &[Complex64]) -> [f64; 4];

    fn arity(&self) -> usize {
        self.domain().arity()
    }

    /// The series-backed quadruple behind this field, if there is one.
    fn as_harmonic(&self) -> Option<&HarmonicQuadruple> {
        None
    }

    /// Components at `p` and at `Inv^ℓ p`.
    fn components_pair(&self, p: &[Complex64], l: usize) -> ([f64; 4], [f64; 4]) {
        let mut buf = [Complex64::new(0.0, 0.0); MAX_ARITY];
        let n = p.len();
        buf[..n].copy_from_slice(p);
        buf[l] = buf[l].conj();
        (self.components(p), self.components(&buf[..n]))
    }
}

/// The zero quadruple.
#[derive(Debug, Clone)]
pub struct ZeroField {
    pub domain: Domain,
}

impl QuadField for ZeroField {
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn components(&self, _: &[Complex64]) -> [f64; 4] {
        [0.0; 4]
    }
}

thread_local! {
    static COLLAPSED: RefCell<CollapseMemo> = const { RefCell::new(CollapseMemo { id: u64::MAX, slot: 0, point: Vec::new(), tab: Vec::new(), acc: Vec::new() }) };
    static LAST_PAIR: RefCell<PairMemo> = const { RefCell::new(PairMemo { id: u64::MAX, slot: 0, point: Vec::new(), values: [Complex64::new(0.0, 0.0); 4] }) };
}

/// The last collapse of a table to a polynomial in `z_ℓ`. Its coefficients
/// depend only on the coordinates other than `ℓ`, so sweeping a product grid
/// with `z_ℓ` fastest reuses them across a whole row.
struct CollapseMemo {
    id: u64,
    slot: usize,
    point: Vec<Complex64>,
    tab: Vec<Complex64>,
    acc: Vec<Complex64>,
}

static NEXT_TABLE_ID: AtomicU64 = AtomicU64::new(0);

/// The most recent paired evaluation on this thread. Extension and restriction
/// revisit the same point and its `Inv^ℓ` mirror several times in a row, and
/// evaluation is a pure function of the point, so replaying it is exact.
struct PairMemo {
    id: u64,
    slot: usize,
    point: Vec<Complex64>,
    values: [Complex64; 4],
}

impl PairMemo {
    /// `Some(false)` on the stored point, `Some(true)` on its mirror.
    fn matches(&self, id: u64, p: &[Complex64]) -> Option<bool> {
        if self.id != id || self.point.len() != p.len() {
            return None;
        }
        let same_off = self.point.iter().zip(p).enumerate().all(|(k, (a, b))| k == self.slot || a == b);
        if !same_off {
            return None;
        }
        let (a, b) = (self.point[self.slot], p[self.slot]);
        if a == b {
            Some(false)
        } else if a == b.conj() {
            Some(true)
        } else {
            None
        }
    }
}

/// Flattened `(F, G)` coefficient table over the union of supports.
#[derive(Debug, Clone)]
struct PairTable {
    id: u64,
    n: usize,
    max_deg: u32,
    center: Vec<f64>,
    /// `k · stride + α_k` for every term and variable.
    offsets: Vec<u32>,
    f: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl PairTable {
    fn build(f: &MultiSeries, g: &MultiSeries, axis: UnitImaginary) -> Self {
        let mut keys: Vec<&Vec<u32>> = f.terms().keys().chain(g.terms().keys()).collect();
        keys.sort();
        keys.dedup();
        let coord = |u: Quaternion| axis.coordinates(u).0;
        let mut t = PairTable {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            n: f.n(),
            max_deg: f.max_deg().max(g.max_deg()),
            center: f.center().to_vec(),
            offsets: Vec::with_capacity(keys.len() * f.n()),
            f: Vec::with_capacity(keys.len()),
            g: Vec::with_capacity(keys.len()),
        };
        for a in keys {
            let stride = t.max_deg + 1;
            t.offsets.extend(a.iter().enumerate().map(|(k, &ak)| k as u32 * stride + ak));
            t.f.push(coord(f.coeff(a)));
            t.g.push(coord(g.coeff(a)));
        }
        t
    }

    /// `(F(p), G(p), F(Inv^ℓ p), G(Inv^ℓ p))`; the flipped pair is skipped
    /// (returned as zero) when `flip` is `None`.
    ///
    /// Both series are first collapsed to polynomials in one variable `z_ℓ`
    /// whose coefficients absorb the other variables, then evaluated by Horner
    /// at `z_ℓ` and, for the flipped pair, at its conjugate.
    fn eval(&self, p: &[Complex64], flip: Option<usize>) -> [Complex64; 4] {
        let n = self.n;
        let l = flip.unwrap_or(0);
        let stride = self.max_deg as usize + 1;
        let zero = Complex64::new(0.0, 0.0);
        COLLAPSED.with(|cell| {
            let mut memo = cell.borrow_mut();
            let m = &mut *memo;
            let fresh = m.id == self.id
                && m.slot == l
                && m.point.len() == n
                && m.point.iter().zip(p).enumerate().all(|(k, (a, b))| k == l || a == b);
            if !fresh {
                m.tab.clear();
                m.tab.resize(n * stride, zero);
                m.acc.clear();
                m.acc.resize(2 * stride, zero);
                self.collapse_at(p, l, stride, &mut m.tab, &mut m.acc);
                m.id = self.id;
                m.slot = l;
                m.point.clear();
                m.point.extend_from_slice(p);
            }
            let horner = |coeffs: &[Complex64], z: Complex64| coeffs.iter().rev().fold(zero, |s, &c| s * z + c);
            let z = p[l] - self.center[l];
            let (fa, ga) = m.acc.split_at(stride);
            let mut out = [horner(fa, z), horner(ga, z), zero, zero];
            if flip.is_some() {
                out[2] = horner(fa, z.conj());
                out[3] = horner(ga, z.conj());
            }
            out
        })
    }

    fn collapse_at(&self, p: &[Complex64], l: usize, stride: usize, tab: &mut [Complex64], acc: &mut [Complex64]) {
        let n = self.n;
        let one = Complex64::new(1.0, 0.0);
        // Row `l` is all ones so every term is a plain product over all rows.
        for k in 0..n {
            let row = &mut tab[k * stride..(k + 1) * stride];
            if k == l {
                row.fill(one);
                continue;
            }
            let z = p[k] - self.center[k];
            let mut w = one;
            for slot in row {
                *slot = w;
                w *= z;
            }
        }
        match n {
            1 => self.collapse::<1>(tab, l, stride, acc),
            2 => self.collapse::<2>(tab, l, stride, acc),
            3 => self.collapse::<3>(tab, l, stride, acc),
            4 => self.collapse::<4>(tab, l, stride, acc),
            _ => self.collapse_dyn(tab, l, stride, acc),
        }
    }

    /// Accumulates the coefficients of `z_ℓ^a` into `acc[a]` (for `F`) and
    /// `acc[stride + a]` (for `G`).
    #[inline]
    fn collapse<const N: usize>(&self, tab: &[Complex64], l: usize, stride: usize, acc: &mut [Complex64]) {
        for ((off, f), g) in self.offsets.chunks_exact(N).zip(&self.f).zip(&self.g) {
            let off: &[u32; N] = off.try_into().expect("chunk of N");
            let mut c = tab[off[0] as usize];
            for &o in &off[1..] {
                c *= tab[o as usize];
            }
            let a = off[l] as usize - l * stride;
            acc[a] += c * f;
            acc[stride + a] += c * g;
        }
    }

    fn collapse_dyn(&self, tab: &[Complex64], l: usize, stride: usize, acc: &mut [Complex64]) {
        for ((off, f), g) in self.offsets.chunks_exact(self.n).zip(&self.f).zip(&self.g) {
            let c = off.iter().fold(Complex64::new(1.0, 0.0), |c, &o| c * tab[o as usize]);
            let a = off[l] as usize - l * stride;
            acc[a] += c * f;
            acc[stride + a] += c * g;
        }
    }
}

/// `(α, β, γ, δ) = (Re F, Im F, Re G, Im G)` for two holomorphic series whose
/// coefficients lie in `C(frame.i)`.
#[derive(Debug, Clone)]
pub struct HarmonicQuadruple {
    f: MultiSeries,
    g: MultiSeries,
    frame: Frame,
    domain: Domain,
    table: Arc<PairTable>,
}

#[derive(Serialize, Deserialize)]
struct QuadRepr {
    frame: Frame,
    #[serde(rename = "F")]
    f: MultiSeries,
    #[serde(rename = "G")]
    g: MultiSeries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radii: Option<Vec<f64>>,
}

impl Serialize for HarmonicQuadruple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let default = Domain::new(self.f.center().to_vec(), vec![1.0; self.f.n()]).ok();
        let radii = (Some(&self.domain) != default.as_ref()).then(|| self.domain.radii.clone());
        QuadRepr { frame: self.frame, f: self.f.clone(), g: self.g.clone(), radii }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HarmonicQuadruple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QuadRepr::deserialize(d)?;
        let radii = r.radii.unwrap_or_else(|| vec![1.0; r.f.n()]);
        let domain = Domain::new(r.f.center().to_vec(), radii).map_err(serde::de::Error::custom)?;
        HarmonicQuadruple::with_domain(r.f, r.g, r.frame, domain).map_err(serde::de::Error::custom)
    }
}

fn check_in_slice(s: &MultiSeries, axis: UnitImaginary) -> Result<()> {
    for (a, u) in s.terms() {
        let (_, residual) = axis.coordinates(*u);
        if residual > SLICE_TOL {
            return Err(Error::NotInSlice { alpha: a.clone(), residual });
        }
    }
    Ok(())
}

impl HarmonicQuadruple {
    /// Quadruple on the unit balls about the series centers.
    pub fn new(f: MultiSeries, g: MultiSeries, frame: Frame) -> Result<Self> {
        let domain = Domain::new(f.center().to_vec(), vec![1.0; f.n()])?;
        HarmonicQuadruple::with_domain(f, g, frame, domain)
    }

    pub fn with_domain(f: MultiSeries, g: MultiSeries, frame: Frame, domain: Domain) -> Result<Self> {
        f.check_compatible(&g)?;
        if domain.centers() != f.center() {
            return Err(Error::CenterMismatch);
        }
        check_in_slice(&f, frame.i())?;
        check_in_slice(&g, frame.i())?;
        let table = Arc::new(PairTable::build(&f, &g, frame.i()));
        Ok(HarmonicQuadruple { f, g, frame, domain, table })
    }

    /// Builds `F`, `G` from complex coefficient lists `(α, c_α)` embedded in `C(frame.i)`.
    pub fn from_complex(
        n: usize,
        max_deg: u32,
        center: Vec<f64>,
        f: &[(Vec<u32>, Complex64)],
        g: &[(Vec<u32>, Complex64)],
        frame: Frame,
    ) -> Result<Self> {
        let i = frame.i();
        let fs = MultiSeries::from_terms(n, max_deg, center.clone(), f.iter().map(|(a, c)| (a.clone(), i.embed(*c))))?;
        let gs = MultiSeries::from_terms(n, max_deg, center, g.iter().map(|(a, c)| (a.clone(), i.embed(*c))))?;
        HarmonicQuadruple::new(fs, gs, frame)
    }

    /// Splits every coefficient of `u` as `c + d j` in `frame`.
    pub fn from_series(u: &MultiSeries, frame: Frame) -> Result<Self> {
        let i = frame.i();
        let mut f = MultiSeries::new(u.n(), u.max_deg(), u.center().to_vec())?;
        let mut g = f.clone();
        for (a, v) in u.terms() {
            let (c, d) = split_cd(*v, &frame);
            f.add_term(a.clone(), i.embed(c))?;
            g.add_term(a.clone(), i.embed(d))?;
        }
        HarmonicQuadruple::new(f, g, frame)
    }

    pub fn zero(n: usize, frame: Frame) -> Self {
        HarmonicQuadruple::new(MultiSeries::zero(n, 0), MultiSeries::zero(n, 0), frame).expect("zero is valid")
    }

    pub fn f(&self) -> &MultiSeries {
        &self.f
    }

    pub fn g(&self) -> &MultiSeries {
        &self.g
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// The same quadruple on a different domain.
    pub fn on_domain(&self, domain: Domain) -> Result<Self> {
        HarmonicQuadruple::with_domain(self.f.clone(), self.g.clone(), self.frame, domain)
    }

    /// `(F(p), G(p))` as complex numbers.
    pub fn eval_fg(&self, p: &[Complex64]) -> (Complex64, Complex64) {
        let v = self.table.eval(p, None);
        (v[0], v[1])
    }

    /// The series `Σ (c_α + d_α j)` whose slot-`ℓ` evaluation is `P^ℓ`.
    pub fn as_series(&self) -> MultiSeries {
        self.f.add(&self.g.right_mul(self.frame.j().as_quaternion())).expect("compatible")
    }

    /// Same quadruple data decoded against another frame's slice; this is the
    /// identity on `(α, β, γ, δ)`.
    pub fn reframed(&self, frame: Frame) -> Self {
        if frame == self.frame {
            return self.clone();
        }
        let re = |s: &MultiSeries| s.map_coeffs(|u| frame.i().embed(self.frame.i().coordinates(u).0));
        HarmonicQuadruple::with_domain(re(&self.f), re(&self.g), frame, self.domain.clone()).expect("embedded")
    }

    /// `(F + F′, G + G′)`.
    pub fn add(&self, other: &HarmonicQuadruple) -> Result<Self> {
        let other = other.reframed(self.frame);
        HarmonicQuadruple::with_domain(self.f.add(&other.f)?, self.g.add(&other.g)?, self.frame, self.domain.clone())
    }
}

impl QuadField for HarmonicQuadruple {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn as_harmonic(&self) -> Option<&HarmonicQuadruple> {
        Some(self)
    }

    fn components(&self, p: &[Complex64]) -> [f64; 4] {
        let id = self.table.id;
        let hit = LAST_PAIR.with(|m| {
            let m = m.borrow();
            m.matches(id, p).map(|mirror| if mirror { [m.values[2], m.values[3]] } else { [m.values[0], m.values[1]] })
        });
        let [f, g] = hit.unwrap_or_else(|| {
            let v = self.table.eval(p, None);
            [v[0], v[1]]
        });
        [f.re, f.im, g.re, g.im]
    }

    fn components_pair(&self, p: &[Complex64], l: usize) -> ([f64; 4], [f64; 4]) {
        let id = self.table.id;
        let v = LAST_PAIR.with(|m| {
            let mut m = m.borrow_mut();
            match m.matches(id, p) {
                Some(false) if m.slot == l => m.values,
                Some(true) if m.slot == l => [m.values[2], m.values[3], m.values[0], m.values[1]],
                _ => {
                    let v = self.table.eval(p, Some(l));
                    m.id = id;
                    m.slot = l;
                    m.point.clear();
                    m.point.extend_from_slice(p);
                    m.values = v;
                    v
                }
            }
        });
        ([v[0].re, v[0].im, v[1].re, v[1].im], [v[2].re, v[2].im, v[3].re, v[3].im])
    }
}

// ── Extension ────────────────────────────────────────────────────────

/// Inserts `z` at position `l` of `others` into `buf`.
#[inline]
fn insert_slot<'a>(buf: &'a mut [Complex64; MAX_ARITY], others: &[Complex64], l: usize, z: Complex64) -> &'a [Complex64] {
    let n = others.len() + 1;
    buf[..l].copy_from_slice(&others[..l]);
    buf[l] = z;
    buf[l + 1..n].copy_from_slice(&others[l..]);
    &buf[..n]
}

/// Copies `p` without entry `l` into `buf`.
#[inline]
fn remove_slot<'a>(buf: &'a mut [Complex64; MAX_ARITY], p: &[Complex64], l: usize) -> &'a [Complex64] {
    let n = p.len();
    buf[..l].copy_from_slice(&p[..l]);
    buf[l..n - 1].copy_from_slice(&p[l + 1..]);
    &buf[..n - 1]
}

/// `P^ℓ_{i,j}[(α, β, γ, δ)]` at `(…, q, …)`; `others` omits slot `l`.
pub fn p_ell(quad: &dyn QuadField, fr: &Frame, l: usize, q: Quaternion, others: &[Complex64]) -> Result<Quaternion> {
    let n = quad.arity();
    if others.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n, found: others.len() + 1 });
    }
    if l >= n {
        return Err(Error::SlotOutOfRange { slot: l, n });
    }
    let sc = slice_coords(q);
    let mut buf = [Complex64::new(0.0, 0.0); MAX_ARITY];
    let p = insert_slot(&mut buf, others, l, Complex64::new(sc.x, sc.y));
    p_ell_inner(quad, fr, l, p, sc.axis)
}

/// [`p_ell`] at `q = x_ℓ + I y_ℓ` read off a full grid point, without the
/// round trip through `slice_coords`.
pub fn p_ell_at(quad: &dyn QuadField, fr: &Frame, l: usize, p: &[Complex64], axis: UnitImaginary) -> Result<Quaternion> {
    let n = quad.arity();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    if l >= n {
        return Err(Error::SlotOutOfRange { slot: l, n });
    }
    if p[l].im >= 0.0 {
        return p_ell_inner(quad, fr, l, p, axis);
    }
    let mut buf = [Complex64::new(0.0, 0.0); MAX_ARITY];
    buf[..n].copy_from_slice(p);
    buf[l] = buf[l].conj();
    p_ell_inner(quad, fr, l, &buf[..n], axis.negate())
}

/// `p[l]` has `y ≥ 0` and `i_q` is the axis of the quaternionic slot.
#[inline]
fn p_ell_inner(quad: &dyn QuadField, fr: &Frame, l: usize, p: &[Complex64], i_q: UnitImaginary) -> Result<Quaternion> {
    quad.domain().check(p)?;
    let (x, x_inv) = quad.components_pair(p, l);
    Ok(combine_halves(fr, i_q, &x, &x_inv))
}

/// `½(1 + I_q i) X(Inv^ℓ p) + ½(1 − I_q i) X(p)` from the two component
/// vectors, written as `½(a + b) + ½ I_q i (a − b)`.
#[inline]
fn combine_halves(fr: &Frame, i_q: UnitImaginary, x: &[f64; 4], x_inv: &[f64; 4]) -> Quaternion {
    let sum = [x_inv[0] + x[0], x_inv[1] + x[1], x_inv[2] + x[2], x_inv[3] + x[3]];
    let diff = [x_inv[0] - x[0], x_inv[1] - x[1], x_inv[2] - x[2], x_inv[3] - x[3]];
    let ii = i_q.as_quaternion() * fr.i().as_quaternion();
    (assemble_components(sum, fr) + ii * assemble_components(diff, fr)) * 0.5
}

/// A function quaternionic in one slot, complex in the others.
pub trait SlotFunction: Send + Sync {
    fn domain(&self) -> &Domain;
    fn slot(&self) -> usize;
    /// Value at `(…, q, …)`; `others` omits the active slot.
    fn eval(&self, q: Quaternion, others: &[Complex64]) -> Result<Quaternion>;

    fn arity(&self) -> usize {
        self.domain().arity()
    }

    /// Value with the active slot at `x_ℓ + I y_ℓ` taken from a full grid point.
    fn eval_at(&self, p: &[Complex64], axis: UnitImaginary) -> Result<Quaternion> {
        let l = self.slot();
        let mut buf = [Complex64::new(0.0, 0.0); MAX_ARITY];
        self.eval(axis.embed(p[l]), remove_slot(&mut buf, p, l))
    }
}

/// `P^ℓ_{i,j}` of a quadruple field: an element of the base space.
#[derive(Clone)]
pub struct Extension {
    pub quad: Arc<dyn QuadField>,
    pub frame: Frame,
    pub slot: usize,
}

impl Extension {
    pub fn new(quad: Arc<dyn QuadField>, frame: Frame, slot: usize) -> Result<Self> {
        if slot >= quad.arity() {
            return Err(Error::SlotOutOfRange { slot, n: quad.arity() });
        }
        Ok(Extension { quad, frame, slot })
    }
}

impl std::fmt::Debug for Extension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Extension").field("frame", &self.frame).field("slot", &self.slot).finish_non_exhaustive()
    }
}

impl SlotFunction for Extension {
    fn domain(&self) -> &Domain {
        self.quad.domain()
    }
    fn slot(&self) -> usize {
        self.slot
    }
    fn eval(&self, q: Quaternion, others: &[Complex64]) -> Result<Quaternion> {
        p_ell(self.quad.as_ref(), &self.frame, self.slot, q, others)
    }
    fn eval_at(&self, p: &[Complex64], axis: UnitImaginary) -> Result<Quaternion> {
        p_ell_at(self.quad.as_ref(), &self.frame, self.slot, p, axis)
    }
}

/// A series read through `eval_slice` with a fixed slot and slice axis.
#[derive(Debug, Clone)]
pub struct SeriesFunction {
    pub series: MultiSeries,
    pub axis: UnitImaginary,
    pub slot: usize,
    pub domain: Domain,
}

impl SeriesFunction {
    pub fn new(series: MultiSeries, axis: UnitImaginary, slot: usize) -> Result<Self> {
        if slot >= series.n() {
            return Err(Error::SlotOutOfRange { slot, n: series.n() });
        }
        let domain = Domain::new(series.center().to_vec(), vec![1.0; series.n()])?;
        Ok(SeriesFunction { series, axis, slot, domain })
    }
}

impl SlotFunction for SeriesFunction {
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn slot(&self) -> usize {
        self.slot
    }
    fn eval(&self, q: Quaternion, others: &[Complex64]) -> Result<Quaternion> {
        crate::series::eval_slice(&self.series, &EvalPoint::new(self.slot, q, others.to_vec(), self.axis))
    }
}

// ── Restriction ──────────────────────────────────────────────────────

/// `(E_1, …, E_4)`: the frame components of `h(…, x_ℓ + i y_ℓ, …)`.
pub fn e_components(h: &dyn SlotFunction, fr: &Frame, p: &[Complex64]) -> Result<[f64; 4]> {
    h.domain().check(p)?;
    Ok(split_components(h.eval_at(p, fr.i())?, fr))
}

/// `Q^ℓ_{i,j}[h]` as a quadruple field.
#[derive(Clone)]
pub struct Restriction {
    pub h: Arc<dyn SlotFunction>,
    pub frame: Frame,
}

impl QuadField for Restriction {
    fn domain(&self) -> &Domain {
        self.h.domain()
    }
    fn components(&self, p: &[Complex64]) -> [f64; 4] {
        // Grid points handed to a field are in its domain by contract.
        match self.h.eval_at(p, self.frame.i()) {
            Ok(v) => split_components(v, &self.frame),
            Err(_) => [f64::NAN; 4],
        }
    }
}

/// Largest absolute component difference.
#[inline]
pub fn max_diff4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

/// Fixed off-slice directions used when probing slot functions away from the
/// frame slice.
pub fn probe_axes() -> [UnitImaginary; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        UnitImaginary::normalize([0.48, -0.6, 0.64]).expect("nonzero"),
        UnitImaginary::E3,
        UnitImaginary::normalize([s, s, -s]).expect("nonzero"),
        UnitImaginary::normalize([-0.8, 0.0, 0.6]).expect("nonzero"),
    ]
}

/// Residuals of `Q^ℓ ∘ P^ℓ = id` (on the quadruple) and `P^ℓ ∘ Q^ℓ = id`
/// (on its extension, probed off the frame slice) over `grid`.
pub fn q_after_p_roundtrip(quad: Arc<dyn QuadField>, fr: &Frame, l: usize, grid: &SampleGrid) -> Result<(f64, f64)> {
    let ext = Extension::new(quad.clone(), *fr, l)?;
    let axes = probe_axes();
    // Both directions in one sweep with `z_ℓ` varying fastest. The components
    // of `Q^ℓ[ext]` at `p` and `Inv^ℓ p` serve both the comparison with the
    // quadruple and the re-extension, as `Restriction` would compute them.
    let order = grid.order_slot_fastest(l);
    let per: Vec<Result<(f64, f64)>> = order
        .par_iter()
        .map(|&k| {
            let p = grid.point(k);
            let e = e_components(&ext, fr, p)?;
            let mut buf = [Complex64::new(0.0, 0.0); MAX_ARITY];
            buf[..p.len()].copy_from_slice(p);
            buf[l] = buf[l].conj();
            let e_inv = e_components(&ext, fr, &buf[..p.len()])?;
            let qp = max_diff4(&e, &quad.components(p));
            let axis = axes[k % axes.len()];
            let direct = ext.eval_at(p, axis)?;
            let round = if p[l].im >= 0.0 {
                combine_halves(fr, axis, &e, &e_inv)
            } else {
                combine_halves(fr, axis.negate(), &e_inv, &e)
            };
            Ok((qp, direct.max_abs_diff(&round)))
        })
        .collect();
    let max = |a: f64, b: f64| if b > a || b.is_nan() { b } else { a };
    let mut out = (0.0f64, 0.0f64);
    for r in per {
        let (a, b) = r?;
        out = (max(out.0, a), max(out.1, b));
    }
    Ok(out)
}

// ── Families over the coordinate slice extension ─────────────────────

/// `𝒫[h] = (𝒫_1[h], …, 𝒫_n[h])` for a quadruple and frame.
#[derive(Clone)]
pub struct SliceRegularFamily {
    pub quad: Arc<dyn QuadField>,
    pub frame: Frame,
}

impl SliceRegularFamily {
    pub fn arity(&self) -> usize {
        self.quad.arity()
    }

    /// `𝒫_ℓ[h]`.
    pub fn member(&self, l: usize) -> Result<Extension> {
        Extension::new(self.quad.clone(), self.frame, l)
    }

    /// Value of the family on `Ω̃_ℓ`.
    pub fn eval(&self, l: usize, q: Quaternion, others: &[Complex64]) -> Result<Quaternion> {
        p_ell(self.quad.as_ref(), &self.frame, l, q, others)
    }
}

pub fn family_project(quad: Arc<dyn QuadField>, frame: Frame) -> SliceRegularFamily {
    SliceRegularFamily { quad, frame }
}

/// `Γ²_{ℓ,m}` on base functions: the same quadruple extended in the other slot.
pub fn gamma_swap_extension(f: &Extension, l: usize, m: usize) -> Result<Extension> {
    let n = f.quad.arity();
    for s in [l, m] {
        if s >= n {
            return Err(Error::SlotOutOfRange { slot: s, n });
        }
    }
    let slot = if f.slot == l {
        m
    } else if f.slot == m {
        l
    } else {
        f.slot
    };
    Extension::new(f.quad.clone(), f.frame, slot)
}

/// Residual of the commuting square: `Γ²_{ℓ,m}` applied to the series view in
/// slot `ℓ` against `P^m` computed from the complex components.
pub fn gamma_square_residual(quad: &HarmonicQuadruple, l: usize, m: usize, grid: &SampleGrid) -> Result<f64> {
    let series = quad.as_series();
    let view = gamma_swap(&SlotView::new(&series, l)?, l, m)?;
    let fr = quad.frame();
    let axes = probe_axes();
    grid.par_max(|k, p| {
        let mut others = p.to_vec();
        let z = others.remove(view.slot);
        let q = axes[k % axes.len()].embed(z);
        let a = view.eval(q, &others, fr.i())?;
        let b = p_ell(quad, &fr, m, q, &others)?;
        Ok(a.max_abs_diff(&b))
    })
}


// ── Sup norms ────────────────────────────────────────────────────────

/// `sup_{I ∈ S²} ‖a + I b‖ = √(‖a‖² + ‖b‖² + 2‖vec(a b̄)‖)`.
#[inline]
pub fn sphere_sup(a: Quaternion, b: Quaternion) -> f64 {
    (a.norm_sqr() + b.norm_sqr() + 2.0 * (a * b.conj()).vector_norm()).sqrt()
}

/// `sup_{I ∈ S²} ‖f(x + I y) − g(x + I y)‖` at one grid point, exact in `I`
/// for functions satisfying the Representation Formula in the active slot.
pub fn sphere_sup_diff(f: &dyn SlotFunction, g: Option<&dyn SlotFunction>, p: &[Complex64]) -> Result<f64> {
    let axis = UnitImaginary::E1;
    let l = f.slot();
    let mut pm = p.to_vec();
    pm[l] = pm[l].conj();
    let mut fp = f.eval_at(p, axis)?;
    let mut fm = f.eval_at(&pm, axis)?;
    if let Some(g) = g {
        fp -= g.eval_at(p, axis)?;
        fm -= g.eval_at(&pm, axis)?;
    }
    let a = (fp + fm) * 0.5;
    let b = axis.as_quaternion() * (fm - fp) * 0.5;
    Ok(sphere_sup(a, b))
}

/// `‖f − g‖_∞` over `Ω̃_ℓ` estimated on `grid` (exact over the sphere of axes).
pub fn sup_norm_diff(f: &dyn SlotFunction, g: Option<&dyn SlotFunction>, grid: &SampleGrid) -> Result<f64> {
    grid.par_max(|_, p| sphere_sup_diff(f, g, p))
}

/// `sup |component_k|` for each of the four components.
pub fn component_sups(quad: &dyn QuadField, grid: &SampleGrid) -> [f64; 4] {
    component_sups_diff(quad, None, grid)
}

/// Componentwise `sup |A_k − B_k|`.
pub fn component_sups_diff(a: &dyn QuadField, b: Option<&dyn QuadField>, grid: &SampleGrid) -> [f64; 4] {
    let per: Vec<[f64; 4]> = grid
        .data
        .par_chunks_exact(grid.n)
        .map(|p| {
            let x = a.components(p);
            let y = b.map(|b| b.components(p)).unwrap_or([0.0; 4]);
            [(x[0] - y[0]).abs(), (x[1] - y[1]).abs(), (x[2] - y[2]).abs(), (x[3] - y[3]).abs()]
        })
        .collect();
    per.into_iter().fold([0.0; 4], |m, v| [m[0].max(v[0]), m[1].max(v[1]), m[2].max(v[2]), m[3].max(v[3])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::eval_slice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    /// `F = z1 z2 + z2²`, `G = z1² − 3 z2` in the frame `(e1, e2)`, on discs of radius 2.
    fn example_quad() -> HarmonicQuadruple {
        let q = HarmonicQuadruple::from_complex(
            2,
            2,
            vec![0.0, 0.0],
            &[(vec![1, 1], c(1.0, 0.0)), (vec![0, 2], c(1.0, 0.0))],
            &[(vec![2, 0], c(1.0, 0.0)), (vec![0, 1], c(-3.0, 0.0))],
            Frame::STANDARD,
        )
        .unwrap();
        q.on_domain(Domain::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap()).unwrap()
    }

    #[test]
    fn inv_ell_examples() {
        let p = GridPoint::from_pairs(&[(1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(inv_ell(&p, 1).unwrap(), GridPoint::from_pairs(&[(1.0, 2.0), (3.0, -4.0)]));
        let p0 = GridPoint::from_pairs(&[(1.0, 0.0)]);
        assert_eq!(inv_ell(&p0, 0).unwrap(), p0);
        assert_eq!(inv_ell(&inv_ell(&p, 0).unwrap(), 0).unwrap(), p);
        assert!(inv_ell(&p, 2).is_err());
    }

    #[test]
    fn example_extension_values() {
        let quad = example_quad();
        let fr = Frame::STANDARD;
        let v = p_ell(&quad, &fr, 0, Quaternion::E1, &[c(1.0, 0.0)]).unwrap();
        assert!(v.max_abs_diff(&Quaternion::new(1.0, 1.0, -4.0, 0.0)) < 1e-15);

        // Negative y in the frame slice picks the flipped components.
        let (x, y, x2) = (0.2, 0.3, c(0.1, -0.4));
        let q = fr.i().embed(c(x, -y));
        let v = p_ell(&quad, &fr, 0, q, &[x2]).unwrap();
        let (f, g) = quad.eval_fg(&[c(x, -y), x2]);
        let expected = fr.i().embed(f) + fr.i().embed(g) * Quaternion::E2;
        assert!(v.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn real_q_is_axis_independent() {
        let g0 = HarmonicQuadruple::from_complex(
            2, 2, vec![0.0, 0.0],
            &[(vec![1, 1], c(0.3, 1.0)), (vec![0, 2], c(1.0, -0.5))],
            &[],
            Frame::STANDARD,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = p_ell(&g0, &Frame::STANDARD, 0, Quaternion::real(0.4), &[c(0.2, 0.1)]).unwrap();
        let (f, _) = g0.eval_fg(&[c(0.4, 0.0), c(0.2, 0.1)]);
        assert!(base.max_abs_diff(&Frame::STANDARD.i().embed(f)) < 1e-15);
        for _ in 0..10 {
            let fr = crate::random::random_frame(&mut rng);
            let q0 = g0.reframed(fr);
            let v = p_ell(&q0, &fr, 0, Quaternion::real(0.4), &[c(0.2, 0.1)]).unwrap();
            let w = fr.i().embed(f);
            assert!(v.max_abs_diff(&w) < 1e-14);
        }
    }

    #[test]
    fn e_components_examples() {
        let quad = Arc::new(example_quad());
        let fr = Frame::STANDARD;
        let one = SeriesFunction::new(MultiSeries::constant(2, Quaternion::ONE), fr.i(), 0).unwrap();
        assert_eq!(e_components(&one, &fr, &[c(0.1, 0.2), c(0.3, 0.0)]).unwrap(), [1.0, 0.0, 0.0, 0.0]);

        let h = Extension::new(quad.clone(), fr, 0).unwrap();
        let e = e_components(&h, &fr, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(e, [2.0, 0.0, -2.0, 0.0]);
        assert!(e_components(&h, &fr, &[c(2.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn one_variable_e_is_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fr = crate::random::random_frame(&mut rng);
        let quad = crate::random::random_quad(&mut rng, 1, 4, fr);
        let h = Extension::new(Arc::new(quad), fr, 0).unwrap();
        let z = c(0.3, -0.2);
        let v = h.eval(fr.i().embed(z), &[]).unwrap();
        assert_eq!(e_components(&h, &fr, &[z]).unwrap(), split_components(v, &fr));
    }

    #[test]
    fn series_route_matches_extension() {
        let quad = example_quad();
        let u = quad.as_series();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (x, y) = crate::random::random_in_disc(&mut rng, 0.0, 0.9);
            let axis = crate::random::random_unit_imaginary(&mut rng);
            let q = axis.embed(c(x, y));
            let z2 = c(0.3, -0.4);
            for l in 0..2 {
                let a = p_ell(&quad, &Frame::STANDARD, l, q, &[z2]).unwrap();
                let b = eval_slice(&u, &EvalPoint::new(l, q, vec![z2], Frame::STANDARD.i())).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-14);
            }
        }
        let back = HarmonicQuadruple::from_series(&u, Frame::STANDARD).unwrap();
        assert_eq!(back.f(), quad.f());
        assert_eq!(back.g(), quad.g());
    }

    #[test]
    fn roundtrip_zero_and_example() {
        let fr = Frame::STANDARD;
        let zero: Arc<dyn QuadField> = Arc::new(HarmonicQuadruple::zero(2, fr));
        let grid = SampleGrid::identity(zero.domain(), 4);
        assert_eq!(q_after_p_roundtrip(zero, &fr, 0, &grid).unwrap(), (0.0, 0.0));

        let quad: Arc<dyn QuadField> = Arc::new(example_quad());
        let grid = SampleGrid::identity(quad.domain(), 8);
        for l in 0..2 {
            let (a, b) = q_after_p_roundtrip(quad.clone(), &fr, l, &grid).unwrap();
            assert!(a <= 1e-11 && b <= 1e-11, "{a} {b}");
        }
    }

    #[test]
    fn roundtrip_random_quads() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let fr = crate::random::random_frame(&mut rng);
            let quad: Arc<dyn QuadField> = Arc::new(crate::random::random_quad(&mut rng, 2, 4, fr));
            let grid = SampleGrid::identity(quad.domain(), 4);
            let (a, b) = q_after_p_roundtrip(quad, &fr, 1, &grid).unwrap();
            assert!(a <= 1e-10 && b <= 1e-10);
        }
    }

    #[test]
    fn family_right_linear_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Quaternion::E3;
        for _ in 0..5 {
            let fr = crate::random::random_frame(&mut rng);
            let f = crate::random::random_quad(&mut rng, 2, 3, fr);
            let g = crate::random::random_quad(&mut rng, 2, 3, fr);
            let fa_g = HarmonicQuadruple::from_series(&f.as_series().right_mul(a).add(&g.as_series()).unwrap(), fr).unwrap();
            let fam = |q: HarmonicQuadruple| family_project(Arc::new(q), fr);
            let (pf, pg, pfg) = (fam(f.clone()), fam(g.clone()), fam(fa_g));
            for _ in 0..20 {
                let axis = crate::random::random_unit_imaginary(&mut rng);
                let (x, y) = crate::random::random_in_disc(&mut rng, 0.0, 0.9);
                let (x2, y2) = crate::random::random_in_disc(&mut rng, 0.0, 0.9);
                let q = axis.embed(c(x, y));
                for l in 0..2 {
                    let lhs = pfg.eval(l, q, &[c(x2, y2)]).unwrap();
                    let rhs = pf.eval(l, q, &[c(x2, y2)]).unwrap() * a + pg.eval(l, q, &[c(x2, y2)]).unwrap();
                    assert!(lhs.max_abs_diff(&rhs) < 1e-11);
                }
            }
            let grid = SampleGrid::identity(f.domain(), 4);
            assert!(gamma_square_residual(&f, 0, 1, &grid).unwrap() < 1e-11);
            assert!(gamma_square_residual(&f, 1, 0, &grid).unwrap() < 1e-11);
        }
        let zero = family_project(Arc::new(HarmonicQuadruple::zero(2, Frame::STANDARD)), Frame::STANDARD);
        assert_eq!(zero.eval(1, Quaternion::new(0.1, 0.2, 0.3, 0.1), &[c(0.1, 0.1)]).unwrap(), Quaternion::ZERO);
    }

    #[test]
    fn conjugate_harmonic_components() {
        // Central differences: the Cauchy–Riemann residual is O(h²).
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fr = crate::random::random_frame(&mut rng);
        let quad = Arc::new(crate::random::random_quad(&mut rng, 2, 4, fr));
        let h: Arc<dyn SlotFunction> = Arc::new(Extension::new(quad, fr, 0).unwrap());
        let e = Restriction { h, frame: fr };
        let p = [c(0.21, -0.17), c(-0.3, 0.12)];
        let residual = |step: f64| {
            let mut worst: f64 = 0.0;
            for k in 0..2 {
                let shift = |dz: Complex64| {
                    let mut q = p;
                    q[k] += dz;
                    e.components(&q)
                };
                let (xp, xm, yp, ym) = (shift(c(step, 0.0)), shift(c(-step, 0.0)), shift(c(0.0, step)), shift(c(0.0, -step)));
                for (re, im) in [(0, 1), (2, 3)] {
                    let dx = |v: usize| (xp[v] - xm[v]) / (2.0 * step);
                    let dy = |v: usize| (yp[v] - ym[v]) / (2.0 * step);
                    worst = worst.max((dx(re) - dy(im)).abs()).max((dy(re) + dx(im)).abs());
                }
            }
            worst
        };
        // Polynomials of degree 4: the truncation error dominates down to h = 1e-2.
        let (r1, r2) = (residual(4e-2), residual(2e-2));
        assert!(r1 / r2 >= 3.5, "{r1} {r2}");
    }

    #[test]
    fn sphere_sup_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = crate::random::random_quaternion(&mut rng, 1.0);
            let b = crate::random::random_quaternion(&mut rng, 1.0);
            let s = sphere_sup(a, b);
            let mut best: f64 = 0.0;
            for _ in 0..2000 {
                let i = crate::random::random_unit_imaginary(&mut rng);
                best = best.max((a + i.as_quaternion() * b).norm());
            }
            assert!(best <= s + 1e-12 && best >= s - 1e-2);
        }
    }

    #[test]
    fn serde_quad() {
        let quad = example_quad();
        let json = serde_json::to_string(&quad).unwrap();
        let back: HarmonicQuadruple = serde_json::from_str(&json).unwrap();
        assert_eq!(back.f(), quad.f());
        assert_eq!(back.g(), quad.g());
        let bad = json.replace("[1.0,0.0,0.0,0.0]", "[1.0,0.0,0.5,0.0]");
        assert!(serde_json::from_str::<HarmonicQuadruple>(&bad).is_err());
    }
}
