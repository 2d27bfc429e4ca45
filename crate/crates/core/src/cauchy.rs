//! Trapezoid quadrature of the Cauchy-type integrals on the distinguished
//! torus `T(A, r)`, and the slice kernels they are built from.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quat::{slice_coords, Frame, Quaternion, UnitImaginary};
use crate::series::{half_projectors, EvalPoint, MultiSeries};

/// Distance to a kernel pole below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-12;
/// Targets must lie in `D(A, TARGET_SHRINK · r)`.
pub const TARGET_SHRINK: f64 = 0.95;
/// Default number of nodes per circle.
pub const DEFAULT_NODES: usize = 64;
/// Tolerance on the target axis agreeing with the frame.
const AXIS_TOL: f64 = 1e-12;

/// `D(A, r)` in `C(axis)ⁿ` with a shared radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Polydisc {
    centers: Vec<Complex64>,
    radius: f64,
    axis: UnitImaginary,
}

impl Polydisc {
    pub fn new(centers: Vec<Complex64>, radius: f64, axis: UnitImaginary) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Schema(format!("polydisc radius must be positive, got {radius}")));
        }
        if centers.is_empty() || centers.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Schema("polydisc centers must be finite and nonempty".into()));
        }
        Ok(Polydisc { centers, radius, axis })
    }

    /// `D(0, r)` in `n` variables.
    pub fn centered(n: usize, radius: f64, axis: UnitImaginary) -> Result<Self> {
        Polydisc::new(vec![Complex64::new(0.0, 0.0); n], radius, axis)
    }

    pub fn arity(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn axis(&self) -> UnitImaginary {
        self.axis
    }

    /// Node with angle indices `idx` on an `m`-per-circle grid rotated by `phase`.
    pub fn node(&self, idx: &[usize], m: usize, phase: f64) -> Result<TorusNode> {
        if idx.len() != self.arity() {
            return Err(Error::DimensionMismatch { expected: self.arity(), found: idx.len() });
        }
        let h = std::f64::consts::TAU / m as f64;
        let angles: Vec<f64> = idx.iter().map(|&j| phase + h * j as f64).collect();
        let e: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        Ok(TorusNode {
            w: e.iter().zip(&self.centers).map(|(e, a)| a + self.radius * e).collect(),
            dw: e.iter().map(|e| Complex64::i() * self.radius * e).collect(),
            weight: h.powi(self.arity() as i32),
            angles,
        })
    }
}

/// One quadrature node of `T(A, r)`: values `w_k`, differentials `dw_k` and
/// the product trapezoid weight. Complex numbers are coordinates in `C(axis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusNode {
    pub angles: Vec<f64>,
    pub w: Vec<Complex64>,
    pub dw: Vec<Complex64>,
    pub weight: f64,
}

fn pole_guard(w: Complex64, z: Complex64) -> Result<()> {
    let d = (w - z).norm().min((w - z.conj()).norm());
    if d <= POLE_TOL {
        return Err(Error::PoleHit { distance: d });
    }
    Ok(())
}

/// `(w − q)^{−∗} = ½(1 + I_q i)(w − z̄)⁻¹ + ½(1 − I_q i)(w − z)⁻¹` for `q = x + I_q y`.
pub fn slice_kernel(w: Complex64, q: Quaternion, axis: UnitImaginary) -> Result<Quaternion> {
    slice_kernel_power(w, q, axis, 0)
}

/// `(w − q)^{−∗(α+1)} = ½(1 + I_q i)(w − z̄)^{−(α+1)} + ½(1 − I_q i)(w − z)^{−(α+1)}`.
pub fn slice_kernel_power(w: Complex64, q: Quaternion, axis: UnitImaginary, alpha: u32) -> Result<Quaternion> {
    let sc = slice_coords(q);
    let z = Complex64::new(sc.x, sc.y);
    pole_guard(w, z)?;
    let e = -(alpha as i32 + 1);
    let (plus, minus) = half_projectors(sc.axis, axis);
    Ok(plus * axis.embed((w - z.conj()).powi(e)) + minus * axis.embed((w - z).powi(e)))
}

/// Per-variable tables of node values, their powers and the complex part of
/// the integrand for one circle.
struct CircleTable {
    /// `(w_j − c)^a` for the series center `c`, indexed `[j][a]`.
    powers: Vec<Vec<Complex64>>,
    /// `dw_j · (w_j − z)^{−(α+1)}` for complex slots, `dw_j` alone for slot ℓ.
    scalar: Vec<Complex64>,
    w: Vec<Complex64>,
}

fn factorial(a: u32) -> f64 {
    (1..=a).map(f64::from).product()
}

fn check_target(f: &MultiSeries, pd: &Polydisc, l: usize, fr: &Frame, target: &EvalPoint) -> Result<Vec<Complex64>> {
    let n = pd.arity();
    if f.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.n() });
    }
    if target.arity() != n {
        return Err(Error::DimensionMismatch { expected: n, found: target.arity() });
    }
    if l >= n || target.slot != l {
        return Err(Error::SlotOutOfRange { slot: target.slot, n });
    }
    let ax = |u: UnitImaginary| u.as_quaternion().max_abs_diff(&pd.axis.as_quaternion());
    if ax(fr.i()) > AXIS_TOL || ax(target.axis) > AXIS_TOL {
        return Err(Error::FrameMismatch);
    }
    let grid = target.slice_grid();
    let limit = TARGET_SHRINK * pd.radius;
    for (k, z) in grid.iter().enumerate() {
        let a = pd.centers[k];
        // The slot value stands for both x + iy and x − iy unless q is in the slice.
        let off_slice = k == l && pd.axis.coordinates(target.q).1 > AXIS_TOL;
        if (z - a).norm() >= limit || (off_slice && (z.conj() - a).norm() >= limit) {
            return Err(Error::OutOfDomain(format!("target coordinate {k} is not inside D(A, {limit})")));
        }
    }
    Ok(grid)
}

fn quadrature(
    f: &MultiSeries,
    pd: &Polydisc,
    l: usize,
    fr: &Frame,
    target: &EvalPoint,
    alpha: &[u32],
    m: usize,
    phase: f64,
) -> Result<Quaternion> {
    let grid = check_target(f, pd, l, fr, target)?;
    let n = pd.arity();
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.len() });
    }
    if m == 0 {
        return Err(Error::Schema("node count must be positive".into()));
    }
    let axis = pd.axis;
    let h = std::f64::consts::TAU / m as f64;
    let deg = f.max_deg() as usize;
    let mut tables = Vec::with_capacity(n);
    for k in 0..n {
        let mut t = CircleTable { powers: Vec::with_capacity(m), scalar: Vec::with_capacity(m), w: Vec::with_capacity(m) };
        for j in 0..m {
            let e = Complex64::from_polar(1.0, phase + h * j as f64);
            let w = pd.centers[k] + pd.radius * e;
            let dw = Complex64::i() * pd.radius * e;
            let mut pw = Vec::with_capacity(deg + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=deg {
                pw.push(acc);
                acc *= w - f.center()[k];
            }
            let s = if k == l {
                dw
            } else {
                let d = w - grid[k];
                if d.norm() <= POLE_TOL {
                    return Err(Error::PoleHit { distance: d.norm() });
                }
                dw * d.powi(-(alpha[k] as i32 + 1))
            };
            t.powers.push(pw);
            t.scalar.push(s);
            t.w.push(w);
        }
        tables.push(t);
    }
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    let pre = two_pi_i.powi(-(n as i32)) * h.powi(n as i32) * alpha.iter().map(|&a| factorial(a)).product::<f64>();
    let terms: Vec<(&Vec<u32>, &Quaternion)> = f.terms().iter().collect();

    // Summing over the slot-ℓ circle inside and the others outside keeps each
    // outer index an independent task; partial sums are then added in order.
    let outer: usize = m.pow((n - 1) as u32);
    let partials: Vec<Result<Quaternion>> = (0..outer)
        .into_par_iter()
        .map(|o| {
            let mut idx = vec![0usize; n];
            let mut rem = o;
            for k in (0..n).rev() {
                if k != l {
                    idx[k] = rem % m;
                    rem /= m;
                }
            }
            let mut acc = Quaternion::ZERO;
            for j in 0..m {
                idx[l] = j;
                let mut scalar = Complex64::new(1.0, 0.0);
                for k in 0..n {
                    scalar *= tables[k].scalar[idx[k]];
                }
                let mut fw = Quaternion::ZERO;
                for (a, u) in &terms {
                    let mut c = Complex64::new(1.0, 0.0);
                    for k in 0..n {
                        c *= tables[k].powers[idx[k]][a[k] as usize];
                    }
                    fw += axis.embed(c) * **u;
                }
                let kernel = slice_kernel_power(tables[l].w[j], target.q, axis, alpha[l])?;
                acc += kernel * axis.embed(scalar * pre) * fw;
            }
            Ok(acc)
        })
        .collect();
    let mut total = Quaternion::ZERO;
    for p in partials {
        total += p?;
    }
    Ok(total)
}

/// Cauchy-type Formula: `f(target)` from values of `f` on `T(A, r)`.
pub fn cauchy_eval(f: &MultiSeries, pd: &Polydisc, l: usize, fr: &Frame, target: &EvalPoint, m: usize) -> Result<Quaternion> {
    quadrature(f, pd, l, fr, target, &vec![0; pd.arity()], m, 0.0)
}

/// [`cauchy_eval`] with every angle grid rotated by `phase`.
pub fn cauchy_eval_phase(
    f: &MultiSeries,
    pd: &Polydisc,
    l: usize,
    fr: &Frame,
    target: &EvalPoint,
    m: usize,
    phase: f64,
) -> Result<Quaternion> {
    quadrature(f, pd, l, fr, target, &vec![0; pd.arity()], m, phase)
}

/// Cauchy integral for the derivative `∂^α f` at `target`, prefactor `α!`.
pub fn cauchy_deriv(
    f: &MultiSeries,
    pd: &Polydisc,
    l: usize,
    fr: &Frame,
    target: &EvalPoint,
    alpha: &[u32],
    m: usize,
) -> Result<Quaternion> {
    quadrature(f, pd, l, fr, target, alpha, m, 0.0)
}

/// [`cauchy_deriv`] with every angle grid rotated by `phase`.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_deriv_phase(
    f: &MultiSeries,
    pd: &Polydisc,
    l: usize,
    fr: &Frame,
    target: &EvalPoint,
    alpha: &[u32],
    m: usize,
    phase: f64,
) -> Result<Quaternion> {
    quadrature(f, pd, l, fr, target, alpha, m, phase)
}
