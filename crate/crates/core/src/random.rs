//! Seeded generators for frames, rotations and test functions.
//!
//! Everything here is driven by a caller-owned RNG so that verification runs
//! are reproducible from a single seed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::quat::{Frame, Quaternion, UnitImaginary, UnitQuaternion};
use crate::series::MultiSeries;
use crate::several::HarmonicQuadruple;

fn normal3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)]
}

/// Uniform point of S².
pub fn random_unit_imaginary<R: Rng + ?Sized>(rng: &mut R) -> UnitImaginary {
    loop {
        if let Ok(u) = UnitImaginary::normalize(normal3(rng)) {
            return u;
        }
    }
}

/// Uniform point of S³.
pub fn random_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion {
    loop {
        let q = Quaternion::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if q.norm() > 1e-6 {
            return UnitQuaternion::normalize(q).expect("nonzero");
        }
    }
}

/// A random element of T: `i` uniform on S², `j` by Gram–Schmidt.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> Frame {
    let i = random_unit_imaginary(rng).vector();
    loop {
        let v = normal3(rng);
        let d = v[0] * i[0] + v[1] * i[1] + v[2] * i[2];
        let w = [v[0] - d * i[0], v[1] - d * i[1], v[2] - d * i[2]];
        if let Ok(j) = UnitImaginary::normalize(w) {
            // One more projection pass keeps the inner product at rounding level.
            let jv = j.vector();
            let d = jv[0] * i[0] + jv[1] * i[1] + jv[2] * i[2];
            let w = [jv[0] - d * i[0], jv[1] - d * i[1], jv[2] - d * i[2]];
            let j = UnitImaginary::normalize(w).expect("nonzero");
            let i = UnitImaginary::new(i).expect("unit");
            return Frame::new(i, j).expect("orthonormal by construction");
        }
    }
}

/// Quaternion with components uniform in `[-scale, scale]`.
pub fn random_quaternion<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Quaternion {
    let d = Uniform::new_inclusive(-scale, scale);
    Quaternion::new(d.sample(rng), d.sample(rng), d.sample(rng), d.sample(rng))
}

/// Complex number with parts uniform in `[-scale, scale]`.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let d = Uniform::new_inclusive(-scale, scale);
    Complex64::new(d.sample(rng), d.sample(rng))
}

/// All multi-indices in `ℕⁿ` of total degree at most `deg`, in lexicographic order.
pub fn multi_indices_total(n: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[k] = a;
            rec(k + 1, left - a, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, deg, &mut cur, &mut out);
    out
}

/// Series in `n` variables centered at 0 with coefficients in `C(axis)`,
/// every monomial of total degree at most `deg` present.
pub fn random_slice_series<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: u32, axis: UnitImaginary) -> MultiSeries {
    let terms: Vec<_> = multi_indices_total(n, deg)
        .into_iter()
        .map(|a| (a, axis.embed(random_complex(rng, 1.0))))
        .collect();
    MultiSeries::from_terms(n, deg, vec![0.0; n], terms).expect("indices in bounds")
}

/// Series with arbitrary quaternion coefficients, total degree at most `deg`.
pub fn random_series<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: u32, scale: f64) -> MultiSeries {
    let terms: Vec<_> = multi_indices_total(n, deg)
        .into_iter()
        .map(|a| (a, random_quaternion(rng, scale)))
        .collect();
    MultiSeries::from_terms(n, deg, vec![0.0; n], terms).expect("indices in bounds")
}

/// Quadruple on the unit balls from two random holomorphic polynomials.
pub fn random_quad<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: u32, frame: Frame) -> HarmonicQuadruple {
    let f = random_slice_series(rng, n, deg, frame.i());
    let g = random_slice_series(rng, n, deg, frame.i());
    HarmonicQuadruple::new(f, g, frame).expect("coefficients in the frame slice")
}

/// Point `x + iy` uniform in the disc of radius `r` about `c`.
pub fn random_in_disc<R: Rng + ?Sized>(rng: &mut R, c: f64, r: f64) -> (f64, f64) {
    let rad = r * rng.gen::<f64>().sqrt();
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    (c + rad * th.cos(), rad * th.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frames_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let fr = random_frame(&mut rng);
            let (inner, det) = fr.check();
            assert!(inner.abs() < 1e-15 && (det - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices_total(1, 4).len(), 5);
        assert_eq!(multi_indices_total(2, 2).len(), 6);
        assert_eq!(multi_indices_total(3, 4).len(), 35);
        let v = multi_indices_total(2, 1);
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }
}
