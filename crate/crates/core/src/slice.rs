//! One-slice machinery: the Representation Formula and frame components.

use crate::quat::{Frame, Quaternion, UnitImaginary};

/// Values of a slice function at `x + iy` and `x − iy` for a fixed axis `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceValuePair {
    pub f_plus: Quaternion,
    pub f_minus: Quaternion,
    pub frame_axis: UnitImaginary,
}

/// `f(x + Iy) = ½[f⁺ + f⁻] + ½ I i [f⁻ − f⁺]`.
///
/// The two degenerate targets `±i` short-circuit to the stored values so the
/// identity slice is reproduced bit for bit.
pub fn representation_formula(sv: &SliceValuePair, target: UnitImaginary) -> Quaternion {
    if target == sv.frame_axis {
        return sv.f_plus;
    }
    if target == sv.frame_axis.negate() {
        return sv.f_minus;
    }
    let ii = target.as_quaternion() * sv.frame_axis.as_quaternion();
    (sv.f_plus + sv.f_minus) * 0.5 + ii * (sv.f_minus - sv.f_plus) * 0.5
}

/// Real components `(d1, d2, d3, d4)` with `v = d1 + d2 i + d3 j + d4 ij`:
/// `d1 = Re v`, `d2 = −Re(v i)`, `d3 = −Re(v j)`, `d4 = Re(v j i)`.
///
/// For pure units these real parts reduce to dot products with the vector
/// part of `v`, which is how they are computed.
#[inline]
pub fn split_components(v: Quaternion, fr: &Frame) -> [f64; 4] {
    let dot = |u: Quaternion| v.x * u.x + v.y * u.y + v.z * u.z;
    [v.w, dot(fr.i().as_quaternion()), dot(fr.j().as_quaternion()), dot(fr.ij())]
}

/// `d1 + d2 i + d3 j + d4 ij`.
#[inline]
pub fn assemble_components(d: [f64; 4], fr: &Frame) -> Quaternion {
    let (i, j, k) = (fr.i().as_quaternion(), fr.j().as_quaternion(), fr.ij());
    Quaternion::new(
        d[0],
        d[1] * i.x + d[2] * j.x + d[3] * k.x,
        d[1] * i.y + d[2] * j.y + d[3] * k.y,
        d[1] * i.z + d[2] * j.z + d[3] * k.z,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::slice_coords;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn pair(f: impl Fn(Quaternion) -> Quaternion, axis: UnitImaginary, x: f64, y: f64) -> SliceValuePair {
        SliceValuePair {
            f_plus: f(axis.embed(Complex64::new(x, y))),
            f_minus: f(axis.embed(Complex64::new(x, -y))),
            frame_axis: axis,
        }
    }

    #[test]
    fn identity_slice() {
        let sv = pair(|q| q * q + q, UnitImaginary::E2, 0.3, 0.7);
        assert_eq!(representation_formula(&sv, UnitImaginary::E2), sv.f_plus);
        assert_eq!(representation_formula(&sv, UnitImaginary::E2.negate()), sv.f_minus);
    }

    #[test]
    fn square_on_other_axis() {
        let sv = pair(|q| q * q, UnitImaginary::E1, 0.0, 1.0);
        assert_eq!(sv.f_plus, Quaternion::real(-1.0));
        let v = representation_formula(&sv, UnitImaginary::E2);
        assert!(v.max_abs_diff(&(Quaternion::E2 * Quaternion::E2)) < 1e-15);
    }

    #[test]
    fn identity_function_on_other_axis() {
        let sv = pair(|q| q, UnitImaginary::E1, 0.0, 1.0);
        let v = representation_formula(&sv, UnitImaginary::E3);
        assert!(v.max_abs_diff(&Quaternion::E3) < 1e-15);
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_components(Quaternion::ONE, &Frame::STANDARD), [1.0, 0.0, 0.0, 0.0]);
        let v = Quaternion::new(2.0, 3.0, -1.0, 5.0);
        assert_eq!(split_components(v, &Frame::STANDARD), [2.0, 3.0, -1.0, 5.0]);
        let fr = Frame::from_vectors([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(split_components(Quaternion::E3, &fr), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn dot_form_matches_products() {
        let fr = Frame::from_vectors([0.0, 0.6, 0.8], [1.0, 0.0, 0.0]).unwrap();
        let v = Quaternion::new(0.3, -1.2, 0.7, 2.5);
        let (i, j) = (fr.i().as_quaternion(), fr.j().as_quaternion());
        let by_products = [v.w, -(v * i).w, -(v * j).w, (v * j * i).w];
        let d = split_components(v, &fr);
        for k in 0..4 {
            assert!((d[k] - by_products[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn assemble_examples() {
        assert_eq!(assemble_components([1.0, 0.0, 0.0, 0.0], &Frame::STANDARD), Quaternion::ONE);
        assert_eq!(assemble_components([0.0, 0.0, 1.0, 0.0], &Frame::STANDARD), Quaternion::E2);
    }

    fn arb_frame() -> impl Strategy<Value = Frame> {
        (any::<u64>()).prop_map(|s| {
            use rand::SeedableRng;
            crate::random::random_frame(&mut rand_chacha::ChaCha8Rng::seed_from_u64(s))
        })
    }

    fn arb_quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Quaternion::from)
    }

    fn arb_axis() -> impl Strategy<Value = UnitImaginary> {
        prop::array::uniform3(-1.0f64..1.0)
            .prop_filter("nonzero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-3)
            .prop_map(|v| UnitImaginary::normalize(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn split_assemble_roundtrip(v in arb_quat(), fr in arb_frame()) {
            let back = assemble_components(split_components(v, &fr), &fr);
            prop_assert!(back.max_abs_diff(&v) <= 1e-13);
        }

        #[test]
        fn assemble_split_roundtrip(d in prop::array::uniform4(-10.0f64..10.0), fr in arb_frame()) {
            let back = split_components(assemble_components(d, &fr), &fr);
            for k in 0..4 {
                prop_assert!((back[k] - d[k]).abs() <= 1e-13);
            }
        }

        #[test]
        fn formula_is_affine_in_target(a in arb_quat(), b in arb_quat(), axis in arb_axis(), t in arb_axis()) {
            let sv = SliceValuePair { f_plus: a, f_minus: b, frame_axis: axis };
            let avg = (representation_formula(&sv, t) + representation_formula(&sv, t.negate())) * 0.5;
            prop_assert!(avg.max_abs_diff(&((a + b) * 0.5)) <= 1e-13);
        }

        #[test]
        fn formula_matches_polynomial(q in arb_quat(), axis in arb_axis(), c in prop::array::uniform3(arb_quat())) {
            // f(q) = q² c2 + q c1 + c0 is slice regular for any right coefficients.
            let f = |p: Quaternion| p * p * c[2] + p * c[1] + c[0];
            let sc = slice_coords(q);
            let sv = pair(f, axis, sc.x, sc.y);
            let v = representation_formula(&sv, sc.axis);
            prop_assert!(v.max_abs_diff(&f(q)) <= 1e-11 * (1.0 + f(q).norm()));
        }
    }
}
