//! Cauchy quadrature on a polydisc for a value off the frame slice, and for a
//! mixed derivative, as the number of nodes grows.

use num_complex::Complex64;
use slicebundle::cauchy::{cauchy_deriv, cauchy_eval, Polydisc};
use slicebundle::series::{eval_slice, multi_derivative};
use slicebundle::{EvalPoint, Frame, MultiSeries, Quaternion, UnitImaginary};

fn main() -> slicebundle::Result<()> {
    let fr = Frame::STANDARD;
    let f = MultiSeries::from_terms(
        2,
        3,
        vec![0.0; 2],
        [
            (vec![1, 1], Quaternion::ONE),
            (vec![0, 2], Quaternion::E2),
            (vec![3, 0], Quaternion::new(0.5, 0.0, 0.0, -1.0)),
            (vec![2, 3], Quaternion::E3),
        ],
    )?;
    let pd = Polydisc::centered(2, 1.0, fr.i())?;
    let q = UnitImaginary::E3.embed(Complex64::new(0.2, 0.3));
    let target = EvalPoint::new(0, q, vec![Complex64::new(0.1, -0.4)], fr.i());
    let exact = eval_slice(&f, &target)?;

    println!("value at q = {q}: {exact}");
    for m in [8, 16, 32, 64] {
        let err = cauchy_eval(&f, &pd, 0, &fr, &target, m)?.max_abs_diff(&exact);
        println!("  {m:>2} nodes per circle: error {err:.2e}");
    }
    let alpha = [2, 1];
    let exact = eval_slice(&multi_derivative(&f, &alpha)?, &target)?;
    println!("derivative {alpha:?}: {exact}");
    for m in [16, 32, 64, 128] {
        let err = cauchy_deriv(&f, &pd, 0, &fr, &target, &alpha, m)?.max_abs_diff(&exact);
        println!("  {m:>3} nodes per circle: error {err:.2e}");
    }
    Ok(())
}
