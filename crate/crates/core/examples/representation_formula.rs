//! Slice evaluation of a power series and reconstruction of its value on any
//! slice from two values on one slice.

use num_complex::Complex64;
use slicebundle::series::eval_slice;
use slicebundle::slice::{representation_formula, SliceValuePair};
use slicebundle::{EvalPoint, MultiSeries, Quaternion, UnitImaginary};

fn main() -> slicebundle::Result<()> {
    // f(q) = q² e2 + q e3 + 1 in one variable.
    let f = MultiSeries::from_terms(
        1,
        2,
        vec![0.0],
        [(vec![0], Quaternion::ONE), (vec![1], Quaternion::E3), (vec![2], Quaternion::E2)],
    )?;
    let i = UnitImaginary::E1;
    let (x, y) = (0.3, 0.5);
    let at = |axis: UnitImaginary, y: f64| eval_slice(&f, &EvalPoint::new(0, axis.embed(Complex64::new(x, y)), vec![], i));
    let sv = SliceValuePair { f_plus: at(i, y)?, f_minus: at(i, -y)?, frame_axis: i };

    for target in [UnitImaginary::E2, UnitImaginary::E3, UnitImaginary::normalize([1.0, -2.0, 2.0])?] {
        let rebuilt = representation_formula(&sv, target);
        let direct = at(target, y)?;
        println!("I = {:?}: {} (error {:e})", target.vector(), rebuilt, rebuilt.max_abs_diff(&direct));
    }
    Ok(())
}
