//! Quaternion arithmetic, slice coordinates, frames and the rotation action.

use std::f64::consts::FRAC_1_SQRT_2;

use slicebundle::quat::{frame_rotate, slice_coords, transition};
use slicebundle::{Frame, Quaternion, UnitImaginary, UnitQuaternion};

fn main() -> slicebundle::Result<()> {
    let (e1, e2) = (Quaternion::E1, Quaternion::E2);
    println!("e1 e2 = {}", e1 * e2);
    println!("e2 e1 = {}", e2 * e1);
    println!("(1 + e2)^-1 = {}", (Quaternion::ONE + e2).inverse()?);

    let q = Quaternion::new(3.0, 0.0, -4.0, 0.0);
    let sc = slice_coords(q);
    println!("3 - 4e2 = {} + {} I with I = {:?}", sc.x, sc.y, sc.axis.vector());

    // A quarter turn about e1 fixes e1 and sends e2 to e3.
    let u = UnitQuaternion::new(Quaternion::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0))?;
    println!("u e2 u* = {}", u.rotate(e2));

    let fr = Frame::new(UnitImaginary::E2, UnitImaginary::E3)?;
    let rotated = frame_rotate(&u, &fr);
    println!("R_u(e2, e3) = ({:?}, {:?})", rotated.i().vector(), rotated.j().vector());

    // Transitions compose along chains of unit quaternions.
    let v = UnitQuaternion::from_axis_angle(UnitImaginary::E3, 0.7);
    let w = UnitQuaternion::from_axis_angle(UnitImaginary::normalize([1.0, 1.0, 0.0])?, -1.3);
    let two_steps = transition(&v, &w, &transition(&u, &v, &fr));
    println!("cocycle defect = {:e}", two_steps.r6_distance(&transition(&u, &w, &fr)));
    Ok(())
}
