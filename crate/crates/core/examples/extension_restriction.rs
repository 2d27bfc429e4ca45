//! Harmonic quadruples, their slice extension to one quaternionic variable,
//! restriction back to the frame slice, and the swap of variables.

use std::sync::Arc;

use num_complex::Complex64;
use slicebundle::several::{
    gamma_square_residual, p_ell, q_after_p_roundtrip, Domain, HarmonicQuadruple, QuadField, SampleGrid,
};
use slicebundle::{Frame, MultiSeries, Quaternion};

fn main() -> slicebundle::Result<()> {
    // F = z1 z2 + z2², G = z1² − 3 z2 on the bidisc of radius 2.
    let one = Quaternion::ONE;
    let f = MultiSeries::from_terms(2, 2, vec![0.0; 2], [(vec![1, 1], one), (vec![0, 2], one)])?;
    let g = MultiSeries::from_terms(2, 2, vec![0.0; 2], [(vec![2, 0], one), (vec![0, 1], one * -3.0)])?;
    let fr = Frame::STANDARD;
    let quad = HarmonicQuadruple::with_domain(f, g, fr, Domain::new(vec![0.0; 2], vec![2.0; 2])?)?;

    let z = [Complex64::new(1.0, 0.0)];
    println!("P1 at q = e1, z2 = 1: {}", p_ell(&quad, &fr, 0, Quaternion::E1, &z)?);
    println!("P1 at q = e2, z2 = 1: {}", p_ell(&quad, &fr, 0, Quaternion::E2, &z)?);
    println!("P2 at z1 = 1, q = e3: {}", p_ell(&quad, &fr, 1, Quaternion::E3, &z)?);

    let grid = SampleGrid::identity(quad.domain(), 8);
    let shared: Arc<dyn QuadField> = Arc::new(quad.clone());
    for l in 0..2 {
        let (qp, pq) = q_after_p_roundtrip(shared.clone(), &fr, l, &grid)?;
        println!("slot {}: |Q P - id| = {qp:e}, |P Q - id| = {pq:e} on {} points", l + 1, grid.len());
    }
    println!("swap square defect = {:e}", gamma_square_residual(&quad, 0, 1, &grid)?);
    Ok(())
}
