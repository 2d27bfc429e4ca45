//! Star and bullet products, conjugation, symmetrization and star inverses.

use slicebundle::series::{bullet_product, series_conjugate, star_inverse, star_product, symmetrize};
use slicebundle::{Frame, MultiSeries, Quaternion};

fn monomial(u: Quaternion) -> MultiSeries {
    MultiSeries::from_terms(1, 1, vec![0.0], [(vec![1], u)]).expect("valid term")
}

fn show(name: &str, s: &MultiSeries) {
    let terms: Vec<String> = s.terms().iter().map(|(a, u)| format!("q^{} ({})", a[0], u)).collect();
    println!("{name} = {}", if terms.is_empty() { "0".into() } else { terms.join(" + ") });
}

fn main() -> slicebundle::Result<()> {
    let (a, b) = (monomial(Quaternion::E2), monomial(Quaternion::E1));
    show("(q e2) * (q e1)", &star_product(&a, &b)?);
    show("(q e1) * (q e2)", &star_product(&b, &a)?);
    show("(q e1) . (q e2)", &bullet_product(&b, &a, &Frame::STANDARD)?);
    show("(q e1) . (q e1)", &bullet_product(&b, &b, &Frame::STANDARD)?);

    // f = 1 − q e1 / 2 has f^{-*} = Σ q^m (e1 / 2)^m.
    let f = MultiSeries::from_terms(1, 1, vec![0.0], [(vec![0], Quaternion::ONE), (vec![1], Quaternion::E1 * -0.5)])?;
    show("f^c", &series_conjugate(&f));
    show("f^s", &symmetrize(&f)?);
    let g = star_inverse(&f, 6)?;
    show("f^-*", &g);
    let one = MultiSeries::constant(1, Quaternion::ONE);
    println!("max |f * f^-* - 1| through degree 6 = {:e}", star_product(&f, &g)?.truncate(6).max_coeff_diff(&one));
    Ok(())
}
