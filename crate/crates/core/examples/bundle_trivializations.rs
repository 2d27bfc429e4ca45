//! Bundle points: projection, trivializations and their inverses, the matrix
//! algebra, and the continuity bounds on sampled sup norms.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slicebundle::bundle::{
    bp_bullet, bp_star, cont_proy, hom_bullet_residual, hom_star_residual, project, section_bound, sup_norm, trivialize,
    untrivialize, BundlePoint, StarRule,
};
use slicebundle::random::{random_frame, random_quad, random_unit_quaternion};
use slicebundle::several::{Domain, SampleGrid, SlotFunction};

fn main() -> slicebundle::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fr = random_frame(&mut rng);
    let a = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
    let b = BundlePoint::from_quad(random_quad(&mut rng, 2, 3, fr));
    let grid = SampleGrid::identity(&Domain::unit_balls(2), 6);
    let axis = fr.j();

    // Trivialize the projection with a random u, then undo it.
    let f: Arc<dyn SlotFunction> = Arc::new(project(&a, 0)?);
    let u = random_unit_quaternion(&mut rng);
    let lifted = trivialize(&u, f.clone(), &a.frame);
    let (base, frame) = untrivialize(&u, &lifted, 0)?;
    let mut worst = 0.0f64;
    for p in grid.iter() {
        worst = worst.max(base.eval_at(p, axis)?.max_abs_diff(&f.eval_at(p, axis)?));
    }
    println!("frame returned to start: {:e}", frame.r6_distance(&a.frame));
    println!("base function recovered: {worst:e}");

    println!("P(A . B) vs P(A) . P(B): {:e}", hom_bullet_residual(&a, &b, 0, &grid)?);
    println!("P(A * B) vs P(A) * P(B): {:e}", hom_star_residual(&a, &b, 0, StarRule::Corrected, &grid)?);
    println!("same with the entries as printed: {:e}", hom_star_residual(&a, &b, 0, StarRule::AsPrinted, &grid)?);
    println!("sup of A . B and A * B on the grid: {:.4}, {:.4}", sup_norm(&bp_bullet(&a, &b)?, &grid), sup_norm(&bp_star(&a, &b)?, &grid));

    let sup = SampleGrid::default_sup(a.domain());
    let bound = cont_proy(&a, &b, 0, &sup)?;
    println!("projection bound: {:.4} <= {:.4}", bound.lhs, bound.rhs);
    let g: Arc<dyn SlotFunction> = Arc::new(project(&b, 0)?);
    let bound = section_bound(&f, &g, &random_frame(&mut rng), &sup)?;
    println!("section bound: {:.4} <= {:.4}", bound.lhs, bound.rhs);
    Ok(())
}
