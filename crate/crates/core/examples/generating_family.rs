//! Evaluate a broken-geodesic generating family, find its critical points over a
//! point Q, and compute the index of its quadratic part.
use minmax_hj::family::{critical_points_s, eval_s, quadratic_normal_form, FamilyPoint, Subdivision};
use minmax_hj::grid::Analytic;
use minmax_hj::hamiltonian::registry;

fn main() -> minmax_hj::Result<()> {
    let h = registry::nonconvex_bump(2.0);
    let u = Analytic::new(f64::cos, |q: f64| -q.sin());
    let (s, t, big_q) = (0.0, 0.6, 0.4);

    let crit = critical_points_s(&h, &u, 1.0, s, t, big_q, (-7.0, 7.0), 1e-3, 1e-12, None)?;
    println!("{} characteristics reach Q = {big_q} at t = {t}:", crit.len());
    for c in &crit {
        println!("  q0 = {:+.6}  p0 = {:+.6}  value = {:.8}", c.xi.q, c.xi.p, c.value);
    }

    // the same critical point seen through a three-step family: the gradient vanishes
    let sub = Subdivision::uniform(s, t, 0.2)?;
    let crit3 = critical_points_s(&h, &u, 1.0, s, t, big_q, (-7.0, 7.0), 1e-3, 1e-12, Some(&sub))?;
    let e = eval_s(&h, &u, &sub, big_q, &crit3[0].xi, 1e-12)?;
    println!("three-step family at the first critical point: S = {:.8}, |grad| = {:.2e}", e.value, e.grad_norm());
    let off = FamilyPoint { q: crit3[0].xi.q + 0.1, ..crit3[0].xi.clone() };
    println!("moving q0 by 0.1: |grad| = {:.3e}", eval_s(&h, &u, &sub, big_q, &off, 1e-12)?.grad_norm());

    let nf = quadratic_normal_form(&sub, h.tail_z())?;
    println!("quadratic part: {} variables, index {}", nf.matrix.len(), nf.index);
    Ok(())
}
