//! One step of the variational operator for a non-convex Hamiltonian, with the
//! localization radii and the Lipschitz bound it certifies.
use minmax_hj::grid::InitialCondition;
use minmax_hj::hamiltonian::registry;
use minmax_hj::operator::{select_at, step_plan, variational_step, OperatorConfig};

fn main() -> minmax_hj::Result<()> {
    let h = registry::nonconvex_bump(2.0);
    let u = InitialCondition::Cos.to_grid(-4.0, 4.0, 0.01)?;
    let cfg = OperatorConfig { n_q: 160, n_p: 160, ..Default::default() };
    let t = 0.5;
    let plan = step_plan(&h, u.lip(), 0.0, t, &cfg)?;
    println!("radii: r_q = {:.4}, r_p = {:.4}; Lipschitz bound {:.4}", plan.radii.r_q, plan.radii.r_p, plan.lip_bound);

    let r = variational_step(&h, &u, 0.0, t, &cfg)?;
    println!("output domain {:?}, measured Lip {:.6}", r.domain(), r.measured_lip());
    for q in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let sel = select_at(&plan, &u, q, &cfg, false)?;
        println!("  R u({q:+.1}) = {:.8}   pass at (q, p) = ({:+.3}, {:+.3})", r.eval(q), sel.pass.0, sel.pass.1);
    }
    Ok(())
}
