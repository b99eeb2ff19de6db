//! For convex H = H(p) the variational step coincides with the Hopf-Lax formula.
use minmax_hj::grid::InitialCondition;
use minmax_hj::hamiltonian::registry;
use minmax_hj::operator::{hopf_lax, lax_oleinik_step, variational_step, OperatorConfig};
use minmax_hj::reference::sup_distance;

fn main() -> minmax_hj::Result<()> {
    let h = registry::quadratic();
    let cfg = OperatorConfig { n_q: 200, n_p: 200, ..Default::default() };
    let window = (-0.4, 0.4);
    for ic in [InitialCondition::Abs, InitialCondition::NegAbs, InitialCondition::Cos] {
        let u = ic.to_grid(-0.8, 0.8, 2e-3)?;
        let r = variational_step(&h, &u, 0.0, 0.2, &cfg)?;
        let hl = hopf_lax(&h, &u, 0.0, 0.2)?;
        let lo = lax_oleinik_step(&h, &u, 0.0, 0.2, &cfg)?;
        println!(
            "{ic:?}: |R - HopfLax| = {:.3e}, |LaxOleinik - HopfLax| = {:.3e}",
            sup_distance(&r, &hl, window)?,
            sup_distance(&lo, &hl, window)?
        );
    }
    Ok(())
}
