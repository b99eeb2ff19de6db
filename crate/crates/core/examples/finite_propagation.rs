//! Changing the data far away does not change the solution nearby, for both the
//! variational operator and the finite-difference reference.
use minmax_hj::grid::GridFunction;
use minmax_hj::hamiltonian::registry;
use minmax_hj::operator::{variational_step, OperatorConfig};
use minmax_hj::reference::{solve_lax_friedrichs, sup_distance, FdConfig};

fn main() -> minmax_hj::Result<()> {
    let h = registry::pendulum();
    let (lip, t) = (1.5, 0.2);
    let u = GridFunction::from_fn(-5.0, 5.0, 0.01, lip, f64::cos)?;
    let v = GridFunction::from_fn(-5.0, 5.0, 0.01, lip, |q| q.cos() + ((q.abs() - 2.0) / 2.0).clamp(0.0, 1.0))?;
    let radius = 2.0 - h.constant_c() * (1.0 + 2.0 * lip) * t;
    let cfg = OperatorConfig { n_q: 120, n_p: 120, ..Default::default() };
    let (ru, rv) = (variational_step(&h, &u, 0.0, t, &cfg)?, variational_step(&h, &v, 0.0, t, &cfg)?);
    let (fu, fv) = (solve_lax_friedrichs(&h, &u, 0.0, t, &FdConfig::default())?, solve_lax_friedrichs(&h, &v, 0.0, t, &FdConfig::default())?);
    println!("data differ outside |q| <= 2; solutions compared on |q| <= {radius:.2}");
    println!("variational change:       {:.3e}", sup_distance(&ru, &rv, (-radius, radius))?);
    println!("finite-difference change: {:.3e}", sup_distance(&fu, &fv, (-radius, radius))?);
    println!("variational change on |q| <= 3: {:.3e}", sup_distance(&ru, &rv, (-3.0, 3.0))?);
    Ok(())
}
