//! Iterating short variational steps approaches the viscosity solution: compare
//! with a Lax-Friedrichs reference as the step shrinks.
use minmax_hj::grid::InitialCondition;
use minmax_hj::hamiltonian::registry;
use minmax_hj::operator::OperatorConfig;
use minmax_hj::reference::{convergence_study, FdConfig, StudyConfig};

fn main() -> minmax_hj::Result<()> {
    let h = registry::nonconvex_bump(2.0);
    let cfg = StudyConfig {
        op_domain: (-3.0, 3.0),
        op_h: 0.01,
        fd_domain: (-5.0, 5.0),
        fd_h: 2e-3,
        window: (-0.8, 0.8),
        operator: OperatorConfig { n_q: 80, n_p: 80, ..Default::default() },
        fd: FdConfig::default(),
        self_convergence: true,
    };
    let u0 = |q: f64| InitialCondition::Cos.eval(q);
    let rep = convergence_study(&h, &u0, 1.0, 0.0, 0.6, &[0.3, 0.15, 0.075], &cfg)?;
    for row in &rep.rows {
        println!("delta = {:<6} sup distance = {:.3e}", row.delta, row.distance);
    }
    println!("reference self-convergence error: {:.3e}", rep.fd_self_error.unwrap_or(f64::NAN));
    println!("non-increasing: {}", rep.non_increasing);
    Ok(())
}
