//! Integrate a pendulum trajectory, check energy conservation, and read off the action.
use minmax_hj::hamiltonian::{integrate_flow, registry, PhasePoint};

fn main() -> minmax_hj::Result<()> {
    let h = registry::pendulum();
    let start = PhasePoint::new(0.3, 1.2);
    let traj = integrate_flow(&h, start, 0.0, 2.0, 1e-10)?;
    let end = traj.end();
    let energy = |z: PhasePoint| h.value(0.0, z.q, z.p);
    println!("start  (q, p) = ({:.6}, {:.6})", start.q, start.p);
    println!("end    (q, p) = ({:.6}, {:.6})", end.q, end.p);
    println!("energy drift  = {:.3e}", (energy(end) - energy(start)).abs());
    println!("action        = {:.10}", traj.action);
    println!("steps taken   = {} ({} rejected)", traj.meta.steps.len(), traj.meta.rejected);
    Ok(())
}
