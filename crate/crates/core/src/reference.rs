//! Monotone finite-difference reference for viscosity solutions, and comparison tools.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::hamiltonian::{localization_radii, HamiltonianModel};
use crate::operator::{iterated_operator, IterationSchedule, OperatorConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdConfig {
    /// Courant factor, ≤ 0.5.
    pub cfl: f64,
    /// Dissipation coefficient; computed from the momentum bound when absent.
    pub artificial_viscosity: Option<f64>,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { cfl: 0.45, artificial_viscosity: None }
    }
}

/// sup |∂H/∂p| over |p| ≤ r_p, the positions of `u0`'s grid, and times in [s, t].
fn max_speed(h: &HamiltonianModel, u0: &GridFunction, s: f64, t: f64, r_p: f64) -> f64 {
    let np = 801;
    let ps: Vec<f64> = (0..np).map(|i| -r_p + 2.0 * r_p * i as f64 / (np - 1) as f64).collect();
    let (qs, ts): (Vec<f64>, Vec<f64>) = if h.is_integrable() {
        (vec![0.0], vec![s])
    } else {
        let (a, b) = u0.domain();
        ((0..=200).map(|i| a + (b - a) * i as f64 / 200.0).collect(), (0..=4).map(|i| s + (t - s) * i as f64 / 4.0).collect())
    };
    let mut m: f64 = 0.0;
    for &tt in &ts {
        for &q in &qs {
            for &p in &ps {
                m = m.max(h.eval(tt, q, p).dp.abs());
            }
        }
    }
    if m == 0.0 {
        return 0.0;
    }
    // sampling slack: |∂²H| ≤ C
    m + h.constant_c() * (2.0 * r_p / (np - 1) as f64)
}

/// Explicit Lax-Friedrichs scheme
/// u ← u − Δt [H(t, q, (p⁻+p⁺)/2) − (α/2)(p⁺ − p⁻)],
/// monotone for Δt ≤ cfl·h/α with α ≥ sup |∂H/∂p|. Each step drops one boundary cell per side.
pub fn solve_lax_friedrichs(h: &HamiltonianModel, u0: &GridFunction, s: f64, t: f64, cfg: &FdConfig) -> Result<GridFunction> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 0.5) {
        return Err(Error::CflViolation(format!("cfl must lie in (0, 0.5], got {}", cfg.cfl)));
    }
    if !(t >= s) {
        return Err(Error::InvalidArgument(format!("needs s <= t (s={s}, t={t})")));
    }
    if t == s {
        return Ok(u0.clone());
    }
    let radii = localization_radii(h.constant_c(), u0.lip(), s, t, h.is_integrable())?;
    let need = max_speed(h, u0, s, t, radii.r_p).max(1e-12);
    let alpha = match cfg.artificial_viscosity {
        Some(a) if a < need => {
            return Err(Error::CflViolation(format!("artificial viscosity {a} is below sup |dH/dp| = {need}")));
        }
        Some(a) => a,
        None => need,
    };
    let dx = u0.step();
    let n_steps = ((t - s) * alpha / (cfg.cfl * dx)).ceil().max(1.0) as usize;
    let dt = (t - s) / n_steps as f64;
    if 2 * n_steps + 2 > u0.len() {
        return Err(Error::DomainExhausted { radius: n_steps as f64 * dx });
    }
    let mut u = u0.values().to_vec();
    let mut origin = u0.origin();
    let mut next = vec![0.0; u.len()];
    for n in 0..n_steps {
        let tn = s + dt * n as f64;
        let m = u.len();
        next.truncate(m - 2);
        for i in 1..m - 1 {
            let pm = (u[i] - u[i - 1]) / dx;
            let pp = (u[i + 1] - u[i]) / dx;
            let q = origin + dx * i as f64;
            let flux = h.value(tn, q, 0.5 * (pm + pp)) - 0.5 * alpha * (pp - pm);
            next[i - 1] = u[i] - dt * flux;
        }
        std::mem::swap(&mut u, &mut next);
        next.resize(u.len(), 0.0);
        origin = u0.origin() + dx * (n + 1) as f64;
    }
    let measured = u.windows(2).map(|w| (w[1] - w[0]).abs() / dx).fold(0.0, f64::max);
    GridFunction::new(origin, dx, u, measured.max(u0.lip()))
}

/// max |a − b| over the nodes of the finer grid inside `window` (and its endpoints).
pub fn sup_distance(a: &GridFunction, b: &GridFunction, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let inside = |g: &GridFunction| {
        let (x, y) = g.domain();
        x <= lo + 1e-9 * g.step() && hi <= y + 1e-9 * g.step()
    };
    if !(hi >= lo) || !inside(a) || !inside(b) {
        return Err(Error::EmptyOverlap(lo, hi));
    }
    let fine = if a.step() <= b.step() { a } else { b };
    let mut d = (a.eval(lo) - b.eval(lo)).abs().max((a.eval(hi) - b.eval(hi)).abs());
    for x in fine.nodes().filter(|&x| x >= lo && x <= hi) {
        d = d.max((a.eval(x) - b.eval(x)).abs());
    }
    Ok(d)
}

/// Settings of a convergence study of iterated operators towards the reference.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyConfig {
    pub op_domain: (f64, f64),
    pub op_h: f64,
    pub fd_domain: (f64, f64),
    pub fd_h: f64,
    pub window: (f64, f64),
    pub operator: OperatorConfig,
    pub fd: FdConfig,
    /// Also solve at fd_h/2 to measure the reference's own error.
    pub self_convergence: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Each distance is at most 1.1 times the previous one.
    pub non_increasing: bool,
    /// sup distance between the reference at fd_h and at fd_h/2.
    pub fd_self_error: Option<f64>,
}

/// Compares iterated operators with steps `deltas` against the Lax-Friedrichs reference.
pub fn convergence_study(
    h: &HamiltonianModel,
    u0: &dyn Fn(f64) -> f64,
    lip: f64,
    s: f64,
    t: f64,
    deltas: &[f64],
    cfg: &StudyConfig,
) -> Result<ConvergenceReport> {
    let fd0 = GridFunction::from_fn(cfg.fd_domain.0, cfg.fd_domain.1, cfg.fd_h, lip, u0)?;
    let reference = solve_lax_friedrichs(h, &fd0, s, t, &cfg.fd)?;
    let fd_self_error = if cfg.self_convergence {
        let fd1 = GridFunction::from_fn(cfg.fd_domain.0, cfg.fd_domain.1, 0.5 * cfg.fd_h, lip, u0)?;
        Some(sup_distance(&reference, &solve_lax_friedrichs(h, &fd1, s, t, &cfg.fd)?, cfg.window)?)
    } else {
        None
    };
    let start = GridFunction::from_fn(cfg.op_domain.0, cfg.op_domain.1, cfg.op_h, lip, u0)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let sched = IterationSchedule::uniform(s, t, delta)?;
        let out = iterated_operator(h, &start, &sched, &cfg.operator)?;
        rows.push(ConvergenceRow { delta, distance: sup_distance(&out, &reference, cfg.window)? });
    }
    let non_increasing = rows.windows(2).all(|w| w[1].distance <= 1.1 * w[0].distance);
    Ok(ConvergenceReport { rows, non_increasing, fd_self_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::InitialCondition;
    use crate::hamiltonian::registry;
    use crate::operator::hopf_lax;

    #[test]
    fn zero_hamiltonian_keeps_data() {
        let u = InitialCondition::Cos.to_grid(-2.0, 2.0, 0.01).unwrap();
        let r = solve_lax_friedrichs(&registry::zero(), &u, 0.0, 0.5, &FdConfig { cfl: 0.5, artificial_viscosity: Some(1.0) }).unwrap();
        // pure dissipation term acts on the discrete second difference only
        for (q, v) in r.nodes().zip(r.values()) {
            assert!((v - q.cos()).abs() < 2e-2);
        }
        let r = solve_lax_friedrichs(&registry::zero(), &u, 0.0, 0.5, &FdConfig::default()).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            assert!((v - q.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn quadratic_neg_abs() {
        let t = 0.5;
        let mut errs = Vec::new();
        for &h in &[0.01, 0.005] {
            let u = InitialCondition::NegAbs.to_grid(-3.0, 3.0, h).unwrap();
            let r = solve_lax_friedrichs(&registry::quadratic(), &u, 0.0, t, &FdConfig::default()).unwrap();
            let e = r.nodes().zip(r.values()).filter(|(q, _)| q.abs() <= 1.0).map(|(q, v)| (v + q.abs() + t / 2.0).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] < 0.05 && errs[1] < errs[0], "{errs:?}");
    }

    #[test]
    fn refinement_halves_error_against_hopf_lax() {
        let t = 0.4;
        let mut errs = Vec::new();
        for &h in &[0.02, 0.01] {
            let u = InitialCondition::Abs.to_grid(-3.0, 3.0, h).unwrap();
            let r = solve_lax_friedrichs(&registry::quadratic(), &u, 0.0, t, &FdConfig::default()).unwrap();
            let exact = hopf_lax(&registry::quadratic(), &u, 0.0, t).unwrap();
            errs.push(sup_distance(&r, &exact, (-1.0, 1.0)).unwrap());
        }
        let ratio = errs[1] / errs[0];
        assert!(ratio > 0.3 && ratio < 0.7, "{errs:?}");
    }

    #[test]
    fn rejects_bad_cfl() {
        let u = InitialCondition::Abs.to_grid(-3.0, 3.0, 0.1).unwrap();
        let e = solve_lax_friedrichs(&registry::quadratic(), &u, 0.0, 0.1, &FdConfig { cfl: 0.7, artificial_viscosity: None });
        assert!(matches!(e, Err(Error::CflViolation(_))));
        let e = solve_lax_friedrichs(&registry::quadratic(), &u, 0.0, 0.1, &FdConfig { cfl: 0.5, artificial_viscosity: Some(0.1) });
        assert!(matches!(e, Err(Error::CflViolation(_))));
    }

    #[test]
    fn distances() {
        let a = InitialCondition::Cos.to_grid(-1.0, 1.0, 0.01).unwrap();
        assert_eq!(sup_distance(&a, &a, (-0.5, 0.5)).unwrap(), 0.0);
        let b = a.add_constant(0.3);
        assert!((sup_distance(&a, &b, (-0.5, 0.5)).unwrap() - 0.3).abs() < 1e-15);
        assert!(sup_distance(&a, &b, (-2.0, 0.5)).is_err());
    }
}
