use serde::{Deserialize, Serialize};

use super::model::HamiltonianModel;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IntegratorMeta {
    pub steps: Vec<f64>,
    /// Sum of the accepted local error estimates.
    pub error_estimate: f64,
    pub rejected: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, PhasePoint)>,
    /// ∫ (p q̇ − H) dt over the whole interval.
    pub action: f64,
    pub meta: IntegratorMeta,
}

impl Trajectory {
    pub fn end(&self) -> PhasePoint {
        self.samples.last().expect("trajectory has samples").1
    }
}

/// Endpoint of a flow line together with its action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowEnd {
    pub q: f64,
    pub p: f64,
    pub action: f64,
}

// Fehlberg 4(5) tableau; the 5th-order solution is propagated (local extrapolation)
// and the embedded 4th-order one supplies the error estimate.
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const CT: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];

type State = [f64; 3];

fn rhs(h: &HamiltonianModel, t: f64, y: &State) -> State {
    let e = h.eval(t, y[0], y[1]);
    [e.dp, -e.dq, y[1] * e.dp - e.value]
}

fn rk_step(h: &HamiltonianModel, t: f64, y: &State, dt: f64) -> (State, f64) {
    let mut k = [[0.0; 3]; 6];
    for i in 0..6 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            for c in 0..3 {
                yi[c] += dt * A[i][j] * kj[c];
            }
        }
        k[i] = rhs(h, t + CT[i] * dt, &yi);
    }
    let mut out = *y;
    let mut err: f64 = 0.0;
    for c in 0..3 {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for i in 0..6 {
            lo += B4[i] * k[i][c];
            hi += B5[i] * k[i][c];
        }
        out[c] += dt * hi;
        err = err.max((dt * (hi - lo)).abs());
    }
    (out, err)
}

fn drive(
    h: &HamiltonianModel,
    start: PhasePoint,
    s: f64,
    t: f64,
    tol: f64,
    mut on_step: impl FnMut(f64, &State, f64, f64),
) -> Result<State> {
    if !(s <= t) {
        return Err(Error::InvalidArgument(format!("flow needs s <= t (s={s}, t={t})")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("flow tolerance must be positive".into()));
    }
    let mut y: State = [start.q, start.p, 0.0];
    let mut tc = s;
    let span = t - s;
    let mut dt = span.min(0.1 / h.constant_c());
    while tc < t {
        let last = tc + dt >= t;
        let step = if last { t - tc } else { dt };
        let (yn, err) = rk_step(h, tc, &y, step);
        if err <= tol || step <= 1e-300 {
            tc = if last { t } else { tc + step };
            y = yn;
            on_step(tc, &y, step, err);
        }
        let fac = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.1, 4.0) };
        dt = step * fac;
        if err > tol && dt < 1e-14 * (1.0 + tc.abs()) {
            return Err(Error::StepUnderflow { time: tc, step: dt });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::StepUnderflow { time: tc, step: dt });
        }
    }
    Ok(y)
}

/// Integrates q̇ = ∂H/∂p, ṗ = −∂H/∂q with the action ∫(p q̇ − H) from s to t,
/// using embedded Runge-Kutta-Fehlberg steps with local error ≤ `tol`.
pub fn integrate_flow(h: &HamiltonianModel, start: PhasePoint, s: f64, t: f64, tol: f64) -> Result<Trajectory> {
    let mut samples = vec![(s, start)];
    let mut meta = IntegratorMeta::default();
    let y = drive(h, start, s, t, tol, |tc, y, step, err| {
        if tc > samples.last().unwrap().0 {
            samples.push((tc, PhasePoint::new(y[0], y[1])));
        }
        meta.steps.push(step);
        meta.error_estimate += err;
    })?;
    Ok(Trajectory { samples, action: y[2], meta })
}

/// Flow endpoint and action without storing samples. Models flagged integrable are
/// solved in closed form: Q = q + (t−s)H'(p), P = p, action = (t−s)(pH'(p) − H(p)).
pub fn flow_end(h: &HamiltonianModel, q: f64, p: f64, s: f64, t: f64, tol: f64) -> Result<FlowEnd> {
    if h.is_integrable() {
        if !(s <= t) {
            return Err(Error::InvalidArgument(format!("flow needs s <= t (s={s}, t={t})")));
        }
        let e = h.eval(s, 0.0, p);
        let tau = t - s;
        return Ok(FlowEnd { q: q + tau * e.dp, p, action: tau * (p * e.dp - e.value) });
    }
    let y = drive(h, PhasePoint::new(q, p), s, t, tol, |_, _, _, _| {})?;
    Ok(FlowEnd { q: y[0], p: y[1], action: y[2] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::registry;

    #[test]
    fn zero_field_is_constant() {
        let tr = integrate_flow(&registry::zero(), PhasePoint::new(1.0, 2.0), 0.0, 1.0, 1e-12).unwrap();
        for (_, pt) in &tr.samples {
            assert_eq!(*pt, PhasePoint::new(1.0, 2.0));
        }
        assert_eq!(tr.action, 0.0);
        assert_eq!(tr.samples.first().unwrap().0, 0.0);
        assert_eq!(tr.samples.last().unwrap().0, 1.0);
    }

    #[test]
    fn quadratic_free_motion() {
        let h = registry::quadratic();
        for &(q0, p0, t) in &[(0.0, 1.0, 1.0), (-2.0, 0.3, 2.5), (1.0, -3.0, 0.4)] {
            let tr = integrate_flow(&h, PhasePoint::new(q0, p0), 0.0, t, 1e-12).unwrap();
            let end = tr.end();
            assert!((end.q - (q0 + t * p0)).abs() < 1e-11);
            assert!((end.p - p0).abs() < 1e-12);
            assert!((tr.action - t * p0 * p0 / 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn pendulum_conserves_energy() {
        let h = registry::pendulum();
        let tol = 1e-10;
        let tr = integrate_flow(&h, PhasePoint::new(1.0, 0.5), 0.0, 1.0, tol).unwrap();
        let e0 = h.value(0.0, 1.0, 0.5);
        for w in tr.samples.windows(2) {
            assert!(w[1].0 > w[0].0);
        }
        for (t, pt) in &tr.samples {
            assert!((h.value(*t, pt.q, pt.p) - e0).abs() <= 10.0 * tol, "drift at {t}: {} over {} steps", (h.value(*t, pt.q, pt.p) - e0).abs(), tr.meta.steps.len());
        }
    }

    #[test]
    fn pendulum_matches_fine_fixed_step_oracle() {
        // Classical RK4 at a tiny fixed step, independent of the adaptive driver.
        let h = registry::pendulum();
        let (mut q, mut p) = (1.0f64, 0.5f64);
        let n = 20000;
        let dt = 1.0 / n as f64;
        let f = |q: f64, p: f64| (p, q.sin());
        for _ in 0..n {
            let k1 = f(q, p);
            let k2 = f(q + 0.5 * dt * k1.0, p + 0.5 * dt * k1.1);
            let k3 = f(q + 0.5 * dt * k2.0, p + 0.5 * dt * k2.1);
            let k4 = f(q + dt * k3.0, p + dt * k3.1);
            q += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            p += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        let end = flow_end(&h, 1.0, 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((end.q - q).abs() < 1e-9 && (end.p - p).abs() < 1e-9);
    }

    #[test]
    fn composition() {
        let h = registry::pendulum();
        let tol = 1e-11;
        let a = flow_end(&h, 0.3, -0.7, 0.0, 0.8, tol).unwrap();
        let b = flow_end(&h, 0.3, -0.7, 0.0, 0.35, tol).unwrap();
        let c = flow_end(&h, b.q, b.p, 0.35, 0.8, tol).unwrap();
        assert!((a.q - c.q).abs() <= 20.0 * tol);
        assert!((a.p - c.p).abs() <= 20.0 * tol);
        assert!((a.action - b.action - c.action).abs() <= 20.0 * tol);
    }

    #[test]
    fn action_matches_quadrature_of_samples() {
        let h = registry::pendulum();
        let tr = integrate_flow(&h, PhasePoint::new(0.2, 1.3), 0.0, 0.9, 1e-12).unwrap();
        // Dense re-integration of p q̇ − H with q̇ = p for the pendulum.
        let mut acc = 0.0;
        let mut prev = (0.0, 0.2f64, 1.3f64);
        for &(t, pt) in tr.samples.iter().skip(1) {
            let g = |q: f64, p: f64| p * p - h.value(0.0, q, p);
            acc += 0.5 * (t - prev.0) * (g(prev.1, prev.2) + g(pt.q, pt.p));
            prev = (t, pt.q, pt.p);
        }
        // Trapezoid on adaptive samples: loose but independent.
        assert!((acc - tr.action).abs() < 1e-2);
    }

    #[test]
    fn integrable_closed_form_agrees_with_integrator() {
        let h = registry::nonconvex_bump(2.0);
        let a = flow_end(&h, 0.5, 0.8, 0.0, 0.3, 1e-12).unwrap();
        let b = integrate_flow(&h, PhasePoint::new(0.5, 0.8), 0.0, 0.3, 1e-12).unwrap();
        assert!((a.q - b.end().q).abs() < 1e-10);
        assert!((a.action - b.action).abs() < 1e-10);
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(integrate_flow(&registry::quadratic(), PhasePoint::new(0.0, 0.0), 1.0, 0.0, 1e-9).is_err());
    }
}
