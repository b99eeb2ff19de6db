//! Generating families of the Hamiltonian flow: the one-step family F, the
//! broken-geodesic family G, and S(Q; q, p, ν) = u(q) + G + p(Q − q).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::C1Function;
use crate::hamiltonian::{flow_end, localization_radii, max_step_delta1, HamiltonianModel};

/// Time grid s = t₀ ≤ t₁ ≤ … ≤ t_{N+1} = t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdivision {
    times: Vec<f64>,
}

impl Subdivision {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidArgument("subdivision needs at least two nondecreasing times".into()));
        }
        Ok(Self { times })
    }

    /// Single step [s, t] (N = 0).
    pub fn single(s: f64, t: f64) -> Result<Self> {
        Self::new(vec![s, t])
    }

    /// Equal steps no longer than `max_step`.
    pub fn uniform(s: f64, t: f64, max_step: f64) -> Result<Self> {
        let n = (((t - s) / max_step) - 1e-12).ceil().max(1.0) as usize;
        Self::new((0..=n).map(|i| if i == n { t } else { s + (t - s) * i as f64 / n as f64 }).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of intermediate times N.
    pub fn n_inner(&self) -> usize {
        self.times.len() - 2
    }

    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn check(&self, h: &HamiltonianModel) -> Result<()> {
        let d1 = max_step_delta1(h.constant_c())?;
        if self.max_step() > d1 * (1.0 + 1e-12) {
            return Err(Error::StepTooLong { step: self.max_step(), bound: d1, what: "subdivision step vs ln(3/2)/C" });
        }
        Ok(())
    }
}

/// Point ξ = (q, p, ν) with ν = [(Q₀, p₁), …, (Q_{N−1}, p_N)].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub q: f64,
    pub p: f64,
    pub nu: Vec<(f64, f64)>,
}

impl FamilyPoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p, nu: Vec::new() }
    }
}

/// Value and derivatives of S at (Q, ξ). `grad_nu[i]` is (∂/∂Q_i, ∂/∂p_{i+1}).
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyEval {
    pub value: f64,
    pub grad_q: f64,
    pub grad_p: f64,
    pub grad_nu: Vec<(f64, f64)>,
    /// ∂S/∂Q.
    pub d_big_q: f64,
    /// ∂S/∂t and ∂S/∂s, filled at critical points only.
    pub dt: Option<f64>,
    pub ds: Option<f64>,
}

impl FamilyEval {
    pub fn grad_norm(&self) -> f64 {
        let mut m = self.grad_q.abs().max(self.grad_p.abs());
        for &(a, b) in &self.grad_nu {
            m = m.max(a.abs()).max(b.abs());
        }
        m
    }
}

/// One-step family F^t_s(Q, p) with ∂_Q F = P − p, ∂_p F = q − Q, where (q, p) is
/// the unique start whose flow line reaches position Q at time t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FEval {
    pub value: f64,
    pub d_big_q: f64,
    pub d_p: f64,
    /// Start position q.
    pub q_start: f64,
    /// End momentum P.
    pub p_end: f64,
}

/// Evaluates F^t_s(Q, p). For H = H(p) this is exactly −(t−s)H(p).
pub fn eval_f(h: &HamiltonianModel, s: f64, t: f64, big_q: f64, p: f64, tol: f64) -> Result<FEval> {
    if h.is_integrable() {
        let e = h.eval(s, 0.0, p);
        let tau = t - s;
        let q_start = big_q - tau * e.dp;
        return Ok(FEval { value: -tau * e.value, d_big_q: 0.0, d_p: q_start - big_q, q_start, p_end: p });
    }
    let target = |q: f64| -> Result<(f64, crate::hamiltonian::FlowEnd)> {
        let end = flow_end(h, q, p, s, t, tol)?;
        Ok((end.q - big_q, end))
    };
    // q ↦ Q^t_s(q, p) has derivative in [1/2, 3/2] for t − s ≤ δ₁: secant with a
    // fixed-point fallback whenever the secant slope leaves that range.
    let scale = 1.0 + big_q.abs();
    let (mut qa, (mut ra, mut ea)) = (big_q, target(big_q)?);
    if ra.abs() <= 1e-14 * scale {
        return Ok(finish_f(big_q, p, qa, ea));
    }
    let mut qb = qa - ra;
    let (mut rb, mut eb) = target(qb)?;
    for _ in 0..100 {
        if rb.abs() <= 1e-14 * scale {
            return Ok(finish_f(big_q, p, qb, eb));
        }
        let slope = (rb - ra) / (qb - qa);
        let next = if slope.is_finite() && (0.25..=4.0).contains(&slope) { qb - rb / slope } else { qb - rb };
        if (next - qb).abs() <= 1e-15 * scale {
            return Ok(finish_f(big_q, p, qb, eb));
        }
        qa = qb;
        ra = rb;
        ea = eb;
        qb = next;
        let r = target(qb)?;
        rb = r.0;
        eb = r.1;
    }
    let _ = ea;
    Err(Error::NoConvergence(format!("start position for Q={big_q}, p={p} on [{s}, {t}] (step longer than ln(3/2)/C?)")))
}

fn finish_f(big_q: f64, p: f64, q: f64, end: crate::hamiltonian::FlowEnd) -> FEval {
    FEval { value: end.action - p * (big_q - q), d_big_q: end.p - p, d_p: q - big_q, q_start: q, p_end: end.p }
}

/// Evaluates S(Q, ξ) = u(q) + Σ_i F_i(Q_i, p_i) + Σ_{i<N} p_{i+1}(Q_{i+1} − Q_i) + p₀(Q₀ − q)
/// with Q_N = Q, and its full gradient.
pub fn eval_s(
    h: &HamiltonianModel,
    u: &dyn C1Function,
    sub: &Subdivision,
    big_q: f64,
    xi: &FamilyPoint,
    tol: f64,
) -> Result<FamilyEval> {
    let n = sub.n_inner();
    if xi.nu.len() != n {
        return Err(Error::InvalidArgument(format!("family point has {} inner pairs, subdivision needs {n}", xi.nu.len())));
    }
    let times = sub.times();
    let big: Vec<f64> = xi.nu.iter().map(|v| v.0).chain(std::iter::once(big_q)).collect();
    let ps: Vec<f64> = std::iter::once(xi.p).chain(xi.nu.iter().map(|v| v.1)).collect();
    let mut value = u.value(xi.q) + ps[0] * (big[0] - xi.q);
    let mut blocks = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let f = eval_f(h, times[i], times[i + 1], big[i], ps[i], tol)?;
        value += f.value;
        if i < n {
            value += ps[i + 1] * (big[i + 1] - big[i]);
        }
        blocks.push(f);
    }
    let grad_q = u.deriv(xi.q) - ps[0];
    let grad_p = blocks[0].q_start - xi.q;
    let grad_nu = (0..n).map(|j| (blocks[j].p_end - ps[j + 1], blocks[j + 1].q_start - big[j])).collect();
    let p_end = blocks[n].p_end;
    let mut out = FamilyEval { value, grad_q, grad_p, grad_nu, d_big_q: p_end, dt: None, ds: None };
    if out.grad_norm() <= 1e-8 * (1.0 + big_q.abs() + xi.p.abs()) {
        let t = times[n + 1];
        let s = times[0];
        out.dt = Some(-h.value(t, big_q, p_end));
        out.ds = Some(h.value(s, xi.q, xi.p));
    }
    Ok(out)
}

/// A critical point of q ↦ S(Q, ·): the characteristic from (q, u'(q)) reaching Q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub xi: FamilyPoint,
    /// u(q) + action of the characteristic.
    pub value: f64,
    /// End momentum.
    pub p_end: f64,
}

/// Finds every q in `window` with Q^t_s(q, u'(q)) = Q by scanning at `scan_step`
/// and bisecting sign changes; roots closer than 2·tol are merged. `lip` is the
/// Lipschitz constant of u, used to check that the window covers the
/// localization ball. With a subdivision, ν is filled from the characteristic.
#[allow(clippy::too_many_arguments)]
pub fn critical_points_s(
    h: &HamiltonianModel,
    u: &dyn C1Function,
    lip: f64,
    s: f64,
    t: f64,
    big_q: f64,
    window: (f64, f64),
    scan_step: f64,
    tol: f64,
    sub: Option<&Subdivision>,
) -> Result<Vec<CriticalPoint>> {
    let radii = localization_radii(h.constant_c(), lip, s, t, h.is_integrable())?;
    if window.0 > big_q - radii.r_q || window.1 < big_q + radii.r_q {
        return Err(Error::WindowTooSmall { lo: window.0, hi: window.1, center: big_q, radius: radii.r_q });
    }
    if !(scan_step > 0.0) {
        return Err(Error::InvalidArgument("scan step must be positive".into()));
    }
    let flow_tol = tol.min(1e-11);
    let g = |q: f64| -> Result<f64> { Ok(flow_end(h, q, u.deriv(q), s, t, flow_tol)?.q - big_q) };
    let n = ((window.1 - window.0) / scan_step).ceil() as usize;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = window.0;
    let mut prev = g(prev_x)?;
    if prev == 0.0 {
        roots.push(prev_x);
    }
    for i in 1..=n {
        let x = (window.0 + scan_step * i as f64).min(window.1);
        let v = g(x)?;
        if v == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (prev < 0.0) != (v < 0.0) {
            let (mut a, mut b, mut fa) = (prev_x, x, prev);
            while b - a > tol.min(1e-13 * (1.0 + a.abs())).max(f64::EPSILON * (1.0 + a.abs())) {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = g(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev = v;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * tol);
    if roots.is_empty() {
        return Err(Error::NoCriticalPoint {
            q: big_q,
            reason: "no characteristic reaches Q (derivative of u discontinuous? mollify first)".into(),
        });
    }
    roots
        .into_iter()
        .map(|q| {
            let p = u.deriv(q);
            let end = flow_end(h, q, p, s, t, flow_tol)?;
            let mut nu = Vec::new();
            if let Some(sub) = sub {
                let ts = sub.times();
                let (mut cq, mut cp) = (q, p);
                for w in ts.windows(2).take(ts.len() - 2) {
                    let e = flow_end(h, cq, cp, w[0], w[1], flow_tol)?;
                    cq = e.q;
                    cp = e.p;
                    nu.push((cq, cp));
                }
            }
            Ok(CriticalPoint { xi: FamilyPoint { q, p, nu }, value: u.value(q) + end.action, p_end: end.p })
        })
        .collect()
}

/// Symmetric matrix of the quadratic part of S in the basis
/// (p₀, p₁, …, p_N, q, Q₀, …, Q_{N−1}), and its number of negative eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticNormalForm {
    pub matrix: Vec<Vec<f64>>,
    pub index: usize,
}

pub fn quadratic_normal_form(sub: &Subdivision, z: f64) -> Result<QuadraticNormalForm> {
    let n1 = sub.n_inner() + 1;
    let dim = 2 * n1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let times = sub.times();
    for i in 0..n1 {
        m[(i, i)] = (times[i + 1] - times[i]) * z;
        m[(i, n1 + i)] = -0.5;
        m[(n1 + i, i)] = -0.5;
        if i + 1 < n1 {
            m[(i, n1 + i + 1)] = 0.5;
            m[(n1 + i + 1, i)] = 0.5;
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|l| l.abs() < 1e-12) {
        return Err(Error::InvalidArgument("quadratic form is degenerate".into()));
    }
    let index = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
    let matrix = (0..dim).map(|r| (0..dim).map(|c| m[(r, c)]).collect()).collect();
    Ok(QuadraticNormalForm { matrix, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Analytic;
    use crate::hamiltonian::registry;

    fn lin() -> Analytic<impl Fn(f64) -> f64 + Sync, impl Fn(f64) -> f64 + Sync> {
        Analytic::new(|q: f64| q, |_| 1.0)
    }

    #[test]
    fn f_for_zero_and_quadratic() {
        let f = eval_f(&registry::zero(), 0.0, 0.3, 1.2, -0.4, 1e-12).unwrap();
        assert_eq!((f.value, f.d_big_q, f.d_p), (0.0, 0.0, 0.0));
        for &(bq, p) in &[(0.0, 1.0), (3.0, 1.0), (-2.0, -0.7)] {
            let f = eval_f(&registry::quadratic(), 0.1, 0.4, bq, p, 1e-12).unwrap();
            assert!((f.value + 0.3 * p * p / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn f_gradient_by_finite_differences() {
        for h in [registry::pendulum(), registry::nonconvex_bump(2.0)] {
            let (s, t) = (0.0, 0.9 * max_step_delta1(h.constant_c()).unwrap());
            for &(bq, p) in &[(0.3, 0.5), (-1.0, -1.2), (2.0, 0.1)] {
                let f = eval_f(&h, s, t, bq, p, 1e-12).unwrap();
                let e = 1e-5;
                let fq = (eval_f(&h, s, t, bq + e, p, 1e-12).unwrap().value - eval_f(&h, s, t, bq - e, p, 1e-12).unwrap().value) / (2.0 * e);
                let fp = (eval_f(&h, s, t, bq, p + e, 1e-12).unwrap().value - eval_f(&h, s, t, bq, p - e, 1e-12).unwrap().value) / (2.0 * e);
                assert!((fq - f.d_big_q).abs() < 1e-5, "{}: {fq} vs {}", h.name(), f.d_big_q);
                assert!((fp - f.d_p).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn s_with_zero_hamiltonian() {
        let u = Analytic::new(|q: f64| q.sin(), |q: f64| q.cos());
        let sub = Subdivision::single(0.0, 0.2).unwrap();
        let xi = FamilyPoint::new(0.3, 0.8);
        let e = eval_s(&registry::zero(), &u, &sub, 1.0, &xi, 1e-12).unwrap();
        assert!((e.value - (0.3f64.sin() + 0.8 * 0.7)).abs() < 1e-15);
        assert!((e.grad_q - (0.3f64.cos() - 0.8)).abs() < 1e-15);
        assert!((e.grad_p - 0.7).abs() < 1e-15);
        let xi = FamilyPoint::new(1.0, 1.0f64.cos());
        let e = eval_s(&registry::zero(), &u, &sub, 1.0, &xi, 1e-12).unwrap();
        assert!((e.value - 1.0f64.sin()).abs() < 1e-15 && e.grad_norm() < 1e-15);
    }

    #[test]
    fn s_linear_data_quadratic_h() {
        let t = 0.3;
        let sub = Subdivision::single(0.0, t).unwrap();
        let bq = 0.7;
        let e = eval_s(&registry::quadratic(), &lin(), &sub, bq, &FamilyPoint::new(bq - t, 1.0), 1e-12).unwrap();
        assert!((e.value - (bq - t / 2.0)).abs() < 1e-14);
        assert!(e.grad_norm() < 1e-14);
        assert!((e.dt.unwrap() + 0.5).abs() < 1e-14 && (e.ds.unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn s_gradient_multi_step() {
        let h = registry::pendulum();
        let u = Analytic::new(|q: f64| 0.5 * q.cos(), |q: f64| -0.5 * q.sin());
        let sub = Subdivision::new(vec![0.0, 0.2, 0.35, 0.6]).unwrap();
        let xi = FamilyPoint { q: 0.1, p: 0.4, nu: vec![(0.2, 0.3), (0.5, -0.1)] };
        let bq = 0.6;
        let e = eval_s(&h, &u, &sub, bq, &xi, 1e-12).unwrap();
        let val = |xi: &FamilyPoint, bq: f64| eval_s(&h, &u, &sub, bq, xi, 1e-12).unwrap().value;
        let d = 1e-5;
        let mut a = xi.clone();
        a.q += d;
        let mut b = xi.clone();
        b.q -= d;
        assert!(((val(&a, bq) - val(&b, bq)) / (2.0 * d) - e.grad_q).abs() < 1e-6);
        let mut a = xi.clone();
        a.p += d;
        let mut b = xi.clone();
        b.p -= d;
        assert!(((val(&a, bq) - val(&b, bq)) / (2.0 * d) - e.grad_p).abs() < 1e-6);
        for j in 0..2 {
            let mut a = xi.clone();
            a.nu[j].0 += d;
            let mut b = xi.clone();
            b.nu[j].0 -= d;
            assert!(((val(&a, bq) - val(&b, bq)) / (2.0 * d) - e.grad_nu[j].0).abs() < 1e-6);
            let mut a = xi.clone();
            a.nu[j].1 += d;
            let mut b = xi.clone();
            b.nu[j].1 -= d;
            assert!(((val(&a, bq) - val(&b, bq)) / (2.0 * d) - e.grad_nu[j].1).abs() < 1e-6);
        }
        assert!(((val(&xi, bq + d) - val(&xi, bq - d)) / (2.0 * d) - e.d_big_q).abs() < 1e-6);
    }

    #[test]
    fn critical_points_simple_cases() {
        let u = Analytic::new(|q: f64| q.sin(), |q: f64| q.cos());
        let cps = critical_points_s(&registry::zero(), &u, 1.0, 0.0, 0.2, 0.4, (-1.0, 2.0), 0.01, 1e-12, None).unwrap();
        assert_eq!(cps.len(), 1);
        assert!((cps[0].xi.q - 0.4).abs() < 1e-12 && (cps[0].value - 0.4f64.sin()).abs() < 1e-12);
        assert!((cps[0].p_end - 0.4f64.cos()).abs() < 1e-12);

        let cps = critical_points_s(&registry::quadratic(), &lin(), 1.0, 0.0, 0.3, 0.25, (-1.0, 1.0), 0.01, 1e-12, None).unwrap();
        assert_eq!(cps.len(), 1);
        assert!((cps[0].xi.q + 0.05).abs() < 1e-12 && (cps[0].value - 0.1).abs() < 1e-12 && cps[0].p_end == 1.0);
    }

    #[test]
    fn critical_points_after_caustic() {
        // u = −q²/2 clamped to slope ±2: characteristics q + t·u'(q) focus at t = 1.
        let u = Analytic::new(
            |q: f64| if q.abs() <= 2.0 { -0.5 * q * q } else { -2.0 * q.abs() + 2.0 },
            |q: f64| (-q).clamp(-2.0, 2.0),
        );
        let t = 1.5;
        let cps = critical_points_s(&registry::quadratic(), &u, 2.0, 0.0, t, 0.0, (-6.0, 6.0), 1e-3, 1e-12, None).unwrap();
        assert!(cps.len() >= 3, "{} roots", cps.len());
        // Dense oracle: sign changes of q + t·u'(q) at step 1e-4.
        let g = |q: f64| q + t * (-q).clamp(-2.0, 2.0);
        let mut count = 0;
        let mut x = -6.0;
        while x < 6.0 {
            if (g(x) < 0.0) != (g(x + 1e-4) < 0.0) || g(x) == 0.0 {
                count += 1;
            }
            x += 1e-4;
        }
        assert_eq!(count, cps.len());
        for cp in &cps {
            let expect = u.value(cp.xi.q) + t * cp.xi.p * cp.xi.p / 2.0;
            assert!((cp.value - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn critical_window_must_cover_ball() {
        let r = critical_points_s(&registry::quadratic(), &lin(), 1.0, 0.0, 0.3, 0.0, (-0.1, 0.1), 0.01, 1e-12, None);
        assert!(matches!(r, Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn normal_forms() {
        let f = quadratic_normal_form(&Subdivision::single(0.0, 0.3).unwrap(), 0.0).unwrap();
        assert_eq!(f.matrix, vec![vec![0.0, -0.5], vec![-0.5, 0.0]]);
        assert_eq!(f.index, 1);
        let f = quadratic_normal_form(&Subdivision::single(0.0, 0.3).unwrap(), 2.0).unwrap();
        assert!((f.matrix[0][0] - 0.6).abs() < 1e-15 && f.index == 1);
        let f = quadratic_normal_form(&Subdivision::new(vec![0.0, 0.1, 0.3]).unwrap(), 0.0).unwrap();
        assert_eq!(f.matrix.len(), 4);
        assert_eq!(f.index, 2);
    }
}
