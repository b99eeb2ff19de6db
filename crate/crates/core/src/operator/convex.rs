use rayon::prelude::*;

use super::variational::finish;
use super::OperatorConfig;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::hamiltonian::{flow_end, integrable_reach, legendre_transform, localization_radii, twist_delta2, Convexity, HamiltonianModel};

fn u_at(u: &GridFunction, j: i64) -> f64 {
    if j >= 0 && (j as usize) < u.len() {
        u.values()[j as usize]
    } else {
        u.eval(u.origin() + u.step() * j as f64)
    }
}

/// Hopf-Lax formula for convex H = H(p):
/// T u(q) = min over grid y of u(y) + (t−s)·L((q−y)/(t−s)).
pub fn hopf_lax(h: &HamiltonianModel, u: &GridFunction, s: f64, t: f64) -> Result<GridFunction> {
    if !h.is_integrable() || !matches!(h.convexity(), Convexity::Convex(_)) {
        return Err(Error::Incompatible(format!("Hopf-Lax needs a convex H = H(p); {} is not", h.name())));
    }
    if !(t >= s) {
        return Err(Error::InvalidArgument(format!("step needs s <= t (s={s}, t={t})")));
    }
    let tau = t - s;
    if tau == 0.0 {
        return Ok(u.clone());
    }
    let step = u.step();
    let radius = integrable_reach(h, u.lip(), s, t);
    let k_max = (radius / step).ceil() as i64 + 1;
    let lag: Vec<f64> = (-k_max..=k_max)
        .map(|k| legendre_transform(h, s, 0.0, k as f64 * step / tau).map(|(l, _)| tau * l))
        .collect::<Result<_>>()?;
    let (a, b) = u.domain();
    let out = u.restrict(a + radius, b - radius).map_err(|_| Error::DomainExhausted { radius })?;
    let first = u.index_of(out.origin()).expect("restricted grid shares nodes") as i64;
    let values: Vec<f64> = (0..out.len() as i64)
        .into_par_iter()
        .map(|i| {
            let gi = first + i;
            (-k_max..=k_max).map(|k| u_at(u, gi - k) + lag[(k + k_max) as usize]).fold(f64::INFINITY, f64::min)
        })
        .collect();
    finish(out.origin(), step, values, u.lip(), u.lip())
}

/// Lax-Oleinik step for H convex (or concave) in p, over a step inside the twist
/// window: for each Q, extremize over grid q of u(q) + action of the unique
/// trajectory from q to Q, found by bisection on the initial momentum.
/// Concave models take the maximum.
pub fn lax_oleinik_step(h: &HamiltonianModel, u: &GridFunction, s: f64, t: f64, cfg: &OperatorConfig) -> Result<GridFunction> {
    let (sign, m) = match h.convexity() {
        Convexity::Convex(m) => (1.0, m),
        Convexity::Concave(m) => (-1.0, m),
        Convexity::None => return Err(Error::Incompatible(format!("Lax-Oleinik needs a convex or concave model; {} is neither", h.name()))),
    };
    if !(t >= s) {
        return Err(Error::InvalidArgument(format!("step needs s <= t (s={s}, t={t})")));
    }
    let tau = t - s;
    if tau == 0.0 {
        return Ok(u.clone());
    }
    let d2 = twist_delta2(h.constant_c(), m)?;
    if !h.is_integrable() && tau > d2 {
        return Err(Error::StepTooLong { step: tau, bound: d2, what: "Lax-Oleinik step vs twist window" });
    }
    let (radius, bound) = if h.is_integrable() {
        (integrable_reach(h, u.lip(), s, t), u.lip())
    } else {
        let r = localization_radii(h.constant_c(), u.lip(), s, t, false)?;
        (r.r_q, (h.constant_c() * tau).exp() * (1.0 + u.lip()) - 1.0)
    };
    let step = u.step();
    let (a, b) = u.domain();
    let out = u.restrict(a + radius, b - radius).map_err(|_| Error::DomainExhausted { radius })?;
    let first = u.index_of(out.origin()).expect("restricted grid shares nodes") as i64;
    let k_max = (radius / step).ceil() as i64 + 1;
    let tol = cfg.tol;
    let values: Vec<f64> = (0..out.len() as i64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let gi = first + i;
            let big_q = out.node(i as usize);
            let mut best = f64::INFINITY;
            for k in -k_max..=k_max {
                let q = u.origin() + step * (gi - k) as f64;
                let action = shoot(h, q, big_q, s, t, sign, tol)?;
                best = best.min(sign * (u_at(u, gi - k) + action));
            }
            Ok(sign * best)
        })
        .collect::<Result<_>>()?;
    finish(out.origin(), step, values, bound, u.lip())
}

// Action of the trajectory from position q at time s to position Q at time t.
// Q^t_s(q, ·) is increasing (convex) or decreasing (concave) in p.
fn shoot(h: &HamiltonianModel, q: f64, big_q: f64, s: f64, t: f64, sign: f64, tol: f64) -> Result<f64> {
    let miss = |p: f64| -> Result<(f64, f64)> {
        let e = flow_end(h, q, p, s, t, tol)?;
        Ok((sign * (e.q - big_q), e.action))
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut tries = 0;
    while miss(lo)?.0 > 0.0 {
        lo *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoConvergence(format!("shooting bracket from q={q} to Q={big_q} (step beyond twist window?)")));
        }
    }
    while miss(hi)?.0 < 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoConvergence(format!("shooting bracket from q={q} to Q={big_q} (step beyond twist window?)")));
        }
    }
    let mut last = miss(0.5 * (lo + hi))?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        last = miss(mid)?;
        if last.0.abs() <= 1e-14 * (1.0 + big_q.abs()) || mid <= lo || mid >= hi {
            break;
        }
        if last.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(last.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::InitialCondition;
    use crate::hamiltonian::registry;

    #[test]
    fn constant_data_is_stationary() {
        let u = InitialCondition::Constant { c: 2.5 }.to_grid(-1.0, 1.0, 0.01).unwrap();
        let r = hopf_lax(&registry::quadratic(), &u, 0.0, 0.5).unwrap();
        assert!(r.values().iter().all(|&v| (v - 2.5).abs() < 1e-15));
    }

    #[test]
    fn plane_wave() {
        let a = 0.8;
        let u = InitialCondition::Linear { a }.to_grid(-2.0, 2.0, 0.01).unwrap();
        let r = hopf_lax(&registry::quadratic(), &u, 0.0, 0.5).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            // grid minimizer y = q − t·a lies on a node: exact
            assert!((v - (a * q - a * a * 0.25)).abs() < 1e-12, "{q} {v}");
        }
    }

    #[test]
    fn neg_abs_closed_form() {
        let t = 0.3;
        let u = InitialCondition::NegAbs.to_grid(-2.0, 2.0, 0.01).unwrap();
        let r = hopf_lax(&registry::quadratic(), &u, 0.0, t).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            assert!((v - (-q.abs() - t / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonconvex() {
        let u = InitialCondition::Abs.to_grid(-2.0, 2.0, 0.01).unwrap();
        assert!(matches!(hopf_lax(&registry::nonconvex_bump(2.0), &u, 0.0, 0.1), Err(Error::Incompatible(_))));
        assert!(matches!(hopf_lax(&registry::pendulum(), &u, 0.0, 0.1), Err(Error::Incompatible(_))));
    }

    #[test]
    fn lax_oleinik_quadratic_equals_hopf_lax() {
        let u = InitialCondition::Abs.to_grid(-2.0, 2.0, 0.01).unwrap();
        let h = registry::quadratic();
        let a = hopf_lax(&h, &u, 0.0, 0.4).unwrap();
        let b = lax_oleinik_step(&h, &u, 0.0, 0.4, &OperatorConfig::default()).unwrap();
        assert_eq!(a.origin(), b.origin());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn concave_is_mirror_of_convex() {
        let u = InitialCondition::Cos.to_grid(-2.0, 2.0, 0.01).unwrap();
        let neg = u.map_values(1.0, |_, v| -v).unwrap();
        let a = lax_oleinik_step(&registry::concave_quadratic(), &u, 0.0, 0.4, &OperatorConfig::default()).unwrap();
        let b = hopf_lax(&registry::quadratic(), &neg, 0.0, 0.4).unwrap();
        for (q, x) in a.nodes().zip(a.values()) {
            assert!((x + b.eval(q)).abs() < 1e-12);
        }
    }
}
