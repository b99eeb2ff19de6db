use serde::{Deserialize, Serialize};

use super::model::HamiltonianModel;
use crate::error::{Error, Result};

/// Largest step for which φ^t_s − id is ½-Lipschitz: ln(3/2)/C.
pub fn max_step_delta1(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
    }
    Ok(1.5f64.ln() / c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r_q: f64,
    pub r_p: f64,
}

/// Balls containing every critical characteristic ending at Q:
/// |q − Q| ≤ (e^{C(t−s)}−1)(1+L), |p| ≤ e^{C(t−s)}(1+L)−1.
/// With `integrable` the sharper C(t−s)(1+L), L are returned.
pub fn localization_radii(c: f64, lip: f64, s: f64, t: f64, integrable: bool) -> Result<Radii> {
    if !(c > 0.0) || !(lip >= 0.0) || !(s <= t) {
        return Err(Error::InvalidArgument(format!("radii need C>0, L>=0, s<=t (C={c}, L={lip}, s={s}, t={t})")));
    }
    let tau = t - s;
    if integrable {
        return Ok(Radii { r_q: c * tau * (1.0 + lip), r_p: lip });
    }
    let g = (c * tau).exp_m1();
    Ok(Radii { r_q: g * (1.0 + lip), r_p: (1.0 + g) * (1.0 + lip) - 1.0 })
}

/// Sharp position radius for H = H(p): (t−s)·sup_{|p|≤L} |H'(p)|, by dense sampling
/// plus the Lipschitz slack C·Δp/2 so the result is a rigorous upper bound.
pub fn integrable_reach(h: &HamiltonianModel, lip: f64, s: f64, t: f64) -> f64 {
    let n = 2000;
    let dp = 2.0 * lip / n as f64;
    let mut m: f64 = 0.0;
    for i in 0..=n {
        let p = -lip + dp * i as f64;
        m = m.max(h.eval(s, 0.0, p).dp.abs());
    }
    (t - s) * (m + h.constant_c() * dp * 0.5)
}

/// Twist window: half the largest τ with mτ ≥ 4(e^{Cτ} − 1 − Cτ).
pub fn twist_delta2(c: f64, m: f64) -> Result<f64> {
    if !(c > 0.0 && m > 0.0) {
        return Err(Error::InvalidArgument(format!("twist window needs C>0, m>0 (C={c}, m={m})")));
    }
    let g = |tau: f64| m * tau - 4.0 * ((c * tau).exp_m1() - c * tau);
    let mut hi = 1.0 / c;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * lo)
}
