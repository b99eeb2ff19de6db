use super::{variational_step, OperatorConfig};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::hamiltonian::HamiltonianModel;

/// (sup |R^t_s u − R^t_r R^r_s u|, 2C e^{2C(t−s)} (1+L)² (r−s)) on the domain of the
/// two-step result.
pub fn nonmarkov_defect(h: &HamiltonianModel, u: &GridFunction, s: f64, r: f64, t: f64, cfg: &OperatorConfig) -> Result<(f64, f64)> {
    if !(s <= r && r <= t) {
        return Err(Error::InvalidArgument(format!("need s <= r <= t (s={s}, r={r}, t={t})")));
    }
    let one = variational_step(h, u, s, t, cfg)?;
    let two = variational_step(h, &variational_step(h, u, s, r, cfg)?, r, t, cfg)?;
    let (lo, hi) = one.domain();
    let defect = two
        .nodes()
        .zip(two.values())
        .filter(|(q, _)| *q >= lo - 1e-9 && *q <= hi + 1e-9)
        .map(|(q, v)| (one.eval(q) - v).abs()).fold(0.0, f64::max);
    let c = h.constant_c();
    let bound = 2.0 * c * (2.0 * c * (t - s)).exp() * (1.0 + u.lip()).powi(2) * (r - s);
    Ok((defect, bound))
}
