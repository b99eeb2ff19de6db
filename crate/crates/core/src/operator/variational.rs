use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OperatorConfig;
use crate::error::{Error, Result};
use crate::family::eval_f;
use crate::grid::GridFunction;
use crate::hamiltonian::{cutoff_compact_support, integrable_reach, localization_radii, max_step_delta1, HamiltonianModel, Radii};
use crate::selector::{sigma_mountain_pass_bounded, uniform_axis, SaddleLandscape};

/// Constants of one step s → t for data with Lipschitz constant `lip`.
#[derive(Clone, Debug)]
pub struct StepPlan {
    pub s: f64,
    pub t: f64,
    /// C(1 + ε) of the cut-off model.
    pub c_eff: f64,
    pub radii: Radii,
    /// Landscape half-height in p.
    pub wp: f64,
    /// Certified Lipschitz bound of the output.
    pub lip_bound: f64,
    pub cut: HamiltonianModel,
}

pub fn step_plan(h: &HamiltonianModel, lip: f64, s: f64, t: f64, cfg: &OperatorConfig) -> Result<StepPlan> {
    cfg.validate()?;
    if !(t >= s) {
        return Err(Error::InvalidArgument(format!("step needs s <= t (s={s}, t={t})")));
    }
    let tau = t - s;
    let c_eff = h.constant_c() * (1.0 + cfg.cutoff_eps);
    // For H = H(p) the one-step family −(t−s)H(p) + p(Q−q) is a generating family for
    // every step length, so the step restriction only applies to general models.
    if !h.is_integrable() {
        let d1 = max_step_delta1(c_eff)?;
        if tau > d1 * (1.0 + 1e-12) {
            return Err(Error::StepTooLong { step: tau, bound: d1, what: "one variational step vs ln(3/2)/(C(1+eps))" });
        }
    }
    let (radii, lip_bound) = if h.is_integrable() {
        (Radii { r_q: integrable_reach(h, lip, s, t), r_p: lip }, lip)
    } else {
        let r = localization_radii(c_eff, lip, s, t, false)?;
        (r, (c_eff * tau).exp() * (1.0 + lip) - 1.0)
    };
    let wp = cfg.window_margin * radii.r_p.max(0.5);
    // Trajectories started with |p| ≤ wp keep |p| below (1+wp)e^{C'τ}: the cutoff is
    // invisible on the landscape window.
    let cut_radius = (1.0 + wp) * (c_eff * tau).exp();
    let cut = cutoff_compact_support(h, cut_radius, cfg.cutoff_eps)?;
    Ok(StepPlan { s, t, c_eff, radii, wp, lip_bound, cut })
}

/// Outcome of the selection at one output point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSelection {
    pub value: f64,
    /// (q, p) of the pass cell.
    pub pass: (f64, f64),
    /// Value from the first, coarse pass.
    pub coarse_value: f64,
    #[serde(skip)]
    pub landscape: Option<SaddleLandscape>,
}

const MAX_REFINEMENTS: usize = 8;

fn u_at(u: &GridFunction, j: i64) -> f64 {
    if j >= 0 && (j as usize) < u.len() {
        u.values()[j as usize]
    } else {
        u.eval(u.origin() + u.step() * j as f64)
    }
}

fn merge_axis(mut a: Vec<f64>, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    a.extend(extra);
    a.sort_by(f64::total_cmp);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    a.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * scale);
    a
}

/// R^t_s u(Q) via the mountain-pass value of (q, p) ↦ u(q) + F^t_s(Q, p) + p(Q − q).
/// The q-axis is a sublattice of u's grid so that kinks of u fall on nodes.
pub fn select_at(plan: &StepPlan, u: &GridFunction, big_q: f64, cfg: &OperatorConfig, keep_landscape: bool) -> Result<PointSelection> {
    let h = u.step();
    let o = u.origin();
    let fam = |p: f64| eval_f(&plan.cut, plan.s, plan.t, big_q, p, cfg.tol);
    let p_axis = uniform_axis(-plan.wp, plan.wp, cfg.n_p);
    let mut fvals = Vec::with_capacity(p_axis.len());
    let mut reach: f64 = 0.0;
    for &p in &p_axis {
        let f = fam(p)?;
        reach = reach.max((f.q_start - big_q).abs());
        fvals.push(f.value);
    }
    let wq = (cfg.window_margin * plan.radii.r_q).max(1.25 * reach).max(4.0 * h);
    let m = ((2.0 * wq / ((cfg.n_q - 1) as f64 * h)).ceil() as i64).max(1);
    let dq = m as f64 * h;
    let j_lo = ((big_q - wq - o) / dq).floor() as i64;
    let j_hi = ((big_q - o + wq) / dq).ceil() as i64;
    let q_idx: Vec<i64> = (j_lo..=j_hi).map(|j| j * m).collect();

    let build = |q_idx: &[i64], p_axis: &[f64], fvals: &[f64]| -> Result<SaddleLandscape> {
        let q_axis: Vec<f64> = q_idx.iter().map(|&k| o + h * k as f64).collect();
        let mut vals = Vec::with_capacity(q_axis.len() * p_axis.len());
        for (&k, &q) in q_idx.iter().zip(&q_axis) {
            let uq = u_at(u, k);
            for (&p, &f) in p_axis.iter().zip(fvals) {
                vals.push(uq + f + p * (big_q - q));
            }
        }
        SaddleLandscape::from_values(q_axis, p_axis.to_vec(), vals, (big_q, 0.0))
    };

    let land = build(&q_idx, &p_axis, &fvals)?;
    let first = sigma_mountain_pass_bounded(&land, Some(land.column_bound()))?;
    let (iq, ip) = first.pass_cell.expect("mountain pass reports its cell");
    if !cfg.refine {
        let pass = (land.q_axis()[iq], land.p_axis()[ip]);
        return Ok(PointSelection { value: first.value, pass, coarse_value: first.value, landscape: keep_landscape.then_some(land) });
    }

    // Adaptive refinement around the binding cell: all of u's nodes within two coarse
    // q-cells, and momenta refined by factors of 8 down to 1/64 of the coarse spacing.
    // Repeats while the pass moves into a region that is still coarse (ties between
    // symmetric saddles need both refined).
    let dp0 = p_axis[1] - p_axis[0];
    let p_min_gap = dp0 / 64.0 * (1.0 + 1e-9);
    let mut q_ref: Vec<i64> = q_idx;
    let mut p_cur = p_axis;
    let mut f_cur = fvals;
    let mut cell = (q_ref[iq], p_cur[ip], ip);
    let mut result = None;
    for _ in 0..MAX_REFINEMENTS {
        let (kc, pc, jp) = cell;
        let mut changed = false;
        if m > 1 && !((kc - 2 * m)..=(kc + 2 * m)).all(|k| q_ref.binary_search(&k).is_ok()) {
            q_ref.extend((kc - 2 * m)..=(kc + 2 * m));
            q_ref.sort_unstable();
            q_ref.dedup();
            changed = true;
        }
        let gap = [jp.checked_sub(1), Some(jp + 1)]
            .into_iter()
            .flatten()
            .filter_map(|j| p_cur.get(j))
            .map(|&p| (p - pc).abs())
            .fold(f64::INFINITY, f64::min);
        if gap > p_min_gap {
            let dp = gap / 8.0;
            let extra: Vec<f64> = (-16..=16).map(|k| pc + dp * k as f64).filter(|p| p.abs() < plan.wp).collect();
            let p_ref = merge_axis(p_cur.clone(), extra);
            let mut f_ref = Vec::with_capacity(p_ref.len());
            let mut it = p_cur.iter().zip(&f_cur).peekable();
            for &p in &p_ref {
                match it.peek() {
                    Some((&pa, &fa)) if pa == p => {
                        f_ref.push(fa);
                        it.next();
                    }
                    _ => f_ref.push(fam(p)?.value),
                }
            }
            p_cur = p_ref;
            f_cur = f_ref;
            changed = true;
        }
        if !changed && result.is_some() {
            break;
        }
        let fine = build(&q_ref, &p_cur, &f_cur)?;
        let sel = sigma_mountain_pass_bounded(&fine, Some(fine.column_bound()))?;
        let (jq, jp) = sel.pass_cell.expect("mountain pass reports its cell");
        cell = (q_ref[jq], p_cur[jp], jp);
        result = Some((sel.value, (fine.q_axis()[jq], p_cur[jp]), fine));
    }
    let (value, pass, fine) = result.expect("at least one refinement pass");
    Ok(PointSelection { value, pass, coarse_value: first.value, landscape: keep_landscape.then_some(fine) })
}

/// One step of the variational operator on the nodes of `u` whose localization
/// ball stays inside u's domain. Fails if the output slope exceeds the certified
/// Lipschitz bound by more than the grid slack 4·Lip(u).
pub fn variational_step(h: &HamiltonianModel, u: &GridFunction, s: f64, t: f64, cfg: &OperatorConfig) -> Result<GridFunction> {
    let plan = step_plan(h, u.lip(), s, t, cfg)?;
    let (a, b) = u.domain();
    let r = plan.radii.r_q;
    let out = u.restrict(a + r, b - r).map_err(|_| Error::DomainExhausted { radius: r })?;
    let values: Vec<f64> = out
        .nodes()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| select_at(&plan, u, q, cfg, false).map(|sel| sel.value))
        .collect::<Result<_>>()?;
    finish(out.origin(), out.step(), values, plan.lip_bound, u.lip())
}

pub(crate) fn finish(origin: f64, step: f64, values: Vec<f64>, bound: f64, lip_in: f64) -> Result<GridFunction> {
    let measured = values.windows(2).map(|w| (w[1] - w[0]).abs() / step).fold(0.0, f64::max);
    if measured > bound + 4.0 * lip_in + 1e-9 {
        return Err(Error::LipschitzViolation { measured, bound });
    }
    GridFunction::new(origin, step, values, bound.max(measured))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::InitialCondition;
    use crate::hamiltonian::registry;

    fn small() -> OperatorConfig {
        OperatorConfig { n_q: 120, n_p: 120, ..Default::default() }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let u = InitialCondition::Cos.to_grid(-1.0, 1.0, 0.01).unwrap();
        let r = variational_step(&registry::zero(), &u, 0.0, 0.3, &small()).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            assert!((v - u.eval(q)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_hamiltonian_shifts() {
        let u = InitialCondition::Abs.to_grid(-1.0, 1.0, 0.01).unwrap();
        let r = variational_step(&registry::constant(0.7), &u, 0.1, 0.3, &small()).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            assert!((v - (q.abs() - 0.7 * 0.2)).abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_plane_wave() {
        let u = InitialCondition::Linear { a: 0.6 }.to_grid(-1.0, 1.0, 0.01).unwrap();
        let r = variational_step(&registry::quadratic(), &u, 0.0, 0.25, &small()).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            assert!((v - (0.6 * q - 0.36 * 0.25 / 2.0)).abs() < 1e-4, "{q}: {v}");
        }
    }

    #[test]
    fn general_step_length_is_checked() {
        let u = InitialCondition::Cos.to_grid(-1.0, 1.0, 0.01).unwrap();
        let e = variational_step(&registry::pendulum(), &u, 0.0, 0.5, &small()).unwrap_err();
        assert!(matches!(e, Error::StepTooLong { .. }));
    }

    #[test]
    fn domain_exhaustion() {
        let u = InitialCondition::Cos.to_grid(-0.1, 0.1, 0.01).unwrap();
        let e = variational_step(&registry::quadratic(), &u, 0.0, 0.3, &small()).unwrap_err();
        assert!(matches!(e, Error::DomainExhausted { .. }));
    }
}
