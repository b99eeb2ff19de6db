use serde::{Deserialize, Serialize};

use super::{sigma_mountain_pass, sigma_opposite, SaddleLandscape};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub property: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn get(&self, property: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.property == property)
    }

    fn push(&mut self, property: &str, measured: f64, bound: f64) {
        self.entries.push(AuditEntry { property: property.into(), measured, bound, pass: measured <= bound });
    }
}

/// Sampling grid for an audit, centered saddle at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditGrid {
    pub q_range: (f64, f64),
    pub p_range: (f64, f64),
    pub n_q: usize,
    pub n_p: usize,
}

impl AuditGrid {
    pub fn sample(&self, f: &dyn Fn(f64, f64) -> f64) -> Result<SaddleLandscape> {
        SaddleLandscape::uniform(self.q_range, self.p_range, self.n_q, self.n_p, (0.0, 0.0), f)
    }
}

/// Checks the selector axioms on f and g:
/// additivity σ(f+c) = σ(f)+c; monotonicity through min(f,g) ≤ f ≤ max(f,g) (and f ≤ g
/// directly when that holds on the grid); continuity |σf − σg| ≤ ‖f−g‖;
/// σ(−f) = −σ(f) within one cell gap; invariance under the end-preserving linear map
/// (q,p) ↦ (a·q + κ·p, b·p) with a, b > 0, κ ≥ 0 within the cell gaps of both samples;
/// and that the pass cell is a grid-approximate critical point.
pub fn axiom_audit(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    g: &(dyn Fn(f64, f64) -> f64 + Sync),
    grid: &AuditGrid,
    constant: f64,
    linear_map: (f64, f64, f64),
) -> Result<AuditReport> {
    let mut rep = AuditReport::default();
    let lf = grid.sample(f)?;
    let lg = grid.sample(g)?;
    let rf = sigma_mountain_pass(&lf)?;
    let sf = rf.value;
    let sg = sigma_mountain_pass(&lg)?.value;

    let shifted = grid.sample(&|q, p| f(q, p) + constant)?;
    rep.push("additivity", (sigma_mountain_pass(&shifted)?.value - (sf + constant)).abs(), 0.0);

    let lo = grid.sample(&|q, p| f(q, p).min(g(q, p)))?;
    let hi = grid.sample(&|q, p| f(q, p).max(g(q, p)))?;
    let m = (sigma_mountain_pass(&lo)?.value - sf).max(sf - sigma_mountain_pass(&hi)?.value).max(0.0);
    let ordered = lf.values().iter().zip(lg.values()).all(|(a, b)| a <= b);
    let m = if ordered { m.max(sf - sg) } else { m };
    rep.push("monotonicity", m, 0.0);

    let dist = lf.values().iter().zip(lg.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    rep.push("continuity", (sf - sg).abs() - dist, 1e-12);

    rep.push("opposite", (sigma_opposite(&lf)?.value - sf).abs(), lf.cell_gap());

    let (a, b, k) = linear_map;
    let mapped = grid.sample(&|q, p| f(a * q + k * p, b * p))?;
    rep.push("linear_invariance", (sigma_mountain_pass(&mapped)?.value - sf).abs(), lf.cell_gap() + mapped.cell_gap());

    let (gn, curv) = pass_gradient(&lf, rf.pass_cell.expect("mountain pass reports its cell"));
    rep.push("critical_membership", gn, 3.0 * curv * lf.grid_step() + 1e-12);
    Ok(rep)
}

// Central-difference gradient norm at the cell and the largest second difference
// (per unit length squared) in its 5×5 neighbourhood.
fn pass_gradient(land: &SaddleLandscape, (iq, ip): (usize, usize)) -> (f64, f64) {
    let (nq, np) = land.shape();
    let (qa, pa) = (land.q_axis(), land.p_axis());
    let clampi = |i: isize, n: usize| i.clamp(1, n as isize - 2) as usize;
    let (cq, cp) = (clampi(iq as isize, nq), clampi(ip as isize, np));
    let gq = (land.at(cq + 1, cp) - land.at(cq - 1, cp)) / (qa[cq + 1] - qa[cq - 1]);
    let gp = (land.at(cq, cp + 1) - land.at(cq, cp - 1)) / (pa[cp + 1] - pa[cp - 1]);
    let mut curv: f64 = 0.0;
    for dq in -2..=2isize {
        for dp in -2..=2isize {
            let (i, j) = (clampi(cq as isize + dq, nq), clampi(cp as isize + dp, np));
            let hq = qa[i + 1] - qa[i];
            let hp = pa[j + 1] - pa[j];
            let sqq = (land.at(i + 1, j) - 2.0 * land.at(i, j) + land.at(i - 1, j)) / (hq * hq);
            let spp = (land.at(i, j + 1) - 2.0 * land.at(i, j) + land.at(i, j - 1)) / (hp * hp);
            let sqp = (land.at(i + 1, j + 1) - land.at(i + 1, j - 1) - land.at(i - 1, j + 1) + land.at(i - 1, j - 1)) / (4.0 * hq * hp);
            curv = curv.max(sqq.abs() + sqp.abs()).max(spp.abs() + sqp.abs());
        }
    }
    (gq.hypot(gp), curv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_and_shift() {
        let grid = AuditGrid { q_range: (-2.0, 2.0), p_range: (-2.0, 2.0), n_q: 81, n_p: 81 };
        let f = |q: f64, p: f64| -q * p;
        let g = |q: f64, p: f64| -q * p + 0.5;
        let rep = axiom_audit(&f, &g, &grid, 0.5, (1.3, 0.8, 0.2)).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert_eq!(rep.get("additivity").unwrap().measured, 0.0);
    }

    #[test]
    fn perturbed_saddles() {
        let grid = AuditGrid { q_range: (-3.0, 3.0), p_range: (-3.0, 3.0), n_q: 120, n_p: 120 };
        let f = |q: f64, p: f64| -q * p + 0.25 * (1.3 * q - 0.4).sin() + 0.2 * (0.9 * p + 0.3 * q).cos();
        let g = |q: f64, p: f64| f(q, p) + 0.1 + 0.05 * (q * 2.0).sin().abs();
        let rep = axiom_audit(&f, &g, &grid, -0.37, (0.9, 1.1, 0.15)).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }
}
