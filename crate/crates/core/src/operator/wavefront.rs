use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{variational_step, OperatorConfig};
use crate::error::{Error, Result};
use crate::grid::{C1Function, GridFunction};
use crate::hamiltonian::{flow_end, HamiltonianModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavefrontRecord {
    pub t: f64,
    pub q: f64,
    pub value: f64,
    pub branch: usize,
    #[serde(rename = "P")]
    pub p: f64,
}

/// Characteristics of u traced to each requested time, split into branches on which
/// q₀ ↦ Q is monotone, together with the variational solution at the same times.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Wavefront {
    pub times: Vec<f64>,
    /// Per time, records ordered by starting point q₀.
    pub records: Vec<Vec<WavefrontRecord>>,
    pub selected: Vec<GridFunction>,
}

impl Wavefront {
    /// Values of all branches above position `q` at time index `k` (linear
    /// interpolation between consecutive characteristics).
    pub fn branch_values_at(&self, k: usize, q: f64) -> Vec<f64> {
        let recs = &self.records[k];
        let mut out = Vec::new();
        for w in recs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (lo, hi) = if a.q <= b.q { (a, b) } else { (b, a) };
            if lo.q <= q && q <= hi.q && (q < hi.q || out.is_empty()) {
                let v = if hi.q > lo.q { lo.value + (hi.value - lo.value) * (q - lo.q) / (hi.q - lo.q) } else { lo.value.min(hi.value) };
                out.push(v);
            }
        }
        out
    }

    /// Number of monotone pieces of the front passing above `q` at time index `k`.
    pub fn branch_count(&self, k: usize, q: f64) -> usize {
        let recs = &self.records[k];
        let mut seen = std::collections::BTreeSet::new();
        for w in recs.windows(2) {
            let (lo, hi) = if w[0].q <= w[1].q { (w[0].q, w[1].q) } else { (w[1].q, w[0].q) };
            if lo <= q && q <= hi {
                seen.insert(w[1].branch);
            }
        }
        seen.len()
    }
}

/// Traces characteristics (q₀, u'(q₀)) of the smooth data `du` from time s for every
/// starting point in `starts`, and computes the variational solution from the grid
/// data `u` at each of `times` (single steps from s).
pub fn wavefront(
    h: &HamiltonianModel,
    u: &GridFunction,
    du: &dyn C1Function,
    s: f64,
    times: &[f64],
    starts: &[f64],
    cfg: &OperatorConfig,
) -> Result<Wavefront> {
    if times.iter().any(|&t| !(t > s)) || starts.len() < 2 {
        return Err(Error::InvalidArgument("wavefront needs times after s and at least two starts".into()));
    }
    let mut records = Vec::with_capacity(times.len());
    let mut selected = Vec::with_capacity(times.len());
    for &t in times {
        let ends: Vec<(f64, f64, f64)> = starts
            .par_iter()
            .map(|&q0| {
                let p0 = du.deriv(q0);
                flow_end(h, q0, p0, s, t, cfg.tol).map(|e| (e.q, du.value(q0) + e.action, e.p))
            })
            .collect::<Result<_>>()?;
        let mut branch = 0;
        let mut dir = 0.0f64;
        let mut row = Vec::with_capacity(ends.len());
        for (i, &(q, value, p)) in ends.iter().enumerate() {
            if i > 0 {
                let d = q - ends[i - 1].0;
                if d != 0.0 {
                    if dir != 0.0 && d.signum() != dir {
                        branch += 1;
                    }
                    dir = d.signum();
                }
            }
            row.push(WavefrontRecord { t, q, value, branch, p });
        }
        records.push(row);
        selected.push(variational_step(h, u, s, t, cfg)?);
    }
    Ok(Wavefront { times: times.to_vec(), records, selected })
}
