use serde::{Deserialize, Serialize};

use super::{variational_step, OperatorConfig};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::hamiltonian::HamiltonianModel;

/// Times s = τ₀ < τ₁ < … < τ_n = t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSchedule {
    times: Vec<f64>,
}

impl IterationSchedule {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("schedule needs at least two increasing times".into()));
        }
        Ok(Self { times })
    }

    /// τ_i = s + i·δ, with a final partial step ending at t.
    pub fn uniform(s: f64, t: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !(t > s) {
            return Err(Error::InvalidArgument(format!("uniform schedule needs delta > 0 and t > s (delta={delta})")));
        }
        let n = ((t - s) / delta * (1.0 - 1e-12)).ceil() as usize;
        let mut times: Vec<f64> = (0..n).map(|i| s + delta * i as f64).collect();
        times.push(t);
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn delta(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// R^{τ_n}_{τ_{n−1}} ∘ … ∘ R^{τ_1}_{τ_0} u.
pub fn iterated_operator(h: &HamiltonianModel, u: &GridFunction, schedule: &IterationSchedule, cfg: &OperatorConfig) -> Result<GridFunction> {
    Ok(iterated_snapshots(h, u, schedule, cfg)?.pop().expect("schedule has a step").1)
}

/// Every intermediate result (τ_i, R^{τ_i}_{s,N} u), starting with (s, u).
pub fn iterated_snapshots(
    h: &HamiltonianModel,
    u: &GridFunction,
    schedule: &IterationSchedule,
    cfg: &OperatorConfig,
) -> Result<Vec<(f64, GridFunction)>> {
    let times = schedule.times();
    let mut out = vec![(times[0], u.clone())];
    for w in times.windows(2) {
        let next = variational_step(h, &out.last().unwrap().1, w[0], w[1], cfg)?;
        out.push((w[1], next));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_schedule() {
        let s = IterationSchedule::uniform(0.0, 1.0, 0.25).unwrap();
        assert_eq!(s.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let s = IterationSchedule::uniform(0.0, 1.0, 0.3).unwrap();
        assert_eq!(s.times().len(), 5);
        assert!((s.delta() - 0.3).abs() < 1e-15);
    }
}
