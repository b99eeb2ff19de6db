//! Operators acting on grid functions.

mod convex;
mod iterate;
mod nonmarkov;
mod variational;
mod wavefront;

use serde::{Deserialize, Serialize};

pub use convex::{hopf_lax, lax_oleinik_step};
pub use iterate::{iterated_operator, iterated_snapshots, IterationSchedule};
pub use nonmarkov::nonmarkov_defect;
pub use variational::{select_at, step_plan, variational_step, PointSelection, StepPlan};
pub use wavefront::{wavefront, Wavefront, WavefrontRecord};

use crate::error::{Error, Result};

/// Numerical knobs for the one-step operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    /// Landscape samples along q and p.
    pub n_q: usize,
    pub n_p: usize,
    /// Landscape half-widths are this multiple of the localization radii (≥ 2).
    pub window_margin: f64,
    /// Gaussian mollification width, in grid steps, for characteristics of kinked data.
    pub mollify_width: f64,
    /// Flow and root-solve tolerance.
    pub tol: f64,
    /// Relative slack ε of the momentum cutoff.
    pub cutoff_eps: f64,
    /// Second selection pass on a locally refined grid around the first pass cell.
    pub refine: bool,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { n_q: 400, n_p: 400, window_margin: 2.0, mollify_width: 2.0, tol: 1e-11, cutoff_eps: 0.1, refine: true }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_q < 8 || self.n_p < 8 {
            return Err(Error::InvalidArgument("landscape needs at least 8 samples per axis".into()));
        }
        if !(self.window_margin >= 2.0) {
            return Err(Error::InvalidArgument(format!("window_margin must be >= 2, got {}", self.window_margin)));
        }
        if !(self.tol > 0.0) || !(self.mollify_width >= 0.0) {
            return Err(Error::InvalidArgument("tol must be positive and mollify_width nonnegative".into()));
        }
        if !(self.cutoff_eps > 0.0 && self.cutoff_eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("cutoff_eps must lie in (0, 1], got {}", self.cutoff_eps)));
        }
        Ok(())
    }
}
