//! Hamiltonian models, flows, and the constants that control them.

mod bounds;
mod cutoff;
mod flow;
mod legendre;
mod model;
pub mod registry;

pub use bounds::{integrable_reach, localization_radii, max_step_delta1, twist_delta2, Radii};
pub use cutoff::{cutoff_compact_support, CutoffProfile};
pub use flow::{flow_end, integrate_flow, FlowEnd, IntegratorMeta, PhasePoint, Trajectory};
pub use legendre::legendre_transform;
pub use model::{Convexity, HamEval, Hamiltonian, HamiltonianModel};
