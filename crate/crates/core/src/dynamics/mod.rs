//! Time integration on the strip `D x R` (truncated in `y`).
//!
//! Two equations share one explicit monotone scheme: the porous medium
//! equation `u_t = Delta u^m` in physical variables, and the rescaled
//! reaction-diffusion equation `v_tau = Delta v^m + v / (m - 1)` obtained from
//! `v = (t + t0)^{1/(m-1)} u`, `tau = ln(t + t0)`, optionally in a frame moving
//! with speed `c` along the tube.

mod field;
mod rescale;
mod run;
mod step;

pub use field::{Boundary, Frame, TubeField, TubeGrid, Variable, YBoundary, ZBoundary};
pub use rescale::{admissible_t0, from_rescaled, to_rescaled};
pub use run::{run_evolution, Observer, RunConfig, RunRecord};
pub use step::{cfl_dt, step_pme, step_rescaled, Stepper};
