//! Filtered finite difference schemes for the semiclassical cubic
//! Schrodinger equation
//!
//! ```text
//! i eps u_t + eps^2/2 u_xx = lambda eps |u|^2 u,   u(0, x) = exp(i kappa x / eps) a0(x)
//! ```
//!
//! on a periodic interval, with filters that keep the schemes accurate for
//! step sizes and mesh widths much larger than `eps`.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod filters;
pub mod fourier;
pub mod grid;
pub mod harness;
pub mod mesh;
pub mod modulation;
pub mod planner;
pub mod schemes;
pub mod setup;
pub mod spectral;

pub use error::{Error, Result};
pub use filters::{BranchAngle, FilterValues};
pub use grid::{sample_initial_data, Grid, GridFunction};
pub use mesh::Discretization;
pub use planner::{plan, PlanRequest, PlanResult, StabilityReport};
pub use schemes::{BootstrapMethod, CnConfig, RunConfig, RunOutcome, SchemeKind, TwoLevelState};
pub use setup::{EnvelopeProfile, PhysicalSetup};
