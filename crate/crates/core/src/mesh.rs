//! Space-time mesh together with the filter arguments and filter values.

use crate::error::{Error, Result};
use crate::filters::{BranchAngle, FilterValues};
use crate::grid::Grid;
use crate::setup::PhysicalSetup;

/// Mesh data of one run.
///
/// `alpha = kappa^2 tau / (2 eps)` and `beta = kappa h / eps` are the filter
/// arguments. `final_time()` is the realized end time `n * tau`, which can
/// differ from the requested one when the planner keeps the consistency
/// condition exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub grid: Grid,
    pub n: usize,
    pub tau: f64,
    pub alpha: BranchAngle,
    pub beta: f64,
    pub filters: FilterValues,
    /// `eps sinc(beta) / psi(beta)` of the realized mesh.
    pub rho_eff: f64,
    /// Stability bound of the leapfrog scheme, filled in by the planner.
    pub theta_bound: Option<f64>,
}

impl Discretization {
    /// Builds the mesh from an already chosen time-filter angle.
    pub fn from_alpha(
        setup: &PhysicalSetup,
        grid: Grid,
        n: usize,
        alpha: BranchAngle,
    ) -> Result<Self> {
        if grid.m < 2 {
            return Err(Error::InvalidInput(
                "at least two grid points required".into(),
            ));
        }
        let tau = 2.0 * alpha.value() * setup.epsilon / (setup.kappa * setup.kappa);
        if !(tau > 0.0) {
            return Err(Error::InvalidInput(format!(
                "time step {tau} is not positive"
            )));
        }
        let beta = setup.kappa * grid.h() / setup.epsilon;
        let filters = FilterValues::new(alpha, beta)?;
        let rho_eff = setup.epsilon * filters.sinc_beta / filters.psi_beta;
        Ok(Self {
            grid,
            n,
            tau,
            alpha,
            beta,
            filters,
            rho_eff,
            theta_bound: None,
        })
    }

    /// Uses the given step size and mesh width without enforcing the
    /// consistency condition. `h` is snapped to `L/M` and `tau` to `T/N`.
    pub fn direct(setup: &PhysicalSetup, tau: f64, h: f64) -> Result<Self> {
        if !(tau > 0.0 && h > 0.0) {
            return Err(Error::InvalidInput("tau and h must be positive".into()));
        }
        let m = (setup.length() / h).round().max(2.0) as usize;
        let n = (setup.final_time / tau).round().max(1.0) as usize;
        let tau = setup.final_time / n as f64;
        let alpha = 0.5 * setup.kappa * setup.kappa * tau / setup.epsilon;
        Self::from_alpha(
            setup,
            Grid::for_setup(setup, m),
            n,
            BranchAngle::from_value(alpha),
        )
    }

    pub fn m(&self) -> usize {
        self.grid.m
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn final_time(&self) -> f64 {
        self.n as f64 * self.tau
    }

    /// `eps / tanc(alpha)`, the time side of the consistency condition.
    pub fn rho_alpha(&self, setup: &PhysicalSetup) -> f64 {
        setup.epsilon / self.filters.tanc_alpha
    }

    /// `eps sinc(beta) / psi(beta)`, the space side of the consistency condition.
    pub fn rho_beta(&self, setup: &PhysicalSetup) -> f64 {
        setup.epsilon * self.filters.sinc_beta / self.filters.psi_beta
    }

    pub fn consistency_residuals(&self, setup: &PhysicalSetup) -> (f64, f64) {
        (
            (self.rho_alpha(setup) - self.rho_eff).abs(),
            (self.rho_beta(setup) - self.rho_eff).abs(),
        )
    }

    /// True when both sides of the consistency condition agree with
    /// `rho_eff` to `rel_tol`.
    pub fn is_consistent(&self, setup: &PhysicalSetup, rel_tol: f64) -> bool {
        let (ra, rb) = self.consistency_residuals(setup);
        let scale = rel_tol * self.rho_eff.abs();
        ra <= scale && rb <= scale
    }

    /// The same mesh with half the time step and twice the number of steps,
    /// used by the one-step form of the Crank-Nicolson scheme.
    pub fn halved_step(&self, setup: &PhysicalSetup) -> Result<Self> {
        let mut d = Self::from_alpha(setup, self.grid, 2 * self.n, self.alpha.halved())?;
        d.rho_eff = self.rho_eff;
        d.theta_bound = None;
        Ok(d)
    }
}
