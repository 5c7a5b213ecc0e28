//! Fourier collocation with Strang splitting, used as a reference solution.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Dft;
use crate::grid::{Grid, GridFunction};
use crate::setup::PhysicalSetup;

/// Fewer grid points per carrier wavelength than this trigger a warning.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 4.0;

/// `2 pi eps M / (|kappa| L)`, grid points per wavelength of the carrier.
pub fn points_per_wavelength(setup: &PhysicalSetup, m: usize) -> f64 {
    2.0 * std::f64::consts::PI * setup.epsilon * m as f64 / (setup.kappa.abs() * setup.length())
}

/// Strang splitting `N(tau/2) L(tau) N(tau/2)` with the exact flows
/// `N: u -> u exp(-i lambda |u|^2 t)` and `L: u_hat_k -> exp(-i eps k^2 t / 2) u_hat_k`.
#[derive(Debug, Clone)]
pub struct SplitStep {
    dft: Dft,
    phases: Vec<Complex64>,
    half_nonlinear: f64,
    tau: f64,
}

impl SplitStep {
    pub fn new(setup: &PhysicalSetup, grid: Grid, tau: f64) -> Result<Self> {
        if grid.m == 0 {
            return Err(Error::UnsupportedGridSize(grid.m));
        }
        let ppw = points_per_wavelength(setup, grid.m);
        if ppw < MIN_POINTS_PER_WAVELENGTH {
            log::warn!(
                "reference grid resolves only {ppw:.2} points per carrier wavelength; \
                 the reference is not reliable for this epsilon"
            );
        }
        let phases = (0..grid.m)
            .map(|bin| {
                let k = grid.wavenumber(bin);
                Complex64::from_polar(1.0, -0.5 * setup.epsilon * k * k * tau)
            })
            .collect();
        Ok(Self {
            dft: Dft::new(grid.m),
            phases,
            half_nonlinear: 0.5 * setup.lambda * tau,
            tau,
        })
    }

    fn nonlinear(&self, values: &mut [Complex64]) {
        if self.half_nonlinear != 0.0 {
            for v in values.iter_mut() {
                *v *= Complex64::from_polar(1.0, -self.half_nonlinear * v.norm_sqr());
            }
        }
    }

    pub fn step(&self, u: &mut GridFunction) {
        self.nonlinear(&mut u.values);
        self.dft.forward(&mut u.values);
        for (v, p) in u.values.iter_mut().zip(&self.phases) {
            *v *= p;
        }
        self.dft.inverse(&mut u.values);
        self.nonlinear(&mut u.values);
        u.time += self.tau;
    }
}

pub fn strang_step(u: &GridFunction, setup: &PhysicalSetup, tau_ref: f64) -> Result<GridFunction> {
    let mut out = u.clone();
    SplitStep::new(setup, u.grid, tau_ref)?.step(&mut out);
    Ok(out)
}

/// Integrates to time `final_time` with the largest step not exceeding
/// `tau_ref` that divides `final_time`.
pub fn run_reference(
    u0: &GridFunction,
    setup: &PhysicalSetup,
    tau_ref: f64,
    final_time: f64,
) -> Result<GridFunction> {
    if !(tau_ref > 0.0) || !(final_time >= 0.0) {
        return Err(Error::InvalidInput(
            "tau_ref must be positive and the horizon nonnegative".into(),
        ));
    }
    if final_time == 0.0 {
        return Ok(u0.clone());
    }
    let steps = (final_time / tau_ref - 1e-9).ceil().max(1.0) as usize;
    let solver = SplitStep::new(setup, u0.grid, final_time / steps as f64)?;
    let mut u = u0.clone();
    for _ in 0..steps {
        solver.step(&mut u);
    }
    u.time = u0.time + final_time;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{discrete_mass, max_error};
    use crate::grid::sample_initial_data;
    use crate::setup::EnvelopeProfile;
    use std::f64::consts::PI;

    fn setup(lambda: f64, env: EnvelopeProfile, domain: (f64, f64)) -> PhysicalSetup {
        PhysicalSetup::new(1.0, 1.0, lambda, domain, 1.0, env).unwrap()
    }

    #[test]
    fn single_mode_linear_flow_is_exact() {
        let s = setup(0.0, EnvelopeProfile::constant(1.0), (0.0, 2.0 * PI));
        let g = Grid::for_setup(&s, 32);
        let k = 3.0;
        let u0 = GridFunction::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x));
        let u = run_reference(&u0, &s, 0.01, 0.5).unwrap();
        let phase = Complex64::from_polar(1.0, -0.5 * k * k * 0.5);
        let err = max_error(
            &u,
            &GridFunction::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x) * phase),
        )
        .unwrap();
        assert!(err <= 1e-12, "{err:e}");
    }

    #[test]
    fn constant_state_rotates() {
        let s = setup(2.0, EnvelopeProfile::constant(1.0), (0.0, 1.0));
        let c = Complex64::new(0.3, 0.4);
        let u0 = GridFunction::new(Grid::new(0.0, 1.0, 8), vec![c; 8], 0.0);
        let u = run_reference(&u0, &s, 0.01, 1.0).unwrap();
        let exact = c * Complex64::from_polar(1.0, -2.0 * c.norm_sqr());
        assert!(u.values.iter().all(|v| (v - exact).norm() < 1e-13));
    }

    #[test]
    fn zero_horizon_and_time_reversal() {
        let s = setup(1.0, EnvelopeProfile::gaussian(1.0, 1.0, 0.0), (-4.0, 4.0));
        let g = Grid::for_setup(&s, 64);
        let u0 = sample_initial_data(&s, g);
        assert_eq!(run_reference(&u0, &s, 0.01, 0.0).unwrap(), u0);
        let fwd = SplitStep::new(&s, g, 0.01).unwrap();
        let back = SplitStep::new(&s, g, -0.01).unwrap();
        let mut u = u0.clone();
        for _ in 0..10 {
            fwd.step(&mut u);
        }
        let mass = discrete_mass(&u);
        assert!((mass - discrete_mass(&u0)).abs() <= 1e-12 * mass);
        for _ in 0..10 {
            back.step(&mut u);
        }
        assert!(max_error(&u, &u0).unwrap() <= 1e-11);
    }

    #[test]
    fn second_order_self_convergence() {
        let s = setup(1.0, EnvelopeProfile::gaussian(1.0, 1.0, 0.0), (-4.0, 4.0));
        let g = Grid::for_setup(&s, 128);
        let u0 = sample_initial_data(&s, g);
        let fine = run_reference(&u0, &s, 0.0025, 0.5).unwrap();
        let e1 = max_error(&run_reference(&u0, &s, 0.02, 0.5).unwrap(), &fine).unwrap();
        let e2 = max_error(&run_reference(&u0, &s, 0.01, 0.5).unwrap(), &fine).unwrap();
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() <= 0.2, "{order}");
    }

    #[test]
    fn resolution_doubling() {
        let s = setup(1.0, EnvelopeProfile::gaussian(1.0, 1.0, 0.0), (-4.0, 4.0));
        let a = run_reference(
            &sample_initial_data(&s, Grid::for_setup(&s, 256)),
            &s,
            0.01,
            1.0,
        )
        .unwrap();
        let b = run_reference(
            &sample_initial_data(&s, Grid::for_setup(&s, 512)),
            &s,
            0.01,
            1.0,
        )
        .unwrap();
        assert!(max_error(&a, &b).unwrap() <= 1e-8);
    }
}
