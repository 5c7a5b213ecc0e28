//! Filtered leapfrog and filtered Crank-Nicolson time stepping.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fourier::Dft;
use crate::grid::GridFunction;
use crate::mesh::Discretization;
use crate::modulation::{sample_dominant_term, Envelope};
use crate::setup::PhysicalSetup;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Leapfrog,
    CrankNicolson,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Leapfrog => "leapfrog",
            SchemeKind::CrankNicolson => "crank_nicolson",
        }
    }
}

/// Initial guess of the Crank-Nicolson fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    /// `u^{n+1} = u^{n-1}`
    CopyPrev,
    /// one explicit leapfrog step
    LeapfrogPredictor,
}

/// How the second starting level `u^1` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMethod {
    /// Exact dominant term `v(tau, x_j)`.
    DominantTerm,
    /// One Crank-Nicolson step of the half-step one-step form.
    CnHalf,
}

/// Two-step map `u^{n-1} -> u^{n+1}` over `2 tau`, or the one-step map
/// obtained with the halved step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnForm {
    TwoStep,
    OneStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnConfig {
    /// Max-norm tolerance on successive iterates, scaled by `max(1, |u^{n-1}|_max)`.
    pub fixed_point_tol: f64,
    pub max_iterations: usize,
    pub predictor: Predictor,
}

impl Default for CnConfig {
    fn default() -> Self {
        Self {
            fixed_point_tol: 1e-14,
            max_iterations: 100,
            predictor: Predictor::CopyPrev,
        }
    }
}

impl CnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fixed_point_tol > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "fixed_point_tol and max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Levels `n - 1` and `n` of a two-step scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelState {
    pub u_prev: GridFunction,
    pub u_curr: GridFunction,
    pub step_index: usize,
}

/// Coefficients of the explicit update
/// `u^{n+1} = u^{n-1} + i c_t (c_d (u_{j+1} - 2 phi u_j + u_{j-1}) - c_n |u_j|^2 u_j)`.
#[derive(Debug, Clone, Copy)]
struct LeapfrogCoefficients {
    time: f64,
    diffusion: f64,
    two_phi: f64,
    nonlinear: f64,
}

impl LeapfrogCoefficients {
    fn new(setup: &PhysicalSetup, disc: &Discretization) -> Self {
        let f = &disc.filters;
        let eps = setup.epsilon;
        let h = disc.h();
        Self {
            time: 2.0 * disc.tau * f.sinc_alpha / eps,
            diffusion: eps * eps / (2.0 * h * h * f.psi_beta),
            two_phi: 2.0 * f.phi_beta,
            nonlinear: setup.lambda * eps / f.tanc_alpha,
        }
    }

    fn advance(&self, prev: &[Complex64], curr: &[Complex64], out: &mut [Complex64]) {
        let m = curr.len();
        for j in 0..m {
            let left = curr[(j + m - 1) % m];
            let right = curr[(j + 1) % m];
            let u = curr[j];
            let rhs = (right - self.two_phi * u + left) * self.diffusion
                - u * (self.nonlinear * u.norm_sqr());
            out[j] = prev[j] + I * (self.time * rhs);
        }
    }
}

fn check_finite(values: &[Complex64], step: usize) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { step })
    }
}

/// One step of the filtered leapfrog scheme, returning levels `(n, n+1)`.
pub fn leapfrog_step(
    state: TwoLevelState,
    setup: &PhysicalSetup,
    disc: &Discretization,
) -> Result<TwoLevelState> {
    let coeffs = LeapfrogCoefficients::new(setup, disc);
    let mut next = GridFunction::zeros(disc.grid, state.u_curr.time + disc.tau);
    coeffs.advance(&state.u_prev.values, &state.u_curr.values, &mut next.values);
    check_finite(&next.values, state.step_index + 1)?;
    Ok(TwoLevelState {
        u_prev: state.u_curr,
        u_curr: next,
        step_index: state.step_index + 1,
    })
}

/// Solver for the implicit two-step map of the filtered Crank-Nicolson scheme.
///
/// In Fourier space the scheme reads
/// `(1 - i mu_k / cos a) w_k = (1 + i mu_k / cos a) v_k - i (lambda tau / 2) F[(|v|^2 + |w|^2)(w + v)]_k`
/// for `v = u^{n-1}`, `w = u^{n+1}`. Each Picard iteration evaluates the
/// nonlinear term at the previous iterate and inverts the diagonal.
#[derive(Debug, Clone)]
pub struct CnSolver {
    dft: Dft,
    explicit: Vec<Complex64>,
    implicit_inv: Vec<Complex64>,
    half_lambda_tau: f64,
    predictor: LeapfrogCoefficients,
    cfg: CnConfig,
    buf: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl CnSolver {
    pub fn new(setup: &PhysicalSetup, disc: &Discretization, cfg: CnConfig) -> Result<Self> {
        cfg.validate()?;
        let cos_abs = disc.filters.cos_alpha.abs();
        if cos_abs < crate::planner::MIN_COS_ALPHA {
            return Err(Error::CosineTooSmall {
                alpha: disc.alpha.value(),
                cos_abs,
            });
        }
        let m = disc.m();
        let c = disc.filters.cos_alpha;
        let mut explicit = Vec::with_capacity(m);
        let mut implicit_inv = Vec::with_capacity(m);
        for bin in 0..m {
            let k = disc.grid.wavenumber(bin);
            let mu = crate::planner::amplification_factor(setup, disc, k) / c;
            explicit.push(Complex64::new(1.0, mu));
            implicit_inv.push(Complex64::new(1.0, -mu).inv());
        }
        Ok(Self {
            dft: Dft::new(m),
            explicit,
            implicit_inv,
            half_lambda_tau: 0.5 * setup.lambda * disc.tau,
            predictor: LeapfrogCoefficients::new(setup, disc),
            cfg,
            buf: vec![Complex64::new(0.0, 0.0); m],
            rhs: vec![Complex64::new(0.0, 0.0); m],
        })
    }

    /// Solves for `u^{n+1}` given `u^{n-1}` and, for the leapfrog predictor, `u^n`.
    /// Returns the new level and the number of iterations used.
    pub fn solve(
        &mut self,
        prev: &[Complex64],
        curr: Option<&[Complex64]>,
    ) -> Result<(Vec<Complex64>, usize)> {
        let m = prev.len();
        self.rhs.copy_from_slice(prev);
        self.dft.forward(&mut self.rhs);
        for (r, e) in self.rhs.iter_mut().zip(&self.explicit) {
            *r *= e;
        }
        let mut w = match (self.cfg.predictor, curr) {
            (Predictor::LeapfrogPredictor, Some(c)) => {
                let mut out = vec![Complex64::new(0.0, 0.0); m];
                self.predictor.advance(prev, c, &mut out);
                out
            }
            _ => prev.to_vec(),
        };
        let scale = prev.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let tol = self.cfg.fixed_point_tol * scale;
        let mut residual = f64::INFINITY;
        for it in 1..=self.cfg.max_iterations {
            if self.half_lambda_tau == 0.0 {
                self.buf.copy_from_slice(&self.rhs);
            } else {
                for j in 0..m {
                    self.buf[j] = (prev[j].norm_sqr() + w[j].norm_sqr()) * (w[j] + prev[j]);
                }
                self.dft.forward(&mut self.buf);
                for (b, r) in self.buf.iter_mut().zip(&self.rhs) {
                    *b = r - I * (self.half_lambda_tau * *b);
                }
            }
            for (b, d) in self.buf.iter_mut().zip(&self.implicit_inv) {
                *b *= d;
            }
            self.dft.inverse(&mut self.buf);
            residual = self
                .buf
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            w.copy_from_slice(&self.buf);
            if !residual.is_finite() {
                break;
            }
            if residual <= tol || self.half_lambda_tau == 0.0 {
                return Ok((w, it));
            }
        }
        Err(Error::FixedPointDivergence {
            iterations: self.cfg.max_iterations,
            residual,
        })
    }

    pub fn step(&mut self, state: TwoLevelState, tau: f64) -> Result<TwoLevelState> {
        let (w, _) = self.solve(&state.u_prev.values, Some(&state.u_curr.values))?;
        check_finite(&w, state.step_index + 1)?;
        let next = GridFunction::new(state.u_curr.grid, w, state.u_curr.time + tau);
        Ok(TwoLevelState {
            u_prev: state.u_curr,
            u_curr: next,
            step_index: state.step_index + 1,
        })
    }
}

/// One step of the filtered Crank-Nicolson scheme: solves for `u^{n+1}` from
/// `u^{n-1}` over the span `2 tau`, returning levels `(n, n+1)`.
pub fn cn_step(
    state: TwoLevelState,
    setup: &PhysicalSetup,
    disc: &Discretization,
    cfg: CnConfig,
) -> Result<TwoLevelState> {
    CnSolver::new(setup, disc, cfg)?.step(state, disc.tau)
}

/// One step `u^n -> u^{n+1}` of size `tau`: the two-step map with the halved
/// step `tau / 2`.
pub fn cn_one_step(
    u: &GridFunction,
    setup: &PhysicalSetup,
    disc: &Discretization,
    cfg: CnConfig,
) -> Result<GridFunction> {
    let half = disc.halved_step(setup)?;
    let mut solver = CnSolver::new(setup, &half, cfg)?;
    let (w, _) = solver.solve(&u.values, None)?;
    check_finite(&w, 1)?;
    Ok(GridFunction::new(u.grid, w, u.time + disc.tau))
}

/// Produces the starting levels `(u^0, u^1)`.
pub fn bootstrap(
    u0: GridFunction,
    setup: &PhysicalSetup,
    disc: &Discretization,
    method: BootstrapMethod,
    cfg: CnConfig,
) -> Result<TwoLevelState> {
    let u1 = match method {
        BootstrapMethod::DominantTerm => {
            let env = Envelope::new(setup);
            let mut v = sample_dominant_term(&env, setup.epsilon, u0.time + disc.tau, disc.grid);
            v.time = u0.time + disc.tau;
            v
        }
        BootstrapMethod::CnHalf => cn_one_step(&u0, setup, disc, cfg)?,
    };
    Ok(TwoLevelState {
        u_prev: u0,
        u_curr: u1,
        step_index: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub cn: CnConfig,
    pub bootstrap: BootstrapMethod,
    pub cn_form: CnForm,
    /// A run is stopped when the max norm exceeds this multiple of the initial one.
    pub blowup_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cn: CnConfig::default(),
            bootstrap: BootstrapMethod::CnHalf,
            cn_form: CnForm::TwoStep,
            blowup_factor: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed(GridFunction),
    /// The state became non-finite or exceeded the blow-up ceiling at `step`;
    /// `last` is the last finite level.
    BlowUp {
        step: usize,
        last: GridFunction,
    },
}

impl RunOutcome {
    pub fn completed(self) -> Option<GridFunction> {
        match self {
            RunOutcome::Completed(u) => Some(u),
            RunOutcome::BlowUp { .. } => None,
        }
    }
}

enum Stepper {
    Leapfrog(LeapfrogCoefficients),
    Cn(Box<CnSolver>),
}

/// Advances `u0` over `disc.n` steps. `observer` sees every level `(n, u^n)`,
/// starting with `(0, u0)`.
pub fn run(
    scheme: SchemeKind,
    u0: GridFunction,
    setup: &PhysicalSetup,
    disc: &Discretization,
    cfg: &RunConfig,
    mut observer: impl FnMut(usize, &GridFunction),
) -> Result<RunOutcome> {
    observer(0, &u0);
    if disc.n == 0 {
        return Ok(RunOutcome::Completed(u0));
    }
    let ceiling = cfg.blowup_factor * u0.max_norm();
    let blown = |u: &GridFunction| !u.is_finite() || (ceiling > 0.0 && u.max_norm() > ceiling);

    if scheme == SchemeKind::CrankNicolson && cfg.cn_form == CnForm::OneStep {
        let half = disc.halved_step(setup)?;
        let mut solver = CnSolver::new(setup, &half, cfg.cn)?;
        let mut u = u0;
        for step in 1..=disc.n {
            let (w, _) = solver.solve(&u.values, None)?;
            let next = GridFunction::new(u.grid, w, step as f64 * disc.tau);
            if blown(&next) {
                return Ok(RunOutcome::BlowUp { step, last: u });
            }
            observer(step, &next);
            u = next;
        }
        return Ok(RunOutcome::Completed(u));
    }

    let mut state = bootstrap(u0, setup, disc, cfg.bootstrap, cfg.cn)?;
    if blown(&state.u_curr) {
        return Ok(RunOutcome::BlowUp {
            step: 1,
            last: state.u_prev,
        });
    }
    observer(1, &state.u_curr);
    let mut stepper = match scheme {
        SchemeKind::Leapfrog => Stepper::Leapfrog(LeapfrogCoefficients::new(setup, disc)),
        SchemeKind::CrankNicolson => Stepper::Cn(Box::new(CnSolver::new(setup, disc, cfg.cn)?)),
    };
    let mut scratch = GridFunction::zeros(disc.grid, 0.0);
    while state.step_index < disc.n {
        let step = state.step_index + 1;
        let next = match &mut stepper {
            Stepper::Leapfrog(c) => {
                c.advance(
                    &state.u_prev.values,
                    &state.u_curr.values,
                    &mut scratch.values,
                );
                scratch.time = step as f64 * disc.tau;
                scratch.clone()
            }
            Stepper::Cn(solver) => {
                let (w, _) = solver.solve(&state.u_prev.values, Some(&state.u_curr.values))?;
                GridFunction::new(disc.grid, w, step as f64 * disc.tau)
            }
        };
        if blown(&next) {
            return Ok(RunOutcome::BlowUp {
                step,
                last: state.u_curr,
            });
        }
        observer(step, &next);
        let prev = std::mem::replace(&mut state.u_curr, next);
        scratch = std::mem::replace(&mut state.u_prev, prev);
        state.step_index = step;
    }
    Ok(RunOutcome::Completed(state.u_curr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_initial_data, Grid};
    use crate::planner::{plan, PlanRequest};
    use crate::setup::EnvelopeProfile;
    use std::f64::consts::PI;

    fn plane_wave(setup: &PhysicalSetup, grid: Grid, t: f64) -> GridFunction {
        let (k, e) = (setup.kappa, setup.epsilon);
        let mut u = GridFunction::from_fn(grid, t, |x| {
            Complex64::from_polar(1.0, (k * x - 0.5 * k * k * t) / e)
        });
        u.time = t;
        u
    }

    fn linear_setup(eps: f64) -> PhysicalSetup {
        PhysicalSetup::new(
            eps,
            1.0,
            0.0,
            (0.0, 2.0 * PI),
            1.0,
            EnvelopeProfile::constant(1.0),
        )
        .unwrap()
    }

    fn gaussian_setup(eps: f64, lambda: f64) -> PhysicalSetup {
        PhysicalSetup::new(
            eps,
            1.0,
            lambda,
            (-4.0, 4.0),
            1.0,
            EnvelopeProfile::gaussian(1.0, 1.0, 0.0),
        )
        .unwrap()
    }

    fn two_level(setup: &PhysicalSetup, disc: &Discretization) -> TwoLevelState {
        TwoLevelState {
            u_prev: plane_wave(setup, disc.grid, 0.0),
            u_curr: plane_wave(setup, disc.grid, disc.tau),
            step_index: 1,
        }
    }

    fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_state_stays_zero() {
        let s = gaussian_setup(1.0, 1.0);
        let d = Discretization::direct(&s, 0.01, 0.1).unwrap();
        let z = GridFunction::zeros(d.grid, 0.0);
        let st = TwoLevelState {
            u_prev: z.clone(),
            u_curr: z.clone(),
            step_index: 1,
        };
        let lf = leapfrog_step(st.clone(), &s, &d).unwrap();
        assert!(lf.u_curr.max_norm() == 0.0);
        let mut solver = CnSolver::new(&s, &d, CnConfig::default()).unwrap();
        let (w, its) = solver.solve(&z.values, Some(&z.values)).unwrap();
        assert_eq!(its, 1);
        assert!(w.iter().all(|v| v.norm() == 0.0));
        assert!(
            cn_one_step(&z, &s, &d, CnConfig::default())
                .unwrap()
                .max_norm()
                == 0.0
        );
    }

    #[test]
    fn plane_wave_one_step_both_schemes() {
        let s = linear_setup(0.05);
        let d = Discretization::direct(&s, 0.013, 0.07).unwrap();
        let st = two_level(&s, &d);
        let exact = plane_wave(&s, d.grid, 2.0 * d.tau);
        let lf = leapfrog_step(st.clone(), &s, &d).unwrap();
        assert!(max_diff(&lf.u_curr, &exact) <= 1e-12);
        let cn = cn_step(st, &s, &d, CnConfig::default()).unwrap();
        assert!(max_diff(&cn.u_curr, &exact) <= 1e-12);
    }

    #[test]
    fn plane_wave_one_step_form() {
        let s = linear_setup(0.05);
        let d = Discretization::direct(&s, 0.013, 0.07).unwrap();
        let u0 = plane_wave(&s, d.grid, 0.0);
        let u1 = cn_one_step(&u0, &s, &d, CnConfig::default()).unwrap();
        assert!(max_diff(&u1, &plane_wave(&s, d.grid, d.tau)) <= 1e-12);
        for method in [BootstrapMethod::DominantTerm, BootstrapMethod::CnHalf] {
            let st = bootstrap(u0.clone(), &s, &d, method, CnConfig::default()).unwrap();
            assert!(max_diff(&st.u_curr, &plane_wave(&s, d.grid, d.tau)) <= 1e-12);
        }
    }

    /// Classical leapfrog for `i u_t + u_xx / 2 = lambda |u|^2 u`.
    fn classical_leapfrog(
        prev: &[Complex64],
        curr: &[Complex64],
        tau: f64,
        h: f64,
        lambda: f64,
    ) -> Vec<Complex64> {
        let m = curr.len();
        (0..m)
            .map(|j| {
                let lap = (curr[(j + 1) % m] - 2.0 * curr[j] + curr[(j + m - 1) % m]) / (h * h);
                let rhs = 0.5 * lap - lambda * curr[j].norm_sqr() * curr[j];
                prev[j] + 2.0 * tau * I * rhs
            })
            .collect()
    }

    #[test]
    fn filtered_leapfrog_tends_to_classical() {
        let s = gaussian_setup(1.0, 1.0);
        for &(tau, h) in &[(1e-3, 0.05), (5e-4, 0.025)] {
            let d = Discretization::direct(&s, tau, h).unwrap();
            let u0 = sample_initial_data(&s, d.grid);
            let u1 = cn_one_step(&u0, &s, &d, CnConfig::default()).unwrap();
            let st = TwoLevelState {
                u_prev: u0.clone(),
                u_curr: u1.clone(),
                step_index: 1,
            };
            let filtered = leapfrog_step(st, &s, &d).unwrap().u_curr;
            let classic = classical_leapfrog(&u0.values, &u1.values, d.tau, d.h(), 1.0);
            let rel = filtered
                .values
                .iter()
                .zip(&classic)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / u1.max_norm();
            let a = d.alpha.value();
            // one step differs by O(tau (alpha^2 + beta^2) / h^2 ...) of the increment
            assert!(rel <= 2.0 * (a * a + d.beta * d.beta), "{rel:e}");
        }
    }

    #[test]
    fn cn_conserves_mass_per_step() {
        let s = gaussian_setup(0.1, 1.0);
        let d = Discretization::direct(&s, 0.01, 0.02).unwrap();
        let u0 = sample_initial_data(&s, d.grid);
        let st = bootstrap(
            u0.clone(),
            &s,
            &d,
            BootstrapMethod::CnHalf,
            CnConfig::default(),
        )
        .unwrap();
        let m0: f64 = u0.values.iter().map(|v| v.norm_sqr()).sum();
        let next = cn_step(st, &s, &d, CnConfig::default()).unwrap();
        let m2: f64 = next.u_curr.values.iter().map(|v| v.norm_sqr()).sum();
        assert!(
            (m2 - m0).abs() <= 10.0 * 1e-14 * m0 * 10.0,
            "{:e}",
            (m2 - m0).abs() / m0
        );
    }

    #[test]
    fn leapfrog_predictor_converges_to_same_solution() {
        let s = gaussian_setup(0.1, 1.0);
        let d = Discretization::direct(&s, 0.01, 0.02).unwrap();
        let u0 = sample_initial_data(&s, d.grid);
        let st = bootstrap(u0, &s, &d, BootstrapMethod::CnHalf, CnConfig::default()).unwrap();
        let a = cn_step(st.clone(), &s, &d, CnConfig::default()).unwrap();
        let cfg = CnConfig {
            predictor: Predictor::LeapfrogPredictor,
            ..CnConfig::default()
        };
        let mut solver = CnSolver::new(&s, &d, cfg).unwrap();
        let (w, its_lf) = solver
            .solve(&st.u_prev.values, Some(&st.u_curr.values))
            .unwrap();
        let mut plain = CnSolver::new(&s, &d, CnConfig::default()).unwrap();
        let (_, its_copy) = plain
            .solve(&st.u_prev.values, Some(&st.u_curr.values))
            .unwrap();
        assert!(its_lf <= its_copy);
        let diff = w
            .iter()
            .zip(&a.u_curr.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13);
    }

    #[test]
    fn fixed_point_failure_is_reported() {
        let s = gaussian_setup(1.0, 50.0);
        let d = Discretization::direct(&s, 0.5, 0.1).unwrap();
        let u0 = sample_initial_data(&s, d.grid);
        let cfg = CnConfig {
            max_iterations: 3,
            ..CnConfig::default()
        };
        assert!(matches!(
            cn_one_step(&u0, &s, &d, cfg),
            Err(Error::FixedPointDivergence { .. })
        ));
    }

    #[test]
    fn one_step_composition_matches_two_step() {
        // two one-step applications of size tau vs the two-step map over 2 tau
        // started from the same exact levels: both are second-order
        let s = gaussian_setup(1.0, 1.0);
        let mut diffs = Vec::new();
        for &tau in &[0.02, 0.01] {
            let d = Discretization::direct(&s, tau, 0.02).unwrap();
            let u0 = sample_initial_data(&s, d.grid);
            let a = cn_one_step(&u0, &s, &d, CnConfig::default()).unwrap();
            let a = cn_one_step(&a, &s, &d, CnConfig::default()).unwrap();
            let full = Discretization::from_alpha(&s, d.grid, d.n, d.alpha).unwrap();
            let st = TwoLevelState {
                u_prev: u0.clone(),
                u_curr: a.clone(),
                step_index: 1,
            };
            let b = cn_step(st, &s, &full, CnConfig::default()).unwrap().u_curr;
            diffs.push(max_diff(&a, &b));
        }
        // per-step local difference shrinks at least like tau^2
        assert!(diffs[1] < diffs[0] / 3.5, "{diffs:?}");
    }

    #[test]
    fn run_zero_steps_returns_input() {
        let s = gaussian_setup(1.0, 1.0);
        let mut d = Discretization::direct(&s, 0.01, 0.1).unwrap();
        d.n = 0;
        let u0 = sample_initial_data(&s, d.grid);
        let out = run(
            SchemeKind::Leapfrog,
            u0.clone(),
            &s,
            &d,
            &RunConfig::default(),
            |_, _| {},
        )
        .unwrap();
        assert_eq!(out, RunOutcome::Completed(u0));
    }

    #[test]
    fn run_plane_wave_many_steps() {
        let s = linear_setup(1e-3);
        let mut req = PlanRequest::new(s.clone(), 4.0, 1, SchemeKind::Leapfrog);
        req.theta_max = 0.95;
        let p = plan(&req).unwrap();
        let mut d = p.disc.clone();
        d.n = 200;
        let u0 = sample_initial_data(&s, d.grid);
        for scheme in [SchemeKind::Leapfrog, SchemeKind::CrankNicolson] {
            let cfg = RunConfig {
                bootstrap: BootstrapMethod::DominantTerm,
                ..RunConfig::default()
            };
            let mut seen = 0;
            let out = run(scheme, u0.clone(), &s, &d, &cfg, |_, _| seen += 1).unwrap();
            assert_eq!(seen, d.n + 1);
            let u = out.completed().unwrap();
            let exact = plane_wave(&s, d.grid, d.n as f64 * d.tau);
            assert!(max_diff(&u, &exact) <= 1e-10, "{scheme:?}");
        }
    }

    #[test]
    fn unstable_leapfrog_blows_up() {
        let s = PhysicalSetup::new(
            1.0,
            1.0,
            0.0,
            (0.0, 2.0 * PI),
            100.0,
            EnvelopeProfile::gaussian(1.0, 1.0, PI),
        )
        .unwrap();
        let d = Discretization::direct(&s, 0.0075, 0.1).unwrap();
        let u0 = sample_initial_data(&s, d.grid);
        let out = run(
            SchemeKind::Leapfrog,
            u0,
            &s,
            &d,
            &RunConfig::default(),
            |_, _| {},
        )
        .unwrap();
        assert!(matches!(out, RunOutcome::BlowUp { step, .. } if step < 2000));
    }
}
