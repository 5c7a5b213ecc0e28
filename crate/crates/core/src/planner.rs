//! Choice of step size and mesh width.
//!
//! Solves `eps / tanc(alpha) = eps sinc(beta) / psi(beta) = rho` for the
//! filter arguments, snaps the mesh to an integer number of grid points and
//! time steps, and evaluates the leapfrog stability bound
//! `(eps tau / h^2) |sinc alpha| (1 + |phi beta|) / |psi beta| <= theta < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::{eval_psi, eval_sinc, BranchAngle, PSI_SERIES_THRESHOLD};
use crate::grid::Grid;
use crate::mesh::Discretization;
use crate::schemes::SchemeKind;
use crate::setup::PhysicalSetup;

/// Relative tolerance on both consistency residuals.
pub const CONSISTENCY_TOL: f64 = 1e-12;
pub const MAX_ROOT_ITERATIONS: usize = 200;
/// `|cos alpha|` below this is rejected; the Crank-Nicolson scheme divides by it.
pub const MIN_COS_ALPHA: f64 = 0.5;
pub const MIN_PSI: f64 = 1e-8;
/// Candidate grids `M` within this relative distance of the solved mesh are
/// compared when snapping.
pub const DEFAULT_M_WINDOW: f64 = 0.1;
/// Moduli `|mu_k|` within this of one are reported as marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRequest {
    pub setup: PhysicalSetup,
    pub rho_target: f64,
    /// `n` in the start value `alpha = n pi`.
    pub alpha_branch: i64,
    /// `m` in the start value `beta = kappa tau / (m eps)`.
    pub beta_branch: i64,
    pub theta_max: f64,
    /// Desired number of grid points; overrides the `beta_branch` start value.
    pub target_m: Option<usize>,
    /// Relative half-width of the window of grid sizes scanned when snapping.
    pub m_window: f64,
    pub scheme: SchemeKind,
}

impl PlanRequest {
    pub fn new(
        setup: PhysicalSetup,
        rho_target: f64,
        alpha_branch: i64,
        scheme: SchemeKind,
    ) -> Self {
        Self {
            setup,
            rho_target,
            alpha_branch,
            beta_branch: 1,
            theta_max: 0.9,
            target_m: None,
            m_window: DEFAULT_M_WINDOW,
            scheme,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.rho_target == 0.0 || !self.rho_target.is_finite() {
            return bad("rho must be nonzero");
        }
        if !(0.0..1.0).contains(&self.theta_max) {
            return bad("theta_max must lie in [0, 1)");
        }
        if self.alpha_branch == 0 || self.beta_branch == 0 {
            return bad("branch indices must be nonzero");
        }
        if self.target_m == Some(0) || self.target_m == Some(1) {
            return bad("target_m must be at least 2");
        }
        if !(self.m_window >= 0.0) {
            return bad("m_window must be nonnegative");
        }
        Ok(())
    }
}

/// Per-mode linear amplification data of the leapfrog scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `mu_k` for wavenumbers `2 pi j / L`, `j = -floor(M/2) .. ceil(M/2) - 1`.
    pub mu: Vec<f64>,
    pub mu_max: f64,
    pub bound_value: f64,
    /// `max_k | |lambda_k^+-| - 1 |`.
    pub eigen_moduli_max_deviation: f64,
    /// `max_k max(|lambda_k^+|, |lambda_k^-|)`, the per-step growth factor.
    pub max_growth: f64,
    /// Modes with `|mu_k| = 1` up to [`MARGINAL_TOL`] (double root on the unit circle).
    pub marginal_modes: usize,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.mu_max < 1.0
    }
}

/// Roots `i mu +- sqrt(1 - mu^2)` of `z^2 - 2 i mu z - 1`.
pub fn leapfrog_eigenvalues(mu: f64) -> (Complex64, Complex64) {
    let root = Complex64::new(1.0 - mu * mu, 0.0).sqrt();
    let imu = Complex64::new(0.0, mu);
    (imu + root, imu - root)
}

/// Amplification factor `mu_k = (eps tau / h^2) sinc(alpha) (cos(k h) - phi(beta)) / psi(beta)`.
pub fn amplification_factor(setup: &PhysicalSetup, disc: &Discretization, k: f64) -> f64 {
    let f = &disc.filters;
    let h = disc.h();
    setup.epsilon * disc.tau / (h * h) * f.sinc_alpha * ((k * h).cos() - f.phi_beta) / f.psi_beta
}

pub fn stability_report(setup: &PhysicalSetup, disc: &Discretization) -> StabilityReport {
    let m = disc.m() as i64;
    let grid = disc.grid;
    let f = &disc.filters;
    let h = disc.h();
    let mu: Vec<f64> = (-(m / 2)..(m + 1) / 2)
        .map(|j| {
            let k = 2.0 * PI * j as f64 / grid.length;
            amplification_factor(setup, disc, k)
        })
        .collect();
    let mu_max = mu.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let bound_value =
        setup.epsilon * disc.tau / (h * h) * f.sinc_alpha.abs() * (1.0 + f.phi_beta.abs())
            / f.psi_beta.abs();
    let mut deviation = 0.0_f64;
    let mut growth = 0.0_f64;
    let mut marginal = 0;
    for &mu_k in &mu {
        let (lp, lm) = leapfrog_eigenvalues(mu_k);
        for l in [lp, lm] {
            deviation = deviation.max((l.norm() - 1.0).abs());
            growth = growth.max(l.norm());
        }
        if (mu_k.abs() - 1.0).abs() <= MARGINAL_TOL {
            marginal += 1;
        }
    }
    StabilityReport {
        mu,
        mu_max,
        bound_value,
        eigen_moduli_max_deviation: deviation,
        max_growth: growth,
        marginal_modes: marginal,
    }
}

/// Bisection-safeguarded Newton iteration on a bracket with a sign change.
fn safeguarded_newton(
    f: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    let lo_sign = flo.signum();
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..MAX_ROOT_ITERATIONS {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / dfx;
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let tiny = 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
        if (next - x).abs() <= tiny || hi - lo <= tiny {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ROOT_ITERATIONS,
        last: x,
    })
}

/// Picks the candidate among `x` and its nearest floating point neighbours
/// with the smallest residual.
fn polish(x: f64, residual: impl Fn(f64) -> f64) -> f64 {
    let mut best = x;
    let mut best_r = residual(x);
    let mut up = x;
    let mut down = x;
    for _ in 0..16 {
        up = next_up(up);
        down = next_down(down);
        for c in [up, down] {
            let r = residual(c);
            if r < best_r {
                best = c;
                best_r = r;
            }
        }
    }
    best
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Solves `eps / tanc(alpha) = rho` on the branch `(n pi - pi/2, n pi + pi/2)`.
///
/// The root is returned as `n pi + offset` so that the residual can be
/// evaluated without the rounding error of `n pi`.
pub fn solve_alpha(epsilon: f64, rho: f64, n: i64) -> Result<BranchAngle> {
    if !(epsilon > 0.0) || rho == 0.0 || !rho.is_finite() {
        return Err(Error::InvalidInput(
            "solve_alpha needs eps > 0 and rho != 0".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidInput(
            "alpha branch n = 0 gives the degenerate root alpha = 0".into(),
        ));
    }
    let base = n as f64 * PI;
    // eps alpha cos(d) - rho sin(d), with alpha = n pi + d; same roots as
    // eps / tanc(alpha) - rho but free of poles.
    let f = |d: f64| {
        let (s, c) = d.sin_cos();
        let a = base + d;
        (
            epsilon * a * c - rho * s,
            epsilon * c - epsilon * a * s - rho * c,
        )
    };
    let half = 0.5 * PI;
    let offset = safeguarded_newton(f, -half, half, 0.0)?;
    let residual = |d: f64| (alpha_rho(epsilon, BranchAngle::new(n, d)) - rho).abs();
    let offset = polish(offset, residual);
    let alpha = BranchAngle::new(n, offset);
    let cos_abs = alpha.cos().abs();
    if cos_abs < MIN_COS_ALPHA {
        return Err(Error::CosineTooSmall {
            alpha: alpha.value(),
            cos_abs,
        });
    }
    let r = residual(offset);
    if !(r <= CONSISTENCY_TOL * rho.abs()) {
        return Err(Error::NoConvergence {
            iterations: MAX_ROOT_ITERATIONS,
            last: alpha.value(),
        });
    }
    Ok(alpha)
}

fn alpha_rho(epsilon: f64, alpha: BranchAngle) -> f64 {
    epsilon * alpha.value() / alpha.offset.tan()
}

fn beta_rho(epsilon: f64, beta: f64) -> f64 {
    epsilon * eval_sinc(beta) / eval_psi(beta)
}

/// `eps sinc(b) - rho psi(b)` and its derivative.
fn beta_equation(epsilon: f64, rho: f64, b: f64) -> (f64, f64) {
    let sinc = eval_sinc(b);
    let psi = eval_psi(b);
    let (dsinc, dpsi) = if b.abs() < PSI_SERIES_THRESHOLD {
        let b2 = b * b;
        (
            -b / 3.0 + b * b2 / 30.0,
            -b / 5.0 + b * b2 / 70.0 - b * b2 * b2 / 2520.0,
        )
    } else {
        (
            (b.cos() - sinc) / b,
            3.0 * b.sin() / (b * b) - 3.0 * psi / b,
        )
    };
    (epsilon * sinc - rho * psi, epsilon * dsinc - rho * dpsi)
}

const BETA_SCAN_STEP: f64 = 0.05;
const BETA_SCAN_STEPS: usize = 4000;

/// Root of `eps sinc(b)/psi(b) = rho` nearest to `start` (same sign as
/// `start`), without the residual check.
fn locate_beta(epsilon: f64, rho: f64, start: f64) -> Result<f64> {
    let b0 = start.abs();
    let g = |b: f64| beta_equation(epsilon, rho, b).0;
    let mut bracket = None;
    for k in 1..=BETA_SCAN_STEPS {
        let hi_a = b0 + (k - 1) as f64 * BETA_SCAN_STEP;
        let hi_b = b0 + k as f64 * BETA_SCAN_STEP;
        if g(hi_a).signum() != g(hi_b).signum() {
            bracket = Some((hi_a, hi_b));
            break;
        }
        let lo_b = b0 - (k - 1) as f64 * BETA_SCAN_STEP;
        let lo_a = b0 - k as f64 * BETA_SCAN_STEP;
        if lo_a > 0.0 && g(lo_a).signum() != g(lo_b).signum() {
            bracket = Some((lo_a, lo_b));
            break;
        }
    }
    let (lo, hi) = bracket.ok_or(Error::NoRootInBracket {
        lo: (b0 - BETA_SCAN_STEPS as f64 * BETA_SCAN_STEP).max(0.0),
        hi: b0 + BETA_SCAN_STEPS as f64 * BETA_SCAN_STEP,
    })?;
    let b = safeguarded_newton(|b| beta_equation(epsilon, rho, b), lo, hi, 0.5 * (lo + hi))?;
    let b = polish(b, |b| (beta_rho(epsilon, b) - rho).abs());
    let psi_abs = eval_psi(b).abs();
    if psi_abs < MIN_PSI {
        return Err(Error::PsiTooSmall { beta: b, psi_abs });
    }
    Ok(b.copysign(start))
}

/// Solves `eps sinc(beta) / psi(beta) = rho` for the root nearest to `beta_start`.
pub fn solve_beta(epsilon: f64, rho: f64, beta_start: f64) -> Result<f64> {
    if !(epsilon > 0.0) || rho == 0.0 || !rho.is_finite() {
        return Err(Error::InvalidInput(
            "solve_beta needs eps > 0 and rho != 0".into(),
        ));
    }
    if beta_start == 0.0 || !beta_start.is_finite() {
        return Err(Error::InvalidInput(
            "beta start value must be nonzero".into(),
        ));
    }
    let b = locate_beta(epsilon, rho, beta_start)?;
    if !((beta_rho(epsilon, b) - rho).abs() <= CONSISTENCY_TOL * rho.abs()) {
        return Err(Error::NoConvergence {
            iterations: MAX_ROOT_ITERATIONS,
            last: b,
        });
    }
    Ok(b)
}

/// Outcome of parameter planning.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub disc: Discretization,
    /// `|eps / tanc(alpha) - rho_eff|`
    pub residual_alpha: f64,
    /// `|eps sinc(beta) / psi(beta) - rho_eff|`
    pub residual_beta: f64,
    pub stability: StabilityReport,
    pub accepted: bool,
    /// False for meshes taken as given without the consistency condition.
    pub planned: bool,
}

impl PlanResult {
    fn assemble(
        request_scheme: SchemeKind,
        theta_max: f64,
        setup: &PhysicalSetup,
        mut disc: Discretization,
        planned: bool,
    ) -> Self {
        let stability = stability_report(setup, &disc);
        disc.theta_bound = Some(stability.bound_value);
        let (residual_alpha, residual_beta) = disc.consistency_residuals(setup);
        let consistent = !planned || disc.is_consistent(setup, CONSISTENCY_TOL);
        let stable = match request_scheme {
            SchemeKind::Leapfrog => stability.bound_value <= theta_max,
            SchemeKind::CrankNicolson => true,
        };
        Self {
            disc,
            residual_alpha,
            residual_beta,
            stability,
            accepted: consistent && stable,
            planned,
        }
    }

    fn into_checked(self, scheme: SchemeKind, theta_max: f64) -> Result<Self> {
        if scheme == SchemeKind::Leapfrog && !(self.stability.bound_value <= theta_max) {
            return Err(Error::StabilityViolation {
                bound_value: self.stability.bound_value,
                theta_max,
            });
        }
        Ok(self)
    }
}

/// Runs the planning pipeline and reports the result whether or not the
/// leapfrog stability bound holds.
pub fn evaluate_plan(request: &PlanRequest) -> Result<PlanResult> {
    request.validate()?;
    let setup = &request.setup;
    let eps = setup.epsilon;
    let kappa = setup.kappa;
    let length = setup.length();

    // provisional time step from the target rho
    let alpha0 = solve_alpha(eps, request.rho_target, request.alpha_branch)?;
    let tau0 = 2.0 * alpha0.value() * eps / (kappa * kappa);
    let beta_start = match request.target_m {
        Some(m) => kappa.abs() * (length / m as f64) / eps,
        None => kappa.abs() * tau0 / (request.beta_branch.unsigned_abs() as f64 * eps),
    };
    let beta0 = locate_beta(eps, request.rho_target, beta_start)?;
    let h0 = (beta0 * eps / kappa).abs();
    let m0 = (length / h0).round().max(2.0) as usize;

    // snap to an integer grid: among nearby M take the one whose realized
    // rho stays closest to the target
    let spread = (m0 as f64 * request.m_window).round() as usize;
    let lo = m0.saturating_sub(spread).max(2);
    let hi = m0 + spread;
    let mut best: Option<(f64, usize, f64)> = None;
    for m in lo..=hi {
        let beta = kappa * (length / m as f64) / eps;
        if eval_psi(beta).abs() < MIN_PSI {
            continue;
        }
        let rho = beta_rho(eps, beta);
        if rho.signum() != request.rho_target.signum() || !rho.is_finite() {
            continue;
        }
        let score = (rho / request.rho_target).ln().abs() + 1e-9 * (m as f64 - m0 as f64).abs();
        if best.is_none_or(|(s, _, _)| score < s) {
            best = Some((score, m, rho));
        }
    }
    let (_, m, rho_eff) = best.ok_or_else(|| {
        Error::InvalidInput(format!(
            "no grid size near M = {m0} realizes a consistency constant of the sign of rho"
        ))
    })?;
    let grid = Grid::for_setup(setup, m);

    let alpha = solve_alpha(eps, rho_eff, request.alpha_branch)?;
    let tau = 2.0 * alpha.value() * eps / (kappa * kappa);
    let n = (setup.final_time / tau).round().max(1.0) as usize;
    // hit the requested final time exactly when that keeps the condition
    let alpha_exact_time =
        BranchAngle::from_value(0.5 * kappa * kappa * (setup.final_time / n as f64) / eps);
    let alpha =
        if (alpha_rho(eps, alpha_exact_time) - rho_eff).abs() <= CONSISTENCY_TOL * rho_eff.abs() {
            alpha_exact_time
        } else {
            alpha
        };
    let disc = Discretization::from_alpha(setup, grid, n, alpha)?;
    if (disc.final_time() - setup.final_time).abs() > 1e-12 * setup.final_time {
        log::info!(
            "realized final time {} differs from the requested {} to keep the consistency condition exact",
            disc.final_time(),
            setup.final_time
        );
    }
    Ok(PlanResult::assemble(
        request.scheme,
        request.theta_max,
        setup,
        disc,
        true,
    ))
}

/// Plans a mesh satisfying the consistency condition; fails with
/// [`Error::StabilityViolation`] for a leapfrog plan above `theta_max`.
pub fn plan(request: &PlanRequest) -> Result<PlanResult> {
    evaluate_plan(request)?.into_checked(request.scheme, request.theta_max)
}

/// Reports on a user-given `(tau, h)` without the consistency condition.
pub fn evaluate_direct(
    setup: &PhysicalSetup,
    tau: f64,
    h: f64,
    scheme: SchemeKind,
    theta_max: f64,
) -> Result<PlanResult> {
    let disc = Discretization::direct(setup, tau, h)?;
    Ok(PlanResult::assemble(scheme, theta_max, setup, disc, false))
}

pub fn plan_direct(
    setup: &PhysicalSetup,
    tau: f64,
    h: f64,
    scheme: SchemeKind,
    theta_max: f64,
) -> Result<PlanResult> {
    evaluate_direct(setup, tau, h, scheme, theta_max)?.into_checked(scheme, theta_max)
}
