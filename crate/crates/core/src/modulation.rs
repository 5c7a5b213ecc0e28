//! Dominant term of the modulated plane wave and the defect of the schemes.
//!
//! The envelope solves `a_t + kappa a_x = -i lambda |a|^2 a`; along
//! characteristics `|a|` is constant, so
//! `a(t, x) = a0(x - kappa t) exp(-i lambda |a0(x - kappa t)|^2 t)`.

use num_complex::Complex64;

use crate::diagnostics::wiener_norm;
use crate::grid::{Grid, GridFunction};
use crate::mesh::Discretization;
use crate::setup::{EnvelopeProfile, PhysicalSetup};

/// Meshes whose consistency residuals exceed this relative size are flagged.
pub const DEFECT_CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub a0: EnvelopeProfile,
    pub kappa: f64,
    pub lambda: f64,
    left: f64,
    length: f64,
}

impl Envelope {
    pub fn new(setup: &PhysicalSetup) -> Self {
        Self {
            a0: setup.envelope.clone(),
            kappa: setup.kappa,
            lambda: setup.lambda,
            left: setup.domain_left,
            length: setup.length(),
        }
    }

    pub fn initial(&self, x: f64) -> Complex64 {
        self.a0.eval(x, self.left, self.length)
    }
}

pub fn envelope_eval(env: &Envelope, t: f64, x: f64) -> Complex64 {
    let a0 = env.initial(x - env.kappa * t);
    a0 * Complex64::from_polar(1.0, -env.lambda * a0.norm_sqr() * t)
}

/// `v(t, x) = a(t, x) exp(i (kappa x - kappa^2 t / 2) / eps)`.
pub fn dominant_term(env: &Envelope, epsilon: f64, t: f64, x: f64) -> Complex64 {
    envelope_eval(env, t, x) * carrier(env.kappa, epsilon, t, x)
}

fn carrier(kappa: f64, epsilon: f64, t: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, (kappa * x - 0.5 * kappa * kappa * t) / epsilon)
}

pub fn sample_dominant_term(env: &Envelope, epsilon: f64, t: f64, grid: Grid) -> GridFunction {
    GridFunction::from_fn(grid, t, |x| dominant_term(env, epsilon, t, x))
}

/// Defect of the dominant term inserted into a scheme at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSample {
    pub values: GridFunction,
    pub max_norm: f64,
    pub wiener_norm: f64,
    /// False when the mesh does not satisfy the consistency condition, in
    /// which case the defect need not be small.
    pub consistent: bool,
}

impl DefectSample {
    fn new(values: GridFunction, consistent: bool) -> Self {
        let max_norm = values.max_norm();
        let wiener_norm = wiener_norm(&values);
        Self {
            values,
            max_norm,
            wiener_norm,
            consistent,
        }
    }
}

/// Scheme coefficients shared by both defects. The carrier is factored out:
/// `v(t +- tau, x) = e^{i theta} a(t +- tau, x) e^{-+ i alpha}` and
/// `v(t, x +- h) = e^{i theta} a(t, x +- h) e^{+- i beta}`.
struct DefectParts {
    e_alpha: Complex64,
    e_beta: Complex64,
    time: f64,
    space: f64,
    phi: f64,
    nonlinear: f64,
    cos_alpha: f64,
}

impl DefectParts {
    fn new(setup: &PhysicalSetup, disc: &Discretization) -> Self {
        let f = &disc.filters;
        let eps = setup.epsilon;
        let h = disc.h();
        Self {
            e_alpha: Complex64::new(disc.alpha.cos(), disc.alpha.sin()),
            e_beta: Complex64::from_polar(1.0, disc.beta),
            time: eps / (2.0 * disc.tau * f.sinc_alpha),
            space: eps * eps / (2.0 * h * h * f.psi_beta),
            phi: f.phi_beta,
            nonlinear: setup.lambda * eps / f.tanc_alpha,
            cos_alpha: f.cos_alpha,
        }
    }

    /// `i eps (v(t+tau) - v(t-tau)) / (2 tau sinc a)` without the carrier.
    fn time_difference(&self, plus: Complex64, minus: Complex64) -> Complex64 {
        Complex64::i() * self.time * (plus * self.e_alpha.conj() - minus * self.e_alpha)
    }

    /// Filtered second difference without the carrier.
    fn space_difference(&self, right: Complex64, mid: Complex64, left: Complex64) -> Complex64 {
        self.space * (right * self.e_beta - 2.0 * self.phi * mid + left * self.e_beta.conj())
    }
}

fn consistency_flag(setup: &PhysicalSetup, disc: &Discretization) -> bool {
    let ok = disc.is_consistent(setup, DEFECT_CONSISTENCY_TOL);
    if !ok {
        log::warn!("defect evaluated on a mesh that violates the consistency condition");
    }
    ok
}

pub fn defect_leapfrog(
    env: &Envelope,
    setup: &PhysicalSetup,
    disc: &Discretization,
    t: f64,
) -> DefectSample {
    let p = DefectParts::new(setup, disc);
    let (tau, h, eps) = (disc.tau, disc.h(), setup.epsilon);
    let values = GridFunction::from_fn(disc.grid, t, |x| {
        let a = |s: f64, y: f64| envelope_eval(env, s, y);
        let mid = a(t, x);
        let d = p.time_difference(a(t + tau, x), a(t - tau, x))
            + p.space_difference(a(t, x + h), mid, a(t, x - h))
            - p.nonlinear * mid.norm_sqr() * mid;
        d * carrier(env.kappa, eps, t, x)
    });
    DefectSample::new(values, consistency_flag(setup, disc))
}

pub fn defect_cn(
    env: &Envelope,
    setup: &PhysicalSetup,
    disc: &Discretization,
    t: f64,
) -> DefectSample {
    let p = DefectParts::new(setup, disc);
    let (tau, h, eps) = (disc.tau, disc.h(), setup.epsilon);
    let values = GridFunction::from_fn(disc.grid, t, |x| {
        let a = |s: f64, y: f64| envelope_eval(env, s, y);
        // averaged level without the carrier
        let avg = |y: f64| {
            (a(t + tau, y) * p.e_alpha.conj() + a(t - tau, y) * p.e_alpha) / (2.0 * p.cos_alpha)
        };
        let (plus, minus) = (a(t + tau, x), a(t - tau, x));
        let mid = avg(x);
        let d = p.time_difference(plus, minus) + p.space_difference(avg(x + h), mid, avg(x - h))
            - 0.5 * p.nonlinear * (plus.norm_sqr() + minus.norm_sqr()) * mid;
        d * carrier(env.kappa, eps, t, x)
    });
    DefectSample::new(values, consistency_flag(setup, disc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_initial_data;
    use crate::planner::{plan, PlanRequest};
    use crate::schemes::SchemeKind;
    use std::f64::consts::PI;

    fn gaussian(eps: f64, lambda: f64) -> PhysicalSetup {
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

    #[test]
    fn envelope_at_zero_and_modulus() {
        let s = gaussian(1e-3, 2.0);
        let env = Envelope::new(&s);
        for &x in &[-1.0, 0.0, 0.3, 2.5] {
            assert_eq!(envelope_eval(&env, 0.0, x), env.initial(x));
            for &t in &[0.1, 0.7, 3.0] {
                let a = envelope_eval(&env, t, x);
                assert!((a.norm() - env.initial(x - t).norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn envelope_solves_transport() {
        let s = gaussian(1e-3, 1.0);
        let env = Envelope::new(&s);
        let d = 1e-5;
        for &(t, x) in &[(0.3, 0.1), (0.5, -0.7), (1.0, 1.4)] {
            let at = (envelope_eval(&env, t + d, x) - envelope_eval(&env, t - d, x)) / (2.0 * d);
            let ax = (envelope_eval(&env, t, x + d) - envelope_eval(&env, t, x - d)) / (2.0 * d);
            let a = envelope_eval(&env, t, x);
            let r = at + env.kappa * ax + Complex64::i() * env.lambda * a.norm_sqr() * a;
            assert!(r.norm() <= 1e-7, "{}", r.norm());
        }
    }

    #[test]
    fn dominant_term_matches_initial_sample() {
        let s = gaussian(1e-2, 1.0);
        let env = Envelope::new(&s);
        let g = Grid::for_setup(&s, 100);
        let v = sample_dominant_term(&env, s.epsilon, 0.0, g);
        let u = sample_initial_data(&s, g);
        for (a, b) in v.values.iter().zip(&u.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn dominant_term_linear_plane_wave_solves_equation() {
        let eps = 0.1;
        let s = PhysicalSetup::new(
            eps,
            1.0,
            0.0,
            (0.0, 2.0 * PI),
            1.0,
            EnvelopeProfile::constant(1.0),
        )
        .unwrap();
        let env = Envelope::new(&s);
        let d = 1e-4;
        let v = |t: f64, x: f64| dominant_term(&env, eps, t, x);
        let (t, x) = (0.4, 1.1);
        let vt = (v(t + d, x) - v(t - d, x)) / (2.0 * d);
        let vxx = (v(t, x + d) - 2.0 * v(t, x) + v(t, x - d)) / (d * d);
        let r = Complex64::i() * eps * vt + 0.5 * eps * eps * vxx;
        // scale: eps^2/2 * |v_xx| ~ 1/2
        assert!(r.norm() <= 1e-6 * 0.5, "{}", r.norm());
    }

    #[test]
    fn dominant_term_mass_is_constant() {
        let s = gaussian(1e-3, 1.0);
        let env = Envelope::new(&s);
        let g = Grid::for_setup(&s, 512);
        let mass = |t: f64| -> f64 {
            sample_dominant_term(&env, s.epsilon, t, g)
                .values
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                * g.h()
        };
        let m0 = mass(0.0);
        for &t in &[0.25, 0.5, 1.0] {
            assert!((mass(t) - m0).abs() <= 1e-10 * m0);
        }
    }

    #[test]
    fn defect_vanishes_for_linear_plane_wave() {
        let s = PhysicalSetup::new(
            1e-3,
            1.0,
            0.0,
            (0.0, 2.0 * PI),
            1.0,
            EnvelopeProfile::constant(1.0),
        )
        .unwrap();
        let env = Envelope::new(&s);
        let p = plan(&PlanRequest::new(
            s.clone(),
            4.0,
            1,
            SchemeKind::CrankNicolson,
        ))
        .unwrap();
        let lf = defect_leapfrog(&env, &s, &p.disc, 0.5);
        let cn = defect_cn(&env, &s, &p.disc, 0.5);
        assert!(lf.consistent && cn.consistent);
        // terms are of size kappa^2 / 2
        assert!(lf.max_norm <= 1e-12, "{:e}", lf.max_norm);
        assert!(cn.max_norm <= 1e-12, "{:e}", cn.max_norm);
    }

    #[test]
    fn zero_envelope_zero_defect() {
        let s = PhysicalSetup::new(
            1e-2,
            1.0,
            1.0,
            (-4.0, 4.0),
            1.0,
            EnvelopeProfile::constant(0.0),
        )
        .unwrap();
        let env = Envelope::new(&s);
        let d = Discretization::direct(&s, 0.01, 0.05).unwrap();
        let cn = defect_cn(&env, &s, &d, 0.5);
        assert_eq!(cn.max_norm, 0.0);
        assert!(!cn.consistent);
    }
}
