//! Conserved quantities, norms, error measurement and order fits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Dft;
use crate::grid::GridFunction;
use crate::mesh::Discretization;
use crate::setup::PhysicalSetup;

/// `sum_j |u_j|^2`, unweighted.
pub fn discrete_mass(u: &GridFunction) -> f64 {
    u.values.iter().map(|v| v.norm_sqr()).sum()
}

/// `eps^2/2 sum_j |u_{j+1} - u_j|^2 / (h^2 psi(beta)) + lambda eps / 2 sum_j |u_j|^4 / tanc(alpha)`
/// with periodic wrap, unweighted.
pub fn discrete_energy(u: &GridFunction, setup: &PhysicalSetup, disc: &Discretization) -> f64 {
    let m = u.values.len();
    let h = disc.h();
    let f = &disc.filters;
    let mut grad = 0.0;
    let mut quartic = 0.0;
    for j in 0..m {
        let v = u.values[j];
        grad += (u.values[(j + 1) % m] - v).norm_sqr();
        quartic += v.norm_sqr() * v.norm_sqr();
    }
    let eps = setup.epsilon;
    0.5 * eps * eps * grad / (h * h * f.psi_beta)
        + 0.5 * setup.lambda * eps * quartic / f.tanc_alpha
}

/// `sum_k |u_hat_k|` with `u_hat_k = 1/M sum_j u_j exp(-2 pi i j k / M)`.
pub fn wiener_norm(u: &GridFunction) -> f64 {
    wiener_norm_of(&u.values)
}

pub fn wiener_norm_of(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    Dft::new(values.len())
        .coefficients(values)
        .iter()
        .map(|c| c.norm())
        .sum()
}

/// `sum_k sqrt(|u_hat_k^{n+1}|^2 + |u_hat_k^n|^2)`, the Wiener norm of a pair of levels.
pub fn two_level_wiener_norm(u_next: &GridFunction, u_curr: &GridFunction) -> f64 {
    let dft = Dft::new(u_next.len());
    let a = dft.coefficients(&u_next.values);
    let b = dft.coefficients(&u_curr.values);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x.norm_sqr() + y.norm_sqr()).sqrt())
        .sum()
}

/// Bound `2 / sqrt(2 (1 - theta))` on the growth of the leapfrog pair norm.
pub fn leapfrog_norm_bound(theta: f64) -> f64 {
    2.0 / (2.0 * (1.0 - theta)).sqrt()
}

/// Max-norm difference to a reference on a grid refined by an integer factor.
pub fn max_error(u: &GridFunction, reference: &GridFunction) -> Result<f64> {
    let (m, mr) = (u.grid.m, reference.grid.m);
    let aligned = m > 0
        && mr % m == 0
        && (u.grid.left - reference.grid.left).abs() <= 1e-12 * u.grid.length.abs().max(1.0)
        && (u.grid.length - reference.grid.length).abs() <= 1e-12 * u.grid.length.abs();
    if !aligned {
        return Err(Error::GridMisaligned {
            coarse: m,
            fine: mr,
        });
    }
    let stride = mr / m;
    Ok(u.values
        .iter()
        .enumerate()
        .map(|(j, v)| (v - reference.values[j * stride]).norm())
        .fold(0.0, f64::max))
}

/// Max-norm difference to a function sampled at the nodes.
pub fn max_error_fn(u: &GridFunction, reference: impl Fn(f64) -> Complex64) -> f64 {
    u.values
        .iter()
        .zip(u.grid.nodes())
        .map(|(v, x)| (v - reference(x)).norm())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log(errors)` against `log(hs)`.
pub fn fit_order(hs: &[f64], errors: &[f64]) -> Result<f64> {
    if hs.len() != errors.len() {
        return Err(Error::DegenerateFit("length mismatch".into()));
    }
    if hs.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} points, need at least 3",
            hs.len()
        )));
    }
    if hs
        .iter()
        .chain(errors)
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return Err(Error::DegenerateFit("values must be positive".into()));
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-24 * n {
        return Err(Error::DegenerateFit("no variance in h".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Time series of discrete mass and energy.
///
/// Two-step schemes conserve the quantities separately on even and odd time
/// levels, so drifts are measured against the first level of the same
/// parity; `cross_*` drifts are against level 0 for every level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConservationSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub rel_mass_drift: f64,
    pub rel_energy_drift: f64,
    pub cross_mass_drift: f64,
    pub cross_energy_drift: f64,
    pub two_step: bool,
}

fn rel_change(q: f64, q0: f64) -> f64 {
    if q0 == 0.0 {
        q.abs()
    } else {
        (q - q0).abs() / q0.abs()
    }
}

impl ConservationSeries {
    pub fn new(two_step: bool) -> Self {
        Self {
            two_step,
            ..Self::default()
        }
    }

    fn reference(&self, len: usize, values: &[f64]) -> f64 {
        if self.two_step && len.is_multiple_of(2) && values.len() > 1 {
            values[1]
        } else {
            values[0]
        }
    }

    /// Appends one time level and returns its `(mass, energy)` drifts.
    pub fn push(&mut self, t: f64, mass: f64, energy: f64) -> (f64, f64) {
        self.times.push(t);
        self.mass.push(mass);
        self.energy.push(energy);
        let len = self.times.len();
        let dm = rel_change(mass, self.reference(len, &self.mass));
        let de = rel_change(energy, self.reference(len, &self.energy));
        self.rel_mass_drift = self.rel_mass_drift.max(dm);
        self.rel_energy_drift = self.rel_energy_drift.max(de);
        self.cross_mass_drift = self.cross_mass_drift.max(rel_change(mass, self.mass[0]));
        self.cross_energy_drift = self
            .cross_energy_drift
            .max(rel_change(energy, self.energy[0]));
        (dm, de)
    }

    pub fn record(
        &mut self,
        u: &GridFunction,
        setup: &PhysicalSetup,
        disc: &Discretization,
    ) -> (f64, f64) {
        self.push(u.time, discrete_mass(u), discrete_energy(u, setup, disc))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
