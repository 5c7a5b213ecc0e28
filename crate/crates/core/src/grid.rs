//! Periodic grids and complex grid functions.

use num_complex::Complex64;

use crate::setup::PhysicalSetup;

/// Envelope values below this at both ends of the domain make a carrier
/// wrap mismatch harmless.
pub const ENVELOPE_SUPPORT_TOL: f64 = 1e-6;

/// Carrier mismatches `|exp(i kappa L/eps) - 1|` above this are reported.
pub const PERIODICITY_TOL: f64 = 1e-8;

/// `m` equispaced nodes `x_j = left + j length / m` of a periodic interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub left: f64,
    pub length: f64,
    pub m: usize,
}

impl Grid {
    pub fn new(left: f64, length: f64, m: usize) -> Self {
        Self { left, length, m }
    }

    pub fn for_setup(setup: &PhysicalSetup, m: usize) -> Self {
        Self::new(setup.domain_left, setup.length(), m)
    }

    pub fn h(&self) -> f64 {
        self.length / self.m as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.left + j as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.x(j))
    }

    /// Physical wavenumber `2 pi j / L` of DFT bin `bin`, with bins above
    /// `m/2` folded to negative frequencies.
    pub fn wavenumber(&self, bin: usize) -> f64 {
        let m = self.m as i64;
        let mut j = bin as i64;
        if j >= (m + 1) / 2 {
            j -= m;
        }
        2.0 * std::f64::consts::PI * j as f64 / self.length
    }
}

/// Complex samples `u_j` on a periodic grid at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Self {
        assert_eq!(grid.m, values.len(), "grid size and sample count differ");
        Self { grid, values, time }
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.m], time)
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Periodic access, `j` taken modulo `m`.
    pub fn at(&self, j: i64) -> Complex64 {
        self.values[j.rem_euclid(self.values.len() as i64) as usize]
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Samples `u(0, x_j) = exp(i kappa x_j / eps) a0(x_j)`.
///
/// Logs a warning when the carrier is not periodic on the domain and the
/// envelope does not vanish at the ends.
pub fn sample_initial_data(setup: &PhysicalSetup, grid: Grid) -> GridFunction {
    let mismatch = setup.carrier_wrap_mismatch();
    if mismatch > PERIODICITY_TOL {
        let edge = setup
            .envelope_at(setup.domain_left)
            .norm()
            .max(setup.envelope_at(setup.domain_right).norm());
        if edge > ENVELOPE_SUPPORT_TOL {
            log::warn!(
                "carrier exp(i kappa x / eps) is not periodic on the domain \
                 (mismatch {mismatch:.3e}) and the envelope is {edge:.3e} at the boundary"
            );
        }
    }
    let k_over_eps = setup.kappa / setup.epsilon;
    GridFunction::from_fn(grid, 0.0, |x| {
        Complex64::from_polar(1.0, k_over_eps * x) * setup.envelope_at(x)
    })
}
