//! Filter functions of the filtered finite difference schemes.
//!
//! `sinc(z) = sin z / z`, `tanc(z) = tan z / z`,
//! `phi(z) = 3/2 sinc z - 1/2 cos z` and `psi(z) = (phi z - cos z) / (z^2 / 2)`.
//!
//! All four have removable singularities at the origin. `sinc` and `tanc`
//! switch to truncated Taylor series below [`SERIES_THRESHOLD`]. `psi` is
//! evaluated from its full power series below [`PSI_SERIES_THRESHOLD`]
//! because the quotient form loses `log10(1/z^2)` digits to cancellation.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this `|z|` `sinc` and `tanc` use truncated Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Below this `|z|` `psi` is summed from its power series.
pub const PSI_SERIES_THRESHOLD: f64 = 1.0;

/// `tanc` raises [`Error::Pole`] when `|cos z|` drops to this value.
pub const TANC_POLE_GUARD: f64 = 1e-8;

pub fn eval_sinc(z: f64) -> f64 {
    if z.abs() < SERIES_THRESHOLD {
        branches::sinc_series(z)
    } else {
        branches::sinc_direct(z)
    }
}

pub fn eval_tanc(z: f64) -> Result<f64> {
    let cos_abs = z.cos().abs();
    if cos_abs <= TANC_POLE_GUARD {
        return Err(Error::Pole { z, cos_abs });
    }
    Ok(if z.abs() < SERIES_THRESHOLD {
        branches::tanc_series(z)
    } else {
        branches::tanc_direct(z)
    })
}

pub fn eval_phi(z: f64) -> f64 {
    1.5 * eval_sinc(z) - 0.5 * z.cos()
}

pub fn eval_psi(z: f64) -> f64 {
    if z.abs() < PSI_SERIES_THRESHOLD {
        branches::psi_series(z)
    } else {
        branches::psi_direct(z)
    }
}

/// The two evaluation branches of each filter, exposed so that their
/// agreement across the switch-over can be tested.
pub mod branches {
    pub fn sinc_series(z: f64) -> f64 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    }

    pub fn sinc_direct(z: f64) -> f64 {
        z.sin() / z
    }

    pub fn tanc_series(z: f64) -> f64 {
        let z2 = z * z;
        1.0 + z2 / 3.0 + 2.0 * z2 * z2 / 15.0
    }

    pub fn tanc_direct(z: f64) -> f64 {
        z.tan() / z
    }

    /// `psi(z) = sum_{k>=1} (-1)^(k+1) 6k z^(2k-2) / (2k+1)!`
    pub fn psi_series(z: f64) -> f64 {
        let z2 = z * z;
        // z^(2k-2) / (2k+1)!
        let mut t = 1.0 / 6.0;
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            let term = sign * 6.0 * kf * t;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            t *= z2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            sign = -sign;
        }
        sum
    }

    pub fn psi_direct(z: f64) -> f64 {
        let phi = 1.5 * super::eval_sinc(z) - 0.5 * z.cos();
        (phi - z.cos()) / (0.5 * z * z)
    }
}

/// An angle stored as `branch * pi + offset`.
///
/// The time filter argument sits close to a nonzero multiple of `pi` when the
/// consistency condition is enforced, where `tan` and `sin` of the rounded
/// double lose up to `ulp(n pi) / |offset|` relative accuracy. Keeping the
/// offset separately makes `sin`, `cos` and `tan` accurate to full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAngle {
    pub branch: i64,
    pub offset: f64,
}

impl BranchAngle {
    pub fn new(branch: i64, offset: f64) -> Self {
        Self { branch, offset }
    }

    /// Splits `value` at the nearest multiple of `pi`.
    pub fn from_value(value: f64) -> Self {
        let branch = (value / PI).round();
        Self {
            branch: branch as i64,
            offset: value - branch * PI,
        }
    }

    pub fn value(&self) -> f64 {
        self.branch as f64 * PI + self.offset
    }

    fn parity(&self) -> f64 {
        if self.branch.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn sin(&self) -> f64 {
        self.parity() * self.offset.sin()
    }

    pub fn cos(&self) -> f64 {
        self.parity() * self.offset.cos()
    }

    pub fn sinc(&self) -> f64 {
        if self.branch == 0 {
            eval_sinc(self.offset)
        } else {
            self.sin() / self.value()
        }
    }

    pub fn tanc(&self) -> Result<f64> {
        if self.branch == 0 {
            return eval_tanc(self.offset);
        }
        let cos_abs = self.offset.cos().abs();
        if cos_abs <= TANC_POLE_GUARD {
            return Err(Error::Pole {
                z: self.value(),
                cos_abs,
            });
        }
        Ok(self.offset.tan() / self.value())
    }

    /// The angle divided by two, keeping the offset representation.
    pub fn halved(&self) -> Self {
        if self.branch.rem_euclid(2) == 0 {
            Self::new(self.branch / 2, 0.5 * self.offset)
        } else {
            // (2m+1) pi/2 + d/2 = m pi + (pi/2 + d/2)
            Self::new(self.branch.div_euclid(2), 0.5 * PI + 0.5 * self.offset)
        }
    }
}

/// Filter values for one `(alpha, beta)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterValues {
    pub sinc_alpha: f64,
    pub tanc_alpha: f64,
    pub cos_alpha: f64,
    pub phi_beta: f64,
    pub psi_beta: f64,
    pub sinc_beta: f64,
    pub cos_beta: f64,
}

impl FilterValues {
    pub fn new(alpha: BranchAngle, beta: f64) -> Result<Self> {
        let values = Self {
            sinc_alpha: alpha.sinc(),
            tanc_alpha: alpha.tanc()?,
            cos_alpha: alpha.cos(),
            phi_beta: eval_phi(beta),
            psi_beta: eval_psi(beta),
            sinc_beta: eval_sinc(beta),
            cos_beta: beta.cos(),
        };
        if [
            values.sinc_alpha,
            values.tanc_alpha,
            values.phi_beta,
            values.psi_beta,
        ]
        .iter()
        .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "non-finite filter values for alpha = {}, beta = {beta}",
                alpha.value()
            )));
        }
        Ok(values)
    }
}
