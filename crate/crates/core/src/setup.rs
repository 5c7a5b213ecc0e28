//! Continuous problem data: equation coefficients, periodic domain and the
//! slowly varying envelope of the modulated plane wave initial value.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Envelope `a0(x)` of the initial value `u(0, x) = exp(i kappa x / eps) a0(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeProfile {
    Constant(Complex64),
    /// `amplitude * exp(-sigma (x - center)^2)`, periodized around `center`.
    Gaussian {
        amplitude: f64,
        sigma: f64,
        center: f64,
    },
    /// Samples at `left + j L / len`, evaluated off-grid by trigonometric
    /// interpolation.
    Tabulated(TrigInterpolant),
}

impl EnvelopeProfile {
    pub fn constant(c: f64) -> Self {
        EnvelopeProfile::Constant(Complex64::new(c, 0.0))
    }

    pub fn gaussian(amplitude: f64, sigma: f64, center: f64) -> Self {
        EnvelopeProfile::Gaussian {
            amplitude,
            sigma,
            center,
        }
    }

    pub fn tabulated(samples: &[Complex64]) -> Result<Self> {
        TrigInterpolant::new(samples).map(EnvelopeProfile::Tabulated)
    }

    /// Evaluates the profile at `x` on the periodic interval starting at
    /// `left` with length `length`.
    pub fn eval(&self, x: f64, left: f64, length: f64) -> Complex64 {
        match self {
            EnvelopeProfile::Constant(c) => *c,
            EnvelopeProfile::Gaussian {
                amplitude,
                sigma,
                center,
            } => {
                let d = wrap_centered(x - center, length);
                Complex64::new(amplitude * (-sigma * d * d).exp(), 0.0)
            }
            EnvelopeProfile::Tabulated(interp) => interp.eval((x - left) / length),
        }
    }
}

/// Maps `d` into `[-length/2, length/2)`.
fn wrap_centered(d: f64, length: f64) -> f64 {
    d - length * (d / length + 0.5).floor()
}

/// Trigonometric interpolant of equispaced periodic samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    samples: Vec<Complex64>,
    /// Coefficients for wavenumbers `-(m/2) ..= (m-1)/2`, first entry is the
    /// lowest wavenumber.
    coeffs: Vec<Complex64>,
    lowest: i64,
    nyquist_split: bool,
}

impl TrigInterpolant {
    pub fn new(samples: &[Complex64]) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(Error::InvalidInput("empty tabulated envelope".into()));
        }
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let scale = 1.0 / m as f64;
        let lowest = -((m / 2) as i64);
        let coeffs = (lowest..lowest + m as i64)
            .map(|k| buf[k.rem_euclid(m as i64) as usize] * scale)
            .collect();
        Ok(Self {
            samples: samples.to_vec(),
            coeffs,
            lowest,
            nyquist_split: m.is_multiple_of(2),
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Evaluates at the fractional period position `s` (`s = 0` is the first
    /// sample, `s = 1` wraps back to it).
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.lowest + i as i64;
            let theta = 2.0 * PI * k as f64 * s;
            if self.nyquist_split && i == 0 {
                // split the Nyquist mode symmetrically so real data stays real
                acc += c * theta.cos();
            } else {
                acc += c * Complex64::from_polar(1.0, theta);
            }
        }
        acc
    }
}

/// Data of the semiclassical cubic Schrodinger problem
/// `i eps u_t + eps^2/2 u_xx = lambda eps |u|^2 u` on a periodic interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSetup {
    pub epsilon: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub domain_left: f64,
    pub domain_right: f64,
    pub final_time: f64,
    pub envelope: EnvelopeProfile,
}

impl PhysicalSetup {
    pub fn new(
        epsilon: f64,
        kappa: f64,
        lambda: f64,
        domain: (f64, f64),
        final_time: f64,
        envelope: EnvelopeProfile,
    ) -> Result<Self> {
        let setup = Self {
            epsilon,
            kappa,
            lambda,
            domain_left: domain.0,
            domain_right: domain.1,
            final_time,
            envelope,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if self.kappa == 0.0 || !self.kappa.is_finite() {
            return bad("kappa must be nonzero");
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite");
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad("final time must be positive");
        }
        if !(self.domain_right > self.domain_left) {
            return bad("domain_right must exceed domain_left");
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.domain_right - self.domain_left
    }

    /// `|exp(i kappa L / eps) - 1|`, zero when the carrier is periodic.
    pub fn carrier_wrap_mismatch(&self) -> f64 {
        let phase = self.kappa * self.length() / self.epsilon;
        (Complex64::from_polar(1.0, phase) - 1.0).norm()
    }

    pub fn envelope_at(&self, x: f64) -> Complex64 {
        self.envelope.eval(x, self.domain_left, self.length())
    }
}
