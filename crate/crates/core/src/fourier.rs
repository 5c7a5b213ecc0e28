use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse DFT pair of a fixed size.
///
/// `forward` divides by `m`, so `forward` returns the Fourier coefficients
/// `u_hat_k = 1/m sum_j u_j exp(-2 pi i j k / m)` and `inverse` is the plain
/// synthesis sum.
#[derive(Clone)]
pub struct Dft {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.fwd.process(data);
        let scale = 1.0 / self.m as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inv.process(data);
    }

    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        buf
    }
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("m", &self.m).finish()
    }
}
