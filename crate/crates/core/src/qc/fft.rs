//! Square 2-D FFTs on row-major complex grids.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
    }

    /// Inverse transform including the `1/size²` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
        let scale = 1.0 / (self.size * self.size) as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.size;
        assert_eq!(data.len(), n * n);
        data.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(data, n);
        data.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(data, n);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    let copy = data.to_vec();
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = copy[j * n + i];
        }
    });
}

/// Signed frequency index of FFT bin `k` for length `n`.
pub(crate) fn signed_index(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let n = 8;
        let fft = Fft2::new(n);
        let orig: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
