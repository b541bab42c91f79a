//! Radix-2 fast Fourier transform for power-of-two lengths.
//!
//! Transforms are unnormalized: `forward` computes `X_k = Σ_j x_j e^{-2πijk/n}`
//! and `inverse` the same sum with `e^{+2πijk/n}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    /// `e^{-2πik/n}` for `k < n/2`.
    twiddles: Vec<C64>,
    bitrev: Vec<usize>,
}

impl Fft {
    /// Plans a transform of length `n`; panics unless `n` is a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -2.0 * PI * (k as f64) / (n as f64);
                C64::new(angle.cos(), angle.sin())
            })
            .collect();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self { n, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        assert_eq!(data.len(), self.n, "fft buffer length mismatch");
        for i in 0..self.n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.n {
            let stride = self.n / (2 * half);
            for start in (0..self.n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

/// Signed frequency index of FFT bin `k` for length `n` (`k - n` above `n/2`).
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
