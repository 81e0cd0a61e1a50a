//! Deterministic floating-point accumulation.
//!
//! Summation order is part of the output contract: grid scans must be
//! byte-identical across worker-pool sizes, so every reduction here runs
//! over an already-ordered slice with a fixed pairwise tree.

use num_complex::Complex64;

const PAIRWISE_BASE: usize = 32;

pub fn pairwise_sum_complex(v: &[Complex64]) -> Complex64 {
    if v.len() <= PAIRWISE_BASE {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_complex(&v[..mid]) + pairwise_sum_complex(&v[mid..])
}

/// Kahan-compensated sequential sum, for long alternating series.
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan { sum: 0.0, carry: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl Default for Kahan {
    fn default() -> Self {
        Self::new()
    }
}
