//! Exponential sums `sum_{N <= t < 2N} e(kt/q2 - (T/pi) log eps(t))` and
//! the van der Corput bound envelope they are measured against.
//!
//! The classical second/third-derivative estimates are cited, not
//! re-proved: this module computes their hypotheses (the derivative
//! windows `Lambda`, `eta`) exactly and records the observed ratio
//! `|sum| / bound`.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// One measured exponential sum with its bound and observed ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSumRecord {
    pub k: i64,
    pub q2: u64,
    pub big_t: f64,
    pub n: f64,
    pub value: Complex64,
    pub bound: f64,
    pub ratio: f64,
    pub branch: &'static str,
}

/// Phase function `f(t) = kt/q2 - (T/pi) arccosh(t/2)`; note
/// `arccosh(t/2) = log eps(t)`.
pub fn phase(k: i64, q2: u64, big_t: f64, t: f64) -> f64 {
    (k as f64) * t / (q2 as f64) - big_t / PI * (t / 2.0).acosh()
}

/// `sum over integers t in [N, 2N)` of `e(f(t))`, each phase evaluated
/// per-term. The linear part `kt/q2` is reduced mod 1 in exact integer
/// arithmetic before any rounding can occur.
pub fn exp_sum(k: i64, q2: u64, big_t: f64, n: f64) -> Complex64 {
    assert!(q2 >= 1 && n >= 3.0 && big_t >= 0.0);
    let t_start = n.ceil() as i64;
    let t_end = (2.0 * n).ceil() as i64;
    let q2i = q2 as i128;
    let mut acc = Complex64::new(0.0, 0.0);
    for t in t_start..t_end {
        let frac = ((k as i128 * t as i128).rem_euclid(q2i)) as f64 / q2 as f64;
        let angle = TAU * frac - 2.0 * big_t * ((t as f64) / 2.0).acosh();
        acc += Complex64::new(angle.cos(), angle.sin());
    }
    acc
}

/// The displayed estimate `min(T^{1/2} + T^{-1/2} N, T^{1/6} N^{1/2})`.
pub fn vdc_bound(big_t: f64, n: f64) -> f64 {
    assert!(big_t > 0.0 && n > 0.0);
    let a = big_t.sqrt() + n / big_t.sqrt();
    let b = big_t.powf(1.0 / 6.0) * n.sqrt();
    a.min(b)
}

/// Which regime of the case table the pair `(T, N)` falls in.
pub fn vdc_branch(big_t: f64, n: f64) -> &'static str {
    if n < big_t.powf(2.0 / 3.0) {
        "T^{1/6}N^{1/2}"
    } else if n < big_t {
        "T^{1/2}"
    } else {
        "T^{-1/2}N"
    }
}

/// Exact extrema of `|f''|` and `|f'''|` over `[N, 2N]`.
///
/// `|f''(t)| = (T/pi) t (t^2-4)^{-3/2}` and
/// `|f'''(t)| = (T/pi) (2t^2+4) (t^2-4)^{-5/2}` are both strictly
/// decreasing on `t > 2`, so the window is read off the endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeWindow {
    pub lambda2: f64,
    pub eta2: f64,
    pub lambda3: f64,
    pub eta3: f64,
}

pub fn abs_f2(big_t: f64, t: f64) -> f64 {
    big_t / PI * t * (t * t - 4.0).powf(-1.5)
}

pub fn abs_f3(big_t: f64, t: f64) -> f64 {
    big_t / PI * (2.0 * t * t + 4.0) * (t * t - 4.0).powf(-2.5)
}

pub fn derivative_window(big_t: f64, n: f64) -> DerivativeWindow {
    assert!(n >= 3.0 && big_t > 0.0);
    let lambda2 = abs_f2(big_t, 2.0 * n);
    let lambda3 = abs_f3(big_t, 2.0 * n);
    DerivativeWindow {
        lambda2,
        eta2: abs_f2(big_t, n) / lambda2,
        lambda3,
        eta3: abs_f3(big_t, n) / lambda3,
    }
}

/// Fourth-order central stencil for the second derivative. Used only to
/// validate the closed-form derivative windows.
pub fn finite_difference_second(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t - 2.0 * h) + 16.0 * f(t - h) - 30.0 * f(t) + 16.0 * f(t + h) - f(t + 2.0 * h))
        / (12.0 * h * h)
}

/// Fourth-order central stencil for the third derivative.
pub fn finite_difference_third(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t - 3.0 * h) - 8.0 * f(t - 2.0 * h) + 13.0 * f(t - h) - 13.0 * f(t + h)
        + 8.0 * f(t + 2.0 * h)
        - f(t + 3.0 * h))
        / (8.0 * h * h * h)
}

/// Measures one grid point: sum, bound, ratio and regime label.
pub fn exp_sum_record(k: i64, q2: u64, big_t: f64, n: f64) -> ExpSumRecord {
    let value = exp_sum(k, q2, big_t, n);
    let bound = vdc_bound(big_t, n);
    ExpSumRecord {
        k,
        q2,
        big_t,
        n,
        value,
        bound,
        ratio: value.norm() / bound,
        branch: vdc_branch(big_t, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selberg::log_eps_t;

    #[test]
    fn zero_frequency_counts_lattice_points() {
        for n in [3.0f64, 7.5, 50.0, 128.25] {
            let s = exp_sum(0, 1, 0.0, n);
            let count = (2.0 * n).ceil() - n.ceil();
            assert_eq!(s.re, count);
            assert_eq!(s.im, 0.0);
        }
    }

    #[test]
    fn triangle_inequality() {
        for (k, q2, t, n) in [(1i64, 2u64, 100.0, 50.0), (2, 5, 1e4, 30.0), (0, 1, 77.0, 12.0)] {
            let s = exp_sum(k, q2, t, n);
            assert!(s.norm() <= n + 1.0);
        }
    }

    #[test]
    fn vdc_bound_spec_values() {
        assert!((vdc_bound(100.0, 50.0) - 15.0).abs() < 1e-12);
        let b = vdc_bound(100.0, 1e4);
        assert!((b - 100.0f64.powf(1.0 / 6.0) * 100.0).abs() < 1e-9);
        assert_eq!(vdc_branch(100.0, 1e4), "T^{-1/2}N");
        assert_eq!(vdc_branch(100.0, 50.0), "T^{1/2}");
        assert_eq!(vdc_branch(100.0, 10.0), "T^{1/6}N^{1/2}");
    }

    #[test]
    fn derivative_window_shape() {
        let w = derivative_window(1000.0, 500.0);
        assert!(w.eta2 >= 1.0 && w.eta3 >= 1.0);
        // |f''| ~ (T/pi)/t^2 at large t, so eta2 -> 4 and eta3 -> 8
        assert!((w.eta2 - 4.0).abs() < 0.1, "eta2 = {}", w.eta2);
        assert!((w.eta3 - 8.0).abs() < 0.3, "eta3 = {}", w.eta3);
        let want = 1000.0 / PI * 1000.0 * (1e6f64 - 4.0).powf(-1.5);
        assert!((w.lambda2 - want).abs() < 1e-12 * want);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let big_t = 137.0;
        for t in [10.0f64, 100.0, 1000.0] {
            let h = t * 3e-3;
            let f = |v: f64| phase(3, 5, big_t, v);
            let fd2 = finite_difference_second(f, t, h).abs();
            assert!(
                (fd2 - abs_f2(big_t, t)).abs() <= 1e-6 * abs_f2(big_t, t),
                "t={t}: fd2={fd2:e} formula={:e}",
                abs_f2(big_t, t)
            );
            let fd3 = finite_difference_third(f, t, h).abs();
            assert!(
                (fd3 - abs_f3(big_t, t)).abs() <= 1e-6 * abs_f3(big_t, t),
                "t={t}: fd3={fd3:e} formula={:e}",
                abs_f3(big_t, t)
            );
        }
    }

    #[test]
    fn arccosh_is_log_eps() {
        for t in [3i64, 10, 1000, 999_983, 1_000_000] {
            let a = ((t as f64) / 2.0).acosh();
            let b = log_eps_t(t);
            assert!((a - b).abs() <= 1e-12 * b, "t={t}");
        }
    }

    #[test]
    fn record_assembles_fields() {
        let r = exp_sum_record(1, 2, 100.0, 50.0);
        assert_eq!(r.bound, vdc_bound(100.0, 50.0));
        assert_eq!(r.branch, "T^{1/2}");
        assert!((r.ratio - r.value.norm() / r.bound).abs() < 1e-15);
    }
}
