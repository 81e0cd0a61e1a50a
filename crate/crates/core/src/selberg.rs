//! The smoothed trace sum `psi_s(x)` for `Z'/Z` of the modular group, in
//! its two equivalent forms, plus the sigma > 1 Dirichlet series and the
//! critical-strip estimator.
//!
//! The L-function side sums `2 L(1, t^2-4) (1 - eps(t)^2/x) eps(t)^{1-2s}`
//! over integer traces `3 <= t < X`, `X = sqrt(x) + 1/sqrt(x)`. The
//! geodesic side reaches the same value through discriminants, narrow class
//! numbers and Pell units, sharing no arithmetic with the trace route.
//! Terms are accumulated in a fixed ascending order through a pairwise
//! tree, so results are bit-stable across thread counts.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::arith::{
    factorize_trace_discriminant, is_valid_discriminant, square_divisor_splits_from, FactorSieve,
};
use crate::lfunc::l_value_total_with_factors;
use crate::pell::pell4_fundamental_capped;
use crate::quadforms::class_data;
use crate::sum::pairwise_sum_complex;
use crate::{Error, Result};

/// Geodesic-side enumeration cap on the cutoff `x`.
pub const GEODESIC_X_CAP: f64 = 1e8;

/// A point `s = sigma + iT` of evaluation together with the smoothing
/// cutoff `x` and `X = sqrt(x) + 1/sqrt(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripPoint {
    sigma: f64,
    t: f64,
    x: f64,
    big_x: f64,
}

impl StripPoint {
    /// `sigma` may run over `[0, 2]` (the PGT check sits at `s = 0`, the
    /// convergence checks at `s = 2`); strip estimates further require
    /// `1/2 < sigma < 1`. `T` may be any real; negative heights serve the
    /// Schwarz-reflection checks.
    pub fn new(sigma: f64, t: f64, x: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&sigma) || !sigma.is_finite() {
            return Err(Error::InvalidStripPoint(format!("sigma = {sigma} outside [0, 2]")));
        }
        if !t.is_finite() {
            return Err(Error::InvalidStripPoint("T must be finite".into()));
        }
        if !x.is_finite() || x <= 1.0 {
            return Err(Error::InvalidStripPoint(format!("cutoff x = {x} must exceed 1")));
        }
        let rx = x.sqrt();
        Ok(StripPoint { sigma, t, x, big_x: rx + 1.0 / rx })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn big_x(&self) -> f64 {
        self.big_x
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    /// Heuristic error scales of the smoothed formula, implied constants
    /// set to one: `T^-2 x^{1-sigma}` and `T x^{1/2-sigma}`, with `|T|`
    /// clamped to 1 from below.
    pub fn heuristic_errors(&self) -> (f64, f64) {
        let t = self.t.abs().max(1.0);
        (self.x.powf(1.0 - self.sigma) / (t * t), t * self.x.powf(0.5 - self.sigma))
    }
}

/// One integer trace `t`: its unit `eps(t)`, the packet of discriminants
/// `D u^2 = t^2 - 4`, and the aggregated `L(1, t^2 - 4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceClass {
    pub t: i64,
    pub log_eps: f64,
    pub decomposition: Vec<(i64, i64)>,
    pub l1: f64,
}

/// A smoothed sum evaluation with its term count and heuristic error scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiResult {
    pub value: Complex64,
    pub n_traces: usize,
    pub err_pole: f64,
    pub err_line: f64,
}

/// `log eps(t) = log((t + sqrt(t^2 - 4))/2)` for an integer trace.
pub fn log_eps_t(t: i64) -> f64 {
    let tf = t as f64;
    ((tf + (tf * tf - 4.0).sqrt()) / 2.0).ln()
}

/// All trace classes with `3 <= t < X`. Each `t^2 - 4` is factored as
/// `(t-2)(t+2)` through one shared sieve of size `X + 2`; L-values come
/// from the cache after the first pass.
pub fn trace_classes(big_x: f64) -> Vec<TraceClass> {
    if big_x <= 3.0 {
        return Vec::new();
    }
    let t_end = big_x.ceil() as i64;
    let sieve = FactorSieve::new(t_end as u64 + 2);
    (3..t_end)
        .into_par_iter()
        .filter(|&t| (t as f64) < big_x)
        .map(|t| {
            let d = t * t - 4;
            let factors = factorize_trace_discriminant(&sieve, t);
            TraceClass {
                t,
                log_eps: log_eps_t(t),
                decomposition: square_divisor_splits_from(d, &factors),
                l1: l_value_total_with_factors(d, &factors),
            }
        })
        .collect()
}

/// The L-function side:
/// `psi_s(x) = 2 sum_{3<=t<X} L(1,t^2-4) (1 - eps(t)^2/x) eps(t)^{1-2s}`.
pub fn lfunction_side_psi(p: &StripPoint) -> PsiResult {
    let classes = trace_classes(p.big_x());
    let exponent = Complex64::new(1.0 - 2.0 * p.sigma(), -2.0 * p.t());
    let x = p.x();
    let terms: Vec<Complex64> = classes
        .par_iter()
        .map(|tc| {
            let weight = 1.0 - (2.0 * tc.log_eps).exp() / x;
            2.0 * tc.l1 * weight * (exponent * tc.log_eps).exp()
        })
        .collect();
    let (err_pole, err_line) = p.heuristic_errors();
    PsiResult { value: pairwise_sum_complex(&terms), n_traces: terms.len(), err_pole, err_line }
}

/// The geodesic side: the same sum arranged over discriminants,
/// `sum_{D, j >= 1, eps1(D)^j < sqrt(x)} 2 h(D) log eps1(D) / (1 - eps1^{-2j})
///  * (1 - eps1^{2j}/x) * eps1^{-2js}`,
/// with class numbers from `rho`-cycles and units from Pell automorphs.
/// `n_traces` counts the `(D, j)` pairs summed.
pub fn geodesic_side_psi(p: &StripPoint) -> Result<PsiResult> {
    if p.x() > GEODESIC_X_CAP {
        return Err(Error::CapExceeded(p.x()));
    }
    let x = p.x();
    let big_x = p.big_x();
    let s = p.s();
    let log_sqrt_x = 0.5 * x.ln();
    // eps1(D) > sqrt(D), so no discriminant at or beyond x can contribute;
    // the walk abort carries a margin and the j-loop below decides exact
    // membership through the integer trace of eps1^j.
    let d_end = x as i64 + 4;
    let per_d: Vec<Vec<Complex64>> = (5..d_end)
        .into_par_iter()
        .map(|d| -> Result<Vec<Complex64>> {
            if !is_valid_discriminant(d) {
                return Ok(Vec::new());
            }
            let pf = match pell4_fundamental_capped(d, log_sqrt_x + 0.75)? {
                Some(pf) => pf,
                None => return Ok(Vec::new()),
            };
            // trace of eps1^j by the Chebyshev recurrence; eps1^j < sqrt(x)
            // iff trace_j < X, the same comparison the t-side loop makes
            let mut terms = Vec::new();
            let mut h_log: Option<f64> = None;
            let mut tr_prev = BigUint::from(2u32);
            let mut tr = pf.t().clone();
            let mut j = 1u32;
            loop {
                match tr.to_f64() {
                    Some(v) if v < big_x => {}
                    _ => break,
                }
                let h_log = *h_log.get_or_insert_with(|| {
                    class_data(d).expect("validated discriminant").h_narrow as f64
                        * pf.log_eps1()
                });
                let le = pf.log_eps1() * j as f64;
                let weight = (1.0 - (2.0 * le).exp() / x) / (1.0 - (-2.0 * le).exp());
                terms.push(2.0 * h_log * weight * (Complex64::new(-2.0 * le, 0.0) * s).exp());
                let next = pf.t() * &tr - &tr_prev;
                tr_prev = tr;
                tr = next;
                j += 1;
            }
            Ok(terms)
        })
        .collect::<Result<Vec<_>>>()?;

    let terms: Vec<Complex64> = per_d.into_iter().flatten().collect();
    let (err_pole, err_line) = p.heuristic_errors();
    Ok(PsiResult { value: pairwise_sum_complex(&terms), n_traces: terms.len(), err_pole, err_line })
}

/// `Z'/Z(s)` for `Re s >= 1.05` by the trace Dirichlet series
/// `sum_t 2 sqrt(t^2-4) L(1,t^2-4) eps(t)^{-2s} / (1 - eps(t)^{-2})`,
/// cut off once a closed-form tail bound drops below `tail_tol`.
pub fn logderiv_dirichlet(s: Complex64, tail_tol: f64) -> Result<Complex64> {
    if s.re < 1.05 {
        return Err(Error::NonConvergent(s.re));
    }
    if !tail_tol.is_finite() || tail_tol <= 0.0 {
        return Err(Error::InvalidParameter("tail_tol must be positive".into()));
    }
    const T_CAP: i64 = 1 << 22;
    let mut hi = 64i64;
    while dirichlet_tail_bound(hi as f64, s.re) >= tail_tol {
        hi *= 2;
        if hi > T_CAP {
            return Err(Error::TailUnreachable(tail_tol));
        }
    }
    let mut lo = (hi / 2).max(4);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if dirichlet_tail_bound(mid as f64, s.re) < tail_tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_cut = hi;

    let sieve = FactorSieve::new(t_cut as u64 + 2);
    let terms: Vec<Complex64> = (3..=t_cut)
        .into_par_iter()
        .map(|t| {
            let d = t * t - 4;
            let factors = factorize_trace_discriminant(&sieve, t);
            let l1 = l_value_total_with_factors(d, &factors);
            assert!(
                l1 <= L_TOTAL_ENVELOPE,
                "L(1,{d}) = {l1} violates the envelope used by the tail bound"
            );
            let le = log_eps_t(t);
            let sq = (d as f64).sqrt();
            let decay = (Complex64::new(-2.0 * le, 0.0) * s).exp();
            2.0 * sq * l1 * decay / (1.0 - (-2.0 * le).exp())
        })
        .collect();
    Ok(pairwise_sum_complex(&terms))
}

/// Envelope for `L(1, t^2 - 4)` assumed by `dirichlet_tail_bound` and
/// asserted on every trace the series actually sums (observed maximum is
/// 4.74 over t <= 2*10^4; a violation aborts loudly instead of
/// under-summing the tail).
const L_TOTAL_ENVELOPE: f64 = 8.0;

/// Upper bound for the tail `sum_{t > m}` of the trace Dirichlet series at
/// real part `sigma`: with `eps(t) >= t - 1`, `1/(1 - eps^-2) <= 1.171`,
/// `t/(t-1) <= 3/2` and the enforced envelope, the tail is at most
/// `3.52 * ENV * (m-1)^{2-2sigma} / (2sigma - 2)`.
fn dirichlet_tail_bound(m: f64, sigma: f64) -> f64 {
    3.52 * L_TOTAL_ENVELOPE * (m - 1.0).powf(2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0)
}

/// The strip estimator of Prop-type smoothed formulas: `psi_s(x)` minus the
/// pole contribution `x^{1-s} / ((1-s)(2-s))`, with the two heuristic error
/// scales attached. Requires `1/2 < sigma` (up to 1.5 for overlap
/// comparisons against the sigma > 1 series) and `|T| >= 10`.
pub fn logderiv_strip_estimate(p: &StripPoint) -> Result<PsiResult> {
    if !(p.sigma() > 0.5 && p.sigma() < 1.5) {
        return Err(Error::InvalidStripPoint(format!(
            "strip estimate needs 1/2 < sigma < 1.5, got {}",
            p.sigma()
        )));
    }
    if p.t().abs() < 10.0 {
        return Err(Error::InvalidStripPoint(format!(
            "strip estimate needs |T| >= 10, got {}",
            p.t()
        )));
    }
    let psi = lfunction_side_psi(p);
    let s = p.s();
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let pole = ((one - s) * p.x().ln()).exp() / ((one - s) * (two - s));
    Ok(PsiResult { value: psi.value - pole, ..psi })
}

/// Smoothed prime-geodesic-theorem check: `psi_0(x) * 2 / x`, which the
/// residue `x/2` of the smoothed formula at `s = 0` drives to 1.
pub fn pgt_smoothed_check(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 1e4 {
        return Err(Error::InvalidParameter(format!("pgt check needs x >= 1e4, got {x}")));
    }
    let p = StripPoint::new(0.0, 0.0, x)?;
    let psi = lfunction_side_psi(&p);
    debug_assert!(psi.value.im.abs() < 1e-9 * psi.value.re.abs());
    Ok(psi.value.re * 2.0 / x)
}
