//! Minimal solutions of `t^2 - D u^2 = 4` and high-precision `log eps1(D)`.
//!
//! The fundamental solution is read off the automorph obtained by composing
//! the integral transition matrices of one full `rho`-cycle of the principal
//! form. That reuses the exact reduction theory of `quadforms` and is
//! convention-free with respect to the two published normalizations of the
//! `= 4` Pell equation. Fundamental solutions grow exponentially in
//! `sqrt(D)`, so `t` and `u` are unbounded integers.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::is_valid_discriminant;
use crate::quadforms::{reduce, rho, QuadForm};
use crate::{Error, Result};

/// Minimal positive solution of `t^2 - D u^2 = 4` plus the regulator
/// `log eps1(D) = log((t + u sqrt(D))/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PellFundamental {
    discriminant: i64,
    t: BigUint,
    u: BigUint,
    log_eps1: f64,
}

impl PellFundamental {
    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn t(&self) -> &BigUint {
        &self.t
    }

    pub fn u(&self) -> &BigUint {
        &self.u
    }

    pub fn log_eps1(&self) -> f64 {
        self.log_eps1
    }
}

/// `log eps1` recomputed from the stored `t`; equals the cached field.
pub fn log_eps1(pf: &PellFundamental) -> f64 {
    log_eps_from_t(pf.t())
}

/// Natural log of an arbitrary-size positive integer via mantissa and
/// exponent extraction.
pub(crate) fn big_ln(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().expect("53-bit mantissa");
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// `log((t + sqrt(t^2 - 4))/2)` from an unbounded integer `t >= 3`,
/// relative error below 1e-12 across all magnitudes.
pub(crate) fn log_eps_from_t(t: &BigUint) -> f64 {
    let bits = t.bits();
    if bits <= 26 {
        // t^2 exact in f64
        let tf = t.to_f64().unwrap();
        return ((tf + (tf * tf - 4.0).sqrt()) / 2.0).ln();
    }
    let l = big_ln(t);
    // eps = t (1 + sqrt(1 - 4/t^2)) / 2; the correction is -1/t^2 + O(t^-4)
    l - (-2.0 * l).exp()
}

/// Fundamental solution by one full cycle walk. `None` only when
/// `log_cap` is given and the partial regulator sum certifies
/// `log eps1(D) > log_cap` before the cycle closes.
fn cycle_automorph(d: i64, log_cap: Option<f64>) -> Result<Option<PellFundamental>> {
    let start = reduce(&QuadForm::principal(d)?);
    let sqrt_d = (d as f64).sqrt();

    // composed transition matrix, entries (p q; r s)
    let mut p = BigInt::from(1);
    let mut q = BigInt::ZERO;
    let mut r = BigInt::ZERO;
    let mut s = BigInt::from(1);
    let mut reg_lower = 0.0f64;
    let mut g = start;
    loop {
        let gn = rho(&g);
        // g -> gn is the substitution (x, y) -> (-y, x + m y)
        let m = (g.b() + gn.b()) / (2 * g.c());
        let mb = BigInt::from(m);
        let (np, nq) = (q.clone(), -&p + &q * &mb);
        let (nr, ns) = (s.clone(), -&r + &s * &mb);
        (p, q, r, s) = (np, nq, nr, ns);

        // each reduced form contributes the factor (b + sqrt(D)) / (2|c|) > 1
        // to eps1, so partial sums bound the regulator from below
        reg_lower += ((g.b() as f64 + sqrt_d) / (2.0 * g.c().abs() as f64)).ln();
        if let Some(cap) = log_cap {
            if reg_lower > cap {
                return Ok(None);
            }
        }

        g = gn;
        if g == start {
            break;
        }
    }

    let mut trace = &p + &s;
    let mut au = r;
    if trace.is_negative() {
        trace = -trace;
        au = -au;
    }
    let a = BigInt::from(start.a());
    debug_assert!((&au % &a).is_zero(), "automorph off-diagonal not divisible by a");
    let u = (au / a).abs();
    let t = trace.magnitude().clone();
    let u = u.magnitude().clone();
    debug_assert_eq!(
        BigInt::from(t.clone() * t.clone()) - d * BigInt::from(u.clone() * u.clone()),
        BigInt::from(4),
        "automorph does not solve the Pell equation for D={d}"
    );
    let log_eps1 = log_eps_from_t(&t);
    Ok(Some(PellFundamental { discriminant: d, t, u, log_eps1 }))
}

/// Minimal `(t, u)` with `t^2 - D u^2 = 4` for a valid discriminant.
pub fn pell4_fundamental(d: i64) -> Result<PellFundamental> {
    if !is_valid_discriminant(d) {
        return Err(Error::InvalidDiscriminant(d));
    }
    Ok(cycle_automorph(d, None)?.expect("no cap given"))
}

/// Like `pell4_fundamental`, but abandons the walk as soon as the partial
/// regulator certifies `log eps1(D) > log_cap`. Used by geodesic-side
/// enumerations where almost every discriminant has a unit far above the
/// cutoff.
pub fn pell4_fundamental_capped(d: i64, log_cap: f64) -> Result<Option<PellFundamental>> {
    if !is_valid_discriminant(d) {
        return Err(Error::InvalidDiscriminant(d));
    }
    cycle_automorph(d, Some(log_cap))
}

/// Verification oracle, independent of the cycle walk: the first `u <= u_cap`
/// with `D u^2 + 4` a perfect square, found by exhaustive iteration.
/// Requires `D * u_cap^2 + 4` to fit in a u64.
pub fn brute_force_pell(d: i64, u_cap: u64) -> Option<(u64, u64)> {
    debug_assert!(d > 0 && (d as u128) * (u_cap as u128) * (u_cap as u128) + 4 <= u64::MAX as u128);
    for u in 1..=u_cap {
        let v = (d as u64) * u * u + 4;
        let r = v.isqrt();
        if r * r == v {
            return Some((r, u));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf(d: i64) -> PellFundamental {
        pell4_fundamental(d).unwrap()
    }

    #[test]
    fn spec_spot_values() {
        let p = pf(5);
        assert_eq!((p.t().to_u32().unwrap(), p.u().to_u32().unwrap()), (3, 1));
        let p = pf(8);
        assert_eq!((p.t().to_u32().unwrap(), p.u().to_u32().unwrap()), (6, 2));
        let p = pf(61);
        assert_eq!((p.t().to_u32().unwrap(), p.u().to_u32().unwrap()), (1523, 195));
        let p = pf(12);
        assert_eq!((p.t().to_u32().unwrap(), p.u().to_u32().unwrap()), (4, 1));
        let p = pf(13);
        assert_eq!((p.t().to_u32().unwrap(), p.u().to_u32().unwrap()), (11, 3));
        let p = pf(17);
        assert_eq!((p.t().to_u32().unwrap(), p.u().to_u32().unwrap()), (66, 16));
    }

    #[test]
    fn log_eps1_spot_values() {
        assert!((pf(5).log_eps1() - 0.9624236501192069).abs() < 1e-12);
        assert!((pf(8).log_eps1() - 1.7627471740390861).abs() < 1e-12);
        assert!((pf(61).log_eps1() - 7.3284369217728751).abs() < 1e-11);
    }

    #[test]
    fn rejects_invalid_discriminants() {
        for d in [-4i64, 0, 7, 9, 16, 25] {
            assert!(pell4_fundamental(d).is_err(), "d={d}");
        }
    }

    #[test]
    fn unit_identity_eps_plus_inverse_is_t() {
        for d in 5..300i64 {
            if is_valid_discriminant(d) {
                let p = pf(d);
                if let Some(t) = p.t().to_f64() {
                    let l = p.log_eps1();
                    let recon = l.exp() + (-l).exp();
                    assert!((recon - t).abs() <= 1e-10 * t, "d={d}");
                }
            }
        }
    }

    #[test]
    fn capped_walk_agrees_with_full_walk() {
        for d in 5..200i64 {
            if !is_valid_discriminant(d) {
                continue;
            }
            let full = pf(d);
            match pell4_fundamental_capped(d, 3.0).unwrap() {
                Some(p) => assert_eq!(p, full),
                None => assert!(full.log_eps1() > 3.0, "d={d} wrongly aborted"),
            }
        }
    }

    #[test]
    fn big_ln_matches_f64_ln() {
        let n = BigUint::from(123456789u64);
        assert!((big_ln(&n) - (123456789f64).ln()).abs() < 1e-12);
        let big = BigUint::from(7u32).pow(200);
        let expect = 200.0 * (7f64).ln();
        assert!((big_ln(&big) - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn log_eps_large_t_stable() {
        // t = 10^40: log eps = ln t - 1/t^2 up to O(t^-4)
        let t = BigUint::from(10u32).pow(40);
        let expect = 40.0 * std::f64::consts::LN_10;
        assert!((log_eps_from_t(&t) - expect).abs() < 1e-10);
    }

    #[test]
    fn brute_force_minimality_small_range() {
        for d in 5..500i64 {
            if !is_valid_discriminant(d) {
                continue;
            }
            let p = pf(d);
            if let Some(u) = p.u().to_u64() {
                if u <= 200_000 {
                    let (bt, bu) = brute_force_pell(d, u).expect("oracle must find the unit");
                    assert_eq!(bu, u, "d={d}");
                    assert_eq!(BigUint::from(bt), *p.t(), "d={d}");
                }
            }
        }
    }
}
