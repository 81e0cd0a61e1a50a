//! Real-character Dirichlet L-values at `z = 1` and the divisor-structured
//! `L(1, D)` entering the trace sum, together with the Dirichlet
//! coefficients `lambda_q(D)` and their Kloosterman-sum expression.
//!
//! `L(1, chi_d)` for fundamental `d` has three routes:
//!
//! 1. the production path: a Gaussian-smoothed dual sum from the even
//!    functional equation, `O(sqrt(d))` terms of `erfc` and `E_1`;
//! 2. the finite log-sin formula, `O(d)` terms, exact up to rounding;
//! 3. the raw Dirichlet series with period-averaged partial sums.
//!
//! Their three-way agreement is a verification suite; nothing in the crate
//! assumes it.

use std::f64::consts::PI;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use dashmap::DashMap;

use crate::arith::{
    factorize_i64, fundamental_decomposition_from, is_fundamental, is_valid_discriminant,
    kloosterman, kronecker, square_divisor_splits, square_divisor_splits_from,
};
use crate::sum::Kahan;
use crate::{Error, Result};

/// One `(d, l)` part of `L(1, D) = sum_{d l^2 = D} l^{-1} L(1, (d/.))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LPart {
    pub d: i64,
    pub l: i64,
    pub d0: i64,
    pub f: i64,
    pub value: f64,
}

/// The full decomposition of `L(1, D)` over square divisors.
#[derive(Debug, Clone, PartialEq)]
pub struct LDecomposition {
    pub discriminant: i64,
    pub parts: Vec<LPart>,
    pub total: f64,
}

/// `L(1, chi_d)` for a fundamental discriminant `d > 1`, by the smoothed
/// dual sum. Absolute error well below 1e-10.
pub fn l1_fundamental(d: i64) -> Result<f64> {
    if d <= 1 || !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    Ok(dual_sum(d))
}

/// Dual-sum evaluation for a fundamental discriminant: from the split theta
/// integral, `L(1,chi) = sum_n chi(n) [erfc(n sqrt(pi/d))/n + E1(pi n^2/d)/sqrt(d)]`.
/// Both terms decay like `exp(-pi n^2 / d)`.
fn dual_sum(d: i64) -> f64 {
    let df = d as f64;
    let sq = df.sqrt();
    let rt = (PI / df).sqrt();
    let n_max = (3.2 * sq).ceil() as i64 + 1;
    let mut acc = Kahan::new();
    for n in 1..=n_max {
        let chi = kronecker(d, n);
        if chi != 0 {
            let nf = n as f64;
            let term = special::erfc(nf * rt) / nf + special::exp_integral_e1(PI * nf * nf / df) / sq;
            acc.add(chi as f64 * term);
        }
    }
    acc.value()
}

/// Secondary route: `L(1,chi_d) = -d^{-1/2} sum_{a=1}^{d-1} (d/a) log sin(pi a / d)`.
pub fn l1_fundamental_logsin(d: i64) -> Result<f64> {
    if d <= 1 || !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    let df = d as f64;
    let mut acc = Kahan::new();
    for a in 1..d {
        let chi = kronecker(d, a);
        if chi != 0 {
            acc.add(chi as f64 * (PI * a as f64 / df).sin().ln());
        }
    }
    Ok(-acc.value() / df.sqrt())
}

/// Tertiary route: raw Dirichlet series with the partial sums averaged over
/// one full character period at the far end.
pub fn l1_fundamental_series(d: i64, n_terms: u64) -> Result<f64> {
    if d <= 1 || !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    if n_terms < 2 * d as u64 {
        return Err(Error::InvalidParameter(format!(
            "series needs at least {} terms for d = {d}",
            2 * d
        )));
    }
    let period = d as u64;
    let chi: Vec<i8> = (0..period).map(|a| kronecker(d, a as i64) as i8).collect();
    let mut partial = 0.0f64;
    let mut window = 0.0f64;
    let window_start = n_terms - period;
    let mut residue = 1usize;
    for n in 1..=n_terms {
        let c = chi[residue];
        if c != 0 {
            partial += c as f64 / n as f64;
        }
        residue += 1;
        if residue == period as usize {
            residue = 0;
        }
        if n > window_start {
            window += partial;
        }
    }
    Ok(window / period as f64)
}

/// `L(1, chi_D0) * prod_{p | f} (1 - (D0/p)/p)` from a prime factorization
/// of `d = D0 f^2`.
fn l1_from_factors(factors: &[(i64, u32)]) -> f64 {
    let (d0, f) = fundamental_decomposition_from(factors);
    let mut v = dual_sum(d0);
    for &(p, _) in factors {
        if f % p == 0 {
            v *= 1.0 - kronecker(d0, p) as f64 / p as f64;
        }
    }
    v
}

/// `L(1, (d/.))` for any valid discriminant: with `d = D0 f^2`, the value is
/// `L(1, chi_D0) * prod_{p | f} (1 - (D0/p)/p)`.
pub fn l1_general(d: i64) -> Result<f64> {
    if !is_valid_discriminant(d) {
        return Err(Error::InvalidDiscriminant(d));
    }
    Ok(l1_from_factors(&factorize_i64(d)))
}

/// Totals are quantized to 15 significant digits so that cached and freshly
/// computed values are bit-identical (the cache file stores 15 digits).
fn quantize(v: f64) -> f64 {
    format!("{v:.14e}").parse().expect("round-trip")
}

/// Decomposition from a prime factorization of `big_d`; every part's
/// factorization is read off the parent's exponents.
fn l_decomposition_from(big_d: i64, factors: &[(i64, u32)]) -> LDecomposition {
    let splits = square_divisor_splits_from(big_d, factors);
    let mut parts = Vec::with_capacity(splits.len());
    let mut total = Kahan::new();
    for (d, l) in splits {
        let part_factors: Vec<(i64, u32)> = factors
            .iter()
            .map(|&(p, e)| {
                let mut lv = l;
                let mut drop = 0u32;
                while lv % p == 0 {
                    lv /= p;
                    drop += 2;
                }
                (p, e - drop)
            })
            .filter(|&(_, e)| e > 0)
            .collect();
        let (d0, f) = fundamental_decomposition_from(&part_factors);
        let value = l1_from_factors(&part_factors);
        total.add(value / l as f64);
        parts.push(LPart { d, l, d0, f, value });
    }
    let total = quantize(total.value());
    cache().map.insert(big_d, total);
    LDecomposition { discriminant: big_d, parts, total }
}

/// Full square-divisor decomposition of `L(1, D)` with per-part values.
pub fn l_value_d(big_d: i64) -> Result<LDecomposition> {
    if big_d <= 0 || big_d.rem_euclid(4) > 1 {
        return Err(Error::InvalidDiscriminant(big_d));
    }
    Ok(l_decomposition_from(big_d, &factorize_i64(big_d)))
}

/// Cached total `L(1, D)`; computes and stores on miss.
pub fn l_value_total(big_d: i64) -> Result<f64> {
    if let Some(v) = cache().map.get(&big_d) {
        return Ok(*v);
    }
    Ok(l_value_d(big_d)?.total)
}

/// Cached total `L(1, D)` for a caller that already factorized `D`
/// (the trace path assembles `t^2 - 4 = (t-2)(t+2)` from the sieve).
pub fn l_value_total_with_factors(big_d: i64, factors: &[(i64, u32)]) -> f64 {
    if let Some(v) = cache().map.get(&big_d) {
        return *v;
    }
    l_decomposition_from(big_d, factors).total
}

/// `lambda_q(D) = sum_{d l^2 = D, l^2 | q} l * (d / (q / l^2))`; the
/// Dirichlet coefficients of `L(z, D)`. Integer-valued.
pub fn lambda_q(q: u64, big_d: i64) -> Result<i64> {
    if q == 0 {
        return Err(Error::InvalidParameter("lambda_q needs q >= 1".into()));
    }
    let mut acc = 0i64;
    for (d, l) in square_divisor_splits(big_d)? {
        let l2 = (l * l) as u64;
        if q % l2 == 0 {
            acc += l * kronecker(d, (q / l2) as i64) as i64;
        }
    }
    Ok(acc)
}

/// The Kloosterman-sum expression
/// `sum_{q1^2 q2 = q} q2^{-1} sum_{k mod q2} S(k^2, 1; q2) e(k t / q2)`,
/// which reproduces `lambda_q(t^2 - 4)`. The imaginary part must vanish to
/// 1e-9; the equality itself is an acceptance test, not an assumption.
pub fn lambda_q_kloosterman(q: u64, t: i64) -> Result<f64> {
    if q == 0 || t < 3 {
        return Err(Error::InvalidParameter(format!(
            "lambda_q_kloosterman needs q >= 1, t >= 3 (got q={q}, t={t})"
        )));
    }
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    let mut q1 = 1u64;
    while q1 * q1 <= q {
        if q % (q1 * q1) == 0 {
            let q2 = q / (q1 * q1);
            let mut inner_re = 0.0f64;
            let mut inner_im = 0.0f64;
            for k in 0..q2 {
                let s = kloosterman(((k * k) % q2) as i64, 1, q2).value;
                let frac = ((k as i128 * t as i128).rem_euclid(q2 as i128)) as f64 / q2 as f64;
                let phase = std::f64::consts::TAU * frac;
                inner_re += s * phase.cos();
                inner_im += s * phase.sin();
            }
            re += inner_re / q2 as f64;
            im += inner_im / q2 as f64;
        }
        q1 += 1;
    }
    if im.abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "Kloosterman expression for q={q}, t={t} has imaginary part {im:e}"
        )));
    }
    Ok(re)
}

/// Process-wide concurrent cache of `L(1, D)` totals, keyed by `D`.
/// All writers compute identical (quantized) values, so last-writer-wins
/// is safe.
pub struct LValueCache {
    map: DashMap<i64, f64>,
}

pub fn cache() -> &'static LValueCache {
    static CACHE: OnceLock<LValueCache> = OnceLock::new();
    CACHE.get_or_init(|| LValueCache { map: DashMap::new() })
}

impl LValueCache {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Loads `D,L1_total` rows written by `save_csv`. Returns rows read.
    pub fn load_csv(&self, path: &Path) -> std::io::Result<usize> {
        let file = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(file).lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "version,1" => {}
            _ => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    "L-cache file missing 'version,1' header",
                ))
            }
        }
        let mut read = 0usize;
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (d, v) = line.split_once(',').ok_or_else(|| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, "malformed L-cache row")
            })?;
            let d: i64 = d.parse().map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad D: {e}"))
            })?;
            let v: f64 = v.parse().map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad value: {e}"))
            })?;
            self.map.insert(d, v);
            read += 1;
        }
        Ok(read)
    }

    /// Atomically rewrites the cache file: rows sorted by `D`, values with
    /// 15 significant digits, temp file renamed into place.
    pub fn save_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut rows: Vec<(i64, f64)> = self.map.iter().map(|e| (*e.key(), *e.value())).collect();
        rows.sort_unstable_by_key(|r| r.0);
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        {
            let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
            writeln!(w, "version,1")?;
            for (d, v) in rows {
                writeln!(w, "{d},{v:.14e}")?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, path)
    }
}

/// Special functions backing the dual sum: complementary error function and
/// the exponential integral `E_1`. Small self-contained implementations,
/// pinned against high-precision reference values in the tests.
pub mod special {
    /// Relative accuracy around 1e-15 over the range used here.
    pub fn erfc(x: f64) -> f64 {
        if x < 0.0 {
            return 2.0 - erfc(-x);
        }
        if x < 2.5 {
            1.0 - erf_series(x)
        } else {
            erfc_cf(x)
        }
    }

    /// Maclaurin series of erf, adequate for 0 <= x < 2.5.
    fn erf_series(x: f64) -> f64 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0u32;
        loop {
            k += 1;
            term *= -x2 / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200 {
                break;
            }
        }
        sum * std::f64::consts::FRAC_2_SQRT_PI
    }

    /// Continued fraction
    /// `erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`
    /// for x >= 2.5, evaluated with modified Lentz.
    fn erfc_cf(x: f64) -> f64 {
        let tiny = 1e-300;
        let mut f = x;
        let mut c = f;
        let mut d = 0.0f64;
        let mut j = 0u32;
        loop {
            j += 1;
            let a = j as f64 / 2.0;
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 || j > 300 {
                break;
            }
        }
        (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
    }

    /// Exponential integral `E_1(x)` for `x > 0`.
    pub fn exp_integral_e1(x: f64) -> f64 {
        assert!(x > 0.0, "E1 needs a positive argument");
        if x <= 1.0 {
            // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
            const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
            let mut term = 1.0f64;
            let mut sum = 0.0f64;
            for k in 1..=60 {
                term *= -x / k as f64;
                let add = -term / k as f64;
                sum += add;
                if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                    break;
                }
            }
            -EULER_GAMMA - x.ln() + sum
        } else {
            // E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(x + 7 - ...))))
            let tiny = 1e-300;
            let mut b = x + 1.0;
            let mut c = 1.0 / tiny;
            let mut d = 1.0 / b;
            let mut h = d;
            for i in 1..=200u32 {
                let a = -((i * i) as f64);
                b += 2.0;
                d = 1.0 / (a * d + b);
                c = b + a / c;
                let delta = c * d;
                h *= delta;
                if (delta - 1.0).abs() < 1e-16 {
                    break;
                }
            }
            h * (-x).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_erfc_reference_values() {
        // reference: 30-digit evaluations of erfc
        let cases = [
            (0.5, 0.479500122186953462317253346108),
            (1.0, 0.157299207050285130658779364917),
            (2.5, 4.06952017444958939564215739975e-4),
            (3.0, 2.20904969985854413727761295823e-5),
            (6.0, 2.15197367124989131165933503992e-17),
        ];
        for (x, want) in cases {
            let got = special::erfc(x);
            assert!(
                (got - want).abs() <= 1e-14 * want.abs().max(1e-16),
                "erfc({x}) = {got:e}, want {want:e}"
            );
        }
        assert!((special::erfc(-1.0) - (2.0 - 0.157299207050285130658779364917)).abs() < 1e-14);
    }

    #[test]
    fn special_e1_reference_values() {
        let cases = [
            (0.1, 1.82292395841939066608091365829),
            (0.5, 0.559773594776160811746795939315),
            (1.0, 0.21938393439552027367716377546),
            (2.0, 0.0489005107080611195672398352281),
            (5.0, 0.00114829559127532579733056196982),
            (10.0, 4.15696892968532427740285981028e-6),
            (30.0, 3.02155201068881254481582504515e-15),
        ];
        for (x, want) in cases {
            let got = special::exp_integral_e1(x);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs(),
                "E1({x}) = {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn l1_fundamental_spec_values() {
        assert!((l1_fundamental(5).unwrap() - 0.430408940964004039).abs() < 1e-12);
        assert!((l1_fundamental(8).unwrap() - 0.623225240140230513).abs() < 1e-12);
        assert!((l1_fundamental(12).unwrap() - 0.760345996300946348).abs() < 1e-12);
        assert!(l1_fundamental(45).is_err());
        assert!(l1_fundamental(1).is_err());
        assert!(l1_fundamental(-5).is_err());
    }

    #[test]
    fn l1_general_spec_values() {
        let l5 = l1_fundamental(5).unwrap();
        assert!((l1_general(45).unwrap() - l5 * (1.0 + 1.0 / 3.0)).abs() < 1e-12);
        assert!((l1_general(20).unwrap() - l5 * 1.5).abs() < 1e-12);
        for d in [5i64, 8, 12, 13, 17] {
            assert!((l1_general(d).unwrap() - l1_fundamental(d).unwrap()).abs() < 1e-15);
        }
        assert!(l1_general(16).is_err());
    }

    #[test]
    fn l_value_d_spec_values() {
        let l5 = l1_fundamental(5).unwrap();
        let d5 = l_value_d(5).unwrap();
        assert_eq!(d5.parts.len(), 1);
        assert!((d5.total - l5).abs() < 1e-12);

        let d12 = l_value_d(12).unwrap();
        assert_eq!(d12.parts.len(), 1);
        assert!((d12.total - 0.760345996300946348).abs() < 1e-12);

        let d45 = l_value_d(45).unwrap();
        assert_eq!(d45.parts.len(), 2);
        assert!((d45.total - 0.717348234940006731).abs() < 1e-12);
        assert_eq!(d45.parts[1].d0, 5);
        assert_eq!(d45.parts[1].l, 3);
    }

    #[test]
    fn l_value_total_uses_cache() {
        let a = l_value_total(76).unwrap();
        let b = l_value_total(76).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, l_value_d(76).unwrap().total);
    }

    #[test]
    fn lambda_q_spec_values() {
        for d in [5i64, 12, 21, 32, 45] {
            assert_eq!(lambda_q(1, d).unwrap(), 1);
        }
        assert_eq!(lambda_q(2, 21).unwrap(), -1); // t = 5 odd
        assert_eq!(lambda_q(2, 12).unwrap(), 0); // t = 4 even
        assert_eq!(lambda_q(4, 32).unwrap(), 2);
        assert!(lambda_q(0, 5).is_err());
    }

    #[test]
    fn lambda_q_kloosterman_spec_values() {
        assert!((lambda_q_kloosterman(1, 3).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambda_q_kloosterman(2, 5).unwrap() + 1.0).abs() < 1e-12);
        assert!((lambda_q_kloosterman(2, 4).unwrap() - 0.0).abs() < 1e-12);
        assert!((lambda_q_kloosterman(4, 6).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn three_routes_agree_small() {
        for d in [5i64, 8, 12, 13, 17, 21, 24, 28, 29, 33] {
            let a = l1_fundamental(d).unwrap();
            let b = l1_fundamental_logsin(d).unwrap();
            assert!((a - b).abs() < 1e-11, "d={d}: dual {a} logsin {b}");
        }
        let a = l1_fundamental(5).unwrap();
        let c = l1_fundamental_series(5, 2_000_000).unwrap();
        assert!((a - c).abs() < 1e-7);
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("selzeta-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("lcache.csv");
        l_value_d(5).unwrap();
        l_value_d(45).unwrap();
        cache().save_csv(&path).unwrap();
        let fresh = LValueCache { map: DashMap::new() };
        let n = fresh.load_csv(&path).unwrap();
        assert!(n >= 2);
        assert_eq!(*fresh.map.get(&45).unwrap(), l_value_total(45).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }
}
