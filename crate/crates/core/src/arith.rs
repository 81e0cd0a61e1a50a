//! Exact integer substrate: smallest-prime-factor sieve, Kronecker symbol,
//! square-divisor machinery and Kloosterman sums.

use crate::{Error, Result};

/// Smallest-prime-factor table for `2..=limit`.
///
/// Built once, then immutable; all queries are pure reads.
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        assert!(limit <= u32::MAX as u64, "sieve limit too large");
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        FactorSieve { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        assert!(n >= 2 && n <= self.limit, "sieve query out of range");
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.smallest_prime_factor(n) == n
    }

    /// Prime factorization of `n <= limit` as `(p, exponent)` pairs, p ascending.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1 && n <= self.limit, "sieve query out of range");
        let mut out = Vec::new();
        while n > 1 {
            let p = self.smallest_prime_factor(n);
            let mut e = 0u32;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}

/// Kronecker symbol `(d/n)`, defined for all integer pairs by the standard
/// extension of the Jacobi symbol. Iterative reciprocity, no factorization.
pub fn kronecker(d: i64, n: i64) -> i32 {
    let mut a = d;
    let mut n = n;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    // strip factors of 2 from n; (a/2) depends on a mod 8
    let mut v = 0u32;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    let mut k: i32 = if v % 2 == 0 {
        1
    } else {
        match a.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1, // a is odd here, so 3 or 5
        }
    };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // n odd positive: Jacobi loop with reciprocity
    a = a.rem_euclid(n);
    while a != 0 {
        let mut v = 0u32;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 && matches!(n % 8, 3 | 5) {
            k = -k;
        }
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        let t = a;
        a = n % t;
        n = t;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// True iff `d` is a discriminant this crate works with:
/// `d > 0`, `d = 0,1 (mod 4)`, not a perfect square.
pub fn is_valid_discriminant(d: i64) -> bool {
    d > 0 && d.rem_euclid(4) <= 1 && !is_square(d)
}

pub fn is_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as u64).isqrt();
    r * r == n as u64
}

/// Prime factorization of `n >= 1` by trial division, `(p, exponent)`
/// pairs with p ascending.
pub fn factorize_i64(n: i64) -> Vec<(i64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut n = n;
    let mut p = 2i64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0u32;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Factorization of the trace discriminant `t^2 - 4` assembled from the
/// separate sieve factorizations of `t - 2` and `t + 2`, so the sieve only
/// needs to reach `t + 2`, never `t^2`.
pub fn factorize_trace_discriminant(sieve: &FactorSieve, t: i64) -> Vec<(i64, u32)> {
    assert!(t >= 3 && (t as u64) + 2 <= sieve.limit());
    if t == 3 {
        return vec![(5, 1)];
    }
    let a = sieve.factorize((t - 2) as u64);
    let b = sieve.factorize((t + 2) as u64);
    let mut out: Vec<(i64, u32)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push((a[i].0 as i64, a[i].1));
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0 as i64, b[j].1));
            j += 1;
        } else {
            out.push((a[i].0 as i64, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

/// All pairs `(d, l)` with `d * l^2 = big_d` and `d = 0,1 (mod 4)` derived
/// from a prime factorization of `big_d`; ordered by `l` ascending.
pub fn square_divisor_splits_from(big_d: i64, factors: &[(i64, u32)]) -> Vec<(i64, i64)> {
    debug_assert_eq!(big_d, factors.iter().map(|&(p, e)| p.pow(e)).product::<i64>());
    let mut ls = vec![1i64];
    for &(p, e) in factors {
        let reps = e / 2;
        if reps == 0 {
            continue;
        }
        let base_len = ls.len();
        let mut pk = 1i64;
        for _ in 0..reps {
            pk *= p;
            for i in 0..base_len {
                ls.push(ls[i] * pk);
            }
        }
    }
    ls.sort_unstable();
    ls.into_iter()
        .filter_map(|l| {
            let d = big_d / (l * l);
            (d.rem_euclid(4) <= 1).then_some((d, l))
        })
        .collect()
}

/// All pairs `(d, l)` with `d * l^2 = big_d` and `d = 0,1 (mod 4)`,
/// ordered by `l` ascending. `(big_d, 1)` is always present.
pub fn square_divisor_splits(big_d: i64) -> Result<Vec<(i64, i64)>> {
    if big_d <= 0 || big_d.rem_euclid(4) > 1 {
        return Err(Error::InvalidDiscriminant(big_d));
    }
    Ok(square_divisor_splits_from(big_d, &factorize_i64(big_d)))
}

/// `D = D0 * f^2` with `D0` fundamental, from a prime factorization.
pub fn fundamental_decomposition_from(factors: &[(i64, u32)]) -> (i64, i64) {
    let mut kernel = 1i64;
    let mut f = 1i64;
    for &(p, e) in factors {
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            kernel *= p;
        }
    }
    if kernel % 4 == 1 {
        (kernel, f)
    } else {
        // kernel = 2,3 (mod 4): D = 0 (mod 4) forces f even
        debug_assert!(f % 2 == 0);
        (4 * kernel, f / 2)
    }
}

/// Decomposes a valid discriminant as `D = D0 * f^2` with `D0` fundamental.
pub fn fundamental_decomposition(d: i64) -> Result<(i64, i64)> {
    if !is_valid_discriminant(d) {
        return Err(Error::InvalidDiscriminant(d));
    }
    Ok(fundamental_decomposition_from(&factorize_i64(d)))
}

/// True iff `d > 1` is a fundamental discriminant.
pub fn is_fundamental(d: i64) -> bool {
    if d <= 1 {
        return false;
    }
    match fundamental_decomposition(d) {
        Ok((d0, f)) => d0 == d && f == 1,
        Err(_) => false,
    }
}

/// Number of divisors of `n`, by trial division.
pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1);
    let mut n = n;
    let mut tau = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0u64;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            tau *= e + 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        tau *= 2;
    }
    tau
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    gcd_u64(gcd_u64(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs()) as i64
}

/// Modular inverse of `a` mod `c` for `gcd(a, c) = 1`, `c >= 2`.
fn mod_inverse(a: u64, c: u64) -> u64 {
    let (mut r0, mut r1) = (c as i128, (a % c) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "mod_inverse of a non-unit");
    s0.rem_euclid(c as i128) as u64
}

/// A Kloosterman sum `S(n, m; c)` together with its arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KloostermanValue {
    pub n: i64,
    pub m: i64,
    pub c: u64,
    pub value: f64,
}

/// `S(n, m; c) = sum_{ab = 1 mod c} e((am + bn)/c)` by direct enumeration
/// over units mod `c`. The sum is real; the imaginary part of the internal
/// accumulator must vanish to 1e-10 absolute.
pub fn kloosterman(n: i64, m: i64, c: u64) -> KloostermanValue {
    assert!(c >= 1);
    if c == 1 {
        return KloostermanValue { n, m, c, value: 1.0 };
    }
    let ci = c as i128;
    let nr = (n as i128).rem_euclid(ci);
    let mr = (m as i128).rem_euclid(ci);
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    for a in 1..c {
        if gcd_u64(a, c) != 1 {
            continue;
        }
        let b = mod_inverse(a, c) as i128;
        let num = ((a as i128) * mr + b * nr).rem_euclid(ci);
        let phase = std::f64::consts::TAU * (num as f64) / (c as f64);
        re += phase.cos();
        im += phase.sin();
    }
    assert!(
        im.abs() <= 1e-10,
        "Kloosterman sum S({n},{m};{c}) has imaginary part {im:e}"
    );
    KloostermanValue { n, m, c, value: re }
}
