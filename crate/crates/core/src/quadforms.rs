//! Reduction theory of primitive indefinite binary quadratic forms.
//!
//! Narrow class numbers are counted as `rho`-cycles of reduced forms, and
//! the hyperbolic matrix attached to a form and a Pell solution realizes
//! the bijection between form classes and primitive conjugacy classes.
//! All control flow uses exact integer comparisons; square roots of the
//! discriminant only ever appear through `isqrt`.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::arith::{gcd3, is_valid_discriminant};
use crate::pell::PellFundamental;
use crate::{Error, Result};

/// Primitive indefinite integral form `a x^2 + b xy + c y^2` with
/// `D = b^2 - 4ac > 0` nonsquare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadForm {
    a: i64,
    b: i64,
    c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        if a == 0 || c == 0 || gcd3(a, b, c) != 1 {
            return Err(Error::InvalidForm(a, b, c));
        }
        let d = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
        if d <= 0 || d >= (1i128 << 62) {
            return Err(Error::InvalidForm(a, b, c));
        }
        if !is_valid_discriminant(d as i64) {
            return Err(Error::InvalidForm(a, b, c));
        }
        Ok(QuadForm { a, b, c })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn coefficients(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The mirror form `[a, -b, c]` (the inverse class).
    pub fn opposite(&self) -> QuadForm {
        QuadForm { a: self.a, b: -self.b, c: self.c }
    }

    /// Principal form `[1, b0, (b0^2 - D)/4]` with `b0 = D mod 2`.
    pub fn principal(d: i64) -> Result<Self> {
        if !is_valid_discriminant(d) {
            return Err(Error::InvalidDiscriminant(d));
        }
        let b0 = d.rem_euclid(2);
        Ok(QuadForm { a: 1, b: b0, c: (b0 * b0 - d) / 4 })
    }
}

/// Exact integer test of `|sqrt(D) - 2|a|| < b < sqrt(D)`.
pub fn is_reduced(f: &QuadForm) -> bool {
    let d = f.discriminant() as i128;
    let a2 = 2 * (f.a.unsigned_abs() as i128);
    let b = f.b as i128;
    b > 0 && b * b < d && d < (a2 + b) * (a2 + b) && (a2 <= b || (a2 - b) * (a2 - b) < d)
}

/// The cycle step: `rho([a,b,c]) = [c, b', (b'^2 - D)/(4c)]` where
/// `b' = -b (mod 2|c|)` is the unique representative in the open interval
/// `(sqrt(D) - 2|c|, sqrt(D))`.
pub fn rho(f: &QuadForm) -> QuadForm {
    let d = f.discriminant();
    let s = (d as u64).isqrt() as i64;
    let m = 2 * f.c.abs();
    let bp = s - (s + f.b).rem_euclid(m);
    let cp = ((bp as i128) * (bp as i128) - d as i128) / (4 * f.c as i128);
    debug_assert!(cp.abs() < (1 << 62));
    QuadForm { a: f.c, b: bp, c: cp as i64 }
}

/// Iterates `rho` until the form is reduced.
pub fn reduce(f: &QuadForm) -> QuadForm {
    let mut g = *f;
    let mut steps = 0u64;
    while !is_reduced(&g) {
        g = rho(&g);
        steps += 1;
        assert!(steps < 100_000_000, "reduction did not terminate for {f:?}");
    }
    g
}

/// Reduced forms of discriminant `d`, their `rho`-cycles, and the narrow
/// class number `h_narrow` = number of cycles.
#[derive(Debug, Clone)]
pub struct ClassData {
    pub discriminant: i64,
    pub reduced_forms: Vec<QuadForm>,
    pub cycles: Vec<Vec<QuadForm>>,
    pub h_narrow: u64,
}

/// Enumerates all reduced primitive forms of discriminant `d` directly
/// (`b = D mod 2`, `0 < b < sqrt(D)`, `ac = (b^2 - D)/4` over signed
/// divisor pairs) and partitions them into `rho`-cycles.
pub fn class_data(d: i64) -> Result<ClassData> {
    if !is_valid_discriminant(d) {
        return Err(Error::InvalidDiscriminant(d));
    }
    let s = (d as u64).isqrt() as i64;
    let mut forms = Vec::new();
    let mut b = 2 - d.rem_euclid(2);
    while b <= s {
        let m = (b * b - d) / 4; // negative
        let am = -m;
        let mut a0 = 1i64;
        while a0 * a0 <= am {
            if am % a0 == 0 {
                let c0 = am / a0;
                for (a, c) in [(a0, -c0), (-a0, c0), (c0, -a0), (-c0, a0)] {
                    if gcd3(a, b, c) == 1 {
                        let f = QuadForm { a, b, c };
                        if is_reduced(&f) && !forms.contains(&f) {
                            forms.push(f);
                        }
                    }
                }
            }
            a0 += 1;
        }
        b += 2;
    }
    forms.sort_unstable_by_key(|f| (f.b, f.a, f.c));

    let mut assigned = vec![false; forms.len()];
    let index = |forms: &[QuadForm], g: &QuadForm| forms.iter().position(|f| f == g);
    let mut cycles: Vec<Vec<QuadForm>> = Vec::new();
    for start in 0..forms.len() {
        if assigned[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut g = forms[start];
        loop {
            let i = index(&forms, &g).expect("rho left the reduced set");
            if assigned[i] {
                break;
            }
            assigned[i] = true;
            cycle.push(g);
            g = rho(&g);
        }
        cycles.push(cycle);
    }
    let h_narrow = cycles.len() as u64;
    Ok(ClassData { discriminant: d, reduced_forms: forms, cycles, h_narrow })
}

/// Integral 2x2 matrix `(p q; r s)`; hyperbolic with determinant one in
/// every context produced by this module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix2 {
    pub p: BigInt,
    pub q: BigInt,
    pub r: BigInt,
    pub s: BigInt,
}

impl Matrix2 {
    pub fn det(&self) -> BigInt {
        &self.p * &self.s - &self.q * &self.r
    }

    pub fn trace(&self) -> BigInt {
        &self.p + &self.s
    }

    /// `log N` where `N` is the square of the larger eigenvalue.
    pub fn log_norm(&self) -> f64 {
        let t = self.trace().abs().magnitude().clone();
        2.0 * crate::pell::log_eps_from_t(&t)
    }

    /// Square of the larger eigenvalue. Overflows to infinity when the
    /// trace exceeds f64 range; prefer `log_norm` for large matrices.
    pub fn norm(&self) -> f64 {
        self.log_norm().exp()
    }
}

/// The form-to-matrix correspondence
/// `[a,b,c] -> ((t+bu)/2, -cu; au, (t-bu)/2)`
/// for the minimal Pell solution `(t, u)` of the form's discriminant.
pub fn form_to_matrix(f: &QuadForm, pell: &PellFundamental) -> Result<Matrix2> {
    let d = f.discriminant();
    if d != pell.discriminant() {
        return Err(Error::DiscriminantMismatch { form: d, pell: pell.discriminant() });
    }
    let t = BigInt::from(pell.t().clone());
    let u = BigInt::from(pell.u().clone());
    let bu = BigInt::from(f.b) * &u;
    let p = (&t + &bu) / 2;
    let s = (&t - &bu) / 2;
    debug_assert!(((&t + &bu) % 2i32) == BigInt::ZERO, "t and bu must share parity");
    let q = BigInt::from(-f.c) * &u;
    let r = BigInt::from(f.a) * &u;
    Ok(Matrix2 { p, q, r, s })
}

/// Coefficients of `f(px + qy, rx + sy)`: the standard determinant-one
/// substitution action on forms, returned as big integers.
pub fn transform(f: &QuadForm, m: &Matrix2) -> (BigInt, BigInt, BigInt) {
    let (a, b, c) = (BigInt::from(f.a), BigInt::from(f.b), BigInt::from(f.c));
    let ap = &a * &m.p * &m.p + &b * &m.p * &m.r + &c * &m.r * &m.r;
    let bp = 2i32 * &a * &m.p * &m.q
        + &b * (&m.p * &m.s + &m.q * &m.r)
        + 2i32 * &c * &m.r * &m.s;
    let cp = &a * &m.q * &m.q + &b * &m.q * &m.s + &c * &m.s * &m.s;
    (ap, bp, cp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pell::pell4_fundamental;
    use proptest::prelude::*;

    fn qf(a: i64, b: i64, c: i64) -> QuadForm {
        QuadForm::new(a, b, c).unwrap()
    }

    #[test]
    fn is_reduced_spec_values() {
        assert!(is_reduced(&qf(1, 1, -1)));
        assert!(is_reduced(&qf(1, 2, -2)));
        assert!(!is_reduced(&qf(1, 0, -2)));
    }

    #[test]
    fn rho_spec_cycle_d5() {
        let f = qf(1, 1, -1);
        let g = rho(&f);
        assert_eq!(g, qf(-1, 1, 1));
        assert_eq!(rho(&g), f);
    }

    #[test]
    fn reduce_examples() {
        let f = qf(1, 4, -1); // already reduced
        assert_eq!(reduce(&f), f);
        let g = reduce(&qf(3, 2, -4));
        assert_eq!(g.discriminant(), 52);
        assert!(is_reduced(&g));
        let h = reduce(&qf(1, 0, -5));
        assert_eq!(h.discriminant(), 20);
        assert!(is_reduced(&h));
    }

    #[test]
    fn class_data_spec_values() {
        let cd = class_data(5).unwrap();
        assert_eq!(cd.reduced_forms, vec![qf(-1, 1, 1), qf(1, 1, -1)]);
        assert_eq!(cd.h_narrow, 1);

        let cd = class_data(12).unwrap();
        assert_eq!(cd.reduced_forms.len(), 4);
        assert_eq!(cd.h_narrow, 2);

        assert_eq!(class_data(8).unwrap().h_narrow, 1);
        assert_eq!(class_data(13).unwrap().h_narrow, 1);
        assert!(class_data(7).is_err());
        assert!(class_data(16).is_err());
    }

    #[test]
    fn class_data_cycles_partition_forms() {
        for d in [5i64, 8, 12, 13, 40, 136, 229] {
            let cd = class_data(d).unwrap();
            let total: usize = cd.cycles.iter().map(|c| c.len()).sum();
            assert_eq!(total, cd.reduced_forms.len());
            assert_eq!(cd.h_narrow as usize, cd.cycles.len());
            for cyc in &cd.cycles {
                assert_eq!(cyc.len() % 2, 0, "odd cycle for D={d}");
                let back = rho(cyc.last().unwrap());
                assert_eq!(back, cyc[0]);
            }
        }
    }

    #[test]
    fn form_to_matrix_spec_values() {
        let p5 = pell4_fundamental(5).unwrap();
        let m = form_to_matrix(&qf(1, 1, -1), &p5).unwrap();
        let as_i64 = |m: &Matrix2| {
            (
                i64::try_from(&m.p).unwrap(),
                i64::try_from(&m.q).unwrap(),
                i64::try_from(&m.r).unwrap(),
                i64::try_from(&m.s).unwrap(),
            )
        };
        assert_eq!(as_i64(&m), (2, 1, 1, 1));
        assert_eq!(m.det(), BigInt::from(1));

        let m = form_to_matrix(&qf(-1, 1, 1), &p5).unwrap();
        assert_eq!(as_i64(&m), (2, -1, -1, 1));
        assert_eq!(m.det(), BigInt::from(1));

        let p12 = pell4_fundamental(12).unwrap();
        let m = form_to_matrix(&qf(1, 2, -2), &p12).unwrap();
        assert_eq!(as_i64(&m), (3, 2, 1, 1));
        assert_eq!(m.trace(), BigInt::from(4));
        assert_eq!(m.det(), BigInt::from(1));

        assert!(form_to_matrix(&qf(1, 1, -1), &p12).is_err());
    }

    #[test]
    fn matrix_fixes_the_mirror_form() {
        // The literal correspondence matrix of f is an automorph of the
        // mirror form [a,-b,c] under the substitution action.
        for d in [5i64, 8, 12, 13, 21, 24, 28, 40] {
            let pf = pell4_fundamental(d).unwrap();
            for f in class_data(d).unwrap().reduced_forms {
                let m = form_to_matrix(&f, &pf).unwrap();
                let g = f.opposite();
                let (a, b, c) = transform(&g, &m);
                assert_eq!(a, BigInt::from(g.a()), "D={d} f={f:?}");
                assert_eq!(b, BigInt::from(g.b()));
                assert_eq!(c, BigInt::from(g.c()));
            }
        }
    }

    fn arb_form() -> impl Strategy<Value = QuadForm> {
        (-40i64..40, -40i64..40, -40i64..40).prop_filter_map("valid form", |(a, b, c)| {
            QuadForm::new(a, b, c).ok().filter(|f| f.discriminant() <= 5000)
        })
    }

    proptest! {
        #[test]
        fn rho_preserves_discriminant_and_primitivity(f in arb_form()) {
            let g = rho(&f);
            prop_assert_eq!(g.discriminant(), f.discriminant());
            prop_assert_eq!(gcd3(g.a(), g.b(), g.c()), 1);
        }

        #[test]
        fn reduce_lands_in_reduced_set(f in arb_form()) {
            let g = reduce(&f);
            prop_assert!(is_reduced(&g));
            prop_assert_eq!(g.discriminant(), f.discriminant());
        }
    }
}
