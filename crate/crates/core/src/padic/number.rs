use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{split_power, Prime, Rational};
use crate::error::{Error, Result};

/// A p-adic number `p^v * (a_0 + a_1 p + ... + a_{N-1} p^{N-1})` known to
/// relative precision `N`, i.e. modulo `p^(v+N)`.
///
/// Nonzero values are canonical: `a_0 != 0`. Zero is the all-zero digit
/// string; its `valuation` field then only records the absolute precision
/// `v + N` to which the value is known to vanish.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAdicNumber {
    p: Prime,
    valuation: i64,
    digits: Vec<u64>,
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

fn to_digits(mut unit: BigUint, p: Prime, n: usize) -> Vec<u64> {
    let pb = BigUint::from(p.get());
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        let (q, r) = unit.div_rem(&pb);
        digits.push(r.to_u64().expect("digit below p"));
        unit = q;
    }
    digits
}

impl PAdicNumber {
    /// Expands `x` to `precision` digits by p-adic long division: pick the
    /// digit matching the residue mod `p`, subtract it, divide by `p`.
    pub fn expand(x: &Rational, p: Prime, precision: usize) -> Result<Self> {
        if precision == 0 {
            return Err(Error::domain("precision must be at least 1"));
        }
        if x.is_zero() {
            return Ok(Self::zero(p, precision as i64, precision));
        }
        let (vn, mut num) = split_power(x.numer(), p);
        let (vd, den) = split_power(x.denom(), p);
        let pb = BigInt::from(p.get());
        let den_inv = mod_inverse(&den, &pb).expect("p does not divide the unit denominator");
        let mut digits = Vec::with_capacity(precision);
        for _ in 0..precision {
            let a = (num.mod_floor(&pb) * &den_inv).mod_floor(&pb);
            num = (num - &a * &den) / &pb;
            digits.push(a.to_u64().expect("digit below p"));
        }
        Ok(PAdicNumber {
            p,
            valuation: vn as i64 - vd as i64,
            digits,
        })
    }

    /// Zero known modulo `p^absolute_precision`, stored with `precision` digits.
    pub fn zero(p: Prime, absolute_precision: i64, precision: usize) -> Self {
        let precision = precision.max(1);
        PAdicNumber {
            p,
            valuation: absolute_precision - precision as i64,
            digits: vec![0; precision],
        }
    }

    /// Builds a canonical value from `p^v * unit` known modulo `p^(v+n)`.
    /// A result that vanishes modulo that bound becomes zero.
    fn from_parts(p: Prime, mut v: i64, unit: BigUint, mut n: usize) -> Self {
        let modulus = p.pow(n as u32);
        let mut unit = unit % &modulus;
        if unit.is_zero() {
            return Self::zero(p, v + n as i64, n);
        }
        let pb = BigUint::from(p.get());
        while (&unit % &pb).is_zero() {
            unit /= &pb;
            v += 1;
            n -= 1;
        }
        PAdicNumber {
            p,
            valuation: v,
            digits: to_digits(unit, p, n),
        }
    }

    /// Canonical p-adic integer with exactly `len` digits holding `value mod p^len`.
    /// Unlike [`PAdicNumber::expand`] the valuation is not absorbed: leading zero
    /// digits are kept, so the result has `v = 0`.
    pub(crate) fn integer_digits(value: u64, p: Prime, len: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(len);
        let mut rest = value;
        for _ in 0..len {
            out.push(rest % p.get());
            rest /= p.get();
        }
        out
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// The exponent `v`. For zero this is `absolute_precision - precision`.
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    /// `v + N`: the value is known modulo `p` to this power.
    pub fn absolute_precision(&self) -> i64 {
        self.valuation + self.digits.len() as i64
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// `a_0 + a_1 p + ...` as an integer.
    pub fn unit(&self) -> BigUint {
        let pb = BigUint::from(self.p.get());
        self.digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &pb + d)
    }

    /// The truncated value `p^v * unit` as an exact rational.
    pub fn to_rational(&self) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        let unit = Rational::from_integer(BigInt::from_biguint(Sign::Plus, self.unit()));
        let scale = Rational::from_integer(self.p.get() as i64).pow(self.valuation as i32);
        unit * scale
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p.get(), other.p.get()));
        }
        Ok(())
    }

    /// Sum with precision tracking: the result is known modulo
    /// `p^min(abs_a, abs_b)`; cancellation of leading digits shrinks `N`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let p = self.p;
        let abs = self.absolute_precision().min(other.absolute_precision());
        let terms: Vec<&Self> = [self, other].into_iter().filter(|x| !x.is_zero()).collect();
        let Some(vmin) = terms.iter().map(|x| x.valuation).min() else {
            return Ok(Self::zero(p, abs, self.precision().min(other.precision())));
        };
        if vmin >= abs {
            return Ok(Self::zero(p, abs, self.precision().min(other.precision())));
        }
        let sum: BigUint = terms
            .iter()
            .map(|x| x.unit() * p.pow((x.valuation - vmin) as u32))
            .sum();
        Ok(Self::from_parts(p, vmin, sum, (abs - vmin) as usize))
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let modulus = self.p.pow(self.precision() as u32);
        let unit = &modulus - self.unit();
        Self::from_parts(self.p, self.valuation, unit, self.precision())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product; relative precision is the smaller of the two.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let p = self.p;
        let n = self.precision().min(other.precision());
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ok(Self::zero(
                p,
                self.absolute_precision() + other.absolute_precision(),
                n,
            )),
            (true, false) => Ok(Self::zero(p, self.absolute_precision() + other.valuation, n)),
            (false, true) => Ok(Self::zero(p, other.absolute_precision() + self.valuation, n)),
            (false, false) => Ok(Self::from_parts(
                p,
                self.valuation + other.valuation,
                self.unit() * other.unit(),
                n,
            )),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if other.is_zero() {
            return Err(Error::domain("p-adic division by zero"));
        }
        let p = self.p;
        let n = self.precision().min(other.precision());
        if self.is_zero() {
            return Ok(Self::zero(p, self.absolute_precision() - other.valuation, n));
        }
        let modulus = BigInt::from_biguint(Sign::Plus, p.pow(n as u32));
        let inv = mod_inverse(&BigInt::from_biguint(Sign::Plus, other.unit()), &modulus)
            .expect("canonical unit is invertible");
        let unit = (BigInt::from_biguint(Sign::Plus, self.unit()) * inv).mod_floor(&modulus);
        Ok(Self::from_parts(
            p,
            self.valuation - other.valuation,
            unit.abs().to_biguint().expect("nonnegative"),
            n,
        ))
    }
}

impl fmt::Display for PAdicNumber {
    /// `p=3 v=1 digits=[1,2,0,…] (N=8)`: a run of trailing zero digits is
    /// shown as a single zero followed by an ellipsis.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last_nonzero = self.digits.iter().rposition(|&d| d != 0);
        let shown = match last_nonzero {
            Some(i) if i + 1 < self.digits.len() => &self.digits[..=i + 1],
            Some(_) => &self.digits[..],
            None => &self.digits[..1],
        };
        let mut body: Vec<String> = shown.iter().map(|d| d.to_string()).collect();
        if shown.len() < self.digits.len() {
            body.push("…".into());
        }
        write!(
            f,
            "p={} v={} digits=[{}] (N={})",
            self.p,
            self.valuation,
            body.join(","),
            self.digits.len()
        )
    }
}

impl fmt::Debug for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn expand_examples() {
        let x = PAdicNumber::expand(&q("-1"), p(3), 4).unwrap();
        assert_eq!((x.valuation(), x.digits()), (0, &[2, 2, 2, 2][..]));

        let x = PAdicNumber::expand(&q("12"), p(2), 3).unwrap();
        assert_eq!((x.valuation(), x.digits()), (2, &[1, 1, 0][..]));
    }

    #[test]
    fn one_third_in_two_adics() {
        // 1/3 * 3 = 1: find the 5-digit residue u with 3u = 1 mod 32 by search.
        let u = (0u64..32).find(|u| (3 * u) % 32 == 1).unwrap();
        let expected: Vec<u64> = (0..5).map(|i| (u >> i) & 1).collect();
        assert_eq!(expected, vec![1, 1, 0, 1, 0]);
        let x = PAdicNumber::expand(&q("1/3"), p(2), 5).unwrap();
        assert_eq!(x.valuation(), 0);
        assert_eq!(x.digits(), &expected[..]);
    }

    #[test]
    fn negative_valuation() {
        let x = PAdicNumber::expand(&q("7/9"), p(3), 3).unwrap();
        assert_eq!(x.valuation(), -2);
        assert_eq!(x.digits(), &[1, 2, 0]);
    }

    #[test]
    fn arithmetic_examples() {
        let one = PAdicNumber::expand(&q("1"), p(3), 6).unwrap();
        let minus_one = PAdicNumber::expand(&q("-1"), p(3), 6).unwrap();
        let s = one.add(&minus_one).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.absolute_precision(), 6);

        let third = PAdicNumber::expand(&q("1/3"), p(2), 8).unwrap();
        let three = PAdicNumber::expand(&q("3"), p(2), 8).unwrap();
        assert_eq!(
            third.mul(&three).unwrap(),
            PAdicNumber::expand(&q("1"), p(2), 8).unwrap()
        );

        let two = PAdicNumber::expand(&q("2"), p(3), 4).unwrap();
        let four = two.add(&two).unwrap();
        assert_eq!(four.valuation(), 0);
        assert_eq!(four.digits(), &[1, 1, 0, 0]);
    }

    #[test]
    fn cancellation_loses_precision() {
        // 1 and 1 + 3^2 agree in two digits: the difference is 3^2 known mod 3^5.
        let a = PAdicNumber::expand(&q("10"), p(3), 5).unwrap();
        let b = PAdicNumber::expand(&q("1"), p(3), 5).unwrap();
        let d = a.sub(&b).unwrap();
        assert_eq!(d.valuation(), 2);
        assert_eq!(d.precision(), 3);
        assert_eq!(d.digits(), &[1, 0, 0]);
    }

    #[test]
    fn division_and_mismatch() {
        let a = PAdicNumber::expand(&q("5"), p(7), 6).unwrap();
        let b = PAdicNumber::expand(&q("14"), p(7), 6).unwrap();
        let r = a.div(&b).unwrap();
        assert_eq!(r, PAdicNumber::expand(&q("5/14"), p(7), 6).unwrap());

        let c = PAdicNumber::expand(&q("5"), p(5), 6).unwrap();
        assert!(matches!(a.add(&c), Err(Error::PrimeMismatch(7, 5))));
        let z = PAdicNumber::expand(&q("0"), p(7), 6).unwrap();
        assert!(a.div(&z).is_err());
    }

    #[test]
    fn display_format() {
        let x = PAdicNumber::expand(&q("21"), p(3), 8).unwrap();
        assert_eq!(x.to_string(), "p=3 v=1 digits=[1,2,0,…] (N=8)");
        let y = PAdicNumber::expand(&q("-1"), p(2), 3).unwrap();
        assert_eq!(y.to_string(), "p=2 v=0 digits=[1,1,1] (N=3)");
    }

    #[test]
    fn zero_precision_rejected() {
        assert!(PAdicNumber::expand(&q("1"), p(2), 0).is_err());
    }
}
