//! Exact rational and truncated p-adic arithmetic.
//!
//! Every rational `x != 0` factors as `x = p^v * m/n` with `p` dividing
//! neither `m` nor `n`; `v` is the valuation and `|x|_p = p^-v` the norm.
//! Together with the ordinary absolute value (the real place) these norms
//! satisfy the product formula `|x|_inf * prod_p |x|_p = 1`.

mod number;
mod prime;
mod rational;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use number::PAdicNumber;
pub(crate) use number::mod_inverse;
pub use prime::{factorize, is_prime, is_prime_big, Prime};
pub use rational::Rational;

use crate::error::{Error, Result};

/// A place of the rationals: the real absolute value or a finite prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Place {
    Real,
    Finite(Prime),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => f.write_str("∞"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// Splits `n = p^v * rest` with `p ∤ rest`. `n` must be nonzero.
pub(crate) fn split_power(n: &BigInt, p: Prime) -> (u32, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p.get());
    let mut v = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1;
    }
    (v, rest)
}

pub fn valuation(x: &Rational, p: Prime) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let (vn, _) = split_power(x.numer(), p);
    let (vd, _) = split_power(x.denom(), p);
    Ok(vn as i64 - vd as i64)
}

/// `|x|_p = p^-v` at a finite place (with `|0|_p = 0`), `|x|` at the real place.
pub fn padic_norm(x: &Rational, place: Place) -> Rational {
    match place {
        Place::Real => x.abs(),
        Place::Finite(p) => match valuation(x, p) {
            Ok(v) => Rational::from_integer(p.get() as i64).pow(-(v as i32)),
            Err(_) => Rational::zero(),
        },
    }
}

pub fn expand(x: &Rational, p: Prime, precision: usize) -> Result<PAdicNumber> {
    PAdicNumber::expand(x, p, precision)
}

/// Primes dividing the numerator or denominator, ascending.
pub fn support(x: &Rational) -> Result<Vec<Prime>> {
    let mut primes = Vec::new();
    for n in [x.numer(), x.denom()] {
        if n.is_zero() {
            continue;
        }
        for (q, _) in factorize(&n.abs().to_biguint().expect("nonnegative")) {
            let q = q
                .to_u64()
                .ok_or_else(|| Error::Unsupported(format!("prime factor {q} exceeds 64 bits")))?;
            primes.push(Prime::new(q)?);
        }
    }
    primes.sort();
    primes.dedup();
    Ok(primes)
}

/// Norms of `x` at every place where it is not a unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductFormula {
    pub factors: Vec<(Place, Rational)>,
    pub product: Rational,
}

pub fn product_formula(x: &Rational) -> Result<ProductFormula> {
    if x.is_zero() {
        return Err(Error::domain("product formula needs a nonzero rational"));
    }
    let mut factors = vec![(Place::Real, padic_norm(x, Place::Real))];
    for p in support(x)? {
        factors.push((Place::Finite(p), padic_norm(x, Place::Finite(p))));
    }
    let product = factors
        .iter()
        .fold(Rational::one(), |acc, (_, norm)| acc * norm);
    Ok(ProductFormula { factors, product })
}
