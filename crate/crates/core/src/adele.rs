//! Adelic characters, product-form test functions and the Weyl operator.
//!
//! The additive character of the adeles factors over places,
//! `chi(x) = exp(-2 pi i x_inf) * prod_p exp(2 pi i {x_p}_p)`, where `{.}_p`
//! is the p-adic fractional part. For a rational `x` embedded diagonally
//! the factors cancel and `chi(x) = 1`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, split_power, support, valuation, Prime, Rational};

/// `{x}_p`: the sum of the negative-power terms of the p-adic expansion,
/// a rational in `[0, 1)` whose denominator is a power of `p`.
pub fn frac_part(x: &Rational, p: Prime) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    let (e, den_unit) = split_power(x.denom(), p);
    if e == 0 {
        return Rational::zero();
    }
    let modulus = BigInt::from(p.pow(e));
    let inv = mod_inverse(&den_unit, &modulus).expect("unit denominator");
    let r = (x.numer() * inv).mod_floor(&modulus);
    Rational::new(r, modulus).expect("nonzero modulus")
}

/// `exp(2 pi i t)` for a rational `t`, reduced mod 1 before rounding to f64.
fn unit_phase(t: &Rational) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t.fract_real().to_f64())
}

/// `chi_p(x) = exp(2 pi i {x}_p)`.
pub fn chi_p(x: &Rational, p: Prime) -> Complex64 {
    unit_phase(&frac_part(x, p))
}

/// `chi_inf(x) = exp(-2 pi i x)`.
pub fn chi_inf(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * (x - x.floor()))
}

/// `chi_inf` of an exact rational.
pub fn chi_inf_exact(x: &Rational) -> Complex64 {
    unit_phase(&x.fract_real()).conj()
}

/// `chi_inf(x) * prod_{p in primes} chi_p(x)` for a diagonally embedded rational.
pub fn adele_char(x: &Rational, primes: &[Prime]) -> Result<Complex64> {
    for p in support(&Rational::from_integer(x.denom().clone()))? {
        if !primes.contains(&p) {
            return Err(Error::SupportIncomplete(p.get()));
        }
    }
    let mut acc = chi_inf_exact(x);
    let mut seen: Vec<Prime> = primes.to_vec();
    seen.sort();
    seen.dedup();
    for p in seen {
        acc *= chi_p(x, p);
    }
    Ok(acc)
}

/// `Omega(|x|_p)`: indicator of the p-adic unit ball.
pub fn omega(x: &Rational, p: Prime) -> f64 {
    match valuation(x, p) {
        Ok(v) if v < 0 => 0.0,
        _ => 1.0,
    }
}

/// An adele with a real component and finitely many listed p-adic
/// components. Unlisted primes are taken to carry a unit-ball component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdelePoint {
    pub real: f64,
    finite: BTreeMap<Prime, Rational>,
}

impl AdelePoint {
    pub fn new(real: f64, finite: impl IntoIterator<Item = (Prime, Rational)>) -> Self {
        AdelePoint {
            real,
            finite: finite.into_iter().collect(),
        }
    }

    /// The principal adele of `x`, listing the primes that divide its
    /// numerator or denominator.
    pub fn embed_rational(x: &Rational) -> Result<Self> {
        let primes = support(x)?;
        Ok(AdelePoint::new(
            x.to_f64(),
            primes.into_iter().map(|p| (p, x.clone())),
        ))
    }

    pub fn component(&self, p: Prime) -> Option<&Rational> {
        self.finite.get(&p)
    }

    pub fn finite_components(&self) -> impl Iterator<Item = (Prime, &Rational)> {
        self.finite.iter().map(|(p, x)| (*p, x))
    }
}

/// `|b|^s = |b_inf|^s * prod_p |b_p|_p^s`, accumulated in logarithms.
pub fn mult_char(a: &AdelePoint, s: f64) -> Result<f64> {
    if a.real == 0.0 || !a.real.is_finite() {
        return Err(Error::domain("multiplicative character needs a nonzero real component"));
    }
    let mut log_norm = a.real.abs().ln();
    for (p, x) in a.finite_components() {
        if x.is_zero() {
            return Err(Error::domain(format!("zero component at {p}")));
        }
        let v = valuation(x, p)?;
        log_norm -= v as f64 * (p.get() as f64).ln();
    }
    Ok((s * log_norm).exp())
}

/// Real factor of a product test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RealFactor {
    /// `exp(-(x - center)^2 / (2 sigma^2))`, peak value 1.
    Gaussian { center: f64, sigma: f64 },
    /// Indicator of the closed interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl RealFactor {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RealFactor::Gaussian { center, sigma } => {
                let z = (x - center) / sigma;
                (-0.5 * z * z).exp()
            }
            RealFactor::Interval { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Locally constant, compactly supported factor at a finite prime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FiniteFactor {
    Omega,
    /// Indicator of `|x - center|_p <= p^-radius`.
    Ball { center: Rational, radius: i32 },
    /// `chi_p(freq * x) * Omega(|x|_p)`.
    CharacterOmega { freq: Rational },
}

impl FiniteFactor {
    pub fn eval(&self, x: &Rational, p: Prime) -> Complex64 {
        match self {
            FiniteFactor::Omega => Complex64::new(omega(x, p), 0.0),
            FiniteFactor::Ball { center, radius } => {
                let d = x - center;
                let inside = d.is_zero() || valuation(&d, p).is_ok_and(|v| v >= *radius as i64);
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
            FiniteFactor::CharacterOmega { freq } => {
                if omega(x, p) == 0.0 {
                    Complex64::zero()
                } else {
                    chi_p(&(freq * x), p)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteEntry {
    pub prime: Prime,
    #[serde(flatten)]
    pub factor: FiniteFactor,
}

/// Product-form test function `phi_inf(x_inf) * prod_p phi_p(x_p)`; every
/// prime without an explicit factor contributes `Omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub real: RealFactor,
    #[serde(default)]
    pub finite: Vec<FiniteEntry>,
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        let mut primes: Vec<Prime> = self.finite.iter().map(|e| e.prime).collect();
        primes.sort();
        let n = primes.len();
        primes.dedup();
        if primes.len() != n {
            return Err(Error::domain("test function lists a prime twice"));
        }
        match self.real {
            RealFactor::Gaussian { sigma, .. } if !(sigma > 0.0) => {
                Err(Error::domain("gaussian width must be positive"))
            }
            RealFactor::Interval { lo, hi } if !(lo <= hi) => Err(Error::domain("empty interval")),
            _ => Ok(()),
        }
    }

    pub fn factor(&self, p: Prime) -> Option<&FiniteFactor> {
        self.finite.iter().find(|e| e.prime == p).map(|e| &e.factor)
    }
}

pub fn eval_test_function(f: &TestFunction, a: &AdelePoint) -> Result<Complex64> {
    let mut acc = Complex64::new(f.real.eval(a.real), 0.0);
    for entry in &f.finite {
        match (a.component(entry.prime), &entry.factor) {
            (Some(x), factor) => acc *= factor.eval(x, entry.prime),
            (None, FiniteFactor::Omega) => {}
            (None, _) => return Err(Error::MissingComponent(entry.prime.get())),
        }
    }
    // listed components without an explicit factor meet the Omega tail
    for (p, x) in a.finite_components() {
        if f.factor(p).is_none() {
            acc *= omega(x, p);
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    #[serde(flatten)]
    pub function: TestFunction,
}

/// A phase-space point `z = (q, k)`: position shift `q`, momentum `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: Rational,
    pub k: Rational,
}

impl PhasePoint {
    pub fn new(q: Rational, k: Rational) -> Self {
        PhasePoint { q, k }
    }

    pub fn add(&self, other: &PhasePoint) -> PhasePoint {
        PhasePoint::new(&self.q + &other.q, &self.k + &other.k)
    }
}

/// A function on the finite quotient `p^-N Z_p / p^N Z_p`, which has
/// `p^2N` cosets. Index `j` is the coset of `j / p^N`. Integrals use the
/// Haar measure, so each coset weighs `p^-N`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFunction {
    p: Prime,
    window: u32,
    values: Vec<Complex64>,
}

impl LatticeFunction {
    pub fn new(p: Prime, window: u32, values: Vec<Complex64>) -> Result<Self> {
        if window == 0 {
            return Err(Error::domain("window must be at least 1"));
        }
        let len = lattice_len(p, window)?;
        if values.len() != len {
            return Err(Error::domain(format!(
                "lattice function needs {len} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("lattice values must be finite"));
        }
        Ok(LatticeFunction { p, window, values })
    }

    pub fn from_fn(p: Prime, window: u32, f: impl Fn(&Rational) -> Complex64) -> Result<Self> {
        let len = lattice_len(p, window)?;
        let values = (0..len).map(|j| f(&coset_label(p, window, j))).collect();
        Self::new(p, window, values)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self, j: usize) -> Rational {
        coset_label(self.p, self.window, j)
    }

    /// L2 norm under the Haar measure; summed in index order.
    pub fn norm(&self) -> f64 {
        let weight = (self.p.get() as f64).powi(-(self.window as i32));
        let sum: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (weight * sum).sqrt()
    }

    /// CSV with columns `coset,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("coset,re,im\n");
        for (j, z) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.label(j), z.re, z.im);
        }
        out
    }

    /// Parses the `coset,re,im` format; every coset must appear exactly once.
    pub fn from_csv(p: Prime, window: u32, text: &str) -> Result<Self> {
        let len = lattice_len(p, window)?;
        let mut values: Vec<Option<Complex64>> = vec![None; len];
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "coset,re,im" => {}
            _ => return Err(Error::Schema("expected header \"coset,re,im\"".into())),
        }
        for (i, line) in lines {
            let row = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let [label, re, im] = cells[..] else {
                return Err(Error::Row { row, msg: "expected 3 cells".into() });
            };
            let x: Rational = label.parse().map_err(|e| Error::Row { row, msg: format!("{e}") })?;
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Row { row, msg: format!("not a number: {s:?}") })
            };
            let j = coset_index(&x, p, window)
                .ok_or_else(|| Error::Row { row, msg: format!("{x} lies outside the window") })?;
            if values[j].replace(Complex64::new(num(re)?, num(im)?)).is_some() {
                return Err(Error::Row { row, msg: format!("coset of {x} listed twice") });
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(j, v)| v.ok_or_else(|| Error::Schema(format!("missing coset {}", coset_label(p, window, j)))))
            .collect::<Result<_>>()?;
        Self::new(p, window, values)
    }
}

fn lattice_len(p: Prime, window: u32) -> Result<usize> {
    p.get()
        .checked_pow(2 * window)
        .filter(|&n| n <= 1 << 24)
        .map(|n| n as usize)
        .ok_or_else(|| Error::domain("truncation window too large"))
}

fn coset_label(p: Prime, window: u32, j: usize) -> Rational {
    Rational::new(j as u64, p.pow(window)).expect("nonzero")
}

/// Index of the coset containing `x`, or `None` when `|x|_p > p^N`.
fn coset_index(x: &Rational, p: Prime, window: u32) -> Option<usize> {
    if x.is_zero() {
        return Some(0);
    }
    let v = valuation(x, p).ok()?;
    if v < -(window as i64) {
        return None;
    }
    let scaled = x * &Rational::from_integer(BigInt::from(p.pow(window)));
    let modulus = BigInt::from(p.pow(2 * window));
    let (_, den_unit) = split_power(scaled.denom(), p);
    let inv = mod_inverse(&den_unit, &modulus)?;
    (scaled.numer() * inv).mod_floor(&modulus).to_usize()
}

/// `(W(z) psi)(x) = chi_p(k (2x + q)) psi(x + q)`, with `x + q` taken in the
/// quotient group.
pub fn weyl_apply(z: &PhasePoint, psi: &LatticeFunction) -> Result<LatticeFunction> {
    let (p, window) = (psi.p, psi.window);
    let shift = coset_index(&z.q, p, window).ok_or(Error::PhaseOutOfWindow)?;
    if coset_index(&z.k, p, window).is_none() {
        return Err(Error::PhaseOutOfWindow);
    }
    let len = psi.values.len();
    let two = Rational::from(2);
    let values = (0..len)
        .map(|j| {
            let x = psi.label(j);
            let arg = &z.k * &(&(&two * &x) + &z.q);
            chi_p(&arg, p) * psi.values[(j + shift) % len]
        })
        .collect();
    Ok(LatticeFunction { p, window, values })
}

/// Scalar `c` with `W(z) W(z') = c W(z + z')`, namely `chi_p(k' q - k q')`.
pub fn composition_phase(z: &PhasePoint, w: &PhasePoint, p: Prime) -> Complex64 {
    chi_p(&(&(&w.k * &z.q) - &(&z.k * &w.q)), p)
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

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn frac_part_examples() {
        assert_eq!(frac_part(&q("1/2"), p(2)), q("1/2"));
        assert_eq!(frac_part(&q("7/9"), p(3)), q("7/9"));
        assert_eq!(frac_part(&q("5"), p(3)), q("0"));
        assert_eq!(frac_part(&q("-1/2"), p(2)), q("1/2"));
        // 5/6 = 1/2 + 1/3
        assert_eq!(frac_part(&q("5/6"), p(2)), q("1/2"));
        assert_eq!(frac_part(&q("5/6"), p(3)), q("1/3"));
    }

    #[test]
    fn character_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert!(close(chi_p(&q("17/5"), p(3)), one));
        assert!(close(chi_p(&q("1/2"), p(2)), -one));
        assert!(close(chi_inf(0.5), -one));
        assert!(close(chi_inf(-2.5), -one));
        assert!(close(chi_inf(0.25), Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn adele_char_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert!(close(adele_char(&q("1/2"), &[p(2)]).unwrap(), one));
        assert!(close(adele_char(&q("5/6"), &[p(2), p(3)]).unwrap(), one));
        assert!(close(adele_char(&q("12"), &[p(7)]).unwrap(), one));
        assert!(close(adele_char(&q("-12"), &[]).unwrap(), one));
        assert!(matches!(
            adele_char(&q("5/6"), &[p(2)]),
            Err(Error::SupportIncomplete(3))
        ));
    }

    #[test]
    fn mult_char_examples() {
        let a = AdelePoint::embed_rational(&q("5/6")).unwrap();
        assert!((mult_char(&a, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((mult_char(&a, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let b = AdelePoint::new(2.0, []);
        assert!((mult_char(&b, 3.0).unwrap() - 8.0).abs() < 1e-12);
        let zero = AdelePoint::new(1.0, [(p(2), q("0"))]);
        assert!(mult_char(&zero, 1.0).is_err());
        assert!(mult_char(&AdelePoint::new(0.0, []), 1.0).is_err());
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&q("5"), p(3)), 1.0);
        assert_eq!(omega(&q("1/3"), p(3)), 0.0);
        assert_eq!(omega(&q("10/12"), p(2)), 0.0);
        assert_eq!(omega(&q("0"), p(2)), 1.0);
    }

    #[test]
    fn test_function_examples() {
        let gauss = RealFactor::Gaussian { center: 0.0, sigma: 1.0 };
        let all_omega = TestFunction { real: gauss.clone(), finite: vec![] };
        let a0 = AdelePoint::embed_rational(&q("0")).unwrap();
        assert!(close(eval_test_function(&all_omega, &a0).unwrap(), Complex64::new(1.0, 0.0)));

        let ball = TestFunction {
            real: gauss.clone(),
            finite: vec![FiniteEntry {
                prime: p(2),
                factor: FiniteFactor::Ball { center: q("0"), radius: 1 },
            }],
        };
        let a1 = AdelePoint::new(0.0, [(p(2), q("1"))]);
        assert_eq!(eval_test_function(&ball, &a1).unwrap(), Complex64::zero());

        // missing component for a non-Omega factor
        assert!(matches!(
            eval_test_function(&ball, &AdelePoint::new(0.0, [])),
            Err(Error::MissingComponent(2))
        ));
    }

    #[test]
    fn omega_tail_applies_to_listed_components() {
        let f = TestFunction { real: RealFactor::Interval { lo: -1.0, hi: 1.0 }, finite: vec![] };
        let a = AdelePoint::embed_rational(&q("1/5")).unwrap();
        assert_eq!(eval_test_function(&f, &a).unwrap(), Complex64::zero());
    }

    #[test]
    fn weyl_identity_and_shift() {
        let psi = LatticeFunction::from_fn(p(3), 1, |x| Complex64::new(x.to_f64(), 1.0)).unwrap();
        let id = weyl_apply(&PhasePoint::new(q("0"), q("0")), &psi).unwrap();
        assert_eq!(id, psi);

        let shifted = weyl_apply(&PhasePoint::new(q("1/3"), q("0")), &psi).unwrap();
        assert_eq!(shifted.values()[0], psi.values()[1]);
        assert_eq!(shifted.values()[8], psi.values()[0]);
        assert!((shifted.norm() - psi.norm()).abs() < 1e-12);
    }

    #[test]
    fn weyl_rejects_out_of_window() {
        let psi = LatticeFunction::from_fn(p(2), 1, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            weyl_apply(&PhasePoint::new(q("1/4"), q("0")), &psi),
            Err(Error::PhaseOutOfWindow)
        ));
        assert!(matches!(
            weyl_apply(&PhasePoint::new(q("0"), q("1/4")), &psi),
            Err(Error::PhaseOutOfWindow)
        ));
    }

    #[test]
    fn lattice_csv() {
        let psi = LatticeFunction::from_fn(p(2), 1, |_| Complex64::new(1.0, -0.5)).unwrap();
        let csv = psi.to_csv();
        assert!(csv.starts_with("coset,re,im\n0,1,-0.5\n1/2,1,-0.5\n1,1,-0.5\n3/2,"));
        assert!(LatticeFunction::new(p(2), 1, vec![Complex64::zero(); 3]).is_err());
    }
}
