//! Fractal digit maps from p-adic integers to the reals, and the wave
//! curves they trace along p-adic geodesics `w = C t + B` (and monomials
//! `w = C t^m + B`).
//!
//! A p-adic integer with digits `a_0, a_1, ...` is sent to
//!
//! ```text
//! digit-power:  sum_n a_n^D * p^-(n+1)
//! scale-power:  sum_n a_n   * p^-(n+1)D
//! ```
//!
//! which is a digit-reversing (Monna-type) embedding deformed by the
//! fractal dimension `D`. Both maps are self-affine:
//! `f(a + p j) = (a^D + f(j)) / p` for digit-power and
//! `f(a + p j) = (a + f(j)) / p^D` for scale-power.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PAdicNumber, Prime};

/// Upper bound on the number of samples in a generated curve.
pub const MAX_SAMPLES: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    #[default]
    DigitPower,
    ScalePower,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::DigitPower => "digit-power",
            MapKind::ScalePower => "scale-power",
        })
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digit" | "digit-power" => Ok(MapKind::DigitPower),
            "scale" | "scale-power" => Ok(MapKind::ScalePower),
            _ => Err(Error::Parse(format!(
                "unknown map kind {s:?} (expected digit-power or scale-power)"
            ))),
        }
    }
}

fn check_dim(dim: f64) -> Result<()> {
    if dim.is_finite() && dim > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("fractal dimension must be positive, got {dim}")))
    }
}

#[inline]
fn digit_pow(a: u64, dim: f64) -> f64 {
    // 0^D = 0 for every D > 0
    if a == 0 {
        0.0
    } else {
        (a as f64).powf(dim)
    }
}

/// Maps a digit string (lowest digit first). Assumes `dim > 0`.
pub(crate) fn map_digits(digits: &[u64], p: u64, dim: f64, kind: MapKind) -> f64 {
    let inv_p = 1.0 / p as f64;
    let ratio = match kind {
        MapKind::DigitPower => inv_p,
        MapKind::ScalePower => inv_p.powf(dim),
    };
    let mut weight = ratio;
    let mut acc = 0.0;
    for &a in digits {
        let term = match kind {
            MapKind::DigitPower => digit_pow(a, dim),
            MapKind::ScalePower => a as f64,
        };
        acc += term * weight;
        weight *= ratio;
    }
    acc
}

/// Digit map of a p-adic integer. Its `v` leading zero digits are restored
/// before mapping, so all `v + N` known digits contribute.
pub fn real_map(x: &PAdicNumber, dim: f64, kind: MapKind) -> Result<f64> {
    check_dim(dim)?;
    if x.is_zero() {
        return Ok(0.0);
    }
    if x.valuation() < 0 {
        return Err(Error::NotIntegral(x.valuation()));
    }
    let mut digits = vec![0; x.valuation() as usize];
    digits.extend_from_slice(x.digits());
    Ok(map_digits(&digits, x.prime().get(), dim, kind))
}

fn base_digits(mut n: u64, p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    loop {
        out.push(n % p);
        n /= p;
        if n == 0 {
            return out;
        }
    }
}

/// Checks `f(a + p j) = (a^D + f(j)) / p` (digit-power) or
/// `f(a + p j) = (a + f(j)) / p^D` (scale-power) to within 1e-12.
pub fn self_affinity_check(j: u64, a: u64, p: Prime, dim: f64, kind: MapKind) -> Result<bool> {
    check_dim(dim)?;
    let p = p.get();
    if a >= p {
        return Err(Error::domain(format!("digit {a} out of range for p = {p}")));
    }
    let tail = base_digits(j, p);
    let mut whole = vec![a];
    whole.extend_from_slice(&tail);
    let lhs = map_digits(&whole, p, dim, kind);
    let f_j = map_digits(&tail, p, dim, kind);
    let rhs = match kind {
        MapKind::DigitPower => (digit_pow(a, dim) + f_j) / p as f64,
        MapKind::ScalePower => (a as f64 + f_j) / (p as f64).powf(dim),
    };
    Ok((lhs - rhs).abs() <= 1e-12)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceAffine {
    pub offset: f64,
    pub scale: f64,
}

/// Full parameterisation of one p-adic wave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveSpec {
    pub p: Prime,
    /// Fractal dimension `D`.
    pub dim: f64,
    /// Digit depth `L`; the curve has `p^L` samples.
    pub level: u32,
    /// `C`, reduced mod `p^L`.
    pub slope: i64,
    /// `B`, reduced mod `p^L`.
    pub intercept: i64,
    pub map_kind: MapKind,
    /// Exponent `m` in `C k^m + B`; 1 is the geodesic.
    pub degree: u32,
    pub time_window: TimeWindow,
    pub price_affine: PriceAffine,
}

impl WaveSpec {
    /// Geodesic `w = k` with identity time and price transforms.
    pub fn new(p: Prime, dim: f64, level: u32) -> Self {
        WaveSpec {
            p,
            dim,
            level,
            slope: 1,
            intercept: 0,
            map_kind: MapKind::DigitPower,
            degree: 1,
            time_window: TimeWindow { start: 0.0, end: 1.0 },
            price_affine: PriceAffine { offset: 0.0, scale: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.level == 0 {
            return Err(Error::domain("level must be at least 1"));
        }
        if self.degree == 0 {
            return Err(Error::domain("monomial degree must be at least 1"));
        }
        let TimeWindow { start, end } = self.time_window;
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::domain(format!("time window must satisfy t0 < t1, got ({start}, {end})")));
        }
        let PriceAffine { offset, scale } = self.price_affine;
        if !(offset.is_finite() && scale.is_finite()) || scale == 0.0 {
            return Err(Error::domain("price scale must be finite and nonzero"));
        }
        self.sample_count()?;
        Ok(())
    }

    /// `p^L`, bounded by [`MAX_SAMPLES`].
    pub fn sample_count(&self) -> Result<u64> {
        modulus(self.p, self.level)
            .filter(|&n| n <= MAX_SAMPLES)
            .ok_or_else(|| Error::domain(format!("p^L = {}^{} samples is too large", self.p, self.level)))
    }

    /// `(C k^m + B) mod p^digits`.
    pub fn residue(&self, k: u64, digits: u32) -> Result<u64> {
        let m = modulus(self.p, digits)
            .ok_or_else(|| Error::domain(format!("p^{digits} exceeds 64 bits")))?;
        let c = (self.slope as i128).rem_euclid(m as i128) as u64;
        let b = (self.intercept as i128).rem_euclid(m as i128) as u64;
        Ok(((mul_mod(c, pow_mod(k, self.degree as u64, m), m) as u128 + b as u128) % m as u128) as u64)
    }

    /// Raw wave value `real_map((C k^m + B) mod p^digits)` using `digits` digits.
    pub fn raw_value(&self, k: u64, digits: u32) -> Result<f64> {
        let w = self.residue(k, digits)?;
        let ds = PAdicNumber::integer_digits(w, self.p, digits as usize);
        Ok(map_digits(&ds, self.p.get(), self.dim, self.map_kind))
    }

    /// Abscissa of sample `k`; indices past `p^L - 1` continue at the same spacing.
    pub fn time_at(&self, k: u64, samples: u64) -> f64 {
        let TimeWindow { start, end } = self.time_window;
        start + (end - start) * (k as f64) / ((samples - 1) as f64)
    }

    pub fn price_of(&self, raw: f64) -> f64 {
        self.price_affine.offset + self.price_affine.scale * raw
    }
}

fn modulus(p: Prime, digits: u32) -> Option<u64> {
    p.get().checked_pow(digits)
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    acc
}

/// Sampled wave: `p^L` points with strictly increasing `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveCurve {
    pub spec: WaveSpec,
    pub points: Vec<(f64, f64)>,
}

impl WaveCurve {
    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|&(_, y)| y).collect()
    }

    pub fn total_variation(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum()
    }
}

pub fn wave_generate(spec: &WaveSpec) -> Result<WaveCurve> {
    spec.validate()?;
    let n = spec.sample_count()?;
    let mut points = Vec::with_capacity(n as usize);
    for k in 0..n {
        let raw = spec.raw_value(k, spec.level)?;
        points.push((spec.time_at(k, n), spec.price_of(raw)));
    }
    Ok(WaveCurve { spec: spec.clone(), points })
}

/// Counts the vertices `k = 1..p^L-1` where the chord slope changes. The
/// last vertex is compared against the continuation sample `k = p^L`
/// (evaluated with one more digit, as in forecasting), so a wave whose
/// consecutive chords all differ has `p^L - 1` breakpoints.
pub fn breakpoint_count(spec: &WaveSpec) -> Result<usize> {
    let curve = wave_generate(spec)?;
    let n = curve.points.len() as u64;
    let mut ys = curve.ys();
    ys.push(spec.price_of(spec.raw_value(n, spec.level + 1)?));
    let changes = ys
        .windows(3)
        .filter(|w| {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            (d1 - d2).abs() > 1e-9 * d1.abs().max(d2.abs()).max(f64::MIN_POSITIVE)
        })
        .count();
    Ok(changes)
}
