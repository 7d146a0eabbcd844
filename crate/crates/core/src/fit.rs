//! Fitting p-adic waves to price series and extrapolating them.
//!
//! The outer search is exhaustive over the discrete parameters (prime,
//! level, map kind, `C`, `B`, degree) and a grid of fractal dimensions;
//! the best grid dimension of each discrete candidate is then refined by
//! golden-section search. For every trial wave the price transform
//! `y = offset + scale * wave` is solved in closed form by least squares.
//!
//! Candidates are scored on the series itself (after resampling onto a
//! uniform time grid with the series' own length): a level-`L` wave has
//! `p^L` samples spanning the series' time window and is linearly
//! interpolated between them. When the series has exactly `p^L` points,
//! sample `k` lines up with wave index `k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PAdicNumber, Prime};
use crate::series::PriceSeries;
use crate::waves::{map_digits, MapKind, PriceAffine, TimeWindow, WaveSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Evenly spaced fractal-dimension grid `start, start + step, ..., <= stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DimGrid {
    /// Grid points snapped to 1e-9 so that decimal steps land on the
    /// nearest double (0.2 + 28 * 0.05 gives exactly 1.6).
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub primes: Vec<Prime>,
    pub levels: Vec<u32>,
    pub dims: DimGrid,
    pub dim_tolerance: f64,
    pub map_kinds: Vec<MapKind>,
    /// `C` candidates; `None` means `1..p-1`.
    pub slopes: Option<Vec<i64>>,
    /// `B` candidates; `None` means `0..p-1`.
    pub intercepts: Option<Vec<i64>>,
    pub degrees: Vec<u32>,
    /// Fit `ln(price)` instead of price.
    pub log_transform: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            primes: vec![Prime::new(2).unwrap(), Prime::new(3).unwrap()],
            levels: (1..=5).collect(),
            dims: DimGrid { start: 0.2, stop: 3.0, step: 0.05 },
            dim_tolerance: 1e-3,
            map_kinds: vec![MapKind::DigitPower, MapKind::ScalePower],
            slopes: None,
            intercepts: None,
            degrees: vec![1],
            log_transform: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() || self.levels.is_empty() || self.map_kinds.is_empty() || self.degrees.is_empty() {
            return Err(Error::domain("fit grids must be nonempty"));
        }
        if self.levels.contains(&0) || self.degrees.contains(&0) {
            return Err(Error::domain("levels and degrees must be at least 1"));
        }
        let DimGrid { start, stop, step } = self.dims;
        if !(start > 0.0 && stop >= start && step > 0.0) {
            return Err(Error::domain("dimension grid must be positive and increasing"));
        }
        if !(self.dim_tolerance > 0.0) {
            return Err(Error::domain("dimension tolerance must be positive"));
        }
        if matches!(&self.slopes, Some(v) if v.is_empty()) || matches!(&self.intercepts, Some(v) if v.is_empty()) {
            return Err(Error::domain("C and B candidate sets must be nonempty"));
        }
        Ok(())
    }
}

/// One evaluated discrete candidate with its best dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub p: Prime,
    pub level: u32,
    pub map_kind: MapKind,
    pub slope: i64,
    pub intercept: i64,
    pub degree: u32,
    pub dim: f64,
    pub offset: f64,
    pub scale: f64,
    pub rmse: f64,
}

impl Candidate {
    /// Total order used for the final choice: rmse, then p, L, D, C, B, kind, degree.
    fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rmse
            .total_cmp(&other.rmse)
            .then(self.p.cmp(&other.p))
            .then(self.level.cmp(&other.level))
            .then(self.dim.total_cmp(&other.dim))
            .then(self.slope.cmp(&other.slope))
            .then(self.intercept.cmp(&other.intercept))
            .then(self.map_kind.cmp(&other.map_kind))
            .then(self.degree.cmp(&other.degree))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resampling {
    pub points: usize,
    pub start: f64,
    pub end: f64,
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema_version: u32,
    pub version: String,
    pub spec: WaveSpec,
    pub rmse: f64,
    pub log_transform: bool,
    /// Constant input: every candidate fits with zero scale.
    pub degenerate: bool,
    pub warnings: Vec<String>,
    pub resampling: Resampling,
    pub diagnostics: Vec<Candidate>,
    #[serde(default)]
    pub input_fingerprint: Option<String>,
}

/// Root mean squared difference.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::domain(format!(
            "rmse needs equal nonempty lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((ss / a.len() as f64).sqrt())
}

/// Linear interpolation of `(times, values)` onto `n` evenly spaced times
/// spanning the input. Needs at least two input points.
pub fn resample_points(times: &[f64], values: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::domain("resampling needs at least 2 points"));
    }
    if times.len() < 2 || times.len() != values.len() {
        return Err(Error::domain("resampling needs matching inputs with at least 2 points"));
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let mut out_t = Vec::with_capacity(n);
    let mut out_v = Vec::with_capacity(n);
    for i in 0..n {
        let t = if i == n - 1 {
            t1
        } else {
            t0 + (t1 - t0) * i as f64 / (n - 1) as f64
        };
        let j = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1) - 1;
        let frac = (t - times[j]) / (times[j + 1] - times[j]);
        out_t.push(t);
        out_v.push(values[j] + (values[j + 1] - values[j]) * frac);
    }
    Ok((out_t, out_v))
}

/// [`resample_points`] on a validated series; `n` must keep the result a
/// valid series (at least 4 points).
pub fn resample(series: &PriceSeries, n: usize) -> Result<PriceSeries> {
    let (times, values) = resample_points(series.timestamps(), series.values(), n)?;
    PriceSeries::new(times, values, series.label())
}

struct Problem {
    target: Vec<f64>,
    constant: bool,
}

struct Discrete {
    p: Prime,
    level: u32,
    kind: MapKind,
    slope: i64,
    intercept: i64,
    degree: u32,
}

impl Discrete {
    fn spec(&self, dim: f64) -> WaveSpec {
        WaveSpec {
            p: self.p,
            dim,
            level: self.level,
            slope: self.slope,
            intercept: self.intercept,
            map_kind: self.kind,
            degree: self.degree,
            time_window: TimeWindow { start: 0.0, end: 1.0 },
            price_affine: PriceAffine { offset: 0.0, scale: 1.0 },
        }
    }
}

/// Digit strings of `(C k^m + B) mod p^L` for every wave index; these do not
/// depend on the dimension so they are computed once per candidate.
fn wave_digits(d: &Discrete) -> Result<Vec<Vec<u64>>> {
    let spec = d.spec(1.0);
    (0..spec.sample_count()?)
        .map(|k| {
            let w = spec.residue(k, d.level)?;
            Ok(PAdicNumber::integer_digits(w, d.p, d.level as usize))
        })
        .collect()
}

/// Where each of `n` uniform samples falls on a `len`-sample wave: an
/// exact index or a pair of neighbours with a weight.
enum Tap {
    Exact(usize),
    Between(usize, f64),
}

fn taps(n: usize, len: usize) -> Vec<Tap> {
    (0..n)
        .map(|i| {
            let num = i * (len - 1);
            let den = n - 1;
            if num.is_multiple_of(den) {
                Tap::Exact(num / den)
            } else {
                let pos = num as f64 / den as f64;
                let j = pos.floor() as usize;
                Tap::Between(j, pos - j as f64)
            }
        })
        .collect()
}

/// Closed-form least-squares affine fit of `target` on `x`: returns
/// `(offset, scale, rmse)`.
fn affine_fit(x: &[f64], problem: &Problem) -> (f64, f64, f64) {
    let y = &problem.target;
    let n = y.len() as f64;
    let ym = y.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let scale = if problem.constant || sxx == 0.0 { 0.0 } else { sxy / sxx };
    let offset = ym - scale * xm;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = offset + scale * a - b;
            r * r
        })
        .sum();
    (offset, scale, (ss / n).sqrt())
}

struct Evaluator<'a> {
    d: Discrete,
    digits: Vec<Vec<u64>>,
    taps: Vec<Tap>,
    problem: &'a Problem,
}

impl Evaluator<'_> {
    fn eval(&self, dim: f64) -> (f64, f64, f64) {
        let raw: Vec<f64> = self
            .digits
            .iter()
            .map(|ds| map_digits(ds, self.d.p.get(), dim, self.d.kind))
            .collect();
        let x: Vec<f64> = self
            .taps
            .iter()
            .map(|t| match *t {
                Tap::Exact(k) => raw[k],
                Tap::Between(k, w) => raw[k] + (raw[k + 1] - raw[k]) * w,
            })
            .collect();
        affine_fit(&x, self.problem)
    }

    fn candidate(&self, dim: f64, (offset, scale, rmse): (f64, f64, f64)) -> Candidate {
        Candidate {
            p: self.d.p,
            level: self.d.level,
            map_kind: self.d.kind,
            slope: self.d.slope,
            intercept: self.d.intercept,
            degree: self.d.degree,
            dim,
            offset,
            scale,
            rmse,
        }
    }

    /// Best grid point, then golden-section refinement inside its
    /// neighbouring grid cells; the refined point is kept only if it is
    /// strictly better.
    fn best(&self, grid: &[f64], tol: f64) -> Candidate {
        let scored: Vec<(f64, (f64, f64, f64))> = grid.iter().map(|&d| (d, self.eval(d))).collect();
        let (i_best, _) = scored
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1 .2.total_cmp(&b.1 .1 .2).then(a.0.cmp(&b.0)))
            .expect("nonempty grid");
        let (d_best, fit_best) = scored[i_best];
        let mut best = self.candidate(d_best, fit_best);
        let lo = grid[i_best.saturating_sub(1)];
        let hi = grid[(i_best + 1).min(grid.len() - 1)];
        if hi > lo {
            let d = golden_section(|d| self.eval(d).2, lo, hi, tol);
            let fit = self.eval(d);
            if fit.2 < best.rmse {
                best = self.candidate(d, fit);
            }
        }
        best
    }
}

/// Minimizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

fn discrete_candidates(cfg: &FitConfig) -> Vec<Discrete> {
    let mut out = Vec::new();
    for &p in &cfg.primes {
        let slopes = cfg.slopes.clone().unwrap_or_else(|| (1..p.get() as i64).collect());
        let intercepts = cfg.intercepts.clone().unwrap_or_else(|| (0..p.get() as i64).collect());
        for &level in &cfg.levels {
            for &kind in &cfg.map_kinds {
                for &degree in &cfg.degrees {
                    for &slope in &slopes {
                        for &intercept in &intercepts {
                            out.push(Discrete { p, level, kind, slope, intercept, degree });
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn fit(series: &PriceSeries, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let n = series.len();
    let uniform = resample(series, n)?;
    let target: Vec<f64> = if cfg.log_transform {
        uniform.values().iter().map(|v| v.ln()).collect()
    } else {
        uniform.values().to_vec()
    };
    let constant = target.iter().all(|&v| v == target[0]);
    let problem = Problem { target, constant };
    let grid = cfg.dims.points();

    let discrete = discrete_candidates(cfg);
    for d in &discrete {
        d.spec(1.0).sample_count()?;
    }
    let diagnostics: Vec<Candidate> = discrete
        .into_par_iter()
        .map(|d| {
            let digits = wave_digits(&d)?;
            let ev = Evaluator {
                taps: taps(n, digits.len()),
                digits,
                d,
                problem: &problem,
            };
            Ok(ev.best(&grid, cfg.dim_tolerance))
        })
        .collect::<Result<_>>()?;

    let best = diagnostics
        .iter()
        .min_by(|a, b| a.rank_cmp(b))
        .expect("at least one candidate")
        .clone();
    if !best.rmse.is_finite() {
        return Err(Error::Numerical("fit produced a non-finite residual".into()));
    }
    let mut warnings = Vec::new();
    if constant {
        warnings.push("constant series: every candidate fits with zero scale".to_string());
    }
    let spec = WaveSpec {
        p: best.p,
        dim: best.dim,
        level: best.level,
        slope: best.slope,
        intercept: best.intercept,
        map_kind: best.map_kind,
        degree: best.degree,
        time_window: TimeWindow {
            start: series.first_time(),
            end: series.last_time(),
        },
        price_affine: PriceAffine {
            offset: best.offset,
            scale: best.scale,
        },
    };
    Ok(FitResult {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec,
        rmse: best.rmse,
        log_transform: cfg.log_transform,
        degenerate: constant,
        warnings,
        resampling: Resampling {
            points: n,
            start: series.first_time(),
            end: series.last_time(),
            spacing: (series.last_time() - series.first_time()) / (n - 1) as f64,
        },
        diagnostics,
        input_fingerprint: None,
    })
}

/// Fitted values at wave indices `ks`, continuing the digit precision as far
/// as each index needs.
fn evaluate(fit: &FitResult, ks: impl Iterator<Item = u64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = &fit.spec;
    let samples = spec.sample_count()?;
    let p = spec.p.get();
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    for k in ks {
        let mut digits = spec.level;
        while p.checked_pow(digits).is_some_and(|m| m <= k) {
            digits += 1;
        }
        let mut y = spec.price_of(spec.raw_value(k, digits)?);
        if fit.log_transform {
            y = y.exp();
        }
        if !y.is_finite() {
            return Err(Error::Numerical(format!("non-finite fitted value at index {k}")));
        }
        ts.push(spec.time_at(k, samples));
        ys.push(y);
    }
    Ok((ts, ys))
}

/// In-sample fitted wave (`p^L` points).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Forecast {
    pub timestamps: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn fitted_curve(fit: &FitResult) -> Result<Forecast> {
    let n = fit.spec.sample_count()?;
    let (timestamps, values) = evaluate(fit, 0..n)?;
    Ok(Forecast { timestamps, values })
}

/// Continues the fitted wave to indices `p^L .. p^L + horizon - 1`, with
/// the digit precision raised to `ceil(log_p(k + 1))` where needed and the
/// time axis extended at the fitted spacing.
pub fn forecast(fit: &FitResult, horizon: usize) -> Result<Forecast> {
    if horizon == 0 {
        return Err(Error::domain("forecast horizon must be at least 1"));
    }
    let n = fit.spec.sample_count()?;
    let (timestamps, values) = evaluate(fit, n..n + horizon as u64)?;
    Ok(Forecast { timestamps, values })
}
