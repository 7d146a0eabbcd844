//! Python bindings. Rationals cross the boundary as `"a/b"` strings so no
//! float ever enters the exact arithmetic.

use adelic_market::{adele, fit, io, minority, padic, waves, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::Numerical(msg) => PyArithmeticError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rational(s: &str) -> PyResult<padic::Rational> {
    s.parse().map_err(py_err)
}

fn prime(p: u64) -> PyResult<padic::Prime> {
    padic::Prime::new(p).map_err(py_err)
}

/// `v_p(x)`.
#[pyfunction]
fn valuation(x: &str, p: u64) -> PyResult<i64> {
    padic::valuation(&rational(x)?, prime(p)?).map_err(py_err)
}

/// `|x|_p` as an exact `"a/b"` string; `p=None` is the real absolute value.
#[pyfunction]
#[pyo3(signature = (x, p=None))]
fn padic_norm(x: &str, p: Option<u64>) -> PyResult<String> {
    let place = match p {
        Some(p) => padic::Place::Finite(prime(p)?),
        None => padic::Place::Real,
    };
    Ok(padic::padic_norm(&rational(x)?, place).to_string())
}

/// `[(place, norm), ...]` over the real place and every prime of `x`, then
/// `("product", "1")`.
#[pyfunction]
fn product_formula(x: &str) -> PyResult<Vec<(String, String)>> {
    let pf = padic::product_formula(&rational(x)?).map_err(py_err)?;
    let mut rows: Vec<(String, String)> = pf.factors.iter().map(|(pl, n)| (pl.to_string(), n.to_string())).collect();
    rows.push(("product".into(), pf.product.to_string()));
    Ok(rows)
}

/// Truncated p-adic number `p^v (a_0 + a_1 p + ...)`.
#[pyclass(name = "PAdicNumber", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPAdic(padic::PAdicNumber);

#[pymethods]
impl PyPAdic {
    #[new]
    #[pyo3(signature = (x, p, precision=16))]
    fn new(x: &str, p: u64, precision: usize) -> PyResult<Self> {
        padic::expand(&rational(x)?, prime(p)?, precision).map(Self).map_err(py_err)
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.prime().get()
    }

    #[getter]
    fn valuation(&self) -> i64 {
        self.0.valuation()
    }

    #[getter]
    fn digits(&self) -> Vec<u64> {
        self.0.digits().to_vec()
    }

    #[getter]
    fn precision(&self) -> usize {
        self.0.precision()
    }

    #[getter]
    fn absolute_precision(&self) -> i64 {
        self.0.absolute_precision()
    }

    /// The truncated value as an `"a/b"` string.
    fn to_rational(&self) -> String {
        self.0.to_rational().to_string()
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.add(&other.0).map(Self).map_err(py_err)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.sub(&other.0).map(Self).map_err(py_err)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.mul(&other.0).map(Self).map_err(py_err)
    }

    fn __truediv__(&self, other: &Self) -> PyResult<Self> {
        self.0.div(&other.0).map(Self).map_err(py_err)
    }

    fn __neg__(&self) -> Self {
        Self(self.0.neg())
    }

    fn __repr__(&self) -> String {
        format!("PAdicNumber({})", self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Canonical expansion of `x` to `precision` digits.
#[pyfunction]
#[pyo3(signature = (x, p, precision=16))]
fn expand(x: &str, p: u64, precision: usize) -> PyResult<PyPAdic> {
    PyPAdic::new(x, p, precision)
}

/// Digit map of the integer `n` (its first `digits` base-`p` digits).
#[pyfunction]
#[pyo3(signature = (n, p, dim, digits=32, kind="digit-power"))]
fn real_map(n: &str, p: u64, dim: f64, digits: usize, kind: &str) -> PyResult<f64> {
    let x = padic::expand(&rational(n)?, prime(p)?, digits).map_err(py_err)?;
    waves::real_map(&x, dim, kind.parse().map_err(py_err)?).map_err(py_err)
}

/// Full wave parameterisation; `generate()` samples it.
#[pyclass(name = "WaveSpec", skip_from_py_object)]
#[derive(Clone)]
struct PyWaveSpec(waves::WaveSpec);

#[pymethods]
impl PyWaveSpec {
    #[new]
    #[pyo3(signature = (p, dim, level, slope=1, intercept=0, degree=1, map_kind="digit-power", t0=0.0, t1=1.0, y0=0.0, y_scale=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        p: u64,
        dim: f64,
        level: u32,
        slope: i64,
        intercept: i64,
        degree: u32,
        map_kind: &str,
        t0: f64,
        t1: f64,
        y0: f64,
        y_scale: f64,
    ) -> PyResult<Self> {
        let spec = waves::WaveSpec {
            slope,
            intercept,
            degree,
            map_kind: map_kind.parse().map_err(py_err)?,
            time_window: waves::TimeWindow { start: t0, end: t1 },
            price_affine: waves::PriceAffine { offset: y0, scale: y_scale },
            ..waves::WaveSpec::new(prime(p)?, dim, level)
        };
        spec.validate().map_err(py_err)?;
        Ok(Self(spec))
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.p.get()
    }

    #[getter]
    fn dim(&self) -> f64 {
        self.0.dim
    }

    #[getter]
    fn level(&self) -> u32 {
        self.0.level
    }

    #[getter]
    fn slope(&self) -> i64 {
        self.0.slope
    }

    #[getter]
    fn intercept(&self) -> i64 {
        self.0.intercept
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree
    }

    #[getter]
    fn map_kind(&self) -> String {
        self.0.map_kind.to_string()
    }

    /// `(offset, scale)` of the price transform.
    #[getter]
    fn price_affine(&self) -> (f64, f64) {
        (self.0.price_affine.offset, self.0.price_affine.scale)
    }

    /// `(times, values)` at the `p^L` samples.
    fn generate(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let curve = waves::wave_generate(&self.0).map_err(py_err)?;
        Ok(curve.points.into_iter().unzip())
    }

    fn breakpoint_count(&self) -> PyResult<usize> {
        waves::breakpoint_count(&self.0).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json_string(&self.0)
    }

    fn __repr__(&self) -> String {
        let s = &self.0;
        format!(
            "WaveSpec(p={}, dim={}, level={}, slope={}, intercept={}, degree={}, map_kind='{}')",
            s.p, s.dim, s.level, s.slope, s.intercept, s.degree, s.map_kind
        )
    }
}

fn serde_json_string<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| py_err(e.into()))
}

/// Result of fitting a wave to a price series.
#[pyclass(name = "FitResult", frozen)]
struct PyFitResult(fit::FitResult);

#[pymethods]
impl PyFitResult {
    #[getter]
    fn spec(&self) -> PyWaveSpec {
        PyWaveSpec(self.0.spec.clone())
    }

    #[getter]
    fn rmse(&self) -> f64 {
        self.0.rmse
    }

    #[getter]
    fn degenerate(&self) -> bool {
        self.0.degenerate
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    /// In-sample fitted curve `(times, values)`.
    fn fitted(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let f = fit::fitted_curve(&self.0).map_err(py_err)?;
        Ok((f.timestamps, f.values))
    }

    /// The next `horizon` points past the data.
    fn forecast(&self, horizon: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let f = fit::forecast(&self.0, horizon).map_err(py_err)?;
        Ok((f.timestamps, f.values))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json_string(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("FitResult(rmse={:e}, spec={})", self.0.rmse, PyWaveSpec(self.0.spec.clone()).__repr__())
    }
}

/// Fits a wave to `(timestamps, values)`. `config` is TOML text with an
/// optional `[fit]` table.
#[pyfunction(name = "fit")]
#[pyo3(signature = (timestamps, values, config=None, log=false))]
fn fit_series(timestamps: Vec<f64>, values: Vec<f64>, config: Option<&str>, log: bool) -> PyResult<PyFitResult> {
    let series = adelic_market::series::PriceSeries::new(timestamps, values, "close").map_err(py_err)?;
    let mut cfg = match config {
        Some(text) => io::config::Config::parse(text).map_err(py_err)?.fit,
        None => fit::FitConfig::default(),
    };
    cfg.log_transform |= log;
    fit::fit(&series, &cfg).map(PyFitResult).map_err(py_err)
}

/// `(timestamps, values)` of one column of an OHLC price file.
#[pyfunction]
#[pyo3(signature = (path, column="close"))]
fn load_csv(path: std::path::PathBuf, column: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = io::csv::load_csv(&path, column).map_err(py_err)?;
    Ok((s.timestamps().to_vec(), s.values().to_vec()))
}

/// Additive character `chi_p(x) = exp(2 pi i {x}_p)`.
#[pyfunction]
fn chi_p(x: &str, p: u64) -> PyResult<Complex64> {
    Ok(adele::chi_p(&rational(x)?, prime(p)?))
}

/// `{x}_p` as an `"a/b"` string.
#[pyfunction]
fn frac_part(x: &str, p: u64) -> PyResult<String> {
    Ok(adele::frac_part(&rational(x)?, prime(p)?).to_string())
}

/// Product of the characters at infinity and at `primes`.
#[pyfunction]
fn adele_char(x: &str, primes: Vec<u64>) -> PyResult<Complex64> {
    let primes = primes.into_iter().map(prime).collect::<PyResult<Vec<_>>>()?;
    adele::adele_char(&rational(x)?, &primes).map_err(py_err)
}

/// `W(q, k)` applied to `values` on `p^-N Z_p / p^N Z_p` (index `j` is the
/// coset of `j / p^N`).
#[pyfunction]
fn weyl_apply(p: u64, window: u32, q: &str, k: &str, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let psi = adele::LatticeFunction::new(prime(p)?, window, values).map_err(py_err)?;
    let z = adele::PhasePoint::new(rational(q)?, rational(k)?);
    Ok(adele::weyl_apply(&z, &psi).map_err(py_err)?.values().to_vec())
}

/// Scalar `c` in `W(z) W(w) = c W(z + w)`.
#[pyfunction]
fn composition_phase(p: u64, z: (String, String), w: (String, String)) -> PyResult<Complex64> {
    let point = |(q, k): (String, String)| -> PyResult<adele::PhasePoint> {
        Ok(adele::PhasePoint::new(rational(&q)?, rational(&k)?))
    };
    Ok(adele::composition_phase(&point(z)?, &point(w)?, prime(p)?))
}

/// A seeded minority-game market.
#[pyclass(name = "MinorityGame")]
struct PyMinorityGame(minority::MgState);

#[pymethods]
impl PyMinorityGame {
    #[new]
    #[pyo3(signature = (agents, memory, seed, strategies=2, history="endogenous"))]
    fn new(agents: usize, memory: u32, seed: u64, strategies: usize, history: &str) -> PyResult<Self> {
        let history = match history {
            "endogenous" => minority::HistoryMode::Endogenous,
            "exogenous" => minority::HistoryMode::Exogenous,
            other => return Err(PyValueError::new_err(format!("unknown history mode {other:?}"))),
        };
        let cfg = minority::MgConfig {
            strategies,
            history,
            ..minority::MgConfig::new(agents, memory, 0, seed)
        };
        minority::mg_init(&cfg).map(Self).map_err(py_err)
    }

    /// Plays `steps` rounds and returns their attendances.
    fn run(&mut self, steps: usize) -> Vec<f64> {
        let start = self.0.time();
        self.0.run(steps)[start..].to_vec()
    }

    #[getter]
    fn attendance(&self) -> Vec<f64> {
        self.0.attendance().to_vec()
    }

    #[getter]
    fn scores(&self) -> Vec<i64> {
        self.0.scores().to_vec()
    }

    /// `+1` where an agent last played strategy 0, else `-1`.
    fn spins(&self) -> Vec<i8> {
        self.0.current_spins()
    }

    /// `sigma^2 / N` over steps `burn_in..`.
    #[pyo3(signature = (burn_in=0))]
    fn volatility(&self, burn_in: usize) -> PyResult<f64> {
        self.0.volatility_per_agent(burn_in).map_err(py_err)
    }

    /// `(lhs, rhs)` of the spin-glass identity for the game's tables.
    fn spin_identity(&self, spins: Vec<i8>) -> PyResult<(f64, f64)> {
        let id = minority::spin_decompose(self.0.tables(), &spins).map_err(py_err)?;
        Ok((id.lhs, id.rhs))
    }

    /// Prices `p0 * exp(lambda * cumulative attendance)`.
    #[pyo3(signature = (p0=100.0, lambda_=minority::DEFAULT_LAMBDA))]
    fn prices(&self, p0: f64, lambda_: f64) -> PyResult<Vec<f64>> {
        minority::log_price_path(self.0.attendance(), p0, lambda_).map_err(py_err)
    }
}

#[pymodule]
#[pyo3(name = "adelic_market")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPAdic>()?;
    m.add_class::<PyWaveSpec>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PyMinorityGame>()?;
    m.add_function(wrap_pyfunction!(valuation, m)?)?;
    m.add_function(wrap_pyfunction!(padic_norm, m)?)?;
    m.add_function(wrap_pyfunction!(product_formula, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(real_map, m)?)?;
    m.add_function(wrap_pyfunction!(fit_series, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(chi_p, m)?)?;
    m.add_function(wrap_pyfunction!(frac_part, m)?)?;
    m.add_function(wrap_pyfunction!(adele_char, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_apply, m)?)?;
    m.add_function(wrap_pyfunction!(composition_phase, m)?)?;
    Ok(())
}
