//! The `adelic-market` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
//! Results go to `--out` (written atomically) or stdout.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::adele::{
    adele_char, chi_inf_exact, chi_p, eval_test_function, frac_part, omega, weyl_apply, AdelePoint, LatticeFunction,
    PhasePoint,
};
use crate::error::{Error, Result};
use crate::fit::{fit, fitted_curve, forecast, FitConfig, FitResult, SCHEMA_VERSION};
use crate::io::config::Config;
use crate::io::csv::{bars_from_closes, forecast_csv, parse_csv, points_csv, write_ohlc};
use crate::io::svg::{render_svg, PlotSeries, PlotSpec};
use crate::io::{fingerprint, write_atomic};
use crate::minority::{attendance_csv, mg_init, price_from_attendance, sweep, HistoryMode, MgConfig, DEFAULT_LAMBDA};
use crate::padic::{expand, padic_norm, product_formula, support, valuation, Place, Prime, Rational};
use crate::waves::{wave_generate, MapKind, PriceAffine, TimeWindow, WaveSpec};

#[derive(Debug, Parser)]
#[command(name = "adelic-market", version, about = "p-adic waves, adelic characters and minority-game markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a p-adic wave.
    Gen(GenArgs),
    /// Fit a wave to a price file.
    Fit(FitArgs),
    /// Extend a fitted wave past the data.
    Forecast(ForecastArgs),
    /// Run a minority-game market.
    Mg(MgArgs),
    /// p-adic expansions, norms and valuations.
    #[command(subcommand)]
    Padic(PadicCommand),
    /// Adelic characters, product formula and Weyl operators.
    #[command(subcommand)]
    Adele(AdeleCommand),
}

#[derive(Debug, Args)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render a chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WaveFormat {
    /// `t,y`
    Wave,
    /// OHLC price file
    Ohlc,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_prime)]
    p: Prime,
    #[arg(long)]
    level: u32,
    #[arg(long, allow_negative_numbers = true)]
    dim: f64,
    /// Slope `C`.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    c: i64,
    /// Intercept `B`.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    b: i64,
    /// Monomial degree `m` in `C k^m + B`.
    #[arg(long, default_value_t = 1)]
    degree: u32,
    #[arg(long, default_value = "digit-power", value_parser = parse_map_kind)]
    map: MapKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    y_scale: f64,
    #[arg(long, value_enum, default_value_t = WaveFormat::Wave)]
    format: WaveFormat,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// OHLC price file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "close")]
    column: String,
    /// TOML file with a `[fit]` table.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fit log prices.
    #[arg(long)]
    log: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    /// FitResult JSON.
    #[arg(long)]
    fit: PathBuf,
    #[arg(long)]
    horizon: usize,
    /// Price file to draw under the forecast in the chart.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "close")]
    column: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MgFormat {
    /// `t,A,price`
    Series,
    /// OHLC price file; volume counts the agents choosing +1.
    Ohlc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HistoryArg {
    Endogenous,
    Exogenous,
}

#[derive(Debug, Args)]
struct MgArgs {
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    memory: u32,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    strategies: usize,
    #[arg(long, value_enum, default_value_t = HistoryArg::Endogenous)]
    history: HistoryArg,
    /// Initial price.
    #[arg(long, default_value_t = 100.0)]
    p0: f64,
    /// Log-price response to attendance.
    #[arg(long, default_value_t = DEFAULT_LAMBDA, allow_negative_numbers = true)]
    lambda: f64,
    /// Timestamp of the first step (epoch seconds).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, value_enum, default_value_t = MgFormat::Series)]
    format: MgFormat,
    /// Run this many seeds (`seed`, `seed + 1`, ...) and print a JSON summary.
    #[arg(long)]
    sweep: Option<u64>,
    /// Steps discarded before measuring volatility in a sweep.
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Subcommand)]
enum PadicCommand {
    /// Canonical digit expansion.
    Expand {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = parse_prime)]
        p: Prime,
        #[arg(long, default_value_t = 8)]
        precision: usize,
    },
    /// `|x|_p`; `--p inf` gives the absolute value.
    Norm {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = parse_place)]
        p: Place,
    },
    Valuation {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = parse_prime)]
        p: Prime,
    },
}

#[derive(Debug, Subcommand)]
enum AdeleCommand {
    /// Additive character of a rational at every place and their product.
    Char {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        /// Finite places; defaults to the primes dividing the denominator and numerator.
        #[arg(long, value_delimiter = ',', value_parser = parse_prime)]
        primes: Vec<Prime>,
    },
    /// Norms at every place and their product.
    ProductFormula {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
    },
    /// Fractional part `{x}_p`.
    Frac {
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = parse_prime)]
        p: Prime,
    },
    /// Evaluate a preset test function at the diagonal embedding of `x`.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Rational,
    },
    /// Apply `W(q, k)` to a function on `p^-N Z_p / p^N Z_p`.
    Weyl {
        #[arg(long, value_parser = parse_prime)]
        p: Prime,
        #[arg(long)]
        window: u32,
        #[arg(long, allow_hyphen_values = true)]
        q: Rational,
        #[arg(long, allow_hyphen_values = true)]
        k: Rational,
        /// `coset,re,im` CSV; defaults to the indicator of `Z_p`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_prime(s: &str) -> std::result::Result<Prime, String> {
    let n: u64 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    Prime::new(n).map_err(|e| e.to_string())
}

fn parse_place(s: &str) -> std::result::Result<Place, String> {
    match s {
        "inf" | "∞" => Ok(Place::Real),
        _ => parse_prime(s).map(Place::Finite),
    }
}

fn parse_map_kind(s: &str) -> std::result::Result<MapKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI on `argv` (including the program name) against the process
/// stdout/stderr and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a, out),
        Command::Fit(a) => fit_cmd(a, out),
        Command::Forecast(a) => forecast_cmd(a, out),
        Command::Mg(a) => mg(a, out),
        Command::Padic(c) => padic(c, out),
        Command::Adele(c) => adele(c, out),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<()> {
    let spec = WaveSpec {
        slope: a.c,
        intercept: a.b,
        map_kind: a.map,
        degree: a.degree,
        time_window: TimeWindow { start: a.t0, end: a.t1 },
        price_affine: PriceAffine { offset: a.y0, scale: a.y_scale },
        ..WaveSpec::new(a.p, a.dim, a.level)
    };
    let curve = wave_generate(&spec)?;
    let text = match a.format {
        WaveFormat::Wave => points_csv(&curve.points),
        WaveFormat::Ohlc => {
            let (ts, ys): (Vec<f64>, Vec<f64>) = curve.points.iter().copied().unzip();
            write_ohlc(&bars_from_closes(&ts, &ys, ys[0], None))
        }
    };
    if let Some(svg) = &a.output.svg {
        let label = format!("p={} L={} D={} m={}", spec.p, spec.level, spec.dim, spec.degree);
        render_svg(&PlotSpec::new(vec![PlotSeries::new(label, curve.points.clone())]), svg)?;
    }
    emit(a.output.out.as_deref(), &text, out)
}

fn fit_cmd(a: FitArgs, out: &mut dyn Write) -> Result<()> {
    let bytes = std::fs::read(&a.input)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse("input is not UTF-8".into()))?;
    let series = parse_csv(&text, &a.column)?;
    let mut cfg = match &a.config {
        Some(path) => Config::load(path)?.fit,
        None => FitConfig::default(),
    };
    cfg.log_transform |= a.log;
    let mut result = fit(&series, &cfg)?;
    result.input_fingerprint = Some(fingerprint(&bytes));
    if let Some(svg) = &a.output.svg {
        let data = series.timestamps().iter().copied().zip(series.values().iter().copied()).collect();
        let wave = fitted_curve(&result)?;
        let plot = PlotSpec::new(vec![PlotSeries::new("data", data), PlotSeries::new("wave", zip(&wave.timestamps, &wave.values))]);
        render_svg(&plot, svg)?;
    }
    let mut json = serde_json::to_string_pretty(&result)?;
    json.push('\n');
    emit(a.output.out.as_deref(), &json, out)
}

fn zip(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

fn load_fit(path: &Path) -> Result<FitResult> {
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(Error::Schema(format!("fit schema version {v}, expected {SCHEMA_VERSION}"))),
        None => return Err(Error::Schema("fit file has no schema_version".into())),
    }
    let result: FitResult = serde_json::from_value(value)?;
    result.spec.validate()?;
    Ok(result)
}

fn forecast_cmd(a: ForecastArgs, out: &mut dyn Write) -> Result<()> {
    let result = load_fit(&a.fit)?;
    let fitted = fitted_curve(&result)?;
    let ahead = forecast(&result, a.horizon)?;
    if let Some(svg) = &a.output.svg {
        let mut series = Vec::new();
        if let Some(input) = &a.input {
            let data = parse_csv(&std::fs::read_to_string(input)?, &a.column)?;
            series.push(PlotSeries::new("data", zip(data.timestamps(), data.values())));
        }
        series.push(PlotSeries::new("wave", zip(&fitted.timestamps, &fitted.values)));
        // join the forecast to the last fitted point so the lines connect
        let mut tail = vec![(*fitted.timestamps.last().unwrap(), *fitted.values.last().unwrap())];
        tail.extend(zip(&ahead.timestamps, &ahead.values));
        series.push(PlotSeries::new("forecast", tail).dashed());
        render_svg(&PlotSpec::new(series), svg)?;
    }
    emit(a.output.out.as_deref(), &forecast_csv(&fitted, &ahead), out)
}

fn mg(a: MgArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = MgConfig {
        strategies: a.strategies,
        history: match a.history {
            HistoryArg::Endogenous => HistoryMode::Endogenous,
            HistoryArg::Exogenous => HistoryMode::Exogenous,
        },
        ..MgConfig::new(a.agents, a.memory, a.steps, a.seed)
    };
    cfg.validate()?;
    if let Some(count) = a.sweep {
        if count == 0 {
            return Err(Error::Domain("sweep needs at least one seed".into()));
        }
        let configs: Vec<MgConfig> = (0..count)
            .map(|i| MgConfig { seed: a.seed.wrapping_add(i), ..cfg.clone() })
            .collect();
        let mut json = serde_json::to_string_pretty(&sweep(&configs, a.burn_in)?)?;
        json.push('\n');
        return emit(a.output.out.as_deref(), &json, out);
    }
    if !(a.spacing > 0.0 && a.spacing.is_finite()) {
        return Err(Error::Domain("spacing must be positive".into()));
    }
    let mut state = mg_init(&cfg)?;
    state.run(cfg.steps);
    let attendance = state.attendance();
    let series = price_from_attendance(attendance, a.p0, a.lambda, a.start, a.spacing)?;
    let text = match a.format {
        MgFormat::Series => attendance_csv(attendance, series.values()),
        MgFormat::Ohlc => {
            let buyers: Vec<f64> = state
                .net_actions()
                .iter()
                .map(|&net| ((cfg.agents as i64 + net) / 2) as f64)
                .collect();
            write_ohlc(&bars_from_closes(series.timestamps(), series.values(), a.p0, Some(&buyers)))
        }
    };
    if let Some(svg) = &a.output.svg {
        let label = format!("N={} M={} seed={}", cfg.agents, cfg.memory, cfg.seed);
        render_svg(&PlotSpec::new(vec![PlotSeries::new(label, zip(series.timestamps(), series.values()))]), svg)?;
    }
    emit(a.output.out.as_deref(), &text, out)
}

fn padic(cmd: PadicCommand, out: &mut dyn Write) -> Result<()> {
    let text = match cmd {
        PadicCommand::Expand { x, p, precision } => format!("{}\n", expand(&x, p, precision)?),
        PadicCommand::Norm { x, p } => format!("{}\n", padic_norm(&x, p)),
        PadicCommand::Valuation { x, p } => format!("{}\n", valuation(&x, p)?),
    };
    Ok(out.write_all(text.as_bytes())?)
}

fn complex(z: Complex64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

fn adele(cmd: AdeleCommand, out: &mut dyn Write) -> Result<()> {
    let mut text = String::new();
    match cmd {
        AdeleCommand::Char { x, primes } => {
            let primes = if primes.is_empty() { support(&x)? } else { primes };
            let _ = writeln!(text, "∞\t{}", complex(chi_inf_exact(&x)));
            for &p in &primes {
                let _ = writeln!(text, "{p}\t{}", complex(chi_p(&x, p)));
            }
            let _ = writeln!(text, "product\t{}", complex(adele_char(&x, &primes)?));
        }
        AdeleCommand::ProductFormula { x } => {
            let pf = product_formula(&x)?;
            for (place, norm) in &pf.factors {
                let _ = writeln!(text, "{place}\t{norm}");
            }
            let _ = writeln!(text, "product\t{}", pf.product);
        }
        AdeleCommand::Frac { x, p } => {
            let _ = writeln!(text, "{}", frac_part(&x, p));
        }
        AdeleCommand::Eval { config, preset, x } => {
            let cfg = Config::load(&config)?;
            let f = &cfg.preset(&preset)?.function;
            let point = AdelePoint::new(x.to_f64(), f.finite.iter().map(|e| (e.prime, x.clone())));
            let _ = writeln!(text, "{}", complex(eval_test_function(f, &point)?));
        }
        AdeleCommand::Weyl { p, window, q, k, input, out: path } => {
            let psi = match input {
                Some(path) => LatticeFunction::from_csv(p, window, &std::fs::read_to_string(path)?)?,
                None => LatticeFunction::from_fn(p, window, |x| Complex64::new(omega(x, p), 0.0))?,
            };
            let image = weyl_apply(&PhasePoint::new(q, k), &psi)?;
            return emit(path.as_deref(), &image.to_csv(), out);
        }
    }
    Ok(out.write_all(text.as_bytes())?)
}
