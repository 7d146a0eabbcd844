//! Minority game with `N` agents, memory `M` (so `K = 2^M` histories) and
//! `S` strategies per agent.
//!
//! Each step every agent plays the action its best-scoring strategy
//! prescribes for the current history `mu`. The normalized attendance is
//! `A = N^-1/2 * sum_i a_i`; the minority side wins, every strategy's
//! virtual score moves by `-a * sign(A)`, and the winning side is appended
//! to the history.
//!
//! With two strategies per agent the action decomposes as
//! `a_i = omega_i + s_i xi_i` with `omega = (a^1 + a^2)/2`,
//! `xi = (a^1 - a^2)/2` and spin `s_i = +1` selecting the first strategy.
//! Averaging `A^2` uniformly over the `K` histories then gives the
//! spin-glass form
//!
//! ```text
//! <A^2> = c + (1/N) [ sum_i h_i s_i + 1/2 sum_ij J_ij s_i s_j ]
//! c = <Omega^2> / N,  h_i = 2 <Omega xi_i>,  J_ij = 2 <xi_i xi_j>
//! ```
//!
//! where `Omega = sum_j omega_j`. For i.i.d. random tables `E[c] = 1/2`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::PriceSeries;

/// Default log-price sensitivity to attendance.
pub const DEFAULT_LAMBDA: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryMode {
    /// The real history of winning sides.
    #[default]
    Endogenous,
    /// A fresh uniformly random history every step.
    Exogenous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgConfig {
    pub agents: usize,
    pub memory: u32,
    pub strategies: usize,
    pub steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub history: HistoryMode,
}

impl MgConfig {
    pub fn new(agents: usize, memory: u32, steps: usize, seed: u64) -> Self {
        MgConfig {
            agents,
            memory,
            strategies: 2,
            steps,
            seed,
            history: HistoryMode::Endogenous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 || self.strategies == 0 || self.memory == 0 {
            return Err(Error::domain("agents, memory and strategies must be positive"));
        }
        if self.memory > 24 {
            return Err(Error::domain("memory above 24 bits is not supported"));
        }
        Ok(())
    }

    pub fn histories(&self) -> usize {
        1 << self.memory
    }
}

/// Strategy tables `a_i^{s,mu}` in `{-1, +1}`, agent-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTables {
    agents: usize,
    strategies: usize,
    histories: usize,
    data: Vec<i8>,
}

impl StrategyTables {
    pub fn new(agents: usize, strategies: usize, histories: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != agents * strategies * histories {
            return Err(Error::domain("strategy table size does not match its shape"));
        }
        if data.iter().any(|&a| a != 1 && a != -1) {
            return Err(Error::domain("strategy actions must be +1 or -1"));
        }
        Ok(StrategyTables {
            agents,
            strategies,
            histories,
            data,
        })
    }

    fn random(agents: usize, strategies: usize, histories: usize, rng: &mut impl Rng) -> Self {
        let data = (0..agents * strategies * histories)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        StrategyTables {
            agents,
            strategies,
            histories,
            data,
        }
    }

    #[inline]
    pub fn action(&self, agent: usize, strategy: usize, mu: usize) -> i8 {
        self.data[(agent * self.strategies + strategy) * self.histories + mu]
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn strategies(&self) -> usize {
        self.strategies
    }

    pub fn histories(&self) -> usize {
        self.histories
    }

    pub fn negated(&self) -> Self {
        StrategyTables {
            data: self.data.iter().map(|a| -a).collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct MgState {
    cfg: MgConfig,
    tables: StrategyTables,
    scores: Vec<i64>,
    history: usize,
    choices: Vec<usize>,
    attendance: Vec<f64>,
    net_actions: Vec<i64>,
    rng: ChaCha8Rng,
}

/// Draws the strategy tables (agent, strategy, history order) and then the
/// initial history from a ChaCha8 stream seeded with `cfg.seed`.
pub fn mg_init(cfg: &MgConfig) -> Result<MgState> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tables = StrategyTables::random(cfg.agents, cfg.strategies, cfg.histories(), &mut rng);
    let history = rng.random_range(0..cfg.histories());
    Ok(MgState::assemble(cfg.clone(), tables, history, rng))
}

impl MgState {
    /// A state with given tables and starting history. The seed still drives
    /// tie-breaking and exogenous history draws.
    pub fn with_tables(cfg: &MgConfig, tables: StrategyTables, history: usize) -> Result<Self> {
        cfg.validate()?;
        if tables.agents != cfg.agents
            || tables.strategies != cfg.strategies
            || tables.histories != cfg.histories()
            || history >= cfg.histories()
        {
            return Err(Error::domain("tables do not match the configuration"));
        }
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self::assemble(cfg.clone(), tables, history, rng))
    }

    fn assemble(cfg: MgConfig, tables: StrategyTables, history: usize, rng: ChaCha8Rng) -> Self {
        MgState {
            scores: vec![0; cfg.agents * cfg.strategies],
            choices: vec![0; cfg.agents],
            attendance: Vec::with_capacity(cfg.steps),
            net_actions: Vec::with_capacity(cfg.steps),
            cfg,
            tables,
            history,
            rng,
        }
    }

    pub fn config(&self) -> &MgConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &StrategyTables {
        &self.tables
    }

    pub fn history(&self) -> usize {
        self.history
    }

    pub fn scores(&self) -> &[i64] {
        &self.scores
    }

    /// Strategy each agent played in the last step.
    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn attendance(&self) -> &[f64] {
        &self.attendance
    }

    /// Unnormalized `sum_i a_i` per step.
    pub fn net_actions(&self) -> &[i64] {
        &self.net_actions
    }

    pub fn time(&self) -> usize {
        self.attendance.len()
    }

    /// Plays one round and returns its attendance `A(t)`.
    pub fn step(&mut self) -> f64 {
        let (n, s_count, mu) = (self.cfg.agents, self.cfg.strategies, self.history);
        let mut net: i64 = 0;
        for i in 0..n {
            let scores = &self.scores[i * s_count..(i + 1) * s_count];
            let mut best = 0;
            for s in 1..s_count {
                if scores[s] > scores[best] {
                    best = s;
                }
            }
            self.choices[i] = best;
            net += self.tables.action(i, best, mu) as i64;
        }
        let attendance = net as f64 / (n as f64).sqrt();
        let sign = net.signum();
        if sign != 0 {
            for i in 0..n {
                for s in 0..s_count {
                    self.scores[i * s_count + s] -= self.tables.action(i, s, mu) as i64 * sign;
                }
            }
        }
        let minority_buys = match sign {
            0 => self.rng.random::<bool>(),
            _ => sign < 0,
        };
        let k = self.cfg.histories();
        self.history = match self.cfg.history {
            HistoryMode::Endogenous => (2 * mu + minority_buys as usize) % k,
            HistoryMode::Exogenous => self.rng.random_range(0..k),
        };
        self.attendance.push(attendance);
        self.net_actions.push(net);
        attendance
    }

    pub fn run(&mut self, steps: usize) -> &[f64] {
        for _ in 0..steps {
            self.step();
        }
        &self.attendance
    }

    /// Spin of each agent's last choice: `+1` for strategy 0, `-1` for 1.
    pub fn current_spins(&self) -> Vec<i8> {
        self.choices.iter().map(|&c| if c == 0 { 1 } else { -1 }).collect()
    }

    /// Volatility of the normalized attendance over steps `burn_in..`,
    /// which equals the unnormalized variance per agent, `sigma^2 / N`.
    pub fn volatility_per_agent(&self, burn_in: usize) -> Result<f64> {
        sigma2(self.attendance.get(burn_in..).unwrap_or(&[]))
    }
}

/// `<A^2> - <A>^2` with uniform weights over the window.
pub fn sigma2(window: &[f64]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::domain("volatility of an empty window"));
    }
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    Ok(window.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinDecomposition {
    pub agents: usize,
    pub histories: usize,
    /// `omega_i^mu`, agent-major.
    pub omega: Vec<f64>,
    /// `xi_i^mu`, agent-major.
    pub xi: Vec<f64>,
    /// `h_i = 2 <Omega xi_i>`.
    pub field: Vec<f64>,
    /// `J_ij = 2 <xi_i xi_j>`, row-major, symmetric.
    pub coupling: Vec<f64>,
    /// `<Omega^2> / N`; its expectation over random tables is 1/2.
    pub constant: f64,
}

impl SpinDecomposition {
    pub fn from_tables(tables: &StrategyTables) -> Result<Self> {
        if tables.strategies != 2 {
            return Err(Error::Unsupported(format!(
                "spin decomposition needs exactly 2 strategies, got {}",
                tables.strategies
            )));
        }
        let (n, k) = (tables.agents, tables.histories);
        let mut omega = vec![0.0; n * k];
        let mut xi = vec![0.0; n * k];
        for i in 0..n {
            for mu in 0..k {
                let (a1, a2) = (tables.action(i, 0, mu) as f64, tables.action(i, 1, mu) as f64);
                omega[i * k + mu] = (a1 + a2) / 2.0;
                xi[i * k + mu] = (a1 - a2) / 2.0;
            }
        }
        let big_omega: Vec<f64> = (0..k).map(|mu| (0..n).map(|j| omega[j * k + mu]).sum()).collect();
        let kf = k as f64;
        let field = (0..n)
            .map(|i| 2.0 * (0..k).map(|mu| big_omega[mu] * xi[i * k + mu]).sum::<f64>() / kf)
            .collect();
        let mut coupling = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let c = 2.0 * (0..k).map(|mu| xi[i * k + mu] * xi[j * k + mu]).sum::<f64>() / kf;
                coupling[i * n + j] = c;
                coupling[j * n + i] = c;
            }
        }
        let constant = big_omega.iter().map(|o| o * o).sum::<f64>() / kf / n as f64;
        Ok(SpinDecomposition {
            agents: n,
            histories: k,
            omega,
            xi,
            field,
            coupling,
            constant,
        })
    }

    /// Right-hand side `c + (1/N)[sum h s + 1/2 sum J s s]`.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let n = self.agents;
        let linear: f64 = self.field.iter().zip(spins).map(|(h, &s)| h * s as f64).sum();
        let mut quadratic = 0.0;
        for i in 0..n {
            for j in 0..n {
                quadratic += self.coupling[i * n + j] * (spins[i] * spins[j]) as f64;
            }
        }
        self.constant + (linear + 0.5 * quadratic) / n as f64
    }

    /// `omega_i^mu + s xi_i^mu`.
    pub fn action(&self, agent: usize, mu: usize, spin: i8) -> f64 {
        let idx = agent * self.histories + mu;
        self.omega[idx] + spin as f64 * self.xi[idx]
    }
}

/// `<A^2>` over histories with every agent locked to the strategy its spin selects.
pub fn mean_square_attendance(tables: &StrategyTables, spins: &[i8]) -> f64 {
    let n = tables.agents;
    let total: f64 = (0..tables.histories)
        .map(|mu| {
            let net: i64 = (0..n)
                .map(|i| tables.action(i, if spins[i] > 0 { 0 } else { 1 }, mu) as i64)
                .sum();
            (net * net) as f64 / n as f64
        })
        .sum();
    total / tables.histories as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinIdentity {
    pub decomposition: SpinDecomposition,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn spin_decompose(tables: &StrategyTables, spins: &[i8]) -> Result<SpinIdentity> {
    if spins.len() != tables.agents || spins.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::domain("one spin in {-1, +1} per agent required"));
    }
    let decomposition = SpinDecomposition::from_tables(tables)?;
    let lhs = mean_square_attendance(tables, spins);
    let rhs = decomposition.energy(spins);
    Ok(SpinIdentity { decomposition, lhs, rhs })
}

/// `p0 * exp(lambda * sum_{u<=t} A(u))` for every step.
pub fn log_price_path(attendance: &[f64], p0: f64, lambda: f64) -> Result<Vec<f64>> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(Error::domain("initial price must be positive"));
    }
    let mut cumulative = 0.0;
    let path: Vec<f64> = attendance
        .iter()
        .map(|a| {
            cumulative += a;
            p0 * (lambda * cumulative).exp()
        })
        .collect();
    if let Some(t) = path.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::Numerical(format!("price left the representable range at step {t}")));
    }
    Ok(path)
}

/// Price series with timestamps `start + t * spacing`.
pub fn price_from_attendance(
    attendance: &[f64],
    p0: f64,
    lambda: f64,
    start: f64,
    spacing: f64,
) -> Result<PriceSeries> {
    let prices = log_price_path(attendance, p0, lambda)?;
    let times = (0..prices.len()).map(|t| start + t as f64 * spacing).collect();
    PriceSeries::new(times, prices, "close")
}

/// CSV with columns `t,A,price`.
pub fn attendance_csv(attendance: &[f64], prices: &[f64]) -> String {
    let mut out = String::from("t,A,price\n");
    for (t, (a, p)) in attendance.iter().zip(prices).enumerate() {
        let _ = writeln!(out, "{t},{a},{p}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub config: MgConfig,
    pub sigma2_per_agent: f64,
    pub mean_attendance: f64,
    pub normalization: &'static str,
}

pub const NORMALIZATION_NOTE: &str =
    "A = N^-1/2 sum_i a_i; sigma2 = <A^2> - <A>^2 with uniform time averages, equal to the raw attendance variance per agent";

/// Runs each configuration independently (in parallel) and summarizes the
/// volatility after `burn_in` steps. Output order matches input order.
pub fn sweep(configs: &[MgConfig], burn_in: usize) -> Result<Vec<SweepSummary>> {
    configs
        .par_iter()
        .map(|cfg| {
            let mut state = mg_init(cfg)?;
            state.run(cfg.steps);
            let window = state.attendance().get(burn_in..).unwrap_or(&[]);
            Ok(SweepSummary {
                config: cfg.clone(),
                sigma2_per_agent: sigma2(window)?,
                mean_attendance: window.iter().sum::<f64>() / window.len() as f64,
                normalization: NORMALIZATION_NOTE,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_shapes_and_determinism() {
        let s = mg_init(&MgConfig::new(1, 1, 0, 7)).unwrap();
        assert_eq!(s.tables().data.len(), 2 * 2);
        let a = mg_init(&MgConfig::new(3, 2, 0, 42)).unwrap();
        let b = mg_init(&MgConfig::new(3, 2, 0, 42)).unwrap();
        assert_eq!(a.tables(), b.tables());
        assert_eq!(a.tables().data.len(), 3 * 2 * 4);
        assert_eq!(a.history(), b.history());
        assert!(a.scores().iter().all(|&s| s == 0));
    }

    #[test]
    fn single_agent_is_always_majority() {
        let mut s = mg_init(&MgConfig::new(1, 2, 0, 3)).unwrap();
        s.run(50);
        // the lone agent always loses, so both of its strategies keep losing
        assert!(s.attendance().iter().all(|a| a.abs() == 1.0));
        assert!(s.net_actions().iter().all(|&n| n == 1 || n == -1));
    }

    #[test]
    fn herd_attendance() {
        let n = 5;
        let cfg = MgConfig::new(n, 1, 0, 1);
        let row = [1i8, -1, -1, 1];
        let data: Vec<i8> = (0..n).flat_map(|_| row).collect();
        let tables = StrategyTables::new(n, 2, 2, data).unwrap();
        let mut s = MgState::with_tables(&cfg, tables, 0).unwrap();
        for _ in 0..20 {
            let a = s.step();
            assert!((a.abs() - (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma2_examples() {
        assert_eq!(sigma2(&[2.5; 10]).unwrap(), 0.0);
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((sigma2(&alt).unwrap() - 1.0).abs() < 1e-15);
        assert!(sigma2(&[]).is_err());
    }

    #[test]
    fn identical_strategies_decouple() {
        let data = vec![1, -1, 1, -1, 1, 1, -1, -1];
        let tables = StrategyTables::new(2, 2, 2, data).unwrap();
        let d = SpinDecomposition::from_tables(&tables).unwrap();
        assert!(d.xi[..2].iter().all(|&x| x == 0.0));
        let up = spin_decompose(&tables, &[1, 1]).unwrap();
        let down = spin_decompose(&tables, &[-1, 1]).unwrap();
        assert_eq!(up.lhs, down.lhs);
    }

    #[test]
    fn decomposition_requires_two_strategies() {
        let tables = StrategyTables::new(1, 3, 2, vec![1; 6]).unwrap();
        assert!(matches!(
            SpinDecomposition::from_tables(&tables),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn price_path() {
        assert_eq!(log_price_path(&[0.0; 5], 100.0, DEFAULT_LAMBDA).unwrap(), vec![100.0; 5]);
        let n = 9f64;
        let p = log_price_path(&[n.sqrt()], 50.0, DEFAULT_LAMBDA).unwrap();
        assert!((p[0] / 50.0 - (DEFAULT_LAMBDA * n.sqrt()).exp()).abs() < 1e-15);
        assert!(log_price_path(&[1.0], 0.0, 0.01).is_err());
        let series = price_from_attendance(&[1.0, -1.0, 0.5, 0.0], 10.0, 0.01, 1000.0, 60.0).unwrap();
        assert_eq!(series.timestamps(), &[1000.0, 1060.0, 1120.0, 1180.0]);
    }
}
