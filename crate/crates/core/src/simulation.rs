//! Monte Carlo comparison of the estimators: bias and MSE per
//! `(method, alpha, n)` cell.
//!
//! Every replication is seeded from `(base_seed, alpha, n, sigma)` and its
//! index, and aggregates are reduced in replication order, so a run gives the
//! same numbers whether replications execute serially or on a thread pool.
//! All methods in a cell see the same samples.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::design::IntervalDesign;
use crate::ecf::ExactCf;
use crate::error::{Error, Result};
use crate::estimators::{Estimate, Estimator, GridOls, InfiniteLs, Method, DEFAULT_K, DEFAULT_KOUTROUVELIS_POINTS};
use crate::model::StableParams;
use crate::rng::StableSampler;

pub const CSV_HEADER: &str = "method,alpha_true,n,target,mean,bias,mse,clamp_rate,failures";

/// Parameter whose estimates are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    #[default]
    Alpha,
    Sigma,
}

impl Target {
    pub fn name(&self) -> &'static str {
        match self {
            Target::Alpha => "alpha",
            Target::Sigma => "sigma",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "alpha" => Ok(Target::Alpha),
            "sigma" => Ok(Target::Sigma),
            other => Err(Error::Config(format!("target must be alpha or sigma, got `{other}`"))),
        }
    }
}

/// Where responses come from in a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseKind {
    /// Draw a stable sample and use its empirical characteristic function.
    #[default]
    Empirical,
    /// Use the exact characteristic function; every replication is identical.
    ExactCf,
}

impl FromStr for ResponseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "empirical" => Ok(ResponseKind::Empirical),
            "exact-cf" => Ok(ResponseKind::ExactCf),
            other => Err(Error::Config(format!("response must be empirical or exact-cf, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub alphas: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub x0: f64,
    pub d: f64,
    pub k: usize,
    /// True scale of the simulated law.
    pub sigma: f64,
    /// Per-(alpha, n) number of Koutrouvelis points; missing cells fall back
    /// to [`DEFAULT_KOUTROUVELIS_POINTS`], which is not tuned.
    pub koutrouvelis_points: Vec<(f64, usize, usize)>,
    pub base_seed: u64,
    pub target: Target,
    pub response: ResponseKind,
    /// Grid sizes for a K sweep; empty for an ordinary run.
    pub k_values: Vec<usize>,
    pub out: Option<PathBuf>,
    pub markdown: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            alphas: vec![1.5],
            sample_sizes: vec![100],
            replications: 2000,
            methods: vec![Method::InfiniteLs],
            x0: 0.1,
            d: 1.9,
            k: DEFAULT_K,
            sigma: 1.0,
            koutrouvelis_points: Vec::new(),
            base_seed: 20_250_101,
            target: Target::Alpha,
            response: ResponseKind::Empirical,
            k_values: Vec::new(),
            out: None,
            markdown: false,
        }
    }
}

pub const CONFIG_KEYS: [&str; 15] = [
    "alphas",
    "ns",
    "reps",
    "methods",
    "x0",
    "d",
    "K",
    "seed",
    "target",
    "sigma",
    "koutrouvelis_points",
    "k_values",
    "response",
    "out",
    "markdown",
];

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse `{s}`"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

impl SimConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies a single setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "alphas" => self.alphas = parse_list(key, value)?,
            "ns" => self.sample_sizes = parse_list(key, value)?,
            "reps" => self.replications = parse_one(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<Method>().map_err(|e| Error::Config(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "x0" => self.x0 = parse_one(key, value)?,
            "d" => self.d = parse_one(key, value)?,
            "K" => self.k = parse_one(key, value)?,
            "seed" => self.base_seed = parse_one(key, value)?,
            "target" => self.target = value.parse()?,
            "sigma" => self.sigma = parse_one(key, value)?,
            "koutrouvelis_points" => {
                self.koutrouvelis_points = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|entry| {
                        let parts: Vec<&str> = entry.split(':').collect();
                        match parts.as_slice() {
                            [a, n, k] => Ok((parse_one(key, a)?, parse_one(key, n)?, parse_one(key, k)?)),
                            _ => Err(Error::Config(format!(
                                "koutrouvelis_points entries look like alpha:n:points, got `{entry}`"
                            ))),
                        }
                    })
                    .collect::<Result<_>>()?
            }
            "k_values" => self.k_values = parse_list(key, value)?,
            "response" => self.response = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "markdown" => self.markdown = parse_one(key, value)?,
            other => return Err(Error::UnknownConfigKey { key: other.to_string(), valid: CONFIG_KEYS.join(", ") }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.alphas.is_empty() {
            return bad("alphas must not be empty".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 2.0)) {
            return bad(format!("alpha {a} is outside (0, 2]"));
        }
        if self.sample_sizes.is_empty() {
            return bad("ns must not be empty".into());
        }
        if let Some(n) = self.sample_sizes.iter().find(|n| **n < 2) {
            return bad(format!("sample size {n} is below 2"));
        }
        if self.replications < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if let Some(&(_, _, k)) = self.koutrouvelis_points.iter().find(|e| e.2 < 2) {
            return bad(format!("koutrouvelis_points needs at least 2 points, got {k}"));
        }
        if let Some(k) = self.k_values.iter().find(|k| **k < 2) {
            return bad(format!("k_values entries must be at least 2, got {k}"));
        }
        InfiniteLs::new(self.design()?, self.k).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn design(&self) -> Result<IntervalDesign> {
        IntervalDesign::new(self.x0, self.d).map_err(|e| Error::Config(e.to_string()))
    }

    /// Koutrouvelis point count for a cell and whether it was supplied.
    pub fn koutrouvelis_points_for(&self, alpha: f64, n: usize) -> (usize, bool) {
        self.koutrouvelis_points
            .iter()
            .find(|(a, m, _)| *a == alpha && *m == n)
            .map(|&(_, _, k)| (k, true))
            .unwrap_or((DEFAULT_KOUTROUVELIS_POINTS, false))
    }
}

/// Aggregates for one `(method, alpha, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub method: Method,
    /// Grid size of an infinite-ls row in a K sweep.
    pub sweep_k: Option<usize>,
    pub koutrouvelis_points: Option<usize>,
    pub alpha_true: f64,
    pub n: usize,
    pub target: Target,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    /// Spread of the estimates around their own mean (1/m normaliser).
    pub variance: f64,
    /// Fraction of successful fits whose slope was clamped.
    pub clamp_rate: f64,
    pub failures: usize,
    pub replications: usize,
}

impl SimRow {
    pub fn label(&self) -> String {
        match self.sweep_k {
            Some(k) => format!("{}(K={k})", self.method),
            None => self.method.name().to_string(),
        }
    }

    pub fn successes(&self) -> usize {
        self.replications - self.failures
    }

    pub fn is_failed(&self) -> bool {
        self.successes() == 0
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub config: SimConfig,
    pub wall_time: Duration,
}

impl SimReport {
    pub fn empty(config: SimConfig) -> Self {
        Self { rows: Vec::new(), config, wall_time: Duration::ZERO }
    }

    pub fn find(&self, method: Method, alpha: f64, n: usize) -> Option<&SimRow> {
        self.rows.iter().find(|r| r.method == method && r.alpha_true == alpha && r.n == n)
    }
}

struct Planned {
    estimator: Box<dyn Estimator>,
    sweep_k: Option<usize>,
    koutrouvelis_points: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    value: f64,
    slope_clamped: bool,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for all replications of the `(alpha, n)` cell.
pub fn cell_seed(base_seed: u64, alpha: f64, n: usize, sigma: f64) -> u64 {
    mix64(mix64(mix64(base_seed ^ mix64(alpha.to_bits())) ^ n as u64) ^ sigma.to_bits())
}

fn target_value(est: &Estimate, target: Target) -> f64 {
    match target {
        Target::Alpha => est.alpha_hat,
        Target::Sigma => est.sigma_hat,
    }
}

fn run_cells(
    config: &SimConfig,
    exec: Execution,
    plan_for: impl Fn(f64, usize) -> Result<Vec<Planned>>,
) -> Result<SimReport> {
    config.validate()?;
    let start = Instant::now();
    let mut rows = Vec::new();
    for &n in &config.sample_sizes {
        for &alpha in &config.alphas {
            let params = StableParams::symmetric(alpha, config.sigma)?;
            let planned = plan_for(alpha, n)?;
            let seed = cell_seed(config.base_seed, alpha, n, config.sigma);
            let replicate = |r: usize| -> Vec<Option<Outcome>> {
                let fit = |est: &dyn Estimator| -> Option<Estimate> {
                    match config.response {
                        ResponseKind::ExactCf => est.fit_response(&ExactCf(params)).ok(),
                        ResponseKind::Empirical => None,
                    }
                };
                let sample = match config.response {
                    ResponseKind::Empirical => {
                        StableSampler::for_replication(params, seed, r as u64).and_then(|mut s| s.draw_sample(n)).ok()
                    }
                    ResponseKind::ExactCf => None,
                };
                planned
                    .iter()
                    .map(|p| {
                        let est = match &sample {
                            Some(s) => p.estimator.fit(s).ok(),
                            None => fit(p.estimator.as_ref()),
                        }?;
                        let value = target_value(&est, config.target);
                        value.is_finite().then_some(Outcome { value, slope_clamped: est.slope_clamped })
                    })
                    .collect()
            };
            let outcomes: Vec<Vec<Option<Outcome>>> = match exec {
                Execution::Serial => (0..config.replications).map(replicate).collect(),
                Execution::Parallel => (0..config.replications).into_par_iter().map(replicate).collect(),
            };
            let truth = match config.target {
                Target::Alpha => alpha,
                Target::Sigma => config.sigma,
            };
            for (i, p) in planned.iter().enumerate() {
                rows.push(aggregate(
                    outcomes.iter().map(|o| o[i]),
                    p,
                    alpha,
                    n,
                    config.target,
                    truth,
                    config.replications,
                ));
            }
        }
    }
    Ok(SimReport { rows, config: config.clone(), wall_time: start.elapsed() })
}

fn aggregate(
    outcomes: impl Iterator<Item = Option<Outcome>> + Clone,
    planned: &Planned,
    alpha: f64,
    n: usize,
    target: Target,
    truth: f64,
    replications: usize,
) -> SimRow {
    let (mut count, mut sum, mut clamped) = (0usize, 0.0, 0usize);
    for o in outcomes.clone().flatten() {
        count += 1;
        sum += o.value;
        clamped += usize::from(o.slope_clamped);
    }
    let (mean, mse, variance, clamp_rate) = if count == 0 {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let m = count as f64;
        let mean = sum / m;
        let (mut sq_truth, mut sq_mean) = (0.0, 0.0);
        for o in outcomes.flatten() {
            sq_truth += (o.value - truth).powi(2);
            sq_mean += (o.value - mean).powi(2);
        }
        (mean, sq_truth / m, sq_mean / m, clamped as f64 / m)
    };
    SimRow {
        method: planned.estimator.method(),
        sweep_k: planned.sweep_k,
        koutrouvelis_points: planned.koutrouvelis_points,
        alpha_true: alpha,
        n,
        target,
        truth,
        mean,
        bias: mean - truth,
        mse,
        variance,
        clamp_rate,
        failures: replications - count,
        replications,
    }
}

fn plan_method(config: &SimConfig, method: Method, alpha: f64, n: usize) -> Result<Planned> {
    Ok(match method {
        Method::InfiniteLs => Planned {
            estimator: Box::new(InfiniteLs::new(config.design()?, config.k)?),
            sweep_k: None,
            koutrouvelis_points: None,
        },
        Method::KogonWilliams => {
            Planned { estimator: Box::new(GridOls::kogon_williams()), sweep_k: None, koutrouvelis_points: None }
        }
        Method::Koutrouvelis => {
            let (k, _) = config.koutrouvelis_points_for(alpha, n);
            Planned { estimator: Box::new(GridOls::koutrouvelis(k)?), sweep_k: None, koutrouvelis_points: Some(k) }
        }
    })
}

pub fn run_simulation(config: &SimConfig) -> Result<SimReport> {
    run_simulation_with(config, Execution::Parallel)
}

pub fn run_simulation_with(config: &SimConfig, exec: Execution) -> Result<SimReport> {
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    run_cells(config, exec, |alpha, n| methods.iter().map(|&m| plan_method(config, m, alpha, n)).collect())
}

/// One infinite-ls row per grid size, for every `(alpha, n)` in the config.
pub fn k_sweep(config: &SimConfig, k_values: &[usize]) -> Result<SimReport> {
    k_sweep_with(config, k_values, Execution::Parallel)
}

pub fn k_sweep_with(config: &SimConfig, k_values: &[usize], exec: Execution) -> Result<SimReport> {
    if !config.methods.contains(&Method::InfiniteLs) {
        return Err(Error::Config("a K sweep needs infinite-ls among the methods".into()));
    }
    if k_values.is_empty() {
        return Err(Error::Config("a K sweep needs at least one K value".into()));
    }
    let design = config.design()?;
    run_cells(config, exec, |_, _| {
        k_values
            .iter()
            .map(|&k| {
                Ok(Planned {
                    estimator: Box::new(InfiniteLs::new(design, k)?),
                    sweep_k: Some(k),
                    koutrouvelis_points: None,
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

fn full(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn emit_report(report: &SimReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => emit_markdown(report),
    }
}

fn emit_csv(report: &SimReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.label(),
            r.alpha_true,
            r.n,
            r.target,
            full(r.mean),
            full(r.bias),
            full(r.mse),
            full(r.clamp_rate),
            r.failures
        );
    }
    out
}

fn emit_markdown(report: &SimReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "# Estimator comparison\n");
    let _ = writeln!(
        out,
        "replications = {}, seed = {}, sigma = {}, interval = [{}, {}], K = {}, wall time = {:.1} s\n",
        cfg.replications,
        cfg.base_seed,
        cfg.sigma,
        cfg.x0,
        cfg.x0 + cfg.d,
        cfg.k,
        report.wall_time.as_secs_f64()
    );

    let mut groups: Vec<(Target, usize)> = Vec::new();
    for r in &report.rows {
        if !groups.contains(&(r.target, r.n)) {
            groups.push((r.target, r.n));
        }
    }
    for (target, n) in groups {
        let rows: Vec<&SimRow> = report.rows.iter().filter(|r| r.target == target && r.n == n).collect();
        let mut columns: Vec<(Method, Option<usize>)> = Vec::new();
        for r in &rows {
            if !columns.contains(&(r.method, r.sweep_k)) {
                columns.push((r.method, r.sweep_k));
            }
        }
        columns.sort();
        let mut alphas: Vec<f64> = Vec::new();
        for r in &rows {
            if !alphas.contains(&r.alpha_true) {
                alphas.push(r.alpha_true);
            }
        }
        let symbol = match target {
            Target::Alpha => "α̂",
            Target::Sigma => "σ̂",
        };
        let _ = writeln!(out, "## {} estimates, n = {}\n", target, n);
        let mut header = String::from("| α |");
        let mut rule = String::from("|---|");
        for (method, k) in &columns {
            let title = match k {
                Some(k) => format!("{} (K={k})", method.title()),
                None => method.title().to_string(),
            };
            let _ = write!(header, " {title} {symbol} | Bias | MSE |");
            rule.push_str("---:|---:|---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for alpha in alphas {
            let mut line = format!("| {alpha} |");
            for col in &columns {
                match rows.iter().find(|r| r.alpha_true == alpha && (r.method, r.sweep_k) == *col) {
                    Some(r) if !r.is_failed() => {
                        let _ = write!(line, " {:.4} | {:.4} | {:.4} |", r.mean, r.bias, r.mse);
                    }
                    Some(_) => line.push_str(" failed | | |"),
                    None => line.push_str(" | | |"),
                }
            }
            let _ = writeln!(out, "{line}");
        }
        out.push('\n');
    }

    let mut notes: BTreeMap<String, ()> = BTreeMap::new();
    for r in &report.rows {
        if let Some(k) = r.koutrouvelis_points {
            let (_, supplied) = cfg.koutrouvelis_points_for(r.alpha_true, r.n);
            let kind = if supplied { "configured" } else { "default, not optimised" };
            notes.insert(format!("Koutrouvelis at α = {}, n = {}: {k} points ({kind})", r.alpha_true, r.n), ());
        }
    }
    if !notes.is_empty() {
        out.push_str("Notes:\n\n");
        for note in notes.keys() {
            let _ = writeln!(out, "- {note}");
        }
    }
    out.push_str("\nBias is mean estimate minus the true value.\n");
    out
}

/// One parsed line of a csv report.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub method: Method,
    pub sweep_k: Option<usize>,
    pub alpha_true: f64,
    pub n: usize,
    pub target: Target,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub clamp_rate: f64,
    pub failures: usize,
}

impl From<&SimRow> for CsvRow {
    fn from(r: &SimRow) -> Self {
        Self {
            method: r.method,
            sweep_k: r.sweep_k,
            alpha_true: r.alpha_true,
            n: r.n,
            target: r.target,
            mean: r.mean,
            bias: r.bias,
            mse: r.mse,
            clamp_rate: r.clamp_rate,
            failures: r.failures,
        }
    }
}

fn parse_label(label: &str) -> Result<(Method, Option<usize>)> {
    match label.split_once("(K=") {
        Some((m, rest)) => {
            let k = rest
                .strip_suffix(')')
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad method label `{label}`")))?;
            Ok((m.parse()?, Some(k)))
        }
        None => Ok((label.parse()?, None)),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Config(format!("unexpected csv header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(Error::Config(format!("csv row {} has {} fields", i + 2, f.len())));
            }
            let (method, sweep_k) = parse_label(f[0])?;
            Ok(CsvRow {
                method,
                sweep_k,
                alpha_true: parse_one("alpha_true", f[1])?,
                n: parse_one("n", f[2])?,
                target: f[3].parse()?,
                mean: parse_one("mean", f[4])?,
                bias: parse_one("bias", f[5])?,
                mse: parse_one("mse", f[6])?,
                clamp_rate: parse_one("clamp_rate", f[7])?,
                failures: parse_one("failures", f[8])?,
            })
        })
        .collect()
}
