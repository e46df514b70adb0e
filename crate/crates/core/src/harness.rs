//! Monte Carlo experiments, log-log slope fits and histogram ingestion.
//!
//! An experiment is described by an [`ExperimentConfig`] (usually parsed from
//! JSON with [`ExperimentConfig::from_json`]) and produces an [`ErrorReport`]
//! whose rows are written as CSV or JSON.
//!
//! Trials run in parallel, but every trial draws from its own substream keyed
//! by `(sweep index, trial index)` and results are aggregated in trial order,
//! so reports are bitwise identical for any number of threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::bounds::{oracle_plot_bound, quantization_bound, simplified_bound, total_error_bound};
use crate::distribution::DiscreteDistribution;
use crate::divergence::{closed_lambda_grid, frontier_integral_slices, frontier_sup_error_slices};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, Histogram};
use crate::family::GeneratorFamily;
use crate::io::{format_float, parse_histogram_csv};
use crate::quantize::{
    assign_to_centroids, greedy_partition, kmeans, oracle_partition, quantized_divergence, uniform_partition,
    DEFAULT_MAX_ITERS,
};
use crate::synth::{
    continuous_ground_truth, dirichlet_draw, sample_continuous, step_pmf, substream_seed, zipf_pmf, ContinuousSpec,
    DiscreteSampler, DistSpec, RngSpec,
};

/// CSV header of an [`ErrorReport`].
pub const REPORT_HEADER: &str = "sweep_name,sweep_value,estimator,metric,mean,stderr,trials,free_bound,oracle_bound";

const DEFAULT_TRIALS: usize = 100;
const DEFAULT_SEED: u64 = 0;
const DIRICHLET_KEY: u64 = 0xD1C4;
const KMEANS_KEY: u64 = 0x4B4D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    StatError,
    Smoothing,
    Quantizer,
    ContinuousKRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    FiAbsError,
    FrontierSupError,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Self::FiAbsError => "fi_abs_error",
            Self::FrontierSupError => "frontier_sup_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepName {
    N,
    K,
    R,
    Bins,
}

impl SweepName {
    pub fn name(&self) -> &'static str {
        match self {
            Self::N => "n",
            Self::K => "k",
            Self::R => "r",
            Self::Bins => "bins",
        }
    }
}

/// Quantizer compared by the quantizer experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Uniform,
    Greedy,
    Oracle,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Greedy => "greedy",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: SweepName,
    pub values: Vec<f64>,
}

/// A validated experiment description.
///
/// `fixed` holds the parameters not being swept: `k` and `n` for discrete
/// experiments, `n` or `r` for the continuous one, optionally `grid` (frontier
/// grid size) and `max_iters` (k-means).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub p_spec: DistSpec,
    pub q_spec: DistSpec,
    pub sweep: Sweep,
    pub fixed: BTreeMap<String, f64>,
    pub estimators: Vec<EstimatorKind>,
    pub strategies: Vec<Strategy>,
    pub trials: usize,
    pub metrics: Vec<Metric>,
    pub lambda0: f64,
    pub base_seed: u64,
    pub bound_scale: f64,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

fn get_str<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a str> {
    obj.get(field).ok_or_else(|| cfg_err(field, "missing"))?.as_str().ok_or_else(|| cfg_err(field, "expected a string"))
}

fn get_f64(v: &Value, field: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| cfg_err(field, "expected a number"))
}

fn string_list(obj: &Map<String, Value>, field: &str) -> Result<Option<Vec<String>>> {
    match obj.get(field) {
        None => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| cfg_err(field, "expected strings")))
            .collect::<Result<Vec<_>>>()
            .map(Some),
        Some(_) => Err(cfg_err(field, "expected an array of strings")),
    }
}

/// `count` log-spaced integers from `lo` to `hi` inclusive.
pub fn log_spaced_integers(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo.round()];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round()).collect()
}

fn is_positive_integer(x: f64) -> bool {
    x >= 1.0 && x.fract() == 0.0 && x <= 1e15
}

const KNOWN_FIELDS: [&str; 13] = [
    "experiment",
    "p_spec",
    "q_spec",
    "sweep",
    "fixed",
    "estimators",
    "strategies",
    "trials",
    "metrics",
    "lambda0",
    "base_seed",
    "bound_scale",
    "family",
];

impl ExperimentConfig {
    /// Parses and validates a JSON configuration. Errors name the offending
    /// field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        let obj = value.as_object().ok_or_else(|| cfg_err("<root>", "expected a JSON object"))?;
        if let Some(unknown) = obj.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
            return Err(cfg_err(unknown, "unknown field"));
        }
        if let Some(f) = obj.get("family") {
            let fam: GeneratorFamily = f
                .as_str()
                .ok_or_else(|| cfg_err("family", "expected a string"))?
                .parse()
                .map_err(|e: Error| cfg_err("family", e.to_string()))?;
            if fam != GeneratorFamily::FrontierIntegral {
                return Err(cfg_err("family", "experiments evaluate the frontier integral only (`fi`)"));
            }
        }

        let experiment = match get_str(obj, "experiment")? {
            "stat_error" => ExperimentKind::StatError,
            "smoothing" => ExperimentKind::Smoothing,
            "quantizer" => ExperimentKind::Quantizer,
            "continuous_k_rule" => ExperimentKind::ContinuousKRule,
            other => return Err(cfg_err("experiment", format!("unknown experiment `{other}`"))),
        };
        let p_spec: DistSpec = get_str(obj, "p_spec")?.parse().map_err(|e: Error| cfg_err("p_spec", e.to_string()))?;
        let q_spec: DistSpec = get_str(obj, "q_spec")?.parse().map_err(|e: Error| cfg_err("q_spec", e.to_string()))?;

        let sweep = Self::parse_sweep(obj.get("sweep").ok_or_else(|| cfg_err("sweep", "missing"))?)?;

        let mut fixed = BTreeMap::new();
        match obj.get("fixed") {
            None => {}
            Some(Value::Object(m)) => {
                for (k, v) in m {
                    let field = format!("fixed.{k}");
                    if !["k", "n", "r", "bins", "grid", "max_iters"].contains(&k.as_str()) {
                        return Err(cfg_err(&field, "unknown parameter"));
                    }
                    fixed.insert(k.clone(), get_f64(v, &field)?);
                }
            }
            Some(_) => return Err(cfg_err("fixed", "expected an object")),
        }

        let estimators = match string_list(obj, "estimators")? {
            Some(list) => list
                .iter()
                .map(|s| s.parse::<EstimatorKind>().map_err(|e| cfg_err("estimators", e.to_string())))
                .collect::<Result<Vec<_>>>()?,
            None if experiment == ExperimentKind::Smoothing => EstimatorKind::STANDARD.to_vec(),
            None => vec![EstimatorKind::Empirical],
        };
        let strategies = match string_list(obj, "strategies")? {
            Some(list) => list
                .iter()
                .map(|s| match s.as_str() {
                    "uniform" => Ok(Strategy::Uniform),
                    "greedy" => Ok(Strategy::Greedy),
                    "oracle" => Ok(Strategy::Oracle),
                    other => Err(cfg_err("strategies", format!("unknown strategy `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![Strategy::Uniform, Strategy::Greedy, Strategy::Oracle],
        };
        let metrics = match string_list(obj, "metrics")? {
            Some(list) => list
                .iter()
                .map(|s| match s.as_str() {
                    "fi_abs_error" => Ok(Metric::FiAbsError),
                    "frontier_sup_error" => Ok(Metric::FrontierSupError),
                    other => Err(cfg_err("metrics", format!("unknown metric `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![Metric::FiAbsError],
        };
        let trials = match obj.get("trials") {
            None => DEFAULT_TRIALS,
            Some(v) => {
                v.as_u64().filter(|t| *t >= 1).ok_or_else(|| cfg_err("trials", "expected a positive integer"))? as usize
            }
        };
        let lambda0 = match obj.get("lambda0") {
            None => crate::divergence::DEFAULT_LAMBDA0,
            Some(v) => get_f64(v, "lambda0")?,
        };
        let base_seed = match obj.get("base_seed") {
            None => DEFAULT_SEED,
            Some(v) => v.as_u64().ok_or_else(|| cfg_err("base_seed", "expected a nonnegative integer"))?,
        };
        let bound_scale = match obj.get("bound_scale") {
            None => 1.0,
            Some(v) => get_f64(v, "bound_scale")?,
        };
        let config = Self {
            experiment,
            p_spec,
            q_spec,
            sweep,
            fixed,
            estimators,
            strategies,
            trials,
            metrics,
            lambda0,
            base_seed,
            bound_scale,
        };
        config.validate()?;
        Ok(config)
    }

    fn parse_sweep(v: &Value) -> Result<Sweep> {
        let obj = v.as_object().ok_or_else(|| cfg_err("sweep", "expected an object"))?;
        if let Some(unknown) = obj.keys().find(|k| !["name", "values", "log_range"].contains(&k.as_str())) {
            return Err(cfg_err(&format!("sweep.{unknown}"), "unknown field"));
        }
        let name = match obj.get("name").and_then(Value::as_str) {
            Some("n") => SweepName::N,
            Some("k") => SweepName::K,
            Some("r") => SweepName::R,
            Some("bins") => SweepName::Bins,
            Some(other) => return Err(cfg_err("sweep.name", format!("unknown sweep parameter `{other}`"))),
            None => return Err(cfg_err("sweep.name", "missing or not a string")),
        };
        let values = match (obj.get("values"), obj.get("log_range")) {
            (Some(Value::Array(vals)), None) => {
                vals.iter().map(|v| get_f64(v, "sweep.values")).collect::<Result<Vec<_>>>()?
            }
            (None, Some(Value::Array(r))) if r.len() == 3 => {
                let lo = get_f64(&r[0], "sweep.log_range")?;
                let hi = get_f64(&r[1], "sweep.log_range")?;
                let count = r[2]
                    .as_u64()
                    .filter(|c| *c >= 1)
                    .ok_or_else(|| cfg_err("sweep.log_range", "third entry must be a positive count"))?;
                if !(lo > 0.0 && hi >= lo) {
                    return Err(cfg_err("sweep.log_range", "need 0 < lo <= hi"));
                }
                log_spaced_integers(lo, hi, count as usize)
            }
            (Some(_), Some(_)) => return Err(cfg_err("sweep", "give either `values` or `log_range`")),
            _ => return Err(cfg_err("sweep.values", "missing or malformed")),
        };
        if values.is_empty() {
            return Err(cfg_err("sweep.values", "empty"));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(cfg_err("sweep.values", "must be strictly increasing"));
        }
        Ok(Sweep { name, values })
    }

    fn validate(&self) -> Result<()> {
        let discrete = self.p_spec.is_discrete() && self.q_spec.is_discrete();
        let continuous = !self.p_spec.is_discrete() && !self.q_spec.is_discrete();
        let allowed: &[SweepName] = match self.experiment {
            ExperimentKind::StatError | ExperimentKind::Smoothing => &[SweepName::N, SweepName::K, SweepName::R],
            ExperimentKind::Quantizer => &[SweepName::Bins],
            ExperimentKind::ContinuousKRule => &[SweepName::N, SweepName::R],
        };
        if !allowed.contains(&self.sweep.name) {
            return Err(cfg_err(
                "sweep.name",
                format!("`{}` cannot be swept in this experiment", self.sweep.name.name()),
            ));
        }
        match self.experiment {
            ExperimentKind::ContinuousKRule => {
                if !continuous {
                    return Err(cfg_err("p_spec", "continuous_k_rule needs two continuous specs (gauss/t)"));
                }
            }
            _ => {
                if !discrete {
                    return Err(cfg_err("p_spec", "this experiment needs discrete specs (zipf/step/dir)"));
                }
            }
        }
        let integer_sweep = matches!(self.sweep.name, SweepName::N | SweepName::K | SweepName::Bins);
        for v in &self.sweep.values {
            if integer_sweep && !is_positive_integer(*v) {
                return Err(cfg_err("sweep.values", format!("{v} is not a positive integer")));
            }
            if self.sweep.name == SweepName::R && !(*v >= 0.0 && v.is_finite()) {
                return Err(cfg_err("sweep.values", format!("{v} is not a valid exponent")));
            }
        }
        if self.sweep.name == SweepName::R {
            if self.experiment != ExperimentKind::ContinuousKRule && !matches!(self.q_spec, DistSpec::Zipf(_)) {
                return Err(cfg_err("q_spec", "an `r` sweep sets the exponent of a zipf q_spec"));
            }
            if self.experiment == ExperimentKind::ContinuousKRule && self.sweep.values.iter().any(|r| *r <= 0.0) {
                return Err(cfg_err("sweep.values", "r must be positive"));
            }
        }
        let need = |key: &str| -> Result<f64> {
            self.fixed.get(key).copied().ok_or_else(|| cfg_err(&format!("fixed.{key}"), "missing"))
        };
        let need_int = |key: &str, min: f64| -> Result<()> {
            let v = need(key)?;
            if !is_positive_integer(v) || v < min {
                return Err(cfg_err(&format!("fixed.{key}"), format!("expected an integer >= {min}")));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::StatError | ExperimentKind::Smoothing => {
                if self.sweep.name != SweepName::K {
                    need_int("k", 1.0)?;
                }
                if self.sweep.name != SweepName::N {
                    need_int("n", 3.0)?;
                } else if self.sweep.values[0] < 3.0 {
                    return Err(cfg_err("sweep.values", "sample sizes must be at least 3"));
                }
                if self.estimators.is_empty() {
                    return Err(cfg_err("estimators", "empty"));
                }
            }
            ExperimentKind::Quantizer => {
                need_int("k", 2.0)?;
                let k = need("k")?;
                if self.sweep.values.iter().any(|b| *b < 2.0 || *b > k) {
                    return Err(cfg_err("sweep.values", "bins must lie in [2, k]"));
                }
                if self.strategies.is_empty() {
                    return Err(cfg_err("strategies", "empty"));
                }
            }
            ExperimentKind::ContinuousKRule => {
                if self.sweep.name == SweepName::N {
                    let r = need("r")?;
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(cfg_err("fixed.r", "must be positive"));
                    }
                } else {
                    need_int("n", 2.0)?;
                }
            }
        }
        if let Some(g) = self.fixed.get("grid") {
            if !is_positive_integer(*g) {
                return Err(cfg_err("fixed.grid", "expected a positive integer"));
            }
        }
        if let Some(g) = self.fixed.get("max_iters") {
            if !(g.fract() == 0.0 && *g >= 0.0) {
                return Err(cfg_err("fixed.max_iters", "expected a nonnegative integer"));
            }
        }
        if self.metrics.is_empty() {
            return Err(cfg_err("metrics", "empty"));
        }
        if matches!(self.experiment, ExperimentKind::Quantizer | ExperimentKind::ContinuousKRule)
            && self.metrics.contains(&Metric::FrontierSupError)
        {
            return Err(cfg_err("metrics", "frontier_sup_error is only available for discrete sampling experiments"));
        }
        if !(self.lambda0 > 0.0 && self.lambda0 < 0.5) {
            return Err(cfg_err("lambda0", "must lie in (0, 1/2)"));
        }
        if !(self.bound_scale > 0.0 && self.bound_scale.is_finite()) {
            return Err(cfg_err("bound_scale", "must be positive"));
        }
        Ok(())
    }

    fn fixed_usize(&self, key: &str, default: usize) -> usize {
        self.fixed.get(key).map_or(default, |v| *v as usize)
    }
}

/// One aggregated line of an experiment report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub sweep_name: String,
    pub sweep_value: f64,
    /// Estimator name, or quantization strategy for the quantizer experiment.
    pub estimator: String,
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; 0 for a single trial.
    pub stderr: f64,
    pub trials: usize,
    pub free_bound: Option<f64>,
    pub oracle_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(format_float(x)), Value::Number)
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.sweep_name,
                format_float(r.sweep_value),
                r.estimator,
                r.metric,
                format_float(r.mean),
                format_float(r.stderr),
                r.trials,
                opt_float(r.free_bound),
                opt_float(r.oracle_bound),
            );
        }
        out
    }

    /// JSON array of row objects with the CSV column names; missing bounds
    /// are `null` and infinities the string `"inf"`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("sweep_name".into(), Value::String(r.sweep_name.clone()));
                m.insert("sweep_value".into(), json_float(r.sweep_value));
                m.insert("estimator".into(), Value::String(r.estimator.clone()));
                m.insert("metric".into(), Value::String(r.metric.clone()));
                m.insert("mean".into(), json_float(r.mean));
                m.insert("stderr".into(), json_float(r.stderr));
                m.insert("trials".into(), Value::from(r.trials));
                m.insert("free_bound".into(), r.free_bound.map_or(Value::Null, json_float));
                m.insert("oracle_bound".into(), r.oracle_bound.map_or(Value::Null, json_float));
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("report serializes");
        s.push('\n');
        s
    }

    /// Rows matching an estimator and metric, in sweep order.
    pub fn series(&self, estimator: &str, metric: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.estimator == estimator && r.metric == metric).collect()
    }
}

/// Mean and standard error (unbiased variance) of `xs`.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `trial(t)` for `t in 0..trials` on `threads` workers (all available
/// when `None`), returning results in trial order.
fn run_trials<T: Send>(
    trials: usize,
    threads: Option<usize>,
    trial: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let work = || (0..trials).into_par_iter().map(&trial).collect::<Result<Vec<T>>>();
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Builds the pmf for a discrete spec on `k` atoms; Dirichlet draws are keyed
/// by `(base_seed, side, k)` so the pair stays fixed across trials and `n`.
fn discrete_pmf(spec: &DistSpec, k: usize, base_seed: u64, side: u64) -> Result<DiscreteDistribution> {
    match *spec {
        DistSpec::Zipf(r) => zipf_pmf(k, r),
        DistSpec::Step => step_pmf(k),
        DistSpec::Dirichlet(a) => {
            dirichlet_draw(a, k, &mut RngSpec::new(base_seed).substream(&[DIRICHLET_KEY, side, k as u64]))
        }
        DistSpec::Continuous(_) => Err(Error::Input("continuous spec in a discrete experiment".into())),
    }
}

/// The discrete pair `(P, Q)` for `k` atoms; `q_exponent` overrides the Zipf
/// exponent of `Q` in `r` sweeps.
pub fn discrete_pair(
    config: &ExperimentConfig,
    k: usize,
    q_exponent: Option<f64>,
) -> Result<(DiscreteDistribution, DiscreteDistribution)> {
    let p = discrete_pmf(&config.p_spec, k, config.base_seed, 0)?;
    let q_spec = match q_exponent {
        Some(r) => DistSpec::Zipf(r),
        None => config.q_spec,
    };
    let q = discrete_pmf(&q_spec, k, config.base_seed, 1)?;
    Ok((p, q))
}

/// Dispatches on the experiment kind. `threads = None` uses the global pool.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ErrorReport> {
    match config.experiment {
        ExperimentKind::StatError => run_stat_error(config, threads),
        ExperimentKind::Smoothing => run_smoothing(config, threads),
        ExperimentKind::Quantizer => run_quantizer(config),
        ExperimentKind::ContinuousKRule => run_continuous_k_rule(config, threads),
    }
}

fn require_kind(config: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    if kinds.contains(&config.experiment) {
        Ok(())
    } else {
        Err(cfg_err("experiment", "configuration is for a different experiment"))
    }
}

/// Statistical error of plug-in (or smoothed) frontier-integral estimates.
///
/// Per sweep value, every trial samples `n` points from each of `P` and `Q`,
/// applies each configured estimator to the same samples, and records the
/// requested metrics. `fi_abs_error` rows carry the constant-free bounds
/// `(sqrt(k/n) + k/n) ln n` (free) and `(alpha_P + alpha_Q) ln n + beta_P + beta_Q`
/// (oracle), scaled by `bound_scale`.
pub fn run_stat_error(config: &ExperimentConfig, threads: Option<usize>) -> Result<ErrorReport> {
    require_kind(config, &[ExperimentKind::StatError, ExperimentKind::Smoothing])?;
    let grid_size = config.fixed_usize("grid", crate::divergence::DEFAULT_FRONTIER_GRID);
    let lambda_grid = closed_lambda_grid(config.lambda0, grid_size)?;
    let rng = RngSpec::new(config.base_seed);
    let mut report = ErrorReport::default();

    for (idx, &value) in config.sweep.values.iter().enumerate() {
        let (k, n, q_exp) = match config.sweep.name {
            SweepName::N => (config.fixed_usize("k", 0), value as usize, None),
            SweepName::K => (value as usize, config.fixed_usize("n", 0), None),
            SweepName::R => (config.fixed_usize("k", 0), config.fixed_usize("n", 0), Some(value)),
            SweepName::Bins => unreachable!("rejected by validation"),
        };
        let (p, q) = discrete_pair(config, k, q_exp)?;
        let truth = frontier_integral_slices(p.masses(), q.masses());
        let (sp, sq) = (DiscreteSampler::new(&p), DiscreteSampler::new(&q));

        let per_trial = run_trials(config.trials, threads, |t| {
            let mut stream = rng.substream(&[idx as u64, t as u64]);
            let hp = Histogram::from_sample(&(0..n).map(|_| sp.sample(&mut stream)).collect::<Vec<_>>(), k)?;
            let hq = Histogram::from_sample(&(0..n).map(|_| sq.sample(&mut stream)).collect::<Vec<_>>(), k)?;
            let mut out = Vec::with_capacity(config.estimators.len() * config.metrics.len());
            for est in &config.estimators {
                let (ph, qh) = (est.estimate(&hp)?, est.estimate(&hq)?);
                for metric in &config.metrics {
                    out.push(match metric {
                        Metric::FiAbsError => (frontier_integral_slices(ph.masses(), qh.masses()) - truth).abs(),
                        Metric::FrontierSupError => {
                            frontier_sup_error_slices(p.masses(), q.masses(), ph.masses(), qh.masses(), &lambda_grid)
                        }
                    });
                }
            }
            Ok(out)
        })?;

        let free = simplified_bound(k, n as u64)? * config.bound_scale;
        let oracle = oracle_plot_bound(&p, &q, n as u64)? * config.bound_scale;
        let mut col = 0;
        for est in &config.estimators {
            for metric in &config.metrics {
                let xs: Vec<f64> = per_trial.iter().map(|v| v[col]).collect();
                col += 1;
                let (mean, stderr) = mean_stderr(&xs);
                let with_bounds = *metric == Metric::FiAbsError;
                report.rows.push(ReportRow {
                    sweep_name: config.sweep.name.name().into(),
                    sweep_value: value,
                    estimator: est.to_string(),
                    metric: metric.name().into(),
                    mean,
                    stderr,
                    trials: config.trials,
                    free_bound: with_bounds.then_some(free),
                    oracle_bound: with_bounds.then_some(oracle),
                });
            }
        }
    }
    Ok(report)
}

/// Smoothing comparison: [`run_stat_error`] across several estimators on
/// identical per-trial samples.
pub fn run_smoothing(config: &ExperimentConfig, threads: Option<usize>) -> Result<ErrorReport> {
    require_kind(config, &[ExperimentKind::Smoothing, ExperimentKind::StatError])?;
    run_stat_error(config, threads)
}

/// Quantization error `|FI(P_S, Q_S) - FI(P, Q)|` of each strategy over a
/// sweep of bin counts. Deterministic; one trial per row. The oracle
/// strategy uses `2 floor(bins / 2)` cells. `free_bound` is the
/// quantization guarantee `1 / floor(bins / 2)`.
pub fn run_quantizer(config: &ExperimentConfig) -> Result<ErrorReport> {
    require_kind(config, &[ExperimentKind::Quantizer])?;
    let fi = GeneratorFamily::FrontierIntegral;
    let k = config.fixed_usize("k", 0);
    let (p, q) = discrete_pair(config, k, None)?;
    if p == q {
        return Err(Error::Input("quantizer experiment needs P != Q (the error is identically zero)".into()));
    }
    let truth = frontier_integral_slices(p.masses(), q.masses());
    let mut report = ErrorReport::default();
    for &value in &config.sweep.values {
        let bins = value as usize;
        let bound = quantization_bound(fi, bins)? * config.bound_scale;
        for strategy in &config.strategies {
            let s = match strategy {
                Strategy::Uniform => uniform_partition(k, bins)?,
                Strategy::Greedy => greedy_partition(&p, &q, bins)?,
                Strategy::Oracle => oracle_partition(fi, &p, &q, 2 * (bins / 2))?,
            };
            let err = (quantized_divergence(fi, &p, &q, &s)? - truth).abs();
            report.rows.push(ReportRow {
                sweep_name: config.sweep.name.name().into(),
                sweep_value: value,
                estimator: strategy.name().into(),
                metric: Metric::FiAbsError.name().into(),
                mean: err,
                stderr: 0.0,
                trials: 1,
                free_bound: Some(bound),
                oracle_bound: None,
            });
        }
    }
    Ok(report)
}

/// Total error of k-means quantization with `k = round(n^(1/r))` cells.
///
/// Each trial fits k-means on `n` points from each of `P` and `Q` pooled,
/// draws fresh samples of size `n` from each, quantizes them with the fitted
/// cells and compares the empirical frontier integral to the quadrature
/// ground truth. `free_bound` is `(sqrt(k/n) + k/n) ln n + 1/k`.
pub fn run_continuous_k_rule(config: &ExperimentConfig, threads: Option<usize>) -> Result<ErrorReport> {
    require_kind(config, &[ExperimentKind::ContinuousKRule])?;
    let (DistSpec::Continuous(p), DistSpec::Continuous(q)) = (config.p_spec, config.q_spec) else {
        return Err(cfg_err("p_spec", "continuous_k_rule needs continuous specs"));
    };
    let truth = continuous_ground_truth(&p, &q)?;
    let max_iters = config.fixed_usize("max_iters", DEFAULT_MAX_ITERS);
    let rng = RngSpec::new(config.base_seed);
    let mut report = ErrorReport::default();
    for (idx, &value) in config.sweep.values.iter().enumerate() {
        let (n, r) = match config.sweep.name {
            SweepName::N => (value as usize, config.fixed["r"]),
            SweepName::R => (config.fixed_usize("n", 0), value),
            _ => unreachable!("rejected by validation"),
        };
        let m = ((n as f64).powf(1.0 / r).round() as usize).clamp(1, 2 * n);
        let errors = run_trials(config.trials, threads, |t| {
            continuous_trial(&p, &q, n, m, max_iters, &rng, &[idx as u64, t as u64], truth)
        })?;
        let (mean, stderr) = mean_stderr(&errors);
        let bound = if n >= 2 { Some(total_error_bound(m, n as u64)? * config.bound_scale) } else { None };
        report.rows.push(ReportRow {
            sweep_name: config.sweep.name.name().into(),
            sweep_value: value,
            estimator: EstimatorKind::Empirical.to_string(),
            metric: Metric::FiAbsError.name().into(),
            mean,
            stderr,
            trials: config.trials,
            free_bound: bound,
            oracle_bound: None,
        });
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn continuous_trial(
    p: &ContinuousSpec,
    q: &ContinuousSpec,
    n: usize,
    m: usize,
    max_iters: usize,
    rng: &RngSpec,
    keys: &[u64],
    truth: f64,
) -> Result<f64> {
    let mut stream = rng.substream(keys);
    let mut fit = sample_continuous(p, n, &mut stream);
    fit.extend(sample_continuous(q, n, &mut stream));
    let mut km_keys = keys.to_vec();
    km_keys.push(KMEANS_KEY);
    let model = kmeans(&fit, m, max_iters, substream_seed(rng.base_seed, &km_keys))?;
    let xp = sample_continuous(p, n, &mut stream);
    let xq = sample_continuous(q, n, &mut stream);
    let hp = crate::estimators::empirical(&assign_to_centroids(&xp, &model)?)?;
    let hq = crate::estimators::empirical(&assign_to_centroids(&xq, &model)?)?;
    Ok((frontier_integral_slices(hp.masses(), hq.masses()) - truth).abs())
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    crate::error::check_shape(xs.len(), ys.len())?;
    if xs.len() < 2 {
        return Err(Error::Input("slope needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("log-log slope needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("x values must not all be equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Aligns two `atom,count` histogram documents on the union of their
/// supports (atoms `0..=max atom`), padding missing atoms with zero counts.
pub fn ingest_histogram_texts(text_p: &str, text_q: &str) -> Result<(Histogram, Histogram)> {
    let rows_p = parse_histogram_csv(text_p)?;
    let rows_q = parse_histogram_csv(text_q)?;
    let k = rows_p.iter().chain(&rows_q).map(|(a, _)| a + 1).max().unwrap_or(0);
    let align = |rows: &[(usize, u64)]| {
        let mut counts = vec![0u64; k];
        for (a, c) in rows {
            counts[*a] = *c;
        }
        Histogram::from_counts(counts)
    };
    Ok((align(&rows_p)?, align(&rows_q)?))
}

/// Reads and aligns two histogram files; see [`ingest_histogram_texts`].
pub fn ingest_histograms(path_p: &Path, path_q: &Path) -> Result<(Histogram, Histogram)> {
    let read =
        |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())));
    ingest_histogram_texts(&read(path_p)?, &read(path_q)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(json)
    }

    #[test]
    fn parses_minimal_config() {
        let c = config(
            r#"{"experiment":"stat_error","p_spec":"zipf:2","q_spec":"zipf:2",
                "sweep":{"name":"n","values":[100,200]},"fixed":{"k":50}}"#,
        )
        .unwrap();
        assert_eq!(c.trials, 100);
        assert_eq!(c.estimators, vec![EstimatorKind::Empirical]);
        assert_eq!(c.metrics, vec![Metric::FiAbsError]);
        assert_eq!(c.lambda0, 0.01);
    }

    #[test]
    fn config_errors_name_fields() {
        let field = |json: &str| match config(json) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        let base = |extra: &str| {
            format!(
                r#"{{"experiment":"stat_error","p_spec":"zipf:1","q_spec":"zipf:2",
                   "sweep":{{"name":"n","values":[100,200]}},"fixed":{{"k":50}}{extra}}}"#
            )
        };
        assert_eq!(field(&base(r#","trials":0"#)), "trials");
        assert_eq!(field(&base(r#","bogus":1"#)), "bogus");
        assert_eq!(field(&base(r#","estimators":["mle"]"#)), "estimators");
        assert_eq!(field(&base(r#","lambda0":0.7"#)), "lambda0");
        assert_eq!(
            field(
                r#"{"experiment":"stat_error","p_spec":"zipf:1","q_spec":"zipf:2","sweep":{"name":"n","values":[200,100]},"fixed":{"k":5}}"#
            ),
            "sweep.values"
        );
        assert_eq!(
            field(
                r#"{"experiment":"stat_error","p_spec":"zipf:1","q_spec":"zipf:2","sweep":{"name":"n","values":[100]}}"#
            ),
            "fixed.k"
        );
        assert_eq!(
            field(
                r#"{"experiment":"stat_error","p_spec":"gauss:0,0,1","q_spec":"zipf:2","sweep":{"name":"n","values":[100]},"fixed":{"k":5}}"#
            ),
            "p_spec"
        );
        assert_eq!(field(r#"{"experiment":"nope"}"#), "experiment");
    }

    #[test]
    fn log_range_sweep() {
        let c = config(
            r#"{"experiment":"stat_error","p_spec":"zipf:2","q_spec":"zipf:2",
                "sweep":{"name":"n","log_range":[1000,10000,8]},"fixed":{"k":1000}}"#,
        )
        .unwrap();
        assert_eq!(c.sweep.values.len(), 8);
        assert_eq!(c.sweep.values[0], 1000.0);
        assert_eq!(c.sweep.values[7], 10000.0);
    }

    #[test]
    fn identical_point_masses_have_zero_error() {
        let c = config(
            r#"{"experiment":"stat_error","p_spec":"zipf:60","q_spec":"zipf:60",
                "sweep":{"name":"n","values":[10,100]},"fixed":{"k":1},"trials":5,
                "metrics":["fi_abs_error","frontier_sup_error"]}"#,
        )
        .unwrap();
        let report = run_experiment(&c, Some(2)).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows.iter().all(|r| r.mean == 0.0 && r.stderr == 0.0));
    }

    #[test]
    fn stderr_is_sample_std_over_root_trials() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        let var: f64 = (2.25 + 0.25 + 0.25 + 2.25) / 3.0;
        assert!((s - (var / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn slope_examples() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((loglog_slope(&xs, &sq).unwrap() - 2.0).abs() < 1e-14);
        let inv: Vec<f64> = xs.iter().map(|x| 3.0 / x.sqrt()).collect();
        assert!((loglog_slope(&xs, &inv).unwrap() + 0.5).abs() < 1e-14);
        assert_eq!(loglog_slope(&xs, &[2.0; 4]).unwrap(), 0.0);
        assert!(loglog_slope(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn ingest_aligns_support() {
        let (a, b) = ingest_histogram_texts("atom,count\n0,3\n2,1\n", "atom,count\n4,2\n").unwrap();
        assert_eq!(a.counts(), &[3, 0, 1, 0, 0]);
        assert_eq!(b.counts(), &[0, 0, 0, 0, 2]);
        let (c, d) = ingest_histogram_texts("atom,count\n1,1\n", "atom,count\n1,1\n").unwrap();
        assert_eq!(c, d);
        assert!(ingest_histogram_texts("", "atom,count\n1,1\n").is_err());
    }

    #[test]
    fn quantizer_rejects_identical_pair() {
        let c = config(
            r#"{"experiment":"quantizer","p_spec":"zipf:1","q_spec":"zipf:1",
                "sweep":{"name":"bins","values":[2,4]},"fixed":{"k":20}}"#,
        )
        .unwrap();
        assert!(run_experiment(&c, None).is_err());
    }

    #[test]
    fn report_formats() {
        let report = ErrorReport {
            rows: vec![ReportRow {
                sweep_name: "bins".into(),
                sweep_value: 4.0,
                estimator: "oracle".into(),
                metric: "fi_abs_error".into(),
                mean: 0.125,
                stderr: 0.0,
                trials: 1,
                free_bound: Some(f64::INFINITY),
                oracle_bound: None,
            }],
        };
        assert_eq!(report.to_csv(), format!("{REPORT_HEADER}\nbins,4,oracle,fi_abs_error,0.125,0,1,inf,\n"));
        let json: Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json[0]["free_bound"], "inf");
        assert_eq!(json[0]["oracle_bound"], Value::Null);
        assert_eq!(json[0]["mean"], 0.125);
    }
}
