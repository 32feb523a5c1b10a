//! Seeded experiment drivers: runtime sweeps comparing mvDEG with classical
//! mvDE, and noise ensembles aggregated into mean/SD entropy curves.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{classical_mvde, classical_mvde_scales, pattern_counts, DEFAULT_PATTERN_CAP};
use crate::curve::{CurveConfig, EntropyCurve};
use crate::entropy::{mvdeg_scales, mvdeg_single_scale, EmbeddingConfig, ScaleOutcome};
use crate::error::{Error, Result};
use crate::graph::{
    build_complete_graph, build_zero_graph, correlation_matrix_graph, estimate_correlation_graph,
    WeightedGraph,
};
use crate::signal::MultivariateSignal;
use crate::synth::{gen_wgn, realization_seed, GeneratorSpec, GENERATOR_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mvdeg,
    Classical,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mvdeg => "mvDEG",
            Method::Classical => "mvDE",
        }
    }
}

/// How the interaction graph is chosen for each realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphPolicy {
    Zero,
    Complete,
    /// `|corr|` of the generator's target correlation matrix.
    TheoreticalCorrelation,
    /// `|Pearson r|` estimated from the realization itself.
    EstimatedCorrelation,
}

impl GraphPolicy {
    pub fn build(self, spec: &GeneratorSpec, signal: &MultivariateSignal) -> Result<WeightedGraph> {
        match self {
            GraphPolicy::Zero => build_zero_graph(signal.channels()),
            GraphPolicy::Complete => build_complete_graph(signal.channels()),
            GraphPolicy::TheoreticalCorrelation => correlation_matrix_graph(&spec.correlation()?),
            GraphPolicy::EstimatedCorrelation => estimate_correlation_graph(signal),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GraphPolicy::Zero => "zero",
            GraphPolicy::Complete => "complete",
            GraphPolicy::TheoreticalCorrelation => "theoretical_correlation",
            GraphPolicy::EstimatedCorrelation => "estimated_correlation",
        }
    }
}

/// Where and how a report was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub cpu: String,
    pub build: String,
    pub threads: usize,
    pub generator: String,
}

impl Environment {
    pub fn capture() -> Self {
        let cpu = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split(':').nth(1))
                    .map(|v| v.trim().to_string())
            })
            .unwrap_or_else(|| std::env::consts::ARCH.to_string());
        let build = if cfg!(debug_assertions) { "debug" } else { "release" };
        Self {
            cpu,
            build: build.to_string(),
            threads: rayon::current_num_threads(),
            generator: GENERATOR_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ok,
    RefusedCapacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub c: usize,
    /// Median wall time in seconds; `None` for refused runs.
    pub wall_time_s: Option<f64>,
    /// Patterns processed, or the offending count for refused runs.
    pub pattern_count: String,
    pub classical_count: String,
    pub graph_bound: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub seed: u64,
    pub graph: GraphPolicy,
    pub repetitions: usize,
    pub warmup: usize,
    pub cap: u64,
    pub environment: Environment,
    pub records: Vec<TimingRecord>,
}

impl TimingReport {
    /// `(N, seconds)` pairs of completed runs for one method.
    pub fn series(&self, method: Method) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.wall_time_s.map(|t| (r.n, t)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub ns: Vec<usize>,
    pub p: usize,
    pub m: usize,
    pub c: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub cap: u64,
    pub repetitions: usize,
    pub warmup: usize,
    pub graph: GraphPolicy,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            ns: vec![100, 500, 1000, 2000, 5000, 10000],
            p: 10,
            m: 4,
            c: 6,
            methods: vec![Method::Mvdeg, Method::Classical],
            seed: 0,
            cap: DEFAULT_PATTERN_CAP,
            repetitions: 3,
            warmup: 1,
            graph: GraphPolicy::Complete,
        }
    }
}

/// Median of `repetitions` timings after `warmup` discarded runs.
pub fn median_time<T>(repetitions: usize, warmup: usize, mut f: impl FnMut() -> T) -> f64 {
    for _ in 0..warmup {
        std::hint::black_box(f());
    }
    let mut times: Vec<f64> = (0..repetitions.max(1))
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Times each method on fresh white noise for every `N`. Capacity
/// refusals are recorded, never raised.
pub fn run_timing_sweep(cfg: &TimingConfig) -> Result<TimingReport> {
    if cfg.ns.is_empty() {
        return Err(Error::InvalidParameter("the list of N values is empty".into()));
    }
    if cfg.methods.is_empty() {
        return Err(Error::InvalidParameter("the list of methods is empty".into()));
    }
    EmbeddingConfig::new(cfg.m, cfg.c, 1)?;
    let mut records = Vec::new();
    for &n in &cfg.ns {
        let signal = gen_wgn(cfg.p, n, cfg.seed)?;
        let spec = GeneratorSpec::wgn(cfg.p, n, cfg.seed);
        let graph = cfg.graph.build(&spec, &signal)?;
        let counts = pattern_counts(n, cfg.p, cfg.m)?;
        for &method in &cfg.methods {
            let base = |wall_time_s, pattern_count: String, outcome| TimingRecord {
                method,
                n,
                p: cfg.p,
                m: cfg.m,
                c: cfg.c,
                wall_time_s,
                pattern_count,
                classical_count: counts.classical.to_string(),
                graph_bound: counts.graph_bound.to_string(),
                outcome,
            };
            let record = match method {
                Method::Mvdeg => {
                    let total = mvdeg_single_scale(&signal, &graph, cfg.m, cfg.c)?.histogram.total();
                    let t = median_time(cfg.repetitions, cfg.warmup, || {
                        mvdeg_single_scale(&signal, &graph, cfg.m, cfg.c)
                    });
                    base(Some(t), total.to_string(), Outcome::Ok)
                }
                Method::Classical => match classical_mvde(&signal, cfg.m, cfg.c, 1, cfg.cap) {
                    Err(Error::Capacity { count, .. }) => {
                        base(None, count.to_string(), Outcome::RefusedCapacity)
                    }
                    Err(e) => return Err(e),
                    Ok(first) => {
                        let t = median_time(cfg.repetitions, cfg.warmup, || {
                            classical_mvde(&signal, cfg.m, cfg.c, 1, cfg.cap)
                        });
                        base(Some(t), first.histogram.total().to_string(), Outcome::Ok)
                    }
                },
            };
            records.push(record);
        }
    }
    Ok(TimingReport {
        seed: cfg.seed,
        graph: cfg.graph,
        repetitions: cfg.repetitions,
        warmup: cfg.warmup,
        cap: cfg.cap,
        environment: Environment::capture(),
        records,
    })
}

/// One generator configuration of an ensemble experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub label: String,
    pub spec: GeneratorSpec,
}

fn default_method() -> Method {
    Method::Mvdeg
}

fn default_cap() -> u64 {
    DEFAULT_PATTERN_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseExperiment {
    pub label: String,
    pub conditions: Vec<Condition>,
    pub graph: GraphPolicy,
    pub embedding: EmbeddingConfig,
    pub realizations: usize,
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub label: String,
    pub spec: GeneratorSpec,
    pub curve: EntropyCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub label: String,
    pub method: Method,
    pub graph: GraphPolicy,
    pub embedding: EmbeddingConfig,
    pub realizations: usize,
    pub seed: u64,
    /// Generator seed of each realization, shared by all conditions.
    pub seeds: Vec<u64>,
    pub environment: Environment,
    pub conditions: Vec<ConditionResult>,
}

impl EnsembleReport {
    pub fn curve(&self, label: &str) -> Option<&EntropyCurve> {
        self.conditions.iter().find(|c| c.label == label).map(|c| &c.curve)
    }

    pub fn curves(&self) -> Vec<EntropyCurve> {
        self.conditions.iter().map(|c| c.curve.clone()).collect()
    }
}

fn run_realization(
    exp: &NoiseExperiment,
    spec: &GeneratorSpec,
) -> Result<Vec<ScaleOutcome>> {
    let signal = spec.generate()?;
    match exp.method {
        Method::Mvdeg => {
            let graph = exp.graph.build(spec, &signal)?;
            mvdeg_scales(&signal, &graph, &exp.embedding)
        }
        Method::Classical => classical_mvde_scales(&signal, &exp.embedding, exp.cap),
    }
}

/// Runs every condition over `realizations` seeds. Realization `r` of
/// every condition uses seed `realization_seed(seed, r)`.
pub fn run_noise_experiment(exp: &NoiseExperiment) -> Result<EnsembleReport> {
    if exp.realizations < 2 {
        return Err(Error::InvalidParameter(format!(
            "an ensemble needs at least 2 realizations, got {}",
            exp.realizations
        )));
    }
    exp.embedding.validate()?;
    let seeds: Vec<u64> = (0..exp.realizations as u64)
        .map(|r| realization_seed(exp.seed, r))
        .collect();
    let conditions = exp
        .conditions
        .iter()
        .map(|cond| {
            let outcomes = seeds
                .par_iter()
                .map(|&s| run_realization(exp, &cond.spec.with_seed(s)))
                .collect::<Result<Vec<_>>>()?;
            let curve = EntropyCurve::from_realizations(
                format!("{}[{}]", exp.method.label(), cond.label),
                CurveConfig {
                    m: exp.embedding.m,
                    c: exp.embedding.c,
                    max_scale: exp.embedding.max_scale,
                    graph: exp.graph.label().to_string(),
                    seed: Some(exp.seed),
                },
                &outcomes,
            );
            Ok(ConditionResult {
                label: cond.label.clone(),
                spec: cond.spec.clone(),
                curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleReport {
        label: exp.label.clone(),
        method: exp.method,
        graph: exp.graph,
        embedding: exp.embedding,
        realizations: exp.realizations,
        seed: exp.seed,
        seeds,
        environment: Environment::capture(),
        conditions,
    })
}

/// Trivariate mixtures `F(0)..=F(3)`, `F(q)` having `q` white channels.
pub fn noise_regime_conditions(n: usize) -> Vec<Condition> {
    (0..=3)
        .map(|q| Condition {
            label: format!("F({q})"),
            spec: GeneratorSpec::mixture(q, n, 0),
        })
        .collect()
}

/// Equicorrelated `p`-channel sets, one per degree.
pub fn correlation_degree_conditions(degrees: &[f64], p: usize, n: usize) -> Vec<Condition> {
    degrees
        .iter()
        .map(|&rho| {
            let corr = Array2::from_shape_fn((p, p), |(i, j)| if i == j { 1.0 } else { rho });
            Condition {
                label: format!("rho={rho}"),
                spec: GeneratorSpec::correlated(&corr, n, 0),
            }
        })
        .collect()
}

/// The five four-channel structures, with in-block correlation `rho`:
/// uncorrelated; one correlated pair; two correlated pairs; a correlated
/// triple plus a singleton; all four correlated.
pub fn structural_conditions(rho: f64, n: usize) -> Vec<Condition> {
    let blocks: [(&str, &[usize; 4]); 5] = [
        ("uncorrelated", &[0, 1, 2, 3]),
        ("one_pair", &[0, 0, 1, 2]),
        ("two_pairs", &[0, 0, 1, 1]),
        ("triple_plus_one", &[0, 0, 0, 1]),
        ("all_four", &[0, 0, 0, 0]),
    ];
    blocks
        .iter()
        .map(|(label, block)| {
            let corr = Array2::from_shape_fn((4, 4), |(i, j)| {
                if i == j {
                    1.0
                } else if block[i] == block[j] {
                    rho
                } else {
                    0.0
                }
            });
            Condition {
                label: label.to_string(),
                spec: GeneratorSpec::correlated(&corr, n, 0),
            }
        })
        .collect()
}

/// mvDEG of one ensemble under a fixed theoretical graph and under each
/// realization's estimated correlation graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphComparison {
    pub theoretical: EntropyCurve,
    pub estimated: EntropyCurve,
    /// Per scale, mean over realizations of `|H_theoretical - H_estimated|`.
    pub mean_abs_difference: Vec<Option<f64>>,
}

pub fn compare_graph_policies(
    ensemble: &[MultivariateSignal],
    theoretical: &WeightedGraph,
    cfg: &EmbeddingConfig,
) -> Result<GraphComparison> {
    if ensemble.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let pairs = ensemble
        .par_iter()
        .map(|signal| {
            let estimated = estimate_correlation_graph(signal)?;
            Ok((
                mvdeg_scales(signal, theoretical, cfg)?,
                mvdeg_scales(signal, &estimated, cfg)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_abs_difference = (0..cfg.max_scale)
        .map(|s| {
            let diffs: Option<Vec<f64>> = pairs
                .iter()
                .map(|(a, b)| match (&a[s].result, &b[s].result) {
                    (Ok(x), Ok(y)) => Some((x.entropy - y.entropy).abs()),
                    _ => None,
                })
                .collect();
            diffs.map(|d| d.iter().sum::<f64>() / d.len() as f64)
        })
        .collect();
    let config = |graph: &str| CurveConfig {
        m: cfg.m,
        c: cfg.c,
        max_scale: cfg.max_scale,
        graph: graph.to_string(),
        seed: None,
    };
    let (theo, est): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(GraphComparison {
        theoretical: EntropyCurve::from_realizations("mvDEG", config("theoretical_correlation"), &theo),
        estimated: EntropyCurve::from_realizations("mvDEG", config("estimated_correlation"), &est),
        mean_abs_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_records_refusals_without_aborting() {
        let cfg = TimingConfig {
            ns: vec![50, 2000],
            p: 8,
            m: 5,
            c: 6,
            methods: vec![Method::Classical, Method::Mvdeg],
            repetitions: 1,
            warmup: 0,
            ..TimingConfig::default()
        };
        let report = run_timing_sweep(&cfg).unwrap();
        assert_eq!(report.records.len(), 4);
        let refused = report
            .records
            .iter()
            .find(|r| r.n == 2000 && r.method == Method::Classical)
            .unwrap();
        assert_eq!(refused.outcome, Outcome::RefusedCapacity);
        assert_eq!(refused.pattern_count, "1313383968");
        assert!(refused.wall_time_s.is_none());
        let fast = report
            .records
            .iter()
            .find(|r| r.n == 2000 && r.method == Method::Mvdeg)
            .unwrap();
        assert_eq!(fast.outcome, Outcome::Ok);
        assert_eq!(fast.graph_bound, "15960");
        assert!(fast.wall_time_s.unwrap() >= 0.0);
        let small = report
            .records
            .iter()
            .find(|r| r.n == 50 && r.method == Method::Classical)
            .unwrap();
        assert_eq!(small.outcome, Outcome::Ok);
    }

    #[test]
    fn sweep_rejects_empty_lists() {
        let cfg = TimingConfig {
            ns: vec![],
            ..TimingConfig::default()
        };
        assert!(run_timing_sweep(&cfg).is_err());
    }

    fn tiny_experiment(realizations: usize) -> NoiseExperiment {
        NoiseExperiment {
            label: "tiny".into(),
            conditions: correlation_degree_conditions(&[0.9, 0.1], 3, 200),
            graph: GraphPolicy::TheoreticalCorrelation,
            embedding: EmbeddingConfig::new(3, 4, 3).unwrap(),
            realizations,
            seed: 5,
            method: Method::Mvdeg,
            cap: DEFAULT_PATTERN_CAP,
        }
    }

    #[test]
    fn two_realizations_give_finite_sd() {
        let report = run_noise_experiment(&tiny_experiment(2)).unwrap();
        for cond in &report.conditions {
            for r in &cond.curve.records {
                assert_eq!(r.n_realizations, 2);
                assert!(r.sd.unwrap().is_finite());
            }
        }
        assert!(run_noise_experiment(&tiny_experiment(1)).is_err());
    }

    #[test]
    fn ensembles_are_deterministic_across_thread_counts() {
        let exp = tiny_experiment(6);
        let a = run_noise_experiment(&exp).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_noise_experiment(&exp)).unwrap();
        assert_eq!(a.conditions, b.conditions);
        assert_eq!(a.seeds, b.seeds);
    }

    #[test]
    fn structural_sets_are_valid_correlations() {
        let conds = structural_conditions(0.9, 100);
        assert_eq!(conds.len(), 5);
        for c in &conds {
            assert!(c.spec.generate().is_ok(), "{}", c.label);
        }
    }

    #[test]
    fn identical_graphs_compare_to_zero() {
        let signals: Vec<_> = (0..3).map(|s| gen_wgn(3, 300, s).unwrap()).collect();
        let cfg = EmbeddingConfig::new(3, 4, 2).unwrap();
        let est = estimate_correlation_graph(&signals[0]).unwrap();
        let cmp = compare_graph_policies(&signals[..1], &est, &cfg).unwrap();
        assert_eq!(cmp.mean_abs_difference, vec![Some(0.0), Some(0.0)]);
        let cmp = compare_graph_policies(&signals, &build_zero_graph(3).unwrap(), &cfg).unwrap();
        assert!(cmp.mean_abs_difference.iter().all(|d| d.unwrap() >= 0.0));
    }
}
