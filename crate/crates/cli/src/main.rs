//! `mvdeg` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 parse, 3 dimension mismatch,
//! 4 numeric or degenerate input.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mvdeg::baseline::{classical_mvde_scales, univariate_mde};
use mvdeg::bench::{
    compare_graph_policies, correlation_degree_conditions, noise_regime_conditions,
    run_noise_experiment, run_timing_sweep, structural_conditions, GraphComparison, GraphPolicy,
    Method, NoiseExperiment, TimingConfig,
};
use mvdeg::graph::{
    build_complete_graph, build_gaussian_kernel_graph, build_zero_graph,
    estimate_correlation_graph, KernelParams,
};
use mvdeg::synth::{corr_from_rows, GeneratorSpec, GENERATOR_VERSION};
use mvdeg::{io, mvdeg_curve, CurveConfig, EmbeddingConfig, EntropyCurve, Error, ErrorClass};
use mvdeg::{MultivariateSignal, WeightedGraph, DEFAULT_PATTERN_CAP};

#[derive(Parser)]
#[command(name = "mvdeg", version, about = "Multivariate multiscale graph-based dispersion entropy")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multichannel signal.
    Generate(GenerateArgs),
    /// Build a channel graph and write it as JSON.
    Graph(GraphArgs),
    /// Compute an entropy-vs-scale curve for a signal CSV.
    Entropy(EntropyArgs),
    /// Time mvDEG against classical mvDE over a range of lengths.
    Bench(BenchArgs),
    /// Run a seeded ensemble experiment.
    Ensemble(EnsembleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Wgn,
    #[value(name = "one_over_f", alias = "one-over-f")]
    OneOverF,
    Correlated,
    Mixture,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Channel count (ignored for mixtures, which are trivariate).
    #[arg(long, default_value_t = 3)]
    p: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of white-noise channels in a mixture.
    #[arg(long)]
    q: Option<usize>,
    /// Correlation matrix JSON for `correlated`.
    #[arg(long)]
    corr: Option<PathBuf>,
    /// Output signal CSV; the spec sidecar goes next to it with a `.json` extension.
    #[arg(long, default_value = "signal.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Zero,
    Complete,
    Gaussian,
    Correlation,
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// Station coordinates CSV (`station_id,x,y`).
    #[arg(long)]
    coords: Option<PathBuf>,
    #[arg(long = "sigma1-sq")]
    sigma1_sq: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    self_loops: bool,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    /// Channel count for `zero` and `complete`.
    #[arg(long)]
    p: Option<usize>,
    /// Signal CSV for `correlation` (and to infer `p`).
    #[arg(long)]
    signal: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value = "graph.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum EntropyMethod {
    Mvdeg,
    Classical,
    Univariate,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    signal: PathBuf,
    /// `zero`, `complete`, `correlation`, `gaussian`, or a graph JSON path.
    #[arg(long, default_value = "zero")]
    graph: String,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 6)]
    c: usize,
    #[arg(long, default_value_t = 20)]
    max_scale: usize,
    #[arg(long, value_enum, default_value_t = EntropyMethod::Mvdeg)]
    method: EntropyMethod,
    /// Pattern-count cap for classical mvDE.
    #[arg(long, default_value_t = DEFAULT_PATTERN_CAP)]
    cap: u64,
    /// Writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long, default_value = "curve")]
    out_prefix: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchMethod {
    Mvdeg,
    Classical,
}

impl From<BenchMethod> for Method {
    fn from(m: BenchMethod) -> Self {
        match m {
            BenchMethod::Mvdeg => Method::Mvdeg,
            BenchMethod::Classical => Method::Classical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Zero,
    Complete,
    Theoretical,
    Estimated,
}

impl From<PolicyArg> for GraphPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Zero => GraphPolicy::Zero,
            PolicyArg::Complete => GraphPolicy::Complete,
            PolicyArg::Theoretical => GraphPolicy::TheoreticalCorrelation,
            PolicyArg::Estimated => GraphPolicy::EstimatedCorrelation,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Signal lengths, comma separated or repeated.
    #[arg(long = "N", visible_alias = "ns", num_args = 0.., value_delimiter = ',')]
    ns: Option<Vec<String>>,
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 6)]
    c: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["mvdeg", "classical"])]
    methods: Vec<BenchMethod>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PATTERN_CAP)]
    cap: u64,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    #[arg(long, value_enum, default_value = "complete")]
    graph: PolicyArg,
    /// Writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long, default_value = "bench")]
    out_prefix: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// F(0)..F(3) trivariate WGN / 1/f mixtures.
    Noise,
    /// Equicorrelated sets over a list of correlation degrees.
    Degree,
    /// Five four-channel block-correlation structures.
    Structural,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long, value_enum, conflicts_with = "config")]
    preset: Option<Preset>,
    /// Experiment JSON (see docs/formats.md).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per realization (presets only).
    #[arg(long)]
    n: Option<usize>,
    /// Channels per set (degree preset only).
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<f64>>,
    /// In-block correlation (structural preset only).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, value_enum)]
    graph: Option<PolicyArg>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    max_scale: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<BenchMethod>,
    /// Also compare theoretical and estimated correlation graphs per condition.
    #[arg(long)]
    compare: bool,
    /// Writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long, default_value = "ensemble")]
    out_prefix: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) => match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Parse => 2,
                ErrorClass::Dimension => 3,
                ErrorClass::Numeric => 4,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Graph(a) => cmd_graph(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Ensemble(a) => cmd_ensemble(a),
    }
}

/// Correlation JSON: either a bare array of rows or `{"corr": rows}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum CorrDocument {
    Rows(Vec<Vec<f64>>),
    Object { corr: Vec<Vec<f64>> },
}

fn load_corr(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let doc: CorrDocument = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    Ok(match doc {
        CorrDocument::Rows(r) | CorrDocument::Object { corr: r } => r,
    })
}

#[derive(Serialize)]
struct GeneratorSidecar<'a> {
    generator_version: &'a str,
    spec: &'a GeneratorSpec,
}

fn cmd_generate(a: GenerateArgs) -> CliResult<()> {
    let spec = match a.kind {
        GenKind::Wgn => GeneratorSpec::wgn(a.p, a.n, a.seed),
        GenKind::OneOverF => GeneratorSpec::one_over_f(a.p, a.n, a.seed),
        GenKind::Mixture => {
            let q = a.q.ok_or_else(|| usage("--kind mixture requires --q"))?;
            GeneratorSpec::mixture(q, a.n, a.seed)
        }
        GenKind::Correlated => {
            let path = a.corr.as_ref().ok_or_else(|| usage("--kind correlated requires --corr"))?;
            let corr = corr_from_rows(&load_corr(path)?)?;
            GeneratorSpec::correlated(&corr, a.n, a.seed)
        }
    };
    let signal = spec.generate()?;
    io::save_signal(&signal, &a.out)?;
    io::save_json(
        &GeneratorSidecar {
            generator_version: GENERATOR_VERSION,
            spec: &spec,
        },
        &a.out.with_extension("json"),
    )?;
    Ok(())
}

fn kernel_graph(k: &KernelArgs) -> CliResult<WeightedGraph> {
    let coords = k.coords.as_ref().ok_or_else(|| usage("gaussian graph requires --coords"))?;
    let sigma1_sq = k.sigma1_sq.ok_or_else(|| usage("gaussian graph requires --sigma1-sq"))?;
    let sigma2 = k.sigma2.ok_or_else(|| usage("gaussian graph requires --sigma2"))?;
    let layout = io::load_stations(coords)?;
    let params = KernelParams {
        self_loops: k.self_loops,
        ..KernelParams::new(sigma1_sq, sigma2)
    };
    Ok(build_gaussian_kernel_graph(&layout, params)?)
}

fn cmd_graph(a: GraphArgs) -> CliResult<()> {
    let signal = a.signal.as_deref().map(io::load_signal).transpose()?;
    let p = || -> CliResult<usize> {
        a.p.or(signal.as_ref().map(MultivariateSignal::channels))
            .ok_or_else(|| usage("give --p or --signal"))
    };
    let graph = match a.kind {
        GraphKind::Zero => build_zero_graph(p()?)?,
        GraphKind::Complete => build_complete_graph(p()?)?,
        GraphKind::Gaussian => kernel_graph(&a.kernel)?,
        GraphKind::Correlation => estimate_correlation_graph(
            signal.as_ref().ok_or_else(|| usage("correlation graph requires --signal"))?,
        )?,
    };
    fs::write(&a.out, io::graph_to_json(&graph)? + "\n")?;
    Ok(())
}

/// Resolves `--graph` for a loaded signal; returns the graph and its label.
fn resolve_graph(
    source: &str,
    kernel: &KernelArgs,
    signal: &MultivariateSignal,
) -> CliResult<(WeightedGraph, String)> {
    let p = signal.channels();
    let graph = match source {
        "zero" => build_zero_graph(p)?,
        "complete" => build_complete_graph(p)?,
        "correlation" => estimate_correlation_graph(signal)?,
        "gaussian" => kernel_graph(kernel)?,
        path => {
            let g = io::load_graph(Path::new(path))?;
            return Ok((g, format!("file:{path}")));
        }
    };
    Ok((graph, source.to_string()))
}

#[derive(Serialize)]
struct EntropyRun<'a> {
    command: &'static str,
    signal: &'a Path,
    channels: usize,
    samples: usize,
    graph: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel: Option<KernelParams>,
    method: EntropyMethod,
    embedding: EmbeddingConfig,
    cap: u64,
    threads: usize,
    curves: &'a [EntropyCurve],
}

fn cmd_entropy(a: EntropyArgs) -> CliResult<()> {
    let cfg = EmbeddingConfig::new(a.m, a.c, a.max_scale)?;
    let signal = io::load_signal(&a.signal)?;
    let mut graph_label = "none".to_string();
    let curves = match a.method {
        EntropyMethod::Mvdeg => {
            let (graph, label) = resolve_graph(&a.graph, &a.kernel, &signal)?;
            if graph.n() != signal.channels() {
                return Err(Error::DimensionMismatch {
                    context: "graph nodes vs signal channels",
                    expected: signal.channels(),
                    found: graph.n(),
                }
                .into());
            }
            let curve = mvdeg_curve(&signal, &graph, &cfg, &label)?;
            graph_label = label;
            vec![curve]
        }
        EntropyMethod::Classical => {
            let outcomes = classical_mvde_scales(&signal, &cfg, a.cap)?;
            if let Some(Err(e)) = outcomes.first().map(|o| &o.result) {
                eprintln!("warning: tau=1: {e}");
            }
            vec![EntropyCurve::from_realizations(
                "mvDE",
                CurveConfig {
                    m: cfg.m,
                    c: cfg.c,
                    max_scale: cfg.max_scale,
                    graph: "none".into(),
                    seed: None,
                },
                &[outcomes],
            )]
        }
        EntropyMethod::Univariate => (0..signal.channels())
            .map(|ch| {
                let mut curve = univariate_mde(&signal.channel(ch).to_vec(), &cfg)?;
                curve.method = format!("MDE[{}]", signal.labels()[ch]);
                Ok(curve)
            })
            .collect::<CliResult<Vec<_>>>()?,
    };
    for curve in &curves {
        for r in &curve.records {
            if let Some(why) = &r.undefined {
                eprintln!("note: {} tau={} undefined: {why}", curve.method, r.tau);
            }
        }
    }
    let kernel = (a.method == EntropyMethod::Mvdeg && a.graph == "gaussian").then(|| KernelParams {
        self_loops: a.kernel.self_loops,
        ..KernelParams::new(a.kernel.sigma1_sq.unwrap_or_default(), a.kernel.sigma2.unwrap_or_default())
    });
    io::write_curves_csv(&curves, fs::File::create(with_ext(&a.out_prefix, "csv"))?)?;
    io::save_json(
        &EntropyRun {
            command: "entropy",
            signal: &a.signal,
            channels: signal.channels(),
            samples: signal.len(),
            graph: &graph_label,
            kernel,
            method: a.method,
            embedding: cfg,
            cap: a.cap,
            threads: rayon::current_num_threads(),
            curves: &curves,
        },
        &with_ext(&a.out_prefix, "json"),
    )?;
    Ok(())
}

fn parse_lengths(raw: &[String]) -> CliResult<Vec<usize>> {
    raw.iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| usage(format!("invalid length {s:?} in --N"))))
        .collect()
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let ns = match &a.ns {
        None => TimingConfig::default().ns,
        Some(raw) => parse_lengths(raw)?,
    };
    if ns.is_empty() {
        return Err(usage("--N needs at least one length"));
    }
    if a.methods.is_empty() {
        return Err(usage("--methods needs at least one method"));
    }
    let cfg = TimingConfig {
        ns,
        p: a.p,
        m: a.m,
        c: a.c,
        methods: a.methods.iter().map(|&m| m.into()).collect(),
        seed: a.seed,
        cap: a.cap,
        repetitions: a.repetitions,
        warmup: a.warmup,
        graph: a.graph.into(),
    };
    let report = run_timing_sweep(&cfg)?;
    io::write_timing_csv(&report, fs::File::create(with_ext(&a.out_prefix, "csv"))?)?;
    io::save_json(&report, &with_ext(&a.out_prefix, "json"))?;
    Ok(())
}

fn preset_experiment(preset: Preset, a: &EnsembleArgs) -> NoiseExperiment {
    let (label, conditions, graph, max_scale) = match preset {
        Preset::Noise => (
            "noise regimes",
            noise_regime_conditions(a.n.unwrap_or(15000)),
            GraphPolicy::Zero,
            20,
        ),
        Preset::Degree => (
            "correlation degree",
            correlation_degree_conditions(
                a.degrees.as_deref().unwrap_or(&[0.95, 0.75, 0.55, 0.35, 0.15]),
                a.p.unwrap_or(3),
                a.n.unwrap_or(500),
            ),
            GraphPolicy::TheoreticalCorrelation,
            10,
        ),
        Preset::Structural => (
            "correlation structure",
            structural_conditions(a.rho.unwrap_or(0.9), a.n.unwrap_or(500)),
            GraphPolicy::TheoreticalCorrelation,
            10,
        ),
    };
    NoiseExperiment {
        label: label.to_string(),
        conditions,
        graph,
        embedding: EmbeddingConfig {
            m: 4,
            c: 6,
            max_scale,
        },
        realizations: 40,
        seed: 0,
        method: Method::Mvdeg,
        cap: DEFAULT_PATTERN_CAP,
    }
}

#[derive(Serialize)]
struct NamedComparison {
    label: String,
    #[serde(flatten)]
    comparison: GraphComparison,
}

#[derive(Serialize)]
struct EnsembleRun {
    command: &'static str,
    experiment: NoiseExperiment,
    threads: usize,
    report: mvdeg::bench::EnsembleReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    comparisons: Vec<NamedComparison>,
}

fn cmd_ensemble(a: EnsembleArgs) -> CliResult<()> {
    let mut exp = match (&a.config, a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<NoiseExperiment>(&text).map_err(|e| Error::Parse {
                line: e.line() as u64,
                column: Some(e.column()),
                message: e.to_string(),
            })?
        }
        (None, Some(preset)) => preset_experiment(preset, &a),
        (None, None) => return Err(usage("give --preset or --config")),
    };
    if let Some(r) = a.realizations {
        exp.realizations = r;
    }
    if let Some(s) = a.seed {
        exp.seed = s;
    }
    if let Some(g) = a.graph {
        exp.graph = g.into();
    }
    if let Some(m) = a.method {
        exp.method = m.into();
    }
    exp.embedding = EmbeddingConfig::new(
        a.m.unwrap_or(exp.embedding.m),
        a.c.unwrap_or(exp.embedding.c),
        a.max_scale.unwrap_or(exp.embedding.max_scale),
    )?;
    let report = run_noise_experiment(&exp)?;
    let comparisons = if a.compare {
        exp.conditions
            .iter()
            .map(|cond| {
                let ensemble = report
                    .seeds
                    .iter()
                    .map(|&s| cond.spec.with_seed(s).generate())
                    .collect::<mvdeg::Result<Vec<_>>>()?;
                let theoretical = mvdeg::graph::correlation_matrix_graph(&cond.spec.correlation()?)?;
                Ok(NamedComparison {
                    label: cond.label.clone(),
                    comparison: compare_graph_policies(&ensemble, &theoretical, &exp.embedding)?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?
    } else {
        Vec::new()
    };
    io::write_curves_csv(&report.curves(), fs::File::create(with_ext(&a.out_prefix, "csv"))?)?;
    io::save_json(
        &EnsembleRun {
            command: "ensemble",
            experiment: exp,
            threads: rayon::current_num_threads(),
            report,
            comparisons,
        },
        &with_ext(&a.out_prefix, "json"),
    )?;
    Ok(())
}
