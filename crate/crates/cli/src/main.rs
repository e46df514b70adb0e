use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use divfront::bounds::bound_report;
use divfront::divergence::{
    closed_lambda_grid, f_divergence, frontier_curve, frontier_integral_closed, frontier_integral_quadrature,
    open_lambda_grid, DEFAULT_FRONTIER_GRID, DEFAULT_QUADRATURE_NODES,
};
use divfront::harness::{ingest_histograms, loglog_slope, run_experiment, ExperimentConfig};
use divfront::io::{
    centroids_to_csv, curve_to_csv, format_sig12, histogram_to_csv, masses_to_csv, parse_masses, parse_points_csv,
    partition_to_csv,
};
use divfront::quantize::{
    assign_to_centroids, greedy_partition_for, kmeans, oracle_partition, quantized_divergence, uniform_partition,
    DEFAULT_MAX_ITERS,
};
use divfront::{DiscreteDistribution, Error, EstimatorKind, GeneratorFamily};

#[derive(Parser)]
#[command(name = "divfront", version, about = "Divergence frontiers and frontier integrals between distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frontier integral (or another f-divergence) between two mass files.
    Fi {
        /// Mass file for P (CSV with header `mass`, or a JSON array).
        p: PathBuf,
        /// Mass file for Q.
        q: PathBuf,
        /// Generator family: fi, kl, js, lecam, hellinger, ikl:<l>, sjs:<l>, ichi2:<l>.
        #[arg(long, default_value = "fi")]
        family: GeneratorFamily,
        /// Gauss–Legendre nodes for --oracle-check.
        #[arg(long, default_value_t = DEFAULT_QUADRATURE_NODES)]
        nodes: usize,
        /// Also print the quadrature value and its difference from the closed form.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Divergence frontier curve as CSV `lambda,kl_p,kl_q`.
    Frontier {
        p: PathBuf,
        q: PathBuf,
        /// Number of mixture weights.
        #[arg(long, default_value_t = DEFAULT_FRONTIER_GRID)]
        grid: usize,
        /// Use an evenly spaced grid on [lambda0, 1 - lambda0] instead of i / (grid + 1).
        #[arg(long)]
        lambda0: Option<f64>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Statistical-error bounds as JSON.
    Bounds {
        /// Optional mass files for P and Q; enable the distribution-dependent fields.
        files: Vec<PathBuf>,
        #[arg(long, default_value = "fi")]
        family: GeneratorFamily,
        /// Support size (taken from the files when given).
        #[arg(long)]
        k: Option<usize>,
        /// Sample size from P.
        #[arg(long)]
        n: u64,
        /// Sample size from Q (defaults to n).
        #[arg(long)]
        m: Option<u64>,
        /// Failure probability for the high-probability bound.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Add-constant used for gamma.
        #[arg(long, default_value_t = 0.5)]
        b: f64,
    },
    /// Quantize a pair of distributions, or fit k-means cells to 2-D points.
    Quantize {
        /// Mass files for P and Q (not used with --strategy kmeans).
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Number of bins (cells).
        #[arg(long)]
        bins: usize,
        #[arg(long, default_value = "fi")]
        family: GeneratorFamily,
        /// Points CSV `x,y` for k-means.
        #[arg(long)]
        points: Option<PathBuf>,
        /// k-means seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Partition CSV (`atom,bin`) or centroid CSV (`cx,cy`) output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// k-means only: write the histogram of the points over the fitted cells.
        #[arg(long)]
        histogram_out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment and write `<out>.csv` and `<out>.json`.
    Experiment {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Overrides `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path prefix.
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Worker threads (all cores when omitted). Never changes the output.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides `bound_scale` (presentation only).
        #[arg(long)]
        bound_scale: Option<f64>,
    },
    /// Least-squares slope of ln(y) on ln(x) from a CSV file.
    Slope {
        file: PathBuf,
        #[arg(long, default_value = "sweep_value")]
        x: String,
        #[arg(long, default_value = "mean")]
        y: String,
        /// Keep only rows whose `estimator` column equals this.
        #[arg(long)]
        estimator: Option<String>,
        /// Keep only rows whose `metric` column equals this.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Estimate a divergence from two `atom,count` histogram files.
    Ingest {
        p: PathBuf,
        q: PathBuf,
        /// empirical, laplace, kt, braess-sauer, good-turing or add:<b>.
        #[arg(long, default_value = "empirical")]
        estimator: EstimatorKind,
        #[arg(long, default_value = "fi")]
        family: GeneratorFamily,
        /// Write the estimated P masses here.
        #[arg(long)]
        out_p: Option<PathBuf>,
        /// Write the estimated Q masses here.
        #[arg(long)]
        out_q: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Uniform,
    Greedy,
    Oracle,
    Kmeans,
}

struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

fn data(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedFamily(f) => usage(format!("unsupported family for bounds: {f}")),
            Error::Config { .. } => usage(e.to_string()),
            other => data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| data(format!("cannot write {}: {e}", path.display())))
}

fn load_masses(path: &Path) -> CliResult<DiscreteDistribution> {
    parse_masses(&read(path)?).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load_pair(p: &Path, q: &Path) -> CliResult<(DiscreteDistribution, DiscreteDistribution)> {
    let (p, q) = (load_masses(p)?, load_masses(q)?);
    if p.len() != q.len() {
        return Err(data(format!("length mismatch: P has {} atoms, Q has {}", p.len(), q.len())));
    }
    Ok((p, q))
}

fn pair_files(files: &[PathBuf]) -> CliResult<Option<(&Path, &Path)>> {
    match files {
        [] => Ok(None),
        [p, q] => Ok(Some((p, q))),
        _ => Err(usage("expected exactly two mass files (P and Q)")),
    }
}

fn cmd_fi(p: &Path, q: &Path, family: GeneratorFamily, nodes: usize, oracle_check: bool) -> CliResult<()> {
    let (p, q) = load_pair(p, q)?;
    let value = if family == GeneratorFamily::FrontierIntegral {
        frontier_integral_closed(&p, &q)?
    } else {
        f_divergence(family, &p, &q)?
    };
    println!("{}", format_sig12(value));
    if oracle_check {
        if family != GeneratorFamily::FrontierIntegral {
            return Err(usage("--oracle-check is only available for the frontier integral"));
        }
        let quad = frontier_integral_quadrature(&p, &q, nodes)?;
        println!("quadrature {}", format_sig12(quad));
        println!("difference {}", format_sig12((value - quad).abs()));
    }
    Ok(())
}

fn cmd_frontier(p: &Path, q: &Path, grid: usize, lambda0: Option<f64>, out: Option<&Path>) -> CliResult<()> {
    let (p, q) = load_pair(p, q)?;
    if grid == 0 {
        return Err(usage("--grid must be positive"));
    }
    let lambdas = match lambda0 {
        Some(l0) => closed_lambda_grid(l0, grid).map_err(|e| usage(e.to_string()))?,
        None => open_lambda_grid(grid),
    };
    let csv = curve_to_csv(&frontier_curve(&p, &q, &lambdas)?);
    match out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    files: &[PathBuf],
    family: GeneratorFamily,
    k: Option<usize>,
    n: u64,
    m: Option<u64>,
    delta: f64,
    b: f64,
) -> CliResult<()> {
    let pair = match pair_files(files)? {
        Some((p, q)) => Some(load_pair(p, q)?),
        None => None,
    };
    let k = match (&pair, k) {
        (Some((p, _)), Some(k)) if k != p.len() => {
            return Err(data(format!("--k {k} disagrees with the {} atoms in the mass files", p.len())));
        }
        (Some((p, _)), _) => p.len(),
        (None, Some(k)) => k,
        (None, None) => return Err(usage("--k is required when no mass files are given")),
    };
    if !(delta > 0.0 && delta < 1.0) {
        return Err(usage("--delta must lie in (0, 1)"));
    }
    let report = bound_report(family, k, n, m.unwrap_or(n), delta, b, pair.as_ref().map(|(p, q)| (p, q)))?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_quantize(
    files: &[PathBuf],
    strategy: StrategyArg,
    bins: usize,
    family: GeneratorFamily,
    points: Option<&Path>,
    seed: u64,
    max_iters: usize,
    out: Option<&Path>,
    histogram_out: Option<&Path>,
) -> CliResult<()> {
    if let StrategyArg::Kmeans = strategy {
        let points = points.ok_or_else(|| usage("--strategy kmeans needs --points"))?;
        if !files.is_empty() {
            return Err(usage("--strategy kmeans takes --points, not mass files"));
        }
        let pts = parse_points_csv(&read(points)?).map_err(|e| data(format!("{}: {e}", points.display())))?;
        let model = kmeans(&pts, bins, max_iters, seed)?;
        println!("cells {}", model.m());
        println!("inertia {}", format_sig12(model.inertia));
        println!("iterations {}", model.iterations);
        if let Some(path) = out {
            write(path, &centroids_to_csv(&model))?;
        }
        if let Some(path) = histogram_out {
            write(path, &histogram_to_csv(assign_to_centroids(&pts, &model)?.counts()))?;
        }
        return Ok(());
    }
    if points.is_some() || histogram_out.is_some() {
        return Err(usage("--points and --histogram-out apply to --strategy kmeans only"));
    }
    let (p, q) = match pair_files(files)? {
        Some((p, q)) => load_pair(p, q)?,
        None => return Err(usage("expected mass files for P and Q")),
    };
    let s = match strategy {
        StrategyArg::Uniform => uniform_partition(p.len(), bins)?,
        StrategyArg::Greedy => greedy_partition_for(family, &p, &q, bins)?,
        StrategyArg::Oracle => oracle_partition(family, &p, &q, bins)?,
        StrategyArg::Kmeans => unreachable!(),
    };
    let full = f_divergence(family, &p, &q)?;
    let quantized = quantized_divergence(family, &p, &q, &s)?;
    println!("bins {}", s.m());
    println!("divergence {}", format_sig12(full));
    println!("quantized {}", format_sig12(quantized));
    println!("error {}", format_sig12((full - quantized).abs()));
    if let Some(path) = out {
        write(path, &partition_to_csv(&s))?;
    }
    Ok(())
}

fn cmd_experiment(
    config: &Path,
    seed: Option<u64>,
    out: &Path,
    threads: Option<usize>,
    bound_scale: Option<f64>,
) -> CliResult<()> {
    let text = fs::read_to_string(config).map_err(|e| usage(format!("cannot read {}: {e}", config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| usage(e.to_string()))?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if let Some(scale) = bound_scale {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(usage("--bound-scale must be positive"));
        }
        cfg.bound_scale = scale;
    }
    if threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    let report = run_experiment(&cfg, threads)?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    write(&csv_path, &report.to_csv())?;
    write(&json_path, &report.to_json())?;
    println!("{}", csv_path.display());
    println!("{}", json_path.display());
    Ok(())
}

fn cmd_slope(file: &Path, x: &str, y: &str, estimator: Option<&str>, metric: Option<&str>) -> CliResult<()> {
    let text = read(file)?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| data("empty file"))?.split(',').map(str::trim).collect();
    let col = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| data(format!("no column `{name}` in {}", file.display())))
    };
    let (xi, yi) = (col(x)?, col(y)?);
    let filters: Vec<(usize, &str)> = [("estimator", estimator), ("metric", metric)]
        .into_iter()
        .filter_map(|(c, v)| v.map(|v| col(c).map(|i| (i, v))))
        .collect::<CliResult<_>>()?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(data(format!("row {} has {} fields, expected {}", i + 2, fields.len(), header.len())));
        }
        if filters.iter().any(|(c, v)| fields[*c] != *v) {
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| data(format!("row {}: `{s}` is not a number", i + 2)));
        xs.push(num(fields[xi])?);
        ys.push(num(fields[yi])?);
    }
    println!("{}", format_sig12(loglog_slope(&xs, &ys)?));
    Ok(())
}

fn cmd_ingest(
    p: &Path,
    q: &Path,
    estimator: EstimatorKind,
    family: GeneratorFamily,
    out_p: Option<&Path>,
    out_q: Option<&Path>,
) -> CliResult<()> {
    let (hp, hq) = ingest_histograms(p, q)?;
    let (ep, eq) = (estimator.estimate(&hp)?, estimator.estimate(&hq)?);
    let value = if family == GeneratorFamily::FrontierIntegral {
        frontier_integral_closed(&ep, &eq)?
    } else {
        f_divergence(family, &ep, &eq)?
    };
    println!("{}", format_sig12(value));
    if let Some(path) = out_p {
        write(path, &masses_to_csv(&ep))?;
    }
    if let Some(path) = out_q {
        write(path, &masses_to_csv(&eq))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fi { p, q, family, nodes, oracle_check } => cmd_fi(&p, &q, family, nodes, oracle_check),
        Command::Frontier { p, q, grid, lambda0, out } => cmd_frontier(&p, &q, grid, lambda0, out.as_deref()),
        Command::Bounds { files, family, k, n, m, delta, b } => cmd_bounds(&files, family, k, n, m, delta, b),
        Command::Quantize { files, strategy, bins, family, points, seed, max_iters, out, histogram_out } => {
            cmd_quantize(
                &files,
                strategy,
                bins,
                family,
                points.as_deref(),
                seed,
                max_iters,
                out.as_deref(),
                histogram_out.as_deref(),
            )
        }
        Command::Experiment { config, seed, out, threads, bound_scale } => {
            cmd_experiment(&config, seed, &out, threads, bound_scale)
        }
        Command::Slope { file, x, y, estimator, metric } => {
            cmd_slope(&file, &x, &y, estimator.as_deref(), metric.as_deref())
        }
        Command::Ingest { p, q, estimator, family, out_p, out_q } => {
            cmd_ingest(&p, &q, estimator, family, out_p.as_deref(), out_q.as_deref())
        }
    }
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
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
