use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use graphon_cut::cut_norm::{matrix_cut_norm_exact, matrix_cut_norm_heuristic, CutMethod, CutNormResult};
use graphon_cut::distance::{delta_upper, standard_motifs, Metric, SearchConfig, DEFAULT_RESTARTS};
use graphon_cut::estimators::{estimate_adjacency, estimate_mean, estimate_restricted_ls, estimate_svt, SvtConfig, DEFAULT_SVT_C};
use graphon_cut::experiments::{fit_rate_slope, parse_csv, report_to_csv, report_to_svg, run_risk_experiment, Axis, ExperimentConfig, Transform};
use graphon_cut::packing::{graphon_packing, matrix_packing};
use graphon_cut::record::{graphon_to_string, key_values_to_string, matrix_to_string, read_graphon, read_matrix};
use graphon_cut::regularity::weak_regularity_graphon;
use graphon_cut::samplers::{sample_graph, ModelSpec};
use graphon_cut::{AdjacencyMatrix, Error, Result};

#[derive(Parser)]
#[command(name = "graphon", version, about = "Graphon estimation in the cut metric")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Adjacency,
    Mean,
    Svt,
    Rls,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutMethodArg {
    Auto,
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Cut,
    L1,
    L2,
}

#[derive(Clone, Copy, ValueEnum)]
enum PackingKind {
    Matrix,
    Graphon,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an adjacency matrix from ρ·W.
    Sample {
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
    },
    /// Estimate the probability matrix of an adjacency matrix.
    Estimate {
        #[arg(long)]
        adjacency: PathBuf,
        #[arg(long, value_enum, default_value = "adjacency")]
        estimator: EstimatorArg,
        /// Block count for `rls`.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Sparsity bound for `rls`.
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SVT_C)]
        svt_c: f64,
        /// Explicit SVT threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Cut norm of a matrix, with its witness.
    Cutnorm {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: CutMethodArg,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Distance between two step graphons up to relabeling.
    Distance {
        #[arg(long)]
        w1: PathBuf,
        #[arg(long)]
        w2: PathBuf,
        #[arg(long, value_enum, default_value = "cut")]
        metric: MetricArg,
        /// Common blow-up size.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Weak regularity approximation of a step graphon.
    Regularity {
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        q0: usize,
    },
    /// Packing family summary.
    Packing {
        #[arg(long, value_enum)]
        kind: PackingKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Step count for graphon packings.
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Monte Carlo risk experiment; writes CSV.
    Risk {
        /// Extra key=value settings applied after the configuration file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Also write an SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Log-log slope of a risk CSV.
    Slope {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "n")]
        axis: String,
        #[arg(long, default_value = "identity")]
        transform: String,
        #[arg(long)]
        estimator: Option<String>,
        #[arg(long)]
        metric: Option<String>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cut_summary(r: &CutNormResult) -> String {
    key_values_to_string(&[
        ("value", format!("{:?}", r.value)),
        (
            "method",
            match r.method {
                CutMethod::ExactEnumeration => "exact",
                CutMethod::AlternatingHeuristic => "heuristic",
                CutMethod::QSubsetBound => "q_subset",
            }
            .to_string(),
        ),
        ("upperBound", r.is_upper_bound.to_string()),
        ("S", join(&r.witness_s)),
        ("T", join(&r.witness_t)),
    ])
}

fn read_config(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => Ok(String::new()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Sample { graphon, n, rho } => {
            let w = read_graphon(&graphon)?;
            let g = sample_graph(&ModelSpec::new(w, rho, n, seed)?)?;
            emit(&cli.out, &matrix_to_string(g.adjacency.matrix()))
        }
        Command::Estimate { adjacency, estimator, k, rho, restarts, svt_c, threshold } => {
            let a = AdjacencyMatrix::new(read_matrix(&adjacency)?)?;
            let theta = match estimator {
                EstimatorArg::Adjacency => estimate_adjacency(&a),
                EstimatorArg::Mean => estimate_mean(&a)?,
                EstimatorArg::Svt => estimate_svt(&a, &SvtConfig { c: svt_c, threshold, ..SvtConfig::default() })?.estimate,
                EstimatorArg::Rls => estimate_restricted_ls(&a, k, rho, restarts, seed)?.theta(),
            };
            emit(&cli.out, &matrix_to_string(theta.matrix()))
        }
        Command::Cutnorm { matrix, method, restarts } => {
            let b = read_matrix(&matrix)?;
            let r = match method {
                CutMethodArg::Exact => matrix_cut_norm_exact(&b)?,
                CutMethodArg::Heuristic => matrix_cut_norm_heuristic(&b, restarts, seed),
                CutMethodArg::Auto => match matrix_cut_norm_exact(&b) {
                    Err(Error::Budget(_)) => matrix_cut_norm_heuristic(&b, restarts, seed),
                    other => other?,
                },
            };
            emit(&cli.out, &cut_summary(&r))
        }
        Command::Distance { w1, w2, metric, m, restarts } => {
            let (w1, w2) = (read_graphon(&w1)?, read_graphon(&w2)?);
            let metric = match metric {
                MetricArg::Cut => Metric::Cut,
                MetricArg::L1 => Metric::L1,
                MetricArg::L2 => Metric::L2,
            };
            let config = SearchConfig { m, restarts, seed, init: None, motifs: standard_motifs() };
            let d = delta_upper(&w1, &w2, metric, &config)?;
            emit(
                &cli.out,
                &key_values_to_string(&[
                    ("upper", format!("{:?}", d.upper)),
                    ("lower", format!("{:?}", d.lower)),
                    ("m", d.m.to_string()),
                    ("exactRefinement", d.exact_refinement.to_string()),
                    ("cutExact", d.cut_exact.to_string()),
                    ("permutation", join(&d.witness_permutation)),
                    ("motifs", d.witness_motifs.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(" ")),
                ]),
            )
        }
        Command::Regularity { graphon, q0 } => {
            let w = read_graphon(&graphon)?;
            let (_, dec) = weak_regularity_graphon(&w, q0)?;
            let mut entries = vec![
                ("terms", dec.terms.len().to_string()),
                ("k0", dec.k0.to_string()),
                ("threshold", format!("{:?}", dec.threshold)),
                ("residualCut", format!("{:?}", dec.residual_cut)),
            ];
            let lines: Vec<String> =
                dec.terms.iter().map(|t| format!("{:?} | {} | {}", t.a, join(&t.s), join(&t.t))).collect();
            for l in &lines {
                entries.push(("term", l.clone()));
            }
            emit(&cli.out, &key_values_to_string(&entries))
        }
        Command::Packing { kind, n, rho, k } => {
            let text = match kind {
                PackingKind::Matrix => matrix_packing(n, rho, seed)?.sidecar(),
                PackingKind::Graphon => {
                    let fam = graphon_packing(k, n, rho, seed)?;
                    let mut text = fam.sidecar();
                    if let Some(first) = fam.elements.first() {
                        text.push_str(&graphon_to_string(first));
                    }
                    text
                }
            };
            emit(&cli.out, &text)
        }
        Command::Risk { set, svg } => {
            let mut text = read_config(&cli.config)?;
            text.push('\n');
            for s in &set {
                text.push_str(s);
                text.push('\n');
            }
            let mut config = ExperimentConfig::parse(&text)?;
            if !text.lines().any(|l| l.trim_start().starts_with("seed")) {
                config.seed = seed;
            }
            let out = cli.out.clone().or_else(|| config.out.clone());
            let report = run_risk_experiment(&config)?;
            for f in &report.failures {
                eprintln!("task failed: {f}");
            }
            emit(&out, &report_to_csv(&report))?;
            if let Some(p) = svg {
                std::fs::write(p, report_to_svg(&report, Axis::N))?;
            }
            Ok(())
        }
        Command::Slope { csv, axis, transform, estimator, metric } => {
            let report = parse_csv(&std::fs::read_to_string(&csv)?)?;
            let rows: Vec<_> = report
                .rows
                .into_iter()
                .filter(|r| estimator.as_ref().is_none_or(|e| &r.estimator == e) && metric.as_ref().is_none_or(|m| &r.metric == m))
                .collect();
            let fit = fit_rate_slope(&rows, axis.parse::<Axis>()?, transform.parse::<Transform>()?)?;
            emit(
                &cli.out,
                &key_values_to_string(&[
                    ("slope", format!("{:?}", fit.slope)),
                    ("intercept", format!("{:?}", fit.intercept)),
                    ("r2", format!("{:?}", fit.r2)),
                    ("points", fit.points.to_string()),
                ]),
            )
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Parse(_) => 2,
        Error::Budget(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
