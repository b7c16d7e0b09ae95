//! Monte Carlo risk harness: parameter grids, reference rates, slope fits
//! and CSV / SVG output.
//!
//! Every (cell, replication) task draws from its own stream addressed by
//! `(seed, n, k, ρ, rep)`, so reports do not depend on the thread schedule
//! or on the order of the grid.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::cut_norm::{matrix_cut_norm_exact, matrix_cut_norm_heuristic};
use crate::distance::{default_blowup, delta_upper, Metric, SearchConfig};
use crate::error::{invalid, Error, Result};
use crate::estimators::{estimate_adjacency, estimate_mean, estimate_restricted_ls, estimate_svt, lift_to_graphon, SvtConfig};
use crate::kernel::{blowup_assignment, LatentSample, ProbMatrix, StepGraphon};
use crate::record::parse_key_values;
use crate::rng::{self, stage};
use crate::samplers::{sample_graph, GraphSample, ModelSpec};

pub const CSV_HEADER: &str = "n,k,rho,estimator,metric,mean_risk,stderr,reps,theory";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Adjacency,
    Mean,
    Svt,
    Rls,
    /// `Θ̂ = Θ0`; isolates the agnostic part of graphon losses.
    Oracle,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Adjacency => "adjacency",
            Estimator::Mean => "mean",
            Estimator::Svt => "svt",
            Estimator::Rls => "rls",
            Estimator::Oracle => "oracle",
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" => Ok(Estimator::Adjacency),
            "mean" => Ok(Estimator::Mean),
            "svt" => Ok(Estimator::Svt),
            "rls" => Ok(Estimator::Rls),
            "oracle" => Ok(Estimator::Oracle),
            _ => invalid(format!("unknown estimator `{s}` (expected adjacency, mean, svt, rls or oracle)")),
        }
    }
}

/// Loss functions. Matrix losses compare `Θ̂` with `Θ0`; graphon losses
/// compare the empirical graphon of `Θ̂` with `ρ·W0` up to relabeling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RiskMetric {
    /// `‖Θ̂ − Θ0‖□` (normalized).
    Cut,
    /// `‖Θ̂ − Θ0‖₁ / n²`.
    L1,
    /// `‖Θ̂ − Θ0‖₂ / n`.
    Frobenius,
    /// δ□ upper bound.
    DeltaCut,
    /// δ1 upper bound.
    DeltaL1,
    /// δ2 upper bound.
    L2,
}

impl RiskMetric {
    pub fn name(self) -> &'static str {
        match self {
            RiskMetric::Cut => "cut",
            RiskMetric::L1 => "l1",
            RiskMetric::Frobenius => "frobenius",
            RiskMetric::DeltaCut => "delta_cut",
            RiskMetric::DeltaL1 => "delta_l1",
            RiskMetric::L2 => "l2",
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            RiskMetric::Cut => Regime::CutMatrix,
            RiskMetric::L1 => Regime::L1,
            RiskMetric::Frobenius => Regime::Frobenius,
            RiskMetric::DeltaCut => Regime::Cut,
            RiskMetric::DeltaL1 => Regime::L1Graphon,
            RiskMetric::L2 => Regime::L2Graphon,
        }
    }
}

impl FromStr for RiskMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(RiskMetric::Cut),
            "l1" => Ok(RiskMetric::L1),
            "frobenius" => Ok(RiskMetric::Frobenius),
            "delta_cut" => Ok(RiskMetric::DeltaCut),
            "delta_l1" => Ok(RiskMetric::DeltaL1),
            "l2" | "delta_l2" => Ok(RiskMetric::L2),
            _ => invalid(format!("unknown metric `{s}` (expected cut, l1, l2, frobenius, delta_cut or delta_l1)")),
        }
    }
}

/// Family the true graphon W0 is drawn from, given k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthModel {
    /// Symmetric uniform values, equal weights.
    Random,
    /// Symmetric fair 0/1 values, equal weights.
    Binary,
    /// 0.7 on the diagonal blocks, 0.3 elsewhere, equal weights.
    Planted,
}

impl FromStr for TruthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(TruthModel::Random),
            "binary" => Ok(TruthModel::Binary),
            "planted" => Ok(TruthModel::Planted),
            _ => invalid(format!("unknown model `{s}` (expected random, binary or planted)")),
        }
    }
}

impl TruthModel {
    pub fn name(self) -> &'static str {
        match self {
            TruthModel::Random => "random",
            TruthModel::Binary => "binary",
            TruthModel::Planted => "planted",
        }
    }
}

/// The k-step truth for `(seed, k)`.
pub fn truth_graphon(model: TruthModel, k: usize, seed: u64) -> Result<StepGraphon> {
    if k == 0 {
        return invalid("k must be positive");
    }
    let mut rng = rng::stream(seed, &[stage::TRUTH, k as u64]);
    let mut q = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v = match model {
                TruthModel::Random => rng.random::<f64>(),
                TruthModel::Binary => f64::from(u8::from(rng.random::<bool>())),
                TruthModel::Planted => {
                    if a == b {
                        0.7
                    } else {
                        0.3
                    }
                }
            };
            q[a * k + b] = v;
            q[b * k + a] = v;
        }
    }
    StepGraphon::new(q, vec![1.0 / k as f64; k])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub rhos: Vec<f64>,
    pub estimators: Vec<Estimator>,
    pub metrics: Vec<RiskMetric>,
    pub reps: usize,
    pub seed: u64,
    /// Restarts for cut-norm heuristics and least squares.
    pub restarts: usize,
    /// Blow-up size for graphon metrics; automatic when `None`.
    pub blowup: Option<usize>,
    pub model: TruthModel,
    pub svt_c: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ns: vec![64],
            ks: vec![4],
            rhos: vec![1.0],
            estimators: vec![Estimator::Adjacency],
            metrics: vec![RiskMetric::Cut],
            reps: 10,
            seed: 0,
            restarts: 8,
            blowup: None,
            model: TruthModel::Random,
            svt_c: crate::estimators::DEFAULT_SVT_C,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
}

impl ExperimentConfig {
    /// Parse `key=value` lines. Grid keys (`n`, `k`, `rho`, `estimator`,
    /// `metric`) may repeat or hold comma-separated lists; a key given in
    /// the text replaces the default list.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (key, value) in parse_key_values(text)? {
            if seen.insert(key.clone()) {
                clear_grid(&mut cfg, &key);
            }
            for v in value.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                match key.as_str() {
                    "n" => push_grid(&mut cfg.ns, parse_value(&key, v)?),
                    "k" => push_grid(&mut cfg.ks, parse_value(&key, v)?),
                    "rho" => push_grid(&mut cfg.rhos, parse_value(&key, v)?),
                    "estimator" => push_grid(&mut cfg.estimators, v.parse()?),
                    "metric" => push_grid(&mut cfg.metrics, v.parse()?),
                    "reps" => cfg.reps = parse_value(&key, v)?,
                    "seed" => cfg.seed = parse_value(&key, v)?,
                    "restarts" => cfg.restarts = parse_value(&key, v)?,
                    "blowup" => cfg.blowup = Some(parse_value(&key, v)?),
                    "model" => cfg.model = v.parse()?,
                    "svt_c" => cfg.svt_c = parse_value(&key, v)?,
                    "out" => cfg.out = Some(PathBuf::from(v)),
                    _ => return Err(Error::Parse(format!("unknown configuration key `{key}`"))),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return invalid("reps must be at least 1");
        }
        if self.ns.is_empty() || self.ks.is_empty() || self.rhos.is_empty() || self.estimators.is_empty() || self.metrics.is_empty() {
            return invalid("every grid (n, k, rho, estimator, metric) must be non-empty");
        }
        if let Some(r) = self.rhos.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return invalid(format!("rho must lie in (0,1], got {r}"));
        }
        if self.ns.iter().any(|&n| n < 2) {
            return invalid("n must be at least 2");
        }
        if self.ks.contains(&0) {
            return invalid("k must be positive");
        }
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        if self.svt_c.is_nan() || self.svt_c <= 0.0 {
            return invalid("svt_c must be positive");
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &k in &self.ks {
                for &rho in &self.rhos {
                    out.push((n, k, rho));
                }
            }
        }
        out
    }
}

fn clear_grid(cfg: &mut ExperimentConfig, key: &str) {
    match key {
        "n" => cfg.ns.clear(),
        "k" => cfg.ks.clear(),
        "rho" => cfg.rhos.clear(),
        "estimator" => cfg.estimators.clear(),
        "metric" => cfg.metrics.clear(),
        _ => {}
    }
}

fn push_grid<T: PartialEq>(grid: &mut Vec<T>, v: T) {
    if !grid.contains(&v) {
        grid.push(v);
    }
}

/// Reference rate shapes with unit constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Graphon estimation in δ□.
    Cut,
    /// Matrix estimation in the cut norm.
    CutMatrix,
    /// Matrix estimation in normalized Frobenius norm.
    Frobenius,
    /// Matrix estimation in normalized ℓ1 norm.
    L1,
    L2Graphon,
    L1Graphon,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(Regime::Cut),
            "cut_matrix" => Ok(Regime::CutMatrix),
            "frobenius" => Ok(Regime::Frobenius),
            "l1" => Ok(Regime::L1),
            "l2graphon" => Ok(Regime::L2Graphon),
            "l1graphon" => Ok(Regime::L1Graphon),
            _ => invalid(format!("unknown regime `{s}`")),
        }
    }
}

/// Rate formula for a regime; each is capped at ρ (the zero estimator).
/// For `k = 1` every regime reduces to `min(√ρ/n, ρ)`.
pub fn rate_formula(regime: Regime, n: usize, k: usize, rho: f64) -> Result<f64> {
    if n < 2 || k == 0 {
        return invalid(format!("rate formulas need n ≥ 2 and k ≥ 1 (n = {n}, k = {k})"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("rho must lie in (0,1], got {rho}"));
    }
    let (nf, kf) = (n as f64, k as f64);
    if k == 1 && regime != Regime::CutMatrix {
        return Ok((rho.sqrt() / nf).min(rho));
    }
    let lk = kf.ln();
    let v = match regime {
        Regime::Cut => rho * (kf / (nf * lk)).sqrt().min(1.0 / nf.ln().sqrt()) + (rho / nf).sqrt(),
        Regime::CutMatrix => (rho / nf).sqrt(),
        Regime::Frobenius | Regime::L1 => (rho * lk / nf).sqrt() + rho.sqrt() * kf / nf,
        Regime::L2Graphon => rho.sqrt() * kf / nf + (rho * lk / nf).sqrt() + rho * (kf / nf).powf(0.25),
        Regime::L1Graphon => rho * (kf / nf).sqrt() + rho.sqrt() * kf / nf + (rho * lk / nf).sqrt(),
    };
    Ok(v.min(rho))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskRow {
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    pub estimator: String,
    pub metric: String,
    pub mean_risk: f64,
    /// Sample standard deviation over `√reps`.
    pub stderr: f64,
    pub reps: usize,
    pub theory: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RiskReport {
    pub rows: Vec<RiskRow>,
    /// Tasks that failed, as `n,k,rho,rep: message`.
    pub failures: Vec<String>,
}

impl RiskReport {
    pub fn select(&self, estimator: &str, metric: &str) -> Vec<RiskRow> {
        self.rows.iter().filter(|r| r.estimator == estimator && r.metric == metric).cloned().collect()
    }
}

/// Seed of one replication.
pub fn task_seed(seed: u64, n: usize, k: usize, rho: f64, rep: usize) -> u64 {
    rng::stream(seed, &[stage::CELL, n as u64, k as u64, rho.to_bits(), rep as u64]).random()
}

/// Permutation of the blow-up steps of `ρW0` that places the vertices of
/// the estimate in latent order.
fn latent_alignment(latents: &LatentSample, m: usize) -> Result<Vec<usize>> {
    let n = latents.n();
    let slots = blowup_assignment(&vec![1.0 / n as f64; n], m)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| latents.xi[slots[x]].total_cmp(&latents.xi[slots[y]]).then(x.cmp(&y)));
    let mut perm = vec![0; m];
    for (rank, &x) in order.iter().enumerate() {
        perm[x] = rank;
    }
    Ok(perm)
}

struct TaskContext<'a> {
    config: &'a ExperimentConfig,
    truth: &'a StepGraphon,
    k: usize,
    rho: f64,
    seed: u64,
}

fn estimate(ctx: &TaskContext, est: Estimator, g: &GraphSample) -> Result<ProbMatrix> {
    let a = &g.adjacency;
    match est {
        Estimator::Oracle => Ok(g.theta.clone()),
        Estimator::Adjacency => Ok(estimate_adjacency(a)),
        Estimator::Mean => estimate_mean(a),
        Estimator::Svt => Ok(estimate_svt(a, &SvtConfig { c: ctx.config.svt_c, ..SvtConfig::default() })?.estimate),
        Estimator::Rls => Ok(estimate_restricted_ls(a, ctx.k.min(a.n()), ctx.rho, ctx.config.restarts, ctx.seed)?.theta()),
    }
}

fn loss(ctx: &TaskContext, metric: RiskMetric, est: &ProbMatrix, theta: &ProbMatrix, latents: &LatentSample) -> Result<f64> {
    let n = theta.n();
    let d = est.matrix().sub(theta.matrix());
    let area = (n * n) as f64;
    match metric {
        RiskMetric::Cut if n <= 12 => Ok(matrix_cut_norm_exact(&d)?.value),
        RiskMetric::Cut => Ok(matrix_cut_norm_heuristic(&d, ctx.config.restarts, ctx.seed).value),
        RiskMetric::L1 => Ok(d.entrywise_l1() / area),
        RiskMetric::Frobenius => Ok(d.frobenius() / n as f64),
        RiskMetric::DeltaCut | RiskMetric::DeltaL1 | RiskMetric::L2 => {
            let f_hat = lift_to_graphon(est);
            let target = ctx.truth.scaled(ctx.rho)?;
            let m = ctx.config.blowup.unwrap_or_else(|| default_blowup(&f_hat, &target));
            let search = SearchConfig {
                m: Some(m),
                restarts: 1,
                seed: ctx.seed,
                init: Some(latent_alignment(latents, m)?),
                motifs: Vec::new(),
            };
            let dm = match metric {
                RiskMetric::DeltaCut => Metric::Cut,
                RiskMetric::DeltaL1 => Metric::L1,
                _ => Metric::L2,
            };
            Ok(delta_upper(&f_hat, &target, dm, &search)?.upper)
        }
    }
}

type TaskOutcome = std::result::Result<Vec<f64>, String>;

fn run_task(config: &ExperimentConfig, truth: &StepGraphon, n: usize, k: usize, rho: f64, rep: usize) -> TaskOutcome {
    let seed = task_seed(config.seed, n, k, rho, rep);
    let ctx = TaskContext { config, truth, k, rho, seed };
    let inner = || -> Result<Vec<f64>> {
        let spec = ModelSpec::new(truth.clone(), rho, n, seed)?;
        let g = sample_graph(&spec)?;
        let mut out = Vec::new();
        for &est in &config.estimators {
            let theta_hat = estimate(&ctx, est, &g)?;
            for &metric in &config.metrics {
                out.push(loss(&ctx, metric, &theta_hat, &g.theta, &g.latents)?);
            }
        }
        Ok(out)
    };
    inner().map_err(|e| format!("{n},{k},{rho},{rep}: {e}"))
}

/// Run every (cell, replication) task and aggregate per cell, estimator
/// and metric. Failed tasks are listed in the report and skipped.
pub fn run_risk_experiment(config: &ExperimentConfig) -> Result<RiskReport> {
    config.validate()?;
    let cells = config.cells();
    let mut truths = Vec::new();
    for &(_, k, _) in &cells {
        truths.push(truth_graphon(config.model, k, config.seed)?);
    }
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..config.reps).map(move |r| (c, r))).collect();
    let outcomes: Vec<TaskOutcome> = tasks
        .par_iter()
        .map(|&(c, rep)| {
            let (n, k, rho) = cells[c];
            run_task(config, &truths[c], n, k, rho, rep)
        })
        .collect();
    let mut report = RiskReport::default();
    let per_cell = config.estimators.len() * config.metrics.len();
    for (c, &(n, k, rho)) in cells.iter().enumerate() {
        let mut samples: Vec<Vec<f64>> = vec![Vec::new(); per_cell];
        for rep in 0..config.reps {
            match &outcomes[c * config.reps + rep] {
                Ok(values) => {
                    for (slot, v) in values.iter().enumerate() {
                        samples[slot].push(*v);
                    }
                }
                Err(msg) => report.failures.push(msg.clone()),
            }
        }
        for (ei, est) in config.estimators.iter().enumerate() {
            for (mi, metric) in config.metrics.iter().enumerate() {
                let xs = &samples[ei * config.metrics.len() + mi];
                if xs.is_empty() {
                    continue;
                }
                let (mean, stderr) = mean_stderr(xs);
                report.rows.push(RiskRow {
                    n,
                    k,
                    rho,
                    estimator: est.name().to_string(),
                    metric: metric.name().to_string(),
                    mean_risk: mean,
                    stderr,
                    reps: xs.len(),
                    theory: rate_formula(metric.regime(), n, k, rho)?,
                });
            }
        }
    }
    Ok(report)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    N,
    K,
    Rho,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Axis::N),
            "k" => Ok(Axis::K),
            "rho" => Ok(Axis::Rho),
            _ => invalid(format!("unknown axis `{s}` (expected n, k or rho)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// `x / ln x`.
    KOverLogK,
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Transform::Identity),
            "k_over_log_k" => Ok(Transform::KOverLogK),
            _ => invalid(format!("unknown transform `{s}` (expected identity or k_over_log_k)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least-squares slope of `log(mean_risk)` against `log(transform(axis))`.
/// The rows must have at least four distinct values on the axis and no
/// repeated ones.
pub fn fit_rate_slope(rows: &[RiskRow], axis: Axis, transform: Transform) -> Result<SlopeFit> {
    let mut pts = Vec::with_capacity(rows.len());
    for r in rows {
        let x = match axis {
            Axis::N => r.n as f64,
            Axis::K => r.k as f64,
            Axis::Rho => r.rho,
        };
        let x = match transform {
            Transform::Identity => x,
            Transform::KOverLogK => {
                if x <= 1.0 {
                    return invalid("the k/log k transform needs axis values above 1");
                }
                x / x.ln()
            }
        };
        if !(x > 0.0 && r.mean_risk > 0.0) {
            return invalid("log-log fit needs positive axis values and risks");
        }
        pts.push((x.ln(), r.mean_risk.ln()));
    }
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() != pts.len() {
        return invalid("degenerate grid: repeated values on the fitted axis");
    }
    if pts.len() < 4 {
        return invalid(format!("degenerate grid: {} points, need at least 4", pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit { slope, intercept: my - slope * mx, r2, points: pts.len() })
}

pub fn report_to_csv(report: &RiskReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{:?},{},{},{:?},{:?},{},{:?}",
            r.n, r.k, r.rho, r.estimator, r.metric, r.mean_risk, r.stderr, r.reps, r.theory
        )
        .unwrap();
    }
    out
}

pub fn parse_csv(text: &str) -> Result<RiskReport> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse(format!("expected CSV header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse(format!("row {}: expected 9 fields, got {}", i + 2, f.len())));
        }
        rows.push(RiskRow {
            n: parse_value("n", f[0])?,
            k: parse_value("k", f[1])?,
            rho: parse_value("rho", f[2])?,
            estimator: f[3].to_string(),
            metric: f[4].to_string(),
            mean_risk: parse_value("mean_risk", f[5])?,
            stderr: parse_value("stderr", f[6])?,
            reps: parse_value("reps", f[7])?,
            theory: parse_value("theory", f[8])?,
        });
    }
    Ok(RiskReport { rows, failures: Vec::new() })
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log plot of mean risk against `axis`, one series per remaining
/// parameter combination, theory curves dashed.
pub fn report_to_svg(report: &RiskReport, axis: Axis) -> String {
    let (w, h, pad) = (720.0, 480.0, 60.0);
    let x_of = |r: &RiskRow| match axis {
        Axis::N => r.n as f64,
        Axis::K => r.k as f64,
        Axis::Rho => r.rho,
    };
    let mut series: Vec<(String, Vec<&RiskRow>)> = Vec::new();
    for r in &report.rows {
        let label = match axis {
            Axis::N => format!("{} {} k={} rho={}", r.estimator, r.metric, r.k, r.rho),
            Axis::K => format!("{} {} n={} rho={}", r.estimator, r.metric, r.n, r.rho),
            Axis::Rho => format!("{} {} n={} k={}", r.estimator, r.metric, r.n, r.k),
        };
        match series.iter_mut().find(|s| s.0 == label) {
            Some(s) => s.1.push(r),
            None => series.push((label, vec![r])),
        }
    }
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let positive: Vec<(f64, f64)> = report
        .rows
        .iter()
        .flat_map(|r| [(x_of(r), r.mean_risk), (x_of(r), r.theory)])
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if positive.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &positive {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| pad + (x.log10() - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y.log10() - y0) / (y1 - y0) * (h - 2.0 * pad);
    writeln!(
        out,
        "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>",
        h - pad,
        w - pad,
        h - pad,
        h - pad
    )
    .unwrap();
    let axis_name = match axis {
        Axis::N => "n",
        Axis::K => "k",
        Axis::Rho => "rho",
    };
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{axis_name} (log scale)</text>\n\
         <text x=\"16\" y=\"{}\" font-size=\"14\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">risk (log scale)</text>",
        w / 2.0,
        h - 20.0,
        h / 2.0,
        h / 2.0
    )
    .unwrap();
    for (i, (label, rows)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut rows = rows.clone();
        rows.sort_by(|a, b| x_of(a).total_cmp(&x_of(b)));
        let pts = |f: &dyn Fn(&RiskRow) -> f64| -> String {
            rows.iter()
                .filter(|r| x_of(r) > 0.0 && f(r) > 0.0)
                .map(|r| format!("{:.2},{:.2}", px(x_of(r)), py(f(r))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", pts(&|r| r.mean_risk)).unwrap();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-dasharray=\"6 4\" points=\"{}\"/>",
            pts(&|r| r.theory)
        )
        .unwrap();
        for r in rows.iter().filter(|r| x_of(r) > 0.0 && r.mean_risk > 0.0) {
            writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", px(x_of(r)), py(r.mean_risk)).unwrap();
        }
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{}</text>",
            pad + 10.0,
            pad + 16.0 * i as f64,
            escape(label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

/// Write the report in the given format.
pub fn emit(report: &RiskReport, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => report_to_csv(report),
        OutputFormat::Svg => report_to_svg(report, Axis::N),
    };
    std::fs::write(path, text)?;
    Ok(())
}
