//! Estimators of the probability matrix Θ0 from one adjacency matrix.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, over_budget, Error, Result};
use crate::kernel::{AdjacencyMatrix, Matrix, ProbMatrix, StepGraphon};
use crate::rng::{self, stage};

/// Default threshold multiplier for [`estimate_svt`].
pub const DEFAULT_SVT_C: f64 = 2.1;
/// Labelings enumerated by [`exact_restricted_ls`] at most.
pub const EXACT_RLS_BUDGET: u64 = 2_000_000;

/// The raw adjacency matrix read as a probability matrix.
pub fn estimate_adjacency(a: &AdjacencyMatrix) -> ProbMatrix {
    a.to_prob()
}

/// Edge density `Σ_{i≠j} A_ij / (n(n−1))`.
pub fn edge_density(a: &AdjacencyMatrix) -> Result<f64> {
    let n = a.n();
    if n < 2 {
        return invalid("edge density needs at least two vertices");
    }
    Ok(2.0 * a.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Constant off-diagonal matrix at the edge density.
pub fn estimate_mean(a: &AdjacencyMatrix) -> Result<ProbMatrix> {
    ProbMatrix::constant(a.n(), edge_density(a)?)
}

/// Threshold rule for [`estimate_svt`]: `λ = c·√(ρ̂·n)` unless an explicit
/// threshold is given. `ρ̂` defaults to the edge density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvtConfig {
    pub c: f64,
    pub rho_hat: Option<f64>,
    pub threshold: Option<f64>,
}

impl Default for SvtConfig {
    fn default() -> Self {
        Self { c: DEFAULT_SVT_C, rho_hat: None, threshold: None }
    }
}

impl SvtConfig {
    pub fn with_threshold(lambda: f64) -> Self {
        Self { threshold: Some(lambda), ..Self::default() }
    }

    pub fn threshold_for(&self, a: &AdjacencyMatrix) -> Result<f64> {
        if let Some(t) = self.threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return invalid(format!("threshold must be finite and nonnegative, got {t}"));
            }
            return Ok(t);
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return invalid(format!("threshold multiplier must be positive, got {}", self.c));
        }
        let rho = match self.rho_hat {
            Some(r) if r > 0.0 && r <= 1.0 => r,
            Some(r) => return invalid(format!("rho_hat must lie in (0,1], got {r}")),
            None => edge_density(a)?,
        };
        Ok(self.c * (rho * a.n() as f64).sqrt())
    }
}

#[derive(Clone, Debug)]
pub struct SvtOutput {
    /// Clipped to [0,1] with zero diagonal.
    pub estimate: ProbMatrix,
    /// Spectral reconstruction before clipping.
    pub unclipped: Matrix,
    pub threshold: f64,
    /// Eigenvalues kept, in decreasing order of magnitude.
    pub kept: Vec<f64>,
}

/// Hard thresholding of the spectrum of A: keep eigenpairs with `|σ| ≥ λ`.
pub fn estimate_svt(a: &AdjacencyMatrix, config: &SvtConfig) -> Result<SvtOutput> {
    let threshold = config.threshold_for(a)?;
    let n = a.n();
    let eig = SymmetricEigen::try_new(a.matrix().to_nalgebra(), 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() >= threshold).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].abs().total_cmp(&eig.eigenvalues[x].abs()).then(x.cmp(&y)));
    let mut unclipped = Matrix::zeros(n);
    for &t in &idx {
        let s = eig.eigenvalues[t];
        let v = eig.eigenvectors.column(t);
        for i in 0..n {
            let vi = s * v[i];
            for j in 0..n {
                unclipped.set(i, j, unclipped.get(i, j) + vi * v[j]);
            }
        }
    }
    // symmetrize away rounding so the clipped matrix is exactly symmetric
    let unclipped = Matrix::from_fn(n, |i, j| 0.5 * (unclipped.get(i, j) + unclipped.get(j, i)));
    let clipped = Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { unclipped.get(i, j).clamp(0.0, 1.0) });
    Ok(SvtOutput {
        estimate: ProbMatrix::new(clipped)?,
        unclipped,
        threshold,
        kept: idx.iter().map(|&t| eig.eigenvalues[t]).collect(),
    })
}

/// A k-block fit `Θ̂_ij = Q_{z_i z_j}` (i ≠ j).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFit {
    pub k: usize,
    pub z: Vec<usize>,
    /// Row-major k×k, entries in [0, ρ].
    pub q: Vec<f64>,
    /// `Σ_{i≠j} (A_ij − Q_{z_i z_j})²`.
    pub objective: f64,
}

impl BlockFit {
    pub fn theta(&self) -> ProbMatrix {
        let n = self.z.len();
        let m = Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { self.q[self.z[i] * self.k + self.z[j]] });
        ProbMatrix::new(m).expect("block fit is a probability matrix")
    }

    /// Objective recomputed from `(z, Q)`.
    pub fn recompute_objective(&self, a: &AdjacencyMatrix) -> f64 {
        objective(a.matrix(), &self.z, &self.q, self.k)
    }
}

fn objective(a: &Matrix, z: &[usize], q: &[f64], k: usize) -> f64 {
    let n = z.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = a.get(i, j) - q[z[i] * k + z[j]];
                total += d * d;
            }
        }
    }
    total
}

/// Clipped block means for labels `z`; empty blocks get 0.
fn block_means(a: &Matrix, z: &[usize], k: usize, rho: f64) -> Vec<f64> {
    let n = z.len();
    let mut sums = vec![0.0; k * k];
    for i in 0..n {
        let row = a.row(i);
        for j in 0..n {
            if i != j {
                sums[z[i] * k + z[j]] += row[j];
            }
        }
    }
    let mut counts = vec![0usize; k];
    for &l in z {
        counts[l] += 1;
    }
    (0..k * k)
        .map(|idx| {
            let (p, r) = (idx / k, idx % k);
            let pairs = if p == r { counts[p] * counts[p].saturating_sub(1) } else { counts[p] * counts[r] };
            if pairs == 0 {
                0.0
            } else {
                (sums[idx] / pairs as f64).clamp(0.0, rho)
            }
        })
        .collect()
}

fn check_rls_args(a: &AdjacencyMatrix, k: usize, rho: f64) -> Result<()> {
    if k == 0 || k > a.n() {
        return invalid(format!("block count k = {k} must lie in 1..=n (n = {})", a.n()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("rho must lie in (0,1], got {rho}"));
    }
    Ok(())
}

/// Alternating minimization from one labeling until the labels stop moving.
fn alternate_labels(a: &Matrix, mut z: Vec<usize>, k: usize, rho: f64) -> BlockFit {
    let n = z.len();
    // s[i*k + b] = Σ_{j : z_j = b} A_ij
    let mut s = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..n {
            s[i * k + z[j]] += a.get(i, j);
        }
    }
    let mut counts = vec![0usize; k];
    for &l in &z {
        counts[l] += 1;
    }
    let mut q = block_means(a, &z, k, rho);
    for _ in 0..200 {
        let mut moved = false;
        for i in 0..n {
            let cur = z[i];
            // cost(c) up to a constant: Σ_b (m_b Q_cb² − 2 s_ib Q_cb) with m_b excluding i
            let cost = |c: usize| -> f64 {
                (0..k)
                    .map(|b| {
                        let m = counts[b] - usize::from(b == cur);
                        let qv = q[c * k + b];
                        m as f64 * qv * qv - 2.0 * s[i * k + b] * qv
                    })
                    .sum()
            };
            let mut best = cur;
            let mut best_cost = cost(cur);
            for c in 0..k {
                let v = cost(c);
                if v < best_cost - 1e-12 * best_cost.abs().max(1.0) {
                    best = c;
                    best_cost = v;
                }
            }
            if best != cur {
                moved = true;
                z[i] = best;
                counts[cur] -= 1;
                counts[best] += 1;
                for j in 0..n {
                    let v = a.get(j, i);
                    s[j * k + cur] -= v;
                    s[j * k + best] += v;
                }
            }
        }
        q = block_means(a, &z, k, rho);
        if !moved {
            break;
        }
    }
    let objective = objective(a, &z, &q, k);
    BlockFit { k, z, q, objective }
}

/// Approximate restricted least squares over k-block matrices bounded by ρ.
///
/// Restart 0 splits vertices into k contiguous groups by decreasing degree;
/// the others start from uniform random labels.
pub fn estimate_restricted_ls(a: &AdjacencyMatrix, k: usize, rho: f64, restarts: usize, seed: u64) -> Result<BlockFit> {
    check_rls_args(a, k, rho)?;
    let n = a.n();
    let m = a.matrix();
    let fits: Vec<BlockFit> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let z = if r == 0 {
                let deg: Vec<f64> = (0..n).map(|i| m.row(i).iter().sum()).collect();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&x, &y| deg[y].total_cmp(&deg[x]).then(x.cmp(&y)));
                let mut z = vec![0; n];
                for (rank, &v) in order.iter().enumerate() {
                    z[v] = rank * k / n;
                }
                z
            } else {
                let mut rng = rng::stream(seed, &[stage::RESTART, r as u64]);
                (0..n).map(|_| rng.random_range(0..k)).collect()
            };
            alternate_labels(m, z, k, rho)
        })
        .collect();
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.objective < fits[best].objective {
            best = i;
        }
    }
    Ok(fits.into_iter().nth(best).unwrap())
}

/// Global minimizer by enumerating all `k^n` labelings.
pub fn exact_restricted_ls(a: &AdjacencyMatrix, k: usize, rho: f64) -> Result<BlockFit> {
    check_rls_args(a, k, rho)?;
    let n = a.n();
    let total = (k as u64).checked_pow(n as u32).filter(|&t| t <= EXACT_RLS_BUDGET);
    let Some(total) = total else {
        return over_budget(format!("k^n labelings exceed {EXACT_RLS_BUDGET} (k = {k}, n = {n})"));
    };
    let m = a.matrix();
    let decode = |mut code: u64| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let l = (code % k as u64) as usize;
                code /= k as u64;
                l
            })
            .collect()
    };
    let (obj, code) = (0..total)
        .into_par_iter()
        .map(|code| {
            let z = decode(code);
            let q = block_means(m, &z, k, rho);
            (objective(m, &z, &q, k), code)
        })
        .reduce(|| (f64::INFINITY, u64::MAX), |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x });
    let z = decode(code);
    let q = block_means(m, &z, k, rho);
    Ok(BlockFit { k, z, q, objective: obj })
}

/// Empirical graphon of an estimate.
pub fn lift_to_graphon(theta: &ProbMatrix) -> StepGraphon {
    theta.empirical_graphon()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{sample_adjacency, sample_graph, sbm_spec};

    fn adj(rows: &[Vec<f64>]) -> AdjacencyMatrix {
        AdjacencyMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn complete(n: usize) -> AdjacencyMatrix {
        AdjacencyMatrix::new(Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> AdjacencyMatrix {
        sample_adjacency(&ProbMatrix::constant(n, p).unwrap(), seed)
    }

    #[test]
    fn adjacency_and_mean_examples() {
        let a = random_graph(7, 0.4, 1);
        assert_eq!(estimate_adjacency(&a).matrix(), a.matrix());
        assert_eq!(lift_to_graphon(&estimate_adjacency(&a)), a.empirical_graphon());

        let m = estimate_mean(&complete(4)).unwrap();
        assert!((0..4).all(|i| (0..4).all(|j| m.get(i, j) == if i == j { 0.0 } else { 1.0 })));
        assert_eq!(edge_density(&complete(4)).unwrap(), 1.0);
        let empty = AdjacencyMatrix::new(Matrix::zeros(5)).unwrap();
        assert_eq!(estimate_mean(&empty).unwrap().matrix().max_abs(), 0.0);
        assert!(estimate_mean(&AdjacencyMatrix::new(Matrix::zeros(1)).unwrap()).is_err());
    }

    #[test]
    fn svt_zero_threshold_reconstructs() {
        let a = random_graph(30, 0.3, 2);
        let out = estimate_svt(&a, &SvtConfig::with_threshold(0.0)).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                assert!((out.unclipped.get(i, j) - a.get(i, j)).abs() < 1e-9);
                assert!((out.estimate.get(i, j) - a.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn svt_large_threshold_is_zero() {
        let a = random_graph(30, 0.3, 3);
        let lambda = a.matrix().spectral_norm_symmetric() * 1.001;
        let out = estimate_svt(&a, &SvtConfig::with_threshold(lambda)).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(out.unclipped.max_abs(), 0.0);
    }

    #[test]
    fn svt_rank_one_planted() {
        // noise spectral norm is about 2√(n·p(1−p)) = 8 = λ, so the bulk edge
        // sits on the threshold; a 25% margin isolates the planted direction
        let n = 64;
        let edge = 2.0 * (n as f64).sqrt() * 0.5;
        let mut exact = 0;
        for s in 0..20 {
            let a = random_graph(n, 0.5, 100 + s);
            let at_edge = estimate_svt(&a, &SvtConfig::with_threshold(edge)).unwrap().kept;
            assert!(!at_edge.is_empty() && at_edge.len() <= 4);
            assert!(at_edge.iter().any(|&v| (v - 0.5 * n as f64).abs() < 4.0));
            exact += usize::from(estimate_svt(&a, &SvtConfig::with_threshold(1.25 * edge)).unwrap().kept.len() == 1);
        }
        assert!(exact >= 19, "rank-one recovery in {exact}/20 runs");
    }

    #[test]
    fn svt_kept_count_is_monotone() {
        let a = random_graph(40, 0.5, 4);
        let mut last = usize::MAX;
        for step in 0..30 {
            let kept = estimate_svt(&a, &SvtConfig::with_threshold(step as f64)).unwrap().kept.len();
            assert!(kept <= last);
            last = kept;
        }
    }

    #[test]
    fn svt_default_threshold_uses_density() {
        let a = random_graph(50, 0.2, 5);
        let t = SvtConfig::default().threshold_for(&a).unwrap();
        assert!((t - 2.1 * (edge_density(&a).unwrap() * 50.0).sqrt()).abs() < 1e-12);
        let bad = SvtConfig { c: -1.0, ..SvtConfig::default() };
        assert!(bad.threshold_for(&a).is_err());
    }

    #[test]
    fn rls_singletons_reproduce_a() {
        let a = random_graph(9, 0.5, 6);
        let fit = estimate_restricted_ls(&a, 9, 1.0, 1, 0).unwrap();
        assert_eq!(fit.objective, 0.0);
        assert_eq!(fit.theta().matrix(), a.matrix());
    }

    #[test]
    fn rls_one_block_is_the_clipped_mean() {
        let a = random_graph(12, 0.5, 7);
        let density = edge_density(&a).unwrap();
        for rho in [1.0, 0.2] {
            let fit = estimate_restricted_ls(&a, 1, rho, 3, 0).unwrap();
            assert!((fit.q[0] - density.min(rho)).abs() < 1e-12);
            let exact = exact_restricted_ls(&a, 1, rho).unwrap();
            assert!((exact.q[0] - density.min(rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn rls_recovers_noiseless_planting() {
        let a = adj(&[
            vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
        ]);
        let fit = estimate_restricted_ls(&a, 2, 1.0, 16, 3).unwrap();
        let exact = exact_restricted_ls(&a, 2, 1.0).unwrap();
        assert_eq!(fit.objective, 0.0);
        assert_eq!(exact.objective, 0.0);
        assert!(fit.z[0] == fit.z[1] && fit.z[1] == fit.z[2] && fit.z[3] == fit.z[4] && fit.z[4] == fit.z[5]);
        assert_ne!(fit.z[0], fit.z[3]);
    }

    #[test]
    fn rls_never_beats_exact() {
        for seed in 0..20 {
            let a = random_graph(6, 0.5, 50 + seed);
            let fit = estimate_restricted_ls(&a, 2, 1.0, 8, seed).unwrap();
            let exact = exact_restricted_ls(&a, 2, 1.0).unwrap();
            assert!(fit.objective >= exact.objective - 1e-12);
            assert!((fit.recompute_objective(&a) - fit.objective).abs() < 1e-9);
            assert!((exact.recompute_objective(&a) - exact.objective).abs() < 1e-9);
        }
    }

    #[test]
    fn rls_budget_and_arguments() {
        let a = random_graph(30, 0.5, 8);
        assert!(matches!(exact_restricted_ls(&a, 2, 1.0), Err(Error::Budget(_))));
        assert!(estimate_restricted_ls(&a, 0, 1.0, 1, 0).is_err());
        assert!(estimate_restricted_ls(&a, 31, 1.0, 1, 0).is_err());
        assert!(estimate_restricted_ls(&a, 2, 0.0, 1, 0).is_err());
    }

    #[test]
    fn rls_is_deterministic() {
        let spec = sbm_spec(vec![0.8, 0.1, 0.1, 0.6], vec![0.5, 0.5], 1.0, 40, 3).unwrap();
        let g = sample_graph(&spec).unwrap();
        let f1 = estimate_restricted_ls(&g.adjacency, 2, 1.0, 8, 5).unwrap();
        let f2 = estimate_restricted_ls(&g.adjacency, 2, 1.0, 8, 5).unwrap();
        assert_eq!(f1, f2);
    }
}
