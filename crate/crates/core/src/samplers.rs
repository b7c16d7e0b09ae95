//! W-random graphs, stochastic block models and the clipped sparse model.
//!
//! Latents and edges come from separate streams of the same seed
//! (see [`crate::rng`]), so resampling edges for fixed latents is cheap and
//! the pipeline reproduces bit for bit.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::kernel::{AdjacencyMatrix, LatentSample, Matrix, ProbMatrix, StepGraphon};
use crate::rng::{self, stage};

/// A sparse graphon model `Θ_ij = ρ·W0(ξ_i, ξ_j)` on `n` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub w0: StepGraphon,
    pub rho: f64,
    pub n: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(w0: StepGraphon, rho: f64, n: usize, seed: u64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return invalid(format!("sparsity rho must lie in (0,1], got {rho}"));
        }
        if n == 0 {
            return invalid("n must be positive");
        }
        Ok(Self { w0, rho, n, seed })
    }

    /// Same model with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// `n` i.i.d. uniforms on [0,1) from the latent stream of `seed`.
pub fn sample_latents(n: usize, seed: u64) -> Result<LatentSample> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let mut rng = rng::stream(seed, &[stage::LATENTS]);
    let xi = (0..n).map(|_| rng.random::<f64>()).collect();
    LatentSample::new(xi, seed)
}

fn theta_from_labels(spec: &ModelSpec, labels: &[usize], clip: bool) -> Result<ProbMatrix> {
    let n = labels.len();
    let m = Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            let v = spec.rho * spec.w0.value(labels[i], labels[j]);
            if clip {
                v.min(1.0)
            } else {
                v
            }
        }
    });
    ProbMatrix::new(m)
}

/// `Θ_ij = ρ·Q_{step(ξ_i), step(ξ_j)}` off the diagonal.
pub fn sample_theta(spec: &ModelSpec, xi: &LatentSample) -> Result<ProbMatrix> {
    if spec.rho * spec.w0.max_value() > 1.0 {
        return invalid(format!(
            "rho * max(W0) = {} exceeds one; use sample_theta_clipped for unbounded graphons",
            spec.rho * spec.w0.max_value()
        ));
    }
    theta_from_labels(spec, &xi.labels(&spec.w0), false)
}

/// `Θ_ij = min(ρ·W0(ξ_i, ξ_j), 1)`; W0 may be unbounded.
pub fn sample_theta_clipped(spec: &ModelSpec, xi: &LatentSample) -> Result<ProbMatrix> {
    // nonnegativity of W0 is a StepGraphon invariant
    theta_from_labels(spec, &xi.labels(&spec.w0), true)
}

/// Independent Bernoulli(Θ_ij) edges for `i < j`, mirrored.
pub fn sample_adjacency(theta: &ProbMatrix, seed: u64) -> AdjacencyMatrix {
    let n = theta.n();
    let mut rng = rng::stream(seed, &[stage::ADJACENCY]);
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < theta.get(i, j) {
                m.set(i, j, 1.0);
                m.set(j, i, 1.0);
            }
        }
    }
    AdjacencyMatrix::new(m).expect("sampled adjacency is symmetric and binary")
}

/// Stochastic block model with class law `pi` and connection matrix `q`
/// (row-major k×k), as a k-step W-random graph.
pub fn sbm_spec(q: Vec<f64>, pi: Vec<f64>, rho: f64, n: usize, seed: u64) -> Result<ModelSpec> {
    if pi.iter().any(|&p| p <= 0.0) {
        return invalid("class probabilities must be strictly positive");
    }
    ModelSpec::new(StepGraphon::new(q, pi)?, rho, n, seed)
}

/// One draw of the full model.
#[derive(Clone, Debug)]
pub struct GraphSample {
    pub latents: LatentSample,
    pub theta: ProbMatrix,
    pub adjacency: AdjacencyMatrix,
}

/// Latents, then Θ, then A, all from `spec.seed`. Unbounded graphons go
/// through the clipped model.
pub fn sample_graph(spec: &ModelSpec) -> Result<GraphSample> {
    let latents = sample_latents(spec.n, spec.seed)?;
    let theta = if spec.w0.is_unbounded() || spec.rho * spec.w0.max_value() > 1.0 {
        sample_theta_clipped(spec, &latents)?
    } else {
        sample_theta(spec, &latents)?
    };
    let adjacency = sample_adjacency(&theta, spec.seed);
    Ok(GraphSample { latents, theta, adjacency })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn latents_are_deterministic_and_uniform() {
        assert_eq!(sample_latents(50, 3).unwrap(), sample_latents(50, 3).unwrap());
        assert_ne!(sample_latents(50, 3).unwrap().xi, sample_latents(50, 4).unwrap().xi);
        let big = sample_latents(100_000, 1).unwrap();
        assert!(big.xi.iter().all(|x| (0.0..=1.0).contains(x)));
        let mean = big.xi.iter().sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.005);
        assert!(sample_latents(0, 1).is_err());
    }

    #[test]
    fn theta_examples() {
        let spec = ModelSpec::new(StepGraphon::constant(0.4, 1).unwrap(), 1.0, 6, 0).unwrap();
        let xi = sample_latents(6, 0).unwrap();
        let t = sample_theta(&spec, &xi).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(t.get(i, j), if i == j { 0.0 } else { 0.4 });
            }
        }
        let w = StepGraphon::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.6]], vec![0.25, 0.75]).unwrap();
        let full = sample_theta(&ModelSpec::new(w.clone(), 1.0, 30, 2).unwrap(), &sample_latents(30, 2).unwrap()).unwrap();
        let sparse = sample_theta(&ModelSpec::new(w, 0.1, 30, 2).unwrap(), &sample_latents(30, 2).unwrap()).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                assert!((sparse.get(i, j) - 0.1 * full.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn theta_mean_matches_l1_norm() {
        let w = StepGraphon::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.6]], vec![0.25, 0.75]).unwrap();
        let rho = 0.5;
        let n = 20;
        let means: Vec<f64> = (0..200)
            .map(|rep| {
                let spec = ModelSpec::new(w.clone(), rho, n, rep).unwrap();
                let t = sample_theta(&spec, &sample_latents(n, rep).unwrap()).unwrap();
                t.matrix().as_slice().iter().sum::<f64>() / (n * (n - 1)) as f64
            })
            .collect();
        let (m, sd) = mean_sd(&means);
        assert!((m - rho * w.l1_norm()).abs() <= 3.0 * sd / (200f64).sqrt());
    }

    #[test]
    fn clipping_examples() {
        let w = StepGraphon::new_unbounded(vec![5.0, 1.0, 1.0, 0.2], vec![0.5, 0.5]).unwrap();
        let spec = ModelSpec::new(w, 0.5, 40, 9).unwrap();
        let xi = sample_latents(40, 9).unwrap();
        assert!(sample_theta(&spec, &xi).is_err());
        let t = sample_theta_clipped(&spec, &xi).unwrap();
        let labels = xi.labels(&spec.w0);
        for i in 0..40 {
            for j in 0..40 {
                if i == j {
                    continue;
                }
                let expected = match (labels[i], labels[j]) {
                    (0, 0) => 1.0,
                    (1, 1) => 0.1,
                    _ => 0.5,
                };
                assert!((t.get(i, j) - expected).abs() < 1e-15);
            }
        }

        let bounded = ModelSpec::new(StepGraphon::constant(0.9, 2).unwrap(), 0.05, 20, 1).unwrap();
        let xi = sample_latents(20, 1).unwrap();
        assert_eq!(sample_theta(&bounded, &xi).unwrap(), sample_theta_clipped(&bounded, &xi).unwrap());

        let heavy = ModelSpec::new(StepGraphon::new_unbounded(vec![2.0; 4], vec![0.5, 0.5]).unwrap(), 1.0, 10, 1).unwrap();
        let t = sample_theta_clipped(&heavy, &sample_latents(10, 1).unwrap()).unwrap();
        assert!((0..10).all(|i| (0..10).all(|j| t.get(i, j) == if i == j { 0.0 } else { 1.0 })));
    }

    #[test]
    fn adjacency_examples() {
        assert_eq!(sample_adjacency(&ProbMatrix::constant(8, 0.0).unwrap(), 1).edge_count(), 0);
        assert_eq!(sample_adjacency(&ProbMatrix::constant(8, 1.0).unwrap(), 1).edge_count(), 28);
        let n = 30;
        let theta = ProbMatrix::constant(n, 0.5).unwrap();
        let counts: Vec<f64> = (0..200).map(|s| sample_adjacency(&theta, s).edge_count() as f64).collect();
        let pairs = (n * (n - 1) / 2) as f64;
        let (m, _) = mean_sd(&counts);
        // mean of 200 binomial(pairs, 1/2) counts
        let sd = (pairs * 0.25 / 200.0).sqrt();
        assert!((m - pairs / 2.0).abs() <= 3.0 * sd);
    }

    #[test]
    fn sbm_examples() {
        let er = sbm_spec(vec![0.3], vec![1.0], 1.0, 10, 0).unwrap();
        assert_eq!(er.w0.k(), 1);
        let planted = sbm_spec(vec![0.9, 0.1, 0.1, 0.9], vec![0.5, 0.5], 1.0, 10, 0).unwrap();
        assert_eq!(planted.w0.value(0, 1), 0.1);
        assert!(sbm_spec(vec![0.9, 0.1, 0.2, 0.9], vec![0.5, 0.5], 1.0, 10, 0).is_err());
        assert!(sbm_spec(vec![0.5; 4], vec![0.5, 0.6], 1.0, 10, 0).is_err());

        let n = 10_000;
        let spec = sbm_spec(vec![0.5; 4], vec![0.3, 0.7], 1.0, n, 4).unwrap();
        let labels = sample_latents(n, 4).unwrap().labels(&spec.w0);
        let ones = labels.iter().filter(|&&l| l == 0).count() as f64;
        let sd = (n as f64 * 0.3 * 0.7).sqrt();
        assert!((ones - 0.3 * n as f64).abs() <= 3.0 * sd);
    }

    #[test]
    fn pipeline_is_reproducible() {
        let spec = sbm_spec(vec![0.7, 0.2, 0.2, 0.5], vec![0.4, 0.6], 0.8, 40, 17).unwrap();
        let a = sample_graph(&spec).unwrap();
        let b = sample_graph(&spec).unwrap();
        assert_eq!(a.latents, b.latents);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.adjacency, b.adjacency);
        assert!(a.adjacency.matrix().is_symmetric(0.0));
    }

    #[test]
    fn invalid_specs() {
        let w = StepGraphon::constant(0.5, 1).unwrap();
        assert!(ModelSpec::new(w.clone(), 0.0, 5, 0).is_err());
        assert!(ModelSpec::new(w.clone(), 1.5, 5, 0).is_err());
        assert!(ModelSpec::new(w, 0.5, 0, 0).is_err());
    }
}
