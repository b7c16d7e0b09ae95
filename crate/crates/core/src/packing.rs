//! Packing families for minimax lower bounds.
//!
//! A family is useful for Fano's method when its elements are pairwise far
//! apart while every pairwise KL divergence between the induced graph laws
//! stays below `log|family| / 32`. Each constructor certifies what it can by
//! direct computation: code separations, explicit cut witnesses, the
//! KL arithmetic.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use crate::distance::{delta_cut_lower, Motif};
use crate::error::{invalid, over_budget, Result};
use crate::kernel::{Matrix, ProbMatrix, StepGraphon};
use crate::record::key_values_to_string;
use crate::rng::{self, stage};

/// Upper limit on the size of a matrix packing.
pub const MATRIX_PACKING_CAP: usize = 512;
/// Draws allowed per requested codeword.
const DRAWS_PER_WORD: usize = 200;

/// Sign vectors with pairwise-separated positive sets.
#[derive(Clone, Debug, PartialEq)]
pub struct SignCode {
    pub words: Vec<Vec<i8>>,
    pub target: usize,
    /// Smallest pairwise `|A_u Δ A_v|` (the length of the words when there
    /// is a single word).
    pub min_separation: usize,
    pub draws: usize,
}

impl SignCode {
    pub fn reached_target(&self) -> bool {
        self.words.len() >= self.target
    }
}

fn hamming(u: &[i8], v: &[i8]) -> usize {
    u.iter().zip(v).filter(|(a, b)| a != b).count()
}

fn min_separation(words: &[Vec<i8>], len: usize) -> usize {
    let mut best = len;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            best = best.min(hamming(&words[i], &words[j]));
        }
    }
    best
}

/// Balanced sign vectors of length `k1` whose positive sets pairwise differ
/// in more than `k1/4` places, aiming for `⌈e^{k1/16}⌉` words.
pub fn varshamov_gilbert_code(k1: usize, seed: u64) -> Result<SignCode> {
    if k1 < 8 || k1 % 2 == 1 {
        return invalid(format!("k1 must be even and at least 8, got {k1}"));
    }
    let target = (k1 as f64 / 16.0).exp().ceil() as usize;
    let budget = DRAWS_PER_WORD * target.max(8);
    let mut rng = rng::stream(seed, &[stage::CODE]);
    let mut words: Vec<Vec<i8>> = Vec::new();
    let mut draws = 0;
    while words.len() < target && draws < budget {
        draws += 1;
        let mut w: Vec<i8> = (0..k1).map(|a| if a < k1 / 2 { 1 } else { -1 }).collect();
        w.shuffle(&mut rng);
        // |A_u Δ A_v| equals the Hamming distance of the sign vectors
        if words.iter().all(|x| 4 * hamming(x, &w) > k1) {
            words.push(w);
        }
    }
    let min_separation = min_separation(&words, k1);
    Ok(SignCode { words, target, min_separation, draws })
}

/// Sign vectors of length `n` with `n/4 ≤ |V_u Δ V_v| ≤ 3n/4` pairwise,
/// aiming for `min(⌈e^{n/16}⌉, 512)` words.
fn matrix_code(n: usize, seed: u64) -> SignCode {
    let target = ((n as f64 / 16.0).exp().ceil() as usize).clamp(1, MATRIX_PACKING_CAP);
    let budget = DRAWS_PER_WORD * target.max(8);
    let mut rng = rng::stream(seed, &[stage::CODE]);
    let mut words: Vec<Vec<i8>> = Vec::new();
    let mut draws = 0;
    while words.len() < target && draws < budget {
        draws += 1;
        let w: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        if words.iter().all(|x| {
            let h = hamming(x, &w);
            4 * h >= n && 4 * h <= 3 * n
        }) {
            words.push(w);
        }
    }
    let min_separation = min_separation(&words, n);
    SignCode { words, target, min_separation, draws }
}

/// Finite family with the metadata Fano's method needs.
#[derive(Clone, Debug)]
pub struct PackingFamily<T> {
    pub elements: Vec<T>,
    /// Sign pattern behind each element.
    pub codes: Vec<Vec<i8>>,
    pub epsilon: f64,
    /// Certified lower bound on the pairwise distance (cut norm for
    /// matrices, δ□ for graphons).
    pub separation_lower: f64,
    /// Uniform upper bound on the pairwise KL divergence.
    pub kl_budget: f64,
    /// `klBudget ≤ log|elements| / 32` with at least three elements.
    pub fano_ready: bool,
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    /// Informational separation scale for graphon families (`k·ε/√M_k`).
    pub theoretical_separation: Option<f64>,
}

impl<T> PackingFamily<T> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn log_size(&self) -> f64 {
        (self.elements.len() as f64).ln()
    }

    /// `key=value` metadata sidecar.
    pub fn sidecar(&self) -> String {
        let mut entries = vec![
            ("size", self.len().to_string()),
            ("n", self.n.to_string()),
            ("k", self.k.to_string()),
            ("rho", format!("{:?}", self.rho)),
            ("epsilon", format!("{:?}", self.epsilon)),
            ("klBudget", format!("{:?}", self.kl_budget)),
            ("separationLower", format!("{:?}", self.separation_lower)),
            ("fanoReady", self.fano_ready.to_string()),
        ];
        if let Some(t) = self.theoretical_separation {
            entries.push(("theoreticalSeparation", format!("{t:?}")));
        }
        key_values_to_string(&entries)
    }
}

fn fano_ready(size: usize, kl: f64) -> bool {
    size >= 3 && kl <= (size as f64).ln() / 32.0
}

/// `16 n² ε² / (3ρ)`.
pub fn matrix_kl_budget(n: usize, rho: f64, epsilon: f64) -> f64 {
    16.0 * (n * n) as f64 * epsilon * epsilon / (3.0 * rho)
}

/// Largest ε with `16n²ε²/(3ρ) ≤ log(size)/32` and `ε < ρ/4`.
pub fn matrix_epsilon(n: usize, rho: f64, size: usize) -> f64 {
    let fano = (3.0 * rho * (size as f64).ln() / (512.0 * (n * n) as f64)).sqrt();
    (fano * (1.0 - 1e-12)).min(rho / 4.0 * (1.0 - 1e-12))
}

fn theta_u(u: &[i8], rho: f64, epsilon: f64) -> ProbMatrix {
    let n = u.len();
    let m = Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { rho / 2.0 + (u[i] * u[j]) as f64 * epsilon });
    ProbMatrix::new(m).expect("packing element is a probability matrix")
}

/// Cut norm of `Θ_u − Θ_v` certified by the explicit witnesses
/// `S ∈ {V_u∖V_v, V_v∖V_u}`, `T ∈ {V_u∩V_v, V̄_u∩V̄_v}`.
pub fn matrix_pair_separation(a: &ProbMatrix, b: &ProbMatrix, u: &[i8], v: &[i8]) -> f64 {
    let n = u.len();
    let set = |f: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..n).filter(|&i| f(i)).collect() };
    let s_sets = [set(&|i| u[i] == 1 && v[i] == -1), set(&|i| u[i] == -1 && v[i] == 1)];
    let t_sets = [set(&|i| u[i] == 1 && v[i] == 1), set(&|i| u[i] == -1 && v[i] == -1)];
    let mut best: f64 = 0.0;
    for s in &s_sets {
        for t in &t_sets {
            let sum: f64 = s.iter().map(|&i| t.iter().map(|&j| a.get(i, j) - b.get(i, j)).sum::<f64>()).sum();
            best = best.max(sum.abs());
        }
    }
    best / (n * n) as f64
}

/// Two-value packing `Θ_u = ρ/2 + u_i u_j ε` with a Fano-calibrated ε.
pub fn matrix_packing(n: usize, rho: f64, seed: u64) -> Result<PackingFamily<ProbMatrix>> {
    check_matrix_args(n, rho)?;
    let code = matrix_code(n, seed);
    let epsilon = matrix_epsilon(n, rho, code.words.len());
    build_matrix_packing(code, n, rho, epsilon)
}

/// [`matrix_packing`] with a caller-chosen ε in `[0, ρ/4)`.
pub fn matrix_packing_with_epsilon(n: usize, rho: f64, epsilon: f64, seed: u64) -> Result<PackingFamily<ProbMatrix>> {
    check_matrix_args(n, rho)?;
    if !(0.0..rho / 4.0).contains(&epsilon) {
        return invalid(format!("epsilon must lie in [0, rho/4), got {epsilon}"));
    }
    build_matrix_packing(matrix_code(n, seed), n, rho, epsilon)
}

fn check_matrix_args(n: usize, rho: f64) -> Result<()> {
    if n < 8 {
        return invalid(format!("matrix packing needs n ≥ 8, got {n}"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("rho must lie in (0,1], got {rho}"));
    }
    Ok(())
}

fn build_matrix_packing(code: SignCode, n: usize, rho: f64, epsilon: f64) -> Result<PackingFamily<ProbMatrix>> {
    if code.words.len() < 2 {
        return invalid("could not draw two separated codewords");
    }
    let elements: Vec<ProbMatrix> = code.words.iter().map(|u| theta_u(u, rho, epsilon)).collect();
    let pairs: Vec<(usize, usize)> =
        (0..elements.len()).flat_map(|i| (i + 1..elements.len()).map(move |j| (i, j))).collect();
    let separation_lower = pairs
        .par_iter()
        .map(|&(i, j)| matrix_pair_separation(&elements[i], &elements[j], &code.words[i], &code.words[j]))
        .reduce(|| f64::INFINITY, f64::min);
    let kl_budget = matrix_kl_budget(n, rho, epsilon);
    Ok(PackingFamily {
        fano_ready: fano_ready(elements.len(), kl_budget),
        elements,
        codes: code.words,
        epsilon,
        separation_lower,
        kl_budget,
        n,
        k: 2,
        rho,
        theoretical_separation: None,
    })
}

/// `k1 × M_k` sign matrix with nearly orthogonal rows.
#[derive(Clone, Debug, PartialEq)]
pub struct RademacherBlockMatrix {
    /// Row-major k1×M_k, entries ±1.
    pub b: Vec<i8>,
    pub k1: usize,
    pub mk: usize,
    /// `|⟨B_a, B_b⟩| ≤ M_k/4` for all rows `a ≠ b`.
    pub property_i_certified: bool,
    pub tries: usize,
}

impl RademacherBlockMatrix {
    pub fn get(&self, a: usize, c: usize) -> i8 {
        self.b[a * self.mk + c]
    }

    pub fn row(&self, a: usize) -> &[i8] {
        &self.b[a * self.mk..(a + 1) * self.mk]
    }

    pub fn max_row_inner_product(&self) -> i64 {
        let mut best = 0;
        for a in 0..self.k1 {
            for b in a + 1..self.k1 {
                let ip: i64 = self.row(a).iter().zip(self.row(b)).map(|(x, y)| (*x as i64) * (*y as i64)).sum();
                best = best.max(ip.abs());
            }
        }
        best
    }
}

/// `M_k = ⌈128 ln k⌉`.
pub fn block_width(k: usize) -> usize {
    (128.0 * (k as f64).ln()).ceil() as usize
}

/// Draw Rademacher matrices until the rows are nearly orthogonal.
pub fn rademacher_block_matrix(k1: usize, mk: usize, seed: u64, max_tries: usize) -> Result<RademacherBlockMatrix> {
    if mk < 8 || k1 == 0 {
        return invalid(format!("need M_k ≥ 8 and k1 ≥ 1 (got M_k = {mk}, k1 = {k1})"));
    }
    for t in 0..max_tries {
        let mut rng = rng::stream(seed, &[stage::BLOCK, t as u64]);
        let b: Vec<i8> = (0..k1 * mk).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let mut m = RademacherBlockMatrix { b, k1, mk, property_i_certified: false, tries: t + 1 };
        if 4 * m.max_row_inner_product() <= mk as i64 {
            m.property_i_certified = true;
            return Ok(m);
        }
    }
    over_budget(format!("no nearly orthogonal {k1}x{mk} sign matrix in {max_tries} tries"))
}

/// Outcome of sampling the second (mixing) property of a block matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingSpotCheck {
    pub samples: usize,
    /// Samples with `T ≥ η0·k1·|Z|/4`.
    pub passed: usize,
    /// Smallest observed `T / (η0·k1·|Z|)`.
    pub min_ratio: f64,
}

/// Sample tuples `(Z, π1, π2, ω)` with `|Z| ≥ 7M_k/8`, injections
/// `π1, π2: [k1/16] → [k1]` and ω a stochastic `Z × M_k` matrix on the
/// `1/(8M_k)` grid, and evaluate
/// `T = Σ_{a<k1/16} Σ_{b∈Z} |B_{π1(a),b} − Σ_c ω_{bc} B_{π2(a),c}|`.
pub fn spot_check_mixing(m: &RademacherBlockMatrix, samples: usize, seed: u64) -> MixingSpotCheck {
    let (k1, mk) = (m.k1, m.mk);
    let rows = (k1 / 16).max(1);
    let z_min = (7 * mk).div_ceil(8);
    let units = 8 * mk;
    let results: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng::stream(seed, &[stage::SPOT_CHECK, s as u64]);
            let z_size = rng.random_range(z_min..=mk);
            let z = index::sample(&mut rng, mk, z_size).into_vec();
            let pi1 = index::sample(&mut rng, k1, rows).into_vec();
            let pi2 = index::sample(&mut rng, k1, rows).into_vec();
            let mut t = 0.0;
            for &b in &z {
                // row of ω: `units` grid units spread over a few columns
                let support = rng.random_range(1..=8usize.min(mk));
                let cols = index::sample(&mut rng, mk, support).into_vec();
                let mut cuts: Vec<usize> = (0..support - 1).map(|_| rng.random_range(0..=units)).collect();
                cuts.push(0);
                cuts.push(units);
                cuts.sort_unstable();
                let mass: Vec<f64> = cuts.windows(2).map(|w| (w[1] - w[0]) as f64 / units as f64).collect();
                for a in 0..rows {
                    let mix: f64 = cols.iter().zip(&mass).map(|(&c, &w)| w * m.get(pi2[a], c) as f64).sum();
                    t += (m.get(pi1[a], b) as f64 - mix).abs();
                }
            }
            t / (rows * z_size) as f64
        })
        .collect();
    MixingSpotCheck {
        samples,
        passed: results.iter().filter(|&&r| r >= 0.25).count(),
        min_ratio: results.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// `32 n k1² ε² / 3` after checking that `u`, `v` are ±ε patterns with
/// `ε ≤ 1/(8k1)`.
pub fn kl_bound(u: &[f64], v: &[f64], n: usize, epsilon: f64, k1: usize) -> Result<f64> {
    if u.len() != k1 || v.len() != k1 {
        return invalid(format!("perturbations must have length k1 = {k1}"));
    }
    if epsilon < 0.0 || epsilon > 1.0 / (8.0 * k1 as f64) {
        return invalid(format!("epsilon = {epsilon} exceeds 1/(8 k1) = {}", 1.0 / (8.0 * k1 as f64)));
    }
    let tol = 1e-12 * epsilon.max(f64::MIN_POSITIVE);
    if u.iter().chain(v).any(|x| (x.abs() - epsilon).abs() > tol) {
        return invalid("perturbation entries must equal ±epsilon");
    }
    Ok(graphon_kl_budget(n, epsilon, k1))
}

pub fn graphon_kl_budget(n: usize, epsilon: f64, k1: usize) -> f64 {
    32.0 * n as f64 * (k1 * k1) as f64 * epsilon * epsilon / 3.0
}

/// `n · KL(ζ(u) ‖ ζ(v))` for the latent label laws on `[k1 + M_k]`.
pub fn latent_kl_exact(u: &[f64], v: &[f64], k1: usize, mk: usize, n: usize) -> Result<f64> {
    if u.len() != k1 || v.len() != k1 {
        return invalid(format!("perturbations must have length k1 = {k1}"));
    }
    if mk == 0 {
        return invalid("M_k must be positive");
    }
    let base = 1.0 / (2.0 * k1 as f64);
    if u.iter().chain(v).any(|x| base + x <= 0.0) {
        return invalid("perturbed step weights must stay positive");
    }
    let small: f64 = u.iter().zip(v).map(|(a, b)| (base + a) * ((base + a) / (base + b)).ln()).sum();
    // the M_k big steps carry 1/(2M_k) under both laws; their terms vanish
    Ok(n as f64 * small)
}

/// Largest graphon-packing ε: the smaller of `3/(16³ n k1)` and the Fano
/// calibration `3 log|C| / (1024 n k1²)` (both squared), kept below
/// `1/(8k1)`.
pub fn graphon_epsilon(n: usize, k1: usize, size: usize) -> f64 {
    let (nf, k1f) = (n as f64, k1 as f64);
    let standard = 3.0 / (4096.0 * nf * k1f);
    let fano = 3.0 * (size as f64).ln() / (1024.0 * nf * k1f * k1f);
    let eps = standard.min(fano).sqrt() * (1.0 - 1e-12);
    eps.min(1.0 / (8.0 * k1f) * (1.0 - 1e-12))
}

/// Step graphon `W_u` built on `B`, scaled by ρ.
pub fn packing_graphon(b: &RademacherBlockMatrix, u: &[f64], rho: f64) -> Result<StepGraphon> {
    let (k1, mk) = (b.k1, b.mk);
    let size = k1 + mk;
    let mut q = vec![0.5 * rho; size * size];
    for a in 0..k1 {
        for c in 0..mk {
            let v = rho * (1.0 + b.get(a, c) as f64) / 2.0;
            q[a * size + k1 + c] = v;
            q[(k1 + c) * size + a] = v;
        }
    }
    let mut weights: Vec<f64> = u.iter().map(|x| 1.0 / (2.0 * k1 as f64) + x).collect();
    weights.extend(std::iter::repeat_n(1.0 / (2.0 * mk as f64), mk));
    StepGraphon::new(q, weights)
}

/// Graphon packing over a Varshamov–Gilbert code (k a multiple of 32,
/// `64 ≤ k ≤ n`), or the two-point family when `k = 2`.
pub fn graphon_packing(k: usize, n: usize, rho: f64, seed: u64) -> Result<PackingFamily<StepGraphon>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("rho must lie in (0,1], got {rho}"));
    }
    if k == 2 {
        let eps = (0.25 / (n as f64).sqrt()).min(0.25);
        return two_point_packing(n, rho, eps);
    }
    if !k.is_multiple_of(32) || k < 64 || k > n {
        return invalid(format!("graphon packing needs k = 2 or k a multiple of 32 with 64 ≤ k ≤ n (k = {k}, n = {n})"));
    }
    let k1 = k / 2;
    let mk = block_width(k);
    let code = varshamov_gilbert_code(k1, seed)?;
    let b = rademacher_block_matrix(k1, mk, seed, 100)?;
    let epsilon = graphon_epsilon(n, k1, code.words.len());
    let elements = code
        .words
        .iter()
        .map(|w| {
            let u: Vec<f64> = w.iter().map(|&s| s as f64 * epsilon).collect();
            packing_graphon(&b, &u, rho)
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> =
        (0..elements.len()).flat_map(|i| (i + 1..elements.len()).map(move |j| (i, j))).collect();
    let edge = [Motif::edge()];
    let separation_lower = pairs
        .par_iter()
        .map(|&(i, j)| delta_cut_lower(&elements[i], &elements[j], &edge))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let kl_budget = graphon_kl_budget(n, epsilon, k1);
    Ok(PackingFamily {
        fano_ready: code.reached_target() && fano_ready(elements.len(), kl_budget),
        elements,
        codes: code.words,
        epsilon,
        separation_lower,
        kl_budget,
        n,
        k,
        rho,
        theoretical_separation: Some(rho * k as f64 * epsilon / (mk as f64).sqrt()),
    })
}

/// The two graphons `W_{±ε}` with `Q = (B + 1)/2`, `B = [[1,1],[1,−1]]`,
/// and step weights `1/2 ± ε`, scaled by ρ.
pub fn two_point_packing(n: usize, rho: f64, epsilon: f64) -> Result<PackingFamily<StepGraphon>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}"));
    }
    let q = vec![rho, rho, rho, 0.0];
    let elements = vec![
        StepGraphon::new(q.clone(), vec![0.5 + epsilon, 0.5 - epsilon])?,
        StepGraphon::new(q, vec![0.5 - epsilon, 0.5 + epsilon])?,
    ];
    let separation_lower = delta_cut_lower(&elements[0], &elements[1], &crate::distance::standard_motifs())?;
    // KL of the label laws, which dominates the graph-law KL
    let (p, r) = (0.5 + epsilon, 0.5 - epsilon);
    let kl_budget = n as f64 * (p * (p / r).ln() + r * (r / p).ln());
    Ok(PackingFamily {
        elements,
        codes: vec![vec![1], vec![-1]],
        epsilon,
        separation_lower,
        kl_budget,
        fano_ready: false,
        n,
        k: 2,
        rho,
        theoretical_separation: Some(rho * epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut_norm::matrix_cut_norm_exact;
    use crate::distance::{delta_exact_tiny, Metric};

    #[test]
    fn vg_code_examples() {
        let c = varshamov_gilbert_code(16, 1).unwrap();
        assert_eq!(c.target, 3);
        assert!(c.words.len() >= 3);
        for (i, u) in c.words.iter().enumerate() {
            assert_eq!(u.iter().map(|&x| x as i32).sum::<i32>(), 0);
            for v in &c.words[i + 1..] {
                assert!(hamming(u, v) > 4);
            }
        }
        let small = varshamov_gilbert_code(8, 2).unwrap();
        assert!(small.words.len() >= 2);
        assert!(small.min_separation > 2);
        assert!(varshamov_gilbert_code(7, 0).is_err());
        assert!(varshamov_gilbert_code(6, 0).is_err());
    }

    #[test]
    fn matrix_packing_examples() {
        let zero = matrix_packing_with_epsilon(16, 0.5, 0.0, 3).unwrap();
        assert!(zero.elements.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(zero.separation_lower, 0.0);

        let fam = matrix_packing(64, 1.0, 4).unwrap();
        assert_eq!(fam.len(), 55);
        assert!(fam.fano_ready);
        assert!(fam.kl_budget <= fam.log_size() / 32.0);
        assert!(fam.epsilon < 0.25);
        for (e, u) in fam.elements.iter().zip(&fam.codes) {
            let mut values: Vec<f64> = Vec::new();
            for i in 0..64 {
                assert_eq!(e.get(i, i), 0.0);
                for j in 0..64 {
                    if i != j && !values.contains(&e.get(i, j)) {
                        values.push(e.get(i, j));
                    }
                }
            }
            values.sort_by(f64::total_cmp);
            assert_eq!(values, vec![0.5 - fam.epsilon, 0.5 + fam.epsilon]);
            assert_eq!(u.len(), 64);
        }
        assert!(fam.separation_lower >= fam.epsilon / 14.0);
    }

    #[test]
    fn pair_separation_is_a_cut_witness() {
        let fam = matrix_packing_with_epsilon(10, 1.0, 0.2, 5).unwrap();
        let d = fam.elements[0].matrix().sub(fam.elements[1].matrix());
        let exact = matrix_cut_norm_exact(&d).unwrap().value;
        let sep = matrix_pair_separation(&fam.elements[0], &fam.elements[1], &fam.codes[0], &fam.codes[1]);
        assert!(sep > 0.0 && sep <= exact + 1e-15);
    }

    #[test]
    fn rademacher_examples() {
        assert_eq!(block_width(32), 444);
        assert_eq!(block_width(64), 533);
        let ok = (0..10).filter(|&s| rademacher_block_matrix(16, 444, s, 1).is_ok()).count();
        assert!(ok >= 7, "first-draw success in {ok}/10");
        let m = rademacher_block_matrix(16, 444, 0, 20).unwrap();
        assert!(m.property_i_certified);
        assert!(4 * m.max_row_inner_product() <= 444);
        for a in 0..16 {
            let s: i64 = m.row(a).iter().map(|&x| x as i64).sum();
            assert!(s.abs() <= 444);
        }
        assert!(matches!(rademacher_block_matrix(64, 8, 0, 3), Err(crate::Error::Budget(_))));
    }

    #[test]
    fn mixing_spot_check_runs() {
        let m = rademacher_block_matrix(32, 533, 1, 20).unwrap();
        let check = spot_check_mixing(&m, 50, 2);
        assert_eq!(check.samples, 50);
        assert_eq!(check.passed, 50);
        assert!(check.min_ratio > 0.25);
    }

    #[test]
    fn kl_examples() {
        let u = vec![0.01; 8];
        assert_eq!(kl_bound(&[0.0; 8], &[0.0; 8], 100, 0.0, 8).unwrap(), 0.0);
        assert!((kl_bound(&u, &u, 100, 0.01, 8).unwrap() - 6.826_666_666_666_667).abs() < 1e-9);
        assert!(kl_bound(&u, &u, 100, 0.02, 8).is_err());
        assert_eq!(latent_kl_exact(&u, &u, 8, 10, 100).unwrap(), 0.0);
        let v: Vec<f64> = (0..8).map(|a| if a % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let w: Vec<f64> = (0..8).map(|a| if a < 4 { 0.01 } else { -0.01 }).collect();
        let exact = latent_kl_exact(&v, &w, 8, 10, 100).unwrap();
        assert!(exact > 0.0 && exact <= kl_bound(&v, &w, 100, 0.01, 8).unwrap());
    }

    #[test]
    fn graphon_packing_bookkeeping() {
        let fam = graphon_packing(64, 4096, 1.0, 7).unwrap();
        let (k1, mk) = (32, 533);
        assert!(fam.len() >= 8);
        assert!(fam.fano_ready);
        assert!(fam.kl_budget <= fam.log_size() / 32.0);
        assert!(fam.epsilon < 1.0 / (8.0 * k1 as f64));
        assert!(fam.separation_lower > 0.0);
        for w in &fam.elements {
            assert_eq!(w.k(), k1 + mk);
            let total: f64 = w.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for a in 0..k1 {
                assert!((w.weights()[a] - 1.0 / 64.0).abs() - fam.epsilon < 1e-15);
            }
            assert!(w.weights()[k1..].iter().all(|&x| x == 1.0 / (2.0 * mk as f64)));
        }
        assert!(graphon_packing(48, 4096, 1.0, 0).is_err());
        assert!(graphon_packing(64, 32, 1.0, 0).is_err());
    }

    #[test]
    fn two_point_family() {
        let fam = two_point_packing(100, 1.0, 0.125).unwrap();
        assert_eq!(fam.len(), 2);
        assert!(!fam.fano_ready);
        let exact = delta_exact_tiny(&fam.elements[0], &fam.elements[1], Metric::Cut).unwrap();
        assert!(exact > 0.0);
        assert!(fam.separation_lower > 0.0 && fam.separation_lower <= exact);
        assert!(graphon_packing(2, 64, 1.0, 0).unwrap().len() == 2);
    }

    #[test]
    fn sidecar_fields() {
        let fam = matrix_packing(16, 0.5, 1).unwrap();
        let kv = crate::record::parse_key_values(&fam.sidecar()).unwrap();
        let keys: Vec<&str> = kv.iter().map(|(k, _)| k.as_str()).collect();
        for key in ["epsilon", "klBudget", "separationLower", "fanoReady"] {
            assert!(keys.contains(&key));
        }
    }
}
