//! Distances between step graphons up to relabeling.
//!
//! [`delta_upper`] refines both graphons to `m` equal steps and searches
//! over permutations of the steps of the second one; the norm of the
//! difference at the best permutation found is reported with the
//! permutation as witness. [`delta_cut_lower`] bounds δ□ from below through
//! homomorphism densities, using `|t(F,U) − t(F,W)| ≤ 4·e(F)·δ□(U,W)`.
//!
//! For the cut metric the permutation search optimizes the exact cut norm
//! when `m ≤ 12` and the squared L2 norm otherwise; the cut norm is then
//! evaluated at the witness (exactly when `m ≤ 24`, by the alternating
//! heuristic beyond, see [`DistanceEstimate::cut_exact`]).

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::cut_norm::{matrix_cut_norm_exact, matrix_cut_norm_heuristic, EXACT_MAX};
use crate::error::{invalid, over_budget, Result};
use crate::kernel::{is_permutation, Matrix, StepGraphon};
use crate::rng::{self, stage};

/// Steps beyond which the default blow-up no longer follows the exact
/// common refinement.
pub const DEFAULT_MAX_BLOWUP: usize = 64;
pub const DEFAULT_RESTARTS: usize = 32;
/// Largest common refinement accepted by [`delta_exact_tiny`].
pub const TINY_MAX: usize = 8;
/// Largest blow-up for which the cut search uses the exact cut norm.
const CUT_SEARCH_EXACT_MAX: usize = 12;
const HOM_BUDGET: u128 = 20_000_000;
const EVAL_RESTARTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Cut,
    L1,
    L2,
}

impl std::str::FromStr for Metric {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(Metric::Cut),
            "l1" => Ok(Metric::L1),
            "l2" => Ok(Metric::L2),
            other => invalid(format!("unknown metric `{other}` (expected cut, l1 or l2)")),
        }
    }
}

/// A simple graph on `q` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Motif {
    pub name: String,
    q: usize,
    edges: Vec<(usize, usize)>,
}

impl Motif {
    pub fn new(name: impl Into<String>, q: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if q == 0 || q > 6 {
            return invalid(format!("motifs have 1 to 6 vertices, got {q}"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j) in &edges {
            if i >= q || j >= q {
                return invalid(format!("edge ({i},{j}) out of range for {q} vertices"));
            }
            if i == j {
                return invalid("motifs have no self-loops");
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return invalid(format!("repeated edge ({i},{j})"));
            }
        }
        Ok(Self { name: name.into(), q, edges })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge() -> Self {
        Self::new("edge", 2, vec![(0, 1)]).unwrap()
    }

    pub fn cherry() -> Self {
        Self::new("cherry", 3, vec![(0, 1), (0, 2)]).unwrap()
    }

    pub fn triangle() -> Self {
        Self::new("triangle", 3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    pub fn four_cycle() -> Self {
        Self::new("four-cycle", 4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }
}

/// Edge, cherry, triangle and 4-cycle.
pub fn standard_motifs() -> Vec<Motif> {
    vec![Motif::edge(), Motif::cherry(), Motif::triangle(), Motif::four_cycle()]
}

/// `t(F, W) = Σ_ψ Π_a λ_{ψ(a)} Π_{(i,j)∈E} Q_{ψ(i)ψ(j)}` over all `k^q` maps.
pub fn homomorphism_density(f: &Motif, w: &StepGraphon) -> Result<f64> {
    let k = w.k();
    let maps = (k as u128).checked_pow(f.q as u32).unwrap_or(u128::MAX);
    if maps > HOM_BUDGET {
        return over_budget(format!("{k}^{} vertex maps exceed the budget of {HOM_BUDGET}", f.q));
    }
    let lambda = w.weights();
    let first_chunks: Vec<usize> = (0..k).collect();
    // parallel over the image of vertex 0
    let total = first_chunks
        .par_iter()
        .map(|&v0| {
            let mut psi = vec![0usize; f.q];
            psi[0] = v0;
            let mut acc = 0.0;
            loop {
                let mut p: f64 = psi.iter().map(|&a| lambda[a]).product();
                for &(i, j) in &f.edges {
                    p *= w.value(psi[i], psi[j]);
                }
                acc += p;
                // odometer over vertices 1..q
                let mut pos = 1;
                while pos < f.q {
                    psi[pos] += 1;
                    if psi[pos] < k {
                        break;
                    }
                    psi[pos] = 0;
                    pos += 1;
                }
                if pos >= f.q {
                    break;
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total)
}

fn motif_lower(w1: &StepGraphon, w2: &StepGraphon, motifs: &[Motif], skip_over_budget: bool) -> Result<(f64, Option<usize>)> {
    let mut best = (0.0, None);
    for (idx, f) in motifs.iter().enumerate() {
        if f.edge_count() == 0 {
            continue;
        }
        let pair = homomorphism_density(f, w1).and_then(|t1| Ok((t1, homomorphism_density(f, w2)?)));
        let (t1, t2) = match pair {
            Ok(p) => p,
            Err(crate::Error::Budget(_)) if skip_over_budget => continue,
            Err(e) => return Err(e),
        };
        let v = (t1 - t2).abs() / (4.0 * f.edge_count() as f64);
        if v > best.0 {
            best = (v, Some(idx));
        }
    }
    Ok(best)
}

/// `max_F |t(F,W1) − t(F,W2)| / (4·e(F))`, a lower bound on δ□(W1, W2).
pub fn delta_cut_lower(w1: &StepGraphon, w2: &StepGraphon, motifs: &[Motif]) -> Result<f64> {
    Ok(motif_lower(w1, w2, motifs, false)?.0)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `m ≤ limit` with every `m·λ_a` an integer (to 1e-9).
fn refinement(weights: &[f64], limit: usize) -> Option<usize> {
    (1..=limit).find(|&m| {
        weights.iter().all(|w| {
            let x = w * m as f64;
            (x - x.round()).abs() <= 1e-9 && x.round() >= 1.0
        })
    })
}

/// Common equal-step refinement of both graphons, if one exists up to `limit`.
pub fn common_refinement(w1: &StepGraphon, w2: &StepGraphon, limit: usize) -> Option<usize> {
    let m1 = refinement(w1.weights(), limit)?;
    let m2 = refinement(w2.weights(), limit)?;
    let l = m1 / gcd(m1, m2) * m2;
    (l <= limit).then_some(l)
}

/// Default blow-up size: the common refinement when it is at most
/// `max(64, k1, k2)`, that bound otherwise.
pub fn default_blowup(w1: &StepGraphon, w2: &StepGraphon) -> usize {
    let cap = DEFAULT_MAX_BLOWUP.max(w1.k()).max(w2.k());
    common_refinement(w1, w2, cap).unwrap_or(cap)
}

fn refines_exactly(w: &StepGraphon, m: usize) -> bool {
    w.weights().iter().all(|x| {
        let y = x * m as f64;
        (y - y.round()).abs() <= 1e-9
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Blow-up size; [`default_blowup`] when `None`.
    pub m: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Starting permutation for the second graphon's blow-up steps,
    /// replacing the degree-matched start of restart 0.
    pub init: Option<Vec<usize>>,
    pub motifs: Vec<Motif>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { m: None, restarts: DEFAULT_RESTARTS, seed: 0, init: None, motifs: standard_motifs() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub metric: Metric,
    pub upper: f64,
    pub lower: f64,
    /// Step `a` of the second blow-up is moved to position `a'` with
    /// `witness_permutation[a'] = a`.
    pub witness_permutation: Vec<usize>,
    /// Motif attaining `lower`, if any motif separated the graphons.
    pub witness_motifs: Vec<Motif>,
    pub m: usize,
    /// Both blow-ups are exact refinements, so `upper` bounds the distance.
    pub exact_refinement: bool,
    /// The cut norm at the witness was computed exactly (always true for
    /// L1 and L2).
    pub cut_exact: bool,
    pub seed: u64,
}

impl DistanceEstimate {
    /// Recompute the norm of the difference at the witness.
    pub fn replay(&self, w1: &StepGraphon, w2: &StepGraphon) -> Result<f64> {
        norm_at_witness(w1, w2, self.m, &self.witness_permutation, self.metric, self.seed)
    }
}

fn blown(w: &StepGraphon, m: usize) -> Result<Matrix> {
    Ok(w.blowup(m)?.to_matrix().expect("blow-up has equal weights"))
}

fn diff(b1: &Matrix, b2: &Matrix, perm: &[usize]) -> Matrix {
    Matrix::from_fn(b1.n(), |x, y| b1.get(x, y) - b2.get(perm[x], perm[y]))
}

fn evaluate(d: &Matrix, metric: Metric, seed: u64) -> (f64, bool) {
    let m = d.n();
    let area = (m * m) as f64;
    match metric {
        Metric::L1 => (d.entrywise_l1() / area, true),
        Metric::L2 => ((d.as_slice().iter().map(|v| v * v).sum::<f64>() / area).sqrt(), true),
        Metric::Cut if m <= EXACT_MAX => (matrix_cut_norm_exact(d).expect("within exact range").value, true),
        Metric::Cut => (matrix_cut_norm_heuristic(d, EVAL_RESTARTS, seed).value, false),
    }
}

/// `‖blowup(W1,m) − π·blowup(W2,m)‖` for the given metric.
pub fn norm_at_witness(w1: &StepGraphon, w2: &StepGraphon, m: usize, perm: &[usize], metric: Metric, seed: u64) -> Result<f64> {
    if !is_permutation(perm, m) {
        return invalid("witness is not a permutation of the blow-up steps");
    }
    Ok(evaluate(&diff(&blown(w1, m)?, &blown(w2, m)?, perm), metric, seed).0)
}

#[derive(Clone, Copy, PartialEq)]
enum Objective {
    ExactCut,
    Abs,
    Square,
}

fn objective_of(metric: Metric, m: usize) -> Objective {
    match metric {
        Metric::Cut if m <= CUT_SEARCH_EXACT_MAX => Objective::ExactCut,
        Metric::L1 => Objective::Abs,
        _ => Objective::Square,
    }
}

fn phi(obj: Objective, x: f64) -> f64 {
    if obj == Objective::Abs {
        x.abs()
    } else {
        x * x
    }
}

fn full_cost(b1: &Matrix, b2: &Matrix, perm: &[usize], obj: Objective) -> f64 {
    match obj {
        Objective::ExactCut => matrix_cut_norm_exact(&diff(b1, b2, perm)).expect("small").value,
        _ => {
            let m = b1.n();
            let mut s = 0.0;
            for x in 0..m {
                for y in 0..m {
                    s += phi(obj, b1.get(x, y) - b2.get(perm[x], perm[y]));
                }
            }
            s
        }
    }
}

/// Cost of the entries in rows and columns `a` and `b`.
fn local_cost(b1: &Matrix, b2: &Matrix, perm: &[usize], a: usize, b: usize, obj: Objective) -> f64 {
    let m = b1.n();
    let mut s = 0.0;
    for y in 0..m {
        s += phi(obj, b1.get(a, y) - b2.get(perm[a], perm[y]));
        s += phi(obj, b1.get(b, y) - b2.get(perm[b], perm[y]));
    }
    for x in 0..m {
        if x != a && x != b {
            s += phi(obj, b1.get(x, a) - b2.get(perm[x], perm[a]));
            s += phi(obj, b1.get(x, b) - b2.get(perm[x], perm[b]));
        }
    }
    s
}

/// Pairwise-swap descent to a local minimum.
fn descend(b1: &Matrix, b2: &Matrix, mut perm: Vec<usize>, obj: Objective) -> (f64, Vec<usize>) {
    let m = b1.n();
    let mut cost = full_cost(b1, b2, &perm, obj);
    loop {
        let mut improved = false;
        for a in 0..m {
            for b in a + 1..m {
                let tol = 1e-12 * cost.abs().max(1e-300);
                if obj == Objective::ExactCut {
                    perm.swap(a, b);
                    let c = full_cost(b1, b2, &perm, obj);
                    if c < cost - tol {
                        cost = c;
                        improved = true;
                    } else {
                        perm.swap(a, b);
                    }
                } else {
                    let before = local_cost(b1, b2, &perm, a, b, obj);
                    perm.swap(a, b);
                    let after = local_cost(b1, b2, &perm, a, b, obj);
                    if after < before - tol {
                        cost += after - before;
                        improved = true;
                    } else {
                        perm.swap(a, b);
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (full_cost(b1, b2, &perm, obj), perm)
}

/// Match steps by sorted row sums.
fn degree_matching(b1: &Matrix, b2: &Matrix) -> Vec<usize> {
    let m = b1.n();
    let order = |b: &Matrix| {
        let deg: Vec<f64> = (0..m).map(|i| b.row(i).iter().sum()).collect();
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&x, &y| deg[y].total_cmp(&deg[x]).then(x.cmp(&y)));
        idx
    };
    let (o1, o2) = (order(b1), order(b2));
    let mut perm = vec![0; m];
    for r in 0..m {
        perm[o1[r]] = o2[r];
    }
    perm
}

fn search(b1: &Matrix, b2: &Matrix, obj: Objective, restarts: usize, seed: u64, init: Option<Vec<usize>>) -> Vec<usize> {
    let m = b1.n();
    let runs: Vec<(f64, Vec<usize>)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                init.clone().unwrap_or_else(|| degree_matching(b1, b2))
            } else {
                let mut rng = rng::stream(seed, &[stage::RESTART, r as u64]);
                let mut p: Vec<usize> = (0..m).collect();
                p.shuffle(&mut rng);
                p
            };
            descend(b1, b2, start, obj)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 < runs[best].0 {
            best = i;
        }
    }
    runs.into_iter().nth(best).unwrap().1
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Upper bound on δ_metric(W1, W2) by blow-up and permutation search, with
/// the motif lower bound attached.
pub fn delta_upper(w1: &StepGraphon, w2: &StepGraphon, metric: Metric, config: &SearchConfig) -> Result<DistanceEstimate> {
    let m = config.m.unwrap_or_else(|| default_blowup(w1, w2));
    if m < w1.k().max(w2.k()) {
        return invalid(format!("blow-up size {m} is below the step counts {} and {}", w1.k(), w2.k()));
    }
    if let Some(p) = &config.init {
        if !is_permutation(p, m) {
            return invalid("initial permutation does not match the blow-up size");
        }
    }
    let b1 = blown(w1, m)?;
    let b2 = blown(w2, m)?;
    let obj = objective_of(metric, m);
    let forward = search(&b1, &b2, obj, config.restarts, config.seed, config.init.clone());
    let backward = inverse(&search(&b2, &b1, obj, config.restarts, config.seed, config.init.as_deref().map(inverse)));
    let (v_fwd, exact_fwd) = evaluate(&diff(&b1, &b2, &forward), metric, config.seed);
    let (v_bwd, exact_bwd) = evaluate(&diff(&b1, &b2, &backward), metric, config.seed);
    let (upper, perm, cut_exact) =
        if v_bwd < v_fwd { (v_bwd, backward, exact_bwd) } else { (v_fwd, forward, exact_fwd) };
    let (lower, motif) = motif_lower(w1, w2, &config.motifs, true)?;
    Ok(DistanceEstimate {
        metric,
        upper,
        lower,
        witness_permutation: perm,
        witness_motifs: motif.map(|i| vec![config.motifs[i].clone()]).unwrap_or_default(),
        m,
        exact_refinement: refines_exactly(w1, m) && refines_exactly(w2, m),
        cut_exact,
        seed: config.seed,
    })
}

fn heap_permutations(m: usize, mut visit: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..m).collect();
    let mut c = vec![0; m];
    visit(&p);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            visit(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Minimum over all permutations of the common equal-step refinement
/// (at most 8 steps).
pub fn delta_exact_tiny(w1: &StepGraphon, w2: &StepGraphon, metric: Metric) -> Result<f64> {
    let Some(m) = common_refinement(w1, w2, TINY_MAX) else {
        return invalid(format!("weights do not refine exactly to at most {TINY_MAX} equal steps"));
    };
    let b1 = blown(w1, m)?;
    let b2 = blown(w2, m)?;
    let mut best = f64::INFINITY;
    heap_permutations(m, |p| {
        best = best.min(evaluate(&diff(&b1, &b2, p), metric, 0).0);
    });
    Ok(best)
}
