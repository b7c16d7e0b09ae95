//! Cut norms of matrices and weighted step kernels.
//!
//! Matrix cut norms are normalized: `‖B‖□ = max_{S,T} |Σ_{S×T} B_ij| / n²`.
//! Kernel cut norms are weighted integrals `sup_{S,T} |Σ_{a∈S,b∈T} α_a β_b K_ab|`.
//!
//! Exact routines enumerate subsets of the smaller side only: once the row
//! set is fixed the optimal column set is read off the signs of the column
//! sums. Every [`CutNormResult`] carries a witness pair that reproduces its
//! value (except for [`CutMethod::QSubsetBound`], which is a pure bound).

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, over_budget, Result};
use crate::kernel::{Kernel, Matrix};
use crate::rng::{self, stage};

/// Largest side length handled by exhaustive enumeration.
pub const EXACT_MAX: usize = 24;
/// Largest n for which [`inf1_norm`] enumerates sign vectors.
pub const INF1_EXACT_MAX: usize = 12;
/// Largest n accepted by [`inf1_norm_exact`].
pub const INF1_ENUM_MAX: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutMethod {
    ExactEnumeration,
    AlternatingHeuristic,
    QSubsetBound,
}

/// A cut-norm value with the subset pair realizing it.
///
/// For the ∞→1 norm the witnesses are the coordinates where the optimal sign
/// vectors `f` and `g` equal `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutNormResult {
    pub value: f64,
    pub witness_s: Vec<usize>,
    pub witness_t: Vec<usize>,
    pub method: CutMethod,
    pub is_upper_bound: bool,
}

impl CutNormResult {
    /// `|Σ_{S×T} B| / n²` for the stored witnesses.
    pub fn replay_matrix(&self, b: &Matrix) -> f64 {
        let n = b.n() as f64;
        block_sum_matrix(b, &self.witness_s, &self.witness_t).abs() / (n * n)
    }

    /// `|Σ_{S×T} α_a β_b K_ab|` for the stored witnesses.
    pub fn replay_kernel(&self, k: &Kernel) -> f64 {
        k.integral(&self.witness_s, &self.witness_t).abs()
    }

    /// `f^T B g / n²` with `f`, `g` the ±1 vectors encoded by the witnesses.
    pub fn replay_signs(&self, b: &Matrix) -> f64 {
        let n = b.n();
        let f = signs_from_support(n, &self.witness_s);
        let g = signs_from_support(n, &self.witness_t);
        let total: f64 = (0..n).map(|i| f[i] * (0..n).map(|j| b.get(i, j) * g[j]).sum::<f64>()).sum();
        total / (n * n) as f64
    }
}

fn signs_from_support(n: usize, plus: &[usize]) -> Vec<f64> {
    let mut s = vec![-1.0; n];
    for &i in plus {
        s[i] = 1.0;
    }
    s
}

fn block_sum_matrix(b: &Matrix, s: &[usize], t: &[usize]) -> f64 {
    s.iter().map(|&i| t.iter().map(|&j| b.get(i, j)).sum::<f64>()).sum()
}

/// Dense r×c real matrix used internally by the enumeration and the
/// alternating heuristic (entries already weighted).
struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn from_matrix(b: &Matrix) -> Self {
        Self { rows: b.n(), cols: b.n(), data: b.as_slice().to_vec() }
    }

    fn from_kernel(k: &Kernel) -> Self {
        let (q1, q2) = (k.q1(), k.q2());
        let mut data = Vec::with_capacity(q1 * q2);
        for a in 0..q1 {
            for b in 0..q2 {
                data.push(k.row_weights()[a] * k.col_weights()[b] * k.value(a, b));
            }
        }
        Self { rows: q1, cols: q2, data }
    }

    fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.data[i * self.cols + j]);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn block_sum(&self, s: &[usize], t: &[usize]) -> f64 {
        s.iter().map(|&i| t.iter().map(|&j| self.data[i * self.cols + j]).sum::<f64>()).sum()
    }

    /// Column set maximizing `sign · Σ_{S×T}` for the given rows, and the
    /// column sums it was read from.
    fn best_cols(&self, s: &[usize], sign: f64) -> Vec<usize> {
        let mut col = vec![0.0; self.cols];
        for &i in s {
            for (c, v) in col.iter_mut().zip(self.row(i)) {
                *c += v;
            }
        }
        (0..self.cols).filter(|&j| sign * col[j] > 0.0).collect()
    }

    fn best_rows(&self, t: &[usize], sign: f64) -> Vec<usize> {
        (0..self.rows)
            .filter(|&i| {
                let r = self.row(i);
                sign * t.iter().map(|&j| r[j]).sum::<f64>() > 0.0
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
struct EnumBest {
    value: f64,
    mask: u64,
    sign: f64,
}

/// Gray-code walk over the row subsets whose top `fixed_bits` bits equal
/// `prefix`. Returns the best (value, mask, sign); ties keep the first mask
/// visited.
fn enumerate_chunk(m: &Dense, prefix: u64, free_bits: usize) -> EnumBest {
    let mut col = vec![0.0; m.cols];
    for i in free_bits..m.rows {
        if prefix >> (i - free_bits) & 1 == 1 {
            for (c, v) in col.iter_mut().zip(m.row(i)) {
                *c += v;
            }
        }
    }
    let eval = |col: &[f64]| -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for &c in col {
            if c > 0.0 {
                pos += c;
            } else {
                neg -= c;
            }
        }
        if neg > pos {
            (neg, -1.0)
        } else {
            (pos, 1.0)
        }
    };
    let base = prefix << free_bits;
    let (v0, s0) = eval(&col);
    let mut best = EnumBest { value: v0, mask: base, sign: s0 };
    let mut gray = 0u64;
    for step in 1u64..(1u64 << free_bits) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let r = m.row(bit);
        if gray >> bit & 1 == 1 {
            for (c, v) in col.iter_mut().zip(r) {
                *c += v;
            }
        } else {
            for (c, v) in col.iter_mut().zip(r) {
                *c -= v;
            }
        }
        let (v, s) = eval(&col);
        if v > best.value {
            best = EnumBest { value: v, mask: base | gray, sign: s };
        }
    }
    best
}

/// Exhaustive maximization of `|Σ_{S×T} m|`. Returns (S, T).
fn exact_witness(m: &Dense) -> (Vec<usize>, Vec<usize>) {
    if m.rows > m.cols {
        let (t, s) = exact_witness(&m.transposed());
        return (s, t);
    }
    let r = m.rows;
    let fixed = if r >= 16 { 6.min(r) } else { 0 };
    let free = r - fixed;
    let chunks: Vec<EnumBest> = (0..1u64 << fixed).into_par_iter().map(|p| enumerate_chunk(m, p, free)).collect();
    let mut best = chunks[0];
    for c in &chunks[1..] {
        if c.value > best.value {
            best = *c;
        }
    }
    let s: Vec<usize> = (0..r).filter(|&i| best.mask >> i & 1 == 1).collect();
    let t = m.best_cols(&s, best.sign);
    (s, t)
}

/// Exact normalized cut norm of a square matrix, `n ≤ 24`.
pub fn matrix_cut_norm_exact(b: &Matrix) -> Result<CutNormResult> {
    let n = b.n();
    if n > EXACT_MAX {
        return over_budget(format!(
            "exact cut norm enumerates 2^n subsets and is limited to n ≤ {EXACT_MAX} (got n = {n}); \
             use matrix_cut_norm_heuristic instead"
        ));
    }
    let (s, t) = exact_witness(&Dense::from_matrix(b));
    let mut res = CutNormResult {
        value: 0.0,
        witness_s: s,
        witness_t: t,
        method: CutMethod::ExactEnumeration,
        is_upper_bound: false,
    };
    res.value = res.replay_matrix(b);
    Ok(res)
}

/// Exact weighted cut norm of a step kernel; the smaller side must have at
/// most 24 steps.
pub fn step_kernel_cut_norm_exact(k: &Kernel) -> Result<CutNormResult> {
    if k.q1().min(k.q2()) > EXACT_MAX {
        return over_budget(format!(
            "exact kernel cut norm is limited to {EXACT_MAX} steps on one side (got {}x{})",
            k.q1(),
            k.q2()
        ));
    }
    let (s, t) = exact_witness(&Dense::from_kernel(k));
    let mut res = CutNormResult {
        value: 0.0,
        witness_s: s,
        witness_t: t,
        method: CutMethod::ExactEnumeration,
        is_upper_bound: false,
    };
    res.value = res.replay_kernel(k);
    Ok(res)
}

/// Alternating {0,1} maximization from one starting column set, for one sign.
fn alternate(m: &Dense, mut t: Vec<usize>, sign: f64) -> (f64, Vec<usize>, Vec<usize>) {
    let mut best = f64::NEG_INFINITY;
    let mut s = Vec::new();
    for _ in 0..1000 {
        let s_new = m.best_rows(&t, sign);
        let t_new = m.best_cols(&s_new, sign);
        let v = sign * m.block_sum(&s_new, &t_new);
        if v <= best * (1.0 + 1e-15) + 1e-300 && best.is_finite() {
            break;
        }
        best = v;
        s = s_new;
        t = t_new;
    }
    (best.max(0.0), s, t)
}

fn heuristic_witness(m: &Dense, restarts: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let restarts = restarts.max(1);
    let runs: Vec<(f64, Vec<usize>, Vec<usize>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start: Vec<usize> = if r == 0 {
                (0..m.cols).collect()
            } else {
                let mut rng = rng::stream(seed, &[stage::RESTART, r as u64]);
                (0..m.cols).filter(|_| rng.random::<bool>()).collect()
            };
            let plus = alternate(m, start.clone(), 1.0);
            let minus = alternate(m, start, -1.0);
            if minus.0 > plus.0 {
                minus
            } else {
                plus
            }
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = run;
        }
    }
    (best.1.clone(), best.2.clone())
}

/// Certified lower bound on `‖B‖□` by alternating maximization over 0/1
/// vectors with random restarts. Restart 0 starts from the full column set.
pub fn matrix_cut_norm_heuristic(b: &Matrix, restarts: usize, seed: u64) -> CutNormResult {
    let (s, t) = heuristic_witness(&Dense::from_matrix(b), restarts, seed);
    let mut res = CutNormResult {
        value: 0.0,
        witness_s: s,
        witness_t: t,
        method: CutMethod::AlternatingHeuristic,
        is_upper_bound: false,
    };
    res.value = res.replay_matrix(b);
    res
}

/// Kernel analogue of [`matrix_cut_norm_heuristic`].
pub fn kernel_cut_norm_heuristic(k: &Kernel, restarts: usize, seed: u64) -> CutNormResult {
    let (s, t) = heuristic_witness(&Dense::from_kernel(k), restarts, seed);
    let mut res = CutNormResult {
        value: 0.0,
        witness_s: s,
        witness_t: t,
        method: CutMethod::AlternatingHeuristic,
        is_upper_bound: false,
    };
    res.value = res.replay_kernel(k);
    res
}

/// Exact kernel cut norm when enumerable, heuristic otherwise.
pub fn kernel_cut_norm(k: &Kernel, restarts: usize, seed: u64) -> CutNormResult {
    match step_kernel_cut_norm_exact(k) {
        Ok(r) => r,
        Err(_) => kernel_cut_norm_heuristic(k, restarts, seed),
    }
}

fn signs_to_support(v: &[f64]) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] > 0.0).collect()
}

fn sign_of(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Exact `‖B‖_{∞→1} / n²` by enumerating `g ∈ {−1,1}^n` (with `g₀ = 1`)
/// and taking `f = sign(Bg)`.
pub fn inf1_norm_exact(b: &Matrix) -> Result<CutNormResult> {
    let n = b.n();
    if n > INF1_ENUM_MAX {
        return over_budget(format!("exact ∞→1 norm is limited to n ≤ {INF1_ENUM_MAX} (got {n})"));
    }
    if n == 0 {
        return invalid("empty matrix");
    }
    let bt = b.transpose();
    // bg = B·g with g starting at all ones
    let mut g = vec![1.0; n];
    let mut bg: Vec<f64> = (0..n).map(|i| b.row(i).iter().sum()).collect();
    let score = |bg: &[f64]| bg.iter().map(|v| v.abs()).sum::<f64>();
    let mut best = (score(&bg), g.clone());
    let free = n - 1;
    for step in 1u64..(1u64 << free) {
        let bit = step.trailing_zeros() as usize + 1;
        let col = bt.row(bit);
        let delta = -2.0 * g[bit];
        g[bit] = -g[bit];
        for (x, c) in bg.iter_mut().zip(col) {
            *x += delta * c;
        }
        let v = score(&bg);
        if v > best.0 {
            best = (v, g.clone());
        }
    }
    let g = best.1;
    let f: Vec<f64> = (0..n).map(|i| sign_of(b.row(i).iter().zip(&g).map(|(x, y)| x * y).sum())).collect();
    let mut res = CutNormResult {
        value: 0.0,
        witness_s: signs_to_support(&f),
        witness_t: signs_to_support(&g),
        method: CutMethod::ExactEnumeration,
        is_upper_bound: false,
    };
    res.value = res.replay_signs(b);
    Ok(res)
}

/// Lower bound on `‖B‖_{∞→1} / n²`; exact for `n ≤ 12`, otherwise the best
/// fixed point of `f = sign(Bg)`, `g = sign(Bᵀf)` over `restarts` starts.
pub fn inf1_norm(b: &Matrix, restarts: usize, seed: u64) -> Result<CutNormResult> {
    if restarts == 0 {
        return invalid("restarts must be at least 1");
    }
    let n = b.n();
    if n <= INF1_EXACT_MAX {
        return inf1_norm_exact(b);
    }
    let bt = b.transpose();
    let mult = |m: &Matrix, v: &[f64]| -> Vec<f64> {
        (0..n).map(|i| m.row(i).iter().zip(v).map(|(x, y)| x * y).sum()).collect()
    };
    let runs: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut g: Vec<f64> = if r == 0 {
                vec![1.0; n]
            } else {
                let mut rng = rng::stream(seed, &[stage::RESTART, r as u64]);
                (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
            };
            let mut f = vec![1.0; n];
            let mut best = f64::NEG_INFINITY;
            for _ in 0..1000 {
                let bg = mult(b, &g);
                f = bg.iter().map(|&x| sign_of(x)).collect();
                let btf = mult(&bt, &f);
                g = btf.iter().map(|&x| sign_of(x)).collect();
                let v: f64 = btf.iter().map(|x| x.abs()).sum();
                if best.is_finite() && v <= best * (1.0 + 1e-15) {
                    break;
                }
                best = v;
            }
            (best, f, g)
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = run;
        }
    }
    let mut res = CutNormResult {
        value: 0.0,
        witness_s: signs_to_support(&best.1),
        witness_t: signs_to_support(&best.2),
        method: CutMethod::AlternatingHeuristic,
        is_upper_bound: false,
    };
    res.value = res.replay_signs(b);
    Ok(res)
}

/// Returns `(‖B‖□, ‖B‖_{∞→1}/n²)`, both exact, after checking
/// `‖B‖□ ≤ ‖B‖_{∞→1}/n² ≤ 4‖B‖□`. A violation is an implementation bug and
/// is reported as [`crate::Error::Invariant`].
pub fn cut_norm_sandwich_check(b: &Matrix) -> Result<(f64, f64)> {
    let cut = matrix_cut_norm_exact(b)?.value;
    let op = inf1_norm_exact(b)?.value;
    let tol = 1e-12 * op.max(1.0);
    if cut > op + tol || op > 4.0 * cut + tol {
        return Err(crate::Error::Invariant(format!("sandwich violated: cut = {cut}, inf1 = {op}")));
    }
    Ok((cut, op))
}

/// The two pieces of the q-subset bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QSubsetParts {
    /// max over |R1|,|R2| ≤ q of `W[R2^{r}, R1^{l}]`, for K and −K.
    pub subset_max: f64,
    /// `(u√(kΣβ²) + v√(kΣα²))/√q`.
    pub additive: f64,
}

impl QSubsetParts {
    pub fn value(&self) -> f64 {
        self.subset_max + self.additive
    }
}

const QSUBSET_SIDE_BUDGET: u128 = 1 << 22;
const QSUBSET_WORK_BUDGET: u128 = 1 << 31;

fn binomial_prefix(n: usize, q: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for i in 0..=q.min(n) {
        total += c;
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    total
}

/// Visit every subset of `0..n` of size ≤ q.
fn for_each_small_subset(n: usize, q: usize, mut f: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, q: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        f(cur);
        if cur.len() == q {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, q, cur, f);
            cur.pop();
        }
    }
    rec(0, n, q, &mut Vec::new(), &mut f);
}

fn one_sided_subset_max(m: &Dense, q: usize) -> f64 {
    // m holds α_a β_b K_ab; the derived sets only depend on signs of partial sums
    let mut col_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for_each_small_subset(m.rows, q, |r1| {
        let set: Vec<usize> =
            (0..m.cols).filter(|&b| r1.iter().map(|&a| m.data[a * m.cols + b]).sum::<f64>() > 0.0).collect();
        col_sets.insert(set);
    });
    let mut row_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for_each_small_subset(m.cols, q, |r2| {
        let set: Vec<usize> = (0..m.rows).filter(|&a| r2.iter().map(|&b| m.data[a * m.cols + b]).sum::<f64>() > 0.0).collect();
        row_sets.insert(set);
    });
    let row_sets: Vec<Vec<usize>> = row_sets.into_iter().collect();
    col_sets
        .par_iter()
        .map(|cols| {
            let partial: Vec<f64> = (0..m.rows).map(|a| cols.iter().map(|&b| m.data[a * m.cols + b]).sum()).collect();
            row_sets.iter().map(|rows| rows.iter().map(|&a| partial[a]).sum::<f64>()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Upper bound on the weighted cut norm of `k`: a maximum over step subsets
/// of size at most `q` plus an additive term, returned in parts.
pub fn q_subset_bound_parts(k: &Kernel, q: usize) -> Result<QSubsetParts> {
    if q == 0 {
        return invalid("q must be a positive integer");
    }
    let (q1, q2) = (k.q1(), k.q2());
    let side1 = binomial_prefix(q1, q);
    let side2 = binomial_prefix(q2, q);
    if side1 > QSUBSET_SIDE_BUDGET || side2 > QSUBSET_SIDE_BUDGET || side1 * side2 * q1.max(q2) as u128 > QSUBSET_WORK_BUDGET {
        return over_budget(format!("q-subset enumeration too large for a {q1}x{q2} kernel with q = {q}"));
    }
    let alpha = k.row_weights();
    let beta = k.col_weights();
    let steps = q1.max(q2) as f64;
    let u: f64 = alpha.iter().sum();
    let v: f64 = beta.iter().sum();
    let sa: f64 = alpha.iter().map(|x| x * x).sum();
    let sb: f64 = beta.iter().map(|x| x * x).sum();
    let additive = (u * (steps * sb).sqrt() + v * (steps * sa).sqrt()) / (q as f64).sqrt();
    let dense = Dense::from_kernel(k);
    let plus = one_sided_subset_max(&dense, q);
    let minus = one_sided_subset_max(&Dense::from_kernel(&k.negated()), q);
    Ok(QSubsetParts { subset_max: plus.max(minus), additive })
}

/// Upper bound on `‖K‖□` (weighted) from subsets of size at most `q`.
pub fn q_subset_upper_bound(k: &Kernel, q: usize) -> Result<f64> {
    Ok(q_subset_bound_parts(k, q)?.value())
}

/// `‖K‖₁ / (4√(2 q₂))`, a lower bound on the weighted cut norm.
pub fn khintchine_lower_bound(k: &Kernel) -> f64 {
    k.l1_norm() / (4.0 * (2.0 * k.q2() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over every (S, T) pair.
    fn brute_cut(b: &Matrix) -> f64 {
        let n = b.n();
        let mut best: f64 = 0.0;
        for s in 0u32..(1 << n) {
            for t in 0u32..(1 << n) {
                let mut sum = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if s >> i & 1 == 1 && t >> j & 1 == 1 {
                            sum += b.get(i, j);
                        }
                    }
                }
                best = best.max(sum.abs());
            }
        }
        best / (n * n) as f64
    }

    fn brute_inf1(b: &Matrix) -> f64 {
        let n = b.n();
        let mut best: f64 = 0.0;
        for fm in 0u32..(1 << n) {
            for gm in 0u32..(1 << n) {
                let s = |m: u32, i: usize| if m >> i & 1 == 1 { 1.0 } else { -1.0 };
                let mut v = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        v += s(fm, i) * s(gm, j) * b.get(i, j);
                    }
                }
                best = best.max(v);
            }
        }
        best / (n * n) as f64
    }

    fn pm() -> Matrix {
        Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(matrix_cut_norm_exact(&Matrix::zeros(3)).unwrap().value, 0.0);
        let ones = Matrix::from_fn(4, |_, _| 1.0);
        let r = matrix_cut_norm_exact(&ones).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.witness_s, [0, 1, 2, 3]);
        assert_eq!(r.witness_t, [0, 1, 2, 3]);
        let r = matrix_cut_norm_exact(&pm()).unwrap();
        assert_eq!(brute_cut(&pm()), 0.25);
        assert_eq!(r.value, 0.25);
        assert_eq!(r.replay_matrix(&pm()), 0.25);
    }

    #[test]
    fn exact_rejects_large_inputs() {
        let err = matrix_cut_norm_exact(&Matrix::zeros(25)).unwrap_err();
        assert!(matches!(err, crate::Error::Budget(_)));
        assert!(err.to_string().contains("heuristic"));
    }

    #[test]
    fn exact_matches_brute_force() {
        let mut rng = rng::stream(11, &[0]);
        for n in 1..=5 {
            for _ in 0..20 {
                let b = Matrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let r = matrix_cut_norm_exact(&b).unwrap();
                assert!((r.value - brute_cut(&b)).abs() < 1e-12);
                assert!((r.replay_matrix(&b) - r.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_parallel_chunks_agree_with_heuristic_bound() {
        let mut rng = rng::stream(12, &[0]);
        let b = Matrix::from_fn(17, |_, _| rng.random_range(-1.0..1.0));
        let exact = matrix_cut_norm_exact(&b).unwrap();
        let heur = matrix_cut_norm_heuristic(&b, 32, 3);
        assert!(heur.value <= exact.value + 1e-12);
        assert!((exact.replay_matrix(&b) - exact.value).abs() < 1e-12);
    }

    #[test]
    fn kernel_examples() {
        let c = Kernel::new(vec![0.3; 6], vec![0.2, 0.3], vec![0.1, 0.1, 0.4]).unwrap();
        assert!((step_kernel_cut_norm_exact(&c).unwrap().value - 0.3 * 0.5 * 0.6).abs() < 1e-15);

        let k = Kernel::new(vec![1.0, -1.0, -1.0, 1.0], vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!((step_kernel_cut_norm_exact(&k).unwrap().value - 0.25).abs() < 1e-15);

        let one_row = Kernel::new(vec![0.5, 0.25, 0.0, 0.0, 0.0, 0.0], vec![0.5, 0.5], vec![0.2, 0.4, 0.4]).unwrap();
        let expected = 0.5 * (0.2 * 0.5 + 0.4 * 0.25);
        assert!((step_kernel_cut_norm_exact(&one_row).unwrap().value - expected).abs() < 1e-15);
    }

    #[test]
    fn kernel_enumerates_the_smaller_side() {
        let mut rng = rng::stream(13, &[0]);
        let vals: Vec<f64> = (0..3 * 30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = Kernel::new(vals, vec![1.0 / 3.0; 3], vec![1.0 / 30.0; 30]).unwrap();
        let r = step_kernel_cut_norm_exact(&k).unwrap();
        assert!((r.replay_kernel(&k) - r.value).abs() < 1e-14);
        let t = step_kernel_cut_norm_exact(&k.transposed()).unwrap();
        assert!((t.value - r.value).abs() < 1e-14);
    }

    #[test]
    fn inf1_examples() {
        let r = inf1_norm(&pm(), 1, 0).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(brute_inf1(&pm()), 1.0);
        let ones = Matrix::from_fn(3, |_, _| 1.0);
        assert_eq!(inf1_norm(&ones, 1, 0).unwrap().value, 1.0);
        assert_eq!(inf1_norm(&Matrix::zeros(3), 1, 0).unwrap().value, 0.0);
        assert!(inf1_norm(&ones, 0, 0).is_err());
    }

    #[test]
    fn inf1_exact_matches_brute_force() {
        let mut rng = rng::stream(14, &[0]);
        for n in 1..=5 {
            let b = Matrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let r = inf1_norm_exact(&b).unwrap();
            assert!((r.value - brute_inf1(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn inf1_heuristic_is_a_lower_bound() {
        let mut rng = rng::stream(15, &[0]);
        let b = Matrix::from_fn(14, |_, _| rng.random_range(-1.0..1.0));
        let h = inf1_norm(&b, 16, 1).unwrap();
        assert_eq!(h.method, CutMethod::AlternatingHeuristic);
        assert!(h.value <= inf1_norm_exact(&b).unwrap().value + 1e-12);
        assert!((h.replay_signs(&b) - h.value).abs() < 1e-12);
    }

    #[test]
    fn sandwich_examples() {
        let (lo, hi) = cut_norm_sandwich_check(&pm()).unwrap();
        assert_eq!((lo, hi), (0.25, 1.0));
        let ones = Matrix::from_fn(4, |_, _| 1.0);
        assert_eq!(cut_norm_sandwich_check(&ones).unwrap(), (1.0, 1.0));
        let mut rng = rng::stream(16, &[0]);
        for _ in 0..20 {
            let b = Matrix::from_fn(4, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
            let (lo, hi) = cut_norm_sandwich_check(&b).unwrap();
            let ratio = hi / lo;
            assert!((1.0 - 1e-12..=4.0 + 1e-12).contains(&ratio));
        }
    }

    #[test]
    fn heuristic_examples() {
        assert_eq!(matrix_cut_norm_heuristic(&Matrix::zeros(5), 4, 0).value, 0.0);
        let ones = Matrix::from_fn(100, |_, _| 1.0);
        assert_eq!(matrix_cut_norm_heuristic(&ones, 2, 0).value, 1.0);
        let mut rng = rng::stream(17, &[0]);
        for _ in 0..30 {
            let b = Matrix::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let h = matrix_cut_norm_heuristic(&b, 8, 5);
            assert!(h.value <= matrix_cut_norm_exact(&b).unwrap().value + 1e-12);
        }
    }

    #[test]
    fn heuristic_is_deterministic() {
        let mut rng = rng::stream(18, &[0]);
        let b = Matrix::from_fn(40, |_, _| rng.random_range(-1.0..1.0));
        assert_eq!(matrix_cut_norm_heuristic(&b, 16, 9), matrix_cut_norm_heuristic(&b, 16, 9));
    }

    #[test]
    fn q_subset_examples() {
        let c = Kernel::new(vec![0.6; 9], vec![1.0 / 3.0; 3], vec![1.0 / 3.0; 3]).unwrap();
        let exact = step_kernel_cut_norm_exact(&c).unwrap().value;
        let parts = q_subset_bound_parts(&c, 1).unwrap();
        assert!((parts.subset_max - exact).abs() < 1e-15);
        assert!(parts.value() >= exact);

        let z = Kernel::new(vec![0.0; 4], vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let parts = q_subset_bound_parts(&z, 1).unwrap();
        assert_eq!(parts.subset_max, 0.0);
        // (1·√(2·0.5) + 1·√(2·0.5)) / 1
        assert!((parts.additive - 2.0).abs() < 1e-15);

        let mut rng = rng::stream(19, &[0]);
        for _ in 0..20 {
            let k = Kernel::new(
                (0..25).map(|_| rng.random_range(-1.0..1.0)).collect(),
                vec![0.2; 5],
                vec![0.2; 5],
            )
            .unwrap();
            let exact = step_kernel_cut_norm_exact(&k).unwrap().value;
            let parts = q_subset_bound_parts(&k, 5).unwrap();
            assert!(parts.subset_max <= exact + 1e-12);
            assert!(exact <= parts.value() + 1e-12);
        }
        assert!(q_subset_upper_bound(&z, 0).is_err());
    }

    #[test]
    fn khintchine_examples() {
        let z = Kernel::new(vec![0.0; 4], vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert_eq!(khintchine_lower_bound(&z), 0.0);
        let k = Kernel::new(vec![1.0, -1.0, -1.0, 1.0], vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!((khintchine_lower_bound(&k) - 0.125).abs() < 1e-15);
        let one = Kernel::new(vec![1.0], vec![1.0], vec![1.0]).unwrap();
        assert!((khintchine_lower_bound(&one) - 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-15);
    }
}
