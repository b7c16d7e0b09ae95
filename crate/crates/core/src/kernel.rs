//! Core data model: dense square matrices, probability and adjacency matrices,
//! step graphons and weighted (possibly non-symmetric) step kernels.

use crate::error::{invalid, Result};

/// Tolerance on step weights summing to one after renormalization.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Inputs whose weights sum within this distance of one are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Symmetry tolerance for value matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// Dense square matrix of reals, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return invalid(format!("expected {} entries for a {n}x{n} matrix, got {}", n * n, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("rows must all have length equal to the row count");
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { n: self.n, data }
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(-1.0)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// Entrywise ℓ1 norm Σ|B_ij| (unnormalized).
    pub fn entrywise_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    /// Frobenius norm (unnormalized).
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
    pub fn spectral_norm_symmetric(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        eig.eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

/// Symmetric n×n matrix with entries in [0,1] and zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix(Matrix);

impl ProbMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_symmetric(SYMMETRY_TOL) {
            return invalid("probability matrix must be symmetric");
        }
        for i in 0..m.n() {
            if m.get(i, i) != 0.0 {
                return invalid(format!("probability matrix diagonal entry {i} is nonzero"));
            }
        }
        if m.as_slice().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return invalid("probability matrix entries must lie in [0,1]");
        }
        Ok(Self(m))
    }

    /// Off-diagonal constant matrix.
    pub fn constant(n: usize, p: f64) -> Result<Self> {
        Self::new(Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { p }))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn empirical_graphon(&self) -> StepGraphon {
        empirical_graphon(&self.0)
    }
}

/// Symmetric 0/1 matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyMatrix(Matrix);

impl AdjacencyMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
            return invalid("adjacency entries must be 0 or 1");
        }
        if !m.is_symmetric(0.0) {
            return invalid("adjacency matrix must be symmetric");
        }
        if (0..m.n()).any(|i| m.get(i, i) != 0.0) {
            return invalid("adjacency matrix must have a zero diagonal");
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| (i + 1..n).filter(|&j| self.get(i, j) == 1.0).count()).sum()
    }

    pub fn to_prob(&self) -> ProbMatrix {
        ProbMatrix(self.0.clone())
    }

    pub fn empirical_graphon(&self) -> StepGraphon {
        empirical_graphon(&self.0)
    }
}

/// Symmetric k-step kernel `W(x,y) = Q[φ(x)][φ(y)]` where step `a` has
/// Lebesgue measure `weights[a]`.
///
/// Graphons that differ only by a permutation of their steps are weakly
/// isomorphic but not structurally equal; compare them with
/// [`crate::distance`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepGraphon {
    k: usize,
    q: Vec<f64>,
    weights: Vec<f64>,
    unbounded: bool,
}

impl StepGraphon {
    /// Bounded step graphon with values in [0,1].
    pub fn new(q: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::build(q, weights, false)
    }

    /// Step graphon with nonnegative, possibly unbounded, values.
    pub fn new_unbounded(q: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::build(q, weights, true)
    }

    pub fn from_rows(rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != rows.len()) {
            return invalid("value matrix must be square");
        }
        Self::new(rows.concat(), weights)
    }

    pub fn constant(c: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return invalid("step count must be positive");
        }
        Self::new(vec![c; k * k], vec![1.0 / k as f64; k])
    }

    fn build(q: Vec<f64>, weights: Vec<f64>, unbounded: bool) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return invalid("step graphon needs at least one step");
        }
        if q.len() != k * k {
            return invalid(format!("value matrix has {} entries, expected {}", q.len(), k * k));
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return invalid("step weights must be strictly positive");
        }
        let weights = normalize_weights(weights)?;
        for a in 0..k {
            for b in 0..k {
                let v = q[a * k + b];
                if !v.is_finite() || v < 0.0 {
                    return invalid("graphon values must be finite and nonnegative");
                }
                if !unbounded && v > 1.0 {
                    return invalid("bounded graphon values must lie in [0,1]");
                }
                if (v - q[b * k + a]).abs() > SYMMETRY_TOL {
                    return invalid("graphon value matrix must be symmetric");
                }
            }
        }
        Ok(Self { k, q, weights, unbounded })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.q[a * self.k + b]
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn max_value(&self) -> f64 {
        self.q.iter().fold(0.0, |m: f64, &v| m.max(v))
    }

    /// `c·W`; the result is flagged unbounded when values exceed one.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let q: Vec<f64> = self.q.iter().map(|v| v * c).collect();
        let unbounded = self.unbounded || q.iter().any(|&v| v > 1.0);
        Self::build(q, self.weights.clone(), unbounded)
    }

    /// ‖W‖₁ = Σ λ_a λ_b |Q_ab|.
    pub fn l1_norm(&self) -> f64 {
        self.weighted_sum(|v| v.abs())
    }

    /// ‖W‖₂ = (Σ λ_a λ_b Q_ab²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_sum(|v| v * v).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.q.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let k = self.k;
        let mut total = 0.0;
        for a in 0..k {
            let mut row = 0.0;
            for b in 0..k {
                row += self.weights[b] * f(self.q[a * k + b]);
            }
            total += self.weights[a] * row;
        }
        total
    }

    /// Step index containing `x ∈ [0,1]`; steps are half-open on the right,
    /// so a point on a boundary belongs to the step starting there.
    pub fn step_of(&self, x: f64) -> usize {
        let cum = self.cumulative_weights();
        // first boundary strictly greater than x
        let idx = cum.partition_point(|&c| c <= x);
        idx.min(self.k - 1)
    }

    /// Right endpoints of the steps; the last is exactly one.
    pub fn cumulative_weights(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    /// Equal-weight refinement with `m` steps; see [`blowup_assignment`].
    pub fn blowup(&self, m: usize) -> Result<StepGraphon> {
        let assign = blowup_assignment(&self.weights, m)?;
        let q = (0..m * m).map(|idx| self.value(assign[idx / m], assign[idx % m])).collect();
        Self::build(q, vec![1.0 / m as f64; m], self.unbounded)
    }

    /// Value matrix of an equal-weight graphon, inverting [`empirical_graphon`].
    pub fn to_matrix(&self) -> Option<Matrix> {
        let w = 1.0 / self.k as f64;
        if self.weights.iter().any(|&x| (x - w).abs() > RENORMALIZE_TOL) {
            return None;
        }
        Matrix::from_row_major(self.k, self.q.clone()).ok()
    }

    /// Relabel steps: step `a` of the result is step `perm[a]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<StepGraphon> {
        if !is_permutation(perm, self.k) {
            return invalid("not a permutation of the steps");
        }
        let k = self.k;
        let q = (0..k * k).map(|idx| self.value(perm[idx / k], perm[idx % k])).collect();
        let w = perm.iter().map(|&p| self.weights[p]).collect();
        Self::build(q, w, self.unbounded)
    }
}

pub(crate) fn is_permutation(perm: &[usize], k: usize) -> bool {
    if perm.len() != k {
        return false;
    }
    let mut seen = vec![false; k];
    perm.iter().all(|&p| p < k && !std::mem::replace(&mut seen[p], true))
}

fn normalize_weights(weights: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() <= WEIGHT_TOL {
        return Ok(weights);
    }
    if (total - 1.0).abs() > RENORMALIZE_TOL {
        return invalid(format!("step weights sum to {total}, not 1"));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Largest-remainder allocation of `m` equal slots to steps of the given
/// weights. Returns, for each slot, the step it belongs to (slots of one step
/// are contiguous and in step order). Ties in the fractional parts go to the
/// lower step index.
pub fn blowup_assignment(weights: &[f64], m: usize) -> Result<Vec<usize>> {
    let k = weights.len();
    if m < k {
        return invalid(format!("blow-up size {m} is smaller than the step count {k}"));
    }
    let scaled: Vec<f64> = weights.iter().map(|w| w * m as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &a in order.iter().take(m.saturating_sub(assigned)) {
        counts[a] += 1;
    }
    let mut out = Vec::with_capacity(m);
    for (a, &c) in counts.iter().enumerate() {
        out.extend(std::iter::repeat_n(a, c));
    }
    debug_assert_eq!(out.len(), m);
    Ok(out)
}

/// The n-step equal-weight graphon whose value on block (a,b) is `M[a][b]`.
pub fn empirical_graphon(m: &Matrix) -> StepGraphon {
    let n = m.n();
    assert!(n >= 1, "empirical graphon of an empty matrix");
    let unbounded = m.as_slice().iter().any(|&v| v > 1.0);
    StepGraphon {
        k: n,
        q: m.as_slice().to_vec(),
        weights: vec![1.0 / n as f64; n],
        unbounded,
    }
}

/// Weighted q1×q2 step kernel, not necessarily symmetric.
///
/// Row step `a` has measure `row_weights[a]` and column step `b` has measure
/// `col_weights[b]`; weights need not sum to one. [`Kernel::new`] enforces
/// `|values| ≤ 1`; [`Kernel::signed`] accepts any finite values and is used
/// for residuals and differences.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    q1: usize,
    q2: usize,
    values: Vec<f64>,
    row_weights: Vec<f64>,
    col_weights: Vec<f64>,
}

impl Kernel {
    pub fn new(values: Vec<f64>, row_weights: Vec<f64>, col_weights: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.abs() > 1.0) {
            return invalid("kernel values must lie in [-1,1]");
        }
        Self::signed(values, row_weights, col_weights)
    }

    pub fn signed(values: Vec<f64>, row_weights: Vec<f64>, col_weights: Vec<f64>) -> Result<Self> {
        let (q1, q2) = (row_weights.len(), col_weights.len());
        if q1 == 0 || q2 == 0 {
            return invalid("kernel needs at least one row and one column step");
        }
        if values.len() != q1 * q2 {
            return invalid(format!("kernel has {} values, expected {}", values.len(), q1 * q2));
        }
        if row_weights.iter().chain(&col_weights).any(|&w| !(w.is_finite() && w > 0.0)) {
            return invalid("kernel weights must be strictly positive");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("kernel values must be finite");
        }
        Ok(Self { q1, q2, values, row_weights, col_weights })
    }

    pub fn from_rows(rows: &[Vec<f64>], row_weights: Vec<f64>, col_weights: Vec<f64>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != col_weights.len()) {
            return invalid("row length does not match the column step count");
        }
        Self::new(rows.concat(), row_weights, col_weights)
    }

    pub fn from_graphon(w: &StepGraphon) -> Self {
        Self {
            q1: w.k,
            q2: w.k,
            values: w.q.clone(),
            row_weights: w.weights.clone(),
            col_weights: w.weights.clone(),
        }
    }

    /// `W1 − W2` for graphons defined on the same step partition.
    pub fn difference(w1: &StepGraphon, w2: &StepGraphon) -> Result<Self> {
        if w1.k != w2.k || w1.weights.iter().zip(&w2.weights).any(|(a, b)| (a - b).abs() > RENORMALIZE_TOL) {
            return invalid("graphons do not share a step partition");
        }
        let values = w1.q.iter().zip(&w2.q).map(|(a, b)| a - b).collect();
        Self::signed(values, w1.weights.clone(), w1.weights.clone())
    }

    /// Equal-weight kernel reading of a square matrix; its kernel cut norm
    /// equals the normalized matrix cut norm.
    pub fn from_matrix(m: &Matrix) -> Self {
        let n = m.n();
        let w = vec![1.0 / n as f64; n];
        Self { q1: n, q2: n, values: m.as_slice().to_vec(), row_weights: w.clone(), col_weights: w }
    }

    #[inline]
    pub fn q1(&self) -> usize {
        self.q1
    }

    #[inline]
    pub fn q2(&self) -> usize {
        self.q2
    }

    #[inline]
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.q2 + b]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn col_weights(&self) -> &[f64] {
        &self.col_weights
    }

    pub fn negated(&self) -> Self {
        Self { values: self.values.iter().map(|v| -v).collect(), ..self.clone() }
    }

    pub fn transposed(&self) -> Self {
        let values = (0..self.q1 * self.q2)
            .map(|idx| {
                let (b, a) = (idx / self.q1, idx % self.q1);
                self.value(a, b)
            })
            .collect();
        Self {
            q1: self.q2,
            q2: self.q1,
            values,
            row_weights: self.col_weights.clone(),
            col_weights: self.row_weights.clone(),
        }
    }

    /// Σ α_a β_b |K_ab|.
    pub fn l1_norm(&self) -> f64 {
        self.weighted(|v| v.abs())
    }

    /// (Σ α_a β_b K_ab²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        self.weighted(|v| v * v).sqrt()
    }

    /// Weighted integral of K over `rows × cols`.
    pub fn integral(&self, rows: &[usize], cols: &[usize]) -> f64 {
        rows.iter()
            .map(|&a| self.row_weights[a] * cols.iter().map(|&b| self.col_weights[b] * self.value(a, b)).sum::<f64>())
            .sum()
    }

    fn weighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        (0..self.q1)
            .map(|a| self.row_weights[a] * (0..self.q2).map(|b| self.col_weights[b] * f(self.value(a, b))).sum::<f64>())
            .sum()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Latent positions ξ₁..ξₙ drawn i.i.d. uniform on [0,1].
#[derive(Clone, Debug, PartialEq)]
pub struct LatentSample {
    pub xi: Vec<f64>,
    pub seed: u64,
}

impl LatentSample {
    pub fn new(xi: Vec<f64>, seed: u64) -> Result<Self> {
        if xi.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return invalid("latent positions must lie in [0,1]");
        }
        Ok(Self { xi, seed })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// Step label of every latent position under `w`.
    pub fn labels(&self, w: &StepGraphon) -> Vec<usize> {
        let cum = w.cumulative_weights();
        self.xi.iter().map(|&x| cum.partition_point(|&c| c <= x).min(w.k() - 1)).collect()
    }
}
