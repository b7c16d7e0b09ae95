//! Constructive weak regularity: greedy cut-product approximation of a
//! step kernel.
//!
//! Each round takes the exact cut-norm witness `(S, T)` of the residual `R`,
//! subtracts `a·1_{S×T}` with `a = ∫_{S×T} R / (α(S)β(T))`, and stops as
//! soon as `‖R‖□ ≤ 1/√k0`. The squared L2 norm of the residual drops by
//! `(∫_{S×T} R)² / (α(S)β(T)) ≥ ‖R‖□²` per round, so at most `k0` rounds run
//! for kernels bounded by one.

use crate::cut_norm::step_kernel_cut_norm_exact;
use crate::error::{invalid, Error, Result};
use crate::kernel::{Kernel, StepGraphon};

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityTerm {
    /// Signed coefficient.
    pub a: f64,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    /// Cut norm of the residual the term was fitted to.
    pub cut_before: f64,
    /// Drop in squared L2 norm of the residual.
    pub energy_decrement: f64,
}

#[derive(Clone, Debug)]
pub struct RegularityDecomposition {
    pub terms: Vec<RegularityTerm>,
    pub residual: Kernel,
    pub k0: usize,
    /// `1/√k0`.
    pub threshold: f64,
    /// Exact cut norm of the final residual.
    pub residual_cut: f64,
}

impl RegularityDecomposition {
    /// `Σ a_i 1_{S_i×T_i}` on the input's steps.
    pub fn approximation(&self) -> Kernel {
        let q2 = self.residual.q2();
        let mut values = vec![0.0; self.residual.q1() * q2];
        for term in &self.terms {
            for &a in &term.s {
                for &b in &term.t {
                    values[a * q2 + b] += term.a;
                }
            }
        }
        Kernel::signed(values, self.residual.row_weights().to_vec(), self.residual.col_weights().to_vec())
            .expect("approximation shares the residual's steps")
    }
}

fn weight_of(w: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| w[i]).sum()
}

/// Weak regularity approximation of `w` with `k0 = ⌊log₂ q0⌋` rounds at most.
/// Row and column weights must each sum to one.
pub fn weak_regularity_approx(w: &Kernel, q0: usize) -> Result<(Kernel, RegularityDecomposition)> {
    if q0 < 2 {
        return invalid(format!("target step count q0 must be at least 2, got {q0}"));
    }
    for (name, ws) in [("row", w.row_weights()), ("column", w.col_weights())] {
        let total: f64 = ws.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("{name} weights sum to {total}, expected 1"));
        }
    }
    let k0 = q0.ilog2() as usize;
    let threshold = 1.0 / (k0 as f64).sqrt();
    let mut residual = w.clone();
    let mut terms = Vec::new();
    loop {
        let cut = step_kernel_cut_norm_exact(&residual)?;
        if cut.value <= threshold {
            let decomposition = RegularityDecomposition { terms, residual, k0, threshold, residual_cut: cut.value };
            return Ok((decomposition.approximation(), decomposition));
        }
        if terms.len() == k0 {
            return Err(Error::Invariant(format!(
                "residual cut norm {} still above {threshold} after {k0} rounds",
                cut.value
            )));
        }
        let (s, t) = (cut.witness_s, cut.witness_t);
        let area = weight_of(residual.row_weights(), &s) * weight_of(residual.col_weights(), &t);
        let integral = residual.integral(&s, &t);
        let a = integral / area;
        let before = residual.l2_norm().powi(2);
        let q2 = residual.q2();
        let values = residual.values_mut();
        for &r in &s {
            for &c in &t {
                values[r * q2 + c] -= a;
            }
        }
        let decrement = before - residual.l2_norm().powi(2);
        if decrement < cut.value * cut.value - 1e-12 {
            return Err(Error::Invariant(format!(
                "energy decrement {decrement} below squared cut norm {}",
                cut.value * cut.value
            )));
        }
        terms.push(RegularityTerm { a, s, t, cut_before: cut.value, energy_decrement: decrement });
    }
}

/// [`weak_regularity_approx`] on a graphon read as a symmetric kernel.
pub fn weak_regularity_graphon(w: &StepGraphon, q0: usize) -> Result<(Kernel, RegularityDecomposition)> {
    weak_regularity_approx(&Kernel::from_graphon(w), q0)
}
