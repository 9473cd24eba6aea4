//! The step-up rule as a goodness-of-fit test.
//!
//! With `H_m` the empirical distribution function of the batch,
//! `R ≥ r` exactly when the scaled excess `(H_m(t) − t)/t` reaches
//! `(1 − q)/q` at some grid point `t = q·k/m`, `k ≥ r`. The continuous
//! version of that statistic is Rényi's one-sided, tail-weighted
//! Kolmogorov–Smirnov statistic.

use rayon::prelude::*;

use crate::distributions::{replicate_rng, sample_nulls_into, DependenceModel};
use crate::error::{config_err, Result};
use crate::montecarlo::Estimate;
use crate::procedures::{grid_threshold, step_up_unsorted, PValueBatch};

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(batch: &PValueBatch) -> Self {
        Self { sorted: batch.sorted_values() }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `#{values ≤ t}`.
    pub fn count_le(&self, t: f64) -> usize {
        self.sorted.partition_point(|&v| v <= t)
    }

    /// `H_m(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.count_le(t) as f64 / self.sorted.len() as f64
    }

    /// `(H_m(t) − t)/t`.
    pub fn scaled_excess(&self, t: f64) -> f64 {
        (self.eval(t) - t) / t
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.sorted
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        config_err(format!("q must lie in (0, 1], got {q}"))
    }
}

/// `max_{k=r..m} (H_m(t_k) − t_k)/t_k` over the grid `t_k = q·k/m`.
pub fn psi_grid(batch: &PValueBatch, q: f64, r: usize) -> Result<f64> {
    check_q(q)?;
    let m = batch.len();
    if r < 1 || r > m {
        return config_err(format!("start index must lie in 1..={m}, got {r}"));
    }
    let ecdf = EmpiricalCdf::new(batch);
    Ok((r..=m)
        .map(|k| ecdf.scaled_excess(grid_threshold(q, k, m)))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `sup_{t ∈ [lower, q]} (H_m(t) − t)/t`, evaluated exactly.
///
/// Between jumps of `H_m` the ratio decreases in `t`, so the supremum sits
/// at `lower` or at a jump point in `(lower, q]`.
pub fn renyi_sup(batch: &PValueBatch, q: f64, lower: f64) -> Result<f64> {
    check_q(q)?;
    if !(lower > 0.0 && lower <= q) {
        return config_err(format!("lower endpoint must lie in (0, q], got {lower}"));
    }
    let ecdf = EmpiricalCdf::new(batch);
    let jumps = ecdf
        .jump_points()
        .iter()
        .copied()
        .filter(|&t| t > lower && t <= q);
    Ok([lower, q]
        .into_iter()
        .chain(jumps)
        .map(|t| ecdf.scaled_excess(t))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Rejection count read off the goodness-of-fit statistics:
/// `max{r : psi_grid(batch, q, r) ≥ (1 − q)/q}`, or 0.
///
/// At `t_k = q·k/m` the comparison `(H_m(t_k) − t_k)/t_k ≥ (1 − q)/q`
/// is `H_m(t_k) ≥ t_k/q = k/m`; it is evaluated in that cleared form,
/// `#{values ≤ t_k} ≥ k`, so rounding in the ratio cannot flip it.
pub fn bh_via_gof(batch: &PValueBatch, q: f64) -> Result<usize> {
    check_q(q)?;
    let m = batch.len();
    let ecdf = EmpiricalCdf::new(batch);
    // psi_grid(r) is a running maximum over k ≥ r, so the largest r whose
    // statistic clears the bar is the largest grid index that clears it.
    Ok((1..=m)
        .rev()
        .find(|&k| ecdf.count_le(grid_threshold(q, k, m)) >= k)
        .unwrap_or(0))
}

/// Monte Carlo estimate of `P(R_m = 0)` for `m` i.i.d. uniform p-values.
pub fn no_rejection_probability(m: usize, q: f64, reps: usize, seed: u64) -> Result<Estimate> {
    if !(q > 0.0 && q < 1.0) {
        return config_err(format!("q must lie in (0, 1), got {q}"));
    }
    if m == 0 || reps == 0 {
        return config_err("m and reps must be positive");
    }
    let hits: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(m), Vec::new()),
            |(values, scratch), i| {
                let mut rng = replicate_rng(seed, i);
                values.clear();
                sample_nulls_into(&mut rng, m, DependenceModel::Independent, values);
                if step_up_unsorted(values, q, 0, m, false, scratch) == 0 {
                    1.0
                } else {
                    0.0
                }
            },
        )
        .collect();
    Ok(Estimate::from_samples(&hits))
}
