//! Step-up multiple testing procedures.
//!
//! All procedures operate on a [`PValueBatch`]. The step-up count at level
//! `q` is `R = max{i : X_(i) ≤ q·i/m}` over the order statistics
//! `X_(1) ≤ … ≤ X_(m)`, and the `R` smallest values are rejected.

use serde::Serialize;

use crate::error::{config_err, FdrError, Result};

/// Ordered p-values with optional truth labels (`true` marks a null).
#[derive(Debug, Clone, PartialEq)]
pub struct PValueBatch {
    values: Vec<f64>,
    labels: Option<Vec<bool>>,
}

fn check_values(values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
    {
        return config_err(format!("p-value at index {i} is outside [0, 1]: {v}"));
    }
    Ok(())
}

impl PValueBatch {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        Ok(Self { values, labels: None })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        check_values(&values)?;
        if labels.len() != values.len() {
            return Err(FdrError::SizeMismatch { expected: values.len(), found: labels.len() });
        }
        Ok(Self { values, labels: Some(labels) })
    }

    /// For samplers whose output is in range by construction.
    pub(crate) fn from_parts_unchecked(values: Vec<f64>, labels: Option<Vec<bool>>) -> Self {
        debug_assert!(check_values(&values).is_ok());
        Self { values, labels }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of null-labelled entries.
    pub fn m0(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().filter(|&&n| n).count())
    }

    /// Indices sorted by `(value, index)`.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        idx
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// The batch with its first `j` null-labelled entries removed.
    pub fn without_first_nulls(&self, j: usize) -> Result<PValueBatch> {
        let labels = self.labels.as_ref().ok_or(FdrError::MissingLabels)?;
        let m0 = labels.iter().filter(|&&n| n).count();
        if j > m0 {
            return config_err(format!("cannot remove {j} nulls from a batch with {m0}"));
        }
        let mut removed = 0;
        let mut values = Vec::with_capacity(self.values.len() - j);
        let mut kept = Vec::with_capacity(self.values.len() - j);
        for (&v, &is_null) in self.values.iter().zip(labels) {
            if is_null && removed < j {
                removed += 1;
                continue;
            }
            values.push(v);
            kept.push(is_null);
        }
        Ok(Self { values, labels: Some(kept) })
    }
}

/// Counts and proportions available when truth labels are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportions {
    /// Rejected nulls `S`.
    pub s: usize,
    /// False discovery proportion `S/(R ∨ 1)`.
    pub pi1: f64,
    /// Fraction of alternatives rejected; `None` when there are none.
    pub pi2: Option<f64>,
    /// False nondiscovery proportion `(m1 − (R − S))/((m − R) ∨ 1)`.
    pub pi3: f64,
}

impl Proportions {
    pub fn from_counts(r: usize, s: usize, m: usize, m0: usize) -> Self {
        let m1 = m - m0;
        let correct = r - s;
        Self {
            s,
            pi1: s as f64 / r.max(1) as f64,
            pi2: (m1 > 0).then(|| correct as f64 / m1 as f64),
            pi3: (m1 - correct) as f64 / (m - r).max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionOutcome {
    /// Rejection count `R`.
    pub r: usize,
    /// `q·R/m`, or 0 without rejections.
    pub threshold: f64,
    /// Original indices of the `R` smallest values, ascending.
    pub rejected: Vec<usize>,
    /// Level requested by the procedure; may exceed 1 (or be infinite) for BHS.
    pub q_used: f64,
    /// Level actually applied to the step-up rule, `min(q_used, 1)`.
    pub q_applied: f64,
    /// Null-proportion estimate, for adaptive procedures.
    pub gamma_hat: Option<f64>,
    pub proportions: Option<Proportions>,
}

#[inline]
pub(crate) fn grid_threshold(q: f64, k: usize, m: usize) -> f64 {
    q * k as f64 / m as f64
}

/// Largest `i` with `sorted[i−1] ≤ q·(i+shift)/m` (`<` when `strict`), or 0.
pub(crate) fn step_up(sorted: &[f64], q: f64, shift: usize, m: usize, strict: bool) -> usize {
    (1..=sorted.len())
        .rev()
        .find(|&i| {
            let x = sorted[i - 1];
            let t = grid_threshold(q, i + shift, m);
            if strict {
                x < t
            } else {
                x <= t
            }
        })
        .unwrap_or(0)
}

/// `step_up` on unsorted values, sorting only the candidates `≤ q`.
///
/// Every threshold `q·(i+shift)/m` with `i ≤ m − shift` is at most `q`, so
/// values above `q` never take part in a rejection.
pub(crate) fn step_up_unsorted(
    values: &[f64],
    q: f64,
    shift: usize,
    m: usize,
    strict: bool,
    scratch: &mut Vec<f64>,
) -> usize {
    let cap = grid_threshold(q, m, m).max(q);
    scratch.clear();
    scratch.extend(values.iter().copied().filter(|&v| v <= cap));
    scratch.sort_unstable_by(f64::total_cmp);
    step_up(scratch, q, shift, m, strict)
}

fn check_level(q: f64) -> Result<()> {
    if q.is_finite() && (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        config_err(format!("q must lie in [0, 1], got {q}"))
    }
}

fn step_up_outcome(batch: &PValueBatch, q: f64, strict: bool) -> Result<RejectionOutcome> {
    check_level(q)?;
    let m = batch.len();
    let order = batch.order();
    let sorted: Vec<f64> = order.iter().map(|&i| batch.values[i]).collect();
    let r = step_up(&sorted, q, 0, m, strict);
    let mut rejected = order[..r].to_vec();
    rejected.sort_unstable();
    let mut outcome = RejectionOutcome {
        r,
        threshold: if r > 0 { grid_threshold(q, r, m) } else { 0.0 },
        rejected,
        q_used: q,
        q_applied: q,
        gamma_hat: None,
        proportions: None,
    };
    if batch.labels.is_some() {
        outcome.proportions = Some(proportions(&outcome, batch)?);
    }
    Ok(outcome)
}

/// The Benjamini–Hochberg step-up rule at level `q`.
///
/// Ties are ordered by original index, so the rejected set is deterministic.
pub fn bh_count(batch: &PValueBatch, q: f64) -> Result<RejectionOutcome> {
    step_up_outcome(batch, q, false)
}

/// The step-up rule with strict inequalities `X_(i) < q·i/m`.
pub fn bh_count_strict(batch: &PValueBatch, q: f64) -> Result<RejectionOutcome> {
    step_up_outcome(batch, q, true)
}

/// Step-up count on a batch of `m − j` values with thresholds `q·(i+j)/m`.
pub fn shifted_count(batch: &PValueBatch, q: f64, j: usize, m: usize) -> Result<usize> {
    check_level(q)?;
    if j > m || batch.len() != m - j {
        return Err(FdrError::SizeMismatch { expected: m.saturating_sub(j), found: batch.len() });
    }
    Ok(step_up(&batch.sorted_values(), q, j, m, false))
}

/// `min_{0≤t≤x} (1 − H_m(t))/(1 − t)` on sorted values.
///
/// On each constancy interval of `H_m` the ratio increases in `t`, so only
/// `t = 0` and the jump points up to `x` need evaluating.
pub(crate) fn gamma_hat_sorted(sorted: &[f64], x: f64) -> f64 {
    let m = sorted.len();
    let mut best = 1.0_f64;
    for (i, &v) in sorted.iter().enumerate() {
        if v > x {
            break;
        }
        if i + 1 < m && sorted[i + 1] == v {
            continue;
        }
        let above = (m - i - 1) as f64 / m as f64;
        best = best.min(above / (1.0 - v));
    }
    best.clamp(0.0, 1.0)
}

/// Null-proportion estimate `γ̂(x)`.
pub fn gamma_hat(batch: &PValueBatch, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return config_err(format!("x must lie in (0, 1), got {x}"));
    }
    Ok(gamma_hat_sorted(&batch.sorted_values(), x))
}

/// Benjamini–Hochberg–Storey: the step-up rule at level `δ/γ̂(x)`.
///
/// Levels above one are applied as one but reported uncapped in
/// `q_used`; `γ̂ = 0` gives `q_used = ∞` and rejects everything.
pub fn bhs(batch: &PValueBatch, delta: f64, x: f64) -> Result<RejectionOutcome> {
    if !(delta > 0.0 && delta < 1.0) {
        return config_err(format!("delta must lie in (0, 1), got {delta}"));
    }
    let gh = gamma_hat(batch, x)?;
    let q_used = if gh == 0.0 { f64::INFINITY } else { delta / gh };
    let q_applied = q_used.min(1.0);
    let mut outcome = bh_count(batch, q_applied)?;
    outcome.q_used = q_used;
    outcome.gamma_hat = Some(gh);
    Ok(outcome)
}

/// False discovery, power and false nondiscovery proportions of an outcome.
pub fn proportions(outcome: &RejectionOutcome, batch: &PValueBatch) -> Result<Proportions> {
    let labels = batch.labels.as_ref().ok_or(FdrError::MissingLabels)?;
    let m0 = labels.iter().filter(|&&n| n).count();
    let s = outcome.rejected.iter().filter(|&&i| labels[i]).count();
    Ok(Proportions::from_counts(outcome.r, s, batch.len(), m0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(v: &[f64]) -> PValueBatch {
        PValueBatch::new(v.to_vec()).unwrap()
    }

    /// Direct enumeration of `max{i : X_(i) ≤ q i/m}`.
    fn enumerate_r(values: &[f64], q: f64) -> usize {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let m = s.len();
        let mut r = 0;
        for i in 1..=m {
            if s[i - 1] <= q * i as f64 / m as f64 {
                r = i;
            }
        }
        r
    }

    #[test]
    fn bh_example() {
        let b = batch(&[0.01, 0.2, 0.3, 0.9]);
        let out = bh_count(&b, 0.5).unwrap();
        assert_eq!(out.r, enumerate_r(b.values(), 0.5));
        assert_eq!(out.r, 3);
        assert_eq!(out.rejected, vec![0, 1, 2]);
        assert_eq!(out.threshold, 0.375);
        assert!(out.proportions.is_none());
    }

    #[test]
    fn bh_edge_cases() {
        assert_eq!(bh_count(&batch(&[1.0; 5]), 0.5).unwrap().r, 0);
        assert_eq!(bh_count(&batch(&[1.0; 5]), 0.5).unwrap().threshold, 0.0);
        assert!(bh_count(&batch(&[0.9, 0.0, 0.8]), 0.01).unwrap().r >= 1);
        assert_eq!(bh_count(&batch(&[]), 0.3).unwrap().r, 0);
        assert!(matches!(bh_count(&batch(&[0.1]), 1.5), Err(FdrError::Config(_))));
        assert!(bh_count(&batch(&[0.1]), -0.1).is_err());
        assert!(PValueBatch::new(vec![0.1, 1.5]).is_err());
        assert!(PValueBatch::new(vec![f64::NAN]).is_err());
        assert!(matches!(
            PValueBatch::with_labels(vec![0.1, 0.2], vec![true]),
            Err(FdrError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn ties_break_by_index() {
        let b = batch(&[0.3, 0.01, 0.01, 0.9]);
        let out = bh_count(&b, 0.1).unwrap();
        assert_eq!(out.r, 2);
        assert_eq!(out.rejected, vec![1, 2]);
    }

    #[test]
    fn strict_variant() {
        // Both values sit exactly on their thresholds 0.125 and 0.25.
        let b = batch(&[0.125, 0.25]);
        assert_eq!(bh_count_strict(&b, 0.25).unwrap().r, 0);
        assert_eq!(bh_count(&b, 0.25).unwrap().r, 2);
        assert_eq!(bh_count_strict(&b, 0.5).unwrap().r, 2);
        let g = batch(&[0.013, 0.21, 0.33, 0.77]);
        assert_eq!(bh_count_strict(&g, 0.5).unwrap().r, bh_count(&g, 0.5).unwrap().r);
        assert_eq!(bh_count_strict(&batch(&[0.0]), 0.0).unwrap().r, 0);
        assert_eq!(bh_count(&batch(&[0.0]), 0.0).unwrap().r, 1);
    }

    #[test]
    fn shifted_examples() {
        let b = batch(&[0.01, 0.2, 0.3, 0.9]);
        assert_eq!(shifted_count(&b, 0.5, 0, 4).unwrap(), bh_count(&b, 0.5).unwrap().r);
        assert_eq!(shifted_count(&batch(&[0.2]), 0.5, 1, 2).unwrap(), 1);
        assert_eq!(shifted_count(&batch(&[]), 0.5, 3, 3).unwrap(), 0);
        assert!(matches!(shifted_count(&batch(&[0.2]), 0.5, 0, 2), Err(FdrError::SizeMismatch { .. })));
    }

    /// Brute-force `min_{t ∈ {0} ∪ values ≤ x}` with `H_m` counted directly.
    fn gamma_hat_oracle(values: &[f64], x: f64) -> f64 {
        let m = values.len() as f64;
        std::iter::once(0.0)
            .chain(values.iter().copied().filter(|&v| v <= x))
            .map(|t| {
                let h = values.iter().filter(|&&v| v <= t).count() as f64 / m;
                (1.0 - h) / (1.0 - t)
            })
            .fold(1.0, f64::min)
    }

    #[test]
    fn gamma_hat_examples() {
        assert_eq!(gamma_hat(&batch(&[0.6, 0.7]), 0.5).unwrap(), 1.0);
        let g = gamma_hat(&batch(&[0.1, 0.5]), 0.3).unwrap();
        assert!((g - 0.5 / 0.9).abs() < 1e-15);
        assert!((g - 0.5556).abs() < 5e-5);
        assert_eq!(gamma_hat(&batch(&[0.1, 0.2, 0.2]), 0.4).unwrap(), 0.0);
        assert!(gamma_hat(&batch(&[0.1]), 1.0).is_err());
        assert!(gamma_hat(&batch(&[0.1]), 0.0).is_err());
        let v = [0.01, 0.02, 0.9, 0.95, 0.02, 0.4];
        assert!((gamma_hat(&batch(&v), 0.5).unwrap() - gamma_hat_oracle(&v, 0.5)).abs() < 1e-15);
    }

    #[test]
    fn bhs_examples() {
        let b = batch(&[0.01, 0.02, 0.9, 0.95]);
        let out = bhs(&b, 0.1, 0.5).unwrap();
        let gh = gamma_hat_oracle(b.values(), 0.5);
        // H_m(0.02) = 1/2, so the minimum is (1/2)/(0.98).
        assert!((gh - 0.5 / 0.98).abs() < 1e-15);
        assert_eq!(out.gamma_hat, Some(gh));
        assert!((out.q_used - 0.1 / gh).abs() < 1e-15);
        assert_eq!(out.r, enumerate_r(b.values(), 0.1 / gh));
        assert_eq!(out.r, 2);

        // γ̂ = 1 when nothing lies below x: plain BH at δ.
        let b = batch(&[0.6, 0.7, 0.8]);
        let out = bhs(&b, 0.1, 0.5).unwrap();
        assert_eq!(out.gamma_hat, Some(1.0));
        assert_eq!(out.q_used, 0.1);
        assert_eq!(out.r, 0);

        // γ̂ = 0 rejects everything.
        let b = batch(&[0.1, 0.2]);
        let out = bhs(&b, 0.05, 0.5).unwrap();
        assert_eq!(out.q_used, f64::INFINITY);
        assert_eq!(out.q_applied, 1.0);
        assert_eq!(out.r, 2);
    }

    #[test]
    fn proportions_examples() {
        let labels = vec![true, true, false, false];
        let b = PValueBatch::with_labels(vec![0.9, 0.8, 0.7, 0.95], labels.clone()).unwrap();
        let out = bh_count(&b, 0.1).unwrap();
        let p = out.proportions.unwrap();
        assert_eq!((out.r, p.s, p.pi1), (0, 0, 0.0));
        assert_eq!(p.pi3, 0.5);

        let b = PValueBatch::with_labels(vec![0.001, 0.002, 0.003, 0.004], labels.clone()).unwrap();
        let p = bh_count(&b, 0.5).unwrap().proportions.unwrap();
        assert_eq!(p.pi3, 0.0);

        // rejected = both alternatives and one null
        let b = PValueBatch::with_labels(vec![0.01, 0.9, 0.02, 0.03], labels).unwrap();
        let out = bh_count(&b, 0.2).unwrap();
        assert_eq!(out.rejected, vec![0, 2, 3]);
        let p = proportions(&out, &b).unwrap();
        assert!((p.pi1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.pi2, Some(1.0));
        assert_eq!(p.pi3, 0.0);

        assert!(matches!(proportions(&out, &batch(&[0.1; 4])), Err(FdrError::MissingLabels)));
        assert_eq!(Proportions::from_counts(3, 3, 5, 5).pi2, None);
    }

    #[test]
    fn removing_nulls() {
        let b = PValueBatch::with_labels(vec![0.1, 0.2, 0.3, 0.4], vec![false, true, false, true]).unwrap();
        let x1 = b.without_first_nulls(1).unwrap();
        assert_eq!(x1.values(), &[0.1, 0.3, 0.4]);
        assert_eq!(x1.labels().unwrap(), &[false, false, true]);
        assert!(b.without_first_nulls(3).is_err());
    }
}
