//! Seeded replicated simulations and the theorem checks built on them.
//!
//! Replicate `i` of a run with base seed `s` draws from its own ChaCha8
//! stream `(s, i)`, replicates are mapped in parallel and collected in index
//! order, and every sum runs sequentially over that ordered vector with
//! compensation. Results therefore do not depend on the number of worker
//! threads.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    fill_mixture, replicate_rng, sample_nulls_into, AlternativeModel, DependenceModel, MixtureSpec,
};
use crate::error::{config_err, FdrError, Result};
use crate::procedures::{gamma_hat_sorted, grid_threshold, step_up, step_up_unsorted, Proportions};
use crate::theory::{self, AsymptoticSummary, BhsBounds};

/// Neumaier-compensated sum, evaluated left to right.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn mean_of(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample covariance, two-pass.
fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let (mx, my) = (mean_of(xs), mean_of(ys));
    compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (n - 1) as f64
}

/// A Monte Carlo mean with its standard error `sd/√n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub reps: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let var = covariance(xs, xs).max(0.0);
        Self { mean: mean_of(xs), se: (var / n as f64).sqrt(), reps: n }
    }

    /// `|mean − target| / se`, 0 for an exact hit with zero spread.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.se
        }
    }

    /// `|mean − target| ≤ k·se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Ratio `E[a]/E[b]` of two paired samples with its delta-method standard
/// error.
pub fn ratio_estimate(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len();
    let (ma, mb) = (mean_of(a), mean_of(b));
    let ratio = ma / mb;
    let var = covariance(a, a) - 2.0 * ratio * covariance(a, b) + ratio * ratio * covariance(b, b);
    Estimate { mean: ratio, se: (var.max(0.0) / n as f64).sqrt() / mb.abs(), reps: n }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Procedure {
    Bh { q: f64 },
    BhStrict { q: f64 },
    Bhs { delta: f64, x: f64 },
}

impl Procedure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Procedure::Bh { q } | Procedure::BhStrict { q } => {
                if !(0.0..=1.0).contains(&q) {
                    return config_err(format!("q must lie in [0, 1], got {q}"));
                }
            }
            Procedure::Bhs { delta, x } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return config_err(format!("delta must lie in (0, 1), got {delta}"));
                }
                if !(x > 0.0 && x < 1.0) {
                    return config_err(format!("x must lie in (0, 1), got {x}"));
                }
            }
        }
        Ok(())
    }
}

fn default_seed() -> u64 {
    42
}

fn default_k_max() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mixture: MixtureSpec,
    pub procedure: Procedure,
    pub reps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

impl SimConfig {
    pub fn new(mixture: MixtureSpec, procedure: Procedure, reps: usize, seed: u64) -> Self {
        Self { mixture, procedure, reps, seed, k_max: default_k_max() }
    }

    pub fn validate(&self) -> Result<()> {
        self.mixture.validate()?;
        self.procedure.validate()?;
        if self.reps == 0 {
            return config_err("reps must be at least 1");
        }
        if self.k_max == 0 {
            return config_err("k_max must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRecord {
    pub name: String,
    pub mean: f64,
    pub se: f64,
    /// Raw moments `E[X^k]` for `k = 1..=k_max`.
    pub moments: Vec<f64>,
    /// Standard errors of the raw moments.
    pub moment_se: Vec<f64>,
    pub reps: usize,
}

impl StatRecord {
    fn from_samples(name: &str, xs: &[f64], k_max: usize) -> Self {
        let est = Estimate::from_samples(xs);
        let (moments, moment_se) = (1..=k_max)
            .map(|k| {
                let powers: Vec<f64> = xs.iter().map(|x| x.powi(k as i32)).collect();
                let e = Estimate::from_samples(&powers);
                (e.mean, e.se)
            })
            .unzip();
        Self { name: name.into(), mean: est.mean, se: est.se, moments, moment_se, reps: xs.len() }
    }

    fn from_estimate(name: &str, est: Estimate) -> Self {
        Self {
            name: name.into(),
            mean: est.mean,
            se: est.se,
            moments: vec![est.mean],
            moment_se: vec![est.se],
            reps: est.reps,
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { mean: self.mean, se: self.se, reps: self.reps }
    }

    /// Raw moment of order `k` with its standard error.
    pub fn moment(&self, k: usize) -> Option<Estimate> {
        let i = k.checked_sub(1)?;
        Some(Estimate { mean: *self.moments.get(i)?, se: *self.moment_se.get(i)?, reps: self.reps })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub statistics: Vec<StatRecord>,
    pub reps: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl SimReport {
    pub fn stat(&self, name: &str) -> Option<&StatRecord> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Per-worker buffers reused across replicates.
#[derive(Default)]
struct Workspace {
    values: Vec<f64>,
    scratch: Vec<f64>,
}

/// Raw outcome of one replicate.
#[derive(Debug, Clone, Copy)]
struct Replicate {
    r: usize,
    s: usize,
    q_m: f64,
    gamma_hat: f64,
}

/// Runs `f` once per replicate and returns the results in replicate order.
fn replicates<T, F>(reps: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, &mut Workspace) -> T + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map_init(Workspace::default, |ws, i| f(&mut replicate_rng(seed, i), ws))
        .collect()
}

/// Nulls among the first `m0` values that are at most `threshold`.
fn count_null_rejections(values: &[f64], m0: usize, r: usize, threshold: f64) -> usize {
    if r == 0 {
        return 0;
    }
    // Exactly r values lie at or below q·r/m, so no tie-breaking is needed.
    values[..m0].iter().filter(|&&v| v <= threshold).count()
}

fn run_replicate(spec: &MixtureSpec, procedure: Procedure, rng: &mut ChaCha8Rng, ws: &mut Workspace) -> Replicate {
    fill_mixture(rng, spec, &mut ws.values);
    let (m, m0) = (spec.m, spec.m0());
    match procedure {
        Procedure::Bh { q } | Procedure::BhStrict { q } => {
            let strict = matches!(procedure, Procedure::BhStrict { .. });
            let r = step_up_unsorted(&ws.values, q, 0, m, strict, &mut ws.scratch);
            let s = count_null_rejections(&ws.values, m0, r, grid_threshold(q, r, m));
            Replicate { r, s, q_m: q, gamma_hat: f64::NAN }
        }
        Procedure::Bhs { delta, x } => {
            ws.scratch.clear();
            ws.scratch.extend_from_slice(&ws.values);
            ws.scratch.sort_unstable_by(f64::total_cmp);
            let gh = gamma_hat_sorted(&ws.scratch, x);
            let q_used = if gh == 0.0 { f64::INFINITY } else { delta / gh };
            let q = q_used.min(1.0);
            let r = step_up(&ws.scratch, q, 0, m, false);
            let s = count_null_rejections(&ws.values, m0, r, grid_threshold(q, r, m));
            Replicate { r, s, q_m: q_used, gamma_hat: gh }
        }
    }
}

/// Executes the configured experiment and aggregates its statistics.
///
/// Statistics: `pi1`, `pi2` (only with alternatives present), `pi3`,
/// `r_over_m`, `s_over_m`, `no_rejection`, `marginal_fdr` (`E[S]/E[R ∨ 1]`
/// with a delta-method error) and, for the adaptive procedure, `q_m` and
/// `gamma_hat`.
pub fn run(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let spec = &config.mixture;
    let (m, m0) = (spec.m, spec.m0());
    let reps = replicates(config.reps, config.seed, |rng, ws| run_replicate(spec, config.procedure, rng, ws));

    let props: Vec<Proportions> = reps.iter().map(|x| Proportions::from_counts(x.r, x.s, m, m0)).collect();
    let column = |f: &dyn Fn(usize) -> f64| (0..reps.len()).map(f).collect::<Vec<f64>>();
    let k = config.k_max;
    let mut statistics = vec![StatRecord::from_samples("pi1", &column(&|i| props[i].pi1), k)];
    if m0 < m {
        statistics.push(StatRecord::from_samples("pi2", &column(&|i| props[i].pi2.unwrap_or(0.0)), k));
    }
    statistics.push(StatRecord::from_samples("pi3", &column(&|i| props[i].pi3), k));
    statistics.push(StatRecord::from_samples("r_over_m", &column(&|i| reps[i].r as f64 / m as f64), k));
    statistics.push(StatRecord::from_samples("s_over_m", &column(&|i| reps[i].s as f64 / m as f64), k));
    statistics.push(StatRecord::from_samples("no_rejection", &column(&|i| (reps[i].r == 0) as u8 as f64), k));
    let s = column(&|i| reps[i].s as f64);
    let r1 = column(&|i| reps[i].r.max(1) as f64);
    statistics.push(StatRecord::from_estimate("marginal_fdr", ratio_estimate(&s, &r1)));
    if matches!(config.procedure, Procedure::Bhs { .. }) {
        statistics.push(StatRecord::from_samples("q_m", &column(&|i| reps[i].q_m), k));
        statistics.push(StatRecord::from_samples("gamma_hat", &column(&|i| reps[i].gamma_hat), k));
    }
    Ok(SimReport { config: config.clone(), statistics, reps: config.reps, seed: config.seed, wall_time_secs: None })
}

/// Two sides of an inequality estimated from the same replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// Standard error of the per-replicate slack.
    pub se: f64,
    /// `slack ≥ −3·se`.
    pub bound_holds: bool,
    /// `|slack| ≤ 3·se`.
    pub equality_holds: bool,
    /// The premise (independent uniform nulls) fails; the result is only
    /// informational.
    pub informational: bool,
}

impl BoundCheck {
    fn from_slack(lhs: f64, rhs: f64, slack: Estimate, informational: bool) -> Self {
        Self {
            lhs,
            rhs,
            slack: slack.mean,
            se: slack.se,
            bound_holds: slack.mean >= -3.0 * slack.se,
            equality_holds: slack.within(0.0, 3.0),
            informational,
        }
    }
}

fn bh_level(procedure: Procedure) -> Result<f64> {
    match procedure {
        Procedure::Bh { q } => Ok(q),
        other => Err(FdrError::Unsupported(format!("check needs the plain step-up rule, got {other:?}"))),
    }
}

/// Moment bound `E[Π₁^k] ≤ Σ_{j=1..k} c_j·E[(j + R^(j))^(j−k)]` with
/// `c_j = ∏_{i<j} q(m0 − i)/m`, where `R^(j)` is the shifted count on the
/// replicate with its first `j` nulls removed. With independent uniform
/// nulls the two sides are equal.
pub fn thm21_bound_check(config: &SimConfig, k: usize) -> Result<BoundCheck> {
    config.validate()?;
    let q = bh_level(config.procedure)?;
    let spec = &config.mixture;
    let (m, m0) = (spec.m, spec.m0());
    if k == 0 || k > m0 {
        return config_err(format!("moment order must lie in 1..={m0}, got {k}"));
    }
    // S^k expands into falling factorials of S with Stirling weights; they are
    // all 1 for k <= 2.
    let coef: Vec<f64> = (1..=k)
        .map(|j| stirling2(k, j) * (0..j).map(|i| q * (m0 - i) as f64 / m as f64).product::<f64>())
        .collect();
    let rows = replicates(config.reps, config.seed, |rng, ws| {
        fill_mixture(rng, spec, &mut ws.values);
        let r = step_up_unsorted(&ws.values, q, 0, m, false, &mut ws.scratch);
        let s = count_null_rejections(&ws.values, m0, r, grid_threshold(q, r, m));
        let lhs = (s as f64 / r.max(1) as f64).powi(k as i32);
        let rhs = compensated_sum((1..=k).map(|j| {
            let rj = step_up_unsorted(&ws.values[j..], q, j, m, false, &mut ws.scratch);
            coef[j - 1] * ((j + rj) as f64).powi(j as i32 - k as i32)
        }));
        (lhs, rhs)
    });
    let lhs: Vec<f64> = rows.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|p| p.1).collect();
    let slack: Vec<f64> = rows.iter().map(|p| p.1 - p.0).collect();
    Ok(BoundCheck::from_slack(
        mean_of(&lhs),
        mean_of(&rhs),
        Estimate::from_samples(&slack),
        !spec.null_dependence.is_independent(),
    ))
}

/// Stirling number of the second kind.
fn stirling2(n: usize, k: usize) -> f64 {
    let mut row = vec![0.0; k + 1];
    row[0] = 1.0;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCheck {
    pub ratio: f64,
    pub target: f64,
    pub se: f64,
    /// `|ratio − target| ≤ 3·se`.
    pub passed: bool,
}

/// `E[S]/(1 + E[R^(1)]) = q·m0/m` for independent uniform nulls.
pub fn identity_a1_check(
    gamma: f64,
    alt: AlternativeModel,
    m: usize,
    q: f64,
    reps: usize,
    seed: u64,
) -> Result<RatioCheck> {
    let spec = MixtureSpec::independent(gamma, alt, m)?;
    Procedure::Bh { q }.validate()?;
    if reps == 0 {
        return config_err("reps must be at least 1");
    }
    let m0 = spec.m0();
    if m0 == 0 {
        return config_err("the identity needs at least one null");
    }
    let rows = replicates(reps, seed, |rng, ws| {
        fill_mixture(rng, &spec, &mut ws.values);
        let r = step_up_unsorted(&ws.values, q, 0, m, false, &mut ws.scratch);
        let s = count_null_rejections(&ws.values, m0, r, grid_threshold(q, r, m));
        let r1 = step_up_unsorted(&ws.values[1..], q, 1, m, false, &mut ws.scratch);
        (s as f64, 1.0 + r1 as f64)
    });
    let s: Vec<f64> = rows.iter().map(|p| p.0).collect();
    let b: Vec<f64> = rows.iter().map(|p| p.1).collect();
    let est = ratio_estimate(&s, &b);
    let target = q * m0 as f64 / m as f64;
    Ok(RatioCheck { ratio: est.mean, target, se: est.se, passed: est.within(target, 3.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop23Check {
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of the per-replicate difference `lhs − rhs`.
    pub se: f64,
    /// `lhs ≤ rhs + 3·se`.
    pub passed: bool,
    /// `E[Π₃^l]` with its own standard error.
    pub pi3_moment: Estimate,
}

/// `E[Π₃^l] ≤ (1 − γ)^l + E[Π₁^k]/γ^k` with `γ = m0/m`.
pub fn prop23_check(config: &SimConfig, k: usize, l: usize) -> Result<Prop23Check> {
    config.validate()?;
    let spec = &config.mixture;
    let (m, m0) = (spec.m, spec.m0());
    if m0 == 0 {
        return config_err("the bound needs gamma > 0");
    }
    if k == 0 || l == 0 {
        return config_err("moment orders must be positive");
    }
    let gamma = m0 as f64 / m as f64;
    let reps = replicates(config.reps, config.seed, |rng, ws| run_replicate(spec, config.procedure, rng, ws));
    let pairs: Vec<(f64, f64)> = reps
        .iter()
        .map(|x| {
            let p = Proportions::from_counts(x.r, x.s, m, m0);
            (p.pi3.powi(l as i32), p.pi1.powi(k as i32) / gamma.powi(k as i32))
        })
        .collect();
    let pi3: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let pi1: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let lhs = mean_of(&pi3);
    let rhs = (1.0 - gamma).powi(l as i32) + mean_of(&pi1);
    let d = Estimate::from_samples(&diff);
    Ok(Prop23Check {
        lhs,
        rhs,
        se: d.se,
        passed: lhs <= rhs + 3.0 * d.se,
        pi3_moment: Estimate::from_samples(&pi3),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub r_over_m: Estimate,
    pub r_over_m_sq: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSweep {
    pub summary: AsymptoticSummary,
    pub rows: Vec<SweepRow>,
}

impl ConvergenceSweep {
    /// `|E[R/m] − ρ|` along the grid.
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| (r.r_over_m.mean - self.summary.rho).abs()).collect()
    }
}

/// `E[R/m]` and `E[(R/m)²]` along an increasing grid of `m`.
pub fn convergence_sweep(
    model: &AlternativeModel,
    gamma: f64,
    q: f64,
    m_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ConvergenceSweep> {
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[0] >= w[1]) || m_grid[0] == 0 {
        return config_err("m_grid must be positive and strictly increasing");
    }
    if reps == 0 {
        return config_err("reps must be at least 1");
    }
    let summary = theory::rho(model, q, gamma)?;
    let rows = m_grid
        .iter()
        .map(|&m| {
            let spec = MixtureSpec::independent(gamma, model.clone(), m)?;
            let fr: Vec<f64> = replicates(reps, seed, |rng, ws| {
                fill_mixture(rng, &spec, &mut ws.values);
                step_up_unsorted(&ws.values, q, 0, m, false, &mut ws.scratch) as f64 / m as f64
            });
            let sq: Vec<f64> = fr.iter().map(|x| x * x).collect();
            Ok(SweepRow { m, r_over_m: Estimate::from_samples(&fr), r_over_m_sq: Estimate::from_samples(&sq) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceSweep { summary, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhsCheck {
    pub bounds: BhsBounds,
    pub pi1: Estimate,
    pub pi2: Estimate,
    pub q_m: Estimate,
    /// Fraction of replicates with `γ̂ ≥ γ − 0.01`.
    pub overestimate_fraction: f64,
    pub fdr_ok: bool,
    pub power_ok: bool,
    /// `|E[q_m] − q(x, δ)| ≤ 0.01`.
    pub q_ok: bool,
}

impl BhsCheck {
    pub fn passed(&self) -> bool {
        self.fdr_ok && self.power_ok && self.q_ok
    }
}

/// FDR and power of the adaptive procedure against their asymptotic bounds.
pub fn bhs_check(
    model: &AlternativeModel,
    gamma: f64,
    delta: f64,
    x: f64,
    m: usize,
    reps: usize,
    seed: u64,
) -> Result<BhsCheck> {
    let bounds = theory::bhs_bounds(model, gamma, delta, x)?;
    let spec = MixtureSpec::independent(gamma, model.clone(), m)?;
    if spec.m0() == m {
        return config_err("m is too small to hold any alternatives");
    }
    if reps == 0 {
        return config_err("reps must be at least 1");
    }
    let (m0, procedure) = (spec.m0(), Procedure::Bhs { delta, x });
    let rows = replicates(reps, seed, |rng, ws| run_replicate(&spec, procedure, rng, ws));
    let props: Vec<Proportions> = rows.iter().map(|x| Proportions::from_counts(x.r, x.s, m, m0)).collect();
    let pi1 = Estimate::from_samples(&props.iter().map(|p| p.pi1).collect::<Vec<_>>());
    let pi2 = Estimate::from_samples(&props.iter().map(|p| p.pi2.unwrap_or(0.0)).collect::<Vec<_>>());
    let q_m = Estimate::from_samples(&rows.iter().map(|x| x.q_m).collect::<Vec<_>>());
    let over = rows.iter().filter(|x| x.gamma_hat >= gamma - 0.01).count() as f64 / reps as f64;
    Ok(BhsCheck {
        fdr_ok: pi1.mean >= bounds.fdr_lo - 3.0 * pi1.se && pi1.mean <= bounds.fdr_hi + 3.0 * pi1.se,
        power_ok: pi2.mean >= bounds.power_lo - 3.0 * pi2.se && pi2.mean <= bounds.power_hi + 3.0 * pi2.se,
        q_ok: (q_m.mean - bounds.q_limit).abs() <= 0.01,
        bounds,
        pi1,
        pi2,
        q_m,
        overestimate_fraction: over,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlivenkoCheck {
    pub dependence: DependenceModel,
    /// `(n, E[sup_t |G_n(t) − t|])` along the grid.
    pub rows: Vec<(usize, Estimate)>,
    pub decreasing: bool,
    /// False for equicorrelated nulls, whose empirical law converges to a
    /// random limit rather than to the uniform.
    pub expected_to_vanish: bool,
}

impl GlivenkoCheck {
    pub fn passed(&self) -> bool {
        !self.expected_to_vanish || self.decreasing
    }
}

/// Mean sup-distance between the empirical CDF of `n` dependent uniform
/// variates and the identity, along an increasing grid of `n`.
pub fn glivenko_check(dep: DependenceModel, n_grid: &[usize], reps: usize, seed: u64) -> Result<GlivenkoCheck> {
    dep.validate()?;
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return config_err("n_grid must be positive and strictly increasing");
    }
    if reps == 0 {
        return config_err("reps must be at least 1");
    }
    let rows: Vec<(usize, Estimate)> = n_grid
        .iter()
        .map(|&n| {
            let sups = replicates(reps, seed, |rng, ws| {
                ws.values.clear();
                sample_nulls_into(rng, n, dep, &mut ws.values);
                crate::distributions::sup_distance_to_uniform(&ws.values)
            });
            (n, Estimate::from_samples(&sups))
        })
        .collect();
    let decreasing = rows.windows(2).all(|w| w[1].1.mean < w[0].1.mean);
    Ok(GlivenkoCheck {
        dependence: dep,
        rows,
        decreasing,
        expected_to_vanish: !matches!(dep, DependenceModel::Equicorrelated { .. }),
    })
}

/// Outcome of one named check in [`verify_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// The standard battery: step-up FDR equality, ballot probability, moment
/// bound, the shifted-count identity, the false nondiscovery bound, the
/// adaptive procedure's bounds and the dependent Glivenko–Cantelli decay.
/// `quick` shrinks sample sizes for a smoke run.
pub fn verify_suite(quick: bool, seed: u64) -> Result<Vec<CheckOutcome>> {
    let scale = |full: usize, small: usize| if quick { small } else { full };
    let power = AlternativeModel::power(0.1)?;
    let mut out = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        out.push(CheckOutcome { name: name.into(), passed, detail });
    };

    let uniform = MixtureSpec::independent(1.0, power.clone(), 100)?;
    let report = run(&SimConfig::new(uniform, Procedure::Bh { q: 0.2 }, scale(20_000, 2_000), seed))?;
    let pi1 = report.stat("pi1").expect("pi1").estimate();
    push(
        "bh_fdr_equality",
        pi1.within(0.2, 3.0),
        format!("E[pi1] = {:.5} ± {:.5}, target 0.2", pi1.mean, pi1.se),
    );

    let ballot = crate::gof::no_rejection_probability(1000, 0.2, scale(5_000, 1_000), seed)?;
    push(
        "ballot",
        ballot.within(0.8, 3.0),
        format!("P(R=0) = {:.5} ± {:.5}, target 0.8", ballot.mean, ballot.se),
    );

    let spec = MixtureSpec::independent(1.0, power.clone(), 20)?;
    let thm = thm21_bound_check(&SimConfig::new(spec, Procedure::Bh { q: 0.3 }, scale(100_000, 10_000), seed), 2)?;
    push(
        "thm21_k2",
        thm.bound_holds && thm.equality_holds,
        format!("lhs = {:.5}, rhs = {:.5}, slack se = {:.5}", thm.lhs, thm.rhs, thm.se),
    );

    let a1 = identity_a1_check(0.5, AlternativeModel::degenerate(0.01)?, 100, 0.2, scale(100_000, 10_000), seed)?;
    push(
        "identity_a1",
        a1.passed,
        format!("ratio = {:.5} ± {:.5}, target {:.5}", a1.ratio, a1.se, a1.target),
    );

    let spec = MixtureSpec::independent(0.5, power.clone(), scale(2_000, 500))?;
    let p23 = prop23_check(&SimConfig::new(spec, Procedure::Bh { q: 0.2 }, scale(500, 100), seed), 2, 1)?;
    push(
        "prop23",
        p23.passed,
        format!("lhs = {:.5}, rhs = {:.5}, se = {:.5}", p23.lhs, p23.rhs, p23.se),
    );

    let bhs = bhs_check(&power, 0.5, 0.1, 0.5, scale(10_000, 2_000), scale(300, 100), seed)?;
    push(
        "bhs_bounds",
        bhs.passed(),
        format!(
            "E[pi1] = {:.5} in [{:.5}, {:.5}], E[pi2] = {:.5} in [{:.5}, {:.5}], E[q_m] = {:.5} vs {:.5}",
            bhs.pi1.mean,
            bhs.bounds.fdr_lo,
            bhs.bounds.fdr_hi,
            bhs.pi2.mean,
            bhs.bounds.power_lo,
            bhs.bounds.power_hi,
            bhs.q_m.mean,
            bhs.bounds.q_limit
        ),
    );

    let grid: &[usize] = if quick { &[1_000, 10_000] } else { &[1_000, 10_000, 100_000] };
    let gc = glivenko_check(DependenceModel::Ar1Copula { phi: 0.5 }, grid, scale(100, 30), seed)?;
    let means: Vec<String> = gc.rows.iter().map(|(n, e)| format!("n={n}: {:.5}", e.mean)).collect();
    push("glivenko_ar1", gc.passed(), means.join(", "));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bh_config(gamma: f64, alt: AlternativeModel, m: usize, q: f64, reps: usize, seed: u64) -> SimConfig {
        SimConfig::new(MixtureSpec::independent(gamma, alt, m).unwrap(), Procedure::Bh { q }, reps, seed)
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn estimate_matches_textbook_formulas() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let e = Estimate::from_samples(&xs);
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(e.within(2.5, 0.0));
        assert_eq!(Estimate::from_samples(&[0.0; 5]).z_score(0.0), 0.0);
    }

    #[test]
    fn ratio_estimate_constant_ratio_has_zero_se() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 4.0, 6.0];
        let e = ratio_estimate(&a, &b);
        assert!((e.mean - 0.5).abs() < 1e-15);
        assert!(e.se < 1e-15);
    }

    #[test]
    fn pure_null_fdr_and_ballot() {
        let cfg = bh_config(1.0, AlternativeModel::power(0.1).unwrap(), 1000, 0.2, 5000, 42);
        let rep = run(&cfg).unwrap();
        let pi1 = rep.stat("pi1").unwrap().estimate();
        assert!(pi1.within(0.2, 3.0), "{pi1:?}");
        let p0 = rep.stat("no_rejection").unwrap().estimate();
        assert!(p0.within(0.8, 3.0), "{p0:?}");
        assert!(rep.stat("pi2").is_none());
    }

    #[test]
    fn no_nulls_means_no_false_discoveries() {
        let cfg = bh_config(0.0, AlternativeModel::power(0.3).unwrap(), 200, 0.2, 200, 7);
        let rep = run(&cfg).unwrap();
        let pi1 = rep.stat("pi1").unwrap();
        assert_eq!(pi1.mean, 0.0);
        assert_eq!(pi1.moments, vec![0.0, 0.0]);
    }

    #[test]
    fn report_sanity_and_jensen() {
        let cfg = bh_config(0.5, AlternativeModel::power(0.2).unwrap(), 300, 0.2, 400, 3);
        let rep = run(&cfg).unwrap();
        for name in ["pi1", "pi2", "pi3", "r_over_m", "s_over_m", "no_rejection"] {
            let s = rep.stat(name).unwrap();
            assert!((0.0..=1.0).contains(&s.mean), "{name}");
            assert!(s.moments[1] >= s.moments[0] * s.moments[0] - 1e-15, "{name}");
            assert_eq!(s.reps, 400);
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let cfg = SimConfig::new(
            MixtureSpec::independent(0.5, AlternativeModel::power(0.1).unwrap(), 500).unwrap(),
            Procedure::Bhs { delta: 0.1, x: 0.5 },
            300,
            11,
        );
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(&cfg).unwrap());
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run(&cfg).unwrap());
        assert_eq!(one.to_json(), four.to_json());
        assert!(one.stat("q_m").is_some());
    }

    #[test]
    fn config_validation() {
        let mut cfg = bh_config(0.5, AlternativeModel::power(0.1).unwrap(), 10, 0.2, 1, 1);
        cfg.reps = 0;
        assert!(matches!(run(&cfg), Err(FdrError::Config(_))));
        cfg.reps = 1;
        cfg.k_max = 0;
        assert!(run(&cfg).is_err());
        cfg.k_max = 1;
        cfg.procedure = Procedure::Bh { q: 1.5 };
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let json = r#"{"mixture":{"gamma":0.5,"alt":"power:alpha=0.1","m":100},
                       "procedure":{"method":"bhs","delta":0.1,"x":0.5},"reps":10}"#;
        let cfg: SimConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.k_max, 2);
        assert_eq!(cfg.procedure, Procedure::Bhs { delta: 0.1, x: 0.5 });
        let back: SimConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn thm21_first_moment_is_exact() {
        let cfg = bh_config(0.5, AlternativeModel::power(0.2).unwrap(), 40, 0.3, 20_000, 5);
        let c = thm21_bound_check(&cfg, 1).unwrap();
        assert!((c.rhs - 0.15).abs() < 1e-15);
        assert!(c.bound_holds && c.equality_holds, "{c:?}");
    }

    #[test]
    fn thm21_second_moment_with_alternatives() {
        let cfg = bh_config(0.5, AlternativeModel::degenerate(0.01).unwrap(), 40, 0.3, 20_000, 9);
        let c = thm21_bound_check(&cfg, 2).unwrap();
        assert!(c.bound_holds && c.equality_holds, "{c:?}");
        assert!(!c.informational);
        assert!(thm21_bound_check(&cfg, 21).is_err());
    }

    #[test]
    fn stirling_table() {
        // S(4, ·) = 1, 7, 6, 1 and S(5, 3) = 25
        let row: Vec<f64> = (1..=4).map(|j| stirling2(4, j)).collect();
        assert_eq!(row, [1.0, 7.0, 6.0, 1.0]);
        assert_eq!(stirling2(5, 3), 25.0);
        assert_eq!(stirling2(3, 0), 0.0);
    }

    #[test]
    fn thm21_third_moment_all_null() {
        // pi1 is 0 or 1 here, so every moment equals q.
        let cfg = bh_config(1.0, AlternativeModel::power(0.5).unwrap(), 20, 0.3, 40_000, 5);
        let c = thm21_bound_check(&cfg, 3).unwrap();
        assert!((c.lhs - 0.3).abs() < 4.0 * (0.21f64 / 40_000.0).sqrt(), "{c:?}");
        assert!(c.equality_holds && c.bound_holds, "{c:?}");
    }

    #[test]
    fn thm21_dependent_nulls_are_informational() {
        let spec = MixtureSpec::new(
            1.0,
            AlternativeModel::power(0.1).unwrap(),
            DependenceModel::Equicorrelated { rho: 0.3 },
            20,
        )
        .unwrap();
        let c = thm21_bound_check(&SimConfig::new(spec, Procedure::Bh { q: 0.3 }, 500, 1), 2).unwrap();
        assert!(c.informational);
    }

    #[test]
    fn identity_a1_examples() {
        let alt = AlternativeModel::degenerate(0.01).unwrap();
        let c = identity_a1_check(0.5, alt.clone(), 100, 0.2, 20_000, 3).unwrap();
        assert!((c.target - 0.1).abs() < 1e-15);
        assert!(c.passed, "{c:?}");
        let z = identity_a1_check(0.5, alt.clone(), 100, 0.0, 100, 3).unwrap();
        assert_eq!(z.ratio, 0.0);
        assert_eq!(z.target, 0.0);
        assert!(z.passed);
        assert!(identity_a1_check(0.0, alt, 100, 0.2, 100, 3).is_err());
    }

    #[test]
    fn prop23_examples() {
        let cfg = bh_config(1.0, AlternativeModel::power(0.1).unwrap(), 50, 0.2, 500, 2);
        let c = prop23_check(&cfg, 2, 1).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.passed);
        let cfg = bh_config(0.5, AlternativeModel::power(0.1).unwrap(), 500, 0.2, 300, 2);
        for l in [1, 2] {
            let c = prop23_check(&cfg, 2, l).unwrap();
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn sweep_moves_toward_rho() {
        let g = AlternativeModel::degenerate(0.1).unwrap();
        let sweep = convergence_sweep(&g, 0.5, 0.5, &[100, 1000, 10_000], 100, 8).unwrap();
        let err = sweep.errors();
        assert!(err.windows(2).all(|w| w[1] < w[0]), "{err:?}");
        assert!(err[2] < 0.01);
        let null = convergence_sweep(&g, 1.0, 0.2, &[100, 1000], 100, 8).unwrap();
        assert!(null.rows[1].r_over_m.mean < null.rows[0].r_over_m.mean);
        assert!(convergence_sweep(&g, 0.5, 0.5, &[100, 100], 10, 8).is_err());
    }

    #[test]
    fn bhs_small_run_respects_bounds() {
        let g = AlternativeModel::power(0.1).unwrap();
        let c = bhs_check(&g, 0.5, 0.1, 0.5, 2000, 200, 4).unwrap();
        assert!(c.fdr_ok, "{c:?}");
        assert!(c.q_ok, "{c:?}");
        assert!(c.overestimate_fraction > 0.99);
        assert!(matches!(
            bhs_check(&AlternativeModel::degenerate(0.9).unwrap(), 0.5, 0.05, 0.5, 100, 10, 1),
            Err(FdrError::PremiseViolated(_))
        ));
    }

    #[test]
    fn glivenko_independent_and_equicorrelated() {
        let ind = glivenko_check(DependenceModel::Independent, &[100, 1000, 10_000], 50, 6).unwrap();
        assert!(ind.decreasing && ind.passed());
        let eq = glivenko_check(DependenceModel::Equicorrelated { rho: 0.3 }, &[100, 1000, 10_000], 50, 6).unwrap();
        assert!(!eq.expected_to_vanish);
        assert!(eq.rows[2].1.mean > 0.1, "{:?}", eq.rows);
    }
}
