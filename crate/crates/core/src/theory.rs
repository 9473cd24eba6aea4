//! Limits of the step-up procedure as `m → ∞` with `γ` fixed.
//!
//! Given the alternative law `G`, the fraction of rejections converges to
//! `ρ(q, γ)`, where `q·ρ` is the largest `t` at which the scaled excess
//! `(G(t) − t)/t` still exceeds `(1 − q)/(q(1 − γ))`. The same number is
//! the generalized inverse of the nonincreasing function
//! `ψ_q(x) = sup_{qx ≤ t ≤ q} (G(t) − t)/t` at that level; when `ψ_q` is
//! flat at the level the limit is only bracketed and [`rho`] reports both
//! ends.
//!
//! Root finding is bracketing bisection carried to adjacent floats.
//! Suprema for families without a closed form use a 4096-point grid and a
//! golden-section refinement around the best grid point.

use std::fmt;

use serde::Serialize;

use crate::distributions::{AlternativeModel, MixtureSpec};
use crate::error::{config_err, FdrError, Result};

const GRID_POINTS: usize = 4096;
/// Relative tolerance under which `ψ_q` is taken to sit exactly at a level.
const TIE_RTOL: f64 = 64.0 * f64::EPSILON;
/// Bracket width below which the two generalized inverses count as equal.
const UNIQUE_TOL: f64 = 1e-8;

/// Bisection on a predicate that is false at `lo` and true at `hi`,
/// carried on until the bracket cannot shrink. Returns the final `hi`.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Maximum of `f` on `[lo, hi]`: uniform grid, then golden-section search
/// on the two cells around the best grid point.
fn numeric_sup(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return f(lo);
    }
    let width = hi - lo;
    let at = |i: usize| lo + width * i as f64 / GRID_POINTS as f64;
    let (mut best_i, mut best) = (0, f(lo));
    for i in 1..=GRID_POINTS {
        let v = f(at(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(GRID_POINTS)));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd).max(f(hi))
}

/// `(G(t) − t)/t`, with its limit as `t ↓ 0` at zero.
pub fn scaled_excess(model: &AlternativeModel, t: f64) -> f64 {
    if t <= 0.0 {
        if model.cdf(0.0) > 0.0 {
            return f64::INFINITY;
        }
        return model.slope_at_zero() - 1.0;
    }
    (model.cdf(t) - t) / t
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        config_err(format!("q must lie in (0, 1], got {q}"))
    }
}

/// `ψ_q(x) = sup_{qx ≤ t ≤ q} (G(t) − t)/t`, possibly `+∞` at `x = 0`.
pub fn psi(model: &AlternativeModel, q: f64, x: f64) -> Result<f64> {
    check_q(q)?;
    if !(0.0..=1.0).contains(&x) {
        return config_err(format!("x must lie in [0, 1], got {x}"));
    }
    model.validate()?;
    let (lo, hi) = (q * x, q);
    let value = match model {
        AlternativeModel::Degenerate { x0 } => {
            let x0 = *x0;
            if x0 > hi {
                -1.0
            } else if x0 >= lo {
                if x0 == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / x0 - 1.0
                }
            } else {
                1.0 / lo - 1.0
            }
        }
        // t^(α−1) − 1 is decreasing: the sup is at the left end.
        AlternativeModel::Power { alpha } => {
            if lo == 0.0 {
                f64::INFINITY
            } else {
                lo.powf(alpha - 1.0) - 1.0
            }
        }
        // Decreasing on both sides of the jump at x0, with an upward jump there.
        AlternativeModel::TruncatedPower { x0, .. } => {
            let left = scaled_excess(model, lo);
            if *x0 > lo && *x0 <= hi {
                left.max(1.0 / x0 - 1.0)
            } else {
                left
            }
        }
        // Linear pieces a + b·t give a/t + b − 1, monotone between knots.
        AlternativeModel::Tabulated(tab) => tab
            .knots()
            .into_iter()
            .filter(|&k| k > lo && k < hi)
            .chain([lo, hi])
            .map(|t| scaled_excess(model, t))
            .fold(f64::NEG_INFINITY, f64::max),
        AlternativeModel::PowerMixture { .. } => {
            if lo == 0.0 {
                f64::INFINITY
            } else {
                numeric_sup(|t| scaled_excess(model, t), lo, hi)
            }
        }
    };
    Ok(value)
}

fn level_tol(level: f64) -> f64 {
    TIE_RTOL * level.abs().max(1.0)
}

/// The two generalized inverses of `ψ_q` at level `1/y`:
/// `(min{x : ψ_q(x) ≤ 1/y}, inf{x : ψ_q(x) < 1/y})`.
///
/// `ψ_q` values within a few ulps of the level count as equal to it.
pub fn psi_star(model: &AlternativeModel, q: f64, y: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    if y.is_nan() || y <= 0.0 {
        return config_err(format!("y must be positive, got {y}"));
    }
    model.validate()?;
    let level = 1.0 / y;
    let tol = level_tol(level);
    let psi_at = |x: f64| psi(model, q, x).expect("validated inputs");
    let first_where = |pred: &dyn Fn(f64) -> bool| {
        if pred(0.0) {
            0.0
        } else if !pred(1.0) {
            1.0
        } else {
            bisect(0.0, 1.0, pred)
        }
    };
    let lower = first_where(&|x| psi_at(x) <= level + tol);
    let upper = first_where(&|x| psi_at(x) < level - tol);
    Ok((lower, upper.max(lower)))
}

/// `sup{t ∈ [0, 1] : (G(t) − t)/t > level}`, 0 for the empty set.
///
/// Scans a grid (geometric towards 0, uniform, and the model's own
/// breakpoints) for the rightmost point above the level, then bisects the
/// crossing against its right neighbour.
fn excess_crossing(model: &AlternativeModel, level: f64) -> f64 {
    let mut grid: Vec<f64> = (1..=1074).map(|k| 0.5f64.powi(k)).collect();
    grid.extend((1..=GRID_POINTS).map(|i| i as f64 / GRID_POINTS as f64));
    grid.extend(model.breakpoints().into_iter().filter(|t| *t > 0.0 && *t <= 1.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let above = |t: f64| scaled_excess(model, t) > level;
    match grid.iter().rposition(|&t| above(t)) {
        None => 0.0,
        Some(i) if i + 1 == grid.len() => 1.0,
        Some(i) => {
            // above(grid[i]) holds and above(grid[i + 1]) fails.
            let hi = bisect(grid[i], grid[i + 1], |t| !above(t));
            let lo = f64::from_bits(hi.to_bits() - 1);
            if above(lo) {
                lo
            } else {
                hi
            }
        }
    }
}

/// `q·ρ = sup{t : (G(t) − t)/t > (1 − q)/(q(1 − γ))}`, divided by `q`.
pub fn rho_from_excess(model: &AlternativeModel, q: f64, gamma: f64) -> Result<f64> {
    check_rho_args(q, gamma)?;
    model.validate()?;
    if gamma >= 1.0 {
        return Ok(0.0);
    }
    let level = (1.0 - q) / (q * (1.0 - gamma));
    Ok((excess_crossing(model, level) / q).min(1.0))
}

fn check_rho_args(q: f64, gamma: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return config_err(format!("q must lie in (0, 1), got {q}"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return config_err(format!("gamma must lie in [0, 1], got {gamma}"));
    }
    Ok(())
}

/// Limiting behaviour of the step-up procedure at level `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticSummary {
    pub q: f64,
    pub gamma: f64,
    /// Limiting rejection fraction; equals `rho_lower` when the limit is
    /// only bracketed.
    pub rho: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub unique: bool,
    /// `q·γ` when `ρ > 0`; `None` means undetermined.
    pub fdr_limit: Option<f64>,
    /// `ρ·q·γ`, the limit of `S/m`.
    pub s_over_m_limit: Option<f64>,
    /// Limit of the fraction of alternatives rejected.
    pub pi2_limit: Option<f64>,
    /// Limit of `1 − Π₃`.
    pub pi3_complement_limit: Option<f64>,
    /// Degenerate alternative sitting exactly on the knife edge
    /// `x0 = q(1 − γ)/(1 − qγ)`.
    pub borderline: bool,
    /// `γ = 1`: no alternatives, so `ρ = 0` trivially.
    pub null_only: bool,
}

impl AsymptoticSummary {
    /// Limiting average power `ρ(1 − qγ)/(1 − γ)`, when determined.
    pub fn power_limit(&self) -> Option<f64> {
        self.pi2_limit
    }
}

/// `ρ(q, γ)` with its bracketing inverses and the derived limits.
pub fn rho(model: &AlternativeModel, q: f64, gamma: f64) -> Result<AsymptoticSummary> {
    check_rho_args(q, gamma)?;
    model.validate()?;
    if gamma >= 1.0 {
        return Ok(AsymptoticSummary {
            q,
            gamma,
            rho: 0.0,
            rho_lower: 0.0,
            rho_upper: 0.0,
            unique: true,
            fdr_limit: None,
            s_over_m_limit: None,
            pi2_limit: None,
            pi3_complement_limit: None,
            borderline: false,
            null_only: true,
        });
    }
    let y = q * (1.0 - gamma) / (1.0 - q);
    let (lower, upper) = psi_star(model, q, y)?;
    let unique = upper - lower <= UNIQUE_TOL;
    let rho = if unique { rho_from_excess(model, q, gamma)? } else { lower };
    let determined = unique && rho > 0.0;
    Ok(AsymptoticSummary {
        q,
        gamma,
        rho,
        rho_lower: lower,
        rho_upper: upper,
        unique,
        fdr_limit: (rho > 0.0).then_some(q * gamma),
        s_over_m_limit: determined.then_some(rho * q * gamma),
        pi2_limit: determined.then_some(rho * (1.0 - q * gamma) / (1.0 - gamma)),
        pi3_complement_limit: (determined && rho < 1.0)
            .then(|| gamma * (1.0 - q * rho) / (1.0 - rho)),
        borderline: !unique && matches!(model, AlternativeModel::Degenerate { .. }),
        null_only: false,
    })
}

/// Smallest positive root of `G(t) = β·t`, `β = (1 − qγ)/(q(1 − γ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcaveRoot {
    pub beta: f64,
    pub t_star: f64,
    /// `t*/q`.
    pub rho: f64,
    /// `false` when `G'(0+) ≤ β`, in which case `ρ = 0`.
    pub applicable: bool,
    /// `β = 1`: the only positive root is `t = 1`.
    pub endpoint: bool,
}

/// `ρ` for a concave `G` as `t*/q`, `t*` the smallest positive root of
/// `G(t) = β·t`.
pub fn rho_concave(model: &AlternativeModel, q: f64, gamma: f64) -> Result<ConcaveRoot> {
    check_q(q)?;
    if !(0.0..1.0).contains(&gamma) {
        return config_err(format!("gamma must lie in [0, 1), got {gamma}"));
    }
    model.validate()?;
    if !model.is_concave() {
        return Err(FdrError::Unsupported(format!("{model} is not concave")));
    }
    let beta = (1.0 - q * gamma) / (q * (1.0 - gamma));
    let not_applicable = ConcaveRoot { beta, t_star: 0.0, rho: 0.0, applicable: false, endpoint: false };
    if model.slope_at_zero() <= beta {
        return Ok(not_applicable);
    }
    let gap = |t: f64| model.cdf(t) - beta * t;
    if gap(1.0) >= 0.0 {
        return Ok(ConcaveRoot { beta, t_star: 1.0, rho: 1.0 / q, applicable: true, endpoint: true });
    }
    let mut lo = 1.0_f64;
    while gap(lo) <= 0.0 {
        lo *= 0.5;
        if lo == 0.0 {
            return Ok(not_applicable);
        }
    }
    let t_star = bisect(lo, 1.0, |t| gap(t) <= 0.0);
    Ok(ConcaveRoot { beta, t_star, rho: t_star / q, applicable: true, endpoint: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerMixtureRoot {
    /// `t = q·ρ`.
    pub t: f64,
    pub rho: f64,
    /// Left side minus right side of the defining equation at `t`.
    pub residual: f64,
}

/// Solves `p·t^(α−1) + (1−p)·t^(β−1) − 1 = (1 − q)/(q(1 − γ))` for `t = qρ`.
///
/// The left side falls from `+∞` to a minimum and climbs back to 0 at
/// `t = 1`, so it exceeds the (positive) right side exactly on `(0, t)`.
pub fn rho_power_mixture(p: f64, alpha: f64, beta_exp: f64, q: f64, gamma: f64) -> Result<PowerMixtureRoot> {
    if !(p > 0.0 && p <= 1.0) {
        return config_err(format!("p must lie in (0, 1], got {p}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return config_err(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(beta_exp > 1.0 && beta_exp.is_finite()) {
        return config_err(format!("beta must exceed 1, got {beta_exp}"));
    }
    if !(q > 0.0 && q < 1.0) {
        return config_err(format!("q must lie in (0, 1), got {q}"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return config_err(format!("gamma must lie in [0, 1), got {gamma}"));
    }
    let rhs = (1.0 - q) / (q * (1.0 - gamma));
    let lhs = |t: f64| p * t.powf(alpha - 1.0) + (1.0 - p) * t.powf(beta_exp - 1.0) - 1.0;
    let hi = bisect(0.0, 1.0, |t| lhs(t) <= rhs);
    let lo = f64::from_bits(hi.to_bits() - 1);
    let t = if (lhs(lo) - rhs).abs() < (lhs(hi) - rhs).abs() { lo } else { hi };
    Ok(PowerMixtureRoot { t, rho: t / q, residual: lhs(t) - rhs })
}

/// Knife-edge atom location `q(1 − γ)/(1 − qγ)` for a degenerate alternative.
pub fn borderline_x0(q: f64, gamma: f64) -> f64 {
    q * (1.0 - gamma) / (1.0 - q * gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BorderlineLimits {
    pub r_over_m: f64,
    pub pi2: f64,
    pub pi3_complement: f64,
}

/// Limits for a degenerate alternative at the knife edge with independent
/// uniform nulls: half the non-borderline rejection fraction.
pub fn borderline_limits(q: f64, gamma: f64) -> BorderlineLimits {
    BorderlineLimits {
        r_over_m: (1.0 - gamma) / (2.0 * (1.0 - q * gamma)),
        pi2: 0.5,
        pi3_complement: gamma * (2.0 - q - q * gamma) / (1.0 + gamma - 2.0 * q * gamma),
    }
}

/// `κ(x) = min_{0≤t≤x} (1 − G(t))/(1 − t)`.
pub fn kappa(model: &AlternativeModel, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return config_err(format!("x must lie in (0, 1), got {x}"));
    }
    model.validate()?;
    let tail_ratio = |t: f64| (1.0 - model.cdf(t)) / (1.0 - t);
    let value = match model {
        AlternativeModel::Degenerate { x0 } => {
            if x >= *x0 {
                0.0
            } else {
                1.0
            }
        }
        // Nonincreasing density: the ratio decreases, minimum at t = x.
        AlternativeModel::Power { .. } => tail_ratio(x),
        AlternativeModel::TruncatedPower { x0, .. } => {
            if x >= *x0 {
                0.0
            } else {
                tail_ratio(x)
            }
        }
        // (1 − a − b·t)/(1 − t) is monotone on each linear piece.
        AlternativeModel::Tabulated(tab) => tab
            .knots()
            .into_iter()
            .filter(|&k| k < x)
            .chain([x])
            .map(tail_ratio)
            .fold(1.0, f64::min),
        AlternativeModel::PowerMixture { .. } => -numeric_sup(|t| -tail_ratio(t), 0.0, x),
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Asymptotic FDR and power bounds for the adaptive procedure at target
/// `δ` and estimator cutoff `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhsBounds {
    pub kappa_x: f64,
    /// `δ/(γ + (1 − γ)κ(x))`, the limit of the data-driven level.
    pub q_limit: f64,
    pub fdr_lo: f64,
    pub fdr_hi: f64,
    pub power_lo: f64,
    pub power_hi: f64,
}

fn check_bhs_args(gamma: f64, delta: f64, x: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return config_err(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return config_err(format!("delta must lie in (0, 1), got {delta}"));
    }
    if !(x > 0.0 && x < 1.0) {
        return config_err(format!("x must lie in (0, 1), got {x}"));
    }
    Ok(())
}

/// The bounds without checking that `ρ > 0` on the level interval.
fn bhs_bounds_formula(model: &AlternativeModel, gamma: f64, delta: f64, x: f64) -> Result<(BhsBounds, AsymptoticSummary, AsymptoticSummary)> {
    let kappa_x = kappa(model, x)?;
    let denom = gamma + (1.0 - gamma) * kappa_x;
    let q_limit = delta / denom;
    let q_top = delta / gamma;
    if q_top >= 1.0 {
        return Err(FdrError::PremiseViolated(format!(
            "delta/gamma = {q_top} is not a level below 1"
        )));
    }
    let low = rho(model, q_limit, gamma)?;
    let high = rho(model, q_top, gamma)?;
    let fdr_lo = delta * gamma / denom;
    let bounds = BhsBounds {
        kappa_x,
        q_limit,
        fdr_lo,
        fdr_hi: delta,
        power_lo: low.rho * (1.0 - fdr_lo) / (1.0 - gamma),
        power_hi: high.rho * (1.0 - delta) / (1.0 - gamma),
    };
    Ok((bounds, low, high))
}

/// Bounds on the limiting FDR and average power of the adaptive
/// procedure. Requires `ρ(q, γ) > 0` (with a unique limit) over
/// `[q_limit, δ/γ]`; since `q·ρ` is nondecreasing in `q` it suffices to check
/// the left end, and uniqueness is checked at both.
pub fn bhs_bounds(model: &AlternativeModel, gamma: f64, delta: f64, x: f64) -> Result<BhsBounds> {
    check_bhs_args(gamma, delta, x)?;
    let (bounds, low, high) = bhs_bounds_formula(model, gamma, delta, x)?;
    if low.rho <= 0.0 {
        return Err(FdrError::PremiseViolated(format!(
            "rho({:.6}, {gamma}) = 0: no asymptotic rejections at the lower level",
            bounds.q_limit
        )));
    }
    if !low.unique || !high.unique {
        return Err(FdrError::PremiseViolated(
            "the rejection fraction has no unique limit on the level interval".into(),
        ));
    }
    Ok(bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// Uniform and mixture densities.
    Densities,
    /// Limiting power and FDR of the step-up rule as functions of `q`.
    PowerFdr,
    /// Adaptive-procedure power bounds as functions of `x`.
    BhsPowerBounds,
}

impl FigureKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Densities => "fig1",
            Self::PowerFdr => "fig2",
            Self::BhsPowerBounds => "fig3",
        }
    }

    pub fn headers(self) -> [&'static str; 3] {
        match self {
            Self::Densities => ["t", "uniform", "h"],
            Self::PowerFdr => ["q", "power", "fdr"],
            Self::BhsPowerBounds => ["x", "power_lo", "power_hi"],
        }
    }

    /// `k/100` for densities and `x`, `k/1000` for `q`.
    pub fn default_grid(self) -> Vec<f64> {
        let steps = match self {
            Self::PowerFdr => 1000,
            _ => 100,
        };
        (1..steps).map(|k| k as f64 / steps as f64).collect()
    }

    pub const ALL: [FigureKind; 3] = [Self::Densities, Self::PowerFdr, Self::BhsPowerBounds];
}

impl std::str::FromStr for FigureKind {
    type Err = FdrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" => Ok(Self::Densities),
            "fig2" => Ok(Self::PowerFdr),
            "fig3" => Ok(Self::BhsPowerBounds),
            other => Err(FdrError::Parse(format!("unknown figure '{other}'"))),
        }
    }
}

impl fmt::Display for FigureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub kind: FigureKind,
    pub rows: Vec<[f64; 3]>,
}

/// Formats `v` with 10 significant digits in plain decimal notation.
pub fn format_sig10(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.9e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if v < 0.0 { "-" } else { "" };
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else if exp >= 9 {
        format!("{}{}", digits, "0".repeat((exp - 9) as usize))
    } else {
        let split = (exp + 1) as usize;
        format!("{}.{}", &digits[..split], &digits[split..])
    };
    format!("{sign}{body}")
}

impl FigureTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.kind.headers().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_sig10(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rows behind the density, power/FDR and adaptive-bound figures.
pub fn figure_data(
    kind: FigureKind,
    model: &AlternativeModel,
    gamma: f64,
    delta: f64,
    grid: &[f64],
) -> Result<FigureTable> {
    model.validate()?;
    let rows = match kind {
        FigureKind::Densities => {
            let spec = MixtureSpec::independent(gamma, model.clone(), 1)?;
            grid.iter()
                .map(|&t| Ok([t, 1.0, crate::distributions::mixture_density(&spec, t)?]))
                .collect::<Result<Vec<_>>>()?
        }
        FigureKind::PowerFdr => grid
            .iter()
            .map(|&q| {
                let s = rho(model, q, gamma)?;
                let power = if gamma < 1.0 { s.rho * (1.0 - q * gamma) / (1.0 - gamma) } else { 0.0 };
                let fdr = if s.rho > 0.0 { q * gamma } else { 0.0 };
                Ok([q, power, fdr])
            })
            .collect::<Result<Vec<_>>>()?,
        FigureKind::BhsPowerBounds => {
            check_bhs_args(gamma, delta, 0.5)?;
            grid.iter()
                .map(|&x| {
                    check_bhs_args(gamma, delta, x)?;
                    let (b, _, _) = bhs_bounds_formula(model, gamma, delta, x)?;
                    Ok([x, b.power_lo, b.power_hi])
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(FigureTable { kind, rows })
}
