//! Alternative p-value laws, the null/alternative mixture and samplers.
//!
//! An [`AlternativeModel`] describes the distribution function `G` of the
//! p-values of false hypotheses. Together with a null fraction `γ` it defines
//! the mixture `H(t) = γ·t + (1−γ)·G(t)`. Nulls are uniform on `[0, 1]`,
//! either independent or coupled through a Gaussian copula.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{config_err, FdrError, Result};
use crate::procedures::PValueBatch;

/// A distribution function tabulated on the uniform grid `i/(n−1)`,
/// linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return config_err("tabulated cdf needs at least two grid values");
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return config_err("tabulated cdf values must lie in [0, 1]");
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return config_err("tabulated cdf values must be nondecreasing");
        }
        if values[values.len() - 1] != 1.0 {
            return config_err("tabulated cdf must end at 1");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn step(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    /// Grid abscissae `i/(n−1)`.
    pub fn knots(&self) -> Vec<f64> {
        let n = self.values.len() - 1;
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.values.len() - 1;
        ((t * n as f64).floor() as usize).min(n - 1)
    }

    fn cdf(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let n = (self.values.len() - 1) as f64;
        let frac = t * n - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        (a + (b - a) * frac).clamp(0.0, 1.0)
    }

    fn slope(&self, t: f64) -> f64 {
        let i = self.segment(t);
        (self.values[i + 1] - self.values[i]) / self.step()
    }

    fn quantile(&self, u: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < u);
        if k == 0 {
            return 0.0;
        }
        let k = k.min(self.values.len() - 1);
        let (a, b) = (self.values[k - 1], self.values[k]);
        let frac = ((u - a) / (b - a)).clamp(0.0, 1.0);
        ((k - 1) as f64 + frac) * self.step()
    }
}

/// Distribution function `G` of the alternative p-values, concentrated on
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeModel {
    /// Unit mass at `x0`.
    Degenerate { x0: f64 },
    /// `G(x) = x^alpha`, `alpha ∈ (0, 1)`.
    Power { alpha: f64 },
    /// `G(x) = p·x^alpha + (1−p)·x^beta` with `alpha < 1 < beta`.
    PowerMixture { p: f64, alpha: f64, beta: f64 },
    /// `x^alpha` below `x0`, jumping to 1 at `x0`.
    TruncatedPower { alpha: f64, x0: f64 },
    Tabulated(TabulatedCdf),
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        config_err(format!("{name} must lie in (0, 1), got {v}"))
    }
}

impl AlternativeModel {
    pub fn degenerate(x0: f64) -> Result<Self> {
        let m = Self::Degenerate { x0 };
        m.validate()?;
        Ok(m)
    }

    pub fn power(alpha: f64) -> Result<Self> {
        let m = Self::Power { alpha };
        m.validate()?;
        Ok(m)
    }

    pub fn power_mixture(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        let m = Self::PowerMixture { p, alpha, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn truncated_power(alpha: f64, x0: f64) -> Result<Self> {
        let m = Self::TruncatedPower { alpha, x0 };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedCdf::new(values)?))
    }

    /// Checks the family's parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Degenerate { x0 } => {
                if !(0.0..=1.0).contains(&x0) {
                    return config_err(format!("x0 must lie in [0, 1], got {x0}"));
                }
                Ok(())
            }
            Self::Power { alpha } => open_unit("alpha", alpha),
            Self::PowerMixture { p, alpha, beta } => {
                open_unit("p", p)?;
                open_unit("alpha", alpha)?;
                if !(beta.is_finite() && beta > 1.0) {
                    return config_err(format!("beta must exceed 1, got {beta}"));
                }
                Ok(())
            }
            Self::TruncatedPower { alpha, x0 } => {
                open_unit("alpha", alpha)?;
                open_unit("x0", x0)
            }
            Self::Tabulated(_) => Ok(()),
        }
    }

    /// `G(t)`; `0` below zero and `1` from one onwards.
    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self {
            Self::Degenerate { x0 } => {
                if t >= *x0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Power { alpha } => t.powf(*alpha),
            Self::PowerMixture { p, alpha, beta } => {
                p * t.powf(*alpha) + (1.0 - p) * t.powf(*beta)
            }
            Self::TruncatedPower { alpha, x0 } => {
                if t >= *x0 {
                    1.0
                } else {
                    t.powf(*alpha)
                }
            }
            Self::Tabulated(tab) => tab.cdf(t),
        }
    }

    /// Generalized inverse `min{t ∈ [0, 1] : G(t) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let u = u.min(1.0);
        match self {
            Self::Degenerate { x0 } => *x0,
            Self::Power { alpha } => u.powf(1.0 / alpha),
            Self::TruncatedPower { alpha, x0 } => u.powf(1.0 / alpha).min(*x0),
            Self::PowerMixture { .. } => {
                // cdf is continuous and strictly increasing: bisect to the last ulp.
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                loop {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break hi;
                    }
                    if self.cdf(mid) >= u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            Self::Tabulated(tab) => tab.quantile(u),
        }
    }

    /// Density `g(t)` on `(0, 1)`. Families with atoms have none.
    pub fn density(&self, t: f64) -> Result<f64> {
        match self {
            Self::Degenerate { .. } => Err(FdrError::Unsupported(
                "degenerate alternative has no density".into(),
            )),
            Self::TruncatedPower { .. } => Err(FdrError::Unsupported(
                "truncated power alternative has an atom at x0".into(),
            )),
            Self::Power { alpha } => Ok(alpha * t.powf(alpha - 1.0)),
            Self::PowerMixture { p, alpha, beta } => Ok(p * alpha * t.powf(alpha - 1.0)
                + (1.0 - p) * beta * t.powf(beta - 1.0)),
            Self::Tabulated(tab) => Ok(tab.slope(t)),
        }
    }

    /// Points where `G` jumps or changes formula.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Degenerate { x0 } | Self::TruncatedPower { x0, .. } => vec![*x0],
            Self::Tabulated(tab) => tab.knots(),
            Self::Power { .. } | Self::PowerMixture { .. } => Vec::new(),
        }
    }

    /// `G(t)/t` as `t ↓ 0`, i.e. the right derivative at zero when `G(0) = 0`.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            Self::Degenerate { x0 } => {
                if *x0 == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Self::Power { .. } | Self::PowerMixture { .. } | Self::TruncatedPower { .. } => {
                f64::INFINITY
            }
            Self::Tabulated(tab) => {
                if tab.values[0] > 0.0 {
                    f64::INFINITY
                } else {
                    tab.slope(0.0)
                }
            }
        }
    }

    /// Whether `G` is concave on `[0, 1]`.
    pub fn is_concave(&self) -> bool {
        match self {
            Self::Power { .. } => true,
            Self::Degenerate { x0 } => *x0 == 0.0,
            Self::Tabulated(tab) => {
                tab.values[0] == 0.0
                    && tab
                        .values
                        .windows(3)
                        .all(|w| w[2] - w[1] <= w[1] - w[0] + 1e-15)
            }
            Self::PowerMixture { .. } | Self::TruncatedPower { .. } => false,
        }
    }
}

fn parse_params(body: &str) -> Result<Vec<(String, String)>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| FdrError::Parse(format!("expected key=value, got '{kv}'")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn take_f64(params: &[(String, String)], key: &str) -> Result<f64> {
    let (_, v) = params
        .iter()
        .find(|(k, _)| k == key)
        .ok_or_else(|| FdrError::Parse(format!("missing parameter '{key}'")))?;
    v.parse::<f64>()
        .map_err(|_| FdrError::Parse(format!("parameter '{key}' is not a number: '{v}'")))
}

fn expect_keys(params: &[(String, String)], allowed: &[&str]) -> Result<()> {
    for (k, _) in params {
        if !allowed.contains(&k.as_str()) {
            return Err(FdrError::Parse(format!("unknown parameter '{k}'")));
        }
    }
    Ok(())
}

impl FromStr for AlternativeModel {
    type Err = FdrError;

    /// Parses `family:key=value,...`, case-insensitively, e.g.
    /// `power:alpha=0.1` or `powermix:p=0.5,alpha=0.5,beta=2`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (family, body) = lower.split_once(':').unwrap_or((lower.as_str(), ""));
        let params = parse_params(body)?;
        let model = match family.trim() {
            "degenerate" => {
                expect_keys(&params, &["x0"])?;
                Self::Degenerate { x0: take_f64(&params, "x0")? }
            }
            "power" => {
                expect_keys(&params, &["alpha"])?;
                Self::Power { alpha: take_f64(&params, "alpha")? }
            }
            "powermix" | "powermixture" => {
                expect_keys(&params, &["p", "alpha", "beta"])?;
                Self::PowerMixture {
                    p: take_f64(&params, "p")?,
                    alpha: take_f64(&params, "alpha")?,
                    beta: take_f64(&params, "beta")?,
                }
            }
            "truncpower" | "truncatedpower" => {
                expect_keys(&params, &["alpha", "x0"])?;
                Self::TruncatedPower {
                    alpha: take_f64(&params, "alpha")?,
                    x0: take_f64(&params, "x0")?,
                }
            }
            "tabulated" => {
                expect_keys(&params, &["values"])?;
                let (_, raw) = params
                    .iter()
                    .find(|(k, _)| k == "values")
                    .ok_or_else(|| FdrError::Parse("missing parameter 'values'".into()))?;
                let values = raw
                    .split(';')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| FdrError::Parse(format!("bad tabulated value '{v}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::Tabulated(TabulatedCdf::new(values)?)
            }
            other => return Err(FdrError::Parse(format!("unknown family '{other}'"))),
        };
        model.validate()?;
        Ok(model)
    }
}

impl fmt::Display for AlternativeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Degenerate { x0 } => write!(f, "degenerate:x0={x0}"),
            Self::Power { alpha } => write!(f, "power:alpha={alpha}"),
            Self::PowerMixture { p, alpha, beta } => {
                write!(f, "powermix:p={p},alpha={alpha},beta={beta}")
            }
            Self::TruncatedPower { alpha, x0 } => write!(f, "truncpower:alpha={alpha},x0={x0}"),
            Self::Tabulated(tab) => {
                let joined: Vec<String> = tab.values.iter().map(|v| v.to_string()).collect();
                write!(f, "tabulated:values={}", joined.join(";"))
            }
        }
    }
}

impl Serialize for AlternativeModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlternativeModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the null p-values depend on each other. Every variant has uniform
/// marginals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DependenceModel {
    #[default]
    Independent,
    /// Gaussian copula with a single shared latent factor; conditionally
    /// i.i.d. given that factor.
    Equicorrelated { rho: f64 },
    /// Gaussian AR(1) copula with coefficient `phi`.
    Ar1Copula { phi: f64 },
}

impl DependenceModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Independent => Ok(()),
            Self::Equicorrelated { rho } => {
                if rho.is_finite() && (0.0..1.0).contains(&rho) {
                    Ok(())
                } else {
                    config_err(format!("equicorrelation must lie in [0, 1), got {rho}"))
                }
            }
            Self::Ar1Copula { phi } => {
                if phi.is_finite() && phi > -1.0 && phi < 1.0 {
                    Ok(())
                } else {
                    config_err(format!("AR(1) coefficient must lie in (-1, 1), got {phi}"))
                }
            }
        }
    }

    pub fn is_independent(&self) -> bool {
        matches!(self, Self::Independent)
    }
}

impl FromStr for DependenceModel {
    type Err = FdrError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (kind, body) = lower.split_once(':').unwrap_or((lower.as_str(), ""));
        let params = parse_params(body)?;
        let model = match kind.trim() {
            "independent" | "iid" => {
                expect_keys(&params, &[])?;
                Self::Independent
            }
            "equicorrelated" | "equicorr" => {
                expect_keys(&params, &["rho"])?;
                Self::Equicorrelated { rho: take_f64(&params, "rho")? }
            }
            "ar1" | "ar1copula" => {
                expect_keys(&params, &["phi"])?;
                Self::Ar1Copula { phi: take_f64(&params, "phi")? }
            }
            other => return Err(FdrError::Parse(format!("unknown dependence model '{other}'"))),
        };
        model.validate()?;
        Ok(model)
    }
}

impl fmt::Display for DependenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Independent => write!(f, "independent"),
            Self::Equicorrelated { rho } => write!(f, "equicorrelated:rho={rho}"),
            Self::Ar1Copula { phi } => write!(f, "ar1:phi={phi}"),
        }
    }
}

impl Serialize for DependenceModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DependenceModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `m` p-values of which `m0 = round(γ·m)` are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub gamma: f64,
    pub alt: AlternativeModel,
    #[serde(default)]
    pub null_dependence: DependenceModel,
    pub m: usize,
}

impl MixtureSpec {
    pub fn new(gamma: f64, alt: AlternativeModel, null_dependence: DependenceModel, m: usize) -> Result<Self> {
        let spec = Self { gamma, alt, null_dependence, m };
        spec.validate()?;
        Ok(spec)
    }

    /// Independent nulls.
    pub fn independent(gamma: f64, alt: AlternativeModel, m: usize) -> Result<Self> {
        Self::new(gamma, alt, DependenceModel::Independent, m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && (0.0..=1.0).contains(&self.gamma)) {
            return config_err(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.m == 0 {
            return config_err("m must be positive");
        }
        self.alt.validate()?;
        self.null_dependence.validate()
    }

    pub fn m0(&self) -> usize {
        ((self.gamma * self.m as f64).round() as usize).min(self.m)
    }

    pub fn m1(&self) -> usize {
        self.m - self.m0()
    }

    /// `m0/m`, the null fraction actually realised after rounding.
    pub fn effective_gamma(&self) -> f64 {
        self.m0() as f64 / self.m as f64
    }
}

/// `H(t) = γ·t + (1−γ)·G(t)` at the nominal `γ`.
pub fn mixture_cdf(spec: &MixtureSpec, t: f64) -> f64 {
    let u = t.clamp(0.0, 1.0);
    spec.gamma * u + (1.0 - spec.gamma) * spec.alt.cdf(t)
}

/// `h(t) = γ + (1−γ)·g(t)` on `(0, 1)`.
pub fn mixture_density(spec: &MixtureSpec, t: f64) -> Result<f64> {
    if spec.gamma == 1.0 {
        return Ok(1.0);
    }
    Ok(spec.gamma + (1.0 - spec.gamma) * spec.alt.density(t)?)
}

/// Independent random stream for replicate `index` under base `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Draws `n` null p-values with uniform marginals.
pub fn sample_nulls(n: usize, dep: DependenceModel, seed: u64) -> Vec<f64> {
    sample_nulls_with(&mut replicate_rng(seed, 0), n, dep)
}

pub fn sample_nulls_with<R: Rng + ?Sized>(rng: &mut R, n: usize, dep: DependenceModel) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    sample_nulls_into(rng, n, dep, &mut out);
    out
}

pub(crate) fn sample_nulls_into<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dep: DependenceModel,
    out: &mut Vec<f64>,
) {
    match dep {
        DependenceModel::Independent => {
            out.extend((0..n).map(|_| rng.sample::<f64, _>(Open01)));
        }
        DependenceModel::Equicorrelated { rho } => {
            let shared: f64 = rng.sample(StandardNormal);
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            out.extend((0..n).map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                std_normal_cdf(a * shared + b * e)
            }));
        }
        DependenceModel::Ar1Copula { phi } => {
            let innov = (1.0 - phi * phi).sqrt();
            let mut z: f64 = rng.sample(StandardNormal);
            for i in 0..n {
                if i > 0 {
                    let e: f64 = rng.sample(StandardNormal);
                    z = phi * z + innov * e;
                }
                out.push(std_normal_cdf(z));
            }
        }
    }
}

/// Draws a labelled batch: the first `m0` entries are nulls, the rest are
/// i.i.d. draws from `G` by inverse transform.
pub fn sample_mixture(spec: &MixtureSpec, seed: u64) -> PValueBatch {
    sample_mixture_with(&mut replicate_rng(seed, 0), spec)
}

pub fn sample_mixture_with<R: Rng + ?Sized>(rng: &mut R, spec: &MixtureSpec) -> PValueBatch {
    let mut values = Vec::with_capacity(spec.m);
    fill_mixture(rng, spec, &mut values);
    let m0 = spec.m0();
    let labels = (0..spec.m).map(|i| i < m0).collect();
    PValueBatch::from_parts_unchecked(values, Some(labels))
}

/// Nulls then alternatives, written into `out`.
pub(crate) fn fill_mixture<R: Rng + ?Sized>(rng: &mut R, spec: &MixtureSpec, out: &mut Vec<f64>) {
    out.clear();
    let m0 = spec.m0();
    sample_nulls_into(rng, m0, spec.null_dependence, out);
    for _ in m0..spec.m {
        // u in (0, 1] so that atoms are hit with their full mass.
        let u = 1.0 - rng.random::<f64>();
        out.push(spec.alt.quantile(u));
    }
}

/// `sup_t |F_n(t) − t|` for the empirical distribution of `values`.
pub fn sup_distance_to_uniform(values: &[f64]) -> f64 {
    sup_distance_to(values, |t| t.clamp(0.0, 1.0))
}

/// `sup_t |F_n(t) − F(t)|` for a continuous reference `F`.
pub fn sup_distance_to(values: &[f64], reference: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = reference(v);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
