//! Confidence intervals for the variance components.
//!
//! Approximate (normal-theory) intervals work from the ANOVA mean squares:
//! an exact chi-square interval for σ²_r, Moriguchi's limits for σ²_L and a
//! Satterthwaite interval for σ²_R. Bootstrap intervals (normal,
//! percentile, BCa) work from a replicate cloud.
//!
//! Quantile orientation: `χ²_{ν,p}` below is the lower-tail `p` quantile,
//! so the chi-square and Satterthwaite intervals divide by the `1 − α/2`
//! quantile for the lower limit. For Moriguchi's limits, `F_L` is the
//! upper `α/2` point of `F(φ_A, ∞)` (lower-tail `1 − α/2`) and `F_U` the
//! upper `1 − α/2` point; this is the orientation that puts the lower
//! limit below the upper one.
//!
//! Order statistics use the 1-based index `⌈q·M⌉`, clamped to `[1, M]`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dist::{self, Df2};
use crate::error::{check_probability, Error, Result};
use crate::model::{anova_estimates, AnovaSums, Component, PerComponent};
use crate::resampling::{BootstrapDistribution, EstimatorView};

pub use crate::resampling::Flavor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IntervalMethod {
    ApproxChi2,
    ApproxMoriguchi,
    ApproxSatterthwaite,
    BootNormal,
    BootPercentile,
    BootBCa,
}

/// Bootstrap interval constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BootMethod {
    Normal,
    Percentile,
    BCa,
}

impl BootMethod {
    pub const ALL: [BootMethod; 3] = [BootMethod::Normal, BootMethod::Percentile, BootMethod::BCa];

    /// One-letter tag (N, P, B).
    pub fn label(self) -> &'static str {
        match self {
            BootMethod::Normal => "N",
            BootMethod::Percentile => "P",
            BootMethod::BCa => "B",
        }
    }

    pub fn interval_method(self) -> IntervalMethod {
        match self {
            BootMethod::Normal => IntervalMethod::BootNormal,
            BootMethod::Percentile => IntervalMethod::BootPercentile,
            BootMethod::BCa => IntervalMethod::BootBCa,
        }
    }
}

impl fmt::Display for BootMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BootMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "normal" => Ok(BootMethod::Normal),
            "p" | "percentile" => Ok(BootMethod::Percentile),
            "b" | "bca" => Ok(BootMethod::BCa),
            _ => Err(Error::config(format!("unknown bootstrap interval method `{s}`"))),
        }
    }
}

/// Conditions worth reporting that did not prevent an interval from being
/// formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IntervalFlag {
    /// The computed lower limit exceeds the upper one; endpoints are left
    /// as computed.
    Inverted,
    /// No (or every) replicate fell at or below the estimate, so the BCa
    /// count was clamped to `[1, M − 1]` before Φ⁻¹.
    BcaCountClamped,
    /// All replicates were equal; the interval collapsed to a point.
    DegenerateReplicates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub method: IntervalMethod,
    pub alpha: f64,
    pub flag: Option<IntervalFlag>,
}

impl Interval {
    fn new(lower: f64, upper: f64, method: IntervalMethod, alpha: f64) -> Self {
        let flag = (lower > upper).then_some(IntervalFlag::Inverted);
        Self {
            lower,
            upper,
            method,
            alpha,
            flag,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    fn scaled(self, factor: f64) -> Self {
        Self {
            lower: self.lower * factor,
            upper: self.upper * factor,
            ..self
        }
    }
}

/// Exact interval for σ²_r: `[SSE/χ²_{φ_E,1−α/2}, SSE/χ²_{φ_E,α/2}]`.
pub fn chi2_interval_sigma_r(sums: &AnovaSums, alpha: f64) -> Result<Interval> {
    check_probability(alpha)?;
    let df = sums.phi_e as f64;
    let hi = dist::chi_square_quantile(df, 1.0 - alpha / 2.0)?;
    let lo = dist::chi_square_quantile(df, alpha / 2.0)?;
    Ok(Interval::new(
        sums.sse / hi,
        sums.sse / lo,
        IntervalMethod::ApproxChi2,
        alpha,
    ))
}

/// F quantiles and quadratic correction coefficients of Moriguchi's
/// limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoriguchiTerms {
    /// Upper α/2 point of F(φ_A, ∞).
    pub f_lower: f64,
    /// Upper 1 − α/2 point of F(φ_A, ∞).
    pub f_upper: f64,
    pub b_lower: f64,
    pub b_upper: f64,
}

impl MoriguchiTerms {
    pub fn new(phi_a: usize, phi_e: usize, alpha: f64) -> Result<Self> {
        check_probability(alpha)?;
        let pa = phi_a as f64;
        let pe = phi_e as f64;
        let f_lower = dist::f_quantile(pa, Df2::Infinite, 1.0 - alpha / 2.0)?;
        let f_upper = dist::f_quantile(pa, Df2::Infinite, alpha / 2.0)?;
        let b_lower = f_lower / pe * (pa * f_lower / 2.0 - (pa - 2.0) / 2.0);
        let b_upper = f_upper / pe * ((pa - 2.0) / 2.0 - pa * f_upper / 2.0);
        Ok(Self {
            f_lower,
            f_upper,
            b_lower,
            b_upper,
        })
    }
}

/// Moriguchi's approximate limits for σ²_L:
///
/// ```text
/// lower = MSA/n · [1/F_L − q − b_L q²]
/// upper = MSA/n · [1/F_U − q + b_U q²],   q = MSE/MSA
/// ```
///
/// The lower limit may be negative and is reported as is.
pub fn moriguchi_interval_sigma_l(sums: &AnovaSums, n: usize, alpha: f64) -> Result<Interval> {
    if sums.msa.is_nan() || sums.msa <= 0.0 {
        return Err(Error::numeric("Moriguchi interval requires MSA > 0"));
    }
    let t = MoriguchiTerms::new(sums.phi_a, sums.phi_e, alpha)?;
    let q = sums.mse / sums.msa;
    let scale = sums.msa / n as f64;
    let lower = scale * (1.0 / t.f_lower - q - t.b_lower * q * q);
    let upper = scale * (1.0 / t.f_upper - q + t.b_upper * q * q);
    Ok(Interval::new(lower, upper, IntervalMethod::ApproxMoriguchi, alpha))
}

/// Satterthwaite effective degrees of freedom for σ̂²_R:
/// `φ* = [MSA + (n−1)MSE]² / (MSA²/φ_A + (n−1)²MSE²/φ_E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatterthwaiteDf {
    pub phi_star: f64,
}

impl SatterthwaiteDf {
    pub fn new(sums: &AnovaSums, n: usize) -> Result<Self> {
        let n1 = n as f64 - 1.0;
        let num = (sums.msa + n1 * sums.mse).powi(2);
        let den = sums.msa.powi(2) / sums.phi_a as f64
            + n1 * n1 * sums.mse.powi(2) / sums.phi_e as f64;
        let phi_star = num / den;
        if phi_star.is_finite() && phi_star > 0.0 {
            Ok(Self { phi_star })
        } else {
            Err(Error::numeric(format!(
                "Satterthwaite degrees of freedom undefined ({phi_star})"
            )))
        }
    }
}

/// Satterthwaite interval for σ²_R:
/// `[φ*σ̂²_R/χ²_{φ*,1−α/2}, φ*σ̂²_R/χ²_{φ*,α/2}]` with non-integer φ*.
pub fn satterthwaite_interval_sigma_rr(
    sums: &AnovaSums,
    n: usize,
    alpha: f64,
) -> Result<Interval> {
    check_probability(alpha)?;
    let reproducibility = anova_estimates(sums, n).reproducibility();
    if reproducibility.is_nan() || reproducibility <= 0.0 {
        return Err(Error::numeric(
            "Satterthwaite interval requires a positive reproducibility estimate",
        ));
    }
    let df = SatterthwaiteDf::new(sums, n)?.phi_star;
    let scaled = df * reproducibility;
    let hi = dist::chi_square_quantile(df, 1.0 - alpha / 2.0)?;
    let lo = dist::chi_square_quantile(df, alpha / 2.0)?;
    Ok(Interval::new(
        scaled / hi,
        scaled / lo,
        IntervalMethod::ApproxSatterthwaite,
        alpha,
    ))
}

/// The three approximate intervals, one per component.
pub fn approximate_intervals(
    sums: &AnovaSums,
    alpha: f64,
) -> PerComponent<Result<Interval>> {
    PerComponent {
        repeatability: chi2_interval_sigma_r(sums, alpha),
        between_lab: moriguchi_interval_sigma_l(sums, sums.n, alpha),
        reproducibility: satterthwaite_interval_sigma_rr(sums, sums.n, alpha),
    }
}

/// Wald-type interval `center ± z_{1−α/2}·se`.
pub fn normal_interval(center: f64, se: f64, alpha: f64) -> Result<Interval> {
    check_probability(alpha)?;
    if se.is_nan() || se < 0.0 {
        return Err(Error::numeric(format!("standard error must be nonnegative, got {se}")));
    }
    let z = dist::normal_quantile(1.0 - alpha / 2.0)?;
    Ok(Interval::new(
        center - z * se,
        center + z * se,
        IntervalMethod::BootNormal,
        alpha,
    ))
}

/// 1-based order statistic `⌈q·M⌉` of sorted values, clamped to `[1, M]`.
fn order_statistic(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let pos = q * m as f64;
    // Absorb representation error so e.g. 0.025·1000 is exactly 25.
    let nearest = pos.round();
    let rank = if (pos - nearest).abs() < 1e-9 {
        nearest
    } else {
        pos.ceil()
    };
    let rank = if rank.is_nan() { 1.0 } else { rank.clamp(1.0, m as f64) };
    sorted[rank as usize - 1]
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_replicates(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::config("at least 2 bootstrap replicates are required"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite bootstrap replicate"));
    }
    Ok(())
}

/// Percentile interval `[θ*_(α/2), θ*_(1−α/2)]`.
pub fn percentile_interval(replicates: &[f64], alpha: f64) -> Result<Interval> {
    check_probability(alpha)?;
    check_replicates(replicates)?;
    Ok(percentile_sorted(&sorted_copy(replicates), alpha))
}

fn percentile_sorted(sorted: &[f64], alpha: f64) -> Interval {
    Interval::new(
        order_statistic(sorted, alpha / 2.0),
        order_statistic(sorted, 1.0 - alpha / 2.0),
        IntervalMethod::BootPercentile,
        alpha,
    )
}

/// Bias-correction and acceleration of a BCa interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcaParams {
    pub z0: f64,
    pub a: f64,
    pub count_clamped: bool,
}

impl BcaParams {
    /// `ẑ₀ = Φ⁻¹(#{θ*_m ≤ θ̂}/M)` and
    /// `â = Σ(θ*_m − θ̄*)³ / (6 [Σ(θ*_m − θ̄*)²]^{3/2})`.
    ///
    /// Returns `None` when every replicate is equal.
    pub fn estimate(replicates: &[f64], origin: f64) -> Result<Option<Self>> {
        check_replicates(replicates)?;
        let m = replicates.len();
        let mean = replicates.iter().sum::<f64>() / m as f64;
        let (mut s2, mut s3) = (0.0, 0.0);
        for &x in replicates {
            let d = x - mean;
            s2 += d * d;
            s3 += d * d * d;
        }
        if s2 == 0.0 {
            return Ok(None);
        }
        let a = s3 / (6.0 * s2.powf(1.5));
        let count = replicates.iter().filter(|&&x| x <= origin).count();
        let clamped_count = count.clamp(1, m - 1);
        let z0 = dist::normal_quantile(clamped_count as f64 / m as f64)?;
        Ok(Some(Self {
            z0,
            a,
            count_clamped: clamped_count != count,
        }))
    }

    /// Adjusted probability level `Φ(z₀ + (z₀ + z)/(1 − a(z₀ + z)))` for
    /// the nominal normal quantile `z`.
    pub fn level(&self, z: f64) -> f64 {
        let s = self.z0 + z;
        let denom = 1.0 - self.a * s;
        if denom <= 0.0 {
            // The correction has run off the end of the distribution.
            return if s > 0.0 { 1.0 } else { 0.0 };
        }
        dist::normal_cdf(self.z0 + s / denom)
    }
}

/// BCa interval around `origin`.
pub fn bca_interval(replicates: &[f64], origin: f64, alpha: f64) -> Result<Interval> {
    check_probability(alpha)?;
    check_replicates(replicates)?;
    let sorted = sorted_copy(replicates);
    bca_sorted(replicates, &sorted, origin, alpha)
}

fn bca_sorted(replicates: &[f64], sorted: &[f64], origin: f64, alpha: f64) -> Result<Interval> {
    let Some(params) = BcaParams::estimate(replicates, origin)? else {
        let c = sorted[0];
        let mut iv = Interval::new(c, c, IntervalMethod::BootBCa, alpha);
        iv.flag = Some(IntervalFlag::DegenerateReplicates);
        return Ok(iv);
    };
    let z_lo = dist::normal_quantile(alpha / 2.0)?;
    let z_hi = dist::normal_quantile(1.0 - alpha / 2.0)?;
    let mut iv = Interval::new(
        order_statistic(sorted, params.level(z_lo)),
        order_statistic(sorted, params.level(z_hi)),
        IntervalMethod::BootBCa,
        alpha,
    );
    if params.count_clamped && iv.flag.is_none() {
        iv.flag = Some(IntervalFlag::BcaCountClamped);
    }
    Ok(iv)
}

/// Intervals for every component of one estimator view.
///
/// Normal intervals are centered on the view's point estimate with the
/// view's SE; BCa uses the point estimate as the reference value in ẑ₀.
pub fn view_intervals(
    view: &EstimatorView<'_>,
    methods: &[BootMethod],
    alpha: f64,
) -> Result<Vec<(BootMethod, PerComponent<Interval>)>> {
    check_probability(alpha)?;
    let mut out: Vec<(BootMethod, PerComponent<Interval>)> = Vec::with_capacity(methods.len());
    let mut per_component: Vec<Vec<Interval>> = Vec::with_capacity(3);
    for c in Component::ALL {
        let values: Vec<f64> = view.replicates.iter().map(|v| v.get(c)).collect();
        check_replicates(&values)?;
        let sorted = sorted_copy(&values);
        let center = view.center.get(c);
        let mut ivs = Vec::with_capacity(methods.len());
        for &method in methods {
            ivs.push(match method {
                BootMethod::Normal => normal_interval(center, *view.se.get(c), alpha)?,
                BootMethod::Percentile => percentile_sorted(&sorted, alpha),
                BootMethod::BCa => bca_sorted(&values, &sorted, center, alpha)?,
            });
        }
        per_component.push(ivs);
    }
    for (i, &method) in methods.iter().enumerate() {
        out.push((
            method,
            PerComponent {
                repeatability: per_component[0][i],
                between_lab: per_component[1][i],
                reproducibility: per_component[2][i],
            },
        ));
    }
    Ok(out)
}

/// One bootstrap interval per component for an estimator flavor.
///
/// `RawMean` uses the replicates as they are; `Adjusted` maps the center
/// and every replicate through the scheme's adjustment first. Intervals
/// are not defined for the bias-corrected flavor.
pub fn bootstrap_interval_suite(
    dist: &BootstrapDistribution,
    flavor: Flavor,
    method: BootMethod,
    alpha: f64,
) -> Result<PerComponent<Interval>> {
    if flavor == Flavor::BiasCorrected {
        return Err(Error::config(
            "bootstrap intervals are defined for the mean and adjusted flavors only",
        ));
    }
    let view = dist.view(flavor)?;
    let mut all = view_intervals(&view, &[method], alpha)?;
    Ok(all.remove(0).1)
}

/// Scales every endpoint; used for presenting variances in other units.
pub fn scale_intervals(ivs: PerComponent<Interval>, factor: f64) -> PerComponent<Interval> {
    ivs.map(|iv| iv.scaled(factor))
}
