//! Full analysis of one dataset: ANOVA benchmark, approximate intervals,
//! and every selected bootstrap scheme with its point estimators and
//! intervals.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::intervals::{self, BootMethod, Interval, IntervalFlag, IntervalMethod};
use crate::model::{
    self, AnovaStandardErrors, AnovaSums, Component, Dataset, PerComponent, SeTriple,
    VarianceComponents,
};
use crate::resampling::{self, Flavor, Scheme};
use crate::rng::SeedSpec;

/// Selectable interval constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CiMethod {
    Chi2,
    Moriguchi,
    Satterthwaite,
    Boot(BootMethod),
}

impl CiMethod {
    pub const ALL: [CiMethod; 6] = [
        CiMethod::Chi2,
        CiMethod::Moriguchi,
        CiMethod::Satterthwaite,
        CiMethod::Boot(BootMethod::Normal),
        CiMethod::Boot(BootMethod::Percentile),
        CiMethod::Boot(BootMethod::BCa),
    ];

    /// The approximate method that applies to `component`.
    pub fn approx_for(component: Component) -> CiMethod {
        match component {
            Component::Repeatability => CiMethod::Chi2,
            Component::BetweenLab => CiMethod::Moriguchi,
            Component::Reproducibility => CiMethod::Satterthwaite,
        }
    }

    /// Parses a comma-separated list; `approx` expands to the three
    /// approximate methods and `boot` to the three bootstrap ones.
    pub fn parse_list(s: &str) -> Result<Vec<CiMethod>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let expanded: &[CiMethod] = match item.to_ascii_lowercase().as_str() {
                "all" => &CiMethod::ALL,
                "approx" => &CiMethod::ALL[..3],
                "boot" => &CiMethod::ALL[3..],
                _ => &[item.parse::<CiMethod>()?],
            };
            for m in expanded {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::config("no interval method selected"));
        }
        Ok(out)
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CiMethod::Chi2 => f.write_str("chi2"),
            CiMethod::Moriguchi => f.write_str("moriguchi"),
            CiMethod::Satterthwaite => f.write_str("satterthwaite"),
            CiMethod::Boot(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chi2" | "chisq" | "chi-square" => Ok(CiMethod::Chi2),
            "moriguchi" => Ok(CiMethod::Moriguchi),
            "satterthwaite" => Ok(CiMethod::Satterthwaite),
            other => other
                .parse::<BootMethod>()
                .map(CiMethod::Boot)
                .map_err(|_| Error::config(format!("unknown interval method `{s}`"))),
        }
    }
}

/// Parses a comma-separated list of items with `all` as a wildcard.
pub fn parse_list<T: FromStr<Err = Error> + PartialEq + Copy>(s: &str, all: &[T]) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            for v in all {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        } else {
            let v = item.parse::<T>()?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::config(format!("empty selection `{s}`")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub m_boot: usize,
    pub schemes: Vec<Scheme>,
    pub flavors: Vec<Flavor>,
    pub ci_methods: Vec<CiMethod>,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            m_boot: 1000,
            schemes: Scheme::ALL.to_vec(),
            flavors: vec![Flavor::RawMean, Flavor::BiasCorrected, Flavor::Adjusted],
            ci_methods: CiMethod::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        check_probability(self.alpha)?;
        if self.m_boot < 2 && !self.schemes.is_empty() {
            return Err(Error::config("bootstrap replicate count must be at least 2"));
        }
        Ok(())
    }

    fn boot_methods(&self) -> Vec<BootMethod> {
        self.ci_methods
            .iter()
            .filter_map(|m| match m {
                CiMethod::Boot(b) => Some(*b),
                _ => None,
            })
            .collect()
    }
}

/// Bootstrap intervals for one flavor and method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootIntervals {
    pub flavor: Flavor,
    pub method: BootMethod,
    pub intervals: PerComponent<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub means: VarianceComponents,
    pub ses: SeTriple,
    pub bias_corrected: VarianceComponents,
    pub adjusted: VarianceComponents,
    pub adjusted_ses: SeTriple,
    pub intervals: Vec<BootIntervals>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub m_boot: usize,
    pub seed: u64,
    pub sums: AnovaSums,
    pub anova: VarianceComponents,
    pub anova_se: AnovaStandardErrors,
    /// Approximate intervals; `None` where unselected or not computable.
    pub approx: PerComponent<Option<Interval>>,
    pub schemes: Vec<SchemeResult>,
    pub warnings: Vec<String>,
}

/// Bootstrap stream for `scheme`: replicate `t` draws from
/// `SeedSpec::new(seed, scheme.id()).child(t)`.
pub fn scheme_seed(seed: u64, scheme: Scheme) -> SeedSpec {
    SeedSpec::new(seed, scheme.id())
}

pub fn analyze(dataset: &Dataset, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let (k, n) = (dataset.k(), dataset.n());
    let sums = model::compute_sums(dataset)?;
    let anova = model::anova_estimates(&sums, n);
    let anova_se = model::anova_standard_errors(&anova, k, n);
    let mut warnings = Vec::new();
    if anova_se.reproducibility_clamped {
        warnings.push("SE of the reproducibility variance: negative radicand clamped to 0".into());
    }

    let all_approx = intervals::approximate_intervals(&sums, config.alpha);
    let approx = PerComponent::from_fn(|c| {
        if !config.ci_methods.contains(&CiMethod::approx_for(c)) {
            return None;
        }
        match all_approx.get(c) {
            Ok(iv) => {
                note_flag(&mut warnings, &format!("{} approximate interval", c.label()), iv);
                Some(*iv)
            }
            Err(e) => {
                warnings.push(format!("{} approximate interval not computed: {e}", c.label()));
                None
            }
        }
    });

    let methods = config.boot_methods();
    let mut schemes = Vec::with_capacity(config.schemes.len());
    for &scheme in &config.schemes {
        let dist = resampling::run_bootstrap(dataset, scheme, config.m_boot, scheme_seed(config.seed, scheme))?;
        let adjusted_view = dist.view(Flavor::Adjusted)?;
        let mut ivs = Vec::new();
        for &flavor in &config.flavors {
            if flavor == Flavor::BiasCorrected || methods.is_empty() {
                continue;
            }
            let view = if flavor == Flavor::Adjusted {
                adjusted_view.clone()
            } else {
                dist.view(flavor)?
            };
            for (method, intervals) in intervals::view_intervals(&view, &methods, config.alpha)? {
                for c in Component::ALL {
                    note_flag(
                        &mut warnings,
                        &format!("{scheme} {flavor} {method} interval for {}", c.label()),
                        intervals.get(c),
                    );
                }
                ivs.push(BootIntervals {
                    flavor,
                    method,
                    intervals,
                });
            }
        }
        schemes.push(SchemeResult {
            scheme,
            means: dist.means,
            ses: dist.ses,
            bias_corrected: resampling::bias_corrected(&dist),
            adjusted: adjusted_view.center,
            adjusted_ses: adjusted_view.se,
            intervals: ivs,
        });
    }

    Ok(Analysis {
        k,
        n,
        alpha: config.alpha,
        m_boot: config.m_boot,
        seed: config.seed,
        sums,
        anova,
        anova_se,
        approx,
        schemes,
        warnings,
    })
}

fn note_flag(warnings: &mut Vec<String>, what: &str, iv: &Interval) {
    let msg = match iv.flag {
        None => return,
        Some(IntervalFlag::Inverted) => "lower limit exceeds upper limit",
        Some(IntervalFlag::BcaCountClamped) => {
            "no replicate on one side of the estimate; bias-correction count clamped"
        }
        Some(IntervalFlag::DegenerateReplicates) => "all replicates equal; interval is a point",
    };
    warnings.push(format!("{what}: {msg}"));
}

/// Method tag used when labelling approximate intervals.
pub fn approx_method(component: Component) -> IntervalMethod {
    match component {
        Component::Repeatability => IntervalMethod::ApproxChi2,
        Component::BetweenLab => IntervalMethod::ApproxMoriguchi,
        Component::Reproducibility => IntervalMethod::ApproxSatterthwaite,
    }
}
