//! Bootstrap resampling of balanced interlaboratory data.
//!
//! Five schemes are supported. They differ in which index is redrawn and
//! whether the within-laboratory draw is shared across laboratories:
//!
//! | scheme      | laboratories        | replicates within a laboratory                  |
//! |-------------|---------------------|-------------------------------------------------|
//! | `boot-i`    | drawn with replacement | kept intact                                  |
//! | `boot-j_s`  | fixed               | one index vector, shared by every laboratory    |
//! | `boot-j_r`  | fixed               | a fresh index vector per laboratory             |
//! | `boot-ij_r` | drawn with replacement | a fresh index vector per selected laboratory |
//! | `boot-ij_s` | drawn with replacement | one index vector, shared                     |
//!
//! Draw order inside one resample is fixed: the laboratory indices (when
//! redrawn) come first, then the replicate indices, laboratory by
//! laboratory.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, Dataset, SeTriple, VarianceComponents};
use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scheme {
    /// Laboratory-level resampling.
    BootI,
    /// Within-laboratory resampling with one index vector shared by all
    /// laboratories.
    BootJSingle,
    /// Within-laboratory resampling, independently per laboratory.
    BootJRepeated,
    /// Two-stage: laboratories, then replicates within each selected one.
    BootIJRepeated,
    /// Laboratories and one shared replicate index vector.
    BootIJSingle,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::BootI,
        Scheme::BootJRepeated,
        Scheme::BootJSingle,
        Scheme::BootIJRepeated,
        Scheme::BootIJSingle,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::BootI => "boot-i",
            Scheme::BootJSingle => "boot-j_s",
            Scheme::BootJRepeated => "boot-j_r",
            Scheme::BootIJRepeated => "boot-ij_r",
            Scheme::BootIJSingle => "boot-ij_s",
        }
    }

    /// Stable small integer used to separate random streams per scheme.
    pub fn id(self) -> u64 {
        match self {
            Scheme::BootI => 0,
            Scheme::BootJSingle => 1,
            Scheme::BootJRepeated => 2,
            Scheme::BootIJRepeated => 3,
            Scheme::BootIJSingle => 4,
        }
    }

    fn resamples_labs(self) -> bool {
        matches!(
            self,
            Scheme::BootI | Scheme::BootIJRepeated | Scheme::BootIJSingle
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let key = key.strip_prefix("boot_").unwrap_or(&key);
        match key {
            "i" => Ok(Scheme::BootI),
            "j_s" | "js" | "j" => Ok(Scheme::BootJSingle),
            "j_r" | "jr" => Ok(Scheme::BootJRepeated),
            "ij_r" | "ijr" => Ok(Scheme::BootIJRepeated),
            "ij_s" | "ijs" | "ij" => Ok(Scheme::BootIJSingle),
            _ => Err(Error::config(format!("unknown resampling scheme `{s}`"))),
        }
    }
}

/// Which point estimator a bootstrap summary reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Flavor {
    /// Bootstrap mean θ̄*.
    RawMean,
    /// 2θ̂ − θ̄*.
    BiasCorrected,
    /// Scheme-specific linear adjustment of θ̄*.
    Adjusted,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::RawMean, Flavor::BiasCorrected, Flavor::Adjusted];

    pub fn label(self) -> &'static str {
        match self {
            Flavor::RawMean => "mean",
            Flavor::BiasCorrected => "cor",
            Flavor::Adjusted => "ad",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mean" | "raw" | "rawmean" => Ok(Flavor::RawMean),
            "cor" | "biascorrected" | "corrected" => Ok(Flavor::BiasCorrected),
            "ad" | "adj" | "adjusted" => Ok(Flavor::Adjusted),
            _ => Err(Error::config(format!("unknown estimator flavor `{s}`"))),
        }
    }
}

/// Draws one bootstrap resample of `dataset`.
pub fn resample_once(dataset: &Dataset, scheme: Scheme, seed: SeedSpec) -> Dataset {
    let mut rng = seed.rng();
    let mut scratch = Scratch::new(dataset.k(), dataset.n());
    let mut out = vec![0.0; dataset.values().len()];
    resample_into(dataset, scheme, &mut rng, &mut scratch, &mut out);
    Dataset::from_parts_unchecked(dataset.k(), dataset.n(), out)
}

struct Scratch {
    labs: Vec<usize>,
    reps: Vec<usize>,
}

impl Scratch {
    fn new(k: usize, n: usize) -> Self {
        Self {
            labs: Vec::with_capacity(k),
            reps: Vec::with_capacity(n),
        }
    }
}

fn resample_into<R: RngExt + ?Sized>(
    dataset: &Dataset,
    scheme: Scheme,
    rng: &mut R,
    scratch: &mut Scratch,
    out: &mut [f64],
) {
    let k = dataset.k();
    let n = dataset.n();
    scratch.labs.clear();
    if scheme.resamples_labs() {
        scratch.labs.extend((0..k).map(|_| rng.random_range(0..k)));
    } else {
        scratch.labs.extend(0..k);
    }
    match scheme {
        Scheme::BootI => {
            for (dst, &src) in out.chunks_exact_mut(n).zip(&scratch.labs) {
                dst.copy_from_slice(dataset.row(src));
            }
        }
        Scheme::BootJSingle | Scheme::BootIJSingle => {
            scratch.reps.clear();
            scratch.reps.extend((0..n).map(|_| rng.random_range(0..n)));
            for (dst, &src) in out.chunks_exact_mut(n).zip(&scratch.labs) {
                let row = dataset.row(src);
                for (d, &j) in dst.iter_mut().zip(&scratch.reps) {
                    *d = row[j];
                }
            }
        }
        Scheme::BootJRepeated | Scheme::BootIJRepeated => {
            for (dst, &src) in out.chunks_exact_mut(n).zip(&scratch.labs) {
                let row = dataset.row(src);
                for d in dst.iter_mut() {
                    *d = row[rng.random_range(0..n)];
                }
            }
        }
    }
}

/// Replicate estimates from one resampling scheme together with their
/// bootstrap mean and standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution {
    pub scheme: Scheme,
    pub k: usize,
    pub n: usize,
    /// ANOVA estimates of the original data (θ̂).
    pub origin: VarianceComponents,
    /// θ̂*_m for m = 1..M.
    pub replicates: Vec<VarianceComponents>,
    /// θ̄*, componentwise.
    pub means: VarianceComponents,
    /// Sample standard deviation of the replicates, divisor M − 1.
    pub ses: SeTriple,
}

impl BootstrapDistribution {
    /// Assembles a distribution and its summary statistics.
    pub fn from_replicates(
        scheme: Scheme,
        k: usize,
        n: usize,
        origin: VarianceComponents,
        replicates: Vec<VarianceComponents>,
    ) -> Result<Self> {
        if replicates.len() < 2 {
            return Err(Error::config("at least 2 bootstrap replicates are required"));
        }
        let (means, ses) = mean_and_sd(&replicates);
        Ok(Self {
            scheme,
            k,
            n,
            origin,
            replicates,
            means,
            ses,
        })
    }

    pub fn m(&self) -> usize {
        self.replicates.len()
    }

    /// Bias estimate θ̄* − θ̂, componentwise.
    pub fn bias(&self) -> VarianceComponents {
        VarianceComponents::new(
            self.means.repeatability() - self.origin.repeatability(),
            self.means.between_lab() - self.origin.between_lab(),
        )
    }

    /// Point estimate, standard error and (possibly transformed) replicates
    /// for one estimator flavor.
    ///
    /// The bias-corrected flavor shares the replicates and SE of the raw
    /// bootstrap; the adjusted flavor maps every replicate through the
    /// scheme's adjustment so SEs and quantiles transform consistently.
    pub fn view(&self, flavor: Flavor) -> Result<EstimatorView<'_>> {
        Ok(match flavor {
            Flavor::RawMean => EstimatorView {
                center: self.means,
                se: self.ses,
                replicates: Cow::Borrowed(&self.replicates),
            },
            Flavor::BiasCorrected => EstimatorView {
                center: bias_corrected(self),
                se: self.ses,
                replicates: Cow::Borrowed(&self.replicates),
            },
            Flavor::Adjusted => {
                let adj = Adjustment::for_scheme(self.scheme, self.k, self.n)?;
                let mapped: Vec<VarianceComponents> =
                    self.replicates.iter().map(|r| adj.apply(r)).collect();
                let (_, se) = mean_and_sd(&mapped);
                EstimatorView {
                    center: adj.apply(&self.means),
                    se,
                    replicates: Cow::Owned(mapped),
                }
            }
        })
    }
}

/// A point estimator's value, SE and replicate cloud.
#[derive(Debug, Clone)]
pub struct EstimatorView<'a> {
    pub center: VarianceComponents,
    pub se: SeTriple,
    pub replicates: Cow<'a, [VarianceComponents]>,
}

fn mean_and_sd(replicates: &[VarianceComponents]) -> (VarianceComponents, SeTriple) {
    let m = replicates.len() as f64;
    let mean_r = replicates.iter().map(|v| v.repeatability()).sum::<f64>() / m;
    let mean_l = replicates.iter().map(|v| v.between_lab()).sum::<f64>() / m;
    let mean_rr = replicates.iter().map(|v| v.reproducibility()).sum::<f64>() / m;
    let sd = |mean: f64, f: fn(&VarianceComponents) -> f64| {
        (replicates.iter().map(|v| (f(v) - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    };
    let ses = SeTriple {
        repeatability: sd(mean_r, VarianceComponents::repeatability),
        between_lab: sd(mean_l, VarianceComponents::between_lab),
        reproducibility: sd(mean_rr, VarianceComponents::reproducibility),
    };
    (VarianceComponents::new(mean_r, mean_l), ses)
}

/// Runs `m` bootstrap replicates of `scheme`.
///
/// Replicate `t` draws from `seed.child(t)`, so the result does not depend
/// on how replicates are scheduled across threads.
pub fn run_bootstrap(
    dataset: &Dataset,
    scheme: Scheme,
    m: usize,
    seed: SeedSpec,
) -> Result<BootstrapDistribution> {
    if m < 2 {
        return Err(Error::config(format!(
            "bootstrap replicate count must be at least 2, got {m}"
        )));
    }
    let sums = model::compute_sums(dataset)?;
    let origin = model::anova_estimates(&sums, dataset.n());
    let (k, n) = (dataset.k(), dataset.n());
    let family = seed.key();
    let replicates: Vec<VarianceComponents> = (0..m)
        .into_par_iter()
        .map_init(
            || (Scratch::new(k, n), vec![0.0; k * n]),
            |(scratch, buf), t| {
                let mut rng = SeedSpec::new(family, t as u64).rng();
                resample_into(dataset, scheme, &mut rng, scratch, buf);
                replicate_estimates(k, n, buf)
            },
        )
        .collect();
    BootstrapDistribution::from_replicates(scheme, k, n, origin, replicates)
}

#[inline]
fn replicate_estimates(k: usize, n: usize, values: &[f64]) -> VarianceComponents {
    let (ssa, sse) = model::sums_of_squares(k, n, values);
    let msa = ssa / (k - 1) as f64;
    let mse = sse / (k * (n - 1)) as f64;
    VarianceComponents::new(mse, (msa - mse) / n as f64)
}

/// Bias-corrected estimator 2θ̂ − θ̄*.
pub fn bias_corrected(dist: &BootstrapDistribution) -> VarianceComponents {
    VarianceComponents::new(
        2.0 * dist.origin.repeatability() - dist.means.repeatability(),
        2.0 * dist.origin.between_lab() - dist.means.between_lab(),
    )
}

/// Linear bias adjustment of bootstrap means:
///
/// ```text
/// σ²_r:ad = r_factor · θ̄*_r
/// σ²_L:ad = l_factor · (θ̄*_L − r_shift · θ̄*_r)
/// ```
///
/// | scheme              | r_factor                  | l_factor    | r_shift   |
/// |---------------------|---------------------------|-------------|-----------|
/// | boot-i              | k/(k−1)                   | k/(k−1)     | 0         |
/// | boot-j_s, boot-j_r  | n/(n−1)                   | 1           | 1/(n−1)   |
/// | boot-ij_r, boot-ij_s| k/(k−1) · n/(n−1)         | k/(k−1)     | 1/(n−1)   |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adjustment {
    pub r_factor: f64,
    pub l_factor: f64,
    pub r_shift: f64,
}

impl Adjustment {
    pub fn for_scheme(scheme: Scheme, k: usize, n: usize) -> Result<Self> {
        if k < 2 {
            return Err(crate::error::DataError::TooFewLabs(k).into());
        }
        if n < 2 {
            return Err(crate::error::DataError::TooFewReplicates(n).into());
        }
        let lab = k as f64 / (k as f64 - 1.0);
        let rep = n as f64 / (n as f64 - 1.0);
        let shift = 1.0 / (n as f64 - 1.0);
        Ok(match scheme {
            Scheme::BootI => Self {
                r_factor: lab,
                l_factor: lab,
                r_shift: 0.0,
            },
            Scheme::BootJSingle | Scheme::BootJRepeated => Self {
                r_factor: rep,
                l_factor: 1.0,
                r_shift: shift,
            },
            Scheme::BootIJRepeated | Scheme::BootIJSingle => Self {
                r_factor: lab * rep,
                l_factor: lab,
                r_shift: shift,
            },
        })
    }

    pub fn apply(&self, v: &VarianceComponents) -> VarianceComponents {
        VarianceComponents::new(
            self.r_factor * v.repeatability(),
            self.l_factor * (v.between_lab() - self.r_shift * v.repeatability()),
        )
    }
}

/// Adjusted point estimates: the scheme's [`Adjustment`] applied to θ̄*.
pub fn adjusted_estimates(
    dist: &BootstrapDistribution,
    k: usize,
    n: usize,
) -> Result<VarianceComponents> {
    Ok(Adjustment::for_scheme(dist.scheme, k, n)?.apply(&dist.means))
}
