//! Monte Carlo coverage studies.
//!
//! Each scenario fixes the true variance components and the design
//! `(k, n)`. For every Monte Carlo replication a dataset is simulated from
//! the one-way random-effects model with normal effects, the ANOVA
//! benchmark and approximate intervals are computed, and every selected
//! bootstrap scheme is run. Per-replication results are folded in
//! replication order, so summaries are bit-identical for any number of
//! worker threads.
//!
//! Randomness: the scenario key is `mix(seed, scenario_id)`, where
//! `scenario_id` hashes the design fields. Replication `t` simulates its
//! data from stream `(key, t)`; scheme `s` bootstraps from the family keyed
//! by stream `(mix(key, 1 + s), t)`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{check_probability, Error, Result};
use crate::intervals::{self, BootMethod, Interval, IntervalMethod};
use crate::model::{self, Component, Dataset, PerComponent, SeTriple, VarianceComponents};
use crate::resampling::{self, Flavor, Scheme};
use crate::rng::{mix, open_unit, SeedSpec};

/// One cell of a simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub mu: f64,
    pub sigma_r2: f64,
    /// σ²_L / σ²_r.
    pub ratio: f64,
    pub k: usize,
    pub n: usize,
    pub m_boot: usize,
    pub r_mc: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Scenario {
    /// Scenario with the standard defaults: μ = 0, σ²_r = 1, M = R = 1000,
    /// α = 0.05.
    pub fn new(k: usize, n: usize, ratio: f64, seed: u64) -> Self {
        Self {
            mu: 0.0,
            sigma_r2: 1.0,
            ratio,
            k,
            n,
            m_boot: 1000,
            r_mc: 1000,
            alpha: 0.05,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::config("mu must be finite"));
        }
        if !(self.sigma_r2.is_finite() && self.sigma_r2 >= 0.0) {
            return Err(Error::config(format!(
                "sigma_r2 must be finite and nonnegative, got {}",
                self.sigma_r2
            )));
        }
        if !(self.ratio.is_finite() && self.ratio >= 0.0) {
            return Err(Error::config(format!(
                "ratio must be finite and nonnegative, got {}",
                self.ratio
            )));
        }
        if self.k < 2 || self.n < 2 {
            return Err(Error::config(format!(
                "design needs k >= 2 and n >= 2, got k={} n={}",
                self.k, self.n
            )));
        }
        if self.m_boot < 2 {
            return Err(Error::config("m_boot must be at least 2"));
        }
        if self.r_mc == 0 {
            return Err(Error::config("r_mc must be positive"));
        }
        check_probability(self.alpha)
    }

    pub fn sigma_l2(&self) -> f64 {
        self.ratio * self.sigma_r2
    }

    /// True variance components.
    pub fn truth(&self) -> VarianceComponents {
        VarianceComponents::new(self.sigma_r2, self.sigma_l2())
    }

    /// Hash of the design fields (everything except the seed).
    pub fn id(&self) -> u64 {
        [
            self.mu.to_bits(),
            self.sigma_r2.to_bits(),
            self.ratio.to_bits(),
            self.k as u64,
            self.n as u64,
            self.m_boot as u64,
            self.r_mc as u64,
            self.alpha.to_bits(),
        ]
        .into_iter()
        .fold(0x6a09_e667_f3bc_c908, mix)
    }

    fn key(&self) -> u64 {
        mix(self.seed, self.id())
    }

    fn data_stream(&self, rep: usize) -> SeedSpec {
        SeedSpec::new(self.key(), rep as u64)
    }

    fn bootstrap_stream(&self, scheme: Scheme, rep: usize) -> SeedSpec {
        SeedSpec::new(mix(self.key(), 1 + scheme.id()), rep as u64)
    }

    pub fn label(&self) -> String {
        format!("k={} n={} ratio={}", self.k, self.n, self.ratio)
    }
}

/// Named scenario grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// 4 ratios × k, n ∈ {3, 5, 10, 50}: 64 cells at M = R = 1000.
    Full,
    /// Three small cells at reduced M and R for smoke runs.
    Quick,
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Grid::Full),
            "quick" => Ok(Grid::Quick),
            _ => Err(Error::config(format!("unknown grid `{s}` (expected full or quick)"))),
        }
    }
}

pub const FULL_RATIOS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const FULL_SIZES: [usize; 4] = [3, 5, 10, 50];

pub fn grid(which: Grid, seed: u64) -> Vec<Scenario> {
    match which {
        Grid::Full => {
            let mut out = Vec::with_capacity(64);
            for ratio in FULL_RATIOS {
                for k in FULL_SIZES {
                    for n in FULL_SIZES {
                        out.push(Scenario::new(k, n, ratio, seed));
                    }
                }
            }
            out
        }
        Grid::Quick => [(5, 5, 0.5), (3, 3, 0.25), (10, 5, 2.0)]
            .into_iter()
            .map(|(k, n, ratio)| Scenario {
                m_boot: 200,
                r_mc: 100,
                ..Scenario::new(k, n, ratio, seed)
            })
            .collect(),
    }
}

/// Simulates `Y_ij = μ + L_i + E_ij` for replication `rep`.
///
/// The stream yields `L_1..L_k` first, then `E_ij` in row-major order;
/// each normal variate is `Φ⁻¹(U)` for a 53-bit open-interval uniform `U`.
pub fn simulate_dataset(scenario: &Scenario, rep: usize) -> Result<Dataset> {
    scenario.validate()?;
    let mut rng = scenario.data_stream(rep).rng();
    let (k, n) = (scenario.k, scenario.n);
    let sd_l = scenario.sigma_l2().sqrt();
    let sd_r = scenario.sigma_r2.sqrt();
    let mut std_normal = || dist::normal_quantile(open_unit(&mut rng));
    let labs = (0..k)
        .map(|_| std_normal().map(|z| scenario.mu + sd_l * z))
        .collect::<Result<Vec<f64>>>()?;
    let mut values = Vec::with_capacity(k * n);
    for lab in &labs {
        for _ in 0..n {
            values.push(lab + sd_r * std_normal()?);
        }
    }
    Dataset::from_row_major(k, n, values)
}

/// Fraction of intervals with `lower ≤ truth ≤ upper`.
pub fn coverage(intervals: &[Interval], truth: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::config("coverage needs at least one interval"));
    }
    let hit = intervals.iter().filter(|iv| iv.contains(truth)).count();
    Ok(hit as f64 / intervals.len() as f64)
}

/// Which estimators and intervals a study evaluates.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub anova: bool,
    pub approx_intervals: bool,
    pub schemes: Vec<Scheme>,
    pub flavors: Vec<Flavor>,
    pub boot_methods: Vec<BootMethod>,
}

impl Default for Selection {
    fn default() -> Self {
        Self {
            anova: true,
            approx_intervals: true,
            schemes: Scheme::ALL.to_vec(),
            flavors: vec![Flavor::RawMean, Flavor::BiasCorrected, Flavor::Adjusted],
            boot_methods: BootMethod::ALL.to_vec(),
        }
    }
}

impl Selection {
    /// Only the ANOVA benchmark (no bootstrap).
    pub fn anova_only() -> Self {
        Self {
            schemes: Vec::new(),
            ..Self::default()
        }
    }

    /// A single scheme with the adjusted flavor.
    pub fn adjusted(schemes: &[Scheme], methods: &[BootMethod]) -> Self {
        Self {
            anova: false,
            approx_intervals: false,
            schemes: schemes.to_vec(),
            flavors: vec![Flavor::Adjusted],
            boot_methods: methods.to_vec(),
        }
    }
}

/// Row label of a summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    Anova,
    Bootstrap { scheme: Scheme, flavor: Flavor },
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Anova => f.write_str("ANOVA"),
            Estimator::Bootstrap { scheme, flavor } => write!(f, "{scheme}:{flavor}"),
        }
    }
}

/// Interval family within a summary row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CiKind {
    /// Chi-square for σ²_r, Moriguchi for σ²_L, Satterthwaite for σ²_R.
    Approx,
    Boot(BootMethod),
}

impl fmt::Display for CiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CiKind::Approx => f.write_str("Approx"),
            CiKind::Boot(m) => write!(f, "{m}"),
        }
    }
}

/// Monte Carlo averages for one interval method and component.
///
/// Means are over replications where the interval could be formed;
/// coverage counts failed constructions as misses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalStats {
    pub method: Option<IntervalMethod>,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub mean_width: f64,
    pub coverage: f64,
    pub formed: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub estimator: Estimator,
    pub mean_estimate: VarianceComponents,
    pub mean_se: SeTriple,
    pub intervals: Vec<(CiKind, PerComponent<IntervalStats>)>,
}

impl SummaryRow {
    pub fn interval(&self, kind: CiKind) -> Option<&PerComponent<IntervalStats>> {
        self.intervals.iter().find(|(k, _)| *k == kind).map(|(_, s)| s)
    }
}

/// Counts of degenerate events across replications.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Intervals that could not be formed (e.g. MSA = 0 for Moriguchi).
    pub failed_intervals: usize,
    /// Intervals formed with a warning flag.
    pub flagged_intervals: usize,
    /// Replications whose σ̂²_R SE radicand was clamped at zero.
    pub clamped_se: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    pub truth: VarianceComponents,
    pub rows: Vec<SummaryRow>,
    pub diagnostics: Diagnostics,
}

impl ScenarioSummary {
    pub fn row(&self, estimator: Estimator) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }
}

struct RowOutcome {
    estimate: VarianceComponents,
    se: SeTriple,
    intervals: Vec<(CiKind, PerComponent<Option<Interval>>)>,
}

struct RepOutcome {
    rows: Vec<RowOutcome>,
    clamped_se: bool,
}

fn analyze_replication(
    scenario: &Scenario,
    selection: &Selection,
    rep: usize,
) -> Result<RepOutcome> {
    let data = simulate_dataset(scenario, rep)?;
    let sums = model::compute_sums(&data)?;
    let est = model::anova_estimates(&sums, scenario.n);
    let ses = model::anova_standard_errors(&est, scenario.k, scenario.n);
    let alpha = scenario.alpha;
    let mut rows = Vec::new();
    if selection.anova {
        let mut intervals = Vec::new();
        if selection.approx_intervals {
            let approx = intervals::approximate_intervals(&sums, alpha);
            intervals.push((CiKind::Approx, approx.map(|r| r.as_ref().ok().copied())));
        }
        rows.push(RowOutcome {
            estimate: est,
            se: ses.se,
            intervals,
        });
    }
    for &scheme in &selection.schemes {
        let dist = resampling::run_bootstrap(
            &data,
            scheme,
            scenario.m_boot,
            scenario.bootstrap_stream(scheme, rep),
        )?;
        for &flavor in &selection.flavors {
            let view = dist.view(flavor)?;
            let intervals = if flavor == Flavor::BiasCorrected || selection.boot_methods.is_empty()
            {
                Vec::new()
            } else {
                match intervals::view_intervals(&view, &selection.boot_methods, alpha) {
                    Ok(list) => list
                        .into_iter()
                        .map(|(m, ivs)| (CiKind::Boot(m), ivs.map(|iv| Some(*iv))))
                        .collect(),
                    Err(Error::Numeric(_)) => selection
                        .boot_methods
                        .iter()
                        .map(|&m| (CiKind::Boot(m), PerComponent::from_fn(|_| None)))
                        .collect(),
                    Err(e) => return Err(e),
                }
            };
            rows.push(RowOutcome {
                estimate: view.center,
                se: view.se,
                intervals,
            });
        }
    }
    Ok(RepOutcome {
        rows,
        clamped_se: ses.reproducibility_clamped,
    })
}

fn estimators(selection: &Selection) -> Vec<Estimator> {
    let mut out = Vec::new();
    if selection.anova {
        out.push(Estimator::Anova);
    }
    for &scheme in &selection.schemes {
        for &flavor in &selection.flavors {
            out.push(Estimator::Bootstrap { scheme, flavor });
        }
    }
    out
}

#[derive(Clone, Copy, Default)]
struct IntervalAcc {
    method: Option<IntervalMethod>,
    lower: f64,
    upper: f64,
    width: f64,
    covered: usize,
    formed: usize,
    flagged: usize,
}

/// Runs one scenario.
pub fn run_scenario(scenario: &Scenario, selection: &Selection) -> Result<ScenarioSummary> {
    scenario.validate()?;
    if selection.flavors.is_empty() && !selection.schemes.is_empty() {
        return Err(Error::config("no estimator flavor selected"));
    }
    let labels = estimators(selection);
    if labels.is_empty() {
        return Err(Error::config("selection evaluates no estimators"));
    }
    let outcomes: Vec<RepOutcome> = (0..scenario.r_mc)
        .into_par_iter()
        .map(|rep| analyze_replication(scenario, selection, rep))
        .collect::<Result<_>>()?;

    let truth = scenario.truth();
    let r = scenario.r_mc as f64;
    let mut diagnostics = Diagnostics::default();
    let mut rows = Vec::with_capacity(labels.len());
    for (idx, &estimator) in labels.iter().enumerate() {
        let mut est_sum = [0.0; 3];
        let mut se_sum = [0.0; 3];
        let kinds: Vec<CiKind> = outcomes[0].rows[idx].intervals.iter().map(|(k, _)| *k).collect();
        let mut accs = vec![[IntervalAcc::default(); 3]; kinds.len()];
        for outcome in &outcomes {
            let row = &outcome.rows[idx];
            for (ci, c) in Component::ALL.into_iter().enumerate() {
                est_sum[ci] += row.estimate.get(c);
                se_sum[ci] += *row.se.get(c);
            }
            for (slot, (_, ivs)) in accs.iter_mut().zip(&row.intervals) {
                for (ci, c) in Component::ALL.into_iter().enumerate() {
                    let acc = &mut slot[ci];
                    match ivs.get(c) {
                        Some(iv) => {
                            acc.method = Some(iv.method);
                            acc.lower += iv.lower;
                            acc.upper += iv.upper;
                            acc.width += iv.width();
                            acc.formed += 1;
                            if iv.contains(truth.get(c)) {
                                acc.covered += 1;
                            }
                            if iv.flag.is_some() {
                                acc.flagged += 1;
                                diagnostics.flagged_intervals += 1;
                            }
                        }
                        None => diagnostics.failed_intervals += 1,
                    }
                }
            }
        }
        let intervals = kinds
            .into_iter()
            .zip(accs)
            .map(|(kind, slot)| {
                let stats = PerComponent::from_fn(|c| {
                    let a = slot[c as usize];
                    let f = a.formed.max(1) as f64;
                    IntervalStats {
                        method: a.method,
                        mean_lower: if a.formed == 0 { f64::NAN } else { a.lower / f },
                        mean_upper: if a.formed == 0 { f64::NAN } else { a.upper / f },
                        mean_width: if a.formed == 0 { f64::NAN } else { a.width / f },
                        coverage: a.covered as f64 / r,
                        formed: a.formed,
                        flagged: a.flagged,
                    }
                });
                (kind, stats)
            })
            .collect();
        rows.push(SummaryRow {
            estimator,
            mean_estimate: VarianceComponents::new(est_sum[0] / r, est_sum[1] / r),
            mean_se: SeTriple {
                repeatability: se_sum[0] / r,
                between_lab: se_sum[1] / r,
                reproducibility: se_sum[2] / r,
            },
            intervals,
        });
    }
    diagnostics.clamped_se = outcomes.iter().filter(|o| o.clamped_se).count();
    Ok(ScenarioSummary {
        scenario: *scenario,
        truth,
        rows,
        diagnostics,
    })
}

/// Runs every scenario; a failing scenario does not stop the others.
pub fn run_study(scenarios: &[Scenario], selection: &Selection) -> Vec<Result<ScenarioSummary>> {
    scenarios.iter().map(|s| run_scenario(s, selection)).collect()
}
