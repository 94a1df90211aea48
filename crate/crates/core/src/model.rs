//! One-way random-effects model: `Y_ij = μ + L_i + E_ij` for `k`
//! laboratories with `n` replicates each.
//!
//! Estimators follow the classical balanced ANOVA decomposition:
//! repeatability is `MSE`, the between-laboratory variance is
//! `(MSA − MSE)/n` (deliberately not truncated at zero) and
//! reproducibility is their sum.

use serde::Serialize;

use crate::error::{DataError, Result};

/// Balanced `k × n` table of measurements, stored row-major (one row per
/// laboratory).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    k: usize,
    n: usize,
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from per-laboratory rows.
    ///
    /// Rows must all have the same positive length and every value must be
    /// finite. A single laboratory or a single replicate is accepted here;
    /// the ANOVA computations reject those shapes.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(DataError::Empty.into());
        }
        let n = rows[0].as_ref().len();
        if n == 0 {
            return Err(DataError::Empty.into());
        }
        let mut values = Vec::with_capacity(k * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(DataError::Ragged {
                    row: i,
                    found: row.len(),
                    expected: n,
                }
                .into());
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(k, n, values)
    }

    /// Builds a dataset from a flat row-major buffer of length `k * n`.
    pub fn from_row_major(k: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(DataError::Empty.into());
        }
        if values.len() != k * n {
            return Err(DataError::Ragged {
                row: values.len() / n,
                found: values.len() % n,
                expected: n,
            }
            .into());
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                lab: pos / n,
                replicate: pos % n,
            }
            .into());
        }
        Ok(Self { k, n, values })
    }

    /// Internal constructor for buffers produced by resampling or
    /// simulation, which are finite and rectangular by construction.
    pub(crate) fn from_parts_unchecked(k: usize, n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), k * n);
        Self { k, n, values }
    }

    /// Number of laboratories.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Replicates per laboratory.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_row_major(
            self.k,
            self.n,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Returns a copy with `offset` added to every value.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Self::from_row_major(
            self.k,
            self.n,
            self.values.iter().map(|v| v + offset).collect(),
        )
    }
}

/// Between- and within-laboratory sums of squares and mean squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaSums {
    pub k: usize,
    pub n: usize,
    pub ssa: f64,
    pub sse: f64,
    pub msa: f64,
    pub mse: f64,
    /// Between-laboratory degrees of freedom, `k − 1`.
    pub phi_a: usize,
    /// Within-laboratory degrees of freedom, `k(n − 1)`.
    pub phi_e: usize,
}

/// Computes `SSA`, `SSE`, `MSA` and `MSE` with two-pass summation.
pub fn compute_sums(dataset: &Dataset) -> Result<AnovaSums> {
    sums_from_slice(dataset.k, dataset.n, &dataset.values)
}

pub(crate) fn sums_from_slice(k: usize, n: usize, values: &[f64]) -> Result<AnovaSums> {
    if k < 2 {
        return Err(DataError::TooFewLabs(k).into());
    }
    if n < 2 {
        return Err(DataError::TooFewReplicates(n).into());
    }
    let (ssa, sse) = sums_of_squares(k, n, values);
    let phi_a = k - 1;
    let phi_e = k * (n - 1);
    Ok(AnovaSums {
        k,
        n,
        ssa,
        sse,
        msa: ssa / phi_a as f64,
        mse: sse / phi_e as f64,
        phi_a,
        phi_e,
    })
}

/// Hot path shared with the bootstrap: no validation, no allocation.
/// Returns `(SSA, SSE)`.
#[inline]
pub(crate) fn sums_of_squares(k: usize, n: usize, values: &[f64]) -> (f64, f64) {
    let nf = n as f64;
    // Balanced design: the grand mean equals the mean of the row means.
    let grand_mean = values.iter().sum::<f64>() / (k * n) as f64;
    let mut between = 0.0;
    let mut sse = 0.0;
    for row in values.chunks_exact(n) {
        let mean = row.iter().sum::<f64>() / nf;
        sse += row.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
        let d = mean - grand_mean;
        between += d * d;
    }
    (nf * between, sse)
}

/// Selects one of the three precision measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    /// Repeatability variance σ²_r.
    Repeatability,
    /// Between-laboratory variance σ²_L.
    BetweenLab,
    /// Reproducibility variance σ²_R = σ²_r + σ²_L.
    Reproducibility,
}

impl Component {
    pub const ALL: [Component; 3] = [
        Component::Repeatability,
        Component::BetweenLab,
        Component::Reproducibility,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Component::Repeatability => "r",
            Component::BetweenLab => "L",
            Component::Reproducibility => "R",
        }
    }
}

/// One value per precision measure.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PerComponent<T> {
    pub repeatability: T,
    pub between_lab: T,
    pub reproducibility: T,
}

impl<T> PerComponent<T> {
    pub fn from_fn(mut f: impl FnMut(Component) -> T) -> Self {
        Self {
            repeatability: f(Component::Repeatability),
            between_lab: f(Component::BetweenLab),
            reproducibility: f(Component::Reproducibility),
        }
    }

    pub fn get(&self, c: Component) -> &T {
        match c {
            Component::Repeatability => &self.repeatability,
            Component::BetweenLab => &self.between_lab,
            Component::Reproducibility => &self.reproducibility,
        }
    }

    pub fn get_mut(&mut self, c: Component) -> &mut T {
        match c {
            Component::Repeatability => &mut self.repeatability,
            Component::BetweenLab => &mut self.between_lab,
            Component::Reproducibility => &mut self.reproducibility,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerComponent<U> {
        PerComponent {
            repeatability: f(&self.repeatability),
            between_lab: f(&self.between_lab),
            reproducibility: f(&self.reproducibility),
        }
    }
}

/// Standard errors of the three variance estimates.
pub type SeTriple = PerComponent<f64>;

/// The triple (σ²_r, σ²_L, σ²_R), with σ²_R always formed as the sum of
/// the other two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceComponents {
    repeatability: f64,
    between_lab: f64,
    reproducibility: f64,
}

impl VarianceComponents {
    pub fn new(repeatability: f64, between_lab: f64) -> Self {
        Self {
            repeatability,
            between_lab,
            reproducibility: repeatability + between_lab,
        }
    }

    pub fn repeatability(&self) -> f64 {
        self.repeatability
    }

    pub fn between_lab(&self) -> f64 {
        self.between_lab
    }

    pub fn reproducibility(&self) -> f64 {
        self.reproducibility
    }

    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Repeatability => self.repeatability,
            Component::BetweenLab => self.between_lab,
            Component::Reproducibility => self.reproducibility,
        }
    }

    pub fn to_per_component(self) -> PerComponent<f64> {
        PerComponent::from_fn(|c| self.get(c))
    }

    /// Multiplies both free components by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.repeatability * factor, self.between_lab * factor)
    }
}

/// Unbiased ANOVA estimators: σ̂²_r = MSE, σ̂²_L = (MSA − MSE)/n.
///
/// σ̂²_L is not truncated at zero.
pub fn anova_estimates(sums: &AnovaSums, n: usize) -> VarianceComponents {
    VarianceComponents::new(sums.mse, (sums.msa - sums.mse) / n as f64)
}

/// Offset `c` in the `(k + c)` denominator of the σ̂²_L standard error.
/// The textbook large-sample form uses `k − 1`; set to `-1` to switch.
pub const BETWEEN_LAB_SE_DF_OFFSET: i64 = 1;

/// Plug-in analytic standard errors of the ANOVA estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaStandardErrors {
    pub se: SeTriple,
    /// Set when the reproducibility radicand went negative and was clamped
    /// to zero.
    pub reproducibility_clamped: bool,
}

/// Standard errors of the ANOVA estimators with the estimates plugged in
/// for the unknown variances (negative σ̂²_L included).
///
/// ```text
/// se_r² = 2 σ̂_r⁴ / (k(n−1) + 2)
/// se_L² = (2/n²) [ (n σ̂_L + σ̂_r)² / (k+1) + σ̂_r⁴ / (k(n−1) + 2) ]
/// se_R² = se_r² + se_L² + 2 Cov(σ̂_r, σ̂_L),  Cov = −se_r² / n
/// ```
///
/// The covariance follows from σ̂_L = (MSA − MSE)/n with MSA and MSE
/// independent.
pub fn anova_standard_errors(
    components: &VarianceComponents,
    k: usize,
    n: usize,
) -> AnovaStandardErrors {
    let kf = k as f64;
    let nf = n as f64;
    let r = components.repeatability;
    let l = components.between_lab;
    let r4 = r * r;
    let within_df = kf * (nf - 1.0) + 2.0;
    let var_r = 2.0 * r4 / within_df;
    let between = nf * l + r;
    let var_l = 2.0 / (nf * nf)
        * (between * between / (kf + BETWEEN_LAB_SE_DF_OFFSET as f64) + r4 / within_df);
    let covariance = -var_r / nf;
    let radicand = var_r + var_l + 2.0 * covariance;
    let clamped = radicand < 0.0;
    AnovaStandardErrors {
        se: SeTriple {
            repeatability: var_r.sqrt(),
            between_lab: var_l.sqrt(),
            reproducibility: radicand.max(0.0).sqrt(),
        },
        reproducibility_clamped: clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_by_two_sums() {
        let ds = Dataset::from_rows(&[[0.0, 2.0], [1.0, 3.0]]).unwrap();
        let s = compute_sums(&ds).unwrap();
        assert_eq!((s.ssa, s.sse, s.msa, s.mse), (1.0, 4.0, 1.0, 2.0));
        assert_eq!((s.phi_a, s.phi_e), (1, 2));
    }

    #[test]
    fn constant_dataset_has_zero_sums() {
        let ds = Dataset::from_rows(&[[3.5; 4], [3.5; 4], [3.5; 4]]).unwrap();
        let s = compute_sums(&ds).unwrap();
        assert_eq!(s.ssa, 0.0);
        assert_eq!(s.sse, 0.0);
    }

    #[test]
    fn rejects_degenerate_shapes() {
        let one_lab = Dataset::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(
            compute_sums(&one_lab),
            Err(Error::Data(DataError::TooFewLabs(1)))
        ));
        let one_rep = Dataset::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(matches!(
            compute_sums(&one_rep),
            Err(Error::Data(DataError::TooFewReplicates(1)))
        ));
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        let ragged: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(matches!(
            Dataset::from_rows(&ragged),
            Err(Error::Data(DataError::Ragged { row: 1, .. }))
        ));
        assert!(matches!(
            Dataset::from_rows(&[[1.0, f64::NAN], [1.0, 2.0]]),
            Err(Error::Data(DataError::NonFinite {
                lab: 0,
                replicate: 1
            }))
        ));
    }

    #[test]
    fn estimates_by_substitution() {
        let sums = AnovaSums {
            k: 2,
            n: 2,
            ssa: 1.0,
            sse: 4.0,
            msa: 1.0,
            mse: 2.0,
            phi_a: 1,
            phi_e: 2,
        };
        let est = anova_estimates(&sums, 2);
        assert_eq!(est.repeatability(), 2.0);
        assert_eq!(est.between_lab(), -0.5);
        assert_eq!(est.reproducibility(), 1.5);

        let equal = AnovaSums { msa: 2.0, ..sums };
        assert_eq!(anova_estimates(&equal, 2).between_lab(), 0.0);
    }

    #[test]
    fn se_by_substitution() {
        // k = 5, n = 5: k(n−1)+2 = 22, k+1 = 6.
        let ses = anova_standard_errors(&VarianceComponents::new(1.0, 0.0), 5, 5);
        let expected = ((2.0_f64 / 25.0) * (1.0 / 6.0 + 1.0 / 22.0)).sqrt();
        assert!(approx(ses.se.between_lab, expected, 1e-15));
        assert!(approx(ses.se.repeatability, (2.0f64 / 22.0).sqrt(), 1e-15));
        assert!(!ses.reproducibility_clamped);

        let zero = anova_standard_errors(&VarianceComponents::new(0.0, 0.3), 5, 5);
        assert_eq!(zero.se.repeatability, 0.0);
    }

    #[test]
    fn reproducibility_radicand_is_nonnegative_for_valid_designs() {
        // se_R² = se_r²(1 − 2/n) + se_L², so the clamp only guards rounding.
        for &(k, n) in &[(2, 2), (3, 3), (5, 5), (50, 2)] {
            for &l in &[-2.0, -0.5, 0.0, 0.7, 3.0] {
                let ses = anova_standard_errors(&VarianceComponents::new(1.0, l), k, n);
                assert!(!ses.reproducibility_clamped, "k={k} n={n} l={l}");
            }
        }
    }

    #[test]
    fn reproducibility_matches_mean_square_form() {
        let ds = Dataset::from_rows(&[
            [1.0, 1.3, 0.7, 1.1],
            [2.2, 2.0, 1.9, 2.4],
            [0.5, 0.9, 0.6, 0.4],
        ])
        .unwrap();
        let s = compute_sums(&ds).unwrap();
        let est = anova_estimates(&s, 4);
        let alt = (s.msa + 3.0 * s.mse) / 4.0;
        assert!(((est.reproducibility() - alt) / alt).abs() < 1e-12);
    }
}
