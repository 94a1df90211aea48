//! Exact bootstrap expectations by exhaustive enumeration of resamples,
//! compared with closed forms and with the library's Monte Carlo runs.

use interlab::resampling::{resample_once, run_bootstrap, Adjustment, Scheme};
use interlab::{Dataset, SeedSpec};

mod common;
use common::{enumerate, estimates, exact_means, rows_of};

fn designs() -> Vec<Dataset> {
    vec![
        Dataset::from_rows(&[[0.0, 2.0], [1.0, 3.0]]).unwrap(),
        Dataset::from_rows(&[[1.0, 2.5, 4.0], [0.3, 0.9, 2.2]]).unwrap(),
        Dataset::from_rows(&[[1.0, 2.5], [0.3, 0.9], [5.1, 3.3]]).unwrap(),
        Dataset::from_rows(&[[1.0, 2.5, 4.0], [0.3, 0.9, 2.2], [5.1, 3.3, 4.4]]).unwrap(),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn boot_i_preserves_repeatability_in_expectation() {
    for ds in designs() {
        let (r, _) = estimates(&rows_of(&ds));
        let (er, _) = exact_means(&ds, Scheme::BootI);
        assert!(close(er, r), "k={} n={}: {er} vs {r}", ds.k(), ds.n());
    }
}

#[test]
fn within_lab_resampling_shrinks_repeatability_by_n_minus_1_over_n() {
    for ds in designs() {
        let (r, l) = estimates(&rows_of(&ds));
        let n = ds.n() as f64;
        for scheme in [Scheme::BootJRepeated, Scheme::BootJSingle] {
            let (er, el) = exact_means(&ds, scheme);
            assert!(close(er, (n - 1.0) / n * r), "{scheme}: {er} vs {}", (n - 1.0) / n * r);
            // Adjusted estimators are exactly unbiased for the ANOVA values.
            let adj = Adjustment::for_scheme(scheme, ds.k(), ds.n()).unwrap();
            let a = adj.apply(&interlab::VarianceComponents::new(er, el));
            assert!(close(a.repeatability(), r));
            if scheme == Scheme::BootJRepeated {
                assert!(close(a.between_lab(), l), "{} vs {l}", a.between_lab());
            }
        }
    }
}

/// Library Monte Carlo means agree with exact enumeration within 5 SE.
#[test]
fn library_runs_match_enumeration() {
    let ds = designs().remove(2);
    for scheme in Scheme::ALL {
        let all = enumerate(&ds, scheme);
        let ests: Vec<(f64, f64)> = all.iter().map(|r| estimates(r)).collect();
        let m = ests.len() as f64;
        let (er, el) = (
            ests.iter().map(|e| e.0).sum::<f64>() / m,
            ests.iter().map(|e| e.1).sum::<f64>() / m,
        );
        let sd_r = (ests.iter().map(|e| (e.0 - er).powi(2)).sum::<f64>() / m).sqrt();
        let sd_l = (ests.iter().map(|e| (e.1 - el).powi(2)).sum::<f64>() / m).sqrt();

        let draws = 20_000;
        let dist = run_bootstrap(&ds, scheme, draws, SeedSpec::new(3, scheme.id())).unwrap();
        let se = |sd: f64| 5.0 * sd / (draws as f64).sqrt() + 1e-12;
        assert!((dist.means.repeatability() - er).abs() <= se(sd_r), "{scheme} r");
        assert!((dist.means.between_lab() - el).abs() <= se(sd_l), "{scheme} L");
        assert!((dist.ses.repeatability - sd_r).abs() <= 0.05 * sd_r + 1e-12, "{scheme} sd");
    }
}

/// boot-ij_s on a 2 × 2 table: 4 lab vectors × 4 column vectors, each
/// with probability 1/16.
#[test]
fn double_resampling_outcome_frequencies() {
    let ds = Dataset::from_rows(&[[0.0, 2.0], [1.0, 3.0]]).unwrap();
    let outcomes = enumerate(&ds, Scheme::BootIJSingle);
    assert_eq!(outcomes.len(), 16);
    let flat: Vec<Vec<f64>> = outcomes.iter().map(|o| o.concat()).collect();

    let draws = 16_000;
    let mut counts = [0usize; 16];
    for t in 0..draws {
        let r = resample_once(&ds, Scheme::BootIJSingle, SeedSpec::new(77, t));
        let idx = flat.iter().position(|f| f.as_slice() == r.values()).expect("outcome outside support");
        counts[idx] += 1;
    }
    let p = 1.0 / 16.0;
    let sd = (draws as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!((c as f64 - draws as f64 * p).abs() < 5.0 * sd, "outcome {i}: {c}");
    }
}

#[test]
fn resamples_stay_in_support() {
    let ds = designs().remove(3);
    let rows = rows_of(&ds);
    for t in 0..200 {
        let r = resample_once(&ds, Scheme::BootI, SeedSpec::new(1, t));
        assert!(r.rows().all(|row| rows.iter().any(|src| src == row)));
        let r = resample_once(&ds, Scheme::BootJRepeated, SeedSpec::new(1, t));
        for (i, row) in r.rows().enumerate() {
            assert!(row.iter().all(|v| rows[i].contains(v)));
        }
        let r = resample_once(&ds, Scheme::BootIJRepeated, SeedSpec::new(1, t));
        for row in r.rows() {
            assert!(rows.iter().any(|src| row.iter().all(|v| src.contains(v))));
        }
    }
}
