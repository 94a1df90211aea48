//! Distribution kernel against independently coded oracles: a
//! positive-term erf series, and the lower incomplete gamma series with
//! a Stirling log-gamma, each inverted by plain bisection.

use interlab::dist::{self, Df2};

fn erf(x: f64) -> f64 {
    // erf(x) = 2/√π · e^{−x²} · Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))
    let ax = x.abs();
    let mut term = ax;
    let mut sum = ax;
    let mut n = 0.0;
    while term > sum * 1e-18 {
        n += 1.0;
        term *= 2.0 * ax * ax / (2.0 * n + 1.0);
        sum += term;
    }
    let v = 2.0 / std::f64::consts::PI.sqrt() * (-ax * ax).exp() * sum;
    v.copysign(x)
}

fn phi(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn ln_gamma(x: f64) -> f64 {
    // Shift up, then Stirling with Bernoulli corrections.
    let mut shift = 0.0;
    let mut z = x;
    while z < 30.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

/// Regularized lower incomplete gamma by its power series.
fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut k = 0.0;
    while term > sum * 1e-17 {
        k += 1.0;
        term *= x / (a + k);
        sum += term;
    }
    (a * x.ln() - x - ln_gamma(a) + sum.ln()).exp().min(1.0)
}

fn chi2_cdf(df: f64, x: f64) -> f64 {
    gamma_p(df / 2.0, x / 2.0)
}

fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const P_GRID: [f64; 11] = [
    0.001, 0.01, 0.025, 0.0316, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999,
];

#[test]
fn oracle_self_check() {
    assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
    assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
    let e = (chi2_cdf(2.0, 3.0) - (1.0 - (-1.5f64).exp())).abs();
    assert!(e < 1e-13, "{e}");
}

#[test]
fn normal_cdf_matches_erf_oracle() {
    assert_eq!(dist::normal_cdf(0.0), 0.5);
    for i in -120..=120 {
        let x = f64::from(i) * 0.05;
        let got = dist::normal_cdf(x);
        assert!((got - phi(x)).abs() <= 1e-12, "x={x}: {got} vs {}", phi(x));
        assert!((got - (1.0 - dist::normal_cdf(-x))).abs() <= 1e-15);
    }
    assert!((dist::normal_cdf(1.959_964) - 0.975).abs() < 1e-6);
}

#[test]
fn normal_quantile_matches_oracle() {
    let z = dist::normal_quantile(0.975).unwrap();
    let oracle = bisect(phi, 0.975, -10.0, 10.0);
    assert!((z - oracle).abs() < 1e-9);
    assert!((z - 1.959_964).abs() < 1e-5);
    assert_eq!(dist::normal_quantile(0.5).unwrap(), 0.0);
    for p in P_GRID {
        let q = dist::normal_quantile(p).unwrap();
        assert!((dist::normal_cdf(q) - p).abs() <= 1e-10, "p={p}");
        assert!((phi(q) - p).abs() <= 1e-10, "p={p}");
    }
    for bad in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(dist::normal_quantile(bad).is_err());
    }
}

#[test]
fn chi_square_quantile_matches_oracle() {
    let frozen = bisect(|x| chi2_cdf(10.0, x), 0.95, 0.0, 100.0);
    assert!((frozen - 18.307_038).abs() < 1e-5);
    let q = dist::chi_square_quantile(10.0, 0.95).unwrap();
    assert!((q - 18.3070).abs() < 1e-3);
    assert!((q - frozen).abs() < 1e-8);

    let dfs = [1.0, 2.0, 3.0, 4.0, 7.0, 11.0, 15.115, 36.0, 100.0, 2450.0];
    for df in dfs {
        for p in P_GRID {
            let q = dist::chi_square_quantile(df, p).unwrap();
            let back = chi2_cdf(df, q);
            assert!((back - p).abs() <= 1e-10, "df={df} p={p}: cdf(q)={back}");
        }
    }
}

#[test]
fn chi_square_closed_form_at_two_df() {
    for i in 1..100 {
        let p = f64::from(i) / 100.0;
        let q = dist::chi_square_quantile(2.0, p).unwrap();
        assert!((q + 2.0 * (1.0 - p).ln()).abs() <= 1e-12, "p={p}");
    }
    assert!((dist::chi_square_quantile(2.0, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn f_quantile_infinite_limit() {
    let oracle = bisect(|x| chi2_cdf(4.0, x), 0.975, 0.0, 100.0) / 4.0;
    assert!((oracle - 2.785_822).abs() < 1e-6);
    let f = dist::f_quantile(4.0, Df2::Infinite, 0.975).unwrap();
    assert!((f - oracle).abs() < 1e-9);
    for nu in [1.0, 3.0, 11.0, 49.0] {
        for p in P_GRID {
            let f = dist::f_quantile(nu, Df2::Infinite, p).unwrap();
            let c = dist::chi_square_quantile(nu, p).unwrap() / nu;
            assert_eq!(f, c);
        }
    }
}

#[test]
fn f_quantile_finite() {
    for d in [1.0, 4.0, 12.0, 40.0] {
        let m = dist::f_quantile(d, Df2::Finite(d), 0.5).unwrap();
        assert!((m - 1.0).abs() < 1e-10, "df={d}: {m}");
    }
    for (d1, d2) in [(2.0, 5.0), (4.0, 20.0), (11.0, 36.0)] {
        for p in P_GRID {
            let q = dist::f_quantile(d1, Df2::Finite(d2), p).unwrap();
            let back = dist::f_cdf(d1, Df2::Finite(d2), q).unwrap();
            assert!((back - p).abs() <= 1e-10, "({d1},{d2}) p={p}");
        }
    }
}

#[test]
fn quantiles_increase_with_p() {
    let grid: Vec<f64> = (1..200).map(|i| f64::from(i) / 200.0).collect();
    let check = |f: &dyn Fn(f64) -> f64| {
        for w in grid.windows(2) {
            assert!(f(w[0]) < f(w[1]), "not increasing at {}", w[0]);
        }
    };
    check(&|p| dist::normal_quantile(p).unwrap());
    check(&|p| dist::chi_square_quantile(5.0, p).unwrap());
    check(&|p| dist::chi_square_quantile(15.115, p).unwrap());
    check(&|p| dist::f_quantile(3.0, Df2::Infinite, p).unwrap());
    check(&|p| dist::f_quantile(3.0, Df2::Finite(9.0), p).unwrap());
}
