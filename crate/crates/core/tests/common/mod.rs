//! Exhaustive enumeration of bootstrap resamples for tiny designs.

use interlab::{Dataset, Scheme};

/// (σ̂²_r, σ̂²_L) from a row-major buffer, computed from scratch.
pub fn estimates(rows: &[Vec<f64>]) -> (f64, f64) {
    let k = rows.len() as f64;
    let n = rows[0].len() as f64;
    let means: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / k;
    let ssa = n * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let sse: f64 = rows
        .iter()
        .zip(&means)
        .map(|(r, m)| r.iter().map(|y| (y - m).powi(2)).sum::<f64>())
        .sum();
    let msa = ssa / (k - 1.0);
    let mse = sse / (k * (n - 1.0));
    (mse, (msa - mse) / n)
}

/// Every index vector of length `len` over `0..base`.
pub fn index_vectors(base: usize, len: usize) -> Vec<Vec<usize>> {
    let total = base.pow(len as u32);
    (0..total)
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let d = code % base;
                    code /= base;
                    d
                })
                .collect()
        })
        .collect()
}

pub fn rows_of(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.rows().map(<[f64]>::to_vec).collect()
}

/// All equally likely resamples of a scheme.
pub fn enumerate(ds: &Dataset, scheme: Scheme) -> Vec<Vec<Vec<f64>>> {
    let rows = rows_of(ds);
    let (k, n) = (ds.k(), ds.n());
    let lab_vectors = match scheme {
        Scheme::BootI | Scheme::BootIJRepeated | Scheme::BootIJSingle => index_vectors(k, k),
        _ => vec![(0..k).collect()],
    };
    let cols = index_vectors(n, n);
    let mut out = Vec::new();
    for labs in &lab_vectors {
        match scheme {
            Scheme::BootI => out.push(labs.iter().map(|&i| rows[i].clone()).collect()),
            Scheme::BootJSingle | Scheme::BootIJSingle => {
                for c in &cols {
                    out.push(
                        labs.iter()
                            .map(|&i| c.iter().map(|&j| rows[i][j]).collect())
                            .collect(),
                    );
                }
            }
            Scheme::BootJRepeated | Scheme::BootIJRepeated => {
                for combo in index_vectors(cols.len(), k) {
                    out.push(
                        labs.iter()
                            .zip(&combo)
                            .map(|(&i, &ci)| cols[ci].iter().map(|&j| rows[i][j]).collect())
                            .collect(),
                    );
                }
            }
        }
    }
    out
}

pub fn exact_means(ds: &Dataset, scheme: Scheme) -> (f64, f64) {
    let all = enumerate(ds, scheme);
    let m = all.len() as f64;
    let (sr, sl) = all.iter().map(|r| estimates(r)).fold((0.0, 0.0), |a, e| (a.0 + e.0, a.1 + e.1));
    (sr / m, sl / m)
}
