use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{QlbmError, Result};
use crate::lattice::DensityField;

/// `|ref - est| / |ref|` per site.
pub fn relative_error(reference: &DensityField, estimate: &DensityField) -> Result<Vec<f64>> {
    if reference.grid() != estimate.grid() {
        return Err(QlbmError::Usage("fields live on different grids".into()));
    }
    reference
        .values()
        .iter()
        .zip(estimate.values())
        .enumerate()
        .map(|(k, (&r, &e))| {
            if r == 0.0 {
                Err(QlbmError::Domain(format!(
                    "reference density is zero at site {k}; relative error is undefined"
                )))
            } else {
                Ok((r - e).abs() / r.abs())
            }
        })
        .collect()
}

/// Mean absolute percentage error of `estimate` against `reference`.
pub fn mape(reference: &DensityField, estimate: &DensityField) -> Result<f64> {
    let rel = relative_error(reference, estimate)?;
    Ok(100.0 * rel.iter().sum::<f64>() / rel.len() as f64)
}

/// Two-sample chi-square homogeneity test over per-site counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Fewer than two occupied bins or an expected count below 5.
    pub degenerate: bool,
}

impl ChiSquareTest {
    /// Homogeneity is not rejected at significance `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(QlbmError::Usage(format!(
            "count vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Ok(ChiSquareTest {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            degenerate: true,
        });
    }
    let total = (na + nb) as f64;
    let mut statistic = 0.0;
    let mut bins = 0usize;
    let mut min_expected = f64::INFINITY;
    for (&x, &y) in a.iter().zip(b) {
        let row = (x + y) as f64;
        if row == 0.0 {
            continue;
        }
        bins += 1;
        for (obs, n) in [(x, na), (y, nb)] {
            let e = row * n as f64 / total;
            min_expected = min_expected.min(e);
            statistic += (obs as f64 - e).powi(2) / e;
        }
    }
    let dof = bins.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64)
            .map_err(|e| QlbmError::Internal(format!("chi-square distribution: {e}")))?;
        dist.sf(statistic)
    };
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value,
        degenerate: dof == 0 || min_expected < 5.0,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
