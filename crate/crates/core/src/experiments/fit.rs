//! Log-log rate fits and empirical frequencies.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Median and quartiles of one grid size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Least-squares line through `(log N, log value)`.
///
/// `slope`, `intercept` and `r_squared` are `None` when fewer than two
/// distinct `N` carry data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub per_n: Vec<PerN>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fit through every point given.
pub fn fit_loglog(points: &[(usize, f64)]) -> Result<RateEstimate> {
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*v > 0.0 && v.is_finite()) || *n == 0) {
        return Err(Error::Domain(format!("log-log fit needs positive data, got ({n}, {v})")));
    }
    let mut ns: Vec<usize> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::InvalidParameter("log-log fit needs at least two distinct N".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / len, ys.iter().sum::<f64>() / len);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RateEstimate { slope: Some(slope), intercept: Some(intercept), r_squared: Some(r2), per_n: Vec::new() })
}

/// Per-`N` medians and quartiles of raw `(N, value)` data, with the fit
/// through the medians. Non-finite values are ignored.
pub fn summarize(raw: &[(usize, f64)]) -> Result<RateEstimate> {
    let mut ns: Vec<usize> = raw.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    let per_n: Vec<PerN> = ns
        .iter()
        .filter_map(|&n| {
            let mut v: Vec<f64> = raw.iter().filter(|p| p.0 == n && p.1.is_finite()).map(|p| p.1).collect();
            if v.is_empty() {
                return None;
            }
            v.sort_by(f64::total_cmp);
            Some(PerN { n, median: quantile(&v, 0.5), q25: quantile(&v, 0.25), q75: quantile(&v, 0.75) })
        })
        .collect();
    let medians: Vec<(usize, f64)> = per_n.iter().map(|p| (p.n, p.median)).collect();
    let mut est = if medians.len() >= 2 {
        fit_loglog(&medians)?
    } else {
        RateEstimate { slope: None, intercept: None, r_squared: None, per_n: Vec::new() }
    };
    est.per_n = per_n;
    Ok(est)
}

/// Success frequency with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub successes: usize,
    pub trials: usize,
    pub frequency: f64,
    pub lower: f64,
    pub upper: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

pub fn empirical_high_probability(indicators: &[bool]) -> Result<Frequency> {
    if indicators.is_empty() {
        return Err(Error::InvalidParameter("no trials".into()));
    }
    let n = indicators.len() as f64;
    let k = indicators.iter().filter(|&&b| b).count();
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(Frequency {
        successes: k,
        trials: indicators.len(),
        frequency: p,
        lower: (centre - half).max(0.0),
        upper: (centre + half).min(1.0),
    })
}
