//! Nonparametric statistics: median/IQR aggregation, the Wilcoxon rank-sum
//! test, and Holm-Bonferroni multiple-comparison correction.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Threshold below which the rank-sum p-value is computed by full
/// enumeration of rank assignments instead of the normal approximation.
pub const EXACT_ENUMERATION_LIMIT: usize = 12;

/// Median and interquartile range with linear interpolation between order
/// statistics (the same quantile convention as numpy's default).
pub fn median_iqr(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("median of empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    };
    Ok((q(0.5), q(0.75) - q(0.25)))
}

/// Mid-ranks of the pooled sample, in pooled order.
fn mid_ranks(pooled: &[f64]) -> Vec<f64> {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1..=j+1.
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon rank-sum p-value with mid-ranks for ties. Exact by
/// enumeration of all rank assignments when the pooled size is at most
/// [`EXACT_ENUMERATION_LIMIT`]; otherwise the normal approximation with tie
/// and continuity corrections. Always in (0, 1].
pub fn wilcoxon_rank_sum(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidArgument(
            "rank-sum test needs two non-empty samples".into(),
        ));
    }
    let n = xs.len();
    let m = ys.len();
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = mid_ranks(&pooled);
    let w_obs: f64 = ranks[..n].iter().sum();
    let mean = n as f64 * (n + m + 1) as f64 / 2.0;

    if n + m <= EXACT_ENUMERATION_LIMIT {
        // Permutation test over which pooled positions belong to xs.
        let dev_obs = (w_obs - mean).abs();
        let mut extreme = 0u64;
        let mut total = 0u64;
        let mut comb: Vec<usize> = (0..n).collect();
        loop {
            let w: f64 = comb.iter().map(|&i| ranks[i]).sum();
            total += 1;
            if (w - mean).abs() >= dev_obs - 1e-12 {
                extreme += 1;
            }
            // Next combination of n indices out of n + m.
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(extreme as f64 / total as f64);
                }
                i -= 1;
                if comb[i] != i + m {
                    break;
                }
            }
            comb[i] += 1;
            for j in i + 1..n {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }

    // Normal approximation with tie correction.
    let nm = (n + m) as f64;
    let tie_term: f64 = {
        let mut sorted = pooled.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut sum = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            sum += t * t * t - t;
            i = j + 1;
        }
        sum
    };
    let var = (n * m) as f64 / 12.0 * (nm + 1.0 - tie_term / (nm * (nm - 1.0)));
    if var <= 0.0 {
        return Ok(1.0); // all observations tied
    }
    let diff = w_obs - mean;
    // Continuity correction shrinks the deviation toward zero.
    let z = (diff.abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = 2.0 * (1.0 - normal.cdf(z));
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Holm-Bonferroni step-down adjustment. Input order is preserved.
pub fn holm_bonferroni(ps: &[f64]) -> Result<Vec<f64>> {
    for &p in ps {
        if !(0.0 < p && p <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "p-value {p} outside (0, 1]"
            )));
        }
    }
    let m = ps.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ps[a].partial_cmp(&ps[b]).unwrap());
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * ps[idx]).min(1.0);
        running = running.max(scaled);
        adjusted[idx] = running;
    }
    Ok(adjusted)
}
