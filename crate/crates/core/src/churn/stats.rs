use serde::{Deserialize, Serialize};

/// Which standard deviation the outlier tests use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deviation {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChurnSummary {
    pub mean: f64,
    pub stddev: f64,
    pub n_files: usize,
}

pub fn churn_summary(values: &[u64], deviation: Deviation) -> Option<ChurnSummary> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    let denom = match deviation {
        Deviation::Population => n as f64,
        Deviation::Sample if n > 1 => (n - 1) as f64,
        Deviation::Sample => {
            return Some(ChurnSummary {
                mean,
                stddev: 0.0,
                n_files: n,
            })
        }
    };
    Some(ChurnSummary {
        mean,
        stddev: (ss / denom).sqrt(),
        n_files: n,
    })
}

/// Whether `value > mean + k·stddev` over `values`.
///
/// With n·value − Σv = L and n·Σv² − (Σv)² = D the test reduces to
/// L² > k²·D (population) or L²·(n−1) > k²·D·n (sample), which is evaluated
/// in exact integer arithmetic whenever k² is integral. Boundary cases such
/// as a single outlier among ten equal values then compare as equal instead
/// of depending on rounding.
pub fn exceeds_sigma(value: u64, values: &[u64], k: f64, deviation: Deviation) -> bool {
    let n = values.len() as u128;
    if n == 0 {
        return false;
    }
    let sum: u128 = values.iter().map(|&v| v as u128).sum();
    let sum_sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let scaled = n as i128 * value as i128 - sum as i128;
    if scaled <= 0 {
        return false;
    }
    let lhs = (scaled as u128) * (scaled as u128);
    let spread = n * sum_sq - sum * sum;
    let k2 = k * k;
    let (lhs_scale, rhs_scale) = match deviation {
        Deviation::Population => (1, 1),
        Deviation::Sample if n > 1 => (n - 1, n),
        Deviation::Sample => return true,
    };
    if k2.fract() == 0.0 && (0.0..1e15).contains(&k2) {
        let k2 = k2 as u128;
        if let (Some(l), Some(r)) = (
            lhs.checked_mul(lhs_scale),
            spread
                .checked_mul(k2)
                .and_then(|x| x.checked_mul(rhs_scale)),
        ) {
            return l > r;
        }
    }
    (lhs as f64) * (lhs_scale as f64) > k2 * (spread as f64) * (rhs_scale as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub iqr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("cannot summarize an empty list")]
    EmptyInput,
    #[error("input contains NaN")]
    NotANumber,
}

/// Quantile by linear interpolation between order statistics (R type 7).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<DescriptiveStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DescriptiveStats {
        min: sorted[0],
        median: quantile_sorted(&sorted, 0.5),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        max: sorted[sorted.len() - 1],
        iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        n: sorted.len(),
    })
}
