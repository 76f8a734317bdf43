//! Rank-sum test and percentile bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StudyError;

/// Both groups at or below this size use the exact null distribution in `Auto`.
pub const EXACT_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Exact,
    NormalApprox,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Group A tends to be smaller.
    Less,
    /// Group A tends to be larger.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of group A: pairs with a > b, ties counting one half.
    pub u: f64,
    pub p: f64,
    /// `Exact` or `NormalApprox`, never `Auto`.
    pub method: Method,
    /// All values identical; p is 1 by definition.
    pub degenerate: bool,
}

/// Midranks of the pooled sample, doubled so that they are integers.
fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end, doubled midrank = start+1 + end
        let doubled = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        start = end;
    }
    ranks
}

fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        sum += t * t * t - t;
        i = j;
    }
    sum
}

/// Number of ways to pick `n_a` of the pooled items with each doubled rank sum.
fn rank_sum_counts(ranks: &[u64], n_a: usize) -> Vec<f64> {
    let max_sum: u64 = {
        let mut sorted = ranks.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted[..n_a].iter().sum()
    };
    let width = max_sum as usize + 1;
    // dp[k][s]: subsets of size k with doubled rank sum s
    let mut dp = vec![vec![0.0f64; width]; n_a + 1];
    dp[0][0] = 1.0;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=n_a).rev() {
            let (lower, upper) = dp.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r..width).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    dp.swap_remove(n_a)
}

fn validate(a: &[f64], b: &[f64]) -> Result<(), StudyError> {
    if a.is_empty() || b.is_empty() {
        return Err(StudyError::EmptyGroup);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StudyError::NonFinite);
    }
    Ok(())
}

pub fn mann_whitney(a: &[f64], b: &[f64], method: Method) -> Result<MannWhitney, StudyError> {
    mann_whitney_with(a, b, method, Alternative::TwoSided)
}

pub fn mann_whitney_with(
    a: &[f64],
    b: &[f64],
    method: Method,
    alternative: Alternative,
) -> Result<MannWhitney, StudyError> {
    validate(a, b)?;
    let (n_a, n_b) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let doubled_sum_a: u64 = ranks[..n_a].iter().sum();
    let offset = (n_a * (n_a + 1)) as f64 / 2.0;
    let u = doubled_sum_a as f64 / 2.0 - offset;
    let method = match method {
        Method::Auto if n_a <= EXACT_LIMIT && n_b <= EXACT_LIMIT => Method::Exact,
        Method::Auto => Method::NormalApprox,
        m => m,
    };
    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(MannWhitney { u, p: 1.0, method, degenerate: true });
    }
    let mean = (n_a * n_b) as f64 / 2.0;
    let p = match method {
        Method::Exact => {
            let counts = rank_sum_counts(&ranks, n_a);
            let total: f64 = counts.iter().sum();
            let eps = 1e-9;
            let mut hit = 0.0;
            for (s, &c) in counts.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let u_s = s as f64 / 2.0 - offset;
                let extreme = match alternative {
                    Alternative::TwoSided => (u_s - mean).abs() >= (u - mean).abs() - eps,
                    Alternative::Less => u_s <= u + eps,
                    Alternative::Greater => u_s >= u - eps,
                };
                if extreme {
                    hit += c;
                }
            }
            hit / total
        }
        _ => {
            let n = (n_a + n_b) as f64;
            let variance = (n_a * n_b) as f64 / 12.0 * ((n + 1.0) - tie_term(&pooled) / (n * (n - 1.0)));
            let sd = variance.sqrt();
            let normal = Normal::standard();
            match alternative {
                Alternative::TwoSided => {
                    let z = (((u - mean).abs() - 0.5) / sd).max(0.0);
                    2.0 * normal.sf(z)
                }
                Alternative::Less => normal.cdf((u - mean + 0.5) / sd),
                Alternative::Greater => normal.sf((u - mean - 0.5) / sd),
            }
        }
    };
    Ok(MannWhitney { u, p: p.min(1.0), method, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Statistic {
    Mean,
    Median,
}

impl Statistic {
    pub fn apply(self, sample: &[f64]) -> f64 {
        match self {
            Statistic::Mean => sample.iter().sum::<f64>() / sample.len() as f64,
            Statistic::Median => {
                let mut s = sample.to_vec();
                s.sort_by(f64::total_cmp);
                let mid = s.len() / 2;
                if s.len().is_multiple_of(2) {
                    (s[mid - 1] + s[mid]) / 2.0
                } else {
                    s[mid]
                }
            }
        }
    }
}

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Percentile interval over `resamples` seeded resamples with replacement.
pub fn bootstrap_ci(
    sample: &[f64],
    statistic: Statistic,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<Interval, StudyError> {
    if sample.is_empty() {
        return Err(StudyError::EmptyGroup);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StudyError::NonFinite);
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(StudyError::BootstrapConfig { level, resamples });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sample.len();
    let mut buffer = vec![0.0; n];
    let mut replicates: Vec<f64> = (0..resamples)
        .map(|_| {
            for slot in buffer.iter_mut() {
                *slot = sample[rng.random_range(0..n)];
            }
            statistic.apply(&buffer)
        })
        .collect();
    replicates.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_bounds(level, resamples);
    Ok(Interval { low: replicates[lo], high: replicates[hi] })
}

/// Indices into the sorted replicates: floor(a/2 B) and ceil((1 - a/2) B) - 1.
pub fn percentile_bounds(level: f64, resamples: usize) -> (usize, usize) {
    let alpha = 1.0 - level;
    let b = resamples as f64;
    // the small nudge keeps 0.025 * 10000 from landing on 249.99..
    let lo = ((alpha / 2.0 * b + 1e-9).floor() as usize).min(resamples - 1);
    let hi = (((1.0 - alpha / 2.0) * b - 1e-9).ceil() as usize).clamp(1, resamples) - 1;
    (lo, hi)
}
