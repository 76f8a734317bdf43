//! One-decimal percentages that add up to exactly 100.0.

/// Largest-remainder rounding to tenths of a percent. All zeros when the
/// counts sum to zero; ties in the remainder go to the earlier entry.
pub fn round_percentages(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    let scaled: Vec<(u64, u64)> = counts
        .iter()
        .map(|&c| ((c * 1000) / total, (c * 1000) % total))
        .collect();
    let mut tenths: Vec<u64> = scaled.iter().map(|&(q, _)| q).collect();
    let short = 1000 - tenths.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| scaled[b].1.cmp(&scaled[a].1).then(a.cmp(&b)));
    for &i in order.iter().take(short as usize) {
        tenths[i] += 1;
    }
    tenths.into_iter().map(|t| t as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thirds() {
        assert_eq!(round_percentages(&[2, 1]), vec![66.7, 33.3]);
        assert_eq!(round_percentages(&[1, 1, 1]), vec![33.4, 33.3, 33.3]);
    }

    #[test]
    fn zeros() {
        assert_eq!(round_percentages(&[0, 0]), vec![0.0, 0.0]);
        assert!(round_percentages(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn sums_to_one_hundred(counts in proptest::collection::vec(0u64..10_000, 1..12)) {
            let pct = round_percentages(&counts);
            if counts.iter().sum::<u64>() > 0 {
                let tenths: i64 = pct.iter().map(|p| (p * 10.0).round() as i64).sum();
                prop_assert_eq!(tenths, 1000);
            }
            for (p, &c) in pct.iter().zip(&counts) {
                let exact = 100.0 * c as f64 / counts.iter().sum::<u64>().max(1) as f64;
                prop_assert!((p - exact).abs() <= 0.1 + 1e-9);
            }
        }
    }
}
