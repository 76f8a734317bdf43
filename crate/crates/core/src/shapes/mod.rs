//! Rating histogram shapes and a generator of self-selected review corpora.

mod generator;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Review;

pub use generator::{
    generate_biased_corpus, latent_distribution, report_probability, study_corpus, BiasConfig,
    GeneratedHotel, GENERATOR_VERSION, GroundTruth, HotelManifest, Manifest, SyntheticVocab, STUDY_REVIEW_COUNTS,
};

/// Identifies the predicate set below; recorded in analysis outputs.
pub const SHAPE_RULES_VERSION: &str = "shape-rules/1";

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("histogram has no ratings")]
    EmptyHistogram,
    #[error("invalid bias configuration: {0}")]
    InvalidConfig(String),
    #[error("synthetic vocabulary: {0}")]
    InvalidVocab(String),
}

/// Counts of 1..=5 star ratings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatingHistogram(pub [u64; 5]);

impl RatingHistogram {
    pub fn from_reviews<'a>(reviews: impl IntoIterator<Item = &'a Review>) -> Self {
        let mut counts = [0u64; 5];
        for review in reviews {
            counts[usize::from(review.rating) - 1] += 1;
        }
        Self(counts)
    }

    /// Count for a star rating in 1..=5.
    pub fn count(&self, rating: u8) -> u64 {
        self.0[usize::from(rating) - 1]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| {
            self.0
                .iter()
                .enumerate()
                .map(|(i, &c)| (i as f64 + 1.0) * c as f64)
                .sum::<f64>()
                / total as f64
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShapeLabel {
    MonotonicIncreasing,
    JShaped,
    PositivelySkewed,
    Other,
}

impl fmt::Display for ShapeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeLabel::MonotonicIncreasing => "monotonic increasing",
            ShapeLabel::JShaped => "J-shaped",
            ShapeLabel::PositivelySkewed => "positively skewed",
            ShapeLabel::Other => "other",
        })
    }
}

/// Ratings never fall as the stars go up, and 5 stars beat 1 star.
pub fn is_monotonic_increasing(h: &RatingHistogram) -> bool {
    let c = h.0;
    c.windows(2).all(|w| w[0] <= w[1]) && c[4] > c[0]
}

/// More 1s than 2s, 5 stars is the mode, and the middle dips below both ends.
pub fn is_j_shaped(h: &RatingHistogram) -> bool {
    let c = h.0;
    let max = *c.iter().max().unwrap();
    let middle_min = c[1].min(c[2]).min(c[3]);
    c[0] > c[1] && c[4] == max && middle_min < c[0].min(c[4])
}

/// The mode sits strictly inside 2..=4 and beats both ends.
pub fn is_positively_skewed(h: &RatingHistogram) -> bool {
    let c = h.0;
    let peak = c[1].max(c[2]).max(c[3]);
    peak > c[4] && peak > c[0]
}

pub fn classify_shape(h: &RatingHistogram) -> Result<ShapeLabel, ShapeError> {
    if h.total() == 0 {
        return Err(ShapeError::EmptyHistogram);
    }
    Ok(if is_monotonic_increasing(h) {
        ShapeLabel::MonotonicIncreasing
    } else if is_j_shaped(h) {
        ShapeLabel::JShaped
    } else if is_positively_skewed(h) {
        ShapeLabel::PositivelySkewed
    } else {
        ShapeLabel::Other
    })
}

/// Share of 1- and 5-star ratings.
pub fn extremity_share(h: &RatingHistogram) -> Result<f64, ShapeError> {
    let total = h.total();
    if total == 0 {
        return Err(ShapeError::EmptyHistogram);
    }
    Ok((h.0[0] + h.0[4]) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(c: [u64; 5]) -> RatingHistogram {
        RatingHistogram(c)
    }

    #[test]
    fn canonical_shapes() {
        assert_eq!(classify_shape(&h([5, 10, 20, 40, 80])).unwrap(), ShapeLabel::MonotonicIncreasing);
        assert_eq!(classify_shape(&h([50, 10, 15, 30, 120])).unwrap(), ShapeLabel::JShaped);
        assert_eq!(classify_shape(&h([10, 30, 50, 40, 15])).unwrap(), ShapeLabel::PositivelySkewed);
        assert_eq!(classify_shape(&h([10, 10, 10, 10, 10])).unwrap(), ShapeLabel::Other);
    }

    #[test]
    fn empty_histogram() {
        assert_eq!(classify_shape(&h([0; 5])), Err(ShapeError::EmptyHistogram));
        assert_eq!(extremity_share(&h([0; 5])), Err(ShapeError::EmptyHistogram));
    }

    #[test]
    fn extremity_examples() {
        assert_eq!(extremity_share(&h([10, 0, 0, 0, 10])).unwrap(), 1.0);
        assert_eq!(extremity_share(&h([0, 10, 10, 10, 0])).unwrap(), 0.0);
        let share = extremity_share(&h([50, 10, 15, 30, 120])).unwrap();
        assert!((share - 170.0 / 225.0).abs() < 1e-12);
        assert!((share - 0.756).abs() < 5e-4);
    }

    #[test]
    fn predicates_are_disjoint_on_small_histograms() {
        for a in 0..=12u64 {
            for b in 0..=12 {
                for c in 0..=12 {
                    for d in 0..=12 {
                        for e in 0..=12 {
                            let x = h([a, b, c, d, e]);
                            let hits = [is_monotonic_increasing(&x), is_j_shaped(&x), is_positively_skewed(&x)]
                                .iter()
                                .filter(|&&v| v)
                                .count();
                            assert!(hits <= 1, "{:?}", x.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn histogram_from_reviews() {
        use chrono::NaiveDate;
        let reviews: Vec<Review> = [5u8, 5, 1, 3]
            .iter()
            .enumerate()
            .map(|(i, &rating)| Review {
                review_id: i.to_string(),
                hotel_id: "h".into(),
                rating,
                text: String::new(),
                timestamp: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
                reviewer_review_count: 1,
                reviewer_vote_count: 0,
                display_name: String::new(),
            })
            .collect();
        let hist = RatingHistogram::from_reviews(&reviews);
        assert_eq!(hist.0, [1, 0, 1, 0, 2]);
        assert_eq!(hist.mean(), Some(3.5));
    }
}
