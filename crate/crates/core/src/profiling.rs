//! Reviewer experience levels: six ordered tiers on two axes (reviews
//! written, helpful votes received), modelled on platform reviewer badges.
//!
//! Only the outer tiers are fixed: a single review (or zero votes) is the
//! newest tier and anything above 100 is the top tier. The four interior cut
//! points are configurable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Review;

pub const LEVELS: usize = 6;
/// Counts strictly above this value always land in the top tier.
pub const TOP_THRESHOLD: u32 = 100;

#[derive(Debug, Error, PartialEq)]
pub enum ProfilingError {
    #[error("a reviewer has written at least one review; got count 0")]
    ZeroReviewsWritten,
    #[error("review {review_id}: {source}")]
    Review {
        review_id: String,
        #[source]
        source: Box<ProfilingError>,
    },
    #[error("invalid {axis:?} scheme: {message}")]
    InvalidScheme { axis: Axis, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ReviewsWritten,
    HelpfulVotes,
}

impl Axis {
    /// Smallest valid count on this axis.
    pub fn min_count(self) -> u32 {
        match self {
            Axis::ReviewsWritten => 1,
            Axis::HelpfulVotes => 0,
        }
    }

    pub fn count_of(self, review: &Review) -> u32 {
        match self {
            Axis::ReviewsWritten => review.reviewer_review_count,
            Axis::HelpfulVotes => review.reviewer_vote_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceLevel {
    pub axis: Axis,
    pub level_index: u8,
    pub label: String,
}

/// Five inclusive upper bounds for tiers 0..=4; tier 5 is everything above
/// the last bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceScheme {
    pub axis: Axis,
    pub boundaries: [u32; LEVELS - 1],
    pub labels: [String; LEVELS],
}

impl ExperienceScheme {
    pub fn default_for(axis: Axis) -> Self {
        match axis {
            Axis::ReviewsWritten => Self {
                axis,
                boundaries: [1, 5, 20, 50, 100],
                labels: [
                    "New Reviewer".into(),
                    "Level 2".into(),
                    "Level 3".into(),
                    "Level 4".into(),
                    "Level 5".into(),
                    "Top Reviewer".into(),
                ],
            },
            Axis::HelpfulVotes => Self {
                axis,
                boundaries: [0, 5, 20, 50, 100],
                labels: [
                    "New Contributor".into(),
                    "Level 2".into(),
                    "Level 3".into(),
                    "Level 4".into(),
                    "Level 5".into(),
                    "Top Contributor".into(),
                ],
            },
        }
    }

    pub fn validate(&self) -> Result<(), ProfilingError> {
        let invalid = |message: String| ProfilingError::InvalidScheme {
            axis: self.axis,
            message,
        };
        if !self.boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid(format!(
                "boundaries {:?} are not strictly ascending",
                self.boundaries
            )));
        }
        if self.boundaries[0] != self.axis.min_count() {
            return Err(invalid(format!(
                "the first tier must hold exactly count {}",
                self.axis.min_count()
            )));
        }
        if self.boundaries[LEVELS - 2] != TOP_THRESHOLD {
            return Err(invalid(format!(
                "the top tier must start above {TOP_THRESHOLD}"
            )));
        }
        Ok(())
    }

    pub fn level_index(&self, count: u32) -> u8 {
        self.boundaries.iter().filter(|&&b| count > b).count() as u8
    }
}

pub fn classify_reviewer(
    count: u32,
    scheme: &ExperienceScheme,
) -> Result<ExperienceLevel, ProfilingError> {
    if count < scheme.axis.min_count() {
        return Err(ProfilingError::ZeroReviewsWritten);
    }
    let level_index = scheme.level_index(count);
    Ok(ExperienceLevel {
        axis: scheme.axis,
        level_index,
        label: scheme.labels[level_index as usize].clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewerProfile {
    pub reviews_written: ExperienceLevel,
    pub helpful_votes: ExperienceLevel,
}

/// Labels every review's author on both axes.
pub fn profile_reviews<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    written: &ExperienceScheme,
    votes: &ExperienceScheme,
) -> Result<BTreeMap<String, ReviewerProfile>, ProfilingError> {
    let with_context = |review: &Review| {
        let id = review.review_id.clone();
        move |source| ProfilingError::Review {
            review_id: id,
            source: Box::new(source),
        }
    };
    reviews
        .into_iter()
        .map(|review| {
            let profile = ReviewerProfile {
                reviews_written: classify_reviewer(review.reviewer_review_count, written)
                    .map_err(with_context(review))?,
                helpful_votes: classify_reviewer(review.reviewer_vote_count, votes)
                    .map_err(with_context(review))?,
            };
            Ok((review.review_id.clone(), profile))
        })
        .collect()
}
