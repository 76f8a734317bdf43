//! Pie-under-bar payloads: how the reviews behind each star rating split
//! across the categories of one information type, the per-category view
//! across ratings, and review filtering by rating and category.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspects::Aspect;
use crate::corpus::{Hotel, Review};
use crate::percent::round_percentages;
use crate::profiling::{ExperienceLevel, ExperienceScheme, ReviewerProfile};
use crate::sentiment::EmotionCategory;

/// Ratings in display order, top bar first.
pub const RATINGS_DESC: [u8; 5] = [5, 4, 3, 2, 1];

#[derive(Debug, Error, PartialEq)]
pub enum TransparencyError {
    #[error("unknown information type `{0}`")]
    UnknownInfoType(String),
    #[error("unknown category `{category_id}` for {info_type}")]
    UnknownCategory {
        info_type: InfoType,
        category_id: String,
    },
    #[error("rating {0} is outside 1..=5")]
    InvalidRating(u8),
    #[error("page size must be positive")]
    ZeroPageSize,
    #[error("category labels `{0}` collide after normalization")]
    DuplicateCategory(String),
    #[error("labels were computed for {found}, expected {expected}")]
    LabelMismatch { expected: InfoType, found: InfoType },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InfoType {
    ReviewsWritten,
    HelpfulVotes,
    Emotion,
    Aspects,
}

impl InfoType {
    pub const ALL: [InfoType; 4] = [
        InfoType::ReviewsWritten,
        InfoType::HelpfulVotes,
        InfoType::Emotion,
        InfoType::Aspects,
    ];

    pub fn id(self) -> &'static str {
        match self {
            InfoType::ReviewsWritten => "REVIEWS_WRITTEN",
            InfoType::HelpfulVotes => "HELPFUL_VOTES",
            InfoType::Emotion => "EMOTION",
            InfoType::Aspects => "ASPECTS",
        }
    }
}

impl fmt::Display for InfoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for InfoType {
    type Err = TransparencyError;

    /// Accepts the upper-case id or its lower-case / kebab-case spelling.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        InfoType::ALL
            .into_iter()
            .find(|t| t.id() == norm)
            .ok_or_else(|| TransparencyError::UnknownInfoType(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: String,
    pub label: String,
    /// 1-based legend position (e1, e2, ...).
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryScheme {
    pub info_type: InfoType,
    pub categories: Vec<Category>,
}

fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.trim().chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

impl CategoryScheme {
    fn from_pairs(
        info_type: InfoType,
        pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, TransparencyError> {
        let mut seen = BTreeSet::new();
        let mut categories = Vec::new();
        for (i, (id, label)) in pairs.into_iter().enumerate() {
            if !seen.insert(id.clone()) {
                return Err(TransparencyError::DuplicateCategory(label));
            }
            categories.push(Category { id, label, order: i + 1 });
        }
        Ok(Self { info_type, categories })
    }

    /// Legend runs from the most positive to the most negative emotion.
    pub fn emotion() -> Self {
        let pairs = EmotionCategory::ALL
            .iter()
            .rev()
            .map(|c| (c.id().to_string(), c.label().to_string()));
        Self::from_pairs(InfoType::Emotion, pairs).expect("emotion ids are unique")
    }

    pub fn aspects() -> Self {
        let pairs = Aspect::ALL.iter().map(|a| (a.id().to_string(), a.label().to_string()));
        Self::from_pairs(InfoType::Aspects, pairs).expect("aspect ids are unique")
    }

    /// Legend runs from the most experienced tier down to new reviewers.
    pub fn experience(scheme: &ExperienceScheme) -> Result<Self, TransparencyError> {
        let info_type = match scheme.axis {
            crate::profiling::Axis::ReviewsWritten => InfoType::ReviewsWritten,
            crate::profiling::Axis::HelpfulVotes => InfoType::HelpfulVotes,
        };
        let pairs = scheme.labels.iter().rev().map(|l| (slug(l), l.clone()));
        Self::from_pairs(info_type, pairs)
    }

    pub fn contains(&self, category_id: &str) -> bool {
        self.categories.iter().any(|c| c.id == category_id)
    }

    fn check(&self, category_id: &str) -> Result<(), TransparencyError> {
        if self.contains(category_id) {
            Ok(())
        } else {
            Err(TransparencyError::UnknownCategory {
                info_type: self.info_type,
                category_id: category_id.to_string(),
            })
        }
    }
}

/// Category ids carried by each review for one information type. Reviews
/// without an entry are unlabeled and stay out of every pie.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub info_type: Option<InfoType>,
    pub by_review: BTreeMap<String, Vec<String>>,
}

impl Labels {
    pub fn emotions(map: &BTreeMap<String, EmotionCategory>) -> Self {
        Self {
            info_type: Some(InfoType::Emotion),
            by_review: map.iter().map(|(id, c)| (id.clone(), vec![c.id().to_string()])).collect(),
        }
    }

    pub fn aspects(map: &BTreeMap<String, BTreeSet<Aspect>>) -> Self {
        Self {
            info_type: Some(InfoType::Aspects),
            by_review: map
                .iter()
                .map(|(id, set)| (id.clone(), set.iter().map(|a| a.id().to_string()).collect()))
                .collect(),
        }
    }

    pub fn experience(profiles: &BTreeMap<String, ReviewerProfile>, info_type: InfoType) -> Self {
        let pick: fn(&ReviewerProfile) -> &ExperienceLevel = match info_type {
            InfoType::HelpfulVotes => |p| &p.helpful_votes,
            _ => |p| &p.reviews_written,
        };
        Self {
            info_type: Some(info_type),
            by_review: profiles
                .iter()
                .map(|(id, p)| (id.clone(), vec![slug(&pick(p).label)]))
                .collect(),
        }
    }

    pub fn of(&self, review_id: &str) -> Option<&[String]> {
        self.by_review.get(review_id).map(Vec::as_slice)
    }

    pub fn carries(&self, review_id: &str, category_id: &str) -> bool {
        self.of(review_id).is_some_and(|ids| ids.iter().any(|c| c == category_id))
    }

    fn check(&self, scheme: &CategoryScheme) -> Result<(), TransparencyError> {
        if let Some(found) = self.info_type {
            if found != scheme.info_type {
                return Err(TransparencyError::LabelMismatch {
                    expected: scheme.info_type,
                    found,
                });
            }
        }
        for ids in self.by_review.values() {
            for id in ids {
                scheme.check(id)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub category_id: String,
    pub count: u64,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub rating: u8,
    /// Label count; exceeds `distinct_reviews` when reviews carry several labels.
    pub total: u64,
    pub distinct_reviews: u64,
    pub slices: Vec<Slice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransparencyBreakdown {
    pub hotel_id: String,
    pub info_type: InfoType,
    pub categories: Vec<Category>,
    pub bars: Vec<Bar>,
    pub link_weights: BTreeMap<String, f64>,
}

impl TransparencyBreakdown {
    pub fn bar(&self, rating: u8) -> Option<&Bar> {
        self.bars.iter().find(|b| b.rating == rating)
    }

    pub fn count(&self, rating: u8, category_id: &str) -> u64 {
        self.bar(rating)
            .and_then(|b| b.slices.iter().find(|s| s.category_id == category_id))
            .map_or(0, |s| s.count)
    }
}

fn counts_by_category<'a>(
    scheme: &CategoryScheme,
    reviews: impl Iterator<Item = &'a Review>,
    labels: &Labels,
) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; scheme.categories.len()];
    let mut distinct = 0;
    for review in reviews {
        let Some(ids) = labels.of(&review.review_id) else {
            continue;
        };
        if ids.is_empty() {
            continue;
        }
        distinct += 1;
        for (slot, category) in counts.iter_mut().zip(&scheme.categories) {
            if ids.contains(&category.id) {
                *slot += 1;
            }
        }
    }
    (counts, distinct)
}

pub fn build_breakdown(
    hotel: &Hotel,
    scheme: &CategoryScheme,
    labels: &Labels,
) -> Result<TransparencyBreakdown, TransparencyError> {
    labels.check(scheme)?;
    let bars: Vec<Bar> = RATINGS_DESC
        .iter()
        .map(|&rating| {
            let (counts, distinct) =
                counts_by_category(scheme, hotel.reviews.iter().filter(|r| r.rating == rating), labels);
            let pct = round_percentages(&counts);
            let slices = scheme
                .categories
                .iter()
                .zip(counts.iter().zip(pct))
                .filter(|(_, (&count, _))| count > 0)
                .map(|(category, (&count, pct))| Slice {
                    category_id: category.id.clone(),
                    count,
                    pct,
                })
                .collect();
            Bar {
                rating,
                total: counts.iter().sum(),
                distinct_reviews: distinct,
                slices,
            }
        })
        .collect();
    let link_weights = bar_link_weights(&bars);
    Ok(TransparencyBreakdown {
        hotel_id: hotel.id().to_string(),
        info_type: scheme.info_type,
        categories: scheme.categories.clone(),
        bars,
        link_weights,
    })
}

/// Bar total relative to the largest bar; all zero when every bar is empty.
pub fn bar_link_weights(bars: &[Bar]) -> BTreeMap<String, f64> {
    let max = bars.iter().map(|b| b.total).max().unwrap_or(0);
    (1..=5u8)
        .map(|rating| {
            let total = bars.iter().find(|b| b.rating == rating).map_or(0, |b| b.total);
            let weight = if max == 0 { 0.0 } else { total as f64 / max as f64 };
            (rating.to_string(), weight)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingShare {
    pub rating: u8,
    pub count: u64,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySlice {
    pub hotel_id: String,
    pub info_type: InfoType,
    pub category_id: String,
    pub total: u64,
    /// Ratings 5 down to 1.
    pub per_rating: Vec<RatingShare>,
}

impl CategorySlice {
    pub fn count(&self, rating: u8) -> u64 {
        self.per_rating.iter().find(|s| s.rating == rating).map_or(0, |s| s.count)
    }
}

pub fn build_category_slice(
    hotel: &Hotel,
    scheme: &CategoryScheme,
    category_id: &str,
    labels: &Labels,
) -> Result<CategorySlice, TransparencyError> {
    scheme.check(category_id)?;
    labels.check(scheme)?;
    let counts: Vec<u64> = RATINGS_DESC
        .iter()
        .map(|&rating| {
            hotel
                .reviews
                .iter()
                .filter(|r| r.rating == rating && labels.carries(&r.review_id, category_id))
                .count() as u64
        })
        .collect();
    let pct = round_percentages(&counts);
    Ok(CategorySlice {
        hotel_id: hotel.id().to_string(),
        info_type: scheme.info_type,
        category_id: category_id.to_string(),
        total: counts.iter().sum(),
        per_rating: RATINGS_DESC
            .iter()
            .zip(counts.iter().zip(pct))
            .map(|(&rating, (&count, pct))| RatingShare { rating, count, pct })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CategoryFilter<'a> {
    pub scheme: &'a CategoryScheme,
    pub labels: &'a Labels,
    pub category_id: &'a str,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Selector<'a> {
    pub rating: Option<u8>,
    pub category: Option<CategoryFilter<'a>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewPage {
    pub items: Vec<Review>,
    /// Matches across all pages.
    pub total: usize,
    /// 0-based.
    pub page: usize,
    pub page_size: usize,
    pub has_more: bool,
}

/// Reviews matching every given predicate, newest first (ties by id).
/// A page past the end is empty.
pub fn filter_reviews(
    hotel: &Hotel,
    selector: &Selector<'_>,
    page: usize,
    page_size: usize,
) -> Result<ReviewPage, TransparencyError> {
    if page_size == 0 {
        return Err(TransparencyError::ZeroPageSize);
    }
    if let Some(r) = selector.rating {
        if !(1..=5).contains(&r) {
            return Err(TransparencyError::InvalidRating(r));
        }
    }
    if let Some(filter) = &selector.category {
        filter.scheme.check(filter.category_id)?;
        filter.labels.check(filter.scheme)?;
    }
    let mut matches: Vec<&Review> = hotel
        .reviews
        .iter()
        .filter(|r| selector.rating.is_none_or(|want| r.rating == want))
        .filter(|r| {
            selector
                .category
                .is_none_or(|f| f.labels.carries(&r.review_id, f.category_id))
        })
        .collect();
    matches.sort_by(|a, b| {
        b.timestamp
            .cmp(&a.timestamp)
            .then_with(|| a.review_id.cmp(&b.review_id))
    });
    let total = matches.len();
    let start = page.saturating_mul(page_size).min(total);
    let end = start.saturating_add(page_size).min(total);
    Ok(ReviewPage {
        items: matches[start..end].iter().map(|r| (*r).clone()).collect(),
        total,
        page,
        page_size,
        has_more: end < total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::HotelMeta;
    use crate::profiling::{profile_reviews, Axis};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn review(id: &str, rating: u8, day: u32) -> Review {
        Review {
            review_id: id.into(),
            hotel_id: "h".into(),
            rating,
            text: "text".into(),
            timestamp: NaiveDate::from_ymd_opt(2019, 1, day).unwrap(),
            reviewer_review_count: 1,
            reviewer_vote_count: 0,
            display_name: String::new(),
        }
    }

    fn hotel(reviews: Vec<Review>) -> Hotel {
        Hotel {
            meta: HotelMeta {
                hotel_id: "h".into(),
                name: "H".into(),
                price_per_night: None,
                star_class: None,
                photo: None,
            },
            reviews,
        }
    }

    fn emotions(pairs: &[(&str, EmotionCategory)]) -> Labels {
        Labels::emotions(&pairs.iter().map(|(id, c)| (id.to_string(), *c)).collect())
    }

    #[test]
    fn info_type_parsing() {
        assert_eq!("emotion".parse::<InfoType>().unwrap(), InfoType::Emotion);
        assert_eq!("reviews-written".parse::<InfoType>().unwrap(), InfoType::ReviewsWritten);
        assert_eq!("HELPFUL_VOTES".parse::<InfoType>().unwrap(), InfoType::HelpfulVotes);
        assert!(matches!("mood".parse::<InfoType>(), Err(TransparencyError::UnknownInfoType(_))));
    }

    #[test]
    fn legends() {
        let e = CategoryScheme::emotion();
        assert_eq!(e.categories[0].id, "positive_only");
        assert_eq!(e.categories[4].id, "negative_only");
        assert_eq!(e.categories[4].order, 5);
        let x = CategoryScheme::experience(&ExperienceScheme::default_for(Axis::ReviewsWritten)).unwrap();
        let ids: Vec<_> = x.categories.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["top_reviewer", "level_5", "level_4", "level_3", "level_2", "new_reviewer"]);
        let mut clash = ExperienceScheme::default_for(Axis::HelpfulVotes);
        clash.labels[1] = "Level 3".into();
        assert!(matches!(
            CategoryScheme::experience(&clash),
            Err(TransparencyError::DuplicateCategory(_))
        ));
    }

    #[test]
    fn two_five_star_reviews_split_evenly() {
        use EmotionCategory::*;
        let h = hotel(vec![review("a", 5, 1), review("b", 5, 2)]);
        let b = build_breakdown(&h, &CategoryScheme::emotion(), &emotions(&[("a", PositiveOnly), ("b", Positive)]))
            .unwrap();
        let five = b.bar(5).unwrap();
        assert_eq!(five.total, 2);
        assert_eq!(
            five.slices,
            vec![
                Slice { category_id: "positive_only".into(), count: 1, pct: 50.0 },
                Slice { category_id: "positive".into(), count: 1, pct: 50.0 },
            ]
        );
        let one = b.bar(1).unwrap();
        assert_eq!(one.total, 0);
        assert!(one.slices.is_empty());
        assert_eq!(b.bars.iter().map(|b| b.rating).collect::<Vec<_>>(), [5, 4, 3, 2, 1]);
        assert_eq!(b.link_weights["5"], 1.0);
        assert_eq!(b.link_weights["1"], 0.0);
    }

    #[test]
    fn aspect_bars_count_label_pairs() {
        let h = hotel(vec![review("a", 4, 1), review("b", 4, 2), review("c", 4, 3)]);
        let labels = Labels::aspects(&BTreeMap::from([
            ("a".to_string(), BTreeSet::from([Aspect::Food, Aspect::Service])),
            ("b".to_string(), BTreeSet::from([Aspect::Food])),
            ("c".to_string(), BTreeSet::new()),
        ]));
        let b = build_breakdown(&h, &CategoryScheme::aspects(), &labels).unwrap();
        let four = b.bar(4).unwrap();
        assert_eq!(four.total, 3);
        assert_eq!(four.distinct_reviews, 2);
        assert_eq!(b.count(4, "food"), 2);
        assert_eq!(four.slices[0].pct, 66.7);
        assert_eq!(four.slices[1].pct, 33.3);
    }

    #[test]
    fn mismatched_or_unknown_labels() {
        let h = hotel(vec![review("a", 4, 1)]);
        let wrong = emotions(&[("a", EmotionCategory::Neutral)]);
        assert!(matches!(
            build_breakdown(&h, &CategoryScheme::aspects(), &wrong),
            Err(TransparencyError::LabelMismatch { .. })
        ));
        let stray = Labels {
            info_type: None,
            by_review: BTreeMap::from([("a".to_string(), vec!["spa".to_string()])]),
        };
        assert!(matches!(
            build_breakdown(&h, &CategoryScheme::aspects(), &stray),
            Err(TransparencyError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn link_weight_arithmetic() {
        let bars: Vec<Bar> = [(1, 50), (2, 10), (3, 15), (4, 30), (5, 120)]
            .iter()
            .map(|&(rating, total)| Bar { rating, total, distinct_reviews: total, slices: vec![] })
            .collect();
        let w = bar_link_weights(&bars);
        let want = [("1", 50.0 / 120.0), ("2", 10.0 / 120.0), ("3", 0.125), ("4", 0.25), ("5", 1.0)];
        for (k, v) in want {
            assert!((w[k] - v).abs() < 1e-12);
        }
        assert!((w["1"] - 0.417).abs() < 5e-4);
        assert!((w["2"] - 0.083).abs() < 5e-4);
        let flat: Vec<Bar> = (1..=5).map(|rating| Bar { rating, total: 10, distinct_reviews: 10, slices: vec![] }).collect();
        assert!(bar_link_weights(&flat).values().all(|&w| w == 1.0));
    }

    #[test]
    fn category_slice_views() {
        use EmotionCategory::*;
        let h = hotel(vec![review("a", 1, 1), review("b", 1, 2), review("c", 5, 3)]);
        let labels = emotions(&[("a", NegativeOnly), ("b", NegativeOnly), ("c", PositiveOnly)]);
        let s = build_category_slice(&h, &CategoryScheme::emotion(), "negative_only", &labels).unwrap();
        assert_eq!(s.total, 2);
        assert_eq!(s.per_rating.last().unwrap(), &RatingShare { rating: 1, count: 2, pct: 100.0 });
        let empty = build_category_slice(&h, &CategoryScheme::emotion(), "neutral", &labels).unwrap();
        assert_eq!(empty.total, 0);
        assert!(empty.per_rating.iter().all(|r| r.count == 0 && r.pct == 0.0));
        assert!(matches!(
            build_category_slice(&h, &CategoryScheme::emotion(), "furious", &labels),
            Err(TransparencyError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn filtering_and_pages() {
        use EmotionCategory::*;
        let h = hotel(vec![
            review("a", 1, 1),
            review("b", 1, 3),
            review("c", 1, 3),
            review("d", 5, 9),
        ]);
        let labels = emotions(&[("a", NegativeOnly), ("b", NegativeOnly), ("c", Negative), ("d", PositiveOnly)]);
        let scheme = CategoryScheme::emotion();
        let all = filter_reviews(&h, &Selector::default(), 0, 10).unwrap();
        let ids: Vec<_> = all.items.iter().map(|r| r.review_id.as_str()).collect();
        assert_eq!(ids, ["d", "b", "c", "a"]);
        assert!(!all.has_more);

        let sel = Selector {
            rating: Some(1),
            category: Some(CategoryFilter { scheme: &scheme, labels: &labels, category_id: "negative_only" }),
        };
        let page = filter_reviews(&h, &sel, 0, 1).unwrap();
        assert_eq!(page.total, 2);
        assert_eq!(page.items[0].review_id, "b");
        assert!(page.has_more);
        let last = filter_reviews(&h, &sel, 1, 1).unwrap();
        assert_eq!(last.items[0].review_id, "a");
        assert!(!last.has_more);
        let beyond = filter_reviews(&h, &sel, 7, 1).unwrap();
        assert!(beyond.items.is_empty());
        assert_eq!(beyond.total, 2);

        assert_eq!(
            filter_reviews(&h, &Selector { rating: Some(6), category: None }, 0, 1),
            Err(TransparencyError::InvalidRating(6))
        );
        assert_eq!(filter_reviews(&h, &Selector::default(), 0, 0), Err(TransparencyError::ZeroPageSize));
    }

    #[test]
    fn experience_labels_from_profiles() {
        let mut r = review("a", 3, 1);
        r.reviewer_review_count = 150;
        r.reviewer_vote_count = 3;
        let h = hotel(vec![r]);
        let written = ExperienceScheme::default_for(Axis::ReviewsWritten);
        let votes = ExperienceScheme::default_for(Axis::HelpfulVotes);
        let profiles = profile_reviews(&h.reviews, &written, &votes).unwrap();
        let w = Labels::experience(&profiles, InfoType::ReviewsWritten);
        let v = Labels::experience(&profiles, InfoType::HelpfulVotes);
        assert_eq!(w.of("a").unwrap(), ["top_reviewer"]);
        assert_eq!(v.of("a").unwrap(), ["level_2"]);
        let b = build_breakdown(&h, &CategoryScheme::experience(&written).unwrap(), &w).unwrap();
        assert_eq!(b.count(3, "top_reviewer"), 1);
    }

    fn arb_corpus() -> impl Strategy<Value = (Vec<(u8, u32, Vec<usize>)>, usize)> {
        (
            proptest::collection::vec((1u8..=5, 1u32..28, proptest::collection::vec(0usize..6, 0..4)), 0..60),
            1usize..7,
        )
    }

    proptest! {
        #[test]
        fn views_and_filters_agree((rows, page_size) in arb_corpus()) {
            let reviews: Vec<Review> = rows.iter().enumerate().map(|(i, (r, d, _))| review(&format!("r{i:02}"), *r, *d)).collect();
            let h = hotel(reviews);
            let map: BTreeMap<String, BTreeSet<Aspect>> = rows
                .iter()
                .enumerate()
                .map(|(i, (_, _, a))| (format!("r{i:02}"), a.iter().map(|&k| Aspect::ALL[k]).collect()))
                .collect();
            let labels = Labels::aspects(&map);
            let scheme = CategoryScheme::aspects();
            let b = build_breakdown(&h, &scheme, &labels).unwrap();
            for bar in &b.bars {
                prop_assert_eq!(bar.slices.iter().map(|s| s.count).sum::<u64>(), bar.total);
                if bar.total > 0 {
                    let pct: f64 = bar.slices.iter().map(|s| s.pct).sum();
                    prop_assert!((pct - 100.0).abs() <= 0.2);
                }
            }
            for category in &scheme.categories {
                let slice = build_category_slice(&h, &scheme, &category.id, &labels).unwrap();
                for rating in 1..=5u8 {
                    prop_assert_eq!(slice.count(rating), b.count(rating, &category.id));
                    let sel = Selector {
                        rating: Some(rating),
                        category: Some(CategoryFilter { scheme: &scheme, labels: &labels, category_id: &category.id }),
                    };
                    let mut seen = 0;
                    let mut page = 0;
                    loop {
                        let p = filter_reviews(&h, &sel, page, page_size).unwrap();
                        prop_assert_eq!(p.total as u64, b.count(rating, &category.id));
                        seen += p.items.len();
                        if !p.has_more { break; }
                        page += 1;
                    }
                    prop_assert_eq!(seen as u64, b.count(rating, &category.id));
                }
            }
            let again = build_breakdown(&h, &scheme, &labels).unwrap();
            prop_assert_eq!(serde_json::to_string(&b).unwrap(), serde_json::to_string(&again).unwrap());
        }
    }
}
