use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::curation::AspectScheme;
use super::keywords::keyword_units;
use super::Aspect;
use crate::corpus::Review;
use crate::percent::round_percentages;

/// Aspects mentioned by each review: aspect A is present iff the text holds at
/// least one keyword assigned to A. Empty-text reviews are left out.
pub fn label_reviews<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    scheme: &AspectScheme,
) -> BTreeMap<String, BTreeSet<Aspect>> {
    let none = HashSet::new();
    reviews
        .into_iter()
        .filter(|r| r.has_text())
        .map(|review| {
            let aspects = keyword_units(&review.text, &none)
                .into_iter()
                .flatten()
                .filter_map(|unit| scheme.keyword_assignment.get(&unit).copied())
                .collect();
            (review.review_id.clone(), aspects)
        })
        .collect()
}

/// Share of each aspect among all (review, aspect) pairs, one decimal,
/// summing to 100. All zeros when nothing is labeled.
pub fn aspect_percentages(labels: &BTreeMap<String, BTreeSet<Aspect>>) -> BTreeMap<Aspect, f64> {
    let counts: Vec<u64> = Aspect::ALL
        .iter()
        .map(|a| labels.values().filter(|set| set.contains(a)).count() as u64)
        .collect();
    Aspect::ALL
        .into_iter()
        .zip(round_percentages(&counts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspects::curate_clusters;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn review(id: &str, text: &str) -> Review {
        Review {
            review_id: id.into(),
            hotel_id: "h".into(),
            rating: 4,
            text: text.into(),
            timestamp: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
            reviewer_review_count: 1,
            reviewer_vote_count: 0,
            display_name: String::new(),
        }
    }

    fn scheme(pairs: &[(&str, Aspect)]) -> AspectScheme {
        let assignment = pairs
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.to_string(), i))
            .collect();
        let seeds = pairs.iter().fold(BTreeMap::new(), |mut acc: BTreeMap<Aspect, BTreeSet<String>>, (t, a)| {
            acc.entry(*a).or_default().insert(t.to_string());
            acc
        });
        curate_clusters(&assignment, &seeds).unwrap()
    }

    #[test]
    fn multi_label_and_empty() {
        let s = scheme(&[("breakfast", Aspect::Food), ("staff", Aspect::Service), ("front desk", Aspect::Service)]);
        let labels = label_reviews(
            &[
                review("a", "Breakfast was great and the staff kind"),
                review("b", "Nothing to report"),
                review("c", "the front desk"),
                review("d", ""),
            ],
            &s,
        );
        assert_eq!(labels["a"], BTreeSet::from([Aspect::Food, Aspect::Service]));
        assert!(labels["b"].is_empty());
        assert_eq!(labels["c"], BTreeSet::from([Aspect::Service]));
        assert!(!labels.contains_key("d"));
    }

    #[test]
    fn percentages_count_label_pairs() {
        let labels = BTreeMap::from([
            ("r1".to_string(), BTreeSet::from([Aspect::Food])),
            ("r2".to_string(), BTreeSet::from([Aspect::Food, Aspect::Service])),
        ]);
        let pct = aspect_percentages(&labels);
        assert_eq!(pct[&Aspect::Food], 66.7);
        assert_eq!(pct[&Aspect::Service], 33.3);
        assert_eq!(pct[&Aspect::Companions], 0.0);

        let single = BTreeMap::from([("r".to_string(), BTreeSet::from([Aspect::Companions]))]);
        assert_eq!(aspect_percentages(&single)[&Aspect::Companions], 100.0);

        let none = BTreeMap::from([("r".to_string(), BTreeSet::new())]);
        assert!(aspect_percentages(&none).values().all(|&p| p == 0.0));
        assert!(aspect_percentages(&BTreeMap::new()).values().all(|&p| p == 0.0));
    }

    #[test]
    fn repeated_keyword_counts_once() {
        let s = scheme(&[("pool", Aspect::Facilities)]);
        let labels = label_reviews(&[review("a", "pool pool pool")], &s);
        assert_eq!(labels["a"].len(), 1);
    }

    proptest! {
        #[test]
        fn adding_a_keyword_never_removes_labels(
            texts in proptest::collection::vec(proptest::collection::vec(
                proptest::sample::select(vec!["pool", "gym", "tea", "kids", "park", "x"]), 0..8), 1..10),
            extra in proptest::sample::select(vec!["gym", "tea", "kids", "park", "x"]),
            aspect in proptest::sample::select(Aspect::ALL.to_vec()),
        ) {
            let reviews: Vec<Review> = texts.iter().enumerate().map(|(i, t)| review(&format!("r{i}"), &t.join(" "))).collect();
            let base = scheme(&[("pool", Aspect::Facilities)]);
            let mut extended = base.clone();
            extended.keyword_assignment.entry(extra.to_string()).or_insert(aspect);
            let before = label_reviews(&reviews, &base);
            let after = label_reviews(&reviews, &extended);
            for (id, labels) in &before {
                prop_assert!(labels.is_subset(&after[id]));
            }
        }

        #[test]
        fn percentages_close_to_one_hundred(
            sets in proptest::collection::vec(proptest::collection::btree_set(
                proptest::sample::select(Aspect::ALL.to_vec()), 0..4), 1..30)
        ) {
            let labels: BTreeMap<String, BTreeSet<Aspect>> =
                sets.into_iter().enumerate().map(|(i, s)| (format!("r{i}"), s)).collect();
            let total: f64 = aspect_percentages(&labels).values().sum();
            if labels.values().any(|s| !s.is_empty()) {
                prop_assert!((total - 100.0).abs() <= 0.2);
            }
        }
    }
}
