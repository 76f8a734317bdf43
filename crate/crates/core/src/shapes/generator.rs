//! Synthetic corpora under extremity-weighted self-selection: every guest
//! has a latent satisfaction, and guests at the extremes are more likely to
//! write a review.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use super::{classify_shape, RatingHistogram, ShapeError, ShapeLabel};
use crate::aspects::Aspect;
use crate::corpus::{Hotel, HotelMeta, Review};
use crate::sentiment::{EmotionCategory, Lexicon};
use crate::text::{is_negator, tokenize};

pub const GENERATOR_VERSION: &str = "biased-corpus/1";

/// Per-hotel review counts of the bundled study corpus.
pub const STUDY_REVIEW_COUNTS: [usize; 9] = [320, 397, 368, 372, 355, 390, 361, 384, 365];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub true_mean: f64,
    pub true_spread: f64,
    /// Guests drawn.
    pub population: usize,
    pub extremity_gain: f64,
    pub base_rate: f64,
    pub seed: u64,
    /// Stop drawing guests once this many have reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_after_reports: Option<usize>,
}

impl BiasConfig {
    pub fn validate(&self) -> Result<(), ShapeError> {
        let bad = |m: &str| Err(ShapeError::InvalidConfig(m.to_string()));
        if !(1.0..=5.0).contains(&self.true_mean) {
            return bad("true_mean must lie in [1, 5]");
        }
        if !(self.true_spread > 0.0 && self.true_spread.is_finite()) {
            return bad("true_spread must be positive");
        }
        if !(self.extremity_gain >= 0.0 && self.extremity_gain.is_finite()) {
            return bad("extremity_gain must be non-negative");
        }
        if !(self.base_rate > 0.0 && self.base_rate <= 1.0) {
            return bad("base_rate must lie in (0, 1]");
        }
        if self.stop_after_reports == Some(0) {
            return bad("stop_after_reports must be positive");
        }
        Ok(())
    }
}

/// Probability of each latent satisfaction 1..=5.
pub fn latent_distribution(mean: f64, spread: f64) -> [f64; 5] {
    let mut w = [0.0; 5];
    for (i, slot) in w.iter_mut().enumerate() {
        let d = (i as f64 + 1.0) - mean;
        *slot = (-d * d / (2.0 * spread * spread)).exp();
    }
    let total: f64 = w.iter().sum();
    w.map(|x| x / total)
}

pub fn report_probability(satisfaction: u8, extremity_gain: f64, base_rate: f64) -> f64 {
    let distance = (f64::from(satisfaction) - 3.0).abs();
    (base_rate * (1.0 + extremity_gain * distance / 2.0)).min(1.0)
}

/// Words the template text is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticVocab {
    /// Keyword phrases per aspect; a phrase may hold two words.
    pub aspects: BTreeMap<Aspect, Vec<String>>,
    /// Opinion words per emotion category. Neutral stays empty.
    pub sentiment: BTreeMap<EmotionCategory, Vec<String>>,
    pub neutral_phrase: String,
    pub weekdays: Vec<String>,
    pub months: Vec<String>,
}

fn strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for SyntheticVocab {
    fn default() -> Self {
        let aspects = BTreeMap::from([
            (
                Aspect::Food,
                strings(&[
                    "breakfast", "buffet", "coffee", "dinner", "restaurant", "pastries", "menu",
                    "omelette", "croissants", "espresso", "room service",
                ]),
            ),
            (
                Aspect::Facilities,
                strings(&[
                    "swimming pool", "gym", "elevator", "shower", "bathroom", "mattress", "wifi",
                    "parking", "sauna", "balcony", "air conditioning",
                ]),
            ),
            (
                Aspect::Service,
                strings(&[
                    "staff", "reception", "receptionist", "concierge", "housekeeping", "front desk",
                    "manager", "doorman", "porter", "waiters",
                ]),
            ),
            (
                Aspect::SurroundingEnvironment,
                strings(&[
                    "neighborhood", "train station", "subway", "river", "museums", "shops",
                    "streets", "square", "harbour", "old town",
                ]),
            ),
            (
                Aspect::TravelPurpose,
                strings(&[
                    "business", "conference", "honeymoon", "vacation", "anniversary", "sightseeing",
                    "wedding", "convention", "meeting", "layover",
                ]),
            ),
            (
                Aspect::Companions,
                strings(&[
                    "family", "kids", "children", "husband", "wife", "colleagues", "partner",
                    "parents", "daughter", "toddler",
                ]),
            ),
        ]);
        let sentiment = BTreeMap::from([
            (
                EmotionCategory::NegativeOnly,
                strings(&["worst", "hated", "pathetic", "horrible", "nasty", "lousy", "bad"]),
            ),
            (
                EmotionCategory::Negative,
                strings(&["terrible", "dirty", "poor", "disappointing", "rude", "broken", "unpleasant", "awful"]),
            ),
            (EmotionCategory::Neutral, Vec::new()),
            (
                EmotionCategory::Positive,
                strings(&["good", "nice", "helpful", "clean", "pleasant", "comfortable", "friendly"]),
            ),
            (
                EmotionCategory::PositiveOnly,
                strings(&["superb", "great", "awesome", "outstanding", "gorgeous", "beautiful", "amazing", "lovely"]),
            ),
        ]);
        Self {
            aspects,
            sentiment,
            neutral_phrase: "as expected".into(),
            weekdays: strings(&["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]),
            months: strings(&[
                "january", "february", "march", "april", "may", "june", "july", "august",
                "september", "october", "november", "december",
            ]),
        }
    }
}

// Fixed words of the sentence templates below.
const TEMPLATE_WORDS: &[&str] = &["the", "and", "were", "we", "found", "arrived", "on", "a", "in"];

impl SyntheticVocab {
    /// Checks that generated text scores into the intended emotion bin:
    /// aspect, date and template words carry no polarity and no negation,
    /// and every opinion word lies inside its category's interval.
    pub fn validate(&self, lexicon: &Lexicon) -> Result<(), ShapeError> {
        let bad = |m: String| Err(ShapeError::InvalidVocab(m));
        let neutral_words = self
            .aspects
            .values()
            .flatten()
            .chain(&self.weekdays)
            .chain(&self.months)
            .flat_map(|p| tokenize(p))
            .chain(tokenize(&self.neutral_phrase))
            .chain(TEMPLATE_WORDS.iter().map(|w| w.to_string()));
        for word in neutral_words {
            if lexicon.contains(&word) || is_negator(&word) {
                return bad(format!("`{word}` carries polarity or negation"));
            }
        }
        for aspect in Aspect::ALL {
            let phrases = self.aspects.get(&aspect).map_or(0, Vec::len);
            if phrases < 2 {
                return bad(format!("aspect {aspect} needs at least two phrases"));
            }
        }
        for category in EmotionCategory::ALL {
            let words = self.sentiment.get(&category).map(Vec::as_slice).unwrap_or(&[]);
            if category == EmotionCategory::Neutral {
                if !words.is_empty() {
                    return bad("neutral text carries no opinion words".into());
                }
                continue;
            }
            if words.is_empty() {
                return bad(format!("no opinion words for {category}"));
            }
            let (low, high) = category.interval();
            for word in words {
                let Some(p) = lexicon.get(word) else {
                    return bad(format!("opinion word `{word}` is not in the lexicon"));
                };
                let inside = p >= low && (p < high || (high == 1.0 && p <= 1.0));
                if !inside {
                    return bad(format!("`{word}` ({p}) falls outside {category}"));
                }
            }
        }
        if self.weekdays.is_empty() || self.months.is_empty() {
            return bad("date words are empty".into());
        }
        Ok(())
    }
}

/// What the generator knows about one review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rating: u8,
    pub emotion: EmotionCategory,
    pub aspects: BTreeSet<Aspect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotelManifest {
    pub hotel_id: String,
    pub config: BiasConfig,
    pub guests_drawn: usize,
    pub true_histogram: RatingHistogram,
    pub reported_histogram: RatingHistogram,
    pub true_shape: Option<ShapeLabel>,
    pub reported_shape: Option<ShapeLabel>,
    pub reviews: BTreeMap<String, GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator_version: String,
    pub hotels: Vec<HotelManifest>,
}

impl Manifest {
    pub fn hotel(&self, hotel_id: &str) -> Option<&HotelManifest> {
        self.hotels.iter().find(|h| h.hotel_id == hotel_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedHotel {
    pub reviews: Vec<Review>,
    pub manifest: HotelManifest,
}

fn draw_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn emotion_for(rating: u8, rng: &mut ChaCha8Rng) -> EmotionCategory {
    use EmotionCategory::*;
    let (choices, weights): (&[EmotionCategory], &[f64]) = match rating {
        1 => (&[NegativeOnly, Negative], &[0.7, 0.3]),
        2 => (&[Negative, NegativeOnly], &[0.75, 0.25]),
        3 => (&[Neutral, Positive, Negative], &[0.6, 0.2, 0.2]),
        4 => (&[Positive, PositiveOnly], &[0.75, 0.25]),
        _ => (&[PositiveOnly, Positive], &[0.7, 0.3]),
    };
    choices[draw_index(rng, weights)]
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct Writer<'a> {
    vocab: &'a SyntheticVocab,
    names: &'a [String],
    rng: ChaCha8Rng,
    counts: Pareto<f64>,
    votes: Pareto<f64>,
}

impl Writer<'_> {
    fn text(&mut self, emotion: EmotionCategory) -> (String, BTreeSet<Aspect>) {
        let rng = &mut self.rng;
        let wanted = 1 + draw_index(rng, &[0.45, 0.35, 0.2]);
        let aspects: Vec<Aspect> = Aspect::ALL.choose_multiple(rng, wanted).copied().collect();
        let opinions = &self.vocab.sentiment[&emotion];
        let mut sentences = Vec::new();
        if rng.random_bool(0.35) {
            let day = self.vocab.weekdays.choose(rng).unwrap();
            let month = self.vocab.months.choose(rng).unwrap();
            sentences.push(format!("We arrived on a {} in {}.", capitalize(day), capitalize(month)));
        }
        for aspect in &aspects {
            let pair: Vec<&String> = self.vocab.aspects[aspect].choose_multiple(rng, 2).collect();
            let (a, b) = (pair[0], pair[1]);
            let opinion = opinions.choose(rng).cloned().unwrap_or_else(|| self.vocab.neutral_phrase.clone());
            let template = if opinions.is_empty() { rng.random_range(0..2) } else { rng.random_range(0..3) };
            sentences.push(match template {
                0 => format!("The {a} and {b} were {opinion}."),
                1 => format!("We found the {a} and the {b} {opinion}."),
                _ => format!("{} {a} and {b}.", capitalize(&opinion)),
            });
        }
        (sentences.join(" "), aspects.into_iter().collect())
    }

    fn reviewer_stats(&mut self) -> (u32, u32) {
        let written = self.counts.sample(&mut self.rng).floor().min(10_000.0) as u32;
        let votes = (self.votes.sample(&mut self.rng).floor() - 1.0).min(10_000.0) as u32;
        (written.max(1), votes)
    }
}

/// Draws guests, lets them self-select into reviewing, and writes a review
/// for every guest who reports. Two independent ChaCha streams are used: one
/// for satisfactions and reporting, one for review content, so the
/// histograms do not depend on the vocabulary.
pub fn generate_biased_corpus(
    cfg: &BiasConfig,
    hotel_id: &str,
    vocab: &SyntheticVocab,
    lexicon: &Lexicon,
    names: &[String],
    date_range: (NaiveDate, NaiveDate),
) -> Result<GeneratedHotel, ShapeError> {
    cfg.validate()?;
    vocab.validate(lexicon)?;
    if names.is_empty() {
        return Err(ShapeError::InvalidVocab("name pool is empty".into()));
    }
    let (start, end) = date_range;
    if end < start {
        return Err(ShapeError::InvalidConfig("date range ends before it starts".into()));
    }
    let span_days = (end - start).num_days() as u64;

    let latent = latent_distribution(cfg.true_mean, cfg.true_spread);
    let report: Vec<f64> = (1..=5u8)
        .map(|s| report_probability(s, cfg.extremity_gain, cfg.base_rate))
        .collect();

    let mut draws = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut content = ChaCha8Rng::seed_from_u64(cfg.seed);
    content.set_stream(1);
    let mut writer = Writer {
        vocab,
        names,
        rng: content,
        counts: Pareto::new(1.0, 0.8).expect("valid Pareto"),
        votes: Pareto::new(1.0, 0.9).expect("valid Pareto"),
    };

    let mut true_hist = [0u64; 5];
    let mut reported_hist = [0u64; 5];
    let mut reviews = Vec::new();
    let mut truth = BTreeMap::new();
    let mut guests = 0;
    while guests < cfg.population {
        if cfg.stop_after_reports.is_some_and(|n| reviews.len() >= n) {
            break;
        }
        guests += 1;
        let s = draw_index(&mut draws, &latent) as u8 + 1;
        true_hist[usize::from(s) - 1] += 1;
        let u: f64 = draws.random();
        if u >= report[usize::from(s) - 1] {
            continue;
        }
        reported_hist[usize::from(s) - 1] += 1;

        let review_id = format!("{hotel_id}-r{:04}", reviews.len() + 1);
        let emotion = emotion_for(s, &mut writer.rng);
        let (text, aspects) = writer.text(emotion);
        let (written, votes) = writer.reviewer_stats();
        let offset = writer.rng.random_range(0..=span_days);
        let display_name = writer.names.choose(&mut writer.rng).unwrap().clone();
        truth.insert(
            review_id.clone(),
            GroundTruth {
                rating: s,
                emotion,
                aspects,
            },
        );
        reviews.push(Review {
            review_id,
            hotel_id: hotel_id.to_string(),
            rating: s,
            text,
            timestamp: start + Days::new(offset),
            reviewer_review_count: written,
            reviewer_vote_count: votes,
            display_name,
        });
    }
    let true_histogram = RatingHistogram(true_hist);
    let reported_histogram = RatingHistogram(reported_hist);
    Ok(GeneratedHotel {
        reviews,
        manifest: HotelManifest {
            hotel_id: hotel_id.to_string(),
            config: cfg.clone(),
            guests_drawn: guests,
            true_histogram,
            reported_histogram,
            true_shape: classify_shape(&true_histogram).ok(),
            reported_shape: classify_shape(&reported_histogram).ok(),
            reviews: truth,
        },
    })
}

const STUDY_HOTEL_NAMES: [&str; 9] = [
    "Harbour View Inn",
    "Maple Court Hotel",
    "Riverside Suites",
    "The Linden House",
    "Station Square Hotel",
    "Old Mill Lodge",
    "Parkside Residence",
    "Canal Street Hotel",
    "The Orchard Rooms",
];

/// The nine-hotel corpus used by the study: hotels 1-3 are drawn to look
/// monotonic increasing, 4-6 J-shaped and 7-9 positively skewed.
pub fn study_corpus(seed: u64, lexicon: &Lexicon, names: &[String]) -> Result<(Vec<Hotel>, Manifest), ShapeError> {
    let vocab = SyntheticVocab::default();
    let range = (
        NaiveDate::from_ymd_opt(2018, 2, 1).unwrap(),
        NaiveDate::from_ymd_opt(2020, 1, 31).unwrap(),
    );
    let mut hotels = Vec::new();
    let mut manifests = Vec::new();
    for (i, &count) in STUDY_REVIEW_COUNTS.iter().enumerate() {
        let (true_mean, true_spread, extremity_gain, base_rate) = match i / 3 {
            0 => (4.6, 1.2, 1.0, 0.3),
            1 => (3.2, 2.5, 8.0, 0.1),
            _ => (3.1, 0.9, 0.5, 0.3),
        };
        let cfg = BiasConfig {
            true_mean,
            true_spread,
            population: 50_000,
            extremity_gain,
            base_rate,
            seed: seed.wrapping_mul(1_000).wrapping_add(i as u64 + 1),
            stop_after_reports: Some(count),
        };
        let hotel_id = format!("hotel-{:02}", i + 1);
        let generated = generate_biased_corpus(&cfg, &hotel_id, &vocab, lexicon, names, range)?;
        let meta = HotelMeta {
            hotel_id: hotel_id.clone(),
            name: STUDY_HOTEL_NAMES[i].to_string(),
            price_per_night: Some(82.0 + (i as f64 * 23.0 / 8.0 * 10.0).round() / 10.0),
            star_class: Some(if i % 2 == 0 { 3 } else { 4 }),
            photo: Some(format!("{hotel_id}.jpg")),
        };
        hotels.push(Hotel {
            meta,
            reviews: generated.reviews,
        });
        manifests.push(generated.manifest);
    }
    Ok((
        hotels,
        Manifest {
            generator_version: GENERATOR_VERSION.to_string(),
            hotels: manifests,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{bundled_name_pool, serialize_reviews};
    use crate::sentiment::{bin_emotion, score_lexicon, DEFAULT_NEGATION_WINDOW};

    fn range() -> (NaiveDate, NaiveDate) {
        (
            NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2019, 12, 31).unwrap(),
        )
    }

    fn cfg(gamma: f64, beta: f64, n: usize, seed: u64) -> BiasConfig {
        BiasConfig {
            true_mean: 3.2,
            true_spread: 2.0,
            population: n,
            extremity_gain: gamma,
            base_rate: beta,
            seed,
            stop_after_reports: None,
        }
    }

    fn run(c: &BiasConfig) -> GeneratedHotel {
        generate_biased_corpus(
            c,
            "h",
            &SyntheticVocab::default(),
            &Lexicon::bundled(),
            &bundled_name_pool(),
            range(),
        )
        .unwrap()
    }

    #[test]
    fn default_vocab_is_valid() {
        SyntheticVocab::default().validate(&Lexicon::bundled()).unwrap();
    }

    #[test]
    fn vocab_rejects_polar_aspect_word() {
        let mut vocab = SyntheticVocab::default();
        vocab.aspects.get_mut(&Aspect::Food).unwrap().push("delicious".into());
        assert!(matches!(vocab.validate(&Lexicon::bundled()), Err(ShapeError::InvalidVocab(_))));
    }

    #[test]
    fn latent_distribution_matches_hand_values() {
        let p = latent_distribution(3.0, 1.0);
        let e = (-0.5f64).exp();
        let e2 = (-2.0f64).exp();
        let z = 1.0 + 2.0 * e + 2.0 * e2;
        let want = [e2 / z, e / z, 1.0 / z, e / z, e2 / z];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn report_probability_clips() {
        assert_eq!(report_probability(3, 8.0, 0.1), 0.1);
        assert!((report_probability(1, 8.0, 0.1) - 0.9).abs() < 1e-12);
        assert_eq!(report_probability(5, 8.0, 0.5), 1.0);
    }

    #[test]
    fn everyone_reports_without_selection() {
        let g = run(&cfg(0.0, 1.0, 2_000, 5));
        assert_eq!(g.manifest.true_histogram, g.manifest.reported_histogram);
        assert_eq!(g.reviews.len(), 2_000);
    }

    #[test]
    fn reproducible_bytes() {
        let a = run(&cfg(4.0, 0.1, 3_000, 9));
        let b = run(&cfg(4.0, 0.1, 3_000, 9));
        assert_eq!(serialize_reviews(&a.reviews), serialize_reviews(&b.reviews));
        assert_eq!(
            serde_json::to_string(&a.manifest).unwrap(),
            serde_json::to_string(&b.manifest).unwrap()
        );
        let c = run(&cfg(4.0, 0.1, 3_000, 10));
        assert_ne!(serialize_reviews(&a.reviews), serialize_reviews(&c.reviews));
    }

    #[test]
    fn text_scores_into_the_recorded_emotion() {
        let g = run(&cfg(2.0, 0.3, 3_000, 2));
        let lex = Lexicon::bundled();
        for review in &g.reviews {
            let truth = &g.manifest.reviews[&review.review_id];
            let got = bin_emotion(score_lexicon(&review.text, &lex, DEFAULT_NEGATION_WINDOW));
            assert_eq!(got, truth.emotion, "{}", review.text);
            assert_eq!(truth.rating, review.rating);
            assert!(!truth.aspects.is_empty() && truth.aspects.len() <= 3);
        }
    }

    #[test]
    fn stop_after_reports_caps_the_corpus() {
        let mut c = cfg(8.0, 0.1, 50_000, 3);
        c.stop_after_reports = Some(120);
        let g = run(&c);
        assert_eq!(g.reviews.len(), 120);
        assert_eq!(g.manifest.reported_histogram.total(), 120);
        assert_eq!(g.manifest.true_histogram.total() as usize, g.manifest.guests_drawn);
    }

    #[test]
    fn invalid_configs() {
        for bad in [
            BiasConfig { true_mean: 0.5, ..cfg(1.0, 0.1, 10, 0) },
            BiasConfig { true_spread: 0.0, ..cfg(1.0, 0.1, 10, 0) },
            cfg(-1.0, 0.1, 10, 0),
            cfg(1.0, 0.0, 10, 0),
            cfg(1.0, 1.5, 10, 0),
        ] {
            assert!(matches!(bad.validate(), Err(ShapeError::InvalidConfig(_))), "{bad:?}");
        }
    }

    #[test]
    fn reviewer_stats_are_heavy_tailed() {
        let g = run(&cfg(0.0, 1.0, 5_000, 1));
        let firsts = g.reviews.iter().filter(|r| r.reviewer_review_count == 1).count();
        let tops = g.reviews.iter().filter(|r| r.reviewer_review_count > 100).count();
        assert!(firsts > 1_000, "{firsts}");
        assert!(tops > 20, "{tops}");
    }

    #[test]
    fn study_corpus_has_intended_shapes_and_counts() {
        let (hotels, manifest) = study_corpus(2020, &Lexicon::bundled(), &bundled_name_pool()).unwrap();
        assert_eq!(hotels.len(), 9);
        for (i, (hotel, m)) in hotels.iter().zip(&manifest.hotels).enumerate() {
            assert_eq!(hotel.reviews.len(), STUDY_REVIEW_COUNTS[i]);
            let want = match i / 3 {
                0 => ShapeLabel::MonotonicIncreasing,
                1 => ShapeLabel::JShaped,
                _ => ShapeLabel::PositivelySkewed,
            };
            assert_eq!(m.reported_shape, Some(want), "{}: {:?}", m.hotel_id, m.reported_histogram);
            let price = hotel.meta.price_per_night.unwrap();
            assert!((82.0..=105.0).contains(&price));
        }
    }
}
