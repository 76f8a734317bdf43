//! Canonical review data model, corpus loading, filtering and anonymization.
//!
//! The interchange format is one JSON review record per line (`reviews.jsonl`).
//! A comma-separated file with a header row is accepted too; columns are
//! matched by name. Hotel metadata (name, price, class, photo) lives in an
//! optional `hotels.jsonl` next to the reviews.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Months, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const REVIEWS_FILE: &str = "reviews.jsonl";
pub const REVIEWS_CSV_FILE: &str = "reviews.csv";
pub const HOTELS_FILE: &str = "hotels.jsonl";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    InvalidField {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: rating {rating} is outside 1..=5")]
    RatingOutOfRange { line: usize, rating: i64 },
    #[error("line {line}: duplicate review_id `{review_id}`")]
    DuplicateReview { line: usize, review_id: String },
    #[error("unsupported corpus input {0}; expected a directory, .jsonl or .csv file")]
    UnknownFormat(PathBuf),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("name pool is empty")]
    EmptyNamePool,
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub hotel_id: String,
    pub rating: u8,
    pub text: String,
    pub timestamp: NaiveDate,
    pub reviewer_review_count: u32,
    pub reviewer_vote_count: u32,
    pub display_name: String,
}

impl Review {
    pub fn has_text(&self) -> bool {
        self.text.chars().any(|c| !c.is_whitespace())
    }
}

/// Wire shape of a review before range validation.
#[derive(Debug, Deserialize)]
struct RawReview {
    review_id: String,
    hotel_id: String,
    rating: i64,
    #[serde(default)]
    text: String,
    timestamp: NaiveDate,
    reviewer_review_count: i64,
    reviewer_vote_count: i64,
    display_name: String,
}

impl RawReview {
    fn validate(self, line: usize) -> Result<Review> {
        if !(1..=5).contains(&self.rating) {
            return Err(CorpusError::RatingOutOfRange {
                line,
                rating: self.rating,
            });
        }
        if self.review_id.is_empty() {
            return Err(CorpusError::InvalidField {
                line,
                field: "review_id",
                message: "must not be empty".into(),
            });
        }
        if self.hotel_id.is_empty() {
            return Err(CorpusError::InvalidField {
                line,
                field: "hotel_id",
                message: "must not be empty".into(),
            });
        }
        let reviewer_review_count = u32::try_from(self.reviewer_review_count)
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| CorpusError::InvalidField {
                line,
                field: "reviewer_review_count",
                message: format!("{} is not >= 1", self.reviewer_review_count),
            })?;
        let reviewer_vote_count =
            u32::try_from(self.reviewer_vote_count).map_err(|_| CorpusError::InvalidField {
                line,
                field: "reviewer_vote_count",
                message: format!("{} is not >= 0", self.reviewer_vote_count),
            })?;
        Ok(Review {
            review_id: self.review_id,
            hotel_id: self.hotel_id,
            rating: self.rating as u8,
            text: self.text,
            timestamp: self.timestamp,
            reviewer_review_count,
            reviewer_vote_count,
            display_name: self.display_name,
        })
    }
}

/// Hotel-level metadata, one record per line in `hotels.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotelMeta {
    pub hotel_id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_per_night: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_class: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photo: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hotel {
    pub meta: HotelMeta,
    pub reviews: Vec<Review>,
}

impl Hotel {
    pub fn id(&self) -> &str {
        &self.meta.hotel_id
    }

    pub fn average_rating(&self) -> Option<f64> {
        if self.reviews.is_empty() {
            return None;
        }
        let sum: u32 = self.reviews.iter().map(|r| u32::from(r.rating)).sum();
        Some(f64::from(sum) / self.reviews.len() as f64)
    }
}

/// Reads reviews from a `.jsonl` or `.csv` file. The whole load fails on the
/// first invalid record.
pub fn load_reviews(path: &Path) -> Result<Vec<Review>> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") | Some("ndjson") => parse_jsonl(&content),
        Some("csv") => parse_csv(&content),
        _ => Err(CorpusError::UnknownFormat(path.to_path_buf())),
    }
}

pub fn parse_jsonl(content: &str) -> Result<Vec<Review>> {
    let mut reviews = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawReview = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let review = raw.validate(line_no)?;
        push_unique(&mut reviews, &mut seen, review, line_no)?;
    }
    Ok(reviews)
}

pub fn parse_csv(content: &str) -> Result<Vec<Review>> {
    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let mut reviews = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.deserialize::<RawReview>() {
        let raw = record.map_err(|e| CorpusError::Malformed {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        // header is line 1, so the n-th record sits on line n + 1
        let line_no = reviews.len() + 2;
        let review = raw.validate(line_no)?;
        push_unique(&mut reviews, &mut seen, review, line_no)?;
    }
    Ok(reviews)
}

fn push_unique(
    reviews: &mut Vec<Review>,
    seen: &mut HashSet<String>,
    review: Review,
    line: usize,
) -> Result<()> {
    if !seen.insert(review.review_id.clone()) {
        return Err(CorpusError::DuplicateReview {
            line,
            review_id: review.review_id,
        });
    }
    reviews.push(review);
    Ok(())
}

pub fn load_hotel_meta(path: &Path) -> Result<Vec<HotelMeta>> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Groups reviews by hotel. Hotels without a metadata record get their id as
/// name and no price; metadata without reviews yields an empty hotel.
/// Output is ordered by hotel id; reviews keep their input order.
pub fn assemble(reviews: Vec<Review>, meta: Vec<HotelMeta>) -> Vec<Hotel> {
    let mut hotels: BTreeMap<String, Hotel> = meta
        .into_iter()
        .map(|m| {
            (
                m.hotel_id.clone(),
                Hotel {
                    meta: m,
                    reviews: Vec::new(),
                },
            )
        })
        .collect();
    for review in reviews {
        hotels
            .entry(review.hotel_id.clone())
            .or_insert_with(|| Hotel {
                meta: HotelMeta {
                    hotel_id: review.hotel_id.clone(),
                    name: review.hotel_id.clone(),
                    price_per_night: None,
                    star_class: None,
                    photo: None,
                },
                reviews: Vec::new(),
            })
            .reviews
            .push(review);
    }
    hotels.into_values().collect()
}

/// Loads a corpus from a review file, or from a directory holding
/// `reviews.jsonl` (or `reviews.csv`) and optionally `hotels.jsonl`.
pub fn load_corpus(path: &Path) -> Result<Vec<Hotel>> {
    if path.is_dir() {
        let jsonl = path.join(REVIEWS_FILE);
        let reviews_path = if jsonl.exists() {
            jsonl
        } else {
            path.join(REVIEWS_CSV_FILE)
        };
        let reviews = load_reviews(&reviews_path)?;
        let hotels_path = path.join(HOTELS_FILE);
        let meta = if hotels_path.exists() {
            load_hotel_meta(&hotels_path)?
        } else {
            Vec::new()
        };
        Ok(assemble(reviews, meta))
    } else {
        Ok(assemble(load_reviews(path)?, Vec::new()))
    }
}

/// Canonical line-delimited encoding of a review list.
pub fn serialize_reviews<'a>(reviews: impl IntoIterator<Item = &'a Review>) -> String {
    let mut out = String::new();
    for review in reviews {
        out.push_str(&serde_json::to_string(review).expect("review serializes"));
        out.push('\n');
    }
    out
}

/// Writes `reviews.jsonl` and `hotels.jsonl` into `dir`.
pub fn write_corpus(dir: &Path, hotels: &[Hotel]) -> Result<()> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let reviews_path = dir.join(REVIEWS_FILE);
    fs::write(
        &reviews_path,
        serialize_reviews(hotels.iter().flat_map(|h| h.reviews.iter())),
    )
    .map_err(io_err(&reviews_path))?;
    let hotels_path = dir.join(HOTELS_FILE);
    let mut file = fs::File::create(&hotels_path).map_err(io_err(&hotels_path))?;
    for hotel in hotels {
        let line = serde_json::to_string(&hotel.meta).expect("meta serializes");
        writeln!(file, "{line}").map_err(io_err(&hotels_path))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub date_from: NaiveDate,
    pub date_to: NaiveDate,
    pub price_min: f64,
    pub price_max: f64,
    /// A hotel needs at least one review within this many months before
    /// `date_to`. Zero disables the recency requirement.
    pub min_recent_feedback_months: u32,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        Self {
            date_from: NaiveDate::from_ymd_opt(2016, 6, 30).unwrap(),
            date_to: NaiveDate::from_ymd_opt(2020, 1, 31).unwrap(),
            price_min: 82.0,
            price_max: 105.0,
            min_recent_feedback_months: 6,
        }
    }
}

impl CorpusFilter {
    /// A filter that keeps every hotel and review.
    pub fn pass_all() -> Self {
        Self {
            date_from: NaiveDate::MIN,
            date_to: NaiveDate::MAX,
            price_min: f64::NEG_INFINITY,
            price_max: f64::INFINITY,
            min_recent_feedback_months: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.date_from > self.date_to {
            return Err(CorpusError::InvalidFilter(format!(
                "date_from {} is after date_to {}",
                self.date_from, self.date_to
            )));
        }
        if self.price_min.is_nan() || self.price_max.is_nan() || self.price_min > self.price_max {
            return Err(CorpusError::InvalidFilter(format!(
                "price_min {} exceeds price_max {}",
                self.price_min, self.price_max
            )));
        }
        Ok(())
    }

    fn recency_cutoff(&self) -> Option<NaiveDate> {
        if self.min_recent_feedback_months == 0 {
            return None;
        }
        Some(
            self.date_to
                .checked_sub_months(Months::new(self.min_recent_feedback_months))
                .unwrap_or(NaiveDate::MIN),
        )
    }

    fn price_ok(&self, hotel: &Hotel) -> bool {
        // hotels without a listed price cannot be judged and are kept
        hotel
            .meta
            .price_per_night
            .is_none_or(|p| p >= self.price_min && p <= self.price_max)
    }
}

/// Keeps hotels within the price band that have recent feedback, and drops
/// reviews outside the date window.
pub fn apply_filter(hotels: &[Hotel], filter: &CorpusFilter) -> Result<Vec<Hotel>> {
    filter.validate()?;
    let cutoff = filter.recency_cutoff();
    Ok(hotels
        .iter()
        .filter(|h| filter.price_ok(h))
        .filter_map(|h| {
            let reviews: Vec<Review> = h
                .reviews
                .iter()
                .filter(|r| r.timestamp >= filter.date_from && r.timestamp <= filter.date_to)
                .cloned()
                .collect();
            if let Some(cutoff) = cutoff {
                if !reviews.iter().any(|r| r.timestamp >= cutoff) {
                    return None;
                }
            }
            Some(Hotel {
                meta: h.meta.clone(),
                reviews,
            })
        })
        .collect())
}

/// Replaces every display name with a seeded draw from `name_pool`.
/// Draws run over hotels in order, then reviews in order, one draw each.
pub fn anonymize(hotels: &[Hotel], name_pool: &[String], seed: u64) -> Result<Vec<Hotel>> {
    if name_pool.is_empty() {
        return Err(CorpusError::EmptyNamePool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(hotels
        .iter()
        .map(|h| Hotel {
            meta: h.meta.clone(),
            reviews: h
                .reviews
                .iter()
                .map(|r| Review {
                    display_name: name_pool[rng.random_range(0..name_pool.len())].clone(),
                    ..r.clone()
                })
                .collect(),
        })
        .collect())
}

pub fn load_name_pool(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_name_pool(&content))
}

pub fn parse_name_pool(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// The shipped pool of replacement names.
pub fn bundled_name_pool() -> Vec<String> {
    parse_name_pool(include_str!("../data/names.txt"))
}
