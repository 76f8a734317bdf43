//! Emotion extremity of a review: a polarity score in [-1, 1] binned into
//! five equal-width categories.
//!
//! Scores come either from the lexicon scorer here or from an external model
//! whose outputs are imported per review id.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Review;
use crate::text::{is_negator, tokenize};

/// Polarity multiplier applied to a sentiment word preceded by a negator.
pub const NEGATION_FLIP: f64 = -1.0;
pub const DEFAULT_NEGATION_WINDOW: usize = 3;

/// Lower edges of bins 1..=4. Bins are closed on the left; the last one is
/// also closed on the right.
pub const BIN_EDGES: [f64; 4] = [-0.6, -0.2, 0.2, 0.6];

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    LexiconLine { line: usize, message: String },
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("score for {review_id} is {value}, outside [-1, 1]")]
    OutOfRange { review_id: String, value: f64 },
    #[error("score given for unknown review {0}")]
    UnknownReview(String),
    #[error("precomputed scores line {line}: {message}")]
    ScoresLine { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    Lexicon,
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentimentScore {
    value: f64,
    pub source: ScoreSource,
}

impl SentimentScore {
    pub fn new(value: f64, source: ScoreSource) -> Option<Self> {
        (-1.0..=1.0)
            .contains(&value)
            .then_some(Self { value, source })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmotionCategory {
    NegativeOnly,
    Negative,
    Neutral,
    Positive,
    PositiveOnly,
}

impl EmotionCategory {
    /// Ordered from most negative to most positive.
    pub const ALL: [EmotionCategory; 5] = [
        EmotionCategory::NegativeOnly,
        EmotionCategory::Negative,
        EmotionCategory::Neutral,
        EmotionCategory::Positive,
        EmotionCategory::PositiveOnly,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            EmotionCategory::NegativeOnly => "Negative Only",
            EmotionCategory::Negative => "Negative",
            EmotionCategory::Neutral => "Neutral",
            EmotionCategory::Positive => "Positive",
            EmotionCategory::PositiveOnly => "Positive Only",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            EmotionCategory::NegativeOnly => "negative_only",
            EmotionCategory::Negative => "negative",
            EmotionCategory::Neutral => "neutral",
            EmotionCategory::Positive => "positive",
            EmotionCategory::PositiveOnly => "positive_only",
        }
    }

    /// Score interval `[low, high)` (closed at 1.0 for the last bin).
    pub fn interval(self) -> (f64, f64) {
        let i = self.index();
        let low = if i == 0 { -1.0 } else { BIN_EDGES[i - 1] };
        let high = if i == 4 { 1.0 } else { BIN_EDGES[i] };
        (low, high)
    }
}

impl fmt::Display for EmotionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn bin_emotion(score: SentimentScore) -> EmotionCategory {
    let idx = BIN_EDGES.iter().filter(|&&edge| score.value >= edge).count();
    EmotionCategory::ALL[idx]
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    polarity: HashMap<String, f64>,
}

impl Lexicon {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, SentimentError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut polarity = HashMap::new();
        for (idx, (token, value)) in entries.into_iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(SentimentError::LexiconLine {
                    line: idx + 1,
                    message: format!("polarity {value} outside [-1, 1]"),
                });
            }
            polarity.insert(token.into().to_lowercase(), value);
        }
        if polarity.is_empty() {
            return Err(SentimentError::EmptyLexicon);
        }
        Ok(Self { polarity })
    }

    /// Parses `token<TAB>polarity` lines. Blank lines and `#` comments are skipped.
    pub fn parse(content: &str) -> Result<Self, SentimentError> {
        let mut entries = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| SentimentError::LexiconLine {
                line: idx + 1,
                message,
            };
            let (token, value) = line
                .split_once('\t')
                .ok_or_else(|| err("expected token<TAB>polarity".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| err(format!("bad polarity {value:?}: {e}")))?;
            if !(-1.0..=1.0).contains(&value) {
                return Err(err(format!("polarity {value} outside [-1, 1]")));
            }
            entries.push((token.trim().to_string(), value));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, SentimentError> {
        let content = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&content)
    }

    /// The shipped general-purpose lexicon.
    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/lexicon.tsv")).expect("bundled lexicon parses")
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.polarity.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.polarity.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.polarity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polarity.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = (&str, f64)> {
        self.polarity.iter().map(|(t, &v)| (t.as_str(), v))
    }
}

/// Mean polarity of the lexicon words in `text`. A word is flipped when a
/// negator occurs among the `negation_window` tokens before it. Text without
/// lexicon words scores 0.
pub fn score_lexicon(text: &str, lexicon: &Lexicon, negation_window: usize) -> SentimentScore {
    let tokens = tokenize(text);
    let mut sum = 0.0;
    let mut matched = 0usize;
    for (i, token) in tokens.iter().enumerate() {
        let Some(polarity) = lexicon.get(token) else {
            continue;
        };
        let negated = tokens[i.saturating_sub(negation_window)..i]
            .iter()
            .any(|t| is_negator(t));
        sum += if negated { polarity * NEGATION_FLIP } else { polarity };
        matched += 1;
    }
    let value = if matched == 0 {
        0.0
    } else {
        (sum / matched as f64).clamp(-1.0, 1.0)
    };
    SentimentScore {
        value,
        source: ScoreSource::Lexicon,
    }
}

/// Combines imported scores with lexicon fallback. Every imported id must
/// belong to a review; reviews without an imported score and with non-empty
/// text are scored by the lexicon; empty-text reviews stay unscored.
pub fn attach_precomputed<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    scores: &BTreeMap<String, f64>,
    lexicon: &Lexicon,
    negation_window: usize,
) -> Result<BTreeMap<String, SentimentScore>, SentimentError> {
    let reviews: Vec<&Review> = reviews.into_iter().collect();
    let known: HashMap<&str, &Review> =
        reviews.iter().map(|r| (r.review_id.as_str(), *r)).collect();
    let mut out = BTreeMap::new();
    for (id, &value) in scores {
        if !known.contains_key(id.as_str()) {
            return Err(SentimentError::UnknownReview(id.clone()));
        }
        let score = SentimentScore::new(value, ScoreSource::Precomputed).ok_or_else(|| {
            SentimentError::OutOfRange {
                review_id: id.clone(),
                value,
            }
        })?;
        out.insert(id.clone(), score);
    }
    for review in reviews {
        if !out.contains_key(&review.review_id) && review.has_text() {
            out.insert(
                review.review_id.clone(),
                score_lexicon(&review.text, lexicon, negation_window),
            );
        }
    }
    Ok(out)
}

/// Reads `review_id,score` records (header row required).
pub fn load_precomputed(path: &Path) -> Result<BTreeMap<String, f64>, SentimentError> {
    let content = std::fs::read_to_string(path).map_err(|source| SentimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_precomputed(&content)
}

pub fn parse_precomputed(content: &str) -> Result<BTreeMap<String, f64>, SentimentError> {
    #[derive(Deserialize)]
    struct Row {
        review_id: String,
        score: f64,
    }
    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let mut out = BTreeMap::new();
    for (idx, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| SentimentError::ScoresLine {
            line: idx + 2,
            message: e.to_string(),
        })?;
        out.insert(row.review_id, row.score);
    }
    Ok(out)
}
