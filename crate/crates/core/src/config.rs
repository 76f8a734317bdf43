//! Pipeline configuration, read from TOML. Every section is optional; the
//! defaults reproduce the bundled study setup.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspects::{Aspect, DEFAULT_CLUSTERS, DEFAULT_DIMENSION, DEFAULT_MAX_KEYWORDS, DEFAULT_WINDOW};
use crate::corpus::CorpusFilter;
use crate::profiling::{Axis, ExperienceScheme};
use crate::sentiment::DEFAULT_NEGATION_WINDOW;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown aspect `{0}` in [aspects.seeds]")]
    UnknownAspect(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// Absent means the corpus is taken as is.
    pub filter: Option<CorpusFilter>,
    /// Replace display names from the name pool with this seed.
    pub anonymize_seed: Option<u64>,
    pub name_pool: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentSection {
    pub lexicon: Option<PathBuf>,
    pub negation_window: usize,
    /// `review_id,score` file of externally computed scores.
    pub precomputed: Option<PathBuf>,
}

impl Default for SentimentSection {
    fn default() -> Self {
        Self { lexicon: None, negation_window: DEFAULT_NEGATION_WINDOW, precomputed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilingSection {
    pub reviews_written: ExperienceScheme,
    pub helpful_votes: ExperienceScheme,
}

impl Default for ProfilingSection {
    fn default() -> Self {
        Self {
            reviews_written: ExperienceScheme::default_for(Axis::ReviewsWritten),
            helpful_votes: ExperienceScheme::default_for(Axis::HelpfulVotes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AspectsSection {
    pub clusters: usize,
    pub dimension: usize,
    pub window: usize,
    pub max_keywords: usize,
    pub seed: u64,
    pub stopwords: Option<PathBuf>,
    /// Word vectors to use instead of the corpus-derived embedding.
    pub embedding: Option<PathBuf>,
    /// Seed keywords per aspect id.
    pub seeds: BTreeMap<String, BTreeSet<String>>,
}

fn seed_set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

pub fn default_aspect_seeds() -> BTreeMap<String, BTreeSet<String>> {
    BTreeMap::from([
        (
            "food".into(),
            seed_set(&[
                "breakfast", "buffet", "coffee", "dinner", "restaurant", "pastries", "menu", "omelette",
                "croissants", "espresso", "lunch", "bar", "food", "tea", "room service",
            ]),
        ),
        (
            "facilities".into(),
            seed_set(&[
                "pool", "swimming pool", "gym", "elevator", "shower", "bathroom", "mattress", "wifi",
                "parking", "sauna", "balcony", "air conditioning", "bed", "towels",
            ]),
        ),
        (
            "service".into(),
            seed_set(&[
                "staff", "reception", "receptionist", "concierge", "housekeeping", "front desk", "manager",
                "doorman", "porter", "waiters", "service",
            ]),
        ),
        (
            "surrounding_environment".into(),
            seed_set(&[
                "neighborhood", "station", "train station", "subway", "river", "museums", "shops", "streets",
                "square", "harbour", "old town", "location", "beach", "park",
            ]),
        ),
        (
            "travel_purpose".into(),
            seed_set(&[
                "business", "conference", "honeymoon", "vacation", "anniversary", "sightseeing", "wedding",
                "convention", "meeting", "layover", "holiday",
            ]),
        ),
        (
            "companions".into(),
            seed_set(&[
                "family", "kids", "children", "husband", "wife", "colleagues", "partner", "parents", "daughter",
                "toddler", "son", "boyfriend", "girlfriend",
            ]),
        ),
    ])
}

impl Default for AspectsSection {
    fn default() -> Self {
        Self {
            clusters: DEFAULT_CLUSTERS,
            dimension: DEFAULT_DIMENSION,
            window: DEFAULT_WINDOW,
            max_keywords: DEFAULT_MAX_KEYWORDS,
            seed: 7,
            stopwords: None,
            embedding: None,
            seeds: default_aspect_seeds(),
        }
    }
}

impl AspectsSection {
    pub fn typed_seeds(&self) -> Result<BTreeMap<Aspect, BTreeSet<String>>, ConfigError> {
        self.seeds
            .iter()
            .map(|(id, words)| {
                let aspect = Aspect::from_id(id).ok_or_else(|| ConfigError::UnknownAspect(id.clone()))?;
                Ok((aspect, words.iter().map(|w| w.to_lowercase()).collect()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusSection,
    pub sentiment: SentimentSection,
    pub profiling: ProfilingSection,
    pub aspects: AspectsSection,
}

impl PipelineConfig {
    pub fn parse(content: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(content).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Loads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&content, path)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.corpus.name_pool,
            &mut self.sentiment.lexicon,
            &mut self.sentiment.precomputed,
            &mut self.aspects.stopwords,
            &mut self.aspects.embedding,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}
