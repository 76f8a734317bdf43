//! Reported aspects: keyword extraction, corpus-derived keyword embeddings,
//! k-means grouping, seed-driven curation into six aspect categories, and
//! multi-label tagging of reviews.

mod curation;
mod embedding;
mod keywords;
pub mod kmeans;
mod labeling;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curation::{curate_clusters, AspectScheme, ClusterDecision};
pub use embedding::{embed_keywords, load_external_embedding, parse_external_embedding, KeywordEmbedding};
pub use keywords::{extract_keywords, keyword_units, KeywordTable, DEFAULT_MAX_KEYWORDS};
pub use kmeans::{cluster_keywords, KeywordClusters};
pub use labeling::{aspect_percentages, label_reviews};

pub const DEFAULT_CLUSTERS: usize = 9;
pub const DEFAULT_DIMENSION: usize = 50;
pub const DEFAULT_WINDOW: usize = 5;

#[derive(Debug, Error)]
pub enum AspectError {
    #[error("embedding dimension {dim} must be between 1 and the keyword count {keywords}")]
    Dimension { dim: usize, keywords: usize },
    #[error("no keyword pairs co-occur within a window of {window} tokens; try a larger window")]
    DegenerateCooccurrence { window: usize },
    #[error("need at least {k} distinct non-zero vectors, found {found}")]
    TooFewPoints { k: usize, found: usize },
    #[error("k must be positive")]
    ZeroClusters,
    #[error("seed token `{token}` is listed under both {first} and {second}")]
    OverlappingSeeds {
        token: String,
        first: Aspect,
        second: Aspect,
    },
    #[error("embedding file line {line}: {message}")]
    EmbeddingLine { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    Food,
    Facilities,
    Service,
    SurroundingEnvironment,
    TravelPurpose,
    Companions,
}

impl Aspect {
    pub const ALL: [Aspect; 6] = [
        Aspect::Food,
        Aspect::Facilities,
        Aspect::Service,
        Aspect::SurroundingEnvironment,
        Aspect::TravelPurpose,
        Aspect::Companions,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Aspect::Food => "food",
            Aspect::Facilities => "facilities",
            Aspect::Service => "service",
            Aspect::SurroundingEnvironment => "surrounding_environment",
            Aspect::TravelPurpose => "travel_purpose",
            Aspect::Companions => "companions",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Aspect::Food => "food",
            Aspect::Facilities => "facilities",
            Aspect::Service => "service",
            Aspect::SurroundingEnvironment => "surrounding environment",
            Aspect::TravelPurpose => "travel purpose",
            Aspect::Companions => "companions",
        }
    }

    pub fn from_id(id: &str) -> Option<Aspect> {
        Aspect::ALL.into_iter().find(|a| a.id() == id)
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
