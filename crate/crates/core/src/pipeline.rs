//! End-to-end analysis: reviewer profiles, emotion categories and reported
//! aspects for every review, then per-hotel shapes and transparency
//! payloads. The output is a pure function of corpus and configuration.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::aspects::{
    aspect_percentages, cluster_keywords, curate_clusters, embed_keywords, extract_keywords, label_reviews,
    load_external_embedding, Aspect, AspectError, AspectScheme,
};
use crate::config::{ConfigError, PipelineConfig};
use crate::corpus::{anonymize, apply_filter, bundled_name_pool, load_name_pool, CorpusError, Hotel, HotelMeta};
use crate::profiling::{profile_reviews, ProfilingError};
use crate::sentiment::{attach_precomputed, bin_emotion, load_precomputed, EmotionCategory, Lexicon, SentimentError};
use crate::shapes::{classify_shape, extremity_share, RatingHistogram, ShapeLabel, SHAPE_RULES_VERSION};
use crate::text::{bundled_stopwords, parse_word_list};
use crate::transparency::{build_breakdown, CategoryScheme, InfoType, Labels, TransparencyBreakdown, TransparencyError};

pub const BUNDLE_VERSION: &str = "analysis-bundle/1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Profiling(#[from] ProfilingError),
    #[error(transparent)]
    Sentiment(#[from] SentimentError),
    #[error(transparent)]
    Aspects(#[from] AspectError),
    #[error(transparent)]
    Transparency(#[from] TransparencyError),
    #[error("cannot read stopwords {path}: {source}")]
    Stopwords {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus has no reviews with text to extract aspect keywords from")]
    NoText,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotelAnalysis {
    pub meta: HotelMeta,
    pub review_count: usize,
    pub average_rating: Option<f64>,
    pub histogram: RatingHistogram,
    pub shape: Option<ShapeLabel>,
    pub extremity_share: Option<f64>,
    pub aspect_percentages: BTreeMap<Aspect, f64>,
    pub breakdowns: BTreeMap<InfoType, TransparencyBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisBundle {
    pub bundle_version: String,
    pub shape_rules_version: String,
    pub config: PipelineConfig,
    pub hotels: Vec<HotelAnalysis>,
    pub schemes: BTreeMap<InfoType, CategoryScheme>,
    pub labels: BTreeMap<InfoType, Labels>,
    pub sentiment_scores: BTreeMap<String, f64>,
    pub aspect_scheme: AspectScheme,
}

impl AnalysisBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    pub fn hotel(&self, hotel_id: &str) -> Option<&HotelAnalysis> {
        self.hotels.iter().find(|h| h.meta.hotel_id == hotel_id)
    }
}

/// Analyzed corpus: the (filtered, possibly anonymized) hotels and the bundle.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub hotels: Vec<Hotel>,
    pub bundle: AnalysisBundle,
}

impl Analysis {
    pub fn hotel(&self, hotel_id: &str) -> Option<&Hotel> {
        self.hotels.iter().find(|h| h.id() == hotel_id)
    }

    pub fn scheme(&self, info: InfoType) -> &CategoryScheme {
        &self.bundle.schemes[&info]
    }

    pub fn labels(&self, info: InfoType) -> &Labels {
        &self.bundle.labels[&info]
    }

    pub fn breakdown(&self, hotel_id: &str, info: InfoType) -> Option<&TransparencyBreakdown> {
        self.bundle.hotel(hotel_id).map(|h| &h.breakdowns[&info])
    }
}

fn aspect_scheme(hotels: &[Hotel], cfg: &PipelineConfig, lexicon: &Lexicon) -> Result<AspectScheme, PipelineError> {
    let section = &cfg.aspects;
    let mut stop: HashSet<String> = match &section.stopwords {
        Some(path) => parse_word_list(
            &std::fs::read_to_string(path).map_err(|source| PipelineError::Stopwords { path: path.clone(), source })?,
        ),
        None => bundled_stopwords(),
    };
    // opinion words describe, they are not aspects
    stop.extend(lexicon.tokens().map(|(t, _)| t.to_string()));
    let reviews = || hotels.iter().flat_map(|h| &h.reviews).filter(|r| r.has_text());
    if reviews().next().is_none() {
        return Err(PipelineError::NoText);
    }
    let table = extract_keywords(reviews(), &stop, section.max_keywords);
    let embedding = match &section.embedding {
        Some(path) => load_external_embedding(path, &table)?,
        None => embed_keywords(reviews(), &table, section.window, section.dimension.min(table.len()))?,
    };
    let clusters = cluster_keywords(&embedding, section.clusters, section.seed)?;
    Ok(curate_clusters(&clusters.clusters, &section.typed_seeds()?)?)
}

/// Applies the configured filter and anonymization, then labels every review.
pub fn analyze(hotels: &[Hotel], cfg: &PipelineConfig) -> Result<Analysis, PipelineError> {
    let mut hotels = match &cfg.corpus.filter {
        Some(filter) => apply_filter(hotels, filter)?,
        None => hotels.to_vec(),
    };
    if let Some(seed) = cfg.corpus.anonymize_seed {
        let pool = match &cfg.corpus.name_pool {
            Some(path) => load_name_pool(path)?,
            None => bundled_name_pool(),
        };
        hotels = anonymize(&hotels, &pool, seed)?;
    }
    let lexicon = match &cfg.sentiment.lexicon {
        Some(path) => Lexicon::load(path)?,
        None => Lexicon::bundled(),
    };
    let all = || hotels.iter().flat_map(|h| &h.reviews);

    cfg.profiling.reviews_written.validate()?;
    cfg.profiling.helpful_votes.validate()?;
    let profiles = profile_reviews(all(), &cfg.profiling.reviews_written, &cfg.profiling.helpful_votes)?;

    let imported = match &cfg.sentiment.precomputed {
        Some(path) => load_precomputed(path)?,
        None => BTreeMap::new(),
    };
    let scores = attach_precomputed(all(), &imported, &lexicon, cfg.sentiment.negation_window)?;
    let emotions: BTreeMap<String, EmotionCategory> =
        scores.iter().map(|(id, s)| (id.clone(), bin_emotion(*s))).collect();

    let scheme = aspect_scheme(&hotels, cfg, &lexicon)?;
    let aspects = label_reviews(all(), &scheme);

    let schemes = BTreeMap::from([
        (InfoType::ReviewsWritten, CategoryScheme::experience(&cfg.profiling.reviews_written)?),
        (InfoType::HelpfulVotes, CategoryScheme::experience(&cfg.profiling.helpful_votes)?),
        (InfoType::Emotion, CategoryScheme::emotion()),
        (InfoType::Aspects, CategoryScheme::aspects()),
    ]);
    let labels = BTreeMap::from([
        (InfoType::ReviewsWritten, Labels::experience(&profiles, InfoType::ReviewsWritten)),
        (InfoType::HelpfulVotes, Labels::experience(&profiles, InfoType::HelpfulVotes)),
        (InfoType::Emotion, Labels::emotions(&emotions)),
        (InfoType::Aspects, Labels::aspects(&aspects)),
    ]);

    let mut analyses = Vec::new();
    for hotel in &hotels {
        let histogram = RatingHistogram::from_reviews(&hotel.reviews);
        let ids: BTreeSet<&str> = hotel.reviews.iter().map(|r| r.review_id.as_str()).collect();
        let hotel_aspects: BTreeMap<String, BTreeSet<Aspect>> = aspects
            .iter()
            .filter(|(id, _)| ids.contains(id.as_str()))
            .map(|(id, set)| (id.clone(), set.clone()))
            .collect();
        let mut breakdowns = BTreeMap::new();
        for info in InfoType::ALL {
            breakdowns.insert(info, build_breakdown(hotel, &schemes[&info], &labels[&info])?);
        }
        analyses.push(HotelAnalysis {
            meta: hotel.meta.clone(),
            review_count: hotel.reviews.len(),
            average_rating: hotel.average_rating(),
            histogram,
            shape: classify_shape(&histogram).ok(),
            extremity_share: extremity_share(&histogram).ok(),
            aspect_percentages: aspect_percentages(&hotel_aspects),
            breakdowns,
        });
    }

    let bundle = AnalysisBundle {
        bundle_version: BUNDLE_VERSION.to_string(),
        shape_rules_version: SHAPE_RULES_VERSION.to_string(),
        config: cfg.clone(),
        hotels: analyses,
        schemes,
        labels,
        sentiment_scores: scores.iter().map(|(id, s)| (id.clone(), s.value())).collect(),
        aspect_scheme: scheme,
    };
    Ok(Analysis { hotels, bundle })
}
