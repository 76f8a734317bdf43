use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::corpus::Review;
use crate::text::{is_numeric_or_ordinal, tokenize};

pub const DEFAULT_MAX_KEYWORDS: usize = 300;

/// Keywords ranked by document frequency (descending, ties lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeywordTable {
    pub keywords: Vec<(String, usize)>,
}

impl KeywordTable {
    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(|(t, _)| t.as_str())
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.keywords.iter().position(|(t, _)| t == token)
    }
}

/// Candidate keyword units found at each token position of `text`: the
/// unigram at that position and the bigram starting there, when the tokens
/// involved are neither stopwords nor numbers.
pub fn keyword_units(text: &str, stopwords: &HashSet<String>) -> Vec<Vec<String>> {
    let tokens = tokenize(text);
    let ok: Vec<bool> = tokens
        .iter()
        .map(|t| !stopwords.contains(t) && !is_numeric_or_ordinal(t))
        .collect();
    (0..tokens.len())
        .map(|i| {
            let mut units = Vec::new();
            if ok[i] {
                units.push(tokens[i].clone());
                if i + 1 < tokens.len() && ok[i + 1] {
                    units.push(format!("{} {}", tokens[i], tokens[i + 1]));
                }
            }
            units
        })
        .collect()
}

pub fn extract_keywords<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    stopwords: &HashSet<String>,
    max_k: usize,
) -> KeywordTable {
    let mut df: HashMap<String, usize> = HashMap::new();
    for review in reviews {
        let distinct: BTreeSet<String> = keyword_units(&review.text, stopwords)
            .into_iter()
            .flatten()
            .collect();
        for unit in distinct {
            *df.entry(unit).or_default() += 1;
        }
    }
    let mut keywords: Vec<(String, usize)> = df.into_iter().collect();
    keywords.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    keywords.truncate(max_k);
    KeywordTable { keywords }
}
