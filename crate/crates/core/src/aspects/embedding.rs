use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::keywords::{keyword_units, KeywordTable};
use super::AspectError;
use crate::corpus::Review;

/// Keyword vectors in table order. Keywords that never co-occur with another
/// keyword get the zero vector and are listed in `isolated`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeywordEmbedding {
    pub dim: usize,
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
    pub isolated: BTreeSet<String>,
}

impl KeywordEmbedding {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.tokens
            .iter()
            .position(|t| t == token)
            .map(|i| self.vectors[i].as_slice())
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        (nx > 0.0 && ny > 0.0).then(|| dot / (nx * ny))
    }
}

/// Symmetric keyword co-occurrence counts: two keyword occurrences co-occur
/// when their token positions differ by 1..=`window`.
pub fn cooccurrence<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    table: &KeywordTable,
    window: usize,
) -> DMatrix<f64> {
    let index: HashMap<&str, usize> = table.tokens().enumerate().map(|(i, t)| (t, i)).collect();
    let none = HashSet::new();
    let k = table.len();
    let mut counts = DMatrix::<f64>::zeros(k, k);
    for review in reviews {
        let positions: Vec<Vec<usize>> = keyword_units(&review.text, &none)
            .into_iter()
            .map(|units| {
                units
                    .iter()
                    .filter_map(|u| index.get(u.as_str()).copied())
                    .collect()
            })
            .collect();
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len().min(i + window + 1) {
                for &u in &positions[i] {
                    for &v in &positions[j] {
                        counts[(u, v)] += 1.0;
                        counts[(v, u)] += 1.0;
                    }
                }
            }
        }
    }
    counts
}

/// Positive pointwise mutual information of a symmetric count matrix.
pub fn ppmi(counts: &DMatrix<f64>) -> DMatrix<f64> {
    let total: f64 = counts.iter().sum();
    let rows: Vec<f64> = counts.row_iter().map(|r| r.sum()).collect();
    DMatrix::from_fn(counts.nrows(), counts.ncols(), |i, j| {
        let c = counts[(i, j)];
        if c <= 0.0 {
            return 0.0;
        }
        (c * total / (rows[i] * rows[j])).ln().max(0.0)
    })
}

/// Corpus-derived keyword vectors: window co-occurrence counts, PPMI, then a
/// rank-`dim` factorization keeping the largest eigenpairs of the symmetric
/// PPMI matrix (vector = eigenvector row scaled by sqrt of the eigenvalue).
pub fn embed_keywords<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    table: &KeywordTable,
    window: usize,
    dim: usize,
) -> Result<KeywordEmbedding, AspectError> {
    let k = table.len();
    if dim == 0 || dim > k {
        return Err(AspectError::Dimension { dim, keywords: k });
    }
    let counts = cooccurrence(reviews, table, window);
    if counts.iter().all(|&c| c == 0.0) {
        return Err(AspectError::DegenerateCooccurrence { window });
    }
    let isolated_rows: Vec<bool> = counts.row_iter().map(|r| r.sum() == 0.0).collect();
    let matrix = ppmi(&counts);

    let eigen = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut vectors = vec![vec![0.0; dim]; k];
    for (col, &e) in order.iter().take(dim).enumerate() {
        let scale = eigen.eigenvalues[e].max(0.0).sqrt();
        let v = eigen.eigenvectors.column(e);
        // eigenvectors are defined up to sign; make the largest entry positive
        let pivot = (0..k).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (row, vector) in vectors.iter_mut().enumerate() {
            if !isolated_rows[row] {
                vector[col] = sign * v[row] * scale;
            }
        }
    }

    let tokens: Vec<String> = table.tokens().map(str::to_string).collect();
    let isolated = tokens
        .iter()
        .zip(&isolated_rows)
        .filter(|(_, &iso)| iso)
        .map(|(t, _)| t.clone())
        .collect();
    Ok(KeywordEmbedding {
        dim,
        tokens,
        vectors,
        isolated,
    })
}

/// Reads `token v1 v2 ... vd` lines.
pub fn parse_external_embedding(content: &str) -> Result<HashMap<String, Vec<f64>>, AspectError> {
    let mut out = HashMap::new();
    let mut dim = None;
    for (idx, line) in content.lines().enumerate() {
        let err = |message: String| AspectError::EmbeddingLine {
            line: idx + 1,
            message,
        };
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let values = parts
            .map(|p| p.parse::<f64>().map_err(|e| err(format!("bad component {p:?}: {e}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err("non-finite component".into()));
        }
        match dim {
            None if values.is_empty() => return Err(err("no components".into())),
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(err(format!("expected {d} components, found {}", values.len())))
            }
            _ => {}
        }
        out.insert(token.to_lowercase(), values);
    }
    Ok(out)
}

/// Looks up table keywords in an external vector file. A bigram missing from
/// the file takes the mean of its two word vectors when both exist; anything
/// else missing is zero and isolated.
pub fn load_external_embedding(
    path: &Path,
    table: &KeywordTable,
) -> Result<KeywordEmbedding, AspectError> {
    let content = std::fs::read_to_string(path).map_err(|source| AspectError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let lookup = parse_external_embedding(&content)?;
    let dim = lookup.values().next().map_or(0, Vec::len);
    let mut vectors = Vec::with_capacity(table.len());
    let mut isolated = BTreeSet::new();
    for token in table.tokens() {
        let vector = lookup.get(token).cloned().or_else(|| {
            let (a, b) = token.split_once(' ')?;
            let (va, vb) = (lookup.get(a)?, lookup.get(b)?);
            Some(va.iter().zip(vb).map(|(x, y)| (x + y) / 2.0).collect())
        });
        vectors.push(vector.unwrap_or_else(|| {
            isolated.insert(token.to_string());
            vec![0.0; dim]
        }));
    }
    Ok(KeywordEmbedding {
        dim,
        tokens: table.tokens().map(str::to_string).collect(),
        vectors,
        isolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspects::extract_keywords;
    use chrono::NaiveDate;

    fn reviews(texts: &[&str]) -> Vec<Review> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Review {
                review_id: format!("r{i}"),
                hotel_id: "h".into(),
                rating: 3,
                text: t.to_string(),
                timestamp: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
                reviewer_review_count: 1,
                reviewer_vote_count: 0,
                display_name: String::new(),
            })
            .collect()
    }

    fn unigram_table(tokens: &[&str]) -> KeywordTable {
        KeywordTable {
            keywords: tokens.iter().map(|t| (t.to_string(), 1)).collect(),
        }
    }

    #[test]
    fn partners_get_parallel_vectors() {
        // alpha/beta only ever appear together, as do gamma/delta
        let corpus = reviews(&["alpha beta alpha beta", "gamma delta", "delta gamma delta"]);
        let table = unigram_table(&["alpha", "beta", "gamma", "delta"]);
        let emb = embed_keywords(&corpus, &table, 5, 2).unwrap();
        assert!(emb.cosine("alpha", "beta").unwrap() > 0.9);
        assert!(emb.cosine("gamma", "delta").unwrap() > 0.9);
        assert!(emb.cosine("alpha", "gamma").unwrap().abs() < 0.1);
    }

    #[test]
    fn isolated_keyword_is_zero_and_flagged() {
        let corpus = reviews(&["alpha beta", "lonely", "beta alpha"]);
        let table = unigram_table(&["alpha", "beta", "lonely"]);
        let emb = embed_keywords(&corpus, &table, 5, 2).unwrap();
        assert!(emb.get("lonely").unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(emb.isolated, BTreeSet::from(["lonely".to_string()]));
    }

    #[test]
    fn deterministic_bits() {
        let corpus = reviews(&["pool gym spa", "breakfast coffee buffet", "pool spa", "coffee buffet gym"]);
        let table = extract_keywords(&corpus, &HashSet::new(), 300);
        let a = embed_keywords(&corpus, &table, 5, 3).unwrap();
        let b = embed_keywords(&corpus, &table, 5, 3).unwrap();
        let bits = |e: &KeywordEmbedding| -> Vec<u64> {
            e.vectors.iter().flatten().map(|v| v.to_bits()).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn errors() {
        let corpus = reviews(&["alpha", "beta"]);
        let table = unigram_table(&["alpha", "beta"]);
        assert!(matches!(
            embed_keywords(&corpus, &table, 5, 2),
            Err(AspectError::DegenerateCooccurrence { window: 5 })
        ));
        assert!(matches!(
            embed_keywords(&corpus, &table, 5, 3),
            Err(AspectError::Dimension { dim: 3, keywords: 2 })
        ));
    }

    #[test]
    fn window_limits_cooccurrence() {
        let corpus = reviews(&["alpha x x beta"]);
        let table = unigram_table(&["alpha", "beta"]);
        assert_eq!(cooccurrence(&corpus, &table, 2)[(0, 1)], 0.0);
        assert_eq!(cooccurrence(&corpus, &table, 3)[(0, 1)], 1.0);
    }

    #[test]
    fn ppmi_matches_hand_computation() {
        let counts = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 4.0]);
        let p = ppmi(&counts);
        // total 8, rows 2 and 6: ln(2*8/(2*6)) and ln(4*8/(6*6)) < 0
        assert!((p[(0, 1)] - (16.0f64 / 12.0).ln()).abs() < 1e-12);
        assert_eq!(p[(1, 1)], 0.0);
        assert_eq!(p[(0, 0)], 0.0);
    }

    #[test]
    fn factorization_reconstructs_the_psd_part() {
        // with dim = k and a PSD matrix, V V^T equals the PPMI matrix
        let corpus = reviews(&["a b c a b", "c d a", "b d d c"]);
        let table = unigram_table(&["a", "b", "c", "d"]);
        let emb = embed_keywords(&corpus, &table, 5, 4).unwrap();
        let m = ppmi(&cooccurrence(&corpus, &table, 5));
        let eig = SymmetricEigen::new(m.clone());
        let mut psd = DMatrix::<f64>::zeros(4, 4);
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > 0.0 {
                let v = eig.eigenvectors.column(i);
                psd += lambda * v * v.transpose();
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = emb.vectors[i].iter().zip(&emb.vectors[j]).map(|(x, y)| x * y).sum();
                assert!((dot - psd[(i, j)]).abs() < 1e-9, "({i},{j}) {dot} vs {}", psd[(i, j)]);
            }
        }
    }

    #[test]
    fn external_vectors() {
        let parsed = parse_external_embedding("pool 1 0\nspa 0 1\n").unwrap();
        assert_eq!(parsed["spa"], vec![0.0, 1.0]);
        assert!(parse_external_embedding("pool 1 0\nspa 0\n").is_err());
        assert!(parse_external_embedding("pool 1 NaN\n").is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.txt");
        std::fs::write(&path, "pool 1 0\nspa 0 1\n").unwrap();
        let table = unigram_table(&["pool", "spa", "pool spa", "gym"]);
        let emb = load_external_embedding(&path, &table).unwrap();
        assert_eq!(emb.get("pool spa").unwrap(), &[0.5, 0.5]);
        assert_eq!(emb.isolated, BTreeSet::from(["gym".to_string()]));
    }
}
