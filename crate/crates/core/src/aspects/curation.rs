use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use tracing::warn;

use super::{Aspect, AspectError};

/// How one keyword cluster was resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterDecision {
    pub cluster_id: usize,
    pub tokens: Vec<String>,
    /// `None` when the cluster matched no seed token and was dropped.
    pub aspect: Option<Aspect>,
    pub seed_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AspectScheme {
    pub keyword_assignment: BTreeMap<String, Aspect>,
    pub dropped: BTreeSet<String>,
    pub clusters: Vec<ClusterDecision>,
    /// Aspects that received no cluster; they stay in the scheme, empty.
    pub empty_aspects: Vec<Aspect>,
}

impl AspectScheme {
    pub fn keywords_of(&self, aspect: Aspect) -> impl Iterator<Item = &str> {
        self.keyword_assignment
            .iter()
            .filter(move |(_, &a)| a == aspect)
            .map(|(t, _)| t.as_str())
    }

    /// Aspects fed by more than one cluster.
    pub fn merged_aspects(&self) -> Vec<Aspect> {
        Aspect::ALL
            .into_iter()
            .filter(|&a| self.clusters.iter().filter(|c| c.aspect == Some(a)).count() > 1)
            .collect()
    }
}

/// Maps each cluster to the aspect whose seed tokens it contains most of
/// (ties go to the earlier aspect). Clusters with no seed token are dropped;
/// clusters landing on the same aspect are merged into it.
pub fn curate_clusters(
    assignment: &BTreeMap<String, usize>,
    seeds: &BTreeMap<Aspect, BTreeSet<String>>,
) -> Result<AspectScheme, AspectError> {
    let mut owner: BTreeMap<&str, Aspect> = BTreeMap::new();
    for (&aspect, tokens) in seeds {
        for token in tokens {
            if let Some(&first) = owner.get(token.as_str()) {
                return Err(AspectError::OverlappingSeeds {
                    token: token.clone(),
                    first,
                    second: aspect,
                });
            }
            owner.insert(token, aspect);
        }
    }

    let mut members: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (token, &cluster) in assignment {
        members.entry(cluster).or_default().push(token.clone());
    }

    let mut scheme = AspectScheme {
        keyword_assignment: BTreeMap::new(),
        dropped: BTreeSet::new(),
        clusters: Vec::new(),
        empty_aspects: Vec::new(),
    };
    for (cluster_id, tokens) in members {
        let mut hits: BTreeMap<Aspect, usize> = BTreeMap::new();
        for token in &tokens {
            if let Some(&aspect) = owner.get(token.as_str()) {
                *hits.entry(aspect).or_default() += 1;
            }
        }
        let best = hits
            .iter()
            .fold(None::<(Aspect, usize)>, |best, (&a, &n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((a, n)),
            });
        match best {
            Some((aspect, n)) => {
                for token in &tokens {
                    scheme.keyword_assignment.insert(token.clone(), aspect);
                }
                scheme.clusters.push(ClusterDecision {
                    cluster_id,
                    tokens,
                    aspect: Some(aspect),
                    seed_hits: n,
                });
            }
            None => {
                scheme.dropped.extend(tokens.iter().cloned());
                scheme.clusters.push(ClusterDecision {
                    cluster_id,
                    tokens,
                    aspect: None,
                    seed_hits: 0,
                });
            }
        }
    }
    for aspect in Aspect::ALL {
        if !scheme.clusters.iter().any(|c| c.aspect == Some(aspect)) {
            warn!(aspect = aspect.id(), "no keyword cluster maps to this aspect");
            scheme.empty_aspects.push(aspect);
        }
    }
    Ok(scheme)
}
