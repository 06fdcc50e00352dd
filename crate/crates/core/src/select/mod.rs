//! Information-gain ranking and k-means grouping of candidate features.

pub mod kmeans;

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::text::Feature;

pub use kmeans::{KMeans, KMeansResult};

/// Default number of selected features.
pub const DEFAULT_FEATURES: usize = 60;
/// Default number of feature groups.
pub const DEFAULT_GROUPS: usize = 4;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Document counts of a feature in each class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureStats {
    pub feature: Feature,
    pub threat_docs: u64,
    pub normal_docs: u64,
}

fn entropy2(a: f64, b: f64) -> f64 {
    let total = a + b;
    if total == 0.0 {
        return 0.0;
    }
    [a, b]
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| {
            let p = x / total;
            -p * p.log2()
        })
        .sum()
}

/// Binary information gain, in bits, of a feature's presence/absence over
/// the threat/normal class variable.
pub fn information_gain(stats: &FeatureStats, n_threat: u64, n_normal: u64) -> f64 {
    let (t, n) = (stats.threat_docs as f64, stats.normal_docs as f64);
    let (nt, nn) = (n_threat as f64, n_normal as f64);
    let total = nt + nn;
    let present = t + n;
    let absent = total - present;

    let prior = entropy2(nt, nn);
    let cond = (present / total) * entropy2(t, n) + (absent / total) * entropy2(nt - t, nn - n);
    (prior - cond).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedFeature {
    pub feature: Feature,
    pub ig: f64,
    pub threat_docs: u64,
    pub normal_docs: u64,
}

/// Features in descending information gain; ties by feature order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedFeatures {
    entries: Vec<RankedFeature>,
    index: HashMap<Feature, usize>,
}

impl RankedFeatures {
    /// Sorts the entries into ranking order and drops later duplicates.
    pub fn new(mut entries: Vec<RankedFeature>) -> Self {
        entries.sort_by(ranking_order);
        let mut index = HashMap::with_capacity(entries.len());
        entries.retain(|e| {
            let fresh = !index.contains_key(&e.feature);
            if fresh {
                index.insert(e.feature.clone(), index.len());
            }
            fresh
        });
        RankedFeatures { entries, index }
    }

    pub fn entries(&self) -> &[RankedFeature] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, feature: &Feature) -> bool {
        self.index.contains_key(feature)
    }

    /// Zero-based rank of a selected feature.
    pub fn rank(&self, feature: &Feature) -> Option<usize> {
        self.index.get(feature).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RankedFeature> {
        self.entries.iter()
    }

    /// The first `k` entries.
    pub fn truncated(&self, k: usize) -> RankedFeatures {
        RankedFeatures::new(self.entries.iter().take(k).cloned().collect())
    }

    /// CSV with header `feature,arity,ig,threat_docs,normal_docs`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "feature,arity,ig,threat_docs,normal_docs")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.feature,
                e.feature.arity(),
                e.ig,
                e.threat_docs,
                e.normal_docs
            )?;
        }
        Ok(())
    }
}

fn ranking_order(a: &RankedFeature, b: &RankedFeature) -> std::cmp::Ordering {
    b.ig.total_cmp(&a.ig).then_with(|| a.feature.cmp(&b.feature))
}

/// Scores every candidate and keeps the best `k`.
pub fn select_top_k(
    stats: &[FeatureStats],
    k: usize,
    n_threat: u64,
    n_normal: u64,
) -> Result<RankedFeatures> {
    if stats.is_empty() {
        return Err(Error::NoCandidateFeatures);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("feature count must be at least 1".into()));
    }
    if n_threat == 0 || n_normal == 0 {
        return Err(Error::SingleClassCorpus);
    }
    let mut scored: Vec<RankedFeature> = stats
        .par_iter()
        .map(|s| RankedFeature {
            feature: s.feature.clone(),
            ig: information_gain(s, n_threat, n_normal),
            threat_docs: s.threat_docs,
            normal_docs: s.normal_docs,
        })
        .collect();
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, ranking_order);
        scored.truncate(k);
    }
    Ok(RankedFeatures::new(scored))
}

/// Four (by default) disjoint groups of similar selected features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroups {
    pub groups: Vec<Vec<Feature>>,
    pub centroids: Vec<[f64; 3]>,
    /// Within-cluster sum of squares after each iteration.
    pub wcss_history: Vec<f64>,
    membership: HashMap<Feature, usize>,
}

impl FeatureGroups {
    pub fn group_of(&self, feature: &Feature) -> Option<usize> {
        self.membership.get(feature).copied()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Clustering coordinates of a feature: threat prevalence, normal
/// prevalence, and arity scaled to [0, 1].
pub fn embedding(feature: &RankedFeature, n_threat: u64, n_normal: u64) -> [f64; 3] {
    [
        feature.threat_docs as f64 / n_threat as f64,
        feature.normal_docs as f64 / n_normal as f64,
        feature.feature.arity() as f64 / 3.0,
    ]
}

pub fn cluster_features(
    ranked: &RankedFeatures,
    n_threat: u64,
    n_normal: u64,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<FeatureGroups> {
    if ranked.is_empty() {
        return Err(Error::NoCandidateFeatures);
    }
    if n_threat == 0 || n_normal == 0 {
        return Err(Error::SingleClassCorpus);
    }
    let points: Vec<[f64; 3]> = ranked
        .iter()
        .map(|f| embedding(f, n_threat, n_normal))
        .collect();
    let result = KMeans::new(k, seed, max_iter)?.fit(&points);

    let mut groups = vec![Vec::new(); k];
    let mut membership = HashMap::with_capacity(points.len());
    for (entry, &g) in ranked.iter().zip(&result.assignments) {
        groups[g].push(entry.feature.clone());
        membership.insert(entry.feature.clone(), g);
    }
    Ok(FeatureGroups {
        groups,
        centroids: result.centroids,
        wcss_history: result.wcss_history,
        membership,
    })
}
