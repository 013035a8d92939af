//! Evaluation of clusterings: h-index, first-initial precision, profile
//! recall and h-index recall, the aggregate errors, and two auxiliary
//! precision protocols (second initials and merged names).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::clustering::{cluster_graph, Cluster, Clustering};
use crate::corpus::{BlockMember, Corpus, GoldProfile, NameBlock, PaperId};
use crate::similarity::{compute_terms, DisambiguationParams};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no cluster carries a first initial; precision is undefined")]
    NoValidCluster,
    #[error("no profile has a positive h-index; h-index recall is undefined")]
    NoValidProfile,
    #[error("no block found for clustering {0}")]
    MissingBlock(String),
}

/// Largest `h` such that at least `h` entries are `>= h`.
pub fn h_index(citation_counts: &[usize]) -> usize {
    let mut sorted = citation_counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.iter().enumerate().take_while(|(k, &c)| c > *k).count()
}

/// h-index of a set of papers using citation counts from the corpus.
pub fn h_index_of<'a>(papers: impl IntoIterator<Item = &'a PaperId>, corpus: &Corpus) -> usize {
    let counts: Vec<usize> = papers.into_iter().map(|&p| corpus.citation_count(p)).collect();
    h_index(&counts)
}

/// Share of the most frequent value among `values`, `None` if empty.
fn modal_share<T: Eq + std::hash::Hash + Ord>(values: impl IntoIterator<Item = T>) -> Option<(f64, usize, usize)> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    let mut total = 0;
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
        total += 1;
    }
    let modal = counts.values().copied().max()?;
    Some((modal as f64 / total as f64, counts.len(), total))
}

/// Modal first-initial share among the cluster's focal mentions. Mentions
/// without an initial are ignored; `None` when no mention has one.
pub fn cluster_precision(cluster: &Cluster, corpus: &Corpus, block: &NameBlock) -> Option<f64> {
    let initials = cluster
        .paper_ids
        .iter()
        .flat_map(|&p| block.mentions_of(corpus, p))
        .filter_map(|m| m.first_initial);
    modal_share(initials).map(|(share, _, _)| share)
}

/// The cluster holding most of a profile's papers.
#[derive(Debug, Clone, PartialEq)]
pub struct BestMatch {
    pub clustering: usize,
    pub cluster: usize,
    pub overlap: Vec<PaperId>,
    pub overlap_h: usize,
}

/// Where each paper sits within a list of clusterings.
struct MatchIndex<'a> {
    clusterings: &'a [&'a Clustering],
    at: HashMap<PaperId, Vec<(usize, usize)>>,
}

impl<'a> MatchIndex<'a> {
    fn new(clusterings: &'a [&'a Clustering]) -> Self {
        let mut at: HashMap<PaperId, Vec<(usize, usize)>> = HashMap::new();
        for (ci, clustering) in clusterings.iter().enumerate() {
            for (k, cluster) in clustering.clusters.iter().enumerate() {
                for &p in &cluster.paper_ids {
                    at.entry(p).or_default().push((ci, k));
                }
            }
        }
        MatchIndex { clusterings, at }
    }

    fn best(&self, profile: &GoldProfile, corpus: &Corpus) -> Option<BestMatch> {
        if profile.paper_ids.is_empty() {
            return None;
        }
        // profile papers ascending, so each overlap list comes out ascending
        let mut overlaps: BTreeMap<(usize, usize), Vec<PaperId>> = BTreeMap::new();
        for p in &profile.paper_ids {
            for &loc in self.at.get(p).map(Vec::as_slice).unwrap_or_default() {
                overlaps.entry(loc).or_default().push(*p);
            }
        }
        let mut best: Option<BestMatch> = None;
        for ((ci, k), overlap) in overlaps {
            let better = match &best {
                None => true,
                Some(b) if overlap.len() != b.overlap.len() => overlap.len() > b.overlap.len(),
                Some(b) => h_index_of(&overlap, corpus) > b.overlap_h,
            };
            if better {
                let overlap_h = h_index_of(&overlap, corpus);
                best = Some(BestMatch {
                    clustering: ci,
                    cluster: k,
                    overlap,
                    overlap_h,
                });
            }
        }
        debug_assert!(best.as_ref().is_none_or(|b| self.clusterings[b.clustering].clusters.len() > b.cluster));
        best.or(Some(BestMatch {
            clustering: 0,
            cluster: 0,
            overlap: Vec::new(),
            overlap_h: 0,
        }))
    }
}

/// The cluster holding most of a profile's papers. Ties go to the larger
/// h-index of the overlap, then to the earlier clustering and cluster. When
/// no cluster shares a paper the first cluster is returned with an empty
/// overlap.
pub fn best_match(clusterings: &[&Clustering], profile: &GoldProfile, corpus: &Corpus) -> Option<BestMatch> {
    MatchIndex::new(clusterings).best(profile, corpus)
}

/// `|best ∩ profile| / |profile|`; `None` for an empty profile.
pub fn profile_recall(clustering: &Clustering, profile: &GoldProfile, corpus: &Corpus) -> Option<f64> {
    let best = best_match(&[clustering], profile, corpus)?;
    Some(best.overlap.len() as f64 / profile.paper_ids.len() as f64)
}

/// `h(best ∩ profile) / h(profile)`; `None` when the profile's h-index is 0.
pub fn profile_h_recall(clustering: &Clustering, profile: &GoldProfile, corpus: &Corpus) -> Option<f64> {
    h_recall_over(&[clustering], profile, corpus).map(|r| r.h_recall)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileScore {
    pub profile_id: String,
    pub size: usize,
    pub gold_h: usize,
    pub recall: f64,
    pub h_recall: f64,
}

fn h_recall_over(clusterings: &[&Clustering], profile: &GoldProfile, corpus: &Corpus) -> Option<ProfileScore> {
    h_recall_indexed(&MatchIndex::new(clusterings), profile, corpus)
}

fn h_recall_indexed(index: &MatchIndex, profile: &GoldProfile, corpus: &Corpus) -> Option<ProfileScore> {
    let gold_h = h_index_of(&profile.paper_ids, corpus);
    if gold_h == 0 {
        return None;
    }
    let best = index.best(profile, corpus)?;
    Some(ProfileScore {
        profile_id: profile.profile_id.clone(),
        size: profile.paper_ids.len(),
        gold_h,
        recall: best.overlap.len() as f64 / profile.paper_ids.len() as f64,
        h_recall: best.overlap_h as f64 / gold_h as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterScore {
    pub block: String,
    pub cluster_id: u32,
    pub size: usize,
    pub precision: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Support {
    pub clusters: usize,
    pub clusters_without_initials: usize,
    pub profiles: usize,
    pub profiles_empty: usize,
    pub profiles_h_zero: usize,
}

/// Aggregate errors over a set of clusterings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    /// Mean of `(1 - P) * sqrt(|K|)` over clusters with initials.
    pub p_error: f64,
    /// Mean of `1 - R^h` over profiles with positive h-index.
    pub rh_error: f64,
    pub clusters: Vec<ClusterScore>,
    pub profiles: Vec<ProfileScore>,
    pub support: Support,
}

/// Order-independent mean: values are sorted before compensated summation.
pub fn stable_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in sorted {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / values.len() as f64
}

/// Surname part of a block key (`smith`, `smith_j` and `smith_` all give
/// `smith`).
pub fn key_surname(key: &str) -> &str {
    key.split('_').next().unwrap_or(key)
}

/// Precision and h-index errors of `clusterings` (each matched to the block
/// with the same key) against `profiles`.
pub fn aggregate_errors(
    clusterings: &[Clustering],
    blocks: &[NameBlock],
    profiles: &[GoldProfile],
    corpus: &Corpus,
) -> Result<EvalResult, MetricsError> {
    let block_of: HashMap<&str, &NameBlock> = blocks.iter().map(|b| (b.key.as_str(), b)).collect();
    let mut support = Support::default();
    let mut clusters = Vec::new();
    let mut p_terms = Vec::new();
    for clustering in clusterings {
        let block = block_of
            .get(clustering.key.as_str())
            .ok_or_else(|| MetricsError::MissingBlock(clustering.key.clone()))?;
        for cluster in &clustering.clusters {
            match cluster_precision(cluster, corpus, block) {
                Some(precision) => {
                    let size = cluster.paper_ids.len();
                    p_terms.push((1.0 - precision) * (size as f64).sqrt());
                    clusters.push(ClusterScore {
                        block: clustering.key.clone(),
                        cluster_id: cluster.cluster_id,
                        size,
                        precision,
                    });
                    support.clusters += 1;
                }
                None => support.clusters_without_initials += 1,
            }
        }
    }

    let mut by_surname: BTreeMap<&str, Vec<&Clustering>> = BTreeMap::new();
    for c in clusterings {
        by_surname.entry(key_surname(&c.key)).or_default().push(c);
    }
    let indexes: HashMap<&str, MatchIndex> = by_surname.iter().map(|(s, cs)| (*s, MatchIndex::new(cs))).collect();
    let no_candidates = MatchIndex::new(&[]);
    let mut scores = Vec::new();
    let mut rh_terms = Vec::new();
    for profile in profiles {
        if profile.paper_ids.is_empty() {
            support.profiles_empty += 1;
            continue;
        }
        let index = indexes.get(profile.surname.as_str()).unwrap_or(&no_candidates);
        match h_recall_indexed(index, profile, corpus) {
            Some(score) => {
                rh_terms.push(1.0 - score.h_recall);
                scores.push(score);
                support.profiles += 1;
            }
            None => support.profiles_h_zero += 1,
        }
    }
    if p_terms.is_empty() {
        return Err(MetricsError::NoValidCluster);
    }
    if rh_terms.is_empty() {
        return Err(MetricsError::NoValidProfile);
    }
    Ok(EvalResult {
        p_error: stable_mean(&p_terms),
        rh_error: stable_mean(&rh_terms),
        clusters,
        profiles: scores,
        support,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondInitialReport {
    /// Mean modal second-initial share; `None` when no cluster qualifies.
    pub precision: Option<f64>,
    pub qualifying_clusters: usize,
}

/// Precision from second initials: over clusters whose focal mentions carry
/// at least two distinct second initials, the mean share of the most common
/// one. Mentions without a second initial are ignored.
pub fn second_initial_precision(clusterings: &[Clustering], blocks: &[NameBlock], corpus: &Corpus) -> SecondInitialReport {
    let block_of: HashMap<&str, &NameBlock> = blocks.iter().map(|b| (b.key.as_str(), b)).collect();
    let mut shares = Vec::new();
    for clustering in clusterings {
        let Some(block) = block_of.get(clustering.key.as_str()) else {
            continue;
        };
        for cluster in &clustering.clusters {
            let seconds = cluster
                .paper_ids
                .iter()
                .flat_map(|&p| block.mentions_of(corpus, p))
                .filter_map(|m| m.second_initial);
            if let Some((share, distinct, _)) = modal_share(seconds) {
                if distinct >= 2 {
                    shares.push(share);
                }
            }
        }
    }
    SecondInitialReport {
        precision: (!shares.is_empty()).then(|| stable_mean(&shares)),
        qualifying_clusters: shares.len(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MixingReport {
    pub pairs: usize,
    pub clusters: usize,
    pub mixed_clusters: usize,
    /// Papers carrying both names; left out of the merged block.
    pub shared_papers: usize,
}

impl MixingReport {
    pub fn mixed_fraction(&self) -> f64 {
        if self.clusters == 0 {
            0.0
        } else {
            self.mixed_clusters as f64 / self.clusters as f64
        }
    }
}

/// Cluster the union of two name blocks and count clusters that contain
/// papers from both names. Papers on which both names appear cannot be
/// attributed to either side and are dropped from the union.
pub fn merged_name_test(
    corpus: &Corpus,
    name_pairs: &[(NameBlock, NameBlock)],
    params: &DisambiguationParams,
    year_gap: u32,
) -> MixingReport {
    use rayon::prelude::*;
    let per_pair: Vec<MixingReport> = name_pairs
        .par_iter()
        .map(|(a, b)| {
            let pa: HashSet<PaperId> = a.papers().into_iter().collect();
            let pb: HashSet<PaperId> = b.papers().into_iter().collect();
            let shared: HashSet<PaperId> = pa.intersection(&pb).copied().collect();
            let members: Vec<BlockMember> = a
                .members
                .iter()
                .chain(&b.members)
                .copied()
                .filter(|m| !shared.contains(&m.paper))
                .collect();
            let merged = NameBlock::new(format!("{}|{}", a.key, b.key), members);
            let clustering = cluster_graph(&compute_terms(corpus, &merged, year_gap), params);
            let mixed = clustering
                .clusters
                .iter()
                .filter(|c| {
                    c.paper_ids.iter().any(|p| pa.contains(p)) && c.paper_ids.iter().any(|p| pb.contains(p))
                })
                .count();
            MixingReport {
                pairs: 1,
                clusters: clustering.len(),
                mixed_clusters: mixed,
                shared_papers: shared.len(),
            }
        })
        .collect();
    per_pair.into_iter().fold(MixingReport::default(), |acc, r| MixingReport {
        pairs: acc.pairs + r.pairs,
        clusters: acc.clusters + r.clusters,
        mixed_clusters: acc.mixed_clusters + r.mixed_clusters,
        shared_papers: acc.shared_papers + r.shared_papers,
    })
}

/// `n` distinct random pairs of distinct blocks, deterministic for `seed`.
pub fn sample_name_pairs(blocks: &[NameBlock], n: usize, seed: u64) -> Vec<(NameBlock, NameBlock)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let total = blocks.len() * blocks.len().saturating_sub(1) / 2;
    let want = n.min(total);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        let a = rng.gen_range(0..blocks.len());
        let b = rng.gen_range(0..blocks.len());
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        out.push((blocks[a.min(b)].clone(), blocks[a.max(b)].clone()));
    }
    out
}
