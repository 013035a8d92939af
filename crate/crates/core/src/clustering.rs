//! Two-step agglomerative clustering of a block's similarity graph.
//!
//! Step one links every pair whose score exceeds `beta1` and takes connected
//! components. Step two scores every pair of step-one clusters by the mean
//! of their above-`beta2` cross links, joins clusters whose score exceeds
//! `beta3` (one round, components of the cluster graph), and finally lets
//! papers that are still alone join the multi-paper cluster holding their
//! strongest link, if that link exceeds `beta4`.
//!
//! Every threshold is a strict inequality. Clusters are numbered by
//! ascending smallest paper id.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, NameBlock, PaperId};
use crate::similarity::{compute_terms, score, DisambiguationParams, SimilarityGraph, DEFAULT_YEAR_GAP};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    /// Canonical labels: components numbered by their smallest element.
    pub fn labels(&mut self) -> Vec<u32> {
        let n = self.parent.len();
        let mut label_of_root = vec![u32::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut next = 0;
        for x in 0..n as u32 {
            let r = self.find(x) as usize;
            if label_of_root[r] == u32::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            labels.push(label_of_root[r]);
        }
        labels
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: u32,
    /// Ascending.
    pub paper_ids: Vec<PaperId>,
}

/// A partition of one block's papers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub key: String,
    pub clusters: Vec<Cluster>,
}

impl Clustering {
    /// Build from per-paper labels. `papers` ascending; labels are
    /// renumbered canonically.
    pub fn from_labels(key: impl Into<String>, papers: &[PaperId], labels: &[u32]) -> Self {
        let mut remap: HashMap<u32, u32> = HashMap::new();
        let mut clusters: Vec<Cluster> = Vec::new();
        for (&paper, &label) in papers.iter().zip(labels) {
            let next = remap.len() as u32;
            let id = *remap.entry(label).or_insert(next);
            if id as usize == clusters.len() {
                clusters.push(Cluster {
                    cluster_id: id,
                    paper_ids: Vec::new(),
                });
            }
            clusters[id as usize].paper_ids.push(paper);
        }
        Clustering {
            key: key.into(),
            clusters,
        }
    }

    /// Canonicalize an arbitrary list of paper sets.
    pub fn from_sets(key: impl Into<String>, sets: Vec<Vec<PaperId>>) -> Self {
        let mut sets: Vec<Vec<PaperId>> = sets
            .into_iter()
            .filter(|s| !s.is_empty())
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        sets.sort_by_key(|s| s[0]);
        Clustering {
            key: key.into(),
            clusters: sets
                .into_iter()
                .enumerate()
                .map(|(k, paper_ids)| Cluster {
                    cluster_id: k as u32,
                    paper_ids,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn paper_count(&self) -> usize {
        self.clusters.iter().map(|c| c.paper_ids.len()).sum()
    }

    /// Map from paper id to position in [`Self::clusters`].
    pub fn assignment(&self) -> HashMap<PaperId, usize> {
        let mut map = HashMap::with_capacity(self.paper_count());
        for (k, c) in self.clusters.iter().enumerate() {
            for &p in &c.paper_ids {
                map.insert(p, k);
            }
        }
        map
    }

    /// Per-paper labels over the graph's paper list.
    fn local_labels(&self, graph: &SimilarityGraph) -> Vec<u32> {
        let mut labels = vec![u32::MAX; graph.papers().len()];
        for (k, c) in self.clusters.iter().enumerate() {
            for &p in &c.paper_ids {
                let local = graph
                    .local_index(p)
                    .unwrap_or_else(|| panic!("paper {p} of clustering {} is not in the graph", self.key));
                labels[local as usize] = k as u32;
            }
        }
        assert!(
            labels.iter().all(|&l| l != u32::MAX),
            "clustering {} does not cover every paper of its graph",
            self.key
        );
        labels
    }
}

fn step1_labels(graph: &SimilarityGraph, params: &DisambiguationParams) -> Vec<u32> {
    let mut sets = DisjointSets::new(graph.papers().len());
    for (terms, &(a, b)) in graph.links().iter().zip(graph.endpoints()) {
        if score(terms, params) > params.beta1 {
            sets.union(a, b);
        }
    }
    sets.labels()
}

/// Connected components of the links scoring above `beta1`. Unlinked
/// papers become singletons.
pub fn step1_components(graph: &SimilarityGraph, params: &DisambiguationParams) -> Clustering {
    let labels = step1_labels(graph, params);
    Clustering::from_labels(graph.key(), graph.papers(), &labels)
}

/// Mean above-`beta2` similarity between two disjoint clusters; pairs
/// without a stored link count as zero.
pub fn cluster_similarity(
    gamma: &Cluster,
    kappa: &Cluster,
    graph: &SimilarityGraph,
    params: &DisambiguationParams,
) -> f64 {
    if gamma.paper_ids.is_empty() || kappa.paper_ids.is_empty() {
        return 0.0;
    }
    let mut side: HashMap<PaperId, u8> = HashMap::new();
    for &p in &gamma.paper_ids {
        side.insert(p, 1);
    }
    for &p in &kappa.paper_ids {
        side.insert(p, 2);
    }
    let mut sum = 0.0;
    for terms in graph.links() {
        match (side.get(&terms.i), side.get(&terms.j)) {
            (Some(1), Some(2)) | (Some(2), Some(1)) => {
                let s = score(terms, params);
                if s > params.beta2 {
                    sum += s;
                }
            }
            _ => {}
        }
    }
    sum / (gamma.paper_ids.len() as f64 * kappa.paper_ids.len() as f64)
}

fn step2_labels(graph: &SimilarityGraph, params: &DisambiguationParams, first: &[u32]) -> Vec<u32> {
    let n_clusters = first.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut sizes = vec![0u32; n_clusters];
    for &l in first {
        sizes[l as usize] += 1;
    }

    // links are visited in (i, j) order, so the sums are reproducible
    let mut sums: HashMap<(u32, u32), f64> = HashMap::new();
    let scores: Vec<f64> = graph.links().iter().map(|t| score(t, params)).collect();
    for (&s, &(a, b)) in scores.iter().zip(graph.endpoints()) {
        let (ca, cb) = (first[a as usize], first[b as usize]);
        if ca != cb && s > params.beta2 {
            *sums.entry((ca.min(cb), ca.max(cb))).or_insert(0.0) += s;
        }
    }
    let mut merged = DisjointSets::new(n_clusters);
    for (&(ca, cb), &sum) in &sums {
        let similarity = sum / (f64::from(sizes[ca as usize]) * f64::from(sizes[cb as usize]));
        if similarity > params.beta3 {
            merged.union(ca, cb);
        }
    }
    let merged_label = merged.labels();
    let mut labels: Vec<u32> = first.iter().map(|&l| merged_label[l as usize]).collect();

    // attach remaining singletons to their strongest multi-paper neighbour
    let n_merged = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut merged_sizes = vec![0u32; n_merged];
    for &l in &labels {
        merged_sizes[l as usize] += 1;
    }
    let mut best: HashMap<u32, (f64, u32)> = HashMap::new();
    for (&s, &(a, b)) in scores.iter().zip(graph.endpoints()) {
        if s <= params.beta4 {
            continue;
        }
        for (alone, other) in [(a, b), (b, a)] {
            let (la, lo) = (labels[alone as usize], labels[other as usize]);
            if merged_sizes[la as usize] != 1 || merged_sizes[lo as usize] < 2 {
                continue;
            }
            // labels are canonical, so a smaller label means a smaller cluster id
            let entry = best.entry(alone).or_insert((s, lo));
            if s > entry.0 || (s == entry.0 && lo < entry.1) {
                *entry = (s, lo);
            }
        }
    }
    for (alone, (_, target)) in best {
        labels[alone as usize] = target;
    }
    labels
}

/// Merge well-linked clusters of a step-one clustering, then attach the
/// remaining singletons.
pub fn step2_merge(clustering: &Clustering, graph: &SimilarityGraph, params: &DisambiguationParams) -> Clustering {
    let first = clustering.local_labels(graph);
    let labels = step2_labels(graph, params, &first);
    Clustering::from_labels(graph.key(), graph.papers(), &labels)
}

/// Both clustering steps on precomputed terms.
pub fn cluster_graph(graph: &SimilarityGraph, params: &DisambiguationParams) -> Clustering {
    let first = step1_labels(graph, params);
    let labels = step2_labels(graph, params, &first);
    Clustering::from_labels(graph.key(), graph.papers(), &labels)
}

/// Compute terms for `block` with the default year gap and cluster them.
pub fn disambiguate_block(corpus: &Corpus, block: &NameBlock, params: &DisambiguationParams) -> Clustering {
    if block.is_empty() {
        return Clustering {
            key: block.key.clone(),
            clusters: Vec::new(),
        };
    }
    cluster_graph(&compute_terms(corpus, block, DEFAULT_YEAR_GAP), params)
}

#[derive(Serialize, Deserialize)]
struct ClusterLine {
    block: String,
    cluster_id: u32,
    paper_ids: Vec<PaperId>,
}

/// One `{block, cluster_id, paper_ids}` line per cluster.
pub fn write_clusters<W: Write>(clusterings: &[Clustering], out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for c in clusterings {
        for cluster in &c.clusters {
            let line = ClusterLine {
                block: c.key.clone(),
                cluster_id: cluster.cluster_id,
                paper_ids: cluster.paper_ids.clone(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}

/// Read a clusters file; consecutive lines with the same block form one
/// clustering.
pub fn read_clusters<R: BufRead>(input: R) -> std::io::Result<Vec<Clustering>> {
    let mut out: Vec<Clustering> = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ClusterLine = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("clusters line {}: {e}", n + 1))
        })?;
        let cluster = Cluster {
            cluster_id: parsed.cluster_id,
            paper_ids: parsed.paper_ids,
        };
        match out.last_mut() {
            Some(last) if last.key == parsed.block => last.clusters.push(cluster),
            _ => out.push(Clustering {
                key: parsed.block,
                clusters: vec![cluster],
            }),
        }
    }
    Ok(out)
}

pub fn save_clusters(clusterings: &[Clustering], path: impl AsRef<Path>) -> std::io::Result<()> {
    write_clusters(clusterings, File::create(path)?)
}

pub fn load_clusters(path: impl AsRef<Path>) -> std::io::Result<Vec<Clustering>> {
    read_clusters(BufReader::new(File::open(path)?))
}
