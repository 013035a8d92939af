//! Pairwise paper similarity inside a name block.
//!
//! Terms are computed once without any parameters ([`compute_terms`]) and
//! weighted later ([`score`]), so a parameter search only re-weights cached
//! numbers.
//!
//! The four terms for a pair `(i, j)` are
//!
//! * coauthor overlap: shared coauthor keys over the smaller coauthor set,
//!   with the block's own mentions removed from both sets,
//! * self-citation count: `[i cites j] + [j cites i]`,
//! * shared references: size of the reference-list intersection,
//! * co-citation overlap: shared citing papers over the smaller citer set.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, NameBlock, PaperId};

pub const DEFAULT_YEAR_GAP: u32 = 5;

/// Raw, unweighted evidence for one paper pair (`i < j`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkTerms {
    pub i: PaperId,
    pub j: PaperId,
    pub coauthor_overlap: f64,
    pub self_cite_count: u8,
    pub shared_refs: u32,
    pub cocitation_overlap: f64,
}

impl LinkTerms {
    pub fn is_zero(&self) -> bool {
        self.coauthor_overlap == 0.0
            && self.self_cite_count == 0
            && self.shared_refs == 0
            && self.cocitation_overlap == 0.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("{name} must be finite and non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("beta1 is fixed at 1, got {0}")]
    Beta1(f64),
}

/// Term weights and clustering thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationParams {
    pub alpha_a: f64,
    pub alpha_s: f64,
    pub alpha_r: f64,
    pub alpha_c: f64,
    #[serde(default = "one")]
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

fn one() -> f64 {
    1.0
}

/// Names of the seven searchable parameters, in vector order.
pub const PARAM_NAMES: [&str; 7] = ["alpha_a", "alpha_s", "alpha_r", "alpha_c", "beta2", "beta3", "beta4"];

impl DisambiguationParams {
    /// Reference weights and thresholds, used when no parameter file is given.
    pub const REPORTED_OPTIMUM: DisambiguationParams = DisambiguationParams {
        alpha_a: 0.54,
        alpha_s: 0.75,
        alpha_r: 0.19,
        alpha_c: 1.02,
        beta1: 1.0,
        beta2: 0.19,
        beta3: 0.011,
        beta4: 0.49,
    };

    pub fn from_vector(v: [f64; 7]) -> Self {
        DisambiguationParams {
            alpha_a: v[0],
            alpha_s: v[1],
            alpha_r: v[2],
            alpha_c: v[3],
            beta1: 1.0,
            beta2: v[4],
            beta3: v[5],
            beta4: v[6],
        }
    }

    pub fn to_vector(&self) -> [f64; 7] {
        [
            self.alpha_a,
            self.alpha_s,
            self.alpha_r,
            self.alpha_c,
            self.beta2,
            self.beta3,
            self.beta4,
        ]
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.beta1 != 1.0 {
            return Err(ParamsError::Beta1(self.beta1));
        }
        for (name, value) in PARAM_NAMES.iter().zip(self.to_vector()) {
            if !value.is_finite() || value < 0.0 {
                return Err(ParamsError::Negative { name, value });
            }
        }
        Ok(())
    }
}

impl Default for DisambiguationParams {
    fn default() -> Self {
        Self::REPORTED_OPTIMUM
    }
}

/// Weighted similarity of a pair.
#[inline]
pub fn score(terms: &LinkTerms, params: &DisambiguationParams) -> f64 {
    params.alpha_a * terms.coauthor_overlap
        + params.alpha_s * f64::from(terms.self_cite_count)
        + params.alpha_r * f64::from(terms.shared_refs)
        + params.alpha_c * terms.cocitation_overlap
}

/// Overlap coefficient `|X ∩ Y| / min(|X|, |Y|)`, zero if either is empty.
#[inline]
pub fn overlap(shared: u32, a: usize, b: usize) -> f64 {
    let m = a.min(b);
    if m == 0 {
        0.0
    } else {
        f64::from(shared) / m as f64
    }
}

/// Terms for every linked pair of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    key: String,
    papers: Vec<PaperId>,
    links: Vec<LinkTerms>,
    endpoints: Vec<(u32, u32)>,
}

impl SimilarityGraph {
    /// `papers` must be the block's distinct papers in ascending order and
    /// `links` sorted by `(i, j)` with both ends among `papers`.
    pub fn new(key: impl Into<String>, papers: Vec<PaperId>, links: Vec<LinkTerms>) -> Result<Self, String> {
        if papers.windows(2).any(|w| w[0] >= w[1]) {
            return Err("paper list must be strictly ascending".into());
        }
        let local = |id: PaperId| {
            papers
                .binary_search(&id)
                .map(|k| k as u32)
                .map_err(|_| format!("link endpoint {id} is not in the block"))
        };
        let mut endpoints = Vec::with_capacity(links.len());
        for l in &links {
            if l.i >= l.j {
                return Err(format!("link ({}, {}) is not ordered", l.i, l.j));
            }
            endpoints.push((local(l.i)?, local(l.j)?));
        }
        if endpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err("links must be sorted and unique".into());
        }
        Ok(SimilarityGraph {
            key: key.into(),
            papers,
            links,
            endpoints,
        })
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn papers(&self) -> &[PaperId] {
        &self.papers
    }

    pub fn links(&self) -> &[LinkTerms] {
        &self.links
    }

    /// Link endpoints as positions into [`Self::papers`].
    pub fn endpoints(&self) -> &[(u32, u32)] {
        &self.endpoints
    }

    pub fn local_index(&self, id: PaperId) -> Option<u32> {
        self.papers.binary_search(&id).ok().map(|k| k as u32)
    }
}

struct BlockView {
    /// dense corpus index per local paper
    dense: Vec<u32>,
    years: Vec<i32>,
    coauthors: Vec<Vec<u32>>,
    refs: Vec<Vec<u32>>,
    citers: Vec<Vec<u32>>,
}

impl BlockView {
    fn new(corpus: &Corpus, block: &NameBlock) -> Self {
        let ids = block.papers();
        let dense: Vec<u32> = ids
            .iter()
            .map(|id| corpus.index_of(*id).expect("block paper missing from corpus"))
            .collect();
        let mut coauthors = Vec::with_capacity(dense.len());
        for (&id, &d) in ids.iter().zip(&dense) {
            let focal: Vec<u16> = block.positions_of(id).collect();
            let mut keys: Vec<u32> = corpus
                .name_keys_of(d)
                .iter()
                .enumerate()
                .filter(|(pos, _)| !focal.contains(&(*pos as u16)))
                .map(|(_, k)| *k)
                .collect();
            keys.sort_unstable();
            keys.dedup();
            coauthors.push(keys);
        }
        BlockView {
            years: dense.iter().map(|&d| corpus.paper(d).year).collect(),
            refs: dense.iter().map(|&d| corpus.refs_of(d).to_vec()).collect(),
            citers: dense.iter().map(|&d| corpus.citers_of(d).to_vec()).collect(),
            coauthors,
            dense,
        }
    }

    fn postings(lists: &[Vec<u32>]) -> HashMap<u32, Vec<u32>> {
        let mut map: HashMap<u32, Vec<u32>> = HashMap::new();
        for (local, list) in lists.iter().enumerate() {
            for &f in list {
                map.entry(f).or_default().push(local as u32);
            }
        }
        map
    }
}

#[inline]
fn later(list: &[u32], i: usize) -> &[u32] {
    &list[list.partition_point(|&x| x <= i as u32)..]
}

#[derive(Default, Clone)]
struct Accumulator {
    coauthor: Vec<u32>,
    selfcite: Vec<u8>,
    refs: Vec<u32>,
    citers: Vec<u32>,
    touched: Vec<u32>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            coauthor: vec![0; n],
            selfcite: vec![0; n],
            refs: vec![0; n],
            citers: vec![0; n],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn touch(&mut self, j: u32) {
        let j = j as usize;
        if self.coauthor[j] == 0 && self.selfcite[j] == 0 && self.refs[j] == 0 && self.citers[j] == 0 {
            self.touched.push(j as u32);
        }
    }
}

/// Compute the parameter-free terms for every pair of the block whose
/// publication years differ by at most `year_gap`. Pairs with all four
/// terms zero are omitted. Links come back sorted by `(i, j)`.
pub fn compute_terms(corpus: &Corpus, block: &NameBlock, year_gap: u32) -> SimilarityGraph {
    let view = BlockView::new(corpus, block);
    let n = view.dense.len();
    let gap = year_gap as i64;
    let by_coauthor = BlockView::postings(&view.coauthors);
    let by_ref = BlockView::postings(&view.refs);
    let by_citer = BlockView::postings(&view.citers);
    let local_of: HashMap<u32, u32> = view.dense.iter().enumerate().map(|(l, &d)| (d, l as u32)).collect();
    let ids = block.papers();

    let within = |i: usize, j: u32| (i64::from(view.years[i]) - i64::from(view.years[j as usize])).abs() <= gap;

    let per_paper: Vec<Vec<LinkTerms>> = (0..n)
        .into_par_iter()
        .map_init(
            || Accumulator::new(n),
            |acc, i| {
                for key in &view.coauthors[i] {
                    for &j in later(&by_coauthor[key], i) {
                        if within(i, j) {
                            acc.touch(j);
                            acc.coauthor[j as usize] += 1;
                        }
                    }
                }
                for r in &view.refs[i] {
                    for &j in later(&by_ref[r], i) {
                        if within(i, j) {
                            acc.touch(j);
                            acc.refs[j as usize] += 1;
                        }
                    }
                }
                for c in &view.citers[i] {
                    for &j in later(&by_citer[c], i) {
                        if within(i, j) {
                            acc.touch(j);
                            acc.citers[j as usize] += 1;
                        }
                    }
                }
                // j in refs(i) means i cites j; j in citers(i) means j cites i
                for d in view.refs[i].iter().chain(&view.citers[i]) {
                    if let Some(&j) = local_of.get(d) {
                        if j as usize > i && within(i, j) {
                            acc.touch(j);
                            acc.selfcite[j as usize] += 1;
                        }
                    }
                }

                let mut touched = std::mem::take(&mut acc.touched);
                touched.sort_unstable();
                let mut out = Vec::with_capacity(touched.len());
                for &j in &touched {
                    let j = j as usize;
                    out.push(LinkTerms {
                        i: ids[i],
                        j: ids[j],
                        coauthor_overlap: overlap(acc.coauthor[j], view.coauthors[i].len(), view.coauthors[j].len()),
                        self_cite_count: acc.selfcite[j],
                        shared_refs: acc.refs[j],
                        cocitation_overlap: overlap(acc.citers[j], view.citers[i].len(), view.citers[j].len()),
                    });
                    acc.coauthor[j] = 0;
                    acc.selfcite[j] = 0;
                    acc.refs[j] = 0;
                    acc.citers[j] = 0;
                }
                touched.clear();
                acc.touched = touched;
                out
            },
        )
        .collect();

    let links: Vec<LinkTerms> = per_paper.into_iter().flatten().collect();
    let endpoints = links
        .iter()
        .map(|l| {
            (
                ids.binary_search(&l.i).unwrap() as u32,
                ids.binary_search(&l.j).unwrap() as u32,
            )
        })
        .collect();
    SimilarityGraph {
        key: block.key.clone(),
        papers: ids,
        links,
        endpoints,
    }
}

/// Term graphs for many blocks, in block order.
pub fn compute_all(corpus: &Corpus, blocks: &[NameBlock], year_gap: u32) -> Vec<SimilarityGraph> {
    blocks.par_iter().map(|b| compute_terms(corpus, b, year_gap)).collect()
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("link cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("link cache line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CacheLine {
    Block {
        block: String,
        papers: Vec<PaperId>,
    },
    Link {
        i: PaperId,
        j: PaperId,
        a: f64,
        s: u8,
        r: u32,
        c: f64,
    },
}

/// Write term graphs as line-delimited records: one `{block, papers}`
/// header per block followed by its `{i, j, a, s, r, c}` links.
pub fn write_link_cache<W: Write>(graphs: &[SimilarityGraph], out: W) -> Result<(), CacheError> {
    let mut out = BufWriter::new(out);
    for g in graphs {
        serde_json::to_writer(
            &mut out,
            &CacheLine::Block {
                block: g.key.clone(),
                papers: g.papers.clone(),
            },
        )
        .map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for l in &g.links {
            serde_json::to_writer(
                &mut out,
                &CacheLine::Link {
                    i: l.i,
                    j: l.j,
                    a: l.coauthor_overlap,
                    s: l.self_cite_count,
                    r: l.shared_refs,
                    c: l.cocitation_overlap,
                },
            )
            .map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_link_cache<R: BufRead>(input: R) -> Result<Vec<SimilarityGraph>, CacheError> {
    let mut graphs = Vec::new();
    let mut current: Option<(String, Vec<PaperId>, Vec<LinkTerms>, usize)> = None;
    let finish = |cur: (String, Vec<PaperId>, Vec<LinkTerms>, usize)| {
        let (key, papers, links, line) = cur;
        SimilarityGraph::new(key, papers, links).map_err(|message| CacheError::Format { line, message })
    };
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CacheLine = serde_json::from_str(&line).map_err(|e| CacheError::Format {
            line: n + 1,
            message: e.to_string(),
        })?;
        match parsed {
            CacheLine::Block { block, papers } => {
                if let Some(cur) = current.take() {
                    graphs.push(finish(cur)?);
                }
                current = Some((block, papers, Vec::new(), n + 1));
            }
            CacheLine::Link { i, j, a, s, r, c } => {
                let Some(cur) = current.as_mut() else {
                    return Err(CacheError::Format {
                        line: n + 1,
                        message: "link before any block header".into(),
                    });
                };
                cur.2.push(LinkTerms {
                    i,
                    j,
                    coauthor_overlap: a,
                    self_cite_count: s,
                    shared_refs: r,
                    cocitation_overlap: c,
                });
            }
        }
    }
    if let Some(cur) = current.take() {
        graphs.push(finish(cur)?);
    }
    Ok(graphs)
}

pub fn save_link_cache(graphs: &[SimilarityGraph], path: impl AsRef<Path>) -> Result<(), CacheError> {
    write_link_cache(graphs, File::create(path)?)
}

pub fn load_link_cache(path: impl AsRef<Path>) -> Result<Vec<SimilarityGraph>, CacheError> {
    read_link_cache(BufReader::new(File::open(path)?))
}
