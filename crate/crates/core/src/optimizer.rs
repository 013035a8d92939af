//! Parameter search: uniform random sampling, local search on shrinking
//! spheres, and feature-ablation lower hulls.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{cluster_graph, Clustering};
use crate::corpus::{Corpus, GoldProfile, NameBlock};
use crate::metrics::{aggregate_errors, EvalResult, MetricsError};
use crate::similarity::{compute_all, DisambiguationParams, SimilarityGraph, PARAM_NAMES};

pub const DIM: usize = 7;

/// Closed per-parameter ranges, in `to_vector` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub lower: [f64; DIM],
    pub upper: [f64; DIM],
}

impl Default for ParamSpace {
    fn default() -> Self {
        ParamSpace {
            lower: [0.0; DIM],
            upper: [2.0, 2.0, 2.0, 2.0, 1.0, 0.2, 2.0],
        }
    }
}

impl ParamSpace {
    pub fn new(lower: [f64; DIM], upper: [f64; DIM]) -> Result<Self, String> {
        for k in 0..DIM {
            if !(lower[k] >= 0.0 && lower[k] <= upper[k] && upper[k].is_finite()) {
                return Err(format!("bad range for {}: [{}, {}]", PARAM_NAMES[k], lower[k], upper[k]));
            }
        }
        Ok(ParamSpace { lower, upper })
    }

    /// The space with disabled features pinned to weight 0.
    pub fn restricted(&self, features: FeatureSet) -> Self {
        let mut s = *self;
        for f in 0..4 {
            if !features.has(f) {
                s.lower[f] = 0.0;
                s.upper[f] = 0.0;
            }
        }
        s
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DisambiguationParams {
        let mut v = [0.0; DIM];
        for k in 0..DIM {
            v[k] = if self.upper[k] > self.lower[k] {
                rng.gen_range(self.lower[k]..=self.upper[k])
            } else {
                self.lower[k]
            };
        }
        DisambiguationParams::from_vector(v)
    }

    pub fn contains(&self, p: &DisambiguationParams) -> bool {
        let v = p.to_vector();
        (0..DIM).all(|k| v[k] >= self.lower[k] && v[k] <= self.upper[k])
    }

    fn free_dims(&self) -> Vec<usize> {
        (0..DIM).filter(|&k| self.upper[k] > self.lower[k]).collect()
    }

    fn to_unit(&self, p: &DisambiguationParams) -> [f64; DIM] {
        let v = p.to_vector();
        let mut u = [0.0; DIM];
        for k in 0..DIM {
            let width = self.upper[k] - self.lower[k];
            u[k] = if width > 0.0 { (v[k] - self.lower[k]) / width } else { 0.0 };
        }
        u
    }

    fn from_unit(&self, u: &[f64; DIM]) -> DisambiguationParams {
        let mut v = [0.0; DIM];
        for k in 0..DIM {
            v[k] = self.lower[k] + u[k].clamp(0.0, 1.0) * (self.upper[k] - self.lower[k]);
        }
        DisambiguationParams::from_vector(v)
    }
}

/// Which of the four similarity features (A, S, R, C) are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureSet(u8);

impl FeatureSet {
    pub const ALL: FeatureSet = FeatureSet(0b1111);
    const LETTERS: [char; 4] = ['A', 'S', 'R', 'C'];

    pub fn single(feature: usize) -> Self {
        assert!(feature < 4);
        FeatureSet(1 << feature)
    }

    pub fn has(&self, feature: usize) -> bool {
        self.0 & (1 << feature) != 0
    }

    pub fn singles() -> [FeatureSet; 4] {
        [0, 1, 2, 3].map(FeatureSet::single)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in Self::LETTERS.iter().enumerate() {
            if self.has(k) {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for FeatureSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut bits = 0u8;
        for c in s.chars() {
            let k = Self::LETTERS
                .iter()
                .position(|&l| l == c.to_ascii_uppercase())
                .ok_or_else(|| format!("unknown feature {c:?} in {s:?}; use letters from ASRC"))?;
            bits |= 1 << k;
        }
        if bits == 0 {
            return Err("empty feature set".into());
        }
        Ok(FeatureSet(bits))
    }
}

/// Something that scores a parameter vector with a pair of errors.
pub trait Objective: Sync {
    fn errors(&self, params: &DisambiguationParams) -> (f64, f64);
}

/// Blocks, their precomputed similarity graphs, and gold profiles.
pub struct EvalSet<'c> {
    corpus: &'c Corpus,
    blocks: Vec<NameBlock>,
    graphs: Vec<SimilarityGraph>,
    profiles: Vec<GoldProfile>,
}

impl<'c> EvalSet<'c> {
    /// Compute the term graphs for `blocks`.
    pub fn build(corpus: &'c Corpus, blocks: Vec<NameBlock>, profiles: Vec<GoldProfile>, year_gap: u32) -> Self {
        let graphs = compute_all(corpus, &blocks, year_gap);
        EvalSet {
            corpus,
            blocks,
            graphs,
            profiles,
        }
    }

    /// Reuse cached graphs; every block must have a graph with the same key
    /// and papers.
    pub fn from_graphs(
        corpus: &'c Corpus,
        blocks: Vec<NameBlock>,
        graphs: Vec<SimilarityGraph>,
        profiles: Vec<GoldProfile>,
    ) -> Result<Self, String> {
        let mut by_key: std::collections::HashMap<String, SimilarityGraph> =
            graphs.into_iter().map(|g| (g.key().to_string(), g)).collect();
        let mut ordered = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let g = by_key
                .remove(&b.key)
                .ok_or_else(|| format!("no cached graph for block {}", b.key))?;
            if g.papers() != b.papers().as_slice() {
                return Err(format!("cached graph for {} does not match the corpus", b.key));
            }
            ordered.push(g);
        }
        Ok(EvalSet {
            corpus,
            blocks,
            graphs: ordered,
            profiles,
        })
    }

    pub fn blocks(&self) -> &[NameBlock] {
        &self.blocks
    }

    pub fn graphs(&self) -> &[SimilarityGraph] {
        &self.graphs
    }

    pub fn profiles(&self) -> &[GoldProfile] {
        &self.profiles
    }

    pub fn corpus(&self) -> &Corpus {
        self.corpus
    }

    pub fn cluster(&self, params: &DisambiguationParams) -> Vec<Clustering> {
        self.graphs.par_iter().map(|g| cluster_graph(g, params)).collect()
    }

    pub fn evaluate(&self, params: &DisambiguationParams) -> Result<EvalResult, MetricsError> {
        aggregate_errors(&self.cluster(params), &self.blocks, &self.profiles, self.corpus)
    }
}

impl Objective for EvalSet<'_> {
    fn errors(&self, params: &DisambiguationParams) -> (f64, f64) {
        match self.evaluate(params) {
            Ok(r) => (r.p_error, r.rh_error),
            // an eval set without valid clusters or profiles scores worst
            Err(_) => (f64::INFINITY, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub params: DisambiguationParams,
    pub p_error: f64,
    pub rh_error: f64,
    pub objective: f64,
    pub weight: f64,
    /// Evaluations spent to reach this result.
    pub evaluations: usize,
    pub seed: u64,
}

pub fn scalarize(p_error: f64, rh_error: f64, weight: f64) -> f64 {
    weight * rh_error + (1.0 - weight) * p_error
}

fn scored<O: Objective + ?Sized>(objective: &O, params: DisambiguationParams, weight: f64, seed: u64) -> SearchResult {
    let (p_error, rh_error) = objective.errors(&params);
    SearchResult {
        params,
        p_error,
        rh_error,
        objective: scalarize(p_error, rh_error, weight),
        weight,
        evaluations: 1,
        seed,
    }
}

/// Per-sample generator: sample `i` of a run is independent of thread count.
fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` uniform samples from `space`, evaluated in parallel and returned in
/// sample order.
pub fn random_search<O: Objective + ?Sized>(
    space: &ParamSpace,
    n: usize,
    seed: u64,
    weight: f64,
    objective: &O,
) -> Vec<SearchResult> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let params = space.sample(&mut sample_rng(seed, i));
            scored(objective, params, weight, seed)
        })
        .collect()
}

/// Lowest objective; ties go to lower p_error, then lower rh_error, then the
/// earlier result, so the pick is never dominated by another result.
pub fn best_of(results: &[SearchResult]) -> Option<&SearchResult> {
    results.iter().min_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then(a.p_error.total_cmp(&b.p_error))
            .then(a.rh_error.total_cmp(&b.rh_error))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    /// Starting radius in range-normalized units.
    pub initial: f64,
    pub shrink: f64,
    pub min_radius: f64,
    pub max_iterations: usize,
    pub probes: usize,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        RadiusSchedule {
            initial: 0.25,
            shrink: 0.5,
            min_radius: 1e-3,
            max_iterations: 60,
            probes: 20,
        }
    }
}

/// Local search around `start`. Each iteration evaluates `probes` points
/// drawn uniformly on the sphere of the current radius (coordinates scaled
/// to the unit cube, clipped to the space). The best probe replaces the
/// current point if it lowers the objective; otherwise the radius shrinks.
pub fn local_search<O: Objective + ?Sized>(
    start: &SearchResult,
    space: &ParamSpace,
    schedule: &RadiusSchedule,
    seed: u64,
    objective: &O,
) -> SearchResult {
    local_search_traced(start, space, schedule, seed, objective).0
}

/// [`local_search`], also returning every probe in evaluation order.
pub fn local_search_traced<O: Objective + ?Sized>(
    start: &SearchResult,
    space: &ParamSpace,
    schedule: &RadiusSchedule,
    seed: u64,
    objective: &O,
) -> (SearchResult, Vec<SearchResult>) {
    let free = space.free_dims();
    let mut current = start.clone();
    let mut radius = schedule.initial;
    let mut evaluations = start.evaluations;
    let mut trace = Vec::new();
    if free.is_empty() {
        return (current, trace);
    }
    for iteration in 0..schedule.max_iterations {
        if radius < schedule.min_radius {
            break;
        }
        let centre = space.to_unit(&current.params);
        let probes: Vec<SearchResult> = (0..schedule.probes as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = sample_rng(seed, ((iteration as u64) << 32) | k);
                let dir: Vec<f64> = free.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let mut u = centre;
                for (d, &k) in dir.iter().zip(&free) {
                    u[k] = (u[k] + radius * d / norm).clamp(0.0, 1.0);
                }
                scored(objective, space.from_unit(&u), current.weight, current.seed)
            })
            .collect();
        evaluations += probes.len();
        let best = best_of(&probes).expect("at least one probe").clone();
        trace.extend(probes);
        if best.objective < current.objective {
            current = best;
        } else {
            radius *= schedule.shrink;
        }
    }
    current.evaluations = evaluations;
    (current, trace)
}

/// Lower-left Pareto staircase of `(p_error, rh_error)` points, sorted by
/// ascending p_error.
pub fn ablation_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = points.iter().copied().filter(|(p, r)| p.is_finite() && r.is_finite()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pt in sorted {
        if hull.last().is_none_or(|last| pt.1 < last.1) {
            hull.push(pt);
        }
    }
    hull
}

/// Fraction of `other`'s hull points weakly dominated by some point of `hull`.
pub fn hull_dominance(hull: &[(f64, f64)], other: &[(f64, f64)]) -> f64 {
    if other.is_empty() {
        return 1.0;
    }
    let dominated = other
        .iter()
        .filter(|(p, r)| hull.iter().any(|(hp, hr)| hp <= p && hr <= r))
        .count();
    dominated as f64 / other.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRun {
    pub features: FeatureSet,
    pub results: Vec<SearchResult>,
    pub hull: Vec<(f64, f64)>,
}

/// Random search restricted to each feature subset, with its lower hull.
pub fn ablate<O: Objective + ?Sized>(
    space: &ParamSpace,
    subsets: &[FeatureSet],
    n: usize,
    seed: u64,
    weight: f64,
    objective: &O,
) -> Vec<AblationRun> {
    subsets
        .iter()
        .map(|&features| {
            let results = random_search(&space.restricted(features), n, seed, weight, objective);
            let points: Vec<(f64, f64)> = results.iter().map(|r| (r.p_error, r.rh_error)).collect();
            AblationRun {
                features,
                hull: ablation_hull(&points),
                results,
            }
        })
        .collect()
}

pub const RESULTS_HEADER: &str =
    "index\talpha_a\talpha_s\talpha_r\talpha_c\tbeta1\tbeta2\tbeta3\tbeta4\tp_error\trh_error\tobjective";

/// One tab-separated row per result, with a label column prepended when
/// `label` is given.
pub fn write_results<W: Write>(out: &mut W, label: Option<&str>, results: &[SearchResult]) -> std::io::Result<()> {
    for (i, r) in results.iter().enumerate() {
        let p = &r.params;
        if let Some(l) = label {
            write!(out, "{l}\t")?;
        }
        writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.alpha_a, p.alpha_s, p.alpha_r, p.alpha_c, p.beta1, p.beta2, p.beta3, p.beta4, r.p_error, r.rh_error, r.objective
        )?;
    }
    Ok(())
}
