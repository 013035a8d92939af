//! Acceptance checks A1–A8, one PASS/FAIL line each.
//!
//! `cargo test --release --test acceptance -- A4 A5` runs a subset.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citeclust::clustering::{cluster_graph, cluster_similarity, step1_components, step2_merge, Cluster, Clustering};
use citeclust::corpus::{
    build_blocks, resolve_profiles, AuthorMention, Corpus, GoldProfile, KeyMode, NameBlock, PaperId, PaperRecord,
};
use citeclust::hmodel::{bessel_k0, bessel_k1, fit_m, log_bin, pm_ccdf, pm_pdf, HModel};
use citeclust::metrics::{
    aggregate_errors, cluster_precision, h_index, merged_name_test, profile_h_recall, profile_recall,
    sample_name_pairs, second_initial_precision,
};
use citeclust::optimizer::{
    ablate, best_of, hull_dominance, local_search, random_search, EvalSet, FeatureSet, ParamSpace, RadiusSchedule,
};
use citeclust::similarity::{compute_terms, DisambiguationParams, LinkTerms, DEFAULT_YEAR_GAP};
use citeclust::synth::{generate, SynthConfig};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let checks: [(&str, &str, fn() -> Outcome); 8] = [
        ("A1", "similarity and clustering match brute-force oracles", a1_oracle_equivalence),
        ("A2", "metrics match fixtures and recount oracles", a2_metric_correctness),
        ("A3", "end-to-end quality on the default synthetic corpus", a3_end_to_end),
        ("A4", "h-model numerics", a4_model_numerics),
        ("A5", "fit round-trip from sampled h-indices", a5_fit_round_trip),
        ("A6", "thread count does not change outputs", a6_determinism),
        ("A7", "all-feature hull dominates single-feature hulls", a7_ablation),
        ("A8", "scale smoke test at 1e5 papers", a8_scale),
    ];
    let mut failed = 0;
    for (id, title, check) in checks {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {title}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {title}: {detail} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

struct Loaded {
    corpus: Corpus,
    profiles: Vec<GoldProfile>,
}

fn load(config: &SynthConfig) -> Loaded {
    let synth = generate(config).expect("generator");
    let (corpus, _) = Corpus::from_records(synth.papers.clone()).expect("corpus");
    let (profiles, _) = resolve_profiles(&corpus, &synth.profiles);
    Loaded {
        corpus,
        profiles,
    }
}

// ---------------------------------------------------------------- A1

struct Oracle<'a> {
    corpus: &'a Corpus,
    citers: HashMap<PaperId, BTreeSet<PaperId>>,
}

impl<'a> Oracle<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        let mut citers: HashMap<PaperId, BTreeSet<PaperId>> = HashMap::new();
        for p in corpus.papers() {
            for &r in &p.refs {
                citers.entry(r).or_default().insert(p.paper_id);
            }
        }
        Oracle { corpus, citers }
    }

    fn coauthors(&self, block: &NameBlock, paper: PaperId) -> BTreeSet<(String, Option<char>)> {
        let focal: Vec<u16> = block.members.iter().filter(|m| m.paper == paper).map(|m| m.position).collect();
        self.corpus
            .get(paper)
            .unwrap()
            .authors
            .iter()
            .enumerate()
            .filter(|(pos, _)| !focal.contains(&(*pos as u16)))
            .map(|(_, a)| (a.surname.clone(), a.first_initial))
            .collect()
    }

    fn overlap<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
        let m = a.len().min(b.len());
        if m == 0 {
            0.0
        } else {
            a.intersection(b).count() as f64 / m as f64
        }
    }

    /// Every pair of the block, checked one by one.
    fn terms(&self, block: &NameBlock, year_gap: u32) -> Vec<LinkTerms> {
        let ids: Vec<PaperId> = block.members.iter().map(|m| m.paper).collect::<BTreeSet<_>>().into_iter().collect();
        let empty = BTreeSet::new();
        let mut out = Vec::new();
        for (x, &i) in ids.iter().enumerate() {
            for &j in &ids[x + 1..] {
                let (pi, pj) = (self.corpus.get(i).unwrap(), self.corpus.get(j).unwrap());
                if (pi.year - pj.year).unsigned_abs() > year_gap {
                    continue;
                }
                let refs_i: BTreeSet<PaperId> = pi.refs.iter().copied().collect();
                let refs_j: BTreeSet<PaperId> = pj.refs.iter().copied().collect();
                let t = LinkTerms {
                    i,
                    j,
                    coauthor_overlap: Self::overlap(&self.coauthors(block, i), &self.coauthors(block, j)),
                    self_cite_count: u8::from(refs_i.contains(&j)) + u8::from(refs_j.contains(&i)),
                    shared_refs: refs_i.intersection(&refs_j).count() as u32,
                    cocitation_overlap: Self::overlap(
                        self.citers.get(&i).unwrap_or(&empty),
                        self.citers.get(&j).unwrap_or(&empty),
                    ),
                };
                if t.coauthor_overlap != 0.0 || t.self_cite_count != 0 || t.shared_refs != 0 || t.cocitation_overlap != 0.0
                {
                    out.push(t);
                }
            }
        }
        out
    }
}

fn oracle_score(t: &LinkTerms, p: &DisambiguationParams) -> f64 {
    p.alpha_a * t.coauthor_overlap
        + p.alpha_s * t.self_cite_count as f64
        + p.alpha_r * t.shared_refs as f64
        + p.alpha_c * t.cocitation_overlap
}

fn components(nodes: &[PaperId], edges: &[(PaperId, PaperId)]) -> Vec<Vec<PaperId>> {
    let mut adj: BTreeMap<PaperId, Vec<PaperId>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
    for &(a, b) in edges {
        adj.get_mut(&a).unwrap().push(b);
        adj.get_mut(&b).unwrap().push(a);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &start in nodes {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &adj[&x] {
                if seen.insert(y) {
                    comp.push(y);
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn pair_score(links: &[LinkTerms], p: &DisambiguationParams, a: PaperId, b: PaperId) -> Option<f64> {
    let (i, j) = (a.min(b), a.max(b));
    links.iter().find(|t| t.i == i && t.j == j).map(|t| oracle_score(t, p))
}

/// Mean above-β2 score over all cross pairs, summed in ascending pair order.
fn oracle_cluster_similarity(g: &[PaperId], k: &[PaperId], links: &[LinkTerms], p: &DisambiguationParams) -> f64 {
    let mut pairs: Vec<(PaperId, PaperId)> = Vec::new();
    for &a in g {
        for &b in k {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs.sort_unstable();
    let mut sum = 0.0;
    for (a, b) in pairs {
        if let Some(s) = pair_score(links, p, a, b) {
            if s > p.beta2 {
                sum += s;
            }
        }
    }
    sum / (g.len() as f64 * k.len() as f64)
}

fn oracle_step1(papers: &[PaperId], links: &[LinkTerms], p: &DisambiguationParams) -> Vec<Vec<PaperId>> {
    let edges: Vec<(PaperId, PaperId)> =
        links.iter().filter(|t| oracle_score(t, p) > p.beta1).map(|t| (t.i, t.j)).collect();
    components(papers, &edges)
}

fn oracle_step2(first: &[Vec<PaperId>], links: &[LinkTerms], p: &DisambiguationParams) -> Vec<Vec<PaperId>> {
    // clusters as nodes, merged when their similarity exceeds β3
    let n = first.len() as PaperId;
    let mut edges = Vec::new();
    for a in 0..first.len() {
        for b in a + 1..first.len() {
            if oracle_cluster_similarity(&first[a], &first[b], links, p) > p.beta3 {
                edges.push((a as PaperId, b as PaperId));
            }
        }
    }
    let nodes: Vec<PaperId> = (0..n).collect();
    let mut merged: Vec<Vec<PaperId>> = components(&nodes, &edges)
        .into_iter()
        .map(|group| {
            let mut papers: Vec<PaperId> = group.iter().flat_map(|&c| first[c as usize].clone()).collect();
            papers.sort_unstable();
            papers
        })
        .collect();
    merged.sort_by_key(|c| c[0]);

    // lone papers join the multi-paper cluster holding their best link above β4
    let mut moves: Vec<(usize, usize)> = Vec::new();
    for (s, single) in merged.iter().enumerate() {
        if single.len() != 1 {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for (t, target) in merged.iter().enumerate() {
            if target.len() < 2 {
                continue;
            }
            for &q in target {
                if let Some(score) = pair_score(links, p, single[0], q) {
                    if score > p.beta4 && best.is_none_or(|(b, bt)| score > b || (score == b && t < bt)) {
                        best = Some((score, t));
                    }
                }
            }
        }
        if let Some((_, t)) = best {
            moves.push((s, t));
        }
    }
    for &(s, t) in &moves {
        let paper = merged[s][0];
        merged[t].push(paper);
    }
    let moved: HashSet<usize> = moves.iter().map(|&(s, _)| s).collect();
    merged
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !moved.contains(i))
        .map(|(_, c)| c)
        .collect()
}

fn a1_oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let data = load(&SynthConfig::default());
    let corpus = &data.corpus;
    let oracle = Oracle::new(corpus);
    let blocks: Vec<NameBlock> = build_blocks(corpus, KeyMode::SurnameOnly)
        .into_iter()
        .filter(|b| (2..=100).contains(&b.papers().len()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = ParamSpace::default();
    let mut chosen = HashSet::new();
    while chosen.len() < 50.min(blocks.len()) {
        chosen.insert(rng.gen_range(0..blocks.len()));
    }
    let mut chosen: Vec<usize> = chosen.into_iter().collect();
    chosen.sort_unstable();

    let (mut links_checked, mut merges_seen, mut attachments_seen) = (0, 0, 0);
    for &bi in &chosen {
        let block = &blocks[bi];
        let graph = compute_terms(corpus, block, DEFAULT_YEAR_GAP);
        let expected = oracle.terms(block, DEFAULT_YEAR_GAP);
        ensure!(graph.links() == expected.as_slice(), "terms differ for block {}", block.key);
        links_checked += expected.len();

        for params in [DisambiguationParams::default(), space.sample(&mut rng), space.sample(&mut rng)] {
            let papers = graph.papers();
            let first = oracle_step1(papers, &expected, &params);
            let step1 = step1_components(&graph, &params);
            ensure!(
                step1 == Clustering::from_sets(block.key.clone(), first.clone()),
                "step 1 differs for block {} at {params:?}",
                block.key
            );
            for (a, ka) in step1.clusters.iter().enumerate() {
                for kb in &step1.clusters[a + 1..] {
                    let got = cluster_similarity(ka, kb, &graph, &params);
                    let want = oracle_cluster_similarity(&ka.paper_ids, &kb.paper_ids, &expected, &params);
                    ensure!(
                        got.to_bits() == want.to_bits(),
                        "cluster similarity {got} vs {want} in block {}",
                        block.key
                    );
                }
            }
            let second = oracle_step2(&first, &expected, &params);
            let want = Clustering::from_sets(block.key.clone(), second.clone());
            ensure!(step2_merge(&step1, &graph, &params) == want, "step 2 differs for block {}", block.key);
            ensure!(cluster_graph(&graph, &params) == want, "full clustering differs for block {}", block.key);
            merges_seen += first.len() - second.len();
            attachments_seen += second.iter().filter(|c| c.len() > 1).count();
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 30.0, "took {secs:.1} s, budget 30 s");
    ensure!(merges_seen > 0, "no step-2 merge exercised");
    Ok(format!(
        "{} blocks, {links_checked} links, {merges_seen} step-2 reductions, {attachments_seen} multi-paper clusters",
        chosen.len()
    ))
}

// ---------------------------------------------------------------- A2

fn mention(surname: &str, first: Option<&str>, second: Option<&str>) -> AuthorMention {
    AuthorMention::new(surname, first, second).unwrap()
}

fn record(id: PaperId, authors: Vec<AuthorMention>, refs: Vec<PaperId>) -> PaperRecord {
    PaperRecord {
        paper_id: id,
        year: 2000,
        authors,
        refs,
        title: None,
        journal: None,
    }
}

/// Papers 1..=counts.len() by `surname`, with paper k cited counts[k-1] times
/// by dedicated citing papers.
fn cited_corpus(surname: &str, counts: &[usize]) -> Corpus {
    let mut records: Vec<PaperRecord> = (0..counts.len())
        .map(|k| record(k as PaperId + 1, vec![mention(surname, Some("j"), None)], Vec::new()))
        .collect();
    let most = counts.iter().copied().max().unwrap_or(0);
    for c in 0..most {
        let refs = (0..counts.len()).filter(|&k| counts[k] > c).map(|k| k as PaperId + 1).collect();
        records.push(record(1000 + c as PaperId, vec![mention("citer", Some("z"), None)], refs));
    }
    Corpus::from_records(records).unwrap().0
}

fn clustering(key: &str, sets: Vec<Vec<PaperId>>) -> Clustering {
    Clustering::from_sets(key, sets)
}

fn profile(id: &str, surname: &str, papers: &[PaperId]) -> GoldProfile {
    GoldProfile {
        profile_id: id.into(),
        surname: surname.into(),
        paper_ids: papers.iter().copied().collect(),
    }
}

fn hand_fixtures() -> Result<usize, String> {
    let mut n = 0;
    let mut check = |ok: bool, what: &str| -> Result<(), String> {
        n += 1;
        if ok {
            Ok(())
        } else {
            Err(format!("fixture failed: {what}"))
        }
    };
    check(h_index(&[10, 5, 3, 2, 1]) == 3, "h [10,5,3,2,1]")?;
    check(h_index(&[]) == 0, "h []")?;
    check(h_index(&[1, 1, 1, 1]) == 1, "h [1,1,1,1]")?;

    let initials = |letters: &[&str]| {
        let records = letters
            .iter()
            .enumerate()
            .map(|(k, l)| record(k as PaperId + 1, vec![mention("smith", Some(l), None)], Vec::new()))
            .collect();
        let corpus = Corpus::from_records(records).unwrap().0;
        let block = build_blocks(&corpus, KeyMode::SurnameOnly).remove(0);
        let cluster = Cluster {
            cluster_id: 0,
            paper_ids: (1..=letters.len() as PaperId).collect(),
        };
        cluster_precision(&cluster, &corpus, &block)
    };
    check(initials(&["j", "j", "j", "a"]) == Some(0.75), "precision JJJA")?;
    check(initials(&["j", "j", "a", "a"]) == Some(0.5), "precision JJAA")?;
    check(initials(&["j"]) == Some(1.0), "precision singleton")?;

    let flat = cited_corpus("smith", &[0; 10]);
    let all: Vec<PaperId> = (1..=10).collect();
    let p10 = profile("p", "smith", &all);
    let nine = clustering("smith", vec![all[..9].to_vec(), vec![10]]);
    check(profile_recall(&nine, &p10, &flat) == Some(0.9), "recall 9 of 10")?;
    let split = clustering("smith", vec![all[..5].to_vec(), all[5..].to_vec()]);
    check(profile_recall(&split, &p10, &flat) == Some(0.5), "recall 5/5")?;

    // profile citations [9,7,3,1,5,4] has h = 4; best cluster holds [9,7,3,1]
    let cited = cited_corpus("smith", &[9, 7, 3, 1, 5, 4]);
    let p6 = profile("p", "smith", &[1, 2, 3, 4, 5, 6]);
    let c = clustering("smith", vec![vec![1, 2, 3, 4], vec![5, 6]]);
    check(profile_h_recall(&c, &p6, &cited) == Some(0.75), "h-recall [9,7,3,1]")?;
    let whole = clustering("smith", vec![vec![1, 2, 3, 4, 5, 6]]);
    check(profile_h_recall(&whole, &p6, &cited) == Some(1.0), "h-recall superset")?;

    // one impure cluster of four; two profiles with R^h 1 and 0.5
    let records = vec![
        record(1, vec![mention("smith", Some("j"), None)], vec![]),
        record(2, vec![mention("smith", Some("j"), None)], vec![]),
        record(3, vec![mention("smith", Some("j"), None)], vec![]),
        record(4, vec![mention("smith", Some("a"), None)], vec![]),
        record(5, vec![mention("jones", Some("b"), None)], vec![]),
        record(6, vec![mention("jones", Some("b"), None)], vec![]),
        record(7, vec![mention("jones", Some("c"), None)], vec![]),
        record(8, vec![mention("jones", Some("c"), None)], vec![]),
        record(20, vec![mention("x", None, None)], vec![1, 2, 5, 6, 7, 8]),
        record(21, vec![mention("y", None, None)], vec![1, 2, 5, 6, 7, 8]),
    ];
    let corpus = Corpus::from_records(records).unwrap().0;
    let blocks = build_blocks(&corpus, KeyMode::SurnameOnly);
    let clusterings = vec![
        clustering("jones", vec![vec![5, 6], vec![7], vec![8]]),
        clustering("smith", vec![vec![1, 2, 3, 4]]),
        clustering("x", vec![vec![20]]),
        clustering("y", vec![vec![21]]),
    ];
    let profiles = vec![profile("s", "smith", &[1, 2]), profile("jb", "jones", &[7, 8])];
    let r = aggregate_errors(&clusterings, &blocks, &profiles, &corpus).map_err(|e| e.to_string())?;
    // smith P=0.75 |K|=4 gives 0.5, three pure jones clusters, citers carry no initials
    check(r.p_error == 0.5 / 4.0, "p_error weighting")?;
    check(r.rh_error == 0.25, "rh_error mean of {1, 0.5}")?;

    // second initials {M,M,R} → 2/3; {M,M,-,-} does not qualify
    let records = vec![
        record(1, vec![mention("lee", Some("a"), Some("m"))], vec![]),
        record(2, vec![mention("lee", Some("a"), Some("m"))], vec![]),
        record(3, vec![mention("lee", Some("a"), Some("r"))], vec![]),
        record(4, vec![mention("kim", Some("b"), Some("m"))], vec![]),
        record(5, vec![mention("kim", Some("b"), Some("m"))], vec![]),
        record(6, vec![mention("kim", Some("b"), None)], vec![]),
        record(7, vec![mention("kim", Some("b"), None)], vec![]),
    ];
    let corpus = Corpus::from_records(records).unwrap().0;
    let blocks = build_blocks(&corpus, KeyMode::SurnameFirstInitial);
    let clusterings = vec![clustering("kim_b", vec![vec![4, 5, 6, 7]]), clustering("lee_a", vec![vec![1, 2, 3]])];
    let report = second_initial_precision(&clusterings, &blocks, &corpus);
    check(report.qualifying_clusters == 1 && report.precision == Some(2.0 / 3.0), "second initials")?;
    Ok(n)
}

fn brute_h(counts: &[usize]) -> usize {
    (0..=counts.len()).filter(|&h| counts.iter().filter(|&&c| c >= h).count() >= h).max().unwrap_or(0)
}

fn a2_metric_correctness() -> Outcome {
    let started = Instant::now();
    let fixtures = hand_fixtures()?;

    let config = SynthConfig {
        authors: 300,
        surnames: 80,
        seed: 3,
        ..Default::default()
    };
    let data = load(&config);
    let corpus = &data.corpus;
    let blocks = build_blocks(corpus, KeyMode::SurnameOnly);
    let mut cited: HashMap<PaperId, usize> = HashMap::new();
    for p in corpus.papers() {
        for &r in &p.refs {
            *cited.entry(r).or_default() += 1;
        }
    }
    let h_of = |papers: &[PaperId]| brute_h(&papers.iter().map(|p| cited.get(p).copied().unwrap_or(0)).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let clusterings: Vec<Clustering> = blocks
            .iter()
            .map(|b| {
                let papers = b.papers();
                let k = rng.gen_range(1..=papers.len());
                let mut sets = vec![Vec::new(); k];
                for p in papers {
                    sets[rng.gen_range(0..k)].push(p);
                }
                Clustering::from_sets(b.key.clone(), sets)
            })
            .collect();
        let result = aggregate_errors(&clusterings, &blocks, &data.profiles, corpus).map_err(|e| e.to_string())?;

        let mut p_terms = Vec::new();
        for (c, b) in clusterings.iter().zip(&blocks) {
            for k in &c.clusters {
                let mut counts: BTreeMap<char, usize> = BTreeMap::new();
                for m in b.members.iter().filter(|m| k.paper_ids.contains(&m.paper)) {
                    if let Some(i) = corpus.get(m.paper).unwrap().authors[m.position as usize].first_initial {
                        *counts.entry(i).or_default() += 1;
                    }
                }
                let total: usize = counts.values().sum();
                if total > 0 {
                    let precision = *counts.values().max().unwrap() as f64 / total as f64;
                    p_terms.push((1.0 - precision) * (k.paper_ids.len() as f64).sqrt());
                }
            }
        }
        let mut rh_terms = Vec::new();
        for prof in &data.profiles {
            let gold: Vec<PaperId> = prof.paper_ids.iter().copied().collect();
            let gold_h = h_of(&gold);
            if gold.is_empty() || gold_h == 0 {
                continue;
            }
            let mut best = (0usize, 0usize);
            for c in clusterings.iter().filter(|c| c.key == prof.surname) {
                for k in &c.clusters {
                    let both: Vec<PaperId> = k.paper_ids.iter().copied().filter(|p| prof.paper_ids.contains(p)).collect();
                    best = best.max((both.len(), h_of(&both)));
                }
            }
            let h_recall = best.1 as f64 / gold_h as f64;
            let reported = result.profiles.iter().find(|s| s.profile_id == prof.profile_id);
            ensure!(
                reported.map(|s| s.h_recall) == Some(h_recall),
                "trial {trial}: h-recall of {} is {:?}, recount {h_recall}",
                prof.profile_id,
                reported.map(|s| s.h_recall)
            );
            rh_terms.push(1.0 - h_recall);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        ensure!(result.clusters.len() == p_terms.len(), "trial {trial}: valid cluster counts differ");
        ensure!(
            (result.p_error - mean(&p_terms)).abs() <= 1e-12,
            "trial {trial}: p_error {} vs recount {}",
            result.p_error,
            mean(&p_terms)
        );
        ensure!(
            (result.rh_error - mean(&rh_terms)).abs() <= 1e-12,
            "trial {trial}: rh_error {} vs recount {}",
            result.rh_error,
            mean(&rh_terms)
        );
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.1} s, budget 5 s");
    Ok(format!("{fixtures} hand fixtures, 20 random clusterings recounted"))
}

// ---------------------------------------------------------------- A3

fn a3_end_to_end() -> Outcome {
    let started = Instant::now();
    let (best, mixing) = single_threaded(|| {
        let data = load(&SynthConfig::default());
        let blocks = build_blocks(&data.corpus, KeyMode::SurnameOnly);
        let pairs = sample_name_pairs(&blocks, 100, 7);
        let set = EvalSet::build(&data.corpus, blocks, data.profiles.clone(), DEFAULT_YEAR_GAP);
        let space = ParamSpace::default();
        let sampled = random_search(&space, 200, 7, 0.5, &set);
        let start = best_of(&sampled).unwrap().clone();
        let best = local_search(&start, &space, &RadiusSchedule::default(), 7, &set);
        let mixing = merged_name_test(&data.corpus, &pairs, &best.params, DEFAULT_YEAR_GAP);
        (best, mixing)
    });
    let secs = started.elapsed().as_secs_f64();
    let detail = format!(
        "p_error {:.4}, rh_error {:.4}, mixed {}/{} = {:.2}% over {} pairs, {} evaluations",
        best.p_error,
        best.rh_error,
        mixing.mixed_clusters,
        mixing.clusters,
        100.0 * mixing.mixed_fraction(),
        mixing.pairs,
        best.evaluations
    );
    ensure!(best.p_error < 0.20 && best.rh_error < 0.20, "{detail}");
    ensure!(mixing.pairs == 100 && mixing.mixed_fraction() < 0.01, "{detail}");
    ensure!(secs < 600.0, "{detail}; took {secs:.0} s, budget 600 s");
    Ok(detail)
}

// ---------------------------------------------------------------- A4

/// Double-exponential quadrature on [a, b]; tolerates endpoint log singularities.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = (b - a) / 2.0;
    let step = 1.0 / 64.0;
    let mut sum = 0.0;
    for k in -448i32..=448 {
        let t = k as f64 * step;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        // distance from the nearer endpoint, computed without cancellation
        let gap = half / (u.abs().exp() * u.cosh());
        let point = if u < 0.0 { a + gap } else { b - gap };
        if gap <= 0.0 || point <= a || point >= b {
            continue;
        }
        sum += w * f(point);
    }
    sum * half * step
}

/// ∫ from h_lo to h_hi of g(h)·pdf(h) dh with h = m·x², the K0 argument becoming 2x.
fn pdf_integral(model: &HModel, g: impl Fn(f64) -> f64, h_lo: f64, h_hi: f64) -> f64 {
    let m = model.m();
    let (x_lo, x_hi) = ((h_lo / m).sqrt(), (h_hi / m).sqrt());
    tanh_sinh(
        |x| {
            let h = m * x * x;
            // the integrand vanishes like x·ln x at the origin
            if h > 0.0 {
                g(h) * pm_pdf(h, model).unwrap() * 2.0 * m * x
            } else {
                0.0
            }
        },
        x_lo,
        x_hi,
    )
}

/// Series for K0 and K1 written out term by term.
fn bessel_series(x: f64) -> (f64, f64) {
    let euler = 0.577_215_664_901_532_9;
    let q = x * x / 4.0;
    let lead = (x / 2.0).ln() + euler;
    let (mut k0, mut i1, mut tail1) = (0.0, 0.0, 0.0);
    let (mut term, mut harmonic) = (1.0, 0.0);
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
        }
        k0 += term * (harmonic - lead);
        // term = q^k/(k!)^2, so q^k/(k!(k+1)!) = term/(k+1)
        let t1 = term / (kf + 1.0);
        i1 += t1;
        tail1 += t1 * (2.0 * harmonic + 1.0 / (kf + 1.0) - 2.0 * euler);
    }
    let i1 = i1 * x / 2.0;
    let k1 = 1.0 / x + (x / 2.0).ln() * i1 - x / 4.0 * tail1;
    (k0, k1)
}

fn a4_model_numerics() -> Outcome {
    let started = Instant::now();
    let (s0, s1) = bessel_series(1.0);
    let (k0, k1) = (bessel_k0(1.0).unwrap(), bessel_k1(1.0).unwrap());
    ensure!(((k0 - s0) / s0).abs() <= 1e-10, "K0(1) {k0} vs series {s0}");
    ensure!(((k1 - s1) / s1).abs() <= 1e-10, "K1(1) {k1} vs series {s1}");

    let mut worst = [0f64; 4];
    for m in [1.0, 3.49] {
        let model = HModel::new(m).unwrap();
        let far = 4000.0 * m;
        let norm = pdf_integral(&model, |_| 1.0, 0.0, m) + pdf_integral(&model, |_| 1.0, m, far);
        let mean = pdf_integral(&model, |h| h, 0.0, m) + pdf_integral(&model, |h| h, m, far);
        let second = pdf_integral(&model, |h| (h - m).powi(2), 0.0, m) + pdf_integral(&model, |h| (h - m).powi(2), m, far);
        worst[0] = worst[0].max((norm - 1.0).abs());
        worst[1] = worst[1].max((mean - m).abs());
        worst[2] = worst[2].max((second / (3.0 * m * m) - 1.0).abs());
        ensure!((norm - 1.0).abs() <= 1e-8, "m={m}: ∫pdf = {norm}");
        ensure!((mean - m).abs() <= 1e-6, "m={m}: mean {mean}");
        ensure!((second / (3.0 * m * m) - 1.0).abs() <= 1e-5, "m={m}: variance {second}");
        for h in [0.5, 3.49, 20.0] {
            let body = pdf_integral(&model, |_| 1.0, 0.0, h);
            let ccdf = pm_ccdf(h, &model).unwrap();
            worst[3] = worst[3].max((ccdf + body - 1.0).abs());
            ensure!((ccdf + body - 1.0).abs() <= 1e-8, "m={m}, h={h}: ccdf {ccdf} + ∫pdf {body}");
        }
    }
    let unit = HModel::new(1.0).unwrap();
    for m in [0.3, 2.09, 3.49, 12.0] {
        let model = HModel::new(m).unwrap();
        for k in 1..200 {
            let x = 0.01 * k as f64 * 1.07f64.powi(k / 4);
            let scaled = m * pm_pdf(x * m, &model).unwrap();
            let reference = pm_pdf(x, &unit).unwrap();
            ensure!(((scaled - reference) / reference).abs() <= 1e-10, "collapse at m={m}, x={x}");
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.1} s, budget 10 s");
    Ok(format!(
        "max deviations: norm {:.1e}, mean {:.1e}, variance {:.1e}, ccdf {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

// ---------------------------------------------------------------- A5

fn a5_fit_round_trip() -> Outcome {
    let started = Instant::now();
    let mut report = Vec::new();
    for (m, seed) in [(3.49, 1u64), (2.09, 2)] {
        let model = HModel::new(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<u64> = (0..1_000_000).map(|_| model.sample_integer(&mut rng)).collect();
        let binned = log_bin(&draws, 10, 5).map_err(|e| e.to_string())?;
        let (fit, _) = fit_m(&binned, 2).map_err(|e| e.to_string())?;
        let rel = (fit.m() - m).abs() / m;
        report.push(format!("m={m} fitted {:.4} ({:.2}%)", fit.m(), 100.0 * rel));
        ensure!(rel < 0.03, "{}", report.join(", "));
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s, budget 60 s");
    Ok(report.join(", "))
}

// ---------------------------------------------------------------- A6, A8

fn citeclust(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_citeclust"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("citeclust {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn a6_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    citeclust(&["synth", "--seed", "7", "--out", path_str(&data)])?;
    let corpus = data.join("papers.jsonl");
    let profiles = data.join("profiles.jsonl");
    let mut reference: Option<Vec<Vec<u8>>> = None;
    let thread_counts = ["1", "0", "4"];
    for threads in thread_counts {
        let out = tmp.path().join(format!("t{threads}"));
        let out = path_str(&out);
        citeclust(&["--threads", threads, "disambiguate", "--corpus", path_str(&corpus), "--out", out])?;
        citeclust(&[
            "--threads",
            threads,
            "optimize",
            "--corpus",
            path_str(&corpus),
            "--profiles",
            path_str(&profiles),
            "--samples",
            "40",
            "--max-iterations",
            "4",
            "--seed",
            "7",
            "--out",
            out,
        ])?;
        let files: Vec<Vec<u8>> = ["clusters.jsonl", "results.tsv", "best_params.json"]
            .iter()
            .map(|f| std::fs::read(Path::new(out).join(f)).unwrap())
            .collect();
        match &reference {
            None => reference = Some(files),
            Some(r) => {
                for (name, (a, b)) in ["clusters.jsonl", "results.tsv", "best_params.json"].iter().zip(r.iter().zip(&files)) {
                    ensure!(a == b, "{name} differs between --threads 1 and --threads {threads}");
                }
            }
        }
    }
    let sizes: Vec<usize> = reference.unwrap().iter().map(Vec::len).collect();
    Ok(format!(
        "threads {:?}: clusters.jsonl, results.tsv, best_params.json identical ({sizes:?} bytes)",
        thread_counts
    ))
}

fn a8_scale() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    citeclust(&["synth", "--seed", "8", "--authors", "12000", "--surnames", "3000", "--out", path_str(&data)])?;
    let corpus = data.join("papers.jsonl");
    let papers = std::fs::read_to_string(&corpus).map_err(|e| e.to_string())?.lines().count();
    ensure!(papers >= 100_000, "generated only {papers} papers");
    let out = tmp.path().join("run");
    let started = Instant::now();
    citeclust(&["disambiguate", "--corpus", path_str(&corpus), "--out", path_str(&out)])?;
    let secs = started.elapsed().as_secs_f64();
    let manifest = std::fs::read_to_string(out.join("manifest.jsonl")).map_err(|e| e.to_string())?;
    let entry: serde_json::Value = serde_json::from_str(manifest.lines().last().unwrap()).map_err(|e| e.to_string())?;
    let peak_kib = entry["peak_memory_kib"].as_u64().ok_or("no peak memory reported")?;
    let peak_gib = peak_kib as f64 / (1024.0 * 1024.0);
    let detail = format!("{papers} papers in {secs:.1} s, peak RSS {peak_gib:.2} GiB");
    ensure!(secs < 60.0, "{detail}; budget 60 s");
    ensure!(peak_gib < 4.0, "{detail}; budget 4 GiB");
    Ok(detail)
}

// ---------------------------------------------------------------- A7

fn a7_ablation() -> Outcome {
    let data = load(&SynthConfig::default());
    let blocks = build_blocks(&data.corpus, KeyMode::SurnameOnly);
    let set = EvalSet::build(&data.corpus, blocks, data.profiles.clone(), DEFAULT_YEAR_GAP);
    let mut subsets = vec![FeatureSet::ALL];
    subsets.extend(FeatureSet::singles());
    let runs = ablate(&ParamSpace::default(), &subsets, ABLATION_SAMPLES, 7, 0.5, &set);
    let all = &runs[0].hull;
    let shares: Vec<(String, f64, usize)> = runs[1..]
        .iter()
        .map(|r| (r.features.to_string(), hull_dominance(all, &r.hull), r.hull.len()))
        .collect();
    let detail = shares
        .iter()
        .map(|(f, share, n)| format!("{f} {:.0}% of {n}", 100.0 * share))
        .collect::<Vec<_>>()
        .join(", ");
    ensure!(shares.iter().all(|(_, share, _)| *share >= 0.8), "{detail}");
    Ok(detail)
}

const ABLATION_SAMPLES: usize = 2000;
