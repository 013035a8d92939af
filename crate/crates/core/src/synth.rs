//! Seeded synthetic corpus with known authorship.
//!
//! Authors get a surname from a Zipf-distributed pool, a research field, a
//! career window, a small circle of collaborators from the same field and an
//! exponential number of led papers. Each paper cites the lead's earlier
//! work, the collaborators' work, and popular papers of its field drawn by
//! preferential attachment, so every similarity term carries signal.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AuthorMention, PaperId, PaperLine, PaperRecord, ProfileEntry, ProfileLine, RawProfile};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("infeasible config: {0}")]
    Infeasible(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PapersPerAuthor {
    /// `ceil` of an exponential draw with this mean.
    Exponential(f64),
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub authors: usize,
    pub surnames: usize,
    pub surname_exponent: f64,
    pub papers_per_author: PapersPerAuthor,
    pub first_year: i32,
    pub last_year: i32,
    /// Career lengths are uniform in `1..=career_span` years.
    pub career_span: u32,
    /// Research fields. Authors collaborate within their field and draw
    /// random references from papers of that field.
    pub topics: usize,
    pub collaborators_per_author: usize,
    pub coauthors_min: usize,
    pub coauthors_max: usize,
    pub refs_per_paper: usize,
    /// Every paper must carry at least this many references.
    pub min_refs: usize,
    pub p_self: f64,
    pub p_community: f64,
    pub p_random: f64,
    pub missing_initial_rate: f64,
    pub second_initial_rate: f64,
    /// Emit profiles as title/year lists with typos instead of paper ids.
    pub noisy_profiles: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            authors: 2000,
            surnames: 500,
            surname_exponent: 1.0,
            papers_per_author: PapersPerAuthor::Exponential(8.0),
            first_year: 1980,
            last_year: 2010,
            career_span: 20,
            topics: 1,
            collaborators_per_author: 3,
            coauthors_min: 0,
            coauthors_max: 2,
            refs_per_paper: 12,
            min_refs: 0,
            p_self: 0.3,
            p_community: 0.3,
            p_random: 0.4,
            missing_initial_rate: 0.02,
            second_initial_rate: 0.5,
            noisy_profiles: false,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        for (name, p) in [
            ("p_self", self.p_self),
            ("p_community", self.p_community),
            ("p_random", self.p_random),
            ("missing_initial_rate", self.missing_initial_rate),
            ("second_initial_rate", self.second_initial_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        let total = self.p_self + self.p_community + self.p_random;
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("p_self + p_community + p_random = {total}, expected 1"));
        }
        if self.authors == 0 || self.surnames == 0 || self.career_span == 0 || self.topics == 0 {
            return bad("authors, surnames, topics and career_span must be positive".into());
        }
        if !(self.surname_exponent > 0.0) {
            return bad(format!("surname_exponent {} must be positive", self.surname_exponent));
        }
        match self.papers_per_author {
            PapersPerAuthor::Exponential(mean) if !(mean > 0.0 && mean.is_finite()) => {
                return bad(format!("papers per author mean {mean} must be positive"));
            }
            PapersPerAuthor::Fixed(0) => return bad("papers per author must be positive".into()),
            _ => {}
        }
        if self.first_year > self.last_year {
            return bad(format!("first_year {} after last_year {}", self.first_year, self.last_year));
        }
        if self.coauthors_min > self.coauthors_max {
            return bad("coauthors_min exceeds coauthors_max".into());
        }
        if self.min_refs > self.refs_per_paper {
            return bad("min_refs exceeds refs_per_paper".into());
        }
        if self.min_refs > 0 {
            // the chronologically first paper has nothing to cite
            return Err(SynthError::Infeasible(format!(
                "min_refs = {} but the earliest paper cannot cite anything",
                self.min_refs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthAuthor {
    pub id: u32,
    pub surname: String,
    pub first_initial: char,
    pub second_initial: Option<char>,
    pub start_year: i32,
    pub career_years: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthLine {
    pub paper_id: PaperId,
    pub author_position: u16,
    pub true_author_id: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub authors: Vec<SynthAuthor>,
    pub papers: Vec<PaperRecord>,
    pub truth: Vec<TruthLine>,
    /// Per author, the papers they appear on, ascending.
    pub author_papers: Vec<Vec<PaperId>>,
    pub profiles: Vec<ProfileLine>,
}

const INITIAL_WEIGHTS: [(char, f64); 26] = [
    ('a', 7.0),
    ('b', 4.0),
    ('c', 6.0),
    ('d', 7.0),
    ('e', 3.0),
    ('f', 2.0),
    ('g', 4.0),
    ('h', 3.0),
    ('i', 1.0),
    ('j', 13.0),
    ('k', 5.0),
    ('l', 4.0),
    ('m', 10.0),
    ('n', 2.0),
    ('o', 1.0),
    ('p', 4.0),
    ('q', 0.2),
    ('r', 7.0),
    ('s', 7.0),
    ('t', 5.0),
    ('u', 0.3),
    ('v', 1.0),
    ('w', 3.0),
    ('x', 0.1),
    ('y', 2.0),
    ('z', 0.5),
];

const SYLLABLES: [&str; 40] = [
    "ka", "lo", "ber", "min", "to", "sa", "ren", "vi", "dal", "mor", "ne", "gu", "shi", "tan", "el", "ro", "wen",
    "fa", "ko", "lin", "zu", "har", "pe", "don", "qi", "mar", "ti", "bu", "sen", "ya", "ol", "chen", "ri", "va",
    "nor", "go", "li", "hel", "stu", "ban",
];

const WORDS: [&str; 64] = [
    "network", "dynamics", "quantum", "spin", "lattice", "model", "transport", "phase", "transition", "scaling",
    "citation", "analysis", "random", "graph", "field", "theory", "measurement", "thermal", "optical", "magnetic",
    "structure", "protein", "cell", "growth", "evolution", "stochastic", "process", "entropy", "diffusion",
    "interaction", "coupling", "disorder", "surface", "energy", "spectrum", "resonance", "collective", "emergent",
    "inference", "estimation", "kinetic", "fluid", "turbulent", "flow", "boundary", "critical", "exponent",
    "topology", "symmetry", "breaking", "order", "correlation", "memory", "neural", "learning", "signal", "noise",
    "response", "stability", "wave", "particle", "cluster", "percolation", "ensemble",
];

const JOURNALS: usize = 50;

fn surname_pool(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let parts = rng.gen_range(2..=3 + out.len() / 20_000);
        let name: String = (0..parts).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        if seen.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}

fn title(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(6..=10);
    let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).expect("non-empty")).collect();
    let mut t = words.join(" ");
    if let Some(first) = t.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    t
}

/// Replace one letter, keeping the title within the crossref threshold.
fn with_typo(rng: &mut ChaCha8Rng, title: &str) -> String {
    let mut chars: Vec<char> = title.chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_ascii_lowercase()).collect();
    if let Some(&i) = letters.choose(rng) {
        let c = chars[i];
        let mut r = (b'a' + rng.gen_range(0..26u8)) as char;
        if r == c {
            r = if c == 'z' { 'a' } else { (c as u8 + 1) as char };
        }
        chars[i] = r;
    }
    chars.into_iter().collect()
}

struct Draft {
    year: i32,
    lead: u32,
    coauthors: Vec<u32>,
}

enum RefKind {
    Own,
    Community,
    Random,
}

/// Generate a corpus. Deterministic for a fixed config.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pool = surname_pool(&mut rng, config.surnames);
    let zipf = Zipf::new(config.surnames as u64, config.surname_exponent)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let initials = WeightedIndex::new(INITIAL_WEIGHTS.iter().map(|w| w.1)).expect("positive weights");
    let span = (config.last_year - config.first_year + 1) as u32;

    let authors: Vec<SynthAuthor> = (0..config.authors as u32)
        .map(|id| {
            let rank = zipf.sample(&mut rng) as usize;
            let career_years = rng.gen_range(1..=config.career_span).min(span);
            let start_year = config.first_year + rng.gen_range(0..=(span - career_years)) as i32;
            let second_initial = rng
                .gen_bool(config.second_initial_rate)
                .then(|| (b'a' + rng.gen_range(0..26u8)) as char);
            SynthAuthor {
                id,
                surname: pool[rank.clamp(1, config.surnames) - 1].clone(),
                first_initial: INITIAL_WEIGHTS[initials.sample(&mut rng)].0,
                second_initial,
                start_year,
                career_years,
            }
        })
        .collect();

    let n = authors.len();
    let topic_of: Vec<usize> = (0..n).map(|_| rng.gen_range(0..config.topics)).collect();
    let mut members_of: Vec<Vec<u32>> = vec![Vec::new(); config.topics];
    for (a, &t) in topic_of.iter().enumerate() {
        members_of[t].push(a as u32);
    }
    let collaborators: Vec<Vec<u32>> = (0..n)
        .map(|a| {
            let field = &members_of[topic_of[a]];
            let want = config.collaborators_per_author.min(field.len() - 1);
            let mut set: Vec<u32> = Vec::with_capacity(want);
            while set.len() < want {
                let c = *field.choose(&mut rng).expect("author's own field");
                if c as usize != a && !set.contains(&c) {
                    set.push(c);
                }
            }
            set
        })
        .collect();

    let exp = match config.papers_per_author {
        PapersPerAuthor::Exponential(mean) => Some(Exp::new(1.0 / mean).expect("positive rate")),
        PapersPerAuthor::Fixed(_) => None,
    };
    let mut drafts = Vec::new();
    for author in &authors {
        let count = match (config.papers_per_author, &exp) {
            (PapersPerAuthor::Fixed(k), _) => k,
            (_, Some(exp)) => exp.sample(&mut rng).ceil().max(1.0) as usize,
            _ => unreachable!(),
        };
        for _ in 0..count {
            let year = author.start_year + rng.gen_range(0..author.career_years) as i32;
            let circle = &collaborators[author.id as usize];
            let k = rng.gen_range(config.coauthors_min..=config.coauthors_max);
            let mut coauthors: Vec<u32> = Vec::with_capacity(k);
            for &c in circle.choose_multiple(&mut rng, circle.len()) {
                if coauthors.len() == k {
                    break;
                }
                // a second author with the lead's surname would blur the focal mention
                if authors[c as usize].surname != author.surname
                    && coauthors.iter().all(|&o| authors[o as usize].surname != authors[c as usize].surname)
                {
                    coauthors.push(c);
                }
            }
            drafts.push(Draft {
                year,
                lead: author.id,
                coauthors,
            });
        }
    }
    // chronological ids; ties keep generation order
    drafts.sort_by_key(|d| d.year);

    let kinds = WeightedIndex::new([config.p_self, config.p_community, config.p_random]).map_err(|e| {
        SynthError::InvalidConfig(format!("reference probabilities: {e}"))
    })?;
    let mut written: Vec<Vec<u32>> = vec![Vec::new(); n]; // per author, indices of earlier papers
    // per field, each paper once plus once per citation received
    let mut urns: Vec<Vec<u32>> = vec![Vec::new(); config.topics];
    let mut papers = Vec::with_capacity(drafts.len());
    let mut truth = Vec::new();
    let journals: Vec<String> = (0..JOURNALS).map(|k| format!("Journal of {} {}", WORDS[k % WORDS.len()], k / WORDS.len() + 1)).collect();
    for (idx, draft) in drafts.iter().enumerate() {
        let paper_id = idx as PaperId + 1;
        let members: Vec<u32> = std::iter::once(draft.lead).chain(draft.coauthors.iter().copied()).collect();
        let field = topic_of[draft.lead as usize];
        let mut refs: Vec<u32> = Vec::with_capacity(config.refs_per_paper);
        for _ in 0..config.refs_per_paper {
            let kind = match kinds.sample(&mut rng) {
                0 => RefKind::Own,
                1 => RefKind::Community,
                _ => RefKind::Random,
            };
            for _attempt in 0..4 {
                let pick = match kind {
                    RefKind::Own => written[draft.lead as usize].choose(&mut rng).copied(),
                    RefKind::Community => {
                        let circle: Vec<u32> = collaborators[draft.lead as usize]
                            .iter()
                            .chain(&draft.coauthors)
                            .copied()
                            .filter(|&c| !written[c as usize].is_empty())
                            .collect();
                        circle
                            .choose(&mut rng)
                            .and_then(|&c| written[c as usize].choose(&mut rng).copied())
                    }
                    RefKind::Random => None,
                }
                .or_else(|| urns[field].choose(&mut rng).copied());
                match pick {
                    Some(r) if !refs.contains(&r) => {
                        refs.push(r);
                        break;
                    }
                    Some(_) => continue,
                    None => break,
                }
            }
        }
        refs.sort_unstable();
        for &r in &refs {
            urns[field].push(r);
        }
        urns[field].push(idx as u32);

        let mut mentions = Vec::with_capacity(members.len());
        for (pos, &a) in members.iter().enumerate() {
            let author = &authors[a as usize];
            let missing = rng.gen_bool(config.missing_initial_rate);
            let first = (!missing).then(|| author.first_initial.to_string());
            let second = if missing { None } else { author.second_initial.map(String::from) };
            mentions.push(
                AuthorMention::new(&author.surname, first.as_deref(), second.as_deref())
                    .expect("generated names are valid"),
            );
            truth.push(TruthLine {
                paper_id,
                author_position: pos as u16,
                true_author_id: a,
            });
        }
        for &a in &members {
            written[a as usize].push(idx as u32);
        }
        papers.push(PaperRecord {
            paper_id,
            year: draft.year,
            authors: mentions,
            refs: refs.iter().map(|&r| r as PaperId + 1).collect(),
            title: Some(title(&mut rng)),
            journal: Some(journals.choose(&mut rng).expect("non-empty").clone()),
        });
    }

    let author_papers: Vec<Vec<PaperId>> = written
        .iter()
        .map(|idxs| idxs.iter().map(|&i| i as PaperId + 1).collect())
        .collect();
    let profiles = authors
        .iter()
        .map(|a| {
            let ids = &author_papers[a.id as usize];
            let profile_id = format!("author-{:06}", a.id);
            if config.noisy_profiles {
                let entries = ids
                    .iter()
                    .map(|&id| {
                        let p = &papers[id as usize - 1];
                        let t = p.title.as_deref().unwrap_or_default();
                        ProfileEntry {
                            year: p.year,
                            title: if rng.gen_bool(0.5) { with_typo(&mut rng, t) } else { t.to_string() },
                            journal: p.journal.clone(),
                            surnames: vec![a.surname.clone()],
                        }
                    })
                    .collect();
                ProfileLine::Raw(RawProfile {
                    profile_id,
                    surname: a.surname.clone(),
                    entries,
                })
            } else {
                ProfileLine::Resolved {
                    profile_id,
                    surname: a.surname.clone(),
                    paper_ids: ids.clone(),
                }
            }
        })
        .collect();

    Ok(SynthCorpus {
        authors,
        papers,
        truth,
        author_papers,
        profiles,
    })
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), SynthError> {
    let io = |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for item in items {
        serde_json::to_writer(&mut out, &item).map_err(|e| io(e.into()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

impl SynthCorpus {
    /// Write `papers.jsonl`, `truth.jsonl` and `profiles.jsonl` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
        let papers = dir.join("papers.jsonl");
        let truth = dir.join("truth.jsonl");
        let profiles = dir.join("profiles.jsonl");
        write_jsonl(&papers, self.papers.iter().map(PaperLine::from))?;
        write_jsonl(&truth, &self.truth)?;
        write_jsonl(&profiles, &self.profiles)?;
        Ok(vec![papers, truth, profiles])
    }
}

/// Expected share of surnames held by two or more authors among surnames
/// held by at least one, for `authors` independent draws from a Zipf law.
pub fn expected_collision_share(authors: usize, surnames: usize, exponent: f64) -> f64 {
    let weights: Vec<f64> = (1..=surnames).map(|k| (k as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    let n = authors as f64;
    let (mut at_least_one, mut at_least_two) = (0.0, 0.0);
    for w in weights {
        let p = w / total;
        let none = (1.0 - p).powf(n);
        let one = n * p * (1.0 - p).powf(n - 1.0);
        at_least_one += 1.0 - none;
        at_least_two += 1.0 - none - one;
    }
    at_least_two / at_least_one
}
