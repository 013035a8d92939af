//! Gold-standard researcher profiles and their resolution to corpus papers.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::names::normalize_text;
use super::{Corpus, CorpusError, PaperId};

/// Minimum normalized title similarity for a profile entry to match a paper.
pub const TITLE_SIMILARITY_THRESHOLD: f64 = 0.9;

/// A known researcher's paper set, resolved to the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldProfile {
    pub profile_id: String,
    pub surname: String,
    pub paper_ids: BTreeSet<PaperId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub year: i32,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    #[serde(default)]
    pub surnames: Vec<String>,
}

/// An external publication list that still has to be cross-referenced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProfile {
    pub profile_id: String,
    pub surname: String,
    pub entries: Vec<ProfileEntry>,
}

/// One line of a gold profiles file: either already resolved to paper ids
/// or a list of bibliographic entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileLine {
    Resolved {
        profile_id: String,
        surname: String,
        paper_ids: Vec<PaperId>,
    },
    Raw(RawProfile),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossrefReport {
    pub profiles: usize,
    pub entries: usize,
    pub matched: usize,
    pub ambiguous: usize,
    pub unmatched: usize,
    /// Pre-resolved paper ids that are not in the corpus.
    pub unknown_ids: usize,
}

impl CrossrefReport {
    fn absorb(&mut self, other: &CrossrefReport) {
        self.profiles += other.profiles;
        self.entries += other.entries;
        self.matched += other.matched;
        self.ambiguous += other.ambiguous;
        self.unmatched += other.unmatched;
        self.unknown_ids += other.unknown_ids;
    }
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<ProfileLine>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::parse(n + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::parse(n + 1, e.to_string()))?);
    }
    Ok(out)
}

/// 1 minus the normalized Levenshtein distance of the folded titles.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(&normalize_text(a), &normalize_text(b))
}

struct TitleIndex<'c> {
    corpus: &'c Corpus,
    by_year: HashMap<i32, Vec<(u32, String)>>,
}

impl<'c> TitleIndex<'c> {
    fn new(corpus: &'c Corpus) -> Self {
        let mut by_year: HashMap<i32, Vec<(u32, String)>> = HashMap::new();
        for (idx, p) in corpus.papers().iter().enumerate() {
            if let Some(title) = &p.title {
                by_year
                    .entry(p.year)
                    .or_default()
                    .push((idx as u32, normalize_text(title)));
            }
        }
        TitleIndex { corpus, by_year }
    }

    /// Every corpus paper satisfying year, title and surname criteria.
    fn candidates(&self, surname: &str, entry: &ProfileEntry) -> Vec<PaperId> {
        let title = normalize_text(&entry.title);
        if title.is_empty() {
            return Vec::new();
        }
        let len = title.chars().count();
        let Some(papers) = self.by_year.get(&entry.year) else {
            return Vec::new();
        };
        papers
            .iter()
            .filter(|(idx, other)| {
                let paper = self.corpus.paper(*idx);
                if !paper.authors.iter().any(|a| a.surname == surname) {
                    return false;
                }
                // edit distance is at least the length difference
                let other_len = other.chars().count();
                let longest = len.max(other_len) as f64;
                if 1.0 - (len.abs_diff(other_len) as f64) / longest < TITLE_SIMILARITY_THRESHOLD {
                    return false;
                }
                strsim::normalized_levenshtein(&title, other) >= TITLE_SIMILARITY_THRESHOLD
            })
            .map(|(idx, _)| self.corpus.paper(*idx).paper_id)
            .collect()
    }
}

fn resolve_raw(index: &TitleIndex<'_>, raw: &RawProfile) -> (GoldProfile, CrossrefReport) {
    let surname = normalize_text(&raw.surname);
    let mut report = CrossrefReport {
        profiles: 1,
        entries: raw.entries.len(),
        ..Default::default()
    };
    let mut paper_ids = BTreeSet::new();
    for entry in &raw.entries {
        let found = index.candidates(&surname, entry);
        match found.len() {
            0 => report.unmatched += 1,
            1 => {
                report.matched += 1;
                paper_ids.insert(found[0]);
            }
            _ => report.ambiguous += 1,
        }
    }
    (
        GoldProfile {
            profile_id: raw.profile_id.clone(),
            surname,
            paper_ids,
        },
        report,
    )
}

/// Cross-reference external publication lists against the corpus.
///
/// An entry matches a paper when the year is equal, the title similarity is
/// at least [`TITLE_SIMILARITY_THRESHOLD`], the profile surname is among the
/// paper's author surnames, and no other paper also satisfies all three.
/// Profiles come back sorted by `profile_id`.
pub fn crossref_profiles(corpus: &Corpus, raw: &[RawProfile]) -> (Vec<GoldProfile>, CrossrefReport) {
    let lines: Vec<ProfileLine> = raw.iter().cloned().map(ProfileLine::Raw).collect();
    resolve_profiles(corpus, &lines)
}

/// Resolve a mix of raw and pre-resolved profile lines.
pub fn resolve_profiles(corpus: &Corpus, lines: &[ProfileLine]) -> (Vec<GoldProfile>, CrossrefReport) {
    let index = TitleIndex::new(corpus);
    let resolved: Vec<(GoldProfile, CrossrefReport)> = lines
        .par_iter()
        .map(|line| match line {
            ProfileLine::Raw(raw) => resolve_raw(&index, raw),
            ProfileLine::Resolved {
                profile_id,
                surname,
                paper_ids,
            } => {
                let known: BTreeSet<PaperId> =
                    paper_ids.iter().copied().filter(|id| corpus.index_of(*id).is_some()).collect();
                let distinct: BTreeSet<PaperId> = paper_ids.iter().copied().collect();
                let report = CrossrefReport {
                    profiles: 1,
                    unknown_ids: distinct.len() - known.len(),
                    ..Default::default()
                };
                (
                    GoldProfile {
                        profile_id: profile_id.clone(),
                        surname: normalize_text(surname),
                        paper_ids: known,
                    },
                    report,
                )
            }
        })
        .collect();
    let mut report = CrossrefReport::default();
    let mut profiles = Vec::with_capacity(resolved.len());
    for (profile, r) in resolved {
        report.absorb(&r);
        profiles.push(profile);
    }
    profiles.sort_by(|a, b| a.profile_id.cmp(&b.profile_id));
    (profiles, report)
}
