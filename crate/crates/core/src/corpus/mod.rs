//! Paper records, the inverse citation index and name blocking.
//!
//! A [`Corpus`] is immutable once built. Papers are stored sorted by
//! [`PaperId`] and addressed internally by a dense `u32` index, so index
//! order and id order agree.

mod blocks;
mod crossref;
mod names;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocks::{block_key, build_blocks, BlockMember, KeyMode, NameBlock};
pub use crossref::{
    crossref_profiles, load_profiles, resolve_profiles, title_similarity, CrossrefReport, GoldProfile, ProfileEntry,
    ProfileLine, RawProfile, TITLE_SIMILARITY_THRESHOLD,
};
pub use names::normalize_text;

pub type PaperId = u64;

pub const MIN_YEAR: i32 = 1800;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate paper id {id}")]
    DuplicateId { line: usize, id: PaperId },
}

impl CorpusError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        CorpusError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// One author name as printed on a paper, already normalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuthorMention {
    pub surname: String,
    pub first_initial: Option<char>,
    pub second_initial: Option<char>,
}

impl AuthorMention {
    /// Build a mention from raw text. Fails when the surname folds to
    /// nothing, when an initial is longer than one letter, or when a second
    /// initial is given without a first.
    pub fn new(surname: &str, first: Option<&str>, second: Option<&str>) -> Result<Self, String> {
        let surname = names::normalize_text(surname);
        if surname.is_empty() {
            return Err("empty surname".into());
        }
        let initial = |s: Option<&str>| match s {
            None => Ok(None),
            Some(s) => names::normalize_initial(s).map_err(|_| format!("initial {s:?} is not a single letter")),
        };
        let first_initial = initial(first)?;
        let second_initial = initial(second)?;
        if second_initial.is_some() && first_initial.is_none() {
            return Err("second initial without first initial".into());
        }
        Ok(AuthorMention {
            surname,
            first_initial,
            second_initial,
        })
    }
}

/// One publication.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperRecord {
    pub paper_id: PaperId,
    pub year: i32,
    pub authors: Vec<AuthorMention>,
    /// Sorted, deduplicated; only ids present in the corpus after loading.
    pub refs: Vec<PaperId>,
    pub title: Option<String>,
    pub journal: Option<String>,
}

/// Wire form of a paper: one JSON object per line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaperLine {
    pub id: PaperId,
    pub year: i64,
    pub authors: Vec<AuthorLine>,
    #[serde(default)]
    pub refs: Vec<PaperId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuthorLine {
    pub surname: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_initial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_initial: Option<String>,
}

impl From<&AuthorMention> for AuthorLine {
    fn from(m: &AuthorMention) -> Self {
        AuthorLine {
            surname: m.surname.clone(),
            first_initial: m.first_initial.map(String::from),
            second_initial: m.second_initial.map(String::from),
        }
    }
}

impl From<&PaperRecord> for PaperLine {
    fn from(p: &PaperRecord) -> Self {
        PaperLine {
            id: p.paper_id,
            year: p.year as i64,
            authors: p.authors.iter().map(AuthorLine::from).collect(),
            refs: p.refs.clone(),
            title: p.title.clone(),
            journal: p.journal.clone(),
        }
    }
}

impl PaperLine {
    fn into_record(self, line: usize) -> Result<PaperRecord, CorpusError> {
        if self.year < MIN_YEAR as i64 || self.year > MAX_YEAR as i64 {
            return Err(CorpusError::parse(
                line,
                format!("year {} outside {MIN_YEAR}..={MAX_YEAR}", self.year),
            ));
        }
        let authors = self
            .authors
            .iter()
            .map(|a| {
                AuthorMention::new(&a.surname, a.first_initial.as_deref(), a.second_initial.as_deref())
                    .map_err(|m| CorpusError::parse(line, m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PaperRecord {
            paper_id: self.id,
            year: self.year as i32,
            authors,
            refs: self.refs,
            title: self.title,
            journal: self.journal,
        })
    }
}

/// Counts of what the loader repaired.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub papers: usize,
    pub mentions: usize,
    pub dangling_refs: usize,
    pub self_refs: usize,
    pub duplicate_refs: usize,
}

/// Inverse of the reference relation: for each paper, the papers citing it.
#[derive(Debug, Clone, Default)]
pub struct CitationIndex {
    citers: Vec<Vec<u32>>,
}

impl CitationIndex {
    fn build(refs: &[Vec<u32>]) -> Self {
        let mut citers = vec![Vec::new(); refs.len()];
        // refs are visited in ascending citing index, so every list ends up sorted
        for (citing, list) in refs.iter().enumerate() {
            for &cited in list {
                citers[cited as usize].push(citing as u32);
            }
        }
        CitationIndex { citers }
    }

    pub fn citers(&self, idx: u32) -> &[u32] {
        &self.citers[idx as usize]
    }

    pub fn count(&self, idx: u32) -> usize {
        self.citers[idx as usize].len()
    }
}

/// Coauthor identity key: normalized surname plus first initial.
pub type NameKeyId = u32;

#[derive(Debug, Clone)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    by_id: HashMap<PaperId, u32>,
    refs: Vec<Vec<u32>>,
    citations: CitationIndex,
    name_keys: Vec<Vec<NameKeyId>>,
    key_count: usize,
}

impl Corpus {
    /// Build a corpus, enforcing the record invariants. Unknown and self
    /// references are dropped and counted; duplicate ids are fatal.
    pub fn from_records(records: Vec<PaperRecord>) -> Result<(Corpus, LoadReport), CorpusError> {
        Self::from_numbered(records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect())
    }

    fn from_numbered(mut records: Vec<(usize, PaperRecord)>) -> Result<(Corpus, LoadReport), CorpusError> {
        let mut report = LoadReport::default();
        records.sort_by_key(|(_, r)| r.paper_id);
        for w in records.windows(2) {
            if w[0].1.paper_id == w[1].1.paper_id {
                let line = w[0].0.max(w[1].0);
                return Err(CorpusError::DuplicateId {
                    line,
                    id: w[1].1.paper_id,
                });
            }
        }
        let mut papers: Vec<PaperRecord> = records.into_iter().map(|(_, r)| r).collect();
        let by_id: HashMap<PaperId, u32> = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.paper_id, i as u32))
            .collect();

        let mut refs = Vec::with_capacity(papers.len());
        for p in papers.iter_mut() {
            let before = p.refs.len();
            p.refs.sort_unstable();
            p.refs.dedup();
            report.duplicate_refs += before - p.refs.len();
            let own = p.paper_id;
            let kept_len = p.refs.len();
            p.refs.retain(|r| *r != own);
            report.self_refs += kept_len - p.refs.len();
            let kept_len = p.refs.len();
            p.refs.retain(|r| by_id.contains_key(r));
            report.dangling_refs += kept_len - p.refs.len();
            refs.push(p.refs.iter().map(|r| by_id[r]).collect::<Vec<u32>>());
        }
        let citations = CitationIndex::build(&refs);

        let mut interner: HashMap<(String, Option<char>), NameKeyId> = HashMap::new();
        let mut name_keys = Vec::with_capacity(papers.len());
        for p in &papers {
            report.mentions += p.authors.len();
            let keys = p
                .authors
                .iter()
                .map(|a| {
                    let next = interner.len() as NameKeyId;
                    *interner
                        .entry((a.surname.clone(), a.first_initial))
                        .or_insert(next)
                })
                .collect();
            name_keys.push(keys);
        }
        report.papers = papers.len();
        let key_count = interner.len();
        Ok((
            Corpus {
                papers,
                by_id,
                refs,
                citations,
                name_keys,
                key_count,
            },
            report,
        ))
    }

    /// Parse line-delimited paper records. Blank lines are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<(Corpus, LoadReport), CorpusError> {
        let mut records = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: PaperLine =
                serde_json::from_str(&line).map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
            records.push((lineno, raw.into_record(lineno)?));
        }
        Self::from_numbered(records)
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn paper(&self, idx: u32) -> &PaperRecord {
        &self.papers[idx as usize]
    }

    pub fn index_of(&self, id: PaperId) -> Option<u32> {
        self.by_id.get(&id).copied()
    }

    pub fn get(&self, id: PaperId) -> Option<&PaperRecord> {
        self.index_of(id).map(|i| self.paper(i))
    }

    pub fn citation_index(&self) -> &CitationIndex {
        &self.citations
    }

    /// Outgoing references of `idx` as dense indices, ascending.
    pub fn refs_of(&self, idx: u32) -> &[u32] {
        &self.refs[idx as usize]
    }

    pub fn citers_of(&self, idx: u32) -> &[u32] {
        self.citations.citers(idx)
    }

    /// Papers citing `id`, as paper ids, ascending.
    pub fn citers(&self, id: PaperId) -> Vec<PaperId> {
        match self.index_of(id) {
            Some(i) => self.citers_of(i).iter().map(|&c| self.papers[c as usize].paper_id).collect(),
            None => Vec::new(),
        }
    }

    pub fn citation_count(&self, id: PaperId) -> usize {
        self.index_of(id).map_or(0, |i| self.citations.count(i))
    }

    /// Interned (surname, first initial) key per author position.
    pub fn name_keys_of(&self, idx: u32) -> &[NameKeyId] {
        &self.name_keys[idx as usize]
    }

    pub fn name_key_count(&self) -> usize {
        self.key_count
    }
}

/// Read a papers file from disk.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<(Corpus, LoadReport), CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Corpus::from_reader(BufReader::new(file))
}
