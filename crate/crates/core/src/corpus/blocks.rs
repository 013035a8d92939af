use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AuthorMention, Corpus, PaperId};

/// How author mentions are grouped into name blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyMode {
    /// Surname only; initials are ignored. Used for initial-based precision.
    SurnameOnly,
    /// Surname plus first initial. Mentions without a first initial fall
    /// back to a per-surname block keyed `surname_`.
    SurnameFirstInitial,
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::SurnameOnly => "surname",
            KeyMode::SurnameFirstInitial => "surname-initial",
        })
    }
}

impl FromStr for KeyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "surname" | "surname-only" => Ok(KeyMode::SurnameOnly),
            "surname-initial" | "surname-first-initial" => Ok(KeyMode::SurnameFirstInitial),
            other => Err(format!("unknown key mode {other:?} (expected surname or surname-initial)")),
        }
    }
}

pub fn block_key(mention: &AuthorMention, mode: KeyMode) -> String {
    match mode {
        KeyMode::SurnameOnly => mention.surname.clone(),
        KeyMode::SurnameFirstInitial => match mention.first_initial {
            Some(c) => format!("{}_{}", mention.surname, c),
            None => format!("{}_", mention.surname),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockMember {
    pub paper: PaperId,
    pub position: u16,
}

/// All mentions sharing one key. Members are sorted by (paper, position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameBlock {
    pub key: String,
    pub members: Vec<BlockMember>,
}

impl NameBlock {
    pub fn new(key: impl Into<String>, mut members: Vec<BlockMember>) -> Self {
        members.sort_unstable();
        members.dedup();
        NameBlock {
            key: key.into(),
            members,
        }
    }

    /// Distinct papers in the block, ascending.
    pub fn papers(&self) -> Vec<PaperId> {
        let mut out: Vec<PaperId> = self.members.iter().map(|m| m.paper).collect();
        out.dedup();
        out
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Author positions of `paper` that belong to this block.
    pub fn positions_of(&self, paper: PaperId) -> impl Iterator<Item = u16> + '_ {
        let start = self.members.partition_point(|m| m.paper < paper);
        self.members[start..]
            .iter()
            .take_while(move |m| m.paper == paper)
            .map(|m| m.position)
    }

    /// The focal mentions of `paper` in this block.
    pub fn mentions_of<'c>(&'c self, corpus: &'c Corpus, paper: PaperId) -> impl Iterator<Item = &'c AuthorMention> + 'c {
        let record = corpus.get(paper);
        self.positions_of(paper)
            .filter_map(move |pos| record.and_then(|r| r.authors.get(pos as usize)))
    }
}

/// Group every author mention of the corpus into exactly one block.
/// Blocks come back sorted by key.
pub fn build_blocks(corpus: &Corpus, mode: KeyMode) -> Vec<NameBlock> {
    let mut groups: BTreeMap<String, Vec<BlockMember>> = BTreeMap::new();
    for paper in corpus.papers() {
        for (pos, mention) in paper.authors.iter().enumerate() {
            groups.entry(block_key(mention, mode)).or_default().push(BlockMember {
                paper: paper.paper_id,
                position: pos as u16,
            });
        }
    }
    // papers are visited in id order, so members are already sorted
    groups
        .into_iter()
        .map(|(key, members)| NameBlock { key, members })
        .collect()
}
