//! Blocking: group mentions by normalized `(first, last)` name and order each
//! group by event date.

use std::collections::BTreeMap;

use crate::cluster::DisjointSet;
use crate::metrics::jaro_winkler_chars;
use crate::model::{Corpus, MatchConfig, RecordId};
use crate::normalize::NormalizedText;

pub type NameKey = (NormalizedText, NormalizedText);

/// One block of candidate mentions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexGroup {
    pub key: NameKey,
    /// Sorted by (year, month or 0, day or 0, record id).
    pub members: Vec<RecordId>,
    pub(crate) member_idx: Vec<usize>,
}

impl IndexGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn key_text(key: &NameKey) -> Vec<char> {
    if key.0.is_empty() {
        key.1.as_str().chars().collect()
    } else {
        format!("{} {}", key.0, key.1).chars().collect()
    }
}

/// Builds the blocking index. Groups come back sorted by key.
pub fn build_index(corpus: &Corpus, config: &MatchConfig) -> Vec<IndexGroup> {
    let mut blocks: BTreeMap<NameKey, Vec<usize>> = BTreeMap::new();
    for (i, p) in corpus.persons().iter().enumerate() {
        blocks.entry((p.first_name.clone(), p.last_name.clone())).or_default().push(i);
    }
    let blocks: Vec<(NameKey, Vec<usize>)> = if config.fuzzy_keys {
        merge_similar_keys(blocks.into_iter().collect(), config)
    } else {
        blocks.into_iter().collect()
    };
    blocks
        .into_iter()
        .map(|(key, mut idx)| {
            idx.sort_by(|&a, &b| {
                let da = corpus.event_of_index(a).date.sort_key();
                let db = corpus.event_of_index(b).date.sort_key();
                da.cmp(&db).then_with(|| corpus.person_at(a).record_id.cmp(&corpus.person_at(b).record_id))
            });
            let members = idx.iter().map(|&i| corpus.person_at(i).record_id.clone()).collect();
            IndexGroup { key, members, member_idx: idx }
        })
        .collect()
}

/// Single-linkage merge of blocks whose concatenated keys reach the name
/// threshold under Jaro-Winkler. Candidate key pairs are restricted to keys
/// whose surnames share a first character. `blocks` must be sorted by key;
/// each merged block takes its smallest key.
fn merge_similar_keys(blocks: Vec<(NameKey, Vec<usize>)>, config: &MatchConfig) -> Vec<(NameKey, Vec<usize>)> {
    let texts: Vec<Vec<char>> = blocks.iter().map(|(k, _)| key_text(k)).collect();
    let mut buckets: BTreeMap<Option<char>, Vec<usize>> = BTreeMap::new();
    for (i, (key, _)) in blocks.iter().enumerate() {
        buckets.entry(key.1.as_str().chars().next()).or_default().push(i);
    }
    let threshold = config.name_threshold.value();
    let mut dsu = DisjointSet::new(blocks.len());
    for members in buckets.values() {
        for (pos, &i) in members.iter().enumerate() {
            for &j in &members[pos + 1..] {
                if dsu.find(i) != dsu.find(j) && jaro_winkler_chars(&texts[i], &texts[j]) >= threshold {
                    dsu.union(i, j);
                }
            }
        }
    }
    let mut merged: BTreeMap<usize, (NameKey, Vec<usize>)> = BTreeMap::new();
    // blocks are visited in key order, so the first key seen per root is the smallest
    for (i, (key, idx)) in blocks.into_iter().enumerate() {
        let root = dsu.find(i);
        merged.entry(root).or_insert_with(|| (key, Vec::new())).1.extend(idx);
    }
    let mut out: Vec<_> = merged.into_values().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
