//! Transitive grouping of matching mentions into record sets.
//!
//! Within each index group the record sets are the connected components of
//! the graph whose edges are matching pairs. Role vetoes only remove edges:
//! two vetoed mentions still share a set when a chain of matches links them.

use rayon::prelude::*;

use crate::indexer::{build_index, IndexGroup};
use crate::matcher::{decide, is_match};
use crate::model::{Corpus, MatchConfig, MatchDecision, RecordId};

/// Union-find with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Returns false if the two were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] = self.rank[a].saturating_add(1);
        }
        true
    }

    /// Components as lists of element indices, each ascending.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

/// Mentions asserted to be one individual.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RecordSet {
    /// Smallest member record id.
    pub set_id: RecordId,
    /// Sorted ascending.
    pub members: Vec<RecordId>,
}

impl RecordSet {
    pub fn from_members(mut members: Vec<RecordId>) -> Self {
        assert!(!members.is_empty(), "record set needs a member");
        members.sort();
        Self { set_id: members[0].clone(), members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn sets_from_dsu(group: &IndexGroup, dsu: &mut DisjointSet) -> Vec<RecordSet> {
    let mut sets: Vec<RecordSet> = dsu
        .components()
        .into_iter()
        .map(|c| RecordSet::from_members(c.into_iter().map(|k| group.members[k].clone()).collect()))
        .collect();
    sets.sort();
    sets
}

/// Clusters one index group.
pub fn cluster_group(group: &IndexGroup, corpus: &Corpus, config: &MatchConfig) -> Vec<RecordSet> {
    let idx = &group.member_idx;
    let years: Vec<i64> = idx.iter().map(|&i| i64::from(corpus.event_of_index(i).date.year())).collect();
    let window = i64::from(config.window_years);
    let mut dsu = DisjointSet::new(idx.len());
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            // members are date-sorted: everything further on is outside the window
            if years[b] - years[a] > window {
                break;
            }
            if dsu.find(a) != dsu.find(b) && is_match(corpus, idx[a], idx[b], config) {
                dsu.union(a, b);
            }
        }
    }
    sets_from_dsu(group, &mut dsu)
}

/// Clusters one group and returns a decision for every member pair.
pub fn cluster_group_explained(
    group: &IndexGroup,
    corpus: &Corpus,
    config: &MatchConfig,
) -> (Vec<RecordSet>, Vec<MatchDecision>) {
    let idx = &group.member_idx;
    let mut dsu = DisjointSet::new(idx.len());
    let mut decisions = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let d = decide(corpus, idx[a], idx[b], config);
            if d.matched {
                dsu.union(a, b);
            }
            decisions.push(d);
        }
    }
    (sets_from_dsu(group, &mut dsu), decisions)
}

/// Clusters every index group, in parallel on the current rayon pool.
/// Output is sorted by set id and does not depend on the number of workers.
pub fn cluster_corpus(corpus: &Corpus, config: &MatchConfig) -> Vec<RecordSet> {
    let groups = build_index(corpus, config);
    let mut sets: Vec<RecordSet> = groups.par_iter().flat_map_iter(|g| cluster_group(g, corpus, config)).collect();
    sets.sort();
    sets
}

/// Like [`cluster_corpus`], also returning every evaluated pair decision in
/// index-group order.
pub fn cluster_corpus_explained(corpus: &Corpus, config: &MatchConfig) -> (Vec<RecordSet>, Vec<MatchDecision>) {
    let groups = build_index(corpus, config);
    let per_group: Vec<(Vec<RecordSet>, Vec<MatchDecision>)> =
        groups.par_iter().map(|g| cluster_group_explained(g, corpus, config)).collect();
    let mut sets = Vec::new();
    let mut decisions = Vec::new();
    for (s, d) in per_group {
        sets.extend(s);
        decisions.extend(d);
    }
    sets.sort();
    (sets, decisions)
}
