//! Random small corpora and a brute-force clustering oracle shared by the
//! integration tests.

#![allow(dead_code)]

pub mod metric_oracles;

use std::collections::BTreeMap;
use std::path::PathBuf;

use histlink_core::metrics::jaro_winkler;
use histlink_core::model::{Event, EventType, PersonRecord, Role};
use histlink_core::normalize::{normalize_name, EventDate};
use histlink_core::{records_match, Corpus, MatchConfig, RecordSet};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

const FIRST: &[&str] = &["john", "jon", "joseph", "marie", "mary", ""];
const LAST: &[&str] = &["setter", "seter", "allery", "desroches", "desroche"];
const PLACES: &[&str] = &["grand rapids church", "rapids church", "st boniface", "st bonifase", "saint charles", ""];
const ROLES: &[Role] = &[
    Role::Husband,
    Role::Wife,
    Role::Bride,
    Role::Groom,
    Role::Baptized,
    Role::Deceased,
    Role::Father,
    Role::Mother,
    Role::Witness,
    Role::Godparent,
];
const TYPES: &[EventType] = &[EventType::Baptism, EventType::Marriage, EventType::Death, EventType::Census];

/// Up to `max_records` mentions over a handful of names, places and years,
/// so that every match criterion is exercised on both sides.
pub fn random_corpus<R: Rng>(rng: &mut R, max_records: usize) -> Corpus {
    let n = rng.gen_range(1..=max_records);
    let n_events = rng.gen_range(1..=n);
    let events: Vec<Event> = (0..n_events)
        .map(|i| {
            let year = rng.gen_range(1840..=1860);
            let date = if rng.gen_bool(0.5) {
                EventDate::new(year, Some(rng.gen_range(1..=12)), Some(rng.gen_range(1..=28))).unwrap()
            } else {
                EventDate::year_only(year).unwrap()
            };
            Event::new(
                format!("e{i:02}").as_str().into(),
                TYPES.choose(rng).unwrap().clone(),
                date,
                normalize_name(PLACES.choose(rng).unwrap()),
            )
        })
        .collect();
    let persons = (0..n)
        .map(|i| {
            let event = if i < n_events { i } else { rng.gen_range(0..n_events) };
            PersonRecord {
                record_id: format!("r{i:02}").as_str().into(),
                event_id: format!("e{event:02}").as_str().into(),
                first_name: normalize_name(FIRST.choose(rng).unwrap()),
                last_name: normalize_name(LAST.choose(rng).unwrap()),
                role: ROLES.choose(rng).unwrap().clone(),
            }
        })
        .collect();
    Corpus::new(events, persons).unwrap()
}

/// Connected components of the full pairwise match matrix, restricted to
/// pairs that share a blocking key. With fuzzy keys the blocks are the
/// components of the key-similarity graph, computed here by search.
pub fn brute_force_sets(corpus: &Corpus, config: &MatchConfig) -> Vec<RecordSet> {
    let persons = corpus.persons();
    let n = persons.len();
    let block = blocks(corpus, config);
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && block[i] == block[j] && records_match(&persons[i], &persons[j], corpus, config).matched {
                adj[i].push(j);
            }
        }
    }
    let mut sets = components(n, &adj)
        .into_iter()
        .map(|c| RecordSet::from_members(c.into_iter().map(|i| persons[i].record_id.clone()).collect()))
        .collect::<Vec<_>>();
    sets.sort();
    sets
}

fn blocks(corpus: &Corpus, config: &MatchConfig) -> Vec<usize> {
    let mut keys: BTreeMap<(String, String), usize> = BTreeMap::new();
    for p in corpus.persons() {
        let next = keys.len();
        keys.entry((p.first_name.as_str().to_owned(), p.last_name.as_str().to_owned())).or_insert(next);
    }
    let key_list: Vec<&(String, String)> = {
        let mut v: Vec<_> = keys.iter().collect();
        v.sort_by_key(|(_, &i)| i);
        v.into_iter().map(|(k, _)| k).collect()
    };
    let k = key_list.len();
    let mut key_adj = vec![Vec::new(); k];
    if config.fuzzy_keys {
        let text = |key: &(String, String)| {
            if key.0.is_empty() {
                key.1.clone()
            } else {
                format!("{} {}", key.0, key.1)
            }
        };
        for a in 0..k {
            for b in 0..k {
                let (ka, kb) = (key_list[a], key_list[b]);
                if a != b
                    && ka.1.chars().next() == kb.1.chars().next()
                    && jaro_winkler(&text(ka), &text(kb)).value() >= config.name_threshold.value()
                {
                    key_adj[a].push(b);
                }
            }
        }
    }
    let mut block_of_key = vec![0; k];
    for (b, comp) in components(k, &key_adj).into_iter().enumerate() {
        for key in comp {
            block_of_key[key] = b;
        }
    }
    corpus
        .persons()
        .iter()
        .map(|p| block_of_key[keys[&(p.first_name.as_str().to_owned(), p.last_name.as_str().to_owned())]])
        .collect()
}

/// Components by depth-first search.
fn components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Config variants the oracle tests cycle through.
pub fn config_variants() -> Vec<MatchConfig> {
    let base = MatchConfig::default();
    vec![
        base.clone(),
        MatchConfig { window_years: 0, ..base.clone() },
        MatchConfig { window_years: 12, ..base.clone() },
        MatchConfig { relationship_required: true, min_relationship_support: 1, ..base.clone() },
        MatchConfig { missing_location_matches: false, ..base.clone() },
        MatchConfig { fuzzy_keys: true, ..base.clone() },
        MatchConfig { fuzzy_keys: true, window_years: 20, ..base.clone() },
        base.without_rules(),
    ]
}
