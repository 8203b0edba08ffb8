use std::collections::{BTreeMap, HashMap, HashSet};

use histlink_core::eval::{generate_corpus, score, GenParams};
use histlink_core::model::Role;
use histlink_core::{cluster_corpus, time_within, MatchConfig};

fn quiet(seed: u64) -> GenParams {
    GenParams { n_individuals: 2000, families: 500, seed, ..GenParams::default() }
}

fn noisy(seed: u64) -> GenParams {
    GenParams {
        typo_rate: 0.05,
        location_alias_rate: 0.3,
        date_jitter_years: 2,
        duplicate_name_rate: 0.3,
        ..quiet(seed)
    }
}

#[test]
fn same_seed_same_bytes() {
    let files = ["events.csv", "persons.csv", "truth.csv", "aliases.csv"];
    let (d1, d2, d3) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate_corpus(&noisy(11)).unwrap().write(d1.path()).unwrap();
    generate_corpus(&noisy(11)).unwrap().write(d2.path()).unwrap();
    generate_corpus(&noisy(12)).unwrap().write(d3.path()).unwrap();
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    for f in files {
        assert_eq!(read(&d1, f), read(&d2, f), "{f}");
    }
    assert_ne!(read(&d1, "persons.csv"), read(&d3, "persons.csv"));
}

#[test]
fn nobody_appears_after_their_death() {
    for seed in 0..5 {
        let g = generate_corpus(&GenParams { death_rate: 1.0, ..noisy(seed) }).unwrap();
        let c = &g.corpus;
        let mut deaths = HashMap::new();
        for p in c.persons() {
            if p.role == Role::Deceased {
                let ind = g.truth.individual_of(&p.record_id).unwrap();
                assert!(deaths.insert(ind, c.event_of(p).date).is_none(), "{ind} dies twice");
            }
        }
        assert!(!deaths.is_empty());
        for p in c.persons() {
            let ind = g.truth.individual_of(&p.record_id).unwrap();
            if let Some(death) = deaths.get(ind) {
                let d = c.event_of(p).date;
                assert!(d.sort_key() <= death.sort_key(), "{} at {d} after death {death}", p.record_id);
            }
        }
    }
}

#[test]
fn every_record_has_truth_and_events_have_expected_roles() {
    let g = generate_corpus(&noisy(3)).unwrap();
    assert_eq!(g.truth.len(), g.corpus.len());
    let mut by_event: BTreeMap<&str, Vec<&Role>> = BTreeMap::new();
    for p in g.corpus.persons() {
        assert!(g.truth.individual_of(&p.record_id).is_some());
        by_event.entry(p.event_id.as_str()).or_default().push(&p.role);
    }
    let mut dyads = 0;
    for e in g.corpus.events() {
        let roles = &by_event[e.event_id.as_str()];
        if roles.contains(&&Role::Husband) && roles.contains(&&Role::Wife) {
            dyads += 1;
        }
        // nobody plays two parts in one event
        let inds: Vec<_> = e.participants().iter().map(|r| g.truth.individual_of(r).unwrap()).collect();
        assert_eq!(inds.iter().collect::<HashSet<_>>().len(), inds.len(), "{}", e.event_id);
    }
    assert!(dyads >= 500);
}

#[test]
fn namesakes_appear_with_duplicate_rate() {
    let names = |p: &GenParams| {
        let g = generate_corpus(p).unwrap();
        let mut inds_by_name: HashMap<String, HashSet<String>> = HashMap::new();
        for p in g.corpus.persons() {
            inds_by_name
                .entry(p.full_name())
                .or_default()
                .insert(g.truth.individual_of(&p.record_id).unwrap().to_owned());
        }
        inds_by_name.values().filter(|s| s.len() > 1).count()
    };
    assert_eq!(names(&quiet(5)), 0);
    assert!(names(&GenParams { duplicate_name_rate: 1.0, ..quiet(5) }) > 100);
}

#[test]
fn zero_noise_is_perfectly_precise_and_recalls_close_pairs() {
    for second_generation in [false, true] {
        for seed in 0..3 {
            let g = generate_corpus(&GenParams { second_generation, ..quiet(seed) }).unwrap();
            let corpus = g.resolved_corpus();
            let sets = cluster_corpus(&corpus, &MatchConfig::default());
            let report = score(&sets, &g.truth).unwrap();
            assert_eq!(report.precision, 1.0, "seed {seed}: {report}");

            let set_of: HashMap<_, _> =
                sets.iter().enumerate().flat_map(|(i, s)| s.members.iter().map(move |m| (m, i))).collect();
            let mut by_ind: HashMap<&str, Vec<_>> = HashMap::new();
            for p in corpus.persons() {
                by_ind.entry(g.truth.individual_of(&p.record_id).unwrap()).or_default().push(p);
            }
            let mut close = 0;
            for mentions in by_ind.values() {
                for (i, a) in mentions.iter().enumerate() {
                    for b in &mentions[i + 1..] {
                        if time_within(&corpus.event_of(a).date, &corpus.event_of(b).date, 5) {
                            close += 1;
                            assert_eq!(set_of[&a.record_id], set_of[&b.record_id], "{} / {}", a.record_id, b.record_id);
                        }
                    }
                }
            }
            assert!(close > 1000);
        }
    }
}
