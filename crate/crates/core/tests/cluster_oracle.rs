mod common;

use std::collections::HashMap;

use histlink_core::model::{Event, PersonRecord, RecordId};
use histlink_core::{cluster_corpus, cluster_corpus_explained, Corpus};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_sets, config_variants, random_corpus};

#[test]
fn matches_brute_force_closure() {
    let configs = config_variants();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e77e2);
    let mut chains = 0;
    for round in 0..1200 {
        let corpus = random_corpus(&mut rng, 50);
        let config = &configs[round % configs.len()];
        let expected = brute_force_sets(&corpus, config);
        chains += expected.iter().filter(|s| s.len() >= 3).count();
        assert_eq!(cluster_corpus(&corpus, config), expected, "round {round}");
    }
    // the generator must actually produce multi-member sets
    assert!(chains > 500, "only {chains} sets of three or more");
}

#[test]
fn explained_mode_agrees() {
    let configs = config_variants();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..300 {
        let corpus = random_corpus(&mut rng, 30);
        let config = &configs[round % configs.len()];
        let (sets, decisions) = cluster_corpus_explained(&corpus, config);
        assert_eq!(sets, cluster_corpus(&corpus, config), "round {round}");
        for d in decisions.iter().filter(|d| d.matched) {
            let set_a = sets.iter().position(|s| s.members.contains(&d.record_a));
            assert_eq!(set_a, sets.iter().position(|s| s.members.contains(&d.record_b)));
        }
    }
}

/// Renames every record and event at random; the partition must follow.
#[test]
fn independent_of_ids_and_order() {
    let configs = config_variants();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..200 {
        let corpus = random_corpus(&mut rng, 40);
        let config = &configs[round % configs.len()];
        let mut labels: Vec<usize> = (0..corpus.len()).collect();
        labels.shuffle(&mut rng);
        let rename: HashMap<RecordId, RecordId> = corpus
            .persons()
            .iter()
            .zip(&labels)
            .map(|(p, l)| (p.record_id.clone(), RecordId::new(format!("x{l:03}"))))
            .collect();
        let mut persons: Vec<PersonRecord> = corpus
            .persons()
            .iter()
            .map(|p| PersonRecord { record_id: rename[&p.record_id].clone(), ..p.clone() })
            .collect();
        persons.shuffle(&mut rng);
        let mut events: Vec<Event> = corpus
            .events()
            .iter()
            .map(|e| Event::new(e.event_id.clone(), e.event_type.clone(), e.date, e.location.clone()))
            .collect();
        events.reverse();
        let renamed = Corpus::new(events, persons).unwrap();

        let mut expected: Vec<Vec<RecordId>> = cluster_corpus(&corpus, config)
            .into_iter()
            .map(|s| {
                let mut m: Vec<_> = s.members.iter().map(|r| rename[r].clone()).collect();
                m.sort();
                m
            })
            .collect();
        expected.sort();
        let got: Vec<Vec<RecordId>> = cluster_corpus(&renamed, config).into_iter().map(|s| s.members).collect();
        assert_eq!(got, expected, "round {round}");
    }
}
