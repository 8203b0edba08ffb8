//! Domain types shared by every pipeline stage.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SimilarityScore;
use crate::normalize::{normalize_text, EventDate, NormalizedText};
use crate::rules::RoleRuleSet;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_newtype!(
    /// Identifier of one person mention.
    RecordId
);
id_newtype!(
    /// Identifier of one source event record.
    EventId
);

/// A participant's function within an event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Husband,
    Wife,
    Bride,
    Groom,
    Father,
    Mother,
    Child,
    Baptized,
    Deceased,
    Witness,
    Godparent,
    Clergy,
    /// Any label outside the fixed vocabulary; never empty.
    Other(NormalizedText),
}

const ROLE_LABELS: [(&str, Role); 12] = [
    ("husband", Role::Husband),
    ("wife", Role::Wife),
    ("bride", Role::Bride),
    ("groom", Role::Groom),
    ("father", Role::Father),
    ("mother", Role::Mother),
    ("child", Role::Child),
    ("baptized", Role::Baptized),
    ("deceased", Role::Deceased),
    ("witness", Role::Witness),
    ("godparent", Role::Godparent),
    ("clergy", Role::Clergy),
];

pub const UNKNOWN_LABEL: &str = "unknown";

impl Role {
    /// Lenient parse used at ingest: unknown labels become `Other`, an empty
    /// label becomes `Other("unknown")`.
    pub fn from_label(raw: &str) -> Role {
        let label = normalize_text(raw);
        ROLE_LABELS.iter().find(|(l, _)| *l == label.as_str()).map(|(_, r)| r.clone()).unwrap_or_else(|| {
            if label.is_empty() {
                Role::Other(normalize_text(UNKNOWN_LABEL))
            } else {
                Role::Other(label)
            }
        })
    }

    /// Strict parse used by configuration files: the label must be in the
    /// fixed vocabulary, or spelled `other:<label>`.
    pub fn parse_strict(raw: &str) -> Result<Role> {
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix("other:") {
            let label = normalize_text(rest);
            if label.is_empty() {
                return Err(Error::Config(format!("role {raw:?}: empty other label")));
            }
            if ROLE_LABELS.iter().any(|(l, _)| *l == label.as_str()) {
                return Err(Error::Config(format!("role {raw:?}: {label} is a built-in role, drop the other: prefix")));
            }
            return Ok(Role::Other(label));
        }
        let label = normalize_text(trimmed);
        ROLE_LABELS
            .iter()
            .find(|(l, _)| *l == label.as_str())
            .map(|(_, r)| r.clone())
            .ok_or_else(|| Error::Config(format!("unknown role label {raw:?}")))
    }

    pub fn label(&self) -> &str {
        match self {
            Role::Other(l) => l.as_str(),
            known => ROLE_LABELS.iter().find(|(_, r)| r == known).map(|(l, _)| *l).expect("fixed vocabulary"),
        }
    }

    pub fn all_known() -> impl Iterator<Item = Role> {
        ROLE_LABELS.iter().map(|(_, r)| r.clone())
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventType {
    Baptism,
    Marriage,
    Death,
    Census,
    Other(NormalizedText),
}

impl EventType {
    pub fn from_label(raw: &str) -> EventType {
        let label = normalize_text(raw);
        match label.as_str() {
            "baptism" => EventType::Baptism,
            "marriage" => EventType::Marriage,
            "death" | "burial" => EventType::Death,
            "census" => EventType::Census,
            "" => EventType::Other(normalize_text(UNKNOWN_LABEL)),
            _ => EventType::Other(label),
        }
    }

    pub fn parse_strict(raw: &str) -> Result<EventType> {
        match EventType::from_label(raw) {
            EventType::Other(_) => Err(Error::Config(format!("unknown event type {raw:?}"))),
            t => Ok(t),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            EventType::Baptism => "baptism",
            EventType::Marriage => "marriage",
            EventType::Death => "death",
            EventType::Census => "census",
            EventType::Other(l) => l.as_str(),
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A source record: one dated event at one place with its participants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub event_id: EventId,
    pub event_type: EventType,
    pub date: EventDate,
    pub location: NormalizedText,
    participants: Vec<RecordId>,
}

impl Event {
    /// Participants are filled in when the event is added to a [`Corpus`].
    pub fn new(event_id: EventId, event_type: EventType, date: EventDate, location: NormalizedText) -> Self {
        Self { event_id, event_type, date, location, participants: Vec::new() }
    }

    /// Participant record ids, sorted.
    pub fn participants(&self) -> &[RecordId] {
        &self.participants
    }
}

/// One person mention inside one event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersonRecord {
    pub record_id: RecordId,
    pub event_id: EventId,
    pub first_name: NormalizedText,
    pub last_name: NormalizedText,
    pub role: Role,
}

impl PersonRecord {
    /// `(first, last)` blocking key.
    pub fn name_key(&self) -> (&NormalizedText, &NormalizedText) {
        (&self.first_name, &self.last_name)
    }

    /// "first last", or just "last" when the first name is missing.
    pub fn full_name(&self) -> String {
        if self.first_name.is_empty() {
            self.last_name.as_str().to_owned()
        } else {
            format!("{} {}", self.first_name, self.last_name)
        }
    }
}

/// Validated, immutable collection of events and person mentions.
#[derive(Clone, Debug)]
pub struct Corpus {
    events: Vec<Event>,
    persons: Vec<PersonRecord>,
    event_pos: HashMap<EventId, usize>,
    person_pos: HashMap<RecordId, usize>,
    person_event: Vec<usize>,
    // distinct (first, last) pairs per event, sorted
    event_names: Vec<Vec<(NormalizedText, NormalizedText)>>,
}

impl Corpus {
    /// Validates referential integrity and builds lookup tables.
    ///
    /// Events are sorted by id and persons by record id, so two corpora built
    /// from the same rows in any order are equal.
    pub fn new(mut events: Vec<Event>, mut persons: Vec<PersonRecord>) -> Result<Self> {
        events.sort_by(|a, b| a.event_id.cmp(&b.event_id));
        persons.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        let mut event_pos = HashMap::with_capacity(events.len());
        for (i, e) in events.iter_mut().enumerate() {
            if event_pos.insert(e.event_id.clone(), i).is_some() {
                return Err(Error::Corpus(format!("duplicate event_id {}", e.event_id)));
            }
            e.participants.clear();
        }
        let mut person_pos = HashMap::with_capacity(persons.len());
        let mut person_event = Vec::with_capacity(persons.len());
        for (i, p) in persons.iter().enumerate() {
            if person_pos.insert(p.record_id.clone(), i).is_some() {
                return Err(Error::Corpus(format!("duplicate record_id {}", p.record_id)));
            }
            if p.last_name.is_empty() {
                return Err(Error::Corpus(format!("record {} has no surname", p.record_id)));
            }
            if let Role::Other(l) = &p.role {
                if l.is_empty() {
                    return Err(Error::Corpus(format!("record {} has an empty role label", p.record_id)));
                }
            }
            let ev = *event_pos.get(&p.event_id).ok_or_else(|| {
                Error::Corpus(format!("record {} references unknown event {}", p.record_id, p.event_id))
            })?;
            events[ev].participants.push(p.record_id.clone());
            person_event.push(ev);
        }
        if let Some(e) = events.iter().find(|e| e.participants.is_empty()) {
            return Err(Error::Corpus(format!("event {} has no participants", e.event_id)));
        }
        let mut event_names: Vec<Vec<(NormalizedText, NormalizedText)>> = vec![Vec::new(); events.len()];
        for (p, &ev) in persons.iter().zip(&person_event) {
            event_names[ev].push((p.first_name.clone(), p.last_name.clone()));
        }
        for names in &mut event_names {
            names.sort();
            names.dedup();
        }
        Ok(Self { events, persons, event_pos, person_pos, person_event, event_names })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty corpus is valid")
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn persons(&self) -> &[PersonRecord] {
        &self.persons
    }

    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn event(&self, id: &EventId) -> Option<&Event> {
        self.event_pos.get(id).map(|&i| &self.events[i])
    }

    pub fn person(&self, id: &RecordId) -> Option<&PersonRecord> {
        self.person_pos.get(id).map(|&i| &self.persons[i])
    }

    pub(crate) fn person_index(&self, id: &RecordId) -> Option<usize> {
        self.person_pos.get(id).copied()
    }

    pub(crate) fn person_at(&self, idx: usize) -> &PersonRecord {
        &self.persons[idx]
    }

    pub(crate) fn event_index_of(&self, person_idx: usize) -> usize {
        self.person_event[person_idx]
    }

    pub(crate) fn event_at(&self, event_idx: usize) -> &Event {
        &self.events[event_idx]
    }

    pub(crate) fn event_of_index(&self, person_idx: usize) -> &Event {
        &self.events[self.person_event[person_idx]]
    }

    /// Event a person record belongs to.
    pub fn event_of(&self, person: &PersonRecord) -> &Event {
        match self.person_index(&person.record_id) {
            Some(i) => self.event_of_index(i),
            None => self.event(&person.event_id).expect("person from another corpus"),
        }
    }

    pub(crate) fn event_names(&self, event_idx: usize) -> &[(NormalizedText, NormalizedText)] {
        &self.event_names[event_idx]
    }

    /// Re-checks every invariant; corpora built with [`Corpus::new`] always pass.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.events {
            for r in &e.participants {
                let p = self
                    .person(r)
                    .ok_or_else(|| Error::Corpus(format!("event {} lists unknown record {r}", e.event_id)))?;
                if p.event_id != e.event_id {
                    return Err(Error::Corpus(format!("record {r} does not point back to event {}", e.event_id)));
                }
                seen.insert(r);
            }
        }
        if seen.len() != self.persons.len() {
            return Err(Error::Corpus("some records are not listed by their event".into()));
        }
        Ok(())
    }
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events && self.persons == other.persons
    }
}

/// Which metric scores name similarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameMetric {
    #[default]
    JaroWinkler,
    NormalizedEdit,
}

impl NameMetric {
    pub fn score(self, a: &str, b: &str) -> SimilarityScore {
        match self {
            NameMetric::JaroWinkler => crate::metrics::jaro_winkler(a, b),
            NameMetric::NormalizedEdit => crate::metrics::normalized_edit_similarity(a, b),
        }
    }
}

impl std::str::FromStr for NameMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jaro_winkler" | "jaro-winkler" => Ok(NameMetric::JaroWinkler),
            "normalized_edit" | "normalized-edit" | "levenshtein" => Ok(NameMetric::NormalizedEdit),
            _ => Err(Error::Config(format!("unknown name metric {s:?}"))),
        }
    }
}

/// Every threshold, window and toggle the matcher consults.
#[derive(Clone, Debug)]
pub struct MatchConfig {
    pub name_metric: NameMetric,
    pub name_threshold: SimilarityScore,
    pub location_threshold: SimilarityScore,
    /// Maximum year difference for two mentions to match (inclusive).
    pub window_years: u32,
    pub min_relationship_support: u32,
    pub relationship_required: bool,
    pub role_rules: Arc<RoleRuleSet>,
    pub missing_location_matches: bool,
    /// Merge index blocks whose name keys are similar (single linkage).
    pub fuzzy_keys: bool,
    /// Multiplier on the name score when only one mention has a first name.
    pub missing_first_name_penalty: f64,
}

pub const DEFAULT_NAME_THRESHOLD: f64 = 0.92;
pub const DEFAULT_LOCATION_THRESHOLD: f64 = 0.80;
pub const DEFAULT_WINDOW_YEARS: u32 = 5;
pub const DEFAULT_MIN_RELATIONSHIP_SUPPORT: u32 = 2;
pub const DEFAULT_MISSING_FIRST_NAME_PENALTY: f64 = 0.9;

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            name_metric: NameMetric::JaroWinkler,
            name_threshold: SimilarityScore::new(DEFAULT_NAME_THRESHOLD).expect("in range"),
            location_threshold: SimilarityScore::new(DEFAULT_LOCATION_THRESHOLD).expect("in range"),
            window_years: DEFAULT_WINDOW_YEARS,
            min_relationship_support: DEFAULT_MIN_RELATIONSHIP_SUPPORT,
            relationship_required: false,
            role_rules: Arc::new(RoleRuleSet::builtin()),
            missing_location_matches: true,
            fuzzy_keys: false,
            missing_first_name_penalty: DEFAULT_MISSING_FIRST_NAME_PENALTY,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.missing_first_name_penalty) {
            return Err(Error::Config(format!(
                "missing_first_name_penalty {} outside [0, 1]",
                self.missing_first_name_penalty
            )));
        }
        Ok(())
    }

    /// Same config with every role rule disabled.
    pub fn without_rules(&self) -> Self {
        Self { role_rules: Arc::new(RoleRuleSet::empty()), ..self.clone() }
    }
}

/// Per-pair verdict with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchDecision {
    pub record_a: RecordId,
    pub record_b: RecordId,
    pub matched: bool,
    pub name_score: SimilarityScore,
    pub date_ok: bool,
    pub location_ok: bool,
    pub relationship_support: u32,
    pub role_veto: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize_name;

    fn ev(id: &str) -> Event {
        Event::new(id.into(), EventType::Marriage, EventDate::year_only(1850).unwrap(), normalize_name("x"))
    }

    fn person(id: &str, event: &str, last: &str) -> PersonRecord {
        PersonRecord {
            record_id: id.into(),
            event_id: event.into(),
            first_name: normalize_name("john"),
            last_name: normalize_name(last),
            role: Role::Witness,
        }
    }

    #[test]
    fn roles_parse() {
        assert_eq!(Role::from_label("Husband"), Role::Husband);
        assert_eq!(Role::from_label("father of the bride"), Role::Other(normalize_name("father of the bride")));
        assert_eq!(Role::from_label(""), Role::Other(normalize_name("unknown")));
        assert_eq!(Role::parse_strict("deceased").unwrap(), Role::Deceased);
        assert_eq!(Role::parse_strict("other:first witness").unwrap(), Role::Other(normalize_name("first witness")));
        assert!(Role::parse_strict("grandfather").is_err());
        assert!(Role::parse_strict("other:").is_err());
        for r in Role::all_known() {
            assert_eq!(Role::from_label(r.label()), r);
        }
    }

    #[test]
    fn corpus_links_participants() {
        let c = Corpus::new(
            vec![ev("e2"), ev("e1")],
            vec![person("p2", "e1", "a"), person("p1", "e1", "b"), person("p3", "e2", "a")],
        )
        .unwrap();
        let e1 = c.event(&"e1".into()).unwrap();
        assert_eq!(e1.participants(), &[RecordId::from("p1"), RecordId::from("p2")]);
        c.validate().unwrap();
        assert_eq!(c.event_of(c.person(&"p3".into()).unwrap()).event_id.as_str(), "e2");
    }

    #[test]
    fn corpus_rejects_bad_references() {
        let err = Corpus::new(vec![ev("e1")], vec![person("p1", "nope", "a")]).unwrap_err();
        assert!(err.to_string().contains("unknown event"));
        let err = Corpus::new(vec![ev("e1")], vec![person("p1", "e1", "")]).unwrap_err();
        assert!(err.to_string().contains("surname"));
        let err = Corpus::new(vec![ev("e1")], vec![person("p1", "e1", "a"), person("p1", "e1", "b")]).unwrap_err();
        assert!(err.to_string().contains("duplicate record_id"));
        let err = Corpus::new(vec![ev("e1"), ev("e2")], vec![person("p1", "e1", "a")]).unwrap_err();
        assert!(err.to_string().contains("no participants"));
    }

    #[test]
    fn default_config() {
        let c = MatchConfig::default();
        assert_eq!(c.window_years, 5);
        assert_eq!(c.min_relationship_support, 2);
        assert_eq!(c.name_threshold.value(), 0.92);
        assert_eq!(c.location_threshold.value(), 0.80);
        assert!(!c.relationship_required);
        assert!(c.missing_location_matches);
        assert_eq!(c.role_rules.rules().len(), 4);
        c.validate().unwrap();
    }
}
