//! Corpus ingestion with quarantine, and result persistence.
//!
//! Input is two UTF-8 CSV files:
//!
//! * `events.csv`: `event_id,event_type,date,location`
//! * `persons.csv`: `record_id,event_id,first_name,last_name,role`
//!
//! Rows that cannot be matched (no surname, unknown event, bad date,
//! duplicate id) are dropped into the [`IngestReport`] instead of failing
//! the load. Missing files or header columns are fatal.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cluster::RecordSet;
use crate::error::{Error, Result};
use crate::model::{Corpus, Event, EventId, EventType, MatchDecision, PersonRecord, RecordId, Role};
use crate::normalize::{normalize_location, normalize_name, normalize_text, parse_date, AliasTable, NormalizedText};
use crate::rules::RoleRuleSet;

pub const EVENT_COLUMNS: [&str; 4] = ["event_id", "event_type", "date", "location"];
pub const PERSON_COLUMNS: [&str; 5] = ["record_id", "event_id", "first_name", "last_name", "role"];

pub const REASON_MISSING_SURNAME: &str = "missing surname";
pub const REASON_DANGLING_EVENT: &str = "dangling event reference";

/// Maps source role vocabularies onto the built-in roles.
#[derive(Clone, Debug, Default)]
pub struct RoleMap {
    map: HashMap<NormalizedText, Role>,
}

impl RoleMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Target labels are parsed strictly (built-in label or `other:<label>`).
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut map = HashMap::new();
        for (source, target) in pairs {
            let key = normalize_text(source.as_ref());
            if key.is_empty() {
                return Err(Error::Config("role map: empty source label".into()));
            }
            let role = Role::parse_strict(target.as_ref())?;
            if let Some(prev) = map.insert(key.clone(), role.clone()) {
                if prev != role {
                    return Err(Error::Config(format!("role map: {key:?} maps to both {prev} and {role}")));
                }
            }
        }
        Ok(Self { map })
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        Self::from_pairs(read_two_column_csv(reader, "source_label", "canonical_role")?)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(f).map_err(|e| e.with_path(path))
    }

    /// Mapped role, or the lenient parse of the label itself.
    pub fn resolve(&self, raw: &str) -> Role {
        self.map.get(&normalize_text(raw)).cloned().unwrap_or_else(|| Role::from_label(raw))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuarantinedRow {
    /// `events` or `persons`.
    pub file: &'static str,
    /// 1-based line number in the source file (the header is line 1).
    pub line: u64,
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub records_loaded: usize,
    pub events_loaded: usize,
    pub quarantined: Vec<QuarantinedRow>,
}

struct Columns {
    positions: Vec<usize>,
}

impl Columns {
    fn locate(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Self> {
        let positions = wanted
            .iter()
            .map(|w| {
                headers
                    .iter()
                    .position(|h| h.trim().trim_start_matches('\u{feff}') == *w)
                    .ok_or_else(|| Error::MissingColumn { column: (*w).to_owned() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { positions })
    }

    fn get<'r>(&self, row: &'r csv::StringRecord, i: usize) -> &'r str {
        row.get(self.positions[i]).unwrap_or("").trim()
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).from_reader(reader)
}

/// Reads a two-column mapping file, locating columns by header name.
pub(crate) fn read_two_column_csv<R: Read>(reader: R, a: &str, b: &str) -> Result<Vec<(String, String)>> {
    let mut rdr = csv_reader(reader);
    let cols = Columns::locate(rdr.headers()?, &[a, b])?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        out.push((cols.get(&row, 0).to_owned(), cols.get(&row, 1).to_owned()));
    }
    Ok(out)
}

fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}

/// Loads and validates a corpus from file paths.
pub fn load_corpus(
    events_file: &Path,
    persons_file: &Path,
    aliases: Option<&Path>,
    role_map: Option<&Path>,
) -> Result<(Corpus, IngestReport)> {
    let aliases = aliases.map(AliasTable::from_csv_path).transpose()?.unwrap_or_default();
    let role_map = role_map.map(RoleMap::from_csv_path).transpose()?.unwrap_or_default();
    let open = |p: &Path| File::open(p).map_err(|e| Error::io(p, e));
    let events = read_events(open(events_file)?, &aliases).map_err(|e| e.with_path(events_file))?;
    let persons = read_persons(open(persons_file)?, &role_map).map_err(|e| e.with_path(persons_file))?;
    assemble(events, persons)
}

/// Same as [`load_corpus`] over in-memory readers.
pub fn load_corpus_from_readers<E: Read, P: Read>(
    events: E,
    persons: P,
    aliases: &AliasTable,
    role_map: &RoleMap,
) -> Result<(Corpus, IngestReport)> {
    assemble(read_events(events, aliases)?, read_persons(persons, role_map)?)
}

struct EventRow {
    line: u64,
    event: std::result::Result<Event, (String, String)>,
}

struct PersonRow {
    line: u64,
    record_id: String,
    event_id: String,
    person: PersonRecord,
}

fn read_events<R: Read>(reader: R, aliases: &AliasTable) -> Result<Vec<EventRow>> {
    let mut rdr = csv_reader(reader);
    let cols = Columns::locate(rdr.headers()?, &EVENT_COLUMNS)?;
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let id = cols.get(&row, 0).to_owned();
        let event = if id.is_empty() {
            Err((id, "missing event_id".to_owned()))
        } else {
            match parse_date(cols.get(&row, 2)) {
                Ok(date) => Ok(Event::new(
                    EventId::new(id),
                    EventType::from_label(cols.get(&row, 1)),
                    date,
                    normalize_location(cols.get(&row, 3), aliases),
                )),
                Err(e) => Err((id, format!("unparseable date: {e}"))),
            }
        };
        rows.push(EventRow { line: line_of(&row), event });
    }
    Ok(rows)
}

fn read_persons<R: Read>(reader: R, role_map: &RoleMap) -> Result<Vec<PersonRow>> {
    let mut rdr = csv_reader(reader);
    let cols = Columns::locate(rdr.headers()?, &PERSON_COLUMNS)?;
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let record_id = cols.get(&row, 0).to_owned();
        let event_id = cols.get(&row, 1).to_owned();
        let person = PersonRecord {
            record_id: RecordId::new(record_id.clone()),
            event_id: EventId::new(event_id.clone()),
            first_name: normalize_name(cols.get(&row, 2)),
            last_name: normalize_name(cols.get(&row, 3)),
            role: role_map.resolve(cols.get(&row, 4)),
        };
        rows.push(PersonRow { line: line_of(&row), record_id, event_id, person });
    }
    Ok(rows)
}

fn assemble(event_rows: Vec<EventRow>, person_rows: Vec<PersonRow>) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let mut quarantine = |file, line, id: &str, reason: String| {
        report.quarantined.push(QuarantinedRow { file, line, id: id.to_owned(), reason });
    };

    let mut events: BTreeMap<EventId, (u64, Event)> = BTreeMap::new();
    let mut bad_events: HashSet<String> = HashSet::new();
    for row in event_rows {
        match row.event {
            Err((id, reason)) => {
                bad_events.insert(id.clone());
                quarantine("events", row.line, &id, reason);
            }
            Ok(e) => {
                if events.contains_key(&e.event_id) {
                    quarantine("events", row.line, e.event_id.as_str(), "duplicate event_id".into());
                } else {
                    events.insert(e.event_id.clone(), (row.line, e));
                }
            }
        }
    }

    let mut persons = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut used_events = HashSet::new();
    for row in person_rows {
        let reason = if row.record_id.is_empty() {
            Some("missing record_id".to_owned())
        } else if !seen_ids.insert(row.record_id.clone()) {
            Some("duplicate record_id".to_owned())
        } else if row.person.last_name.is_empty() {
            Some(REASON_MISSING_SURNAME.to_owned())
        } else if !events.contains_key(&row.person.event_id) {
            if bad_events.contains(&row.event_id) {
                Some(format!("{REASON_DANGLING_EVENT}: event {} was quarantined", row.event_id))
            } else {
                Some(REASON_DANGLING_EVENT.to_owned())
            }
        } else {
            None
        };
        match reason {
            Some(r) => quarantine("persons", row.line, &row.record_id, r),
            None => {
                used_events.insert(row.person.event_id.clone());
                persons.push(row.person);
            }
        }
    }

    let mut kept = Vec::with_capacity(events.len());
    for (id, (line, e)) in events {
        if used_events.contains(&id) {
            kept.push(e);
        } else {
            quarantine("events", line, id.as_str(), "event has no matchable participants".into());
        }
    }
    report.quarantined.sort_by(|a, b| (a.file, a.line).cmp(&(b.file, b.line)));
    report.events_loaded = kept.len();
    report.records_loaded = persons.len();
    let corpus = Corpus::new(kept, persons)?;
    Ok((corpus, report))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, w: csv::Writer<BufWriter<File>>) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

fn write_csv<F>(path: &Path, header: &[&str], mut rows: F) -> Result<()>
where
    F: FnMut(&mut csv::Writer<BufWriter<File>>) -> std::result::Result<(), csv::Error>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    (|| {
        w.write_record(header)?;
        rows(&mut w)
    })()
    .map_err(|e| Error::from(e).with_path(path))?;
    finish(path, w)
}

/// Writes `events.csv` and `persons.csv` in a format [`load_corpus`] reads back.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let events_path = dir.join("events.csv");
    let persons_path = dir.join("persons.csv");
    write_csv(&events_path, &EVENT_COLUMNS, |w| {
        for e in corpus.events() {
            w.write_record([e.event_id.as_str(), e.event_type.label(), &e.date.to_string(), e.location.as_str()])?;
        }
        Ok(())
    })?;
    write_csv(&persons_path, &PERSON_COLUMNS, |w| {
        for p in corpus.persons() {
            w.write_record([
                p.record_id.as_str(),
                p.event_id.as_str(),
                p.first_name.as_str(),
                p.last_name.as_str(),
                p.role.label(),
            ])?;
        }
        Ok(())
    })?;
    Ok((events_path, persons_path))
}

pub fn write_quarantine(report: &IngestReport, path: &Path) -> Result<()> {
    write_csv(path, &["file", "line", "id", "reason"], |w| {
        for q in &report.quarantined {
            w.write_record([q.file, &q.line.to_string(), &q.id, &q.reason])?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct SetsFile<'a> {
    sets: Vec<SetEntry<'a>>,
}

#[derive(Serialize)]
struct SetEntry<'a> {
    set_id: &'a str,
    size: usize,
    /// Member whose role ranks highest in the ruleset hierarchy.
    representative: &'a str,
    members: Vec<MemberEntry<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vetoed_pairs: Option<Vec<VetoedPair<'a>>>,
}

#[derive(Serialize)]
struct MemberEntry<'a> {
    record_id: &'a str,
    event_id: &'a str,
    first_name: &'a str,
    last_name: &'a str,
    role: &'a str,
    event_type: &'a str,
    date: String,
    location: &'a str,
}

#[derive(Serialize)]
struct VetoedPair<'a> {
    record_a: &'a str,
    record_b: &'a str,
    rule: &'a str,
}

pub const SETS_CSV: &str = "sets.csv";
pub const SETS_JSON: &str = "sets.json";
pub const DECISIONS_CSV: &str = "decisions.csv";

/// Writes `sets.csv`, `sets.json` and, when decisions are given,
/// `decisions.csv`. Returns the written paths.
///
/// With decisions, each set in `sets.json` also lists member pairs that a
/// role rule vetoed but a chain of matches joined anyway.
pub fn write_results(
    out_dir: &Path,
    corpus: &Corpus,
    sets: &[RecordSet],
    decisions: Option<&[MatchDecision]>,
    ruleset: &RoleRuleSet,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut sorted: Vec<&RecordSet> = sets.iter().collect();
    sorted.sort();

    let sets_csv = out_dir.join(SETS_CSV);
    write_csv(&sets_csv, &["set_id", "record_id"], |w| {
        for s in &sorted {
            for m in &s.members {
                w.write_record([s.set_id.as_str(), m.as_str()])?;
            }
        }
        Ok(())
    })?;

    let mut vetoes: HashMap<&RecordId, Vec<VetoedPair<'_>>> = HashMap::new();
    if let Some(ds) = decisions {
        let set_of: HashMap<&RecordId, &RecordId> =
            sorted.iter().flat_map(|s| s.members.iter().map(move |m| (m, &s.set_id))).collect();
        for d in ds {
            if let (Some(rule), Some(sa), Some(sb)) = (&d.role_veto, set_of.get(&d.record_a), set_of.get(&d.record_b)) {
                if sa == sb {
                    let (a, b) =
                        if d.record_a <= d.record_b { (&d.record_a, &d.record_b) } else { (&d.record_b, &d.record_a) };
                    vetoes.entry(*sa).or_default().push(VetoedPair {
                        record_a: a.as_str(),
                        record_b: b.as_str(),
                        rule,
                    });
                }
            }
        }
        for v in vetoes.values_mut() {
            v.sort_by(|x, y| (x.record_a, x.record_b).cmp(&(y.record_a, y.record_b)));
        }
    }

    let mut entries = Vec::with_capacity(sorted.len());
    for s in &sorted {
        let mut members = Vec::with_capacity(s.members.len());
        let mut best: Option<(usize, &str)> = None;
        for id in &s.members {
            let p = corpus
                .person(id)
                .ok_or_else(|| Error::Contract(format!("set {} references unknown record {id}", s.set_id)))?;
            let e = corpus.event_of(p);
            let rank = ruleset.hierarchy_rank(&p.role);
            if best.is_none_or(|(r, _)| rank < r) {
                best = Some((rank, id.as_str()));
            }
            members.push(MemberEntry {
                record_id: id.as_str(),
                event_id: p.event_id.as_str(),
                first_name: p.first_name.as_str(),
                last_name: p.last_name.as_str(),
                role: p.role.label(),
                event_type: e.event_type.label(),
                date: e.date.to_string(),
                location: e.location.as_str(),
            });
        }
        entries.push(SetEntry {
            set_id: s.set_id.as_str(),
            size: s.members.len(),
            representative: best.map_or("", |(_, id)| id),
            members,
            vetoed_pairs: decisions.map(|_| vetoes.remove(&s.set_id).unwrap_or_default()),
        });
    }
    let sets_json = out_dir.join(SETS_JSON);
    let mut w = create(&sets_json)?;
    serde_json::to_writer_pretty(&mut w, &SetsFile { sets: entries })
        .map_err(|e| Error::from(e).with_path(&sets_json))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(&sets_json, e))?;

    let mut manifest = vec![sets_csv, sets_json];
    if let Some(ds) = decisions {
        let path = out_dir.join(DECISIONS_CSV);
        write_decisions(&path, ds)?;
        manifest.push(path);
    }
    Ok(manifest)
}

pub const DECISION_COLUMNS: [&str; 8] =
    ["record_a", "record_b", "matched", "name_score", "date_ok", "location_ok", "relationship_support", "role_veto"];

pub fn write_decisions(path: &Path, decisions: &[MatchDecision]) -> Result<()> {
    write_csv(path, &DECISION_COLUMNS, |w| {
        for d in decisions {
            w.write_record([
                d.record_a.as_str(),
                d.record_b.as_str(),
                if d.matched { "true" } else { "false" },
                &d.name_score.to_string(),
                if d.date_ok { "true" } else { "false" },
                if d.location_ok { "true" } else { "false" },
                &d.relationship_support.to_string(),
                d.role_veto.as_deref().unwrap_or(""),
            ])?;
        }
        Ok(())
    })
}

/// Reads `sets.csv` back into record sets (sorted by set id).
pub fn read_sets_csv(path: &Path) -> Result<Vec<RecordSet>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_sets(f).map_err(|e| e.with_path(path))
}

pub fn read_sets<R: Read>(reader: R) -> Result<Vec<RecordSet>> {
    let rows = read_two_column_csv(reader, "set_id", "record_id")?;
    let mut by_set: BTreeMap<String, Vec<RecordId>> = BTreeMap::new();
    for (set, record) in rows {
        by_set.entry(set).or_default().push(RecordId::new(record));
    }
    let mut sets: Vec<RecordSet> = by_set.into_values().map(RecordSet::from_members).collect();
    sets.sort();
    Ok(sets)
}
