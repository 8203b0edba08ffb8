//! Cleaning and standardization of names, locations and event dates.
//!
//! Everything downstream (blocking, string metrics, rules) operates on
//! [`NormalizedText`], never on raw transcriptions.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Lowercase, accent-free, punctuation-free text with single spaces.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Length in characters (not bytes).
    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Applies the text rules shared by names, locations and labels.
///
/// Lowercases, decomposes canonically and drops combining marks, turns every
/// non-alphanumeric character into a space, then collapses whitespace.
pub fn normalize_text(raw: &str) -> NormalizedText {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.to_lowercase().nfd() {
        if is_combining_mark(c) {
            continue;
        }
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            // Some decomposed starters are not lowercase yet (e.g. titlecase digraphs).
            out.extend(c.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    NormalizedText(out)
}

pub fn normalize_name(raw: &str) -> NormalizedText {
    normalize_text(raw)
}

/// Normalizes `raw` and resolves it through `aliases`.
pub fn normalize_location(raw: &str, aliases: &AliasTable) -> NormalizedText {
    aliases.resolve(normalize_text(raw))
}

/// Single-step mapping from alternative location spellings to a canonical name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AliasTable {
    map: HashMap<NormalizedText, NormalizedText>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from raw `(alias, canonical)` pairs.
    ///
    /// Both sides are normalized. Identity mappings are dropped. A canonical
    /// value that is itself an alias key, an alias mapped to two different
    /// canonical values, or an empty side is rejected.
    pub fn from_pairs<I, A, C>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, C)>,
        A: AsRef<str>,
        C: AsRef<str>,
    {
        let mut map: HashMap<NormalizedText, NormalizedText> = HashMap::new();
        for (alias, canonical) in pairs {
            let alias_n = normalize_text(alias.as_ref());
            let canonical_n = normalize_text(canonical.as_ref());
            if alias_n.is_empty() || canonical_n.is_empty() {
                return Err(Error::Config(format!(
                    "alias table: empty alias or canonical value ({:?} -> {:?})",
                    alias.as_ref(),
                    canonical.as_ref()
                )));
            }
            if alias_n == canonical_n {
                continue;
            }
            if let Some(existing) = map.get(&alias_n) {
                if existing != &canonical_n {
                    return Err(Error::Config(format!(
                        "alias table: {alias_n:?} maps to both {existing:?} and {canonical_n:?}"
                    )));
                }
            }
            map.insert(alias_n, canonical_n);
        }
        if let Some((alias, canonical)) = map.iter().find(|(_, c)| map.contains_key(*c)) {
            return Err(Error::Config(format!(
                "alias table: canonical value {canonical:?} (for {alias:?}) is itself an alias"
            )));
        }
        Ok(Self { map })
    }

    /// Reads a UTF-8 CSV with header `alias,canonical`.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file).map_err(|e| e.with_path(path))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = crate::io::read_two_column_csv(reader, "alias", "canonical")?;
        Self::from_pairs(rows)
    }

    pub fn resolve(&self, text: NormalizedText) -> NormalizedText {
        match self.map.get(&text) {
            Some(canonical) => canonical.clone(),
            None => text,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Mappings sorted by alias.
    pub fn entries(&self) -> Vec<(&NormalizedText, &NormalizedText)> {
        let mut v: Vec<_> = self.map.iter().collect();
        v.sort();
        v
    }
}

pub const MIN_YEAR: i32 = 1500;
pub const MAX_YEAR: i32 = 2100;

/// Date of a recorded event, precise to the year, month or day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventDate {
    year: i32,
    month: Option<u8>,
    day: Option<u8>,
}

impl EventDate {
    pub fn new(year: i32, month: Option<u8>, day: Option<u8>) -> Result<Self> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(Error::date("year", format!("{year} outside {MIN_YEAR}..={MAX_YEAR}")));
        }
        if let Some(m) = month {
            if !(1..=12).contains(&m) {
                return Err(Error::date("month", format!("{m} outside 1..=12")));
            }
        }
        match (month, day) {
            (None, Some(_)) => Err(Error::date("day", "day given without month")),
            (Some(m), Some(d)) => {
                if NaiveDate::from_ymd_opt(year, m.into(), d.into()).is_none() {
                    return Err(Error::date("day", format!("{year:04}-{m:02}-{d:02} is not a calendar date")));
                }
                Ok(Self { year, month, day })
            }
            _ => Ok(Self { year, month, day }),
        }
    }

    pub fn year_only(year: i32) -> Result<Self> {
        Self::new(year, None, None)
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> Option<u8> {
        self.month
    }

    pub fn day(&self) -> Option<u8> {
        self.day
    }

    /// Sort key with missing components treated as 0.
    pub fn sort_key(&self) -> (i32, u8, u8) {
        (self.year, self.month.unwrap_or(0), self.day.unwrap_or(0))
    }
}

impl fmt::Display for EventDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for EventDate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_date(s)
    }
}

/// Parses `YYYY`, `YYYY-MM` or `YYYY-MM-DD`.
pub fn parse_date(raw: &str) -> Result<EventDate> {
    let raw = raw.trim();
    let mut parts = raw.split('-');
    let year = parse_component(parts.next(), "year", 4)?;
    let month = parts.next().map(|p| parse_component(Some(p), "month", 2)).transpose()?;
    let day = parts.next().map(|p| parse_component(Some(p), "day", 2)).transpose()?;
    if parts.next().is_some() {
        return Err(Error::date("date", format!("{raw:?} has too many components")));
    }
    let month = month.map(|m| u8::try_from(m).map_err(|_| Error::date("month", format!("{m} outside 1..=12"))));
    let day = day.map(|d| u8::try_from(d).map_err(|_| Error::date("day", format!("{d} outside 1..=31"))));
    EventDate::new(year as i32, month.transpose()?, day.transpose()?)
}

fn parse_component(part: Option<&str>, field: &'static str, width: usize) -> Result<u32> {
    let part = part.unwrap_or("");
    if part.len() != width || !part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::date(field, format!("expected {width} digits, got {part:?}")));
    }
    Ok(part.parse().expect("ascii digits"))
}

impl Serialize for EventDate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EventDate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_date(&s).map_err(serde::de::Error::custom)
    }
}
